//! Phase-space lattice, symplectic forms and symplectic Fourier transforms.
//!
//! Sites are centered: along each axis the integer coordinate runs over
//! `-h..=h` with `h = (n - 1) / 2`. A phase point `X = (x, ξ)` is stored at
//! linear index `p * n^d + q` where `p` and `q` are the row-major position and
//! momentum indices. Doubled points `(X_L, X_R)` use `XL * n^{2d} + XR`.

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Discretization of configuration space and its dual momentum lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub d: usize,
    pub n: usize,
    #[serde(rename = "L")]
    pub l: f64,
}

impl GridSpec {
    pub fn new(d: usize, n: usize, l: f64) -> Result<Self> {
        if d != 1 && d != 2 {
            return Err(Error::UnsupportedDimension(d));
        }
        if n.is_multiple_of(2) {
            return Err(Error::EvenGrid(n));
        }
        if n < 3 {
            return Err(Error::GridTooSmall(n));
        }
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::BadLength(l));
        }
        Ok(Self { d, n, l })
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.d, self.n, self.l).map(|_| ())
    }

    pub fn dx(&self) -> f64 {
        self.l / self.n as f64
    }

    pub fn dxi(&self) -> f64 {
        2.0 * PI / self.l
    }

    /// `Δx·Δξ`, equal to `2π/n`.
    pub fn cell(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Phase-space measure weight `(Δx Δξ)^d`.
    pub fn mu(&self) -> f64 {
        self.cell().powi(self.d as i32)
    }

    pub fn half(&self) -> i64 {
        (self.n as i64 - 1) / 2
    }

    pub fn sites(&self) -> Vec<i64> {
        let h = self.half();
        (-h..=h).collect()
    }

    pub fn position_sites(&self) -> Vec<f64> {
        self.sites().iter().map(|&k| k as f64 * self.dx()).collect()
    }

    pub fn momentum_sites(&self) -> Vec<f64> {
        self.sites().iter().map(|&k| k as f64 * self.dxi()).collect()
    }

    /// Number of position sites, `n^d` (the state-space dimension).
    pub fn npos(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    /// Number of phase-space sites, `n^{2d}`.
    pub fn nphase(&self) -> usize {
        self.npos() * self.npos()
    }

    /// Representative of `k` in `-h..=h` modulo `n`.
    pub fn reduce(&self, k: i64) -> i64 {
        let n = self.n as i64;
        let h = self.half();
        (k + h).rem_euclid(n) - h
    }

    /// Row-major index of a position multi-index, reduced modulo `n`.
    pub fn pos_index(&self, k: &[i64]) -> usize {
        let n = self.n as i64;
        let h = self.half();
        k.iter().fold(0usize, |acc, &ki| {
            acc * self.n + ((ki + h).rem_euclid(n)) as usize
        })
    }

    pub fn pos_sites(&self, p: usize) -> Vec<i64> {
        let h = self.half();
        let mut out = vec![0i64; self.d];
        let mut r = p;
        for i in (0..self.d).rev() {
            out[i] = (r % self.n) as i64 - h;
            r /= self.n;
        }
        out
    }

    pub fn phase_index(&self, k: &[i64], m: &[i64]) -> usize {
        self.pos_index(k) * self.npos() + self.pos_index(m)
    }

    pub fn phase_sites(&self, idx: usize) -> (Vec<i64>, Vec<i64>) {
        let np = self.npos();
        (self.pos_sites(idx / np), self.pos_sites(idx % np))
    }

    pub fn point(&self, idx: usize) -> PhasePoint {
        let (k, m) = self.phase_sites(idx);
        PhasePoint {
            x: k.iter().map(|&v| v as f64 * self.dx()).collect(),
            xi: m.iter().map(|&v| v as f64 * self.dxi()).collect(),
        }
    }

    /// Integer lattice coordinates of `X`; points outside the fundamental
    /// cell are allowed and are not reduced.
    pub fn locate(&self, x: &PhasePoint) -> Result<LatticePoint> {
        x.check_dim(self.d)?;
        let tol = 1e-9;
        let snap = |v: f64, step: f64| -> Result<i64> {
            let r = v / step;
            let k = r.round();
            if (r - k).abs() > tol {
                Err(Error::OffGrid { tol: tol * step })
            } else {
                Ok(k as i64)
            }
        };
        let j = x.x.iter().map(|&v| snap(v, self.dx())).collect::<Result<Vec<_>>>()?;
        let l = x.xi.iter().map(|&v| snap(v, self.dxi())).collect::<Result<Vec<_>>>()?;
        Ok(LatticePoint { j, l })
    }

    pub fn lattice_point(&self, idx: usize) -> LatticePoint {
        let (j, l) = self.phase_sites(idx);
        LatticePoint { j, l }
    }

    pub fn same(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

/// A phase-space point `X = (x, ξ)`, on or off the lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
}

impl PhasePoint {
    pub fn new(x: Vec<f64>, xi: Vec<f64>) -> Result<Self> {
        if x.len() != xi.len() {
            return Err(Error::DimensionMismatch { expected: x.len(), got: xi.len() });
        }
        Ok(Self { x, xi })
    }

    pub fn zero(d: usize) -> Self {
        Self { x: vec![0.0; d], xi: vec![0.0; d] }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if self.x.len() != d || self.xi.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: self.x.len() });
        }
        Ok(())
    }

    pub fn on_grid(&self, grid: &GridSpec) -> bool {
        grid.locate(self).is_ok()
    }

    pub fn add(&self, o: &PhasePoint) -> PhasePoint {
        PhasePoint {
            x: self.x.iter().zip(&o.x).map(|(a, b)| a + b).collect(),
            xi: self.xi.iter().zip(&o.xi).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn neg(&self) -> PhasePoint {
        PhasePoint {
            x: self.x.iter().map(|a| -a).collect(),
            xi: self.xi.iter().map(|a| -a).collect(),
        }
    }
}

/// A point `(X_L, X_R)` of doubled phase space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoubledPoint {
    pub left: PhasePoint,
    pub right: PhasePoint,
}

/// Integer lattice coordinates `(j, l)`; `X = (j Δx, l Δξ)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticePoint {
    pub j: Vec<i64>,
    pub l: Vec<i64>,
}

impl LatticePoint {
    pub fn zero(d: usize) -> Self {
        Self { j: vec![0; d], l: vec![0; d] }
    }

    pub fn add(&self, o: &LatticePoint) -> LatticePoint {
        LatticePoint {
            j: self.j.iter().zip(&o.j).map(|(a, b)| a + b).collect(),
            l: self.l.iter().zip(&o.l).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn neg(&self) -> LatticePoint {
        LatticePoint {
            j: self.j.iter().map(|a| -a).collect(),
            l: self.l.iter().map(|a| -a).collect(),
        }
    }

    pub fn to_point(&self, grid: &GridSpec) -> PhasePoint {
        PhasePoint {
            x: self.j.iter().map(|&v| v as f64 * grid.dx()).collect(),
            xi: self.l.iter().map(|&v| v as f64 * grid.dxi()).collect(),
        }
    }

    /// Integer symplectic pairing `l·j' − j·l'`; `σ = (2π/n)` times this.
    pub fn isigma(&self, o: &LatticePoint) -> i64 {
        let a: i64 = self.l.iter().zip(&o.j).map(|(a, b)| a * b).sum();
        let b: i64 = self.j.iter().zip(&o.l).map(|(a, b)| a * b).sum();
        a - b
    }
}

/// `σ(X, Y) = ξ·y − x·η`.
pub fn symplectic_form(x: &PhasePoint, y: &PhasePoint) -> Result<f64> {
    if x.dim() != y.dim() || x.xi.len() != y.xi.len() {
        return Err(Error::DimensionMismatch { expected: x.dim(), got: y.dim() });
    }
    let a: f64 = x.xi.iter().zip(&y.x).map(|(a, b)| a * b).sum();
    let b: f64 = x.x.iter().zip(&y.xi).map(|(a, b)| a * b).sum();
    Ok(a - b)
}

/// `Σ(X, Y) = σ(X_L, Y_L) + σ(X_R, Y_R)`.
pub fn doubled_symplectic_form(x: &DoubledPoint, y: &DoubledPoint) -> Result<f64> {
    Ok(symplectic_form(&x.left, &y.left)? + symplectic_form(&x.right, &y.right)?)
}

/// `r(Y_L, Y_R) = (Y_L, −Y_R)`.
pub fn reflect_right(y: &DoubledPoint) -> DoubledPoint {
    DoubledPoint { left: y.left.clone(), right: y.right.neg() }
}

/// `⟨ξ⟩ = √(1 + |ξ|²)`.
pub fn japanese_bracket(xi: &[f64]) -> f64 {
    (1.0 + xi.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

/// Both sides of Peetre's inequality `⟨ξ−η⟩^m ≤ 2^{|m|/2}⟨ξ⟩^m⟨η⟩^{|m|}`.
pub fn peetre_sides(xi: &[f64], eta: &[f64], m: f64) -> (f64, f64) {
    let diff: Vec<f64> = xi.iter().zip(eta).map(|(a, b)| a - b).collect();
    let lhs = japanese_bracket(&diff).powf(m);
    let rhs = 2f64.powf(m.abs() / 2.0) * japanese_bracket(xi).powf(m) * japanese_bracket(eta).powf(m.abs());
    (lhs, rhs)
}

/// Complex function sampled on the phase-space lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSymbol {
    pub grid: GridSpec,
    pub values: Vec<C64>,
}

impl PhaseSymbol {
    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, values: vec![C64::new(0.0, 0.0); grid.nphase()] }
    }

    pub fn constant(grid: GridSpec, c: C64) -> Self {
        Self { grid, values: vec![c; grid.nphase()] }
    }

    pub fn from_values(grid: GridSpec, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.nphase() {
            return Err(Error::DimensionMismatch { expected: grid.nphase(), got: values.len() });
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(x, ξ)` at every lattice site.
    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64], &[f64]) -> C64) -> Self {
        let values = (0..grid.nphase())
            .map(|i| {
                let p = grid.point(i);
                f(&p.x, &p.xi)
            })
            .collect();
        Self { grid, values }
    }

    /// The character `X ↦ e^{iσ(X, Y)}`.
    pub fn plane_wave(grid: GridSpec, y: &LatticePoint) -> Self {
        let c = grid.cell();
        let values = (0..grid.nphase())
            .map(|i| {
                let x = grid.lattice_point(i);
                C64::from_polar(1.0, c * x.isigma(y) as f64)
            })
            .collect();
        Self { grid, values }
    }

    pub fn conj(&self) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| v.conj()).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| v * s).collect() }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { grid: self.grid, values: self.values.iter().zip(&o.values).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self { grid: self.grid, values: self.values.iter().zip(&o.values).map(|(a, b)| a - b).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self { grid: self.grid, values: self.values.iter().zip(&o.values).map(|(a, b)| a * b).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.values)
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        max_abs_diff(&self.values, &o.values)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// `μ Σ_X f(X)`, the lattice integral.
    pub fn integral(&self) -> C64 {
        self.values.iter().sum::<C64>() * self.grid.mu()
    }

    /// Bilinear pairing `μ Σ f g`.
    pub fn pair(&self, o: &Self) -> C64 {
        self.values.iter().zip(&o.values).map(|(a, b)| a * b).sum::<C64>() * self.grid.mu()
    }

    pub fn at(&self, k: &[i64], m: &[i64]) -> C64 {
        self.values[self.grid.phase_index(k, m)]
    }
}

/// Complex function on doubled phase space, also used for kernels on `Ξ × Ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubledSymbol {
    pub grid: GridSpec,
    pub values: Vec<C64>,
}

impl DoubledSymbol {
    pub fn zeros(grid: GridSpec) -> Self {
        let n = grid.nphase();
        Self { grid, values: vec![C64::new(0.0, 0.0); n * n] }
    }

    pub fn constant(grid: GridSpec, c: C64) -> Self {
        let n = grid.nphase();
        Self { grid, values: vec![c; n * n] }
    }

    pub fn from_values(grid: GridSpec, values: Vec<C64>) -> Result<Self> {
        let n = grid.nphase();
        if values.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: values.len() });
        }
        Ok(Self { grid, values })
    }

    /// `f_L ⊗ f_R`.
    pub fn tensor(fl: &PhaseSymbol, fr: &PhaseSymbol) -> Result<Self> {
        fl.grid.same(&fr.grid)?;
        let n = fl.grid.nphase();
        let mut values = Vec::with_capacity(n * n);
        for a in &fl.values {
            for b in &fr.values {
                values.push(a * b);
            }
        }
        Ok(Self { grid: fl.grid, values })
    }

    pub fn side(&self) -> usize {
        self.grid.nphase()
    }

    pub fn at(&self, xl: usize, xr: usize) -> C64 {
        self.values[xl * self.side() + xr]
    }

    pub fn conj(&self) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| v.conj()).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| v * s).collect() }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { grid: self.grid, values: self.values.iter().zip(&o.values).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self { grid: self.grid, values: self.values.iter().zip(&o.values).map(|(a, b)| a - b).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self { grid: self.grid, values: self.values.iter().zip(&o.values).map(|(a, b)| a * b).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.values)
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        max_abs_diff(&self.values, &o.values)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// `μ² Σ F`.
    pub fn integral(&self) -> C64 {
        self.values.iter().sum::<C64>() * self.grid.mu().powi(2)
    }

    /// Bilinear pairing `μ² Σ F G`.
    pub fn pair(&self, o: &Self) -> C64 {
        self.values.iter().zip(&o.values).map(|(a, b)| a * b).sum::<C64>() * self.grid.mu().powi(2)
    }
}

/// `G^t(X_L, X_R) = G(X_R, X_L)`.
pub fn transpose_doubled(f: &DoubledSymbol) -> DoubledSymbol {
    let n = f.side();
    let mut values = vec![C64::new(0.0, 0.0); n * n];
    for a in 0..n {
        for b in 0..n {
            values[b * n + a] = f.values[a * n + b];
        }
    }
    DoubledSymbol { grid: f.grid, values }
}

pub(crate) fn max_abs(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Centered DFT along one axis of an `n^axes` array:
/// `out[t] = Σ_k e^{sign·2πi (t−h)(k−h)/n} in[k]`.
pub(crate) fn centered_dft_axis(data: &mut [C64], n: usize, axes: usize, axis: usize, forward_sign_negative: bool, planner: &mut FftPlanner<f64>) {
    let fft = if forward_sign_negative { planner.plan_fft_forward(n) } else { planner.plan_fft_inverse(n) };
    let h = (n - 1) / 2;
    let stride = n.pow((axes - 1 - axis) as u32);
    let total = data.len();
    let block = stride * n;
    let mut line = vec![C64::new(0.0, 0.0); n];
    let mut outer = 0;
    while outer < total {
        for inner in 0..stride {
            let base = outer + inner;
            for v in 0..n {
                line[v] = data[base + ((v + h) % n) * stride];
            }
            fft.process(&mut line);
            for t in 0..n {
                data[base + t * stride] = line[(t + h + 1) % n];
            }
        }
        outer += block;
    }
}

/// Applies `F_σ` independently on each of `slots` consecutive phase-space
/// factors of `data`.
fn symplectic_transform(data: &[C64], grid: &GridSpec, slots: usize) -> Vec<C64> {
    let d = grid.d;
    let n = grid.n;
    let axes = 2 * d * slots;
    let mut work = data.to_vec();
    let mut planner = FftPlanner::new();
    for s in 0..slots {
        for i in 0..d {
            // e^{+iη·x}: position axes carry the η output
            centered_dft_axis(&mut work, n, axes, s * 2 * d + i, false, &mut planner);
            // e^{−iy·ξ}: momentum axes carry the y output
            centered_dft_axis(&mut work, n, axes, s * 2 * d + d + i, true, &mut planner);
        }
    }
    // swap the (η, y) blocks into (y, η) order within every slot
    let np = grid.npos();
    let side = np * np;
    let scale = (n as f64).powi(-((d * slots) as i32));
    let mut out = vec![C64::new(0.0, 0.0); work.len()];
    for (idx, v) in work.iter().enumerate() {
        let mut rem = idx;
        let mut target = 0usize;
        let mut mult = 1usize;
        for _ in 0..slots {
            let x = rem % side;
            rem /= side;
            let (p, q) = (x / np, x % np);
            target += (q * np + p) * mult;
            mult *= side;
        }
        out[target] = v * scale;
    }
    out
}

/// `(F_σ f)(X) = (2π)^{−d} μ Σ_{X'} e^{iσ(X,X')} f(X')`.
pub fn sfourier(f: &PhaseSymbol) -> PhaseSymbol {
    PhaseSymbol { grid: f.grid, values: symplectic_transform(&f.values, &f.grid, 1) }
}

/// Spectral derivative of a phase-space symbol along one of its `2d` axes;
/// axes `0..d` are positions, `d..2d` momenta.
pub fn spectral_derivative(f: &PhaseSymbol, axis: usize) -> PhaseSymbol {
    let g = f.grid;
    let n = g.n;
    let spacing = if axis < g.d { g.dx() } else { g.dxi() };
    let k0 = 2.0 * PI / (n as f64 * spacing);
    let axes = 2 * g.d;
    let mut work = f.values.clone();
    let mut planner = FftPlanner::new();
    centered_dft_axis(&mut work, n, axes, axis, true, &mut planner);
    let h = g.half();
    let stride = n.pow((axes - 1 - axis) as u32);
    for (i, v) in work.iter_mut().enumerate() {
        let t = ((i / stride) % n) as i64 - h;
        *v *= C64::new(0.0, k0 * t as f64 / n as f64);
    }
    centered_dft_axis(&mut work, n, axes, axis, false, &mut planner);
    PhaseSymbol { grid: g, values: work }
}

/// `F_Σ` on doubled phase space; `F_σ` acting on both factors.
pub fn sfourier_doubled(f: &DoubledSymbol) -> DoubledSymbol {
    DoubledSymbol { grid: f.grid, values: symplectic_transform(&f.values, &f.grid, 2) }
}
