//! Magnetic Weyl systems, quantization and its lattice inverse.
//!
//! States live on the raw position lattice; physical positions are `ε·x_k`.
//! The Weyl system for an integer lattice point `(j, l)` is the generalized
//! permutation
//!
//! `w(j,l)[k, k⊕j] = e^{−iε(x_k + y_j/2)·η_l} · e^{−i(λ/ε)Γ^A[εx_k, εx_{k⊕j}]}`
//!
//! where `k⊕j` wraps periodically and the circulation runs between the
//! physical sites actually connected. Unreduced `(j, l)` are accepted; they
//! differ from their reduced representative by a sign (see [`lattice_character`]).

use crate::error::{Error, Result};
use crate::grid::{sfourier, GridSpec, LatticePoint, PhasePoint, PhaseSymbol};
use crate::magnetics::{circulation, exterior_derivative, potential_mismatch, GaugeFunction, MagneticField, VectorPotential, DEFAULT_NODES};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::OnceLock;

pub type CMatrix = DMatrix<C64>;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Largest state dimension `n^d` for which dense super-operator forms are built.
pub const DENSE_CAP: usize = 32;

/// Semiclassical and coupling parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub eps: f64,
    pub lambda: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self { eps: 1.0, lambda: 1.0 }
    }
}

impl Params {
    /// `ε ∈ (0, 1]`, `λ ∈ [0, 1]`.
    pub fn new(eps: f64, lambda: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::Parameter(format!("eps must lie in (0, 1] (got {eps})")));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::Parameter(format!("lambda must lie in [0, 1] (got {lambda})")));
        }
        Ok(Self { eps, lambda })
    }
}

/// A matrix on the position-site state space.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub grid: GridSpec,
    pub mat: CMatrix,
    /// Identifies the vector potential used; empty for gauge-free operators.
    pub gauge: String,
    pub params: Params,
}

impl OperatorMatrix {
    pub fn new(grid: GridSpec, mat: CMatrix, gauge: impl Into<String>, params: Params) -> Result<Self> {
        let np = grid.npos();
        if mat.nrows() != np || mat.ncols() != np {
            return Err(Error::DimensionMismatch { expected: np, got: mat.nrows() });
        }
        Ok(Self { grid, mat, gauge: gauge.into(), params })
    }

    pub fn identity(grid: GridSpec, params: Params) -> Self {
        let np = grid.npos();
        Self { grid, mat: CMatrix::identity(np, np), gauge: String::new(), params }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    fn with(&self, mat: CMatrix) -> Self {
        Self { grid: self.grid, mat, gauge: self.gauge.clone(), params: self.params }
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.grid.same(&o.grid)?;
        Ok(self.with(&self.mat * &o.mat))
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.grid.same(&o.grid)?;
        Ok(self.with(&self.mat + &o.mat))
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.grid.same(&o.grid)?;
        Ok(self.with(&self.mat - &o.mat))
    }

    pub fn scale(&self, s: C64) -> Self {
        self.with(&self.mat * s)
    }

    pub fn adjoint(&self) -> Self {
        self.with(self.mat.adjoint())
    }

    /// `[self, o]`.
    pub fn commutator(&self, o: &Self) -> Result<Self> {
        self.grid.same(&o.grid)?;
        Ok(self.with(&self.mat * &o.mat - &o.mat * &self.mat))
    }

    pub fn frobenius(&self) -> f64 {
        self.mat.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn op_norm(&self) -> f64 {
        self.mat.clone().singular_values().iter().cloned().fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        self.mat.iter().zip(o.mat.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// `‖T T† − I‖_max`.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.dim();
        (&self.mat * self.mat.adjoint() - CMatrix::identity(n, n)).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `⟨A, B⟩_HS = tr(A† B)`.
    pub fn hs_inner(&self, o: &Self) -> C64 {
        self.mat.iter().zip(o.mat.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        self.grid.same(&psi.grid)?;
        let v = nalgebra::DVector::from_vec(psi.values.clone());
        Ok(StateVector { grid: self.grid, values: (&self.mat * v).iter().copied().collect() })
    }
}

/// Wave function sampled on position sites.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub grid: GridSpec,
    pub values: Vec<C64>,
}

impl StateVector {
    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> C64) -> Self {
        let values = (0..grid.npos())
            .map(|p| {
                let x: Vec<f64> = grid.pos_sites(p).iter().map(|&k| k as f64 * grid.dx()).collect();
                f(&x)
            })
            .collect();
        Self { grid, values }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

/// `κ(W) = Π_i (−1)^{b_i j_i + a_i l_i + a_i b_i}` for `W = W_red + n(a, b)`;
/// `w(W) = κ(W) w(W_red)`.
pub fn lattice_character(grid: &GridSpec, w: &LatticePoint) -> f64 {
    let n = grid.n as i64;
    let h = grid.half();
    let mut parity = 0i64;
    for i in 0..grid.d {
        let a = (w.j[i] + h).div_euclid(n);
        let b = (w.l[i] + h).div_euclid(n);
        let jr = w.j[i] - a * n;
        let lr = w.l[i] - b * n;
        parity += b * jr + a * lr + a * b;
    }
    if parity.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Applies an `n × n` matrix along every axis of an `n^d` tensor.
pub(crate) fn apply_axes(m: &CMatrix, v: &[C64], n: usize, d: usize) -> Vec<C64> {
    let mut cur = v.to_vec();
    let mut line = vec![ZERO; n];
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        let block = stride * n;
        let mut out = vec![ZERO; cur.len()];
        let mut outer = 0;
        while outer < cur.len() {
            for inner in 0..stride {
                let base = outer + inner;
                for (t, slot) in line.iter_mut().enumerate() {
                    *slot = cur[base + t * stride];
                }
                for r in 0..n {
                    let mut acc = ZERO;
                    for c in 0..n {
                        acc += m[(r, c)] * line[c];
                    }
                    out[base + r * stride] = acc;
                }
            }
            outer += block;
        }
        cur = out;
    }
    cur
}

/// Shared context of the lattice calculus: grid, parameters, field and
/// (optionally) a potential, with caches for gauge phases and the symbol basis.
#[derive(Debug)]
pub struct Calculus {
    pub grid: GridSpec,
    pub params: Params,
    pub field: MagneticField,
    pub potential: Option<VectorPotential>,
    pub nodes: usize,
    gauge_phases: OnceLock<Vec<C64>>,
    vandermonde: OnceLock<(CMatrix, CMatrix)>,
    basis: OnceLock<(CMatrix, CMatrix)>,
}

impl Clone for Calculus {
    fn clone(&self) -> Self {
        Self::build(self.grid, self.params, self.field.clone(), self.potential.clone(), self.nodes)
    }
}

impl Calculus {
    fn build(grid: GridSpec, params: Params, field: MagneticField, potential: Option<VectorPotential>, nodes: usize) -> Self {
        Self {
            grid,
            params,
            field,
            potential,
            nodes,
            gauge_phases: OnceLock::new(),
            vandermonde: OnceLock::new(),
            basis: OnceLock::new(),
        }
    }

    /// Context with a vector potential; the field is `dA`.
    pub fn new(grid: GridSpec, params: Params, potential: VectorPotential) -> Result<Self> {
        grid.validate()?;
        Params::new(params.eps, params.lambda)?;
        potential.validate()?;
        if potential.d() != grid.d {
            return Err(Error::DimensionMismatch { expected: grid.d, got: potential.d() });
        }
        let field = exterior_derivative(&potential);
        Ok(Self::build(grid, params, field, Some(potential), DEFAULT_NODES))
    }

    /// Field-only context; operator routes are unavailable.
    pub fn from_field(grid: GridSpec, params: Params, field: MagneticField) -> Result<Self> {
        grid.validate()?;
        Params::new(params.eps, params.lambda)?;
        field.validate()?;
        if field.d() != grid.d {
            return Err(Error::DimensionMismatch { expected: grid.d, got: field.d() });
        }
        Ok(Self::build(grid, params, field, None, DEFAULT_NODES))
    }

    /// Context with both; `dA = B` is checked to `1e−8` on a probe set.
    pub fn with_field_and_potential(grid: GridSpec, params: Params, field: MagneticField, potential: VectorPotential) -> Result<Self> {
        let mut c = Self::new(grid, params, potential)?;
        field.validate()?;
        let mismatch = potential_mismatch(c.potential.as_ref().expect("set"), &field)?;
        if mismatch > 1e-8 {
            return Err(Error::Config(format!("dA differs from the declared field by {mismatch:e}")));
        }
        c.field = field;
        Ok(c)
    }

    pub fn with_nodes(mut self, nodes: usize) -> Result<Self> {
        if nodes < 1 {
            return Err(Error::Parameter("circulation nodes must be at least 1".into()));
        }
        self.nodes = nodes;
        self.gauge_phases = OnceLock::new();
        self.basis = OnceLock::new();
        Ok(self)
    }

    /// Same grid and field, new parameters.
    pub fn with_params(&self, params: Params) -> Result<Self> {
        Params::new(params.eps, params.lambda)?;
        Ok(Self::build(self.grid, params, self.field.clone(), self.potential.clone(), self.nodes))
    }

    /// Same grid and parameters, potential `A + ε dχ`.
    pub fn gauge_shifted(&self, chi: &GaugeFunction) -> Result<Self> {
        let a = self.potential()?;
        let shifted = crate::magnetics::gauge_shift(a, chi, self.params.eps);
        Ok(Self::build(self.grid, self.params, self.field.clone(), Some(shifted), self.nodes))
    }

    pub fn potential(&self) -> Result<&VectorPotential> {
        self.potential.as_ref().ok_or(Error::MissingPotential)
    }

    pub fn gauge_tag(&self) -> String {
        match &self.potential {
            Some(a) => serde_json::to_string(a).unwrap_or_default(),
            None => String::new(),
        }
    }

    pub fn eps(&self) -> f64 {
        self.params.eps
    }

    pub fn lambda(&self) -> f64 {
        self.params.lambda
    }

    fn physical(&self, p: usize) -> Vec<f64> {
        let s = self.params.eps * self.grid.dx();
        self.grid.pos_sites(p).iter().map(|&k| k as f64 * s).collect()
    }

    /// `e^{−i(λ/ε)Γ^A[εx_k, εx_{k'}]}` for every pair of position indices.
    fn gauge_table(&self) -> Result<&[C64]> {
        let a = self.potential()?;
        Ok(self.gauge_phases.get_or_init(|| {
            let np = self.grid.npos();
            let mut t = vec![C64::new(1.0, 0.0); np * np];
            if a.is_zero() || self.params.lambda == 0.0 {
                return t;
            }
            let pts: Vec<Vec<f64>> = (0..np).map(|p| self.physical(p)).collect();
            let k = self.params.lambda / self.params.eps;
            for p in 0..np {
                for q in 0..np {
                    let g = circulation(a, &pts[p], &pts[q], self.nodes).expect("dimensions checked");
                    t[p * np + q] = C64::from_polar(1.0, -k * g);
                }
            }
            t
        }))
    }

    /// `V_ε[k, l] = e^{−2πiε k l / n}` on centered sites, and its inverse.
    fn vandermonde(&self) -> Result<&(CMatrix, CMatrix)> {
        if self.vandermonde.get().is_none() {
            let n = self.grid.n;
            let h = self.grid.half();
            let e = self.params.eps;
            let v = CMatrix::from_fn(n, n, |r, c| {
                let (k, l) = (r as i64 - h, c as i64 - h);
                C64::from_polar(1.0, -2.0 * PI * e * (k * l) as f64 / n as f64)
            });
            let inv = v.clone().lu().try_inverse().ok_or_else(|| Error::Singular("lattice Vandermonde factor".into()))?;
            let _ = self.vandermonde.set((v, inv));
        }
        Ok(self.vandermonde.get().expect("initialized"))
    }

    fn shift_index(&self, p: usize, j: &[i64]) -> usize {
        let k = self.grid.pos_sites(p);
        let s: Vec<i64> = k.iter().zip(j).map(|(a, b)| a + b).collect();
        self.grid.pos_index(&s)
    }

    pub fn operator(&self, mat: CMatrix) -> Result<OperatorMatrix> {
        OperatorMatrix::new(self.grid, mat, self.gauge_tag(), self.params)
    }

    /// `Q_j = diag(ε x_j)`, `j` one-based.
    pub fn position_op(&self, j: usize) -> Result<OperatorMatrix> {
        position_op(&self.grid, j, self.params.eps).map(|mut o| {
            o.params = self.params;
            o
        })
    }

    /// `P^A_j = −i∂_j (spectral) − λ A_j(εx)`, `j` one-based.
    pub fn momentum_op(&self, j: usize) -> Result<OperatorMatrix> {
        let a = self.potential()?;
        momentum_op(a, &self.grid, j, self.params)
    }

    /// `w^A(Y)` for an on-grid phase point.
    pub fn weyl_system(&self, y: &PhasePoint) -> Result<OperatorMatrix> {
        let lp = self.grid.locate(y)?;
        self.weyl_system_lattice(&lp)
    }

    /// `w^A(j, l)` for integer coordinates, unreduced allowed.
    pub fn weyl_system_lattice(&self, y: &LatticePoint) -> Result<OperatorMatrix> {
        let g = self.gauge_table()?;
        let np = self.grid.npos();
        let n = self.grid.n as f64;
        let e = self.params.eps;
        let mut m = CMatrix::zeros(np, np);
        for p in 0..np {
            let k = self.grid.pos_sites(p);
            let q = self.shift_index(p, &y.j);
            let arg: f64 = (0..self.grid.d).map(|i| (k[i] as f64 + 0.5 * y.j[i] as f64) * y.l[i] as f64).sum();
            m[(p, q)] = C64::from_polar(1.0, -2.0 * PI * e * arg / n) * g[p * np + q];
        }
        self.operator(m)
    }

    /// `op^A(f) = (2π)^{−d} μ Σ_X (F_σ f)(X) w^A(X)`, assembled displacement by displacement.
    pub fn quantize(&self, f: &PhaseSymbol) -> Result<OperatorMatrix> {
        self.grid.same(&f.grid)?;
        let g = self.gauge_table()?;
        let (v, _) = self.vandermonde()?;
        let fh = sfourier(f);
        let grid = &self.grid;
        let np = grid.npos();
        let (n, d) = (grid.n, grid.d);
        let e = self.params.eps;
        let norm = (n as f64).powi(-(d as i32));
        let mut m = CMatrix::zeros(np, np);
        let mut col = vec![ZERO; np];
        for pj in 0..np {
            let j = grid.pos_sites(pj);
            for (pl, c) in col.iter_mut().enumerate() {
                let l = grid.pos_sites(pl);
                let jl: i64 = j.iter().zip(&l).map(|(a, b)| a * b).sum();
                *c = fh.values[pj * np + pl] * C64::from_polar(1.0, -PI * e * jl as f64 / n as f64);
            }
            let u = apply_axes(v, &col, n, d);
            for p in 0..np {
                let q = self.shift_index(p, &j);
                m[(p, q)] = u[p] * g[p * np + q] * norm;
            }
        }
        self.operator(m)
    }

    /// Lattice inverse of [`Calculus::quantize`].
    pub fn wigner(&self, t: &OperatorMatrix) -> Result<PhaseSymbol> {
        self.grid.same(&t.grid)?;
        let g = self.gauge_table()?;
        let (_, vinv) = self.vandermonde()?;
        let grid = &self.grid;
        let np = grid.npos();
        let (n, d) = (grid.n, grid.d);
        let e = self.params.eps;
        let norm = (n as f64).powi(d as i32);
        let mut fh = vec![ZERO; np * np];
        let mut u = vec![ZERO; np];
        for pj in 0..np {
            let j = grid.pos_sites(pj);
            for (p, slot) in u.iter_mut().enumerate() {
                let q = self.shift_index(p, &j);
                *slot = t.mat[(p, q)] * g[p * np + q].conj() * norm;
            }
            let v = apply_axes(vinv, &u, n, d);
            for pl in 0..np {
                let l = grid.pos_sites(pl);
                let jl: i64 = j.iter().zip(&l).map(|(a, b)| a * b).sum();
                fh[pj * np + pl] = v[pl] * C64::from_polar(1.0, PI * e * jl as f64 / n as f64);
            }
        }
        Ok(sfourier(&PhaseSymbol { grid: *grid, values: fh }))
    }

    /// `e^{+iλχ(Q)} T e^{−iλχ(Q)}` with `χ` at physical positions.
    pub fn conjugate_by_gauge(&self, t: &OperatorMatrix, chi: &GaugeFunction) -> Result<OperatorMatrix> {
        conjugate_by_gauge(t, chi, self.params.eps, self.params.lambda)
    }

    /// `Q` with `Q[:, X] = vec(op(δ_X))` and its inverse `W`, row-major `vec`.
    pub fn basis(&self) -> Result<&(CMatrix, CMatrix)> {
        if self.basis.get().is_none() {
            let np = self.grid.npos();
            if np > DENSE_CAP {
                return Err(Error::DenseCap(np));
            }
            let nn = self.grid.nphase();
            let mut q = CMatrix::zeros(nn, nn);
            let mut delta = PhaseSymbol::zeros(self.grid);
            for x in 0..nn {
                delta.values[x] = C64::new(1.0, 0.0);
                let op = self.quantize(&delta)?;
                delta.values[x] = ZERO;
                for a in 0..np {
                    for b in 0..np {
                        q[(a * np + b, x)] = op.mat[(a, b)];
                    }
                }
            }
            let mut w = CMatrix::zeros(nn, nn);
            let mut e = self.operator(CMatrix::zeros(np, np))?;
            for a in 0..np {
                for b in 0..np {
                    e.mat[(a, b)] = C64::new(1.0, 0.0);
                    let s = self.wigner(&e)?;
                    e.mat[(a, b)] = ZERO;
                    for x in 0..nn {
                        w[(x, a * np + b)] = s.values[x];
                    }
                }
            }
            let _ = self.basis.set((q, w));
        }
        Ok(self.basis.get().expect("initialized"))
    }
}

/// `Q_j = diag(ε x_j)`, `j` one-based.
pub fn position_op(grid: &GridSpec, j: usize, eps: f64) -> Result<OperatorMatrix> {
    if j < 1 || j > grid.d {
        return Err(Error::IndexOutOfRange { index: j, d: grid.d });
    }
    let np = grid.npos();
    let mut m = CMatrix::zeros(np, np);
    for p in 0..np {
        m[(p, p)] = C64::new(eps * grid.pos_sites(p)[j - 1] as f64 * grid.dx(), 0.0);
    }
    OperatorMatrix::new(*grid, m, "", Params { eps, lambda: 0.0 })
}

/// Spectral `−i∂` on the centered periodic lattice (one axis, `n × n`).
fn spectral_derivative(grid: &GridSpec) -> CMatrix {
    let n = grid.n;
    let h = grid.half();
    CMatrix::from_fn(n, n, |r, c| {
        let mut acc = ZERO;
        for m in -h..=h {
            let xi = m as f64 * grid.dxi();
            acc += C64::from_polar(xi, 2.0 * PI * (m * (r as i64 - c as i64)) as f64 / n as f64);
        }
        acc / n as f64
    })
}

/// `P^A_j = −i∂_j − λ diag(A_j(εx))`, `j` one-based.
pub fn momentum_op(a: &VectorPotential, grid: &GridSpec, j: usize, params: Params) -> Result<OperatorMatrix> {
    if j < 1 || j > grid.d {
        return Err(Error::IndexOutOfRange { index: j, d: grid.d });
    }
    let np = grid.npos();
    let n = grid.n;
    let dm = spectral_derivative(grid);
    let mut m = CMatrix::zeros(np, np);
    let stride = n.pow((grid.d - j) as u32);
    for p in 0..np {
        let digit = (p / stride) % n;
        for t in 0..n {
            let q = p - digit * stride + t * stride;
            m[(p, q)] = dm[(digit, t)];
        }
        let x: Vec<f64> = grid.pos_sites(p).iter().map(|&k| params.eps * k as f64 * grid.dx()).collect();
        m[(p, p)] -= C64::new(params.lambda * a.eval(&x)[j - 1], 0.0);
    }
    OperatorMatrix::new(*grid, m, serde_json::to_string(a).unwrap_or_default(), params)
}

/// `e^{+iλχ(Q)} T e^{−iλχ(Q)}`.
pub fn conjugate_by_gauge(t: &OperatorMatrix, chi: &GaugeFunction, eps: f64, lambda: f64) -> Result<OperatorMatrix> {
    let grid = t.grid;
    let phases: Vec<C64> = (0..grid.npos())
        .map(|p| {
            let x: Vec<f64> = grid.pos_sites(p).iter().map(|&k| eps * k as f64 * grid.dx()).collect();
            C64::from_polar(1.0, lambda * chi.eval(&x))
        })
        .collect();
    let np = grid.npos();
    let mut m = t.mat.clone();
    for r in 0..np {
        for c in 0..np {
            m[(r, c)] *= phases[r] * phases[c].conj();
        }
    }
    Ok(OperatorMatrix { grid, mat: m, gauge: t.gauge.clone(), params: t.params })
}

/// `U T U†`; `U` must be unitary to `1e−10`.
pub fn conjugate_by_unitary(t: &OperatorMatrix, u: &OperatorMatrix) -> Result<OperatorMatrix> {
    t.grid.same(&u.grid)?;
    let r = u.unitarity_residual();
    if r > 1e-10 {
        return Err(Error::NotUnitary(r));
    }
    Ok(OperatorMatrix { grid: t.grid, mat: &u.mat * &t.mat * u.mat.adjoint(), gauge: t.gauge.clone(), params: t.params })
}


/// Residual of `w(X) w(Y) = e^{i(ε/2)σ(X,Y)} ω(Q; x, y) w(X + Y)` over the rows
/// whose shifts `k + x` and `k + x + y` stay inside the lattice, with `ω` at the
/// physical row position `εx_k`. Returns the residual and the number of rows compared.
pub fn composition_residual(calc: &Calculus, x: &LatticePoint, y: &LatticePoint) -> Result<(f64, usize)> {
    let grid = calc.grid;
    let (eps, lam) = (calc.eps(), calc.lambda());
    let lhs = calc.weyl_system_lattice(x)?.mul(&calc.weyl_system_lattice(y)?)?;
    let rhs = calc.weyl_system_lattice(&x.add(y))?;
    let h = grid.half();
    let dx = grid.dx();
    let twist = C64::from_polar(1.0, 0.5 * eps * grid.cell() * x.isigma(y) as f64);
    let xs: Vec<f64> = x.j.iter().map(|&v| v as f64 * dx).collect();
    let ys: Vec<f64> = y.j.iter().map(|&v| v as f64 * dx).collect();
    let inside = |s: &[i64]| s.iter().all(|v| v.abs() <= h);
    let mut worst: f64 = 0.0;
    let mut rows = 0;
    for p in 0..grid.npos() {
        let k = grid.pos_sites(p);
        let k1: Vec<i64> = k.iter().zip(&x.j).map(|(a, b)| a + b).collect();
        let k2: Vec<i64> = k1.iter().zip(&y.j).map(|(a, b)| a + b).collect();
        if !inside(&k1) || !inside(&k2) {
            continue;
        }
        rows += 1;
        let q: Vec<f64> = k.iter().map(|&v| eps * v as f64 * dx).collect();
        let om = crate::magnetics::cocycle(&calc.field, &q, &xs, &ys, eps, lam)?;
        for col in 0..grid.npos() {
            worst = worst.max((lhs.mat[(p, col)] - twist * om * rhs.mat[(p, col)]).norm());
        }
    }
    Ok((worst, rows))
}

/// Haar-like random unitary from the QR factorization of a complex Gaussian matrix.
pub fn random_unitary(grid: GridSpec, rng: &mut impl Rng) -> OperatorMatrix {
    let np = grid.npos();
    let g = CMatrix::from_fn(np, np, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    // fix column phases so the distribution does not depend on the QR convention
    let mut u = q;
    for c in 0..np {
        let d = r[(c, c)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for rr in 0..np {
            u[(rr, c)] *= ph;
        }
    }
    OperatorMatrix { grid, mat: u, gauge: String::new(), params: Params::default() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::symplectic_form;
    use crate::magnetics::{cocycle, Poly};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_symbol(grid: GridSpec, rng: &mut impl Rng) -> PhaseSymbol {
        PhaseSymbol { grid, values: (0..grid.nphase()).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect() }
    }

    fn calc(d: usize, n: usize, eps: f64) -> Calculus {
        let grid = GridSpec::new(d, n, if d == 1 { 12.0 } else { 6.0 }).unwrap();
        let a = if d == 1 { VectorPotential::Landau { d: 1, b: 0.4 } } else { VectorPotential::Symmetric { b: 0.8 } };
        Calculus::new(grid, Params::new(eps, 0.7).unwrap(), a).unwrap()
    }

    #[test]
    fn weyl_system_identity_and_unitary() {
        for c in [calc(1, 9, 1.0), calc(2, 5, 0.6)] {
            let id = c.weyl_system_lattice(&LatticePoint::zero(c.grid.d)).unwrap();
            assert!(id.max_abs_diff(&OperatorMatrix::identity(c.grid, c.params)) < 1e-15);
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            for _ in 0..5 {
                let y = LatticePoint {
                    j: (0..c.grid.d).map(|_| rng.random_range(-7..8)).collect(),
                    l: (0..c.grid.d).map(|_| rng.random_range(-7..8)).collect(),
                };
                assert!(c.weyl_system_lattice(&y).unwrap().unitarity_residual() < 1e-12);
            }
        }
    }

    #[test]
    fn unreduced_points_differ_by_character() {
        let c = calc(2, 5, 1.0);
        let y = LatticePoint { j: vec![7, -2], l: vec![-4, 9] };
        let red = LatticePoint { j: y.j.iter().map(|&v| c.grid.reduce(v)).collect(), l: y.l.iter().map(|&v| c.grid.reduce(v)).collect() };
        let a = c.weyl_system_lattice(&y).unwrap();
        let b = c.weyl_system_lattice(&red).unwrap().scale(C64::new(lattice_character(&c.grid, &y), 0.0));
        assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn composition_law_on_wrap_free_rows() {
        let grid = GridSpec::new(2, 9, 6.0).unwrap();
        let c = Calculus::new(grid, Params::new(0.8, 1.0).unwrap(), VectorPotential::Landau { d: 2, b: 0.9 }).unwrap();
        let x = LatticePoint { j: vec![1, -1], l: vec![2, 3] };
        let y = LatticePoint { j: vec![-2, 1], l: vec![-1, 2] };
        let lhs = c.weyl_system(&x.to_point(&grid)).unwrap().mul(&c.weyl_system(&y.to_point(&grid)).unwrap()).unwrap();
        let xy = c.weyl_system_lattice(&x.add(&y)).unwrap();
        let s = symplectic_form(&x.to_point(&grid), &y.to_point(&grid)).unwrap();
        let xp = x.to_point(&grid).x;
        let yp = y.to_point(&grid).x;
        let h = grid.half();
        for p in 0..grid.npos() {
            let k = grid.pos_sites(p);
            let inside = |off: &[i64]| k.iter().zip(off).all(|(a, b)| (a + b).abs() <= h);
            let xj = x.j.clone();
            let xyj: Vec<i64> = x.j.iter().zip(&y.j).map(|(a, b)| a + b).collect();
            if !inside(&xj) || !inside(&xyj) {
                continue;
            }
            let q: Vec<f64> = k.iter().map(|&v| 0.8 * v as f64 * grid.dx()).collect();
            let om = cocycle(&c.field, &q, &xp, &yp, 0.8, 1.0).unwrap();
            let fac = C64::from_polar(1.0, 0.4 * s) * om;
            for col in 0..grid.npos() {
                assert!((lhs.mat[(p, col)] - fac * xy.mat[(p, col)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn quantize_constant_is_identity() {
        for c in [calc(1, 15, 1.0), calc(1, 15, 0.3), calc(2, 5, 0.7)] {
            let one = PhaseSymbol::constant(c.grid, C64::new(1.0, 0.0));
            let op = c.quantize(&one).unwrap();
            assert!(op.max_abs_diff(&OperatorMatrix::identity(c.grid, c.params)) < 1e-12);
        }
        for c in [calc(1, 15, 1.0), calc(2, 5, 1.0), calc(1, 7, 0.6)] {
            let one = PhaseSymbol::constant(c.grid, C64::new(1.0, 0.0));
            assert!((c.wigner(&OperatorMatrix::identity(c.grid, c.params)).unwrap().sub(&one)).max_abs() < 1e-10);
        }
    }

    #[test]
    fn plane_wave_quantizes_to_weyl_system() {
        let c = calc(2, 5, 0.6);
        let y = LatticePoint { j: vec![2, -1], l: vec![1, 2] };
        let pw = PhaseSymbol::plane_wave(c.grid, &y);
        let w = c.weyl_system_lattice(&y).unwrap();
        assert!(c.quantize(&pw).unwrap().max_abs_diff(&w) < 1e-10);
        assert!(c.wigner(&w).unwrap().max_abs_diff(&pw) < 1e-10);
    }

    #[test]
    fn wigner_inverts_quantize() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for c in [calc(1, 15, 1.0), calc(2, 5, 1.0), calc(1, 7, 0.5)] {
            let f = random_symbol(c.grid, &mut rng);
            let back = c.wigner(&c.quantize(&f).unwrap()).unwrap();
            assert!(back.max_abs_diff(&f) < 1e-10);
        }
    }

    #[test]
    fn adjoint_is_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        // exact at eps = 1; for eps < 1 rows that wrap pick up e^{-2πiεl}
        let c = calc(2, 5, 1.0);
        let f = random_symbol(c.grid, &mut rng);
        let a = c.quantize(&f).unwrap().adjoint();
        let b = c.quantize(&f.conj()).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-10);
    }

    #[test]
    fn gauge_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let c = calc(2, 5, 0.6);
        let f = random_symbol(c.grid, &mut rng);
        let chi = GaugeFunction { chi: Poly::random(2, 3, 0.5, &mut rng) };
        let shifted = c.gauge_shifted(&chi).unwrap();
        let lhs = shifted.quantize(&f).unwrap();
        let rhs = c.conjugate_by_gauge(&c.quantize(&f).unwrap(), &chi).unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-9);
    }

    #[test]
    fn position_and_momentum() {
        let grid = GridSpec::new(1, 63, 20.0).unwrap();
        let c = Calculus::new(grid, Params::new(0.5, 1.0).unwrap(), VectorPotential::Landau { d: 1, b: 0.3 }).unwrap();
        let q = c.position_op(1).unwrap();
        let p = c.momentum_op(1).unwrap();
        assert!(p.max_abs_diff(&p.adjoint()) < 1e-12);
        let comm = p.commutator(&q).unwrap().scale(C64::new(0.0, 1.0));
        let psi = StateVector::from_fn(grid, |x| C64::new((-0.5 * x[0] * x[0]).exp(), 0.0));
        let out = comm.apply(&psi).unwrap();
        let err = out.values.iter().zip(&psi.values).map(|(a, b)| (a - b * 0.5).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
        assert!(c.position_op(2).is_err());
    }

    #[test]
    fn boundedness_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let c = calc(1, 15, 1.0);
        let f = random_symbol(c.grid, &mut rng);
        let bound = (c.grid.n as f64).recip() * sfourier(&f).values.iter().map(|v| v.norm()).sum::<f64>();
        assert!(c.quantize(&f).unwrap().op_norm() <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn unitary_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let c = calc(1, 9, 1.0);
        let u = random_unitary(c.grid, &mut rng);
        assert!(u.unitarity_residual() < 1e-12);
        let t = c.quantize(&random_symbol(c.grid, &mut rng)).unwrap();
        let ct = conjugate_by_unitary(&t, &u).unwrap();
        assert!((ct.frobenius() - t.frobenius()).abs() < 1e-12 * t.frobenius());
        let id = OperatorMatrix::identity(c.grid, c.params);
        assert!(conjugate_by_unitary(&t, &id).unwrap().max_abs_diff(&t) < 1e-15);
        assert!(conjugate_by_unitary(&t, &t).is_err());
    }

    #[test]
    fn composition_residual_is_small() {
        let grid = GridSpec::new(2, 9, 7.0).unwrap();
        for a in [VectorPotential::Landau { d: 2, b: 0.8 }, VectorPotential::Symmetric { b: -0.6 }] {
            let c = Calculus::new(grid, Params::new(0.7, 0.9).unwrap(), a).unwrap();
            let x = LatticePoint { j: vec![1, -2], l: vec![3, 1] };
            let y = LatticePoint { j: vec![-1, 1], l: vec![-2, 4] };
            let (r, rows) = composition_residual(&c, &x, &y).unwrap();
            assert!(rows > 30);
            assert!(r < 1e-9, "{r}");
        }
    }

    #[test]
    fn missing_potential_is_reported() {
        let grid = GridSpec::new(2, 5, 6.0).unwrap();
        let c = Calculus::from_field(grid, Params::default(), MagneticField::constant_2d(1.0)).unwrap();
        assert_eq!(c.quantize(&PhaseSymbol::zeros(grid)).unwrap_err(), Error::MissingPotential);
    }
}
