//! Super operators: maps `ĝ ↦ Op(F) ĝ` on the operator space, their symbols
//! on doubled phase space, and the products between them.
//!
//! Operators are vectorized row-major, `vec(T)[a·n^d + b] = T[a, b]`, so a
//! sandwich `ĝ ↦ A ĝ B` has dense form `A ⊗ Bᵀ`. With `Q[:, X] = vec(op(δ_X))`
//! and `W = Q⁻¹` the super quantization is
//!
//! `Op(F) = Σ_{X, X'} F(X, X') op(δ_X) · ĝ · op(δ_X')`,
//!
//! whose realigned dense form `R[(a,c),(d,b)] = S[(a,b),(c,d)]` equals
//! `Q F Qᵀ`. Dequantization inverts this: `F = W R(S) Wᵀ`.

use crate::error::{Error, Result};
use crate::grid::{sfourier, sfourier_doubled, DoubledPoint, DoubledSymbol, GridSpec, LatticePoint, PhaseSymbol};
use crate::lattice::{index, isigma, kappa, pos_index, sites, Site};
use crate::products::{const_gamma, constant_field, refuse_if_costly};
use crate::weyl::{Calculus, CMatrix, OperatorMatrix, Params, DENSE_CAP};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Evaluation route for the semi-super product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SemiSuperRoute {
    Operator,
    FourierQuadrature,
    DirectQuadrature,
}

/// Evaluation route for the super product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuperProductRoute {
    Kernel,
    Superop,
    Quadrature,
}

impl FromStr for SemiSuperRoute {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "operator" => Ok(Self::Operator),
            "fourier-quadrature" => Ok(Self::FourierQuadrature),
            "direct-quadrature" => Ok(Self::DirectQuadrature),
            other => Err(Error::Parameter(format!("unknown semi-super route '{other}'"))),
        }
    }
}

impl fmt::Display for SemiSuperRoute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Operator => "operator",
            Self::FourierQuadrature => "fourier-quadrature",
            Self::DirectQuadrature => "direct-quadrature",
        })
    }
}

impl FromStr for SuperProductRoute {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kernel" => Ok(Self::Kernel),
            "superop" => Ok(Self::Superop),
            "quadrature" => Ok(Self::Quadrature),
            other => Err(Error::Parameter(format!("unknown super product route '{other}'"))),
        }
    }
}

impl fmt::Display for SuperProductRoute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Kernel => "kernel",
            Self::Superop => "superop",
            Self::Quadrature => "quadrature",
        })
    }
}

#[derive(Debug, Clone)]
enum SuperKind {
    /// `S` acting on row-major `vec(ĝ)`.
    Dense(CMatrix),
    /// `Σ A_i ĝ B_i`.
    Sandwich(Vec<(CMatrix, CMatrix)>),
    /// `Op(F)` applied term by term without a dense form.
    Symbolic(Box<(Calculus, DoubledSymbol)>),
}

/// A linear map on operators.
#[derive(Debug, Clone)]
pub struct SuperOperatorMap {
    pub grid: GridSpec,
    pub params: Params,
    pub gauge: String,
    kind: SuperKind,
}

impl SuperOperatorMap {
    pub fn from_dense(calc: &Calculus, s: CMatrix) -> Result<Self> {
        let nn = calc.grid.nphase();
        if s.nrows() != nn || s.ncols() != nn {
            return Err(Error::DimensionMismatch { expected: nn, got: s.nrows() });
        }
        Ok(Self { grid: calc.grid, params: calc.params, gauge: calc.gauge_tag(), kind: SuperKind::Dense(s) })
    }

    /// `ĝ ↦ Σ A_i ĝ B_i`.
    pub fn sandwich(calc: &Calculus, terms: Vec<(CMatrix, CMatrix)>) -> Self {
        Self { grid: calc.grid, params: calc.params, gauge: calc.gauge_tag(), kind: SuperKind::Sandwich(terms) }
    }

    pub fn identity(calc: &Calculus) -> Self {
        let np = calc.grid.npos();
        Self::sandwich(calc, vec![(CMatrix::identity(np, np), CMatrix::identity(np, np))])
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.kind, SuperKind::Dense(_))
    }

    pub fn apply(&self, g: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.grid.same(&g.grid)?;
        let np = self.grid.npos();
        let mat = match &self.kind {
            SuperKind::Dense(s) => {
                let v = s * vectorize(&g.mat);
                CMatrix::from_fn(np, np, |a, b| v[a * np + b])
            }
            SuperKind::Sandwich(terms) => {
                let mut m = CMatrix::zeros(np, np);
                for (a, b) in terms {
                    m += a * &g.mat * b;
                }
                m
            }
            SuperKind::Symbolic(inner) => {
                let (calc, f) = &**inner;
                let nn = self.grid.nphase();
                let mut m = CMatrix::zeros(np, np);
                let mut delta = PhaseSymbol::zeros(self.grid);
                for x in 0..nn {
                    let row = &f.values[x * nn..(x + 1) * nn];
                    if row.iter().all(|v| *v == ZERO) {
                        continue;
                    }
                    delta.values[x] = ONE;
                    let left = calc.quantize(&delta)?;
                    delta.values[x] = ZERO;
                    let right = calc.quantize(&PhaseSymbol { grid: self.grid, values: row.to_vec() })?;
                    m += &left.mat * &g.mat * &right.mat;
                }
                m
            }
        };
        OperatorMatrix::new(self.grid, mat, self.gauge.clone(), self.params)
    }

    /// Dense form on `vec(ĝ)`; refused above [`DENSE_CAP`].
    pub fn dense(&self) -> Result<CMatrix> {
        let np = self.grid.npos();
        if np > DENSE_CAP {
            return Err(Error::DenseCap(np));
        }
        Ok(match &self.kind {
            SuperKind::Dense(s) => s.clone(),
            SuperKind::Sandwich(terms) => {
                let nn = np * np;
                let mut s = CMatrix::zeros(nn, nn);
                for (a, b) in terms {
                    s += a.kronecker(&b.transpose());
                }
                s
            }
            SuperKind::Symbolic(inner) => {
                let (calc, f) = &**inner;
                let (q, _) = calc.basis()?;
                from_realigned(&(q * symbol_matrix(f) * q.transpose()), np)
            }
        })
    }

    /// Dense form of `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.grid.same(&other.grid)?;
        Ok(Self { grid: self.grid, params: self.params, gauge: self.gauge.clone(), kind: SuperKind::Dense(self.dense()? * other.dense()?) })
    }

    /// Adjoint for the Hilbert–Schmidt inner product `⟨ĝ, ĥ⟩ = tr(ĝ† ĥ)`.
    pub fn hs_adjoint(&self) -> Result<Self> {
        let kind = match &self.kind {
            SuperKind::Sandwich(terms) => SuperKind::Sandwich(terms.iter().map(|(a, b)| (a.adjoint(), b.adjoint())).collect()),
            _ => SuperKind::Dense(self.dense()?.adjoint()),
        };
        Ok(Self { grid: self.grid, params: self.params, gauge: self.gauge.clone(), kind })
    }

    /// Max-abs difference of the dense forms.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.grid.same(&other.grid)?;
        let d = self.dense()? - other.dense()?;
        Ok(d.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }
}

fn vectorize(m: &CMatrix) -> nalgebra::DVector<C64> {
    let np = m.nrows();
    nalgebra::DVector::from_fn(np * np, |i, _| m[(i / np, i % np)])
}

/// Kernel or symbol on `Ξ × Ξ` as an `N × N` matrix.
fn symbol_matrix(f: &DoubledSymbol) -> CMatrix {
    let nn = f.side();
    CMatrix::from_fn(nn, nn, |a, b| f.values[a * nn + b])
}

fn matrix_symbol(grid: GridSpec, m: &CMatrix) -> DoubledSymbol {
    let nn = m.nrows();
    let mut values = Vec::with_capacity(nn * nn);
    for a in 0..nn {
        for b in 0..nn {
            values.push(m[(a, b)]);
        }
    }
    DoubledSymbol { grid, values }
}

/// `R[(a,c),(d,b)] = S[(a,b),(c,d)]`.
fn to_realigned(s: &CMatrix, np: usize) -> CMatrix {
    let nn = np * np;
    let mut r = CMatrix::zeros(nn, nn);
    for a in 0..np {
        for b in 0..np {
            for c in 0..np {
                for d in 0..np {
                    r[(a * np + c, d * np + b)] = s[(a * np + b, c * np + d)];
                }
            }
        }
    }
    r
}

/// Inverse of [`to_realigned`].
fn from_realigned(r: &CMatrix, np: usize) -> CMatrix {
    let nn = np * np;
    let mut s = CMatrix::zeros(nn, nn);
    for a in 0..np {
        for b in 0..np {
            for c in 0..np {
                for d in 0..np {
                    s[(a * np + b, c * np + d)] = r[(a * np + c, d * np + b)];
                }
            }
        }
    }
    s
}

/// `ĝ ↦ w(X_L) ĝ w(X_R)`.
pub fn super_weyl_system(calc: &Calculus, xb: &DoubledPoint) -> Result<SuperOperatorMap> {
    let l = calc.grid.locate(&xb.left)?;
    let r = calc.grid.locate(&xb.right)?;
    super_weyl_system_lattice(calc, &l, &r)
}

/// [`super_weyl_system`] at integer coordinates.
pub fn super_weyl_system_lattice(calc: &Calculus, yl: &LatticePoint, yr: &LatticePoint) -> Result<SuperOperatorMap> {
    let a = calc.weyl_system_lattice(yl)?;
    let b = calc.weyl_system_lattice(yr)?;
    Ok(SuperOperatorMap::sandwich(calc, vec![(a.mat, b.mat)]))
}

/// `Op(F)`; dense up to [`DENSE_CAP`], term by term beyond.
pub fn super_quantize(calc: &Calculus, f: &DoubledSymbol) -> Result<SuperOperatorMap> {
    calc.grid.same(&f.grid)?;
    let np = calc.grid.npos();
    if np > DENSE_CAP {
        return Ok(SuperOperatorMap {
            grid: calc.grid,
            params: calc.params,
            gauge: calc.gauge_tag(),
            kind: SuperKind::Symbolic(Box::new((calc.clone(), f.clone()))),
        });
    }
    let (q, _) = calc.basis()?;
    let r = q * symbol_matrix(f) * q.transpose();
    SuperOperatorMap::from_dense(calc, from_realigned(&r, np))
}

/// Symbol of a dense super operator: `W R(S) Wᵀ`.
pub fn dequantize(calc: &Calculus, s: &SuperOperatorMap) -> Result<DoubledSymbol> {
    calc.grid.same(&s.grid)?;
    let (_, w) = calc.basis()?;
    let r = to_realigned(&s.dense()?, calc.grid.npos());
    Ok(matrix_symbol(calc.grid, &(w * r * w.transpose())))
}

/// `L_h(X_L, X_R) = −i(h(X_L) − h(X_R))`.
pub fn liouville_symbol(h: &PhaseSymbol) -> DoubledSymbol {
    let nn = h.grid.nphase();
    let mut values = Vec::with_capacity(nn * nn);
    for a in &h.values {
        for b in &h.values {
            values.push(C64::new(0.0, -1.0) * (a - b));
        }
    }
    DoubledSymbol { grid: h.grid, values }
}

/// `ĝ ↦ −i[op(h), ĝ]`.
pub fn commutator_map(calc: &Calculus, h: &PhaseSymbol) -> Result<SuperOperatorMap> {
    let oh = calc.quantize(h)?.mat;
    let np = calc.grid.npos();
    let id = CMatrix::identity(np, np);
    let mi = C64::new(0.0, -1.0);
    Ok(SuperOperatorMap::sandwich(calc, vec![(oh.map(|v| v * mi), id.clone()), (id, oh.map(|v| -v * mi))]))
}

/// `F ♦ g`, the symbol of `Op(F) op(g)`.
pub fn semi_super_product(calc: &Calculus, f: &DoubledSymbol, g: &PhaseSymbol, route: SemiSuperRoute) -> Result<PhaseSymbol> {
    calc.grid.same(&f.grid)?;
    calc.grid.same(&g.grid)?;
    match route {
        SemiSuperRoute::Operator => {
            let s = super_quantize(calc, f)?;
            calc.wigner(&s.apply(&calc.quantize(g)?)?)
        }
        SemiSuperRoute::FourierQuadrature => semi_super_fold(calc, f, g),
        SemiSuperRoute::DirectQuadrature => semi_super_direct(calc, f, g),
    }
}

fn require_constant(calc: &Calculus, route: &str) -> Result<Vec<f64>> {
    constant_field(calc).ok_or_else(|| Error::FieldClass(format!("the {route} route needs a field constant in space")))
}

/// Fold of the Fourier-side double sum onto `W = red(Y_L + Y_R + Z)`:
/// `w(Y_L) w(Z) w(Y_R) = e^{i(ε/2)σ(Y_L+Z, Y_R+Z)} e^{−iλγ̃} w(Y_L+Y_R+Z)` for constant `B`.
fn semi_super_fold(calc: &Calculus, f: &DoubledSymbol, g: &PhaseSymbol) -> Result<PhaseSymbol> {
    let b = require_constant(calc, "fourier-quadrature")?;
    let grid = calc.grid;
    let nn = grid.nphase();
    refuse_if_costly("semi-super fourier-quadrature", (nn as f64).powi(3))?;
    let (eps, lam, c, dx) = (calc.eps(), calc.lambda(), grid.cell(), grid.dx());
    let fh = sfourier_doubled(f);
    let gh = sfourier(g);
    let st = sites(&grid);
    let mut h = vec![ZERO; nn];
    for (yl, &sl) in st.iter().enumerate() {
        for (yr, &sr) in st.iter().enumerate() {
            let fv = fh.values[yl * nn + yr];
            if fv == ZERO {
                continue;
            }
            for (z, &sz) in st.iter().enumerate() {
                let (a, bb) = (sl.add(sz), sr.add(sz));
                let w = sl.add(sr).add(sz);
                let ph = 0.5 * eps * c * isigma(a, bb) as f64 - lam * const_gamma(&b, grid.d, a.j, bb.j, dx, eps);
                h[index(&grid, w)] += fv * gh.values[z] * C64::from_polar(kappa(&grid, w), ph);
            }
        }
    }
    let norm = (grid.n as f64).powi(-2 * grid.d as i32);
    Ok(sfourier(&PhaseSymbol { grid, values: h }).scale(C64::new(norm, 0.0)))
}

/// `Π_a (−1)^{j_a l_a}` on every phase site.
fn parity(grid: &GridSpec) -> Vec<f64> {
    sites(grid)
        .iter()
        .map(|s| {
            let e: i64 = (0..grid.d).map(|a| s.j[a] * s.l[a]).sum();
            if e.rem_euclid(2) == 0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect()
}

/// Frame change `f ↦ F_σ[par · F_σ f]`; an involution.
fn modular_frame(f: &PhaseSymbol) -> PhaseSymbol {
    let par = parity(&f.grid);
    let mut t = sfourier(f);
    for (v, p) in t.values.iter_mut().zip(&par) {
        *v *= p;
    }
    sfourier(&t)
}

fn modular_frame_doubled(f: &DoubledSymbol) -> DoubledSymbol {
    let par = parity(&f.grid);
    let nn = f.side();
    let mut t = sfourier_doubled(f);
    for (i, v) in t.values.iter_mut().enumerate() {
        *v *= par[i / nn] * par[i % nn];
    }
    sfourier_doubled(&t)
}

/// Position-space form at `ε = 1`. The half shifts `x ± y/2` become
/// multiplication by `h' = (n+1)/2`, the inverse of 2 modulo `n`, which is
/// exact after the modular frame change on both inputs and the output.
fn semi_super_direct(calc: &Calculus, f: &DoubledSymbol, g: &PhaseSymbol) -> Result<PhaseSymbol> {
    if calc.eps() != 1.0 {
        return Err(Error::RequiresUnitEps("semi-super direct-quadrature".into()));
    }
    let b = require_constant(calc, "direct-quadrature")?;
    let grid = calc.grid;
    let (n, d, np, nn) = (grid.n, grid.d, grid.npos(), grid.nphase());
    refuse_if_costly("semi-super direct-quadrature", (np as f64).powi(4) * 2.0 * np as f64)?;
    let (lam, dx) = (calc.lambda(), grid.dx());
    let fp = modular_frame_doubled(f);
    let gp = modular_frame(g);
    let psites: Vec<[i64; 2]> = (0..np)
        .map(|p| {
            let k = grid.pos_sites(p);
            let mut s = [0i64; 2];
            s[..d].copy_from_slice(&k[..d]);
            s
        })
        .collect();
    let dot = |a: [i64; 2], b: [i64; 2]| -> i64 { (0..d).map(|i| a[i] * b[i]).sum() };
    let tw = |k: i64| C64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64);
    // partial DFT of F' over the left momentum slot, then the right one
    let mut t1 = vec![ZERO; np * np * np * np];
    for kl in 0..np {
        for u in 0..np {
            for kr in 0..np {
                for v in 0..np {
                    let val = fp.values[(kl * np + u) * nn + kr * np + v];
                    if val == ZERO {
                        continue;
                    }
                    for yl in 0..np {
                        t1[((kl * np + yl) * np + kr) * np + v] += val * tw(dot(psites[yl], psites[u]));
                    }
                }
            }
        }
    }
    let mut ah = vec![ZERO; np * np * np * np];
    for kl in 0..np {
        for yl in 0..np {
            for kr in 0..np {
                for v in 0..np {
                    let val = t1[((kl * np + yl) * np + kr) * np + v];
                    for yr in 0..np {
                        ah[((kl * np + kr) * np + yl) * np + yr] += val * tw(dot(psites[yr], psites[v]));
                    }
                }
            }
        }
    }
    let mut gh = vec![ZERO; np * np];
    for kg in 0..np {
        for w in 0..np {
            let val = gp.values[kg * np + w];
            for z in 0..np {
                gh[kg * np + z] += val * tw(dot(psites[z], psites[w]));
            }
        }
    }
    let hp = (n as i64 + 1) / 2;
    let lin = |a: [i64; 2], s: i64, b: [i64; 2]| -> [i64; 2] { [a[0] + s * b[0], a[1] + s * b[1]] };
    let add = |a: [i64; 2], b: [i64; 2]| -> [i64; 2] { [a[0] + b[0], a[1] + b[1]] };
    let sub = |a: [i64; 2], b: [i64; 2]| -> [i64; 2] { [a[0] - b[0], a[1] - b[1]] };
    let mut out = vec![ZERO; nn];
    let mut acc = vec![ZERO; np];
    for (pk, &k) in psites.iter().enumerate() {
        acc.iter_mut().for_each(|v| *v = ZERO);
        for (yl, &syl) in psites.iter().enumerate() {
            for (yr, &syr) in psites.iter().enumerate() {
                for (z, &sz) in psites.iter().enumerate() {
                    let kl = pos_index(&grid, lin(k, -hp, add(syr, sz)));
                    let kr = pos_index(&grid, lin(k, hp, add(syl, sz)));
                    let kg = pos_index(&grid, lin(k, hp, sub(syl, syr)));
                    let a = add(syl, sz);
                    let bb = add(syr, sz);
                    let ph = C64::from_polar(1.0, -lam * const_gamma(&b, d, a, bb, dx, 1.0));
                    let t = pos_index(&grid, add(add(syl, syr), sz));
                    acc[t] += ph * ah[((kl * np + kr) * np + yl) * np + yr] * gh[kg * np + z];
                }
            }
        }
        for (pm, &m) in psites.iter().enumerate() {
            let mut s = ZERO;
            for (t, &st) in psites.iter().enumerate() {
                s += acc[t] * tw(-dot(m, st));
            }
            out[pk * np + pm] = s;
        }
    }
    let norm = (n as f64).powi(-3 * d as i32);
    let sp = PhaseSymbol { grid, values: out.into_iter().map(|v| v * norm).collect() };
    Ok(modular_frame(&sp))
}

/// `K_F` with `Int(K_F) g = F ♦ g`; as matrices `μ K_F = W S_F Q`.
pub fn kernel_map(calc: &Calculus, f: &DoubledSymbol) -> Result<DoubledSymbol> {
    let s = super_quantize(calc, f)?.dense()?;
    let (q, w) = calc.basis()?;
    let k = w * s * q;
    Ok(matrix_symbol(calc.grid, &k).scale(C64::new(1.0 / calc.grid.mu(), 0.0)))
}

/// `(Int(K) g)(X) = μ Σ_Y K(X, Y) g(Y)`.
pub fn integral_apply(k: &DoubledSymbol, g: &PhaseSymbol) -> Result<PhaseSymbol> {
    k.grid.same(&g.grid)?;
    let nn = k.side();
    let mu = k.grid.mu();
    let values = (0..nn).map(|x| k.values[x * nn..(x + 1) * nn].iter().zip(&g.values).map(|(a, b)| a * b).sum::<C64>() * mu).collect();
    Ok(PhaseSymbol { grid: k.grid, values })
}

/// `(K₁ • K₂)(X, Z) = μ Σ_Y K₁(X, Y) K₂(Y, Z)`.
pub fn kernel_compose(k1: &DoubledSymbol, k2: &DoubledSymbol) -> Result<DoubledSymbol> {
    k1.grid.same(&k2.grid)?;
    let m = symbol_matrix(k1) * symbol_matrix(k2);
    Ok(matrix_symbol(k1.grid, &m).scale(C64::new(k1.grid.mu(), 0.0)))
}

/// Inverse of [`kernel_map`].
pub fn super_wigner(calc: &Calculus, k: &DoubledSymbol) -> Result<DoubledSymbol> {
    calc.grid.same(&k.grid)?;
    let (q, w) = calc.basis()?;
    let s = q * symbol_matrix(k) * w * C64::new(calc.grid.mu(), 0.0);
    dequantize(calc, &SuperOperatorMap::from_dense(calc, s)?)
}

/// `F ♯ G`, the symbol of `Op(F) Op(G)`.
pub fn super_product(calc: &Calculus, f: &DoubledSymbol, g: &DoubledSymbol, route: SuperProductRoute) -> Result<DoubledSymbol> {
    calc.grid.same(&f.grid)?;
    calc.grid.same(&g.grid)?;
    match route {
        SuperProductRoute::Kernel => super_wigner(calc, &kernel_compose(&kernel_map(calc, f)?, &kernel_map(calc, g)?)?),
        SuperProductRoute::Superop => dequantize(calc, &super_quantize(calc, f)?.compose(&super_quantize(calc, g)?)?),
        SuperProductRoute::Quadrature => super_product_fold(calc, f, g),
    }
}

/// Fold onto `(red(Y_L+Z_L), red(Y_R+Z_R))`; the right factors compose in
/// reverse order, `w(Z_R) w(Y_R)`.
fn super_product_fold(calc: &Calculus, f: &DoubledSymbol, g: &DoubledSymbol) -> Result<DoubledSymbol> {
    let b = require_constant(calc, "super product quadrature")?;
    let grid = calc.grid;
    let nn = grid.nphase();
    refuse_if_costly("super product quadrature", (nn as f64).powi(4))?;
    let (eps, lam, c, dx, d) = (calc.eps(), calc.lambda(), grid.cell(), grid.dx(), grid.d);
    let fh = sfourier_doubled(f);
    let gh = sfourier_doubled(g);
    let st = sites(&grid);
    let nz: Vec<(usize, usize, C64)> = (0..nn * nn).filter(|&i| gh.values[i] != ZERO).map(|i| (i / nn, i % nn, gh.values[i])).collect();
    let left = |y: Site, z: Site| 0.5 * eps * c * isigma(y, z) as f64 - lam * const_gamma(&b, d, y.j, z.j, dx, eps);
    let mut h = vec![ZERO; nn * nn];
    for yl in 0..nn {
        for yr in 0..nn {
            let fv = fh.values[yl * nn + yr];
            if fv == ZERO {
                continue;
            }
            let (sl, sr) = (st[yl], st[yr]);
            for &(zl, zr, gv) in &nz {
                let (tl, trr) = (st[zl], st[zr]);
                let (wl, wr) = (sl.add(tl), sr.add(trr));
                let ph = left(sl, tl) + 0.5 * eps * c * isigma(trr, sr) as f64 - lam * const_gamma(&b, d, trr.j, sr.j, dx, eps);
                h[index(&grid, wl) * nn + index(&grid, wr)] += fv * gv * C64::from_polar(kappa(&grid, wl) * kappa(&grid, wr), ph);
            }
        }
    }
    let norm = (grid.n as f64).powi(-2 * d as i32);
    Ok(sfourier_doubled(&DoubledSymbol { grid, values: h }).scale(C64::new(norm, 0.0)))
}

/// Riemann rule for the closed-form displays: `points` nodes per axis on `[−R, R]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormRule {
    pub half_width: f64,
    pub points: usize,
}

impl Default for ClosedFormRule {
    fn default() -> Self {
        Self { half_width: 9.0, points: 361 }
    }
}

impl ClosedFormRule {
    fn nodes(&self) -> (Vec<f64>, f64) {
        let h = 2.0 * self.half_width / (self.points - 1) as f64;
        ((0..self.points).map(|i| -self.half_width + i as f64 * h).collect(), h)
    }
}

/// The closed forms are one-dimensional, where every field vanishes.
fn closed_form_guard(calc: &Calculus) -> Result<()> {
    if calc.grid.d != 1 {
        return Err(Error::UnsupportedDimension(calc.grid.d));
    }
    Ok(())
}

/// Analytic super symbol `F(x_L, ξ_L, x_R, ξ_R)` in one dimension.
pub type DoubledFn<'a> = &'a dyn Fn(f64, f64, f64, f64) -> C64;

/// The displayed kernel `K_F(X, Z)` in one dimension, where `B ≡ 0` and the
/// `y_L`-integral collapses to `δ(ξ + ζ − η_L − η_R)`:
///
/// `K = e^{i(2/ε)(xξ − zζ)} (πε)^{−2} ∫ dy dη e^{i(2/ε)(y(ζ−ξ) + (z−x)(ξ+ζ−η))} F(y, η, x+z−y, ξ+ζ−η)`.
pub fn kernel_closed_form(calc: &Calculus, f: DoubledFn<'_>, x: (f64, f64), z: (f64, f64), rule: ClosedFormRule) -> Result<C64> {
    closed_form_guard(calc)?;
    let e = calc.eps();
    let ((x, xi), (z, zeta)) = (x, z);
    let (nodes, h) = rule.nodes();
    let mut s = ZERO;
    for &y in &nodes {
        for &eta in &nodes {
            let ph = (2.0 / e) * (y * (zeta - xi) + (z - x) * (xi + zeta - eta));
            s += C64::from_polar(1.0, ph) * f(y, eta, x + z - y, xi + zeta - eta);
        }
    }
    let pre = C64::from_polar(1.0, (2.0 / e) * (x * xi - z * zeta)) / (PI * e).powi(2);
    Ok(pre * s * h * h)
}

/// The displayed super Wigner transform in one dimension with `B ≡ 0`; the
/// `y_L + y_R` integral collapses to `η_L = (2/ε)(ξ_L + ξ_R)`, leaving
///
/// `(ε²/4) ∫ du dη_R e^{(i/2)(ξ_L−ξ_R)u} e^{(i/2)(x_R−x_L)η_R} K(m − εu/4, ε(η_L−η_R)/4, m + εu/4, ε(η_L+η_R)/4)`
///
/// with `m = (x_L + x_R)/2`.
pub fn super_wigner_closed_form(calc: &Calculus, k: DoubledFn<'_>, xl: (f64, f64), xr: (f64, f64), rule: ClosedFormRule) -> Result<C64> {
    closed_form_guard(calc)?;
    let e = calc.eps();
    let ((xl, xil), (xr, xir)) = (xl, xr);
    let m = 0.5 * (xl + xr);
    let eta_l = (2.0 / e) * (xil + xir);
    let (nodes, h) = rule.nodes();
    let mut s = ZERO;
    for &u in &nodes {
        for &eta_r in &nodes {
            let ph = 0.5 * (xil - xir) * u + 0.5 * (xr - xl) * eta_r;
            s += C64::from_polar(1.0, ph) * k(m - 0.25 * e * u, 0.25 * e * (eta_l - eta_r), m + 0.25 * e * u, 0.25 * e * (eta_l + eta_r));
        }
    }
    Ok(s * h * h * (e * e / 4.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::transpose_doubled;
    use crate::magnetics::{GaugeFunction, Poly, VectorPotential};
    use crate::products::{moyal_product, ProductRoute};
    use crate::weyl::{conjugate_by_unitary, random_unitary};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rnd(rng: &mut impl Rng) -> C64 {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    }

    fn sym(grid: GridSpec, rng: &mut impl Rng) -> PhaseSymbol {
        PhaseSymbol { grid, values: (0..grid.nphase()).map(|_| rnd(rng)).collect() }
    }

    fn dsym(grid: GridSpec, rng: &mut impl Rng) -> DoubledSymbol {
        let nn = grid.nphase();
        DoubledSymbol { grid, values: (0..nn * nn).map(|_| rnd(rng)).collect() }
    }

    fn op_rand(calc: &Calculus, rng: &mut impl Rng) -> OperatorMatrix {
        let np = calc.grid.npos();
        calc.operator(CMatrix::from_fn(np, np, |_, _| rnd(rng))).unwrap()
    }

    fn calc1(n: usize) -> Calculus {
        let grid = GridSpec::new(1, n, (2.0 * PI * n as f64).sqrt()).unwrap();
        Calculus::new(grid, Params::default(), VectorPotential::Landau { d: 1, b: 0.7 }).unwrap()
    }

    fn calc2(eps: f64) -> Calculus {
        let grid = GridSpec::new(2, 3, 5.0).unwrap();
        Calculus::new(grid, Params::new(eps, 0.8).unwrap(), VectorPotential::Symmetric { b: 0.6 }).unwrap()
    }

    #[test]
    fn realignment_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = CMatrix::from_fn(9, 9, |_, _| rnd(&mut rng));
        assert_eq!(from_realigned(&to_realigned(&s, 3), 3), s);
    }

    #[test]
    fn dense_forms_reproduce_application() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = calc1(5);
        let f = dsym(c.grid, &mut rng);
        let g = op_rand(&c, &mut rng);
        let dense = super_quantize(&c, &f).unwrap();
        let symbolic = SuperOperatorMap { grid: c.grid, params: c.params, gauge: c.gauge_tag(), kind: SuperKind::Symbolic(Box::new((c.clone(), f.clone()))) };
        let a = dense.apply(&g).unwrap();
        let b = symbolic.apply(&g).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-11);
        assert!(dense.max_abs_diff(&symbolic).unwrap() < 1e-11);
        let w = super_weyl_system_lattice(&c, &LatticePoint { j: vec![1], l: vec![-2] }, &LatticePoint { j: vec![2], l: vec![1] }).unwrap();
        let wd = SuperOperatorMap::from_dense(&c, w.dense().unwrap()).unwrap();
        assert!(w.apply(&g).unwrap().max_abs_diff(&wd.apply(&g).unwrap()) < 1e-12);
        assert!((w.apply(&g).unwrap().frobenius() - g.frobenius()).abs() < 1e-12);
    }

    #[test]
    fn product_symbols_sandwich() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for c in [calc1(5), calc2(0.7)] {
            let (fl, fr) = (sym(c.grid, &mut rng), sym(c.grid, &mut rng));
            let g = op_rand(&c, &mut rng);
            let s = super_quantize(&c, &DoubledSymbol::tensor(&fl, &fr).unwrap()).unwrap();
            let expect = c.quantize(&fl).unwrap().mul(&g).unwrap().mul(&c.quantize(&fr).unwrap()).unwrap();
            assert!(s.apply(&g).unwrap().max_abs_diff(&expect) < 1e-9);
            let one = super_quantize(&c, &DoubledSymbol::constant(c.grid, ONE)).unwrap();
            assert!(one.max_abs_diff(&SuperOperatorMap::identity(&c)).unwrap() < 1e-10);
        }
    }

    #[test]
    fn dequantize_inverts_super_quantize() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let c = calc2(0.6);
        let f = dsym(c.grid, &mut rng);
        let back = dequantize(&c, &super_quantize(&c, &f).unwrap()).unwrap();
        assert!(back.max_abs_diff(&f) < 1e-8);
    }

    #[test]
    fn semi_super_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [3, 5] {
            let c = calc1(n);
            let f = dsym(c.grid, &mut rng);
            let g = sym(c.grid, &mut rng);
            let a = semi_super_product(&c, &f, &g, SemiSuperRoute::Operator).unwrap();
            let b = semi_super_product(&c, &f, &g, SemiSuperRoute::FourierQuadrature).unwrap();
            let d = semi_super_product(&c, &f, &g, SemiSuperRoute::DirectQuadrature).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-9, "fold {}", a.max_abs_diff(&b));
            assert!(a.max_abs_diff(&d) < 1e-9, "direct {}", a.max_abs_diff(&d));
        }
    }

    #[test]
    fn direct_route_in_two_dimensions() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let grid = GridSpec::new(2, 3, 4.0).unwrap();
        let c = Calculus::from_field(grid, Params::default(), crate::magnetics::MagneticField::zero(2)).unwrap();
        let f = dsym(grid, &mut rng);
        let g = sym(grid, &mut rng);
        let a = semi_super_product(&c, &f, &g, SemiSuperRoute::FourierQuadrature).unwrap();
        let d = semi_super_product(&c, &f, &g, SemiSuperRoute::DirectQuadrature).unwrap();
        assert!(a.max_abs_diff(&d) < 1e-9);
        let half = c.with_params(Params::new(0.5, 1.0).unwrap()).unwrap();
        assert!(matches!(semi_super_product(&half, &f, &g, SemiSuperRoute::DirectQuadrature), Err(Error::RequiresUnitEps(_))));
    }

    #[test]
    fn semi_super_reduces_for_product_symbols() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let c = calc2(0.8);
        let (fl, fr, g) = (sym(c.grid, &mut rng), sym(c.grid, &mut rng), sym(c.grid, &mut rng));
        let f = DoubledSymbol::tensor(&fl, &fr).unwrap();
        let got = semi_super_product(&c, &f, &g, SemiSuperRoute::Operator).unwrap();
        let r = ProductRoute::Operator;
        let expect = moyal_product(&c, &moyal_product(&c, &fl, &g, r).unwrap(), &fr, r).unwrap();
        assert!(got.max_abs_diff(&expect) < 1e-8);
    }

    #[test]
    fn liouville_symbol_quantizes_to_commutator() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let c = calc2(0.9);
        let h = sym(c.grid, &mut rng);
        let l = liouville_symbol(&h);
        assert!(transpose_doubled(&l).add(&l).max_abs() < 1e-15);
        let s = super_quantize(&c, &l).unwrap();
        assert!(s.max_abs_diff(&commutator_map(&c, &h).unwrap()).unwrap() < 1e-9);
    }

    #[test]
    fn kernel_map_and_super_wigner() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let c = calc1(5);
        let f = dsym(c.grid, &mut rng);
        let g = sym(c.grid, &mut rng);
        let k = kernel_map(&c, &f).unwrap();
        let lhs = integral_apply(&k, &g).unwrap();
        let rhs = semi_super_product(&c, &f, &g, SemiSuperRoute::Operator).unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-9);
        assert!(super_wigner(&c, &k).unwrap().max_abs_diff(&f) < 1e-8);
        let one = kernel_map(&c, &DoubledSymbol::constant(c.grid, ONE)).unwrap();
        let nn = c.grid.nphase();
        let mu = c.grid.mu();
        for x in 0..nn {
            for z in 0..nn {
                let expect = if x == z { 1.0 / mu } else { 0.0 };
                assert!((one.values[x * nn + z] - expect).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn kernel_composition_applies_sequentially() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let grid = GridSpec::new(1, 5, 4.0).unwrap();
        let (k1, k2, g) = (dsym(grid, &mut rng), dsym(grid, &mut rng), sym(grid, &mut rng));
        let lhs = integral_apply(&kernel_compose(&k1, &k2).unwrap(), &g).unwrap();
        let rhs = integral_apply(&k1, &integral_apply(&k2, &g).unwrap()).unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-10 * lhs.max_abs());
        let nn = grid.nphase();
        let naive: Vec<C64> = (0..nn).map(|x| (0..nn).map(|y| k1.values[x * nn + y] * g.values[y] * grid.mu()).sum()).collect();
        assert!(integral_apply(&k1, &g).unwrap().max_abs_diff(&PhaseSymbol { grid, values: naive }) < 1e-12);
    }

    #[test]
    fn super_product_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [3, 5] {
            let c = calc1(n);
            let (f, g) = (dsym(c.grid, &mut rng), dsym(c.grid, &mut rng));
            let a = super_product(&c, &f, &g, SuperProductRoute::Kernel).unwrap();
            let b = super_product(&c, &f, &g, SuperProductRoute::Superop).unwrap();
            let q = super_product(&c, &f, &g, SuperProductRoute::Quadrature).unwrap();
            let scale = a.max_abs();
            assert!(a.max_abs_diff(&b) < 1e-9 * scale);
            assert!(a.max_abs_diff(&q) < 1e-9 * scale, "{}", a.max_abs_diff(&q) / scale);
        }
    }

    #[test]
    fn super_product_reverses_right_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let c = calc2(0.7);
        let (fl, fr, gl, gr) = (sym(c.grid, &mut rng), sym(c.grid, &mut rng), sym(c.grid, &mut rng), sym(c.grid, &mut rng));
        let f = DoubledSymbol::tensor(&fl, &fr).unwrap();
        let g = DoubledSymbol::tensor(&gl, &gr).unwrap();
        let p = super_product(&c, &f, &g, SuperProductRoute::Superop).unwrap();
        let r = ProductRoute::Operator;
        let expect = DoubledSymbol::tensor(&moyal_product(&c, &fl, &gl, r).unwrap(), &moyal_product(&c, &gr, &fr, r).unwrap()).unwrap();
        assert!(p.max_abs_diff(&expect) < 1e-8 * expect.max_abs());
    }

    #[test]
    fn adjoint_and_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let c = calc1(5);
        let f = dsym(c.grid, &mut rng);
        let s = super_quantize(&c, &f).unwrap();
        let sc = super_quantize(&c, &f.conj()).unwrap();
        assert!(s.hs_adjoint().unwrap().max_abs_diff(&sc).unwrap() < 1e-10);
        let (g, h) = (op_rand(&c, &mut rng), op_rand(&c, &mut rng));
        let lhs = s.apply(&g).unwrap().hs_inner(&h);
        let rhs = g.hs_inner(&sc.apply(&h).unwrap());
        assert!((lhs - rhs).norm() < 1e-9);
    }

    #[test]
    fn gauge_and_representation_independence() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let c = calc2(0.8);
        let (f, g) = (dsym(c.grid, &mut rng), sym(c.grid, &mut rng));
        let base = semi_super_product(&c, &f, &g, SemiSuperRoute::Operator).unwrap();
        let chi = GaugeFunction { chi: Poly::random(2, 3, 0.3, &mut rng) };
        let shifted = semi_super_product(&c.gauge_shifted(&chi).unwrap(), &f, &g, SemiSuperRoute::Operator).unwrap();
        assert!(base.max_abs_diff(&shifted) < 1e-8);
        let u = random_unitary(c.grid, &mut rng);
        let gu = conjugate_by_unitary(&c.quantize(&g).unwrap(), &u).unwrap();
        // Ad_U Op(F) Ad_U⁻¹ applied in the rotated frame
        let s = super_quantize(&c, &f).unwrap();
        let back = conjugate_by_unitary(&gu, &u.adjoint()).unwrap();
        let rotated = conjugate_by_unitary(&s.apply(&back).unwrap(), &u).unwrap();
        let sym_back = c.wigner(&conjugate_by_unitary(&rotated, &u.adjoint()).unwrap()).unwrap();
        assert!(sym_back.max_abs_diff(&base) < 1e-8);
    }

    #[test]
    fn trace_and_duality_at_unit_eps() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let c = calc1(5);
        let (f, g, h) = (dsym(c.grid, &mut rng), dsym(c.grid, &mut rng), dsym(c.grid, &mut rng));
        let r = SuperProductRoute::Superop;
        let fg = super_product(&c, &f, &g, r).unwrap();
        assert!((fg.integral() - f.mul(&g).integral()).norm() < 1e-8 * fg.max_abs());
        let a = fg.pair(&h);
        let b = f.pair(&super_product(&c, &g, &h, r).unwrap());
        let cc = super_product(&c, &h, &f, r).unwrap().pair(&g);
        assert!((a - b).norm() < 1e-8 * a.norm().max(1.0));
        assert!((a - cc).norm() < 1e-8 * a.norm().max(1.0));
        let (gg, hh) = (sym(c.grid, &mut rng), sym(c.grid, &mut rng));
        let lhs = semi_super_product(&c, &f, &gg, SemiSuperRoute::Operator).unwrap().pair(&hh);
        let rhs = gg.pair(&semi_super_product(&c, &transpose_doubled(&f), &hh, SemiSuperRoute::Operator).unwrap());
        assert!((lhs - rhs).norm() < 1e-8 * lhs.norm().max(1.0));
    }

    #[test]
    fn quadrature_routes_need_constant_fields() {
        let grid = GridSpec::new(2, 3, 4.0).unwrap();
        let p = Poly::monomial(0.4, vec![1, 0]);
        let c = Calculus::from_field(grid, Params::default(), crate::magnetics::MagneticField::from_b12(p, None)).unwrap();
        let f = DoubledSymbol::zeros(grid);
        let g = PhaseSymbol::zeros(grid);
        assert!(matches!(semi_super_product(&c, &f, &g, SemiSuperRoute::FourierQuadrature), Err(Error::FieldClass(_))));
        assert!(matches!(super_product(&c, &f, &f, SuperProductRoute::Quadrature), Err(Error::FieldClass(_))));
    }

    #[test]
    fn closed_forms_invert_identity() {
        let c = calc1(5);
        let rule = ClosedFormRule { half_width: 12.0, points: 601 };
        // a Gaussian approximate identity kernel; smearing by width s in x − z = −εu/2 and
        // ξ − ζ = −εη_R/2 turns the phases into exp(−(σ_u k_u)²/2) with σ = 2s/ε
        let s = 0.15;
        let delta = move |a: f64, b: f64, cc: f64, d: f64| {
            let r2 = (a - cc).powi(2) + (b - d).powi(2);
            C64::new((-r2 / (2.0 * s * s)).exp() / (2.0 * PI * s * s), 0.0)
        };
        let ((xl, xil), (xr, xir)) = ((0.3, -0.2), (0.1, 0.4));
        let w = super_wigner_closed_form(&c, &delta, (xl, xil), (xr, xir), rule).unwrap();
        let sig = 2.0 * s;
        let expect = (-(sig * 0.5 * (xil - xir)).powi(2) / 2.0 - (sig * 0.5 * (xr - xl)).powi(2) / 2.0).exp();
        assert!((w - expect).norm() < 1e-9, "{w} vs {expect}");
    }
}
