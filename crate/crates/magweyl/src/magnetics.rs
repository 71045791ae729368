//! Magnetic fields, vector potentials, gauge changes, and the flux phases
//! that twist the calculus.
//!
//! `B` is stored as a `d × d` antisymmetric matrix of functions, row-major.
//! Every flux is a surface integral of `B` over an oriented triangle, so all
//! phases depend on `B` only; the potential `A` enters solely through
//! circulations in the Weyl system.

use crate::error::{Error, Result};
use crate::grid::japanese_bracket;
use crate::quad::GaussLegendre;
use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// Default Gauss–Legendre order for circulations and per-axis triangle rules.
pub const DEFAULT_NODES: usize = 8;
/// Gauss–Legendre order for the `t`-integrals of the flux-gradient coefficients.
pub const GRADIENT_NODES: usize = 16;
/// Central-difference step for derivative checks.
pub const FD_STEP: f64 = 1e-5;

fn rule(order: usize) -> &'static GaussLegendre {
    static R8: OnceLock<GaussLegendre> = OnceLock::new();
    static R16: OnceLock<GaussLegendre> = OnceLock::new();
    let cell = match order {
        8 => &R8,
        16 => &R16,
        _ => unreachable!("only cached orders are requested"),
    };
    cell.get_or_init(|| GaussLegendre::new(order).expect("positive order"))
}

/// Monomial `coef · Π x_i^{pow_i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coef: f64,
    pub pow: Vec<u32>,
}

/// Real polynomial in `d` variables.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly {
    pub terms: Vec<Term>,
}

impl Poly {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn constant(c: f64, d: usize) -> Self {
        Self::monomial(c, vec![0; d])
    }

    pub fn monomial(coef: f64, pow: Vec<u32>) -> Self {
        Self { terms: vec![Term { coef, pow }] }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coef * t.pow.iter().zip(x).map(|(&p, &v)| v.powi(p as i32)).product::<f64>())
            .sum()
    }

    /// `∂_i` of the polynomial.
    pub fn derivative(&self, i: usize) -> Poly {
        let terms = self
            .terms
            .iter()
            .filter(|t| t.pow.get(i).copied().unwrap_or(0) > 0)
            .map(|t| {
                let mut pow = t.pow.clone();
                let p = pow[i];
                pow[i] = p - 1;
                Term { coef: t.coef * p as f64, pow }
            })
            .collect();
        Poly { terms }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut terms = self.terms.clone();
        terms.extend(o.terms.iter().cloned());
        Poly { terms }
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly { terms: self.terms.iter().map(|t| Term { coef: t.coef * s, pow: t.pow.clone() }).collect() }
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().filter(|t| t.coef != 0.0).map(|t| t.pow.iter().sum()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coef == 0.0)
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        for t in &self.terms {
            if t.pow.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: t.pow.len() });
            }
        }
        Ok(())
    }

    /// Random polynomial with coefficients in `[-scale, scale]` and total degree `≤ degree`.
    pub fn random(d: usize, degree: u32, scale: f64, rng: &mut impl Rng) -> Poly {
        let mut terms = Vec::new();
        for a in 0..=degree {
            for b in 0..=(if d == 2 { degree - a } else { 0 }) {
                let pow = if d == 2 { vec![a, b] } else { vec![a] };
                terms.push(Term { coef: rng.random_range(-scale..scale), pow });
            }
        }
        Poly { terms }
    }
}

/// Growth class of a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldClass {
    Bounded,
    PolynomiallyBounded,
}

/// A magnetic field `B`, an antisymmetric matrix-valued function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum MagneticField {
    Zero { d: usize },
    Constant { b: Vec<Vec<f64>> },
    Polynomial { b: Vec<Vec<Poly>> },
    /// `B_jk(x) = p_jk(x) · exp(−|x|²/(2w²))`.
    Windowed { b: Vec<Vec<Poly>>, width: f64 },
}

impl MagneticField {
    pub fn zero(d: usize) -> Self {
        MagneticField::Zero { d }
    }

    /// Constant field in `d = 2` with `B_12 = b`.
    pub fn constant_2d(b: f64) -> Self {
        MagneticField::Constant { b: vec![vec![0.0, b], vec![-b, 0.0]] }
    }

    /// Builds a `d = 2` polynomial-type field from its single independent entry `B_12`.
    pub fn from_b12(p: Poly, width: Option<f64>) -> Self {
        let b = vec![vec![Poly::zero(), p.clone()], vec![p.scale(-1.0), Poly::zero()]];
        match width {
            Some(w) => MagneticField::Windowed { b, width: w },
            None => MagneticField::Polynomial { b },
        }
    }

    pub fn d(&self) -> usize {
        match self {
            MagneticField::Zero { d } => *d,
            MagneticField::Constant { b } => b.len(),
            MagneticField::Polynomial { b } | MagneticField::Windowed { b, .. } => b.len(),
        }
    }

    pub fn class(&self) -> FieldClass {
        match self {
            MagneticField::Polynomial { b } if b.iter().flatten().any(|p| p.degree() > 0) => {
                FieldClass::PolynomiallyBounded
            }
            _ => FieldClass::Bounded,
        }
    }

    /// Shape, dimension and antisymmetry checks on a fixed probe set.
    pub fn validate(&self) -> Result<()> {
        let d = self.d();
        if d != 1 && d != 2 {
            return Err(Error::UnsupportedDimension(d));
        }
        match self {
            MagneticField::Zero { .. } => {}
            MagneticField::Constant { b } => {
                if b.iter().any(|r| r.len() != d) {
                    return Err(Error::DimensionMismatch { expected: d, got: b[0].len() });
                }
            }
            MagneticField::Polynomial { b } | MagneticField::Windowed { b, .. } => {
                if b.iter().any(|r| r.len() != d) {
                    return Err(Error::DimensionMismatch { expected: d, got: b[0].len() });
                }
                for p in b.iter().flatten() {
                    p.check_dim(d)?;
                }
            }
        }
        if let MagneticField::Windowed { width, .. } = self {
            if !(width.is_finite() && *width > 0.0) {
                return Err(Error::Parameter(format!("window width must be positive (got {width})")));
            }
        }
        for probe in probe_points(d) {
            let m = self.eval(&probe);
            for j in 0..d {
                for k in 0..d {
                    let (a, c) = (m[j * d + k], m[k * d + j]);
                    if (a + c).abs() > 1e-12 * (1.0 + a.abs()) {
                        return Err(Error::NotAntisymmetric);
                    }
                }
            }
        }
        Ok(())
    }

    /// `B(x)` as a row-major `d × d` matrix.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        match self {
            MagneticField::Zero { d } => vec![0.0; d * d],
            MagneticField::Constant { b } => b.iter().flatten().copied().collect(),
            MagneticField::Polynomial { b } => b.iter().flatten().map(|p| p.eval(x)).collect(),
            MagneticField::Windowed { b, width } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let w = (-r2 / (2.0 * width * width)).exp();
                b.iter().flatten().map(|p| p.eval(x) * w).collect()
            }
        }
    }

    /// `Σ_jk B_jk(p) u_j v_k`.
    pub fn two_form(&self, p: &[f64], u: &[f64], v: &[f64]) -> f64 {
        let d = self.d();
        if d == 1 {
            return 0.0;
        }
        let m = self.eval(p);
        let mut s = 0.0;
        for j in 0..d {
            for k in 0..d {
                s += m[j * d + k] * u[j] * v[k];
            }
        }
        s
    }

    /// The matrix of a field that is constant in space, if it is.
    pub fn constant_matrix(&self) -> Option<Vec<f64>> {
        match self {
            MagneticField::Zero { d } => Some(vec![0.0; d * d]),
            MagneticField::Constant { b } => Some(b.iter().flatten().copied().collect()),
            MagneticField::Polynomial { b } if b.iter().flatten().all(|p| p.degree() == 0) => {
                let z = vec![0.0; b.len()];
                Some(b.iter().flatten().map(|p| p.eval(&z)).collect())
            }
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.d() == 1
            || match self.constant_matrix() {
                Some(m) => m.iter().all(|&v| v == 0.0),
                None => false,
            }
    }

    pub fn require_bounded(&self) -> Result<()> {
        match self.class() {
            FieldClass::Bounded => Ok(()),
            FieldClass::PolynomiallyBounded => Err(Error::FieldClass(
                "this diagnostic needs a bounded field with bounded derivatives; polynomially growing fields are refused".into(),
            )),
        }
    }
}

fn probe_points(d: usize) -> Vec<Vec<f64>> {
    let vals = [-1.7, -0.4, 0.0, 0.9, 2.3];
    if d == 1 {
        vals.iter().map(|&v| vec![v]).collect()
    } else {
        vals.iter().flat_map(|&a| vals.iter().map(move |&b| vec![a, b * 0.7 + 0.1])).collect()
    }
}

/// A vector potential `A`, a real one-form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum VectorPotential {
    Zero { d: usize },
    /// `A = (0, b x₁)` in `d = 2`; in `d = 1`, `A = b x₁` (a pure gauge).
    Landau {
        #[serde(default = "two")]
        d: usize,
        b: f64,
    },
    /// `A = (−b x₂/2, b x₁/2)`, `d = 2` only.
    Symmetric { b: f64 },
    Polynomial { a: Vec<Poly> },
}

fn two() -> usize {
    2
}

impl VectorPotential {
    pub fn d(&self) -> usize {
        match self {
            VectorPotential::Zero { d } | VectorPotential::Landau { d, .. } => *d,
            VectorPotential::Symmetric { .. } => 2,
            VectorPotential::Polynomial { a } => a.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.d();
        if d != 1 && d != 2 {
            return Err(Error::UnsupportedDimension(d));
        }
        if let VectorPotential::Polynomial { a } = self {
            for p in a {
                p.check_dim(d)?;
            }
        }
        Ok(())
    }

    /// Component polynomials; every built-in family is polynomial.
    pub fn as_polys(&self) -> Vec<Poly> {
        match self {
            VectorPotential::Zero { d } => vec![Poly::zero(); *d],
            VectorPotential::Landau { d: 1, b } => vec![Poly::monomial(*b, vec![1])],
            VectorPotential::Landau { b, .. } => vec![Poly::zero(), Poly::monomial(*b, vec![1, 0])],
            VectorPotential::Symmetric { b } => {
                vec![Poly::monomial(-0.5 * b, vec![0, 1]), Poly::monomial(0.5 * b, vec![1, 0])]
            }
            VectorPotential::Polynomial { a } => a.clone(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        match self {
            VectorPotential::Zero { d } => vec![0.0; *d],
            VectorPotential::Landau { d: 1, b } => vec![b * x[0]],
            VectorPotential::Landau { b, .. } => vec![0.0, b * x[0]],
            VectorPotential::Symmetric { b } => vec![-0.5 * b * x[1], 0.5 * b * x[0]],
            VectorPotential::Polynomial { a } => a.iter().map(|p| p.eval(x)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_polys().iter().all(Poly::is_zero)
    }
}

/// A real gauge function `χ`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GaugeFunction {
    pub chi: Poly,
}

impl GaugeFunction {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.chi.eval(x)
    }
}

/// `Γ^A(x, y) = ∫₀¹ A(x + t(y − x))·(y − x) dt` with an `nodes`-point rule.
pub fn circulation(a: &VectorPotential, x: &[f64], y: &[f64], nodes: usize) -> Result<f64> {
    if x.len() != a.d() || y.len() != a.d() {
        return Err(Error::DimensionMismatch { expected: a.d(), got: x.len() });
    }
    let owned;
    let r = if nodes == DEFAULT_NODES {
        rule(DEFAULT_NODES)
    } else {
        owned = GaussLegendre::new(nodes)?;
        &owned
    };
    let dv: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - a).collect();
    if let VectorPotential::Zero { .. } = a {
        return Ok(0.0);
    }
    let s = r.integrate(|t| {
        let s = 0.5 * (t + 1.0);
        let p: Vec<f64> = x.iter().zip(&dv).map(|(a, v)| a + s * v).collect();
        a.eval(&p).iter().zip(&dv).map(|(u, v)| u * v).sum::<f64>()
    });
    Ok(0.5 * s)
}

/// `Γ^B(⟨q, x₂, x₃⟩)`, the flux of `B` through the oriented triangle.
pub fn triangle_flux(b: &MagneticField, q: &[f64], x2: &[f64], x3: &[f64]) -> f64 {
    triangle_flux_with(b, q, x2, x3, DEFAULT_NODES)
}

/// Triangle flux on a collapsed `order × order` Gauss grid: `a = u₁(1 − u₂)`,
/// `b = u₁u₂`, Jacobian `u₁`.
pub fn triangle_flux_with(b: &MagneticField, q: &[f64], x2: &[f64], x3: &[f64], order: usize) -> f64 {
    let d = q.len();
    if d == 1 {
        return 0.0;
    }
    let e1: Vec<f64> = x2.iter().zip(q).map(|(a, c)| a - c).collect();
    let e2: Vec<f64> = x3.iter().zip(q).map(|(a, c)| a - c).collect();
    if let Some(m) = b.constant_matrix() {
        let mut s = 0.0;
        for j in 0..d {
            for k in 0..d {
                s += m[j * d + k] * e1[j] * e2[k];
            }
        }
        return 0.5 * s;
    }
    let owned;
    let r = if order == DEFAULT_NODES || order == GRADIENT_NODES {
        rule(order)
    } else {
        owned = GaussLegendre::new(order.max(1)).expect("positive order");
        &owned
    };
    let mut s = 0.0;
    let mut p = vec![0.0; d];
    for (t1, w1) in r.nodes.iter().zip(&r.weights) {
        let u1 = 0.5 * (t1 + 1.0);
        for (t2, w2) in r.nodes.iter().zip(&r.weights) {
            let u2 = 0.5 * (t2 + 1.0);
            let (aa, bb) = (u1 * (1.0 - u2), u1 * u2);
            for i in 0..d {
                p[i] = q[i] + aa * e1[i] + bb * e2[i];
            }
            s += 0.25 * w1 * w2 * u1 * b.two_form(&p, &e1, &e2);
        }
    }
    s
}

fn axpy(x: &[f64], s: f64, y: &[f64], t: f64, z: &[f64]) -> Vec<f64> {
    (0..x.len()).map(|i| x[i] + s * y[i] + t * z[i]).collect()
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("eps must lie in (0, 1] (got {eps})")))
    }
}

/// `γ^B_ε(x, y, z)`: `1/ε` times the flux through the triangle with corners
/// `x − ε(y+z)/2`, `x + ε(y−z)/2`, `x + ε(y+z)/2`.
pub fn scaled_triangle_flux(b: &MagneticField, x: &[f64], y: &[f64], z: &[f64], eps: f64) -> Result<f64> {
    check_eps(eps)?;
    Ok(gamma(b, x, y, z, eps))
}

pub(crate) fn gamma(b: &MagneticField, x: &[f64], y: &[f64], z: &[f64], eps: f64) -> f64 {
    let h = 0.5 * eps;
    let c1 = axpy(x, -h, y, -h, z);
    let c2 = axpy(x, h, y, -h, z);
    let c3 = axpy(x, h, y, h, z);
    triangle_flux(b, &c1, &c2, &c3) / eps
}

/// `γ̃(x, y_L, y_R, z) = γ(x, y_L, z) + γ(x, y_L + z, y_R)`.
pub fn quadrangle_flux(b: &MagneticField, x: &[f64], yl: &[f64], yr: &[f64], z: &[f64], eps: f64) -> Result<f64> {
    check_eps(eps)?;
    let ylz: Vec<f64> = yl.iter().zip(z).map(|(a, c)| a + c).collect();
    Ok(gamma(b, x, yl, z, eps) + gamma(b, x, &ylz, yr, eps))
}

/// `ω^B(q; x, y) = exp(−i(λ/ε) Γ^B(q, q + εx, q + εx + εy))`.
pub fn cocycle(b: &MagneticField, q: &[f64], x: &[f64], y: &[f64], eps: f64, lambda: f64) -> Result<C64> {
    check_eps(eps)?;
    let c2 = axpy(q, eps, x, 0.0, y);
    let c3 = axpy(q, eps, x, eps, y);
    Ok(C64::from_polar(1.0, -(lambda / eps) * triangle_flux(b, q, &c2, &c3)))
}

/// `B_jk = ∂_j A_k − ∂_k A_j`, analytic for the polynomial families.
pub fn exterior_derivative(a: &VectorPotential) -> MagneticField {
    let d = a.d();
    if a.is_zero() {
        return MagneticField::Zero { d };
    }
    let polys = a.as_polys();
    let mut b = vec![vec![Poly::zero(); d]; d];
    for j in 0..d {
        for k in 0..d {
            if j != k {
                b[j][k] = polys[k].derivative(j).add(&polys[j].derivative(k).scale(-1.0));
            }
        }
    }
    if b.iter().flatten().all(|p| p.degree() == 0) {
        let z = vec![0.0; d];
        MagneticField::Constant { b: b.iter().map(|r| r.iter().map(|p| p.eval(&z)).collect()).collect() }
    } else {
        MagneticField::Polynomial { b }
    }
}

/// `A′ = A + ε ∇χ`.
pub fn gauge_shift(a: &VectorPotential, chi: &GaugeFunction, eps: f64) -> VectorPotential {
    let comps = a
        .as_polys()
        .iter()
        .enumerate()
        .map(|(j, p)| p.add(&chi.chi.derivative(j).scale(eps)))
        .collect();
    VectorPotential::Polynomial { a: comps }
}

/// Largest mismatch between `dA` and `B` on the probe set.
pub fn potential_mismatch(a: &VectorPotential, b: &MagneticField) -> Result<f64> {
    if a.d() != b.d() {
        return Err(Error::DimensionMismatch { expected: b.d(), got: a.d() });
    }
    let da = exterior_derivative(a);
    Ok(probe_points(a.d())
        .iter()
        .map(|p| da.eval(p).iter().zip(b.eval(p)).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max))
}

/// The six coefficient matrices of the flux gradient, each row-major `d × d`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxGradient {
    pub dx: Vec<f64>,
    pub ex: Vec<f64>,
    pub dy: Vec<f64>,
    pub ey: Vec<f64>,
    pub dz: Vec<f64>,
    pub ez: Vec<f64>,
}

/// Which argument of `γ` is differentiated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxArg {
    X,
    Y,
    Z,
}

/// Coefficients as displayed, evaluated at `(x, εy, εz)` with a 16-point rule in `t`.
pub fn flux_gradient_coefficients(b: &MagneticField, x: &[f64], y: &[f64], z: &[f64], eps: f64) -> Result<FluxGradient> {
    b.require_bounded()?;
    check_eps(eps)?;
    let d = x.len();
    let ys: Vec<f64> = y.iter().map(|v| eps * v).collect();
    let zs: Vec<f64> = z.iter().map(|v| eps * v).collect();
    let r = rule(GRADIENT_NODES);
    // P1(t) = x + (tY − Z)/2, P2(t) = x + (Y + tZ)/2, P3(t) = x + t(Y + Z)/2
    let p1 = |t: f64| axpy(x, 0.5 * t, &ys, -0.5, &zs);
    let p2 = |t: f64| axpy(x, 0.5, &ys, 0.5 * t, &zs);
    let p3 = |t: f64| axpy(x, 0.5 * t, &ys, 0.5 * t, &zs);
    let integrate = |f: &dyn Fn(f64) -> Vec<f64>| {
        let mut acc = vec![0.0; d * d];
        for (&t, &w) in r.nodes.iter().zip(&r.weights) {
            for (a, v) in acc.iter_mut().zip(f(t)) {
                *a += w * v;
            }
        }
        acc
    };
    let comb = |u: Vec<f64>, s: f64, v: Vec<f64>, k: f64| -> Vec<f64> {
        u.iter().zip(&v).map(|(a, c)| k * (a + s * c)).collect()
    };
    let dx = integrate(&|t| comb(b.eval(&p1(t)), -1.0, b.eval(&p3(t)), 0.5));
    let ex = integrate(&|t| comb(b.eval(&p2(t)), -1.0, b.eval(&p3(t)), 0.5));
    let dy = integrate(&|t| comb(b.eval(&p1(t)), -1.0, b.eval(&p3(t)), 0.25 * t));
    let ey = integrate(&|t| comb(b.eval(&p2(t)), -t, b.eval(&p3(t)), 0.25));
    let dz = integrate(&|t| comb(b.eval(&p1(t)), -t, b.eval(&p3(t)), 0.25));
    let ez = integrate(&|t| comb(b.eval(&p2(t)), -1.0, b.eval(&p3(t)), 0.25 * t));
    Ok(FluxGradient { dx, ex, dy, ey, dz, ez })
}

/// `D^(z)` obtained from the reflection `γ(x, −z, −y) = −γ(x, y, z)` applied
/// to the `y`-gradient: `−¼∫(B(x + (tY − Z)/2) + t B(x + t(Y + Z)/2)) dt`.
pub fn reflected_dz(b: &MagneticField, x: &[f64], y: &[f64], z: &[f64], eps: f64) -> Result<Vec<f64>> {
    b.require_bounded()?;
    check_eps(eps)?;
    let d = x.len();
    let ys: Vec<f64> = y.iter().map(|v| eps * v).collect();
    let zs: Vec<f64> = z.iter().map(|v| eps * v).collect();
    let r = rule(GRADIENT_NODES);
    let mut acc = vec![0.0; d * d];
    for (&t, &w) in r.nodes.iter().zip(&r.weights) {
        let b1 = b.eval(&axpy(x, 0.5 * t, &ys, -0.5, &zs));
        let b3 = b.eval(&axpy(x, 0.5 * t, &ys, 0.5 * t, &zs));
        for i in 0..d * d {
            acc[i] -= 0.25 * w * (b1[i] + t * b3[i]);
        }
    }
    Ok(acc)
}

fn matvec(m: &[f64], v: &[f64]) -> Vec<f64> {
    let d = v.len();
    (0..d).map(|j| (0..d).map(|k| m[j * d + k] * v[k]).sum()).collect()
}

/// Gradient of `γ` in the chosen argument, rebuilt from the coefficient matrices.
pub fn reconstruct_gradient(c: &FluxGradient, arg: FluxArg, y: &[f64], z: &[f64], eps: f64) -> Vec<f64> {
    let (dm, em, s) = match arg {
        FluxArg::X => (&c.dx, &c.ex, 1.0),
        FluxArg::Y => (&c.dy, &c.ey, eps),
        FluxArg::Z => (&c.dz, &c.ez, eps),
    };
    let a = matvec(dm, y);
    let b = matvec(em, z);
    a.iter().zip(&b).map(|(u, v)| s * (u + v)).collect()
}

/// Central differences of `γ` in one argument, step [`FD_STEP`].
pub fn fd_gradient(b: &MagneticField, x: &[f64], y: &[f64], z: &[f64], eps: f64, arg: FluxArg) -> Vec<f64> {
    let d = x.len();
    (0..d)
        .map(|j| {
            let mut args = [x.to_vec(), y.to_vec(), z.to_vec()];
            let slot = arg as usize;
            args[slot][j] += FD_STEP;
            let fp = gamma(b, &args[0], &args[1], &args[2], eps);
            args[slot][j] -= 2.0 * FD_STEP;
            let fm = gamma(b, &args[0], &args[1], &args[2], eps);
            (fp - fm) / (2.0 * FD_STEP)
        })
        .collect()
}

/// Fitted constant of a flux-factor growth bound for one derivative order pattern.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthFit {
    /// Derivative order per argument, e.g. `[|a|, |b|, |c|]`.
    pub orders: Vec<usize>,
    /// `max |∂ e^{−iλγ}| / (Σ⟨·⟩)^{total order}` over the samples.
    pub constant: f64,
    pub samples: usize,
}

/// Patterns of per-argument orders with total at most 2.
fn order_patterns(args: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![0; args]];
    for i in 0..args {
        let mut p = vec![0; args];
        p[i] = 1;
        out.push(p);
    }
    for i in 0..args {
        for j in i..args {
            let mut p = vec![0; args];
            p[i] += 1;
            p[j] += 1;
            out.push(p);
        }
    }
    out
}

/// Largest central-difference derivative of `phase` over all coordinate
/// directions realizing `pattern`.
fn max_derivative(phase: &dyn Fn(&[Vec<f64>]) -> C64, base: &[Vec<f64>], pattern: &[usize]) -> f64 {
    let d = base[0].len();
    let mut dirs: Vec<(usize, usize)> = Vec::new();
    for (slot, &k) in pattern.iter().enumerate() {
        for _ in 0..k {
            dirs.push((slot, 0));
        }
    }
    let total = dirs.len();
    if total == 0 {
        return phase(base).norm();
    }
    let h = FD_STEP;
    let mut best: f64 = 0.0;
    let combos = d.pow(total as u32);
    for c in 0..combos {
        let mut cc = c;
        let mut dd = dirs.clone();
        for e in dd.iter_mut() {
            e.1 = cc % d;
            cc /= d;
        }
        let mut acc = C64::new(0.0, 0.0);
        for signs in 0..(1usize << total) {
            let mut args = base.to_vec();
            let mut sgn = 1.0;
            for (bit, &(slot, coord)) in dd.iter().enumerate() {
                if signs >> bit & 1 == 1 {
                    args[slot][coord] -= h;
                    sgn = -sgn;
                } else {
                    args[slot][coord] += h;
                }
            }
            acc += phase(&args) * sgn;
        }
        best = best.max(acc.norm() / (2.0 * h).powi(total as i32));
    }
    best
}

fn sample_args(d: usize, slots: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(slots);
    out.push((0..d).map(|_| rng.random_range(-2.0..2.0)).collect());
    for _ in 1..slots {
        let r = 10f64.powf(rng.random_range(-1.0..1.5));
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-12);
        out.push(v.iter().map(|a| r * a / nv).collect());
    }
    out
}

fn growth_fits(slots: usize, samples: usize, rng: &mut impl Rng, d: usize, phase: &dyn Fn(&[Vec<f64>]) -> C64) -> Vec<GrowthFit> {
    let patterns = order_patterns(slots);
    let mut consts = vec![0.0f64; patterns.len()];
    for _ in 0..samples {
        let args = sample_args(d, slots, rng);
        let weight: f64 = args[1..].iter().map(|v| japanese_bracket(v)).sum();
        for (pi, p) in patterns.iter().enumerate() {
            let k: usize = p.iter().sum();
            let v = max_derivative(phase, &args, p) / weight.powi(k as i32);
            consts[pi] = consts[pi].max(v);
        }
    }
    patterns.into_iter().zip(consts).map(|(orders, constant)| GrowthFit { orders, constant, samples }).collect()
}

/// Fitted `C_abc` for `|∂_x^a ∂_y^b ∂_z^c e^{−iλγ}| ≤ C (⟨y⟩ + ⟨z⟩)^{|a|+|b|+|c|}`.
pub fn flux_factor_growth(b: &MagneticField, eps: f64, lambda: f64, samples: usize, rng: &mut impl Rng) -> Result<Vec<GrowthFit>> {
    b.require_bounded()?;
    check_eps(eps)?;
    let phase = |a: &[Vec<f64>]| C64::from_polar(1.0, -lambda * gamma(b, &a[0], &a[1], &a[2], eps));
    Ok(growth_fits(3, samples, rng, b.d(), &phase))
}

/// Fitted constants for the four-argument quadrangle phase factor.
pub fn quadrangle_factor_growth(b: &MagneticField, eps: f64, lambda: f64, samples: usize, rng: &mut impl Rng) -> Result<Vec<GrowthFit>> {
    b.require_bounded()?;
    check_eps(eps)?;
    let phase = |a: &[Vec<f64>]| {
        let g = quadrangle_flux(b, &a[0], &a[1], &a[2], &a[3], eps).unwrap_or(f64::NAN);
        C64::from_polar(1.0, -lambda * g)
    };
    Ok(growth_fits(4, samples, rng, b.d(), &phase))
}
