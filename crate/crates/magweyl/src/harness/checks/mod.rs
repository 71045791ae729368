//! The catalogue of verification checks.
//!
//! A check returns a residual; the runner compares it with the tolerance.
//! Differences between symbols or operators are reported relative to the
//! reference, `‖a − b‖∞ / max(1, ‖b‖∞)`, so random inputs of any scale share
//! one tolerance. Checks that need an exact finite calculus pin `ε = 1`.

mod appendix;
mod closed_forms;
mod grid;
mod inequalities;
mod products;
mod seminorms;
mod supercalc;
mod weyl;

use crate::error::Result;
use crate::grid::{DoubledSymbol, GridSpec, LatticePoint, PhaseSymbol};
use crate::harness::config::{balanced_length, SuiteConfig, SymbolFamily};
use crate::magnetics::{GaugeFunction, Poly, VectorPotential};
use crate::products::gaussian_symbol;
use crate::weyl::{CMatrix, Calculus, OperatorMatrix, Params};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type CheckFn = fn(&Ctx<'_>, &mut ChaCha8Rng) -> Result<f64>;

/// One entry of the catalogue.
pub struct CheckDef {
    pub id: &'static str,
    pub suite: &'static str,
    pub anchor: &'static str,
    pub tol: f64,
    pub run: CheckFn,
}

macro_rules! check {
    ($id:literal, $suite:literal, $anchor:literal, $tol:expr, $run:path) => {
        CheckDef { id: $id, suite: $suite, anchor: $anchor, tol: $tol, run: $run }
    };
}

/// Every check in report order.
pub static CATALOGUE: &[CheckDef] = &[
    check!("sfourier-involution", "grid", "symplectic Fourier transform squares to the identity", 1e-12, grid::sfourier_involution),
    check!("plancherel", "grid", "symplectic Fourier transform preserves the l2 norm", 1e-12, grid::plancherel),
    check!("weyl-composition", "weyl", "product of Weyl systems carries the twist and the triangle flux", 1e-9, weyl::composition),
    check!("gauge-covariance", "weyl", "quantization intertwines gauge changes with multiplication operators", 1e-9, weyl::gauge_covariance),
    check!("quantize-inversion", "weyl", "Wigner transform inverts quantization", 1e-10, weyl::quantize_inversion),
    check!("moyal-routes", "products", "Moyal product by operators equals the twisted convolution", 1e-8, products::routes),
    check!("moyal-associativity", "products", "Moyal product is associative", 1e-9, products::associativity),
    check!("moyal-conjugation", "products", "complex conjugation reverses Moyal products", 1e-9, products::conjugation),
    check!("moyal-gauge-independence", "products", "Moyal product does not see the gauge", 1e-8, products::gauge_independence),
    check!("moyal-representation-independence", "products", "Moyal product survives a unitary change of frame", 1e-8, products::representation_independence),
    check!("semiclassical-order", "products", "first-order expansion error shrinks like eps squared", 0.4, products::semiclassical_order),
    check!("semisuper-routes", "supercalc", "semi-super product agrees across operator and two quadrature routes", 1e-7, supercalc::semisuper_routes),
    check!("semisuper-reduction", "supercalc", "semi-super product of a tensor symbol sandwiches the operand", 1e-8, supercalc::semisuper_reduction),
    check!("kernel-defining-relation", "supercalc", "integral operator of the kernel reproduces the semi-super product", 1e-9, supercalc::kernel_defining_relation),
    check!("super-wigner-round-trip", "supercalc", "super Wigner transform inverts the kernel map", 1e-8, supercalc::super_wigner_round_trip),
    check!("superproduct-routes", "supercalc", "super product agrees across kernel, superoperator and quadrature routes", 1e-7, supercalc::superproduct_routes),
    check!("superproduct-defining-relation", "supercalc", "super quantization turns the super product into composition", 1e-8, supercalc::superproduct_defining_relation),
    check!("superproduct-reversed-order", "supercalc", "right factors of tensor symbols multiply in reverse", 1e-8, supercalc::superproduct_reversed_order),
    check!("trace-identity", "supercalc", "integral of a super product equals the integral of the pointwise product", 1e-8, supercalc::trace_identity),
    check!("duality", "supercalc", "super product moves across the bilinear pairing cyclically", 1e-8, supercalc::duality),
    check!("liouville-correspondence", "supercalc", "Liouville symbol quantizes to the commutator map", 1e-9, supercalc::liouville_correspondence),
    check!("hs-adjoint", "supercalc", "Hilbert-Schmidt adjoint of a super quantization is the conjugate symbol", 1e-10, supercalc::hs_adjoint),
    check!("super-gauge-independence", "supercalc", "semi-super and super products do not see the gauge", 1e-8, supercalc::gauge_independence),
    check!("super-representation-independence", "supercalc", "semi-super and super products survive a unitary change of frame", 1e-8, supercalc::representation_independence),
    check!("flux-gradient-x", "appendix", "x-gradient of the triangle flux from its coefficient matrices", 1e-6, appendix::gradient_x),
    check!("flux-gradient-y", "appendix", "y-gradient of the triangle flux from its coefficient matrices", 1e-6, appendix::gradient_y),
    check!("flux-gradient-z-displayed", "appendix", "z-gradient of the triangle flux from the coefficients as printed", 1e-6, appendix::gradient_z_displayed),
    check!("flux-gradient-z-reflected", "appendix", "z-gradient of the triangle flux from the reflected y-coefficients", 1e-6, appendix::gradient_z_reflected),
    check!("flux-growth", "appendix", "derivatives of the flux factor grow at most polynomially", 1e6, appendix::flux_growth),
    check!("quadrangle-growth", "appendix", "derivatives of the quadrangle factor grow at most polynomially", 1e6, appendix::quadrangle_growth),
    check!("peetre", "inequalities", "bracket shift bound with constant two to the half power", 1e-12, inequalities::peetre),
    check!("bracket-squeeze", "inequalities", "joint bracket below the product of brackets with constant one", 1e-12, inequalities::bracket_squeeze),
    check!("bracket-failure-direction", "inequalities", "joint bracket bound breaks for negative orders", 1e-3, inequalities::bracket_failure_direction),
    check!("seminorm-monotonicity", "seminorms", "seminorms grow with the order and as the weight exponent drops", 1e-12, seminorms::monotonicity),
    check!("seminorm-product-order", "seminorms", "super product of tensor Gaussians has a finite order-zero seminorm", 1e6, seminorms::product_order),
    check!("kernel-closed-form", "closed-forms", "lattice kernel map against its oscillatory integral", 1e-6, closed_forms::kernel),
    check!("super-wigner-closed-form", "closed-forms", "super Wigner integral inverts the kernel integral", 1e-6, closed_forms::super_wigner),
];

pub fn find(id: &str) -> Option<&'static CheckDef> {
    CATALOGUE.iter().find(|c| c.id == id)
}

/// What a check may read: the validated config and the suite it runs under.
pub struct Ctx<'a> {
    pub cfg: &'a SuiteConfig,
    pub suite: &'static str,
}

impl Ctx<'_> {
    pub fn grid(&self) -> GridSpec {
        self.cfg.grid
    }

    pub fn params(&self) -> Result<Params> {
        self.cfg.params()
    }

    /// Configured `λ` at `ε = 1`.
    pub fn unit(&self) -> Result<Params> {
        Params::new(1.0, self.cfg.lambda)
    }

    fn nodes(&self) -> usize {
        self.cfg.nodes_for(self.suite)
    }

    /// Calculus on the configured grid with the configured field or potential.
    pub fn calculus(&self, params: Params) -> Result<Calculus> {
        let grid = self.grid();
        let c = match (self.cfg.resolved_potential(), &self.cfg.field) {
            (Some(a), Some(b)) => Calculus::with_field_and_potential(grid, params, b.clone(), a)?,
            (Some(a), None) => Calculus::new(grid, params, a)?,
            (None, Some(b)) => Calculus::from_field(grid, params, b.clone())?,
            (None, None) => unreachable!("a potential is resolved when no field is given"),
        };
        c.with_nodes(self.nodes())
    }

    /// Calculus on a fixed grid with the given potential.
    pub fn calculus_on(&self, grid: GridSpec, params: Params, a: VectorPotential) -> Result<Calculus> {
        Calculus::new(grid, params, a)?.with_nodes(self.nodes())
    }

    /// One-dimensional calculus with `Δx = Δξ`; keeps a configured 1-d potential.
    pub fn line(&self, n: usize, params: Params) -> Result<Calculus> {
        let a = match self.cfg.resolved_potential() {
            Some(a) if a.d() == 1 => a,
            _ => VectorPotential::Landau { d: 1, b: 0.5 },
        };
        self.calculus_on(GridSpec::new(1, n, balanced_length(n))?, params, a)
    }

    /// `count` gauge functions in `d` dimensions, the configured one first.
    pub fn gauges(&self, d: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<GaugeFunction> {
        let mut out: Vec<GaugeFunction> = self.cfg.gauge_function().filter(|g| g.chi.terms.iter().all(|t| t.pow.len() == d)).into_iter().collect();
        while out.len() < count {
            out.push(GaugeFunction { chi: Poly::random(d, 3, 0.5, rng) });
        }
        out
    }

    /// Configured Gaussian and plane-wave symbols sampled on `grid`.
    pub fn plain_symbols(&self, grid: GridSpec) -> Vec<PhaseSymbol> {
        self.cfg.symbols.iter().filter_map(|s| plain_symbol(&s.family, grid)).collect()
    }

    /// Generators `h` of the configured Liouville symbols.
    pub fn liouville_generators(&self, grid: GridSpec) -> Vec<PhaseSymbol> {
        self.cfg
            .symbols
            .iter()
            .filter_map(|s| match &s.family {
                SymbolFamily::Liouville { h } => self.cfg.symbols.iter().find(|t| &t.name == h).and_then(|t| plain_symbol(&t.family, grid)),
                _ => None,
            })
            .collect()
    }
}

fn plain_symbol(f: &SymbolFamily, grid: GridSpec) -> Option<PhaseSymbol> {
    match f {
        SymbolFamily::Gaussian { center, width, momentum } if center.len() == grid.d => Some(gaussian_symbol(grid, center, momentum, *width)),
        SymbolFamily::Planewave { j, l } if j.len() == grid.d => Some(PhaseSymbol::plane_wave(grid, &LatticePoint { j: j.clone(), l: l.clone() })),
        _ => None,
    }
}

pub(crate) fn rnd(rng: &mut impl Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub(crate) fn random_symbol(grid: GridSpec, rng: &mut impl Rng) -> PhaseSymbol {
    PhaseSymbol { grid, values: (0..grid.nphase()).map(|_| rnd(rng)).collect() }
}

pub(crate) fn random_doubled(grid: GridSpec, rng: &mut impl Rng) -> DoubledSymbol {
    let nn = grid.nphase();
    DoubledSymbol { grid, values: (0..nn * nn).map(|_| rnd(rng)).collect() }
}

pub(crate) fn random_operator(calc: &Calculus, rng: &mut impl Rng) -> Result<OperatorMatrix> {
    let np = calc.grid.npos();
    calc.operator(CMatrix::from_fn(np, np, |_, _| rnd(rng)))
}

/// Maximum that keeps NaN, so a broken sample cannot hide behind a good one.
pub(crate) fn wmax(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

/// `‖a − b‖∞ / max(1, ‖b‖∞)` given the two norms.
pub(crate) fn rel(diff: f64, scale: f64) -> f64 {
    diff / scale.max(1.0)
}

pub(crate) fn rel_sym(a: &PhaseSymbol, b: &PhaseSymbol) -> f64 {
    rel(a.max_abs_diff(b), b.max_abs())
}

pub(crate) fn rel_doubled(a: &DoubledSymbol, b: &DoubledSymbol) -> f64 {
    rel(a.max_abs_diff(b), b.max_abs())
}

pub(crate) fn rel_op(a: &OperatorMatrix, b: &OperatorMatrix) -> f64 {
    rel(a.max_abs_diff(b), b.max_abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn ids_and_anchors_are_unique_and_nonempty() {
        let ids: HashSet<_> = CATALOGUE.iter().map(|c| c.id).collect();
        let anchors: HashSet<_> = CATALOGUE.iter().map(|c| c.anchor).collect();
        assert_eq!(ids.len(), CATALOGUE.len());
        assert_eq!(anchors.len(), CATALOGUE.len());
        assert!(CATALOGUE.iter().all(|c| !c.id.is_empty() && !c.anchor.is_empty() && c.tol > 0.0));
    }

    #[test]
    fn every_suite_is_known() {
        use crate::harness::config::{DEFAULT_SUITES, OPTIONAL_SUITES};
        assert!(CATALOGUE.iter().all(|c| DEFAULT_SUITES.contains(&c.suite) || OPTIONAL_SUITES.contains(&c.suite)));
    }
}
