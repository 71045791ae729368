use super::{wmax, random_symbol, rel_sym, Ctx};
use crate::error::Result;
use crate::grid::GridSpec;
use crate::magnetics::VectorPotential;
use crate::products::{gaussian_symbol, moyal_product, richardson_ratios, semiclassical_defect, ProductRoute};
use crate::weyl::{conjugate_by_unitary, random_unitary, Calculus, Params};
use rand_chacha::ChaCha8Rng;

const OP: ProductRoute = ProductRoute::Operator;

/// Halving sweep of `ε` for the expansion order.
pub const EPS_SWEEP: [f64; 4] = [0.4, 0.2, 0.1, 0.05];

/// Sites of the expansion-order lattice.
pub const SWEEP_SITES: usize = 31;

pub fn routes(ctx: &Ctx<'_>, rng: &mut ChaCha8Rng) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for n in [5, 7] {
        let c = ctx.line(n, ctx.params()?)?;
        let (f, g) = (random_symbol(c.grid, rng), random_symbol(c.grid, rng));
        let a = moyal_product(&c, &f, &g, OP)?;
        let b = moyal_product(&c, &f, &g, ProductRoute::Quadrature)?;
        worst = wmax(worst, rel_sym(&b, &a));
    }
    Ok(worst)
}

pub fn associativity(ctx: &Ctx<'_>, rng: &mut ChaCha8Rng) -> Result<f64> {
    let c = ctx.calculus(ctx.params()?)?;
    let (f, g, h) = (random_symbol(c.grid, rng), random_symbol(c.grid, rng), random_symbol(c.grid, rng));
    let left = moyal_product(&c, &moyal_product(&c, &f, &g, OP)?, &h, OP)?;
    let right = moyal_product(&c, &f, &moyal_product(&c, &g, &h, OP)?, OP)?;
    Ok(rel_sym(&left, &right))
}

pub fn conjugation(ctx: &Ctx<'_>, rng: &mut ChaCha8Rng) -> Result<f64> {
    let c = ctx.calculus(ctx.unit()?)?;
    let (f, g) = (random_symbol(c.grid, rng), random_symbol(c.grid, rng));
    let a = moyal_product(&c, &f, &g, OP)?.conj();
    let b = moyal_product(&c, &g.conj(), &f.conj(), OP)?;
    Ok(rel_sym(&a, &b))
}

/// Symmetric-gauge calculus in `d = 2` shared by the independence checks.
fn plane(ctx: &Ctx<'_>) -> Result<Calculus> {
    ctx.calculus_on(GridSpec::new(2, 5, 6.0)?, ctx.params()?, VectorPotential::Symmetric { b: 0.9 })
}

pub fn gauge_independence(ctx: &Ctx<'_>, rng: &mut ChaCha8Rng) -> Result<f64> {
    let c = plane(ctx)?;
    let (f, g) = (random_symbol(c.grid, rng), random_symbol(c.grid, rng));
    let base = moyal_product(&c, &f, &g, OP)?;
    let mut worst: f64 = 0.0;
    for chi in ctx.gauges(2, 2, rng) {
        worst = wmax(worst, rel_sym(&moyal_product(&c.gauge_shifted(&chi)?, &f, &g, OP)?, &base));
    }
    Ok(worst)
}

pub fn representation_independence(ctx: &Ctx<'_>, rng: &mut ChaCha8Rng) -> Result<f64> {
    let c = plane(ctx)?;
    let (f, g) = (random_symbol(c.grid, rng), random_symbol(c.grid, rng));
    let base = moyal_product(&c, &f, &g, OP)?;
    let u = random_unitary(c.grid, rng);
    let fu = conjugate_by_unitary(&c.quantize(&f)?, &u)?;
    let gu = conjugate_by_unitary(&c.quantize(&g)?, &u)?;
    let back = conjugate_by_unitary(&fu.mul(&gu)?, &u.adjoint())?;
    Ok(rel_sym(&c.wigner(&back)?, &base))
}

/// Defects of the first-order expansion over [`EPS_SWEEP`].
pub fn sweep_defects(lambda: f64) -> Result<Vec<f64>> {
    let grid = GridSpec::new(1, SWEEP_SITES, crate::harness::config::balanced_length(SWEEP_SITES))?;
    let f = gaussian_symbol(grid, &[0.3], &[-0.2], 1.2);
    let g = gaussian_symbol(grid, &[-0.4], &[0.3], 1.0);
    EPS_SWEEP
        .iter()
        .map(|&eps| {
            let c = Calculus::new(grid, Params::new(eps, lambda)?, VectorPotential::Zero { d: 1 })?;
            semiclassical_defect(&c, &f, &g, ProductRoute::Quadrature)
        })
        .collect()
}

/// `max |ratio − 4|` over the Richardson ratios of the sweep.
pub fn semiclassical_order(ctx: &Ctx<'_>, _rng: &mut ChaCha8Rng) -> Result<f64> {
    let ratios = richardson_ratios(&sweep_defects(ctx.cfg.lambda)?);
    Ok(ratios.iter().map(|r| (r - 4.0).abs()).fold(0.0, wmax))
}
