use super::{wmax, random_symbol, rel_op, rel_sym, Ctx};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, LatticePoint};
use crate::magnetics::VectorPotential;
use crate::weyl::composition_residual;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const PAIRS: usize = 20;
const INVERSION_SAMPLES: usize = 10;
const GAUGES: usize = 3;

/// Constant-field gauges of a `d = 2` field.
fn constant_field_potentials(b: f64) -> [VectorPotential; 2] {
    [VectorPotential::Landau { d: 2, b }, VectorPotential::Symmetric { b }]
}

/// Lattice point with small position part, keeping sums inside the lattice.
fn small_point(h: i64, rng: &mut ChaCha8Rng) -> LatticePoint {
    LatticePoint { j: (0..2).map(|_| rng.random_range(-2..=2)).collect(), l: (0..2).map(|_| rng.random_range(-h / 2..=h / 2)).collect() }
}

pub fn composition(ctx: &Ctx<'_>, rng: &mut ChaCha8Rng) -> Result<f64> {
    let grid = GridSpec::new(2, 9, 7.0)?;
    let params = ctx.params()?;
    let mut worst: f64 = 0.0;
    for a in constant_field_potentials(0.8) {
        let c = ctx.calculus_on(grid, params, a)?;
        for _ in 0..PAIRS / 2 {
            let (x, y) = (small_point(grid.half(), rng), small_point(grid.half(), rng));
            let (r, rows) = composition_residual(&c, &x, &y)?;
            if rows == 0 {
                return Err(Error::Parameter("no wrap-free rows for the composition law".into()));
            }
            worst = wmax(worst, r);
        }
    }
    Ok(worst)
}

pub fn gauge_covariance(ctx: &Ctx<'_>, rng: &mut ChaCha8Rng) -> Result<f64> {
    let grid = GridSpec::new(2, 5, 6.0)?;
    let params = ctx.params()?;
    let chis = ctx.gauges(2, GAUGES, rng);
    let mut worst: f64 = 0.0;
    for a in [VectorPotential::Landau { d: 2, b: 0.9 }, VectorPotential::Symmetric { b: 0.7 }] {
        let c = ctx.calculus_on(grid, params, a)?;
        let f = random_symbol(grid, rng);
        let op = c.quantize(&f)?;
        for chi in &chis {
            let lhs = c.gauge_shifted(chi)?.quantize(&f)?;
            let rhs = c.conjugate_by_gauge(&op, chi)?;
            worst = wmax(worst, rel_op(&lhs, &rhs));
        }
    }
    Ok(worst)
}

pub fn quantize_inversion(ctx: &Ctx<'_>, rng: &mut ChaCha8Rng) -> Result<f64> {
    let c = ctx.calculus(ctx.params()?)?;
    let mut symbols: Vec<_> = (0..INVERSION_SAMPLES).map(|_| random_symbol(c.grid, rng)).collect();
    symbols.extend(ctx.plain_symbols(c.grid));
    let mut worst: f64 = 0.0;
    for f in &symbols {
        worst = wmax(worst, rel_sym(&c.wigner(&c.quantize(f)?)?, f));
    }
    Ok(worst)
}
