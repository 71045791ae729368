use super::{wmax, random_doubled, random_symbol, Ctx};
use crate::error::Result;
use crate::grid::{sfourier, sfourier_doubled, GridSpec};
use crate::harness::config::balanced_length;
use rand_chacha::ChaCha8Rng;

/// The configured grid and a small grid of the other dimension.
fn grids(ctx: &Ctx<'_>) -> Result<Vec<GridSpec>> {
    let other = if ctx.grid().d == 1 { GridSpec::new(2, 5, balanced_length(5))? } else { GridSpec::new(1, 15, balanced_length(15))? };
    Ok(vec![ctx.grid(), other])
}

pub fn sfourier_involution(ctx: &Ctx<'_>, rng: &mut ChaCha8Rng) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for g in grids(ctx)? {
        let f = random_symbol(g, rng);
        worst = wmax(worst, sfourier(&sfourier(&f)).max_abs_diff(&f));
    }
    let g = GridSpec::new(1, 5, balanced_length(5))?;
    let f = random_doubled(g, rng);
    Ok(wmax(worst, sfourier_doubled(&sfourier_doubled(&f)).max_abs_diff(&f)))
}

pub fn plancherel(ctx: &Ctx<'_>, rng: &mut ChaCha8Rng) -> Result<f64> {
    let norm2 = |v: &[num_complex::Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let mut worst: f64 = 0.0;
    for g in grids(ctx)? {
        let f = random_symbol(g, rng);
        let (a, b) = (norm2(&sfourier(&f).values), norm2(&f.values));
        worst = wmax(worst, (a - b).abs() / b);
    }
    Ok(worst)
}
