use super::{random_symbol, wmax, Ctx};
use crate::error::Result;
use crate::grid::DoubledSymbol;
use crate::harness::seminorm::{hoermander_seminorm, super_seminorm};
use crate::products::gaussian_symbol;
use crate::supercalc::{super_product, SuperProductRoute};
use rand_chacha::ChaCha8Rng;

const ORDERS: [f64; 3] = [1.0, 0.0, -1.0];

/// Largest relative violation of `p^m_N ≤ p^m_{N+1}` and `p^m_N ≤ p^{m'}_N`
/// for `m' ≤ m`, over random and Gaussian symbols.
pub fn monotonicity(ctx: &Ctx<'_>, rng: &mut ChaCha8Rng) -> Result<f64> {
    let grid = ctx.grid();
    let d = grid.d;
    let mut symbols = vec![random_symbol(grid, rng), gaussian_symbol(grid, &vec![0.3; d], &vec![-0.2; d], 1.1)];
    symbols.extend(ctx.plain_symbols(grid));
    let (rho, delta) = (1.0, 0.0);
    let mut worst: f64 = 0.0;
    let violation = |lo: f64, hi: f64| ((lo - hi) / hi.max(f64::MIN_POSITIVE)).max(0.0);
    for f in &symbols {
        // rows: weight order m (decreasing), columns: derivative order N
        let mut table = Vec::new();
        for &m in &ORDERS {
            let row: Vec<f64> = (0..=3).map(|n| hoermander_seminorm(f, m, rho, delta, n)).collect::<Result<_>>()?;
            table.push(row);
        }
        for (i, row) in table.iter().enumerate() {
            for n in 0..row.len() {
                if n + 1 < row.len() {
                    worst = wmax(worst, violation(row[n], row[n + 1]));
                }
                if i + 1 < table.len() {
                    worst = wmax(worst, violation(row[n], table[i + 1][n]));
                }
            }
        }
    }
    Ok(worst)
}

/// `q^{0,0}_0((f⊗f) ♯ (g⊗g))` for Gaussian `f`, `g`; reported, finite.
pub fn product_order(ctx: &Ctx<'_>, _rng: &mut ChaCha8Rng) -> Result<f64> {
    let c = ctx.line(5, ctx.unit()?)?;
    let f = gaussian_symbol(c.grid, &[0.3], &[-0.2], 1.1);
    let g = gaussian_symbol(c.grid, &[-0.4], &[0.1], 0.9);
    let ff = DoubledSymbol::tensor(&f, &f)?;
    let gg = DoubledSymbol::tensor(&g, &g)?;
    let p = super_product(&c, &ff, &gg, SuperProductRoute::Superop)?;
    let q = super_seminorm(&p, 0.0, 0.0, 1.0, 0.0, 0)?;
    Ok(if q.is_finite() { q } else { f64::INFINITY })
}
