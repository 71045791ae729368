use super::{wmax, Ctx};
use crate::error::Result;
use crate::grid::{japanese_bracket, peetre_sides};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const SAMPLES: usize = 10_000;
const SQUEEZE_ORDERS: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 3.5];
const FAILURE_ORDER: f64 = -2.0;
const FAILURE_STEPS: i32 = 12;

/// Vector in `d = 2` with log-uniform length over six decades.
fn spread(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let r = 10f64.powf(rng.random_range(-3.0..3.0));
    let t = rng.random_range(0.0..std::f64::consts::TAU);
    vec![r * t.cos(), r * t.sin()]
}

/// `⟨(ξ_L, ξ_R)⟩^m` and `⟨ξ_L⟩^m ⟨ξ_R⟩^m`.
pub fn squeeze_sides(xl: &[f64], xr: &[f64], m: f64) -> (f64, f64) {
    let joint: Vec<f64> = xl.iter().chain(xr).copied().collect();
    (japanese_bracket(&joint).powf(m), japanese_bracket(xl).powf(m) * japanese_bracket(xr).powf(m))
}

/// Largest relative violation `lhs/rhs − 1`, clipped at zero.
pub fn peetre(_ctx: &Ctx<'_>, rng: &mut ChaCha8Rng) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..SAMPLES {
        let (xi, eta) = (spread(rng), spread(rng));
        let m = rng.random_range(-4.0..4.0);
        let (l, r) = peetre_sides(&xi, &eta, m);
        worst = wmax(worst, (l / r - 1.0).max(0.0));
    }
    Ok(worst)
}

/// Largest violation for `m ≥ 0`, plus the gap between the best observed
/// constant and one (attained at `ξ_R = 0`).
pub fn bracket_squeeze(_ctx: &Ctx<'_>, rng: &mut ChaCha8Rng) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &m in &SQUEEZE_ORDERS {
        let (l, r) = squeeze_sides(&spread(rng), &[0.0, 0.0], m);
        let mut sup = l / r;
        for _ in 0..SAMPLES / SQUEEZE_ORDERS.len() {
            let (l, r) = squeeze_sides(&spread(rng), &spread(rng), m);
            sup = wmax(sup, l / r);
        }
        worst = wmax(worst, wmax((sup - 1.0).max(0.0), (1.0 - sup).abs()));
    }
    Ok(worst)
}

/// Ratios `lhs/rhs` at `m = −2` along `ξ_L = ξ_R = (2^k, 0)`.
pub fn failure_ratios() -> Vec<f64> {
    (0..=FAILURE_STEPS)
        .map(|k| {
            let t = 2f64.powi(k);
            let (l, r) = squeeze_sides(&[t, 0.0], &[t, 0.0], FAILURE_ORDER);
            l / r
        })
        .collect()
}

/// First over last ratio of a strictly increasing sequence; infinite if the
/// sequence is not increasing.
pub fn bracket_failure_direction(_ctx: &Ctx<'_>, _rng: &mut ChaCha8Rng) -> Result<f64> {
    let r = failure_ratios();
    if r.windows(2).any(|w| w[1] <= w[0]) {
        return Ok(f64::INFINITY);
    }
    Ok(r[0] / r[r.len() - 1])
}
