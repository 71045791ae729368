use super::{wmax, Ctx};
use crate::error::Result;
use crate::grid::{DoubledSymbol, GridSpec};
use crate::harness::config::balanced_length;
use crate::magnetics::VectorPotential;
use crate::supercalc::{kernel_closed_form, kernel_map, super_wigner_closed_form, ClosedFormRule};
use num_complex::Complex64 as C64;
use rand_chacha::ChaCha8Rng;

const SITES: usize = 15;

/// Phase-space index pairs `(X, Z)` probed on the `n = 15` lattice.
const KERNEL_PROBES: [(usize, usize); 5] = [(112, 112), (100, 120), (97, 130), (112, 90), (80, 140)];

/// Continuum points `(x_L, ξ_L, x_R, ξ_R)` for the super Wigner round trip.
const WIGNER_PROBES: [[f64; 4]; 3] = [[0.0, 0.0, 0.0, 0.0], [0.3, -0.2, 0.1, 0.4], [-0.5, 0.2, 0.4, -0.1]];

/// Smooth, rapidly decaying super symbol with a coupling between sides.
pub fn probe(xl: f64, xil: f64, xr: f64, xir: f64) -> C64 {
    let q = (xl - 0.2).powi(2) + (xil + 0.1).powi(2) + (xr + 0.3).powi(2) + (xir - 0.2).powi(2);
    C64::new((-0.5 * q - 0.1 * xl * xir).exp(), 0.0)
}

fn line() -> Result<crate::weyl::Calculus> {
    let grid = GridSpec::new(1, SITES, balanced_length(SITES))?;
    crate::weyl::Calculus::new(grid, crate::weyl::Params::new(1.0, 1.0)?, VectorPotential::Zero { d: 1 })
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

/// Lattice kernel of the sampled probe against the continuum kernel integral.
pub fn kernel(_ctx: &Ctx<'_>, _rng: &mut ChaCha8Rng) -> Result<f64> {
    let c = line()?;
    let grid = c.grid;
    let n = grid.nphase();
    let mut values = Vec::with_capacity(n * n);
    for a in 0..n {
        let pa = grid.point(a);
        for b in 0..n {
            let pb = grid.point(b);
            values.push(probe(pa.x[0], pa.xi[0], pb.x[0], pb.xi[0]));
        }
    }
    let k = kernel_map(&c, &DoubledSymbol::from_values(grid, values)?)?;
    let mut worst: f64 = 0.0;
    for (a, b) in KERNEL_PROBES {
        let (pa, pb) = (grid.point(a), grid.point(b));
        let exact = kernel_closed_form(&c, &probe, (pa.x[0], pa.xi[0]), (pb.x[0], pb.xi[0]), ClosedFormRule::default())?;
        worst = wmax(worst, rel(k.at(a, b), exact));
    }
    Ok(worst)
}

/// Continuum round trip: kernel integral of the probe, then its super
/// Wigner integral, against the probe itself.
pub fn super_wigner(_ctx: &Ctx<'_>, _rng: &mut ChaCha8Rng) -> Result<f64> {
    let c = line()?;
    let inner = ClosedFormRule { half_width: 6.0, points: 61 };
    let outer = ClosedFormRule { half_width: 24.0, points: 161 };
    let k = |x: f64, xi: f64, z: f64, zeta: f64| kernel_closed_form(&c, &probe, (x, xi), (z, zeta), inner).unwrap_or(C64::new(f64::NAN, 0.0));
    let mut worst: f64 = 0.0;
    for [xl, xil, xr, xir] in WIGNER_PROBES {
        let got = super_wigner_closed_form(&c, &k, (xl, xil), (xr, xir), outer)?;
        worst = wmax(worst, rel(got, probe(xl, xil, xr, xir)));
    }
    Ok(worst)
}
