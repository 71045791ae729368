use super::{wmax, Ctx};
use crate::error::Result;
use crate::magnetics::{
    fd_gradient, flux_factor_growth, flux_gradient_coefficients, quadrangle_factor_growth, reconstruct_gradient, reflected_dz, FluxArg, GrowthFit, MagneticField, Poly, Term,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const POINTS: usize = 10;
const FLUX_SAMPLES: usize = 60;
const QUADRANGLE_SAMPLES: usize = 30;

/// Bounded test fields in `d = 2`: constant, and a polynomial under a Gaussian window.
pub fn fields() -> [MagneticField; 2] {
    let p = Poly {
        terms: vec![
            Term { coef: 0.7, pow: vec![0, 0] },
            Term { coef: 0.3, pow: vec![1, 0] },
            Term { coef: -0.2, pow: vec![0, 1] },
            Term { coef: 0.1, pow: vec![1, 1] },
            Term { coef: 0.05, pow: vec![0, 2] },
        ],
    };
    [MagneticField::constant_2d(1.3), MagneticField::from_b12(p, Some(2.0))]
}

#[derive(Clone, Copy)]
enum Variant {
    Displayed,
    Reflected,
}

fn gradient(ctx: &Ctx<'_>, rng: &mut ChaCha8Rng, arg: FluxArg, variant: Variant) -> Result<f64> {
    let eps = ctx.cfg.eps;
    let mut worst: f64 = 0.0;
    for b in fields() {
        for _ in 0..POINTS {
            let mut v = || -> Vec<f64> { (0..2).map(|_| rng.random_range(-1.0..1.0)).collect() };
            let (x, y, z) = (v(), v(), v());
            let mut c = flux_gradient_coefficients(&b, &x, &y, &z, eps)?;
            if let Variant::Reflected = variant {
                c.dz = reflected_dz(&b, &x, &y, &z, eps)?;
            }
            let r = reconstruct_gradient(&c, arg, &y, &z, eps);
            let f = fd_gradient(&b, &x, &y, &z, eps, arg);
            worst = r.iter().zip(&f).map(|(a, b)| (a - b).abs()).fold(worst, wmax);
        }
    }
    Ok(worst)
}

pub fn gradient_x(ctx: &Ctx<'_>, rng: &mut ChaCha8Rng) -> Result<f64> {
    gradient(ctx, rng, FluxArg::X, Variant::Displayed)
}

pub fn gradient_y(ctx: &Ctx<'_>, rng: &mut ChaCha8Rng) -> Result<f64> {
    gradient(ctx, rng, FluxArg::Y, Variant::Displayed)
}

pub fn gradient_z_displayed(ctx: &Ctx<'_>, rng: &mut ChaCha8Rng) -> Result<f64> {
    gradient(ctx, rng, FluxArg::Z, Variant::Displayed)
}

pub fn gradient_z_reflected(ctx: &Ctx<'_>, rng: &mut ChaCha8Rng) -> Result<f64> {
    gradient(ctx, rng, FluxArg::Z, Variant::Reflected)
}

fn largest(fits: &[GrowthFit]) -> f64 {
    fits.iter().map(|f| f.constant).fold(0.0, wmax)
}

/// Largest fitted growth constant over the patterns of total order at most two.
pub fn flux_growth(ctx: &Ctx<'_>, rng: &mut ChaCha8Rng) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for b in fields() {
        worst = wmax(worst, largest(&flux_factor_growth(&b, ctx.cfg.eps, ctx.cfg.lambda, FLUX_SAMPLES, rng)?));
    }
    Ok(worst)
}

pub fn quadrangle_growth(ctx: &Ctx<'_>, rng: &mut ChaCha8Rng) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for b in fields() {
        worst = wmax(worst, largest(&quadrangle_factor_growth(&b, ctx.cfg.eps, ctx.cfg.lambda, QUADRANGLE_SAMPLES, rng)?));
    }
    Ok(worst)
}
