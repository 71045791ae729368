//! The magnetic Weyl product, the magnetic Poisson bracket and the
//! first-order semiclassical defect.
//!
//! The quadrature route evaluates the twisted double sum over reduced
//! lattice points `Y, Z`. Their sum `Y + Z` may leave the fundamental cell;
//! on the lattice `w(Y + Z) = κ(Y + Z) w(red(Y + Z))`, so each term carries
//! the character `κ`. Without it the sum would describe a different product.

use crate::error::{Error, Result};
use crate::grid::{sfourier, spectral_derivative, PhaseSymbol};
use crate::lattice::{index, isigma, kappa, pos_index, sites};
use crate::magnetics::gamma;
use crate::weyl::Calculus;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Largest number of complex multiply-adds a quadrature route may spend.
pub const QUADRATURE_LIMIT: f64 = 5e8;

/// Evaluation route for the Weyl product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProductRoute {
    Operator,
    Quadrature,
}

impl FromStr for ProductRoute {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "operator" => Ok(Self::Operator),
            "quadrature" => Ok(Self::Quadrature),
            other => Err(Error::Parameter(format!("unknown product route '{other}'"))),
        }
    }
}

impl fmt::Display for ProductRoute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Operator => "operator",
            Self::Quadrature => "quadrature",
        })
    }
}

pub(crate) fn refuse_if_costly(route: &str, estimate: f64) -> Result<()> {
    if estimate > QUADRATURE_LIMIT {
        Err(Error::CostRefused { route: route.into(), estimate, limit: QUADRATURE_LIMIT })
    } else {
        Ok(())
    }
}

/// `f ⋆ᴮ g` by the chosen route.
pub fn moyal_product(calc: &Calculus, f: &PhaseSymbol, g: &PhaseSymbol, route: ProductRoute) -> Result<PhaseSymbol> {
    calc.grid.same(&f.grid)?;
    calc.grid.same(&g.grid)?;
    match route {
        ProductRoute::Operator => {
            let p = calc.quantize(f)?.mul(&calc.quantize(g)?)?;
            calc.wigner(&p)
        }
        ProductRoute::Quadrature => quadrature_product(calc, f, g),
    }
}

/// Constant part of `B` in the form needed by `γ = (ε/2) Σ B_jk y_j z_k`;
/// `None` when the field varies in space.
pub(crate) fn constant_field(calc: &Calculus) -> Option<Vec<f64>> {
    if calc.grid.d == 1 {
        return Some(vec![0.0]);
    }
    calc.field.constant_matrix()
}

pub(crate) fn const_gamma(b: &[f64], d: usize, y: [i64; 2], z: [i64; 2], dx: f64, eps: f64) -> f64 {
    let mut s = 0.0;
    for j in 0..d {
        for k in 0..d {
            s += b[j * d + k] * y[j] as f64 * z[k] as f64;
        }
    }
    0.5 * eps * s * dx * dx
}

/// `γ(εx_p, y_q, z_r)` for all position index triples.
pub(crate) fn gamma_table(calc: &Calculus) -> Vec<f64> {
    let grid = &calc.grid;
    let np = grid.npos();
    let eps = calc.eps();
    let pos: Vec<Vec<f64>> = (0..np).map(|p| grid.pos_sites(p).iter().map(|&k| k as f64 * grid.dx()).collect()).collect();
    let mut t = vec![0.0; np * np * np];
    for p in 0..np {
        let base: Vec<f64> = pos[p].iter().map(|v| eps * v).collect();
        for q in 0..np {
            for r in 0..np {
                t[(p * np + q) * np + r] = gamma(&calc.field, &base, &pos[q], &pos[r], eps);
            }
        }
    }
    t
}

fn quadrature_product(calc: &Calculus, f: &PhaseSymbol, g: &PhaseSymbol) -> Result<PhaseSymbol> {
    let grid = calc.grid;
    let nn = grid.nphase();
    let (eps, lam) = (calc.eps(), calc.lambda());
    let c = grid.cell();
    let fh = sfourier(f);
    let gh = sfourier(g);
    let st = sites(&grid);
    let norm = (grid.n as f64).powi(-(grid.d as i32));
    if let Some(b) = constant_field(calc) {
        refuse_if_costly("moyal quadrature", (nn as f64).powi(2))?;
        // the twist does not depend on x, so fold onto W = red(Y + Z) first
        let mut h = vec![C64::new(0.0, 0.0); nn];
        for (yi, &ys) in st.iter().enumerate() {
            let fy = fh.values[yi];
            if fy == C64::new(0.0, 0.0) {
                continue;
            }
            for (zi, &zs) in st.iter().enumerate() {
                let w = ys.add(zs);
                let ph = 0.5 * eps * c * isigma(ys, zs) as f64 - lam * const_gamma(&b, grid.d, ys.j, zs.j, grid.dx(), eps);
                h[index(&grid, w)] += fy * gh.values[zi] * C64::from_polar(kappa(&grid, w), ph);
            }
        }
        let out = sfourier(&PhaseSymbol { grid, values: h });
        return Ok(out.scale(C64::new(norm, 0.0)));
    }
    refuse_if_costly("moyal quadrature", (nn as f64).powi(3))?;
    let gt = gamma_table(calc);
    let np = grid.npos();
    let mut out = vec![C64::new(0.0, 0.0); nn];
    for (xi, &xs) in st.iter().enumerate() {
        let px = pos_index(&grid, xs.j);
        let mut acc = C64::new(0.0, 0.0);
        for (yi, &ys) in st.iter().enumerate() {
            let py = pos_index(&grid, ys.j);
            for (zi, &zs) in st.iter().enumerate() {
                let w = ys.add(zs);
                let pz = pos_index(&grid, zs.j);
                let ph = c * isigma(xs, w) as f64 + 0.5 * eps * c * isigma(ys, zs) as f64 - lam * gt[(px * np + py) * np + pz];
                acc += fh.values[yi] * gh.values[zi] * C64::from_polar(kappa(&grid, w), ph);
            }
        }
        out[xi] = acc * norm * norm;
    }
    Ok(PhaseSymbol { grid, values: out })
}

/// `{f, g}_B = ∇_ξ f·∇_x g − ∇_x f·∇_ξ g − λ Σ B_jk(εx) ∂_{ξ_j} f ∂_{ξ_k} g`,
/// with spectral derivatives.
pub fn magnetic_poisson(calc: &Calculus, f: &PhaseSymbol, g: &PhaseSymbol) -> Result<PhaseSymbol> {
    calc.grid.same(&f.grid)?;
    calc.grid.same(&g.grid)?;
    let grid = calc.grid;
    let d = grid.d;
    let dxf: Vec<PhaseSymbol> = (0..d).map(|a| spectral_derivative(f, a)).collect();
    let dxg: Vec<PhaseSymbol> = (0..d).map(|a| spectral_derivative(g, a)).collect();
    let dpf: Vec<PhaseSymbol> = (0..d).map(|a| spectral_derivative(f, d + a)).collect();
    let dpg: Vec<PhaseSymbol> = (0..d).map(|a| spectral_derivative(g, d + a)).collect();
    let mut out = PhaseSymbol::zeros(grid);
    for a in 0..d {
        out = out.add(&dpf[a].mul(&dxg[a])).sub(&dxf[a].mul(&dpg[a]));
    }
    if d > 1 && calc.lambda() != 0.0 && !calc.field.is_zero() {
        let eps = calc.eps();
        for i in 0..grid.nphase() {
            let x: Vec<f64> = grid.point(i).x.iter().map(|v| eps * v).collect();
            let bm = calc.field.eval(&x);
            let mut s = C64::new(0.0, 0.0);
            for j in 0..d {
                for k in 0..d {
                    s += bm[j * d + k] * dpf[j].values[i] * dpg[k].values[i];
                }
            }
            out.values[i] -= s * calc.lambda();
        }
    }
    Ok(out)
}

/// `max |f ⋆ᴮ g − (f g − ε(i/2){f, g}_B)|`.
pub fn semiclassical_defect(calc: &Calculus, f: &PhaseSymbol, g: &PhaseSymbol, route: ProductRoute) -> Result<f64> {
    let star = moyal_product(calc, f, g, route)?;
    let pb = magnetic_poisson(calc, f, g)?;
    let first = f.mul(g).sub(&pb.scale(C64::new(0.0, 0.5 * calc.eps())));
    Ok(star.max_abs_diff(&first))
}

/// Richardson ratios `defect(ε)/defect(ε/2)` over a halving sweep.
pub fn richardson_ratios(defects: &[f64]) -> Vec<f64> {
    defects.windows(2).map(|w| w[0] / w[1]).collect()
}

/// Wrap-safe Gaussian `exp(−|x−x₀|²/(2w²) − |ξ−ξ₀|²/(2w²))`.
pub fn gaussian_symbol(grid: crate::grid::GridSpec, center: &[f64], momentum: &[f64], width: f64) -> PhaseSymbol {
    PhaseSymbol::from_fn(grid, |x, xi| {
        let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
            + xi.iter().zip(momentum).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        C64::new((-r2 / (2.0 * width * width)).exp(), 0.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridSpec, LatticePoint};
    use crate::magnetics::{GaugeFunction, MagneticField, Poly, VectorPotential};
    use crate::weyl::{conjugate_by_unitary, random_unitary, Params};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symbol(grid: GridSpec, rng: &mut impl Rng) -> PhaseSymbol {
        PhaseSymbol { grid, values: (0..grid.nphase()).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect() }
    }

    fn calc1(n: usize) -> Calculus {
        let grid = GridSpec::new(1, n, 12.0).unwrap();
        Calculus::new(grid, Params::new(1.0, 1.0).unwrap(), VectorPotential::Landau { d: 1, b: 0.5 }).unwrap()
    }

    fn calc2(n: usize) -> Calculus {
        let grid = GridSpec::new(2, n, 6.0).unwrap();
        Calculus::new(grid, Params::new(1.0, 0.6).unwrap(), VectorPotential::Symmetric { b: 0.9 }).unwrap()
    }

    #[test]
    fn routes_agree_in_one_dimension() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [5, 7] {
            let c = calc1(n);
            let f = random_symbol(c.grid, &mut rng);
            let g = random_symbol(c.grid, &mut rng);
            let a = moyal_product(&c, &f, &g, ProductRoute::Operator).unwrap();
            let b = moyal_product(&c, &f, &g, ProductRoute::Quadrature).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-10, "{}", a.max_abs_diff(&b));
        }
    }

    #[test]
    fn literal_sum_equals_fold_for_constant_field() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let grid = GridSpec::new(2, 3, 5.0).unwrap();
        let b = MagneticField::constant_2d(0.8);
        let c = Calculus::from_field(grid, Params::new(0.9, 0.7).unwrap(), b.clone()).unwrap();
        let f = random_symbol(grid, &mut rng);
        let g = random_symbol(grid, &mut rng);
        let fold = moyal_product(&c, &f, &g, ProductRoute::Quadrature).unwrap();
        // a window wide enough to be flat on the grid forces the literal path
        let lit_field = MagneticField::from_b12(Poly::constant(0.8, 2), Some(1e12));
        let c2 = Calculus::from_field(grid, c.params, lit_field).unwrap();
        let lit = moyal_product(&c2, &f, &g, ProductRoute::Quadrature).unwrap();
        assert!(fold.max_abs_diff(&lit) < 1e-11);
    }

    #[test]
    fn identity_is_neutral() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = calc2(3);
        let one = PhaseSymbol::constant(c.grid, C64::new(1.0, 0.0));
        let g = random_symbol(c.grid, &mut rng);
        for route in [ProductRoute::Operator, ProductRoute::Quadrature] {
            assert!(moyal_product(&c, &one, &g, route).unwrap().max_abs_diff(&g) < 1e-10);
        }
    }

    #[test]
    fn plane_waves_compose_with_twist() {
        let c = calc1(7);
        let y = LatticePoint { j: vec![2], l: vec![-3] };
        let z = LatticePoint { j: vec![-1], l: vec![1] };
        let py = PhaseSymbol::plane_wave(c.grid, &y);
        let pz = PhaseSymbol::plane_wave(c.grid, &z);
        let prod = moyal_product(&c, &py, &pz, ProductRoute::Operator).unwrap();
        let twist = C64::from_polar(1.0, 0.5 * c.grid.cell() * y.isigma(&z) as f64);
        let expect = PhaseSymbol::plane_wave(c.grid, &y.add(&z)).scale(twist);
        assert!(prod.max_abs_diff(&expect) < 1e-10);
    }

    #[test]
    fn associativity_and_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let c = calc2(3);
        let (f, g, h) = (random_symbol(c.grid, &mut rng), random_symbol(c.grid, &mut rng), random_symbol(c.grid, &mut rng));
        let r = ProductRoute::Operator;
        let l = moyal_product(&c, &moyal_product(&c, &f, &g, r).unwrap(), &h, r).unwrap();
        let rr = moyal_product(&c, &f, &moyal_product(&c, &g, &h, r).unwrap(), r).unwrap();
        assert!(l.max_abs_diff(&rr) < 1e-9);
        let a = moyal_product(&c, &f, &g, r).unwrap().conj();
        let b = moyal_product(&c, &g.conj(), &f.conj(), r).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-9);
    }

    #[test]
    fn gauge_and_representation_independence() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = calc2(3);
        let f = random_symbol(c.grid, &mut rng);
        let g = random_symbol(c.grid, &mut rng);
        let base = moyal_product(&c, &f, &g, ProductRoute::Operator).unwrap();
        let chi = GaugeFunction { chi: Poly::random(2, 3, 0.4, &mut rng) };
        let shifted = moyal_product(&c.gauge_shifted(&chi).unwrap(), &f, &g, ProductRoute::Operator).unwrap();
        assert!(base.max_abs_diff(&shifted) < 1e-9);
        let u = random_unitary(c.grid, &mut rng);
        let fu = conjugate_by_unitary(&c.quantize(&f).unwrap(), &u).unwrap();
        let gu = conjugate_by_unitary(&c.quantize(&g).unwrap(), &u).unwrap();
        let back = conjugate_by_unitary(&fu.mul(&gu).unwrap(), &u.adjoint()).unwrap();
        assert!(c.wigner(&back).unwrap().max_abs_diff(&base) < 1e-9);
    }

    #[test]
    fn poisson_bracket_properties() {
        let grid = GridSpec::new(2, 15, 14.0).unwrap();
        let c = Calculus::from_field(grid, Params::new(0.5, 0.8).unwrap(), MagneticField::constant_2d(0.7)).unwrap();
        let f = gaussian_symbol(grid, &[0.3, -0.2], &[0.1, 0.4], 1.3);
        let g = gaussian_symbol(grid, &[-0.4, 0.1], &[0.2, -0.3], 1.1);
        assert!(magnetic_poisson(&c, &f, &f).unwrap().max_abs() < 1e-11);
        let a = magnetic_poisson(&c, &f, &g).unwrap();
        let b = magnetic_poisson(&c, &g, &f).unwrap();
        assert!(a.add(&b).max_abs() < 1e-11);
    }

    #[test]
    fn canonical_bracket_against_finite_differences() {
        let grid = GridSpec::new(1, 41, 16.0).unwrap();
        let c = Calculus::from_field(grid, Params::default(), MagneticField::zero(1)).unwrap();
        let ff = |x: f64, p: f64| (-(x - 0.3).powi(2) / 2.0 - (p - 0.2).powi(2) / 2.0 - 0.2 * x * p).exp();
        let gg = |x: f64, p: f64| (-(x + 0.4).powi(2) / 3.0 - (p + 0.3).powi(2) / 2.0).exp();
        let f = PhaseSymbol::from_fn(grid, |x, p| C64::new(ff(x[0], p[0]), 0.0));
        let g = PhaseSymbol::from_fn(grid, |x, p| C64::new(gg(x[0], p[0]), 0.0));
        let pb = magnetic_poisson(&c, &f, &g).unwrap();
        let h = 1e-5;
        for i in (0..grid.nphase()).step_by(37) {
            let pt = grid.point(i);
            let (x, p) = (pt.x[0], pt.xi[0]);
            let d = |fun: &dyn Fn(f64, f64) -> f64, ax: usize| {
                if ax == 0 {
                    (fun(x + h, p) - fun(x - h, p)) / (2.0 * h)
                } else {
                    (fun(x, p + h) - fun(x, p - h)) / (2.0 * h)
                }
            };
            let fd = d(&ff, 1) * d(&gg, 0) - d(&ff, 0) * d(&gg, 1);
            assert!((pb.values[i].re - fd).abs() < 1e-6);
        }
    }

    #[test]
    fn defect_vanishes_for_constants() {
        let grid = GridSpec::new(1, 15, 12.0).unwrap();
        let c = Calculus::from_field(grid, Params::new(0.3, 1.0).unwrap(), MagneticField::zero(1)).unwrap();
        let one = PhaseSymbol::constant(grid, C64::new(2.0, 0.0));
        let g = gaussian_symbol(grid, &[0.2], &[0.1], 1.2);
        assert!(semiclassical_defect(&c, &one, &g, ProductRoute::Quadrature).unwrap() < 1e-9);
    }

    #[test]
    fn quadrature_refused_when_expensive() {
        let grid = GridSpec::new(2, 7, 6.0).unwrap();
        let p = Poly { terms: vec![crate::magnetics::Term { coef: 0.3, pow: vec![1, 0] }] };
        let c = Calculus::from_field(grid, Params::default(), MagneticField::from_b12(p, Some(2.0))).unwrap();
        let f = PhaseSymbol::zeros(grid);
        assert!(matches!(moyal_product(&c, &f, &f, ProductRoute::Quadrature), Err(Error::CostRefused { .. })));
    }
}
