use super::{random_doubled, random_operator, random_symbol, rel, rel_doubled, rel_sym, wmax, Ctx};
use crate::error::Result;
use crate::grid::{transpose_doubled, DoubledSymbol, GridSpec};
use crate::magnetics::VectorPotential;
use crate::products::{moyal_product, ProductRoute};
use crate::supercalc::{
    commutator_map, integral_apply, kernel_map, liouville_symbol, semi_super_product, super_product, super_quantize, super_wigner, SemiSuperRoute, SuperOperatorMap,
    SuperProductRoute,
};
use crate::weyl::{conjugate_by_unitary, random_unitary, Calculus, CMatrix};
use num_complex::Complex64 as C64;
use rand_chacha::ChaCha8Rng;

/// Sites of the small line used where the spec of a check fixes none.
const SMALL: usize = 5;
/// Sites for the dense composition check.
const DENSE: usize = 9;
const LIOUVILLE_SAMPLES: usize = 5;

const OP: SemiSuperRoute = SemiSuperRoute::Operator;
const SUPEROP: SuperProductRoute = SuperProductRoute::Superop;

fn small(ctx: &Ctx<'_>) -> Result<Calculus> {
    ctx.line(SMALL, ctx.params()?)
}

fn small_unit(ctx: &Ctx<'_>) -> Result<Calculus> {
    ctx.line(SMALL, ctx.unit()?)
}

fn dense_max(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, wmax)
}

fn dense_rel(a: &CMatrix, b: &CMatrix) -> f64 {
    rel(dense_max(&(a - b)), dense_max(b))
}

fn scalar_rel(a: C64, b: C64) -> f64 {
    rel((a - b).norm(), b.norm())
}

pub fn semisuper_routes(ctx: &Ctx<'_>, rng: &mut ChaCha8Rng) -> Result<f64> {
    let c = small_unit(ctx)?;
    let (f, g) = (random_doubled(c.grid, rng), random_symbol(c.grid, rng));
    let a = semi_super_product(&c, &f, &g, OP)?;
    let mut worst: f64 = 0.0;
    for route in [SemiSuperRoute::FourierQuadrature, SemiSuperRoute::DirectQuadrature] {
        worst = wmax(worst, rel_sym(&semi_super_product(&c, &f, &g, route)?, &a));
    }
    Ok(worst)
}

pub fn semisuper_reduction(ctx: &Ctx<'_>, rng: &mut ChaCha8Rng) -> Result<f64> {
    let c = ctx.calculus(ctx.params()?)?;
    let (fl, fr, g) = (random_symbol(c.grid, rng), random_symbol(c.grid, rng), random_symbol(c.grid, rng));
    let got = semi_super_product(&c, &DoubledSymbol::tensor(&fl, &fr)?, &g, OP)?;
    let r = ProductRoute::Operator;
    let expect = moyal_product(&c, &moyal_product(&c, &fl, &g, r)?, &fr, r)?;
    Ok(rel_sym(&got, &expect))
}

pub fn kernel_defining_relation(ctx: &Ctx<'_>, rng: &mut ChaCha8Rng) -> Result<f64> {
    let c = small(ctx)?;
    let (f, g) = (random_doubled(c.grid, rng), random_symbol(c.grid, rng));
    let k = kernel_map(&c, &f)?;
    Ok(rel_sym(&integral_apply(&k, &g)?, &semi_super_product(&c, &f, &g, OP)?))
}

pub fn super_wigner_round_trip(ctx: &Ctx<'_>, rng: &mut ChaCha8Rng) -> Result<f64> {
    let c = small(ctx)?;
    let f = random_doubled(c.grid, rng);
    Ok(rel_doubled(&super_wigner(&c, &kernel_map(&c, &f)?)?, &f))
}

pub fn superproduct_routes(ctx: &Ctx<'_>, rng: &mut ChaCha8Rng) -> Result<f64> {
    let c = small(ctx)?;
    let (f, g) = (random_doubled(c.grid, rng), random_doubled(c.grid, rng));
    let a = super_product(&c, &f, &g, SuperProductRoute::Kernel)?;
    let mut worst: f64 = 0.0;
    for route in [SUPEROP, SuperProductRoute::Quadrature] {
        worst = wmax(worst, rel_doubled(&super_product(&c, &f, &g, route)?, &a));
    }
    Ok(worst)
}

pub fn superproduct_defining_relation(ctx: &Ctx<'_>, rng: &mut ChaCha8Rng) -> Result<f64> {
    let c = ctx.line(DENSE, ctx.params()?)?;
    let (f, g) = (random_doubled(c.grid, rng), random_doubled(c.grid, rng));
    let lhs = super_quantize(&c, &super_product(&c, &f, &g, SUPEROP)?)?.dense()?;
    let rhs = super_quantize(&c, &f)?.compose(&super_quantize(&c, &g)?)?.dense()?;
    Ok(dense_rel(&lhs, &rhs))
}

pub fn superproduct_reversed_order(ctx: &Ctx<'_>, rng: &mut ChaCha8Rng) -> Result<f64> {
    let c = small(ctx)?;
    let s = |rng: &mut ChaCha8Rng| random_symbol(c.grid, rng);
    let (fl, fr, gl, gr) = (s(rng), s(rng), s(rng), s(rng));
    let p = super_product(&c, &DoubledSymbol::tensor(&fl, &fr)?, &DoubledSymbol::tensor(&gl, &gr)?, SUPEROP)?;
    let r = ProductRoute::Operator;
    let expect = DoubledSymbol::tensor(&moyal_product(&c, &fl, &gl, r)?, &moyal_product(&c, &gr, &fr, r)?)?;
    Ok(rel_doubled(&p, &expect))
}

pub fn trace_identity(ctx: &Ctx<'_>, rng: &mut ChaCha8Rng) -> Result<f64> {
    let c = small_unit(ctx)?;
    let (f, g) = (random_doubled(c.grid, rng), random_doubled(c.grid, rng));
    let fg = super_product(&c, &f, &g, SUPEROP)?;
    Ok(scalar_rel(fg.integral(), f.mul(&g).integral()))
}

pub fn duality(ctx: &Ctx<'_>, rng: &mut ChaCha8Rng) -> Result<f64> {
    let c = small_unit(ctx)?;
    let (f, g, h) = (random_doubled(c.grid, rng), random_doubled(c.grid, rng), random_doubled(c.grid, rng));
    let a = super_product(&c, &f, &g, SUPEROP)?.pair(&h);
    let b = f.pair(&super_product(&c, &g, &h, SUPEROP)?);
    let d = super_product(&c, &h, &f, SUPEROP)?.pair(&g);
    // the semi-super product moves to the transposed symbol
    let (gg, hh) = (random_symbol(c.grid, rng), random_symbol(c.grid, rng));
    let lhs = semi_super_product(&c, &f, &gg, OP)?.pair(&hh);
    let rhs = gg.pair(&semi_super_product(&c, &transpose_doubled(&f), &hh, OP)?);
    Ok(wmax(wmax(scalar_rel(b, a), scalar_rel(d, a)), scalar_rel(rhs, lhs)))
}

pub fn liouville_correspondence(ctx: &Ctx<'_>, rng: &mut ChaCha8Rng) -> Result<f64> {
    let c = ctx.calculus(ctx.params()?)?;
    let mut hs: Vec<_> = (0..LIOUVILLE_SAMPLES).map(|_| random_symbol(c.grid, rng)).collect();
    hs.extend(ctx.liouville_generators(c.grid));
    let mut worst: f64 = 0.0;
    for h in &hs {
        let lhs = super_quantize(&c, &liouville_symbol(h))?.dense()?;
        let rhs = commutator_map(&c, h)?.dense()?;
        worst = wmax(worst, dense_rel(&lhs, &rhs));
    }
    Ok(worst)
}

pub fn hs_adjoint(ctx: &Ctx<'_>, rng: &mut ChaCha8Rng) -> Result<f64> {
    let c = small_unit(ctx)?;
    let f = random_doubled(c.grid, rng);
    let s = super_quantize(&c, &f)?;
    let sc = super_quantize(&c, &f.conj())?;
    let maps = dense_rel(&s.hs_adjoint()?.dense()?, &sc.dense()?);
    let (g, h) = (random_operator(&c, rng)?, random_operator(&c, rng)?);
    let inner = scalar_rel(s.apply(&g)?.hs_inner(&h), g.hs_inner(&sc.apply(&h)?));
    Ok(wmax(maps, inner))
}

/// Symmetric-gauge calculus on a 3-site plane.
fn plane(ctx: &Ctx<'_>) -> Result<Calculus> {
    ctx.calculus_on(GridSpec::new(2, 3, 5.0)?, ctx.params()?, VectorPotential::Symmetric { b: 0.6 })
}

pub fn gauge_independence(ctx: &Ctx<'_>, rng: &mut ChaCha8Rng) -> Result<f64> {
    let c = plane(ctx)?;
    let (f, g, gg) = (random_doubled(c.grid, rng), random_symbol(c.grid, rng), random_doubled(c.grid, rng));
    let semi = semi_super_product(&c, &f, &g, OP)?;
    let full = super_product(&c, &f, &gg, SUPEROP)?;
    let mut worst: f64 = 0.0;
    for chi in ctx.gauges(2, 2, rng) {
        let s = c.gauge_shifted(&chi)?;
        worst = wmax(worst, rel_sym(&semi_super_product(&s, &f, &g, OP)?, &semi));
        worst = wmax(worst, rel_doubled(&super_product(&s, &f, &gg, SUPEROP)?, &full));
    }
    Ok(worst)
}

pub fn representation_independence(ctx: &Ctx<'_>, rng: &mut ChaCha8Rng) -> Result<f64> {
    let c = plane(ctx)?;
    let (f, g, gg) = (random_doubled(c.grid, rng), random_symbol(c.grid, rng), random_doubled(c.grid, rng));
    let u = random_unitary(c.grid, rng);
    let (sf, sg) = (super_quantize(&c, &f)?, super_quantize(&c, &gg)?);
    // semi-super: act in the rotated frame and rotate back
    let semi = semi_super_product(&c, &f, &g, OP)?;
    let gu = conjugate_by_unitary(&c.quantize(&g)?, &u)?;
    let rotated = conjugate_by_unitary(&sf.apply(&conjugate_by_unitary(&gu, &u.adjoint())?)?, &u)?;
    let semi_back = c.wigner(&conjugate_by_unitary(&rotated, &u.adjoint())?)?;
    // super: Ad_U ∘ Op(F) ∘ Ad_U⁻¹ composed with the same for G, pulled back
    let ad = SuperOperatorMap::sandwich(&c, vec![(u.mat.clone(), u.mat.adjoint())]);
    let ad_inv = SuperOperatorMap::sandwich(&c, vec![(u.mat.adjoint(), u.mat.clone())]);
    let rf = ad.compose(&sf)?.compose(&ad_inv)?;
    let rg = ad.compose(&sg)?.compose(&ad_inv)?;
    let pulled = ad_inv.compose(&rf.compose(&rg)?)?.compose(&ad)?;
    let full = super_product(&c, &f, &gg, SUPEROP)?;
    let full_back = crate::supercalc::dequantize(&c, &pulled)?;
    Ok(wmax(rel_sym(&semi_back, &semi), rel_doubled(&full_back, &full)))
}
