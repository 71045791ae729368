//! Hörmander seminorms on the lattice.
//!
//! Derivatives are repeated second-order periodic central differences with the
//! grid-native step of each axis (`Δx` for positions, `Δξ` for momenta).

use crate::error::{Error, Result};
use crate::grid::{japanese_bracket, DoubledSymbol, GridSpec, PhaseSymbol};
use crate::harness::checks::wmax;
use num_complex::Complex64 as C64;
use std::collections::HashMap;

/// Largest derivative order the finite-difference seminorms accept.
pub const MAX_ORDER: usize = 4;

fn check_args(rho: f64, delta: f64, order: usize) -> Result<()> {
    if order > MAX_ORDER {
        return Err(Error::Parameter(format!("seminorm order {order} exceeds {MAX_ORDER}")));
    }
    if !(rho.is_finite() && delta.is_finite()) || delta > rho {
        return Err(Error::Parameter(format!("need finite delta <= rho (got rho = {rho}, delta = {delta})")));
    }
    Ok(())
}

/// `next[axis][i]`, `prev[axis][i]`: periodic neighbours of phase index `i`
/// along `axis` (`0..d` positions, `d..2d` momenta).
struct Neighbours {
    next: Vec<Vec<usize>>,
    prev: Vec<Vec<usize>>,
    step: Vec<f64>,
}

impl Neighbours {
    fn new(grid: &GridSpec) -> Self {
        let d = grid.d;
        let nn = grid.nphase();
        let mut next = vec![vec![0; nn]; 2 * d];
        let mut prev = vec![vec![0; nn]; 2 * d];
        for i in 0..nn {
            let (k, m) = grid.phase_sites(i);
            for axis in 0..2 * d {
                for (table, s) in [(&mut next, 1), (&mut prev, -1)] {
                    let (mut kk, mut mm) = (k.clone(), m.clone());
                    if axis < d {
                        kk[axis] = grid.reduce(kk[axis] + s);
                    } else {
                        mm[axis - d] = grid.reduce(mm[axis - d] + s);
                    }
                    table[axis][i] = grid.phase_index(&kk, &mm);
                }
            }
        }
        let step = (0..2 * d).map(|a| if a < d { grid.dx() } else { grid.dxi() }).collect();
        Self { next, prev, step }
    }
}

/// Multi-indices over `axes` axes with total order at most `order`.
fn multi_indices(axes: usize, order: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![0; axes]];
    let mut frontier = out.clone();
    for _ in 0..order {
        let mut grown = Vec::new();
        for a in &frontier {
            // extend only at or after the last nonzero axis so each index appears once
            let start = a.iter().rposition(|&v| v > 0).unwrap_or(0);
            for ax in start..axes {
                let mut b = a.clone();
                b[ax] += 1;
                grown.push(b);
            }
        }
        out.extend(grown.iter().cloned());
        frontier = grown;
    }
    out
}

/// Every derivative `∂^idx v` for `|idx| ≤ order`; `shift(axis, i, forward)` is
/// the periodic neighbour of entry `i` and `step(axis)` its spacing.
fn derivatives(v: &[C64], axes: usize, order: usize, shift: &dyn Fn(usize, usize, bool) -> usize, step: &dyn Fn(usize) -> f64) -> HashMap<Vec<usize>, Vec<C64>> {
    let mut table: HashMap<Vec<usize>, Vec<C64>> = HashMap::new();
    table.insert(vec![0; axes], v.to_vec());
    for idx in multi_indices(axes, order).into_iter().skip(1) {
        let ax = idx.iter().rposition(|&c| c > 0).expect("nonzero index");
        let mut parent = idx.clone();
        parent[ax] -= 1;
        let base = &table[&parent];
        let h = step(ax);
        let d: Vec<C64> = (0..base.len()).map(|i| (base[shift(ax, i, true)] - base[shift(ax, i, false)]) / (2.0 * h)).collect();
        table.insert(idx, d);
    }
    table
}

/// `p^m_N(f) = max_{|a|+|α|≤N} sup ⟨ξ⟩^{−m−|a|δ+|α|ρ} |∂_x^a ∂_ξ^α f|`.
pub fn hoermander_seminorm(f: &PhaseSymbol, m: f64, rho: f64, delta: f64, order: usize) -> Result<f64> {
    check_args(rho, delta, order)?;
    let grid = f.grid;
    let d = grid.d;
    let nb = Neighbours::new(&grid);
    let shift = |ax: usize, i: usize, fwd: bool| if fwd { nb.next[ax][i] } else { nb.prev[ax][i] };
    let step = |ax: usize| nb.step[ax];
    let table = derivatives(&f.values, 2 * d, order, &shift, &step);
    let brackets: Vec<f64> = (0..grid.nphase()).map(|i| japanese_bracket(&grid.point(i).xi)).collect();
    let mut best: f64 = 0.0;
    for (idx, vals) in &table {
        let a: usize = idx[..d].iter().sum();
        let alpha: usize = idx[d..].iter().sum();
        let power = -m - a as f64 * delta + alpha as f64 * rho;
        for (v, b) in vals.iter().zip(&brackets) {
            best = wmax(best, b.powf(power) * v.norm());
        }
    }
    Ok(best)
}

/// `q^{mL,mR}_N(F)`: as [`hoermander_seminorm`] on doubled phase space with the
/// weight `⟨ξ_L⟩^{−mL−|a_L|δ+|α_L|ρ} ⟨ξ_R⟩^{−mR−|a_R|δ+|α_R|ρ}`.
pub fn super_seminorm(f: &DoubledSymbol, ml: f64, mr: f64, rho: f64, delta: f64, order: usize) -> Result<f64> {
    check_args(rho, delta, order)?;
    let grid = f.grid;
    let d = grid.d;
    let nn = grid.nphase();
    let nb = Neighbours::new(&grid);
    // axes 0..2d act on X_L, 2d..4d on X_R
    let shift = |ax: usize, i: usize, fwd: bool| {
        let (xl, xr) = (i / nn, i % nn);
        let t = if fwd { &nb.next } else { &nb.prev };
        if ax < 2 * d {
            t[ax][xl] * nn + xr
        } else {
            xl * nn + t[ax - 2 * d][xr]
        }
    };
    let step = |ax: usize| nb.step[ax % (2 * d)];
    let table = derivatives(&f.values, 4 * d, order, &shift, &step);
    let brackets: Vec<f64> = (0..nn).map(|i| japanese_bracket(&grid.point(i).xi)).collect();
    let mut best: f64 = 0.0;
    for (idx, vals) in &table {
        let ord = |r: std::ops::Range<usize>| idx[r].iter().sum::<usize>() as f64;
        let pl = -ml - ord(0..d) * delta + ord(d..2 * d) * rho;
        let pr = -mr - ord(2 * d..3 * d) * delta + ord(3 * d..4 * d) * rho;
        for (i, v) in vals.iter().enumerate() {
            let w = brackets[i / nn].powf(pl) * brackets[i % nn].powf(pr);
            best = wmax(best, w * v.norm());
        }
    }
    Ok(best)
}
