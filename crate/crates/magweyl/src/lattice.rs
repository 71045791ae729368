//! Integer bookkeeping shared by the quadrature routes.

use crate::grid::GridSpec;

/// Integer coordinates `(j, l)` of a phase site; only the first `d` slots are used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Site {
    pub j: [i64; 2],
    pub l: [i64; 2],
}

impl Site {
    pub fn add(self, o: Site) -> Site {
        Site { j: [self.j[0] + o.j[0], self.j[1] + o.j[1]], l: [self.l[0] + o.l[0], self.l[1] + o.l[1]] }
    }
}

/// Coordinates of every phase index in storage order.
pub(crate) fn sites(grid: &GridSpec) -> Vec<Site> {
    (0..grid.nphase())
        .map(|i| {
            let (k, m) = grid.phase_sites(i);
            let mut s = Site { j: [0; 2], l: [0; 2] };
            s.j[..grid.d].copy_from_slice(&k[..grid.d]);
            s.l[..grid.d].copy_from_slice(&m[..grid.d]);
            s
        })
        .collect()
}

/// `l_a·j_b − j_a·l_b`.
pub(crate) fn isigma(a: Site, b: Site) -> i64 {
    a.l[0] * b.j[0] + a.l[1] * b.j[1] - a.j[0] * b.l[0] - a.j[1] * b.l[1]
}

/// Phase index of the reduced representative.
pub(crate) fn index(grid: &GridSpec, s: Site) -> usize {
    let n = grid.n as i64;
    let h = grid.half();
    let np = grid.npos();
    let mut p = 0usize;
    let mut q = 0usize;
    for a in 0..grid.d {
        p = p * grid.n + (s.j[a] + h).rem_euclid(n) as usize;
        q = q * grid.n + (s.l[a] + h).rem_euclid(n) as usize;
    }
    p * np + q
}

/// Position index of the reduced position part.
pub(crate) fn pos_index(grid: &GridSpec, j: [i64; 2]) -> usize {
    let n = grid.n as i64;
    let h = grid.half();
    let mut p = 0usize;
    for a in j.iter().take(grid.d) {
        p = p * grid.n + (a + h).rem_euclid(n) as usize;
    }
    p
}

/// Lattice character `κ`; see [`crate::weyl::lattice_character`].
pub(crate) fn kappa(grid: &GridSpec, s: Site) -> f64 {
    let n = grid.n as i64;
    let h = grid.half();
    let mut parity = 0i64;
    for a in 0..grid.d {
        let ca = (s.j[a] + h).div_euclid(n);
        let cb = (s.l[a] + h).div_euclid(n);
        parity += cb * (s.j[a] - ca * n) + ca * (s.l[a] - cb * n) + ca * cb;
    }
    if parity.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}
