//! Gauss–Legendre rules from the Golub–Welsch eigenproblem.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};

/// Nodes and weights on `[-1, 1]`, nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Result<Self> {
        if order < 1 {
            return Err(Error::Parameter("quadrature order must be at least 1".into()));
        }
        // Jacobi matrix of the Legendre recurrence: off-diagonal k / sqrt(4k² − 1)
        let mut jac = DMatrix::<f64>::zeros(order, order);
        for k in 1..order {
            let b = k as f64 / ((4 * k * k - 1) as f64).sqrt();
            jac[(k, k - 1)] = b;
            jac[(k - 1, k)] = b;
        }
        let eig = SymmetricEigen::new(jac);
        let mut pairs: Vec<(f64, f64)> = (0..order)
            .map(|i| {
                let v0 = eig.eigenvectors[(0, i)];
                (eig.eigenvalues[i], 2.0 * v0 * v0)
            })
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        // symmetrize so odd integrands cancel to rounding
        let n = pairs.len();
        for i in 0..n / 2 {
            let x = 0.5 * (pairs[n - 1 - i].0 - pairs[i].0);
            let w = 0.5 * (pairs[n - 1 - i].1 + pairs[i].1);
            pairs[i] = (-x, w);
            pairs[n - 1 - i] = (x, w);
        }
        if n % 2 == 1 {
            pairs[n / 2].0 = 0.0;
        }
        Ok(Self {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        })
    }

    /// The same rule mapped onto `[0, 1]`.
    pub fn unit(order: usize) -> Result<Self> {
        let r = Self::new(order)?;
        Ok(Self {
            nodes: r.nodes.iter().map(|t| 0.5 * (t + 1.0)).collect(),
            weights: r.weights.iter().map(|w| 0.5 * w).collect(),
        })
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_interval_length() {
        for n in 1..20 {
            let r = GaussLegendre::new(n).unwrap();
            assert!((r.weights.iter().sum::<f64>() - 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn exact_to_degree_2n_minus_1() {
        let r = GaussLegendre::new(8).unwrap();
        for p in 0..16 {
            let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            assert!((r.integrate(|t| t.powi(p)) - exact).abs() < 1e-13, "degree {p}");
        }
        assert!((r.integrate(|t| t.powi(16)) - 2.0 / 17.0).abs() > 1e-8);
    }

    #[test]
    fn three_point_rule() {
        let r = GaussLegendre::new(3).unwrap();
        assert!((r.nodes[2] - 0.6f64.sqrt()).abs() < 1e-15);
        assert!((r.weights[1] - 8.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn zero_order_rejected() {
        assert!(GaussLegendre::new(0).is_err());
    }
}
