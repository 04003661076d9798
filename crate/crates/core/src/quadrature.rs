//! Gauss–Legendre rules and the integration settings used by the discretizers.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Nodes and weights of an n-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Roots of `P_n` by Newton iteration from the Chebyshev-like initial guess.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "a quadrature rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// How cell integrals against a prior density are evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureConfig {
    /// Gauss–Legendre order used on every panel.
    pub nodes_per_cell: usize,
    /// Integration is truncated to `[-tail_cutoff, tail_cutoff]`.
    pub tail_cutoff: f64,
    /// Largest prior mass allowed outside the truncation window.
    pub tail_tolerance: f64,
    /// Cells wider than this are split into equal panels.
    pub max_panel_width: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            nodes_per_cell: 16,
            tail_cutoff: 12.0,
            tail_tolerance: 1e-12,
            max_panel_width: 0.5,
        }
    }
}

impl QuadratureConfig {
    pub fn with_nodes(nodes_per_cell: usize) -> Self {
        Self {
            nodes_per_cell,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_cell < 2 {
            return Err(Error::InvalidArgument(format!(
                "quadrature needs at least 2 nodes per cell, got {}",
                self.nodes_per_cell
            )));
        }
        if !(self.tail_cutoff > 0.0 && self.tail_cutoff.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "tail cutoff must be positive and finite, got {}",
                self.tail_cutoff
            )));
        }
        if !(self.max_panel_width > 0.0) || !(self.tail_tolerance >= 0.0) {
            return Err(Error::InvalidArgument("panel width must be positive and tail tolerance non-negative".into()));
        }
        Ok(())
    }

    pub fn rule(&self) -> GaussLegendre {
        GaussLegendre::new(self.nodes_per_cell)
    }

    /// Splits `[a, b]` into equal panels no wider than `max_panel_width`.
    pub fn panels(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> {
        let count = (((b - a) / self.max_panel_width).ceil() as usize).max(1);
        let width = (b - a) / count as f64;
        (0..count).map(move |i| {
            let lo = a + i as f64 * width;
            let hi = if i + 1 == count { b } else { lo + width };
            (lo, hi)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly_up_to_degree_2n_minus_1() {
        for n in 2..=20 {
            let rule = GaussLegendre::new(n);
            for deg in 0..2 * n {
                let exact = (2.0f64.powi(deg as i32 + 1) - (-1.0f64).powi(deg as i32 + 1)) / (deg + 1) as f64;
                let approx = rule.integrate(-1.0, 2.0, |x| x.powi(deg as i32));
                assert!((approx - exact).abs() < 1e-11 * exact.abs().max(1.0), "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn nodes_are_sorted_and_weights_sum_to_two() {
        let rule = GaussLegendre::new(16);
        assert!(rule.nodes().windows(2).all(|w| w[0] < w[1]));
        assert!((rule.weights().iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_integral() {
        let rule = GaussLegendre::new(16);
        let total: f64 = QuadratureConfig::default()
            .panels(-12.0, 12.0)
            .map(|(a, b)| rule.integrate(a, b, |x| (-0.5 * x * x).exp()))
            .sum();
        assert!((total - (2.0 * PI).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn validation() {
        assert!(QuadratureConfig::with_nodes(1).validate().is_err());
        assert!(QuadratureConfig::default().validate().is_ok());
    }

    #[test]
    fn panels_cover_interval() {
        let panels: Vec<_> = QuadratureConfig::default().panels(7.0, 12.0).collect();
        assert_eq!(panels.len(), 10);
        assert_eq!(panels[0].0, 7.0);
        assert_eq!(panels[9].1, 12.0);
    }
}
