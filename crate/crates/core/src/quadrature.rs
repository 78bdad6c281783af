//! Quadrature rules shared by the integral checks.

use std::num::NonZeroUsize;

use gauss_quad::{FiniteAboveNegOneF64, GaussHermite, GaussLaguerre, GaussLegendre};

use crate::specfun::hermite_functions;

/// Nodes and weights of a one-dimensional rule.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn degree(n: usize) -> NonZeroUsize {
    NonZeroUsize::new(n.max(2)).expect("positive degree")
}

/// Gauss–Hermite rule for the weight `e^{−x²}` on ℝ.
///
/// Weights come from the Christoffel sum `w_i = e^{−x_i²} / Σ_{m<n} h_m(x_i)²`, which stays
/// accurate at high degree.
pub fn gauss_hermite(n: usize) -> Rule {
    let q = GaussHermite::new(degree(n));
    let nodes: Vec<f64> = q.iter().map(|(x, _)| *x).collect();
    let m = nodes.len();
    let weights = nodes
        .iter()
        .map(|&x| (-x * x).exp() / hermite_functions(m - 1, x).iter().map(|h| h * h).sum::<f64>())
        .collect();
    Rule { nodes, weights }
}

/// Generalized Gauss–Laguerre rule for `x^α e^{−x}` on `[0, ∞)`.
///
/// Only reliable for polynomial-times-weight integrands at modest degree.
pub fn gauss_laguerre(n: usize, alpha: f64) -> Rule {
    let a = FiniteAboveNegOneF64::new(alpha).expect("alpha > -1");
    let q = GaussLaguerre::new(degree(n), a);
    let (nodes, weights) = q.iter().map(|(x, w)| (*x, *w)).unzip();
    Rule { nodes, weights }
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Rule {
    let q = GaussLegendre::new(degree(n));
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let (nodes, weights) = q.iter().map(|(x, w)| (mid + half * x, half * w)).unzip();
    Rule { nodes, weights }
}

/// Composite Gauss–Legendre over `panels` equal subintervals of `[a, b]`.
pub fn composite_legendre(panels: usize, per_panel: usize, a: f64, b: f64) -> Rule {
    let width = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * per_panel);
    let mut weights = Vec::with_capacity(panels * per_panel);
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let r = gauss_legendre(per_panel, lo, lo + width);
        nodes.extend(r.nodes);
        weights.extend(r.weights);
    }
    Rule { nodes, weights }
}

/// Uniform symmetric 1-D grid `x_i = (i − (N−1)/2) h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1 {
    pub count: usize,
    pub step: f64,
}

impl Grid1 {
    pub fn new(count: usize, step: f64) -> Self {
        Self { count, step }
    }

    pub fn point(&self, i: usize) -> f64 {
        (i as f64 - 0.5 * (self.count as f64 - 1.0)) * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.point(i)).collect()
    }

    /// Full extent `N h` (one period for periodic grids).
    pub fn extent(&self) -> f64 {
        self.count as f64 * self.step
    }

    /// Largest `|x_i|`.
    pub fn half_width(&self) -> f64 {
        0.5 * (self.count as f64 - 1.0) * self.step
    }

    pub fn has_origin(&self) -> bool {
        self.count % 2 == 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn hermite_exact_on_gaussian_moments() {
        let r = gauss_hermite(40);
        assert_relative_eq!(r.integrate(|x| x * x), PI.sqrt() / 2.0, max_relative = 1e-13);
        assert_relative_eq!(r.integrate(|x| (2.0 * x).exp()), PI.sqrt() * 1f64.exp(), max_relative = 1e-13);
        let wide = gauss_hermite(200);
        assert_relative_eq!(wide.integrate(|_| 1.0), PI.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(wide.integrate(|x| x.powi(8)), 105.0 / 16.0 * PI.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn laguerre_and_legendre() {
        let r = gauss_laguerre(12, 1.0);
        assert_relative_eq!(r.integrate(|x| x * x), 6.0, max_relative = 1e-13);
        let g = composite_legendre(4, 10, 0.0, 2.0);
        assert_relative_eq!(g.integrate(f64::exp), 2f64.exp() - 1.0, max_relative = 1e-14);
    }

    #[test]
    fn grid_is_symmetric() {
        let g = Grid1::new(4, 0.5);
        assert_eq!(g.points(), vec![-0.75, -0.25, 0.25, 0.75]);
        assert!(Grid1::new(5, 1.0).has_origin());
        assert_eq!(Grid1::new(5, 1.0).point(2), 0.0);
    }
}
