//! Gauss–Legendre rules and composite panel integration.

use alloc::vec::Vec;
use core::f64::consts::PI;
#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `n`-point rule by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    let (_, d) = legendre_with_derivative(n, z);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
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
            .map(move |(&t, &w)| (mid + half * t, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Composite rule over the panels delimited by `breaks` (sorted).
    pub fn integrate_panels<F: FnMut(f64) -> f64>(&self, breaks: &[f64], mut f: F) -> f64 {
        breaks.windows(2).map(|p| self.integrate(p[0], p[1], &mut f)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Uniform breakpoints on `[a, b]` with panel width at most `width`.
pub fn uniform_breaks(a: f64, b: f64, width: f64) -> Vec<f64> {
    let count = (((b - a) / width).ceil() as usize).max(1);
    (0..=count)
        .map(|i| {
            if i == count {
                b
            } else {
                a + (b - a) * i as f64 / count as f64
            }
        })
        .collect()
}

/// Breakpoints in `ln y` for `∫_a^b` with panels of log-width at most `width`,
/// merged with any extra `knots` lying strictly inside.
pub fn log_breaks(a: f64, b: f64, width: f64, knots: &[f64]) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    let mut breaks = uniform_breaks(la, lb, width);
    breaks.extend(knots.iter().copied().filter(|&k| k > la && k < lb));
    breaks.sort_by(|p, q| p.total_cmp(q));
    breaks.dedup_by(|p, q| (*p - *q).abs() < 1e-14);
    breaks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(6);
        // degree 11 is exact for 6 points
        let v = rule.integrate(0.0, 2.0, |x| x.powi(11));
        assert!((v - 2f64.powi(12) / 12.0).abs() < 1e-10);
        let total: f64 = rule.weights().iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn odd_rule_has_centre_node() {
        let rule = GaussLegendre::new(5);
        assert_eq!(rule.nodes()[2], 0.0);
        assert!((rule.weights()[2] - 128.0 / 225.0).abs() < 1e-14);
    }

    #[test]
    fn log_breaks_include_knots() {
        let b = log_breaks(1.0, 10.0, 1.0, &[1.5]);
        assert!(b.contains(&1.5));
        assert_eq!(b[0], 0.0);
    }
}
