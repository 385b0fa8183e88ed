//! Truncated multivariate Taylor polynomials, used to differentiate radial
//! kernels in closed form.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone)]
pub(crate) struct Jet {
    order: usize,
    terms: BTreeMap<Vec<u8>, f64>,
}

impl Jet {
    pub(crate) fn constant(dim: usize, order: usize, c: f64) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![0u8; dim], c);
        Self { order, terms }
    }

    /// `|y + h|² − |y|²` as a polynomial in `h`.
    pub(crate) fn squared_norm_increment(y: &[f64], order: usize) -> Self {
        let dim = y.len();
        let mut terms = BTreeMap::new();
        for (i, &yi) in y.iter().enumerate() {
            let mut e = vec![0u8; dim];
            e[i] = 1;
            if order >= 1 && yi != 0.0 {
                terms.insert(e.clone(), 2.0 * yi);
            }
            e[i] = 2;
            if order >= 2 {
                terms.insert(e, 1.0);
            }
        }
        Self { order, terms }
    }

    pub(crate) fn mul(&self, other: &Jet) -> Jet {
        let mut terms = BTreeMap::new();
        for (ea, &ca) in &self.terms {
            let da: usize = ea.iter().map(|&v| v as usize).sum();
            for (eb, &cb) in &other.terms {
                let db: usize = eb.iter().map(|&v| v as usize).sum();
                if da + db > self.order {
                    continue;
                }
                let e: Vec<u8> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                *terms.entry(e).or_insert(0.0) += ca * cb;
            }
        }
        Jet {
            order: self.order,
            terms,
        }
    }

    fn add_scaled(&mut self, other: &Jet, scale: f64) {
        for (e, &c) in &other.terms {
            *self.terms.entry(e.clone()).or_insert(0.0) += scale * c;
        }
    }

    /// `Σ_j taylor[j] · self^j` for a jet without constant term.
    pub(crate) fn compose(&self, dim: usize, taylor: &[f64]) -> Jet {
        let mut out = Jet::constant(dim, self.order, 0.0);
        let mut power = Jet::constant(dim, self.order, 1.0);
        for (j, &t) in taylor.iter().enumerate().take(self.order + 1) {
            if j > 0 {
                power = power.mul(self);
            }
            out.add_scaled(&power, t);
        }
        out
    }

    /// `∂^α` of the represented function at `h = 0`.
    pub(crate) fn derivative(&self, alpha: &[u8]) -> f64 {
        let factorial: f64 = alpha
            .iter()
            .map(|&a| (1..=a as u32).map(f64::from).product::<f64>())
            .product();
        self.terms.get(alpha).copied().unwrap_or(0.0) * factorial
    }
}

/// Taylor coefficients `F^{(j)}(q0)/j!` of `F(q) = q^{-p}` for `j ≤ order`.
pub(crate) fn power_taylor(q0: f64, p: f64, order: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(order + 1);
    let mut c = pow(q0, -p);
    for j in 0..=order {
        out.push(c);
        c *= (-p - j as f64) / ((j + 1) as f64 * q0);
    }
    out
}

/// Cauchy product of two truncated univariate series.
pub(crate) fn series_product(a: &[f64], b: &[f64]) -> Vec<f64> {
    let len = a.len().min(b.len());
    (0..len).map(|k| (0..=k).map(|j| a[j] * b[k - j]).sum()).collect()
}

fn pow(x: f64, p: f64) -> f64 {
    libm::pow(x, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_taylor_matches_derivatives() {
        // q^{-1.25} at q0 = 2
        let t = power_taylor(2.0, 1.25, 3);
        let d1 = -1.25 * libm::pow(2.0, -2.25);
        let d2 = 1.25 * 2.25 * libm::pow(2.0, -3.25) / 2.0;
        assert!((t[1] - d1).abs() < 1e-15);
        assert!((t[2] - d2).abs() < 1e-15);
    }

    #[test]
    fn compose_gives_radial_derivatives() {
        // f(y) = |y|^{-2.5} in 1D at y = 1.5: f'' = 2.5·3.5·y^{-4.5}
        let y = [1.5];
        let dq = Jet::squared_norm_increment(&y, 4);
        let f = dq.compose(1, &power_taylor(2.25, 1.25, 4));
        let want = 2.5 * 3.5 * libm::pow(1.5, -4.5);
        assert!((f.derivative(&[2]) - want).abs() < 1e-12);
        let want4 = 2.5 * 3.5 * 4.5 * 5.5 * libm::pow(1.5, -6.5);
        assert!((f.derivative(&[4]) - want4).abs() < 1e-11);
    }

    #[test]
    fn mixed_partial_of_squared_norm() {
        let y = [0.3, -0.7];
        let dq = Jet::squared_norm_increment(&y, 3);
        // (|y+h|²)² has ∂_1∂_2 = 8 y1 y2
        let sq = dq.compose(2, &[0.58 * 0.58, 2.0 * 0.58, 1.0]);
        assert!((sq.derivative(&[1, 1]) - 8.0 * 0.3 * -0.7).abs() < 1e-14);
    }
}
