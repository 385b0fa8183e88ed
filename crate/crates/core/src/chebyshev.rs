//! Chebyshev–Gauss–Lobatto grids, coefficient transforms, Clenshaw evaluation,
//! spectral differentiation and barycentric interpolation on `[-R, R]`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::DMatrix;
#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Chebyshev–Gauss–Lobatto nodes on `[-R, R]` in ascending order,
/// `x_j = -R cos(πj/N)` for `j = 0..=N`.
pub fn lobatto_nodes(intervals: usize, radius: f64) -> Vec<f64> {
    let n = intervals as f64;
    (0..=intervals)
        .map(|j| {
            if 2 * j == intervals {
                0.0
            } else {
                -radius * (PI * j as f64 / n).cos()
            }
        })
        .collect()
}

/// Barycentric weights for the Lobatto nodes.
pub fn barycentric_weights(intervals: usize) -> Vec<f64> {
    (0..=intervals)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == intervals {
                0.5 * sign
            } else {
                sign
            }
        })
        .collect()
}

/// Lagrange basis values `ℓ_j(z)` written into `out`.
pub fn lagrange_row(nodes: &[f64], weights: &[f64], z: f64, out: &mut [f64]) {
    if let Some(j) = nodes.iter().position(|&x| x == z) {
        out.iter_mut().for_each(|v| *v = 0.0);
        out[j] = 1.0;
        return;
    }
    let mut total = 0.0;
    for ((o, &x), &w) in out.iter_mut().zip(nodes).zip(weights) {
        *o = w / (z - x);
        total += *o;
    }
    out.iter_mut().for_each(|v| *v /= total);
}

/// Barycentric interpolation of `values` at `z`.
pub fn interpolate(nodes: &[f64], weights: &[f64], values: &[f64], z: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for ((&x, &w), &v) in nodes.iter().zip(weights).zip(values) {
        let d = z - x;
        if d == 0.0 {
            return v;
        }
        let t = w / d;
        num += t * v;
        den += t;
    }
    num / den
}

/// Truncated Chebyshev series `Σ c_k T_k(x/R)` on `[-R, R]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebSeries {
    coeffs: Vec<f64>,
    radius: f64,
}

impl ChebSeries {
    pub fn new(coeffs: Vec<f64>, radius: f64) -> Self {
        Self { coeffs, radius }
    }

    /// Interpolating series through values sampled at [`lobatto_nodes`].
    pub fn from_values(values: &[f64], radius: f64) -> Self {
        let n = values.len() - 1;
        if n == 0 {
            return Self::new(vec![values[0]], radius);
        }
        let table = cos_table(n);
        let mut coeffs = vec![0.0; n + 1];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, &f) in values.iter().enumerate() {
                let term = f * table[(k * j) % (2 * n)];
                acc += if j == 0 || j == n { 0.5 * term } else { term };
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let scale = if k == 0 || k == n { 1.0 } else { 2.0 };
            *c = sign * scale * acc / n as f64;
        }
        Self { coeffs, radius }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Clenshaw evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        clenshaw(&self.coeffs, x / self.radius)
    }

    pub fn derivative(&self) -> ChebSeries {
        Self {
            coeffs: derivative_coeffs(&self.coeffs, self.radius),
            radius: self.radius,
        }
    }

    pub fn nth_derivative(&self, order: usize) -> ChebSeries {
        (0..order).fold(self.clone(), |s, _| s.derivative())
    }

    /// Drops the tail of coefficients that sit below `rel_tol · max|c_k|`.
    pub fn chopped(&self, rel_tol: f64) -> ChebSeries {
        let scale = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let keep = self
            .coeffs
            .iter()
            .rposition(|c| c.abs() > rel_tol * scale)
            .map_or(1, |i| i + 1);
        Self {
            coeffs: self.coeffs[..keep].to_vec(),
            radius: self.radius,
        }
    }

    /// Chops at `max(floor, 4·noise)`, where the noise level is the largest
    /// relative coefficient in the upper half of the spectrum.
    pub fn chopped_to_noise(&self, floor: f64) -> ChebSeries {
        let scale = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if scale == 0.0 {
            return self.chopped(floor);
        }
        let half = self.coeffs.len() / 2;
        let noise = self.coeffs[half..].iter().fold(0.0f64, |m, c| m.max(c.abs())) / scale;
        self.chopped(floor.max(4.0 * noise))
    }
}

pub(crate) fn cos_table(n: usize) -> Vec<f64> {
    (0..2 * n).map(|m| (PI * m as f64 / n as f64).cos()).collect()
}

pub(crate) fn clenshaw(coeffs: &[f64], xi: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = c + 2.0 * xi * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    match coeffs.first() {
        Some(&c0) => c0 + xi * b1 - b2,
        None => 0.0,
    }
}

pub(crate) fn derivative_coeffs(coeffs: &[f64], radius: f64) -> Vec<f64> {
    let m = coeffs.len();
    if m <= 1 {
        return vec![0.0];
    }
    let mut d = vec![0.0; m + 1];
    for k in (1..m).rev() {
        d[k - 1] = d[k + 1] + 2.0 * k as f64 * coeffs[k];
    }
    d[0] *= 0.5;
    d.truncate(m - 1);
    d.iter_mut().for_each(|v| *v /= radius);
    d
}

/// First-derivative matrix on the Lobatto grid of `[−R, R]`.
///
/// Node differences use `x_i − x_j = 2R sin(π(i+j)/2N) sin(π(i−j)/2N)` and the
/// diagonal is the negative row sum, which keeps rounding errors near the
/// endpoints far below those of the coefficient recurrence.
pub fn differentiation_matrix(intervals: usize, radius: f64) -> DMatrix<f64> {
    let n = intervals;
    let w = barycentric_weights(n);
    let half = PI / (2.0 * n as f64);
    let mut d = DMatrix::zeros(n + 1, n + 1);
    for i in 0..=n {
        let mut diag = 0.0;
        for j in 0..=n {
            if i != j {
                let gap = 2.0 * radius * ((i + j) as f64 * half).sin() * ((i as f64 - j as f64) * half).sin();
                let v = (w[j] / w[i]) / gap;
                d[(i, j)] = v;
                diag += v;
            }
        }
        d[(i, i)] = -diag;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_are_ascending_and_symmetric() {
        let x = lobatto_nodes(8, 2.0);
        assert_eq!(x.len(), 9);
        assert!((x[0] + 2.0).abs() < 1e-15 && (x[8] - 2.0).abs() < 1e-15);
        assert!(x.windows(2).all(|w| w[0] < w[1]));
        for j in 0..9 {
            assert!((x[j] + x[8 - j]).abs() < 1e-15);
        }
    }

    #[test]
    fn series_reproduces_polynomial() {
        let x = lobatto_nodes(6, 1.0);
        let v: Vec<f64> = x.iter().map(|t| 3.0 * t * t * t - t + 0.5).collect();
        let s = ChebSeries::from_values(&v, 1.0);
        // 3x³ − x + 1/2 = 0.5 T0 + 1.25 T1 + 0.75 T3
        assert!((s.coeffs()[0] - 0.5).abs() < 1e-14);
        assert!((s.coeffs()[1] - 1.25).abs() < 1e-14);
        assert!((s.coeffs()[3] - 0.75).abs() < 1e-14);
        assert!((s.eval(0.3) - (3.0 * 0.027 - 0.3 + 0.5)).abs() < 1e-14);
        let d = s.derivative();
        assert!((d.eval(0.3) - (9.0 * 0.09 - 1.0)).abs() < 1e-13);
        assert!((s.nth_derivative(3).eval(-0.7) - 18.0).abs() < 1e-12);
    }

    #[test]
    fn scaled_interval_derivative() {
        let r = 3.0;
        let x = lobatto_nodes(40, r);
        let v: Vec<f64> = x.iter().map(|t| (0.5 * t).sin()).collect();
        let s = ChebSeries::from_values(&v, r);
        let d2 = s.nth_derivative(2);
        assert!((d2.eval(1.1) + 0.25 * (0.55f64).sin()).abs() < 1e-11);
    }

    #[test]
    fn barycentric_matches_clenshaw() {
        let x = lobatto_nodes(16, 1.0);
        let w = barycentric_weights(16);
        let v: Vec<f64> = x.iter().map(|t| (2.0 * t).exp()).collect();
        let s = ChebSeries::from_values(&v, 1.0);
        for z in [-0.91, -0.2, 0.0, 0.33, 0.999] {
            assert!((interpolate(&x, &w, &v, z) - s.eval(z)).abs() < 1e-12);
        }
        let mut row = vec![0.0; 17];
        lagrange_row(&x, &w, 0.33, &mut row);
        let dot: f64 = row.iter().zip(&v).map(|(a, b)| a * b).sum();
        assert!((dot - s.eval(0.33)).abs() < 1e-12);
    }

    #[test]
    fn differentiation_matrix_matches_series() {
        let n = 12;
        let r = 1.5;
        let x = lobatto_nodes(n, r);
        let v: Vec<f64> = x.iter().map(|t| (t + 0.3).cos()).collect();
        let d = differentiation_matrix(n, r);
        let dv = &d * &d * nalgebra::DVector::from_column_slice(&v);
        let s2 = ChebSeries::from_values(&v, r).nth_derivative(2);
        for i in 0..=n {
            assert!((dv[i] - s2.eval(x[i])).abs() < 1e-10);
        }
    }

    #[test]
    fn chop_keeps_significant_head() {
        let s = ChebSeries::new(vec![1.0, 0.5, 1e-3, 1e-17, 1e-18], 1.0);
        assert_eq!(s.chopped(1e-14).coeffs().len(), 3);
    }
}
