//! Translation-invariant radial kernels `K(y) = (2−s)·φ(|y|)·|y|^{−n−s}`.
//!
//! The profile `φ` is either the constant `a0` (pure fractional kernel), a
//! smooth bounded perturbation `a0 + ε·ψ(|y|²)`, or a tabulated radial profile.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{bail, Error, Result};
use crate::jet::{power_taylor, series_product, Jet};
use crate::quadrature::{log_breaks, GaussLegendre};

/// Highest derivative order with closed-form support.
pub const MAX_DERIVATIVE_ORDER: usize = 8;

/// Perturbation profile `ψ(q)` with `q = |y|²`; both satisfy `0 < ψ ≤ 1 = ψ(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// `ψ(q) = 1/(1+q)`
    Rational,
    /// `ψ(q) = e^{−q}`
    Gaussian,
}

impl Profile {
    pub fn eval(self, q: f64) -> f64 {
        match self {
            Profile::Rational => 1.0 / (1.0 + q),
            Profile::Gaussian => libm::exp(-q),
        }
    }

    /// Taylor coefficients `ψ^{(j)}(q0)/j!`, `j ≤ order`.
    fn taylor(self, q0: f64, order: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(order + 1);
        match self {
            Profile::Rational => {
                let mut c = 1.0 / (1.0 + q0);
                for _ in 0..=order {
                    out.push(c);
                    c *= -1.0 / (1.0 + q0);
                }
            }
            Profile::Gaussian => {
                let mut c = libm::exp(-q0);
                for j in 0..=order {
                    out.push(c);
                    c *= -1.0 / (j + 1) as f64;
                }
            }
        }
        out
    }
}

/// Radial profile `φ(r)` tabulated at `r_i` and interpolated by a cubic spline
/// in `t = ln r` with zero end slopes; constant outside the table.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialTable {
    log_r: Vec<f64>,
    phi: Vec<f64>,
    second: Vec<f64>,
}

impl RadialTable {
    pub fn new(radii: &[f64], phi: &[f64]) -> Result<Self> {
        if radii.len() != phi.len() || radii.len() < 2 {
            bail!(
                InvalidParameter,
                "table needs at least two (r, phi) pairs of equal length"
            );
        }
        if radii.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
            bail!(InvalidParameter, "table radii must be positive and finite");
        }
        if radii.windows(2).any(|w| w[0] >= w[1]) {
            bail!(InvalidParameter, "table radii must be strictly increasing");
        }
        if phi.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
            bail!(InvalidParameter, "tabulated profile must be positive and finite");
        }
        let log_r: Vec<f64> = radii.iter().map(|&r| libm::log(r)).collect();
        let second = clamped_spline(&log_r, phi);
        Ok(Self {
            log_r,
            phi: phi.to_vec(),
            second,
        })
    }

    pub fn radii(&self) -> Vec<f64> {
        self.log_r.iter().map(|&t| libm::exp(t)).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.phi
    }

    pub(crate) fn log_knots(&self) -> &[f64] {
        &self.log_r
    }

    /// `(G, G', G'')` of `G(t) = φ(e^t)`.
    fn eval_log(&self, t: f64) -> (f64, f64, f64) {
        let n = self.log_r.len();
        if t <= self.log_r[0] {
            return (self.phi[0], 0.0, 0.0);
        }
        if t >= self.log_r[n - 1] {
            return (self.phi[n - 1], 0.0, 0.0);
        }
        let i = self.log_r.partition_point(|&k| k <= t).saturating_sub(1).min(n - 2);
        let h = self.log_r[i + 1] - self.log_r[i];
        let a = (self.log_r[i + 1] - t) / h;
        let b = 1.0 - a;
        let (m0, m1) = (self.second[i], self.second[i + 1]);
        let (y0, y1) = (self.phi[i], self.phi[i + 1]);
        let g = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let dg = (y1 - y0) / h - (3.0 * a * a - 1.0) * h * m0 / 6.0 + (3.0 * b * b - 1.0) * h * m1 / 6.0;
        let d2g = a * m0 + b * m1;
        (g, dg, d2g)
    }

    fn sup_deviation(&self, a0: f64) -> f64 {
        let mut dev = 0.0f64;
        for w in self.log_r.windows(2) {
            for j in 0..=32 {
                let t = w[0] + (w[1] - w[0]) * j as f64 / 32.0;
                dev = dev.max((self.eval_log(t).0 - a0).abs());
            }
        }
        dev
    }
}

/// Second derivatives of the cubic spline with zero first derivative at both ends.
fn clamped_spline(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    diag[0] = h[0] / 3.0;
    upper[0] = h[0] / 6.0;
    rhs[0] = (y[1] - y[0]) / h[0];
    for i in 1..n - 1 {
        diag[i] = (h[i - 1] + h[i]) / 3.0;
        upper[i] = h[i] / 6.0;
        rhs[i] = (y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1];
    }
    diag[n - 1] = h[n - 2] / 3.0;
    rhs[n - 1] = -(y[n - 1] - y[n - 2]) / h[n - 2];
    // Thomas algorithm; the sub-diagonal equals the previous super-diagonal.
    for i in 1..n {
        let lower = h[i - 1] / 6.0;
        let w = lower / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    let mut m = vec![0.0; n];
    m[n - 1] = rhs[n - 1] / diag[n - 1];
    for i in (0..n - 1).rev() {
        m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelForm {
    PureFractional,
    PerturbedFractional { epsilon: f64, profile: Profile },
    Tabulated(RadialTable),
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub n: usize,
    pub s: f64,
    pub a0: f64,
    pub eta: f64,
    /// Constant `C` of the derivative bound `|∂^α K| ≤ C H^{|α|} |α|! |y|^{−n−s−|α|}`.
    pub c_k: f64,
    pub h: f64,
    pub form: KernelForm,
}

impl KernelSpec {
    /// Pure fractional kernel `a0(2−s)|y|^{−n−s}`.
    pub fn pure(n: usize, s: f64, a0: f64) -> Result<Self> {
        Self::calibrated(n, s, a0, 0.0, KernelForm::PureFractional)
    }

    /// `(2−s)|y|^{−n−s}(a0 + ε ψ(|y|²))`.
    pub fn perturbed(n: usize, s: f64, a0: f64, epsilon: f64, profile: Profile) -> Result<Self> {
        Self::calibrated(
            n,
            s,
            a0,
            epsilon.abs(),
            KernelForm::PerturbedFractional { epsilon, profile },
        )
    }

    pub fn tabulated(n: usize, s: f64, a0: f64, table: RadialTable) -> Result<Self> {
        let eta = table.sup_deviation(a0);
        Self::calibrated(n, s, a0, eta, KernelForm::Tabulated(table))
    }

    /// Builds a spec and fills `C_K`, `H` from a fit on a default sample of `B_1`.
    fn calibrated(n: usize, s: f64, a0: f64, eta: f64, form: KernelForm) -> Result<Self> {
        let mut spec = Self {
            n,
            s,
            a0,
            eta,
            c_k: 1.0,
            h: 1.0,
            form,
        };
        spec.validate()?;
        let order = spec.max_order();
        let (c, h) = fit_derivative_constants(&spec, order, &default_sample(n))?;
        spec.c_k = c;
        spec.h = h;
        Ok(spec)
    }

    pub fn with_constants(mut self, c_k: f64, h: f64) -> Result<Self> {
        self.c_k = c_k;
        self.h = h;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            bail!(InvalidParameter, "dimension n must be positive");
        }
        if !(self.s > 1.0 && self.s < 2.0) {
            bail!(InvalidParameter, "order s = {} must lie in (1, 2)", self.s);
        }
        if !(self.a0 > 0.0 && self.a0.is_finite()) {
            bail!(InvalidParameter, "a0 = {} must be positive", self.a0);
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            bail!(InvalidParameter, "eta = {} must be nonnegative", self.eta);
        }
        if !(self.c_k > 0.0 && self.c_k.is_finite()) {
            bail!(InvalidParameter, "C_K = {} must be positive", self.c_k);
        }
        if !(self.h >= 1.0 && self.h.is_finite()) {
            bail!(InvalidParameter, "H = {} must be at least 1", self.h);
        }
        if let KernelForm::PerturbedFractional { epsilon, .. } = self.form {
            if !epsilon.is_finite() || self.a0 + epsilon.min(0.0) <= 0.0 {
                bail!(
                    InvalidParameter,
                    "a0 + epsilon must stay positive (epsilon = {epsilon})"
                );
            }
        }
        Ok(())
    }

    /// Highest derivative order available in closed form.
    pub fn max_order(&self) -> usize {
        match self.form {
            KernelForm::Tabulated(_) => 2,
            _ => MAX_DERIVATIVE_ORDER,
        }
    }

    pub fn is_pure(&self) -> bool {
        match self.form {
            KernelForm::PureFractional => true,
            KernelForm::PerturbedFractional { epsilon, .. } => epsilon == 0.0,
            KernelForm::Tabulated(_) => false,
        }
    }

    /// Radial profile `φ(r) = r^{n+s} K / (2−s)`.
    pub fn profile(&self, r: f64) -> f64 {
        match &self.form {
            KernelForm::PureFractional => self.a0,
            KernelForm::PerturbedFractional { epsilon, profile } => self.a0 + epsilon * profile.eval(r * r),
            KernelForm::Tabulated(t) => t.eval_log(libm::log(r)).0,
        }
    }

    pub(crate) fn profile_at_zero(&self) -> f64 {
        match &self.form {
            KernelForm::PureFractional => self.a0,
            KernelForm::PerturbedFractional { epsilon, .. } => self.a0 + epsilon,
            KernelForm::Tabulated(t) => t.phi[0],
        }
    }

    pub(crate) fn profile_at_infinity(&self) -> f64 {
        match &self.form {
            KernelForm::Tabulated(t) => t.phi[t.phi.len() - 1],
            _ => self.a0,
        }
    }

    /// Radius below which `φ` is replaced by `φ(0+)` in radial integrals.
    pub(crate) fn flat_below(&self, scale: f64) -> f64 {
        match &self.form {
            KernelForm::Tabulated(t) => libm::exp(t.log_r[0]).min(scale * 1e-6),
            _ => scale * 1e-6,
        }
    }

    /// Radius beyond which `φ` is replaced by `φ(∞)` in radial integrals.
    pub(crate) fn flat_above(&self, scale: f64) -> f64 {
        match &self.form {
            KernelForm::PureFractional => scale,
            KernelForm::PerturbedFractional {
                profile: Profile::Gaussian,
                ..
            } => scale.max(7.0),
            KernelForm::PerturbedFractional {
                profile: Profile::Rational,
                ..
            } => scale.max(1.0) * 1e5,
            KernelForm::Tabulated(t) => scale.max(libm::exp(t.log_r[t.log_r.len() - 1])),
        }
    }

    pub(crate) fn log_knots(&self) -> &[f64] {
        match &self.form {
            KernelForm::Tabulated(t) => t.log_knots(),
            _ => &[],
        }
    }

    /// `K` at distance `r > 0` from the origin.
    pub fn radial(&self, r: f64) -> f64 {
        (2.0 - self.s) * self.profile(r) * libm::pow(r, -(self.n as f64) - self.s)
    }

    /// `∫_a^b r^p K(r e_1) dr` along a ray, `0 ≤ a < b ≤ ∞`.
    pub fn ray_moment(&self, p: f64, a: f64, b: f64) -> f64 {
        let e = p + 1.0 - self.n as f64 - self.s;
        let c = 2.0 - self.s;
        let power = |lo: f64, hi: f64| -> f64 {
            // ∫_lo^hi r^{e−1} dr
            let top = if hi.is_infinite() { 0.0 } else { libm::pow(hi, e) };
            let bottom = if lo == 0.0 { 0.0 } else { libm::pow(lo, e) };
            (top - bottom) / e
        };
        if self.is_pure() {
            return c * self.a0 * power(a, b);
        }
        let scale = if b.is_finite() { b } else { a };
        let lo_flat = if a == 0.0 { self.flat_below(scale) } else { a };
        let hi_flat = if b.is_infinite() {
            self.flat_above(a.max(1e-300))
        } else {
            b
        };
        let mut total = 0.0;
        if a == 0.0 {
            total += c * self.profile_at_zero() * power(0.0, lo_flat.min(b));
        }
        if b.is_infinite() {
            total += c * self.profile_at_infinity() * power(hi_flat.max(a), b);
        }
        let (lo, hi) = (lo_flat.max(a), hi_flat.min(b));
        if hi > lo {
            let rule = GaussLegendre::new(16);
            let breaks = log_breaks(lo, hi, 0.5, self.log_knots());
            total += rule.integrate_panels(&breaks, |t| {
                let r = libm::exp(t);
                libm::pow(r, p + 1.0) * self.radial(r)
            });
        }
        total
    }
}

fn default_sample(n: usize) -> Vec<Vec<f64>> {
    let mut pts = Vec::new();
    for j in 0..12 {
        let r = libm::pow(10.0, -2.0 + 2.0 * j as f64 / 12.0);
        let mut axis = vec![0.0; n];
        axis[0] = r;
        pts.push(axis);
        if n > 1 {
            pts.push(vec![r / libm::sqrt(n as f64); n]);
        }
    }
    pts
}

fn norm(y: &[f64]) -> f64 {
    libm::sqrt(y.iter().map(|v| v * v).sum())
}

/// `K(y)` for `y ≠ 0`.
pub fn eval_kernel(spec: &KernelSpec, y: &[f64]) -> Result<f64> {
    check_point(spec, y)?;
    let r = norm(y);
    if r == 0.0 {
        bail!(Domain, "kernel is singular at the origin");
    }
    Ok(spec.radial(r))
}

fn check_point(spec: &KernelSpec, y: &[f64]) -> Result<()> {
    if y.len() != spec.n {
        bail!(
            InvalidParameter,
            "point has dimension {} but kernel has n = {}",
            y.len(),
            spec.n
        );
    }
    Ok(())
}

/// `∂^α K(y)` in closed form, `|α| ≤ 8` (2 inside a tabulated profile).
pub fn eval_kernel_derivative(spec: &KernelSpec, alpha: &[usize], y: &[f64]) -> Result<f64> {
    check_point(spec, y)?;
    if alpha.len() != spec.n {
        bail!(
            InvalidParameter,
            "multiindex has length {} but kernel has n = {}",
            alpha.len(),
            spec.n
        );
    }
    let order: usize = alpha.iter().sum();
    if order > MAX_DERIVATIVE_ORDER {
        return Err(Error::Unsupported(alloc::format!(
            "derivative order {order} exceeds the supported maximum {MAX_DERIVATIVE_ORDER}"
        )));
    }
    let q0: f64 = y.iter().map(|v| v * v).sum();
    if q0 == 0.0 {
        bail!(Domain, "kernel is singular at the origin");
    }
    let p = 0.5 * (spec.n as f64 + spec.s);
    let profile = match &spec.form {
        KernelForm::PureFractional => {
            let mut t = vec![0.0; order + 1];
            t[0] = spec.a0;
            t
        }
        KernelForm::PerturbedFractional { epsilon, profile } => {
            let mut t: Vec<f64> = profile.taylor(q0, order).iter().map(|c| epsilon * c).collect();
            t[0] += spec.a0;
            t
        }
        KernelForm::Tabulated(table) => {
            let t = 0.5 * libm::log(q0);
            let outside = t >= table.log_r[table.log_r.len() - 1] || t <= table.log_r[0];
            if order > 2 && !outside {
                return Err(Error::Unsupported(alloc::format!(
                    "tabulated profiles support derivatives up to order 2, requested {order}"
                )));
            }
            let (g, dg, d2g) = table.eval_log(t);
            let mut c = vec![0.0; order + 1];
            c[0] = g;
            if order >= 1 {
                c[1] = dg / (2.0 * q0);
            }
            if order >= 2 {
                c[2] = 0.5 * (d2g - 2.0 * dg) / (4.0 * q0 * q0);
            }
            c
        }
    };
    let taylor: Vec<f64> = series_product(&power_taylor(q0, p, order), &profile)
        .into_iter()
        .map(|c| (2.0 - spec.s) * c)
        .collect();
    let jet = Jet::squared_norm_increment(y, order).compose(spec.n, &taylor);
    let key: Vec<u8> = alpha.iter().map(|&a| a as u8).collect();
    Ok(jet.derivative(&key))
}

/// `max | |y|^{n+s} K(y)/(2−s) − a0 |` over the sample.
pub fn check_near_fractional(spec: &KernelSpec, sample: &[Vec<f64>]) -> Result<f64> {
    if sample.is_empty() {
        bail!(InvalidParameter, "sample must be nonempty");
    }
    let mut worst = 0.0f64;
    for y in sample {
        check_point(spec, y)?;
        let r = norm(y);
        if r == 0.0 {
            bail!(Domain, "sample contains the origin");
        }
        let residual = match spec.form {
            KernelForm::PureFractional => 0.0,
            _ => (spec.profile(r) - spec.a0).abs(),
        };
        worst = worst.max(residual);
    }
    Ok(worst)
}

/// All multiindices of length `n` and order `m`.
pub fn multiindices(n: usize, m: usize) -> Vec<Vec<usize>> {
    if n == 1 {
        return vec![vec![m]];
    }
    let mut out = Vec::new();
    for first in (0..=m).rev() {
        for mut rest in multiindices(n - 1, m - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Constants `(C, H)` with `|∂^α K(y)| ≤ C H^{|α|} |α|! |y|^{−n−s−|α|}` on the sample.
///
/// `H` is the exponential of the least-squares slope of `ln R_m` against `m`,
/// clamped to `H ≥ 1`, where `R_m` is the worst normalized ratio at order `m`;
/// `C` is then the smallest value making every sampled ratio admissible.
pub fn fit_derivative_constants(spec: &KernelSpec, max_order: usize, sample: &[Vec<f64>]) -> Result<(f64, f64)> {
    if sample.is_empty() {
        bail!(InvalidParameter, "sample must be nonempty");
    }
    let ns = spec.n as f64 + spec.s;
    let mut ratios = vec![0.0f64; max_order + 1];
    let mut factorial = 1.0;
    for (m, ratio) in ratios.iter_mut().enumerate() {
        if m > 0 {
            factorial *= m as f64;
        }
        for y in sample {
            let r = norm(y);
            if r == 0.0 {
                bail!(Domain, "sample contains the origin");
            }
            let weight = libm::pow(r, ns + m as f64) / factorial;
            for alpha in multiindices(spec.n, m) {
                let d = eval_kernel_derivative(spec, &alpha, y)?;
                *ratio = ratio.max(d.abs() * weight);
            }
        }
    }
    let h = if max_order == 0 {
        1.0
    } else {
        let pts: Vec<(f64, f64)> = ratios
            .iter()
            .enumerate()
            .filter(|(_, &r)| r > 0.0)
            .map(|(m, &r)| (m as f64, libm::log(r)))
            .collect();
        libm::exp(least_squares_slope(&pts)).max(1.0)
    };
    let c = ratios
        .iter()
        .enumerate()
        .map(|(m, &r)| r / libm::pow(h, m as f64))
        .fold(0.0f64, f64::max);
    Ok((c, h))
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Surface measure of the unit sphere `S^{n−1} ⊂ R^n`.
pub fn unit_sphere_measure(n: usize) -> f64 {
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * core::f64::consts::PI,
        _ => 2.0 * core::f64::consts::PI / (n as f64 - 2.0) * unit_sphere_measure(n - 2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pure() -> KernelSpec {
        KernelSpec::pure(1, 1.5, 1.0).unwrap()
    }

    #[test]
    fn pure_values() {
        let k = pure();
        assert!((eval_kernel(&k, &[1.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!((eval_kernel(&k, &[2.0]).unwrap() - 0.5 * libm::pow(2.0, -2.5)).abs() < 1e-15);
        assert_eq!(eval_kernel(&k, &[-2.0]).unwrap(), eval_kernel(&k, &[2.0]).unwrap());
        assert!(matches!(eval_kernel(&k, &[0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn pure_derivatives() {
        let k = pure();
        assert!((eval_kernel_derivative(&k, &[0], &[1.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!((eval_kernel_derivative(&k, &[1], &[1.0]).unwrap() + 1.25).abs() < 1e-14);
        assert!((eval_kernel_derivative(&k, &[2], &[1.0]).unwrap() - 4.375).abs() < 1e-13);
        // odd derivatives flip sign on the negative axis
        let a = eval_kernel_derivative(&k, &[3], &[0.7]).unwrap();
        let b = eval_kernel_derivative(&k, &[3], &[-0.7]).unwrap();
        assert!((a + b).abs() < 1e-12 * a.abs());
        assert!(matches!(
            eval_kernel_derivative(&k, &[9], &[1.0]),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn near_fractional_residuals() {
        let sample: Vec<Vec<f64>> = (0..=60).map(|j| vec![libm::pow(10.0, -3.0 + 0.1 * j as f64)]).collect();
        assert_eq!(check_near_fractional(&pure(), &sample).unwrap(), 0.0);
        let flat = KernelSpec::perturbed(1, 1.5, 1.0, 0.0, Profile::Rational).unwrap();
        assert_eq!(check_near_fractional(&flat, &sample).unwrap(), 0.0);
        let eps = 0.2;
        let k = KernelSpec::perturbed(1, 1.5, 1.0, eps, Profile::Rational).unwrap();
        let res = check_near_fractional(&k, &sample).unwrap();
        assert!(res > 0.0 && res <= eps);
        assert!((res - eps).abs() < 1e-6 * eps);
    }

    #[test]
    fn order_zero_fit() {
        let sample = vec![vec![0.1], vec![0.5], vec![0.9]];
        let k = KernelSpec::perturbed(1, 1.5, 1.0, 0.3, Profile::Gaussian).unwrap();
        let (c, h) = fit_derivative_constants(&k, 0, &sample).unwrap();
        assert_eq!(h, 1.0);
        let sup = sample
            .iter()
            .map(|y| libm::pow(y[0], 2.5) * k.radial(y[0]))
            .fold(0.0, f64::max);
        assert!((c - sup).abs() < 1e-15);
    }

    #[test]
    fn spline_reproduces_constant_and_linear_in_log() {
        let radii = [0.1, 0.5, 1.0, 3.0, 10.0];
        let t = RadialTable::new(&radii, &[2.0; 5]).unwrap();
        assert!((t.eval_log(0.3).0 - 2.0).abs() < 1e-15);
        let k = KernelSpec::tabulated(1, 1.5, 2.0, t).unwrap();
        assert!(k.eta < 1e-15);
        let p = KernelSpec::pure(1, 1.5, 2.0).unwrap();
        for y in [0.05, 0.7, 2.0, 40.0] {
            assert!((k.radial(y) - p.radial(y)).abs() < 1e-14 * p.radial(y));
            let a = eval_kernel_derivative(&k, &[2], &[y]).unwrap();
            let b = eval_kernel_derivative(&p, &[2], &[y]).unwrap();
            assert!((a - b).abs() < 1e-12 * b.abs());
        }
        assert!(eval_kernel_derivative(&k, &[3], &[0.7]).is_err());
    }

    #[test]
    fn ray_moments_agree_with_closed_form_for_flat_perturbation() {
        let k = KernelSpec::perturbed(1, 1.5, 1.0, 0.0, Profile::Rational).unwrap();
        let mut generic = k.clone();
        generic.form = KernelForm::Tabulated(RadialTable::new(&[0.5, 2.0], &[1.0, 1.0]).unwrap());
        for (p, a, b) in [(2.0, 0.0, 0.3), (0.0, 2.0, f64::INFINITY), (1.0, 0.5, 7.0)] {
            let exact = k.ray_moment(p, a, b);
            let numeric = generic.ray_moment(p, a, b);
            assert!((exact - numeric).abs() < 1e-12 * exact.abs(), "{p} {a} {b}");
        }
    }

    #[test]
    fn perturbed_moment_matches_brute_force() {
        let k = KernelSpec::perturbed(1, 1.5, 1.0, 0.4, Profile::Rational).unwrap();
        let got = k.ray_moment(0.0, 3.0, f64::INFINITY);
        // substitute r = 3/u² to get a smooth integrand on (0, 1]
        let rule = GaussLegendre::new(40);
        let want = rule.integrate_panels(&crate::quadrature::uniform_breaks(0.0, 1.0, 0.05), |u| {
            let r = 3.0 / (u * u);
            k.radial(r) * 6.0 / (u * u * u)
        });
        assert!((got - want).abs() < 1e-12 * want, "{got} {want}");
    }

    #[test]
    fn sphere_measures() {
        assert_eq!(unit_sphere_measure(1), 2.0);
        assert!((unit_sphere_measure(3) - 4.0 * core::f64::consts::PI).abs() < 1e-14);
        assert!((unit_sphere_measure(4) - 2.0 * core::f64::consts::PI.powi(2)).abs() < 1e-13);
    }

    #[test]
    fn multiindex_enumeration() {
        assert_eq!(multiindices(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(multiindices(3, 3).len(), 10);
    }
}
