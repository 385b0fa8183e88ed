//! Cauchy's method of majorants in exact rational arithmetic: the `M̃_k`
//! recursion, formal power-series solutions of the comparison ODE and the
//! domination check against measured ladders.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{bail, Result};
use crate::ladder::{analyticity_radius, check_recursive_estimate, NormSequence, TWO_E};
use crate::series::{binomial, integer, PowerSeries};

/// Default truncation order.
pub const DEFAULT_K_MAX: usize = 25;

fn check_nonnegative(pairs: &[(&str, &BigRational)]) -> Result<()> {
    for (name, v) in pairs {
        if v.is_negative() {
            bail!(InvalidParameter, "{name} must be nonnegative, got {v}");
        }
    }
    Ok(())
}

/// `G(t) = C Σ A^k t^k`, the series of `C/(1 − At)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricMajorant {
    pub c: BigRational,
    pub a: BigRational,
    pub series: PowerSeries,
}

impl GeometricMajorant {
    pub fn closed_form(&self) -> String {
        format!("{}/(1 - {}*t)", self.c, self.a)
    }
}

pub fn geometric_majorant(c: &BigRational, a: &BigRational, k_max: usize) -> Result<GeometricMajorant> {
    check_nonnegative(&[("A", a)])?;
    let mut coeffs = Vec::with_capacity(k_max + 1);
    let mut term = c.clone();
    for _ in 0..=k_max {
        coeffs.push(term.clone());
        term *= a;
    }
    Ok(GeometricMajorant {
        c: c.clone(),
        a: a.clone(),
        series: PowerSeries::new(coeffs),
    })
}

/// `M̃_0 = M0`, `M̃_{k+1} = C(C_f A^k k! + k Σ_{l=0}^k binom(k,l) M̃_{k−l} A^l l!)`.
///
/// The returned series holds the values `M̃_k` themselves as coefficients.
pub fn majorant_recursion(
    c: &BigRational,
    c_f: &BigRational,
    a: &BigRational,
    m0: &BigRational,
    k_max: usize,
) -> Result<PowerSeries> {
    check_nonnegative(&[("C", c), ("C_f", c_f), ("A", a), ("M0", m0)])?;
    // a_pow_fact[l] = A^l l!
    let mut a_pow_fact = Vec::with_capacity(k_max + 1);
    a_pow_fact.push(BigRational::one());
    for l in 1..=k_max {
        let next = &a_pow_fact[l - 1] * a * integer(l as i64);
        a_pow_fact.push(next);
    }
    let mut m = Vec::with_capacity(k_max + 1);
    m.push(m0.clone());
    for k in 0..k_max {
        let mut sum = BigRational::zero();
        if k > 0 {
            for l in 0..=k {
                if a_pow_fact[l].is_zero() {
                    continue;
                }
                sum += BigRational::from_integer(binomial(k, l)) * &m[k - l] * &a_pow_fact[l];
            }
        }
        let next = c * (c_f * &a_pow_fact[k] + integer(k as i64) * sum);
        m.push(next);
    }
    Ok(PowerSeries::new(m))
}

/// Formal solution of `c′ = G + (tGc)′`, `c(0) = M0`, order by order:
/// `(k+1)c_{k+1} = g_k + (k+1) Σ_{j=0}^{k} g_j c_{k−j}`.
pub fn ode_series_solve(g: &PowerSeries, m0: &BigRational, k_max: usize) -> Result<PowerSeries> {
    if g.k_max() < k_max {
        bail!(InvalidParameter, "G must have at least {k_max} coefficients");
    }
    let mut c: Vec<BigRational> = Vec::with_capacity(k_max + 1);
    c.push(m0.clone());
    for k in 0..k_max {
        let kp1 = integer(k as i64 + 1);
        let conv = (0..=k).fold(BigRational::zero(), |acc, j| acc + g.coeff(j) * &c[k - j]);
        let next = (g.coeff(k) + &kp1 * conv) / kp1;
        c.push(next);
    }
    Ok(PowerSeries::new(c))
}

/// Formal solution of `c′ = G_f + t(Gc)′`, `c(0) = M0`, whose factorially
/// scaled coefficients `k!·c_k` reproduce [`majorant_recursion`] exactly when
/// `G = C/(1−At)` and `G_f = C·C_f/(1−At)`.
pub fn recursion_ode_solve(g: &PowerSeries, g_f: &PowerSeries, m0: &BigRational, k_max: usize) -> Result<PowerSeries> {
    if g.k_max() < k_max || g_f.k_max() < k_max {
        bail!(InvalidParameter, "G and G_f must have at least {k_max} coefficients");
    }
    let mut c: Vec<BigRational> = Vec::with_capacity(k_max + 1);
    c.push(m0.clone());
    for k in 0..k_max {
        let conv = (0..=k).fold(BigRational::zero(), |acc, j| acc + g.coeff(j) * &c[k - j]);
        let next = (g_f.coeff(k) + integer(k as i64) * conv) / integer(k as i64 + 1);
        c.push(next);
    }
    Ok(PowerSeries::new(c))
}

/// Series of the closed form `c(t) = (M0 + ∫_0^t G)/(1 − tG(t))` for
/// `G = C/(1−At)`, where `∫_0^t G = −(C/A) ln(1−At)` (or `Ct` when `A = 0`).
pub fn closed_form_solution(c: &BigRational, a: &BigRational, m0: &BigRational, k_max: usize) -> Result<PowerSeries> {
    check_nonnegative(&[("A", a)])?;
    // −(C/A) ln(1−At) = C Σ_{k≥1} A^{k−1} t^k / k
    let mut numer = PowerSeries::zero(k_max).add(&PowerSeries::constant(m0.clone(), k_max));
    let mut coeffs = numer.coefficients().to_vec();
    let mut a_pow = BigRational::one();
    for (k, slot) in coeffs.iter_mut().enumerate().skip(1) {
        *slot += c * &a_pow / integer(k as i64);
        a_pow *= a;
    }
    numer = PowerSeries::new(coeffs);
    let g = geometric_majorant(c, a, k_max)?.series;
    let denom = PowerSeries::constant(BigRational::one(), k_max).sub(&g.shift(1));
    numer.div(&denom)
}

/// First `k` with `M_k > scale·M̃_k`, comparing in exact arithmetic.
pub fn dominate_check(m: &NormSequence, m_tilde: &PowerSeries, scale: &BigRational) -> Option<usize> {
    let len = m.values.len().min(m_tilde.coefficients().len());
    (0..len).find(|&k| {
        let mk = BigRational::from_float(m.values[k]).unwrap_or_else(BigRational::zero);
        mk > scale * m_tilde.coeff(k)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Ratios of the raw coefficients.
    Plain,
    /// Ratios of `c_k / k!`.
    Factorial,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusEstimate {
    /// Extrapolated radius; infinite for an all-zero tail.
    pub radius: f64,
    /// Last ratio `|c_k / c_{k+1}|` used.
    pub last_ratio: f64,
    pub infinite: bool,
}

/// Ratio-test radius: ratios `ρ_k = |c_k/c_{k+1}|` over the last third of the
/// coefficients are fitted linearly in `1/k` and extrapolated to `k = ∞`.
pub fn series_radius(series: &PowerSeries, normalization: Normalization) -> RadiusEstimate {
    let coeffs = match normalization {
        Normalization::Plain => series.coefficients().to_vec(),
        Normalization::Factorial => PowerSeries::from_derivatives(series.coefficients())
            .coefficients()
            .to_vec(),
    };
    let k_max = coeffs.len().saturating_sub(1);
    let start = (2 * k_max / 3).max(1);
    let mut pts = Vec::new();
    for k in start..k_max {
        if coeffs[k].is_zero() || coeffs[k + 1].is_zero() {
            continue;
        }
        let ratio = (&coeffs[k] / &coeffs[k + 1]).abs();
        if let Some(r) = ratio.to_f64() {
            pts.push((1.0 / k as f64, r));
        }
    }
    match pts.len() {
        0 => RadiusEstimate {
            radius: f64::INFINITY,
            last_ratio: f64::INFINITY,
            infinite: true,
        },
        1 => RadiusEstimate {
            radius: pts[0].1,
            last_ratio: pts[0].1,
            infinite: false,
        },
        n => {
            let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
            let (mx, my) = (sx / n as f64, sy / n as f64);
            let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), p| {
                (a + (p.0 - mx) * (p.1 - my), b + (p.0 - mx) * (p.0 - mx))
            });
            let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
            RadiusEstimate {
                radius: my - slope * mx,
                last_ratio: pts[n - 1].1,
                infinite: false,
            }
        }
    }
}

/// Rational upper bound `≥ x` with about nine significant digits.
pub fn round_up(x: f64) -> BigRational {
    if !(x > 0.0) {
        return BigRational::zero();
    }
    let exp = libm::floor(libm::log10(x)) as i32;
    let shift = 8 - exp;
    let ten = BigInt::from(10);
    let scaled = BigRational::from_float(x).unwrap_or_else(BigRational::zero) * pow10(&ten, shift);
    (scaled.floor() + BigRational::one()) / pow10(&ten, shift)
}

fn pow10(ten: &BigInt, e: i32) -> BigRational {
    let p = BigRational::from_integer(num_traits::pow(ten.clone(), e.unsigned_abs() as usize));
    if e >= 0 {
        p
    } else {
        p.recip()
    }
}

/// Rational stand-in for `2e` that bounds it from above.
pub fn two_e_upper() -> BigRational {
    BigRational::new(BigInt::from(5437), BigInt::from(1000))
}

/// Constants of a majorant built from a measured ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct DominationConstants {
    /// Rational upper bound of `max C_k` from the recursive estimate.
    pub c: BigRational,
    pub c_f: BigRational,
    /// `max(A_f, twoE·H)`.
    pub a: BigRational,
    /// Fitted growth rate of `N`.
    pub a_f: f64,
    pub m0: BigRational,
    /// The per-order constants `C_k` behind `c`.
    pub c_k: Vec<f64>,
}

/// Fits `C`, `C_f`, `A`, `M0` so that the recursion dominates `M` by
/// induction: `C ≥ C_k` for `k < K`, `A ≥ A_f` and `A ≥ twoE·H`, and
/// `N_k ≤ C_f A^k k!`.
pub fn fit_domination_constants(
    m: &NormSequence,
    n: &NormSequence,
    h: f64,
    k_max: usize,
) -> Result<DominationConstants> {
    if k_max == 0 || m.values.len() < k_max + 1 || n.values.len() < k_max {
        bail!(InvalidParameter, "ladders must cover k up to {k_max}");
    }
    let c_k = check_recursive_estimate(m, n, h, TWO_E, 0..=k_max - 1)?;
    let c_max = c_k.iter().fold(0.0f64, |a, &b| a.max(b));
    let a_f = analyticity_radius(n)
        .map(|fit| if fit.polynomial { 0.0 } else { fit.fitted_a })
        .unwrap_or(0.0);
    let h_r = round_up(h);
    let two_e_h = two_e_upper() * h_r;
    let a_f_r = round_up(a_f);
    let a = if a_f_r > two_e_h { a_f_r } else { two_e_h };
    let a_f64 = a.to_f64().unwrap_or(f64::INFINITY);
    let mut ratio_max = 0.0f64;
    let mut denom = 1.0f64;
    for (k, &nk) in n.values.iter().enumerate().take(k_max) {
        if k > 0 {
            denom *= a_f64 * k as f64;
        }
        ratio_max = ratio_max.max(nk / denom);
    }
    Ok(DominationConstants {
        c: round_up(c_max * (1.0 + 1e-9)),
        c_f: round_up(ratio_max * (1.0 + 1e-9)),
        a,
        a_f,
        m0: round_up(m.values[0]),
        c_k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ladder::{NormKind, WeightConvention};
    use crate::series::{factorial, rational};

    #[test]
    fn geometric_coefficients() {
        let g = geometric_majorant(&integer(2), &integer(3), 6).unwrap();
        for k in 0..=6 {
            assert_eq!(g.series.coeff(k), integer(2 * 3i64.pow(k as u32)));
        }
        let unit = geometric_majorant(&integer(1), &integer(0), 4).unwrap();
        assert_eq!(unit.series, PowerSeries::constant(integer(1), 4));
        assert!(geometric_majorant(&integer(1), &integer(-1), 4).is_err());
        assert_eq!(g.closed_form(), "2/(1 - 3*t)");
    }

    #[test]
    fn recursion_a_zero_closed_form() {
        let (c, cf) = (rational(3, 2), integer(5));
        let m = majorant_recursion(&c, &cf, &integer(0), &integer(7), 25).unwrap();
        assert_eq!(m.coeff(0), integer(7));
        for k in 1..=25usize {
            let want = num_traits::pow(c.clone(), k) * &cf * factorial(k - 1);
            assert_eq!(m.coeff(k), want);
        }
    }

    #[test]
    fn recursion_generic_values() {
        let one = integer(1);
        let m = majorant_recursion(&one, &one, &one, &one, 3).unwrap();
        assert_eq!(m.coeff(1), integer(1));
        assert_eq!(m.coeff(2), integer(3));
        let z = majorant_recursion(&one, &integer(0), &one, &integer(0), 10).unwrap();
        assert!(z.coefficients().iter().all(|v| v.is_zero()));
    }

    #[test]
    fn ode_solution_matches_closed_form() {
        for (c, a, m0) in [
            (integer(1), integer(1), integer(1)),
            (rational(2, 3), rational(5, 2), integer(3)),
            (integer(2), integer(0), rational(1, 7)),
        ] {
            let g = geometric_majorant(&c, &a, 25).unwrap().series;
            let ode = ode_series_solve(&g, &m0, 25).unwrap();
            assert_eq!(ode, closed_form_solution(&c, &a, &m0, 25).unwrap());
            // c′ − G − (tGc)′ vanishes through order K_max − 1
            let residual = ode
                .derivative()
                .sub(&g.truncated(24))
                .sub(&g.mul(&ode).shift(1).derivative());
            assert!(residual.coefficients().iter().all(|v| v.is_zero()));
        }
        let zero = ode_series_solve(&PowerSeries::zero(8), &integer(4), 8).unwrap();
        assert_eq!(zero, PowerSeries::constant(integer(4), 8));
    }

    #[test]
    fn recursion_equals_scaled_recursion_ode() {
        let (c, cf, a, m0) = (rational(3, 2), rational(1, 3), rational(7, 4), integer(2));
        let g = geometric_majorant(&c, &a, 25).unwrap().series;
        let gf = g.scale(&cf);
        let ode = recursion_ode_solve(&g, &gf, &m0, 25).unwrap();
        let rec = majorant_recursion(&c, &cf, &a, &m0, 25).unwrap();
        assert_eq!(ode.derivatives_at_zero(), rec.coefficients());
        // the integrated-form ODE carries (k+1) where the recursion has k
        let integrated = ode_series_solve(&g.scale(&cf.clone().max(integer(1))), &m0, 25).unwrap();
        let integrated_scaled = integrated.derivatives_at_zero();
        assert!((0..=25).all(|k| integrated_scaled[k] >= rec.coeff(k)));
    }

    #[test]
    fn domination_index() {
        let m = majorant_recursion(&integer(1), &integer(1), &integer(1), &integer(1), 6).unwrap();
        let vals: Vec<f64> = m.coefficients().iter().map(|v| v.to_f64().unwrap()).collect();
        let seq = NormSequence::new(NormKind::M, vals.clone(), WeightConvention::PowK).unwrap();
        assert_eq!(dominate_check(&seq, &m, &integer(1)), None);
        let mut bumped = vals;
        bumped[4] += 1.0;
        let seq = NormSequence::new(NormKind::M, bumped, WeightConvention::PowK).unwrap();
        assert_eq!(dominate_check(&seq, &m, &integer(1)), Some(4));
    }

    #[test]
    fn radius_estimates() {
        let g = geometric_majorant(&integer(1), &integer(4), 24).unwrap().series;
        assert!((series_radius(&g, Normalization::Plain).radius - 0.25).abs() < 1e-12);
        let fact = PowerSeries::new(g.derivatives_at_zero());
        assert!((series_radius(&fact, Normalization::Factorial).radius - 0.25).abs() < 1e-12);
        let rec = majorant_recursion(&integer(2), &integer(1), &integer(0), &integer(1), 25).unwrap();
        assert!((series_radius(&rec, Normalization::Factorial).radius - 0.5).abs() < 1e-9);
        assert!(series_radius(&PowerSeries::zero(9), Normalization::Plain).infinite);
    }

    #[test]
    fn round_up_bounds() {
        for x in [1e-7, 0.3, 1.0, core::f64::consts::E, 12345.678] {
            let r = round_up(x);
            assert!(r >= BigRational::from_float(x).unwrap());
            assert!((r.to_f64().unwrap() - x) / x < 1e-7);
        }
        assert!(two_e_upper().to_f64().unwrap() > 2.0 * core::f64::consts::E);
    }
}
