//! Higher-order chain rule for `∂^α(f∘g)`, `g: R^{m1} → R^{m2}`, built by
//! repeated differentiation, plus the length-only reduction, the composition
//! bound for `N_k` and the binomial estimate `k^k/((k−l)^{k−l} l^l) ≤ (2e)^l binom(k,l)`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Zero};

use crate::error::{bail, Error, Result};
use crate::ladder::NormSequence;
use crate::series::{binomial, integer};

/// Largest `|α|` accepted by [`faa_di_bruno_terms`].
pub const MAX_CHAIN_ORDER: usize = 8;

/// One inner factor `∂^γ g_i`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Factor {
    pub component: usize,
    pub gamma: Vec<u8>,
}

impl Factor {
    pub fn order(&self) -> usize {
        self.gamma.iter().map(|&d| d as usize).sum()
    }
}

/// `coefficient · ∂_{i_1…i_m} f(g) · Π_j ∂^{γ_j} g_{i_j}` with factors sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositionTerm {
    pub factors: Vec<Factor>,
    pub coefficient: u64,
}

impl CompositionTerm {
    /// The outer order `m`.
    pub fn outer_order(&self) -> usize {
        self.factors.len()
    }

    /// Component indices `i_1 ≤ … ≤ i_m`.
    pub fn outer_indices(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.component).collect()
    }

    /// Outer derivative as a multiindex over the `m2` outer variables.
    pub fn outer_multiindex(&self, m2: usize) -> Vec<u8> {
        let mut beta = vec![0u8; m2];
        for f in &self.factors {
            beta[f.component] += 1;
        }
        beta
    }
}

/// Complete expansion of `∂^α(f∘g)` for `α` over `m1 = alpha.len()` variables.
pub fn faa_di_bruno_terms(alpha: &[u8], m2: usize) -> Result<Vec<CompositionTerm>> {
    let order: usize = alpha.iter().map(|&a| a as usize).sum();
    if order > MAX_CHAIN_ORDER {
        return Err(Error::Unsupported(alloc::format!(
            "chain-rule order {order} exceeds {MAX_CHAIN_ORDER}"
        )));
    }
    if alpha.is_empty() || m2 == 0 {
        bail!(InvalidParameter, "need m1 ≥ 1 and m2 ≥ 1");
    }
    let m1 = alpha.len();
    let mut current: BTreeMap<Vec<Factor>, u64> = BTreeMap::new();
    current.insert(Vec::new(), 1);
    for (p, &count) in alpha.iter().enumerate() {
        for _ in 0..count {
            let mut next: BTreeMap<Vec<Factor>, u64> = BTreeMap::new();
            for (factors, &coef) in &current {
                // the outer derivative picks up one more ∂_i f, paired with ∂_p g_i
                for i in 0..m2 {
                    let mut gamma = vec![0u8; m1];
                    gamma[p] = 1;
                    let mut f = factors.clone();
                    f.push(Factor { component: i, gamma });
                    f.sort();
                    *next.entry(f).or_insert(0) += coef;
                }
                for j in 0..factors.len() {
                    let mut f = factors.clone();
                    f[j].gamma[p] += 1;
                    f.sort();
                    *next.entry(f).or_insert(0) += coef;
                }
            }
            current = next;
        }
    }
    Ok(current
        .into_iter()
        .filter(|(f, _)| !f.is_empty() || order == 0)
        .map(|(factors, coefficient)| CompositionTerm { factors, coefficient })
        .collect())
}

/// Evaluates `Σ coefficient · ∂^β f · Π ∂^{γ_j} g_{i_j}` from tables keyed by
/// multiindex: `f_derivs[β]` over the outer variables, `g_derivs[i][γ]`.
pub fn evaluate_composition_derivative<T>(
    f_derivs: &BTreeMap<Vec<u8>, T>,
    g_derivs: &[BTreeMap<Vec<u8>, T>],
    alpha: &[u8],
) -> Result<T>
where
    T: Clone + Zero + FromPrimitive + Add<Output = T> + Mul<Output = T>,
{
    let m2 = g_derivs.len();
    let terms = faa_di_bruno_terms(alpha, m2)?;
    evaluate_terms(&terms, m2, f_derivs, g_derivs)
}

/// As [`evaluate_composition_derivative`] for an expansion computed once and
/// reused across tables.
pub fn evaluate_terms<T>(
    terms: &[CompositionTerm],
    m2: usize,
    f_derivs: &BTreeMap<Vec<u8>, T>,
    g_derivs: &[BTreeMap<Vec<u8>, T>],
) -> Result<T>
where
    T: Clone + Zero + FromPrimitive + Add<Output = T> + Mul<Output = T>,
{
    let mut total = T::zero();
    for term in terms {
        let beta = term.outer_multiindex(m2);
        let mut value = f_derivs
            .get(&beta)
            .cloned()
            .ok_or_else(|| Error::MissingDerivative(alloc::format!("outer derivative {beta:?}")))?;
        for factor in &term.factors {
            let g = g_derivs[factor.component].get(&factor.gamma).cloned().ok_or_else(|| {
                Error::MissingDerivative(alloc::format!(
                    "inner derivative {:?} of component {}",
                    factor.gamma,
                    factor.component
                ))
            })?;
            value = value * g;
        }
        let c = T::from_u64(term.coefficient)
            .ok_or_else(|| Error::Invariant(alloc::format!("coefficient {} not representable", term.coefficient)))?;
        total = total + c * value;
    }
    Ok(total)
}

/// Length-only evaluation of the multivariate expansion next to the
/// univariate one of order `|α|`.
///
/// The univariate side uses `f^{(m)} = a_m`, `g^{(l)} = b_l`. On the
/// multivariate side every `∂^γ g_i` is `b_{|γ|}` and every outer derivative of
/// order `m` is `a_m / m2^m`, which is what `f(y) = f̃((y_1+…+y_{m2})/m2)`
/// produces; with that normalization the two values agree exactly.
pub fn univariate_reduction_check(
    alpha: &[u8],
    m2: usize,
    a: &[BigRational],
    b: &[BigRational],
) -> Result<(BigRational, BigRational)> {
    let order: usize = alpha.iter().map(|&d| d as usize).sum();
    if a.len() <= order || b.len() <= order {
        bail!(InvalidParameter, "need a and b indexed by lengths 0..={order}");
    }
    let multi = faa_di_bruno_terms(alpha, m2)?;
    let mut lhs = BigRational::zero();
    let m2r = integer(m2 as i64);
    for term in &multi {
        let m = term.outer_order();
        let mut v = &a[m] / num_traits::pow(m2r.clone(), m);
        for f in &term.factors {
            v *= &b[f.order()];
        }
        lhs += v * integer(term.coefficient as i64);
    }
    let uni = faa_di_bruno_terms(&[order as u8], 1)?;
    let mut rhs = BigRational::zero();
    for term in &uni {
        let mut v = a[term.outer_order()].clone();
        for f in &term.factors {
            v *= &b[f.order()];
        }
        rhs += v * integer(term.coefficient as i64);
    }
    Ok((lhs, rhs))
}

/// `P^k` evaluated with outer derivatives `Ñ_m` and the structure of
/// `g = (x, u)`: `∂g_x = 1`, higher derivatives of the coordinate slot vanish,
/// and `∂^l u` is weighted by `M̃_l`.
pub fn bound_nk_composition(n_tilde: &NormSequence, m_tilde: &NormSequence, k: usize) -> Result<f64> {
    if n_tilde.values.len() <= k || m_tilde.values.len() <= k {
        bail!(InvalidParameter, "sequences must cover 0..={k}");
    }
    if k == 0 {
        return Ok(n_tilde.values[0]);
    }
    let terms = faa_di_bruno_terms(&[k as u8], 2)?;
    let mut total = 0.0;
    for term in &terms {
        let mut v = term.coefficient as f64 * n_tilde.values[term.outer_order()];
        for f in &term.factors {
            v *= match (f.component, f.order()) {
                (0, 1) => 1.0,
                (0, _) => 0.0,
                (_, l) => m_tilde.values[l],
            };
        }
        total += v;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialCheck {
    /// `ln(k^k / ((k−l)^{k−l} l^l))`
    pub ln_lhs: f64,
    /// `ln((2e)^l binom(k, l))`
    pub ln_rhs: f64,
    pub holds: bool,
    /// Decided in exact rational arithmetic.
    pub exact: bool,
}

impl BinomialCheck {
    pub fn lhs(&self) -> f64 {
        libm::exp(self.ln_lhs)
    }

    pub fn rhs(&self) -> f64 {
        libm::exp(self.ln_rhs)
    }
}

/// Largest `k` decided in exact arithmetic.
pub const EXACT_BINOMIAL_LIMIT: usize = 150;
const LOG_SLACK: f64 = 1e-12;

fn e_bounds() -> (BigRational, BigRational) {
    let scale = BigInt::from(10u64).pow(15);
    (
        BigRational::new(BigInt::from(2_718_281_828_459_045u64), scale.clone()),
        BigRational::new(BigInt::from(2_718_281_828_459_046u64), scale),
    )
}

/// `k^k/((k−l)^{k−l} l^l) ≤ (2e)^l binom(k, l)` for `0 < l < k`.
///
/// Up to `k = 150` both sides are compared exactly, with `e` replaced by
/// rational bounds on either side; beyond that the comparison is done with
/// logarithms and a relative slack of `10⁻¹²` against the inequality.
pub fn binomial_inequality_check(k: usize, l: usize) -> Result<BinomialCheck> {
    if !(0 < l && l < k) {
        bail!(Domain, "need 0 < l < k, got k = {k}, l = {l}");
    }
    let (kf, lf) = (k as f64, l as f64);
    let ln_lhs = kf * libm::log(kf) - (kf - lf) * libm::log(kf - lf) - lf * libm::log(lf);
    let ln_binom = libm::lgamma(kf + 1.0) - libm::lgamma(lf + 1.0) - libm::lgamma(kf - lf + 1.0);
    let ln_rhs = lf * libm::log(2.0 * core::f64::consts::E) + ln_binom;
    let log_verdict = ln_lhs + LOG_SLACK * (1.0 + ln_rhs.abs()) <= ln_rhs;
    if k > EXACT_BINOMIAL_LIMIT {
        return Ok(BinomialCheck {
            ln_lhs,
            ln_rhs,
            holds: log_verdict,
            exact: false,
        });
    }
    let big = |v: usize, e: usize| BigInt::from(v).pow(e as u32);
    let lhs = BigRational::new(big(k, k), big(k - l, k - l) * big(l, l));
    let binom = BigRational::from_integer(binomial(k, l));
    let (e_lo, e_hi) = e_bounds();
    let two = integer(2);
    let rhs_lo = num_traits::pow(&two * e_lo, l) * &binom;
    let rhs_hi = num_traits::pow(&two * e_hi, l) * &binom;
    let (holds, exact) = if lhs <= rhs_lo {
        (true, true)
    } else if lhs > rhs_hi {
        (false, true)
    } else {
        (log_verdict, false)
    };
    Ok(BinomialCheck {
        ln_lhs,
        ln_rhs,
        holds,
        exact,
    })
}

/// Number of failures of the binomial estimate over `0 < l < k ≤ k_max`.
pub fn binomial_sweep(k_max: usize) -> Result<Vec<(usize, usize)>> {
    let mut failures = Vec::new();
    for k in 2..=k_max {
        for l in 1..k {
            if !binomial_inequality_check(k, l)?.holds {
                failures.push((k, l));
            }
        }
    }
    Ok(failures)
}

/// Number of univariate order-`k` terms counted with multiplicity, i.e. the
/// sum of the collected coefficients; equals the Bell number `B_k`.
pub fn univariate_term_count(k: usize) -> Result<u64> {
    Ok(faa_di_bruno_terms(&[k as u8], 1)?.iter().map(|t| t.coefficient).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ladder::{NormKind, WeightConvention};
    use crate::series::rational;

    fn univariate_signature(terms: &[CompositionTerm]) -> Vec<(Vec<usize>, u64)> {
        let mut v: Vec<(Vec<usize>, u64)> = terms
            .iter()
            .map(|t| (t.factors.iter().map(Factor::order).collect(), t.coefficient))
            .collect();
        v.sort();
        v
    }

    #[test]
    fn classical_low_orders() {
        let t2 = faa_di_bruno_terms(&[2], 1).unwrap();
        assert_eq!(univariate_signature(&t2), vec![(vec![1, 1], 1), (vec![2], 1)]);
        let t3 = faa_di_bruno_terms(&[3], 1).unwrap();
        assert_eq!(
            univariate_signature(&t3),
            vec![(vec![1, 1, 1], 1), (vec![1, 2], 3), (vec![3], 1)]
        );
        assert!(matches!(faa_di_bruno_terms(&[9], 1), Err(Error::Unsupported(_))));
    }

    #[test]
    fn bell_numbers() {
        // restricted-growth enumeration of set partitions
        fn partitions(n: usize) -> usize {
            fn go(i: usize, n: usize, max: usize) -> usize {
                if i == n {
                    return 1;
                }
                (0..=max + 1).map(|b| go(i + 1, n, max.max(b))).sum()
            }
            if n == 0 {
                1
            } else {
                go(1, n, 0)
            }
        }
        for k in 1..=7 {
            assert_eq!(univariate_term_count(k).unwrap(), partitions(k) as u64);
        }
        assert_eq!(
            (1..=5).map(|k| univariate_term_count(k).unwrap()).collect::<Vec<_>>(),
            vec![1, 2, 5, 15, 52]
        );
    }

    #[test]
    fn terms_conserve_alpha() {
        let alpha = [2u8, 1, 1];
        for t in faa_di_bruno_terms(&alpha, 3).unwrap() {
            assert!(t.coefficient >= 1);
            let mut sum = [0u8; 3];
            for f in &t.factors {
                assert!(f.order() >= 1);
                for (s, g) in sum.iter_mut().zip(&f.gamma) {
                    *s += g;
                }
            }
            assert_eq!(sum, alpha);
        }
    }

    #[test]
    fn identity_and_square() {
        // f(y) = y²,  g(x) = x  ⇒  (f∘g)″ = 2
        let f: BTreeMap<Vec<u8>, i64> = [(vec![0], 1), (vec![1], 2), (vec![2], 2)].into_iter().collect();
        let g: BTreeMap<Vec<u8>, i64> = [(vec![0], 1), (vec![1], 1), (vec![2], 0)].into_iter().collect();
        assert_eq!(evaluate_composition_derivative(&f, &[g], &[2]).unwrap(), 2);
        let missing: BTreeMap<Vec<u8>, i64> = BTreeMap::new();
        assert!(matches!(
            evaluate_composition_derivative(&missing, core::slice::from_ref(&missing), &[1]),
            Err(Error::MissingDerivative(_))
        ));
    }

    #[test]
    fn reduction_examples() {
        let ones: Vec<BigRational> = (0..6).map(|_| integer(1)).collect();
        let (l, r) = univariate_reduction_check(&[2, 1], 3, &ones, &ones).unwrap();
        assert_eq!(l, r);
        assert_eq!(r, integer(5));
        let zeros: Vec<BigRational> = (0..6).map(|_| integer(0)).collect();
        let (l, r) = univariate_reduction_check(&[1, 1, 1], 2, &zeros, &ones).unwrap();
        assert!(l.is_zero() && r.is_zero());
        let a: Vec<BigRational> = (0..6).map(|i| rational(i + 2, 3)).collect();
        let b: Vec<BigRational> = (0..6).map(|i| rational(5, i + 1)).collect();
        let (l, r) = univariate_reduction_check(&[2, 1], 3, &a, &b).unwrap();
        assert_eq!(l, r);
    }

    #[test]
    fn composition_bound_orders() {
        let seq = |v: Vec<f64>| NormSequence::new(NormKind::NTilde, v, WeightConvention::UnweightedB1).unwrap();
        let zero = seq(vec![0.0; 4]);
        let m = seq(vec![2.0, 3.0, 5.0, 7.0]);
        assert_eq!(bound_nk_composition(&zero, &m, 3).unwrap(), 0.0);
        // order 1: ∂_x f·1 + ∂_u f·M̃_1
        let n = seq(vec![1.0, 4.0, 6.0, 8.0]);
        assert_eq!(bound_nk_composition(&n, &m, 1).unwrap(), 4.0 * 1.0 + 4.0 * 3.0);
    }

    #[test]
    fn binomial_cases() {
        let c = binomial_inequality_check(2, 1).unwrap();
        assert!(c.holds && c.exact);
        assert!((c.lhs() - 4.0).abs() < 1e-12);
        assert!((c.rhs() - 4.0 * core::f64::consts::E).abs() < 1e-9);
        for k in [7usize, 40, 151, 300] {
            for l in (k / 2 + 1)..k {
                let a = binomial_inequality_check(k, l).unwrap();
                let b = binomial_inequality_check(k, k - l).unwrap();
                assert!((a.ln_lhs - b.ln_lhs).abs() < 1e-9);
                assert!(b.ln_rhs <= a.ln_rhs + 1e-9);
                assert!(a.holds && b.holds);
            }
        }
        assert!(binomial_inequality_check(5, 0).is_err());
        assert!(binomial_inequality_check(5, 5).is_err());
    }
}
