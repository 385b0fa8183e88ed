//! Exact lemma suites: the binomial estimate, the chain rule against symbolic
//! composition, Bell-number counts, the length-only reduction and the
//! majorant closed forms.

use std::collections::HashMap;

use fraclab_core::chainrule::{
    binomial_sweep, evaluate_terms, faa_di_bruno_terms, univariate_reduction_check, univariate_term_count,
    CompositionTerm,
};
use fraclab_core::majorant::{closed_form_solution, geometric_majorant, majorant_recursion, ode_series_solve};
use fraclab_core::polynomial::{chain_rule_tables, multiindices_up_to, Polynomial};
use fraclab_core::series::{factorial, integer};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::VerifyConfig;
use crate::error::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    pub detail: String,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }

    pub fn table(&self) -> String {
        let mut out = format!("{:<28} {:>8} {:>9}  {}\n", "suite", "cases", "failures", "status");
        for s in &self.suites {
            out.push_str(&format!(
                "{:<28} {:>8} {:>9}  {}  {}\n",
                s.name,
                s.cases,
                s.failures,
                if s.passed() { "PASS" } else { "FAIL" },
                s.detail
            ));
        }
        out
    }
}

pub fn run(config: &VerifyConfig, seed: u64) -> Result<VerifyReport, CliError> {
    Ok(VerifyReport {
        seed,
        suites: vec![
            binomial_suite(config.binomial_k_max)?,
            chain_rule_suite(seed, config.chain_rule_pairs, config.chain_rule_order)?,
            bell_suite()?,
            reduction_suite(seed, config.reduction_draws)?,
            majorant_suite(25)?,
        ],
    })
}

pub fn binomial_suite(k_max: usize) -> Result<SuiteResult, CliError> {
    let failures = binomial_sweep(k_max)?;
    let cases = k_max.saturating_sub(1) * k_max / 2;
    Ok(SuiteResult {
        name: "binomial_estimate".into(),
        cases,
        failures: failures.len(),
        detail: match failures.first() {
            Some((k, l)) => format!("first failure at k = {k}, l = {l}"),
            None => format!("0 < l < k <= {k_max}"),
        },
    })
}

fn random_polynomial(rng: &mut ChaCha8Rng, nvars: usize, degree: usize) -> Polynomial {
    let terms: Vec<(Vec<u8>, BigInt)> = multiindices_up_to(nvars, degree)
        .into_iter()
        .filter_map(|e| rng.gen_bool(0.5).then(|| (e, BigInt::from(rng.gen_range(-5i64..=5)))))
        .collect();
    Polynomial::from_terms(nvars, terms).expect("exponents sized by construction")
}

/// Chain-rule expansions against symbolic differentiation of the composed
/// polynomial, for every `1 ≤ |α| ≤ max_order`.
pub fn chain_rule_suite(seed: u64, pairs: usize, max_order: usize) -> Result<SuiteResult, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cache: HashMap<(Vec<u8>, usize), Vec<CompositionTerm>> = HashMap::new();
    let (mut cases, mut failures) = (0, 0);
    let mut first = None;
    for pair in 0..pairs {
        let m1 = rng.gen_range(1..=3);
        let m2 = rng.gen_range(1..=3);
        let f = random_polynomial(&mut rng, m2, 3);
        let g: Vec<Polynomial> = (0..m2).map(|_| random_polynomial(&mut rng, m1, 3)).collect();
        let x: Vec<BigInt> = (0..m1).map(|_| BigInt::from(rng.gen_range(-2i64..=2))).collect();
        let h = f.compose(&g)?;
        let (f_tab, g_tab) = chain_rule_tables(&f, &g, &x, max_order);
        for alpha in multiindices_up_to(m1, max_order).into_iter().skip(1) {
            let key = (alpha.clone(), m2);
            if !cache.contains_key(&key) {
                cache.insert(key.clone(), faa_di_bruno_terms(&alpha, m2)?);
            }
            let got: BigInt = evaluate_terms(&cache[&key], m2, &f_tab, &g_tab)?;
            cases += 1;
            if got != h.partial(&alpha).eval(&x) {
                failures += 1;
                first.get_or_insert(format!("pair {pair}, alpha {alpha:?}"));
            }
        }
    }
    Ok(SuiteResult {
        name: "chain_rule_oracle".into(),
        cases,
        failures,
        detail: first.unwrap_or_else(|| format!("{pairs} polynomial pairs, |alpha| <= {max_order}")),
    })
}

pub const BELL: [u64; 5] = [1, 2, 5, 15, 52];

pub fn bell_suite() -> Result<SuiteResult, CliError> {
    let counts = (1..=5).map(univariate_term_count).collect::<Result<Vec<_>, _>>()?;
    let failures = counts.iter().zip(BELL).filter(|(a, b)| **a != *b).count();
    Ok(SuiteResult {
        name: "bell_numbers".into(),
        cases: 5,
        failures,
        detail: format!("{counts:?}"),
    })
}

fn random_rational(rng: &mut ChaCha8Rng) -> BigRational {
    BigRational::new(
        BigInt::from(rng.gen_range(-50i64..=50)),
        BigInt::from(rng.gen_range(1i64..=12)),
    )
}

/// Length-only reduction on random `α`, `m2` and rational `a`, `b`.
pub fn reduction_suite(seed: u64, draws: usize) -> Result<SuiteResult, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut failures = 0;
    let mut first = None;
    for draw in 0..draws {
        let m1 = rng.gen_range(1..=3);
        let m2 = rng.gen_range(1..=3);
        let mut alpha = vec![0u8; m1];
        let order = rng.gen_range(1..=6);
        for _ in 0..order {
            alpha[rng.gen_range(0..m1)] += 1;
        }
        let a: Vec<BigRational> = (0..=order).map(|_| random_rational(&mut rng)).collect();
        let b: Vec<BigRational> = (0..=order).map(|_| random_rational(&mut rng)).collect();
        let (multi, uni) = univariate_reduction_check(&alpha, m2, &a, &b)?;
        if multi != uni {
            failures += 1;
            first.get_or_insert(format!("draw {draw}, alpha {alpha:?}, m2 {m2}"));
        }
    }
    Ok(SuiteResult {
        name: "length_only_reduction".into(),
        cases: draws,
        failures,
        detail: first.unwrap_or_else(|| "exact rational equality".into()),
    })
}

/// `A = 0` recursion against `C^k C_f (k−1)!` and the series solution of the
/// comparison ODE against its integrated closed form.
pub fn majorant_suite(k_max: usize) -> Result<SuiteResult, CliError> {
    let mut failures = 0;
    let mut cases = 0;
    for (c, cf) in [
        (integer(2), integer(3)),
        (BigRational::new(3.into(), 2.into()), integer(1)),
    ] {
        let m = majorant_recursion(&c, &cf, &integer(0), &integer(1), k_max)?;
        for k in 1..=k_max {
            cases += 1;
            if m.coeff(k) != num_traits::pow(c.clone(), k) * &cf * factorial(k - 1) {
                failures += 1;
            }
        }
    }
    for (c, a, m0) in [
        (integer(1), integer(1), integer(1)),
        (
            BigRational::new(2.into(), 3.into()),
            BigRational::new(5.into(), 2.into()),
            integer(3),
        ),
    ] {
        let g = geometric_majorant(&c, &a, k_max)?.series;
        cases += 1;
        if ode_series_solve(&g, &m0, k_max)? != closed_form_solution(&c, &a, &m0, k_max)? {
            failures += 1;
        }
    }
    Ok(SuiteResult {
        name: "majorant_closed_forms".into(),
        cases,
        failures,
        detail: format!("K_max = {k_max}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        assert!(binomial_suite(40).unwrap().passed());
        assert!(chain_rule_suite(3, 4, 4).unwrap().passed());
        assert!(bell_suite().unwrap().passed());
        assert!(reduction_suite(3, 20).unwrap().passed());
        assert!(majorant_suite(12).unwrap().passed());
    }

    #[test]
    fn table_lists_every_suite() {
        let report = VerifyReport {
            seed: 0,
            suites: vec![bell_suite().unwrap()],
        };
        assert!(report.table().contains("bell_numbers"));
        assert!(report.all_passed());
    }
}
