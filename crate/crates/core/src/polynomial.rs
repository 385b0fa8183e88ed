//! Exact multivariate polynomials with integer coefficients. Used as an
//! independent reference for the higher-order chain rule: compositions are
//! expanded symbolically and differentiated term by term.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{bail, Result};

/// `Σ c_β x^β` over `nvars` variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u8>, BigInt>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: BigInt) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// The coordinate `x_i`.
    pub fn variable(nvars: usize, i: usize) -> Self {
        let mut e = vec![0u8; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, BigInt::one());
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u8>, BigInt)>) -> Result<Self> {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                bail!(InvalidParameter, "exponent {e:?} does not have {nvars} entries");
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, e: Vec<u8>, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e.clone()).or_insert_with(BigInt::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u8>, &BigInt)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&d| d as usize).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::constant(self.nvars, BigInt::one()), |acc, _| acc.mul(self))
    }

    /// `∂/∂x_i`.
    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[i] -= 1;
            out.add_term(d, c * BigInt::from(e[i]));
        }
        out
    }

    /// `∂^α`.
    pub fn partial(&self, alpha: &[u8]) -> Self {
        let mut out = self.clone();
        for (i, &a) in alpha.iter().enumerate() {
            for _ in 0..a {
                out = out.derivative(i);
            }
        }
        out
    }

    /// `self(g_1, …, g_m)` where `self` has `m` variables.
    pub fn compose(&self, g: &[Polynomial]) -> Result<Self> {
        if g.len() != self.nvars {
            bail!(
                InvalidParameter,
                "need {} inner polynomials, got {}",
                self.nvars,
                g.len()
            );
        }
        let inner = g.first().map_or(0, |p| p.nvars);
        if g.iter().any(|p| p.nvars != inner) {
            bail!(InvalidParameter, "inner polynomials must share their variables");
        }
        let mut powers: Vec<Vec<Polynomial>> = g
            .iter()
            .map(|p| vec![Self::constant(inner, BigInt::one()), p.clone()])
            .collect();
        let mut out = Self::zero(inner);
        for (e, c) in &self.terms {
            let mut term = Self::constant(inner, c.clone());
            for (i, &d) in e.iter().enumerate() {
                while powers[i].len() <= d as usize {
                    let next = powers[i].last().unwrap().mul(&g[i]);
                    powers[i].push(next);
                }
                term = term.mul(&powers[i][d as usize]);
            }
            out = out.add(&term);
        }
        Ok(out)
    }

    pub fn eval(&self, x: &[BigInt]) -> BigInt {
        self.terms.iter().fold(BigInt::zero(), |acc, (e, c)| {
            let mono = e
                .iter()
                .zip(x)
                .fold(BigInt::one(), |m, (&d, xi)| m * num_traits::pow(xi.clone(), d as usize));
            acc + c * mono
        })
    }
}

/// All multiindices over `nvars` variables with `|β| ≤ order`.
pub fn multiindices_up_to(nvars: usize, order: usize) -> Vec<Vec<u8>> {
    let mut out = vec![vec![0u8; nvars]];
    let mut frontier = out.clone();
    for _ in 0..order {
        let mut next = Vec::new();
        for e in &frontier {
            // extend only at or after the last nonzero slot to avoid repeats
            let start = e.iter().rposition(|&d| d > 0).unwrap_or(0);
            for i in start..nvars {
                let mut f = e.clone();
                f[i] += 1;
                next.push(f);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Derivative tables for `f∘g` at the integer point `x`: `∂^β f(g(x))` for
/// `|β| ≤ order` and `∂^γ g_i(x)` for `|γ| ≤ order`.
pub type ChainTables = (BTreeMap<Vec<u8>, BigInt>, Vec<BTreeMap<Vec<u8>, BigInt>>);

pub fn chain_rule_tables(f: &Polynomial, g: &[Polynomial], x: &[BigInt], order: usize) -> ChainTables {
    let y: Vec<BigInt> = g.iter().map(|p| p.eval(x)).collect();
    let f_tab = multiindices_up_to(f.nvars(), order)
        .into_iter()
        .map(|b| {
            let v = f.partial(&b).eval(&y);
            (b, v)
        })
        .collect();
    let m1 = x.len();
    let g_tab = g
        .iter()
        .map(|p| {
            multiindices_up_to(m1, order)
                .into_iter()
                .map(|c| {
                    let v = p.partial(&c).eval(x);
                    (c, v)
                })
                .collect()
        })
        .collect();
    (f_tab, g_tab)
}
