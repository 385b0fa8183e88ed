//! Truncated formal power series with exact rational coefficients.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{bail, Result};

/// `Σ_{k=0}^{K} c_k t^k`; arithmetic truncates at the shorter operand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerSeries {
    coeffs: Vec<BigRational>,
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn integer(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `k!` as a rational.
pub fn factorial(k: usize) -> BigRational {
    BigRational::from_integer((1..=k).fold(BigInt::one(), |acc, j| acc * BigInt::from(j)))
}

/// `binom(k, l)` as an integer.
pub fn binomial(k: usize, l: usize) -> BigInt {
    if l > k {
        return BigInt::zero();
    }
    let l = l.min(k - l);
    (0..l).fold(BigInt::one(), |acc, j| acc * BigInt::from(k - j) / BigInt::from(j + 1))
}

impl PowerSeries {
    pub fn new(coeffs: Vec<BigRational>) -> Self {
        Self { coeffs }
    }

    pub fn zero(k_max: usize) -> Self {
        Self {
            coeffs: vec![BigRational::zero(); k_max + 1],
        }
    }

    pub fn constant(c: BigRational, k_max: usize) -> Self {
        let mut s = Self::zero(k_max);
        s.coeffs[0] = c;
        s
    }

    /// The series `t` truncated at `k_max ≥ 1`.
    pub fn variable(k_max: usize) -> Self {
        let mut s = Self::zero(k_max.max(1));
        s.coeffs[1] = BigRational::one();
        s
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn k_max(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn truncated(&self, k_max: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(k_max + 1, BigRational::zero());
        Self { coeffs }
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().min(other.coeffs.len());
        Self {
            coeffs: (0..len).map(|k| &self.coeffs[k] + &other.coeffs[k]).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let len = self.coeffs.len().min(other.coeffs.len());
        Self {
            coeffs: (0..len).map(|k| &self.coeffs[k] - &other.coeffs[k]).collect(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Cauchy product truncated to the shorter length.
    pub fn mul(&self, other: &Self) -> Self {
        let len = self.coeffs.len().min(other.coeffs.len());
        let coeffs = (0..len)
            .map(|k| {
                (0..=k).fold(BigRational::zero(), |acc, j| {
                    if self.coeffs[j].is_zero() {
                        acc
                    } else {
                        acc + &self.coeffs[j] * &other.coeffs[k - j]
                    }
                })
            })
            .collect();
        Self { coeffs }
    }

    /// Formal derivative; the result is one order shorter.
    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero(0);
        }
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * integer(k as i64))
                .collect(),
        }
    }

    /// `∫_0^t`, keeping the same truncation order.
    pub fn integrate(&self) -> Self {
        let mut coeffs = vec![BigRational::zero(); self.coeffs.len()];
        for k in 1..self.coeffs.len() {
            coeffs[k] = &self.coeffs[k - 1] / integer(k as i64);
        }
        Self { coeffs }
    }

    /// Multiplication by `t^m`, keeping the same truncation order.
    pub fn shift(&self, m: usize) -> Self {
        let len = self.coeffs.len();
        let mut coeffs = vec![BigRational::zero(); len];
        if m < len {
            coeffs[m..].clone_from_slice(&self.coeffs[..len - m]);
        }
        Self { coeffs }
    }

    /// `1/self`; needs a nonzero constant term.
    pub fn reciprocal(&self) -> Result<Self> {
        if self.coeffs.is_empty() || self.coeffs[0].is_zero() {
            bail!(Domain, "series has no reciprocal: constant term is zero");
        }
        let len = self.coeffs.len();
        let inv0 = self.coeffs[0].recip();
        let mut out: Vec<BigRational> = Vec::with_capacity(len);
        out.push(inv0.clone());
        for k in 1..len {
            let acc = (1..=k).fold(BigRational::zero(), |acc, j| acc + &self.coeffs[j] * &out[k - j]);
            out.push(-acc * &inv0);
        }
        Ok(Self { coeffs: out })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.reciprocal()?))
    }

    /// `k!·c_k`, the derivatives at the origin.
    pub fn derivatives_at_zero(&self) -> Vec<BigRational> {
        let mut fact = BigRational::one();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                if k > 0 {
                    fact *= integer(k as i64);
                }
                c * &fact
            })
            .collect()
    }

    /// Inverse of [`Self::derivatives_at_zero`].
    pub fn from_derivatives(values: &[BigRational]) -> Self {
        let mut fact = BigRational::one();
        Self {
            coeffs: values
                .iter()
                .enumerate()
                .map(|(k, v)| {
                    if k > 0 {
                        fact *= integer(k as i64);
                    }
                    v / &fact
                })
                .collect(),
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative())
    }
}

impl fmt::Display for PowerSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})t")?,
                _ => write!(f, "({c})t^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
