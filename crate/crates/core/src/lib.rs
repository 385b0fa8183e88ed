//! Numerical laboratory for translation-invariant nonlocal operators of the form
//!
//! ```text
//! Ku(x) = p.v. ∫ (u(x+y) − 2u(x) + u(x−y)) K(y) dy,   1 < s < 2,
//! ```
//!
//! together with the machinery used to study analyticity of solutions of
//! `Ku = f(x, u)`: weighted derivative seminorm ladders, exact majorant series,
//! the multivariate higher-order chain rule and scaled Schauder checks.
//!
//! The crate is `no_std` (with `alloc`). The default `std` feature enables
//! parallel row assembly through rayon.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` style guards are kept so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod chainrule;
pub mod chebyshev;
pub mod error;
pub mod field;
mod jet;
pub mod kernel;
pub mod ladder;
pub mod majorant;
pub mod operator;
pub mod polynomial;
pub mod quadrature;
pub mod schauder;
pub mod series;
pub mod solver;

pub use error::{Error, Result};
pub use field::{ExteriorRule, FieldFunction};
pub use kernel::{KernelForm, KernelSpec, Profile};
pub use ladder::{NormKind, NormSequence, WeightConvention};
pub use operator::{QuadratureParams, TailMode};
pub use series::PowerSeries;
