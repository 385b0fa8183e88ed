//! Bounded functions on `R` stored as Chebyshev samples on `[−R, R]` together
//! with a closed-form rule for the exterior `|x| > R`.

use alloc::string::String;
use alloc::vec::Vec;

use crate::chebyshev::{barycentric_weights, interpolate, lobatto_nodes, ChebSeries};
use crate::error::{bail, Result};

/// Closed-form functions available outside the sampled ball.
#[derive(Debug, Clone, PartialEq)]
pub enum ExteriorRule {
    Zero,
    /// `amp · exp(−((x − center)/width)²)`
    Gaussian {
        amp: f64,
        center: f64,
        width: f64,
    },
    /// `amp · cos(freq·x + phase)`
    Cosine {
        amp: f64,
        freq: f64,
        phase: f64,
    },
    /// `intercept + slope·clamp(x, −limit, limit)`; a constant when `slope = 0`.
    ClampedAffine {
        intercept: f64,
        slope: f64,
        limit: f64,
    },
    /// `amp · exp(1 − 1/(1 − ((x − center)/radius)²))` inside the support.
    CompactBump {
        amp: f64,
        center: f64,
        radius: f64,
    },
    /// `amp / (1 + ((x − center)/width)²)`
    Lorentzian {
        amp: f64,
        center: f64,
        width: f64,
    },
}

impl ExteriorRule {
    pub fn constant(c: f64) -> Self {
        ExteriorRule::ClampedAffine {
            intercept: c,
            slope: 0.0,
            limit: 1.0,
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            ExteriorRule::Zero => "zero",
            ExteriorRule::Gaussian { .. } => "gaussian",
            ExteriorRule::Cosine { .. } => "cosine",
            ExteriorRule::ClampedAffine { .. } => "clamped_affine",
            ExteriorRule::CompactBump { .. } => "compact_bump",
            ExteriorRule::Lorentzian { .. } => "lorentzian",
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            ExteriorRule::Zero => 0.0,
            ExteriorRule::Gaussian { amp, center, width } => {
                let t = (x - center) / width;
                amp * libm::exp(-t * t)
            }
            ExteriorRule::Cosine { amp, freq, phase } => amp * libm::cos(freq * x + phase),
            ExteriorRule::ClampedAffine {
                intercept,
                slope,
                limit,
            } => intercept + slope * x.clamp(-limit, limit),
            ExteriorRule::CompactBump { amp, center, radius } => {
                let t = (x - center) / radius;
                if t.abs() >= 1.0 {
                    0.0
                } else {
                    amp * libm::exp(1.0 - 1.0 / (1.0 - t * t))
                }
            }
            ExteriorRule::Lorentzian { amp, center, width } => {
                let t = (x - center) / width;
                amp / (1.0 + t * t)
            }
        }
    }

    /// `sup |rule|` over the whole line.
    pub fn sup(&self) -> f64 {
        match *self {
            ExteriorRule::Zero => 0.0,
            ExteriorRule::Gaussian { amp, .. }
            | ExteriorRule::Cosine { amp, .. }
            | ExteriorRule::CompactBump { amp, .. }
            | ExteriorRule::Lorentzian { amp, .. } => amp.abs(),
            ExteriorRule::ClampedAffine {
                intercept,
                slope,
                limit,
            } => (intercept + slope * limit).abs().max((intercept - slope * limit).abs()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            ExteriorRule::Zero => true,
            ExteriorRule::Gaussian { amp, center, width } | ExteriorRule::Lorentzian { amp, center, width } => {
                amp.is_finite() && center.is_finite() && width > 0.0 && width.is_finite()
            }
            ExteriorRule::Cosine { amp, freq, phase } => amp.is_finite() && freq.is_finite() && phase.is_finite(),
            ExteriorRule::ClampedAffine {
                intercept,
                slope,
                limit,
            } => intercept.is_finite() && slope.is_finite() && limit > 0.0 && limit.is_finite(),
            ExteriorRule::CompactBump { amp, center, radius } => {
                amp.is_finite() && center.is_finite() && radius > 0.0 && radius.is_finite()
            }
        };
        if !ok {
            bail!(InvalidParameter, "invalid parameters for exterior rule {}", self.id());
        }
        Ok(())
    }

    /// The same rule multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        match *self {
            ExteriorRule::Zero => ExteriorRule::Zero,
            ExteriorRule::Gaussian { amp, center, width } => ExteriorRule::Gaussian {
                amp: c * amp,
                center,
                width,
            },
            ExteriorRule::Cosine { amp, freq, phase } => ExteriorRule::Cosine {
                amp: c * amp,
                freq,
                phase,
            },
            ExteriorRule::ClampedAffine {
                intercept,
                slope,
                limit,
            } => ExteriorRule::ClampedAffine {
                intercept: c * intercept,
                slope: c * slope,
                limit,
            },
            ExteriorRule::CompactBump { amp, center, radius } => ExteriorRule::CompactBump {
                amp: c * amp,
                center,
                radius,
            },
            ExteriorRule::Lorentzian { amp, center, width } => ExteriorRule::Lorentzian {
                amp: c * amp,
                center,
                width,
            },
        }
    }

    /// The rule composed with `x ↦ −x`.
    pub fn reflected(&self) -> Self {
        match *self {
            ExteriorRule::Gaussian { amp, center, width } => ExteriorRule::Gaussian {
                amp,
                center: -center,
                width,
            },
            ExteriorRule::Cosine { amp, freq, phase } => ExteriorRule::Cosine {
                amp,
                freq: -freq,
                phase,
            },
            ExteriorRule::ClampedAffine {
                intercept,
                slope,
                limit,
            } => ExteriorRule::ClampedAffine {
                intercept,
                slope: -slope,
                limit,
            },
            ExteriorRule::CompactBump { amp, center, radius } => ExteriorRule::CompactBump {
                amp,
                center: -center,
                radius,
            },
            ExteriorRule::Lorentzian { amp, center, width } => ExteriorRule::Lorentzian {
                amp,
                center: -center,
                width,
            },
            ExteriorRule::Zero => ExteriorRule::Zero,
        }
    }
}

/// Relative tolerance for interior/exterior agreement at `±R`.
pub const INTERFACE_TOL: f64 = 1e-8;

/// A bounded function on `R`: Chebyshev–Lobatto samples on `[−R, R]` plus an
/// exterior rule, with a global bound `sup_bound ≥ sup |u|`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldFunction {
    n: usize,
    radius: f64,
    nodes: Vec<f64>,
    values: Vec<f64>,
    weights: Vec<f64>,
    series: ChebSeries,
    exterior: ExteriorRule,
    sup_bound: f64,
}

impl FieldFunction {
    /// Wraps samples taken at the `values.len()` Lobatto nodes of `[−R, R]`.
    pub fn new(radius: f64, values: Vec<f64>, exterior: ExteriorRule, sup_bound: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            bail!(InvalidParameter, "radius must be positive");
        }
        if values.len() < 3 {
            bail!(
                InvalidParameter,
                "need at least 3 interior samples, got {}",
                values.len()
            );
        }
        exterior.validate()?;
        if values.iter().any(|v| !v.is_finite()) {
            bail!(InvalidParameter, "interior values must be finite");
        }
        if !(sup_bound >= 0.0 && sup_bound.is_finite()) {
            bail!(InvalidParameter, "sup_bound must be finite and nonnegative");
        }
        let slack = 1e-12 * sup_bound.max(1.0);
        if let Some(v) = values.iter().find(|v| v.abs() > sup_bound + slack) {
            bail!(InvalidParameter, "interior value {v} exceeds sup_bound {sup_bound}");
        }
        if exterior.sup() > sup_bound + slack {
            bail!(
                InvalidParameter,
                "exterior rule bound {} exceeds sup_bound {sup_bound}",
                exterior.sup()
            );
        }
        let intervals = values.len() - 1;
        let tol = INTERFACE_TOL * sup_bound.max(1.0);
        for (v, x) in [(values[0], -radius), (values[intervals], radius)] {
            let e = exterior.eval(x);
            if (v - e).abs() > tol {
                bail!(
                    InvalidParameter,
                    "interior value {v} disagrees with exterior value {e} at x = {x}"
                );
            }
        }
        let nodes = lobatto_nodes(intervals, radius);
        let weights = barycentric_weights(intervals);
        let series = ChebSeries::from_values(&values, radius);
        Ok(Self {
            n: 1,
            radius,
            nodes,
            values,
            weights,
            series,
            exterior,
            sup_bound,
        })
    }

    /// Samples `f` at the Lobatto nodes; `f` must agree with the exterior at `±R`.
    pub fn from_fn<F: Fn(f64) -> f64>(
        radius: f64,
        intervals: usize,
        f: F,
        exterior: ExteriorRule,
        sup_bound: f64,
    ) -> Result<Self> {
        let values = lobatto_nodes(intervals, radius).into_iter().map(f).collect();
        Self::new(radius, values, exterior, sup_bound)
    }

    /// The exterior rule itself, sampled inside as well.
    pub fn from_rule(radius: f64, intervals: usize, rule: ExteriorRule) -> Result<Self> {
        let sup = rule.sup();
        let r = rule.clone();
        Self::from_fn(radius, intervals, move |x| r.eval(x), rule, sup)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn exterior(&self) -> &ExteriorRule {
        &self.exterior
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn series(&self) -> &ChebSeries {
        &self.series
    }

    pub fn barycentric_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Interior interpolant inside `[−R, R]`, exterior rule outside.
    pub fn eval(&self, x: f64) -> f64 {
        if x.abs() <= self.radius {
            interpolate(&self.nodes, &self.weights, &self.values, x)
        } else {
            self.exterior.eval(x)
        }
    }

    /// `c·u`, with the exterior and bound scaled alike.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let values = self.values.iter().map(|v| c * v).collect();
        Self::new(self.radius, values, self.exterior.scaled(c), c.abs() * self.sup_bound)
    }

    /// `x ↦ u(−x)`.
    pub fn reflected(&self) -> Result<Self> {
        let values = self.values.iter().rev().copied().collect();
        Self::new(self.radius, values, self.exterior.reflected(), self.sup_bound)
    }

    /// Same exterior and bound, new interior samples.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.radius, values, self.exterior.clone(), self.sup_bound)
    }

    /// Same as [`Self::with_values`] but raises `sup_bound` if the samples need it.
    pub fn with_values_relaxed(&self, values: Vec<f64>) -> Result<Self> {
        let sup = values.iter().fold(self.sup_bound, |m, v| m.max(v.abs()));
        Self::new(self.radius, values, self.exterior.clone(), sup)
    }

    pub fn describe(&self) -> String {
        alloc::format!(
            "field on [-{r}, {r}] with {} nodes, exterior {}, sup_bound {}",
            self.nodes.len(),
            self.exterior.id(),
            self.sup_bound,
            r = self.radius
        )
    }
}

/// `u(x+y) − 2u(x) + u(x−y)`.
pub fn second_difference(u: &FieldFunction, x: f64, y: f64) -> f64 {
    u.eval(x + y) - 2.0 * u.eval(x) + u.eval(x - y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_affine_second_differences_vanish() {
        let c = FieldFunction::from_rule(1.0, 16, ExteriorRule::constant(3.0)).unwrap();
        let a = FieldFunction::from_rule(
            1.0,
            16,
            ExteriorRule::ClampedAffine {
                intercept: 0.0,
                slope: 1.0,
                limit: 1e8,
            },
        )
        .unwrap();
        for (x, y) in [(0.1, 0.3), (0.5, 2.0), (-0.9, 40.0)] {
            assert!(second_difference(&c, x, y).abs() < 1e-14);
            assert!(second_difference(&a, x, y).abs() < 1e-12);
        }
    }

    #[test]
    fn quadratic_second_difference() {
        let u = FieldFunction::from_fn(1.0, 8, |x| x * x, ExteriorRule::constant(1.0), 1.0).unwrap();
        let h = 0.4;
        assert!((second_difference(&u, 0.0, h) - 2.0 * h * h).abs() < 1e-14);
    }

    #[test]
    fn rejects_inconsistent_interface() {
        let err = FieldFunction::from_fn(1.0, 8, |x| x * x, ExteriorRule::Zero, 1.0);
        assert!(err.is_err());
        let err = FieldFunction::from_fn(1.0, 8, |_| 2.0, ExteriorRule::constant(2.0), 1.0);
        assert!(err.is_err());
    }

    #[test]
    fn reflection_and_scaling() {
        let rule = ExteriorRule::Gaussian {
            amp: 1.0,
            center: 0.3,
            width: 0.8,
        };
        let u = FieldFunction::from_rule(2.0, 32, rule).unwrap();
        let r = u.reflected().unwrap();
        let s = u.scaled(-2.0).unwrap();
        for x in [-3.0, -0.4, 0.0, 1.7, 5.0] {
            assert!((r.eval(x) - u.eval(-x)).abs() < 1e-13);
            assert!((s.eval(x) + 2.0 * u.eval(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn bump_is_compact() {
        let b = ExteriorRule::CompactBump {
            amp: 2.0,
            center: 0.0,
            radius: 1.0,
        };
        assert_eq!(b.eval(1.0), 0.0);
        assert!((b.eval(0.0) - 2.0).abs() < 1e-15);
    }
}
