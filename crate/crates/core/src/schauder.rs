//! `C^{1,α}` norms on balls and the scaled Schauder ratio
//! `(r‖∇u‖_{B_{r/2}} + r^{1+α}[∇u]_{α,B_{r/2}}) / (r^s‖f‖_{B_r} + ‖u‖_{R^n})`.

use alloc::vec::Vec;

use crate::chebyshev::interpolate;
use crate::error::{bail, Result};
use crate::field::FieldFunction;
use crate::ladder::{BallSup, GridSamples};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct C1AlphaNorm {
    pub grad_sup: f64,
    pub holder_seminorm: f64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        bail!(InvalidParameter, "alpha = {alpha} must lie in (0, 1)");
    }
    Ok(())
}

/// Gradient samples on `[c − r, c + r]`: the grid nodes inside the ball plus
/// both endpoints.
fn ball_gradient(u: &FieldFunction, center: f64, r: f64) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = (center - r, center + r);
    let tol = 1e-12 * u.radius();
    if lo < -u.radius() - tol || hi > u.radius() + tol {
        bail!(Domain, "ball [{lo}, {hi}] leaves the interior [-{0}, {0}]", u.radius());
    }
    let nodes = u.nodes();
    let start = nodes.partition_point(|&x| x <= lo);
    let end = nodes.partition_point(|&x| x < hi);
    if start >= end {
        bail!(Domain, "no grid nodes inside the ball [{lo}, {hi}]");
    }
    let du = u.series().chopped_to_noise(crate::ladder::CHOP_TOL).derivative();
    let nodal: Vec<f64> = nodes.iter().map(|&x| du.eval(x)).collect();
    let w = u.barycentric_weights();
    let mut out = Vec::with_capacity(end - start + 2);
    out.push((lo, interpolate(nodes, w, &nodal, lo)));
    out.extend((start..end).map(|i| (nodes[i], nodal[i])));
    out.push((hi, interpolate(nodes, w, &nodal, hi)));
    Ok(out)
}

/// Sup of `|u′|` and the Hölder seminorm of `u′` over all sample pairs in the
/// ball.
pub fn c1alpha_norm(u: &FieldFunction, center: f64, r: f64, alpha: f64) -> Result<C1AlphaNorm> {
    check_alpha(alpha)?;
    if !(r > 0.0) {
        bail!(InvalidParameter, "ball radius must be positive");
    }
    let g = ball_gradient(u, center, r)?;
    let grad_sup = g.iter().fold(0.0f64, |m, p| m.max(p.1.abs()));
    let mut holder = 0.0f64;
    for (i, &(x, gx)) in g.iter().enumerate() {
        for &(y, gy) in &g[i + 1..] {
            let d = (y - x).abs();
            if d > 0.0 {
                holder = holder.max((gx - gy).abs() / libm::pow(d, alpha));
            }
        }
    }
    Ok(C1AlphaNorm {
        grad_sup,
        holder_seminorm: holder,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchauderRatio {
    pub r: f64,
    pub alpha: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, the smallest admissible constant at this ball.
    pub constant: f64,
}

/// Scaled Schauder ratio on `B_r(center)` for an operator of order `s`.
pub fn check_scaled_schauder(
    u: &FieldFunction,
    f: &GridSamples,
    center: f64,
    r: f64,
    alpha: f64,
    s: f64,
) -> Result<SchauderRatio> {
    let norm = c1alpha_norm(u, center, r / 2.0, alpha)?;
    if center - r < -f.radius() - 1e-12 || center + r > f.radius() + 1e-12 {
        bail!(
            Domain,
            "ball of radius {r} around {center} leaves the right-hand side grid"
        );
    }
    let f_sup = BallSup::new(f, 0)?.sup(0, center, r);
    let lhs = r * norm.grad_sup + libm::pow(r, 1.0 + alpha) * norm.holder_seminorm;
    let rhs = libm::pow(r, s) * f_sup + u.sup_bound();
    let constant = if lhs == 0.0 {
        0.0
    } else if rhs == 0.0 {
        bail!(Invariant, "right-hand side vanishes while the left-hand side is {lhs}");
    } else {
        lhs / rhs
    };
    Ok(SchauderRatio {
        r,
        alpha,
        lhs,
        rhs,
        constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ExteriorRule;

    #[test]
    fn linear_and_quadratic() {
        let lin = FieldFunction::from_fn(
            1.0,
            16,
            |x| x,
            ExteriorRule::ClampedAffine {
                intercept: 0.0,
                slope: 1.0,
                limit: 1.0,
            },
            1.0,
        )
        .unwrap();
        let n = c1alpha_norm(&lin, 0.0, 0.5, 0.3).unwrap();
        assert!((n.grad_sup - 1.0).abs() < 1e-12 && n.holder_seminorm < 1e-10);
        let quad = FieldFunction::from_fn(1.0, 16, |x| x * x, ExteriorRule::constant(1.0), 1.0).unwrap();
        let r = 0.5;
        let n = c1alpha_norm(&quad, 0.0, r, 0.3).unwrap();
        assert!((n.grad_sup - 2.0 * r).abs() < 1e-12);
        assert!((n.holder_seminorm - 2.0 * libm::pow(2.0 * r, 0.7)).abs() < 1e-10);
        let c = FieldFunction::from_rule(1.0, 16, ExteriorRule::constant(4.0)).unwrap();
        let n = c1alpha_norm(&c, 0.2, 0.3, 0.5).unwrap();
        assert!(n.grad_sup < 1e-12 && n.holder_seminorm < 1e-10);
    }

    #[test]
    fn guards() {
        let c = FieldFunction::from_rule(1.0, 16, ExteriorRule::constant(4.0)).unwrap();
        assert!(c1alpha_norm(&c, 0.0, 0.5, 1.0).is_err());
        assert!(c1alpha_norm(&c, 0.8, 0.5, 0.5).is_err());
        assert!(c1alpha_norm(&c, 0.05, 1e-6, 0.5).is_err());
    }

    #[test]
    fn zero_field_and_homogeneity() {
        let z = FieldFunction::from_rule(1.0, 16, ExteriorRule::Zero).unwrap();
        let f0 = GridSamples::from(&z);
        assert_eq!(
            check_scaled_schauder(&z, &f0, 0.0, 1.0, 0.3, 1.5).unwrap().constant,
            0.0
        );
        let g = ExteriorRule::Gaussian {
            amp: 1.0,
            center: 0.0,
            width: 0.5,
        };
        let u = FieldFunction::from_rule(2.0, 64, g).unwrap();
        let f = GridSamples::from_fn(2.0, 64, libm::cos).unwrap();
        let a = check_scaled_schauder(&u, &f, 0.0, 1.0, 0.3, 1.5).unwrap();
        let u2 = u.scaled(2.0).unwrap();
        let f2 = GridSamples::new(2.0, f.values().iter().map(|v| 2.0 * v).collect()).unwrap();
        let b = check_scaled_schauder(&u2, &f2, 0.0, 1.0, 0.3, 1.5).unwrap();
        assert!((a.constant - b.constant).abs() < 1e-12 * a.constant);
    }
}
