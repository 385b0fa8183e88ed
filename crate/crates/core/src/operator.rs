//! Split quadrature for `Ku(x) = ∫ (u(x+y) − 2u(x) + u(x−y)) K(y) dy` in one
//! dimension, and assembly of the dense collocation operator.
//!
//! With `D(y) = u(x+y) + u(x−y) − 2u(x)` and an even kernel,
//! `Ku(x) = 2 ∫_0^∞ D(y) K(y) dy`, split into
//!
//! * near field `[0, δ_x]`, `δ_x = min(δ, R − |x|)`: `D` is the even Taylor
//!   polynomial of the interior interpolant, integrated exactly against the
//!   kernel moments `∫_0^{δ_x} y^{2m} K`;
//! * mid field `[δ_x, R_cut]`: Gauss–Legendre panels, graded geometrically
//!   toward `δ_x` and toward the interface radii `R ∓ |x|`;
//! * far field `[R_cut, ∞)`: closed-form or dedicated quadrature of the
//!   exterior rule, or zero with the bound [`tail_bound`].

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::chebyshev::{barycentric_weights, differentiation_matrix, interpolate, lagrange_row, lobatto_nodes};
use crate::error::{bail, Result};
use crate::field::{ExteriorRule, FieldFunction};
use crate::kernel::{eval_kernel_derivative, unit_sphere_measure, KernelSpec};
use crate::quadrature::{uniform_breaks, GaussLegendre};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailMode {
    AnalyticBound,
    ExtendedQuadrature,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureParams {
    /// Near-field radius `δ`.
    pub near_radius: f64,
    /// Far-field radius `R_cut`.
    pub far_radius: f64,
    /// Gauss points per panel in the graded panels next to `δ`.
    pub nodes_near: usize,
    /// Gauss points per panel in the remaining mid-field panels.
    pub nodes_mid: usize,
    /// Gauss points per panel for far-field exterior quadrature.
    pub nodes_far: usize,
    pub tail_mode: TailMode,
    /// Number of even Taylor terms used in the near field.
    pub taylor_terms: usize,
    /// Largest mid-field panel width.
    pub panel_width: f64,
    /// Geometric refinement levels around each interface radius.
    pub interface_levels: usize,
}

impl QuadratureParams {
    /// Defaults for a Lobatto grid with `intervals` intervals on `[−R, R]`:
    /// `δ` is the grid spacing at the centre and `R_cut = max(50, 4R)`.
    pub fn for_grid(radius: f64, intervals: usize) -> Self {
        let spacing = radius * libm::sin(core::f64::consts::PI / intervals.max(2) as f64);
        Self {
            near_radius: spacing,
            far_radius: (4.0 * radius).max(50.0),
            nodes_near: 12,
            nodes_mid: 12,
            nodes_far: 12,
            tail_mode: TailMode::ExtendedQuadrature,
            taylor_terms: 2,
            panel_width: radius / 8.0,
            interface_levels: 10,
        }
    }

    /// Settings for reference right-hand sides on fine grids: as
    /// [`Self::for_grid`] with `δ` eight times smaller, which keeps the
    /// near-field Taylor remainder below the nodal derivative noise.
    pub fn reference(radius: f64, intervals: usize) -> Self {
        let mut q = Self::for_grid(radius, intervals);
        q.near_radius /= 8.0;
        q
    }

    pub fn for_field(u: &FieldFunction) -> Self {
        Self::for_grid(u.radius(), u.intervals())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.near_radius > 0.0 && self.near_radius < self.far_radius && self.far_radius.is_finite()) {
            bail!(
                InvalidParameter,
                "need 0 < near_radius < far_radius, got {} and {}",
                self.near_radius,
                self.far_radius
            );
        }
        if self.nodes_near < 4 || self.nodes_mid < 4 || self.nodes_far < 4 {
            bail!(InvalidParameter, "quadrature node counts must be at least 4");
        }
        if self.taylor_terms == 0 || self.taylor_terms > 8 {
            bail!(InvalidParameter, "taylor_terms must lie in 1..=8");
        }
        if !(self.panel_width > 0.0 && self.panel_width.is_finite()) {
            bail!(InvalidParameter, "panel_width must be positive");
        }
        Ok(())
    }

    fn check_radius(&self, radius: f64) -> Result<()> {
        self.validate()?;
        if self.far_radius < 2.0 * radius {
            bail!(
                InvalidParameter,
                "far_radius {} must be at least twice the interior radius {radius}",
                self.far_radius
            );
        }
        Ok(())
    }
}

/// `4·sup·(a0+η)(2−s)·ω_{n−1}·R_cut^{−s}/s`, a bound on the far-field
/// contribution `|∫_{|y|>R_cut} (u(x+y) − 2u(x) + u(x−y)) K(y) dy|`.
pub fn tail_bound(sup_bound: f64, kernel: &KernelSpec, far_radius: f64) -> f64 {
    4.0 * sup_bound
        * (kernel.a0 + kernel.eta)
        * (2.0 - kernel.s)
        * unit_sphere_measure(kernel.n)
        * libm::pow(far_radius, -kernel.s)
        / kernel.s
}

/// Quadrature plan for one evaluation point `x`:
/// `Ku(x) ≈ Σ_m near[m]·u^{(2m+2)}(x) + Σ_q w_q D(y_q) + far_const + far_diag·u(x)`.
#[derive(Debug, Clone)]
struct PointPlan {
    near: Vec<f64>,
    mid: Vec<(f64, f64)>,
    far_const: f64,
    far_diag: f64,
    bound: f64,
}

fn plan(
    x: f64,
    radius: f64,
    sup_bound: f64,
    kernel: &KernelSpec,
    exterior: &ExteriorRule,
    q: &QuadratureParams,
) -> Result<PointPlan> {
    if kernel.n != 1 {
        bail!(
            Unsupported,
            "operator quadrature is implemented for n = 1 only (n = {})",
            kernel.n
        );
    }
    if !(x.abs() < radius) {
        bail!(
            Domain,
            "evaluation point {x} is not strictly inside [-{radius}, {radius}]"
        );
    }
    let delta = q.near_radius.min(radius - x.abs());
    let mut near = Vec::with_capacity(q.taylor_terms);
    let mut factorial = 2.0;
    for m in 1..=q.taylor_terms {
        if m > 1 {
            factorial *= ((2 * m - 1) * (2 * m)) as f64;
        }
        near.push(4.0 * kernel.ray_moment((2 * m) as f64, 0.0, delta) / factorial);
    }

    let mut mid = Vec::new();
    let near_rule = GaussLegendre::new(q.nodes_near);
    let mid_rule = GaussLegendre::new(q.nodes_mid);
    for w in mid_breaks(delta, x, radius, q).windows(2) {
        let rule = if w[1] <= q.panel_width { &near_rule } else { &mid_rule };
        for (y, wt) in rule.mapped(w[0], w[1]) {
            mid.push((y, 2.0 * wt * kernel.radial(y)));
        }
    }

    let (far_const, far_diag, bound) = match q.tail_mode {
        TailMode::ExtendedQuadrature => {
            let mass = kernel.ray_moment(0.0, q.far_radius, f64::INFINITY);
            let pair = far_pair_integral(x, kernel, exterior, q);
            (2.0 * pair, -4.0 * mass, 0.0)
        }
        TailMode::AnalyticBound => (0.0, 0.0, tail_bound(sup_bound, kernel, q.far_radius)),
    };
    Ok(PointPlan {
        near,
        mid,
        far_const,
        far_diag,
        bound,
    })
}

fn mid_breaks(delta: f64, x: f64, radius: f64, q: &QuadratureParams) -> Vec<f64> {
    let (lo, hi, w) = (delta, q.far_radius, q.panel_width);
    let mut pts = vec![lo, hi];
    let mut p = lo;
    while p < w {
        pts.push(p);
        p *= 2.0;
    }
    pts.extend(uniform_breaks(w.max(lo), hi, w));
    for b in [radius - x.abs(), radius + x.abs()] {
        pts.push(b);
        let mut h = w;
        for _ in 0..q.interface_levels {
            h *= 0.5;
            pts.push(b - h);
            pts.push(b + h);
        }
    }
    pts.retain(|&p| p >= lo && p <= hi);
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * b.abs().max(1.0));
    pts
}

/// `∫_{R_cut}^∞ (e(x+y) + e(x−y)) K(y) dy` for the exterior rule `e`.
fn far_pair_integral(x: f64, kernel: &KernelSpec, rule: &ExteriorRule, q: &QuadratureParams) -> f64 {
    let rc = q.far_radius;
    let gl = GaussLegendre::new(q.nodes_far);
    match *rule {
        ExteriorRule::Zero => 0.0,
        ExteriorRule::ClampedAffine {
            intercept,
            slope,
            limit,
        } => {
            let mass = |a: f64, b: f64| kernel.ray_moment(0.0, a, b);
            let mut total = 2.0 * intercept * mass(rc, f64::INFINITY);
            if slope != 0.0 {
                let a = rc.max(limit - x.abs());
                let b = rc.max(limit + x.abs());
                // both sides unclamped on [rc, a], one clamped on [a, b], both beyond b
                let mut pair = 2.0 * x * mass(rc, a);
                if b > a {
                    let sign = if x > 0.0 {
                        1.0
                    } else if x < 0.0 {
                        -1.0
                    } else {
                        0.0
                    };
                    pair += x * mass(a, b) + sign * (limit * mass(a, b) - kernel.ray_moment(1.0, a, b));
                }
                total += slope * pair;
            }
            total
        }
        ExteriorRule::Cosine { amp, freq, phase } => {
            2.0 * amp * libm::cos(freq * x + phase) * cosine_tail(kernel, freq.abs(), rc, &gl)
        }
        ExteriorRule::Gaussian { center, width, .. } => sided(x, center, |sigma, peak| {
            let (a, b) = (rc.max(peak - 40.0 * width), peak + 40.0 * width);
            if b <= a {
                return 0.0;
            }
            gl.integrate_panels(&uniform_breaks(a, b, 0.5 * width), |y| {
                rule.eval(x + sigma * y) * kernel.radial(y)
            })
        }),
        ExteriorRule::CompactBump { center, radius, .. } => sided(x, center, |sigma, peak| {
            let (a, b) = (rc.max(peak - radius), peak + radius);
            if b <= a {
                return 0.0;
            }
            gl.integrate_panels(&uniform_breaks(a, b, radius / 8.0), |y| {
                rule.eval(x + sigma * y) * kernel.radial(y)
            })
        }),
        ExteriorRule::Lorentzian { center, width, .. } => sided(x, center, |sigma, peak| {
            let mut breaks = geometric_breaks(rc, 1e8 * rc.max(peak.abs()), 0.25);
            let (a, b) = (rc.max(peak - 40.0 * width), peak + 40.0 * width);
            if b > a {
                breaks.retain(|&p| p < a || p > b);
                breaks.extend(uniform_breaks(a, b, 0.5 * width));
                breaks.sort_by(|p, q| p.total_cmp(q));
            }
            gl.integrate_panels(&breaks, |y| rule.eval(x + sigma * y) * kernel.radial(y))
        }),
    }
}

/// Sums `side(σ, σ(center − x))` over `σ = ±1`; the second argument is where
/// `x + σy` hits the centre of the rule.
fn sided<F: FnMut(f64, f64) -> f64>(x: f64, center: f64, mut side: F) -> f64 {
    side(1.0, center - x) + side(-1.0, x - center)
}

fn geometric_breaks(a: f64, b: f64, log_width: f64) -> Vec<f64> {
    let (la, lb) = (libm::log(a), libm::log(b));
    uniform_breaks(la, lb, log_width).into_iter().map(libm::exp).collect()
}

/// `∫_{rc}^∞ cos(ξy) K(y) dy`: panels up to `Y` with `ξY ≥ 400`, then the
/// integration-by-parts expansion `−Re e^{iξY} Σ_j (−1)^j K^{(j)}(Y)/(iξ)^{j+1}`.
fn cosine_tail(kernel: &KernelSpec, xi: f64, rc: f64, gl: &GaussLegendre) -> f64 {
    if xi == 0.0 {
        return kernel.ray_moment(0.0, rc, f64::INFINITY);
    }
    let y_end = kernel.flat_above(rc.max(400.0 / xi));
    let mut breaks = vec![rc];
    let mut p = rc;
    while p < y_end {
        p = (p + (2.0 / xi).min(0.25 * p)).min(y_end);
        breaks.push(p);
    }
    let body = gl.integrate_panels(&breaks, |y| libm::cos(xi * y) * kernel.radial(y));
    let (mut re, mut im) = (0.0, 0.0);
    let mut scale = 1.0 / xi;
    for j in 0..=crate::kernel::MAX_DERIVATIVE_ORDER {
        let d = eval_kernel_derivative(kernel, &[j], &[y_end]).unwrap_or(0.0);
        let t = if j % 2 == 0 { d } else { -d } * scale;
        // multiply by i^{−(j+1)}
        match (j + 1) % 4 {
            0 => re += t,
            1 => im -= t,
            2 => re -= t,
            _ => im += t,
        }
        scale /= xi;
    }
    let (c, s) = (libm::cos(xi * y_end), libm::sin(xi * y_end));
    body - (c * re - s * im)
}

/// `Ku(x)` for `|x| < R`.
pub fn evaluate_k(u: &FieldFunction, x: f64, kernel: &KernelSpec, q: &QuadratureParams) -> Result<f64> {
    evaluate_k_bounded(u, x, kernel, q).map(|(v, _)| v)
}

/// `Ku(x)` together with the far-field error bound (zero under
/// [`TailMode::ExtendedQuadrature`]).
pub fn evaluate_k_bounded(u: &FieldFunction, x: f64, kernel: &KernelSpec, q: &QuadratureParams) -> Result<(f64, f64)> {
    q.check_radius(u.radius())?;
    let derivs = even_derivatives(u, q.taylor_terms);
    evaluate_with(u, &derivs, x, kernel, q)
}

/// `Ku` at several points, sharing the spectral derivative work.
pub fn evaluate_k_many(u: &FieldFunction, xs: &[f64], kernel: &KernelSpec, q: &QuadratureParams) -> Result<Vec<f64>> {
    q.check_radius(u.radius())?;
    let derivs = even_derivatives(u, q.taylor_terms);
    let one = |x: &f64| evaluate_with(u, &derivs, *x, kernel, q).map(|(v, _)| v);
    #[cfg(feature = "std")]
    {
        use rayon::prelude::*;
        xs.par_iter().map(one).collect()
    }
    #[cfg(not(feature = "std"))]
    {
        xs.iter().map(one).collect()
    }
}

/// Nodal values of `u^{(2m)}`, `m = 1..=terms`.
fn even_derivatives(u: &FieldFunction, terms: usize) -> Vec<Vec<f64>> {
    let d = differentiation_matrix(u.intervals(), u.radius());
    let mut v = DVector::from_column_slice(u.values());
    (0..terms)
        .map(|_| {
            v = &d * (&d * &v);
            v.as_slice().to_vec()
        })
        .collect()
}

fn evaluate_with(
    u: &FieldFunction,
    derivs: &[Vec<f64>],
    x: f64,
    kernel: &KernelSpec,
    q: &QuadratureParams,
) -> Result<(f64, f64)> {
    let p = plan(x, u.radius(), u.sup_bound(), kernel, u.exterior(), q)?;
    let ux = u.eval(x);
    let mut total = p.far_const + p.far_diag * ux;
    for (&c, d) in p.near.iter().zip(derivs) {
        total += c * interpolate(u.nodes(), u.barycentric_weights(), d, x);
    }
    for &(y, w) in &p.mid {
        total += w * (u.eval(x + y) + u.eval(x - y) - 2.0 * ux);
    }
    Ok((total, p.bound))
}

/// Dense affine operator `v ↦ A·v + b` on the interior Lobatto nodes
/// `x_1..x_{N−1}`; endpoint values are pinned to the exterior rule.
#[derive(Debug, Clone)]
pub struct Assembly {
    pub radius: f64,
    pub nodes: Vec<f64>,
    pub exterior: ExteriorRule,
    pub matrix: DMatrix<f64>,
    pub offset: DVector<f64>,
    /// Largest far-field bound over the rows (zero in extended mode).
    pub tail_bound: f64,
}

impl Assembly {
    pub fn interior_nodes(&self) -> &[f64] {
        &self.nodes[1..self.nodes.len() - 1]
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.matrix * v + &self.offset
    }

    /// Full nodal vector including the pinned endpoint values.
    pub fn full_values(&self, interior: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(interior.len() + 2);
        out.push(self.exterior.eval(-self.radius));
        out.extend_from_slice(interior);
        out.push(self.exterior.eval(self.radius));
        out
    }
}

/// Assembles `A`, `b` so that `A·v + b` reproduces [`evaluate_k`] at every
/// interior node for the field with interior values `v`.
pub fn assemble_matrix(
    radius: f64,
    intervals: usize,
    kernel: &KernelSpec,
    exterior: &ExteriorRule,
    q: &QuadratureParams,
    sup_bound: f64,
) -> Result<Assembly> {
    if intervals < 2 {
        bail!(InvalidParameter, "need at least two intervals");
    }
    q.check_radius(radius)?;
    exterior.validate()?;
    let nodes = lobatto_nodes(intervals, radius);
    let weights = barycentric_weights(intervals);
    let m = intervals - 1;
    let ext_left = exterior.eval(-radius);
    let ext_right = exterior.eval(radius);
    let dmat = differentiation_matrix(intervals, radius);

    let build_row = |i: usize| -> Result<(Vec<f64>, f64, f64)> {
        let x = nodes[i];
        let p = plan(x, radius, sup_bound, kernel, exterior, q)?;
        let mut row = vec![0.0; intervals + 1];
        let mut b = p.far_const;
        row[i] += p.far_diag;
        let mut unit = DVector::zeros(intervals + 1);
        unit[i] = 1.0;
        for &c in &p.near {
            // row i of D^{2m}, accumulated as (Dᵀ)^{2m} e_i
            unit = dmat.tr_mul(&dmat.tr_mul(&unit));
            for (r, dv) in row.iter_mut().zip(unit.iter()) {
                *r += c * dv;
            }
        }
        let mut ell = vec![0.0; intervals + 1];
        for &(y, w) in &p.mid {
            for z in [x + y, x - y] {
                if z.abs() <= radius {
                    lagrange_row(&nodes, &weights, z, &mut ell);
                    for (r, l) in row.iter_mut().zip(&ell) {
                        *r += w * l;
                    }
                } else {
                    b += w * exterior.eval(z);
                }
            }
            row[i] -= 2.0 * w;
        }
        b += row[0] * ext_left + row[intervals] * ext_right;
        Ok((row[1..intervals].to_vec(), b, p.bound))
    };

    #[cfg(feature = "std")]
    let rows: Vec<Result<(Vec<f64>, f64, f64)>> = {
        use rayon::prelude::*;
        (1..intervals).into_par_iter().map(build_row).collect()
    };
    #[cfg(not(feature = "std"))]
    let rows: Vec<Result<(Vec<f64>, f64, f64)>> = (1..intervals).map(build_row).collect();

    let mut matrix = DMatrix::zeros(m, m);
    let mut offset = DVector::zeros(m);
    let mut bound = 0.0f64;
    for (r, res) in rows.into_iter().enumerate() {
        let (row, b, tb) = res?;
        for (c, v) in row.into_iter().enumerate() {
            matrix[(r, c)] = v;
        }
        offset[r] = b;
        bound = bound.max(tb);
    }
    Ok(Assembly {
        radius,
        nodes,
        exterior: exterior.clone(),
        matrix,
        offset,
        tail_bound: bound,
    })
}

/// Plane-wave multiplier: `K cos(ξ·) = −λ(ξ) cos(ξ·)` with
/// `λ(ξ) = 4 a0 (2−s) (−Γ(−s) cos(πs/2)) |ξ|^s` for the pure kernel in one dimension.
pub fn plane_wave_multiplier(kernel: &KernelSpec, xi: f64) -> f64 {
    let s = kernel.s;
    4.0 * kernel.a0
        * (2.0 - s)
        * (-libm::tgamma(-s) * libm::cos(core::f64::consts::PI * s / 2.0))
        * libm::pow(xi.abs(), s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Profile;

    fn pure() -> KernelSpec {
        KernelSpec::pure(1, 1.5, 1.0).unwrap()
    }

    #[test]
    fn tail_bound_values() {
        let k = pure();
        assert_eq!(tail_bound(0.0, &k, 10.0), 0.0);
        assert!(tail_bound(1.0, &k, 20.0) < tail_bound(1.0, &k, 10.0));
        let want = 4.0 * 0.5 * 2.0 * libm::pow(10.0, -1.5) / 1.5;
        assert!((tail_bound(1.0, &k, 10.0) - want).abs() < 1e-15);
        assert!((want - 0.08433).abs() < 1e-5);
    }

    #[test]
    fn constant_field_is_in_the_null_space() {
        let u = FieldFunction::from_rule(1.0, 24, ExteriorRule::constant(2.0)).unwrap();
        let q = QuadratureParams::for_field(&u);
        for x in [-0.9, -0.3, 0.0, 0.41, 0.97] {
            assert!(evaluate_k(&u, x, &pure(), &q).unwrap().abs() < 1e-11);
        }
    }

    #[test]
    fn cosine_matches_multiplier() {
        let k = pure();
        let xi = 2.0;
        let rule = ExteriorRule::Cosine {
            amp: 1.0,
            freq: xi,
            phase: 0.0,
        };
        let u = FieldFunction::from_rule(1.0, 48, rule).unwrap();
        let q = QuadratureParams::for_field(&u);
        let lam = plane_wave_multiplier(&k, xi);
        for x in [0.0, 0.3, -0.6] {
            let v = evaluate_k(&u, x, &k, &q).unwrap();
            assert!(
                (v + lam * libm::cos(xi * x)).abs() < 1e-6 * lam,
                "{x}: {v} vs {}",
                -lam * libm::cos(xi * x)
            );
        }
    }

    #[test]
    fn assembly_matches_pointwise_evaluation() {
        let k = KernelSpec::perturbed(1, 1.5, 1.0, 0.3, Profile::Rational).unwrap();
        let rule = ExteriorRule::Gaussian {
            amp: 1.0,
            center: 0.0,
            width: 1.0,
        };
        let n = 20;
        let q = QuadratureParams::for_grid(1.0, n);
        let a = assemble_matrix(1.0, n, &k, &rule, &q, 1.0).unwrap();
        let interior: Vec<f64> = a
            .interior_nodes()
            .iter()
            .map(|&x| libm::exp(-x * x) + 0.1 * libm::sin(3.0 * x))
            .collect();
        let full = a.full_values(&interior);
        let u = FieldFunction::new(1.0, full, rule, 1.2).unwrap();
        let av = a.apply(&DVector::from_vec(interior));
        for (i, &x) in a.interior_nodes().iter().enumerate() {
            let direct = evaluate_k(&u, x, &k, &q).unwrap();
            assert!((av[i] - direct).abs() < 1e-10, "{x}: {} vs {direct}", av[i]);
        }
    }

    #[test]
    fn rejects_boundary_points_and_higher_dimensions() {
        let u = FieldFunction::from_rule(1.0, 8, ExteriorRule::Zero).unwrap();
        let q = QuadratureParams::for_field(&u);
        assert!(matches!(evaluate_k(&u, 1.0, &pure(), &q), Err(crate::Error::Domain(_))));
        let k2 = KernelSpec::pure(2, 1.5, 1.0).unwrap();
        assert!(matches!(
            evaluate_k(&u, 0.0, &k2, &q),
            Err(crate::Error::Unsupported(_))
        ));
    }
}
