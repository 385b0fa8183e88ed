//! Weighted derivative seminorm ladders `M_k`, `N_k` and the checks built on
//! them: the recursive estimate, the scaled higher-order estimate and the
//! growth-rate (analyticity radius) fit.
//!
//! Suprema over the continuum of balls are discretized: radii run over
//! a finite `r_grid` and each ball sup is taken over the interior nodes inside
//! the ball, the ball endpoints and a uniform subgrid.

use alloc::vec;
use alloc::vec::Vec;

use crate::chebyshev::{lobatto_nodes, ChebSeries};
use crate::error::{bail, Error, Result};
use crate::field::FieldFunction;
use crate::kernel::least_squares_slope;

/// Largest derivative order accepted by [`compute_derivatives`].
pub const MAX_LADDER_ORDER: usize = 20;
/// Default ladder length.
pub const DEFAULT_K_MAX: usize = 12;
/// Relative size below which trailing Chebyshev coefficients are always
/// discarded before repeated differentiation; the cut is raised further to sit
/// above the measured noise plateau.
pub const CHOP_TOL: f64 = 1e-15;
/// First order used by the growth-rate fit.
pub const FIT_START: usize = 4;

const SUBGRID: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    M,
    N,
    MTilde,
    NTilde,
}

/// Weight applied to `‖∇^k ·‖_{B_r}` before taking the sup over `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightConvention {
    /// `(1−r)^k`
    PowK,
    /// `(1−r)^{k+s}`
    PowKPlusS(f64),
    /// Plain `sup_{B_1}`.
    UnweightedB1,
}

impl WeightConvention {
    fn weight(self, r: f64, k: usize) -> f64 {
        match self {
            WeightConvention::PowK => libm::pow(1.0 - r, k as f64),
            WeightConvention::PowKPlusS(s) => libm::pow(1.0 - r, k as f64 + s),
            WeightConvention::UnweightedB1 => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormSequence {
    pub kind: NormKind,
    pub values: Vec<f64>,
    pub convention: WeightConvention,
}

impl NormSequence {
    pub fn new(kind: NormKind, values: Vec<f64>, convention: WeightConvention) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            bail!(
                Invariant,
                "norm sequence entries must be finite and nonnegative, found {v}"
            );
        }
        Ok(Self {
            kind,
            values,
            convention,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn k_max(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    /// `M̃_k = M_k + 1`.
    pub fn tilde(&self) -> Self {
        let kind = match self.kind {
            NormKind::M | NormKind::MTilde => NormKind::MTilde,
            NormKind::N | NormKind::NTilde => NormKind::NTilde,
        };
        Self {
            kind,
            values: self.values.iter().map(|v| v + 1.0).collect(),
            convention: self.convention,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            kind: self.kind,
            values: self.values.iter().map(|v| c.abs() * v).collect(),
            convention: self.convention,
        }
    }
}

/// Default radii: 64 points with `1 − r` geometric from `0.999` down to `10⁻³`.
pub fn default_r_grid() -> Vec<f64> {
    let count = 64;
    let (hi, lo) = (libm::log(0.999), libm::log(1e-3));
    (0..count)
        .map(|i| 1.0 - libm::exp(hi + (lo - hi) * i as f64 / (count - 1) as f64))
        .collect()
}

/// Chebyshev–Lobatto samples of a function on `[−R, R]` with no exterior,
/// used for right-hand sides that are only known inside the ball.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSamples {
    radius: f64,
    nodes: Vec<f64>,
    values: Vec<f64>,
    series: ChebSeries,
}

impl GridSamples {
    pub fn new(radius: f64, values: Vec<f64>) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            bail!(InvalidParameter, "radius must be positive");
        }
        if values.len() < 3 || values.iter().any(|v| !v.is_finite()) {
            bail!(InvalidParameter, "need at least 3 finite samples");
        }
        let nodes = lobatto_nodes(values.len() - 1, radius);
        let series = ChebSeries::from_values(&values, radius);
        Ok(Self {
            radius,
            nodes,
            values,
            series,
        })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(radius: f64, intervals: usize, f: F) -> Result<Self> {
        Self::new(radius, lobatto_nodes(intervals, radius).into_iter().map(f).collect())
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

    pub fn series(&self) -> &ChebSeries {
        &self.series
    }
}

impl From<&FieldFunction> for GridSamples {
    fn from(u: &FieldFunction) -> Self {
        Self {
            radius: u.radius(),
            nodes: u.nodes().to_vec(),
            values: u.values().to_vec(),
            series: u.series().clone(),
        }
    }
}

/// Derivative series `u, u', …, u^{(k_max)}` after chopping the noise tail.
pub fn derivative_series(series: &ChebSeries, k_max: usize) -> Result<Vec<ChebSeries>> {
    if k_max > MAX_LADDER_ORDER {
        return Err(Error::Unsupported(alloc::format!(
            "derivative order {k_max} exceeds {MAX_LADDER_ORDER}; spectral differentiation noise dominates"
        )));
    }
    let mut out = Vec::with_capacity(k_max + 1);
    let mut s = series.chopped_to_noise(CHOP_TOL);
    out.push(series.clone());
    for _ in 0..k_max {
        s = s.derivative();
        out.push(s.clone());
    }
    Ok(out)
}

fn derivative_grids(g: &GridSamples, series: &[ChebSeries]) -> Vec<Vec<f64>> {
    series
        .iter()
        .enumerate()
        .map(|(k, s)| {
            if k == 0 {
                g.values.clone()
            } else {
                g.nodes.iter().map(|&x| s.eval(x)).collect()
            }
        })
        .collect()
}

/// `u^{(k)}` sampled on the interior grid for `k = 0..=k_max`.
pub fn compute_derivatives(u: &FieldFunction, k_max: usize) -> Result<Vec<Vec<f64>>> {
    let g = GridSamples::from(u);
    Ok(derivative_grids(&g, &derivative_series(g.series(), k_max)?))
}

/// Sup-norm evaluator for derivatives over balls `[c − ρ, c + ρ]`.
pub struct BallSup {
    nodes: Vec<f64>,
    grids: Vec<Vec<f64>>,
    series: Vec<ChebSeries>,
}

impl BallSup {
    pub fn new(g: &GridSamples, k_max: usize) -> Result<Self> {
        let series = derivative_series(g.series(), k_max)?;
        let grids = derivative_grids(g, &series);
        Ok(Self {
            nodes: g.nodes.clone(),
            grids,
            series,
        })
    }

    pub fn k_max(&self) -> usize {
        self.series.len() - 1
    }

    /// `‖u^{(k)}‖_{L∞([c−ρ, c+ρ])}` over the nodes in the ball, its endpoints
    /// and a uniform subgrid.
    pub fn sup(&self, k: usize, center: f64, rho: f64) -> f64 {
        let (lo, hi) = (center - rho, center + rho);
        let start = self.nodes.partition_point(|&x| x < lo);
        let end = self.nodes.partition_point(|&x| x <= hi);
        let mut best = self.grids[k][start..end].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let s = &self.series[k];
        for j in 0..=SUBGRID {
            let x = lo + (hi - lo) * j as f64 / SUBGRID as f64;
            best = best.max(s.eval(x).abs());
        }
        best
    }
}

fn check_r_grid(r_grid: &[f64], radius: f64) -> Result<()> {
    if r_grid.is_empty() || r_grid.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        bail!(InvalidParameter, "r_grid must be a nonempty subset of (0, 1)");
    }
    if r_grid.iter().any(|&r| r > radius) {
        bail!(Domain, "r_grid reaches beyond the interior radius {radius}");
    }
    Ok(())
}

/// `M_k = max_r (1−r)^k ‖u^{(k)}‖_{B_r}` for `k ≥ 1`, `M_0 = sup_bound`.
pub fn compute_mk(u: &FieldFunction, k_max: usize, r_grid: &[f64]) -> Result<NormSequence> {
    check_r_grid(r_grid, u.radius())?;
    let sups = BallSup::new(&GridSamples::from(u), k_max)?;
    let mut values = vec![u.sup_bound()];
    for k in 1..=k_max {
        let m = r_grid
            .iter()
            .map(|&r| WeightConvention::PowK.weight(r, k) * sups.sup(k, 0.0, r))
            .fold(0.0f64, f64::max);
        values.push(m);
    }
    NormSequence::new(NormKind::M, values, WeightConvention::PowK)
}

/// `N_k` of a right-hand side sampled as a field, under the chosen convention.
pub fn compute_nk(f: &GridSamples, k_max: usize, r_grid: &[f64], convention: WeightConvention) -> Result<NormSequence> {
    let sups = BallSup::new(f, k_max)?;
    let values = match convention {
        WeightConvention::UnweightedB1 => {
            if f.radius() < 1.0 {
                bail!(Domain, "unit ball exceeds the interior radius {}", f.radius());
            }
            (0..=k_max).map(|k| sups.sup(k, 0.0, 1.0)).collect()
        }
        _ => {
            check_r_grid(r_grid, f.radius())?;
            (0..=k_max)
                .map(|k| {
                    r_grid
                        .iter()
                        .map(|&r| convention.weight(r, k) * sups.sup(k, 0.0, r))
                        .fold(0.0f64, f64::max)
                })
                .collect()
        }
    };
    NormSequence::new(NormKind::N, values, convention)
}

/// `2e`, the default growth factor in the recursive estimate.
pub const TWO_E: f64 = 2.0 * core::f64::consts::E;

/// Minimal constants `C_k = M_{k+1} / (N_k + k Σ_l C(k,l) M_{k−l} (twoE·H)^l l!)`,
/// `0/0 := 0`, for `k ∈ k_range`.
pub fn check_recursive_estimate(
    m: &NormSequence,
    n: &NormSequence,
    h: f64,
    two_e: f64,
    k_range: core::ops::RangeInclusive<usize>,
) -> Result<Vec<f64>> {
    if !(h >= 1.0) {
        bail!(InvalidParameter, "H = {h} must be at least 1");
    }
    if m.values.iter().chain(&n.values).any(|&v| v < 0.0) || !(two_e > 0.0) {
        bail!(Invariant, "recursive estimate needs nonnegative sequences");
    }
    let k_hi = *k_range.end();
    if m.values.len() < k_hi + 2 || n.values.len() < k_hi + 1 {
        bail!(InvalidParameter, "sequences do not cover k up to {k_hi}");
    }
    let growth = two_e * h;
    Ok(k_range
        .map(|k| {
            let mut sum = 0.0;
            let mut binom = 1.0;
            let mut pow = 1.0;
            let mut fact = 1.0;
            for l in 0..=k {
                if l > 0 {
                    binom *= (k + 1 - l) as f64 / l as f64;
                    pow *= growth;
                    fact *= l as f64;
                }
                sum += binom * m.values[k - l] * pow * fact;
            }
            let denom = n.values[k] + k as f64 * sum;
            let num = m.values[k + 1];
            if num == 0.0 {
                0.0
            } else {
                num / denom
            }
        })
        .collect())
}

/// Ratio `σ‖u^{(k+1)}‖_{B_σ(x0)}` over the bracket of the scaled higher-order
/// estimate, i.e. the smallest admissible constant at `(x0, σ, k)`.
///
/// The ball written `B_{4r}` in the estimate is taken as `B_{4σ}`.
pub fn check_higher_order_estimate(
    u: &FieldFunction,
    f: &GridSamples,
    x0: f64,
    sigma: f64,
    k: usize,
    h: f64,
    s: f64,
) -> Result<f64> {
    if k == 0 {
        bail!(InvalidParameter, "the estimate is stated for k ≥ 1");
    }
    if !(sigma > 0.0) {
        bail!(InvalidParameter, "sigma must be positive");
    }
    let needed = 6.0 * sigma * (k + 1) as f64;
    let room = u.radius().min(f.radius()) - x0.abs();
    if needed > room {
        bail!(
            Domain,
            "ball of radius 6σ(k+1) = {needed} around {x0} leaves the interior (room {room})"
        );
    }
    let us = BallSup::new(&GridSamples::from(u), k + 1)?;
    let fs = BallSup::new(f, k)?;
    let lhs = sigma * us.sup(k + 1, x0, sigma);
    let ss = libm::pow(sigma, s);
    let mut rhs = ss * fs.sup(k, x0, 2.0 * sigma) + us.sup(k, x0, 4.0 * sigma);
    let mut hl_fact = 1.0;
    for l in 1..k {
        hl_fact *= h * l as f64;
        let ball = 6.0 * l as f64 * sigma + 2.0 * sigma;
        rhs += ss * hl_fact * us.sup(k - l, x0, ball) / libm::pow(6.0 * l as f64 * sigma, l as f64 + s);
    }
    hl_fact *= h * k as f64;
    rhs += ss * hl_fact * u.sup_bound() / libm::pow(6.0 * k as f64 * sigma, k as f64 + s);
    if lhs == 0.0 {
        return Ok(0.0);
    }
    Ok(lhs / rhs)
}

/// Growth-rate fit of a ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticityFit {
    /// `A_k = (M_k/k!)^{1/k}` for `k = 1..=K_max` (index 0 holds `k = 1`).
    pub a_k: Vec<f64>,
    /// `e^{slope}` of the least-squares fit of `ln(M_k/k!)` against `k`.
    pub fitted_a: f64,
    /// `1/A`, infinite for polynomial ladders.
    pub radius: f64,
    pub polynomial: bool,
    /// Orders used by the fit.
    pub window: (usize, usize),
}

/// Fits `M_k ≈ C A^k k!` over `k ∈ [4, K_max]`.
pub fn analyticity_radius(m: &NormSequence) -> Result<AnalyticityFit> {
    let k_max = m.k_max();
    if k_max < FIT_START + 1 {
        bail!(InvalidParameter, "need K_max ≥ {} for the growth fit", FIT_START + 1);
    }
    let mut log_fact = 0.0;
    let mut a_k = Vec::with_capacity(k_max);
    let mut pts = Vec::new();
    for k in 1..=k_max {
        log_fact += libm::log(k as f64);
        let v = m.values[k];
        a_k.push(if v > 0.0 {
            libm::exp((libm::log(v) - log_fact) / k as f64)
        } else {
            0.0
        });
        if k >= FIT_START && v > 0.0 {
            pts.push((k as f64, libm::log(v) - log_fact));
        }
    }
    // a tail that vanishes beyond the transient marks a polynomial
    let scale = m
        .values
        .iter()
        .skip(1)
        .take(FIT_START)
        .fold(0.0f64, |a, &b| a.max(b))
        .max(1e-300);
    let tail_zero = m.values[FIT_START..].iter().all(|&v| v <= 1e-11 * scale);
    if tail_zero || pts.len() < 2 {
        return Ok(AnalyticityFit {
            a_k,
            fitted_a: 0.0,
            radius: f64::INFINITY,
            polynomial: true,
            window: (FIT_START, k_max),
        });
    }
    let a = libm::exp(least_squares_slope(&pts));
    Ok(AnalyticityFit {
        a_k,
        fitted_a: a,
        radius: 1.0 / a,
        polynomial: false,
        window: (FIT_START, k_max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ExteriorRule;

    fn quadratic() -> FieldFunction {
        FieldFunction::from_fn(1.0, 16, |x| x * x, ExteriorRule::constant(1.0), 1.0).unwrap()
    }

    #[test]
    fn quadratic_derivative_grids() {
        let u = quadratic();
        let d = compute_derivatives(&u, 5).unwrap();
        for (i, &x) in u.nodes().iter().enumerate() {
            assert!((d[1][i] - 2.0 * x).abs() < 1e-12);
            assert!((d[2][i] - 2.0).abs() < 1e-11);
            assert!(d[3][i].abs() < 1e-9 && d[5][i].abs() < 1e-9);
        }
        assert!(matches!(compute_derivatives(&u, 21), Err(Error::Unsupported(_))));
    }

    #[test]
    fn quadratic_ladder() {
        let u = quadratic();
        let mut grid = default_r_grid();
        grid.push(0.5);
        let m = compute_mk(&u, 6, &grid).unwrap();
        assert_eq!(m.values[0], 1.0);
        assert!((m.values[1] - 0.5).abs() < 1e-12);
        let want = 2.0 * libm::pow(1.0 - grid.iter().cloned().fold(1.0, f64::min), 2.0);
        assert!((m.values[2] - want).abs() < 1e-10);
        assert!(m.values[3..].iter().all(|&v| v < 1e-9));
    }

    #[test]
    fn constant_ladder() {
        let u = FieldFunction::from_rule(1.0, 8, ExteriorRule::constant(-3.0)).unwrap();
        let m = compute_mk(&u, 5, &default_r_grid()).unwrap();
        assert_eq!(m.values[0], 3.0);
        assert!(m.values[1..].iter().all(|&v| v < 1e-12));
    }

    #[test]
    fn default_grid_clusters_at_one() {
        let g = default_r_grid();
        assert_eq!(g.len(), 64);
        assert!((g[0] - 0.001).abs() < 1e-12 && (g[63] - 0.999).abs() < 1e-12);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn recursive_estimate_zero_and_guards() {
        let z = NormSequence::new(NormKind::M, vec![0.0; 6], WeightConvention::PowK).unwrap();
        let c = check_recursive_estimate(&z, &z, 1.0, TWO_E, 0..=4).unwrap();
        assert!(c.iter().all(|&v| v == 0.0));
        assert!(NormSequence::new(NormKind::M, vec![-1.0], WeightConvention::PowK).is_err());
        assert!(check_recursive_estimate(&z, &z, 0.5, TWO_E, 0..=4).is_err());
    }

    #[test]
    fn exact_factorial_growth_is_recovered() {
        let mut fact = 1.0;
        let vals: Vec<f64> = (0..=14)
            .map(|k| {
                if k > 0 {
                    fact *= k as f64;
                }
                2.0 * libm::pow(0.5, k as f64) * fact
            })
            .collect();
        let m = NormSequence::new(NormKind::M, vals, WeightConvention::PowK).unwrap();
        let fit = analyticity_radius(&m).unwrap();
        assert!((fit.fitted_a - 0.5).abs() < 1e-12);
        assert!((fit.radius - 2.0).abs() < 1e-10);
        let poly = NormSequence::new(
            NormKind::M,
            vec![1.0, 2.0, 2.0, 0.0, 0.0, 0.0, 0.0],
            WeightConvention::PowK,
        )
        .unwrap();
        assert!(analyticity_radius(&poly).unwrap().polynomial);
    }

    #[test]
    fn higher_order_estimate_guards() {
        let u = FieldFunction::from_rule(1.0, 32, ExteriorRule::constant(2.0)).unwrap();
        let f = GridSamples::from(&u);
        assert_eq!(
            check_higher_order_estimate(&u, &f, 0.0, 0.01, 3, 1.0, 1.5).unwrap(),
            0.0
        );
        assert!(matches!(
            check_higher_order_estimate(&u, &f, 0.5, 0.1, 3, 1.0, 1.5),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn cosine_derivatives_are_accurate() {
        let rule = ExteriorRule::Cosine {
            amp: 1.0,
            freq: 1.0,
            phase: 0.0,
        };
        let u = FieldFunction::from_rule(1.0, 256, rule).unwrap();
        let d = compute_derivatives(&u, 6).unwrap();
        for (k, grid) in d.iter().enumerate() {
            for (i, &x) in u.nodes().iter().enumerate() {
                let exact = libm::cos(x + k as f64 * core::f64::consts::FRAC_PI_2);
                assert!((grid[i] - exact).abs() < 1e-6, "k = {k}, x = {x}");
            }
        }
    }

    #[test]
    fn weighted_nk_of_identity() {
        let f = GridSamples::from_fn(1.0, 8, |x| x).unwrap();
        let grid = default_r_grid();
        let s = 1.5;
        let n = compute_nk(&f, 2, &grid, WeightConvention::PowKPlusS(s)).unwrap();
        let n0 = grid.iter().map(|&r| libm::pow(1.0 - r, s) * r).fold(0.0, f64::max);
        let n1 = grid.iter().map(|&r| libm::pow(1.0 - r, 1.0 + s)).fold(0.0, f64::max);
        assert!((n.values[0] - n0).abs() < 1e-12 && (n.values[1] - n1).abs() < 1e-12);
        assert!(n.values[2] < 1e-12);
        let z = compute_nk(
            &GridSamples::from_fn(1.0, 8, |_| 0.0).unwrap(),
            3,
            &grid,
            WeightConvention::UnweightedB1,
        )
        .unwrap();
        assert!(z.values.iter().all(|&v| v == 0.0));
    }
}
