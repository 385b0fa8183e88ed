use fraclab_core::chainrule::{binomial_sweep, evaluate_composition_derivative};
use fraclab_core::chebyshev::lobatto_nodes;
use fraclab_core::field::{ExteriorRule, FieldFunction};
use fraclab_core::kernel::KernelSpec;
use fraclab_core::ladder::{
    analyticity_radius, check_higher_order_estimate, compute_mk, compute_nk, default_r_grid, GridSamples,
    WeightConvention,
};
use fraclab_core::majorant::{dominate_check, fit_domination_constants, majorant_recursion};
use fraclab_core::operator::{plane_wave_multiplier, QuadratureParams};
use fraclab_core::polynomial::{chain_rule_tables, multiindices_up_to, Polynomial};
use fraclab_core::solver::{manufacture_at, solve_linear, Problem};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_poly(rng: &mut ChaCha8Rng, nvars: usize, degree: usize) -> Polynomial {
    let terms = multiindices_up_to(nvars, degree)
        .into_iter()
        .filter_map(|e| rng.gen_bool(0.6).then(|| (e, BigInt::from(rng.gen_range(-4i64..=4)))))
        .collect::<Vec<_>>();
    Polynomial::from_terms(nvars, terms).unwrap()
}

#[test]
fn chain_rule_matches_symbolic_composition() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (m1, m2) in [(1, 1), (2, 2), (2, 3), (3, 1)] {
        let f = random_poly(&mut rng, m2, 3);
        let g: Vec<Polynomial> = (0..m2).map(|_| random_poly(&mut rng, m1, 2)).collect();
        let h = f.compose(&g).unwrap();
        let x: Vec<BigInt> = (0..m1).map(|_| BigInt::from(rng.gen_range(-2i64..=2))).collect();
        let (ft, gt) = chain_rule_tables(&f, &g, &x, 4);
        for alpha in multiindices_up_to(m1, 4).into_iter().skip(1) {
            let got = evaluate_composition_derivative(&ft, &gt, &alpha).unwrap();
            assert_eq!(got, h.partial(&alpha).eval(&x), "alpha {alpha:?}");
        }
    }
}

#[test]
fn binomial_estimate_small_sweep() {
    assert!(binomial_sweep(60).unwrap().is_empty());
}

#[test]
fn manufactured_gaussian_ladder_is_dominated() {
    let kernel = KernelSpec::pure(1, 1.5, 1.0).unwrap();
    let rule = ExteriorRule::Gaussian {
        amp: 1.0,
        center: 0.0,
        width: 1.0,
    };
    let radius = 2.0;
    let reference = FieldFunction::from_rule(radius, 256, rule.clone()).unwrap();
    let rq = QuadratureParams::reference(radius, 256);
    let nodes = lobatto_nodes(64, radius);
    let f = manufacture_at(&reference, &kernel, &rq, &nodes[1..64]).unwrap();
    let sol = solve_linear(&Problem::new(kernel.clone(), radius, 64, rule.clone()), &f, 1e-9).unwrap();
    let err = sol
        .field
        .values()
        .iter()
        .zip(&nodes)
        .map(|(v, &x)| (v - rule.eval(x)).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-6, "solve error {err}");

    let grid = default_r_grid();
    let m = compute_mk(&sol.field, 10, &grid).unwrap();
    let f_nodes = lobatto_nodes(48, 1.0);
    let fs = GridSamples::new(1.0, manufacture_at(&reference, &kernel, &rq, &f_nodes).unwrap()).unwrap();
    let n = compute_nk(&fs, 10, &grid, WeightConvention::PowKPlusS(kernel.s)).unwrap();
    let dc = fit_domination_constants(&m, &n, kernel.h, 10).unwrap();
    let majorant = majorant_recursion(&dc.c, &dc.c_f, &dc.a, &dc.m0, 10).unwrap();
    assert_eq!(dominate_check(&m, &majorant, &BigRational::one()), None);
}

#[test]
fn lorentzian_radius_is_one() {
    let rule = ExteriorRule::Lorentzian {
        amp: 1.0,
        center: 0.0,
        width: 1.0,
    };
    let u = FieldFunction::from_rule(2.0, 128, rule).unwrap();
    let fit = analyticity_radius(&compute_mk(&u, 12, &default_r_grid()).unwrap()).unwrap();
    assert!(!fit.polynomial);
    assert!((fit.radius - 1.0).abs() < 0.15, "radius {}", fit.radius);
}

#[test]
fn higher_order_ratio_scales_like_sigma_power() {
    // for small σ the bracket is dominated by σ^{−k}, so the ratio scales like σ^{k+1}
    let rule = ExteriorRule::Cosine {
        amp: 1.0,
        freq: 1.0,
        phase: 0.0,
    };
    let u = FieldFunction::from_rule(1.0, 64, rule).unwrap();
    let f = GridSamples::from_fn(1.0, 64, |x| {
        -plane_wave_multiplier(&KernelSpec::pure(1, 1.5, 1.0).unwrap(), 1.0) * libm::cos(x)
    })
    .unwrap();
    let k = 3;
    let a = check_higher_order_estimate(&u, &f, 0.0, 0.01, k, 1.0, 1.5).unwrap();
    let b = check_higher_order_estimate(&u, &f, 0.0, 0.005, k, 1.0, 1.5).unwrap();
    let ratio = a / b;
    let expected = 2f64.powi(k as i32 + 1);
    assert!(a.is_finite() && a > 0.0);
    assert!((ratio / expected - 1.0).abs() < 0.1, "ratio {ratio}");
    let bounded: Vec<f64> = (1..=6)
        .map(|k| check_higher_order_estimate(&u, &f, 0.0, 0.01, k, 1.0, 1.5).unwrap())
        .collect();
    assert!(bounded.iter().all(|c| c.is_finite() && *c < 1.0));
}
