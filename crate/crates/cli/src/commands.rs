//! Subcommand implementations. Each returns an [`Output`] that `main` writes
//! to `--out` or stdout.

use std::str::FromStr;

use fraclab_core::chainrule::faa_di_bruno_terms;
use fraclab_core::chebyshev::lobatto_nodes;
use fraclab_core::kernel::{check_near_fractional, KernelForm, KernelSpec, Profile, MAX_DERIVATIVE_ORDER};
use fraclab_core::ladder::{
    analyticity_radius, check_recursive_estimate, compute_mk, compute_nk, default_r_grid, GridSamples, TWO_E,
};
use fraclab_core::majorant::{geometric_majorant, majorant_recursion, recursion_ode_solve};
use fraclab_core::operator::plane_wave_multiplier;
use fraclab_core::schauder::check_scaled_schauder;
use fraclab_core::solver::{
    manufacture_at, solve_linear, solve_semilinear, FnNonlinearity, InitialGuess, Problem, Solution,
};
use fraclab_core::{ExteriorRule, FieldFunction, QuadratureParams, WeightConvention};
use num_rational::BigRational;
use serde_json::{json, Value};

use crate::config::{Config, ConventionConfig, ExteriorConfig, LadderSource, NonlinearityConfig, RhsConfig};
use crate::error::CliError;
use crate::verify;

pub enum Output {
    Json(Value),
    Csv {
        header: Vec<String>,
        rows: Vec<Vec<String>>,
    },
    Text(String),
}

impl Output {
    fn csv(header: &[&str], rows: Vec<Vec<String>>) -> Self {
        Output::Csv {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows,
        }
    }

    pub fn render(&self) -> Result<String, CliError> {
        match self {
            Output::Json(v) => Ok(serde_json::to_string_pretty(v).expect("values serialize") + "\n"),
            Output::Text(t) => Ok(t.clone()),
            Output::Csv { header, rows } => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(header).map_err(csv_err)?;
                for r in rows {
                    w.write_record(r).map_err(csv_err)?;
                }
                let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
                Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
            }
        }
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(std::io::Error::other(e))
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn field_json(u: &FieldFunction) -> Value {
    json!({
        "n": u.n(),
        "R": u.radius(),
        "nodes": u.nodes(),
        "values": u.values(),
        "exterior": serde_json::to_value(ExteriorConfig::from(u.exterior())).expect("exterior serializes"),
        "sup_bound": u.sup_bound(),
    })
}

pub fn kernel_json(k: &KernelSpec) -> Value {
    let (form, params) = match &k.form {
        KernelForm::PureFractional => ("pure", json!({})),
        KernelForm::PerturbedFractional { epsilon, profile } => (
            "perturbed",
            json!({
                "epsilon": epsilon,
                "profile": match profile { Profile::Rational => "rational", Profile::Gaussian => "gaussian" },
            }),
        ),
        KernelForm::Tabulated(t) => ("tabulated", json!({ "radii": t.radii(), "phi": t.values() })),
    };
    json!({
        "n": k.n, "s": k.s, "a0": k.a0, "eta": k.eta,
        "c_k": k.c_k, "h": k.h, "form": form, "params": params,
    })
}

struct Setup {
    kernel: KernelSpec,
    rule: ExteriorRule,
    radius: f64,
    intervals: usize,
    quadrature: QuadratureParams,
}

fn setup(c: &Config) -> Result<Setup, CliError> {
    c.grid.validate()?;
    let kernel = c.kernel.build()?;
    let rule = c.exterior.build()?;
    let quadrature = c
        .quadrature
        .apply(QuadratureParams::for_grid(c.grid.radius, c.grid.intervals))?;
    Ok(Setup {
        kernel,
        rule,
        radius: c.grid.radius,
        intervals: c.grid.intervals,
        quadrature,
    })
}

/// `K u_exact` at `targets`, with `u_exact` the exterior rule sampled on the
/// reference grid.
fn manufactured_rhs(c: &Config, s: &Setup, targets: &[f64]) -> Result<Vec<f64>, CliError> {
    let n_ref = c.manufacture.reference_intervals;
    if !(2..=2048).contains(&n_ref) {
        return Err(CliError::Validation(format!(
            "reference_intervals {n_ref} outside 2..=2048"
        )));
    }
    let reference = FieldFunction::from_rule(s.radius, n_ref, s.rule.clone())?;
    let q = QuadratureParams::reference(s.radius, n_ref);
    Ok(manufacture_at(&reference, &s.kernel, &q, targets)?)
}

pub fn kernel_info(c: &Config) -> Result<Output, CliError> {
    let k = c.kernel.build()?;
    let sample: Vec<Vec<f64>> = (1..=64)
        .map(|i| {
            let mut y = vec![0.0; k.n];
            y[0] = 10f64.powf(-3.0 + 4.0 * i as f64 / 64.0);
            y
        })
        .collect();
    let mut v = kernel_json(&k);
    v["max_derivative_order"] = json!(k.max_order().min(MAX_DERIVATIVE_ORDER));
    v["near_fractional_deviation"] = json!(check_near_fractional(&k, &sample)?);
    if k.n == 1 {
        v["plane_wave_multiplier_xi1"] = json!(plane_wave_multiplier(&k, 1.0));
    }
    Ok(Output::Json(v))
}

fn problem(s: &Setup) -> Problem {
    let mut p = Problem::new(s.kernel.clone(), s.radius, s.intervals, s.rule.clone());
    p.quadrature = s.quadrature.clone();
    p
}

fn solve_with(c: &Config, s: &Setup) -> Result<(Solution, bool), CliError> {
    let nodes = lobatto_nodes(s.intervals, s.radius);
    let interior = &nodes[1..s.intervals];
    let (f, manufactured) = match c.solve.rhs {
        RhsConfig::Constant { value } => (vec![value; interior.len()], false),
        RhsConfig::Manufactured => (manufactured_rhs(c, s, interior)?, true),
    };
    let p = problem(s);
    let coefficient = match c.solve.nonlinearity {
        NonlinearityConfig::None => {
            let sol = solve_linear(&p, &f, c.solve.tol.unwrap_or(1e-8))?;
            return Ok((sol, manufactured));
        }
        NonlinearityConfig::Affine { coefficient } | NonlinearityConfig::Cubic { coefficient } => coefficient,
    };
    let cubic = matches!(c.solve.nonlinearity, NonlinearityConfig::Cubic { .. });
    let power = |u: f64| if cubic { u * u * u } else { u };
    // g(x_i) = f_i − c·u_exact(x_i)^p, so that u_exact stays the solution
    let g: Vec<f64> = interior
        .iter()
        .zip(&f)
        .map(|(&x, &fi)| {
            if manufactured {
                fi - coefficient * power(s.rule.eval(x))
            } else {
                fi
            }
        })
        .collect();
    let index = |x: f64| interior.partition_point(|&z| z < x).min(g.len() - 1);
    let rhs = FnNonlinearity {
        f: |x: f64, u: f64| coefficient * power(u) + g[index(x)],
        df: |_x: f64, u: f64| if cubic { 3.0 * coefficient * u * u } else { coefficient },
    };
    let sol = solve_semilinear(
        &p,
        &rhs,
        InitialGuess::Linear,
        c.solve.tol.unwrap_or(1e-6),
        c.solve.max_iter,
    )?;
    Ok((sol, manufactured))
}

pub fn solve(c: &Config) -> Result<Output, CliError> {
    let s = setup(c)?;
    let (sol, manufactured) = solve_with(c, &s)?;
    let mut v = json!({
        "nodes": sol.field.nodes(),
        "values": sol.field.values(),
        "residual": sol.residual,
        "iterations": sol.iterations,
        "residual_history": sol.residual_history,
        "condition": sol.condition,
        "field": field_json(&sol.field),
    });
    if manufactured {
        let err = sol
            .field
            .nodes()
            .iter()
            .zip(sol.field.values())
            .map(|(&x, v)| (v - s.rule.eval(x)).abs())
            .fold(0.0, f64::max);
        v["sup_error"] = json!(err);
    }
    Ok(Output::Json(v))
}

pub fn manufacture(c: &Config) -> Result<Output, CliError> {
    let s = setup(c)?;
    let nodes = lobatto_nodes(s.intervals, s.radius);
    let interior = &nodes[1..s.intervals];
    let f = manufactured_rhs(c, &s, interior)?;
    let rows = interior
        .iter()
        .zip(&f)
        .map(|(&x, &fx)| vec![num(x), num(s.rule.eval(x)), num(fx)])
        .collect();
    Ok(Output::csv(&["x", "u_exact", "f"], rows))
}

fn rhs_samples(c: &Config, s: &Setup, radius: f64, intervals: usize) -> Result<GridSamples, CliError> {
    if radius >= s.radius {
        return Err(CliError::Validation(format!(
            "right-hand side radius {radius} must be below the grid radius {}",
            s.radius
        )));
    }
    let nodes = lobatto_nodes(intervals, radius);
    Ok(GridSamples::new(radius, manufactured_rhs(c, s, &nodes)?)?)
}

pub fn ladder(c: &Config) -> Result<Output, CliError> {
    let s = setup(c)?;
    let l = &c.ladder;
    let u = match l.source {
        LadderSource::Field => FieldFunction::from_rule(s.radius, s.intervals, s.rule.clone())?,
        LadderSource::Solution => {
            let mut c2 = c.clone();
            c2.solve.rhs = RhsConfig::Manufactured;
            c2.solve.nonlinearity = NonlinearityConfig::None;
            solve_with(&c2, &s)?.0.field
        }
    };
    let rhs_radius = l.rhs_radius.unwrap_or((0.999 * s.radius).min(1.0));
    let r_grid: Vec<f64> = match &l.r_grid {
        Some(g) => g.clone(),
        None => default_r_grid().into_iter().filter(|&r| r <= rhs_radius).collect(),
    };
    let m = compute_mk(&u, l.k_max, &r_grid)?;
    let f = rhs_samples(c, &s, rhs_radius, l.rhs_intervals)?;
    let convention = match l.convention {
        ConventionConfig::WeightedS => WeightConvention::PowKPlusS(s.kernel.s),
        ConventionConfig::UnweightedB1 => WeightConvention::UnweightedB1,
    };
    let n = compute_nk(&f, l.k_max, &r_grid, convention)?;
    let ck = if l.k_max >= 1 {
        check_recursive_estimate(&m, &n, s.kernel.h, TWO_E, 0..=l.k_max - 1)?
    } else {
        Vec::new()
    };
    let fit = analyticity_radius(&m).ok();
    if let Some(fit) = &fit {
        if fit.polynomial {
            eprintln!(
                "ladder: polynomial growth (infinite radius), fit window k in [{}, {}]",
                fit.window.0, fit.window.1
            );
        } else {
            eprintln!(
                "ladder: fitted A = {:e}, radius = {:e}, fit window k in [{}, {}]",
                fit.fitted_a, fit.radius, fit.window.0, fit.window.1
            );
        }
    }
    let rows = (0..=l.k_max)
        .map(|k| {
            let a_k = match (&fit, k) {
                (Some(f), k) if k >= 1 => num(f.a_k[k - 1]),
                _ => String::new(),
            };
            vec![
                k.to_string(),
                num(m.values[k]),
                num(n.values[k]),
                a_k,
                ck.get(k).map(|&v| num(v)).unwrap_or_default(),
            ]
        })
        .collect();
    Ok(Output::csv(&["k", "M_k", "N_k", "A_k", "C_k"], rows))
}

fn parse_rational(name: &str, text: &str) -> Result<BigRational, CliError> {
    BigRational::from_str(text.trim())
        .map_err(|e| CliError::Validation(format!("{name} = {text:?} is not an exact rational (p or p/q): {e}")))
}

pub fn majorant(c: &Config) -> Result<Output, CliError> {
    let m = &c.majorant;
    let cc = parse_rational("C", &m.c)?;
    let cf = parse_rational("C_f", &m.c_f)?;
    let a = parse_rational("A", &m.a)?;
    let m0 = parse_rational("M0", &m.m0)?;
    let rec = majorant_recursion(&cc, &cf, &a, &m0, m.k_max)?;
    let g = geometric_majorant(&cc, &a, m.k_max)?;
    let g_f = geometric_majorant(&(&cc * &cf), &a, m.k_max)?;
    // k!·c_k of the ODE solution, which must reproduce the recursion
    let ode = recursion_ode_solve(&g.series, &g_f.series, &m0, m.k_max)?.derivatives_at_zero();
    let rows = (0..=m.k_max)
        .map(|k| {
            let (r, o) = (rec.coeff(k), &ode[k]);
            vec![
                k.to_string(),
                r.numer().to_string(),
                r.denom().to_string(),
                o.numer().to_string(),
                o.denom().to_string(),
            ]
        })
        .collect();
    Ok(Output::csv(
        &["k", "m_tilde_num", "m_tilde_den", "ode_scaled_num", "ode_scaled_den"],
        rows,
    ))
}

pub fn schauder(c: &Config) -> Result<Output, CliError> {
    let s = setup(c)?;
    let sc = &c.schauder;
    let u = FieldFunction::from_rule(s.radius, s.intervals, s.rule.clone())?;
    let reach = sc.radii.iter().fold(0.0f64, |m, &r| m.max(sc.center.abs() + r));
    let f = rhs_samples(c, &s, reach, sc.rhs_intervals)?;
    let rows = sc
        .radii
        .iter()
        .map(|&r| {
            let res = check_scaled_schauder(&u, &f, sc.center, r, sc.alpha, s.kernel.s)?;
            Ok(vec![
                num(r),
                num(sc.alpha),
                num(res.lhs),
                num(res.rhs),
                num(res.constant),
            ])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Output::csv(&["r", "alpha", "lhs", "rhs", "C"], rows))
}

pub fn verify(c: &Config) -> Result<Output, CliError> {
    let report = verify::run(&c.verify, c.seed)?;
    if report.all_passed() {
        Ok(Output::Text(report.table()))
    } else {
        Err(CliError::Numerical {
            message: format!("verification failures\n{}", report.table()),
            payload: serde_json::to_value(&report).expect("report serializes"),
        })
    }
}

pub fn parse_alpha(text: &str) -> Result<Vec<u8>, CliError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<u8>()
                .map_err(|_| CliError::Validation(format!("alpha entry {t:?} is not a small nonnegative integer")))
        })
        .collect()
}

pub fn expand(alpha: &[u8], m2: usize) -> Result<Output, CliError> {
    let terms = faa_di_bruno_terms(alpha, m2)?;
    let mut out = String::new();
    for t in &terms {
        let beta = t.outer_multiindex(m2);
        let mut line = format!("{} * f{beta:?}", t.coefficient);
        for f in &t.factors {
            line.push_str(&format!(" * g{}{:?}", f.component, f.gamma));
        }
        out.push_str(&line);
        out.push('\n');
    }
    Ok(Output::Text(out))
}
