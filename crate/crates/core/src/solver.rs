//! Dense collocation solves of `Ku = f` and `Ku = f(x, u)` with prescribed
//! exterior data, plus right-hand-side manufacturing.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::error::{bail, Error, Result};
use crate::field::{ExteriorRule, FieldFunction};
use crate::kernel::KernelSpec;
use crate::operator::{assemble_matrix, evaluate_k_many, Assembly, QuadratureParams};

/// Condition estimates above this are reported as singular.
pub const MAX_CONDITION: f64 = 1e14;
/// Maximum number of step halvings in the Newton line search.
pub const MAX_HALVINGS: usize = 30;

/// A collocation problem on the Lobatto grid of `[−R, R]`.
#[derive(Debug, Clone)]
pub struct Problem {
    pub kernel: KernelSpec,
    pub radius: f64,
    pub intervals: usize,
    pub exterior: ExteriorRule,
    pub quadrature: QuadratureParams,
}

impl Problem {
    /// Problem with default quadrature for the grid.
    pub fn new(kernel: KernelSpec, radius: f64, intervals: usize, exterior: ExteriorRule) -> Self {
        let quadrature = QuadratureParams::for_grid(radius, intervals);
        Self {
            kernel,
            radius,
            intervals,
            exterior,
            quadrature,
        }
    }

    pub fn assemble(&self) -> Result<Assembly> {
        assemble_matrix(
            self.radius,
            self.intervals,
            &self.kernel,
            &self.exterior,
            &self.quadrature,
            self.exterior.sup(),
        )
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub field: FieldFunction,
    /// `‖A·v + b − f‖_∞` at the collocation nodes for the returned values.
    pub residual: f64,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub condition: f64,
}

/// Right-hand side `f(x, u)` with its `u`-derivative.
pub trait Nonlinearity {
    fn value(&self, x: f64, u: f64) -> f64;
    fn du(&self, x: f64, u: f64) -> f64;
}

/// [`Nonlinearity`] from a pair of closures.
pub struct FnNonlinearity<F, G> {
    pub f: F,
    pub df: G,
}

impl<F: Fn(f64, f64) -> f64, G: Fn(f64, f64) -> f64> Nonlinearity for FnNonlinearity<F, G> {
    fn value(&self, x: f64, u: f64) -> f64 {
        (self.f)(x, u)
    }
    fn du(&self, x: f64, u: f64) -> f64 {
        (self.df)(x, u)
    }
}

/// Starting point for Newton's method.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialGuess {
    /// Solve `Ku = f(·, 0)`.
    Linear,
    Zero,
    Values(Vec<f64>),
}

struct Factored {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    condition: f64,
}

fn factor(matrix: &DMatrix<f64>) -> Result<Factored> {
    let lu = matrix.clone().lu();
    if !lu.is_invertible() {
        return Err(Error::Singular {
            condition: f64::INFINITY,
        });
    }
    let condition = one_norm(matrix) * inverse_one_norm_estimate(&lu);
    if !(condition <= MAX_CONDITION) {
        return Err(Error::Singular { condition });
    }
    Ok(Factored { lu, condition })
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn transpose_solve(lu: &nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>, b: &DVector<f64>) -> Option<DVector<f64>> {
    // PA = LU  ⇒  Aᵀx = b  ⇔  Uᵀ Lᵀ (P x) = b
    let y = lu.u().tr_solve_upper_triangular(b)?;
    let mut l = lu.l();
    l.fill_diagonal(1.0);
    let mut w = l.tr_solve_lower_triangular(&y)?;
    lu.p().inv_permute_rows(&mut w);
    Some(w)
}

/// Hager's estimate of `‖A⁻¹‖₁`.
fn inverse_one_norm_estimate(lu: &nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>) -> f64 {
    let n = lu.u().nrows();
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut estimate = 0.0;
    for _ in 0..5 {
        let Some(y) = lu.solve(&x) else {
            return f64::INFINITY;
        };
        estimate = y.iter().map(|v| v.abs()).sum::<f64>();
        let sign = y.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
        let Some(z) = transpose_solve(lu, &sign) else {
            return f64::INFINITY;
        };
        let (j, zmax) = z.iter().enumerate().fold(
            (0, 0.0f64),
            |acc, (i, v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc },
        );
        if zmax <= z.dot(&x) {
            break;
        }
        x.fill(0.0);
        x[j] = 1.0;
    }
    estimate
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn field_from(assembly: &Assembly, interior: &[f64]) -> Result<FieldFunction> {
    let full = assembly.full_values(interior);
    let probe = FieldFunction::new(assembly.radius, full.clone(), assembly.exterior.clone(), f64::MAX / 4.0)?;
    // sup over a fine sampling of the interpolant, the nodes and the exterior
    let fine = 4 * full.len();
    let mut sup = assembly.exterior.sup();
    for j in 0..=fine {
        let x = assembly.radius * (2.0 * j as f64 / fine as f64 - 1.0);
        sup = sup.max(probe.eval(x).abs());
    }
    sup = full.iter().fold(sup, |m, v| m.max(v.abs()));
    FieldFunction::new(assembly.radius, full, assembly.exterior.clone(), sup)
}

/// Solves `A·v + b = f` at the interior nodes; `f` holds one value per interior node.
pub fn solve_linear(problem: &Problem, f: &[f64], tol: f64) -> Result<Solution> {
    let assembly = problem.assemble()?;
    solve_assembled(&assembly, f, tol)
}

/// As [`solve_linear`] with a pre-assembled operator.
pub fn solve_assembled(assembly: &Assembly, f: &[f64], tol: f64) -> Result<Solution> {
    let m = assembly.offset.len();
    if f.len() != m {
        bail!(
            InvalidParameter,
            "right-hand side has {} values, expected {m} interior nodes",
            f.len()
        );
    }
    if f.iter().any(|v| !v.is_finite()) {
        bail!(InvalidParameter, "right-hand side must be finite");
    }
    let factored = factor(&assembly.matrix)?;
    let target = DVector::from_column_slice(f) - &assembly.offset;
    let mut v = factored.lu.solve(&target).ok_or(Error::Singular {
        condition: factored.condition,
    })?;
    let mut history = Vec::new();
    let mut residual = inf_norm(&(&assembly.matrix * &v - &target));
    history.push(residual);
    // iterative refinement
    let mut steps = 0;
    while residual > tol && steps < 3 {
        let r = &target - &assembly.matrix * &v;
        if let Some(d) = factored.lu.solve(&r) {
            v += d;
        }
        residual = inf_norm(&(&assembly.matrix * &v - &target));
        history.push(residual);
        steps += 1;
    }
    if residual > tol {
        return Err(Error::NoConvergence {
            iterations: steps,
            residual_history: history,
        });
    }
    Ok(Solution {
        field: field_from(assembly, v.as_slice())?,
        residual,
        iterations: steps + 1,
        residual_history: history,
        condition: factored.condition,
    })
}

/// Newton's method with step halving for `A·v + b = f(x_i, v_i)`.
pub fn solve_semilinear(
    problem: &Problem,
    rhs: &dyn Nonlinearity,
    initial: InitialGuess,
    tol: f64,
    max_iter: usize,
) -> Result<Solution> {
    let assembly = problem.assemble()?;
    let nodes: Vec<f64> = assembly.interior_nodes().to_vec();
    let m = nodes.len();
    let mut v = match initial {
        InitialGuess::Zero => DVector::zeros(m),
        InitialGuess::Values(vals) => {
            if vals.len() != m {
                bail!(
                    InvalidParameter,
                    "initial guess has {} values, expected {m}",
                    vals.len()
                );
            }
            DVector::from_vec(vals)
        }
        InitialGuess::Linear => {
            let f0: Vec<f64> = nodes.iter().map(|&x| rhs.value(x, 0.0)).collect();
            let factored = factor(&assembly.matrix)?;
            let target = DVector::from_vec(f0) - &assembly.offset;
            factored.lu.solve(&target).ok_or(Error::Singular {
                condition: factored.condition,
            })?
        }
    };
    let residual_of = |v: &DVector<f64>| -> DVector<f64> {
        let mut r = assembly.apply(v);
        for (i, &x) in nodes.iter().enumerate() {
            r[i] -= rhs.value(x, v[i]);
        }
        r
    };
    let mut r = residual_of(&v);
    let mut norm = inf_norm(&r);
    let mut history = vec![norm];
    let mut condition = f64::NAN;
    let mut iterations = 0;
    while norm > tol {
        if iterations == max_iter || !norm.is_finite() {
            return Err(Error::NoConvergence {
                iterations,
                residual_history: history,
            });
        }
        let mut jacobian = assembly.matrix.clone();
        for (i, &x) in nodes.iter().enumerate() {
            jacobian[(i, i)] -= rhs.du(x, v[i]);
        }
        let factored = factor(&jacobian)?;
        condition = factored.condition;
        let step = factored.lu.solve(&(-&r)).ok_or(Error::Singular { condition })?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let trial = &v + &step * t;
            let rt = residual_of(&trial);
            let nt = inf_norm(&rt);
            if nt < norm {
                v = trial;
                r = rt;
                norm = nt;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        iterations += 1;
        history.push(norm);
        if !accepted {
            return Err(Error::NoConvergence {
                iterations,
                residual_history: history,
            });
        }
    }
    Ok(Solution {
        field: field_from(&assembly, v.as_slice())?,
        residual: norm,
        iterations,
        residual_history: history,
        condition,
    })
}

/// `f_i = Ku(x_i)` at the interior nodes of `u`.
pub fn manufacture(u: &FieldFunction, kernel: &KernelSpec, q: &QuadratureParams) -> Result<Vec<f64>> {
    let nodes = &u.nodes()[1..u.nodes().len() - 1];
    manufacture_at(u, kernel, q, nodes)
}

/// `Ku` at arbitrary points strictly inside the ball of `u`.
pub fn manufacture_at(
    u: &FieldFunction,
    kernel: &KernelSpec,
    q: &QuadratureParams,
    targets: &[f64],
) -> Result<Vec<f64>> {
    evaluate_k_many(u, targets, kernel, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(n: usize, ext: ExteriorRule) -> Problem {
        Problem::new(KernelSpec::pure(1, 1.5, 1.0).unwrap(), 1.0, n, ext)
    }

    #[test]
    fn zero_problem_has_zero_solution() {
        let p = problem(16, ExteriorRule::Zero);
        let sol = solve_linear(&p, &[0.0; 15], 1e-8).unwrap();
        assert!(sol.field.values().iter().all(|&v| v == 0.0));
        assert!(sol.residual <= 1e-8);
        let zero = FnNonlinearity {
            f: |_x: f64, _u: f64| 0.0,
            df: |_x: f64, _u: f64| 0.0,
        };
        let sol = solve_semilinear(&p, &zero, InitialGuess::Zero, 1e-6, 5).unwrap();
        assert!(sol.iterations <= 1);
        assert!(sol.field.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn doubling_rhs_doubles_solution() {
        let p = problem(20, ExteriorRule::Zero);
        let f: Vec<f64> = (0..19).map(|i| libm::cos(i as f64)).collect();
        let f2: Vec<f64> = f.iter().map(|v| 2.0 * v).collect();
        let a = solve_linear(&p, &f, 1e-8).unwrap();
        let b = solve_linear(&p, &f2, 1e-8).unwrap();
        for (x, y) in a.field.values().iter().zip(b.field.values()) {
            assert!((2.0 * x - y).abs() < 1e-12 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn condition_estimate_is_reasonable() {
        let m = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0]);
        let f = factor(&m).unwrap();
        let inv = m.clone().try_inverse().unwrap();
        let exact = one_norm(&m) * one_norm(&inv);
        assert!(f.condition <= exact * (1.0 + 1e-12) && f.condition >= 0.3 * exact);
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(factor(&singular), Err(Error::Singular { .. })));
    }

    #[test]
    fn transpose_solve_is_exact() {
        let m = DMatrix::from_row_slice(3, 3, &[0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0]);
        let lu = m.clone().lu();
        let b = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let x = transpose_solve(&lu, &b).unwrap();
        assert!((m.transpose() * x - b).norm() < 1e-13);
    }
}
