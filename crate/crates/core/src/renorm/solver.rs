use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::dynamics::UnimodalQuadratic;
use crate::renorm::{itinerary_matches, scaling_factor_estimate, CombinatoricsSpec};
use crate::{Error, Result};

/// Arithmetic used when evaluating the functional equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    Double,
    /// Double-double evaluation of the collocation residual.
    Extended,
}

/// How the Newton Jacobian is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JacobianMode {
    /// Forward-mode derivative of the composition, exact up to rounding.
    #[default]
    Exact,
    /// Central differences with step `fd_step` relative to each unknown's scale.
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_iterations: usize,
    pub fd_step: f64,
    pub tolerance: f64,
    pub precision: Precision,
    pub jacobian: JacobianMode,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { max_iterations: 100, fd_step: 1e-7, tolerance: 1e-8, precision: Precision::Double, jacobian: JacobianMode::Exact }
    }
}

/// Even polynomial approximation `g(x) = g0 + sum a_i x^{2i}` of the period-p
/// fixed point `g^p(lambda x) = lambda g(x)`, normalised by `g(-2) = -2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenormFixedPointApprox {
    pub period: usize,
    pub degree: usize,
    pub lambda: f64,
    pub g0: f64,
    /// `a_1..a_N`.
    pub coefficients: Vec<f64>,
    /// Sup of the functional-equation residual over the collocation nodes.
    pub residual: f64,
    /// Sup of the residual over a dense grid of `[-2, 2]`.
    pub off_node_residual: f64,
    pub validity_radius: f64,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
}

impl RenormFixedPointApprox {
    pub fn eval(&self, x: f64) -> f64 {
        let t = x * x;
        let mut acc = 0.0;
        for a in self.coefficients.iter().rev() {
            acc = acc * t + a;
        }
        acc * t + self.g0
    }

    fn unknowns(&self) -> Vec<f64> {
        let mut u = Vec::with_capacity(self.degree + 2);
        u.push(self.g0);
        u.extend_from_slice(&self.coefficients);
        u.push(self.lambda);
        u
    }
}

#[derive(Debug, Clone)]
pub enum Seed {
    /// Rescaled superattracting map `f_c`.
    Parameter(f64),
    Approx(RenormFixedPointApprox),
}

trait Field: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + From<f64> {
    fn to_f64(self) -> f64;
}

impl Field for f64 {
    fn to_f64(self) -> f64 {
        self
    }
}

impl Field for TwoFloat {
    fn to_f64(self) -> f64 {
        self.into()
    }
}

fn horner<T: Field>(coef: &[T], x: T) -> T {
    let t = x * x;
    let mut acc = T::from(0.0);
    for &a in coef.iter().rev() {
        acc = acc * t + a;
    }
    acc
}

fn equation_residual<T: Field>(u: &[f64], p: usize, x: f64) -> f64 {
    let n = u.len() - 1;
    let coef: Vec<T> = u[..n].iter().map(|&v| T::from(v)).collect();
    let lambda = T::from(u[n]);
    let xt = T::from(x);
    let mut y = lambda * xt;
    for _ in 0..p {
        y = horner(&coef, y);
    }
    (y - lambda * horner(&coef, xt)).to_f64()
}

/// Row of `d residual / d unknowns` at node `x`, by propagating derivatives
/// through `y_{m+1} = g(y_m)` from `y_0 = lambda x`.
fn equation_gradient<T: Field>(u: &[f64], p: usize, x: f64) -> Vec<f64> {
    let n = u.len() - 1;
    let coef: Vec<T> = u[..n].iter().map(|&v| T::from(v)).collect();
    let lambda = T::from(u[n]);
    let xt = T::from(x);
    let zero = T::from(0.0);
    // Derivative of g in its argument.
    let dg = |y: T| {
        let t = y * y;
        let mut acc = zero;
        for k in (1..n).rev() {
            acc = acc * t + T::from(2.0 * k as f64) * coef[k];
        }
        acc * y
    };
    let mut y = lambda * xt;
    let mut grad = vec![zero; n + 1];
    grad[n] = xt;
    for _ in 0..p {
        let slope = dg(y);
        let t = y * y;
        let mut power = T::from(1.0);
        for g in grad.iter_mut().take(n) {
            *g = slope * *g + power;
            power = power * t;
        }
        grad[n] = slope * grad[n];
        y = horner(&coef, y);
    }
    let tx = xt * xt;
    let mut power = T::from(1.0);
    for g in grad.iter_mut().take(n) {
        *g = *g - lambda * power;
        power = power * tx;
    }
    grad[n] = grad[n] - horner(&coef, xt);
    grad.into_iter().map(Field::to_f64).collect()
}

fn exact_jacobian(u: &[f64], p: usize, nodes: &[f64], precision: Precision) -> DMatrix<f64> {
    let n = u.len();
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for (i, &x) in nodes.iter().enumerate() {
        let row = match precision {
            Precision::Double => equation_gradient::<f64>(u, p, x),
            Precision::Extended => equation_gradient::<TwoFloat>(u, p, x),
        };
        for (k, v) in row.into_iter().enumerate() {
            jac[(i, k)] = v;
        }
    }
    // Normalisation row: d/da_k g(-2) = 4^k.
    let last = nodes.len();
    for k in 0..n - 1 {
        jac[(last, k)] = 4f64.powi(k as i32);
    }
    jac
}

fn finite_difference_jacobian(u: &[f64], p: usize, nodes: &[f64], options: &SolverOptions) -> DMatrix<f64> {
    let n = u.len();
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        // Coefficient k multiplies x^{2k} with |x| <= 2, so its natural scale is 4^-k.
        let scale = if k + 1 == n { 1.0 } else { 0.25f64.powi(k as i32) };
        let h = options.fd_step * u[k].abs().max(scale);
        let mut plus = u.to_vec();
        plus[k] += h;
        let mut minus = u.to_vec();
        minus[k] -= h;
        let rp = residual_vector(&plus, p, nodes, options.precision);
        let rm = residual_vector(&minus, p, nodes, options.precision);
        for i in 0..n {
            jac[(i, k)] = (rp[i] - rm[i]) / (2.0 * h);
        }
    }
    jac
}

fn residual_vector(u: &[f64], p: usize, nodes: &[f64], precision: Precision) -> Vec<f64> {
    let mut r: Vec<f64> = nodes
        .iter()
        .map(|&x| match precision {
            Precision::Double => equation_residual::<f64>(u, p, x),
            Precision::Extended => equation_residual::<TwoFloat>(u, p, x),
        })
        .collect();
    let n = u.len() - 1;
    r.push(horner(&u[..n], -2.0) + 2.0);
    r
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| if x.is_nan() { f64::INFINITY } else { m.max(x.abs()) })
}

/// Chebyshev nodes in `t = x^2` over `[0, 4]`, mapped back to `x in [0, 2]`.
fn collocation_nodes(count: usize) -> Vec<f64> {
    (0..count)
        .map(|j| {
            let theta = (2 * j + 1) as f64 * std::f64::consts::PI / (2 * count) as f64;
            (2.0 + 2.0 * theta.cos()).sqrt()
        })
        .collect()
}

fn seed_from_parameter(p: usize, degree: usize, c: f64) -> Result<Vec<f64>> {
    let f = UnimodalQuadratic::new(c)?;
    let spec = CombinatoricsSpec::closest_to_chebyshev(p)?;
    if !itinerary_matches(&f, &spec) {
        return Err(Error::Config(format!("seed parameter {c} does not have the period-{p} itinerary")));
    }
    let lambda = scaling_factor_estimate(&f, p)?;
    // Conjugate by x -> s x so that beta moves to -2.
    let s = f.beta_abs() / 2.0;
    let mut u = vec![0.0; degree + 2];
    u[0] = c / s;
    u[1] = -s;
    u[degree + 1] = lambda;
    Ok(u)
}

fn dense_residual(u: &[f64], p: usize, radius: f64, samples: usize) -> f64 {
    (0..=samples).map(|i| equation_residual::<f64>(u, p, radius * i as f64 / samples as f64).abs()).fold(0.0, f64::max)
}

fn validity_radius(u: &[f64], p: usize) -> f64 {
    let mut r = 0.0;
    let step = 0.01;
    let mut x: f64 = 0.0;
    while x <= 4.0 {
        let v = equation_residual::<f64>(u, p, x);
        if !(v.abs() <= 1e-6) {
            break;
        }
        r = x;
        x += step;
    }
    r
}

/// Damped Newton iteration on the collocation system with a finite-difference Jacobian.
pub fn cvitanovic_solve(p: usize, degree: usize, seed: &Seed, options: &SolverOptions) -> Result<RenormFixedPointApprox> {
    if p < 2 {
        return Err(Error::Config(format!("period {p} must be at least 2")));
    }
    if degree < 8 {
        return Err(Error::Config(format!("degree {degree} must be at least 8")));
    }
    let mut u = match seed {
        Seed::Parameter(c) => seed_from_parameter(p, degree, *c)?,
        Seed::Approx(a) => {
            if a.period != p {
                return Err(Error::Config(format!("seed has period {} but {p} was requested", a.period)));
            }
            let mut u = a.unknowns();
            // Pad or truncate to the requested degree, keeping lambda last.
            let lambda = u.pop().unwrap_or(-0.4);
            u.resize(degree + 1, 0.0);
            u.push(lambda);
            u
        }
    };
    let n = degree + 2;
    let nodes = collocation_nodes(degree + 1);
    let mut r = residual_vector(&u, p, &nodes, options.precision);
    let mut norm = sup(&r);
    let mut history = vec![norm];
    let mut iterations = 0;
    while iterations < options.max_iterations && norm > 1e-14 {
        let jac = match options.jacobian {
            JacobianMode::Exact => exact_jacobian(&u, p, &nodes, options.precision),
            JacobianMode::FiniteDifference => finite_difference_jacobian(&u, p, &nodes, options),
        };
        let rhs = DVector::from_iterator(n, r.iter().map(|v| -v));
        let step = jac.lu().solve(&rhs).ok_or(Error::SingularJacobian { iteration: iterations })?;
        if step.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularJacobian { iteration: iterations });
        }
        iterations += 1;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = u.iter().zip(step.iter()).map(|(a, d)| a + t * d).collect();
            let rt = residual_vector(&trial, p, &nodes, options.precision);
            let nt = sup(&rt);
            if nt < norm {
                u = trial;
                r = rt;
                norm = nt;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        history.push(norm);
        if !accepted {
            break;
        }
    }
    let lambda = u[n - 1];
    if !(norm < options.tolerance) || !(lambda > -1.0 && lambda < 0.0) {
        return Err(Error::NonConverged { last: norm, history });
    }
    Ok(RenormFixedPointApprox {
        period: p,
        degree,
        lambda,
        g0: u[0],
        coefficients: u[1..n - 1].to_vec(),
        residual: norm,
        off_node_residual: dense_residual(&u, p, 2.0, 400),
        validity_radius: validity_radius(&u, p),
        iterations,
        residual_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn period_two_from_golden_mean_map() {
        let sol = cvitanovic_solve(2, 20, &Seed::Parameter(1.0), &SolverOptions::default()).unwrap();
        assert!(sol.residual < 1e-8);
        assert!((1.0 / sol.lambda.abs() - 2.502907875).abs() < 1e-6, "{}", sol.lambda);
        assert!((sol.eval(-2.0) + 2.0).abs() < 1e-10, "{:?}", sol.residual_history);
    }

    #[test]
    fn solution_is_a_fixed_point_of_the_solver() {
        let opts = SolverOptions::default();
        let sol = cvitanovic_solve(2, 16, &Seed::Parameter(1.0), &opts).unwrap();
        let again = cvitanovic_solve(2, 16, &Seed::Approx(sol.clone()), &opts).unwrap();
        assert!(again.iterations <= 1);
        assert!(again.residual <= sol.residual);
        assert_eq!(again.lambda, sol.lambda);
    }

    #[test]
    fn rejects_low_degree() {
        assert!(cvitanovic_solve(2, 4, &Seed::Parameter(1.0), &SolverOptions::default()).is_err());
    }
}
