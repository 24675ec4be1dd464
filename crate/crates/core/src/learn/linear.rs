//! L2-regularised logistic regression fitted by damped Newton steps.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    /// Inverse regularisation strength.
    pub c: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            c: 1.0,
            max_iter: 10_000,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Logistic {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FitTrace {
    /// Objective value before the first and after every accepted step.
    pub losses: Vec<f64>,
    pub converged: bool,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(z))` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

struct Problem<'a> {
    x: &'a [Vec<f64>],
    y: &'a [bool],
    lambda: f64,
}

impl Problem<'_> {
    /// Mean log-loss plus `lambda/2 · |w|²`; the intercept is unpenalised.
    /// Parameters are `[w..., b]`.
    fn loss(&self, theta: &[f64]) -> f64 {
        let d = theta.len() - 1;
        let mut total = 0.0;
        for (row, &yi) in self.x.iter().zip(self.y) {
            let z = dot(&theta[..d], row) + theta[d];
            total += if yi { softplus(-z) } else { softplus(z) };
        }
        let reg: f64 = theta[..d].iter().map(|w| w * w).sum();
        total / self.x.len() as f64 + 0.5 * self.lambda * reg
    }

    fn gradient_hessian(&self, theta: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let d = theta.len() - 1;
        let n = self.x.len() as f64;
        let mut g = DVector::zeros(d + 1);
        let mut h = DMatrix::zeros(d + 1, d + 1);
        let mut xa = vec![0.0; d + 1];
        for (row, &yi) in self.x.iter().zip(self.y) {
            xa[..d].copy_from_slice(row);
            xa[d] = 1.0;
            let p = sigmoid(dot(&theta[..d], row) + theta[d]);
            let r = p - if yi { 1.0 } else { 0.0 };
            let s = p * (1.0 - p);
            for a in 0..=d {
                g[a] += r * xa[a];
                if s > 0.0 && xa[a] != 0.0 {
                    let sa = s * xa[a];
                    for b in a..=d {
                        h[(a, b)] += sa * xa[b];
                    }
                }
            }
        }
        g /= n;
        h /= n;
        for a in 0..=d {
            for b in 0..a {
                h[(a, b)] = h[(b, a)];
            }
        }
        for a in 0..d {
            g[a] += self.lambda * theta[a];
            h[(a, a)] += self.lambda;
        }
        (g, h)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Fit on already-scaled rows. Each step is a Newton direction (falling back
/// to the gradient when the Hessian is not positive definite) with Armijo
/// backtracking, so the objective never increases.
pub fn fit_logistic(
    x: &[Vec<f64>],
    y: &[bool],
    params: &LogisticParams,
) -> Result<(Logistic, FitTrace)> {
    if x.is_empty() {
        return Err(Error::Training("empty training set".into()));
    }
    if !(params.c > 0.0) {
        return Err(Error::config(format!("C must be positive, got {}", params.c)));
    }
    let d = x[0].len();
    let problem = Problem {
        x,
        y,
        lambda: 1.0 / (params.c * x.len() as f64),
    };
    let mut theta = vec![0.0; d + 1];
    let mut loss = problem.loss(&theta);
    let mut trace = FitTrace {
        losses: vec![loss],
        converged: false,
    };
    for _ in 0..params.max_iter {
        let (g, h) = problem.gradient_hessian(&theta);
        if g.norm() < params.tol {
            trace.converged = true;
            break;
        }
        let direction = match h.clone().cholesky() {
            Some(ch) => ch.solve(&(-&g)),
            None => -&g,
        };
        let slope = g.dot(&direction);
        let mut step = 1.0;
        let mut accepted = false;
        while step > 1e-12 {
            let candidate: Vec<f64> = theta
                .iter()
                .zip(direction.iter())
                .map(|(t, d)| t + step * d)
                .collect();
            let cand_loss = problem.loss(&candidate);
            if cand_loss <= loss + 1e-4 * step * slope {
                theta = candidate;
                loss = cand_loss;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            trace.converged = true;
            break;
        }
        trace.losses.push(loss);
    }
    Ok((
        Logistic {
            coefficients: theta[..d].to_vec(),
            intercept: theta[d],
        },
        trace,
    ))
}

impl Logistic {
    pub fn score(&self, scaled_row: &[f64]) -> f64 {
        sigmoid(dot(&self.coefficients, scaled_row) + self.intercept)
    }
}
