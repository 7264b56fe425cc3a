//! L1-regularized logistic regression by cyclic coordinate descent.
//!
//! Minimizes
//!
//! ```text
//! F(w, b) = ||w||_1 + |b| + C * sum_i log(1 + exp(-yhat_i * (w . x_i + b)))
//! ```
//!
//! with `yhat = 2y - 1`. The bias is an extra constant-1 column and is
//! penalized like any weight, so a dumped model reads as `weights` plus one
//! more regularized coefficient.
//!
//! Each coordinate takes a one-dimensional Newton step on the smooth part with
//! the L1 kink handled exactly (the step may land on zero), followed by an
//! Armijo backtracking search on the full objective. Every sweep starts by
//! measuring the largest violation of the subgradient optimality conditions;
//! the solver stops once it is at most `tol` or after `max_iter` sweeps.

use serde::{Deserialize, Serialize};

use super::{check_targets, Explanation, FeatureWeight};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

const ARMIJO_SIGMA: f64 = 0.01;
const MAX_HALVINGS: usize = 30;
const HESSIAN_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRegParams {
    pub c: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for LogRegParams {
    fn default() -> Self {
        LogRegParams {
            c: 1.0,
            max_iter: 100,
            tol: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRegDiagnostics {
    /// Completed coordinate sweeps.
    pub iterations: usize,
    pub objective: f64,
    pub converged: bool,
    /// Optimality violation measured at the last check.
    pub max_violation: f64,
    /// Objective before the first sweep and after each one.
    pub objective_trace: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRegModel {
    weights: Vec<f64>,
    bias: f64,
    diagnostics: LogRegDiagnostics,
}

/// `log(1 + exp(t))` without overflow.
fn log1pexp(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

pub(crate) fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

fn signed(y: u8) -> f64 {
    if y == 1 {
        1.0
    } else {
        -1.0
    }
}

fn margins(w: &[f64], b: f64, x: &FeatureMatrix) -> Vec<f64> {
    x.rows()
        .iter()
        .map(|row| row.iter().fold(b, |acc, &(f, v)| acc + w[f] * v))
        .collect()
}

/// `sum_i log(1 + exp(-yhat_i * (w . x_i + b)))`.
pub fn smooth_loss(w: &[f64], b: f64, x: &FeatureMatrix, y: &[u8]) -> f64 {
    margins(w, b, x)
        .iter()
        .zip(y)
        .map(|(&z, &label)| log1pexp(-signed(label) * z))
        .sum()
}

/// Gradient of [`smooth_loss`] with respect to `(w, b)`.
pub fn smooth_loss_gradient(w: &[f64], b: f64, x: &FeatureMatrix, y: &[u8]) -> (Vec<f64>, f64) {
    let mut gw = vec![0.0; w.len()];
    let mut gb = 0.0;
    for ((row, z), &label) in x.rows().iter().zip(margins(w, b, x)).zip(y) {
        let s = signed(label);
        // d/dz log(1 + exp(-s z)) = -s * sigmoid(-s z)
        let coef = -s * sigmoid(-s * z);
        gb += coef;
        for &(f, v) in row {
            gw[f] += coef * v;
        }
    }
    (gw, gb)
}

/// The full penalized objective `F(w, b)`.
pub fn objective(w: &[f64], b: f64, x: &FeatureMatrix, y: &[u8], c: f64) -> f64 {
    let l1: f64 = w.iter().map(|v| v.abs()).sum::<f64>() + b.abs();
    l1 + c * smooth_loss(w, b, x, y)
}

fn violation(w: f64, g: f64) -> f64 {
    if w > 0.0 {
        (g + 1.0).abs()
    } else if w < 0.0 {
        (g - 1.0).abs()
    } else {
        (g.abs() - 1.0).max(0.0)
    }
}

struct Solver {
    /// Feature columns, then the bias column last.
    columns: Vec<Vec<(usize, f64)>>,
    signs: Vec<f64>,
    z: Vec<f64>,
    coef: Vec<f64>,
    c: f64,
}

impl Solver {
    fn grad(&self, j: usize) -> f64 {
        self.columns[j]
            .iter()
            .map(|&(i, v)| -self.signs[i] * sigmoid(-self.signs[i] * self.z[i]) * v)
            .sum::<f64>()
            * self.c
    }

    fn grad_hess(&self, j: usize) -> (f64, f64) {
        let (mut g, mut h) = (0.0, 0.0);
        for &(i, v) in &self.columns[j] {
            let p = sigmoid(-self.signs[i] * self.z[i]);
            g -= self.signs[i] * p * v;
            h += p * (1.0 - p) * v * v;
        }
        (self.c * g, self.c * h + HESSIAN_FLOOR)
    }

    fn objective(&self) -> f64 {
        let l1: f64 = self.coef.iter().map(|v| v.abs()).sum();
        let loss: f64 = self
            .z
            .iter()
            .zip(&self.signs)
            .map(|(&z, &s)| log1pexp(-s * z))
            .sum();
        l1 + self.c * loss
    }

    /// One coordinate update; returns whether the coefficient moved.
    fn update(&mut self, j: usize) -> bool {
        let (g, h) = self.grad_hess(j);
        let w = self.coef[j];
        let d = if g + 1.0 <= h * w {
            -(g + 1.0) / h
        } else if g - 1.0 >= h * w {
            -(g - 1.0) / h
        } else {
            -w
        };
        if d == 0.0 || !d.is_finite() {
            return false;
        }
        let decrease = g * d + (w + d).abs() - w.abs();
        let mut lambda = 1.0;
        for _ in 0..MAX_HALVINGS {
            let step = lambda * d;
            let loss_change: f64 = self.columns[j]
                .iter()
                .map(|&(i, v)| {
                    let s = self.signs[i];
                    log1pexp(-s * (self.z[i] + step * v)) - log1pexp(-s * self.z[i])
                })
                .sum();
            let change = (w + step).abs() - w.abs() + self.c * loss_change;
            if change <= ARMIJO_SIGMA * lambda * decrease {
                // snap the full soft-threshold step to exactly zero
                let new_w = if lambda == 1.0 && d == -w {
                    0.0
                } else {
                    w + step
                };
                let applied = new_w - w;
                for &(i, v) in &self.columns[j] {
                    self.z[i] += applied * v;
                }
                self.coef[j] = new_w;
                return true;
            }
            lambda *= 0.5;
        }
        false
    }
}

/// Fits `(w, b)`. Both classes must be present.
pub fn logreg_fit(x: &FeatureMatrix, y: &[u8], params: &LogRegParams) -> Result<LogRegModel> {
    check_targets(x, y)?;
    if !(params.c > 0.0 && params.c.is_finite()) {
        return Err(Error::Config(format!("C must be > 0, got {}", params.c)));
    }
    if y.iter().all(|&v| v == y[0]) {
        return Err(Error::SingleClass {
            label: None,
            fold: None,
        });
    }
    let n_features = x.n_cols();
    let mut columns = x.columns();
    columns.push((0..x.n_rows()).map(|i| (i, 1.0)).collect());
    let mut solver = Solver {
        columns,
        signs: y.iter().map(|&v| signed(v)).collect(),
        z: vec![0.0; x.n_rows()],
        coef: vec![0.0; n_features + 1],
        c: params.c,
    };

    let mut trace = vec![solver.objective()];
    let mut iterations = 0;
    let mut converged = false;
    let mut max_violation;
    loop {
        max_violation = (0..solver.coef.len())
            .map(|j| violation(solver.coef[j], solver.grad(j)))
            .fold(0.0, f64::max);
        if max_violation <= params.tol {
            converged = true;
            break;
        }
        if iterations >= params.max_iter {
            break;
        }
        for j in 0..solver.coef.len() {
            // nothing moves a zero weight whose column is empty
            if !solver.columns[j].is_empty() {
                solver.update(j);
            }
        }
        iterations += 1;
        trace.push(solver.objective());
    }
    if !converged {
        log::warn!(
            "logistic regression stopped after {iterations} sweeps with optimality violation {max_violation:.3e} > tol {}",
            params.tol
        );
    }

    let bias = solver.coef.pop().unwrap_or(0.0);
    let objective = *trace.last().unwrap_or(&f64::NAN);
    Ok(LogRegModel {
        weights: solver.coef,
        bias,
        diagnostics: LogRegDiagnostics {
            iterations,
            objective,
            converged,
            max_violation,
            objective_trace: trace,
        },
    })
}

impl LogRegModel {
    /// A model with given coefficients and empty diagnostics.
    pub fn from_parts(weights: Vec<f64>, bias: f64) -> LogRegModel {
        LogRegModel {
            weights,
            bias,
            diagnostics: LogRegDiagnostics {
                iterations: 0,
                objective: f64::NAN,
                converged: false,
                max_violation: f64::NAN,
                objective_trace: Vec::new(),
            },
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn diagnostics(&self) -> &LogRegDiagnostics {
        &self.diagnostics
    }

    pub fn n_features(&self) -> usize {
        self.weights.len()
    }

    pub fn decision_function(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        x.check_cols(self.n_features())?;
        Ok(margins(&self.weights, self.bias, x))
    }

    /// `P(class 1 | x) = sigmoid(w . x + b)`.
    pub fn predict_proba(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        Ok(self
            .decision_function(x)?
            .into_iter()
            .map(sigmoid)
            .collect())
    }

    /// Class 1 iff the probability is at least 0.5.
    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<u8>> {
        Ok(self
            .predict_proba(x)?
            .into_iter()
            .map(|p| u8::from(p >= 0.5))
            .collect())
    }

    pub(super) fn explain(&self, name: &dyn Fn(usize) -> String) -> Explanation {
        let mut nonzero: Vec<usize> = (0..self.weights.len())
            .filter(|&f| self.weights[f] != 0.0)
            .collect();
        nonzero.sort_by(|&a, &b| {
            self.weights[b]
                .abs()
                .total_cmp(&self.weights[a].abs())
                .then(a.cmp(&b))
        });
        Explanation::Logreg {
            bias: self.bias,
            nonzero: nonzero
                .into_iter()
                .map(|f| FeatureWeight {
                    feature: name(f),
                    column: f,
                    weight: self.weights[f],
                })
                .collect(),
            iterations: self.diagnostics.iterations,
            converged: self.diagnostics.converged,
            objective: self.diagnostics.objective,
        }
    }
}
