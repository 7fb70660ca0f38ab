//! Log-barrier interior-point method for [`MaxMinQcqp`].
//!
//! For an increasing weight `t` the barrier function
//! `−t·x_obj − Σ ln(−f_i(x))` is minimised by damped Newton steps with
//! backtracking, so every iterate stays strictly feasible. At the end of a
//! centering `λ_i = 1/(−t f_i)` is dual feasible with gap `m/t`.

use nalgebra::{DMatrix, DVector};

use super::problem::{MaxMinQcqp, QuadConstraint};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Surrogate duality gap at which the solve stops.
    pub gap_tol: f64,
    /// Half the squared Newton decrement at which centering stops.
    pub newton_tol: f64,
    /// Cap on the total number of Newton steps.
    pub max_iter: usize,
    /// Barrier growth factor.
    pub mu: f64,
    /// Initial barrier weight.
    pub t0: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { gap_tol: 1e-9, newton_tol: 1e-6, max_iter: 500, mu: 20.0, t0: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    MaxIterations,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct ConicResult {
    pub x: Vec<f64>,
    pub objective: f64,
    /// `max(0, max_i f_i(x))`.
    pub primal_residual: f64,
    /// Duality gap `m/t` certified by the last central point.
    pub gap: f64,
    pub dual_residual: f64,
    pub status: SolveStatus,
    pub iterations: usize,
}

struct Workspace<'a> {
    prob: &'a MaxMinQcqp,
    n: usize,
    m: usize,
}

impl<'a> Workspace<'a> {
    /// Value and gradient of every constraint.
    fn eval_with_grad(&self, x: &[f64]) -> (Vec<f64>, Vec<DVector<f64>>) {
        let forms = self.prob.forms();
        let mut vals = Vec::with_capacity(self.m);
        let mut grads = Vec::with_capacity(self.m);
        for c in self.prob.constraints() {
            let mut g = DVector::zeros(self.n);
            let mut v = c.constant;
            for &(off, f) in &c.blocks {
                let form = &forms[f];
                let d = form.nrows();
                for r in 0..d {
                    let mut row = 0.0;
                    for s in 0..d {
                        row += form[(r, s)] * x[off + s];
                    }
                    v += x[off + r] * row;
                    g[off + r] += 2.0 * row;
                }
            }
            for &(j, a) in &c.linear {
                v += a * x[j];
                g[j] += a;
            }
            vals.push(v);
            grads.push(g);
        }
        (vals, grads)
    }

    fn values(&self, x: &[f64]) -> Vec<f64> {
        self.prob.values(x)
    }

    /// `Σ λ_i ∇²f_i`: only the block forms contribute.
    fn lagrangian_hessian(&self, lambda: &[f64]) -> DMatrix<f64> {
        let forms = self.prob.forms();
        let mut h = DMatrix::zeros(self.n, self.n);
        for (c, &l) in self.prob.constraints().iter().zip(lambda) {
            for &(off, f) in &c.blocks {
                let form = &forms[f];
                let d = form.nrows();
                let mut view = h.view_mut((off, off), (d, d));
                view += form * (2.0 * l);
            }
        }
        h
    }
}

fn solve_spd(h: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(ch) = h.clone().cholesky() {
        return Some(ch.solve(rhs));
    }
    let scale = 1.0 + h.diagonal().amax();
    let mut ridge = 1e-14 * scale;
    for _ in 0..8 {
        let mut reg = h.clone();
        for i in 0..reg.nrows() {
            reg[(i, i)] += ridge;
        }
        if let Some(ch) = reg.cholesky() {
            return Some(ch.solve(rhs));
        }
        ridge *= 100.0;
    }
    h.clone().lu().solve(rhs)
}

/// Barrier iterations from a strictly feasible `x0`. `stop` is consulted
/// after every Newton step and ends the solve early when it returns true.
fn barrier(
    prob: &MaxMinQcqp,
    x0: Vec<f64>,
    opts: &SolverOptions,
    stop: &dyn Fn(&[f64]) -> bool,
) -> Result<ConicResult> {
    let ws = Workspace { prob, n: prob.num_vars(), m: prob.constraints().len() };
    let obj = prob.objective();
    let m = ws.m as f64;
    let mut x = x0;
    let (mut vals, mut grads) = ws.eval_with_grad(&x);
    if vals.iter().any(|&f| !(f < 0.0)) {
        return Err(invalid("interior-point start is not strictly feasible"));
    }
    let mut t = opts.t0;
    let mut iterations = 0;
    let mut status = SolveStatus::MaxIterations;

    'outer: loop {
        // centering: minimise t·(−x_obj) − Σ ln(−f_i)
        loop {
            if iterations >= opts.max_iter {
                break 'outer;
            }
            let mut h = ws.lagrangian_hessian(&vals.iter().map(|f| 1.0 / -f).collect::<Vec<_>>());
            let mut grad = DVector::zeros(ws.n);
            grad[obj] = -t;
            for (g, &f) in grads.iter().zip(&vals) {
                h.ger(1.0 / (f * f), g, g, 1.0);
                grad.axpy(1.0 / -f, g, 1.0);
            }
            let dx = solve_spd(&h, &(-&grad)).ok_or_else(|| Error::Solver {
                iteration: iterations,
                reason: "Newton system is singular".into(),
            })?;
            if dx.iter().any(|v| !v.is_finite()) {
                return Err(Error::Solver {
                    iteration: iterations,
                    reason: "non-finite Newton step".into(),
                });
            }
            let slope = grad.dot(&dx);
            let decrement = -slope;
            // off-centre suboptimality is about decrement / t
            if decrement / 2.0 <= opts.newton_tol || decrement / (2.0 * t) <= 1e-2 * opts.gap_tol {
                break;
            }
            iterations += 1;

            let mut s: f64 = 1.0;
            let mut accepted = false;
            while s >= 1e-16 {
                let xn: Vec<f64> = x.iter().zip(dx.iter()).map(|(a, b)| a + s * b).collect();
                let nv = ws.values(&xn);
                if nv.iter().all(|&f| f < 0.0) {
                    // φ(x + sΔx) − φ(x), formed from differences to stay accurate at large t
                    let change = -t * (xn[obj] - x[obj])
                        - nv.iter().zip(&vals).map(|(a, b)| (a / b).ln()).sum::<f64>();
                    if change <= 0.25 * s * slope {
                        x = xn;
                        accepted = true;
                        break;
                    }
                }
                s *= 0.5;
            }
            (vals, grads) = ws.eval_with_grad(&x);
            if stop(&x) {
                break 'outer;
            }
            if !accepted {
                // At large t, t·Δx_obj falls below the resolution of x_obj before the
                // decrement reaches newton_tol. Off-centre suboptimality is about
                // decrement / t, so the point still counts as centred if that is small.
                if decrement / (2.0 * t) <= opts.gap_tol {
                    break;
                }
                break 'outer;
            }
        }
        if m / t <= opts.gap_tol {
            status = SolveStatus::Optimal;
            break;
        }
        t *= opts.mu;
    }

    // dual estimate λ_i = 1 / (−t f_i) of the last central point
    let lambda: Vec<f64> = vals.iter().map(|f| 1.0 / (-t * f)).collect();
    let gap: f64 = -vals.iter().zip(&lambda).map(|(f, l)| f * l).sum::<f64>();
    let mut dual = DVector::zeros(ws.n);
    dual[obj] = -1.0;
    for (g, &l) in grads.iter().zip(&lambda) {
        dual.axpy(l, g, 1.0);
    }
    Ok(ConicResult {
        objective: x[obj],
        primal_residual: vals.iter().cloned().fold(0.0, f64::max),
        gap,
        dual_residual: dual.norm(),
        status,
        iterations,
        x,
    })
}

/// Find a strictly feasible point by maximising `s` subject to
/// `f_i(x) + s ≤ 0`, `s ≤ 1` and `‖x − x0‖² ≤ R²`, stopping as soon as
/// `s > 0`. The ball keeps the barrier bounded in directions no constraint
/// limits; `R = 1e3 (1 + ‖x0‖)`.
pub fn phase_one(prob: &MaxMinQcqp, x0: &[f64], opts: &SolverOptions) -> Result<Option<Vec<f64>>> {
    let n = prob.num_vars();
    let mut aux = MaxMinQcqp::new(n + 1, n)?;
    for f in prob.forms() {
        aux.add_form(f.clone())?;
    }
    for c in prob.constraints() {
        let mut c = c.clone();
        c.linear.push((n, 1.0));
        aux.add_constraint(c)?;
    }
    aux.add_constraint(QuadConstraint::linear(vec![(n, 1.0)], -1.0))?;
    let norm0 = x0.iter().map(|v| v * v).sum::<f64>();
    let radius = 1e3 * (1.0 + norm0.sqrt());
    let eye = aux.add_form(DMatrix::identity(n, n))?;
    aux.add_constraint(QuadConstraint {
        blocks: vec![(0, eye)],
        linear: x0.iter().enumerate().map(|(j, &v)| (j, -2.0 * v)).collect(),
        constant: norm0 - radius * radius,
    })?;
    let worst = prob.values(x0).into_iter().fold(f64::NEG_INFINITY, f64::max);
    let mut start = x0.to_vec();
    start.push(-worst.max(0.0) - 1.0);
    let stop = |z: &[f64]| z[n] > 0.0 && prob.values(&z[..n]).iter().all(|&f| f < 0.0);
    let res = barrier(&aux, start, opts, &stop)?;
    let x = res.x[..n].to_vec();
    Ok(prob.values(&x).iter().all(|&f| f < 0.0).then_some(x))
}

/// Solve from `x0` if it is strictly feasible, otherwise after a phase-I search.
pub fn solve(prob: &MaxMinQcqp, x0: Option<&[f64]>, opts: &SolverOptions) -> Result<ConicResult> {
    if x0.is_some_and(|x| x.len() != prob.num_vars()) {
        return Err(invalid("initial point has the wrong length"));
    }
    let zero = vec![0.0; prob.num_vars()];
    let start = x0.unwrap_or(&zero);
    let start = if prob.values(start).iter().all(|&f| f < 0.0) {
        start.to_vec()
    } else {
        match phase_one(prob, start, opts)? {
            Some(x) => x,
            None => {
                return Ok(ConicResult {
                    objective: start[prob.objective()],
                    primal_residual: prob.max_violation(start),
                    gap: f64::INFINITY,
                    dual_residual: f64::INFINITY,
                    status: SolveStatus::Infeasible,
                    iterations: 0,
                    x: start.to_vec(),
                })
            }
        }
    };
    barrier(prob, start, opts, &|_| false)
}
