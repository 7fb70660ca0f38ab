use nalgebra::DMatrix;
use num_complex::Complex64;

use super::mmse::{assemble_subproblem, mmse_update, SubproblemCoefficients};
use super::{average_rates, AverageRates};
use crate::conic::{self, MaxMinQcqp, QuadConstraint, SolveStatus, SolverOptions};
use crate::csit::ConditionalSampleSet;
use crate::error::{invalid, Error, Result};
use crate::model::{CommonRateSplit, GroupLayout, PowerConstraint, PrecoderSet};
use crate::numerics::{nats_to_bits, ComplexMatrix, ComplexVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoOptions {
    /// Stop when the MMF rate changes by less than this many nats.
    pub tol: f64,
    pub max_iter: usize,
    pub solver: SolverOptions,
}

impl Default for AoOptions {
    fn default() -> Self {
        AoOptions { tol: 1e-4, max_iter: 200, solver: SolverOptions::default() }
    }
}

#[derive(Debug, Clone)]
pub struct MmfSolution {
    pub precoders: PrecoderSet,
    /// Fair split of the common rate, bits/s/Hz.
    pub split: CommonRateSplit,
    /// MMF average rate (bits) at the start and after every iteration.
    pub trace: Vec<f64>,
    /// Per-group average rates including the common portion, bits.
    pub group_rates: Vec<f64>,
    pub mmf: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Index map of the real variable vector of the subproblem.
#[derive(Debug, Clone, Copy)]
struct Vars {
    n_tx: usize,
    groups: usize,
    common: bool,
}

impl Vars {
    fn block(&self) -> usize {
        2 * self.n_tx
    }
    fn common_block(&self) -> usize {
        0
    }
    fn private_block(&self, m: usize) -> usize {
        self.block() * (m + usize::from(self.common))
    }
    fn precoder_end(&self) -> usize {
        self.block() * (self.groups + usize::from(self.common))
    }
    fn split(&self, m: usize) -> usize {
        self.precoder_end() + m
    }
    fn rate(&self, m: usize) -> usize {
        self.precoder_end() + if self.common { self.groups } else { 0 } + m
    }
    fn objective(&self) -> usize {
        self.rate(self.groups)
    }
    fn len(&self) -> usize {
        self.objective() + 1
    }
    fn blocks(&self) -> Vec<usize> {
        let mut b = Vec::new();
        if self.common {
            b.push(self.common_block());
        }
        b.extend((0..self.groups).map(|m| self.private_block(m)));
        b
    }
}

/// `[[A, −B], [B, A]]` for `Ψ = A + iB`, so that `pᴴΨp = vᵀ R v` with `v = [Re p; Im p]`.
fn real_form(psi: &ComplexMatrix, scale: f64) -> DMatrix<f64> {
    let n = psi.nrows();
    let mut r = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            // average the Hermitian pair so the form is exactly symmetric
            let z = 0.5 * (psi[(i, j)] + psi[(j, i)].conj()) * scale;
            r[(i, j)] = z.re;
            r[(i + n, j + n)] = z.re;
            r[(i, j + n)] = -z.im;
            r[(i + n, j)] = z.im;
        }
    }
    r
}

/// Linear terms of `−2 Re(fᴴ p)` on the block at `offset`.
fn linear_terms(f: &ComplexVector, offset: usize, scale: f64) -> Vec<(usize, f64)> {
    let n = f.len();
    (0..n)
        .map(|i| (offset + i, -2.0 * scale * f[i].re))
        .chain((0..n).map(|i| (offset + n + i, -2.0 * scale * f[i].im)))
        .collect()
}

/// The convex subproblem in precoders normalised by `√P_total`.
pub fn build_subproblem(
    coef: &SubproblemCoefficients,
    layout: &GroupLayout,
    pc: &PowerConstraint,
    with_common: bool,
) -> Result<MaxMinQcqp> {
    Ok(build(coef, layout, pc, with_common)?.0)
}

fn build(
    coef: &SubproblemCoefficients,
    layout: &GroupLayout,
    pc: &PowerConstraint,
    with_common: bool,
) -> Result<(MaxMinQcqp, Vars)> {
    let n_tx = pc.n_tx();
    let groups = layout.num_groups();
    let v = Vars { n_tx, groups, common: with_common };
    if with_common && coef.psi_common.is_empty() {
        return Err(invalid("common-stream subproblem needs common coefficients"));
    }
    let total = pc.total();
    let c = total.sqrt();
    let mut prob = MaxMinQcqp::new(v.len(), v.objective())?;
    if with_common {
        prob.label(v.common_block(), v.block(), "p_c");
    }
    for m in 0..groups {
        prob.label(v.private_block(m), v.block(), format!("p_{}", m + 1));
    }
    if with_common {
        prob.label(v.split(0), groups, "c");
    }
    prob.label(v.rate(0), groups, "r");
    prob.label(v.objective(), 1, "r_g");

    let privates: Vec<usize> = (0..groups).map(|m| v.private_block(m)).collect();
    for k in 0..layout.num_users() {
        let m = layout.group_of(k);
        let form = prob.add_form(real_form(&coef.psi[k], total))?;
        let mut linear = linear_terms(&coef.f[k], v.private_block(m), c);
        linear.push((v.rate(m), 1.0));
        prob.add_constraint(QuadConstraint {
            blocks: privates.iter().map(|&off| (off, form)).collect(),
            linear,
            constant: coef.nu[k] - 1.0,
        })?;
    }
    if with_common {
        for k in 0..layout.num_users() {
            let form = prob.add_form(real_form(&coef.psi_common[k], total))?;
            let mut linear = linear_terms(&coef.f_common[k], v.common_block(), c);
            linear.extend((0..groups).map(|m| (v.split(m), 1.0)));
            prob.add_constraint(QuadConstraint {
                blocks: v.blocks().into_iter().map(|off| (off, form)).collect(),
                linear,
                constant: coef.nu_common[k] - 1.0,
            })?;
        }
    }
    for m in 0..groups {
        let mut linear = vec![(v.objective(), 1.0), (v.rate(m), -1.0)];
        if with_common {
            linear.push((v.split(m), -1.0));
        }
        prob.add_constraint(QuadConstraint::linear(linear, 0.0))?;
        if with_common {
            prob.add_constraint(QuadConstraint::linear(vec![(v.split(m), -1.0)], 0.0))?;
        }
    }
    for l in 0..pc.len() {
        let d = pc.shaping(l);
        let diag: Vec<f64> = d.iter().chain(d.iter()).copied().collect();
        let form = prob.add_form(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)))?;
        prob.add_constraint(QuadConstraint {
            blocks: v.blocks().into_iter().map(|off| (off, form)).collect(),
            linear: Vec::new(),
            constant: -pc.limits()[l] / total,
        })?;
    }
    Ok((prob, v))
}

fn pack(prec: &PrecoderSet, v: &Vars, scale: f64, x: &mut [f64]) {
    let mut put = |p: &ComplexVector, off: usize| {
        for i in 0..v.n_tx {
            x[off + i] = p[i].re / scale;
            x[off + v.n_tx + i] = p[i].im / scale;
        }
    };
    if let Some(pc) = &prec.common {
        put(pc, v.common_block());
    }
    for (m, p) in prec.privates.iter().enumerate() {
        put(p, v.private_block(m));
    }
}

fn unpack(x: &[f64], v: &Vars, scale: f64) -> PrecoderSet {
    let get = |off: usize| {
        ComplexVector::from_fn(v.n_tx, |i, _| Complex64::new(x[off + i], x[off + v.n_tx + i]) * scale)
    };
    let privates = (0..v.groups).map(|m| get(v.private_block(m))).collect();
    if v.common {
        PrecoderSet::rs(get(v.common_block()), privates)
    } else {
        PrecoderSet::no_rs(privates)
    }
}

/// Slack kept between the warm start and every constraint boundary.
const WARM_SLACK: f64 = 1e-7;
/// Power back-off of the warm start, so power constraints are strict.
const POWER_BACKOFF: f64 = 1e-6;
/// Share of the common rate held back from the split at the warm start.
const SPLIT_HOLDBACK: f64 = 1e-3;
/// Below this common rate (nats) the common stream is treated as switched off.
const COMMON_FLOOR: f64 = 1e-12;

/// Strictly feasible point of the subproblem built at `prec`.
fn warm_start(
    prob: &MaxMinQcqp,
    v: &Vars,
    prec: &PrecoderSet,
    coef: &SubproblemCoefficients,
    layout: &GroupLayout,
    scale: f64,
) -> Vec<f64> {
    let mut shrunk = prec.clone();
    shrunk.scale((1.0 - POWER_BACKOFF).sqrt());
    let mut x = vec![0.0; v.len()];
    pack(&shrunk, v, scale, &mut x);
    let (xi_c, xi) = coef.evaluate(&shrunk, layout);
    let r: Vec<f64> = (0..v.groups)
        .map(|m| {
            layout.members(m).iter().map(|&k| 1.0 - xi[k]).fold(f64::INFINITY, f64::min) - WARM_SLACK
        })
        .collect();
    let mut split = vec![0.0; v.groups];
    if v.common {
        let rc = xi_c.iter().map(|x| 1.0 - x).fold(f64::INFINITY, f64::min);
        let fair = CommonRateSplit::water_fill(&r, (1.0 - 2.0 * SPLIT_HOLDBACK) * rc);
        for m in 0..v.groups {
            split[m] = fair.portions[m] + SPLIT_HOLDBACK * rc / v.groups as f64;
            x[v.split(m)] = split[m];
        }
    }
    for m in 0..v.groups {
        x[v.rate(m)] = r[m];
    }
    let t = (0..v.groups).map(|m| r[m] + split[m]).fold(f64::INFINITY, f64::min) - WARM_SLACK;
    x[v.objective()] = t;
    debug_assert_eq!(x.len(), prob.num_vars());
    x
}

fn check_inputs(
    samples: &ConditionalSampleSet,
    layout: &GroupLayout,
    pc: &PowerConstraint,
    init: &PrecoderSet,
) -> Result<()> {
    if samples.is_empty() || samples.estimate.ncols() != layout.num_users() {
        return Err(invalid("sample set does not match the layout"));
    }
    if samples.estimate.nrows() != pc.n_tx() {
        return Err(invalid("power constraint and channel disagree on N_t"));
    }
    init.check_dims(pc.n_tx(), layout.num_groups())?;
    if !pc.is_feasible(init)? {
        return Err(invalid("initial precoders violate the power constraint"));
    }
    Ok(())
}

fn finish(
    precoders: PrecoderSet,
    rates: &AverageRates,
    layout: &GroupLayout,
    trace: Vec<f64>,
    iterations: usize,
    converged: bool,
) -> MmfSolution {
    let with_common = precoders.common.is_some();
    let (split, group) = rates.fair_allocation(layout, with_common);
    let group_rates: Vec<f64> = group.into_iter().map(nats_to_bits).collect();
    let mmf = group_rates.iter().cloned().fold(f64::INFINITY, f64::min);
    MmfSolution {
        precoders,
        split: CommonRateSplit { portions: split.portions.into_iter().map(nats_to_bits).collect() },
        trace,
        group_rates,
        mmf,
        iterations,
        converged,
    }
}

/// Alternate MMSE updates and convex subproblem solves, starting from
/// `init`. A common stream is optimised iff `init` has one.
pub fn ao_solve(
    samples: &ConditionalSampleSet,
    layout: &GroupLayout,
    pc: &PowerConstraint,
    init: &PrecoderSet,
    opts: &AoOptions,
) -> Result<MmfSolution> {
    check_inputs(samples, layout, pc, init)?;
    let scale = pc.total().sqrt();
    let mut prec = init.clone();
    let mut rates = average_rates(samples, &prec, layout)?;
    let mut current = rates.mmf(layout, prec.common.is_some());
    let mut trace = vec![nats_to_bits(current)];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        // a common stream nobody can decode carries nothing and leaves no interior
        let with_common = prec.common.is_some() && rates.common_rate() > COMMON_FLOOR;
        let active = if with_common { prec.clone() } else { prec.without_common() };
        let gw = mmse_update(samples, &active, layout)?;
        let coef = assemble_subproblem(samples, &gw, layout)?;
        let (prob, vars) = build(&coef, layout, pc, with_common)?;
        let x0 = warm_start(&prob, &vars, &active, &coef, layout, scale);
        let res = conic::solve(&prob, Some(&x0), &opts.solver).map_err(|e| match e {
            Error::Solver { reason, .. } => Error::Solver { iteration: iterations, reason },
            other => other,
        })?;
        if res.status == SolveStatus::Infeasible {
            return Err(Error::Solver { iteration: iterations, reason: "subproblem infeasible".into() });
        }
        let mut next = unpack(&res.x, &vars, scale);
        if prec.common.is_some() && !with_common {
            next.common = Some(ComplexVector::zeros(pc.n_tx()));
        }
        pc.fit(&mut next)?;
        let next_rates = average_rates(samples, &next, layout)?;
        let value = next_rates.mmf(layout, next.common.is_some());
        if value < current {
            // only solver round-off can lower the objective; keep the better point
            converged = true;
            break;
        }
        prec = next;
        rates = next_rates;
        trace.push(nats_to_bits(value));
        let delta = (value - current).abs();
        current = value;
        if delta < opts.tol {
            converged = true;
            break;
        }
    }
    Ok(finish(prec, &rates, layout, trace, iterations, converged))
}

/// [`ao_solve`] with the common stream and split pinned to zero.
pub fn solve_nors(
    samples: &ConditionalSampleSet,
    layout: &GroupLayout,
    pc: &PowerConstraint,
    init: &PrecoderSet,
    opts: &AoOptions,
) -> Result<MmfSolution> {
    ao_solve(samples, layout, pc, &init.without_common(), opts)
}
