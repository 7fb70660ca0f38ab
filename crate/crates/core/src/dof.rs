//! High-SNR MMF degrees of freedom: the closed-form predictions for NoRS and
//! RS, the zero-forcing / power-partition constructions that achieve them,
//! and least-squares slope estimation from simulated rates.
//!
//! Group indices follow [`GroupLayout`]: ascending size, zero-based. The
//! antenna thresholds `N_L` keep the one-based `L` of the formulas.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::model::{CommonRateSplit, GroupLayout, PrecoderSet, Strategy};
use crate::numerics::linalg::{normalized, select_columns};
use crate::numerics::{null_space_basis, ComplexMatrix, ComplexVector, RandomStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Underloaded,
    PartiallyOverloaded,
    FullyOverloaded,
}

impl Regime {
    pub fn of(layout: &GroupLayout, n_tx: usize) -> Regime {
        let sizes = layout.sizes();
        let k = layout.num_users();
        if n_tx + sizes[0] > k {
            Regime::Underloaded
        } else if n_tx + sizes[sizes.len() - 1] > k {
            Regime::PartiallyOverloaded
        } else {
            Regime::FullyOverloaded
        }
    }
}

/// Achievable MMF-DoF. For RS in the overloaded regimes this is a lower
/// bound on the optimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DofPrediction {
    pub scheme: Strategy,
    pub value: f64,
    pub regime: Regime,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(invalid(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    Ok(())
}

/// Minimum `N_t` that makes groups `1..=L` underloaded when the groups
/// above `L` are disregarded.
pub fn n_l(layout: &GroupLayout, l: usize) -> Result<usize> {
    let m = layout.num_groups();
    if l == 0 || l > m {
        return Err(invalid(format!("L must lie in 1..={m}, got {l}")));
    }
    let sizes = layout.sizes();
    let k = layout.num_users();
    let tail: usize = if l < m { sizes[l..].iter().sum() } else { 0 };
    Ok(k - sizes[0] - tail + 1)
}

/// Largest number of groups that can be served by private streams with
/// mutual interference nulled. Never less than 1.
pub fn m_r_star(layout: &GroupLayout, n_tx: usize) -> usize {
    let m = layout.num_groups();
    (1..=m)
        .rev()
        .find(|&l| n_l(layout, l).map_or(false, |n| n <= n_tx))
        .unwrap_or(1)
}

pub fn nors_dof(layout: &GroupLayout, n_tx: usize, alpha: f64) -> Result<DofPrediction> {
    check_alpha(alpha)?;
    let regime = Regime::of(layout, n_tx);
    let value = match regime {
        Regime::Underloaded => alpha,
        Regime::PartiallyOverloaded => alpha / 2.0,
        Regime::FullyOverloaded => 0.0,
    };
    Ok(DofPrediction { scheme: Strategy::NoRs, value, regime })
}

pub fn rs_dof(layout: &GroupLayout, n_tx: usize, alpha: f64) -> Result<DofPrediction> {
    check_alpha(alpha)?;
    let regime = Regime::of(layout, n_tx);
    let m = layout.num_groups() as f64;
    let value = if regime == Regime::Underloaded {
        (1.0 - alpha) / m + alpha
    } else {
        let q = (1 + layout.num_groups() - m_r_star(layout, n_tx)) as f64;
        if alpha > 1.0 / q {
            1.0 / q
        } else {
            alpha + (1.0 - q * alpha) / m
        }
    };
    Ok(DofPrediction { scheme: Strategy::Rs, value, regime })
}

pub fn predict(
    strategy: Strategy,
    layout: &GroupLayout,
    n_tx: usize,
    alpha: f64,
) -> Result<DofPrediction> {
    match strategy {
        Strategy::Rs => rs_dof(layout, n_tx, alpha),
        Strategy::NoRs => nors_dof(layout, n_tx, alpha),
    }
}

/// How the common rate is shared among groups by a construction.
#[derive(Debug, Clone, PartialEq)]
pub enum SplitRule {
    Equal,
    /// `z·R_c` in equal parts to `members`, `(1 − z)·R_c` in equal parts to the rest.
    Partition { members: Vec<usize>, z: f64 },
}

impl SplitRule {
    pub fn apply(&self, common_rate: f64, groups: usize) -> CommonRateSplit {
        match self {
            SplitRule::Equal => CommonRateSplit::equal(common_rate, groups),
            SplitRule::Partition { members, z } => {
                let rest = groups - members.len();
                let portions = (0..groups)
                    .map(|g| {
                        if members.contains(&g) {
                            z * common_rate / members.len() as f64
                        } else if rest > 0 {
                            (1.0 - z) * common_rate / rest as f64
                        } else {
                            0.0
                        }
                    })
                    .collect();
                CommonRateSplit { portions }
            }
        }
    }
}

/// Parameters of the RS overloaded construction.
#[derive(Debug, Clone, PartialEq)]
pub struct OverloadPartition {
    pub m_r: usize,
    /// Groups served with private streams: the `m_r` smallest.
    pub members: Vec<usize>,
    pub delta: f64,
    pub z: f64,
}

impl OverloadPartition {
    pub fn new(layout: &GroupLayout, n_tx: usize, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let m = layout.num_groups();
        let m_r = m_r_star(layout, n_tx);
        let q = (1 + m - m_r) as f64;
        let (delta, z) = if alpha <= 1.0 / q {
            let z = (1.0 - q * alpha) * m_r as f64 / ((1.0 - alpha) * m as f64);
            (alpha, z)
        } else {
            (1.0 / q, 0.0)
        };
        Ok(OverloadPartition { m_r, members: (0..m_r).collect(), delta, z })
    }

    pub fn split_rule(&self) -> SplitRule {
        SplitRule::Partition { members: self.members.clone(), z: self.z }
    }
}

/// Parameters of the NoRS partially-overloaded construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SacrificialGroup {
    /// Group whose users absorb the interference of the smaller groups.
    pub x: usize,
    pub beta: f64,
}

/// Precoders plus the common-rate rule that together realise a DoF.
#[derive(Debug, Clone)]
pub struct Construction {
    pub precoders: PrecoderSet,
    pub split: SplitRule,
}

/// Unit vector in the null space of the estimated channels of `blocked`
/// users, aligned as far as possible with the sum of `group`'s channels.
fn nulling_direction(
    est: &ComplexMatrix,
    layout: &GroupLayout,
    group: usize,
    blocked: &[usize],
) -> Result<ComplexVector> {
    let basis = null_space_basis(&select_columns(est, blocked))?;
    if basis.ncols() == 0 {
        return Err(Error::Regime(format!(
            "no null space left for group {group} with N_t = {}",
            est.nrows()
        )));
    }
    let mut sum = ComplexVector::zeros(est.nrows());
    for &k in layout.members(group) {
        sum += est.column(k);
    }
    let projected = &basis * (basis.adjoint() * sum);
    let floor = 1e-12 * est.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    Ok(normalized(&projected, floor).unwrap_or_else(|| basis.column(0).into_owned()))
}

fn scaled(v: ComplexVector, power: f64) -> ComplexVector {
    v * num_complex::Complex64::new(power.max(0.0).sqrt(), 0.0)
}

fn check_est(est: &ComplexMatrix, layout: &GroupLayout, p: f64) -> Result<()> {
    if est.ncols() != layout.num_users() || est.nrows() == 0 {
        return Err(invalid(format!(
            "estimate is {}x{}, layout has {} users",
            est.nrows(),
            est.ncols(),
            layout.num_users()
        )));
    }
    if !(p > 0.0) || !p.is_finite() {
        return Err(invalid(format!("power must be positive, got {p}")));
    }
    Ok(())
}

fn expect_regime(layout: &GroupLayout, n_tx: usize, want: &[Regime], what: &str) -> Result<()> {
    let r = Regime::of(layout, n_tx);
    if !want.contains(&r) {
        return Err(Error::Regime(format!("{what} does not apply to a {r:?} system (N_t = {n_tx})")));
    }
    Ok(())
}

/// Private power `P^e`, clipped to `P` (only binds when `P < 1`).
fn private_budget(p: f64, exponent: f64) -> f64 {
    p.powf(exponent).min(p)
}

/// Every private precoder nulls all other groups; `P/M` each.
pub fn build_nors_underloaded(
    est: &ComplexMatrix,
    layout: &GroupLayout,
    p: f64,
) -> Result<PrecoderSet> {
    check_est(est, layout, p)?;
    expect_regime(layout, est.nrows(), &[Regime::Underloaded], "NoRS nulling")?;
    let m = layout.num_groups();
    let privates = (0..m)
        .map(|g| {
            let dir = nulling_direction(est, layout, g, &layout.users_outside(&[g]))?;
            Ok(scaled(dir, p / m as f64))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PrecoderSet::no_rs(privates))
}

/// Groups below the sacrificial group null each other but not it; the
/// sacrificial group nulls everyone. Powers `P^β/(M−1)` and `P − P^β`,
/// `β = 1 − α/2`.
pub fn build_nors_partial(
    est: &ComplexMatrix,
    layout: &GroupLayout,
    p: f64,
    alpha: f64,
) -> Result<(PrecoderSet, SacrificialGroup)> {
    check_est(est, layout, p)?;
    check_alpha(alpha)?;
    let n_tx = est.nrows();
    expect_regime(layout, n_tx, &[Regime::PartiallyOverloaded], "NoRS partial construction")?;
    let sizes = layout.sizes();
    let k = layout.num_users();
    let m = layout.num_groups();
    let x = (0..m).rev().find(|&g| k - sizes[g] < n_tx).expect("regime guarantees a feasible group");
    let beta = 1.0 - alpha / 2.0;
    let shared = private_budget(p, beta);
    let privates = (0..m)
        .map(|g| {
            let blocked = if g < x {
                layout.users_outside(&[g, x])
            } else {
                layout.users_outside(&[g])
            };
            let dir = nulling_direction(est, layout, g, &blocked)?;
            let power = if g == x { p - shared } else { shared / (m - 1) as f64 };
            Ok(scaled(dir, power))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((PrecoderSet::no_rs(privates), SacrificialGroup { x, beta }))
}

/// Unit vector drawn uniformly on the complex sphere.
pub fn isotropic_direction(n_tx: usize, stream: &mut RandomStream) -> ComplexVector {
    loop {
        let v = ComplexVector::from_fn(n_tx, |_, _| stream.complex_normal());
        if let Some(u) = normalized(&v, 1e-300) {
            return u;
        }
    }
}

/// Nulling privates with total power `P^α`, common stream `P − P^α` in a
/// random direction, common rate shared equally.
pub fn build_rs_underloaded(
    est: &ComplexMatrix,
    layout: &GroupLayout,
    p: f64,
    alpha: f64,
    stream: &mut RandomStream,
) -> Result<Construction> {
    check_est(est, layout, p)?;
    check_alpha(alpha)?;
    expect_regime(layout, est.nrows(), &[Regime::Underloaded], "RS underloaded construction")?;
    let m = layout.num_groups();
    let private_total = private_budget(p, alpha);
    let mut precoders = build_nors_underloaded(est, layout, p)?;
    precoders.scale((private_total / p).sqrt());
    precoders.common = Some(scaled(isotropic_direction(est.nrows(), stream), p - private_total));
    debug_assert_eq!(precoders.num_groups(), m);
    Ok(Construction { precoders, split: SplitRule::Equal })
}

/// The `M_R*` smallest groups get private streams nulled among themselves
/// (`P^δ/M_R` each), the rest are served by the common stream only.
pub fn build_rs_overloaded(
    est: &ComplexMatrix,
    layout: &GroupLayout,
    p: f64,
    alpha: f64,
    stream: &mut RandomStream,
) -> Result<(Construction, OverloadPartition)> {
    check_est(est, layout, p)?;
    let n_tx = est.nrows();
    expect_regime(
        layout,
        n_tx,
        &[Regime::PartiallyOverloaded, Regime::FullyOverloaded],
        "RS overloaded construction",
    )?;
    let part = OverloadPartition::new(layout, n_tx, alpha)?;
    let m = layout.num_groups();
    let private_total = private_budget(p, part.delta);
    let member_users: Vec<usize> =
        part.members.iter().flat_map(|&g| layout.members(g).iter().copied()).collect();
    let mut privates = vec![ComplexVector::zeros(n_tx); m];
    for &g in &part.members {
        let blocked: Vec<usize> =
            member_users.iter().copied().filter(|&u| layout.group_of(u) != g).collect();
        let dir = nulling_direction(est, layout, g, &blocked)?;
        privates[g] = scaled(dir, private_total / part.m_r as f64);
    }
    let common = scaled(isotropic_direction(n_tx, stream), p - private_total);
    let construction =
        Construction { precoders: PrecoderSet::rs(common, privates), split: part.split_rule() };
    Ok((construction, part))
}

/// Equal-power matched filters towards each group's summed channel. Used
/// for NoRS when no group can be nulled.
pub fn build_matched_filter(
    est: &ComplexMatrix,
    layout: &GroupLayout,
    p: f64,
) -> Result<PrecoderSet> {
    check_est(est, layout, p)?;
    let m = layout.num_groups();
    let privates = (0..m)
        .map(|g| nulling_direction(est, layout, g, &[]).map(|d| scaled(d, p / m as f64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(PrecoderSet::no_rs(privates))
}

/// The DoF-achieving construction for the regime `est` falls into. NoRS in
/// a fully-overloaded system (DoF 0) falls back to matched filtering.
pub fn construct(
    strategy: Strategy,
    est: &ComplexMatrix,
    layout: &GroupLayout,
    p: f64,
    alpha: f64,
    stream: &mut RandomStream,
) -> Result<Construction> {
    let regime = Regime::of(layout, est.nrows());
    let m = layout.num_groups();
    match (strategy, regime) {
        (Strategy::NoRs, Regime::Underloaded) => Ok(Construction {
            precoders: build_nors_underloaded(est, layout, p)?,
            split: SplitRule::Equal,
        }),
        (Strategy::NoRs, Regime::PartiallyOverloaded) => Ok(Construction {
            precoders: build_nors_partial(est, layout, p, alpha)?.0,
            split: SplitRule::Equal,
        }),
        (Strategy::NoRs, Regime::FullyOverloaded) => Ok(Construction {
            precoders: build_matched_filter(est, layout, p)?,
            split: SplitRule::Equal,
        }),
        (Strategy::Rs, Regime::Underloaded) => {
            let c = build_rs_underloaded(est, layout, p, alpha, stream)?;
            debug_assert_eq!(c.precoders.num_groups(), m);
            Ok(c)
        }
        (Strategy::Rs, _) => Ok(build_rs_overloaded(est, layout, p, alpha, stream)?.0),
    }
}

/// Least-squares slope of rate (bits) against `log2(P)`.
pub fn estimate_dof_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(invalid("slope estimation needs at least two points"));
    }
    if points.iter().any(|&(p, r)| !(p > 0.0) || !p.is_finite() || !r.is_finite()) {
        return Err(invalid("slope points must have positive power and finite rate"));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|&(p, _)| p.log2()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = points.iter().map(|&(_, r)| r).sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(invalid("slope points need at least two distinct powers"));
    }
    let sxy: f64 = xs.iter().zip(points).map(|(x, &(_, r))| (x - mx) * (r - my)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::linalg::frobenius;
    use num_complex::Complex64;

    fn layout(sizes: &[usize]) -> GroupLayout {
        GroupLayout::from_sizes(sizes).unwrap()
    }

    fn channel(n: usize, k: usize, seed: u64) -> ComplexMatrix {
        let mut s = RandomStream::new(seed, &["dof-test".into()]);
        ComplexMatrix::from_fn(n, k, |_, _| s.complex_normal())
    }

    fn stream() -> RandomStream {
        RandomStream::new(5, &["common".into()])
    }

    /// Largest `|ĥ_kᴴ p_m|` over pairs where user `k` is in `blocked(m)`.
    fn residual(
        est: &ComplexMatrix,
        prec: &PrecoderSet,
        blocked: impl Fn(usize) -> Vec<usize>,
    ) -> f64 {
        let mut worst: f64 = 0.0;
        for (m, p) in prec.privates.iter().enumerate() {
            for k in blocked(m) {
                worst = worst.max(est.column(k).dotc(p).norm());
            }
        }
        worst
    }

    #[test]
    fn n_l_values() {
        let l = layout(&[1, 2, 3]);
        assert_eq!(n_l(&l, 2).unwrap(), 3);
        assert_eq!(n_l(&l, 3).unwrap(), 6);
        assert_eq!(n_l(&l, 1).unwrap(), 1);
        assert_eq!(n_l(&layout(&[4]), 1).unwrap(), 1);
        assert!(n_l(&l, 0).is_err());
        assert!(n_l(&l, 4).is_err());
    }

    #[test]
    fn m_r_star_values() {
        let l = layout(&[1, 2, 3]);
        assert_eq!(m_r_star(&l, 4), 2);
        assert_eq!(m_r_star(&l, 6), 3);
        assert_eq!(m_r_star(&l, 1), 1);
        assert_eq!(m_r_star(&layout(&[2, 2, 2]), 4), 2);
    }

    #[test]
    fn nors_predictions() {
        let l = layout(&[1, 2, 3]);
        let p = nors_dof(&l, 6, 0.6).unwrap();
        assert_eq!((p.value, p.regime), (0.6, Regime::Underloaded));
        let p = nors_dof(&l, 4, 0.6).unwrap();
        assert_eq!((p.value, p.regime), (0.3, Regime::PartiallyOverloaded));
        let p = nors_dof(&layout(&[2, 2, 2]), 4, 0.7).unwrap();
        assert_eq!((p.value, p.regime), (0.0, Regime::FullyOverloaded));
        assert!(nors_dof(&l, 6, 1.2).is_err());
    }

    #[test]
    fn rs_predictions() {
        let l = layout(&[1, 2, 3]);
        assert!((rs_dof(&l, 6, 0.5).unwrap().value - 2.0 / 3.0).abs() < 1e-15);
        assert!((rs_dof(&l, 4, 0.8).unwrap().value - 0.5).abs() < 1e-15);
        assert!((rs_dof(&l, 4, 0.3).unwrap().value - (0.3 + 0.4 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn perfect_csit_column() {
        // α = 1: underloaded 1, overloaded 1/(1+M−M_R*), NoRS partial 1/2, full 0.
        let l = layout(&[1, 2, 3]);
        assert_eq!(rs_dof(&l, 6, 1.0).unwrap().value, 1.0);
        assert_eq!(nors_dof(&l, 6, 1.0).unwrap().value, 1.0);
        assert_eq!(nors_dof(&l, 4, 1.0).unwrap().value, 0.5);
        assert_eq!(rs_dof(&l, 4, 1.0).unwrap().value, 0.5);
        let eq = layout(&[2, 2, 2]);
        assert_eq!(nors_dof(&eq, 4, 1.0).unwrap().value, 0.0);
        assert_eq!(rs_dof(&eq, 4, 1.0).unwrap().value, 0.5);
        assert_eq!(rs_dof(&eq, 2, 1.0).unwrap().value, 1.0 / 3.0);
    }

    #[test]
    fn z_formula_balances_group_dof() {
        let l = layout(&[1, 2, 3]);
        let part = OverloadPartition::new(&l, 4, 0.3).unwrap();
        assert_eq!(part.m_r, 2);
        assert!((part.z - 0.4 * 2.0 / (0.7 * 3.0)).abs() < 1e-15);
        assert!((part.z - 0.380952380952).abs() < 1e-12);
        // both sides of the balance equation agree
        let (m, mr, a, z) = (3.0, 2.0, 0.3, part.z);
        let lhs = z * (1.0 - a) / mr + a;
        let rhs = (1.0 - z) * (1.0 - a) / (m - mr);
        assert!((lhs - rhs).abs() < 1e-14);

        let hi = OverloadPartition::new(&l, 4, 0.8).unwrap();
        assert_eq!((hi.z, hi.delta), (0.0, 0.5));
    }

    #[test]
    fn z_in_unit_interval_below_threshold() {
        let l = layout(&[1, 2, 3, 3]);
        for n_tx in 1..layout(&[1, 2, 3, 3]).num_users() - 1 {
            if Regime::of(&l, n_tx) == Regime::Underloaded {
                continue;
            }
            let q = (1 + 4 - m_r_star(&l, n_tx)) as f64;
            for i in 0..=100 {
                let a = i as f64 / 100.0;
                let part = OverloadPartition::new(&l, n_tx, a).unwrap();
                assert!((0.0..=1.0).contains(&part.z), "z {} at α {a}", part.z);
                if a <= 1.0 / q {
                    assert_eq!(part.delta, a);
                }
            }
        }
    }

    #[test]
    fn nors_underloaded_nulls_other_groups() {
        let l = layout(&[1, 2, 3]);
        let est = channel(6, 6, 1);
        let p = 1000.0;
        let prec = build_nors_underloaded(&est, &l, p).unwrap();
        let r = residual(&est, &prec, |m| l.users_outside(&[m]));
        assert!(r < 1e-9 * p.sqrt(), "residual {r}");
        for pm in &prec.privates {
            assert!((pm.norm_squared() - p / 3.0).abs() < 1e-9 * p);
        }
        assert!(prec.common.is_none());
    }

    #[test]
    fn nors_underloaded_single_group_and_orthogonal() {
        let prec = build_nors_underloaded(&channel(3, 2, 2), &layout(&[2]), 4.0).unwrap();
        assert!((prec.privates[0].norm_squared() - 4.0).abs() < 1e-12);

        let est = ComplexMatrix::identity(3, 3);
        let prec = build_nors_underloaded(&est, &layout(&[1, 1, 1]), 3.0).unwrap();
        for (m, p) in prec.privates.iter().enumerate() {
            assert!((p[m].norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn nors_underloaded_regime_error() {
        let err = build_nors_underloaded(&channel(4, 6, 3), &layout(&[1, 2, 3]), 10.0);
        assert!(matches!(err, Err(Error::Regime(_))));
    }

    #[test]
    fn nors_partial_structure() {
        let l = layout(&[1, 2, 3]);
        let est = channel(4, 6, 4);
        let p = 1e4;
        let (prec, sac) = build_nors_partial(&est, &l, p, 1.0).unwrap();
        assert_eq!(sac.x, 2);
        assert_eq!(sac.beta, 0.5);
        let r = residual(&est, &prec, |m| {
            if m < sac.x {
                l.users_outside(&[m, sac.x])
            } else {
                l.users_outside(&[m])
            }
        });
        assert!(r < 1e-9 * p.sqrt());
        let small = p.sqrt() / 2.0;
        assert!((prec.privates[0].norm_squared() - small).abs() < 1e-9 * p);
        assert!((prec.privates[1].norm_squared() - small).abs() < 1e-9 * p);
        assert!((prec.privates[2].norm_squared() - (p - p.sqrt())).abs() < 1e-9 * p);
        assert!((prec.total_power() - p).abs() < 1e-9 * p);
    }

    #[test]
    fn rs_underloaded_power_accounting() {
        let l = layout(&[1, 2, 3]);
        let est = channel(6, 6, 5);
        let p = 500.0;
        for alpha in [0.0, 0.4, 1.0] {
            let c = build_rs_underloaded(&est, &l, p, alpha, &mut stream()).unwrap();
            let prec = &c.precoders;
            assert!((prec.total_power() - p).abs() < 1e-9 * p);
            let private: f64 = prec.privates.iter().map(|v| v.norm_squared()).sum();
            assert!((private - p.powf(alpha)).abs() < 1e-9 * p);
            assert_eq!(c.split, SplitRule::Equal);
        }
        let c = build_rs_underloaded(&est, &l, p, 1.0, &mut stream()).unwrap();
        assert!(c.precoders.common_power() < 1e-12);
    }

    #[test]
    fn rs_overloaded_structure() {
        let l = layout(&[1, 2, 3]);
        let est = channel(4, 6, 6);
        let p = 1e3;
        let (c, part) = build_rs_overloaded(&est, &l, p, 0.3, &mut stream()).unwrap();
        assert_eq!(part.members, vec![0, 1]);
        let prec = &c.precoders;
        assert_eq!(prec.privates[2].norm_squared(), 0.0);
        assert!((prec.total_power() - p).abs() < 1e-9 * p);
        let members: Vec<usize> = (0..6).filter(|&k| l.group_of(k) < 2).collect();
        let r = residual(&est, prec, |m| {
            if m < 2 {
                members.iter().copied().filter(|&k| l.group_of(k) != m).collect()
            } else {
                vec![]
            }
        });
        assert!(r < 1e-9 * p.sqrt());
        let split = c.split.apply(3.0, 3);
        assert!((split.portions[0] - part.z * 1.5).abs() < 1e-12);
        assert!((split.portions[2] - (1.0 - part.z) * 3.0).abs() < 1e-12);
        assert!((split.total() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn directions_ignore_channel_scale() {
        let l = layout(&[1, 2, 3]);
        let est = channel(6, 6, 7);
        let big = &est * Complex64::new(37.5, 0.0);
        let a = build_nors_underloaded(&est, &l, 10.0).unwrap();
        let b = build_nors_underloaded(&big, &l, 10.0).unwrap();
        for (x, y) in a.privates.iter().zip(&b.privates) {
            assert!((x.dotc(y).norm() - x.norm() * y.norm()).abs() < 1e-9);
        }
    }

    #[test]
    fn low_power_is_clipped() {
        let l = layout(&[1, 2, 3]);
        let est = channel(6, 6, 8);
        let c = build_rs_underloaded(&est, &l, 0.5, 0.5, &mut stream()).unwrap();
        assert!(c.precoders.total_power() <= 0.5 * (1.0 + 1e-12));
        assert!(c.precoders.common_power() >= 0.0);
    }

    #[test]
    fn slope_examples() {
        let pts: Vec<(f64, f64)> = [10.0, 100.0, 1000.0].iter().map(|&p: &f64| (p, p.log2())).collect();
        assert!((estimate_dof_slope(&pts).unwrap() - 1.0).abs() < 1e-12);
        let flat = [(10.0, 2.0), (100.0, 2.0)];
        assert_eq!(estimate_dof_slope(&flat).unwrap(), 0.0);
        assert!(estimate_dof_slope(&flat[..1]).is_err());
        assert!(estimate_dof_slope(&[(10.0, 1.0), (10.0, 2.0)]).is_err());
    }

    /// Slope of `0.5·log2(P)` plus noise with σ = 0.01 over 25..45 dB. The
    /// standard error of the fitted slope is σ / √Σ(x − x̄)², about 0.001.
    #[test]
    fn slope_with_noise() {
        let mut s = RandomStream::new(9, &["noise".into()]);
        let pts: Vec<(f64, f64)> = (0..5)
            .map(|i| {
                let p = 10f64.powf((25.0 + 5.0 * i as f64) / 10.0);
                (p, 0.5 * p.log2() + 0.01 * s.standard_normal())
            })
            .collect();
        assert!((estimate_dof_slope(&pts).unwrap() - 0.5).abs() < 0.02);
    }

    #[test]
    fn construct_dispatch_and_matched_filter() {
        let eq = layout(&[2, 2, 2]);
        let est = channel(4, 6, 10);
        let c = construct(Strategy::NoRs, &est, &eq, 100.0, 0.6, &mut stream()).unwrap();
        assert!((c.precoders.total_power() - 100.0).abs() < 1e-9);
        let c = construct(Strategy::Rs, &est, &eq, 100.0, 0.6, &mut stream()).unwrap();
        assert!(c.precoders.common.is_some());
        assert!(frobenius(&est) > 0.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn sizes_strategy() -> impl Strategy<Value = Vec<usize>> {
            prop::collection::vec(1usize..5, 1..5)
        }

        use proptest::strategy::Strategy;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(256))]

            #[test]
            fn rs_never_below_nors(sizes in sizes_strategy(), n_tx in 1usize..16, alpha in 0.0f64..=1.0) {
                let l = GroupLayout::from_sizes(&sizes).unwrap();
                let rs = rs_dof(&l, n_tx, alpha).unwrap();
                let nors = nors_dof(&l, n_tx, alpha).unwrap();
                prop_assert!(rs.value >= nors.value - 1e-12);
                prop_assert!((0.0..=1.0).contains(&rs.value));
                if rs.regime != Regime::Underloaded {
                    prop_assert!(rs.value >= 1.0 / l.num_groups() as f64 - 1e-12);
                }
            }

            #[test]
            fn constructions_meet_total_power(sizes in sizes_strategy(), n_tx in 1usize..10, alpha in 0.0f64..=1.0, seed in any::<u64>(), rs in any::<bool>()) {
                let l = GroupLayout::from_sizes(&sizes).unwrap();
                let est = channel(n_tx, l.num_users(), seed);
                let p = 10f64.powf(2.5);
                let strategy = if rs { crate::model::Strategy::Rs } else { crate::model::Strategy::NoRs };
                let c = construct(strategy, &est, &l, p, alpha, &mut stream()).unwrap();
                prop_assert!((c.precoders.total_power() - p).abs() <= 1e-9 * p);
                prop_assert!(c.precoders.is_finite());
            }
        }
    }
}
