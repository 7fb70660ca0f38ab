//! Multigroup multicast downlink: group layout, precoders, transmit power
//! constraints and the instantaneous SINR / rate expressions for both the
//! rate-splitting (RS) and conventional linear (NoRS) transmission schemes.
//!
//! Indices are zero-based. Groups are kept in ascending-size order; the
//! label a group had when the layout was built is available through
//! [`GroupLayout::original_label`].

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::{linalg::inner_sq, nats_to_bits, ComplexMatrix, ComplexVector};

pub const UNIT_NOISE: f64 = 1.0;

/// Relative slack allowed on a power limit before it counts as violated.
pub const POWER_TOLERANCE: f64 = 1e-9;

/// Transmission scheme: rate-splitting with a common stream, or plain
/// linear precoding with private streams only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "RS")]
    Rs,
    #[serde(rename = "NoRS")]
    NoRs,
}

impl Strategy {
    pub fn label(self) -> &'static str {
        match self {
            Strategy::Rs => "RS",
            Strategy::NoRs => "NoRS",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupLayout {
    members: Vec<Vec<usize>>,
    group_of: Vec<usize>,
    original: Vec<usize>,
}

impl GroupLayout {
    /// Build from a user → group-label map. Labels must cover `0..M` with no gaps.
    pub fn from_assignment(labels: &[usize]) -> Result<Self> {
        if labels.is_empty() {
            return Err(invalid("group layout needs at least one user"));
        }
        let m = labels.iter().max().unwrap() + 1;
        let mut by_label = vec![Vec::new(); m];
        for (k, &g) in labels.iter().enumerate() {
            by_label[g].push(k);
        }
        if by_label.iter().any(|g| g.is_empty()) {
            return Err(invalid("group labels must cover 0..M without empty groups"));
        }
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&g| by_label[g].len()); // stable: equal sizes keep label order
        let members: Vec<Vec<usize>> = order.iter().map(|&g| by_label[g].clone()).collect();
        let mut group_of = vec![0; labels.len()];
        for (mi, users) in members.iter().enumerate() {
            for &k in users {
                group_of[k] = mi;
            }
        }
        Ok(GroupLayout { members, group_of, original: order })
    }

    /// Users are numbered consecutively, group by group, in the order given.
    pub fn from_sizes(sizes: &[usize]) -> Result<Self> {
        if sizes.is_empty() || sizes.iter().any(|&g| g == 0) {
            return Err(invalid("group sizes must be non-empty and positive"));
        }
        let labels: Vec<usize> = sizes
            .iter()
            .enumerate()
            .flat_map(|(g, &n)| std::iter::repeat_n(g, n))
            .collect();
        Self::from_assignment(&labels)
    }

    pub fn num_users(&self) -> usize {
        self.group_of.len()
    }

    pub fn num_groups(&self) -> usize {
        self.members.len()
    }

    /// Ascending group sizes `G_1 ≤ … ≤ G_M`.
    pub fn sizes(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }

    pub fn members(&self, group: usize) -> &[usize] {
        &self.members[group]
    }

    pub fn group_of(&self, user: usize) -> usize {
        self.group_of[user]
    }

    /// Label the group had in the input to the constructor.
    pub fn original_label(&self, group: usize) -> usize {
        self.original[group]
    }

    /// Users of every group except those listed in `excluded`.
    pub fn users_outside(&self, excluded: &[usize]) -> Vec<usize> {
        (0..self.num_users())
            .filter(|&k| !excluded.contains(&self.group_of[k]))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderSet {
    pub common: Option<ComplexVector>,
    pub privates: Vec<ComplexVector>,
}

impl PrecoderSet {
    pub fn no_rs(privates: Vec<ComplexVector>) -> Self {
        PrecoderSet { common: None, privates }
    }

    pub fn rs(common: ComplexVector, privates: Vec<ComplexVector>) -> Self {
        PrecoderSet { common: Some(common), privates }
    }

    pub fn zeros(n_tx: usize, groups: usize, with_common: bool) -> Self {
        PrecoderSet {
            common: with_common.then(|| ComplexVector::zeros(n_tx)),
            privates: vec![ComplexVector::zeros(n_tx); groups],
        }
    }

    pub fn n_tx(&self) -> usize {
        self.common
            .as_ref()
            .map(|p| p.len())
            .or_else(|| self.privates.first().map(|p| p.len()))
            .unwrap_or(0)
    }

    pub fn num_groups(&self) -> usize {
        self.privates.len()
    }

    /// Sum of squared norms of all precoders.
    pub fn total_power(&self) -> f64 {
        self.common.iter().chain(&self.privates).map(|p| p.norm_squared()).sum()
    }

    pub fn common_power(&self) -> f64 {
        self.common.as_ref().map_or(0.0, |p| p.norm_squared())
    }

    pub fn scale(&mut self, factor: f64) {
        for p in self.common.iter_mut().chain(self.privates.iter_mut()) {
            *p *= num_complex::Complex64::new(factor, 0.0);
        }
    }

    /// Same precoders without the common stream.
    pub fn without_common(&self) -> Self {
        PrecoderSet { common: None, privates: self.privates.clone() }
    }

    pub fn is_finite(&self) -> bool {
        self.common
            .iter()
            .chain(&self.privates)
            .all(|p| p.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }

    pub(crate) fn check_dims(&self, n_tx: usize, groups: usize) -> Result<()> {
        if self.privates.len() != groups {
            return Err(invalid(format!(
                "precoder set has {} private precoders, layout has {groups} groups",
                self.privates.len()
            )));
        }
        if self.common.iter().chain(&self.privates).any(|p| p.len() != n_tx) {
            return Err(invalid(format!("precoder length differs from N_t = {n_tx}")));
        }
        if !self.is_finite() {
            return Err(invalid("precoder set has non-finite entries"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PowerConstraintKind {
    Tpc,
    Pac,
}

/// `p_cᴴ D_l p_c + Σ_m p_mᴴ D_l p_m ≤ P_l` for every `l`, with diagonal `D_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerConstraint {
    kind: PowerConstraintKind,
    shaping: Vec<Vec<f64>>,
    limits: Vec<f64>,
}

impl PowerConstraint {
    /// Total power `P` (equal to the transmit SNR under unit noise).
    pub fn tpc(n_tx: usize, total: f64) -> Result<Self> {
        check_power(n_tx, total)?;
        Ok(PowerConstraint {
            kind: PowerConstraintKind::Tpc,
            shaping: vec![vec![1.0; n_tx]],
            limits: vec![total],
        })
    }

    /// Per-antenna limits `P / N_t`, one constraint per antenna.
    pub fn pac(n_tx: usize, total: f64) -> Result<Self> {
        check_power(n_tx, total)?;
        let shaping = (0..n_tx)
            .map(|l| (0..n_tx).map(|i| if i == l { 1.0 } else { 0.0 }).collect())
            .collect();
        Ok(PowerConstraint {
            kind: PowerConstraintKind::Pac,
            shaping,
            limits: vec![total / n_tx as f64; n_tx],
        })
    }

    pub fn new(kind: PowerConstraintKind, n_tx: usize, total: f64) -> Result<Self> {
        match kind {
            PowerConstraintKind::Tpc => Self::tpc(n_tx, total),
            PowerConstraintKind::Pac => Self::pac(n_tx, total),
        }
    }

    pub fn kind(&self) -> PowerConstraintKind {
        self.kind
    }

    pub fn n_tx(&self) -> usize {
        self.shaping[0].len()
    }

    pub fn len(&self) -> usize {
        self.limits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.limits.is_empty()
    }

    /// Diagonal of `D_l`.
    pub fn shaping(&self, l: usize) -> &[f64] {
        &self.shaping[l]
    }

    pub fn limits(&self) -> &[f64] {
        &self.limits
    }

    pub fn total(&self) -> f64 {
        self.limits.iter().sum()
    }

    /// Largest `radiated_l / P_l`.
    pub fn load(&self, prec: &PrecoderSet) -> Result<f64> {
        let used = radiated_power(prec, self)?;
        Ok(used.iter().zip(&self.limits).map(|(u, p)| u / p).fold(0.0, f64::max))
    }

    pub fn is_feasible(&self, prec: &PrecoderSet) -> Result<bool> {
        Ok(self.load(prec)? <= 1.0 + POWER_TOLERANCE)
    }

    /// Uniformly shrink `prec` so that no limit is exceeded. Directions are kept.
    pub fn fit(&self, prec: &mut PrecoderSet) -> Result<()> {
        let load = self.load(prec)?;
        if load > 1.0 {
            prec.scale(1.0 / load.sqrt());
        }
        Ok(())
    }
}

fn check_power(n_tx: usize, total: f64) -> Result<()> {
    if n_tx == 0 {
        return Err(invalid("power constraint needs N_t >= 1"));
    }
    if !(total > 0.0) || !total.is_finite() {
        return Err(invalid(format!("power limit must be positive, got {total}")));
    }
    Ok(())
}

/// Radiated power seen by each of the `L` shaping matrices.
pub fn radiated_power(prec: &PrecoderSet, pc: &PowerConstraint) -> Result<Vec<f64>> {
    prec.check_dims(pc.n_tx(), prec.num_groups())?;
    Ok(pc
        .shaping
        .iter()
        .map(|d| {
            prec.common
                .iter()
                .chain(&prec.privates)
                .map(|p| p.iter().zip(d).map(|(z, w)| w * z.norm_sqr()).sum::<f64>())
                .sum()
        })
        .collect())
}

/// SINR of the common stream at a user with channel `h`: every private
/// stream counts as interference.
pub fn sinr_common(h: &ComplexVector, prec: &PrecoderSet, noise_var: f64) -> Result<f64> {
    let pc = prec
        .common
        .as_ref()
        .ok_or_else(|| invalid("sinr_common: precoder set has no common stream"))?;
    check_len(h, prec)?;
    let interference: f64 = prec.privates.iter().map(|p| inner_sq(h, p)).sum();
    Ok(inner_sq(h, pc) / (interference + noise_var))
}

/// SINR of the private stream of `group` after the common stream has been
/// removed by SIC.
pub fn sinr_private(
    h: &ComplexVector,
    prec: &PrecoderSet,
    group: usize,
    noise_var: f64,
) -> Result<f64> {
    if group >= prec.privates.len() {
        return Err(invalid(format!("group index {group} out of range")));
    }
    check_len(h, prec)?;
    let mut signal = 0.0;
    let mut interference = 0.0;
    for (j, p) in prec.privates.iter().enumerate() {
        let g = inner_sq(h, p);
        if j == group {
            signal = g;
        } else {
            interference += g;
        }
    }
    Ok(signal / (interference + noise_var))
}

fn check_len(h: &ComplexVector, prec: &PrecoderSet) -> Result<()> {
    if h.len() != prec.n_tx() {
        return Err(invalid(format!(
            "channel length {} differs from precoder length {}",
            h.len(),
            prec.n_tx()
        )));
    }
    Ok(())
}

/// Per-user rates in nats: `(common, private)`. The common entry is 0 when
/// the set has no common stream.
pub(crate) fn user_rates_nats(
    channel: &ComplexMatrix,
    prec: &PrecoderSet,
    layout: &GroupLayout,
    noise_var: f64,
) -> (Vec<f64>, Vec<f64>) {
    let k_total = layout.num_users();
    let mut common = vec![0.0; k_total];
    let mut private = vec![0.0; k_total];
    let mut gains = vec![0.0; prec.privates.len()];
    for k in 0..k_total {
        let h = channel.column(k);
        for (j, p) in prec.privates.iter().enumerate() {
            gains[j] = h.dotc(p).norm_sqr();
        }
        let all: f64 = gains.iter().sum::<f64>() + noise_var;
        let own = gains[layout.group_of(k)];
        private[k] = (all / (all - own)).ln();
        if let Some(pc) = &prec.common {
            let c = h.dotc(pc).norm_sqr();
            common[k] = ((all + c) / all).ln();
        }
    }
    (common, private)
}

/// Portions `C̄_m` of the common rate assigned to each group (bits/s/Hz).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommonRateSplit {
    pub portions: Vec<f64>,
}

impl CommonRateSplit {
    pub fn zeros(groups: usize) -> Self {
        CommonRateSplit { portions: vec![0.0; groups] }
    }

    pub fn equal(common_rate: f64, groups: usize) -> Self {
        CommonRateSplit { portions: vec![common_rate / groups as f64; groups] }
    }

    pub fn total(&self) -> f64 {
        self.portions.iter().sum()
    }

    /// The split maximising `min_m (C_m + r_m)` subject to `Σ C_m ≤ common_rate`,
    /// `C_m ≥ 0`: water-filling over the group private rates `r_m`.
    pub fn water_fill(group_private: &[f64], common_rate: f64) -> Self {
        let m = group_private.len();
        if m == 0 || !(common_rate > 0.0) {
            return Self::zeros(m);
        }
        let mut sorted = group_private.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut level = sorted[m - 1] + common_rate / m as f64;
        let mut prefix = 0.0;
        for j in 0..m {
            prefix += sorted[j];
            let w = (common_rate + prefix) / (j + 1) as f64;
            if j + 1 == m || w <= sorted[j + 1] {
                level = w;
                break;
            }
        }
        let mut portions: Vec<f64> =
            group_private.iter().map(|&r| (level - r).max(0.0)).collect();
        let sum: f64 = portions.iter().sum();
        if sum > common_rate {
            let s = common_rate / sum;
            portions.iter_mut().for_each(|c| *c *= s);
        }
        CommonRateSplit { portions }
    }
}

/// Per-user and per-group rates of one channel realisation (bits/s/Hz).
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub common_user_rates: Vec<f64>,
    pub private_user_rates: Vec<f64>,
    pub common_rate: f64,
    pub group_rates: Vec<f64>,
    pub mmf: f64,
}

/// Rates of every user and group for channel `h` (`N_t × K`). With a common
/// stream the group rate is `C̄_m + min_{i∈G_m} R_i`; without, `min_{i∈G_m} R_i`.
pub fn rate_report(
    channel: &ComplexMatrix,
    prec: &PrecoderSet,
    layout: &GroupLayout,
    split: &CommonRateSplit,
    noise_var: f64,
) -> Result<RateReport> {
    let m = layout.num_groups();
    if channel.ncols() != layout.num_users() {
        return Err(invalid(format!(
            "channel has {} columns, layout has {} users",
            channel.ncols(),
            layout.num_users()
        )));
    }
    prec.check_dims(channel.nrows(), m)?;
    if split.portions.len() != m || split.portions.iter().any(|&c| !(c >= 0.0)) {
        return Err(invalid("split must have one non-negative portion per group"));
    }
    let (rc_nats, rk_nats) = user_rates_nats(channel, prec, layout, noise_var);
    let common_user_rates: Vec<f64> = rc_nats.into_iter().map(nats_to_bits).collect();
    let private_user_rates: Vec<f64> = rk_nats.into_iter().map(nats_to_bits).collect();
    let common_rate = if prec.common.is_some() {
        common_user_rates.iter().cloned().fold(f64::INFINITY, f64::min)
    } else {
        0.0
    };
    if split.total() > common_rate + 1e-9 {
        return Err(Error::ConstraintViolation(format!(
            "common-rate split {} exceeds common rate {common_rate}",
            split.total()
        )));
    }
    let group_rates: Vec<f64> = (0..m)
        .map(|g| {
            let r = layout
                .members(g)
                .iter()
                .map(|&i| private_user_rates[i])
                .fold(f64::INFINITY, f64::min);
            split.portions[g] + r
        })
        .collect();
    let mmf = group_rates.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(RateReport { common_user_rates, private_user_rates, common_rate, group_rates, mmf })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RandomStream;
    use num_complex::Complex64;

    fn cv(v: &[f64]) -> ComplexVector {
        ComplexVector::from_iterator(v.len(), v.iter().map(|&x| Complex64::new(x, 0.0)))
    }

    fn random_vec(n: usize, s: &mut RandomStream) -> ComplexVector {
        ComplexVector::from_fn(n, |_, _| s.complex_normal())
    }

    #[test]
    fn layout_sorts_groups_ascending() {
        let l = GroupLayout::from_sizes(&[3, 1, 2]).unwrap();
        assert_eq!(l.sizes(), vec![1, 2, 3]);
        assert_eq!(l.original_label(0), 1);
        assert_eq!(l.members(2), &[0, 1, 2]);
        assert_eq!(l.group_of(3), 0);
        assert_eq!(l.num_users(), 6);
    }

    #[test]
    fn layout_rejects_gaps() {
        assert!(GroupLayout::from_assignment(&[0, 2]).is_err());
        assert!(GroupLayout::from_sizes(&[]).is_err());
        assert!(GroupLayout::from_sizes(&[1, 0]).is_err());
    }

    #[test]
    fn radiated_power_zero_and_norm() {
        let pc = PowerConstraint::tpc(2, 4.0).unwrap();
        let zero = PrecoderSet::zeros(2, 1, true);
        assert_eq!(radiated_power(&zero, &pc).unwrap(), vec![0.0]);
        assert!(pc.is_feasible(&zero).unwrap());

        let p = PrecoderSet::no_rs(vec![cv(&[2.0f64.sqrt(), 2.0f64.sqrt()])]);
        let used = radiated_power(&p, &pc).unwrap();
        assert!((used[0] - 4.0).abs() < 1e-12);
        assert!(pc.is_feasible(&p).unwrap());
    }

    #[test]
    fn radiated_power_per_antenna() {
        let pc = PowerConstraint::pac(2, 10.0).unwrap();
        let p = PrecoderSet::no_rs(vec![cv(&[1.0, 2.0])]);
        let used = radiated_power(&p, &pc).unwrap();
        assert_eq!(used, vec![1.0, 4.0]);
        assert_eq!(pc.limits(), &[5.0, 5.0]);
        assert!(pc.is_feasible(&p).unwrap());
    }

    #[test]
    fn radiated_power_dimension_mismatch() {
        let pc = PowerConstraint::tpc(3, 1.0).unwrap();
        let p = PrecoderSet::no_rs(vec![cv(&[1.0, 0.0])]);
        assert!(radiated_power(&p, &pc).is_err());
    }

    #[test]
    fn fit_rescales_uniformly() {
        let pc = PowerConstraint::pac(2, 2.0).unwrap();
        let mut p = PrecoderSet::no_rs(vec![cv(&[2.0, 1.0])]);
        pc.fit(&mut p).unwrap();
        assert!((pc.load(&p).unwrap() - 1.0).abs() < 1e-12);
        assert!((p.privates[0][0].re / p.privates[0][1].re - 2.0).abs() < 1e-12);
    }

    #[test]
    fn single_stream_common_sinr() {
        let p: f64 = 7.0;
        let prec = PrecoderSet::rs(cv(&[p.sqrt(), 0.0]), vec![]);
        let h = cv(&[1.0, 0.0]);
        assert!((sinr_common(&h, &prec, 1.0).unwrap() - p).abs() < 1e-12);
        let orth = PrecoderSet::rs(cv(&[0.0, 1.0]), vec![]);
        assert_eq!(sinr_common(&h, &orth, 1.0).unwrap(), 0.0);
        assert!(sinr_common(&h, &PrecoderSet::no_rs(vec![cv(&[1.0, 0.0])]), 1.0).is_err());
    }

    #[test]
    fn private_sinr_no_interference() {
        let p: f64 = 5.0;
        let prec = PrecoderSet::no_rs(vec![cv(&[p.sqrt(), 0.0])]);
        let h = cv(&[1.0, 0.0]);
        assert!((sinr_private(&h, &prec, 0, 1.0).unwrap() - p).abs() < 1e-12);
    }

    #[test]
    fn zero_forcing_removes_interference() {
        let prec = PrecoderSet::no_rs(vec![cv(&[3.0, 0.0]), cv(&[0.0, 2.0])]);
        let h0 = cv(&[1.0, 0.0]);
        let s = sinr_private(&h0, &prec, 0, 1.0).unwrap();
        assert_eq!(s, 9.0); // interference term exactly 0
    }

    /// Direct evaluation of the SINR definitions, summing interference
    /// terms in the opposite order and in a compensated way.
    fn sinr_oracle(h: &ComplexVector, prec: &PrecoderSet, group: Option<usize>) -> f64 {
        let g = |p: &ComplexVector| {
            let mut re = 0.0;
            let mut im = 0.0;
            for i in (0..h.len()).rev() {
                let z = h[i].conj() * p[i];
                re += z.re;
                im += z.im;
            }
            re * re + im * im
        };
        let mut terms: Vec<f64> = Vec::new();
        let signal = match group {
            None => {
                terms.extend(prec.privates.iter().map(g));
                g(prec.common.as_ref().unwrap())
            }
            Some(m) => {
                for (j, p) in prec.privates.iter().enumerate() {
                    if j != m {
                        terms.push(g(p));
                    }
                }
                g(&prec.privates[m])
            }
        };
        terms.sort_by(f64::total_cmp);
        signal / (terms.iter().sum::<f64>() + 1.0)
    }

    #[test]
    fn sinrs_match_direct_evaluation() {
        let mut s = RandomStream::new(11, &["model".into()]);
        for _ in 0..20 {
            let prec = PrecoderSet::rs(
                random_vec(3, &mut s),
                vec![random_vec(3, &mut s), random_vec(3, &mut s)],
            );
            let h = random_vec(3, &mut s);
            let c = sinr_common(&h, &prec, 1.0).unwrap();
            assert!((c - sinr_oracle(&h, &prec, None)).abs() <= 1e-12 * c.max(1.0));
            for m in 0..2 {
                let p = sinr_private(&h, &prec, m, 1.0).unwrap();
                assert!((p - sinr_oracle(&h, &prec, Some(m))).abs() <= 1e-12 * p.max(1.0));
            }
        }
    }

    #[test]
    fn single_user_nors_rate() {
        let p: f64 = 15.0;
        let l = GroupLayout::from_sizes(&[1]).unwrap();
        let h = ComplexMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        let prec = PrecoderSet::no_rs(vec![cv(&[p.sqrt()])]);
        let r = rate_report(&h, &prec, &l, &CommonRateSplit::zeros(1), 1.0).unwrap();
        assert!((r.group_rates[0] - (1.0 + p).log2()).abs() < 1e-12);
        assert_eq!(r.mmf, r.group_rates[0]);
    }

    #[test]
    fn group_rate_is_min_over_members() {
        let mut s = RandomStream::new(12, &["groups".into()]);
        let l = GroupLayout::from_sizes(&[2, 2]).unwrap();
        let h = ComplexMatrix::from_fn(3, 4, |_, _| s.complex_normal());
        let prec = PrecoderSet::no_rs(vec![random_vec(3, &mut s), random_vec(3, &mut s)]);
        let r = rate_report(&h, &prec, &l, &CommonRateSplit::zeros(2), 1.0).unwrap();
        for g in 0..2 {
            let mut brute = f64::INFINITY;
            for &k in l.members(g) {
                let sinr = sinr_private(&h.column(k).into_owned(), &prec, g, 1.0).unwrap();
                brute = brute.min((1.0 + sinr).log2());
            }
            assert!((r.group_rates[g] - brute).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_common_rs_equals_nors() {
        let mut s = RandomStream::new(13, &["degenerate".into()]);
        let l = GroupLayout::from_sizes(&[1, 2]).unwrap();
        let h = ComplexMatrix::from_fn(3, 3, |_, _| s.complex_normal());
        let privates = vec![random_vec(3, &mut s), random_vec(3, &mut s)];
        let nors = PrecoderSet::no_rs(privates.clone());
        let rs = PrecoderSet::rs(ComplexVector::zeros(3), privates);
        let a = rate_report(&h, &nors, &l, &CommonRateSplit::zeros(2), 1.0).unwrap();
        let b = rate_report(&h, &rs, &l, &CommonRateSplit::zeros(2), 1.0).unwrap();
        assert_eq!(a.group_rates, b.group_rates);
        assert_eq!(a.private_user_rates, b.private_user_rates);
        assert_eq!(a.mmf, b.mmf);
    }

    #[test]
    fn split_above_common_rate_is_rejected() {
        let l = GroupLayout::from_sizes(&[1]).unwrap();
        let h = ComplexMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        let prec = PrecoderSet::rs(cv(&[1.0]), vec![cv(&[0.0])]);
        // common SINR = 1, so R_c = 1 bit
        let err = rate_report(&h, &prec, &l, &CommonRateSplit { portions: vec![1.5] }, 1.0);
        assert!(matches!(err, Err(Error::ConstraintViolation(_))));
        let ok = rate_report(&h, &prec, &l, &CommonRateSplit { portions: vec![1.0] }, 1.0);
        assert!((ok.unwrap().mmf - 1.0).abs() < 1e-12);
    }

    #[test]
    fn water_fill_levels_groups() {
        let split = CommonRateSplit::water_fill(&[1.0, 2.0, 4.0], 2.0);
        assert!((split.portions[0] - 1.5).abs() < 1e-12);
        assert!((split.portions[1] - 0.5).abs() < 1e-12);
        assert_eq!(split.portions[2], 0.0);
        let all = CommonRateSplit::water_fill(&[1.0, 1.0], 0.0);
        assert_eq!(all.portions, vec![0.0, 0.0]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn report_ordering(seed in any::<u64>(), use_common in any::<bool>()) {
                let mut s = RandomStream::new(seed, &["prop".into()]);
                let l = GroupLayout::from_sizes(&[1, 2, 3]).unwrap();
                let h = ComplexMatrix::from_fn(4, 6, |_, _| s.complex_normal());
                let privates = (0..3).map(|_| random_vec(4, &mut s)).collect();
                let prec = if use_common {
                    PrecoderSet::rs(random_vec(4, &mut s), privates)
                } else {
                    PrecoderSet::no_rs(privates)
                };
                let probe = rate_report(&h, &prec, &l, &CommonRateSplit::zeros(3), 1.0).unwrap();
                let group_private: Vec<f64> = (0..3).map(|g| probe.group_rates[g]).collect();
                let split = CommonRateSplit::water_fill(&group_private, probe.common_rate);
                let r = rate_report(&h, &prec, &l, &split, 1.0).unwrap();
                for g in 0..3 {
                    prop_assert!(r.mmf <= r.group_rates[g]);
                    let rm = r.group_rates[g] - split.portions[g];
                    for &i in l.members(g) {
                        prop_assert!(rm <= r.private_user_rates[i] + 1e-12);
                    }
                }
                if use_common {
                    let min_c = r.common_user_rates.iter().cloned().fold(f64::INFINITY, f64::min);
                    prop_assert_eq!(r.common_rate, min_c);
                }
            }

            #[test]
            fn common_phase_rotation_is_invisible(seed in any::<u64>(), phase in 0.0..std::f64::consts::TAU) {
                let mut s = RandomStream::new(seed, &["phase".into()]);
                let h = random_vec(3, &mut s);
                let prec = PrecoderSet::rs(random_vec(3, &mut s), vec![random_vec(3, &mut s), random_vec(3, &mut s)]);
                let mut rot = prec.clone();
                let w = Complex64::from_polar(1.0, phase);
                for p in rot.common.iter_mut().chain(rot.privates.iter_mut()) {
                    *p *= w;
                }
                let a = sinr_common(&h, &prec, 1.0).unwrap();
                let b = sinr_common(&h, &rot, 1.0).unwrap();
                prop_assert!((a - b).abs() <= 1e-10 * a.max(1.0));
                let a = sinr_private(&h, &prec, 1, 1.0).unwrap();
                let b = sinr_private(&h, &rot, 1, 1.0).unwrap();
                prop_assert!((a - b).abs() <= 1e-10 * a.max(1.0));
            }

            #[test]
            fn single_group_power_scaling_never_hurts(seed in any::<u64>(), c in 1.0f64..10.0) {
                let mut s = RandomStream::new(seed, &["scale".into()]);
                let h = random_vec(2, &mut s);
                let prec = PrecoderSet::no_rs(vec![random_vec(2, &mut s)]);
                let mut big = prec.clone();
                big.scale(c);
                prop_assert!(sinr_private(&h, &big, 0, 1.0).unwrap() >= sinr_private(&h, &prec, 0, 1.0).unwrap());
            }

            #[test]
            fn dropping_a_member_never_lowers_group_rate(seed in any::<u64>()) {
                let mut s = RandomStream::new(seed, &["subset".into()]);
                let h = ComplexMatrix::from_fn(3, 3, |_, _| s.complex_normal());
                let prec = PrecoderSet::no_rs(vec![random_vec(3, &mut s)]);
                let full = GroupLayout::from_sizes(&[3]).unwrap();
                let r_full = rate_report(&h, &prec, &full, &CommonRateSplit::zeros(1), 1.0).unwrap();
                let sub_h = h.columns(0, 2).into_owned();
                let sub = GroupLayout::from_sizes(&[2]).unwrap();
                let r_sub = rate_report(&sub_h, &prec, &sub, &CommonRateSplit::zeros(1), 1.0).unwrap();
                prop_assert!(r_sub.group_rates[0] >= r_full.group_rates[0]);
            }
        }
    }
}
