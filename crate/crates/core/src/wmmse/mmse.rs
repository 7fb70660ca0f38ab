use num_complex::Complex64;

use crate::csit::ConditionalSampleSet;
use crate::error::{invalid, Error, Result};
use crate::model::{GroupLayout, PrecoderSet, UNIT_NOISE};
use crate::numerics::{ComplexMatrix, ComplexVector};

/// MMSE equalizers and weights for every sample and user, stored
/// sample-major (`s · K + k`). Without a common stream the common entries
/// are `g_c = 0`, `u_c = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualizerWeightSet {
    pub num_samples: usize,
    pub num_users: usize,
    pub has_common: bool,
    pub g_common: Vec<Complex64>,
    pub g_private: Vec<Complex64>,
    pub u_common: Vec<f64>,
    pub u_private: Vec<f64>,
}

impl EqualizerWeightSet {
    fn index(&self, s: usize, k: usize) -> usize {
        s * self.num_users + k
    }
}

/// Closed-form MMSE receivers `g = pᴴh / T` and weights `u = 1/ε` at the
/// given precoders.
pub fn mmse_update(
    samples: &ConditionalSampleSet,
    prec: &PrecoderSet,
    layout: &GroupLayout,
) -> Result<EqualizerWeightSet> {
    let k_total = layout.num_users();
    if samples.is_empty() || samples.estimate.ncols() != k_total {
        return Err(invalid("sample set does not match the layout"));
    }
    prec.check_dims(samples.estimate.nrows(), layout.num_groups())?;
    let n = samples.len() * k_total;
    let mut out = EqualizerWeightSet {
        num_samples: samples.len(),
        num_users: k_total,
        has_common: prec.common.is_some(),
        g_common: vec![Complex64::new(0.0, 0.0); n],
        g_private: vec![Complex64::new(0.0, 0.0); n],
        u_common: vec![1.0; n],
        u_private: vec![1.0; n],
    };
    let mut proj = vec![Complex64::new(0.0, 0.0); prec.num_groups()];
    for (s, h) in samples.realizations.iter().enumerate() {
        for k in 0..k_total {
            let hk = h.column(k);
            for (j, p) in prec.privates.iter().enumerate() {
                proj[j] = hk.dotc(p);
            }
            let t_k = proj.iter().map(|z| z.norm_sqr()).sum::<f64>() + UNIT_NOISE;
            if !(t_k > 0.0) || !t_k.is_finite() {
                return Err(Error::Degenerate(format!("receive power {t_k} at user {k}, sample {s}")));
            }
            let own = proj[layout.group_of(k)];
            let i = s * k_total + k;
            out.g_private[i] = own.conj() / t_k;
            out.u_private[i] = t_k / (t_k - own.norm_sqr());
            if let Some(pc) = &prec.common {
                let c = hk.dotc(pc);
                let t_c = t_k + c.norm_sqr();
                out.g_common[i] = c.conj() / t_c;
                out.u_common[i] = t_c / t_k;
            }
        }
    }
    Ok(out)
}

/// Sample-averaged weighted MSEs as explicit quadratics in the precoders:
/// `ξ̄_k = Σ_j p_jᴴΨ_k p_j − 2Re(f_kᴴ p_μ(k)) + ν_k` and
/// `ξ̄_c,k = p_cᴴΨ_c,k p_c + Σ_j p_jᴴΨ_c,k p_j − 2Re(f_c,kᴴ p_c) + ν_c,k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemCoefficients {
    pub psi: Vec<ComplexMatrix>,
    pub f: Vec<ComplexVector>,
    pub nu: Vec<f64>,
    /// Empty when there is no common stream.
    pub psi_common: Vec<ComplexMatrix>,
    pub f_common: Vec<ComplexVector>,
    pub nu_common: Vec<f64>,
}

fn quad(psi: &ComplexMatrix, p: &ComplexVector) -> f64 {
    p.dotc(&(psi * p)).re
}

impl SubproblemCoefficients {
    /// `(ξ̄_c, ξ̄)` per user at `prec`. `ξ̄_c` is empty without a common stream.
    pub fn evaluate(&self, prec: &PrecoderSet, layout: &GroupLayout) -> (Vec<f64>, Vec<f64>) {
        let k_total = layout.num_users();
        let private: Vec<f64> = (0..k_total)
            .map(|k| {
                let m = layout.group_of(k);
                let q: f64 = prec.privates.iter().map(|p| quad(&self.psi[k], p)).sum();
                q - 2.0 * self.f[k].dotc(&prec.privates[m]).re + self.nu[k]
            })
            .collect();
        let common = match &prec.common {
            Some(pc) if !self.psi_common.is_empty() => (0..k_total)
                .map(|k| {
                    let psi = &self.psi_common[k];
                    let q: f64 = quad(psi, pc) + prec.privates.iter().map(|p| quad(psi, p)).sum::<f64>();
                    q - 2.0 * self.f_common[k].dotc(pc).re + self.nu_common[k]
                })
                .collect(),
            _ => Vec::new(),
        };
        (common, private)
    }
}

/// Accumulate `Ψ = mean u|g|² h hᴴ`, `f = mean u g* h` and
/// `ν = mean(u|g|²σ² + u − ln u)` for every user, summing samples in order.
pub fn assemble_subproblem(
    samples: &ConditionalSampleSet,
    gw: &EqualizerWeightSet,
    layout: &GroupLayout,
) -> Result<SubproblemCoefficients> {
    let k_total = layout.num_users();
    if gw.num_samples != samples.len() || gw.num_users != k_total {
        return Err(invalid("equalizer set dimensions do not match the samples"));
    }
    let n_tx = samples.estimate.nrows();
    let inv_s = 1.0 / samples.len() as f64;
    let build = |g: &[Complex64], u: &[f64]| {
        let mut psi = vec![ComplexMatrix::zeros(n_tx, n_tx); k_total];
        let mut f = vec![ComplexVector::zeros(n_tx); k_total];
        let mut nu = vec![0.0; k_total];
        for (s, h) in samples.realizations.iter().enumerate() {
            for k in 0..k_total {
                let i = gw.index(s, k);
                let hk = h.column(k);
                let w = u[i] * g[i].norm_sqr();
                psi[k].gerc(Complex64::new(w * inv_s, 0.0), &hk, &hk, Complex64::new(1.0, 0.0));
                f[k].axpy(Complex64::new(u[i] * inv_s, 0.0) * g[i].conj(), &hk, Complex64::new(1.0, 0.0));
                nu[k] += (w * UNIT_NOISE + u[i] - u[i].ln()) * inv_s;
            }
        }
        (psi, f, nu)
    };
    let (psi, f, nu) = build(&gw.g_private, &gw.u_private);
    let (psi_common, f_common, nu_common) = if gw.has_common {
        build(&gw.g_common, &gw.u_common)
    } else {
        (Vec::new(), Vec::new(), Vec::new())
    };
    Ok(SubproblemCoefficients { psi, f, nu, psi_common, f_common, nu_common })
}
