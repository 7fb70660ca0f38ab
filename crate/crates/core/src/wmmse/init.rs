use crate::dof;
use crate::error::Result;
use crate::model::{GroupLayout, PowerConstraint, PrecoderSet, Strategy};
use crate::numerics::{dominant_left_singular_vector, ComplexMatrix, ComplexVector, RandomStream};

/// Smallest share of the power budget given to the common stream at the
/// start of RS optimisation. A silent common stream is a fixed point of the
/// alternating updates, so it must start switched on.
pub const COMMON_POWER_FLOOR: f64 = 0.2;

/// Starting precoders for the optimizer: the DoF construction for the
/// regime, with every group given a non-zero private precoder and, for RS,
/// the common stream along the dominant left singular vector of `Ĥ`.
pub fn initial_precoders(
    strategy: Strategy,
    est: &ComplexMatrix,
    layout: &GroupLayout,
    pc: &PowerConstraint,
    alpha: f64,
    stream: &mut RandomStream,
) -> Result<PrecoderSet> {
    let total = pc.total();
    let construction = dof::construct(strategy, est, layout, total, alpha, stream)?;
    let mut prec = construction.precoders;

    // groups served only by the common stream still need a private direction
    let floor = prec
        .privates
        .iter()
        .map(|p| p.norm_squared())
        .filter(|&e| e > 0.0)
        .fold(f64::INFINITY, f64::min);
    let floor = if floor.is_finite() { floor } else { total / layout.num_groups() as f64 };
    let matched = dof::build_matched_filter(est, layout, 1.0)?;
    for (p, mf) in prec.privates.iter_mut().zip(&matched.privates) {
        if p.norm_squared() <= 1e-12 * total {
            *p = mf.unscale(mf.norm()) * num_complex::Complex64::new(floor.sqrt(), 0.0);
        }
    }

    if strategy == Strategy::Rs {
        let common_power = prec.common_power().max(COMMON_POWER_FLOOR * total);
        let private_power: f64 = prec.privates.iter().map(|p| p.norm_squared()).sum();
        let private_scale = ((total - common_power) / private_power).sqrt();
        for p in &mut prec.privates {
            *p *= num_complex::Complex64::new(private_scale, 0.0);
        }
        let dir: ComplexVector = dominant_left_singular_vector(est)?;
        prec.common = Some(dir * num_complex::Complex64::new(common_power.sqrt(), 0.0));
    } else {
        let used = prec.total_power();
        prec.scale((total / used).sqrt());
    }
    pc.fit(&mut prec)?;
    Ok(prec)
}
