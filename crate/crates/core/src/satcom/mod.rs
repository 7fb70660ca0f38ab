//! Multibeam GEO satellite channel: Bessel beam pattern, seven-beam
//! hexagonal geometry, rain attenuation, and the 4-colour frequency-reuse
//! baseline.
//!
//! Channel amplitudes absorb the receiver noise, so downstream rate
//! computations use unit noise and per-feed powers in watts.

mod geometry;
mod pattern;

pub use geometry::{
    angle_between, beam_centers, place_users, slant_range, BeamGeometry, Placement, UserPosition, NUM_BEAMS,
};
pub use pattern::{
    beam_gain, link_amplitude, pattern_argument, RainFading, SatelliteParams, BOLTZMANN, EARTH_RADIUS_M,
    SPEED_OF_LIGHT, U_3DB,
};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::numerics::{ComplexMatrix, RandomStream};

/// `B_{n,k}` for feed `n` (row) and user `k` (column).
pub fn link_matrix(geometry: &BeamGeometry, params: &SatelliteParams) -> Result<DMatrix<f64>> {
    let (n, k) = (geometry.num_beams(), geometry.num_users());
    let mut b = DMatrix::zeros(n, k);
    for (col, user) in geometry.users.iter().enumerate() {
        for row in 0..n {
            b[(row, col)] = link_amplitude(user.offsets[row], user.slant_m, params)?;
        }
    }
    Ok(b)
}

/// Per-user `χ^{-1/2} e^{-jφ}` with `χ_dB = 20 log10 χ` log-normal and `φ`
/// uniform on `[0, 2π)`. Without rain only the phase is drawn.
pub fn rain_phase(stream: &mut RandomStream, params: &SatelliteParams) -> Complex64 {
    let magnitude = match params.rain {
        Some(r) => {
            let chi_db = (r.mu + r.sigma * stream.standard_normal()).exp();
            10f64.powf(-chi_db / 40.0)
        }
        None => 1.0,
    };
    let phi = stream.uniform_range(0.0, std::f64::consts::TAU);
    Complex64::from_polar(magnitude, -phi)
}

/// The `Q` matrix: one rain/phase draw per user, shared by every feed.
pub fn rain_matrix(n_feeds: usize, users: usize, params: &SatelliteParams, stream: &mut RandomStream) -> ComplexMatrix {
    let mut q = ComplexMatrix::zeros(n_feeds, users);
    for k in 0..users {
        let z = rain_phase(stream, params);
        q.column_mut(k).fill(z);
    }
    q
}

/// `H = B ∘ Q`.
pub fn build_satellite_channel(
    geometry: &BeamGeometry,
    params: &SatelliteParams,
    stream: &mut RandomStream,
) -> Result<ComplexMatrix> {
    let b = link_matrix(geometry, params)?;
    let q = rain_matrix(b.nrows(), b.ncols(), params, stream);
    Ok(ComplexMatrix::from_fn(b.nrows(), b.ncols(), |i, j| q[(i, j)] * b[(i, j)]))
}

/// Colour per beam: centre `A`, ring `B, C, D, B, C, D`.
pub const FOUR_COLORS: [usize; NUM_BEAMS] = [0, 1, 2, 3, 1, 2, 3];

/// Check that no two adjacent beams share a colour out of four.
pub fn validate_coloring(geometry: &BeamGeometry, colors: &[usize]) -> Result<()> {
    let n = geometry.num_beams();
    if colors.len() != n || colors.iter().any(|&c| c >= 4) {
        return Err(invalid("coloring needs one of four colours per beam"));
    }
    for a in 0..n {
        for b in a + 1..n {
            if colors[a] == colors[b] && geometry.adjacent(a, b) {
                return Err(invalid(format!("adjacent beams {a} and {b} share colour {}", colors[a])));
            }
        }
    }
    Ok(())
}

/// Per-beam rates (bits/s/Hz over the full band) of the 4-colour scheme.
///
/// Each feed radiates `per_feed_power` into its own beam on a quarter of
/// the band, so the noise is a quarter of the unit full-band noise and
/// only same-colour feeds interfere. A beam's rate is its worst user's.
pub fn four_color_rates(
    h: &ComplexMatrix,
    geometry: &BeamGeometry,
    colors: &[usize],
    per_feed_power: f64,
) -> Result<Vec<f64>> {
    validate_coloring(geometry, colors)?;
    if h.nrows() != geometry.num_beams() || h.ncols() != geometry.num_users() {
        return Err(invalid("channel does not match the geometry"));
    }
    if !(per_feed_power >= 0.0) {
        return Err(invalid("per-feed power must be non-negative"));
    }
    let mut rates = vec![f64::INFINITY; geometry.num_beams()];
    for (k, user) in geometry.users.iter().enumerate() {
        let serving = user.beam;
        let signal = per_feed_power * h[(serving, k)].norm_sqr();
        let interference: f64 = (0..geometry.num_beams())
            .filter(|&n| n != serving && colors[n] == colors[serving])
            .map(|n| per_feed_power * h[(n, k)].norm_sqr())
            .sum();
        let rate = 0.25 * (1.0 + signal / (interference + 0.25)).log2();
        rates[serving] = rates[serving].min(rate);
    }
    Ok(rates)
}
