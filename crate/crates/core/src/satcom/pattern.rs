use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::numerics::bessel_j_over_power;

pub const BOLTZMANN: f64 = 1.380649e-23;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// `u` at which the pattern is 3 dB below its peak.
pub const U_3DB: f64 = 2.07123;

/// Log-normal rain attenuation: `ln(χ_dB) ~ N(mu, sigma²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RainFading {
    pub mu: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SatelliteParams {
    pub carrier_hz: f64,
    pub height_m: f64,
    pub bandwidth_hz: f64,
    /// Half-power angle from the beam centre, radians.
    pub theta_3db: f64,
    /// Peak beam gain, linear.
    pub g_max: f64,
    /// User terminal gain, linear.
    pub g_rx: f64,
    pub t_sys_k: f64,
    /// `None` switches rain fading off (`|Q| = 1`).
    pub rain: Option<RainFading>,
}

impl Default for SatelliteParams {
    fn default() -> Self {
        SatelliteParams::from_table(20e9, 35_786e3, 500e6, 0.4, 52.0, 41.7, 517.0, Some((-3.125, 1.591)))
            .expect("default parameters are valid")
    }
}

impl SatelliteParams {
    /// Build from engineering units: degrees for the 3 dB angle and dBi for
    /// the gains.
    #[allow(clippy::too_many_arguments)]
    pub fn from_table(
        carrier_hz: f64,
        height_m: f64,
        bandwidth_hz: f64,
        theta_3db_deg: f64,
        g_max_dbi: f64,
        g_rx_dbi: f64,
        t_sys_k: f64,
        rain: Option<(f64, f64)>,
    ) -> Result<Self> {
        let p = SatelliteParams {
            carrier_hz,
            height_m,
            bandwidth_hz,
            theta_3db: theta_3db_deg.to_radians(),
            g_max: 10f64.powf(g_max_dbi / 10.0),
            g_rx: 10f64.powf(g_rx_dbi / 10.0),
            t_sys_k,
            rain: rain.map(|(mu, sigma)| RainFading { mu, sigma }),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.carrier_hz,
            self.height_m,
            self.bandwidth_hz,
            self.theta_3db,
            self.g_max,
            self.g_rx,
            self.t_sys_k,
        ];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(invalid("satellite parameters must be finite and positive"));
        }
        if let Some(r) = self.rain {
            if !r.mu.is_finite() || !(r.sigma.is_finite() && r.sigma >= 0.0) {
                return Err(invalid("rain parameters must be finite with sigma >= 0"));
            }
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    /// `√(κ T_sys B_w)`, the noise amplitude absorbed into the channel.
    pub fn noise_amplitude(&self) -> f64 {
        (BOLTZMANN * self.t_sys_k * self.bandwidth_hz).sqrt()
    }

    pub fn without_rain(mut self) -> Self {
        self.rain = None;
        self
    }
}

/// Pattern argument `u = 2.07123 sin θ / sin θ_3dB`.
pub fn pattern_argument(theta: f64, params: &SatelliteParams) -> f64 {
    U_3DB * theta.sin() / params.theta_3db.sin()
}

/// Linear gain `G_max [J1(u)/2u + 36 J3(u)/u³]²` at angle `theta` (radians)
/// from the beam centre.
pub fn beam_gain(theta: f64, params: &SatelliteParams) -> Result<f64> {
    if !(theta >= 0.0) || !theta.is_finite() {
        return Err(invalid(format!("beam angle must be finite and >= 0, got {theta}")));
    }
    let u = pattern_argument(theta, params).abs();
    if u == 0.0 {
        return Ok(params.g_max);
    }
    let bracket = 0.5 * bessel_j_over_power(1, u)? + 36.0 * bessel_j_over_power(3, u)?;
    Ok(params.g_max * bracket * bracket)
}

/// Noise-normalised amplitude `√(G_R G) / (4π d/λ √(κ T_sys B_w))` for a
/// user at slant range `distance_m` and angle `theta` off the feed's beam
/// centre.
pub fn link_amplitude(theta: f64, distance_m: f64, params: &SatelliteParams) -> Result<f64> {
    if !(distance_m > 0.0) {
        return Err(invalid(format!("slant distance must be positive, got {distance_m}")));
    }
    let gain = beam_gain(theta, params)?;
    let path = 4.0 * std::f64::consts::PI * distance_m / params.wavelength();
    Ok((params.g_rx * gain).sqrt() / (path * params.noise_amplitude()))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent series for `J_n`, summed to 40 terms.
    fn j_series(n: i32, x: f64) -> f64 {
        let mut term = (x / 2.0).powi(n) / (1..=n).map(f64::from).product::<f64>();
        let mut sum = term;
        for k in 1..40 {
            term *= -(x * x / 4.0) / (k as f64 * (k + n) as f64);
            sum += term;
        }
        sum
    }

    fn oracle_ratio(u: f64) -> f64 {
        let b = j_series(1, u) / (2.0 * u) + 36.0 * j_series(3, u) / u.powi(3);
        b * b
    }

    #[test]
    fn boresight_is_peak_gain() {
        let p = SatelliteParams::default();
        assert_eq!(beam_gain(0.0, &p).unwrap(), p.g_max);
        let near = beam_gain(1e-9, &p).unwrap() / p.g_max;
        assert!((near - 1.0).abs() < 1e-12);
    }

    #[test]
    fn half_power_at_3db_angle() {
        let p = SatelliteParams::default();
        let ratio = beam_gain(p.theta_3db, &p).unwrap() / p.g_max;
        assert!((ratio - 0.5).abs() < 1e-3, "{ratio}");
        assert!((ratio - oracle_ratio(U_3DB)).abs() < 1e-10);
        assert!(beam_gain(3.0 * p.theta_3db, &p).unwrap() < 0.05 * p.g_max);
    }

    #[test]
    fn pattern_matches_series_oracle() {
        let p = SatelliteParams::default();
        for i in 1..60 {
            let theta = p.theta_3db * i as f64 / 20.0;
            let u = pattern_argument(theta, &p);
            let got = beam_gain(theta, &p).unwrap() / p.g_max;
            assert!((got - oracle_ratio(u)).abs() < 1e-10, "theta {theta}");
        }
    }

    #[test]
    fn monotone_inside_main_lobe() {
        let p = SatelliteParams::default();
        let mut last = f64::INFINITY;
        for i in 0..=200 {
            let g = beam_gain(p.theta_3db * i as f64 / 200.0, &p).unwrap();
            assert!(g <= last);
            last = g;
        }
    }

    #[test]
    fn nadir_link_regression() {
        let p = SatelliteParams::default();
        let b = link_amplitude(0.0, p.height_m, &p).unwrap();
        assert!((b - 0.854_271_210_481_969).abs() < 1e-12, "{b}");
    }

    #[test]
    fn link_scaling_laws() {
        let p = SatelliteParams::default();
        let b = link_amplitude(0.0, p.height_m, &p).unwrap();
        let far = link_amplitude(0.0, 2.0 * p.height_m, &p).unwrap();
        assert!((far - b / 2.0).abs() < 1e-14);
        let edge = link_amplitude(p.theta_3db, p.height_m, &p).unwrap();
        assert!((edge / b - 0.5f64.sqrt()).abs() < 1e-3);
        let hot = SatelliteParams { t_sys_k: 4.0 * p.t_sys_k, ..p };
        let cold = link_amplitude(0.0, p.height_m, &hot).unwrap();
        assert!((cold - b / 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_input() {
        let p = SatelliteParams::default();
        assert!(beam_gain(-0.1, &p).is_err());
        assert!(link_amplitude(0.0, 0.0, &p).is_err());
        assert!(SatelliteParams::from_table(20e9, -1.0, 500e6, 0.4, 52.0, 41.7, 517.0, None).is_err());
    }
}
