//! Air-to-ground RF channel: elevation angle, LoS probability, path gain and
//! the per-GU average rate with its LoS-only lower bound.

use crate::error::{Error, Result};
use crate::scenario::{EnvironmentParams, Scenario};

/// Elevation angle from a GU at horizontal radius `r` to a UAV at altitude
/// `h_u`, in degrees. Continuously extended to 90 at `r = 0`.
pub fn elevation_angle_deg(r: f64, h_u: f64) -> Result<f64> {
    if !(h_u > 0.0) {
        return Err(Error::domain(
            "elevation_angle_deg",
            format!("altitude must be > 0 (got {h_u})"),
        ));
    }
    if !(r >= 0.0) {
        return Err(Error::domain(
            "elevation_angle_deg",
            format!("radius must be >= 0 (got {r})"),
        ));
    }
    Ok(elevation_deg(r, h_u))
}

#[inline]
pub(crate) fn elevation_deg(r: f64, h_u: f64) -> f64 {
    h_u.atan2(r).to_degrees()
}

/// Probability that the link to a GU at radius `r` is line-of-sight.
#[inline]
pub fn los_probability(r: f64, h_u: f64, env: &EnvironmentParams) -> f64 {
    let theta = elevation_deg(r, h_u);
    1.0 / (1.0 + env.a * (-env.b * (theta - env.a)).exp())
}

/// Linear path gain `(h_u^2 + r^2)^(-alpha/2)` for the LoS or NLoS exponent.
#[inline]
pub fn a2g_gain(r: f64, h_u: f64, los: bool, env: &EnvironmentParams) -> f64 {
    let alpha = if los { env.alpha_los } else { env.alpha_nlos };
    (h_u * h_u + r * r).powf(-0.5 * alpha)
}

/// Rate carried by the LoS branch alone: `P_L * B * log2(1 + SNR_L)`.
#[inline]
pub fn rate_lower_bound(r: f64, h_u: f64, p_u: f64, s: &Scenario) -> f64 {
    let snr = p_u / s.env.noise_los * a2g_gain(r, h_u, true, &s.env);
    los_probability(r, h_u, &s.env) * s.rf.bandwidth_rf * snr.ln_1p() * std::f64::consts::LOG2_E
}

/// LoS/NLoS-averaged rate at a GU of radius `r`, bits/s.
#[inline]
pub fn avg_rate(r: f64, h_u: f64, p_u: f64, s: &Scenario) -> f64 {
    let p_los = los_probability(r, h_u, &s.env);
    let snr_los = p_u / s.env.noise_los * a2g_gain(r, h_u, true, &s.env);
    let snr_nlos = p_u / s.env.noise_nlos * a2g_gain(r, h_u, false, &s.env);
    let b = s.rf.bandwidth_rf;
    (p_los * b * snr_los.ln_1p() + (1.0 - p_los) * b * snr_nlos.ln_1p()) * std::f64::consts::LOG2_E
}
