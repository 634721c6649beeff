//! Edge-GU statistics under a homogeneous PPP on the service disk.
//!
//! The edge GU is the one farthest from the disk centre. Its radius has CDF
//! `exp(-pi*lambda*(R0^2 - r^2))`; the mass `exp(-pi*lambda*R0^2)` at the
//! bottom of the range is the empty realization, which carries zero rate.
//! All rates returned here are unconditional expectations under that
//! convention.

use std::f64::consts::{LOG2_E, PI};

use crate::channel::{a2g_gain, los_probability, rate_lower_bound};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureSpec};
use crate::scenario::Scenario;

fn check_radius(op: &'static str, r: f64, r0: f64) -> Result<()> {
    if r >= 0.0 && r <= r0 {
        Ok(())
    } else {
        Err(Error::domain(op, format!("radius {r} outside [0, {r0}]")))
    }
}

/// `P(R_edge <= r)`, including the empty-realization atom.
pub fn edge_cdf(r: f64, lambda_g: f64, r0: f64) -> Result<f64> {
    check_radius("edge_cdf", r, r0)?;
    Ok((-PI * lambda_g * (r0 * r0 - r * r)).exp())
}

/// Density of `R_edge` on `[0, r0]`. Integrates to `1 - exp(-pi*lambda*r0^2)`.
pub fn edge_pdf(r: f64, lambda_g: f64, r0: f64) -> Result<f64> {
    check_radius("edge_pdf", r, r0)?;
    Ok(pdf(r, lambda_g, r0))
}

#[inline]
fn pdf(r: f64, lambda_g: f64, r0: f64) -> f64 {
    (-PI * lambda_g * (r0 * r0 - r * r)).exp() * 2.0 * PI * lambda_g * r
}

/// Altitude-dependent factors of the edge-rate upper bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LosMoments {
    /// LoS-weighted edge-radius mass, `E[P_L(R_edge)]`.
    pub mu: f64,
    /// SNR per transmit watt averaged under the LoS-tilted edge density.
    pub y: f64,
}

impl LosMoments {
    /// `mu * B * log2(1 + p_u * y)`.
    #[inline]
    pub fn upper_rate(&self, p_u: f64, bandwidth_rf: f64) -> f64 {
        self.mu * bandwidth_rf * (p_u * self.y).ln_1p() * LOG2_E
    }
}

pub fn los_moments(h_u: f64, s: &Scenario, quad: &QuadratureSpec) -> Result<LosMoments> {
    check_altitude("los_moments", h_u)?;
    let (lambda, r0) = (s.geom.lambda_g, s.geom.r0);
    let mu = integrate(|r| los_probability(r, h_u, &s.env) * pdf(r, lambda, r0), 0.0, r0, quad)?.value;
    assert!(mu > 0.0, "LoS-weighted mass must be positive (P_L > 0)");
    let weighted_gain = integrate(
        |r| los_probability(r, h_u, &s.env) * a2g_gain(r, h_u, true, &s.env) * pdf(r, lambda, r0),
        0.0,
        r0,
        quad,
    )?
    .value;
    Ok(LosMoments {
        mu,
        y: weighted_gain / (mu * s.env.noise_los),
    })
}

fn check_altitude(op: &'static str, h_u: f64) -> Result<()> {
    if h_u > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(op, format!("altitude must be > 0 (got {h_u})")))
    }
}

fn check_power(op: &'static str, p_u: f64) -> Result<()> {
    if p_u >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(op, format!("transmit power must be >= 0 (got {p_u})")))
    }
}

/// Expected LoS-branch rate of the edge GU, bits/s, with its quadrature
/// error estimate.
pub fn edge_rate_exact(p_u: f64, h_u: f64, s: &Scenario, quad: &QuadratureSpec) -> Result<(f64, f64)> {
    check_power("edge_rate", p_u)?;
    check_altitude("edge_rate", h_u)?;
    let (lambda, r0) = (s.geom.lambda_g, s.geom.r0);
    let i = integrate(|r| rate_lower_bound(r, h_u, p_u, s) * pdf(r, lambda, r0), 0.0, r0, quad)?;
    Ok((i.value, i.error_estimate))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeRateResult {
    /// Expected edge rate, bits/s.
    pub c_edge: f64,
    pub c_edge_error: f64,
    /// Upper-bound edge rate `mu * B * log2(1 + p_u * y)`, bits/s.
    pub c_edge_upper: f64,
    pub mu_factor: f64,
    pub y_factor: f64,
    /// Whether `h_u > sqrt(alpha_L + 1) * R0`, the regime where the
    /// upper bound is guaranteed.
    pub bound_valid: bool,
}

pub fn edge_rate(p_u: f64, h_u: f64, s: &Scenario, quad: &QuadratureSpec) -> Result<EdgeRateResult> {
    let (c_edge, c_edge_error) = edge_rate_exact(p_u, h_u, s, quad)?;
    let m = los_moments(h_u, s, quad)?;
    Ok(EdgeRateResult {
        c_edge,
        c_edge_error,
        c_edge_upper: m.upper_rate(p_u, s.rf.bandwidth_rf),
        mu_factor: m.mu,
        y_factor: m.y,
        bound_valid: h_u > (s.env.alpha_los + 1.0).sqrt() * s.geom.r0,
    })
}

/// Time to deliver `file_bits` to every GU, seconds.
pub fn mission_time(file_bits: f64, c_edge: f64) -> Result<f64> {
    if !(file_bits > 0.0) {
        return Err(Error::domain(
            "mission_time",
            format!("file size must be > 0 (got {file_bits})"),
        ));
    }
    if !(c_edge > 0.0) {
        return Err(Error::InfeasibleCoverage);
    }
    Ok(file_bits / c_edge)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn quad() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn cdf_endpoints() {
        assert_eq!(edge_cdf(50.0, 1e-3, 50.0).unwrap(), 1.0);
        let at_zero = edge_cdf(0.0, 1e-3, 50.0).unwrap();
        // exp(-pi * 1e-3 * 2500)
        assert!((at_zero - 3.8820320392676604e-4).abs() < 1e-16, "{at_zero}");
        assert!(edge_cdf(25.0, 1e3, 50.0).unwrap() < 1e-300);
        assert!(edge_cdf(-1.0, 1e-3, 50.0).is_err());
        assert!(edge_cdf(50.5, 1e-3, 50.0).is_err());
        assert_eq!(edge_pdf(0.0, 1e-3, 50.0).unwrap(), 0.0);
        assert!(edge_pdf(51.0, 1e-3, 50.0).is_err());
    }

    #[test]
    fn pdf_integrates_to_one_minus_empty_atom() {
        for &lambda in &[1e-4, 1e-3, 1e-2] {
            let i = integrate(|r| pdf(r, lambda, 50.0), 0.0, 50.0, &quad()).unwrap();
            let closed = 1.0 - (-PI * lambda * 2500.0).exp();
            assert!((i.value - closed).abs() <= 1e-9 * closed);
            let ftc = edge_cdf(50.0, lambda, 50.0).unwrap() - edge_cdf(0.0, lambda, 50.0).unwrap();
            assert!((i.value - ftc).abs() <= 1e-9 * ftc);
        }
    }

    #[test]
    fn pdf_is_derivative_of_cdf() {
        let (lambda, r0) = (1e-3, 50.0);
        for i in 1..50 {
            let r = i as f64;
            let h = 1e-4;
            let fd = (edge_cdf(r + h, lambda, r0).unwrap() - edge_cdf(r - h, lambda, r0).unwrap()) / (2.0 * h);
            let exact = edge_pdf(r, lambda, r0).unwrap();
            assert!((fd - exact).abs() <= 1e-6 * exact, "r = {r}: {fd} vs {exact}");
        }
    }

    #[test]
    fn zero_power_zero_rates() {
        let s = Scenario::default();
        let e = edge_rate(0.0, 100.0, &s, &quad()).unwrap();
        assert_eq!(e.c_edge, 0.0);
        assert_eq!(e.c_edge_upper, 0.0);
        assert!(e.mu_factor > 0.0 && e.y_factor > 0.0);
    }

    #[test]
    fn upper_bound_holds_in_valid_regime() {
        let s = Scenario::default();
        let e = edge_rate(0.2, 200.0, &s, &quad()).unwrap();
        assert!(e.bound_valid);
        assert!(e.c_edge <= e.c_edge_upper);
        assert!(!edge_rate(0.2, 100.0, &s, &quad()).unwrap().bound_valid);
    }

    #[test]
    fn rejects_bad_arguments() {
        let s = Scenario::default();
        assert!(edge_rate(-0.1, 100.0, &s, &quad()).is_err());
        assert!(edge_rate(0.1, 0.0, &s, &quad()).is_err());
    }

    #[test]
    fn edge_rate_decreases_with_density() {
        let mut s = Scenario::default();
        let mut prev = f64::INFINITY;
        // 1e-3 .. 1e-1; below ~4e-4 the shrinking empty atom makes the
        // unconditional rate rise instead
        for k in 0..=20 {
            s.geom.lambda_g = 10f64.powf(-3.0 + k as f64 / 10.0);
            let c = edge_rate_exact(0.2, 100.0, &s, &quad()).unwrap().0;
            assert!(c < prev, "lambda = {}", s.geom.lambda_g);
            prev = c;
        }
        // conditioned on at least one GU the decrease holds over the whole range
        let mut prev = f64::INFINITY;
        for k in 0..=20 {
            s.geom.lambda_g = 10f64.powf(-4.0 + k as f64 / 10.0);
            let atom = edge_cdf(0.0, s.geom.lambda_g, s.geom.r0).unwrap();
            let c = edge_rate_exact(0.2, 100.0, &s, &quad()).unwrap().0 / (1.0 - atom);
            assert!(c < prev, "lambda = {}", s.geom.lambda_g);
            prev = c;
        }
    }

    #[test]
    fn halving_tolerance_moves_less_than_error_estimate() {
        let s = Scenario::default();
        let coarse = QuadratureSpec::new(1e-6, 1 << 14).unwrap();
        let fine = QuadratureSpec::new(5e-7, 1 << 14).unwrap();
        let (c1, e1) = edge_rate_exact(0.2, 120.0, &s, &coarse).unwrap();
        let (c2, _) = edge_rate_exact(0.2, 120.0, &s, &fine).unwrap();
        assert!((c1 - c2).abs() <= e1, "{c1} {c2} {e1}");
    }

    #[test]
    fn mission_time_examples() {
        assert_eq!(mission_time(1e9, 1e6).unwrap(), 1000.0);
        assert_eq!(mission_time(2e9, 1e6).unwrap(), 2.0 * mission_time(1e9, 1e6).unwrap());
        assert_eq!(mission_time(1e9, 0.0).unwrap_err(), Error::InfeasibleCoverage);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn cdf_nondecreasing(r in 0.0..50.0f64, dr in 0.0..10.0f64, lambda in 1e-5..1e-1f64) {
            let hi = (r + dr).min(50.0);
            prop_assert!(edge_cdf(hi, lambda, 50.0).unwrap() >= edge_cdf(r, lambda, 50.0).unwrap());
        }

        #[test]
        fn edge_rate_increases_with_power(p in 1e-3..1.0f64, dp in 1e-3..1.0f64, h in 60.0..600.0f64) {
            let s = Scenario::default();
            let a = edge_rate_exact(p, h, &s, &quad()).unwrap().0;
            let b = edge_rate_exact(p + dp, h, &s, &quad()).unwrap().0;
            prop_assert!(b > a);
        }
    }
}
