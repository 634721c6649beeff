//! Scenario parameter records and the config-file loader.
//!
//! Everything is stored in SI units (W, Hz, m, bit/s). The loader accepts a
//! few suffixed keys (`beta_db`, `*_mw`) and converts them once on ingestion.
//!
//! Config files are flat INI-style documents with four sections:
//!
//! ```text
//! [environment]
//! profile = "high-rise-urban"   # or "dense-urban"; sets a and b
//! alpha_los = 3.0
//! noise_los_mw = 1e-6
//!
//! [rf]
//! bandwidth_rf = 2e7
//! p_max_mw = 200
//!
//! [fso]
//! beta_db = 15
//!
//! [geometry]
//! h_max = 600
//! ```
//!
//! Missing keys fall back to [`Scenario::default`].

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Lower bound on the FSO SNR-loss factor: the IM/DD capacity lower bound
/// corresponds to `beta = 2*pi/e`.
pub const BETA_MIN: f64 = 2.0 * std::f64::consts::PI / std::f64::consts::E;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentParams {
    /// LoS-probability model constant.
    pub a: f64,
    /// LoS-probability model constant, per degree.
    pub b: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    /// Noise power at a GU over a LoS link, W.
    pub noise_los: f64,
    /// Noise power at a GU over an NLoS link, W.
    pub noise_nlos: f64,
}

impl EnvironmentParams {
    /// High-rise urban LoS constants with the path-loss exponents and noise
    /// levels of the reference scenario.
    pub fn high_rise_urban() -> Self {
        Self {
            a: 27.23,
            b: 0.08,
            alpha_los: 3.0,
            alpha_nlos: 5.0,
            noise_los: 1e-9,
            noise_nlos: 0.8e-9,
        }
    }

    pub fn dense_urban() -> Self {
        Self {
            a: 12.08,
            b: 0.11,
            ..Self::high_rise_urban()
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("environment.a", self.a)?;
        positive("environment.b", self.b)?;
        if !(self.alpha_los >= 2.0) {
            return Err(Error::invalid(
                "environment.alpha_los",
                format!("must be >= 2 (got {})", self.alpha_los),
            ));
        }
        if !(self.alpha_nlos > self.alpha_los) {
            return Err(Error::invalid(
                "environment.alpha_nlos",
                format!(
                    "must exceed environment.alpha_los = {} (got {})",
                    self.alpha_los, self.alpha_nlos
                ),
            ));
        }
        positive("environment.noise_los", self.noise_los)?;
        positive("environment.noise_nlos", self.noise_nlos)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfLinkParams {
    /// RF bandwidth, Hz.
    pub bandwidth_rf: f64,
    /// Maximum UAV transmit power, W.
    pub p_max: f64,
    /// Size of the common multicast file, bits.
    pub file_bits: f64,
}

impl Default for RfLinkParams {
    fn default() -> Self {
        Self {
            bandwidth_rf: 2e7,
            p_max: 0.2,
            file_bits: 1e9,
        }
    }
}

impl RfLinkParams {
    pub fn validate(&self) -> Result<()> {
        positive("rf.bandwidth_rf", self.bandwidth_rf)?;
        positive("rf.p_max", self.p_max)?;
        positive("rf.file_bits", self.file_bits)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FsoLinkParams {
    /// FSO bandwidth, Hz.
    pub bandwidth_fso: f64,
    /// Implementation SNR-loss factor (linear).
    pub beta_loss: f64,
    /// Weather attenuation coefficient, 1/m.
    pub kappa: f64,
    /// Full transmit divergence angle, rad.
    pub theta_t: f64,
    /// Receiver aperture diameter, m.
    pub d_r: f64,
    /// Receiver responsivity times the average geometric/misalignment loss.
    pub tau_combined: f64,
    /// Power-harvesting efficiency.
    pub eta: f64,
    /// Noise power at the UAV's optical receiver, W.
    pub noise_uav: f64,
}

impl Default for FsoLinkParams {
    fn default() -> Self {
        Self {
            bandwidth_fso: 1e8,
            beta_loss: db_to_linear(15.0),
            kappa: 4.3e-4,
            theta_t: 0.06,
            d_r: 0.2,
            tau_combined: 0.9,
            eta: 0.2,
            noise_uav: 1e-9,
        }
    }
}

impl FsoLinkParams {
    pub fn validate(&self) -> Result<()> {
        positive("fso.bandwidth_fso", self.bandwidth_fso)?;
        if !(self.beta_loss >= BETA_MIN) {
            return Err(Error::invalid(
                "fso.beta_loss",
                format!("must be >= 2*pi/e = {BETA_MIN:.6} (got {})", self.beta_loss),
            ));
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::invalid(
                "fso.kappa",
                format!("must be >= 0 (got {})", self.kappa),
            ));
        }
        positive("fso.theta_t", self.theta_t)?;
        positive("fso.d_r", self.d_r)?;
        open_unit("fso.tau_combined", self.tau_combined)?;
        open_unit("fso.eta", self.eta)?;
        positive("fso.noise_uav", self.noise_uav)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryParams {
    /// OBS altitude, m. Also the lowest admissible UAV altitude.
    pub h0: f64,
    /// Highest admissible UAV altitude, m.
    pub h_max: f64,
    /// Horizontal OBS-to-UAV offset, m.
    pub l0: f64,
    /// Service-disk radius, m.
    pub r0: f64,
    /// GU density, 1/m^2.
    pub lambda_g: f64,
    /// Hovering propulsion power, W.
    pub p_hov: f64,
}

impl Default for GeometryParams {
    fn default() -> Self {
        Self {
            h0: 60.0,
            h_max: 200.0,
            l0: 150.0,
            r0: 50.0,
            lambda_g: 1e-3,
            p_hov: 1000.0,
        }
    }
}

impl GeometryParams {
    pub fn validate(&self) -> Result<()> {
        positive("geometry.h0", self.h0)?;
        if !(self.h0 < self.h_max) {
            return Err(Error::invalid(
                "geometry.h0",
                format!("geometry.h0 = {} must be < geometry.h_max = {}", self.h0, self.h_max),
            ));
        }
        if !(self.l0 >= 0.0) {
            return Err(Error::invalid("geometry.l0", format!("must be >= 0 (got {})", self.l0)));
        }
        positive("geometry.r0", self.r0)?;
        positive("geometry.lambda_g", self.lambda_g)?;
        positive("geometry.p_hov", self.p_hov)
    }
}

/// Full parameter record of one system configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub env: EnvironmentParams,
    pub rf: RfLinkParams,
    pub fso: FsoLinkParams,
    pub geom: GeometryParams,
}

impl Default for Scenario {
    /// Reference scenario: high-rise urban, `H_0 = 60 m`, `H_max = 200 m`,
    /// `R_0 = 50 m`, `P_hov = 1 kW`, `P_max = 200 mW`, `B = 20 MHz`.
    fn default() -> Self {
        Self {
            env: EnvironmentParams::high_rise_urban(),
            rf: RfLinkParams::default(),
            fso: FsoLinkParams::default(),
            geom: GeometryParams::default(),
        }
    }
}

impl Scenario {
    pub fn new(env: EnvironmentParams, rf: RfLinkParams, fso: FsoLinkParams, geom: GeometryParams) -> Result<Self> {
        Self { env, rf, fso, geom }.validated()
    }

    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.rf.validate()?;
        self.fso.validate()?;
        self.geom.validate()?;
        if !(self.fso.bandwidth_fso > self.rf.bandwidth_rf) {
            return Err(Error::invalid(
                "fso.bandwidth_fso",
                format!(
                    "fso.bandwidth_fso = {} must exceed rf.bandwidth_rf = {}",
                    self.fso.bandwidth_fso, self.rf.bandwidth_rf
                ),
            ));
        }
        Ok(())
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn from_config_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        raw.into_scenario()
    }

    pub fn from_config_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_config_str(&text)
    }

    /// Config text that reloads to exactly this scenario.
    pub fn to_config_string(&self) -> String {
        toml::to_string(&CanonicalConfig::from(self)).expect("scenario serializes")
    }

    /// First 16 hex digits of the SHA-256 of the canonical config text.
    pub fn hash_hex(&self) -> String {
        let digest = Sha256::digest(self.to_config_string().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be > 0 (got {v})")))
    }
}

fn open_unit(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must lie in (0, 1) (got {v})")))
    }
}

#[derive(Serialize)]
struct CanonicalConfig {
    environment: EnvironmentParams,
    rf: RfLinkParams,
    fso: FsoLinkParams,
    geometry: GeometryParams,
}

impl From<&Scenario> for CanonicalConfig {
    fn from(s: &Scenario) -> Self {
        Self {
            environment: s.env,
            rf: s.rf,
            fso: s.fso,
            geometry: s.geom,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    environment: Option<RawEnvironment>,
    rf: Option<RawRf>,
    fso: Option<RawFso>,
    geometry: Option<RawGeometry>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnvironment {
    profile: Option<String>,
    a: Option<f64>,
    b: Option<f64>,
    alpha_los: Option<f64>,
    alpha_nlos: Option<f64>,
    noise_los: Option<f64>,
    noise_los_mw: Option<f64>,
    noise_nlos: Option<f64>,
    noise_nlos_mw: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRf {
    bandwidth_rf: Option<f64>,
    p_max: Option<f64>,
    p_max_mw: Option<f64>,
    file_bits: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFso {
    bandwidth_fso: Option<f64>,
    beta_loss: Option<f64>,
    beta_db: Option<f64>,
    kappa: Option<f64>,
    theta_t: Option<f64>,
    d_r: Option<f64>,
    tau_combined: Option<f64>,
    eta: Option<f64>,
    noise_uav: Option<f64>,
    noise_uav_mw: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    h0: Option<f64>,
    h_max: Option<f64>,
    l0: Option<f64>,
    r0: Option<f64>,
    lambda_g: Option<f64>,
    p_hov: Option<f64>,
}

/// Picks between a SI key and its alternative-unit twin; both set is an error.
fn either(
    field: &str,
    si: Option<f64>,
    alt_field: &str,
    alt: Option<f64>,
    convert: impl Fn(f64) -> f64,
) -> Result<Option<f64>> {
    match (si, alt) {
        (Some(_), Some(_)) => Err(Error::invalid(
            field,
            format!("`{field}` and `{alt_field}` are mutually exclusive"),
        )),
        (Some(v), None) => Ok(Some(v)),
        (None, Some(v)) => Ok(Some(convert(v))),
        (None, None) => Ok(None),
    }
}

fn mw(v: f64) -> f64 {
    v * 1e-3
}

impl RawConfig {
    fn into_scenario(self) -> Result<Scenario> {
        let mut s = Scenario::default();

        let env = self.environment.unwrap_or_default();
        if let Some(profile) = env.profile.as_deref() {
            s.env = match profile {
                "high-rise-urban" => EnvironmentParams::high_rise_urban(),
                "dense-urban" => EnvironmentParams::dense_urban(),
                other => {
                    return Err(Error::invalid(
                        "environment.profile",
                        format!("unknown profile `{other}` (expected high-rise-urban or dense-urban)"),
                    ))
                }
            };
        }
        set(&mut s.env.a, env.a);
        set(&mut s.env.b, env.b);
        set(&mut s.env.alpha_los, env.alpha_los);
        set(&mut s.env.alpha_nlos, env.alpha_nlos);
        set(
            &mut s.env.noise_los,
            either(
                "environment.noise_los",
                env.noise_los,
                "noise_los_mw",
                env.noise_los_mw,
                mw,
            )?,
        );
        set(
            &mut s.env.noise_nlos,
            either(
                "environment.noise_nlos",
                env.noise_nlos,
                "noise_nlos_mw",
                env.noise_nlos_mw,
                mw,
            )?,
        );

        let rf = self.rf.unwrap_or_default();
        set(&mut s.rf.bandwidth_rf, rf.bandwidth_rf);
        set(
            &mut s.rf.p_max,
            either("rf.p_max", rf.p_max, "p_max_mw", rf.p_max_mw, mw)?,
        );
        set(&mut s.rf.file_bits, rf.file_bits);

        let fso = self.fso.unwrap_or_default();
        set(&mut s.fso.bandwidth_fso, fso.bandwidth_fso);
        set(
            &mut s.fso.beta_loss,
            either("fso.beta_loss", fso.beta_loss, "beta_db", fso.beta_db, db_to_linear)?,
        );
        set(&mut s.fso.kappa, fso.kappa);
        set(&mut s.fso.theta_t, fso.theta_t);
        set(&mut s.fso.d_r, fso.d_r);
        set(&mut s.fso.tau_combined, fso.tau_combined);
        set(&mut s.fso.eta, fso.eta);
        set(
            &mut s.fso.noise_uav,
            either("fso.noise_uav", fso.noise_uav, "noise_uav_mw", fso.noise_uav_mw, mw)?,
        );

        let g = self.geometry.unwrap_or_default();
        set(&mut s.geom.h0, g.h0);
        set(&mut s.geom.h_max, g.h_max);
        set(&mut s.geom.l0, g.l0);
        set(&mut s.geom.r0, g.r0);
        set(&mut s.geom.lambda_g, g.lambda_g);
        set(&mut s.geom.p_hov, g.p_hov);

        s.validated()
    }
}

fn set(slot: &mut f64, value: Option<f64>) {
    if let Some(v) = value {
        *slot = v;
    }
}
