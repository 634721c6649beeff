//! One-parameter sweeps and the figure presets built on them.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::channel::{avg_rate, rate_lower_bound};
use crate::error::{Error, Result};
use crate::optimizer::{evaluate_design, solve_with, AltitudeModel, DesignEvaluation, SolutionReport};
use crate::quadrature::QuadratureSpec;
use crate::scenario::{EnvironmentParams, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepParameter {
    /// UAV altitude; power is set per altitude, FSO design in closed form.
    HU,
    LambdaG,
    PHov,
    R0,
    /// UAV power at the altitude chosen by the base solve.
    PU,
}

impl SweepParameter {
    pub const ALL: [SweepParameter; 5] = [Self::HU, Self::LambdaG, Self::PHov, Self::R0, Self::PU];

    pub fn name(self) -> &'static str {
        match self {
            Self::HU => "h_u",
            Self::LambdaG => "lambda_g",
            Self::PHov => "p_hov",
            Self::R0 => "r0",
            Self::PU => "p_u",
        }
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownParameter(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub ee_system: f64,
    pub ee_u: f64,
    pub ee_u_tilde: f64,
    pub c_edge: f64,
    pub p_f: f64,
    pub rho: f64,
    pub h_u: f64,
    pub p_u: f64,
    pub q_i: f64,
    pub q_e: f64,
    pub snr_fso: f64,
}

impl SweepRow {
    pub const COLUMNS: [&'static str; 12] = [
        "value",
        "ee_system",
        "ee_u",
        "ee_u_tilde",
        "c_edge",
        "p_f",
        "rho",
        "h_u",
        "p_u",
        "q_i",
        "q_e",
        "snr_fso",
    ];

    pub fn cells(&self) -> [f64; 12] {
        [
            self.value,
            self.ee_system,
            self.ee_u,
            self.ee_u_tilde,
            self.c_edge,
            self.p_f,
            self.rho,
            self.h_u,
            self.p_u,
            self.q_i,
            self.q_e,
            self.snr_fso,
        ]
    }

    fn from_evaluation(value: f64, e: &DesignEvaluation, ee_u_tilde: f64) -> Self {
        Self {
            value,
            ee_system: e.ee_system,
            ee_u: e.c_edge / (e.q.q_i + e.q.q_e),
            ee_u_tilde,
            c_edge: e.c_edge,
            p_f: e.design.p_f,
            rho: e.design.rho,
            h_u: e.design.h_u,
            p_u: e.design.p_u,
            q_i: e.q.q_i,
            q_e: e.q.q_e,
            snr_fso: e.snr_fso,
        }
    }

    fn from_report(value: f64, r: &SolutionReport) -> Self {
        Self {
            value,
            ee_system: r.ee_system,
            ee_u: r.ee_u_exact,
            ee_u_tilde: r.ee_u_tilde,
            c_edge: r.c_edge,
            p_f: r.design.p_f,
            rho: r.design.rho,
            h_u: r.design.h_u,
            p_u: r.design.p_u,
            q_i: r.q.q_i,
            q_e: r.q.q_e,
            snr_fso: r.snr_fso,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub swept_name: String,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn column(&self, index: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.cells()[index]).collect()
    }

    /// Row with the largest `ee_system`; the first one on ties.
    pub fn best_row(&self) -> Option<&SweepRow> {
        self.rows
            .iter()
            .reduce(|best, r| if r.ee_system > best.ee_system { r } else { best })
    }
}

pub fn linear_values(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>> {
    check_range(lo, hi, steps)?;
    if steps == 1 {
        return Ok(vec![lo]);
    }
    let dx = (hi - lo) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| if i + 1 == steps { hi } else { lo + dx * i as f64 })
        .collect())
}

/// Geometric grid; both ends must be positive.
pub fn log_values(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0) {
        return Err(Error::domain("log_values", format!("lower end must be > 0 (got {lo})")));
    }
    Ok(linear_values(lo.log10(), hi.log10(), steps)?
        .into_iter()
        .map(|e| 10f64.powf(e))
        .collect())
}

fn check_range(lo: f64, hi: f64, steps: usize) -> Result<()> {
    if steps == 0 {
        return Err(Error::domain("sweep range", "needs at least one step"));
    }
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::domain("sweep range", format!("invalid range [{lo}, {hi}]")));
    }
    Ok(())
}

fn with_value(base: &Scenario, param: SweepParameter, value: f64) -> Result<Scenario> {
    let mut s = *base;
    match param {
        SweepParameter::LambdaG => s.geom.lambda_g = value,
        SweepParameter::PHov => s.geom.p_hov = value,
        SweepParameter::R0 => s.geom.r0 = value,
        SweepParameter::HU | SweepParameter::PU => unreachable!("not a scenario field"),
    }
    s.validated()
}

/// Runs `param` over `values` (sorted ascending first). Scenario-level
/// parameters re-run the full solver per value.
pub fn sweep(
    base: &Scenario,
    param: SweepParameter,
    values: &[f64],
    delta: f64,
    quad: &QuadratureSpec,
) -> Result<SweepTable> {
    base.validate()?;
    let mut values = values.to_vec();
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::domain("sweep", format!("non-finite sweep value {bad}")));
    }
    values.sort_by(f64::total_cmp);

    let rows = match param {
        SweepParameter::HU => values
            .par_iter()
            .map(|&h| {
                let model = AltitudeModel::new(h, base, quad)?;
                let p = model.optimal_power()?;
                Ok(SweepRow::from_evaluation(
                    h,
                    &evaluate_design(p, h, base, quad)?,
                    model.ee_tilde(p),
                ))
            })
            .collect::<Result<Vec<_>>>()?,
        SweepParameter::PU => {
            let h = solve_with(base, delta, quad)?.design.h_u;
            let model = AltitudeModel::new(h, base, quad)?;
            values
                .par_iter()
                .map(|&p| {
                    Ok(SweepRow::from_evaluation(
                        p,
                        &evaluate_design(p, h, base, quad)?,
                        model.ee_tilde(p),
                    ))
                })
                .collect::<Result<Vec<_>>>()?
        }
        _ => values
            .iter()
            .map(|&v| {
                Ok(SweepRow::from_report(
                    v,
                    &solve_with(&with_value(base, param, v)?, delta, quad)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(SweepTable {
        swept_name: param.name().to_string(),
        rows,
    })
}

/// Lower-bound tightness at the disk edge, per altitude, for both
/// environments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateGapRow {
    pub h_u: f64,
    pub c_avg_high_rise: f64,
    pub c_low_high_rise: f64,
    pub gap_high_rise: f64,
    pub c_avg_dense: f64,
    pub c_low_dense: f64,
    pub gap_dense: f64,
}

impl RateGapRow {
    pub const COLUMNS: [&'static str; 7] = [
        "h_u",
        "c_avg_high_rise_urban",
        "c_low_high_rise_urban",
        "gap_high_rise_urban",
        "c_avg_dense_urban",
        "c_low_dense_urban",
        "gap_dense_urban",
    ];

    pub fn cells(&self) -> [f64; 7] {
        [
            self.h_u,
            self.c_avg_high_rise,
            self.c_low_high_rise,
            self.gap_high_rise,
            self.c_avg_dense,
            self.c_low_dense,
            self.gap_dense,
        ]
    }
}

/// Normalized gap `(C - C_low) / C` at `r = R0`, `P_U = P_max`. The
/// environment of `base` is replaced by each preset profile while its
/// exponents and noise levels are kept.
pub fn rate_gap_table(base: &Scenario, altitudes: &[f64]) -> Result<Vec<RateGapRow>> {
    base.validate()?;
    let with_env = |preset: EnvironmentParams| {
        let mut s = *base;
        s.env = EnvironmentParams {
            a: preset.a,
            b: preset.b,
            ..base.env
        };
        s
    };
    let (hr, du) = (
        with_env(EnvironmentParams::high_rise_urban()),
        with_env(EnvironmentParams::dense_urban()),
    );
    let (r, p) = (base.geom.r0, base.rf.p_max);
    altitudes
        .iter()
        .map(|&h| {
            if !(h > 0.0) {
                return Err(Error::domain(
                    "rate_gap_table",
                    format!("altitude must be > 0 (got {h})"),
                ));
            }
            let (avg_h, low_h) = (avg_rate(r, h, p, &hr), rate_lower_bound(r, h, p, &hr));
            let (avg_d, low_d) = (avg_rate(r, h, p, &du), rate_lower_bound(r, h, p, &du));
            Ok(RateGapRow {
                h_u: h,
                c_avg_high_rise: avg_h,
                c_low_high_rise: low_h,
                gap_high_rise: (avg_h - low_h) / avg_h,
                c_avg_dense: avg_d,
                c_low_dense: low_d,
                gap_dense: (avg_d - low_d) / avg_d,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig2" => Ok(Self::Fig2),
            "fig3" => Ok(Self::Fig3),
            "fig4" => Ok(Self::Fig4),
            "fig5" => Ok(Self::Fig5),
            other => Err(Error::Config(format!(
                "unknown preset `{other}` (expected fig2, fig3, fig4 or fig5)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PresetTable {
    Sweep(SweepTable),
    RateGap(Vec<RateGapRow>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PresetOutput {
    /// File-name friendly label, e.g. `fig4_r0_30`.
    pub label: String,
    pub scenario: Scenario,
    pub table: PresetTable,
}

pub const FIG4_LAMBDA_RANGE: (f64, f64) = (1e-4, 2e-2);
pub const FIG4_LAMBDA_STEPS: usize = 81;
pub const FIG4_RADII: [f64; 2] = [30.0, 50.0];

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Self::Fig2 => "fig2",
            Self::Fig3 => "fig3",
            Self::Fig4 => "fig4",
            Self::Fig5 => "fig5",
        }
    }

    /// Scenario the preset runs on: `base` with the figure's overrides.
    pub fn scenario(self, base: &Scenario) -> Result<Scenario> {
        let mut s = *base;
        s.geom.h0 = 60.0;
        s.rf.bandwidth_rf = 2e7;
        if self == Self::Fig3 {
            s.geom.h_max = 600.0;
        }
        s.validated()
    }

    pub fn run(self, base: &Scenario, delta: f64, quad: &QuadratureSpec) -> Result<Vec<PresetOutput>> {
        let s = self.scenario(base)?;
        let one = |table| {
            vec![PresetOutput {
                label: self.name().to_string(),
                scenario: s,
                table,
            }]
        };
        Ok(match self {
            Self::Fig2 => one(PresetTable::RateGap(rate_gap_table(
                &s,
                &linear_values(10.0, 200.0, 191)?,
            )?)),
            Self::Fig3 => {
                let grid = crate::optimizer::altitude_grid(&s.geom, delta)?;
                one(PresetTable::Sweep(sweep(&s, SweepParameter::HU, &grid, delta, quad)?))
            }
            Self::Fig4 => {
                let lambdas = log_values(FIG4_LAMBDA_RANGE.0, FIG4_LAMBDA_RANGE.1, FIG4_LAMBDA_STEPS)?;
                FIG4_RADII
                    .iter()
                    .map(|&r0| {
                        let mut sr = s;
                        sr.geom.r0 = r0;
                        let sr = sr.validated()?;
                        Ok(PresetOutput {
                            label: format!("fig4_r0_{r0}"),
                            scenario: sr,
                            table: PresetTable::Sweep(sweep(&sr, SweepParameter::LambdaG, &lambdas, delta, quad)?),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            Self::Fig5 => one(PresetTable::Sweep(sweep(
                &s,
                SweepParameter::PHov,
                &linear_values(100.0, 2000.0, 20)?,
                delta,
                quad,
            )?)),
        })
    }
}
