//! Text and CSV serialization.
//!
//! Numbers are printed with 12 significant digits. Every document starts
//! with one `#` metadata line.

use std::fmt::Write as _;

use crate::optimizer::{AuxiliaryAltitudes, SolutionReport};
use crate::sweep::{RateGapRow, SweepRow, SweepTable};
use crate::validate::ValidationCheck;

const SIGNIFICANT: usize = 12;

/// `%.12g`-style formatting: fixed notation for exponents in `[-5, 12)`,
/// scientific otherwise, trailing zeros trimmed.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    // the exponent after rounding, e.g. 9.9999999999996 rounds to 10
    let sci = format!("{:.*e}", SIGNIFICANT - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIGNIFICANT as i32).contains(&exp) {
        let decimals = (SIGNIFICANT as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Provenance carried in the `#` line.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetadata {
    pub tool: String,
    pub version: String,
    pub scenario_hash: String,
    pub seed: Option<u64>,
    pub delta: Option<f64>,
    pub rng: Option<String>,
    pub extra: Vec<(String, String)>,
}

impl RunMetadata {
    pub fn new(tool: &str, version: &str, scenario_hash: String) -> Self {
        Self {
            tool: tool.into(),
            version: version.into(),
            scenario_hash,
            seed: None,
            delta: None,
            rng: None,
            extra: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<String>) -> Self {
        self.extra.push((key.into(), value.into()));
        self
    }

    pub fn line(&self) -> String {
        let mut out = format!("# {} {} scenario={}", self.tool, self.version, self.scenario_hash);
        match self.seed {
            Some(s) => write!(out, " seed={s}").unwrap(),
            None => out.push_str(" seed=none"),
        }
        match self.delta {
            Some(d) => write!(out, " delta={}", fmt_num(d)).unwrap(),
            None => out.push_str(" delta=none"),
        }
        if let Some(rng) = &self.rng {
            write!(out, " rng=\"{rng}\"").unwrap();
        }
        for (k, v) in &self.extra {
            write!(out, " {k}={v}").unwrap();
        }
        out
    }
}

fn csv_row(cells: impl IntoIterator<Item = f64>) -> String {
    cells.into_iter().map(fmt_num).collect::<Vec<_>>().join(",")
}

pub fn sweep_csv(table: &SweepTable, meta: &RunMetadata) -> String {
    let mut out = meta.clone().with("swept", table.swept_name.clone()).line();
    out.push('\n');
    out.push_str(&SweepRow::COLUMNS.join(","));
    out.push('\n');
    for row in &table.rows {
        out.push_str(&csv_row(row.cells()));
        out.push('\n');
    }
    out
}

pub fn rate_gap_csv(rows: &[RateGapRow], meta: &RunMetadata) -> String {
    let mut out = meta.line();
    out.push('\n');
    out.push_str(&RateGapRow::COLUMNS.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&csv_row(row.cells()));
        out.push('\n');
    }
    out
}

pub const VALIDATION_COLUMNS: [&str; 5] = ["check", "expected", "observed", "tolerance", "pass"];

pub fn validation_csv(checks: &[ValidationCheck], meta: &RunMetadata) -> String {
    let mut out = meta.line();
    out.push('\n');
    out.push_str(&VALIDATION_COLUMNS.join(","));
    out.push('\n');
    for c in checks {
        writeln!(
            out,
            "{},{},{},{},{}",
            c.name,
            fmt_num(c.expected),
            fmt_num(c.observed),
            fmt_num(c.tolerance),
            c.pass
        )
        .unwrap();
    }
    out
}

pub const SOLUTION_COLUMNS: [&str; 14] = [
    "p_f",
    "rho",
    "h_u",
    "p_u",
    "ee_system",
    "ee_u",
    "ee_u_tilde",
    "c_edge",
    "q_i",
    "q_e",
    "fbr_slack",
    "fph_slack",
    "snr_fso",
    "delta",
];

fn solution_cells(r: &SolutionReport) -> [f64; 14] {
    [
        r.design.p_f,
        r.design.rho,
        r.design.h_u,
        r.design.p_u,
        r.ee_system,
        r.ee_u_exact,
        r.ee_u_tilde,
        r.c_edge,
        r.q.q_i,
        r.q.q_e,
        r.fbr_slack,
        r.fph_slack,
        r.snr_fso,
        r.delta,
    ]
}

pub fn solution_csv(r: &SolutionReport, meta: &RunMetadata) -> String {
    format!(
        "{}\n{}\n{}\n",
        meta.line(),
        SOLUTION_COLUMNS.join(","),
        csv_row(solution_cells(r))
    )
}

/// Human-readable summary for the terminal.
pub fn solution_text(r: &SolutionReport, aux: Option<&AuxiliaryAltitudes>, meta: &RunMetadata) -> String {
    let mut out = meta.line();
    out.push('\n');
    let rows: [(&str, f64, &str); 13] = [
        ("P_F", r.design.p_f, "W"),
        ("rho", r.design.rho, ""),
        ("H_U", r.design.h_u, "m"),
        ("P_U", r.design.p_u, "W"),
        ("EE_S", r.ee_system, "bit/J"),
        ("EE_U (surrogate)", r.ee_u_tilde, "bit/J"),
        ("C_edge", r.c_edge, "bit/s"),
        ("Q_I", r.q.q_i, "W"),
        ("Q_E", r.q.q_e, "W"),
        ("FBR slack", r.fbr_slack, "bit/s"),
        ("FPH slack", r.fph_slack, "W"),
        ("FSO SNR", r.snr_fso, ""),
        ("altitudes searched", r.altitude_profile.len() as f64, ""),
    ];
    for (name, v, unit) in rows {
        writeln!(out, "{name:<20} {} {unit}", fmt_num(v)).unwrap();
    }
    if let Some(a) = aux {
        writeln!(out, "{:<20} {} m", "H_PH (max omega)", fmt_num(a.h_ph)).unwrap();
        writeln!(out, "{:<20} {} m", "H_PH (max P_rec)", fmt_num(a.h_ph_optimized)).unwrap();
        writeln!(out, "{:<20} {} m", "H_MC", fmt_num(a.h_mc)).unwrap();
    }
    out.lines().map(|l| l.trim_end().to_string() + "\n").collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(-2.5), "-2.5");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(2e7), "20000000");
        assert_eq!(fmt_num(123456789012345.0), "1.23456789012e14");
        assert_eq!(fmt_num(4.378924748123456e-4), "0.000437892474812");
        assert_eq!(fmt_num(9.1172e-7), "9.1172e-7");
        assert_eq!(fmt_num(9.99999999999996), "10");
        assert_eq!(fmt_num(f64::NAN), "nan");
    }

    #[test]
    fn formatted_values_parse_back_close() {
        for &x in &[std::f64::consts::PI, 1.2345e-13, 6.02214076e23, -7.0e-5, 0.1 + 0.2] {
            let back: f64 = fmt_num(x).parse().unwrap();
            assert!((back - x).abs() <= 5e-12 * x.abs(), "{x} -> {}", fmt_num(x));
        }
    }

    #[test]
    fn metadata_line() {
        let mut m = RunMetadata::new("fsomc", "0.1.0", "abcd".into());
        assert_eq!(m.line(), "# fsomc 0.1.0 scenario=abcd seed=none delta=none");
        m.seed = Some(42);
        m.delta = Some(0.5);
        let line = m.with("preset", "fig5").line();
        assert_eq!(line, "# fsomc 0.1.0 scenario=abcd seed=42 delta=0.5 preset=fig5");
    }

    #[test]
    fn sweep_header_is_stable() {
        let t = SweepTable {
            swept_name: "p_hov".into(),
            rows: vec![],
        };
        let csv = sweep_csv(&t, &RunMetadata::new("t", "0", "h".into()));
        let header = csv.lines().nth(1).unwrap();
        assert_eq!(
            header,
            "value,ee_system,ee_u,ee_u_tilde,c_edge,p_f,rho,h_u,p_u,q_i,q_e,snr_fso"
        );
        assert!(csv.starts_with('#'));
    }
}
