use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use fsomc_core::optimizer::{auxiliary_altitudes_from_profile, exact_profile, solve_with};
use fsomc_core::oracle::RNG_ALGORITHM;
use fsomc_core::report::{fmt_num, rate_gap_csv, solution_csv, solution_text, sweep_csv, validation_csv, RunMetadata};
use fsomc_core::sweep::{linear_values, log_values, sweep, Preset, PresetTable};
use fsomc_core::validate::{run_suite, SuiteOptions};
use fsomc_core::{QuadratureSpec, Scenario, SweepParameter};

const TOOL: &str = "fsomc";

/// Energy-efficiency optimizer for an FSO-powered, FSO-backhauled UAV
/// multicasting to a Poisson field of ground users.
#[derive(Parser, Debug)]
#[command(name = TOOL, version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimize (P_F, rho, H_U, P_U) for one scenario.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Also list the reference altitudes H_PH and H_MC (one more pass over the grid).
        #[arg(long)]
        aux: bool,
    },
    /// Sweep one parameter, or run a figure preset, and emit CSV.
    Sweep(SweepArgs),
    /// Run the property and oracle checks; exits 1 if any check fails.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Monte Carlo drops per check (at least 1000).
        #[arg(long, default_value_t = 100_000)]
        drops: usize,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Scenario file; built-in defaults when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Altitude grid step, meters.
    #[arg(long, value_name = "METERS", default_value_t = 1.0)]
    delta: f64,
    /// Output file (a directory for multi-table presets); stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// fig2, fig3, fig4 or fig5.
    #[arg(long, value_name = "NAME", conflicts_with_all = ["param", "range"])]
    preset: Option<String>,
    /// h_u, lambda_g, p_hov, r0 or p_u.
    #[arg(long, value_name = "NAME", requires = "range")]
    param: Option<String>,
    /// Inclusive range as LO:HI.
    #[arg(long, value_name = "LO:HI")]
    range: Option<String>,
    #[arg(long, default_value_t = 21)]
    steps: usize,
    /// Space the values geometrically.
    #[arg(long)]
    log: bool,
}

fn load(common: &Common) -> Result<Scenario> {
    let s = match &common.config {
        Some(path) => Scenario::from_config_path(path)?,
        None => Scenario::default(),
    };
    if !(common.delta > 0.0 && common.delta.is_finite()) {
        bail!("--delta must be > 0 (got {})", common.delta);
    }
    Ok(s)
}

fn metadata(s: &Scenario, delta: f64) -> RunMetadata {
    let mut m = RunMetadata::new(TOOL, env!("CARGO_PKG_VERSION"), s.hash_hex());
    m.delta = Some(delta);
    m
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn parse_range(text: &str) -> Result<(f64, f64)> {
    let (lo, hi) = text
        .split_once(':')
        .with_context(|| format!("range `{text}` must look like LO:HI"))?;
    let lo: f64 = lo.trim().parse().with_context(|| format!("bad range start `{lo}`"))?;
    let hi: f64 = hi.trim().parse().with_context(|| format!("bad range end `{hi}`"))?;
    Ok((lo, hi))
}

fn cmd_solve(common: &Common, aux: bool) -> Result<ExitCode> {
    let s = load(common)?;
    let quad = QuadratureSpec::default();
    let report = solve_with(&s, common.delta, &quad)?;
    let aux = if aux {
        Some(auxiliary_altitudes_from_profile(&exact_profile(
            &s,
            common.delta,
            &quad,
        )?))
    } else {
        None
    };
    let meta = metadata(&s, common.delta);
    match &common.out {
        Some(path) => {
            emit(Some(path), &solution_csv(&report, &meta))?;
            emit(None, &solution_text(&report, aux.as_ref(), &meta))?;
        }
        None => emit(None, &solution_text(&report, aux.as_ref(), &meta))?,
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(args: &SweepArgs) -> Result<ExitCode> {
    let s = load(&args.common)?;
    let quad = QuadratureSpec::default();
    let delta = args.common.delta;

    if let Some(name) = &args.preset {
        let preset: Preset = name.parse()?;
        let outputs = preset.run(&s, delta, &quad)?;
        if let Some(dir) = &args.common.out {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        for o in &outputs {
            let meta = metadata(&o.scenario, delta).with("preset", o.label.clone());
            let text = match &o.table {
                PresetTable::Sweep(t) => sweep_csv(t, &meta),
                PresetTable::RateGap(rows) => rate_gap_csv(rows, &meta),
            };
            let path = args.common.out.as_ref().map(|d| d.join(format!("{}.csv", o.label)));
            emit(path.as_deref(), &text)?;
        }
        return Ok(ExitCode::SUCCESS);
    }

    let (Some(param), Some(range)) = (&args.param, &args.range) else {
        bail!("sweep needs either --preset or --param with --range");
    };
    let param: SweepParameter = param.parse()?;
    let (lo, hi) = parse_range(range)?;
    let values = if args.log {
        log_values(lo, hi, args.steps)?
    } else {
        linear_values(lo, hi, args.steps)?
    };
    let table = sweep(&s, param, &values, delta, &quad)?;
    emit(args.common.out.as_deref(), &sweep_csv(&table, &metadata(&s, delta)))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(common: &Common, seed: u64, drops: usize) -> Result<ExitCode> {
    let s = load(common)?;
    let opts = SuiteOptions {
        seed,
        n_drops: drops,
        delta: common.delta,
        ..SuiteOptions::default()
    };
    let checks = run_suite(&s, &opts, &QuadratureSpec::default())?;
    let mut meta = metadata(&s, common.delta).with("drops", drops.to_string());
    meta.seed = Some(seed);
    meta.rng = Some(RNG_ALGORITHM.to_string());
    emit(common.out.as_deref(), &validation_csv(&checks, &meta))?;

    let failed: Vec<_> = checks.iter().filter(|c| !c.pass).collect();
    eprintln!("{}/{} checks passed", checks.len() - failed.len(), checks.len());
    for c in &failed {
        eprintln!(
            "FAILED {}: observed {} (expected {}, tolerance {})",
            c.name,
            fmt_num(c.observed),
            fmt_num(c.expected),
            fmt_num(c.tolerance)
        );
    }
    Ok(if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve { common, aux } => cmd_solve(common, *aux),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Validate { common, seed, drops } => cmd_validate(common, *seed, *drops),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("1e-4:2e-2").unwrap(), (1e-4, 2e-2));
        assert_eq!(parse_range(" 60 : 200 ").unwrap(), (60.0, 200.0));
        assert!(parse_range("60-200").is_err());
        assert!(parse_range("a:1").is_err());
    }
}
