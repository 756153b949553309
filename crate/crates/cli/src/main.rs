//! darksim: trace-driven power-delivery and power-management simulator.
//!
//! Exit codes: 0 success, 1 model/output error, 2 usage error,
//! 3 assertion threshold failure (`--assert` on `compare`).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use darksim_core::config::PlatformConfig;
use darksim_core::pdn::SweepSpacing;
use darksim_core::pmu::PmuMode;
use darksim_core::report;
use darksim_core::sim::{
    self, compare_modes, gen_workload, tdp_sweep, GenParams, Trace, WorkloadKind, SPEC_SUITE,
};

#[derive(Parser)]
#[command(name = "darksim", version, about = "Power-delivery network and PMU firmware simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Normal,
    Bypass,
}

impl ModeArg {
    fn to_mode(self) -> PmuMode {
        match self {
            ModeArg::Normal => PmuMode::Normal,
            ModeArg::Bypass => PmuMode::Bypass,
        }
    }
}

#[derive(Args)]
struct CommonIo {
    /// Platform configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output path (written atomically).
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Override the configured TDP level (watts).
    #[arg(long)]
    tdp: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one trace in the platform's fused mode.
    Run {
        #[command(flatten)]
        io: CommonIo,
        /// Activity trace CSV.
        #[arg(long)]
        trace: PathBuf,
        /// Override the fused mode.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Run normal and bypass modes over the same trace and report deltas.
    Compare {
        #[command(flatten)]
        io: CommonIo,
        #[arg(long)]
        trace: PathBuf,
        /// Threshold assertions, e.g. `perf_delta_min=0.035`; failing any
        /// exits with status 3.
        #[arg(long = "assert")]
        assertions: Vec<String>,
    },
    /// Sweep TDP levels with the synthetic SPEC-like suite.
    Sweep {
        #[command(flatten)]
        io: CommonIo,
        /// Comma-separated TDP levels in watts.
        #[arg(long, default_value = "35,45,65,91")]
        tdp_levels: String,
    },
    /// Export an impedance-frequency profile of the configured network.
    Impedance {
        #[command(flatten)]
        io: CommonIo,
        /// Sweep as f_min:f_max:points (defaults to the config sweep).
        #[arg(long)]
        sweep: Option<String>,
        /// Which topology to sweep.
        #[arg(long, value_enum, default_value_t = ModeArg::Normal)]
        mode: ModeArg,
    },
    /// Generate a workload trace CSV.
    GenTrace {
        /// Workload kind: spec-base, spec-rate, graphics, energy-star, rmt.
        #[arg(long)]
        kind: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Number of cores to emit activity for.
        #[arg(long, default_value_t = 4)]
        cores: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(code) = check_inputs(&cli.command) {
        return code;
    }
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("darksim: {err}");
            ExitCode::from(1)
        }
    }
}

/// Input paths must be readable at invocation; anything else is a usage
/// error (exit 2), like a bad flag.
fn check_inputs(command: &Command) -> Option<ExitCode> {
    let mut paths: Vec<&Path> = Vec::new();
    match command {
        Command::Run { io, trace, .. } => {
            paths.push(&io.config);
            paths.push(trace);
        }
        Command::Compare { io, trace, .. } => {
            paths.push(&io.config);
            paths.push(trace);
        }
        Command::Sweep { io, .. } | Command::Impedance { io, .. } => paths.push(&io.config),
        Command::GenTrace { .. } => {}
    }
    for path in paths {
        if std::fs::metadata(path).is_err() {
            eprintln!("darksim: cannot read {}", path.display());
            return Some(ExitCode::from(2));
        }
    }
    None
}

fn log(msg: &str) {
    if std::env::var("DARKSIM_LOG").map(|v| !v.is_empty()).unwrap_or(false) {
        eprintln!("darksim: {msg}");
    }
}

fn dispatch(cli: Cli) -> darksim_core::Result<ExitCode> {
    match cli.command {
        Command::Run { io, trace, mode } => {
            let cfg = load_config(&io)?;
            let trace = Trace::from_csv(&std::fs::read_to_string(&trace)?)?;
            let resolution = cfg.resolve_mode();
            if resolution.segment_mismatch {
                eprintln!(
                    "darksim: warning: fused {} mode differs from the usual {:?} productization",
                    resolution.mode.label(),
                    cfg.segment
                );
            }
            let mode = mode.map(ModeArg::to_mode).unwrap_or(resolution.mode);
            log(&format!("run: {} intervals in {} mode", trace.intervals.len(), mode.label()));
            let result = sim::run_mode(&cfg, mode, &trace)?;
            match io.format {
                Format::Json => write_atomic(&io.out, &report::report_json(&result)?)?,
                Format::Csv => {
                    write_atomic(&io.out, &report::interval_csv(&result))?;
                    write_atomic(&sibling(&io.out, "summary.json"), &report::summary_json(&result)?)?;
                    write_atomic(&sibling(&io.out, "residency.csv"), &result.residency_csv())?;
                    write_atomic(&sibling(&io.out, "violations.csv"), &report::violations_csv(&result))?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare { io, trace, assertions } => {
            let cfg = load_config(&io)?;
            let trace = Trace::from_csv(&std::fs::read_to_string(&trace)?)?;
            let result = compare_modes(&cfg, &trace)?;
            log(&format!("compare: perf delta {:.3}%", result.perf_delta_pct));
            match io.format {
                Format::Json => write_atomic(&io.out, &report::compare_json(&result)?)?,
                Format::Csv => write_atomic(&io.out, &report::compare_csv(&result))?,
            }
            for assertion in &assertions {
                if !check_assertion(assertion, &result)? {
                    eprintln!("darksim: assertion failed: {assertion}");
                    return Ok(ExitCode::from(3));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { io, tdp_levels } => {
            let cfg = load_config(&io)?;
            let tdps = tdp_levels
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| darksim_core::Error::config(format!("bad --tdp-levels: {e}")))?;
            let rows = tdp_sweep(&cfg, &tdps, &SPEC_SUITE)?;
            match io.format {
                Format::Json => write_atomic(&io.out, &report::sweep_json(&rows)?)?,
                Format::Csv => write_atomic(&io.out, &report::sweep_csv(&rows))?,
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Impedance { io, sweep, mode } => {
            let cfg = load_config(&io)?;
            let net = cfg.pdn(mode.to_mode());
            let (f_min, f_max, points) = match sweep {
                Some(spec) => parse_sweep(&spec)?,
                None => (cfg.sweep.f_min_hz, cfg.sweep.f_max_hz, cfg.sweep.points),
            };
            let profile = net.impedance_sweep(f_min, f_max, points, SweepSpacing::Log)?;
            write_atomic(&io.out, &profile.to_csv())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::GenTrace { kind, seed, out, cores } => {
            let kind = WorkloadKind::parse(&kind)?;
            let params = GenParams { n_cores: cores, ..GenParams::default() };
            let trace = gen_workload(kind, &params, seed);
            log(&format!("gen-trace: {} intervals", trace.intervals.len()));
            write_atomic(&out, &trace.to_csv())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load_config(io: &CommonIo) -> darksim_core::Result<PlatformConfig> {
    let cfg = PlatformConfig::load(&io.config)?;
    match io.tdp {
        Some(tdp) => cfg.with_tdp(tdp),
        None => Ok(cfg),
    }
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    out.with_file_name(format!("{stem}.{suffix}"))
}

/// Outputs are complete or absent: write a temp file, then rename.
fn write_atomic(path: &Path, content: &str) -> darksim_core::Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, content)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn parse_sweep(spec: &str) -> darksim_core::Result<(f64, f64, usize)> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(darksim_core::Error::config("sweep must be f_min:f_max:points"));
    }
    let f_min = parts[0]
        .parse()
        .map_err(|e| darksim_core::Error::config(format!("bad sweep f_min: {e}")))?;
    let f_max = parts[1]
        .parse()
        .map_err(|e| darksim_core::Error::config(format!("bad sweep f_max: {e}")))?;
    let points = parts[2]
        .parse()
        .map_err(|e| darksim_core::Error::config(format!("bad sweep points: {e}")))?;
    Ok((f_min, f_max, points))
}

/// `key=value` threshold checks against the comparison report. Deltas are
/// fractions (0.035 = 3.5%).
fn check_assertion(spec: &str, report: &sim::CompareReport) -> darksim_core::Result<bool> {
    let (key, value) = spec
        .split_once('=')
        .ok_or_else(|| darksim_core::Error::config("assertion must be key=value"))?;
    let threshold: f64 = value
        .trim()
        .parse()
        .map_err(|e| darksim_core::Error::config(format!("bad assertion value: {e}")))?;
    let delta = report.perf_delta_pct / 100.0;
    let power_delta = report.avg_power_delta_pct / 100.0;
    match key.trim() {
        "perf_delta_min" => Ok(delta >= threshold),
        "perf_delta_max" => Ok(delta <= threshold),
        "power_delta_max" => Ok(power_delta <= threshold),
        other => Err(darksim_core::Error::config(format!("unknown assertion '{other}'"))),
    }
}
