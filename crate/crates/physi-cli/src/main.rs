//! Command-line driver for the rate-region pipeline: channel generation,
//! factorization reports, single-floor solves, region sweeps, the
//! time-sharing baseline, and the covariance-grid reference.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use config::{ChannelSource, ExperimentConfig, PowerSpec};
use output::{
    csv_name, hash_file, overlay_svg, region_csv, write_artifact, write_manifest, FileEntry,
    Manifest, TrialReport, Versions,
};
use physi::{
    channels_to_text, check_feasibility, classify_subchannels, dc_solve, expected_partition_counts,
    factor_and_enumerate, generate_channels, grid_reference_region, gsvd, matching_classes,
    read_channels, sweep_region, tdma_baseline, write_channels, ChannelPair, DictionaryScope,
    Error as PhysiError, RateRegion, SolveOutcome, DEFAULT_CLASSIFY_TOL,
};

/// Failure classified by exit code: 2 infeasible, 3 numerical, 4 config,
/// 1 anything else.
#[derive(Debug)]
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: 4,
            message: message.into(),
        }
    }

    fn generic(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    fn infeasible(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<PhysiError> for CliError {
    fn from(e: PhysiError) -> Self {
        let code = match &e {
            PhysiError::PhySiInfeasible { .. } => 2,
            PhysiError::NumericalFailure { .. }
            | PhysiError::RankDeficient { .. }
            | PhysiError::NotPositiveSemidefinite { .. } => 3,
            PhysiError::InvalidInput(_)
            | PhysiError::Parse { .. }
            | PhysiError::DimensionMismatch { .. }
            | PhysiError::DimensionTooLarge { .. }
            | PhysiError::IndexOutOfRange { .. } => 4,
            PhysiError::Io { .. } => 1,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Prints to stdout, swallowing a closed pipe instead of panicking.
fn print_out(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout();
    let _ = out.write_all(text.as_bytes());
    let _ = out.write_all(b"\n");
}

#[derive(Parser)]
#[command(
    name = "physi",
    version,
    about = "Rate regions for joint multicast and confidential MIMO transmission"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a seeded channel pair and write it to a text file
    Gen(GenArgs),
    /// Factor a channel file and report gains, classes, and feasibility
    Gsvd(GsvdArgs),
    /// Solve the power allocation at a single quality floor
    Solve(SolveArgs),
    /// Trace the precoded region with baseline and reference artifacts
    Sweep(RunArgs),
    /// Trace only the time-sharing baseline
    Baseline(RunArgs),
    /// Build only the covariance-grid reference region (small antenna counts)
    Oracle(RunArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    nt: usize,
    #[arg(long)]
    nb: usize,
    #[arg(long)]
    ne: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output channel file path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GsvdArgs {
    /// Channel file to factor
    #[arg(long)]
    channels: PathBuf,
    #[arg(long, default_value_t = DEFAULT_CLASSIFY_TOL)]
    classify_tol: f64,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Flags mirroring the experiment config; any flag overrides the
/// corresponding field of `--config`.
#[derive(Args, Clone)]
struct ConfigFlags {
    /// JSON config file to start from
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    nt: Option<usize>,
    #[arg(long)]
    nb: Option<usize>,
    #[arg(long)]
    ne: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Power budget in dB
    #[arg(long, conflicts_with = "power_linear")]
    power_db: Option<f64>,
    /// Power budget in linear units
    #[arg(long)]
    power_linear: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Channel file instead of generated channels
    #[arg(long)]
    channels: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    grid_units: Option<usize>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    flags: ConfigFlags,
    /// Multicast quality floor in bits
    #[arg(long)]
    r_ms: f64,
    /// Solve only this allocation scheme instead of all of them
    #[arg(long)]
    scheme: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    flags: ConfigFlags,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Cmd::Gen(a) => run_gen(&a),
        Cmd::Gsvd(a) => run_gsvd(&a),
        Cmd::Solve(a) => run_solve(&a),
        Cmd::Sweep(a) => run_experiment(&a.flags, Mode::Full),
        Cmd::Baseline(a) => run_experiment(&a.flags, Mode::BaselineOnly),
        Cmd::Oracle(a) => run_experiment(&a.flags, Mode::OracleOnly),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

/// Builds the effective config from `--config` plus explicit flag overrides.
fn resolve_config(flags: &ConfigFlags) -> CliResult<ExperimentConfig> {
    let mut cfg = match &flags.config {
        Some(path) => ExperimentConfig::from_file(path).map_err(CliError::config)?,
        None => {
            let nt = flags.nt.ok_or_else(|| CliError::config("--nt is required without --config"))?;
            let nb = flags.nb.ok_or_else(|| CliError::config("--nb is required without --config"))?;
            let ne = flags.ne.ok_or_else(|| CliError::config("--ne is required without --config"))?;
            let power = power_from_flags(flags).ok_or_else(|| {
                CliError::config("one of --power-db or --power-linear is required without --config")
            })?;
            ExperimentConfig::new(nt, nb, ne, power, flags.delta.unwrap_or(0.1))
        }
    };
    if let Some(v) = flags.nt {
        cfg.nt = v;
    }
    if let Some(v) = flags.nb {
        cfg.nb = v;
    }
    if let Some(v) = flags.ne {
        cfg.ne = v;
    }
    if let Some(p) = power_from_flags(flags) {
        cfg.power = p;
    }
    if let Some(v) = flags.delta {
        cfg.delta = v;
    }
    if let Some(v) = flags.seed {
        cfg.seed = v;
    }
    if let Some(v) = flags.trials {
        cfg.trials = v;
    }
    if let Some(path) = &flags.channels {
        cfg.channels = ChannelSource::File { path: path.clone() };
    }
    if let Some(dir) = &flags.out {
        cfg.output_dir = dir.clone();
    }
    if let Some(v) = flags.grid_units {
        cfg.grid_units = v;
    }
    cfg.validate().map_err(CliError::config)?;
    Ok(cfg)
}

fn power_from_flags(flags: &ConfigFlags) -> Option<PowerSpec> {
    if let Some(db) = flags.power_db {
        Some(PowerSpec::db(db))
    } else {
        flags.power_linear.map(PowerSpec::linear)
    }
}

fn run_gen(a: &GenArgs) -> CliResult<()> {
    let pair = generate_channels(a.nt, a.nb, a.ne, a.seed)?;
    write_channels(&pair, &a.out)?;
    print_out(&format!(
        "wrote {}x{} and {}x{} channels to {}",
        a.nb,
        a.nt,
        a.ne,
        a.nt,
        a.out.display()
    ));
    Ok(())
}

#[derive(Serialize)]
struct GainRow {
    index: usize,
    c_sq: f64,
    d_sq: f64,
    a_col_norm_sq: f64,
    class: &'static str,
}

#[derive(Serialize)]
struct GsvdReport {
    nt: usize,
    nb: usize,
    ne: usize,
    q: usize,
    regimes: Vec<String>,
    counts: Counts,
    expected_counts: Counts,
    multicast_infeasible: bool,
    confidential_infeasible: bool,
    phy_si_feasible: bool,
    reconstruction_residual_1: f64,
    reconstruction_residual_2: f64,
    unitarity_defect: f64,
    gain_sum_defect: f64,
    gains: Vec<GainRow>,
}

#[derive(Serialize)]
struct Counts {
    cc: usize,
    pc1: usize,
    pc2: usize,
}

fn run_gsvd(a: &GsvdArgs) -> CliResult<()> {
    let pair = read_channels(&a.channels)?;
    let f = gsvd(&pair)?;
    let part = classify_subchannels(&f, a.classify_tol)?;
    let report = check_feasibility(&f, &part);
    let (r1, r2) = f.reconstruction_residuals(&pair);
    let (cc, pc1, pc2) = expected_partition_counts(pair.nt, pair.nb, pair.ne);
    let gains = (0..f.q)
        .map(|i| GainRow {
            index: i,
            c_sq: f.c_sq[i],
            d_sq: f.d_sq[i],
            a_col_norm_sq: f.a_col_norm_sq[i],
            class: if part.pc2.contains(&i) {
                "PC2"
            } else if part.pc1.contains(&i) {
                "PC1"
            } else {
                "CC"
            },
        })
        .collect();
    let doc = GsvdReport {
        nt: pair.nt,
        nb: pair.nb,
        ne: pair.ne,
        q: f.q,
        regimes: matching_classes(pair.nt, pair.nb, pair.ne)
            .iter()
            .map(|c| c.to_string())
            .collect(),
        counts: Counts {
            cc: part.cc.len(),
            pc1: part.pc1.len(),
            pc2: part.pc2.len(),
        },
        expected_counts: Counts { cc, pc1, pc2 },
        multicast_infeasible: report.multicast_infeasible,
        confidential_infeasible: report.confidential_infeasible,
        phy_si_feasible: report.phy_si_feasible,
        reconstruction_residual_1: r1,
        reconstruction_residual_2: r2,
        unitarity_defect: f.unitarity_defect(),
        gain_sum_defect: f.gain_sum_defect(),
        gains,
    };
    let text = serde_json::to_string_pretty(&doc)
        .map_err(|e| CliError::generic(format!("report serialization failed: {e}")))?;
    match &a.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::generic(format!("cannot write {}: {e}", path.display())))?,
        None => print_out(&text),
    }
    Ok(())
}

#[derive(Serialize)]
struct SchemeOutcome {
    scheme_id: usize,
    feasible: bool,
    secrecy_rate: Option<f64>,
}

#[derive(Serialize)]
struct SolveReport {
    r_ms: f64,
    power_linear: f64,
    schemes_total: usize,
    schemes_feasible: usize,
    outcomes: Vec<SchemeOutcome>,
    winner: Winner,
}

#[derive(Serialize)]
struct Winner {
    scheme_id: usize,
    multicast_subchannels: Vec<usize>,
    confidential_subchannels: Vec<usize>,
    p0: Vec<f64>,
    pc: Vec<f64>,
    secrecy_rate: f64,
    multicast_rate_1: f64,
    multicast_rate_2: f64,
    total_power: f64,
    iterations: usize,
    converged: bool,
    kkt_residual: f64,
}

fn load_pair(cfg: &ExperimentConfig, trial: usize) -> CliResult<ChannelPair> {
    match &cfg.channels {
        ChannelSource::Generated => {
            Ok(generate_channels(cfg.nt, cfg.nb, cfg.ne, cfg.trial_seed(trial))?)
        }
        ChannelSource::File { path } => {
            let pair = read_channels(path)?;
            if (pair.nt, pair.nb, pair.ne) != (cfg.nt, cfg.nb, cfg.ne) {
                return Err(CliError::config(format!(
                    "channel file {} has antennas nt={}, nb={}, ne={} but the config says \
                     nt={}, nb={}, ne={}",
                    path.display(),
                    pair.nt,
                    pair.nb,
                    pair.ne,
                    cfg.nt,
                    cfg.nb,
                    cfg.ne
                )));
            }
            Ok(pair)
        }
    }
}

fn run_solve(a: &SolveArgs) -> CliResult<()> {
    let cfg = resolve_config(&a.flags)?;
    if !(a.r_ms >= 0.0) || !a.r_ms.is_finite() {
        return Err(CliError::config(format!(
            "--r-ms must be nonnegative and finite, got {}",
            a.r_ms
        )));
    }
    let pair = load_pair(&cfg, 0)?;
    let p = cfg.power.as_linear();
    let (f, schemes) = factor_and_enumerate(&pair, DEFAULT_CLASSIFY_TOL)?;
    let picked: Vec<usize> = match a.scheme {
        Some(k) => {
            if k >= schemes.schemes.len() {
                return Err(CliError::config(format!(
                    "--scheme {k} out of range, {} schemes exist",
                    schemes.schemes.len()
                )));
            }
            vec![k]
        }
        None => (0..schemes.schemes.len()).collect(),
    };
    let solved: Vec<(usize, SolveOutcome)> = picked
        .par_iter()
        .map(|&k| Ok((k, dc_solve(&f, &schemes.schemes[k], a.r_ms, p, &cfg.solver)?)))
        .collect::<Result<_, PhysiError>>()?;

    let mut outcomes = Vec::new();
    let mut best: Option<(usize, &physi::PowerSolution)> = None;
    for (k, out) in &solved {
        match out {
            SolveOutcome::Solved(sol) => {
                outcomes.push(SchemeOutcome {
                    scheme_id: *k,
                    feasible: true,
                    secrecy_rate: Some(sol.secrecy_rate),
                });
                if best.is_none_or(|(_, b)| sol.secrecy_rate > b.secrecy_rate) {
                    best = Some((*k, sol));
                }
            }
            SolveOutcome::Infeasible => outcomes.push(SchemeOutcome {
                scheme_id: *k,
                feasible: false,
                secrecy_rate: None,
            }),
        }
    }
    let Some((win_k, win)) = best else {
        return Err(CliError::infeasible(format!(
            "quality floor {} is infeasible for every allocation scheme under budget {}",
            a.r_ms, p
        )));
    };
    let alloc = &schemes.schemes[win_k];
    let doc = SolveReport {
        r_ms: a.r_ms,
        power_linear: p,
        schemes_total: schemes.schemes.len(),
        schemes_feasible: outcomes.iter().filter(|o| o.feasible).count(),
        outcomes,
        winner: Winner {
            scheme_id: win_k,
            multicast_subchannels: alloc.gamma0.clone(),
            confidential_subchannels: alloc.gammac.clone(),
            p0: win.p0.clone(),
            pc: win.pc.clone(),
            secrecy_rate: win.secrecy_rate,
            multicast_rate_1: win.multicast_rate_1,
            multicast_rate_2: win.multicast_rate_2,
            total_power: win.total_power,
            iterations: win.diagnostics.iterates.len(),
            converged: win.diagnostics.converged,
            kkt_residual: win.diagnostics.kkt_residual,
        },
    };
    let text = serde_json::to_string_pretty(&doc)
        .map_err(|e| CliError::generic(format!("report serialization failed: {e}")))?;
    match &a.flags.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)
                .map_err(|e| CliError::generic(format!("cannot create {}: {e}", dir.display())))?;
            let path = dir.join("solve.json");
            std::fs::write(&path, text)
                .map_err(|e| CliError::generic(format!("cannot write {}: {e}", path.display())))?;
            print_out(&format!("wrote {}", path.display()));
        }
        None => print_out(&text),
    }
    Ok(())
}

/// Which artifacts an experiment run emits.
#[derive(Clone, Copy, PartialEq)]
enum Mode {
    /// Precoded sweep, baseline, reference when dims permit, and the overlay.
    Full,
    BaselineOnly,
    OracleOnly,
}

fn run_trial(cfg: &ExperimentConfig, mode: Mode, trial: usize) -> CliResult<Vec<FileEntry>> {
    let p = cfg.power.as_linear();
    let pair = load_pair(cfg, trial)?;
    let dir = &cfg.output_dir;
    let mut files = Vec::new();

    if matches!(cfg.channels, ChannelSource::Generated) {
        let name = format!("channels_trial{trial}.txt");
        files.push(
            write_artifact(dir, &name, channels_to_text(&pair).as_bytes())
                .map_err(CliError::generic)?,
        );
    }

    let mut regions: Vec<RateRegion> = Vec::new();
    match mode {
        Mode::Full => {
            regions.push(sweep_region(&pair, p, cfg.delta, DEFAULT_CLASSIFY_TOL, &cfg.solver)?);
            regions.push(tdma_baseline(&pair, p, cfg.delta, DEFAULT_CLASSIFY_TOL, &cfg.solver)?);
            if cfg.grid_dims_permit() {
                regions.push(grid_reference_region(
                    &pair,
                    p,
                    cfg.delta,
                    cfg.grid_units,
                    &cfg.solver,
                    DictionaryScope::Full,
                )?);
            }
        }
        Mode::BaselineOnly => {
            regions.push(tdma_baseline(&pair, p, cfg.delta, DEFAULT_CLASSIFY_TOL, &cfg.solver)?);
        }
        Mode::OracleOnly => {
            regions.push(grid_reference_region(
                &pair,
                p,
                cfg.delta,
                cfg.grid_units,
                &cfg.solver,
                DictionaryScope::Full,
            )?);
        }
    }

    for region in &regions {
        let name = csv_name(region.label, trial);
        files.push(
            write_artifact(dir, &name, region_csv(region).as_bytes()).map_err(CliError::generic)?,
        );
    }
    if mode == Mode::Full {
        let refs: Vec<&RateRegion> = regions.iter().collect();
        let name = format!("overlay_trial{trial}.svg");
        files.push(
            write_artifact(dir, &name, overlay_svg(&refs).as_bytes()).map_err(CliError::generic)?,
        );
    }
    Ok(files)
}

fn run_experiment(flags: &ConfigFlags, mode: Mode) -> CliResult<()> {
    let cfg = resolve_config(flags)?;
    let p = cfg.power.as_linear();
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| {
        CliError::generic(format!("cannot create {}: {e}", cfg.output_dir.display()))
    })?;
    let input_channels = match &cfg.channels {
        ChannelSource::File { path } => Some(hash_file(path).map_err(CliError::config)?),
        ChannelSource::Generated => None,
    };

    let t0 = Instant::now();
    let mut reports: Vec<(TrialReport, Option<CliError>)> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let start = Instant::now();
            let (status, files, err) = match run_trial(&cfg, mode, trial) {
                Ok(files) => ("ok".to_string(), files, None),
                Err(e) => (format!("failed: {}", e.message), Vec::new(), Some(e)),
            };
            (
                TrialReport {
                    trial,
                    seed: cfg.trial_seed(trial),
                    wall_time_s: start.elapsed().as_secs_f64(),
                    status,
                    files,
                },
                err,
            )
        })
        .collect();
    reports.sort_by_key(|(r, _)| r.trial);

    let mut first_err: Option<CliError> = None;
    let mut trials = Vec::new();
    let mut file_count = 0usize;
    for (report, err) in reports {
        file_count += report.files.len();
        if let (None, Some(e)) = (&first_err, err) {
            first_err = Some(e);
        }
        trials.push(report);
    }
    let manifest = Manifest {
        config: cfg.clone(),
        power_linear: p,
        versions: Versions::current(),
        seeds: (0..cfg.trials).map(|t| cfg.trial_seed(t)).collect(),
        input_channels,
        wall_time_s: t0.elapsed().as_secs_f64(),
        trials,
    };
    let manifest_path = write_manifest(&cfg.output_dir, &manifest).map_err(CliError::generic)?;
    print_out(&format!(
        "wrote {file_count} artifact files and {} for {} trial(s)",
        manifest_path.display(),
        cfg.trials
    ));
    match first_err {
        Some(e) => Err(e),
        None => Ok(()),
    }
}
