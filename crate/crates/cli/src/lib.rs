//! Configuration-driven sweeps over the MAUS simulator, emitting CSV tables
//! with a JSON metadata sidecar.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod output;

use std::path::PathBuf;
use std::time::Instant;

use clap::Parser;
use maus_core::device::{self, SpeciesPresets};
use maus_core::protocol::{build_cycle, Rabi};

use config::{Experiment, Overrides, RawConfig, SweepConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] maus_core::Error),
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "maus-sim", version, about = "Sweeps and tables for the MAUS spin code")]
pub struct Cli {
    pub experiment: Experiment,
    /// JSON config; missing fields take the experiment's defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Nuclear spins, e.g. `3/2,5/2`.
    #[arg(long, value_delimiter = ',')]
    pub spin: Option<Vec<String>>,
    /// Nuclear dephasing rates in units of the Rabi rate.
    #[arg(long = "gamma-n", value_delimiter = ',')]
    pub gamma_n: Option<Vec<f64>>,
    /// Electron dephasing rates in units of the Rabi rate.
    #[arg(long = "gamma-e", value_delimiter = ',')]
    pub gamma_e: Option<Vec<f64>>,
    /// Smallest `Γ_n t` on the grid.
    #[arg(long = "t-min")]
    pub t_min: Option<f64>,
    #[arg(long = "t-max")]
    pub t_max: Option<f64>,
    #[arg(long = "t-count")]
    pub t_count: Option<usize>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// `quantize-wait`, `encoding-noise` or `minimal-qudit`, set to on|off.
    #[arg(long = "flag")]
    pub flag: Vec<String>,
    /// Species preset for `spectrum`.
    #[arg(long)]
    pub species: Option<String>,
    /// Static field in tesla for `spectrum`.
    #[arg(long)]
    pub bz: Option<f64>,
    /// Wait time in units of `1/Ω` for `schedule`.
    #[arg(long)]
    pub wait: Option<f64>,
}

/// What a successful invocation produced.
#[derive(Debug)]
pub struct Outcome {
    pub csv: Option<PathBuf>,
    pub points: usize,
    pub failures: usize,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.failures > 0 {
            EXIT_PARTIAL
        } else {
            EXIT_OK
        }
    }
}

pub fn resolve(cli: &Cli) -> Result<SweepConfig, CliError> {
    let raw = match &cli.config {
        Some(path) => RawConfig::from_path(path)?,
        None => RawConfig::default(),
    };
    let mut raw = raw;
    if cli.species.is_some() {
        raw.species = cli.species.clone();
    }
    if cli.bz.is_some() {
        raw.bz = cli.bz;
    }
    if cli.wait.is_some() {
        raw.wait = cli.wait;
    }
    let over = Overrides {
        spins: cli.spin.clone(),
        gamma_n: cli.gamma_n.clone(),
        gamma_e: cli.gamma_e.clone(),
        t_min: cli.t_min,
        t_max: cli.t_max,
        t_count: cli.t_count,
        threads: cli.threads,
        flags: cli.flag.clone(),
        out: cli.out.clone(),
    };
    SweepConfig::resolve(cli.experiment, raw, over)
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg = resolve(cli)?;
    match cfg.experiment {
        Experiment::Spectrum => spectrum(&cfg),
        Experiment::Schedule => schedule(&cfg),
        _ => sweep(&cfg),
    }
}

fn sweep(cfg: &SweepConfig) -> Result<Outcome, CliError> {
    let out = cfg.output.as_ref().ok_or_else(|| CliError::Config("output: pass --out or set \"output\"".into()))?;
    let csv_path = output::suffixed_path(out, &cfg.flags);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Config(format!("threads: {e}")))?;
    let start = Instant::now();
    let table = pool.install(|| experiments::run(cfg));
    let elapsed = start.elapsed().as_secs_f64();
    output::write(&csv_path, &output::render_csv(&table))?;
    let meta = output::Metadata::new(cfg, &table, elapsed, pool.current_num_threads());
    let text = serde_json::to_string_pretty(&meta).map_err(|e| CliError::Io(e.to_string()))?;
    output::write(&output::sidecar_path(&csv_path), &text)?;
    Ok(Outcome { csv: Some(csv_path), points: table.points.len(), failures: table.failures() })
}

fn spectrum(cfg: &SweepConfig) -> Result<Outcome, CliError> {
    let presets = match &cfg.presets {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("presets: {}: {e}", path.display())))?;
            SpeciesPresets::from_json(&text)?
        }
        None => SpeciesPresets::bundled(),
    };
    let mut params = presets.get(&cfg.species)?.clone();
    if let Some(bz) = cfg.bz {
        params.bz = bz;
    }
    let lines = device::spectrum(&params)?;
    let mut csv = String::from("kind,label,frequency_hz\n");
    println!("{} (spin {}, Bz = {} T)", cfg.species, params.spin, params.bz);
    for l in &lines {
        csv.push_str(&format!("{},{},{:.11e}\n", l.kind, l.label, l.frequency_hz));
        let (value, unit) = if l.kind == "esr" { (l.frequency_hz / 1e9, "GHz") } else { (l.frequency_hz / 1e6, "MHz") };
        println!("  {:<4} {:<24} {:>14.6} {unit}", l.kind, l.label, value);
    }
    let cal = device::calibrate_ix(&params, params.omega_nuclear)?;
    let amplitudes: Vec<String> = cal.amplitudes_mt.iter().map(|b| format!("{b:.4}")).collect();
    println!("  I_x tone amplitudes at {} kHz: [{}] mT", params.omega_nuclear, amplitudes.join(", "));
    if !cal.slow_drive {
        eprintln!("warning: Rabi frequency is not below Q/10; transitions may not be resolved");
    }
    if cal.extension {
        eprintln!("note: tone pattern for spin {} extrapolated from the spin-3/2 drive", params.spin);
    }
    let d = device::duration_report(&params)?;
    println!(
        "  durations (ms): encoding {:.3}, I_x rotation {:.3}, recovery step {:.3}, detection {:.3}, wait quantum {:.3}",
        d.encoding_ms, d.ix_rotation_ms, d.recovery_ms, d.detection_ms, d.wait_quantum_ms
    );
    if let Some(out) = &cfg.output {
        output::write(out, &csv)?;
    }
    Ok(Outcome { csv: cfg.output.clone(), points: lines.len(), failures: 0 })
}

fn schedule(cfg: &SweepConfig) -> Result<Outcome, CliError> {
    let schedule = build_cycle(cfg.spins[0], cfg.wait, Rabi::default())?;
    let text = schedule.to_json()?;
    match &cfg.output {
        Some(out) => output::write(out, &text)?,
        None => {
            use std::io::Write;
            let _ = writeln!(std::io::stdout().lock(), "{text}");
        }
    }
    Ok(Outcome { csv: None, points: 1, failures: 0 })
}

/// Parses arguments, runs, reports, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            if let Some(path) = &outcome.csv {
                eprintln!("wrote {} ({} points, {} failed)", path.display(), outcome.points, outcome.failures);
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}
