use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::commands::{self, Report};
use crate::config::{Format, RunConfig, THREADS_ENV};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "toricsim", version, about = "Toric-code spectra, logical-qubit control and interference readout")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output path. Sidecars are written next to it. Defaults to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (overrides TORICSIM_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long = "max-sites", global = true)]
    pub max_sites: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Lowest levels of a lattice Hamiltonian.
    Spectrum,
    /// Ground-cluster splitting against field strength, with power-law fits.
    Sweep,
    /// Effective pseudo-spin Hamiltonian of the ground cluster.
    Extract,
    /// Compile a single-qubit gate into a pulse sequence.
    Gate,
    /// Adiabatic initialization over a ladder of ramp times.
    Init,
    /// Sampled interference readout and state reconstruction.
    Measure,
    /// Compare the Kitaev model with its plaquette reduction.
    KitaevCheck,
}

pub fn resolve(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.threads {
        cfg.threads = Some(t);
    }
    if let Some(m) = cli.max_sites {
        cfg.max_sites = m;
    }
    Ok(cfg)
}

fn thread_count(cfg: &RunConfig) -> CliResult<usize> {
    if let Some(t) = cfg.threads {
        return Ok(t);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV}={v:?} is not a positive integer"))),
        Err(_) => Ok(0),
    }
}

pub fn execute(command: Command, cfg: &RunConfig) -> CliResult<Report> {
    let threads = thread_count(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    pool.install(|| match command {
        Command::Spectrum => commands::spectrum(cfg),
        Command::Sweep => commands::sweep(cfg),
        Command::Extract => commands::extract(cfg),
        Command::Gate => commands::gate(cfg),
        Command::Init => commands::init(cfg),
        Command::Measure => commands::measure(cfg),
        Command::KitaevCheck => commands::kitaev_check(cfg),
    })
}

fn sidecar_path(out: &Path, suffix: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn write_report(report: &Report, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => {
            std::fs::write(path, &report.primary).map_err(|e| CliError::io(path, e))?;
            for (suffix, bytes) in &report.sidecars {
                let p = sidecar_path(path, suffix);
                std::fs::write(&p, bytes).map_err(|e| CliError::io(&p, e))?;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(&report.primary)
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
            if !report.sidecars.is_empty() {
                let names: Vec<&str> = report.sidecars.iter().map(|(s, _)| s.as_str()).collect();
                eprintln!("toricsim: note: sidecars {} need --out and were not written", names.join(", "));
            }
        }
    }
    Ok(())
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = resolve(&cli).and_then(|cfg| {
        let report = execute(cli.command, &cfg)?;
        write_report(&report, cli.out.as_deref())
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("toricsim: error: {}", e.to_string().replace('\n', " "));
            e.exit_code()
        }
    }
}
