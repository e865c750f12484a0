//! `hhgqed`: command-line front end.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hhg_qed::io::{read_spectrum, Mode, RunConfig};
use hhg_qed::{run, sweep, Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

#[derive(Parser)]
#[command(name = "hhgqed", version, about = "Cavity-QED high-harmonic generation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory (overrides `output.dir`).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate the 1D atom (and cavity coordinate) on the grid.
    GridRun(Common),
    /// Propagate in the polaritonic basis built from an electronic data file.
    CiRun(Common),
    /// Diagonalize the grid atom and write its lowest states as electronic data.
    ExportElectronicData(Common),
    /// Spectrum and cutoff fit of a stored trajectory.
    Spectrum(Common),
    /// Cutoff fit of a stored spectrum.
    FitCutoff {
        #[command(flatten)]
        common: Common,
        /// Seed for the log-normal noise added before fitting.
        #[arg(long, requires = "noise")]
        seed: Option<u64>,
        /// Standard deviation of the noise on the log-spectrum.
        #[arg(long, requires = "seed")]
        noise: Option<f64>,
    },
    /// Run every member of a parameter sweep.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Worker threads (0 = one per core).
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
}

fn load(common: &Common, mode: Mode) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(&common.config, Some(mode))?;
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn report(summary: &run::RunSummary, dir: &std::path::Path) {
    let f = &summary.fit;
    println!("wrote {}", dir.display());
    println!(
        "final norm {:.6e}, final n_c {:.6e}, omega_cut {:.6} (omega_a {:.6}, omega_b {:.6}){}",
        summary.final_norm,
        summary.final_n_c,
        f.omega_cut,
        f.omega_a,
        f.omega_b,
        if f.degenerate { ", degenerate fit" } else { "" }
    );
}

fn noisy(mut spec: hhg_qed::hhg::SpectrumRecord, seed: u64, sigma: f64) -> Result<hhg_qed::hhg::SpectrumRecord> {
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::Config(format!("--noise {sigma}: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for v in spec.intensity.iter_mut() {
        *v *= normal.sample(&mut rng).exp();
    }
    if let Some(s) = spec.smoothed.as_mut() {
        for v in s.iter_mut() {
            *v *= normal.sample(&mut rng).exp();
        }
    }
    Ok(spec)
}

/// Exit status on success paths: 0, or that of the first failed sweep member.
fn dispatch(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::GridRun(c) => {
            let cfg = load(&c, Mode::Grid)?;
            report(&run::run_grid(&cfg)?, &cfg.output_dir);
        }
        Command::CiRun(c) => {
            let cfg = load(&c, Mode::Basis)?;
            report(&run::run_basis(&cfg)?, &cfg.output_dir);
        }
        Command::ExportElectronicData(c) => {
            let cfg = load(&c, Mode::Export)?;
            println!("wrote {}", run::run_export(&cfg)?.display());
        }
        Command::Spectrum(c) => {
            let cfg = load(&c, Mode::Spectrum)?;
            let (spec, fit) = run::run_spectrum(&cfg)?;
            println!("{} frequencies, omega_cut {:.6}", spec.len(), fit.omega_cut);
        }
        Command::FitCutoff { common, seed, noise } => {
            let cfg = load(&common, Mode::Fit)?;
            let fit = match (seed, noise) {
                (Some(seed), Some(sigma)) => {
                    let input = cfg
                        .analysis
                        .input
                        .as_ref()
                        .ok_or_else(|| Error::Config("missing key `analysis.input`".into()))?;
                    run::fit_record(&cfg, noisy(read_spectrum(input)?, seed, sigma)?)?
                }
                _ => run::run_fit(&cfg)?,
            };
            println!(
                "A {:.6} B {:.6} omega_a {:.6} omega_b {:.6} omega_cut {:.6}{}",
                fit.a,
                fit.b,
                fit.omega_a,
                fit.omega_b,
                fit.omega_cut,
                if fit.degenerate { " (degenerate)" } else { "" }
            );
        }
        Command::Sweep { common, threads } => {
            let cfg = load(&common, Mode::Sweep)?;
            let out = sweep::run_sweep(&cfg, threads)?;
            println!("{} runs, {} failed; summary in {}", out.runs.len(), out.failures(), cfg.output_dir.display());
            if let Some((key, Err(e))) = out.runs.iter().find(|(_, r)| r.is_err()) {
                eprintln!("hhgqed: first failure ({key}): {e}");
                return Ok(exit_code(e));
            }
        }
    }
    Ok(0)
}

fn exit_code(e: &Error) -> u8 {
    if e.is_numerical() {
        3
    } else if e.is_config() {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("hhgqed: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
