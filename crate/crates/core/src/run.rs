//! Run orchestration: one validated [`RunConfig`] in, files in its output
//! directory out.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use crate::electronic::ElectronicData;
use crate::error::{Error, Result};
use crate::grid::{
    export_electronic_data, imaginary_time_ground_state, propagate, write_checkpoint, GridHamiltonian,
    PropagationSettings,
};
use crate::hhg::{default_fit_range, fit_spectrum, smooth_spectrum, spectrum_from_trajectory, CutoffFit, SpectrumRecord};
use crate::io::{
    load_electronic_data, read_spectrum, read_trajectory, write_basis_summary, write_cutoff_fit, write_electronic_data,
    write_population_ranking, write_populations, write_spectrum, write_text, write_trajectory, Mode, RunConfig,
};
use crate::polariton::PolaritonBasis;
use crate::record::TrajectoryRecord;
use crate::tdci::{population_report, run_driven, CoefficientState, DrivenSettings, PropagatorSetup};

pub const TRAJECTORY_FILE: &str = "trajectory.tsv";
pub const POPULATIONS_FILE: &str = "populations.tsv";
pub const ZERO_ORDER_FILE: &str = "zero_order.tsv";
pub const RANKING_FILE: &str = "population_ranking.tsv";
pub const BASIS_FILE: &str = "basis.tsv";
pub const SPECTRUM_FILE: &str = "spectrum.tsv";
pub const FIT_FILE: &str = "fit.tsv";
pub const ECHO_FILE: &str = "config.echo";
pub const ELECTRONIC_FILE: &str = "electronic.dat";

/// Per-run numbers collected by sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub omega_c: Option<f64>,
    pub g_c: f64,
    pub n_photon: usize,
    pub fit: CutoffFit,
    pub fit_range: (f64, f64),
    pub final_norm: f64,
    pub final_n_c: f64,
}

fn prepare_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Smoothed spectrum and cutoff fit using the analysis settings.
pub fn analyze(cfg: &RunConfig, traj: &TrajectoryRecord) -> Result<(SpectrumRecord, CutoffFit, (f64, f64))> {
    let omega0 = cfg
        .analysis
        .omega0
        .ok_or_else(|| Error::Config("missing key `analysis.omega0`".into()))?;
    let mut spec = spectrum_from_trajectory(traj, Some(omega0))?;
    smooth_spectrum(&mut spec, cfg.analysis.smoothing_width)?;
    let (fit, range) = fit_with_config(cfg, &spec, omega0)?;
    Ok((spec, fit, range))
}

fn fit_with_config(cfg: &RunConfig, spec: &SpectrumRecord, omega0: f64) -> Result<(CutoffFit, (f64, f64))> {
    let (lo, hi) = default_fit_range(spec, omega0);
    let range = (cfg.analysis.fit_range.0.unwrap_or(lo), cfg.analysis.fit_range.1.unwrap_or(hi));
    Ok((fit_spectrum(spec, range)?, range))
}

fn write_analysis(dir: &Path, spec: &SpectrumRecord, fit: &CutoffFit, range: (f64, f64)) -> Result<()> {
    write_spectrum(&dir.join(SPECTRUM_FILE), spec)?;
    write_cutoff_fit(&dir.join(FIT_FILE), fit, range)
}

/// Grid run: relaxation, propagation under the pulse, spectrum and fit.
pub fn run_grid(cfg: &RunConfig) -> Result<RunSummary> {
    let pulse = cfg.pulse.ok_or_else(|| Error::Config("missing key `laser.amplitude`".into()))?;
    let dir = &cfg.output_dir;
    prepare_dir(dir)?;
    write_text(&dir.join(ECHO_FILE), &cfg.echo())?;
    let cavity = cfg.cavity.filter(|_| cfg.grid.cavity.is_some());
    let mut h = GridHamiltonian::from_model(cfg.grid, &cfg.atom, cavity.as_ref(), &cfg.caps)?;
    let gs = imaginary_time_ground_state(&mut h, None, cfg.relax.dtau, cfg.relax.tol, cfg.relax.max_iterations)?;
    let mut state = gs.state;
    if cfg.checkpoint {
        write_checkpoint(&dir.join("ground.ckpt"), &state)?;
    }
    let mut settings = PropagationSettings::new(cfg.numerics.dt, cfg.propagation_end().unwrap_or(pulse.end_time()));
    settings.sample_stride = cfg.numerics.sample_stride;
    settings.stepper = cfg.numerics.stepper;
    let traj = propagate(&mut h, &mut state, Some(&pulse), &settings)?;
    if cfg.checkpoint {
        write_checkpoint(&dir.join("final.ckpt"), &state)?;
    }
    write_trajectory(&dir.join(TRAJECTORY_FILE), &traj)?;
    let (spec, fit, range) = analyze(cfg, &traj)?;
    write_analysis(dir, &spec, &fit, range)?;
    summary(cfg, &traj, fit, range)
}

fn summary(cfg: &RunConfig, traj: &TrajectoryRecord, fit: CutoffFit, fit_range: (f64, f64)) -> Result<RunSummary> {
    let last = traj.last().ok_or_else(|| Error::Domain("empty trajectory".into()))?;
    Ok(RunSummary {
        omega_c: cfg.cavity.map(|c| c.omega()),
        g_c: cfg.cavity.map_or(0.0, |c| c.coupling()),
        n_photon: cfg.basis.n_photon,
        fit,
        fit_range,
        final_norm: last.norm,
        final_n_c: last.n_c,
    })
}

/// Keeps the lowest `n` states of `data`.
pub fn truncate_states(data: &ElectronicData, n: usize) -> Result<ElectronicData> {
    if n == 0 || n > data.n_states() {
        return Err(Error::Config(format!("cannot keep {n} of {} electronic states", data.n_states())));
    }
    let cut = |m: &DMatrix<f64>| m.view((0, 0), (n, n)).into_owned();
    let out = ElectronicData {
        energies: data.energies[..n].to_vec(),
        dipole: [
            data.dipole[0].as_ref().map(cut),
            data.dipole[1].as_ref().map(cut),
            data.dipole[2].as_ref().map(cut),
        ],
        rates: data.rates.as_ref().map(|r| r[..n].to_vec()),
        cis: data.cis.as_ref().map(|rows| rows.iter().copied().filter(|r| r.state < n).collect()),
        ionization_potential: data.ionization_potential,
        escape_length: data.escape_length,
    };
    out.validate()?;
    Ok(out)
}

/// Electronic data and the polariton basis described by a basis config.
pub fn build_basis(cfg: &RunConfig) -> Result<PolaritonBasis> {
    let pulse = cfg.pulse.ok_or_else(|| Error::Config("missing key `laser.amplitude`".into()))?;
    let path = cfg
        .basis
        .electronic_data
        .as_ref()
        .ok_or_else(|| Error::Config("missing key `basis.electronic_data`".into()))?;
    let mut data = load_electronic_data(path)?;
    if let Some(n) = cfg.basis.n_states {
        data = truncate_states(&data, n)?;
    }
    let rates = if cfg.ionization.enabled {
        Some(data.resolve_rates(cfg.ionization.escape_length)?)
    } else {
        None
    };
    match &cfg.cavity {
        Some(c) => PolaritonBasis::build(&data, c, cfg.basis.n_photon, pulse.polarization(), rates.as_deref()),
        None => PolaritonBasis::bare(&data, pulse.polarization(), rates.as_deref()),
    }
}

/// Basis run from the polaritonic ground state.
pub fn run_basis(cfg: &RunConfig) -> Result<RunSummary> {
    let pulse = cfg.pulse.ok_or_else(|| Error::Config("missing key `laser.amplitude`".into()))?;
    let dir = &cfg.output_dir;
    prepare_dir(dir)?;
    write_text(&dir.join(ECHO_FILE), &cfg.echo())?;
    let basis = build_basis(cfg)?;
    write_basis_summary(&dir.join(BASIS_FILE), &basis)?;
    let setup = PropagatorSetup::new(&basis, cfg.numerics.dt, pulse)?;
    let mut settings = DrivenSettings::new(cfg.propagation_end().unwrap_or(pulse.end_time()));
    settings.sample_stride = cfg.numerics.sample_stride;
    settings.population_stride = cfg.numerics.population_stride;
    settings.norm_divide = cfg.numerics.norm_divide;
    let run = run_driven(&setup, CoefficientState::basis_state(basis.dim(), 0)?, &settings)?;
    write_trajectory(&dir.join(TRAJECTORY_FILE), &run.trajectory)?;
    if let Some(p) = &run.populations {
        write_populations(&dir.join(POPULATIONS_FILE), p)?;
        write_population_ranking(&dir.join(RANKING_FILE), &population_report(p, &basis, cfg.basis.report_top_k)?)?;
    }
    if let Some(z) = &run.zero_order {
        write_populations(&dir.join(ZERO_ORDER_FILE), z)?;
    }
    let (spec, fit, range) = analyze(cfg, &run.trajectory)?;
    write_analysis(dir, &spec, &fit, range)?;
    summary(cfg, &run.trajectory, fit, range)
}

/// Grid or basis run, by mode.
pub fn execute(cfg: &RunConfig) -> Result<RunSummary> {
    match cfg.mode {
        Mode::Grid => run_grid(cfg),
        Mode::Basis => run_basis(cfg),
        m => Err(Error::Config(format!("{} is not a propagation mode", m.name()))),
    }
}

/// Spectrum (and fit) of a stored trajectory.
pub fn run_spectrum(cfg: &RunConfig) -> Result<(SpectrumRecord, CutoffFit)> {
    let input = cfg
        .analysis
        .input
        .as_ref()
        .ok_or_else(|| Error::Config("missing key `analysis.input`".into()))?;
    let traj = read_trajectory(input)?;
    prepare_dir(&cfg.output_dir)?;
    let (spec, fit, range) = analyze(cfg, &traj)?;
    write_analysis(&cfg.output_dir, &spec, &fit, range)?;
    Ok((spec, fit))
}

/// Cutoff fit of a stored spectrum (smoothed with the configured width when
/// the file has no smoothed column).
pub fn run_fit(cfg: &RunConfig) -> Result<CutoffFit> {
    let input = cfg
        .analysis
        .input
        .as_ref()
        .ok_or_else(|| Error::Config("missing key `analysis.input`".into()))?;
    fit_record(cfg, read_spectrum(input)?)
}

/// [`run_fit`] on an in-memory spectrum.
pub fn fit_record(cfg: &RunConfig, mut spec: SpectrumRecord) -> Result<CutoffFit> {
    let omega0 = cfg
        .analysis
        .omega0
        .or(spec.omega0)
        .ok_or_else(|| Error::Config("missing key `analysis.omega0`".into()))?;
    if spec.omega0.is_none() {
        spec.omega0 = Some(omega0);
    }
    if spec.smoothed.is_none() {
        smooth_spectrum(&mut spec, cfg.analysis.smoothing_width)?;
    }
    let (fit, range) = fit_with_config(cfg, &spec, omega0)?;
    prepare_dir(&cfg.output_dir)?;
    write_cutoff_fit(&cfg.output_dir.join(FIT_FILE), &fit, range)?;
    Ok(fit)
}

/// Writes the lowest grid eigenstates as an electronic data file.
pub fn run_export(cfg: &RunConfig) -> Result<PathBuf> {
    let mut data = export_electronic_data(&cfg.grid, &cfg.atom, cfg.export_states)?;
    data.escape_length = cfg.ionization.escape_length;
    prepare_dir(&cfg.output_dir)?;
    let path = cfg.output_dir.join(ELECTRONIC_FILE);
    write_electronic_data(&path, &data)?;
    Ok(path)
}
