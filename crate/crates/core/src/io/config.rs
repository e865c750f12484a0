//! Flat `section.key = value [unit]` run configuration.
//!
//! Parsing is strict: unknown keys, repeated keys, malformed values and unit
//! mismatches are all collected and reported together. Lengths accept `a0`,
//! `au` or `nm`; energies and frequencies `Eh`, `au`, `eV` (frequencies also
//! `nm` as a vacuum wavelength); times `au` or `fs`. A bare number is in atomic
//! units.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::cavity::CavitySpec;
use crate::error::{Error, Result};
use crate::grid::{
    cavity_preset, CapSpec, CavityCap, ElectronCap, GridSpec, SoftCoreModel, Stepper, ELECTRON_CAP_ONSET_FRACTION,
    ELECTRON_CAP_STRENGTH,
};
use crate::pulse::{PulseSpec, Vec3};
use crate::units::AtomicUnits;

use super::tsv::read_text;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Grid,
    Basis,
    Spectrum,
    Fit,
    Sweep,
    Export,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Grid => "grid",
            Mode::Basis => "basis",
            Mode::Spectrum => "spectrum",
            Mode::Fit => "fit",
            Mode::Sweep => "sweep",
            Mode::Export => "export",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "grid" => Mode::Grid,
            "basis" => Mode::Basis,
            "spectrum" => Mode::Spectrum,
            "fit" => Mode::Fit,
            "sweep" => Mode::Sweep,
            "export" => Mode::Export,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Dim {
    None,
    Length,
    Energy,
    Frequency,
    Time,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Real(Dim),
    Count,
    Flag,
    Word(&'static [&'static str]),
    Path,
    Vector,
    RealList(Dim),
    CountList,
}

const MODES: &[&str] = &["grid", "basis", "spectrum", "fit", "sweep", "export"];
const STEPPERS: &[&str] = &["rk4", "split"];
const SWEEP_MODES: &[&str] = &["grid", "basis"];

/// Every accepted key with its value kind.
const SCHEMA: &[(&str, Kind)] = &[
    ("mode", Kind::Word(MODES)),
    ("output.dir", Kind::Path),
    ("output.checkpoint", Kind::Flag),
    ("atom.charge", Kind::Real(Dim::None)),
    ("atom.eta", Kind::Real(Dim::Length)),
    ("atom.center", Kind::Real(Dim::Length)),
    ("grid.n_z", Kind::Count),
    ("grid.z_max", Kind::Real(Dim::Length)),
    ("grid.n_xc", Kind::Count),
    ("grid.xc_max", Kind::Real(Dim::Length)),
    ("cap.electron", Kind::Flag),
    ("cap.electron.onset", Kind::Real(Dim::Length)),
    ("cap.electron.strength", Kind::Real(Dim::None)),
    ("cap.cavity", Kind::Flag),
    ("cap.cavity.onset", Kind::Real(Dim::Length)),
    ("cap.cavity.strength", Kind::Real(Dim::None)),
    ("cavity.omega_c", Kind::Real(Dim::Frequency)),
    ("cavity.g_c", Kind::Real(Dim::None)),
    ("cavity.polarization", Kind::Vector),
    ("laser.amplitude", Kind::Real(Dim::None)),
    ("laser.omega", Kind::Real(Dim::Frequency)),
    ("laser.cycles", Kind::Count),
    ("laser.polarization", Kind::Vector),
    ("numerics.dt", Kind::Real(Dim::Time)),
    ("numerics.t_end", Kind::Real(Dim::Time)),
    ("numerics.stepper", Kind::Word(STEPPERS)),
    ("numerics.sample_stride", Kind::Count),
    ("numerics.population_stride", Kind::Count),
    ("numerics.norm_divide", Kind::Flag),
    ("relax.dtau", Kind::Real(Dim::Time)),
    ("relax.tol", Kind::Real(Dim::Energy)),
    ("relax.max_iterations", Kind::Count),
    ("basis.electronic_data", Kind::Path),
    ("basis.n_photon", Kind::Count),
    ("basis.n_states", Kind::Count),
    ("basis.report_top_k", Kind::Count),
    ("ionization.enabled", Kind::Flag),
    ("ionization.escape_length", Kind::Real(Dim::Length)),
    ("export.n_states", Kind::Count),
    ("analysis.input", Kind::Path),
    ("analysis.omega0", Kind::Real(Dim::Frequency)),
    ("analysis.smoothing_width", Kind::Real(Dim::Frequency)),
    ("analysis.fit_lo", Kind::Real(Dim::Frequency)),
    ("analysis.fit_hi", Kind::Real(Dim::Frequency)),
    ("sweep.mode", Kind::Word(SWEEP_MODES)),
    ("sweep.omega_c", Kind::RealList(Dim::Frequency)),
    ("sweep.g_c", Kind::RealList(Dim::None)),
    ("sweep.n_photon", Kind::CountList),
];

pub const DEFAULT_GRID_DT: f64 = 0.001;
pub const DEFAULT_GRID_STRIDE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Numerics {
    pub dt: f64,
    pub t_end: Option<f64>,
    pub stepper: Stepper,
    pub sample_stride: usize,
    pub population_stride: usize,
    pub norm_divide: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Relaxation {
    pub dtau: f64,
    pub tol: f64,
    pub max_iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisSettings {
    pub electronic_data: Option<PathBuf>,
    pub n_photon: usize,
    /// Keep only the lowest `n_states` electronic states.
    pub n_states: Option<usize>,
    pub report_top_k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ionization {
    pub enabled: bool,
    pub escape_length: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub input: Option<PathBuf>,
    pub omega0: Option<f64>,
    pub smoothing_width: Option<f64>,
    pub fit_range: (Option<f64>, Option<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxes {
    pub mode: Mode,
    pub omega_c: Vec<f64>,
    pub g_c: Vec<f64>,
    pub n_photon: Vec<usize>,
    /// Coupling used when `g_c` is not swept.
    pub base_g_c: f64,
}

/// A fully validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub output_dir: PathBuf,
    pub checkpoint: bool,
    pub atom: SoftCoreModel,
    pub grid: GridSpec,
    pub caps: CapSpec,
    pub cavity: Option<CavitySpec>,
    pub pulse: Option<PulseSpec>,
    pub numerics: Numerics,
    pub relax: Relaxation,
    pub basis: BasisSettings,
    pub ionization: Ionization,
    pub export_states: usize,
    pub analysis: Analysis,
    pub sweep: SweepAxes,
    /// Parsed key/value pairs as given, used to derive sweep members.
    entries: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Real(f64),
    Count(usize),
    Flag(bool),
    Text(String),
    Vector(Vec3),
    Reals(Vec<f64>),
    Counts(Vec<usize>),
}

fn unit_factor(dim: Dim, unit: &str) -> Option<Box<dyn Fn(f64) -> f64>> {
    let f: Box<dyn Fn(f64) -> f64> = match (dim, unit) {
        (_, "") => Box::new(|v| v),
        (Dim::Length, "a0" | "au") => Box::new(|v| v),
        (Dim::Length, "nm") => Box::new(AtomicUnits::length_from_nm),
        (Dim::Energy | Dim::Frequency, "Eh" | "au") => Box::new(|v| v),
        (Dim::Energy | Dim::Frequency, "eV") => Box::new(AtomicUnits::energy_from_ev),
        (Dim::Frequency, "nm") => Box::new(AtomicUnits::omega_from_wavelength_nm),
        (Dim::Time, "au") => Box::new(|v| v),
        (Dim::Time, "fs") => Box::new(AtomicUnits::time_from_fs),
        (Dim::None, "au") => Box::new(|v| v),
        _ => return None,
    };
    Some(f)
}

fn split_unit(raw: &str) -> (&str, &str) {
    match raw.rsplit_once(char::is_whitespace) {
        Some((v, u)) if u.chars().all(|c| c.is_ascii_alphabetic() || c == '0') && u.starts_with(|c: char| c.is_ascii_alphabetic()) => {
            (v.trim_end(), u)
        }
        _ => (raw, ""),
    }
}

fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{}` is not a number", s.trim()))?;
    if !v.is_finite() {
        return Err(format!("`{}` is not finite", s.trim()));
    }
    Ok(v)
}

fn parse_count(s: &str) -> std::result::Result<usize, String> {
    s.trim().parse().map_err(|_| format!("`{}` is not a non-negative integer", s.trim()))
}

fn parse_value(kind: Kind, raw: &str) -> std::result::Result<Value, String> {
    let with_unit = |dim: Dim, body: &str, unit: &str| -> std::result::Result<Box<dyn Fn(f64) -> f64>, String> {
        let _ = body;
        unit_factor(dim, unit).ok_or_else(|| format!("unit `{unit}` does not fit a {} quantity", dim_name(dim)))
    };
    match kind {
        Kind::Real(dim) => {
            let (body, unit) = split_unit(raw);
            let conv = with_unit(dim, body, unit)?;
            Ok(Value::Real(conv(parse_real(body)?)))
        }
        Kind::RealList(dim) => {
            let (body, unit) = split_unit(raw);
            let conv = with_unit(dim, body, unit)?;
            let vals = body.split(',').map(|s| parse_real(s).map(&conv)).collect::<std::result::Result<Vec<_>, _>>()?;
            Ok(Value::Reals(vals))
        }
        Kind::Count => Ok(Value::Count(parse_count(raw)?)),
        Kind::CountList => Ok(Value::Counts(raw.split(',').map(parse_count).collect::<std::result::Result<_, _>>()?)),
        Kind::Flag => match raw {
            "true" | "on" | "yes" => Ok(Value::Flag(true)),
            "false" | "off" | "no" => Ok(Value::Flag(false)),
            _ => Err(format!("`{raw}` is not a boolean (true/false)")),
        },
        Kind::Word(options) => {
            if options.contains(&raw) {
                Ok(Value::Text(raw.to_string()))
            } else {
                Err(format!("`{raw}` is not one of {}", options.join(", ")))
            }
        }
        Kind::Path => {
            if raw.is_empty() {
                Err("empty path".into())
            } else {
                Ok(Value::Text(raw.to_string()))
            }
        }
        Kind::Vector => {
            let parts: Vec<&str> = raw.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(format!("`{raw}` is not a 3-vector `x y z`"));
            }
            let mut v = [0.0; 3];
            for (slot, p) in v.iter_mut().zip(parts) {
                *slot = parse_real(p)?;
            }
            Ok(Value::Vector(v))
        }
    }
}

fn dim_name(d: Dim) -> &'static str {
    match d {
        Dim::None => "dimensionless",
        Dim::Length => "length",
        Dim::Energy => "energy",
        Dim::Frequency => "frequency",
        Dim::Time => "time",
    }
}

struct Values {
    map: Vec<(&'static str, Value)>,
}

impl Values {
    fn get(&self, key: &str) -> Option<&Value> {
        self.map.iter().find(|(k, _)| *k == key).map(|(_, v)| v)
    }

    fn real(&self, key: &str) -> Option<f64> {
        match self.get(key) {
            Some(Value::Real(v)) => Some(*v),
            _ => None,
        }
    }

    fn count(&self, key: &str) -> Option<usize> {
        match self.get(key) {
            Some(Value::Count(v)) => Some(*v),
            _ => None,
        }
    }

    fn flag(&self, key: &str) -> Option<bool> {
        match self.get(key) {
            Some(Value::Flag(v)) => Some(*v),
            _ => None,
        }
    }

    fn text(&self, key: &str) -> Option<&str> {
        match self.get(key) {
            Some(Value::Text(v)) => Some(v),
            _ => None,
        }
    }

    fn vector(&self, key: &str) -> Option<Vec3> {
        match self.get(key) {
            Some(Value::Vector(v)) => Some(*v),
            _ => None,
        }
    }

    fn reals(&self, key: &str) -> Vec<f64> {
        match self.get(key) {
            Some(Value::Reals(v)) => v.clone(),
            _ => Vec::new(),
        }
    }

    fn counts(&self, key: &str) -> Vec<usize> {
        match self.get(key) {
            Some(Value::Counts(v)) => v.clone(),
            _ => Vec::new(),
        }
    }
}

/// Splits the text into `(key, raw value)` pairs, collecting syntax errors.
fn tokenize(text: &str, errors: &mut Vec<String>) -> Vec<(usize, String, String)> {
    let mut out: Vec<(usize, String, String)> = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let no = no + 1;
        let line = raw.split_once('#').map_or(raw, |(l, _)| l).trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            errors.push(format!("line {no}: expected `key = value`"));
            continue;
        };
        let (k, v) = (k.trim(), v.trim());
        if let Some(prev) = out.iter().find(|(_, key, _)| key == k) {
            errors.push(format!("line {no}: key `{k}` repeats line {}", prev.0));
            continue;
        }
        out.push((no, k.to_string(), v.to_string()));
    }
    out
}

impl RunConfig {
    /// Parses and validates; `default_mode` applies when the text has no `mode`
    /// key, and a conflicting `mode` is an error.
    pub fn parse(text: &str, default_mode: Option<Mode>) -> Result<Self> {
        let mut errors = Vec::new();
        let tokens = tokenize(text, &mut errors);
        let mut values = Values { map: Vec::new() };
        let mut entries = Vec::new();
        for (no, key, raw) in &tokens {
            let Some(&(name, kind)) = SCHEMA.iter().find(|(k, _)| k == key) else {
                errors.push(format!("line {no}: unknown key `{key}`"));
                continue;
            };
            match parse_value(kind, raw) {
                Ok(v) => {
                    values.map.push((name, v));
                    entries.push((key.clone(), raw.clone()));
                }
                Err(e) => errors.push(format!("line {no}: `{key}`: {e}")),
            }
        }
        let cfg = Self::build(&values, default_mode, entries, &mut errors);
        match cfg {
            Some(c) if errors.is_empty() => Ok(c),
            _ => Err(Error::ConfigList(errors)),
        }
    }

    pub fn load(path: &Path, default_mode: Option<Mode>) -> Result<Self> {
        let text = read_text(path)?;
        Self::parse(&text, default_mode).map_err(|e| match e {
            Error::ConfigList(list) => Error::ConfigList(list.into_iter().map(|m| format!("{}: {m}", path.display())).collect()),
            other => other,
        })
    }

    fn build(v: &Values, default_mode: Option<Mode>, entries: Vec<(String, String)>, errors: &mut Vec<String>) -> Option<Self> {
        let mode = match (v.text("mode").and_then(Mode::parse), default_mode) {
            (Some(m), Some(d)) if m != d => {
                errors.push(format!("`mode = {}` conflicts with the requested {} run", m.name(), d.name()));
                return None;
            }
            (Some(m), _) | (None, Some(m)) => m,
            (None, None) => {
                errors.push("missing required key `mode`".into());
                return None;
            }
        };
        let run_mode = if mode == Mode::Sweep {
            v.text("sweep.mode").and_then(Mode::parse).unwrap_or(Mode::Basis)
        } else {
            mode
        };

        let atom = SoftCoreModel::new(
            v.real("atom.charge").unwrap_or(1.0),
            v.real("atom.eta").unwrap_or(0.9871),
            v.real("atom.center").unwrap_or(0.0),
        );
        let atom = match atom {
            Ok(a) => a,
            Err(e) => {
                note(errors, Err(e));
                SoftCoreModel::default()
            }
        };

        let cavity = v.real("cavity.omega_c").map(|w| {
            CavitySpec::new(w, v.real("cavity.g_c").unwrap_or(0.0), v.vector("cavity.polarization").unwrap_or([0.0, 0.0, 1.0]))
        });
        let cavity = match cavity {
            Some(Ok(c)) => Some(c),
            Some(Err(e)) => {
                note(errors, Err(e));
                None
            }
            None => {
                let swept = mode == Mode::Sweep && !v.reals("sweep.omega_c").is_empty();
                if !swept && (v.get("cavity.g_c").is_some() || v.get("cavity.polarization").is_some()) {
                    note(errors, Err(Error::Config("cavity keys given without `cavity.omega_c`".into())));
                }
                None
            }
        };

        let pulse = match (v.real("laser.amplitude"), v.real("laser.omega"), v.count("laser.cycles")) {
            (Some(f0), Some(w), Some(n)) => {
                match u32::try_from(n).map_err(|_| Error::Config("laser.cycles is too large".into())).and_then(|n| {
                    PulseSpec::new(f0, w, n, v.vector("laser.polarization").unwrap_or([0.0, 0.0, 1.0]))
                }) {
                    Ok(p) => Some(p),
                    Err(e) => {
                        note(errors, Err(Error::Config(format!("laser: {e}"))));
                        None
                    }
                }
            }
            (None, None, None) => None,
            _ => {
                note(errors, Err(Error::Config(
                    "a pulse needs all of `laser.amplitude`, `laser.omega` and `laser.cycles`".into(),
                )));
                None
            }
        };
        if matches!(run_mode, Mode::Grid | Mode::Basis) && pulse.is_none() && !errors.iter().any(|e| e.contains("laser")) {
            errors.push(format!("{} runs need a pulse: missing key `laser.amplitude`", run_mode.name()));
        }

        // grid and absorbers
        let n_z = v.count("grid.n_z").unwrap_or(512);
        let z_max = v.real("grid.z_max").unwrap_or(100.0);
        let preset = cavity.and_then(|c| cavity_preset(c.omega()));
        let grid_cavity = run_mode == Mode::Grid && cavity.is_some() || mode == Mode::Sweep && run_mode == Mode::Grid;
        let (n_xc, xc_max) = match (v.count("grid.n_xc"), v.real("grid.xc_max"), preset) {
            (Some(n), Some(x), _) => (n, x),
            (None, None, Some(p)) => (p.n_points, p.x_max),
            (Some(n), None, Some(p)) => (n, p.x_max),
            (None, Some(x), Some(p)) => (p.n_points, x),
            _ if !grid_cavity || mode == Mode::Sweep => (1, 0.0),
            _ => {
                errors.push(format!(
                    "no tabulated cavity grid for omega_c = {}: set `grid.n_xc` and `grid.xc_max`",
                    cavity.map_or(0.0, |c| c.omega())
                ));
                (1, 0.0)
            }
        };
        let grid = if grid_cavity && n_xc > 1 {
            GridSpec::new(n_z, z_max, n_xc, xc_max)
        } else {
            GridSpec::electron_only(n_z, z_max)
        };
        let grid = match grid {
            Ok(g) => g,
            Err(e) => {
                note(errors, Err(e));
                GridSpec::default_electron()
            }
        };
        let electron_cap = v.flag("cap.electron").unwrap_or(true).then(|| ElectronCap {
            onset: v.real("cap.electron.onset").unwrap_or(ELECTRON_CAP_ONSET_FRACTION * grid.electron.extent()),
            strength: v.real("cap.electron.strength").unwrap_or(ELECTRON_CAP_STRENGTH),
        });
        let cavity_cap = if grid.cavity.is_some() && v.flag("cap.cavity").unwrap_or(true) {
            match (v.real("cap.cavity.onset"), v.real("cap.cavity.strength"), preset) {
                (Some(o), Some(s), _) => Some(CavityCap { onset: o, strength: s }),
                (o, s, Some(p)) => Some(CavityCap {
                    onset: o.unwrap_or(p.cap_onset),
                    strength: s.unwrap_or(p.cap_strength),
                }),
                _ => {
                    errors.push("cavity absorber needs `cap.cavity.onset` and `cap.cavity.strength`".into());
                    None
                }
            }
        } else {
            None
        };
        let caps = CapSpec {
            electron: electron_cap,
            cavity: cavity_cap,
        };
        note(errors, caps.validate(&grid));

        let grid_like = run_mode == Mode::Grid;
        let numerics = Numerics {
            dt: v.real("numerics.dt").unwrap_or(if grid_like { DEFAULT_GRID_DT } else { crate::tdci::DEFAULT_DT }),
            t_end: v.real("numerics.t_end"),
            stepper: match v.text("numerics.stepper") {
                Some("split") => Stepper::Split,
                _ => Stepper::Rk4,
            },
            sample_stride: v.count("numerics.sample_stride").unwrap_or(if grid_like { DEFAULT_GRID_STRIDE } else { 1 }),
            population_stride: v.count("numerics.population_stride").unwrap_or(0),
            norm_divide: v.flag("numerics.norm_divide").unwrap_or(true),
        };
        if !(numerics.dt > 0.0) {
            errors.push(format!("`numerics.dt` must be > 0, got {}", numerics.dt));
        }
        if numerics.sample_stride == 0 {
            errors.push("`numerics.sample_stride` must be >= 1".into());
        }
        if let Some(t) = numerics.t_end {
            if !(t > 0.0) {
                errors.push(format!("`numerics.t_end` must be > 0, got {t}"));
            }
        }
        let relax = Relaxation {
            dtau: v.real("relax.dtau").unwrap_or(0.05),
            tol: v.real("relax.tol").unwrap_or(1e-10),
            max_iterations: v.count("relax.max_iterations").unwrap_or(200_000),
        };
        if !(relax.dtau > 0.0 && relax.tol > 0.0) {
            errors.push("`relax.dtau` and `relax.tol` must be > 0".into());
        }

        let basis = BasisSettings {
            electronic_data: v.text("basis.electronic_data").map(PathBuf::from),
            n_photon: v.count("basis.n_photon").unwrap_or(1),
            n_states: v.count("basis.n_states"),
            report_top_k: v.count("basis.report_top_k").unwrap_or(10),
        };
        if run_mode == Mode::Basis && basis.electronic_data.is_none() {
            errors.push("basis runs need `basis.electronic_data`".into());
        }
        if basis.n_photon == 0 {
            errors.push("`basis.n_photon` must be >= 1".into());
        }
        if basis.n_states == Some(0) {
            errors.push("`basis.n_states` must be >= 1".into());
        }
        let ionization = Ionization {
            enabled: v.flag("ionization.enabled").unwrap_or(false),
            escape_length: v.real("ionization.escape_length"),
        };
        if ionization.enabled && run_mode == Mode::Basis && ionization.escape_length.is_none() {
            errors.push("ionization is enabled but the escape length `ionization.escape_length` is missing".into());
        }
        if let Some(d) = ionization.escape_length {
            if !(d > 0.0) {
                errors.push(format!("`ionization.escape_length` must be > 0, got {d}"));
            }
        }
        let export_states = v.count("export.n_states").unwrap_or(50);
        if export_states == 0 {
            errors.push("`export.n_states` must be >= 1".into());
        }

        let analysis = Analysis {
            input: v.text("analysis.input").map(PathBuf::from),
            omega0: v.real("analysis.omega0").or(pulse.map(|p| p.omega())),
            smoothing_width: v.real("analysis.smoothing_width"),
            fit_range: (v.real("analysis.fit_lo"), v.real("analysis.fit_hi")),
        };
        if matches!(mode, Mode::Spectrum | Mode::Fit) {
            if analysis.input.is_none() {
                errors.push(format!("{} runs need `analysis.input`", mode.name()));
            }
            if analysis.omega0.is_none() {
                errors.push("missing key `analysis.omega0` (or a laser frequency)".into());
            }
        }
        if let (Some(lo), Some(hi)) = analysis.fit_range {
            if !(lo < hi) {
                errors.push(format!("fit range [{lo}, {hi}] is empty"));
            }
        }

        let sweep = SweepAxes {
            mode: run_mode,
            omega_c: v.reals("sweep.omega_c"),
            g_c: v.reals("sweep.g_c"),
            n_photon: v.counts("sweep.n_photon"),
            base_g_c: v.real("cavity.g_c").unwrap_or(0.0),
        };
        if mode == Mode::Sweep {
            if sweep.omega_c.is_empty() && sweep.g_c.is_empty() && sweep.n_photon.is_empty() {
                errors.push("sweeps need at least one of `sweep.omega_c`, `sweep.g_c`, `sweep.n_photon`".into());
            }
            if sweep.omega_c.is_empty() && cavity.is_none() && !sweep.g_c.is_empty() {
                errors.push("a coupling sweep needs `cavity.omega_c` or `sweep.omega_c`".into());
            }
        } else if !sweep.omega_c.is_empty() || !sweep.g_c.is_empty() || !sweep.n_photon.is_empty() || v.get("sweep.mode").is_some() {
            errors.push("`sweep.*` keys are only valid with `mode = sweep`".into());
        }

        Some(Self {
            mode,
            output_dir: PathBuf::from(v.text("output.dir").unwrap_or("out")),
            checkpoint: v.flag("output.checkpoint").unwrap_or(false),
            atom,
            grid,
            caps,
            cavity,
            pulse,
            numerics,
            relax,
            basis,
            ionization,
            export_states,
            analysis,
            sweep,
            entries,
        })
    }

    /// End of the propagation window: `numerics.t_end` or the pulse end.
    pub fn t_end(&self) -> Option<f64> {
        self.numerics.t_end.or(self.pulse.map(|p| p.end_time()))
    }

    /// [`Self::t_end`] rounded up to a whole number of sampling intervals, so
    /// the recorded trajectory is uniformly sampled.
    pub fn propagation_end(&self) -> Option<f64> {
        let interval = self.numerics.dt * self.numerics.sample_stride as f64;
        self.t_end().map(|t| whole_steps(t, interval))
    }

    /// Canonical listing of the effective settings.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("mode", self.mode.name().into());
        kv("output.dir", self.output_dir.display().to_string());
        kv("atom.charge", format!("{}", self.atom.charge));
        kv("atom.eta", format!("{}", self.atom.eta));
        kv("atom.center", format!("{}", self.atom.center));
        kv("grid.n_z", format!("{}", self.grid.n_z()));
        kv("grid.z_max", format!("{}", self.grid.electron.extent()));
        if let Some(ax) = self.grid.cavity {
            kv("grid.n_xc", format!("{}", ax.len()));
            kv("grid.xc_max", format!("{}", ax.extent()));
        }
        match self.caps.electron {
            Some(c) => {
                kv("cap.electron.onset", format!("{}", c.onset));
                kv("cap.electron.strength", format!("{}", c.strength));
            }
            None => kv("cap.electron", "false".into()),
        }
        if let Some(c) = self.caps.cavity {
            kv("cap.cavity.onset", format!("{}", c.onset));
            kv("cap.cavity.strength", format!("{}", c.strength));
        }
        if let Some(c) = &self.cavity {
            kv("cavity.omega_c", format!("{}", c.omega()));
            kv("cavity.g_c", format!("{}", c.coupling()));
            kv("cavity.polarization", vec3(c.polarization()));
        }
        if let Some(p) = &self.pulse {
            kv("laser.amplitude", format!("{}", p.amplitude()));
            kv("laser.omega", format!("{}", p.omega()));
            kv("laser.cycles", format!("{}", p.n_cycles()));
            kv("laser.polarization", vec3(p.polarization()));
        }
        kv("numerics.dt", format!("{}", self.numerics.dt));
        if let Some(t) = self.numerics.t_end {
            kv("numerics.t_end", format!("{t}"));
        }
        let stepper = match self.numerics.stepper {
            Stepper::Rk4 => "rk4",
            Stepper::Split => "split",
        };
        kv("numerics.stepper", stepper.into());
        kv("numerics.sample_stride", format!("{}", self.numerics.sample_stride));
        kv("numerics.population_stride", format!("{}", self.numerics.population_stride));
        kv("numerics.norm_divide", format!("{}", self.numerics.norm_divide));
        kv("relax.dtau", format!("{}", self.relax.dtau));
        kv("relax.tol", format!("{}", self.relax.tol));
        kv("relax.max_iterations", format!("{}", self.relax.max_iterations));
        if let Some(p) = &self.basis.electronic_data {
            kv("basis.electronic_data", p.display().to_string());
        }
        kv("basis.n_photon", format!("{}", self.basis.n_photon));
        if let Some(n) = self.basis.n_states {
            kv("basis.n_states", format!("{n}"));
        }
        kv("basis.report_top_k", format!("{}", self.basis.report_top_k));
        kv("ionization.enabled", format!("{}", self.ionization.enabled));
        if let Some(d) = self.ionization.escape_length {
            kv("ionization.escape_length", format!("{d}"));
        }
        if self.mode == Mode::Export {
            kv("export.n_states", format!("{}", self.export_states));
        }
        if let Some(p) = &self.analysis.input {
            kv("analysis.input", p.display().to_string());
        }
        if let Some(w) = self.analysis.omega0 {
            kv("analysis.omega0", format!("{w}"));
        }
        if let Some(w) = self.analysis.smoothing_width {
            kv("analysis.smoothing_width", format!("{w}"));
        }
        if let Some(w) = self.analysis.fit_range.0 {
            kv("analysis.fit_lo", format!("{w}"));
        }
        if let Some(w) = self.analysis.fit_range.1 {
            kv("analysis.fit_hi", format!("{w}"));
        }
        if self.mode == Mode::Sweep {
            kv("sweep.mode", self.sweep.mode.name().into());
            let list = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(", ");
            if !self.sweep.omega_c.is_empty() {
                kv("sweep.omega_c", list(&self.sweep.omega_c));
            }
            if !self.sweep.g_c.is_empty() {
                kv("sweep.g_c", list(&self.sweep.g_c));
            }
            if !self.sweep.n_photon.is_empty() {
                let l: Vec<String> = self.sweep.n_photon.iter().map(|n| n.to_string()).collect();
                kv("sweep.n_photon", l.join(", "));
            }
        }
        s
    }

    /// Cartesian product of the sweep axes as `(key, config)` pairs, each run
    /// writing below `output_dir/<key>`. Keys sort in axis order.
    pub fn expand_sweep(&self) -> Result<Vec<(String, RunConfig)>> {
        if self.mode != Mode::Sweep {
            return Err(Error::Config("not a sweep configuration".into()));
        }
        let base_w = self.cavity.map(|c| c.omega());
        let base_g = self.sweep.base_g_c;
        let ws: Vec<Option<f64>> = if self.sweep.omega_c.is_empty() {
            vec![base_w]
        } else {
            self.sweep.omega_c.iter().map(|&w| Some(w)).collect()
        };
        let gs: Vec<f64> = if self.sweep.g_c.is_empty() { vec![base_g] } else { self.sweep.g_c.clone() };
        let nps: Vec<usize> = if self.sweep.n_photon.is_empty() {
            vec![self.basis.n_photon]
        } else {
            self.sweep.n_photon.clone()
        };
        let mut out = Vec::new();
        for (iw, w) in ws.iter().enumerate() {
            for (ig, g) in gs.iter().enumerate() {
                for (ip, np) in nps.iter().enumerate() {
                    let key = format!("run{iw:03}-{ig:03}-{ip:03}");
                    let mut text = String::new();
                    for (k, v) in &self.entries {
                        if k.starts_with("sweep.") || k == "mode" || k == "output.dir" || k == "cavity.omega_c" || k == "cavity.g_c" || k == "basis.n_photon" {
                            continue;
                        }
                        let _ = writeln!(text, "{k} = {v}");
                    }
                    if let Some(w) = w {
                        let _ = writeln!(text, "cavity.omega_c = {w}");
                        let _ = writeln!(text, "cavity.g_c = {g}");
                    }
                    let _ = writeln!(text, "basis.n_photon = {np}");
                    let _ = writeln!(text, "output.dir = {}", self.output_dir.join(&key).display());
                    let cfg = RunConfig::parse(&text, Some(self.sweep.mode)).map_err(|e| match e {
                        Error::ConfigList(l) => Error::ConfigList(l.into_iter().map(|m| format!("{key}: {m}")).collect()),
                        other => other,
                    })?;
                    out.push((key, cfg));
                }
            }
        }
        Ok(out)
    }
}

/// Smallest multiple of `dt` not below `t` (up to rounding).
pub fn whole_steps(t: f64, dt: f64) -> f64 {
    (t / dt - 1e-9).ceil() * dt
}

fn note(errors: &mut Vec<String>, r: Result<()>) {
    if let Err(e) = r {
        errors.push(e.to_string());
    }
}

fn vec3(v: Vec3) -> String {
    format!("{} {} {}", v[0], v[1], v[2])
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL_GRID: &str = "mode = grid\nlaser.amplitude = 0.09\nlaser.omega = 0.05\nlaser.cycles = 10\n";

    #[test]
    fn minimal_grid_config_uses_defaults() {
        let c = RunConfig::parse(MINIMAL_GRID, None).unwrap();
        assert_eq!(c.grid.n_z(), 512);
        assert_eq!(c.grid.electron.extent(), 100.0);
        assert_eq!(c.atom.eta, 0.9871);
        assert_eq!(c.atom.charge, 1.0);
        assert_eq!(c.numerics.dt, 0.001);
        assert!(c.cavity.is_none() && c.grid.cavity.is_none());
        let echo = c.echo();
        assert!(echo.contains("atom.eta = 0.9871\n") && echo.contains("grid.n_z = 512\n") && echo.contains("numerics.dt = 0.001\n"));
        // the echo parses back to the same settings
        let again = RunConfig::parse(&echo, None).unwrap();
        assert_eq!(again.echo(), echo);
    }

    #[test]
    fn all_errors_are_collected() {
        let text = "mode = grid\nlaser.amplitude = 0.09\nlaser.omega = 0.05 fs\nlaser.cycles = ten\nbogus = 1\ngrid.n_z = 512\ngrid.n_z = 256\n";
        match RunConfig::parse(text, None) {
            Err(Error::ConfigList(list)) => {
                let joined = list.join("\n");
                assert!(joined.contains("unit `fs`"), "{joined}");
                assert!(joined.contains("laser.cycles"));
                assert!(joined.contains("unknown key `bogus`"));
                assert!(joined.contains("repeats"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_escape_length_is_named() {
        let text = "mode = basis\nbasis.electronic_data = h2.dat\nionization.enabled = true\nlaser.amplitude = 0.05\nlaser.omega = 0.057\nlaser.cycles = 10\n";
        let err = RunConfig::parse(text, None).unwrap_err().to_string();
        assert!(err.contains("ionization.escape_length"), "{err}");
    }

    #[test]
    fn units_convert() {
        let text = format!("{MINIMAL_GRID}grid.z_max = 5.29177210903 nm\nnumerics.t_end = 1 fs\n");
        let c = RunConfig::parse(&text, None).unwrap();
        assert!((c.grid.electron.extent() - 100.0).abs() < 1e-9);
        assert!((c.numerics.t_end.unwrap() - 41.341373335).abs() < 1e-6);
        let text = "mode = grid\nlaser.amplitude = 0.09\nlaser.omega = 800 nm\nlaser.cycles = 3\n";
        let c = RunConfig::parse(text, None).unwrap();
        assert!((c.pulse.unwrap().omega() - 0.05695).abs() < 1e-4);
    }

    #[test]
    fn mode_conflicts_are_rejected() {
        assert!(RunConfig::parse(MINIMAL_GRID, Some(Mode::Basis)).is_err());
        assert!(RunConfig::parse(&MINIMAL_GRID.replace("mode = grid\n", ""), Some(Mode::Grid)).is_ok());
        assert!(RunConfig::parse(&MINIMAL_GRID.replace("mode = grid\n", ""), None).is_err());
    }

    #[test]
    fn cavity_grid_comes_from_the_table() {
        let c = RunConfig::parse(&format!("{MINIMAL_GRID}cavity.omega_c = 0.05\ncavity.g_c = 0.01\n"), None).unwrap();
        let ax = c.grid.cavity.unwrap();
        assert_eq!((ax.len(), ax.extent()), (256, 50.0));
        assert_eq!(c.caps.cavity.unwrap().onset, 40.0);
        let err = RunConfig::parse(&format!("{MINIMAL_GRID}cavity.omega_c = 0.07\n"), None).unwrap_err();
        assert!(err.to_string().contains("grid.n_xc"));
        let ok = RunConfig::parse(
            &format!("{MINIMAL_GRID}cavity.omega_c = 0.07\ngrid.n_xc = 64\ngrid.xc_max = 30\ncap.cavity.onset = 25\ncap.cavity.strength = 0.01\n"),
            None,
        )
        .unwrap();
        assert_eq!(ok.grid.n_xc(), 64);
    }

    #[test]
    fn sweep_expands_cartesian_product() {
        let text = "mode = sweep\nsweep.mode = basis\nbasis.electronic_data = h2.dat\ncavity.g_c = 0.01\nlaser.amplitude = 0.05\nlaser.omega = 0.057\nlaser.cycles = 10\noutput.dir = root\nsweep.omega_c = 0.057, 0.1, 0.2, 0.3, 0.467\n";
        let c = RunConfig::parse(text, None).unwrap();
        let runs = c.expand_sweep().unwrap();
        assert_eq!(runs.len(), 5);
        for ((key, r), w) in runs.iter().zip([0.057, 0.1, 0.2, 0.3, 0.467]) {
            assert_eq!(r.mode, Mode::Basis);
            assert_eq!(r.cavity.unwrap().omega(), w);
            assert_eq!(r.cavity.unwrap().coupling(), 0.01);
            assert_eq!(r.output_dir, Path::new("root").join(key));
        }
        let text2 = text.replace("sweep.omega_c = 0.057, 0.1, 0.2, 0.3, 0.467", "sweep.g_c = 0, 0.01\nsweep.n_photon = 2, 5, 10");
        assert!(RunConfig::parse(&text2, None).is_err());
        let text3 = format!("{}cavity.omega_c = 0.057\n", text2);
        assert_eq!(RunConfig::parse(&text3, None).unwrap().expand_sweep().unwrap().len(), 6);
    }
}
