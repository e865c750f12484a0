//! Grid solver for a one-dimensional soft-core atom coupled to one cavity
//! displacement coordinate.
//!
//! The wavefunction lives on the product of an electron grid `z` and an optional
//! cavity grid `x_c`; both are equidistant, symmetric about the origin and include
//! their end points. Kinetic terms are applied spectrally (FFT) on the periodic
//! extension of each grid.

mod checkpoint;
mod export;
mod fourier;
mod hamiltonian;
mod potentials;
mod propagate;
mod stationary;

pub use checkpoint::{read_checkpoint, read_checkpoint_bytes, write_checkpoint, write_checkpoint_bytes, Checkpoint};
pub use export::export_electronic_data;
pub use fourier::{dense_kinetic_matrix, SpectralKinetic};
pub use hamiltonian::{GridHamiltonian, GridObservables};
pub use potentials::{build_potentials, Potentials};
pub use propagate::{imaginary_time_ground_state, max_imaginary_step, propagate, GroundState, PropagationSettings, Stepper};
pub use stationary::{solve_stationary, solve_stationary_electronic, StationaryStates};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// One equidistant coordinate axis `x_j = -extent + j dx`, `dx = 2 extent / (n - 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    n: usize,
    extent: f64,
}

impl Axis {
    pub fn new(n: usize, extent: f64) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::Domain(format!("grid size must be a power of two >= 2, got {n}")));
        }
        if !(extent > 0.0) || !extent.is_finite() {
            return Err(Error::Domain(format!("grid half-extent must be > 0, got {extent}")));
        }
        Ok(Self { n, extent })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / (self.n - 1) as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        -self.extent + j as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.point(j)).collect()
    }

    /// Angular wavenumbers in FFT order for the periodic extension of length `n dx`.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n as i64;
        let dk = 2.0 * std::f64::consts::PI / (self.n as f64 * self.spacing());
        (0..n)
            .map(|j| {
                let m = if j < (n + 1) / 2 { j } else { j - n };
                m as f64 * dk
            })
            .collect()
    }
}

/// Electron grid plus an optional cavity-coordinate grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub electron: Axis,
    pub cavity: Option<Axis>,
}

impl GridSpec {
    pub fn new(n_z: usize, z_max: f64, n_xc: usize, xc_max: f64) -> Result<Self> {
        Ok(Self {
            electron: Axis::new(n_z, z_max)?,
            cavity: Some(Axis::new(n_xc, xc_max)?),
        })
    }

    pub fn electron_only(n_z: usize, z_max: f64) -> Result<Self> {
        Ok(Self {
            electron: Axis::new(n_z, z_max)?,
            cavity: None,
        })
    }

    /// 512 points on [-100, 100] bohr, no cavity.
    pub fn default_electron() -> Self {
        Self {
            electron: Axis { n: 512, extent: 100.0 },
            cavity: None,
        }
    }

    pub fn n_z(&self) -> usize {
        self.electron.len()
    }

    /// Number of cavity points; 1 when the cavity is absent.
    pub fn n_xc(&self) -> usize {
        self.cavity.map_or(1, |a| a.len())
    }

    pub fn len(&self) -> usize {
        self.n_z() * self.n_xc()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Volume element `dz dx_c` (just `dz` without a cavity).
    pub fn volume_element(&self) -> f64 {
        self.electron.spacing() * self.cavity.map_or(1.0, |a| a.spacing())
    }
}

/// Soft-core potential `-Z / (|z - R| + eta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoftCoreModel {
    pub charge: f64,
    pub eta: f64,
    pub center: f64,
}

impl SoftCoreModel {
    pub fn new(charge: f64, eta: f64, center: f64) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(Error::Domain(format!("soft-core screening must be > 0, got {eta}")));
        }
        Ok(Self { charge, eta, center })
    }

    pub fn potential(&self, z: f64) -> f64 {
        -self.charge / ((z - self.center).abs() + self.eta)
    }
}

impl Default for SoftCoreModel {
    fn default() -> Self {
        Self {
            charge: 1.0,
            eta: 0.9871,
            center: 0.0,
        }
    }
}

/// Quadratic absorber `a (|z| - s)²` beyond `|z| = s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElectronCap {
    pub onset: f64,
    pub strength: f64,
}

/// Linear absorber `a_W (|x_c| - W_s)` beyond `|x_c| = W_s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityCap {
    pub onset: f64,
    pub strength: f64,
}

/// Default electron absorber strength in E_h / a_0².
pub const ELECTRON_CAP_STRENGTH: f64 = 1.0135e-4;
/// Default electron absorber onset as a fraction of the grid half-extent.
pub const ELECTRON_CAP_ONSET_FRACTION: f64 = 0.67;

impl ElectronCap {
    pub fn from_fraction(fraction: f64, z_max: f64, strength: f64) -> Self {
        Self {
            onset: fraction * z_max,
            strength,
        }
    }

    pub fn value(&self, z: f64) -> f64 {
        let d = z.abs() - self.onset;
        if d >= 0.0 {
            self.strength * d * d
        } else {
            0.0
        }
    }
}

impl CavityCap {
    pub fn value(&self, x: f64) -> f64 {
        let d = x.abs() - self.onset;
        if d >= 0.0 {
            self.strength * d
        } else {
            0.0
        }
    }
}

/// Complex absorbing potentials applied symmetrically at both ends of each grid.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CapSpec {
    pub electron: Option<ElectronCap>,
    pub cavity: Option<CavityCap>,
}

impl CapSpec {
    pub fn none() -> Self {
        Self::default()
    }

    /// Checks strengths and that each onset lies strictly inside its grid.
    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        if let Some(e) = self.electron {
            if !(e.strength >= 0.0) || !(e.onset >= 0.0 && e.onset < grid.electron.extent()) {
                return Err(Error::Domain(format!(
                    "electron CAP needs strength >= 0 and 0 <= onset < {}, got a = {}, s = {}",
                    grid.electron.extent(),
                    e.strength,
                    e.onset
                )));
            }
        }
        if let Some(c) = self.cavity {
            let axis = grid
                .cavity
                .ok_or_else(|| Error::Domain("cavity CAP given for a grid without cavity coordinate".into()))?;
            if !(c.strength >= 0.0) || !(c.onset >= 0.0 && c.onset < axis.extent()) {
                return Err(Error::Domain(format!(
                    "cavity CAP needs strength >= 0 and 0 <= onset < {}, got a_W = {}, W_s = {}",
                    axis.extent(),
                    c.strength,
                    c.onset
                )));
            }
        }
        Ok(())
    }

    /// Total absorbing rate `Gamma(z) + Gamma(x_c)` on the flattened grid.
    pub fn rates(&self, grid: &GridSpec) -> Vec<f64> {
        let zs = grid.electron.points();
        let xs = grid.cavity.map_or_else(|| vec![0.0], |a| a.points());
        let mut out = Vec::with_capacity(grid.len());
        for &z in &zs {
            let gz = self.electron.map_or(0.0, |c| c.value(z));
            for &x in &xs {
                let gx = match (self.cavity, grid.cavity) {
                    (Some(c), Some(_)) => c.value(x),
                    _ => 0.0,
                };
                out.push(gz + gx);
            }
        }
        out
    }
}

/// Tuned cavity grid and absorber for one of the tabulated cavity frequencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityGridPreset {
    pub omega_c: f64,
    pub n_points: usize,
    pub x_max: f64,
    pub cap_onset: f64,
    pub cap_strength: f64,
}

const CAVITY_PRESETS: [CavityGridPreset; 10] = [
    preset(0.03, 256, 65.0, 45.0, 0.005),
    preset(0.05, 256, 50.0, 40.0, 0.01),
    preset(0.1, 64, 20.0, 16.0, 0.025),
    preset(0.2, 64, 20.0, 16.0, 0.025),
    preset(0.3, 64, 20.0, 16.0, 0.025),
    preset(0.3185, 64, 20.0, 16.0, 0.025),
    preset(0.375, 64, 20.0, 16.0, 0.025),
    preset(0.45, 32, 10.0, 8.0, 0.05),
    preset(0.5, 32, 10.0, 8.0, 0.05),
    preset(0.6, 32, 8.0, 7.0, 0.1),
];

const fn preset(omega_c: f64, n_points: usize, x_max: f64, cap_onset: f64, cap_strength: f64) -> CavityGridPreset {
    CavityGridPreset {
        omega_c,
        n_points,
        x_max,
        cap_onset,
        cap_strength,
    }
}

/// Looks up the tabulated cavity grid for `omega_c`. There is no interpolation:
/// frequencies not in the table return `None` and need explicit grid values.
pub fn cavity_preset(omega_c: f64) -> Option<CavityGridPreset> {
    CAVITY_PRESETS.iter().copied().find(|p| (p.omega_c - omega_c).abs() < 1e-12)
}

pub fn cavity_presets() -> &'static [CavityGridPreset] {
    &CAVITY_PRESETS
}

/// Complex wavepacket on a [`GridSpec`], stored z-major (`psi[iz * n_xc + ix]`).
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub grid: GridSpec,
    pub psi: Vec<Complex64>,
    pub t: f64,
    norm: f64,
}

impl GridState {
    pub fn new(grid: GridSpec, psi: Vec<Complex64>, t: f64) -> Result<Self> {
        if psi.len() != grid.len() {
            return Err(Error::Domain(format!(
                "wavefunction has {} values, grid has {}",
                psi.len(),
                grid.len()
            )));
        }
        let mut s = Self { grid, psi, t, norm: 0.0 };
        s.refresh_norm();
        Ok(s)
    }

    /// Product state `phi(z) chi(x_c)` from real factors.
    pub fn product(grid: GridSpec, electron: &[f64], cavity: &[f64]) -> Result<Self> {
        if electron.len() != grid.n_z() || cavity.len() != grid.n_xc() {
            return Err(Error::Domain("factor lengths do not match the grid".into()));
        }
        let psi = electron
            .iter()
            .flat_map(|&a| cavity.iter().map(move |&b| Complex64::new(a * b, 0.0)))
            .collect();
        Self::new(grid, psi, 0.0)
    }

    /// Cached `<psi|psi>` as a grid sum.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn refresh_norm(&mut self) -> f64 {
        self.norm = grid_norm(&self.psi, self.grid.volume_element());
        self.norm
    }

    pub fn normalize(&mut self) {
        let n = self.refresh_norm();
        if n > 0.0 {
            let s = 1.0 / n.sqrt();
            self.psi.iter_mut().for_each(|c| *c *= s);
            self.refresh_norm();
        }
    }

    /// Grid inner product `<self|other>`.
    pub fn overlap(&self, other: &GridState) -> Complex64 {
        self.psi
            .iter()
            .zip(&other.psi)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.grid.volume_element()
    }
}

pub(crate) fn grid_norm(psi: &[Complex64], dv: f64) -> f64 {
    psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * dv
}

/// Normalized harmonic-oscillator ground state `exp(-w x² / 2)` on `axis`.
pub fn oscillator_ground_state(axis: &Axis, omega: f64, center: f64) -> Vec<f64> {
    let dx = axis.spacing();
    let mut v: Vec<f64> = axis
        .points()
        .iter()
        .map(|&x| (-0.5 * omega * (x - center).powi(2)).exp())
        .collect();
    let n = (v.iter().map(|a| a * a).sum::<f64>() * dx).sqrt();
    v.iter_mut().for_each(|a| *a /= n);
    v
}
