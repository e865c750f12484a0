//! Hartree atomic units (hbar = e = m_e = E_h = 1) and conversions to laboratory units.
//!
//! Everything inside the crate is expressed in atomic units; these helpers are only
//! used where values enter or leave the program.

use std::f64::consts::PI;

/// CODATA 2018 conversion factors.
#[derive(Debug, Clone, Copy)]
pub struct AtomicUnits;

impl AtomicUnits {
    pub const HBAR: f64 = 1.0;
    pub const ELECTRON_CHARGE: f64 = 1.0;
    pub const ELECTRON_MASS: f64 = 1.0;
    pub const HARTREE: f64 = 1.0;

    /// 1 E_h in eV.
    pub const HARTREE_IN_EV: f64 = 27.211_386_245_988;
    /// 1 a_0 in nm.
    pub const BOHR_IN_NM: f64 = 0.052_917_721_090_3;
    /// 1 hbar/E_h in fs.
    pub const TIME_IN_FS: f64 = 0.024_188_843_265_857;
    /// Speed of light in a_0 E_h / hbar.
    pub const SPEED_OF_LIGHT: f64 = 137.035_999_084;

    pub fn time_to_fs(t: f64) -> f64 {
        t * Self::TIME_IN_FS
    }

    pub fn time_from_fs(fs: f64) -> f64 {
        fs / Self::TIME_IN_FS
    }

    pub fn energy_to_ev(e: f64) -> f64 {
        e * Self::HARTREE_IN_EV
    }

    pub fn energy_from_ev(ev: f64) -> f64 {
        ev / Self::HARTREE_IN_EV
    }

    pub fn length_to_nm(l: f64) -> f64 {
        l * Self::BOHR_IN_NM
    }

    pub fn length_from_nm(nm: f64) -> f64 {
        nm / Self::BOHR_IN_NM
    }

    /// Angular frequency (E_h/hbar) of light with the given vacuum wavelength.
    pub fn omega_from_wavelength_nm(nm: f64) -> f64 {
        2.0 * PI * Self::SPEED_OF_LIGHT / Self::length_from_nm(nm)
    }

    /// Vacuum wavelength (nm) of light with angular frequency `omega`.
    pub fn wavelength_nm_from_omega(omega: f64) -> f64 {
        Self::length_to_nm(2.0 * PI * Self::SPEED_OF_LIGHT / omega)
    }
}
