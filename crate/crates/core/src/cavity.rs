//! Single-mode cavity parameters.

use crate::error::{Error, Result};
use crate::pulse::{check_unit_vector, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavitySpec {
    omega: f64,
    coupling: f64,
    polarization: Vec3,
}

impl CavitySpec {
    pub fn new(omega: f64, coupling: f64, polarization: Vec3) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::Domain(format!("cavity frequency must be > 0, got {omega}")));
        }
        if !(coupling >= 0.0) || !coupling.is_finite() {
            return Err(Error::Domain(format!("coupling constant must be >= 0, got {coupling}")));
        }
        let polarization = check_unit_vector(polarization, "cavity")?;
        Ok(Self {
            omega,
            coupling,
            polarization,
        })
    }

    pub fn along_z(omega: f64, coupling: f64) -> Result<Self> {
        Self::new(omega, coupling, [0.0, 0.0, 1.0])
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn polarization(&self) -> Vec3 {
        self.polarization
    }

    /// Same mode with a different coupling constant.
    pub fn with_coupling(&self, coupling: f64) -> Result<Self> {
        Self::new(self.omega, coupling, self.polarization)
    }

    /// Prefactor `g²/(hbar w)` of the dipole self-energy.
    pub fn dse_prefactor(&self) -> f64 {
        self.coupling * self.coupling / self.omega
    }
}

/// Coupling constant `g = sqrt(hbar w / (2 eps V))` of a mode with effective volume `volume`.
pub fn coupling_from_volume(omega: f64, permittivity: f64, volume: f64) -> Result<f64> {
    for (name, v) in [("frequency", omega), ("permittivity", permittivity), ("volume", volume)] {
        if !(v > 0.0) {
            return Err(Error::Domain(format!("cavity {name} must be > 0, got {v}")));
        }
    }
    Ok((omega / (2.0 * permittivity * volume)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_radicand() {
        assert_eq!(coupling_from_volume(2.0, 1.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn inverted_volume_round_trip() {
        // V = w / (2 eps g²)
        let v: f64 = 0.057 / (2.0 * 1e-4);
        assert!((v - 285.0).abs() < 1e-9);
        assert!((coupling_from_volume(0.057, 1.0, v).unwrap() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn free_space_limit_and_monotonicity() {
        assert!(coupling_from_volume(0.05, 1.0, 1e30).unwrap() < 1e-15);
        let mut prev = f64::INFINITY;
        for v in [1.0, 10.0, 100.0, 1e4] {
            let g = coupling_from_volume(0.05, 1.0, v).unwrap();
            assert!(g < prev);
            prev = g;
        }
        assert!(coupling_from_volume(0.1, 1.0, 10.0).unwrap() > coupling_from_volume(0.05, 1.0, 10.0).unwrap());
    }

    #[test]
    fn rejects_non_positive() {
        assert!(coupling_from_volume(0.0, 1.0, 1.0).is_err());
        assert!(coupling_from_volume(0.1, -1.0, 1.0).is_err());
        assert!(coupling_from_volume(0.1, 1.0, 0.0).is_err());
        assert!(CavitySpec::along_z(0.0, 0.01).is_err());
        assert!(CavitySpec::along_z(0.05, -0.01).is_err());
    }
}
