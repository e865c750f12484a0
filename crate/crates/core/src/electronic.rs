//! Zero-order electronic states ingested from an external electronic-structure code.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::pulse::Vec3;

/// One CIS amplitude `D^r_{a,i}` of state `i` for the excitation `a -> r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CisAmplitude {
    pub state: usize,
    pub occupied: usize,
    pub virtual_orbital: usize,
    pub coefficient: f64,
    /// Orbital energy `eps_r` of the virtual orbital.
    pub virtual_energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElectronicData {
    /// Ascending state energies, `energies[0]` the ground state.
    pub energies: Vec<f64>,
    /// Dipole matrices for x, y, z; absent components are `None`.
    pub dipole: [Option<DMatrix<f64>>; 3],
    pub rates: Option<Vec<f64>>,
    pub cis: Option<Vec<CisAmplitude>>,
    pub ionization_potential: Option<f64>,
    pub escape_length: Option<f64>,
}

/// Tolerance on `|mu_ij - mu_ji|` accepted by [`ElectronicData::validate`].
pub const DIPOLE_SYMMETRY_TOL: f64 = 1e-8;

impl ElectronicData {
    /// Data with only a z dipole and no ionization information.
    pub fn new(energies: Vec<f64>, dipole_z: DMatrix<f64>) -> Result<Self> {
        let d = Self {
            energies,
            dipole: [None, None, Some(dipole_z)],
            rates: None,
            cis: None,
            ionization_potential: None,
            escape_length: None,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn n_states(&self) -> usize {
        self.energies.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_states();
        if n == 0 {
            return Err(Error::Domain("electronic data has no states".into()));
        }
        if self.energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::Domain("state energies must be finite".into()));
        }
        if self.energies.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Domain("state energies must be ascending".into()));
        }
        if self.dipole.iter().all(Option::is_none) {
            return Err(Error::Domain("electronic data has no dipole matrix".into()));
        }
        for (axis, m) in ["x", "y", "z"].iter().zip(&self.dipole) {
            let Some(m) = m else { continue };
            if m.shape() != (n, n) {
                return Err(Error::Domain(format!("dipole_{axis} is {:?}, expected {n}x{n}", m.shape())));
            }
            for i in 0..n {
                for j in 0..i {
                    if !m[(i, j)].is_finite() || (m[(i, j)] - m[(j, i)]).abs() > DIPOLE_SYMMETRY_TOL {
                        return Err(Error::Domain(format!(
                            "dipole_{axis} is not symmetric at ({i}, {j}): {} vs {}",
                            m[(i, j)],
                            m[(j, i)]
                        )));
                    }
                }
                if !m[(i, i)].is_finite() {
                    return Err(Error::Domain(format!("dipole_{axis} has a non-finite diagonal")));
                }
            }
        }
        if let Some(r) = &self.rates {
            if r.len() != n {
                return Err(Error::Domain(format!("{} rates for {n} states", r.len())));
            }
            if r.iter().any(|g| !(*g >= 0.0) || !g.is_finite()) {
                return Err(Error::Domain("ionization rates must be finite and >= 0".into()));
            }
        }
        if let Some(rows) = &self.cis {
            if let Some(bad) = rows.iter().find(|r| r.state >= n) {
                return Err(Error::Domain(format!("CIS amplitude refers to state {} of {n}", bad.state)));
            }
            if rows.iter().any(|r| !r.coefficient.is_finite() || !r.virtual_energy.is_finite()) {
                return Err(Error::Domain("CIS amplitudes must be finite".into()));
            }
        }
        Ok(())
    }

    /// Dipole projected on the unit vector `e`, `sum_a e_a mu^a`.
    pub fn projected_dipole(&self, e: Vec3) -> Result<DMatrix<f64>> {
        let n = self.n_states();
        let mut out = DMatrix::zeros(n, n);
        for (axis, (&c, m)) in e.iter().zip(&self.dipole).enumerate() {
            if c == 0.0 {
                continue;
            }
            let m = m.as_ref().ok_or_else(|| {
                Error::Domain(format!("dipole component {} is needed but missing", ["x", "y", "z"][axis]))
            })?;
            out += m * c;
        }
        Ok(out)
    }

    /// Rates from the `[rates]` data, or from the CIS amplitudes with the given
    /// escape length (falling back to the stored one).
    pub fn resolve_rates(&self, escape_length: Option<f64>) -> Result<Vec<f64>> {
        if let Some(r) = &self.rates {
            return Ok(r.clone());
        }
        let rows = self
            .cis
            .as_ref()
            .ok_or_else(|| Error::Config("ionization needs either [rates] or [cis] in the electronic data".into()))?;
        let ip = self
            .ionization_potential
            .ok_or_else(|| Error::Config("ionization from CIS amplitudes needs I_p in [meta]".into()))?;
        let d = escape_length
            .or(self.escape_length)
            .ok_or_else(|| Error::Config("missing escape length `ionization.escape_length`".into()))?;
        ionization_rates_cis(&self.energies, rows, ip, d)
    }
}

/// Heuristic ionization rates `Gamma_i = sum_{a,r} |D^r_{a,i}|² sqrt(eps_r) / d`.
///
/// States whose excitation energy `E_i - E_0` lies below `ip` do not ionize, and
/// virtual orbitals with `eps_r < 0` are bound and contribute nothing.
pub fn ionization_rates_cis(energies: &[f64], rows: &[CisAmplitude], ip: f64, escape_length: f64) -> Result<Vec<f64>> {
    if !(escape_length > 0.0) || !escape_length.is_finite() {
        return Err(Error::Config(format!("escape length must be > 0, got {escape_length}")));
    }
    let Some(&e0) = energies.first() else {
        return Ok(Vec::new());
    };
    let mut rates = vec![0.0; energies.len()];
    for r in rows {
        let e = *energies
            .get(r.state)
            .ok_or_else(|| Error::Domain(format!("CIS amplitude refers to state {} of {}", r.state, energies.len())))?;
        if e - e0 < ip || r.virtual_energy <= 0.0 {
            continue;
        }
        rates[r.state] += r.coefficient * r.coefficient * r.virtual_energy.sqrt() / escape_length;
    }
    Ok(rates)
}
