//! Classical driving pulse with a cos² envelope.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

pub(crate) fn check_unit_vector(v: Vec3, what: &str) -> Result<Vec3> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("{what} polarization must be a unit vector, |P| = {norm}")));
    }
    Ok(v)
}

/// Linearly polarized pulse `F(t) = F0 P cos(w0 (t - tp)) cos²(pi (t - tp) / 2 sigma)` on `[0, 2 sigma]`.
///
/// The half-length `sigma = n_cycles pi / w0` is derived, not stored, so the
/// pulse always contains exactly `n_cycles` carrier periods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    amplitude: f64,
    omega: f64,
    n_cycles: u32,
    polarization: Vec3,
}

impl PulseSpec {
    pub fn new(amplitude: f64, omega: f64, n_cycles: u32, polarization: Vec3) -> Result<Self> {
        if !(amplitude >= 0.0) || !amplitude.is_finite() {
            return Err(Error::Domain(format!("pulse amplitude must be >= 0, got {amplitude}")));
        }
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::Domain(format!("carrier frequency must be > 0, got {omega}")));
        }
        if n_cycles < 1 {
            return Err(Error::Domain("pulse needs at least one carrier cycle".into()));
        }
        let polarization = check_unit_vector(polarization, "pulse")?;
        Ok(Self {
            amplitude,
            omega,
            n_cycles,
            polarization,
        })
    }

    /// Pulse polarized along z.
    pub fn along_z(amplitude: f64, omega: f64, n_cycles: u32) -> Result<Self> {
        Self::new(amplitude, omega, n_cycles, [0.0, 0.0, 1.0])
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn n_cycles(&self) -> u32 {
        self.n_cycles
    }

    pub fn polarization(&self) -> Vec3 {
        self.polarization
    }

    pub fn sigma(&self) -> f64 {
        self.n_cycles as f64 * PI / self.omega
    }

    pub fn peak_time(&self) -> f64 {
        self.sigma()
    }

    pub fn end_time(&self) -> f64 {
        2.0 * self.sigma()
    }

    /// Scalar field strength along the polarization vector.
    pub fn envelope_field(&self, t: f64) -> f64 {
        let sigma = self.sigma();
        if !(0.0..=2.0 * sigma).contains(&t) {
            return 0.0;
        }
        let tau = t - sigma;
        let env = (PI * tau / (2.0 * sigma)).cos();
        self.amplitude * (self.omega * tau).cos() * env * env
    }

    /// Field vector at time `t`; exactly zero outside `[0, t_f]`.
    pub fn amplitude_at(&self, t: f64) -> Vec3 {
        let f = self.envelope_field(t);
        self.polarization.map(|p| p * f)
    }

    /// Field component along the unit vector `axis`.
    pub fn component(&self, t: f64, axis: Vec3) -> f64 {
        let proj: f64 = self.polarization.iter().zip(axis).map(|(p, a)| p * a).sum();
        proj * self.envelope_field(t)
    }

    /// Ponderomotive energy `F0² / (4 w0²)`.
    pub fn ponderomotive_energy(&self) -> f64 {
        self.amplitude * self.amplitude / (4.0 * self.omega * self.omega)
    }
}

/// Free-function form of [`PulseSpec::amplitude_at`].
pub fn pulse_amplitude(t: f64, pulse: &PulseSpec) -> Vec3 {
    pulse.amplitude_at(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::AtomicUnits;
    use proptest::prelude::*;

    #[test]
    fn peak_and_edges() {
        let p = PulseSpec::new(0.09, 0.05, 10, [0.0, 0.6, 0.8]).unwrap();
        let peak = p.amplitude_at(p.peak_time());
        assert!((peak[1] - 0.09 * 0.6).abs() < 1e-15);
        assert!((peak[2] - 0.09 * 0.8).abs() < 1e-15);
        assert!(p.envelope_field(0.0).abs() < 1e-15 * 0.09);
        assert!(p.envelope_field(p.end_time()).abs() < 1e-15 * 0.09);
        assert_eq!(p.envelope_field(-1.0), 0.0);
        assert_eq!(p.envelope_field(p.end_time() + 1e-9), 0.0);
    }

    #[test]
    fn pulse_duration_for_800nm() {
        let rounded = PulseSpec::along_z(0.09, 0.057, 10).unwrap();
        assert!((rounded.end_time() - 20.0 * PI / 0.057).abs() < 1e-12);
        assert!((rounded.end_time() - 1102.3).abs() < 0.05);
        // The quoted 1103.16 belongs to the exact 800 nm carrier, not the rounded one.
        let exact = PulseSpec::along_z(0.09, AtomicUnits::omega_from_wavelength_nm(800.0), 10).unwrap();
        assert!((exact.end_time() - 1103.16).abs() < 0.05, "{}", exact.end_time());
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(PulseSpec::along_z(-1.0, 0.05, 10).is_err());
        assert!(PulseSpec::along_z(0.1, 0.0, 10).is_err());
        assert!(PulseSpec::along_z(0.1, 0.05, 0).is_err());
        assert!(PulseSpec::new(0.1, 0.05, 10, [0.0, 0.0, 1.1]).is_err());
    }

    proptest! {
        #[test]
        fn envelope_is_symmetric_about_peak(tau in 0.0f64..700.0, n in 1u32..20) {
            let p = PulseSpec::along_z(0.07, 0.05, n).unwrap();
            let a = p.envelope_field(p.peak_time() + tau).abs();
            let b = p.envelope_field(p.peak_time() - tau).abs();
            prop_assert!((a - b).abs() <= 1e-12 * 0.07);
        }

        #[test]
        fn field_is_continuous(t in -10.0f64..1300.0) {
            let p = PulseSpec::along_z(0.09, 0.05, 10).unwrap();
            let h = 1e-7;
            let jump = (p.envelope_field(t + h) - p.envelope_field(t)).abs();
            prop_assert!(jump < 1e-7);
        }
    }
}
