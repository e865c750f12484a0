//! Coefficient propagation in a polaritonic (or bare electronic) eigenbasis.
//!
//! One step is the first-order splitting
//! `C <- V exp(i lambda F(t + dt/2) dt) V^T exp(-i (E - i Gamma/2) dt) C`,
//! where `mu_pq = V diag(lambda) V^T` is decomposed once per run.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::polariton::{PolaritonBasis, ZeroOrderWeight};
use crate::pulse::PulseSpec;
use crate::record::{PopulationRecord, TrajectoryRecord, TrajectorySample};

/// Default basis time step in hbar/E_h.
pub const DEFAULT_DT: f64 = 0.02;

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientState {
    pub c: Vec<Complex64>,
    pub t: f64,
}

impl CoefficientState {
    /// All population in state `p`.
    pub fn basis_state(dim: usize, p: usize) -> Result<Self> {
        if p >= dim {
            return Err(Error::Domain(format!("initial state {p} outside a basis of {dim}")));
        }
        let mut c = vec![Complex64::default(); dim];
        c[p] = Complex64::new(1.0, 0.0);
        Ok(Self { c, t: 0.0 })
    }

    pub fn norm(&self) -> f64 {
        self.c.iter().map(|x| x.norm_sqr()).sum()
    }
}

pub struct PropagatorSetup<'a> {
    basis: &'a PolaritonBasis,
    dt: f64,
    pulse: PulseSpec,
    /// `exp(-i (E_p - i Gamma_p / 2) dt)`.
    diagonal: Vec<Complex64>,
    lambda: Vec<f64>,
    v: DMatrix<f64>,
    vt: DMatrix<f64>,
}

impl std::fmt::Debug for PropagatorSetup<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PropagatorSetup")
            .field("dim", &self.basis.dim())
            .field("dt", &self.dt)
            .field("pulse", &self.pulse)
            .finish()
    }
}

impl<'a> PropagatorSetup<'a> {
    pub fn new(basis: &'a PolaritonBasis, dt: f64, pulse: PulseSpec) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Domain(format!("time step must be > 0, got {dt}")));
        }
        let p = pulse.polarization();
        let b = basis.field_polarization();
        if p.iter().zip(b).any(|(x, y)| (x - y).abs() > 1e-12) {
            return Err(Error::Domain(format!(
                "pulse polarization {p:?} differs from the basis field polarization {b:?}"
            )));
        }
        let diagonal = basis
            .energies()
            .iter()
            .zip(basis.gamma_p())
            .map(|(&e, &g)| Complex64::from_polar((-0.5 * g * dt).exp(), -e * dt))
            .collect();
        let eig = SymmetricEigen::try_new(basis.mu_pq().clone(), f64::EPSILON, 0)
            .ok_or_else(|| Error::Eigen("dipole eigendecomposition did not converge".into()))?;
        let v = eig.eigenvectors;
        Ok(Self {
            basis,
            dt,
            pulse,
            diagonal,
            lambda: eig.eigenvalues.iter().copied().collect(),
            vt: v.transpose(),
            v,
        })
    }

    pub fn basis(&self) -> &PolaritonBasis {
        self.basis
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn pulse(&self) -> &PulseSpec {
        &self.pulse
    }

    /// `V diag(lambda) V^T`, for checking the cached decomposition.
    pub fn reconstructed_dipole(&self) -> DMatrix<f64> {
        let mut vl = self.v.clone();
        for (mut col, &l) in vl.column_iter_mut().zip(&self.lambda) {
            col *= l;
        }
        vl * &self.vt
    }

    fn field(&self, t: f64) -> f64 {
        self.pulse.envelope_field(t)
    }
}

/// Advances `state` by one step `dt` (field at `t + dt/2`).
pub fn split_step(state: &mut CoefficientState, setup: &PropagatorSetup<'_>) -> Result<()> {
    let dt = setup.dt;
    for (c, d) in state.c.iter_mut().zip(&setup.diagonal) {
        *c *= d;
    }
    let f = setup.field(state.t + 0.5 * dt);
    if f != 0.0 {
        let n = state.c.len();
        let x = DMatrix::from_fn(n, 2, |r, k| if k == 0 { state.c[r].re } else { state.c[r].im });
        let y = &setup.vt * x;
        let mut z = DMatrix::zeros(n, 2);
        for (r, &l) in setup.lambda.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, l * f * dt) * Complex64::new(y[(r, 0)], y[(r, 1)]);
            z[(r, 0)] = phase.re;
            z[(r, 1)] = phase.im;
        }
        let out = &setup.v * z;
        for (r, c) in state.c.iter_mut().enumerate() {
            *c = Complex64::new(out[(r, 0)], out[(r, 1)]);
        }
    }
    state.t += dt;
    if state.c.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::NonFinite {
            step: (state.t / dt).round() as usize,
            t: state.t,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrivenSettings {
    pub t_end: f64,
    pub sample_stride: usize,
    /// Record populations every this many steps; 0 disables them.
    pub population_stride: usize,
    /// Divide energies, photon number and populations by the norm (`mu_z` never is).
    pub norm_divide: bool,
}

impl DrivenSettings {
    pub fn new(t_end: f64) -> Self {
        Self {
            t_end,
            sample_stride: 1,
            population_stride: 0,
            norm_divide: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DrivenRun {
    pub trajectory: TrajectoryRecord,
    /// Polaritonic populations `|C_p|²`, labelled `p<index>`.
    pub populations: Option<PopulationRecord>,
    /// Product-state populations `|sum_p D_{p,in} C_p|²`, labelled `i<state>n<photons>`.
    pub zero_order: Option<PopulationRecord>,
    pub final_state: CoefficientState,
}

fn observe(setup: &PropagatorSetup<'_>, state: &CoefficientState, divide: bool) -> (TrajectorySample, Vec<Complex64>) {
    let basis = setup.basis;
    let norm = state.norm();
    let c0 = basis.to_zero_order(&state.c);
    let x = basis.zero_order_expectations(&c0);
    let e_tot: f64 = state.c.iter().zip(basis.energies()).map(|(c, e)| e * c.norm_sqr()).sum();
    let s = if divide && norm > 0.0 { 1.0 / norm } else { 1.0 };
    let n_c = basis.cavity().map_or(0.0, |cav| (x.e_c + x.e_int + x.e_dse) * s / cav.omega());
    let sample = TrajectorySample {
        t: state.t,
        mu_z: x.mu,
        norm,
        n_c,
        e_e: x.e_e * s,
        e_c: x.e_c * s,
        e_int: x.e_int * s,
        e_dse: x.e_dse * s,
        e_tot: e_tot * s,
    };
    (sample, c0)
}

/// Propagates from `initial` to `settings.t_end`, recording observables every
/// `sample_stride` steps (and the initial and final states).
pub fn run_driven(setup: &PropagatorSetup<'_>, initial: CoefficientState, settings: &DrivenSettings) -> Result<DrivenRun> {
    let basis = setup.basis;
    if initial.c.len() != basis.dim() {
        return Err(Error::Domain(format!(
            "initial state has {} coefficients, basis has {}",
            initial.c.len(),
            basis.dim()
        )));
    }
    if settings.sample_stride == 0 {
        return Err(Error::Domain("sample stride must be >= 1".into()));
    }
    let span = settings.t_end - initial.t;
    let n_steps = (span / setup.dt).round();
    if span < 0.0 || (n_steps * setup.dt - span).abs() > 1e-6 * setup.dt * n_steps.max(1.0) {
        return Err(Error::Domain(format!("dt = {} does not divide the interval {span}", setup.dt)));
    }
    let n_steps = n_steps as usize;
    let t0 = initial.t;
    let np = basis.n_photon();
    let mut traj = TrajectoryRecord::new(false);
    let (mut pops, mut zero) = if settings.population_stride > 0 {
        (
            Some(PopulationRecord::new((0..basis.dim()).map(|p| format!("p{p}")).collect())),
            Some(PopulationRecord::new(
                (0..basis.dim()).map(|k| format!("i{}n{}", k / np, k % np)).collect(),
            )),
        )
    } else {
        (None, None)
    };
    let divide = settings.norm_divide;
    let mut record = |state: &CoefficientState, step: usize, traj: &mut TrajectoryRecord| {
        let on_sample = step.is_multiple_of(settings.sample_stride) || step == n_steps;
        let on_pop = settings.population_stride > 0 && (step.is_multiple_of(settings.population_stride) || step == n_steps);
        if !on_sample && !on_pop {
            return;
        }
        let (sample, c0) = observe(setup, state, divide);
        if on_sample {
            traj.push(sample);
        }
        if on_pop {
            let s = if divide && sample.norm > 0.0 { 1.0 / sample.norm } else { 1.0 };
            if let Some(p) = pops.as_mut() {
                p.push(state.t, state.c.iter().map(|c| c.norm_sqr() * s));
            }
            if let Some(z) = zero.as_mut() {
                z.push(state.t, c0.iter().map(|c| c.norm_sqr() * s));
            }
        }
    };
    let mut state = initial;
    record(&state, 0, &mut traj);
    for step in 1..=n_steps {
        split_step(&mut state, setup)?;
        state.t = t0 + step as f64 * setup.dt;
        record(&state, step, &mut traj);
    }
    Ok(DrivenRun {
        trajectory: traj,
        populations: pops,
        zero_order: zero,
        final_state: state,
    })
}

/// Time series of one frequently populated state.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedPopulation {
    pub state: usize,
    pub max_population: f64,
    pub series: Vec<f64>,
    pub decomposition: Vec<ZeroOrderWeight>,
}

/// Populations never exceeding this are left out of reports.
pub const POPULATION_FLOOR: f64 = 1e-14;

/// The `top_k` states with the largest population over the run (ties broken by
/// index), with their time series and zero-order decompositions.
pub fn population_report(populations: &PopulationRecord, basis: &PolaritonBasis, top_k: usize) -> Result<Vec<RankedPopulation>> {
    populations.validate()?;
    if populations.values.len() != basis.dim() {
        return Err(Error::Domain(format!(
            "population record has {} states, basis has {}",
            populations.values.len(),
            basis.dim()
        )));
    }
    let mut ranked: Vec<(usize, f64)> = populations
        .values
        .iter()
        .enumerate()
        .map(|(p, s)| (p, s.iter().copied().fold(0.0, f64::max)))
        .filter(|&(_, m)| m > POPULATION_FLOOR)
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(top_k.min(basis.dim()));
    ranked
        .into_iter()
        .map(|(p, m)| {
            Ok(RankedPopulation {
                state: p,
                max_population: m,
                series: populations.values[p].clone(),
                decomposition: basis.zero_order_decomposition(p)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::CavitySpec;
    use crate::electronic::ElectronicData;

    fn two_level(gap: f64, mu01: f64) -> ElectronicData {
        ElectronicData::new(vec![0.0, gap], DMatrix::from_row_slice(2, 2, &[0.0, mu01, mu01, 0.0])).unwrap()
    }

    #[test]
    fn field_free_step_is_the_diagonal_factor() {
        let d = two_level(0.4, 0.8);
        let b = PolaritonBasis::build(&d, &CavitySpec::along_z(0.3, 0.05).unwrap(), 3, [0.0, 0.0, 1.0], Some(&[0.0, 0.02])).unwrap();
        let pulse = PulseSpec::along_z(0.0, 0.1, 2).unwrap();
        let setup = PropagatorSetup::new(&b, 0.02, pulse).unwrap();
        let c: Vec<Complex64> = (0..6).map(|p| Complex64::new(0.1 * p as f64, 0.3)).collect();
        let mut s = CoefficientState { c: c.clone(), t: 5.0 };
        split_step(&mut s, &setup).unwrap();
        for (p, c0) in c.iter().enumerate() {
            let e = b.energies()[p];
            let g = b.gamma_p()[p];
            let expect = c0 * Complex64::from_polar(1.0, -e * 0.02) * (-g * 0.01).exp();
            assert!((s.c[p] - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn cached_decomposition_reproduces_dipole() {
        let d = two_level(0.4, 0.8);
        let b = PolaritonBasis::build(&d, &CavitySpec::along_z(0.3, 0.05).unwrap(), 5, [0.0, 0.0, 1.0], None).unwrap();
        let setup = PropagatorSetup::new(&b, 0.02, PulseSpec::along_z(0.01, 0.1, 2).unwrap()).unwrap();
        assert!((setup.reconstructed_dipole() - b.mu_pq()).amax() < 1e-12);
    }

    #[test]
    fn polarization_mismatch_is_rejected() {
        let d = two_level(0.4, 0.8);
        let b = PolaritonBasis::bare(&d, [0.0, 0.0, 1.0], None).unwrap();
        let pulse = PulseSpec::new(0.01, 0.1, 2, [1.0, 0.0, 0.0]).unwrap();
        assert!(PropagatorSetup::new(&b, 0.02, pulse).is_err());
    }

    #[test]
    fn undriven_run_is_constant_and_reports_only_the_ground_state() {
        let d = two_level(0.4, 0.8);
        let b = PolaritonBasis::build(&d, &CavitySpec::along_z(0.3, 0.0).unwrap(), 3, [0.0, 0.0, 1.0], None).unwrap();
        let setup = PropagatorSetup::new(&b, 0.02, PulseSpec::along_z(0.0, 0.1, 2).unwrap()).unwrap();
        let mut set = DrivenSettings::new(20.0);
        set.sample_stride = 50;
        set.population_stride = 100;
        let run = run_driven(&setup, CoefficientState::basis_state(6, 0).unwrap(), &set).unwrap();
        let tr = &run.trajectory;
        for col in [&tr.mu_z, &tr.norm, &tr.n_c, &tr.e_tot, &tr.e_e] {
            assert!(col.iter().all(|x| (x - col[0]).abs() < 1e-10));
        }
        let report = population_report(run.populations.as_ref().unwrap(), &b, 10).unwrap();
        assert_eq!(report.len(), 1);
        assert_eq!(report[0].state, 0);
        assert!((report[0].max_population - 1.0).abs() < 1e-12);
    }

    #[test]
    fn norm_is_non_increasing_with_losses() {
        let d = two_level(0.3, 1.0);
        let b = PolaritonBasis::build(&d, &CavitySpec::along_z(0.3, 0.02).unwrap(), 3, [0.0, 0.0, 1.0], Some(&[0.0, 0.05])).unwrap();
        let setup = PropagatorSetup::new(&b, 0.02, PulseSpec::along_z(0.05, 0.3, 4).unwrap()).unwrap();
        let t_end = (setup.pulse().end_time() / 0.02).floor() * 0.02;
        let run = run_driven(&setup, CoefficientState::basis_state(6, 0).unwrap(), &DrivenSettings::new(t_end)).unwrap();
        let n = &run.trajectory.norm;
        assert!(n.windows(2).all(|w| w[1] <= w[0] + 1e-14));
        assert!(*n.last().unwrap() < 0.999);
    }

    #[test]
    fn report_clamps_top_k_and_carries_decompositions() {
        let d = two_level(0.3, 1.0);
        let b = PolaritonBasis::build(&d, &CavitySpec::along_z(0.3, 0.02).unwrap(), 2, [0.0, 0.0, 1.0], None).unwrap();
        let setup = PropagatorSetup::new(&b, 0.02, PulseSpec::along_z(0.02, 0.3, 4).unwrap()).unwrap();
        let mut set = DrivenSettings::new(40.0);
        set.population_stride = 10;
        let run = run_driven(&setup, CoefficientState::basis_state(4, 0).unwrap(), &set).unwrap();
        let report = population_report(run.populations.as_ref().unwrap(), &b, 100).unwrap();
        assert_eq!(report.len(), 4);
        for r in &report {
            assert_eq!(r.decomposition, b.zero_order_decomposition(r.state).unwrap());
        }
        assert!(report.windows(2).all(|w| w[0].max_population >= w[1].max_population));
    }
}
