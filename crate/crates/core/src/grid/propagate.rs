use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pulse::PulseSpec;
use crate::record::{TrajectoryRecord, TrajectorySample};

use super::{oscillator_ground_state, solve_stationary, GridHamiltonian, GridState};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Time-stepping scheme for real-time propagation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Stepper {
    /// Classical fourth-order Runge-Kutta on `i dpsi/dt = H psi`, absorber inside `H`.
    #[default]
    Rk4,
    /// Second-order Strang splitting `e^{-iV dt/2} e^{-iT dt} e^{-iV dt/2}`,
    /// field at the step midpoint. Unconditionally stable, so it tolerates
    /// much larger steps than RK4 on fine grids.
    Split,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationSettings {
    pub dt: f64,
    pub t_end: f64,
    /// Record every `sample_stride` steps (the initial state is always recorded).
    pub sample_stride: usize,
    pub stepper: Stepper,
    /// Apply the complex absorbing potentials.
    pub absorb: bool,
}

impl PropagationSettings {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            sample_stride: 1,
            stepper: Stepper::Rk4,
            absorb: true,
        }
    }

    fn steps(&self, t0: f64) -> Result<usize> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Domain(format!("time step must be > 0, got {}", self.dt)));
        }
        if self.sample_stride == 0 {
            return Err(Error::Domain("sample stride must be >= 1".into()));
        }
        let span = self.t_end - t0;
        if span < 0.0 {
            return Err(Error::Domain(format!("end time {} lies before the state time {t0}", self.t_end)));
        }
        let n = (span / self.dt).round();
        if (n * self.dt - span).abs() > 1e-6 * self.dt.max(1e-9) * n.max(1.0) {
            return Err(Error::Domain(format!("dt = {} does not divide the interval {span}", self.dt)));
        }
        Ok(n as usize)
    }
}

struct Rk4Buffers {
    k: Vec<Complex64>,
    acc: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl Rk4Buffers {
    fn new(n: usize) -> Self {
        Self {
            k: vec![Complex64::default(); n],
            acc: vec![Complex64::default(); n],
            tmp: vec![Complex64::default(); n],
        }
    }
}

/// One RK4 step of `dpsi/dt = factor * H(F) psi` with fields `f = [F(t), F(t+dt/2), F(t+dt)]`.
fn rk4_step(h: &mut GridHamiltonian, psi: &mut [Complex64], dt: f64, f: [f64; 3], factor: Complex64, absorb: bool, b: &mut Rk4Buffers) {
    let weights = [dt / 6.0, dt / 3.0, dt / 3.0, dt / 6.0];
    let next = [0.5 * dt, 0.5 * dt, dt];
    let fields = [f[0], f[1], f[1], f[2]];
    b.acc.copy_from_slice(psi);
    for stage in 0..4 {
        let src: &[Complex64] = if stage == 0 { psi } else { &b.tmp };
        h.apply(src, &mut b.k, fields[stage], absorb);
        let w = factor * weights[stage];
        if stage < 3 {
            let c = factor * next[stage];
            for ((t, &p), &k) in b.tmp.iter_mut().zip(psi.iter()).zip(&b.k) {
                *t = p + c * k;
            }
        }
        b.acc.iter_mut().zip(&b.k).for_each(|(a, &k)| *a += w * k);
    }
    psi.copy_from_slice(&b.acc);
}

struct SplitFactors {
    /// `exp(-i V dt/2 - Gamma dt/2)`.
    half_static: Vec<Complex64>,
    kinetic: Vec<Complex64>,
}

fn split_step(h: &mut GridHamiltonian, psi: &mut [Complex64], dt: f64, field: f64, s: &SplitFactors) {
    let nx = h.grid().n_xc();
    let apply_half = |psi: &mut [Complex64], z: &[f64]| {
        for (iz, &zv) in z.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, -0.5 * dt * zv * field);
            let range = iz * nx..(iz + 1) * nx;
            for (p, &f) in psi[range.clone()].iter_mut().zip(&s.half_static[range]) {
                *p *= f * phase;
            }
        }
    };
    let z = h.electron_points().to_vec();
    apply_half(psi, &z);
    h.kinetic_mut().apply_momentum_factor(psi, &s.kinetic);
    apply_half(psi, &z);
}

fn sample(h: &mut GridHamiltonian, state: &GridState, step: usize, rec: &mut TrajectoryRecord) -> Result<()> {
    if !state.norm().is_finite() {
        return Err(Error::NonFinite { step, t: state.t });
    }
    let o = h.observables(state)?;
    let values = [o.norm, o.mu_z, o.e_tot, o.n_c, o.z];
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { step, t: state.t });
    }
    rec.push(TrajectorySample {
        t: state.t,
        mu_z: o.mu_z,
        norm: o.norm,
        n_c: o.n_c,
        e_e: o.e_e,
        e_c: o.e_c,
        e_int: o.e_int,
        e_dse: o.e_dse,
        e_tot: o.e_tot,
    });
    rec.push_coords(o.z, o.x_c.unwrap_or(0.0));
    Ok(())
}

/// Advances `state` to `settings.t_end` under `H + z F_z(t) - i Gamma` and returns
/// the sampled observables. The wavefunction is never renormalized.
///
/// Only the z component of the pulse couples to the electron coordinate.
pub fn propagate(
    h: &mut GridHamiltonian,
    state: &mut GridState,
    pulse: Option<&PulseSpec>,
    settings: &PropagationSettings,
) -> Result<TrajectoryRecord> {
    if state.grid != *h.grid() {
        return Err(Error::Domain("state and Hamiltonian live on different grids".into()));
    }
    let n_steps = settings.steps(state.t)?;
    let t0 = state.t;
    let dt = settings.dt;
    let field = |t: f64| pulse.map_or(0.0, |p| p.component(t, [0.0, 0.0, 1.0]));
    let mut rec = TrajectoryRecord::new(true);
    sample(h, state, 0, &mut rec)?;

    let mut rk = None;
    let mut split = None;
    match settings.stepper {
        Stepper::Rk4 => rk = Some(Rk4Buffers::new(state.psi.len())),
        Stepper::Split => {
            let absorb = settings.absorb;
            let half_static = h
                .static_potential()
                .iter()
                .zip(h.absorber())
                .map(|(&v, &g)| {
                    let g = if absorb { g } else { 0.0 };
                    Complex64::from_polar((-0.5 * dt * g).exp(), -0.5 * dt * v)
                })
                .collect();
            let kinetic = h.kinetic_mut().propagator_factor(dt);
            split = Some(SplitFactors { half_static, kinetic });
        }
    }

    for step in 1..=n_steps {
        let t = t0 + (step - 1) as f64 * dt;
        if let Some(b) = rk.as_mut() {
            let f = [field(t), field(t + 0.5 * dt), field(t + dt)];
            rk4_step(h, &mut state.psi, dt, f, -I, settings.absorb, b);
        } else if let Some(s) = split.as_ref() {
            split_step(h, &mut state.psi, dt, field(t + 0.5 * dt), s);
        }
        state.t = t0 + step as f64 * dt;
        if step % settings.sample_stride == 0 || step == n_steps {
            state.refresh_norm();
            sample(h, state, step, &mut rec)?;
        }
    }
    state.refresh_norm();
    Ok(rec)
}

/// Largest stable imaginary-time RK4 step for `h`, with a 10% margin.
pub fn max_imaginary_step(h: &GridHamiltonian) -> f64 {
    2.5 / h.spectral_bound()
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub state: GridState,
    pub energy: f64,
    pub iterations: usize,
    pub last_delta: f64,
}

/// Relaxes to the ground state by RK4 in imaginary time with renormalization
/// after every step, stopping once `|E_k - E_{k-1}| < tol`. Field and absorbers are off.
///
/// `dtau` is reduced to [`max_imaginary_step`] when it exceeds it; RK4 in
/// imaginary time amplifies components above `2.78 / dtau` otherwise.
///
/// Without an initial guess, starts from the Fourier-grid ground state of
/// `V_e + V_dse` times the oscillator ground state of the cavity coordinate.
pub fn imaginary_time_ground_state(
    h: &mut GridHamiltonian,
    initial: Option<GridState>,
    dtau: f64,
    tol: f64,
    max_iterations: usize,
) -> Result<GroundState> {
    if !(dtau > 0.0) || !(tol > 0.0) {
        return Err(Error::Domain("imaginary time step and tolerance must be > 0".into()));
    }
    let dtau = dtau.min(max_imaginary_step(h));
    let grid = *h.grid();
    let mut state = match initial {
        Some(s) if s.grid == grid => s,
        Some(_) => return Err(Error::Domain("initial guess lives on a different grid".into())),
        None => initial_guess(h)?,
    };
    state.normalize();
    let mut b = Rk4Buffers::new(state.psi.len());
    let mut energy = h.energy(&state.psi);
    let mut delta = f64::INFINITY;
    for it in 1..=max_iterations {
        rk4_step(h, &mut state.psi, dtau, [0.0; 3], Complex64::new(-1.0, 0.0), false, &mut b);
        state.normalize();
        let e = h.energy(&state.psi);
        if !e.is_finite() {
            return Err(Error::NonFinite { step: it, t: it as f64 * dtau });
        }
        delta = (e - energy).abs();
        energy = e;
        if delta < tol {
            state.t = 0.0;
            return Ok(GroundState {
                state,
                energy,
                iterations: it,
                last_delta: delta,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: max_iterations,
        last_delta: delta,
    })
}

fn initial_guess(h: &GridHamiltonian) -> Result<GridState> {
    let grid = *h.grid();
    let p = h.potentials();
    let v: Vec<f64> = p.electron.iter().zip(&p.dse).map(|(a, b)| a + b).collect();
    let phi = solve_stationary(&grid.electron, &v, 1)?.states.remove(0);
    let chi = match (grid.cavity, h.omega_c()) {
        (Some(axis), Some(w)) => oscillator_ground_state(&axis, w, 0.0),
        _ => vec![1.0],
    };
    GridState::product(grid, &phi, &chi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::CavitySpec;
    use crate::grid::{solve_stationary_electronic, CapSpec, ElectronCap, GridSpec, SoftCoreModel};

    fn atom(n: usize, zmax: f64, caps: &CapSpec) -> (GridHamiltonian, GridState, f64) {
        let grid = GridSpec::electron_only(n, zmax).unwrap();
        let model = SoftCoreModel::default();
        let st = solve_stationary_electronic(&grid, &model, 1).unwrap();
        let s = GridState::product(grid, &st.states[0], &[1.0]).unwrap();
        (GridHamiltonian::from_model(grid, &model, None, caps).unwrap(), s, st.energies[0])
    }

    #[test]
    fn eigenstate_only_acquires_a_phase() {
        let (mut h, mut s, e0) = atom(128, 30.0, &CapSpec::none());
        let initial = s.clone();
        let mut set = PropagationSettings::new(0.001, 10.0);
        set.sample_stride = 1000;
        let rec = propagate(&mut h, &mut s, None, &set).unwrap();
        let ov = initial.overlap(&s);
        assert!((ov.norm() - 1.0).abs() < 1e-8, "{}", ov.norm());
        let expected = Complex64::from_polar(1.0, -e0 * 10.0);
        assert!((ov / ov.norm() / expected - 1.0).norm() < 1e-6);
        assert!(rec.norm.iter().all(|n| (n - 1.0).abs() < 1e-8));
        assert_eq!(rec.len(), 11);
    }

    #[test]
    fn split_and_rk4_agree_for_a_driven_atom() {
        let caps = CapSpec {
            electron: Some(ElectronCap {
                onset: 20.0,
                strength: 1e-3,
            }),
            cavity: None,
        };
        let pulse = PulseSpec::along_z(0.05, 0.2, 2).unwrap();
        let (mut h, s0, _) = atom(128, 30.0, &caps);
        let mut a = s0.clone();
        let mut b = s0;
        let mut set = PropagationSettings::new(0.002, 20.0);
        set.sample_stride = 500;
        let ra = propagate(&mut h, &mut a, Some(&pulse), &set).unwrap();
        set.stepper = Stepper::Split;
        let rb = propagate(&mut h, &mut b, Some(&pulse), &set).unwrap();
        for (x, y) in ra.mu_z.iter().zip(&rb.mu_z) {
            assert!((x - y).abs() < 1e-5, "{x} {y}");
        }
    }

    #[test]
    fn absorber_only_removes_norm() {
        let caps = CapSpec {
            electron: Some(ElectronCap {
                onset: 10.0,
                strength: 1e-2,
            }),
            cavity: None,
        };
        let (mut h, mut s, _) = atom(128, 30.0, &caps);
        let pulse = PulseSpec::along_z(0.1, 0.2, 2).unwrap();
        let mut set = PropagationSettings::new(0.005, pulse.end_time().div_euclid(0.005) * 0.005);
        set.sample_stride = 10;
        let rec = propagate(&mut h, &mut s, Some(&pulse), &set).unwrap();
        assert!(rec.norm.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        assert!(*rec.norm.last().unwrap() < 1.0);
    }

    #[test]
    fn non_dividing_step_is_rejected() {
        let (mut h, mut s, _) = atom(32, 10.0, &CapSpec::none());
        assert!(propagate(&mut h, &mut s, None, &PropagationSettings::new(0.3, 1.0)).is_err());
        assert!(propagate(&mut h, &mut s, None, &PropagationSettings::new(0.0, 1.0)).is_err());
    }

    #[test]
    fn relaxation_matches_separable_ground_state() {
        let grid = GridSpec::new(128, 30.0, 32, 20.0).unwrap();
        let model = SoftCoreModel::default();
        let cav = CavitySpec::along_z(0.2, 0.0).unwrap();
        let mut h = GridHamiltonian::from_model(grid, &model, Some(&cav), &CapSpec::none()).unwrap();
        let e0 = solve_stationary_electronic(&grid, &model, 1).unwrap().energies[0];
        let gs = imaginary_time_ground_state(&mut h, None, 0.05, 1e-12, 10_000).unwrap();
        assert!((gs.energy - (e0 + 0.1)).abs() < 1e-8, "{}", gs.energy);
    }

    #[test]
    fn oversized_imaginary_step_is_reduced() {
        let grid = GridSpec::new(128, 50.0, 64, 40.0).unwrap();
        let cav = CavitySpec::along_z(0.05, 0.07).unwrap();
        let mut h = GridHamiltonian::from_model(grid, &SoftCoreModel::default(), Some(&cav), &CapSpec::none()).unwrap();
        assert!(0.05 > max_imaginary_step(&h));
        let gs = imaginary_time_ground_state(&mut h, None, 0.05, 1e-12, 400_000).unwrap();
        let psi = &gs.state.psi;
        let mut hpsi = vec![Complex64::default(); psi.len()];
        h.apply(psi, &mut hpsi, 0.0, false);
        let residual: f64 = hpsi.iter().zip(psi).map(|(a, b)| (a - gs.energy * b).norm_sqr()).sum::<f64>().sqrt();
        let size: f64 = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        assert!(residual / size < 1e-3, "{}", residual / size);
        let o = h.observables(&gs.state).unwrap();
        assert!(o.n_c > -1e-10 && o.e_tot.is_finite());
    }

    #[test]
    fn relaxation_reports_non_convergence() {
        let grid = GridSpec::new(64, 20.0, 16, 10.0).unwrap();
        let cav = CavitySpec::along_z(0.2, 0.1).unwrap();
        let mut h = GridHamiltonian::from_model(grid, &SoftCoreModel::default(), Some(&cav), &CapSpec::none()).unwrap();
        match imaginary_time_ground_state(&mut h, None, 0.01, 1e-15, 3) {
            Err(Error::NotConverged { iterations, last_delta }) => {
                assert_eq!(iterations, 3);
                assert!(last_delta > 0.0);
            }
            other => panic!("{other:?}"),
        }
    }
}
