use hhg_qed::tdci::{run_driven, split_step, CoefficientState, DrivenSettings, PropagatorSetup};
use hhg_qed::{CavitySpec, ElectronicData, PolaritonBasis, PulseSpec};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const Z: [f64; 3] = [0.0, 0.0, 1.0];

fn toy_data(n: usize, seed: u64) -> ElectronicData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut energies: Vec<f64> = (0..n).map(|i| -0.6 + 0.15 * i as f64 + 0.03 * rng.random::<f64>()).collect();
    energies.sort_by(f64::total_cmp);
    let mut mu = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.random_range(-1.0..1.0);
            mu[(i, j)] = v;
            mu[(j, i)] = v;
        }
    }
    ElectronicData::new(energies, mu).unwrap()
}

/// `exp(-i H dt)` for `H = diag(E - i Gamma/2) - F mu`.
fn exact_step(basis: &PolaritonBasis, f: f64, dt: f64) -> DMatrix<Complex64> {
    let n = basis.dim();
    let mu = basis.mu_pq();
    let h = DMatrix::from_fn(n, n, |p, q| {
        let diag = if p == q {
            Complex64::new(basis.energies()[p], -0.5 * basis.gamma_p()[p])
        } else {
            Complex64::default()
        };
        diag - Complex64::new(f * mu[(p, q)], 0.0)
    });
    (h * Complex64::new(0.0, -dt)).exp()
}

fn distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn lossy_basis() -> PolaritonBasis {
    let data = toy_data(6, 3);
    let rates = [0.0, 0.0, 0.01, 0.02, 0.05, 0.1];
    let cav = CavitySpec::along_z(0.2, 0.03).unwrap();
    PolaritonBasis::build(&data, &cav, 3, Z, Some(&rates)).unwrap()
}

fn mixed_state(dim: usize) -> CoefficientState {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut c: Vec<Complex64> = (0..dim).map(|_| Complex64::new(rng.random(), rng.random())).collect();
    let n = c.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    c.iter_mut().for_each(|x| *x /= n);
    CoefficientState { c, t: 0.0 }
}

#[test]
fn one_step_error_is_second_order_in_dt() {
    let basis = lossy_basis();
    assert!(basis.dim() <= 50);
    let pulse = PulseSpec::along_z(0.2, 0.2, 2).unwrap();
    let t0 = 0.37 * pulse.end_time();
    let mut errors = Vec::new();
    for dt in [0.04, 0.02, 0.01] {
        let setup = PropagatorSetup::new(&basis, dt, pulse).unwrap();
        let mut s = mixed_state(basis.dim());
        s.t = t0;
        let reference = exact_step(&basis, pulse.envelope_field(t0 + 0.5 * dt), dt) * DMatrix::from_column_slice(s.c.len(), 1, &s.c);
        split_step(&mut s, &setup).unwrap();
        errors.push(distance(&s.c, reference.as_slice()));
    }
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.6..4.4).contains(&ratio), "{ratio} from {errors:?}");
    }
}

#[test]
fn resonant_two_level_follows_the_pulse_area() {
    let omega = 0.4;
    let data = ElectronicData::new(vec![-0.5, -0.5 + omega], DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
    let basis = PolaritonBasis::bare(&data, Z, None).unwrap();
    let cycles = 8000;
    let sigma = cycles as f64 * std::f64::consts::PI / omega;
    // total pulse area mu F0 sigma = 2 pi: one full Rabi cycle
    let f0 = std::f64::consts::TAU / sigma;
    let pulse = PulseSpec::along_z(f0, omega, cycles).unwrap();
    let dt = 0.02;
    let setup = PropagatorSetup::new(&basis, dt, pulse).unwrap();
    let n_steps = (pulse.end_time() / dt).round() as usize;
    let mut s = CoefficientState::basis_state(2, 0).unwrap();
    let mut worst: f64 = 0.0;
    for step in 1..=n_steps {
        split_step(&mut s, &setup).unwrap();
        if step % 50_000 == 0 || step == n_steps {
            let t = s.t;
            let area = f0 * (0.5 * t + sigma / std::f64::consts::TAU * (std::f64::consts::PI * (t - sigma) / sigma).sin());
            let expected = (0.5 * area).sin().powi(2);
            worst = worst.max((s.c[1].norm_sqr() - expected).abs());
        }
    }
    assert!(worst < 1e-4, "{worst:e}");
}

#[test]
fn driven_run_without_losses_conserves_norm() {
    let data = toy_data(8, 5);
    let cav = CavitySpec::along_z(0.057, 0.02).unwrap();
    let basis = PolaritonBasis::build(&data, &cav, 4, Z, None).unwrap();
    let pulse = PulseSpec::along_z(0.09, 0.057, 10).unwrap();
    let setup = PropagatorSetup::new(&basis, 0.02, pulse).unwrap();
    let mut set = DrivenSettings::new(hhg_qed::io::whole_steps(pulse.end_time(), 0.02));
    set.sample_stride = 100;
    let run = run_driven(&setup, CoefficientState::basis_state(basis.dim(), 0).unwrap(), &set).unwrap();
    assert!(run.trajectory.norm.iter().all(|n| (n - 1.0).abs() < 1e-9));
}

#[test]
fn state_sign_conventions_do_not_change_observables() {
    let data = toy_data(5, 9);
    let mut flipped = data.clone();
    let mu = flipped.dipole[2].as_mut().unwrap();
    for k in [1, 3] {
        for j in 0..5 {
            if j != k {
                mu[(k, j)] = -mu[(k, j)];
                mu[(j, k)] = -mu[(j, k)];
            }
        }
    }
    let cav = CavitySpec::along_z(0.1, 0.04).unwrap();
    let pulse = PulseSpec::along_z(0.05, 0.1, 3).unwrap();
    let mut set = DrivenSettings::new(hhg_qed::io::whole_steps(pulse.end_time(), 0.02));
    set.sample_stride = 20;
    let run = |d: &ElectronicData| {
        let basis = PolaritonBasis::build(d, &cav, 3, Z, None).unwrap();
        let setup = PropagatorSetup::new(&basis, 0.02, pulse).unwrap();
        run_driven(&setup, CoefficientState::basis_state(basis.dim(), 0).unwrap(), &set).unwrap().trajectory
    };
    let (a, b) = (run(&data), run(&flipped));
    let cols = |r: &hhg_qed::TrajectoryRecord| [r.mu_z.clone(), r.norm.clone(), r.n_c.clone(), r.e_tot.clone(), r.e_int.clone()];
    for (x, y) in cols(&a).iter().zip(cols(&b).iter()) {
        for (u, v) in x.iter().zip(y) {
            assert!((u - v).abs() < 1e-10, "{u} {v}");
        }
    }
}
