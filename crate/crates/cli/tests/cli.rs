use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hhg_qed::hhg::SpectrumRecord;
use hhg_qed::io::{load_electronic_data, read_cutoff_fit, write_spectrum};

fn hhgqed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hhgqed")).args(args).output().unwrap()
}

fn write(path: &Path, text: &str) -> String {
    fs::write(path, text).unwrap();
    path.display().to_string()
}

/// Plateau, linear descent between 1.5 and 2.5, then a flat floor.
fn kinked_spectrum(path: &Path) {
    let omega: Vec<f64> = (0..400).map(|k| 0.01 * k as f64).collect();
    let intensity: Vec<f64> = omega.iter().map(|w| (-12.0 * (w - 1.5).clamp(0.0, 1.0)).exp()).collect();
    // a stored smoothed column is fitted as is
    let spec = SpectrumRecord { omega, smoothed: Some(intensity.clone()), intensity, omega0: Some(0.05) };
    write_spectrum(path, &spec).unwrap();
}

#[test]
fn bad_config_exits_with_status_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(&dir.path().join("bad.cfg"), "laser.amplitude = 0.09\nlaser.omega = -1\nlaser.cycles = 10\n");
    let out = hhgqed(&["grid-run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("laser: domain error"), "{err}");

    let typo = write(&dir.path().join("typo.cfg"), "laser.amplitud = 0.09\n");
    assert_eq!(hhgqed(&["grid-run", "--config", &typo]).status.code(), Some(2));
}

#[test]
fn export_writes_a_loadable_data_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(&dir.path().join("export.cfg"), "export.n_states = 5\ngrid.n_z = 256\ngrid.z_max = 60\n");
    let target = dir.path().join("out");
    let out = hhgqed(&["export-electronic-data", "--config", &cfg, "--out", target.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let path = stdout.trim().strip_prefix("wrote ").unwrap();
    let data = load_electronic_data(Path::new(path)).unwrap();
    assert_eq!(data.n_states(), 5);
    assert!(data.energies.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn noisy_fits_repeat_for_a_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spectrum.tsv");
    kinked_spectrum(&spec);
    let cfg = write(
        &dir.path().join("fit.cfg"),
        &format!("analysis.input = {}\nanalysis.omega0 = 0.05\nanalysis.fit_lo = 0.2\nanalysis.fit_hi = 3.9\n", spec.display()),
    );
    let fit_in = |name: &str, extra: &[&str]| {
        let out_dir = dir.path().join(name);
        let mut args = vec!["fit-cutoff", "--config", &cfg, "--out", out_dir.to_str().unwrap()];
        args.extend_from_slice(extra);
        let out = hhgqed(&args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        (fs::read(out_dir.join("fit.tsv")).unwrap(), read_cutoff_fit(&out_dir.join("fit.tsv")).unwrap().0)
    };
    let (_, clean) = fit_in("clean", &[]);
    assert!((clean.omega_cut - 2.0).abs() < 1e-6, "{}", clean.omega_cut);
    let (a, _) = fit_in("a", &["--seed", "7", "--noise", "0.3"]);
    let (b, _) = fit_in("b", &["--seed", "7", "--noise", "0.3"]);
    let (c, _) = fit_in("c", &["--seed", "8", "--noise", "0.3"]);
    assert_eq!(a, b);
    assert_ne!(a, c);

    // --seed without --noise is a usage error
    let out = hhgqed(&["fit-cutoff", "--config", &cfg, "--seed", "1"]);
    assert!(!out.status.success());
}
