use std::fs;
use std::path::Path;

use hhg_qed::hhg::{fit_spectrum, hhg_spectrum};
use hhg_qed::io::{load_electronic_data, read_cutoff_fit, read_spectrum, write_electronic_data, write_spectrum, RunConfig, Table};
use hhg_qed::run::{self, FIT_FILE, SPECTRUM_FILE, TRAJECTORY_FILE};
use hhg_qed::sweep::{format_manifest, format_summary, run_sweep, SweepOutcome, MANIFEST_FILE, SUMMARY_FILE};
use hhg_qed::{ElectronicData, Error};
use nalgebra::DMatrix;

fn toy_file(dir: &Path) -> std::path::PathBuf {
    let energies = vec![-0.6, -0.25, -0.1, 0.05];
    let mu = DMatrix::from_row_slice(4, 4, &[0.0, 1.1, 0.0, 0.3, 1.1, 0.0, 1.7, 0.0, 0.0, 1.7, 0.0, 2.2, 0.3, 0.0, 2.2, 0.0]);
    let mut data = ElectronicData::new(energies, mu).unwrap();
    data.rates = Some(vec![0.0, 0.0, 0.0, 0.02]);
    let path = dir.join("toy.dat");
    write_electronic_data(&path, &data).unwrap();
    path
}

fn basis_config(data: &Path, out: &Path, extra: &str) -> String {
    format!(
        "basis.electronic_data = {}\noutput.dir = {}\nlaser.amplitude = 0.03\nlaser.omega = 0.057\nlaser.cycles = 4\n\
         cavity.omega_c = 0.057\nbasis.n_photon = 4\nionization.enabled = true\nionization.escape_length = 2 a0\nnumerics.sample_stride = 2\n\
         numerics.population_stride = 50\n{extra}",
        data.display(),
        out.display()
    )
}

#[test]
fn exported_grid_data_reproduces_the_ground_state_energy() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::parse(&format!("mode = export\noutput.dir = {}\nexport.n_states = 30\n", dir.path().display()), None).unwrap();
    let path = run::run_export(&cfg).unwrap();
    let data = load_electronic_data(&path).unwrap();
    assert_eq!(data.n_states(), 30);
    assert!((data.energies[0] + 0.500008).abs() < 1e-6, "{}", data.energies[0]);
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.contains("[energies]\n-0.50000"));
}

#[test]
fn single_member_sweep_matches_the_direct_run_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let data = toy_file(dir.path());
    let direct = RunConfig::parse(&basis_config(&data, &dir.path().join("direct"), "mode = basis\ncavity.g_c = 0.02\n"), None).unwrap();
    run::execute(&direct).unwrap();
    let sweep = RunConfig::parse(
        &basis_config(&data, &dir.path().join("sweep"), "mode = sweep\nsweep.mode = basis\nsweep.g_c = 0.02\n"),
        None,
    )
    .unwrap();
    let out = run_sweep(&sweep, 1).unwrap();
    assert_eq!(out.runs.len(), 1);
    let member = dir.path().join("sweep").join(&out.runs[0].0);
    for f in [TRAJECTORY_FILE, SPECTRUM_FILE, FIT_FILE, run::POPULATIONS_FILE, run::BASIS_FILE, run::RANKING_FILE] {
        let a = fs::read(dir.path().join("direct").join(f)).unwrap();
        let b = fs::read(member.join(f)).unwrap();
        assert!(a == b, "{f} differs");
    }
    // and reruns are reproducible
    let again = RunConfig::parse(&basis_config(&data, &dir.path().join("again"), "mode = basis\ncavity.g_c = 0.02\n"), None).unwrap();
    run::execute(&again).unwrap();
    for f in [TRAJECTORY_FILE, SPECTRUM_FILE, FIT_FILE] {
        assert_eq!(fs::read(dir.path().join("direct").join(f)).unwrap(), fs::read(dir.path().join("again").join(f)).unwrap());
    }
}

#[test]
fn summary_cutoffs_equal_refits_of_the_stored_spectra() {
    let dir = tempfile::tempdir().unwrap();
    let data = toy_file(dir.path());
    let root = dir.path().join("sweep");
    let cfg = RunConfig::parse(
        &basis_config(&data, &root, "mode = sweep\nsweep.mode = basis\ncavity.g_c = 0.01\nsweep.n_photon = 3, 1, 2\nsweep.omega_c = 0.1, 0.057\n"),
        None,
    )
    .unwrap();
    let out = run_sweep(&cfg, 2).unwrap();
    assert_eq!((out.runs.len(), out.failures()), (6, 0));
    let summary = Table::parse(&fs::read_to_string(root.join(SUMMARY_FILE)).unwrap()).unwrap();
    assert_eq!(summary.rows(), 6);
    let cut = summary.column("omega_cut[Eh/hbar]").unwrap();
    let np = summary.column("N_p").unwrap();
    let w = summary.column("omega_c[Eh/hbar]").unwrap();
    // rows follow the key order (axis order of the config), not completion order
    assert_eq!(np, [3.0, 1.0, 2.0, 3.0, 1.0, 2.0]);
    assert_eq!(w, [0.1, 0.1, 0.1, 0.057, 0.057, 0.057]);
    for (k, (key, _)) in out.runs.iter().enumerate() {
        let member = root.join(key);
        let spec = read_spectrum(&member.join(SPECTRUM_FILE)).unwrap();
        let (stored, range) = read_cutoff_fit(&member.join(FIT_FILE)).unwrap();
        let refit = fit_spectrum(&spec, range).unwrap();
        assert_eq!(refit.omega_cut, cut[k]);
        assert_eq!(refit, stored);
    }
    let manifest = fs::read_to_string(root.join(MANIFEST_FILE)).unwrap();
    assert_eq!(manifest.lines().filter(|l| l.contains("\tok\t")).count(), 6);
}

#[test]
fn failed_members_only_appear_in_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let data = toy_file(dir.path());
    let root = dir.path().join("sweep");
    let cfg = RunConfig::parse(&basis_config(&data, &root, "mode = sweep\nsweep.mode = basis\nsweep.g_c = 0, 0.01\n"), None).unwrap();
    let mut out = run_sweep(&cfg, 1).unwrap();
    out.runs[0].1 = Err(Error::Ionized(1e-13));
    let out = SweepOutcome { runs: out.runs };
    let summary = Table::parse(&format_summary(&out)).unwrap();
    assert_eq!(summary.rows(), 1);
    assert_eq!(summary.column("g_c[au]").unwrap(), [0.01]);
    let manifest = format_manifest(&out, &root);
    let failed: Vec<&str> = manifest.lines().filter(|l| l.contains("\tfailed\t")).collect();
    assert_eq!(failed.len(), 1);
    assert!(failed[0].starts_with(&out.runs[0].0) && failed[0].contains("fully ionized"));
}

#[test]
fn spectrum_file_spacing_follows_the_run_length() {
    let n = 11_024;
    let dt = 1102.3 / (n - 1) as f64;
    let t: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
    let a: Vec<f64> = t.iter().map(|t| (0.3 * t).sin()).collect();
    let spec = hhg_spectrum(&t, &a, Some(0.057)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.tsv");
    write_spectrum(&path, &spec).unwrap();
    let back = read_spectrum(&path).unwrap();
    let step = back.omega[1] - back.omega[0];
    assert!((step - 0.0057).abs() < 1e-6, "{step}");
    assert_eq!(back, spec);
}

#[test]
fn config_errors_and_numerical_failures_are_told_apart() {
    let dir = tempfile::tempdir().unwrap();
    let missing = RunConfig::parse(
        &basis_config(&dir.path().join("absent.dat"), dir.path(), "mode = basis\ncavity.g_c = 0.01\n"),
        None,
    )
    .unwrap();
    let e = run::execute(&missing).unwrap_err();
    assert!(!e.is_numerical());
    let bad = RunConfig::parse("mode = grid\nlaser.amplitude = 0.09\nlaser.omega = 0.05\nlaser.cycles = 10\ngrid.n_z = 3\n", None);
    assert!(bad.unwrap_err().is_config());
}
