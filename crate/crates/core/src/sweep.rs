//! Parameter sweeps: independent runs in parallel, then one summary table.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::{write_text, RunConfig, Table};
use crate::run::{execute, RunSummary};

pub const SUMMARY_FILE: &str = "summary.tsv";
pub const MANIFEST_FILE: &str = "manifest.tsv";
pub const SUMMARY_COLUMNS: [&str; 8] = [
    "omega_c[Eh/hbar]", "g_c[au]", "N_p", "omega_a[Eh/hbar]", "omega_b[Eh/hbar]", "omega_cut[Eh/hbar]", "final_norm",
    "final_n_c",
];

#[derive(Debug)]
pub struct SweepOutcome {
    /// In key order.
    pub runs: Vec<(String, Result<RunSummary>)>,
}

impl SweepOutcome {
    pub fn failures(&self) -> usize {
        self.runs.iter().filter(|(_, r)| r.is_err()).count()
    }
}

/// Runs every member of a sweep config on `threads` workers (0 = rayon's
/// default), then writes `summary.tsv` and `manifest.tsv` to the sweep root.
/// A failing member is recorded in the manifest and the others still run.
pub fn run_sweep(cfg: &RunConfig, threads: usize) -> Result<SweepOutcome> {
    let mut members = cfg.expand_sweep()?;
    members.sort_by(|a, b| a.0.cmp(&b.0));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {threads} worker threads: {e}")))?;
    let runs: Vec<(String, Result<RunSummary>)> =
        pool.install(|| members.into_par_iter().map(|(key, c)| (key, execute(&c))).collect());
    let root = &cfg.output_dir;
    std::fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    let out = SweepOutcome { runs };
    write_text(&root.join(SUMMARY_FILE), &format_summary(&out))?;
    write_text(&root.join(MANIFEST_FILE), &format_manifest(&out, root))?;
    Ok(out)
}

pub fn format_summary(out: &SweepOutcome) -> String {
    let header = format!("# hhgqed sweep-summary 1\n# {}\n", SUMMARY_COLUMNS.join("\t"));
    let mut t = Table::parse(&header).expect("static header");
    t.data = vec![Vec::new(); SUMMARY_COLUMNS.len()];
    for (_, r) in &out.runs {
        let Ok(s) = r else { continue };
        let row = [
            s.omega_c.unwrap_or(f64::NAN),
            s.g_c,
            s.n_photon as f64,
            s.fit.omega_a,
            s.fit.omega_b,
            s.fit.omega_cut,
            s.final_norm,
            s.final_n_c,
        ];
        for (c, v) in t.data.iter_mut().zip(row) {
            c.push(v);
        }
    }
    t.format()
}

pub fn format_manifest(out: &SweepOutcome, root: &Path) -> String {
    let mut s = String::from("# hhgqed manifest 1\n# key\tstatus\tdir\tmessage\n");
    for (key, r) in &out.runs {
        let dir = root.join(key);
        let (status, msg) = match r {
            Ok(_) => ("ok", String::new()),
            Err(e) => ("failed", e.to_string().replace(['\t', '\n'], " ")),
        };
        let _ = writeln!(s, "{key}\t{status}\t{}\t{msg}", dir.display());
    }
    s
}
