//! Tab-separated record files.
//!
//! Layout:
//!
//! ```text
//! # hhgqed <kind> 1
//! # key = value          (zero or more)
//! # col[unit]\tcol[unit]...
//! 1.5\t-0.25...
//! ```
//!
//! Floats use Rust's shortest round-trip formatting, so reading a written file
//! reproduces every value bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::hhg::{CutoffFit, SpectrumRecord};
use crate::record::{PopulationRecord, TrajectoryRecord};

const MAGIC: &str = "hhgqed";
const VERSION: &str = "1";

pub const TRAJECTORY_COLUMNS: [&str; 9] = [
    "t[au]", "mu_z[e*a0]", "norm[1]", "n_c[1]", "E_e[Eh]", "E_c[Eh]", "E_int[Eh]", "E_dse[Eh]", "E_tot[Eh]",
];
pub const COORDINATE_COLUMNS: [&str; 2] = ["z[a0]", "x_c[a0]"];
pub const SPECTRUM_COLUMNS: [&str; 2] = ["omega[Eh/hbar]", "intensity[arb]"];
const ORDER_COLUMN: &str = "order[omega/omega0]";
const SMOOTHED_COLUMN: &str = "smoothed[arb]";
pub const FIT_COLUMNS: [&str; 9] = [
    "A[ln arb]", "B[ln arb]", "omega_a[Eh/hbar]", "omega_b[Eh/hbar]", "omega_cut[Eh/hbar]", "residual", "degenerate",
    "fit_lo[Eh/hbar]", "fit_hi[Eh/hbar]",
];

/// Parsed table before typing.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub kind: String,
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    /// Column-major values.
    pub data: Vec<Vec<f64>>,
}

impl Table {
    fn new(kind: &str, columns: Vec<String>) -> Self {
        Self {
            kind: kind.into(),
            meta: Vec::new(),
            data: vec![Vec::new(); columns.len()],
            columns,
        }
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().position(|c| c == name).map(|k| self.data[k].as_slice())
    }

    pub fn rows(&self) -> usize {
        self.data.first().map_or(0, Vec::len)
    }

    pub fn format(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {MAGIC} {} {VERSION}", self.kind);
        for (k, v) in &self.meta {
            let _ = writeln!(s, "# {k} = {v}");
        }
        let _ = writeln!(s, "# {}", self.columns.join("\t"));
        for r in 0..self.rows() {
            for (c, col) in self.data.iter().enumerate() {
                if c > 0 {
                    s.push('\t');
                }
                let _ = write!(s, "{}", col[r]);
            }
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, first) = lines.next().ok_or_else(|| Error::Parse("empty file".into()))?;
        let mut head = first.strip_prefix("# ").unwrap_or("").split(' ');
        let kind = match (head.next(), head.next(), head.next(), head.next()) {
            (Some(MAGIC), Some(kind), Some(VERSION), None) if !kind.is_empty() => kind.to_string(),
            _ => return Err(Error::Parse(format!("line 1: expected `# {MAGIC} <kind> {VERSION}`, found {first:?}"))),
        };
        let mut meta = Vec::new();
        let mut columns = None;
        let mut data: Vec<Vec<f64>> = Vec::new();
        for (no, line) in lines {
            let no = no + 1;
            if columns.is_none() {
                let body = line
                    .strip_prefix("# ")
                    .ok_or_else(|| Error::Parse(format!("line {no}: expected a `# ` header line")))?;
                if let Some((k, v)) = body.split_once(" = ") {
                    if k.is_empty() || k.contains(char::is_whitespace) {
                        return Err(Error::Parse(format!("line {no}: bad metadata key {k:?}")));
                    }
                    if meta.iter().any(|(m, _): &(String, String)| m == k) {
                        return Err(Error::Parse(format!("line {no}: duplicate metadata key {k:?}")));
                    }
                    meta.push((k.to_string(), v.to_string()));
                } else {
                    let cols: Vec<String> = body.split('\t').map(str::to_string).collect();
                    if cols.iter().any(String::is_empty) {
                        return Err(Error::Parse(format!("line {no}: empty column name")));
                    }
                    data = vec![Vec::new(); cols.len()];
                    columns = Some(cols);
                }
                continue;
            }
            let mut n = 0;
            for (k, field) in line.split('\t').enumerate() {
                let col = data
                    .get_mut(k)
                    .ok_or_else(|| Error::Parse(format!("line {no}: more fields than columns")))?;
                let v: f64 = field
                    .parse()
                    .map_err(|_| Error::Parse(format!("line {no}: field {} is not a number: {field:?}", k + 1)))?;
                col.push(v);
                n += 1;
            }
            if n != data.len() {
                return Err(Error::Parse(format!("line {no}: {n} fields for {} columns", data.len())));
            }
        }
        let columns = columns.ok_or_else(|| Error::Parse("missing column header".into()))?;
        Ok(Self {
            kind,
            meta,
            columns,
            data,
        })
    }

    fn expect_kind(&self, kind: &str) -> Result<()> {
        if self.kind != kind {
            return Err(Error::Parse(format!("expected a {kind} file, found {}", self.kind)));
        }
        Ok(())
    }

    fn expect_columns(&self, expected: &[&str]) -> Result<()> {
        if self.columns.len() != expected.len() || self.columns.iter().zip(expected).any(|(a, b)| a != b) {
            return Err(Error::Parse(format!("unexpected columns {:?}, expected {expected:?}", self.columns)));
        }
        Ok(())
    }
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn format_trajectory(rec: &TrajectoryRecord) -> Result<String> {
    rec.validate()?;
    let mut cols: Vec<String> = TRAJECTORY_COLUMNS.iter().map(|s| s.to_string()).collect();
    let mut data = vec![
        rec.t.clone(),
        rec.mu_z.clone(),
        rec.norm.clone(),
        rec.n_c.clone(),
        rec.e_e.clone(),
        rec.e_c.clone(),
        rec.e_int.clone(),
        rec.e_dse.clone(),
        rec.e_tot.clone(),
    ];
    if let (Some(z), Some(x)) = (&rec.z, &rec.x_c) {
        cols.extend(COORDINATE_COLUMNS.iter().map(|s| s.to_string()));
        data.push(z.clone());
        data.push(x.clone());
    }
    let mut t = Table::new("trajectory", cols);
    t.data = data;
    Ok(t.format())
}

pub fn parse_trajectory(text: &str) -> Result<TrajectoryRecord> {
    let t = Table::parse(text)?;
    t.expect_kind("trajectory")?;
    let coords = t.columns.len() == TRAJECTORY_COLUMNS.len() + 2;
    if coords {
        let all: Vec<&str> = TRAJECTORY_COLUMNS.iter().chain(&COORDINATE_COLUMNS).copied().collect();
        t.expect_columns(&all)?;
    } else {
        t.expect_columns(&TRAJECTORY_COLUMNS)?;
    }
    let mut d = t.data.into_iter();
    let mut next = || d.next().unwrap_or_default();
    Ok(TrajectoryRecord {
        t: next(),
        mu_z: next(),
        norm: next(),
        n_c: next(),
        e_e: next(),
        e_c: next(),
        e_int: next(),
        e_dse: next(),
        e_tot: next(),
        z: coords.then(&mut next),
        x_c: coords.then(&mut next),
    })
}

pub fn write_trajectory(path: &Path, rec: &TrajectoryRecord) -> Result<()> {
    write_text(path, &format_trajectory(rec)?)
}

pub fn read_trajectory(path: &Path) -> Result<TrajectoryRecord> {
    parse_trajectory(&read_text(path)?)
}

pub fn format_populations(rec: &PopulationRecord) -> Result<String> {
    rec.validate()?;
    if rec.labels.iter().any(|l| l.is_empty() || l.contains(['\t', '\n', '=']) || l == "t[au]") {
        return Err(Error::Domain("population labels must be non-empty without tabs, newlines or `=`".into()));
    }
    let mut cols = vec!["t[au]".to_string()];
    cols.extend(rec.labels.iter().cloned());
    let mut t = Table::new("populations", cols);
    t.data = std::iter::once(rec.t.clone()).chain(rec.values.iter().cloned()).collect();
    Ok(t.format())
}

pub fn parse_populations(text: &str) -> Result<PopulationRecord> {
    let t = Table::parse(text)?;
    t.expect_kind("populations")?;
    if t.columns.first().map(String::as_str) != Some("t[au]") {
        return Err(Error::Parse("population file must start with a t[au] column".into()));
    }
    let mut d = t.data.into_iter();
    let time = d.next().unwrap_or_default();
    Ok(PopulationRecord {
        t: time,
        labels: t.columns[1..].to_vec(),
        values: d.collect(),
    })
}

pub fn write_populations(path: &Path, rec: &PopulationRecord) -> Result<()> {
    write_text(path, &format_populations(rec)?)
}

pub fn read_populations(path: &Path) -> Result<PopulationRecord> {
    parse_populations(&read_text(path)?)
}

pub fn format_spectrum(spec: &SpectrumRecord) -> Result<String> {
    spec.validate()?;
    let mut cols = vec![SPECTRUM_COLUMNS[0].to_string()];
    let mut data = vec![spec.omega.clone()];
    if let Some(order) = spec.harmonic_order() {
        cols.push(ORDER_COLUMN.into());
        data.push(order);
    }
    cols.push(SPECTRUM_COLUMNS[1].into());
    data.push(spec.intensity.clone());
    if let Some(s) = &spec.smoothed {
        cols.push(SMOOTHED_COLUMN.into());
        data.push(s.clone());
    }
    let mut t = Table::new("spectrum", cols);
    if let Some(w0) = spec.omega0 {
        t.meta.push(("omega0".into(), format!("{w0}")));
    }
    t.data = data;
    Ok(t.format())
}

pub fn parse_spectrum(text: &str) -> Result<SpectrumRecord> {
    let t = Table::parse(text)?;
    t.expect_kind("spectrum")?;
    for (k, _) in &t.meta {
        if k != "omega0" {
            return Err(Error::Parse(format!("unknown spectrum metadata `{k}`")));
        }
    }
    let omega0 = t
        .meta("omega0")
        .map(|v| v.parse::<f64>().map_err(|_| Error::Parse(format!("bad omega0 {v:?}"))))
        .transpose()?;
    let mut expected = vec![SPECTRUM_COLUMNS[0]];
    if omega0.is_some() {
        expected.push(ORDER_COLUMN);
    }
    expected.push(SPECTRUM_COLUMNS[1]);
    let smoothed = t.columns.len() == expected.len() + 1;
    if smoothed {
        expected.push(SMOOTHED_COLUMN);
    }
    t.expect_columns(&expected)?;
    let spec = SpectrumRecord {
        omega: t.data[0].clone(),
        intensity: t.column(SPECTRUM_COLUMNS[1]).unwrap_or_default().to_vec(),
        smoothed: smoothed.then(|| t.data[t.data.len() - 1].clone()),
        omega0,
    };
    spec.validate().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(spec)
}

pub fn write_spectrum(path: &Path, spec: &SpectrumRecord) -> Result<()> {
    write_text(path, &format_spectrum(spec)?)
}

pub fn read_spectrum(path: &Path) -> Result<SpectrumRecord> {
    parse_spectrum(&read_text(path)?)
}

pub fn format_cutoff_fit(fit: &CutoffFit, range: (f64, f64)) -> String {
    let mut t = Table::new("cutoff-fit", FIT_COLUMNS.iter().map(|s| s.to_string()).collect());
    let row = [
        fit.a,
        fit.b,
        fit.omega_a,
        fit.omega_b,
        fit.omega_cut,
        fit.residual,
        if fit.degenerate { 1.0 } else { 0.0 },
        range.0,
        range.1,
    ];
    for (col, v) in t.data.iter_mut().zip(row) {
        col.push(v);
    }
    t.format()
}

pub fn parse_cutoff_fit(text: &str) -> Result<(CutoffFit, (f64, f64))> {
    let t = Table::parse(text)?;
    t.expect_kind("cutoff-fit")?;
    t.expect_columns(&FIT_COLUMNS)?;
    if t.rows() != 1 {
        return Err(Error::Parse(format!("cutoff-fit file holds {} rows, expected 1", t.rows())));
    }
    let v: Vec<f64> = t.data.iter().map(|c| c[0]).collect();
    let degenerate = match v[6] {
        0.0 => false,
        1.0 => true,
        x => return Err(Error::Parse(format!("degenerate flag must be 0 or 1, found {x}"))),
    };
    Ok((
        CutoffFit {
            a: v[0],
            b: v[1],
            omega_a: v[2],
            omega_b: v[3],
            omega_cut: v[4],
            residual: v[5],
            degenerate,
        },
        (v[7], v[8]),
    ))
}

pub fn write_cutoff_fit(path: &Path, fit: &CutoffFit, range: (f64, f64)) -> Result<()> {
    write_text(path, &format_cutoff_fit(fit, range))
}

pub fn read_cutoff_fit(path: &Path) -> Result<(CutoffFit, (f64, f64))> {
    parse_cutoff_fit(&read_text(path)?)
}
