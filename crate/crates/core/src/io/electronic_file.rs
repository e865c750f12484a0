//! Sectioned text format for electronic data.
//!
//! ```text
//! [meta]
//! n_states = 2
//! I_p = 0.594        (optional)
//! d = 10             (optional escape length)
//! [energies]
//! -0.5
//! -0.1
//! [dipole_z]         (also dipole_x, dipole_y; at least one)
//! 0 1.2
//! 1.2 0
//! [rates]            (optional, one per state)
//! [cis]              (optional rows: state occupied virtual D eps)
//! ```
//!
//! `#` starts a comment line.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use crate::electronic::{ionization_rates_cis, CisAmplitude, ElectronicData};
use crate::error::{Error, Result};

use super::tsv::{read_text, write_text};

const SECTIONS: [&str; 7] = ["meta", "energies", "dipole_x", "dipole_y", "dipole_z", "rates", "cis"];

pub fn parse_electronic_data(text: &str) -> Result<ElectronicData> {
    let mut sections: Vec<(&str, Vec<(usize, &str)>)> = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let no = no + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            if !SECTIONS.contains(&name) {
                return Err(Error::Parse(format!("line {no}: unknown section [{name}]")));
            }
            if sections.iter().any(|(s, _)| *s == name) {
                return Err(Error::Parse(format!("line {no}: duplicate section [{name}]")));
            }
            sections.push((name, Vec::new()));
            continue;
        }
        let (_, body) = sections
            .last_mut()
            .ok_or_else(|| Error::Parse(format!("line {no}: content before the first section")))?;
        body.push((no, line));
    }
    let section = |name: &str| sections.iter().find(|(s, _)| *s == name).map(|(_, b)| b.as_slice());

    let mut n_states = None;
    let mut ip = None;
    let mut escape = None;
    for &(no, line) in section("meta").ok_or_else(|| Error::Parse("missing [meta] section".into()))? {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {no}: expected `key = value`")))?;
        let (k, v) = (k.trim(), v.trim());
        let slot = match k {
            "n_states" => {
                if n_states.is_some() {
                    return Err(Error::Parse(format!("line {no}: duplicate key n_states")));
                }
                let n: usize = v.parse().map_err(|_| Error::Parse(format!("line {no}: bad n_states {v:?}")))?;
                if n == 0 {
                    return Err(Error::Parse(format!("line {no}: n_states must be positive")));
                }
                n_states = Some(n);
                continue;
            }
            "I_p" => &mut ip,
            "d" => &mut escape,
            _ => return Err(Error::Parse(format!("line {no}: unknown [meta] key `{k}`"))),
        };
        if slot.is_some() {
            return Err(Error::Parse(format!("line {no}: duplicate key {k}")));
        }
        *slot = Some(number(no, v)?);
    }
    let n = n_states.ok_or_else(|| Error::Parse("[meta] lacks n_states".into()))?;

    let column = |name: &str| -> Result<Option<Vec<f64>>> {
        let Some(body) = section(name) else { return Ok(None) };
        if body.len() != n {
            return Err(Error::Parse(format!("[{name}] has {} lines for n_states = {n}", body.len())));
        }
        body.iter().map(|&(no, l)| number(no, l)).collect::<Result<Vec<_>>>().map(Some)
    };
    let energies = column("energies")?.ok_or_else(|| Error::Parse("missing [energies] section".into()))?;
    let rates = column("rates")?;

    let mut dipole: [Option<DMatrix<f64>>; 3] = [None, None, None];
    for (slot, name) in dipole.iter_mut().zip(["dipole_x", "dipole_y", "dipole_z"]) {
        let Some(body) = section(name) else { continue };
        if body.len() != n {
            return Err(Error::Parse(format!("[{name}] has {} rows for n_states = {n}", body.len())));
        }
        let mut m = DMatrix::zeros(n, n);
        for (i, &(no, l)) in body.iter().enumerate() {
            let row: Vec<f64> = l.split_whitespace().map(|f| number(no, f)).collect::<Result<_>>()?;
            if row.len() != n {
                return Err(Error::Parse(format!("line {no}: [{name}] row has {} entries, expected {n}", row.len())));
            }
            for (j, v) in row.into_iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        *slot = Some(m);
    }

    let cis = section("cis")
        .map(|body| {
            body.iter()
                .map(|&(no, l)| {
                    let f: Vec<&str> = l.split_whitespace().collect();
                    if f.len() != 5 {
                        return Err(Error::Parse(format!("line {no}: [cis] rows need `state occupied virtual D eps`")));
                    }
                    let index = |s: &str| s.parse::<usize>().map_err(|_| Error::Parse(format!("line {no}: bad index {s:?}")));
                    Ok(CisAmplitude {
                        state: index(f[0])?,
                        occupied: index(f[1])?,
                        virtual_orbital: index(f[2])?,
                        coefficient: number(no, f[3])?,
                        virtual_energy: number(no, f[4])?,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?;

    let data = ElectronicData {
        energies,
        dipole,
        rates,
        cis,
        ionization_potential: ip,
        escape_length: escape,
    };
    data.validate().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(data)
}

fn number(no: usize, s: &str) -> Result<f64> {
    let v: f64 = s.parse().map_err(|_| Error::Parse(format!("line {no}: not a number: {s:?}")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("line {no}: non-finite value {s:?}")));
    }
    Ok(v)
}

pub fn format_electronic_data(data: &ElectronicData) -> Result<String> {
    data.validate()?;
    let mut s = String::new();
    let _ = writeln!(s, "[meta]\nn_states = {}", data.n_states());
    if let Some(ip) = data.ionization_potential {
        let _ = writeln!(s, "I_p = {ip}");
    }
    if let Some(d) = data.escape_length {
        let _ = writeln!(s, "d = {d}");
    }
    s.push_str("[energies]\n");
    for e in &data.energies {
        let _ = writeln!(s, "{e}");
    }
    for (m, name) in data.dipole.iter().zip(["dipole_x", "dipole_y", "dipole_z"]) {
        let Some(m) = m else { continue };
        let _ = writeln!(s, "[{name}]");
        for i in 0..m.nrows() {
            let row: Vec<String> = (0..m.ncols()).map(|j| format!("{}", m[(i, j)])).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
    }
    if let Some(r) = &data.rates {
        s.push_str("[rates]\n");
        for g in r {
            let _ = writeln!(s, "{g}");
        }
    }
    if let Some(rows) = &data.cis {
        s.push_str("[cis]\n");
        for r in rows {
            let _ = writeln!(s, "{} {} {} {} {}", r.state, r.occupied, r.virtual_orbital, r.coefficient, r.virtual_energy);
        }
    }
    Ok(s)
}

pub fn write_electronic_data(path: &Path, data: &ElectronicData) -> Result<()> {
    write_text(path, &format_electronic_data(data)?)
}

/// Reads and validates a file. Without `[rates]`, rates are derived from
/// `[cis]` when both `I_p` and `d` are known.
pub fn load_electronic_data(path: &Path) -> Result<ElectronicData> {
    let mut data = parse_electronic_data(&read_text(path)?)?;
    if data.rates.is_none() {
        if let (Some(rows), Some(ip), Some(d)) = (&data.cis, data.ionization_potential, data.escape_length) {
            data.rates = Some(ionization_rates_cis(&data.energies, rows, ip, d)?);
        }
    }
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> ElectronicData {
        let mut d = ElectronicData::new(vec![-0.5, 0.1 + 0.2], DMatrix::from_row_slice(2, 2, &[0.0, 1.0 / 3.0, 1.0 / 3.0, -1e-17])).unwrap();
        d.ionization_potential = Some(0.594);
        d.escape_length = Some(10.0);
        d.cis = Some(vec![CisAmplitude {
            state: 1,
            occupied: 0,
            virtual_orbital: 3,
            coefficient: -0.9,
            virtual_energy: 0.25,
        }]);
        d
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let d = toy();
        let text = format_electronic_data(&d).unwrap();
        let back = parse_electronic_data(&text).unwrap();
        assert_eq!(back, d);
        assert_eq!(format_electronic_data(&back).unwrap(), text);
    }

    #[test]
    fn loading_derives_rates_from_cis() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("toy.dat");
        let mut d = toy();
        d.energies = vec![-0.5, 0.2];
        write_electronic_data(&p, &d).unwrap();
        // excitation 0.7 above I_p = 0.594
        let loaded = load_electronic_data(&p).unwrap();
        let r = loaded.rates.unwrap();
        assert_eq!(r[0], 0.0);
        assert!((r[1] - 0.81 * 0.5 / 10.0).abs() < 1e-15);
    }

    #[test]
    fn schema_violations_are_rejected() {
        let good = format_electronic_data(&toy()).unwrap();
        let cases = [
            good.replace("n_states = 2", "n_states = 3"),
            good.replace("[energies]", "[energy]"),
            good.replace("I_p = 0.594", "I_p = 0.594\nI_p = 1"),
            good.replace("d = 10", "e = 10"),
            good.replace("0.30000000000000004", "nan"),
            good.replace("[dipole_z]\n0 0.3333333333333333", "[dipole_z]\n0 0.3"),
            good.replace("1 0 3 -0.9 0.25", "1 0 3 -0.9"),
            format!("x = 1\n{good}"),
            good.replace("[meta]\n", ""),
        ];
        for bad in &cases {
            assert!(parse_electronic_data(bad).is_err(), "{bad}");
        }
    }
}
