//! Wavefunction dump/restore: a short text header followed by the raw
//! little-endian `(re, im)` f64 pairs in z-major order.
//!
//! ```text
//! hhgqed-checkpoint 1
//! n_z 512
//! z_max 100
//! n_xc 64
//! xc_max 20
//! t 551.5
//! end
//! <n_z * n_xc * 16 bytes>
//! ```
//!
//! `n_xc 1` (with `xc_max 0`) marks a grid without cavity coordinate.

use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};

use super::{Axis, GridSpec, GridState};

const MAGIC: &str = "hhgqed-checkpoint 1";
const MAX_HEADER: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub grid: GridSpec,
    pub t: f64,
    pub psi: Vec<Complex64>,
}

impl Checkpoint {
    pub fn from_state(state: &GridState) -> Self {
        Self {
            grid: state.grid,
            t: state.t,
            psi: state.psi.clone(),
        }
    }

    pub fn into_state(self) -> Result<GridState> {
        GridState::new(self.grid, self.psi, self.t)
    }
}

pub fn write_checkpoint_bytes(state: &GridState) -> Vec<u8> {
    let (n_xc, xc_max) = state.grid.cavity.map_or((1, 0.0), |a| (a.len(), a.extent()));
    let header = format!(
        "{MAGIC}\nn_z {}\nz_max {}\nn_xc {n_xc}\nxc_max {xc_max}\nt {}\nend\n",
        state.grid.n_z(),
        state.grid.electron.extent(),
        state.t
    );
    let mut out = Vec::with_capacity(header.len() + 16 * state.psi.len());
    out.extend_from_slice(header.as_bytes());
    for c in &state.psi {
        out.extend_from_slice(&c.re.to_le_bytes());
        out.extend_from_slice(&c.im.to_le_bytes());
    }
    out
}

pub fn write_checkpoint(path: &Path, state: &GridState) -> Result<()> {
    std::fs::write(path, write_checkpoint_bytes(state)).map_err(|e| Error::io(path, e))
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    read_checkpoint_bytes(&bytes)
}

pub fn read_checkpoint_bytes(bytes: &[u8]) -> Result<Checkpoint> {
    let bad = |m: String| Error::Parse(format!("checkpoint: {m}"));
    let window = &bytes[..bytes.len().min(MAX_HEADER)];
    let end = window
        .windows(5)
        .position(|w| w == b"\nend\n")
        .ok_or_else(|| bad("header terminator `end` not found".into()))?;
    let header = std::str::from_utf8(&bytes[..end]).map_err(|_| bad("header is not UTF-8".into()))?;
    let payload = &bytes[end + 5..];

    let mut lines = header.lines();
    if lines.next() != Some(MAGIC) {
        return Err(bad(format!("missing `{MAGIC}` line")));
    }
    let mut fields: [Option<&str>; 5] = [None; 5];
    const KEYS: [&str; 5] = ["n_z", "z_max", "n_xc", "xc_max", "t"];
    for line in lines {
        let (k, v) = line
            .split_once(' ')
            .ok_or_else(|| bad(format!("malformed header line `{line}`")))?;
        let slot = KEYS
            .iter()
            .position(|&key| key == k)
            .ok_or_else(|| bad(format!("unknown header key `{k}`")))?;
        if fields[slot].replace(v.trim()).is_some() {
            return Err(bad(format!("duplicate header key `{k}`")));
        }
    }
    let get = |i: usize| fields[i].ok_or_else(|| bad(format!("missing header key `{}`", KEYS[i])));
    let int = |i: usize| -> Result<usize> { get(i)?.parse().map_err(|_| bad(format!("`{}` is not an integer", KEYS[i]))) };
    let float = |i: usize| -> Result<f64> {
        let v: f64 = get(i)?.parse().map_err(|_| bad(format!("`{}` is not a number", KEYS[i])))?;
        v.is_finite().then_some(v).ok_or_else(|| bad(format!("`{}` is not finite", KEYS[i])))
    };
    let (n_z, z_max, n_xc, xc_max, t) = (int(0)?, float(1)?, int(2)?, float(3)?, float(4)?);
    let electron = Axis::new(n_z, z_max).map_err(|e| bad(e.to_string()))?;
    let cavity = match n_xc {
        1 => None,
        n => Some(Axis::new(n, xc_max).map_err(|e| bad(e.to_string()))?),
    };
    let grid = GridSpec { electron, cavity };
    let expected = grid
        .len()
        .checked_mul(16)
        .ok_or_else(|| bad("grid dimensions overflow".into()))?;
    if payload.len() != expected {
        return Err(bad(format!("payload has {} bytes, expected {expected}", payload.len())));
    }
    let psi = payload
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    Ok(Checkpoint { grid, t, psi })
}
