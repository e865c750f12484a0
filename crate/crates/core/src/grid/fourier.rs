//! Spectral (FFT) application of the kinetic energy on product grids.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{Axis, GridSpec};

type FftPlan = Arc<dyn Fft<f64>>;

/// Dense Fourier-grid kinetic matrix `-1/2 d²/dx²` on one axis.
///
/// `T_ij = (1/n) sum_m (k_m² / 2) cos(k_m (x_i - x_j))`, i.e. exactly the matrix of
/// the FFT-based operator on the same periodic grid.
pub fn dense_kinetic_matrix(axis: &Axis) -> DMatrix<f64> {
    let n = axis.len();
    let k = axis.wavenumbers();
    let dx = axis.spacing();
    let row: Vec<f64> = (0..n)
        .map(|d| {
            k.iter()
                .map(|&km| 0.5 * km * km * (km * d as f64 * dx).cos())
                .sum::<f64>()
                / n as f64
        })
        .collect();
    DMatrix::from_fn(n, n, |i, j| row[i.abs_diff(j)])
}

/// Applies diagonal-in-momentum operators to wavefunctions on a [`GridSpec`].
///
/// Owns FFT plans and scratch, so one instance per propagation.
pub struct SpectralKinetic {
    n_z: usize,
    n_x: usize,
    fft_z: Arc<dyn Fft<f64>>,
    ifft_z: Arc<dyn Fft<f64>>,
    fft_x: Option<(FftPlan, FftPlan)>,
    /// `k_z² / 2` and `k_x² / 2`.
    tz: Vec<f64>,
    tx: Vec<f64>,
    buf: Vec<Complex64>,
    tbuf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl std::fmt::Debug for SpectralKinetic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralKinetic")
            .field("n_z", &self.n_z)
            .field("n_x", &self.n_x)
            .finish()
    }
}

impl SpectralKinetic {
    pub fn new(grid: &GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        let n_z = grid.n_z();
        let n_x = grid.n_xc();
        let fft_z = planner.plan_fft_forward(n_z);
        let ifft_z = planner.plan_fft_inverse(n_z);
        let fft_x = grid
            .cavity
            .map(|_| (planner.plan_fft_forward(n_x), planner.plan_fft_inverse(n_x)));
        let half_sq = |a: &Axis| a.wavenumbers().iter().map(|k| 0.5 * k * k).collect::<Vec<_>>();
        let tz = half_sq(&grid.electron);
        let tx = grid.cavity.as_ref().map_or_else(|| vec![0.0], half_sq);
        let mut scratch_len = fft_z.get_inplace_scratch_len().max(ifft_z.get_inplace_scratch_len());
        if let Some((f, i)) = &fft_x {
            scratch_len = scratch_len.max(f.get_inplace_scratch_len()).max(i.get_inplace_scratch_len());
        }
        let len = n_z * n_x;
        Self {
            n_z,
            n_x,
            fft_z,
            ifft_z,
            fft_x,
            tz,
            tx,
            buf: vec![Complex64::default(); len],
            tbuf: vec![Complex64::default(); len],
            scratch: vec![Complex64::default(); scratch_len],
        }
    }

    /// Largest kinetic energy on the grid.
    pub fn max_kinetic(&self) -> f64 {
        let max = |v: &[f64]| v.iter().copied().fold(0.0_f64, f64::max);
        max(&self.tz) + max(&self.tx)
    }

    /// Kinetic energy `k_z²/2 + k_x²/2` of the momentum-space point `(kz, kx)`.
    pub fn kinetic_energy_at(&self, iz: usize, ix: usize) -> f64 {
        self.tz[iz] + self.tx[ix]
    }

    /// Forward transform of `psi` into `self.tbuf`, laid out x-major (`[ix * n_z + iz]`).
    fn forward(&mut self, psi: &[Complex64]) {
        let (nz, nx) = (self.n_z, self.n_x);
        self.buf.copy_from_slice(psi);
        if let Some((fx, _)) = &self.fft_x {
            fx.process_with_scratch(&mut self.buf, &mut self.scratch);
            transpose(&self.buf, &mut self.tbuf, nz, nx);
        } else {
            self.tbuf.copy_from_slice(&self.buf);
        }
        self.fft_z.process_with_scratch(&mut self.tbuf, &mut self.scratch);
    }

    /// Inverse of [`Self::forward`] from `self.tbuf` into `out`, without the 1/N factor.
    fn backward(&mut self, out: &mut [Complex64]) {
        let (nz, nx) = (self.n_z, self.n_x);
        self.ifft_z.process_with_scratch(&mut self.tbuf, &mut self.scratch);
        if let Some((_, ix)) = &self.fft_x {
            transpose(&self.tbuf, out, nx, nz);
            ix.process_with_scratch(out, &mut self.scratch);
        } else {
            out.copy_from_slice(&self.tbuf);
        }
    }

    /// `out = T psi`.
    pub fn apply(&mut self, psi: &[Complex64], out: &mut [Complex64]) {
        self.apply_parts(psi, out, true, true);
    }

    /// `out = (T_z if with_z) + (T_x if with_x)` applied to `psi`.
    pub fn apply_parts(&mut self, psi: &[Complex64], out: &mut [Complex64], with_z: bool, with_x: bool) {
        self.forward(psi);
        let scale = 1.0 / (self.n_z * self.n_x) as f64;
        let (nz, nx) = (self.n_z, self.n_x);
        for ix in 0..nx {
            let tx = if with_x { self.tx[ix] } else { 0.0 };
            let row = &mut self.tbuf[ix * nz..(ix + 1) * nz];
            for (iz, c) in row.iter_mut().enumerate() {
                let tz = if with_z { self.tz[iz] } else { 0.0 };
                *c *= (tz + tx) * scale;
            }
        }
        self.backward(out);
    }

    /// Multiplies `psi` in momentum space by `factor[ix * n_z + iz]`, in place.
    /// `factor` must already include the 1/N normalization.
    pub fn apply_momentum_factor(&mut self, psi: &mut [Complex64], factor: &[Complex64]) {
        self.forward(psi);
        self.tbuf.iter_mut().zip(factor).for_each(|(c, f)| *c *= f);
        let mut out = std::mem::take(&mut self.buf);
        self.backward(&mut out);
        psi.copy_from_slice(&out);
        self.buf = out;
    }

    /// `exp(-i T dt) / N` in the layout expected by [`Self::apply_momentum_factor`].
    pub fn propagator_factor(&self, dt: f64) -> Vec<Complex64> {
        let scale = 1.0 / (self.n_z * self.n_x) as f64;
        let mut out = Vec::with_capacity(self.n_z * self.n_x);
        for ix in 0..self.n_x {
            for iz in 0..self.n_z {
                let e = self.tz[iz] + self.tx[ix];
                out.push(Complex64::from_polar(scale, -e * dt));
            }
        }
        out
    }

    /// Grid sums `(sum conj(psi) T_z psi, sum conj(psi) T_x psi)`, real parts.
    pub fn kinetic_sums(&mut self, psi: &[Complex64]) -> (f64, f64) {
        self.forward(psi);
        let (nz, nx) = (self.n_z, self.n_x);
        let scale = 1.0 / (nz * nx) as f64;
        let (mut sz, mut sx) = (0.0, 0.0);
        for ix in 0..nx {
            for iz in 0..nz {
                let p = self.tbuf[ix * nz + iz].norm_sqr();
                sz += self.tz[iz] * p;
                sx += self.tx[ix] * p;
            }
        }
        (sz * scale, sx * scale)
    }
}

/// Transposes a row-major `rows x cols` matrix.
fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    const B: usize = 16;
    for r0 in (0..rows).step_by(B) {
        for c0 in (0..cols).step_by(B) {
            for r in r0..(r0 + B).min(rows) {
                for c in c0..(c0 + B).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}
