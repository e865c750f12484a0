//! Harmonic spectra from dipole time series and the piecewise cutoff fit.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::record::{uniform_step, TrajectoryRecord};

/// Second time derivative by central differences; the end points use the
/// one-sided second-order stencil `(2 f0 - 5 f1 + 4 f2 - f3) / dt²`.
pub fn dipole_acceleration(t: &[f64], mu: &[f64]) -> Result<Vec<f64>> {
    if t.len() != mu.len() {
        return Err(Error::Domain("time and dipole series differ in length".into()));
    }
    if mu.len() < 3 {
        return Err(Error::Domain("need at least three samples for a second derivative".into()));
    }
    let dt = uniform_step(t)?;
    let n = mu.len();
    let inv = 1.0 / (dt * dt);
    let mut a = vec![0.0; n];
    for k in 1..n - 1 {
        a[k] = (mu[k + 1] - 2.0 * mu[k] + mu[k - 1]) * inv;
    }
    if n >= 4 {
        a[0] = (2.0 * mu[0] - 5.0 * mu[1] + 4.0 * mu[2] - mu[3]) * inv;
        a[n - 1] = (2.0 * mu[n - 1] - 5.0 * mu[n - 2] + 4.0 * mu[n - 3] - mu[n - 4]) * inv;
    } else {
        a[0] = a[1];
        a[2] = a[1];
    }
    Ok(a)
}

/// Hann window `sin²(pi (t - t0) / t_f)`, exactly zero at both ends.
pub fn hann_window(n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![0.0; n];
    }
    let m = (n - 1) as f64;
    (0..n)
        .map(|k| {
            if k == 0 || k == n - 1 {
                0.0
            } else {
                (PI * k as f64 / m).sin().powi(2)
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRecord {
    /// `2 pi k / t_f` for `k = 0 ..` up to the Nyquist frequency.
    pub omega: Vec<f64>,
    pub intensity: Vec<f64>,
    pub smoothed: Option<Vec<f64>>,
    /// Driving frequency for the harmonic-order axis.
    pub omega0: Option<f64>,
}

impl SpectrumRecord {
    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        if self.omega.len() < 2 {
            0.0
        } else {
            self.omega[1] - self.omega[0]
        }
    }

    pub fn harmonic_order(&self) -> Option<Vec<f64>> {
        self.omega0.map(|w0| self.omega.iter().map(|w| w / w0).collect())
    }

    pub fn validate(&self) -> Result<()> {
        if self.intensity.len() != self.omega.len() || self.smoothed.as_ref().is_some_and(|s| s.len() != self.omega.len()) {
            return Err(Error::Domain("spectrum columns differ in length".into()));
        }
        if self.omega.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("spectrum frequencies must be strictly ascending".into()));
        }
        if self.intensity.iter().any(|i| !(*i >= 0.0)) {
            return Err(Error::Domain("spectrum intensities must be >= 0".into()));
        }
        Ok(())
    }
}

/// `I(w_k) = |dt sum_j w(t_j) a(t_j) exp(-i w_k t_j)|²` on `w_k = 2 pi k / t_f`,
/// `t_f` the sampled span, up to the Nyquist frequency.
pub fn hhg_spectrum(t: &[f64], a: &[f64], omega0: Option<f64>) -> Result<SpectrumRecord> {
    if t.len() != a.len() {
        return Err(Error::Domain("time and acceleration series differ in length".into()));
    }
    let dt = uniform_step(t)?;
    let n = t.len();
    let m = n - 1;
    let t_f = t[n - 1] - t[0];
    let w = hann_window(n);
    // the window vanishes at t_f, so the sum over the first n - 1 samples is a
    // length-(n - 1) DFT on exactly the 2 pi k / t_f grid
    let mut buf: Vec<Complex64> = (0..m).map(|j| Complex64::new(w[j] * a[j], 0.0)).collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let n_out = m / 2 + 1;
    let omega = (0..n_out).map(|k| 2.0 * PI * k as f64 / t_f).collect();
    let intensity = buf[..n_out].iter().map(|c| c.norm_sqr() * dt * dt).collect();
    Ok(SpectrumRecord {
        omega,
        intensity,
        smoothed: None,
        omega0,
    })
}

/// Spectrum of a trajectory's dipole (acceleration by finite differences).
pub fn spectrum_from_trajectory(traj: &TrajectoryRecord, omega0: Option<f64>) -> Result<SpectrumRecord> {
    let a = dipole_acceleration(&traj.t, &traj.mu_z)?;
    hhg_spectrum(&traj.t, &a, omega0)
}

/// Boxcar mean over `[w - delta, w + delta]`, truncated at the spectrum edges.
pub fn smooth_average(values: &[f64], spacing: f64, delta_omega: f64) -> Result<Vec<f64>> {
    if !(spacing > 0.0) || !(delta_omega >= spacing * (1.0 - 1e-12)) {
        return Err(Error::Domain(format!(
            "averaging half-width {delta_omega} must be at least the grid spacing {spacing}"
        )));
    }
    let h = (delta_omega / spacing + 1e-9).floor() as usize;
    let n = values.len();
    // direct window sums: spectra span tens of decades, so running sums would
    // lose the floor to cancellation
    Ok((0..n)
        .map(|k| {
            let lo = k.saturating_sub(h);
            let hi = (k + h).min(n - 1);
            values[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect())
}

/// Adds the smoothed column with half-width `delta_omega` (default `2 w0`).
pub fn smooth_spectrum(spec: &mut SpectrumRecord, delta_omega: Option<f64>) -> Result<()> {
    let d = match (delta_omega, spec.omega0) {
        (Some(d), _) => d,
        (None, Some(w0)) => 2.0 * w0,
        (None, None) => return Err(Error::Domain("smoothing width needs either delta_omega or omega0".into())),
    };
    spec.smoothed = Some(smooth_average(&spec.intensity, spec.spacing(), d)?);
    Ok(())
}

/// Result of the plateau / linear descent / noise-floor fit of a log spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffFit {
    pub a: f64,
    pub b: f64,
    pub omega_a: f64,
    pub omega_b: f64,
    pub omega_cut: f64,
    pub residual: f64,
    /// Set when the optimum has no plateau or no noise points, `A <= B`, or `w_a >= w_b`.
    pub degenerate: bool,
}

/// Piecewise model: `A` below `w_a`, linear from `A` to `B` on `[w_a, w_b]`, `B` above.
pub fn cutoff_model(omega: f64, a: f64, b: f64, omega_a: f64, omega_b: f64) -> f64 {
    if omega <= omega_a {
        a
    } else if omega >= omega_b {
        b
    } else {
        a + (b - a) * (omega - omega_a) / (omega_b - omega_a)
    }
}

/// Least-squares `(A, B)` for fixed breakpoints and the residual, from sufficient statistics.
#[derive(Debug, Clone, Copy, Default)]
struct Sums {
    n: f64,
    w: f64,
    w2: f64,
    y: f64,
    wy: f64,
    y2: f64,
}

impl Sums {
    fn sub(&self, o: &Sums) -> Sums {
        Sums {
            n: self.n - o.n,
            w: self.w - o.w,
            w2: self.w2 - o.w2,
            y: self.y - o.y,
            wy: self.wy - o.wy,
            y2: self.y2 - o.y2,
        }
    }
}

/// `(A, B, residual)` given plateau / ramp / all-point sums.
fn solve_ab(plateau: &Sums, ramp: &Sums, all: &Sums, wa: f64, wb: f64) -> Option<(f64, f64, f64)> {
    let l = wb - wa;
    if !(l > 0.0) {
        return None;
    }
    let su_r = (wb * ramp.n - ramp.w) / l;
    let suu_r = (wb * wb * ramp.n - 2.0 * wb * ramp.w + ramp.w2) / (l * l);
    let suy_r = (wb * ramp.y - ramp.wy) / l;
    let su = plateau.n + su_r;
    let suu = plateau.n + suu_r;
    let suy = plateau.y + suy_r;
    let svv = all.n - 2.0 * su + suu;
    let suv = su - suu;
    let svy = all.y - suy;
    let det = suu * svv - suv * suv;
    if !(det > 1e-12 * (suu * svv).max(1e-300)) {
        return None;
    }
    let a = (suy * svv - svy * suv) / det;
    let b = (svy * suu - suy * suv) / det;
    let r = all.y2 - 2.0 * (a * suy + b * svy) + a * a * suu + 2.0 * a * b * suv + b * b * svv;
    Some((a, b, r))
}

struct FitData<'a> {
    w: &'a [f64],
    y: &'a [f64],
    prefix: Vec<Sums>,
}

impl<'a> FitData<'a> {
    fn new(w: &'a [f64], y: &'a [f64]) -> Self {
        let mut prefix = Vec::with_capacity(w.len() + 1);
        let mut s = Sums::default();
        prefix.push(s);
        for (&wi, &yi) in w.iter().zip(y) {
            s.n += 1.0;
            s.w += wi;
            s.w2 += wi * wi;
            s.y += yi;
            s.wy += wi * yi;
            s.y2 += yi * yi;
            prefix.push(s);
        }
        Self { w, y, prefix }
    }

    /// Objective from prefix sums; breakpoints between samples, plateau `w <= wa`.
    fn fast(&self, wa: f64, wb: f64) -> f64 {
        let ia = self.w.partition_point(|&x| x <= wa);
        let ib = self.w.partition_point(|&x| x < wb);
        let all = self.prefix[self.w.len()];
        let plateau = self.prefix[ia];
        let ramp = self.prefix[ib.max(ia)].sub(&self.prefix[ia]);
        solve_ab(&plateau, &ramp, &all, wa, wb).map_or(f64::INFINITY, |r| r.2)
    }

    /// `(A, B, residual)` with directly accumulated sums and residual.
    fn exact(&self, wa: f64, wb: f64) -> Option<(f64, f64, f64)> {
        let mut plateau = Sums::default();
        let mut ramp = Sums::default();
        let mut all = Sums::default();
        for (&wi, &yi) in self.w.iter().zip(self.y) {
            let s = if wi <= wa {
                &mut plateau
            } else if wi < wb {
                &mut ramp
            } else {
                &mut all
            };
            s.n += 1.0;
            s.w += wi;
            s.w2 += wi * wi;
            s.y += yi;
            s.wy += wi * yi;
        }
        let tail = all;
        all = Sums {
            n: plateau.n + ramp.n + tail.n,
            w: plateau.w + ramp.w + tail.w,
            w2: plateau.w2 + ramp.w2 + tail.w2,
            y: plateau.y + ramp.y + tail.y,
            wy: plateau.wy + ramp.wy + tail.wy,
            y2: 0.0,
        };
        let (a, b, _) = solve_ab(&plateau, &ramp, &all, wa, wb)?;
        let r = self
            .w
            .iter()
            .zip(self.y)
            .map(|(&wi, &yi)| (yi - cutoff_model(wi, a, b, wa, wb)).powi(2))
            .sum();
        Some((a, b, r))
    }
}

/// Number of candidate breakpoints in the coarse grid search.
const GRID_CANDIDATES: usize = 240;

/// Least-squares fit of the piecewise model to `(omega, log_intensity)` restricted
/// to `range` (inclusive). Coarse grid search over breakpoints with closed-form
/// `(A, B)`, then Nelder-Mead refinement of `(w_a, w_b)`.
pub fn fit_cutoff(omega: &[f64], log_intensity: &[f64], range: (f64, f64)) -> Result<CutoffFit> {
    if omega.len() != log_intensity.len() {
        return Err(Error::Domain("frequency and intensity columns differ in length".into()));
    }
    let (lo, hi) = range;
    if !(lo < hi) {
        return Err(Error::Domain(format!("empty fit range [{lo}, {hi}]")));
    }
    let first = omega.partition_point(|&w| w < lo);
    let last = omega.partition_point(|&w| w <= hi);
    let w = &omega[first..last];
    let y = &log_intensity[first..last];
    if w.len() < 4 {
        return Err(Error::Domain(format!("fit range [{lo}, {hi}] holds only {} points", w.len())));
    }
    if y.iter().any(|v| !v.is_finite()) || w.windows(2).any(|p| !(p[1] > p[0])) {
        return Err(Error::Domain("fit data must be finite with ascending frequencies".into()));
    }
    let data = FitData::new(w, y);
    let n = w.len();

    // candidate breakpoints halfway between samples, including both ends
    let step = (n as f64 / GRID_CANDIDATES as f64).max(1.0);
    let mut cands: Vec<f64> = Vec::new();
    let mut k = 0.0;
    while (k as usize) < n - 1 {
        let i = k as usize;
        cands.push(0.5 * (w[i] + w[i + 1]));
        k += step;
    }
    cands.insert(0, w[0] - 0.5 * (w[1] - w[0]));
    cands.push(w[n - 1] + 0.5 * (w[n - 1] - w[n - 2]));
    cands.dedup();
    let mut best = (f64::INFINITY, cands[0], cands[cands.len() - 1]);
    for (i, &wa) in cands.iter().enumerate() {
        for &wb in &cands[i + 1..] {
            let r = data.fast(wa, wb);
            if r < best.0 {
                best = (r, wa, wb);
            }
        }
    }
    let scale = (w[n - 1] - w[0]) / cands.len() as f64;
    let objective = |p: [f64; 2]| data.exact(p[0], p[1]).map_or(f64::INFINITY, |r| r.2);
    let (pa, pb) = nelder_mead(objective, [best.1, best.2], scale);
    let (wa, wb) = if objective([pa, pb]) <= objective([best.1, best.2]) {
        (pa, pb)
    } else {
        (best.1, best.2)
    };
    let (wa, wb) = polish(&data, wa, wb).unwrap_or((wa, wb));
    let Some((a, b, residual)) = data.exact(wa, wb) else {
        return Ok(CutoffFit {
            a: f64::NAN,
            b: f64::NAN,
            omega_a: wa,
            omega_b: wb,
            omega_cut: 0.5 * (wa + wb),
            residual: f64::INFINITY,
            degenerate: true,
        });
    };
    let plateau = w.iter().filter(|&&x| x < wa).count();
    let noise = w.iter().filter(|&&x| x > wb).count();
    Ok(CutoffFit {
        a,
        b,
        omega_a: wa,
        omega_b: wb,
        omega_cut: 0.5 * (wa + wb),
        residual,
        degenerate: plateau == 0 || noise == 0 || a <= b || wa >= wb,
    })
}

/// Closed-form optimum near `(wa, wb)`.
///
/// With the sample partition fixed, the model is linear in (plateau, floor,
/// ramp line), so a least-squares solve gives the cell optimum whenever its
/// breakpoints land back in the cell. Optima on a kink are covered by pinning
/// one or both breakpoints to the neighbouring samples.
fn polish(data: &FitData, wa: f64, wb: f64) -> Option<(f64, f64)> {
    let w = data.w;
    let n = w.len();
    let ia = w.partition_point(|&x| x <= wa);
    let ib = w.partition_point(|&x| x < wb);
    let near = |k: usize| [k.checked_sub(1), (k < n).then_some(k)];
    let mut cands = vec![cell_fit(data, ia, ib, None, None)];
    for ka in near(ia).into_iter().flatten() {
        cands.push(cell_fit(data, ka + 1, ib, Some(w[ka]), None));
        for kb in near(ib).into_iter().flatten() {
            if kb > ka {
                cands.push(Some((w[ka], w[kb])));
            }
        }
    }
    for kb in near(ib).into_iter().flatten() {
        cands.push(cell_fit(data, ia, kb, None, Some(w[kb])));
    }
    cands
        .into_iter()
        .flatten()
        .filter_map(|(a, b)| data.exact(a, b).map(|r| (r.2, a, b)))
        .min_by(|x, y| x.0.total_cmp(&y.0))
        .map(|(_, a, b)| (a, b))
}

/// Least squares with plateau `[0, ia)`, ramp `[ia, ib)` and floor `[ib, n)`,
/// optionally pinning a breakpoint; `None` unless the fitted breakpoints fall in
/// the gaps that produce this partition.
fn cell_fit(data: &FitData, ia: usize, ib: usize, pin_a: Option<f64>, pin_b: Option<f64>) -> Option<(f64, f64)> {
    let (w, y) = (data.w, data.y);
    let n = w.len();
    if ia == 0 || ib >= n || ib < ia + 2 {
        return None;
    }
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let regress = |xs: &[f64], ys: &[f64]| -> (f64, f64, f64) {
        let mx = mean(xs);
        let my = mean(ys);
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let sxy: f64 = xs.iter().zip(ys).map(|(x, v)| (x - mx) * (v - my)).sum();
        (mx, my, sxy / sxx)
    };
    let (na, nb) = match (pin_a, pin_b) {
        (None, None) => {
            let (mx, my, slope) = regress(&w[ia..ib], &y[ia..ib]);
            let (a, b) = (mean(&y[..ia]), mean(&y[ib..]));
            (mx + (a - my) / slope, mx + (b - my) / slope)
        }
        (Some(p), None) => {
            // line through (p, A) over plateau and ramp: plateau points have x = 0
            let xs: Vec<f64> = w[..ib].iter().map(|&x| (x - p).max(0.0)).collect();
            let (a, slope) = through_origin_fit(&xs, &y[..ib]);
            let b = mean(&y[ib..]);
            (p, p + (b - a) / slope)
        }
        (None, Some(p)) => {
            let xs: Vec<f64> = w[ia..].iter().map(|&x| (x - p).min(0.0)).collect();
            let (b, slope) = through_origin_fit(&xs, &y[ia..]);
            let a = mean(&y[..ia]);
            (p + (a - b) / slope, p)
        }
        (Some(a), Some(b)) => (a, b),
    };
    let ok = na.is_finite()
        && nb.is_finite()
        && na < nb
        && w.partition_point(|&x| x <= na) == ia
        && w.partition_point(|&x| x < nb) == ib;
    ok.then_some((na, nb))
}

/// `y ≈ c + s x` by least squares, returning `(c, s)`.
fn through_origin_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, v)| (x - mx) * (v - my)).sum();
    let s = sxy / sxx;
    (my - s * mx, s)
}

/// Default fit range `[5 w0, 0.9 w_Nyquist]`.
pub fn default_fit_range(spec: &SpectrumRecord, omega0: f64) -> (f64, f64) {
    let nyquist = spec.omega.last().copied().unwrap_or(0.0);
    (5.0 * omega0, 0.9 * nyquist)
}

/// Natural log of the smoothed (or raw) spectrum, floored at the smallest positive double.
pub fn log_spectrum(values: &[f64]) -> Vec<f64> {
    values.iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).collect()
}

/// Fits the smoothed spectrum (falling back to the raw intensity).
pub fn fit_spectrum(spec: &SpectrumRecord, range: (f64, f64)) -> Result<CutoffFit> {
    let y = log_spectrum(spec.smoothed.as_ref().unwrap_or(&spec.intensity));
    fit_cutoff(&spec.omega, &y, range)
}

fn nelder_mead(f: impl Fn([f64; 2]) -> f64, x0: [f64; 2], scale: f64) -> (f64, f64) {
    let mut s = [x0, [x0[0] + scale, x0[1]], [x0[0], x0[1] + scale]];
    let mut v = s.map(&f);
    for _ in 0..2000 {
        let mut idx = [0, 1, 2];
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        s = idx.map(|i| s[i]);
        v = idx.map(|i| v[i]);
        let spread = (s[1][0] - s[0][0]).abs().max((s[1][1] - s[0][1]).abs()).max((s[2][0] - s[0][0]).abs()).max((s[2][1] - s[0][1]).abs());
        if spread < 1e-12 * (1.0 + s[0][0].abs() + s[0][1].abs()) {
            break;
        }
        let c = [(s[0][0] + s[1][0]) / 2.0, (s[0][1] + s[1][1]) / 2.0];
        let along = |t: f64| [c[0] + t * (s[2][0] - c[0]), c[1] + t * (s[2][1] - c[1])];
        let xr = along(-1.0);
        let fr = f(xr);
        if fr < v[0] {
            let xe = along(-2.0);
            let fe = f(xe);
            if fe < fr {
                s[2] = xe;
                v[2] = fe;
            } else {
                s[2] = xr;
                v[2] = fr;
            }
        } else if fr < v[1] {
            s[2] = xr;
            v[2] = fr;
        } else {
            let xc = if fr < v[2] { along(-0.5) } else { along(0.5) };
            let fc = f(xc);
            if fc < v[2].min(fr) {
                s[2] = xc;
                v[2] = fc;
            } else {
                for k in 1..3 {
                    s[k] = [(s[0][0] + s[k][0]) / 2.0, (s[0][1] + s[k][1]) / 2.0];
                    v[k] = f(s[k]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap_or(0);
    (s[best][0], s[best][1])
}

/// Strongest bin near one harmonic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicPeak {
    pub order: u32,
    pub expected_omega: f64,
    pub peak_omega: f64,
    pub peak_intensity: f64,
    /// Peak position minus the expected one, in bins.
    pub offset_bins: f64,
}

/// Locates the maximum of `intensity` within `+-w0/2` of each harmonic `order * w0`.
pub fn harmonic_peaks(spec: &SpectrumRecord, omega0: f64, orders: impl IntoIterator<Item = u32>) -> Vec<HarmonicPeak> {
    let dw = spec.spacing();
    orders
        .into_iter()
        .filter_map(|q| {
            let target = q as f64 * omega0;
            let lo = spec.omega.partition_point(|&w| w < target - 0.5 * omega0);
            let hi = spec.omega.partition_point(|&w| w <= target + 0.5 * omega0);
            (lo..hi)
                .max_by(|&a, &b| spec.intensity[a].total_cmp(&spec.intensity[b]))
                .map(|k| HarmonicPeak {
                    order: q,
                    expected_omega: target,
                    peak_omega: spec.omega[k],
                    peak_intensity: spec.intensity[k],
                    offset_bins: (spec.omega[k] - target) / dw,
                })
        })
        .collect()
}

/// `(<z>, <x_c>)` curve and the principal-axis angle of its covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePortrait {
    pub z: Vec<f64>,
    pub x_c: Vec<f64>,
    /// Angle of the major axis against the z axis, in `(-pi/2, pi/2]`.
    pub angle: f64,
    /// The covariance is isotropic, so the angle carries no information.
    pub isotropic: bool,
}

/// Relative eigenvalue gap below which a portrait counts as isotropic.
pub const ISOTROPY_TOL: f64 = 1e-6;

pub fn phase_portrait(traj: &TrajectoryRecord) -> Result<PhasePortrait> {
    let z = traj.z.as_ref().ok_or(Error::UnsupportedObservable("z"))?;
    let x = traj.x_c.as_ref().ok_or(Error::UnsupportedObservable("x_c"))?;
    portrait(z.clone(), x.clone())
}

pub fn portrait(z: Vec<f64>, x_c: Vec<f64>) -> Result<PhasePortrait> {
    if z.len() != x_c.len() || z.is_empty() {
        return Err(Error::Domain("phase portrait needs two equally long, non-empty series".into()));
    }
    let n = z.len() as f64;
    let mz = z.iter().sum::<f64>() / n;
    let mx = x_c.iter().sum::<f64>() / n;
    let (mut vz, mut vx, mut c) = (0.0, 0.0, 0.0);
    for (a, b) in z.iter().zip(&x_c) {
        let (da, db) = (a - mz, b - mx);
        vz += da * da;
        vx += db * db;
        c += da * db;
    }
    let gap = ((vz - vx).powi(2) + 4.0 * c * c).sqrt();
    let isotropic = gap <= ISOTROPY_TOL * (vz + vx);
    let angle = if isotropic && vx > 0.0 { 0.0 } else { 0.5 * (2.0 * c).atan2(vz - vx) };
    Ok(PhasePortrait { z, x_c, angle, isotropic })
}
