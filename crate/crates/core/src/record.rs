//! Sampled time series shared by the grid and basis propagators.

use crate::error::{Error, Result};

/// Observables at one sample time.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrajectorySample {
    pub t: f64,
    pub mu_z: f64,
    pub norm: f64,
    pub n_c: f64,
    pub e_e: f64,
    pub e_c: f64,
    pub e_int: f64,
    pub e_dse: f64,
    pub e_tot: f64,
}

/// Column-oriented trajectory.
///
/// `z` and `x_c` (norm-divided coordinate expectations) are only present for
/// grid runs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryRecord {
    pub t: Vec<f64>,
    pub mu_z: Vec<f64>,
    pub norm: Vec<f64>,
    pub n_c: Vec<f64>,
    pub e_e: Vec<f64>,
    pub e_c: Vec<f64>,
    pub e_int: Vec<f64>,
    pub e_dse: Vec<f64>,
    pub e_tot: Vec<f64>,
    pub z: Option<Vec<f64>>,
    pub x_c: Option<Vec<f64>>,
}

impl TrajectoryRecord {
    /// Empty record; `coords` enables the `z`/`x_c` columns.
    pub fn new(coords: bool) -> Self {
        Self {
            z: coords.then(Vec::new),
            x_c: coords.then(Vec::new),
            ..Self::default()
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn push(&mut self, s: TrajectorySample) {
        self.t.push(s.t);
        self.mu_z.push(s.mu_z);
        self.norm.push(s.norm);
        self.n_c.push(s.n_c);
        self.e_e.push(s.e_e);
        self.e_c.push(s.e_c);
        self.e_int.push(s.e_int);
        self.e_dse.push(s.e_dse);
        self.e_tot.push(s.e_tot);
    }

    pub fn push_coords(&mut self, z: f64, x_c: f64) {
        if let (Some(zs), Some(xs)) = (self.z.as_mut(), self.x_c.as_mut()) {
            zs.push(z);
            xs.push(x_c);
        }
    }

    pub fn sample(&self, i: usize) -> TrajectorySample {
        TrajectorySample {
            t: self.t[i],
            mu_z: self.mu_z[i],
            norm: self.norm[i],
            n_c: self.n_c[i],
            e_e: self.e_e[i],
            e_c: self.e_c[i],
            e_int: self.e_int[i],
            e_dse: self.e_dse[i],
            e_tot: self.e_tot[i],
        }
    }

    pub fn last(&self) -> Option<TrajectorySample> {
        (!self.is_empty()).then(|| self.sample(self.len() - 1))
    }

    /// Sample spacing; errors unless the times are uniform to 1e-9 relative.
    pub fn uniform_step(&self) -> Result<f64> {
        uniform_step(&self.t)
    }

    /// Checks that all columns have the same length.
    pub fn validate(&self) -> Result<()> {
        let n = self.t.len();
        let fixed = [&self.mu_z, &self.norm, &self.n_c, &self.e_e, &self.e_c, &self.e_int, &self.e_dse, &self.e_tot];
        let optional = [self.z.as_ref(), self.x_c.as_ref()].into_iter().flatten();
        if fixed.into_iter().chain(optional).any(|c| c.len() != n) {
            return Err(Error::Domain("trajectory columns have different lengths".into()));
        }
        if self.z.is_some() != self.x_c.is_some() {
            return Err(Error::Domain("trajectory has only one of the z / x_c columns".into()));
        }
        Ok(())
    }
}

/// Named time series sampled on their own time axis, e.g. state populations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PopulationRecord {
    pub t: Vec<f64>,
    pub labels: Vec<String>,
    /// `values[k][s]`: series `k` at sample `s`.
    pub values: Vec<Vec<f64>>,
}

impl PopulationRecord {
    pub fn new(labels: Vec<String>) -> Self {
        Self {
            t: Vec::new(),
            values: vec![Vec::new(); labels.len()],
            labels,
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn push(&mut self, t: f64, row: impl IntoIterator<Item = f64>) {
        self.t.push(t);
        let mut n = 0;
        for (col, v) in self.values.iter_mut().zip(row) {
            col.push(v);
            n += 1;
        }
        debug_assert_eq!(n, self.labels.len());
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.labels.len() || self.values.iter().any(|c| c.len() != self.t.len()) {
            return Err(Error::Domain("population columns have different lengths".into()));
        }
        Ok(())
    }
}

pub(crate) fn uniform_step(t: &[f64]) -> Result<f64> {
    if t.len() < 2 {
        return Err(Error::Domain("need at least two samples to define a time step".into()));
    }
    let dt = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
    if !(dt > 0.0) {
        return Err(Error::Domain("sample times must increase".into()));
    }
    for (k, w) in t.windows(2).enumerate() {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(t[k].abs() * 1e-3) {
            return Err(Error::Domain(format!("non-uniform sampling at sample {k}: step {} vs {dt}", w[1] - w[0])));
        }
    }
    Ok(dt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_keeps_columns_aligned() {
        let mut r = TrajectoryRecord::new(true);
        r.push(TrajectorySample {
            t: 0.5,
            norm: 1.0,
            ..Default::default()
        });
        r.push_coords(0.1, 0.2);
        r.validate().unwrap();
        assert_eq!(r.last().unwrap().t, 0.5);
        r.z.as_mut().unwrap().push(0.0);
        assert!(r.validate().is_err());
        let mut p = PopulationRecord::new(vec!["a".into(), "b".into()]);
        p.push(0.0, [1.0, 0.0]);
        p.validate().unwrap();
        p.values[1].push(2.0);
        assert!(p.validate().is_err());
    }

    #[test]
    fn uniform_step_detection() {
        let t: Vec<f64> = (0..100).map(|k| k as f64 * 0.02).collect();
        assert!((uniform_step(&t).unwrap() - 0.02).abs() < 1e-15);
        let mut bad = t.clone();
        bad[40] += 0.001;
        assert!(uniform_step(&bad).is_err());
        assert!(uniform_step(&[1.0]).is_err());
    }
}
