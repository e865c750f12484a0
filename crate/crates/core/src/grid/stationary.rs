use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

use super::{dense_kinetic_matrix, Axis, GridSpec, SoftCoreModel};

/// Lowest eigenpairs of a one-dimensional Fourier-grid Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryStates {
    pub axis: Axis,
    /// Ascending eigenvalues.
    pub energies: Vec<f64>,
    /// Eigenfunctions normalized so that `sum phi_i phi_j dz = delta_ij`; the
    /// largest-magnitude component of each is positive.
    pub states: Vec<Vec<f64>>,
}

/// Diagonalizes `T + V` on `axis` with the dense Fourier-grid kinetic matrix.
pub fn solve_stationary(axis: &Axis, potential: &[f64], n_states: usize) -> Result<StationaryStates> {
    let n = axis.len();
    if potential.len() != n {
        return Err(Error::Domain(format!("potential has {} points, axis has {n}", potential.len())));
    }
    if n_states == 0 || n_states > n {
        return Err(Error::Domain(format!("requested {n_states} states from a {n}-point grid")));
    }
    let mut h: DMatrix<f64> = dense_kinetic_matrix(axis);
    for (i, v) in potential.iter().enumerate() {
        h[(i, i)] += v;
    }
    if h.iter().any(|x| !x.is_finite()) {
        return Err(Error::Eigen("Hamiltonian contains non-finite entries".into()));
    }
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 0)
        .ok_or_else(|| Error::Eigen("symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let scale = 1.0 / axis.spacing().sqrt();
    let mut energies = Vec::with_capacity(n_states);
    let mut states = Vec::with_capacity(n_states);
    for &k in order.iter().take(n_states) {
        energies.push(eig.eigenvalues[k]);
        let col = eig.eigenvectors.column(k);
        let pivot = col.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        let sign = if pivot < 0.0 { -scale } else { scale };
        states.push(col.iter().map(|x| x * sign).collect());
    }
    Ok(StationaryStates {
        axis: *axis,
        energies,
        states,
    })
}

/// Field-free eigenstates of the soft-core electron on the electron axis of `grid`.
pub fn solve_stationary_electronic(grid: &GridSpec, model: &SoftCoreModel, n_states: usize) -> Result<StationaryStates> {
    let v: Vec<f64> = grid.electron.points().iter().map(|&z| model.potential(z)).collect();
    solve_stationary(&grid.electron, &v, n_states)
}
