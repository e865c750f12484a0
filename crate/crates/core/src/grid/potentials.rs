use crate::cavity::CavitySpec;
use crate::error::{Error, Result};

use super::{GridSpec, SoftCoreModel};

/// Potential-energy pieces of the grid Hamiltonian.
///
/// `interaction` is stored on the full flattened grid (`[iz * n_xc + ix]`); the
/// others depend on one coordinate only. Without a cavity, `cavity` is `[0]` and
/// the coupling terms vanish.
#[derive(Debug, Clone, PartialEq)]
pub struct Potentials {
    pub electron: Vec<f64>,
    pub cavity: Vec<f64>,
    pub interaction: Vec<f64>,
    pub dse: Vec<f64>,
}

impl Potentials {
    /// Sum of all pieces at flattened index `(iz, ix)`.
    pub fn total(&self, iz: usize, ix: usize) -> f64 {
        let nx = self.cavity.len();
        self.electron[iz] + self.cavity[ix] + self.interaction[iz * nx + ix] + self.dse[iz]
    }
}

/// `V_e = -Z/(|z-R|+eta)`, `V_c = w² x²/2`, `V_int = -sqrt(2w) g z x`, `V_dse = g²/w z²`.
///
/// The grid model has its electron along z, so the cavity mode must be polarized along z.
pub fn build_potentials(grid: &GridSpec, model: &SoftCoreModel, cavity: Option<&CavitySpec>) -> Result<Potentials> {
    let zs = grid.electron.points();
    let electron: Vec<f64> = zs.iter().map(|&z| model.potential(z)).collect();
    match (grid.cavity, cavity) {
        (None, None) => Ok(Potentials {
            electron,
            cavity: vec![0.0],
            interaction: vec![0.0; zs.len()],
            dse: vec![0.0; zs.len()],
        }),
        (Some(axis), Some(cav)) => {
            let p = cav.polarization();
            if p[0] != 0.0 || p[1] != 0.0 {
                return Err(Error::Domain(
                    "the grid model requires the cavity mode to be polarized along z".into(),
                ));
            }
            let w = cav.omega();
            let g = cav.coupling();
            let xs = axis.points();
            let cavity_v: Vec<f64> = xs.iter().map(|&x| 0.5 * w * w * x * x).collect();
            let bilinear = -(2.0 * w).sqrt() * g;
            let interaction = zs
                .iter()
                .flat_map(|&z| xs.iter().map(move |&x| bilinear * z * x))
                .collect();
            let dse = zs.iter().map(|&z| cav.dse_prefactor() * z * z).collect();
            Ok(Potentials {
                electron,
                cavity: cavity_v,
                interaction,
                dse,
            })
        }
        (Some(_), None) => Err(Error::Domain("grid has a cavity coordinate but no cavity was given".into())),
        (None, Some(_)) => Err(Error::Domain("cavity given but the grid has no cavity coordinate".into())),
    }
}
