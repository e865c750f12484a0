use nalgebra::DMatrix;

use crate::electronic::{CisAmplitude, ElectronicData};
use crate::error::Result;

use super::{solve_stationary_electronic, GridSpec, SoftCoreModel};

/// Lowest `n_states` grid eigenstates of the soft-core atom as electronic data
/// for the basis propagator.
///
/// Dipoles are grid quadratures `sum_z phi_i(z) (-z) phi_j(z) dz` along z. Each
/// excited state is written as a single configuration whose "virtual orbital"
/// energy is the state energy itself, with `I_p = -E_0`, so continuum states
/// (`E_i > 0`) ionize with `sqrt(E_i) / d` and bound states do not.
pub fn export_electronic_data(grid: &GridSpec, model: &SoftCoreModel, n_states: usize) -> Result<ElectronicData> {
    let st = solve_stationary_electronic(grid, model, n_states)?;
    let dz = grid.electron.spacing();
    let z = grid.electron.points();
    let n = st.energies.len();
    let mut mu = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v: f64 = st.states[i]
                .iter()
                .zip(&st.states[j])
                .zip(&z)
                .map(|((a, b), z)| -a * z * b)
                .sum::<f64>()
                * dz;
            mu[(i, j)] = v;
            mu[(j, i)] = v;
        }
    }
    let cis = (1..n)
        .map(|i| CisAmplitude {
            state: i,
            occupied: 0,
            virtual_orbital: i,
            coefficient: 1.0,
            virtual_energy: st.energies[i],
        })
        .collect();
    let mut data = ElectronicData::new(st.energies.clone(), mu)?;
    data.cis = Some(cis);
    data.ionization_potential = Some(-st.energies[0]);
    Ok(data)
}
