use num_complex::Complex64;

use crate::cavity::CavitySpec;
use crate::error::{Error, Result};

use super::{build_potentials, grid_norm, CapSpec, GridSpec, GridState, Potentials, SoftCoreModel, SpectralKinetic};

/// Expectation values of a grid state. Energies and coordinates are divided by
/// the norm; `mu_z` is not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridObservables {
    pub z: f64,
    /// `<x_c>/N`, `None` without a cavity.
    pub x_c: Option<f64>,
    pub mu_z: f64,
    pub n_c: f64,
    pub e_e: f64,
    pub e_c: f64,
    pub e_int: f64,
    pub e_dse: f64,
    pub e_tot: f64,
    pub norm: f64,
}

/// `H = T_z + T_x + V_e + V_c + V_int + V_dse`, plus the laser term `z F(t)`
/// (dipole `mu_z = -z`) and the absorber `-i Gamma` when requested.
#[derive(Debug)]
pub struct GridHamiltonian {
    grid: GridSpec,
    potentials: Potentials,
    omega_c: Option<f64>,
    kinetic: SpectralKinetic,
    static_v: Vec<f64>,
    absorber: Vec<f64>,
    z: Vec<f64>,
    x: Vec<f64>,
}

impl GridHamiltonian {
    pub fn new(grid: GridSpec, potentials: Potentials, cavity: Option<&CavitySpec>, caps: &CapSpec) -> Result<Self> {
        let (nz, nx) = (grid.n_z(), grid.n_xc());
        if potentials.electron.len() != nz
            || potentials.cavity.len() != nx
            || potentials.interaction.len() != nz * nx
            || potentials.dse.len() != nz
        {
            return Err(Error::Domain("potential arrays do not match the grid".into()));
        }
        if grid.cavity.is_some() != cavity.is_some() {
            return Err(Error::Domain("cavity spec must be given exactly when the grid has a cavity axis".into()));
        }
        caps.validate(&grid)?;
        let static_v = (0..nz)
            .flat_map(|iz| (0..nx).map(move |ix| (iz, ix)))
            .map(|(iz, ix)| potentials.total(iz, ix))
            .collect();
        Ok(Self {
            grid,
            omega_c: cavity.map(|c| c.omega()),
            kinetic: SpectralKinetic::new(&grid),
            static_v,
            absorber: caps.rates(&grid),
            z: grid.electron.points(),
            x: grid.cavity.map_or_else(|| vec![0.0], |a| a.points()),
            potentials,
        })
    }

    pub fn from_model(grid: GridSpec, model: &SoftCoreModel, cavity: Option<&CavitySpec>, caps: &CapSpec) -> Result<Self> {
        let v = build_potentials(&grid, model, cavity)?;
        Self::new(grid, v, cavity, caps)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn potentials(&self) -> &Potentials {
        &self.potentials
    }

    pub fn omega_c(&self) -> Option<f64> {
        self.omega_c
    }

    pub(crate) fn kinetic_mut(&mut self) -> &mut SpectralKinetic {
        &mut self.kinetic
    }

    pub(crate) fn static_potential(&self) -> &[f64] {
        &self.static_v
    }

    pub(crate) fn absorber(&self) -> &[f64] {
        &self.absorber
    }

    pub(crate) fn electron_points(&self) -> &[f64] {
        &self.z
    }

    /// Upper bound on the spectral radius of the field-free Hermitian part.
    pub fn spectral_bound(&self) -> f64 {
        self.kinetic.max_kinetic() + self.static_v.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn has_absorber(&self) -> bool {
        self.absorber.iter().any(|&g| g != 0.0)
    }

    /// `out = (H + z F - i Gamma [if absorb]) psi`.
    pub fn apply(&mut self, psi: &[Complex64], out: &mut [Complex64], field: f64, absorb: bool) {
        self.kinetic.apply(psi, out);
        let nx = self.grid.n_xc();
        for (iz, &z) in self.z.iter().enumerate() {
            let fz = z * field;
            let range = iz * nx..(iz + 1) * nx;
            let rows = out[range.clone()]
                .iter_mut()
                .zip(&psi[range.clone()])
                .zip(&self.static_v[range.clone()])
                .zip(&self.absorber[range]);
            for (((o, p), v), g) in rows {
                let diag = if absorb {
                    Complex64::new(v + fz, -g)
                } else {
                    Complex64::new(v + fz, 0.0)
                };
                *o += diag * p;
            }
        }
    }

    /// `Re <psi|H|psi> / <psi|psi>` of the field-free Hermitian part.
    pub fn energy(&mut self, psi: &[Complex64]) -> f64 {
        let mut out = vec![Complex64::default(); psi.len()];
        self.apply(psi, &mut out, 0.0, false);
        let num: f64 = psi.iter().zip(&out).map(|(a, b)| (a.conj() * b).re).sum();
        let den: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        num / den
    }

    pub fn observables(&mut self, state: &GridState) -> Result<GridObservables> {
        let dv = self.grid.volume_element();
        let norm = grid_norm(&state.psi, dv);
        if !(norm >= 1e-12) {
            return Err(Error::Ionized(norm));
        }
        let nx = self.grid.n_xc();
        let p = &self.potentials;
        let (mut sz, mut sx, mut se, mut sc, mut si, mut sd) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for (iz, &z) in self.z.iter().enumerate() {
            let mut row_density = 0.0;
            for ix in 0..nx {
                let j = iz * nx + ix;
                let rho = state.psi[j].norm_sqr();
                row_density += rho;
                sx += self.x[ix] * rho;
                sc += p.cavity[ix] * rho;
                si += p.interaction[j] * rho;
            }
            sz += z * row_density;
            se += p.electron[iz] * row_density;
            sd += p.dse[iz] * row_density;
        }
        let (tz, tx) = self.kinetic.kinetic_sums(&state.psi);
        let to_expect = |s: f64| s * dv / norm;
        let e_e = to_expect(tz + se);
        let (e_c, e_int, e_dse) = if self.omega_c.is_some() {
            (to_expect(tx + sc), to_expect(si), to_expect(sd))
        } else {
            (0.0, 0.0, 0.0)
        };
        let n_c = self.omega_c.map_or(0.0, |w| (e_c + e_int + e_dse) / w - 0.5);
        Ok(GridObservables {
            z: to_expect(sz),
            x_c: self.grid.cavity.map(|_| to_expect(sx)),
            mu_z: -sz * dv,
            n_c,
            e_e,
            e_c,
            e_int,
            e_dse,
            e_tot: e_e + e_c + e_int + e_dse,
            norm,
        })
    }
}
