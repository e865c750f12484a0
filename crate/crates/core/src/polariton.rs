//! QED-CIS polaritonic basis: Pauli-Fierz matrix in the product basis
//! `|i> (x) |n>` (electronic state `i`, photon number `n < N_p`), its eigenstates,
//! transformed dipoles and ionization rates.
//!
//! Product states are indexed `i * N_p + n`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::cavity::CavitySpec;
use crate::electronic::ElectronicData;
use crate::error::{Error, Result};
use crate::pulse::Vec3;

/// Pieces of the Pauli-Fierz Hamiltonian that act on the electronic index.
#[derive(Debug, Clone, PartialEq)]
struct Couplings {
    /// `e_c . mu`, symmetrized.
    mu: DMatrix<f64>,
    /// `(g² / w) (e_c . mu)²`, symmetrized.
    dse: DMatrix<f64>,
}

fn couplings(data: &ElectronicData, cavity: &CavitySpec) -> Result<Couplings> {
    let m = data.projected_dipole(cavity.polarization())?;
    let mu = symmetrize(&m);
    let dse = symmetrize(&(&mu * &mu * cavity.dse_prefactor()));
    Ok(Couplings { mu, dse })
}

/// `(a + a^T) / 2`; exactly symmetric in floating point.
fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    let mut s = a + a.transpose();
    s *= 0.5;
    s
}

fn assemble(energies: &[f64], c: &Couplings, cavity: &CavitySpec, n_photon: usize) -> DMatrix<f64> {
    let ns = energies.len();
    let np = n_photon;
    let g = cavity.coupling();
    let w = cavity.omega();
    let mut h = DMatrix::zeros(ns * np, ns * np);
    for i in 0..ns {
        for n in 0..np {
            h[(i * np + n, i * np + n)] += energies[i] + n as f64 * w;
        }
        for j in 0..ns {
            let (mu, dse) = (c.mu[(i, j)], c.dse[(i, j)]);
            for n in 0..np {
                h[(i * np + n, j * np + n)] += dse;
                if n + 1 < np {
                    let v = g * mu * ((n + 1) as f64).sqrt();
                    h[(i * np + n, j * np + n + 1)] += v;
                    h[(i * np + n + 1, j * np + n)] += v;
                }
            }
        }
    }
    symmetrize(&h)
}

/// Pauli-Fierz matrix `E_i + n w + g mu_ij (sqrt(n) d_{m,n-1} + sqrt(m) d_{m,n+1}) + (g²/w)(mu²)_ij d_nm`
/// with `mu = e_c . mu` and the self-energy sum over all ingested states.
pub fn assemble_pauli_fierz(data: &ElectronicData, cavity: &CavitySpec, n_photon: usize) -> Result<DMatrix<f64>> {
    if n_photon == 0 {
        return Err(Error::Domain("need at least one photon state".into()));
    }
    let c = couplings(data, cavity)?;
    Ok(assemble(&data.energies, &c, cavity, n_photon))
}

/// Ascending eigenpairs of a symmetric matrix; each eigenvector's
/// largest-magnitude component is made positive.
pub fn diagonalize_polaritons(h: DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = h.nrows();
    if n == 0 || h.ncols() != n {
        return Err(Error::Domain("Hamiltonian must be a non-empty square matrix".into()));
    }
    if h.iter().any(|x| !x.is_finite()) {
        return Err(Error::Eigen("Hamiltonian contains non-finite entries".into()));
    }
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 0)
        .ok_or_else(|| Error::Eigen("symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (p, &k) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(k);
        let pivot = col.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        let s = if pivot < 0.0 { -1.0 } else { 1.0 };
        vecs.set_column(p, &(col * s));
    }
    Ok((energies, vecs))
}

/// Applies `mu (x) 1_photon` to every column of `coefficients`.
fn apply_electronic(mu: &DMatrix<f64>, coefficients: &DMatrix<f64>, n_photon: usize) -> DMatrix<f64> {
    let ns = mu.nrows();
    let np = n_photon;
    let dim = coefficients.ncols();
    let x = DMatrix::from_fn(ns, dim * np, |j, col| coefficients[(j * np + col % np, col / np)]);
    let y = mu * x;
    DMatrix::from_fn(ns * np, dim, |row, p| y[(row / np, p * np + row % np)])
}

/// `mu_pq = sum D_{p,in} D_{q,jm} mu_ij d_nm`, exactly symmetric.
pub fn transform_dipole(coefficients: &DMatrix<f64>, mu: &DMatrix<f64>, n_photon: usize) -> DMatrix<f64> {
    let z = apply_electronic(mu, coefficients, n_photon);
    symmetrize(&coefficients.tr_mul(&z))
}

/// `Gamma_p = sum_{i,n} |D_{p,in}|² Gamma_i`.
pub fn ionization_rates_polariton(coefficients: &DMatrix<f64>, rates: &[f64], n_photon: usize) -> Vec<f64> {
    coefficients
        .column_iter()
        .map(|col| col.iter().enumerate().map(|(k, d)| d * d * rates[k / n_photon]).sum())
        .collect()
}

/// Weight of the product state `|i, n>` in a polaritonic state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroOrderWeight {
    pub state: usize,
    pub photons: usize,
    pub weight: f64,
}

/// Weights below this are dropped from decompositions.
pub const DECOMPOSITION_CUTOFF: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct PolaritonBasis {
    n_states: usize,
    n_photon: usize,
    cavity: Option<CavitySpec>,
    field_polarization: Vec3,
    energies: Vec<f64>,
    coefficients: DMatrix<f64>,
    electronic_energies: Vec<f64>,
    couplings: Couplings,
    field_dipole: DMatrix<f64>,
    mu_pq: DMatrix<f64>,
    gamma_p: Vec<f64>,
}

impl PolaritonBasis {
    /// Builds the QED-CIS basis. `field_polarization` selects the dipole
    /// component driven by the laser; `rates` are the electronic `Gamma_i`.
    pub fn build(
        data: &ElectronicData,
        cavity: &CavitySpec,
        n_photon: usize,
        field_polarization: Vec3,
        rates: Option<&[f64]>,
    ) -> Result<Self> {
        data.validate()?;
        if n_photon == 0 {
            return Err(Error::Domain("need at least one photon state".into()));
        }
        let c = couplings(data, cavity)?;
        let h = assemble(&data.energies, &c, cavity, n_photon);
        let (energies, coefficients) = diagonalize_polaritons(h)?;
        Self::finish(data, Some(*cavity), n_photon, field_polarization, rates, c, energies, coefficients)
    }

    /// The electronic basis alone (one photon state, no cavity).
    pub fn bare(data: &ElectronicData, field_polarization: Vec3, rates: Option<&[f64]>) -> Result<Self> {
        data.validate()?;
        let n = data.n_states();
        let c = Couplings {
            mu: DMatrix::zeros(n, n),
            dse: DMatrix::zeros(n, n),
        };
        let coefficients = DMatrix::identity(n, n);
        Self::finish(data, None, 1, field_polarization, rates, c, data.energies.clone(), coefficients)
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        data: &ElectronicData,
        cavity: Option<CavitySpec>,
        n_photon: usize,
        field_polarization: Vec3,
        rates: Option<&[f64]>,
        couplings: Couplings,
        energies: Vec<f64>,
        coefficients: DMatrix<f64>,
    ) -> Result<Self> {
        let n = data.n_states();
        if let Some(r) = rates {
            if r.len() != n || r.iter().any(|g| !(*g >= 0.0)) {
                return Err(Error::Domain(format!("need {n} non-negative ionization rates")));
            }
        }
        let field_dipole = symmetrize(&data.projected_dipole(field_polarization)?);
        let mu_pq = transform_dipole(&coefficients, &field_dipole, n_photon);
        let gamma_p = match rates {
            Some(r) => ionization_rates_polariton(&coefficients, r, n_photon),
            None => vec![0.0; energies.len()],
        };
        Ok(Self {
            n_states: n,
            n_photon,
            cavity,
            field_polarization,
            energies,
            coefficients,
            electronic_energies: data.energies.clone(),
            couplings,
            field_dipole,
            mu_pq,
            gamma_p,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_photon(&self) -> usize {
        self.n_photon
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn cavity(&self) -> Option<&CavitySpec> {
        self.cavity.as_ref()
    }

    pub fn field_polarization(&self) -> Vec3 {
        self.field_polarization
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Columns are polaritonic states in the product basis.
    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.coefficients
    }

    pub fn mu_pq(&self) -> &DMatrix<f64> {
        &self.mu_pq
    }

    pub fn gamma_p(&self) -> &[f64] {
        &self.gamma_p
    }

    pub fn electronic_energies(&self) -> &[f64] {
        &self.electronic_energies
    }

    /// Electronic dipole along the field polarization.
    pub fn field_dipole(&self) -> &DMatrix<f64> {
        &self.field_dipole
    }

    /// Replaces the ionization rates (electronic `Gamma_i`).
    pub fn set_rates(&mut self, rates: &[f64]) -> Result<()> {
        if rates.len() != self.n_states || rates.iter().any(|g| !(*g >= 0.0)) {
            return Err(Error::Domain(format!("need {} non-negative ionization rates", self.n_states)));
        }
        self.gamma_p = ionization_rates_polariton(&self.coefficients, rates, self.n_photon);
        Ok(())
    }

    /// `H^c + H^int + H^dse` in the polaritonic basis (without zero-point energy).
    pub fn cavity_operator(&self) -> DMatrix<f64> {
        let k = match &self.cavity {
            Some(cav) => assemble(&vec![0.0; self.n_states], &self.couplings, cav, self.n_photon),
            None => return DMatrix::zeros(self.dim(), self.dim()),
        };
        symmetrize(&self.coefficients.tr_mul(&(k * &self.coefficients)))
    }

    /// `|i, n>` weights of polaritonic state `p`, heaviest first.
    pub fn zero_order_decomposition(&self, p: usize) -> Result<Vec<ZeroOrderWeight>> {
        zero_order_decomposition(self, p)
    }

    /// Product-basis coefficients `c0 = D C` of a polaritonic coefficient vector.
    pub fn to_zero_order(&self, c: &[Complex64]) -> Vec<Complex64> {
        let re = DVector::from_iterator(c.len(), c.iter().map(|x| x.re));
        let im = DVector::from_iterator(c.len(), c.iter().map(|x| x.im));
        let (r, i) = (&self.coefficients * re, &self.coefficients * im);
        r.iter().zip(i.iter()).map(|(&a, &b)| Complex64::new(a, b)).collect()
    }

    /// Unnormalized expectation values of the Hamiltonian pieces and the field
    /// dipole for product-basis coefficients `c0`.
    pub fn zero_order_expectations(&self, c0: &[Complex64]) -> ZeroOrderExpectations {
        let ns = self.n_states;
        let np = self.n_photon;
        let w = self.cavity.map_or(0.0, |c| c.omega());
        let g = self.cavity.map_or(0.0, |c| c.coupling());
        let mut out = ZeroOrderExpectations::default();
        let mut rho = vec![0.0; ns];
        for i in 0..ns {
            for n in 0..np {
                let p = c0[i * np + n].norm_sqr();
                rho[i] += p;
                out.e_c += n as f64 * w * p;
            }
            out.e_e += self.electronic_energies[i] * rho[i];
        }
        for i in 0..ns {
            for j in 0..ns {
                let (mu_f, mu_c, dse) = (self.field_dipole[(i, j)], self.couplings.mu[(i, j)], self.couplings.dse[(i, j)]);
                if mu_f == 0.0 && mu_c == 0.0 && dse == 0.0 {
                    continue;
                }
                for n in 0..np {
                    let s = (c0[i * np + n].conj() * c0[j * np + n]).re;
                    out.mu += mu_f * s;
                    out.e_dse += dse * s;
                    if n + 1 < np && mu_c != 0.0 {
                        let x = (c0[i * np + n].conj() * c0[j * np + n + 1]).re;
                        out.e_int += 2.0 * g * mu_c * ((n + 1) as f64).sqrt() * x;
                    }
                }
            }
        }
        out
    }
}

/// Unnormalized `<c|O|c>` values from [`PolaritonBasis::zero_order_expectations`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ZeroOrderExpectations {
    pub e_e: f64,
    pub e_c: f64,
    pub e_int: f64,
    pub e_dse: f64,
    /// Dipole along the field polarization.
    pub mu: f64,
}

/// `|i, n>` weights `|D_{p,in}|²` of polaritonic state `p`, sorted descending.
pub fn zero_order_decomposition(basis: &PolaritonBasis, p: usize) -> Result<Vec<ZeroOrderWeight>> {
    if p >= basis.dim() {
        return Err(Error::Domain(format!("state {p} outside a basis of {}", basis.dim())));
    }
    let np = basis.n_photon;
    let mut w: Vec<ZeroOrderWeight> = basis
        .coefficients
        .column(p)
        .iter()
        .enumerate()
        .map(|(k, d)| ZeroOrderWeight {
            state: k / np,
            photons: k % np,
            weight: d * d,
        })
        .filter(|x| x.weight > DECOMPOSITION_CUTOFF)
        .collect();
    w.sort_by(|a, b| b.weight.total_cmp(&a.weight).then((a.state, a.photons).cmp(&(b.state, b.photons))));
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_level(gap: f64, mu01: f64) -> ElectronicData {
        ElectronicData::new(vec![0.0, gap], DMatrix::from_row_slice(2, 2, &[0.0, mu01, mu01, 0.0])).unwrap()
    }

    /// Independent construction from ladder operators and Kronecker products.
    fn kron_hamiltonian(e: &[f64], mu: &DMatrix<f64>, w: f64, g: f64, np: usize) -> DMatrix<f64> {
        let ns = e.len();
        let he = DMatrix::from_diagonal(&DVector::from_column_slice(e));
        let a = DMatrix::from_fn(np, np, |r, c| if c == r + 1 { (c as f64).sqrt() } else { 0.0 });
        let num = a.transpose() * &a;
        let q = &a + a.transpose();
        let ie = DMatrix::<f64>::identity(ns, ns);
        let ip = DMatrix::<f64>::identity(np, np);
        he.kronecker(&ip) + ie.kronecker(&(num * w)) + (mu * g).kronecker(&q) + (mu * mu * (g * g / w)).kronecker(&ip)
    }

    fn sorted_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
        let mut v: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn decoupled_limit_is_diagonal() {
        let d = two_level(0.467, 0.5);
        let cav = CavitySpec::along_z(0.3, 0.0).unwrap();
        let h = assemble_pauli_fierz(&d, &cav, 3).unwrap();
        for r in 0..6 {
            for c in 0..6 {
                let expect = if r == c { d.energies[r / 3] + (r % 3) as f64 * 0.3 } else { 0.0 };
                assert_eq!(h[(r, c)], expect);
            }
        }
    }

    #[test]
    fn single_state_closed_form() {
        let (e0, mu, w, g) = (-0.5, 0.7, 0.2, 0.05);
        let d = ElectronicData::new(vec![e0], DMatrix::from_element(1, 1, mu)).unwrap();
        let h = assemble_pauli_fierz(&d, &CavitySpec::along_z(w, g).unwrap(), 2).unwrap();
        let dse = g * g * mu * mu / w;
        let expect = DMatrix::from_row_slice(2, 2, &[e0 + dse, g * mu, g * mu, e0 + w + dse]);
        assert!((h - expect).amax() < 1e-15);
    }

    #[test]
    fn two_level_matches_kronecker_oracle() {
        let d = two_level(0.467, 0.5);
        let cav = CavitySpec::along_z(0.467, 0.01).unwrap();
        let h = assemble_pauli_fierz(&d, &cav, 3).unwrap();
        let oracle = kron_hamiltonian(&d.energies, d.dipole[2].as_ref().unwrap(), 0.467, 0.01, 3);
        let (a, b) = (sorted_eigenvalues(h.clone()), sorted_eigenvalues(oracle));
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12, "{x} {y}");
        }
        assert_eq!(h, h.transpose());
    }

    #[test]
    fn resonant_polaritons_straddle_the_bare_excitation() {
        let d = two_level(0.467, 0.5);
        let b = PolaritonBasis::build(&d, &CavitySpec::along_z(0.467, 0.01).unwrap(), 3, [0.0, 0.0, 1.0], None).unwrap();
        let (lp, up) = (b.energies()[1], b.energies()[2]);
        assert!(lp < 0.467 && 0.467 < up);
        let split = 0.5 * (up - lp);
        assert!((split - 0.01 * 0.5).abs() < 0.1 * 0.005, "{split}");
        let w = b.zero_order_decomposition(1).unwrap();
        assert!((w[0].weight - 0.5).abs() < 0.05 && (w[1].weight - 0.5).abs() < 0.05);
        let parents: Vec<(usize, usize)> = w[..2].iter().map(|x| (x.state, x.photons)).collect();
        assert!(parents.contains(&(1, 0)) && parents.contains(&(0, 1)));
    }

    #[test]
    fn eigenvectors_are_orthonormal_with_fixed_phase() {
        let d = two_level(0.4, 0.8);
        let b = PolaritonBasis::build(&d, &CavitySpec::along_z(0.35, 0.05).unwrap(), 4, [0.0, 0.0, 1.0], None).unwrap();
        let c = b.coefficients();
        let gram = c.tr_mul(c);
        assert!((gram - DMatrix::identity(8, 8)).amax() < 1e-10);
        for col in c.column_iter() {
            let pivot = col.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            assert!(pivot > 0.0);
        }
        assert!(b.energies().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn transformed_dipole_preserves_frobenius_norm() {
        let mu = DMatrix::from_row_slice(3, 3, &[0.1, 0.9, 0.0, 0.9, -0.2, 0.4, 0.0, 0.4, 0.3]);
        let d = ElectronicData::new(vec![-1.0, -0.6, -0.3], mu.clone()).unwrap();
        let b = PolaritonBasis::build(&d, &CavitySpec::along_z(0.3, 0.08).unwrap(), 5, [0.0, 0.0, 1.0], None).unwrap();
        let m = b.mu_pq();
        assert_eq!(m, &m.transpose());
        let lhs = (m * m).trace();
        let rhs = 5.0 * (&mu * &mu).trace();
        assert!((lhs - rhs).abs() < 1e-8);
    }

    #[test]
    fn decoupled_dipole_is_block_diagonal_in_photons() {
        let mu = DMatrix::from_row_slice(2, 2, &[0.3, 0.9, 0.9, -0.2]);
        let d = ElectronicData::new(vec![-1.0, -0.6], mu.clone()).unwrap();
        let b = PolaritonBasis::build(&d, &CavitySpec::along_z(0.25, 0.0).unwrap(), 3, [0.0, 0.0, 1.0], None).unwrap();
        // parents of each polaritonic state
        let parent: Vec<(usize, usize)> = (0..6)
            .map(|p| {
                let w = b.zero_order_decomposition(p).unwrap();
                assert_eq!(w.len(), 1);
                assert!((w[0].weight - 1.0).abs() < 1e-14);
                (w[0].state, w[0].photons)
            })
            .collect();
        for p in 0..6 {
            for q in 0..6 {
                let ((i, n), (j, m)) = (parent[p], parent[q]);
                let expect = if n == m { mu[(i, j)] } else { 0.0 };
                assert!((b.mu_pq()[(p, q)] - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn polariton_rates_are_convex_combinations() {
        let d = two_level(0.4, 0.8);
        let cav = CavitySpec::along_z(0.4, 0.05).unwrap();
        let b = PolaritonBasis::build(&d, &cav, 4, [0.0, 0.0, 1.0], Some(&[0.02, 0.02])).unwrap();
        assert!(b.gamma_p().iter().all(|g| (g - 0.02).abs() < 1e-14));
        let b = PolaritonBasis::build(&d, &cav, 4, [0.0, 0.0, 1.0], Some(&[0.0, 0.1])).unwrap();
        assert!(b.gamma_p().iter().all(|&g| (-1e-15..=0.1 + 1e-15).contains(&g)));
        let coeffs = DMatrix::from_column_slice(2, 1, &[0.6f64.sqrt(), 0.4f64.sqrt()]);
        let g = ionization_rates_polariton(&coeffs, &[0.0, 0.1], 1);
        assert!((g[0] - 0.04).abs() < 1e-15);
    }

    #[test]
    fn ground_energy_decreases_with_photon_states() {
        let mu = DMatrix::from_row_slice(3, 3, &[0.0, 1.1, 0.2, 1.1, 0.5, 0.7, 0.2, 0.7, -0.4]);
        let d = ElectronicData::new(vec![-1.0, -0.5, -0.2], mu).unwrap();
        let cav = CavitySpec::along_z(0.3, 0.1).unwrap();
        let e: Vec<f64> = (1..=6)
            .map(|np| PolaritonBasis::build(&d, &cav, np, [0.0, 0.0, 1.0], None).unwrap().energies()[0])
            .collect();
        assert!(e.windows(2).all(|w| w[1] <= w[0] + 1e-14), "{e:?}");
    }

    #[test]
    fn cavity_operator_matches_product_basis_expectations() {
        let d = two_level(0.4, 0.8);
        let b = PolaritonBasis::build(&d, &CavitySpec::along_z(0.3, 0.07).unwrap(), 4, [0.0, 0.0, 1.0], None).unwrap();
        let k = b.cavity_operator();
        let c: Vec<Complex64> = (0..8).map(|p| Complex64::new((p as f64).cos(), 0.3 * p as f64)).collect();
        let direct: f64 = (0..8)
            .flat_map(|p| (0..8).map(move |q| (p, q)))
            .map(|(p, q)| (c[p].conj() * c[q]).re * k[(p, q)])
            .sum();
        let z = b.zero_order_expectations(&b.to_zero_order(&c));
        assert!((direct - (z.e_c + z.e_int + z.e_dse)).abs() < 1e-12);
    }

    #[test]
    fn missing_coupling_component_is_an_error() {
        let d = two_level(0.4, 0.8);
        let cav = CavitySpec::new(0.3, 0.07, [1.0, 0.0, 0.0]).unwrap();
        assert!(assemble_pauli_fierz(&d, &cav, 2).is_err());
    }
}
