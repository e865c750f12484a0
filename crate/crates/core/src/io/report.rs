//! Basis summaries: polariton energies with zero-order compositions, and the
//! ranked population report.

use std::path::Path;

use crate::error::Result;
use crate::polariton::PolaritonBasis;
use crate::tdci::RankedPopulation;

use super::tsv::{write_text, Table};

pub const BASIS_COLUMNS: [&str; 6] = ["p", "E_p[Eh]", "Gamma_p[Eh]", "i", "n", "weight"];
pub const RANKING_COLUMNS: [&str; 6] = ["rank", "p", "max_population", "i", "n", "weight"];

fn table(kind: &str, columns: &[&str]) -> Table {
    let mut t = Table::parse(&format!("# hhgqed {kind} 1\n# {}\n", columns.join("\t"))).expect("static header");
    t.data = vec![Vec::new(); columns.len()];
    t
}

fn push(t: &mut Table, row: [f64; 6]) {
    for (c, v) in t.data.iter_mut().zip(row) {
        c.push(v);
    }
}

/// One row per `(p, |i, n>)` component above the decomposition cutoff.
pub fn format_basis_summary(basis: &PolaritonBasis) -> Result<String> {
    let mut t = table("basis-summary", &BASIS_COLUMNS);
    for p in 0..basis.dim() {
        for w in basis.zero_order_decomposition(p)? {
            push(
                &mut t,
                [p as f64, basis.energies()[p], basis.gamma_p()[p], w.state as f64, w.photons as f64, w.weight],
            );
        }
    }
    Ok(t.format())
}

pub fn write_basis_summary(path: &Path, basis: &PolaritonBasis) -> Result<()> {
    write_text(path, &format_basis_summary(basis)?)
}

pub fn format_population_ranking(ranked: &[RankedPopulation]) -> String {
    let mut t = table("population-ranking", &RANKING_COLUMNS);
    for (rank, r) in ranked.iter().enumerate() {
        for w in &r.decomposition {
            push(
                &mut t,
                [rank as f64, r.state as f64, r.max_population, w.state as f64, w.photons as f64, w.weight],
            );
        }
    }
    t.format()
}

pub fn write_population_ranking(path: &Path, ranked: &[RankedPopulation]) -> Result<()> {
    write_text(path, &format_population_ranking(ranked))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::CavitySpec;
    use crate::electronic::ElectronicData;
    use nalgebra::DMatrix;

    #[test]
    fn decoupled_summary_has_pure_states() {
        let d = ElectronicData::new(vec![-0.5, -0.2], DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        let b = PolaritonBasis::build(&d, &CavitySpec::along_z(0.1, 0.0).unwrap(), 3, [0.0, 0.0, 1.0], None).unwrap();
        let t = Table::parse(&format_basis_summary(&b).unwrap()).unwrap();
        assert_eq!(t.rows(), 6);
        assert!(t.column("weight").unwrap().iter().all(|&w| (w - 1.0).abs() < 1e-12));
    }
}
