//! File formats: run configuration, electronic data, TSV records and reports.

mod config;
mod electronic_file;
mod report;
mod tsv;

pub use config::{
    Analysis, BasisSettings, Ionization, Mode, Numerics, Relaxation, RunConfig, SweepAxes, whole_steps, DEFAULT_GRID_DT,
    DEFAULT_GRID_STRIDE,
};
pub use electronic_file::{format_electronic_data, load_electronic_data, parse_electronic_data, write_electronic_data};
pub use report::{
    format_basis_summary, format_population_ranking, write_basis_summary, write_population_ranking, BASIS_COLUMNS,
    RANKING_COLUMNS,
};
pub use tsv::{
    format_cutoff_fit, format_populations, format_spectrum, format_trajectory, parse_cutoff_fit, parse_populations,
    parse_spectrum, parse_trajectory, read_cutoff_fit, read_populations, read_spectrum, read_trajectory,
    write_cutoff_fit, write_populations, write_spectrum, write_trajectory, Table, COORDINATE_COLUMNS, FIT_COLUMNS,
    SPECTRUM_COLUMNS, TRAJECTORY_COLUMNS,
};

pub(crate) use tsv::write_text;
