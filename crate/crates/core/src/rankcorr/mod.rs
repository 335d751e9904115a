//! Data ingestion and Kendall, Spearman and Pearson correlation matrices.

mod data;
mod kendall;
mod matrix;
mod ties;

pub use data::{load_data, parse_csv, DataMatrix, Orientation};
pub use kendall::{kendall_tau_naive, kendall_tau_pair, pair_count, ranks};
pub use matrix::{
    kendall_matrix, kendall_matrix_with, pearson_matrix, spearman_matrix, spearman_matrix_with, CorrMatrix, Flavor,
    SYMMETRY_TOL,
};
pub use ties::{apply_tie_policy, check_ties, tied_pairs, JitteredRow, TiePolicy, TieReport, JITTER_SCALE};
