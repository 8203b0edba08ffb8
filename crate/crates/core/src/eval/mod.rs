//! Synthetic ground-truth corpora, pairwise scoring and parameter sweeps.

mod generate;
mod score;
mod sweep;

pub use generate::{generate_corpus, AppearanceRange, GenParams, GeneratedCorpus};
pub use score::{score, score_with_roles, EvalReport, Truth};
pub use sweep::{sweep, write_sweep_csv, SweepGrid, SweepRow, SWEEP_COLUMNS};
