//! Grid search over matcher parameters.

use std::io::Write;

use rayon::prelude::*;

use crate::cluster::cluster_corpus;
use crate::error::{Error, Result};
use crate::metrics::SimilarityScore;
use crate::model::{Corpus, MatchConfig};

use super::{score, EvalReport, Truth};

/// Values to try per parameter; the sweep runs their cartesian product.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepGrid {
    pub window_years: Vec<u32>,
    pub name_thresholds: Vec<SimilarityScore>,
    pub location_thresholds: Vec<SimilarityScore>,
    pub relationship_required: Vec<bool>,
    pub fuzzy_keys: Vec<bool>,
}

impl SweepGrid {
    /// A grid holding only the values of `base`.
    pub fn single(base: &MatchConfig) -> Self {
        Self {
            window_years: vec![base.window_years],
            name_thresholds: vec![base.name_threshold],
            location_thresholds: vec![base.location_threshold],
            relationship_required: vec![base.relationship_required],
            fuzzy_keys: vec![base.fuzzy_keys],
        }
    }

    fn points(&self, base: &MatchConfig) -> Vec<MatchConfig> {
        let mut out = Vec::new();
        for &w in &self.window_years {
            for &n in &self.name_thresholds {
                for &l in &self.location_thresholds {
                    for &r in &self.relationship_required {
                        for &f in &self.fuzzy_keys {
                            out.push(MatchConfig {
                                window_years: w,
                                name_threshold: n,
                                location_threshold: l,
                                relationship_required: r,
                                fuzzy_keys: f,
                                ..base.clone()
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub window_years: u32,
    pub name_threshold: SimilarityScore,
    pub location_threshold: SimilarityScore,
    pub relationship_required: bool,
    pub fuzzy_keys: bool,
    pub report: EvalReport,
}

/// Scores one clustering per grid point, in grid order.
pub fn sweep(base: &MatchConfig, grid: &SweepGrid, corpus: &Corpus, truth: &Truth) -> Result<Vec<SweepRow>> {
    let empty = [
        ("window_years", grid.window_years.is_empty()),
        ("name_threshold", grid.name_thresholds.is_empty()),
        ("location_threshold", grid.location_thresholds.is_empty()),
        ("relationship_required", grid.relationship_required.is_empty()),
        ("fuzzy_keys", grid.fuzzy_keys.is_empty()),
    ];
    if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
        return Err(Error::Params(format!("sweep range for {name} is empty")));
    }
    grid.points(base)
        .into_par_iter()
        .map(|config| {
            let sets = cluster_corpus(corpus, &config);
            Ok(SweepRow {
                window_years: config.window_years,
                name_threshold: config.name_threshold,
                location_threshold: config.location_threshold,
                relationship_required: config.relationship_required,
                fuzzy_keys: config.fuzzy_keys,
                report: score(&sets, truth)?,
            })
        })
        .collect()
}

pub const SWEEP_COLUMNS: [&str; 11] = [
    "window_years",
    "name_threshold",
    "location_threshold",
    "relationship_required",
    "fuzzy_keys",
    "pairs_predicted",
    "true_matches",
    "false_matches",
    "precision",
    "recall",
    "true_pairs",
];

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SWEEP_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.window_years.to_string(),
            r.name_threshold.to_string(),
            r.location_threshold.to_string(),
            r.relationship_required.to_string(),
            r.fuzzy_keys.to_string(),
            r.report.pairs_predicted.to_string(),
            r.report.true_matches.to_string(),
            r.report.false_matches.to_string(),
            format!("{:.6}", r.report.precision),
            r.report.recall.map_or(String::new(), |x| format!("{x:.6}")),
            r.report.true_pairs.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
