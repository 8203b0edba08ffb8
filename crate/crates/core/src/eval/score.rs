//! Pairwise precision and recall against ground truth.
//!
//! A predicted pair is any unordered pair of mentions placed in the same
//! record set; it is a true match when both mentions belong to the same
//! individual. With no predicted pairs, precision is reported as 1.0.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Read;
use std::path::Path;

use serde::Serialize;

use crate::cluster::RecordSet;
use crate::error::{Error, Result};
use crate::model::{Corpus, RecordId};

/// Ground truth: which individual each mention refers to.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Truth {
    individual: HashMap<RecordId, String>,
}

impl Truth {
    pub fn from_pairs<I, R, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (R, S)>,
        R: Into<RecordId>,
        S: Into<String>,
    {
        let mut individual = HashMap::new();
        for (r, s) in pairs {
            let r = r.into();
            if individual.insert(r.clone(), s.into()).is_some() {
                return Err(Error::Scoring(format!("record {r} listed twice in truth")));
            }
        }
        Ok(Self { individual })
    }

    pub fn individual_of(&self, record: &RecordId) -> Option<&str> {
        self.individual.get(record).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.individual.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individual.is_empty()
    }

    /// `(record_id, individual_id)` sorted by record id.
    pub fn entries(&self) -> Vec<(&RecordId, &str)> {
        let mut v: Vec<_> = self.individual.iter().map(|(r, i)| (r, i.as_str())).collect();
        v.sort();
        v
    }

    /// Number of unordered co-referent pairs.
    pub fn true_pairs(&self) -> u64 {
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for i in self.individual.values() {
            *counts.entry(i).or_default() += 1;
        }
        counts.values().map(|&n| pairs(n)).sum()
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        Self::from_pairs(
            crate::io::read_two_column_csv(reader, "record_id", "individual_id")?
                .into_iter()
                .map(|(r, i)| (RecordId::new(r), i)),
        )
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(f).map_err(|e| e.with_path(path))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::from(e).with_path(path))?;
        let mut write = || -> std::result::Result<(), csv::Error> {
            w.write_record(["record_id", "individual_id"])?;
            for (r, i) in self.entries() {
                w.write_record([r.as_str(), i])?;
            }
            w.flush()?;
            Ok(())
        };
        write().map_err(|e| Error::from(e).with_path(path))
    }
}

fn pairs(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub pairs_predicted: u64,
    pub true_matches: u64,
    pub false_matches: u64,
    pub precision: f64,
    /// `None` when the truth has no co-referent pairs.
    pub recall: Option<f64>,
    /// Co-referent pairs in the truth.
    pub true_pairs: u64,
    /// False pairs by the roles of the two mentions, `"role_a/role_b"` with
    /// labels sorted. Empty unless a corpus was supplied.
    pub error_categories: BTreeMap<String, u64>,
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "pairwise evaluation against ground truth")?;
        writeln!(f, "  predicted pairs : {}", self.pairs_predicted)?;
        writeln!(f, "  true matches    : {}", self.true_matches)?;
        writeln!(f, "  false matches   : {}", self.false_matches)?;
        writeln!(f, "  precision       : {:.6}", self.precision)?;
        match self.recall {
            Some(r) => writeln!(f, "  recall          : {r:.6} (of {} true pairs)", self.true_pairs)?,
            None => writeln!(f, "  recall          : n/a (no true pairs)")?,
        }
        if !self.error_categories.is_empty() {
            writeln!(f, "  false matches by role pair:")?;
            let mut cats: Vec<_> = self.error_categories.iter().collect();
            cats.sort_by(|a, b| b.1.cmp(a.1).then(a.0.cmp(b.0)));
            for (k, v) in cats {
                writeln!(f, "    {k:<24} {v}")?;
            }
        }
        Ok(())
    }
}

/// Pairwise precision and recall of `sets` against `truth`.
pub fn score(sets: &[RecordSet], truth: &Truth) -> Result<EvalReport> {
    score_impl(sets, truth, None)
}

/// As [`score`], also breaking false matches down by role pair.
pub fn score_with_roles(sets: &[RecordSet], truth: &Truth, corpus: &Corpus) -> Result<EvalReport> {
    score_impl(sets, truth, Some(corpus))
}

fn score_impl(sets: &[RecordSet], truth: &Truth, corpus: Option<&Corpus>) -> Result<EvalReport> {
    let mut predicted = 0u64;
    let mut correct = 0u64;
    let mut categories: BTreeMap<String, i64> = BTreeMap::new();
    for set in sets {
        let mut by_individual: HashMap<&str, u64> = HashMap::new();
        let mut by_role: BTreeMap<&str, i64> = BTreeMap::new();
        let mut by_individual_role: HashMap<(&str, &str), i64> = HashMap::new();
        for m in &set.members {
            let ind =
                truth.individual_of(m).ok_or_else(|| Error::Scoring(format!("record {m} is not in the truth file")))?;
            *by_individual.entry(ind).or_default() += 1;
            if let Some(c) = corpus {
                let role =
                    c.person(m).ok_or_else(|| Error::Scoring(format!("record {m} is not in the corpus")))?.role.label();
                *by_role.entry(role).or_default() += 1;
                *by_individual_role.entry((ind, role)).or_default() += 1;
            }
        }
        predicted += pairs(set.members.len() as u64);
        correct += by_individual.values().map(|&n| pairs(n)).sum::<u64>();
        if corpus.is_some() {
            // all role-pair combinations in the set minus those within one individual
            let roles: Vec<(&str, i64)> = by_role.into_iter().collect();
            let mut within: HashMap<&str, Vec<(&str, i64)>> = HashMap::new();
            for ((ind, role), n) in by_individual_role {
                within.entry(ind).or_default().push((role, n));
            }
            let mut add = |a: &str, b: &str, n: i64| {
                if n != 0 {
                    let key = if a <= b { format!("{a}/{b}") } else { format!("{b}/{a}") };
                    *categories.entry(key).or_default() += n;
                }
            };
            for (i, &(ra, na)) in roles.iter().enumerate() {
                add(ra, ra, na * (na - 1) / 2);
                for &(rb, nb) in &roles[i + 1..] {
                    add(ra, rb, na * nb);
                }
            }
            for mut v in within.into_values() {
                v.sort();
                for (i, &(ra, na)) in v.iter().enumerate() {
                    add(ra, ra, -(na * (na - 1) / 2));
                    for &(rb, nb) in &v[i + 1..] {
                        add(ra, rb, -(na * nb));
                    }
                }
            }
        }
    }
    let true_pairs = truth.true_pairs();
    Ok(EvalReport {
        pairs_predicted: predicted,
        true_matches: correct,
        false_matches: predicted - correct,
        precision: if predicted == 0 { 1.0 } else { correct as f64 / predicted as f64 },
        recall: (true_pairs > 0).then(|| correct as f64 / true_pairs as f64),
        true_pairs,
        error_categories: categories.into_iter().filter(|(_, v)| *v > 0).map(|(k, v)| (k, v as u64)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ids: &[&str]) -> RecordSet {
        RecordSet::from_members(ids.iter().map(|s| RecordId::from(*s)).collect())
    }

    fn truth(rows: &[(&str, &str)]) -> Truth {
        Truth::from_pairs(rows.iter().map(|(r, i)| (RecordId::from(*r), *i))).unwrap()
    }

    #[test]
    fn perfect_clustering() {
        let t = truth(&[("a", "1"), ("b", "1"), ("c", "2"), ("d", "2"), ("e", "3")]);
        let r = score(&[set(&["a", "b"]), set(&["c", "d"]), set(&["e"])], &t).unwrap();
        assert_eq!((r.precision, r.recall), (1.0, Some(1.0)));
        assert_eq!(r.pairs_predicted, 2);
    }

    #[test]
    fn all_singletons() {
        let t = truth(&[("a", "1"), ("b", "1"), ("c", "2")]);
        let r = score(&[set(&["a"]), set(&["b"]), set(&["c"])], &t).unwrap();
        assert_eq!(r.precision, 1.0);
        assert_eq!(r.recall, Some(0.0));
        assert_eq!(r.pairs_predicted, 0);
    }

    #[test]
    fn father_son_merge() {
        // f1 f2 father, s1 s2 son: 6 pairs, 2 of them true
        let t = truth(&[("f1", "father"), ("f2", "father"), ("s1", "son"), ("s2", "son")]);
        let r = score(&[set(&["f1", "f2", "s1", "s2"])], &t).unwrap();
        assert_eq!(r.pairs_predicted, 6);
        assert_eq!(r.true_matches, 2);
        assert_eq!(r.false_matches, 4);
        assert!((r.precision - 2.0 / 6.0).abs() < 1e-12);
        assert_eq!(r.recall, Some(1.0));
    }

    #[test]
    fn unknown_record() {
        let t = truth(&[("a", "1")]);
        assert!(matches!(score(&[set(&["a", "zz"])], &t), Err(Error::Scoring(_))));
        assert!(Truth::from_pairs([("a", "1"), ("a", "2")]).is_err());
    }

    #[test]
    fn no_true_pairs_means_no_recall() {
        let t = truth(&[("a", "1"), ("b", "2")]);
        let r = score(&[set(&["a", "b"])], &t).unwrap();
        assert_eq!(r.recall, None);
        assert_eq!(r.precision, 0.0);
    }

    #[test]
    fn truth_csv_round_trip() {
        let t = truth(&[("r2", "i1"), ("r1", "i1")]);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("truth.csv");
        t.write_csv(&p).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "record_id,individual_id\nr1,i1\nr2,i1\n");
        assert_eq!(Truth::from_csv_path(&p).unwrap(), t);
    }
}
