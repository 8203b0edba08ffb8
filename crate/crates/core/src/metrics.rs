//! String similarity kernels for name and location comparison.
//!
//! All functions operate on Unicode scalar values, not bytes. Inputs are
//! expected to be normalized text; nothing here lowercases or trims.
//!
//! `damerau_levenshtein` implements the optimal string alignment variant:
//! an adjacent transposition counts as one edit, but no substring is edited
//! more than once. Hence `("ca", "abc")` is 3 here, not the 2 of the
//! unrestricted distance.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Similarity in `[0, 1]`, where 1 means identical.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SimilarityScore(f64);

impl SimilarityScore {
    pub const ZERO: SimilarityScore = SimilarityScore(0.0);
    pub const ONE: SimilarityScore = SimilarityScore(1.0);

    /// Returns `None` unless `value` is a finite number in `[0, 1]`.
    pub fn new(value: f64) -> Option<Self> {
        (0.0..=1.0).contains(&value).then_some(Self(value))
    }

    /// Clamps into `[0, 1]`; NaN maps to 0.
    pub(crate) fn saturating(value: f64) -> Self {
        if value.is_nan() {
            Self(0.0)
        } else {
            Self(value.clamp(0.0, 1.0))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Threshold test; the threshold itself passes.
    pub fn passes(self, threshold: SimilarityScore) -> bool {
        self.0 >= threshold.0
    }
}

impl TryFrom<f64> for SimilarityScore {
    type Error = String;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Self::new(value).ok_or_else(|| format!("similarity {value} outside [0, 1]"))
    }
}

impl From<SimilarityScore> for f64 {
    fn from(s: SimilarityScore) -> f64 {
        s.0
    }
}

impl fmt::Display for SimilarityScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6}", self.0)
    }
}

/// Levenshtein distance (insertions, deletions, substitutions).
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_chars(&a, &b)
}

pub(crate) fn levenshtein_chars(a: &[char], b: &[char]) -> usize {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return long.len();
    }
    if short.len() <= 64 {
        bit_parallel_levenshtein(short, long)
    } else {
        two_row_levenshtein(short, long)
    }
}

/// Per-character match masks for a pattern of at most 64 characters.
struct PatternMasks {
    ascii: [u64; 128],
    other: Vec<(char, u64)>,
}

impl PatternMasks {
    fn new(pattern: &[char]) -> Self {
        let mut masks = PatternMasks { ascii: [0; 128], other: Vec::new() };
        for (i, &c) in pattern.iter().enumerate() {
            let bit = 1u64 << i;
            if c.is_ascii() {
                masks.ascii[c as usize] |= bit;
            } else if let Some(slot) = masks.other.iter_mut().find(|(k, _)| *k == c) {
                slot.1 |= bit;
            } else {
                masks.other.push((c, bit));
            }
        }
        masks
    }

    #[inline]
    fn get(&self, c: char) -> u64 {
        if c.is_ascii() {
            self.ascii[c as usize]
        } else {
            self.other.iter().find(|(k, _)| *k == c).map_or(0, |(_, m)| *m)
        }
    }
}

// Myers' bit-vector algorithm in Hyyrö's formulation for global distance.
fn bit_parallel_levenshtein(pattern: &[char], text: &[char]) -> usize {
    let masks = PatternMasks::new(pattern);
    let last = 1u64 << (pattern.len() - 1);
    let mut pv = !0u64;
    let mut mv = 0u64;
    let mut score = pattern.len();
    for &c in text {
        let eq = masks.get(c);
        let xv = eq | mv;
        let xh = ((eq & pv).wrapping_add(pv) ^ pv) | eq;
        let mut ph = mv | !(xh | pv);
        let mut mh = pv & xh;
        if ph & last != 0 {
            score += 1;
        } else if mh & last != 0 {
            score -= 1;
        }
        ph = (ph << 1) | 1;
        mh <<= 1;
        pv = mh | !(xv | ph);
        mv = ph & xv;
    }
    score
}

fn two_row_levenshtein(a: &[char], b: &[char]) -> usize {
    let mut prev: Vec<usize> = (0..=a.len()).collect();
    let mut cur = vec![0; a.len() + 1];
    for (j, &cb) in b.iter().enumerate() {
        cur[0] = j + 1;
        for (i, &ca) in a.iter().enumerate() {
            let sub = prev[i] + usize::from(ca != cb);
            cur[i + 1] = sub.min(prev[i + 1] + 1).min(cur[i] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[a.len()]
}

/// Optimal string alignment distance.
pub fn damerau_levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    damerau_chars(&a, &b)
}

pub(crate) fn damerau_chars(a: &[char], b: &[char]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let width = b.len() + 1;
    // rows i-2, i-1, i
    let mut before: Vec<usize> = vec![0; width];
    let mut prev: Vec<usize> = (0..width).collect();
    let mut cur: Vec<usize> = vec![0; width];
    for i in 1..=a.len() {
        cur[0] = i;
        for j in 1..width {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            let mut d = (prev[j] + 1).min(cur[j - 1] + 1).min(prev[j - 1] + cost);
            if i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1] {
                d = d.min(before[j - 2] + 1);
            }
            cur[j] = d;
        }
        std::mem::swap(&mut before, &mut prev);
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Jaro similarity. Both empty is 1.0, exactly one empty is 0.0.
pub fn jaro(a: &str, b: &str) -> SimilarityScore {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    SimilarityScore::saturating(jaro_chars(&a, &b))
}

fn jaro_chars(a: &[char], b: &[char]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let window = (a.len().max(b.len()) / 2).saturating_sub(1);
    let mut a_flags = vec![false; a.len()];
    let mut b_flags = vec![false; b.len()];
    let mut matches = 0usize;
    for (i, &ca) in a.iter().enumerate() {
        let lo = i.saturating_sub(window);
        let hi = (i + window + 1).min(b.len());
        for j in lo..hi {
            if !b_flags[j] && b[j] == ca {
                a_flags[i] = true;
                b_flags[j] = true;
                matches += 1;
                break;
            }
        }
    }
    if matches == 0 {
        return 0.0;
    }
    let a_matched = a.iter().zip(&a_flags).filter(|(_, f)| **f).map(|(c, _)| c);
    let b_matched = b.iter().zip(&b_flags).filter(|(_, f)| **f).map(|(c, _)| c);
    let half_transpositions = a_matched.zip(b_matched).filter(|(x, y)| x != y).count();
    let m = matches as f64;
    let t = (half_transpositions / 2) as f64;
    (m / a.len() as f64 + m / b.len() as f64 + (m - t) / m) / 3.0
}

pub const WINKLER_SCALING: f64 = 0.1;
pub const WINKLER_MAX_PREFIX: usize = 4;

/// Jaro similarity boosted by the common prefix (up to 4 characters, scaling 0.1).
pub fn jaro_winkler(a: &str, b: &str) -> SimilarityScore {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    SimilarityScore::saturating(jaro_winkler_chars(&a, &b))
}

pub(crate) fn jaro_winkler_chars(a: &[char], b: &[char]) -> f64 {
    let j = jaro_chars(a, b);
    let prefix = a.iter().zip(b).take(WINKLER_MAX_PREFIX).take_while(|(x, y)| x == y).count();
    j + prefix as f64 * WINKLER_SCALING * (1.0 - j)
}

/// `1 - levenshtein / max_len`; both empty is 1.0.
pub fn normalized_edit_similarity(a: &str, b: &str) -> SimilarityScore {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    normalized(levenshtein_chars(&a, &b), a.len().max(b.len()))
}

/// `1 - damerau_levenshtein / max_len`; both empty is 1.0.
pub fn normalized_damerau_similarity(a: &str, b: &str) -> SimilarityScore {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    normalized(damerau_chars(&a, &b), a.len().max(b.len()))
}

fn normalized(distance: usize, max_len: usize) -> SimilarityScore {
    if max_len == 0 {
        return SimilarityScore::ONE;
    }
    SimilarityScore::saturating(1.0 - distance as f64 / max_len as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn levenshtein_examples() {
        assert_eq!(levenshtein("abc", "abc"), 0);
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("abc", ""), 3);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("élise", "elise"), 1);
    }

    #[test]
    fn long_strings_use_fallback_consistently() {
        let a: String = "desroches ".repeat(10);
        let b: String = "desrochez ".repeat(10);
        assert_eq!(a.chars().count(), 100);
        assert_eq!(levenshtein(&a, &b), 10);
        let a_chars: Vec<char> = a.chars().collect();
        let b_chars: Vec<char> = b.chars().collect();
        assert_eq!(two_row_levenshtein(&a_chars, &b_chars), 10);
        // exactly 64 characters exercises the top bit of the bit vector
        let p: String = "ab".repeat(32);
        let t: String = "ba".repeat(32);
        assert_eq!(levenshtein(&p, &t), 2);
    }

    #[test]
    fn damerau_examples() {
        assert_eq!(damerau_levenshtein("ab", "ba"), 1);
        assert_eq!(damerau_levenshtein("abc", "abc"), 0);
        assert_eq!(damerau_levenshtein("ca", "abc"), 3);
        assert_eq!(damerau_levenshtein("", "ab"), 2);
    }

    #[test]
    fn jaro_winkler_examples() {
        assert_eq!(jaro_winkler("martha", "martha").value(), 1.0);
        assert_eq!(jaro_winkler("abc", "xyz").value(), 0.0);
        assert!((jaro_winkler("martha", "marhta").value() - 0.961).abs() < 1e-3);
        assert_eq!(jaro_winkler("", "").value(), 1.0);
        assert_eq!(jaro_winkler("", "a").value(), 0.0);
        assert_eq!(jaro_winkler("a", "").value(), 0.0);
    }

    #[test]
    fn normalized_edit_examples() {
        assert_eq!(normalized_edit_similarity("abcd", "abcd").value(), 1.0);
        assert_eq!(normalized_edit_similarity("abcd", "wxyz").value(), 0.0);
        assert_eq!(normalized_edit_similarity("abcd", "abce").value(), 0.75);
        assert_eq!(normalized_edit_similarity("", "").value(), 1.0);
    }

    #[test]
    fn score_bounds() {
        assert!(SimilarityScore::new(1.01).is_none());
        assert!(SimilarityScore::new(-0.1).is_none());
        assert!(SimilarityScore::new(f64::NAN).is_none());
        assert!(SimilarityScore::new(0.5).unwrap().passes(SimilarityScore::new(0.5).unwrap()));
    }

    proptest! {
        #[test]
        fn metric_symmetry(a in "[a-e ]{0,12}", b in "[a-e ]{0,12}") {
            prop_assert_eq!(levenshtein(&a, &b), levenshtein(&b, &a));
            prop_assert_eq!(damerau_levenshtein(&a, &b), damerau_levenshtein(&b, &a));
            prop_assert_eq!(jaro_winkler(&a, &b), jaro_winkler(&b, &a));
        }

        #[test]
        fn triangle_inequality(a in "[a-d]{0,10}", b in "[a-d]{0,10}", c in "[a-d]{0,10}") {
            prop_assert!(levenshtein(&a, &c) <= levenshtein(&a, &b) + levenshtein(&b, &c));
        }

        #[test]
        fn identity_of_indiscernibles(a in "[a-c]{0,8}", b in "[a-c]{0,8}") {
            prop_assert_eq!(levenshtein(&a, &b) == 0, a == b);
            prop_assert_eq!(jaro_winkler(&a, &b).value() == 1.0, a == b);
            prop_assert!(damerau_levenshtein(&a, &b) <= levenshtein(&a, &b));
        }

        #[test]
        fn scores_in_unit_interval(a in "\\PC{0,20}", b in "\\PC{0,20}") {
            for s in [jaro_winkler(&a, &b), normalized_edit_similarity(&a, &b), normalized_damerau_similarity(&a, &b)] {
                prop_assert!((0.0..=1.0).contains(&s.value()));
            }
        }
    }
}
