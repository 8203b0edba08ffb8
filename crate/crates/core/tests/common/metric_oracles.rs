//! Textbook string metrics used as oracles.

use std::collections::HashMap;

pub fn all_strings(alphabet: &[char], max_len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut frontier = vec![String::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &frontier {
            for &c in alphabet {
                let mut t = s.clone();
                t.push(c);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Full-matrix Wagner-Fischer.
pub fn lev_matrix(a: &[char], b: &[char]) -> usize {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    d[0] = (0..=b.len()).collect();
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = (d[i - 1][j] + 1).min(d[i][j - 1] + 1).min(d[i - 1][j - 1] + sub);
        }
    }
    d[a.len()][b.len()]
}

/// Optimal string alignment distance by memoized recursion on suffixes.
pub fn osa_rec(a: &[char], b: &[char], memo: &mut HashMap<(usize, usize), usize>) -> usize {
    let key = (a.len(), b.len());
    if let Some(&v) = memo.get(&key) {
        return v;
    }
    let v = if a.is_empty() {
        b.len()
    } else if b.is_empty() {
        a.len()
    } else {
        let mut best = (osa_rec(&a[1..], b, memo) + 1)
            .min(osa_rec(a, &b[1..], memo) + 1)
            .min(osa_rec(&a[1..], &b[1..], memo) + usize::from(a[0] != b[0]));
        if a.len() > 1 && b.len() > 1 && a[0] == b[1] && a[1] == b[0] {
            best = best.min(osa_rec(&a[2..], &b[2..], memo) + 1);
        }
        best
    };
    memo.insert(key, v);
    v
}

pub fn jaro_textbook(a: &[char], b: &[char]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let window = (a.len().max(b.len()) / 2).saturating_sub(1);
    let mut a_hit = vec![false; a.len()];
    let mut b_hit = vec![false; b.len()];
    let mut m = 0usize;
    for i in 0..a.len() {
        let lo = i.saturating_sub(window);
        let hi = (i + window + 1).min(b.len());
        for j in lo..hi {
            if !b_hit[j] && a[i] == b[j] {
                a_hit[i] = true;
                b_hit[j] = true;
                m += 1;
                break;
            }
        }
    }
    if m == 0 {
        return 0.0;
    }
    let a_seq: Vec<char> = a.iter().zip(&a_hit).filter(|p| *p.1).map(|p| *p.0).collect();
    let b_seq: Vec<char> = b.iter().zip(&b_hit).filter(|p| *p.1).map(|p| *p.0).collect();
    let half_t = a_seq.iter().zip(&b_seq).filter(|(x, y)| x != y).count() as f64 / 2.0;
    let m = m as f64;
    (m / a.len() as f64 + m / b.len() as f64 + (m - half_t) / m) / 3.0
}

pub fn jw_textbook(a: &[char], b: &[char]) -> f64 {
    let j = jaro_textbook(a, b);
    let l = a.iter().zip(b).take(4).take_while(|(x, y)| x == y).count() as f64;
    j + l * 0.1 * (1.0 - j)
}
