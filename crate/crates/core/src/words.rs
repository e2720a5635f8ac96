//! Bounded-length factor summaries of words built by substitution.
//!
//! A summary keeps every factor of length at most `m` together with the first and
//! last `m − 1` letters, which is enough to summarize a concatenation exactly.

use std::collections::BTreeSet;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FactorSummary {
    /// Word length, saturating.
    pub len: u64,
    pub prefix: Vec<usize>,
    pub suffix: Vec<usize>,
    pub factors: BTreeSet<Vec<usize>>,
}

impl FactorSummary {
    pub fn letter(a: usize, m: usize) -> Self {
        let edge = if m > 1 { vec![a] } else { Vec::new() };
        let factors = if m >= 1 { [vec![a]].into_iter().collect() } else { BTreeSet::new() };
        FactorSummary { len: 1, prefix: edge.clone(), suffix: edge, factors }
    }

    pub fn of_word(w: &[usize], m: usize) -> Self {
        let mut out = FactorSummary::letter(w[0], m);
        for &a in &w[1..] {
            out = out.concat(&FactorSummary::letter(a, m), m);
        }
        out
    }

    pub fn concat(&self, other: &FactorSummary, m: usize) -> FactorSummary {
        let keep = m.saturating_sub(1);
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        let joined: Vec<usize> = self.suffix.iter().chain(&other.prefix).copied().collect();
        let cut = self.suffix.len();
        for i in 0..cut {
            for j in cut + 1..=joined.len() {
                if j - i <= m {
                    factors.insert(joined[i..j].to_vec());
                }
            }
        }
        let prefix = if self.len as usize >= keep {
            self.prefix.clone()
        } else {
            self.prefix.iter().chain(&other.prefix).take(keep).copied().collect()
        };
        let suffix = if other.len as usize >= keep {
            other.suffix.clone()
        } else {
            let all: Vec<usize> = self.suffix.iter().chain(&other.suffix).copied().collect();
            all[all.len().saturating_sub(keep)..].to_vec()
        };
        FactorSummary { len: self.len.saturating_add(other.len), prefix, suffix, factors }
    }

    pub fn contains(&self, w: &[usize]) -> bool {
        self.factors.contains(w)
    }
}

/// Summaries of `σ(a)` from summaries of every letter's current word.
pub fn substitute(images: &[Vec<usize>], current: &[FactorSummary], m: usize) -> Vec<FactorSummary> {
    images
        .iter()
        .map(|img| {
            let mut s = current[img[0]].clone();
            for &b in &img[1..] {
                s = s.concat(&current[b], m);
            }
            s
        })
        .collect()
}

/// Iterates summaries of `σⁿ(a)` for `n = 1, 2, …`, stopping once the state repeats.
///
/// Returns the summaries of every visited level, starting with `n = 1`.
pub fn summary_orbit(images: &[Vec<usize>], m: usize, max_steps: usize) -> (Vec<Vec<FactorSummary>>, bool) {
    let letters: Vec<FactorSummary> = (0..images.len()).map(|a| FactorSummary::letter(a, m)).collect();
    let strip = |v: &[FactorSummary]| -> Vec<FactorSummary> {
        v.iter().map(|s| FactorSummary { len: s.len.min(m as u64), ..s.clone() }).collect()
    };
    let mut seen = BTreeSet::new();
    let mut levels = Vec::new();
    let mut cur = substitute(images, &letters, m);
    for _ in 0..max_steps {
        if !seen.insert(strip(&cur)) {
            return (levels, true);
        }
        let next = substitute(images, &cur, m);
        levels.push(cur);
        cur = next;
    }
    (levels, false)
}

/// `σⁿ(w)` by direct expansion, or `None` once it would exceed `cap` letters.
pub fn expand(images: &[Vec<usize>], w: &[usize], n: usize, cap: usize) -> Option<Vec<usize>> {
    let mut cur = w.to_vec();
    for _ in 0..n {
        let len: usize = cur.iter().map(|&a| images[a].len()).sum();
        if len > cap {
            return None;
        }
        cur = cur.iter().flat_map(|&a| images[a].iter().copied()).collect();
    }
    Some(cur)
}
