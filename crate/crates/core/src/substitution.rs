//! Substitutions, their reads from mono-graphs and self-covers, and array systems.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::coverings::CoveringPresentation;
use crate::error::{Error, Result};
use crate::graphs::{Cover, EdgeId};
use crate::orbits::growing_symbols;
use crate::stationary::MonoGraph;
use crate::words::{substitute, summary_orbit, FactorSummary};

/// Steps allowed before a factor-set orbit is declared unstable.
const ORBIT_STEPS: usize = 4096;

/// Symbol levels above `n + 1` summarized before the search gives up.
const LEVEL_CAP: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Substitution {
    letters: Vec<String>,
    images: Vec<Vec<usize>>,
}

impl Substitution {
    pub fn new(letters: Vec<String>, images: Vec<Vec<usize>>) -> Result<Self> {
        if letters.len() != images.len() || letters.is_empty() {
            return Err(Error::InvalidSequence("one image per letter is required".into()));
        }
        let distinct: BTreeSet<&String> = letters.iter().collect();
        if distinct.len() != letters.len() {
            return Err(Error::InvalidSequence("duplicate letter".into()));
        }
        for (a, img) in images.iter().enumerate() {
            if img.is_empty() {
                return Err(Error::InvalidSequence(format!("σ({}) is empty", letters[a])));
            }
            if img.iter().any(|&b| b >= letters.len()) {
                return Err(Error::InvalidSequence(format!("σ({}) uses an unknown letter", letters[a])));
            }
        }
        Ok(Substitution { letters, images })
    }

    /// Images are words in the format accepted by [`Substitution::parse_word`].
    pub fn from_names(rules: &[(&str, &str)]) -> Result<Self> {
        let letters: Vec<String> = rules.iter().map(|r| r.0.to_string()).collect();
        let shell = Substitution { letters, images: Vec::new() };
        let images = rules.iter().map(|r| shell.parse_word(r.1)).collect::<Result<Vec<_>>>()?;
        Substitution::new(shell.letters, images)
    }

    pub fn letters(&self) -> &[String] {
        &self.letters
    }

    pub fn images(&self) -> &[Vec<usize>] {
        &self.images
    }

    pub fn letter_id(&self, name: &str) -> Option<usize> {
        self.letters.iter().position(|x| x == name)
    }

    /// Space-separated letters, or a run of one-character letters.
    pub fn parse_word(&self, w: &str) -> Result<Vec<usize>> {
        let tokens: Vec<String> = if w.contains(char::is_whitespace) {
            w.split_whitespace().map(str::to_string).collect()
        } else if self.letter_id(w).is_some() {
            vec![w.to_string()]
        } else {
            w.chars().map(|c| c.to_string()).collect()
        };
        if tokens.is_empty() {
            return Err(Error::InvalidSequence("empty word".into()));
        }
        tokens
            .iter()
            .map(|t| self.letter_id(t).ok_or_else(|| Error::InvalidSequence(format!("unknown letter {t}"))))
            .collect()
    }

    /// Concatenated when every letter is one character, space-separated otherwise.
    pub fn format_word(&self, w: &[usize]) -> String {
        let short = self.letters.iter().all(|l| l.chars().count() == 1);
        let parts: Vec<&str> = w.iter().map(|&a| self.letters[a].as_str()).collect();
        parts.join(if short { "" } else { " " })
    }

    pub fn apply(&self, w: &[usize]) -> Vec<usize> {
        w.iter().flat_map(|&a| self.images[a].iter().copied()).collect()
    }

    /// `σⁿ(w)`, or `None` past `cap` letters.
    pub fn power(&self, w: &[usize], n: usize, cap: usize) -> Option<Vec<usize>> {
        crate::words::expand(&self.images, w, n, cap)
    }
}

pub fn growing_letters(s: &Substitution) -> BTreeSet<String> {
    growing_symbols(&s.images)
        .into_iter()
        .enumerate()
        .filter(|&(_, g)| g)
        .map(|(a, _)| s.letters[a].clone())
        .collect()
}

/// Every factor of length at most `max_len` of some `σⁿ(a)`, `n ≥ 0`.
pub fn language(s: &Substitution, max_len: usize) -> Result<BTreeSet<Vec<usize>>> {
    if growing_letters(s).is_empty() {
        return Err(Error::EmptyGrowingSet);
    }
    let mut out: BTreeSet<Vec<usize>> = (0..s.letters.len()).map(|a| vec![a]).collect();
    if max_len == 0 {
        return Ok(BTreeSet::new());
    }
    let (levels, stable) = summary_orbit(&s.images, max_len, ORBIT_STEPS);
    if !stable {
        return Err(Error::Precondition("factor sets did not stabilize".into()));
    }
    for level in levels {
        for summary in level {
            out.extend(summary.factors);
        }
    }
    Ok(out)
}

fn require_growth(s: Substitution) -> Result<Substitution> {
    if growing_letters(&s).is_empty() {
        return Err(Error::EmptyGrowingSet);
    }
    Ok(s)
}

/// Letters are vertices; `σ(a)` lists the sources of the in-edges of `a` by rank.
pub fn read_substitution_mono(m: &MonoGraph) -> Result<Substitution> {
    require_growth(Substitution::new(m.vertex_names().to_vec(), m.read_images())?)
}

/// Letters are edges; `σ(a)` is the walk `φ(a)`.
pub fn read_substitution_cover(c: &Cover) -> Result<Substitution> {
    if !c.is_self_cover() {
        return Err(Error::DomainMismatch("a substitution is read on a self-cover".into()));
    }
    let g = &c.domain;
    let letters = g.edges().map(|e| g.edge_name(e).to_string()).collect();
    let images = c.emap.iter().map(|w| w.0.iter().map(|e| e.0).collect()).collect();
    require_growth(Substitution::new(letters, images)?)
}

pub fn read_substitution(p: &CoveringPresentation) -> Result<Substitution> {
    match p {
        CoveringPresentation::Stationary(s) => read_substitution_cover(s.cover()),
        _ => Err(Error::Precondition("a substitution is read on a stationary presentation".into())),
    }
}

/// The expansions of one level-`n` edge down to level 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NSymbol {
    pub level: usize,
    pub root: String,
    /// `rows[m]` is `φ_{n,m}(e)` as edge ids; `rows[n] = [e]`.
    pub rows: Vec<Vec<String>>,
}

pub fn n_symbol(p: &CoveringPresentation, n: usize, e: EdgeId) -> Result<NSymbol> {
    p.check_level(n)?;
    let top = p.shape(n)?;
    if e.0 >= top.edge_count() {
        return Err(Error::Graph(format!("no edge {} at level {n}", e.0)));
    }
    let mut rows = Vec::with_capacity(n + 1);
    for m in 0..=n {
        let g = p.shape(m)?;
        let walk = p.expand(n, m, e)?;
        rows.push(walk.iter().map(|&x| g.edge_name(x).to_string()).collect());
    }
    Ok(NSymbol { level: n, root: top.edge_name(e).to_string(), rows })
}

/// A bi-infinite level-`m` row `…LLL C RRR…`; column 0 is where `C` starts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct SeedRow {
    pub level: usize,
    pub left: Vec<String>,
    pub center: Vec<String>,
    pub right: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cell {
    pub start: i64,
    pub edge: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ArrayWindow {
    pub s: i64,
    pub t: i64,
    /// `rows[n][i]` is the level-`n` edge at column `s + i`.
    pub rows: Vec<Vec<String>>,
    /// Columns in `[s, t]` carrying an `n`-cut.
    pub cuts: Vec<Vec<i64>>,
    /// Cells meeting the window, including those cut off by its border.
    pub cells: Vec<Vec<Cell>>,
}

fn seed_edges(p: &CoveringPresentation, seed: &SeedRow) -> Result<[Vec<EdgeId>; 3]> {
    let g = p.shape(seed.level)?;
    let look = |list: &[String]| -> Result<Vec<EdgeId>> {
        list.iter()
            .map(|x| g.edge_id(x).ok_or_else(|| Error::IllegalSeed(format!("unknown edge {x}"))))
            .collect()
    };
    let (l, c, r) = (look(&seed.left)?, look(&seed.center)?, look(&seed.right)?);
    if l.is_empty() || r.is_empty() {
        return Err(Error::IllegalSeed("both periodic tails must be nonempty".into()));
    }
    let chain: Vec<EdgeId> = l.iter().chain(&l).chain(&c).chain(&r).chain(&r).copied().collect();
    for w in chain.windows(2) {
        if g.rng(w[0]) != g.src(w[1]) {
            return Err(Error::IllegalSeed(format!(
                "{} does not continue {}",
                g.edge_name(w[1]),
                g.edge_name(w[0])
            )));
        }
    }
    Ok([l, c, r])
}

/// Expands a seed row down to level 0 over columns `[s, t]` and keeps rows `0..=n`.
pub fn array_window(p: &CoveringPresentation, seed: &SeedRow, n: usize, s: i64, t: i64) -> Result<ArrayWindow> {
    if n > seed.level {
        return Err(Error::Precondition(format!("rows up to {n} need a seed at level ≥ {n}")));
    }
    if s > t {
        return Err(Error::Precondition("empty column range".into()));
    }
    p.check_level(seed.level)?;
    let [left, center, right] = seed_edges(p, seed)?;
    let lens = p.lengths(seed.level)?;
    let width = |e: EdgeId| lens[e.0] as i64;
    let mut top: Vec<(i64, EdgeId)> = Vec::new();
    let mut at = 0i64;
    for i in 0.. {
        if at > t {
            break;
        }
        let e = if i < center.len() { center[i] } else { right[(i - center.len()) % right.len()] };
        top.push((at, e));
        at += width(e);
    }
    let mut at = 0i64;
    let mut before = Vec::new();
    for i in 0.. {
        if at <= s {
            break;
        }
        let e = left[left.len() - 1 - i % left.len()];
        at -= width(e);
        before.push((at, e));
    }
    before.reverse();
    before.extend(top);
    let keep = |start: i64, w: i64| start <= t && start + w > s;
    let mut rows_cells: Vec<Vec<(i64, EdgeId)>> = vec![Vec::new(); seed.level + 1];
    rows_cells[seed.level] = before.into_iter().filter(|&(a, e)| keep(a, width(e))).collect();
    for j in (1..=seed.level).rev() {
        let cover = p.cover(j)?;
        let below = p.lengths(j - 1)?;
        let mut next = Vec::new();
        for &(start, e) in &rows_cells[j] {
            let mut at = start;
            for &x in &cover.image(e).0 {
                let w = below[x.0] as i64;
                if keep(at, w) {
                    next.push((at, x));
                }
                at += w;
            }
        }
        rows_cells[j - 1] = next;
    }
    let mut rows = Vec::new();
    let mut cuts = Vec::new();
    let mut cells = Vec::new();
    for (j, list) in rows_cells.iter().enumerate().take(n + 1) {
        let g = p.shape(j)?;
        let lens = p.lengths(j)?;
        let mut row = Vec::new();
        let mut cut = Vec::new();
        for &(start, e) in list {
            if start >= s {
                cut.push(start);
            }
            for c in start.max(s)..(start + lens[e.0] as i64).min(t + 1) {
                debug_assert_eq!(c, s + row.len() as i64);
                row.push(g.edge_name(e).to_string());
            }
        }
        rows.push(row);
        cuts.push(cut);
        cells.push(list.iter().map(|&(start, e)| Cell { start, edge: g.edge_name(e).to_string() }).collect());
    }
    Ok(ArrayWindow { s, t, rows, cuts, cells })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IotaResult {
    Found { letter: String, n: usize },
    Unknown,
}

fn unit_substitution(p: &CoveringPresentation) -> Result<Substitution> {
    let CoveringPresentation::Stationary(s) = p else {
        return Err(Error::Precondition("a stationary presentation is required".into()));
    };
    if s.multiplicities().iter().any(|&m| m != 1) {
        return Err(Error::Precondition("unit multiplicities n(e) = 1 are required".into()));
    }
    read_substitution(p)
}

/// Searches for the least `n ≤ depth_max`, then the least letter, with `w` inside `σⁿ(a)`.
pub fn check_iota_window(p: &CoveringPresentation, w: &[String], depth_max: usize) -> Result<IotaResult> {
    let s = unit_substitution(p)?;
    if w.is_empty() {
        return Err(Error::InvalidSequence("empty word".into()));
    }
    let word = w
        .iter()
        .map(|x| s.letter_id(x).ok_or_else(|| Error::InvalidSequence(format!("unknown letter {x}"))))
        .collect::<Result<Vec<_>>>()?;
    let (levels, _) = summary_orbit(&s.images, word.len(), depth_max);
    for (i, level) in levels.iter().enumerate() {
        if let Some(a) = level.iter().position(|f| f.contains(&word)) {
            return Ok(IotaResult::Found { letter: s.letters[a].clone(), n: i + 1 });
        }
    }
    Ok(IotaResult::Unknown)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RecodingVerdict {
    Determined,
    Ambiguous,
    Unknown,
}

/// Where a window was seen: inside the symbol of `root` at `level`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WindowSource {
    pub root: String,
    pub level: usize,
    /// Level-`(n+1)` edge over the center column and the column's offset inside it.
    pub above: String,
    pub offset: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RecodingWitness {
    /// Level-`n` edges of the window, with `|` before each cut column.
    pub window: Vec<String>,
    pub first: WindowSource,
    pub second: WindowSource,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RecodingReport {
    pub verdict: RecodingVerdict,
    pub level: usize,
    pub radius: usize,
    /// Highest symbol level summarized.
    pub depth: usize,
    pub windows: usize,
    pub witness: Option<RecodingWitness>,
}

/// A column of a level-`n` row: edge, cut flag, edge above and offset inside it.
type Column = (usize, bool, usize, u64);

/// Whether every level-`n` window of width `2r + 1` fixes the level-`(n+1)` cell at its center.
///
/// Windows come from the symbols of all edges at levels `n + 1, n + 2, …`. Each symbol
/// is kept as a bounded-window summary, so the search ends exactly when the summaries
/// of every edge repeat.
pub fn check_recoding(p: &CoveringPresentation, n: usize, r: usize) -> Result<RecodingReport> {
    let CoveringPresentation::Stationary(st) = p else {
        return Err(Error::Precondition("a stationary presentation is required".into()));
    };
    let width = 2 * r + 1;
    let g_n = p.shape(n)?;
    let g_up = p.shape(n + 1)?;
    let lens_n = p.lengths(n)?;
    let lens_up = p.lengths(n + 1)?;
    let down = p.cover(n + 1)?;
    let mut alphabet: Vec<Column> = Vec::new();
    let mut index: BTreeMap<Column, usize> = BTreeMap::new();
    let mut current = Vec::new();
    for f in g_up.edges() {
        let mut word = Vec::new();
        let mut offset = 0;
        for &x in &down.image(f).0 {
            for i in 0..lens_n[x.0] {
                let col = (x.0, i == 0, f.0, offset);
                let id = *index.entry(col).or_insert_with(|| {
                    alphabet.push(col);
                    alphabet.len() - 1
                });
                word.push(id);
                offset += 1;
            }
        }
        debug_assert_eq!(offset, lens_up[f.0]);
        current.push(FactorSummary::of_word(&word, width));
    }
    let images: Vec<Vec<usize>> = st.cover().emap.iter().map(|w| w.0.iter().map(|e| e.0).collect()).collect();
    let strip = |v: &[FactorSummary]| -> Vec<FactorSummary> {
        v.iter().map(|s| FactorSummary { len: s.len.min(width as u64), ..s.clone() }).collect()
    };
    let mut seen: BTreeMap<Vec<(usize, bool)>, (usize, u64, WindowSource)> = BTreeMap::new();
    let mut states = BTreeSet::new();
    let mut level = n + 1;
    loop {
        if !states.insert(strip(&current)) {
            return Ok(report(RecodingVerdict::Determined, n, r, level - 1, seen.len(), None));
        }
        if level > n + 1 + LEVEL_CAP {
            return Ok(report(RecodingVerdict::Unknown, n, r, level - 1, seen.len(), None));
        }
        for (root, summary) in current.iter().enumerate() {
            for w in summary.factors.iter().filter(|w| w.len() == width) {
                let key: Vec<(usize, bool)> = w.iter().map(|&c| (alphabet[c].0, alphabet[c].1)).collect();
                let (_, _, f, off) = alphabet[w[r]];
                let source = WindowSource {
                    root: g_up.edge_name(EdgeId(root)).to_string(),
                    level,
                    above: g_up.edge_name(EdgeId(f)).to_string(),
                    offset: off,
                };
                match seen.get(&key) {
                    None => {
                        seen.insert(key, (f, off, source));
                    }
                    Some((f0, off0, first)) if (*f0, *off0) != (f, off) => {
                        let window = key
                            .iter()
                            .map(|&(e, cut)| {
                                let name = g_n.edge_name(EdgeId(e));
                                if cut { format!("|{name}") } else { name.to_string() }
                            })
                            .collect();
                        let witness = RecodingWitness { window, first: first.clone(), second: source };
                        return Ok(report(RecodingVerdict::Ambiguous, n, r, level, seen.len(), Some(witness)));
                    }
                    Some(_) => {}
                }
            }
        }
        current = substitute(&images, &current, width);
        level += 1;
    }
}

fn report(
    verdict: RecodingVerdict,
    level: usize,
    radius: usize,
    depth: usize,
    windows: usize,
    witness: Option<RecodingWitness>,
) -> RecodingReport {
    RecodingReport { verdict, level, radius, depth, windows, witness }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::bratteli::weighted_to_bv;
    use crate::fixtures;
    use proptest::prelude::*;

    fn fib() -> Substitution {
        Substitution::from_names(&[("a", "aba"), ("b", "ab")]).unwrap()
    }

    fn two() -> Substitution {
        Substitution::from_names(&[
            ("a", "a"),
            ("b", "abde"),
            ("c", "deca"),
            ("d", "dedf"),
            ("e", "fe"),
            ("f", "f"),
        ])
        .unwrap()
    }

    fn words(s: &Substitution, set: &BTreeSet<Vec<usize>>) -> Vec<String> {
        set.iter().map(|w| s.format_word(w)).collect()
    }

    // Factors of every σⁿ(a) for n up to `depth` by direct expansion.
    fn brute_language(s: &Substitution, max_len: usize, depth: usize) -> BTreeSet<Vec<usize>> {
        let mut out = BTreeSet::new();
        for a in 0..s.letters().len() {
            for n in 0..=depth {
                let w = s.power(&[a], n, usize::MAX).unwrap();
                for i in 0..w.len() {
                    for j in i + 1..=w.len().min(i + max_len) {
                        out.insert(w[i..j].to_vec());
                    }
                }
            }
        }
        out
    }

    #[test]
    fn growth_classes() {
        let all: BTreeSet<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        assert_eq!(growing_letters(&fib()), all);
        let mid: BTreeSet<String> = ["b", "c", "d", "e"].iter().map(|s| s.to_string()).collect();
        assert_eq!(growing_letters(&two()), mid);
        let fixed = Substitution::from_names(&[("a", "a")]).unwrap();
        assert!(growing_letters(&fixed).is_empty());
        assert_eq!(language(&fixed, 2), Err(Error::EmptyGrowingSet));
    }

    #[test]
    fn languages_match_expansion() {
        let s = fib();
        assert_eq!(words(&s, &language(&s, 2).unwrap()), vec!["a", "aa", "ab", "b", "ba"]);
        let s = two();
        assert_eq!(language(&s, 1).unwrap().len(), 6);
        let l2 = language(&s, 2).unwrap();
        for w in ["fe", "de", "ed", "ab", "bd", "ca", "aa", "ff", "ec"] {
            assert!(l2.contains(&s.parse_word(w).unwrap()), "{w}");
        }
        // No image ends in e before one starting with f.
        assert!(!l2.contains(&s.parse_word("ef").unwrap()));
        for len in 1..=4 {
            assert_eq!(language(&s, len).unwrap(), brute_language(&s, len, 7));
        }
    }

    #[test]
    fn reads_agree() {
        let cov = read_substitution(&fixtures::example_two()).unwrap();
        let expected = ["e_a", "e_a e_b e_d e_e", "e_d e_e e_c e_a", "e_d e_e e_d e_f", "e_f e_e", "e_f"];
        for (a, img) in expected.iter().enumerate() {
            assert_eq!(cov.format_word(&cov.images()[a]), *img);
        }
        for p in [fixtures::fibonacci(), fixtures::example_two()] {
            let d = weighted_to_bv(&p).unwrap();
            assert_eq!(read_substitution_mono(d.mono().unwrap()).unwrap(), read_substitution(&p).unwrap());
        }
        let fib = read_substitution(&fixtures::fibonacci()).unwrap();
        assert_eq!(fib.format_word(&fib.images()[0]), "aba");
        let fixed = CoveringPresentation::singleton();
        assert_eq!(read_substitution(&fixed), Err(Error::EmptyGrowingSet));
    }

    #[test]
    fn symbols() {
        let p = fixtures::example_two();
        let b = p.shape(2).unwrap().edge_id("e_b").unwrap();
        let sym = n_symbol(&p, 2, b).unwrap();
        assert_eq!(sym.rows[1], vec!["e_a", "e_b", "e_d", "e_e"]);
        assert_eq!(sym.rows[0], vec!["e0"; 4]);
        let f = fixtures::fibonacci();
        let sym = n_symbol(&f, 3, EdgeId(0)).unwrap();
        assert_eq!(sym.rows[1].join(""), "abaababa");
        assert_eq!(n_symbol(&f, 1, EdgeId(1)).unwrap().rows, vec![vec!["e0".to_string()], vec!["b".to_string()]]);
    }

    fn seed(level: usize, l: &[&str], c: &[&str], r: &[&str]) -> SeedRow {
        let v = |x: &[&str]| x.iter().map(|s| s.to_string()).collect();
        SeedRow { level, left: v(l), center: v(c), right: v(r) }
    }

    #[test]
    fn constant_column() {
        let p = fixtures::example_two();
        let w = array_window(&p, &seed(3, &["e_a"], &[], &["e_a"]), 3, -4, 4).unwrap();
        for n in 0..=3 {
            assert_eq!(w.cuts[n], (-4..=4).collect::<Vec<_>>());
        }
        assert!(w.rows[3].iter().all(|x| x == "e_a"));
        let bad = array_window(&p, &seed(1, &["e_a"], &["e_c"], &["e_a"]), 1, 0, 3);
        assert!(matches!(bad, Err(Error::IllegalSeed(_))));
    }

    #[test]
    fn window_segments_are_expansions() {
        let p = fixtures::example_two();
        let w = array_window(&p, &seed(3, &["e_a"], &["e_b", "e_d"], &["e_f"]), 3, -2, 30).unwrap();
        let g = p.shape(2).unwrap();
        let b = w.cells[2].iter().find(|c| c.edge == "e_b").unwrap();
        let below: Vec<&str> = w.cells[1]
            .iter()
            .filter(|c| c.start >= b.start && c.start < b.start + 4)
            .map(|c| c.edge.as_str())
            .collect();
        assert_eq!(below, g.walk_names(p.cover(2).unwrap().image(g.edge_id("e_b").unwrap())));
        for n in 1..=3 {
            assert!(w.cuts[n].iter().all(|c| w.cuts[n - 1].contains(c)));
        }
        let single = array_window(&fixtures::fibonacci(), &seed(1, &["a"], &["b"], &["a"]), 1, 0, 0).unwrap();
        assert_eq!(single.rows, vec![vec!["e0".to_string()], vec!["b".to_string()]]);
    }

    #[test]
    fn iota_windows() {
        let f = fixtures::fibonacci();
        let w = |s: &[&str]| s.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        assert_eq!(check_iota_window(&f, &w(&["a", "b"]), 5).unwrap(), IotaResult::Found { letter: "a".into(), n: 1 });
        assert_eq!(check_iota_window(&f, &w(&["a", "a"]), 5).unwrap(), IotaResult::Found { letter: "a".into(), n: 2 });
        assert_eq!(check_iota_window(&f, &w(&["b"]), 5).unwrap(), IotaResult::Found { letter: "a".into(), n: 1 });
        assert_eq!(check_iota_window(&f, &w(&["b", "b"]), 5).unwrap(), IotaResult::Unknown);
    }

    #[test]
    fn recoding_verdicts() {
        let collision = check_recoding(&fixtures::recoding_collision(), 1, 3).unwrap();
        assert_eq!(collision.verdict, RecodingVerdict::Ambiguous);
        let w = collision.witness.unwrap();
        assert_ne!((w.first.above, w.first.offset), (w.second.above, w.second.offset));
        let one = check_recoding(&CoveringPresentation::singleton(), 1, 2).unwrap();
        assert_eq!(one.verdict, RecodingVerdict::Determined);
    }

    // Windows of full symbol expansions at levels n+1..=depth, keyed by content with
    // every label seen under it.
    fn brute_windows(
        p: &CoveringPresentation,
        n: usize,
        r: usize,
        depth: usize,
    ) -> Option<BTreeMap<Vec<(usize, bool)>, BTreeSet<(usize, u64)>>> {
        let mut out: BTreeMap<_, BTreeSet<_>> = BTreeMap::new();
        let lens_n = p.lengths(n).unwrap();
        let lens_up = p.lengths(n + 1).unwrap();
        for level in n + 1..=depth {
            for root in p.shape(level).unwrap().edges() {
                let mut cols = Vec::new();
                for f in p.expand(level, n + 1, root).unwrap() {
                    let mut off = 0;
                    for x in p.expand(n + 1, n, f).unwrap() {
                        for i in 0..lens_n[x.0] {
                            cols.push(((x.0, i == 0), (f.0, off)));
                            off += 1;
                        }
                    }
                    assert_eq!(off, lens_up[f.0]);
                }
                if cols.len() > 200_000 {
                    return None;
                }
                for w in cols.windows(2 * r + 1) {
                    out.entry(w.iter().map(|c| c.0).collect()).or_default().insert(w[r].1);
                }
            }
        }
        Some(out)
    }

    #[test]
    fn recoding_matches_brute_force() {
        let fixtures = [fixtures::example_two(), fixtures::fibonacci(), fixtures::recoding_collision()];
        for p in &fixtures {
            for r in 0..=4 {
                let rep = check_recoding(p, 1, r).unwrap();
                let Some(brute) = brute_windows(p, 1, r, rep.depth) else { continue };
                let ambiguous = brute.values().any(|labels| labels.len() > 1);
                assert_eq!(ambiguous, rep.verdict == RecodingVerdict::Ambiguous, "r={r}");
                if rep.verdict == RecodingVerdict::Determined {
                    assert_eq!(brute.len(), rep.windows, "r={r}");
                }
            }
        }
    }

    #[test]
    fn recoding_radius_for_example_two() {
        let p = fixtures::example_two();
        let verdicts: Vec<RecodingVerdict> = (0..=8).map(|r| check_recoding(&p, 1, r).unwrap().verdict).collect();
        let first = verdicts.iter().position(|&v| v == RecodingVerdict::Determined).unwrap();
        assert_eq!(first, 2);
        assert!(verdicts[first..].iter().all(|&v| v == RecodingVerdict::Determined));
    }

    proptest! {
        #[test]
        fn lengths_never_shrink(images in prop::collection::vec(prop::collection::vec(0usize..3, 1..4), 3)) {
            let s = Substitution::new(vec!["a".into(), "b".into(), "c".into()], images).unwrap();
            for a in 0..3 {
                let mut w = vec![a];
                for _ in 0..5 {
                    let next = s.apply(&w);
                    prop_assert!(next.len() >= w.len());
                    w = next;
                }
            }
        }

        #[test]
        fn growth_matches_lengths(images in prop::collection::vec(prop::collection::vec(0usize..3, 1..3), 3)) {
            let s = Substitution::new(vec!["a".into(), "b".into(), "c".into()], images).unwrap();
            let grows = growing_letters(&s);
            let mut lens = vec![vec![1u64; 3]];
            for n in 0..30 {
                let next = s.images().iter().map(|img| img.iter().map(|&b| lens[n][b]).sum()).collect();
                lens.push(next);
            }
            for a in 0..3 {
                prop_assert_eq!(grows.contains(&s.letters()[a]), lens[30][a] > lens[15][a]);
            }
        }
    }
}