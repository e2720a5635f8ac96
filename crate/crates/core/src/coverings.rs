//! Covering sequences of weighted graphs and the checks on their inverse limits.

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphs::{
    check_cover, compose_covers, expand_basic_cover, expand_to_basic, BasicExpansion, Cover,
    EdgeId, ExpandedCover, FlexibleGraph, VertexId, Walk, WeightedGraph,
};
use crate::orbits::growing_symbols;
use crate::verdict::Verdict;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    Truncated,
    RepeatLastAsStationary,
}

/// A flexible self-cover with level-1 multiplicities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StationaryCovering {
    cover: Cover,
    multiplicities: Vec<u64>,
}

/// Explicit levels `G_1 … G_N` and covers `φ_2 … φ_N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinitePrefix {
    levels: Vec<WeightedGraph>,
    covers: Vec<Cover>,
    tail: Tail,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoveringPresentation {
    FinitePrefix(FinitePrefix),
    Stationary(StationaryCovering),
}

fn require_weighted_cover(c: &Cover, what: &str) -> Result<()> {
    let f = check_cover(c);
    if !f.plus_directional || !f.edge_surjective {
        return Err(Error::CoverViolation(format!(
            "{what} is not +directional and edge-surjective"
        )));
    }
    Ok(())
}

fn require_valid_graph(g: &FlexibleGraph) -> Result<()> {
    match g.validate().into_iter().next() {
        Some(v) => Err(Error::Graph(v)),
        None => Ok(()),
    }
}

impl StationaryCovering {
    pub fn cover(&self) -> &Cover {
        &self.cover
    }

    pub fn graph(&self) -> &Arc<FlexibleGraph> {
        &self.cover.domain
    }

    pub fn multiplicities(&self) -> &[u64] {
        &self.multiplicities
    }
}

impl FinitePrefix {
    pub fn levels(&self) -> &[WeightedGraph] {
        &self.levels
    }

    pub fn covers(&self) -> &[Cover] {
        &self.covers
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }
}

/// Cut points for telescoping.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CutPoints {
    /// Keep exactly these levels.
    Explicit(Vec<usize>),
    /// Keep levels `1, 1+k, 1+2k, …` of a stationary presentation.
    Every(usize),
}

impl CoveringPresentation {
    pub fn stationary(cover: Cover, multiplicities: Vec<u64>) -> Result<Self> {
        if !cover.is_self_cover() {
            return Err(Error::CoverViolation("stationary presentations need a self-cover".into()));
        }
        require_valid_graph(&cover.domain)?;
        require_weighted_cover(&cover, "self-cover")?;
        if multiplicities.len() != cover.domain.edge_count() || multiplicities.contains(&0) {
            return Err(Error::Graph("multiplicities must be positive, one per edge".into()));
        }
        Ok(CoveringPresentation::Stationary(StationaryCovering { cover, multiplicities }))
    }

    pub fn finite_prefix(levels: Vec<WeightedGraph>, covers: Vec<Cover>, tail: Tail) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Graph("a finite prefix needs at least one level".into()));
        }
        if covers.len() + 1 != levels.len() {
            return Err(Error::Graph("need exactly one cover between consecutive levels".into()));
        }
        for g in &levels {
            require_valid_graph(&g.shape)?;
        }
        for (i, c) in covers.iter().enumerate() {
            c.check_lengths(&levels[i + 1], &levels[i])?;
            require_weighted_cover(c, &format!("cover into level {}", i + 1))?;
        }
        if tail == Tail::RepeatLastAsStationary {
            let n = levels.len();
            if n < 2 || levels[n - 1].shape != levels[n - 2].shape {
                return Err(Error::Graph(
                    "repeating the last cover needs its domain and codomain to coincide".into(),
                ));
            }
        }
        Ok(CoveringPresentation::FinitePrefix(FinitePrefix { levels, covers, tail }))
    }

    /// The stationary presentation of the singleton graph.
    pub fn singleton() -> Self {
        let g = Arc::new(FlexibleGraph::singleton());
        CoveringPresentation::Stationary(StationaryCovering {
            cover: Cover::identity(g),
            multiplicities: vec![1],
        })
    }

    /// Deepest available level, `None` when every level exists.
    pub fn max_level(&self) -> Option<usize> {
        match self {
            CoveringPresentation::FinitePrefix(f) if f.tail == Tail::Truncated => Some(f.levels.len()),
            _ => None,
        }
    }

    pub fn check_level(&self, n: usize) -> Result<()> {
        match self.max_level() {
            Some(m) if n > m => Err(Error::DepthOutOfRange { requested: n, available: m }),
            _ => Ok(()),
        }
    }

    pub fn shape(&self, n: usize) -> Result<Arc<FlexibleGraph>> {
        self.check_level(n)?;
        if n == 0 {
            return Ok(Arc::new(FlexibleGraph::singleton()));
        }
        Ok(match self {
            CoveringPresentation::Stationary(s) => s.cover.domain.clone(),
            CoveringPresentation::FinitePrefix(f) => {
                f.levels[(n - 1).min(f.levels.len() - 1)].shape.clone()
            }
        })
    }

    /// `len_n(e)` for every edge of level `n`.
    pub fn lengths(&self, n: usize) -> Result<Vec<u64>> {
        self.check_level(n)?;
        if n == 0 {
            return Ok(vec![1]);
        }
        let (mut lens, from, step): (Vec<u64>, usize, Option<&Cover>) = match self {
            CoveringPresentation::Stationary(s) => (s.multiplicities.clone(), 1, Some(&s.cover)),
            CoveringPresentation::FinitePrefix(f) => {
                let top = f.levels.len();
                if n <= top {
                    return Ok(f.levels[n - 1].len.clone());
                }
                (f.levels[top - 1].len.clone(), top, f.covers.last())
            }
        };
        let step = step.expect("levels beyond the prefix come from the repeated cover");
        for _ in from..n {
            lens = step
                .emap
                .iter()
                .map(|w| {
                    w.0.iter()
                        .try_fold(0u64, |acc, e| acc.checked_add(lens[e.0]))
                        .ok_or(Error::LengthOverflow)
                })
                .collect::<Result<Vec<_>>>()?;
        }
        Ok(lens)
    }

    pub fn level_graph(&self, n: usize) -> Result<WeightedGraph> {
        WeightedGraph::new(self.shape(n)?, self.lengths(n)?)
    }

    /// `φ_n : G_n → G_{n−1}` for `n ≥ 1`.
    pub fn cover(&self, n: usize) -> Result<Cow<'_, Cover>> {
        self.check_level(n)?;
        if n == 0 {
            return Err(Error::DepthOutOfRange { requested: 0, available: 0 });
        }
        if n == 1 {
            let g1 = self.shape(1)?;
            let lens = self.lengths(1)?;
            let g0 = Arc::new(FlexibleGraph::singleton());
            let emap = lens.iter().map(|&l| Walk(vec![EdgeId(0); l as usize])).collect();
            let vmap = vec![VertexId(0); g1.vertex_count()];
            return Ok(Cow::Owned(Cover { domain: g1, codomain: g0, vmap, emap }));
        }
        Ok(Cow::Borrowed(match self {
            CoveringPresentation::Stationary(s) => &s.cover,
            CoveringPresentation::FinitePrefix(f) => &f.covers[(n - 2).min(f.covers.len() - 1)],
        }))
    }

    /// `φ_{m,n} = φ_{n+1} ∘ … ∘ φ_m` for `m > n`.
    pub fn composed_cover(&self, m: usize, n: usize) -> Result<Cover> {
        if m <= n {
            return Err(Error::Precondition("composition needs m > n".into()));
        }
        let mut c = self.cover(m)?.into_owned();
        for j in (n + 1..m).rev() {
            c = compose_covers(self.cover(j)?.as_ref(), &c)?;
        }
        Ok(c)
    }

    /// `φ_{m,n}(e)` as a sequence of level-`n` edges.
    pub fn expand(&self, m: usize, n: usize, e: EdgeId) -> Result<Vec<EdgeId>> {
        let mut w = vec![e];
        for j in (n + 1..=m).rev() {
            w = self.cover(j)?.apply_walk(&w);
        }
        Ok(w)
    }

    /// First level from which the presentation repeats a single self-map.
    pub fn stationary_regime(&self) -> Option<(usize, &Cover)> {
        match self {
            CoveringPresentation::Stationary(s) => Some((1, &s.cover)),
            CoveringPresentation::FinitePrefix(f) if f.tail == Tail::RepeatLastAsStationary => {
                Some((f.levels.len() - 1, f.covers.last().expect("at least one cover")))
            }
            _ => None,
        }
    }

    pub fn basic_level(&self, n: usize) -> Result<BasicExpansion> {
        expand_to_basic(&self.level_graph(n)?)
    }

    /// The basic cover from level `n` to level `n − 1`.
    pub fn basic_cover(&self, n: usize) -> Result<ExpandedCover> {
        let c = self.cover(n)?;
        expand_basic_cover(&c, &self.level_graph(n)?, &self.level_graph(n - 1)?)
    }
}

pub fn level_graph(p: &CoveringPresentation, n: usize) -> Result<WeightedGraph> {
    p.level_graph(n)
}

pub fn telescope(p: &CoveringPresentation, cuts: &CutPoints) -> Result<CoveringPresentation> {
    match cuts {
        CutPoints::Every(k) => {
            let CoveringPresentation::Stationary(s) = p else {
                return Err(Error::Precondition(
                    "periodic cut points need a stationary presentation".into(),
                ));
            };
            if *k == 0 {
                return Err(Error::InvalidSequence("cut period must be positive".into()));
            }
            let mut c = s.cover.clone();
            for _ in 1..*k {
                c = compose_covers(&s.cover, &c)?;
            }
            CoveringPresentation::stationary(c, s.multiplicities.clone())
        }
        CutPoints::Explicit(points) => {
            if points.is_empty() || points[0] == 0 || points.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidSequence(
                    "cut points must be positive and strictly increasing".into(),
                ));
            }
            p.check_level(*points.last().unwrap())?;
            let levels = points
                .iter()
                .map(|&n| p.level_graph(n))
                .collect::<Result<Vec<_>>>()?;
            let covers = points
                .windows(2)
                .map(|w| p.composed_cover(w[1], w[0]))
                .collect::<Result<Vec<_>>>()?;
            CoveringPresentation::finite_prefix(levels, covers, Tail::Truncated)
        }
    }
}

/// A depth-`n` approximation of a point of the inverse limit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelPoint {
    /// Basic vertex names at levels `0..=n`.
    pub vertices: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PointSet {
    pub depth: usize,
    pub points: Vec<LevelPoint>,
    /// Pairs of point indices related by the edge relation at depth `n`.
    pub relation: Vec<(usize, usize)>,
}

/// Level-`n` basic vertex images at every level `0..=n`, indexed by level-`n` basic vertex.
fn vertex_towers(p: &CoveringPresentation, n: usize) -> Result<(Vec<BasicExpansion>, Vec<Vec<usize>>)> {
    let mut exps = vec![p.basic_level(0)?];
    let mut maps = Vec::new();
    for m in 1..=n {
        let ec = p.basic_cover(m)?;
        maps.push(ec.cover.vmap.clone());
        exps.push(ec.domain);
    }
    let count = exps[n].graph.vertex_count();
    let mut columns = Vec::with_capacity(count);
    for v in 0..count {
        let mut col = vec![v];
        let mut cur = v;
        for m in (1..=n).rev() {
            cur = maps[m - 1][cur];
            col.push(cur);
        }
        col.reverse();
        columns.push(col);
    }
    Ok((exps, columns))
}

pub fn enumerate_points(p: &CoveringPresentation, n: usize) -> Result<PointSet> {
    p.check_level(n)?;
    let (exps, cols) = vertex_towers(p, n)?;
    let points = cols
        .iter()
        .map(|col| LevelPoint {
            vertices: col
                .iter()
                .enumerate()
                .map(|(m, &v)| exps[m].graph.vertex_name(v).to_string())
                .collect(),
        })
        .collect();
    let relation = exps[n].graph.edges().iter().copied().collect();
    Ok(PointSet { depth: n, points, relation })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Certainty {
    /// Traced by a constant chain of circuits: a genuine periodic orbit.
    Certified,
    /// Not decided at this depth.
    Possible,
    /// Has no closed lift of the same length one level deeper.
    Refuted,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PeriodicCycle {
    pub period: usize,
    /// Basic vertex names at depth `n`, in cyclic order from the least.
    pub vertices: Vec<String>,
    pub certainty: Certainty,
}

/// Primitive closed walks of length `k`, each in its least rotation.
fn primitive_cycles(g: &crate::graphs::BasicGraph, k: usize) -> Vec<Vec<usize>> {
    fn dfs(g: &crate::graphs::BasicGraph, k: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let s = path[0];
        if path.len() == k {
            if g.has_edge(*path.last().unwrap(), s) {
                let least = (1..k).all(|r| {
                    let rot: Vec<usize> = path[r..].iter().chain(&path[..r]).copied().collect();
                    rot > *path
                });
                if least {
                    out.push(path.clone());
                }
            }
            return;
        }
        let last = *path.last().unwrap();
        let next: Vec<usize> = g.successors(last).filter(|&v| v >= s).collect();
        for v in next {
            path.push(v);
            dfs(g, k, path, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    for s in 0..g.vertex_count() {
        let mut path = vec![s];
        dfs(g, k, &mut path, &mut out);
    }
    out
}

/// Whether some closed walk of the same length one level up maps onto `cycle`.
fn cycle_lifts(up: &ExpandedCover, cycle: &[usize]) -> bool {
    let k = cycle.len();
    let g = &up.domain.graph;
    let map = &up.cover.vmap;
    fn walk(g: &crate::graphs::BasicGraph, map: &[usize], cycle: &[usize], start: usize, cur: usize, i: usize) -> bool {
        let k = cycle.len();
        if i == k {
            return cur == start;
        }
        let target = cycle[i % k];
        let next: Vec<usize> = g.successors(cur).filter(|&v| map[v] == target).collect();
        next.into_iter().any(|v| {
            if i + 1 == k {
                v == start
            } else {
                walk(g, map, cycle, start, v, i + 1)
            }
        })
    }
    (0..g.vertex_count())
        .filter(|&u| map[u] == cycle[0])
        .any(|u| if k == 1 { g.has_edge(u, u) } else { walk(g, map, cycle, u, u, 1) })
}

pub fn periodic_orbits(
    p: &CoveringPresentation,
    n: usize,
    max_period: usize,
) -> Result<Vec<PeriodicCycle>> {
    p.check_level(n)?;
    let exp = p.basic_level(n)?;
    let wg = p.level_graph(n)?;
    let status = circuit_chain_status(p, n)?;
    let up = match p.check_level(n + 1) {
        Ok(()) => Some(p.basic_cover(n + 1)?),
        Err(_) => None,
    };
    let mut out = Vec::new();
    for k in 1..=max_period {
        for cyc in primitive_cycles(&exp.graph, k) {
            let certified = wg.shape.edges().any(|e| {
                status[e.0] == Verdict::Holds && wg.len_of(e) as usize == k && {
                    let ch = &exp.chains[e.0];
                    let mut lap = ch[..k].to_vec();
                    let r = (0..k).min_by_key(|&i| lap[i]).unwrap_or(0);
                    lap.rotate_left(r);
                    lap == cyc
                }
            });
            let certainty = if certified {
                Certainty::Certified
            } else if up.as_ref().is_some_and(|u| !cycle_lifts(u, &cyc)) {
                Certainty::Refuted
            } else {
                Certainty::Possible
            };
            out.push(PeriodicCycle {
                period: k,
                vertices: cyc.iter().map(|&v| exp.graph.vertex_name(v).to_string()).collect(),
                certainty,
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainStatus {
    /// Continues forever (exact, from the stationary regime).
    Infinite,
    /// Observed up to the top of a truncated prefix only.
    WithinPrefix,
}

/// `e_n, e_{n+1}, …` with `φ(e_{m+1}) = e_m`, described as a transient part followed
/// by a cycle repeated forever (the cycle is empty for prefix-only chains).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConstantChain {
    pub start_level: usize,
    pub transient: Vec<String>,
    pub cycle: Vec<String>,
    pub status: ChainStatus,
    pub all_circuits: bool,
}

/// Single-edge preimages under a cover: `pre[e]` lists `e'` with `c(e') = e`.
fn single_edge_preimages(c: &Cover) -> Vec<Vec<EdgeId>> {
    let mut pre = vec![Vec::new(); c.codomain.edge_count()];
    for e in c.domain.edges() {
        let w = c.image(e);
        if w.len() == 1 {
            pre[w.first().0].push(e);
        }
    }
    pre
}

/// Greatest set `S ⊆ allowed` with every member having a preimage in `S`.
fn infinite_backward(pre: &[Vec<EdgeId>], allowed: &[bool]) -> Vec<bool> {
    let mut s = allowed.to_vec();
    loop {
        let next: Vec<bool> = (0..s.len())
            .map(|e| s[e] && pre[e].iter().any(|x| s[x.0]))
            .collect();
        if next == s {
            return s;
        }
        s = next;
    }
}

fn loops(g: &FlexibleGraph) -> Vec<bool> {
    g.edges().map(|e| g.src(e) == g.rng(e)).collect()
}

/// Per level `1..=top`, which edges head chains (restricted to `allowed_at(level)`),
/// plus the preimage tables between consecutive levels.
struct ChainTables {
    /// `heads[m-1][e]`: edge `e` of level `m` heads a chain.
    heads: Vec<Vec<bool>>,
    /// `pre[m-1]`: single-edge preimages of level-`m` edges in level `m+1`.
    pre: Vec<Vec<Vec<EdgeId>>>,
    top: usize,
    exact: bool,
}

fn chain_tables(p: &CoveringPresentation, circuits_only: bool) -> Result<ChainTables> {
    let (top, exact) = match p.stationary_regime() {
        Some((s0, _)) => (s0, true),
        None => (p.max_level().expect("truncated"), false),
    };
    let allowed = |m: usize| -> Result<Vec<bool>> {
        let g = p.shape(m)?;
        Ok(if circuits_only { loops(&g) } else { vec![true; g.edge_count()] })
    };
    let mut heads = vec![Vec::new(); top];
    let mut pre = vec![Vec::new(); top];
    let top_heads = match p.stationary_regime() {
        Some((_, c)) => {
            let tp = single_edge_preimages(c);
            let h = infinite_backward(&tp, &allowed(top)?);
            pre[top - 1] = tp;
            h
        }
        None => allowed(top)?,
    };
    heads[top - 1] = top_heads;
    for m in (1..top).rev() {
        let tp = single_edge_preimages(p.cover(m + 1)?.as_ref());
        let al = allowed(m)?;
        heads[m - 1] = (0..al.len())
            .map(|e| al[e] && tp[e].iter().any(|x| heads[m][x.0]))
            .collect();
        pre[m - 1] = tp;
    }
    Ok(ChainTables { heads, pre, top, exact })
}

/// Status of each level-`n` edge as the head of an infinite constant chain of circuits.
pub fn circuit_chain_status(p: &CoveringPresentation, n: usize) -> Result<Vec<Verdict>> {
    p.check_level(n)?;
    if n == 0 {
        let t = chain_tables(p, true)?;
        let ok = t.heads[0].iter().zip(p.lengths(1)?).any(|(&h, l)| h && l == 1);
        return Ok(vec![match (ok, t.exact) {
            (true, true) => Verdict::Holds,
            (true, false) => Verdict::Unknown,
            (false, _) => Verdict::Fails,
        }]);
    }
    let t = chain_tables(p, true)?;
    let level = n.min(t.top);
    Ok(t.heads[level - 1]
        .iter()
        .map(|&h| match (h, t.exact) {
            (true, true) => Verdict::Holds,
            (true, false) => Verdict::Unknown,
            (false, _) => Verdict::Fails,
        })
        .collect())
}

pub fn find_constant_chains(p: &CoveringPresentation) -> Result<Vec<ConstantChain>> {
    let t = chain_tables(p, false)?;
    let mut out = Vec::new();
    let levels = if t.exact { 1..=t.top } else { 1..=t.top.saturating_sub(1) };
    for m in levels {
        let g = p.shape(m)?;
        for e in g.edges().filter(|e| t.heads[m - 1][e.0]) {
            let mut level = m;
            let mut cur = e;
            let mut path: Vec<(usize, EdgeId)> = vec![(m, e)];
            let mut cycle_start = None;
            loop {
                let pre = &t.pre[level.min(t.top) - 1];
                let next_level_heads = if level < t.top { &t.heads[level] } else { &t.heads[t.top - 1] };
                if !t.exact && level == t.top {
                    break;
                }
                let next = pre[cur.0]
                    .iter()
                    .copied()
                    .find(|x| next_level_heads[x.0])
                    .expect("chain heads have a chain-head preimage");
                level += 1;
                cur = next;
                if level > t.top {
                    // Stationary levels: a repeated edge closes the cycle.
                    if let Some(pos) = path.iter().position(|&(l, x)| l >= t.top && x == cur) {
                        cycle_start = Some(pos);
                        break;
                    }
                    level = t.top;
                }
                path.push((level, cur));
            }
            let name = |&(l, x): &(usize, EdgeId)| -> Result<(String, bool)> {
                let gl = p.shape(l)?;
                Ok((gl.edge_name(x).to_string(), gl.src(x) == gl.rng(x)))
            };
            let named = path.iter().map(name).collect::<Result<Vec<_>>>()?;
            let all_circuits = named.iter().all(|(_, c)| *c);
            let split = cycle_start.unwrap_or(named.len());
            out.push(ConstantChain {
                start_level: m,
                transient: named[..split].iter().map(|(n, _)| n.clone()).collect(),
                cycle: named[split..].iter().map(|(n, _)| n.clone()).collect(),
                status: if t.exact { ChainStatus::Infinite } else { ChainStatus::WithinPrefix },
                all_circuits,
            });
        }
    }
    Ok(out)
}

impl ConstantChain {
    /// The edge at the start level.
    pub fn head(&self) -> &str {
        self.transient.first().or(self.cycle.first()).expect("chains are nonempty")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClosingReport {
    pub verdict: Verdict,
    pub witnesses: Vec<ConstantChain>,
}

pub fn check_closing(p: &CoveringPresentation) -> Result<ClosingReport> {
    let chains = find_constant_chains(p)?;
    let (bad, good): (Vec<_>, Vec<_>) = chains.into_iter().partition(|c| !c.all_circuits);
    if p.stationary_regime().is_some() {
        Ok(if bad.is_empty() {
            ClosingReport { verdict: Verdict::Holds, witnesses: good }
        } else {
            ClosingReport { verdict: Verdict::Fails, witnesses: bad }
        })
    } else {
        let mut witnesses = bad;
        witnesses.extend(good);
        Ok(ClosingReport { verdict: Verdict::Unknown, witnesses })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelRegulation {
    pub level: usize,
    pub bound: u64,
    pub verdict: Verdict,
    /// Short edges without a certified chain of circuits.
    pub witnesses: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AsymptoticRegulation {
    pub verdict: Verdict,
    pub bounded_edges: Vec<String>,
    pub witnesses: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RegulationReport {
    pub verdict: Verdict,
    pub levels: Vec<LevelRegulation>,
    pub asymptotic: Option<AsymptoticRegulation>,
}

pub fn validate_l_seq(l_seq: &[u64], n_max: usize) -> Result<()> {
    if l_seq.first() == Some(&0) || l_seq.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSequence(
            "the sequence must be positive and strictly increasing".into(),
        ));
    }
    if l_seq.len() < n_max {
        return Err(Error::InvalidSequence(format!(
            "the sequence has {} terms, {} levels requested",
            l_seq.len(),
            n_max
        )));
    }
    Ok(())
}

/// `l_seq[n-1]` bounds level `n`.
pub fn check_regulated(p: &CoveringPresentation, l_seq: &[u64], n_max: usize) -> Result<RegulationReport> {
    validate_l_seq(l_seq, n_max)?;
    p.check_level(n_max)?;
    let mut levels = Vec::new();
    for n in 1..=n_max {
        let g = p.shape(n)?;
        let lens = p.lengths(n)?;
        let status = circuit_chain_status(p, n)?;
        let bound = l_seq[n - 1];
        let mut verdict = Verdict::Holds;
        let mut witnesses = Vec::new();
        for e in g.edges().filter(|e| lens[e.0] <= bound) {
            if status[e.0] != Verdict::Holds {
                verdict = verdict.and(status[e.0]);
                witnesses.push(g.edge_name(e).to_string());
            }
        }
        levels.push(LevelRegulation { level: n, bound, verdict, witnesses });
    }
    let asymptotic = match p.stationary_regime() {
        Some((s0, c)) => {
            let images: Vec<Vec<usize>> = c.emap.iter().map(|w| w.0.iter().map(|e| e.0).collect()).collect();
            let growing = growing_symbols(&images);
            let status = circuit_chain_status(p, s0)?;
            let g = &c.domain;
            let bounded: Vec<EdgeId> = g.edges().filter(|e| !growing[e.0]).collect();
            let witnesses: Vec<String> = bounded
                .iter()
                .filter(|e| status[e.0] != Verdict::Holds)
                .map(|&e| g.edge_name(e).to_string())
                .collect();
            Some(AsymptoticRegulation {
                verdict: if witnesses.is_empty() { Verdict::Holds } else { Verdict::Fails },
                bounded_edges: bounded.iter().map(|&e| g.edge_name(e).to_string()).collect(),
                witnesses,
            })
        }
        None => None,
    };
    let verdict = levels.iter().fold(Verdict::Holds, |v, l| v.and(l.verdict));
    Ok(RegulationReport { verdict, levels, asymptotic })
}

/// A clopen piece used to describe tower bases.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "piece", rename_all = "snake_case")]
pub enum BasePiece {
    /// Points at the source of `edge` whose next point enters the edge's first interior floor.
    EdgeStart { level: usize, edge: String },
    /// Points whose basic vertex at `level` is `vertex`.
    VertexCylinder { level: usize, vertex: String },
    /// Points on interior floor `offset` of `edge` at `level`.
    Floor { level: usize, edge: String, offset: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Tower {
    pub edge: String,
    pub height: u64,
    pub base: Vec<BasePiece>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TowerDecomposition {
    pub level: usize,
    pub towers: Vec<Tower>,
}

pub fn tower_decomposition(p: &CoveringPresentation, n: usize) -> Result<TowerDecomposition> {
    p.check_level(n + 1)?;
    let g = p.shape(n)?;
    let lens = p.lengths(n)?;
    let up = p.shape(n + 1)?;
    let up_lens = p.lengths(n + 1)?;
    let cover = p.cover(n + 1)?;
    let mut towers = Vec::new();
    for e in g.edges() {
        let name = g.edge_name(e).to_string();
        let base = if lens[e.0] >= 2 {
            vec![BasePiece::EdgeStart { level: n, edge: name.clone() }]
        } else {
            let mut pieces = BTreeSet::new();
            for e2 in up.edges() {
                let w = cover.image(e2);
                if up_lens[e2.0] == 1 {
                    if w.0 == [e] {
                        pieces.insert(BasePiece::VertexCylinder {
                            level: n + 1,
                            vertex: up.vertex_name(up.src(e2)).to_string(),
                        });
                    }
                    continue;
                }
                let mut offset = 0;
                for &x in &w.0 {
                    if x == e {
                        pieces.insert(if offset == 0 {
                            BasePiece::EdgeStart { level: n + 1, edge: up.edge_name(e2).to_string() }
                        } else {
                            BasePiece::Floor { level: n + 1, edge: up.edge_name(e2).to_string(), offset }
                        });
                    }
                    offset += lens[x.0];
                }
            }
            pieces.into_iter().collect()
        };
        towers.push(Tower { edge: name, height: lens[e.0], base });
    }
    Ok(TowerDecomposition { level: n, towers })
}

/// Basic edges `(x, f(x))` of one floor.
pub type FloorAtoms = BTreeSet<(usize, usize)>;

impl TowerDecomposition {
    /// Refines every floor to the level-`(n+1)` atoms, the basic edges `(x, f(x))`
    /// of that level: `result[tower][floor]` is the set of atoms in the floor.
    pub fn floor_atoms(&self, p: &CoveringPresentation) -> Result<Vec<Vec<FloorAtoms>>> {
        let n = self.level;
        let ec = p.basic_cover(n + 1)?;
        let up = &ec.domain;
        let down = &ec.codomain;
        let map = &ec.cover.vmap;
        let g = p.shape(n)?;
        let gu = p.shape(n + 1)?;
        let atoms: Vec<(usize, usize)> = up.graph.edges().iter().copied().collect();
        let piece_atoms = |piece: &BasePiece| -> BTreeSet<(usize, usize)> {
            match piece {
                BasePiece::EdgeStart { level, edge } => {
                    if *level == n {
                        let ch = &down.chains[g.edge_id(edge).unwrap().0];
                        atoms
                            .iter()
                            .copied()
                            .filter(|&(a, b)| map[a] == ch[0] && map[b] == ch[1])
                            .collect()
                    } else {
                        let ch = &up.chains[gu.edge_id(edge).unwrap().0];
                        [(ch[0], ch[1])].into_iter().collect()
                    }
                }
                BasePiece::VertexCylinder { vertex, .. } => {
                    let v = up.graph.vertex_id(vertex).unwrap();
                    atoms.iter().copied().filter(|&(a, _)| a == v).collect()
                }
                BasePiece::Floor { edge, offset, .. } => {
                    let v = up.chains[gu.edge_id(edge).unwrap().0][*offset as usize];
                    atoms.iter().copied().filter(|&(a, _)| a == v).collect()
                }
            }
        };
        let mut out = Vec::new();
        for t in &self.towers {
            let e = g.edge_id(&t.edge).unwrap();
            let mut floors = Vec::new();
            let base: BTreeSet<_> = t.base.iter().flat_map(&piece_atoms).collect();
            floors.push(base);
            for i in 1..t.height {
                let v = down.chains[e.0][i as usize];
                floors.push(atoms.iter().copied().filter(|&(a, _)| map[a] == v).collect());
            }
            out.push(floors);
        }
        Ok(out)
    }
}

/// Cylinder set given by basic vertices at one depth.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CylinderSet {
    pub level: usize,
    pub vertices: BTreeSet<String>,
}

pub fn v_infinity_approx(p: &CoveringPresentation, n: usize) -> Result<CylinderSet> {
    let exp = p.basic_level(n)?;
    let vertices = exp
        .embedding
        .iter()
        .map(|&v| exp.graph.vertex_name(v).to_string())
        .collect();
    Ok(CylinderSet { level: n, vertices })
}

impl CylinderSet {
    /// Inclusion of cylinder sets, comparing at the deeper of the two depths.
    pub fn is_subset_of(&self, other: &CylinderSet, p: &CoveringPresentation) -> Result<bool> {
        if self.level < other.level {
            return Ok(self.vertices.is_empty());
        }
        let (exps, cols) = vertex_towers(p, self.level)?;
        let top = &exps[self.level].graph;
        Ok(self.vertices.iter().all(|name| {
            let v = top.vertex_id(name).expect("cylinder vertex");
            let w = cols[v][other.level];
            other.vertices.contains(exps[other.level].graph.vertex_name(w))
        }))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomKind {
    /// A floor `f^{L'i}(B(e))` of a long tower.
    Grid,
    /// Part of the residual floor of a long tower, kept because no grid floor follows within `L` steps.
    Residual,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct MarkerAtom {
    pub level: usize,
    pub edge: String,
    pub floor: u64,
    pub kind: AtomKind,
    /// The level-`n` tower containing the atom.
    pub tower: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShortTowerCylinder {
    pub edge: String,
    pub floor: u64,
    pub tower: String,
    pub tower_certified: bool,
}

/// Brute-force verification over the floors of the towers at the horizon level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MarkerCheck {
    pub level: usize,
    pub cylinders: usize,
    /// Cylinders where `x ∈ F` and `f^d(x) ∈ F` for some `1 ≤ d ≤ L`.
    pub disjointness_violations: Vec<String>,
    /// Cylinders of long towers not within `L` steps of `F`.
    pub coverage_violations: Vec<String>,
    /// Cylinders not shown to be within `L` steps of `F`; all lie in short towers.
    pub short_tower_cylinders: Vec<ShortTowerCylinder>,
}

impl MarkerCheck {
    /// Fails on any violation; unknown while a short tower lacks a certified orbit.
    pub fn verdict(&self) -> Verdict {
        if !self.disjointness_violations.is_empty() || !self.coverage_violations.is_empty() {
            Verdict::Fails
        } else if self.short_tower_cylinders.iter().any(|c| !c.tower_certified) {
            Verdict::Unknown
        } else {
            Verdict::Holds
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MarkerSet {
    pub level: usize,
    pub l: u64,
    pub horizon: usize,
    /// Level at which every residual condition was decided.
    pub determined_at: usize,
    pub long_edges: Vec<String>,
    pub short_edges: Vec<String>,
    pub k: BTreeMap<String, u64>,
    pub atoms: Vec<MarkerAtom>,
    pub check: MarkerCheck,
}

/// Membership rules of the marker construction at level `n`.
struct MarkerRules {
    lp: u64,
    lens: Vec<u64>,
    k: Vec<Option<u64>>,
    residual: Vec<Option<u64>>,
}

impl MarkerRules {
    fn new(lens: Vec<u64>, l: u64) -> Result<Self> {
        let lp = l + 1;
        let mut k = Vec::new();
        let mut residual = Vec::new();
        for &len in &lens {
            if len >= lp {
                let kv = (len - lp) / lp;
                let lo = len as i128 - 2 * lp as i128;
                let ok = |c: u64| lo < (lp * c) as i128 && lp * c <= len - lp;
                debug_assert!(ok(kv));
                if (0..=len).filter(|&c| ok(c)).count() != 1 {
                    return Err(Error::Precondition("k(e) is not unique".into()));
                }
                k.push(Some(kv));
                residual.push(if lp * kv < len - lp { Some(lp * (kv + 1)) } else { None });
            } else {
                k.push(None);
                residual.push(None);
            }
        }
        Ok(MarkerRules { lp, lens, k, residual })
    }

    fn in_grid(&self, e: EdgeId, floor: u64) -> bool {
        matches!(self.k[e.0], Some(k) if floor.is_multiple_of(self.lp) && floor / self.lp <= k)
    }

    /// `F`-membership of the point at `pos` of a timeline; `None` if the timeline is too short.
    fn in_f(&self, tl: &Timeline, pos: i64) -> Option<bool> {
        let (e, floor) = tl.at(pos)?;
        if self.in_grid(e, floor) {
            return Some(true);
        }
        if self.residual[e.0] != Some(floor) {
            return Some(false);
        }
        for i in 0..self.lp as i64 {
            let (x, fl) = tl.at(pos + i)?;
            if self.in_grid(x, fl) {
                return Some(false);
            }
        }
        Some(true)
    }
}

/// Level-`n` towers visited by a point, as `(edge, start offset)` relative to the point.
struct Timeline {
    cells: Vec<(EdgeId, i64)>,
    lens: Vec<u64>,
}

impl Timeline {
    fn at(&self, pos: i64) -> Option<(EdgeId, u64)> {
        let idx = self.cells.partition_point(|&(_, s)| s <= pos);
        if idx == 0 {
            return None;
        }
        let (e, s) = self.cells[idx - 1];
        let floor = (pos - s) as u64;
        (floor < self.lens[e.0]).then_some((e, floor))
    }
}

/// Horizon-level towers expanded to level `n`, with branching continuations.
struct HorizonView {
    shape: Arc<FlexibleGraph>,
    expansions: Vec<Vec<EdgeId>>,
    lens_n: Vec<u64>,
    lens_h: Vec<u64>,
}

impl HorizonView {
    fn new(p: &CoveringPresentation, n: usize, h: usize) -> Result<Self> {
        let shape = p.shape(h)?;
        let expansions = shape.edges().map(|e| p.expand(h, n, e)).collect::<Result<Vec<_>>>()?;
        Ok(HorizonView { shape, expansions, lens_n: p.lengths(n)?, lens_h: p.lengths(h)? })
    }

    fn seq_len(&self, seq: &[EdgeId]) -> u64 {
        seq.iter().map(|e| self.lens_n[e.0]).sum()
    }

    /// Level-`n` sequences following the end of `e`, truncated once `need` units are covered.
    fn forward(&self, e: EdgeId, need: u64) -> BTreeSet<Vec<EdgeId>> {
        let mut out = BTreeSet::new();
        self.grow(self.shape.rng(e), Vec::new(), need, true, &mut out);
        out
    }

    /// Level-`n` sequences preceding the start of `e`, nearest first.
    fn backward(&self, e: EdgeId, need: u64) -> BTreeSet<Vec<EdgeId>> {
        let mut out = BTreeSet::new();
        self.grow(self.shape.src(e), Vec::new(), need, false, &mut out);
        out
    }

    fn grow(&self, at: VertexId, acc: Vec<EdgeId>, need: u64, fwd: bool, out: &mut BTreeSet<Vec<EdgeId>>) {
        if self.seq_len(&acc) >= need {
            let mut t = Vec::new();
            let mut total = 0;
            for &x in &acc {
                if total >= need {
                    break;
                }
                t.push(x);
                total += self.lens_n[x.0];
            }
            out.insert(t);
            return;
        }
        let next = if fwd { self.shape.out_edges(at) } else { self.shape.in_edges(at) };
        for g in next {
            let mut a = acc.clone();
            if fwd {
                a.extend(&self.expansions[g.0]);
                self.grow(self.shape.rng(g), a, need, fwd, out);
            } else {
                a.extend(self.expansions[g.0].iter().rev());
                self.grow(self.shape.src(g), a, need, fwd, out);
            }
        }
    }

    /// Timelines around floor `j` of horizon edge `e`, covering offsets `[-back, fwd]`.
    fn timelines(&self, e: EdgeId, j: u64, back: u64, fwd: u64) -> Vec<Timeline> {
        let len = self.lens_h[e.0];
        let fneed = (j + fwd + 1).saturating_sub(len);
        let bneed = back.saturating_sub(j);
        let fwds = if fneed == 0 { [Vec::new()].into_iter().collect() } else { self.forward(e, fneed) };
        let bwds = if bneed == 0 { [Vec::new()].into_iter().collect() } else { self.backward(e, bneed) };
        let mut out = Vec::new();
        for b in &bwds {
            for f in &fwds {
                let mut cells = Vec::new();
                let mut start = -(j as i64) - self.seq_len(b) as i64;
                for &x in b.iter().rev().chain(&self.expansions[e.0]).chain(f) {
                    cells.push((x, start));
                    start += self.lens_n[x.0] as i64;
                }
                out.push(Timeline { cells, lens: self.lens_n.clone() });
            }
        }
        out
    }
}

pub fn krieger_markers(p: &CoveringPresentation, n: usize, l: u64, horizon: usize) -> Result<MarkerSet> {
    if l == 0 {
        return Err(Error::Precondition("L must be positive".into()));
    }
    if horizon < n + 1 {
        return Err(Error::Precondition("horizon must exceed the level".into()));
    }
    p.check_level(horizon)?;
    let g = p.shape(n)?;
    let rules = MarkerRules::new(p.lengths(n)?, l)?;
    let status = circuit_chain_status(p, n)?;
    let li = l as i64;

    // Level at which every residual condition is decided on all continuations.
    let mut determined = None;
    for h in n + 1..=horizon {
        let view = HorizonView::new(p, n, h)?;
        let mut atoms = Vec::new();
        let mut ok = true;
        'edges: for e in view.shape.edges() {
            for j in 0..view.lens_h[e.0] {
                let tls = view.timelines(e, j, 0, l);
                let answers: BTreeSet<Option<bool>> = tls.iter().map(|t| rules.in_f(t, 0)).collect();
                let (x, fl) = tls[0].at(0).expect("point inside its own tower");
                if rules.residual[x.0] != Some(fl) {
                    continue;
                }
                match answers.into_iter().collect::<Vec<_>>()[..] {
                    [Some(true)] => atoms.push(MarkerAtom {
                        level: h,
                        edge: view.shape.edge_name(e).to_string(),
                        floor: j,
                        kind: AtomKind::Residual,
                        tower: g.edge_name(x).to_string(),
                    }),
                    [Some(false)] => {}
                    _ => {
                        ok = false;
                        break 'edges;
                    }
                }
            }
        }
        if ok {
            determined = Some((h, atoms));
            break;
        }
    }
    let Some((determined_at, residual_atoms)) = determined else {
        return Err(Error::HorizonExceeded(horizon));
    };

    let mut atoms = Vec::new();
    let mut k = BTreeMap::new();
    for e in g.edges() {
        if let Some(kv) = rules.k[e.0] {
            k.insert(g.edge_name(e).to_string(), kv);
            for i in 0..=kv {
                atoms.push(MarkerAtom {
                    level: n,
                    edge: g.edge_name(e).to_string(),
                    floor: rules.lp * i,
                    kind: AtomKind::Grid,
                    tower: g.edge_name(e).to_string(),
                });
            }
        }
    }
    atoms.extend(residual_atoms);

    // Verification over all horizon cylinders.
    let view = HorizonView::new(p, n, horizon)?;
    let mut check = MarkerCheck {
        level: horizon,
        cylinders: 0,
        disjointness_violations: Vec::new(),
        coverage_violations: Vec::new(),
        short_tower_cylinders: Vec::new(),
    };
    for e in view.shape.edges() {
        for j in 0..view.lens_h[e.0] {
            check.cylinders += 1;
            let label = format!("{}@{}", view.shape.edge_name(e), j);
            let tls = view.timelines(e, j, l, 3 * l + 1);
            let mut disjoint = true;
            let mut covered = true;
            for t in &tls {
                let f_at = |pos: i64| rules.in_f(t, pos).expect("timeline long enough");
                if f_at(0) && (1..=li).any(&f_at) {
                    disjoint = false;
                }
                if !(-li..=li).any(f_at) {
                    covered = false;
                }
            }
            if !disjoint {
                check.disjointness_violations.push(label.clone());
            }
            if !covered {
                let (x, _) = tls[0].at(0).expect("point inside its own tower");
                if rules.k[x.0].is_some() {
                    check.coverage_violations.push(label);
                } else {
                    check.short_tower_cylinders.push(ShortTowerCylinder {
                        edge: view.shape.edge_name(e).to_string(),
                        floor: j,
                        tower: g.edge_name(x).to_string(),
                        tower_certified: status[x.0] == Verdict::Holds,
                    });
                }
            }
        }
    }
    let (long_edges, short_edges): (Vec<EdgeId>, Vec<EdgeId>) =
        g.edges().partition(|e| rules.lens[e.0] >= rules.lp);
    Ok(MarkerSet {
        level: n,
        l,
        horizon,
        determined_at,
        long_edges: long_edges.iter().map(|&e| g.edge_name(e).to_string()).collect(),
        short_edges: short_edges.iter().map(|&e| g.edge_name(e).to_string()).collect(),
        k,
        atoms,
        check,
    })
}
