//! Ordered Bratteli diagrams: lexicographic paths, the Vershik successor, clusters
//! and nesting, and the conversions to and from weighted coverings.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Serialize;

use crate::coverings::{self, CoveringPresentation, RegulationReport, Tail};
use crate::error::{Error, Result};
use crate::graphs::{Cover, FlexibleGraph, Walk, WeightedGraph};
use crate::stationary::{check_continuity, mono_power, straighten_mono, MonoGraph};
use crate::verdict::Verdict;

/// Name of the single vertex at level 0.
pub const ROOT: &str = "v0";

/// Paths enumerated into one vertex before refusing.
pub const PATH_LIMIT: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BvEdge {
    pub id: String,
    /// Vertex index at the previous level.
    pub src: usize,
    pub rng: usize,
}

/// Vertices of one level and the ranked edges arriving from the level below.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BvLevel {
    vertices: Vec<String>,
    edges: Vec<BvEdge>,
    incoming: Vec<Vec<usize>>,
    outgoing: Vec<Vec<usize>>,
}

impl BvLevel {
    /// `edges` are `(id, src index, rng index, rank)`; `sources` is the size of the level below.
    pub fn new(sources: usize, vertices: Vec<String>, edges: Vec<(String, usize, usize, usize)>) -> Result<Self> {
        let mut names = vertices.clone();
        names.sort();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Graph(format!("duplicate vertex id {}", w[0])));
        }
        let mut ids: Vec<&str> = edges.iter().map(|e| e.0.as_str()).collect();
        ids.sort();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Graph(format!("duplicate edge id {}", w[0])));
        }
        let mut ranked: Vec<Vec<(usize, usize)>> = vec![Vec::new(); vertices.len()];
        let mut outgoing = vec![Vec::new(); sources];
        for (i, (id, s, r, rank)) in edges.iter().enumerate() {
            if *s >= sources || *r >= vertices.len() {
                return Err(Error::Graph(format!("edge {id} has an unknown endpoint")));
            }
            ranked[*r].push((*rank, i));
            outgoing[*s].push(i);
        }
        for (v, list) in ranked.iter_mut().enumerate() {
            if list.is_empty() {
                return Err(Error::Graph(format!("no incoming edge at {}", vertices[v])));
            }
            list.sort();
            if list.iter().enumerate().any(|(i, &(rank, _))| rank != i + 1) {
                return Err(Error::Graph(format!("rank gap at vertex {}", vertices[v])));
            }
        }
        let incoming = ranked.into_iter().map(|l| l.into_iter().map(|(_, e)| e).collect()).collect();
        let edges = edges.into_iter().map(|(id, src, rng, _)| BvEdge { id, src, rng }).collect();
        Ok(BvLevel { vertices, edges, incoming, outgoing })
    }

    /// Like [`BvLevel::new`] with endpoints given by name.
    pub fn from_names(
        below: &[String],
        vertices: Vec<String>,
        edges: Vec<(String, String, String, usize)>,
    ) -> Result<Self> {
        let find = |list: &[String], n: &str| {
            list.iter()
                .position(|x| x == n)
                .ok_or_else(|| Error::Graph(format!("unknown vertex {n}")))
        };
        let mut raw = Vec::new();
        for (id, s, r, rank) in edges {
            let si = find(below, &s)?;
            let ri = find(&vertices, &r)?;
            raw.push((id, si, ri, rank));
        }
        BvLevel::new(below.len(), vertices, raw)
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn vertex_id(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|x| x == name)
    }

    pub fn edges(&self) -> &[BvEdge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &BvEdge {
        &self.edges[e]
    }

    pub fn edge_id(&self, name: &str) -> Option<usize> {
        self.edges.iter().position(|x| x.id == name)
    }

    pub fn incoming(&self, v: usize) -> &[usize] {
        &self.incoming[v]
    }

    /// Edges leaving vertex `u` of the level below.
    pub fn outgoing(&self, u: usize) -> &[usize] {
        &self.outgoing[u]
    }

    pub fn source_count(&self) -> usize {
        self.outgoing.len()
    }

    pub fn rank(&self, e: usize) -> usize {
        self.incoming[self.edges[e].rng].iter().position(|&x| x == e).unwrap() + 1
    }

    pub fn is_max(&self, e: usize) -> bool {
        *self.incoming[self.edges[e].rng].last().unwrap() == e
    }

    pub fn is_min(&self, e: usize) -> bool {
        self.incoming[self.edges[e].rng][0] == e
    }

    pub fn serial(&self, e: usize) -> Option<usize> {
        let list = &self.incoming[self.edges[e].rng];
        let i = list.iter().position(|&x| x == e).unwrap();
        list.get(i + 1).copied()
    }

    pub fn min_in(&self, v: usize) -> usize {
        self.incoming[v][0]
    }

    pub fn max_in(&self, v: usize) -> usize {
        *self.incoming[v].last().unwrap()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BvKind {
    Stationary { mono: MonoGraph, multiplicities: Vec<u64> },
    FinitePrefix { tail: Tail },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderedBratteliDiagram {
    kind: BvKind,
    /// Stationary: level 1 and the repeated level. Finite: levels `1..=N`.
    levels: Vec<Arc<BvLevel>>,
}

fn mono_level(mono: &MonoGraph) -> Result<BvLevel> {
    let edges = mono
        .edges()
        .iter()
        .enumerate()
        .map(|(i, e)| (e.id.clone(), e.src, e.rng, mono.rank(i)))
        .collect();
    BvLevel::new(mono.vertex_count(), mono.vertex_names().to_vec(), edges)
}

fn first_level(vertices: &[String], counts: &[u64]) -> Result<BvLevel> {
    let mut edges = Vec::new();
    for (v, &c) in counts.iter().enumerate() {
        for i in 1..=c as usize {
            edges.push((format!("{}.{}", vertices[v], i), 0, v, i));
        }
    }
    BvLevel::new(1, vertices.to_vec(), edges)
}

impl OrderedBratteliDiagram {
    /// The stationary diagram generated by a mono-graph with level-1 multiplicities.
    pub fn stationary(mono: MonoGraph, multiplicities: Vec<u64>) -> Result<Self> {
        if multiplicities.len() != mono.vertex_count() || multiplicities.contains(&0) {
            return Err(Error::Graph("multiplicities must be positive, one per vertex".into()));
        }
        if !mono.is_surjective() {
            return Err(Error::Graph("stationary diagrams need a surjective mono-graph".into()));
        }
        let l1 = first_level(mono.vertex_names(), &multiplicities)?;
        let up = mono_level(&mono)?;
        Ok(OrderedBratteliDiagram {
            kind: BvKind::Stationary { mono, multiplicities },
            levels: vec![Arc::new(l1), Arc::new(up)],
        })
    }

    pub fn finite_prefix(levels: Vec<BvLevel>, tail: Tail) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Graph("a finite prefix needs at least one level".into()));
        }
        if levels[0].source_count() != 1 {
            return Err(Error::Graph("level 1 edges must start at the root".into()));
        }
        for i in 1..levels.len() {
            if levels[i].source_count() != levels[i - 1].vertices.len() {
                return Err(Error::Graph(format!("level {} sources do not match level {}", i + 1, i)));
            }
            for (u, out) in levels[i].outgoing.iter().enumerate() {
                if out.is_empty() {
                    return Err(Error::Graph(format!("no outgoing edge at {}", levels[i - 1].vertices[u])));
                }
            }
        }
        if tail == Tail::RepeatLastAsStationary {
            let n = levels.len();
            if n < 2 || levels[n - 1].vertices != levels[n - 2].vertices {
                return Err(Error::Graph("repeating the last level needs equal vertex sets".into()));
            }
        }
        Ok(OrderedBratteliDiagram { kind: BvKind::FinitePrefix { tail }, levels: levels.into_iter().map(Arc::new).collect() })
    }

    pub fn kind(&self) -> &BvKind {
        &self.kind
    }

    pub fn mono(&self) -> Option<&MonoGraph> {
        match &self.kind {
            BvKind::Stationary { mono, .. } => Some(mono),
            _ => None,
        }
    }

    /// The explicit levels of a finite prefix.
    pub fn prefix_levels(&self) -> Option<&[Arc<BvLevel>]> {
        match self.kind {
            BvKind::FinitePrefix { .. } => Some(&self.levels),
            BvKind::Stationary { .. } => None,
        }
    }

    pub fn max_level(&self) -> Option<usize> {
        match self.kind {
            BvKind::FinitePrefix { tail: Tail::Truncated } => Some(self.levels.len()),
            _ => None,
        }
    }

    pub fn check_level(&self, n: usize) -> Result<()> {
        match self.max_level() {
            Some(m) if n > m => Err(Error::DepthOutOfRange { requested: n, available: m }),
            _ => Ok(()),
        }
    }

    /// Edges and vertices of level `n ≥ 1`.
    pub fn level(&self, n: usize) -> Result<&BvLevel> {
        if n == 0 {
            return Err(Error::Precondition("level 0 has no edges".into()));
        }
        self.check_level(n)?;
        Ok(match self.kind {
            BvKind::Stationary { .. } => &self.levels[(n - 1).min(1)],
            BvKind::FinitePrefix { .. } => &self.levels[(n - 1).min(self.levels.len() - 1)],
        })
    }

    pub fn vertices(&self, n: usize) -> Result<Vec<String>> {
        if n == 0 {
            return Ok(vec![ROOT.to_string()]);
        }
        Ok(self.level(n)?.vertices.clone())
    }

    pub fn vertex_count(&self, n: usize) -> Result<usize> {
        if n == 0 {
            return Ok(1);
        }
        Ok(self.level(n)?.vertices.len())
    }

    /// Heights `l(v) = |P(v)|` at level `n`.
    pub fn heights(&self, n: usize) -> Result<Vec<u64>> {
        let mut h = vec![1u64];
        for m in 1..=n {
            let lvl = self.level(m)?;
            h = (0..lvl.vertices.len())
                .map(|v| {
                    lvl.incoming(v)
                        .iter()
                        .try_fold(0u64, |acc, &e| acc.checked_add(h[lvl.edge(e).src]))
                        .ok_or(Error::LengthOverflow)
                })
                .collect::<Result<Vec<_>>>()?;
        }
        Ok(h)
    }
}

/// A finite path from the root; `edges[i]` is an edge index at level `i + 1`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PathPrefix {
    pub edges: Vec<usize>,
}

impl PathPrefix {
    pub fn depth(&self) -> usize {
        self.edges.len()
    }

    /// Vertex index of the range at the top level.
    pub fn range(&self, d: &OrderedBratteliDiagram) -> Result<usize> {
        match self.edges.last() {
            None => Ok(0),
            Some(&e) => Ok(d.level(self.edges.len())?.edge(e).rng),
        }
    }

    pub fn names(&self, d: &OrderedBratteliDiagram) -> Result<Vec<String>> {
        self.edges
            .iter()
            .enumerate()
            .map(|(i, &e)| Ok(d.level(i + 1)?.edge(e).id.clone()))
            .collect()
    }

    pub fn from_names(d: &OrderedBratteliDiagram, names: &[&str]) -> Result<Self> {
        let mut edges = Vec::new();
        let mut at = 0;
        for (i, name) in names.iter().enumerate() {
            let lvl = d.level(i + 1)?;
            let e = lvl
                .edge_id(name)
                .ok_or_else(|| Error::Graph(format!("unknown edge {name} at level {}", i + 1)))?;
            if lvl.edge(e).src != at {
                return Err(Error::Graph(format!("edge {name} does not continue the path")));
            }
            at = lvl.edge(e).rng;
            edges.push(e);
        }
        Ok(PathPrefix { edges })
    }
}

/// Paths from level `from` up to vertex `v` at level `to`, in lexicographic order
/// with the top edge most significant; each entry lists edges bottom first.
fn segment_paths(d: &OrderedBratteliDiagram, from: usize, to: usize, v: usize) -> Result<Vec<Vec<usize>>> {
    if from == to {
        return Ok(vec![Vec::new()]);
    }
    let lvl = d.level(to)?;
    let mut out = Vec::new();
    for &e in lvl.incoming(v) {
        for mut p in segment_paths(d, from, to - 1, lvl.edge(e).src)? {
            p.push(e);
            out.push(p);
        }
    }
    Ok(out)
}

pub fn enumerate_paths(d: &OrderedBratteliDiagram, n: usize, v: usize) -> Result<Vec<PathPrefix>> {
    let h = d.heights(n)?;
    if h[v] > PATH_LIMIT {
        return Err(Error::Precondition(format!("{} paths exceed the enumeration limit", h[v])));
    }
    Ok(segment_paths(d, 0, n, v)?.into_iter().map(|edges| PathPrefix { edges }).collect())
}

/// Minimal path into `v` at level `n`.
pub fn min_path(d: &OrderedBratteliDiagram, n: usize, v: usize) -> Result<PathPrefix> {
    extreme_path(d, n, v, true)
}

pub fn max_path(d: &OrderedBratteliDiagram, n: usize, v: usize) -> Result<PathPrefix> {
    extreme_path(d, n, v, false)
}

fn extreme_path(d: &OrderedBratteliDiagram, n: usize, v: usize, min: bool) -> Result<PathPrefix> {
    let mut edges = vec![0; n];
    let mut cur = v;
    for m in (1..=n).rev() {
        let lvl = d.level(m)?;
        let e = if min { lvl.min_in(cur) } else { lvl.max_in(cur) };
        edges[m - 1] = e;
        cur = lvl.edge(e).src;
    }
    Ok(PathPrefix { edges })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Successor {
    Next(PathPrefix),
    Maximal,
}

/// Least strictly greater prefix with the same range.
pub fn vershik_successor(d: &OrderedBratteliDiagram, p: &PathPrefix) -> Result<Successor> {
    for k in 0..p.depth() {
        let lvl = d.level(k + 1)?;
        if let Some(next) = lvl.serial(p.edges[k]) {
            let below = min_path(d, k, lvl.edge(next).src)?;
            let mut edges = below.edges;
            edges.push(next);
            edges.extend_from_slice(&p.edges[k + 1..]);
            return Ok(Successor::Next(PathPrefix { edges }));
        }
    }
    Ok(Successor::Maximal)
}

/// A cycle of the extreme-source map: infinite extreme paths cycling through it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtremeClass {
    pub vertices: Vec<String>,
    pub period: usize,
    pub straight: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtremePaths {
    pub depth: usize,
    /// `(vertex, minimal path into it)` for every vertex at the depth.
    pub minimal: Vec<(String, Vec<String>)>,
    pub maximal: Vec<(String, Vec<String>)>,
    /// Stationary diagrams only.
    pub infinite_min: Option<Vec<ExtremeClass>>,
    pub infinite_max: Option<Vec<ExtremeClass>>,
}

fn map_cycles(f: &[usize], names: &[String]) -> Vec<ExtremeClass> {
    let mut seen = vec![false; f.len()];
    let mut out = Vec::new();
    for start in 0..f.len() {
        // A point is periodic iff it returns within |f| steps.
        let mut cur = f[start];
        let mut periodic = cur == start;
        for _ in 0..f.len() {
            if cur == start {
                periodic = true;
                break;
            }
            cur = f[cur];
        }
        if !periodic || seen[start] {
            continue;
        }
        let mut cycle = vec![start];
        seen[start] = true;
        let mut x = f[start];
        while x != start {
            seen[x] = true;
            cycle.push(x);
            x = f[x];
        }
        out.push(ExtremeClass {
            period: cycle.len(),
            straight: cycle.len() == 1,
            vertices: cycle.iter().map(|&v| names[v].clone()).collect(),
        });
    }
    out
}

pub fn min_max_paths(d: &OrderedBratteliDiagram, n: usize) -> Result<ExtremePaths> {
    let names = d.vertices(n)?;
    let mut minimal = Vec::new();
    let mut maximal = Vec::new();
    for (v, name) in names.iter().enumerate() {
        minimal.push((name.clone(), min_path(d, n, v)?.names(d)?));
        maximal.push((name.clone(), max_path(d, n, v)?.names(d)?));
    }
    let (infinite_min, infinite_max) = match d.mono() {
        Some(m) => (
            Some(map_cycles(&m.min_source_map(), m.vertex_names())),
            Some(map_cycles(&m.max_source_map(), m.vertex_names())),
        ),
        None => (None, None),
    };
    Ok(ExtremePaths { depth: n, minimal, maximal, infinite_min, infinite_max })
}

pub fn telescope_bv(d: &OrderedBratteliDiagram, cuts: &coverings::CutPoints) -> Result<OrderedBratteliDiagram> {
    match cuts {
        coverings::CutPoints::Every(k) => {
            let BvKind::Stationary { mono, multiplicities } = &d.kind else {
                return Err(Error::Precondition("periodic cut points need a stationary diagram".into()));
            };
            if *k == 0 {
                return Err(Error::InvalidSequence("cut period must be positive".into()));
            }
            OrderedBratteliDiagram::stationary(mono_power(mono, *k)?, multiplicities.clone())
        }
        coverings::CutPoints::Explicit(points) => {
            if points.is_empty() || points[0] == 0 || points.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidSequence("cut points must be positive and strictly increasing".into()));
            }
            d.check_level(*points.last().unwrap())?;
            let mut levels = Vec::new();
            let mut below = 0;
            for &top in points {
                let vertices = d.vertices(top)?;
                let mut edges = Vec::new();
                for v in 0..vertices.len() {
                    for (i, p) in segment_paths(d, below, top, v)?.into_iter().enumerate() {
                        let id = p
                            .iter()
                            .enumerate()
                            .map(|(j, &e)| Ok(d.level(below + j + 1)?.edge(e).id.clone()))
                            .collect::<Result<Vec<_>>>()?
                            .join(".");
                        let src = if below == 0 { 0 } else { d.level(below + 1)?.edge(p[0]).src };
                        edges.push((id, src, v, i + 1));
                    }
                }
                levels.push(BvLevel::new(d.vertex_count(below)?, vertices, edges)?);
                below = top;
            }
            OrderedBratteliDiagram::finite_prefix(levels, Tail::Truncated)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Certainty {
    Exact,
    DepthLimited,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClusterPartition {
    pub level: usize,
    pub clusters: Vec<Vec<String>>,
    pub certainty: Certainty,
}

/// How a base is reached from the top floor of a tower.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Reach {
    /// Upward edges from level `n + 1` ending in a non-maximal edge.
    Successor(Vec<usize>),
    /// Through the image of a maximal infinite path.
    MaxPath,
}

/// How the Vershik map at maximal paths is resolved.
enum Resolution {
    /// Straight stationary with continuity: `ψ` on maximal-loop vertices.
    Exact(Vec<Option<usize>>),
    Explore(usize),
}

fn resolution(d: &OrderedBratteliDiagram, depth: usize) -> Result<Resolution> {
    let Some(mono) = d.mono() else {
        return Ok(Resolution::Explore(depth));
    };
    let straight = mono.is_straight();
    let power = if straight { mono.clone() } else { straighten_mono(mono)?.1 };
    let cont = check_continuity(&power)?;
    if cont.verdict == Verdict::Fails {
        let detail = match &cont.conflict {
            Some((a, b)) => format!("ψ({}) must be both {} and {}", a.from, a.to, b.to),
            None => format!("no surjective ψ reaches {}", cont.uncovered.join(", ")),
        };
        return Err(Error::UndefinedVershik(detail));
    }
    if !straight {
        return Ok(Resolution::Explore(depth));
    }
    let mut psi = vec![None; mono.vertex_count()];
    for (a, b) in &cont.psi {
        psi[mono.vertex_id(a).unwrap()] = Some(mono.vertex_id(b).unwrap());
    }
    Ok(Resolution::Exact(psi))
}

/// Level-`n` vertex of the minimal path into `z` at level `m`.
fn descend_min(d: &OrderedBratteliDiagram, z: usize, m: usize, n: usize) -> Result<usize> {
    let mut cur = z;
    for lvl in (n + 1..=m).rev() {
        let l = d.level(lvl)?;
        cur = l.edge(l.min_in(cur)).src;
    }
    Ok(cur)
}

struct TargetSets {
    /// For each vertex `v` at level `n`: bases meeting `ψ^{l(v)}(B(v))`.
    targets: Vec<BTreeMap<usize, Reach>>,
    limited: bool,
}

fn target_sets(d: &OrderedBratteliDiagram, n: usize, res: &Resolution) -> Result<TargetSets> {
    let count = d.vertex_count(n)?;
    let depth = match res {
        Resolution::Exact(_) => 2,
        Resolution::Explore(k) => *k,
    };
    let mut limited = false;
    let mut targets = Vec::with_capacity(count);
    for v in 0..count {
        let mut found: BTreeMap<usize, Reach> = BTreeMap::new();
        let mut visited = BTreeSet::new();
        let mut frontier = vec![(n, v, Vec::<usize>::new())];
        while let Some((m, y, path)) = frontier.pop() {
            let lvl = match d.level(m + 1) {
                Ok(l) => l,
                Err(Error::DepthOutOfRange { .. }) => {
                    limited = true;
                    continue;
                }
                Err(e) => return Err(e),
            };
            for &e in lvl.outgoing(y) {
                let mut up = path.clone();
                up.push(e);
                match lvl.serial(e) {
                    Some(next) => {
                        let w = descend_min(d, lvl.edge(next).src, m, n)?;
                        found.entry(w).or_insert(Reach::Successor(up));
                    }
                    None => {
                        let r = lvl.edge(e).rng;
                        if m + 1 - n < depth {
                            if visited.insert((m + 1, r)) {
                                frontier.push((m + 1, r, up));
                            }
                        } else if matches!(res, Resolution::Explore(_)) {
                            limited = true;
                        }
                    }
                }
            }
        }
        if let Resolution::Exact(psi) = res {
            if n >= 1 {
                if let Some(w) = psi[v] {
                    found.entry(w).or_insert(Reach::MaxPath);
                }
            }
        }
        targets.push(found);
    }
    Ok(TargetSets { targets, limited })
}

fn union_find_clusters(count: usize, sets: &TargetSets) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..count).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for t in &sets.targets {
        let ws: Vec<usize> = t.keys().copied().collect();
        for w in ws.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            parent[a] = b;
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..count {
        let r = find(&mut parent, v);
        groups.entry(r).or_default().push(v);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort();
    out
}

pub fn clusters(d: &OrderedBratteliDiagram, n: usize, depth: usize) -> Result<ClusterPartition> {
    let names = d.vertices(n)?;
    if n == 0 {
        return Ok(ClusterPartition { level: 0, clusters: vec![names], certainty: Certainty::Exact });
    }
    let res = resolution(d, depth)?;
    let sets = target_sets(d, n, &res)?;
    let groups = union_find_clusters(names.len(), &sets);
    Ok(ClusterPartition {
        level: n,
        clusters: groups.iter().map(|g| g.iter().map(|&v| names[v].clone()).collect()).collect(),
        certainty: if sets.limited { Certainty::DepthLimited } else { Certainty::Exact },
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NestingTarget {
    /// Base at level `n + 1` met by the image of the top floor.
    pub base: String,
    /// Level-`n` vertex whose base contains it.
    pub projection: String,
    /// A prefix on the top floor whose successor enters the base, when finite.
    pub prefix: Option<Vec<String>>,
    pub successor: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NestingWitness {
    pub vertex: String,
    pub targets: Vec<NestingTarget>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NestingReport {
    pub level: usize,
    pub verdict: Verdict,
    pub certainty: Certainty,
    pub witness: Option<NestingWitness>,
}

fn nesting_target(
    d: &OrderedBratteliDiagram,
    n: usize,
    v: usize,
    w: usize,
    reach: &Reach,
) -> Result<NestingTarget> {
    let top = n + 1;
    let names = d.vertices(top)?;
    let below = d.vertices(n)?;
    let (prefix, successor) = match reach {
        Reach::Successor(up) => {
            let mut p = max_path(d, top, v)?;
            p.edges.extend(up);
            let succ = match vershik_successor(d, &p)? {
                Successor::Next(q) => Some(q.names(d)?),
                Successor::Maximal => None,
            };
            (Some(p.names(d)?), succ)
        }
        Reach::MaxPath => (None, None),
    };
    Ok(NestingTarget {
        base: names[w].clone(),
        projection: below[descend_min(d, w, top, n)?].clone(),
        prefix,
        successor,
    })
}

pub fn check_nesting(d: &OrderedBratteliDiagram, n: usize, depth: usize) -> Result<NestingReport> {
    d.check_level(n + 1)?;
    if n == 0 {
        return Ok(NestingReport { level: 0, verdict: Verdict::Holds, certainty: Certainty::Exact, witness: None });
    }
    let res = resolution(d, depth)?;
    let sets = target_sets(d, n + 1, &res)?;
    let certainty = if sets.limited { Certainty::DepthLimited } else { Certainty::Exact };
    for (v, t) in sets.targets.iter().enumerate() {
        let mut by_proj: BTreeMap<usize, usize> = BTreeMap::new();
        for &w in t.keys() {
            by_proj.entry(descend_min(d, w, n + 1, n)?).or_insert(w);
        }
        if by_proj.len() > 1 {
            let targets = by_proj
                .values()
                .take(2)
                .map(|&w| nesting_target(d, n, v, w, &t[&w]))
                .collect::<Result<Vec<_>>>()?;
            return Ok(NestingReport {
                level: n,
                verdict: Verdict::Fails,
                certainty,
                witness: Some(NestingWitness { vertex: d.vertices(n + 1)?[v].clone(), targets }),
            });
        }
    }
    let verdict = if sets.limited { Verdict::Unknown } else { Verdict::Holds };
    Ok(NestingReport { level: n, verdict, certainty, witness: None })
}

pub fn weighted_to_bv(p: &CoveringPresentation) -> Result<OrderedBratteliDiagram> {
    match p {
        CoveringPresentation::Stationary(s) => {
            let g = s.graph();
            let names: Vec<String> = g.edges().map(|e| g.edge_name(e).to_string()).collect();
            let images: Vec<Vec<usize>> = s.cover().emap.iter().map(|w| w.0.iter().map(|e| e.0).collect()).collect();
            let mono = MonoGraph::from_images(&names, &images)?;
            OrderedBratteliDiagram::stationary(mono, s.multiplicities().to_vec())
        }
        CoveringPresentation::FinitePrefix(f) => {
            let mut levels = Vec::new();
            let g1 = &f.levels()[0];
            let names1: Vec<String> = g1.shape.edges().map(|e| g1.shape.edge_name(e).to_string()).collect();
            levels.push(first_level(&names1, &g1.len)?);
            for (i, c) in f.covers().iter().enumerate() {
                let g = &f.levels()[i + 1].shape;
                let names: Vec<String> = g.edges().map(|e| g.edge_name(e).to_string()).collect();
                let mut edges = Vec::new();
                for e in g.edges() {
                    for (j, x) in c.image(e).0.iter().enumerate() {
                        edges.push((format!("{}.{}", names[e.0], j + 1), x.0, e.0, j + 1));
                    }
                }
                levels.push(BvLevel::new(c.codomain.edge_count(), names, edges)?);
            }
            OrderedBratteliDiagram::finite_prefix(levels, f.tail())
        }
    }
}

fn cluster_name(members: &[String]) -> String {
    members.join("+")
}

/// Weighted level `n` and the cluster index of every base, from exact target sets.
fn weighted_level(d: &OrderedBratteliDiagram, n: usize, sets: &TargetSets) -> Result<(WeightedGraph, Vec<usize>)> {
    let names = d.vertices(n)?;
    let groups = union_find_clusters(names.len(), sets);
    let mut cluster_of = vec![0; names.len()];
    for (i, g) in groups.iter().enumerate() {
        for &v in g {
            cluster_of[v] = i;
        }
    }
    let cnames: Vec<String> = groups
        .iter()
        .map(|g| cluster_name(&g.iter().map(|&v| names[v].clone()).collect::<Vec<_>>()))
        .collect();
    let mut edges = Vec::new();
    for (v, t) in sets.targets.iter().enumerate() {
        let w = *t.keys().next().ok_or_else(|| {
            Error::UndefinedVershik(format!("the top floor of {} has no successor", names[v]))
        })?;
        edges.push((names[v].clone(), cnames[cluster_of[v]].clone(), cnames[cluster_of[w]].clone()));
    }
    let shape = Arc::new(FlexibleGraph::new(cnames.clone(), edges)?);
    let heights = d.heights(n)?;
    // Graph edges are sorted by name; reorder heights to match.
    let len = shape
        .edges()
        .map(|e| heights[names.iter().position(|x| x == shape.edge_name(e)).unwrap()])
        .collect();
    Ok((WeightedGraph::new(shape, len)?, cluster_of))
}

fn nesting_error(d: &OrderedBratteliDiagram, n: usize, depth: usize) -> Result<()> {
    let r = check_nesting(d, n, depth)?;
    if r.verdict == Verdict::Fails {
        let w = r.witness.unwrap();
        let detail = format!(
            "the top floor of {} reaches bases {} and {} in different lower bases",
            w.vertex, w.targets[0].base, w.targets[1].base
        );
        return Err(Error::NestingViolation { level: n, detail });
    }
    Ok(())
}

/// Edge images of level `n + 1` in terms of level-`n` vertices.
fn read_level(d: &OrderedBratteliDiagram, n: usize, dom: &FlexibleGraph, cod: &FlexibleGraph) -> Result<Vec<Walk>> {
    let lvl = d.level(n + 1)?;
    let below = d.vertices(n)?;
    dom.edges()
        .map(|e| {
            let v = lvl.vertex_id(dom.edge_name(e)).unwrap();
            let names: Vec<&str> = lvl.incoming(v).iter().map(|&x| below[lvl.edge(x).src].as_str()).collect();
            cod.walk_from_names(&names.join(" "))
        })
        .collect()
}

pub fn bv_to_weighted(d: &OrderedBratteliDiagram, depth: usize) -> Result<CoveringPresentation> {
    let res = resolution(d, depth)?;
    match &d.kind {
        BvKind::Stationary { mono, multiplicities } => {
            if !matches!(res, Resolution::Exact(_)) {
                return Err(Error::NotStraight("straighten the diagram by telescoping first".into()));
            }
            nesting_error(d, 1, depth)?;
            let sets = target_sets(d, 1, &res)?;
            let (g, _) = weighted_level(d, 1, &sets)?;
            let images = read_level(d, 1, &g.shape, &g.shape)?;
            let cover = Cover::from_edge_images(g.shape.clone(), g.shape.clone(), images)?;
            let mult = g
                .shape
                .edges()
                .map(|e| multiplicities[mono.vertex_id(g.shape.edge_name(e)).unwrap()])
                .collect();
            CoveringPresentation::stationary(cover, mult)
        }
        BvKind::FinitePrefix { .. } => {
            let mut graphs = Vec::new();
            let mut n = 1;
            loop {
                if d.check_level(n).is_err() {
                    break;
                }
                let sets = target_sets(d, n, &res)?;
                if sets.limited {
                    break;
                }
                graphs.push(weighted_level(d, n, &sets)?.0);
                n += 1;
            }
            if graphs.is_empty() {
                return Err(Error::UndefinedVershik(
                    "the successor at maximal paths is not determined within the prefix".into(),
                ));
            }
            let mut covers = Vec::new();
            for m in 1..graphs.len() {
                nesting_error(d, m, depth)?;
                let images = read_level(d, m, &graphs[m].shape, &graphs[m - 1].shape)?;
                covers.push(Cover::from_edge_images(graphs[m].shape.clone(), graphs[m - 1].shape.clone(), images)?);
            }
            CoveringPresentation::finite_prefix(graphs, covers, Tail::Truncated)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClosingBvReport {
    pub verdict: Verdict,
    /// Power used to straighten the diagram.
    pub k: usize,
    /// Constant-path vertices with the value of `ψ` there.
    pub witnesses: Vec<(String, String)>,
    /// Verdict of the covering-side check on the converted diagram.
    pub cross_check: Option<Verdict>,
    pub notes: Vec<String>,
}

pub fn check_closing_bv(d: &OrderedBratteliDiagram) -> Result<ClosingBvReport> {
    let BvKind::Stationary { mono, multiplicities } = &d.kind else {
        return Ok(ClosingBvReport {
            verdict: Verdict::Unknown,
            k: 1,
            witnesses: Vec::new(),
            cross_check: None,
            notes: vec!["finite prefixes cannot decide constant paths".into()],
        });
    };
    let (k, power) = straighten_mono(mono)?;
    let cont = check_continuity(&power)?;
    if cont.verdict == Verdict::Fails {
        return Ok(ClosingBvReport {
            verdict: Verdict::Unknown,
            k,
            witnesses: Vec::new(),
            cross_check: None,
            notes: vec!["the diagram admits no continuous Vershik map".into()],
        });
    }
    let mut verdict = Verdict::Holds;
    let mut witnesses = Vec::new();
    for v in 0..power.vertex_count() {
        let inc = power.incoming(v);
        if inc.len() == 1 && power.edge(inc[0]).src == v {
            let name = power.vertex_name(v).to_string();
            let image = cont.psi[&name].clone();
            if image != name {
                verdict = Verdict::Fails;
            }
            witnesses.push((name, image));
        }
    }
    let straight = OrderedBratteliDiagram::stationary(power, multiplicities.clone())?;
    let cross_check = bv_to_weighted(&straight, 2)
        .and_then(|c| coverings::check_closing(&c))
        .ok()
        .map(|r| r.verdict);
    let mut notes = Vec::new();
    if cross_check.is_some_and(|c| c != verdict) {
        notes.push("covering-side verdict differs".into());
    }
    Ok(ClosingBvReport { verdict, k, witnesses, cross_check, notes })
}

pub fn check_regulated_bv(
    d: &OrderedBratteliDiagram,
    l_seq: &[u64],
    n_max: usize,
    depth: usize,
) -> Result<RegulationReport> {
    coverings::validate_l_seq(l_seq, n_max)?;
    d.check_level(n_max)?;
    if let Some(m) = d.mono() {
        if !m.is_straight() {
            return Err(Error::NotStraight("regulation is read on a straight diagram".into()));
        }
    }
    let c = bv_to_weighted(d, depth)?;
    let reachable = c.max_level().unwrap_or(usize::MAX);
    if reachable < n_max {
        return Err(Error::DepthOutOfRange { requested: n_max, available: reachable });
    }
    coverings::check_regulated(&c, l_seq, n_max)
}

/// Stationary coverings equal up to renaming vertices.
pub fn isomorphic_stationary(a: &CoveringPresentation, b: &CoveringPresentation) -> bool {
    let (CoveringPresentation::Stationary(x), CoveringPresentation::Stationary(y)) = (a, b) else {
        return false;
    };
    let (gx, gy) = (x.graph(), y.graph());
    if gx.edge_count() != gy.edge_count() || gx.vertex_count() != gy.vertex_count() {
        return false;
    }
    let mut vmap: BTreeMap<usize, usize> = BTreeMap::new();
    for e in gx.edges() {
        let Some(f) = gy.edge_id(gx.edge_name(e)) else { return false };
        for (u, w) in [(gx.src(e), gy.src(f)), (gx.rng(e), gy.rng(f))] {
            if *vmap.entry(u.0).or_insert(w.0) != w.0 {
                return false;
            }
        }
        let ix: Vec<String> = gx.walk_names(x.cover().image(e));
        let iy: Vec<String> = gy.walk_names(y.cover().image(f));
        if ix != iy || x.multiplicities()[e.0] != y.multiplicities()[f.0] {
            return false;
        }
    }
    let targets: BTreeSet<usize> = vmap.values().copied().collect();
    vmap.len() == gx.vertex_count() && targets.len() == vmap.len()
}
