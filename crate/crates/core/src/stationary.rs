//! Mono-graphs, straightening, the continuity condition, straight self-covers,
//! constant sequences and the overlap criterion.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphs::{check_cover, compose_covers, Cover, EdgeId, FlexibleGraph, VertexId};
use crate::orbits::{iterate, straightening_exponent};
use crate::verdict::Verdict;
use crate::words::{expand, summary_orbit};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonoEdge {
    pub id: String,
    pub src: usize,
    pub rng: usize,
}

/// A single-level template of vertices and ranked in-edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonoGraph {
    vertices: Vec<String>,
    edges: Vec<MonoEdge>,
    /// In-edges of each vertex in rank order.
    incoming: Vec<Vec<usize>>,
}

impl MonoGraph {
    /// Builds a mono-graph from `(edge id, src, rng, rank)` with ranks starting at 1.
    pub fn new<S: Into<String>>(
        vertices: impl IntoIterator<Item = S>,
        edges: impl IntoIterator<Item = (S, S, S, usize)>,
    ) -> Result<Self> {
        let mut vs: Vec<String> = vertices.into_iter().map(Into::into).collect();
        vs.sort();
        if let Some(w) = vs.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Graph(format!("duplicate vertex id {}", w[0])));
        }
        let find = |n: &str| {
            vs.binary_search_by(|x| x.as_str().cmp(n))
                .map_err(|_| Error::Graph(format!("unknown vertex {n}")))
        };
        let mut raw: Vec<(String, usize, usize, usize)> = Vec::new();
        for (id, s, r, rank) in edges {
            let (id, s, r) = (id.into(), s.into(), r.into());
            raw.push((id, find(&s)?, find(&r)?, rank));
        }
        raw.sort();
        if let Some(w) = raw.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::Graph(format!("duplicate edge id {}", w[0].0)));
        }
        let mut incoming: Vec<Vec<(usize, usize)>> = vec![Vec::new(); vs.len()];
        for (i, &(_, _, r, rank)) in raw.iter().enumerate() {
            incoming[r].push((rank, i));
        }
        for (v, list) in incoming.iter_mut().enumerate() {
            if list.is_empty() {
                return Err(Error::Graph(format!("no incoming edge at {}", vs[v])));
            }
            list.sort();
            if list.iter().enumerate().any(|(i, &(rank, _))| rank != i + 1) {
                return Err(Error::Graph(format!("rank gap at vertex {}", vs[v])));
            }
        }
        let edges = raw.into_iter().map(|(id, src, rng, _)| MonoEdge { id, src, rng }).collect();
        let incoming = incoming.into_iter().map(|l| l.into_iter().map(|(_, e)| e).collect()).collect();
        Ok(MonoGraph { vertices: vs, edges, incoming })
    }

    /// The mono-graph whose in-edges at `v` come from the letters of `images[v]`.
    pub fn from_images(vertices: &[String], images: &[Vec<usize>]) -> Result<Self> {
        let mut edges = Vec::new();
        for (v, img) in images.iter().enumerate() {
            for (i, &u) in img.iter().enumerate() {
                edges.push((format!("{}.{}", vertices[v], i + 1), vertices[u].clone(), vertices[v].clone(), i + 1));
            }
        }
        MonoGraph::new(vertices.iter().cloned(), edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_name(&self, v: usize) -> &str {
        &self.vertices[v]
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertices
    }

    pub fn vertex_id(&self, name: &str) -> Option<usize> {
        self.vertices.binary_search_by(|x| x.as_str().cmp(name)).ok()
    }

    pub fn edge(&self, e: usize) -> &MonoEdge {
        &self.edges[e]
    }

    pub fn edges(&self) -> &[MonoEdge] {
        &self.edges
    }

    pub fn edge_id(&self, name: &str) -> Option<usize> {
        self.edges.binary_search_by(|x| x.id.as_str().cmp(name)).ok()
    }

    /// In-edges of `v`, minimal first.
    pub fn incoming(&self, v: usize) -> &[usize] {
        &self.incoming[v]
    }

    /// Rank of `e` among the in-edges of its range, starting at 1.
    pub fn rank(&self, e: usize) -> usize {
        self.incoming[self.edges[e].rng].iter().position(|&x| x == e).unwrap() + 1
    }

    pub fn is_max(&self, e: usize) -> bool {
        *self.incoming[self.edges[e].rng].last().unwrap() == e
    }

    pub fn is_min(&self, e: usize) -> bool {
        self.incoming[self.edges[e].rng][0] == e
    }

    /// The next edge in rank order, if `e` is not maximal.
    pub fn serial(&self, e: usize) -> Option<usize> {
        let list = &self.incoming[self.edges[e].rng];
        let i = list.iter().position(|&x| x == e).unwrap();
        list.get(i + 1).copied()
    }

    pub fn is_surjective(&self) -> bool {
        let mut has_out = vec![false; self.vertices.len()];
        for e in &self.edges {
            has_out[e.src] = true;
        }
        has_out.into_iter().all(|b| b)
    }

    /// `v ↦ s(e(v, max))`.
    pub fn max_source_map(&self) -> Vec<usize> {
        self.incoming.iter().map(|l| self.edges[*l.last().unwrap()].src).collect()
    }

    /// `v ↦ s(e(v, min))`.
    pub fn min_source_map(&self) -> Vec<usize> {
        self.incoming.iter().map(|l| self.edges[l[0]].src).collect()
    }

    /// Sources of the in-edges of each vertex in rank order: the substitution read.
    pub fn read_images(&self) -> Vec<Vec<usize>> {
        self.incoming
            .iter()
            .map(|l| l.iter().map(|&e| self.edges[e].src).collect())
            .collect()
    }

    /// Both extreme-source maps are idempotent: extreme paths are straight and
    /// every extreme edge starts at a vertex carrying an extreme loop.
    pub fn is_straight(&self) -> bool {
        let idem = |f: &[usize]| (0..f.len()).all(|v| f[f[v]] == f[v]);
        idem(&self.max_source_map()) && idem(&self.min_source_map())
    }

    /// Fixed points of the max-source map, the sources of maximal loops.
    pub fn max_loop_vertices(&self) -> Vec<usize> {
        let m = self.max_source_map();
        (0..m.len()).filter(|&v| m[v] == v).collect()
    }

    pub fn min_loop_vertices(&self) -> Vec<usize> {
        let m = self.min_source_map();
        (0..m.len()).filter(|&v| m[v] == v).collect()
    }
}

/// The mono-graph of `K`-step paths, ordered with the top edge most significant.
pub fn mono_power(m: &MonoGraph, k: usize) -> Result<MonoGraph> {
    if k == 0 {
        return Err(Error::Precondition("K must be positive".into()));
    }
    // paths[v]: in-paths of length j into v, bottom edge first, in order.
    let mut paths: Vec<Vec<Vec<usize>>> = (0..m.vertex_count())
        .map(|v| m.incoming(v).iter().map(|&e| vec![e]).collect())
        .collect();
    for _ in 1..k {
        paths = (0..m.vertex_count())
            .map(|v| {
                m.incoming(v)
                    .iter()
                    .flat_map(|&e| {
                        paths[m.edge(e).src].iter().map(move |p| {
                            let mut q = p.clone();
                            q.push(e);
                            q
                        })
                    })
                    .collect()
            })
            .collect();
    }
    let mut edges = Vec::new();
    for (v, list) in paths.iter().enumerate() {
        for (i, p) in list.iter().enumerate() {
            let id = p.iter().map(|&e| m.edge(e).id.as_str()).collect::<Vec<_>>().join(".");
            let src = m.vertex_name(m.edge(p[0]).src).to_string();
            edges.push((id, src, m.vertex_name(v).to_string(), i + 1));
        }
    }
    MonoGraph::new(m.vertex_names().iter().cloned(), edges)
}

/// Smallest power making the mono-graph straight, with that power.
pub fn straighten_mono(m: &MonoGraph) -> Result<(usize, MonoGraph)> {
    if !m.is_surjective() {
        return Err(Error::Precondition("straightening needs a surjective mono-graph".into()));
    }
    let k = straightening_exponent(&[&m.max_source_map(), &m.min_source_map()]);
    Ok((k, mono_power(m, k)?))
}

/// `ψ(max(s(e))) = min(s(e(serial)))` for one non-maximal edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ContinuityConstraint {
    pub edge: String,
    pub from: String,
    pub to: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ContinuityReport {
    pub verdict: Verdict,
    /// `ψ` on the maximal-loop vertices when it exists.
    pub psi: BTreeMap<String, String>,
    /// Two constraints demanding different images of one vertex.
    pub conflict: Option<(ContinuityConstraint, ContinuityConstraint)>,
    /// Minimal-loop vertices that no choice of `ψ` can reach.
    pub uncovered: Vec<String>,
}

pub fn check_continuity(m: &MonoGraph) -> Result<ContinuityReport> {
    if !m.is_straight() {
        return Err(Error::NotStraight(
            "an extreme-source map is not idempotent".into(),
        ));
    }
    let max_src = m.max_source_map();
    let min_src = m.min_source_map();
    let mut forced: BTreeMap<usize, ContinuityConstraint> = BTreeMap::new();
    for (e, edge) in m.edges().iter().enumerate() {
        let Some(next) = m.serial(e) else { continue };
        let from = max_src[edge.src];
        let to = min_src[m.edge(next).src];
        let c = ContinuityConstraint {
            edge: edge.id.clone(),
            from: m.vertex_name(from).to_string(),
            to: m.vertex_name(to).to_string(),
        };
        match forced.get(&from) {
            Some(prev) if prev.to != c.to => {
                return Ok(ContinuityReport {
                    verdict: Verdict::Fails,
                    psi: BTreeMap::new(),
                    conflict: Some((prev.clone(), c)),
                    uncovered: Vec::new(),
                })
            }
            Some(_) => {}
            None => {
                forced.insert(from, c);
            }
        }
    }
    let mut psi: BTreeMap<usize, usize> = forced
        .iter()
        .map(|(&v, c)| (v, m.vertex_id(&c.to).unwrap()))
        .collect();
    let covered: BTreeSet<usize> = psi.values().copied().collect();
    let mut missing: Vec<usize> = m.min_loop_vertices().into_iter().filter(|v| !covered.contains(v)).collect();
    let free: Vec<usize> = m.max_loop_vertices().into_iter().filter(|v| !psi.contains_key(v)).collect();
    if free.len() < missing.len() {
        let uncovered = missing.iter().map(|&v| m.vertex_name(v).to_string()).collect();
        return Ok(ContinuityReport { verdict: Verdict::Fails, psi: BTreeMap::new(), conflict: None, uncovered });
    }
    let fallback = m.min_loop_vertices()[0];
    for v in free {
        let target = if missing.is_empty() { fallback } else { missing.remove(0) };
        psi.insert(v, target);
    }
    Ok(ContinuityReport {
        verdict: Verdict::Holds,
        psi: psi
            .into_iter()
            .map(|(a, b)| (m.vertex_name(a).to_string(), m.vertex_name(b).to_string()))
            .collect(),
        conflict: None,
        uncovered: Vec::new(),
    })
}

/// Eventual data of a flexible self-cover after straightening.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelfCoverAnalysis {
    /// Exponent with `φ^K` straight.
    pub k: usize,
    /// `φ^K`.
    pub cover: Cover,
    pub lim_vertex: Vec<VertexId>,
    pub lim_first: Vec<EdgeId>,
    pub lim_last: Vec<EdgeId>,
}

impl SelfCoverAnalysis {
    pub fn graph(&self) -> &Arc<FlexibleGraph> {
        &self.cover.domain
    }

    pub fn lim_vertices(&self) -> BTreeSet<VertexId> {
        self.lim_vertex.iter().copied().collect()
    }

    pub fn lim_first_set(&self) -> BTreeSet<EdgeId> {
        self.lim_first.iter().copied().collect()
    }

    pub fn lim_last_set(&self) -> BTreeSet<EdgeId> {
        self.lim_last.iter().copied().collect()
    }

    pub fn names<'a>(&'a self, edges: impl IntoIterator<Item = &'a EdgeId>) -> Vec<String> {
        edges.into_iter().map(|&e| self.graph().edge_name(e).to_string()).collect()
    }

    /// Edge images of the straightened cover as letter indices.
    pub fn images(&self) -> Vec<Vec<usize>> {
        self.cover.emap.iter().map(|w| w.0.iter().map(|e| e.0).collect()).collect()
    }

    /// Edges with `φ(e) = e`.
    pub fn fixed_edges(&self) -> Vec<EdgeId> {
        self.graph().edges().filter(|&e| self.cover.image(e).0 == [e]).collect()
    }
}

fn first_map(c: &Cover) -> Vec<usize> {
    c.emap.iter().map(|w| w.first().0).collect()
}

fn last_map(c: &Cover) -> Vec<usize> {
    c.emap.iter().map(|w| w.last().0).collect()
}

pub fn analyze_self_cover(phi: &Cover) -> Result<SelfCoverAnalysis> {
    if !phi.is_self_cover() {
        return Err(Error::Precondition("not a self-cover".into()));
    }
    let flags = check_cover(phi);
    if !flags.plus_directional || !flags.edge_surjective {
        return Err(Error::CoverViolation("self-cover is not +directional and edge-surjective".into()));
    }
    let vmap: Vec<usize> = phi.vmap.iter().map(|v| v.0).collect();
    let first = first_map(phi);
    let last = last_map(phi);
    let k = straightening_exponent(&[&vmap, &first, &last]);
    let mut cover = phi.clone();
    for _ in 1..k {
        cover = compose_covers(phi, &cover)?;
    }
    let lim_vertex = (0..vmap.len()).map(|v| VertexId(iterate(&vmap, v, k))).collect();
    let lim_first = (0..first.len()).map(|e| EdgeId(iterate(&first, e, k))).collect();
    let lim_last = (0..last.len()).map(|e| EdgeId(iterate(&last, e, k))).collect();
    Ok(SelfCoverAnalysis { k, cover, lim_vertex, lim_first, lim_last })
}

/// A vertex sequence in `lim V` carried by a walk of fixed edges.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct ConstantSequence {
    pub vertices: Vec<String>,
    pub walk: Vec<String>,
    /// Fixed cycle whose powers extend this walk without bound, canonical rotation.
    pub family: Option<Vec<String>>,
}

/// Layout of the fixed-edge subgraph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FixedStructure {
    /// Primitive cycles of fixed edges, least rotation.
    pub cycles: Vec<Vec<String>>,
    /// Each cycle is a whole component of the fixed-edge graph.
    pub cycles_isolated: bool,
    /// Longest fixed walk avoiding cycles, in edges.
    pub longest_acyclic: usize,
}

struct FixedGraph<'a> {
    a: &'a SelfCoverAnalysis,
    fixed: Vec<EdgeId>,
}

impl<'a> FixedGraph<'a> {
    fn new(a: &'a SelfCoverAnalysis) -> Self {
        FixedGraph { a, fixed: a.fixed_edges() }
    }

    fn out(&self, v: VertexId) -> impl Iterator<Item = EdgeId> + '_ {
        let g = self.a.graph();
        self.fixed.iter().copied().filter(move |&e| g.src(e) == v)
    }

    /// Fixed walks with `len` edges.
    fn walks(&self, len: usize) -> Vec<Vec<EdgeId>> {
        let mut cur: Vec<Vec<EdgeId>> = vec![Vec::new()];
        if len == 0 {
            return cur;
        }
        cur = self.fixed.iter().map(|&e| vec![e]).collect();
        for _ in 1..len {
            let g = self.a.graph();
            cur = cur
                .iter()
                .flat_map(|w| {
                    let end = g.rng(*w.last().unwrap());
                    self.out(end).map(move |e| {
                        let mut x = w.clone();
                        x.push(e);
                        x
                    })
                })
                .collect();
        }
        cur
    }

    fn cycles(&self) -> Vec<Vec<EdgeId>> {
        let g = self.a.graph();
        let mut out = Vec::new();
        for len in 1..=self.fixed.len() {
            for w in self.walks(len) {
                let closed = g.rng(*w.last().unwrap()) == g.src(w[0]);
                let distinct: BTreeSet<_> = w.iter().map(|&e| g.src(e)).collect();
                let least = (1..w.len()).all(|r| {
                    let rot: Vec<_> = w[r..].iter().chain(&w[..r]).copied().collect();
                    rot > w
                });
                if closed && distinct.len() == w.len() && least {
                    out.push(w);
                }
            }
        }
        out
    }

    fn structure(&self) -> (Vec<Vec<EdgeId>>, bool, usize) {
        let g = self.a.graph();
        let cycles = self.cycles();
        let on_cycle: BTreeSet<EdgeId> = cycles.iter().flatten().copied().collect();
        let cycle_vertices: BTreeSet<VertexId> = on_cycle.iter().map(|&e| g.src(e)).collect();
        let isolated = self.fixed.iter().all(|&e| {
            on_cycle.contains(&e) || (!cycle_vertices.contains(&g.src(e)) && !cycle_vertices.contains(&g.rng(e)))
        });
        // Walks off the cycles form a DAG when the cycles are isolated.
        let mut longest = 0;
        if isolated {
            let rest: Vec<EdgeId> = self.fixed.iter().copied().filter(|e| !on_cycle.contains(e)).collect();
            let mut depth: BTreeMap<VertexId, usize> = BTreeMap::new();
            for _ in 0..=rest.len() {
                for &e in &rest {
                    let d = depth.get(&g.src(e)).copied().unwrap_or(0) + 1;
                    let slot = depth.entry(g.rng(e)).or_insert(0);
                    *slot = (*slot).max(d);
                }
            }
            longest = depth.values().copied().max().unwrap_or(0);
        }
        (cycles, isolated, longest)
    }
}

fn family_of(walk: &[EdgeId], cycles: &[Vec<EdgeId>]) -> Option<usize> {
    if walk.is_empty() {
        return None;
    }
    cycles.iter().position(|c| {
        (0..c.len()).any(|r| walk.iter().enumerate().all(|(i, &e)| c[(r + i) % c.len()] == e))
    })
}

pub fn fixed_structure(a: &SelfCoverAnalysis) -> FixedStructure {
    let (cycles, cycles_isolated, longest_acyclic) = FixedGraph::new(a).structure();
    FixedStructure {
        cycles: cycles.iter().map(|c| a.names(c)).collect(),
        cycles_isolated,
        longest_acyclic,
    }
}

fn require_straight(a: &SelfCoverAnalysis) -> Result<()> {
    if a.k != 1 {
        return Err(Error::NotStraight(format!("the self-cover needs the power {}", a.k)));
    }
    Ok(())
}

pub fn constant_sequences(a: &SelfCoverAnalysis, k_max: usize) -> Result<Vec<ConstantSequence>> {
    require_straight(a)?;
    let g = a.graph();
    let fg = FixedGraph::new(a);
    let cycles = fg.cycles();
    let mut out = Vec::new();
    for v in a.lim_vertices() {
        out.push(ConstantSequence { vertices: vec![g.vertex_name(v).to_string()], walk: Vec::new(), family: None });
    }
    for len in 1..k_max {
        for w in fg.walks(len) {
            let mut vertices: Vec<String> = w.iter().map(|&e| g.vertex_name(g.src(e)).to_string()).collect();
            vertices.push(g.vertex_name(g.rng(*w.last().unwrap())).to_string());
            let family = family_of(&w, &cycles).map(|i| a.names(&cycles[i]));
            out.push(ConstantSequence { vertices, walk: a.names(&w), family });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Occurrence {
    pub edge: String,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairSearch {
    pub before: String,
    pub after: String,
    pub witness: Option<Occurrence>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SequenceVerdict {
    Overlapped,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SequenceOverlap {
    pub sequence: ConstantSequence,
    pub verdict: SequenceVerdict,
    pub pairs: Vec<PairSearch>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyCertificate {
    pub cycle: Vec<String>,
    pub before: String,
    /// Longest bracketed run of the cycle, in edges, for `n = 1, 2, …`.
    pub runs: Vec<usize>,
    pub certified_at: Option<Occurrence>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum OverallOverlap {
    Bijective,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OverlapReport {
    pub overall: OverallOverlap,
    pub sequences: Vec<SequenceOverlap>,
    pub families: Vec<FamilyCertificate>,
    pub structure: FixedStructure,
    /// Every depth was covered because the factor state repeated.
    pub search_complete: bool,
    pub notes: Vec<String>,
}

/// Letters kept by the run search before giving up on deeper levels.
const RUN_SEARCH_CAP: usize = 1 << 20;

/// Longest `R` with `before · (c from rotation r)^R-prefix · after(end)` in `w`.
fn longest_bracketed_run(
    w: &[usize],
    before: usize,
    cycle: &[usize],
    after_at: &dyn Fn(usize) -> usize,
) -> Option<usize> {
    let mut best: Option<usize> = None;
    for i in 0..w.len() {
        if w[i] != before {
            continue;
        }
        let mut r = 0;
        loop {
            let pos = i + 1 + r;
            if pos >= w.len() {
                break;
            }
            if w[pos] == after_at(r) && r > 0 {
                best = Some(best.map_or(r, |b: usize| b.max(r)));
            }
            if w[pos] != cycle[r % cycle.len()] {
                break;
            }
            r += 1;
        }
    }
    best
}

pub fn check_overlap(a: &SelfCoverAnalysis, k_max: usize, depth_max: usize) -> Result<OverlapReport> {
    require_straight(a)?;
    if k_max == 0 || depth_max == 0 {
        return Err(Error::Precondition("k_max and depth_max must be positive".into()));
    }
    let g = a.graph();
    let images = a.images();
    let lim_last = a.lim_last_set();
    let lim_first = a.lim_first_set();
    let first_from = |v: VertexId| -> EdgeId {
        *lim_first.iter().find(|&&e| g.src(e) == v).expect("one lim_f edge per lim vertex")
    };
    let (levels, search_complete) = summary_orbit(&images, k_max + 1, depth_max);
    let search = |word: &[usize]| -> Option<Occurrence> {
        for (n, lvl) in levels.iter().enumerate() {
            for (e, s) in lvl.iter().enumerate() {
                if s.contains(word) {
                    return Some(Occurrence { edge: g.edge_name(EdgeId(e)).to_string(), n: n + 1 });
                }
            }
        }
        None
    };
    let mut sequences = Vec::new();
    for seq in constant_sequences(a, k_max)? {
        let walk: Vec<usize> = seq.walk.iter().map(|n| g.edge_id(n).unwrap().0).collect();
        let v1 = g.vertex_id(&seq.vertices[0]).unwrap();
        let vk = g.vertex_id(seq.vertices.last().unwrap()).unwrap();
        let after = first_from(vk);
        let mut pairs = Vec::new();
        for &e0 in lim_last.iter().filter(|&&e| g.rng(e) == v1) {
            let mut word = vec![e0.0];
            word.extend(&walk);
            word.push(after.0);
            pairs.push(PairSearch {
                before: g.edge_name(e0).to_string(),
                after: g.edge_name(after).to_string(),
                witness: search(&word),
            });
        }
        let verdict = if pairs.iter().all(|p| p.witness.is_some()) {
            SequenceVerdict::Overlapped
        } else {
            SequenceVerdict::Unknown
        };
        sequences.push(SequenceOverlap { sequence: seq, verdict, pairs });
    }

    let fg = FixedGraph::new(a);
    let (cycles, isolated, longest) = fg.structure();
    let mut notes = Vec::new();
    let mut families = Vec::new();
    if !isolated {
        notes.push("fixed cycles share vertices with other fixed edges; unbounded constant sequences are not classified".into());
    }
    if isolated && longest + 1 > k_max {
        notes.push(format!("constant sequences up to length {} exist; k_max is {}", longest + 1, k_max));
    }
    if !cycles.is_empty() {
        // Explicit expansions for the run search.
        let mut expansions: Vec<Vec<Vec<usize>>> = Vec::new();
        for n in 1..=depth_max + 1 {
            let lvl: Option<Vec<Vec<usize>>> =
                (0..images.len()).map(|e| expand(&images, &[e], n, RUN_SEARCH_CAP)).collect();
            match lvl {
                Some(l) => expansions.push(l),
                None => break,
            }
        }
        for c in &cycles {
            for r in 0..c.len() {
                let rot: Vec<usize> = c[r..].iter().chain(&c[..r]).map(|e| e.0).collect();
                let v1 = g.src(EdgeId(rot[0]));
                let after_at = |len: usize| -> usize {
                    let end = g.rng(EdgeId(rot[(len + rot.len() - 1) % rot.len()]));
                    first_from(end).0
                };
                for &e0 in lim_last.iter().filter(|&&e| g.rng(e) == v1) {
                    let mut runs = Vec::new();
                    let mut best_edge = Vec::new();
                    for lvl in &expansions {
                        let mut best = 0;
                        let mut at = 0;
                        for (e, w) in lvl.iter().enumerate() {
                            if let Some(x) = longest_bracketed_run(w, e0.0, &rot, &after_at) {
                                if x > best {
                                    best = x;
                                    at = e;
                                }
                            }
                        }
                        runs.push(best);
                        best_edge.push(at);
                    }
                    let certified_at = (0..runs.len().saturating_sub(1))
                        .find(|&i| runs[i] >= 2 * rot.len() && runs[i + 1] > runs[i])
                        .map(|i| Occurrence { edge: g.edge_name(EdgeId(best_edge[i])).to_string(), n: i + 1 });
                    families.push(FamilyCertificate {
                        cycle: a.names(&rot.iter().map(|&e| EdgeId(e)).collect::<Vec<_>>()),
                        before: g.edge_name(e0).to_string(),
                        runs,
                        certified_at,
                    });
                }
            }
        }
    }
    let all_seq = sequences.iter().all(|s| s.verdict == SequenceVerdict::Overlapped);
    let all_fam = families.iter().all(|f| f.certified_at.is_some());
    let overall = if all_seq && all_fam && notes.is_empty() {
        OverallOverlap::Bijective
    } else {
        OverallOverlap::Unknown
    };
    Ok(OverlapReport { overall, sequences, families, structure: fixed_structure(a), search_complete, notes })
}
