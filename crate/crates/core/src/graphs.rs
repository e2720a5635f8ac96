//! Finite graphs (basic, weighted, flexible), walks, circuits and single covers.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub src: VertexId,
    pub rng: VertexId,
}

/// Directed multigraph with named vertices and edges.
///
/// Vertices and edges are stored sorted by id, so index order is id order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlexibleGraph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
}

impl FlexibleGraph {
    /// Builds a graph from vertex ids and `(edge id, src id, rng id)` triples.
    pub fn new<V, E, S>(vertices: V, edges: E) -> Result<Self>
    where
        V: IntoIterator<Item = S>,
        E: IntoIterator<Item = (S, S, S)>,
        S: Into<String>,
    {
        let mut vs: Vec<String> = vertices.into_iter().map(Into::into).collect();
        vs.sort();
        if let Some(w) = vs.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Graph(format!("duplicate vertex id {}", w[0])));
        }
        let mut raw: Vec<(String, String, String)> = edges
            .into_iter()
            .map(|(e, s, r)| (e.into(), s.into(), r.into()))
            .collect();
        raw.sort();
        if let Some(w) = raw.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::Graph(format!("duplicate edge id {}", w[0].0)));
        }
        let find = |name: &str| {
            vs.binary_search_by(|x| x.as_str().cmp(name))
                .map(VertexId)
                .map_err(|_| Error::Graph(format!("unknown vertex {name}")))
        };
        let mut es = Vec::with_capacity(raw.len());
        for (id, s, r) in raw {
            let src = find(&s)?;
            let rng = find(&r)?;
            es.push(Edge { id, src, rng });
        }
        Ok(FlexibleGraph { vertices: vs, edges: es })
    }

    /// The singleton graph `({v0}, {e0})`.
    pub fn singleton() -> Self {
        FlexibleGraph::new(["v0"], [("e0", "v0", "v0")]).expect("singleton graph")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vertices.len()).map(VertexId)
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edges.len()).map(EdgeId)
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertices[v.0]
    }

    pub fn edge_name(&self, e: EdgeId) -> &str {
        &self.edges[e.0].id
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }

    pub fn src(&self, e: EdgeId) -> VertexId {
        self.edges[e.0].src
    }

    pub fn rng(&self, e: EdgeId) -> VertexId {
        self.edges[e.0].rng
    }

    pub fn vertex_id(&self, name: &str) -> Option<VertexId> {
        self.vertices
            .binary_search_by(|x| x.as_str().cmp(name))
            .ok()
            .map(VertexId)
    }

    pub fn edge_id(&self, name: &str) -> Option<EdgeId> {
        self.edges
            .binary_search_by(|x| x.id.as_str().cmp(name))
            .ok()
            .map(EdgeId)
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertices
    }

    pub fn out_edges(&self, v: VertexId) -> Vec<EdgeId> {
        self.edges().filter(|&e| self.src(e) == v).collect()
    }

    pub fn in_edges(&self, v: VertexId) -> Vec<EdgeId> {
        self.edges().filter(|&e| self.rng(e) == v).collect()
    }

    /// Lists violated degree conditions; empty iff the graph is valid.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        for v in self.vertices() {
            if !self.edges.iter().any(|e| e.src == v) {
                out.push(format!("no outgoing edge at {}", self.vertex_name(v)));
            }
            if !self.edges.iter().any(|e| e.rng == v) {
                out.push(format!("no incoming edge at {}", self.vertex_name(v)));
            }
        }
        out
    }

    /// Parses a whitespace-separated list of edge ids into a walk.
    pub fn walk_from_names(&self, names: &str) -> Result<Walk> {
        let edges = names
            .split_whitespace()
            .map(|n| {
                self.edge_id(n)
                    .ok_or_else(|| Error::Graph(format!("unknown edge {n}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let w = Walk(edges);
        self.check_walk(&w)?;
        Ok(w)
    }

    /// Checks that `w` is a nonempty walk in this graph.
    pub fn check_walk(&self, w: &Walk) -> Result<()> {
        if w.0.is_empty() {
            return Err(Error::Graph("empty walk".into()));
        }
        if let Some(&e) = w.0.iter().find(|e| e.0 >= self.edges.len()) {
            return Err(Error::Graph(format!("edge index {} out of range", e.0)));
        }
        for p in w.0.windows(2) {
            if self.rng(p[0]) != self.src(p[1]) {
                return Err(Error::Graph(format!(
                    "walk breaks between {} and {}",
                    self.edge_name(p[0]),
                    self.edge_name(p[1])
                )));
            }
        }
        Ok(())
    }

    pub fn walk_names(&self, w: &Walk) -> Vec<String> {
        w.0.iter().map(|&e| self.edge_name(e).to_string()).collect()
    }
}

/// A flexible graph together with positive edge lengths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedGraph {
    pub shape: Arc<FlexibleGraph>,
    pub len: Vec<u64>,
}

impl WeightedGraph {
    pub fn new(shape: Arc<FlexibleGraph>, len: Vec<u64>) -> Result<Self> {
        if len.len() != shape.edge_count() {
            return Err(Error::Graph("length table size differs from edge count".into()));
        }
        if let Some(i) = len.iter().position(|&l| l == 0) {
            return Err(Error::Graph(format!(
                "non-positive length at {}",
                shape.edge_name(EdgeId(i))
            )));
        }
        Ok(WeightedGraph { shape, len })
    }

    pub fn singleton() -> Self {
        WeightedGraph {
            shape: Arc::new(FlexibleGraph::singleton()),
            len: vec![1],
        }
    }

    pub fn len_of(&self, e: EdgeId) -> u64 {
        self.len[e.0]
    }

    pub fn walk_length(&self, w: &Walk) -> u64 {
        w.0.iter().map(|&e| self.len[e.0]).sum()
    }

    pub fn validate(&self) -> Vec<String> {
        let mut out = self.shape.validate();
        for e in self.shape.edges() {
            if self.len[e.0] == 0 {
                out.push(format!("non-positive length at {}", self.shape.edge_name(e)));
            }
        }
        out
    }
}

/// A finite relation on named vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasicGraph {
    vertices: Vec<String>,
    edges: BTreeSet<(usize, usize)>,
}

impl BasicGraph {
    pub fn new<V, E, S>(vertices: V, edges: E) -> Result<Self>
    where
        V: IntoIterator<Item = S>,
        E: IntoIterator<Item = (S, S)>,
        S: Into<String>,
    {
        let mut vs: Vec<String> = vertices.into_iter().map(Into::into).collect();
        vs.sort();
        if let Some(w) = vs.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Graph(format!("duplicate vertex id {}", w[0])));
        }
        let mut es = BTreeSet::new();
        for (a, b) in edges {
            let (a, b): (String, String) = (a.into(), b.into());
            let ia = vs
                .binary_search(&a)
                .map_err(|_| Error::Graph(format!("unknown vertex {a}")))?;
            let ib = vs
                .binary_search(&b)
                .map_err(|_| Error::Graph(format!("unknown vertex {b}")))?;
            es.insert((ia, ib));
        }
        Ok(BasicGraph { vertices: vs, edges: es })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex_name(&self, v: usize) -> &str {
        &self.vertices[v]
    }

    pub fn vertex_id(&self, name: &str) -> Option<usize> {
        self.vertices.binary_search_by(|x| x.as_str().cmp(name)).ok()
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a, b))
    }

    pub fn successors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.range((v, 0)..=(v, usize::MAX)).map(|&(_, b)| b)
    }

    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        for v in 0..self.vertices.len() {
            if !self.edges.iter().any(|&(a, _)| a == v) {
                out.push(format!("no outgoing edge at {}", self.vertices[v]));
            }
            if !self.edges.iter().any(|&(_, b)| b == v) {
                out.push(format!("no incoming edge at {}", self.vertices[v]));
            }
        }
        out
    }
}

/// Nonempty edge sequence in a host graph.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Walk(pub Vec<EdgeId>);

impl Walk {
    pub fn single(e: EdgeId) -> Self {
        Walk(vec![e])
    }

    pub fn first(&self) -> EdgeId {
        self.0[0]
    }

    pub fn last(&self) -> EdgeId {
        *self.0.last().expect("walks are nonempty")
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Graph homomorphism sending vertices to vertices and edges to walks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cover {
    pub domain: Arc<FlexibleGraph>,
    pub codomain: Arc<FlexibleGraph>,
    pub vmap: Vec<VertexId>,
    pub emap: Vec<Walk>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoverFlags {
    pub edge_surjective: bool,
    pub plus_directional: bool,
    pub minus_directional: bool,
    pub bidirectional: bool,
}

impl Cover {
    /// Builds a cover, checking that walks are legal and endpoints are respected.
    pub fn new(
        domain: Arc<FlexibleGraph>,
        codomain: Arc<FlexibleGraph>,
        vmap: Vec<VertexId>,
        emap: Vec<Walk>,
    ) -> Result<Self> {
        if vmap.len() != domain.vertex_count() || emap.len() != domain.edge_count() {
            return Err(Error::HomomorphismViolation(
                "map tables do not match the domain".into(),
            ));
        }
        if vmap.iter().any(|v| v.0 >= codomain.vertex_count()) {
            return Err(Error::HomomorphismViolation("vertex image out of range".into()));
        }
        for e in domain.edges() {
            let w = &emap[e.0];
            codomain
                .check_walk(w)
                .map_err(|err| Error::HomomorphismViolation(format!("{}: {err}", domain.edge_name(e))))?;
            if vmap[domain.src(e).0] != codomain.src(w.first())
                || vmap[domain.rng(e).0] != codomain.rng(w.last())
            {
                return Err(Error::HomomorphismViolation(format!(
                    "image of {} does not match its endpoints",
                    domain.edge_name(e)
                )));
            }
        }
        Ok(Cover { domain, codomain, vmap, emap })
    }

    /// Builds a cover from edge images, deriving the vertex map from them.
    pub fn from_edge_images(
        domain: Arc<FlexibleGraph>,
        codomain: Arc<FlexibleGraph>,
        emap: Vec<Walk>,
    ) -> Result<Self> {
        if emap.len() != domain.edge_count() {
            return Err(Error::HomomorphismViolation(
                "edge table does not match the domain".into(),
            ));
        }
        let mut vmap: Vec<Option<VertexId>> = vec![None; domain.vertex_count()];
        for e in domain.edges() {
            let w = &emap[e.0];
            codomain
                .check_walk(w)
                .map_err(|err| Error::HomomorphismViolation(err.to_string()))?;
            for (v, img) in [
                (domain.src(e), codomain.src(w.first())),
                (domain.rng(e), codomain.rng(w.last())),
            ] {
                match vmap[v.0] {
                    None => vmap[v.0] = Some(img),
                    Some(x) if x == img => {}
                    Some(_) => {
                        return Err(Error::HomomorphismViolation(format!(
                            "vertex {} has two images",
                            domain.vertex_name(v)
                        )))
                    }
                }
            }
        }
        let vmap = vmap
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                v.ok_or_else(|| {
                    Error::HomomorphismViolation(format!(
                        "isolated vertex {}",
                        domain.vertex_name(VertexId(i))
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Cover::new(domain, codomain, vmap, emap)
    }

    /// Self-cover given by `(edge, "image edges")` pairs.
    pub fn self_cover_from_names(g: Arc<FlexibleGraph>, images: &[(&str, &str)]) -> Result<Self> {
        let mut emap: Vec<Option<Walk>> = vec![None; g.edge_count()];
        for (e, img) in images {
            let id = g
                .edge_id(e)
                .ok_or_else(|| Error::Graph(format!("unknown edge {e}")))?;
            emap[id.0] = Some(g.walk_from_names(img)?);
        }
        let emap = emap
            .into_iter()
            .enumerate()
            .map(|(i, w)| {
                w.ok_or_else(|| {
                    Error::HomomorphismViolation(format!("no image for {}", g.edge_name(EdgeId(i))))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Cover::from_edge_images(g.clone(), g, emap)
    }

    pub fn identity(g: Arc<FlexibleGraph>) -> Self {
        let vmap = g.vertices().collect();
        let emap = g.edges().map(Walk::single).collect();
        Cover { domain: g.clone(), codomain: g, vmap, emap }
    }

    pub fn image(&self, e: EdgeId) -> &Walk {
        &self.emap[e.0]
    }

    pub fn is_self_cover(&self) -> bool {
        self.domain == self.codomain
    }

    /// Applies the cover to every edge of a walk and concatenates.
    pub fn apply_walk(&self, w: &[EdgeId]) -> Vec<EdgeId> {
        w.iter().flat_map(|&e| self.emap[e.0].0.iter().copied()).collect()
    }

    /// Checks `l(emap(e)) = len(e)` for weighted domain and codomain.
    pub fn check_lengths(&self, dom: &WeightedGraph, cod: &WeightedGraph) -> Result<()> {
        if *dom.shape != *self.domain || *cod.shape != *self.codomain {
            return Err(Error::DomainMismatch("weighted graphs differ from the cover's graphs".into()));
        }
        for e in self.domain.edges() {
            let l = cod.walk_length(&self.emap[e.0]);
            if l != dom.len_of(e) {
                return Err(Error::HomomorphismViolation(format!(
                    "length of image of {} is {l}, expected {}",
                    self.domain.edge_name(e),
                    dom.len_of(e)
                )));
            }
        }
        Ok(())
    }
}

/// Structural flags of a cover.
pub fn check_cover(c: &Cover) -> CoverFlags {
    let d = &c.domain;
    let mut covered = vec![false; c.codomain.edge_count()];
    for w in &c.emap {
        for &e in &w.0 {
            covered[e.0] = true;
        }
    }
    let edge_surjective = covered.iter().all(|&b| b);
    let mut plus = true;
    let mut minus = true;
    for e in d.edges() {
        for f in d.edges() {
            if d.src(e) == d.src(f) && c.emap[e.0].first() != c.emap[f.0].first() {
                plus = false;
            }
            if d.rng(e) == d.rng(f) && c.emap[e.0].last() != c.emap[f.0].last() {
                minus = false;
            }
        }
    }
    CoverFlags {
        edge_surjective,
        plus_directional: plus,
        minus_directional: minus,
        bidirectional: plus && minus,
    }
}

/// `outer ∘ inner`: edge images are the outer images of the inner walks, concatenated.
pub fn compose_covers(outer: &Cover, inner: &Cover) -> Result<Cover> {
    if *inner.codomain != *outer.domain {
        return Err(Error::DomainMismatch(
            "inner codomain differs from outer domain".into(),
        ));
    }
    let vmap = inner.vmap.iter().map(|v| outer.vmap[v.0]).collect();
    let emap = inner
        .emap
        .iter()
        .map(|w| Walk(outer.apply_walk(&w.0)))
        .collect();
    Ok(Cover {
        domain: inner.domain.clone(),
        codomain: outer.codomain.clone(),
        vmap,
        emap,
    })
}

/// The basic graph obtained by subdividing every weighted edge into a chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasicExpansion {
    pub graph: BasicGraph,
    /// Basic vertex of each weighted vertex.
    pub embedding: Vec<usize>,
    /// For each weighted edge, the chain `v̌_{e,0} … v̌_{e,len}` of basic vertices.
    pub chains: Vec<Vec<usize>>,
    /// Unit-length weighted edges grouped by the basic edge they produce.
    pub merges: BTreeMap<(usize, usize), Vec<EdgeId>>,
}

impl BasicExpansion {
    /// Weighted edge and floor offset of an interior basic vertex, if any.
    pub fn interior_position(&self, v: usize) -> Option<(EdgeId, usize)> {
        self.chains.iter().enumerate().find_map(|(e, ch)| {
            let l = ch.len() - 1;
            (1..l).find(|&i| ch[i] == v).map(|i| (EdgeId(e), i))
        })
    }

    pub fn is_weighted_vertex(&self, v: usize) -> bool {
        self.embedding.contains(&v)
    }
}

/// Name of the `i`-th interior vertex on the chain of edge `e`.
pub fn interior_vertex_name(edge: &str, i: u64) -> String {
    format!("{edge}#{i}")
}

pub fn expand_to_basic(g: &WeightedGraph) -> Result<BasicExpansion> {
    let shape = &g.shape;
    let mut names: Vec<String> = shape.vertex_names().to_vec();
    for e in shape.edges() {
        for i in 1..g.len_of(e) {
            names.push(interior_vertex_name(shape.edge_name(e), i));
        }
    }
    let mut chain_names: Vec<Vec<String>> = Vec::new();
    let mut pairs: Vec<(String, String)> = Vec::new();
    for e in shape.edges() {
        let l = g.len_of(e);
        let mut ch = vec![shape.vertex_name(shape.src(e)).to_string()];
        for i in 1..l {
            ch.push(interior_vertex_name(shape.edge_name(e), i));
        }
        ch.push(shape.vertex_name(shape.rng(e)).to_string());
        for w in ch.windows(2) {
            pairs.push((w[0].clone(), w[1].clone()));
        }
        chain_names.push(ch);
    }
    let graph = BasicGraph::new(names, pairs)?;
    let idx = |n: &str| graph.vertex_id(n).expect("expanded vertex");
    let embedding = shape.vertex_names().iter().map(|n| idx(n)).collect();
    let chains: Vec<Vec<usize>> = chain_names
        .iter()
        .map(|ch| ch.iter().map(|n| idx(n)).collect())
        .collect();
    let mut merges: BTreeMap<(usize, usize), Vec<EdgeId>> = BTreeMap::new();
    for e in shape.edges() {
        if g.len_of(e) == 1 {
            let ch = &chains[e.0];
            merges.entry((ch[0], ch[1])).or_default().push(e);
        }
    }
    Ok(BasicExpansion { graph, embedding, chains, merges })
}

/// Vertex map between basic graphs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasicCover {
    pub domain: Arc<BasicGraph>,
    pub codomain: Arc<BasicGraph>,
    pub vmap: Vec<usize>,
}

/// Flags of a basic cover; errors if the map is not a homomorphism.
pub fn check_basic_cover(c: &BasicCover) -> Result<CoverFlags> {
    let d = &c.domain;
    for &(a, b) in d.edges() {
        if !c.codomain.has_edge(c.vmap[a], c.vmap[b]) {
            return Err(Error::HomomorphismViolation(format!(
                "basic edge ({}, {}) is not mapped to an edge",
                d.vertex_name(a),
                d.vertex_name(b)
            )));
        }
    }
    let image: BTreeSet<(usize, usize)> = d
        .edges()
        .iter()
        .map(|&(a, b)| (c.vmap[a], c.vmap[b]))
        .collect();
    let edge_surjective = image == *c.codomain.edges();
    let mut plus = true;
    let mut minus = true;
    for &(a, b) in d.edges() {
        for &(a2, b2) in d.edges() {
            if a == a2 && c.vmap[b] != c.vmap[b2] {
                plus = false;
            }
            if b == b2 && c.vmap[a] != c.vmap[a2] {
                minus = false;
            }
        }
    }
    Ok(CoverFlags {
        edge_surjective,
        plus_directional: plus,
        minus_directional: minus,
        bidirectional: plus && minus,
    })
}

/// Basic vertex reached after `offset` unit steps along the expansion of `walk`.
pub fn vertex_along_walk(
    cod: &WeightedGraph,
    cod_exp: &BasicExpansion,
    walk: &Walk,
    mut offset: u64,
) -> usize {
    for &e in &walk.0 {
        let l = cod.len_of(e);
        if offset < l {
            return cod_exp.chains[e.0][offset as usize];
        }
        offset -= l;
    }
    let last = walk.last();
    debug_assert_eq!(offset, 0);
    cod_exp.chains[last.0][cod.len_of(last) as usize]
}

/// Expansion of a weighted cover to a cover between the basic graphs.
#[derive(Clone, Debug)]
pub struct ExpandedCover {
    pub domain: BasicExpansion,
    pub codomain: BasicExpansion,
    pub cover: BasicCover,
}

pub fn expand_basic_cover(
    c: &Cover,
    dom: &WeightedGraph,
    cod: &WeightedGraph,
) -> Result<ExpandedCover> {
    c.check_lengths(dom, cod)
        .map_err(|e| Error::CoverViolation(e.to_string()))?;
    let flags = check_cover(c);
    if !flags.plus_directional || !flags.edge_surjective {
        return Err(Error::CoverViolation(
            "weighted covers must be +directional and edge-surjective".into(),
        ));
    }
    let dexp = expand_to_basic(dom)?;
    let cexp = expand_to_basic(cod)?;
    let mut vmap = vec![usize::MAX; dexp.graph.vertex_count()];
    for v in c.domain.vertices() {
        vmap[dexp.embedding[v.0]] = cexp.embedding[c.vmap[v.0].0];
    }
    for e in c.domain.edges() {
        for (i, &bv) in dexp.chains[e.0].iter().enumerate() {
            vmap[bv] = vertex_along_walk(cod, &cexp, &c.emap[e.0], i as u64);
        }
    }
    let cover = BasicCover {
        domain: Arc::new(dexp.graph.clone()),
        codomain: Arc::new(cexp.graph.clone()),
        vmap,
    };
    check_basic_cover(&cover)?;
    Ok(ExpandedCover { domain: dexp, codomain: cexp, cover })
}

/// Circuits found up to a length cap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuits {
    pub circuits: Vec<Walk>,
    /// True when some circuit is longer than the cap.
    pub truncated: bool,
}

/// All circuits with at most `max_len` edges, in lexicographic edge order.
pub fn enumerate_circuits(g: &FlexibleGraph, max_len: usize) -> Circuits {
    let mut found = Vec::new();
    let mut truncated = false;
    let limit = g.vertex_count();
    let mut path: Vec<EdgeId> = Vec::new();
    let mut used = vec![false; g.vertex_count()];
    for start in g.edges() {
        let s = g.src(start);
        used[s.0] = true;
        path.push(start);
        circuit_dfs(g, s, max_len, limit, &mut path, &mut used, &mut found, &mut truncated);
        path.pop();
        used[s.0] = false;
    }
    found.sort();
    Circuits { circuits: found.into_iter().map(Walk).collect(), truncated }
}

#[allow(clippy::too_many_arguments)]
fn circuit_dfs(
    g: &FlexibleGraph,
    start: VertexId,
    max_len: usize,
    limit: usize,
    path: &mut Vec<EdgeId>,
    used: &mut [bool],
    found: &mut Vec<Vec<EdgeId>>,
    truncated: &mut bool,
) {
    let end = g.rng(*path.last().unwrap());
    if end == start {
        if path.len() <= max_len {
            found.push(path.clone());
        } else {
            *truncated = true;
        }
        return;
    }
    if path.len() >= limit || used[end.0] || (path.len() >= max_len && *truncated) {
        return;
    }
    used[end.0] = true;
    for e in g.out_edges(end) {
        path.push(e);
        circuit_dfs(g, start, max_len, limit, path, used, found, truncated);
        path.pop();
    }
    used[end.0] = false;
}
