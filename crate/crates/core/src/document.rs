//! The `zdyn/1` JSON document format.
//!
//! Every document is an object with `"kind"` and `"version": "zdyn/1"`; the remaining
//! fields mirror the library type. Ids are strings, orders are explicit ranks and walks
//! are arrays of edge ids.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::bratteli::{BvKind, BvLevel, OrderedBratteliDiagram, ROOT};
use crate::coverings::{CoveringPresentation, Tail};
use crate::error::{Error, Result};
use crate::graphs::{BasicGraph, Cover, FlexibleGraph, WeightedGraph};
use crate::stationary::MonoGraph;
use crate::substitution::{SeedRow, Substitution};

pub const VERSION: &str = "zdyn/1";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Document {
    BasicGraph(BasicGraph),
    WeightedGraph(WeightedGraph),
    FlexibleGraph(FlexibleGraph),
    Cover(Cover),
    Covering(CoveringPresentation),
    MonoGraph(MonoGraph),
    Bratteli(OrderedBratteliDiagram),
    Substitution(Substitution),
    SeedRow(SeedRow),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::BasicGraph(_) => "basic_graph",
            Document::WeightedGraph(_) => "weighted_graph",
            Document::FlexibleGraph(_) => "flexible_graph",
            Document::Cover(_) => "cover",
            Document::Covering(_) => "covering",
            Document::MonoGraph(_) => "mono_graph",
            Document::Bratteli(_) => "bratteli",
            Document::Substitution(_) => "substitution",
            Document::SeedRow(_) => "seed_row",
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    id: String,
    src: String,
    rng: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFlexible {
    vertices: Vec<String>,
    edges: Vec<RawEdge>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeightedEdge {
    id: String,
    src: String,
    rng: String,
    len: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeighted {
    vertices: Vec<String>,
    edges: Vec<RawWeightedEdge>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBasic {
    vertices: Vec<String>,
    edges: Vec<(String, String)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawImages {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vmap: Option<BTreeMap<String, String>>,
    emap: BTreeMap<String, Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCover {
    domain: RawFlexible,
    codomain: RawFlexible,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vmap: Option<BTreeMap<String, String>>,
    emap: BTreeMap<String, Vec<String>>,
}

#[derive(Serialize, Deserialize, Clone, Copy)]
#[serde(rename_all = "snake_case")]
enum RawTail {
    Truncated,
    RepeatLast,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "presentation", rename_all = "snake_case", deny_unknown_fields)]
enum RawCovering {
    Stationary {
        graph: RawFlexible,
        emap: BTreeMap<String, Vec<String>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        multiplicities: Option<BTreeMap<String, u64>>,
    },
    FinitePrefix {
        tail: RawTail,
        levels: Vec<RawWeighted>,
        covers: Vec<RawImages>,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRankedEdge {
    id: String,
    src: String,
    rng: String,
    rank: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMono {
    vertices: Vec<String>,
    edges: Vec<RawRankedEdge>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "presentation", rename_all = "snake_case", deny_unknown_fields)]
enum RawBratteli {
    Stationary {
        mono: RawMono,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        multiplicities: Option<BTreeMap<String, u64>>,
    },
    FinitePrefix {
        tail: RawTail,
        levels: Vec<RawMono>,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSubstitution {
    alphabet: Vec<String>,
    images: BTreeMap<String, Vec<String>>,
}

fn semantic(e: Error) -> Error {
    match e {
        Error::Syntax { .. } | Error::Semantic(_) => e,
        other => Error::Semantic(other.to_string()),
    }
}

fn flexible(raw: RawFlexible) -> Result<FlexibleGraph> {
    FlexibleGraph::new(raw.vertices, raw.edges.into_iter().map(|e| (e.id, e.src, e.rng)))
}

fn flexible_raw(g: &FlexibleGraph) -> RawFlexible {
    RawFlexible {
        vertices: g.vertex_names().to_vec(),
        edges: g
            .edges()
            .map(|e| RawEdge {
                id: g.edge_name(e).to_string(),
                src: g.vertex_name(g.src(e)).to_string(),
                rng: g.vertex_name(g.rng(e)).to_string(),
            })
            .collect(),
    }
}

fn weighted(raw: RawWeighted) -> Result<WeightedGraph> {
    let lens: BTreeMap<String, u64> = raw.edges.iter().map(|e| (e.id.clone(), e.len)).collect();
    let shape = FlexibleGraph::new(raw.vertices, raw.edges.into_iter().map(|e| (e.id, e.src, e.rng)))?;
    let len = shape.edges().map(|e| lens[shape.edge_name(e)]).collect();
    WeightedGraph::new(Arc::new(shape), len)
}

fn weighted_raw(g: &WeightedGraph) -> RawWeighted {
    let f = flexible_raw(&g.shape);
    RawWeighted {
        vertices: f.vertices,
        edges: f
            .edges
            .into_iter()
            .zip(&g.len)
            .map(|(e, &len)| RawWeightedEdge { id: e.id, src: e.src, rng: e.rng, len })
            .collect(),
    }
}

fn cover_from(dom: Arc<FlexibleGraph>, cod: Arc<FlexibleGraph>, images: RawImages) -> Result<Cover> {
    let mut emap = Vec::with_capacity(dom.edge_count());
    for e in dom.edges() {
        let name = dom.edge_name(e);
        let walk = images
            .emap
            .get(name)
            .ok_or_else(|| Error::Semantic(format!("no image for edge {name}")))?;
        if walk.is_empty() {
            return Err(Error::Semantic(format!("image of edge {name} is empty")));
        }
        emap.push(cod.walk_from_names(&walk.join(" "))?);
    }
    if let Some(extra) = images.emap.keys().find(|k| dom.edge_id(k).is_none()) {
        return Err(Error::Semantic(format!("image given for unknown edge {extra}")));
    }
    match images.vmap {
        None => Cover::from_edge_images(dom, cod, emap),
        Some(vm) => {
            let mut vmap = Vec::new();
            for v in dom.vertices() {
                let name = dom.vertex_name(v);
                let image = vm.get(name).ok_or_else(|| Error::Semantic(format!("no image for vertex {name}")))?;
                vmap.push(cod.vertex_id(image).ok_or_else(|| Error::Semantic(format!("unknown vertex {image}")))?);
            }
            Cover::new(dom, cod, vmap, emap)
        }
    }
}

fn images_raw(c: &Cover) -> RawImages {
    RawImages {
        vmap: Some(
            c.domain
                .vertices()
                .map(|v| (c.domain.vertex_name(v).to_string(), c.codomain.vertex_name(c.vmap[v.0]).to_string()))
                .collect(),
        ),
        emap: c
            .domain
            .edges()
            .map(|e| (c.domain.edge_name(e).to_string(), c.codomain.walk_names(&c.emap[e.0])))
            .collect(),
    }
}

fn tail_of(t: RawTail) -> Tail {
    match t {
        RawTail::Truncated => Tail::Truncated,
        RawTail::RepeatLast => Tail::RepeatLastAsStationary,
    }
}

fn raw_tail(t: Tail) -> RawTail {
    match t {
        Tail::Truncated => RawTail::Truncated,
        Tail::RepeatLastAsStationary => RawTail::RepeatLast,
    }
}

fn per_name(names: &[String], given: Option<BTreeMap<String, u64>>, what: &str) -> Result<Vec<u64>> {
    let Some(map) = given else { return Ok(vec![1; names.len()]) };
    if let Some(extra) = map.keys().find(|k| !names.contains(k)) {
        return Err(Error::Semantic(format!("multiplicity given for unknown {what} {extra}")));
    }
    Ok(names.iter().map(|n| map.get(n).copied().unwrap_or(1)).collect())
}

fn covering(raw: RawCovering) -> Result<CoveringPresentation> {
    match raw {
        RawCovering::Stationary { graph, emap, multiplicities } => {
            let g = Arc::new(flexible(graph)?);
            let names: Vec<String> = g.edges().map(|e| g.edge_name(e).to_string()).collect();
            let mult = per_name(&names, multiplicities, "edge")?;
            let cover = cover_from(g.clone(), g, RawImages { vmap: None, emap })?;
            CoveringPresentation::stationary(cover, mult)
        }
        RawCovering::FinitePrefix { tail, levels, covers } => {
            let levels = levels.into_iter().map(weighted).collect::<Result<Vec<_>>>()?;
            if covers.len() + 1 != levels.len() {
                return Err(Error::Semantic("a finite prefix needs one cover per level after the first".into()));
            }
            let covers = covers
                .into_iter()
                .enumerate()
                .map(|(i, c)| cover_from(levels[i + 1].shape.clone(), levels[i].shape.clone(), c))
                .collect::<Result<Vec<_>>>()?;
            CoveringPresentation::finite_prefix(levels, covers, tail_of(tail))
        }
    }
}

fn covering_raw(p: &CoveringPresentation) -> RawCovering {
    match p {
        CoveringPresentation::Stationary(s) => {
            let g = s.graph();
            RawCovering::Stationary {
                graph: flexible_raw(g),
                emap: images_raw(s.cover()).emap,
                multiplicities: Some(
                    g.edges().map(|e| (g.edge_name(e).to_string(), s.multiplicities()[e.0])).collect(),
                ),
            }
        }
        CoveringPresentation::FinitePrefix(f) => RawCovering::FinitePrefix {
            tail: raw_tail(f.tail()),
            levels: f.levels().iter().map(weighted_raw).collect(),
            covers: f.covers().iter().map(images_raw).collect(),
        },
    }
}

fn mono(raw: RawMono) -> Result<MonoGraph> {
    MonoGraph::new(raw.vertices, raw.edges.into_iter().map(|e| (e.id, e.src, e.rng, e.rank)))
}

fn mono_raw(m: &MonoGraph) -> RawMono {
    RawMono {
        vertices: m.vertex_names().to_vec(),
        edges: m
            .edges()
            .iter()
            .enumerate()
            .map(|(i, e)| RawRankedEdge {
                id: e.id.clone(),
                src: m.vertex_name(e.src).to_string(),
                rng: m.vertex_name(e.rng).to_string(),
                rank: m.rank(i),
            })
            .collect(),
    }
}

fn bratteli(raw: RawBratteli) -> Result<OrderedBratteliDiagram> {
    match raw {
        RawBratteli::Stationary { mono: m, multiplicities } => {
            let m = mono(m)?;
            let mult = per_name(m.vertex_names(), multiplicities, "vertex")?;
            OrderedBratteliDiagram::stationary(m, mult)
        }
        RawBratteli::FinitePrefix { tail, levels } => {
            let mut below = vec![ROOT.to_string()];
            let mut out = Vec::new();
            for raw in levels {
                let edges = raw.edges.into_iter().map(|e| (e.id, e.src, e.rng, e.rank)).collect();
                let lvl = BvLevel::from_names(&below, raw.vertices, edges)?;
                below = lvl.vertices().to_vec();
                out.push(lvl);
            }
            OrderedBratteliDiagram::finite_prefix(out, tail_of(tail))
        }
    }
}

fn bratteli_raw(d: &OrderedBratteliDiagram) -> RawBratteli {
    match d.kind() {
        BvKind::Stationary { mono, multiplicities } => RawBratteli::Stationary {
            mono: mono_raw(mono),
            multiplicities: Some(mono.vertex_names().iter().cloned().zip(multiplicities.iter().copied()).collect()),
        },
        BvKind::FinitePrefix { tail } => {
            let mut below = vec![ROOT.to_string()];
            let mut levels = Vec::new();
            for lvl in d.prefix_levels().unwrap() {
                let edges = lvl
                    .edges()
                    .iter()
                    .enumerate()
                    .map(|(i, e)| RawRankedEdge {
                        id: e.id.clone(),
                        src: below[e.src].clone(),
                        rng: lvl.vertices()[e.rng].clone(),
                        rank: lvl.rank(i),
                    })
                    .collect();
                levels.push(RawMono { vertices: lvl.vertices().to_vec(), edges });
                below = lvl.vertices().to_vec();
            }
            RawBratteli::FinitePrefix { tail: raw_tail(*tail), levels }
        }
    }
}

fn substitution(raw: RawSubstitution) -> Result<Substitution> {
    let mut images = Vec::new();
    for a in &raw.alphabet {
        let img = raw.images.get(a).ok_or_else(|| Error::Semantic(format!("no image for letter {a}")))?;
        let ids = img
            .iter()
            .map(|b| {
                raw.alphabet
                    .iter()
                    .position(|x| x == b)
                    .ok_or_else(|| Error::Semantic(format!("unknown letter {b} in the image of {a}")))
            })
            .collect::<Result<Vec<_>>>()?;
        images.push(ids);
    }
    if let Some(extra) = raw.images.keys().find(|k| !raw.alphabet.contains(k)) {
        return Err(Error::Semantic(format!("image given for unknown letter {extra}")));
    }
    Substitution::new(raw.alphabet, images)
}

fn substitution_raw(s: &Substitution) -> RawSubstitution {
    RawSubstitution {
        alphabet: s.letters().to_vec(),
        images: s
            .letters()
            .iter()
            .zip(s.images())
            .map(|(a, img)| (a.clone(), img.iter().map(|&b| s.letters()[b].clone()).collect()))
            .collect(),
    }
}

fn basic(raw: RawBasic) -> Result<BasicGraph> {
    BasicGraph::new(raw.vertices, raw.edges)
}

fn basic_raw(g: &BasicGraph) -> RawBasic {
    RawBasic {
        vertices: g.vertex_names().to_vec(),
        edges: g
            .edges()
            .iter()
            .map(|&(a, b)| (g.vertex_name(a).to_string(), g.vertex_name(b).to_string()))
            .collect(),
    }
}

fn payload<T: for<'de> Deserialize<'de>>(body: Map<String, Value>) -> Result<T> {
    serde_json::from_value(Value::Object(body)).map_err(|e| Error::Semantic(e.to_string()))
}

pub fn parse(text: &str) -> Result<Document> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    from_value(value)
}

pub fn from_value(value: Value) -> Result<Document> {
    let Value::Object(mut body) = value else {
        return Err(Error::Semantic("a document must be a JSON object".into()));
    };
    match body.remove("version") {
        Some(Value::String(v)) if v == VERSION => {}
        Some(other) => return Err(Error::Semantic(format!("unsupported version {other}"))),
        None => return Err(Error::Semantic("missing \"version\"".into())),
    }
    let kind = match body.remove("kind") {
        Some(Value::String(k)) => k,
        _ => return Err(Error::Semantic("missing \"kind\"".into())),
    };
    let doc = match kind.as_str() {
        "basic_graph" => basic(payload(body)?).map(Document::BasicGraph),
        "flexible_graph" => flexible(payload(body)?).map(Document::FlexibleGraph),
        "weighted_graph" => weighted(payload(body)?).map(Document::WeightedGraph),
        "cover" => {
            let raw: RawCover = payload(body)?;
            let dom = Arc::new(flexible(raw.domain).map_err(semantic)?);
            let cod = Arc::new(flexible(raw.codomain).map_err(semantic)?);
            cover_from(dom, cod, RawImages { vmap: raw.vmap, emap: raw.emap }).map(Document::Cover)
        }
        "covering" => covering(payload(body)?).map(Document::Covering),
        "mono_graph" => mono(payload(body)?).map(Document::MonoGraph),
        "bratteli" => bratteli(payload(body)?).map(Document::Bratteli),
        "substitution" => substitution(payload(body)?).map(Document::Substitution),
        "seed_row" => payload::<SeedRow>(body).map(Document::SeedRow),
        other => return Err(Error::UnsupportedKind(other.to_string())),
    };
    doc.map_err(semantic)
}

fn tagged<T: Serialize>(kind: &str, raw: T) -> Value {
    let mut v = serde_json::to_value(raw).expect("documents serialize");
    let obj = v.as_object_mut().expect("documents are objects");
    let mut out = Map::new();
    out.insert("kind".into(), json!(kind));
    out.insert("version".into(), json!(VERSION));
    out.append(obj);
    Value::Object(out)
}

pub fn to_value(doc: &Document) -> Value {
    let kind = doc.kind();
    match doc {
        Document::BasicGraph(g) => tagged(kind, basic_raw(g)),
        Document::WeightedGraph(g) => tagged(kind, weighted_raw(g)),
        Document::FlexibleGraph(g) => tagged(kind, flexible_raw(g)),
        Document::Cover(c) => {
            let images = images_raw(c);
            let raw = RawCover {
                domain: flexible_raw(&c.domain),
                codomain: flexible_raw(&c.codomain),
                vmap: images.vmap,
                emap: images.emap,
            };
            tagged(kind, raw)
        }
        Document::Covering(p) => tagged(kind, covering_raw(p)),
        Document::MonoGraph(m) => tagged(kind, mono_raw(m)),
        Document::Bratteli(d) => tagged(kind, bratteli_raw(d)),
        Document::Substitution(s) => tagged(kind, substitution_raw(s)),
        Document::SeedRow(s) => tagged(kind, s),
    }
}

pub fn serialize(doc: &Document) -> String {
    serde_json::to_string_pretty(&to_value(doc)).expect("documents serialize")
}

/// A comma-separated list of non-negative integers; a trailing `...` continues the
/// arithmetic progression of the last two entries up to `len` entries.
pub fn parse_int_list(text: &str, len: Option<usize>) -> Result<Vec<u64>> {
    let mut parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let extend = matches!(parts.last(), Some(&"...") | Some(&"…"));
    if extend {
        parts.pop();
    }
    let mut out = parts
        .iter()
        .map(|p| p.parse::<u64>().map_err(|_| Error::InvalidSequence(format!("not a non-negative integer: {p:?}"))))
        .collect::<Result<Vec<_>>>()?;
    if extend {
        let Some(target) = len else {
            return Err(Error::InvalidSequence("a trailing ... needs a target length".into()));
        };
        if out.len() < 2 {
            return Err(Error::InvalidSequence("a trailing ... needs two entries to continue".into()));
        }
        let (a, b) = (out[out.len() - 2], out[out.len() - 1]);
        let step = b.checked_sub(a).ok_or_else(|| Error::InvalidSequence("only nondecreasing lists continue".into()))?;
        while out.len() < target {
            let next = out.last().unwrap().checked_add(step).ok_or(Error::LengthOverflow)?;
            out.push(next);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bratteli::weighted_to_bv;
    use crate::fixtures;

    fn round_trip(doc: Document) {
        let text = serialize(&doc);
        assert_eq!(parse(&text).unwrap(), doc, "{text}");
    }

    #[test]
    fn fixtures_round_trip() {
        for p in [fixtures::fibonacci(), fixtures::example_two(), CoveringPresentation::singleton()] {
            round_trip(Document::Bratteli(weighted_to_bv(&p).unwrap()));
            round_trip(Document::MonoGraph(weighted_to_bv(&p).unwrap().mono().unwrap().clone()));
            round_trip(Document::Cover(match &p {
                CoveringPresentation::Stationary(s) => s.cover().clone(),
                _ => unreachable!(),
            }));
            round_trip(Document::WeightedGraph(p.level_graph(2).unwrap()));
            round_trip(Document::Covering(p));
        }
        let prefix =
            crate::coverings::telescope(&fixtures::example_two(), &crate::coverings::CutPoints::Explicit(vec![1, 3]))
                .unwrap();
        round_trip(Document::Bratteli(weighted_to_bv(&prefix).unwrap()));
        round_trip(Document::Covering(prefix));
        round_trip(Document::Substitution(Substitution::from_names(&[("a", "aba"), ("b", "ab")]).unwrap()));
        round_trip(Document::BasicGraph(BasicGraph::new(["x", "y"], [("x", "y"), ("y", "x")]).unwrap()));
        round_trip(Document::SeedRow(SeedRow {
            level: 2,
            left: vec!["a".into()],
            center: vec![],
            right: vec!["b".into(), "a".into()],
        }));
    }

    #[test]
    fn errors_are_classified() {
        let truncated = r#"{"kind": "mono_graph", "version": "zdyn/1", "vertices": ["v"#;
        assert!(matches!(parse(truncated), Err(Error::Syntax { line: 1, .. })));
        let gap = r#"{"kind": "mono_graph", "version": "zdyn/1", "vertices": ["v"],
            "edges": [{"id": "x", "src": "v", "rng": "v", "rank": 2}]}"#;
        match parse(gap) {
            Err(Error::Semantic(m)) => assert!(m.contains("rank gap at vertex v"), "{m}"),
            other => panic!("{other:?}"),
        }
        let unknown = r#"{"kind": "torus", "version": "zdyn/1"}"#;
        assert_eq!(parse(unknown), Err(Error::UnsupportedKind("torus".into())));
        let version = r#"{"kind": "mono_graph", "version": "zdyn/0"}"#;
        assert!(matches!(parse(version), Err(Error::Semantic(_))));
    }

    #[test]
    fn int_lists() {
        assert_eq!(parse_int_list("1, 2,3", None).unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_int_list("1,2,...", Some(5)).unwrap(), vec![1, 2, 3, 4, 5]);
        assert!(parse_int_list("1,x", None).is_err());
        assert!(parse_int_list("1,...", Some(3)).is_err());
    }
}
