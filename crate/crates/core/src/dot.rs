//! Graphviz DOT export.

use std::fmt::Write;

use crate::bratteli::OrderedBratteliDiagram;
use crate::document::Document;
use crate::error::{Error, Result};
use crate::graphs::{FlexibleGraph, WeightedGraph};
use crate::stationary::MonoGraph;

#[derive(Clone, Copy, Debug)]
pub struct DotOptions {
    /// Covering level to draw.
    pub level: usize,
    /// Last Bratteli level to draw.
    pub depth: usize,
}

impl Default for DotOptions {
    fn default() -> Self {
        DotOptions { level: 1, depth: 3 }
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn flexible(out: &mut String, g: &FlexibleGraph, label: impl Fn(usize) -> String) {
    for v in g.vertex_names() {
        writeln!(out, "  {};", quote(v)).unwrap();
    }
    for e in g.edges() {
        writeln!(
            out,
            "  {} -> {} [label={}];",
            quote(g.vertex_name(g.src(e))),
            quote(g.vertex_name(g.rng(e))),
            quote(&label(e.0))
        )
        .unwrap();
    }
}

fn weighted(out: &mut String, g: &WeightedGraph) {
    flexible(out, &g.shape, |e| format!("{}:{}", g.shape.edge_name(crate::graphs::EdgeId(e)), g.len[e]));
}

fn mono(out: &mut String, m: &MonoGraph) {
    for v in m.vertex_names() {
        writeln!(out, "  {};", quote(v)).unwrap();
    }
    for (i, e) in m.edges().iter().enumerate() {
        writeln!(
            out,
            "  {} -> {} [label={}];",
            quote(m.vertex_name(e.src)),
            quote(m.vertex_name(e.rng)),
            quote(&format!("{}/{}", e.id, m.rank(i)))
        )
        .unwrap();
    }
}

fn bratteli(out: &mut String, d: &OrderedBratteliDiagram, depth: usize) -> Result<()> {
    let depth = d.max_level().map_or(depth, |m| depth.min(m));
    let node = |n: usize, v: &str| quote(&format!("{n}:{v}"));
    for n in 0..=depth {
        writeln!(out, "  subgraph level_{n} {{").unwrap();
        writeln!(out, "    rank=same;").unwrap();
        for v in d.vertices(n)? {
            writeln!(out, "    {} [label={}];", node(n, &v), quote(&v)).unwrap();
        }
        writeln!(out, "  }}").unwrap();
    }
    for n in 1..=depth {
        let lvl = d.level(n)?;
        let below = d.vertices(n - 1)?;
        for (i, e) in lvl.edges().iter().enumerate() {
            writeln!(
                out,
                "  {} -> {} [label={}];",
                node(n - 1, &below[e.src]),
                node(n, &lvl.vertices()[e.rng]),
                quote(&format!("{}/{}", e.id, lvl.rank(i)))
            )
            .unwrap();
        }
    }
    Ok(())
}

/// Weighted edges are labeled `id:len`, ranked edges `id/rank`.
pub fn export_dot(doc: &Document, opts: DotOptions) -> Result<String> {
    let mut out = String::from("digraph zdyn {\n");
    match doc {
        Document::BasicGraph(g) => {
            for v in g.vertex_names() {
                writeln!(out, "  {};", quote(v)).unwrap();
            }
            for &(a, b) in g.edges() {
                writeln!(out, "  {} -> {};", quote(g.vertex_name(a)), quote(g.vertex_name(b))).unwrap();
            }
        }
        Document::FlexibleGraph(g) => flexible(&mut out, g, |e| g.edge_name(crate::graphs::EdgeId(e)).to_string()),
        Document::WeightedGraph(g) => weighted(&mut out, g),
        Document::Covering(p) => weighted(&mut out, &p.level_graph(opts.level)?),
        Document::MonoGraph(m) => mono(&mut out, m),
        Document::Bratteli(d) => {
            out.push_str("  rankdir=BT;\n");
            bratteli(&mut out, d, opts.depth)?;
        }
        other => return Err(Error::UnsupportedKind(other.kind().to_string())),
    }
    out.push_str("}\n");
    Ok(out)
}
