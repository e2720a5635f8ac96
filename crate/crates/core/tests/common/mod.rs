//! Brute-force oracles shared by the integration tests. None of them call the
//! library routine they are compared against.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::Rng;
use zdyn::bratteli::OrderedBratteliDiagram;
use zdyn::coverings::CoveringPresentation;
use zdyn::document::{self, Document};
use zdyn::graphs::{EdgeId, VertexId};
use zdyn::substitution::SeedRow;

pub fn fixture_path(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect()
}

pub fn load(name: &str) -> Document {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture file");
    document::parse(&text).expect("fixture parses")
}

/// Self-cover images of a stationary presentation as edge indices.
pub fn images(p: &CoveringPresentation) -> Vec<Vec<usize>> {
    let CoveringPresentation::Stationary(s) = p else { panic!("stationary presentation expected") };
    s.cover().emap.iter().map(|w| w.0.iter().map(|e| e.0).collect()).collect()
}

pub fn power(images: &[Vec<usize>], word: &[usize], n: usize) -> Vec<usize> {
    let mut w = word.to_vec();
    for _ in 0..n {
        w = w.iter().flat_map(|&a| images[a].iter().copied()).collect();
    }
    w
}

pub fn contains(hay: &[usize], needle: &[usize]) -> bool {
    needle.is_empty() || hay.windows(needle.len()).any(|w| w == needle)
}

/// Least `n ≥ 1`, then least edge index, with `word` inside `φⁿ(e)`.
pub fn first_occurrence(images: &[Vec<usize>], word: &[usize], depth: usize) -> Option<(usize, usize)> {
    for n in 1..=depth {
        for e in 0..images.len() {
            if contains(&power(images, &[e], n), word) {
                return Some((e, n));
            }
        }
    }
    None
}

/// Every path from the root into `v` at level `n`, sorted by reversed rank vector.
pub fn sorted_paths(d: &OrderedBratteliDiagram, n: usize, v: usize) -> Vec<Vec<usize>> {
    let mut paths: Vec<Vec<usize>> = vec![Vec::new()];
    for m in 1..=n {
        let lvl = d.level(m).unwrap();
        let mut next = Vec::new();
        for p in &paths {
            let at = if m == 1 { 0 } else { lvl_rng(d, m - 1, *p.last().unwrap()) };
            for (i, e) in lvl.edges().iter().enumerate() {
                if e.src == at {
                    let mut q = p.clone();
                    q.push(i);
                    next.push(q);
                }
            }
        }
        paths = next;
    }
    paths.retain(|p| lvl_rng(d, n, *p.last().unwrap()) == v);
    let key = |p: &Vec<usize>| -> Vec<usize> {
        (1..=n).rev().map(|m| d.level(m).unwrap().rank(p[m - 1])).collect()
    };
    paths.sort_by_key(key);
    paths
}

fn lvl_rng(d: &OrderedBratteliDiagram, m: usize, e: usize) -> usize {
    d.level(m).unwrap().edges()[e].rng
}

/// Structure of a stationary presentation: edges as (src, rng, multiplicity, image).
fn stationary_data(p: &CoveringPresentation) -> (usize, Vec<(usize, usize, u64, Vec<usize>)>) {
    let CoveringPresentation::Stationary(s) = p else { panic!("stationary presentation expected") };
    let g = s.graph();
    let edges = g
        .edges()
        .map(|e| (g.src(e).0, g.rng(e).0, s.multiplicities()[e.0], s.cover().image(e).0.iter().map(|x| x.0).collect()))
        .collect();
    (g.vertex_count(), edges)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Searches every edge bijection for one that carries the first presentation onto the second.
pub fn isomorphic_by_search(a: &CoveringPresentation, b: &CoveringPresentation) -> bool {
    let (va, ea) = stationary_data(a);
    let (vb, eb) = stationary_data(b);
    if va != vb || ea.len() != eb.len() {
        return false;
    }
    'perm: for sigma in permutations(ea.len()) {
        let mut vmap: Vec<Option<usize>> = vec![None; va];
        for (i, &(s, r, m, ref img)) in ea.iter().enumerate() {
            let (s2, r2, m2, ref img2) = eb[sigma[i]];
            if m != m2 || img.len() != img2.len() {
                continue 'perm;
            }
            for (x, y) in [(s, s2), (r, r2)] {
                match vmap[x] {
                    None => vmap[x] = Some(y),
                    Some(z) if z != y => continue 'perm,
                    _ => {}
                }
            }
            if img.iter().zip(img2).any(|(&x, &y)| sigma[x] != y) {
                continue 'perm;
            }
        }
        let hit: BTreeSet<_> = vmap.iter().flatten().collect();
        if hit.len() == va {
            return true;
        }
    }
    false
}

fn random_walk<R: Rng>(rng: &mut R, p: &CoveringPresentation, level: usize, from: VertexId, len: usize) -> Vec<EdgeId> {
    let g = p.shape(level).unwrap();
    let mut at = from;
    let mut out = Vec::new();
    for _ in 0..len {
        let outs = g.out_edges(at);
        let e = outs[rng.gen_range(0..outs.len())];
        out.push(e);
        at = g.rng(e);
    }
    out
}

fn closed_walk<R: Rng>(rng: &mut R, p: &CoveringPresentation, level: usize, at: VertexId) -> Vec<EdgeId> {
    let g = p.shape(level).unwrap();
    loop {
        let len = rng.gen_range(1..=6);
        let w = random_walk(rng, p, level, at, len);
        if g.rng(*w.last().unwrap()) == at {
            return w;
        }
    }
}

/// A legal seed: closed walk, connecting walk, closed walk.
pub fn random_seed<R: Rng>(rng: &mut R, p: &CoveringPresentation, level: usize) -> SeedRow {
    let g = p.shape(level).unwrap();
    let u = VertexId(rng.gen_range(0..g.vertex_count()));
    let left = closed_walk(rng, p, level, u);
    let len = rng.gen_range(0..4);
    let center = random_walk(rng, p, level, u, len);
    let w = center.last().map_or(u, |&e| g.rng(e));
    let right = closed_walk(rng, p, level, w);
    let names = |v: &[EdgeId]| v.iter().map(|&e| g.edge_name(e).to_string()).collect();
    SeedRow { level, left: names(&left), center: names(&center), right: names(&right) }
}
