//! End-to-end acceptance criteria. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

#![allow(clippy::type_complexity)]

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use zdyn::bratteli::{
    check_nesting, enumerate_paths, min_path, vershik_successor, weighted_to_bv, bv_to_weighted,
    isomorphic_stationary, OrderedBratteliDiagram, PathPrefix, Successor,
};
use zdyn::coverings::{check_closing, check_regulated, krieger_markers, CoveringPresentation, CutPoints};
use zdyn::document::Document;
use zdyn::graphs::{Cover, EdgeId, FlexibleGraph};
use zdyn::stationary::{analyze_self_cover, check_continuity, check_overlap, straighten_mono, MonoGraph, OverallOverlap};
use zdyn::substitution::{array_window, check_recoding, RecodingVerdict};
use zdyn::{fixtures, Verdict};

type Outcome = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn cover_of(p: &CoveringPresentation) -> Cover {
    let CoveringPresentation::Stationary(s) = p else { panic!("stationary presentation expected") };
    s.cover().clone()
}

fn fibonacci_base() -> Cover {
    let g = Arc::new(FlexibleGraph::new(["v"], [("a", "v", "v"), ("b", "v", "v")]).unwrap());
    Cover::self_cover_from_names(g, &[("a", "a b"), ("b", "a")]).unwrap()
}

fn word(c: &Cover, e: &str) -> String {
    let g = &c.domain;
    c.image(g.edge_id(e).unwrap()).0.iter().map(|&x| g.edge_name(x).to_string()).collect::<Vec<_>>().join(" ")
}

fn straightening() -> Outcome {
    let a = analyze_self_cover(&fibonacci_base()).map_err(|e| e.to_string())?;
    ensure!(a.k == 2, "K = {}", a.k);
    ensure!(word(&a.cover, "a") == "a b a" && word(&a.cover, "b") == "a b", "φ² images {:?}", a.cover);
    let p = CoveringPresentation::stationary(a.cover.clone(), vec![1, 1]).unwrap();
    let twice = zdyn::coverings::telescope(&p, &CutPoints::Every(2)).unwrap();
    let composed = word(&cover_of(&twice), "a").replace(' ', "");
    let base = common::images(&CoveringPresentation::stationary(fibonacci_base(), vec![1, 1]).unwrap());
    let oracle: String = common::power(&base, &[0], 4).iter().map(|&x| ["a", "b"][x]).collect();
    ensure!(composed == "abaababa" && oracle == composed, "composed {composed}, oracle {oracle}");
    Ok(())
}

fn lim_sets() -> Outcome {
    let a = analyze_self_cover(&cover_of(&fixtures::example_two())).map_err(|e| e.to_string())?;
    let g = a.graph();
    let verts: Vec<&str> = a.lim_vertices().iter().map(|&v| g.vertex_name(v)).collect();
    ensure!(verts == ["v_l", "v_m", "v_r"], "lim V = {verts:?}");
    ensure!(a.names(&a.lim_last_set()) == ["e_a", "e_e", "e_f"], "lim_l = {:?}", a.names(&a.lim_last_set()));
    ensure!(a.names(&a.lim_first_set()) == ["e_a", "e_d", "e_f"], "lim_f = {:?}", a.names(&a.lim_first_set()));
    Ok(())
}

fn overlap() -> Outcome {
    // Witness depths per constant sequence, found by the oracle and frozen.
    let frozen_two: &[(&str, &str, &str, usize)] = &[
        ("e_a", "e_a", "e_b", 2),
        ("e_e", "e_d", "e_d", 1),
        ("e_f", "e_f", "e_b", 2),
        ("e_a", "e_a", "e_b", 3),
        ("e_f", "e_f", "e_b", 3),
        ("e_a", "e_a", "e_b", 4),
        ("e_f", "e_f", "e_b", 3),
        ("e_a", "e_a", "e_b", 5),
        ("e_f", "e_f", "e_b", 4),
    ];
    let frozen_fib: &[(&str, &str, &str, usize)] = &[("a", "a", "a", 2), ("b", "a", "a", 1)];
    for (p, frozen) in [(fixtures::example_two(), frozen_two), (fixtures::fibonacci(), frozen_fib)] {
        let a = analyze_self_cover(&cover_of(&p)).unwrap();
        let r = check_overlap(&a, 4, 8).map_err(|e| e.to_string())?;
        ensure!(r.overall == OverallOverlap::Bijective, "overall {:?}", r.overall);
        let g = a.graph();
        let images = common::images(&p);
        let mut found = Vec::new();
        for s in &r.sequences {
            for pair in &s.pairs {
                let mut w = vec![g.edge_id(&pair.before).unwrap().0];
                w.extend(s.sequence.walk.iter().map(|x| g.edge_id(x).unwrap().0));
                w.push(g.edge_id(&pair.after).unwrap().0);
                let oracle = common::first_occurrence(&images, &w, 8)
                    .map(|(e, n)| (g.edge_name(EdgeId(e)).to_string(), n));
                let got = pair.witness.as_ref().map(|o| (o.edge.clone(), o.n));
                ensure!(oracle == got, "{}·{:?}·{}: oracle {oracle:?}, got {got:?}", pair.before, s.sequence.walk, pair.after);
                let (e, n) = got.unwrap();
                found.push((pair.before.clone(), pair.after.clone(), e, n));
            }
        }
        let want: Vec<_> = frozen.iter().map(|&(a, b, e, n)| (a.into(), b.into(), e.into(), n)).collect();
        ensure!(found == want, "witnesses {found:?}");
    }
    Ok(())
}

fn continuity() -> Outcome {
    let two = weighted_to_bv(&fixtures::example_two()).unwrap();
    let r = check_continuity(two.mono().unwrap()).map_err(|e| e.to_string())?;
    ensure!(r.verdict == Verdict::Holds, "example 2: {:?}", r.verdict);
    let fib = MonoGraph::from_images(&["a".into(), "b".into()], &[vec![0, 1], vec![0]]).unwrap();
    let (k, straight) = straighten_mono(&fib).map_err(|e| e.to_string())?;
    let r = check_continuity(&straight).map_err(|e| e.to_string())?;
    ensure!(k == 2 && r.verdict == Verdict::Holds, "Fibonacci: K = {k}, {:?}", r.verdict);
    let r = check_continuity(&fixtures::continuity_conflict()).map_err(|e| e.to_string())?;
    ensure!(r.verdict == Verdict::Fails && r.conflict.is_some(), "conflict fixture: {:?}", r.verdict);
    Ok(())
}

fn round_trip() -> Outcome {
    for p in [fixtures::fibonacci(), fixtures::example_two()] {
        let back = bv_to_weighted(&weighted_to_bv(&p).unwrap(), 4).map_err(|e| e.to_string())?;
        ensure!(common::isomorphic_by_search(&back, &p), "oracle finds no isomorphism: {back:?}");
        ensure!(isomorphic_stationary(&back, &p), "library check disagrees");
        ensure!(p.lengths(3).unwrap() == back.lengths(3).unwrap(), "lengths differ");
    }
    Ok(())
}

fn random_mono(rng: &mut ChaCha8Rng) -> Option<OrderedBratteliDiagram> {
    let k = rng.gen_range(1..=4);
    let names: Vec<String> = (0..k).map(|i| format!("v{}", i + 1)).collect();
    let images: Vec<Vec<usize>> =
        (0..k).map(|_| (0..rng.gen_range(1..=4)).map(|_| rng.gen_range(0..k)).collect()).collect();
    let mono = MonoGraph::from_images(&names, &images).ok()?;
    OrderedBratteliDiagram::stationary(mono, vec![1; k]).ok()
}

fn successor_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut done = 0;
    while done < 200 {
        let Some(d) = random_mono(&mut rng) else { continue };
        done += 1;
        let depth = rng.gen_range(1..=4);
        for v in 0..d.vertex_count(depth).unwrap() {
            let oracle = common::sorted_paths(&d, depth, v);
            let listed: Vec<Vec<usize>> = enumerate_paths(&d, depth, v).unwrap().into_iter().map(|p| p.edges).collect();
            ensure!(listed == oracle, "enumeration differs at depth {depth}, vertex {v}");
            let mut walked = vec![min_path(&d, depth, v).unwrap()];
            while let Successor::Next(q) = vershik_successor(&d, walked.last().unwrap()).unwrap() {
                ensure!(walked.len() <= oracle.len(), "successor runs past the maximal path");
                walked.push(q);
            }
            let walked: Vec<Vec<usize>> = walked.into_iter().map(|p| p.edges).collect();
            ensure!(walked == oracle, "successor order differs at depth {depth}, vertex {v}");
        }
    }
    Ok(())
}

fn closing_and_regulation() -> Outcome {
    let mut problems = Vec::new();
    let two = fixtures::example_two();
    let c = check_closing(&two).unwrap().verdict;
    if c != Verdict::Holds {
        problems.push(format!("example 2 closing {c:?}"));
    }
    let l: Vec<u64> = (1..=4).collect();
    let reg = check_regulated(&two, &l, 4).unwrap();
    if reg.verdict != Verdict::Holds {
        let first = reg.levels.iter().find(|x| x.verdict == Verdict::Fails);
        problems.push(format!(
            "example 2 regulation {:?} (level {:?}, witnesses {:?})",
            reg.verdict,
            first.map(|x| x.level),
            first.map(|x| &x.witnesses)
        ));
    }
    let fib = fixtures::fibonacci();
    let reg = check_regulated(&fib, &l, 4).unwrap();
    if reg.levels[0].verdict != Verdict::Fails || reg.levels[0].witnesses != ["a", "b"] {
        problems.push(format!("Fibonacci level-1 regulation {:?}", reg.levels[0]));
    }
    let c = check_closing(&fib).unwrap();
    if c.verdict != Verdict::Holds || !c.witnesses.is_empty() {
        problems.push(format!("Fibonacci closing {:?}", c.verdict));
    }
    let c = check_closing(&fixtures::non_loop_fixed_edge()).unwrap().verdict;
    if c != Verdict::Fails {
        problems.push(format!("non-loop closing {c:?}"));
    }
    ensure!(problems.is_empty(), "{}", problems.join("; "));
    Ok(())
}

fn nesting() -> Outcome {
    for p in [fixtures::example_two(), fixtures::fibonacci()] {
        let d = weighted_to_bv(&p).unwrap();
        for n in 1..=4 {
            let r = check_nesting(&d, n, 4).map_err(|e| e.to_string())?;
            ensure!(r.verdict == Verdict::Holds, "level {n}: {:?}", r.verdict);
        }
    }
    let Document::Bratteli(d) = common::load("non-nesting.bratteli") else { return Err("fixture kind".into()) };
    let r = check_nesting(&d, 1, 4).map_err(|e| e.to_string())?;
    ensure!(r.verdict == Verdict::Fails, "non-nesting fixture: {:?}", r.verdict);
    let w = r.witness.ok_or("no witness")?;
    let projections: BTreeSet<&str> = w.targets.iter().map(|t| t.projection.as_str()).collect();
    ensure!(projections.len() > 1, "witness targets share a projection");
    let v = d.level(2).unwrap().vertex_id(&w.vertex).ok_or("unknown witness vertex")?;
    let top = common::sorted_paths(&d, 2, v).pop().unwrap();
    for t in &w.targets {
        let names: Vec<&str> = t.prefix.as_ref().ok_or("no prefix")?.iter().map(String::as_str).collect();
        let prefix = PathPrefix::from_names(&d, &names).unwrap();
        ensure!(prefix.edges[..2] == top[..], "prefix does not start on the top floor");
        let depth = prefix.depth();
        let end = d.level(depth).unwrap().edges()[*prefix.edges.last().unwrap()].rng;
        let order = common::sorted_paths(&d, depth, end);
        let at = order.iter().position(|x| *x == prefix.edges).unwrap();
        let next = order.get(at + 1).ok_or("prefix is maximal")?;
        let named = PathPrefix { edges: next.clone() }.names(&d).unwrap();
        ensure!(Some(&named) == t.successor.as_ref(), "successor {named:?} vs {:?}", t.successor);
        let base = d.level(2).unwrap().vertex_id(&t.base).unwrap();
        ensure!(next[..2] == common::sorted_paths(&d, 2, base)[0][..], "successor misses the base of {}", t.base);
        let proj = d.level(1).unwrap().edges()[next[0]].rng;
        ensure!(d.level(1).unwrap().vertices()[proj] == t.projection, "projection {}", t.projection);
    }
    Ok(())
}

/// Level-`to` cells `(edge, floor)` along the expansion of level-`from` edge `e`.
fn cells(p: &CoveringPresentation, from: usize, to: usize, e: EdgeId) -> Vec<(usize, u64)> {
    let walk = walk_down(p, from, to, e);
    let lens = p.lengths(to).unwrap();
    walk.iter().flat_map(|x| (0..lens[x.0]).map(move |f| (x.0, f))).collect()
}

/// Walks of the level graph leaving `at` (or entering it) until `need` units are covered.
fn contexts(p: &CoveringPresentation, level: usize, at: usize, need: u64, fwd: bool) -> Vec<Vec<EdgeId>> {
    let g = p.shape(level).unwrap();
    let lens = p.lengths(level).unwrap();
    let mut out = Vec::new();
    let mut stack = vec![(at, Vec::<EdgeId>::new(), 0u64)];
    while let Some((v, walk, len)) = stack.pop() {
        if len >= need {
            out.push(walk);
            continue;
        }
        let next = if fwd { g.out_edges(zdyn::graphs::VertexId(v)) } else { g.in_edges(zdyn::graphs::VertexId(v)) };
        for e in next {
            let mut w = walk.clone();
            w.push(e);
            let u = if fwd { g.rng(e).0 } else { g.src(e).0 };
            stack.push((u, w, len + lens[e.0]));
        }
    }
    out
}

fn krieger() -> Outcome {
    let p = fixtures::example_two();
    let (n, horizon) = (3, 5);
    let deep = horizon + 1;
    let g_deep = p.shape(deep).unwrap();
    let g_n = p.shape(n).unwrap();
    let lens_n = p.lengths(n).unwrap();
    let fixed_loop: Vec<bool> = g_n
        .edges()
        .map(|e| g_n.src(e) == g_n.rng(e) && (n + 1..=deep).all(|j| p.cover(j).unwrap().image(e).0 == [e]))
        .collect();
    for l in 1..=3u64 {
        let m = krieger_markers(&p, n, l, horizon).map_err(|e| e.to_string())?;
        ensure!(m.check.verdict() == Verdict::Holds, "L = {l}: library check {:?}", m.check.verdict());
        let h = m.determined_at;
        let g_h = p.shape(h).unwrap();
        let mut grid = BTreeSet::new();
        let mut residual = BTreeSet::new();
        for a in &m.atoms {
            if a.level == n {
                grid.insert((g_n.edge_id(&a.edge).unwrap().0, a.floor));
            } else {
                ensure!(a.level == h, "atom at level {}", a.level);
                residual.insert((g_h.edge_id(&a.edge).unwrap().0, a.floor));
            }
        }
        let per_edge: Vec<(Vec<(usize, u64)>, Vec<(usize, u64)>)> =
            g_deep.edges().map(|e| (cells(&p, deep, n, e), cells(&p, deep, h, e))).collect();
        let li = l as usize;
        let mut violations = Vec::new();
        for x in g_deep.edges() {
            let backs = contexts(&p, deep, g_deep.src(x).0, l, false);
            let fwds = contexts(&p, deep, g_deep.rng(x).0, l, true);
            for b in &backs {
                for f in &fwds {
                    let mut line_n = Vec::new();
                    let mut line_h = Vec::new();
                    for e in b.iter().rev().chain([&x]).chain(f) {
                        line_n.extend(&per_edge[e.0].0);
                        line_h.extend(&per_edge[e.0].1);
                    }
                    let origin: usize = b.iter().map(|e| per_edge[e.0].0.len()).sum();
                    let in_f: Vec<bool> =
                        line_n.iter().zip(&line_h).map(|(a, c)| grid.contains(a) || residual.contains(c)).collect();
                    for j in 0..per_edge[x.0].0.len() {
                        let at = origin + j;
                        if in_f[at] && (1..=li).any(|d| in_f[at + d]) {
                            violations.push(format!("overlap at {}@{j}", g_deep.edge_name(x)));
                        }
                        if !(at - li..=at + li).any(|i| in_f[i]) {
                            let tower = line_n[at].0;
                            if lens_n[tower] > l || !fixed_loop[tower] {
                                violations.push(format!("uncovered {}@{j}", g_deep.edge_name(x)));
                            }
                        }
                    }
                }
            }
        }
        ensure!(violations.is_empty(), "L = {l}: {} violations, first {}", violations.len(), violations[0]);
    }
    Ok(())
}

/// Level-`to` walk of a level-`from` edge.
fn walk_down(p: &CoveringPresentation, from: usize, to: usize, e: EdgeId) -> Vec<EdgeId> {
    let mut walk = vec![e];
    for j in (to + 1..=from).rev() {
        let c = p.cover(j).unwrap();
        walk = walk.iter().flat_map(|&x| c.image(x).0.clone()).collect();
    }
    walk
}

/// Level-`n` windows of radius `r` with the labels `(edge above, offset)` seen at their center.
fn recoding_windows(
    p: &CoveringPresentation,
    n: usize,
    r: usize,
    depth: usize,
) -> BTreeMap<Vec<(usize, bool)>, BTreeSet<(usize, u64)>> {
    let mut out: BTreeMap<_, BTreeSet<_>> = BTreeMap::new();
    let lens_n = p.lengths(n).unwrap();
    for level in n + 1..=depth {
        for root in p.shape(level).unwrap().edges() {
            let mut cols = Vec::new();
            for f in walk_down(p, level, n + 1, root) {
                let mut offset = 0;
                for x in walk_down(p, n + 1, n, f) {
                    for i in 0..lens_n[x.0] {
                        cols.push(((x.0, i == 0), (f.0, offset)));
                        offset += 1;
                    }
                }
            }
            for w in cols.windows(2 * r + 1) {
                out.entry(w.iter().map(|c| c.0).collect()).or_default().insert(w[r].1);
            }
        }
    }
    out
}

fn recoding() -> Outcome {
    let p = fixtures::example_two();
    let unambiguous = |r: usize| recoding_windows(&p, 1, r, 5).values().all(|s| s.len() == 1);
    let radius = (0..=4).find(|&r| unambiguous(r)).ok_or("oracle finds no radius up to 4")?;
    ensure!(radius == 2, "oracle radius {radius}, frozen value 2");
    let at = check_recoding(&p, 1, radius).map_err(|e| e.to_string())?;
    ensure!(at.verdict == RecodingVerdict::Determined, "radius {radius}: {:?}", at.verdict);
    let below = check_recoding(&p, 1, radius - 1).unwrap();
    ensure!(below.verdict == RecodingVerdict::Ambiguous, "radius {}: {:?}", radius - 1, below.verdict);
    let collision = fixtures::recoding_collision();
    for r in 0..=3 {
        let v = check_recoding(&collision, 1, r).unwrap().verdict;
        ensure!(v == RecodingVerdict::Ambiguous, "collision at radius {r}: {v:?}");
        ensure!(!recoding_windows(&collision, 1, r, 6).values().all(|s| s.len() == 1), "oracle disagrees at {r}");
    }
    Ok(())
}

fn arrays() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..100 {
        let p = if i % 2 == 0 { fixtures::fibonacci() } else { fixtures::example_two() };
        let level = rng.gen_range(1..=3);
        let seed = common::random_seed(&mut rng, &p, level);
        let s = rng.gen_range(-40..=10);
        let t = s + rng.gen_range(0..=50);
        let w = array_window(&p, &seed, level, s, t).map_err(|e| format!("{seed:?}: {e}"))?;
        ensure!(w.rows.len() == level + 1, "row count");
        for j in 0..=level {
            let g = p.shape(j).unwrap();
            let lens = p.lengths(j).unwrap();
            let starts: Vec<i64> = w.cells[j].iter().map(|c| c.start).filter(|&x| x >= s).collect();
            ensure!(w.cuts[j] == starts, "cuts of row {j}");
            ensure!(w.rows[j].len() as i64 == t - s + 1, "row {j} width");
            for c in &w.cells[j] {
                let len = lens[g.edge_id(&c.edge).unwrap().0] as i64;
                for col in c.start.max(s)..(c.start + len).min(t + 1) {
                    ensure!(w.rows[j][(col - s) as usize] == c.edge, "row {j} column {col}");
                }
            }
            if j == 0 {
                continue;
            }
            let cover = p.cover(j).unwrap();
            let below = p.shape(j - 1).unwrap();
            let below_lens = p.lengths(j - 1).unwrap();
            for c in &w.cells[j] {
                let mut at = c.start;
                let mut expected = Vec::new();
                for &x in &cover.image(g.edge_id(&c.edge).unwrap()).0 {
                    let len = below_lens[x.0] as i64;
                    if at <= t && at + len > s {
                        expected.push((at, below.edge_name(x).to_string()));
                    }
                    at += len;
                }
                let got: Vec<(i64, String)> = w.cells[j - 1]
                    .iter()
                    .filter(|d| d.start >= c.start && d.start < at)
                    .map(|d| (d.start, d.edge.clone()))
                    .collect();
                ensure!(got == expected, "segment under {}@{} at row {j}", c.edge, c.start);
            }
            let lower: BTreeSet<i64> = w.cuts[j - 1].iter().copied().collect();
            ensure!(w.cuts[j].iter().all(|x| lower.contains(x)), "cut monotonicity at row {j}");
        }
    }
    Ok(())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("fibonacci straightening", straightening),
        ("example-2 lim sets", lim_sets),
        ("overlap witnesses", overlap),
        ("continuity", continuity),
        ("conversion round trip", round_trip),
        ("successor oracle", successor_oracle),
        ("closing and regulation", closing_and_regulation),
        ("nesting", nesting),
        ("krieger markers", krieger),
        ("recoding", recoding),
        ("array consistency", arrays),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panic: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(()) => println!("criterion {:>2} PASS  {name}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
