//! Small stationary presentations used by the examples, tests and CLI samples.

use std::sync::Arc;

use crate::coverings::CoveringPresentation;
use crate::graphs::{Cover, FlexibleGraph};
use crate::stationary::MonoGraph;

fn stationary(vertices: &[&str], edges: &[(&str, &str, &str)], images: &[(&str, &str)]) -> CoveringPresentation {
    let g = Arc::new(FlexibleGraph::new(vertices.iter().copied(), edges.iter().copied()).expect("fixture graph"));
    let n = g.edge_count();
    let c = Cover::self_cover_from_names(g, images).expect("fixture cover");
    CoveringPresentation::stationary(c, vec![1; n]).expect("fixture presentation")
}

/// `a ↦ aba`, `b ↦ ab` on one vertex: the square of the Fibonacci substitution.
pub fn fibonacci() -> CoveringPresentation {
    stationary(&["v"], &[("a", "v", "v"), ("b", "v", "v")], &[("a", "a b a"), ("b", "a b")])
}

/// Three vertices with fixed loops at both ends and a growing middle.
pub fn example_two() -> CoveringPresentation {
    stationary(
        &["v_l", "v_m", "v_r"],
        &[
            ("e_a", "v_l", "v_l"),
            ("e_b", "v_l", "v_m"),
            ("e_c", "v_m", "v_l"),
            ("e_d", "v_m", "v_r"),
            ("e_e", "v_r", "v_m"),
            ("e_f", "v_r", "v_r"),
        ],
        &[
            ("e_a", "e_a"),
            ("e_b", "e_a e_b e_d e_e"),
            ("e_c", "e_d e_e e_c e_a"),
            ("e_d", "e_d e_e e_d e_f"),
            ("e_e", "e_f e_e"),
            ("e_f", "e_f"),
        ],
    )
}

/// A fixed edge `x : u → w` that is not a loop, so closing fails.
pub fn non_loop_fixed_edge() -> CoveringPresentation {
    stationary(
        &["u", "w"],
        &[("x", "u", "w"), ("y", "w", "u"), ("z", "u", "u")],
        &[("x", "x"), ("y", "y x y"), ("z", "x y z")],
    )
}

/// `a ↦ aaba`, `b ↦ bab` as a mono-graph: the continuity map is not well defined.
///
/// The images start with different letters, so this is no self-cover.
pub fn continuity_conflict() -> MonoGraph {
    MonoGraph::from_images(&["a".to_string(), "b".to_string()], &[vec![0, 0, 1, 0], vec![1, 0, 1]])
        .expect("fixture mono-graph")
}

/// Two fixed loops whose pair `(c, a)` never occurs adjacently deep enough to certify overlap.
pub fn overlap_unknown() -> CoveringPresentation {
    stationary(
        &["u", "w"],
        &[("a", "u", "u"), ("b", "u", "w"), ("c", "w", "u"), ("d", "w", "w")],
        &[("a", "a"), ("b", "a b"), ("c", "d c"), ("d", "d")],
    )
}

/// `a ↦ ab`, `b ↦ ab`: different letters with identical images.
pub fn recoding_collision() -> CoveringPresentation {
    stationary(&["v"], &[("a", "v", "v"), ("b", "v", "v")], &[("a", "a b"), ("b", "a b")])
}
