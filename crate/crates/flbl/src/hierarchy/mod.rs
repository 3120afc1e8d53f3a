//! Edge and vertex expander hierarchies.
//!
//! Exact mode enumerates cuts and is limited to small graphs; heuristic mode
//! runs the same improvement loop with spectral and local candidate cuts and
//! only certifies the pieces small enough to be checked exhaustively.

mod edge;
mod spectral;
mod vertex;

use std::fmt;

use thiserror::Error;

pub use edge::{build_edge_hierarchy, edge_separator, verify_edge_expanding, EdgeLevelAssignment};
pub use vertex::{
    build_vertex_hierarchy, vertex_separator, verify_vertex_expanding, LevelComponent,
    VertexCut, VertexExpansion, VertexLevelAssignment,
};

/// Default cap on exhaustive enumeration.
pub const DEFAULT_N_EXACT: usize = 18;

/// Size cap for exact mode, overridable through `FLBL_NEXACT`.
pub fn n_exact() -> usize {
    std::env::var("FLBL_NEXACT")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_N_EXACT)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Heuristic,
}

/// Nonnegative rational expansion parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Phi {
    pub num: u64,
    pub den: u64,
}

impl Phi {
    pub const HALF: Phi = Phi { num: 1, den: 2 };
    pub const ONE: Phi = Phi { num: 1, den: 1 };

    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0);
        Phi { num, den }
    }

    /// ⌊f/φ⌋
    pub fn budget(&self, f: usize) -> usize {
        (f as u64 * self.den / self.num) as usize
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Phi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HierarchyError {
    #[error("input graph is disconnected")]
    Disconnected,
    #[error("exact mode is capped at {cap} vertices but the graph has {n}; use heuristic mode or raise FLBL_NEXACT")]
    SizeCap { n: usize, cap: usize },
}

/// Outcome of an exhaustive edge-expansion check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expansion {
    Expanding,
    /// A vertex set whose cut violates the inequality.
    Violated(Vec<usize>),
}

impl Expansion {
    pub fn holds(&self) -> bool {
        matches!(self, Expansion::Expanding)
    }
}

/// Sorted-list lexicographic order on vertex bitmasks.
pub(crate) fn lex_less(a: u64, b: u64) -> bool {
    if a == b {
        return false;
    }
    let d = a ^ b;
    let low = d & d.wrapping_neg();
    let above = !((low << 1).wrapping_sub(1));
    if a & low != 0 {
        // a lists `low` next; b either ends (b is a prefix, so smaller) or
        // continues with something larger
        b & above != 0
    } else {
        a & above == 0
    }
}

pub(crate) fn mask_to_vec(mask: u64) -> Vec<usize> {
    (0..64).filter(|&i| mask >> i & 1 == 1).collect()
}

/// Components of `g` restricted to edges where `keep` holds, as sorted vertex lists,
/// ordered by smallest vertex.
pub(crate) fn components_where(g: &crate::Graph, keep: impl Fn(usize) -> bool) -> Vec<Vec<usize>> {
    let mut dsu = crate::dsu::Dsu::new(g.n());
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        if keep(e) {
            dsu.union(u, v);
        }
    }
    let labels = dsu.labels();
    let mut out = vec![Vec::new(); dsu.set_count()];
    for (v, &c) in labels.iter().enumerate() {
        out[c].push(v);
    }
    out
}
