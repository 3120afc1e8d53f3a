//! The level-minimum spanning forest T*, its Euler tour, the level-ℓ trees
//! and the weighted-tour metric (distances, balls, dyadic blocks).

use thiserror::Error;

use crate::dsu::Dsu;
use crate::hierarchy::{EdgeLevelAssignment, Phi};
use crate::Graph;

pub const NONE: u32 = u32::MAX;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EulerError {
    #[error("element at position {0} is not on this tour")]
    NotOnTour(usize),
    #[error("interval [{lo}, {hi}) is not inside the padded tour of weight {pad}")]
    Misaligned { lo: usize, hi: usize, pad: usize },
}

/// A tour element: a vertex (first appearance) or an oriented tree edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Elem {
    Vertex(usize),
    Edge { id: usize, from: usize, to: usize },
}

/// A level-ℓ tree: a component of T* restricted to edges of level ≤ ℓ.
#[derive(Clone, Debug)]
pub struct LevelTree {
    pub root: usize,
    /// Global tour positions of its elements, increasing.
    pub positions: Vec<usize>,
}

impl LevelTree {
    /// Tree id: global position of its first element (the root).
    pub fn id(&self) -> usize {
        self.positions[0]
    }
}

#[derive(Clone, Debug)]
pub struct LevelView {
    pub trees: Vec<LevelTree>,
    /// Per global position: index of the containing level-ℓ tree, or NONE.
    pub tree_of_pos: Vec<u32>,
    /// Per global position: index within that tree's tour.
    pub local: Vec<u32>,
}

#[derive(Clone, Debug)]
pub struct EulerFrame {
    pub h: u32,
    pub level: Vec<u32>,
    pub in_tree: Vec<bool>,
    pub tstar: Vec<usize>,
    pub tour: Vec<Elem>,
    /// vertex → global tour position
    pub dfs: Vec<usize>,
    /// tree edge → position of the parent-to-child occurrence
    pub down_pos: Vec<usize>,
    /// tree edge → position of the child-to-parent occurrence
    pub up_pos: Vec<usize>,
    pub parent_of_edge: Vec<usize>,
    pub child_of_edge: Vec<usize>,
    /// Tour positions where each T* component starts, increasing.
    pub comp_starts: Vec<usize>,
    /// `levels[ℓ-1]`
    pub levels: Vec<LevelView>,
    /// `nontree[ℓ-1]`: non-tree edges of level ℓ, by id.
    pub nontree: Vec<Vec<usize>>,
    /// `heavy[ℓ-1][v]`: v is incident to a level-ℓ non-tree edge.
    pub heavy: Vec<Vec<bool>>,
}

/// Builds T* (Kruskal on (level, id)), the Euler tour rooted at the smallest
/// vertex of each component with children in ascending id, and all level trees.
pub fn build_frame(g: &Graph, levels: &EdgeLevelAssignment) -> EulerFrame {
    let n = g.n();
    let m = g.m();
    let h = levels.h;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&e| (levels.level[e], e));
    let mut dsu = Dsu::new(n);
    let mut in_tree = vec![false; m];
    let mut tstar = Vec::new();
    for e in order {
        let (u, v) = g.edge(e);
        if dsu.union(u, v) {
            in_tree[e] = true;
            tstar.push(e);
        }
    }
    tstar.sort_unstable();
    let mut tadj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for &e in &tstar {
        let (u, v) = g.edge(e);
        tadj[u].push((v, e));
        tadj[v].push((u, e));
    }
    for a in &mut tadj {
        a.sort_unstable();
    }

    let mut tour = Vec::with_capacity(3 * n);
    let mut dfs = vec![usize::MAX; n];
    let mut down_pos = vec![usize::MAX; m];
    let mut up_pos = vec![usize::MAX; m];
    let mut parent_of_edge = vec![usize::MAX; m];
    let mut child_of_edge = vec![usize::MAX; m];
    let mut comp_starts = Vec::new();
    for root in 0..n {
        if dfs[root] != usize::MAX {
            continue;
        }
        comp_starts.push(tour.len());
        dfs[root] = tour.len();
        tour.push(Elem::Vertex(root));
        // (vertex, next child index, edge from parent)
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, 0, usize::MAX)];
        while let Some(top) = stack.last_mut() {
            let (v, i, pe) = *top;
            if i < tadj[v].len() {
                top.1 += 1;
                let (c, e) = tadj[v][i];
                if e == pe {
                    continue;
                }
                down_pos[e] = tour.len();
                parent_of_edge[e] = v;
                child_of_edge[e] = c;
                tour.push(Elem::Edge { id: e, from: v, to: c });
                dfs[c] = tour.len();
                tour.push(Elem::Vertex(c));
                stack.push((c, 0, e));
            } else {
                stack.pop();
                if pe != usize::MAX {
                    let p = parent_of_edge[pe];
                    up_pos[pe] = tour.len();
                    tour.push(Elem::Edge { id: pe, from: v, to: p });
                }
            }
        }
    }

    let mut nontree = vec![Vec::new(); h as usize];
    let mut heavy = vec![vec![false; n]; h as usize];
    for e in 0..m {
        if !in_tree[e] {
            let l = levels.level[e] as usize - 1;
            nontree[l].push(e);
            let (u, v) = g.edge(e);
            heavy[l][u] = true;
            heavy[l][v] = true;
        }
    }

    let mut views = Vec::with_capacity(h as usize);
    for l in 1..=h {
        let mut d = Dsu::new(n);
        for &e in &tstar {
            if levels.level[e] <= l {
                let (u, v) = g.edge(e);
                d.union(u, v);
            }
        }
        let mut tree_index = vec![NONE; n];
        let mut trees: Vec<LevelTree> = Vec::new();
        let mut tree_of_pos = vec![NONE; tour.len()];
        let mut local = vec![NONE; tour.len()];
        for (p, el) in tour.iter().enumerate() {
            let rep = match *el {
                Elem::Vertex(v) => v,
                Elem::Edge { id, from, .. } => {
                    if levels.level[id] > l {
                        continue;
                    }
                    from
                }
            };
            let r = d.find(rep);
            if tree_index[r] == NONE {
                tree_index[r] = trees.len() as u32;
                let root = match *el {
                    Elem::Vertex(v) => v,
                    Elem::Edge { .. } => unreachable!("a tree's tour starts at its root"),
                };
                trees.push(LevelTree { root, positions: Vec::new() });
            }
            let t = tree_index[r];
            tree_of_pos[p] = t;
            local[p] = trees[t as usize].positions.len() as u32;
            trees[t as usize].positions.push(p);
        }
        views.push(LevelView { trees, tree_of_pos, local });
    }

    EulerFrame {
        h,
        level: levels.level.clone(),
        in_tree,
        tstar,
        tour,
        dfs,
        down_pos,
        up_pos,
        parent_of_edge,
        child_of_edge,
        comp_starts,
        levels: views,
        nontree,
        heavy,
    }
}

impl EulerFrame {
    pub fn view(&self, l: u32) -> &LevelView {
        &self.levels[l as usize - 1]
    }

    /// Level-ℓ tree containing vertex `v`.
    pub fn tree_of_vertex(&self, l: u32, v: usize) -> usize {
        self.view(l).tree_of_pos[self.dfs[v]] as usize
    }

    /// Index of the T* component whose tour contains `pos`.
    pub fn component_of_pos(&self, pos: usize) -> usize {
        self.comp_starts.partition_point(|&s| s <= pos) - 1
    }

    pub fn weighted(&self, l: u32, tree: usize, params: TourParams) -> WeightedTour {
        let t = &self.view(l).trees[tree];
        let heavy = &self.heavy[l as usize - 1];
        let wt: Vec<u8> = t
            .positions
            .iter()
            .map(|&p| match self.tour[p] {
                Elem::Vertex(v) => heavy[v] as u8,
                Elem::Edge { .. } => 0,
            })
            .collect();
        WeightedTour::new(wt, params)
    }
}

/// Radius and block-size limit derived from f/φ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TourParams {
    pub r: usize,
    pub jmax: u32,
}

impl TourParams {
    /// r = ⌈√(f/φ)⌉ and j_max = ⌈log₂(f/φ)⌉.
    pub fn new(f: usize, phi: Phi) -> Self {
        let target = f as u128 * phi.den as u128;
        let num = phi.num as u128;
        let mut r = 0usize;
        while (r as u128) * (r as u128) * num < target {
            r += 1;
        }
        let mut jmax = 0u32;
        while (1u128 << jmax) * num < target {
            jmax += 1;
        }
        TourParams { r, jmax }
    }
}

/// One level tree's tour with 0/1 weights, prefix sums and dyadic padding.
#[derive(Clone, Debug)]
pub struct WeightedTour {
    pub wt: Vec<u8>,
    /// prefix[i] = weight of elements before local index i; also the rank.
    pub prefix: Vec<usize>,
    /// Local indices of the weight-1 elements; `heavy_pos[k]` has rank k.
    pub heavy_pos: Vec<usize>,
    pub w: usize,
    pub w_pad: usize,
    pub r: usize,
    /// min(j_max, log₂ w_pad)
    pub jmax: u32,
}

impl WeightedTour {
    pub fn new(wt: Vec<u8>, params: TourParams) -> Self {
        let mut prefix = Vec::with_capacity(wt.len() + 1);
        let mut heavy_pos = Vec::new();
        let mut acc = 0;
        for (i, &x) in wt.iter().enumerate() {
            prefix.push(acc);
            if x == 1 {
                heavy_pos.push(i);
            }
            acc += x as usize;
        }
        prefix.push(acc);
        let w_pad = acc.max(1).next_power_of_two();
        let jmax = params.jmax.min(w_pad.trailing_zeros());
        WeightedTour { wt, prefix, heavy_pos, w: acc, w_pad, r: params.r, jmax }
    }

    pub fn len(&self) -> usize {
        self.wt.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wt.is_empty()
    }

    pub fn rank(&self, i: usize) -> usize {
        self.prefix[i]
    }

    /// Weight strictly between two local positions.
    pub fn dist(&self, a: usize, b: usize) -> usize {
        let (a, b) = (a.min(b), a.max(b));
        if a == b {
            0
        } else {
            self.prefix[b] - self.prefix[a + 1]
        }
    }

    /// Inclusive local range of elements within distance `r` of `a`.
    pub fn ball_range(&self, a: usize, r: usize) -> (usize, usize) {
        let len = self.len();
        // smallest b ≤ a with prefix[b+1] ≥ prefix[a] − r
        let need = self.prefix[a].saturating_sub(r);
        let lo = self.prefix[..=a].partition_point(|&p| p < need).saturating_sub(1);
        let lo = if self.prefix[lo + 1] >= need { lo } else { lo + 1 };
        // largest b ≥ a with prefix[b] ≤ prefix[a+1] + r
        let cap = self.prefix[a + 1] + r;
        let hi = (self.prefix[..len].partition_point(|&p| p <= cap)).max(a + 1) - 1;
        (lo.min(a), hi)
    }

    /// Local indices of the weight-1 elements with rank in block (j, a).
    pub fn block_heavy(&self, j: u32, a: usize) -> &[usize] {
        let lo = (a << j).min(self.w);
        let hi = ((a + 1) << j).min(self.w);
        &self.heavy_pos[lo..hi]
    }

    /// Maximal canonical blocks (j, a), j ≤ jmax, exactly covering rank range [lo, hi).
    pub fn dyadic_cover(&self, lo: usize, hi: usize) -> Result<Vec<(u32, usize)>, EulerError> {
        if lo > hi || hi > self.w_pad {
            return Err(EulerError::Misaligned { lo, hi, pad: self.w_pad });
        }
        Ok(dyadic_blocks(lo, hi, self.jmax))
    }
}

/// Greedy maximal cover of [lo, hi) by aligned blocks of size 2^j, j ≤ jmax.
pub fn dyadic_blocks(lo: usize, hi: usize, jmax: u32) -> Vec<(u32, usize)> {
    let mut out = Vec::new();
    let mut x = lo;
    while x < hi {
        let mut j = jmax.min(if x == 0 { 63 } else { x.trailing_zeros() });
        while x + (1usize << j) > hi {
            j -= 1;
        }
        out.push((j, x >> j));
        x += 1 << j;
    }
    out
}

/// Ball of local vertices around one or two tour positions; positions are
/// global and must belong to `tree` at level `l`.
pub fn ball(
    frame: &EulerFrame,
    wt: &WeightedTour,
    l: u32,
    tree: usize,
    alpha: &[usize],
    r: usize,
) -> Result<Vec<usize>, EulerError> {
    let view = frame.view(l);
    let positions = &view.trees[tree].positions;
    let mut out = Vec::new();
    let mut covered: Vec<(usize, usize)> = Vec::new();
    for &p in alpha {
        if view.tree_of_pos.get(p) != Some(&(tree as u32)) {
            return Err(EulerError::NotOnTour(p));
        }
        covered.push(wt.ball_range(view.local[p] as usize, r));
    }
    covered.sort_unstable();
    let mut last_end = None;
    for (lo, hi) in covered {
        let start = match last_end {
            Some(e) if e >= lo => e + 1,
            _ => lo,
        };
        for &p in positions.iter().take(hi + 1).skip(start) {
            if let Elem::Vertex(v) = frame.tour[p] {
                out.push(v);
            }
        }
        last_end = Some(last_end.map_or(hi, |e: usize| e.max(hi)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::{build_edge_hierarchy, Mode};

    fn flat(g: &Graph) -> EdgeLevelAssignment {
        EdgeLevelAssignment { level: vec![1; g.m()], h: 1, phi: Phi::HALF, certified: true }
    }

    #[test]
    fn figure_tour() {
        // a..j as 0..9; ascending-id child order matches the printed tour
        let edges = vec![(0, 1), (1, 2), (1, 3), (3, 4), (3, 5), (3, 6), (0, 7), (7, 8), (7, 9)];
        let g = Graph::new(10, edges).unwrap();
        let fr = build_frame(&g, &flat(&g));
        let name = |v: usize| (b'a' + v as u8) as char;
        let text: Vec<String> = fr
            .tour
            .iter()
            .map(|e| match *e {
                Elem::Vertex(v) => name(v).to_string(),
                Elem::Edge { from, to, .. } => format!("({},{})", name(from), name(to)),
            })
            .collect();
        assert_eq!(
            text.join(","),
            "a,(a,b),b,(b,c),c,(c,b),(b,d),d,(d,e),e,(e,d),(d,f),f,(f,d),(d,g),g,(g,d),(d,b),(b,a),\
             (a,h),h,(h,i),i,(i,h),(h,j),j,(j,h),(h,a)"
        );
    }

    #[test]
    fn single_vertex_tour() {
        let g = Graph::new(1, vec![]).unwrap();
        let lv = EdgeLevelAssignment { level: vec![], h: 0, phi: Phi::HALF, certified: true };
        assert_eq!(build_frame(&g, &lv).tour, vec![Elem::Vertex(0)]);
    }

    #[test]
    fn triangle_tour_length() {
        let g = Graph::new(3, vec![(0, 1), (1, 2), (0, 2)]).unwrap();
        let h = build_edge_hierarchy(&g, Mode::Exact).unwrap();
        let fr = build_frame(&g, &h);
        assert_eq!(fr.tour.len(), 7);
        assert_eq!(fr.tstar.len(), 2);
    }

    #[test]
    fn params() {
        assert_eq!(TourParams::new(1, Phi::HALF), TourParams { r: 2, jmax: 1 });
        assert_eq!(TourParams::new(8, Phi::HALF), TourParams { r: 4, jmax: 4 });
        assert_eq!(TourParams::new(5, Phi::HALF), TourParams { r: 4, jmax: 4 });
    }

    #[test]
    fn cover_of_aligned_and_whole() {
        let wt = WeightedTour::new(vec![1; 32], TourParams { r: 1, jmax: 3 });
        assert_eq!(wt.dyadic_cover(8, 16).unwrap(), vec![(3, 1)]);
        assert_eq!(wt.dyadic_cover(0, 32).unwrap(), vec![(3, 0), (3, 1), (3, 2), (3, 3)]);
        assert!(wt.dyadic_cover(3, 40).is_err());
        let wide = WeightedTour::new(vec![1; 32], TourParams { r: 1, jmax: 9 });
        assert_eq!(wide.jmax, 5);
        assert_eq!(wide.dyadic_cover(0, 32).unwrap(), vec![(5, 0)]);
    }

    #[test]
    fn zero_radius_and_zero_weights() {
        let wt = WeightedTour::new(vec![0, 1, 0, 0, 1, 0], TourParams { r: 0, jmax: 1 });
        assert_eq!(wt.ball_range(2, 0), (1, 4));
        let z = WeightedTour::new(vec![0; 6], TourParams { r: 0, jmax: 0 });
        assert_eq!(z.ball_range(3, 0), (0, 5));
    }
}
