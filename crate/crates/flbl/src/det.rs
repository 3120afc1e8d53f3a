//! Machinery shared by the two deterministic schemes: tour-segment
//! descriptors on the build side, and on the query side the per-level
//! interval partition with the tree-splitting and replay rules.

use std::collections::HashMap;

use thiserror::Error;

use crate::bits::{width_for, BitError, BitReader, BitWriter};
use crate::code_shares::ShareError;
use crate::dsu::Dsu;
use crate::euler::{Elem, EulerFrame, NONE};
use crate::hierarchy::Phi;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QueryError {
    #[error("{got} faults exceed the budget f = {f}")]
    TooManyFaults { got: usize, f: usize },
    #[error("malformed label: {0}")]
    Malformed(&'static str),
    #[error(transparent)]
    Bits(#[from] BitError),
    #[error("code shares failed to decode: {0}")]
    Shares(#[from] ShareError),
}

/// Widths and budgets shared by every label of a deterministic label file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DetParams {
    pub f: usize,
    pub phi: Phi,
    pub h: u32,
    /// bits per tour position; the all-ones value is the empty sentinel
    pub w_pos: u32,
    pub w_lvl: u32,
    /// bits for the rank of an edge among its parallel copies
    pub p_bits: u32,
}

impl DetParams {
    pub fn new(frame: &EulerFrame, f: usize, phi: Phi, max_parallel: u32) -> Self {
        DetParams {
            f,
            phi,
            h: frame.h,
            w_pos: width_for(frame.tour.len() as u64),
            w_lvl: width_for(frame.h as u64),
            p_bits: width_for(max_parallel as u64),
        }
    }

    pub fn sentinel(&self) -> u64 {
        (1u64 << self.w_pos) - 1
    }

    /// ⌊f/φ⌋
    pub fn budget(&self) -> usize {
        self.phi.budget(self.f)
    }
}

/// A vertex label: the vertex's position in the tour of T*.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VertexLabel {
    pub dfs: u64,
}

impl VertexLabel {
    pub fn write(&self, w: &mut BitWriter, p: &DetParams) {
        w.put(self.dfs, p.w_pos);
    }

    pub fn read(r: &mut BitReader, p: &DetParams) -> Result<Self, BitError> {
        Ok(VertexLabel { dfs: r.get(p.w_pos)? })
    }
}

/// First/last element and smallest/largest vertex position of a tour segment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SegmentDesc {
    pub first: u64,
    pub last: u64,
    pub minv: u64,
    pub maxv: u64,
}

impl SegmentDesc {
    pub fn empty(p: &DetParams) -> Self {
        let s = p.sentinel();
        SegmentDesc { first: s, last: s, minv: s, maxv: s }
    }

    pub fn write(&self, w: &mut BitWriter, p: &DetParams) {
        for x in [self.first, self.last, self.minv, self.maxv] {
            w.put(x, p.w_pos);
        }
    }

    pub fn read(r: &mut BitReader, p: &DetParams) -> Result<Self, BitError> {
        Ok(SegmentDesc {
            first: r.get(p.w_pos)?,
            last: r.get(p.w_pos)?,
            minv: r.get(p.w_pos)?,
            maxv: r.get(p.w_pos)?,
        })
    }
}

pub const SEG_X: usize = 0;
pub const SEG_Y: usize = 1;
pub const SEG_Z: usize = 2;

/// The part of a tree-edge label both schemes share.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeEdgeCore {
    pub parent: u64,
    pub child: u64,
    pub level: u32,
    /// position of the child-to-parent occurrence
    pub up: u64,
    /// `segs[i]` describes X, Y, Z at level `level + i`
    pub segs: Vec<[SegmentDesc; 3]>,
}

impl TreeEdgeCore {
    /// Position of the parent-to-child occurrence, which immediately
    /// precedes the child's first appearance.
    pub fn down(&self) -> u64 {
        self.child - 1
    }

    /// Id of the level-ℓ tree holding this edge: its root's position.
    pub fn tree_id(&self, l: u32) -> u64 {
        self.segs[(l - self.level) as usize][SEG_X].first
    }

    pub fn write_head(&self, w: &mut BitWriter, p: &DetParams) {
        w.put(self.parent, p.w_pos);
        w.put(self.child, p.w_pos);
        w.put(self.level as u64, p.w_lvl);
        w.put(self.up, p.w_pos);
    }

    pub fn read_head(r: &mut BitReader, p: &DetParams) -> Result<Self, BitError> {
        let parent = r.get(p.w_pos)?;
        let child = r.get(p.w_pos)?;
        let level = r.get(p.w_lvl)? as u32;
        let up = r.get(p.w_pos)?;
        if level == 0 || level > p.h || child == 0 {
            return Err(BitError::Malformed("tree edge header"));
        }
        Ok(TreeEdgeCore { parent, child, level, up, segs: Vec::new() })
    }
}

/// Per level and per level tree: nearest vertex elements by local index.
pub struct SegmentIndex {
    /// `[level-1][tree]`: smallest local j ≥ i holding a vertex (len if none)
    next_vert: Vec<Vec<Vec<u32>>>,
    /// `[level-1][tree]`: largest local j ≤ i holding a vertex, NONE if none
    prev_vert: Vec<Vec<Vec<u32>>>,
}

impl SegmentIndex {
    pub fn new(frame: &EulerFrame) -> Self {
        let mut next_vert = Vec::new();
        let mut prev_vert = Vec::new();
        for view in &frame.levels {
            let mut nl = Vec::with_capacity(view.trees.len());
            let mut pl = Vec::with_capacity(view.trees.len());
            for t in &view.trees {
                let is_v: Vec<bool> =
                    t.positions.iter().map(|&p| matches!(frame.tour[p], Elem::Vertex(_))).collect();
                let len = is_v.len();
                let mut next = vec![len as u32; len + 1];
                for i in (0..len).rev() {
                    next[i] = if is_v[i] { i as u32 } else { next[i + 1] };
                }
                let mut prev = vec![NONE; len];
                let mut last = NONE;
                for i in 0..len {
                    if is_v[i] {
                        last = i as u32;
                    }
                    prev[i] = last;
                }
                nl.push(next);
                pl.push(prev);
            }
            next_vert.push(nl);
            prev_vert.push(pl);
        }
        SegmentIndex { next_vert, prev_vert }
    }

    /// Descriptor of local range [a, b) of tree `t` at level `l`.
    pub fn describe(&self, frame: &EulerFrame, p: &DetParams, l: u32, t: usize, a: usize, b: usize) -> SegmentDesc {
        if a >= b {
            return SegmentDesc::empty(p);
        }
        let pos = &frame.view(l).trees[t].positions;
        let nv = self.next_vert[l as usize - 1][t][a] as usize;
        let pv = self.prev_vert[l as usize - 1][t][b - 1];
        SegmentDesc {
            first: pos[a] as u64,
            last: pos[b - 1] as u64,
            minv: if nv < b { pos[nv] as u64 } else { p.sentinel() },
            maxv: if pv != NONE && pv as usize >= a { pos[pv as usize] as u64 } else { p.sentinel() },
        }
    }

    /// Local ranges of X, Y, Z for tree edge `e` at level `l`, plus the tree index.
    pub fn segment_ranges(frame: &EulerFrame, l: u32, e: usize) -> (usize, [(usize, usize); 3]) {
        let view = frame.view(l);
        let t = view.tree_of_pos[frame.down_pos[e]] as usize;
        let d = view.local[frame.down_pos[e]] as usize;
        let u = view.local[frame.up_pos[e]] as usize;
        let len = view.trees[t].positions.len();
        (t, [(0, d), (d + 1, u), (u + 1, len)])
    }

    pub fn core(&self, frame: &EulerFrame, p: &DetParams, e: usize) -> TreeEdgeCore {
        let level = frame.level[e];
        let segs = (level..=frame.h)
            .map(|l| {
                let (t, r) = Self::segment_ranges(frame, l, e);
                r.map(|(a, b)| self.describe(frame, p, l, t, a, b))
            })
            .collect();
        TreeEdgeCore {
            parent: frame.dfs[frame.parent_of_edge[e]] as u64,
            child: frame.dfs[frame.child_of_edge[e]] as u64,
            level,
            up: frame.up_pos[e] as u64,
            segs,
        }
    }
}

/// A separator: one oriented occurrence of a failed tree edge.
#[derive(Clone, Copy, Debug)]
pub struct Sep {
    pub pos: u64,
    /// index into the tree's failed-edge list
    pub edge: usize,
    pub down: bool,
}

/// The 2k+1 intervals of a level tree cut at k failed tree edges.
pub struct TreeCtx<'a> {
    pub level: u32,
    pub tree_id: u64,
    pub edges: Vec<&'a TreeEdgeCore>,
    /// indices of `edges` into the caller's failed tree-edge list
    pub edge_ids: Vec<usize>,
    pub seps: Vec<Sep>,
    sentinel: u64,
}

impl<'a> TreeCtx<'a> {
    fn new(p: &DetParams, level: u32, tree_id: u64, edges: Vec<&'a TreeEdgeCore>, edge_ids: Vec<usize>) -> Self {
        let mut seps = Vec::with_capacity(2 * edges.len());
        for (i, e) in edges.iter().enumerate() {
            seps.push(Sep { pos: e.down(), edge: i, down: true });
            seps.push(Sep { pos: e.up, edge: i, down: false });
        }
        seps.sort_by_key(|s| s.pos);
        TreeCtx { level, tree_id, edges, edge_ids, seps, sentinel: p.sentinel() }
    }

    pub fn intervals(&self) -> usize {
        self.seps.len() + 1
    }

    /// Interval holding a vertex of this tree at position `pos`.
    pub fn locate(&self, pos: u64) -> usize {
        self.seps.partition_point(|s| s.pos < pos)
    }

    pub fn seg(&self, e: usize, kind: usize) -> &SegmentDesc {
        let c = self.edges[e];
        &c.segs[(self.level - c.level) as usize][kind]
    }

    /// The segment that starts where interval `i` starts.
    pub fn start_segment(&self, i: usize) -> (usize, usize) {
        if i == 0 {
            (self.seps[0].edge, SEG_X)
        } else {
            let s = self.seps[i - 1];
            (s.edge, if s.down { SEG_Y } else { SEG_Z })
        }
    }

    /// Position of the separator closing interval `i`, if any.
    pub fn end_pos(&self, i: usize) -> Option<u64> {
        self.seps.get(i).map(|s| s.pos)
    }

    pub fn start_pos(&self, i: usize) -> Option<u64> {
        (i > 0).then(|| self.seps[i - 1].pos)
    }

    pub fn inside(&self, i: usize, pos: u64) -> bool {
        self.start_pos(i).is_none_or(|s| pos > s) && self.end_pos(i).is_none_or(|e| pos < e)
    }

    /// Smallest vertex position in interval `i`, if it holds a vertex.
    pub fn rep(&self, i: usize) -> Option<u64> {
        let (e, k) = self.start_segment(i);
        let minv = self.seg(e, k).minv;
        (minv != self.sentinel && self.inside(i, minv)).then_some(minv)
    }

    /// Checks the segment descriptors agree with the separators.
    fn validate(&self) -> Result<(), QueryError> {
        for e in 0..self.edges.len() {
            let c = self.edges[e];
            if c.up <= c.down() || self.seg(e, SEG_X).first != self.tree_id || self.seg(e, SEG_Y).first != c.child {
                return Err(QueryError::Malformed("tree edge segments disagree"));
            }
        }
        Ok(())
    }
}

/// Scheme-specific rules applied after tree splitting and replay.
pub trait LevelRules {
    fn apply(&mut self, ctx: &TreeCtx, dsu: &mut Dsu) -> Result<(), QueryError>;
}

/// Final partition of one top-level tree that meets the fault set.
#[derive(Clone, Debug)]
pub struct FinalTree {
    pub seps: Vec<u64>,
    pub part: Vec<usize>,
    pub has_vertex: Vec<bool>,
}

/// Query outcome: answers connectivity and counts components.
#[derive(Clone, Debug)]
pub struct DetAnswer {
    pub comp_starts: Vec<u64>,
    pub trees: HashMap<u64, FinalTree>,
}

impl DetAnswer {
    fn component_start(&self, pos: u64) -> u64 {
        let i = self.comp_starts.partition_point(|&s| s <= pos);
        self.comp_starts[i.max(1) - 1]
    }

    /// Canonical component id of the vertex at tour position `pos`.
    pub fn component_of(&self, pos: u64) -> (u64, usize) {
        let root = self.component_start(pos);
        match self.trees.get(&root) {
            None => (root, 0),
            Some(t) => {
                let i = t.seps.partition_point(|&s| s < pos);
                (root, t.part[i])
            }
        }
    }

    pub fn connected(&self, s: u64, t: u64) -> bool {
        self.component_of(s) == self.component_of(t)
    }

    pub fn component_count(&self) -> usize {
        let mut extra = 0;
        for t in self.trees.values() {
            let mut parts: Vec<usize> =
                (0..t.part.len()).filter(|&i| t.has_vertex[i]).map(|i| t.part[i]).collect();
            parts.sort_unstable();
            parts.dedup();
            extra += parts.len().saturating_sub(1);
        }
        self.comp_starts.len() + extra
    }
}

/// Runs levels 1..=h over the failed tree edges, applying R1 (tree
/// splitting), R2 (replay of the previous level as vertex pairs) and then
/// the scheme's own rules.
pub fn run_levels(
    p: &DetParams,
    comp_starts: &[u64],
    tree_faults: &[&TreeEdgeCore],
    rules: &mut impl LevelRules,
) -> Result<DetAnswer, QueryError> {
    // replay: (a failed tree edge of the old tree, vertex pair)
    let mut replay: Vec<(usize, u64, u64)> = Vec::new();
    let mut trees = HashMap::new();
    for l in 1..=p.h {
        let mut groups: HashMap<u64, Vec<usize>> = HashMap::new();
        for (i, c) in tree_faults.iter().enumerate() {
            if c.level <= l {
                groups.entry(c.tree_id(l)).or_default().push(i);
            }
        }
        let mut edge_group: HashMap<usize, u64> = HashMap::new();
        for (&id, members) in &groups {
            for &i in members {
                edge_group.insert(i, id);
            }
        }
        let mut replay_by_tree: HashMap<u64, Vec<(u64, u64)>> = HashMap::new();
        for &(e, a, b) in &replay {
            if let Some(&id) = edge_group.get(&e) {
                replay_by_tree.entry(id).or_default().push((a, b));
            }
        }
        let mut next_replay = Vec::new();
        let mut ids: Vec<u64> = groups.keys().copied().collect();
        ids.sort_unstable();
        for id in ids {
            let members = &groups[&id];
            let ctx = TreeCtx::new(p, l, id, members.iter().map(|&i| tree_faults[i]).collect(), members.clone());
            ctx.validate()?;
            let mut dsu = Dsu::new(ctx.intervals());
            // R1: the two sides around a removed subtree meet at its parent
            let mut first_sep = vec![usize::MAX; ctx.edges.len()];
            for (i, s) in ctx.seps.iter().enumerate() {
                if s.down {
                    first_sep[s.edge] = i;
                } else {
                    dsu.union(first_sep[s.edge], i + 1);
                }
            }
            // R2
            for &(a, b) in replay_by_tree.get(&id).map(Vec::as_slice).unwrap_or(&[]) {
                dsu.union(ctx.locate(a), ctx.locate(b));
            }
            rules.apply(&ctx, &mut dsu)?;
            let reps: Vec<Option<u64>> = (0..ctx.intervals()).map(|i| ctx.rep(i)).collect();
            let mut first_of_part: HashMap<usize, u64> = HashMap::new();
            for (i, r) in reps.iter().enumerate() {
                if let Some(v) = *r {
                    let root = dsu.find(i);
                    match first_of_part.get(&root) {
                        Some(&a) => next_replay.push((members[0], a, v)),
                        None => {
                            first_of_part.insert(root, v);
                        }
                    }
                }
            }
            if l == p.h {
                let part = (0..ctx.intervals()).map(|i| dsu.find(i)).collect();
                trees.insert(
                    id,
                    FinalTree {
                        seps: ctx.seps.iter().map(|s| s.pos).collect(),
                        part,
                        has_vertex: reps.iter().map(Option::is_some).collect(),
                    },
                );
            }
        }
        replay = next_replay;
    }
    Ok(DetAnswer { comp_starts: comp_starts.to_vec(), trees })
}

/// Canonical key of a non-tree edge: sorted endpoint positions and parallel rank.
pub type EdgeKey = (u64, u64, u32);

pub fn edge_key(a: u64, b: u64, par: u32) -> EdgeKey {
    (a.min(b), a.max(b), par)
}
