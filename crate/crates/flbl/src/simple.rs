//! Deterministic labels of O(f log n)-ish size per level: every tree-edge
//! label lists, for each of its three tour segments, the first ⌊f/φ⌋+1
//! non-tree incidences met along the tour.

use std::collections::HashSet;

use crate::bits::{width_for, BitError, BitReader, BitWriter};
use crate::det::{
    edge_key, run_levels, DetAnswer, DetParams, EdgeKey, LevelRules, QueryError, SegmentDesc, SegmentIndex,
    TreeCtx, TreeEdgeCore,
};
pub use crate::det::VertexLabel;
use crate::dsu::Dsu;
use crate::euler::{build_frame, Elem, EulerFrame};
use crate::graph::Graph;
use crate::hierarchy::EdgeLevelAssignment;

/// A non-tree incidence: endpoint inside the segment, the other endpoint,
/// and the parallel rank of the edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Incidence {
    pub inner: u64,
    pub outer: u64,
    pub par: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncList {
    pub truncated: bool,
    pub entries: Vec<Incidence>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimpleTreeLabel {
    pub core: TreeEdgeCore,
    /// `lists[i][s]`: segment s at level `core.level + i`
    pub lists: Vec<[IncList; 3]>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SimpleEdgeLabel {
    NonTree { u: u64, v: u64, par: u32 },
    Tree(Box<SimpleTreeLabel>),
}

/// List capacity ⌊f/φ⌋ + 1.
pub fn list_cap(p: &DetParams) -> usize {
    p.budget() + 1
}

fn cnt_bits(p: &DetParams) -> u32 {
    width_for(list_cap(p) as u64)
}

impl SimpleEdgeLabel {
    pub fn write(&self, w: &mut BitWriter, p: &DetParams) {
        match self {
            SimpleEdgeLabel::NonTree { u, v, par } => {
                w.put_bool(false);
                w.put(*u, p.w_pos);
                w.put(*v, p.w_pos);
                w.put(*par as u64, p.p_bits);
            }
            SimpleEdgeLabel::Tree(t) => {
                w.put_bool(true);
                t.core.write_head(w, p);
                for (segs, lists) in t.core.segs.iter().zip(&t.lists) {
                    for (s, list) in segs.iter().zip(lists) {
                        s.write(w, p);
                        w.put(list.entries.len() as u64, cnt_bits(p));
                        w.put_bool(list.truncated);
                        for x in &list.entries {
                            w.put(x.inner, p.w_pos);
                            w.put(x.outer, p.w_pos);
                            w.put(x.par as u64, p.p_bits);
                        }
                    }
                }
            }
        }
    }

    pub fn read(r: &mut BitReader, p: &DetParams) -> Result<Self, BitError> {
        if !r.get_bool()? {
            let u = r.get(p.w_pos)?;
            let v = r.get(p.w_pos)?;
            let par = r.get(p.p_bits)? as u32;
            return Ok(SimpleEdgeLabel::NonTree { u, v, par });
        }
        let mut core = TreeEdgeCore::read_head(r, p)?;
        let mut lists = Vec::new();
        for _ in core.level..=p.h {
            let mut segs = [SegmentDesc::empty(p); 3];
            let mut ls: [IncList; 3] = Default::default();
            for (s, list) in segs.iter_mut().zip(ls.iter_mut()) {
                *s = SegmentDesc::read(r, p)?;
                let c = r.get(cnt_bits(p))? as usize;
                if c > list_cap(p) {
                    return Err(BitError::Malformed("incidence count over capacity"));
                }
                list.truncated = r.get_bool()?;
                for _ in 0..c {
                    list.entries.push(Incidence {
                        inner: r.get(p.w_pos)?,
                        outer: r.get(p.w_pos)?,
                        par: r.get(p.p_bits)? as u32,
                    });
                }
            }
            core.segs.push(segs);
            lists.push(ls);
        }
        Ok(SimpleEdgeLabel::Tree(Box::new(SimpleTreeLabel { core, lists })))
    }

    pub fn bit_len(&self, p: &DetParams) -> usize {
        let mut w = BitWriter::new();
        self.write(&mut w, p);
        w.bit_len()
    }
}

impl Default for IncList {
    fn default() -> Self {
        IncList { truncated: false, entries: Vec::new() }
    }
}

struct TreeInc {
    entries: Vec<Incidence>,
    /// before[i] = entries whose inner element has local index < i
    before: Vec<u32>,
}

/// Builds labels one at a time so callers can measure without storing them all.
pub struct SimpleBuilder<'a> {
    pub frame: EulerFrame,
    pub params: DetParams,
    g: &'a Graph,
    par: Vec<u32>,
    seg: SegmentIndex,
    /// `[level-1][tree]`
    inc: Vec<Vec<TreeInc>>,
}

impl<'a> SimpleBuilder<'a> {
    pub fn new(g: &'a Graph, levels: &EdgeLevelAssignment, f: usize) -> Self {
        let frame = build_frame(g, levels);
        let par = g.parallel_ranks();
        let params = DetParams::new(&frame, f, levels.phi, par.iter().copied().max().unwrap_or(0));
        let seg = SegmentIndex::new(&frame);
        let mut inc = Vec::with_capacity(frame.h as usize);
        for l in 1..=frame.h {
            let lvl_edges: HashSet<usize> = frame.nontree[l as usize - 1].iter().copied().collect();
            let view = frame.view(l);
            let mut per_tree = Vec::with_capacity(view.trees.len());
            for t in &view.trees {
                let mut entries = Vec::new();
                let mut before = Vec::with_capacity(t.positions.len() + 1);
                for &pos in &t.positions {
                    before.push(entries.len() as u32);
                    if let Elem::Vertex(v) = frame.tour[pos] {
                        let mut here: Vec<(u64, usize)> = g
                            .neighbors(v)
                            .iter()
                            .filter(|&&(_, e)| lvl_edges.contains(&e))
                            .map(|&(u, e)| (frame.dfs[u] as u64, e))
                            .collect();
                        here.sort_unstable();
                        for (outer, e) in here {
                            entries.push(Incidence { inner: frame.dfs[v] as u64, outer, par: par[e] });
                        }
                    }
                }
                before.push(entries.len() as u32);
                per_tree.push(TreeInc { entries, before });
            }
            inc.push(per_tree);
        }
        SimpleBuilder { frame, params, g, par, seg, inc }
    }

    pub fn vertex_label(&self, v: usize) -> VertexLabel {
        VertexLabel { dfs: self.frame.dfs[v] as u64 }
    }

    pub fn edge_label(&self, e: usize) -> SimpleEdgeLabel {
        let fr = &self.frame;
        if !fr.in_tree[e] {
            let (a, b) = self.g.edge(e);
            let (u, v, par) = edge_key(fr.dfs[a] as u64, fr.dfs[b] as u64, self.par[e]);
            return SimpleEdgeLabel::NonTree { u, v, par };
        }
        let core = self.seg.core(fr, &self.params, e);
        let cap = list_cap(&self.params);
        let lists = (core.level..=fr.h)
            .map(|l| {
                let (t, ranges) = SegmentIndex::segment_ranges(fr, l, e);
                let ti = &self.inc[l as usize - 1][t];
                ranges.map(|(a, b)| {
                    let lo = ti.before[a] as usize;
                    let hi = ti.before[b.max(a)] as usize;
                    let take = (hi - lo).min(cap);
                    IncList { truncated: hi - lo > cap, entries: ti.entries[lo..lo + take].to_vec() }
                })
            })
            .collect();
        SimpleEdgeLabel::Tree(Box::new(SimpleTreeLabel { core, lists }))
    }

    pub fn comp_starts(&self) -> Vec<u64> {
        self.frame.comp_starts.iter().map(|&p| p as u64).collect()
    }
}

/// All labels of a graph, materialized.
#[derive(Clone, Debug)]
pub struct SimpleLabels {
    pub params: DetParams,
    pub comp_starts: Vec<u64>,
    pub vertices: Vec<VertexLabel>,
    pub edges: Vec<SimpleEdgeLabel>,
}

pub fn build_simple(g: &Graph, levels: &EdgeLevelAssignment, f: usize) -> SimpleLabels {
    let b = SimpleBuilder::new(g, levels, f);
    SimpleLabels {
        params: b.params,
        comp_starts: b.comp_starts(),
        vertices: (0..g.n()).map(|v| b.vertex_label(v)).collect(),
        edges: (0..g.m()).map(|e| b.edge_label(e)).collect(),
    }
}

struct SimpleRules<'a> {
    p: &'a DetParams,
    trees: &'a [&'a SimpleTreeLabel],
    failed_nontree: &'a HashSet<EdgeKey>,
}

impl LevelRules for SimpleRules<'_> {
    fn apply(&mut self, ctx: &TreeCtx, dsu: &mut Dsu) -> Result<(), QueryError> {
        let cap = list_cap(self.p);
        let k = ctx.intervals();
        let mut count = vec![0usize; k];
        let mut saturated = vec![false; k];
        for i in 0..k {
            let (e, s) = ctx.start_segment(i);
            let lab = self.trees[ctx.edge_ids[e]];
            let list = &lab.lists[(ctx.level - lab.core.level) as usize][s];
            let mut inside = 0;
            // R3: every revealed edge that survived is a real connection
            for x in &list.entries {
                if ctx.inside(i, x.inner) {
                    inside += 1;
                }
                if !self.failed_nontree.contains(&edge_key(x.inner, x.outer, x.par)) {
                    dsu.union(ctx.locate(x.inner), ctx.locate(x.outer));
                }
            }
            count[i] = inside;
            saturated[i] = list.truncated && inside == cap;
        }
        // R4: parts that see more than ⌊f/φ⌋ incidences lie in one component
        let mut part_count = vec![0usize; k];
        let mut part_big = vec![false; k];
        for i in 0..k {
            let r = dsu.find(i);
            part_count[r] += count[i];
            part_big[r] |= saturated[i];
        }
        let big: Vec<usize> =
            (0..k).filter(|&r| dsu.find(r) == r && (part_big[r] || part_count[r] > self.p.budget())).collect();
        for w in big.windows(2) {
            dsu.union(w[0], w[1]);
        }
        Ok(())
    }
}

/// Answers connectivity and component counts for one fault set, given only labels.
pub fn query_simple(
    p: &DetParams,
    comp_starts: &[u64],
    faults: &[&SimpleEdgeLabel],
) -> Result<DetAnswer, QueryError> {
    let mut trees: Vec<&SimpleTreeLabel> = Vec::new();
    let mut seen_tree = HashSet::new();
    let mut failed_nontree = HashSet::new();
    for lab in faults {
        match lab {
            SimpleEdgeLabel::NonTree { u, v, par } => {
                failed_nontree.insert(edge_key(*u, *v, *par));
            }
            SimpleEdgeLabel::Tree(t) => {
                if seen_tree.insert(t.core.child) {
                    trees.push(t);
                }
            }
        }
    }
    let distinct = trees.len() + failed_nontree.len();
    if distinct > p.f {
        return Err(QueryError::TooManyFaults { got: distinct, f: p.f });
    }
    for t in &trees {
        if t.lists.len() != t.core.segs.len() || t.core.segs.len() != (p.h + 1 - t.core.level) as usize {
            return Err(QueryError::Malformed("level count"));
        }
    }
    let cores: Vec<&TreeEdgeCore> = trees.iter().map(|t| &t.core).collect();
    let mut rules = SimpleRules { p, trees: &trees, failed_nontree: &failed_nontree };
    run_levels(p, comp_starts, &cores, &mut rules)
}
