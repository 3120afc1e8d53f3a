//! Deterministic labels of Õ(√f) bits on graphs of maximum degree 3.
//!
//! Each level tree's tour is weighted (1 on vertices with a same-level
//! non-tree edge) and cut into aligned blocks of weight 2^j. The boundary
//! edges of a block, sorted by their outside endpoint, are thinned to the
//! large-gap edges: consecutive pairs whose outside endpoints are more than
//! r apart. Short large-gap lists are stored next to tree edges; long ones
//! are spread as Reed–Solomon shares over the labels of nearby edges.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::bits::{width_for, BitError, BitReader, BitWriter};
use crate::code_shares::{decode, encode, read_share, share_bits, write_share, CodeShare, ShareError};
use crate::det::{
    edge_key, run_levels, DetAnswer, DetParams, EdgeKey, LevelRules, QueryError, SegmentDesc, SegmentIndex,
    TreeCtx, TreeEdgeCore, VertexLabel,
};
use crate::dsu::Dsu;
use crate::euler::{build_frame, dyadic_blocks, Elem, EulerFrame, TourParams, WeightedTour};
use crate::graph::{reduce_degree3, Degree3Reduction, Graph};
use crate::hierarchy::{build_edge_hierarchy, EdgeLevelAssignment, HierarchyError, Mode};
use crate::simple::Incidence;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SqrtError {
    #[error("vertex {vertex} has degree {degree}; reduce to degree 3 first")]
    Degree { vertex: usize, degree: usize },
    #[error("an edge needs {0} bits, more than one field symbol holds")]
    SymbolWidth(u32),
    #[error(transparent)]
    Shares(#[from] ShareError),
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SqrtParams {
    pub det: DetParams,
    /// ball radius ⌈√(f/φ)⌉
    pub r: usize,
    /// ⌈log₂(f/φ)⌉
    pub jmax: u32,
}

impl SqrtParams {
    pub fn new(det: DetParams) -> Self {
        let tp = TourParams::new(det.f, det.phi);
        SqrtParams { det, r: tp.r, jmax: tp.jmax }
    }

    /// Largest block exponent used on a tree of weight `w`.
    pub fn jmax_for(&self, w: u64) -> u32 {
        self.jmax.min(w.max(1).next_power_of_two().trailing_zeros())
    }

    fn count_bits(&self) -> u32 {
        self.det.w_pos + 1
    }
}

/// Bound on the boundary edges of a weight-2^j block in a degree-3 graph.
fn block_cap(j: u32) -> usize {
    3 << j
}

fn lge_bits(j: u32) -> u32 {
    width_for(block_cap(j) as u64)
}

/// `[j][0]` is the share w.r.t. the block holding the smaller-position
/// endpoint, `[j][1]` w.r.t. the block holding the other one.
pub type ShareBundle = Vec<[Option<CodeShare>; 2]>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RevealEntry {
    pub u: u64,
    pub v: u64,
    pub par: u32,
    pub rank_u: u64,
    pub rank_v: u64,
    pub bundle: ShareBundle,
}

/// Item 2 at one level: the level-ℓ non-tree edges touching the ball.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelReveal {
    /// root position of the level tree
    pub tree: u64,
    /// tour weight of the level tree
    pub weight: u64,
    pub entries: Vec<RevealEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockInfo {
    pub lge: u64,
    /// present exactly when lge ≤ 4r
    pub list: Option<Vec<Incidence>>,
}

/// Item 3 at one level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeLevel {
    pub rank_down: u64,
    pub rank_up: u64,
    /// per j: blocks left/right of the down occurrence, then left/right of the up one
    pub blocks: Vec<[Option<BlockInfo>; 4]>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SqrtTreePart {
    pub core: TreeEdgeCore,
    pub levels: Vec<TreeLevel>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EdgeHead {
    NonTree { u: u64, v: u64, par: u32, level: u32 },
    Tree(Box<SqrtTreePart>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SqrtEdgeLabel {
    pub head: EdgeHead,
    /// `reveal[i]` is for level `level() + i`
    pub reveal: Vec<LevelReveal>,
}

fn left_block(rank: u64, j: u32) -> Option<u64> {
    (rank >> j).checked_sub(1)
}

fn right_block(rank: u64, j: u32) -> u64 {
    rank.div_ceil(1 << j)
}

fn write_opt_share(w: &mut BitWriter, s: &Option<CodeShare>, j: u32) {
    w.put_bool(s.is_some());
    if let Some(s) = s {
        write_share(w, s, block_cap(j));
    }
}

fn read_opt_share(r: &mut BitReader, j: u32) -> Result<Option<CodeShare>, BitError> {
    Ok(if r.get_bool()? { Some(read_share(r, block_cap(j))?) } else { None })
}

fn inc_bits(p: &DetParams) -> usize {
    2 * p.w_pos as usize + p.p_bits as usize
}

impl SqrtEdgeLabel {
    pub fn level(&self) -> u32 {
        match &self.head {
            EdgeHead::NonTree { level, .. } => *level,
            EdgeHead::Tree(t) => t.core.level,
        }
    }

    pub fn write(&self, w: &mut BitWriter, sp: &SqrtParams) {
        let p = &sp.det;
        match &self.head {
            EdgeHead::NonTree { u, v, par, level } => {
                w.put_bool(false);
                w.put(*u, p.w_pos);
                w.put(*v, p.w_pos);
                w.put(*par as u64, p.p_bits);
                w.put(*level as u64, p.w_lvl);
            }
            EdgeHead::Tree(t) => {
                w.put_bool(true);
                t.core.write_head(w, p);
            }
        }
        for (i, rv) in self.reveal.iter().enumerate() {
            w.put(rv.tree, p.w_pos);
            w.put(rv.weight, p.w_pos);
            w.put(rv.entries.len() as u64, sp.count_bits());
            for x in &rv.entries {
                for v in [x.u, x.v] {
                    w.put(v, p.w_pos);
                }
                w.put(x.par as u64, p.p_bits);
                w.put(x.rank_u, p.w_pos);
                w.put(x.rank_v, p.w_pos);
                for (j, pair) in x.bundle.iter().enumerate() {
                    write_opt_share(w, &pair[0], j as u32);
                    write_opt_share(w, &pair[1], j as u32);
                }
            }
            if let EdgeHead::Tree(t) = &self.head {
                for s in &t.core.segs[i] {
                    s.write(w, p);
                }
                let tl = &t.levels[i];
                w.put(tl.rank_down, p.w_pos);
                w.put(tl.rank_up, p.w_pos);
                for (j, four) in tl.blocks.iter().enumerate() {
                    let j = j as u32;
                    for b in four {
                        w.put_bool(b.is_some());
                        if let Some(b) = b {
                            w.put(b.lge, lge_bits(j));
                            for x in b.list.iter().flatten() {
                                w.put(x.inner, p.w_pos);
                                w.put(x.outer, p.w_pos);
                                w.put(x.par as u64, p.p_bits);
                            }
                        }
                    }
                }
            }
        }
    }

    /// Serialized length, computed without serializing.
    pub fn bit_len(&self, sp: &SqrtParams) -> usize {
        let p = &sp.det;
        let w = p.w_pos as usize;
        let mut n = 1 + match &self.head {
            EdgeHead::NonTree { .. } => 2 * w + p.p_bits as usize + p.w_lvl as usize,
            EdgeHead::Tree(_) => 3 * w + p.w_lvl as usize,
        };
        for (i, rv) in self.reveal.iter().enumerate() {
            n += 2 * w + sp.count_bits() as usize;
            for x in &rv.entries {
                n += 4 * w + p.p_bits as usize;
                for (j, pair) in x.bundle.iter().enumerate() {
                    let sb = share_bits(block_cap(j as u32));
                    n += 2 + pair.iter().filter(|s| s.is_some()).count() * sb;
                }
            }
            if let EdgeHead::Tree(t) = &self.head {
                n += 12 * w + 2 * w;
                for (j, four) in t.levels[i].blocks.iter().enumerate() {
                    for b in four {
                        n += 1;
                        if let Some(b) = b {
                            n += lge_bits(j as u32) as usize;
                            n += b.list.as_ref().map_or(0, |l| l.len() * inc_bits(p));
                        }
                    }
                }
            }
        }
        n
    }

    pub fn read(r: &mut BitReader, sp: &SqrtParams) -> Result<Self, BitError> {
        let p = &sp.det;
        let mut head = if r.get_bool()? {
            let core = TreeEdgeCore::read_head(r, p)?;
            EdgeHead::Tree(Box::new(SqrtTreePart { core, levels: Vec::new() }))
        } else {
            let u = r.get(p.w_pos)?;
            let v = r.get(p.w_pos)?;
            let par = r.get(p.p_bits)? as u32;
            let level = r.get(p.w_lvl)? as u32;
            if level == 0 || level > p.h {
                return Err(BitError::Malformed("edge level"));
            }
            EdgeHead::NonTree { u, v, par, level }
        };
        let level = match &head {
            EdgeHead::NonTree { level, .. } => *level,
            EdgeHead::Tree(t) => t.core.level,
        };
        let mut reveal = Vec::new();
        for _ in level..=p.h {
            let tree = r.get(p.w_pos)?;
            let weight = r.get(p.w_pos)?;
            let jm = sp.jmax_for(weight);
            let count = r.get(sp.count_bits())? as usize;
            let mut entries = Vec::with_capacity(count.min(1 << 16));
            for _ in 0..count {
                let u = r.get(p.w_pos)?;
                let v = r.get(p.w_pos)?;
                let par = r.get(p.p_bits)? as u32;
                let rank_u = r.get(p.w_pos)?;
                let rank_v = r.get(p.w_pos)?;
                let mut bundle = Vec::with_capacity(jm as usize + 1);
                for j in 0..=jm {
                    bundle.push([read_opt_share(r, j)?, read_opt_share(r, j)?]);
                }
                entries.push(RevealEntry { u, v, par, rank_u, rank_v, bundle });
            }
            reveal.push(LevelReveal { tree, weight, entries });
            if let EdgeHead::Tree(t) = &mut head {
                let mut segs = [SegmentDesc::empty(p); 3];
                for s in &mut segs {
                    *s = SegmentDesc::read(r, p)?;
                }
                t.core.segs.push(segs);
                let rank_down = r.get(p.w_pos)?;
                let rank_up = r.get(p.w_pos)?;
                let mut blocks = Vec::with_capacity(jm as usize + 1);
                for j in 0..=jm {
                    let mut four: [Option<BlockInfo>; 4] = Default::default();
                    for b in &mut four {
                        if r.get_bool()? {
                            let lge = r.get(lge_bits(j))?;
                            let list = if lge as usize <= 4 * sp.r {
                                let mut l = Vec::with_capacity(lge as usize);
                                for _ in 0..lge {
                                    l.push(Incidence {
                                        inner: r.get(p.w_pos)?,
                                        outer: r.get(p.w_pos)?,
                                        par: r.get(p.p_bits)? as u32,
                                    });
                                }
                                Some(l)
                            } else {
                                None
                            };
                            *b = Some(BlockInfo { lge, list });
                        }
                    }
                    blocks.push(four);
                }
                t.levels.push(TreeLevel { rank_down, rank_up, blocks });
            }
        }
        Ok(SqrtEdgeLabel { head, reveal })
    }
}

/// Large-gap mask over `count` boundary edges, where `far(q)` says the
/// outside endpoints of edges q and q+1 are more than r apart.
pub fn lge_mask(count: usize, far: impl Fn(usize) -> bool) -> Vec<bool> {
    let mut mask = vec![false; count];
    if count == 0 {
        return mask;
    }
    mask[0] = true;
    mask[count - 1] = true;
    for q in 0..count - 1 {
        if far(q) {
            mask[q] = true;
            mask[q + 1] = true;
        }
    }
    mask
}

/// One boundary edge of a block, in the order used for large gaps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub id: usize,
    pub inner: u64,
    pub outer: u64,
    pub par: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockData {
    pub boundary: Vec<BoundaryEdge>,
    pub lge: Vec<BoundaryEdge>,
}

fn pack(p: &DetParams, x: &Incidence) -> u64 {
    x.inner | x.outer << p.w_pos | (x.par as u64) << (2 * p.w_pos)
}

fn unpack(p: &DetParams, s: u64) -> Incidence {
    let mask = (1u64 << p.w_pos) - 1;
    Incidence { inner: s & mask, outer: (s >> p.w_pos) & mask, par: (s >> (2 * p.w_pos)) as u32 }
}

/// Builds √f labels for a graph of maximum degree 3.
pub struct SqrtBuilder<'a> {
    pub frame: EulerFrame,
    pub params: SqrtParams,
    g: &'a Graph,
    par: Vec<u32>,
    seg: SegmentIndex,
    /// `[level-1][tree]`
    pub tours: Vec<Vec<WeightedTour>>,
    /// `[level-1][tree][j][block]`
    blocks: Vec<Vec<Vec<Vec<BlockData>>>>,
    /// per non-tree edge, at its own level: `[j][endpoint side in g.edge order]`
    shares: Vec<ShareBundle>,
}

impl<'a> SqrtBuilder<'a> {
    pub fn new(g: &'a Graph, levels: &EdgeLevelAssignment, f: usize) -> Result<Self, SqrtError> {
        if let Some(v) = (0..g.n()).find(|&v| g.degree(v) > 3) {
            return Err(SqrtError::Degree { vertex: v, degree: g.degree(v) });
        }
        let frame = build_frame(g, levels);
        let par = g.parallel_ranks();
        let det = DetParams::new(&frame, f, levels.phi, par.iter().copied().max().unwrap_or(0));
        if 2 * det.w_pos + det.p_bits > 60 {
            return Err(SqrtError::SymbolWidth(2 * det.w_pos + det.p_bits));
        }
        let params = SqrtParams::new(det);
        let tp = TourParams { r: params.r, jmax: params.jmax };
        let seg = SegmentIndex::new(&frame);
        let mut tours = Vec::new();
        let mut blocks = Vec::new();
        let mut shares: Vec<ShareBundle> = vec![Vec::new(); g.m()];
        for l in 1..=frame.h {
            let view = frame.view(l);
            let mut lt = Vec::new();
            let mut lb = Vec::new();
            for (t, tree) in view.trees.iter().enumerate() {
                let wt = frame.weighted(l, t, tp);
                let mut per_j = Vec::new();
                for j in 0..=wt.jmax {
                    let mut per_a = Vec::new();
                    for a in 0..(wt.w_pad >> j) {
                        let data = block_data(g, &frame, &par, &wt, l, tree.positions.as_slice(), j, a, params.r);
                        if !data.lge.is_empty() {
                            let msg: Vec<u64> = data
                                .lge
                                .iter()
                                .map(|b| pack(&det, &Incidence { inner: b.inner, outer: b.outer, par: b.par }))
                                .collect();
                            for (b, s) in data.lge.iter().zip(encode(&msg, 2)?) {
                                let bundle = &mut shares[b.id];
                                if bundle.is_empty() {
                                    *bundle = vec![[None, None]; wt.jmax as usize + 1];
                                }
                                let side = usize::from(frame.dfs[g.edge(b.id).0] as u64 != b.inner);
                                bundle[j as usize][side] = Some(s);
                            }
                        }
                        per_a.push(data);
                    }
                    per_j.push(per_a);
                }
                lb.push(per_j);
                lt.push(wt);
            }
            tours.push(lt);
            blocks.push(lb);
        }
        Ok(SqrtBuilder { frame, params, g, par, seg, tours, blocks, shares })
    }

    /// Boundary and large-gap edges of block `a` of size 2^j in tree `t` at level `l`.
    pub fn block(&self, l: u32, t: usize, j: u32, a: usize) -> &BlockData {
        &self.blocks[l as usize - 1][t][j as usize][a]
    }

    pub fn vertex_label(&self, v: usize) -> VertexLabel {
        VertexLabel { dfs: self.frame.dfs[v] as u64 }
    }

    fn local(&self, l: u32, pos: usize) -> (usize, usize) {
        let view = self.frame.view(l);
        (view.tree_of_pos[pos] as usize, view.local[pos] as usize)
    }

    /// Vertices of Ball_ℓ(e, r) that carry weight; the rest have no level-ℓ non-tree edge.
    pub fn heavy_ball(&self, l: u32, e: usize) -> (usize, Vec<usize>) {
        let fr = &self.frame;
        let centers = if fr.in_tree[e] {
            [fr.down_pos[e], fr.up_pos[e]]
        } else {
            let (a, b) = self.g.edge(e);
            [fr.dfs[a], fr.dfs[b]]
        };
        let (t, _) = self.local(l, centers[0]);
        let wt = &self.tours[l as usize - 1][t];
        let positions = &fr.view(l).trees[t].positions;
        let mut out = Vec::new();
        for c in centers {
            let (_, lc) = self.local(l, c);
            let (lo, hi) = wt.ball_range(lc, self.params.r);
            let s = wt.heavy_pos.partition_point(|&x| x < lo);
            let e = wt.heavy_pos.partition_point(|&x| x <= hi);
            for &li in &wt.heavy_pos[s..e] {
                if let Elem::Vertex(v) = fr.tour[positions[li]] {
                    out.push(v);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        (t, out)
    }

    fn reveal(&self, l: u32, e: usize) -> LevelReveal {
        let fr = &self.frame;
        let (t, verts) = self.heavy_ball(l, e);
        let wt = &self.tours[l as usize - 1][t];
        let view = fr.view(l);
        let mut ids: Vec<usize> = verts
            .iter()
            .flat_map(|&v| self.g.neighbors(v).iter().map(|&(_, x)| x))
            .filter(|&x| !fr.in_tree[x] && fr.level[x] == l)
            .collect();
        ids.sort_unstable();
        ids.dedup();
        let mut entries: Vec<RevealEntry> = ids
            .into_iter()
            .map(|x| {
                let (a, b) = self.g.edge(x);
                let (da, db) = (fr.dfs[a] as u64, fr.dfs[b] as u64);
                let rank = |d: u64| wt.rank(view.local[d as usize] as usize) as u64;
                let bundle: ShareBundle =
                    self.shares[x].iter().map(|pr| if da < db { *pr } else { [pr[1], pr[0]] }).collect();
                let bundle =
                    if bundle.is_empty() { vec![[None, None]; wt.jmax as usize + 1] } else { bundle };
                RevealEntry {
                    u: da.min(db),
                    v: da.max(db),
                    par: self.par[x],
                    rank_u: rank(da.min(db)),
                    rank_v: rank(da.max(db)),
                    bundle,
                }
            })
            .collect();
        entries.sort_by_key(|x| (x.u, x.v, x.par));
        LevelReveal { tree: view.trees[t].positions[0] as u64, weight: wt.w as u64, entries }
    }

    fn block_info(&self, l: u32, t: usize, j: u32, a: Option<u64>) -> Option<BlockInfo> {
        let per_a = &self.blocks[l as usize - 1][t][j as usize];
        let d = per_a.get(a? as usize)?;
        let lge = d.lge.len() as u64;
        let list = (d.lge.len() <= 4 * self.params.r)
            .then(|| d.lge.iter().map(|b| Incidence { inner: b.inner, outer: b.outer, par: b.par }).collect());
        Some(BlockInfo { lge, list })
    }

    pub fn edge_label(&self, e: usize) -> SqrtEdgeLabel {
        let fr = &self.frame;
        let level = fr.level[e];
        let reveal = (level..=fr.h).map(|l| self.reveal(l, e)).collect();
        let head = if fr.in_tree[e] {
            let core = self.seg.core(fr, &self.params.det, e);
            let levels = (level..=fr.h)
                .map(|l| {
                    let (t, ld) = self.local(l, fr.down_pos[e]);
                    let (_, lu) = self.local(l, fr.up_pos[e]);
                    let wt = &self.tours[l as usize - 1][t];
                    let (rd, ru) = (wt.rank(ld) as u64, wt.rank(lu) as u64);
                    let blocks = (0..=wt.jmax)
                        .map(|j| {
                            [
                                self.block_info(l, t, j, left_block(rd, j)),
                                self.block_info(l, t, j, Some(right_block(rd, j))),
                                self.block_info(l, t, j, left_block(ru, j)),
                                self.block_info(l, t, j, Some(right_block(ru, j))),
                            ]
                        })
                        .collect();
                    TreeLevel { rank_down: rd, rank_up: ru, blocks }
                })
                .collect();
            EdgeHead::Tree(Box::new(SqrtTreePart { core, levels }))
        } else {
            let (a, b) = self.g.edge(e);
            let (u, v, par) = edge_key(fr.dfs[a] as u64, fr.dfs[b] as u64, self.par[e]);
            EdgeHead::NonTree { u, v, par, level }
        };
        SqrtEdgeLabel { head, reveal }
    }

    pub fn comp_starts(&self) -> Vec<u64> {
        self.frame.comp_starts.iter().map(|&p| p as u64).collect()
    }
}

#[allow(clippy::too_many_arguments)]
fn block_data(
    g: &Graph,
    fr: &EulerFrame,
    par: &[u32],
    wt: &WeightedTour,
    l: u32,
    positions: &[usize],
    j: u32,
    a: usize,
    r: usize,
) -> BlockData {
    let view = fr.view(l);
    let mut boundary = Vec::new();
    let mut outer_local = Vec::new();
    for &li in wt.block_heavy(j, a) {
        let Elem::Vertex(u) = fr.tour[positions[li]] else { continue };
        for &(v, e) in g.neighbors(u) {
            if fr.in_tree[e] || fr.level[e] != l {
                continue;
            }
            let lv = view.local[fr.dfs[v]] as usize;
            if wt.rank(lv) >> j != a {
                boundary.push((BoundaryEdge { id: e, inner: fr.dfs[u] as u64, outer: fr.dfs[v] as u64, par: par[e] }, lv));
            }
        }
    }
    boundary.sort_by_key(|(b, _)| (b.outer, b.id));
    outer_local.extend(boundary.iter().map(|&(_, lv)| lv));
    let mask = lge_mask(boundary.len(), |q| wt.dist(outer_local[q], outer_local[q + 1]) > r);
    let boundary: Vec<BoundaryEdge> = boundary.into_iter().map(|(b, _)| b).collect();
    let lge = boundary.iter().zip(&mask).filter(|(_, &m)| m).map(|(b, _)| *b).collect();
    BlockData { boundary, lge }
}

/// All labels of a degree-3 graph, materialized.
#[derive(Clone, Debug)]
pub struct SqrtLabels {
    pub params: SqrtParams,
    pub comp_starts: Vec<u64>,
    pub vertices: Vec<VertexLabel>,
    pub edges: Vec<SqrtEdgeLabel>,
}

pub fn build_sqrt(g3: &Graph, levels: &EdgeLevelAssignment, f: usize) -> Result<SqrtLabels, SqrtError> {
    let b = SqrtBuilder::new(g3, levels, f)?;
    Ok(SqrtLabels {
        params: b.params,
        comp_starts: b.comp_starts(),
        vertices: (0..g3.n()).map(|v| b.vertex_label(v)).collect(),
        edges: (0..g3.m()).map(|e| b.edge_label(e)).collect(),
    })
}

/// Labels for an arbitrary graph, built on its degree-3 reduction. Vertex
/// and edge labels are indexed by the original ids.
pub fn build_sqrt_any(g: &Graph, mode: Mode, f: usize) -> Result<(SqrtLabels, Degree3Reduction), SqrtError> {
    let red = if g.max_degree() <= 3 { Degree3Reduction::identity(g) } else { reduce_degree3(g) };
    let levels = build_edge_hierarchy(&red.reduced, mode)?;
    let mut labels = build_sqrt(&red.reduced, &levels, f)?;
    labels.vertices = red.vertex_map.iter().map(|&v| labels.vertices[v]).collect();
    labels.edges = red.edge_map.iter().map(|&e| labels.edges[e].clone()).collect();
    Ok((labels, red))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Case {
    /// short large-gap list read from a separator's label
    Stored,
    /// list rebuilt from revealed shares
    Decoded,
    /// too few shares: the interval joins the large-volume component
    Giant,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockTrace {
    pub level: u32,
    pub tree: u64,
    pub interval: usize,
    pub j: u32,
    pub a: u64,
    pub case: Case,
    /// large-gap edges learned for the block (empty in the giant case)
    pub lge: Vec<EdgeKey>,
}

/// What the query did, for instrumentation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QueryTrace {
    pub blocks: Vec<BlockTrace>,
    /// intervals marked directly because their weight exceeds ⌊f/φ⌋
    pub heavy_intervals: Vec<(u32, u64, usize)>,
    /// per (level, tree): every edge revealed by the fault set
    pub revealed: Vec<(u32, u64, Vec<EdgeKey>)>,
}

impl QueryTrace {
    pub fn count(&self, case: Case) -> usize {
        self.blocks.iter().filter(|b| b.case == case).count()
    }
}

struct SqrtRules<'a> {
    p: &'a SqrtParams,
    labels: &'a [&'a SqrtEdgeLabel],
    trees: &'a [&'a SqrtTreePart],
    failed: &'a HashSet<EdgeKey>,
    trace: QueryTrace,
}

impl SqrtRules<'_> {
    fn tree_level(&self, ctx: &TreeCtx, e: usize) -> &TreeLevel {
        let t = self.trees[ctx.edge_ids[e]];
        &t.levels[(ctx.level - t.core.level) as usize]
    }

    fn sep_rank(&self, ctx: &TreeCtx, s: usize) -> u64 {
        let sep = ctx.seps[s];
        let tl = self.tree_level(ctx, sep.edge);
        if sep.down {
            tl.rank_down
        } else {
            tl.rank_up
        }
    }

    /// The stored block (j, a) next to one of the separators bounding interval i.
    fn lookup(&self, ctx: &TreeCtx, i: usize, j: u32, a: u64) -> Result<&BlockInfo, QueryError> {
        let missing = QueryError::Malformed("block not stored next to a separator");
        if i > 0 {
            let sep = ctx.seps[i - 1];
            if right_block(self.sep_rank(ctx, i - 1), j) == a {
                let slot = if sep.down { 1 } else { 3 };
                return self.tree_level(ctx, sep.edge).blocks.get(j as usize).and_then(|b| b[slot].as_ref()).ok_or(missing);
            }
        }
        if i < ctx.seps.len() {
            let sep = ctx.seps[i];
            if left_block(self.sep_rank(ctx, i), j) == Some(a) {
                let slot = if sep.down { 0 } else { 2 };
                return self.tree_level(ctx, sep.edge).blocks.get(j as usize).and_then(|b| b[slot].as_ref()).ok_or(missing);
            }
        }
        Err(missing)
    }
}

impl LevelRules for SqrtRules<'_> {
    fn apply(&mut self, ctx: &TreeCtx, dsu: &mut Dsu) -> Result<(), QueryError> {
        let l = ctx.level;
        let reveals: Vec<&LevelReveal> = self
            .labels
            .iter()
            .filter(|lab| lab.level() <= l)
            .map(|lab| &lab.reveal[(l - lab.level()) as usize])
            .filter(|rv| rv.tree == ctx.tree_id)
            .collect();
        let weight = reveals.first().ok_or(QueryError::Malformed("tree edge without reveal section"))?.weight;
        if reveals.iter().any(|rv| rv.weight != weight) {
            return Err(QueryError::Malformed("labels disagree on tree weight"));
        }
        let jm = self.p.jmax_for(weight);
        // R3 over revealed edges, and pool their shares by block
        let mut pool: HashMap<(u32, u64), HashMap<u32, CodeShare>> = HashMap::new();
        let mut revealed = Vec::new();
        for rv in &reveals {
            for x in &rv.entries {
                let key = edge_key(x.u, x.v, x.par);
                revealed.push(key);
                if !self.failed.contains(&key) {
                    dsu.union(ctx.locate(x.u), ctx.locate(x.v));
                }
                for (j, pair) in x.bundle.iter().enumerate().take(jm as usize + 1) {
                    let j = j as u32;
                    for (s, rank) in pair.iter().zip([x.rank_u, x.rank_v]) {
                        if let Some(s) = s {
                            pool.entry((j, rank >> j)).or_default().insert(s.index, *s);
                        }
                    }
                }
            }
        }
        revealed.sort_unstable();
        revealed.dedup();
        self.trace.revealed.push((l, ctx.tree_id, revealed));

        let k = ctx.intervals();
        let mut giant = vec![false; k];
        let budget = self.p.det.budget() as u64;
        for i in 0..k {
            let lo = if i == 0 { 0 } else { self.sep_rank(ctx, i - 1) };
            let hi = if i + 1 == k { weight } else { self.sep_rank(ctx, i) };
            if hi < lo {
                return Err(QueryError::Malformed("separator ranks out of order"));
            }
            if hi - lo > budget {
                giant[i] = true;
                self.trace.heavy_intervals.push((l, ctx.tree_id, i));
                continue;
            }
            let blocks: Vec<(u32, u64)> = if i + 1 == k {
                // run up from the last separator; blocks past the weight hold only padding
                let mut out = Vec::new();
                let mut x = lo;
                while x < hi {
                    let j = jm.min(x.trailing_zeros());
                    out.push((j, x >> j));
                    x += 1 << j;
                }
                out
            } else {
                dyadic_blocks(lo as usize, hi as usize, jm).into_iter().map(|(j, a)| (j, a as u64)).collect()
            };
            for (j, a) in blocks {
                let info = self.lookup(ctx, i, j, a)?;
                if info.lge == 0 {
                    continue;
                }
                let (case, list) = if let Some(list) = &info.list {
                    (Case::Stored, list.clone())
                } else {
                    let have: Vec<CodeShare> =
                        pool.get(&(j, a)).map(|m| m.values().copied().collect()).unwrap_or_default();
                    if have.len() as u64 >= info.lge.div_ceil(2) {
                        let mut have = have;
                        have.sort_by_key(|s| s.index);
                        let msg = decode(&have, info.lge as usize, 2)?;
                        (Case::Decoded, msg.into_iter().map(|s| unpack(&self.p.det, s)).collect())
                    } else {
                        giant[i] = true;
                        (Case::Giant, Vec::new())
                    }
                };
                for x in &list {
                    if !self.failed.contains(&edge_key(x.inner, x.outer, x.par)) {
                        dsu.union(ctx.locate(x.inner), ctx.locate(x.outer));
                    }
                }
                self.trace.blocks.push(BlockTrace {
                    level: l,
                    tree: ctx.tree_id,
                    interval: i,
                    j,
                    a,
                    case,
                    lge: list.iter().map(|x| edge_key(x.inner, x.outer, x.par)).collect(),
                });
            }
        }
        // R4′: every marked interval sits in the one large-volume component
        let marked: Vec<usize> = (0..k).filter(|&i| giant[i]).collect();
        for w in marked.windows(2) {
            dsu.union(w[0], w[1]);
        }
        Ok(())
    }
}

/// Answers connectivity for one fault set from labels alone.
pub fn query_sqrt(
    p: &SqrtParams,
    comp_starts: &[u64],
    faults: &[&SqrtEdgeLabel],
) -> Result<(DetAnswer, QueryTrace), QueryError> {
    let mut labels: Vec<&SqrtEdgeLabel> = Vec::new();
    let mut trees: Vec<&SqrtTreePart> = Vec::new();
    let mut failed = HashSet::new();
    let mut seen_tree = HashSet::new();
    for &lab in faults {
        if lab.reveal.len() != (p.det.h + 1 - lab.level()) as usize {
            return Err(QueryError::Malformed("level count"));
        }
        match &lab.head {
            EdgeHead::NonTree { u, v, par, .. } => {
                if failed.insert(edge_key(*u, *v, *par)) {
                    labels.push(lab);
                }
            }
            EdgeHead::Tree(t) => {
                if seen_tree.insert(t.core.child) {
                    trees.push(t);
                    labels.push(lab);
                }
            }
        }
    }
    if labels.len() > p.det.f {
        return Err(QueryError::TooManyFaults { got: labels.len(), f: p.det.f });
    }
    let cores: Vec<&TreeEdgeCore> = trees.iter().map(|t| &t.core).collect();
    let mut rules = SqrtRules { p, labels: &labels, trees: &trees, failed: &failed, trace: QueryTrace::default() };
    let ans = run_levels(&p.det, comp_starts, &cores, &mut rules)?;
    Ok((ans, rules.trace))
}
