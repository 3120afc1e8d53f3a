//! Randomized edge-fault labels built from XOR sketches.
//!
//! The long scheme stores one random `f + c·lg`-bit word per edge and recovers
//! components of `G − F` by Gaussian elimination over GF(2). The short scheme
//! adds an ℓ0 cut-sketch matrix of edge uids, runs Borůvka steps on it, and
//! only falls back to elimination for the few parts left over.

use crate::bits::{ceil_log2, BitError, BitReader, BitWriter};
use crate::dsu::Dsu;
use crate::graph::Graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RandError {
    #[error("distinguisher multiplier must be odd")]
    EvenMultiplier,
    #[error("{got} faults exceed the budget f = {f}")]
    TooManyFaults { got: usize, f: usize },
    #[error("label was built with a different seed")]
    SeedMismatch,
    #[error("malformed label: {0}")]
    Malformed(&'static str),
    #[error(transparent)]
    Bits(#[from] BitError),
}

/// `1` iff `a·x mod 2^w < t`. `t` may equal `2^w`.
pub fn sample(a: u64, t: u128, x: u64, w: u32) -> Result<bool, RandError> {
    if a & 1 == 0 {
        return Err(RandError::EvenMultiplier);
    }
    let m = if w >= 128 { u128::MAX } else { (1u128 << w) - 1 };
    Ok(((a as u128).wrapping_mul(x as u128) & m) < t)
}

fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= *s;
    }
}

fn is_zero(v: &[u64]) -> bool {
    v.iter().all(|&w| w == 0)
}

fn random_bits(rng: &mut ChaCha8Rng, bits: usize) -> Vec<u64> {
    let mut v: Vec<u64> = (0..bits.div_ceil(64)).map(|_| rng.random()).collect();
    if bits % 64 != 0 {
        *v.last_mut().unwrap() &= (1u64 << (bits % 64)) - 1;
    }
    v
}

/// The `c·lg` `(a, t)` pairs behind every signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Distinguishers {
    pub w: u32,
    pub pairs: Vec<(u64, u128)>,
}

impl Distinguishers {
    pub fn from_seed(seed: u64, lg: u32, c: u32) -> Self {
        let w = 2 * lg;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        let mask = if w >= 64 { u64::MAX } else { (1u64 << w) - 1 };
        let pairs = (0..(c * lg) as usize)
            .map(|_| {
                let a = (rng.random::<u64>() & mask) | 1;
                let t = (rng.random::<u64>() & mask) as u128;
                (a, t)
            })
            .collect();
        Distinguishers { w, pairs }
    }

    pub fn sig_bits(&self) -> usize {
        self.pairs.len()
    }

    pub fn uid_bits(&self) -> usize {
        self.w as usize + self.sig_bits()
    }

    fn sig_bit(&self, k: usize, x: u64) -> bool {
        let (a, t) = self.pairs[k];
        sample(a, t, x, self.w).expect("multipliers are odd by construction")
    }

    /// `uid(x) = (x, Sig(x))` laid out as `w` name bits then the signature.
    pub fn uid(&self, x: u64) -> Vec<u64> {
        let mut out = vec![0u64; self.uid_bits().div_ceil(64)];
        let w = self.w as usize;
        for i in 0..w {
            if (x >> i) & 1 == 1 {
                out[i / 64] |= 1 << (i % 64);
            }
        }
        for k in 0..self.sig_bits() {
            if self.sig_bit(k, x) {
                let i = w + k;
                out[i / 64] |= 1 << (i % 64);
            }
        }
        out
    }

    /// Returns the embedded name when `agg` looks like exactly one uid.
    pub fn singleton(&self, agg: &[u64]) -> Option<u64> {
        if is_zero(agg) {
            return None;
        }
        let w = self.w as usize;
        let mut x = 0u64;
        for i in 0..w {
            if (agg[i / 64] >> (i % 64)) & 1 == 1 {
                x |= 1 << i;
            }
        }
        let ok = (0..self.sig_bits()).all(|k| {
            let i = w + k;
            ((agg[i / 64] >> (i % 64)) & 1 == 1) == self.sig_bit(k, x)
        });
        ok.then_some(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RandScheme {
    Long,
    Short,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandConfig {
    /// Signature length is `c·lg`; the long scheme pads its sketch by the same amount.
    pub c: u32,
    /// Added to `⌈log₂(f/lg²)⌉` to get the number of Borůvka rows.
    pub row_offset: u32,
}

impl Default for RandConfig {
    fn default() -> Self {
        RandConfig { c: 4, row_offset: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RandParams {
    pub scheme: RandScheme,
    pub n: usize,
    pub f: usize,
    pub lg: u32,
    pub c: u32,
    /// sk⁰ width.
    pub l0: usize,
    /// Borůvka rows and ranks per row (both 0 for the long scheme).
    pub rows: usize,
    pub ranks: usize,
    pub seed: u64,
}

pub fn lg_of(n: usize) -> u32 {
    ceil_log2(n as u64).max(1)
}

/// The short scheme only pays off once `f ≥ 2·lg²`.
pub fn short_applies(n: usize, f: usize) -> bool {
    let lg = lg_of(n) as usize;
    f >= 2 * lg * lg
}

impl RandParams {
    /// Picks the short scheme only when requested and `short_applies`.
    pub fn new(n: usize, m: usize, f: usize, want: RandScheme, cfg: RandConfig, seed: u64) -> Self {
        let lg = lg_of(n);
        let scheme = if want == RandScheme::Short && short_applies(n, f) { RandScheme::Short } else { RandScheme::Long };
        match scheme {
            RandScheme::Long => RandParams {
                scheme,
                n,
                f,
                lg,
                c: cfg.c,
                l0: f + (cfg.c * lg) as usize,
                rows: 0,
                ranks: 0,
                seed,
            },
            RandScheme::Short => {
                let sq = (lg * lg) as f64;
                let b = ((f as f64 / sq).log2().ceil() as i64 + cfg.row_offset as i64).max(1) as usize;
                RandParams {
                    scheme,
                    n,
                    f,
                    lg,
                    c: cfg.c,
                    l0: (lg * lg) as usize,
                    rows: b,
                    ranks: ceil_log2(m.max(1) as u64) as usize + 2,
                    seed,
                }
            }
        }
    }

    pub fn distinguishers(&self) -> Distinguishers {
        Distinguishers::from_seed(self.seed, self.lg, self.c)
    }

    pub fn uid_bits(&self) -> usize {
        (2 * self.lg + self.c * self.lg) as usize
    }

    fn cell_words(&self) -> usize {
        self.uid_bits().div_ceil(64)
    }

    fn matrix_words(&self) -> usize {
        self.rows * self.ranks * self.cell_words()
    }

    /// 16-bit reference to the file-level seed carried by short labels.
    pub fn seed_ref(&self) -> u16 {
        let s = self.seed;
        (s ^ (s >> 16) ^ (s >> 32) ^ (s >> 48)) as u16
    }

    pub fn pack(&self, a: u32, b: u32) -> u64 {
        a as u64 | ((b as u64) << self.lg)
    }

    pub fn unpack(&self, x: u64) -> (u32, u32) {
        let m = (1u64 << self.lg) - 1;
        ((x & m) as u32, (x >> self.lg) as u32)
    }

    /// Serialized length of every edge label: tag bit plus payload.
    pub fn edge_label_bits(&self) -> usize {
        1 + self.payload_bits()
    }

    pub fn payload_bits(&self) -> usize {
        let base = 2 * self.lg as usize + self.l0;
        match self.scheme {
            RandScheme::Long => base,
            RandScheme::Short => base + 16 + self.rows * self.ranks * self.uid_bits(),
        }
    }
}

/// Subtree DFS range `[lo, hi]`; `lo` is the vertex's own number.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RangeLabel {
    pub lo: u32,
    pub hi: u32,
}

impl RangeLabel {
    pub fn write(&self, w: &mut BitWriter, p: &RandParams) {
        w.put(self.lo as u64, p.lg);
        w.put(self.hi as u64, p.lg);
    }

    pub fn read(r: &mut BitReader, p: &RandParams) -> Result<Self, RandError> {
        Ok(RangeLabel { lo: r.get(p.lg)? as u32, hi: r.get(p.lg)? as u32 })
    }

    pub fn contains(&self, x: u32) -> bool {
        self.lo <= x && x <= self.hi
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ends {
    /// Child subtree of a spanning-forest edge.
    Tree(RangeLabel),
    /// DFS numbers of the endpoints, `u ≤ v`.
    NonTree { u: u32, v: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RandEdgeLabel {
    pub ends: Ends,
    pub seed_ref: u16,
    pub sk0: Vec<u64>,
    /// Flattened `rows × ranks` uid cells; empty for the long scheme.
    pub sk: Vec<u64>,
}

impl RandEdgeLabel {
    pub fn write(&self, w: &mut BitWriter, p: &RandParams) {
        match self.ends {
            Ends::Tree(r) => {
                w.put_bool(true);
                r.write(w, p);
            }
            Ends::NonTree { u, v } => {
                w.put_bool(false);
                w.put(u as u64, p.lg);
                w.put(v as u64, p.lg);
            }
        }
        if p.scheme == RandScheme::Short {
            w.put(self.seed_ref as u64, 16);
        }
        w.put_bits(&self.sk0, p.l0);
        let cw = p.cell_words();
        for cell in self.sk.chunks(cw.max(1)) {
            w.put_bits(cell, p.uid_bits());
        }
    }

    pub fn read(r: &mut BitReader, p: &RandParams) -> Result<Self, RandError> {
        let ends = if r.get_bool()? {
            Ends::Tree(RangeLabel::read(r, p)?)
        } else {
            Ends::NonTree { u: r.get(p.lg)? as u32, v: r.get(p.lg)? as u32 }
        };
        let seed_ref = if p.scheme == RandScheme::Short { r.get(16)? as u16 } else { 0 };
        let sk0 = r.get_bits(p.l0)?;
        let mut sk = Vec::with_capacity(p.matrix_words());
        for _ in 0..p.rows * p.ranks {
            let mut cell = r.get_bits(p.uid_bits())?;
            cell.resize(p.cell_words(), 0);
            sk.extend(cell);
        }
        Ok(RandEdgeLabel { ends, seed_ref, sk0, sk })
    }
}

#[derive(Clone, Debug)]
pub struct RandLabels {
    pub params: RandParams,
    /// DFS number of the first vertex of each input component.
    pub comp_starts: Vec<u32>,
    pub vertices: Vec<RangeLabel>,
    pub edges: Vec<RandEdgeLabel>,
    pub in_tree: Vec<bool>,
}

struct Forest {
    dfs: Vec<u32>,
    size: Vec<u32>,
    parent_edge: Vec<Option<usize>>,
    /// Vertices in preorder.
    order: Vec<usize>,
    comp_starts: Vec<u32>,
}

/// BFS spanning forest, numbered by a preorder walk of each BFS tree.
fn bfs_forest(g: &Graph) -> Forest {
    let n = g.n();
    let mut parent_edge = vec![None; n];
    let mut seen = vec![false; n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut roots = Vec::new();
    for r in 0..n {
        if seen[r] {
            continue;
        }
        seen[r] = true;
        roots.push(r);
        let mut queue = std::collections::VecDeque::from([r]);
        while let Some(x) = queue.pop_front() {
            for &(y, e) in g.neighbors(x) {
                if !seen[y] {
                    seen[y] = true;
                    parent_edge[y] = Some(e);
                    children[x].push(y);
                    queue.push_back(y);
                }
            }
        }
    }
    let mut dfs = vec![0u32; n];
    let mut size = vec![1u32; n];
    let mut order = Vec::with_capacity(n);
    let mut comp_starts = Vec::new();
    for &r in &roots {
        comp_starts.push(order.len() as u32);
        let mut stack = vec![r];
        while let Some(x) = stack.pop() {
            dfs[x] = order.len() as u32;
            order.push(x);
            stack.extend(children[x].iter().rev());
        }
    }
    for &x in order.iter().rev() {
        if let Some(e) = parent_edge[x] {
            let p = g.other(e, x);
            size[p] += size[x];
        }
    }
    Forest { dfs, size, parent_edge, order, comp_starts }
}

/// Builds long labels, or short ones when `want` is short and `f ≥ 2·lg²`.
pub fn build_rand(g: &Graph, f: usize, want: RandScheme, cfg: RandConfig, seed: u64) -> RandLabels {
    let p = RandParams::new(g.n(), g.m(), f, want, cfg, seed);
    let d = p.distinguishers();
    let fo = bfs_forest(g);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_tree = vec![false; g.m()];
    for e in fo.parent_edge.iter().flatten() {
        in_tree[*e] = true;
    }
    let mw = p.matrix_words();
    let cw = p.cell_words();
    let mut e_sk0 = vec![Vec::new(); g.m()];
    let mut e_sk = vec![Vec::new(); g.m()];
    let mut v_sk0 = vec![vec![0u64; p.l0.div_ceil(64)]; g.n()];
    let mut v_sk = vec![vec![0u64; mw]; g.n()];
    for (e, &(a, b)) in g.edges().iter().enumerate() {
        if in_tree[e] {
            continue;
        }
        let s0 = random_bits(&mut rng, p.l0);
        let mut sk = vec![0u64; mw];
        if p.scheme == RandScheme::Short {
            let (x, y) = (fo.dfs[a].min(fo.dfs[b]), fo.dfs[a].max(fo.dfs[b]));
            let uid = d.uid(p.pack(x, y));
            for i in 0..p.rows {
                let mut j = 0;
                while j + 1 < p.ranks && rng.random_bool(0.5) {
                    j += 1;
                }
                let at = (i * p.ranks + j) * cw;
                sk[at..at + cw].copy_from_slice(&uid);
            }
        }
        for v in [a, b] {
            xor_into(&mut v_sk0[v], &s0);
            xor_into(&mut v_sk[v], &sk);
        }
        e_sk0[e] = s0;
        e_sk[e] = sk;
    }
    // Subtree aggregates, children before parents.
    for &x in fo.order.iter().rev() {
        if let Some(e) = fo.parent_edge[x] {
            let par = g.other(e, x);
            let (s0, sk) = (v_sk0[x].clone(), v_sk[x].clone());
            xor_into(&mut v_sk0[par], &s0);
            xor_into(&mut v_sk[par], &sk);
        }
    }
    let range = |v: usize| RangeLabel { lo: fo.dfs[v], hi: fo.dfs[v] + fo.size[v] - 1 };
    let mut child_of = vec![usize::MAX; g.m()];
    for (v, pe) in fo.parent_edge.iter().enumerate() {
        if let Some(e) = pe {
            child_of[*e] = v;
        }
    }
    let seed_ref = if p.scheme == RandScheme::Short { p.seed_ref() } else { 0 };
    let edges = (0..g.m())
        .map(|e| {
            if in_tree[e] {
                let c = child_of[e];
                RandEdgeLabel { ends: Ends::Tree(range(c)), seed_ref, sk0: v_sk0[c].clone(), sk: v_sk[c].clone() }
            } else {
                let (a, b) = g.edge(e);
                let (u, v) = (fo.dfs[a].min(fo.dfs[b]), fo.dfs[a].max(fo.dfs[b]));
                RandEdgeLabel {
                    ends: Ends::NonTree { u, v },
                    seed_ref,
                    sk0: std::mem::take(&mut e_sk0[e]),
                    sk: std::mem::take(&mut e_sk[e]),
                }
            }
        })
        .collect();
    RandLabels {
        params: p,
        comp_starts: fo.comp_starts,
        vertices: (0..g.n()).map(range).collect(),
        edges,
        in_tree,
    }
}

/// Pieces of the spanning forest after deleting the faulty tree edges, with
/// their sketches over `E − F`.
#[derive(Clone, Debug)]
pub struct Parts {
    /// Failed subtree ranges, sorted by `(lo, hi desc)`; part `i < cuts.len()` hangs below cut `i`.
    pub cuts: Vec<RangeLabel>,
    /// A DFS number inside each part.
    pub rep: Vec<u32>,
    /// Input component of each part.
    pub comp: Vec<usize>,
    pub sk0: Vec<Vec<u64>>,
    pub sk: Vec<Vec<u64>>,
    root_part: HashMap<usize, usize>,
    comp_starts: Vec<u32>,
}

impl Parts {
    pub fn comp_of(&self, x: u32) -> usize {
        self.comp_starts.partition_point(|&s| s <= x) - 1
    }

    fn deepest_cut(&self, x: u32, strictly_inside: Option<usize>) -> Option<usize> {
        let end = self.cuts.partition_point(|c| c.lo <= x);
        (0..end).rev().find(|&i| self.cuts[i].contains(x) && Some(i) != strictly_inside && {
            // skip cuts nested inside the one we are looking outward from
            strictly_inside.is_none_or(|s| {
                let (a, b) = (self.cuts[i], self.cuts[s]);
                a.lo <= b.lo && b.hi <= a.hi
            })
        })
    }

    /// Part containing DFS number `x`, or `None` if its component has no failed tree edge.
    pub fn part_of(&self, x: u32) -> Option<usize> {
        match self.deepest_cut(x, None) {
            Some(i) => Some(i),
            None => self.root_part.get(&self.comp_of(x)).copied(),
        }
    }

    pub fn len(&self) -> usize {
        self.rep.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rep.is_empty()
    }
}

/// Splits the forest at the failed tree edges and removes failed non-tree edges from the sketches.
pub fn split_parts(p: &RandParams, comp_starts: &[u32], faults: &[&RandEdgeLabel]) -> Result<Parts, RandError> {
    if faults.len() > p.f {
        return Err(RandError::TooManyFaults { got: faults.len(), f: p.f });
    }
    if comp_starts.first() != Some(&0) && p.n > 0 {
        return Err(RandError::Malformed("component table"));
    }
    let n = p.n as u32;
    let mw = p.matrix_words();
    let w0 = p.l0.div_ceil(64);
    for l in faults {
        if p.scheme == RandScheme::Short && l.seed_ref != p.seed_ref() {
            return Err(RandError::SeedMismatch);
        }
        if l.sk0.len() != w0 || l.sk.len() != mw {
            return Err(RandError::Malformed("sketch width"));
        }
        match l.ends {
            Ends::Tree(r) if r.lo > r.hi || r.hi >= n => return Err(RandError::Malformed("subtree range")),
            Ends::NonTree { u, v } if u > v || v >= n => return Err(RandError::Malformed("endpoints")),
            _ => {}
        }
    }
    let mut tree: Vec<&RandEdgeLabel> = faults.iter().copied().filter(|l| matches!(l.ends, Ends::Tree(_))).collect();
    let key = |l: &RandEdgeLabel| match l.ends {
        Ends::Tree(r) => (r.lo, u32::MAX - r.hi),
        _ => unreachable!(),
    };
    tree.sort_by_key(|l| key(l));
    if tree.windows(2).any(|w| key(w[0]) == key(w[1])) {
        return Err(RandError::Malformed("tree edge listed twice"));
    }
    let cuts: Vec<RangeLabel> = tree
        .iter()
        .map(|l| match l.ends {
            Ends::Tree(r) => r,
            _ => unreachable!(),
        })
        .collect();
    let mut parts = Parts {
        rep: cuts.iter().map(|c| c.lo).collect(),
        comp: Vec::new(),
        sk0: tree.iter().map(|l| l.sk0.clone()).collect(),
        sk: tree.iter().map(|l| l.sk.clone()).collect(),
        cuts,
        root_part: HashMap::new(),
        comp_starts: comp_starts.to_vec(),
    };
    parts.comp = parts.rep.iter().map(|&x| parts.comp_of(x)).collect();
    for i in 0..parts.cuts.len() {
        let c = parts.comp[i];
        if !parts.root_part.contains_key(&c) {
            let id = parts.rep.len();
            parts.root_part.insert(c, id);
            parts.rep.push(comp_starts[c]);
            parts.comp.push(c);
            parts.sk0.push(vec![0u64; w0]);
            parts.sk.push(vec![0u64; mw]);
        }
    }
    // Each cut's aggregate also belongs to the part just outside it.
    for i in 0..parts.cuts.len() {
        let outer = match parts.deepest_cut(parts.cuts[i].lo, Some(i)) {
            Some(j) => j,
            None => parts.root_part[&parts.comp[i]],
        };
        let (s0, sk) = (tree[i].sk0.clone(), tree[i].sk.clone());
        xor_into(&mut parts.sk0[outer], &s0);
        xor_into(&mut parts.sk[outer], &sk);
    }
    for l in faults {
        if let Ends::NonTree { u, v } = l.ends {
            let (Some(a), Some(b)) = (parts.part_of(u), parts.part_of(v)) else { continue };
            if a != b {
                for x in [a, b] {
                    xor_into(&mut parts.sk0[x], &l.sk0);
                    xor_into(&mut parts.sk[x], &l.sk);
                }
            }
        }
    }
    Ok(parts)
}

/// Recursively splits `set` along zero-XOR subsets; leaves are the groups.
pub fn zero_sum_split(sk: &[Vec<u64>], set: Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if set.len() <= 1 {
        out.push(set);
        return;
    }
    let k = set.len();
    let kw = k.div_ceil(64);
    // Rows are (sketch, combination); reduce with pivots keyed by highest set bit.
    let mut pivots: HashMap<usize, (Vec<u64>, Vec<u64>)> = HashMap::new();
    let mut kernel: Vec<Vec<u64>> = Vec::new();
    for (idx, &item) in set.iter().enumerate() {
        let mut v = sk[item].clone();
        let mut comb = vec![0u64; kw];
        comb[idx / 64] |= 1 << (idx % 64);
        loop {
            let Some(top) = highest_bit(&v) else {
                kernel.push(comb);
                break;
            };
            match pivots.get(&top) {
                Some((pv, pc)) => {
                    xor_into(&mut v, pv);
                    xor_into(&mut comb, pc);
                }
                None => {
                    pivots.insert(top, (v, comb));
                    break;
                }
            }
        }
    }
    let full: Vec<u64> = (0..kw)
        .map(|w| if (w + 1) * 64 <= k { u64::MAX } else { (1u64 << (k % 64)) - 1 })
        .collect();
    let Some(cut) = kernel.into_iter().find(|c| *c != full) else {
        out.push(set);
        return;
    };
    let (inside, outside): (Vec<(usize, usize)>, Vec<(usize, usize)>) =
        set.iter().copied().enumerate().partition(|&(i, _)| (cut[i / 64] >> (i % 64)) & 1 == 1);
    zero_sum_split(sk, inside.into_iter().map(|x| x.1).collect(), out);
    zero_sum_split(sk, outside.into_iter().map(|x| x.1).collect(), out);
}

fn highest_bit(v: &[u64]) -> Option<usize> {
    v.iter().enumerate().rev().find(|(_, &w)| w != 0).map(|(i, &w)| i * 64 + 63 - w.leading_zeros() as usize)
}

/// Per Borůvka step: the group of every part before the step and how many groups had a non-zero sk⁰.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BoruvkaTrace {
    pub groups: Vec<Vec<usize>>,
    pub nonisolated: Vec<usize>,
    pub merges: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct RandAnswer {
    pub parts: Parts,
    /// Final group of each part.
    pub group: Vec<usize>,
    pub trace: BoruvkaTrace,
    n_comps: usize,
    groups: usize,
}

impl RandAnswer {
    /// A key shared exactly by DFS numbers reported connected.
    pub fn component_of(&self, x: u32) -> usize {
        match self.parts.part_of(x) {
            Some(pt) => self.group[pt],
            None => self.groups + self.parts.comp_of(x),
        }
    }

    pub fn connected(&self, s: u32, t: u32) -> bool {
        self.component_of(s) == self.component_of(t)
    }

    pub fn component_count(&self) -> usize {
        let touched = self.parts.root_part.len();
        self.n_comps - touched + self.groups
    }
}

fn finish(parts: Parts, dsu: &mut Dsu, sk0: &[Vec<u64>], trace: BoruvkaTrace, n_comps: usize) -> RandAnswer {
    // Non-isolated groups of each component go through elimination.
    let mut by_comp: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut leaves = Vec::new();
    let mut roots: Vec<usize> = (0..parts.len()).map(|i| dsu.find(i)).collect();
    roots.sort_unstable();
    roots.dedup();
    for r in roots {
        if is_zero(&sk0[r]) {
            leaves.push(vec![r]);
        } else {
            by_comp.entry(parts.comp[r]).or_default().push(r);
        }
    }
    let mut comps: Vec<_> = by_comp.into_iter().collect();
    comps.sort();
    for (_, set) in comps {
        zero_sum_split(sk0, set, &mut leaves);
    }
    let mut root_group = HashMap::new();
    for (g, leaf) in leaves.iter().enumerate() {
        for &r in leaf {
            root_group.insert(r, g);
        }
    }
    let group = (0..parts.len()).map(|i| root_group[&dsu.find(i)]).collect();
    RandAnswer { group, trace, n_comps, groups: leaves.len(), parts }
}

/// Long-scheme query: elimination over the forest pieces of each component.
pub fn query_long(p: &RandParams, comp_starts: &[u32], faults: &[&RandEdgeLabel]) -> Result<RandAnswer, RandError> {
    let parts = split_parts(p, comp_starts, faults)?;
    let mut dsu = Dsu::new(parts.len());
    let sk0 = parts.sk0.clone();
    Ok(finish(parts, &mut dsu, &sk0, BoruvkaTrace::default(), comp_starts.len()))
}

/// Short-scheme query: `rows` Borůvka steps, then elimination on what is left.
pub fn query_short(p: &RandParams, comp_starts: &[u32], faults: &[&RandEdgeLabel]) -> Result<RandAnswer, RandError> {
    let parts = split_parts(p, comp_starts, faults)?;
    let d = p.distinguishers();
    let cw = p.cell_words();
    let k = parts.len();
    let mut dsu = Dsu::new(k);
    let mut sk0 = parts.sk0.clone();
    let mut sk = parts.sk.clone();
    let mut trace = BoruvkaTrace::default();
    let count_nonisolated = |dsu: &mut Dsu, sk0: &[Vec<u64>]| (0..k).filter(|&i| dsu.find(i) == i && !is_zero(&sk0[i])).count();
    for row in 0..p.rows {
        trace.groups.push((0..k).map(|i| dsu.find(i)).collect());
        trace.nonisolated.push(count_nonisolated(&mut dsu, &sk0));
        let mut found = Vec::new();
        for gp in 0..k {
            if dsu.find(gp) != gp {
                continue;
            }
            for j in 0..p.ranks {
                let at = (row * p.ranks + j) * cw;
                let Some(x) = d.singleton(&sk[gp][at..at + cw]) else { continue };
                let (a, b) = p.unpack(x);
                if a > b || b as usize >= p.n {
                    continue;
                }
                let (Some(pa), Some(pb)) = (parts.part_of(a), parts.part_of(b)) else { continue };
                let (ra, rb) = (dsu.find(pa), dsu.find(pb));
                if ra != rb && (ra == gp || rb == gp) {
                    found.push((ra, rb));
                    break;
                }
            }
        }
        let mut merges = 0;
        for (a, b) in found {
            let (ra, rb) = (dsu.find(a), dsu.find(b));
            if ra != rb {
                dsu.union(ra, rb);
                let r = dsu.find(ra);
                let o = if r == ra { rb } else { ra };
                let (o0, osk) = (std::mem::take(&mut sk0[o]), std::mem::take(&mut sk[o]));
                xor_into(&mut sk0[r], &o0);
                xor_into(&mut sk[r], &osk);
                merges += 1;
            }
        }
        trace.merges.push(merges);
    }
    trace.groups.push((0..k).map(|i| dsu.find(i)).collect());
    trace.nonisolated.push(count_nonisolated(&mut dsu, &sk0));
    Ok(finish(parts, &mut dsu, &sk0, trace, comp_starts.len()))
}

/// Dispatches on `p.scheme`.
pub fn query_rand(p: &RandParams, comp_starts: &[u32], faults: &[&RandEdgeLabel]) -> Result<RandAnswer, RandError> {
    match p.scheme {
        RandScheme::Long => query_long(p, comp_starts, faults),
        RandScheme::Short => query_short(p, comp_starts, faults),
    }
}
