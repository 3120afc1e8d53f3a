//! Low-degree Steiner trees, set toughness and sparse vertex-connectivity certificates.

use crate::dsu::Dsu;
use crate::graph::Graph;
use crate::hierarchy::{n_exact, verify_vertex_expanding, HierarchyError, Phi, VertexExpansion};
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SteinerError {
    #[error("exhaustive search is capped at {cap} vertices but the graph has {n}")]
    SizeCap { n: usize, cap: usize },
    #[error("terminals are not connected in the graph")]
    Disconnected,
    #[error("terminal set is empty")]
    NoTerminals,
}

fn cap_check(n: usize) -> Result<(), SteinerError> {
    let cap = n_exact().min(30);
    if n > cap {
        Err(SteinerError::SizeCap { n, cap })
    } else {
        Ok(())
    }
}

fn adj_masks(g: &Graph) -> Vec<u64> {
    let mut adj = vec![0u64; g.n()];
    for &(a, b) in g.edges() {
        if a != b {
            adj[a] |= 1 << b;
            adj[b] |= 1 << a;
        }
    }
    adj
}

/// Number of components of `G[alive]` that meet `x`.
fn count_x_components(adj: &[u64], alive: u64, x: u64) -> usize {
    let mut left = alive & x;
    let mut count = 0;
    while left != 0 {
        let start = left & left.wrapping_neg();
        let mut seen = start;
        let mut frontier = start;
        while frontier != 0 {
            let v = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let new = adj[v] & alive & !seen;
            seen |= new;
            frontier |= new;
        }
        left &= !seen;
        count += 1;
    }
    count
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Toughness {
    /// No vertex set splits the terminals.
    Infinite,
    /// Minimum of `|S| / c_{G−S}(X)`, attained by `witness`.
    Ratio { s: usize, c: usize, witness: Vec<usize> },
}

impl Toughness {
    pub fn as_f64(&self) -> f64 {
        match self {
            Toughness::Infinite => f64::INFINITY,
            Toughness::Ratio { s, c, .. } => *s as f64 / *c as f64,
        }
    }

    /// Whether `Δ ≤ 2/φ + 3` for this φ.
    pub fn allows_degree(&self, delta: usize) -> bool {
        match self {
            Toughness::Infinite => delta <= 3,
            Toughness::Ratio { s, c, .. } => (delta as i64 - 3) * (*s as i64) <= 2 * *c as i64,
        }
    }

    pub fn at_least(&self, phi: Phi) -> bool {
        match self {
            Toughness::Infinite => true,
            Toughness::Ratio { s, c, .. } => (*s as u64) * phi.den >= phi.num * (*c as u64),
        }
    }
}

/// Exact toughness of `x` in `g` by enumerating every vertex set.
pub fn toughness(g: &Graph, x: &[bool]) -> Result<Toughness, SteinerError> {
    let n = g.n();
    cap_check(n)?;
    let adj = adj_masks(g);
    let xm = x.iter().enumerate().fold(0u64, |a, (v, &b)| if b { a | 1 << v } else { a });
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut best: Option<(usize, usize, u64)> = None;
    for s in 0..=full {
        let c = count_x_components(&adj, full & !s, xm);
        if c <= 1 {
            continue;
        }
        let sz = s.count_ones() as usize;
        if best.is_none_or(|(bs, bc, _)| sz * bc < bs * c) {
            best = Some((sz, c, s));
        }
    }
    Ok(match best {
        None => Toughness::Infinite,
        Some((s, c, m)) => Toughness::Ratio { s, c, witness: (0..n).filter(|&v| m >> v & 1 == 1).collect() },
    })
}

/// On this instance: `x` being 3φ-vertex-expanding implies it is φ-tough.
pub fn expanding_implies_tough_check(g: &Graph, x: &[bool], phi: Phi) -> Result<bool, SteinerError> {
    let three = Phi::new(3 * phi.num, phi.den);
    let premise = match verify_vertex_expanding(g, x, three) {
        Ok(VertexExpansion::Expanding) => true,
        Ok(_) => false,
        Err(HierarchyError::SizeCap { n, cap }) => return Err(SteinerError::SizeCap { n, cap }),
        Err(HierarchyError::Disconnected) => return Err(SteinerError::Disconnected),
    };
    Ok(!premise || toughness(g, x)?.at_least(phi))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SteinerTree {
    /// Edge ids of `g`.
    pub edges: Vec<usize>,
    pub max_degree: usize,
    /// Blocking set: degree ≥ Δ−1 each, and removing it leaves terminals
    /// connected in the tree exactly when they are connected in the graph.
    pub blocking: Vec<usize>,
}

impl SteinerTree {
    pub fn degrees(&self, g: &Graph) -> Vec<usize> {
        let mut d = vec![0; g.n()];
        for &e in &self.edges {
            let (a, b) = g.edge(e);
            d[a] += 1;
            d[b] += 1;
        }
        d
    }

    pub fn vertices(&self, g: &Graph) -> Vec<bool> {
        let mut on = vec![false; g.n()];
        for &e in &self.edges {
            let (a, b) = g.edge(e);
            on[a] = true;
            on[b] = true;
        }
        on
    }
}

struct Work<'a> {
    g: &'a Graph,
    x: &'a [bool],
    in_tree: Vec<bool>,
    on: Vec<bool>,
    deg: Vec<usize>,
}

/// Stored swap for a vertex released from the blocking set.
#[derive(Clone)]
struct Swap {
    path: Vec<usize>,
    ends: (usize, usize),
}

impl<'a> Work<'a> {
    fn add(&mut self, e: usize) {
        let (a, b) = self.g.edge(e);
        self.in_tree[e] = true;
        self.deg[a] += 1;
        self.deg[b] += 1;
        self.on[a] = true;
        self.on[b] = true;
    }

    fn remove(&mut self, e: usize) {
        let (a, b) = self.g.edge(e);
        self.in_tree[e] = false;
        self.deg[a] -= 1;
        self.deg[b] -= 1;
    }

    fn max_degree(&self) -> usize {
        self.deg.iter().copied().max().unwrap_or(0)
    }

    /// Tree path from `a` to `b` as (vertices, edges).
    fn tree_path(&self, a: usize, b: usize) -> Option<(Vec<usize>, Vec<usize>)> {
        let n = self.g.n();
        let mut prev = vec![None; n];
        let mut seen = vec![false; n];
        seen[a] = true;
        let mut q = VecDeque::from([a]);
        while let Some(v) = q.pop_front() {
            if v == b {
                break;
            }
            for &(w, e) in self.g.neighbors(v) {
                if self.in_tree[e] && !seen[w] {
                    seen[w] = true;
                    prev[w] = Some((v, e));
                    q.push_back(w);
                }
            }
        }
        if !seen[b] {
            return None;
        }
        let (mut vs, mut es) = (vec![b], Vec::new());
        let mut cur = b;
        while let Some((p, e)) = prev[cur] {
            vs.push(p);
            es.push(e);
            cur = p;
        }
        vs.reverse();
        es.reverse();
        Some((vs, es))
    }

    fn prune(&mut self) {
        loop {
            let mut changed = false;
            for v in 0..self.g.n() {
                if self.on[v] && !self.x[v] && self.deg[v] <= 1 {
                    for &(_, e) in self.g.neighbors(v) {
                        if self.in_tree[e] {
                            self.remove(e);
                        }
                    }
                    self.on[v] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }

    /// Adds `swap.path` and drops the cycle edge at `v`, then relieves the path ends if needed.
    fn relieve(&mut self, v: usize, swaps: &[Option<Swap>], k: usize, depth: usize) -> bool {
        let Some(sw) = &swaps[v] else { return false };
        if depth > self.g.n() {
            return false;
        }
        let Some((vs, es)) = self.tree_path(sw.ends.0, sw.ends.1) else { return false };
        let Some(i) = vs.iter().position(|&u| u == v) else { return false };
        let drop = if i > 0 { es[i - 1] } else { es[i] };
        for &e in &sw.path {
            self.add(e);
        }
        self.remove(drop);
        let (a, b) = sw.ends;
        for u in [a, b] {
            if self.deg[u] >= k && !self.relieve(u, swaps, k, depth + 1) {
                return false;
            }
        }
        true
    }

    /// One round at the current maximum degree. Returns the blocking set when no swap helps.
    fn round(&mut self) -> Result<(), Vec<usize>> {
        let g = self.g;
        let n = g.n();
        let k = self.max_degree();
        if k <= 2 {
            return Err(Vec::new());
        }
        let mut bad: Vec<bool> = (0..n).map(|v| self.on[v] && self.deg[v] + 1 >= k).collect();
        let mut swaps: Vec<Option<Swap>> = vec![None; n];
        let mut used = vec![false; n];
        loop {
            let mut dsu = Dsu::new(n);
            for (e, &(a, b)) in g.edges().iter().enumerate() {
                if self.in_tree[e] && !bad[a] && !bad[b] {
                    dsu.union(a, b);
                }
            }
            let Some((path, a, b)) = self.connecting_path(&bad, &used, &mut dsu) else {
                return Err((0..n).filter(|&v| bad[v]).collect());
            };
            let (vs, es) = self.tree_path(a, b).expect("tree is connected");
            let blockers: Vec<usize> = vs.iter().copied().filter(|&v| bad[v]).collect();
            if let Some(&w) = blockers.iter().find(|&&w| self.deg[w] == k) {
                let saved = (self.in_tree.clone(), self.on.clone(), self.deg.clone());
                let i = vs.iter().position(|&u| u == w).unwrap();
                let drop = if i > 0 { es[i - 1] } else { es[i] };
                for &e in &path {
                    self.add(e);
                }
                self.remove(drop);
                let ok = [a, b].iter().all(|&u| self.deg[u] < k || self.relieve(u, &swaps, k, 0));
                if ok && self.is_tree() {
                    self.prune();
                    return Ok(());
                }
                (self.in_tree, self.on, self.deg) = saved;
            }
            for &w in &blockers {
                bad[w] = false;
                swaps[w] = Some(Swap { path: path.clone(), ends: (a, b) });
            }
            for &e in &path {
                let (p, q) = g.edge(e);
                for u in [p, q] {
                    if !self.on[u] {
                        used[u] = true;
                    }
                }
            }
        }
    }

    fn is_tree(&self) -> bool {
        let mut dsu = Dsu::new(self.g.n());
        let mut edges = 0;
        for (e, &(a, b)) in self.g.edges().iter().enumerate() {
            if self.in_tree[e] {
                if !dsu.union(a, b) {
                    return false;
                }
                edges += 1;
            }
        }
        edges + 1 == self.on.iter().filter(|&&b| b).count().max(1)
    }

    /// An edge between good tree vertices in different pieces, or a path
    /// through unused off-tree vertices doing the same.
    fn connecting_path(&self, bad: &[bool], used: &[bool], dsu: &mut Dsu) -> Option<(Vec<usize>, usize, usize)> {
        let g = self.g;
        let good = |v: usize| self.on[v] && !bad[v];
        for (e, &(a, b)) in g.edges().iter().enumerate() {
            if !self.in_tree[e] && good(a) && good(b) && dsu.find(a) != dsu.find(b) {
                return Some((vec![e], a, b));
            }
        }
        // Off-tree regions: grow from each good tree vertex through free vertices.
        let n = g.n();
        for a in (0..n).filter(|&v| good(v)) {
            let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
            let mut seen = vec![false; n];
            let mut q = VecDeque::new();
            for &(w, e) in g.neighbors(a) {
                if !self.on[w] && !used[w] && !seen[w] {
                    seen[w] = true;
                    prev[w] = Some((a, e));
                    q.push_back(w);
                }
            }
            while let Some(v) = q.pop_front() {
                for &(w, e) in g.neighbors(v) {
                    if good(w) && dsu.find(w) != dsu.find(a) {
                        let mut path = vec![e];
                        let mut cur = v;
                        while let Some((p, pe)) = prev[cur] {
                            path.push(pe);
                            cur = p;
                            if cur == a {
                                break;
                            }
                        }
                        return Some((path, a, w));
                    }
                    if !self.on[w] && !used[w] && !seen[w] {
                        seen[w] = true;
                        prev[w] = Some((v, e));
                        q.push_back(w);
                    }
                }
            }
        }
        None
    }
}

/// Steiner tree over the terminals `x` whose maximum degree is within one of optimal,
/// together with its blocking set.
pub fn low_degree_steiner(g: &Graph, x: &[bool]) -> Result<SteinerTree, SteinerError> {
    let n = g.n();
    let Some(root) = (0..n).find(|&v| x[v]) else { return Err(SteinerError::NoTerminals) };
    let mut in_tree = vec![false; g.m()];
    let mut seen = vec![false; n];
    seen[root] = true;
    let mut q = VecDeque::from([root]);
    while let Some(v) = q.pop_front() {
        for &(w, e) in g.neighbors(v) {
            if !seen[w] {
                seen[w] = true;
                in_tree[e] = true;
                q.push_back(w);
            }
        }
    }
    if (0..n).any(|v| x[v] && !seen[v]) {
        return Err(SteinerError::Disconnected);
    }
    let mut work = Work { g, x, in_tree, on: seen, deg: vec![0; n] };
    for (e, &(a, b)) in g.edges().iter().enumerate() {
        if work.in_tree[e] {
            work.deg[a] += 1;
            work.deg[b] += 1;
        }
    }
    work.prune();
    let blocking = loop {
        match work.round() {
            Ok(()) => continue,
            Err(b) => break b,
        }
    };
    Ok(SteinerTree {
        edges: (0..g.m()).filter(|&e| work.in_tree[e]).collect(),
        max_degree: work.max_degree(),
        blocking,
    })
}

/// Smallest maximum degree over all Steiner trees for `x`, by exhaustive search.
pub fn min_degree_steiner_exhaustive(g: &Graph, x: &[bool]) -> Result<usize, SteinerError> {
    let n = g.n();
    cap_check(n)?;
    let xm = x.iter().enumerate().fold(0u64, |a, (v, &b)| if b { a | 1 << v } else { a });
    if xm == 0 {
        return Err(SteinerError::NoTerminals);
    }
    if xm.count_ones() == 1 {
        return Ok(0);
    }
    let adj = adj_masks(g);
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    if count_x_components(&adj, full, xm) > 1 {
        return Err(SteinerError::Disconnected);
    }
    let others: Vec<usize> = (0..n).filter(|&v| xm >> v & 1 == 0).collect();
    for d in 1..n {
        for pick in 0u64..(1u64 << others.len()) {
            let ym = others.iter().enumerate().fold(xm, |a, (i, &v)| if pick >> i & 1 == 1 { a | 1 << v } else { a });
            if count_x_components(&adj, ym, ym) == 1 && spanning_tree_with_cap(&adj, ym, d) {
                return Ok(d);
            }
        }
    }
    unreachable!("a connected vertex set always has a spanning tree")
}

/// Whether `G[ym]` has a spanning tree with maximum degree ≤ d, grown one vertex at a time.
fn spanning_tree_with_cap(adj: &[u64], ym: u64, d: usize) -> bool {
    let root = ym.trailing_zeros() as usize;
    let mut deg = vec![0usize; adj.len()];
    grow(adj, ym, 1 << root, &mut deg, d)
}

fn grow(adj: &[u64], ym: u64, inside: u64, deg: &mut [usize], d: usize) -> bool {
    if inside == ym {
        return true;
    }
    // Branch on the parent of the lowest outside vertex adjacent to the tree.
    let mut frontier = 0u64;
    let mut t = inside;
    while t != 0 {
        let v = t.trailing_zeros() as usize;
        t &= t - 1;
        if deg[v] < d {
            frontier |= adj[v] & ym & !inside;
        }
    }
    if frontier == 0 {
        return false;
    }
    let w = frontier.trailing_zeros() as usize;
    let mut parents = adj[w] & inside;
    while parents != 0 {
        let p = parents.trailing_zeros() as usize;
        parents &= parents - 1;
        if deg[p] < d && deg[w] < d {
            deg[p] += 1;
            deg[w] += 1;
            if grow(adj, ym, inside | 1 << w, deg, d) {
                return true;
            }
            deg[p] -= 1;
            deg[w] -= 1;
        }
    }
    false
}

/// `d` edge-disjoint forests, each a scan-first (breadth-first) spanning forest of what the previous ones left.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sparsifier {
    pub forests: Vec<Vec<usize>>,
}

impl Sparsifier {
    pub fn edges(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.forests.iter().flatten().copied().collect();
        all.sort_unstable();
        all
    }

    pub fn subgraph(&self, r: &Graph) -> Graph {
        Graph::new(r.n(), self.edges().iter().map(|&e| r.edge(e)).collect()).expect("edges come from r")
    }
}

pub fn ni_sparsify(r: &Graph, d: usize) -> Sparsifier {
    let n = r.n();
    let mut taken = vec![false; r.m()];
    let mut forests = Vec::with_capacity(d);
    for _ in 0..d {
        let mut marked = vec![false; n];
        let mut forest = Vec::new();
        for root in 0..n {
            if marked[root] {
                continue;
            }
            marked[root] = true;
            let mut q = VecDeque::from([root]);
            while let Some(v) = q.pop_front() {
                for &(w, e) in r.neighbors(v) {
                    if !taken[e] && !marked[w] {
                        marked[w] = true;
                        taken[e] = true;
                        forest.push(e);
                        q.push_back(w);
                    }
                }
            }
        }
        forests.push(forest);
    }
    Sparsifier { forests }
}

/// Every forest is acyclic, so the union has arboricity at most `forests.len()`.
pub fn forests_are_acyclic(r: &Graph, s: &Sparsifier) -> bool {
    s.forests.iter().all(|f| {
        let mut dsu = Dsu::new(r.n());
        f.iter().all(|&e| {
            let (a, b) = r.edge(e);
            dsu.union(a, b)
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star(k: usize) -> Graph {
        Graph::new(k + 1, (1..=k).map(|v| (0, v)).collect()).unwrap()
    }

    #[test]
    fn toughness_examples() {
        let all = |n| vec![true; n];
        match toughness(&star(4), &all(5)).unwrap() {
            Toughness::Ratio { s, c, witness } => {
                assert_eq!((s, c), (1, 4));
                assert_eq!(witness, vec![0]);
            }
            t => panic!("{t:?}"),
        }
        let k5 = Graph::new(5, (0..5).flat_map(|a| (a + 1..5).map(move |b| (a, b))).collect()).unwrap();
        assert_eq!(toughness(&k5, &all(5)).unwrap(), Toughness::Infinite);
        let c6 = Graph::new(6, (0..6).map(|v| (v, (v + 1) % 6)).collect()).unwrap();
        assert_eq!(toughness(&c6, &all(6)).unwrap().as_f64(), 1.0);
    }

    #[test]
    fn small_trees() {
        let c6 = Graph::new(6, (0..6).map(|v| (v, (v + 1) % 6)).collect()).unwrap();
        let t = low_degree_steiner(&c6, &[true; 6]).unwrap();
        assert_eq!((t.edges.len(), t.max_degree), (5, 2));
        let s = low_degree_steiner(&star(4), &[true; 5]).unwrap();
        assert_eq!(s.max_degree, 4);
        let p = Graph::new(4, vec![(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let t = low_degree_steiner(&p, &[true, true, false, false]).unwrap();
        assert_eq!((t.edges.clone(), t.max_degree), (vec![0], 1));
    }

    #[test]
    fn sparsifier_keeps_trees() {
        let t = Graph::new(5, vec![(0, 1), (1, 2), (1, 3), (3, 4)]).unwrap();
        assert_eq!(ni_sparsify(&t, 3).edges(), vec![0, 1, 2, 3]);
    }
}
