//! Seeded random graph families used by tests, the CLI and the acceptance suite.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::Graph;

/// Erdős–Rényi G(n, p).
pub fn gnp<R: Rng>(rng: &mut R, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges).unwrap()
}

/// Random spanning tree plus `extra` additional random edges
/// (parallel edges allowed only when `multi`). Always connected.
pub fn connected<R: Rng>(rng: &mut R, n: usize, extra: usize, multi: bool) -> Graph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    let mut present = std::collections::HashSet::new();
    for i in 1..n {
        let j = rng.random_range(0..i);
        let (u, v) = (order[i], order[j]);
        edges.push((u, v));
        present.insert((u.min(v), u.max(v)));
    }
    let max_simple = n * n.saturating_sub(1) / 2;
    let mut tries = 0;
    let mut added = 0;
    while added < extra && n >= 2 && tries < 50 * (extra + 1) {
        tries += 1;
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u == v {
            continue;
        }
        let key = (u.min(v), u.max(v));
        if !multi && (present.contains(&key) || present.len() >= max_simple) {
            continue;
        }
        present.insert(key);
        edges.push((u, v));
        added += 1;
    }
    Graph::new(n, edges).unwrap()
}

/// Connected graph with maximum degree 3: a random tree of max degree 3
/// plus random extra edges between vertices with spare degree.
pub fn connected_max3<R: Rng>(rng: &mut R, n: usize, extra: usize) -> Graph {
    let mut deg = vec![0usize; n];
    let mut edges = Vec::new();
    let mut present = std::collections::HashSet::new();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for i in 1..n {
        let v = order[i];
        let cands: Vec<usize> = order[..i].iter().copied().filter(|&u| deg[u] < 3).collect();
        let u = cands[rng.random_range(0..cands.len())];
        deg[u] += 1;
        deg[v] += 1;
        edges.push((u, v));
        present.insert((u.min(v), u.max(v)));
    }
    for _ in 0..extra * 20 {
        if edges.len() >= n.saturating_sub(1) + extra {
            break;
        }
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        let key = (u.min(v), u.max(v));
        if u == v || deg[u] >= 3 || deg[v] >= 3 || present.contains(&key) {
            continue;
        }
        deg[u] += 1;
        deg[v] += 1;
        edges.push((u, v));
        present.insert(key);
    }
    Graph::new(n, edges).unwrap()
}

/// Uniform-ish random simple connected d-regular graph (pairing model with
/// restarts). `n·d` must be even.
pub fn random_regular<R: Rng>(rng: &mut R, n: usize, d: usize) -> Graph {
    assert!(n * d % 2 == 0 && d < n);
    loop {
        if let Some(g) = try_pairing(rng, n, d) {
            if g.is_connected() {
                return g;
            }
        }
    }
}

fn try_pairing<R: Rng>(rng: &mut R, n: usize, d: usize) -> Option<Graph> {
    // Steger–Wormald style: repeatedly pair random free points, rejecting
    // loops and multi-edges; restart when stuck.
    let mut free: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    let mut present = std::collections::HashSet::new();
    let mut edges = Vec::with_capacity(n * d / 2);
    while !free.is_empty() {
        let mut ok = false;
        for _ in 0..100 {
            let i = rng.random_range(0..free.len());
            let j = rng.random_range(0..free.len());
            let (u, v) = (free[i], free[j]);
            if i == j || u == v || present.contains(&(u.min(v), u.max(v))) {
                continue;
            }
            present.insert((u.min(v), u.max(v)));
            edges.push((u, v));
            let (a, b) = (i.max(j), i.min(j));
            free.swap_remove(a);
            free.swap_remove(b);
            ok = true;
            break;
        }
        if !ok {
            return None;
        }
    }
    Some(Graph::new(n, edges).unwrap())
}
