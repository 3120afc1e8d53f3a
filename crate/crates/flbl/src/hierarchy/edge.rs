use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::spectral::fiedler_order;
use super::{components_where, lex_less, mask_to_vec, n_exact, Expansion, HierarchyError, Mode, Phi};
use crate::Graph;

/// Level of every edge, numbered 1..=h from the bottom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeLevelAssignment {
    pub level: Vec<u32>,
    pub h: u32,
    pub phi: Phi,
    /// True when every separator was checked exhaustively.
    pub certified: bool,
}

/// Result of checking every level component of a hierarchy.
#[derive(Clone, Debug, Default)]
pub struct LevelReport {
    pub checked: usize,
    pub skipped: usize,
    /// (level, component vertices, violating set in component-local ids)
    pub violations: Vec<(u32, Vec<usize>, Vec<usize>)>,
}

impl EdgeLevelAssignment {
    /// Text export: header `h phi certified|uncertified`, then `id level` lines.
    pub fn export(&self) -> String {
        let mut s = format!(
            "{} {} {}\n",
            self.h,
            self.phi,
            if self.certified { "certified" } else { "uncertified" }
        );
        for (e, l) in self.level.iter().enumerate() {
            s.push_str(&format!("{e} {l}\n"));
        }
        s
    }

    /// Checks, for every level ℓ and every component Γ of G≤ℓ with at most
    /// `max_n` vertices, that the level-ℓ edges of Γ are φ-expanding in Γ.
    pub fn verify_levels(&self, g: &Graph, phi: Phi, max_n: usize) -> LevelReport {
        let mut report = LevelReport::default();
        for l in 1..=self.h {
            for comp in components_where(g, |e| self.level[e] <= l) {
                if comp.len() <= 1 {
                    continue;
                }
                if comp.len() > max_n {
                    report.skipped += 1;
                    continue;
                }
                let sub = g.induced(&comp, |e| self.level[e] <= l);
                let x: Vec<bool> = sub.emap.iter().map(|&e| self.level[e] == l).collect();
                match verify_edge_expanding(&sub.graph, &x, phi) {
                    Ok(Expansion::Expanding) => report.checked += 1,
                    Ok(Expansion::Violated(s)) => {
                        report.checked += 1;
                        report.violations.push((l, comp.clone(), s));
                    }
                    Err(_) => report.skipped += 1,
                }
            }
        }
        report
    }
}

fn cap() -> usize {
    n_exact().min(62)
}

/// Exhaustive check of |E(S, V∖S)| ≥ φ·min(Deg_X(S), Deg_X(V∖S)) over all cuts.
pub fn verify_edge_expanding(g: &Graph, x: &[bool], phi: Phi) -> Result<Expansion, HierarchyError> {
    let n = g.n();
    if n > cap() {
        return Err(HierarchyError::SizeCap { n, cap: cap() });
    }
    if n <= 1 {
        return Ok(Expansion::Expanding);
    }
    let degx = x_degrees(g, x);
    // S ranges over nonempty subsets of 0..n-1; the complement holds n-1
    Ok(match best_violating_cut(g, &degx, phi, n - 1, n) {
        None => Expansion::Expanding,
        Some(mask) => Expansion::Violated(mask_to_vec(mask)),
    })
}

fn x_degrees(g: &Graph, x: &[bool]) -> Vec<u64> {
    let mut d = vec![0u64; g.n()];
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        if x[e] {
            d[u] += 1;
            d[v] += 1;
        }
    }
    d
}

/// Gray-code sweep over subsets of vertices `0..k`, returning the violating
/// cut with |S| ≤ size_cap minimizing (crossing edges, lexicographic S).
fn best_violating_cut(g: &Graph, degx: &[u64], phi: Phi, k: usize, size_cap: usize) -> Option<u64> {
    let n = g.n();
    let total: u64 = degx.iter().sum();
    let mut inside = vec![false; n];
    let (mut cross, mut vol, mut size) = (0u64, 0u64, 0usize);
    let mut best: Option<(u64, u64)> = None;
    let mut mask = 0u64;
    for i in 1u64..(1u64 << k) {
        let v = i.trailing_zeros() as usize;
        let adding = !inside[v];
        for &(u, _) in g.neighbors(v) {
            // an edge to a member stops (or starts) crossing
            if inside[u] == adding {
                cross -= 1;
            } else {
                cross += 1;
            }
        }
        inside[v] = adding;
        mask ^= 1 << v;
        if adding {
            vol += degx[v];
            size += 1;
        } else {
            vol -= degx[v];
            size -= 1;
        }
        if size == 0 || size > size_cap || size == n {
            continue;
        }
        let min = vol.min(total - vol);
        if phi.den * cross < phi.num * min {
            let better = match best {
                None => true,
                Some((bc, bm)) => cross < bc || (cross == bc && lex_less(mask, bm)),
            };
            if better {
                best = Some((cross, mask));
            }
        }
    }
    best.map(|(_, m)| m)
}

/// Separator output: the set X as an edge mask.
#[derive(Clone, Debug)]
pub struct EdgeSeparator {
    pub x: Vec<bool>,
    pub certified: bool,
}

/// Computes X with every component of G∖X of at most n/2 vertices by
/// repeatedly repairing violating cuts: X ← X ∪ E(S, V∖S) ∖ (X ∩ E(S, S)).
pub fn edge_separator(g: &Graph, mode: Mode) -> Result<EdgeSeparator, HierarchyError> {
    if !g.is_connected() {
        return Err(HierarchyError::Disconnected);
    }
    let n = g.n();
    let phi = Phi::HALF;
    let mut x = vec![true; g.m()];
    if n <= cap() {
        loop {
            let degx = x_degrees(g, &x);
            match best_violating_cut(g, &degx, phi, n, n / 2) {
                Some(mask) => {
                    let inside: Vec<bool> = (0..n).map(|v| mask >> v & 1 == 1).collect();
                    apply_cut(g, &mut x, &inside, &mask_to_vec(mask));
                }
                None => return Ok(EdgeSeparator { x, certified: true }),
            }
        }
    }
    if mode == Mode::Exact {
        return Err(HierarchyError::SizeCap { n, cap: cap() });
    }
    heuristic_separator(g, &mut x, phi);
    Ok(EdgeSeparator { x, certified: false })
}

/// Returns the change in |X|.
fn apply_cut(g: &Graph, x: &mut [bool], inside: &[bool], members: &[usize]) -> i64 {
    let mut delta = 0;
    for &v in members {
        for &(u, e) in g.neighbors(v) {
            // edges inside S leave X, crossing edges join it
            let want = !inside[u];
            delta += want as i64 - x[e] as i64;
            x[e] = want;
        }
    }
    delta
}

/// Cut statistics for a candidate set under the current X.
struct CutEval {
    cross: u64,
    vol: u64,
    size: usize,
}

fn evaluate(g: &Graph, x: &[bool], inside: &[bool], members: &[usize]) -> CutEval {
    let (mut cross, mut vol) = (0, 0);
    for &v in members {
        for &(u, e) in g.neighbors(v) {
            if !inside[u] {
                cross += 1;
            }
            if x[e] {
                vol += 1;
            }
        }
    }
    CutEval { cross, vol, size: members.len() }
}

/// den·cross − num·min(vol, total − vol); negative means violated.
fn score(phi: Phi, cross: u64, vol: u64, total: u64) -> i128 {
    phi.den as i128 * cross as i128 - phi.num as i128 * vol.min(total - vol) as i128
}

fn heuristic_separator(g: &Graph, x: &mut [bool], phi: Phi) {
    let n = g.n();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ (n as u64) << 20 ^ g.m() as u64);
    let mut inside = vec![false; n];
    let mut round = 0u64;
    loop {
        round += 1;
        let mut cands = ball_candidates(g, x, phi, &mut inside, 24.min(n / 2));
        if cands.is_empty() {
            cands = global_candidates(g, x, phi, &mut inside, &mut rng, round);
        }
        if cands.is_empty() {
            return;
        }
        cands.sort_by_key(|c| c.0);
        let mut applied = false;
        let mut xcount = x.iter().filter(|&&b| b).count() as i64;
        for (_, members) in cands {
            for &v in &members {
                inside[v] = true;
            }
            let ev = evaluate(g, x, &inside, &members);
            if ev.size >= 1 && ev.size <= n / 2 && score(phi, ev.cross, ev.vol, 2 * xcount as u64) < 0 {
                xcount += apply_cut(g, x, &inside, &members);
                applied = true;
            }
            for &v in &members {
                inside[v] = false;
            }
        }
        if !applied {
            return;
        }
    }
}

/// Best violating BFS-ball prefix from every start vertex.
fn ball_candidates(
    g: &Graph,
    x: &[bool],
    phi: Phi,
    inside: &mut [bool],
    limit: usize,
) -> Vec<(i128, Vec<usize>)> {
    let n = g.n();
    let total: u64 = 2 * x.iter().filter(|&&b| b).count() as u64;
    let mut out = Vec::new();
    let mut seen = vec![false; n];
    for s in 0..n {
        let mut order = vec![s];
        seen[s] = true;
        let mut head = 0;
        while head < order.len() && order.len() < limit {
            let v = order[head];
            head += 1;
            for &(u, _) in g.neighbors(v) {
                if !seen[u] && order.len() < limit {
                    seen[u] = true;
                    order.push(u);
                }
            }
        }
        for &v in &order {
            seen[v] = false;
        }
        if let Some((sc, len)) = best_prefix(g, x, phi, inside, &order, total) {
            out.push((sc, order[..len].to_vec()));
        }
    }
    out
}

/// Scans prefixes of `order`, returning the most violated one (score, length).
fn best_prefix(
    g: &Graph,
    x: &[bool],
    phi: Phi,
    inside: &mut [bool],
    order: &[usize],
    total: u64,
) -> Option<(i128, usize)> {
    let n = g.n();
    let (mut cross, mut vol) = (0u64, 0u64);
    let mut best: Option<(i128, usize)> = None;
    for (i, &v) in order.iter().enumerate() {
        if i + 1 > n / 2 {
            break;
        }
        for &(u, e) in g.neighbors(v) {
            if inside[u] {
                cross -= 1;
            } else {
                cross += 1;
            }
            if x[e] {
                vol += 1;
            }
        }
        inside[v] = true;
        let sc = score(phi, cross, vol, total);
        if sc < 0 && best.is_none_or(|(b, _)| sc < b) {
            best = Some((sc, i + 1));
        }
    }
    for &v in order {
        inside[v] = false;
    }
    best
}

/// Spectral sweep cuts, large BFS balls and a local search refinement.
fn global_candidates(
    g: &Graph,
    x: &[bool],
    phi: Phi,
    inside: &mut [bool],
    rng: &mut ChaCha8Rng,
    round: u64,
) -> Vec<(i128, Vec<usize>)> {
    let n = g.n();
    let total: u64 = 2 * x.iter().filter(|&&b| b).count() as u64;
    let mut orders = Vec::new();
    let f = fiedler_order(g, round, 300);
    let mut r = f.clone();
    r.reverse();
    orders.push(f);
    orders.push(r);
    for _ in 0..8 {
        let s = rand::Rng::random_range(rng, 0..n);
        orders.push(bfs_order(g, s));
    }
    let mut out = Vec::new();
    let mut seeds = Vec::new();
    for order in &orders {
        if let Some((sc, len)) = best_prefix(g, x, phi, inside, order, total) {
            out.push((sc, order[..len].to_vec()));
        }
        seeds.push(order[..n / 2].to_vec());
    }
    if !out.is_empty() {
        return out;
    }
    for seed in seeds.into_iter().take(2) {
        if let Some(c) = local_search(g, x, phi, inside, seed, total, rng) {
            out.push(c);
        }
    }
    out
}

fn bfs_order(g: &Graph, s: usize) -> Vec<usize> {
    let mut seen = vec![false; g.n()];
    let mut order = vec![s];
    seen[s] = true;
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        for &(u, _) in g.neighbors(v) {
            if !seen[u] {
                seen[u] = true;
                order.push(u);
            }
        }
    }
    order
}

/// Single-vertex moves that lower the score, in random order.
fn local_search(
    g: &Graph,
    x: &[bool],
    phi: Phi,
    inside: &mut [bool],
    start: Vec<usize>,
    total: u64,
    rng: &mut ChaCha8Rng,
) -> Option<(i128, Vec<usize>)> {
    let n = g.n();
    for &v in &start {
        inside[v] = true;
    }
    let ev = evaluate(g, x, inside, &start);
    let (mut cross, mut vol, mut size) = (ev.cross as i64, ev.vol as i64, ev.size);
    let mut verts: Vec<usize> = (0..n).collect();
    for _ in 0..10 {
        let mut improved = false;
        verts.shuffle(rng);
        for &v in &verts {
            let now = score(phi, cross as u64, vol as u64, total);
            let (mut dc, mut dv) = (0i64, 0i64);
            for &(u, e) in g.neighbors(v) {
                dc += if inside[u] != inside[v] { -1 } else { 1 };
                if x[e] {
                    dv += 1;
                }
            }
            let (nsize, nvol) = if inside[v] { (size - 1, vol - dv) } else { (size + 1, vol + dv) };
            if nsize == 0 || nsize > n / 2 {
                continue;
            }
            if score(phi, (cross + dc) as u64, nvol as u64, total) < now {
                inside[v] = !inside[v];
                cross += dc;
                vol = nvol;
                size = nsize;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    let members: Vec<usize> = (0..n).filter(|&v| inside[v]).collect();
    for &v in &members {
        inside[v] = false;
    }
    let sc = score(phi, cross as u64, vol as u64, total);
    (sc < 0).then_some((sc, members))
}

/// Top-down recursive construction: the separator of each piece becomes its
/// top level and the components left after removing it are recursed on.
pub fn build_edge_hierarchy(g: &Graph, mode: Mode) -> Result<EdgeLevelAssignment, HierarchyError> {
    let m = g.m();
    let mut depth = vec![u32::MAX; m];
    let mut certified = true;
    let mut stack: Vec<(Vec<usize>, u32)> =
        components_where(g, |_| true).into_iter().map(|c| (c, 0)).collect();
    while let Some((verts, d)) = stack.pop() {
        if verts.len() <= 1 {
            continue;
        }
        let sub = g.induced(&verts, |e| depth[e] == u32::MAX);
        if sub.graph.m() == 0 {
            continue;
        }
        let sep = edge_separator(&sub.graph, mode)?;
        certified &= sep.certified;
        for (le, &inx) in sep.x.iter().enumerate() {
            if inx {
                depth[sub.emap[le]] = d;
            }
        }
        for comp in components_where(&sub.graph, |le| !sep.x[le]) {
            let gl: Vec<usize> = comp.iter().map(|&v| sub.vmap[v]).collect();
            stack.push((gl, d + 1));
        }
    }
    let h = depth.iter().map(|&d| d + 1).max().unwrap_or(0);
    Ok(EdgeLevelAssignment {
        level: depth.iter().map(|&d| h - d).collect(),
        h,
        phi: Phi::HALF,
        certified,
    })
}
