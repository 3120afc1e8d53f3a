use super::spectral::fiedler_order;
use super::{lex_less, mask_to_vec, n_exact, HierarchyError, Mode, Phi};
use crate::Graph;

/// A vertex cut: no edge joins `l` and `r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexCut {
    pub l: Vec<usize>,
    pub s: Vec<usize>,
    pub r: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VertexExpansion {
    Expanding,
    Violated(VertexCut),
}

impl VertexExpansion {
    pub fn holds(&self) -> bool {
        matches!(self, VertexExpansion::Expanding)
    }
}

/// A component of G≤ℓ and its core, the level-ℓ vertices inside it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelComponent {
    pub vertices: Vec<usize>,
    pub core: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexLevelAssignment {
    pub level: Vec<u32>,
    pub h: u32,
    pub phi: Phi,
    pub certified: bool,
    /// `components[ℓ-1]`: the components of G≤ℓ.
    pub components: Vec<Vec<LevelComponent>>,
}

impl VertexLevelAssignment {
    pub fn export(&self) -> String {
        let mut s = format!(
            "{} {} {}\n",
            self.h,
            self.phi,
            if self.certified { "certified" } else { "uncertified" }
        );
        for (v, l) in self.level.iter().enumerate() {
            s.push_str(&format!("{v} {l}\n"));
        }
        s
    }

    /// Number of level components failing φ-vertex-expansion of their core,
    /// over components of at most `max_n` vertices.
    pub fn count_violations(&self, g: &Graph, phi: Phi, max_n: usize) -> usize {
        let mut bad = 0;
        for comps in &self.components {
            for c in comps {
                if c.vertices.len() > max_n {
                    continue;
                }
                let sub = g.induced(&c.vertices, |_| true);
                let x: Vec<bool> = c.vertices.iter().map(|v| c.core.binary_search(v).is_ok()).collect();
                if !matches!(verify_vertex_expanding(&sub.graph, &x, phi), Ok(VertexExpansion::Expanding)) {
                    bad += 1;
                }
            }
        }
        bad
    }
}

fn cap() -> usize {
    n_exact().min(62)
}

fn adjacency_masks(g: &Graph) -> Vec<u64> {
    let mut adj = vec![0u64; g.n()];
    for &(u, v) in g.edges() {
        adj[u] |= 1 << v;
        adj[v] |= 1 << u;
    }
    adj
}

fn components_avoiding(adj: &[u64], n: usize, s: u64) -> Vec<u64> {
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut rest = full & !s;
    let mut out = Vec::new();
    while rest != 0 {
        let start = rest & rest.wrapping_neg();
        let mut comp = start;
        let mut frontier = start;
        while frontier != 0 {
            let v = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let new = adj[v] & rest & !comp;
            comp |= new;
            frontier |= new;
        }
        rest &= !comp;
        out.push(comp);
    }
    out
}

/// Violation test for one cut: den·|S| < num·min(|X∩(L∪S)|, |X∩(R∪S)|).
fn violates(phi: Phi, s: u64, xl: u64, xr: u64, xs: u64) -> bool {
    phi.den * s < phi.num * (xs + xl.min(xr))
}

/// Smallest violating cut ordered by (|S|, lexicographic S, lexicographic L),
/// with |L| ≤ `l_cap`.
fn search(g: &Graph, xmask: u64, phi: Phi, l_cap: usize) -> Option<(u64, u64, u64)> {
    let n = g.n();
    let adj = adjacency_masks(g);
    let total_x = xmask.count_ones() as u64;
    for size in 0..n.saturating_sub(1) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            let s: u64 = idx.iter().fold(0, |a, &i| a | 1 << i);
            if let Some(hit) = check_separator_set(&adj, n, s, xmask, total_x, phi, l_cap) {
                return Some(hit);
            }
            if !next_combination(&mut idx, n) {
                break;
            }
        }
    }
    None
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn check_separator_set(
    adj: &[u64],
    n: usize,
    s: u64,
    xmask: u64,
    total_x: u64,
    phi: Phi,
    l_cap: usize,
) -> Option<(u64, u64, u64)> {
    let comps = components_avoiding(adj, n, s);
    if comps.len() < 2 {
        return None;
    }
    let s_size = s.count_ones() as u64;
    let xs = (s & xmask).count_ones() as u64;
    let rest_x = total_x - xs;
    let rest_size: usize = comps.iter().map(|c| c.count_ones() as usize).sum();
    // reach[size] = bitset of achievable |X ∩ L| over unions of components
    let mut reach = vec![0u64; rest_size + 1];
    reach[0] = 1;
    for &c in &comps {
        let (cs, cx) = (c.count_ones() as usize, (c & xmask).count_ones());
        for sz in (0..=rest_size - cs).rev() {
            if reach[sz] != 0 {
                reach[sz + cs] |= reach[sz] << cx;
            }
        }
    }
    let exists = (1..rest_size.min(l_cap + 1)).any(|sz| {
        let mut bits = reach[sz];
        while bits != 0 {
            let xl = bits.trailing_zeros() as u64;
            bits &= bits - 1;
            if violates(phi, s_size, xl, rest_x - xl, xs) {
                return true;
            }
        }
        false
    });
    if !exists {
        return None;
    }
    let k = comps.len();
    let mut best: Option<u64> = None;
    for sub in 1u64..(1u64 << k) - 1 {
        let l = mask_to_vec(sub).iter().fold(0u64, |a, &i| a | comps[i]);
        if l.count_ones() as usize > l_cap {
            continue;
        }
        let xl = (l & xmask).count_ones() as u64;
        if violates(phi, s_size, xl, rest_x - xl, xs) && best.is_none_or(|b| lex_less(l, b)) {
            best = Some(l);
        }
    }
    let l = best.expect("dynamic program found a violating union");
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    Some((l, s, full & !l & !s))
}

/// Exhaustive check of |S| ≥ φ·min(|X∩(L∪S)|, |X∩(R∪S)|) over all vertex cuts.
pub fn verify_vertex_expanding(g: &Graph, x: &[bool], phi: Phi) -> Result<VertexExpansion, HierarchyError> {
    let n = g.n();
    if n > cap() {
        return Err(HierarchyError::SizeCap { n, cap: cap() });
    }
    let xmask = x.iter().enumerate().fold(0u64, |a, (v, &b)| if b { a | 1 << v } else { a });
    Ok(match search(g, xmask, phi, n) {
        None => VertexExpansion::Expanding,
        Some((l, s, r)) => VertexExpansion::Violated(VertexCut {
            l: mask_to_vec(l),
            s: mask_to_vec(s),
            r: mask_to_vec(r),
        }),
    })
}

#[derive(Clone, Debug)]
pub struct VertexSeparator {
    pub x: Vec<bool>,
    pub certified: bool,
}

/// Starts from X = V and applies X ← X∖(X∩L) ∪ S on violating vertex cuts
/// with |L| ≤ n/2 until X is 1-vertex-expanding.
pub fn vertex_separator(g: &Graph, mode: Mode) -> Result<VertexSeparator, HierarchyError> {
    if !g.is_connected() {
        return Err(HierarchyError::Disconnected);
    }
    let n = g.n();
    if n <= cap() {
        let mut xmask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        while let Some((l, s, _)) = search(g, xmask, Phi::ONE, n / 2) {
            xmask = (xmask & !l) | s;
        }
        return Ok(VertexSeparator {
            x: (0..n).map(|v| xmask >> v & 1 == 1).collect(),
            certified: true,
        });
    }
    if mode == Mode::Exact {
        return Err(HierarchyError::SizeCap { n, cap: cap() });
    }
    let mut x = vec![true; n];
    while let Some(cut) = heuristic_cut(g, &x) {
        for &v in &cut.l {
            x[v] = false;
        }
        for &v in &cut.s {
            x[v] = true;
        }
    }
    Ok(VertexSeparator { x, certified: false })
}

/// Candidate cuts from closed neighborhoods, BFS layers and spectral prefixes.
fn heuristic_cut(g: &Graph, x: &[bool]) -> Option<VertexCut> {
    let n = g.n();
    let mut best: Option<VertexCut> = None;
    let mut consider = |l: Vec<usize>, member: &[bool]| {
        if l.is_empty() || l.len() > n / 2 {
            return;
        }
        let mut in_s = vec![false; n];
        let mut s = Vec::new();
        for &v in &l {
            for &(u, _) in g.neighbors(v) {
                if !member[u] && !in_s[u] {
                    in_s[u] = true;
                    s.push(u);
                }
            }
        }
        if l.len() + s.len() >= n {
            return;
        }
        s.sort_unstable();
        let xl = l.iter().filter(|&&v| x[v]).count() as u64;
        let xs = s.iter().filter(|&&v| x[v]).count() as u64;
        let xt = x.iter().filter(|&&b| b).count() as u64;
        if !violates(Phi::ONE, s.len() as u64, xl, xt - xl - xs, xs) {
            return;
        }
        let better = match &best {
            None => true,
            Some(b) => (s.len(), &s, &l) < (b.s.len(), &b.s, &b.l),
        };
        if better {
            let r = (0..n).filter(|&v| !member[v] && !in_s[v]).collect();
            best = Some(VertexCut { l, s, r });
        }
    };
    for v in 0..n {
        let mut member = vec![false; n];
        let mut layer = vec![v];
        member[v] = true;
        let mut ball = vec![v];
        while !layer.is_empty() && ball.len() <= n / 2 {
            let mut l = ball.clone();
            l.sort_unstable();
            consider(l, &member);
            let mut next = Vec::new();
            for &a in &layer {
                for &(u, _) in g.neighbors(a) {
                    if !member[u] {
                        member[u] = true;
                        next.push(u);
                    }
                }
            }
            ball.extend(&next);
            layer = next;
        }
    }
    let order = fiedler_order(g, 11, 200);
    let mut member = vec![false; n];
    for (i, &v) in order.iter().enumerate().take(n / 2) {
        member[v] = true;
        let mut l = order[..=i].to_vec();
        l.sort_unstable();
        consider(l, &member);
    }
    best
}

/// Top-down construction; level components and cores are materialized.
pub fn build_vertex_hierarchy(g: &Graph, mode: Mode) -> Result<VertexLevelAssignment, HierarchyError> {
    let n = g.n();
    let mut depth = vec![0u32; n];
    let mut certified = true;
    let mut stack: Vec<(Vec<usize>, u32)> =
        super::components_where(g, |_| true).into_iter().map(|c| (c, 0)).collect();
    while let Some((verts, d)) = stack.pop() {
        if verts.len() == 1 {
            depth[verts[0]] = d;
            continue;
        }
        let sub = g.induced(&verts, |_| true);
        let sep = vertex_separator(&sub.graph, mode)?;
        certified &= sep.certified;
        for (lv, &inx) in sep.x.iter().enumerate() {
            if inx {
                depth[sub.vmap[lv]] = d;
            }
        }
        let rest = sub.graph.edges().iter().enumerate().map(|(e, &(a, b))| (e, !sep.x[a] && !sep.x[b]));
        let keep: Vec<bool> = rest.map(|(_, k)| k).collect();
        for comp in super::components_where(&sub.graph, |e| keep[e]) {
            if comp.len() == 1 && sep.x[comp[0]] {
                continue;
            }
            if comp.iter().all(|&v| !sep.x[v]) {
                stack.push((comp.iter().map(|&v| sub.vmap[v]).collect(), d + 1));
            }
        }
    }
    let h = if n == 0 { 0 } else { depth.iter().max().unwrap() + 1 };
    let level: Vec<u32> = depth.iter().map(|&d| h - d).collect();
    let mut components = Vec::with_capacity(h as usize);
    for l in 1..=h {
        let keep: Vec<bool> = g.edges().iter().map(|&(a, b)| level[a] <= l && level[b] <= l).collect();
        let comps = super::components_where(g, |e| keep[e]);
        components.push(
            comps
                .into_iter()
                .filter(|c| level[c[0]] <= l)
                .map(|c| {
                    let core = c.iter().copied().filter(|&v| level[v] == l).collect();
                    LevelComponent { vertices: c, core }
                })
                .collect(),
        );
    }
    Ok(VertexLevelAssignment { level, h, phi: Phi::ONE, certified, components })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star(k: usize) -> Graph {
        Graph::new(k + 1, (1..=k).map(|i| (0, i)).collect()).unwrap()
    }

    fn cycle(n: usize) -> Graph {
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n)).collect()).unwrap()
    }

    #[test]
    fn star_keeps_its_center() {
        let g = star(4);
        let sep = vertex_separator(&g, Mode::Exact).unwrap();
        assert!(sep.x[0]);
        assert!(verify_vertex_expanding(&g, &sep.x, Phi::ONE).unwrap().holds());
        // removing X leaves singletons
        for (a, b) in g.edges().iter().copied() {
            assert!(sep.x[a] || sep.x[b]);
        }
    }

    #[test]
    fn k2_is_its_own_separator() {
        let g = Graph::new(2, vec![(0, 1)]).unwrap();
        let sep = vertex_separator(&g, Mode::Exact).unwrap();
        assert!(sep.x.iter().any(|&b| b));
        assert!(verify_vertex_expanding(&g, &sep.x, Phi::ONE).unwrap().holds());
    }

    #[test]
    fn c6_separator() {
        let g = cycle(6);
        let sep = vertex_separator(&g, Mode::Exact).unwrap();
        assert!(verify_vertex_expanding(&g, &sep.x, Phi::ONE).unwrap().holds());
        let keep: Vec<bool> = g.edges().iter().map(|&(a, b)| !sep.x[a] && !sep.x[b]).collect();
        for c in super::super::components_where(&g, |e| keep[e]) {
            if !sep.x[c[0]] {
                assert!(c.len() <= 3);
            }
        }
    }

    #[test]
    fn full_set_of_a_path_is_not_expanding() {
        let g = Graph::new(3, vec![(0, 1), (1, 2)]).unwrap();
        match verify_vertex_expanding(&g, &[true; 3], Phi::ONE).unwrap() {
            VertexExpansion::Violated(c) => {
                assert_eq!(c, VertexCut { l: vec![0], s: vec![1], r: vec![2] })
            }
            _ => panic!(),
        }
    }

    #[test]
    fn hierarchy_cores_partition() {
        let g = cycle(7);
        let h = build_vertex_hierarchy(&g, Mode::Exact).unwrap();
        let mut seen = vec![0; 7];
        for comps in &h.components {
            for c in comps {
                for &v in &c.core {
                    seen[v] += 1;
                }
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
        assert_eq!(h.count_violations(&g, Phi::ONE, 18), 0);
    }
}
