use flbl::bits::{BitReader, BitWriter};
use flbl::gen;
use flbl::rand_edge::*;
use flbl::{oracle_components, FaultSet, Graph};
use rand::seq::index::sample as sample_idx;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn refs(l: &RandLabels, ids: &[usize]) -> Vec<RandEdgeLabel> {
    ids.iter().map(|&e| l.edges[e].clone()).collect()
}

fn check(g: &Graph, l: &RandLabels, ids: &[usize]) -> bool {
    let owned = refs(l, ids);
    let fl: Vec<&RandEdgeLabel> = owned.iter().collect();
    let ans = query_rand(&l.params, &l.comp_starts, &fl).unwrap();
    let truth = oracle_components(g, &FaultSet::new(g, ids).unwrap());
    if ans.component_count() != truth.count {
        return false;
    }
    (0..g.n()).all(|a| (0..g.n()).all(|b| ans.connected(l.vertices[a].lo, l.vertices[b].lo) == truth.same(a, b)))
}

fn xor(a: &mut [u64], b: &[u64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x ^= *y;
    }
}

#[test]
fn barbell_bridge_splits_in_two() {
    let g = Graph::new(6, vec![(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (3, 5)]).unwrap();
    let l = build_rand(&g, 2, RandScheme::Long, RandConfig::default(), 1);
    assert!(check(&g, &l, &[3]));
    let owned = refs(&l, &[3]);
    let ans = query_long(&l.params, &l.comp_starts, &owned.iter().collect::<Vec<_>>()).unwrap();
    assert_eq!(ans.component_count(), 2);
    assert!(check(&g, &l, &[]));
    assert!(check(&g, &l, &[0, 1]));
}

#[test]
fn subtree_aggregates_match_naive_recount() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let g = gen::gnp(&mut rng, 30, 0.15);
        let l = build_rand(&g, 5, RandScheme::Long, RandConfig::default(), rng.random());
        let nontree: Vec<_> = l.edges.iter().filter(|e| matches!(e.ends, Ends::NonTree { .. })).collect();
        let naive = |lo: u32, hi: u32| {
            let mut acc = vec![0u64; l.params.l0.div_ceil(64)];
            for e in &nontree {
                if let Ends::NonTree { u, v } = e.ends {
                    let inside = |x: u32| lo <= x && x <= hi;
                    if inside(u) != inside(v) {
                        xor(&mut acc, &e.sk0);
                    }
                }
            }
            acc
        };
        for e in &l.edges {
            if let Ends::Tree(r) = e.ends {
                assert_eq!(e.sk0, naive(r.lo, r.hi));
            }
        }
        // Whole components are closed, so their aggregate vanishes.
        let mut ends: Vec<u32> = l.comp_starts[1..].iter().map(|&s| s - 1).collect();
        ends.push(g.n() as u32 - 1);
        for (&s, &t) in l.comp_starts.iter().zip(&ends) {
            assert!(naive(s, t).iter().all(|&w| w == 0));
        }
    }
}

#[test]
fn vertex_sketch_is_a_homomorphism() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = gen::gnp(&mut rng, 24, 0.3);
    let l = build_rand(&g, 4, RandScheme::Long, RandConfig::default(), 9);
    let w = l.params.l0.div_ceil(64);
    let sketch = |set: &[bool]| {
        let mut acc = vec![0u64; w];
        for (e, &(a, b)) in g.edges().iter().enumerate() {
            if !l.in_tree[e] {
                for v in [a, b] {
                    if set[v] {
                        xor(&mut acc, &l.edges[e].sk0);
                    }
                }
            }
        }
        acc
    };
    for _ in 0..50 {
        let a: Vec<bool> = (0..g.n()).map(|_| rng.random_bool(0.5)).collect();
        let b: Vec<bool> = (0..g.n()).map(|_| rng.random_bool(0.5)).collect();
        let ab: Vec<bool> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
        let mut lhs = sketch(&a);
        xor(&mut lhs, &sketch(&b));
        assert_eq!(lhs, sketch(&ab));
    }
}

#[test]
fn unions_of_true_components_have_zero_sketch() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let n = rng.random_range(2..=40);
        let g = gen::connected(&mut rng, n, n, true);
        let f = rng.random_range(1..=8);
        let l = build_rand(&g, f, RandScheme::Long, RandConfig::default(), rng.random());
        let ids = sample_idx(&mut rng, g.m(), f.min(g.m())).into_vec();
        let owned = refs(&l, &ids);
        let parts = split_parts(&l.params, &l.comp_starts, &owned.iter().collect::<Vec<_>>()).unwrap();
        let truth = oracle_components(&g, &FaultSet::new(&g, &ids).unwrap());
        let mut by_dfs = vec![0; g.n()];
        for (v, r) in l.vertices.iter().enumerate() {
            by_dfs[r.lo as usize] = v;
        }
        let mut acc = vec![vec![0u64; l.params.l0.div_ceil(64)]; truth.count];
        for i in 0..parts.len() {
            xor(&mut acc[truth.label[by_dfs[parts.rep[i] as usize]]], &parts.sk0[i]);
        }
        assert!(acc.iter().flatten().all(|&w| w == 0));
    }
}

#[test]
fn long_scheme_matches_oracle_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut bad = 0;
    let trials = 1500;
    for _ in 0..trials {
        let n = rng.random_range(2..=64);
        let g = if rng.random_bool(0.5) { gen::connected(&mut rng, n, n / 2, true) } else { gen::gnp(&mut rng, n, (3.0 / n as f64).min(1.0)) };
        let f = rng.random_range(1..=8);
        let l = build_rand(&g, f, RandScheme::Long, RandConfig::default(), rng.random());
        let k = rng.random_range(0..=f.min(g.m()));
        let ids = sample_idx(&mut rng, g.m(), k).into_vec();
        if !check(&g, &l, &ids) {
            bad += 1;
        }
    }
    assert_eq!(bad, 0);
}

#[test]
fn short_scheme_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..30 {
        let g = gen::connected(&mut rng, 64, 150, false);
        let l = build_rand(&g, 72, RandScheme::Short, RandConfig::default(), rng.random());
        assert_eq!(l.params.scheme, RandScheme::Short);
        let k = rng.random_range(0..=72);
        let ids = sample_idx(&mut rng, g.m(), k).into_vec();
        assert!(check(&g, &l, &ids));
    }
}

#[test]
fn single_surviving_edge_merges_in_first_step() {
    // Two 8-cliques joined by edges 0-8 and 1-9; failing one leaves a single crossing edge.
    let mut edges = Vec::new();
    for base in [0, 8] {
        for a in 0..8 {
            for b in a + 1..8 {
                edges.push((base + a, base + b));
            }
        }
    }
    edges.push((0, 8));
    edges.push((1, 9));
    let g = Graph::new(16, edges).unwrap();
    let m = g.m();
    let l = build_rand(&g, 32, RandScheme::Short, RandConfig::default(), 77);
    assert_eq!(l.params.scheme, RandScheme::Short);
    // Fail whichever of the two joining edges is in the tree, so the pieces are the two cliques.
    let bridge = if l.in_tree[m - 2] { m - 2 } else { m - 1 };
    assert!(l.in_tree[bridge]);
    let owned = refs(&l, &[bridge]);
    let ans = query_short(&l.params, &l.comp_starts, &owned.iter().collect::<Vec<_>>()).unwrap();
    assert_eq!(ans.trace.merges[0], 1);
    assert_eq!(ans.trace.nonisolated[1], 0);
    assert_eq!(ans.component_count(), 1);
}

#[test]
fn failing_every_edge_isolates_every_vertex() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let g = gen::connected(&mut rng, 16, 30, false);
    let all: Vec<usize> = (0..g.m()).collect();
    for want in [RandScheme::Long, RandScheme::Short] {
        let l = build_rand(&g, g.m(), want, RandConfig::default(), 5);
        assert_eq!(l.params.scheme, want);
        let owned = refs(&l, &all);
        let ans = query_rand(&l.params, &l.comp_starts, &owned.iter().collect::<Vec<_>>()).unwrap();
        assert_eq!(ans.component_count(), 16);
    }
}

#[test]
fn small_budget_reroutes_to_long() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let g = gen::connected(&mut rng, 64, 64, false);
    let l = build_rand(&g, 1, RandScheme::Short, RandConfig::default(), 1);
    assert_eq!(l.params.scheme, RandScheme::Long);
    assert!(!short_applies(64, 71));
    assert!(short_applies(64, 72));
}

#[test]
fn labels_roundtrip_with_exact_sizes() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let g = gen::connected(&mut rng, 40, 40, true);
    for (f, want) in [(5, RandScheme::Long), (80, RandScheme::Short)] {
        let l = build_rand(&g, f, want, RandConfig::default(), 3);
        let p = &l.params;
        let lg = 6;
        if want == RandScheme::Long {
            assert_eq!(p.payload_bits(), f + 4 * lg + 2 * lg);
        }
        for e in &l.edges {
            let mut w = BitWriter::new();
            e.write(&mut w, p);
            assert_eq!(w.bit_len(), p.edge_label_bits());
            let (bytes, len) = w.into_bytes();
            let mut r = BitReader::new(&bytes, len);
            assert_eq!(&RandEdgeLabel::read(&mut r, p).unwrap(), e);
            r.finish().unwrap();
        }
    }
}

#[test]
fn foreign_seed_is_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let g = gen::connected(&mut rng, 16, 30, false);
    let a = build_rand(&g, 40, RandScheme::Short, RandConfig::default(), 1);
    let b = build_rand(&g, 40, RandScheme::Short, RandConfig::default(), 2);
    let f = [&b.edges[0]];
    assert_eq!(query_short(&a.params, &a.comp_starts, &f).unwrap_err(), RandError::SeedMismatch);
    let many: Vec<&RandEdgeLabel> = a.edges.iter().take(41).collect();
    assert!(matches!(query_short(&a.params, &a.comp_starts, &many), Err(RandError::TooManyFaults { .. })));
}

#[test]
fn singleton_is_exact_on_single_uids() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for seed in 0..30u64 {
        let g = gen::gnp(&mut rng, 20, 0.3);
        let d = Distinguishers::from_seed(seed, 5, 4);
        for &(a, b) in g.edges() {
            let x = (a.min(b) | (a.max(b) << 5)) as u64;
            let u = d.uid(x);
            assert_eq!(d.singleton(&u), Some(x));
        }
        assert_eq!(d.singleton(&vec![0; d.uid_bits().div_ceil(64)]), None);
    }
}

#[test]
fn multi_uid_aggregates_rarely_pass() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let d = Distinguishers::from_seed(99, 6, 4);
    let mut fp = 0;
    let trials = 20_000;
    for t in 0..trials {
        let k = 2 + t % 2;
        let mut acc = vec![0u64; d.uid_bits().div_ceil(64)];
        for x in sample_idx(&mut rng, 1 << 12, k) {
            xor(&mut acc, &d.uid(x as u64));
        }
        if d.singleton(&acc).is_some() {
            fp += 1;
        }
    }
    assert!((fp as f64) / (trials as f64) <= 1e-3, "{fp} false positives");
}
