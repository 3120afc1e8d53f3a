//! Approximate Fiedler ordering used to propose sweep cuts.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::Graph;

/// Vertices ordered by an approximate second eigenvector of the normalized
/// adjacency matrix. Deterministic for a given graph and seed.
pub(crate) fn fiedler_order(g: &Graph, seed: u64, iters: usize) -> Vec<usize> {
    let n = g.n();
    let mut order: Vec<usize> = (0..n).collect();
    if n <= 2 {
        return order;
    }
    let d: Vec<f64> = (0..n).map(|v| (g.degree(v) as f64).max(1.0)).collect();
    let sq: Vec<f64> = d.iter().map(|x| x.sqrt()).collect();
    let norm1: f64 = d.iter().sum::<f64>().sqrt();
    let top: Vec<f64> = sq.iter().map(|s| s / norm1).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let mut y = vec![0.0; n];
    for _ in 0..iters {
        deflate(&mut x, &top);
        // y = (I + D^-1/2 A D^-1/2) x / 2, which is PSD
        for v in 0..n {
            let mut acc = 0.0;
            for &(u, _) in g.neighbors(v) {
                acc += x[u] / sq[u];
            }
            y[v] = 0.5 * (x[v] + acc / sq[v]);
        }
        let norm = y.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        for v in 0..n {
            x[v] = y[v] / norm;
        }
    }
    let score: Vec<f64> = (0..n).map(|v| x[v] / sq[v]).collect();
    order.sort_by(|&a, &b| score[a].total_cmp(&score[b]).then(a.cmp(&b)));
    order
}

fn deflate(x: &mut [f64], top: &[f64]) {
    let dot: f64 = x.iter().zip(top).map(|(a, b)| a * b).sum();
    for (a, b) in x.iter_mut().zip(top) {
        *a -= dot * b;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separates_two_cliques() {
        let mut edges = Vec::new();
        for side in [0, 6] {
            for a in 0..6 {
                for b in a + 1..6 {
                    edges.push((side + a, side + b));
                }
            }
        }
        edges.push((0, 6));
        let g = Graph::new(12, edges).unwrap();
        let order = fiedler_order(&g, 7, 300);
        let mut first: Vec<usize> = order[..6].to_vec();
        first.sort();
        assert!(first == (0..6).collect::<Vec<_>>() || first == (6..12).collect::<Vec<_>>());
    }
}
