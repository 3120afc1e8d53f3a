//! Fault-tolerant connectivity labels for undirected graphs under edge faults.
//!
//! Two deterministic schemes (one with labels linear in the fault budget,
//! one with labels growing like its square root) and two randomized sketch
//! schemes share the graph, hierarchy and Euler-tour machinery defined here.

pub mod bits;
pub mod code_shares;
pub mod det;
pub mod dsu;
pub mod euler;
pub mod gen;
pub mod graph;
pub mod hierarchy;
pub mod label_file;
pub mod rand_edge;
pub mod simple;
pub mod sqrt;
pub mod steiner;

pub use graph::{load_graph, oracle_components, reduce_degree3, FaultSet, Graph, Partition};
