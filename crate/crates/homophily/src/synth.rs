//! Seeded generation of uniform random colored graphs.
//!
//! The benchmark subcommand and several self-tests need many structurally
//! varied inputs with a known node count, edge count, and class count. This
//! module draws a simple graph uniformly from all graphs with exactly `m`
//! edges on `n` nodes, then colors the nodes. Everything is driven by a
//! ChaCha stream, so a `(params, seed)` pair always yields the same graph
//! byte for byte, regardless of platform or thread count.

use crate::graph::{ColorId, ColoredGraph, GraphError, NodeId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;
use std::fmt;

/// Request for one synthetic graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthParams {
    /// Node count `n`.
    pub nodes: u32,
    /// Exact edge count `m`; must fit under `n(n-1)/2`.
    pub edges: u64,
    /// Class count `s`; the first `s` nodes are pinned one per class so no
    /// class is ever empty, the rest draw classes uniformly.
    pub classes: u32,
    /// RNG seed; same seed, same graph.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SynthError {
    /// `edges` exceeds the number of distinct node pairs.
    TooManyEdges { requested: u64, possible: u64 },
    /// `classes` is zero or exceeds `nodes`.
    BadClassCount { classes: u32, nodes: u32 },
}

impl fmt::Display for SynthError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SynthError::TooManyEdges {
                requested,
                possible,
            } => write!(
                f,
                "requested {requested} edges but only {possible} distinct pairs exist"
            ),
            SynthError::BadClassCount { classes, nodes } => write!(
                f,
                "class count {classes} must be between 1 and the node count {nodes}"
            ),
        }
    }
}

impl std::error::Error for SynthError {}

/// Draws a uniform random simple graph with exactly `params.edges` edges and
/// a near-balanced random coloring with every class nonempty.
///
/// Edges are rejection-sampled into a set keyed by the pair index, which is
/// fast while `m` is well below `n(n-1)/2`; dense requests still terminate
/// because every miss leaves the remaining pool nonempty.
///
/// ```
/// use homophily::synth::{random_graph, SynthParams};
///
/// let params = SynthParams { nodes: 50, edges: 120, classes: 3, seed: 7 };
/// let g = random_graph(&params).unwrap();
/// assert_eq!(g.num_nodes(), 50);
/// assert_eq!(g.num_edges(), 120);
/// // Same seed, same graph.
/// assert_eq!(g.edges().count(), random_graph(&params).unwrap().edges().count());
/// ```
pub fn random_graph(params: &SynthParams) -> Result<ColoredGraph, SynthError> {
    let n = params.nodes as u64;
    let possible = n * n.saturating_sub(1) / 2;
    if params.edges > possible {
        return Err(SynthError::TooManyEdges {
            requested: params.edges,
            possible,
        });
    }
    if params.classes == 0 || params.classes > params.nodes {
        return Err(SynthError::BadClassCount {
            classes: params.classes,
            nodes: params.nodes,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let mut colors: Vec<ColorId> = Vec::with_capacity(params.nodes as usize);
    for v in 0..params.nodes {
        if v < params.classes {
            colors.push(v);
        } else {
            colors.push(rng.gen_range(0..params.classes));
        }
    }

    let mut seen: HashSet<u64> = HashSet::with_capacity(params.edges as usize);
    let mut edges: Vec<(NodeId, NodeId)> = Vec::with_capacity(params.edges as usize);
    while (edges.len() as u64) < params.edges {
        let u = rng.gen_range(0..params.nodes);
        let v = rng.gen_range(0..params.nodes);
        if u == v {
            continue;
        }
        let (lo, hi) = (u.min(v), u.max(v));
        if seen.insert(lo as u64 * n + hi as u64) {
            edges.push((lo, hi));
        }
    }

    Ok(ColoredGraph::from_indexed(&edges, colors).expect("generator emits valid edges"))
}

/// `random_graph` with the edge count derived from a target density
/// `2m / (n(n-1))`, rounded to the nearest whole edge.
pub fn random_graph_with_density(
    nodes: u32,
    density: f64,
    classes: u32,
    seed: u64,
) -> Result<ColoredGraph, SynthError> {
    let n = nodes as u64;
    let possible = n * n.saturating_sub(1) / 2;
    let edges = (density * possible as f64).round() as u64;
    random_graph(&SynthParams {
        nodes,
        edges,
        classes,
        seed,
    })
}

// GraphError can only arise from generator bugs, but keep the conversion so
// callers mixing construction paths can use one error type.
impl From<GraphError> for SynthError {
    fn from(e: GraphError) -> Self {
        unreachable!("generated graphs are always valid: {e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_counts_and_nonempty_classes() {
        let g = random_graph(&SynthParams {
            nodes: 50,
            edges: 100,
            classes: 7,
            seed: 3,
        })
        .unwrap();
        assert_eq!(g.num_nodes(), 50);
        assert_eq!(g.num_edges(), 100);
        assert_eq!(g.num_classes(), 7);
        assert!(g.class_sizes().iter().all(|&c| c > 0));
    }

    #[test]
    fn same_seed_same_graph_different_seed_different_graph() {
        let params = SynthParams {
            nodes: 40,
            edges: 60,
            classes: 3,
            seed: 11,
        };
        let a = random_graph(&params).unwrap();
        let b = random_graph(&params).unwrap();
        assert_eq!(a.edges().collect::<Vec<_>>(), b.edges().collect::<Vec<_>>());
        assert_eq!(a.colors(), b.colors());

        let c = random_graph(&SynthParams { seed: 12, ..params }).unwrap();
        assert_ne!(
            (a.edges().collect::<Vec<_>>(), a.colors().to_vec()),
            (c.edges().collect::<Vec<_>>(), c.colors().to_vec())
        );
    }

    #[test]
    fn complete_graph_request_is_satisfiable() {
        let g = random_graph(&SynthParams {
            nodes: 9,
            edges: 36,
            classes: 2,
            seed: 0,
        })
        .unwrap();
        assert_eq!(g.num_edges(), 36);
        assert_eq!(g.density(), 1.0);
    }

    #[test]
    fn rejects_impossible_requests() {
        let over = random_graph(&SynthParams {
            nodes: 5,
            edges: 11,
            classes: 2,
            seed: 0,
        });
        assert!(matches!(over, Err(SynthError::TooManyEdges { possible: 10, .. })));
        let zero = random_graph(&SynthParams {
            nodes: 5,
            edges: 2,
            classes: 0,
            seed: 0,
        });
        assert!(matches!(zero, Err(SynthError::BadClassCount { .. })));
        let wide = random_graph(&SynthParams {
            nodes: 5,
            edges: 2,
            classes: 6,
            seed: 0,
        });
        assert!(matches!(wide, Err(SynthError::BadClassCount { .. })));
    }

    #[test]
    fn density_helper_hits_target() {
        let g = random_graph_with_density(100, 0.1, 4, 9).unwrap();
        assert_eq!(g.num_edges(), (0.1f64 * 4950.0).round() as u64);
    }
}
