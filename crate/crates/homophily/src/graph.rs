//! Node-colored simple graphs in compressed sparse row form.
//!
//! Graphs are immutable once built: adjacency is a single sorted neighbor
//! array plus per-node offsets, colors are dense indices `0..s` with every
//! class nonempty, and the node order is the first-appearance order of the
//! input. All structural statistics the estimators need (wedge counts,
//! degree histograms, distance-two pairs) live here.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::NodeColorMap;

pub type NodeId = u32;
pub type ColorId = u32;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("self-loop on node '{label}'")]
    SelfLoop { label: String },
    #[error("edge endpoint '{label}' has no color assignment")]
    MissingColor { label: String },
    #[error("node index {node} out of range for {n} nodes")]
    NodeOutOfRange { node: u64, n: u64 },
    #[error("color class {index} is empty; classes must be dense and nonempty")]
    EmptyColorClass { index: u32 },
    #[error("graph exceeds the 32-bit node-index limit")]
    TooManyNodes,
}

/// Class sizes `(c_1, ..., c_s)` of a coloring; the only input the null
/// model needs besides the graph structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColorProfile {
    counts: Vec<u64>,
    total: u64,
}

impl ColorProfile {
    /// Validates that every class is nonempty; zero-count classes are
    /// rejected here rather than special-cased in every formula.
    pub fn from_counts(counts: Vec<u64>) -> Result<Self, GraphError> {
        if let Some(idx) = counts.iter().position(|&c| c == 0) {
            return Err(GraphError::EmptyColorClass { index: idx as u32 });
        }
        let total = counts.iter().sum();
        Ok(ColorProfile { counts, total })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Total node count `n`.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn num_classes(&self) -> usize {
        self.counts.len()
    }
}

#[derive(Clone, Debug)]
pub struct ColoredGraph {
    labels: Vec<String>,
    colors: Vec<ColorId>,
    color_labels: Vec<String>,
    class_sizes: Vec<u64>,
    offsets: Vec<usize>,
    neighbors: Vec<NodeId>,
    m: u64,
}

impl ColoredGraph {
    /// Builds a graph from labeled edges and a label-to-color map.
    ///
    /// Edges are deduplicated and stored undirected; self-loops and
    /// endpoints without a color are rejected. Nodes mentioned only in
    /// `node_colors` are kept or dropped per `keep_isolated`. Node order is
    /// the map's insertion order; color indices are dense in first-appearance
    /// order over the retained nodes.
    ///
    /// ```
    /// use homophily::graph::ColoredGraph;
    /// use homophily::NodeColorMap;
    ///
    /// let mut nodes = NodeColorMap::new();
    /// nodes.insert("a".into(), "J".into());
    /// nodes.insert("b".into(), "J".into());
    /// nodes.insert("c".into(), "K".into());
    ///
    /// let edges = vec![("a".to_string(), "b".to_string())];
    /// let g = ColoredGraph::build(&edges, &nodes, true).unwrap();
    /// assert_eq!(g.num_nodes(), 3); // c kept despite having no edge
    /// assert_eq!(g.class_sizes(), &[2, 1]);
    /// ```
    pub fn build(
        edges: &[(String, String)],
        node_colors: &NodeColorMap,
        keep_isolated: bool,
    ) -> Result<Self, GraphError> {
        for (a, b) in edges {
            if a == b {
                return Err(GraphError::SelfLoop { label: a.clone() });
            }
            for endpoint in [a, b] {
                if !node_colors.contains_key(endpoint) {
                    return Err(GraphError::MissingColor {
                        label: endpoint.clone(),
                    });
                }
            }
        }

        let touched: std::collections::HashSet<&str> = edges
            .iter()
            .flat_map(|(a, b)| [a.as_str(), b.as_str()])
            .collect();

        let mut labels = Vec::new();
        let mut index_of = std::collections::HashMap::new();
        let mut colors = Vec::new();
        let mut color_labels: Vec<String> = Vec::new();
        let mut color_index: std::collections::HashMap<&str, ColorId> =
            std::collections::HashMap::new();
        for (label, color_label) in node_colors {
            if !keep_isolated && !touched.contains(label.as_str()) {
                continue;
            }
            if labels.len() >= u32::MAX as usize {
                return Err(GraphError::TooManyNodes);
            }
            let color = *color_index.entry(color_label.as_str()).or_insert_with(|| {
                color_labels.push(color_label.clone());
                (color_labels.len() - 1) as ColorId
            });
            index_of.insert(label.as_str(), labels.len() as NodeId);
            labels.push(label.clone());
            colors.push(color);
        }

        let mut pairs: Vec<(NodeId, NodeId)> = edges
            .iter()
            .map(|(a, b)| {
                let u = index_of[a.as_str()];
                let v = index_of[b.as_str()];
                (u.min(v), u.max(v))
            })
            .collect();
        pairs.sort_unstable();
        pairs.dedup();

        Self::assemble(labels, colors, color_labels, &pairs)
    }

    /// Builds from pre-indexed nodes: `colors[v]` gives node `v`'s class.
    /// Classes must be dense `0..s` with every class nonempty. Labels are
    /// synthesized from the indices. Intended for generated graphs and tests.
    ///
    /// ```
    /// use homophily::graph::ColoredGraph;
    ///
    /// // A path on three nodes, first two in class 0.
    /// let g = ColoredGraph::from_indexed(&[(0, 1), (1, 2)], vec![0, 0, 1]).unwrap();
    /// assert_eq!(g.num_edges(), 2);
    /// assert_eq!(g.wedge_count(), 1);
    /// ```
    pub fn from_indexed(edges: &[(NodeId, NodeId)], colors: Vec<ColorId>) -> Result<Self, GraphError> {
        let n = colors.len();
        if n >= u32::MAX as usize {
            return Err(GraphError::TooManyNodes);
        }
        let mut pairs = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a as usize >= n || b as usize >= n {
                return Err(GraphError::NodeOutOfRange {
                    node: a.max(b) as u64,
                    n: n as u64,
                });
            }
            if a == b {
                return Err(GraphError::SelfLoop {
                    label: a.to_string(),
                });
            }
            pairs.push((a.min(b), a.max(b)));
        }
        pairs.sort_unstable();
        pairs.dedup();

        let s = colors.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
        let mut sizes = vec![0u64; s];
        for &c in &colors {
            sizes[c as usize] += 1;
        }
        if let Some(idx) = sizes.iter().position(|&c| c == 0) {
            return Err(GraphError::EmptyColorClass { index: idx as u32 });
        }
        let labels = (0..n).map(|v| format!("v{v}")).collect();
        let color_labels = (0..s).map(|c| c.to_string()).collect();
        Self::assemble(labels, colors, color_labels, &pairs)
    }

    /// `pairs` must be sorted, deduplicated, self-loop-free, and normalized
    /// to `u < v`; filling in that order leaves every neighbor list sorted.
    fn assemble(
        labels: Vec<String>,
        colors: Vec<ColorId>,
        color_labels: Vec<String>,
        pairs: &[(NodeId, NodeId)],
    ) -> Result<Self, GraphError> {
        let n = labels.len();
        let mut degree = vec![0usize; n];
        for &(u, v) in pairs {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut acc = 0usize;
        offsets.push(0);
        for d in &degree {
            acc += d;
            offsets.push(acc);
        }
        let mut cursor: Vec<usize> = offsets[..n].to_vec();
        let mut neighbors = vec![0 as NodeId; acc];
        for &(u, v) in pairs {
            neighbors[cursor[u as usize]] = v;
            cursor[u as usize] += 1;
            neighbors[cursor[v as usize]] = u;
            cursor[v as usize] += 1;
        }
        let mut class_sizes = vec![0u64; color_labels.len()];
        for &c in &colors {
            class_sizes[c as usize] += 1;
        }
        Ok(ColoredGraph {
            labels,
            colors,
            color_labels,
            class_sizes,
            offsets,
            neighbors,
            m: pairs.len() as u64,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn num_edges(&self) -> u64 {
        self.m
    }

    pub fn num_classes(&self) -> usize {
        self.color_labels.len()
    }

    pub fn color(&self, v: NodeId) -> ColorId {
        self.colors[v as usize]
    }

    /// The full color word, indexed by node.
    pub fn colors(&self) -> &[ColorId] {
        &self.colors
    }

    /// Whether `u` and `v` are adjacent, by binary search in the sorted
    /// neighbor list of the lower-degree endpoint.
    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        let (a, b) = if self.degree(u) <= self.degree(v) {
            (u, v)
        } else {
            (v, u)
        };
        self.neighbors(a).binary_search(&b).is_ok()
    }

    pub fn label(&self, v: NodeId) -> &str {
        &self.labels[v as usize]
    }

    pub fn color_label(&self, c: ColorId) -> &str {
        &self.color_labels[c as usize]
    }

    pub fn color_labels(&self) -> &[String] {
        &self.color_labels
    }

    pub fn class_sizes(&self) -> &[u64] {
        &self.class_sizes
    }

    pub fn profile(&self) -> ColorProfile {
        ColorProfile::from_counts(self.class_sizes.clone())
            .expect("graph invariant: every class nonempty")
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.neighbors[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    pub fn degree(&self, v: NodeId) -> u32 {
        (self.offsets[v as usize + 1] - self.offsets[v as usize]) as u32
    }

    pub fn max_degree(&self) -> u32 {
        (0..self.num_nodes() as NodeId)
            .map(|v| self.degree(v))
            .max()
            .unwrap_or(0)
    }

    /// Edge density `2m / (n(n-1))`.
    pub fn density(&self) -> f64 {
        let n = self.num_nodes() as f64;
        if n < 2.0 {
            return 0.0;
        }
        2.0 * self.m as f64 / (n * (n - 1.0))
    }

    /// Undirected edges, each once, as `(u, v)` with `u < v`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.num_nodes() as NodeId).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// Number of two-edge paths (ordered pairs of distinct edges sharing an
    /// endpoint, counted once per unordered pair): `sum_v C(deg(v), 2)`.
    pub fn wedge_count(&self) -> u64 {
        (0..self.num_nodes() as NodeId)
            .map(|v| {
                let d = self.degree(v) as u64;
                d * (d.saturating_sub(1)) / 2
            })
            .sum()
    }

    /// Sum of squared degrees; the work bound for distance-two traversal.
    pub fn sum_squared_degrees(&self) -> u64 {
        (0..self.num_nodes() as NodeId)
            .map(|v| {
                let d = self.degree(v) as u64;
                d * d
            })
            .sum()
    }

    /// `|N(u) ∪ N(v)|` for distinct nodes, by merging the sorted lists.
    ///
    /// Panics if `u == v`.
    pub fn union_neighborhood_size(&self, u: NodeId, v: NodeId) -> u32 {
        assert_ne!(u, v, "union neighborhood needs two distinct nodes");
        let (a, b) = (self.neighbors(u), self.neighbors(v));
        let (mut i, mut j, mut count) = (0usize, 0usize, 0u32);
        while i < a.len() && j < b.len() {
            count += 1;
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        count + (a.len() - i) as u32 + (b.len() - j) as u32
    }

    /// Unordered pairs at distance exactly two, each exactly once as
    /// `(u, v, shared)` with `u < v`, where `shared = |N(u) ∩ N(v)| >= 1`.
    /// Work is O(sum of squared degrees); no global pair set is kept, pairs
    /// are deduplicated per source with stamp arrays.
    pub fn distance_two_pairs(&self) -> DistanceTwoPairs<'_> {
        let n = self.num_nodes();
        DistanceTwoPairs {
            g: self,
            next_source: 0,
            adj_stamp: vec![0; n],
            seen_stamp: vec![0; n],
            shared: vec![0; n],
            found: Vec::new(),
            pos: 0,
        }
    }

    pub fn degree_histogram(&self) -> DegreeHistogram {
        let mut counts = BTreeMap::new();
        for v in 0..self.num_nodes() as NodeId {
            *counts.entry(self.degree(v)).or_insert(0u64) += 1;
        }
        DegreeHistogram { counts }
    }
}

/// Iterator over distance-two pairs; see [`ColoredGraph::distance_two_pairs`].
pub struct DistanceTwoPairs<'g> {
    g: &'g ColoredGraph,
    next_source: u32,
    // Stamp value `u + 1` marks entries current for source u; stale entries
    // never need clearing.
    adj_stamp: Vec<u32>,
    seen_stamp: Vec<u32>,
    shared: Vec<u32>,
    found: Vec<NodeId>,
    pos: usize,
}

impl Iterator for DistanceTwoPairs<'_> {
    type Item = (NodeId, NodeId, u32);

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if self.pos < self.found.len() {
                let u = self.next_source - 1;
                let w = self.found[self.pos];
                self.pos += 1;
                return Some((u, w, self.shared[w as usize]));
            }
            if self.next_source as usize >= self.g.num_nodes() {
                return None;
            }
            let u = self.next_source;
            self.next_source += 1;
            let stamp = self.next_source; // u + 1
            self.found.clear();
            self.pos = 0;
            for &z in self.g.neighbors(u) {
                self.adj_stamp[z as usize] = stamp;
            }
            for &z in self.g.neighbors(u) {
                for &w in self.g.neighbors(z) {
                    if w <= u || self.adj_stamp[w as usize] == stamp {
                        continue;
                    }
                    if self.seen_stamp[w as usize] == stamp {
                        self.shared[w as usize] += 1;
                    } else {
                        self.seen_stamp[w as usize] = stamp;
                        self.shared[w as usize] = 1;
                        self.found.push(w);
                    }
                }
            }
        }
    }
}

/// Degree multiplicities, ordered by degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeHistogram {
    counts: BTreeMap<u32, u64>,
}

impl DegreeHistogram {
    /// `(degree, multiplicity)` in ascending degree order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.counts.iter().map(|(&d, &c)| (d, c))
    }

    pub fn num_nodes(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn max_degree(&self) -> u32 {
        self.counts.keys().next_back().copied().unwrap_or(0)
    }
}
