//! Closed-form null moments and z-scores for color-mixing statistics.
//!
//! The null model fixes the graph and the class-size profile and draws the
//! color assignment uniformly at random. Under it, every block edge count
//! and every isolated-node count has an exact mean and variance built from
//! falling-factorial ratios; observed values are standardized into
//! z-scores, bounded into U-values, and summarized by ratio and index
//! statistics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::combinatorics::{falling_ratio, two_class_fill_prob};
use crate::graph::{ColorProfile, ColoredGraph};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("edge moments need n >= 2 nodes, got {n}")]
    TooFewNodes { n: u64 },
    #[error("profile totals {profile_total} nodes but the graph has {graph_nodes}")]
    ProfileMismatch { profile_total: u64, graph_nodes: u64 },
    #[error("class index {index} out of range for {s} classes")]
    ClassIndexOutOfRange { index: usize, s: usize },
    #[error(
        "variance of {stat} came out {value:.3e} against a largest term of \
         {scale:.3e}; the closed forms guarantee nonnegativity, so this \
         signals numeric trouble"
    )]
    NegativeVariance { stat: String, value: f64, scale: f64 },
}

/// Compensated (Neumaier) accumulator for cancellation-prone sums.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Observed mixing pattern: symmetric matrix of per-block edge counts and
/// the per-class isolated-node counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeBlockCounts {
    pub edges: Vec<Vec<u64>>,
    pub isolated: Vec<u64>,
}

/// A variance that came out slightly negative from rounding and was
/// clamped to zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClampEvent {
    pub stat: String,
    pub raw: f64,
    pub scale: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MomentDiagnostics {
    pub clamped: Vec<ClampEvent>,
    /// Worst cancellation across all variance entries: largest term
    /// magnitude divided by the magnitude of the result.
    pub max_cancellation: f64,
}

/// Null-model means and variances for every block edge count and every
/// per-class isolated count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub mean_edges: Vec<Vec<f64>>,
    pub var_edges: Vec<Vec<f64>>,
    pub mean_isolated: Vec<f64>,
    pub var_isolated: Vec<f64>,
    pub diagnostics: MomentDiagnostics,
}

/// Result of a joint-significance query: the largest subset of the
/// candidate pairs whose summed U-values stay within the budget `alpha`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositiveSetQuery {
    pub alpha: f64,
    /// Selected pairs `(i, j)` with `i <= j`, in selection order
    /// (ascending U-value).
    pub members: Vec<(usize, usize)>,
    pub count: usize,
    /// Sum of `z^-2` over the selected pairs: the attained joint level.
    pub attained_level: f64,
    /// Conservative per-entry threshold `s / sqrt(alpha)` for declaring all
    /// `s` diagonal entries jointly significant at level `alpha`.
    pub bonferroni_diagonal_threshold: f64,
}

/// Standardized mixing report: z-scores, U-values, homophily ratios, the
/// synthetic index, and any joint-significance queries run so far.
///
/// Entries are `None` where the null variance is zero (degenerate classes,
/// empty graphs): no standardization exists there.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomophilyReport {
    pub z_edges: Vec<Vec<Option<f64>>>,
    pub z_isolated: Vec<Option<f64>>,
    pub u_edges: Vec<Vec<Option<f64>>>,
    pub u_isolated: Vec<Option<f64>>,
    /// Diagonal entries: observed-over-expected same-color edge ratios.
    /// Off-diagonal: cross-color ratios. `None` where the expectation is 0.
    pub ratios: Vec<Vec<Option<f64>>>,
    pub synthetic_index: f64,
    pub positive_sets: Vec<PositiveSetQuery>,
}

/// Which tail bound converts a z-score into a U-value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailBound {
    /// Two-sided bound `z^-2`.
    TwoSided,
    /// One-sided bound `(1 + z^2)^-1`.
    Cantelli,
}

/// U-value arrays for the edge blocks and the isolated counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UValueArrays {
    pub edges: Vec<Vec<Option<f64>>>,
    pub isolated: Vec<Option<f64>>,
}

/// Tallies the observed block edge counts and per-class isolated-node
/// counts in one pass over the adjacency structure.
pub fn block_edge_counts(g: &ColoredGraph) -> EdgeBlockCounts {
    let s = g.num_classes();
    let mut edges = vec![vec![0u64; s]; s];
    let mut isolated = vec![0u64; s];
    for u in 0..g.num_nodes() as u32 {
        let cu = g.color(u) as usize;
        let mut has_same = false;
        for &v in g.neighbors(u) {
            let cv = g.color(v) as usize;
            if cv == cu {
                has_same = true;
            }
            if v > u {
                edges[cu.min(cv)][cu.max(cv)] += 1;
            }
        }
        if !has_same {
            isolated[cu] += 1;
        }
    }
    for i in 0..s {
        for j in i + 1..s {
            edges[j][i] = edges[i][j];
        }
    }
    EdgeBlockCounts { edges, isolated }
}

fn check_profile(g: &ColoredGraph, profile: &ColorProfile) -> Result<(), StatsError> {
    if profile.total() != g.num_nodes() as u64 {
        return Err(StatsError::ProfileMismatch {
            profile_total: profile.total(),
            graph_nodes: g.num_nodes() as u64,
        });
    }
    Ok(())
}

fn check_class(profile: &ColorProfile, i: usize) -> Result<u64, StatsError> {
    profile
        .counts()
        .get(i)
        .copied()
        .ok_or(StatsError::ClassIndexOutOfRange {
            index: i,
            s: profile.num_classes(),
        })
}

/// Probability that a fixed edge lands in block `(i, j)` under the null:
/// `c_i^(2)/n^(2)` on the diagonal, `2 c_i c_j / n^(2)` off it.
fn block_prob(n: u64, c_i: u64, c_j: u64, diagonal: bool) -> f64 {
    if diagonal {
        falling_ratio(c_i, n, 2)
    } else {
        2.0 * two_class_fill_prob(n, c_i, c_j, 1, 1)
    }
}

/// Expected block edge counts: `m` times the per-edge block probability.
///
/// Errors when `n < 2` (a fixed edge needs two distinct endpoints) or when
/// the profile does not total `n`.
pub fn expected_edges(n: u64, m: u64, profile: &ColorProfile) -> Result<Vec<Vec<f64>>, StatsError> {
    if n < 2 {
        return Err(StatsError::TooFewNodes { n });
    }
    if profile.total() != n {
        return Err(StatsError::ProfileMismatch {
            profile_total: profile.total(),
            graph_nodes: n,
        });
    }
    let sizes = profile.counts();
    let s = sizes.len();
    let mf = m as f64;
    let mut out = vec![vec![0.0; s]; s];
    for i in 0..s {
        for j in i..s {
            out[i][j] = mf * block_prob(n, sizes[i], sizes[j], i == j);
            out[j][i] = out[i][j];
        }
    }
    Ok(out)
}

/// Clamps rounding-level negative variances to zero; anything beyond the
/// tolerance is a hard error because the closed forms are nonnegative.
///
/// The tolerance has two parts. The relative part covers ordinary rounding
/// on healthy values. The absolute floor covers exact-zero variances
/// reached by full cancellation: there the residue is rounding dust from
/// the unit-scale intermediates (degree ratios near 1), so it can exceed
/// any multiple of the tiny final terms while never nearing 1e-12.
fn settle_variance(
    stat: impl FnOnce() -> String,
    value: f64,
    scale: f64,
) -> Result<(f64, Option<ClampEvent>), StatsError> {
    if value >= 0.0 {
        Ok((value, None))
    } else if value >= -(1e-6 * scale + 1e-12) {
        let stat = stat();
        Ok((
            0.0,
            Some(ClampEvent {
                stat,
                raw: value,
                scale,
            }),
        ))
    } else {
        Err(StatsError::NegativeVariance {
            stat: stat(),
            value,
            scale,
        })
    }
}

/// Ratio of largest input magnitude to result magnitude: how many leading
/// digits the subtraction destroyed.
fn cancellation(terms: &[f64], result: f64) -> f64 {
    let largest = terms.iter().fold(0.0f64, |a, t| a.max(t.abs()));
    if largest == 0.0 {
        1.0
    } else {
        largest / result.abs().max(f64::MIN_POSITIVE)
    }
}

fn variance_edges_inner(
    n: u64,
    m: u64,
    pi3: u64,
    profile: &ColorProfile,
) -> Result<(Vec<Vec<f64>>, Vec<ClampEvent>, f64), StatsError> {
    if n < 2 {
        return Err(StatsError::TooFewNodes { n });
    }
    if profile.total() != n {
        return Err(StatsError::ProfileMismatch {
            profile_total: profile.total(),
            graph_nodes: n,
        });
    }
    let sizes = profile.counts();
    let s = sizes.len();
    let mut out = vec![vec![0.0; s]; s];
    let mut clamps = Vec::new();
    let mut worst_cancel = 0.0f64;
    // 2 * C(m, 2) = m(m-1); exact in f64 for any edge count this crate
    // will ever see (m < 2^26 keeps the product under 2^53).
    let disjoint_pairs2 = (m as f64) * (m as f64 - 1.0);
    for i in 0..s {
        for j in i..s {
            let diagonal = i == j;
            let (c_i, c_j) = (sizes[i], sizes[j]);
            // Per-edge block probability, wedge coincidence probability a,
            // and disjoint-pair coincidence probability b.
            let (p, a, b) = if diagonal {
                (
                    falling_ratio(c_i, n, 2),
                    falling_ratio(c_i, n, 3),
                    falling_ratio(c_i, n, 4),
                )
            } else {
                (
                    2.0 * two_class_fill_prob(n, c_i, c_j, 1, 1),
                    two_class_fill_prob(n, c_i, c_j, 1, 2)
                        + two_class_fill_prob(n, c_i, c_j, 2, 1),
                    4.0 * two_class_fill_prob(n, c_i, c_j, 2, 2),
                )
            };
            let e = m as f64 * p;
            let terms = [
                e * (1.0 - e),
                2.0 * pi3 as f64 * (a - b),
                disjoint_pairs2 * b,
            ];
            let mut acc = Neumaier::default();
            for t in terms {
                acc.add(t);
            }
            let raw = acc.value();
            let scale = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
            let (v, clamp) = settle_variance(|| format!("edge block ({i},{j})"), raw, scale)?;
            if let Some(c) = clamp {
                clamps.push(c);
            }
            if v > 0.0 {
                worst_cancel = worst_cancel.max(cancellation(&terms, v));
            }
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    Ok((out, clamps, worst_cancel))
}

/// Variances of the block edge counts. `pi3` is the number of two-edge
/// paths (wedges) of the graph; together with `C(m,2)` it determines how
/// many pairs of edges share a node.
///
/// For each block, with per-edge probability `p`, wedge coincidence
/// probability `a`, and disjoint-pair coincidence probability `b`:
/// `var = E(1-E) + 2[pi3 (a - b) + C(m,2) b]` where `E = m p`.
pub fn variance_edges(
    n: u64,
    m: u64,
    pi3: u64,
    profile: &ColorProfile,
) -> Result<Vec<Vec<f64>>, StatsError> {
    variance_edges_inner(n, m, pi3, profile).map(|(v, _, _)| v)
}

/// Expected number of nodes of class `i` with no same-class neighbor:
/// `(c_i/n) * sum_v (n-c_i)^(deg v) / (n-1)^(deg v)`, evaluated once per
/// distinct degree through the degree histogram.
pub fn expected_isolated(
    g: &ColoredGraph,
    profile: &ColorProfile,
    i: usize,
) -> Result<f64, StatsError> {
    check_profile(g, profile)?;
    let c = check_class(profile, i)?;
    let n = g.num_nodes() as u64;
    let hist = g.degree_histogram();
    let mut sum = Neumaier::default();
    for (d, count) in hist.iter() {
        sum.add(count as f64 * falling_ratio(n - c, n - 1, d as u64));
    }
    // c * S / n, in this order: the edgeless case (S = n) stays exactly c.
    Ok(c as f64 * sum.value() / n as f64)
}

/// Incremental table of `(n-c)^(r) / (n-2)^(r)` for `r = 0..=r_max`.
/// Entries with `r > n-c` are zero. Requires `c >= 2`.
fn avoid_ratio_table(n: u64, c: u64, r_max: usize) -> Vec<f64> {
    debug_assert!(c >= 2);
    let a = n - c;
    let den = n - 2;
    let mut table = vec![0.0; r_max + 1];
    table[0] = 1.0;
    let mut acc = 1.0;
    // Stop at r = a: beyond that the falling power is zero, and the
    // denominator n-2-r+1 stays >= 1 because r <= a <= den.
    let top = (a as usize).min(r_max);
    for (r, slot) in table.iter_mut().enumerate().take(top + 1).skip(1) {
        acc *= (a - r as u64 + 1) as f64 / (den - r as u64 + 1) as f64;
        *slot = acc;
    }
    table
}

/// Shared per-graph structure for the fast isolated-count variance: every
/// quantity the per-class pass needs, with color-independent work done
/// once.
struct IsolationContext {
    /// (degree, node count), ascending.
    degree_hist: Vec<(u64, u64)>,
    /// (deg u + deg v, count) over edges uv, ascending.
    adjacent_hist: Vec<(usize, u64)>,
    /// ((union size b, degree sum b'), count) over distance-2 pairs,
    /// ascending.
    dist2_hist: Vec<((usize, usize), u64)>,
    max_degree: u32,
}

impl IsolationContext {
    fn new(g: &ColoredGraph) -> Self {
        let degree_hist: Vec<(u64, u64)> = g
            .degree_histogram()
            .iter()
            .map(|(d, c)| (d as u64, c))
            .collect();
        let mut adjacent: BTreeMap<usize, u64> = BTreeMap::new();
        for (u, v) in g.edges() {
            let key = g.degree(u) as usize + g.degree(v) as usize;
            *adjacent.entry(key).or_insert(0) += 1;
        }
        let mut dist2: BTreeMap<(usize, usize), u64> = BTreeMap::new();
        for (u, v, shared) in g.distance_two_pairs() {
            let bp = g.degree(u) as usize + g.degree(v) as usize;
            let b = bp - shared as usize;
            *dist2.entry((b, bp)).or_insert(0) += 1;
        }
        IsolationContext {
            degree_hist,
            adjacent_hist: adjacent.into_iter().collect(),
            dist2_hist: dist2.into_iter().collect(),
            max_degree: g.max_degree(),
        }
    }

    /// The ordered pair sum `S = sum over ordered non-adjacent distinct
    /// (u,v) of f[b(u,v)]` for class size `c`, assembled from histograms:
    /// start from all ordered pairs scored by degree sums, subtract the
    /// diagonal and the adjacent pairs, then correct the distance-2 pairs
    /// whose neighborhoods overlap.
    fn ordered_pair_sum(&self, n: u64, c: u64) -> f64 {
        let r_max = 2 * self.max_degree as usize;
        let f = avoid_ratio_table(n, c, r_max);
        let mut acc = Neumaier::default();
        for &(d1, h1) in &self.degree_hist {
            for &(d2, h2) in &self.degree_hist {
                acc.add((h1 * h2) as f64 * f[d1 as usize + d2 as usize]);
            }
        }
        for &(d, h) in &self.degree_hist {
            acc.add(-(h as f64) * f[2 * d as usize]);
        }
        for &(key, count) in &self.adjacent_hist {
            acc.add(-2.0 * count as f64 * f[key]);
        }
        for &((b, bp), count) in &self.dist2_hist {
            acc.add(2.0 * count as f64 * (f[b] - f[bp]));
        }
        acc.value()
    }
}

fn variance_isolated_from_sum(
    e: f64,
    pref: f64,
    pair_sum: f64,
    stat: impl FnOnce() -> String,
) -> Result<(f64, Option<ClampEvent>, f64), StatsError> {
    let terms = [e * (1.0 - e), pref * pair_sum];
    let mut acc = Neumaier::default();
    for t in terms {
        acc.add(t);
    }
    let raw = acc.value();
    let scale = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let (v, clamp) = settle_variance(stat, raw, scale)?;
    let cancel = if v > 0.0 { cancellation(&terms, v) } else { 0.0 };
    Ok((v, clamp, cancel))
}

/// Reference implementation of the isolated-count variance:
/// `var = E(1-E) + (c^(2)/n^(2)) * S` with `S` summed directly over all
/// ordered non-adjacent distinct pairs, scoring each by the size of the
/// union of its neighborhoods.
pub fn variance_isolated_naive(
    g: &ColoredGraph,
    profile: &ColorProfile,
    i: usize,
) -> Result<f64, StatsError> {
    let n = g.num_nodes() as u64;
    if n < 2 {
        return Err(StatsError::TooFewNodes { n });
    }
    check_profile(g, profile)?;
    let c = check_class(profile, i)?;
    let e = expected_isolated(g, profile, i)?;
    let (pref, pair_sum) = if c >= 2 {
        let pref = falling_ratio(c, n, 2);
        let r_max = 2 * g.max_degree() as usize;
        let f = avoid_ratio_table(n, c, r_max);
        let mut sum = Neumaier::default();
        for u in 0..g.num_nodes() as u32 {
            for v in u + 1..g.num_nodes() as u32 {
                if g.has_edge(u, v) {
                    continue;
                }
                let b = g.union_neighborhood_size(u, v) as usize;
                // Unordered walk; each pair enters the ordered sum twice.
                sum.add(2.0 * f[b]);
            }
        }
        (pref, sum.value())
    } else {
        (0.0, 0.0)
    };
    variance_isolated_from_sum(e, pref, pair_sum, || format!("isolated count {i}"))
        .map(|(v, _, _)| v)
}

/// Histogram-based isolated-count variance, identical in value to
/// [`variance_isolated_naive`] but with complexity driven by the number of
/// distinct degrees and distance-2 pairs rather than all node pairs.
pub fn variance_isolated_fast(
    g: &ColoredGraph,
    profile: &ColorProfile,
    i: usize,
) -> Result<f64, StatsError> {
    let n = g.num_nodes() as u64;
    if n < 2 {
        return Err(StatsError::TooFewNodes { n });
    }
    check_profile(g, profile)?;
    let c = check_class(profile, i)?;
    let e = expected_isolated(g, profile, i)?;
    let (pref, pair_sum) = if c >= 2 {
        let ctx = IsolationContext::new(g);
        (falling_ratio(c, n, 2), ctx.ordered_pair_sum(n, c))
    } else {
        (0.0, 0.0)
    };
    variance_isolated_from_sum(e, pref, pair_sum, || format!("isolated count {i}"))
        .map(|(v, _, _)| v)
}

/// Computes the full moment table for a graph under a profile: expected
/// and variance matrices for the edge blocks, expected and variance
/// vectors for the isolated counts (fast path), with per-class work run in
/// parallel and summation order fixed within each class.
///
/// ```
/// use homophily::graph::ColoredGraph;
/// use homophily::stats::moment_table;
///
/// let g = ColoredGraph::from_indexed(&[(0, 1), (1, 2)], vec![0, 0, 1]).unwrap();
/// let table = moment_table(&g, &g.profile()).unwrap();
/// assert!((table.mean_edges[0][0] - 2.0 / 3.0).abs() < 1e-12);
/// assert!((table.var_isolated[0] - 8.0 / 9.0).abs() < 1e-12);
/// ```
pub fn moment_table(g: &ColoredGraph, profile: &ColorProfile) -> Result<MomentTable, StatsError> {
    let n = g.num_nodes() as u64;
    check_profile(g, profile)?;
    let m = g.num_edges();
    let pi3 = g.wedge_count();
    let mean_edges = expected_edges(n, m, profile)?;
    let (var_edges, mut clamps, mut worst_cancel) = variance_edges_inner(n, m, pi3, profile)?;

    let ctx = IsolationContext::new(g);
    let sizes = profile.counts();
    let per_class: Vec<Result<(f64, f64, Option<ClampEvent>, f64), StatsError>> = (0..sizes
        .len())
        .into_par_iter()
        .map(|i| {
            let c = sizes[i];
            let e = expected_isolated(g, profile, i)?;
            let (pref, pair_sum) = if c >= 2 {
                (falling_ratio(c, n, 2), ctx.ordered_pair_sum(n, c))
            } else {
                (0.0, 0.0)
            };
            let (v, clamp, cancel) =
                variance_isolated_from_sum(e, pref, pair_sum, || format!("isolated count {i}"))?;
            Ok((e, v, clamp, cancel))
        })
        .collect();

    let mut mean_isolated = Vec::with_capacity(sizes.len());
    let mut var_isolated = Vec::with_capacity(sizes.len());
    for entry in per_class {
        let (e, v, clamp, cancel) = entry?;
        mean_isolated.push(e);
        var_isolated.push(v);
        if let Some(c) = clamp {
            clamps.push(c);
        }
        worst_cancel = worst_cancel.max(cancel);
    }

    Ok(MomentTable {
        mean_edges,
        var_edges,
        mean_isolated,
        var_isolated,
        diagnostics: MomentDiagnostics {
            clamped: clamps,
            max_cancellation: worst_cancel,
        },
    })
}

fn standardize(observed: f64, mean: f64, variance: f64) -> Option<f64> {
    if variance > 0.0 {
        Some((observed - mean) / variance.sqrt())
    } else {
        None
    }
}

/// The edge-side pipeline in one call: observed block counts, expected
/// counts, variances, and standardized scores. Runs in O(n + m + s^2);
/// this is the unit the throughput benchmark times.
pub fn edge_zscores(
    g: &ColoredGraph,
    profile: &ColorProfile,
) -> Result<Vec<Vec<Option<f64>>>, StatsError> {
    let n = g.num_nodes() as u64;
    let m = g.num_edges();
    let counts = block_edge_counts(g);
    let mean = expected_edges(n, m, profile)?;
    let var = variance_edges(n, m, g.wedge_count(), profile)?;
    let s = profile.num_classes();
    let mut z = vec![vec![None; s]; s];
    for i in 0..s {
        for j in 0..s {
            z[i][j] = standardize(counts.edges[i][j] as f64, mean[i][j], var[i][j]);
        }
    }
    Ok(z)
}

/// Observed-over-expected mixing ratios: same-class density ratios on the
/// diagonal, cross-class on the off-diagonal. `None` where the
/// expectation is zero.
pub fn homophily_ratios(counts: &EdgeBlockCounts, moments: &MomentTable) -> Vec<Vec<Option<f64>>> {
    let s = counts.isolated.len();
    let mut out = vec![vec![None; s]; s];
    for i in 0..s {
        for j in 0..s {
            let mean = moments.mean_edges[i][j];
            if mean > 0.0 {
                out[i][j] = Some(counts.edges[i][j] as f64 / mean);
            }
        }
    }
    out
}

/// Converts defined z-scores into U-values under the chosen tail bound,
/// truncating at 1 (larger bounds are vacuous).
pub fn u_values(report: &HomophilyReport, bound: TailBound) -> UValueArrays {
    let u = |z: f64| -> f64 {
        let v = match bound {
            TailBound::TwoSided => 1.0 / (z * z),
            TailBound::Cantelli => 1.0 / (1.0 + z * z),
        };
        v.min(1.0)
    };
    UValueArrays {
        edges: report
            .z_edges
            .iter()
            .map(|row| row.iter().map(|z| z.map(u)).collect())
            .collect(),
        isolated: report.z_isolated.iter().map(|z| z.map(u)).collect(),
    }
}

/// Global homophily index `max{0, 1 - s_eff / ||diag Z||^2}` over the
/// defined diagonal z-scores; 0 when none are defined.
pub fn synthetic_index(report: &HomophilyReport) -> f64 {
    let mut norm2 = 0.0;
    let mut s_eff = 0usize;
    for (i, row) in report.z_edges.iter().enumerate() {
        if let Some(z) = row[i] {
            norm2 += z * z;
            s_eff += 1;
        }
    }
    if s_eff == 0 || norm2 == 0.0 {
        return 0.0;
    }
    (1.0 - s_eff as f64 / norm2).max(0.0)
}

/// Standardizes the observed counts against the moment table and fills in
/// ratios, default two-sided U-values, and the synthetic index. Joint
/// queries start empty; see [`positive_set`].
///
/// ```
/// use homophily::graph::ColoredGraph;
/// use homophily::stats::{block_edge_counts, moment_table, zscore_arrays};
///
/// let g = ColoredGraph::from_indexed(&[(0, 1), (1, 2)], vec![0, 0, 1]).unwrap();
/// let table = moment_table(&g, &g.profile()).unwrap();
/// let report = zscore_arrays(&block_edge_counts(&g), &table);
///
/// // One intra-class edge observed against a mean of 2/3 and variance 2/9.
/// let z = report.z_edges[0][0].unwrap();
/// assert!((z - 0.5_f64.sqrt()).abs() < 1e-12);
/// // The singleton class supports no intra edges: undefined, not NaN.
/// assert!(report.z_edges[1][1].is_none());
/// ```
pub fn zscore_arrays(counts: &EdgeBlockCounts, moments: &MomentTable) -> HomophilyReport {
    let s = counts.isolated.len();
    let mut z_edges = vec![vec![None; s]; s];
    for i in 0..s {
        for j in 0..s {
            z_edges[i][j] = standardize(
                counts.edges[i][j] as f64,
                moments.mean_edges[i][j],
                moments.var_edges[i][j],
            );
        }
    }
    let z_isolated: Vec<Option<f64>> = (0..s)
        .map(|i| {
            standardize(
                counts.isolated[i] as f64,
                moments.mean_isolated[i],
                moments.var_isolated[i],
            )
        })
        .collect();
    let mut report = HomophilyReport {
        z_edges,
        z_isolated,
        u_edges: Vec::new(),
        u_isolated: Vec::new(),
        ratios: homophily_ratios(counts, moments),
        synthetic_index: 0.0,
        positive_sets: Vec::new(),
    };
    let u = u_values(&report, TailBound::TwoSided);
    report.u_edges = u.edges;
    report.u_isolated = u.isolated;
    report.synthetic_index = synthetic_index(&report);
    report
}

/// Largest subset of the candidate pairs `q` whose summed `z^-2` stays
/// within `alpha`, found greedily in ascending `z^-2` order (optimal for
/// unit-profit budget selection). Pairs with undefined or non-positive
/// z-scores are never selected. Pairs are normalized to `i <= j`.
pub fn positive_set(
    report: &HomophilyReport,
    q: &[(usize, usize)],
    alpha: f64,
) -> PositiveSetQuery {
    let s = report.z_isolated.len();
    let mut candidates: Vec<((usize, usize), f64)> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for &(a, b) in q {
        let (i, j) = (a.min(b), a.max(b));
        if !seen.insert((i, j)) {
            continue;
        }
        if let Some(z) = report.z_edges[i][j] {
            if z > 0.0 {
                candidates.push(((i, j), 1.0 / (z * z)));
            }
        }
    }
    // Ascending cost; index order breaks ties deterministically.
    candidates.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)));
    let mut members = Vec::new();
    let mut level = 0.0;
    for (pair, cost) in candidates {
        if level + cost <= alpha {
            level += cost;
            members.push(pair);
        } else {
            break;
        }
    }
    PositiveSetQuery {
        alpha,
        count: members.len(),
        members,
        attained_level: level,
        bonferroni_diagonal_threshold: s as f64 / alpha.sqrt(),
    }
}

/// All upper-triangle pairs `(i, j)` with a defined z-score above
/// `lambda`: the level sets that tie joint significance queries to the
/// heat map.
pub fn j_lambda(report: &HomophilyReport, lambda: f64) -> Vec<(usize, usize)> {
    let s = report.z_isolated.len();
    let mut out = Vec::new();
    for i in 0..s {
        for j in i..s {
            if let Some(z) = report.z_edges[i][j] {
                if z > lambda {
                    out.push((i, j));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ColoredGraph;
    use crate::oracle::enumerate_moments;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn path3() -> ColoredGraph {
        ColoredGraph::from_indexed(&[(0, 1), (1, 2)], vec![0, 0, 1]).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()) || (a - b).abs() <= 1e-12
    }

    /// Uniform random graph with n nodes, m distinct edges, colors cycled
    /// through s classes.
    fn random_graph(rng: &mut StdRng, n: u32, m: usize, s: u32) -> ColoredGraph {
        let mut edges = std::collections::BTreeSet::new();
        while edges.len() < m {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if u != v {
                edges.insert((u.min(v), u.max(v)));
            }
        }
        let edges: Vec<(u32, u32)> = edges.into_iter().collect();
        let colors: Vec<u32> = (0..n).map(|v| v % s).collect();
        ColoredGraph::from_indexed(&edges, colors).unwrap()
    }

    #[test]
    fn path_fixture_moments_are_exact() {
        let g = path3();
        let p = g.profile();
        let mean = expected_edges(3, 2, &p).unwrap();
        assert!(close(mean[0][0], 2.0 / 3.0, 1e-12));
        assert!(close(mean[0][1], 4.0 / 3.0, 1e-12));
        assert!(close(mean[1][1], 0.0, 1e-12));
        let var = variance_edges(3, 2, g.wedge_count(), &p).unwrap();
        assert!(close(var[0][0], 2.0 / 9.0, 1e-12));
        assert!(close(var[0][1], 2.0 / 9.0, 1e-12));
        assert!(close(var[1][1], 0.0, 1e-12));
        assert!(close(expected_isolated(&g, &p, 0).unwrap(), 2.0 / 3.0, 1e-12));
        assert!(close(expected_isolated(&g, &p, 1).unwrap(), 1.0, 1e-12));
        assert!(close(
            variance_isolated_naive(&g, &p, 0).unwrap(),
            8.0 / 9.0,
            1e-12
        ));
        assert!(close(
            variance_isolated_fast(&g, &p, 0).unwrap(),
            8.0 / 9.0,
            1e-12
        ));
        assert!(close(variance_isolated_naive(&g, &p, 1).unwrap(), 0.0, 1e-12));
        assert!(close(variance_isolated_fast(&g, &p, 1).unwrap(), 0.0, 1e-12));
    }

    #[test]
    fn path_fixture_report_values() {
        let g = path3();
        let counts = block_edge_counts(&g);
        assert_eq!(counts.edges[0][0], 1);
        assert_eq!(counts.edges[0][1], 1);
        assert_eq!(counts.edges[1][1], 0);
        assert_eq!(counts.isolated, vec![0, 1]);
        let moments = moment_table(&g, &g.profile()).unwrap();
        let report = zscore_arrays(&counts, &moments);
        // (1 - 2/3) / sqrt(2/9) reduces to exactly 1/sqrt(2).
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(report.z_edges[0][0].unwrap(), inv_sqrt2, 1e-12));
        assert!(close(report.z_edges[0][1].unwrap(), -inv_sqrt2, 1e-12));
        assert_eq!(report.z_edges[1][1], None);
        assert!(close(report.z_isolated[0].unwrap(), -inv_sqrt2, 1e-12));
        assert_eq!(report.z_isolated[1], None);
        assert!(close(report.ratios[0][0].unwrap(), 1.5, 1e-12));
        assert!(close(report.ratios[0][1].unwrap(), 0.75, 1e-12));
        assert_eq!(report.ratios[1][1], None);
        // One defined diagonal z with z^2 = 1/2 < 1: index clamps to 0.
        assert_eq!(report.synthetic_index, 0.0);
        // U-value of z = 1/sqrt(2) is 2, truncated to 1.
        assert_eq!(report.u_edges[0][0], Some(1.0));
    }

    #[test]
    fn block_counts_spec_examples() {
        // Alternating path: both edges cross classes, both end nodes are
        // same-class-isolated.
        let g = ColoredGraph::from_indexed(&[(0, 1), (1, 2)], vec![0, 1, 0]).unwrap();
        let counts = block_edge_counts(&g);
        assert_eq!(counts.edges[0][1], 2);
        assert_eq!(counts.edges[0][0], 0);
        assert_eq!(counts.isolated[0], 2);
        assert_eq!(counts.isolated[1], 1);

        // Single class: every edge is same-class; no node with a neighbor
        // is isolated.
        let g = ColoredGraph::from_indexed(&[(0, 1), (1, 2), (0, 2)], vec![0, 0, 0]).unwrap();
        let counts = block_edge_counts(&g);
        assert_eq!(counts.edges[0][0], 3);
        assert_eq!(counts.isolated[0], 0);
    }

    #[test]
    fn expected_edges_degenerate_classes() {
        // Whole-graph class: every edge lands on the diagonal surely.
        let p = ColorProfile::from_counts(vec![5]).unwrap();
        let mean = expected_edges(5, 7, &p).unwrap();
        assert_eq!(mean[0][0], 7.0);
        // Singleton class: no same-class edge can exist.
        let p = ColorProfile::from_counts(vec![1, 4]).unwrap();
        let mean = expected_edges(5, 7, &p).unwrap();
        assert_eq!(mean[0][0], 0.0);
    }

    #[test]
    fn expected_edges_rejects_tiny_graphs_and_mismatched_profiles() {
        let p = ColorProfile::from_counts(vec![1]).unwrap();
        assert!(matches!(
            expected_edges(1, 0, &p),
            Err(StatsError::TooFewNodes { n: 1 })
        ));
        let p = ColorProfile::from_counts(vec![2, 2]).unwrap();
        assert!(matches!(
            expected_edges(5, 3, &p),
            Err(StatsError::ProfileMismatch { .. })
        ));
    }

    #[test]
    fn expected_edges_conserve_total() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..40 {
            let n = rng.gen_range(2..60u64);
            let m = rng.gen_range(0..200u64);
            // Random composition of n into at most 4 parts.
            let mut left = n;
            let mut parts = Vec::new();
            for _ in 0..3 {
                if left == 0 {
                    break;
                }
                let take = rng.gen_range(1..=left);
                parts.push(take);
                left -= take;
            }
            if left > 0 {
                parts.push(left);
            }
            let p = ColorProfile::from_counts(parts).unwrap();
            let mean = expected_edges(n, m, &p).unwrap();
            let s = p.num_classes();
            let mut total = Neumaier::default();
            for i in 0..s {
                for j in i..s {
                    total.add(mean[i][j]);
                }
            }
            assert!(
                close(total.value(), m as f64, 1e-9 * m as f64 + 1e-12),
                "n={n} m={m}: total {}",
                total.value()
            );
        }
    }

    #[test]
    fn whole_graph_class_variance_is_exactly_zero() {
        for (n, m, pi3) in [(4u64, 3u64, 2u64), (6, 9, 12), (3, 2, 1)] {
            let p = ColorProfile::from_counts(vec![n]).unwrap();
            let var = variance_edges(n, m, pi3, &p).unwrap();
            assert_eq!(var[0][0], 0.0);
        }
    }

    #[test]
    fn moments_match_enumeration_on_small_graphs() {
        let graphs = vec![
            // Path of four nodes, two balanced classes.
            ColoredGraph::from_indexed(&[(0, 1), (1, 2), (2, 3)], vec![0, 0, 1, 1]).unwrap(),
            // Star with mixed classes.
            ColoredGraph::from_indexed(&[(0, 1), (0, 2), (0, 3), (0, 4)], vec![0, 0, 0, 1, 1])
                .unwrap(),
            // Triangle with a pendant, three classes.
            ColoredGraph::from_indexed(&[(0, 1), (1, 2), (0, 2), (2, 3)], vec![0, 1, 2, 0])
                .unwrap(),
            // Two disjoint edges.
            ColoredGraph::from_indexed(&[(0, 1), (2, 3)], vec![0, 1, 0, 1]).unwrap(),
        ];
        for g in graphs {
            let p = g.profile();
            let want = enumerate_moments(&g, &g.profile()).unwrap();
            let table = moment_table(&g, &p).unwrap();
            let s = g.num_classes();
            for i in 0..s {
                for j in 0..s {
                    assert!(
                        rel_close(table.mean_edges[i][j], want.mean_edges[i][j], 1e-12),
                        "mean edges ({i},{j})"
                    );
                    assert!(
                        rel_close(table.var_edges[i][j], want.var_edges[i][j], 1e-12),
                        "var edges ({i},{j})"
                    );
                }
                assert!(
                    rel_close(table.mean_isolated[i], want.mean_isolated[i], 1e-12),
                    "mean isolated {i}"
                );
                assert!(
                    rel_close(table.var_isolated[i], want.var_isolated[i], 1e-12),
                    "var isolated {i}"
                );
                let naive = variance_isolated_naive(&g, &p, i).unwrap();
                assert!(
                    rel_close(naive, want.var_isolated[i], 1e-12),
                    "naive var isolated {i}"
                );
            }
        }
    }

    #[test]
    fn edge_zscore_pipeline_agrees_with_full_report() {
        let g = crate::synth::random_graph(&crate::synth::SynthParams {
            nodes: 60,
            edges: 150,
            classes: 4,
            seed: 21,
        })
        .unwrap();
        let profile = g.profile();
        let fast = edge_zscores(&g, &profile).unwrap();
        let counts = block_edge_counts(&g);
        let moments = moment_table(&g, &profile).unwrap();
        let report = zscore_arrays(&counts, &moments);
        assert_eq!(fast, report.z_edges);
    }

    #[test]
    fn moments_under_hypothetical_profiles_match_enumeration() {
        // The null model only needs the topology and a profile; the
        // graph's own coloring is irrelevant to the moments.
        let g = ColoredGraph::from_indexed(&[(0, 1), (1, 2), (2, 3), (3, 0)], vec![0, 0, 0, 1])
            .unwrap();
        for counts in [vec![2u64, 2], vec![1, 3], vec![1, 1, 2]] {
            let p = ColorProfile::from_counts(counts).unwrap();
            let want = enumerate_moments(&g, &p).unwrap();
            let table = moment_table(&g, &p).unwrap();
            for i in 0..p.num_classes() {
                for j in 0..p.num_classes() {
                    assert!(rel_close(table.mean_edges[i][j], want.mean_edges[i][j], 1e-12));
                    assert!(rel_close(table.var_edges[i][j], want.var_edges[i][j], 1e-12));
                }
                assert!(rel_close(table.mean_isolated[i], want.mean_isolated[i], 1e-12));
                assert!(rel_close(table.var_isolated[i], want.var_isolated[i], 1e-12));
            }
        }
    }

    #[test]
    fn fast_equals_naive_on_random_graphs() {
        let mut rng = StdRng::seed_from_u64(23);
        for round in 0..50 {
            let n = rng.gen_range(4..40u32);
            let max_m = (n as usize * (n as usize - 1)) / 2;
            let m = rng.gen_range(0..=max_m.min(120));
            let s = rng.gen_range(1..=3u32).min(n);
            let g = random_graph(&mut rng, n, m, s);
            let p = g.profile();
            for i in 0..g.num_classes() {
                let naive = variance_isolated_naive(&g, &p, i).unwrap();
                let fast = variance_isolated_fast(&g, &p, i).unwrap();
                assert!(
                    rel_close(fast, naive, 1e-11),
                    "round {round} class {i}: fast {fast} vs naive {naive}"
                );
            }
        }
    }

    #[test]
    fn complete_graph_variance_has_no_pair_term() {
        // No non-adjacent pairs: the pair sum vanishes and both paths
        // reduce to E(1-E).
        let n = 6u32;
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        let colors: Vec<u32> = (0..n).map(|v| v % 2).collect();
        let g = ColoredGraph::from_indexed(&edges, colors).unwrap();
        let p = g.profile();
        for i in 0..2 {
            let e = expected_isolated(&g, &p, i).unwrap();
            let want = e * (1.0 - e);
            assert_eq!(variance_isolated_naive(&g, &p, i).unwrap(), want);
            assert!(rel_close(
                variance_isolated_fast(&g, &p, i).unwrap(),
                want,
                1e-12
            ));
        }
    }

    #[test]
    fn two_disjoint_edges_have_no_distance_two_correction() {
        let g = ColoredGraph::from_indexed(&[(0, 1), (2, 3)], vec![0, 0, 1, 1]).unwrap();
        assert_eq!(g.distance_two_pairs().count(), 0);
        let p = g.profile();
        for i in 0..2 {
            let naive = variance_isolated_naive(&g, &p, i).unwrap();
            let fast = variance_isolated_fast(&g, &p, i).unwrap();
            assert!(rel_close(fast, naive, 1e-12));
        }
    }

    #[test]
    fn star_fixture_all_three_paths_agree() {
        // Star on five nodes, hub class of three.
        let g = ColoredGraph::from_indexed(&[(0, 1), (0, 2), (0, 3), (0, 4)], vec![0, 0, 0, 1, 1])
            .unwrap();
        let p = g.profile();
        let want = enumerate_moments(&g, &g.profile()).unwrap();
        for i in 0..2 {
            let naive = variance_isolated_naive(&g, &p, i).unwrap();
            let fast = variance_isolated_fast(&g, &p, i).unwrap();
            assert!(rel_close(naive, want.var_isolated[i], 1e-12));
            assert!(rel_close(fast, naive, 1e-12));
        }
    }

    #[test]
    fn isolated_checks_reject_bad_inputs() {
        let g = path3();
        let p = g.profile();
        assert!(matches!(
            expected_isolated(&g, &p, 5),
            Err(StatsError::ClassIndexOutOfRange { index: 5, s: 2 })
        ));
        let wrong = ColorProfile::from_counts(vec![4]).unwrap();
        assert!(matches!(
            expected_isolated(&g, &wrong, 0),
            Err(StatsError::ProfileMismatch { .. })
        ));
        let single = ColoredGraph::from_indexed(&[], vec![0]).unwrap();
        assert!(matches!(
            variance_isolated_naive(&single, &single.profile(), 0),
            Err(StatsError::TooFewNodes { n: 1 })
        ));
    }

    #[test]
    fn edgeless_graph_expected_isolated_is_class_size_exactly() {
        let g = ColoredGraph::from_indexed(&[], vec![0, 0, 0, 1, 1, 2]).unwrap();
        let p = g.profile();
        assert_eq!(expected_isolated(&g, &p, 0).unwrap(), 3.0);
        assert_eq!(expected_isolated(&g, &p, 1).unwrap(), 2.0);
        assert_eq!(expected_isolated(&g, &p, 2).unwrap(), 1.0);
        // The whole-graph class on an edgeless graph is deterministic.
        let g = ColoredGraph::from_indexed(&[], vec![0, 0, 0, 0]).unwrap();
        let p = g.profile();
        assert_eq!(variance_isolated_fast(&g, &p, 0).unwrap(), 0.0);
    }

    #[test]
    fn u_value_examples() {
        let g = path3();
        let counts = block_edge_counts(&g);
        let moments = moment_table(&g, &g.profile()).unwrap();
        let mut report = zscore_arrays(&counts, &moments);
        report.z_edges[0][0] = Some(2.0);
        report.z_edges[0][1] = Some(0.0);
        let two_sided = u_values(&report, TailBound::TwoSided);
        assert_eq!(two_sided.edges[0][0], Some(0.25));
        assert_eq!(two_sided.edges[0][1], Some(1.0));
        assert_eq!(two_sided.edges[1][1], None);
        let cantelli = u_values(&report, TailBound::Cantelli);
        assert!(close(cantelli.edges[0][0].unwrap(), 0.2, 1e-15));
        assert_eq!(cantelli.edges[0][1], Some(1.0));
    }

    #[test]
    fn cantelli_no_looser_than_two_sided_beyond_one() {
        let g = path3();
        let counts = block_edge_counts(&g);
        let moments = moment_table(&g, &g.profile()).unwrap();
        let mut report = zscore_arrays(&counts, &moments);
        for z in [1.0, 1.5, 2.0, 5.0, 30.0] {
            report.z_edges[0][0] = Some(z);
            let two = u_values(&report, TailBound::TwoSided).edges[0][0].unwrap();
            let one = u_values(&report, TailBound::Cantelli).edges[0][0].unwrap();
            assert!(one <= two, "z={z}");
            assert!(one > 0.0 && two > 0.0);
        }
    }

    #[test]
    fn positive_set_budget_selection() {
        let g = path3();
        let counts = block_edge_counts(&g);
        let moments = moment_table(&g, &g.profile()).unwrap();
        let mut report = zscore_arrays(&counts, &moments);
        // z = 10 costs 0.01, z = 2 costs 0.25.
        report.z_edges[0][0] = Some(10.0);
        report.z_edges[0][1] = Some(2.0);
        report.z_edges[1][0] = Some(2.0);
        report.z_edges[1][1] = None;
        let q = [(0, 0), (0, 1), (1, 1)];
        let res = positive_set(&report, &q, 0.05);
        assert_eq!(res.members, vec![(0, 0)]);
        assert_eq!(res.count, 1);
        assert!(close(res.attained_level, 0.01, 1e-15));
        // Budget 1 takes both defined positive entries.
        let res = positive_set(&report, &q, 1.0);
        assert_eq!(res.members, vec![(0, 0), (0, 1)]);
        assert!(close(res.attained_level, 0.26, 1e-12));
        // Negative or undefined entries never qualify.
        report.z_edges[0][0] = Some(-10.0);
        let res = positive_set(&report, &q, 1.0);
        assert_eq!(res.members, vec![(0, 1)]);
        // Bonferroni threshold for joint diagonal testing at this alpha.
        assert!(close(
            res.bonferroni_diagonal_threshold,
            2.0 / 1.0f64.sqrt(),
            1e-15
        ));
    }

    #[test]
    fn j_lambda_thresholds_the_upper_triangle() {
        let g = path3();
        let counts = block_edge_counts(&g);
        let moments = moment_table(&g, &g.profile()).unwrap();
        let mut report = zscore_arrays(&counts, &moments);
        report.z_edges[0][0] = Some(3.0);
        report.z_edges[0][1] = Some(1.0);
        report.z_edges[1][1] = None;
        assert_eq!(j_lambda(&report, 2.0), vec![(0, 0)]);
        assert_eq!(j_lambda(&report, 0.5), vec![(0, 0), (0, 1)]);
        assert_eq!(j_lambda(&report, 5.0), Vec::<(usize, usize)>::new());
    }

    #[test]
    fn synthetic_index_examples() {
        let g = path3();
        let counts = block_edge_counts(&g);
        let moments = moment_table(&g, &g.profile()).unwrap();
        let mut report = zscore_arrays(&counts, &moments);
        report.z_edges[0][0] = Some(0.0);
        report.z_edges[1][1] = Some(0.0);
        assert_eq!(synthetic_index(&report), 0.0);
        report.z_edges[0][0] = Some(10.0);
        report.z_edges[1][1] = None;
        assert!(close(synthetic_index(&report), 0.99, 1e-12));
        report.z_edges[0][0] = Some(1.0);
        assert_eq!(synthetic_index(&report), 0.0);
        report.z_edges[0][0] = None;
        assert_eq!(synthetic_index(&report), 0.0);
    }

    #[test]
    fn zscores_invariant_under_node_relabeling() {
        let mut rng = StdRng::seed_from_u64(99);
        let g = random_graph(&mut rng, 12, 20, 3);
        let counts = block_edge_counts(&g);
        let moments = moment_table(&g, &g.profile()).unwrap();
        let base = zscore_arrays(&counts, &moments);

        // Relabel nodes by reversal; colors follow their nodes.
        let n = g.num_nodes() as u32;
        let perm = |v: u32| n - 1 - v;
        let edges: Vec<(u32, u32)> = g.edges().map(|(u, v)| (perm(u), perm(v))).collect();
        let mut colors = vec![0u32; n as usize];
        for v in 0..n {
            colors[perm(v) as usize] = g.color(v);
        }
        let h = ColoredGraph::from_indexed(&edges, colors).unwrap();
        let counts_h = block_edge_counts(&h);
        let moments_h = moment_table(&h, &h.profile()).unwrap();
        let relabeled = zscore_arrays(&counts_h, &moments_h);

        for i in 0..3 {
            for j in 0..3 {
                match (base.z_edges[i][j], relabeled.z_edges[i][j]) {
                    (Some(a), Some(b)) => assert!(rel_close(a, b, 1e-12)),
                    (a, b) => assert_eq!(a, b),
                }
            }
            match (base.z_isolated[i], relabeled.z_isolated[i]) {
                (Some(a), Some(b)) => assert!(rel_close(a, b, 1e-12)),
                (a, b) => assert_eq!(a, b),
            }
        }
    }

    #[test]
    fn moment_table_matches_individual_operations() {
        let mut rng = StdRng::seed_from_u64(7);
        let g = random_graph(&mut rng, 15, 30, 3);
        let p = g.profile();
        let table = moment_table(&g, &p).unwrap();
        let mean = expected_edges(g.num_nodes() as u64, g.num_edges(), &p).unwrap();
        let var = variance_edges(g.num_nodes() as u64, g.num_edges(), g.wedge_count(), &p)
            .unwrap();
        assert_eq!(table.mean_edges, mean);
        assert_eq!(table.var_edges, var);
        for i in 0..3 {
            assert_eq!(table.mean_isolated[i], expected_isolated(&g, &p, i).unwrap());
            assert_eq!(
                table.var_isolated[i],
                variance_isolated_fast(&g, &p, i).unwrap()
            );
        }
    }
}
