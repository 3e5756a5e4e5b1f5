//! Ground-truth moments of the random-coloring null model.
//!
//! Two independent routes to the same quantities the closed forms predict:
//! exhaustive enumeration of every coloring with the graph's class sizes
//! (exact, guarded by a budget), and seeded Monte Carlo over uniform
//! shuffles of the color word. Both accumulate raw power sums in exact
//! integer arithmetic and round once at the end, so results are
//! bit-reproducible regardless of thread count.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::combinatorics::log_multinomial;
use crate::graph::{ColorId, ColorProfile, ColoredGraph};
use crate::tri_index;

/// Most colorings `enumerate_moments` will walk before refusing.
pub const ENUMERATION_BUDGET: u64 = 10_000_000;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error(
        "coloring space holds exp({log_colorings:.2}) colorings, over the \
         enumeration budget of {budget}; use sampled mode instead"
    )]
    BudgetExceeded { log_colorings: f64, budget: u64 },
    #[error("sampling needs at least 2 samples, got {got}")]
    TooFewSamples { got: u64 },
    #[error("profile totals {profile_total} nodes but the graph has {graph_nodes}")]
    ProfileMismatch { profile_total: u64, graph_nodes: u64 },
}

/// Null-model moments of the block edge counts and the per-class isolated
/// node counts, with matrices mirrored to full `s x s` form.
#[derive(Clone, Debug, PartialEq)]
pub struct NullSampleSummary {
    pub mean_edges: Vec<Vec<f64>>,
    pub var_edges: Vec<Vec<f64>>,
    pub mean_isolated: Vec<f64>,
    pub var_isolated: Vec<f64>,
    pub mode: SummaryMode,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SummaryMode {
    /// Every coloring visited once; variances are population variances and
    /// exact up to final rounding.
    Exact { colorings: u64 },
    /// Monte Carlo estimates with unbiased variances and standard errors.
    Sampled {
        samples: u64,
        se_mean_edges: Vec<Vec<f64>>,
        se_var_edges: Vec<Vec<f64>>,
        se_mean_isolated: Vec<f64>,
        se_var_isolated: Vec<f64>,
    },
}

/// Raw power sums per statistic, exact in wide integers. Merging two
/// accumulators is elementwise addition, so any chunking of the sample
/// stream yields identical totals.
struct RawMoments {
    count: u64,
    s1: Vec<u128>,
    s2: Vec<u128>,
    s3: Vec<u128>,
    s4: Vec<u128>,
}

impl RawMoments {
    fn new(len: usize) -> Self {
        RawMoments {
            count: 0,
            s1: vec![0; len],
            s2: vec![0; len],
            s3: vec![0; len],
            s4: vec![0; len],
        }
    }

    fn add(&mut self, values: &[u64]) {
        self.count += 1;
        for (i, &v) in values.iter().enumerate() {
            let v = v as u128;
            let v2 = v * v;
            self.s1[i] += v;
            self.s2[i] += v2;
            self.s3[i] += v2 * v;
            self.s4[i] += v2 * v2;
        }
    }

    fn merge(mut self, other: RawMoments) -> RawMoments {
        self.count += other.count;
        for (a, b) in self.s1.iter_mut().zip(&other.s1) {
            *a += b;
        }
        for (a, b) in self.s2.iter_mut().zip(&other.s2) {
            *a += b;
        }
        for (a, b) in self.s3.iter_mut().zip(&other.s3) {
            *a += b;
        }
        for (a, b) in self.s4.iter_mut().zip(&other.s4) {
            *a += b;
        }
        self
    }

    fn mean(&self, i: usize) -> f64 {
        self.s1[i] as f64 / self.count as f64
    }

    /// Population variance `(N*S2 - S1^2) / N^2`, numerator exact.
    fn population_variance(&self, i: usize) -> f64 {
        let n = self.count as u128;
        let num = n * self.s2[i] - self.s1[i] * self.s1[i];
        num as f64 / (self.count as f64 * self.count as f64)
    }

    /// Unbiased sample variance `(N*S2 - S1^2) / (N(N-1))`.
    fn sample_variance(&self, i: usize) -> f64 {
        let n = self.count as u128;
        let num = n * self.s2[i] - self.s1[i] * self.s1[i];
        num as f64 / (self.count as f64 * (self.count - 1) as f64)
    }

    /// Fourth central moment, exact via big integers:
    /// `sum (x - mean)^4 / N = (N^4 S4 - 4 N^3 S1 S3 + 6 N^2 S1^2 S2 - 3 N S1^4) / N^5`.
    fn fourth_central(&self, i: usize) -> f64 {
        let n = BigInt::from(self.count);
        let s1 = BigInt::from(self.s1[i]);
        let s2 = BigInt::from(self.s2[i]);
        let s3 = BigInt::from(self.s3[i]);
        let s4 = BigInt::from(self.s4[i]);
        let t: BigInt = n.pow(4) * s4 - 4 * n.pow(3) * &s1 * s3
            + 6 * n.pow(2) * &s1 * &s1 * s2
            - 3 * &n * s1.pow(4);
        let t = t.to_f64().expect("finite fourth-moment numerator");
        t / (self.count as f64).powi(5)
    }

    /// Standard error of the sample mean.
    fn se_mean(&self, i: usize) -> f64 {
        (self.sample_variance(i) / self.count as f64).sqrt()
    }

    /// Standard error of the unbiased sample variance,
    /// `sqrt((mu4 - s^4 (N-3)/(N-1)) / N)`.
    fn se_variance(&self, i: usize) -> f64 {
        let n = self.count as f64;
        let s2 = self.sample_variance(i);
        let mu4 = self.fourth_central(i);
        ((mu4 - s2 * s2 * (n - 3.0) / (n - 1.0)) / n).max(0.0).sqrt()
    }
}

/// Counts the per-block edge statistics and per-class isolated-node counts
/// of one coloring `word`, writing into flat upper-triangle + vector buffers.
fn tally(g: &ColoredGraph, word: &[ColorId], edge_buf: &mut [u64], iso_buf: &mut [u64]) {
    edge_buf.fill(0);
    iso_buf.fill(0);
    let s = iso_buf.len();
    for u in 0..g.num_nodes() as u32 {
        let cu = word[u as usize];
        let mut isolated = true;
        for &v in g.neighbors(u) {
            let cv = word[v as usize];
            if cv == cu {
                isolated = false;
            }
            if v > u {
                let (i, j) = (cu.min(cv) as usize, cu.max(cv) as usize);
                edge_buf[tri_index(s, i, j)] += 1;
            }
        }
        if isolated {
            iso_buf[cu as usize] += 1;
        }
    }
}

/// Lexicographic successor of a multiset word; false once exhausted.
fn next_permutation(word: &mut [ColorId]) -> bool {
    if word.len() < 2 {
        return false;
    }
    let mut i = word.len() - 1;
    while i > 0 && word[i - 1] >= word[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = word.len() - 1;
    while word[j] <= word[i - 1] {
        j -= 1;
    }
    word.swap(i - 1, j);
    word[i..].reverse();
    true
}

fn summarize(acc: &RawMoments, s: usize, mode_of: impl FnOnce(&RawMoments) -> SummaryMode) -> NullSampleSummary {
    let n_iso_offset = s * (s + 1) / 2;
    let variance = |i: usize| acc.population_variance(i);
    let mut mean_edges = vec![vec![0.0; s]; s];
    let mut var_edges = vec![vec![0.0; s]; s];
    for i in 0..s {
        for j in i..s {
            let t = tri_index(s, i, j);
            mean_edges[i][j] = acc.mean(t);
            mean_edges[j][i] = mean_edges[i][j];
            var_edges[i][j] = variance(t);
            var_edges[j][i] = var_edges[i][j];
        }
    }
    let mean_isolated: Vec<f64> = (0..s).map(|i| acc.mean(n_iso_offset + i)).collect();
    let var_isolated: Vec<f64> = (0..s).map(|i| variance(n_iso_offset + i)).collect();
    NullSampleSummary {
        mean_edges,
        var_edges,
        mean_isolated,
        var_isolated,
        mode: mode_of(acc),
    }
}

fn profile_word(profile: &ColorProfile) -> Vec<ColorId> {
    let mut word = Vec::with_capacity(profile.total() as usize);
    for (color, &count) in profile.counts().iter().enumerate() {
        word.extend(std::iter::repeat_n(color as ColorId, count as usize));
    }
    word
}

fn check_profile(g: &ColoredGraph, profile: &ColorProfile) -> Result<(), OracleError> {
    if profile.total() != g.num_nodes() as u64 {
        return Err(OracleError::ProfileMismatch {
            profile_total: profile.total(),
            graph_nodes: g.num_nodes() as u64,
        });
    }
    Ok(())
}

/// Walks every distinct coloring with the profile's class sizes and
/// returns exact moments. Errors when the coloring count exceeds
/// [`ENUMERATION_BUDGET`].
///
/// ```
/// use homophily::graph::ColoredGraph;
/// use homophily::oracle::enumerate_moments;
/// use homophily::stats::expected_edges;
///
/// let g = ColoredGraph::from_indexed(&[(0, 1), (1, 2)], vec![0, 0, 1]).unwrap();
/// let exact = enumerate_moments(&g, &g.profile()).unwrap();
/// let formula = expected_edges(3, 2, &g.profile()).unwrap();
/// assert!((exact.mean_edges[0][0] - formula[0][0]).abs() < 1e-12);
/// ```
pub fn enumerate_moments(
    g: &ColoredGraph,
    profile: &ColorProfile,
) -> Result<NullSampleSummary, OracleError> {
    check_profile(g, profile)?;
    let n = g.num_nodes() as u64;
    let sizes = profile.counts();
    let log_colorings = log_multinomial(n, sizes);
    if log_colorings > (ENUMERATION_BUDGET as f64).ln() + 1e-9 {
        return Err(OracleError::BudgetExceeded {
            log_colorings,
            budget: ENUMERATION_BUDGET,
        });
    }

    let s = profile.num_classes();
    let len = s * (s + 1) / 2 + s;
    let mut acc = RawMoments::new(len);
    let mut edge_buf = vec![0u64; s * (s + 1) / 2];
    let mut iso_buf = vec![0u64; s];
    let mut values = vec![0u64; len];

    // Ascending word: the lexicographically first arrangement.
    let mut word = profile_word(profile);
    loop {
        tally(g, &word, &mut edge_buf, &mut iso_buf);
        values[..edge_buf.len()].copy_from_slice(&edge_buf);
        values[edge_buf.len()..].copy_from_slice(&iso_buf);
        acc.add(&values);
        if !next_permutation(&mut word) {
            break;
        }
    }

    Ok(summarize(&acc, s, |a| SummaryMode::Exact { colorings: a.count }))
}

/// Monte Carlo estimate from `samples` uniform reshuffles of the color
/// word. The stream is split into fixed-size chunks, each driven by its own
/// counter-derived RNG stream, and chunk totals are merged in exact integer
/// arithmetic: results depend only on `(samples, seed)`, never on the
/// number of worker threads.
pub fn sample_moments(
    g: &ColoredGraph,
    profile: &ColorProfile,
    samples: u64,
    seed: u64,
) -> Result<NullSampleSummary, OracleError> {
    check_profile(g, profile)?;
    if samples < 2 {
        return Err(OracleError::TooFewSamples { got: samples });
    }
    const CHUNK: u64 = 4096;
    let s = profile.num_classes();
    let len = s * (s + 1) / 2 + s;
    let chunks = samples.div_ceil(CHUNK);

    let acc = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * CHUNK;
            let hi = (lo + CHUNK).min(samples);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk + 1);
            let mut word = profile_word(profile);
            let mut acc = RawMoments::new(len);
            let mut edge_buf = vec![0u64; s * (s + 1) / 2];
            let mut iso_buf = vec![0u64; s];
            let mut values = vec![0u64; len];
            for _ in lo..hi {
                word.shuffle(&mut rng);
                tally(g, &word, &mut edge_buf, &mut iso_buf);
                values[..edge_buf.len()].copy_from_slice(&edge_buf);
                values[edge_buf.len()..].copy_from_slice(&iso_buf);
                acc.add(&values);
            }
            acc
        })
        .reduce(|| RawMoments::new(len), RawMoments::merge);

    let tri = s * (s + 1) / 2;
    let mut summary = summarize(&acc, s, |a| {
        let mut se_mean_edges = vec![vec![0.0; s]; s];
        let mut se_var_edges = vec![vec![0.0; s]; s];
        for i in 0..s {
            for j in i..s {
                let t = tri_index(s, i, j);
                se_mean_edges[i][j] = a.se_mean(t);
                se_mean_edges[j][i] = se_mean_edges[i][j];
                se_var_edges[i][j] = a.se_variance(t);
                se_var_edges[j][i] = se_var_edges[i][j];
            }
        }
        SummaryMode::Sampled {
            samples: a.count,
            se_mean_edges,
            se_var_edges,
            se_mean_isolated: (0..s).map(|i| a.se_mean(tri + i)).collect(),
            se_var_isolated: (0..s).map(|i| a.se_variance(tri + i)).collect(),
        }
    });

    // Sampled variances are the unbiased (N-1) estimates, not population
    // variances; overwrite what `summarize` filled in.
    for i in 0..s {
        for j in i..s {
            let t = tri_index(s, i, j);
            summary.var_edges[i][j] = acc.sample_variance(t);
            summary.var_edges[j][i] = summary.var_edges[i][j];
        }
        summary.var_isolated[i] = acc.sample_variance(tri + i);
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::falling_power;
    use num_bigint::BigUint;

    fn path3() -> ColoredGraph {
        // a(1) - b(1) - c(2)
        ColoredGraph::from_indexed(&[(0, 1), (1, 2)], vec![0, 0, 1]).unwrap()
    }

    fn multinomial(n: u64, parts: &[u64]) -> BigUint {
        let mut denom = BigUint::from(1u32);
        for &c in parts {
            denom *= falling_power(c, c);
        }
        falling_power(n, n) / denom
    }

    #[test]
    fn path_fixture_is_exact() {
        let g = path3();
        let summary = enumerate_moments(&g, &g.profile()).unwrap();
        assert_eq!(summary.mode, SummaryMode::Exact { colorings: 3 });
        let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
        assert!(close(summary.mean_edges[0][0], 2.0 / 3.0));
        assert!(close(summary.var_edges[0][0], 2.0 / 9.0));
        assert!(close(summary.mean_edges[0][1], 4.0 / 3.0));
        assert!(close(summary.var_edges[0][1], 2.0 / 9.0));
        assert!(close(summary.mean_edges[1][1], 0.0));
        assert!(close(summary.var_edges[1][1], 0.0));
        assert!(close(summary.mean_isolated[0], 2.0 / 3.0));
        assert!(close(summary.var_isolated[0], 8.0 / 9.0));
        assert!(close(summary.mean_isolated[1], 1.0));
        assert!(close(summary.var_isolated[1], 0.0));
    }

    #[test]
    fn enumeration_visits_every_coloring_once() {
        for (edges, colors) in [
            (vec![(0u32, 1u32), (1, 2), (2, 3)], vec![0u32, 0, 1, 1]),
            (vec![(0, 1), (0, 2), (0, 3)], vec![0, 1, 1, 2]),
            (vec![], vec![0, 1, 2, 2, 2]),
        ] {
            let g = ColoredGraph::from_indexed(&edges, colors).unwrap();
            let summary = enumerate_moments(&g, &g.profile()).unwrap();
            let want = multinomial(g.num_nodes() as u64, g.class_sizes());
            match summary.mode {
                SummaryMode::Exact { colorings } => {
                    assert_eq!(BigUint::from(colorings), want)
                }
                _ => panic!("expected exact mode"),
            }
        }
    }

    #[test]
    fn single_class_is_deterministic() {
        let g = ColoredGraph::from_indexed(&[(0, 1), (1, 2)], vec![0, 0, 0]).unwrap();
        let summary = enumerate_moments(&g, &g.profile()).unwrap();
        assert_eq!(summary.mode, SummaryMode::Exact { colorings: 1 });
        assert_eq!(summary.mean_edges[0][0], 2.0);
        assert_eq!(summary.var_edges[0][0], 0.0);
        assert_eq!(summary.var_isolated[0], 0.0);
    }

    #[test]
    fn edgeless_graph_has_zero_edge_moments() {
        let g = ColoredGraph::from_indexed(&[], vec![0, 0, 1, 1]).unwrap();
        let summary = enumerate_moments(&g, &g.profile()).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(summary.mean_edges[i][j], 0.0);
                assert_eq!(summary.var_edges[i][j], 0.0);
            }
            // Every node is trivially isolated.
            assert!((summary.mean_isolated[i] - 2.0).abs() < 1e-12);
            assert_eq!(summary.var_isolated[i], 0.0);
        }
    }

    #[test]
    fn enumeration_respects_budget() {
        // C(30,15) = 155,117,520 colorings: over budget.
        let mut colors = vec![0u32; 15];
        colors.extend(vec![1u32; 15]);
        let g = ColoredGraph::from_indexed(&[], colors).unwrap();
        assert!(matches!(
            enumerate_moments(&g, &g.profile()),
            Err(OracleError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn oracle_accepts_profiles_other_than_the_graphs_own() {
        // Same topology, hypothetical profile (1, 2) instead of (2, 1):
        // by the class swap symmetry of the path, the cross-block moments
        // must be unchanged and the diagonal moments must trade places.
        let g = path3();
        let own = enumerate_moments(&g, &g.profile()).unwrap();
        let flipped = ColorProfile::from_counts(vec![1, 2]).unwrap();
        let alt = enumerate_moments(&g, &flipped).unwrap();
        assert_eq!(alt.mode, SummaryMode::Exact { colorings: 3 });
        assert!((alt.mean_edges[0][1] - own.mean_edges[0][1]).abs() < 1e-15);
        assert!((alt.mean_edges[1][1] - own.mean_edges[0][0]).abs() < 1e-15);
        assert!((alt.var_edges[1][1] - own.var_edges[0][0]).abs() < 1e-15);
        assert!((alt.mean_isolated[1] - own.mean_isolated[0]).abs() < 1e-15);

        let wrong = ColorProfile::from_counts(vec![2, 2]).unwrap();
        assert!(matches!(
            enumerate_moments(&g, &wrong),
            Err(OracleError::ProfileMismatch { .. })
        ));
    }

    #[test]
    fn sampling_is_reproducible_and_thread_invariant() {
        let g = path3();
        let p = g.profile();
        let a = sample_moments(&g, &p, 10_000, 7).unwrap();
        let b = sample_moments(&g, &p, 10_000, 7).unwrap();
        assert_eq!(a, b);
        for threads in [1usize, 3] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            let c = pool.install(|| sample_moments(&g, &p, 10_000, 7).unwrap());
            assert_eq!(a, c, "thread count {threads} changed the summary");
        }
        let other_seed = sample_moments(&g, &p, 10_000, 8).unwrap();
        assert_ne!(a, other_seed);
    }

    #[test]
    fn sampling_tracks_enumeration_within_standard_errors() {
        let g = ColoredGraph::from_indexed(
            &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)],
            vec![0, 0, 1, 1, 2],
        )
        .unwrap();
        let exact = enumerate_moments(&g, &g.profile()).unwrap();
        let sampled = sample_moments(&g, &g.profile(), 40_000, 13).unwrap();
        let (se_me, se_ve, se_mi, se_vi) = match &sampled.mode {
            SummaryMode::Sampled {
                se_mean_edges,
                se_var_edges,
                se_mean_isolated,
                se_var_isolated,
                ..
            } => (se_mean_edges, se_var_edges, se_mean_isolated, se_var_isolated),
            _ => panic!("expected sampled mode"),
        };
        let s = g.num_classes();
        for i in 0..s {
            for j in i..s {
                let dm = (sampled.mean_edges[i][j] - exact.mean_edges[i][j]).abs();
                assert!(dm <= 4.0 * se_me[i][j] + 1e-12, "mean edge block ({i},{j})");
                let dv = (sampled.var_edges[i][j] - exact.var_edges[i][j]).abs();
                assert!(dv <= 4.0 * se_ve[i][j] + 1e-12, "var edge block ({i},{j})");
            }
            let dm = (sampled.mean_isolated[i] - exact.mean_isolated[i]).abs();
            assert!(dm <= 4.0 * se_mi[i] + 1e-12, "mean isolated {i}");
            let dv = (sampled.var_isolated[i] - exact.var_isolated[i]).abs();
            assert!(dv <= 4.0 * se_vi[i] + 1e-12, "var isolated {i}");
        }
    }

    #[test]
    fn single_class_sampling_has_zero_variance_and_zero_se() {
        let g = ColoredGraph::from_indexed(&[(0, 1), (1, 2)], vec![0, 0, 0]).unwrap();
        let summary = sample_moments(&g, &g.profile(), 100, 3).unwrap();
        assert_eq!(summary.var_edges[0][0], 0.0);
        match summary.mode {
            SummaryMode::Sampled {
                ref se_mean_edges, ..
            } => assert_eq!(se_mean_edges[0][0], 0.0),
            _ => panic!(),
        }
    }

    #[test]
    fn sampling_rejects_degenerate_sample_count() {
        let g = path3();
        assert!(matches!(
            sample_moments(&g, &g.profile(), 1, 0),
            Err(OracleError::TooFewSamples { got: 1 })
        ));
    }

    #[test]
    fn large_sample_runs_track_enumeration_across_many_seeds() {
        // House and chord on five nodes, three classes; 100k samples per
        // seed. Across 50 seeds at least 99% of all mean/variance
        // estimates must land within 4 standard errors of the exact
        // values.
        let g = ColoredGraph::from_indexed(
            &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)],
            vec![0, 0, 1, 1, 2],
        )
        .unwrap();
        let p = g.profile();
        let exact = enumerate_moments(&g, &p).unwrap();
        let mut within = 0u64;
        let mut total = 0u64;
        for seed in 0..50u64 {
            let sampled = sample_moments(&g, &p, 100_000, seed).unwrap();
            let (se_me, se_ve, se_mi, se_vi) = match &sampled.mode {
                SummaryMode::Sampled {
                    se_mean_edges,
                    se_var_edges,
                    se_mean_isolated,
                    se_var_isolated,
                    ..
                } => (se_mean_edges, se_var_edges, se_mean_isolated, se_var_isolated),
                _ => unreachable!(),
            };
            let s = g.num_classes();
            let mut check = |delta: f64, se: f64| {
                total += 1;
                if delta <= 4.0 * se + 1e-12 {
                    within += 1;
                }
            };
            for i in 0..s {
                for j in i..s {
                    check(
                        (sampled.mean_edges[i][j] - exact.mean_edges[i][j]).abs(),
                        se_me[i][j],
                    );
                    check(
                        (sampled.var_edges[i][j] - exact.var_edges[i][j]).abs(),
                        se_ve[i][j],
                    );
                }
                check(
                    (sampled.mean_isolated[i] - exact.mean_isolated[i]).abs(),
                    se_mi[i],
                );
                check(
                    (sampled.var_isolated[i] - exact.var_isolated[i]).abs(),
                    se_vi[i],
                );
            }
        }
        let rate = within as f64 / total as f64;
        assert!(rate >= 0.99, "only {within}/{total} within 4 SE");
    }
}
