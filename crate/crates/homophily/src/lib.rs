//! Color-mixing statistics for node-colored graphs.
//!
//! Given a graph whose nodes carry discrete colors, this crate measures how
//! far the observed mixing pattern sits from what a uniformly random
//! assignment of the same color counts would produce. The null model fixes
//! the graph and the class-size profile and randomizes only which node gets
//! which color; every mixing statistic then has closed-form mean and
//! variance, and each observation becomes a z-score.
//!
//! The crate is organized around a few layers:
//!
//! * [`graph`]: a compact adjacency representation with color classes,
//!   plus the neighborhood queries the statistics need.
//! * [`combinatorics`]: exact falling-factorial arithmetic and the careful
//!   integer-to-float conversions everything else leans on.
//! * [`oracle`]: ground truth by exhaustive enumeration or seeded
//!   sampling, used to validate the closed forms.

pub mod combinatorics;
pub mod graph;
pub mod ingest;
pub mod oracle;
pub mod report;
pub mod stats;
pub mod synth;

/// Node labels mapped to color labels, in file order.
pub type NodeColorMap = indexmap::IndexMap<String, String>;

/// Flat index of `(i, j)` with `i <= j` in a row-major upper triangle of
/// side `s`.
pub(crate) fn tri_index(s: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < s);
    i * (2 * s - i + 1) / 2 + (j - i)
}

#[cfg(test)]
mod tests {
    use super::tri_index;

    #[test]
    fn tri_index_is_a_bijection_onto_the_triangle() {
        for s in 0..8 {
            let mut seen = vec![false; s * (s + 1) / 2];
            for i in 0..s {
                for j in i..s {
                    let t = tri_index(s, i, j);
                    assert!(!seen[t], "collision at s={s} ({i},{j})");
                    seen[t] = true;
                }
            }
            assert!(seen.iter().all(|&b| b));
        }
    }
}
