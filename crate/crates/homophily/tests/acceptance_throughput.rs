//! Acceptance check 7, kept in its own process so the timings are not skewed
//! by the other checks: on a synthetic graph with a million nodes, eight
//! million edges, and five classes, the full edge z-score pass (block
//! counts, wedge count, means, variances, standardization) must finish
//! within five seconds, and doubling the edge count may grow the median
//! time by at most 2.5x.

use std::time::Instant;

use homophily::graph::ColoredGraph;
use homophily::stats::edge_zscores;
use homophily::synth::{random_graph, SynthParams};

/// Median of five timed runs after one warmup.
fn median_pipeline_seconds(g: &ColoredGraph) -> f64 {
    let prof = g.profile();
    std::hint::black_box(edge_zscores(g, &prof).expect("pipeline"));
    let mut times: Vec<f64> = (0..5)
        .map(|_| {
            let clock = Instant::now();
            std::hint::black_box(edge_zscores(g, &prof).expect("pipeline"));
            clock.elapsed().as_secs_f64()
        })
        .collect();
    times.sort_by(f64::total_cmp);
    times[2]
}

fn main() {
    let base = random_graph(&SynthParams {
        nodes: 1_000_000,
        edges: 8_000_000,
        classes: 5,
        seed: 70,
    })
    .expect("synthesis");
    let base_seconds = median_pipeline_seconds(&base);
    drop(base);

    let doubled = random_graph(&SynthParams {
        nodes: 1_000_000,
        edges: 16_000_000,
        classes: 5,
        seed: 71,
    })
    .expect("synthesis");
    let doubled_seconds = median_pipeline_seconds(&doubled);
    drop(doubled);

    let ratio = doubled_seconds / base_seconds;
    let ok = base_seconds <= 5.0 && ratio <= 2.5;
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!(
        "acceptance 7 (edge z-scores at n = 10^6, m = 8x10^6, s = 5): {verdict} \
         [8M edges: {base_seconds:.3}s, 16M edges: {doubled_seconds:.3}s, ratio {ratio:.2}]"
    );
    if !ok {
        std::process::exit(1);
    }
}
