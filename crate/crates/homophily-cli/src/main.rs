//! Command-line front end: run a full color-mixing analysis on node and
//! edge files, validate the closed-form moments against the ground-truth
//! oracle, or benchmark throughput on synthetic graphs.

use std::fs::{self, File};
use std::io::{BufReader, Write as _};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use homophily::graph::ColoredGraph;
use homophily::oracle::{self, NullSampleSummary, SummaryMode};
use homophily::report::{self, AnalysisReport, HeatmapSpec};
use homophily::stats::{self, MomentTable, TailBound};
use homophily::synth::{random_graph, SynthParams};
use homophily::{ingest, NodeColorMap};

#[derive(Parser)]
#[command(
    name = "homophily",
    version,
    about = "Mixing z-scores for node-colored graphs under the fixed-profile random coloring null"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a graph and write report.json, matrices.csv, heatmap.svg, z0.svg.
    Analyze(AnalyzeArgs),
    /// Compare closed-form moments against the exhaustive or sampling oracle.
    Validate(ValidateArgs),
    /// Time the z-score pipelines on synthetic graphs; write a timing CSV.
    Benchmark(BenchmarkArgs),
}

/// Input files and the preprocessing pipeline, shared by analyze/validate.
#[derive(Args)]
struct InputArgs {
    /// Node file: `<label>\t<class>` per line, `#` comments allowed.
    node_file: PathBuf,
    /// Edge file: `<label>\t<label>[\t<weight 0-999>]` per line.
    edge_file: PathBuf,
    /// Keep only edges with weight >= this bound (requires weighted file).
    #[arg(long, value_name = "MIN")]
    cutoff: Option<u32>,
    /// Collapse labels that differ only by this suffix pattern (regex),
    /// e.g. '_\d+' for isoform suffixes.
    #[arg(long, value_name = "PATTERN")]
    merge_suffix: Option<String>,
    /// Class assigned when suffix-merged nodes disagree on class.
    #[arg(long, value_name = "LABEL", default_value = "X")]
    conflict_class: String,
    /// Treat the edge list as directed; keep a pair only when both
    /// directions are present.
    #[arg(long)]
    mutual_only: bool,
    /// Bucket a numeric second column into classes: `lo,hi,label` lines
    /// (half-open intervals) plus one `fallback,label` line.
    #[arg(long, value_name = "FILE")]
    bucket_config: Option<PathBuf>,
    /// Rename classes before analysis: `old,new` lines.
    #[arg(long, value_name = "FILE")]
    alias_config: Option<PathBuf>,
    /// Retain zero-degree nodes (default: drop them).
    #[arg(long)]
    keep_isolated: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Heat-map clamp bounds, e.g. `--clamp -10 60`.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    clamp: Option<Vec<f64>>,
    /// One-sided (Cantelli) U-values instead of the two-sided bound.
    #[arg(long)]
    cantelli: bool,
    /// Joint significance levels for the positive-set query,
    /// comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "0.05")]
    alpha: Vec<f64>,
    /// Worker threads (default: all cores).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Output directory, created if absent.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ValidateMode {
    /// Enumerate every coloring (small graphs only).
    Exact,
    /// Monte Carlo over random colorings.
    Sample,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Comparison mode.
    #[arg(long, value_enum, default_value = "exact")]
    mode: ValidateMode,
    /// Colorings drawn in sample mode.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    /// RNG seed for sample mode.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Test hook: perturb one closed-form moment so the comparison must
    /// fail; proves the failure path stays wired.
    #[arg(long, hide = true)]
    inject_moment_error: bool,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Node count of the generated graph.
    #[arg(long, default_value_t = 100_000)]
    nodes: u32,
    /// Edge count of the generated graph.
    #[arg(long, default_value_t = 800_000)]
    edges: u64,
    /// Class count.
    #[arg(long, default_value_t = 5)]
    classes: u32,
    /// Generator seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Timed repetitions per stage; the median is reported.
    #[arg(long, default_value_t = 5)]
    repetitions: u32,
    /// Worker threads (default: all cores).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Directory for benchmark.csv (default: print CSV to stdout).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Analyze(args) => run_analyze(args),
        Command::Validate(args) => run_validate(args),
        Command::Benchmark(args) => run_benchmark(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

/// Confines rayon to `n` workers when requested; called before any
/// parallel stage runs.
fn init_threads(threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("thread pool already initialized")?;
    }
    Ok(())
}

/// Runs the preprocessing pipeline in a fixed order: parse, bucket
/// numeric attributes, rename classes, filter edges by weight, keep
/// mutual pairs, merge suffixed labels, then assemble the graph.
fn load_graph(args: &InputArgs) -> Result<ColoredGraph> {
    let node_reader = BufReader::new(
        File::open(&args.node_file)
            .with_context(|| format!("opening node file {}", args.node_file.display()))?,
    );
    let mut nodes: NodeColorMap = ingest::parse_node_file(node_reader)
        .with_context(|| format!("parsing node file {}", args.node_file.display()))?;

    if let Some(path) = &args.bucket_config {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading bucket config {}", path.display()))?;
        let rule = ingest::BucketingRule::parse(&text)
            .with_context(|| format!("parsing bucket config {}", path.display()))?;
        nodes = ingest::bucket_attribute(&nodes, &rule);
    }
    if let Some(path) = &args.alias_config {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading alias config {}", path.display()))?;
        let aliases = ingest::parse_alias_map(&text)
            .with_context(|| format!("parsing alias config {}", path.display()))?;
        nodes = ingest::apply_aliases(&nodes, &aliases);
    }

    let edge_reader = BufReader::new(
        File::open(&args.edge_file)
            .with_context(|| format!("opening edge file {}", args.edge_file.display()))?,
    );
    let records = ingest::parse_edge_file(edge_reader, args.cutoff)
        .with_context(|| format!("parsing edge file {}", args.edge_file.display()))?;
    let mut edges: Vec<(String, String)> =
        records.into_iter().map(|r| (r.source, r.target)).collect();

    if args.mutual_only {
        edges = ingest::mutual_only(&edges);
    }
    if let Some(pattern) = &args.merge_suffix {
        let (merged_nodes, merged_edges) =
            ingest::merge_suffix_nodes(&nodes, &edges, pattern, &args.conflict_class)
                .context("merging suffixed labels")?;
        nodes = merged_nodes;
        edges = merged_edges;
    }

    ColoredGraph::build(&edges, &nodes, args.keep_isolated).context("assembling graph")
}

fn run_analyze(args: AnalyzeArgs) -> Result<ExitCode> {
    init_threads(args.threads)?;
    for &alpha in &args.alpha {
        if !(0.0 < alpha && alpha < 1.0) {
            bail!("--alpha values must lie in (0, 1), got {alpha}");
        }
    }
    let spec = match &args.clamp {
        Some(bounds) => HeatmapSpec::new(bounds[0], bounds[1])?,
        None => HeatmapSpec::default(),
    };

    let g = load_graph(&args.input)?;
    let tail = if args.cantelli {
        TailBound::Cantelli
    } else {
        TailBound::TwoSided
    };
    let analysis = AnalysisReport::build(&g, tail, &args.alpha)?;

    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating output directory {}", args.out.display()))?;
    let write = |name: &str, contents: String| -> Result<()> {
        let path = args.out.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
    };
    write("report.json", report::to_json(&analysis))?;
    write("matrices.csv", report::matrices_csv(&analysis))?;
    write("heatmap.svg", report::render_heatmap(&analysis, &spec))?;
    write("z0.svg", report::render_z0_chart(&analysis))?;

    println!(
        "analyzed: n={} m={} s={} density={:.6}%",
        analysis.graph.nodes,
        analysis.graph.edges,
        analysis.graph.classes,
        100.0 * analysis.graph.density
    );
    println!(
        "synthetic homophily index: {:.6}",
        analysis.scores.synthetic_index
    );
    for q in &analysis.scores.positive_sets {
        println!("q({}) = {} jointly positive pairs", q.alpha, q.count);
    }
    if !analysis.moments.diagnostics.clamped.is_empty() {
        println!(
            "note: {} variance value(s) clamped to zero (cancellation at machine precision)",
            analysis.moments.diagnostics.clamped.len()
        );
    }
    println!("wrote report.json, matrices.csv, heatmap.svg, z0.svg to {}", args.out.display());
    Ok(ExitCode::SUCCESS)
}

/// One row of the validation table.
struct ValidationRow {
    statistic: String,
    closed: f64,
    oracle: f64,
    se: Option<f64>,
}

/// Relative error with a 1e-12 absolute floor, so exact zeros compare
/// cleanly against enumeration zeros.
fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs()).max(1e-12);
    (a - b).abs() / scale
}

fn validation_rows(table: &MomentTable, summary: &NullSampleSummary) -> Vec<ValidationRow> {
    let s = table.mean_isolated.len();
    let (se_me, se_ve, se_mi, se_vi) = match &summary.mode {
        SummaryMode::Exact { .. } => (None, None, None, None),
        SummaryMode::Sampled {
            se_mean_edges,
            se_var_edges,
            se_mean_isolated,
            se_var_isolated,
            ..
        } => (
            Some(se_mean_edges),
            Some(se_var_edges),
            Some(se_mean_isolated),
            Some(se_var_isolated),
        ),
    };
    let mut rows = Vec::new();
    for i in 0..s {
        for j in i..s {
            rows.push(ValidationRow {
                statistic: format!("mean_edges[{i}][{j}]"),
                closed: table.mean_edges[i][j],
                oracle: summary.mean_edges[i][j],
                se: se_me.map(|m| m[i][j]),
            });
            rows.push(ValidationRow {
                statistic: format!("var_edges[{i}][{j}]"),
                closed: table.var_edges[i][j],
                oracle: summary.var_edges[i][j],
                se: se_ve.map(|m| m[i][j]),
            });
        }
    }
    for i in 0..s {
        rows.push(ValidationRow {
            statistic: format!("mean_isolated[{i}]"),
            closed: table.mean_isolated[i],
            oracle: summary.mean_isolated[i],
            se: se_mi.map(|v| v[i]),
        });
        rows.push(ValidationRow {
            statistic: format!("var_isolated[{i}]"),
            closed: table.var_isolated[i],
            oracle: summary.var_isolated[i],
            se: se_vi.map(|v| v[i]),
        });
    }
    rows
}

fn run_validate(args: ValidateArgs) -> Result<ExitCode> {
    init_threads(args.threads)?;
    let g = load_graph(&args.input)?;
    let profile = g.profile();

    let mut table = stats::moment_table(&g, &profile)?;
    if args.inject_moment_error {
        // Deliberate corruption; must trip the comparison below.
        table.mean_edges[0][0] += 1.0 + table.mean_edges[0][0].abs();
    }

    let summary = match args.mode {
        ValidateMode::Exact => oracle::enumerate_moments(&g, &profile)?,
        ValidateMode::Sample => {
            oracle::sample_moments(&g, &profile, args.samples, args.seed)?
        }
    };
    match &summary.mode {
        SummaryMode::Exact { colorings } => {
            println!("oracle: exact enumeration over {colorings} colorings");
        }
        SummaryMode::Sampled { samples, .. } => {
            println!(
                "oracle: {samples} sampled colorings, seed {} (columns: oracle se)",
                args.seed
            );
        }
    }

    let rows = validation_rows(&table, &summary);
    let exact = matches!(summary.mode, SummaryMode::Exact { .. });
    println!(
        "{:<24} {:>24} {:>24} {:>12}{}",
        "statistic",
        "closed-form",
        "oracle",
        "rel-err",
        if exact { "" } else { "  oracle-se" }
    );
    let mut worst: f64 = 0.0;
    for row in &rows {
        let err = rel_err(row.closed, row.oracle);
        worst = worst.max(err);
        match row.se {
            None => println!(
                "{:<24} {:>24.16e} {:>24.16e} {:>12.3e}",
                row.statistic, row.closed, row.oracle, err
            ),
            Some(se) => println!(
                "{:<24} {:>24.16e} {:>24.16e} {:>12.3e}  {:>10.3e}",
                row.statistic, row.closed, row.oracle, err, se
            ),
        }
    }

    if exact {
        println!("worst relative error: {worst:.3e} (tolerance 1e-9)");
        if worst > 1e-9 {
            eprintln!("validation FAILED: closed forms disagree with exact enumeration");
            return Ok(ExitCode::FAILURE);
        }
        println!("validation passed");
    } else {
        println!("worst relative error: {worst:.3e} (sampling noise; informational)");
    }
    Ok(ExitCode::SUCCESS)
}

fn median_seconds(samples: &mut [f64]) -> f64 {
    samples.sort_by(f64::total_cmp);
    samples[samples.len() / 2]
}

fn run_benchmark(args: BenchmarkArgs) -> Result<ExitCode> {
    init_threads(args.threads)?;
    if args.repetitions == 0 {
        bail!("--repetitions must be at least 1");
    }
    let g = random_graph(&SynthParams {
        nodes: args.nodes,
        edges: args.edges,
        classes: args.classes,
        seed: args.seed,
    })?;
    let profile = g.profile();
    eprintln!(
        "generated graph: n={} m={} s={} (seed {})",
        g.num_nodes(),
        g.num_edges(),
        g.num_classes(),
        args.seed
    );

    // Edge pipeline: block counts, expected, variances, z-scores.
    let mut edge_times = Vec::with_capacity(args.repetitions as usize);
    for _ in 0..args.repetitions {
        let t0 = Instant::now();
        let z = stats::edge_zscores(&g, &profile)?;
        let elapsed = t0.elapsed().as_secs_f64();
        std::hint::black_box(z);
        edge_times.push(elapsed);
    }
    let edge_median = median_seconds(&mut edge_times);

    // Isolated pipeline: expected and fast variance per class.
    let mut iso_times = Vec::with_capacity(args.repetitions as usize);
    for _ in 0..args.repetitions {
        let t0 = Instant::now();
        let table = stats::moment_table(&g, &profile)?;
        let elapsed = t0.elapsed().as_secs_f64();
        std::hint::black_box(table);
        iso_times.push(elapsed);
    }
    let iso_median = median_seconds(&mut iso_times);

    let sum_sq = g.sum_squared_degrees();
    let mut csv = String::from(
        "stage,nodes,edges,classes,repetitions,median_seconds,throughput,throughput_unit\n",
    );
    csv.push_str(&format!(
        "edge_zscores,{},{},{},{},{:.6},{:.0},edges_per_second\n",
        args.nodes,
        args.edges,
        args.classes,
        args.repetitions,
        edge_median,
        args.edges as f64 / edge_median
    ));
    csv.push_str(&format!(
        "moment_table,{},{},{},{},{:.6},{:.0},squared_degrees_per_second\n",
        args.nodes,
        args.edges,
        args.classes,
        args.repetitions,
        iso_median,
        sum_sq as f64 / iso_median
    ));

    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir)
                .with_context(|| format!("creating output directory {}", dir.display()))?;
            let path = dir.join("benchmark.csv");
            let mut f = File::create(&path)
                .with_context(|| format!("writing {}", path.display()))?;
            f.write_all(csv.as_bytes())?;
            println!("wrote {}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(ExitCode::SUCCESS)
}
