//! Report assembly and rendering.
//!
//! Bundles one full analysis (observed counts, null moments, standardized
//! scores) into a serializable [`AnalysisReport`], and renders it three
//! ways: a schema-stable JSON document, a long-format CSV of every matrix,
//! and SVG figures (a z-score heat-map and an isolated-count bar chart).
//!
//! All rendering is deterministic: the same report always produces the same
//! bytes. Nothing here reads clocks, RNGs, or hash-ordered containers.

use crate::graph::ColoredGraph;
use crate::stats::{
    block_edge_counts, moment_table, positive_set, u_values, zscore_arrays, EdgeBlockCounts,
    HomophilyReport, MomentTable, StatsError, TailBound,
};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("clamp interval [{lo}, {hi}] is empty; lower bound must be below upper")]
    BadClamp { lo: f64, hi: f64 },
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Structural facts about the analyzed graph, echoed into the report so a
/// reader never needs the original files to interpret the scores.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub nodes: u64,
    pub edges: u64,
    pub classes: usize,
    /// Edge density `2m / (n(n-1))`.
    pub density: f64,
    pub class_labels: Vec<String>,
    pub class_sizes: Vec<u64>,
    /// Number of two-edge paths; drives the edge-variance cross term.
    pub wedges: u64,
    /// Sum of squared degrees; proxy for isolated-variance cost.
    pub sum_squared_degrees: u64,
}

/// One complete analysis: everything the JSON, CSV, and SVG outputs need.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub graph: GraphSummary,
    /// Tail bound used for the U-value arrays in `scores`.
    pub tail_bound: TailBound,
    pub observed: EdgeBlockCounts,
    pub moments: MomentTable,
    pub scores: HomophilyReport,
}

impl AnalysisReport {
    /// Runs the full pipeline on `g` under its own coloring: observed
    /// counts, null moments, z-scores, U-values under `tail_bound`, and one
    /// joint-significance query over the whole upper triangle per entry of
    /// `alphas`.
    ///
    /// ```
    /// use homophily::graph::ColoredGraph;
    /// use homophily::report::{to_json, from_json, AnalysisReport};
    /// use homophily::stats::TailBound;
    ///
    /// let g = ColoredGraph::from_indexed(&[(0, 1), (1, 2)], vec![0, 0, 1]).unwrap();
    /// let report = AnalysisReport::build(&g, TailBound::TwoSided, &[0.05]).unwrap();
    /// assert_eq!(report.graph.nodes, 3);
    ///
    /// // Serialization round-trips to the byte.
    /// let text = to_json(&report);
    /// assert_eq!(to_json(&from_json(&text).unwrap()), text);
    /// ```
    pub fn build(
        g: &ColoredGraph,
        tail_bound: TailBound,
        alphas: &[f64],
    ) -> Result<Self, StatsError> {
        let profile = g.profile();
        let observed = block_edge_counts(g);
        let moments = moment_table(g, &profile)?;
        let mut scores = zscore_arrays(&observed, &moments);
        if tail_bound != TailBound::TwoSided {
            let u = u_values(&scores, tail_bound);
            scores.u_edges = u.edges;
            scores.u_isolated = u.isolated;
        }
        let s = g.num_classes();
        let upper: Vec<(usize, usize)> = (0..s)
            .flat_map(|i| (i..s).map(move |j| (i, j)))
            .collect();
        for &alpha in alphas {
            let q = positive_set(&scores, &upper, alpha);
            scores.positive_sets.push(q);
        }
        Ok(AnalysisReport {
            graph: GraphSummary {
                nodes: g.num_nodes() as u64,
                edges: g.num_edges(),
                classes: s,
                density: g.density(),
                class_labels: g.color_labels().to_vec(),
                class_sizes: g.class_sizes().to_vec(),
                wedges: g.wedge_count(),
                sum_squared_degrees: g.sum_squared_degrees(),
            },
            tail_bound,
            observed,
            moments,
            scores,
        })
    }
}

/// Serializes the report as pretty-printed JSON with a trailing newline.
///
/// Field order follows the struct declarations, so identical reports give
/// byte-identical documents, and `from_json` followed by `to_json` is the
/// identity on anything this function produced.
pub fn to_json(report: &AnalysisReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report types always serialize");
    s.push('\n');
    s
}

pub fn from_json(text: &str) -> Result<AnalysisReport, serde_json::Error> {
    serde_json::from_str(text)
}

/// Writes every matrix and vector of the report in one long-format CSV:
/// `section,row,col,row_class,col_class,value`. Vector sections leave the
/// column fields empty; undefined entries leave the value empty.
pub fn matrices_csv(report: &AnalysisReport) -> String {
    let labels = &report.graph.class_labels;
    let s = report.graph.classes;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["section", "row", "col", "row_class", "col_class", "value"])
        .expect("csv write to memory");

    let matrix = |w: &mut csv::Writer<Vec<u8>>, name: &str, at: &dyn Fn(usize, usize) -> String| {
        for i in 0..s {
            for j in 0..s {
                w.write_record([
                    name,
                    &i.to_string(),
                    &j.to_string(),
                    &labels[i],
                    &labels[j],
                    &at(i, j),
                ])
                .expect("csv write to memory");
            }
        }
    };
    let vector = |w: &mut csv::Writer<Vec<u8>>, name: &str, at: &dyn Fn(usize) -> String| {
        for (i, label) in labels.iter().enumerate() {
            w.write_record([name, &i.to_string(), "", label, "", &at(i)])
                .expect("csv write to memory");
        }
    };

    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();

    matrix(&mut w, "observed_edges", &|i, j| {
        report.observed.edges[i][j].to_string()
    });
    matrix(&mut w, "expected_edges", &|i, j| {
        report.moments.mean_edges[i][j].to_string()
    });
    matrix(&mut w, "variance_edges", &|i, j| {
        report.moments.var_edges[i][j].to_string()
    });
    matrix(&mut w, "z_edges", &|i, j| opt(report.scores.z_edges[i][j]));
    matrix(&mut w, "u_edges", &|i, j| opt(report.scores.u_edges[i][j]));
    matrix(&mut w, "ratio", &|i, j| opt(report.scores.ratios[i][j]));
    vector(&mut w, "observed_isolated", &|i| {
        report.observed.isolated[i].to_string()
    });
    vector(&mut w, "expected_isolated", &|i| {
        report.moments.mean_isolated[i].to_string()
    });
    vector(&mut w, "variance_isolated", &|i| {
        report.moments.var_isolated[i].to_string()
    });
    vector(&mut w, "z_isolated", &|i| opt(report.scores.z_isolated[i]));
    vector(&mut w, "u_isolated", &|i| opt(report.scores.u_isolated[i]));

    String::from_utf8(w.into_inner().expect("csv write to memory")).expect("csv output is utf-8")
}

/// Rendering controls for the z-score heat-map.
///
/// Cells are colored by `sign(z) * log10(1 + |z|)` computed on the clamped
/// value, interpolating from near-white at zero toward the negative anchor
/// (pink) or the positive anchor (green). A clamp interval that spans zero
/// therefore keeps cell hue aligned with z-score sign; an interval that
/// excludes zero saturates every cell to one side.
#[derive(Clone, Debug, PartialEq)]
pub struct HeatmapSpec {
    pub clamp_lo: f64,
    pub clamp_hi: f64,
    /// Anchor color for the most negative clamped value.
    pub negative_rgb: [u8; 3],
    /// Anchor color for the most positive clamped value.
    pub positive_rgb: [u8; 3],
    /// Print the numeric z-score inside each cell.
    pub cell_labels: bool,
}

/// Deep pink anchor for negative z-scores.
pub const NEGATIVE_ANCHOR: [u8; 3] = [197, 27, 125];
/// Deep green anchor for positive z-scores.
pub const POSITIVE_ANCHOR: [u8; 3] = [39, 100, 25];
/// Near-white center of the diverging palette (z = 0).
pub const NEUTRAL_CENTER: [u8; 3] = [250, 250, 250];
/// Flat gray fill for undefined (zero-variance) entries.
pub const UNDEFINED_FILL: [u8; 3] = [200, 200, 200];

impl HeatmapSpec {
    /// Requires `lo < hi`.
    pub fn new(clamp_lo: f64, clamp_hi: f64) -> Result<Self, ReportError> {
        // NaN bounds must fail validation, so test for Less rather than >=.
        if clamp_lo.partial_cmp(&clamp_hi) != Some(std::cmp::Ordering::Less) {
            return Err(ReportError::BadClamp {
                lo: clamp_lo,
                hi: clamp_hi,
            });
        }
        Ok(HeatmapSpec {
            clamp_lo,
            clamp_hi,
            negative_rgb: NEGATIVE_ANCHOR,
            positive_rgb: POSITIVE_ANCHOR,
            cell_labels: true,
        })
    }
}

impl Default for HeatmapSpec {
    /// Clamp [-10, 60]: tight enough that moderate scores keep visible
    /// contrast, wide enough for strongly homophilous diagonals.
    fn default() -> Self {
        HeatmapSpec::new(-10.0, 60.0).expect("default clamp is nonempty")
    }
}

/// Signed logarithmic compression `sign(z) * log10(1 + |z|)`: odd,
/// monotone, fixes 0, and maps 9 to 1, 99 to 2, ...
pub fn signed_log(z: f64) -> f64 {
    if z < 0.0 {
        -(1.0 + z.abs()).log10()
    } else {
        (1.0 + z).log10()
    }
}

fn blend(from: [u8; 3], to: [u8; 3], frac: f64) -> [u8; 3] {
    let f = frac.clamp(0.0, 1.0);
    let mut out = [0u8; 3];
    for k in 0..3 {
        out[k] = (from[k] as f64 + (to[k] as f64 - from[k] as f64) * f).round() as u8;
    }
    out
}

/// Fill color for a defined z-score under `spec`; `None` maps to the
/// undefined style elsewhere.
fn cell_color(z: f64, spec: &HeatmapSpec) -> [u8; 3] {
    let clamped = z.clamp(spec.clamp_lo, spec.clamp_hi);
    let t = signed_log(clamped);
    if t > 0.0 {
        // t <= t(hi) and t > 0 force t(hi) > 0, so the ratio is in (0, 1].
        blend(NEUTRAL_CENTER, spec.positive_rgb, t / signed_log(spec.clamp_hi))
    } else if t < 0.0 {
        blend(NEUTRAL_CENTER, spec.negative_rgb, t / signed_log(spec.clamp_lo))
    } else {
        NEUTRAL_CENTER
    }
}

fn rgb(c: [u8; 3]) -> String {
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn text_color(bg: [u8; 3]) -> &'static str {
    let luma = 0.299 * bg[0] as f64 + 0.587 * bg[1] as f64 + 0.114 * bg[2] as f64;
    if luma < 140.0 {
        "#f5f5f5"
    } else {
        "#1a1a1a"
    }
}

const CELL: f64 = 52.0;
const LABEL_GUTTER: f64 = 64.0;
const LEGEND_HEIGHT: f64 = 56.0;

/// Renders the edge z-score matrix as an SVG heat-map.
///
/// Every cell carries `data-row`/`data-col` attributes and, when defined,
/// a `data-z` attribute with the raw (unclamped) score; undefined entries
/// use the flat neutral style and the marker `data-z="undefined"`. The
/// legend restates the transform and the clamp bounds, so a figure is
/// interpretable without this documentation.
pub fn render_heatmap(report: &AnalysisReport, spec: &HeatmapSpec) -> String {
    let s = report.graph.classes;
    let labels = &report.graph.class_labels;
    let grid = s as f64 * CELL;
    let width = LABEL_GUTTER + grid + 16.0;
    let height = LABEL_GUTTER + grid + LEGEND_HEIGHT + 36.0;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"Helvetica, Arial, sans-serif\">"
    );
    let _ = writeln!(
        svg,
        "  <rect width=\"{width:.0}\" height=\"{height:.0}\" fill=\"#ffffff\"/>"
    );

    for (j, label) in labels.iter().enumerate() {
        let x = LABEL_GUTTER + (j as f64 + 0.5) * CELL;
        let _ = writeln!(
            svg,
            "  <text x=\"{x:.1}\" y=\"{y:.1}\" text-anchor=\"middle\" font-size=\"13\" \
             fill=\"#1a1a1a\">{}</text>",
            escape_xml(label),
            y = LABEL_GUTTER - 10.0
        );
    }
    for (i, label) in labels.iter().enumerate() {
        let y = LABEL_GUTTER + (i as f64 + 0.5) * CELL + 4.0;
        let _ = writeln!(
            svg,
            "  <text x=\"{x:.1}\" y=\"{y:.1}\" text-anchor=\"end\" font-size=\"13\" \
             fill=\"#1a1a1a\">{}</text>",
            escape_xml(label),
            x = LABEL_GUTTER - 8.0
        );
    }

    for i in 0..s {
        for j in 0..s {
            let x = LABEL_GUTTER + j as f64 * CELL;
            let y = LABEL_GUTTER + i as f64 * CELL;
            match report.scores.z_edges[i][j] {
                Some(z) => {
                    let fill = cell_color(z, spec);
                    let _ = writeln!(
                        svg,
                        "  <rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{CELL:.1}\" height=\"{CELL:.1}\" \
                         fill=\"{}\" stroke=\"#ffffff\" stroke-width=\"1\" \
                         data-row=\"{i}\" data-col=\"{j}\" data-z=\"{z}\"/>",
                        rgb(fill)
                    );
                    if spec.cell_labels {
                        let _ = writeln!(
                            svg,
                            "  <text x=\"{cx:.1}\" y=\"{cy:.1}\" text-anchor=\"middle\" \
                             font-size=\"12\" fill=\"{}\">{z:.2}</text>",
                            text_color(fill),
                            cx = x + CELL / 2.0,
                            cy = y + CELL / 2.0 + 4.0
                        );
                    }
                }
                None => {
                    let _ = writeln!(
                        svg,
                        "  <rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{CELL:.1}\" height=\"{CELL:.1}\" \
                         fill=\"{}\" stroke=\"#ffffff\" stroke-width=\"1\" \
                         data-row=\"{i}\" data-col=\"{j}\" data-z=\"undefined\"/>",
                        rgb(UNDEFINED_FILL)
                    );
                    if spec.cell_labels {
                        let _ = writeln!(
                            svg,
                            "  <text x=\"{cx:.1}\" y=\"{cy:.1}\" text-anchor=\"middle\" \
                             font-size=\"12\" fill=\"#5a5a5a\">n/a</text>",
                            cx = x + CELL / 2.0,
                            cy = y + CELL / 2.0 + 4.0
                        );
                    }
                }
            }
        }
    }

    // Legend: sample the palette through the same clamp-then-compress path
    // so the bar is a faithful key for the cells above it.
    let legend_y = LABEL_GUTTER + grid + 24.0;
    let legend_w = grid.max(240.0);
    let steps = 120;
    for k in 0..steps {
        let frac = (k as f64 + 0.5) / steps as f64;
        let z = spec.clamp_lo + frac * (spec.clamp_hi - spec.clamp_lo);
        let fill = cell_color(z, spec);
        let _ = writeln!(
            svg,
            "  <rect x=\"{x:.2}\" y=\"{legend_y:.1}\" width=\"{w:.2}\" height=\"14\" fill=\"{}\"/>",
            rgb(fill),
            x = LABEL_GUTTER + k as f64 * legend_w / steps as f64,
            w = legend_w / steps as f64 + 0.5
        );
    }
    let _ = writeln!(
        svg,
        "  <text x=\"{x:.1}\" y=\"{y:.1}\" text-anchor=\"start\" font-size=\"11\" \
         fill=\"#1a1a1a\">{lo}</text>",
        x = LABEL_GUTTER,
        y = legend_y + 26.0,
        lo = spec.clamp_lo
    );
    if spec.clamp_lo < 0.0 && spec.clamp_hi > 0.0 {
        let zero_x = LABEL_GUTTER + legend_w * (0.0 - spec.clamp_lo) / (spec.clamp_hi - spec.clamp_lo);
        let _ = writeln!(
            svg,
            "  <text x=\"{zero_x:.1}\" y=\"{y:.1}\" text-anchor=\"middle\" font-size=\"11\" \
             fill=\"#1a1a1a\">0</text>",
            y = legend_y + 26.0
        );
    }
    let _ = writeln!(
        svg,
        "  <text x=\"{x:.1}\" y=\"{y:.1}\" text-anchor=\"end\" font-size=\"11\" \
         fill=\"#1a1a1a\">{hi}</text>",
        x = LABEL_GUTTER + legend_w,
        y = legend_y + 26.0,
        hi = spec.clamp_hi
    );
    let _ = writeln!(
        svg,
        "  <text x=\"{x:.1}\" y=\"{y:.1}\" text-anchor=\"start\" font-size=\"11\" \
         fill=\"#5a5a5a\">cell color: sign(z) * log10(1 + |z|), z clamped to [{lo}, {hi}]; \
         green positive, pink negative, gray undefined</text>",
        x = LABEL_GUTTER,
        y = legend_y + 42.0,
        lo = spec.clamp_lo,
        hi = spec.clamp_hi
    );
    svg.push_str("</svg>\n");
    svg
}

/// Renders the isolated-count z-scores as a signed bar chart, one bar per
/// class around a zero axis. Bars reuse the heat-map anchors (green above
/// the axis, pink below); classes with undefined scores get a gray tick at
/// the axis and an `n/a` label.
pub fn render_z0_chart(report: &AnalysisReport) -> String {
    let s = report.graph.classes;
    let labels = &report.graph.class_labels;
    let z0 = &report.scores.z_isolated;

    let max_abs = z0
        .iter()
        .flatten()
        .fold(0.0f64, |acc, &z| acc.max(z.abs()))
        .max(1.0)
        .ceil();

    let bar_w = 44.0;
    let gap = 18.0;
    let plot_h = 180.0;
    let left = 64.0;
    let top = 24.0;
    let width = left + s as f64 * (bar_w + gap) + 24.0;
    let height = top + 2.0 * plot_h + 64.0;
    let axis_y = top + plot_h;
    let scale = plot_h / max_abs;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"Helvetica, Arial, sans-serif\">"
    );
    let _ = writeln!(
        svg,
        "  <rect width=\"{width:.0}\" height=\"{height:.0}\" fill=\"#ffffff\"/>"
    );

    for (value, frac) in [(max_abs, 1.0f64), (max_abs / 2.0, 0.5), (0.0, 0.0), (-max_abs / 2.0, -0.5), (-max_abs, -1.0)] {
        let y = axis_y - frac * plot_h;
        let _ = writeln!(
            svg,
            "  <line x1=\"{left:.1}\" y1=\"{y:.1}\" x2=\"{x2:.1}\" y2=\"{y:.1}\" \
             stroke=\"#e0e0e0\" stroke-width=\"1\"/>",
            x2 = width - 24.0
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{x:.1}\" y=\"{ty:.1}\" text-anchor=\"end\" font-size=\"11\" \
             fill=\"#1a1a1a\">{value:.1}</text>",
            x = left - 8.0,
            ty = y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        "  <line x1=\"{left:.1}\" y1=\"{axis_y:.1}\" x2=\"{x2:.1}\" y2=\"{axis_y:.1}\" \
         stroke=\"#1a1a1a\" stroke-width=\"1.5\"/>",
        x2 = width - 24.0
    );

    for i in 0..s {
        let x = left + gap / 2.0 + i as f64 * (bar_w + gap);
        match z0[i] {
            Some(z) => {
                let h = z.abs() * scale;
                let (y, fill) = if z >= 0.0 {
                    (axis_y - h, POSITIVE_ANCHOR)
                } else {
                    (axis_y, NEGATIVE_ANCHOR)
                };
                let _ = writeln!(
                    svg,
                    "  <rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{bar_w:.1}\" height=\"{h:.1}\" \
                     fill=\"{}\" data-class=\"{i}\" data-z=\"{z}\"/>",
                    rgb(fill)
                );
                let ty = if z >= 0.0 { axis_y - h - 6.0 } else { axis_y + h + 14.0 };
                let _ = writeln!(
                    svg,
                    "  <text x=\"{cx:.1}\" y=\"{ty:.1}\" text-anchor=\"middle\" font-size=\"11\" \
                     fill=\"#1a1a1a\">{z:.2}</text>",
                    cx = x + bar_w / 2.0
                );
            }
            None => {
                let _ = writeln!(
                    svg,
                    "  <rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{bar_w:.1}\" height=\"4\" \
                     fill=\"{}\" data-class=\"{i}\" data-z=\"undefined\"/>",
                    rgb(UNDEFINED_FILL),
                    y = axis_y - 2.0
                );
                let _ = writeln!(
                    svg,
                    "  <text x=\"{cx:.1}\" y=\"{ty:.1}\" text-anchor=\"middle\" font-size=\"11\" \
                     fill=\"#5a5a5a\">n/a</text>",
                    cx = x + bar_w / 2.0,
                    ty = axis_y - 8.0
                );
            }
        }
        let _ = writeln!(
            svg,
            "  <text x=\"{cx:.1}\" y=\"{ty:.1}\" text-anchor=\"middle\" font-size=\"12\" \
             fill=\"#1a1a1a\">{}</text>",
            escape_xml(&labels[i]),
            cx = x + bar_w / 2.0,
            ty = top + 2.0 * plot_h + 22.0
        );
    }
    let _ = writeln!(
        svg,
        "  <text x=\"{left:.1}\" y=\"{ty:.1}\" text-anchor=\"start\" font-size=\"11\" \
         fill=\"#5a5a5a\">isolated-count z-score per class; linear scale</text>",
        ty = top + 2.0 * plot_h + 48.0
    );
    svg.push_str("</svg>\n");
    svg
}

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ColoredGraph;

    // Two same-color edges, one isolated node of a third color: exercises
    // positive, negative, and undefined score entries at once.
    fn mixed_fixture() -> ColoredGraph {
        ColoredGraph::from_indexed(&[(0, 1), (1, 2)], vec![0, 0, 1, 2]).unwrap()
    }

    fn path_fixture() -> ColoredGraph {
        ColoredGraph::from_indexed(&[(0, 1), (1, 2)], vec![0, 0, 1]).unwrap()
    }

    #[test]
    fn build_assembles_pipeline_outputs() {
        let report = AnalysisReport::build(&path_fixture(), TailBound::TwoSided, &[0.05]).unwrap();
        assert_eq!(report.graph.nodes, 3);
        assert_eq!(report.graph.edges, 2);
        assert_eq!(report.graph.classes, 2);
        assert_eq!(report.graph.class_sizes, vec![2, 1]);
        assert_eq!(report.graph.wedges, 1);
        let z11 = report.scores.z_edges[0][0].unwrap();
        assert!((z11 - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(report.scores.positive_sets.len(), 1);
        assert_eq!(report.scores.positive_sets[0].alpha, 0.05);
    }

    #[test]
    fn json_round_trip_is_identity() {
        let report = AnalysisReport::build(&mixed_fixture(), TailBound::Cantelli, &[0.05, 0.2])
            .unwrap();
        let text = to_json(&report);
        let parsed = from_json(&text).unwrap();
        assert_eq!(parsed, report);
        assert_eq!(to_json(&parsed), text);
    }

    #[test]
    fn json_is_deterministic_across_builds() {
        let a = AnalysisReport::build(&mixed_fixture(), TailBound::TwoSided, &[0.05]).unwrap();
        let b = AnalysisReport::build(&mixed_fixture(), TailBound::TwoSided, &[0.05]).unwrap();
        assert_eq!(to_json(&a), to_json(&b));
    }

    #[test]
    fn cantelli_flag_changes_u_arrays_only() {
        let two = AnalysisReport::build(&path_fixture(), TailBound::TwoSided, &[]).unwrap();
        let one = AnalysisReport::build(&path_fixture(), TailBound::Cantelli, &[]).unwrap();
        assert_eq!(two.scores.z_edges, one.scores.z_edges);
        assert_ne!(two.scores.u_edges, one.scores.u_edges);
        // z = 1/sqrt(2): two-sided z^-2 = 2 caps at 1, Cantelli 1/(1+z^2) = 2/3.
        assert_eq!(two.scores.u_edges[0][0], Some(1.0));
        let c = one.scores.u_edges[0][0].unwrap();
        assert!((c - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn csv_covers_every_section_and_blanks_undefined() {
        let report = AnalysisReport::build(&mixed_fixture(), TailBound::TwoSided, &[]).unwrap();
        let csv = matrices_csv(&report);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "section,row,col,row_class,col_class,value");
        let s = report.graph.classes;
        assert_eq!(lines.len(), 1 + 6 * s * s + 5 * s);
        // Class 2 is a single always-isolated node: zero variance, blank z.
        assert!(lines.iter().any(|l| l.starts_with("z_isolated,2,,2,,")
            && l.ends_with(",,")
            || *l == "z_isolated,2,,2,,"));
        assert!(csv.contains("observed_edges,0,0,0,0,1"));
        assert!(csv.contains("observed_edges,0,1,0,1,1"));
    }

    #[test]
    fn signed_log_is_odd_monotone_and_anchored() {
        assert_eq!(signed_log(0.0), 0.0);
        assert_eq!(signed_log(9.0), 1.0);
        assert_eq!(signed_log(99.0), 2.0);
        for z in [0.1, 1.0, 7.3, 55.0, 400.0] {
            assert_eq!(signed_log(-z), -signed_log(z));
        }
        let mut prev = signed_log(-1000.0);
        for k in -999..=1000 {
            let t = signed_log(k as f64);
            assert!(t > prev);
            prev = t;
        }
    }

    #[test]
    fn cell_sign_matches_hue_for_zero_spanning_clamps() {
        for spec in [
            HeatmapSpec::default(),
            HeatmapSpec::new(-100.0, 100.0).unwrap(),
            HeatmapSpec::new(-2.0, 600.0).unwrap(),
        ] {
            for k in 1..=2000 {
                let z = k as f64 * 0.37;
                let pos = cell_color(z, &spec);
                assert!(
                    pos[1] >= pos[0] && pos[1] >= pos[2],
                    "positive z {z} not green-dominant: {pos:?}"
                );
                let neg = cell_color(-z, &spec);
                assert!(neg[0] >= neg[1], "negative z {} not red-dominant: {neg:?}", -z);
            }
            assert_eq!(cell_color(0.0, &spec), NEUTRAL_CENTER);
        }
    }

    #[test]
    fn heatmap_marks_cells_with_sign_consistent_fills() {
        let report = AnalysisReport::build(&mixed_fixture(), TailBound::TwoSided, &[]).unwrap();
        let svg = render_heatmap(&report, &HeatmapSpec::default());
        let s = report.graph.classes;
        for i in 0..s {
            for j in 0..s {
                let marker = format!("data-row=\"{i}\" data-col=\"{j}\"");
                let cell_line = svg
                    .lines()
                    .find(|l| l.contains(&marker))
                    .expect("every cell rendered");
                match report.scores.z_edges[i][j] {
                    Some(z) => {
                        let fill = extract_fill(cell_line);
                        if z > 0.0 {
                            assert!(fill[1] >= fill[0] && fill[1] >= fill[2], "{i},{j}: {fill:?}");
                        } else if z < 0.0 {
                            assert!(fill[0] >= fill[1], "{i},{j}: {fill:?}");
                        }
                        assert!(cell_line.contains(&format!("data-z=\"{z}\"")));
                    }
                    None => {
                        assert!(cell_line.contains("data-z=\"undefined\""));
                        assert_eq!(extract_fill(cell_line), UNDEFINED_FILL);
                    }
                }
            }
        }
    }

    fn extract_fill(line: &str) -> [u8; 3] {
        let start = line.find("fill=\"#").expect("hex fill") + 7;
        let hex = &line[start..start + 6];
        [
            u8::from_str_radix(&hex[0..2], 16).unwrap(),
            u8::from_str_radix(&hex[2..4], 16).unwrap(),
            u8::from_str_radix(&hex[4..6], 16).unwrap(),
        ]
    }

    #[test]
    fn legend_documents_transform_and_clamp_bounds() {
        let report = AnalysisReport::build(&path_fixture(), TailBound::TwoSided, &[]).unwrap();
        let default_svg = render_heatmap(&report, &HeatmapSpec::default());
        assert!(default_svg.contains("sign(z) * log10(1 + |z|)"));
        assert!(default_svg.contains("clamped to [-10, 60]"));
        let wide = render_heatmap(&report, &HeatmapSpec::new(-100.0, 100.0).unwrap());
        assert!(wide.contains("clamped to [-100, 100]"));
    }

    #[test]
    fn clamp_interval_must_be_nonempty() {
        assert!(matches!(
            HeatmapSpec::new(5.0, 5.0),
            Err(ReportError::BadClamp { .. })
        ));
        assert!(matches!(
            HeatmapSpec::new(10.0, -10.0),
            Err(ReportError::BadClamp { .. })
        ));
    }

    #[test]
    fn z0_chart_draws_bars_labels_and_undefined_markers() {
        let report = AnalysisReport::build(&mixed_fixture(), TailBound::TwoSided, &[]).unwrap();
        let svg = render_z0_chart(&report);
        for i in 0..report.graph.classes {
            assert!(svg.contains(&format!("data-class=\"{i}\"")));
        }
        // The all-isolated singleton class has zero variance.
        assert!(report.scores.z_isolated[2].is_none());
        assert!(svg.contains("data-class=\"2\" data-z=\"undefined\""));
        assert!(svg.contains(">n/a<"));
        for label in &report.graph.class_labels {
            assert!(svg.contains(&format!(">{label}<")));
        }
    }

    #[test]
    fn rendering_is_deterministic() {
        let report = AnalysisReport::build(&mixed_fixture(), TailBound::TwoSided, &[0.05]).unwrap();
        assert_eq!(
            render_heatmap(&report, &HeatmapSpec::default()),
            render_heatmap(&report, &HeatmapSpec::default())
        );
        assert_eq!(render_z0_chart(&report), render_z0_chart(&report));
        assert_eq!(matrices_csv(&report), matrices_csv(&report));
    }

    #[test]
    fn xml_escaping_covers_class_labels() {
        let nodes: crate::NodeColorMap = [
            ("a", "R&D <core>"),
            ("b", "R&D <core>"),
            ("c", "ops\"team\""),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
        let edges = vec![
            ("a".to_string(), "b".to_string()),
            ("b".to_string(), "c".to_string()),
        ];
        let g = ColoredGraph::build(&edges, &nodes, true).unwrap();
        let report = AnalysisReport::build(&g, TailBound::TwoSided, &[]).unwrap();
        let svg = render_heatmap(&report, &HeatmapSpec::default());
        assert!(svg.contains("R&amp;D &lt;core&gt;"));
        assert!(!svg.contains("R&D <core>"));
    }
}
