//! Parsing and preprocessing for node-color and weighted edge files.
//!
//! The on-disk formats are plain UTF-8 text with `#` comments: a node file
//! with `<label> <class>` per line and an edge file with
//! `<label> <label> [weight]` per line, weights integers in [0, 999].
//! Preprocessing steps mirror what large interaction datasets need before
//! analysis: a confidence cutoff on edge weights, merging of
//! suffix-variant node labels, keeping only mutual directed pairs, mapping
//! numeric attributes into classes by intervals, and renaming classes
//! through an alias map.

use regex::Regex;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::BufRead;
use thiserror::Error;

use crate::NodeColorMap;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("read error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: expected {expected}, got {got} fields: {content:?}")]
    MalformedLine {
        line: usize,
        expected: &'static str,
        got: usize,
        content: String,
    },
    #[error("line {line}: node {label:?} reassigned from class {first:?} to {second:?}")]
    ConflictingColor {
        line: usize,
        label: String,
        first: String,
        second: String,
    },
    #[error("line {line}: weight {weight:?} is not an integer in [0, 999]")]
    BadWeight { line: usize, weight: String },
    #[error("line {line}: cutoff given but this edge has no weight column")]
    CutoffWithoutWeight { line: usize },
    #[error("invalid suffix pattern {pattern:?}: {source}")]
    InvalidPattern {
        pattern: String,
        source: regex::Error,
    },
    #[error("invalid bucketing rule: {reason}")]
    InvalidBucketing { reason: String },
}

/// One line of an edge file: a labeled pair with an optional confidence
/// weight in [0, 999].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawEdgeRecord {
    pub source: String,
    pub target: String,
    pub weight: Option<u32>,
}

/// Parses a node file: one `<label> <class>` pair per line, tab- or
/// whitespace-separated, `#` comments and blank lines skipped. Repeated
/// identical lines are tolerated; relabeling a node is an error.
pub fn parse_node_file(reader: impl BufRead) -> Result<NodeColorMap, IngestError> {
    let mut map = NodeColorMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let content = line.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(IngestError::MalformedLine {
                line: line_no,
                expected: "2 fields (label, class)",
                got: fields.len(),
                content: content.to_string(),
            });
        }
        let (label, class) = (fields[0], fields[1]);
        match map.get(label) {
            None => {
                map.insert(label.to_string(), class.to_string());
            }
            Some(existing) if existing == class => {}
            Some(existing) => {
                return Err(IngestError::ConflictingColor {
                    line: line_no,
                    label: label.to_string(),
                    first: existing.clone(),
                    second: class.to_string(),
                });
            }
        }
    }
    Ok(map)
}

/// Parses an edge file of 2 or 3 whitespace-separated columns. With a
/// cutoff, records whose weight is below it are dropped (the cutoff is
/// inclusive: weight 700 survives cutoff 700), and weightless lines are an
/// error since they cannot be filtered.
pub fn parse_edge_file(
    reader: impl BufRead,
    cutoff: Option<u32>,
) -> Result<Vec<RawEdgeRecord>, IngestError> {
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let content = line.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let weight = match fields.len() {
            2 => None,
            3 => {
                let parsed = fields[2].parse::<u32>().ok().filter(|w| *w <= 999);
                match parsed {
                    Some(w) => Some(w),
                    None => {
                        return Err(IngestError::BadWeight {
                            line: line_no,
                            weight: fields[2].to_string(),
                        })
                    }
                }
            }
            got => {
                return Err(IngestError::MalformedLine {
                    line: line_no,
                    expected: "2 or 3 fields (source, target[, weight])",
                    got,
                    content: content.to_string(),
                })
            }
        };
        if let Some(threshold) = cutoff {
            match weight {
                None => return Err(IngestError::CutoffWithoutWeight { line: line_no }),
                Some(w) if w < threshold => continue,
                Some(_) => {}
            }
        }
        records.push(RawEdgeRecord {
            source: fields[0].to_string(),
            target: fields[1].to_string(),
            weight,
        });
    }
    Ok(records)
}

/// Collapses node labels that differ only by a trailing suffix (for
/// example isoform markers like `_1`, `_2`) onto their base label. The
/// suffix pattern is stripped repeatedly, so `x_1_2` and `x_3` share the
/// base `x` and a second application changes nothing. Merged nodes that
/// disagree on class are assigned `conflict_class`; edges are re-targeted,
/// deduplicated, and merged-away self-loops are dropped.
pub fn merge_suffix_nodes(
    nodes: &NodeColorMap,
    edges: &[(String, String)],
    suffix_pattern: &str,
    conflict_class: &str,
) -> Result<(NodeColorMap, Vec<(String, String)>), IngestError> {
    let re = Regex::new(&format!("(?:{suffix_pattern})$")).map_err(|source| {
        IngestError::InvalidPattern {
            pattern: suffix_pattern.to_string(),
            source,
        }
    })?;
    let strip = |label: &str| -> String {
        let mut base = label.to_string();
        loop {
            let next = re.replace(&base, "").into_owned();
            // A label consisting solely of the suffix keeps its last form
            // rather than collapsing to the empty string.
            if next == base || next.is_empty() {
                return base;
            }
            base = next;
        }
    };

    let mut merged = NodeColorMap::new();
    for (label, class) in nodes {
        let base = strip(label);
        match merged.get(&base) {
            None => {
                merged.insert(base, class.clone());
            }
            Some(existing) if existing == class => {}
            Some(_) => {
                merged.insert(base, conflict_class.to_string());
            }
        }
    }

    let mut seen = BTreeSet::new();
    for (a, b) in edges {
        let (a, b) = (strip(a), strip(b));
        if a == b {
            continue;
        }
        let pair = if a <= b { (a, b) } else { (b, a) };
        seen.insert(pair);
    }
    Ok((merged, seen.into_iter().collect()))
}

/// Keeps an undirected edge for each pair present in both directions in a
/// directed list, deduplicated and sorted. Self-pairs are ignored.
pub fn mutual_only(directed: &[(String, String)]) -> Vec<(String, String)> {
    let forward: HashSet<(&str, &str)> = directed
        .iter()
        .map(|(a, b)| (a.as_str(), b.as_str()))
        .collect();
    let mut out = BTreeSet::new();
    for (a, b) in &forward {
        if a < b && forward.contains(&(*b, *a)) {
            out.insert((a.to_string(), b.to_string()));
        }
    }
    out.into_iter().collect()
}

/// Ordered half-open numeric intervals mapped to class labels, with a
/// fallback class for values no interval covers (missing and non-numeric
/// attributes included).
#[derive(Clone, Debug, PartialEq)]
pub struct BucketingRule {
    intervals: Vec<(f64, f64, String)>,
    fallback: String,
}

impl BucketingRule {
    /// Builds a rule after checking that intervals are well-formed and
    /// pairwise disjoint and that the fallback label is not reused.
    pub fn new(
        mut intervals: Vec<(f64, f64, String)>,
        fallback: String,
    ) -> Result<Self, IngestError> {
        for (lo, hi, label) in &intervals {
            // NaN bounds must fail validation, so test for Less rather than >=.
            if lo.partial_cmp(hi) != Some(std::cmp::Ordering::Less) {
                return Err(IngestError::InvalidBucketing {
                    reason: format!("interval [{lo}, {hi}) for {label:?} is empty"),
                });
            }
            if *label == fallback {
                return Err(IngestError::InvalidBucketing {
                    reason: format!("fallback class {fallback:?} also labels an interval"),
                });
            }
        }
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        for pair in intervals.windows(2) {
            if pair[1].0 < pair[0].1 {
                return Err(IngestError::InvalidBucketing {
                    reason: format!(
                        "intervals [{}, {}) and [{}, {}) overlap",
                        pair[0].0, pair[0].1, pair[1].0, pair[1].1
                    ),
                });
            }
        }
        Ok(BucketingRule {
            intervals,
            fallback,
        })
    }

    /// Parses the key-value rule format: `lo,hi,label` lines plus one
    /// `fallback,label` line; `#` comments and blanks skipped.
    pub fn parse(text: &str) -> Result<Self, IngestError> {
        let mut intervals = Vec::new();
        let mut fallback = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            match fields.as_slice() {
                ["fallback", label] => {
                    if fallback.replace(label.to_string()).is_some() {
                        return Err(IngestError::InvalidBucketing {
                            reason: format!("line {}: second fallback", idx + 1),
                        });
                    }
                }
                [lo, hi, label] => {
                    let parse = |s: &str| -> Result<f64, IngestError> {
                        s.parse().map_err(|_| IngestError::InvalidBucketing {
                            reason: format!("line {}: bad bound {s:?}", idx + 1),
                        })
                    };
                    intervals.push((parse(lo)?, parse(hi)?, label.to_string()));
                }
                _ => {
                    return Err(IngestError::InvalidBucketing {
                        reason: format!("line {}: expected lo,hi,label or fallback,label", idx + 1),
                    })
                }
            }
        }
        let fallback = fallback.ok_or_else(|| IngestError::InvalidBucketing {
            reason: "missing fallback,label line".to_string(),
        })?;
        BucketingRule::new(intervals, fallback)
    }

    /// Class for a single attribute value.
    pub fn class_of(&self, value: Option<f64>) -> &str {
        if let Some(v) = value {
            for (lo, hi, label) in &self.intervals {
                if *lo <= v && v < *hi {
                    return label;
                }
            }
        }
        &self.fallback
    }
}

/// Maps a numeric node attribute (given as the second column of a node
/// file; non-numeric strings count as missing) into classes by interval.
pub fn bucket_attribute(attrs: &NodeColorMap, rule: &BucketingRule) -> NodeColorMap {
    attrs
        .iter()
        .map(|(label, raw)| {
            let value = raw.trim().parse::<f64>().ok();
            (label.clone(), rule.class_of(value).to_string())
        })
        .collect()
}

/// Parses a class-alias map: `old,new` lines with `#` comments. Aliases
/// apply one step (no chasing of chains).
pub fn parse_alias_map(text: &str) -> Result<BTreeMap<String, String>, IngestError> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(IngestError::MalformedLine {
                line: idx + 1,
                expected: "2 comma-separated fields (old, new)",
                got: fields.len(),
                content: line.to_string(),
            });
        }
        map.insert(fields[0].to_string(), fields[1].to_string());
    }
    Ok(map)
}

/// Renames classes through the alias map, leaving unmapped classes alone.
pub fn apply_aliases(nodes: &NodeColorMap, aliases: &BTreeMap<String, String>) -> NodeColorMap {
    nodes
        .iter()
        .map(|(label, class)| {
            let class = aliases.get(class).cloned().unwrap_or_else(|| class.clone());
            (label.clone(), class)
        })
        .collect()
}

/// Writes the canonical tab-separated node file.
pub fn write_node_file(out: &mut impl std::io::Write, nodes: &NodeColorMap) -> std::io::Result<()> {
    for (label, class) in nodes {
        writeln!(out, "{label}\t{class}")?;
    }
    Ok(())
}

/// Writes the canonical tab-separated edge file; weights are included when
/// present.
pub fn write_edge_file(
    out: &mut impl std::io::Write,
    edges: &[RawEdgeRecord],
) -> std::io::Result<()> {
    for record in edges {
        match record.weight {
            Some(w) => writeln!(out, "{}\t{}\t{w}", record.source, record.target)?,
            None => writeln!(out, "{}\t{}", record.source, record.target)?,
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ColoredGraph;
    use proptest::prelude::*;
    use std::io::Cursor;

    fn own(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect()
    }

    #[test]
    fn node_file_basic_and_duplicates() {
        let map = parse_node_file(Cursor::new("p1\tJ\np2 K\n\n# comment\np1\tJ\n")).unwrap();
        assert_eq!(map.len(), 2);
        assert_eq!(map["p1"], "J");
        assert_eq!(map["p2"], "K");
    }

    #[test]
    fn node_file_conflicting_reassignment_names_the_label() {
        let err = parse_node_file(Cursor::new("p1 J\np1 K\n")).unwrap_err();
        match err {
            IngestError::ConflictingColor {
                line,
                label,
                first,
                second,
            } => {
                assert_eq!(line, 2);
                assert_eq!(label, "p1");
                assert_eq!(first, "J");
                assert_eq!(second, "K");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn node_file_malformed_line_number() {
        let err = parse_node_file(Cursor::new("a J\nb K\nc\n")).unwrap_err();
        match err {
            IngestError::MalformedLine { line, got, .. } => {
                assert_eq!(line, 3);
                assert_eq!(got, 1);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn edge_file_cutoff_is_inclusive() {
        let text = "a b 700\nc d 699\ne f 999\ng h 0\n";
        let records = parse_edge_file(Cursor::new(text), Some(700)).unwrap();
        let names: Vec<&str> = records.iter().map(|r| r.source.as_str()).collect();
        assert_eq!(names, vec!["a", "e"]);
        // Without a cutoff everything is kept.
        let all = parse_edge_file(Cursor::new(text), None).unwrap();
        assert_eq!(all.len(), 4);
    }

    #[test]
    fn edge_file_cutoff_requires_weights() {
        let err = parse_edge_file(Cursor::new("a b 800\nc d\n"), Some(700)).unwrap_err();
        assert!(matches!(err, IngestError::CutoffWithoutWeight { line: 2 }));
        // Unweighted file without cutoff parses fine.
        let records = parse_edge_file(Cursor::new("a b\nc d\n"), None).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].weight, None);
    }

    #[test]
    fn edge_file_rejects_out_of_range_weights() {
        for bad in ["a b 1000", "a b -3", "a b high"] {
            let err = parse_edge_file(Cursor::new(bad), None).unwrap_err();
            assert!(matches!(err, IngestError::BadWeight { line: 1, .. }), "{bad}");
        }
        let err = parse_edge_file(Cursor::new("a b c d\n"), None).unwrap_err();
        assert!(matches!(err, IngestError::MalformedLine { line: 1, .. }));
    }

    #[test]
    fn suffix_merge_examples() {
        let mut nodes = NodeColorMap::new();
        nodes.insert("jhp0681_1".into(), "J".into());
        nodes.insert("jhp0681_2".into(), "J".into());
        nodes.insert("other".into(), "K".into());
        let edges = own(&[("jhp0681_1", "other"), ("jhp0681_2", "other")]);
        let (merged, new_edges) = merge_suffix_nodes(&nodes, &edges, r"_\d+", "X").unwrap();
        assert_eq!(merged.len(), 2);
        assert_eq!(merged["jhp0681"], "J");
        assert_eq!(new_edges, own(&[("jhp0681", "other")]));

        // Class disagreement resolves to the conflict class.
        let mut nodes = NodeColorMap::new();
        nodes.insert("jhp0681_1".into(), "J".into());
        nodes.insert("jhp0681_2".into(), "K".into());
        let (merged, _) = merge_suffix_nodes(&nodes, &[], r"_\d+", "X").unwrap();
        assert_eq!(merged["jhp0681"], "X");
    }

    #[test]
    fn suffix_merge_drops_merge_created_self_loops() {
        let mut nodes = NodeColorMap::new();
        nodes.insert("a_1".into(), "J".into());
        nodes.insert("a_2".into(), "J".into());
        let edges = own(&[("a_1", "a_2")]);
        let (_, new_edges) = merge_suffix_nodes(&nodes, &edges, r"_\d+", "X").unwrap();
        assert!(new_edges.is_empty());
    }

    #[test]
    fn suffix_merge_without_suffixes_is_identity() {
        let mut nodes = NodeColorMap::new();
        nodes.insert("alpha".into(), "J".into());
        nodes.insert("beta".into(), "K".into());
        let edges = own(&[("alpha", "beta")]);
        let (merged, new_edges) = merge_suffix_nodes(&nodes, &edges, r"_\d+", "X").unwrap();
        assert_eq!(merged, nodes);
        assert_eq!(new_edges, edges);
    }

    #[test]
    fn suffix_merge_rejects_bad_patterns() {
        let nodes = NodeColorMap::new();
        assert!(matches!(
            merge_suffix_nodes(&nodes, &[], r"(unclosed", "X"),
            Err(IngestError::InvalidPattern { .. })
        ));
    }

    proptest! {
        #[test]
        fn suffix_merge_is_idempotent(
            labels in proptest::collection::vec("[a-c]{1,3}(_[0-9]{1,2}){0,3}", 1..12),
            classes in proptest::collection::vec("[JKX]", 12),
        ) {
            let mut nodes = NodeColorMap::new();
            for (label, class) in labels.iter().zip(&classes) {
                nodes.entry(label.clone()).or_insert_with(|| class.clone());
            }
            let mut edges = Vec::new();
            for pair in labels.windows(2) {
                edges.push((pair[0].clone(), pair[1].clone()));
            }
            let (n1, e1) = merge_suffix_nodes(&nodes, &edges, r"_\d+", "X").unwrap();
            let (n2, e2) = merge_suffix_nodes(&n1, &e1, r"_\d+", "X").unwrap();
            prop_assert_eq!(n1, n2);
            prop_assert_eq!(e1, e2);
        }
    }

    #[test]
    fn mutual_only_examples() {
        let out = mutual_only(&own(&[("a", "b"), ("b", "a"), ("b", "c")]));
        assert_eq!(out, own(&[("a", "b")]));
        assert!(mutual_only(&[]).is_empty());
        let fully = own(&[("a", "b"), ("b", "a"), ("b", "c"), ("c", "b")]);
        let out = mutual_only(&fully);
        assert_eq!(out, own(&[("a", "b"), ("b", "c")]));
        // Symmetric and duplicate-free by construction.
        let dup = mutual_only(&own(&[("a", "b"), ("b", "a"), ("a", "b"), ("b", "a")]));
        assert_eq!(dup, own(&[("a", "b")]));
    }

    fn age_rule() -> BucketingRule {
        BucketingRule::new(
            vec![
                (12.0, 18.0, "C".into()),
                (18.0, 28.0, "D".into()),
                (28.0, 60.0, "E".into()),
            ],
            "X".into(),
        )
        .unwrap()
    }

    #[test]
    fn bucketing_examples() {
        let rule = age_rule();
        assert_eq!(rule.class_of(Some(17.0)), "C");
        assert_eq!(rule.class_of(Some(18.0)), "D");
        assert_eq!(rule.class_of(Some(105.0)), "X");
        assert_eq!(rule.class_of(Some(5.0)), "X");
        assert_eq!(rule.class_of(None), "X");
    }

    #[test]
    fn bucket_attribute_parses_numbers_and_falls_back() {
        let mut attrs = NodeColorMap::new();
        attrs.insert("u1".into(), "17".into());
        attrs.insert("u2".into(), "105".into());
        attrs.insert("u3".into(), "unknown".into());
        let classes = bucket_attribute(&attrs, &age_rule());
        assert_eq!(classes["u1"], "C");
        assert_eq!(classes["u2"], "X");
        assert_eq!(classes["u3"], "X");
    }

    #[test]
    fn bucketing_validation() {
        assert!(matches!(
            BucketingRule::new(vec![(12.0, 18.0, "C".into()), (15.0, 20.0, "D".into())], "X".into()),
            Err(IngestError::InvalidBucketing { .. })
        ));
        assert!(matches!(
            BucketingRule::new(vec![(12.0, 12.0, "C".into())], "X".into()),
            Err(IngestError::InvalidBucketing { .. })
        ));
        assert!(matches!(
            BucketingRule::new(vec![(12.0, 18.0, "X".into())], "X".into()),
            Err(IngestError::InvalidBucketing { .. })
        ));
    }

    #[test]
    fn bucketing_rule_parses_config_text() {
        let rule = BucketingRule::parse("# ages\n12,18,C\n18,28,D\nfallback,X\n").unwrap();
        assert_eq!(rule.class_of(Some(13.0)), "C");
        assert_eq!(rule.class_of(Some(20.0)), "D");
        assert_eq!(rule.class_of(Some(80.0)), "X");
        assert!(BucketingRule::parse("12,18,C\n").is_err());
        assert!(BucketingRule::parse("12,C\nfallback,X\n").is_err());
    }

    #[test]
    fn alias_map_parse_and_apply() {
        let aliases = parse_alias_map("# merge classes\nR,X\nS,X\n").unwrap();
        let mut nodes = NodeColorMap::new();
        nodes.insert("a".into(), "R".into());
        nodes.insert("b".into(), "S".into());
        nodes.insert("c".into(), "J".into());
        let renamed = apply_aliases(&nodes, &aliases);
        assert_eq!(renamed["a"], "X");
        assert_eq!(renamed["b"], "X");
        assert_eq!(renamed["c"], "J");
        assert!(parse_alias_map("R\n").is_err());
    }

    #[test]
    fn write_then_parse_round_trips_the_graph() {
        let mut nodes = NodeColorMap::new();
        nodes.insert("n1".into(), "J".into());
        nodes.insert("n2".into(), "J".into());
        nodes.insert("n3".into(), "K".into());
        let edges = own(&[("n1", "n2"), ("n2", "n3")]);
        let g = ColoredGraph::build(&edges, &nodes, false).unwrap();

        let mut node_text = Vec::new();
        write_node_file(&mut node_text, &nodes).unwrap();
        let records: Vec<RawEdgeRecord> = edges
            .iter()
            .map(|(a, b)| RawEdgeRecord {
                source: a.clone(),
                target: b.clone(),
                weight: Some(900),
            })
            .collect();
        let mut edge_text = Vec::new();
        write_edge_file(&mut edge_text, &records).unwrap();

        let nodes2 = parse_node_file(Cursor::new(node_text)).unwrap();
        let records2 = parse_edge_file(Cursor::new(edge_text), Some(700)).unwrap();
        let edges2: Vec<(String, String)> = records2
            .into_iter()
            .map(|r| (r.source, r.target))
            .collect();
        let h = ColoredGraph::build(&edges2, &nodes2, false).unwrap();

        assert_eq!(g.num_nodes(), h.num_nodes());
        assert_eq!(g.num_edges(), h.num_edges());
        for v in 0..g.num_nodes() as u32 {
            assert_eq!(g.label(v), h.label(v));
            assert_eq!(
                g.color_label(g.color(v)),
                h.color_label(h.color(v))
            );
        }
        let ge: Vec<_> = g.edges().collect();
        let he: Vec<_> = h.edges().collect();
        assert_eq!(ge, he);
    }
}
