//! Deterministic vector-graphics output: spider charts for broad-category
//! shares, histograms for per-KA coverage, and annotated topic trees (SVG
//! plus DOT graph text).
//!
//! Documents are byte-identical for identical inputs — no timestamps, no
//! randomness, all coordinates formatted to two decimals. Coverage state is
//! encoded redundantly in colour and shape (filled / outlined / dashed) so
//! monochrome reproductions stay readable.

use std::fmt::Write as _;

use thiserror::Error;

use crate::analytics::{BroadShares, KACoverage, NodeFlags, TreeAnnotation};
use crate::profile::TimePoint;
use crate::taxonomy::{KnowledgeArea, TopicNode};

// ---------------------------------------------------------------------------
// Render options
// ---------------------------------------------------------------------------

/// A named colour scheme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Palette {
    pub name: String,
    pub data_fill: String,
    pub data_stroke: String,
    pub axis: String,
    pub muted: String,
    pub text: String,
}

impl Default for Palette {
    fn default() -> Self {
        Palette::named("default").unwrap()
    }
}

impl Palette {
    /// Built-in schemes: `default` (blue on grey) and `mono` (black/grey).
    pub fn named(name: &str) -> Option<Palette> {
        match name {
            "default" => Some(Palette {
                name: "default".to_string(),
                data_fill: "#4c78a8".to_string(),
                data_stroke: "#2f5585".to_string(),
                axis: "#444444".to_string(),
                muted: "#b4b4b4".to_string(),
                text: "#111111".to_string(),
            }),
            "mono" => Some(Palette {
                name: "mono".to_string(),
                data_fill: "#555555".to_string(),
                data_stroke: "#000000".to_string(),
                axis: "#000000".to_string(),
                muted: "#aaaaaa".to_string(),
                text: "#000000".to_string(),
            }),
            _ => None,
        }
    }
}

/// Presentation parameters shared by all three views. `prune_uncovered`
/// applies to trees only: it drops uncovered subtrees below level 2 while
/// keeping level-2 gaps visible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderSpec {
    pub title: String,
    pub width: u32,
    pub height: u32,
    pub palette: Palette,
    pub prune_uncovered: bool,
}

impl Default for RenderSpec {
    fn default() -> Self {
        RenderSpec {
            title: String::new(),
            width: 640,
            height: 480,
            palette: Palette::default(),
            prune_uncovered: false,
        }
    }
}

impl RenderSpec {
    fn check(&self) -> Result<(), RenderError> {
        if self.width == 0 || self.height == 0 {
            return Err(RenderError::BadDimensions {
                width: self.width,
                height: self.height,
            });
        }
        Ok(())
    }
}

/// The two documents a tree render produces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeRender {
    pub svg: String,
    pub dot: String,
}

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("render dimensions must be positive (got {width}×{height})")]
    BadDimensions { width: u32, height: u32 },
    #[error("spider charts need at least 3 axes, got {0}")]
    TooFewAxes(usize),
    #[error("annotation references node `{0}` outside the knowledge-area tree")]
    UnknownNode(String),
    #[error("annotation covers {annotation}, tree render got knowledge area {area}")]
    KaMismatch { annotation: String, area: String },
    #[error("annotation carries no entry for the root of {0}")]
    EmptyAnnotation(String),
}

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
        .replace('\'', "&apos;")
}

fn svg_open(out: &mut String, width: f64, height: f64, spec: &RenderSpec) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {:.2} {:.2}\">",
        spec.width, spec.height, width, height
    );
    if !spec.title.is_empty() {
        let _ = writeln!(
            out,
            "  <text class=\"title\" x=\"{:.2}\" y=\"20.00\" text-anchor=\"middle\" font-size=\"14\" fill=\"{}\">{}</text>",
            width / 2.0,
            spec.palette.text,
            escape_xml(&spec.title)
        );
    }
}

/// Derive an output file name from view, subject and optional cut-off date.
pub fn output_file_name(view: &str, subject: &str, as_of: Option<TimePoint>, ext: &str) -> String {
    let slug: String = subject
        .to_lowercase()
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { '-' })
        .collect::<String>()
        .split('-')
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join("-");
    match as_of {
        Some(at) => format!("{view}_{slug}_{at}.{ext}"),
        None => format!("{view}_{slug}.{ext}"),
    }
}

// ---------------------------------------------------------------------------
// Spider chart
// ---------------------------------------------------------------------------

/// Radar chart of broad-category shares, axes in reporting order with an
/// Introduction axis appended only when unattributed triplets exist. Scale
/// is 0–100%.
pub fn render_spider(shares: &BroadShares, spec: &RenderSpec) -> Result<String, RenderError> {
    spec.check()?;
    let mut axes: Vec<(String, f64)> = shares
        .shares
        .iter()
        .map(|s| (s.name.clone(), s.share.as_f64() / 100.0))
        .collect();
    if shares.unattributed_count > 0 {
        axes.push((
            "Introduction".to_string(),
            shares.unattributed.as_f64() / 100.0,
        ));
    }
    if axes.len() < 3 {
        return Err(RenderError::TooFewAxes(axes.len()));
    }

    let w = f64::from(spec.width);
    let h = f64::from(spec.height);
    let cx = w / 2.0;
    let cy = h / 2.0;
    let radius = (w.min(h) / 2.0 - 60.0).max(10.0);
    let n = axes.len();
    let point = |i: usize, r: f64| -> (f64, f64) {
        let theta =
            -std::f64::consts::FRAC_PI_2 + 2.0 * std::f64::consts::PI * (i as f64) / (n as f64);
        (cx + r * theta.cos(), cy + r * theta.sin())
    };

    let mut out = String::new();
    svg_open(&mut out, w, h, spec);

    for ring in 1..=4 {
        let r = radius * f64::from(ring) / 4.0;
        let pts: Vec<String> = (0..n)
            .map(|i| {
                let (x, y) = point(i, r);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            out,
            "  <polygon class=\"grid\" points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"0.5\"/>",
            pts.join(" "),
            spec.palette.muted
        );
    }

    for (i, (label, _)) in axes.iter().enumerate() {
        let (x, y) = point(i, radius);
        let _ = writeln!(
            out,
            "  <line class=\"axis\" x1=\"{cx:.2}\" y1=\"{cy:.2}\" x2=\"{x:.2}\" y2=\"{y:.2}\" stroke=\"{}\" stroke-width=\"1\"/>",
            spec.palette.axis
        );
        let (lx, ly) = point(i, radius + 18.0);
        let _ = writeln!(
            out,
            "  <text class=\"axis-label\" x=\"{lx:.2}\" y=\"{ly:.2}\" text-anchor=\"middle\" font-size=\"10\" fill=\"{}\">{}</text>",
            spec.palette.text,
            escape_xml(label)
        );
    }

    let pts: Vec<String> = axes
        .iter()
        .enumerate()
        .map(|(i, (_, v))| {
            let (x, y) = point(i, radius * v);
            format!("{x:.2},{y:.2}")
        })
        .collect();
    let _ = writeln!(
        out,
        "  <polygon class=\"data\" points=\"{}\" fill=\"{}\" fill-opacity=\"0.45\" stroke=\"{}\" stroke-width=\"2\"/>",
        pts.join(" "),
        spec.palette.data_fill,
        spec.palette.data_stroke
    );

    out.push_str("</svg>\n");
    Ok(out)
}

// ---------------------------------------------------------------------------
// Histogram
// ---------------------------------------------------------------------------

/// Bar chart of per-KA covered-topic counts, one bar per knowledge area in
/// reporting order, zero bars included. The y-axis auto-scales to the
/// maximum count with integer ticks.
pub fn render_histogram(rows: &[KACoverage], spec: &RenderSpec) -> Result<String, RenderError> {
    spec.check()?;
    let w = f64::from(spec.width);
    let h = f64::from(spec.height);
    let (left, right, top, bottom) = (50.0, 20.0, 40.0, 50.0);
    let plot_w = (w - left - right).max(1.0);
    let plot_h = (h - top - bottom).max(1.0);

    let ymax_data = rows.iter().map(|r| r.covered).max().unwrap_or(0);
    let step = (ymax_data.div_ceil(8)).max(1);
    let y_top = (step * ymax_data.div_ceil(step).max(1)) as f64;

    let mut out = String::new();
    svg_open(&mut out, w, h, spec);

    // Axes.
    let _ = writeln!(
        out,
        "  <line class=\"axis\" x1=\"{left:.2}\" y1=\"{top:.2}\" x2=\"{left:.2}\" y2=\"{:.2}\" stroke=\"{}\" stroke-width=\"1\"/>",
        top + plot_h,
        spec.palette.axis
    );
    let _ = writeln!(
        out,
        "  <line class=\"axis\" x1=\"{left:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{}\" stroke-width=\"1\"/>",
        top + plot_h,
        left + plot_w,
        top + plot_h,
        spec.palette.axis
    );

    // Integer ticks.
    let mut v = 0usize;
    while (v as f64) <= y_top {
        let y = top + plot_h - (v as f64 / y_top) * plot_h;
        let _ = writeln!(
            out,
            "  <line class=\"tick\" x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{left:.2}\" y2=\"{y:.2}\" stroke=\"{}\" stroke-width=\"1\"/>",
            left - 4.0,
            spec.palette.axis
        );
        let _ = writeln!(
            out,
            "  <text class=\"tick-label\" x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-size=\"9\" fill=\"{}\">{v}</text>",
            left - 7.0,
            y + 3.0,
            spec.palette.text
        );
        v += step;
    }

    let n = rows.len().max(1);
    let slot = plot_w / n as f64;
    for (i, row) in rows.iter().enumerate() {
        let bar_h = (row.covered as f64 / y_top) * plot_h;
        let x = left + i as f64 * slot + slot * 0.2;
        let y = top + plot_h - bar_h;
        let _ = writeln!(
            out,
            "  <rect class=\"bar\" x=\"{x:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{bar_h:.2}\" fill=\"{}\" stroke=\"{}\" stroke-width=\"1\"/>",
            slot * 0.6,
            spec.palette.data_fill,
            spec.palette.data_stroke
        );
        let _ = writeln!(
            out,
            "  <text class=\"label\" x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"8\" fill=\"{}\">{}</text>",
            left + i as f64 * slot + slot / 2.0,
            top + plot_h + 14.0,
            spec.palette.text,
            escape_xml(&row.ka)
        );
    }

    out.push_str("</svg>\n");
    Ok(out)
}

// ---------------------------------------------------------------------------
// Annotated tree
// ---------------------------------------------------------------------------

const TREE_BOX_W: f64 = 170.0;
const TREE_BOX_H: f64 = 20.0;
const TREE_ROW_H: f64 = 28.0;
const TREE_COL_GAP: f64 = 60.0;
const TREE_MARGIN: f64 = 24.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NodeState {
    Practiced,
    TotalOnly,
    Uncovered,
}

fn node_state(flags: NodeFlags) -> NodeState {
    if flags.covered_practiced {
        NodeState::Practiced
    } else if flags.covered_total {
        NodeState::TotalOnly
    } else {
        NodeState::Uncovered
    }
}

/// Layered drawing plus a DOT graph of one KA's tree under a total/practiced
/// annotation: practiced nodes filled, total-only nodes outlined, uncovered
/// nodes dashed and dimmed.
pub fn render_tree(
    area: &KnowledgeArea,
    ann: &TreeAnnotation,
    spec: &RenderSpec,
) -> Result<TreeRender, RenderError> {
    spec.check()?;
    if ann.ka != area.code {
        return Err(RenderError::KaMismatch {
            annotation: ann.ka.clone(),
            area: area.code.clone(),
        });
    }
    for id in ann.nodes.keys() {
        if area.root.find(id).is_none() {
            return Err(RenderError::UnknownNode(id.clone()));
        }
    }
    if !ann.nodes.contains_key(&area.root.id) {
        return Err(RenderError::EmptyAnnotation(area.code.clone()));
    }

    let flags_of = |node: &TopicNode| ann.nodes.get(&node.id).copied().unwrap_or_default();
    let visible = |node: &TopicNode| -> bool {
        !(spec.prune_uncovered && node.level > 2 && !flags_of(node).covered_total)
    };

    // Post-order placement: leaves take successive rows, parents centre on
    // their children.
    fn place<'a>(
        node: &'a TopicNode,
        visible: &dyn Fn(&TopicNode) -> bool,
        slot: &mut usize,
        ys: &mut Vec<(&'a TopicNode, f64)>,
    ) -> f64 {
        let kids: Vec<&TopicNode> = node.children.iter().filter(|c| visible(c)).collect();
        let y = if kids.is_empty() {
            let y = TREE_MARGIN + 30.0 + (*slot as f64) * TREE_ROW_H;
            *slot += 1;
            y
        } else {
            let child_ys: Vec<f64> = kids.iter().map(|k| place(k, visible, slot, ys)).collect();
            (child_ys[0] + child_ys[child_ys.len() - 1]) / 2.0
        };
        ys.push((node, y));
        y
    }

    let mut slot = 0usize;
    let mut placed: Vec<(&TopicNode, f64)> = Vec::new();
    place(&area.root, &visible, &mut slot, &mut placed);

    let max_level = placed.iter().map(|(n, _)| n.level).max().unwrap_or(1);
    let natural_w = TREE_MARGIN * 2.0
        + f64::from(max_level) * TREE_BOX_W
        + f64::from(max_level - 1) * TREE_COL_GAP;
    let natural_h = TREE_MARGIN * 2.0 + 30.0 + (slot.max(1) as f64) * TREE_ROW_H;
    let x_of = |level: u32| TREE_MARGIN + f64::from(level - 1) * (TREE_BOX_W + TREE_COL_GAP);
    let y_of: std::collections::BTreeMap<&str, f64> =
        placed.iter().map(|(n, y)| (n.id.as_str(), *y)).collect();

    let mut out = String::new();
    svg_open(&mut out, natural_w, natural_h, spec);

    // Edges first so boxes draw over them; pre-order for a stable document.
    for node in area.root.walk().filter(|n| visible(n)) {
        for child in node.children.iter().filter(|c| visible(c)) {
            let _ = writeln!(
                out,
                "  <line class=\"edge\" x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{}\" stroke-width=\"1\"/>",
                x_of(node.level) + TREE_BOX_W,
                y_of[node.id.as_str()],
                x_of(child.level),
                y_of[child.id.as_str()],
                spec.palette.muted
            );
        }
    }

    for node in area.root.walk().filter(|n| visible(n)) {
        let state = node_state(flags_of(node));
        let y = y_of[node.id.as_str()];
        let x = x_of(node.level);
        let (class, fill, stroke, dash, text_fill) = match state {
            NodeState::Practiced => (
                "node practiced",
                spec.palette.data_fill.as_str(),
                spec.palette.data_stroke.as_str(),
                "",
                "#ffffff",
            ),
            NodeState::TotalOnly => (
                "node total",
                "#ffffff",
                spec.palette.data_stroke.as_str(),
                "",
                spec.palette.text.as_str(),
            ),
            NodeState::Uncovered => (
                "node uncovered",
                "#ffffff",
                spec.palette.muted.as_str(),
                " stroke-dasharray=\"4 2\"",
                spec.palette.muted.as_str(),
            ),
        };
        let _ = writeln!(
            out,
            "  <rect class=\"{class}\" x=\"{x:.2}\" y=\"{:.2}\" width=\"{TREE_BOX_W:.2}\" height=\"{TREE_BOX_H:.2}\" rx=\"3\" fill=\"{fill}\" stroke=\"{stroke}\" stroke-width=\"{}\"{dash}/>",
            y - TREE_BOX_H / 2.0,
            if state == NodeState::TotalOnly { 2 } else { 1 },
        );
        let _ = writeln!(
            out,
            "  <text class=\"node-label\" x=\"{:.2}\" y=\"{:.2}\" font-size=\"10\" fill=\"{text_fill}\">{}</text>",
            x + 6.0,
            y + 3.5,
            escape_xml(&node.label)
        );
    }

    out.push_str("</svg>\n");

    Ok(TreeRender {
        dot: render_dot(area, ann, spec, &visible),
        svg: out,
    })
}

fn render_dot(
    area: &KnowledgeArea,
    ann: &TreeAnnotation,
    spec: &RenderSpec,
    visible: &dyn Fn(&TopicNode) -> bool,
) -> String {
    let quote = |s: &str| format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""));
    let mut dot = String::new();
    let _ = writeln!(dot, "digraph {} {{", quote(&area.code));
    let _ = writeln!(dot, "  rankdir=LR;");
    let _ = writeln!(dot, "  node [shape=box, fontsize=10];");
    if !spec.title.is_empty() {
        let _ = writeln!(dot, "  label={};", quote(&spec.title));
    }
    for node in area.root.walk().filter(|n| visible(n)) {
        let flags = ann.nodes.get(&node.id).copied().unwrap_or_default();
        let attrs = match node_state(flags) {
            NodeState::Practiced => format!(
                "style=filled, fillcolor={}, fontcolor=\"#ffffff\"",
                quote(&spec.palette.data_fill)
            ),
            NodeState::TotalOnly => {
                format!("color={}, penwidth=2", quote(&spec.palette.data_stroke))
            }
            NodeState::Uncovered => {
                format!("style=dashed, color={}", quote(&spec.palette.muted))
            }
        };
        let _ = writeln!(
            dot,
            "  {} [label={}, {attrs}];",
            quote(&node.id),
            quote(&node.label)
        );
    }
    for node in area.root.walk().filter(|n| visible(n)) {
        for child in node.children.iter().filter(|c| visible(c)) {
            let _ = writeln!(dot, "  {} -> {};", quote(&node.id), quote(&child.id));
        }
    }
    dot.push_str("}\n");
    dot
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::{annotate_tree, broad_shares, ka_coverage};
    use crate::mapping::MappingTriplet;
    use crate::profile::{EmployeeProfile, ProvenancedTriplet, SourceKind, ValidityInterval};
    use crate::testutil::{self, date};

    fn profile(triplets: &[(&str, &str, u32)], expired: &[(&str, &str, u32)]) -> EmployeeProfile {
        let mk = |list: &[(&str, &str, u32)], validity: ValidityInterval, label: &str| {
            list.iter()
                .map(|(ka, topic, depth)| ProvenancedTriplet {
                    triplet: MappingTriplet::new(*ka, *topic, *depth),
                    kind: SourceKind::Tra,
                    source_label: label.to_string(),
                    validity,
                })
                .collect::<Vec<_>>()
        };
        let mut all = mk(
            triplets,
            ValidityInterval::open_from(date("2010-01-01")),
            "live",
        );
        all.extend(mk(
            expired,
            ValidityInterval::closed(date("2010-01-01"), date("2012-01-01")),
            "stale",
        ));
        EmployeeProfile {
            employee: "e".to_string(),
            triplets: all.into_iter().collect(),
            as_of: None,
        }
    }

    fn attr(line: &str, name: &str) -> String {
        let tag = format!("{name}=\"");
        let start = line.find(&tag).unwrap() + tag.len();
        let end = line[start..].find('"').unwrap() + start;
        line[start..end].to_string()
    }

    #[test]
    fn spider_is_deterministic_and_escapes_xml() {
        let tax = testutil::tax();
        let p = profile(&[("ONE", "first-area", 1)], &[]);
        let shares = broad_shares(&p, &tax);
        let spec = RenderSpec {
            title: "A & B <chart>".to_string(),
            ..RenderSpec::default()
        };
        let a = render_spider(&shares, &spec).unwrap();
        let b = render_spider(&shares, &spec).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("A &amp; B &lt;chart&gt;"));
        assert!(!a.contains("<chart>"));
    }

    #[test]
    fn spider_geometry_recovers_shares() {
        let tax = testutil::tax();
        // 3 of 4 in ALPHA, 1 in BETA.
        let p = profile(
            &[
                ("ONE", "first-area", 1),
                ("ONE", "first-area/part-a", 2),
                ("THREE", "third-area", 1),
                ("TWO", "second-area", 1),
            ],
            &[],
        );
        let shares = broad_shares(&p, &tax);
        let spec = RenderSpec::default();
        let svg = render_spider(&shares, &spec).unwrap();

        let data_line = svg.lines().find(|l| l.contains("class=\"data\"")).unwrap();
        let points = attr(data_line, "points");
        let coords: Vec<(f64, f64)> = points
            .split(' ')
            .map(|p| {
                let (x, y) = p.split_once(',').unwrap();
                (x.parse().unwrap(), y.parse().unwrap())
            })
            .collect();
        assert_eq!(coords.len(), 5);

        let (cx, cy) = (320.0, 240.0);
        let radius = 240.0 - 60.0;
        let measured: Vec<f64> = coords
            .iter()
            .map(|(x, y)| (((x - cx).powi(2) + (y - cy).powi(2)).sqrt()) / radius)
            .collect();
        let expected = [0.75, 0.25, 0.0, 0.0, 0.0];
        for (m, e) in measured.iter().zip(expected) {
            assert!((m - e).abs() < 0.005, "measured {m}, expected {e}");
        }
    }

    #[test]
    fn spider_adds_intro_axis_only_when_unattributed() {
        let tax = testutil::tax();
        let spec = RenderSpec::default();
        let without = broad_shares(&profile(&[("ONE", "first-area", 1)], &[]), &tax);
        let svg = render_spider(&without, &spec).unwrap();
        assert_eq!(svg.matches("class=\"axis\"").count(), 5);
        assert!(!svg.contains(">Introduction<"));

        let with = broad_shares(
            &profile(
                &[("ONE", "first-area", 1), ("INTRO", "introduction", 1)],
                &[],
            ),
            &tax,
        );
        let svg = render_spider(&with, &spec).unwrap();
        assert_eq!(svg.matches("class=\"axis\"").count(), 6);
        assert!(svg.contains(">Introduction<"));
    }

    #[test]
    fn spider_zero_profile_collapses_to_centre() {
        let tax = testutil::tax();
        let shares = broad_shares(&profile(&[], &[]), &tax);
        let svg = render_spider(&shares, &RenderSpec::default()).unwrap();
        let data_line = svg.lines().find(|l| l.contains("class=\"data\"")).unwrap();
        for pair in attr(data_line, "points").split(' ') {
            assert_eq!(pair, "320.00,240.00");
        }
        // Axes are still drawn.
        assert_eq!(svg.matches("class=\"axis\"").count(), 5);
    }

    #[test]
    fn spider_rejects_zero_dimensions() {
        let tax = testutil::tax();
        let shares = broad_shares(&profile(&[], &[]), &tax);
        let spec = RenderSpec {
            width: 0,
            ..RenderSpec::default()
        };
        assert!(matches!(
            render_spider(&shares, &spec),
            Err(RenderError::BadDimensions { .. })
        ));
    }

    #[test]
    fn histogram_bars_scale_with_counts() {
        let tax = testutil::tax();
        let p = profile(
            &[
                ("ONE", "first-area", 1),
                ("ONE", "first-area/part-a", 2),
                ("TWO", "second-area", 1),
            ],
            &[],
        );
        let rows = ka_coverage(&p, &tax, 2);
        let svg = render_histogram(&rows, &RenderSpec::default()).unwrap();
        let heights: Vec<f64> = svg
            .lines()
            .filter(|l| l.contains("class=\"bar\""))
            .map(|l| attr(l, "height").parse().unwrap())
            .collect();
        assert_eq!(heights.len(), 5);
        // ONE covered 2, TWO covered 1, rest 0; y-axis tops out at 2.
        let plot_h = 480.0 - 40.0 - 50.0;
        assert!((heights[0] - plot_h).abs() < 0.01);
        assert!((heights[2] - plot_h / 2.0).abs() < 0.01);
        assert_eq!(heights[1], 0.0);
        assert_eq!(heights[4], 0.0);
    }

    #[test]
    fn histogram_handles_empty_coverage() {
        let tax = testutil::tax();
        let rows = ka_coverage(&profile(&[], &[]), &tax, 2);
        let svg = render_histogram(&rows, &RenderSpec::default()).unwrap();
        let bars: Vec<&str> = svg
            .lines()
            .filter(|l| l.contains("class=\"bar\""))
            .collect();
        assert_eq!(bars.len(), 5);
        for bar in bars {
            assert_eq!(attr(bar, "height"), "0.00");
        }
        // KA labels still present.
        for code in ["ONE", "TWO", "THREE", "FOUR", "INTRO"] {
            assert!(svg.contains(&format!(">{code}<")));
        }
    }

    #[test]
    fn histogram_is_deterministic() {
        let tax = testutil::tax();
        let rows = ka_coverage(&profile(&[("FOUR", "fourth-area", 1)], &[]), &tax, 2);
        let spec = RenderSpec::default();
        assert_eq!(
            render_histogram(&rows, &spec).unwrap(),
            render_histogram(&rows, &spec).unwrap()
        );
    }

    #[test]
    fn tree_states_follow_annotation() {
        let tax = testutil::tax();
        // Live level-2 topic; expired level-3 leaf beneath the other branch.
        let p = profile(
            &[("ONE", "first-area/part-b", 2)],
            &[("ONE", "first-area/part-a/detail", 3)],
        );
        let ann = annotate_tree(&[p], &tax, "ONE", date("2024-06-01")).unwrap();
        let area = tax.ka("ONE").unwrap();
        let r = render_tree(area, &ann, &RenderSpec::default()).unwrap();

        assert_eq!(r.svg.matches("class=\"node practiced\"").count(), 2); // root + part-b
        assert_eq!(r.svg.matches("class=\"node total\"").count(), 2); // part-a + detail
        assert_eq!(r.svg.matches("class=\"node uncovered\"").count(), 0);
        assert!(r.dot.contains("style=filled"));
        assert!(r.dot.contains("penwidth=2"));
        assert!(r.dot.contains("\"first-area\" -> \"first-area/part-a\";"));
    }

    #[test]
    fn tree_prunes_uncovered_deep_nodes_only() {
        let tax = testutil::tax();
        let p = profile(&[("ONE", "first-area/part-b", 2)], &[]);
        let ann = annotate_tree(&[p], &tax, "ONE", date("2024-06-01")).unwrap();
        let area = tax.ka("ONE").unwrap();

        let full = render_tree(area, &ann, &RenderSpec::default()).unwrap();
        assert!(full.svg.contains(">Detail<"));
        assert_eq!(full.svg.matches("class=\"node uncovered\"").count(), 2);

        let pruned_spec = RenderSpec {
            prune_uncovered: true,
            ..RenderSpec::default()
        };
        let pruned = render_tree(area, &ann, &pruned_spec).unwrap();
        // The level-3 uncovered leaf goes; the level-2 gap stays visible.
        assert!(!pruned.svg.contains(">Detail<"));
        assert!(pruned.svg.contains(">Part A<"));
        assert_eq!(pruned.svg.matches("class=\"node uncovered\"").count(), 1);
        assert!(!pruned.dot.contains("\"first-area/part-a/detail\""));
    }

    #[test]
    fn tree_practiced_equals_total_means_no_outline_only() {
        let tax = testutil::tax();
        let p = profile(&[("ONE", "first-area/part-a/detail", 3)], &[]);
        let ann = annotate_tree(&[p], &tax, "ONE", date("2024-06-01")).unwrap();
        let r = render_tree(tax.ka("ONE").unwrap(), &ann, &RenderSpec::default()).unwrap();
        assert_eq!(r.svg.matches("class=\"node total\"").count(), 0);
        assert_eq!(r.svg.matches("class=\"node practiced\"").count(), 3);
    }

    #[test]
    fn tree_rejects_mismatched_or_foreign_annotations() {
        let tax = testutil::tax();
        let p = profile(&[("ONE", "first-area", 1)], &[]);
        let ann = annotate_tree(&[p], &tax, "ONE", date("2024-06-01")).unwrap();
        assert!(matches!(
            render_tree(tax.ka("TWO").unwrap(), &ann, &RenderSpec::default()),
            Err(RenderError::KaMismatch { .. })
        ));

        let mut foreign = ann.clone();
        foreign
            .nodes
            .insert("first-area/ghost".to_string(), NodeFlags::default());
        assert!(matches!(
            render_tree(tax.ka("ONE").unwrap(), &foreign, &RenderSpec::default()),
            Err(RenderError::UnknownNode(_))
        ));
    }

    #[test]
    fn tree_is_deterministic() {
        let tax = testutil::tax();
        let p = profile(&[("ONE", "first-area/part-a", 2)], &[]);
        let ann = annotate_tree(&[p], &tax, "ONE", date("2024-06-01")).unwrap();
        let area = tax.ka("ONE").unwrap();
        let spec = RenderSpec::default();
        let a = render_tree(area, &ann, &spec).unwrap();
        let b = render_tree(area, &ann, &spec).unwrap();
        assert_eq!(a.svg, b.svg);
        assert_eq!(a.dot, b.dot);
    }

    #[test]
    fn file_names_slugify_subjects() {
        assert_eq!(
            output_file_name("spider", "Org A", Some(date("2024-01-31")), "svg"),
            "spider_org-a_2024-01-31.svg"
        );
        assert_eq!(
            output_file_name("tree", "emp_07", None, "dot"),
            "tree_emp-07.dot"
        );
    }

    #[test]
    fn palettes_are_named() {
        assert_eq!(Palette::named("default").unwrap().name, "default");
        assert_eq!(Palette::named("mono").unwrap().name, "mono");
        assert!(Palette::named("neon").is_none());
    }
}
