//! SVG scatter plots of clustered or labeled points.

use std::fmt::Write as _;

use crate::data::parse_csv;
use crate::error::{QkmError, Result};

const PALETTE: [&str; 10] = [
    "#d62728", "#2ca02c", "#1f77b4", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];
const PANEL: f64 = 400.0;
const MARGIN: f64 = 40.0;

/// Points plus up to two groupings read from an assignments CSV.
#[derive(Debug, Clone)]
pub struct PlotInput {
    pub points: Vec<Vec<f64>>,
    pub feature_names: Vec<String>,
    pub labels: Option<Vec<usize>>,
    pub clusters: Option<Vec<usize>>,
}

fn group_column(values: &[Vec<f64>], col: usize, name: &str) -> Result<Vec<usize>> {
    values
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let v = row[col];
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(QkmError::Data(format!(
                    "row {i}: {name} value {v} is not a non-negative integer"
                )))
            }
        })
        .collect()
}

impl PlotInput {
    pub fn parse(
        text: &str,
        origin: &str,
        label_column: &str,
        cluster_column: &str,
    ) -> Result<Self> {
        let raw = parse_csv(text, origin, None)?;
        if raw.is_empty() {
            return Err(QkmError::InsufficientData(format!(
                "{origin}: no rows to plot"
            )));
        }
        let names = raw.feature_names.clone().unwrap_or_default();
        let find = |name: &str| names.iter().position(|n| n == name);
        let label_col = find(label_column);
        let cluster_col = find(cluster_column);
        let labels = label_col
            .map(|c| group_column(&raw.features, c, label_column))
            .transpose()?;
        let clusters = cluster_col
            .map(|c| group_column(&raw.features, c, cluster_column))
            .transpose()?;
        let keep: Vec<usize> = (0..names.len())
            .filter(|&c| Some(c) != label_col && Some(c) != cluster_col)
            .collect();
        Ok(Self {
            points: raw
                .features
                .iter()
                .map(|row| keep.iter().map(|&c| row[c]).collect())
                .collect(),
            feature_names: keep.iter().map(|&c| names[c].clone()).collect(),
            labels,
            clusters,
        })
    }
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if hi > lo {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        (lo - 1.0, hi + 1.0)
    }
}

fn group_means(xy: &[(f64, f64)], groups: &[usize]) -> Vec<(usize, f64, f64)> {
    let k = groups.iter().max().map_or(0, |m| m + 1);
    let mut sums = vec![(0.0, 0.0, 0usize); k];
    for (&(x, y), &g) in xy.iter().zip(groups) {
        sums[g].0 += x;
        sums[g].1 += y;
        sums[g].2 += 1;
    }
    sums.into_iter()
        .enumerate()
        .filter(|(_, s)| s.2 > 0)
        .map(|(g, (sx, sy, n))| (g, sx / n as f64, sy / n as f64))
        .collect()
}

fn panel(
    out: &mut String,
    offset: f64,
    title: &str,
    xy: &[(f64, f64)],
    groups: Option<&[usize]>,
    axes: (&str, &str),
    bounds: ((f64, f64), (f64, f64)),
) {
    let ((x0, x1), (y0, y1)) = bounds;
    let inner = PANEL - 2.0 * MARGIN;
    let sx = |x: f64| offset + MARGIN + (x - x0) / (x1 - x0) * inner;
    let sy = |y: f64| PANEL - MARGIN - (y - y0) / (y1 - y0) * inner;
    let _ = writeln!(
        out,
        r##"<rect x="{:.2}" y="{MARGIN:.2}" width="{inner:.2}" height="{inner:.2}" fill="none" stroke="#444"/>"##,
        offset + MARGIN
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{title}</text>"#,
        offset + PANEL / 2.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">{}</text>"#,
        offset + PANEL / 2.0,
        PANEL - 10.0,
        axes.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12" transform="rotate(-90 {:.2} {:.2})">{}</text>"#,
        offset + 14.0,
        PANEL / 2.0,
        offset + 14.0,
        PANEL / 2.0,
        axes.1
    );
    for (i, &(x, y)) in xy.iter().enumerate() {
        let color = groups.map_or(PALETTE[0], |g| PALETTE[g[i] % PALETTE.len()]);
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}" fill-opacity="0.8"/>"#,
            sx(x),
            sy(y)
        );
    }
    let all_zero = vec![0; xy.len()];
    for (g, mx, my) in group_means(xy, groups.unwrap_or(&all_zero)) {
        let (cx, cy) = (sx(mx), sy(my));
        let _ = writeln!(
            out,
            r#"<path d="M{:.2},{:.2}L{:.2},{:.2}M{:.2},{:.2}L{:.2},{:.2}" stroke="{}" stroke-width="3"/>"#,
            cx - 7.0,
            cy - 7.0,
            cx + 7.0,
            cy + 7.0,
            cx - 7.0,
            cy + 7.0,
            cx + 7.0,
            cy - 7.0,
            if groups.is_some() {
                PALETTE[g % PALETTE.len()]
            } else {
                "#000"
            },
        );
    }
}

/// Scatter of features `(fx, fy)`. With both labels and clusters present the
/// true labels and the clusters go side by side; group means are drawn as
/// crosses. The second line is a version comment.
pub fn render_svg(input: &PlotInput, fx: usize, fy: usize) -> Result<String> {
    let dim = input.feature_names.len();
    if dim < 2 {
        return Err(QkmError::Data(format!(
            "scatter plots need at least 2 feature columns, found {dim}"
        )));
    }
    if fx >= dim || fy >= dim {
        return Err(QkmError::Argument(format!(
            "feature pair ({fx}, {fy}) out of range for {dim} features"
        )));
    }
    if input.points.is_empty() {
        return Err(QkmError::InsufficientData("no rows to plot".into()));
    }
    let xy: Vec<(f64, f64)> = input.points.iter().map(|r| (r[fx], r[fy])).collect();
    let bounds = (
        extent(xy.iter().map(|p| p.0)),
        extent(xy.iter().map(|p| p.1)),
    );
    let axes = (
        input.feature_names[fx].as_str(),
        input.feature_names[fy].as_str(),
    );

    let mut panels: Vec<(&str, Option<&[usize]>)> = Vec::new();
    match (&input.labels, &input.clusters) {
        (Some(l), Some(c)) => {
            panels.push(("true labels", Some(l)));
            panels.push(("clusters", Some(c)));
        }
        (None, Some(c)) => panels.push(("clusters", Some(c))),
        (Some(l), None) => panels.push(("labels", Some(l))),
        (None, None) => panels.push(("points", None)),
    }

    let width = PANEL * panels.len() as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{PANEL:.0}" viewBox="0 0 {width:.0} {PANEL:.0}">"#
    );
    let _ = writeln!(out, "<!-- qkm {} -->", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, (title, groups)) in panels.iter().enumerate() {
        panel(
            &mut out,
            PANEL * i as f64,
            title,
            &xy,
            *groups,
            axes,
            bounds,
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}
