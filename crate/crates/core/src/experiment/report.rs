//! Tables and SVG charts for one dataset of a [`GridResult`].
//!
//! Every number is printed by [`format_4dp`], so the table, the bar chart
//! labels, and the heatmap annotations agree character for character.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::run::{CellResult, GridResult};
use crate::error::{Error, Result};

/// Round to 4 decimal places, half to even, working on the shortest
/// decimal representation of `x` (so 0.96435 gives "0.9644").
pub fn format_4dp(x: f64) -> String {
    if !x.is_finite() {
        return "NaN".into();
    }
    let s = format!("{}", x.abs());
    let (int, frac) = s.split_once('.').unwrap_or((&s, ""));
    let mut digits: Vec<u8> = int.bytes().chain(frac.bytes().chain(std::iter::repeat(b'0')).take(4)).collect();
    let rest = frac.get(4..).unwrap_or("");
    let first = rest.bytes().next().unwrap_or(b'0');
    let tail_nonzero = rest.bytes().skip(1).any(|b| b != b'0');
    let last_odd = (digits[digits.len() - 1] - b'0') % 2 == 1;
    let round_up = first > b'5' || (first == b'5' && (tail_nonzero || last_odd));
    if round_up {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, b'1');
                break;
            }
            i -= 1;
            if digits[i] == b'9' {
                digits[i] = b'0';
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    let split = digits.len() - 4;
    let mut out = String::new();
    if x < 0.0 && digits.iter().any(|&d| d != b'0') {
        out.push('-');
    }
    out.push_str(std::str::from_utf8(&digits[..split]).expect("ascii"));
    out.push('.');
    out.push_str(std::str::from_utf8(&digits[split..]).expect("ascii"));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Markdown,
}

/// One table row: model, features, then accuracy, precision, recall, F1
/// (or "failed" four times).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableRow {
    pub model: String,
    pub features: String,
    pub values: [String; 4],
}

pub const TABLE_HEADER: [&str; 6] = ["Model", "Features", "Accuracy", "Precision", "Recall", "F1"];

/// Cells of `dataset` ordered by model, then featurizer (config order).
pub fn dataset_cells<'a>(result: &'a GridResult, dataset: &str) -> Result<Vec<&'a CellResult>> {
    if !result.config.datasets.iter().any(|d| d.name == dataset) {
        return Err(Error::UnknownDataset(dataset.to_owned()));
    }
    let mut cells = Vec::new();
    for m in &result.config.models {
        for f in &result.config.featurizers {
            let c = result
                .cell(dataset, &f.display_name(), &m.display_name())
                .ok_or_else(|| Error::Invalid(format!("grid result is missing a cell for {dataset}")))?;
            cells.push(c);
        }
    }
    Ok(cells)
}

pub fn table_rows(result: &GridResult, dataset: &str) -> Result<Vec<TableRow>> {
    Ok(dataset_cells(result, dataset)?
        .into_iter()
        .map(|c| TableRow {
            model: c.model.clone(),
            features: c.featurizer.clone(),
            values: match &c.summary {
                Some(s) => [s.accuracy, s.precision, s.recall, s.f1].map(|m| format_4dp(m.mean)),
                None => std::array::from_fn(|_| "failed".to_owned()),
            },
        })
        .collect())
}

pub fn render_table(result: &GridResult, dataset: &str, format: TableFormat) -> Result<String> {
    let rows = table_rows(result, dataset)?;
    match format {
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let err = |e: csv::Error| Error::Invalid(e.to_string());
            w.write_record(TABLE_HEADER).map_err(err)?;
            for r in &rows {
                w.write_record([&r.model, &r.features].into_iter().chain(&r.values))
                    .map_err(err)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?;
            Ok(String::from_utf8(bytes).expect("utf-8 input"))
        }
        TableFormat::Markdown => {
            let cfg = &result.config;
            let mut s = format!(
                "Dataset {dataset}: {} averaging, mean of {} one-shot split{}.\n\n",
                cfg.averaging,
                cfg.repeats,
                if cfg.repeats == 1 { "" } else { "s" }
            );
            s += &format!("| {} |\n", TABLE_HEADER.join(" | "));
            s += "|---|---|---:|---:|---:|---:|\n";
            for r in &rows {
                let cells: Vec<String> = [&r.model, &r.features]
                    .into_iter()
                    .chain(&r.values)
                    .map(|v| v.replace('|', "\\|"))
                    .collect();
                s += &format!("| {} |\n", cells.join(" | "));
            }
            Ok(s)
        }
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

/// Bar chart geometry, in SVG user units.
pub mod bars {
    pub const PLOT_HEIGHT: f64 = 300.0;
    pub const MARGIN_LEFT: f64 = 60.0;
    pub const MARGIN_TOP: f64 = 50.0;
    pub const MARGIN_BOTTOM: f64 = 60.0;
    pub const BAR_WIDTH: f64 = 16.0;
    pub const BAR_GAP: f64 = 2.0;
    pub const GROUP_GAP: f64 = 24.0;
    pub const LEGEND_WIDTH: f64 = 190.0;
}

/// Grouped bars: one group per model, one bar per featurizer, height
/// `accuracy * PLOT_HEIGHT`. Each bar is a `<rect class="bar">` carrying
/// `data-model`, `data-features`, and `data-value`; its label is a
/// `<text class="value">`.
pub fn render_barchart(result: &GridResult, dataset: &str) -> Result<String> {
    use bars::*;
    let cells = dataset_cells(result, dataset)?;
    let feats: Vec<String> = result.config.featurizers.iter().map(|f| f.display_name()).collect();
    let models: Vec<String> = result.config.models.iter().map(|m| m.display_name()).collect();
    let group_w = feats.len() as f64 * (BAR_WIDTH + BAR_GAP) + GROUP_GAP;
    let plot_w = models.len() as f64 * group_w;
    let width = MARGIN_LEFT + plot_w + LEGEND_WIDTH;
    let height = MARGIN_TOP + PLOT_HEIGHT + MARGIN_BOTTOM;
    let base = MARGIN_TOP + PLOT_HEIGHT;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.2}" height="{height:.2}" viewBox="0 0 {width:.2} {height:.2}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    let _ = writeln!(
        s,
        r#"<text class="title" x="{:.2}" y="24" font-size="15">Accuracy by model and features: {}</text>"#,
        MARGIN_LEFT,
        esc(dataset)
    );
    for i in 0..=5 {
        let v = i as f64 / 5.0;
        let y = base - v * PLOT_HEIGHT;
        let _ = writeln!(
            s,
            r##"<line class="grid" x1="{MARGIN_LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##,
            MARGIN_LEFT + plot_w
        );
        let _ = writeln!(
            s,
            r#"<text class="tick" x="{:.2}" y="{:.2}" text-anchor="end">{v:.1}</text>"#,
            MARGIN_LEFT - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text class="axis" transform="rotate(-90 16 {y:.2})" x="16" y="{y:.2}" text-anchor="middle">Accuracy</text>"#,
        y = MARGIN_TOP + PLOT_HEIGHT / 2.0
    );
    for (g, model) in models.iter().enumerate() {
        let gx = MARGIN_LEFT + g as f64 * group_w + GROUP_GAP / 2.0;
        for (f, feat) in feats.iter().enumerate() {
            let cell = cells[g * feats.len() + f];
            let x = gx + f as f64 * (BAR_WIDTH + BAR_GAP);
            let (h, label, class) = match &cell.summary {
                Some(sm) => (sm.accuracy.mean * PLOT_HEIGHT, format_4dp(sm.accuracy.mean), "bar"),
                None => (0.0, "failed".to_owned(), "bar failed"),
            };
            let y = base - h;
            let _ = writeln!(
                s,
                r#"<rect class="{class}" data-model="{}" data-features="{}" data-value="{label}" x="{x:.2}" y="{y:.2}" width="{BAR_WIDTH:.2}" height="{h:.2}" fill="{}"/>"#,
                esc(model),
                esc(feat),
                PALETTE[f % PALETTE.len()]
            );
            let lx = x + BAR_WIDTH / 2.0 + 3.0;
            let ly = y - 4.0;
            let _ = writeln!(
                s,
                r#"<text class="value" x="{lx:.2}" y="{ly:.2}" transform="rotate(-90 {lx:.2} {ly:.2})" font-size="9">{label}</text>"#
            );
        }
        let _ = writeln!(
            s,
            r#"<text class="group" x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            gx + (group_w - GROUP_GAP) / 2.0,
            base + 18.0,
            esc(model)
        );
    }
    let lx = MARGIN_LEFT + plot_w + 16.0;
    for (f, feat) in feats.iter().enumerate() {
        let ly = MARGIN_TOP + f as f64 * 18.0;
        let _ = writeln!(
            s,
            r#"<rect class="legend" x="{lx:.2}" y="{ly:.2}" width="12" height="12" fill="{}"/>"#,
            PALETTE[f % PALETTE.len()]
        );
        let _ = writeln!(
            s,
            r#"<text class="legend" x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 18.0,
            ly + 10.0,
            esc(feat)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Heatmap color for accuracy 0.
pub const HEAT_LOW: (u8, u8, u8) = (247, 251, 255);
/// Heatmap color for accuracy 1.
pub const HEAT_HIGH: (u8, u8, u8) = (8, 48, 107);

/// Linear interpolation from [`HEAT_LOW`] to [`HEAT_HIGH`], clamped to
/// [0, 1]. Each channel is monotone in the value, so darker means higher.
pub fn heat_color(v: f64) -> String {
    let t = if v.is_finite() { v.clamp(0.0, 1.0) } else { 0.0 };
    let ch = |a: u8, b: u8| (a as f64 + (b as f64 - a as f64) * t).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        ch(HEAT_LOW.0, HEAT_HIGH.0),
        ch(HEAT_LOW.1, HEAT_HIGH.1),
        ch(HEAT_LOW.2, HEAT_HIGH.2)
    )
}

/// Heatmap geometry, in SVG user units.
pub mod heat {
    pub const CELL_WIDTH: f64 = 120.0;
    pub const CELL_HEIGHT: f64 = 34.0;
    pub const MARGIN_LEFT: f64 = 90.0;
    pub const MARGIN_TOP: f64 = 70.0;
    pub const SCALE_WIDTH: f64 = 80.0;
}

/// Model-by-featurizer grid of `<rect class="cell">`, each followed by a
/// `<text class="annotation">` with the 4-decimal accuracy.
pub fn render_heatmap(result: &GridResult, dataset: &str) -> Result<String> {
    use heat::*;
    let cells = dataset_cells(result, dataset)?;
    let feats: Vec<String> = result.config.featurizers.iter().map(|f| f.display_name()).collect();
    let models: Vec<String> = result.config.models.iter().map(|m| m.display_name()).collect();
    let grid_w = feats.len() as f64 * CELL_WIDTH;
    let grid_h = models.len() as f64 * CELL_HEIGHT;
    let width = MARGIN_LEFT + grid_w + SCALE_WIDTH;
    let height = MARGIN_TOP + grid_h + 20.0;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.2}" height="{height:.2}" viewBox="0 0 {width:.2} {height:.2}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<defs><linearGradient id="scale" x1="0" y1="1" x2="0" y2="0"><stop offset="0" stop-color="{}"/><stop offset="1" stop-color="{}"/></linearGradient></defs>"#,
        heat_color(0.0),
        heat_color(1.0)
    );
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    let _ = writeln!(
        s,
        r#"<text class="title" x="{MARGIN_LEFT:.2}" y="24" font-size="15">Accuracy heatmap: {}</text>"#,
        esc(dataset)
    );
    for (f, feat) in feats.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text class="column" x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            MARGIN_LEFT + (f as f64 + 0.5) * CELL_WIDTH,
            MARGIN_TOP - 10.0,
            esc(feat)
        );
    }
    for (m, model) in models.iter().enumerate() {
        let y = MARGIN_TOP + m as f64 * CELL_HEIGHT;
        let _ = writeln!(
            s,
            r#"<text class="row" x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN_LEFT - 8.0,
            y + CELL_HEIGHT / 2.0 + 4.0,
            esc(model)
        );
        for (f, feat) in feats.iter().enumerate() {
            let cell = cells[m * feats.len() + f];
            let x = MARGIN_LEFT + f as f64 * CELL_WIDTH;
            let (fill, label, ink, class) = match &cell.summary {
                Some(sm) => {
                    let v = sm.accuracy.mean;
                    (heat_color(v), format_4dp(v), if v > 0.5 { "#ffffff" } else { "#000000" }, "cell")
                }
                None => ("#cccccc".to_owned(), "failed".to_owned(), "#000000", "cell failed"),
            };
            let _ = writeln!(
                s,
                r##"<rect class="{class}" data-model="{}" data-features="{}" data-value="{label}" x="{x:.2}" y="{y:.2}" width="{CELL_WIDTH:.2}" height="{CELL_HEIGHT:.2}" fill="{fill}" stroke="#ffffff"/>"##,
                esc(model),
                esc(feat)
            );
            let _ = writeln!(
                s,
                r#"<text class="annotation" x="{:.2}" y="{:.2}" text-anchor="middle" fill="{ink}">{label}</text>"#,
                x + CELL_WIDTH / 2.0,
                y + CELL_HEIGHT / 2.0 + 4.0
            );
        }
    }
    let sx = MARGIN_LEFT + grid_w + 20.0;
    let _ = writeln!(
        s,
        r##"<rect class="scale" x="{sx:.2}" y="{MARGIN_TOP:.2}" width="16" height="{grid_h:.2}" fill="url(#scale)" stroke="#999999"/>"##
    );
    let _ = writeln!(
        s,
        r#"<text class="scale" x="{:.2}" y="{:.2}">1.0</text>"#,
        sx + 20.0,
        MARGIN_TOP + 10.0
    );
    let _ = writeln!(
        s,
        r#"<text class="scale" x="{:.2}" y="{:.2}">0.0</text>"#,
        sx + 20.0,
        MARGIN_TOP + grid_h
    );
    s.push_str("</svg>\n");
    Ok(s)
}

fn write(path: &Path, text: &str) -> Result<PathBuf> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
    Ok(path.to_owned())
}

pub fn emit_table(result: &GridResult, dataset: &str, format: TableFormat, path: &Path) -> Result<PathBuf> {
    write(path, &render_table(result, dataset, format)?)
}

pub fn emit_barchart(result: &GridResult, dataset: &str, path: &Path) -> Result<PathBuf> {
    write(path, &render_barchart(result, dataset)?)
}

pub fn emit_heatmap(result: &GridResult, dataset: &str, path: &Path) -> Result<PathBuf> {
    write(path, &render_heatmap(result, dataset)?)
}

/// Names of the per-dataset artifacts.
pub const ARTIFACTS: [&str; 4] = ["table.csv", "table.md", "accuracy_bars.svg", "accuracy_heatmap.svg"];

/// Write `grid.json` and, per dataset, `<dataset>/{table.csv, table.md,
/// accuracy_bars.svg, accuracy_heatmap.svg}` under `out`.
pub fn write_reports(result: &GridResult, out: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut written = vec![write(&out.join("grid.json"), &result.to_json()?)?];
    for d in &result.config.datasets {
        let dir = out.join(&d.name);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        written.push(emit_table(result, &d.name, TableFormat::Csv, &dir.join(ARTIFACTS[0]))?);
        written.push(emit_table(result, &d.name, TableFormat::Markdown, &dir.join(ARTIFACTS[1]))?);
        written.push(emit_barchart(result, &d.name, &dir.join(ARTIFACTS[2]))?);
        written.push(emit_heatmap(result, &d.name, &dir.join(ARTIFACTS[3]))?);
    }
    Ok(written)
}
