//! Standalone SVG heatmaps for transfer grids.
//!
//! The output is a self-contained SVG document with exactly one `<rect>` per
//! grid cell, axis tick labels along both edges, and a numeric label inside
//! each cell. Colors interpolate linearly from a dark low end to a bright
//! high end of the observed mean-return range; failed cells render grey.

use std::path::Path;

use eval_harness::{CellOutcome, TransferGrid};

use crate::error::Result;

const CELL: f64 = 72.0;
const MARGIN_LEFT: f64 = 96.0;
const MARGIN_TOP: f64 = 48.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_BOTTOM: f64 = 64.0;

const LOW_RGB: (f64, f64, f64) = (0x1b as f64, 0x2a as f64, 0x4a as f64);
const HIGH_RGB: (f64, f64, f64) = (0xff as f64, 0xd5 as f64, 0x4f as f64);
const FAILED_FILL: &str = "#777777";

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a * (1.0 - t) + b * t
}

fn cell_fill(t: f64) -> String {
    let r = lerp(LOW_RGB.0, HIGH_RGB.0, t).round() as u8;
    let g = lerp(LOW_RGB.1, HIGH_RGB.1, t).round() as u8;
    let b = lerp(LOW_RGB.2, HIGH_RGB.2, t).round() as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Where a cell's mean sits within the grid's observed range, in [0, 1].
/// A flat grid (or one with no successful cells) maps everything to 0.5.
fn relative_position(mean: f64, min: f64, max: f64) -> f64 {
    if max > min {
        (mean - min) / (max - min)
    } else {
        0.5
    }
}

/// Render a transfer grid as an SVG heatmap string.
///
/// Rows are mass values, columns are friction values; exactly one `<rect>`
/// is emitted per cell.
pub fn heatmap_svg(grid: &TransferGrid) -> String {
    let rows = grid.mass_values.len();
    let cols = grid.friction_values.len();
    let width = MARGIN_LEFT + CELL * cols as f64 + MARGIN_RIGHT;
    let height = MARGIN_TOP + CELL * rows as f64 + MARGIN_BOTTOM;

    let means: Vec<f64> = grid
        .cells
        .iter()
        .flatten()
        .filter_map(|c| c.score().map(|s| s.mean))
        .collect();
    let min = means.iter().copied().fold(f64::INFINITY, f64::min);
    let max = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    out.push_str(&format!(
        "  <text x=\"{x}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">mean return by \
         mass (rows) and friction (columns)</text>\n",
        x = width / 2.0
    ));

    for (i, row) in grid.cells.iter().enumerate() {
        let y = MARGIN_TOP + CELL * i as f64;
        for (j, cell) in row.iter().enumerate() {
            let x = MARGIN_LEFT + CELL * j as f64;
            let (fill, label, label_fill) = match cell {
                CellOutcome::Score(s) => {
                    let t = relative_position(s.mean, min, max);
                    let text_fill = if t < 0.55 { "#f0f0f0" } else { "#101010" };
                    (cell_fill(t), format!("{:.1}", s.mean), text_fill)
                }
                CellOutcome::Failed(_) => {
                    (FAILED_FILL.to_string(), "failed".to_string(), "#f0f0f0")
                }
            };
            out.push_str(&format!(
                "  <rect x=\"{x}\" y=\"{y}\" width=\"{CELL}\" height=\"{CELL}\" \
                 fill=\"{fill}\" stroke=\"#333333\"/>\n"
            ));
            out.push_str(&format!(
                "  <text x=\"{tx}\" y=\"{ty}\" text-anchor=\"middle\" fill=\"{label_fill}\">\
                 {label}</text>\n",
                tx = x + CELL / 2.0,
                ty = y + CELL / 2.0 + 4.0
            ));
        }
    }

    for (i, mass) in grid.mass_values.iter().enumerate() {
        out.push_str(&format!(
            "  <text x=\"{x}\" y=\"{y}\" text-anchor=\"end\">{mass}</text>\n",
            x = MARGIN_LEFT - 8.0,
            y = MARGIN_TOP + CELL * i as f64 + CELL / 2.0 + 4.0
        ));
    }
    for (j, friction) in grid.friction_values.iter().enumerate() {
        out.push_str(&format!(
            "  <text x=\"{x}\" y=\"{y}\" text-anchor=\"middle\">{friction}</text>\n",
            x = MARGIN_LEFT + CELL * j as f64 + CELL / 2.0,
            y = MARGIN_TOP + CELL * rows as f64 + 20.0
        ));
    }
    out.push_str(&format!(
        "  <text x=\"{x}\" y=\"{y}\" text-anchor=\"middle\">friction scale</text>\n",
        x = MARGIN_LEFT + CELL * cols as f64 / 2.0,
        y = MARGIN_TOP + CELL * rows as f64 + 44.0
    ));
    out.push_str("</svg>\n");
    out
}

pub fn emit_heatmap_svg(grid: &TransferGrid, path: &Path) -> Result<()> {
    std::fs::write(path, heatmap_svg(grid))?;
    Ok(())
}
