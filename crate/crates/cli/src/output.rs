//! CSV and SVG renderings of a sweep table.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::error::{CliError, Result};
use crate::sweep::{SweepVar, Table};

pub const CSV_HEADER: [&str; 8] = [
    "sweep_var",
    "value",
    "alpha",
    "ec_analytical",
    "ec_oracle",
    "oracle_stderr",
    "r_star",
    "error",
];

// `{}` on f64 prints the shortest string that parses back to the same bits.
fn num(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes the table as CSV. Missing values are empty fields.
pub fn write_csv<W: Write>(table: &Table, out: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &table.rows {
        w.write_record([
            table.sweep_var.name().to_string(),
            r.value.to_string(),
            r.alpha.to_string(),
            num(r.ec_analytical),
            num(r.ec_oracle),
            num(r.oracle_stderr),
            num(r.r_star),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(table: &Table, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(table, file).map_err(|source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    })
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// Line plot of analytic EC against the swept variable, one polyline per α
/// (a single line for α sweeps). Power sweeps use a log x-axis. Rows
/// without an analytic value are skipped. Output depends only on the table.
pub fn render_svg(table: &Table) -> String {
    let log_x = table.sweep_var == SweepVar::Pt;
    let tx = |v: f64| if log_x { v.log10() } else { v };

    let mut series: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
    for r in &table.rows {
        let Some(ec) = r.ec_analytical else { continue };
        if log_x && r.value <= 0.0 {
            continue;
        }
        let key = if table.sweep_var == SweepVar::Alpha {
            f64::NAN
        } else {
            r.alpha
        };
        let idx = match series
            .iter()
            .position(|(a, _)| a.to_bits() == key.to_bits())
        {
            Some(i) => i,
            None => {
                series.push((key, Vec::new()));
                series.len() - 1
            }
        };
        series[idx].1.push((tx(r.value), ec));
    }

    let pts = series.iter().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1, mut y0, mut y1) =
        (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y1) = (0.0, 1.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        s,
        r#"<path d="M{l} {t} L{l} {b} L{r} {b}" fill="none" stroke="black"/>"#
    );
    let xlabel = if log_x {
        format!("log10 {}", table.sweep_var)
    } else {
        table.sweep_var.to_string()
    };
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">{xlabel}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" text-anchor="middle" font-size="14" transform="rotate(-90 15 {})">EC (bits/slot)</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="30" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        table.scenario
    );
    for (text, x, y, anchor) in [
        (format!("{:.4}", undo(x0, log_x)), l, b + 18.0, "start"),
        (format!("{:.4}", undo(x1, log_x)), r, b + 18.0, "end"),
        (format!("{y0:.4}"), l - 5.0, b, "end"),
        (format!("{y1:.4}"), l - 5.0, t + 5.0, "end"),
    ] {
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{y}" text-anchor="{anchor}" font-size="11">{text}</text>"#
        );
    }
    for (i, (alpha, p)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = p
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            coords.join(" ")
        );
        if !alpha.is_nan() {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" font-size="11" fill="{color}">α = {alpha}</text>"#,
                r - 80.0,
                t + 15.0 * (i + 1) as f64
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

fn undo(x: f64, log_x: bool) -> f64 {
    if log_x {
        10f64.powf(x)
    } else {
        x
    }
}

pub fn emit_plot(table: &Table, path: &Path) -> Result<()> {
    std::fs::write(path, render_svg(table)).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}
