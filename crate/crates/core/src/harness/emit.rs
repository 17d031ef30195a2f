//! CSV, JSON and SVG output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::spec::Format;
use super::sweep::{SweepResult, SweepRow};
use crate::analysis::median;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

pub const COLUMNS: [&str; 16] = [
    "family",
    "n",
    "d",
    "process",
    "tie_rule",
    "seed",
    "balls",
    "max_load",
    "mean_probes",
    "max_probes",
    "smoothness_max",
    "phi",
    "lower_bound_ok",
    "upper_bound_ok",
    "runtime_ms",
    "error",
];

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse {
        line,
        column: 0,
        message: e.to_string(),
    }
}

/// Header line first, even when there are no rows.
pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(COLUMNS).map_err(csv_error)?;
    for row in rows {
        w.serialize(row).map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

pub fn csv_string(rows: &[SweepRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_error)?;
    if header.iter().ne(COLUMNS) {
        return Err(Error::Parse {
            line: 1,
            column: 0,
            message: format!("unexpected header, expected {}", COLUMNS.join(",")),
        });
    }
    r.deserialize().map(|row| row.map_err(csv_error)).collect()
}

#[derive(Serialize, Deserialize)]
pub struct JsonReport {
    pub schema_version: u32,
    pub rows: Vec<SweepRow>,
}

pub fn json_string(result: &SweepResult) -> String {
    let report = JsonReport {
        schema_version: SCHEMA_VERSION,
        rows: result.rows.clone(),
    };
    serde_json::to_string_pretty(&report).expect("rows serialize") + "\n"
}

/// Median max load per n, for each `(process, tie_rule)` series. Rows with
/// an error are left out.
pub fn series_medians(rows: &[SweepRow]) -> BTreeMap<(String, String), Vec<(usize, f64)>> {
    let mut raw: BTreeMap<(String, String), BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.error.is_empty()) {
        raw.entry((r.process.clone(), r.tie_rule.clone()))
            .or_default()
            .entry(r.n)
            .or_default()
            .push(f64::from(r.max_load));
    }
    raw.into_iter()
        .map(|(k, by_n)| (k, by_n.into_iter().map(|(n, v)| (n, median(&v))).collect()))
        .collect()
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn n_label(n: usize) -> String {
    if n.is_power_of_two() && n >= 16 {
        format!("2^{}", n.trailing_zeros())
    } else {
        n.to_string()
    }
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Line plot of median max load against n on a log axis, one polyline per
/// series.
pub fn render_svg(rows: &[SweepRow]) -> String {
    let (w, h) = (720.0, 440.0);
    let (left, right, top, bottom) = (70.0, 190.0, 40.0, 60.0);
    let (pw, ph) = (w - left - right, h - top - bottom);
    let series = series_medians(rows);
    let ns: Vec<usize> = {
        let mut v: Vec<usize> = series.values().flatten().map(|p| p.0).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let (lo, hi) = match (ns.first(), ns.last()) {
        (Some(&a), Some(&b)) => ((a as f64).ln(), (b as f64).ln()),
        _ => (0.0, 1.0),
    };
    let ymax = series
        .values()
        .flatten()
        .map(|p| p.1)
        .fold(1.0_f64, f64::max)
        .ceil();
    let x = |n: usize| {
        if hi > lo {
            left + ((n as f64).ln() - lo) / (hi - lo) * pw
        } else {
            left + pw / 2.0
        }
    };
    let y = |v: f64| top + ph - v / ymax * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">median max load vs n</text>"#, left + pw / 2.0);
    let _ = writeln!(s, r#"<line x1="{left}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#, top + ph, left + pw, top + ph);
    let _ = writeln!(s, r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{}" stroke="black"/>"#, top + ph);
    for &n in &ns {
        let px = x(n);
        let _ = writeln!(s, r#"<line x1="{px:.2}" y1="{}" x2="{px:.2}" y2="{}" stroke="black"/>"#, top + ph, top + ph + 5.0);
        let _ = writeln!(s, r#"<text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#, top + ph + 20.0, n_label(n));
    }
    let step = (ymax / 8.0).ceil().max(1.0);
    let mut t = 0.0;
    while t <= ymax {
        let py = y(t);
        let _ = writeln!(s, r#"<line x1="{}" y1="{py:.2}" x2="{left}" y2="{py:.2}" stroke="black"/>"#, left - 5.0);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{t}</text>"#, left - 8.0, py + 4.0);
        t += step;
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">n (log scale)</text>"#, left + pw / 2.0, h - 15.0);
    let _ = writeln!(s, r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">median max load</text>"#, top + ph / 2.0, top + ph / 2.0);
    for (i, ((process, tie), pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = pts.iter().map(|&(n, v)| format!("{:.2},{:.2}", x(n), y(v))).collect();
        let label = xml_escape(&format!("{process} / {tie}"));
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"><title>{label}</title></polyline>"#, coords.join(" "));
        for &(n, v) in pts {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, x(n), y(v));
        }
        let ly = top + 10.0 + 20.0 * i as f64;
        let lx = left + pw + 15.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{label}</text>"#, lx + 26.0, ly + 4.0);
    }
    s.push_str("</svg>\n");
    s
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes `<dir>/<stem>.<ext>` for each format and returns the paths.
pub fn emit(result: &SweepResult, formats: &[Format], dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for &f in formats {
        let path = dir.join(format!("{stem}.{}", f.extension()));
        let body = match f {
            Format::Csv => csv_string(&result.rows),
            Format::Json => json_string(result),
            Format::Svg => render_svg(&result.rows),
        };
        write_file(&path, &body)?;
        written.push(path);
    }
    Ok(written)
}

/// Reads a CSV written by [`emit`] and renders its plot.
pub fn plot_from_csv(csv_path: &Path, svg_path: &Path) -> Result<()> {
    let file = std::fs::File::open(csv_path).map_err(|e| Error::io(csv_path, e))?;
    let rows = read_csv(file)?;
    if let Some(parent) = svg_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    write_file(svg_path, &render_svg(&rows))
}
