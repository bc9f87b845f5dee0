//! CSV tables, SVG line charts and JSON run reports.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sigcalc::Complex64 as C;

/// One emitted value with its source tag.
#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub source: String,
    pub x: f64,
    pub value_re: f64,
    pub value_im: f64,
    pub status: String,
}

impl Row {
    pub fn new(source: &str, x: f64, v: C, status: &str) -> Self {
        Row {
            source: source.to_string(),
            x,
            value_re: v.re,
            value_im: v.im,
            status: status.to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Comparison {
    pub x: f64,
    pub scheme: String,
    pub oracle: String,
    pub scheme_value: [f64; 2],
    pub oracle_value: [f64; 2],
    pub difference: f64,
}

impl Comparison {
    pub fn new(x: f64, scheme: &str, sv: C, oracle: &str, ov: C) -> Self {
        Comparison {
            x,
            scheme: scheme.into(),
            oracle: oracle.into(),
            scheme_value: [sv.re, sv.im],
            oracle_value: [ov.re, ov.im],
            difference: (sv - ov).norm(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub config: serde_json::Value,
    pub rows: Vec<Row>,
    pub comparisons: Vec<Comparison>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub seconds: f64,
    pub status: String,
}

impl Report {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        Report {
            command: command.into(),
            config,
            rows: Vec::new(),
            comparisons: Vec::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            seconds: 0.0,
            status: "ok".into(),
        }
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail,
        });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Writes `<prefix>.csv`, `<prefix>.svg` and `<prefix>.report.json`.
pub fn write_outputs(
    prefix: &Path,
    csv_text: &str,
    x_label: &str,
    title: &str,
    report: &Report,
) -> std::io::Result<Vec<PathBuf>> {
    if let Some(parent) = prefix.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let with_ext = |ext: &str| {
        let mut s = prefix.as_os_str().to_owned();
        s.push(ext);
        PathBuf::from(s)
    };
    let csv = with_ext(".csv");
    let svg = with_ext(".svg");
    let json = with_ext(".report.json");
    fs::write(&csv, csv_text)?;
    fs::write(&svg, line_chart(title, x_label, &report.rows))?;
    fs::write(&json, serde_json::to_string_pretty(report).expect("report serializes") + "\n")?;
    Ok(vec![csv, svg, json])
}

pub fn to_csv(x_label: &str, rows: &[Row]) -> String {
    let mut out = format!("source,{x_label},value_re,value_im,status\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.source, r.x, r.value_re, r.value_im, r.status);
    }
    out
}

const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// Real parts of every source as polylines on shared axes.
pub fn line_chart(title: &str, x_label: &str, rows: &[Row]) -> String {
    let (w, h, pad) = (720.0, 440.0, 60.0);
    let mut sources: Vec<&str> = Vec::new();
    for r in rows {
        if !sources.contains(&r.source.as_str()) {
            sources.push(&r.source);
        }
    }
    let finite: Vec<&Row> = rows.iter().filter(|r| r.x.is_finite() && r.value_re.is_finite()).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for r in &finite {
        x0 = x0.min(r.x);
        x1 = x1.max(r.x);
        y0 = y0.min(r.value_re);
        y1 = y1.max(r.value_re);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-12 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let sx = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#, w / 2.0, escape(title));
    let _ = writeln!(s, r#"<line x1="{pad}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#, h - pad, w - pad, h - pad);
    let _ = writeln!(s, r#"<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{}" stroke="black"/>"#, h - pad);
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#, sx(fx), h - pad + 16.0, tick(fx));
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#, pad - 6.0, sy(fy) + 4.0, tick(fy));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#, w / 2.0, h - 18.0, escape(x_label));
    for (i, src) in sources.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = finite
            .iter()
            .filter(|r| r.source == *src)
            .map(|r| format!("{:.2},{:.2}", sx(r.x), sy(r.value_re)))
            .collect();
        if !pts.is_empty() {
            let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        }
        let ly = pad + 16.0 * i as f64;
        let _ = writeln!(s, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, w - pad - 150.0, w - pad - 130.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11">{}</text>"#, w - pad - 125.0, ly + 4.0, escape(src));
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.1e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
