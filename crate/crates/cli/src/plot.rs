//! Static SVG line plots and region maps rendered from CSV columns.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::report::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    Line,
    Region,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotSpec {
    pub kind: PlotKind,
    pub x: String,
    /// Line: one series per column. Region: the single y column.
    pub y: Vec<String>,
    /// Region: boolean column that selects filled cells.
    #[serde(default)]
    pub value: Option<String>,
    /// Line: split each series by the values of these columns.
    #[serde(default)]
    pub group_by: Vec<String>,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub x_label: String,
    #[serde(default)]
    pub y_label: String,
    #[serde(default)]
    pub log_x: bool,
    pub output: String,
}

impl PlotSpec {
    pub fn line(x: &str, y: &[&str], title: &str, x_label: &str, y_label: &str, output: &str) -> Self {
        PlotSpec {
            kind: PlotKind::Line,
            x: x.into(),
            y: y.iter().map(|s| s.to_string()).collect(),
            value: None,
            group_by: Vec::new(),
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            log_x: false,
            output: output.into(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io("plot spec", path, e))?;
        toml::from_str(&text).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))
    }

    fn required(&self) -> Vec<&str> {
        let mut cols = vec![self.x.as_str()];
        cols.extend(self.y.iter().map(String::as_str));
        cols.extend(self.value.iter().map(String::as_str));
        cols.extend(self.group_by.iter().map(String::as_str));
        cols
    }
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn read(path: &Path) -> Result<Table, CliError> {
        let mut r = csv::Reader::from_path(path).map_err(|e| CliError::io("csv", path, e))?;
        let header = r.headers().map_err(|e| CliError::io("csv", path, e))?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec.map_err(|e| CliError::io("csv", path, e))?.iter().map(String::from).collect());
        }
        Ok(Table { header, rows })
    }

    fn col(&self, name: &str) -> usize {
        self.header.iter().position(|h| h == name).expect("column checked")
    }

    fn num(&self, row: usize, col: usize) -> f64 {
        self.rows[row][col].trim().parse().unwrap_or(f64::NAN)
    }
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const ML: f64 = 70.0;
const MR: f64 = 150.0;
const MT: f64 = 40.0;
const MB: f64 = 55.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#2ca02c", "#17becf", "#d62728", "#9467bd", "#ff7f0e", "#8c564b", "#7f7f7f"];

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(1e-300);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e5 || v.abs() < 1e-3) {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    log_x: bool,
}

impl Frame {
    fn tx(&self, x: f64) -> f64 {
        let (a, b, v) = if self.log_x { (self.x0.log10(), self.x1.log10(), x.log10()) } else { (self.x0, self.x1, x) };
        ML + (v - a) / (b - a) * (W - ML - MR)
    }

    fn ty(&self, y: f64) -> f64 {
        H - MB - (y - self.y0) / (self.y1 - self.y0) * (H - MT - MB)
    }

    fn axes(&self, svg: &mut String, spec: &PlotSpec) {
        let _ = writeln!(svg, r##"<rect x="{ML}" y="{MT}" width="{}" height="{}" fill="none" stroke="#000"/>"##, W - ML - MR, H - MT - MB);
        let xt = if self.log_x {
            let (a, b) = (self.x0.log10().ceil() as i32, self.x1.log10().floor() as i32);
            (a..=b).map(|k| 10f64.powi(k)).collect()
        } else {
            nice_ticks(self.x0, self.x1)
        };
        for t in xt {
            let x = self.tx(t);
            let _ = writeln!(
                svg,
                r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#000"/><text x="{x:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"##,
                H - MB,
                H - MB + 5.0,
                H - MB + 18.0,
                fmt_tick(t)
            );
        }
        for t in nice_ticks(self.y0, self.y1) {
            let y = self.ty(t);
            let _ = writeln!(
                svg,
                r##"<line x1="{:.2}" y1="{y:.2}" x2="{ML}" y2="{y:.2}" stroke="#000"/><text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"##,
                ML - 5.0,
                ML - 8.0,
                y + 4.0,
                fmt_tick(t)
            );
        }
        let _ = writeln!(
            svg,
            r##"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">{}</text>"##,
            ML + (W - ML - MR) / 2.0,
            H - 15.0,
            esc(&spec.x_label)
        );
        let _ = writeln!(
            svg,
            r##"<text x="18" y="{:.2}" font-size="13" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"##,
            MT + (H - MT - MB) / 2.0,
            MT + (H - MT - MB) / 2.0,
            esc(&spec.y_label)
        );
        let _ = writeln!(svg, r##"<text x="{:.2}" y="24" font-size="14" text-anchor="middle">{}</text>"##, W / 2.0, esc(&spec.title));
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let p = 0.03 * (hi - lo);
        (lo - p, hi + p)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn open_svg() -> String {
    format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n")
}

fn render_line(t: &Table, spec: &PlotSpec) -> String {
    let xc = t.col(&spec.x);
    let groups: Vec<usize> = spec.group_by.iter().map(|g| t.col(g)).collect();
    let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    let mut order = Vec::new();
    for name in &spec.y {
        let yc = t.col(name);
        for r in 0..t.rows.len() {
            let mut key = if spec.y.len() > 1 || groups.is_empty() { name.clone() } else { String::new() };
            for &g in &groups {
                if !key.is_empty() {
                    key.push(' ');
                }
                key.push_str(&t.rows[r][g]);
            }
            if !series.contains_key(&key) {
                order.push(key.clone());
            }
            series.entry(key).or_default().push((t.num(r, xc), t.num(r, yc)));
        }
    }
    let ok = |&(x, y): &(f64, f64)| x.is_finite() && y.is_finite() && (!spec.log_x || x > 0.0);
    let pts = series.values().flatten().filter(|p| ok(p));
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let (y0, y1) = padded(y0, y1);
    let (x0, x1) = if spec.log_x { (x0, if x1 > x0 { x1 } else { x0 * 10.0 }) } else { padded(x0, x1) };
    let f = Frame { x0, x1, y0, y1, log_x: spec.log_x };
    let mut svg = open_svg();
    f.axes(&mut svg, spec);
    for (k, key) in order.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut seg = Vec::new();
        let flush = |seg: &mut Vec<String>, svg: &mut String| {
            if seg.len() > 1 {
                let _ = writeln!(svg, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, seg.join(" "));
            }
            seg.clear();
        };
        for p in &series[key] {
            if ok(p) {
                seg.push(format!("{:.2},{:.2}", f.tx(p.0), f.ty(p.1)));
            } else {
                flush(&mut seg, &mut svg);
            }
        }
        flush(&mut seg, &mut svg);
        let ly = MT + 10.0 + 18.0 * k as f64;
        let lx = W - MR + 10.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}" font-size="11">{}</text>"#,
            lx + 20.0,
            lx + 25.0,
            ly + 4.0,
            esc(key)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn truthy(s: &str) -> bool {
    matches!(s.trim(), "true" | "1" | "yes")
}

fn edges(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut e = Vec::with_capacity(n + 1);
    for i in 0..=n {
        e.push(match (i.checked_sub(1).map(|j| v[j]), v.get(i)) {
            (None, Some(&b)) => b - if n > 1 { (v[1] - v[0]) / 2.0 } else { 0.5 },
            (Some(a), None) => a + if n > 1 { (v[n - 1] - v[n - 2]) / 2.0 } else { 0.5 },
            (Some(a), Some(&b)) => (a + b) / 2.0,
            (None, None) => 0.0,
        });
    }
    e
}

fn render_region(t: &Table, spec: &PlotSpec) -> String {
    let (xc, yc) = (t.col(&spec.x), t.col(&spec.y[0]));
    let vc = t.col(spec.value.as_deref().expect("region value checked"));
    let mut xs: Vec<f64> = (0..t.rows.len()).map(|r| t.num(r, xc)).filter(|v| v.is_finite()).collect();
    let mut ys: Vec<f64> = (0..t.rows.len()).map(|r| t.num(r, yc)).filter(|v| v.is_finite()).collect();
    for v in [&mut xs, &mut ys] {
        v.sort_by(f64::total_cmp);
        v.dedup();
    }
    let idx = |v: &[f64], x: f64| v.binary_search_by(|a| a.total_cmp(&x)).ok();
    let mut cells = vec![vec![None; ys.len()]; xs.len()];
    for r in 0..t.rows.len() {
        if let (Some(i), Some(j)) = (idx(&xs, t.num(r, xc)), idx(&ys, t.num(r, yc))) {
            cells[i][j] = Some(truthy(&t.rows[r][vc]));
        }
    }
    let (ex, ey) = (edges(&xs), edges(&ys));
    let f = Frame { x0: ex[0], x1: ex[xs.len()], y0: ey[0], y1: ey[ys.len()], log_x: false };
    let mut svg = open_svg();
    for i in 0..xs.len() {
        for j in 0..ys.len() {
            let fill = match cells[i][j] {
                Some(true) => "#a6dba0",
                Some(false) => "#e0e0e0",
                None => continue,
            };
            let (xa, xb, ya, yb) = (f.tx(ex[i]), f.tx(ex[i + 1]), f.ty(ey[j + 1]), f.ty(ey[j]));
            let _ = writeln!(svg, r#"<rect x="{xa:.2}" y="{ya:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#, xb - xa, yb - ya);
        }
    }
    let mut path = String::new();
    for i in 0..xs.len() {
        for j in 0..ys.len() {
            let c = cells[i][j];
            if i + 1 < xs.len() && c.is_some() && cells[i + 1][j].is_some() && c != cells[i + 1][j] {
                let _ = write!(path, "M{:.2},{:.2}V{:.2}", f.tx(ex[i + 1]), f.ty(ey[j]), f.ty(ey[j + 1]));
            }
            if j + 1 < ys.len() && c.is_some() && cells[i][j + 1].is_some() && c != cells[i][j + 1] {
                let _ = write!(path, "M{:.2},{:.2}H{:.2}", f.tx(ex[i]), f.ty(ey[j + 1]), f.tx(ex[i + 1]));
            }
        }
    }
    if !path.is_empty() {
        let _ = writeln!(svg, r##"<path d="{path}" fill="none" stroke="#d62728" stroke-width="2"/>"##);
    }
    f.axes(&mut svg, spec);
    let lx = W - MR + 10.0;
    let value = esc(spec.value.as_deref().unwrap_or_default());
    let _ = writeln!(
        svg,
        r##"<rect x="{lx}" y="{}" width="14" height="14" fill="#a6dba0"/><text x="{}" y="{}" font-size="11">{value}</text>"##,
        MT + 2.0,
        lx + 20.0,
        MT + 13.0
    );
    let _ = writeln!(
        svg,
        r##"<rect x="{lx}" y="{}" width="14" height="14" fill="#e0e0e0"/><text x="{}" y="{}" font-size="11">not {value}</text>"##,
        MT + 22.0,
        lx + 20.0,
        MT + 33.0
    );
    svg.push_str("</svg>\n");
    svg
}

/// Renders `csv` according to `spec` into `out_dir`. Returns `None` (and
/// logs a warning) when the CSV has no data rows.
pub fn emit_plot(csv: &Path, spec: &PlotSpec, out_dir: &Path) -> Result<Option<PathBuf>, CliError> {
    let t = Table::read(csv)?;
    let missing: Vec<&str> = spec.required().into_iter().filter(|c| !t.header.iter().any(|h| h == c)).collect();
    if !missing.is_empty() {
        return Err(CliError::Plot(format!("{} lacks column(s): {}", csv.display(), missing.join(", "))));
    }
    if spec.y.is_empty() {
        return Err(CliError::Plot("plot spec needs at least one y column".into()));
    }
    if spec.kind == PlotKind::Region && spec.value.is_none() {
        return Err(CliError::Plot("region plots need a `value` column".into()));
    }
    if t.rows.is_empty() {
        log::warn!("{} has no data rows; no plot written", csv.display());
        return Ok(None);
    }
    let svg = match spec.kind {
        PlotKind::Line => render_line(&t, spec),
        PlotKind::Region => render_region(&t, spec),
    };
    let path = out_dir.join(&spec.output);
    std::fs::write(&path, svg).map_err(|e| CliError::io("plot", &path, e))?;
    Ok(Some(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_cover_range() {
        let t = nice_ticks(0.0, 1.0);
        assert_eq!(t.first(), Some(&0.0));
        assert!((t.last().unwrap() - 1.0).abs() < 1e-12);
        assert!(nice_ticks(-3.2, 7.9).len() >= 3);
    }

    #[test]
    fn cell_edges() {
        assert_eq!(edges(&[0.0, 1.0, 2.0]), vec![-0.5, 0.5, 1.5, 2.5]);
    }
}
