//! CSV, JSON and SVG output stamped with a run manifest.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const TIMESTAMP_KEY: &str = "timestamp";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub config_sha256: String,
    pub seed: u64,
    pub timestamp: u64,
    pub params: Vec<(String, String)>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        write!(s, "{b:02x}").unwrap();
        s
    })
}

pub fn unix_time() -> u64 {
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

impl Manifest {
    /// Manifest for a run whose full parameter text is `config_text`.
    pub fn new(config_text: &str, params: Vec<(String, String)>, seed: u64, timestamp: u64) -> Self {
        Manifest { tool: format!("rank1 {VERSION}"), config_sha256: sha256_hex(config_text.as_bytes()), seed, timestamp, params }
    }

    /// `# key = value` lines.
    pub fn comment_lines(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# tool = {}", self.tool).unwrap();
        writeln!(s, "# config_sha256 = {}", self.config_sha256).unwrap();
        writeln!(s, "# seed = {}", self.seed).unwrap();
        writeln!(s, "# {TIMESTAMP_KEY} = {}", self.timestamp).unwrap();
        for (k, v) in &self.params {
            writeln!(s, "# param {k} = {v}").unwrap();
        }
        s
    }
}

/// A table of string cells.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width differs from header");
        self.rows.push(row);
    }
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn to_csv(manifest: &Manifest, table: &Table) -> String {
    let mut s = manifest.comment_lines();
    let line = |cells: &[String]| cells.iter().map(|c| csv_cell(c)).collect::<Vec<_>>().join(",");
    writeln!(s, "{}", line(&table.columns)).unwrap();
    for r in &table.rows {
        writeln!(s, "{}", line(r)).unwrap();
    }
    s
}

/// CSV text with the timestamp comment line removed.
pub fn strip_timestamp(csv: &str) -> String {
    let prefix = format!("# {TIMESTAMP_KEY} = ");
    csv.lines().filter(|l| !l.starts_with(&prefix)).map(|l| format!("{l}\n")).collect()
}

pub fn to_json<T: Serialize>(manifest: &Manifest, body: &T) -> String {
    #[derive(Serialize)]
    struct Doc<'a, T> {
        manifest: &'a Manifest,
        #[serde(flatten)]
        body: &'a T,
    }
    serde_json::to_string_pretty(&Doc { manifest, body }).expect("serializable output")
}

/// A named polyline.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Log-log line plot; points with non-positive coordinates are dropped.
pub fn svg_loglog(title: &str, series: &[Series]) -> String {
    let (w, h, ml, mr, mt, mb) = (640.0, 420.0, 70.0, 170.0, 40.0, 50.0);
    let pts: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| s.points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.log10(), y.log10())).collect())
        .collect();
    let all: Vec<(f64, f64)> = pts.iter().flatten().copied().collect();
    let span = |v: Vec<f64>| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi - lo < 1e-9 {
            (lo.floor(), lo.floor() + 1.0)
        } else {
            (lo.floor(), hi.ceil())
        }
    };
    let (x0, x1) = span(all.iter().map(|p| p.0).collect());
    let (y0, y1) = span(all.iter().map(|p| p.1).collect());
    let px = |x: f64| ml + (x - x0) / (x1 - x0) * (w - ml - mr);
    let py = |y: f64| h - mb - (y - y0) / (y1 - y0) * (h - mt - mb);
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#).unwrap();
    writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, (ml + w - mr) / 2.0, xml_escape(title)).unwrap();
    writeln!(s, r#"<rect x="{ml}" y="{mt}" width="{}" height="{}" fill="none" stroke="black"/>"#, w - ml - mr, h - mt - mb).unwrap();
    for d in (x0 as i64)..=(x1 as i64) {
        let x = px(d as f64);
        writeln!(s, r#"<line x1="{x:.1}" y1="{}" x2="{x:.1}" y2="{}" stroke="black"/>"#, h - mb, h - mb + 5.0).unwrap();
        writeln!(s, r#"<text x="{x:.1}" y="{}" text-anchor="middle">1e{d}</text>"#, h - mb + 18.0).unwrap();
    }
    for d in (y0 as i64)..=(y1 as i64) {
        let y = py(d as f64);
        writeln!(s, r#"<line x1="{}" y1="{y:.1}" x2="{ml}" y2="{y:.1}" stroke="black"/>"#, ml - 5.0).unwrap();
        writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">1e{d}</text>"#, ml - 8.0, y + 4.0).unwrap();
    }
    for (i, (ser, p)) in series.iter().zip(&pts).enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = p.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, coords.join(" ")).unwrap();
        for c in &coords {
            let (cx, cy) = c.split_once(',').unwrap();
            writeln!(s, r#"<circle cx="{cx}" cy="{cy}" r="2.5" fill="{color}"/>"#).unwrap();
        }
        let ly = mt + 10.0 + 18.0 * i as f64;
        writeln!(s, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, w - mr + 10.0, w - mr + 30.0)
            .unwrap();
        writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, w - mr + 35.0, ly + 4.0, xml_escape(&ser.name)).unwrap();
    }
    s.push_str("</svg>\n");
    s
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_known_value() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn csv_layout() {
        let m = Manifest::new("seed = 1\n", vec![("seed".into(), "1".into())], 1, 42);
        let mut t = Table::new(&["n", "statistic", "value"]);
        t.push(vec!["10".into(), "a,b".into(), "0.5".into()]);
        let csv = to_csv(&m, &t);
        assert!(csv.contains("# timestamp = 42\n"));
        assert!(csv.ends_with("n,statistic,value\n10,\"a,b\",0.5\n"));
        let other = to_csv(&Manifest { timestamp: 7, ..m }, &t);
        assert_ne!(csv, other);
        assert_eq!(strip_timestamp(&csv), strip_timestamp(&other));
    }

    #[test]
    fn svg_is_well_formed() {
        let s = svg_loglog("a < b", &[Series { name: "x".into(), points: vec![(10.0, 1.0), (100.0, 0.1), (0.0, 1.0)] }]);
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert!(s.contains("a &lt; b"));
        assert_eq!(s.matches("<circle").count(), 2);
    }
}
