use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{arg, Result};
use crate::numeric::fit::LinearFit;

/// `(kernel, m, M, seed)` carried by every table row; absent entries are
/// written as `NA`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Provenance {
    pub kernel: String,
    pub m: Option<usize>,
    pub big_m: Option<u64>,
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn new(kernel: impl Into<String>, m: Option<usize>, big_m: Option<u64>, seed: Option<u64>) -> Self {
        Self {
            kernel: kernel.into(),
            m,
            big_m,
            seed,
        }
    }

    fn cells(&self) -> [String; 4] {
        fn opt<T: ToString>(v: Option<T>) -> String {
            v.map_or_else(|| "NA".to_string(), |v| v.to_string())
        }
        [self.kernel.clone(), opt(self.m), opt(self.big_m), opt(self.seed)]
    }
}

pub const PROVENANCE_COLUMNS: [&str; 4] = ["kernel", "m", "M", "seed"];

/// Shortest round-trip representation.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    /// Table whose first four columns are the provenance tuple.
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: PROVENANCE_COLUMNS
                .iter()
                .chain(columns)
                .map(|c| c.to_string())
                .collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, prov: &Provenance, values: Vec<String>) -> Result<()> {
        if values.len() + PROVENANCE_COLUMNS.len() != self.columns.len() {
            return arg(format!(
                "row has {} values, table expects {}",
                values.len(),
                self.columns.len() - PROVENANCE_COLUMNS.len()
            ));
        }
        let mut row: Vec<String> = prov.cells().into();
        row.extend(values);
        self.rows.push(row);
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| crate::Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k].as_str()).collect())
    }
}

/// Least-squares slope with its standard error and a 95% Student-t
/// interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedSlope {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub residual_std_error: f64,
    pub slope_std_error: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub n: usize,
}

impl From<LinearFit> for FittedSlope {
    fn from(f: LinearFit) -> Self {
        let half = if f.n > 2 {
            let t = StudentsT::new(0.0, 1.0, (f.n - 2) as f64)
                .map(|d| d.inverse_cdf(0.975))
                .unwrap_or(f64::INFINITY);
            t * f.slope_std_error
        } else {
            f64::INFINITY
        };
        Self {
            slope: f.slope,
            intercept: f.intercept,
            r_squared: f.r_squared,
            residual_std_error: f.residual_std_error,
            slope_std_error: f.slope_std_error,
            ci95_low: f.slope - half,
            ci95_high: f.slope + half,
            n: f.n,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    /// Effective configuration, echoed for provenance.
    pub config: serde_json::Value,
    #[serde(skip)]
    pub tables: BTreeMap<String, Table>,
    pub table_files: Vec<String>,
    pub fitted_slopes: BTreeMap<String, FittedSlope>,
    pub checks: BTreeMap<String, bool>,
    pub values: BTreeMap<String, f64>,
    pub seeds: Vec<u64>,
    pub wall_time: f64,
    #[serde(skip)]
    pub plots: BTreeMap<String, String>,
}

impl ExperimentReport {
    pub fn new(name: &str, config: serde_json::Value) -> Self {
        Self {
            name: name.into(),
            config,
            ..Default::default()
        }
    }

    pub fn add_table(&mut self, name: &str, table: Table) {
        self.tables.insert(name.into(), table);
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.values().all(|&b| b)
    }

    /// Writes `report.json`, `tables/<name>.csv` and `plots/<name>.svg`.
    pub fn write(&mut self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir.join("tables"))?;
        self.table_files = self.tables.keys().map(|k| format!("tables/{k}.csv")).collect();
        for (name, t) in &self.tables {
            std::fs::write(dir.join("tables").join(format!("{name}.csv")), t.to_csv_string()?)?;
        }
        if !self.plots.is_empty() {
            std::fs::create_dir_all(dir.join("plots"))?;
            for (name, svg) in &self.plots {
                std::fs::write(dir.join("plots").join(format!("{name}.svg")), svg)?;
            }
        }
        std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

/// Minimal SVG line chart; `log_y` plots `log10 y` and drops nonpositive
/// values.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[(String, Vec<(f64, f64)>)], log_y: bool) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const PAD: f64 = 60.0;
    const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
    let tf = |y: f64| if log_y { y.log10() } else { y };
    let pts: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|(_, s)| {
            s.iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite() && (!log_y || *y > 0.0))
                .map(|&(x, y)| (x, tf(y)))
                .collect()
        })
        .collect();
    let all = pts.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x0 < x1) {
        x1 = x0 + 1.0;
    }
    if !(y0 < y1) {
        y1 = y0 + 1.0;
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<path d="M{PAD} {PAD} V{} H{}" stroke="black" fill="none"/>"#,
        H - PAD,
        W - PAD
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 15.0, escape(x_label));
    let y_title = if log_y { format!("log10 {y_label}") } else { y_label.to_string() };
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(&y_title)
    );
    for (v, anchor, x, y) in [
        (x0, "middle", sx(x0), H - PAD + 16.0),
        (x1, "middle", sx(x1), H - PAD + 16.0),
        (y0, "end", PAD - 6.0, sy(y0) + 4.0),
        (y1, "end", PAD - 6.0, sy(y1) + 4.0),
    ] {
        let _ = writeln!(s, r#"<text x="{x:.1}" y="{y:.1}" text-anchor="{anchor}">{v:.3}</text>"#);
    }
    for (i, ((name, _), p)) in series.iter().zip(&pts).enumerate() {
        let color = COLORS[i % COLORS.len()];
        if !p.is_empty() {
            let d: Vec<String> = p
                .iter()
                .enumerate()
                .map(|(k, &(x, y))| format!("{}{:.1} {:.1}", if k == 0 { "M" } else { "L" }, sx(x), sy(y)))
                .collect();
            let _ = writeln!(s, r#"<path d="{}" stroke="{color}" fill="none" stroke-width="2"/>"#, d.join(" "));
            for &(x, y) in p {
                let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{color}"/>"#, sx(x), sy(y));
            }
        }
        let ly = PAD + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}" fill="{color}" text-anchor="end">{}</text>"#,
            W - PAD,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
