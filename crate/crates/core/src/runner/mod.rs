//! Configuration-driven experiments producing `report.json`, CSV tables and
//! SVG figures.

mod config;
mod experiments;
pub mod plot;
mod presets;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub use config::{Experiment, ProfileSpec, ScenarioConfig, Tolerances, SCHEMA_VERSION};
pub use presets::{preset, reference_gamma, Preset, PRESETS};

/// A named numeric table, written as `<name>.csv` and echoed in the report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "{}", self.columns.join(","))?;
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|&v| number(v)).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// Shortest round-trip form, switching to exponent notation for very small
/// or very large magnitudes.
fn number(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    #[serde(rename = "<")]
    Less,
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "in")]
    Within,
}

/// One pass/fail check with the threshold it was held to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub value: f64,
    pub comparison: Comparison,
    pub tolerance: f64,
    /// Upper end of the interval for `in`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    pub passed: bool,
}

impl Assertion {
    fn make(
        name: impl Into<String>,
        value: f64,
        comparison: Comparison,
        tolerance: f64,
        upper: Option<f64>,
    ) -> Self {
        let passed = match comparison {
            Comparison::Less => value < tolerance,
            Comparison::AtMost => value <= tolerance,
            Comparison::AtLeast => value >= tolerance,
            Comparison::Within => value >= tolerance && value <= upper.unwrap_or(f64::INFINITY),
        };
        Assertion {
            name: name.into(),
            value,
            comparison,
            tolerance,
            upper,
            passed,
        }
    }

    pub fn less(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self::make(name, value, Comparison::Less, tolerance, None)
    }

    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self::make(name, value, Comparison::AtMost, tolerance, None)
    }

    pub fn at_least(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self::make(name, value, Comparison::AtLeast, tolerance, None)
    }

    pub fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Self::make(name, value, Comparison::Within, lo, Some(hi))
    }

    pub fn describe(&self) -> String {
        let bound = match (self.comparison, self.upper) {
            (Comparison::Within, Some(hi)) => format!("in [{}, {}]", self.tolerance, hi),
            (Comparison::Less, _) => format!("< {:e}", self.tolerance),
            (Comparison::AtMost, _) => format!("<= {:e}", self.tolerance),
            _ => format!(">= {}", self.tolerance),
        };
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        format!("{verdict} {} = {:e} ({bound})", self.name, self.value)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub experiment: Experiment,
    pub config: ScenarioConfig,
    pub tables: Vec<Table>,
    pub assertions: Vec<Assertion>,
    /// Wall-clock seconds per cell and in total.
    pub timings: BTreeMap<String, f64>,
    /// Files written into the output directory.
    pub files: Vec<String>,
    pub passed: bool,
}

impl RunReport {
    pub fn failures(&self) -> impl Iterator<Item = &Assertion> {
        self.assertions.iter().filter(|a| !a.passed)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn assertion(&self, name: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.name == name)
    }
}

/// Least-squares slope of `log err` against `log N`.
pub fn estimate_rate(errors: &[(usize, f64)]) -> Result<f64> {
    if errors.len() < 3 {
        return Err(invalid("errors", "at least three points are required"));
    }
    if let Some(&(n, e)) = errors
        .iter()
        .find(|&&(n, e)| !(e > 0.0 && e.is_finite()) || n == 0)
    {
        return Err(invalid("errors", format!("non-positive entry ({n}, {e})")));
    }
    let pts: Vec<(f64, f64)> = errors
        .iter()
        .map(|&(n, e)| ((n as f64).ln(), e.ln()))
        .collect();
    let m = pts.len() as f64;
    let (mx, my) = (
        pts.iter().map(|p| p.0).sum::<f64>() / m,
        pts.iter().map(|p| p.1).sum::<f64>() / m,
    );
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("errors", "all N are equal"));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(sxy / sxx)
}

/// `err(N₁)/err(N₂)` rescaled to one doubling of `N`.
pub fn doubling_ratio(n1: usize, e1: f64, n2: usize, e2: f64) -> f64 {
    (e1 / e2).powf(std::f64::consts::LN_2 / (n2 as f64 / n1 as f64).ln())
}

/// Output directory bookkeeping shared by the experiments.
pub(crate) struct Sink {
    dir: PathBuf,
    files: Mutex<Vec<String>>,
}

impl Sink {
    fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Sink {
            dir: dir.to_path_buf(),
            files: Mutex::new(Vec::new()),
        })
    }

    fn register(&self, name: &str) -> PathBuf {
        self.files.lock().expect("poisoned").push(name.to_string());
        self.dir.join(name)
    }

    pub(crate) fn create(&self, name: &str) -> Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(self.register(name))?))
    }

    pub(crate) fn svg(&self, name: &str) -> PathBuf {
        self.register(name)
    }

    fn into_files(self) -> Vec<String> {
        let mut f = self.files.into_inner().expect("poisoned");
        f.sort();
        f.dedup();
        f
    }
}

/// Run one scenario, writing every artifact into `out`. `jobs` caps the
/// worker threads used for independent cells.
pub fn run(cfg: &ScenarioConfig, out: &Path, jobs: Option<usize>) -> Result<RunReport> {
    cfg.validate()?;
    let sink = Sink::new(out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config {
            field: "jobs".into(),
            reason: e.to_string(),
        })?;
    let start = Instant::now();
    let outcome = pool.install(|| experiments::dispatch(cfg, &sink))?;
    let mut timings = outcome.timings;
    timings.insert("total".into(), start.elapsed().as_secs_f64());
    for t in &outcome.tables {
        let mut w = sink.create(&format!("{}.csv", t.name))?;
        t.write_csv(&mut w)?;
        w.flush()?;
    }
    sink.register("report.json");
    let mut report = RunReport {
        schema_version: SCHEMA_VERSION,
        experiment: cfg.experiment,
        config: cfg.clone(),
        passed: outcome.assertions.iter().all(|a| a.passed),
        tables: outcome.tables,
        assertions: outcome.assertions,
        timings,
        files: Vec::new(),
    };
    report.files = sink.into_files();
    let mut w = BufWriter::new(File::create(out.join("report.json"))?);
    serde_json::to_writer_pretty(&mut w, &report)?;
    w.flush()?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_of_power_laws() {
        let cubic: Vec<(usize, f64)> = [64, 128, 256, 512]
            .iter()
            .map(|&n| (n, 3.0 / (n as f64).powi(3)))
            .collect();
        assert!((estimate_rate(&cubic).unwrap() + 3.0).abs() < 1e-12);
        let linear: Vec<(usize, f64)> = [10, 20, 40].iter().map(|&n| (n, 0.5 / n as f64)).collect();
        assert!((estimate_rate(&linear).unwrap() + 1.0).abs() < 1e-12);
        assert!(estimate_rate(&[(1, 1.0), (2, 0.0), (4, 1.0)]).is_err());
        assert!(estimate_rate(&[(1, 1.0), (2, 0.5)]).is_err());
    }

    #[test]
    fn doubling_ratio_normalises() {
        assert!((doubling_ratio(64, 8.0, 128, 1.0) - 8.0).abs() < 1e-12);
        assert!((doubling_ratio(100, 64.0, 400, 1.0) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn assertion_verdicts() {
        assert!(Assertion::less("a", 0.5, 0.6).passed);
        assert!(!Assertion::less("a", 0.6, 0.6).passed);
        assert!(Assertion::at_most("a", 0.6, 0.6).passed);
        assert!(Assertion::within("a", 2.0, 1.5, 3.0).passed);
        assert!(!Assertion::within("a", f64::NAN, 1.5, 3.0).passed);
        assert!(Assertion::at_least("a", 100.0, 100.0)
            .describe()
            .starts_with("PASS"));
    }

    #[test]
    fn table_csv() {
        let mut t = Table::new("x", &["N", "err"]);
        t.push(vec![64.0, 0.25]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "N,err\n64,0.25\n");
        assert_eq!(number(2.5e-9), "2.5e-9");
        assert_eq!(number(-3.0), "-3");
        assert_eq!(t.column("err"), Some(vec![0.25]));
    }
}
