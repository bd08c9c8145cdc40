//! Plain-text persistence: snapshots, diagnostics and report CSVs, and the
//! manifest. Reals are written with 17 significant digits so that reading
//! and rewriting is byte-stable.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::evolution::{DiagnosticsSeries, RunResult};
use crate::experiments::{Cell, ExperimentReport};
use crate::solitary::SolitaryWave;
use crate::spectral::{Field, GridSpec};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Fs {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed header: {reason}")]
    MalformedHeader { path: PathBuf, reason: String },
    #[error("{path}: expected {expected} samples, found {actual}")]
    SampleCount { path: PathBuf, expected: usize, actual: usize },
    #[error("{path}: line {line}: cannot parse `{text}` as a number")]
    BadSample { path: PathBuf, line: usize, text: String },
}

fn fs_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Fs {
        path: path.to_path_buf(),
        source,
    }
}

pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// A field with its time stamp and (optionally) the alpha it belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub field: Field,
    pub time: f64,
    pub alpha: Option<f64>,
}

/// Header `n_points half_length time alpha` (alpha `none` when absent), then
/// one sample per line.
pub fn snapshot_text(field: &Field, time: f64, alpha: Option<f64>) -> String {
    let g = field.grid();
    let mut s = String::with_capacity(24 * (g.n_points() + 4));
    let a = alpha.map_or("none".to_string(), fmt_real);
    let _ = writeln!(s, "{} {} {} {}", g.n_points(), fmt_real(g.half_length()), fmt_real(time), a);
    for v in field.samples() {
        s.push_str(&fmt_real(*v));
        s.push('\n');
    }
    s
}

pub fn parse_snapshot(text: &str, path: &Path) -> Result<Snapshot, IoError> {
    let malformed = |reason: &str| IoError::MalformedHeader {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| malformed("file is empty"))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 4 {
        return Err(malformed("expected `n_points half_length time alpha`"));
    }
    let n: usize = parts[0].parse().map_err(|_| malformed("n_points is not an integer"))?;
    let l: f64 = parts[1].parse().map_err(|_| malformed("half_length is not a number"))?;
    let time: f64 = parts[2].parse().map_err(|_| malformed("time is not a number"))?;
    let alpha = match parts[3] {
        "none" => None,
        t => Some(t.parse::<f64>().map_err(|_| malformed("alpha is not a number"))?),
    };
    let grid = GridSpec::new(n, l).map_err(|e| malformed(&e.to_string()))?;
    let mut samples = Vec::with_capacity(n);
    for (k, line) in lines.enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let v: f64 = t.parse().map_err(|_| IoError::BadSample {
            path: path.to_path_buf(),
            line: k + 2,
            text: t.to_string(),
        })?;
        samples.push(v);
    }
    if samples.len() != n {
        return Err(IoError::SampleCount {
            path: path.to_path_buf(),
            expected: n,
            actual: samples.len(),
        });
    }
    let field = Field::from_samples(grid, samples).map_err(|e| malformed(&e.to_string()))?;
    Ok(Snapshot { field, time, alpha })
}

pub fn load_snapshot(path: impl AsRef<Path>) -> Result<Snapshot, IoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(fs_err(path))?;
    parse_snapshot(&text, path)
}

pub fn diagnostics_csv(series: &DiagnosticsSeries) -> String {
    let mut s = String::from("t,mass,hamiltonian,sup_u,sup_ux,dt");
    for h in &series.hs_list {
        let _ = write!(s, ",hs_{h}");
    }
    s.push('\n');
    for r in &series.records {
        let mut cols = vec![r.t, r.mass, r.hamiltonian, r.sup_u, r.sup_ux, r.dt];
        cols.extend(&r.hs);
        s.push_str(&cols.into_iter().map(fmt_real).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    s
}

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Num(v) => fmt_real(*v),
        Cell::Text(t) => t.clone(),
    }
}

pub fn report_csv(report: &ExperimentReport) -> String {
    let mut s = report.columns.join(",");
    s.push('\n');
    for row in &report.rows {
        s.push_str(&row.iter().map(cell_text).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    s
}

pub fn verdicts_csv(report: &ExperimentReport) -> String {
    let mut s = String::from("name,passed,measured,tolerance\n");
    for v in &report.verdicts {
        let _ = writeln!(s, "{},{},{},{}", v.name, v.passed, fmt_real(v.measured), fmt_real(v.tolerance));
    }
    s
}

pub fn measured_csv(report: &ExperimentReport) -> String {
    let mut s = String::from("name,value\n");
    for (k, v) in &report.measured {
        let _ = writeln!(s, "{k},{}", fmt_real(*v));
    }
    s
}

/// Sidecar `c residual iterations r1 r2` of a solitary wave.
pub fn soliton_sidecar(wave: &SolitaryWave) -> String {
    format!(
        "c residual iterations r1 r2\n{} {} {} {} {}\n",
        fmt_real(wave.speed),
        fmt_real(wave.residual),
        wave.iterations,
        fmt_real(wave.pohozaev.0),
        fmt_real(wave.pohozaev.1)
    )
}

/// The files produced for one result, before they touch the disk.
#[derive(Debug, Clone, Default)]
pub struct OutputSet {
    files: Vec<(String, String)>,
}

impl OutputSet {
    pub fn add(&mut self, name: impl Into<String>, contents: String) {
        self.files.push((name.into(), contents));
    }

    pub fn names(&self) -> Vec<&str> {
        self.files.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn contents(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }
}

pub fn run_outputs(result: &RunResult, alpha: Option<f64>) -> OutputSet {
    let mut out = OutputSet::default();
    out.add("diagnostics.csv", diagnostics_csv(&result.diagnostics));
    out.add(
        "final.txt",
        snapshot_text(&result.final_field, result.final_time, alpha),
    );
    for (k, (t, f)) in result.snapshots.iter().enumerate() {
        out.add(format!("snapshot_{k:05}.txt"), snapshot_text(f, *t, alpha));
    }
    let mut summary = String::from("outcome,final_time,breaking_time,steps\n");
    let _ = writeln!(
        summary,
        "{},{},{},{}",
        result.outcome.tag(),
        fmt_real(result.final_time),
        result.breaking_time.map_or("none".to_string(), fmt_real),
        result.steps
    );
    out.add("summary.csv", summary);
    out
}

pub fn soliton_outputs(wave: &SolitaryWave) -> OutputSet {
    let mut out = OutputSet::default();
    out.add("profile.txt", snapshot_text(&wave.profile, 0.0, Some(wave.alpha)));
    out.add("soliton.txt", soliton_sidecar(wave));
    out
}

pub fn report_outputs(report: &ExperimentReport) -> OutputSet {
    let mut out = OutputSet::default();
    out.add("report.csv", report_csv(report));
    out.add("verdicts.csv", verdicts_csv(report));
    out.add("measured.csv", measured_csv(report));
    for (label, series) in &report.series {
        out.add(format!("diagnostics_{label}.csv"), diagnostics_csv(series));
    }
    for (label, t, f) in &report.fields {
        out.add(format!("snapshot_{label}.txt"), snapshot_text(f, *t, None));
    }
    out
}

/// Writes every file of `set` plus `manifest.txt` into `dir`. Each file goes
/// through a temporary name and a rename; on failure everything written by
/// this call is removed. Returns the paths written, manifest last.
pub fn emit_outputs(set: &OutputSet, dir: &Path, resolved_config: &str) -> Result<Vec<PathBuf>, IoError> {
    fs::create_dir_all(dir).map_err(fs_err(dir))?;
    let mut manifest = String::new();
    let _ = writeln!(manifest, "fracwave {VERSION}");
    manifest.push_str("[files]\n");
    for name in set.names() {
        let _ = writeln!(manifest, "{name}");
    }
    manifest.push_str("[config]\n");
    manifest.push_str(resolved_config);
    if !resolved_config.ends_with('\n') {
        manifest.push('\n');
    }

    let mut written: Vec<PathBuf> = Vec::new();
    let all = set.files.iter().map(|(n, c)| (n.as_str(), c.as_str())).chain([("manifest.txt", manifest.as_str())]);
    for (name, contents) in all {
        let path = dir.join(name);
        if let Err(e) = write_atomic(&path, contents) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            return Err(e);
        }
        written.push(path);
    }
    Ok(written)
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), IoError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    let res = fs::write(&tmp, contents).and_then(|_| fs::rename(&tmp, path));
    if res.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    res.map_err(fs_err(path))
}
