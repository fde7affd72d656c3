//! File emission: CSV tables, SVG plots, and the run manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use glbm_core::{ComplexMatrix, C64};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentSpec;
use crate::error::HarnessError;

/// One emitted file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Trial that failed numerically; the run continues while at least 90% of
/// the trials in each phase succeed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub phase: String,
    pub trial: usize,
    pub error: String,
}

/// Monte Carlo phase: trial `i` used stream `(seed, i)` for `i < trials`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub name: String,
    pub seed: u64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub kind: String,
    pub spec: ExperimentSpec,
    pub seed: u64,
    pub workers: usize,
    pub status: String,
    pub phases: Vec<PhaseRecord>,
    pub failures: Vec<FailureRecord>,
    pub timings_ms: BTreeMap<String, f64>,
    pub versions: BTreeMap<String, String>,
    pub files: Vec<FileRecord>,
}

/// Hex SHA-256 of `bytes`.
pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Single writer for an output directory; records a digest per file.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    files: Vec<FileRecord>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, HarnessError> {
        fs::create_dir_all(root).map_err(|source| HarnessError::Io { path: root.display().to_string(), source })?;
        Ok(Self { root: root.to_path_buf(), files: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), HarnessError> {
        let path = self.root.join(name);
        fs::write(&path, bytes).map_err(|source| HarnessError::Io { path: path.display().to_string(), source })?;
        self.files.push(FileRecord { path: name.to_string(), sha256: digest(bytes), bytes: bytes.len() });
        Ok(())
    }

    pub fn files(&self) -> &[FileRecord] {
        &self.files
    }
}

/// Row of a verification report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub metric: String,
    pub value: f64,
    pub target: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: Option<bool>,
}

impl ReportRow {
    pub fn info(metric: impl Into<String>, value: f64) -> Self {
        Self { metric: metric.into(), value, target: None, tolerance: None, pass: None }
    }

    pub fn check(metric: impl Into<String>, value: f64, target: f64, tolerance: f64, pass: bool) -> Self {
        Self { metric: metric.into(), value, target: Some(target), tolerance: Some(tolerance), pass: Some(pass) }
    }
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn report_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from("metric,value,target,tolerance,pass\n");
    for r in rows {
        writeln!(out, "{},{},{},{},{}", r.metric, r.value, opt(r.target), opt(r.tolerance), opt(r.pass)).unwrap();
    }
    out
}

/// `trial,index,re,im`.
pub fn eigenvalues_csv(per_trial: &[(usize, Vec<C64>)]) -> String {
    let mut out = String::from("trial,index,re,im\n");
    for (trial, eig) in per_trial {
        for (k, z) in eig.iter().enumerate() {
            writeln!(out, "{trial},{k},{},{}", z.re, z.im).unwrap();
        }
    }
    out
}

/// `trial,z_re,z_im,index,sigma`.
pub fn singular_values_csv(rows: &[(usize, C64, Vec<f64>)]) -> String {
    let mut out = String::from("trial,z_re,z_im,index,sigma\n");
    for (trial, z, sv) in rows {
        for (k, s) in sv.iter().enumerate() {
            writeln!(out, "{trial},{},{},{k},{s}", z.re, z.im).unwrap();
        }
    }
    out
}

/// `trial,row,col,re,im`.
pub fn matrices_csv(per_trial: &[(usize, ComplexMatrix)]) -> String {
    let mut out = String::from("trial,row,col,re,im\n");
    for (trial, m) in per_trial {
        for i in 0..m.rows() {
            for (j, z) in m.row(i).iter().enumerate() {
                writeln!(out, "{trial},{i},{j},{},{}", z.re, z.im).unwrap();
            }
        }
    }
    out
}

/// Scatter plot of `points` with closed `curves` on top.
pub fn svg_plot(points: &[C64], curves: &[Vec<C64>]) -> String {
    const SIZE: f64 = 800.0;
    const PAD: f64 = 20.0;
    let all = points.iter().chain(curves.iter().flatten());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in all.filter(|p| p.re.is_finite() && p.im.is_finite()) {
        x0 = x0.min(p.re);
        x1 = x1.max(p.re);
        y0 = y0.min(p.im);
        y1 = y1.max(p.im);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-12);
    let scale = (SIZE - 2.0 * PAD) / span;
    let px = |p: &C64| (PAD + (p.re - x0) * scale, SIZE - PAD - (p.im - y0) * scale);
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    for p in points {
        let (x, y) = px(p);
        writeln!(out, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"1.2\" fill=\"#1f4e9c\"/>").unwrap();
    }
    for curve in curves {
        let pts: Vec<String> = curve.iter().map(|p| {
            let (x, y) = px(p);
            format!("{x:.2},{y:.2}")
        }).collect();
        writeln!(out, "<polyline points=\"{}\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1.5\"/>", pts.join(" "))
            .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use glbm_core::Complex;

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(digest(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }

    #[test]
    fn report_leaves_info_fields_blank() {
        let csv = report_csv(&[ReportRow::info("a", 1.5), ReportRow::check("b", 0.1, 0.0, 0.2, true)]);
        assert_eq!(csv, "metric,value,target,tolerance,pass\na,1.5,,,\nb,0.1,0,0.2,true\n");
    }

    #[test]
    fn csv_floats_round_trip() {
        let z = Complex::new(0.1 + 0.2, -1e-300);
        let csv = eigenvalues_csv(&[(0, vec![z])]);
        let line = csv.lines().nth(1).unwrap();
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[2].parse::<f64>().unwrap().to_bits(), z.re.to_bits());
        assert_eq!(f[3].parse::<f64>().unwrap().to_bits(), z.im.to_bits());
    }

    #[test]
    fn svg_contains_every_point() {
        let pts = vec![Complex::new(0.0, 0.0), Complex::new(1.0, 1.0)];
        let curve = vec![Complex::new(0.0, 0.0), Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)];
        let s = svg_plot(&pts, &[curve]);
        assert_eq!(s.matches("<circle").count(), 2);
        assert_eq!(s.matches("<polyline").count(), 1);
        assert!(s.starts_with("<svg"));
    }
}
