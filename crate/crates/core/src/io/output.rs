//! Run output: `fronts.csv`, `fields.csv`, `header.json` and `report.json`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::bounds::{AprioriBounds, GammaReport};
use crate::model::{ConfigError, ProblemConfig};
use crate::stepper::{FrontRecord, MonitorReport, Snapshot, Trajectory};

use super::config_file::{config_pairs, config_text};

pub const FRONTS_FILE: &str = "fronts.csv";
pub const FIELDS_FILE: &str = "fields.csv";
pub const HEADER_FILE: &str = "header.json";
pub const REPORT_FILE: &str = "report.json";

/// Seventeen significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_fronts_csv(path: &Path, fronts: &[FrontRecord]) -> std::io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "t,g,h,gdot,hdot,picard_iters,residual")?;
    for r in fronts {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            num(r.t),
            num(r.g),
            num(r.h),
            num(r.gdot),
            num(r.hdot),
            r.picard_iters,
            num(r.residual)
        )?;
    }
    out.flush()
}

/// Long format, one row per snapshot node; `y` is the reference coordinate of `x`.
pub fn write_fields_csv(path: &Path, snapshots: &[Snapshot]) -> std::io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "t,y,x,w,z")?;
    for s in snapshots {
        let (g, h) = (s.fronts.g, s.fronts.h);
        for ((&x, &w), &z) in s.x.iter().zip(&s.w).zip(&s.z) {
            let y = ((2.0 * x - g - h) / (h - g)).clamp(-1.0, 1.0);
            writeln!(
                out,
                "{},{},{},{},{}",
                num(s.t),
                num(y),
                num(x),
                num(w),
                num(z)
            )?;
        }
    }
    out.flush()
}

/// Key-value pairs serialized as a JSON object in their given order.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigEcho(pub Vec<(String, String)>);

impl Serialize for ConfigEcho {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Header {
    pub program: &'static str,
    pub version: &'static str,
    /// Canonical key-value echo of the configuration.
    pub config: ConfigEcho,
    /// The same configuration as file text.
    pub config_text: String,
    pub bounds: AprioriBounds,
}

impl Header {
    pub fn new(cfg: &ProblemConfig, bounds: &AprioriBounds) -> Result<Self, ConfigError> {
        Ok(Header {
            program: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            config: ConfigEcho(
                config_pairs(cfg)?
                    .into_iter()
                    .map(|(k, v)| (k.to_string(), v))
                    .collect(),
            ),
            config_text: config_text(cfg)?,
            bounds: bounds.clone(),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    /// `clean`, `invariant_failure` or `solver_error`.
    pub status: &'static str,
    pub error: Option<String>,
    pub steps: usize,
    pub final_fronts: Option<FrontRecord>,
    pub monitor: MonitorReport,
    pub gamma: GammaReport,
}

impl RunReport {
    pub fn new(traj: &Trajectory, error: Option<&dyn std::fmt::Display>) -> Self {
        let status = match (error, traj.monitor.clean()) {
            (Some(_), _) => "solver_error",
            (None, false) => "invariant_failure",
            (None, true) => "clean",
        };
        RunReport {
            status,
            error: error.map(|e| e.to_string()),
            steps: traj.fronts.len().saturating_sub(1),
            final_fronts: traj.final_fronts().copied(),
            monitor: traj.monitor.clone(),
            gamma: traj.gamma.clone(),
        }
    }

    pub fn is_clean(&self) -> bool {
        self.status == "clean"
    }
}

pub fn write_json(path: &Path, value: &impl Serialize) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

/// Writes all four output files into `dir`, creating it if needed.
pub fn write_run_output(
    dir: &Path,
    header: &Header,
    traj: &Trajectory,
    report: &RunReport,
) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    write_json(&dir.join(HEADER_FILE), header)?;
    write_fronts_csv(&dir.join(FRONTS_FILE), &traj.fronts)?;
    write_fields_csv(&dir.join(FIELDS_FILE), &traj.snapshots)?;
    write_json(&dir.join(REPORT_FILE), report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::FrontPair;

    #[test]
    fn fronts_csv_format() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let rec = FrontRecord {
            t: 0.5,
            g: -1.0,
            h: 1.0,
            gdot: -0.25,
            hdot: 0.25,
            picard_iters: 3,
            residual: 1e-12,
        };
        write_fronts_csv(&path, &[rec]).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,g,h,gdot,hdot,picard_iters,residual"));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0], "5.0000000000000000e-1");
        assert_eq!(row[5], "3");
        assert_eq!(row[6].parse::<f64>().unwrap(), 1e-12);
    }

    #[test]
    fn fields_csv_rows_match_nodes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        let snap = Snapshot {
            t: 0.0,
            fronts: FrontPair::at_rest(-2.0, 2.0),
            x: vec![-2.0, 0.0, 2.0],
            w: vec![0.0, 1.0, 0.0],
            z: vec![0.0, 0.5, 0.0],
        };
        write_fields_csv(&path, &[snap.clone(), snap]).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 7);
        let mid: Vec<f64> = text
            .lines()
            .nth(2)
            .unwrap()
            .split(',')
            .map(|v| v.parse().unwrap())
            .collect();
        assert_eq!(mid, vec![0.0, 0.0, 0.0, 1.0, 0.5]);
    }
}
