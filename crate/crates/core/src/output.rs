//! CSV/JSON emission. Floats use the shortest representation that parses
//! back to the same bits, so repeated runs give byte-identical files.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use crate::bifurcation::{ContinuationPath, QuiverCell, RegionMap};
use crate::equilibria::FixedPoint;
use crate::error::Result;
use crate::sim::{Event, EventKind, Trajectory};
use crate::stability::StabilityReport;

pub const TRAJECTORY_HEADER: [&str; 7] = ["t", "p", "p_dot", "l", "l_dot", "mode", "tau"];
pub const FIXED_POINT_HEADER: [&str; 5] = ["F_L", "p_star", "l_star", "origin_flag", "valid"];
pub const CLASSIFICATION_HEADER: [&str; 9] = ["F_L", "p_star", "A", "B", "Gamma", "Delta", "h1", "h2", "class"];
pub const PATH_HEADER: [&str; 3] = ["F_L", "p_star", "in_S"];
pub const REGION_HEADER: [&str; 6] = ["p", "F_L", "h1", "h2", "in_S", "in_U"];
pub const QUIVER_HEADER: [&str; 3] = ["p", "F_L", "dp_dFL"];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn fmt_bool(b: bool) -> String {
    b.to_string()
}

/// Writes a header and rows; returns the number of data rows.
pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<usize>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(header)?;
    let mut count = 0;
    for row in rows {
        writer.write_record(&row)?;
        count += 1;
    }
    writer.flush()?;
    Ok(count)
}

pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<usize> {
    write_csv(
        path,
        &TRAJECTORY_HEADER,
        traj.samples.iter().map(|s| {
            vec![
                fmt_f64(s.t),
                fmt_f64(s.state.p),
                fmt_f64(s.state.p_dot),
                fmt_f64(s.state.l),
                fmt_f64(s.state.l_dot),
                s.mode.code().to_string(),
                fmt_f64(s.tau),
            ]
        }),
    )
}

fn event_kind_name(kind: EventKind) -> &'static str {
    match kind {
        EventKind::UnlatchTauZero => "unlatch_tau_zero",
        EventKind::TakeoffTangency => "takeoff_tangency",
    }
}

pub fn events_json(events: &[Event]) -> Value {
    Value::Array(
        events
            .iter()
            .map(|e| {
                json!({
                    "t": e.t,
                    "kind": event_kind_name(e.kind),
                    "state": {"p": e.state.p, "p_dot": e.state.p_dot, "l": e.state.l, "l_dot": e.state.l_dot},
                })
            })
            .collect(),
    )
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// One row per force value: the moving fixed point, or NaN with `valid = false`
/// when no latched fixed point exists.
pub fn write_fixed_points_csv(path: &Path, rows: &[(f64, Option<FixedPoint>)]) -> Result<usize> {
    write_csv(
        path,
        &FIXED_POINT_HEADER,
        rows.iter().map(|(f_l, fp)| match fp {
            Some(fp) => vec![
                fmt_f64(*f_l),
                fmt_f64(fp.p_star),
                fmt_f64(fp.l_star.unwrap_or(f64::NAN)),
                fmt_bool(fp.origin),
                fmt_bool(true),
            ],
            None => vec![fmt_f64(*f_l), fmt_f64(f64::NAN), fmt_f64(f64::NAN), fmt_bool(false), fmt_bool(false)],
        }),
    )
}

pub fn write_classification_csv(path: &Path, rows: &[(FixedPoint, StabilityReport)]) -> Result<usize> {
    write_csv(
        path,
        &CLASSIFICATION_HEADER,
        rows.iter().map(|(fp, r)| {
            vec![
                fmt_f64(fp.f_l_star),
                fmt_f64(fp.p_star),
                fmt_f64(r.a),
                fmt_f64(r.b),
                fmt_f64(r.gamma),
                fmt_f64(r.delta),
                fmt_f64(r.h1),
                fmt_f64(r.h2),
                r.classification.as_str().to_string(),
            ]
        }),
    )
}

pub fn write_path_csv(path: &Path, cont: &ContinuationPath) -> Result<usize> {
    write_csv(
        path,
        &PATH_HEADER,
        cont.samples.iter().map(|s| vec![fmt_f64(s.f_l), fmt_f64(s.p_star), fmt_bool(s.in_s)]),
    )
}

pub fn write_region_csv(path: &Path, map: &RegionMap) -> Result<usize> {
    write_csv(
        path,
        &REGION_HEADER,
        map.cells.iter().map(|c| {
            vec![fmt_f64(c.p), fmt_f64(c.f_l), fmt_f64(c.h1), fmt_f64(c.h2), fmt_bool(c.in_s), fmt_bool(c.in_u)]
        }),
    )
}

pub fn write_quiver_csv(path: &Path, cells: &[QuiverCell]) -> Result<usize> {
    write_csv(path, &QUIVER_HEADER, cells.iter().map(|c| vec![fmt_f64(c.p), fmt_f64(c.f_l), fmt_f64(c.dp_dfl)]))
}

/// Run record written after every other output is flushed.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub created_unix: u64,
    pub config: Value,
    /// File name to data-row count.
    pub files: BTreeMap<String, usize>,
    pub summary: Value,
}

impl Manifest {
    pub fn new<C: Serialize>(command: &str, config: &C) -> Result<Self> {
        Ok(Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            config: serde_json::to_value(config)?,
            files: BTreeMap::new(),
            summary: Value::Object(Default::default()),
        })
    }

    pub fn record(&mut self, name: &str, rows: usize) {
        self.files.insert(name.to_string(), rows);
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_json(&dir.join("manifest.json"), self)
    }
}
