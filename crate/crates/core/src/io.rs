//! Artifact plumbing: RFC-4180 CSV emission with round-trip float
//! formatting, run manifests, and the standard tables the command-line
//! front end persists.

use crate::bifurcation::BranchPoint;
use crate::geometry::RadialProfile;
use crate::shooting::Trajectory;
use crate::spectral::GegenbauerBasis;
use crate::symmetry::Violation;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

/// Shortest decimal representation that parses back to the same bits.
pub fn format_f64(x: f64) -> String {
    format!("{x}")
}

/// RFC-4180 field escaping: quote when the field contains a comma, quote,
/// or line break; double embedded quotes.
pub fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Assembles an RFC-4180 document (CRLF line endings, header row first).
pub fn csv_string(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(
        &header
            .iter()
            .map(|h| csv_escape(h))
            .collect::<Vec<_>>()
            .join(","),
    );
    out.push_str("\r\n");
    for row in rows {
        out.push_str(
            &row.iter()
                .map(|f| csv_escape(f))
                .collect::<Vec<_>>()
                .join(","),
        );
        out.push_str("\r\n");
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(contents.as_bytes())
}

/// Branch diagram table: one row per continuation point.
pub fn branch_csv(points: &[BranchPoint]) -> String {
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|pt| {
            let min_w = pt.w.node_values.iter().cloned().fold(f64::MAX, f64::min);
            let max_w = pt.w.node_values.iter().cloned().fold(f64::MIN, f64::max);
            vec![
                format_f64(pt.lambda),
                format_f64(pt.w.norm_inf_nodes()),
                format_f64(min_w),
                format_f64(max_w),
                pt.nodal.as_ref().map_or(0, |n| n.class).to_string(),
                format_f64(pt.residual_norm),
            ]
        })
        .collect();
    csv_string(
        &["lambda", "norm_inf", "min_w", "max_w", "nodal_class", "residual"],
        &rows,
    )
}

/// Trajectory table `t,w,wprime,h`.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let rows: Vec<Vec<String>> = traj
        .samples
        .iter()
        .zip(traj.energy_series.iter())
        .map(|(s, h)| {
            vec![
                format_f64(s.t),
                format_f64(s.w),
                format_f64(s.wp),
                format_f64(*h),
            ]
        })
        .collect();
    csv_string(&["t", "w", "wprime", "h"], &rows)
}

/// Zero-crossing events table.
pub fn events_csv(traj: &Trajectory) -> String {
    let rows: Vec<Vec<String>> = traj
        .events
        .iter()
        .map(|e| {
            vec![
                format_f64(e.t),
                format_f64(e.bracket.0),
                format_f64(e.bracket.1),
                format_f64(e.w_at_event),
            ]
        })
        .collect();
    csv_string(&["t", "bracket_lo", "bracket_hi", "w_at_event"], &rows)
}

/// Eigenvalue table `k,nu`.
pub fn eigenvalue_csv(basis: &GegenbauerBasis) -> String {
    let rows: Vec<Vec<String>> = basis
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(k, nu)| vec![k.to_string(), format_f64(*nu)])
        .collect();
    csv_string(&["k", "nu"], &rows)
}

/// Quadrature table `node,weight`.
pub fn quadrature_csv(basis: &GegenbauerBasis) -> String {
    let rows: Vec<Vec<String>> = basis
        .nodes
        .iter()
        .zip(basis.weights.iter())
        .map(|(t, w)| vec![format_f64(*t), format_f64(*w)])
        .collect();
    csv_string(&["node", "weight"], &rows)
}

/// Coefficient table `k,coeff`.
pub fn coefficients_csv(coeffs: &[f64]) -> String {
    let rows: Vec<Vec<String>> = coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| vec![k.to_string(), format_f64(*c)])
        .collect();
    csv_string(&["k", "coeff"], &rows)
}

/// Radial profile table `coordinate,value`.
pub fn profile_csv(profile: &RadialProfile) -> String {
    let rows: Vec<Vec<String>> = profile
        .grid
        .iter()
        .zip(profile.values.iter())
        .map(|(x, v)| vec![format_f64(*x), format_f64(*v)])
        .collect();
    csv_string(&["coordinate", "value"], &rows)
}

/// Comparison-violation table.
pub fn violations_csv(violations: &[Violation]) -> String {
    let rows: Vec<Vec<String>> = violations
        .iter()
        .map(|v| {
            vec![
                v.point.iter().map(|x| format_f64(*x)).collect::<Vec<_>>().join(";"),
                format_f64(v.lambda),
                v.center.iter().map(|x| format_f64(*x)).collect::<Vec<_>>().join(";"),
                format_f64(v.deficit),
            ]
        })
        .collect();
    csv_string(&["point", "lambda", "center", "deficit"], &rows)
}

/// Record of one command invocation with its fully resolved inputs, written
/// next to the data files it names; re-running with an identical manifest
/// reproduces the CSV outputs byte for byte.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub params: serde_json::Value,
    pub seed: u64,
    pub tolerances: serde_json::Value,
    pub tool_version: String,
    pub outputs: Vec<String>,
    pub wall_time: f64,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}
