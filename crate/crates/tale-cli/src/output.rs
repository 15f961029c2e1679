//! Output schemas and atomic file writing.
//!
//! Structured results are JSON with a `schema` version field; tabulated
//! curves are CSV. Files are written to a temporary sibling and renamed into
//! place, so identical runs produce bit-identical files and interrupted runs
//! leave no partial output.

use anyhow::{Context, Result};
use num_complex::Complex;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

/// Write bytes atomically: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if path == Path::new("-") {
        std::io::stdout().write_all(bytes)?;
        return Ok(());
    }
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension("tmp-tale");
    std::fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

/// A spinor as stored on disk: `[re, im]` pairs plus the anchoring point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpinorJson {
    pub schema: u32,
    pub components: Vec<[f64; 2]>,
    pub frame_point: Vec<f64>,
}

impl SpinorJson {
    pub fn from_components(components: &tale::spin::CVec, frame_point: &[f64]) -> Self {
        SpinorJson {
            schema: SCHEMA_VERSION,
            components: components.iter().map(|c| [c.re, c.im]).collect(),
            frame_point: frame_point.to_vec(),
        }
    }

    pub fn to_components(&self) -> tale::spin::CVec {
        tale::spin::CVec::from_fn(self.components.len(), |i, _| {
            Complex::new(self.components[i][0], self.components[i][1])
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PathJson {
    pub points: Vec<Vec<f64>>,
}

#[derive(Serialize)]
pub struct LiftsReport {
    pub schema: u32,
    pub group: String,
    pub dimension: usize,
    pub order: usize,
    pub lifts: usize,
    pub lift_details: Vec<LiftDetail>,
}

#[derive(Serialize)]
pub struct LiftDetail {
    /// Per-element lift data: angles for dimension two, quaternion pairs for
    /// dimension four.
    pub elements: Vec<serde_json::Value>,
    pub circle_structure: Option<String>,
    pub projection_residual: f64,
}

#[derive(Serialize)]
pub struct WeylReport {
    pub schema: u32,
    pub group: String,
    pub lifts: Vec<WeylEntry>,
}

#[derive(Serialize)]
pub struct WeylEntry {
    pub dim_fix_plus: usize,
    pub dim_fix_minus: usize,
}

#[derive(Serialize)]
pub struct CurvatureReport {
    pub schema: u32,
    pub metric: String,
    pub point: Vec<f64>,
    pub scalar: f64,
    pub ricci_max_abs: f64,
    pub riemann_max_abs: f64,
    pub symmetry_residual: f64,
}

#[derive(Serialize)]
pub struct PerK {
    pub k: usize,
    pub slope: f64,
    pub r2: f64,
}

#[derive(Serialize)]
pub struct RegularityJson {
    pub order: usize,
    pub verdict: String,
}

#[derive(Serialize)]
pub struct InvertReport {
    pub schema: u32,
    pub metric: String,
    pub tau_hat: Option<f64>,
    pub mu_hat: usize,
    pub per_k: Vec<PerK>,
    pub regularity: Option<RegularityJson>,
    pub low_confidence: bool,
}

#[derive(Serialize)]
pub struct CompactifyReport {
    pub schema: u32,
    pub metric: String,
    pub tau_hat: Option<f64>,
    pub mu_hat: usize,
    pub added_point_group_order: usize,
    pub regularity: RegularityJson,
    pub bounded_through: usize,
    pub per_k: Vec<PerK>,
}

#[derive(Serialize)]
pub struct TwistorStateReport {
    pub schema: u32,
    pub phi: SpinorJson,
    pub psi: SpinorJson,
    pub growth_excess: f64,
    pub connection_norm_bound: f64,
}

#[derive(Serialize)]
pub struct ZerosReport {
    pub schema: u32,
    pub metric: String,
    pub zeros: Vec<ZeroJson>,
}

#[derive(Serialize)]
pub struct ZeroJson {
    pub position: Vec<f64>,
    pub dirac_norm: f64,
    pub growth_exponent: f64,
}

#[derive(Serialize)]
pub struct EhParallelReport {
    pub schema: u32,
    pub bolt_parameter: f64,
    pub basepoint: Vec<f64>,
    pub holonomy_dim: usize,
    pub holonomy_residual: f64,
    pub basis: Vec<SpinorJson>,
}

/// CSV rows for the volume-ratio table: `r, psi, stderr, flags`.
pub fn write_psi_csv(path: &Path, table: &tale::volume::VolumeRatioTable) -> Result<()> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["r", "psi", "stderr", "flags"])?;
        for i in 0..table.radii.len() {
            let f = &table.flags[i];
            let mut flags = Vec::new();
            if f.conjugate_fraction > 0.01 {
                flags.push(format!("conjugate:{:.4}", f.conjugate_fraction));
            }
            if f.domain_exit_fraction > 0.01 {
                flags.push(format!("exit:{:.4}", f.domain_exit_fraction));
            }
            if f.deck_cut_fraction > 0.0 {
                flags.push(format!("deck-cut:{:.4}", f.deck_cut_fraction));
            }
            w.write_record([
                format!("{:.12e}", table.radii[i]),
                format!("{:.12e}", table.psi[i]),
                format!("{:.12e}", table.stderr[i]),
                flags.join(";"),
            ])?;
        }
        w.flush()?;
    }
    write_atomic(path, &buf)
}
