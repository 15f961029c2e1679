//! Subcommand implementations.

use crate::output::*;
use crate::spec::{parse_group, parse_metric, parse_point, parse_radii};
use anyhow::{anyhow, bail, Context, Result};
use std::path::{Path, PathBuf};
use tale::groups::{enumerate_spin_lifts, weyl_fixed_subspaces, CircleStructure, SpinElement};
use tale::metric::{curvature_at, OdeOptions};
use tale::spin::{
    transport_state, twistor_zero_locus, zero_growth_exponent, CVec, EhParallelSpinors,
    TwistorConnection,
};

fn out_path(out: &Option<PathBuf>, default_name: &str) -> PathBuf {
    out.clone().unwrap_or_else(|| PathBuf::from(default_name))
}

pub fn spin_lifts(group_spec: &str, dim: usize, out: &Option<PathBuf>) -> Result<()> {
    let group = parse_group(group_spec, dim)?;
    let lifts = enumerate_spin_lifts(&group)?;
    let details = lifts
        .iter()
        .map(|l| LiftDetail {
            elements: l
                .elements()
                .iter()
                .map(|e| match e {
                    SpinElement::Angle(t) => serde_json::json!({ "angle": t }),
                    SpinElement::Pair(a, b) => serde_json::json!({
                        "left": [a.w, a.x, a.y, a.z],
                        "right": [b.w, b.x, b.y, b.z],
                    }),
                })
                .collect(),
            circle_structure: l.circle_structure().map(|s| {
                match s {
                    CircleStructure::Bounding => "bounding",
                    CircleStructure::Periodic => "periodic",
                }
                .to_string()
            }),
            projection_residual: l.projection_residual(),
        })
        .collect();
    let report = LiftsReport {
        schema: SCHEMA_VERSION,
        group: group_spec.to_string(),
        dimension: group.dimension(),
        order: group.order(),
        lifts: lifts.len(),
        lift_details: details,
    };
    write_json(&out_path(out, "lifts.json"), &report)
}

pub fn weyl_fix(group_spec: &str, out: &Option<PathBuf>) -> Result<()> {
    let group = parse_group(group_spec, 4)?;
    if group.dimension() != 4 {
        bail!("half-spinor fixed spaces need a four-dimensional group");
    }
    let lifts = enumerate_spin_lifts(&group)?;
    let entries = lifts
        .iter()
        .map(|l| {
            let (p, m) = weyl_fixed_subspaces(l)?;
            Ok(WeylEntry {
                dim_fix_plus: p,
                dim_fix_minus: m,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let report = WeylReport {
        schema: SCHEMA_VERSION,
        group: group_spec.to_string(),
        lifts: entries,
    };
    write_json(&out_path(out, "weyl.json"), &report)
}

pub fn curvature(metric_spec: &str, point_spec: &str, out: &Option<PathBuf>) -> Result<()> {
    let chart = parse_metric(metric_spec)?;
    let p = parse_point(point_spec)?;
    let curv = curvature_at(&chart, &p)?;
    let report = CurvatureReport {
        schema: SCHEMA_VERSION,
        metric: metric_spec.to_string(),
        point: p,
        scalar: curv.scalar,
        ricci_max_abs: curv.ricci.abs().max(),
        riemann_max_abs: curv.riemann_down.max_abs(),
        symmetry_residual: curv.symmetry_residual(),
    };
    write_json(&out_path(out, "curvature.json"), &report)
}

fn regularity_json(report: &tale::conformal::RegularityReport) -> RegularityJson {
    RegularityJson {
        order: report.verdict_order,
        verdict: format!("extends-as-C{}", report.verdict_order),
    }
}

pub fn invert(
    metric_spec: &str,
    radii_spec: &str,
    k_max: usize,
    out: &Option<PathBuf>,
) -> Result<()> {
    let chart = parse_metric(metric_spec)?;
    let radii = parse_radii(radii_spec)?;
    let est = tale::conformal::estimate_ale_order(&chart, &radii, k_max)?;
    // Probe the compactification when the hypothesis holds.
    let regularity = tale::conformal::compactify(&chart, &est.descriptor)
        .ok()
        .map(|(_, r)| regularity_json(&r));
    let report = InvertReport {
        schema: SCHEMA_VERSION,
        metric: metric_spec.to_string(),
        tau_hat: est.machine_zero.then_some(None).unwrap_or(Some(est.descriptor.tau)),
        mu_hat: est.descriptor.mu,
        per_k: est
            .fits
            .iter()
            .map(|f| PerK {
                k: f.k,
                slope: f.slope,
                r2: f.r_squared,
            })
            .collect(),
        regularity,
        low_confidence: est.low_confidence,
    };
    write_json(&out_path(out, "invert.json"), &report)
}

pub fn compactify(
    metric_spec: &str,
    radii_spec: &str,
    k_max: usize,
    out: &Option<PathBuf>,
) -> Result<()> {
    let chart = parse_metric(metric_spec)?;
    let radii = parse_radii(radii_spec)?;
    let est = tale::conformal::estimate_ale_order(&chart, &radii, k_max)?;
    let (compact, report) = tale::conformal::compactify(&chart, &est.descriptor)?;
    let out_report = CompactifyReport {
        schema: SCHEMA_VERSION,
        metric: metric_spec.to_string(),
        tau_hat: est.machine_zero.then_some(None).unwrap_or(Some(est.descriptor.tau)),
        mu_hat: est.descriptor.mu,
        added_point_group_order: compact.added_point_group().map_or(1, |g| g.order()),
        regularity: regularity_json(&report),
        bounded_through: report.bounded_through,
        per_k: report
            .fits
            .iter()
            .map(|f| PerK {
                k: f.k,
                slope: f.slope,
                r2: f.r_squared,
            })
            .collect(),
    };
    write_json(&out_path(out, "compactify.json"), &out_report)
}

fn load_spinor(path: &Path) -> Result<SpinorJson> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading spinor {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn twistor(
    metric_spec: &str,
    init_spec: &str,
    path_file: &Path,
    out: &Option<PathBuf>,
) -> Result<()> {
    let chart = parse_metric(metric_spec)?;
    let conn = TwistorConnection::new(chart)?;
    let parts: Vec<&str> = init_spec.split(',').collect();
    if parts.len() != 2 {
        bail!("--init takes phi0.json,psi0.json");
    }
    let phi = load_spinor(Path::new(parts[0]))?;
    let psi = load_spinor(Path::new(parts[1]))?;
    let k = conn.spinor_dim();
    if phi.components.len() != k || psi.components.len() != k {
        bail!("spinor length must be {k} for this chart");
    }
    let path_json: PathJson =
        serde_json::from_str(&std::fs::read_to_string(path_file)?).context("path JSON")?;
    if path_json.points.len() < 2 {
        bail!("path needs at least two points");
    }

    let mut state = CVec::zeros(2 * k);
    for i in 0..k {
        state[i] = phi.to_components()[i];
        state[k + i] = psi.to_components()[i];
    }

    let opts = OdeOptions::default();
    let mut growth: f64 = 0.0;
    let mut eps: f64 = 0.0;
    // Transport along the polyline, one segment at a time.
    for w in path_json.points.windows(2) {
        let (a, b) = (w[0].clone(), w[1].clone());
        let curve = move |t: f64| -> (Vec<f64>, Vec<f64>) {
            (
                a.iter().zip(&b).map(|(x, y)| x + t * (y - x)).collect(),
                a.iter().zip(&b).map(|(x, y)| y - x).collect(),
            )
        };
        let res = transport_state(&conn, &curve, &state, &opts)?;
        state = res.state;
        growth = growth.max(res.growth_excess);
        eps = eps.max(res.eps);
    }

    let end = path_json.points.last().unwrap().clone();
    let report = TwistorStateReport {
        schema: SCHEMA_VERSION,
        phi: SpinorJson::from_components(&state.rows(0, k).into_owned(), &end),
        psi: SpinorJson::from_components(&state.rows(k, k).into_owned(), &end),
        growth_excess: growth,
        connection_norm_bound: eps,
    };
    write_json(&out_path(out, "state.json"), &report)
}

pub fn twistor_zeros(
    metric_spec: &str,
    init_spec: &str,
    box_spec: &str,
    grid: usize,
    out: &Option<PathBuf>,
) -> Result<()> {
    let chart = parse_metric(metric_spec)?;
    let conn = TwistorConnection::new(chart)?;
    let parts: Vec<&str> = init_spec.split(',').collect();
    if parts.len() != 2 {
        bail!("--init takes phi0.json,psi0.json");
    }
    let phi = load_spinor(Path::new(parts[0]))?.to_components();
    let psi = load_spinor(Path::new(parts[1]))?.to_components();
    let field = tale::spin::flat_twistor_field(&conn.clifford, &phi, &psi)?;

    let bounds: Vec<&str> = box_spec.split(':').collect();
    if bounds.len() != 2 {
        bail!("--box takes min:max");
    }
    let (lo, hi): (f64, f64) = (bounds[0].parse()?, bounds[1].parse()?);
    let zeros = twistor_zero_locus(&conn, &field, lo, hi, grid, 1e-6)?;
    let entries = zeros
        .iter()
        .map(|z| {
            let exponent = zero_growth_exponent(&field, &z.position, (hi - lo) / 8.0, 5)?;
            Ok(ZeroJson {
                position: z.position.clone(),
                dirac_norm: z.dirac_norm,
                growth_exponent: exponent,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let report = ZerosReport {
        schema: SCHEMA_VERSION,
        metric: metric_spec.to_string(),
        zeros: entries,
    };
    write_json(&out_path(out, "zeros.json"), &report)
}

pub fn eh_parallel(a: f64, basepoint_radius: f64, out: &Option<PathBuf>) -> Result<()> {
    let spinors = EhParallelSpinors::compute(a, basepoint_radius, &OdeOptions::default())
        .map_err(|e| anyhow!("{e}"))?;
    let report = EhParallelReport {
        schema: SCHEMA_VERSION,
        bolt_parameter: a,
        basepoint: spinors.basepoint().to_vec(),
        holonomy_dim: spinors.holonomy_dim,
        holonomy_residual: spinors.holonomy_residual,
        basis: spinors
            .basis
            .iter()
            .map(|b| SpinorJson::from_components(b, spinors.basepoint()))
            .collect(),
    };
    write_json(&out_path(out, "basis.json"), &report)
}

pub fn volume_ratio(
    metric_spec: &str,
    point_spec: &str,
    radii_spec: &str,
    samples: usize,
    out: &Option<PathBuf>,
) -> Result<()> {
    let chart = parse_metric(metric_spec)?;
    let p = parse_point(point_spec)?;
    let radii = parse_radii(radii_spec)?;
    let table = tale::volume::psi_table(&chart, &p, &radii, samples, &OdeOptions::bulk())?;
    write_psi_csv(&out_path(out, "psi.csv"), &table)
}
