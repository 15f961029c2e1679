//! The full verification suite: one function per criterion, each with its
//! tolerances pinned in code, plus an orchestrator that runs them all and
//! writes machine-readable outcomes.

use anyhow::Result;
use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::path::PathBuf;
use std::time::Instant;
use tale::groups::{enumerate_spin_lifts, weyl_fixed_subspaces, FiniteRotationGroup};
use tale::metric::{curvature_at, eguchi_hanson, flat_metric, quotient_annulus, OdeOptions};
use tale::spin::{
    coordinate_circle, dirac_derivative_residual, extend_to_puncture, flat_twistor_field,
    state_holonomy, twistor_residual, twistor_zero_locus, zero_growth_exponent, CMat, CVec,
    CompactifiedEh, EhParallelSpinors, TwistorConnection,
};
use tale::volume::{check_monotone, check_zero_sum_bound, psi_table};

pub const DEFAULT_SEED: u64 = 0x5EED;

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Directions for the Monte-Carlo volume criteria.
    pub samples: usize,
    /// Reduced workloads (used by the in-process determinism check).
    pub quick: bool,
    pub out_dir: Option<PathBuf>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: DEFAULT_SEED,
            samples: 4096,
            quick: false,
            out_dir: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub details: serde_json::Value,
    #[serde(skip)]
    pub seconds: f64,
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller from two uniforms.
    let u1: f64 = rng.random::<f64>().max(1e-12);
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn random_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| gaussian(rng)).collect();
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.iter().map(|x| x / norm).collect();
        }
    }
}

fn random_spinor(rng: &mut ChaCha8Rng, k: usize) -> CVec {
    CVec::from_fn(k, |_, _| Complex::new(gaussian(rng), gaussian(rng)))
}

fn outcome(id: u32, name: &str, passed: bool, details: serde_json::Value, t0: Instant) -> CriterionOutcome {
    CriterionOutcome {
        id,
        name: name.to_string(),
        passed,
        details,
        seconds: t0.elapsed().as_secs_f64(),
    }
}

/// 1. Lift counts of the plane rotation groups and of `{+-1}` in `SO(4)`.
pub fn criterion_spin_lift_counts(_cfg: &VerifyConfig) -> Result<CriterionOutcome> {
    let t0 = Instant::now();
    let mut passed = true;
    let mut counts = Vec::new();
    for m in 1..=9usize {
        let g = FiniteRotationGroup::cyclic_so2(m)?;
        let lifts = enumerate_spin_lifts(&g)?.len();
        let expect = if m % 2 == 1 { 2 } else { 0 };
        passed &= lifts == expect;
        counts.push(serde_json::json!({ "m": m, "lifts": lifts, "expected": expect }));
    }
    let pm = FiniteRotationGroup::cyclic_so4(2, 1, 1)?;
    let pm_lifts = enumerate_spin_lifts(&pm)?.len();
    passed &= pm_lifts == 2;
    Ok(outcome(
        1,
        "spin-lift-counts",
        passed,
        serde_json::json!({ "so2_cyclic": counts, "so4_plus_minus_identity": pm_lifts }),
        t0,
    ))
}

/// 2. Half-spinor fixed spaces of the lifts of `{+-1}`.
pub fn criterion_weyl_fixed_spaces(_cfg: &VerifyConfig) -> Result<CriterionOutcome> {
    let t0 = Instant::now();
    let pm = FiniteRotationGroup::cyclic_so4(2, 1, 1)?;
    let lifts = enumerate_spin_lifts(&pm)?;
    let mut dims: Vec<(usize, usize)> = lifts
        .iter()
        .map(|l| weyl_fixed_subspaces(l))
        .collect::<tale::Result<_>>()?;
    dims.sort();
    let one_sided = dims.iter().all(|(p, m)| (*p == 0) != (*m == 0));
    let passed = dims == vec![(0, 2), (2, 0)] && one_sided;
    Ok(outcome(
        2,
        "weyl-fixed-spaces",
        passed,
        serde_json::json!({ "dims": dims }),
        t0,
    ))
}

/// 3. Clifford identities for n = 2, 4, 6 hold exactly.
pub fn criterion_clifford_identities(_cfg: &VerifyConfig) -> Result<CriterionOutcome> {
    let t0 = Instant::now();
    let mut passed = true;
    let mut rows = Vec::new();
    for n in [2usize, 4, 6] {
        let rep = tale::spin::CliffordRep::build(n)?;
        let anti = rep.anticommutation_residual();
        let chi = rep.chirality_residual();
        passed &= anti == 0.0 && chi == 0.0;
        rows.push(serde_json::json!({ "n": n, "anticommutation": anti, "chirality": chi }));
    }
    Ok(outcome(3, "clifford-identities", passed, serde_json::json!(rows), t0))
}

/// 4. Ricci-flatness of the Eguchi-Hanson chart from exact derivatives.
pub fn criterion_eh_ricci_flat(cfg: &VerifyConfig) -> Result<CriterionOutcome> {
    let t0 = Instant::now();
    let chart = eguchi_hanson(1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x04);
    let points = if cfg.quick { 20 } else { 100 };
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let r = 1.1 + 8.9 * rng.random::<f64>();
        let dir = random_direction(&mut rng, 4);
        let p: Vec<f64> = dir.iter().map(|d| d * r).collect();
        let curv = curvature_at(&chart, &p)?;
        worst = worst.max(curv.ricci.abs().max());
    }
    Ok(outcome(
        4,
        "eh-ricci-flat",
        worst <= 1e-6,
        serde_json::json!({ "points": points, "max_abs_ricci": worst, "tolerance": 1e-6 }),
        t0,
    ))
}

/// 5. Decay order of the Eguchi-Hanson end: tau = 4 +- 0.2 over radii 4..64.
pub fn criterion_eh_ale_order(_cfg: &VerifyConfig) -> Result<CriterionOutcome> {
    let t0 = Instant::now();
    let chart = eguchi_hanson(1.0)?;
    let radii: Vec<f64> = (2..=6).map(|j| 2f64.powi(j)).collect();
    let est = tale::conformal::estimate_ale_order(&chart, &radii, 2)?;
    let passed = (est.descriptor.tau - 4.0).abs() <= 0.2 && !est.low_confidence;
    Ok(outcome(
        5,
        "eh-ale-order",
        passed,
        serde_json::json!({
            "tau_hat": est.descriptor.tau,
            "mu_hat": est.descriptor.mu,
            "tolerance": 0.2,
            "slopes": est.fits.iter().map(|f| f.slope).collect::<Vec<_>>(),
        }),
        t0,
    ))
}

/// 6. The displayed inversion formula equals the conformal pullback oracle.
pub fn criterion_inversion_formula(cfg: &VerifyConfig) -> Result<CriterionOutcome> {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x06);
    let instances = if cfg.quick { 100 } else { 1000 };
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let mut h = DMatrix::<f64>::zeros(4, 4);
        for i in 0..4 {
            for j in i..4 {
                let v = 0.2 * (rng.random::<f64>() - 0.5);
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        let ext = tale::conformal::constant_perturbation_chart(4, h, 1.0)?;
        let pushed = tale::conformal::pushforward_inverted_metric(&ext)?;
        let r = 0.05 + 0.9 * rng.random::<f64>();
        let dir = random_direction(&mut rng, 4);
        let z: Vec<f64> = dir.iter().map(|d| d * r).collect();
        let a = pushed.metric(&z)?;
        let b = tale::conformal::pullback_oracle(&ext, &z)?;
        worst = worst.max((a - b).abs().max());
    }
    Ok(outcome(
        6,
        "inversion-formula-oracle",
        worst <= 1e-10,
        serde_json::json!({ "instances": instances, "max_deviation": worst, "tolerance": 1e-10 }),
        t0,
    ))
}

/// 7. Compactified Eguchi-Hanson: `gbar - delta = O(|z|^4)` on dyadic annuli
/// and bounded divided differences through order 3.
pub fn criterion_compactified_regularity(_cfg: &VerifyConfig) -> Result<CriterionOutcome> {
    let t0 = Instant::now();
    let chart = eguchi_hanson(1.0)?;
    let radii: Vec<f64> = (2..=6).map(|j| 2f64.powi(j)).collect();
    let est = tale::conformal::estimate_ale_order(&chart, &radii, 3)?;
    let (compact, report) = tale::conformal::compactify(&chart, &est.descriptor)?;
    let exponent = report.fits[0].slope;
    let passed = (exponent - 4.0).abs() <= 0.3
        && report.bounded_through >= 3
        && report.verdict_order == 3
        && compact.added_point_group().map_or(0, |g| g.order()) == 2;
    Ok(outcome(
        7,
        "compactified-regularity",
        passed,
        serde_json::json!({
            "fitted_exponent": exponent,
            "exponent_tolerance": 0.3,
            "bounded_through": report.bounded_through,
            "certified_order": report.verdict_order,
            "slopes": report.fits.iter().map(|f| f.slope).collect::<Vec<_>>(),
            "added_point_group_order": compact.added_point_group().map_or(0, |g| g.order()),
        }),
        t0,
    ))
}

/// 8. The flat closed-form twistor family: residuals, loop holonomy, and the
/// Dirac-derivative identity.
pub fn criterion_flat_twistor_family(cfg: &VerifyConfig) -> Result<CriterionOutcome> {
    let t0 = Instant::now();
    let conn = TwistorConnection::new(flat_metric(4))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x08);
    let phi0 = random_spinor(&mut rng, 4);
    let psi0 = random_spinor(&mut rng, 4);
    let field = flat_twistor_field(&conn.clifford, &phi0, &psi0)?;

    let points = if cfg.quick { 20 } else { 100 };
    let mut worst_res: f64 = 0.0;
    for _ in 0..points {
        let p: Vec<f64> = (0..4).map(|_| 2.0 * (rng.random::<f64>() - 0.5)).collect();
        let x = random_direction(&mut rng, 4);
        worst_res = worst_res.max(twistor_residual(&conn, &field, &p, &x, 1e-4)?.norm());
    }

    let curve = coordinate_circle(&[0.4, -0.1, 0.3, 0.2], 0, 2, 0.4);
    let hol = state_holonomy(&conn, &curve, &OdeOptions::default())?;
    let hol_dev = (&hol - CMat::identity(8, 8))
        .iter()
        .map(|x| x.norm())
        .fold(0.0, f64::max);

    // The nested difference amplifies rounding as 1/h^2; the affine flat
    // family has no truncation error, so a larger step is strictly better.
    let mut worst_dirac: f64 = 0.0;
    for _ in 0..8 {
        let p: Vec<f64> = (0..4).map(|_| 2.0 * (rng.random::<f64>() - 0.5)).collect();
        let x = random_direction(&mut rng, 4);
        worst_dirac =
            worst_dirac.max(dirac_derivative_residual(&conn, &field, &p, &x, 1e-3)?.norm());
    }

    let passed = worst_res <= 1e-9 && hol_dev <= 1e-9 && worst_dirac <= 1e-8;
    Ok(outcome(
        8,
        "flat-twistor-family",
        passed,
        serde_json::json!({
            "max_twistor_residual": worst_res,
            "residual_tolerance": 1e-9,
            "holonomy_deviation": hol_dev,
            "holonomy_tolerance": 1e-9,
            "max_dirac_identity_residual": worst_dirac,
            "dirac_tolerance": 1e-8,
        }),
        t0,
    ))
}

/// 9. Zero isolation: a flat family with one zero has exactly one zero in the
/// box, and the norm grows linearly from it.
pub fn criterion_zero_isolation(cfg: &VerifyConfig) -> Result<CriterionOutcome> {
    let t0 = Instant::now();
    let conn = TwistorConnection::new(flat_metric(4))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x09);
    let psi0 = random_spinor(&mut rng, 4);
    // Zero at e_1: phi0 = (1/4) e_1 . psi0.
    let phi0 = &conn.clifford.gammas[0] * &psi0 * Complex::new(0.25, 0.0);
    let field = flat_twistor_field(&conn.clifford, &phi0, &psi0)?;
    let grid = if cfg.quick { 6 } else { 16 };
    let zeros = twistor_zero_locus(&conn, &field, -2.0, 2.0, grid, 1e-6)?;
    let mut exponent = f64::NAN;
    let mut passed = zeros.len() == 1;
    if let Some(z) = zeros.first() {
        passed &= z
            .position
            .iter()
            .zip(&[1.0, 0.0, 0.0, 0.0])
            .all(|(a, b)| (a - b).abs() < 1e-6);
        exponent = zero_growth_exponent(&field, &z.position, 0.5, 6)?;
        passed &= (exponent - 1.0).abs() <= 0.05;
    }
    Ok(outcome(
        9,
        "zero-isolation-growth",
        passed,
        serde_json::json!({
            "zeros_found": zeros.len(),
            "positions": zeros.iter().map(|z| z.position.clone()).collect::<Vec<_>>(),
            "growth_exponent": exponent,
            "exponent_tolerance": 0.05,
        }),
        t0,
    ))
}

/// 10. Parallel spinors of the Eguchi-Hanson chart: a two-dimensional
/// holonomy fixed space and small transport residuals.
pub fn criterion_eh_parallel_spinors(cfg: &VerifyConfig) -> Result<CriterionOutcome> {
    let t0 = Instant::now();
    let spinors = EhParallelSpinors::compute(1.0, 2.0, &OdeOptions::default())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x0a);
    let coeffs = [
        Complex::new(gaussian(&mut rng), gaussian(&mut rng)),
        Complex::new(gaussian(&mut rng), gaussian(&mut rng)),
    ];
    let probes = if cfg.quick { 2 } else { 5 };
    let mut worst: f64 = 0.0;
    for _ in 0..probes {
        let r = 1.6 + 1.8 * rng.random::<f64>();
        let dir = random_direction(&mut rng, 4);
        let q: Vec<f64> = dir.iter().map(|d| d * r).collect();
        worst = worst.max(spinors.parallel_residual(&coeffs, &q, 1e-4)?);
    }
    let passed = spinors.holonomy_dim == 2 && worst <= 1e-5;
    Ok(outcome(
        10,
        "eh-parallel-spinors",
        passed,
        serde_json::json!({
            "holonomy_fixed_dimension": spinors.holonomy_dim,
            "holonomy_residual": spinors.holonomy_residual,
            "max_transport_residual": worst,
            "residual_tolerance": 1e-5,
        }),
        t0,
    ))
}

/// 11. The induced twistor spinor of the compactified Eguchi-Hanson chart:
/// twistor residual, norm-distance proportionality, and the extension across
/// the added point with a vanishing spinor part.
pub fn criterion_compactified_twistor(cfg: &VerifyConfig) -> Result<CriterionOutcome> {
    let t0 = Instant::now();
    let ce = CompactifiedEh::new(1.0, 2.0, 3.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x0b);

    // (a) Twistor residual of the transported field under the rescaled metric.
    let field = |y: &[f64]| -> tale::Result<CVec> { ce.rescaled_phi(y) };
    let probes = if cfg.quick { 2 } else { 4 };
    let mut worst_res: f64 = 0.0;
    for _ in 0..probes {
        let rho = 8.0 + 8.0 * rng.random::<f64>();
        let dir = random_direction(&mut rng, 4);
        let y: Vec<f64> = dir.iter().map(|d| d * rho).collect();
        let x = random_direction(&mut rng, 4);
        worst_res = worst_res.max(twistor_residual(&ce.rescaled_conn, &field, &y, &x, 1e-2)?.norm());
    }

    // (b) The spinor norm is proportional to the distance to the added point
    // across two dyadic annuli.
    let mut ratios = Vec::new();
    for (scale, k) in [(16.0, 0u64), (16.0, 1), (32.0, 2), (32.0, 3)] {
        let dir = tale::sampling::sphere_direction(4, 70 + k);
        let y: Vec<f64> = dir.iter().map(|d| d * scale).collect();
        ratios.push(ce.rescaled_phi(&y)?.norm() / ce.distance_to_added_point(&y));
    }
    let mean: f64 = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let ratio_dev = ratios
        .iter()
        .map(|r| (r - mean).abs() / mean)
        .fold(0.0, f64::max);

    // (c) Extension across the puncture: common limit with phi = 0, psi != 0.
    let h = 1e-3;
    let section = |w: &[f64]| -> tale::Result<CVec> { ce.w_state(w, h) };
    let report = extend_to_puncture(&ce.w_conn, &section, 0.16, 1.6e-4, 8, ce.options())?;
    let k = 4;
    let phi_limit = report.mean_limit.rows(0, k).norm();
    let psi_limit = report.mean_limit.rows(k, k).norm();

    let passed = worst_res <= 1e-4
        && ratio_dev <= 0.05
        && report.spread <= 1e-5
        && phi_limit <= 1e-4 * psi_limit
        && psi_limit > 1e-3;
    Ok(outcome(
        11,
        "compactified-twistor",
        passed,
        serde_json::json!({
            "max_twistor_residual": worst_res,
            "residual_tolerance": 1e-4,
            "norm_distance_ratio_deviation": ratio_dev,
            "ratio_tolerance": 0.05,
            "extension_spread": report.spread,
            "spread_tolerance": 1e-5,
            "phi_limit_norm": phi_limit,
            "psi_limit_norm": psi_limit,
            "parallel_residual": report.parallel_residual,
        }),
        t0,
    ))
}

/// 12. Volume ratios: the flat quotient is exactly one half, the
/// Eguchi-Hanson ratio interpolates monotonically from 1 to 1/2, and the
/// reciprocal-sum bound reproduces uniqueness of smooth zeros.
pub fn criterion_volume_ratios(cfg: &VerifyConfig) -> Result<CriterionOutcome> {
    let t0 = Instant::now();
    let samples = if cfg.quick { 256 } else { cfg.samples };
    let opts = OdeOptions::bulk();

    let deck = FiniteRotationGroup::cyclic_so4(2, 1, 1)?;
    let flat_chart = quotient_annulus(&flat_metric(4), deck.clone())?;
    let flat_radii: Vec<f64> = (0..8).map(|k| 0.3 * 1.6f64.powi(k)).collect();
    let flat_table = psi_table(&flat_chart, &[0.0; 4], &flat_radii, samples.min(512), &opts)?;
    let flat_ok = flat_table
        .psi
        .iter()
        .zip(&flat_table.stderr)
        .all(|(psi, se)| (psi - 0.5).abs() <= 2.0 * se + 1e-9);

    let eh = quotient_annulus(&eguchi_hanson(1.0)?, deck)?;
    let p = [2.5, 0.0, 0.0, 0.0];
    let eh_radii: Vec<f64> = (0..8)
        .map(|k| 0.25 * (200.0f64 / 0.25).powf(k as f64 / 7.0))
        .collect();
    let eh_table = psi_table(&eh, &p, &eh_radii, samples, &opts)?;
    let monotone = check_monotone(&eh_table);
    let psi_small = eh_table.psi[0];
    let psi_large = *eh_table.psi.last().unwrap();
    let eh_ok = monotone.non_increasing
        && (psi_small - 1.0).abs() <= 0.02
        && (psi_large - 0.5).abs() <= 0.03
        && eh_table.psi.iter().all(|v| *v > 0.45 && *v < 1.05);

    // Zero-configuration arithmetic.
    let two_smooth = check_zero_sum_bound(&[1, 1])?;
    let one_smooth = check_zero_sum_bound(&[1])?;
    let mixed = check_zero_sum_bound(&[1, 2])?;
    let two_singular = check_zero_sum_bound(&[2, 2])?;
    let arithmetic_ok = !two_smooth.admissible
        && one_smooth.admissible
        && !mixed.admissible
        && mixed.smooth_zero_must_be_unique
        && two_singular.admissible;

    let passed = flat_ok && eh_ok && arithmetic_ok;
    Ok(outcome(
        12,
        "volume-ratios",
        passed,
        serde_json::json!({
            "samples": samples,
            "flat_quotient_psi": flat_table.psi,
            "flat_quotient_stderr": flat_table.stderr,
            "eh_radii": eh_table.radii,
            "eh_psi": eh_table.psi,
            "eh_stderr": eh_table.stderr,
            "eh_monotone": monotone.non_increasing,
            "psi_small": psi_small,
            "psi_large": psi_large,
            "zero_sum_checks": {
                "two_smooth_admissible": two_smooth.admissible,
                "one_smooth_admissible": one_smooth.admissible,
                "smooth_plus_singular_admissible": mixed.admissible,
                "two_order_two_admissible": two_singular.admissible,
            },
        }),
        t0,
    ))
}

/// 13. Determinism: rerunning a representative subset with the same seed
/// produces byte-identical serialized outcomes.
pub fn criterion_determinism(cfg: &VerifyConfig) -> Result<CriterionOutcome> {
    let t0 = Instant::now();
    let run = |cfg: &VerifyConfig| -> Result<Vec<u8>> {
        let quick = VerifyConfig {
            quick: true,
            out_dir: None,
            ..cfg.clone()
        };
        let mut bytes = Vec::new();
        for c in [
            criterion_spin_lift_counts(&quick)?,
            criterion_clifford_identities(&quick)?,
            criterion_inversion_formula(&quick)?,
            criterion_flat_twistor_family(&quick)?,
        ] {
            bytes.extend(serde_json::to_vec(&c.details)?);
        }
        // A small Monte-Carlo table exercises the parallel reduction path.
        let deck = FiniteRotationGroup::cyclic_so4(2, 1, 1)?;
        let chart = quotient_annulus(&flat_metric(4), deck)?;
        let table = psi_table(&chart, &[0.0; 4], &[0.5, 2.0], 64, &OdeOptions::bulk())?;
        bytes.extend(serde_json::to_vec(&table.psi)?);
        bytes.extend(serde_json::to_vec(&table.stderr)?);
        Ok(bytes)
    };
    let first = run(cfg)?;
    let second = run(cfg)?;
    let passed = first == second;
    Ok(outcome(
        13,
        "determinism",
        passed,
        serde_json::json!({ "bytes_compared": first.len(), "identical": passed }),
        t0,
    ))
}

pub fn run_criterion(id: u32, cfg: &VerifyConfig) -> Result<CriterionOutcome> {
    match id {
        1 => criterion_spin_lift_counts(cfg),
        2 => criterion_weyl_fixed_spaces(cfg),
        3 => criterion_clifford_identities(cfg),
        4 => criterion_eh_ricci_flat(cfg),
        5 => criterion_eh_ale_order(cfg),
        6 => criterion_inversion_formula(cfg),
        7 => criterion_compactified_regularity(cfg),
        8 => criterion_flat_twistor_family(cfg),
        9 => criterion_zero_isolation(cfg),
        10 => criterion_eh_parallel_spinors(cfg),
        11 => criterion_compactified_twistor(cfg),
        12 => criterion_volume_ratios(cfg),
        13 => criterion_determinism(cfg),
        _ => anyhow::bail!("unknown criterion {id}"),
    }
}

/// Run every criterion, optionally writing one JSON file per criterion plus a
/// summary into the output directory.
pub fn run_all(cfg: &VerifyConfig) -> Result<Vec<CriterionOutcome>> {
    let mut outcomes = Vec::new();
    for id in 1..=13 {
        let outcome = run_criterion(id, cfg)?;
        if let Some(dir) = &cfg.out_dir {
            let path = dir.join(format!("criterion-{:02}.json", outcome.id));
            crate::output::write_json(&path, &outcome)?;
        }
        outcomes.push(outcome);
    }
    if let Some(dir) = &cfg.out_dir {
        #[derive(Serialize)]
        struct Summary<'a> {
            schema: u32,
            seed: u64,
            samples: usize,
            quick: bool,
            passed: usize,
            failed: usize,
            outcomes: &'a [CriterionOutcome],
        }
        let passed = outcomes.iter().filter(|o| o.passed).count();
        crate::output::write_json(
            &dir.join("summary.json"),
            &Summary {
                schema: crate::output::SCHEMA_VERSION,
                seed: cfg.seed,
                samples: cfg.samples,
                quick: cfg.quick,
                passed,
                failed: outcomes.len() - passed,
                outcomes: &outcomes,
            },
        )?;
    }
    Ok(outcomes)
}
