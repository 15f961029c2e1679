//! Coordinate inversion, conformal pushforward of asymptotically locally
//! Euclidean ends to a punctured ball, decay-order estimation, and the
//! one-point compactification regularity probe.
//!
//! An exterior chart on `|y| > R` with `g = delta + h`, `h = O(|y|^{-tau})`,
//! is carried by the inversion `z = y / |y|^2` to a chart on the punctured
//! ball `0 < |z| < 1/R`. With the conformal factor `|y|^{-4}` the metric in
//! inverted coordinates is
//!
//! ```text
//! gbar_ij(z) = delta_ij + h_ij
//!            - (2/|z|^2) (z_i sum_k z_k h_kj + z_j sum_l z_l h_il)
//!            + (4/|z|^4) z_i z_j sum_kl z_k z_l h_kl
//! ```
//!
//! with `h` evaluated at `y = z/|z|^2`; equivalently
//! `gbar = delta + (I - 2 zhat zhat^T) h (I - 2 zhat zhat^T)`. The module
//! implements the three-term expression directly; the generic
//! Jacobian-conjugation route lives in [`pullback_oracle`] as an independent
//! cross-check and is exercised by the verification suite.

use crate::error::{Result, TaleError};
use crate::groups::FiniteRotationGroup;
use crate::jet::{Jet, Jet2, Real};
use crate::metric::{Domain, MetricChart, MetricField, MetricJet};
use nalgebra::DMatrix;
use std::sync::Arc;

/// Inversion `z = y / |y|^2`. Undefined at the origin.
pub fn invert_point(y: &[f64]) -> Result<Vec<f64>> {
    let r2: f64 = y.iter().map(|v| v * v).sum();
    if r2 == 0.0 {
        return Err(TaleError::DomainError("inversion undefined at the origin".into()));
    }
    Ok(y.iter().map(|v| v / r2).collect())
}

/// Jacobian `dz/dy = (I - 2 yhat yhat^T) / |y|^2` of the inversion.
pub fn invert_jacobian(y: &[f64]) -> Result<DMatrix<f64>> {
    let n = y.len();
    let r2: f64 = y.iter().map(|v| v * v).sum();
    if r2 == 0.0 {
        return Err(TaleError::DomainError("inversion undefined at the origin".into()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        (delta - 2.0 * y[i] * y[j] / r2) / r2
    }))
}

/// The displayed three-term pushforward, generic over the scalar type.
///
/// `z` are the inverted coordinates and `h` the row-major entries of
/// `g - delta` already evaluated (and chain-ruled) at `y = z/|z|^2`.
fn pushforward_formula<T: Real>(z: &[T], h: &[T]) -> Vec<T> {
    let n = z.len();
    let mut z2 = z[0].constant_like(0.0);
    for v in z {
        z2 = z2 + v.clone() * v.clone();
    }
    let inv_z2 = z2.recip();

    // s_i = sum_k z_k h_ki, q = sum_kl z_k z_l h_kl
    let mut s = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = z[0].constant_like(0.0);
        for k in 0..n {
            acc = acc + z[k].clone() * h[k * n + i].clone();
        }
        s.push(acc);
    }
    let mut q = z[0].constant_like(0.0);
    for (k, zk) in z.iter().enumerate() {
        q = q + zk.clone() * s[k].clone();
    }

    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let delta = z[0].constant_like(if i == j { 1.0 } else { 0.0 });
            let cross = (z[i].clone() * s[j].clone() + z[j].clone() * s[i].clone())
                * inv_z2.clone().scale(2.0);
            let rank_one = z[i].clone() * z[j].clone() * q.clone()
                * (inv_z2.clone() * inv_z2.clone()).scale(4.0);
            out.push(delta + h[i * n + j].clone() - cross + rank_one);
        }
    }
    out
}

struct PushforwardField {
    base: Arc<dyn MetricField>,
}

impl PushforwardField {
    fn map_point(&self, z: &[f64]) -> Vec<f64> {
        let r2: f64 = z.iter().map(|v| v * v).sum();
        z.iter().map(|v| v / r2).collect()
    }
}

impl MetricField for PushforwardField {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn eval(&self, z: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        let y = self.map_point(z);
        let gy = self.base.eval(&y);
        let mut h = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                h.push(gy[(i, j)] - if i == j { 1.0 } else { 0.0 });
            }
        }
        let vals = pushforward_formula::<f64>(z, &h);
        DMatrix::from_row_slice(n, n, &vals)
    }

    fn eval_d1(&self, z: &[f64]) -> MetricJet {
        let n = self.dim();
        // The inversion map as jets in z gives exact first derivatives of y(z).
        let zs = Jet::seed(z);
        let mut r2 = zs[0].constant_like(0.0);
        for v in &zs {
            r2 = r2 + v.clone() * v.clone();
        }
        let ymap: Vec<Jet> = zs.iter().map(|v| v.clone() / r2.clone()).collect();
        let y: Vec<f64> = ymap.iter().map(|j| j.v).collect();
        let base = self.base.eval_d1(&y);

        // Chain rule: H_ij(z) = h_ij(y(z)).
        let mut h = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let delta = if i == j { 1.0 } else { 0.0 };
                let v = base.g[(i, j)] - delta;
                let mut g = vec![0.0; n];
                for a in 0..n {
                    let mut acc = 0.0;
                    for c in 0..n {
                        acc += base.dg[c][(i, j)] * ymap[c].g(a);
                    }
                    g[a] = acc;
                }
                h.push(Jet::from_parts(v, &g));
            }
        }
        let vals = pushforward_formula::<Jet>(&zs, &h);
        let g = DMatrix::from_fn(n, n, |i, j| vals[i * n + j].v);
        let dg = (0..n)
            .map(|a| DMatrix::from_fn(n, n, |i, j| vals[i * n + j].g(a)))
            .collect();
        MetricJet { g, dg, d2g: None }
    }

    fn eval_d2(&self, z: &[f64]) -> MetricJet {
        let n = self.dim();
        let zs = Jet2::seed(z);
        let mut r2 = zs[0].constant_like(0.0);
        for v in &zs {
            r2 = r2 + v.clone() * v.clone();
        }
        let ymap: Vec<Jet2> = zs.iter().map(|v| v.clone() / r2.clone()).collect();
        let y: Vec<f64> = ymap.iter().map(|j| j.v).collect();
        let base = self.base.eval_d2(&y);
        let bd2 = base.d2g.as_ref().expect("second derivatives");

        let mut h = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let delta = if i == j { 1.0 } else { 0.0 };
                let v = base.g[(i, j)] - delta;
                let mut grad = vec![0.0; n];
                let mut hess = vec![0.0; n * n];
                for a in 0..n {
                    let mut acc = 0.0;
                    for c in 0..n {
                        acc += base.dg[c][(i, j)] * ymap[c].g(a);
                    }
                    grad[a] = acc;
                    for b in 0..n {
                        let mut acc2 = 0.0;
                        for c in 0..n {
                            acc2 += base.dg[c][(i, j)] * ymap[c].h(a, b);
                            for d in 0..n {
                                acc2 += bd2[c][d][(i, j)] * ymap[c].g(a) * ymap[d].g(b);
                            }
                        }
                        hess[a * n + b] = acc2;
                    }
                }
                h.push(Jet2::from_parts(v, &grad, &hess));
            }
        }
        let vals = pushforward_formula::<Jet2>(&zs, &h);
        let g = DMatrix::from_fn(n, n, |i, j| vals[i * n + j].v);
        let dg = (0..n)
            .map(|a| DMatrix::from_fn(n, n, |i, j| vals[i * n + j].g(a)))
            .collect();
        let d2g = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| DMatrix::from_fn(n, n, |i, j| vals[i * n + j].h(a, b)))
                    .collect()
            })
            .collect();
        MetricJet { g, dg, d2g: Some(d2g) }
    }

    fn exact_derivatives(&self) -> bool {
        self.base.exact_derivatives()
    }
}

/// Carry an exterior chart (`|y| > R`) to the punctured ball `0 < |z| < 1/R`
/// via the inversion and the conformal factor `|y|^{-4}`.
pub fn pushforward_inverted_metric(exterior: &MetricChart) -> Result<MetricChart> {
    let inner = match exterior.domain() {
        Domain::Annulus { inner } => *inner,
        _ => {
            return Err(TaleError::DomainError(
                "pushforward needs an exterior annulus chart".into(),
            ))
        }
    };
    if inner <= 0.0 {
        return Err(TaleError::DomainError("annulus inner radius must be positive".into()));
    }
    let field = Arc::new(PushforwardField {
        base: exterior.field().clone(),
    });
    let mut chart = MetricChart::new(
        format!("inverted({})", exterior.name()),
        field,
        Domain::PuncturedBall { outer: 1.0 / inner },
    );
    if let Some(deck) = exterior.deck() {
        // Orthogonal identifications commute with the inversion.
        chart = chart.with_deck(deck.clone());
    }
    Ok(chart)
}

/// Independent first-principles route: `gbar = |z|^4 J^T g(y) J` with
/// `J = dy/dz`. Used to cross-check the displayed formula.
pub fn pullback_oracle(exterior: &MetricChart, z: &[f64]) -> Result<DMatrix<f64>> {
    let y = invert_point(z)?;
    let jac = invert_jacobian(z)?; // dy/dz has the same form as dz/dy at z
    let g = exterior.metric(&y)?;
    let z2: f64 = z.iter().map(|v| v * v).sum();
    Ok(jac.transpose() * g * jac * z2.powi(2))
}

/// Decay data of an asymptotically locally Euclidean chart: leading order
/// `tau`, number of derivative orders `mu` obeying the matching decay, the
/// inner radius of the chart, and the group of the end.
#[derive(Clone, Debug)]
pub struct AleDescriptor {
    pub tau: f64,
    pub mu: usize,
    pub inner_radius: f64,
    pub group: Option<FiniteRotationGroup>,
}

impl AleDescriptor {
    pub fn group_order(&self) -> usize {
        self.group.as_ref().map_or(1, |g| g.order())
    }
}

/// Log-log regression of one derivative order.
#[derive(Clone, Debug)]
pub struct DecayFit {
    pub k: usize,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub sup_norms: Vec<f64>,
}

/// Result of decay estimation.
#[derive(Clone, Debug)]
pub struct AleEstimate {
    pub descriptor: AleDescriptor,
    pub fits: Vec<DecayFit>,
    /// Set when the norms are at machine zero (flat chart); `tau` is then infinite.
    pub machine_zero: bool,
    /// Set when sup norms fail to decrease monotonically along the radii.
    pub low_confidence: bool,
}

pub const DIRECTIONS_PER_RADIUS: usize = 64;

/// Sup norm over sampled directions of the k-th derivatives of `g - delta`.
fn sup_deviation(chart: &MetricChart, radius: f64, k: usize) -> Result<f64> {
    let n = chart.dim();
    let mut sup: f64 = 0.0;
    for d in 0..DIRECTIONS_PER_RADIUS {
        let dir = crate::sampling::sphere_direction(n, d as u64);
        let p: Vec<f64> = dir.iter().map(|x| x * radius).collect();
        match k {
            0 => {
                let g = chart.metric(&p)?;
                for i in 0..n {
                    for j in 0..n {
                        let delta = if i == j { 1.0 } else { 0.0 };
                        sup = sup.max((g[(i, j)] - delta).abs());
                    }
                }
            }
            1 => {
                let jet = chart.jet1(&p)?;
                for a in 0..n {
                    sup = sup.max(jet.dg[a].abs().max());
                }
            }
            2 => {
                let jet = chart.jet2(&p)?;
                for row in jet.d2g.as_ref().expect("d2") {
                    for m in row {
                        sup = sup.max(m.abs().max());
                    }
                }
            }
            3 => {
                // Third-order divided differences of the second derivatives,
                // at the scale of the annulus: smaller steps drown in rounding
                // noise once the second derivatives themselves are tiny.
                let h = 0.1 * radius;
                for a in 0..n {
                    let mut pp = p.clone();
                    let mut pm = p.clone();
                    pp[a] += h;
                    pm[a] -= h;
                    let jp = chart.jet2(&pp)?;
                    let jm = chart.jet2(&pm)?;
                    let d2p = jp.d2g.as_ref().expect("d2");
                    let d2m = jm.d2g.as_ref().expect("d2");
                    for b in 0..n {
                        for c in 0..n {
                            let diff = (&d2p[b][c] - &d2m[b][c]) / (2.0 * h);
                            sup = sup.max(diff.abs().max());
                        }
                    }
                }
            }
            _ => {
                return Err(TaleError::InsufficientData(
                    "derivative orders above 3 are not sampled".into(),
                ))
            }
        }
    }
    Ok(sup)
}

fn fit_log_log(radii: &[f64], sups: &[f64]) -> (f64, f64, f64) {
    let pts: Vec<(f64, f64)> = radii
        .iter()
        .zip(sups)
        .filter(|(_, s)| **s > 0.0)
        .map(|(r, s)| (r.ln(), s.ln()))
        .collect();
    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = m * sxx - sx * sx;
    let slope = (m * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / m;
    let mean_y = sy / m;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    (slope, intercept, r2)
}

const MACHINE_ZERO: f64 = 1e-13;
/// A derivative order matches the expected decay when its fitted slope is
/// within this distance of `-(tau + k)`.
pub const SLOPE_TOL: f64 = 0.3;

/// Estimate the decay order of `g - delta` at large radius.
///
/// Fits the slope of `log sup |d^k (g - delta)|` against `log rho` for each
/// `k <= k_max`; `tau` is minus the order-zero slope and `mu` the largest `k`
/// whose slope stays within [`SLOPE_TOL`] of `-(tau + k)`.
pub fn estimate_ale_order(
    chart: &MetricChart,
    radii: &[f64],
    k_max: usize,
) -> Result<AleEstimate> {
    if radii.len() < 4 {
        return Err(TaleError::InsufficientData(
            "need at least 4 radii for the decay regression".into(),
        ));
    }
    if k_max > 3 {
        return Err(TaleError::InsufficientData("k_max is capped at 3".into()));
    }
    let inner_radius = match chart.domain() {
        Domain::Annulus { inner } => *inner,
        _ => 0.0,
    };

    let mut fits = Vec::new();
    let mut low_confidence = false;
    for k in 0..=k_max {
        let sups: Vec<f64> = radii
            .iter()
            .map(|r| sup_deviation(chart, *r, k))
            .collect::<Result<_>>()?;
        for w in sups.windows(2) {
            if w[1] > w[0] * 1.05 && w[0] > MACHINE_ZERO {
                low_confidence = true;
            }
        }
        let (slope, intercept, r2) = if sups.iter().all(|s| *s <= MACHINE_ZERO) {
            (f64::NEG_INFINITY, f64::NEG_INFINITY, 1.0)
        } else {
            fit_log_log(radii, &sups)
        };
        fits.push(DecayFit {
            k,
            slope,
            intercept,
            r_squared: r2,
            sup_norms: sups,
        });
    }

    let machine_zero = fits[0].slope == f64::NEG_INFINITY;
    let tau = if machine_zero { f64::INFINITY } else { -fits[0].slope };
    let mut mu = 0;
    for fit in fits.iter().skip(1) {
        let expected = -(tau + fit.k as f64);
        if machine_zero || (fit.slope - expected).abs() <= SLOPE_TOL {
            mu = fit.k;
        } else {
            break;
        }
    }
    Ok(AleEstimate {
        descriptor: AleDescriptor {
            tau,
            mu,
            inner_radius,
            group: chart.deck().cloned(),
        },
        fits,
        machine_zero,
        low_confidence,
    })
}

/// Vanishing order of `g - delta` at the puncture of an interior chart: the
/// same regression as [`estimate_ale_order`], run on radii shrinking to zero,
/// where the expected slopes are `+(tau - k)`.
pub fn estimate_vanishing_order(
    chart: &MetricChart,
    radii: &[f64],
    k_max: usize,
) -> Result<Vec<DecayFit>> {
    let mut fits = Vec::new();
    for k in 0..=k_max {
        let sups: Vec<f64> = radii
            .iter()
            .map(|r| sup_deviation(chart, *r, k))
            .collect::<Result<_>>()?;
        let (slope, intercept, r2) = if sups.iter().all(|s| *s <= MACHINE_ZERO) {
            (f64::INFINITY, f64::NEG_INFINITY, 1.0)
        } else {
            fit_log_log(radii, &sups)
        };
        fits.push(DecayFit {
            k,
            slope,
            intercept,
            r_squared: r2,
            sup_norms: sups,
        });
    }
    Ok(fits)
}

/// Per-order samples of the compactified metric near the added point and the
/// resulting differentiability verdict.
#[derive(Clone, Debug)]
pub struct RegularityReport {
    /// Dyadic radii probed, decreasing.
    pub radii: Vec<f64>,
    /// Regression per derivative order `k = 0..=3` on the probed radii.
    pub fits: Vec<DecayFit>,
    /// Orders whose divided differences stay bounded as the radius shrinks.
    pub bounded_through: usize,
    /// Certified continuity order of the extension at the added point.
    pub verdict_order: usize,
}

/// One-point conformal compactification of an exterior chart.
///
/// Requires the hypothesis `mu >= tau - 1 >= 2`. Returns the inverted chart
/// tagged with the added point's singularity group (the deck group of the
/// end) and a regularity report: the extension is certified `C^m` when the
/// sampled derivatives of `gbar - delta` through order `m` still decay at the
/// puncture, with `m` capped at `tau - 1`.
pub fn compactify(
    exterior: &MetricChart,
    descriptor: &AleDescriptor,
) -> Result<(MetricChart, RegularityReport)> {
    // The hypothesis is about integer orders; estimated tau carries regression
    // noise, so compare with the regression tolerance as slack.
    if !(descriptor.mu as f64 + SLOPE_TOL >= descriptor.tau - 1.0
        && descriptor.tau - 1.0 >= 2.0 - SLOPE_TOL)
    {
        return Err(TaleError::InsufficientData(format!(
            "compactification hypothesis mu >= tau - 1 >= 2 fails: tau = {}, mu = {}",
            descriptor.tau, descriptor.mu
        )));
    }
    let chart = pushforward_inverted_metric(exterior)?;
    let outer = match chart.domain() {
        Domain::PuncturedBall { outer } => *outer,
        _ => unreachable!(),
    };

    let radii: Vec<f64> = (3..=8).map(|j| outer * 2f64.powi(-j)).collect();
    let fits = estimate_vanishing_order(&chart, &radii, 3)?;

    let cap = ((descriptor.tau.round() as i64) - 1).max(0) as usize;
    let mut verdict = 0usize;
    for fit in &fits {
        // Positive slope towards the puncture: the order still vanishes there.
        if fit.slope >= SLOPE_TOL {
            verdict = fit.k;
        } else {
            break;
        }
    }
    let verdict_order = verdict.min(cap);
    let mut bounded = 0usize;
    for fit in &fits {
        if fit.slope >= -0.1 {
            bounded = fit.k;
        } else {
            break;
        }
    }

    let group = descriptor
        .group
        .clone()
        .or_else(|| exterior.deck().cloned());
    let chart = match group {
        Some(g) => chart.with_added_point(g),
        None => chart,
    };

    Ok((
        chart,
        RegularityReport {
            radii,
            fits,
            bounded_through: bounded,
            verdict_order,
        },
    ))
}

/// `delta + h` everywhere on an exterior annulus, for a fixed symmetric `h`.
/// Exercises the pushforward formula against the pullback oracle.
pub fn constant_perturbation_chart(
    n: usize,
    h: DMatrix<f64>,
    inner: f64,
) -> Result<MetricChart> {
    if (&h - h.transpose()).abs().max() > 0.0 {
        return Err(TaleError::Numerical("perturbation must be symmetric".into()));
    }
    struct ConstExpr {
        n: usize,
        h: DMatrix<f64>,
    }
    impl crate::metric::MetricExpr for ConstExpr {
        fn dim(&self) -> usize {
            self.n
        }
        fn entries<T: Real>(&self, y: &[T]) -> Vec<T> {
            let n = self.n;
            let mut out = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    out.push(y[0].constant_like(delta + self.h[(i, j)]));
                }
            }
            out
        }
    }
    Ok(MetricChart::new(
        "constant-perturbation",
        Arc::new(crate::metric::ExprField(ConstExpr { n, h })),
        Domain::Annulus { inner },
    ))
}
