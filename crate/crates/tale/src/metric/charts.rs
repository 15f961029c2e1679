//! Standard charts: flat space, the round sphere in stereographic
//! coordinates, quotient charts, conformal rescalings, and a synthetic chart
//! with prescribed decay used as a regression oracle.

use super::{Domain, ExprField, MetricChart, MetricExpr, MetricField, MetricJet};
use crate::error::{Result, TaleError};
use crate::groups::FiniteRotationGroup;
use crate::jet::{Jet2, Real};
use nalgebra::DMatrix;
use std::sync::Arc;

struct FlatExpr {
    n: usize,
}

impl MetricExpr for FlatExpr {
    fn dim(&self) -> usize {
        self.n
    }
    fn entries<T: Real>(&self, y: &[T]) -> Vec<T> {
        let n = self.n;
        let zero = y[0].constant_like(0.0);
        let one = y[0].constant_like(1.0);
        let mut out = vec![zero; n * n];
        for i in 0..n {
            out[i * n + i] = one.clone();
        }
        out
    }
}

/// The Euclidean metric on `R^n`.
pub fn flat_metric(n: usize) -> MetricChart {
    MetricChart::new("flat", Arc::new(ExprField(FlatExpr { n })), Domain::Full)
}

struct SphereExpr {
    n: usize,
    radius: f64,
}

impl MetricExpr for SphereExpr {
    fn dim(&self) -> usize {
        self.n
    }
    fn entries<T: Real>(&self, y: &[T]) -> Vec<T> {
        let n = self.n;
        let zero = y[0].constant_like(0.0);
        let r2 = y[0].constant_like(self.radius * self.radius);
        let mut s = y[0].constant_like(0.0);
        for v in y {
            s = s + v.clone() * v.clone();
        }
        // g = (2 R^2 / (R^2 + |y|^2))^2 * delta
        let c = r2.scale(2.0) / (r2 + s);
        let c2 = c.clone() * c;
        let mut out = vec![zero; n * n];
        for i in 0..n {
            out[i * n + i] = c2.clone();
        }
        out
    }
}

/// Round sphere of the given radius in the stereographic chart on `R^n`,
/// `g = (4 R^4 / (R^2 + |y|^2)^2) delta`.
pub fn round_sphere_chart(n: usize, radius: f64) -> Result<MetricChart> {
    if radius <= 0.0 {
        return Err(TaleError::DomainError("sphere radius must be positive".into()));
    }
    Ok(MetricChart::new(
        format!("sphere(R={radius})"),
        Arc::new(ExprField(SphereExpr { n, radius })),
        Domain::Full,
    ))
}

/// Tag a chart with an identification group acting by isometries.
///
/// The evaluator is unchanged (the deck action is isometric, so the base
/// evaluator already descends); the group is recorded in the chart and is
/// consumed by volume and compactification routines. Rejects groups that do
/// not act by isometries of the chart.
pub fn quotient_annulus(base: &MetricChart, deck: FiniteRotationGroup) -> Result<MetricChart> {
    if deck.dimension() != base.dim() {
        return Err(TaleError::InvalidGroup(
            "deck group dimension does not match the chart".into(),
        ));
    }
    // Sample the isometry condition  R^T g(R y) R = g(y)  on a spread of points.
    let n = base.dim();
    let probes: Vec<Vec<f64>> = sample_points(base, 12);
    for m in deck.elements() {
        for p in &probes {
            let rp: Vec<f64> = (0..n)
                .map(|i| (0..n).map(|j| m[(i, j)] * p[j]).sum())
                .collect();
            if !base.contains(&rp) {
                return Err(TaleError::DomainError(
                    "deck image of a probe point leaves the chart domain".into(),
                ));
            }
            let g_p = base.metric_unchecked(p);
            let g_rp = base.metric_unchecked(&rp);
            let pulled = m.transpose() * g_rp * m;
            if (&pulled - &g_p).abs().max() > 1e-10 {
                return Err(TaleError::InvalidGroup(
                    "group does not act by isometries of the chart".into(),
                ));
            }
        }
    }
    Ok(base.clone().with_deck(deck))
}

fn sample_points(chart: &MetricChart, count: usize) -> Vec<Vec<f64>> {
    let n = chart.dim();
    let base_r = match chart.domain() {
        Domain::Full => 1.0,
        Domain::Annulus { inner } => inner * 1.5 + 0.5,
        Domain::PuncturedBall { outer } => outer * 0.4,
    };
    (0..count)
        .map(|k| {
            let r = base_r * (1.0 + 0.15 * k as f64);
            let dir = crate::sampling::sphere_direction(n, k as u64 + 1);
            dir.iter().map(|d| d * r).collect::<Vec<f64>>()
        })
        .filter(|p| chart.contains(p))
        .collect()
}

/// Named conformal factors accepted by [`conformal_rescale`].
#[derive(Clone, Copy, Debug)]
pub enum ScalarFactor {
    Const(f64),
    /// `u = |y|^2`
    Rho2,
    /// `u = |y|^{-2}`
    InvRho2,
    /// `u = (1 + |y|^2) / 2`, turning the flat metric into the unit sphere.
    SphereFactor,
}

impl ScalarFactor {
    pub fn eval<T: Real>(&self, y: &[T]) -> T {
        let mut s = y[0].constant_like(0.0);
        for v in y {
            s = s + v.clone() * v.clone();
        }
        match self {
            ScalarFactor::Const(c) => y[0].constant_like(*c),
            ScalarFactor::Rho2 => s,
            ScalarFactor::InvRho2 => s.recip(),
            ScalarFactor::SphereFactor => (s + y[0].constant_like(1.0)).scale(0.5),
        }
    }

    pub fn value(&self, y: &[f64]) -> f64 {
        let jets: Vec<f64> = y.to_vec();
        self.eval::<f64>(&jets)
    }
}

struct RescaledField {
    base: Arc<dyn MetricField>,
    factor: ScalarFactor,
}

impl RescaledField {
    fn factor_jet(&self, y: &[f64]) -> Jet2 {
        self.factor.eval::<Jet2>(&Jet2::seed(y))
    }

    fn check_positive(&self, u: f64, y: &[f64]) {
        debug_assert!(
            u > 0.0,
            "conformal factor vanished at {y:?}; rescale is degenerate there"
        );
    }
}

impl MetricField for RescaledField {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn eval(&self, y: &[f64]) -> DMatrix<f64> {
        let u = self.factor.value(y);
        self.check_positive(u, y);
        self.base.eval(y) / (u * u)
    }

    fn eval_d1(&self, y: &[f64]) -> MetricJet {
        let n = self.dim();
        let base = self.base.eval_d1(y);
        let u = self.factor_jet(y);
        self.check_positive(u.v, y);
        let w = u.v.powi(-2);
        let g = &base.g * w;
        let dg = (0..n)
            .map(|a| &base.dg[a] * w - &base.g * (2.0 * u.g(a) * u.v.powi(-3)))
            .collect();
        MetricJet { g, dg, d2g: None }
    }

    fn eval_d2(&self, y: &[f64]) -> MetricJet {
        let n = self.dim();
        let base = self.base.eval_d2(y);
        let bd2 = base.d2g.as_ref().expect("second derivatives");
        let u = self.factor_jet(y);
        self.check_positive(u.v, y);
        let w2 = u.v.powi(-2);
        let w3 = u.v.powi(-3);
        let w4 = u.v.powi(-4);
        let g = &base.g * w2;
        let dg: Vec<DMatrix<f64>> = (0..n)
            .map(|a| &base.dg[a] * w2 - &base.g * (2.0 * u.g(a) * w3))
            .collect();
        let d2g = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        &bd2[a][b] * w2
                            - (&base.dg[a] * u.g(b) + &base.dg[b] * u.g(a)) * (2.0 * w3)
                            + &base.g * (6.0 * u.g(a) * u.g(b) * w4 - 2.0 * u.h(a, b) * w3)
                    })
                    .collect()
            })
            .collect();
        MetricJet { g, dg, d2g: Some(d2g) }
    }

    fn exact_derivatives(&self) -> bool {
        self.base.exact_derivatives()
    }
}

/// Conformally rescaled chart `u^{-2} g` for a positive factor `u`.
///
/// The factor must be positive on the domain; a vanishing factor makes the
/// rescaled metric degenerate and is reported at evaluation points where it
/// is detected.
pub fn conformal_rescale(base: &MetricChart, factor: ScalarFactor) -> Result<MetricChart> {
    if let ScalarFactor::Const(c) = factor {
        if c <= 0.0 {
            return Err(TaleError::DegenerateConformalFactor(format!(
                "constant factor {c} must be positive"
            )));
        }
    }
    let field = Arc::new(RescaledField {
        base: base.field().clone(),
        factor,
    });
    let mut chart = MetricChart::new(
        format!("rescale({})", base.name()),
        field,
        base.domain().clone(),
    );
    if let Some(deck) = base.deck() {
        chart = chart.with_deck(deck.clone());
    }
    Ok(chart)
}

struct DecayExpr {
    n: usize,
    tau: i32,
    coeff: DMatrix<f64>,
}

impl MetricExpr for DecayExpr {
    fn dim(&self) -> usize {
        self.n
    }
    fn entries<T: Real>(&self, y: &[T]) -> Vec<T> {
        let n = self.n;
        let mut s = y[0].constant_like(0.0);
        for v in y {
            s = s + v.clone() * v.clone();
        }
        let rho = s.sqrt();
        let decay = rho.powi(self.tau).recip();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let delta = if i == j { 1.0 } else { 0.0 };
                out.push(y[0].constant_like(delta) + decay.clone().scale(self.coeff[(i, j)]));
            }
        }
        out
    }
}

/// `delta + rho^{-tau} M` on an exterior annulus, for a fixed symmetric `M`.
///
/// Closed-form decay of every derivative order makes this the regression
/// oracle for decay-order estimation.
pub fn synthetic_decay_chart(n: usize, tau: i32, coeff: DMatrix<f64>, inner: f64) -> Result<MetricChart> {
    if tau < 1 {
        return Err(TaleError::DomainError("decay order must be >= 1".into()));
    }
    if (&coeff - coeff.transpose()).abs().max() > 0.0 {
        return Err(TaleError::Numerical("decay coefficient must be symmetric".into()));
    }
    Ok(MetricChart::new(
        format!("synthetic(tau={tau})"),
        Arc::new(ExprField(DecayExpr { n, tau, coeff })),
        Domain::Annulus { inner },
    ))
}
