//! Metric charts with exact derivatives, curvature, and geodesics.

pub mod charts;
pub mod curvature;
pub mod eguchi_hanson;
pub mod geodesic;

pub use charts::{conformal_rescale, flat_metric, quotient_annulus, round_sphere_chart, synthetic_decay_chart, ScalarFactor};
pub use curvature::{curvature_at, CurvatureBundle};
pub use eguchi_hanson::eguchi_hanson;
pub use geodesic::{distance_estimate, exp_map, g_speed, geodesic_shoot, GeodesicPath, OdeOptions};

use crate::error::{Result, TaleError};
use crate::groups::FiniteRotationGroup;
use crate::jet::{Jet, Jet2, Real};
use nalgebra::DMatrix;
use std::sync::Arc;

/// Default relative step for finite-difference fallbacks.
pub const FD_STEP: f64 = 1e-4;

/// Metric value together with first (and optionally second) derivatives.
///
/// `dg[a]` is the matrix of `d g_ij / d y_a`; `d2g[a][b]` the matrix of
/// `d^2 g_ij / d y_a d y_b`.
#[derive(Clone, Debug)]
pub struct MetricJet {
    pub g: DMatrix<f64>,
    pub dg: Vec<DMatrix<f64>>,
    pub d2g: Option<Vec<Vec<DMatrix<f64>>>>,
}

/// Pointwise metric evaluator. Implementations built from jet-generic
/// expressions deliver derivatives exact to machine precision.
pub trait MetricField: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, y: &[f64]) -> DMatrix<f64>;
    /// Metric and first derivatives.
    fn eval_d1(&self, y: &[f64]) -> MetricJet;
    /// Metric with first and second derivatives.
    fn eval_d2(&self, y: &[f64]) -> MetricJet;
    fn exact_derivatives(&self) -> bool;
}

/// Symmetric-matrix-valued expression over a generic scalar.
///
/// The single generic implementation is evaluated with `f64` for values and
/// with jets for derivatives; see [`ExprField`].
pub trait MetricExpr: Send + Sync {
    fn dim(&self) -> usize;
    /// Row-major `n x n` entries; must be symmetric.
    fn entries<T: Real>(&self, y: &[T]) -> Vec<T>;
}

/// Adapter turning a [`MetricExpr`] into an object-safe [`MetricField`].
pub struct ExprField<E>(pub E);

fn collect_matrix(n: usize, vals: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, n, vals)
}

impl<E: MetricExpr> MetricField for ExprField<E> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn eval(&self, y: &[f64]) -> DMatrix<f64> {
        let vals = self.0.entries::<f64>(y);
        collect_matrix(self.0.dim(), &vals)
    }

    fn eval_d1(&self, y: &[f64]) -> MetricJet {
        let n = self.0.dim();
        let jets = self.0.entries::<Jet>(&Jet::seed(y));
        let g = DMatrix::from_fn(n, n, |i, j| jets[i * n + j].v);
        let dg = (0..n)
            .map(|a| DMatrix::from_fn(n, n, |i, j| jets[i * n + j].g(a)))
            .collect();
        MetricJet { g, dg, d2g: None }
    }

    fn eval_d2(&self, y: &[f64]) -> MetricJet {
        let n = self.0.dim();
        let jets = self.0.entries::<Jet2>(&Jet2::seed(y));
        let g = DMatrix::from_fn(n, n, |i, j| jets[i * n + j].v);
        let dg = (0..n)
            .map(|a| DMatrix::from_fn(n, n, |i, j| jets[i * n + j].g(a)))
            .collect();
        let d2g = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| DMatrix::from_fn(n, n, |i, j| jets[i * n + j].h(a, b)))
                    .collect()
            })
            .collect();
        MetricJet { g, dg, d2g: Some(d2g) }
    }

    fn exact_derivatives(&self) -> bool {
        true
    }
}

/// Metric given only by a pointwise evaluator; derivatives fall back to
/// central finite differences with step `h * (1 + |y|)`.
pub struct FdField {
    pub dim: usize,
    pub eval: Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>,
    pub h: f64,
}

impl MetricField for FdField {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, y: &[f64]) -> DMatrix<f64> {
        (self.eval)(y)
    }
    fn eval_d1(&self, y: &[f64]) -> MetricJet {
        let scale = 1.0 + y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let h = self.h * scale;
        let g = (self.eval)(y);
        let dg = fd_first(&|p| (self.eval)(p), y, h);
        MetricJet { g, dg, d2g: None }
    }
    fn eval_d2(&self, y: &[f64]) -> MetricJet {
        let scale = 1.0 + y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let h = self.h * scale;
        let g = (self.eval)(y);
        let dg = fd_first(&|p| (self.eval)(p), y, h);
        let d2g = fd_second(&|p| (self.eval)(p), y, h);
        MetricJet { g, dg, d2g: Some(d2g) }
    }
    fn exact_derivatives(&self) -> bool {
        false
    }
}

pub(crate) fn fd_first(
    f: &dyn Fn(&[f64]) -> DMatrix<f64>,
    y: &[f64],
    h: f64,
) -> Vec<DMatrix<f64>> {
    let n = y.len();
    (0..n)
        .map(|a| {
            let mut yp = y.to_vec();
            let mut ym = y.to_vec();
            yp[a] += h;
            ym[a] -= h;
            (f(&yp) - f(&ym)) / (2.0 * h)
        })
        .collect()
}

pub(crate) fn fd_second(
    f: &dyn Fn(&[f64]) -> DMatrix<f64>,
    y: &[f64],
    h: f64,
) -> Vec<Vec<DMatrix<f64>>> {
    let n = y.len();
    let base = f(y);
    let mut out = vec![vec![DMatrix::zeros(base.nrows(), base.ncols()); n]; n];
    for a in 0..n {
        for b in a..n {
            let d = if a == b {
                let mut yp = y.to_vec();
                let mut ym = y.to_vec();
                yp[a] += h;
                ym[a] -= h;
                (f(&yp) - 2.0 * &base + f(&ym)) / (h * h)
            } else {
                let mut ypp = y.to_vec();
                let mut ypm = y.to_vec();
                let mut ymp = y.to_vec();
                let mut ymm = y.to_vec();
                ypp[a] += h;
                ypp[b] += h;
                ypm[a] += h;
                ypm[b] -= h;
                ymp[a] -= h;
                ymp[b] += h;
                ymm[a] -= h;
                ymm[b] -= h;
                (f(&ypp) - f(&ypm) - f(&ymp) + f(&ymm)) / (4.0 * h * h)
            };
            out[a][b] = d.clone();
            out[b][a] = d;
        }
    }
    out
}

/// Where a chart is defined.
#[derive(Clone, Debug)]
pub enum Domain {
    /// All of `R^n`.
    Full,
    /// `|y| > inner`.
    Annulus { inner: f64 },
    /// `0 < |z| < outer`.
    PuncturedBall { outer: f64 },
}

impl Domain {
    pub fn contains(&self, y: &[f64]) -> bool {
        let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        match self {
            Domain::Full => true,
            Domain::Annulus { inner } => r > *inner,
            Domain::PuncturedBall { outer } => r > 0.0 && r < *outer,
        }
    }
}

/// A coordinate domain plus a smooth field of symmetric positive-definite
/// matrices, optionally with an identification group (deck transformations
/// acting isometrically on the chart) and a tag for a point added at `z = 0`
/// by conformal compactification.
#[derive(Clone)]
pub struct MetricChart {
    name: String,
    dim: usize,
    field: Arc<dyn MetricField>,
    domain: Domain,
    deck: Option<FiniteRotationGroup>,
    added_point_group: Option<FiniteRotationGroup>,
}

impl std::fmt::Debug for MetricChart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MetricChart")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("domain", &self.domain)
            .field("deck_order", &self.deck.as_ref().map(|g| g.order()))
            .finish()
    }
}

impl MetricChart {
    pub fn new(name: impl Into<String>, field: Arc<dyn MetricField>, domain: Domain) -> Self {
        let dim = field.dim();
        MetricChart {
            name: name.into(),
            dim,
            field,
            domain,
            deck: None,
            added_point_group: None,
        }
    }

    pub fn with_deck(mut self, deck: FiniteRotationGroup) -> Self {
        self.deck = Some(deck);
        self
    }

    pub(crate) fn with_added_point(mut self, group: FiniteRotationGroup) -> Self {
        self.added_point_group = Some(group);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Identification group of the chart, if any.
    pub fn deck(&self) -> Option<&FiniteRotationGroup> {
        self.deck.as_ref()
    }

    /// Singularity group of the point added at `z = 0`, for compactified charts.
    pub fn added_point_group(&self) -> Option<&FiniteRotationGroup> {
        self.added_point_group.as_ref()
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        y.len() == self.dim && self.domain.contains(y)
    }

    pub fn field(&self) -> &Arc<dyn MetricField> {
        &self.field
    }

    pub fn exact_derivatives(&self) -> bool {
        self.field.exact_derivatives()
    }

    fn check_domain(&self, y: &[f64]) -> Result<()> {
        if !self.contains(y) {
            return Err(TaleError::DomainError(format!(
                "point {:?} is outside chart '{}'",
                y, self.name
            )));
        }
        Ok(())
    }

    pub fn metric(&self, y: &[f64]) -> Result<DMatrix<f64>> {
        self.check_domain(y)?;
        Ok(self.field.eval(y))
    }

    pub fn metric_unchecked(&self, y: &[f64]) -> DMatrix<f64> {
        self.field.eval(y)
    }

    /// Metric and first derivatives.
    pub fn jet1(&self, y: &[f64]) -> Result<MetricJet> {
        self.check_domain(y)?;
        Ok(self.field.eval_d1(y))
    }

    pub fn jet1_unchecked(&self, y: &[f64]) -> MetricJet {
        self.field.eval_d1(y)
    }

    /// Metric with first and second derivatives.
    pub fn jet2(&self, y: &[f64]) -> Result<MetricJet> {
        self.check_domain(y)?;
        Ok(self.field.eval_d2(y))
    }

    /// First derivatives by central differences, for cross-checking exact ones.
    pub fn fd_first_derivatives(&self, y: &[f64], h: f64) -> Vec<DMatrix<f64>> {
        fd_first(&|p| self.field.eval(p), y, h)
    }

    /// Verify symmetry and positive-definiteness at a point.
    pub fn check_spd(&self, y: &[f64]) -> Result<()> {
        let g = self.metric(y)?;
        let asym = (&g - g.transpose()).abs().max();
        if asym > 1e-12 {
            return Err(TaleError::Numerical(format!(
                "metric asymmetry {asym} at {y:?}"
            )));
        }
        if nalgebra::Cholesky::new(g).is_none() {
            return Err(TaleError::Numerical(format!(
                "metric not positive definite at {y:?}"
            )));
        }
        Ok(())
    }
}

pub(crate) fn norm(y: &[f64]) -> f64 {
    y.iter().map(|v| v * v).sum::<f64>().sqrt()
}
