//! Adaptive Runge-Kutta integration of the geodesic equation.

use super::curvature::christoffel;
use super::{Domain, MetricChart};
use crate::error::{Result, TaleError};
use nalgebra::DVector;

/// Tolerances for the embedded Dormand-Prince 5(4) stepper.
#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 200_000,
        }
    }
}

impl OdeOptions {
    /// Looser tolerances for bulk Monte-Carlo work.
    pub fn bulk() -> Self {
        OdeOptions {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_steps: 200_000,
        }
    }
}

const DP_C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate `y' = f(t, y)` from `t0` to `t1` with an observer called after
/// each accepted step; the observer may stop the run early by returning
/// `false`. Returns the final `(t, y)` reached.
pub fn integrate_observed<F, O>(
    f: &F,
    t0: f64,
    t1: f64,
    y0: DVector<f64>,
    opts: &OdeOptions,
    observer: &mut O,
) -> Result<(f64, DVector<f64>)>
where
    F: Fn(f64, &DVector<f64>) -> DVector<f64>,
    O: FnMut(f64, &DVector<f64>) -> bool,
{
    let (t, y, _h) = integrate_observed_from(f, t0, t1, y0, opts, None, observer)?;
    Ok((t, y))
}

/// As [`integrate_observed`], with an optional warm-start step size; returns
/// the last step size so chained segment integrations can reuse it.
pub fn integrate_observed_from<F, O>(
    f: &F,
    t0: f64,
    t1: f64,
    y0: DVector<f64>,
    opts: &OdeOptions,
    initial_step: Option<f64>,
    observer: &mut O,
) -> Result<(f64, DVector<f64>, f64)>
where
    F: Fn(f64, &DVector<f64>) -> DVector<f64>,
    O: FnMut(f64, &DVector<f64>) -> bool,
{
    let mut t = t0;
    let mut y = y0;
    let span = t1 - t0;
    let mut h = initial_step.unwrap_or((span / 100.0).min(0.1)).max(1e-8);
    if span <= 0.0 {
        return Ok((t0, y, h));
    }
    let mut k = vec![DVector::<f64>::zeros(y.len()); 7];
    k[0] = f(t, &y);

    for _ in 0..opts.max_steps {
        if t >= t1 {
            return Ok((t, y, h));
        }
        // h is the controller's preferred step; h_used lands on t1 exactly.
        let h_used = h.min(t1 - t);

        for stage in 0..6 {
            let mut yi = y.clone();
            for (j, kj) in k.iter().enumerate().take(stage + 1) {
                if DP_A[stage][j] != 0.0 {
                    yi += kj * (h_used * DP_A[stage][j]);
                }
            }
            k[stage + 1] = f(t + DP_C[stage] * h_used, &yi);
        }
        // Fifth-order solution is the last A row; the embedded fourth-order
        // solution uses B4.
        let mut y5 = y.clone();
        for (j, kj) in k.iter().enumerate().take(6) {
            if DP_A[5][j] != 0.0 {
                y5 += kj * (h_used * DP_A[5][j]);
            }
        }
        let mut y4 = y.clone();
        for (j, kj) in k.iter().enumerate() {
            if DP_B4[j] != 0.0 {
                y4 += kj * (h_used * DP_B4[j]);
            }
        }
        let mut err: f64 = 0.0;
        let mut finite = true;
        for i in 0..y.len() {
            let e = (y5[i] - y4[i]).abs();
            let sc = opts.abs_tol + opts.rel_tol * y5[i].abs().max(y[i].abs());
            if !e.is_finite() {
                finite = false;
                break;
            }
            err = err.max(e / sc);
        }

        if !finite {
            h = h_used * 0.25;
            if h < 1e-14 * span.abs().max(1.0) {
                return Err(TaleError::Numerical(
                    "step size underflow near a non-finite region".into(),
                ));
            }
            continue;
        }

        let factor = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
        if err <= 1.0 {
            t += h_used;
            // FSAL: the last stage at the accepted point is k1 of the next step.
            k[0] = k[6].clone();
            y = y5;
            // Grow the preferred step from the accepted one, without letting
            // the landing clamp shrink the warm-start memory.
            h = (h_used * factor.clamp(0.2, 5.0)).max(h * 0.9);
            if !observer(t, &y) {
                return Ok((t, y, h));
            }
        } else {
            h = h_used * factor.clamp(0.2, 5.0);
        }
        if h < 1e-14 * span.abs().max(1.0) {
            return Err(TaleError::Numerical("step size underflow".into()));
        }
    }
    Err(TaleError::Numerical("maximum step count exceeded".into()))
}

pub fn integrate_to<F>(
    f: &F,
    t0: f64,
    t1: f64,
    y0: DVector<f64>,
    opts: &OdeOptions,
) -> Result<DVector<f64>>
where
    F: Fn(f64, &DVector<f64>) -> DVector<f64>,
{
    let (tf, y) = integrate_observed(f, t0, t1, y0, opts, &mut |_, _| true)?;
    if (tf - t1).abs() > 1e-9 * (1.0 + t1.abs()) {
        return Err(TaleError::Numerical("integration stopped early".into()));
    }
    Ok(y)
}

/// Right-hand side of the geodesic equation on a chart: state `(x, v)`,
/// `x' = v`, `v'^k = -Gamma^k_ij v^i v^j`.
pub fn geodesic_rhs(chart: &MetricChart, state: &DVector<f64>) -> DVector<f64> {
    let n = chart.dim();
    let x: Vec<f64> = (0..n).map(|i| state[i]).collect();
    let jet = chart.jet1_unchecked(&x);
    let nan = |_: ()| DVector::from_element(2 * n, f64::NAN);
    let gamma = match christoffel(&jet) {
        Ok(g) => g,
        Err(_) => return nan(()),
    };
    let mut out = DVector::zeros(2 * n);
    for i in 0..n {
        out[i] = state[n + i];
    }
    for kx in 0..n {
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += gamma[kx][(i, j)] * state[n + i] * state[n + j];
            }
        }
        out[n + kx] = -acc;
    }
    out
}

/// Why a geodesic run stopped before its requested time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitReason {
    LeftDomain,
    CoordinateBlowup,
}

/// A geodesic with the states recorded at each accepted step.
#[derive(Clone, Debug)]
pub struct GeodesicPath {
    pub dim: usize,
    pub times: Vec<f64>,
    /// Stacked `(x, v)` states aligned with `times`.
    pub states: Vec<DVector<f64>>,
    pub exit: Option<ExitReason>,
}

impl GeodesicPath {
    pub fn position(&self, i: usize) -> Vec<f64> {
        (0..self.dim).map(|k| self.states[i][k]).collect()
    }
    pub fn velocity(&self, i: usize) -> Vec<f64> {
        (0..self.dim).map(|k| self.states[i][self.dim + k]).collect()
    }
    pub fn end_position(&self) -> Vec<f64> {
        self.position(self.times.len() - 1)
    }
}

/// Margin kept from an annulus inner boundary, relative to the inner radius.
pub const DOMAIN_MARGIN: f64 = 3e-3;

/// Coordinate radius treated as infinity in unbounded charts.
pub const COORDINATE_CAP: f64 = 1e4;

fn inside_with_margin(chart: &MetricChart, x: &[f64]) -> bool {
    let r = super::norm(x);
    match chart.domain() {
        Domain::Full => r < COORDINATE_CAP,
        Domain::Annulus { inner } => r > inner * (1.0 + DOMAIN_MARGIN),
        Domain::PuncturedBall { outer } => r > 0.0 && r < outer * (1.0 - DOMAIN_MARGIN),
    }
}

/// Shoot a geodesic from `p` with initial velocity `v` for parameter time `t`.
///
/// If the geodesic reaches the chart boundary the truncated path is returned
/// with an exit flag.
pub fn geodesic_shoot(
    chart: &MetricChart,
    p: &[f64],
    v: &[f64],
    t: f64,
    opts: &OdeOptions,
) -> Result<GeodesicPath> {
    let n = chart.dim();
    if !chart.contains(p) {
        return Err(TaleError::DomainError(format!(
            "geodesic start {p:?} outside chart"
        )));
    }
    let mut y0 = DVector::zeros(2 * n);
    for i in 0..n {
        y0[i] = p[i];
        y0[n + i] = v[i];
    }
    let mut times = vec![0.0];
    let mut states = vec![y0.clone()];
    let mut exit = None;
    let rhs = |_t: f64, s: &DVector<f64>| geodesic_rhs(chart, s);
    let (_tf, _yf) = integrate_observed(&rhs, 0.0, t, y0, opts, &mut |tt, ss| {
        let x: Vec<f64> = (0..n).map(|i| ss[i]).collect();
        if !inside_with_margin(chart, &x) {
            exit = Some(match chart.domain() {
                Domain::Full => ExitReason::CoordinateBlowup,
                _ => ExitReason::LeftDomain,
            });
            times.push(tt);
            states.push(ss.clone());
            return false;
        }
        times.push(tt);
        states.push(ss.clone());
        true
    })?;
    Ok(GeodesicPath {
        dim: n,
        times,
        states,
        exit,
    })
}

/// Endpoint of the unit-time geodesic with initial velocity `v`.
pub fn exp_map(chart: &MetricChart, p: &[f64], v: &[f64], opts: &OdeOptions) -> Result<Vec<f64>> {
    let path = geodesic_shoot(chart, p, v, 1.0, opts)?;
    if path.exit.is_some() {
        return Err(TaleError::DomainError(
            "geodesic left the chart before unit time".into(),
        ));
    }
    Ok(path.end_position())
}

/// Speed `|v|_g` at a chart point.
pub fn g_speed(chart: &MetricChart, x: &[f64], v: &[f64]) -> f64 {
    let g = chart.metric_unchecked(x);
    let n = chart.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += g[(i, j)] * v[i] * v[j];
        }
    }
    s.sqrt()
}

/// Shooting estimate of the geodesic distance from `p` to `q`.
///
/// Minimizes the closest coordinate approach over a direction grid with two
/// rounds of local refinement. This is an upper-bound style estimate with no
/// cut-locus guarantee.
#[derive(Clone, Debug)]
pub struct DistanceEstimate {
    pub value: f64,
    /// Euclidean coordinate gap at the closest approach.
    pub gap: f64,
}

pub fn distance_estimate(
    chart: &MetricChart,
    p: &[f64],
    q: &[f64],
    directions: usize,
    opts: &OdeOptions,
) -> Result<DistanceEstimate> {
    let n = chart.dim();
    let coord_dist = p
        .iter()
        .zip(q)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let t_max = 3.0 * coord_dist + 1e-6;

    let eval_dir = |dir: &[f64]| -> (f64, f64) {
        let speed = g_speed(chart, p, dir);
        let v: Vec<f64> = dir.iter().map(|d| d / speed).collect();
        let path = match geodesic_shoot(chart, p, &v, t_max, opts) {
            Ok(path) => path,
            Err(_) => return (f64::INFINITY, f64::INFINITY),
        };
        // Closest approach over the recorded polyline, interpolating within
        // each accepted step.
        let mut best = (f64::INFINITY, f64::INFINITY);
        for i in 0..path.times.len().saturating_sub(1) {
            let x0 = path.position(i);
            let x1 = path.position(i + 1);
            let mut dd = 0.0;
            let mut dq = 0.0;
            for k in 0..n {
                let d = x1[k] - x0[k];
                dd += d * d;
                dq += d * (q[k] - x0[k]);
            }
            let s = if dd > 0.0 { (dq / dd).clamp(0.0, 1.0) } else { 0.0 };
            let mut gap2 = 0.0;
            for k in 0..n {
                let xk = x0[k] + s * (x1[k] - x0[k]);
                gap2 += (xk - q[k]) * (xk - q[k]);
            }
            let gap = gap2.sqrt();
            if gap < best.1 {
                let t = path.times[i] + s * (path.times[i + 1] - path.times[i]);
                best = (t, gap);
            }
        }
        best
    };

    let mut candidates: Vec<Vec<f64>> = (0..directions as u64)
        .map(|k| crate::sampling::sphere_direction(n, k))
        .collect();
    // Aim one candidate straight at the target in coordinates.
    candidates.push(q.iter().zip(p).map(|(a, b)| (a - b) / coord_dist).collect());

    let mut best_dir = candidates[0].clone();
    let mut best = (f64::INFINITY, f64::INFINITY);
    for dir in &candidates {
        let r = eval_dir(dir);
        if r.1 < best.1 {
            best = r;
            best_dir = dir.clone();
        }
    }
    // Local refinement around the best direction.
    let mut scale = 0.2;
    for _ in 0..2 {
        for axis in 0..n {
            for sign in [-1.0, 1.0] {
                let mut dir = best_dir.clone();
                dir[axis] += sign * scale;
                let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
                let dir: Vec<f64> = dir.iter().map(|x| x / norm).collect();
                let r = eval_dir(&dir);
                if r.1 < best.1 {
                    best = r;
                    best_dir = dir;
                }
            }
        }
        scale *= 0.25;
    }
    Ok(DistanceEstimate {
        value: best.0,
        gap: best.1,
    })
}
