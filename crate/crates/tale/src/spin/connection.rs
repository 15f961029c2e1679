//! The spin connection, the Schouten tensor, and the connection on the
//! doubled spinor bundle whose parallel sections are twistor spinors.
//!
//! On the doubled bundle `E = Sigma (+) Sigma` the connection acts as
//!
//! ```text
//! D^E_X (phi, psi) = ( nabla_X phi + (1/n) X . psi,
//!                     -(n/2) L(X) . phi + nabla_X psi )
//! ```
//!
//! with `L` the Schouten endomorphism and `.` Clifford multiplication.
//! Parallel transport integrates `s'(t) = -A(t) s(t)` along a curve, with the
//! growth monitor `|s(t)| <= e^{eps t} |s(0)|` for `eps` a sampled bound on
//! the connection norm.

use super::clifford::{CliffordRep, CMat, CVec};
use super::frame::{FrameData, FrameField};
use crate::error::{Result, TaleError};
use crate::metric::{curvature_at, geodesic::integrate_observed, MetricChart, OdeOptions};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

/// A differentiable curve `t -> (point, velocity)`.
pub type Curve<'a> = &'a dyn Fn(f64) -> (Vec<f64>, Vec<f64>);

/// Schouten endomorphism `L = (s / (2(n-1)) Id - Ric) / (n-2)` expressed in
/// the orthonormal frame. Undefined for `n = 2`.
pub fn schouten_endomorphism(chart: &MetricChart, frames: &FrameField, p: &[f64]) -> Result<DMatrix<f64>> {
    let n = chart.dim();
    if n < 3 {
        return Err(TaleError::UnsupportedDimension(n, "Schouten tensor needs n >= 3"));
    }
    let curv = curvature_at(chart, p)?;
    let e = frames.frame_at(p)?;
    // Ric in the frame: Ric(e_i, e_j); as an endomorphism of the frame this
    // is the same matrix since the frame is orthonormal.
    let ric_frame = e.transpose() * &curv.ricci * &e;
    let s = curv.scalar;
    let id = DMatrix::<f64>::identity(n, n);
    Ok((id * (s / (2.0 * (n as f64 - 1.0))) - ric_frame) / (n as f64 - 2.0))
}

/// Connection data for twistor transport over one chart.
pub struct TwistorConnection {
    chart: MetricChart,
    frames: FrameField,
    pub clifford: CliffordRep,
}

impl TwistorConnection {
    pub fn new(chart: MetricChart) -> Result<Self> {
        let frames = FrameField::new(chart.clone());
        Self::with_frames(chart, frames)
    }

    /// Use a custom frame field (e.g. a different Gram-Schmidt column order).
    pub fn with_frames(chart: MetricChart, frames: FrameField) -> Result<Self> {
        let clifford = CliffordRep::build(chart.dim())?;
        Ok(TwistorConnection {
            chart,
            frames,
            clifford,
        })
    }

    pub fn chart(&self) -> &MetricChart {
        &self.chart
    }

    pub fn frames(&self) -> &FrameField {
        &self.frames
    }

    pub fn spinor_dim(&self) -> usize {
        self.clifford.spinor_dim()
    }

    /// Doubled-state dimension `2 * 2^{n/2}`.
    pub fn state_dim(&self) -> usize {
        2 * self.clifford.spinor_dim()
    }

    pub fn schouten_frame(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        schouten_endomorphism(&self.chart, &self.frames, p)
    }

    /// Spin-connection matrix `(1/4) sum omega_ij(X) g_i g_j` for a coordinate
    /// direction `x`, given precomputed frame data.
    pub fn spin_matrix_from(&self, data: &FrameData, x: &[f64]) -> CMat {
        let omega = data.omega_in_direction(x);
        self.clifford.so_generator_lift(&(-omega))
    }

    /// Full doubled-bundle connection matrix in coordinate direction `x` at `p`.
    ///
    /// Rows/columns are ordered `(phi, psi)`.
    pub fn connection_matrix(&self, p: &[f64], x: &[f64]) -> Result<CMat> {
        let data = self.frames.at(p)?;
        let l = self.schouten_frame(p)?;
        Ok(self.connection_matrix_from(&data, &l, x))
    }

    pub fn connection_matrix_from(&self, data: &FrameData, l: &DMatrix<f64>, x: &[f64]) -> CMat {
        let n = self.chart.dim();
        let k = self.spinor_dim();
        let w = self.spin_matrix_from(data, x);
        let xf = data.to_frame(x);
        let gx = self.clifford.gamma(&xf);
        let lx: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| l[(i, j)] * xf[j]).sum())
            .collect();
        let glx = self.clifford.gamma(&lx);

        let mut a = CMat::zeros(2 * k, 2 * k);
        for i in 0..k {
            for j in 0..k {
                a[(i, j)] = w[(i, j)];
                a[(k + i, k + j)] = w[(i, j)];
                a[(i, k + j)] = gx[(i, j)] * Complex::new(1.0 / n as f64, 0.0);
                a[(k + i, j)] = glx[(i, j)] * Complex::new(-(n as f64) / 2.0, 0.0);
            }
        }
        a
    }
}

fn realify(v: &CVec) -> DVector<f64> {
    let m = v.len();
    let mut out = DVector::zeros(2 * m);
    for i in 0..m {
        out[2 * i] = v[i].re;
        out[2 * i + 1] = v[i].im;
    }
    out
}

fn complexify(v: &DVector<f64>) -> CVec {
    let m = v.len() / 2;
    CVec::from_fn(m, |i, _| Complex::new(v[2 * i], v[2 * i + 1]))
}

fn apply_complex(a: &CMat, s: &DVector<f64>) -> DVector<f64> {
    let m = a.nrows();
    let mut out = DVector::zeros(2 * m);
    for i in 0..m {
        let mut re = 0.0;
        let mut im = 0.0;
        for j in 0..m {
            let c = a[(i, j)];
            let (sr, si) = (s[2 * j], s[2 * j + 1]);
            re += c.re * sr - c.im * si;
            im += c.re * si + c.im * sr;
        }
        out[2 * i] = re;
        out[2 * i + 1] = im;
    }
    out
}

fn frobenius(a: &CMat) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Result of a parallel transport run.
#[derive(Clone, Debug)]
pub struct TransportResult {
    pub state: CVec,
    /// Largest `|s(t)| / (e^{eps t} |s(0)|)` observed; at most `1 + tolerance`
    /// for an accurate run.
    pub growth_excess: f64,
    /// Sampled bound on the connection norm along the curve.
    pub eps: f64,
}

/// Transport a state along `t in [0, 1]` solving `s' = -A(t) s`.
///
/// `matrix_fn` evaluates the connection matrix contracted with the curve
/// velocity at parameter `t`. The exponential growth monitor is enforced;
/// exceeding it beyond the integrator tolerance is an accuracy error.
pub fn transport_with(
    matrix_fn: &dyn Fn(f64) -> Result<CMat>,
    state0: &CVec,
    opts: &OdeOptions,
) -> Result<TransportResult> {
    // Bound the connection norm on a parameter sample for the growth monitor.
    let mut eps: f64 = 0.0;
    for k in 0..=16 {
        let a = matrix_fn(k as f64 / 16.0)?;
        eps = eps.max(frobenius(&a));
    }

    let norm0 = state0.norm();
    let rhs = |t: f64, s: &DVector<f64>| -> DVector<f64> {
        match matrix_fn(t) {
            Ok(a) => -apply_complex(&a, s),
            Err(_) => DVector::from_element(s.len(), f64::NAN),
        }
    };
    let mut excess: f64 = 0.0;
    let y0 = realify(state0);
    let (_t, yf) = integrate_observed(&rhs, 0.0, 1.0, y0, opts, &mut |t, y| {
        if norm0 > 0.0 {
            let bound = (eps * t).exp() * norm0;
            excess = excess.max(y.norm() / bound);
        }
        true
    })?;
    if excess > 1.0 + 1e-6 {
        return Err(TaleError::CertificateFailed(format!(
            "transport norm exceeded the exponential bound by a factor {excess}"
        )));
    }
    Ok(TransportResult {
        state: complexify(&yf),
        growth_excess: excess,
        eps,
    })
}

/// Parallel transport of a doubled-bundle state along a curve.
pub fn transport_state(
    conn: &TwistorConnection,
    curve: Curve,
    state0: &CVec,
    opts: &OdeOptions,
) -> Result<TransportResult> {
    let f = |t: f64| -> Result<CMat> {
        let (p, v) = curve(t);
        conn.connection_matrix(&p, &v)
    };
    transport_with(&f, state0, opts)
}

/// Parallel transport of a plain spinor along a curve (spin connection only).
pub fn transport_spinor(
    conn: &TwistorConnection,
    curve: Curve,
    state0: &CVec,
    opts: &OdeOptions,
) -> Result<TransportResult> {
    let f = |t: f64| -> Result<CMat> {
        let (p, v) = curve(t);
        let data = conn.frames().at(&p)?;
        Ok(conn.spin_matrix_from(&data, &v))
    };
    transport_with(&f, state0, opts)
}

/// Holonomy of a loop: the matrix of parallel transport around it.
pub fn holonomy_matrix(
    matrix_fn: &dyn Fn(f64) -> Result<CMat>,
    dim: usize,
    opts: &OdeOptions,
) -> Result<CMat> {
    let mut columns = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut e = CVec::zeros(dim);
        e[j] = Complex::new(1.0, 0.0);
        let r = transport_with(matrix_fn, &e, opts)?;
        columns.push(r.state);
    }
    Ok(CMat::from_columns(&columns))
}

/// Holonomy of the doubled-bundle connection around a loop.
pub fn state_holonomy(
    conn: &TwistorConnection,
    curve: Curve,
    opts: &OdeOptions,
) -> Result<CMat> {
    let f = |t: f64| -> Result<CMat> {
        let (p, v) = curve(t);
        conn.connection_matrix(&p, &v)
    };
    holonomy_matrix(&f, conn.state_dim(), opts)
}

/// Holonomy of the spin connection around a loop.
pub fn spinor_holonomy(
    conn: &TwistorConnection,
    curve: Curve,
    opts: &OdeOptions,
) -> Result<CMat> {
    let f = |t: f64| -> Result<CMat> {
        let (p, v) = curve(t);
        let data = conn.frames().at(&p)?;
        Ok(conn.spin_matrix_from(&data, &v))
    };
    holonomy_matrix(&f, conn.spinor_dim(), opts)
}

/// Circle of coordinate radius `r` in the `(i, j)` coordinate plane, based at
/// `p` (the loop starts and ends there).
pub fn coordinate_circle(p: &[f64], i: usize, j: usize, r: f64) -> impl Fn(f64) -> (Vec<f64>, Vec<f64>) {
    let p = p.to_vec();
    move |t: f64| {
        let ang = 2.0 * std::f64::consts::PI * t;
        let mut x = p.clone();
        x[i] += r * (ang.cos() - 1.0);
        x[j] += r * ang.sin();
        let mut v = vec![0.0; p.len()];
        v[i] = -r * 2.0 * std::f64::consts::PI * ang.sin();
        v[j] = r * 2.0 * std::f64::consts::PI * ang.cos();
        (x, v)
    }
}

/// Common limit of a parallel section along several curves into a puncture.
#[derive(Clone, Debug)]
pub struct ExtensionReport {
    /// Per-direction limit values at the puncture.
    pub limits: Vec<CVec>,
    pub mean_limit: CVec,
    /// Largest pairwise distance between the per-direction limits.
    pub spread: f64,
    /// Pairwise spreads of the transported values at intermediate radii,
    /// outermost first; these must shrink with the radius.
    pub spreads_at_radii: Vec<(f64, f64)>,
    /// How parallel the input section is: largest deviation between the
    /// section value and its transport at matching radii.
    pub parallel_residual: f64,
}

impl ExtensionReport {
    /// The spread must be below `tol` and must shrink with the loop length.
    pub fn certify(&self, tol: f64) -> Result<()> {
        if self.spread > tol {
            return Err(TaleError::CertificateFailed(format!(
                "extension limits disagree: spread {} > {tol}",
                self.spread
            )));
        }
        if let (Some(first), Some(last)) = (self.spreads_at_radii.first(), self.spreads_at_radii.last()) {
            // Linear shrinking with radius, with slack for integration noise.
            let expected = first.1 * (last.0 / first.0) * 50.0 + tol;
            if last.1 > expected {
                return Err(TaleError::CertificateFailed(format!(
                    "spread does not shrink with the loop length: {} at radius {}",
                    last.1, last.0
                )));
            }
        }
        Ok(())
    }
}

/// Extend a parallel section of the doubled bundle across the puncture of a
/// punctured-ball chart.
///
/// The section is transported radially inward along `directions` rays from
/// radius `r0` to `eps`; the per-curve limits must agree for the extension to
/// exist. The section's parallelism is probed by comparing its own values
/// with transported values at two intermediate radii.
pub fn extend_to_puncture(
    conn: &TwistorConnection,
    section: &dyn Fn(&[f64]) -> Result<CVec>,
    r0: f64,
    eps: f64,
    directions: usize,
    opts: &OdeOptions,
) -> Result<ExtensionReport> {
    let n = conn.chart().dim();
    let dirs: Vec<Vec<f64>> = (0..directions as u64)
        .map(|k| crate::sampling::sphere_direction(n, k))
        .collect();

    let radii = [r0, r0 * 0.5, r0 * 0.25, 2.0 * eps, eps];
    let mut per_radius_values: Vec<Vec<CVec>> = vec![Vec::new(); radii.len()];
    let mut limits = Vec::with_capacity(dirs.len());
    let mut parallel_residual: f64 = 0.0;

    for dir in &dirs {
        let start: Vec<f64> = dir.iter().map(|d| d * r0).collect();
        let mut state = section(&start)?;
        for (idx, w) in radii.windows(2).enumerate() {
            let (ra, rb) = (w[0], w[1]);
            let dir_c = dir.clone();
            let curve = move |t: f64| -> (Vec<f64>, Vec<f64>) {
                let r = ra + (rb - ra) * t;
                (
                    dir_c.iter().map(|d| d * r).collect(),
                    dir_c.iter().map(|d| d * (rb - ra)).collect(),
                )
            };
            per_radius_values[idx].push(state.clone());
            let res = transport_state(conn, &curve, &state, opts)?;
            state = res.state;
            // Compare against the section's own value at the new radius.
            let probe: Vec<f64> = dir.iter().map(|d| d * rb).collect();
            let s = section(&probe)?;
            parallel_residual = parallel_residual.max((&s - &state).norm());
        }
        per_radius_values[radii.len() - 1].push(state.clone());
        // The transported value is C^1 in the radius: extrapolate linearly
        // from 2 eps and eps to kill the O(eps) term of the limit.
        let at_2eps = per_radius_values[radii.len() - 2].last().unwrap();
        limits.push(&state * Complex::new(2.0, 0.0) - at_2eps);
    }

    let spread_of = |vals: &[CVec]| -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..vals.len() {
            for j in (i + 1)..vals.len() {
                worst = worst.max((&vals[i] - &vals[j]).norm());
            }
        }
        worst
    };

    let spread = spread_of(&limits);
    let spreads_at_radii: Vec<(f64, f64)> = radii
        .iter()
        .zip(&per_radius_values)
        .map(|(r, vals)| (*r, spread_of(vals)))
        .collect();
    let dimv = limits[0].len();
    let mut mean = CVec::zeros(dimv);
    for l in &limits {
        mean += l;
    }
    mean /= Complex::new(limits.len() as f64, 0.0);

    Ok(ExtensionReport {
        limits,
        mean_limit: mean,
        spread,
        spreads_at_radii,
        parallel_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{flat_metric, round_sphere_chart};
    use approx::assert_relative_eq;

    #[test]
    fn schouten_flat_vanishes_and_sphere_is_minus_half() {
        let flat = flat_metric(4);
        let frames = FrameField::new(flat.clone());
        let l = schouten_endomorphism(&flat, &frames, &[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert!(l.abs().max() < 1e-10);

        let sphere = round_sphere_chart(4, 1.0).unwrap();
        let frames = FrameField::new(sphere.clone());
        let l = schouten_endomorphism(&sphere, &frames, &[0.3, -0.2, 0.1, 0.4]).unwrap();
        let dev = (&l + DMatrix::<f64>::identity(4, 4) * 0.5).abs().max();
        assert!(dev < 1e-6, "L + Id/2 deviates by {dev}");
    }

    #[test]
    fn schouten_vanishes_on_ricci_flat_charts() {
        // Both terms of the Schouten tensor are Ricci contractions.
        let eh = crate::metric::eguchi_hanson(1.0).unwrap();
        let frames = FrameField::new(eh.clone());
        for k in 0..4u64 {
            let p: Vec<f64> = crate::sampling::sphere_direction(4, 31 + k)
                .iter()
                .map(|d| d * (1.5 + 0.8 * k as f64))
                .collect();
            let l = schouten_endomorphism(&eh, &frames, &p).unwrap();
            assert!(l.abs().max() < 1e-6, "Schouten {} at {p:?}", l.abs().max());
        }
    }

    #[test]
    fn zero_initial_state_stays_zero() {
        // A parallel section vanishing at one point vanishes along every
        // curve: uniqueness of parallel sections, restated numerically.
        let conn = TwistorConnection::new(round_sphere_chart(4, 1.0).unwrap()).unwrap();
        let p0 = [0.3, -0.2, 0.1, 0.4];
        let p1 = [-0.5, 0.4, 0.3, -0.1];
        let curve = move |t: f64| -> (Vec<f64>, Vec<f64>) {
            (
                (0..4).map(|i| p0[i] + t * (p1[i] - p0[i])).collect(),
                (0..4).map(|i| p1[i] - p0[i]).collect(),
            )
        };
        let zero = CVec::zeros(8);
        let res = transport_state(&conn, &curve, &zero, &OdeOptions::default()).unwrap();
        assert!(res.state.norm() <= 1e-8);
    }

    #[test]
    fn schouten_rejects_dimension_two() {
        let flat = flat_metric(2);
        let frames = FrameField::new(flat.clone());
        assert!(schouten_endomorphism(&flat, &frames, &[0.1, 0.2]).is_err());
    }

    #[test]
    fn flat_connection_matrix_blocks() {
        let conn = TwistorConnection::new(flat_metric(4)).unwrap();
        let a = conn.connection_matrix(&[0.0; 4], &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let k = 4;
        // Diagonal blocks vanish, lower-left vanishes, upper-right is g_1 / n.
        for i in 0..k {
            for j in 0..k {
                assert!(a[(i, j)].norm() < 1e-14);
                assert!(a[(k + i, k + j)].norm() < 1e-14);
                assert!(a[(k + i, j)].norm() < 1e-14);
                let expect = conn.clifford.gammas[0][(i, j)] * Complex::new(0.25, 0.0);
                assert!((a[(i, k + j)] - expect).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn sphere_lower_left_block_is_plus_quarter_n_gamma() {
        // With L(X) = -X/2 the lower-left block is +(n/4) gamma(X).
        let conn = TwistorConnection::new(round_sphere_chart(4, 1.0).unwrap()).unwrap();
        let p = [0.2, -0.1, 0.3, 0.15];
        let x = [0.7, 0.1, -0.4, 0.2];
        let a = conn.connection_matrix(&p, &x).unwrap();
        let data = conn.frames().at(&p).unwrap();
        let xf = data.to_frame(&x);
        let gx = conn.clifford.gamma(&xf);
        let k = 4;
        let mut dev: f64 = 0.0;
        for i in 0..k {
            for j in 0..k {
                dev = dev.max((a[(k + i, j)] - gx[(i, j)] * Complex::new(1.0, 0.0)).norm());
            }
        }
        assert!(dev < 1e-6, "lower-left block deviates by {dev}");
    }

    #[test]
    fn flat_loop_holonomy_is_identity() {
        let conn = TwistorConnection::new(flat_metric(4)).unwrap();
        let curve = coordinate_circle(&[0.5, 0.0, -0.2, 0.1], 0, 2, 0.4);
        let h = state_holonomy(&conn, &curve, &OdeOptions::default()).unwrap();
        let dev = (&h - CMat::identity(8, 8))
            .iter()
            .map(|x| x.norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-9, "flat holonomy deviates by {dev}");
    }

    #[test]
    fn sphere_state_holonomy_is_identity() {
        // The doubled-bundle connection is flat for conformally flat metrics.
        let conn = TwistorConnection::new(round_sphere_chart(4, 1.0).unwrap()).unwrap();
        let curve = coordinate_circle(&[0.3, 0.1, 0.0, -0.2], 1, 3, 0.25);
        let h = state_holonomy(&conn, &curve, &OdeOptions::default()).unwrap();
        let dev = (&h - CMat::identity(8, 8))
            .iter()
            .map(|x| x.norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-7, "sphere state holonomy deviates by {dev}");
    }

    #[test]
    fn sphere_spinor_holonomy_is_not_identity() {
        // Negative control: the plain spin connection on the sphere is curved.
        let conn = TwistorConnection::new(round_sphere_chart(4, 1.0).unwrap()).unwrap();
        let curve = coordinate_circle(&[0.3, 0.1, 0.0, -0.2], 1, 3, 0.25);
        let h = spinor_holonomy(&conn, &curve, &OdeOptions::default()).unwrap();
        let dev = (&h - CMat::identity(4, 4))
            .iter()
            .map(|x| x.norm())
            .fold(0.0, f64::max);
        assert!(dev > 1e-3);
    }

    #[test]
    fn flat_transport_closed_form() {
        // On flat space a parallel state moves by
        // phi -> phi - (1/n) gamma(dx) psi, with psi constant.
        let conn = TwistorConnection::new(flat_metric(4)).unwrap();
        let p0 = [0.1, 0.0, 0.3, -0.2];
        let p1 = [0.9, 0.4, -0.1, 0.5];
        let curve = move |t: f64| -> (Vec<f64>, Vec<f64>) {
            (
                (0..4).map(|i| p0[i] + t * (p1[i] - p0[i])).collect(),
                (0..4).map(|i| p1[i] - p0[i]).collect(),
            )
        };
        let mut s0 = CVec::zeros(8);
        for i in 0..8 {
            s0[i] = Complex::new(0.3 + i as f64 * 0.1, 0.2 - i as f64 * 0.05);
        }
        let res = transport_state(&conn, &curve, &s0, &OdeOptions::default()).unwrap();
        let dx: Vec<f64> = (0..4).map(|i| p1[i] - p0[i]).collect();
        let g = conn.clifford.gamma(&dx);
        let phi0 = s0.rows(0, 4).into_owned();
        let psi0 = s0.rows(4, 4).into_owned();
        let phi_expect = &phi0 - &g * &psi0 * Complex::new(0.25, 0.0);
        for i in 0..4 {
            assert!((res.state[i] - phi_expect[i]).norm() < 1e-10);
            assert!((res.state[4 + i] - psi0[i]).norm() < 1e-10);
        }
        assert!(res.growth_excess <= 1.0 + 1e-9);
    }

    #[test]
    fn extension_on_flat_punctured_ball() {
        use crate::metric::Domain;
        let flat = flat_metric(4);
        let ball = crate::metric::MetricChart::new(
            "flat-punctured",
            flat.field().clone(),
            Domain::PuncturedBall { outer: 1.0 },
        );
        let conn = TwistorConnection::new(ball).unwrap();
        let rep = conn.clifford.clone();
        // Closed-form parallel family phi(x) = phi0 - (1/4) gamma(x) psi0.
        let mut phi0 = CVec::zeros(4);
        phi0[0] = Complex::new(0.4, 0.0);
        phi0[2] = Complex::new(0.0, -0.7);
        let mut psi0 = CVec::zeros(4);
        psi0[1] = Complex::new(1.0, 0.3);
        psi0[3] = Complex::new(-0.5, 0.2);
        let section = {
            let rep = rep.clone();
            let phi0 = phi0.clone();
            let psi0 = psi0.clone();
            move |x: &[f64]| -> Result<CVec> {
                let g = rep.gamma(x);
                let phi = &phi0 - &g * &psi0 * Complex::new(0.25, 0.0);
                let mut s = CVec::zeros(8);
                for i in 0..4 {
                    s[i] = phi[i];
                    s[4 + i] = psi0[i];
                }
                Ok(s)
            }
        };
        let report =
            extend_to_puncture(&conn, &section, 0.5, 1e-4, 8, &OdeOptions::default()).unwrap();
        report.certify(1e-9).unwrap();
        // The limit is the closed-form value at the origin.
        for i in 0..4 {
            assert!((report.mean_limit[i] - phi0[i]).norm() < 1e-9);
            assert!((report.mean_limit[4 + i] - psi0[i]).norm() < 1e-9);
        }
        assert!(report.parallel_residual < 1e-9);
    }

    #[test]
    fn perturbed_section_fails_extension() {
        use crate::metric::Domain;
        let flat = flat_metric(4);
        let ball = crate::metric::MetricChart::new(
            "flat-punctured",
            flat.field().clone(),
            Domain::PuncturedBall { outer: 1.0 },
        );
        let conn = TwistorConnection::new(ball).unwrap();
        let rep = conn.clifford.clone();
        let mut psi0 = CVec::zeros(4);
        psi0[0] = Complex::new(1.0, 0.0);
        let section = move |x: &[f64]| -> Result<CVec> {
            let g = rep.gamma(x);
            // One percent direction-dependent corruption.
            let bump = Complex::new(0.01 * (x[1] * 5.0).sin(), 0.0);
            let phi = -(&g * &psi0) * Complex::new(0.25, 0.0);
            let mut s = CVec::zeros(8);
            for i in 0..4 {
                s[i] = phi[i] + bump;
                s[4 + i] = psi0[i];
            }
            Ok(s)
        };
        let report =
            extend_to_puncture(&conn, &section, 0.5, 1e-4, 8, &OdeOptions::default()).unwrap();
        assert!(report.certify(1e-9).is_err());
        assert!(report.parallel_residual > 1e-4);
    }

    #[test]
    fn transport_norm_bound_holds() {
        let conn = TwistorConnection::new(round_sphere_chart(4, 1.0).unwrap()).unwrap();
        let curve = coordinate_circle(&[0.4, -0.3, 0.2, 0.0], 0, 3, 0.3);
        let mut s0 = CVec::zeros(8);
        s0[0] = Complex::new(1.0, 0.0);
        s0[5] = Complex::new(0.0, 1.0);
        let res = transport_state(&conn, &curve, &s0, &OdeOptions::default()).unwrap();
        assert!(res.growth_excess <= 1.0 + 1e-9);
        assert!(res.eps > 0.0);
        // Relative norm change stays small on a short loop.
        assert_relative_eq!(res.state.norm(), s0.norm(), max_relative = 1e-6);
    }
}
