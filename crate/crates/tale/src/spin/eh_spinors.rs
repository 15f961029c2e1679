//! Parallel spinors on the Eguchi-Hanson chart and their behavior under the
//! conformal compactification.
//!
//! The parallel spinors are found numerically: spin holonomy matrices are
//! integrated around a generating set of loops and their joint fixed space is
//! extracted. A basis of that space is then carried to any chart point by
//! parallel transport along a canonical path (angular leg on the coordinate
//! sphere, then radial leg), which is path-independent for holonomy-fixed
//! initial values.
//!
//! For the compactified picture the chart map `w = (z_1, z_2, z_3, -z_4)`,
//! `z = y/|y|^2`, is used: composing the inversion with a reflection keeps the
//! chart change orientation-preserving, so the frame change between the
//! rescaled exterior frame and the compactified chart frame lifts through
//! `Spin(4)`. The lift is continued from an anchor direction where the frame
//! change is close to the identity.

use super::clifford::{CMat, CVec};
use super::connection::{
    coordinate_circle, spinor_holonomy, transport_spinor, TwistorConnection,
};
use crate::error::{Result, TaleError};
use crate::groups::{so4_to_pair_dyn, UnitQuaternion};
use crate::metric::{
    conformal_rescale, eguchi_hanson, Domain, MetricChart, MetricField, MetricJet, OdeOptions,
    ScalarFactor,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use std::sync::Arc;

/// Basis of the holonomy-fixed spinor space on the Eguchi-Hanson chart.
pub struct EhParallelSpinors {
    conn: TwistorConnection,
    basepoint: Vec<f64>,
    /// Orthonormal basis of the joint fixed space at the basepoint.
    pub basis: Vec<CVec>,
    /// Complex dimension of the fixed space (2 when consistent).
    pub holonomy_dim: usize,
    /// Largest `|H v - v|` over sampled holonomies and basis vectors.
    pub holonomy_residual: f64,
    opts: OdeOptions,
}

fn spread_dirs() -> [(usize, usize); 6] {
    [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
}

/// Nullspace of the stacked system `(H_k - I) v = 0` over the complex field,
/// via the realified singular value decomposition.
fn joint_fixed_space(hols: &[CMat]) -> Result<(Vec<CVec>, usize, f64)> {
    let dim = hols[0].nrows();
    let rows = 2 * dim * hols.len();
    let mut a = DMatrix::<f64>::zeros(rows, 2 * dim);
    for (k, h) in hols.iter().enumerate() {
        let d = h - CMat::identity(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                let c = d[(i, j)];
                let r0 = 2 * dim * k + 2 * i;
                a[(r0, 2 * j)] = c.re;
                a[(r0, 2 * j + 1)] = -c.im;
                a[(r0 + 1, 2 * j)] = c.im;
                a[(r0 + 1, 2 * j + 1)] = c.re;
            }
        }
    }
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.as_ref().expect("right singular vectors");
    let tol = 1e-7 * svd.singular_values.max().max(1.0);
    let mut null_real: Vec<DVector<f64>> = Vec::new();
    for (idx, s) in svd.singular_values.iter().enumerate() {
        if *s < tol {
            null_real.push(v_t.row(idx).transpose());
        }
    }
    // Rows beyond the singular value count are exact null directions.
    for idx in svd.singular_values.len()..2 * dim {
        null_real.push(v_t.row(idx).transpose());
    }

    // The real nullspace is closed under multiplication by i; extract a
    // complex orthonormal basis by complex Gram-Schmidt.
    let to_complex = |v: &DVector<f64>| -> CVec {
        CVec::from_fn(dim, |i, _| Complex::new(v[2 * i], v[2 * i + 1]))
    };
    let mut basis: Vec<CVec> = Vec::new();
    for v in &null_real {
        let mut c = to_complex(v);
        for b in &basis {
            let inner: Complex<f64> = b.iter().zip(c.iter()).map(|(x, y)| x.conj() * y).sum();
            c -= b * inner;
        }
        if c.norm() > 1e-6 {
            let n = c.norm();
            basis.push(c / Complex::new(n, 0.0));
        }
    }

    let mut residual: f64 = 0.0;
    for h in hols {
        for b in &basis {
            residual = residual.max((h * b - b).norm());
        }
    }
    let count = basis.len();
    Ok((basis, count, residual))
}

impl EhParallelSpinors {
    /// Compute the holonomy fixed space of the Eguchi-Hanson chart with bolt
    /// parameter `a`, based at `(r0, 0, 0, 0)`.
    pub fn compute(a: f64, r0: f64, opts: &OdeOptions) -> Result<Self> {
        let chart = eguchi_hanson(a)?;
        if r0 <= a * 1.2 {
            return Err(TaleError::DomainError(
                "basepoint too close to the bolt for holonomy loops".into(),
            ));
        }
        let conn = TwistorConnection::new(chart)?;
        let basepoint = vec![r0, 0.0, 0.0, 0.0];

        let mut hols = Vec::new();
        for (i, j) in spread_dirs() {
            // The far side of a circle of radius r dips to coordinate radius
            // r0 - 2r; keep that above the bolt.
            for scale in [0.15, 0.35] {
                let r = scale * (r0 - a);
                let curve = coordinate_circle(&basepoint, i, j, r);
                hols.push(spinor_holonomy(&conn, &curve, opts)?);
            }
        }
        let (basis, holonomy_dim, holonomy_residual) = joint_fixed_space(&hols)?;
        if holonomy_dim != 2 {
            return Err(TaleError::CertificateFailed(format!(
                "holonomy fixed space has complex dimension {holonomy_dim}, expected 2 \
                 (max residual {holonomy_residual:.2e})"
            )));
        }
        Ok(EhParallelSpinors {
            conn,
            basepoint,
            basis,
            holonomy_dim,
            holonomy_residual,
            opts: *opts,
        })
    }

    pub fn connection(&self) -> &TwistorConnection {
        &self.conn
    }

    pub fn basepoint(&self) -> &[f64] {
        &self.basepoint
    }

    /// Canonical path from the basepoint to `q`: a great-circle leg on the
    /// coordinate sphere of the basepoint, then a radial leg.
    fn legs_to(&self, q: &[f64]) -> Vec<Box<dyn Fn(f64) -> (Vec<f64>, Vec<f64>)>> {
        let r0 = self.basepoint[0];
        let rq: f64 = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        let qhat: Vec<f64> = q.iter().map(|v| v / rq).collect();
        let e0 = [1.0, 0.0, 0.0, 0.0];
        let cosang: f64 = qhat[0];

        let mut legs: Vec<Box<dyn Fn(f64) -> (Vec<f64>, Vec<f64>)>> = Vec::new();
        let slerp_leg = |from: [f64; 4], to: [f64; 4], radius: f64| -> Box<dyn Fn(f64) -> (Vec<f64>, Vec<f64>)> {
            let dot: f64 = from.iter().zip(&to).map(|(a, b)| a * b).sum();
            let ang = dot.clamp(-1.0, 1.0).acos();
            Box::new(move |t: f64| {
                if ang < 1e-12 {
                    let p: Vec<f64> = from.iter().map(|v| v * radius).collect();
                    return (p, vec![0.0; 4]);
                }
                let s = ang.sin();
                let (wa, wb) = (((1.0 - t) * ang).sin() / s, (t * ang).sin() / s);
                let (dwa, dwb) = (
                    -ang * ((1.0 - t) * ang).cos() / s,
                    ang * (t * ang).cos() / s,
                );
                let p: Vec<f64> = (0..4)
                    .map(|i| radius * (wa * from[i] + wb * to[i]))
                    .collect();
                let v: Vec<f64> = (0..4)
                    .map(|i| radius * (dwa * from[i] + dwb * to[i]))
                    .collect();
                (p, v)
            })
        };

        let target = [qhat[0], qhat[1], qhat[2], qhat[3]];
        if cosang < -0.9 {
            // Nearly antipodal: route through an orthogonal waypoint.
            let mut mid = [0.0, 1.0, 0.0, 0.0];
            if target[1].abs() > 0.9 {
                mid = [0.0, 0.0, 1.0, 0.0];
            }
            legs.push(slerp_leg(e0, mid, r0));
            legs.push(slerp_leg(mid, target, r0));
        } else {
            legs.push(slerp_leg(e0, target, r0));
        }
        // Radial leg.
        let th = target;
        legs.push(Box::new(move |t: f64| {
            let r = r0 + (rq - r0) * t;
            (
                th.iter().map(|d| d * r).collect(),
                th.iter().map(|d| d * (rq - r0)).collect(),
            )
        }));
        legs
    }

    /// Value at `q` of the parallel field with the given coefficients in the
    /// holonomy basis.
    pub fn value_at(&self, coeffs: &[Complex<f64>], q: &[f64]) -> Result<CVec> {
        let k = self.conn.spinor_dim();
        let mut state = CVec::zeros(k);
        for (c, b) in coeffs.iter().zip(&self.basis) {
            state += b * *c;
        }
        for leg in self.legs_to(q) {
            let curve = move |t: f64| leg(t);
            state = transport_spinor(&self.conn, &curve, &state, &self.opts)?.state;
        }
        Ok(state)
    }

    /// Residual of parallelism along coordinate directions at `q`, by finite
    /// differences of the transported field.
    pub fn parallel_residual(&self, coeffs: &[Complex<f64>], q: &[f64], h: f64) -> Result<f64> {
        let data = self.conn.frames().at(q)?;
        let here = self.value_at(coeffs, q)?;
        let mut worst: f64 = 0.0;
        for a in 0..4 {
            let mut qp = q.to_vec();
            let mut qm = q.to_vec();
            qp[a] += h;
            qm[a] -= h;
            let fp = self.value_at(coeffs, &qp)?;
            let fm = self.value_at(coeffs, &qm)?;
            let d = (&fp - &fm) / Complex::new(2.0 * h, 0.0);
            let mut dir = vec![0.0; 4];
            dir[a] = 1.0;
            let w = self.conn.spin_matrix_from(&data, &dir);
            worst = worst.max((d + w * &here).norm());
        }
        Ok(worst)
    }

    /// Compare the field at the antipodal chart point with the two lifts of
    /// the identification `y -> -y`; returns the two residuals.
    pub fn deck_equivariance_residuals(
        &self,
        coeffs: &[Complex<f64>],
        q: &[f64],
    ) -> Result<(f64, f64)> {
        let here = self.value_at(coeffs, q)?;
        let there = self.value_at(coeffs, &q.iter().map(|v| -v).collect::<Vec<f64>>())?;
        let minus = UnitQuaternion::ONE.neg();
        let lift_right = self
            .conn
            .clifford
            .pair_spinor_matrix(&UnitQuaternion::ONE, &minus);
        let lift_left = self
            .conn
            .clifford
            .pair_spinor_matrix(&minus, &UnitQuaternion::ONE);
        Ok((
            (&there - &lift_right * &here).norm(),
            (&there - &lift_left * &here).norm(),
        ))
    }
}

/// Chart coordinates with the last coordinate reflected. Composing with the
/// inversion keeps the chart change to the exterior orientation-preserving.
struct ReflectLast {
    base: Arc<dyn MetricField>,
}

fn flip(w: &[f64]) -> Vec<f64> {
    let mut z = w.to_vec();
    let last = z.len() - 1;
    z[last] = -z[last];
    z
}

impl MetricField for ReflectLast {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn eval(&self, w: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        let g = self.base.eval(&flip(w));
        DMatrix::from_fn(n, n, |i, j| {
            let s = sign(n, i) * sign(n, j);
            s * g[(i, j)]
        })
    }
    fn eval_d1(&self, w: &[f64]) -> MetricJet {
        let n = self.dim();
        let base = self.base.eval_d1(&flip(w));
        reflect_jet(n, base)
    }
    fn eval_d2(&self, w: &[f64]) -> MetricJet {
        let n = self.dim();
        let base = self.base.eval_d2(&flip(w));
        reflect_jet(n, base)
    }
    fn exact_derivatives(&self) -> bool {
        self.base.exact_derivatives()
    }
}

fn sign(n: usize, i: usize) -> f64 {
    if i == n - 1 {
        -1.0
    } else {
        1.0
    }
}

fn reflect_jet(n: usize, base: MetricJet) -> MetricJet {
    let g = DMatrix::from_fn(n, n, |i, j| sign(n, i) * sign(n, j) * base.g[(i, j)]);
    let dg: Vec<DMatrix<f64>> = (0..n)
        .map(|a| {
            DMatrix::from_fn(n, n, |i, j| {
                sign(n, a) * sign(n, i) * sign(n, j) * base.dg[a][(i, j)]
            })
        })
        .collect();
    let d2g = base.d2g.as_ref().map(|d2| {
        (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        DMatrix::from_fn(n, n, |i, j| {
                            sign(n, a) * sign(n, b) * sign(n, i) * sign(n, j) * d2[a][b][(i, j)]
                        })
                    })
                    .collect()
            })
            .collect()
    });
    MetricJet { g, dg, d2g }
}

/// The compactified Eguchi-Hanson picture: the rescaled metric on the
/// exterior chart, the compactified chart around the added point, and the
/// twistor section induced by a parallel spinor.
pub struct CompactifiedEh {
    pub a: f64,
    /// Inner radius of the exterior annulus feeding the inversion.
    pub exterior_inner: f64,
    /// `rho^{-4} g` on the exterior coordinates.
    pub rescaled: MetricChart,
    pub rescaled_conn: TwistorConnection,
    /// Compactified chart on the punctured ball (reflected inverted coordinates).
    pub w_chart: MetricChart,
    pub w_conn: TwistorConnection,
    pub spinors: EhParallelSpinors,
    coeffs: Vec<Complex<f64>>,
    opts: OdeOptions,
}

impl CompactifiedEh {
    pub fn new(a: f64, basepoint_radius: f64, exterior_inner: f64) -> Result<Self> {
        let opts = OdeOptions::default();
        let eh = eguchi_hanson(a)?;
        let spinors = EhParallelSpinors::compute(a, basepoint_radius, &opts)?;
        let rescaled = conformal_rescale(&eh, ScalarFactor::Rho2)?;
        let rescaled_conn = TwistorConnection::new(rescaled.clone())?;

        let exterior = MetricChart::new(
            format!("eh-exterior({exterior_inner})"),
            eh.field().clone(),
            Domain::Annulus { inner: exterior_inner },
        );
        let pushed = crate::conformal::pushforward_inverted_metric(&exterior)?;
        let w_field = Arc::new(ReflectLast { base: pushed.field().clone() });
        let w_chart = MetricChart::new(
            format!("compactified-eh(a={a})"),
            w_field,
            Domain::PuncturedBall { outer: 1.0 / exterior_inner },
        );
        let w_conn = TwistorConnection::new(w_chart.clone())?;

        Ok(CompactifiedEh {
            a,
            exterior_inner,
            rescaled,
            rescaled_conn,
            w_chart,
            w_conn,
            spinors,
            coeffs: vec![Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)],
            opts,
        })
    }

    /// Choose which combination of the two parallel spinors is transported.
    pub fn with_coefficients(mut self, coeffs: Vec<Complex<f64>>) -> Self {
        self.coeffs = coeffs;
        self
    }

    pub fn w_from_y(&self, y: &[f64]) -> Vec<f64> {
        let r2: f64 = y.iter().map(|v| v * v).sum();
        let mut w: Vec<f64> = y.iter().map(|v| v / r2).collect();
        w[3] = -w[3];
        w
    }

    pub fn y_from_w(&self, w: &[f64]) -> Vec<f64> {
        let z = flip(w);
        let r2: f64 = z.iter().map(|v| v * v).sum();
        z.iter().map(|v| v / r2).collect()
    }

    /// The parallel spinor in the exterior frame.
    pub fn y_field(&self, y: &[f64]) -> Result<CVec> {
        self.spinors.value_at(&self.coeffs, y)
    }

    /// The induced twistor spinor of the rescaled metric, in the exterior
    /// coordinates: conformal weight `u^{1/2}` with `u = rho^{-2}`.
    pub fn rescaled_phi(&self, y: &[f64]) -> Result<CVec> {
        let rho: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        Ok(self.y_field(y)? * Complex::new(1.0 / rho, 0.0))
    }

    /// Distance from `y` to the added point in the rescaled metric, along the
    /// radial ray: the integral of `s^{-2} sqrt(g_rr(s))`.
    pub fn distance_to_added_point(&self, y: &[f64]) -> f64 {
        let rho: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let a4 = self.a.powi(4);
        // g_rr = (1 - (a/s)^4)^{-1}; integrate to 64 rho, then a flat tail.
        let steps = 512;
        let s0 = rho;
        let s1 = 64.0 * rho;
        let mut acc = 0.0;
        for k in 0..steps {
            // Geometric grid handles the 1/s^2 decay well.
            let t0 = s0 * (s1 / s0).powf(k as f64 / steps as f64);
            let t1 = s0 * (s1 / s0).powf((k + 1) as f64 / steps as f64);
            let f = |s: f64| (1.0 - a4 / s.powi(4)).max(1e-12).powf(-0.5) / (s * s);
            acc += 0.5 * (f(t0) + f(t1)) * (t1 - t0);
        }
        acc + 1.0 / s1
    }

    /// Quaternion pair covering the frame change from the exterior rescaled
    /// frame to the compactified chart frame at the point `y`.
    ///
    /// Continued from the anchor direction `e_4`, where the frame change is
    /// close to the identity, along the great circle to `y`'s direction.
    pub fn transfer_pair(&self, y: &[f64]) -> Result<(UnitQuaternion, UnitQuaternion)> {
        let rho: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let yhat: Vec<f64> = y.iter().map(|v| v / rho).collect();
        let anchor = [0.0, 0.0, 0.0, 1.0];
        let dot: f64 = yhat.iter().zip(&anchor).map(|(a, b)| a * b).sum();
        let ang = dot.clamp(-1.0, 1.0).acos();

        // Waypoints along the great circle from the anchor to yhat.
        let steps = (ang / 0.12).ceil() as usize + 1;
        let mut waypoints: Vec<Vec<f64>> = Vec::with_capacity(steps + 1);
        if ang < 1e-9 {
            waypoints.push(yhat.clone());
        } else if dot < -0.999 {
            return Err(TaleError::DomainError(
                "transfer undefined along the antipode of the anchor direction".into(),
            ));
        } else {
            let s = ang.sin();
            for k in 0..=steps {
                let t = k as f64 / steps as f64;
                let (wa, wb) = (((1.0 - t) * ang).sin() / s, (t * ang).sin() / s);
                let p: Vec<f64> = (0..4).map(|i| wa * anchor[i] + wb * yhat[i]).collect();
                let norm: f64 = p.iter().map(|v| v * v).sum::<f64>().sqrt();
                waypoints.push(p.iter().map(|v| v * rho / norm).collect());
            }
        }

        let mut prev: Option<(UnitQuaternion, UnitQuaternion)> = None;
        for point in &waypoints {
            let o = self.frame_change_rotation(point)?;
            let (l, r) = so4_to_pair_dyn(&o)?;
            let aligned = match &prev {
                None => {
                    // Anchor: pick the representative nearest the identity.
                    if l.w + r.w >= 0.0 {
                        (l, r)
                    } else {
                        (l.neg(), r.neg())
                    }
                }
                Some((pl, pr)) => {
                    if l.dot(pl) + r.dot(pr) >= 0.0 {
                        (l, r)
                    } else {
                        (l.neg(), r.neg())
                    }
                }
            };
            prev = Some(aligned);
        }
        Ok(prev.expect("at least one waypoint"))
    }

    /// The frame-change rotation `O(y)` with `W = E O`: `E` the Gram-Schmidt
    /// frame of the rescaled exterior metric, `W` the compactified chart frame
    /// carried to exterior coordinates and measured in the same metric.
    fn frame_change_rotation(&self, y: &[f64]) -> Result<DMatrix<f64>> {
        let w = self.w_from_y(y);
        let e_resc = self.rescaled_conn.frames().frame_at(y)?;
        let e_w = self.w_conn.frames().frame_at(&w)?;

        // dy/dw at w: for y = P w / |w|^2 (P reflecting the last coordinate),
        // dy/dw = P (I - 2 what what^T) / |w|^2 evaluated with the reflection
        // applied to the row index.
        let w2: f64 = w.iter().map(|v| v * v).sum();
        let n = 4;
        let mut jac = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for a in 0..n {
                let p_i = sign(n, i);
                let zi = if i == n - 1 { -w[i] } else { w[i] }; // (P w)_i
                let delta = if i == a { 1.0 } else { 0.0 };
                jac[(i, a)] = p_i * delta / w2 - 2.0 * zi * w[a] / (w2 * w2);
            }
        }
        // The chart map (y, rho^{-4} g) -> (w, gbar_w) is an isometry by
        // construction, so the carried frame is orthonormal for the rescaled
        // metric as it stands.
        let carried = &jac * &e_w;
        let e_inv = e_resc
            .try_inverse()
            .ok_or_else(|| TaleError::Numerical("rescaled frame is singular".into()))?;
        let o = e_inv * carried;
        Ok(o)
    }

    /// The transferred twistor spinor in the compactified chart frame.
    pub fn w_phi(&self, w: &[f64]) -> Result<CVec> {
        let y = self.y_from_w(w);
        let (l, r) = self.transfer_pair(&y)?;
        // Components transform by the inverse of the lifted frame change.
        let s_inv = self
            .w_conn
            .clifford
            .pair_spinor_matrix(&l.conj(), &r.conj());
        Ok(s_inv * self.rescaled_phi(&y)?)
    }

    /// The full induced section of the doubled bundle in the compactified
    /// chart: `(phi, D phi)` with the Dirac value from finite differences.
    pub fn w_state(&self, w: &[f64], h: f64) -> Result<CVec> {
        let field = |q: &[f64]| -> Result<CVec> { self.w_phi(q) };
        let phi = self.w_phi(w)?;
        let psi = super::twistor::dirac_at(&self.w_conn, &field, w, h)?;
        let k = phi.len();
        let mut out = CVec::zeros(2 * k);
        for i in 0..k {
            out[i] = phi[i];
            out[k + i] = psi[i];
        }
        Ok(out)
    }

    pub fn options(&self) -> &OdeOptions {
        &self.opts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> OdeOptions {
        OdeOptions::default()
    }

    #[test]
    fn holonomy_fixed_space_is_two_dimensional() {
        let sp = EhParallelSpinors::compute(1.0, 2.0, &opts()).unwrap();
        assert_eq!(sp.holonomy_dim, 2);
        assert!(sp.holonomy_residual < 1e-7, "residual {}", sp.holonomy_residual);
        // The basis is orthonormal.
        for i in 0..2 {
            for j in 0..2 {
                let inner: Complex<f64> = sp.basis[i]
                    .iter()
                    .zip(sp.basis[j].iter())
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((inner - Complex::new(expect, 0.0)).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn parallel_spinors_live_in_one_chirality() {
        let sp = EhParallelSpinors::compute(1.0, 2.0, &opts()).unwrap();
        let chi = &sp.connection().clifford.chirality;
        // Both basis vectors are chirality eigenvectors with a common sign.
        let mut signs = Vec::new();
        for b in &sp.basis {
            let cb = chi * b;
            let plus = (&cb - b).norm();
            let minus = (&cb + b).norm();
            assert!(plus < 1e-8 || minus < 1e-8, "not chiral: {plus} vs {minus}");
            signs.push(plus < 1e-8);
        }
        assert_eq!(signs[0], signs[1]);
    }

    #[test]
    fn transported_field_is_parallel_and_norm_constant() {
        let sp = EhParallelSpinors::compute(1.0, 2.0, &opts()).unwrap();
        let coeffs = [Complex::new(0.8, 0.1), Complex::new(-0.3, 0.5)];
        let norm0 = sp
            .value_at(&coeffs, sp.basepoint())
            .unwrap()
            .norm();
        for k in 0..4u64 {
            let q: Vec<f64> = crate::sampling::sphere_direction(4, 3 + k)
                .iter()
                .map(|d| d * (1.6 + 0.5 * k as f64))
                .collect();
            let v = sp.value_at(&coeffs, &q).unwrap();
            assert!((v.norm() - norm0).abs() < 1e-7, "norm drift {}", (v.norm() - norm0).abs());
            let res = sp.parallel_residual(&coeffs, &q, 1e-4).unwrap();
            assert!(res < 1e-5, "parallel residual {res} at {q:?}");
        }
    }

    #[test]
    fn rescaled_field_is_a_twistor_spinor() {
        // The conformally transported parallel spinor solves the twistor
        // equation for rho^{-4} g.
        let ce = CompactifiedEh::new(1.0, 2.0, 3.0).unwrap();
        let field = |y: &[f64]| -> crate::error::Result<CVec> { ce.rescaled_phi(y) };
        for k in 0..3u64 {
            let y: Vec<f64> = crate::sampling::sphere_direction(4, 23 + k)
                .iter()
                .map(|d| d * (8.0 + 3.0 * k as f64))
                .collect();
            let x = crate::sampling::sphere_direction(4, 40 + k);
            let res =
                super::super::twistor::twistor_residual(&ce.rescaled_conn, &field, &y, &x, 1e-2)
                    .unwrap();
            // The field values have magnitude ~ 1/rho; compare relative.
            let scale = field(&y).unwrap().norm();
            assert!(
                res.norm() / scale < 1e-4,
                "relative twistor residual {} at {y:?}",
                res.norm() / scale
            );
        }
    }

    #[test]
    fn rescaled_norm_tracks_distance_to_added_point() {
        let ce = CompactifiedEh::new(1.0, 2.0, 3.0).unwrap();
        let mut ratios = Vec::new();
        for (j, k) in [(0u32, 0u64), (0, 1), (1, 2), (1, 3)] {
            let rho = 16.0 * 2f64.powi(j as i32);
            let y: Vec<f64> = crate::sampling::sphere_direction(4, 60 + k)
                .iter()
                .map(|d| d * rho)
                .collect();
            let norm = ce.rescaled_phi(&y).unwrap().norm();
            let dist = ce.distance_to_added_point(&y);
            ratios.push(norm / dist);
        }
        let mean: f64 = ratios.iter().sum::<f64>() / ratios.len() as f64;
        for r in &ratios {
            assert!((r - mean).abs() / mean < 0.05, "ratio {r} vs mean {mean}");
        }
    }

    #[test]
    fn transfer_keeps_frames_special_orthogonal() {
        let ce = CompactifiedEh::new(1.0, 2.0, 3.0).unwrap();
        for k in 0..5u64 {
            let y: Vec<f64> = crate::sampling::sphere_direction(4, 5 + k)
                .iter()
                .map(|d| d * 9.0)
                .collect();
            let o = ce.frame_change_rotation(&y).unwrap();
            let dev = (o.transpose() * &o - DMatrix::<f64>::identity(4, 4)).abs().max();
            assert!(dev < 1e-9, "O not orthogonal: {dev}");
            assert!((o.determinant() - 1.0).abs() < 1e-9, "det {}", o.determinant());
            // The extracted pair reproduces O.
            let (l, r) = ce.transfer_pair(&y).unwrap();
            let m = crate::groups::pair_rotation_matrix(&l, &r);
            let mut dev: f64 = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    dev = dev.max((m[(i, j)] - o[(i, j)]).abs());
                }
            }
            assert!(dev < 1e-8, "pair does not cover O: {dev}");
        }
    }

    #[test]
    fn w_section_is_parallel_for_the_compactified_connection() {
        // The transferred (phi, D phi) section is parallel for the doubled
        // connection of the compactified chart; transporting it between two
        // radii reproduces the section values.
        let ce = CompactifiedEh::new(1.0, 2.0, 3.0).unwrap();
        let h = 2e-3;
        let dir = crate::sampling::sphere_direction(4, 2);
        let r_out = 0.12;
        let r_in = 0.06;
        let start: Vec<f64> = dir.iter().map(|d| d * r_out).collect();
        let end: Vec<f64> = dir.iter().map(|d| d * r_in).collect();
        let s0 = ce.w_state(&start, h).unwrap();
        let dir_c = dir.clone();
        let curve = move |t: f64| -> (Vec<f64>, Vec<f64>) {
            let r = r_out + (r_in - r_out) * t;
            (
                dir_c.iter().map(|d| d * r).collect(),
                dir_c.iter().map(|d| d * (r_in - r_out)).collect(),
            )
        };
        let transported =
            super::super::connection::transport_state(&ce.w_conn, &curve, &s0, ce.options())
                .unwrap()
                .state;
        let expect = ce.w_state(&end, h).unwrap();
        let rel = (&transported - &expect).norm() / expect.norm();
        assert!(rel < 1e-4, "relative section transport mismatch {rel}");
    }

    #[test]
    fn deck_equivariance_under_one_lift() {
        let sp = EhParallelSpinors::compute(1.0, 2.0, &opts()).unwrap();
        let coeffs = [Complex::new(1.0, 0.0), Complex::new(0.2, -0.4)];
        for k in 0..3u64 {
            let q: Vec<f64> = crate::sampling::sphere_direction(4, 11 + k)
                .iter()
                .map(|d| d * 2.3)
                .collect();
            let (r_right, r_left) = sp.deck_equivariance_residuals(&coeffs, &q).unwrap();
            let best = r_right.min(r_left);
            let worst = r_right.max(r_left);
            assert!(best < 1e-6, "equivariance residual {best}");
            assert!(worst > 0.1, "the other lift must act nontrivially");
        }
    }
}
