//! Twistor spinor fields: the flat closed-form family, residuals of the
//! defining equation and of the Dirac-derivative identity, zero search, and
//! conformal transport.
//!
//! A spinor field is a function from chart points to spinor components in the
//! chart's orthonormal frame at that point. The twistor equation reads
//! `nabla_X phi + (1/n) X . D phi = 0` with `D phi = sum_i e_i . nabla_i phi`.

use super::clifford::{CliffordRep, CVec};
use super::connection::TwistorConnection;
use crate::error::{Result, TaleError};
use nalgebra::DVector;
use num_complex::Complex;

/// A spinor value anchored to the orthonormal frame at a chart point.
#[derive(Clone, Debug)]
pub struct SpinorValue {
    pub components: CVec,
    pub frame_point: Vec<f64>,
}

impl SpinorValue {
    pub fn new(components: CVec, frame_point: Vec<f64>) -> Self {
        SpinorValue { components, frame_point }
    }

    pub fn norm(&self) -> f64 {
        self.components.norm()
    }
}

/// A section value of the doubled bundle: `phi` and the `D phi` slot.
#[derive(Clone, Debug)]
pub struct TwistorState {
    pub phi: SpinorValue,
    pub psi: SpinorValue,
}

impl TwistorState {
    pub fn new(phi: SpinorValue, psi: SpinorValue) -> Result<Self> {
        if phi.frame_point != psi.frame_point {
            return Err(TaleError::Numerical(
                "twistor state components anchored at different points".into(),
            ));
        }
        Ok(TwistorState { phi, psi })
    }

    /// Stack into the `(phi, psi)` transport vector.
    pub fn stacked(&self) -> CVec {
        let k = self.phi.components.len();
        let mut out = CVec::zeros(2 * k);
        for i in 0..k {
            out[i] = self.phi.components[i];
            out[k + i] = self.psi.components[i];
        }
        out
    }

    pub fn from_stacked(state: &CVec, frame_point: Vec<f64>) -> Self {
        let k = state.len() / 2;
        TwistorState {
            phi: SpinorValue::new(state.rows(0, k).into_owned(), frame_point.clone()),
            psi: SpinorValue::new(state.rows(k, k).into_owned(), frame_point),
        }
    }
}

/// A spinor field as a callable: chart point to frame components.
pub type SpinorField<'a> = &'a dyn Fn(&[f64]) -> Result<CVec>;

/// The closed-form twistor family on flat space:
/// `phi(x) = phi0 - (1/n) x . psi0`.
///
/// Rejects the identically zero choice.
pub fn flat_twistor_field(
    rep: &CliffordRep,
    phi0: &CVec,
    psi0: &CVec,
) -> Result<impl Fn(&[f64]) -> Result<CVec>> {
    if phi0.norm() == 0.0 && psi0.norm() == 0.0 {
        return Err(TaleError::InvalidGroup(
            "identically zero twistor field rejected".into(),
        ));
    }
    let rep = rep.clone();
    let phi0 = phi0.clone();
    let psi0 = psi0.clone();
    let n = rep.n as f64;
    Ok(move |x: &[f64]| -> Result<CVec> {
        let g = rep.gamma(x);
        Ok(&phi0 - &g * &psi0 * Complex::new(1.0 / n, 0.0))
    })
}

/// Covariant derivative of a spinor field along a coordinate direction, by
/// central differences of the components plus the connection term.
fn covariant_coordinate_derivatives(
    conn: &TwistorConnection,
    field: SpinorField,
    p: &[f64],
    h: f64,
) -> Result<Vec<CVec>> {
    let n = conn.chart().dim();
    let data = conn.frames().at(p)?;
    let mut out = Vec::with_capacity(n);
    for a in 0..n {
        let mut pp = p.to_vec();
        let mut pm = p.to_vec();
        pp[a] += h;
        pm[a] -= h;
        let fp = field(&pp)?;
        let fm = field(&pm)?;
        let dphi = (&fp - &fm) / Complex::new(2.0 * h, 0.0);
        let mut dir = vec![0.0; n];
        dir[a] = 1.0;
        let w = conn.spin_matrix_from(&data, &dir);
        out.push(&dphi + &w * field(p)?);
    }
    Ok(out)
}

/// `D phi = sum_i e_i . nabla_{e_i} phi` at a point.
pub fn dirac_at(
    conn: &TwistorConnection,
    field: SpinorField,
    p: &[f64],
    h: f64,
) -> Result<CVec> {
    let n = conn.chart().dim();
    let data = conn.frames().at(p)?;
    let cov = covariant_coordinate_derivatives(conn, field, p, h)?;
    let k = conn.spinor_dim();
    let mut acc = CVec::zeros(k);
    for i in 0..n {
        // nabla_{e_i} = sum_a E^a_i nabla_a
        let mut nabla_ei = CVec::zeros(k);
        for a in 0..n {
            nabla_ei += &cov[a] * Complex::new(data.frame[(a, i)], 0.0);
        }
        acc += &conn.clifford.gammas[i] * nabla_ei;
    }
    Ok(acc)
}

/// Left side of the twistor equation, `nabla_X phi + (1/n) X . D phi`.
pub fn twistor_residual(
    conn: &TwistorConnection,
    field: SpinorField,
    p: &[f64],
    x: &[f64],
    h: f64,
) -> Result<CVec> {
    let n = conn.chart().dim();
    let data = conn.frames().at(p)?;
    let cov = covariant_coordinate_derivatives(conn, field, p, h)?;
    let k = conn.spinor_dim();
    let mut nabla_x = CVec::zeros(k);
    for a in 0..n {
        nabla_x += &cov[a] * Complex::new(x[a], 0.0);
    }
    let dphi = dirac_at(conn, field, p, h)?;
    let xf = data.to_frame(x);
    let gx = conn.clifford.gamma(&xf);
    Ok(nabla_x + gx * dphi * Complex::new(1.0 / n as f64, 0.0))
}

/// Residual of the Dirac-derivative identity
/// `nabla_X D phi - (n/2) L(X) . phi`.
pub fn dirac_derivative_residual(
    conn: &TwistorConnection,
    field: SpinorField,
    p: &[f64],
    x: &[f64],
    h: f64,
) -> Result<CVec> {
    let n = conn.chart().dim();
    let data = conn.frames().at(p)?;
    let l = conn.schouten_frame(p)?;

    // nabla_X (D phi) with D phi evaluated as a field.
    let dfield = |q: &[f64]| -> Result<CVec> { dirac_at(conn, field, q, h) };
    let k = conn.spinor_dim();
    let mut nabla_x_d = CVec::zeros(k);
    let here = dfield(p)?;
    for a in 0..n {
        if x[a] == 0.0 {
            continue;
        }
        let mut pp = p.to_vec();
        let mut pm = p.to_vec();
        pp[a] += h;
        pm[a] -= h;
        let fp = dfield(&pp)?;
        let fm = dfield(&pm)?;
        let da = (&fp - &fm) / Complex::new(2.0 * h, 0.0);
        let mut dir = vec![0.0; n];
        dir[a] = 1.0;
        let w = conn.spin_matrix_from(&data, &dir);
        nabla_x_d += (&da + &w * &here) * Complex::new(x[a], 0.0);
    }

    let xf = data.to_frame(x);
    let lx: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| l[(i, j)] * xf[j]).sum())
        .collect();
    let glx = conn.clifford.gamma(&lx);
    let phi = field(p)?;
    Ok(nabla_x_d - glx * phi * Complex::new(n as f64 / 2.0, 0.0))
}

/// A located zero of a spinor field.
#[derive(Clone, Debug)]
pub struct FieldZero {
    pub position: Vec<f64>,
    /// `|D phi|` there; nonzero certifies the zero is isolated.
    pub dirac_norm: f64,
}

/// All zeros of a spinor field inside a coordinate box, by Gauss-Newton
/// descent on the squared field norm from a grid of seeds.
///
/// Each zero is certified isolated by a nonzero Dirac value. The identically
/// zero field is rejected.
pub fn twistor_zero_locus(
    conn: &TwistorConnection,
    field: SpinorField,
    box_min: f64,
    box_max: f64,
    grid_per_axis: usize,
    dedup_radius: f64,
) -> Result<Vec<FieldZero>> {
    let n = conn.chart().dim();

    // Reject the identically zero field by probing a few points.
    let mut max_norm: f64 = 0.0;
    for k in 0..8u64 {
        let p: Vec<f64> = crate::sampling::sphere_direction(n, k)
            .iter()
            .map(|d| d * (0.3 + 0.1 * k as f64) * box_max.abs().max(1.0))
            .collect();
        max_norm = max_norm.max(field(&p)?.norm());
    }
    if max_norm < 1e-14 {
        return Err(TaleError::InvalidGroup(
            "identically zero field has no isolated zeros".into(),
        ));
    }

    let eval_real = |p: &[f64]| -> Result<DVector<f64>> {
        let v = field(p)?;
        let mut out = DVector::zeros(2 * v.len());
        for i in 0..v.len() {
            out[2 * i] = v[i].re;
            out[2 * i + 1] = v[i].im;
        }
        Ok(out)
    };

    let gauss_newton = |seed: &[f64]| -> Result<Option<Vec<f64>>> {
        let mut x = seed.to_vec();
        let fd_h = 1e-6 * (box_max - box_min).abs().max(1.0);
        for _ in 0..40 {
            let f0 = eval_real(&x)?;
            if f0.norm() < 1e-10 * max_norm {
                return Ok(Some(x));
            }
            let m = f0.len();
            let mut jac = nalgebra::DMatrix::<f64>::zeros(m, n);
            for a in 0..n {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[a] += fd_h;
                xm[a] -= fd_h;
                let fp = eval_real(&xp)?;
                let fm = eval_real(&xm)?;
                for r in 0..m {
                    jac[(r, a)] = (fp[r] - fm[r]) / (2.0 * fd_h);
                }
            }
            let jtj = jac.transpose() * &jac;
            let jtf = jac.transpose() * &f0;
            let Some(step) = jtj.lu().solve(&jtf) else {
                return Ok(None);
            };
            let step_norm = step.norm();
            for a in 0..n {
                x[a] -= step[a];
            }
            if step_norm < 1e-13 {
                let f = eval_real(&x)?;
                return Ok(if f.norm() < 1e-9 * max_norm { Some(x) } else { None });
            }
        }
        Ok(None)
    };

    let mut zeros: Vec<FieldZero> = Vec::new();
    let steps = grid_per_axis.max(2);
    let mut seed_index = vec![0usize; n];
    loop {
        let seed: Vec<f64> = seed_index
            .iter()
            .map(|&i| box_min + (box_max - box_min) * (i as f64 + 0.5) / steps as f64)
            .collect();
        if let Some(z) = gauss_newton(&seed)? {
            let inside = z.iter().all(|c| *c >= box_min - 1e-9 && *c <= box_max + 1e-9);
            let duplicate = zeros.iter().any(|known| {
                known
                    .position
                    .iter()
                    .zip(&z)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
                    < dedup_radius
            });
            if inside && !duplicate {
                let dnorm = dirac_at(conn, field, &z, 1e-5)?.norm();
                if dnorm < 1e-8 * max_norm {
                    return Err(TaleError::CertificateFailed(format!(
                        "zero at {z:?} is not isolated: D phi vanishes there"
                    )));
                }
                zeros.push(FieldZero {
                    position: z,
                    dirac_norm: dnorm,
                });
            }
        }
        // Advance the grid counter.
        let mut carry = 0;
        while carry < n {
            seed_index[carry] += 1;
            if seed_index[carry] < steps {
                break;
            }
            seed_index[carry] = 0;
            carry += 1;
        }
        if carry == n {
            break;
        }
    }
    Ok(zeros)
}

/// Fit the growth exponent of `|phi|` against the distance from a zero over
/// dyadic radii.
pub fn zero_growth_exponent(
    field: SpinorField,
    zero: &[f64],
    base_radius: f64,
    levels: usize,
) -> Result<f64> {
    let n = zero.len();
    let mut logs = Vec::new();
    for j in 0..levels {
        let r = base_radius * 2f64.powi(-(j as i32));
        let mut mean = 0.0;
        let dirs = 16;
        for k in 0..dirs {
            let p: Vec<f64> = crate::sampling::sphere_direction(n, k as u64)
                .iter()
                .zip(zero)
                .map(|(d, z)| z + d * r)
                .collect();
            mean += field(&p)?.norm();
        }
        mean /= dirs as f64;
        logs.push((r.ln(), mean.ln()));
    }
    let m = logs.len() as f64;
    let sx: f64 = logs.iter().map(|p| p.0).sum();
    let sy: f64 = logs.iter().map(|p| p.1).sum();
    let sxx: f64 = logs.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = logs.iter().map(|p| p.0 * p.1).sum();
    Ok((m * sxy - sx * sy) / (m * sxx - sx * sx))
}

/// Conformal transport of a spinor field: for the rescaled metric
/// `gbar = u^2 g` (frames `ebar_i = u^{-1} e_i`), the components transform
/// with the weight `u^{1/2}`.
pub fn conformally_transported_field<'a>(
    field: SpinorField<'a>,
    factor: &'a dyn Fn(&[f64]) -> f64,
) -> impl Fn(&[f64]) -> Result<CVec> + 'a {
    move |p: &[f64]| -> Result<CVec> {
        let u = factor(p);
        if u <= 0.0 {
            return Err(TaleError::DegenerateConformalFactor(format!(
                "factor {u} at {p:?}"
            )));
        }
        Ok(field(p)? * Complex::new(u.sqrt(), 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{conformal_rescale, flat_metric, round_sphere_chart, ScalarFactor};
    use approx::assert_relative_eq;

    fn sample_states() -> (CVec, CVec) {
        let mut phi0 = CVec::zeros(4);
        phi0[0] = Complex::new(0.8, -0.1);
        phi0[3] = Complex::new(0.2, 0.5);
        let mut psi0 = CVec::zeros(4);
        psi0[1] = Complex::new(-0.4, 0.9);
        psi0[2] = Complex::new(1.1, 0.0);
        (phi0, psi0)
    }

    #[test]
    fn flat_family_satisfies_the_twistor_equation() {
        let conn = TwistorConnection::new(flat_metric(4)).unwrap();
        let (phi0, psi0) = sample_states();
        let field = flat_twistor_field(&conn.clifford, &phi0, &psi0).unwrap();
        for k in 0..20u64 {
            let p: Vec<f64> = crate::sampling::sphere_direction(4, k)
                .iter()
                .map(|d| d * (0.5 + 0.1 * k as f64))
                .collect();
            let x = crate::sampling::sphere_direction(4, k + 100);
            let r = twistor_residual(&conn, &field, &p, &x, 1e-4).unwrap();
            assert!(r.norm() < 1e-9, "residual {} at {p:?}", r.norm());
        }
    }

    #[test]
    fn residual_is_linear_in_x() {
        let conn = TwistorConnection::new(round_sphere_chart(4, 1.0).unwrap()).unwrap();
        let (phi0, psi0) = sample_states();
        let field = flat_twistor_field(&conn.clifford, &phi0, &psi0).unwrap();
        let p = [0.2, 0.1, -0.3, 0.4];
        let zero = twistor_residual(&conn, &field, &p, &[0.0; 4], 1e-4).unwrap();
        assert!(zero.norm() < 1e-12);
    }

    #[test]
    fn constant_field_on_sphere_is_not_twistor() {
        let conn = TwistorConnection::new(round_sphere_chart(4, 1.0).unwrap()).unwrap();
        let (phi0, _) = sample_states();
        let field = move |_p: &[f64]| -> Result<CVec> { Ok(phi0.clone()) };
        let r = twistor_residual(&conn, &field, &[0.3, 0.0, 0.1, -0.2], &[1.0, 0.0, 0.0, 0.0], 1e-4)
            .unwrap();
        assert!(r.norm() > 0.05, "negative control residual {}", r.norm());
    }

    #[test]
    fn dirac_derivative_identity_flat_and_sphere() {
        // Flat: both sides vanish.
        let conn = TwistorConnection::new(flat_metric(4)).unwrap();
        let (phi0, psi0) = sample_states();
        let field = flat_twistor_field(&conn.clifford, &phi0, &psi0).unwrap();
        let r = dirac_derivative_residual(&conn, &field, &[0.4, -0.2, 0.1, 0.3], &[0.3, 0.7, -0.1, 0.2], 1e-4)
            .unwrap();
        assert!(r.norm() < 1e-8, "flat dirac-derivative residual {}", r.norm());

        // Sphere: transport the flat family conformally. gbar = u^2 g with
        // u = 2 / (1 + |x|^2) turns flat into the unit sphere.
        let sphere = round_sphere_chart(4, 1.0).unwrap();
        let conn_s = TwistorConnection::new(sphere).unwrap();
        let factor = |p: &[f64]| -> f64 {
            let r2: f64 = p.iter().map(|v| v * v).sum();
            2.0 / (1.0 + r2)
        };
        let base = flat_twistor_field(&conn_s.clifford, &phi0, &psi0).unwrap();
        let transported = conformally_transported_field(&base, &factor);
        let p = [0.3, 0.1, -0.2, 0.25];
        let x = [0.5, -0.3, 0.2, 0.6];
        let tw = twistor_residual(&conn_s, &transported, &p, &x, 1e-4).unwrap();
        assert!(tw.norm() < 1e-5, "sphere twistor residual {}", tw.norm());
        let r = dirac_derivative_residual(&conn_s, &transported, &p, &x, 1e-3).unwrap();
        assert!(r.norm() < 1e-5, "sphere dirac-derivative residual {}", r.norm());
    }

    #[test]
    fn dirac_identity_fails_for_non_twistor_fields() {
        // Negative control: a constant spinor field on the sphere violates
        // the Dirac-derivative identity at order one.
        let conn = TwistorConnection::new(round_sphere_chart(4, 1.0).unwrap()).unwrap();
        let (phi0, _) = sample_states();
        let field = move |_p: &[f64]| -> Result<CVec> { Ok(phi0.clone()) };
        let r = dirac_derivative_residual(
            &conn,
            &field,
            &[0.3, 0.0, 0.1, -0.2],
            &[1.0, 0.0, 0.0, 0.0],
            1e-3,
        )
        .unwrap();
        assert!(r.norm() > 0.05, "negative control residual {}", r.norm());
    }

    #[test]
    fn constant_rescale_keeps_residual_tiny() {
        let flat = flat_metric(4);
        let rescaled = conformal_rescale(&flat, ScalarFactor::Const(0.5)).unwrap(); // 4 g
        let conn = TwistorConnection::new(rescaled).unwrap();
        let (phi0, psi0) = sample_states();
        let base = flat_twistor_field(&conn.clifford, &phi0, &psi0).unwrap();
        // gbar = 4 g means u = 2, so the transported field gains sqrt(2).
        let factor = |_: &[f64]| -> f64 { 2.0 };
        let transported = conformally_transported_field(&base, &factor);
        // The flat family for gbar has a different normalization of psi0; the
        // residual still vanishes because both metrics are flat and the field
        // is affine. Checked at several points.
        for k in 0..6u64 {
            let p: Vec<f64> = crate::sampling::sphere_direction(4, k).iter().map(|d| d * 0.8).collect();
            let x = crate::sampling::sphere_direction(4, k + 30);
            let r = twistor_residual(&conn, &transported, &p, &x, 1e-4).unwrap();
            assert!(r.norm() < 1e-9, "residual {}", r.norm());
        }
    }

    #[test]
    fn zero_of_the_flat_family_is_found_and_isolated() {
        let conn = TwistorConnection::new(flat_metric(4)).unwrap();
        let (_, psi0) = sample_states();
        // phi0 = (1/n) e_1 . psi0 puts the unique zero at x = e_1.
        let phi0 = &conn.clifford.gammas[0] * &psi0 * Complex::new(0.25, 0.0);
        let field = flat_twistor_field(&conn.clifford, &phi0, &psi0).unwrap();
        let zeros = twistor_zero_locus(&conn, &field, -2.0, 2.0, 6, 1e-6).unwrap();
        assert_eq!(zeros.len(), 1);
        let z = &zeros[0];
        assert_relative_eq!(z.position[0], 1.0, epsilon = 1e-7);
        for i in 1..4 {
            assert_relative_eq!(z.position[i], 0.0, epsilon = 1e-7);
        }
        assert!(z.dirac_norm > 0.1);

        let exponent = zero_growth_exponent(&field, &z.position, 0.5, 6).unwrap();
        assert!((exponent - 1.0).abs() < 0.05, "growth exponent {exponent}");
    }

    #[test]
    fn origin_zero_when_phi0_vanishes() {
        let conn = TwistorConnection::new(flat_metric(4)).unwrap();
        let (_, psi0) = sample_states();
        let phi0 = CVec::zeros(4);
        let field = flat_twistor_field(&conn.clifford, &phi0, &psi0).unwrap();
        let zeros = twistor_zero_locus(&conn, &field, -1.5, 1.5, 5, 1e-6).unwrap();
        assert_eq!(zeros.len(), 1);
        assert!(zeros[0].position.iter().all(|c| c.abs() < 1e-7));
    }

    #[test]
    fn parallel_spinor_has_no_zeros() {
        let conn = TwistorConnection::new(flat_metric(4)).unwrap();
        let (phi0, _) = sample_states();
        let psi0 = CVec::zeros(4);
        let field = flat_twistor_field(&conn.clifford, &phi0, &psi0).unwrap();
        let zeros = twistor_zero_locus(&conn, &field, -2.0, 2.0, 4, 1e-6).unwrap();
        assert!(zeros.is_empty());
    }

    #[test]
    fn zero_field_rejected() {
        let conn = TwistorConnection::new(flat_metric(4)).unwrap();
        assert!(flat_twistor_field(&conn.clifford, &CVec::zeros(4), &CVec::zeros(4)).is_err());
    }

    #[test]
    fn twistor_state_frames_must_match() {
        let phi = SpinorValue::new(CVec::zeros(4), vec![0.0; 4]);
        let psi = SpinorValue::new(CVec::zeros(4), vec![1.0, 0.0, 0.0, 0.0]);
        assert!(TwistorState::new(phi.clone(), psi).is_err());
        let psi = SpinorValue::new(CVec::zeros(4), vec![0.0; 4]);
        let state = TwistorState::new(phi, psi).unwrap();
        assert_eq!(state.stacked().len(), 8);
    }

    #[test]
    fn residual_norm_is_frame_gauge_invariant() {
        // Two Gram-Schmidt column orders give frames related by a constant
        // rotation on the sphere chart; transforming the field by the lifted
        // rotation must leave the residual norm unchanged.
        use crate::groups::so4_to_pair_dyn;
        use crate::spin::frame::FrameField;

        let chart = round_sphere_chart(4, 1.0).unwrap();
        let conn = TwistorConnection::new(chart.clone()).unwrap();
        let (phi0, psi0) = sample_states();
        let field = flat_twistor_field(&conn.clifford, &phi0, &psi0).unwrap();
        let p = [0.25, -0.15, 0.05, 0.3];
        let x = [0.4, 0.2, -0.6, 0.1];
        let r1 = twistor_residual(&conn, &field, &p, &x, 1e-4).unwrap().norm();

        // Even permutation of the columns: the frames differ by the constant
        // rotation O with e'_i = e_{order[i]}.
        let order = vec![1usize, 0, 3, 2];
        let frames2 = FrameField::with_column_order(chart.clone(), order.clone()).unwrap();
        let conn2 = TwistorConnection::with_frames(chart.clone(), frames2).unwrap();
        // O maps new frame components to old: (O)_{k i} = delta_{k, order[i]}.
        let o = nalgebra::DMatrix::<f64>::from_fn(4, 4, |k, i| {
            if k == order[i] {
                1.0
            } else {
                0.0
            }
        });
        // Verify the frames really differ by O.
        let e1 = conn.frames().frame_at(&p).unwrap();
        let e2 = conn2.frames().frame_at(&p).unwrap();
        assert!((&e1 * &o - &e2).abs().max() < 1e-12);

        let (l, r) = so4_to_pair_dyn(&o).unwrap();
        let s = conn.clifford.pair_spinor_matrix(&l, &r);
        let s_inv = s.clone().try_inverse().unwrap();
        let field2 = {
            let field_ref = &field;
            move |q: &[f64]| -> Result<CVec> { Ok(&s_inv * field_ref(q)?) }
        };
        let r2 = twistor_residual(&conn2, &field2, &p, &x, 1e-4).unwrap().norm();
        assert_relative_eq!(r1, r2, max_relative = 1e-8);
    }
}
