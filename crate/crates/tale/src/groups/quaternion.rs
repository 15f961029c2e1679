//! Unit quaternions and the pair presentation of four-dimensional rotations.
//!
//! A pair `(l, r)` of unit quaternions acts on `R^4 = H` by `x -> l * x * conj(r)`.
//! This is the double cover of `SO(4)`; the kernel is `{(1,1), (-1,-1)}`.

use crate::error::{Result, TaleError};
use nalgebra::{DMatrix, Matrix2, Matrix3, Matrix4};
use num_complex::Complex;

const UNIT_TOL: f64 = 1e-12;

/// Unit quaternion `w + x i + y j + z k`, renormalized after every product.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitQuaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl UnitQuaternion {
    pub const ONE: UnitQuaternion = UnitQuaternion { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };
    pub const I: UnitQuaternion = UnitQuaternion { w: 0.0, x: 1.0, y: 0.0, z: 0.0 };
    pub const J: UnitQuaternion = UnitQuaternion { w: 0.0, x: 0.0, y: 1.0, z: 0.0 };
    pub const K: UnitQuaternion = UnitQuaternion { w: 0.0, x: 0.0, y: 0.0, z: 1.0 };

    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if !(n.is_finite() && (n - 1.0).abs() < 1e-6) {
            return Err(TaleError::InvalidGroup(format!(
                "quaternion norm {n} is not 1"
            )));
        }
        Ok(UnitQuaternion { w: w / n, x: x / n, y: y / n, z: z / n })
    }

    /// `cos(theta) + sin(theta) * axis` for a unit imaginary `axis`.
    pub fn from_axis_angle(axis: [f64; 3], theta: f64) -> Self {
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        let (s, c) = (theta.sin(), theta.cos());
        UnitQuaternion {
            w: c,
            x: s * axis[0] / n,
            y: s * axis[1] / n,
            z: s * axis[2] / n,
        }
    }

    pub fn conj(&self) -> Self {
        UnitQuaternion { w: self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    pub fn neg(&self) -> Self {
        UnitQuaternion { w: -self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    pub fn mul(&self, o: &UnitQuaternion) -> Self {
        let w = self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z;
        let x = self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y;
        let y = self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x;
        let z = self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w;
        let n = (w * w + x * x + y * y + z * z).sqrt();
        UnitQuaternion { w: w / n, x: x / n, y: y / n, z: z / n }
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Rotation angle `theta` in `[0, pi]` with `q = cos(theta) + sin(theta) n`.
    pub fn angle(&self) -> f64 {
        let im = (self.x * self.x + self.y * self.y + self.z * self.z).sqrt();
        im.atan2(self.w)
    }

    /// Imaginary unit direction; falls back to `i` when `q = +-1`.
    pub fn axis(&self) -> [f64; 3] {
        let im = (self.x * self.x + self.y * self.y + self.z * self.z).sqrt();
        if im < 1e-14 {
            [1.0, 0.0, 0.0]
        } else {
            [self.x / im, self.y / im, self.z / im]
        }
    }

    /// Principal square root; `sqrt(-1) = i` by convention.
    pub fn sqrt(&self) -> Self {
        let theta = self.angle();
        let ax = self.axis();
        Self::from_axis_angle(ax, theta / 2.0)
    }

    pub fn approx_eq(&self, o: &UnitQuaternion, tol: f64) -> bool {
        (self.w - o.w).abs() <= tol
            && (self.x - o.x).abs() <= tol
            && (self.y - o.y).abs() <= tol
            && (self.z - o.z).abs() <= tol
    }

    pub fn dot(&self, o: &UnitQuaternion) -> f64 {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn is_unit(&self) -> bool {
        (self.norm() - 1.0).abs() < UNIT_TOL
    }

    /// Matrix of left multiplication `x -> q * x` in the basis `(1, i, j, k)`.
    pub fn left_matrix(&self) -> Matrix4<f64> {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        Matrix4::new(
            w, -x, -y, -z, //
            x, w, -z, y, //
            y, z, w, -x, //
            z, -y, x, w,
        )
    }

    /// Matrix of right multiplication `x -> x * q` in the basis `(1, i, j, k)`.
    pub fn right_matrix(&self) -> Matrix4<f64> {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        Matrix4::new(
            w, -x, -y, -z, //
            x, w, z, -y, //
            y, -z, w, x, //
            z, y, -x, w,
        )
    }

    /// The `SU(2)` matrix of left multiplication on `H = C^2` (`x = z1 + j z2`).
    pub fn su2(&self) -> Matrix2<Complex<f64>> {
        let a = Complex::new(self.w, self.x);
        let b = Complex::new(self.y, -self.z);
        Matrix2::new(a, -b.conj(), b, a.conj())
    }
}

/// Rotation `x -> l * x * conj(r)` as a real `4x4` matrix.
pub fn pair_rotation_matrix(l: &UnitQuaternion, r: &UnitQuaternion) -> Matrix4<f64> {
    l.left_matrix() * r.conj().right_matrix()
}

/// Apply `x -> l * x * conj(r)` to a quaternion given as `[w, x, y, z]`.
pub fn pair_apply(l: &UnitQuaternion, r: &UnitQuaternion, v: [f64; 4]) -> [f64; 4] {
    let q = UnitQuaternion { w: v[0], x: v[1], y: v[2], z: v[3] };
    // Not renormalized: v need not be a unit quaternion.
    let m = pair_rotation_matrix(l, r);
    let out = m * nalgebra::Vector4::new(v[0], v[1], v[2], v[3]);
    let _ = q;
    [out[0], out[1], out[2], out[3]]
}

/// Extract a unit quaternion from a proper rotation of `R^3`.
///
/// Returns the representative with non-negative scalar part.
pub fn quaternion_from_rotation3(m: &Matrix3<f64>) -> Result<UnitQuaternion> {
    let t = m.trace();
    let (w, x, y, z);
    if t > 0.0 {
        let s = (t + 1.0).sqrt() * 2.0;
        w = 0.25 * s;
        x = (m[(2, 1)] - m[(1, 2)]) / s;
        y = (m[(0, 2)] - m[(2, 0)]) / s;
        z = (m[(1, 0)] - m[(0, 1)]) / s;
    } else if m[(0, 0)] > m[(1, 1)] && m[(0, 0)] > m[(2, 2)] {
        let s = (1.0 + m[(0, 0)] - m[(1, 1)] - m[(2, 2)]).sqrt() * 2.0;
        w = (m[(2, 1)] - m[(1, 2)]) / s;
        x = 0.25 * s;
        y = (m[(0, 1)] + m[(1, 0)]) / s;
        z = (m[(0, 2)] + m[(2, 0)]) / s;
    } else if m[(1, 1)] > m[(2, 2)] {
        let s = (1.0 + m[(1, 1)] - m[(0, 0)] - m[(2, 2)]).sqrt() * 2.0;
        w = (m[(0, 2)] - m[(2, 0)]) / s;
        x = (m[(0, 1)] + m[(1, 0)]) / s;
        y = 0.25 * s;
        z = (m[(1, 2)] + m[(2, 1)]) / s;
    } else {
        let s = (1.0 + m[(2, 2)] - m[(0, 0)] - m[(1, 1)]).sqrt() * 2.0;
        w = (m[(1, 0)] - m[(0, 1)]) / s;
        x = (m[(0, 2)] + m[(2, 0)]) / s;
        y = (m[(1, 2)] + m[(2, 1)]) / s;
        z = 0.25 * s;
    }
    let q = UnitQuaternion::new(w, x, y, z)?;
    Ok(if q.w < 0.0 { q.neg() } else { q })
}

/// Factor `m in SO(4)` as `x -> l * x * conj(r)`.
///
/// The pair is determined up to the simultaneous sign `(-l, -r)`; the
/// representative with `l.w >= 0` (tie-broken on the largest component) is
/// returned. Fails if `m` is not special orthogonal.
pub fn so4_to_pair(m: &Matrix4<f64>) -> Result<(UnitQuaternion, UnitQuaternion)> {
    let mt = m.transpose() * m;
    if (mt - Matrix4::identity()).abs().max() > 1e-8 || (m.determinant() - 1.0).abs() > 1e-8 {
        return Err(TaleError::InvalidGroup(
            "matrix is not special orthogonal".into(),
        ));
    }
    // m(e_b) as quaternions; m(1) = l * conj(r), and m(e_i) * m(1)^{-1} = l e_i l^{-1}.
    let col = |b: usize| UnitQuaternion {
        w: m[(0, b)],
        x: m[(1, b)],
        y: m[(2, b)],
        z: m[(3, b)],
    };
    let m0 = col(0);
    let mut conj3 = Matrix3::zeros();
    for i in 0..3 {
        let c = col(i + 1).mul(&m0.conj());
        conj3[(0, i)] = c.x;
        conj3[(1, i)] = c.y;
        conj3[(2, i)] = c.z;
    }
    let l = quaternion_from_rotation3(&conj3)?;
    // conj(r) = l^{-1} m(1)  =>  r = conj(l.conj() * m0)
    let r = l.conj().mul(&m0).conj();
    let check = pair_rotation_matrix(&l, &r);
    if (check - m).abs().max() > 1e-8 {
        return Err(TaleError::Numerical(
            "quaternion pair extraction failed to reproduce the rotation".into(),
        ));
    }
    Ok((l, r))
}

/// As [`so4_to_pair`] but for a dynamically sized matrix.
pub fn so4_to_pair_dyn(m: &DMatrix<f64>) -> Result<(UnitQuaternion, UnitQuaternion)> {
    if m.nrows() != 4 || m.ncols() != 4 {
        return Err(TaleError::UnsupportedDimension(m.nrows(), "expected 4x4"));
    }
    so4_to_pair(&Matrix4::from_fn(|i, j| m[(i, j)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn product_table_of_units() {
        let i = UnitQuaternion::I;
        let j = UnitQuaternion::J;
        let k = UnitQuaternion::K;
        assert!(i.mul(&j).approx_eq(&k, 1e-15));
        assert!(j.mul(&k).approx_eq(&i, 1e-15));
        assert!(k.mul(&i).approx_eq(&j, 1e-15));
        assert!(i.mul(&i).approx_eq(&UnitQuaternion::ONE.neg(), 1e-15));
    }

    #[test]
    fn conjugate_is_inverse() {
        let q = UnitQuaternion::from_axis_angle([0.3, -1.2, 0.5], 0.77);
        assert!(q.mul(&q.conj()).approx_eq(&UnitQuaternion::ONE, 1e-14));
        assert!(q.is_unit());
    }

    #[test]
    fn left_right_matrices_realize_multiplication() {
        let p = UnitQuaternion::from_axis_angle([1.0, 2.0, -0.5], 1.1);
        let q = UnitQuaternion::from_axis_angle([-0.2, 0.9, 0.4], -0.6);
        let pq = p.mul(&q);
        let via_left = p.left_matrix() * nalgebra::Vector4::new(q.w, q.x, q.y, q.z);
        let via_right = q.right_matrix() * nalgebra::Vector4::new(p.w, p.x, p.y, p.z);
        for (a, b) in [
            (via_left[0], pq.w),
            (via_left[1], pq.x),
            (via_left[2], pq.y),
            (via_left[3], pq.z),
        ] {
            assert_relative_eq!(a, b, epsilon = 1e-14);
        }
        for (a, b) in [
            (via_right[0], pq.w),
            (via_right[1], pq.x),
            (via_right[2], pq.y),
            (via_right[3], pq.z),
        ] {
            assert_relative_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn su2_is_a_homomorphism() {
        let p = UnitQuaternion::from_axis_angle([0.1, 0.7, -0.7], 0.9);
        let q = UnitQuaternion::from_axis_angle([1.0, -0.3, 0.2], 2.2);
        let lhs = p.mul(&q).su2();
        let rhs = p.su2() * q.su2();
        assert!((lhs - rhs).map(|c| c.norm()).max() < 1e-14);
    }

    #[test]
    fn pair_rotation_is_orthogonal_and_recovers_pair() {
        let l = UnitQuaternion::from_axis_angle([0.2, 0.3, 0.9], 0.8);
        let r = UnitQuaternion::from_axis_angle([-0.5, 0.1, 0.6], 1.9);
        let m = pair_rotation_matrix(&l, &r);
        assert_relative_eq!(m.determinant(), 1.0, epsilon = 1e-12);
        assert!((m.transpose() * m - Matrix4::identity()).abs().max() < 1e-12);

        let (l2, r2) = so4_to_pair(&m).unwrap();
        let same = l2.approx_eq(&l, 1e-10) && r2.approx_eq(&r, 1e-10);
        let flipped = l2.approx_eq(&l.neg(), 1e-10) && r2.approx_eq(&r.neg(), 1e-10);
        assert!(same || flipped);
    }

    #[test]
    fn sqrt_halves_the_angle() {
        let q = UnitQuaternion::from_axis_angle([0.0, 1.0, 0.0], 2.4);
        let s = q.sqrt();
        assert!(s.mul(&s).approx_eq(&q, 1e-13));
        let minus_one = UnitQuaternion::ONE.neg();
        let s = minus_one.sqrt();
        assert!(s.approx_eq(&UnitQuaternion::I, 1e-14));
    }
}
