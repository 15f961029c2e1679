//! Clifford algebra representations for even dimensions up to six.
//!
//! Generators satisfy `g_i g_j + g_j g_i = -2 delta_ij` exactly: they are
//! built from tensor products of Pauli matrices, so every entry lies in
//! `{0, +-1, +-i}` and all the algebraic identities hold without rounding.
//!
//! For `n = 4` the representation is tied to the quaternion-pair model of
//! `Spin(4)`: an explicit intertwiner identifies the chirality eigenspaces
//! `Sigma+` and `Sigma-` with the two `C^2` factors on which the left and
//! right `Sp(1)` factors act by their standard `SU(2)` representations.

use crate::error::{Result, TaleError};
use crate::groups::UnitQuaternion;
use nalgebra::{DMatrix, DVector, Matrix4};
use num_complex::Complex;

pub type CMat = DMatrix<Complex<f64>>;
pub type CVec = DVector<Complex<f64>>;

fn c(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

fn pauli(k: usize) -> CMat {
    match k {
        0 => CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]),
        1 => CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]),
        2 => CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]),
        _ => CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]),
    }
}

fn kron_chain(mats: &[CMat]) -> CMat {
    let mut acc = mats[0].clone();
    for m in &mats[1..] {
        acc = acc.kronecker(m);
    }
    acc
}

/// Gamma matrices, chirality operator and half-spinor projectors, plus the
/// `Spin(4)` machinery when `n = 4`.
#[derive(Clone, Debug)]
pub struct CliffordRep {
    pub n: usize,
    pub gammas: Vec<CMat>,
    pub chirality: CMat,
    pub proj_plus: CMat,
    pub proj_minus: CMat,
    /// Column map `C^2 (+) C^2 -> Sigma` aligning the quaternion model with
    /// the matrix representation; `n = 4` only.
    intertwiner: Option<CMat>,
    intertwiner_inv: Option<CMat>,
}

/// Spinor space dimension `2^{n/2}`.
pub fn spinor_dim(n: usize) -> usize {
    1 << (n / 2)
}

/// Matrix exponential by scaling and squaring with a Taylor core.
pub fn expm(a: &CMat) -> CMat {
    let norm = a.iter().map(|x| x.norm()).fold(0.0, f64::max) * a.nrows() as f64;
    let s = norm.log2().ceil().max(0.0) as u32 + 1;
    let scaled = a / c(2f64.powi(s as i32), 0.0);
    let dim = a.nrows();
    let mut term = CMat::identity(dim, dim);
    let mut acc = CMat::identity(dim, dim);
    for k in 1..=16 {
        term = &term * &scaled / c(k as f64, 0.0);
        acc += &term;
    }
    for _ in 0..s {
        acc = &acc * &acc;
    }
    acc
}

impl CliffordRep {
    pub fn build(n: usize) -> Result<Self> {
        if n % 2 != 0 || n < 2 || n > 6 {
            return Err(TaleError::UnsupportedDimension(
                n,
                "Clifford representations are built for even n <= 6",
            ));
        }
        let m = n / 2;
        let mut gammas = Vec::with_capacity(n);
        for k in 1..=m {
            for half in 0..2 {
                let mut parts: Vec<CMat> = Vec::with_capacity(m);
                for slot in 1..=m {
                    if slot < k {
                        parts.push(pauli(3));
                    } else if slot == k {
                        let p = pauli(if half == 0 { 1 } else { 2 });
                        parts.push(p * c(0.0, 1.0));
                    } else {
                        parts.push(pauli(0));
                    }
                }
                gammas.push(kron_chain(&parts));
            }
        }

        // Volume element; an extra factor of i where its square is -1.
        let mut vol = gammas[0].clone();
        for g in &gammas[1..] {
            vol = vol * g;
        }
        let needs_i = (n * (n + 1) / 2) % 2 == 1;
        let mut chirality = if needs_i { vol * c(0.0, 1.0) } else { vol };

        let mut rep = CliffordRep {
            n,
            gammas,
            chirality: chirality.clone(),
            proj_plus: CMat::zeros(spinor_dim(n), spinor_dim(n)),
            proj_minus: CMat::zeros(spinor_dim(n), spinor_dim(n)),
            intertwiner: None,
            intertwiner_inv: None,
        };

        if n == 4 {
            // Orient the chirality operator so that the left quaternion factor
            // acts on the +1 eigenspace.
            let sl_i = rep.left_factor_matrix(&UnitQuaternion::I);
            let plus: Vec<usize> = (0..4).filter(|&k| chirality[(k, k)].re > 0.0).collect();
            let acts_trivially = plus
                .iter()
                .all(|&k| (sl_i[(k, k)] - c(1.0, 0.0)).norm() < 1e-9);
            if acts_trivially {
                chirality = -chirality;
            }
            rep.chirality = chirality.clone();
        }

        let dim = spinor_dim(n);
        let id = CMat::identity(dim, dim);
        rep.proj_plus = (&id + &rep.chirality) * c(0.5, 0.0);
        rep.proj_minus = (&id - &rep.chirality) * c(0.5, 0.0);

        if n == 4 {
            rep.build_intertwiner()?;
        }
        Ok(rep)
    }

    pub fn spinor_dim(&self) -> usize {
        spinor_dim(self.n)
    }

    /// Clifford multiplication by the vector with frame components `v`.
    pub fn gamma(&self, v: &[f64]) -> CMat {
        let dim = self.spinor_dim();
        let mut acc = CMat::zeros(dim, dim);
        for (i, vi) in v.iter().enumerate() {
            acc += &self.gammas[i] * c(*vi, 0.0);
        }
        acc
    }

    /// Largest deviation from `g_i g_j + g_j g_i = -2 delta_ij`; exactly zero.
    pub fn anticommutation_residual(&self) -> f64 {
        let dim = self.spinor_dim();
        let id = CMat::identity(dim, dim);
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                let anti = &self.gammas[i] * &self.gammas[j] + &self.gammas[j] * &self.gammas[i];
                let target = if i == j { &id * c(-2.0, 0.0) } else { CMat::zeros(dim, dim) };
                worst = worst.max((anti - target).iter().map(|x| x.norm()).fold(0.0, f64::max));
            }
        }
        worst
    }

    /// Largest deviation from `w^2 = 1` and `w g_i + g_i w = 0`; exactly zero.
    pub fn chirality_residual(&self) -> f64 {
        let dim = self.spinor_dim();
        let id = CMat::identity(dim, dim);
        let mut worst = (&self.chirality * &self.chirality - id)
            .iter()
            .map(|x| x.norm())
            .fold(0.0, f64::max);
        for g in &self.gammas {
            let anti = &self.chirality * g + g * &self.chirality;
            worst = worst.max(anti.iter().map(|x| x.norm()).fold(0.0, f64::max));
        }
        worst
    }

    /// Lift of a rotation generator: for `Omega` in `so(n)` acting on frame
    /// components, the spinor matrix is `-(1/4) sum Omega_ab g_a g_b`, and
    /// `exp` of it covers `exp(Omega)`.
    pub fn so_generator_lift(&self, omega: &DMatrix<f64>) -> CMat {
        let dim = self.spinor_dim();
        let mut acc = CMat::zeros(dim, dim);
        for a in 0..self.n {
            for b in 0..self.n {
                if omega[(a, b)] != 0.0 {
                    acc += &self.gammas[a] * &self.gammas[b] * c(-0.25 * omega[(a, b)], 0.0);
                }
            }
        }
        acc
    }

    /// Spinor matrix of the `Spin(4)` element `(l, 1)`.
    pub fn left_factor_matrix(&self, l: &UnitQuaternion) -> CMat {
        assert_eq!(self.n, 4);
        let theta = l.angle();
        if theta < 1e-15 {
            return CMat::identity(4, 4);
        }
        let ax = l.axis();
        let gen = UnitQuaternion { w: 0.0, x: ax[0], y: ax[1], z: ax[2] };
        let lmat = gen.left_matrix();
        let omega = DMatrix::from_fn(4, 4, |i, j| lmat[(i, j)]);
        expm(&(self.so_generator_lift(&omega) * c(theta, 0.0)))
    }

    /// Spinor matrix of the `Spin(4)` element `(1, r)`, projecting to
    /// `x -> x conj(r)`.
    pub fn right_factor_matrix(&self, r: &UnitQuaternion) -> CMat {
        assert_eq!(self.n, 4);
        let theta = r.angle();
        if theta < 1e-15 {
            return CMat::identity(4, 4);
        }
        let ax = r.axis();
        let gen = UnitQuaternion { w: 0.0, x: ax[0], y: ax[1], z: ax[2] };
        // d/dt (x * exp(-t n)) = -x n: generator is minus right multiplication.
        let rmat = gen.right_matrix();
        let omega = DMatrix::from_fn(4, 4, |i, j| -rmat[(i, j)]);
        expm(&(self.so_generator_lift(&omega) * c(theta, 0.0)))
    }

    /// Spinor matrix of a `Spin(4)` element given as a quaternion pair.
    pub fn pair_spinor_matrix(&self, l: &UnitQuaternion, r: &UnitQuaternion) -> CMat {
        self.left_factor_matrix(l) * self.right_factor_matrix(r)
    }

    /// Action of `(l, r)` in the quaternion model `Sigma+ (+) Sigma-`:
    /// block-diagonal `SU(2)` matrices.
    pub fn weyl_block_action(l: &UnitQuaternion, r: &UnitQuaternion) -> CMat {
        let ul = l.su2();
        let ur = r.su2();
        let mut out = CMat::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                out[(i, j)] = ul[(i, j)];
                out[(2 + i, 2 + j)] = ur[(i, j)];
            }
        }
        out
    }

    /// Build the intertwiner `A` with
    /// `pair_spinor_matrix(l, r) * A = A * weyl_block_action(l, r)`,
    /// by averaging over the product of unit quaternion groups.
    fn build_intertwiner(&mut self) -> Result<()> {
        let units = [
            UnitQuaternion::ONE,
            UnitQuaternion::ONE.neg(),
            UnitQuaternion::I,
            UnitQuaternion::I.neg(),
            UnitQuaternion::J,
            UnitQuaternion::J.neg(),
            UnitQuaternion::K,
            UnitQuaternion::K.neg(),
        ];
        let plus: Vec<usize> = (0..4).filter(|&k| self.chirality[(k, k)].re > 0.0).collect();
        let minus: Vec<usize> = (0..4).filter(|&k| self.chirality[(k, k)].re < 0.0).collect();
        if plus.len() != 2 || minus.len() != 2 {
            return Err(TaleError::Numerical("chirality operator is not diagonal +-1".into()));
        }

        let average = |left: bool, seed: &CMat| -> CMat {
            let idx = if left { &plus } else { &minus };
            let mut acc = CMat::zeros(2, 2);
            for q in &units {
                let rho = if left {
                    self.left_factor_matrix(q)
                } else {
                    self.right_factor_matrix(q)
                };
                let mut rho_block = CMat::zeros(2, 2);
                for i in 0..2 {
                    for j in 0..2 {
                        rho_block[(i, j)] = rho[(idx[i], idx[j])];
                    }
                }
                let u = q.su2();
                let mut u_dag = CMat::zeros(2, 2);
                for i in 0..2 {
                    for j in 0..2 {
                        u_dag[(i, j)] = u[(j, i)].conj();
                    }
                }
                acc += rho_block * seed * u_dag;
            }
            acc / c(8.0, 0.0)
        };

        let block = |left: bool| -> Result<CMat> {
            for attempt in 0..3 {
                let seed = match attempt {
                    0 => CMat::from_row_slice(
                        2,
                        2,
                        &[c(1.0, 0.0), c(0.3, 0.1), c(-0.2, 0.4), c(0.8, -0.3)],
                    ),
                    1 => CMat::from_row_slice(
                        2,
                        2,
                        &[c(0.2, 0.7), c(1.1, 0.0), c(0.5, -0.6), c(-0.4, 0.2)],
                    ),
                    _ => CMat::identity(2, 2),
                };
                let t = average(left, &seed);
                // By irreducibility T^dagger T is a positive scalar; normalize.
                let mut tt = CMat::zeros(2, 2);
                for i in 0..2 {
                    for j in 0..2 {
                        let mut s = c(0.0, 0.0);
                        for k in 0..2 {
                            s += t[(k, i)].conj() * t[(k, j)];
                        }
                        tt[(i, j)] = s;
                    }
                }
                let lambda = tt[(0, 0)].re;
                if lambda > 1e-6 {
                    let off = (tt.clone() / c(lambda, 0.0) - CMat::identity(2, 2))
                        .iter()
                        .map(|x| x.norm())
                        .fold(0.0, f64::max);
                    if off < 1e-10 {
                        return Ok(t / c(lambda.sqrt(), 0.0));
                    }
                }
            }
            Err(TaleError::Numerical("intertwiner averaging degenerated".into()))
        };

        let t_plus = block(true)?;
        let t_minus = block(false)?;
        let mut a = CMat::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                a[(plus[i], j)] = t_plus[(i, j)];
                a[(minus[i], 2 + j)] = t_minus[(i, j)];
            }
        }
        let a_inv = a
            .clone()
            .try_inverse()
            .ok_or_else(|| TaleError::Numerical("intertwiner is singular".into()))?;
        self.intertwiner = Some(a);
        self.intertwiner_inv = Some(a_inv);
        Ok(())
    }

    pub fn intertwiner(&self) -> Result<&CMat> {
        self.intertwiner
            .as_ref()
            .ok_or_else(|| TaleError::UnsupportedDimension(self.n, "intertwiner exists for n = 4"))
    }

    /// Largest deviation of `rho(l, r) A - A (U(l) (+) U(r))` over a set of pairs.
    pub fn intertwiner_residual(&self, pairs: &[(UnitQuaternion, UnitQuaternion)]) -> Result<f64> {
        let a = self.intertwiner()?;
        let mut worst: f64 = 0.0;
        for (l, r) in pairs {
            let lhs = self.pair_spinor_matrix(l, r) * a;
            let rhs = a * Self::weyl_block_action(l, r);
            worst = worst.max((lhs - rhs).iter().map(|x| x.norm()).fold(0.0, f64::max));
        }
        Ok(worst)
    }

    /// Rotation covered by the spinor matrix `s`: `Ad_s` on the gamma basis.
    /// Returns the `n x n` rotation with `s gamma(v) s^{-1} = gamma(R v)`.
    pub fn covered_rotation(&self, s: &CMat) -> Result<Matrix4<f64>> {
        if self.n != 4 {
            return Err(TaleError::UnsupportedDimension(self.n, "covered_rotation is n = 4"));
        }
        let s_inv = s
            .clone()
            .try_inverse()
            .ok_or_else(|| TaleError::Numerical("singular spin element".into()))?;
        let mut rot = Matrix4::zeros();
        for b in 0..4 {
            let conj = s * &self.gammas[b] * &s_inv;
            // Expand in the gamma basis: coefficients via trace(g_a^dagger X)/dim.
            for a in 0..4 {
                let mut tr = c(0.0, 0.0);
                for i in 0..4 {
                    for j in 0..4 {
                        tr += self.gammas[a][(j, i)].conj() * conj[(j, i)];
                    }
                }
                rot[(a, b)] = (tr / c(4.0, 0.0)).re;
            }
        }
        Ok(rot)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{pair_rotation_matrix, BinaryPolyhedral, FiniteRotationGroup};

    #[test]
    fn identities_are_exact() {
        for n in [2, 4, 6] {
            let rep = CliffordRep::build(n).unwrap();
            assert_eq!(rep.anticommutation_residual(), 0.0, "n = {n}");
            assert_eq!(rep.chirality_residual(), 0.0, "n = {n}");
        }
    }

    #[test]
    fn odd_dimension_rejected() {
        assert!(CliffordRep::build(3).is_err());
        assert!(CliffordRep::build(8).is_err());
    }

    #[test]
    fn gamma_unitary() {
        let rep = CliffordRep::build(4).unwrap();
        let g = rep.gamma(&[0.5, -0.5, 0.5, 0.5]);
        let mut gtg = CMat::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                let mut s = c(0.0, 0.0);
                for k in 0..4 {
                    s += g[(k, i)].conj() * g[(k, j)];
                }
                gtg[(i, j)] = s;
            }
        }
        let dev = (gtg - CMat::identity(4, 4))
            .iter()
            .map(|x| x.norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-14);
    }

    #[test]
    fn half_spinor_projectors() {
        for n in [2usize, 4, 6] {
            let rep = CliffordRep::build(n).unwrap();
            let dim = rep.spinor_dim();
            let id = CMat::identity(dim, dim);
            let sum_dev = (&rep.proj_plus + &rep.proj_minus - &id)
                .iter()
                .map(|x| x.norm())
                .fold(0.0, f64::max);
            assert_eq!(sum_dev, 0.0);
            let idem = (&rep.proj_plus * &rep.proj_plus - &rep.proj_plus)
                .iter()
                .map(|x| x.norm())
                .fold(0.0, f64::max);
            assert_eq!(idem, 0.0);
            // Clifford multiplication swaps the halves.
            let swap = (&rep.proj_plus * &rep.gammas[0] * &rep.proj_plus)
                .iter()
                .map(|x| x.norm())
                .fold(0.0, f64::max);
            assert_eq!(swap, 0.0);
        }
    }

    #[test]
    fn factor_matrices_cover_the_right_rotations() {
        let rep = CliffordRep::build(4).unwrap();
        for q in [
            UnitQuaternion::I,
            UnitQuaternion::from_axis_angle([0.3, -0.5, 0.8], 0.7),
            UnitQuaternion::from_axis_angle([1.0, 1.0, 0.0], 2.9),
        ] {
            let s = rep.left_factor_matrix(&q);
            let rot = rep.covered_rotation(&s).unwrap();
            let expect = pair_rotation_matrix(&q, &UnitQuaternion::ONE);
            assert!((rot - expect).abs().max() < 1e-10, "left factor of {q:?}");

            let s = rep.right_factor_matrix(&q);
            let rot = rep.covered_rotation(&s).unwrap();
            let expect = pair_rotation_matrix(&UnitQuaternion::ONE, &q);
            assert!((rot - expect).abs().max() < 1e-10, "right factor of {q:?}");
        }
    }

    #[test]
    fn minus_one_lift_is_axis_independent() {
        let rep = CliffordRep::build(4).unwrap();
        let via_i = expm(&(rep.so_generator_lift(&DMatrix::from_fn(4, 4, |i, j| {
            UnitQuaternion::I.left_matrix()[(i, j)]
        })) * c(std::f64::consts::PI, 0.0)));
        let via_j = expm(&(rep.so_generator_lift(&DMatrix::from_fn(4, 4, |i, j| {
            UnitQuaternion::J.left_matrix()[(i, j)]
        })) * c(std::f64::consts::PI, 0.0)));
        let dev = (&via_i - &via_j).iter().map(|x| x.norm()).fold(0.0, f64::max);
        assert!(dev < 1e-12);
    }

    #[test]
    fn factors_commute_and_compose() {
        let rep = CliffordRep::build(4).unwrap();
        let l = UnitQuaternion::from_axis_angle([0.2, 0.9, -0.1], 1.3);
        let r = UnitQuaternion::from_axis_angle([-0.6, 0.3, 0.5], 0.4);
        let lr = rep.left_factor_matrix(&l) * rep.right_factor_matrix(&r);
        let rl = rep.right_factor_matrix(&r) * rep.left_factor_matrix(&l);
        let dev = (&lr - &rl).iter().map(|x| x.norm()).fold(0.0, f64::max);
        assert!(dev < 1e-12);

        // Homomorphism on the left factor.
        let l2 = UnitQuaternion::from_axis_angle([0.7, 0.1, 0.4], 0.9);
        let prod = rep.left_factor_matrix(&l.mul(&l2));
        let sep = rep.left_factor_matrix(&l) * rep.left_factor_matrix(&l2);
        let dev = (&prod - &sep).iter().map(|x| x.norm()).fold(0.0, f64::max);
        assert!(dev < 1e-12);
    }

    #[test]
    fn intertwiner_on_binary_dihedral_two() {
        let rep = CliffordRep::build(4).unwrap();
        let q8 = FiniteRotationGroup::binary_polyhedral(BinaryPolyhedral::Dihedral(2)).unwrap();
        let pairs: Vec<_> = q8.quaternion_pairs().unwrap().to_vec();
        let res = rep.intertwiner_residual(&pairs).unwrap();
        assert!(res < 1e-12, "residual {res}");
        // Also on elements with a nontrivial right factor.
        let mixed = vec![
            (UnitQuaternion::ONE, UnitQuaternion::ONE.neg()),
            (UnitQuaternion::ONE.neg(), UnitQuaternion::ONE),
            (
                UnitQuaternion::from_axis_angle([0.4, -0.2, 0.6], 1.1),
                UnitQuaternion::from_axis_angle([0.9, 0.1, -0.3], 2.2),
            ),
        ];
        let res = rep.intertwiner_residual(&mixed).unwrap();
        assert!(res < 1e-11, "residual {res}");
    }

    #[test]
    fn left_factor_acts_on_plus_half() {
        // The +1 chirality eigenspace carries the left factor action.
        let rep = CliffordRep::build(4).unwrap();
        let s = rep.left_factor_matrix(&UnitQuaternion::I);
        let plus: Vec<usize> = (0..4).filter(|&k| rep.chirality[(k, k)].re > 0.0).collect();
        let minus: Vec<usize> = (0..4).filter(|&k| rep.chirality[(k, k)].re < 0.0).collect();
        // Trivial on the minus half.
        for &i in &minus {
            for &j in &minus {
                let expect = if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) };
                assert!((s[(i, j)] - expect).norm() < 1e-12);
            }
        }
        // Nontrivial on the plus half.
        let mut dev: f64 = 0.0;
        for &i in &plus {
            for &j in &plus {
                let expect = if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) };
                dev = dev.max((s[(i, j)] - expect).norm());
            }
        }
        assert!(dev > 0.5);
    }
}
