//! Lifts of finite rotation groups through the double cover `Spin(n) -> SO(n)`
//! and fixed subspaces of the half-spinor representations.

use super::quaternion::{pair_rotation_matrix, so4_to_pair_dyn, UnitQuaternion};
use super::rotation::{FiniteRotationGroup, MATRIX_MATCH_TOL};
use crate::error::{Result, TaleError};
use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex;
use std::f64::consts::PI;

/// An element of `Spin(2)` or `Spin(4)`.
///
/// `Angle(t)` projects to the plane rotation through `2t`; `Pair(l, r)`
/// projects to `x -> l x conj(r)` on `R^4 = H`.
#[derive(Clone, Copy, Debug)]
pub enum SpinElement {
    Angle(f64),
    Pair(UnitQuaternion, UnitQuaternion),
}

impl SpinElement {
    pub fn identity_for(dimension: usize) -> Self {
        match dimension {
            2 => SpinElement::Angle(0.0),
            _ => SpinElement::Pair(UnitQuaternion::ONE, UnitQuaternion::ONE),
        }
    }

    pub fn mul(&self, o: &SpinElement) -> SpinElement {
        match (self, o) {
            (SpinElement::Angle(a), SpinElement::Angle(b)) => {
                SpinElement::Angle((a + b).rem_euclid(2.0 * PI))
            }
            (SpinElement::Pair(l1, r1), SpinElement::Pair(l2, r2)) => {
                SpinElement::Pair(l1.mul(l2), r1.mul(r2))
            }
            _ => panic!("mixed spin element dimensions"),
        }
    }

    pub fn approx_eq(&self, o: &SpinElement, tol: f64) -> bool {
        match (self, o) {
            (SpinElement::Angle(a), SpinElement::Angle(b)) => {
                let d = (a - b).rem_euclid(2.0 * PI);
                d <= tol || (2.0 * PI - d) <= tol
            }
            (SpinElement::Pair(l1, r1), SpinElement::Pair(l2, r2)) => {
                l1.approx_eq(l2, tol) && r1.approx_eq(r2, tol)
            }
            _ => false,
        }
    }

    /// Image under the covering projection, as a rotation matrix.
    pub fn project(&self) -> DMatrix<f64> {
        match self {
            SpinElement::Angle(t) => {
                let a = 2.0 * t;
                DMatrix::from_row_slice(2, 2, &[a.cos(), -a.sin(), a.sin(), a.cos()])
            }
            SpinElement::Pair(l, r) => {
                let m = pair_rotation_matrix(l, r);
                DMatrix::from_fn(4, 4, |i, j| m[(i, j)])
            }
        }
    }

    /// The non-trivial kernel element of the covering in this dimension.
    pub fn kernel_generator_for(dimension: usize) -> Self {
        match dimension {
            2 => SpinElement::Angle(PI),
            _ => SpinElement::Pair(UnitQuaternion::ONE.neg(), UnitQuaternion::ONE.neg()),
        }
    }
}

/// The two spin structures of the punctured plane (equivalently of the circle).
///
/// In dimension two the punctured cone `(R^2 \ {0}) / G` is a cylinder, which
/// carries two spin structures; a lift of `G` is a homomorphic section of the
/// covering together with the structure it acts on. This is why an odd-order
/// cyclic group has two lifts and an even-order one has none, while for
/// `n >= 3` (simply connected punctured space) a lift is just a subgroup of
/// `Spin(n)` projecting isomorphically.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CircleStructure {
    Bounding,
    Periodic,
}

/// A lift of a [`FiniteRotationGroup`] through `Spin(n) -> SO(n)`.
#[derive(Clone, Debug)]
pub struct SpinLift {
    base: FiniteRotationGroup,
    elements: Vec<SpinElement>,
    structure: Option<CircleStructure>,
}

impl SpinLift {
    pub fn base(&self) -> &FiniteRotationGroup {
        &self.base
    }

    /// Lift elements aligned index-by-index with the base group's elements.
    pub fn elements(&self) -> &[SpinElement] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &SpinElement {
        &self.elements[i]
    }

    /// Set for dimension-two lifts only.
    pub fn circle_structure(&self) -> Option<CircleStructure> {
        self.structure
    }

    /// Largest deviation of any projected lift element from its base element.
    pub fn projection_residual(&self) -> f64 {
        self.elements
            .iter()
            .zip(self.base.elements())
            .map(|(s, m)| (s.project() - m).abs().max())
            .fold(0.0, f64::max)
    }

    /// Largest deviation from the homomorphism property over the full table.
    pub fn homomorphism_residual(&self) -> f64 {
        let order = self.base.order();
        let mut worst: f64 = 0.0;
        for i in 0..order {
            for j in 0..order {
                let prod = self.elements[i].mul(&self.elements[j]);
                let expect = &self.elements[self.base.compose(i, j)];
                if !prod.approx_eq(expect, MATRIX_MATCH_TOL) {
                    // Measure the mismatch through the projections.
                    let d = (prod.project() - expect.project()).abs().max();
                    worst = worst.max(d.max(MATRIX_MATCH_TOL));
                }
            }
        }
        worst
    }

    /// True when the lift meets the covering kernel only in the identity.
    pub fn avoids_minus_one(&self) -> bool {
        let minus = SpinElement::kernel_generator_for(self.base.dimension());
        self.elements
            .iter()
            .enumerate()
            .all(|(i, s)| i == self.base.identity_index() || !s.approx_eq(&minus, MATRIX_MATCH_TOL))
    }
}

/// All lifts of `group` through `Spin(n) -> SO(n)` for `n` in `{2, 4}`.
///
/// Every element of `SO(n)` has two preimages; a lift assigns one preimage per
/// group element so that the assignment is a homomorphism. The search walks
/// all sign choices on a generating set and keeps the consistent ones. An
/// empty result means the corresponding cone singularity admits no spin
/// structure.
pub fn enumerate_spin_lifts(group: &FiniteRotationGroup) -> Result<Vec<SpinLift>> {
    let n = group.dimension();
    if n != 2 && n != 4 {
        return Err(TaleError::UnsupportedDimension(n, "spin lifts need n in {2, 4}"));
    }

    let gens = group.generating_set();
    let words = group.words_in_generators(&gens);

    // The two preimages of each generator.
    let mut preimages: Vec<[SpinElement; 2]> = Vec::with_capacity(gens.len());
    let kernel = SpinElement::kernel_generator_for(n);
    for &g in &gens {
        let m = group.element(g);
        let up = match n {
            2 => {
                let alpha = m[(1, 0)].atan2(m[(0, 0)]);
                SpinElement::Angle((alpha / 2.0).rem_euclid(2.0 * PI))
            }
            _ => {
                let (l, r) = so4_to_pair_dyn(m)?;
                SpinElement::Pair(l, r)
            }
        };
        preimages.push([up, up.mul(&kernel)]);
    }

    let order = group.order();
    let mut sections: Vec<Vec<SpinElement>> = Vec::new();
    'signs: for mask in 0..(1usize << gens.len()) {
        let choice: Vec<&SpinElement> = (0..gens.len())
            .map(|k| &preimages[k][(mask >> k) & 1])
            .collect();
        let mut section = Vec::with_capacity(order);
        for word in &words {
            let mut acc = SpinElement::identity_for(n);
            for &gi in word {
                acc = acc.mul(choice[gi]);
            }
            section.push(acc);
        }
        // Homomorphism over the full table; word extension alone does not
        // guarantee consistency of the sign choice.
        for i in 0..order {
            for j in 0..order {
                let prod = section[i].mul(&section[j]);
                if !prod.approx_eq(&section[group.compose(i, j)], 1e-8) {
                    continue 'signs;
                }
            }
        }
        if sections
            .iter()
            .any(|s| s.iter().zip(&section).all(|(a, b)| a.approx_eq(b, 1e-8)))
        {
            continue;
        }
        sections.push(section);
    }

    let mut lifts = Vec::new();
    for section in sections {
        match n {
            2 => {
                for structure in [CircleStructure::Bounding, CircleStructure::Periodic] {
                    lifts.push(SpinLift {
                        base: group.clone(),
                        elements: section.clone(),
                        structure: Some(structure),
                    });
                }
            }
            _ => lifts.push(SpinLift {
                base: group.clone(),
                elements: section,
                structure: None,
            }),
        }
    }
    for lift in &lifts {
        debug_assert!(lift.projection_residual() < 1e-9);
        debug_assert!(lift.avoids_minus_one());
    }
    Ok(lifts)
}

/// Complex dimensions of the simultaneous fixed subspaces of a `Spin(4)` lift
/// acting on the half-spinor spaces `Sigma+` and `Sigma-`.
///
/// Each half is `C^2`; the left quaternion factor acts on `Sigma+` and the
/// right factor on `Sigma-`, both by the standard `SU(2)` representation. The
/// dimension of the fixed subspace is the trace of the group-averaging
/// projector, which is an integer up to rounding noise.
pub fn weyl_fixed_subspaces(lift: &SpinLift) -> Result<(usize, usize)> {
    if lift.base.dimension() != 4 {
        return Err(TaleError::UnsupportedDimension(
            lift.base.dimension(),
            "half-spinor fixed spaces need n = 4",
        ));
    }
    let mut avg_plus = Matrix2::<Complex<f64>>::zeros();
    let mut avg_minus = Matrix2::<Complex<f64>>::zeros();
    for s in &lift.elements {
        let SpinElement::Pair(l, r) = s else {
            return Err(TaleError::InvalidGroup("angle element in a 4d lift".into()));
        };
        avg_plus += l.su2();
        avg_minus += r.su2();
    }
    let k = Complex::new(lift.elements.len() as f64, 0.0);
    avg_plus /= k;
    avg_minus /= k;

    let dim_of = |p: &Matrix2<Complex<f64>>| -> Result<usize> {
        let t = p.trace();
        let rounded = t.re.round();
        if (t.re - rounded).abs() > 1e-9 || t.im.abs() > 1e-9 || !(0.0..=2.0).contains(&rounded) {
            return Err(TaleError::Numerical(format!(
                "averaging projector trace {t} is not an integer in [0, 2]"
            )));
        }
        Ok(rounded as usize)
    };
    Ok((dim_of(&avg_plus)?, dim_of(&avg_minus)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::rotation::BinaryPolyhedral;
    

    #[test]
    fn so2_lift_counts_follow_parity() {
        for (m, expect) in [(1, 2), (2, 0), (3, 2), (4, 0), (5, 2), (6, 0), (7, 2), (8, 0), (9, 2)]
        {
            let g = FiniteRotationGroup::cyclic_so2(m).unwrap();
            let lifts = enumerate_spin_lifts(&g).unwrap();
            assert_eq!(lifts.len(), expect, "order {m}");
            for lift in &lifts {
                assert!(lift.projection_residual() < 1e-10);
                assert!(lift.homomorphism_residual() <= MATRIX_MATCH_TOL);
                assert!(lift.avoids_minus_one());
            }
        }
    }

    #[test]
    fn plus_minus_identity_has_two_lifts_in_spin4() {
        let g = FiniteRotationGroup::cyclic_so4(2, 1, 1).unwrap();
        let lifts = enumerate_spin_lifts(&g).unwrap();
        assert_eq!(lifts.len(), 2);
        // The two lifts are {1} x {+-1} and {+-1} x {1}.
        let mut signatures = Vec::new();
        for lift in &lifts {
            let nontrivial = lift
                .elements()
                .iter()
                .enumerate()
                .find(|(i, _)| *i != lift.base().identity_index())
                .map(|(_, s)| *s)
                .unwrap();
            let SpinElement::Pair(l, r) = nontrivial else { panic!() };
            let left_trivial = l.approx_eq(&UnitQuaternion::ONE, 1e-10);
            let right_trivial = r.approx_eq(&UnitQuaternion::ONE, 1e-10);
            assert!(left_trivial ^ right_trivial);
            signatures.push(left_trivial);
        }
        signatures.sort();
        assert_eq!(signatures, vec![false, true]);
    }

    #[test]
    fn trivial_group_in_so4_has_one_lift() {
        let g = FiniteRotationGroup::cyclic_so4(1, 0, 0).unwrap();
        let lifts = enumerate_spin_lifts(&g).unwrap();
        assert_eq!(lifts.len(), 1);
    }

    #[test]
    fn weyl_fixed_spaces_of_plus_minus_identity() {
        let g = FiniteRotationGroup::cyclic_so4(2, 1, 1).unwrap();
        let lifts = enumerate_spin_lifts(&g).unwrap();
        let mut dims: Vec<(usize, usize)> = lifts
            .iter()
            .map(|l| weyl_fixed_subspaces(l).unwrap())
            .collect();
        dims.sort();
        assert_eq!(dims, vec![(0, 2), (2, 0)]);

        // The pairing: the lift with trivial left factor fixes all of
        // Sigma+, the one with trivial right factor all of Sigma-.
        for lift in &lifts {
            let nontrivial = lift
                .elements()
                .iter()
                .enumerate()
                .find(|(i, _)| *i != lift.base().identity_index())
                .map(|(_, s)| *s)
                .unwrap();
            let SpinElement::Pair(l, _) = nontrivial else { panic!() };
            let left_trivial = l.approx_eq(&UnitQuaternion::ONE, 1e-10);
            let dims = weyl_fixed_subspaces(lift).unwrap();
            if left_trivial {
                assert_eq!(dims, (2, 0));
            } else {
                assert_eq!(dims, (0, 2));
            }
        }
    }

    #[test]
    fn weyl_fixed_spaces_of_trivial_lift() {
        let g = FiniteRotationGroup::cyclic_so4(1, 0, 0).unwrap();
        let lifts = enumerate_spin_lifts(&g).unwrap();
        assert_eq!(weyl_fixed_subspaces(&lifts[0]).unwrap(), (2, 2));
    }

    /// Independent route: fixed-space dimension by a least-squares rank count
    /// on the stacked, realified system `(U(g) - I) v = 0`.
    fn fixed_dim_by_nullspace(mats: &[Matrix2<Complex<f64>>]) -> usize {
        let rows = 4 * mats.len();
        let mut a = DMatrix::<f64>::zeros(rows, 4);
        for (k, m) in mats.iter().enumerate() {
            let d = m - Matrix2::identity();
            for i in 0..2 {
                for j in 0..2 {
                    // v = vr + i vi, row pairs for real and imaginary parts.
                    a[(4 * k + 2 * i, 2 * j)] = d[(i, j)].re;
                    a[(4 * k + 2 * i, 2 * j + 1)] = -d[(i, j)].im;
                    a[(4 * k + 2 * i + 1, 2 * j)] = d[(i, j)].im;
                    a[(4 * k + 2 * i + 1, 2 * j + 1)] = d[(i, j)].re;
                }
            }
        }
        let svd = a.svd(false, false);
        let null = svd.singular_values.iter().filter(|s| **s < 1e-9).count()
            + 4usize.saturating_sub(svd.singular_values.len());
        // Complex dimension is half the real nullity.
        null / 2
    }

    #[test]
    fn averaging_trace_matches_nullspace_oracle() {
        let q8 = FiniteRotationGroup::binary_polyhedral(BinaryPolyhedral::Dihedral(2)).unwrap();
        let lifts = enumerate_spin_lifts(&q8).unwrap();
        assert!(!lifts.is_empty());
        for lift in &lifts {
            let (dp, dm) = weyl_fixed_subspaces(lift).unwrap();
            let left: Vec<_> = lift
                .elements()
                .iter()
                .map(|s| match s {
                    SpinElement::Pair(l, _) => l.su2(),
                    _ => panic!(),
                })
                .collect();
            let right: Vec<_> = lift
                .elements()
                .iter()
                .map(|s| match s {
                    SpinElement::Pair(_, r) => r.su2(),
                    _ => panic!(),
                })
                .collect();
            assert_eq!(dp, fixed_dim_by_nullspace(&left));
            assert_eq!(dm, fixed_dim_by_nullspace(&right));
            // A nontrivial group fixes spinors in at most one half.
            assert!(dp == 0 || dm == 0);
        }
    }

    #[test]
    fn binary_polyhedral_lift_counts_match_sign_characters() {
        // The number of lifts equals the number of homomorphisms to {+-1}:
        // 4 for the quaternion group, 1 for the binary tetrahedral group.
        let q8 = FiniteRotationGroup::binary_polyhedral(BinaryPolyhedral::Dihedral(2)).unwrap();
        assert_eq!(enumerate_spin_lifts(&q8).unwrap().len(), 4);
        let t = FiniteRotationGroup::binary_polyhedral(BinaryPolyhedral::Tetrahedral).unwrap();
        assert_eq!(enumerate_spin_lifts(&t).unwrap().len(), 1);
    }

    #[test]
    fn lift_count_is_conjugation_invariant() {
        let g = FiniteRotationGroup::cyclic_so4(2, 1, 1).unwrap();
        let base_count = enumerate_spin_lifts(&g).unwrap().len();
        // Conjugate by a generic rotation.
        let l = UnitQuaternion::from_axis_angle([0.3, 0.5, -0.2], 0.83);
        let r = UnitQuaternion::from_axis_angle([-0.1, 0.9, 0.4], 1.21);
        let c = pair_rotation_matrix(&l, &r);
        let cd = DMatrix::from_fn(4, 4, |i, j| c[(i, j)]);
        let conj = g.conjugated(&cd).unwrap();
        assert_eq!(enumerate_spin_lifts(&conj).unwrap().len(), base_count);
    }
}
