//! Finite subgroups of `SO(n)` with an index-based multiplication table.

use super::quaternion::{pair_rotation_matrix, UnitQuaternion};
use crate::error::{Result, TaleError};
use nalgebra::DMatrix;
use std::collections::HashMap;
use std::f64::consts::PI;

/// Matrices agreeing within this tolerance are the same group element.
pub const MATRIX_MATCH_TOL: f64 = 1e-10;

/// Element keys are canonicalized by rounding entries to 12 decimal places.
const KEY_SCALE: f64 = 1e12;

/// A finite subgroup of `SO(n)` given by explicit matrices.
///
/// All elements have determinant `+1`, the set is closed under products and
/// inverses, and `cayley[i][j]` is the index of `elements[i] * elements[j]`.
/// Groups in dimension four may carry a quaternion-pair presentation
/// `(l, r) -> (x -> l x conj(r))` aligned index-by-index with `elements`.
#[derive(Clone, Debug)]
pub struct FiniteRotationGroup {
    dimension: usize,
    elements: Vec<DMatrix<f64>>,
    pairs: Option<Vec<(UnitQuaternion, UnitQuaternion)>>,
    cayley: Vec<Vec<usize>>,
    identity: usize,
    inverses: Vec<usize>,
}

fn element_key(m: &DMatrix<f64>) -> Vec<i64> {
    m.iter().map(|&x| (x * KEY_SCALE).round() as i64).collect()
}

fn matrices_match(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
    a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() <= tol)
}

impl FiniteRotationGroup {
    /// Build a group from an explicit list of matrices.
    ///
    /// Checks orthogonality, `det = +1`, and closure, and constructs the
    /// multiplication table. The identity need not be listed first.
    pub fn from_matrices(dimension: usize, elements: Vec<DMatrix<f64>>) -> Result<Self> {
        if elements.is_empty() {
            return Err(TaleError::InvalidGroup("no elements given".into()));
        }
        for m in &elements {
            if m.nrows() != dimension || m.ncols() != dimension {
                return Err(TaleError::InvalidGroup("element has wrong shape".into()));
            }
            let ortho = (m.transpose() * m - DMatrix::identity(dimension, dimension))
                .iter()
                .all(|x| x.abs() <= MATRIX_MATCH_TOL);
            if !ortho {
                return Err(TaleError::InvalidGroup("element is not orthogonal".into()));
            }
            if (m.determinant() - 1.0).abs() > 1e-8 {
                return Err(TaleError::InvalidGroup(
                    "element has determinant != +1".into(),
                ));
            }
        }

        let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
        for (i, m) in elements.iter().enumerate() {
            if index.insert(element_key(m), i).is_some() {
                return Err(TaleError::InvalidGroup("duplicate element".into()));
            }
        }
        let find = |m: &DMatrix<f64>| -> Option<usize> {
            if let Some(&i) = index.get(&element_key(m)) {
                if matrices_match(&elements[i], m, MATRIX_MATCH_TOL) {
                    return Some(i);
                }
            }
            elements
                .iter()
                .position(|e| matrices_match(e, m, MATRIX_MATCH_TOL))
        };

        let id = DMatrix::identity(dimension, dimension);
        let identity = find(&id)
            .ok_or_else(|| TaleError::InvalidGroup("group does not contain the identity".into()))?;

        let order = elements.len();
        let mut cayley = vec![vec![0usize; order]; order];
        for i in 0..order {
            for j in 0..order {
                let prod = &elements[i] * &elements[j];
                cayley[i][j] = find(&prod).ok_or_else(|| {
                    TaleError::InvalidGroup(format!("product of elements {i} and {j} escapes the set"))
                })?;
            }
        }
        let mut inverses = vec![usize::MAX; order];
        for i in 0..order {
            let inv = (0..order).find(|&j| cayley[i][j] == identity).ok_or_else(|| {
                TaleError::InvalidGroup(format!("element {i} has no inverse in the set"))
            })?;
            inverses[i] = inv;
        }

        Ok(FiniteRotationGroup {
            dimension,
            elements,
            pairs: None,
            cayley,
            identity,
            inverses,
        })
    }

    /// Close a quaternion-pair generating set and build the group it generates.
    pub fn from_pair_generators(generators: &[(UnitQuaternion, UnitQuaternion)]) -> Result<Self> {
        let pairs = close_pairs(generators, 10_000)?;
        let elements: Vec<DMatrix<f64>> = pairs
            .iter()
            .map(|(l, r)| {
                let m = pair_rotation_matrix(l, r);
                DMatrix::from_fn(4, 4, |i, j| m[(i, j)])
            })
            .collect();
        // Distinct pairs can project onto equal rotations ((l, r) and (-l, -r));
        // keep one representative per rotation.
        let mut seen: HashMap<Vec<i64>, usize> = HashMap::new();
        let mut kept_pairs = Vec::new();
        let mut kept_elems = Vec::new();
        for (p, m) in pairs.into_iter().zip(elements.into_iter()) {
            let key = element_key(&m);
            if !seen.contains_key(&key) {
                seen.insert(key, kept_elems.len());
                kept_pairs.push(p);
                kept_elems.push(m);
            }
        }
        let mut g = Self::from_matrices(4, kept_elems)?;
        g.pairs = Some(kept_pairs);
        Ok(g)
    }

    /// Cyclic group of order `m` in `SO(2)`, generated by rotation through `2 pi / m`.
    pub fn cyclic_so2(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(TaleError::InvalidGroup("cyclic group of order 0".into()));
        }
        let elements = (0..m)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / m as f64;
                DMatrix::from_row_slice(2, 2, &[a.cos(), -a.sin(), a.sin(), a.cos()])
            })
            .collect();
        Self::from_matrices(2, elements)
    }

    /// Cyclic group of order `m` in `SO(4)` rotating the two coordinate planes
    /// through `k1 * 2 pi / m` and `k2 * 2 pi / m`.
    ///
    /// Requires `gcd(k1, k2, m) = 1` so the generated group really has order `m`.
    /// With angles `(theta, -theta)` the group lies in `SU(2)` acting on
    /// `C^2 = R^4`.
    pub fn cyclic_so4(m: usize, k1: i64, k2: i64) -> Result<Self> {
        if m == 0 {
            return Err(TaleError::InvalidGroup("cyclic group of order 0".into()));
        }
        let g = gcd(gcd(k1.unsigned_abs() as usize, k2.unsigned_abs() as usize), m);
        if m > 1 && g != 1 {
            return Err(TaleError::InvalidGroup(format!(
                "angles ({k1}, {k2}) * 2pi/{m} generate a group of order {} != {m}",
                m / g
            )));
        }
        let block = |angle: f64| (angle.cos(), angle.sin());
        let elements = (0..m)
            .map(|p| {
                let a1 = 2.0 * PI * (k1 * p as i64) as f64 / m as f64;
                let a2 = 2.0 * PI * (k2 * p as i64) as f64 / m as f64;
                let (c1, s1) = block(a1);
                let (c2, s2) = block(a2);
                DMatrix::from_row_slice(
                    4,
                    4,
                    &[
                        c1, -s1, 0.0, 0.0, //
                        s1, c1, 0.0, 0.0, //
                        0.0, 0.0, c2, -s2, //
                        0.0, 0.0, s2, c2,
                    ],
                )
            })
            .collect();
        Self::from_matrices(4, elements)
    }

    /// Binary polyhedral subgroup of `SU(2)`, embedded in `SO(4)` by left
    /// multiplication `x -> q x` on `H = C^2`.
    pub fn binary_polyhedral(kind: BinaryPolyhedral) -> Result<Self> {
        let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
        let gens: Vec<UnitQuaternion> = match kind {
            BinaryPolyhedral::Dihedral(k) => {
                if k == 0 {
                    return Err(TaleError::InvalidGroup("binary dihedral with k = 0".into()));
                }
                vec![
                    UnitQuaternion::from_axis_angle([1.0, 0.0, 0.0], PI / k as f64),
                    UnitQuaternion::J,
                ]
            }
            BinaryPolyhedral::Tetrahedral => vec![
                UnitQuaternion::I,
                UnitQuaternion::new(-0.5, 0.5, 0.5, 0.5).expect("unit"),
            ],
            BinaryPolyhedral::Octahedral => vec![
                UnitQuaternion::new(-0.5, 0.5, 0.5, 0.5).expect("unit"),
                UnitQuaternion::new(1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt(), 0.0, 0.0).expect("unit"),
            ],
            BinaryPolyhedral::Icosahedral => vec![
                UnitQuaternion::new(0.5, 0.5, 0.5, 0.5).expect("unit"),
                UnitQuaternion::new(phi / 2.0, 1.0 / (2.0 * phi), 0.5, 0.0).expect("unit"),
            ],
        };
        let pair_gens: Vec<_> = gens.into_iter().map(|q| (q, UnitQuaternion::ONE)).collect();
        Self::from_pair_generators(&pair_gens)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[DMatrix<f64>] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &DMatrix<f64> {
        &self.elements[i]
    }

    pub fn quaternion_pairs(&self) -> Option<&[(UnitQuaternion, UnitQuaternion)]> {
        self.pairs.as_deref()
    }

    pub fn cayley(&self) -> &[Vec<usize>] {
        &self.cayley
    }

    pub fn identity_index(&self) -> usize {
        self.identity
    }

    pub fn inverse_index(&self, i: usize) -> usize {
        self.inverses[i]
    }

    pub fn compose(&self, i: usize, j: usize) -> usize {
        self.cayley[i][j]
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }

    /// Index of the element matching `m`, if any.
    pub fn find_element(&self, m: &DMatrix<f64>) -> Option<usize> {
        self.elements
            .iter()
            .position(|e| matrices_match(e, m, MATRIX_MATCH_TOL))
    }

    /// The conjugated group `c G c^{-1}` (element order preserved).
    pub fn conjugated(&self, c: &DMatrix<f64>) -> Result<Self> {
        let cinv = c
            .clone()
            .try_inverse()
            .ok_or_else(|| TaleError::InvalidGroup("conjugator is singular".into()))?;
        let elements = self.elements.iter().map(|m| c * m * &cinv).collect();
        Self::from_matrices(self.dimension, elements)
    }

    /// True when no non-identity element fixes a nonzero vector, so the origin
    /// is an isolated fixed point of the action on `R^n \ {0}`.
    pub fn acts_freely(&self) -> bool {
        let id = DMatrix::<f64>::identity(self.dimension, self.dimension);
        self.elements.iter().enumerate().all(|(i, m)| {
            if i == self.identity {
                return true;
            }
            // Eigenvalue 1 exactly when det(m - I) = 0.
            (m - &id).determinant().abs() > MATRIX_MATCH_TOL
        })
    }

    /// Generating set found greedily; small for all the groups handled here.
    pub fn generating_set(&self) -> Vec<usize> {
        let order = self.order();
        let mut gens: Vec<usize> = Vec::new();
        let mut span = vec![false; order];
        span[self.identity] = true;
        let mut span_count = 1;
        while span_count < order {
            let next = (0..order).find(|&i| !span[i]).expect("uncovered element");
            gens.push(next);
            // Close the span under multiplication with the new generator set.
            let mut frontier = vec![next];
            span[next] = true;
            span_count += 1;
            while let Some(i) = frontier.pop() {
                for &g in &gens {
                    for j in [self.cayley[i][g], self.cayley[g][i]] {
                        if !span[j] {
                            span[j] = true;
                            span_count += 1;
                            frontier.push(j);
                        }
                    }
                }
                // Products of covered elements stay covered for cyclic chains;
                // recheck the full span to be safe for non-abelian groups.
                for a in 0..order {
                    if !span[a] {
                        continue;
                    }
                    for b in 0..order {
                        if span[b] && !span[self.cayley[a][b]] {
                            span[self.cayley[a][b]] = true;
                            span_count += 1;
                            frontier.push(self.cayley[a][b]);
                        }
                    }
                }
            }
        }
        gens
    }

    /// Expression of every element as a word in `gens` (indices into `gens`).
    pub fn words_in_generators(&self, gens: &[usize]) -> Vec<Vec<usize>> {
        let order = self.order();
        let mut words: Vec<Option<Vec<usize>>> = vec![None; order];
        words[self.identity] = Some(vec![]);
        let mut frontier = vec![self.identity];
        while let Some(i) = frontier.pop() {
            let w = words[i].clone().expect("visited");
            for (gi, &g) in gens.iter().enumerate() {
                let j = self.cayley[i][g];
                if words[j].is_none() {
                    let mut wj = w.clone();
                    wj.push(gi);
                    words[j] = Some(wj);
                    frontier.push(j);
                }
            }
        }
        words
            .into_iter()
            .map(|w| w.expect("generators do not generate the group"))
            .collect()
    }
}

/// Tags for the binary polyhedral groups (orders `4k`, 24, 48, 120).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinaryPolyhedral {
    Dihedral(usize),
    Tetrahedral,
    Octahedral,
    Icosahedral,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn pair_key(p: &(UnitQuaternion, UnitQuaternion)) -> [i64; 8] {
    let q = [p.0.w, p.0.x, p.0.y, p.0.z, p.1.w, p.1.x, p.1.y, p.1.z];
    let mut k = [0i64; 8];
    for (o, v) in k.iter_mut().zip(q) {
        *o = (v * KEY_SCALE).round() as i64;
    }
    k
}

/// Closure of a set of quaternion pairs under componentwise multiplication.
pub fn close_pairs(
    generators: &[(UnitQuaternion, UnitQuaternion)],
    cap: usize,
) -> Result<Vec<(UnitQuaternion, UnitQuaternion)>> {
    let mut elems: Vec<(UnitQuaternion, UnitQuaternion)> =
        vec![(UnitQuaternion::ONE, UnitQuaternion::ONE)];
    let mut keys: HashMap<[i64; 8], usize> = HashMap::new();
    keys.insert(pair_key(&elems[0]), 0);
    let mut frontier = vec![0usize];
    while let Some(i) = frontier.pop() {
        for g in generators {
            let prod = (elems[i].0.mul(&g.0), elems[i].1.mul(&g.1));
            let key = pair_key(&prod);
            if !keys.contains_key(&key) {
                let matched = elems
                    .iter()
                    .any(|e| e.0.approx_eq(&prod.0, MATRIX_MATCH_TOL) && e.1.approx_eq(&prod.1, MATRIX_MATCH_TOL));
                if !matched {
                    elems.push(prod);
                    keys.insert(key, elems.len() - 1);
                    frontier.push(elems.len() - 1);
                    if elems.len() > cap {
                        return Err(TaleError::InvalidGroup(
                            "generated set exceeds the closure cap; not a finite group?".into(),
                        ));
                    }
                }
            }
        }
    }
    Ok(elems)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_so2_orders_and_closure() {
        for m in 1..=9 {
            let g = FiniteRotationGroup::cyclic_so2(m).unwrap();
            assert_eq!(g.order(), m);
            assert!(g.acts_freely() || m == 1);
        }
    }

    #[test]
    fn cyclic_so2_five_has_z5_table() {
        let g = FiniteRotationGroup::cyclic_so2(5).unwrap();
        // Element k is rotation through 2 pi k / 5; the table is addition mod 5.
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(g.compose(i, j), (i + j) % 5);
            }
        }
    }

    #[test]
    fn eguchi_hanson_group_is_plus_minus_identity() {
        let g = FiniteRotationGroup::cyclic_so4(2, 1, 1).unwrap();
        assert_eq!(g.order(), 2);
        let minus = DMatrix::<f64>::identity(4, 4) * -1.0;
        assert!(g.find_element(&minus).is_some());
        assert!(g.acts_freely());
    }

    #[test]
    fn one_plane_rotation_is_not_free() {
        let g = FiniteRotationGroup::cyclic_so4(2, 1, 0).unwrap();
        assert!(!g.acts_freely());
    }

    #[test]
    fn degenerate_embedding_rejected() {
        assert!(FiniteRotationGroup::cyclic_so4(4, 2, 2).is_err());
        assert!(FiniteRotationGroup::cyclic_so4(0, 1, 1).is_err());
    }

    #[test]
    fn binary_polyhedral_orders() {
        let q8 = FiniteRotationGroup::binary_polyhedral(BinaryPolyhedral::Dihedral(2)).unwrap();
        assert_eq!(q8.order(), 8);
        assert!(q8.acts_freely());
        let t = FiniteRotationGroup::binary_polyhedral(BinaryPolyhedral::Tetrahedral).unwrap();
        assert_eq!(t.order(), 24);
        let o = FiniteRotationGroup::binary_polyhedral(BinaryPolyhedral::Octahedral).unwrap();
        assert_eq!(o.order(), 48);
        let i = FiniteRotationGroup::binary_polyhedral(BinaryPolyhedral::Icosahedral).unwrap();
        assert_eq!(i.order(), 120);
        assert!(i.acts_freely());
    }

    #[test]
    fn quaternion_group_is_the_unit_set() {
        let q8 = FiniteRotationGroup::binary_polyhedral(BinaryPolyhedral::Dihedral(2)).unwrap();
        let pairs = q8.quaternion_pairs().unwrap();
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
        for u in &units {
            assert!(pairs.iter().any(|(l, _)| l.approx_eq(u, 1e-12)));
        }
    }

    #[test]
    fn generating_set_spans() {
        let t = FiniteRotationGroup::binary_polyhedral(BinaryPolyhedral::Tetrahedral).unwrap();
        let gens = t.generating_set();
        assert!(gens.len() <= 3);
        let words = t.words_in_generators(&gens);
        assert_eq!(words.len(), 24);
        // Rebuild each element from its word.
        for (i, w) in words.iter().enumerate() {
            let mut acc = t.identity_index();
            for &gi in w {
                acc = t.compose(acc, gens[gi]);
            }
            assert_eq!(acc, i);
        }
    }
}
