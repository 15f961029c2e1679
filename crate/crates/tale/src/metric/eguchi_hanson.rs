//! The Eguchi-Hanson metric on the exterior annulus `r > a`, written in
//! Cartesian coordinates.
//!
//! In the radial/Euler-angle form
//!
//! ```text
//! ds^2 = (1 - (a/r)^4)^{-1} dr^2
//!      + (r^2/4) (1 - (a/r)^4) sigma_3^2
//!      + (r^2/4) (sigma_1^2 + sigma_2^2)
//! ```
//!
//! where the `sigma_i` are the left-invariant one-forms of the unit
//! three-sphere normalized so that the flat metric is
//! `dr^2 + (r^2/4)(sigma_1^2 + sigma_2^2 + sigma_3^2)`. Writing
//! `y = y_0 + y_1 i + y_2 j + y_3 k` and expanding `conj(y) dy`, the forms in
//! Cartesian coordinates are
//!
//! ```text
//! sigma_1 = (2/r^2) (-y_1 dy_0 + y_0 dy_1 + y_3 dy_2 - y_2 dy_3)
//! sigma_2 = (2/r^2) (-y_2 dy_0 - y_3 dy_1 + y_0 dy_2 + y_1 dy_3)
//! sigma_3 = (2/r^2) (-y_3 dy_0 + y_2 dy_1 - y_1 dy_2 + y_0 dy_3)
//! ```
//!
//! All coefficients are rational in `y` apart from one square root, so jet
//! evaluation provides exact first and second derivatives. The chart is
//! invariant under `y -> -y`; that identification is recorded as the deck
//! group. Ricci-flatness is not assumed anywhere: the test suite certifies it
//! numerically from the exact derivatives.

use super::{Domain, ExprField, MetricChart, MetricExpr};
use crate::error::{Result, TaleError};
use crate::groups::FiniteRotationGroup;
use crate::jet::Real;
use std::sync::Arc;

struct EguchiHansonExpr {
    a4: f64,
}

impl MetricExpr for EguchiHansonExpr {
    fn dim(&self) -> usize {
        4
    }

    fn entries<T: Real>(&self, y: &[T]) -> Vec<T> {
        let mut r2 = y[0].constant_like(0.0);
        for v in y {
            r2 = r2 + v.clone() * v.clone();
        }
        let r = r2.sqrt();
        let a4_over_r4 = (r2.clone() * r2.clone()).recip().scale(self.a4);
        let delta = y[0].constant_like(1.0) - a4_over_r4;

        let f = delta.recip();
        let quarter_r2 = r2.clone().scale(0.25);
        let h3 = quarter_r2.clone() * delta;
        let h12 = quarter_r2;

        let two_over_r2 = r2.recip().scale(2.0);
        let wr: Vec<T> = y.iter().map(|v| v.clone() / r.clone()).collect();
        let (y0, y1, y2, y3) = (y[0].clone(), y[1].clone(), y[2].clone(), y[3].clone());
        let w1: Vec<T> = [-y1.clone(), y0.clone(), y3.clone(), -y2.clone()]
            .into_iter()
            .map(|c| c * two_over_r2.clone())
            .collect();
        let w2: Vec<T> = [-y2.clone(), -y3.clone(), y0.clone(), y1.clone()]
            .into_iter()
            .map(|c| c * two_over_r2.clone())
            .collect();
        let w3: Vec<T> = [-y3, y2, -y1, y0]
            .into_iter()
            .map(|c| c * two_over_r2.clone())
            .collect();

        let mut out = Vec::with_capacity(16);
        for i in 0..4 {
            for j in 0..4 {
                let term = f.clone() * wr[i].clone() * wr[j].clone()
                    + h3.clone() * w3[i].clone() * w3[j].clone()
                    + h12.clone() * (w1[i].clone() * w1[j].clone() + w2[i].clone() * w2[j].clone());
                out.push(term);
            }
        }
        out
    }
}

/// Eguchi-Hanson chart with bolt parameter `a`, on the annulus `r > a`
/// with the antipodal identification recorded as deck group.
pub fn eguchi_hanson(a: f64) -> Result<MetricChart> {
    if a <= 0.0 {
        return Err(TaleError::DomainError("bolt parameter must be positive".into()));
    }
    let field = Arc::new(ExprField(EguchiHansonExpr { a4: a.powi(4) }));
    let chart = MetricChart::new(
        format!("eguchi-hanson(a={a})"),
        field,
        Domain::Annulus { inner: a },
    );
    let deck = FiniteRotationGroup::cyclic_so4(2, 1, 1)?;
    Ok(chart.with_deck(deck))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::curvature::curvature_at;
    use crate::sampling::sphere_direction;

    fn point_at(r: f64, k: u64) -> Vec<f64> {
        sphere_direction(4, k).iter().map(|d| d * r).collect()
    }

    #[test]
    fn positive_definite_on_annulus() {
        let chart = eguchi_hanson(1.0).unwrap();
        for k in 0..20 {
            let r = 1.05 + 0.5 * k as f64;
            let p = point_at(r, k);
            chart.check_spd(&p).unwrap();
        }
        // Determinant is positive just outside the bolt.
        let p = point_at(2f64.powf(0.25), 3);
        assert!(chart.metric(&p).unwrap().determinant() > 0.0);
    }

    #[test]
    fn evaluation_inside_bolt_radius_fails() {
        let chart = eguchi_hanson(1.0).unwrap();
        assert!(chart.metric(&[0.5, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn reduces_to_flat_at_large_radius() {
        let chart = eguchi_hanson(1.0).unwrap();
        for k in 0..8 {
            let rho = 10.0 * 2f64.powi(k % 4);
            let p = point_at(rho, k as u64);
            let dev = (chart.metric(&p).unwrap() - nalgebra::DMatrix::<f64>::identity(4, 4))
                .abs()
                .max();
            // Coordinate deviation decays like rho^{-4}.
            assert!(dev < 3.0 / rho.powi(4), "rho = {rho}, dev = {dev}");
            assert!(dev > 0.05 / rho.powi(4), "rho = {rho}, dev = {dev}");
        }
    }

    #[test]
    fn ricci_flat_with_exact_derivatives() {
        let chart = eguchi_hanson(1.0).unwrap();
        let mut worst: f64 = 0.0;
        for k in 0..40 {
            let r = 1.1 + 8.9 * crate::sampling::halton(k + 1, 3);
            let p = point_at(r, k);
            let curv = curvature_at(&chart, &p).unwrap();
            worst = worst.max(curv.ricci.abs().max());
        }
        assert!(worst < 1e-6, "max |Ric| = {worst}");
    }

    #[test]
    fn curvature_is_nonflat_near_bolt() {
        let chart = eguchi_hanson(1.0).unwrap();
        let p = point_at(1.3, 5);
        let curv = curvature_at(&chart, &p).unwrap();
        assert!(curv.riemann_down.max_abs() > 0.01);
    }

    #[test]
    fn deck_group_recorded() {
        let chart = eguchi_hanson(2.0).unwrap();
        assert_eq!(chart.deck().unwrap().order(), 2);
        assert!(matches!(chart.domain(), Domain::Annulus { inner } if *inner == 2.0));
    }
}
