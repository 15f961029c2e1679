//! Orthonormal frames by Gram-Schmidt of the coordinate frame, and the
//! induced connection coefficients.
//!
//! Frames are chart-local and produced pointwise in a fixed column order, so
//! they vary smoothly wherever the metric does. Derivatives of the frame come
//! from running the same Gram-Schmidt over jet scalars, which keeps the
//! connection coefficients as exact as the metric derivatives.

use crate::error::{Result, TaleError};
use crate::jet::{Jet, Real};
use crate::metric::{curvature::christoffel, MetricChart};
use nalgebra::DMatrix;

/// Frame data at one point: the frame matrix (columns are the orthonormal
/// vectors in coordinates), its inverse, and the skew connection coefficients.
#[derive(Clone, Debug)]
pub struct FrameData {
    pub point: Vec<f64>,
    /// `frame[(k, i)]`: coordinate component `k` of frame vector `e_i`.
    pub frame: DMatrix<f64>,
    /// Coordinate components -> frame components.
    pub frame_inv: DMatrix<f64>,
    /// `omega[a][(i, j)] = g(nabla_{d_a} e_i, e_j)`, skew in `(i, j)`.
    pub omega: Vec<DMatrix<f64>>,
}

impl FrameData {
    /// Frame components of a coordinate vector.
    pub fn to_frame(&self, v: &[f64]) -> Vec<f64> {
        let n = v.len();
        (0..n)
            .map(|i| (0..n).map(|k| self.frame_inv[(i, k)] * v[k]).sum())
            .collect()
    }

    /// Coordinate components of a frame vector.
    pub fn to_coordinates(&self, v: &[f64]) -> Vec<f64> {
        let n = v.len();
        (0..n)
            .map(|k| (0..n).map(|i| self.frame[(k, i)] * v[i]).sum())
            .collect()
    }

    /// Connection coefficients contracted with a coordinate direction `x`:
    /// the skew matrix `omega_ij(x)`.
    pub fn omega_in_direction(&self, x: &[f64]) -> DMatrix<f64> {
        let n = x.len();
        let mut acc = DMatrix::zeros(n, n);
        for (a, xa) in x.iter().enumerate() {
            if *xa != 0.0 {
                acc += &self.omega[a] * *xa;
            }
        }
        acc
    }
}

/// Orthonormal frame field over a chart.
#[derive(Clone)]
pub struct FrameField {
    chart: MetricChart,
    /// Coordinate directions in the order Gram-Schmidt consumes them; the
    /// i-th frame vector is built from the `order[i]`-th coordinate direction.
    order: Vec<usize>,
}

/// Gram-Schmidt of the coordinate basis (taken in the given order) against
/// the metric `g`, generic over the scalar. Entries of the result are the
/// frame columns.
fn gram_schmidt<T: Real>(n: usize, g: &[T], order: &[usize]) -> Vec<T> {
    let zero = g[0].constant_like(0.0);
    // columns[i][k]: component k of e_i.
    let mut cols: Vec<Vec<T>> = Vec::with_capacity(n);
    for i in 0..n {
        let start = order[i];
        let mut v: Vec<T> = (0..n)
            .map(|k| g[0].constant_like(if k == start { 1.0 } else { 0.0 }))
            .collect();
        for e in cols.iter().take(i) {
            // inner = <d_i, e_j>_g = sum_k g[i][k] e_j[k]  (v is still the raw
            // basis vector here only on the first pass; recompute generally)
            let mut inner = zero.clone();
            for k in 0..n {
                for l in 0..n {
                    inner = inner + g[k * n + l].clone() * v[k].clone() * e[l].clone();
                }
            }
            for k in 0..n {
                v[k] = v[k].clone() - inner.clone() * e[k].clone();
            }
        }
        let mut norm2 = zero.clone();
        for k in 0..n {
            for l in 0..n {
                norm2 = norm2 + g[k * n + l].clone() * v[k].clone() * v[l].clone();
            }
        }
        let inv_norm = norm2.sqrt().recip();
        for k in 0..n {
            v[k] = v[k].clone() * inv_norm.clone();
        }
        cols.push(v);
    }
    let mut out = Vec::with_capacity(n * n);
    for k in 0..n {
        for col in cols.iter().take(n) {
            out.push(col[k].clone());
        }
    }
    out
}

impl FrameField {
    pub fn new(chart: MetricChart) -> Self {
        let order = (0..chart.dim()).collect();
        FrameField { chart, order }
    }

    /// Same chart, with Gram-Schmidt consuming the coordinate directions in a
    /// different order. Different orders give gauge-equivalent frames.
    pub fn with_column_order(chart: MetricChart, order: Vec<usize>) -> Result<Self> {
        let n = chart.dim();
        let mut seen = vec![false; n];
        for &i in &order {
            if i >= n || seen[i] {
                return Err(TaleError::Numerical("invalid frame column order".into()));
            }
            seen[i] = true;
        }
        if order.len() != n {
            return Err(TaleError::Numerical("invalid frame column order".into()));
        }
        Ok(FrameField { chart, order })
    }

    pub fn chart(&self) -> &MetricChart {
        &self.chart
    }

    /// Frame matrix only (no derivatives).
    pub fn frame_at(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.chart.dim();
        let g = self.chart.metric(p)?;
        let entries: Vec<f64> = (0..n * n).map(|k| g[(k / n, k % n)]).collect();
        let cols = gram_schmidt::<f64>(n, &entries, &self.order);
        Ok(DMatrix::from_row_slice(n, n, &cols))
    }

    /// Frame, inverse frame, and connection coefficients at a point.
    pub fn at(&self, p: &[f64]) -> Result<FrameData> {
        let n = self.chart.dim();
        let jet = self.chart.jet1(p)?;
        let gamma = christoffel(&jet)?;

        // Frame and its coordinate derivatives via jets seeded at p.
        let mut g_jets = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut grad = vec![0.0; n];
                for a in 0..n {
                    grad[a] = jet.dg[a][(i, j)];
                }
                g_jets.push(Jet::from_parts(jet.g[(i, j)], &grad));
            }
        }
        let cols = gram_schmidt::<Jet>(n, &g_jets, &self.order);
        let frame = DMatrix::from_fn(n, n, |k, i| cols[k * n + i].v);
        let dframe: Vec<DMatrix<f64>> = (0..n)
            .map(|a| DMatrix::from_fn(n, n, |k, i| cols[k * n + i].g(a)))
            .collect();
        let frame_inv = frame.clone().try_inverse().ok_or_else(|| {
            TaleError::Numerical("frame matrix is singular".into())
        })?;

        // nabla_{d_a} e_i = sum_k (d_a E^k_i + Gamma^k_{a b} E^b_i) d_k
        let mut omega = vec![DMatrix::zeros(n, n); n];
        for a in 0..n {
            let mut cov = DMatrix::<f64>::zeros(n, n); // [(k, i)]
            for i in 0..n {
                for k in 0..n {
                    let mut s = dframe[a][(k, i)];
                    for b in 0..n {
                        s += gamma[k][(a, b)] * frame[(b, i)];
                    }
                    cov[(k, i)] = s;
                }
            }
            // omega[a][(i, j)] = g(nabla_a e_i, e_j)
            for i in 0..n {
                for j in 0..n {
                    let mut s = 0.0;
                    for k in 0..n {
                        for l in 0..n {
                            s += jet.g[(k, l)] * cov[(k, i)] * frame[(l, j)];
                        }
                    }
                    omega[a][(i, j)] = s;
                }
            }
        }

        Ok(FrameData {
            point: p.to_vec(),
            frame,
            frame_inv,
            omega,
        })
    }

    /// `frame^T g frame - I`, which should vanish.
    pub fn orthonormality_residual(&self, p: &[f64]) -> Result<f64> {
        let g = self.chart.metric(p)?;
        let e = self.frame_at(p)?;
        let n = self.chart.dim();
        Ok((e.transpose() * g * e - DMatrix::<f64>::identity(n, n))
            .abs()
            .max())
    }

    /// Largest symmetric part of the connection coefficients, which should vanish.
    pub fn skewness_residual(&self, p: &[f64]) -> Result<f64> {
        let data = self.at(p)?;
        let mut worst: f64 = 0.0;
        for a in 0..self.chart.dim() {
            worst = worst.max((&data.omega[a] + data.omega[a].transpose()).abs().max());
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{eguchi_hanson, flat_metric, round_sphere_chart};

    #[test]
    fn flat_frame_is_identity_with_zero_connection() {
        let ff = FrameField::new(flat_metric(4));
        let data = ff.at(&[0.3, -0.4, 0.1, 0.9]).unwrap();
        assert!((data.frame - DMatrix::<f64>::identity(4, 4)).abs().max() < 1e-14);
        for a in 0..4 {
            assert!(data.omega[a].abs().max() < 1e-14);
        }
    }

    #[test]
    fn frames_are_orthonormal_and_connection_skew() {
        for chart in [
            round_sphere_chart(4, 1.0).unwrap(),
            eguchi_hanson(1.0).unwrap(),
        ] {
            let ff = FrameField::new(chart);
            for k in 0..6u64 {
                let p: Vec<f64> = crate::sampling::sphere_direction(4, 17 + k)
                    .iter()
                    .map(|d| d * (1.4 + 0.3 * k as f64))
                    .collect();
                assert!(ff.orthonormality_residual(&p).unwrap() < 1e-10);
                assert!(ff.skewness_residual(&p).unwrap() < 1e-10);
            }
        }
    }

    #[test]
    fn frame_derivatives_match_finite_differences() {
        let chart = round_sphere_chart(4, 1.0).unwrap();
        let ff = FrameField::new(chart);
        let p = [0.3, 0.1, -0.2, 0.4];
        let h = 1e-5;
        let data = ff.at(&p).unwrap();
        // Reconstruct dE by finite differences and compare omega against a
        // directly assembled version.
        for a in 0..4 {
            let mut pp = p;
            let mut pm = p;
            pp[a] += h;
            pm[a] -= h;
            let ep = ff.frame_at(&pp).unwrap();
            let em = ff.frame_at(&pm).unwrap();
            let fd = (ep - em) / (2.0 * h);
            // Compare the antisymmetrized connection built from fd with omega.
            let jet = ff.chart().jet1(&p).unwrap();
            let gamma = christoffel(&jet).unwrap();
            let mut cov = DMatrix::<f64>::zeros(4, 4);
            for i in 0..4 {
                for k in 0..4 {
                    let mut s = fd[(k, i)];
                    for b in 0..4 {
                        s += gamma[k][(a, b)] * data.frame[(b, i)];
                    }
                    cov[(k, i)] = s;
                }
            }
            let mut omega_fd = DMatrix::<f64>::zeros(4, 4);
            for i in 0..4 {
                for j in 0..4 {
                    let mut s = 0.0;
                    for k in 0..4 {
                        for l in 0..4 {
                            s += jet.g[(k, l)] * cov[(k, i)] * data.frame[(l, j)];
                        }
                    }
                    omega_fd[(i, j)] = s;
                }
            }
            assert!((&omega_fd - &data.omega[a]).abs().max() < 1e-8);
        }
    }
}
