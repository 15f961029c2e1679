//! Christoffel symbols and curvature tensors of a metric chart.
//!
//! Conventions: `R(X, Y)Z = [nabla_X, nabla_Y] Z - nabla_{[X,Y]} Z`,
//! `Ric(X, Y) = trace(Z -> R(Z, X) Y)`, fixed so that the unit round sphere
//! has `Ric = (n-1) g` and scalar curvature `n (n-1)`.

use super::{MetricChart, MetricJet};
use crate::error::{Result, TaleError};
use nalgebra::DMatrix;

/// Dense four-index tensor, `n^4` entries.
#[derive(Clone, Debug)]
pub struct Tensor4 {
    pub n: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Tensor4 { n, data: vec![0.0; n * n * n * n] }
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.data[((a * self.n + b) * self.n + c) * self.n + d]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, d: usize, v: f64) {
        self.data[((a * self.n + b) * self.n + c) * self.n + d] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Christoffel symbols, Riemann tensor (both index positions), Ricci tensor
/// (bilinear form and endomorphism) and scalar curvature at one point.
#[derive(Clone, Debug)]
pub struct CurvatureBundle {
    /// `christoffel[k][(i, j)] = Gamma^k_ij`
    pub christoffel: Vec<DMatrix<f64>>,
    /// `riemann_up.get(l, k, i, j) = R^l_kij`, the `dy_l`-component of `R(d_i, d_j) d_k`.
    pub riemann_up: Tensor4,
    /// `riemann_down.get(i, j, k, l) = g(R(d_i, d_j) d_k, d_l)`.
    pub riemann_down: Tensor4,
    /// Ricci as a bilinear form.
    pub ricci: DMatrix<f64>,
    /// Ricci as an endomorphism, `g^{-1} Ric`.
    pub ricci_endo: DMatrix<f64>,
    pub scalar: f64,
}

/// Christoffel symbols from a metric jet.
pub fn christoffel(jet: &MetricJet) -> Result<Vec<DMatrix<f64>>> {
    let n = jet.g.nrows();
    let ginv = jet
        .g
        .clone()
        .try_inverse()
        .ok_or_else(|| TaleError::Numerical("metric is singular".into()))?;
    let mut out = vec![DMatrix::zeros(n, n); n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += ginv[(k, l)]
                        * (jet.dg[i][(j, l)] + jet.dg[j][(i, l)] - jet.dg[l][(i, j)]);
                }
                out[k][(i, j)] = 0.5 * s;
            }
        }
    }
    Ok(out)
}

/// Full curvature data at a point, from exact second derivatives when the
/// chart provides them and finite differences otherwise.
pub fn curvature_at(chart: &MetricChart, p: &[f64]) -> Result<CurvatureBundle> {
    let jet = chart.jet2(p)?;
    curvature_from_jet(&jet)
}

pub fn curvature_from_jet(jet: &MetricJet) -> Result<CurvatureBundle> {
    let n = jet.g.nrows();
    let d2g = jet
        .d2g
        .as_ref()
        .ok_or_else(|| TaleError::Numerical("second derivatives required".into()))?;
    let ginv = jet
        .g
        .clone()
        .try_inverse()
        .ok_or_else(|| TaleError::Numerical("metric is singular".into()))?;
    let gamma = christoffel(jet)?;

    // d_a Gamma^k_ij, assembled from d(g^{-1}) = -g^{-1} (d g) g^{-1} and d^2 g.
    let mut dgamma = vec![vec![DMatrix::<f64>::zeros(n, n); n]; n]; // [a][k](i,j)
    for a in 0..n {
        let dginv = -&ginv * &jet.dg[a] * &ginv;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut s = 0.0;
                    for l in 0..n {
                        s += dginv[(k, l)]
                            * (jet.dg[i][(j, l)] + jet.dg[j][(i, l)] - jet.dg[l][(i, j)]);
                        s += ginv[(k, l)]
                            * (d2g[a][i][(j, l)] + d2g[a][j][(i, l)] - d2g[a][l][(i, j)]);
                    }
                    dgamma[a][k][(i, j)] = 0.5 * s;
                }
            }
        }
    }

    // R^l_kij = d_i Gamma^l_jk - d_j Gamma^l_ik + Gamma^l_im Gamma^m_jk - Gamma^l_jm Gamma^m_ik
    let mut up = Tensor4::zeros(n);
    for l in 0..n {
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut v = dgamma[i][l][(j, k)] - dgamma[j][l][(i, k)];
                    for m in 0..n {
                        v += gamma[l][(i, m)] * gamma[m][(j, k)]
                            - gamma[l][(j, m)] * gamma[m][(i, k)];
                    }
                    up.set(l, k, i, j, v);
                }
            }
        }
    }

    let mut down = Tensor4::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut v = 0.0;
                    for m in 0..n {
                        v += jet.g[(m, l)] * up.get(m, k, i, j);
                    }
                    down.set(i, j, k, l, v);
                }
            }
        }
    }

    let mut ricci = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut v = 0.0;
            for a in 0..n {
                v += up.get(a, j, a, i);
            }
            ricci[(i, j)] = v;
        }
    }
    let ricci_endo = &ginv * &ricci;
    let scalar = ricci_endo.trace();

    Ok(CurvatureBundle {
        christoffel: gamma,
        riemann_up: up,
        riemann_down: down,
        ricci,
        ricci_endo,
        scalar,
    })
}

impl CurvatureBundle {
    /// Largest violation of the algebraic Riemann symmetries and of the first
    /// Bianchi identity, relative to the tensor magnitude.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.riemann_down.n;
        let scale = self.riemann_down.max_abs().max(1e-30);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let r = self.riemann_down.get(i, j, k, l);
                        worst = worst.max((r + self.riemann_down.get(j, i, k, l)).abs());
                        worst = worst.max((r + self.riemann_down.get(i, j, l, k)).abs());
                        worst = worst.max((r - self.riemann_down.get(k, l, i, j)).abs());
                        let bianchi = r
                            + self.riemann_down.get(j, k, i, l)
                            + self.riemann_down.get(k, i, j, l);
                        worst = worst.max(bianchi.abs());
                    }
                }
            }
        }
        worst / scale
    }

    /// `trace(g^{-1} Ric) - s`, which should vanish identically.
    pub fn trace_consistency(&self) -> f64 {
        (self.ricci_endo.trace() - self.scalar).abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::charts::{flat_metric, round_sphere_chart};
    use approx::assert_relative_eq;

    #[test]
    fn flat_curvature_vanishes() {
        let chart = flat_metric(4);
        let c = curvature_at(&chart, &[0.4, -0.3, 1.0, 2.0]).unwrap();
        assert!(c.riemann_down.max_abs() < 1e-10);
        assert!(c.ricci.abs().max() < 1e-10);
        assert!(c.scalar.abs() < 1e-10);
    }

    #[test]
    fn unit_sphere_normalization() {
        // Scalar curvature n(n-1) and Ric = (n-1) g pin the sign conventions.
        for (n, p) in [(2usize, vec![0.3, -0.1]), (4, vec![0.3, -0.1, 0.22, 0.4])] {
            let chart = round_sphere_chart(n, 1.0).unwrap();
            let c = curvature_at(&chart, &p).unwrap();
            assert_relative_eq!(c.scalar, (n * (n - 1)) as f64, epsilon = 1e-9);
            let g = chart.metric(&p).unwrap();
            let dev = (&c.ricci - &g * (n as f64 - 1.0)).abs().max();
            assert!(dev < 1e-9, "Ric - (n-1) g deviates by {dev}");
        }
    }

    #[test]
    fn sphere_radius_scaling() {
        let chart = round_sphere_chart(4, 2.0).unwrap();
        let c = curvature_at(&chart, &[0.5, 0.0, -0.7, 0.1]).unwrap();
        assert_relative_eq!(c.scalar, 12.0 / 4.0, epsilon = 1e-9);
    }

    #[test]
    fn riemann_symmetries_on_sphere_and_eh() {
        let sphere = round_sphere_chart(4, 1.0).unwrap();
        let c = curvature_at(&sphere, &[0.2, 0.6, -0.1, 0.05]).unwrap();
        assert!(c.symmetry_residual() < 1e-9);
        assert!(c.trace_consistency() < 1e-10);

        let eh = crate::metric::eguchi_hanson(1.0).unwrap();
        let c = curvature_at(&eh, &[1.4, 0.3, -0.5, 0.2]).unwrap();
        assert!(c.symmetry_residual() < 1e-8);
        assert!(c.trace_consistency() < 1e-10);
    }

    #[test]
    fn conformal_rescale_of_flat_matches_sphere_curvature() {
        let flat = flat_metric(4);
        let resc =
            crate::metric::conformal_rescale(&flat, crate::metric::ScalarFactor::SphereFactor)
                .unwrap();
        let sphere = round_sphere_chart(4, 1.0).unwrap();
        for k in 0..6 {
            let p: Vec<f64> = crate::sampling::sphere_direction(4, 90 + k)
                .iter()
                .map(|d| d * (0.2 + 0.3 * k as f64))
                .collect();
            let a = curvature_at(&resc, &p).unwrap();
            let b = curvature_at(&sphere, &p).unwrap();
            assert!((a.ricci - b.ricci).abs().max() < 1e-5);
            assert!((a.scalar - b.scalar).abs() < 1e-5);
        }
    }
}
