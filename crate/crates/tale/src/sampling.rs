//! Low-discrepancy direction sampling.
//!
//! Directions come from Halton sequences mapped to the sphere, so every
//! consumer is deterministic and independent of thread scheduling: the k-th
//! direction is a pure function of k.

/// Radical-inverse (van der Corput) value of `index` in the given base.
pub fn halton(index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let mut i = index;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// The k-th low-discrepancy direction on the unit sphere `S^{n-1}`, `n <= 4`.
///
/// For `n = 4` the map uses Hopf coordinates: with `(v, a, b)` uniform in the
/// unit cube, `(sqrt(v) e^{2 pi i a}, sqrt(1-v) e^{2 pi i b})` is uniform on
/// `S^3`.
pub fn sphere_direction(n: usize, k: u64) -> Vec<f64> {
    let idx = k + 1;
    match n {
        2 => {
            let t = 2.0 * std::f64::consts::PI * halton(idx, 2);
            vec![t.cos(), t.sin()]
        }
        3 => {
            let z = 2.0 * halton(idx, 2) - 1.0;
            let phi = 2.0 * std::f64::consts::PI * halton(idx, 3);
            let s = (1.0 - z * z).max(0.0).sqrt();
            vec![s * phi.cos(), s * phi.sin(), z]
        }
        4 => {
            let v = halton(idx, 2);
            let a = 2.0 * std::f64::consts::PI * halton(idx, 3);
            let b = 2.0 * std::f64::consts::PI * halton(idx, 5);
            let (r1, r2) = (v.sqrt(), (1.0 - v).sqrt());
            vec![r1 * a.cos(), r1 * a.sin(), r2 * b.cos(), r2 * b.sin()]
        }
        _ => panic!("sphere_direction supports n in {{2, 3, 4}}, got {n}"),
    }
}

/// Area of the unit sphere `S^{n-1}`.
pub fn sphere_area(n: usize) -> f64 {
    use std::f64::consts::PI;
    match n {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        4 => 2.0 * PI * PI,
        5 => 8.0 * PI * PI / 3.0,
        6 => PI * PI * PI,
        _ => panic!("sphere_area supports n <= 6"),
    }
}

/// Volume of the unit ball in `R^n`.
pub fn ball_volume_euclidean(n: usize) -> f64 {
    sphere_area(n) / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn halton_first_values_base2() {
        assert_relative_eq!(halton(1, 2), 0.5);
        assert_relative_eq!(halton(2, 2), 0.25);
        assert_relative_eq!(halton(3, 2), 0.75);
    }

    #[test]
    fn directions_are_unit() {
        for n in [2, 3, 4] {
            for k in 0..50 {
                let d = sphere_direction(n, k);
                let r: f64 = d.iter().map(|x| x * x).sum();
                assert_relative_eq!(r, 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn s3_moments_vanish() {
        // First and mixed second moments of the uniform measure on S^3.
        let count = 4096;
        let mut mean = [0.0; 4];
        let mut second = [0.0; 4];
        for k in 0..count {
            let d = sphere_direction(4, k);
            for i in 0..4 {
                mean[i] += d[i];
                second[i] += d[i] * d[i];
            }
        }
        for m in mean {
            assert!((m / count as f64).abs() < 0.02);
        }
        for s in second {
            assert!((s / count as f64 - 0.25).abs() < 0.02);
        }
    }

    #[test]
    fn euclidean_ball_volume_dim4() {
        assert_relative_eq!(
            ball_volume_euclidean(4),
            std::f64::consts::PI.powi(2) / 2.0,
            epsilon = 1e-12
        );
    }
}
