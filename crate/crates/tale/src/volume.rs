//! Geodesic ball volumes and the relative volume function
//! `psi(r) = vol B(p, r) / (omega_n r^n)`.
//!
//! Volumes are computed by polar integration: low-discrepancy directions on
//! the unit sphere of the tangent space, the exponential-map Jacobian along
//! each ray by finite differences of neighbouring geodesics, and per-cell
//! Simpson quadrature in the radial variable (exact for the flat `t^{n-1}`
//! integrand, so flat charts come out to round-off).
//!
//! Charts with an identification group are handled in two ways: the volume is
//! divided by the order of the isotropy subgroup of the center, and rays are
//! truncated where a deck image of the center becomes closer than the center
//! itself (the coordinate mediatrix, exact on flat charts and asymptotically
//! exact on decaying ones). Conjugate points are detected by a sign change of
//! the Jacobian and truncate the ray with a flag.

use crate::error::{Result, TaleError};
use crate::metric::geodesic::geodesic_rhs;
use crate::metric::{MetricChart, OdeOptions};
use crate::sampling::{ball_volume_euclidean, sphere_area, sphere_direction};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

/// Angular step for the finite-difference exponential Jacobian.
const ANGLE_STEP: f64 = 1e-4;

/// Ray truncation flags accumulated over the sampled directions.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct VolumeFlags {
    /// Fraction of directions truncated at a conjugate point.
    pub conjugate_fraction: f64,
    /// Fraction of directions that left the chart domain.
    pub domain_exit_fraction: f64,
    /// Fraction of directions truncated at a deck mediatrix.
    pub deck_cut_fraction: f64,
}

impl VolumeFlags {
    /// More than one percent of rays hit a conjugate point or the boundary.
    pub fn approximate(&self) -> bool {
        self.conjugate_fraction + self.domain_exit_fraction > 0.01
    }
}

/// Monte-Carlo ball volume with its standard error.
#[derive(Clone, Debug)]
pub struct BallVolume {
    pub radius: f64,
    pub volume: f64,
    pub stderr: f64,
    pub flags: VolumeFlags,
}

/// Sampled values of `psi(r) = vol B(p, r) / (omega_n r^n)`.
#[derive(Clone, Debug)]
pub struct VolumeRatioTable {
    pub point: Vec<f64>,
    pub radii: Vec<f64>,
    pub psi: Vec<f64>,
    pub stderr: Vec<f64>,
    pub samples: usize,
    /// Order of the isotropy subgroup at the center.
    pub deck_order_at_point: usize,
    /// Order of the identification group of the chart end.
    pub deck_order_at_infinity: usize,
    pub flags: Vec<VolumeFlags>,
}

#[derive(Clone, Copy, PartialEq)]
enum RayStop {
    None,
    Conjugate(f64),
    DomainExit(f64),
    DeckCut(f64),
}

impl RayStop {
    fn time(&self) -> f64 {
        match self {
            RayStop::None => f64::INFINITY,
            RayStop::Conjugate(t) | RayStop::DomainExit(t) | RayStop::DeckCut(t) => *t,
        }
    }
}

struct RayResult {
    /// Jacobian at every node, zeroed beyond the stop time.
    jacobian: Vec<f64>,
    stop: RayStop,
}

/// Integrate a bundle of geodesics (center ray plus angular perturbations)
/// from `p`, landing exactly on `nodes`, and record the exponential-map
/// Jacobian at each node.
fn trace_ray(
    chart: &MetricChart,
    p: &[f64],
    frame: &DMatrix<f64>,
    dir_index: u64,
    nodes: &[f64],
    deck_images: &[Vec<f64>],
    opts: &OdeOptions,
) -> Result<RayResult> {
    let n = chart.dim();
    let u = sphere_direction(n, dir_index);

    // Complete u to a Euclidean orthonormal basis of the parameter sphere.
    let mut basis: Vec<Vec<f64>> = vec![u.clone()];
    for axis in 0..n {
        if basis.len() == n {
            break;
        }
        let mut v = vec![0.0; n];
        v[axis] = 1.0;
        for b in &basis {
            let inner: f64 = b.iter().zip(&v).map(|(a, c)| a * c).sum();
            for k in 0..n {
                v[k] -= inner * b[k];
            }
        }
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            basis.push(v.iter().map(|x| x / norm).collect());
        }
    }
    // Orient the completed basis positively, so the Jacobian determinant is
    // positive along unconjugated rays.
    let orient = DMatrix::from_fn(n, n, |i, j| basis[j][i]);
    if orient.determinant() < 0.0 {
        for x in basis[1].iter_mut() {
            *x = -*x;
        }
    }

    // Initial velocities: the frame makes each direction g-unit.
    let sinc = ANGLE_STEP.sin() / ANGLE_STEP;
    let mut velocities: Vec<Vec<f64>> = Vec::with_capacity(2 * n - 1);
    let push_dir = |dirs: &mut Vec<Vec<f64>>, param: &[f64]| {
        let v: Vec<f64> = (0..n)
            .map(|k| (0..n).map(|i| frame[(k, i)] * param[i]).sum())
            .collect();
        dirs.push(v);
    };
    push_dir(&mut velocities, &u);
    for m in &basis[1..] {
        for sign in [1.0, -1.0] {
            let param: Vec<f64> = (0..n)
                .map(|i| ANGLE_STEP.cos() * u[i] + sign * ANGLE_STEP.sin() * m[i])
                .collect();
            push_dir(&mut velocities, &param);
        }
    }

    // All trajectories stacked into one state vector, advanced node to node
    // with a warm-started step size.
    let bundle = velocities.len();
    let mut state = DVector::<f64>::zeros(bundle * 2 * n);
    for (b, v) in velocities.iter().enumerate() {
        for i in 0..n {
            state[b * 2 * n + i] = p[i];
            state[b * 2 * n + n + i] = v[i];
        }
    }
    let rhs = |_t: f64, s: &DVector<f64>| -> DVector<f64> {
        let mut out = DVector::zeros(s.len());
        for b in 0..bundle {
            let block = s.rows(b * 2 * n, 2 * n).into_owned();
            let d = geodesic_rhs(chart, &block);
            for i in 0..2 * n {
                out[b * 2 * n + i] = d[i];
            }
        }
        out
    };

    let mut jacobian = vec![0.0; nodes.len()];
    let mut stop = RayStop::None;
    let mut prev_t = 0.0;
    let mut prev_deck_gap: f64 = f64::INFINITY;
    let mut prev_node_t = 0.0;
    let mut warm_h: Option<f64> = None;

    'nodes: for (ni, &t) in nodes.iter().enumerate() {
        if t == 0.0 {
            jacobian[ni] = 0.0;
            continue;
        }
        // Advance the bundle to this node.
        let mut left_domain = false;
        let (tf, sf, h_last) = crate::metric::geodesic::integrate_observed_from(
            &rhs,
            prev_t,
            t,
            state.clone(),
            opts,
            warm_h,
            &mut |_tt, ss: &DVector<f64>| {
                let x: Vec<f64> = (0..n).map(|i| ss[i]).collect();
                if !chart.contains(&x)
                    || crate::metric::norm(&x) > crate::metric::geodesic::COORDINATE_CAP
                {
                    left_domain = true;
                    return false;
                }
                true
            },
        )?;
        if left_domain || (tf - t).abs() > 1e-9 * (1.0 + t) {
            stop = RayStop::DomainExit(prev_t);
            break 'nodes;
        }
        state = sf;
        warm_h = Some(h_last);
        prev_t = t;

        // Keep a safety margin from an annulus boundary: the perturbed
        // trajectories and the metric evaluation need room.
        let x: Vec<f64> = (0..n).map(|i| state[i]).collect();
        if let crate::metric::Domain::Annulus { inner } = chart.domain() {
            if crate::metric::norm(&x)
                <= inner * (1.0 + 2.0 * crate::metric::geodesic::DOMAIN_MARGIN)
            {
                stop = RayStop::DomainExit(t);
                break;
            }
        }

        // Jacobian: metric volume factor times the determinant of the
        // differential columns (velocity and angular differences).
        let g = chart.metric_unchecked(&x);
        let mut cols = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            cols[(i, 0)] = state[n + i];
        }
        for j in 1..n {
            let off_p = (2 * j - 1) * 2 * n;
            let off_m = (2 * j) * 2 * n;
            for i in 0..n {
                cols[(i, j)] = (state[off_p + i] - state[off_m + i]) / (2.0 * ANGLE_STEP * sinc);
            }
        }
        let det_g = g.determinant();
        if det_g <= 0.0 {
            stop = RayStop::DomainExit(t);
            break;
        }
        let jac = det_g.sqrt() * cols.determinant();
        if jac <= 0.0 {
            stop = RayStop::Conjugate(t);
            break;
        }

        // Deck mediatrix: a ray stops being minimizing once some image of the
        // center is closer (coordinate estimate of the rival distance).
        let mut deck_gap = f64::INFINITY;
        for q in deck_images {
            let d: f64 = x
                .iter()
                .zip(q)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            deck_gap = deck_gap.min(d - t);
        }
        if deck_gap <= 0.0 {
            // Locate the crossing by linear interpolation of the gap.
            let t_cut = if prev_deck_gap.is_finite() && prev_deck_gap > 0.0 {
                prev_node_t + (t - prev_node_t) * prev_deck_gap / (prev_deck_gap - deck_gap)
            } else {
                t
            };
            stop = RayStop::DeckCut(t_cut);
            break;
        }
        prev_deck_gap = deck_gap;
        prev_node_t = t;

        jacobian[ni] = jac;
    }

    Ok(RayResult { jacobian, stop })
}

/// Simpson nodes: cell boundaries (geometric spacing, with every requested
/// radius included as a boundary) interleaved with cell midpoints.
fn build_nodes(radii: &[f64], cells: usize) -> (Vec<f64>, Vec<usize>) {
    let r_max = radii.iter().cloned().fold(0.0, f64::max);
    let r_min = radii.iter().cloned().fold(f64::INFINITY, f64::min);
    let t_min = r_min / 8.0;
    let mut bounds: Vec<f64> = vec![0.0, t_min];
    for k in 1..=cells {
        bounds.push(t_min * (r_max / t_min).powf(k as f64 / cells as f64));
    }
    bounds.extend_from_slice(radii);
    bounds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    bounds.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * r_max);

    // Interleave midpoints: nodes = b0, m0, b1, m1, ..., b_last.
    let mut nodes = Vec::with_capacity(2 * bounds.len());
    for w in bounds.windows(2) {
        nodes.push(w[0]);
        nodes.push(0.5 * (w[0] + w[1]));
    }
    nodes.push(*bounds.last().unwrap());
    // Cell index of each requested radius (cumulative integral position).
    let radius_cells: Vec<usize> = radii
        .iter()
        .map(|r| {
            bounds
                .iter()
                .position(|b| (b - r).abs() < 1e-12 * r_max.max(1.0))
                .expect("radius is a cell boundary")
        })
        .collect();
    (nodes, radius_cells)
}

/// Cumulative Simpson integrals at each cell boundary, with a partial last
/// cell when the ray stops inside it.
fn cumulative_integrals(nodes: &[f64], jac: &[f64], stop: &RayStop) -> Vec<f64> {
    let cells = nodes.len() / 2;
    let mut cums = Vec::with_capacity(cells + 1);
    cums.push(0.0);
    let mut acc = 0.0;
    let t_stop = stop.time();
    for c in 0..cells {
        let (a, m, b) = (nodes[2 * c], nodes[2 * c + 1], nodes[2 * c + 2]);
        let (ja, jm, jb) = (jac[2 * c], jac[2 * c + 1], jac[2 * c + 2]);
        if b <= t_stop && (jb > 0.0 || b == 0.0) {
            acc += (b - a) / 6.0 * (ja + 4.0 * jm + jb);
        } else if a < t_stop {
            // Partial cell: trapezoid up to the stop with the last valid value.
            let t_end = t_stop.min(b);
            let j_end = if m <= t_stop && jm > 0.0 { jm } else { ja };
            if t_end > a {
                acc += 0.5 * (ja + j_end) * (t_end - a);
            }
        }
        cums.push(acc);
    }
    cums
}

/// Geodesic ball volumes at several radii around `p`, by polar Monte-Carlo
/// integration over `samples` directions.
pub fn ball_volumes(
    chart: &MetricChart,
    p: &[f64],
    radii: &[f64],
    samples: usize,
    opts: &OdeOptions,
) -> Result<Vec<BallVolume>> {
    let n = chart.dim();
    if radii.is_empty() {
        return Err(TaleError::InsufficientData("no radii requested".into()));
    }
    let mut sorted = radii.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if sorted[0] <= 0.0 {
        return Err(TaleError::DomainError("radii must be positive".into()));
    }
    if !chart.contains(p) {
        // The origin of a quotient or punctured chart is the one admissible
        // off-chart center: rays start there in every direction.
        let r = crate::metric::norm(p);
        if r != 0.0 {
            return Err(TaleError::DomainError(format!(
                "center {p:?} outside chart '{}'",
                chart.name()
            )));
        }
    }

    // Frame at the center; at the puncture of a quotient chart the metric is
    // the flat model and the frame is the identity.
    let frame = if chart.contains(p) {
        crate::spin::FrameField::new(chart.clone()).frame_at(p)?
    } else {
        DMatrix::identity(n, n)
    };

    // Deck data: the isotropy order divides the volume, non-fixing elements
    // cut rays at their mediatrix.
    let mut isotropy = 1usize;
    let mut images: Vec<Vec<f64>> = Vec::new();
    if let Some(deck) = chart.deck() {
        isotropy = 0;
        for m in deck.elements() {
            let q: Vec<f64> = (0..n)
                .map(|i| (0..n).map(|j| m[(i, j)] * p[j]).sum())
                .collect();
            let d: f64 = q
                .iter()
                .zip(p)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if d < 1e-9 {
                isotropy += 1;
            } else {
                images.push(q);
            }
        }
    }

    let (nodes, radius_cells) = build_nodes(&sorted, 48);

    let per_direction: Vec<Result<RayResult>> = (0..samples as u64)
        .into_par_iter()
        .map(|k| trace_ray(chart, p, &frame, k, &nodes, &images, opts))
        .collect();

    let mut sums = vec![0.0; sorted.len()];
    let mut sums_sq = vec![0.0; sorted.len()];
    let mut conj = 0usize;
    let mut exits = 0usize;
    let mut cuts = 0usize;
    for ray in per_direction {
        let ray = ray?;
        match ray.stop {
            RayStop::Conjugate(_) => conj += 1,
            RayStop::DomainExit(_) => exits += 1,
            RayStop::DeckCut(_) => cuts += 1,
            RayStop::None => {}
        }
        let cums = cumulative_integrals(&nodes, &ray.jacobian, &ray.stop);
        for (ri, &cell) in radius_cells.iter().enumerate() {
            let v = cums[cell];
            sums[ri] += v;
            sums_sq[ri] += v * v;
        }
    }

    let area = sphere_area(n);
    let k = samples as f64;
    let flags = VolumeFlags {
        conjugate_fraction: conj as f64 / k,
        domain_exit_fraction: exits as f64 / k,
        deck_cut_fraction: cuts as f64 / k,
    };
    let out = sorted
        .iter()
        .enumerate()
        .map(|(ri, &r)| {
            let mean = sums[ri] / k;
            let var = (sums_sq[ri] / k - mean * mean).max(0.0);
            BallVolume {
                radius: r,
                volume: area * mean / isotropy as f64,
                stderr: area * (var / k).sqrt() / isotropy as f64,
                flags,
            }
        })
        .collect();
    Ok(out)
}

/// Single-radius convenience wrapper.
pub fn ball_volume(
    chart: &MetricChart,
    p: &[f64],
    radius: f64,
    samples: usize,
    opts: &OdeOptions,
) -> Result<BallVolume> {
    Ok(ball_volumes(chart, p, &[radius], samples, opts)?.remove(0))
}

/// The exponential-map Jacobian `J(theta, t)` along one sampled direction,
/// normalized so flat space gives `t^{n-1}`.
pub fn exp_jacobian(
    chart: &MetricChart,
    p: &[f64],
    dir_index: u64,
    times: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<f64>> {
    let n = chart.dim();
    let frame = if chart.contains(p) {
        crate::spin::FrameField::new(chart.clone()).frame_at(p)?
    } else {
        DMatrix::identity(n, n)
    };
    let mut nodes = vec![0.0];
    nodes.extend_from_slice(times);
    let ray = trace_ray(chart, p, &frame, dir_index, &nodes, &[], opts)?;
    Ok(ray.jacobian[1..].to_vec())
}

/// Tabulate `psi(r) = vol B(p, r) / (omega_n r^n)` with statistical errors.
pub fn psi_table(
    chart: &MetricChart,
    p: &[f64],
    radii: &[f64],
    samples: usize,
    opts: &OdeOptions,
) -> Result<VolumeRatioTable> {
    let n = chart.dim();
    let volumes = ball_volumes(chart, p, radii, samples, opts)?;
    let omega = ball_volume_euclidean(n);
    let mut isotropy = 1usize;
    if let Some(deck) = chart.deck() {
        isotropy = deck
            .elements()
            .iter()
            .filter(|m| {
                let q: Vec<f64> = (0..n)
                    .map(|i| (0..n).map(|j| m[(i, j)] * p[j]).sum())
                    .collect();
                q.iter()
                    .zip(p)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
                    < 1e-9
            })
            .count();
    }
    Ok(VolumeRatioTable {
        point: p.to_vec(),
        radii: volumes.iter().map(|v| v.radius).collect(),
        psi: volumes
            .iter()
            .map(|v| v.volume / (omega * v.radius.powi(n as i32)))
            .collect(),
        stderr: volumes
            .iter()
            .map(|v| v.stderr / (omega * v.radius.powi(n as i32)))
            .collect(),
        samples,
        deck_order_at_point: isotropy,
        deck_order_at_infinity: chart.deck().map_or(1, |d| d.order()),
        flags: volumes.iter().map(|v| v.flags).collect(),
    })
}

/// Verdict of the monotonicity check with statistical slack.
#[derive(Clone, Debug)]
pub struct MonotoneVerdict {
    pub non_increasing: bool,
    /// Largest increase beyond the combined two-sigma slack.
    pub worst_violation: f64,
}

/// `psi` must not increase between consecutive radii beyond twice the
/// combined standard errors (plus round-off slack).
pub fn check_monotone(table: &VolumeRatioTable) -> MonotoneVerdict {
    let mut worst: f64 = 0.0;
    for i in 0..table.psi.len().saturating_sub(1) {
        let slack = 2.0 * (table.stderr[i].powi(2) + table.stderr[i + 1].powi(2)).sqrt() + 1e-9;
        let increase = table.psi[i + 1] - table.psi[i] - slack;
        worst = worst.max(increase);
    }
    MonotoneVerdict {
        non_increasing: worst <= 0.0,
        worst_violation: worst,
    }
}

/// Volume-admissibility of a configuration of claimed zeros with the given
/// singularity-group orders: the reciprocals must sum to at most one.
#[derive(Clone, Debug)]
pub struct ZeroSumVerdict {
    pub reciprocal_sum: f64,
    pub admissible: bool,
    /// A smooth zero (order one) next to others marks the configuration as
    /// contradicting uniqueness of smooth zeros.
    pub smooth_zero_must_be_unique: bool,
}

pub fn check_zero_sum_bound(orders: &[usize]) -> Result<ZeroSumVerdict> {
    if orders.iter().any(|o| *o == 0) {
        return Err(TaleError::InvalidGroup("zero group order".into()));
    }
    let sum: f64 = orders.iter().map(|o| 1.0 / *o as f64).sum();
    let has_smooth = orders.contains(&1);
    Ok(ZeroSumVerdict {
        reciprocal_sum: sum,
        admissible: sum <= 1.0 + 1e-12,
        smooth_zero_must_be_unique: has_smooth && orders.len() > 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{flat_metric, quotient_annulus, round_sphere_chart};
    use approx::assert_relative_eq;

    fn opts() -> OdeOptions {
        OdeOptions::bulk()
    }

    #[test]
    fn flat_jacobian_is_t_cubed() {
        let chart = flat_metric(4);
        let times = [0.3, 0.9, 1.7];
        let j = exp_jacobian(&chart, &[0.2, 0.0, -0.4, 0.1], 5, &times, &opts()).unwrap();
        for (t, jv) in times.iter().zip(&j) {
            assert_relative_eq!(*jv, t.powi(3), max_relative = 1e-9);
        }
    }

    #[test]
    fn sphere_jacobian_is_sin_cubed() {
        let chart = round_sphere_chart(4, 1.0).unwrap();
        let times = [0.4, 1.0, 2.0, 2.8];
        let j = exp_jacobian(&chart, &[0.0; 4], 3, &times, &opts()).unwrap();
        for (t, jv) in times.iter().zip(&j) {
            assert!((jv - t.sin().powi(3)).abs() < 1e-4, "J({t}) = {jv}");
        }
    }

    #[test]
    fn eh_small_time_jacobian_has_no_quadratic_correction() {
        // Ricci-flatness removes the t^2 term of J/t^3 - 1; the deviation
        // must scale like t^4 or faster.
        let chart = crate::metric::eguchi_hanson(1.0).unwrap();
        let p = [2.0, 0.0, 0.0, 0.0];
        let times = [0.1, 0.2, 0.4];
        let j = exp_jacobian(&chart, &p, 7, &times, &OdeOptions::default()).unwrap();
        let devs: Vec<f64> = times
            .iter()
            .zip(&j)
            .map(|(t, jv)| (jv / t.powi(3) - 1.0).abs().max(1e-14))
            .collect();
        let slope = ((devs[2] / devs[0]).ln()) / ((times[2] / times[0]).ln());
        assert!(slope > 3.4, "correction exponent {slope}, devs {devs:?}");
    }

    #[test]
    fn flat_unit_ball_volume() {
        let chart = flat_metric(4);
        let v = ball_volume(&chart, &[0.0; 4], 1.0, 128, &opts()).unwrap();
        assert_relative_eq!(
            v.volume,
            std::f64::consts::PI.powi(2) / 2.0,
            max_relative = 1e-9
        );
        assert!(v.stderr < 1e-9);
        assert!(!v.flags.approximate());
    }

    #[test]
    fn flat_quotient_halves_the_volume() {
        let flat = flat_metric(4);
        let deck = crate::groups::FiniteRotationGroup::cyclic_so4(2, 1, 1).unwrap();
        let chart = quotient_annulus(&flat, deck).unwrap();
        let v = ball_volume(&chart, &[0.0; 4], 1.0, 128, &opts()).unwrap();
        assert_relative_eq!(
            v.volume,
            std::f64::consts::PI.powi(2) / 4.0,
            max_relative = 1e-9
        );
    }

    #[test]
    fn sphere_total_volume() {
        let chart = round_sphere_chart(4, 1.0).unwrap();
        let v = ball_volume(&chart, &[0.0; 4], std::f64::consts::PI, 256, &opts()).unwrap();
        let expect = 8.0 * std::f64::consts::PI.powi(2) / 3.0;
        assert!(
            (v.volume - expect).abs() / expect < 0.01,
            "sphere volume {} vs {expect}",
            v.volume
        );
        // The whole-sphere ball reaches the conjugate locus.
        assert!(v.flags.conjugate_fraction + v.flags.domain_exit_fraction > 0.5);
    }

    #[test]
    fn flat_quotient_psi_is_exactly_half() {
        let flat = flat_metric(4);
        let deck = crate::groups::FiniteRotationGroup::cyclic_so4(2, 1, 1).unwrap();
        let chart = quotient_annulus(&flat, deck).unwrap();
        let radii: Vec<f64> = (0..8).map(|k| 0.3 * 1.6f64.powi(k)).collect();
        let table = psi_table(&chart, &[0.0; 4], &radii, 64, &opts()).unwrap();
        assert_eq!(table.deck_order_at_point, 2);
        for (psi, se) in table.psi.iter().zip(&table.stderr) {
            assert!((psi - 0.5).abs() <= 2.0 * se + 1e-9, "psi = {psi}");
        }
        let verdict = check_monotone(&table);
        assert!(verdict.non_increasing);
    }

    #[test]
    fn flat_quotient_generic_center_interpolates() {
        // Around a non-fixed point psi starts at 1 and falls to 1/2.
        let flat = flat_metric(4);
        let deck = crate::groups::FiniteRotationGroup::cyclic_so4(2, 1, 1).unwrap();
        let chart = quotient_annulus(&flat, deck).unwrap();
        let p = [1.0, 0.0, 0.0, 0.0];
        let table = psi_table(&chart, &p, &[0.5, 40.0], 512, &opts()).unwrap();
        assert_eq!(table.deck_order_at_point, 1);
        assert!((table.psi[0] - 1.0).abs() < 1e-6, "small-ball psi {}", table.psi[0]);
        assert!((table.psi[1] - 0.5).abs() < 0.03, "large-ball psi {}", table.psi[1]);
        assert!(table.flags[1].deck_cut_fraction > 0.4);
    }

    #[test]
    fn zero_sum_bound_reproduces_uniqueness_of_smooth_zeros() {
        // Two smooth zeros are inadmissible.
        let v = check_zero_sum_bound(&[1, 1]).unwrap();
        assert!(!v.admissible);
        // One smooth zero is fine.
        let v = check_zero_sum_bound(&[1]).unwrap();
        assert!(v.admissible && !v.smooth_zero_must_be_unique);
        // A smooth zero plus anything else is flagged.
        let v = check_zero_sum_bound(&[1, 2]).unwrap();
        assert!(!v.admissible && v.smooth_zero_must_be_unique);
        // Two order-two singular zeros saturate the bound.
        let v = check_zero_sum_bound(&[2, 2]).unwrap();
        assert!(v.admissible);
        assert!(check_zero_sum_bound(&[0]).is_err());
    }
}
