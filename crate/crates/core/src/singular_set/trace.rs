use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};

use super::augmented::{AugmentedPoint, AugmentedSystem};
use crate::error::{Error, Result};
use crate::linalg::realify;
use crate::{LinkMap, Tolerances};

/// Jacobian singular values below this suggest a crossing or singular branch.
pub const BIFURCATION_THRESHOLD: f64 = 1e-8;
/// Two traces closer than this (Hausdorff) are the same component.
pub const DEDUP_DISTANCE: f64 = 1e-4;
const SEED_RESIDUAL: f64 = 1e-10;
const CORRECTOR_ITERATIONS: usize = 10;
const MIN_TANGENT_ALIGNMENT: f64 = 0.95;
const HERMITE_SUBDIVISIONS: usize = 8;

/// An ordered polyline on one component of `S(h)`, with the image `h(z)` of
/// every point. For a closed trace the last point connects back to the first.
#[derive(Debug, Clone)]
pub struct CurveTrace {
    pub points: Vec<AugmentedPoint>,
    /// Unit tangents of the augmented curve, oriented along the trace.
    pub tangents: Vec<DVector<f64>>,
    pub closed: bool,
    /// Length of the `z`-curve.
    pub arc_length: f64,
    pub image: Vec<[f64; 2]>,
}

impl CurveTrace {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index pairs of consecutive points, including the closing pair.
    pub fn segments(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut segs: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        if self.closed && n > 2 {
            segs.push((n - 1, 0));
        }
        segs
    }

    fn z_real(&self, i: usize) -> DVector<f64> {
        realify(&self.points[i].z)
    }

    /// Unit tangent of the `z`-curve at point `i`.
    pub fn z_tangent(&self, i: usize) -> DVector<f64> {
        let m2 = self.points[i].z.dim() * 2;
        let t = self.tangents[i].rows(0, m2).into_owned();
        let n = t.norm();
        if n == 0.0 {
            t
        } else {
            t / n
        }
    }

    /// Arc length of the `z`-curve between two consecutive points, using the
    /// circular arc through both points with the given end tangents.
    pub fn segment_arc(&self, i: usize, j: usize) -> f64 {
        let chord = (self.z_real(j) - self.z_real(i)).norm();
        let cos = self.z_tangent(i).dot(&self.z_tangent(j)).clamp(-1.0, 1.0);
        let phi = cos.acos();
        if phi < 1e-8 {
            chord
        } else {
            chord * (0.5 * phi) / (0.5 * phi).sin()
        }
    }

    /// Cumulative `z` arc length at each point, starting from 0.
    pub fn arc_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        let mut s = 0.0;
        for i in 0..self.len() {
            if i > 0 {
                s += self.segment_arc(i - 1, i);
            }
            out.push(s);
        }
        out
    }

    /// Cubic Hermite refinement of the `z`-curve, realified.
    pub fn dense_polyline(&self) -> Vec<DVector<f64>> {
        let mut out = Vec::new();
        if self.len() == 1 {
            out.push(self.z_real(0));
            return out;
        }
        for (i, j) in self.segments() {
            let (p0, p1) = (self.z_real(i), self.z_real(j));
            let l = self.segment_arc(i, j);
            let (t0, t1) = (self.z_tangent(i) * l, self.z_tangent(j) * l);
            for k in 0..HERMITE_SUBDIVISIONS {
                let s = k as f64 / HERMITE_SUBDIVISIONS as f64;
                let (s2, s3) = (s * s, s * s * s);
                let v = &p0 * (2.0 * s3 - 3.0 * s2 + 1.0)
                    + &t0 * (s3 - 2.0 * s2 + s)
                    + &p1 * (-2.0 * s3 + 3.0 * s2)
                    + &t1 * (s3 - s2);
                out.push(v);
            }
        }
        if !self.closed {
            out.push(self.z_real(self.len() - 1));
        } else {
            out.push(self.z_real(0));
        }
        out
    }

    /// Distance from a realified point to the refined `z`-curve.
    pub fn distance_to(&self, x: &DVector<f64>) -> f64 {
        polyline_distance(&self.dense_polyline(), x)
    }
}

fn segment_distance(a: &DVector<f64>, b: &DVector<f64>, x: &DVector<f64>) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let s = if len2 == 0.0 {
        0.0
    } else {
        ((x - a).dot(&ab) / len2).clamp(0.0, 1.0)
    };
    (a + ab * s - x).norm()
}

fn polyline_distance(poly: &[DVector<f64>], x: &DVector<f64>) -> f64 {
    if poly.len() == 1 {
        return (&poly[0] - x).norm();
    }
    poly.windows(2)
        .map(|w| segment_distance(&w[0], &w[1], x))
        .fold(f64::INFINITY, f64::min)
}

/// Symmetric Hausdorff distance between two traced `z`-curves, each point
/// set measured against the other's Hermite-refined polyline.
pub fn hausdorff_distance(a: &CurveTrace, b: &CurveTrace) -> f64 {
    let (pa, pb) = (a.dense_polyline(), b.dense_polyline());
    let one_way = |from: &CurveTrace, to: &[DVector<f64>]| {
        (0..from.len())
            .map(|i| polyline_distance(to, &from.z_real(i)))
            .fold(0.0, f64::max)
    };
    one_way(a, &pb).max(one_way(b, &pa))
}

/// Newton corrector on the augmented system bordered by the pseudo-arclength
/// condition `t·(y − predicted) = 0`. Returns the point and iteration count.
pub(crate) fn correct(
    system: &AugmentedSystem,
    predicted: &DVector<f64>,
    tangent: &DVector<f64>,
    tol: f64,
) -> Option<(DVector<f64>, usize)> {
    let mut y = predicted.clone();
    let n = y.len();
    for it in 0..CORRECTOR_ITERATIONS {
        let p = AugmentedPoint::from_vector(&y);
        let r = system.residual(&p);
        if !r.norm().is_finite() {
            return None;
        }
        if r.norm() <= tol && it > 0 {
            return Some((y, it));
        }
        let jac = system.jacobian(&p);
        let mut a = DMatrix::zeros(n, n);
        a.view_mut((0, 0), (n - 1, n)).copy_from(&jac);
        a.set_row(n - 1, &tangent.transpose());
        let mut g = DVector::zeros(n);
        g.rows_mut(0, n - 1).copy_from(&r);
        g[n - 1] = tangent.dot(&(&y - predicted));
        let dy = a.lu().solve(&g)?;
        y -= dy;
    }
    None
}

/// Orients a vector so its first clearly nonzero entry is positive.
fn canonical_sign(t: DVector<f64>) -> DVector<f64> {
    match t.iter().find(|v| v.abs() > 1e-8) {
        Some(v) if *v < 0.0 => -t,
        _ => t,
    }
}

/// Pseudo-arclength predictor–corrector continuation of the augmented
/// solution curve through `seed`.
///
/// The step adapts within `[step_min, step_max]·ε`. The trace closes when
/// it passes within half a step of its start with a tangent aligned to the
/// initial one; it is reported open after `max_trace_steps`.
pub fn trace_singular_curve(
    seed: &AugmentedPoint,
    map: &LinkMap,
    step: f64,
    tol: &Tolerances,
) -> Result<CurveTrace> {
    let system = AugmentedSystem::new(map);
    let eps = map.epsilon();
    let (h_min, h_max) = (tol.step_min * eps, tol.step_max * eps);
    let mut h = step.clamp(h_min, h_max);

    let seed_res = system.residual(seed).norm();
    if seed_res > SEED_RESIDUAL {
        return Err(Error::NonConvergence {
            iterations: 0,
            residual: seed_res,
        });
    }
    let (t0, sigma) = system.tangent(seed);
    if sigma < BIFURCATION_THRESHOLD {
        return Err(Error::BifurcationSuspected { sigma });
    }
    let t0 = canonical_sign(t0);
    let x0 = seed.to_vector();

    let mut points = vec![seed.clone()];
    let mut tangents = vec![t0.clone()];
    let mut x = x0.clone();
    let mut t = t0.clone();
    let mut travelled = 0.0;
    let mut closed = false;

    for _ in 0..tol.max_trace_steps {
        let predicted = &x + &t * h;
        let Some((y, iterations)) = correct(&system, &predicted, &t, tol.newton) else {
            h *= 0.5;
            if h < h_min {
                return Err(Error::StepCollapse { min_step: h_min });
            }
            continue;
        };
        let py = AugmentedPoint::from_vector(&y);
        let (tn, sigma) = system.tangent(&py);
        if sigma < BIFURCATION_THRESHOLD {
            return Err(Error::BifurcationSuspected { sigma });
        }
        let tn = if tn.dot(&t) < 0.0 { -tn } else { tn };
        let dist = (&y - &x).norm();
        if tn.dot(&t) < MIN_TANGENT_ALIGNMENT || dist > 2.0 * h {
            h *= 0.5;
            if h < h_min {
                return Err(Error::StepCollapse { min_step: h_min });
            }
            continue;
        }

        if points.len() >= 5 && travelled > 3.0 * h {
            let seg = &y - &x;
            let s = ((&x0 - &x).dot(&seg) / seg.norm_squared()).clamp(0.0, 1.0);
            let d = (&x + &seg * s - &x0).norm();
            if d < 0.5 * h && tn.dot(&t0) > 0.5 {
                closed = true;
                let beyond_start = s > 0.0 && s < 1.0;
                if !beyond_start && (&y - &x0).norm() > 1e-9 {
                    points.push(py);
                    tangents.push(tn);
                }
                break;
            }
        }

        points.push(py);
        tangents.push(tn.clone());
        travelled += dist;
        x = y;
        t = tn;
        if iterations <= 2 {
            h = (h * 1.3).min(h_max);
        } else if iterations >= 5 {
            h = (h * 0.7).max(h_min);
        }
    }

    let image = points.iter().map(|p| map.h_real(&p.z)).collect();
    let mut trace = CurveTrace {
        points,
        tangents,
        closed,
        arc_length: 0.0,
        image,
    };
    trace.arc_length = trace
        .segments()
        .iter()
        .map(|&(i, j)| trace.segment_arc(i, j))
        .sum();
    Ok(trace)
}

/// Traced components of `S(h)` and the seeds that could not be traced.
#[derive(Debug, Clone, Default)]
pub struct ComponentSet {
    pub traces: Vec<CurveTrace>,
    pub failures: Vec<String>,
}

fn lexicographic(a: &CurveTrace, b: &CurveTrace) -> Ordering {
    let (xa, xb) = (a.z_real(0), b.z_real(0));
    xa.iter()
        .zip(xb.iter())
        .map(|(u, v)| u.total_cmp(v))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

/// Traces every seed not already covered by an earlier component, drops
/// traces within Hausdorff distance 1e-4 of an existing one, and sorts the
/// result by first point.
pub fn collect_components(seeds: &[AugmentedPoint], map: &LinkMap, tol: &Tolerances) -> ComponentSet {
    let mut set = ComponentSet::default();
    let step = tol.step_init * map.epsilon();
    for (idx, seed) in seeds.iter().enumerate() {
        let x = realify(&seed.z);
        if set.traces.iter().any(|t| t.distance_to(&x) <= DEDUP_DISTANCE) {
            continue;
        }
        match trace_singular_curve(seed, map, step, tol) {
            Ok(trace) => {
                if set
                    .traces
                    .iter()
                    .all(|t| hausdorff_distance(t, &trace) > DEDUP_DISTANCE)
                {
                    set.traces.push(trace);
                }
            }
            Err(e) => set.failures.push(format!("seed {idx}: {e}")),
        }
    }
    set.traces.sort_by(lexicographic);
    set
}
