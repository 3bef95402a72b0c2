//! Fold classification of singular points and the round-fold-map check.
//!
//! At a fold `p` the differential of `h` restricted to `T_p K` has rank one
//! with image direction `d`. With `ν` the unit normal to `d`, the function
//! `⟨h, ν⟩` is critical at `p` and its Hessian on `ker dh_p` is the
//! quadratic part of the fold normal form. `ν` is oriented away from the
//! origin of the target, so `λ` (negative eigenvalues) is an outward count;
//! the absolute index `min(λ, 2n − 2 − λ)` does not depend on that choice.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{chart, random_link_point, tangent_frame, TangentFrame, RANK_THRESHOLD};
use crate::linalg::{orthonormal_complement, svd, symmetric_eigenvalues, symmetric_norm};
use crate::numdiff::{central_hessian, richardson_jacobian};
use crate::singular_set::CurveTrace;
use crate::{LinkMap, Tolerances};

/// `σ₂/σ₁` above this means `dh` has rank two.
pub const RANK_ONE_RATIO: f64 = 1e-6;
/// Minimum separation of non-adjacent image samples for injectivity.
pub const INJECTIVITY_DISTANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FoldKind {
    Definite,
    Indefinite,
    Degenerate,
}

/// First-order data of `h` at a candidate fold point.
#[derive(Debug, Clone)]
pub struct LocalFoldData {
    pub frame: TangentFrame,
    pub rank: usize,
    /// Orthonormal basis of `ker dh` in frame coordinates (`2n − 2` vectors of length `2n − 1`).
    pub kernel_basis: Vec<DVector<f64>>,
    /// Unit image direction of `dh`.
    pub image_dir: [f64; 2],
    /// Unit normal to `image_dir`, pointing away from the target origin.
    pub normal: [f64; 2],
    pub singular_values: [f64; 2],
}

/// Rank-one differential of `h` in a retraction chart at `z`, by Richardson
/// central differences.
pub fn local_fold_data(z: &[Complex64], map: &LinkMap, tol: &Tolerances) -> Result<LocalFoldData> {
    let frame = tangent_frame(z, &map.link)?;
    let k = frame.dim();
    let step = tol.jacobian_step * map.epsilon();
    let jac = richardson_jacobian(
        |u| chart(&frame, u, &map.link).map(|p| map.h_real(&p).to_vec()),
        2,
        k,
        step,
    )?;
    let d = svd(&jac);
    let s1 = d.sigma[0];
    let s2 = d.sigma.get(1).copied().unwrap_or(0.0);
    if s1 <= RANK_THRESHOLD {
        return Err(Error::RankZero { sigma: s1 });
    }
    if s2 / s1 > RANK_ONE_RATIO {
        return Err(Error::RankTwo { ratio: s2 / s1 });
    }
    let v1 = d.v.column(0).into_owned();
    let kernel_basis = orthonormal_complement(&[v1], k, RANK_THRESHOLD)
        .map_err(|norm| Error::DimensionCollapse { norm })?;
    let mut dir = [d.u[(0, 0)], d.u[(1, 0)]];
    let hz = map.h_real(z);
    let outward = |dir: [f64; 2]| dir[1] * hz[0] - dir[0] * hz[1];
    let flip = if (hz[0].hypot(hz[1])) > 1e-12 {
        outward(dir) < 0.0
    } else {
        dir[0] < 0.0 || (dir[0] == 0.0 && dir[1] < 0.0)
    };
    if flip {
        dir = [-dir[0], -dir[1]];
    }
    Ok(LocalFoldData {
        frame,
        rank: 1,
        kernel_basis,
        image_dir: dir,
        normal: [dir[1], -dir[0]],
        singular_values: [s1, s2],
    })
}

/// Hessian of `u ↦ ⟨h(chart(p, u)), ν⟩` on kernel directions.
pub fn intrinsic_hessian(data: &LocalFoldData, map: &LinkMap, tol: &Tolerances) -> Result<DMatrix<f64>> {
    let k = data.frame.dim();
    let nu = data.normal;
    let kernel = &data.kernel_basis;
    central_hessian(
        |s| {
            let mut u = vec![0.0; k];
            for (coef, w) in s.iter().zip(kernel) {
                for (ui, wi) in u.iter_mut().zip(w.iter()) {
                    *ui += coef * wi;
                }
            }
            let hv = map.h_real(&chart(&data.frame, &u, &map.link)?);
            Ok(hv[0] * nu[0] + hv[1] * nu[1])
        },
        kernel.len(),
        tol.hessian_step * map.epsilon(),
    )
}

/// Fold type of one singular point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointClassification {
    pub kind: FoldKind,
    pub negative_eigenvalues: usize,
    pub absolute_index: Option<usize>,
    pub eigenvalues: Vec<f64>,
}

/// Counts signs outside the relative dead band `[−τ‖H‖, τ‖H‖]`; any
/// eigenvalue inside it makes the point degenerate.
pub fn classify_hessian(hessian: &DMatrix<f64>, dead_band: f64) -> PointClassification {
    let eigenvalues = symmetric_eigenvalues(hessian);
    let band = dead_band * symmetric_norm(hessian);
    let lambda = eigenvalues.iter().filter(|e| **e < -band).count();
    let degenerate = eigenvalues.iter().any(|e| e.abs() <= band);
    let dim = eigenvalues.len();
    if degenerate {
        return PointClassification {
            kind: FoldKind::Degenerate,
            negative_eigenvalues: lambda,
            absolute_index: None,
            eigenvalues,
        };
    }
    let absolute = lambda.min(dim - lambda);
    PointClassification {
        kind: if absolute == 0 {
            FoldKind::Definite
        } else {
            FoldKind::Indefinite
        },
        negative_eigenvalues: lambda,
        absolute_index: Some(absolute),
        eigenvalues,
    }
}

pub fn classify_fold(z: &[Complex64], map: &LinkMap, tol: &Tolerances) -> Result<PointClassification> {
    let data = local_fold_data(z, map, tol)?;
    let hess = intrinsic_hessian(&data, map, tol)?;
    Ok(classify_hessian(&hess, tol.dead_band))
}

/// Least-squares circle through planar points: `(center, mean radius, max radial deviation)`.
pub fn fit_circle(points: &[[f64; 2]]) -> ([f64; 2], f64, f64) {
    if points.is_empty() {
        return ([0.0, 0.0], 0.0, 0.0);
    }
    // x² + y² + D x + E y + F = 0, solved in the least-squares sense
    let n = points.len();
    let a = DMatrix::from_fn(n, 3, |r, c| match c {
        0 => points[r][0],
        1 => points[r][1],
        _ => 1.0,
    });
    let b = DVector::from_fn(n, |r, _| -(points[r][0].powi(2) + points[r][1].powi(2)));
    let center = match a.clone().svd(true, true).solve(&b, 1e-14) {
        Ok(sol) if n >= 3 => [-0.5 * sol[0], -0.5 * sol[1]],
        _ => {
            let m = mean_point(points);
            [m[0], m[1]]
        }
    };
    let radii: Vec<f64> = points
        .iter()
        .map(|p| (p[0] - center[0]).hypot(p[1] - center[1]))
        .collect();
    let mean = radii.iter().sum::<f64>() / n as f64;
    let dev = radii.iter().map(|r| (r - mean).abs()).fold(0.0, f64::max);
    (center, mean, dev)
}

fn mean_point(points: &[[f64; 2]]) -> [f64; 2] {
    let n = points.len().max(1) as f64;
    let s = points
        .iter()
        .fold([0.0, 0.0], |acc, p| [acc[0] + p[0], acc[1] + p[1]]);
    [s[0] / n, s[1] / n]
}

/// Per-component fold summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldRecord {
    pub component_id: usize,
    pub kind: FoldKind,
    pub absolute_index: Option<usize>,
    pub negative_eigenvalues: usize,
    pub image_center: [f64; 2],
    pub image_radius_mean: f64,
    pub image_radius_deviation: f64,
    /// `h` is injective on the sampled component.
    pub embedding_ok: bool,
    /// All sampled points agree on `(kind, absolute_index)`.
    pub consistent: bool,
    pub samples: Vec<PointClassification>,
}

/// Classifies `samples` evenly spaced points of a traced component.
pub fn fold_record(
    component_id: usize,
    trace: &CurveTrace,
    map: &LinkMap,
    tol: &Tolerances,
    samples: usize,
) -> FoldRecord {
    let n = trace.len();
    let count = samples.clamp(1, n.max(1));
    let classified: Vec<PointClassification> = (0..count)
        .map(|s| s * n / count)
        .map(|i| {
            classify_fold(&trace.points[i].z, map, tol).unwrap_or(PointClassification {
                kind: FoldKind::Degenerate,
                negative_eigenvalues: 0,
                absolute_index: None,
                eigenvalues: Vec::new(),
            })
        })
        .collect();
    let first = classified.first().cloned();
    let consistent = classified.iter().all(|c| {
        first
            .as_ref()
            .is_some_and(|f| f.kind == c.kind && f.absolute_index == c.absolute_index)
    });
    let (kind, absolute_index, lambda) = match (&first, consistent) {
        (Some(f), true) => (f.kind, f.absolute_index, f.negative_eigenvalues),
        (Some(f), false) => (FoldKind::Degenerate, None, f.negative_eigenvalues),
        (None, _) => (FoldKind::Degenerate, None, 0),
    };
    let (center, mean, dev) = fit_circle(&trace.image);
    FoldRecord {
        component_id,
        kind,
        absolute_index,
        negative_eigenvalues: lambda,
        image_center: center,
        image_radius_mean: mean,
        image_radius_deviation: dev,
        embedding_ok: min_nonadjacent_distance(&trace.image, trace.closed) > INJECTIVITY_DISTANCE,
        consistent,
        samples: classified,
    }
}

fn min_nonadjacent_distance(points: &[[f64; 2]], closed: bool) -> f64 {
    let n = points.len();
    let mut best = f64::INFINITY;
    for i in 0..n {
        for j in (i + 2)..n {
            if closed && i == 0 && j == n - 1 {
                continue;
            }
            best = best.min((points[i][0] - points[j][0]).hypot(points[i][1] - points[j][1]));
        }
    }
    best
}

fn polyline_segments(points: &[[f64; 2]], closed: bool) -> Vec<([f64; 2], [f64; 2])> {
    let n = points.len();
    let mut segs: Vec<_> = (1..n).map(|i| (points[i - 1], points[i])).collect();
    if closed && n > 2 {
        segs.push((points[n - 1], points[0]));
    }
    segs
}

fn segments_cross(a: ([f64; 2], [f64; 2]), b: ([f64; 2], [f64; 2])) -> bool {
    let orient = |p: [f64; 2], q: [f64; 2], r: [f64; 2]| {
        (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    };
    let d1 = orient(a.0, a.1, b.0);
    let d2 = orient(a.0, a.1, b.1);
    let d3 = orient(b.0, b.1, a.0);
    let d4 = orient(b.0, b.1, a.1);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

fn is_simple(points: &[[f64; 2]], closed: bool) -> bool {
    let segs = polyline_segments(points, closed);
    let m = segs.len();
    for i in 0..m {
        for j in (i + 2)..m {
            if closed && i == 0 && j == m - 1 {
                continue;
            }
            if segments_cross(segs[i], segs[j]) {
                return false;
            }
        }
    }
    true
}

fn winding_number(points: &[[f64; 2]], center: [f64; 2]) -> f64 {
    let n = points.len();
    let mut total = 0.0;
    for i in 0..n {
        let a = points[i];
        let b = points[(i + 1) % n];
        let ta = (a[1] - center[1]).atan2(a[0] - center[0]);
        let tb = (b[1] - center[1]).atan2(b[0] - center[0]);
        let mut d = tb - ta;
        while d > std::f64::consts::PI {
            d -= 2.0 * std::f64::consts::PI;
        }
        while d < -std::f64::consts::PI {
            d += 2.0 * std::f64::consts::PI;
        }
        total += d;
    }
    total / (2.0 * std::f64::consts::PI)
}

/// Length-weighted centroid of closed image polylines.
fn common_center(images: &[&[[f64; 2]]]) -> [f64; 2] {
    let mut acc = [0.0, 0.0];
    let mut weight = 0.0;
    for pts in images {
        for (a, b) in polyline_segments(pts, true) {
            let l = (b[0] - a[0]).hypot(b[1] - a[1]);
            acc[0] += l * 0.5 * (a[0] + b[0]);
            acc[1] += l * 0.5 * (a[1] + b[1]);
            weight += l;
        }
    }
    if weight == 0.0 {
        let all: Vec<[f64; 2]> = images.iter().flat_map(|p| p.iter().copied()).collect();
        return mean_point(&all);
    }
    [acc[0] / weight, acc[1] / weight]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundCheck {
    /// A component is open, degenerate or inconsistently classified.
    Precondition,
    /// (a) `h` fails to be injective on the singular set.
    Injectivity,
    /// (b) An image curve is not simple or does not wind once about the center.
    Winding,
    /// (c) Radial intervals of distinct components overlap.
    Nesting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RoundVerdict {
    Round { center: [f64; 2], radii: Vec<f64> },
    NotRound { check: RoundCheck, detail: String },
}

impl RoundVerdict {
    pub fn is_round(&self) -> bool {
        matches!(self, RoundVerdict::Round { .. })
    }
}

/// Operational round-fold check: injective, simple closed image curves each
/// winding once about a common center, with pairwise disjoint radial ranges.
pub fn verify_round(traces: &[CurveTrace], records: &[FoldRecord]) -> RoundVerdict {
    let not_round = |check, detail: String| RoundVerdict::NotRound { check, detail };
    for (i, t) in traces.iter().enumerate() {
        if !t.closed {
            return not_round(RoundCheck::Precondition, format!("component {i} is not closed"));
        }
    }
    for r in records {
        if r.kind == FoldKind::Degenerate || !r.consistent {
            return not_round(
                RoundCheck::Precondition,
                format!("component {} is degenerate or inconsistently classified", r.component_id),
            );
        }
    }

    for (i, t) in traces.iter().enumerate() {
        let d = min_nonadjacent_distance(&t.image, true);
        if d <= INJECTIVITY_DISTANCE {
            return not_round(
                RoundCheck::Injectivity,
                format!("component {i}: image samples {d:.3e} apart"),
            );
        }
    }
    for i in 0..traces.len() {
        for j in (i + 1)..traces.len() {
            let d = traces[i]
                .image
                .iter()
                .flat_map(|a| traces[j].image.iter().map(move |b| (a[0] - b[0]).hypot(a[1] - b[1])))
                .fold(f64::INFINITY, f64::min);
            if d <= INJECTIVITY_DISTANCE {
                return not_round(
                    RoundCheck::Injectivity,
                    format!("components {i} and {j}: images {d:.3e} apart"),
                );
            }
        }
    }

    let images: Vec<&[[f64; 2]]> = traces.iter().map(|t| t.image.as_slice()).collect();
    let center = common_center(&images);
    for (i, img) in images.iter().enumerate() {
        if !is_simple(img, true) {
            return not_round(RoundCheck::Winding, format!("component {i}: image self-intersects"));
        }
        let w = winding_number(img, center);
        if (w.abs() - 1.0).abs() > 1e-6 {
            return not_round(
                RoundCheck::Winding,
                format!("component {i}: winding number {w:.6} about the common center"),
            );
        }
    }

    let mut intervals: Vec<(f64, f64)> = images
        .iter()
        .map(|img| {
            img.iter()
                .map(|p| (p[0] - center[0]).hypot(p[1] - center[1]))
                .fold((f64::INFINITY, 0.0_f64), |(lo, hi), r| (lo.min(r), hi.max(r)))
        })
        .collect();
    intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in intervals.windows(2) {
        if w[1].0 <= w[0].1 {
            return not_round(
                RoundCheck::Nesting,
                format!(
                    "radial ranges [{:.6}, {:.6}] and [{:.6}, {:.6}] overlap",
                    w[0].0, w[0].1, w[1].0, w[1].1
                ),
            );
        }
    }

    let mut radii: Vec<f64> = if records.len() == traces.len() {
        records.iter().map(|r| r.image_radius_mean).collect()
    } else {
        images.iter().map(|img| fit_circle(img).1).collect()
    };
    radii.sort_by(f64::total_cmp);
    RoundVerdict::Round { center, radii }
}

/// `max |h(αz) − α·h(z)|` over random unit `α` and random link points `z`.
/// Requires homogeneous `f` and linear `g`.
pub fn equivariance_error(map: &LinkMap, n_samples: usize, rng_seed: u64) -> Result<f64> {
    if map.link.f().homogeneous_degree().is_none() {
        return Err(Error::NotApplicable("f is not homogeneous".into()));
    }
    if map.g.poly().homogeneous_degree() != Some(1) {
        return Err(Error::NotApplicable("g is not homogeneous of degree 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut worst = 0.0_f64;
    for _ in 0..n_samples {
        let z = random_link_point(&map.link, &mut rng)?;
        let alpha = Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
        let err = (map.h(&z.scale(alpha)) - alpha * map.h(&z)).norm();
        worst = worst.max(err);
    }
    Ok(worst)
}
