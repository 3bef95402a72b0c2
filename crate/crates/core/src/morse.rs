//! Morse data read off the singular set.
//!
//! For a ray `L_θ = {t·e^{iθ}}` the slice `Q_θ = h⁻¹(L_θ)` carries
//! `ψ = Re(e^{−iθ}h)`, whose critical points are `S(h) ∩ Q_θ`. For a
//! covector `η` the composed function `η∘h` on `K` has its critical points on
//! `S(h)` as well, at the points where `η∘h` is stationary along the curve.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fold::fit_circle;
use crate::geometry::{fill_link_jacobian, random_link_point, retract, tangent_frame, SliceConstraints};
use crate::linalg::{least_norm_solve, orthonormal_complement, put_block, realify, symmetric_eigenvalues, symmetric_norm};
use crate::numdiff::central_hessian;
use crate::polynomial::Point;
use crate::singular_set::{correct, AugmentedPoint, AugmentedSystem, CurveTrace};
use crate::{LinkMap, Tolerances};

/// Slice critical points must sit at least this far out along the ray.
pub const MIN_RAY_PARAMETER: f64 = 1e-3;
/// Maximum `|arg(e^{−iθ}h)|` at an accepted slice critical point.
pub const ANGULAR_TOLERANCE: f64 = 1e-9;
/// Bracket width in the continuation parameter for 1-D critical points.
pub const BRACKET_TOLERANCE: f64 = 1e-10;
const DUPLICATE_DISTANCE: f64 = 1e-6;
const NEWTON_ITERATIONS: usize = 30;

/// The ray `L_θ` and its preimage `Q_θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceSpec {
    pub theta: f64,
}

impl SliceSpec {
    /// `e^{−iθ}`, which turns `L_θ` onto the positive real axis.
    pub fn rotation(&self) -> Complex64 {
        Complex64::from_polar(1.0, -self.theta)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPointRecord {
    pub point: Point,
    pub value: f64,
    pub morse_index: usize,
    /// Ascending.
    pub hessian_eigenvalues: Vec<f64>,
    /// Norm of the intrinsic gradient at `point`.
    pub gradient_norm: f64,
}

/// Square Newton with LU steps; one extra step once `‖F‖ ≤ tol`.
fn square_newton<R, J>(residual: R, jacobian: J, x0: DVector<f64>, tol: f64) -> Option<DVector<f64>>
where
    R: Fn(&DVector<f64>) -> DVector<f64>,
    J: Fn(&DVector<f64>) -> DMatrix<f64>,
{
    let mut x = x0;
    for _ in 0..NEWTON_ITERATIONS {
        let r = residual(&x);
        if !r.norm().is_finite() {
            return None;
        }
        let converged = r.norm() <= tol;
        let dx = jacobian(&x).lu().solve(&r)?;
        x -= dx;
        if converged {
            return Some(x);
        }
    }
    None
}

/// Eigenvalues and negative count of a Hessian, or `Degenerate` if any
/// eigenvalue lies in the relative dead band.
fn morse_index(hessian: &DMatrix<f64>, dead_band: f64) -> Result<(usize, Vec<f64>)> {
    let eig = symmetric_eigenvalues(hessian);
    let band = dead_band * symmetric_norm(hessian);
    if let Some(e) = eig.iter().find(|e| e.abs() <= band) {
        return Err(Error::Degenerate { eigenvalue: *e, band });
    }
    let index = eig.iter().filter(|e| **e < 0.0).count();
    Ok((index, eig))
}

fn push_unique(found: &mut Vec<Point>, z: Point) {
    if found.iter().all(|p| p.distance(&z) > DUPLICATE_DISTANCE) {
        found.push(z);
    }
}

/// Points of the traced `S(h)` whose image lies on `L_θ`, refined by Newton
/// on the augmented system with the extra row `Im(e^{−iθ}h) = 0`. Sorted by
/// `ψ` ascending.
pub fn slice_critical_points(
    slice: &SliceSpec,
    traces: &[CurveTrace],
    map: &LinkMap,
    tol: &Tolerances,
) -> Vec<Point> {
    let rot = slice.rotation();
    let system = AugmentedSystem::new(map);
    let m = map.link.ambient_dim();
    let residual = |x: &DVector<f64>| {
        let p = AugmentedPoint::from_vector(x);
        let r = system.residual(&p);
        let mut out = DVector::zeros(r.len() + 1);
        out.rows_mut(0, r.len()).copy_from(&r);
        out[r.len()] = (rot * map.h(&p.z)).im;
        out
    };
    let jacobian = |x: &DVector<f64>| {
        let p = AugmentedPoint::from_vector(x);
        let j = system.jacobian(&p);
        let mut out = DMatrix::zeros(j.nrows() + 1, j.ncols());
        out.view_mut((0, 0), (j.nrows(), j.ncols())).copy_from(&j);
        for (k, d) in map.g.partials(&p.z).into_iter().enumerate() {
            let a = rot * d;
            out[(j.nrows(), 2 * k)] = a.im;
            out[(j.nrows(), 2 * k + 1)] = a.re;
        }
        out
    };

    let mut found: Vec<Point> = Vec::new();
    for trace in traces {
        let w: Vec<Complex64> = trace.points.iter().map(|p| rot * map.h(&p.z)).collect();
        for (i, j) in trace.segments() {
            let (si, sj) = (w[i].im, w[j].im);
            let crosses = si * sj < 0.0 || si == 0.0;
            if !crosses || w[i].re <= 0.0 || w[j].re <= 0.0 {
                continue;
            }
            let s = if si == sj { 0.0 } else { si / (si - sj) };
            let xi = trace.points[i].to_vector();
            let xj = trace.points[j].to_vector();
            let x0 = &xi + (&xj - &xi) * s;
            let Some(x) = square_newton(residual, jacobian, x0, tol.newton) else {
                continue;
            };
            let p = AugmentedPoint::from_vector(&x);
            let v = rot * map.h(&p.z);
            if v.re < MIN_RAY_PARAMETER * map.epsilon() || v.im.atan2(v.re).abs() > ANGULAR_TOLERANCE {
                continue;
            }
            debug_assert_eq!(p.z.dim(), m);
            push_unique(&mut found, p.z);
        }
    }
    found.sort_by(|a, b| (rot * map.h(a)).re.total_cmp(&(rot * map.h(b)).re));
    found
}

/// Morse index of `ψ = Re(e^{−iθ}h)` on `Q_θ` at a slice critical point.
///
/// The chart of `Q_θ` uses the directions of `T_p K` annihilated by
/// `d Im(e^{−iθ}h)`, retracted onto `K ∩ {Im(e^{−iθ}h) = 0}`.
pub fn slice_morse_index(
    p: &[Complex64],
    slice: &SliceSpec,
    map: &LinkMap,
    tol: &Tolerances,
) -> Result<CriticalPointRecord> {
    let rot = slice.rotation();
    let frame = tangent_frame(p, &map.link)?;
    let k = frame.dim();
    let dh: Vec<Complex64> = (0..k)
        .map(|i| rot * map.g.differential(p, &frame.direction(i)))
        .collect();
    let c = DVector::from_iterator(k, dh.iter().map(|v| v.im));
    if c.norm() <= 1e-10 {
        return Err(Error::NotApplicable(
            "Im(e^{-iθ}h) is critical on K here, so the slice is not smooth".into(),
        ));
    }
    let w = orthonormal_complement(&[c], k, 1e-10).map_err(|norm| Error::DimensionCollapse { norm })?;
    let directions: Vec<DVector<f64>> = w.iter().map(|wj| frame.offset(wj.as_slice())).collect();
    let gradient_norm = w
        .iter()
        .map(|wj| wj.iter().zip(&dh).map(|(a, d)| a * d.re).sum::<f64>().powi(2))
        .sum::<f64>()
        .sqrt();

    let constraints = SliceConstraints {
        link: &map.link,
        g: &map.g,
        rotation: rot,
    };
    let hessian = central_hessian(
        |s| {
            let mut offset = DVector::zeros(2 * p.len());
            for (sj, d) in s.iter().zip(&directions) {
                offset.axpy(*sj, d, 1.0);
            }
            let z = retract(&constraints, p, &offset)?;
            Ok((rot * map.h(&z)).re)
        },
        directions.len(),
        tol.hessian_step * map.epsilon(),
    )?;
    let (morse_index, hessian_eigenvalues) = morse_index(&hessian, tol.dead_band)?;
    Ok(CriticalPointRecord {
        point: Point(p.to_vec()),
        value: (rot * map.h(p)).re,
        morse_index,
        hessian_eigenvalues,
        gradient_norm,
    })
}

/// `η` as the complex number `w` with `η(v) = Re(w̄·v)`.
fn covector(eta: [f64; 2]) -> Result<Complex64> {
    let w = Complex64::new(eta[0], eta[1]);
    if w.norm() == 0.0 || !w.norm().is_finite() {
        return Err(Error::Config("eta must be a nonzero finite covector".into()));
    }
    Ok(w / w.norm())
}

/// Derivative of `η∘h` along the curve at an augmented point, for a tangent
/// oriented like `reference`.
fn along_curve_derivative(
    system: &AugmentedSystem,
    x: &DVector<f64>,
    reference: &DVector<f64>,
    w: Complex64,
) -> (f64, DVector<f64>) {
    let p = AugmentedPoint::from_vector(x);
    let (t, _) = system.tangent(&p);
    let t = if t.dot(reference) < 0.0 { -t } else { t };
    let dz = Point::from_real(&t.as_slice()[..2 * p.z.dim()]);
    let d = (w.conj() * system.map.g.differential(&p.z, &dz)).re;
    (d, t)
}

/// Newton on `w·grad̄g − c·grad̄f − μz = 0` with the link equations.
/// Unknowns `(z, c, μ)` with `c` complex and `μ` real: a square system.
fn lagrange_polish(map: &LinkMap, z0: &Point, w: Complex64, tol: f64) -> Option<Point> {
    let m = z0.dim();
    let f = map.link.jet();
    let g = &map.g;
    let residual = |x: &DVector<f64>| {
        let z = Point::from_real(&x.as_slice()[..2 * m]);
        let c = Complex64::new(x[2 * m], x[2 * m + 1]);
        let mu = x[2 * m + 2];
        let gf = f.conj_gradient(&z);
        let gg = g.conj_gradient(&z);
        let mut r = DVector::zeros(2 * m + 3);
        for j in 0..m {
            let v = w * gg[j] - c * gf[j] - mu * z[j];
            r[2 * j] = v.re;
            r[2 * j + 1] = v.im;
        }
        let fz = f.value(&z);
        r[2 * m] = fz.re;
        r[2 * m + 1] = fz.im;
        r[2 * m + 2] = z.norm_sqr() - map.epsilon().powi(2);
        r
    };
    let jacobian = |x: &DVector<f64>| {
        let z = Point::from_real(&x.as_slice()[..2 * m]);
        let c = Complex64::new(x[2 * m], x[2 * m + 1]);
        let mu = x[2 * m + 2];
        let f2 = f.second_partials(&z);
        let g2 = g.second_partials(&z);
        let gf = f.conj_gradient(&z);
        let zero = Complex64::new(0.0, 0.0);
        let mut jac = DMatrix::zeros(2 * m + 3, 2 * m + 3);
        for j in 0..m {
            for k in 0..m {
                let hol = if j == k { Complex64::new(-mu, 0.0) } else { zero };
                let anti = w * g2[j][k].conj() - c * f2[j][k].conj();
                put_block(&mut jac, 2 * j, 2 * k, hol, anti);
            }
            // c enters holomorphically; the c block occupies two columns
            let a = -gf[j];
            jac[(2 * j, 2 * m)] += a.re;
            jac[(2 * j, 2 * m + 1)] -= a.im;
            jac[(2 * j + 1, 2 * m)] += a.im;
            jac[(2 * j + 1, 2 * m + 1)] += a.re;
            jac[(2 * j, 2 * m + 2)] = -z[j].re;
            jac[(2 * j + 1, 2 * m + 2)] = -z[j].im;
        }
        fill_link_jacobian(&mut jac, 2 * m, &z, &map.link);
        jac
    };

    // initial multipliers by least squares
    let gf = f.conj_gradient(z0);
    let gg = g.conj_gradient(z0);
    let mut a = DMatrix::zeros(2 * m, 3);
    let mut b = DVector::zeros(2 * m);
    for j in 0..m {
        a[(2 * j, 0)] = gf[j].re;
        a[(2 * j, 1)] = -gf[j].im;
        a[(2 * j + 1, 0)] = gf[j].im;
        a[(2 * j + 1, 1)] = gf[j].re;
        a[(2 * j, 2)] = z0[j].re;
        a[(2 * j + 1, 2)] = z0[j].im;
        let v = w * gg[j];
        b[2 * j] = v.re;
        b[2 * j + 1] = v.im;
    }
    let (coef, _) = least_norm_solve(&a, &b);
    let mut x0 = realify(z0).as_slice().to_vec();
    x0.extend(coef.iter());
    let x = square_newton(residual, jacobian, DVector::from_vec(x0), tol)?;
    let z = Point::from_real(&x.as_slice()[..2 * m]);
    (z.distance(z0) < 1e-3 * map.epsilon()).then_some(z)
}

/// Full chart Hessian of `η∘h` on `K` at `z`.
fn composed_record(map: &LinkMap, z: &Point, w: Complex64, tol: &Tolerances) -> Result<CriticalPointRecord> {
    let frame = tangent_frame(z, &map.link)?;
    let gradient_norm = (0..frame.dim())
        .map(|k| (w.conj() * map.g.differential(z, &frame.direction(k))).re.powi(2))
        .sum::<f64>()
        .sqrt();
    let hessian = central_hessian(
        |u| {
            let p = crate::geometry::chart(&frame, u, &map.link)?;
            Ok((w.conj() * map.h(&p)).re)
        },
        frame.dim(),
        tol.hessian_step * map.epsilon(),
    )?;
    let (morse_index, hessian_eigenvalues) = morse_index(&hessian, tol.dead_band)?;
    Ok(CriticalPointRecord {
        point: z.clone(),
        value: (w.conj() * map.h(z)).re,
        morse_index,
        hessian_eigenvalues,
        gradient_norm,
    })
}

/// Critical points of `η∘h` on `K`, found along the traced singular curves
/// and classified by the full `(2n−1)`-dimensional chart Hessian. Sorted by value.
///
/// Along each segment the derivative of `η∘h` is bracketed by bisection on
/// the continuation parameter to [`BRACKET_TOLERANCE`], refined by the
/// vertex of the parabola matching both end slopes, then polished by Newton
/// on the Lagrange system.
pub fn composed_morse(
    eta: [f64; 2],
    traces: &[CurveTrace],
    map: &LinkMap,
    tol: &Tolerances,
) -> Result<Vec<CriticalPointRecord>> {
    let w = covector(eta)?;
    let system = AugmentedSystem::new(map);
    let mut found: Vec<Point> = Vec::new();
    for trace in traces {
        let xs: Vec<DVector<f64>> = trace.points.iter().map(|p| p.to_vector()).collect();
        let d: Vec<f64> = (0..trace.len())
            .map(|i| along_curve_derivative(&system, &xs[i], &trace.tangents[i], w).0)
            .collect();
        for (i, j) in trace.segments() {
            if d[i] == 0.0 {
                push_unique(&mut found, trace.points[i].z.clone());
                continue;
            }
            if d[i] * d[j] >= 0.0 {
                continue;
            }
            let t = &trace.tangents[i];
            let at = |sigma: f64| -> Option<(DVector<f64>, f64)> {
                if sigma == 0.0 {
                    return Some((xs[i].clone(), d[i]));
                }
                let pred = &xs[i] + t * sigma;
                let (y, _) = correct(&system, &pred, t, tol.newton)?;
                let (dy, _) = along_curve_derivative(&system, &y, t, w);
                Some((y, dy))
            };
            let (mut lo, mut hi) = (0.0, t.dot(&(&xs[j] - &xs[i])));
            let (mut dlo, mut dhi) = (d[i], d[j]);
            let mut ok = true;
            while hi - lo > BRACKET_TOLERANCE {
                let mid = 0.5 * (lo + hi);
                let Some((_, dm)) = at(mid) else {
                    ok = false;
                    break;
                };
                if dm == 0.0 {
                    lo = mid;
                    hi = mid;
                    dlo = 0.0;
                    dhi = 0.0;
                    break;
                }
                if dm * dlo < 0.0 {
                    hi = mid;
                    dhi = dm;
                } else {
                    lo = mid;
                    dlo = dm;
                }
            }
            if !ok {
                continue;
            }
            let sigma = if dhi != dlo {
                lo + (hi - lo) * dlo / (dlo - dhi)
            } else {
                0.5 * (lo + hi)
            };
            let Some((y, _)) = at(sigma) else {
                continue;
            };
            let z = AugmentedPoint::from_vector(&y).z;
            let z = lagrange_polish(map, &z, w, tol.newton).unwrap_or(z);
            push_unique(&mut found, z);
        }
    }
    let mut records = found
        .iter()
        .map(|z| composed_record(map, z, w, tol))
        .collect::<Result<Vec<_>>>()?;
    records.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(records)
}

/// One connected piece of `h(K)` when `K` is a curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageComponent {
    pub points: Vec<[f64; 2]>,
    pub center: [f64; 2],
    pub radius_mean: f64,
    pub radius_deviation: f64,
}

/// For `n = 1` the link is a union of circles and `h` maps it into ℂ.
/// Samples `h` on random link points and groups the images by single
/// linkage at a tenth of the image extent. Sorted by radius.
pub fn trace_image_n1(map: &LinkMap, n_samples: usize, rng_seed: u64) -> Result<Vec<ImageComponent>> {
    if map.n() != 1 {
        return Err(Error::WrongDimension {
            required: 1,
            got: map.n(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut images: Vec<[f64; 2]> = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        if let Ok(z) = random_link_point(&map.link, &mut rng) {
            images.push(map.h_real(&z));
        }
    }
    if images.is_empty() {
        return Err(Error::EmptyResult(format!("none of {n_samples} samples reached the link")));
    }
    let centroid = {
        let s = images.iter().fold([0.0, 0.0], |a, p| [a[0] + p[0], a[1] + p[1]]);
        [s[0] / images.len() as f64, s[1] / images.len() as f64]
    };
    let extent = images
        .iter()
        .map(|p| (p[0] - centroid[0]).hypot(p[1] - centroid[1]))
        .fold(0.0, f64::max);
    let link_distance = 0.1 * 2.0 * extent;

    let n = images.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (images[i][0] - images[j][0]).hypot(images[i][1] - images[j][1]);
            if d <= link_distance {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<[f64; 2]>> = Default::default();
    for (i, p) in images.iter().enumerate() {
        groups.entry(root(&mut parent, i)).or_default().push(*p);
    }
    let mut components: Vec<ImageComponent> = groups
        .into_values()
        .map(|points| {
            let (center, radius_mean, radius_deviation) = fit_circle(&points);
            ImageComponent {
                points,
                center,
                radius_mean,
                radius_deviation,
            }
        })
        .collect();
    components.sort_by(|a, b| a.radius_mean.total_cmp(&b.radius_mean));
    Ok(components)
}
