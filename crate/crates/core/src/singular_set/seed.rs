use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::augmented::{AugmentedPoint, AugmentedSystem};
use super::criterion_rank_defect;
use crate::error::{Error, Result};
use crate::geometry::{chart, fill_link_jacobian, random_link_point, tangent_frame};
use crate::linalg::{put_block, realify};
use crate::polynomial::Point;
use crate::{LinkMap, Tolerances};

const SEED_SEPARATION: f64 = 1e-4;
const DESCENT_ITERATIONS: usize = 40;
const DESCENT_HANDOFF: f64 = 1e-3;
const NEWTON_ITERATIONS: usize = 40;
const SEED_ACCEPT: f64 = 1e-10;

fn defect_at(map: &LinkMap, z: &Point) -> f64 {
    criterion_rank_defect(z, map.link.jet(), &map.g).unwrap_or(f64::INFINITY)
}

/// Steepest descent on `defect²` in retraction charts, with backtracking.
fn descend(map: &LinkMap, start: Point) -> Point {
    let eps = map.epsilon();
    let mut z = start;
    let mut phi = defect_at(map, &z).powi(2);
    for _ in 0..DESCENT_ITERATIONS {
        if phi.sqrt() < DESCENT_HANDOFF {
            break;
        }
        let Ok(frame) = tangent_frame(&z, &map.link) else {
            break;
        };
        let k = frame.dim();
        let h = 1e-6 * eps;
        let mut grad = vec![0.0; k];
        for (i, gi) in grad.iter_mut().enumerate() {
            let mut u = vec![0.0; k];
            u[i] = h;
            let plus = chart(&frame, &u, &map.link).map(|p| defect_at(map, &p).powi(2));
            u[i] = -h;
            let minus = chart(&frame, &u, &map.link).map(|p| defect_at(map, &p).powi(2));
            match (plus, minus) {
                (Ok(a), Ok(b)) => *gi = (a - b) / (2.0 * h),
                _ => return z,
            }
        }
        let gnorm = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
        if gnorm == 0.0 {
            break;
        }
        // first trial: Newton-like step phi / |grad| capped at 0.1 ε
        let mut step = (phi / gnorm).min(0.1 * eps);
        let mut improved = false;
        for _ in 0..20 {
            let u: Vec<f64> = grad.iter().map(|g| -g / gnorm * step).collect();
            if let Ok(cand) = chart(&frame, &u, &map.link) {
                let pc = defect_at(map, &cand).powi(2);
                if pc < phi {
                    z = cand;
                    phi = pc;
                    improved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    z
}

/// Random link points driven onto `S(h)`: descent on the squared criterion
/// defect, then least-norm Newton on the augmented system. Converged seeds
/// are deduplicated (pairwise distance > 1e-4) in sampling order.
pub fn seed_singular_points(
    map: &LinkMap,
    n_samples: usize,
    rng_seed: u64,
    tol: &Tolerances,
) -> Result<Vec<AugmentedPoint>> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let system = AugmentedSystem::new(map);
    let mut seeds: Vec<AugmentedPoint> = Vec::new();
    let mut best_residual = f64::INFINITY;
    let mut projected = 0usize;
    for _ in 0..n_samples {
        let Ok(z) = random_link_point(&map.link, &mut rng) else {
            continue;
        };
        projected += 1;
        let z = descend(map, z);
        let start = system.fit_coefficients(&z);
        best_residual = best_residual.min(system.residual(&start).norm());
        let Ok(p) = system.solve_least_norm(&start, tol.newton, NEWTON_ITERATIONS) else {
            continue;
        };
        let res = system.residual(&p).norm();
        best_residual = best_residual.min(res);
        if res > SEED_ACCEPT || !p.z.is_finite() {
            continue;
        }
        if defect_at(map, &p.z) > tol.singular {
            continue;
        }
        if seeds.iter().all(|s| s.z.distance(&p.z) > SEED_SEPARATION) {
            seeds.push(p);
        }
    }
    if seeds.is_empty() {
        return Err(Error::EmptyResult(format!(
            "{n_samples} samples, {projected} projected onto the link, best augmented residual {best_residual:.3e}"
        )));
    }
    Ok(seeds)
}

/// Outcome of searching for link points where `grad̄g ∈ ℂ·grad̄f`.
#[derive(Debug, Clone)]
pub struct DependentGradientScan {
    pub solutions: Vec<Point>,
    /// Smallest residual norm reached over all starts.
    pub best_residual: f64,
    pub starts: usize,
}

/// Levenberg–Marquardt on `{grad̄g(z) − c·grad̄f(z) = 0, z ∈ K}` from random
/// link points. On the link `grad̄f ≠ 0`, so this is exactly the locus where
/// the two gradients are dependent over ℂ. Solutions have residual ≤ 1e-10.
pub fn dependent_gradient_points(map: &LinkMap, n_samples: usize, rng_seed: u64) -> DependentGradientScan {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let m = map.link.ambient_dim();
    let f = map.link.jet();
    let residual = |x: &DVector<f64>| -> DVector<f64> {
        let z = Point::from_real(&x.as_slice()[..2 * m]);
        let c = Complex64::new(x[2 * m], x[2 * m + 1]);
        let gf = f.conj_gradient(&z);
        let gg = map.g.conj_gradient(&z);
        let mut r = DVector::zeros(2 * m + 3);
        for j in 0..m {
            let v = gg[j] - c * gf[j];
            r[2 * j] = v.re;
            r[2 * j + 1] = v.im;
        }
        let fz = f.value(&z);
        r[2 * m] = fz.re;
        r[2 * m + 1] = fz.im;
        r[2 * m + 2] = z.norm_sqr() - map.epsilon().powi(2);
        r
    };
    let jacobian = |x: &DVector<f64>| -> DMatrix<f64> {
        let z = Point::from_real(&x.as_slice()[..2 * m]);
        let c = Complex64::new(x[2 * m], x[2 * m + 1]);
        let f2 = f.second_partials(&z);
        let g2 = map.g.second_partials(&z);
        let gf = f.conj_gradient(&z);
        let zero = Complex64::new(0.0, 0.0);
        let mut jac = DMatrix::zeros(2 * m + 3, 2 * m + 2);
        for j in 0..m {
            for k in 0..m {
                put_block(&mut jac, 2 * j, 2 * k, zero, g2[j][k].conj() - c * f2[j][k].conj());
            }
            put_block(&mut jac, 2 * j, 2 * m, -gf[j], zero);
        }
        fill_link_jacobian(&mut jac, 2 * m, &z, &map.link);
        jac
    };

    let mut solutions: Vec<Point> = Vec::new();
    let mut best = f64::INFINITY;
    let mut starts = 0;
    for _ in 0..n_samples {
        let Ok(z) = random_link_point(&map.link, &mut rng) else {
            continue;
        };
        starts += 1;
        let gf = f.conj_gradient(&z);
        let gg = map.g.conj_gradient(&z);
        let denom = gf.norm_sqr();
        let c0: Complex64 = if denom > 0.0 {
            gg.iter().zip(gf.iter()).map(|(a, b)| a * b.conj()).sum::<Complex64>() / denom
        } else {
            Complex64::new(0.0, 0.0)
        };
        let mut x = realify(&z).as_slice().to_vec();
        x.extend([c0.re, c0.im]);
        let mut x = DVector::from_vec(x);
        let mut r = residual(&x);
        let mut lambda = 1e-3;
        for _ in 0..200 {
            if r.norm() <= 1e-12 {
                break;
            }
            let jac = jacobian(&x);
            let jt = jac.transpose();
            let mut normal = &jt * &jac;
            for d in 0..normal.nrows() {
                normal[(d, d)] += lambda * (1.0 + normal[(d, d)]);
            }
            let rhs = -(&jt * &r);
            let Some(step) = normal.lu().solve(&rhs) else {
                break;
            };
            let trial = &x + &step;
            let rt = residual(&trial);
            if rt.norm() < r.norm() {
                x = trial;
                r = rt;
                lambda = (lambda * 0.3).max(1e-12);
            } else {
                lambda *= 10.0;
                if lambda > 1e8 {
                    break;
                }
            }
        }
        let rn = r.norm();
        best = best.min(rn);
        if rn <= 1e-10 {
            let z = Point::from_real(&x.as_slice()[..2 * m]);
            if solutions.iter().all(|s| s.distance(&z) > SEED_SEPARATION) {
                solutions.push(z);
            }
        }
    }
    DependentGradientScan {
        solutions,
        best_residual: best,
        starts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polynomial::I;

    #[test]
    fn a1_seeds_lie_on_both_circles() {
        let map = LinkMap::brieskorn_a1(2);
        let seeds = seed_singular_points(&map, 200, 42, &Tolerances::default()).unwrap();
        let mut plus = 0;
        let mut minus = 0;
        for s in &seeds {
            assert!(s.z[2].norm() <= 1e-8);
            if (s.z[0] - I * s.z[1]).norm() <= 1e-8 {
                plus += 1;
            } else if (s.z[0] + I * s.z[1]).norm() <= 1e-8 {
                minus += 1;
            } else {
                panic!("seed off both circles: {:?}", s.z);
            }
        }
        assert!(plus > 0 && minus > 0, "plus {plus} minus {minus}");
    }

    #[test]
    fn seeding_is_deterministic() {
        let map = LinkMap::brieskorn_a1(3);
        let tol = Tolerances::default();
        let a = seed_singular_points(&map, 30, 9, &tol).unwrap();
        let b = seed_singular_points(&map, 30, 9, &tol).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn a1_has_no_dependent_gradients_on_the_link() {
        let map = LinkMap::brieskorn_a1(2);
        let scan = dependent_gradient_points(&map, 20, 1);
        assert!(scan.solutions.is_empty());
        assert!(scan.best_residual > 1e-3);
    }

    #[test]
    fn constant_g_is_dependent_everywhere() {
        let link = crate::LinkSpec::a1(2);
        let map = LinkMap::new(link, crate::ComplexPoly::parse("2", 3).unwrap()).unwrap();
        let scan = dependent_gradient_points(&map, 5, 1);
        assert_eq!(scan.solutions.len(), 5);
    }
}
