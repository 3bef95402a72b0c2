use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::fill_link_jacobian;
use crate::linalg::{least_norm_solve, put_block, realify, svd};
use crate::polynomial::Point;
use crate::LinkMap;

/// A point of `S(h)` together with the coefficients of
/// `z = a·grad̄f(z) + b·grad̄g(z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedPoint {
    pub z: Point,
    pub a: Complex64,
    pub b: Complex64,
}

impl AugmentedPoint {
    /// Realified unknowns `(z, a, b)`, length `2(n+1) + 4`.
    pub fn to_vector(&self) -> DVector<f64> {
        let mut v = realify(&self.z).as_slice().to_vec();
        v.extend([self.a.re, self.a.im, self.b.re, self.b.im]);
        DVector::from_vec(v)
    }

    pub fn from_vector(x: &DVector<f64>) -> Self {
        let m2 = x.len() - 4;
        AugmentedPoint {
            z: Point::from_real(&x.as_slice()[..m2]),
            a: Complex64::new(x[m2], x[m2 + 1]),
            b: Complex64::new(x[m2 + 2], x[m2 + 3]),
        }
    }
}

/// `F(z, a, b) = (z − a·grad̄f − b·grad̄g, Re f, Im f, ‖z‖² − ε²)`:
/// `2n + 5` real equations in `2n + 6` unknowns.
pub struct AugmentedSystem<'a> {
    pub map: &'a LinkMap,
}

impl<'a> AugmentedSystem<'a> {
    pub fn new(map: &'a LinkMap) -> Self {
        AugmentedSystem { map }
    }

    pub fn equations(&self) -> usize {
        2 * self.map.link.ambient_dim() + 3
    }

    pub fn unknowns(&self) -> usize {
        self.equations() + 1
    }

    pub fn residual(&self, p: &AugmentedPoint) -> DVector<f64> {
        let f = self.map.link.jet();
        let gf = f.conj_gradient(&p.z);
        let gg = self.map.g.conj_gradient(&p.z);
        let m = p.z.dim();
        let mut r = DVector::zeros(2 * m + 3);
        for j in 0..m {
            let v = p.z[j] - p.a * gf[j] - p.b * gg[j];
            r[2 * j] = v.re;
            r[2 * j + 1] = v.im;
        }
        let fz = f.value(&p.z);
        r[2 * m] = fz.re;
        r[2 * m + 1] = fz.im;
        r[2 * m + 2] = p.z.norm_sqr() - self.map.epsilon().powi(2);
        r
    }

    pub fn jacobian(&self, p: &AugmentedPoint) -> DMatrix<f64> {
        let f = self.map.link.jet();
        let m = p.z.dim();
        let mut jac = DMatrix::zeros(2 * m + 3, 2 * m + 4);
        let f2 = f.second_partials(&p.z);
        let g2 = self.map.g.second_partials(&p.z);
        let gf = f.conj_gradient(&p.z);
        let gg = self.map.g.conj_gradient(&p.z);
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        for j in 0..m {
            for k in 0..m {
                // grad̄ is antiholomorphic: d conj(∂_j f) = Σ_k conj(∂_jk f) conj(dz_k)
                let anti = -p.a * f2[j][k].conj() - p.b * g2[j][k].conj();
                let hol = if j == k { one } else { zero };
                put_block(&mut jac, 2 * j, 2 * k, hol, anti);
            }
            put_block(&mut jac, 2 * j, 2 * m, -gf[j], zero);
            put_block(&mut jac, 2 * j, 2 * m + 2, -gg[j], zero);
        }
        fill_link_jacobian(&mut jac, 2 * m, &p.z, &self.map.link);
        jac
    }

    /// Least-squares `(a, b)` for a given `z`.
    pub fn fit_coefficients(&self, z: &Point) -> AugmentedPoint {
        let gf = self.map.link.jet().conj_gradient(z);
        let gg = self.map.g.conj_gradient(z);
        let m = z.dim();
        let mut a = DMatrix::zeros(2 * m, 4);
        let zero = Complex64::new(0.0, 0.0);
        for j in 0..m {
            put_block(&mut a, 2 * j, 0, gf[j], zero);
            put_block(&mut a, 2 * j, 2, gg[j], zero);
        }
        let (coef, _) = least_norm_solve(&a, &realify(z));
        AugmentedPoint {
            z: z.clone(),
            a: Complex64::new(coef[0], coef[1]),
            b: Complex64::new(coef[2], coef[3]),
        }
    }

    /// Unit tangent of the solution curve (right null vector of the Jacobian)
    /// and the smallest singular value of the Jacobian itself.
    pub fn tangent(&self, p: &AugmentedPoint) -> (DVector<f64>, f64) {
        let jac = self.jacobian(p);
        let d = svd(&jac);
        let n = jac.ncols();
        let t = d.v.column(n - 1).into_owned();
        (t, d.sigma[n - 2])
    }

    /// Newton iteration with Moore–Penrose least-norm steps and backtracking.
    /// Polishes once more after reaching `tol`.
    pub fn solve_least_norm(
        &self,
        start: &AugmentedPoint,
        tol: f64,
        max_iter: usize,
    ) -> Result<AugmentedPoint> {
        let mut x = start.to_vector();
        let mut r = self.residual(&AugmentedPoint::from_vector(&x));
        for _ in 0..max_iter {
            let rn = r.norm();
            if !rn.is_finite() {
                break;
            }
            let p = AugmentedPoint::from_vector(&x);
            let (dx, _) = least_norm_solve(&self.jacobian(&p), &r);
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..12 {
                let trial = &x - &dx * alpha;
                let rt = self.residual(&AugmentedPoint::from_vector(&trial));
                if rt.norm() < rn || rn <= tol {
                    x = trial;
                    r = rt;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if rn <= tol {
                return Ok(AugmentedPoint::from_vector(&x));
            }
            if !accepted {
                break;
            }
        }
        Err(Error::NonConvergence {
            iterations: max_iter,
            residual: r.norm(),
        })
    }
}
