//! Inner products, the link constraint system, Gauss–Newton projection onto
//! the link, tangent frames and retraction charts.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{least_norm_solve, orthonormal_complement, put_block, realify};
use crate::polynomial::{ComplexPoly, Point, PolyJet, I};

pub const DEFAULT_PROJECTION_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 50;
/// Absolute threshold on constraint singular values and on post-projection
/// norms during orthogonalization.
pub const RANK_THRESHOLD: f64 = 1e-10;

/// The link `K_f = f⁻¹(0) ∩ S_ε` of an isolated singularity of `f` on ℂ^{n+1}.
#[derive(Debug, Clone)]
pub struct LinkSpec {
    f: PolyJet,
    n: usize,
    epsilon: f64,
}

impl LinkSpec {
    pub fn new(f: ComplexPoly, n: usize, epsilon: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidLink("n must be at least 1".into()));
        }
        if f.n_vars() != n + 1 {
            return Err(Error::InvalidLink(format!(
                "f has {} variables but n + 1 = {}",
                f.n_vars(),
                n + 1
            )));
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidLink(format!("epsilon must be positive, got {epsilon}")));
        }
        let f0 = f.eval_unchecked(&vec![Complex64::new(0.0, 0.0); n + 1]);
        if f0.norm() != 0.0 {
            return Err(Error::InvalidLink(format!("f(0) = {f0} is not zero")));
        }
        Ok(LinkSpec {
            f: PolyJet::new(f),
            n,
            epsilon,
        })
    }

    /// `z1² + ... + z_{n+1}²` on the unit sphere.
    pub fn a1(n: usize) -> Self {
        let text = (1..=n + 1)
            .map(|j| format!("z{j}^2"))
            .collect::<Vec<_>>()
            .join(" + ");
        let f = ComplexPoly::parse(&text, n + 1).expect("A1 polynomial parses");
        LinkSpec::new(f, n, 1.0).expect("A1 link is valid")
    }

    pub fn f(&self) -> &ComplexPoly {
        self.f.poly()
    }

    pub fn jet(&self) -> &PolyJet {
        &self.f
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Complex ambient dimension n + 1.
    pub fn ambient_dim(&self) -> usize {
        self.n + 1
    }

    /// Real dimension 2n − 1 of the link.
    pub fn link_dim(&self) -> usize {
        2 * self.n - 1
    }

    fn check(&self, z: &[Complex64]) -> Result<()> {
        if z.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                got: z.len(),
            });
        }
        Ok(())
    }
}

fn check_same(u: &[Complex64], v: &[Complex64]) -> Result<()> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            got: v.len(),
        });
    }
    Ok(())
}

/// `Σ u_j conj(v_j)`.
pub fn hermitian_inner(u: &[Complex64], v: &[Complex64]) -> Result<Complex64> {
    check_same(u, v)?;
    Ok(u.iter().zip(v).map(|(a, b)| a * b.conj()).sum())
}

/// Euclidean inner product of the realified vectors.
pub fn real_inner(u: &[Complex64], v: &[Complex64]) -> Result<f64> {
    check_same(u, v)?;
    Ok(u.iter().zip(v).map(|(a, b)| a.re * b.re + a.im * b.im).sum())
}

/// `(Re f(z), Im f(z), ‖z‖² − ε²)`.
pub fn link_residual(z: &[Complex64], link: &LinkSpec) -> Result<[f64; 3]> {
    link.check(z)?;
    Ok(link_residual_unchecked(z, link))
}

fn link_residual_unchecked(z: &[Complex64], link: &LinkSpec) -> [f64; 3] {
    let fz = link.f.value(z);
    let r2: f64 = z.iter().map(|c| c.norm_sqr()).sum();
    [fz.re, fz.im, r2 - link.epsilon * link.epsilon]
}

/// A system of real equations on realified ℂ^{n+1}.
pub trait Constraints {
    fn count(&self) -> usize;
    fn residual(&self, z: &[Complex64]) -> DVector<f64>;
    /// `count × 2(n+1)` real Jacobian in interleaved coordinates.
    fn jacobian(&self, z: &[Complex64]) -> DMatrix<f64>;
}

impl Constraints for LinkSpec {
    fn count(&self) -> usize {
        3
    }

    fn residual(&self, z: &[Complex64]) -> DVector<f64> {
        DVector::from_row_slice(&link_residual_unchecked(z, self))
    }

    fn jacobian(&self, z: &[Complex64]) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(3, 2 * z.len());
        fill_link_jacobian(&mut j, 0, z, self);
        j
    }
}

/// Writes the three link-constraint rows starting at `row`.
pub(crate) fn fill_link_jacobian(j: &mut DMatrix<f64>, row: usize, z: &[Complex64], link: &LinkSpec) {
    let zero = Complex64::new(0.0, 0.0);
    for (k, d) in link.f.partials(z).into_iter().enumerate() {
        put_block(j, row, 2 * k, d, zero);
        j[(row + 2, 2 * k)] = 2.0 * z[k].re;
        j[(row + 2, 2 * k + 1)] = 2.0 * z[k].im;
    }
}

/// Link constraints plus `Im(rotation · g(z)) = 0`: the preimage of the ray
/// `conj(rotation) · [0, ∞)` (and its opposite) inside the link.
pub struct SliceConstraints<'a> {
    pub link: &'a LinkSpec,
    pub g: &'a PolyJet,
    pub rotation: Complex64,
}

impl Constraints for SliceConstraints<'_> {
    fn count(&self) -> usize {
        4
    }

    fn residual(&self, z: &[Complex64]) -> DVector<f64> {
        let r = link_residual_unchecked(z, self.link);
        let s = (self.rotation * self.g.value(z)).im;
        DVector::from_row_slice(&[r[0], r[1], r[2], s])
    }

    fn jacobian(&self, z: &[Complex64]) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(4, 2 * z.len());
        fill_link_jacobian(&mut j, 0, z, self.link);
        for (k, d) in self.g.partials(z).into_iter().enumerate() {
            let a = self.rotation * d;
            j[(3, 2 * k)] = a.im;
            j[(3, 2 * k + 1)] = a.re;
        }
        j
    }
}

/// Gauss–Newton with Moore–Penrose least-norm steps onto the zero set of
/// `constraints`. After the residual drops below `tol` one more step is taken
/// so that the result is the numerical limit of the iteration.
pub fn project<C: Constraints + ?Sized>(
    constraints: &C,
    z0: &[Complex64],
    tol: f64,
    max_iter: usize,
) -> Result<Point> {
    let mut x = realify(z0);
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let z = Point::from_real(x.as_slice());
        let r = constraints.residual(&z);
        residual = r.norm();
        if !residual.is_finite() {
            break;
        }
        if residual == 0.0 {
            return Ok(z);
        }
        let j = constraints.jacobian(&z);
        let (dx, sigma_min) = least_norm_solve(&j, &r);
        if sigma_min < RANK_THRESHOLD {
            return Err(Error::RankDeficient { sigma: sigma_min });
        }
        x -= dx;
        if residual <= tol {
            return Ok(Point::from_real(x.as_slice()));
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual,
    })
}

pub fn project_to_link(z0: &[Complex64], link: &LinkSpec, tol: f64, max_iter: usize) -> Result<Point> {
    link.check(z0)?;
    project(link, z0, tol, max_iter)
}

/// Orthonormal basis of `T_p K` in realified coordinates.
#[derive(Debug, Clone)]
pub struct TangentFrame {
    pub base_point: Point,
    pub basis: Vec<DVector<f64>>,
}

impl TangentFrame {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `Σ u_i b_i` in realified ambient coordinates.
    pub fn offset(&self, u: &[f64]) -> DVector<f64> {
        let mut v = DVector::zeros(2 * self.base_point.dim());
        for (ui, b) in u.iter().zip(&self.basis) {
            v.axpy(*ui, b, 1.0);
        }
        v
    }

    /// Basis vector `k` as a complex direction.
    pub fn direction(&self, k: usize) -> Point {
        Point::from_real(self.basis[k].as_slice())
    }
}

/// Real orthogonal complement of `{grad̄f(p), i·grad̄f(p), p}`.
pub fn tangent_frame(p: &[Complex64], link: &LinkSpec) -> Result<TangentFrame> {
    link.check(p)?;
    let grad = link.f.conj_gradient(p);
    let igrad = grad.scale(I);
    let spanning = [realify(&grad), realify(&igrad), realify(p)];
    let basis = orthonormal_complement(&spanning, 2 * p.len(), RANK_THRESHOLD)
        .map_err(|norm| Error::DimensionCollapse { norm })?;
    debug_assert_eq!(basis.len(), link.link_dim());
    Ok(TangentFrame {
        base_point: Point(p.to_vec()),
        basis,
    })
}

/// Retraction of a tangent offset back onto the zero set of `constraints`.
pub fn retract<C: Constraints + ?Sized>(
    constraints: &C,
    base: &[Complex64],
    offset: &DVector<f64>,
) -> Result<Point> {
    if offset.iter().all(|v| *v == 0.0) {
        return Ok(Point(base.to_vec()));
    }
    let moved = realify(base) + offset;
    project(
        constraints,
        &Point::from_real(moved.as_slice()),
        DEFAULT_PROJECTION_TOL,
        DEFAULT_MAX_ITER,
    )
}

/// `project_to_link(p + Σ u_i b_i)`; exactly `p` at `u = 0`.
pub fn chart(frame: &TangentFrame, u: &[f64], link: &LinkSpec) -> Result<Point> {
    if u.len() != frame.dim() {
        return Err(Error::DimensionMismatch {
            expected: frame.dim(),
            got: u.len(),
        });
    }
    retract(link, &frame.base_point, &frame.offset(u))
}

/// Gaussian direction scaled to the sphere, then projected onto the link.
pub fn random_link_point<R: Rng + ?Sized>(link: &LinkSpec, rng: &mut R) -> Result<Point> {
    let dim = 2 * link.ambient_dim();
    let x: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let x: Vec<f64> = x.iter().map(|v| v * link.epsilon / norm).collect();
    project_to_link(&Point::from_real(&x), link, DEFAULT_PROJECTION_TOL, DEFAULT_MAX_ITER)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub(crate) fn q(n: usize) -> Point {
        let mut z = Point::zeros(n + 1);
        z[0] = c(SQRT_2 / 2.0, 0.0);
        z[1] = c(0.0, -SQRT_2 / 2.0);
        z
    }

    fn residual_norm(z: &[Complex64], link: &LinkSpec) -> f64 {
        link_residual(z, link).unwrap().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    #[test]
    fn link_spec_validation() {
        let f = ComplexPoly::parse("z1^2 + z2^2 + 1", 2).unwrap();
        assert!(matches!(LinkSpec::new(f, 1, 1.0), Err(Error::InvalidLink(_))));
        let f = ComplexPoly::parse("z1^2 + z2^2", 2).unwrap();
        assert!(LinkSpec::new(f.clone(), 2, 1.0).is_err());
        assert!(LinkSpec::new(f.clone(), 1, 0.0).is_err());
        assert!(LinkSpec::new(f, 1, 0.5).is_ok());
    }

    #[test]
    fn inner_product_examples() {
        let qq = q(3);
        assert_abs_diff_eq!((hermitian_inner(&qq, &qq).unwrap() - c(1.0, 0.0)).norm(), 0.0, epsilon = 1e-15);
        let u = [c(1.0, 0.0), c(0.0, 1.0)];
        let v = [c(0.0, 1.0), c(1.0, 0.0)];
        // 1·(−i) + i·1
        assert_eq!(hermitian_inner(&u, &v).unwrap(), c(0.0, 0.0));
        assert_eq!(real_inner(&u, &v).unwrap(), 0.0);
        let w = [c(0.0, 1.0), c(0.0, 0.0)];
        assert_eq!(hermitian_inner(&u, &w).unwrap(), c(0.0, -1.0));
        assert_eq!(hermitian_inner(&w, &u).unwrap(), c(0.0, 1.0));
        let iu: Vec<_> = u.iter().map(|x| I * x).collect();
        assert_eq!(real_inner(&u, &iu).unwrap(), 0.0);
        assert!(matches!(
            hermitian_inner(&u, &[c(1.0, 0.0)]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn residual_examples() {
        let l3 = LinkSpec::a1(3);
        assert!(residual_norm(&q(3), &l3) < 1e-15);
        let r = link_residual(&Point::zeros(4), &l3).unwrap();
        assert_eq!(r, [0.0, 0.0, -1.0]);
        let l2 = LinkSpec::a1(2);
        let s = 1.0 / SQRT_2;
        assert!(residual_norm(&[c(s, 0.0), c(0.0, 0.0), c(0.0, s)], &l2) < 1e-15);
    }

    #[test]
    fn projection_from_origin_is_rank_deficient() {
        let l = LinkSpec::a1(2);
        assert!(matches!(
            project_to_link(&Point::zeros(3), &l, 1e-12, 50),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn projection_near_q_converges_fast() {
        let l = LinkSpec::a1(3);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let dir: Vec<f64> = (0..8).map(|_| rng.sample(StandardNormal)).collect();
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            let x: Vec<f64> = q(3)
                .to_real()
                .iter()
                .zip(&dir)
                .map(|(a, d)| a + 0.01 * d / norm)
                .collect();
            let p = project_to_link(&Point::from_real(&x), &l, 1e-12, 10).unwrap();
            assert!(residual_norm(&p, &l) <= 1e-12);
        }
    }

    #[test]
    fn radial_projection_matches_ray_bisection() {
        let l = LinkSpec::a1(2);
        let start = q(2).scale(c(1.1, 0.0));
        let p = project_to_link(&start, &l, 1e-12, 50).unwrap();
        assert!(residual_norm(&p, &l) <= 1e-12);
        // f vanishes on the whole ray t·q, so the sphere constraint alone fixes t;
        // bisect ‖t q‖² = 1 on [0.5, 2]
        let (mut lo, mut hi) = (0.5_f64, 2.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if q(2).scale(c(mid, 0.0)).norm_sqr() < 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = q(2).scale(c(lo, 0.0));
        assert!(p.distance(&oracle) < 1e-10);
        assert!(p.distance(&q(2)) <= 0.11);
    }

    #[test]
    fn frame_at_q() {
        let l = LinkSpec::a1(2);
        let p = q(2);
        let frame = tangent_frame(&p, &l).unwrap();
        assert_eq!(frame.dim(), 3);
        let grad = l.jet().conj_gradient(&p);
        let spanning = [grad.clone(), grad.scale(I), p.clone()];
        for (i, b) in frame.basis.iter().enumerate() {
            let bz = Point::from_real(b.as_slice());
            for s in &spanning {
                assert!(real_inner(&bz, s).unwrap().abs() <= 1e-10);
            }
            for (j, b2) in frame.basis.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(b.dot(b2), expected, epsilon = 1e-10);
            }
        }
        // grad̄f(q) has vanishing third entry, so e3 is Hermitian-orthogonal to it
        let e3 = [c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        assert_eq!(hermitian_inner(&e3, &grad).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn frame_dimension_on_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=4 {
            let l = LinkSpec::a1(n);
            for _ in 0..25 {
                let p = random_link_point(&l, &mut rng).unwrap();
                assert_eq!(tangent_frame(&p, &l).unwrap().dim(), 2 * n - 1);
            }
        }
    }

    #[test]
    fn frame_collapse_is_reported() {
        // all three spanning vectors vanish at the critical point
        let l = LinkSpec::a1(2);
        let p = Point::zeros(3);
        assert!(matches!(
            tangent_frame(&p, &l),
            Err(Error::DimensionCollapse { .. })
        ));
    }

    #[test]
    fn chart_is_identity_at_zero() {
        let l = LinkSpec::a1(2);
        let frame = tangent_frame(&q(2), &l).unwrap();
        assert_eq!(chart(&frame, &[0.0; 3], &l).unwrap(), q(2));
    }

    #[test]
    fn chart_along_z3_keeps_im_h_to_first_order() {
        let l = LinkSpec::a1(2);
        let g = ComplexPoly::parse("z1 + 0.5i*z2", 3).unwrap();
        let p = q(2);
        let frame = tangent_frame(&p, &l).unwrap();
        // locate the frame direction closest to real e3
        let e3 = realify(&[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let u: Vec<f64> = frame.basis.iter().map(|b| b.dot(&e3)).collect();
        let t = 1e-3;
        let plus: Vec<f64> = u.iter().map(|v| v * t).collect();
        let minus: Vec<f64> = u.iter().map(|v| -v * t).collect();
        let hp = g.eval(&chart(&frame, &plus, &l).unwrap()).unwrap().im;
        let hm = g.eval(&chart(&frame, &minus, &l).unwrap()).unwrap().im;
        let first_order = (hp - hm) / (2.0 * t);
        assert!(first_order.abs() <= 1e-6, "d Im h = {first_order}");
    }
}
