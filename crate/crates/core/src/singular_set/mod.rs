//! The singular point set `S(h)` of `h = g|K_f`.
//!
//! A point `z ∈ K` is singular exactly when `grad̄f(z)`, `grad̄g(z)` and `z`
//! are linearly dependent over ℂ. Away from the locus where the two gradients
//! are themselves dependent, that means `z = a·grad̄f(z) + b·grad̄g(z)`, which
//! together with the link equations cuts out a smooth curve in `(z, a, b)`
//! space. [`trace_singular_curve`] follows that curve; [`direct_singularity_test`]
//! checks singularity from the rank of `dh` on a tangent frame instead.

mod augmented;
mod seed;
mod trace;

pub use augmented::{AugmentedPoint, AugmentedSystem};
pub use seed::{dependent_gradient_points, seed_singular_points, DependentGradientScan};
pub(crate) use trace::correct;
pub use trace::{collect_components, hausdorff_distance, trace_singular_curve, ComponentSet, CurveTrace};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::tangent_frame;
use crate::linalg::{realify_matrix, singular_values};
use crate::polynomial::{Point, PolyJet};
use crate::LinkMap;
use serde::{Deserialize, Serialize};

/// Tolerance for matching the paired singular values of a realified complex matrix.
pub const PAIR_TOLERANCE: f64 = 1e-9;
/// Statistics inside this band are too close to the threshold to be compared.
pub const MARGIN_BAND: (f64, f64) = (1e-10, 1e-6);

/// The `(n+1) × 3` complex matrix with columns `grad̄f(z)`, `grad̄g(z)`, `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionMatrix(pub DMatrix<Complex64>);

impl CriterionMatrix {
    pub fn column(&self, k: usize) -> Vec<Complex64> {
        self.0.column(k).iter().copied().collect()
    }
}

fn check_dims(z: &[Complex64], f: &PolyJet, g: &PolyJet) -> Result<()> {
    for n_vars in [f.n_vars(), g.n_vars()] {
        if z.len() != n_vars {
            return Err(Error::DimensionMismatch {
                expected: n_vars,
                got: z.len(),
            });
        }
    }
    Ok(())
}

pub fn criterion_matrix(z: &[Complex64], f: &PolyJet, g: &PolyJet) -> Result<CriterionMatrix> {
    check_dims(z, f, g)?;
    let gf = f.conj_gradient(z);
    let gg = g.conj_gradient(z);
    Ok(CriterionMatrix(DMatrix::from_fn(z.len(), 3, |r, c| match c {
        0 => gf[r],
        1 => gg[r],
        _ => z[r],
    })))
}

/// Determinant of the 3×3 criterion matrix (ambient dimension 3 only),
/// expanded along the first column.
pub fn criterion_det(z: &[Complex64], f: &PolyJet, g: &PolyJet) -> Result<Complex64> {
    check_dims(z, f, g)?;
    if z.len() != 3 {
        return Err(Error::WrongDimension {
            required: 2,
            got: z.len().saturating_sub(1),
        });
    }
    let m = criterion_matrix(z, f, g)?.0;
    let minor = |r0: usize, r1: usize| m[(r0, 1)] * m[(r1, 2)] - m[(r0, 2)] * m[(r1, 1)];
    Ok(m[(0, 0)] * minor(1, 2) - m[(1, 0)] * minor(0, 2) + m[(2, 0)] * minor(0, 1))
}

/// Ratio `σ₃/σ₁` of the complex criterion matrix; 0 when `σ₁ = 0`.
///
/// The singular values come from the doubled real matrix, where each complex
/// singular value appears twice; pairs are averaged after matching.
pub fn criterion_rank_defect(z: &[Complex64], f: &PolyJet, g: &PolyJet) -> Result<f64> {
    let m = criterion_matrix(z, f, g)?;
    let s = singular_values(&realify_matrix(&m.0));
    let paired: Vec<f64> = s
        .chunks(2)
        .map(|p| {
            if p.len() == 2 {
                debug_assert!(
                    (p[0] - p[1]).abs() <= PAIR_TOLERANCE * s[0].max(1.0),
                    "unpaired singular values {p:?}"
                );
                0.5 * (p[0] + p[1])
            } else {
                p[0]
            }
        })
        .collect();
    let sigma1 = paired.first().copied().unwrap_or(0.0);
    if sigma1 == 0.0 {
        return Ok(0.0);
    }
    Ok(paired.get(2).copied().unwrap_or(0.0) / sigma1)
}

/// Smallest singular value of `dh` restricted to `T_z K`, computed on an
/// orthonormal tangent frame. Independent of the linear-dependence criterion.
pub fn direct_singularity_test(z: &[Complex64], map: &LinkMap) -> Result<f64> {
    let frame = tangent_frame(z, &map.link)?;
    let k = frame.dim();
    if k < 2 {
        return Ok(0.0);
    }
    let partials = map.g.partials(z);
    let mut jac = DMatrix::zeros(2, k);
    for c in 0..k {
        let v = frame.direction(c);
        let dh: Complex64 = partials.iter().zip(v.iter()).map(|(d, w)| d * w).sum();
        jac[(0, c)] = dh.re;
        jac[(1, c)] = dh.im;
    }
    Ok(singular_values(&jac)[1])
}

/// True when `value` lies inside the margin band around the threshold.
pub fn in_margin_band(value: f64) -> bool {
    value >= MARGIN_BAND.0 && value <= MARGIN_BAND.1
}

/// Cross-check of [`criterion_rank_defect`] against [`direct_singularity_test`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OracleAgreement {
    pub samples: usize,
    pub threshold: f64,
    pub both_singular: usize,
    pub both_regular: usize,
    /// Classifications that differ with both statistics outside the margin band.
    pub disagreements: usize,
    /// Points where at least one statistic falls inside the margin band.
    pub in_margin: usize,
    /// Points where either test returned an error.
    pub failed: usize,
}

/// Classifies each point as singular or regular with both tests at `threshold`.
pub fn compare_oracles(map: &LinkMap, points: &[Point], threshold: f64) -> OracleAgreement {
    let mut out = OracleAgreement {
        samples: points.len(),
        threshold,
        ..Default::default()
    };
    for z in points {
        let (Ok(a), Ok(b)) = (
            criterion_rank_defect(z, map.link.jet(), &map.g),
            direct_singularity_test(z, map),
        ) else {
            out.failed += 1;
            continue;
        };
        if in_margin_band(a) || in_margin_band(b) {
            out.in_margin += 1;
            continue;
        }
        match (a <= threshold, b <= threshold) {
            (true, true) => out.both_singular += 1,
            (false, false) => out.both_regular += 1,
            _ => out.disagreements += 1,
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::random_link_point;
    use crate::polynomial::ComplexPoly;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn q(n: usize) -> Point {
        let mut z = Point::zeros(n + 1);
        z[0] = c(SQRT_2 / 2.0, 0.0);
        z[1] = c(0.0, -SQRT_2 / 2.0);
        z
    }

    fn off_curve() -> Point {
        let s = 1.0 / SQRT_2;
        Point(vec![c(0.0, 0.0), c(s, 0.0), c(0.0, s)])
    }

    /// Determinant by the Leibniz permutation sum, a second path to the cofactor expansion.
    fn leibniz_det(m: &DMatrix<Complex64>) -> Complex64 {
        let perms = [
            ([0, 1, 2], 1.0),
            ([1, 2, 0], 1.0),
            ([2, 0, 1], 1.0),
            ([0, 2, 1], -1.0),
            ([2, 1, 0], -1.0),
            ([1, 0, 2], -1.0),
        ];
        perms
            .iter()
            .map(|(p, s)| m[(0, p[0])] * m[(1, p[1])] * m[(2, p[2])] * *s)
            .sum()
    }

    #[test]
    fn criterion_columns_at_q() {
        let map = LinkMap::brieskorn_a1(2);
        let m = criterion_matrix(&q(2), map.link.jet(), &map.g).unwrap();
        let h = SQRT_2 / 2.0;
        let expected = [
            [c(SQRT_2, 0.0), c(0.0, SQRT_2), c(0.0, 0.0)],
            [c(1.0, 0.0), c(0.0, -0.5), c(0.0, 0.0)],
            [c(h, 0.0), c(0.0, -h), c(0.0, 0.0)],
        ];
        for (k, col) in expected.iter().enumerate() {
            for (a, b) in m.column(k).iter().zip(col) {
                assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-15);
            }
        }
        let e3 = [c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let m = criterion_matrix(&e3, map.link.jet(), &map.g).unwrap();
        assert_eq!(m.column(0), vec![c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]);
        assert_eq!(m.column(1), vec![c(1.0, 0.0), c(0.0, -0.5), c(0.0, 0.0)]);
        assert_eq!(m.column(2), e3.to_vec());
    }

    #[test]
    fn second_column_is_constant() {
        let map = LinkMap::brieskorn_a1(3);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let first = criterion_matrix(&q(3), map.link.jet(), &map.g).unwrap().column(1);
        for _ in 0..10 {
            let z = random_link_point(&map.link, &mut rng).unwrap();
            assert_eq!(criterion_matrix(&z, map.link.jet(), &map.g).unwrap().column(1), first);
        }
    }

    #[test]
    fn determinant_examples() {
        let map = LinkMap::brieskorn_a1(2);
        let (f, g) = (map.link.jet(), &map.g);
        assert!(criterion_det(&q(2), f, g).unwrap().norm() < 1e-15);
        let z = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)];
        let d = criterion_det(&z, f, g).unwrap();
        let oracle = leibniz_det(&criterion_matrix(&z, f, g).unwrap().0);
        assert_abs_diff_eq!((d - oracle).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((d - c(2.0, 0.0)).norm(), 0.0, epsilon = 1e-15);
        assert!(criterion_det(&off_curve(), f, g).unwrap().norm() > 1e-2);
        let map3 = LinkMap::brieskorn_a1(3);
        assert!(matches!(
            criterion_det(&q(3), map3.link.jet(), &map3.g),
            Err(Error::WrongDimension { .. })
        ));
    }

    #[test]
    fn rank_defect_examples() {
        let map = LinkMap::brieskorn_a1(2);
        let (f, g) = (map.link.jet(), &map.g);
        assert!(criterion_rank_defect(&q(2), f, g).unwrap() <= 1e-12);
        let d = criterion_rank_defect(&off_curve(), f, g).unwrap();
        // complex SVD oracle: σ₁σ₂σ₃ = |det| and σ₁² + σ₂² + σ₃² = ‖M‖_F²
        let m = criterion_matrix(&off_curve(), f, g).unwrap().0;
        let det = leibniz_det(&m).norm();
        assert!(det > 1e-2);
        assert!(d >= 1e-2, "defect {d}");
        for theta in [0.3, 1.7, 4.0] {
            let alpha = Complex64::from_polar(1.0, theta);
            let rotated = q(2).scale(alpha);
            let dr = criterion_rank_defect(&rotated, f, g).unwrap();
            assert!(dr <= 1e-10);
        }
    }

    #[test]
    fn zero_matrix_defect_is_zero() {
        let f = PolyJet::new(ComplexPoly::zero(3));
        let g = PolyJet::new(ComplexPoly::zero(3));
        assert_eq!(criterion_rank_defect(&[c(0.0, 0.0); 3], &f, &g).unwrap(), 0.0);
    }

    #[test]
    fn direct_test_examples() {
        let map = LinkMap::brieskorn_a1(2);
        assert!(direct_singularity_test(&q(2), &map).unwrap() <= 1e-10);
        assert!(direct_singularity_test(&off_curve(), &map).unwrap() >= 1e-2);
    }

    #[test]
    fn margin_band_bounds() {
        assert!(in_margin_band(1e-8));
        assert!(!in_margin_band(1e-12));
        assert!(!in_margin_band(1e-3));
    }
}
