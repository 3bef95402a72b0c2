use linkfold::geometry::{chart, link_residual, project_to_link, random_link_point, tangent_frame};
use linkfold::singular_set::{collect_components, seed_singular_points};
use linkfold::{ComplexPoly, LinkMap, LinkSpec, Point, Tolerances};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn term() -> impl Strategy<Value = (Complex64, Vec<u32>)> {
    (
        (-5.0f64..5.0, -5.0f64..5.0).prop_map(|(a, b)| Complex64::new(a, b)),
        prop::collection::vec(0u32..4, 3),
    )
}

fn poly() -> impl Strategy<Value = ComplexPoly> {
    prop::collection::vec(term(), 0..6).prop_map(|terms| ComplexPoly::from_terms(3, terms).unwrap())
}

fn point() -> impl Strategy<Value = Point> {
    prop::collection::vec((-1.5f64..1.5, -1.5f64..1.5), 3)
        .prop_map(|v| Point::new(v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()))
}

fn close(a: Complex64, b: Complex64, scale: f64) -> bool {
    (a - b).norm() <= 1e-9 * scale.max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn print_then_parse_is_identity(p in poly()) {
        let text = p.to_string();
        let back = ComplexPoly::parse(&text, 3).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn evaluation_is_linear(p in poly(), q in poly(), z in point(), c in (-3.0f64..3.0, -3.0f64..3.0)) {
        let c = Complex64::new(c.0, c.1);
        let lhs = p.add(&q.scale(c)).eval(&z).unwrap();
        let pz = p.eval(&z).unwrap();
        let qz = q.eval(&z).unwrap();
        prop_assert!(close(lhs, pz + c * qz, pz.norm() + qz.norm() * c.norm()));
    }

    #[test]
    fn euler_identity_for_homogeneous_parts(p in poly(), z in point(), d in 1u32..4) {
        // keep only the degree-d part so the result is homogeneous
        let terms: Vec<(Complex64, Vec<u32>)> = p
            .terms()
            .filter(|(e, _)| e.iter().sum::<u32>() == d)
            .map(|(e, c)| (c, e.to_vec()))
            .collect();
        let h = ComplexPoly::from_terms(3, terms).unwrap();
        let mut euler = Complex64::new(0.0, 0.0);
        for j in 1..=3 {
            euler += z[j - 1] * h.wirtinger_partial(j).unwrap().eval(&z).unwrap();
        }
        let value = h.eval(&z).unwrap() * d as f64;
        prop_assert!(close(euler, value, 1e2));
    }

    #[test]
    fn projection_is_idempotent(seed in 0u64..10_000, n in 2usize..5) {
        let link = LinkSpec::a1(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_link_point(&link, &mut rng).unwrap();
        let r = link_residual(&p, &link).unwrap();
        prop_assert!(r.iter().all(|v| v.abs() <= 1e-12));
        let again = project_to_link(&p, &link, 1e-12, 50).unwrap();
        prop_assert!(again.distance(&p) <= 1e-13);
    }

    #[test]
    fn chart_has_second_order_contact(seed in 0u64..10_000, n in 2usize..5) {
        let link = LinkSpec::a1(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_link_point(&link, &mut rng).unwrap();
        let frame = tangent_frame(&p, &link).unwrap();
        let k = frame.dim();
        let u: Vec<f64> = (0..k).map(|i| ((seed as f64 + 1.0) * (i as f64 + 1.7)).sin()).collect();
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        let gap = |t: f64| {
            let ut: Vec<f64> = u.iter().map(|v| v * t / norm).collect();
            let moved = chart(&frame, &ut, &link).unwrap();
            let r = link_residual(&moved, &link).unwrap();
            assert!(r.iter().all(|v| v.abs() <= 1e-12));
            let flat = Point::from_real((linkfold::linalg::realify(&p) + frame.offset(&ut)).as_slice());
            moved.distance(&flat)
        };
        let ratio = gap(1e-2) / gap(1e-3);
        prop_assert!((ratio / 100.0 - 1.0).abs() < 0.05, "ratio {}", ratio);
    }
}

#[test]
fn tracing_is_deterministic() {
    let map = LinkMap::brieskorn_a1(2);
    let tol = Tolerances::default();
    let run = || {
        let seeds = seed_singular_points(&map, 50, 11, &tol).unwrap();
        collect_components(&seeds, &map, &tol).traces
    };
    let (a, b) = (run(), run());
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.points, y.points);
        assert_eq!(x.image, y.image);
    }
}
