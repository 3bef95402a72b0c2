//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2, TAU};
use std::time::Instant;

use linkfold::fold::{equivariance_error, fold_record, FoldKind};
use linkfold::geometry::{chart, project_to_link, random_link_point, real_inner, hermitian_inner, tangent_frame};
use linkfold::morse::{composed_morse, slice_critical_points, slice_morse_index, trace_image_n1, SliceSpec};
use linkfold::polynomial::I;
use linkfold::report::{cmd_verify_a1, singular_set_csv, RunConfig};
use linkfold::singular_set::{
    collect_components, criterion_matrix, criterion_rank_defect, direct_singularity_test, in_margin_band,
    seed_singular_points, CurveTrace,
};
use linkfold::{LinkMap, Point, Tolerances};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const R_IN: f64 = SQRT_2 / 4.0;
const R_OUT: f64 = 3.0 * SQRT_2 / 4.0;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn traces(map: &LinkMap) -> Vec<CurveTrace> {
    let tol = Tolerances::default();
    let seeds = seed_singular_points(map, 200, 42, &tol).expect("seeding");
    collect_components(&seeds, map, &tol).traces
}

fn ensure(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_1() -> Outcome {
    let mut notes = Vec::new();
    for n in 2..=4 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let start = Instant::now();
        let outcome = cmd_verify_a1(n, dir.path(), &RunConfig::default()).map_err(|e| format!("n = {n}: {e}"))?;
        let secs = start.elapsed().as_secs_f64();
        let comps = &outcome.report.components;
        let mut by_radius: Vec<_> = comps.iter().map(|c| &c.fold).collect();
        by_radius.sort_by(|a, b| a.image_radius_mean.total_cmp(&b.image_radius_mean));
        let ok = comps.len() == 2
            && comps.iter().all(|c| c.closed)
            && by_radius.iter().all(|r| r.image_center[0].hypot(r.image_center[1]) <= 1e-6)
            && (by_radius[0].image_radius_mean - R_IN).abs() <= 1e-6
            && (by_radius[1].image_radius_mean - R_OUT).abs() <= 1e-6
            && by_radius[1].kind == FoldKind::Definite
            && by_radius[0].kind == FoldKind::Indefinite
            && by_radius[0].absolute_index == Some(n - 1)
            && outcome.exit_code == 0
            && secs <= 60.0;
        let msg = format!(
            "n={n}: {} components, radii ({:.9}, {:.9}), inner {:?}/{:?}, outer {:?}, exit {}, {secs:.2}s",
            comps.len(),
            by_radius.first().map_or(f64::NAN, |r| r.image_radius_mean),
            by_radius.get(1).map_or(f64::NAN, |r| r.image_radius_mean),
            by_radius.first().map(|r| r.kind),
            by_radius.first().and_then(|r| r.absolute_index),
            by_radius.get(1).map(|r| r.kind),
            outcome.exit_code
        );
        if !ok {
            return Err(msg);
        }
        notes.push(msg);
    }
    Ok(notes.join("; "))
}

fn criterion_2() -> Outcome {
    let mut worst = 0.0_f64;
    let mut count = 0;
    for n in 2..=4 {
        for t in traces(&LinkMap::brieskorn_a1(n)) {
            for p in &t.points {
                let z = &p.z;
                let tail = z[2..].iter().map(|c| c.norm()).fold(0.0, f64::max);
                let circle = (z[0] - I * z[1]).norm().min((z[0] + I * z[1]).norm());
                let modulus = (z[0].norm() - FRAC_1_SQRT_2).abs().max((z[1].norm() - FRAC_1_SQRT_2).abs());
                worst = worst.max(tail).max(circle).max(modulus);
                count += 1;
            }
        }
    }
    ensure(worst <= 1e-8, format!("{count} traced points, max deviation {worst:.3e}"))
}

fn criterion_3() -> Outcome {
    let map = LinkMap::brieskorn_a1(2);
    let tol = Tolerances::default();
    let slice = SliceSpec { theta: 0.0 };
    let pts = slice_critical_points(&slice, &traces(&map), &map, &tol);
    let recs = pts
        .iter()
        .map(|p| slice_morse_index(p, &slice, &map, &tol))
        .collect::<linkfold::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    let mut idx: Vec<usize> = recs.iter().map(|r| r.morse_index).collect();
    idx.sort_unstable();
    let q = Point::new(vec![Complex64::new(FRAC_1_SQRT_2, 0.0), -I * FRAC_1_SQRT_2, Complex64::new(0.0, 0.0)]);
    let at_q = recs.iter().find(|r| r.point.distance(&q) <= 1e-8).ok_or("q not among slice critical points")?;
    let e = &at_q.hessian_eigenvalues;
    let ratio = e[0] / e[1];
    ensure(
        idx == vec![1, 2] && e.iter().all(|v| *v < 0.0) && (ratio - 2.0).abs() <= 1e-3,
        format!("indices {idx:?}, eigenvalues at q {e:?}, ratio {ratio:.8}"),
    )
}

fn criterion_4() -> Outcome {
    let tol = Tolerances::default();
    let mut notes = Vec::new();
    for n in [2, 3] {
        let map = LinkMap::brieskorn_a1(n);
        let recs = composed_morse([1.0, 0.0], &traces(&map), &map, &tol).map_err(|e| e.to_string())?;
        let mut idx: Vec<usize> = recs.iter().map(|r| r.morse_index).collect();
        idx.sort_unstable();
        let values: Vec<f64> = recs.iter().map(|r| r.value).collect();
        let expected = [-R_OUT, -R_IN, R_IN, R_OUT];
        let max_err = values
            .iter()
            .zip(expected)
            .map(|(v, e)| (v - e).abs())
            .fold(0.0, f64::max);
        let msg = format!("n={n}: indices {idx:?}, max value error {max_err:.2e}");
        if recs.len() != 4 || idx != vec![0, n - 1, n, 2 * n - 1] || max_err > 1e-6 {
            return Err(msg);
        }
        notes.push(msg);
    }
    Ok(notes.join("; "))
}

fn criterion_5() -> Outcome {
    let map = LinkMap::brieskorn_a1(2);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut points: Vec<Point> = Vec::new();
    while points.len() < 10_000 {
        if let Ok(z) = random_link_point(&map.link, &mut rng) {
            points.push(z);
        }
    }
    let random = points.len();
    points.extend(traces(&map).iter().flat_map(|t| t.points.iter().map(|p| p.z.clone())));
    let (mut singular, mut regular, mut margin, mut disagree) = (0, 0, 0, 0);
    for z in &points {
        let a = criterion_rank_defect(z, map.link.jet(), &map.g).map_err(|e| e.to_string())?;
        let b = direct_singularity_test(z, &map).map_err(|e| e.to_string())?;
        if in_margin_band(a) || in_margin_band(b) {
            margin += 1;
            continue;
        }
        match (a <= 1e-8, b <= 1e-8) {
            (true, true) => singular += 1,
            (false, false) => regular += 1,
            _ => disagree += 1,
        }
    }
    ensure(
        disagree == 0 && singular > 0,
        format!(
            "{random} random + {} traced points: {singular} singular, {regular} regular, {margin} in margin, {disagree} disagreements",
            points.len() - random
        ),
    )
}

fn det3(m: [[Complex64; 3]; 3]) -> Complex64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_inner = 0.0_f64;
    for _ in 0..10_000 {
        let m = rng.gen_range(1..=6);
        let mut draw = || -> Vec<Complex64> {
            (0..m)
                .map(|_| Complex64::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)))
                .collect()
        };
        let (u, v) = (draw(), draw());
        let d = (real_inner(&u, &v).unwrap() - hermitian_inner(&u, &v).unwrap().re).abs();
        worst_inner = worst_inner.max(d);
    }

    let map = LinkMap::brieskorn_a1(3);
    let mut worst_minor = 0.0_f64;
    for _ in 0..1000 {
        let z = random_link_point(&map.link, &mut rng).map_err(|e| e.to_string())?;
        let m = criterion_matrix(&z, map.link.jet(), &map.g).map_err(|e| e.to_string())?.0;
        let minor = |r: [usize; 3]| det3([0, 1, 2].map(|i| [0, 1, 2].map(|c| m[(r[i], c)])));
        let im = |a: Complex64, b: Complex64| (a * b.conj()).im;
        for j in 2..4 {
            let expected = I * 4.0 * im(z[1], z[j]) - 2.0 * im(z[0], z[j]);
            let got = minor([0, 1, j]);
            worst_minor = worst_minor.max((got - expected).norm() / expected.norm().max(1.0));
        }
        for j in 3..4 {
            let expected = I * 4.0 * im(z[2], z[j]);
            let got = minor([0, 2, j]);
            worst_minor = worst_minor.max((got - expected).norm() / expected.norm().max(1.0));
        }
    }
    ensure(
        worst_inner <= 1e-12 && worst_minor <= 1e-10,
        format!("inner product identity {worst_inner:.2e} over 10^4 pairs; minor identities {worst_minor:.2e} over 10^3 points"),
    )
}

fn criterion_7() -> Outcome {
    let map = LinkMap::brieskorn_a1(2);
    let eq = equivariance_error(&map, 1000, 7).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0_f64;
    let mut count = 0;
    for t in traces(&map) {
        for p in &t.points {
            let alpha = Complex64::from_polar(1.0, rng.gen_range(0.0..TAU));
            let d = criterion_rank_defect(&p.z.scale(alpha), map.link.jet(), &map.g).map_err(|e| e.to_string())?;
            worst = worst.max(d);
            count += 1;
        }
    }
    ensure(
        eq <= 1e-12 && worst <= 1e-8,
        format!("equivariance {eq:.2e}; rotated defect {worst:.2e} over {count} traced points"),
    )
}

fn criterion_8() -> Outcome {
    let comps = trace_image_n1(&LinkMap::brieskorn_a1(1), 2000, 8).map_err(|e| e.to_string())?;
    let radii: Vec<f64> = comps.iter().map(|c| c.radius_mean).collect();
    ensure(
        radii.len() == 2 && (radii[0] - R_IN).abs() <= 1e-6 && (radii[1] - R_OUT).abs() <= 1e-6,
        format!("{} components, radii {radii:?}", radii.len()),
    )
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    // chart tangency: distance from the tangent plane shrinks quadratically
    let mut worst_ratio = 0.0_f64;
    let mut worst_idem = 0.0_f64;
    for n in 2..=4 {
        let map = LinkMap::brieskorn_a1(n);
        for _ in 0..50 {
            let p = random_link_point(&map.link, &mut rng).map_err(|e| e.to_string())?;
            let frame = tangent_frame(&p, &map.link).map_err(|e| e.to_string())?;
            let u: Vec<f64> = (0..frame.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
            let gap = |t: f64| -> f64 {
                let ut: Vec<f64> = u.iter().map(|v| v * t / norm).collect();
                let on = chart(&frame, &ut, &map.link).unwrap();
                let flat = Point::from_real((linkfold::linalg::realify(&p) + frame.offset(&ut)).as_slice());
                on.distance(&flat)
            };
            let ratio = gap(1e-2) / gap(1e-3);
            worst_ratio = worst_ratio.max((ratio / 100.0 - 1.0).abs());
            let again = project_to_link(&p, &map.link, 1e-12, 50).map_err(|e| e.to_string())?;
            worst_idem = worst_idem.max(again.distance(&p));
        }
    }

    let map = LinkMap::brieskorn_a1(3);
    let csv_a = singular_set_csv(&traces(&map), &map).map_err(|e| e.to_string())?;
    let csv_b = singular_set_csv(&traces(&map), &map).map_err(|e| e.to_string())?;

    let tol = Tolerances::default();
    let mut classified = 0;
    let mut formula_ok = true;
    for n in 2..=4 {
        let map = LinkMap::brieskorn_a1(n);
        for (id, t) in traces(&map).iter().enumerate() {
            for s in fold_record(id, t, &map, &tol, 12).samples {
                classified += 1;
                let lambda = s.negative_eigenvalues;
                formula_ok &= lambda <= 2 * n - 2
                    && s.kind != FoldKind::Degenerate
                    && s.absolute_index == Some(lambda.min(2 * n - 2 - lambda))
                    && ((s.kind == FoldKind::Definite) == (s.absolute_index == Some(0)));
            }
        }
    }
    ensure(
        worst_ratio <= 0.05 && worst_idem <= 1e-13 && csv_a == csv_b && formula_ok,
        format!(
            "tangency ratio error {worst_ratio:.2e}, idempotence {worst_idem:.1e}, deterministic CSV {}, index formula on {classified} points {}",
            csv_a == csv_b,
            formula_ok
        ),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 round fold map for n = 2, 3, 4", criterion_1),
        ("2 exact singular locus", criterion_2),
        ("3 slice Hessian structure", criterion_3),
        ("4 composed Morse function", criterion_4),
        ("5 oracle equivalence", criterion_5),
        ("6 algebraic identities", criterion_6),
        ("7 equivariance", criterion_7),
        ("8 image of the Hopf link", criterion_8),
        ("9 property suite", criterion_9),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS criterion {name} ({secs:.1}s): {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name} ({secs:.1}s): {msg}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
