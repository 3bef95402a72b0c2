//! The fold Hessian from second differences agrees with differencing a
//! first-difference gradient, on a map without S¹-symmetry.

use linkfold::fold::{intrinsic_hessian, local_fold_data, LocalFoldData};
use linkfold::geometry::chart;
use linkfold::numdiff::richardson_jacobian;
use linkfold::singular_set::{collect_components, seed_singular_points};
use linkfold::{ComplexPoly, LinkMap, LinkSpec, Tolerances};

fn normal_component(data: &LocalFoldData, map: &LinkMap, s: &[f64]) -> f64 {
    let k = data.frame.dim();
    let mut u = vec![0.0; k];
    for (c, w) in s.iter().zip(&data.kernel_basis) {
        for (ui, wi) in u.iter_mut().zip(w.iter()) {
            *ui += c * wi;
        }
    }
    let h = map.h_real(&chart(&data.frame, &u, &map.link).unwrap());
    h[0] * data.normal[0] + h[1] * data.normal[1]
}

#[test]
fn two_schemes_agree_on_perturbed_folds() {
    let g = ComplexPoly::parse("z1 + 0.5i*z2 + 0.1*z3", 3).unwrap();
    let map = LinkMap::new(LinkSpec::a1(2), g).unwrap();
    let tol = Tolerances::default();
    let seeds = seed_singular_points(&map, 100, 4, &tol).unwrap();
    let traces = collect_components(&seeds, &map, &tol).traces;
    assert!(!traces.is_empty());
    let mut checked = 0;
    for t in &traces {
        for i in (0..t.len()).step_by((t.len() / 5).max(1)) {
            let data = local_fold_data(&t.points[i].z, &map, &tol).unwrap();
            let direct = intrinsic_hessian(&data, &map, &tol).unwrap();
            let dim = data.kernel_basis.len();
            let inner = 1e-4;
            let gradient = |s: &[f64]| -> linkfold::Result<Vec<f64>> {
                Ok((0..dim)
                    .map(|k| {
                        let mut plus = s.to_vec();
                        let mut minus = s.to_vec();
                        plus[k] += inner;
                        minus[k] -= inner;
                        (normal_component(&data, &map, &plus) - normal_component(&data, &map, &minus)) / (2.0 * inner)
                    })
                    .collect())
            };
            let nested = richardson_jacobian(gradient, dim, dim, 1e-3).unwrap();
            let nested = (&nested + nested.transpose()) * 0.5;
            let rel = (&direct - &nested).norm() / direct.norm();
            assert!(rel <= 1e-4, "relative difference {rel:.3e} at point {i}");
            checked += 1;
        }
    }
    assert!(checked >= 5);
}
