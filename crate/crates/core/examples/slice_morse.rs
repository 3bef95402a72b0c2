//! Critical points of ψ = Re(e^{−iθ}h) on the slice over a ray.

use linkfold::morse::{slice_critical_points, slice_morse_index, SliceSpec};
use linkfold::singular_set::{collect_components, seed_singular_points};
use linkfold::{LinkMap, Tolerances};

fn main() -> linkfold::Result<()> {
    let tol = Tolerances::default();
    let map = LinkMap::brieskorn_a1(2);
    let seeds = seed_singular_points(&map, 200, 42, &tol)?;
    let traces = collect_components(&seeds, &map, &tol).traces;
    for theta in [0.0, std::f64::consts::FRAC_PI_2, 1.0] {
        let slice = SliceSpec { theta };
        println!("θ = {theta:.4}");
        for p in slice_critical_points(&slice, &traces, &map, &tol) {
            let r = slice_morse_index(&p, &slice, &map, &tol)?;
            println!(
                "  ψ = {:.10}, index {}, eigenvalues {:?}",
                r.value, r.morse_index, r.hessian_eigenvalues
            );
        }
    }
    Ok(())
}
