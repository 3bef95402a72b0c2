//! The Morse function η∘h on the link and its four critical points.

use linkfold::morse::composed_morse;
use linkfold::singular_set::{collect_components, seed_singular_points};
use linkfold::{LinkMap, Tolerances};

fn main() -> linkfold::Result<()> {
    let tol = Tolerances::default();
    for n in [2, 3] {
        let map = LinkMap::brieskorn_a1(n);
        let seeds = seed_singular_points(&map, 200, 42, &tol)?;
        let traces = collect_components(&seeds, &map, &tol).traces;
        for eta in [[1.0, 0.0], [-1.0, 0.0], [0.6, 0.8]] {
            println!("n = {n}, η = {eta:?}");
            for r in composed_morse(eta, &traces, &map, &tol)? {
                println!("  value {:+.10}  index {}  |grad| {:.1e}", r.value, r.morse_index, r.gradient_norm);
            }
        }
    }
    Ok(())
}
