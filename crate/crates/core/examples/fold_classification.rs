//! Classify the folds on each singular circle and check the round-fold structure.

use linkfold::fold::{equivariance_error, fold_record, verify_round};
use linkfold::singular_set::{collect_components, seed_singular_points};
use linkfold::{LinkMap, Tolerances};

fn main() -> linkfold::Result<()> {
    let tol = Tolerances::default();
    for n in 2..=4 {
        let map = LinkMap::brieskorn_a1(n);
        let seeds = seed_singular_points(&map, 200, 42, &tol)?;
        let traces = collect_components(&seeds, &map, &tol).traces;
        let records: Vec<_> = traces
            .iter()
            .enumerate()
            .map(|(id, t)| fold_record(id, t, &map, &tol, 8))
            .collect();
        println!("n = {n}");
        for r in &records {
            println!(
                "  radius {:.10}: {:?}, absolute index {:?}, λ = {}, consistent {}",
                r.image_radius_mean, r.kind, r.absolute_index, r.negative_eigenvalues, r.consistent
            );
        }
        println!("  {:?}", verify_round(&traces, &records));
        println!("  equivariance error {:.2e}", equivariance_error(&map, 1000, 1)?);
    }
    Ok(())
}
