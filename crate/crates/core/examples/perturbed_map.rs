//! A non-equivariant map g = z1 + (i/2) z2 + 0.1 z3: the singular set is
//! still traced and classified, but the equivariance check does not apply.

use linkfold::fold::{equivariance_error, fold_record, verify_round};
use linkfold::singular_set::{collect_components, seed_singular_points};
use linkfold::{ComplexPoly, LinkMap, LinkSpec, Tolerances};

fn main() -> linkfold::Result<()> {
    let g = ComplexPoly::parse("z1 + 0.5i*z2 + 0.1*z3 + 0.05*z1*z3", 3)?;
    let map = LinkMap::new(LinkSpec::a1(2), g)?;
    let tol = Tolerances::default();
    let seeds = seed_singular_points(&map, 300, 3, &tol)?;
    let set = collect_components(&seeds, &map, &tol);
    let records: Vec<_> = set
        .traces
        .iter()
        .enumerate()
        .map(|(id, t)| fold_record(id, t, &map, &tol, 12))
        .collect();
    for (t, r) in set.traces.iter().zip(&records) {
        println!(
            "component {}: {} points, closed {}, {:?} index {:?}, radius {:.6} ± {:.2e}",
            r.component_id,
            t.len(),
            t.closed,
            r.kind,
            r.absolute_index,
            r.image_radius_mean,
            r.image_radius_deviation
        );
    }
    println!("{:?}", verify_round(&set.traces, &records));
    match equivariance_error(&map, 100, 1) {
        Ok(e) => println!("equivariance error {e:.2e}"),
        Err(e) => println!("equivariance: {e}"),
    }
    Ok(())
}
