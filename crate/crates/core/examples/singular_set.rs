//! Seed and trace the singular set of `h = g|K` for the A1 link.

use linkfold::singular_set::{collect_components, criterion_rank_defect, seed_singular_points};
use linkfold::{LinkMap, Tolerances};

fn main() -> linkfold::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let map = LinkMap::brieskorn_a1(n);
    let tol = Tolerances::default();
    let seeds = seed_singular_points(&map, 200, 42, &tol)?;
    println!("n = {n}: {} seeds on S(h)", seeds.len());
    let set = collect_components(&seeds, &map, &tol);
    for (id, t) in set.traces.iter().enumerate() {
        let r = t.image.iter().map(|w| w[0].hypot(w[1])).sum::<f64>() / t.len() as f64;
        let defect = t
            .points
            .iter()
            .map(|p| criterion_rank_defect(&p.z, map.link.jet(), &map.g).unwrap())
            .fold(0.0, f64::max);
        println!(
            "component {id}: {} points, closed {}, arc length {:.9}, image radius {r:.9}, max defect {defect:.2e}",
            t.len(),
            t.closed,
            t.arc_length
        );
    }
    for f in &set.failures {
        println!("failed: {f}");
    }
    Ok(())
}
