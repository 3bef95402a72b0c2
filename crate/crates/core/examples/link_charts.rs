//! Project onto a link, build a tangent frame and move in a retraction chart.

use linkfold::geometry::{chart, link_residual, project_to_link, tangent_frame};
use linkfold::{LinkSpec, Point};
use num_complex::Complex64;

fn main() -> linkfold::Result<()> {
    let link = LinkSpec::a1(2);
    let z0 = Point::new(vec![Complex64::new(0.9, 0.1), Complex64::new(0.2, -0.6), Complex64::new(0.1, 0.3)]);
    println!("residual before: {:?}", link_residual(&z0, &link)?);
    let p = project_to_link(&z0, &link, 1e-12, 50)?;
    println!("projected point: {:?}", p.0);
    println!("residual after:  {:?}", link_residual(&p, &link)?);

    let frame = tangent_frame(&p, &link)?;
    println!("tangent frame dimension: {}", frame.dim());
    for t in [1e-1, 1e-2, 1e-3] {
        let u = vec![t, 0.0, -t];
        let moved = chart(&frame, &u, &link)?;
        // second-order contact: distance to the tangent plane point shrinks like t²
        let flat = Point::from_real((linkfold::linalg::realify(&p) + frame.offset(&u)).as_slice());
        println!("t = {t:.0e}: |chart − tangent| = {:.3e}", moved.distance(&flat));
    }
    Ok(())
}
