//! For n = 1 the link is the Hopf link and h embeds it as two circles.

use linkfold::morse::trace_image_n1;
use linkfold::LinkMap;

fn main() -> linkfold::Result<()> {
    let map = LinkMap::brieskorn_a1(1);
    for c in trace_image_n1(&map, 2000, 7)? {
        println!(
            "{} points, center ({:.2e}, {:.2e}), radius {:.10} ± {:.1e}",
            c.points.len(),
            c.center[0],
            c.center[1],
            c.radius_mean,
            c.radius_deviation
        );
    }
    Ok(())
}
