//! Write the CSV, SVG and JSON artifacts of a run into a directory.

use linkfold::report::{cmd_image_svg, cmd_morse, cmd_singular_set, cmd_verify_a1, RunConfig};

fn main() -> linkfold::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "target/linkfold-artifacts".into());
    let cfg = RunConfig::parse(&format!("n = 2\nseed = 42\nout = {out:?}\n"))?;
    println!("{}", cmd_singular_set(&cfg)?.display());
    println!("{}", cmd_image_svg(&cfg)?.display());
    println!("{}", cmd_morse(&cfg, 0.0, 0.0)?.display());
    let outcome = cmd_verify_a1(2, cfg.out.as_path(), &cfg)?;
    for f in &outcome.files {
        println!("{}", f.display());
    }
    println!("exit code {}", outcome.exit_code);
    Ok(())
}
