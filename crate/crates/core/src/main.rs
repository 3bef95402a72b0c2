use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use linkfold::report::{cmd_image_svg, cmd_morse, cmd_singular_set, cmd_verify_a1, exit_code, RunConfig};
use linkfold::Result;

#[derive(Parser)]
#[command(name = "linkfold", version, about = "Singular sets of holomorphic maps on links")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Flat key = value config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    f: Option<String>,
    #[arg(long)]
    g: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(f) = &self.f {
            cfg.f = Some(f.clone());
        }
        if let Some(g) = &self.g {
            cfg.g = Some(g.clone());
        }
        cfg.n = self.n.unwrap_or(cfg.n);
        cfg.epsilon = self.epsilon.unwrap_or(cfg.epsilon);
        cfg.seed = self.seed.unwrap_or(cfg.seed);
        if let Some(out) = &self.out {
            cfg.out = out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Full check of f = Σ z_j², g = z1 + (i/2) z2; writes report.json, singular_set.csv, image.svg.
    VerifyA1(Common),
    /// Trace S(h) and write singular_set.csv.
    SingularSet(Common),
    /// Draw h(S(h)) to image.svg.
    ImageSvg(Common),
    /// Slice and composed Morse data to morse.json.
    Morse {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        eta_angle: Option<f64>,
    },
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::VerifyA1(common) => {
            let cfg = common.resolve()?;
            let outcome = cmd_verify_a1(cfg.n, &cfg.out, &cfg)?;
            for c in &outcome.report.checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if let Some(name) = &outcome.report.failed_check {
                eprintln!("first failed check: {name}");
            }
            Ok(outcome.exit_code)
        }
        Command::SingularSet(common) => {
            println!("{}", cmd_singular_set(&common.resolve()?)?.display());
            Ok(0)
        }
        Command::ImageSvg(common) => {
            println!("{}", cmd_image_svg(&common.resolve()?)?.display());
            Ok(0)
        }
        Command::Morse {
            common,
            theta,
            eta_angle,
        } => {
            let cfg = common.resolve()?;
            let path = cmd_morse(&cfg, theta.unwrap_or(cfg.theta), eta_angle.unwrap_or(cfg.eta_angle))?;
            println!("{}", path.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
