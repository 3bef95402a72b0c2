//! Run configuration, pipelines and artifact writers (CSV, SVG, JSON).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fold::{equivariance_error, fit_circle, fold_record, verify_round, FoldKind, FoldRecord, RoundVerdict};
use crate::geometry::random_link_point;
use crate::morse::{
    composed_morse, slice_critical_points, slice_morse_index, trace_image_n1, CriticalPointRecord, ImageComponent,
    SliceSpec,
};
use crate::polynomial::{ComplexPoly, Point};
use crate::singular_set::{
    collect_components, compare_oracles, criterion_rank_defect, seed_singular_points, CurveTrace, OracleAgreement,
};
use crate::{LinkMap, LinkSpec, Tolerances};

/// Keys accepted in a config file.
pub const CONFIG_KEYS: &[&str] = &[
    "f",
    "g",
    "n",
    "epsilon",
    "seed",
    "samples",
    "fold_samples",
    "out",
    "theta",
    "eta_angle",
    "newton",
    "singular",
    "hessian_step",
    "dead_band",
    "jacobian_step",
    "step_min",
    "step_max",
    "step_init",
    "max_trace_steps",
];

/// Tolerance for the A1 radius, center and critical-value checks.
pub const A1_TOLERANCE: f64 = 1e-6;
/// Random link points used for the criterion/direct oracle comparison in reports.
pub const ORACLE_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Defaults to `z1^2 + … + z{n+1}^2`.
    pub f: Option<String>,
    /// Defaults to `z1 + 0.5i*z2`.
    pub g: Option<String>,
    pub n: usize,
    pub epsilon: f64,
    pub seed: u64,
    /// Random starts for seeding.
    pub samples: usize,
    /// Points classified per component.
    pub fold_samples: usize,
    pub out: PathBuf,
    pub theta: f64,
    pub eta_angle: f64,
    #[serde(flatten)]
    pub tolerances: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            f: None,
            g: None,
            n: 2,
            epsilon: 1.0,
            seed: 42,
            samples: 200,
            fold_samples: 8,
            out: PathBuf::from("out"),
            theta: 0.0,
            eta_angle: 0.0,
            tolerances: Tolerances::default(),
        }
    }
}

impl RunConfig {
    /// Parses a flat `key = value` file (TOML syntax, no tables).
    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e| Error::Config(format!("{e}")))?;
        for (key, value) in &table {
            if !CONFIG_KEYS.contains(&key.as_str()) {
                return Err(Error::Config(format!("unknown key `{key}`")));
            }
            if value.is_table() || value.is_array() {
                return Err(Error::Config(format!("key `{key}` must be a scalar")));
            }
        }
        let cfg: RunConfig = table.try_into().map_err(|e| Error::Config(format!("{e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config("epsilon must be positive".into()));
        }
        let t = &self.tolerances;
        if !(t.step_min > 0.0 && t.step_min <= t.step_init && t.step_init <= t.step_max) {
            return Err(Error::Config("need 0 < step_min <= step_init <= step_max".into()));
        }
        Ok(())
    }

    pub fn f_text(&self) -> String {
        self.f.clone().unwrap_or_else(|| {
            (1..=self.n + 1)
                .map(|j| format!("z{j}^2"))
                .collect::<Vec<_>>()
                .join(" + ")
        })
    }

    pub fn g_text(&self) -> String {
        self.g.clone().unwrap_or_else(|| "z1 + 0.5i*z2".to_string())
    }

    pub fn build_map(&self) -> Result<LinkMap> {
        self.validate()?;
        let vars = self.n + 1;
        let f = ComplexPoly::parse(&self.f_text(), vars)?;
        let g = ComplexPoly::parse(&self.g_text(), vars)?;
        LinkMap::new(LinkSpec::new(f, self.n, self.epsilon)?, g)
    }
}

/// Process exit code for an error: 2 configuration, 4 degenerate geometry,
/// 3 any other numerical failure.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Syntax { .. }
        | Error::VariableOutOfRange { .. }
        | Error::DimensionMismatch { .. }
        | Error::InvalidLink(_)
        | Error::Config(_)
        | Error::Io(_) => 2,
        Error::Degenerate { .. } | Error::RankZero { .. } | Error::RankTwo { .. } | Error::BifurcationSuspected { .. } => {
            4
        }
        _ => 3,
    }
}

/// Seeds and traces of one run.
#[derive(Debug, Clone)]
pub struct SingularSetRun {
    pub traces: Vec<CurveTrace>,
    pub seeds: usize,
    pub failures: Vec<String>,
}

pub fn compute_singular_set(map: &LinkMap, cfg: &RunConfig) -> Result<SingularSetRun> {
    let tol = &cfg.tolerances;
    let seeds = seed_singular_points(map, cfg.samples, cfg.seed, tol)?;
    let set = collect_components(&seeds, map, tol);
    if set.traces.is_empty() {
        return Err(Error::EmptyResult(format!(
            "no seed could be traced: {}",
            set.failures.join("; ")
        )));
    }
    Ok(SingularSetRun {
        traces: set.traces,
        seeds: seeds.len(),
        failures: set.failures,
    })
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// One row per traced point: `component_id, arc_param, re_z1, im_z1, …, re_h, im_h, defect`.
pub fn singular_set_csv(traces: &[CurveTrace], map: &LinkMap) -> Result<String> {
    let m = map.link.ambient_dim();
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let mut header = vec!["component_id".to_string(), "arc_param".to_string()];
    for j in 1..=m {
        header.push(format!("re_z{j}"));
        header.push(format!("im_z{j}"));
    }
    header.extend(["re_h", "im_h", "defect"].map(String::from));
    w.write_record(&header).map_err(csv_error)?;
    for (id, trace) in traces.iter().enumerate() {
        for (point, s) in trace.points.iter().zip(trace.arc_params()) {
            let mut row = vec![id.to_string(), float(s)];
            for c in point.z.iter() {
                row.push(float(c.re));
                row.push(float(c.im));
            }
            let h = map.h(&point.z);
            row.push(float(h.re));
            row.push(float(h.im));
            row.push(float(criterion_rank_defect(&point.z, map.link.jet(), &map.g)?));
            w.write_record(&row).map_err(csv_error)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// SVG of image curves: axes, origin marker, one closed path per curve and a
/// radius label for each. The view box fits the curves with a 10% margin.
pub fn image_svg(curves: &[Vec<[f64; 2]>]) -> String {
    let all: Vec<[f64; 2]> = curves.iter().flatten().copied().collect();
    let (mut x0, mut x1, mut y0, mut y1) = (-1.0_f64, 1.0_f64, -1.0_f64, 1.0_f64);
    if !all.is_empty() {
        x0 = all.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        x1 = all.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
        y0 = all.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
        y1 = all.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-9);
    let margin = 0.1 * span;
    let (vx, vw) = (x0 - margin, x1 - x0 + 2.0 * margin);
    // SVG y grows downwards
    let (vy, vh) = (-y1 - margin, y1 - y0 + 2.0 * margin);
    let stroke = span / 400.0;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{vx:.6} {vy:.6} {vw:.6} {vh:.6}" width="600" height="{:.0}">"#,
        600.0 * vh / vw
    );
    let _ = writeln!(
        s,
        r##"<g id="axes" stroke="#888" stroke-width="{stroke:.6}"><line x1="{vx:.6}" y1="0" x2="{:.6}" y2="0"/><line x1="0" y1="{vy:.6}" x2="0" y2="{:.6}"/></g>"##,
        vx + vw,
        vy + vh
    );
    let _ = writeln!(s, r#"<circle id="origin" cx="0" cy="0" r="{:.6}" fill="black"/>"#, 3.0 * stroke);
    for (id, curve) in curves.iter().enumerate() {
        if curve.is_empty() {
            continue;
        }
        let mut d = String::new();
        for (k, p) in curve.iter().enumerate() {
            let _ = write!(d, "{}{:.9} {:.9} ", if k == 0 { "M" } else { "L" }, p[0], -p[1]);
        }
        d.push('Z');
        let _ = writeln!(
            s,
            r#"<path id="component-{id}" data-points="{}" d="{d}" fill="none" stroke="black" stroke-width="{:.6}"/>"#,
            curve.len(),
            2.0 * stroke
        );
        let (c, r, _) = fit_circle(curve);
        let angle = std::f64::consts::FRAC_PI_4;
        let _ = writeln!(
            s,
            r#"<text x="{:.6}" y="{:.6}" font-size="{:.6}" font-family="sans-serif">{r:.4}</text>"#,
            c[0] + r * angle.cos() + 2.0 * stroke,
            -(c[1] + r * angle.sin()) - 2.0 * stroke,
            span / 25.0
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Critical point in JSON form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPointSummary {
    /// `[re, im]` per coordinate.
    pub point: Vec<[f64; 2]>,
    pub value: f64,
    pub morse_index: usize,
    pub hessian_eigenvalues: Vec<f64>,
    pub gradient_norm: f64,
}

impl From<&CriticalPointRecord> for CriticalPointSummary {
    fn from(r: &CriticalPointRecord) -> Self {
        CriticalPointSummary {
            point: r.point.iter().map(|c| [c.re, c.im]).collect(),
            value: r.value,
            morse_index: r.morse_index,
            hessian_eigenvalues: r.hessian_eigenvalues.clone(),
            gradient_norm: r.gradient_norm,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorseReport {
    pub theta: f64,
    pub eta: [f64; 2],
    pub slice: Vec<CriticalPointSummary>,
    pub composed: Vec<CriticalPointSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub component_id: usize,
    pub closed: bool,
    pub points: usize,
    pub arc_length: f64,
    /// Largest augmented-system residual over the trace.
    pub max_residual: f64,
    /// Largest criterion defect over the trace.
    pub max_defect: f64,
    pub fold: FoldRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageComponentSummary {
    pub points: usize,
    pub center: [f64; 2],
    pub radius_mean: f64,
    pub radius_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    pub f: String,
    pub g: String,
    pub passed: bool,
    pub failed_check: Option<String>,
    pub checks: Vec<CheckResult>,
    pub components: Vec<ComponentSummary>,
    pub round: Option<RoundVerdict>,
    pub morse: Option<MorseReport>,
    pub equivariance_error: Option<f64>,
    pub oracle_agreement: Option<OracleAgreement>,
    pub image_components: Vec<ImageComponentSummary>,
    /// Wall-clock seconds per stage.
    pub timings: BTreeMap<String, f64>,
}

impl Report {
    fn new(command: &str, cfg: &RunConfig) -> Self {
        Report {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config: cfg.clone(),
            f: cfg.f_text(),
            g: cfg.g_text(),
            passed: true,
            failed_check: None,
            checks: Vec::new(),
            components: Vec::new(),
            round: None,
            morse: None,
            equivariance_error: None,
            oracle_agreement: None,
            image_components: Vec::new(),
            timings: BTreeMap::new(),
        }
    }

    fn check(&mut self, name: &str, passed: bool, detail: String) {
        if !passed && self.failed_check.is_none() {
            self.failed_check = Some(name.to_string());
        }
        self.passed &= passed;
        self.checks.push(CheckResult {
            name: name.to_string(),
            passed,
            detail,
        });
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Writes `singular_set.csv`.
pub fn cmd_singular_set(cfg: &RunConfig) -> Result<PathBuf> {
    let map = cfg.build_map()?;
    let run = compute_singular_set(&map, cfg)?;
    write_file(&cfg.out, "singular_set.csv", &singular_set_csv(&run.traces, &map)?)
}

/// Writes `image.svg` of `h(S(h))`, or of `h(K)` when `n = 1`.
pub fn cmd_image_svg(cfg: &RunConfig) -> Result<PathBuf> {
    let map = cfg.build_map()?;
    let curves: Vec<Vec<[f64; 2]>> = if map.n() == 1 {
        trace_image_n1(&map, cfg.samples.max(1000), cfg.seed)?
            .into_iter()
            .map(|c| sort_by_angle(c.points, c.center))
            .collect()
    } else {
        compute_singular_set(&map, cfg)?.traces.into_iter().map(|t| t.image).collect()
    };
    write_file(&cfg.out, "image.svg", &image_svg(&curves))
}

fn sort_by_angle(mut points: Vec<[f64; 2]>, center: [f64; 2]) -> Vec<[f64; 2]> {
    let angle = |p: &[f64; 2]| (p[1] - center[1]).atan2(p[0] - center[0]);
    points.sort_by(|a, b| angle(a).total_cmp(&angle(b)));
    points
}

/// Slice and composed Morse data for the ray at angle `theta` and
/// `η = (cos eta_angle, sin eta_angle)`.
pub fn morse_report(map: &LinkMap, traces: &[CurveTrace], theta: f64, eta_angle: f64, tol: &Tolerances) -> Result<MorseReport> {
    let slice = SliceSpec { theta };
    let slice_records = slice_critical_points(&slice, traces, map, tol)
        .iter()
        .map(|p| slice_morse_index(p, &slice, map, tol))
        .collect::<Result<Vec<_>>>()?;
    let eta = [eta_angle.cos(), eta_angle.sin()];
    let composed = composed_morse(eta, traces, map, tol)?;
    Ok(MorseReport {
        theta,
        eta,
        slice: slice_records.iter().map(Into::into).collect(),
        composed: composed.iter().map(Into::into).collect(),
    })
}

/// Writes `morse.json`.
pub fn cmd_morse(cfg: &RunConfig, theta: f64, eta_angle: f64) -> Result<PathBuf> {
    let map = cfg.build_map()?;
    if map.n() < 2 {
        return Err(Error::Config("morse needs n >= 2".into()));
    }
    let run = compute_singular_set(&map, cfg)?;
    let report = morse_report(&map, &run.traces, theta, eta_angle, &cfg.tolerances)?;
    write_file(&cfg.out, "morse.json", &to_json(&report)?)
}

/// Result of the A1 verification pipeline.
#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub report: Report,
    pub exit_code: i32,
    pub files: Vec<PathBuf>,
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

/// Runs the full check of `f = Σ z_j²`, `g = z1 + (i/2) z2` on the unit
/// sphere: seed, trace, classify, round check, slice Morse (θ = 0),
/// composed Morse (η = Re) and equivariance. Writes `report.json`,
/// `singular_set.csv` and `image.svg` to `out_dir`. `n = 1` checks the
/// image of the link instead.
pub fn cmd_verify_a1(n: usize, out_dir: &Path, base: &RunConfig) -> Result<VerifyOutcome> {
    let cfg = RunConfig {
        f: None,
        g: None,
        n,
        epsilon: 1.0,
        out: out_dir.to_path_buf(),
        ..base.clone()
    };
    let map = cfg.build_map()?;
    let mut report = Report::new("verify-a1", &cfg);
    let r_in = std::f64::consts::SQRT_2 / 4.0;
    let r_out = 3.0 * r_in;
    let mut files = Vec::new();
    let total = Instant::now();

    if n == 1 {
        let t = Instant::now();
        let comps = trace_image_n1(&map, cfg.samples.max(1000), cfg.seed)?;
        report.timings.insert("image".into(), t.elapsed().as_secs_f64());
        let radii: Vec<f64> = comps.iter().map(|c| c.radius_mean).collect();
        report.check(
            "image_components",
            comps.len() == 2,
            format!("{} image components", comps.len()),
        );
        report.check(
            "image_radii",
            radii.len() == 2 && close(radii[0], r_in, A1_TOLERANCE) && close(radii[1], r_out, A1_TOLERANCE),
            format!("radii {radii:?}"),
        );
        let gap = min_cross_distance(&comps);
        report.check("image_embedding", gap >= r_in, format!("components {gap:.6} apart"));
        report.image_components = comps
            .iter()
            .map(|c| ImageComponentSummary {
                points: c.points.len(),
                center: c.center,
                radius_mean: c.radius_mean,
                radius_deviation: c.radius_deviation,
            })
            .collect();
        let curves: Vec<Vec<[f64; 2]>> = comps.into_iter().map(|c| sort_by_angle(c.points, c.center)).collect();
        files.push(write_file(out_dir, "image.svg", &image_svg(&curves))?);
    } else {
        verify_folds(&map, &cfg, &mut report, &mut files)?;
    }

    report.timings.insert("total".into(), total.elapsed().as_secs_f64());
    files.push(write_file(out_dir, "report.json", &to_json(&report)?)?);
    let degenerate = report
        .components
        .iter()
        .any(|c| c.fold.kind == FoldKind::Degenerate);
    let exit_code = match (report.passed, degenerate) {
        (true, _) => 0,
        (false, true) => 4,
        (false, false) => 3,
    };
    Ok(VerifyOutcome {
        report,
        exit_code,
        files,
    })
}

fn min_cross_distance(comps: &[ImageComponent]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..comps.len() {
        for j in (i + 1)..comps.len() {
            for a in &comps[i].points {
                for b in &comps[j].points {
                    best = best.min((a[0] - b[0]).hypot(a[1] - b[1]));
                }
            }
        }
    }
    best
}

fn verify_folds(map: &LinkMap, cfg: &RunConfig, report: &mut Report, files: &mut Vec<PathBuf>) -> Result<()> {
    let n = map.n();
    let tol = &cfg.tolerances;
    let r_in = std::f64::consts::SQRT_2 / 4.0;
    let r_out = 3.0 * r_in;

    let t = Instant::now();
    let run = compute_singular_set(map, cfg)?;
    report.timings.insert("trace".into(), t.elapsed().as_secs_f64());
    let traces = &run.traces;
    files.push(write_file(&cfg.out, "singular_set.csv", &singular_set_csv(traces, map)?)?);
    files.push(write_file(
        &cfg.out,
        "image.svg",
        &image_svg(&traces.iter().map(|t| t.image.clone()).collect::<Vec<_>>()),
    )?);

    let closed = traces.iter().filter(|t| t.closed).count();
    report.check(
        "components",
        traces.len() == 2 && closed == 2,
        format!("{} components, {closed} closed, from {} seeds", traces.len(), run.seeds),
    );

    let mut locus_err = 0.0_f64;
    for tr in traces {
        for p in &tr.points {
            let z = &p.z;
            let tail = z[2..].iter().map(|c| c.norm()).fold(0.0, f64::max);
            let i = Complex64::new(0.0, 1.0);
            let circle = (z[0] - i * z[1]).norm().min((z[0] + i * z[1]).norm());
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let modulus = (z[0].norm() - s).abs().max((z[1].norm() - s).abs());
            locus_err = locus_err.max(tail).max(circle).max(modulus);
        }
    }
    report.check("locus", locus_err <= 1e-8, format!("max deviation from the explicit circles {locus_err:.3e}"));

    let t = Instant::now();
    let records: Vec<FoldRecord> = traces
        .iter()
        .enumerate()
        .map(|(id, tr)| fold_record(id, tr, map, tol, cfg.fold_samples))
        .collect();
    report.timings.insert("classify".into(), t.elapsed().as_secs_f64());
    for (tr, rec) in traces.iter().zip(&records) {
        let max_residual = tr
            .points
            .iter()
            .map(|p| crate::singular_set::AugmentedSystem::new(map).residual(p).norm())
            .fold(0.0, f64::max);
        let max_defect = tr
            .points
            .iter()
            .map(|p| criterion_rank_defect(&p.z, map.link.jet(), &map.g).unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max);
        report.components.push(ComponentSummary {
            component_id: rec.component_id,
            closed: tr.closed,
            points: tr.len(),
            arc_length: tr.arc_length,
            max_residual,
            max_defect,
            fold: rec.clone(),
        });
    }

    let outer = records.iter().max_by(|a, b| a.image_radius_mean.total_cmp(&b.image_radius_mean));
    let inner = records.iter().min_by(|a, b| a.image_radius_mean.total_cmp(&b.image_radius_mean));
    let fold_ok = match (outer, inner) {
        (Some(o), Some(i)) if records.len() == 2 => {
            o.kind == FoldKind::Definite
                && o.absolute_index == Some(0)
                && i.kind == FoldKind::Indefinite
                && i.absolute_index == Some(n - 1)
        }
        _ => false,
    };
    report.check(
        "fold_types",
        fold_ok,
        records
            .iter()
            .map(|r| format!("radius {:.6}: {:?} index {:?}", r.image_radius_mean, r.kind, r.absolute_index))
            .collect::<Vec<_>>()
            .join("; "),
    );
    let formula_ok = records.iter().flat_map(|r| &r.samples).all(|s| {
        s.kind == FoldKind::Degenerate
            || s.absolute_index == Some(s.negative_eigenvalues.min(2 * n - 2 - s.negative_eigenvalues))
    });
    report.check("absolute_index_formula", formula_ok, "min(λ, 2n−2−λ) on every sample".into());
    let flat = records
        .iter()
        .all(|r| r.image_radius_deviation <= 1e-8 * r.image_radius_mean);
    report.check(
        "constant_radius",
        flat,
        records
            .iter()
            .map(|r| format!("{:.3e}", r.image_radius_deviation))
            .collect::<Vec<_>>()
            .join(", "),
    );

    let verdict = verify_round(traces, &records);
    let round_ok = match &verdict {
        RoundVerdict::Round { radii, .. } => {
            // the fitted circle centers; the verdict's centroid only anchors winding numbers
            let centered = records
                .iter()
                .all(|r| r.image_center[0].hypot(r.image_center[1]) <= A1_TOLERANCE);
            centered
                && radii.len() == 2
                && close(radii[0], r_in, A1_TOLERANCE)
                && close(radii[1], r_out, A1_TOLERANCE)
        }
        RoundVerdict::NotRound { .. } => false,
    };
    let centers: Vec<String> = records
        .iter()
        .map(|r| format!("({:.3e}, {:.3e})", r.image_center[0], r.image_center[1]))
        .collect();
    report.check("round", round_ok, format!("{verdict:?}, fitted centers {}", centers.join(" ")));
    report.round = Some(verdict);

    let t = Instant::now();
    match morse_report(map, traces, 0.0, 0.0, tol) {
        Ok(m) => {
            let slice = sorted(m.slice.iter().map(|r| r.morse_index).collect());
            report.check(
                "slice_morse",
                slice == sorted(vec![2 * n - 2, n - 1]),
                format!("indices {slice:?}"),
            );
            let composed = sorted(m.composed.iter().map(|r| r.morse_index).collect());
            let values: Vec<f64> = m.composed.iter().map(|r| r.value).collect();
            let expected = [-r_out, -r_in, r_in, r_out];
            let values_ok = values.len() == 4 && values.iter().zip(expected).all(|(v, e)| close(*v, e, A1_TOLERANCE));
            report.check(
                "composed_morse",
                composed == vec![0, n - 1, n, 2 * n - 1] && values_ok,
                format!("indices {composed:?}, values {values:?}"),
            );
            report.morse = Some(m);
        }
        Err(e) => {
            report.check("slice_morse", false, e.to_string());
            report.check("composed_morse", false, e.to_string());
        }
    }
    report.timings.insert("morse".into(), t.elapsed().as_secs_f64());

    let eq = equivariance_error(map, 1000, cfg.seed)?;
    report.check("equivariance", eq <= 1e-12, format!("max |h(αz) − αh(z)| = {eq:.3e}"));
    report.equivariance_error = Some(eq);

    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut sample: Vec<Point> = Vec::with_capacity(ORACLE_SAMPLES);
    for _ in 0..ORACLE_SAMPLES {
        if let Ok(z) = random_link_point(&map.link, &mut rng) {
            sample.push(z);
        }
    }
    sample.extend(traces.iter().flat_map(|t| t.points.iter().map(|p| p.z.clone())));
    let agreement = compare_oracles(map, &sample, tol.singular);
    report.check(
        "oracle_agreement",
        agreement.disagreements == 0,
        format!("{} disagreements over {} points", agreement.disagreements, agreement.samples),
    );
    report.oracle_agreement = Some(agreement);
    report.timings.insert("oracles".into(), t.elapsed().as_secs_f64());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parses_flat_keys_and_rejects_unknown_ones() {
        let cfg = RunConfig::parse("n = 3\nepsilon = 2\nseed = 7\ndead_band = 1e-6\ng = \"z1 + z2\"\n").unwrap();
        assert_eq!(cfg.n, 3);
        assert_eq!(cfg.epsilon, 2.0);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.tolerances.dead_band, 1e-6);
        assert_eq!(cfg.tolerances.newton, 1e-12);
        assert_eq!(cfg.f_text(), "z1^2 + z2^2 + z3^2 + z4^2");
        assert!(matches!(RunConfig::parse("colour = 1"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::parse("n = 0"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::parse("n = "), Err(Error::Config(_))));
    }

    #[test]
    fn bad_polynomial_is_a_config_error() {
        let cfg = RunConfig {
            g: Some("z1 + * z2".into()),
            ..Default::default()
        };
        let err = cfg.build_map().unwrap_err();
        assert_eq!(exit_code(&err), 2);
        assert_eq!(exit_code(&Error::Degenerate { eigenvalue: 0.0, band: 1.0 }), 4);
        assert_eq!(exit_code(&Error::StepCollapse { min_step: 1e-4 }), 3);
    }

    #[test]
    fn empty_svg_has_axes_only() {
        let svg = image_svg(&[]);
        assert!(svg.contains(r#"id="axes""#));
        assert!(svg.contains(r#"id="origin""#));
        assert!(!svg.contains("<path"));
        assert!(svg.contains(r#"viewBox="-1.200000 -1.200000 2.400000 2.400000""#));
    }

    #[test]
    fn svg_labels_radii() {
        let circle = |r: f64| -> Vec<[f64; 2]> {
            (0..50)
                .map(|k| {
                    let t = std::f64::consts::TAU * k as f64 / 50.0;
                    [r * t.cos(), r * t.sin()]
                })
                .collect()
        };
        let r = std::f64::consts::SQRT_2 / 4.0;
        let svg = image_svg(&[circle(r), circle(3.0 * r)]);
        assert!(svg.contains(">0.3536<"));
        assert!(svg.contains(">1.0607<"));
        assert_eq!(svg.matches("<path").count(), 2);
        assert!(svg.contains(r#"data-points="50""#));
    }
}
