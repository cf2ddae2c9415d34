//! Batch front end: parses JSON model documents, drives the sampling,
//! covariance, and diagnostic entry points of the library, and writes
//! plot-ready CSV/JSON artifacts whose bytes are a deterministic function of
//! the flags and seed. Every command is a thin adapter — no numerical logic
//! lives here.

use std::f64::consts::{PI, TAU};
use std::path::Path;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use sphere_grf::analysis::{
    hilbert_ratio, integrability_check, jacobi_difference_check, malyarenko_ratio,
    regularity_report, regularity_report_analytic, RegularityReport,
};
use sphere_grf::covariance::{cov_matrix, JitterPolicy};
use sphere_grf::io::{self, ModelDocument, RunSidecar};
use sphere_grf::sampler::{
    sample_cholesky, sample_kl_sphere, sample_spacetime, stream_rng, FieldSample, RngSpec,
};
use sphere_grf::specfun::{JacobiPair, SpherePoint};
use sphere_grf::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "sphere-grf",
    version,
    about = "Simulate and diagnose isotropic Gaussian random fields on spheres"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Clone, Debug, PartialEq, Serialize, Deserialize)]
enum Command {
    /// Draw field replicates at spatial points and emit them as CSV.
    Simulate(SimulateArgs),
    /// Draw space-time field replicates on a points × times grid.
    SimulateSpacetime(SpacetimeArgs),
    /// Assemble a covariance matrix and emit its upper triangle.
    Covariance(CovarianceArgs),
    /// Ratio of the incremental variance to its small-angle asymptote.
    VerifyMalyarenko(RatioArgs),
    /// Small-angle ratio series for the square-root-summable regime.
    VerifyHilbert(RatioArgs),
    /// Residuals of the three-term difference identity on a fixed grid.
    VerifyIdentity(IdentityArgs),
    /// Analytic path-regularity report for a model.
    Classify(ClassifyArgs),
    /// Apply a fractional transform and emit the transformed model document.
    Fraclap(FraclapArgs),
    /// Estimate a Hölder exponent from simulated great-circle data.
    Holder(HolderArgs),
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
struct SimulateArgs {
    /// Model document (JSON, schema aps-v1).
    #[arg(long)]
    model: String,
    /// Points: grid:lat-lon:NxM | greatcircle:N | random:N:seed[:d] | CSV path.
    #[arg(long)]
    points: String,
    /// Number of independent replicates.
    #[arg(long, default_value_t = 100)]
    replicates: usize,
    /// RNG seed.
    #[arg(long)]
    seed: u64,
    /// Truncation degree for the harmonic sampler.
    #[arg(long = "L", default_value_t = 64)]
    l: u64,
    /// Covariance tolerance for the factorization route.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Output CSV path (stdout when omitted; files get a .meta.json sidecar).
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
struct SpacetimeArgs {
    /// Model document with a temporal section.
    #[arg(long)]
    model: String,
    /// Points: grid:lat-lon:NxM | greatcircle:N | random:N:seed[:d] | CSV path.
    #[arg(long)]
    points: String,
    /// Time grid as start:step:count.
    #[arg(long)]
    times: String,
    /// Number of independent replicates.
    #[arg(long, default_value_t = 100)]
    replicates: usize,
    /// RNG seed.
    #[arg(long)]
    seed: u64,
    /// Truncation degree for the harmonic sampler.
    #[arg(long = "L", default_value_t = 64)]
    l: u64,
    /// Output CSV path (stdout when omitted; files get a .meta.json sidecar).
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
struct CovarianceArgs {
    /// Model document (JSON, schema aps-v1).
    #[arg(long)]
    model: String,
    /// Points: grid:lat-lon:NxM | greatcircle:N | random:N:seed[:d] | CSV path.
    #[arg(long)]
    points: String,
    /// Certified tolerance for each matrix entry.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
struct RatioArgs {
    /// Model document (JSON, schema aps-v1).
    #[arg(long)]
    model: String,
    /// Comma-separated list of angles v.
    #[arg(long)]
    v: String,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
struct IdentityArgs {
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
struct ClassifyArgs {
    /// Model document (JSON, schema aps-v1).
    #[arg(long)]
    model: String,
    /// Also report the small-angle integrability decision at this exponent.
    #[arg(long)]
    gamma: Option<f64>,
    /// Output JSON path (stdout when omitted).
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
struct FraclapArgs {
    /// Model document (JSON, schema aps-v1).
    #[arg(long)]
    model: String,
    /// Order of the fractional transform.
    #[arg(long)]
    sigma: f64,
    /// Output JSON path (stdout when omitted).
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
struct HolderArgs {
    /// Model document (JSON, schema aps-v1).
    #[arg(long)]
    model: String,
    /// Circle lattice, greatcircle:N form only.
    #[arg(long, default_value = "greatcircle:256")]
    points: String,
    /// Number of independent replicates (at least 1000).
    #[arg(long, default_value_t = 10_000)]
    replicates: usize,
    /// RNG seed.
    #[arg(long)]
    seed: u64,
    /// Output JSON path (stdout when omitted).
    #[arg(long)]
    out: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| run(&cli.cmd)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Honor SPHERE_GRF_THREADS as a cap on worker parallelism.
fn configure_threads() -> Result<()> {
    let v = match std::env::var("SPHERE_GRF_THREADS") {
        Err(std::env::VarError::NotPresent) => return Ok(()),
        Err(std::env::VarError::NotUnicode(_)) => String::new(),
        Ok(v) => v,
    };
    let n: usize = v.trim().parse().unwrap_or(0);
    if n == 0 {
        return Err(Error::Config(format!(
            "SPHERE_GRF_THREADS must be a positive integer, got {v:?}"
        )));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("thread pool setup failed: {e}")))
}

fn run(cmd: &Command) -> Result<()> {
    match cmd {
        Command::Simulate(a) => simulate(a),
        Command::SimulateSpacetime(a) => simulate_spacetime(a),
        Command::Covariance(a) => covariance(a),
        Command::VerifyMalyarenko(a) => ratio_command(a, RatioKind::Malyarenko),
        Command::VerifyHilbert(a) => ratio_command(a, RatioKind::Hilbert),
        Command::VerifyIdentity(a) => verify_identity(a),
        Command::Classify(a) => classify(a),
        Command::Fraclap(a) => fraclap(a),
        Command::Holder(a) => holder(a),
    }
}

/// Write atomically to the requested path, or to stdout when none is given.
fn emit(out: &Option<String>, content: &str) -> Result<()> {
    match out {
        Some(p) => io::write_atomic(Path::new(p), content.as_bytes()),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Sample CSV prefixed with a comment line carrying the seed metadata; file
/// outputs additionally get a JSON sidecar at `<out>.meta.json`.
fn emit_sample(out: &Option<String>, doc: &ModelDocument, sample: &FieldSample) -> Result<()> {
    let side = RunSidecar::for_sample(sample, io::model_hash(doc)?);
    let content = format!(
        "# seed={} method={} truncation_l={} jitter={} model_sha256={}\n{}",
        side.seed,
        side.method,
        side.truncation_l,
        side.jitter,
        side.model_hash,
        io::sample_csv(sample)
    );
    emit(out, &content)?;
    if let Some(p) = out {
        let meta = format!("{p}.meta.json");
        io::write_atomic(Path::new(&meta), (side.json()? + "\n").as_bytes())?;
    }
    Ok(())
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let doc = io::read_model(Path::new(&a.model))?;
    let spec = doc.spectrum()?;
    let points = parse_points(&a.points)?;
    let rng = RngSpec::new(a.seed, 0);
    let on_s2 = points.iter().all(|p| p.sphere_dim() == 2);
    let sample = if on_s2 && spec.lambda().dimension() == Some(2) {
        sample_kl_sphere(&spec, a.l, &points, a.replicates, rng)?
    } else {
        let cov = cov_matrix(&spec, &points, a.tol, JitterPolicy::Auto { max_jitter: 1e-6 })?;
        sample_cholesky(&cov, a.replicates, rng)?
    };
    emit_sample(&a.out, &doc, &sample)
}

fn simulate_spacetime(a: &SpacetimeArgs) -> Result<()> {
    let doc = io::read_model(Path::new(&a.model))?;
    let model = doc.spacetime()?;
    let points = parse_points(&a.points)?;
    let times = parse_times(&a.times)?;
    let rng = RngSpec::new(a.seed, 0);
    let sample = sample_spacetime(&model, a.l, &points, &times, a.replicates, rng)?;
    emit_sample(&a.out, &doc, &sample)
}

fn covariance(a: &CovarianceArgs) -> Result<()> {
    let doc = io::read_model(Path::new(&a.model))?;
    let spec = doc.spectrum()?;
    let points = parse_points(&a.points)?;
    let cov = cov_matrix(&spec, &points, a.tol, JitterPolicy::None)?;
    let mut csv = String::from("i,j,value\n");
    for i in 0..cov.dim() {
        for j in i..cov.dim() {
            csv.push_str(&format!("{i},{j},{}\n", cov.matrix[(i, j)]));
        }
    }
    emit(&a.out, &csv)
}

enum RatioKind {
    Malyarenko,
    Hilbert,
}

fn ratio_command(a: &RatioArgs, kind: RatioKind) -> Result<()> {
    let doc = io::read_model(Path::new(&a.model))?;
    let spec = doc.spectrum()?;
    let v = parse_v_list(&a.v)?;
    let series = match kind {
        RatioKind::Malyarenko => malyarenko_ratio(&spec, &v)?,
        RatioKind::Hilbert => hilbert_ratio(&spec, &v)?,
    };
    emit(&a.out, &io::ratio_csv(&series))
}

fn verify_identity(a: &IdentityArgs) -> Result<()> {
    let index_pairs = [(0.0, 0.0), (0.5, 0.5), (1.5, 0.5)];
    let angles = [0.1, 0.7, 2.5];
    let mut csv = String::from("n,alpha,beta,theta,residual\n");
    let mut max_resid = 0.0f64;
    let mut cases = 0usize;
    for &(alpha, beta) in &index_pairs {
        let jp = JacobiPair::new(alpha, beta)?;
        for &theta in &angles {
            for n in 0..=50u64 {
                let r = jacobi_difference_check(n, jp, theta)?;
                max_resid = max_resid.max(r);
                cases += 1;
                csv.push_str(&format!("{n},{alpha},{beta},{theta},{r}\n"));
            }
        }
    }
    emit(&a.out, &csv)?;
    if a.out.is_some() {
        println!("max residual {max_resid:e} over {cases} cases");
    }
    Ok(())
}

fn classify(a: &ClassifyArgs) -> Result<()> {
    let doc = io::read_model(Path::new(&a.model))?;
    let spec = doc.spectrum()?;
    let report = regularity_report_analytic(&spec)?;
    let mut val = serde_json::to_value(&report).map_err(Error::from)?;
    if let Some(g) = a.gamma {
        let integ = integrability_check(&spec, g)?;
        if let Some(map) = val.as_object_mut() {
            map.insert(
                "integrability".into(),
                serde_json::to_value(&integ).map_err(Error::from)?,
            );
        }
    }
    let text = serde_json::to_string_pretty(&val).map_err(Error::from)? + "\n";
    emit(&a.out, &text)
}

fn fraclap(a: &FraclapArgs) -> Result<()> {
    let doc = io::read_model(Path::new(&a.model))?;
    let transformed = doc.spectrum()?.fractional_transform(a.sigma, true)?;
    let mut out_doc = ModelDocument::from_spectrum(&transformed);
    out_doc.temporal = doc.temporal.clone();
    out_doc.c_l = doc.c_l.clone();
    emit(&a.out, &(io::model_json(&out_doc)? + "\n"))
}

#[derive(Serialize)]
struct HolderOutput<'a> {
    seed: u64,
    circle_points: usize,
    replicates: usize,
    report: &'a RegularityReport,
}

fn holder(a: &HolderArgs) -> Result<()> {
    let doc = io::read_model(Path::new(&a.model))?;
    let spec = doc.spectrum()?;
    let n = parse_greatcircle(&a.points)?;
    let report = regularity_report(&spec, n, a.replicates, 10, RngSpec::new(a.seed, 0))?;
    let out = HolderOutput {
        seed: a.seed,
        circle_points: n,
        replicates: a.replicates,
        report: &report,
    };
    let text = serde_json::to_string_pretty(&out).map_err(Error::from)? + "\n";
    emit(&a.out, &text)
}

fn bad_points(s: &str) -> Error {
    Error::Config(format!("unrecognized point spec {s:?}"))
}

/// Parse a point specification: a builtin generator, or a CSV file of
/// coordinate rows that are renormalized onto the sphere.
fn parse_points(s: &str) -> Result<Vec<SpherePoint>> {
    if let Some(rest) = s.strip_prefix("grid:lat-lon:") {
        let (n, m) = rest.split_once('x').ok_or_else(|| bad_points(s))?;
        let n: usize = n.parse().map_err(|_| bad_points(s))?;
        let m: usize = m.parse().map_err(|_| bad_points(s))?;
        if n == 0 || m == 0 {
            return Err(bad_points(s));
        }
        let mut pts = Vec::with_capacity(n * m);
        for i in 0..n {
            let theta = PI * (i as f64 + 0.5) / n as f64;
            for j in 0..m {
                let phi = TAU * j as f64 / m as f64;
                pts.push(SpherePoint::normalized(vec![
                    theta.sin() * phi.cos(),
                    theta.sin() * phi.sin(),
                    theta.cos(),
                ])?);
            }
        }
        Ok(pts)
    } else if let Some(rest) = s.strip_prefix("greatcircle:") {
        let n: usize = rest.parse().map_err(|_| bad_points(s))?;
        if n == 0 {
            return Err(bad_points(s));
        }
        (0..n)
            .map(|k| {
                let h = TAU * k as f64 / n as f64;
                SpherePoint::normalized(vec![h.cos(), h.sin(), 0.0])
            })
            .collect()
    } else if let Some(rest) = s.strip_prefix("random:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 2 && parts.len() != 3 {
            return Err(bad_points(s));
        }
        let n: usize = parts[0].parse().map_err(|_| bad_points(s))?;
        let seed: u64 = parts[1].parse().map_err(|_| bad_points(s))?;
        let d: usize = match parts.get(2) {
            Some(t) => t.parse().map_err(|_| bad_points(s))?,
            None => 2,
        };
        if n == 0 || d == 0 {
            return Err(bad_points(s));
        }
        // Stream 1 keeps point generation disjoint from the field sampler,
        // which draws from stream 0 of the --seed value.
        let mut g = stream_rng(&RngSpec::new(seed, 1), 0, 0);
        (0..n)
            .map(|_| {
                let coords: Vec<f64> = (0..=d).map(|_| g.sample(StandardNormal)).collect();
                SpherePoint::normalized(coords)
            })
            .collect()
    } else {
        read_points_csv(s)
    }
}

fn read_points_csv(path: &str) -> Result<Vec<SpherePoint>> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::Config(format!(
            "point spec {path:?} is not a builtin form and not a readable file: {e}"
        ))
    })?;
    let mut pts = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parsed: Option<Vec<f64>> = line.split(',').map(|f| f.trim().parse().ok()).collect();
        match parsed {
            Some(coords) => pts.push(SpherePoint::normalized(coords)?),
            // A single non-numeric leading row is taken as a header.
            None if idx == 0 => continue,
            None => {
                return Err(Error::Config(format!(
                    "{path}:{}: not a numeric coordinate row",
                    idx + 1
                )))
            }
        }
    }
    if pts.is_empty() {
        return Err(Error::Config(format!("no points found in {path:?}")));
    }
    Ok(pts)
}

/// Expand `start:step:count` into a time grid.
fn parse_times(s: &str) -> Result<Vec<f64>> {
    let bad = || {
        Error::Config(format!(
            "times must be start:step:count with positive step, got {s:?}"
        ))
    };
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].parse().map_err(|_| bad())?;
    let step: f64 = parts[1].parse().map_err(|_| bad())?;
    let count: usize = parts[2].parse().map_err(|_| bad())?;
    if !start.is_finite() || !step.is_finite() || step <= 0.0 || count == 0 {
        return Err(bad());
    }
    Ok((0..count).map(|j| start + step * j as f64).collect())
}

fn parse_v_list(s: &str) -> Result<Vec<f64>> {
    let vs: Option<Vec<f64>> = s.split(',').map(|t| t.trim().parse().ok()).collect();
    vs.ok_or_else(|| {
        Error::Config(format!(
            "--v must be a comma-separated list of angles, got {s:?}"
        ))
    })
}

fn parse_greatcircle(s: &str) -> Result<usize> {
    s.strip_prefix("greatcircle:")
        .and_then(|r| r.parse::<usize>().ok())
        .filter(|&n| n >= 4)
        .ok_or_else(|| {
            Error::Config(format!(
                "holder needs --points greatcircle:N with N >= 4, got {s:?}"
            ))
        })
}
