use std::fmt;
use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use nejl_core::datagen::{gen_balls, gen_simplex, graph_hops, BallSpec, SimplexSpec};
use nejl_core::io::{read_edge_list, read_matrix, write_matrix};
use nejl_core::kmeans::KMeansConfig;
use nejl_core::pipeline::compare_kmeans;
use nejl_core::report::{evaluate, ProjectionReport, RunManifest};
use nejl_core::{Error, Method, Prepared, ProjectionConfig, RadiusRule};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::args::{GenArgs, GenKind, IngestArgs, KmeansArgs, ProjectArgs, ProjectionArgs, RuleArg, ValidateArgs};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(String),
    Numerical(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else if matches!(e, Error::InvalidArgument(_)) {
            Failure::Usage(e.to_string())
        } else {
            Failure::Data(e.to_string())
        }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::Data(format!("{}: {e}", path.display()))
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| io_failure(path, e))
}

/// Opens `path`, or stdout when `None`.
fn sink(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn load(path: &Path) -> Result<nejl_core::DissimilarityMatrix> {
    let file = File::open(path).map_err(|e| io_failure(path, e))?;
    read_matrix(BufReader::new(file)).map_err(|e| match Failure::from(e) {
        Failure::Data(m) => Failure::Data(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn write_json<T: Serialize>(path: Option<&PathBuf>, value: &T) -> Result<()> {
    let mut out = sink(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out).map_err(|e| Failure::Data(e.to_string()))
}

fn manifest<A: Serialize>(command: &str, inputs: &[&Path], args: &A) -> Result<RunManifest> {
    Ok(RunManifest::new(
        command,
        inputs.iter().map(|p| p.display().to_string()).collect(),
        serde_json::to_value(args)?,
    ))
}

impl ProjectionArgs {
    fn config(&self) -> Result<ProjectionConfig> {
        Ok(ProjectionConfig::new(self.epsilon, self.dim_constant, self.seed)?)
    }

    fn rule(&self) -> RadiusRule {
        match (self.radius_override, self.radius_rule) {
            (Some(r), _) => RadiusRule::Fixed(r),
            (None, RuleArg::Minimal) => RadiusRule::Minimal,
            (None, RuleArg::QuarterRoot) => RadiusRule::QuarterRoot,
        }
    }

    fn check_tau(&self) -> Result<()> {
        if self.tau > 0.0 && self.tau < 1.0 {
            Ok(())
        } else {
            Err(Failure::Usage(format!("tau must lie in (0, 1), got {}", self.tau)))
        }
    }
}

pub fn gen(a: &GenArgs) -> Result<()> {
    let d = match a.kind {
        GenKind::Simplex => gen_simplex(&SimplexSpec {
            n: a.n,
            dominance: a.alpha,
            seed: a.seed,
        })?,
        GenKind::Ball => gen_balls(&BallSpec {
            n: a.n,
            dim: a.dim,
            radius_range: (a.rmin, a.rmax),
            seed: a.seed,
        })?,
    };
    write_matrix(sink(a.out.as_ref())?, d.as_matrix())?;
    Ok(())
}

pub fn ingest_graph(a: &IngestArgs) -> Result<()> {
    let file = File::open(&a.edges).map_err(|e| io_failure(&a.edges, e))?;
    let edges = read_edge_list(BufReader::new(file)).map_err(|e| Failure::Data(format!("{}: {e}", a.edges.display())))?;
    let hops = graph_hops(&edges)?;
    log::info!("{} vertices kept, {} dropped", hops.vertices.len(), hops.dropped);
    write_matrix(sink(a.out.as_ref())?, hops.matrix.as_matrix())?;
    Ok(())
}

pub fn project(a: &ProjectArgs) -> Result<()> {
    let started = Instant::now();
    let cfg = a.projection.config()?;
    a.projection.check_tau()?;
    let prep = Prepared::new(load(&a.input)?, a.projection.tau)?;
    let run = prep.run(a.projection.method, &cfg, a.projection.rule())?;
    let eval = evaluate(&prep, &run, &run.d_hat, cfg.epsilon)?;
    if let Some(path) = &a.out_matrix {
        write_matrix(create(path)?, &run.d_hat)?;
    }
    let manifest = manifest("project", &[&a.input], a)?.finish(started);
    let report = ProjectionReport::new(manifest, &prep, &run, &cfg, &eval);
    write_json(a.out_report.as_ref(), &report)
}

#[derive(Serialize)]
struct ValidationSummary<'a> {
    manifest: RunManifest,
    method: Method,
    n: usize,
    m: usize,
    identity_debug: bool,
    stats: nejl_core::eval::RelativeErrorStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pq: Option<&'a nejl_core::eval::PqBoundValidation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    power: Option<&'a nejl_core::eval::PowerResidualValidation>,
    rows_written: usize,
}

/// Indices to keep, in ascending order.
fn sample_rows(len: usize, sample: Option<usize>, seed: u64) -> Vec<usize> {
    match sample {
        Some(k) if k < len => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut idx = index::sample(&mut rng, len, k).into_vec();
            idx.sort_unstable();
            idx
        }
        _ => (0..len).collect(),
    }
}

fn write_records<T: Serialize>(path: Option<&PathBuf>, records: &[T], keep: &[usize]) -> Result<()> {
    let Some(path) = path else {
        return Ok(());
    };
    let mut w = csv::Writer::from_writer(create(path)?);
    for &i in keep {
        w.serialize(&records[i])?;
    }
    w.flush().map_err(|e| io_failure(path, e))
}

pub fn validate(a: &ValidateArgs) -> Result<()> {
    let started = Instant::now();
    let method = a.projection.method;
    if method == Method::Jl {
        return Err(Failure::Usage(
            "validate checks jl-pq or jl-power; jl has no per-pair bound on non-Euclidean input".into(),
        ));
    }
    let cfg = a.projection.config()?;
    a.projection.check_tau()?;
    let prep = Prepared::new(load(&a.input)?, a.projection.tau)?;
    let run = prep.run(method, &cfg, a.projection.rule())?;
    let d_hat = if a.identity_debug {
        prep.matrix().as_matrix().clone()
    } else {
        run.d_hat.clone()
    };
    let eval = evaluate(&prep, &run, &d_hat, cfg.epsilon)?;
    let rows_written = match (&eval.pq, &eval.power) {
        (Some(v), _) => {
            let keep = sample_rows(v.records.len(), a.sample, cfg.seed);
            write_records(a.out_csv.as_ref(), &v.records, &keep)?;
            keep.len()
        }
        (_, Some(v)) => {
            let keep = sample_rows(v.records.len(), a.sample, cfg.seed);
            write_records(a.out_csv.as_ref(), &v.records, &keep)?;
            keep.len()
        }
        _ => unreachable!("jl rejected above"),
    };
    let summary = ValidationSummary {
        manifest: manifest("validate", &[&a.input], a)?.finish(started),
        method,
        n: prep.matrix().n(),
        m: run.m,
        identity_debug: a.identity_debug,
        stats: eval.stats,
        pq: eval.pq.as_ref(),
        power: eval.power.as_ref(),
        rows_written: if a.out_csv.is_some() { rows_written } else { 0 },
    };
    write_json(a.out_json.as_ref(), &summary)
}

#[derive(Serialize)]
struct KmeansOutput {
    manifest: RunManifest,
    /// Cost definition used for both columns.
    cost: &'static str,
    #[serde(flatten)]
    comparison: nejl_core::pipeline::KMeansComparison,
}

pub fn kmeans(a: &KmeansArgs) -> Result<()> {
    let started = Instant::now();
    let cfg = a.projection.config()?;
    a.projection.check_tau()?;
    let prep = Prepared::new(load(&a.input)?, a.projection.tau)?;
    let km = KMeansConfig {
        k: a.k,
        seed: a.projection.seed,
        max_iter: a.max_iter,
        restarts: a.restarts,
    };
    let comparison = compare_kmeans(&prep, a.projection.method, &cfg, a.projection.rule(), &km)?;
    let out = KmeansOutput {
        manifest: manifest("kmeans", &[&a.input], a)?.finish(started),
        cost: "relational: sum over clusters of (1/2|C|) sum_{i,j in C} D_ij",
        comparison,
    };
    write_json(a.out.as_ref(), &out)
}
