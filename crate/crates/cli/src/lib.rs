//! Command implementations behind the `fscad` binary.

pub mod manifest;
pub mod stats;

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use fscad_core::annotate::{run_batch, CompletionClient, MockClient, PipelineConfig, ReplayClient};
use fscad_core::geom::{bbox_prompt, bounding_box, mesh_volume, read_obj, write_obj, write_stl, InterpretConfig, Mesh};
use fscad_core::metrics::{evaluate_sets, sample_surface, write_xyz, EvalProtocol, ShapeEntry};
use fscad_core::normalize::{validate_equivalence, PassConfig, PassReport, ValidationResult, ValidationStatus};
use fscad_core::{emit, geom, normalize, parse, Dialect, Program};
use rayon::prelude::*;
use serde::Serialize;

use manifest::{files_with, fs_files, stem, Manifest};

/// A validation or construction failure; the binary exits with status 2.
#[derive(Debug)]
pub struct Failure(pub String);

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Failure {}

pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<Failure>().is_some() {
        2
    } else {
        1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DialectArg {
    Raw,
    Canonical,
}

impl From<DialectArg> for Dialect {
    fn from(d: DialectArg) -> Self {
        match d {
            DialectArg::Raw => Dialect::Raw,
            DialectArg::Canonical => Dialect::Canonical,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fscad", version, about = "Normalize, validate, interpret and evaluate CAD design histories")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a program and print it in canonical form (or as JSON).
    Parse {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "raw")]
        dialect: DialectArg,
        #[arg(long)]
        json: bool,
    },
    /// Normalize every `.fs` file of a directory; discarded programs go to `<out>/rejected`.
    Normalize {
        in_dir: PathBuf,
        out_dir: PathBuf,
        #[arg(long, env = "FSCAD_CONFIG")]
        config: Option<PathBuf>,
        /// Also write one pass report per program under `<out>/reports`.
        #[arg(long)]
        report: bool,
        #[arg(long, default_value_t = fscad_core::normalize::DEFAULT_TOLERANCE)]
        tol: f64,
    },
    /// Check that a canonical program reproduces a raw one.
    Validate {
        raw: PathBuf,
        canonical: PathBuf,
        #[arg(long, default_value_t = fscad_core::normalize::DEFAULT_TOLERANCE)]
        tol: f64,
    },
    /// Build the mesh of a sketch/extrude program.
    Interpret {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "canonical")]
        dialect: DialectArg,
        #[arg(long)]
        stl: Option<PathBuf>,
        #[arg(long)]
        obj: Option<PathBuf>,
    },
    /// Sample a surface point cloud (XYZ + normal) from an OBJ mesh or a program.
    Sample {
        mesh: PathBuf,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Compare generated shapes with references paired by file stem.
    Eval {
        ref_dir: PathBuf,
        gen_dir: PathBuf,
        #[arg(long)]
        protocol: Option<PathBuf>,
        /// Overrides the protocol seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Operation and primitive statistics of a manifest or a directory.
    Stats {
        input: PathBuf,
        /// JSON object of target operation fractions.
        #[arg(long)]
        match_distribution: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
    /// Run the annotator/reviewer pipeline over a directory or manifest, writing JSONL.
    Annotate {
        input: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// `mock`, `replay:<file.jsonl>` or `http` (needs the `http` feature).
        #[arg(long, default_value = "mock")]
        client: String,
        #[arg(long, default_value_t = 4)]
        parallel: usize,
        #[arg(long, default_value_t = 2)]
        retries: usize,
    },
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Parse { path, dialect, json } => cmd_parse(&path, dialect.into(), json, out),
        Command::Normalize { in_dir, out_dir, config, report, tol } => {
            let cfg = load_config(config.as_deref())?;
            let summary = cmd_normalize(&in_dir, &out_dir, &cfg, report, tol)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&summary)?)?;
            Ok(())
        }
        Command::Validate { raw, canonical, tol } => cmd_validate(&raw, &canonical, tol, out),
        Command::Interpret { path, dialect, stl, obj } => {
            cmd_interpret(&path, dialect.into(), stl.as_deref(), obj.as_deref(), out)
        }
        Command::Sample { mesh, n, seed, out: path } => cmd_sample(&mesh, n, seed, &path),
        Command::Eval { ref_dir, gen_dir, protocol, seed, out: path, csv } => {
            let mut p = match protocol {
                Some(p) => serde_json::from_str(&read(&p)?).with_context(|| format!("parsing {}", p.display()))?,
                None => EvalProtocol::default(),
            };
            if let Some(s) = seed {
                p.rng_seed = s;
            }
            let report = cmd_eval(&ref_dir, &gen_dir, &p)?;
            if let Some(path) = path {
                std::fs::write(&path, report.to_json())?;
            }
            if let Some(path) = csv {
                std::fs::write(&path, report.to_csv())?;
            }
            write!(out, "{}", report.table())?;
            Ok(())
        }
        Command::Stats { input, match_distribution, count } => cmd_stats(&input, match_distribution.as_deref(), count, out),
        Command::Annotate { input, out: path, client, parallel, retries } => {
            cmd_annotate(&input, &path, &client, parallel, retries)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn load_program(path: &Path, dialect: Dialect) -> Result<Program> {
    let text = read(path)?;
    parse(&text, dialect).map_err(|e| anyhow!("{}:{e}", path.display()))
}

pub fn load_config(path: Option<&Path>) -> Result<PassConfig> {
    let cfg: PassConfig = match path {
        Some(p) => serde_json::from_str(&read(p)?).with_context(|| format!("parsing {}", p.display()))?,
        None => PassConfig::default(),
    };
    cfg.check()?;
    Ok(cfg)
}

pub fn cmd_parse(path: &Path, dialect: Dialect, json: bool, out: &mut dyn Write) -> Result<()> {
    let p = load_program(path, dialect)?;
    if json {
        writeln!(out, "{}", serde_json::to_string_pretty(&p)?)?;
    } else {
        write!(out, "{}", emit(&p))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizeOutcome {
    pub id: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizeSummary {
    pub normalized: usize,
    pub rejected: usize,
    pub entries: Vec<NormalizeOutcome>,
}

fn normalize_one(path: &Path, cfg: &PassConfig, tol: f64) -> (Result<(Program, PassReport, ValidationResult)>, String) {
    let id = stem(path);
    let result = (|| {
        let raw = load_program(path, Dialect::Raw)?;
        let (canonical, report) = normalize(&raw, cfg)?;
        let v = validate_equivalence(&raw, &canonical, tol);
        Ok((canonical, report, v))
    })();
    (result, id)
}

/// Normalizes a directory. Programs that fail to parse, normalize or
/// validate are copied to `<out_dir>/rejected`.
pub fn cmd_normalize(in_dir: &Path, out_dir: &Path, cfg: &PassConfig, report: bool, tol: f64) -> Result<NormalizeSummary> {
    let files = fs_files(in_dir)?;
    std::fs::create_dir_all(out_dir)?;
    let results: Vec<_> = files.par_iter().map(|p| normalize_one(p, cfg, tol)).collect();
    let rejected_dir = out_dir.join("rejected");
    let mut entries = Vec::new();
    for (path, (result, id)) in files.iter().zip(results) {
        let outcome = match result {
            Ok((canonical, rep, v)) if v.status != ValidationStatus::Failed => {
                std::fs::write(out_dir.join(format!("{id}.fs")), emit(&canonical))?;
                if report {
                    let dir = out_dir.join("reports");
                    std::fs::create_dir_all(&dir)?;
                    std::fs::write(dir.join(format!("{id}.json")), serde_json::to_string_pretty(&rep)?)?;
                }
                NormalizeOutcome { id, status: v.status.to_string(), validation: Some(v), error: None }
            }
            other => {
                std::fs::create_dir_all(&rejected_dir)?;
                std::fs::copy(path, rejected_dir.join(path.file_name().expect("file")))?;
                let (validation, error) = match other {
                    Ok((_, _, v)) => (Some(v), None),
                    Err(e) => (None, Some(format!("{e:#}"))),
                };
                NormalizeOutcome { id, status: "rejected".into(), validation, error }
            }
        };
        entries.push(outcome);
    }
    let rejected = entries.iter().filter(|e| e.status == "rejected").count();
    Ok(NormalizeSummary { normalized: entries.len() - rejected, rejected, entries })
}

pub fn cmd_validate(raw: &Path, canonical: &Path, tol: f64, out: &mut dyn Write) -> Result<()> {
    let r = load_program(raw, Dialect::Raw)?;
    let c = load_program(canonical, Dialect::Canonical)?;
    let v = validate_equivalence(&r, &c, tol);
    writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
    if v.status == ValidationStatus::Failed {
        return Err(Failure(v.reason.unwrap_or_else(|| "validation failed".into())).into());
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterpretSummary {
    pub bodies: usize,
    pub triangles: usize,
    pub volume: f64,
    pub bbox_min: [f64; 3],
    pub bbox_max: [f64; 3],
    pub prompt: String,
}

/// Interprets a program into one mesh; construction errors are [`Failure`]s.
pub fn build_mesh(path: &Path, dialect: Dialect) -> Result<(Mesh, usize)> {
    let p = load_program(path, dialect)?;
    let bodies = geom::interpret(&p, &InterpretConfig::default()).map_err(|e| Failure(e.to_string()))?;
    Ok((Mesh::merge(bodies.iter().map(|b| &b.mesh)), bodies.len()))
}

pub fn cmd_interpret(
    path: &Path,
    dialect: Dialect,
    stl: Option<&Path>,
    obj: Option<&Path>,
    out: &mut dyn Write,
) -> Result<()> {
    let (mesh, bodies) = build_mesh(path, dialect)?;
    if let Some(p) = stl {
        let mut f = std::io::BufWriter::new(std::fs::File::create(p)?);
        write_stl(&mesh, &stem(path), &mut f)?;
    }
    if let Some(p) = obj {
        let mut f = std::io::BufWriter::new(std::fs::File::create(p)?);
        write_obj(&mesh, &mut f)?;
    }
    let b = bounding_box([&mesh]).expect("non-empty mesh");
    let summary = InterpretSummary {
        bodies,
        triangles: mesh.triangles.len(),
        volume: mesh_volume(&mesh)?,
        bbox_min: b.min,
        bbox_max: b.max,
        prompt: bbox_prompt(&b),
    };
    writeln!(out, "{}", serde_json::to_string_pretty(&summary)?)?;
    Ok(())
}

/// Loads a mesh from `.obj`, or interprets a canonical `.fs` program.
pub fn load_mesh(path: &Path) -> Result<Mesh> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("obj") => {
            let f = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
            read_obj(BufReader::new(f)).map_err(|e| anyhow!("{}: {e}", path.display()))
        }
        Some("fs") => Ok(build_mesh(path, Dialect::Canonical)?.0),
        _ => bail!("{}: expected a .obj or .fs file", path.display()),
    }
}

pub fn cmd_sample(mesh: &Path, n: usize, seed: u64, out: &Path) -> Result<()> {
    let m = load_mesh(mesh)?;
    let cloud = sample_surface(&m, n, seed)?;
    let mut f = std::io::BufWriter::new(std::fs::File::create(out)?);
    write_xyz(&cloud, &mut f)?;
    f.flush()?;
    Ok(())
}

const SHAPE_EXTS: [&str; 2] = ["fs", "obj"];

fn shape_files(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let mut m = BTreeMap::new();
    for p in files_with(dir, &SHAPE_EXTS)? {
        if let Some(prev) = m.insert(stem(&p), p.clone()) {
            bail!("{} and {} share a stem", prev.display(), p.display());
        }
    }
    Ok(m)
}

/// Pairs files by stem. Generated shapes that fail to load or construct, or
/// have no reference, count as invalid; unmatched references are an error.
pub fn cmd_eval(ref_dir: &Path, gen_dir: &Path, protocol: &EvalProtocol) -> Result<fscad_core::MetricsReport> {
    let refs = shape_files(ref_dir)?;
    let gens = shape_files(gen_dir)?;
    let missing: Vec<&str> = refs.keys().filter(|k| !gens.contains_key(*k)).map(String::as_str).collect();
    if !missing.is_empty() {
        bail!("reference shapes without a generated counterpart: {}", missing.join(", "));
    }
    let reference: Vec<ShapeEntry> = refs
        .par_iter()
        .map(|(label, p)| Ok(ShapeEntry { label: label.clone(), mesh: Some(load_mesh(p)?) }))
        .collect::<Result<_>>()?;
    let generated: Vec<ShapeEntry> = gens
        .par_iter()
        .map(|(label, p)| ShapeEntry {
            label: label.clone(),
            mesh: if refs.contains_key(label) { load_mesh(p).ok() } else { None },
        })
        .collect();
    Ok(evaluate_sets(&reference, &generated, protocol)?)
}

fn manifest_or_dir(input: &Path) -> Result<Manifest> {
    if input.is_dir() {
        Manifest::from_dir(input)
    } else {
        Manifest::load(input)
    }
}

/// Programs of a manifest: canonical files when present, raw otherwise.
fn manifest_programs(m: &Manifest) -> Result<Vec<(String, Program)>> {
    m.entries
        .iter()
        .filter(|e| !e.flags.iter().any(|f| f == manifest::FLAG_MISSING))
        .map(|e| {
            let p = match &e.canonical_path {
                Some(c) => load_program(c, Dialect::Canonical)?,
                None => load_program(&e.raw_path, Dialect::Raw)?,
            };
            Ok((e.id.clone(), p))
        })
        .collect()
}

pub fn cmd_stats(input: &Path, target: Option<&Path>, count: usize, out: &mut dyn Write) -> Result<()> {
    let programs = manifest_programs(&manifest_or_dir(input)?)?;
    match target {
        None => {
            let ps: Vec<Program> = programs.into_iter().map(|(_, p)| p).collect();
            writeln!(out, "{}", serde_json::to_string_pretty(&stats::stats(&ps))?)?;
        }
        Some(t) => {
            let target: BTreeMap<String, f64> =
                serde_json::from_str(&read(t)?).with_context(|| format!("parsing {}", t.display()))?;
            let entries: Vec<_> = programs.iter().map(|(id, p)| (id.clone(), stats::op_counts(p))).collect();
            let m = stats::match_distribution(&entries, &target, count)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&m)?)?;
        }
    }
    Ok(())
}

fn make_client(spec: &str) -> Result<Box<dyn CompletionClient>> {
    if spec == "mock" {
        return Ok(Box::new(MockClient));
    }
    if let Some(path) = spec.strip_prefix("replay:") {
        let f = std::fs::File::open(path).with_context(|| format!("opening {path}"))?;
        return Ok(Box::new(ReplayClient::from_jsonl(BufReader::new(f), "replay")?));
    }
    if spec == "http" {
        #[cfg(feature = "http")]
        return Ok(Box::new(fscad_core::annotate::HttpClient::from_env()?));
        #[cfg(not(feature = "http"))]
        bail!("this build has no HTTP client; rebuild with `--features http`");
    }
    bail!("unknown client `{spec}`")
}

pub fn cmd_annotate(input: &Path, out: &Path, client: &str, parallel: usize, retries: usize) -> Result<()> {
    let programs = manifest_programs(&manifest_or_dir(input)?)?;
    let client = make_client(client)?;
    let cfg = PipelineConfig { retries, ..PipelineConfig::default() };
    let records = run_batch(&programs, client.as_ref(), &cfg, parallel)?;
    let mut f = std::io::BufWriter::new(std::fs::File::create(out)?);
    for r in &records {
        writeln!(f, "{}", serde_json::to_string(r)?)?;
    }
    f.flush()?;
    let failed = records.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        return Err(Failure(format!("{failed} of {} programs failed annotation", records.len())).into());
    }
    Ok(())
}
