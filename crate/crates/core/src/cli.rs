//! Command-line front end: `build`, `serve`, `query`, `metrics`, `tag` and
//! `export-tags`. The binary only parses arguments and calls [`run`].

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::engine::{build_artifact, Engine};
use crate::ingest::{load_artifact, load_dataset, write_artifact, SetArtifact};
use crate::matcher::{check_set_iou, EvalParams};
use crate::metrics::metrics_report;
use crate::query::{sidecar_path, QuerySpec, StatusFilter, TagStore};
use crate::service::{self, QueryRequest, ServiceConfig};

#[derive(Debug, Parser)]
#[command(name = "agreeset", version, about = "Compare models through the predictions they share")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Match predictions across models and write an artifact.
    Build(BuildArgs),
    /// Serve an artifact over HTTP.
    Serve(ServeArgs),
    /// Run a tri-state query and print the matching clusters.
    Query(QueryArgs),
    /// Print per-model scores and pairwise similarity.
    Metrics(MetricsArgs),
    /// Tag images in the artifact's tag sidecar.
    Tag(TagArgs),
    /// Write the tag document.
    ExportTags(ExportTagsArgs),
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Folder with one prediction file per model plus ground truth.
    #[arg(long)]
    pub folder: PathBuf,
    /// Object class to keep.
    #[arg(long = "class")]
    pub object_class: String,
    /// IOU at which two models' boxes count as the same prediction.
    #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
    pub set_iou: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct Criteria {
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub eval_iou: f64,
    #[arg(long, default_value_t = 0.7, allow_negative_numbers = true)]
    pub conf_min: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub conf_max: f64,
}

impl Criteria {
    fn params(&self) -> Result<EvalParams, CliError> {
        EvalParams::new(self.eval_iou, self.conf_min, self.conf_max).map_err(CliError::usage)
    }
}

#[derive(Debug, Args)]
pub struct ArtifactArg {
    #[arg(long, env = "AGREESET_ARTIFACT")]
    pub artifact: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub artifact: ArtifactArg,
    #[arg(long, env = service::LISTEN_ENV, default_value = service::DEFAULT_LISTEN)]
    pub listen: String,
    /// Defaults to the folder the artifact was built from.
    #[arg(long, env = service::IMAGE_ROOT_ENV)]
    pub image_root: Option<PathBuf>,
    #[command(flatten)]
    pub criteria: Criteria,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[command(flatten)]
    pub artifact: ArtifactArg,
    /// Models that must be present (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub include: Vec<String>,
    /// Models that must be absent.
    #[arg(long, value_delimiter = ',')]
    pub exclude: Vec<String>,
    /// Models left unconstrained; unlisted models are neutral too.
    #[arg(long, value_delimiter = ',')]
    pub neutral: Vec<String>,
    #[arg(long, default_value = "all")]
    pub status: String,
    #[command(flatten)]
    pub criteria: Criteria,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[command(flatten)]
    pub artifact: ArtifactArg,
    #[command(flatten)]
    pub criteria: Criteria,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TagArgs {
    #[command(flatten)]
    pub artifact: ArtifactArg,
    #[arg(long)]
    pub tag: String,
    #[arg(long, value_delimiter = ',', required = true)]
    pub images: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ExportTagsArgs {
    #[command(flatten)]
    pub artifact: ArtifactArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure with the process exit code it maps to: 2 for rejected input,
/// 1 for everything else.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn usage(e: impl fmt::Display) -> Self {
        CliError {
            code: 2,
            message: e.to_string(),
        }
    }

    fn runtime(e: impl fmt::Display) -> Self {
        CliError {
            code: 1,
            message: e.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Build(args) => cmd_build(&args).map(|summary| print!("{summary}")),
        Command::Serve(args) => cmd_serve(args),
        Command::Query(args) => cmd_query(&args),
        Command::Metrics(args) => cmd_metrics(&args),
        Command::Tag(args) => cmd_tag(&args),
        Command::ExportTags(args) => cmd_export_tags(&args),
    }
}

fn open(path: &Path) -> Result<SetArtifact, CliError> {
    load_artifact(path).map_err(CliError::usage)
}

fn emit(bytes: &[u8], out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, bytes).map_err(|e| CliError::runtime(format!("{}: {e}", path.display()))),
        None => std::io::stdout().write_all(bytes).map_err(CliError::runtime),
    }
}

fn pretty<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("serializable");
    bytes.push(b'\n');
    bytes
}

/// Build and write an artifact; returns the printed summary.
pub fn cmd_build(args: &BuildArgs) -> Result<String, CliError> {
    check_set_iou(args.set_iou).map_err(CliError::usage)?;
    let raw = load_dataset(&args.folder, &args.object_class).map_err(CliError::usage)?;
    let source = args.folder.display().to_string();
    let artifact = build_artifact(raw, args.set_iou, &source).map_err(CliError::usage)?;
    write_artifact(&artifact, &args.out).map_err(CliError::runtime)?;
    Ok(summary(&artifact, &args.out))
}

pub fn summary(a: &SetArtifact, out: &Path) -> String {
    let d = &a.dataset;
    format!(
        "models: {} ({})\nclass: {}\nimages: {}\ndetections: {} ({} of other classes dropped)\nground truth: {}\nset iou: {}\nedges: {}\nwrote {}\n",
        d.models.len(),
        d.models.join(", "),
        d.object_class,
        d.images.len(),
        d.detections.len(),
        d.dropped.detections,
        d.ground_truth.len(),
        a.set_iou,
        a.edges.len(),
        out.display()
    )
}

fn cmd_serve(args: ServeArgs) -> Result<(), CliError> {
    let defaults = args.criteria.params()?;
    let image_root = match args.image_root {
        Some(root) => root,
        None => PathBuf::from(open(&args.artifact.artifact)?.build.source_folder),
    };
    let config = ServiceConfig {
        artifact_path: args.artifact.artifact,
        listen_address: args.listen,
        static_image_root: image_root,
        defaults,
    };
    let runtime = tokio::runtime::Runtime::new().map_err(CliError::runtime)?;
    runtime
        .block_on(service::serve(config))
        .map_err(CliError::runtime)
}

fn warn(engine: &Engine, p: &EvalParams) {
    if let Some(w) = engine.set_iou_warning(p) {
        eprintln!("{w}");
    }
}

pub fn cmd_query(args: &QueryArgs) -> Result<(), CliError> {
    let engine = Engine::new(open(&args.artifact.artifact)?);
    let p = args.criteria.params()?;
    warn(&engine, &p);
    let status: StatusFilter = args.status.parse().map_err(CliError::usage)?;
    let req = QueryRequest {
        include: args.include.clone(),
        exclude: args.exclude.clone(),
        neutral: args.neutral.clone(),
        status: None,
        eval_iou: Some(p.eval_iou),
        conf_min: Some(p.conf_min),
        conf_max: Some(p.conf_max),
    };
    let mut spec: QuerySpec = req
        .to_spec(engine.models(), p)
        .map_err(|e| CliError::usage(e.message))?;
    spec.status_filter = status;
    let response = service::run_query(&engine, &spec);
    emit(&pretty(&response), args.out.as_deref())
}

pub fn cmd_metrics(args: &MetricsArgs) -> Result<(), CliError> {
    let engine = Engine::new(open(&args.artifact.artifact)?);
    let p = args.criteria.params()?;
    warn(&engine, &p);
    let report = metrics_report(&engine, &p);
    let bytes = match args.format {
        Format::Json => pretty(&report),
        Format::Table => report.to_table().into_bytes(),
    };
    emit(&bytes, args.out.as_deref())
}

fn cmd_tag(args: &TagArgs) -> Result<(), CliError> {
    let artifact = open(&args.artifact.artifact)?;
    let path = sidecar_path(&args.artifact.artifact);
    let mut store = TagStore::load_or_default(&path).map_err(CliError::usage)?;
    store
        .assign(&args.tag, &args.images, &artifact.dataset.images)
        .map_err(CliError::usage)?;
    store
        .export(&path, &artifact.dataset.images)
        .map_err(CliError::runtime)
}

pub fn cmd_export_tags(args: &ExportTagsArgs) -> Result<(), CliError> {
    let artifact = open(&args.artifact.artifact)?;
    let store = TagStore::load_or_default(sidecar_path(&args.artifact.artifact)).map_err(CliError::usage)?;
    emit(
        &pretty(&store.export_document(&artifact.dataset.images)),
        args.out.as_deref(),
    )
}
