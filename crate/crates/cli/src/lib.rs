//! `vlc` command-line interface: identify, manipulate, compare, config init.
//!
//! Exit codes: 0 success, 2 input (parse, validation, I/O, usage) errors,
//! 3 infeasible manipulation requests.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use vlc_core::document::{config_hash, source_date_timestamp, Provenance, ReportDocument, SceneDocument};
use vlc_core::manipulation::{manipulate, ConstraintSet, ManipulationRequest, ManipulationResult};
use vlc_core::scale::{identify, Attribute, ScaleConfig};
use vlc_core::svg::profile_svg;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Infeasible(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Infeasible(_) => EXIT_INFEASIBLE,
        }
    }
}

fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn from_core(e: vlc_core::Error) -> CliError {
    match e {
        vlc_core::Error::InfeasibleRequest(_) => CliError::Infeasible(e.to_string()),
        _ => CliError::Input(e.to_string()),
    }
}

#[derive(Parser, Debug)]
#[command(name = "vlc", version, about = "Visuo-locomotive complexity of navigation paths")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify a path and write a report.
    Identify(IdentifyArgs),
    /// Search for a morphology whose complexity matches a target.
    Manipulate(ManipulateArgs),
    /// Compare the same path across two scene versions.
    Compare(CompareArgs),
    /// Configuration helpers.
    Config {
        #[command(subcommand)]
        command: ConfigCommand,
    },
}

#[derive(Subcommand, Debug)]
enum ConfigCommand {
    /// Write the default configuration.
    Init {
        #[arg(long, default_value = "vlc-config.json")]
        out: PathBuf,
        /// Overwrite an existing file.
        #[arg(long)]
        force: bool,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Scale configuration; defaults apply when neither this nor VLC_CONFIG is set.
    #[arg(long, env = "VLC_CONFIG")]
    config: Option<PathBuf>,
    /// Name of the path inside the scene document.
    #[arg(long, default_value = "main")]
    path: String,
}

#[derive(Args, Debug)]
struct IdentifyArgs {
    scene: PathBuf,
    #[command(flatten)]
    common: Common,
    /// Report destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an SVG attribute profile.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ManipulateArgs {
    scene: PathBuf,
    #[command(flatten)]
    common: Common,
    /// Target class (overall, or for the selected segment with --segment).
    #[arg(long)]
    target: f64,
    /// Comma-separated attributes to act on.
    #[arg(long, value_delimiter = ',')]
    attributes: Option<Vec<Attribute>>,
    /// Restrict changes to this segment; --target then applies to it.
    #[arg(long)]
    segment: Option<usize>,
    /// Overall aggregate to hold in segment mode; defaults to the current
    /// overall class.
    #[arg(long)]
    overall_target: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5000)]
    budget: usize,
    /// JSON constraint set.
    #[arg(long)]
    constraints: Option<PathBuf>,
    /// Output directory for scene.json, result.json, before.svg, after.svg.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CompareArgs {
    a: PathBuf,
    b: PathBuf,
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Writes through a temporary file in the destination directory, then
/// renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| input(format!("{}: {e}", path.display())))?;
    tmp.write_all(bytes).map_err(input)?;
    tmp.persist(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    Ok(())
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn load_scene(path: &Path) -> Result<SceneDocument, CliError> {
    SceneDocument::from_slice(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))
}

pub fn load_config(path: Option<&Path>) -> Result<ScaleConfig, CliError> {
    let Some(path) = path else { return Ok(ScaleConfig::default()) };
    let cfg: ScaleConfig =
        serde_json::from_slice(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))?;
    cfg.validate().map_err(input)?;
    Ok(cfg)
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("output serializes");
    out.push(b'\n');
    out
}

fn identify_cmd(args: IdentifyArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let config = load_config(args.common.config.as_deref())?;
    let doc = load_scene(&args.scene)?;
    let nav = doc.nav_path(&args.common.path, config.turn_threshold).map_err(input)?;
    let report = identify(&doc.scene, &nav, &config).map_err(from_core)?;
    if let Some(svg) = &args.svg {
        write_atomic(svg, profile_svg(&report, &format!("path {}", args.common.path)).as_bytes())?;
    }
    let out = ReportDocument::new(&doc, &args.common.path, &config, report, source_date_timestamp()).to_bytes();
    match &args.out {
        Some(p) => write_atomic(p, &out),
        None => stdout.write_all(&out).map_err(input),
    }
}

/// Everything `vlc manipulate` records besides the scene itself.
#[derive(Serialize)]
struct ResultDocument<'a> {
    format_version: &'static str,
    path: &'a str,
    request: &'a ManipulationRequest,
    result: &'a ManipulationResult,
    /// Hashes the input scene and the configuration.
    provenance: Provenance,
}

fn manipulate_cmd(args: ManipulateArgs, stderr: &mut dyn Write) -> Result<(), CliError> {
    let config = load_config(args.common.config.as_deref())?;
    let doc = load_scene(&args.scene)?;
    let name = &args.common.path;
    let nav = doc.nav_path(name, config.turn_threshold).map_err(input)?;
    let constraints: ConstraintSet = match &args.constraints {
        Some(p) => serde_json::from_slice(&read(p)?).map_err(|e| input(format!("{}: {e}", p.display())))?,
        None => ConstraintSet::default(),
    };
    let attributes = args.attributes.unwrap_or_else(|| Attribute::ALL.to_vec());
    let request = match args.segment {
        Some(segment) => {
            let overall = match args.overall_target {
                Some(t) => t,
                None => f64::from(identify(&doc.scene, &nav, &config).map_err(from_core)?.overall_class.value()),
            };
            ManipulationRequest {
                target_class: overall,
                attributes,
                segments: Some(vec![segment]),
                segment_target: Some(args.target),
                constraints,
                seed: args.seed,
                budget: args.budget,
            }
        }
        None => {
            if args.overall_target.is_some() {
                return Err(CliError::Input("--overall-target needs --segment".into()));
            }
            ManipulationRequest {
                target_class: args.target,
                attributes,
                segments: None,
                segment_target: None,
                constraints,
                seed: args.seed,
                budget: args.budget,
            }
        }
    };
    let result = manipulate(&doc.scene, &nav, &request, &config).map_err(from_core)?;
    let out_doc = doc.with_morphology(name, result.scene.clone(), result.path.clone()).map_err(input)?;

    std::fs::create_dir_all(&args.out).map_err(|e| input(format!("{}: {e}", args.out.display())))?;
    let record = ResultDocument {
        format_version: vlc_core::document::FORMAT_VERSION,
        path: name,
        request: &request,
        result: &result,
        provenance: Provenance {
            scene_hash: doc.hash(),
            config_hash: config_hash(&config),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            timestamp: source_date_timestamp(),
        },
    };
    write_atomic(&args.out.join("scene.json"), &out_doc.to_bytes())?;
    write_atomic(&args.out.join("result.json"), &json_bytes(&record))?;
    write_atomic(&args.out.join("before.svg"), profile_svg(&result.before, &format!("path {name}, before")).as_bytes())?;
    write_atomic(&args.out.join("after.svg"), profile_svg(&result.after, &format!("path {name}, after")).as_bytes())?;
    let _ = writeln!(
        stderr,
        "aggregate {:.3} -> {:.3} after {} evaluations, {} steps",
        result.before.aggregate_mean,
        result.after.aggregate_mean,
        result.evaluations,
        result.change_log.len()
    );
    if !result.converged {
        let _ = writeln!(stderr, "warning: not converged; best objective {:.3}", result.objective);
    }
    Ok(())
}

#[derive(Serialize)]
struct Side {
    classes: Vec<(Attribute, u8)>,
    aggregate_mean: f64,
    overall_class: u8,
    scene_hash: String,
}

#[derive(Serialize)]
struct Comparison {
    path: String,
    a: Side,
    b: Side,
    /// b minus a, per attribute class.
    deltas: Vec<(Attribute, i16)>,
    aggregate_delta: f64,
}

fn compare_cmd(args: CompareArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let config = load_config(args.common.config.as_deref())?;
    let side = |path: &Path| -> Result<Side, CliError> {
        let doc = load_scene(path)?;
        let nav = doc.nav_path(&args.common.path, config.turn_threshold).map_err(input)?;
        let r = identify(&doc.scene, &nav, &config).map_err(from_core)?;
        Ok(Side {
            classes: Attribute::ALL.iter().map(|&a| (a, r.class_of(a).value())).collect(),
            aggregate_mean: r.aggregate_mean,
            overall_class: r.overall_class.value(),
            scene_hash: doc.hash(),
        })
    };
    let (a, b) = (side(&args.a)?, side(&args.b)?);
    let deltas = a
        .classes
        .iter()
        .zip(&b.classes)
        .map(|(&(attr, ca), &(_, cb))| (attr, i16::from(cb) - i16::from(ca)))
        .collect();
    let aggregate_delta = b.aggregate_mean - a.aggregate_mean;
    let out = json_bytes(&Comparison { path: args.common.path.clone(), a, b, deltas, aggregate_delta });
    match &args.out {
        Some(p) => write_atomic(p, &out),
        None => stdout.write_all(&out).map_err(input),
    }
}

fn config_init(out: &Path, force: bool) -> Result<(), CliError> {
    if out.exists() && !force {
        return Err(CliError::Input(format!("{} exists; pass --force to overwrite", out.display())));
    }
    write_atomic(out, &json_bytes(&ScaleConfig::default()))
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return EXIT_INPUT;
            }
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
    };
    let outcome = match cli.command {
        Command::Identify(a) => identify_cmd(a, stdout),
        Command::Manipulate(a) => manipulate_cmd(a, stderr),
        Command::Compare(a) => compare_cmd(a, stdout),
        Command::Config { command: ConfigCommand::Init { out, force } } => config_init(&out, force),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
