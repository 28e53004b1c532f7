//! The `gmface` command line.
//!
//! Exit codes: 0 on success, 1 for usage errors (bad flags, out-of-range
//! arguments), 2 for data and runtime errors (unreadable files, malformed
//! models, dimension mismatches). Results go to stdout, logs to stderr.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand};
use gmface_core::{
    compute_loss_with, fit_with, render_with, rotate, scale, top_k, translate, AdamConfig,
    FitConfig, GmModel, ImageGrid, InitStrategy, LossReport, RotationSpec, Vec2,
};
use log::{debug, info};

use crate::error::Error;
use crate::export::{export_loss_history, export_sections, export_surface, Section};
use crate::model_file::{common_face, fmt_real, read_model, read_precision_table, write_model};
use crate::parallel::PoolExecutor;
use crate::{load_dataset, read_image, write_image};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "gmface",
    version,
    about = "Fit, transform and render multi-Gaussian face models"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a model to one image or a directory of same-sized images.
    Fit(FitArgs),
    /// Render a model to an 8-bit PGM at its stored size.
    Render(RenderArgs),
    /// Translate, scale or rotate a model.
    Transform(TransformArgs),
    /// Print MSE, peak absolute error and total loss of a model on an image.
    Eval(EvalArgs),
    /// Keep the k components with the largest absolute weight.
    Topk(TopkArgs),
    /// Export a surface or cross sections of a model or image as CSV.
    Surface(SurfaceArgs),
    /// Convert a precision table (w mu1 mu2 a11 a12 a22 rows) to a model file.
    ImportTable(ImportArgs),
}

#[derive(Debug, Args)]
struct FitArgs {
    /// PGM file or directory of PGM files.
    #[arg(long)]
    input: PathBuf,
    /// Number of components; with a model for --init, keeps its top components.
    #[arg(long)]
    components: Option<usize>,
    #[arg(long, default_value_t = 2000)]
    epochs: usize,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    #[arg(long, default_value_t = 256)]
    batch_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `random` or a model file to start from.
    #[arg(long, default_value = "random")]
    init: String,
    #[arg(long)]
    out: PathBuf,
    /// Per-epoch loss history CSV.
    #[arg(long)]
    history: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RenderArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("op").required(true).args(["translate", "scale", "rotate"])))]
struct TransformArgs {
    #[arg(long)]
    model: PathBuf,
    /// Shift by (dx1, dx2) in normalized row and column coordinates.
    #[arg(long, num_args = 2, value_names = ["DX", "DY"], allow_negative_numbers = true)]
    translate: Option<Vec<f64>>,
    /// Scale about the origin by a positive factor.
    #[arg(long, allow_negative_numbers = true)]
    scale: Option<f64>,
    /// Rotate by an angle in degrees.
    #[arg(long, allow_negative_numbers = true)]
    rotate: Option<f64>,
    /// Rotation center in normalized coordinates.
    #[arg(
        long,
        num_args = 2,
        value_names = ["CX", "CY"],
        default_values_t = [0.5, 0.5],
        allow_negative_numbers = true,
        requires = "rotate"
    )]
    center: Vec<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    image: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
}

#[derive(Debug, Args)]
struct TopkArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["model", "image"])))]
struct SurfaceArgs {
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    image: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Export 1 − value.
    #[arg(long)]
    invert: bool,
    /// 1-based rows to export as cross sections.
    #[arg(long, value_delimiter = ',')]
    rows: Vec<usize>,
    /// 1-based columns to export as cross sections.
    #[arg(long, value_delimiter = ',')]
    cols: Vec<usize>,
}

#[derive(Debug, Args)]
struct ImportArgs {
    /// Table to convert; the bundled common face when omitted.
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Render(a) => cmd_render(a),
        Command::Transform(a) => cmd_transform(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Topk(a) => cmd_topk(a),
        Command::Surface(a) => cmd_surface(a),
        Command::ImportTable(a) => cmd_import(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            EXIT_DATA
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn loss_line(names: [&str; 3], r: &LossReport) -> String {
    format!(
        "{}={} {}={} {}={}",
        names[0],
        fmt_real(r.l2),
        names[1],
        fmt_real(r.l_inf),
        names[2],
        fmt_real(r.total)
    )
}

fn load_targets(input: &Path) -> crate::Result<Vec<ImageGrid>> {
    if input.is_dir() {
        load_dataset(input)
    } else {
        Ok(vec![read_image(input)?])
    }
}

fn cmd_fit(a: FitArgs) -> CmdResult {
    if a.components == Some(0) {
        return Err(usage("--components must be at least 1"));
    }
    let init = if a.init == "random" {
        InitStrategy::Random
    } else {
        let mut model = read_model(&a.init)?;
        match a.components {
            Some(m) if m > model.len() => {
                return Err(usage(format!(
                    "--components {m} exceeds the {} components of {}",
                    model.len(),
                    a.init
                )))
            }
            Some(m) if m < model.len() => {
                info!("starting from the top {m} of {} components", model.len());
                model = top_k(&model, m).map_err(Error::from)?;
            }
            _ => {}
        }
        InitStrategy::FromModel(model)
    };
    let cfg = FitConfig {
        epochs: a.epochs,
        alpha: a.alpha,
        adam: AdamConfig {
            learning_rate: a.lr,
            ..AdamConfig::default()
        },
        batch_size: a.batch_size,
        seed: a.seed,
        init,
        m: a.components.unwrap_or(FitConfig::default().m),
        ..FitConfig::default()
    };
    if let Err(e) = cfg.validate() {
        return Err(usage(e.to_string()));
    }

    let targets = load_targets(&a.input)?;
    let exec = PoolExecutor::from_env();
    info!(
        "fitting {} image(s) of {}x{} for {} epochs on {} thread(s)",
        targets.len(),
        targets[0].height(),
        targets[0].width(),
        cfg.epochs,
        exec.threads()
    );
    let mut last_epoch = 0;
    let result = fit_with(&exec, &targets, &cfg, |ev| {
        if ev.epoch != last_epoch && ev.epoch % 100 == 0 {
            debug!("epoch {}/{}", ev.epoch, cfg.epochs);
        }
        last_epoch = ev.epoch;
    })
    .map_err(Error::from)?;

    write_model(&result.model, &a.out)?;
    if let Some(path) = &a.history {
        export_loss_history(&result.history, path)?;
    }
    println!(
        "{}",
        loss_line(["l2", "l_inf", "total"], &result.final_loss)
    );
    Ok(())
}

fn cmd_render(a: RenderArgs) -> CmdResult {
    let model = read_model(&a.model)?;
    let grid = render_with(&PoolExecutor::from_env(), &model);
    write_image(&grid.clamped(), &a.out, 255)?;
    Ok(())
}

fn cmd_transform(a: TransformArgs) -> CmdResult {
    let model = read_model(&a.model)?;
    let out = if let Some(t) = &a.translate {
        let t = Vec2::new(t[0], t[1]);
        if !t.is_finite() {
            return Err(usage("--translate offsets must be finite"));
        }
        translate(&model, t)
    } else if let Some(k) = a.scale {
        if !(k.is_finite() && k > 0.0) {
            return Err(usage(format!(
                "--scale must be finite and positive, got {k}"
            )));
        }
        scale(&model, k).map_err(Error::from)?
    } else if let Some(deg) = a.rotate {
        let center = Vec2::new(a.center[0], a.center[1]);
        if !deg.is_finite() || !center.is_finite() {
            return Err(usage("--rotate and --center must be finite"));
        }
        rotate(&model, RotationSpec::from_degrees(deg, center)).map_err(Error::from)?
    } else {
        unreachable!("clap requires one transform flag")
    };
    write_model(&out, &a.out)?;
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> CmdResult {
    if !(a.alpha.is_finite() && a.alpha >= 0.0) {
        return Err(usage("--alpha must be finite and non-negative"));
    }
    let model = read_model(&a.model)?;
    let image = read_image(&a.image)?;
    let report = compute_loss_with(&PoolExecutor::from_env(), &model, &[image], a.alpha)
        .map_err(|e| Error::in_file(&a.image, e.into()))?;
    println!("{}", loss_line(["mse", "pae", "total"], &report));
    Ok(())
}

fn cmd_topk(a: TopkArgs) -> CmdResult {
    let model = read_model(&a.model)?;
    if a.k == 0 || a.k > model.len() {
        return Err(usage(format!(
            "--k must lie in 1..={}, got {}",
            model.len(),
            a.k
        )));
    }
    write_model(&top_k(&model, a.k).map_err(Error::from)?, &a.out)?;
    Ok(())
}

fn cmd_surface(a: SurfaceArgs) -> CmdResult {
    let grid = match (&a.model, &a.image) {
        (Some(path), None) => render_model(&read_model(path)?),
        (None, Some(path)) => read_image(path)?,
        _ => unreachable!("clap enforces exactly one source"),
    };
    if a.rows.is_empty() && a.cols.is_empty() {
        export_surface(&grid, &a.out, a.invert)?;
    } else {
        let sections: Vec<Section> = a
            .rows
            .iter()
            .map(|&r| Section::Row(r))
            .chain(a.cols.iter().map(|&c| Section::Col(c)))
            .collect();
        export_sections(&grid, &sections, &a.out, a.invert)?;
    }
    Ok(())
}

fn render_model(model: &GmModel) -> ImageGrid {
    render_with(&PoolExecutor::from_env(), model)
}

fn cmd_import(a: ImportArgs) -> CmdResult {
    let model = match &a.table {
        Some(path) => read_precision_table(path)?,
        None => common_face(),
    };
    write_model(&model, &a.out)?;
    Ok(())
}
