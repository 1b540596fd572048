use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use lidless::norming::{
    build_pairs_with, embed, pairs_from_json, pairs_to_json, EmbeddingModel, NormedSpaceModel,
    NormingSet,
};
use lidless::refinement::{verify_schedule, TileWindow, WorstCasePairs};
use lidless::render::{render_svg, RenderSpec};
use lidless::verifier::{
    verify_pullback, verify_schedule_suite, verify_sigma_with, verify_tau_with, Mutation, Report,
    SampleSpec, TauOptions, WitnessBounds,
};
use lidless::{
    locate_sigma, locate_tau, sigma_spec, tau_in_window, tau_spec, BoxSpec, IdentityPairs, Point,
    RefinementSchedule, Scalar,
};

/// Exit status when a window meets more tiles than the cap.
const EXIT_OVERFLOW: u8 = 2;

#[derive(Parser)]
#[command(name = "lidless", version, about = "Exact point location, enumeration and checks for the lidless-box tiling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the tiles holding a point.
    Locate(LocateArgs),
    /// List the tiles meeting a closed window.
    Tiles(TilesArgs),
    /// Draw a planar window as SVG.
    Render(RenderArgs),
    /// Run a verification suite and print its report.
    Verify(VerifyArgs),
    /// Build norming pairs for a space and check the pullback tiling.
    Embed(EmbedArgs),
}

#[derive(Args)]
struct LocateArgs {
    #[arg(long)]
    dim: Option<usize>,
    /// Comma-separated coordinates, e.g. 11/5,0 or 0.5,-0.3.
    #[arg(long, allow_hyphen_values = true)]
    point: String,
    /// Schedule file (JSON); defaults to ratio 1/10, ε = 9/100.
    #[arg(long)]
    schedule: Option<PathBuf>,
    /// Locate in the unrefined covering instead.
    #[arg(long)]
    sigma: bool,
    /// Space file; the point is then taken in that space and mapped by T.
    #[arg(long)]
    space: Option<PathBuf>,
    /// Pairs file for --space.
    #[arg(long, requires = "space")]
    pairs: Option<PathBuf>,
    /// Norming set used to build pairs when --pairs is absent.
    #[arg(long, requires = "space")]
    norming: Option<PathBuf>,
}

#[derive(Args)]
struct TilesArgs {
    #[arg(long)]
    dim: Option<usize>,
    /// Bounds l1,u1,l2,u2,...
    #[arg(long, allow_hyphen_values = true)]
    window: String,
    #[arg(long, default_value_t = 10_000)]
    cap: usize,
    #[arg(long)]
    schedule: Option<PathBuf>,
    /// Print one JSON record instead of lines.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long, allow_hyphen_values = true, default_value = "-4,4,-4,4")]
    window: String,
    #[arg(long, default_value_t = 3)]
    max_slab: u32,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    schedule: Option<PathBuf>,
    #[arg(long, default_value_t = 800)]
    size: u32,
    #[arg(long, default_value_t = 1.0)]
    stroke_width: f64,
    /// Write tile ids into the picture.
    #[arg(long)]
    labels: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Sigma,
    Tau,
    Pullback,
    Schedule,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Uniform,
    Adversarial,
}

#[derive(Clone, Copy, ValueEnum)]
enum Bounds {
    Identity,
    WorstCase,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, value_enum, default_value_t = Mode::Uniform)]
    mode: Mode,
    /// Sampling window; defaults to [-16,16]^d for sigma and [-8,8]^d otherwise.
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    cap: usize,
    /// Random windows checked for disjointness (tau suite).
    #[arg(long, default_value_t = 50)]
    windows: usize,
    #[arg(long)]
    schedule: Option<PathBuf>,
    #[arg(long)]
    space: Option<PathBuf>,
    #[arg(long, requires = "space")]
    norming: Option<PathBuf>,
    /// Coordinate bounds for the schedule suite without a space.
    #[arg(long, value_enum, default_value_t = Bounds::WorstCase)]
    bounds: Bounds,
    /// Highest level for schedule and witness checks.
    #[arg(long, default_value_t = 6)]
    max_level: u32,
    /// Highest slab index for witness checks.
    #[arg(long, default_value_t = 6)]
    max_slab: u32,
    /// Apply a built-in defect: closed-lid, inflated-eps, non-null-schedule, loose-cross-bound.
    #[arg(long)]
    mutation: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long)]
    norming: PathBuf,
    /// Where to write the pairs; stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the pullback report; stderr otherwise.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1_000)]
    samples: usize,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Locate(args) => locate(args),
        Command::Tiles(args) => tiles(args),
        Command::Render(args) => render(args),
        Command::Verify(args) => verify(args),
        Command::Embed(args) => embed_cmd(args),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn schedule(path: Option<&Path>) -> Result<RefinementSchedule> {
    match path {
        Some(p) => Ok(RefinementSchedule::from_json(&read(p)?)?),
        None => Ok(RefinementSchedule::default()),
    }
}

fn space(path: &Path) -> Result<NormedSpaceModel> {
    NormedSpaceModel::from_json(&read(path)?).with_context(|| format!("space file {}", path.display()))
}

fn norming(path: &Path) -> Result<NormingSet> {
    NormingSet::from_json(&read(path)?).with_context(|| format!("norming file {}", path.display()))
}

/// A model from a space plus either a pairs file or a norming set.
fn model(space_path: &Path, pairs: Option<&Path>, set: Option<&Path>, mutation: Option<Mutation>) -> Result<EmbeddingModel> {
    let space = space(space_path)?;
    if let Some(p) = pairs {
        return Ok(EmbeddingModel::new(space, pairs_from_json(&read(p)?)?, None)?);
    }
    let Some(set) = set else {
        bail!("--space needs --pairs or --norming");
    };
    let bounds = mutation.map(Mutation::pair_bounds).unwrap_or_default();
    Ok(build_pairs_with(&space, &norming(set)?, &bounds)?)
}

fn check_dim(dim: Option<usize>, got: usize) -> Result<()> {
    match dim {
        Some(d) if d != got => bail!("dimension mismatch: --dim {d} but {got} coordinates"),
        _ => Ok(()),
    }
}

fn locate(args: LocateArgs) -> Result<ExitCode> {
    let point = Point::parse_list(&args.point)?;
    check_dim(args.dim, point.dim())?;
    let sched = schedule(args.schedule.as_deref())?;
    let image = match &args.space {
        Some(space_path) => {
            let model = model(space_path, args.pairs.as_deref(), args.norming.as_deref(), None)?;
            let image = embed(&model, &point)?;
            println!("T{point} = {image}");
            image
        }
        None => point,
    };
    if args.sigma {
        let id = locate_sigma(&image);
        println!("{id}\t{}", sigma_spec(id, image.dim())?);
        return Ok(ExitCode::SUCCESS);
    }
    for id in locate_tau(&image, &sched) {
        println!("{id}\t{}", tau_spec(id, image.dim(), &sched)?);
    }
    Ok(ExitCode::SUCCESS)
}

fn tiles(args: TilesArgs) -> Result<ExitCode> {
    let window = BoxSpec::parse_window(&args.window)?;
    check_dim(args.dim, window.dim())?;
    let sched = schedule(args.schedule.as_deref())?;
    let found = tau_in_window(&window, &sched, args.cap);
    if args.json {
        println!("{}", serde_json::to_string(&found)?);
    } else {
        match &found {
            TileWindow::Complete(ids) => {
                for id in ids {
                    println!("{id}\t{}", tau_spec(*id, window.dim(), &sched)?);
                }
            }
            TileWindow::Overflow(_) => {
                println!("overflow: more than {} tiles meet {window}", args.cap);
            }
        }
    }
    Ok(if found.is_overflow() {
        ExitCode::from(EXIT_OVERFLOW)
    } else {
        ExitCode::SUCCESS
    })
}

fn render(args: RenderArgs) -> Result<ExitCode> {
    let window = BoxSpec::parse_window(&args.window)?;
    let mut spec = RenderSpec::new(window, args.max_slab)?;
    spec.size = args.size;
    spec.stroke_width = args.stroke_width;
    spec.labels = args.labels;
    let svg = render_svg(&spec, &schedule(args.schedule.as_deref())?)?;
    write_or_print(args.out.as_deref(), &svg)?;
    Ok(ExitCode::SUCCESS)
}

fn verify(args: VerifyArgs) -> Result<ExitCode> {
    let mutation = match &args.mutation {
        Some(name) => Some(Mutation::parse(name).with_context(|| format!("unknown mutation {name}"))?),
        None => None,
    };
    let base = schedule(args.schedule.as_deref())?;
    let sched = match mutation {
        Some(m) => m.schedule(&base),
        None => base,
    };
    let model = match &args.space {
        Some(p) => Some(model(p, None, args.norming.as_deref(), mutation)?),
        None => None,
    };
    let dim = model.as_ref().map(|m| m.space().dim()).unwrap_or(args.dim);
    let window = match &args.window {
        Some(w) => BoxSpec::parse_window(w)?,
        None => {
            let r = if matches!(args.suite, Suite::Sigma) { 16 } else { 8 };
            BoxSpec::cube(dim, Scalar::from_int(r))
        }
    };
    let spec = match args.mode {
        Mode::Uniform => SampleSpec::uniform(args.seed, args.samples, window),
        Mode::Adversarial => SampleSpec::adversarial(args.seed, args.samples, window),
    };
    let report: Report = match args.suite {
        Suite::Sigma => verify_sigma_with(dim, &spec, mutation)?,
        Suite::Tau => {
            let options = TauOptions {
                windows: args.windows,
                cap: args.cap,
                ..TauOptions::default()
            };
            verify_tau_with(dim, &sched, &spec, &options)?
        }
        Suite::Pullback => {
            let model = match model {
                Some(m) => m,
                None => EmbeddingModel::coordinate(dim)?,
            };
            let bounds = WitnessBounds {
                max_level: args.max_level,
                max_slab: args.max_slab,
            };
            verify_pullback(&model, &sched, &spec, bounds)?
        }
        Suite::Schedule => match (&model, args.bounds) {
            (Some(m), _) => verify_schedule_suite(&sched, m, args.max_level),
            (None, Bounds::Identity) => verify_schedule_suite(&sched, &IdentityPairs(dim), args.max_level),
            (None, Bounds::WorstCase) => {
                verify_schedule_suite(&sched, &WorstCasePairs(dim), args.max_level)
            }
        },
    };
    emit(&report, args.out.as_deref())
}

fn emit(report: &Report, out: Option<&Path>) -> Result<ExitCode> {
    let mut text = report.to_json();
    text.push('\n');
    write_or_print(out, &text)?;
    eprintln!(
        "{}: {} ({} checks, {} failures)",
        report.suite,
        if report.passed() { "pass" } else { "FAIL" },
        report.checks,
        report.failure_count
    );
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn embed_cmd(args: EmbedArgs) -> Result<ExitCode> {
    let model = model(&args.space, None, Some(&args.norming), None)?;
    let mut pairs = pairs_to_json(&model);
    pairs.push('\n');
    write_or_print(args.out.as_deref(), &pairs)?;
    let sched = RefinementSchedule::default();
    let schedule_ok = verify_schedule(&sched, &model, 6).passed();
    let dim = model.space().dim();
    let spec = SampleSpec::uniform(args.seed, args.samples, BoxSpec::cube(dim, Scalar::from_int(8)));
    let report = verify_pullback(&model, &sched, &spec, WitnessBounds::default())?;
    let mut text = report.to_json();
    text.push('\n');
    match &args.report {
        Some(p) => fs::write(p, &text).with_context(|| format!("writing {}", p.display()))?,
        None => eprint!("{text}"),
    }
    eprintln!(
        "{} pairs; schedule {}; pullback {}",
        model.gamma(),
        if schedule_ok { "pass" } else { "FAIL" },
        if report.passed() { "pass" } else { "FAIL" }
    );
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}
