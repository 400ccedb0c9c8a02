//! Command-line driver: world generation, benchmark runs, log replay, and
//! summary plots.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use frontis::audit::audit_log;
use frontis::formats;
use frontis::plot::{render_summary_svg, Series};
use frontis::suite::{build_suite, SuiteParams};
use frontis::vlm::{HttpChatClient, VlmConfig, VlmScorer};
use frontis_core::eval::{aggregate, run_episode, spawn_pose, EpisodeResult, EpisodeSpec};
use frontis_core::grounding::GroundTruthSegmenter;
use frontis_core::scoring::{ConstantScorer, OracleScorer, SemanticScorer};
use frontis_core::{CameraModel, NavConfig, WorldSpec};

#[derive(Parser)]
#[command(name = "frontis", about = "Frontier-based object-goal navigation benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a batch of worlds plus a matching episode manifest.
    GenWorlds {
        /// Output directory for world files and the suite manifest.
        #[arg(long)]
        out: PathBuf,
        /// Number of worlds.
        #[arg(long, default_value_t = 20)]
        count: u64,
        /// First world seed; world i uses seed + i.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 64)]
        width: usize,
        #[arg(long, default_value_t = 64)]
        height: usize,
        #[arg(long, default_value_t = 4)]
        rooms: usize,
        #[arg(long, default_value_t = 3)]
        objects: usize,
        /// Minimum start-to-goal shortest-path length in meters; spawns
        /// closer than this are skipped when picking the episode start.
        #[arg(long, default_value_t = 0.0)]
        min_sep: f64,
    },
    /// Run a benchmark suite and write per-episode results.
    Run {
        /// Suite manifest (JSONL of episode specs).
        #[arg(long)]
        suite: PathBuf,
        /// Directory holding world files named world_<seed>.txt.
        #[arg(long)]
        worlds: PathBuf,
        #[arg(long, value_enum, default_value_t = ScorerKind::Oracle)]
        scorer: ScorerKind,
        /// TOML run configuration; missing keys take defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Step budget override (flag beats file beats default).
        #[arg(long)]
        max_steps: Option<u32>,
        /// Results output path (JSONL).
        #[arg(long)]
        out: PathBuf,
        /// Per-episode tick logs are written here when given.
        #[arg(long)]
        log_dir: Option<PathBuf>,
        /// Rayon worker threads (0 = library default).
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Run at most this many episodes from the manifest.
        #[arg(long)]
        limit: Option<usize>,
        /// Chat endpoint for the vlm scorer.
        #[arg(long)]
        endpoint: Option<String>,
        /// Validate the suite and print the plan without running.
        #[arg(long)]
        dry_run: bool,
    },
    /// Audit a recorded tick log against the run invariants.
    Replay {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Render labeled results files into an SVG summary chart.
    Plot {
        /// Repeatable label=results.jsonl pairs.
        #[arg(long = "series", required = true)]
        series: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScorerKind {
    Oracle,
    Constant,
    Vlm,
}

fn world_file(dir: &Path, seed: u64) -> PathBuf {
    dir.join(format!("world_{seed}.txt"))
}

fn load_run_config(path: Option<&Path>, max_steps: Option<u32>) -> Result<NavConfig> {
    let mut cfg = match path {
        Some(p) => formats::load_config(p)?,
        None => NavConfig::default(),
    };
    if let Some(ms) = max_steps {
        cfg.max_steps = ms;
    }
    cfg.validate().map_err(|e| anyhow::anyhow!("{e}"))?;
    Ok(cfg)
}

fn make_scorer(
    kind: ScorerKind,
    world: &WorldSpec,
    goal: &str,
    camera: &CameraModel,
    endpoint: Option<&str>,
) -> Result<Box<dyn SemanticScorer>> {
    Ok(match kind {
        ScorerKind::Oracle => {
            Box::new(OracleScorer::new(world, goal).map_err(|e| anyhow::anyhow!("{e}"))?)
        }
        ScorerKind::Constant => Box::new(ConstantScorer::new(world, goal)),
        ScorerKind::Vlm => {
            let mut cfg = VlmConfig::default();
            if let Some(e) = endpoint {
                cfg.endpoint = e.to_string();
            }
            Box::new(VlmScorer::new(HttpChatClient::new(cfg)?, camera.clone()))
        }
    })
}

fn run_one(
    spec: &EpisodeSpec,
    worlds: &Path,
    kind: ScorerKind,
    cfg: &NavConfig,
    camera: &CameraModel,
    endpoint: Option<&str>,
    keep_log: bool,
) -> Result<EpisodeResult> {
    let world = formats::load_world(&world_file(worlds, spec.world_seed))?;
    let start = spawn_pose(&world, spec.spawn_pick)
        .with_context(|| format!("world {} has no spawn cells", spec.world_seed))?;
    let mut scorer = make_scorer(kind, &world, &spec.goal, camera, endpoint)?;
    let mut seg = GroundTruthSegmenter::new(&world);
    run_episode(
        &world,
        start,
        &spec.goal,
        cfg,
        camera,
        scorer.as_mut(),
        &mut seg,
        keep_log,
    )
    .map_err(|e| anyhow::anyhow!("episode seed={} goal={}: {e}", spec.world_seed, spec.goal))
}

#[allow(clippy::too_many_arguments)]
fn cmd_gen_worlds(
    out: &Path,
    count: u64,
    seed: u64,
    width: usize,
    height: usize,
    rooms: usize,
    objects: usize,
    min_sep: f64,
) -> Result<()> {
    std::fs::create_dir_all(out)?;
    let params = SuiteParams { count, seed, width, height, rooms, objects, min_sep };
    let (worlds, episodes) = build_suite(&params)?;
    for world in &worlds {
        formats::save_world(&world_file(out, world.seed), world)?;
    }
    formats::write_manifest(&out.join("suite.jsonl"), &episodes)?;
    println!("wrote {count} worlds and {} episodes to {}", episodes.len(), out.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    suite: &Path,
    worlds: &Path,
    kind: ScorerKind,
    config: Option<&Path>,
    max_steps: Option<u32>,
    out: &Path,
    log_dir: Option<&Path>,
    workers: usize,
    limit: Option<usize>,
    endpoint: Option<&str>,
    dry_run: bool,
) -> Result<()> {
    let cfg = load_run_config(config, max_steps)?;
    let camera = CameraModel::default();
    let mut episodes = formats::read_manifest(suite)?;
    if let Some(n) = limit {
        episodes.truncate(n);
    }
    for spec in &episodes {
        let path = world_file(worlds, spec.world_seed);
        if !path.exists() {
            bail!("missing world file {}", path.display());
        }
    }
    if dry_run {
        println!("{} episodes, max_steps {}, worlds ok", episodes.len(), cfg.max_steps);
        return Ok(());
    }
    if workers > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(workers).build_global().ok();
    }
    if let Some(dir) = log_dir {
        std::fs::create_dir_all(dir)?;
    }
    let keep_log = log_dir.is_some();
    let outcomes: Vec<Result<EpisodeResult>> = episodes
        .par_iter()
        .map(|spec| run_one(spec, worlds, kind, &cfg, &camera, endpoint, keep_log))
        .collect();

    let mut results = Vec::new();
    for (spec, outcome) in episodes.iter().zip(outcomes) {
        let mut res = outcome?;
        if let Some(dir) = log_dir {
            let name = format!("log_{}_{}_{}.jsonl", spec.world_seed, spec.spawn_pick, spec.goal);
            formats::write_log(&dir.join(name), &res.log)?;
            res.log.clear();
        }
        results.push(res);
    }
    formats::write_results(out, &results)?;
    let s = aggregate(&results);
    println!(
        "episodes {}  SR {:.3}  SPL {:.3}  mean steps {:.1}",
        s.episodes, s.sr, s.spl, s.mean_steps
    );
    for (mode, count) in &s.failures {
        println!("  {mode:?}: {count}");
    }
    Ok(())
}

fn cmd_replay(log: &Path, config: Option<&Path>) -> Result<()> {
    let cfg = load_run_config(config, None)?;
    let records = formats::read_log(log)?;
    let report = audit_log(&records, &cfg);
    println!("{} ticks audited", report.ticks);
    for viol in &report.violations {
        println!("violation: {viol}");
    }
    if report.is_clean() {
        println!("log is clean");
        Ok(())
    } else {
        bail!("{} violations", report.violations.len())
    }
}

fn cmd_plot(series: &[String], out: &Path) -> Result<()> {
    let mut data = Vec::new();
    for entry in series {
        let (label, path) = entry
            .split_once('=')
            .with_context(|| format!("series {entry:?} is not label=path"))?;
        let results = formats::read_results(Path::new(path))?;
        data.push(Series { label: label.to_string(), summary: aggregate(&results) });
    }
    std::fs::write(out, render_summary_svg(&data))?;
    println!("wrote {}", out.display());
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::GenWorlds { out, count, seed, width, height, rooms, objects, min_sep } => {
            cmd_gen_worlds(&out, count, seed, width, height, rooms, objects, min_sep)
        }
        Command::Run {
            suite,
            worlds,
            scorer,
            config,
            max_steps,
            out,
            log_dir,
            workers,
            limit,
            endpoint,
            dry_run,
        } => cmd_run(
            &suite,
            &worlds,
            scorer,
            config.as_deref(),
            max_steps,
            &out,
            log_dir.as_deref(),
            workers,
            limit,
            endpoint.as_deref(),
            dry_run,
        ),
        Command::Replay { log, config } => cmd_replay(&log, config.as_deref()),
        Command::Plot { series, out } => cmd_plot(&series, &out),
    }
}
