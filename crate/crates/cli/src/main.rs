//! `igame`: run solvers and reproduce the experiments from a TOML config.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use igame_core::bench::{
    cache_dir, max_neighbour_jump, run_comparison, run_fence_snapshots, run_outcome_maps, ExperimentConfig, Method,
    CACHE_ENV,
};
use igame_core::game::game_by_id;
use igame_core::kernel::run;

#[derive(Parser)]
#[command(name = "igame", version, about)]
struct Cli {
    /// Experiment config (TOML). Defaults are used for missing keys.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,

    /// Overrides the seed of every solver run.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Base directory for run outputs; each run goes in a subdirectory named
    /// by the config hash.
    #[arg(long, global = true, default_value = "runs")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One solver run from the `[solve]` section; writes a trace directory.
    Solve,
    /// Generates (or finds) the cached chauffeur benchmark grid.
    Benchmark,
    /// Error-vs-time comparison of multigrid, iGame and iGame*.
    Compare {
        /// Use the original trial counts (5 / 10 / 100).
        #[arg(long)]
        paper_scale: bool,
    },
    /// iGame snapshots on the fence game against the fence oracle.
    Fence,
    /// Outcome maps of successive pursuer policies against a grid evader.
    Simulate,
    /// Recomputes the cached benchmark and fence oracle.
    Oracle,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path).with_context(|| format!("reading {}", path.display()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    if let Command::Compare { paper_scale: true } = cli.command {
        cfg.comparison = cfg.comparison.paper_scale();
    }
    let cache = cache_dir();
    let run_dir = cfg.run_dir(&cli.out)?;
    fs::create_dir_all(&run_dir)?;
    fs::write(run_dir.join("config.toml"), cfg.to_toml_string()?)?;

    match cli.command {
        Command::Solve => {
            let game = game_by_id(&cfg.solve.game)?;
            let trace = run(&game, &cfg.solve)?;
            let dir = run_dir.join("solve");
            trace.write_dir(&dir)?;
            let last = trace.checkpoints.last().context("no iterations were run")?;
            println!("{} samples in {:.1} ms, d = {:.4}", last.n, last.wall_ms, last.schedule.d);
            done(&dir);
        }
        Command::Benchmark => {
            let sol = cfg.comparison.benchmark.load_or_solve(&cache)?;
            let key = cfg.comparison.benchmark.key()?;
            println!("benchmark {key}: {:?} nodes, {} sweeps", sol.lattice.shape(), sol.sweeps());
            println!("cache directory {} (set {CACHE_ENV} to move it)", cache.display());
        }
        Command::Compare { .. } => {
            let benchmark = cfg.comparison.benchmark.load_or_solve(&cache)?;
            let report = run_comparison(&cfg.comparison, &benchmark)?;
            let dir = run_dir.join("compare");
            report.write_dir(&dir)?;
            println!("{:<10} {:>9} {:>6} {:>12} {:>12}", "method", "threshold", "hits", "mean_ms", "bound_ms");
            for r in &report.table {
                let mean = r.mean_ms.map_or("-".to_string(), |m| format!("{m:.1}"));
                println!(
                    "{:<10} {:>9} {:>3}/{:<2} {:>12} {:>12.1}",
                    r.method.as_str(),
                    r.threshold,
                    r.hits,
                    r.trials,
                    mean,
                    r.lower_bound_ms
                );
            }
            if let Some(&t) = cfg.comparison.thresholds.first() {
                for (a, b) in [(Method::Igamestar, Method::Igame), (Method::Igame, Method::Multigrid)] {
                    let verdict = igame_core::bench::faster(&report, a, b, t);
                    println!("{} faster than {} to {t}: {verdict}", a.as_str(), b.as_str());
                }
            }
            done(&dir);
        }
        Command::Fence => {
            let oracle = cfg.fence.oracle.load_or_solve(&cache)?;
            println!("oracle max neighbour jump {:.3}", max_neighbour_jump(&oracle));
            let run = run_fence_snapshots(&cfg.fence, oracle)?;
            let dir = run_dir.join("fence");
            run.write_dir(&dir)?;
            for s in &run.snapshots {
                println!("n = {:>5}  d = {:.4}  mean error {:.4}  sup error {:.4}", s.n, s.schedule.d, s.error.mean, s.error.sup);
            }
            done(&dir);
        }
        Command::Simulate => {
            let evader = cfg.outcomes.evader.load_or_solve(&cache)?;
            let series = run_outcome_maps(&cfg.outcomes, evader)?;
            let dir = run_dir.join("outcomes");
            series.write_dir(&dir)?;
            for (n, map) in &series.maps {
                let c = map.counts;
                println!("n = {n:>5}  capture {:>4}  escape {:>4}  timeout {:>4}", c.capture, c.escape, c.timeout);
            }
            done(&dir);
        }
        Command::Oracle => {
            let keys = [cfg.comparison.benchmark.key()?, cfg.fence.oracle.reference.key()?];
            for key in &keys {
                for ext in ["csv", "json"] {
                    let _ = fs::remove_file(cache.join(format!("{key}.{ext}")));
                }
            }
            let oracle_key = cfg.fence.oracle.key()?;
            for ext in ["csv", "json"] {
                let _ = fs::remove_file(cache.join(format!("{oracle_key}.{ext}")));
            }
            cfg.comparison.benchmark.load_or_solve(&cache)?;
            cfg.fence.oracle.load_or_solve(&cache)?;
            println!("regenerated {} and {oracle_key} in {}", keys.join(", "), cache.display());
        }
    }
    Ok(())
}

fn done(dir: &Path) {
    println!("wrote {}", dir.display());
}
