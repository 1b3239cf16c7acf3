//! Error-versus-wall-clock curves for the fixed-grid baseline and both
//! sampling solvers, and first-crossing times of error thresholds.

use std::fs::File;
use std::io::BufWriter;
use std::ops::ControlFlow;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::game::{game_by_id, GameDef};
use crate::kernel::{run_with, Algorithm, Cadence, KernelOptions, SolverConfig};
use crate::multigrid::{solve_multigrid_with, GridOptions, GridSolution};
use crate::policy::SampleField;
use crate::pools::PoolMode;

use super::error::{error_against_benchmark, error_probes};
use super::reference::GridReference;

pub const DEFAULT_THRESHOLDS: [f64; 4] = [0.1, 0.08, 0.06, 0.04];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Multigrid,
    Igame,
    Igamestar,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Multigrid, Method::Igame, Method::Igamestar];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Multigrid => "multigrid",
            Method::Igame => "igame",
            Method::Igamestar => "igamestar",
        }
    }
}

/// The coarse-to-fine baseline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MultigridSpec {
    pub levels: Vec<Vec<usize>>,
    pub tol: f64,
    pub options: GridOptions,
}

impl Default for MultigridSpec {
    fn default() -> Self {
        Self { levels: [25, 50, 100, 200].map(|n| vec![n, n]).to_vec(), tol: 1e-6, options: GridOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ComparisonConfig {
    pub benchmark: GridReference,
    /// Error probe lattice over the game domain.
    pub probe_shape: Vec<usize>,
    pub thresholds: Vec<f64>,
    /// Trial counts per method.
    pub multigrid_trials: usize,
    pub igame_trials: usize,
    pub igamestar_trials: usize,
    pub multigrid: MultigridSpec,
    /// Seeds of sampling trial `k` are `seed + k`.
    pub igame: SolverConfig,
    pub igamestar: SolverConfig,
    /// Stop a trial once its error falls to this level (multigrid: skip the
    /// remaining levels).
    pub stop_error: Option<f64>,
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        let pools = PoolMode::Grid { angel: 9, demon: 16 };
        let solver = |mode, max_staleness| SolverConfig {
            game: "chauffeur".into(),
            mode,
            max_staleness,
            kernel: KernelOptions { pools: pools.clone(), ..KernelOptions::default() },
            max_samples: 20_000,
            max_seconds: Some(120.0),
            checkpoints: Cadence::Every(256),
            ..SolverConfig::default()
        };
        Self {
            benchmark: GridReference::chauffeur_benchmark(),
            probe_shape: vec![100, 100],
            thresholds: DEFAULT_THRESHOLDS.to_vec(),
            multigrid_trials: 3,
            igame_trials: 3,
            igamestar_trials: 10,
            multigrid: MultigridSpec::default(),
            igame: solver(Algorithm::Igame, 0),
            igamestar: solver(Algorithm::Igamestar, 50),
            stop_error: Some(0.04),
        }
    }
}

impl ComparisonConfig {
    /// The trial counts of the original study: 5, 10 and 100.
    pub fn paper_scale(mut self) -> Self {
        self.multigrid_trials = 5;
        self.igame_trials = 10;
        self.igamestar_trials = 100;
        self
    }

    pub fn trials(&self, method: Method) -> usize {
        match method {
            Method::Multigrid => self.multigrid_trials,
            Method::Igame => self.igame_trials,
            Method::Igamestar => self.igamestar_trials,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.igame.seed = seed;
        self.igamestar.seed = seed;
        self
    }
}

/// One checkpoint of one trial.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub trial: usize,
    pub seed: u64,
    /// Samples, or lattice nodes for the baseline.
    pub n: usize,
    pub wall_ms: f64,
    pub error: f64,
    pub sup_error: f64,
}

/// Aggregate over trials of the `k`-th checkpoint.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveStat {
    pub checkpoint: usize,
    pub n: usize,
    pub trials: usize,
    pub wall_ms_mean: f64,
    pub wall_ms_std: f64,
    pub error_mean: f64,
    pub error_std: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorCurve {
    pub method: Method,
    pub rows: Vec<CurvePoint>,
    pub stat: Vec<CurveStat>,
}

/// First checkpoint of a trial at or below a threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub method: Method,
    pub trial: usize,
    pub threshold: f64,
    pub n: usize,
    pub wall_ms: f64,
}

/// Time to reach a threshold, over all trials of one method.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub method: Method,
    pub threshold: f64,
    pub trials: usize,
    pub hits: usize,
    /// Mean and standard deviation over the trials that crossed.
    pub mean_ms: Option<f64>,
    pub std_ms: Option<f64>,
    /// Mean over all trials of the crossing time, or of the total run time
    /// for censored trials. Exact when `hits == trials`.
    pub lower_bound_ms: f64,
}

impl ThresholdRow {
    pub fn censored(&self) -> usize {
        self.trials - self.hits
    }

    pub fn complete(&self) -> bool {
        self.hits == self.trials && self.trials > 0
    }
}

#[derive(Clone, Debug)]
pub struct ComparisonReport {
    pub curves: Vec<ErrorCurve>,
    pub crossings: Vec<Crossing>,
    pub table: Vec<ThresholdRow>,
}

/// Runs every trial of every method against `benchmark`. Trials run one after
/// another so that wall times are not distorted by each other.
pub fn run_comparison(config: &ComparisonConfig, benchmark: &GridSolution) -> Result<ComparisonReport> {
    let game = game_by_id(&config.benchmark.game)?;
    if config.thresholds.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
        return domain("thresholds must lie in (0, 1]");
    }
    let probes = error_probes(&game, game.domain(), &config.probe_shape);
    let mut curves = Vec::new();
    for method in Method::ALL {
        let mut rows = Vec::new();
        for trial in 0..config.trials(method) {
            let trial_rows = match method {
                Method::Multigrid => multigrid_trial(config, &game, benchmark, &probes, trial)?,
                Method::Igame => sampling_trial(config, &config.igame, &game, benchmark, &probes, trial)?,
                Method::Igamestar => sampling_trial(config, &config.igamestar, &game, benchmark, &probes, trial)?,
            };
            rows.extend(trial_rows);
        }
        let stat = aggregate(&rows);
        curves.push(ErrorCurve { method, rows, stat });
    }
    let mut crossings = Vec::new();
    let mut table = Vec::new();
    for curve in &curves {
        let trials = config.trials(curve.method);
        for &threshold in &config.thresholds {
            let mut hit_times = Vec::new();
            let mut bound_sum = 0.0;
            for trial in 0..trials {
                let mine: Vec<&CurvePoint> = curve.rows.iter().filter(|r| r.trial == trial).collect();
                match mine.iter().find(|r| r.error <= threshold) {
                    Some(r) => {
                        crossings.push(Crossing { method: curve.method, trial, threshold, n: r.n, wall_ms: r.wall_ms });
                        hit_times.push(r.wall_ms);
                        bound_sum += r.wall_ms;
                    }
                    None => bound_sum += mine.last().map_or(0.0, |r| r.wall_ms),
                }
            }
            let (mean_ms, std_ms) = match mean_std(&hit_times) {
                Some((m, s)) => (Some(m), Some(s)),
                None => (None, None),
            };
            table.push(ThresholdRow {
                method: curve.method,
                threshold,
                trials,
                hits: hit_times.len(),
                mean_ms,
                std_ms,
                lower_bound_ms: if trials == 0 { 0.0 } else { bound_sum / trials as f64 },
            });
        }
    }
    Ok(ComparisonReport { curves, crossings, table })
}

fn multigrid_trial(
    config: &ComparisonConfig,
    game: &GameDef,
    benchmark: &GridSolution,
    probes: &[f64],
    trial: usize,
) -> Result<Vec<CurvePoint>> {
    let spec = &config.multigrid;
    let pools = config.benchmark.pools(game);
    let mut rows = Vec::new();
    solve_multigrid_with(game, &spec.levels, spec.tol, &pools, &spec.options, |sol, wall_ms| {
        let e = error_against_benchmark(sol, benchmark, probes, game.dim());
        rows.push(CurvePoint { trial, seed: 0, n: sol.values.len(), wall_ms, error: e.mean, sup_error: e.sup });
        match config.stop_error {
            Some(stop) if e.mean <= stop => ControlFlow::Break(()),
            _ => ControlFlow::Continue(()),
        }
    })?;
    Ok(rows)
}

fn sampling_trial(
    config: &ComparisonConfig,
    solver: &SolverConfig,
    game: &GameDef,
    benchmark: &GridSolution,
    probes: &[f64],
    trial: usize,
) -> Result<Vec<CurvePoint>> {
    let seed = solver.seed.wrapping_add(trial as u64);
    let cfg = SolverConfig { seed, game: config.benchmark.game.clone(), ..solver.clone() };
    let mut rows = Vec::new();
    let mut failure = None;
    run_with(game, &cfg, |s, wall_ms| {
        let field = match SampleField::from_solver(s) {
            Ok(f) => f,
            Err(e) => {
                failure = Some(e);
                return ControlFlow::Break(());
            }
        };
        let e = error_against_benchmark(&field, benchmark, probes, game.dim());
        rows.push(CurvePoint { trial, seed, n: s.len(), wall_ms, error: e.mean, sup_error: e.sup });
        match config.stop_error {
            Some(stop) if e.mean <= stop => ControlFlow::Break(()),
            _ => ControlFlow::Continue(()),
        }
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(rows),
    }
}

fn mean_std(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    Some((mean, var.sqrt()))
}

/// Groups rows by checkpoint position within their trial.
fn aggregate(rows: &[CurvePoint]) -> Vec<CurveStat> {
    let mut by_pos: Vec<Vec<&CurvePoint>> = Vec::new();
    let mut last_trial = None;
    let mut pos = 0;
    for r in rows {
        if last_trial != Some(r.trial) {
            last_trial = Some(r.trial);
            pos = 0;
        }
        if by_pos.len() <= pos {
            by_pos.push(Vec::new());
        }
        by_pos[pos].push(r);
        pos += 1;
    }
    by_pos
        .iter()
        .enumerate()
        .map(|(k, group)| {
            let (wm, ws) = mean_std(&group.iter().map(|r| r.wall_ms).collect::<Vec<_>>()).expect("nonempty");
            let (em, es) = mean_std(&group.iter().map(|r| r.error).collect::<Vec<_>>()).expect("nonempty");
            CurveStat {
                checkpoint: k,
                n: group[0].n,
                trials: group.len(),
                wall_ms_mean: wm,
                wall_ms_std: ws,
                error_mean: em,
                error_std: es,
            }
        })
        .collect()
}

/// Whether `a` reaches `threshold` strictly sooner than `b` on average. A
/// censored `b` counts as at least its lower bound; a censored `a` never wins.
pub fn faster(report: &ComparisonReport, a: Method, b: Method, threshold: f64) -> bool {
    let (Some(ra), Some(rb)) = (report.row(a, threshold), report.row(b, threshold)) else { return false };
    if !ra.complete() {
        return false;
    }
    let ta = ra.mean_ms.expect("complete rows have a mean");
    if rb.complete() {
        ta < rb.mean_ms.expect("complete rows have a mean")
    } else {
        ta < rb.lower_bound_ms
    }
}

impl ComparisonReport {
    pub fn row(&self, method: Method, threshold: f64) -> Option<&ThresholdRow> {
        self.table.iter().find(|r| r.method == method && r.threshold == threshold)
    }

    pub fn curve(&self, method: Method) -> Option<&ErrorCurve> {
        self.curves.iter().find(|c| c.method == method)
    }

    /// `curves.csv` (trials × checkpoints rows per method), `curve_stats.csv`,
    /// `crossings.csv` (one row per crossed threshold) and `table.csv`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let open = |name: &str| -> Result<csv::Writer<BufWriter<File>>> {
            Ok(csv::Writer::from_writer(BufWriter::new(File::create(dir.join(name))?)))
        };
        let mut w = open("curves.csv")?;
        w.write_record(["method", "trial", "seed", "n", "wall_ms", "mean_error", "sup_error"])?;
        for c in &self.curves {
            for r in &c.rows {
                w.write_record([
                    c.method.as_str().to_string(),
                    r.trial.to_string(),
                    r.seed.to_string(),
                    r.n.to_string(),
                    format!("{:.3}", r.wall_ms),
                    format!("{:?}", r.error),
                    format!("{:?}", r.sup_error),
                ])?;
            }
        }
        w.flush()?;

        let mut w = open("curve_stats.csv")?;
        w.write_record([
            "method",
            "checkpoint",
            "n",
            "trials",
            "wall_ms_mean",
            "wall_ms_std",
            "error_mean",
            "error_std",
        ])?;
        for c in &self.curves {
            for s in &c.stat {
                w.write_record([
                    c.method.as_str().to_string(),
                    s.checkpoint.to_string(),
                    s.n.to_string(),
                    s.trials.to_string(),
                    format!("{:.3}", s.wall_ms_mean),
                    format!("{:.3}", s.wall_ms_std),
                    format!("{:?}", s.error_mean),
                    format!("{:?}", s.error_std),
                ])?;
            }
        }
        w.flush()?;

        let mut w = open("crossings.csv")?;
        w.write_record(["method", "trial", "threshold", "n", "wall_ms"])?;
        for x in &self.crossings {
            w.write_record([
                x.method.as_str().to_string(),
                x.trial.to_string(),
                format!("{:?}", x.threshold),
                x.n.to_string(),
                format!("{:.3}", x.wall_ms),
            ])?;
        }
        w.flush()?;

        let mut w = open("table.csv")?;
        w.write_record(["method", "threshold", "trials", "hits", "censored", "mean_ms", "std_ms", "lower_bound_ms"])?;
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.3}"));
        for r in &self.table {
            w.write_record([
                r.method.as_str().to_string(),
                format!("{:?}", r.threshold),
                r.trials.to_string(),
                r.hits.to_string(),
                r.censored().to_string(),
                opt(r.mean_ms),
                opt(r.std_ms),
                format!("{:.3}", r.lower_bound_ms),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(trial: usize, n: usize, wall_ms: f64, error: f64) -> CurvePoint {
        CurvePoint { trial, seed: trial as u64, n, wall_ms, error, sup_error: error }
    }

    #[test]
    fn aggregation_by_checkpoint() {
        let rows = [point(0, 10, 1.0, 0.5), point(0, 20, 2.0, 0.3), point(1, 10, 3.0, 0.7), point(1, 20, 4.0, 0.1)];
        let stat = aggregate(&rows);
        assert_eq!(stat.len(), 2);
        assert_eq!(stat[0].trials, 2);
        assert!((stat[0].wall_ms_mean - 2.0).abs() < 1e-12);
        assert!((stat[1].error_mean - 0.2).abs() < 1e-12);
        assert!((stat[0].error_std - 0.02f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn mean_and_sample_std() {
        let (m, s) = mean_std(&[1.0, 3.0]).unwrap();
        assert_eq!(m, 2.0);
        assert!((s - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(mean_std(&[5.0]), Some((5.0, 0.0)));
        assert_eq!(mean_std(&[]), None);
    }

    fn row(method: Method, hits: usize, trials: usize, mean: Option<f64>, lower: f64) -> ThresholdRow {
        ThresholdRow { method, threshold: 0.1, trials, hits, mean_ms: mean, std_ms: mean.map(|_| 0.0), lower_bound_ms: lower }
    }

    #[test]
    fn censored_rows_bound_from_below() {
        let report = ComparisonReport {
            curves: vec![],
            crossings: vec![],
            table: vec![
                row(Method::Igamestar, 3, 3, Some(100.0), 100.0),
                row(Method::Igame, 0, 3, None, 500.0),
                row(Method::Multigrid, 3, 3, Some(50.0), 50.0),
            ],
        };
        assert!(faster(&report, Method::Igamestar, Method::Igame, 0.1));
        assert!(!faster(&report, Method::Igame, Method::Multigrid, 0.1));
        assert!(faster(&report, Method::Multigrid, Method::Igamestar, 0.1));
        assert!(!faster(&report, Method::Igamestar, Method::Igame, 0.08));
    }

    #[test]
    fn small_comparison_has_consistent_shapes() {
        let benchmark_ref = GridReference { shape: vec![40, 40], tol: 1e-4, angel_pool: 3, demon_pool: 4, ..GridReference::default() };
        let benchmark = benchmark_ref.solve().unwrap();
        let small = |mut s: SolverConfig| {
            s.kernel.pools = PoolMode::Grid { angel: 3, demon: 4 };
            s.max_samples = 120;
            s.max_seconds = None;
            s.checkpoints = Cadence::Every(40);
            s
        };
        let config = ComparisonConfig {
            benchmark: benchmark_ref,
            probe_shape: vec![20, 20],
            multigrid_trials: 1,
            igame_trials: 2,
            igamestar_trials: 2,
            multigrid: MultigridSpec { levels: vec![vec![10, 10], vec![20, 20]], tol: 1e-4, ..MultigridSpec::default() },
            igame: small(ComparisonConfig::default().igame),
            igamestar: small(ComparisonConfig::default().igamestar),
            stop_error: None,
            ..ComparisonConfig::default()
        };
        let report = run_comparison(&config, &benchmark).unwrap();
        assert_eq!(report.curve(Method::Multigrid).unwrap().rows.len(), 2);
        for m in [Method::Igame, Method::Igamestar] {
            let c = report.curve(m).unwrap();
            assert_eq!(c.rows.len(), 2 * 3, "trials x checkpoints");
            assert_eq!(c.stat.len(), 3);
            for t in 0..2 {
                let walls: Vec<f64> = c.rows.iter().filter(|r| r.trial == t).map(|r| r.wall_ms).collect();
                assert!(walls.windows(2).all(|w| w[1] > w[0]));
            }
            assert!(c.rows.iter().all(|r| (0.0..=1.0).contains(&r.error)));
        }
        assert_eq!(report.table.len(), 3 * 4);
        for r in &report.table {
            let crossed = report.crossings.iter().filter(|x| x.method == r.method && x.threshold == r.threshold).count();
            assert_eq!(crossed, r.hits);
        }
        // Thresholds are nested: a deeper one is never crossed earlier.
        for x in &report.crossings {
            for y in &report.crossings {
                if x.method == y.method && x.trial == y.trial && y.threshold < x.threshold {
                    assert!(y.wall_ms >= x.wall_ms);
                }
            }
        }
        let dir = tempfile::tempdir().unwrap();
        report.write_dir(dir.path()).unwrap();
        let curves = std::fs::read_to_string(dir.path().join("curves.csv")).unwrap();
        assert_eq!(curves.lines().count(), 1 + 2 + 6 + 6);
    }
}
