//! Solver comparisons and parameter sweeps with CSV output.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dp::{dp_solve_with, dp_state_count_check, DpOptions};
use crate::error::{Error, Result};
use crate::exhaustive::{exhaustive_solve, EnumOptions};
use crate::greedy::{greedy_solve_with, GreedyOptions};
use crate::model::{check_feasible, objective, Scenario, SolveResult};
use crate::scenario_gen::{generate, GenConfig};

/// Relative tolerance of every cross-check.
pub const CHECK_TOL: f64 = 1e-9;

/// A solver together with its options, written as a tag such as `dp`,
/// `dp+force-d2d-mode`, `greedy+restrict-sharing` or
/// `exhaustive+restrict-sharing+force-d2d-mode`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgoSpec {
    Dp(DpOptions),
    Greedy(GreedyOptions),
    Exhaustive(EnumOptions),
}

impl AlgoSpec {
    pub fn tag(&self) -> String {
        let mut tag = String::new();
        match self {
            AlgoSpec::Dp(o) => {
                tag.push_str("dp");
                if o.force_d2d_mode_only {
                    tag.push_str("+force-d2d-mode");
                }
                if o.per_hop_qos {
                    tag.push_str("+per-hop-qos");
                }
            }
            AlgoSpec::Greedy(o) => {
                tag.push_str("greedy");
                if o.restrict_sharing {
                    tag.push_str("+restrict-sharing");
                }
            }
            AlgoSpec::Exhaustive(o) => {
                tag.push_str("exhaustive");
                if o.restrict_one_d2d_per_channel {
                    tag.push_str("+restrict-sharing");
                }
                if o.force_d2d_mode_only {
                    tag.push_str("+force-d2d-mode");
                }
            }
        }
        tag
    }

    /// Sets the enumeration budget (exhaustive) or memo budget (dp).
    pub fn with_budget(mut self, budget: u64) -> Self {
        match &mut self {
            AlgoSpec::Dp(o) => o.state_budget = usize::try_from(budget).unwrap_or(usize::MAX),
            AlgoSpec::Exhaustive(o) => o.budget = budget,
            AlgoSpec::Greedy(_) => {}
        }
        self
    }

    pub fn run(&self, scenario: &Scenario) -> Result<SolveResult> {
        match self {
            AlgoSpec::Dp(o) => dp_solve_with(scenario, o),
            AlgoSpec::Greedy(o) => greedy_solve_with(scenario, o),
            AlgoSpec::Exhaustive(o) => exhaustive_solve(scenario, o),
        }
    }
}

impl fmt::Display for AlgoSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

impl FromStr for AlgoSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split('+');
        let base = parts.next().unwrap_or_default();
        let mut spec = match base {
            "dp" => AlgoSpec::Dp(DpOptions::default()),
            "greedy" => AlgoSpec::Greedy(GreedyOptions::default()),
            "exhaustive" => AlgoSpec::Exhaustive(EnumOptions::default()),
            other => return Err(Error::InvalidConfig(format!("unknown algorithm '{other}'"))),
        };
        for flag in parts {
            match (&mut spec, flag) {
                (AlgoSpec::Dp(o), "force-d2d-mode") => o.force_d2d_mode_only = true,
                (AlgoSpec::Dp(o), "per-hop-qos") => o.per_hop_qos = true,
                (AlgoSpec::Greedy(o), "restrict-sharing") => o.restrict_sharing = true,
                (AlgoSpec::Exhaustive(o), "restrict-sharing") => o.restrict_one_d2d_per_channel = true,
                (AlgoSpec::Exhaustive(o), "force-d2d-mode") => o.force_d2d_mode_only = true,
                _ => return Err(Error::InvalidConfig(format!("option '{flag}' does not apply to '{base}'"))),
            }
        }
        Ok(spec)
    }
}

/// A sweep's algorithm entry: either a bare tag or a tag with a budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgoEntry {
    Tag(String),
    WithBudget { algo: String, budget: u64 },
}

impl AlgoEntry {
    pub fn spec(&self) -> Result<AlgoSpec> {
        match self {
            AlgoEntry::Tag(tag) => tag.parse(),
            AlgoEntry::WithBudget { algo, budget } => Ok(algo.parse::<AlgoSpec>()?.with_budget(*budget)),
        }
    }
}

/// One output line: one algorithm on one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub swept_param: String,
    pub swept_value: Option<f64>,
    pub seed: u64,
    pub algo: String,
    pub objective: Option<f64>,
    pub feasible: bool,
    pub n_cell_mode: usize,
    pub n_d2d_mode: usize,
    pub n_inactive: usize,
    pub states_visited: u64,
    pub wall_time_ms: f64,
    /// Solver error, if the run failed. Not written to CSV.
    #[serde(skip)]
    pub error: Option<String>,
}

impl ResultRow {
    fn from_result(result: &SolveResult) -> Self {
        let (cell, d2d, inactive) = result.assignment.mode_counts();
        ResultRow {
            swept_param: String::new(),
            swept_value: None,
            seed: 0,
            algo: result.algo.clone(),
            objective: result.objective,
            feasible: result.feasible,
            n_cell_mode: cell,
            n_d2d_mode: d2d,
            n_inactive: inactive,
            states_visited: result.stats.states_visited,
            wall_time_ms: result.stats.wall_time_ms,
            error: None,
        }
    }

    fn failed(algo: &str, error: String) -> Self {
        ResultRow {
            swept_param: String::new(),
            swept_value: None,
            seed: 0,
            algo: algo.to_string(),
            objective: None,
            feasible: false,
            n_cell_mode: 0,
            n_d2d_mode: 0,
            n_inactive: 0,
            states_visited: 0,
            wall_time_ms: 0.0,
            error: Some(error),
        }
    }

    /// The row with the wall time cleared, for determinism comparisons.
    pub fn without_time(&self) -> Self {
        ResultRow { wall_time_ms: 0.0, ..self.clone() }
    }
}

/// A cross-check that did not hold.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantViolation {
    pub seed: Option<u64>,
    pub swept_value: Option<f64>,
    pub rule: String,
    pub detail: String,
}

impl fmt::Display for InvariantViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(v) = self.swept_value {
            write!(f, "[value {v}] ")?;
        }
        if let Some(s) = self.seed {
            write!(f, "[seed {s}] ")?;
        }
        write!(f, "{}: {}", self.rule, self.detail)
    }
}

#[derive(Clone, Debug)]
pub struct Comparison {
    pub rows: Vec<ResultRow>,
    pub results: Vec<Option<SolveResult>>,
    pub violations: Vec<InvariantViolation>,
}

fn within(a: f64, b: f64) -> bool {
    (a - b).abs() <= CHECK_TOL * a.abs().max(b.abs()).max(1.0)
}

fn at_least(a: f64, b: f64) -> bool {
    a >= b - CHECK_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Runs every algorithm on `scenario` and cross-checks the results.
/// Solver errors become failed rows; the other algorithms still run.
pub fn run_compare(scenario: &Scenario, algos: &[AlgoSpec]) -> Comparison {
    let mut rows = Vec::with_capacity(algos.len());
    let mut results = Vec::with_capacity(algos.len());
    let mut violations = Vec::new();
    let mut violate = |rule: &str, detail: String| {
        violations.push(InvariantViolation { seed: None, swept_value: None, rule: rule.to_string(), detail })
    };

    for algo in algos {
        match algo.run(scenario) {
            Ok(result) => {
                rows.push(ResultRow::from_result(&result));
                results.push(Some(result));
            }
            Err(e) => {
                rows.push(ResultRow::failed(&algo.tag(), e.to_string()));
                results.push(None);
            }
        }
    }

    for result in results.iter().flatten() {
        let ok = check_feasible(scenario, &result.assignment).is_ok();
        if result.feasible && !ok {
            violate("revalidation", format!("{} reports a feasible assignment the checker rejects", result.algo));
        }
        if let Some(v) = result.objective {
            match objective(scenario, &result.assignment) {
                Ok(w) if within(v, w) => {}
                other => violate("revalidation", format!("{} reports {v}, model gives {other:?}", result.algo)),
            }
        }
        if result.algo.starts_with("dp") && !dp_state_count_check(scenario, &result.stats) {
            violate("state bound", format!("{} visited {} states", result.algo, result.stats.states_visited));
        }
        if result.algo.starts_with("greedy") {
            if let (Some(v), Some(km)) = (result.objective, result.stats.matching_total) {
                if !at_least(v, km) {
                    violate("greedy >= matching", format!("{} scores {v} below the matching total {km}", result.algo));
                }
            }
        }
    }

    let by_tag: BTreeMap<&str, &SolveResult> = results.iter().flatten().map(|r| (r.algo.as_str(), r)).collect();
    let pair = |a: &str, b: &str| Some((*by_tag.get(a)?, *by_tag.get(b)?));

    let equal = [("exhaustive", "dp"), ("exhaustive+force-d2d-mode", "dp+force-d2d-mode"), ("dp", "dp+per-hop-qos")];
    for (a, b) in equal {
        if let Some((ra, rb)) = pair(a, b) {
            let same = match (ra.objective, rb.objective) {
                (Some(x), Some(y)) => within(x, y),
                (None, None) => true,
                _ => false,
            };
            if !same {
                violate(&format!("{a} == {b}"), format!("{:?} vs {:?}", ra.objective, rb.objective));
            }
        }
    }

    let dominance = [
        ("dp", "greedy"),
        ("dp", "greedy+restrict-sharing"),
        ("dp", "dp+force-d2d-mode"),
        ("greedy", "greedy+restrict-sharing"),
        ("exhaustive", "greedy"),
        ("exhaustive", "exhaustive+restrict-sharing"),
        ("exhaustive", "exhaustive+force-d2d-mode"),
        ("exhaustive+restrict-sharing", "exhaustive+restrict-sharing+force-d2d-mode"),
        ("exhaustive+force-d2d-mode", "exhaustive+restrict-sharing+force-d2d-mode"),
    ];
    for (hi, lo) in dominance {
        if let Some((rh, rl)) = pair(hi, lo) {
            let holds = match (rh.objective, rl.objective) {
                (_, None) => true,
                (None, Some(_)) => false,
                (Some(x), Some(y)) => at_least(x, y),
            };
            if !holds {
                violate(&format!("{hi} >= {lo}"), format!("{:?} vs {:?}", rh.objective, rl.objective));
            }
        }
    }

    Comparison { rows, results, violations }
}

/// Generator field varied by a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweptParam {
    ND,
    D2dPairDistanceMaxM,
    D2dClusterRadiusM,
}

impl SweptParam {
    pub fn name(self) -> &'static str {
        match self {
            SweptParam::ND => "n_d",
            SweptParam::D2dPairDistanceMaxM => "d2d_pair_distance_max_m",
            SweptParam::D2dClusterRadiusM => "d2d_cluster_radius_m",
        }
    }

    pub fn apply(self, cfg: &mut GenConfig, value: f64) -> Result<()> {
        match self {
            SweptParam::ND => {
                if !(value >= 0.0 && value.fract() == 0.0 && value <= 64.0) {
                    return Err(Error::InvalidConfig(format!("n_d must be a small non-negative integer, got {value}")));
                }
                cfg.counts.n_d = value as usize;
            }
            SweptParam::D2dPairDistanceMaxM => cfg.d2d_pair_distance_max_m = value,
            SweptParam::D2dClusterRadiusM => cfg.d2d_cluster_radius_m = value,
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub base: GenConfig,
    pub param: SweptParam,
    pub values: Vec<f64>,
    pub seeds: usize,
    pub algos: Vec<AlgoEntry>,
    pub output: PathBuf,
}

impl SweepSpec {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let spec: SweepSpec = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() || self.seeds == 0 || self.algos.is_empty() {
            return Err(Error::InvalidConfig("a sweep needs at least one value, one seed and one algorithm".into()));
        }
        self.algo_specs()?;
        for &v in &self.values {
            self.point_config(v)?;
        }
        Ok(())
    }

    pub fn algo_specs(&self) -> Result<Vec<AlgoSpec>> {
        self.algos.iter().map(AlgoEntry::spec).collect()
    }

    /// Generator config of one sweep point, before the seed is set.
    pub fn point_config(&self, value: f64) -> Result<GenConfig> {
        let mut cfg = self.base.clone();
        self.param.apply(&mut cfg, value)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Scenario seed of the `index`-th seed. It depends only on the master
    /// seed and the index, so every sweep point sees the same random draws.
    pub fn scenario_seed(&self, index: usize) -> u64 {
        let mut h = Sha256::new();
        h.update(b"d2d-sweep-seed");
        h.update(self.base.master_seed.to_le_bytes());
        h.update((index as u64).to_le_bytes());
        let digest = h.finalize();
        u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
    }

    /// Path of the aggregate CSV written next to `output`.
    pub fn summary_path(&self) -> PathBuf {
        let stem = self.output.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
        self.output.with_file_name(format!("{stem}_summary.csv"))
    }
}

/// Mean and spread of one algorithm at one sweep point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub swept_param: String,
    pub swept_value: f64,
    pub algo: String,
    pub runs: usize,
    pub feasible_runs: usize,
    pub failed_runs: usize,
    pub objective_mean: Option<f64>,
    pub objective_std: Option<f64>,
    pub states_visited_mean: f64,
    pub wall_time_ms_mean: f64,
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub rows: Vec<ResultRow>,
    pub summary: Vec<SummaryRow>,
    pub violations: Vec<InvariantViolation>,
}

fn mean_std(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let std = if xs.len() < 2 { 0.0 } else { (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() };
    (Some(mean), Some(std))
}

pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut groups: Vec<SummaryRow> = Vec::new();
    let mut objectives: Vec<Vec<f64>> = Vec::new();
    for row in rows {
        let value = row.swept_value.unwrap_or(f64::NAN);
        let pos = groups.iter().position(|g| {
            g.swept_value.total_cmp(&value).is_eq() && g.algo == row.algo && g.swept_param == row.swept_param
        });
        let pos = pos.unwrap_or_else(|| {
            groups.push(SummaryRow {
                swept_param: row.swept_param.clone(),
                swept_value: value,
                algo: row.algo.clone(),
                runs: 0,
                feasible_runs: 0,
                failed_runs: 0,
                objective_mean: None,
                objective_std: None,
                states_visited_mean: 0.0,
                wall_time_ms_mean: 0.0,
            });
            objectives.push(Vec::new());
            groups.len() - 1
        });
        let g = &mut groups[pos];
        g.runs += 1;
        g.failed_runs += usize::from(row.error.is_some());
        g.states_visited_mean += row.states_visited as f64;
        g.wall_time_ms_mean += row.wall_time_ms;
        if let Some(v) = row.objective {
            g.feasible_runs += 1;
            objectives[pos].push(v);
        }
    }
    for (g, objs) in groups.iter_mut().zip(&objectives) {
        g.states_visited_mean /= g.runs as f64;
        g.wall_time_ms_mean /= g.runs as f64;
        (g.objective_mean, g.objective_std) = mean_std(objs);
    }
    groups
}

/// Runs every (point, seed) of the sweep on `workers` threads. Rows come
/// back in (point, seed, algorithm) order whatever the completion order.
pub fn run_sweep_rows(spec: &SweepSpec, workers: usize) -> Result<SweepOutcome> {
    spec.validate()?;
    let algos = spec.algo_specs()?;
    let jobs: Vec<(f64, u64)> = spec
        .values
        .iter()
        .flat_map(|&v| (0..spec.seeds).map(move |i| (v, i)))
        .map(|(v, i)| (v, spec.scenario_seed(i)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    let per_job: Vec<Result<Comparison>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(value, seed)| {
                let mut cfg = spec.point_config(value)?;
                cfg.master_seed = seed;
                let scenario = generate(&cfg)?;
                let mut cmp = run_compare(&scenario, &algos);
                for row in &mut cmp.rows {
                    row.swept_param = spec.param.name().to_string();
                    row.swept_value = Some(value);
                    row.seed = seed;
                }
                for v in &mut cmp.violations {
                    v.seed = Some(seed);
                    v.swept_value = Some(value);
                }
                Ok(cmp)
            })
            .collect()
    });
    let mut rows = Vec::with_capacity(jobs.len() * algos.len());
    let mut violations = Vec::new();
    for cmp in per_job {
        let cmp = cmp?;
        rows.extend(cmp.rows);
        violations.extend(cmp.violations);
    }
    let summary = summarize(&rows);
    Ok(SweepOutcome { rows, summary, violations })
}

/// Runs the sweep and writes the row CSV to `spec.output` and the summary
/// CSV beside it.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<SweepOutcome> {
    let outcome = run_sweep_rows(spec, workers)?;
    write_csv_atomic(&spec.output, &outcome.rows)?;
    write_csv_atomic(&spec.summary_path(), &outcome.summary)?;
    Ok(outcome)
}

pub fn rows_to_csv<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Writes `rows` through a temporary file in the target directory and
/// renames it into place.
pub fn write_csv_atomic<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let bytes = if rows.is_empty() { Vec::new() } else { rows_to_csv(rows)? };
    write_atomic(path, &bytes)
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}
