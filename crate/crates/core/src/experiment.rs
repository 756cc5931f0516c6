//! Batch experiments: every (method, seed) pair on one instance source,
//! with reports as CSV or JSON and stooge-set comparisons.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discrete::{jaccard, round_to_stooges};
use crate::error::{Error, Result};
use crate::graph::{equilibrium, median, Instance};
use crate::instances::{generate, load_instance, GeneratorSpec, InstanceFormat, OpinionDist, Topology};
use crate::intervention::{InterventionResult, TracePoint};
use crate::method::{min_budget_to_flip, run_method, Method, MethodParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceSource {
    /// A fresh synthetic instance per seed.
    Generated {
        topology: Topology,
        #[serde(default)]
        opinions: OpinionDist,
    },
    /// A canonical JSON instance file.
    File { path: PathBuf },
    /// An edge list with a separate opinion file.
    EdgeList {
        edges: PathBuf,
        opinions: PathBuf,
        #[serde(default)]
        directed: bool,
    },
}

impl InstanceSource {
    pub fn load(&self, seed: u64) -> Result<Instance> {
        match self {
            InstanceSource::Generated { topology, opinions } => generate(&GeneratorSpec {
                topology: topology.clone(),
                opinions: opinions.clone(),
                seed,
            }),
            InstanceSource::File { path } => load_instance(path, &InstanceFormat::Canonical),
            InstanceSource::EdgeList {
                edges,
                opinions,
                directed,
            } => load_instance(
                edges,
                &InstanceFormat::EdgeListPair {
                    opinions: opinions.clone(),
                    directed: *directed,
                },
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BudgetPlan {
    /// Run each method once per listed budget (in stooges).
    Fixed { budgets: Vec<f64> },
    /// Search for the least budget that flips the median; `max` defaults to n.
    Flip {
        #[serde(default)]
        max: Option<f64>,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputPaths {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Label written into every record.
    pub name: String,
    pub instance: InstanceSource,
    pub methods: Vec<Method>,
    #[serde(default = "default_theta")]
    pub theta: f64,
    pub budget: BudgetPlan,
    /// Shared hyperparameters.
    #[serde(default)]
    pub params: MethodParams,
    /// Per-method replacements for `params`, keyed by method name.
    #[serde(default)]
    pub method_params: BTreeMap<Method, MethodParams>,
    /// Runs use seeds `seed, seed + 1, ..` up to `repetitions` of them.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    /// Upper bound on concurrent runs; all cores when absent.
    #[serde(default)]
    pub max_workers: Option<usize>,
    #[serde(default)]
    pub output: OutputPaths,
}

fn default_theta() -> f64 {
    0.5
}
fn default_repetitions() -> usize {
    1
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::invalid("an experiment needs at least one method"));
        }
        if self.repetitions == 0 {
            return Err(Error::invalid("repetitions must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::OutOfUnitRange {
                what: "theta".into(),
                value: self.theta,
            });
        }
        if self.max_workers == Some(0) {
            return Err(Error::invalid("max_workers must be positive"));
        }
        match &self.budget {
            BudgetPlan::Fixed { budgets } => {
                if budgets.is_empty() || budgets.iter().any(|b| !(*b >= 0.0) || !b.is_finite()) {
                    return Err(Error::invalid("budgets must be a nonempty list of non-negative numbers"));
                }
            }
            BudgetPlan::Flip { max: Some(m) } if !(*m >= 0.0) => {
                return Err(Error::invalid("maximum budget must be non-negative"));
            }
            BudgetPlan::Flip { .. } => {}
        }
        Ok(())
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.repetitions as u64).map(|i| self.seed + i).collect()
    }

    fn params_for(&self, method: Method) -> MethodParams {
        self.method_params.get(&method).unwrap_or(&self.params).clone()
    }
}

/// One (method, seed, budget) run. Failed runs keep `error` and leave the
/// numeric outcome empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub method: Method,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub theta: f64,
    /// The fixed budget, or the least flipping budget found (in stooges).
    pub budget: Option<f64>,
    /// `100 * budget / n`.
    pub budget_percent: Option<f64>,
    pub l1_used: Option<f64>,
    pub l0_used: Option<usize>,
    pub flipped: bool,
    pub final_median: Option<f64>,
    pub runtime_ms: f64,
    pub stooges: Vec<usize>,
    #[serde(default)]
    pub objective_trace: Vec<TracePoint>,
    pub error: Option<String>,
}

impl RunRecord {
    pub fn succeeded(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

impl Summary {
    /// Sample mean and standard deviation; `None` on no values.
    pub fn of(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let count = values.len();
        let mean = values.iter().sum::<f64>() / count as f64;
        let std = if count > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(Summary { mean, std, count })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodAggregate {
    pub method: Method,
    pub runs: usize,
    pub failures: usize,
    pub flipped: usize,
    /// Over successful runs that report a budget.
    pub budget: Option<Summary>,
    pub budget_percent: Option<Summary>,
    pub final_median: Option<Summary>,
    pub runtime_ms: Option<Summary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub records: Vec<RunRecord>,
    pub aggregates: Vec<MethodAggregate>,
}

impl ExperimentReport {
    pub fn from_records(records: Vec<RunRecord>) -> Self {
        let mut methods: Vec<Method> = records.iter().map(|r| r.method).collect();
        methods.sort();
        methods.dedup();
        let aggregates = methods
            .into_iter()
            .map(|method| {
                let rows: Vec<&RunRecord> = records.iter().filter(|r| r.method == method).collect();
                let ok: Vec<&RunRecord> = rows.iter().copied().filter(|r| r.succeeded()).collect();
                let pick = |f: &dyn Fn(&RunRecord) -> Option<f64>| {
                    Summary::of(&ok.iter().filter_map(|r| f(r)).collect::<Vec<_>>())
                };
                MethodAggregate {
                    method,
                    runs: rows.len(),
                    failures: rows.len() - ok.len(),
                    flipped: ok.iter().filter(|r| r.flipped).count(),
                    budget: pick(&|r| r.budget),
                    budget_percent: pick(&|r| r.budget_percent),
                    final_median: pick(&|r| r.final_median),
                    runtime_ms: pick(&|r| Some(r.runtime_ms)),
                }
            })
            .collect();
        ExperimentReport { records, aggregates }
    }

    pub fn aggregate(&self, method: Method) -> Option<&MethodAggregate> {
        self.aggregates.iter().find(|a| a.method == method)
    }
}

struct Job {
    method: Method,
    seed: u64,
    budget: Option<f64>,
}

fn stooge_set(method: Method, instance: &Instance, result: &InterventionResult, budget: f64) -> Result<Vec<usize>> {
    if method.is_continuous() {
        let moved = result
            .alpha_final
            .iter()
            .zip(instance.alpha())
            .filter(|(a, b)| a != b)
            .count();
        let k = (budget.floor() as usize).min(moved);
        round_to_stooges(&result.alpha_final, instance.alpha(), k)
    } else {
        Ok(result.stooges.iter().map(|&(u, _)| u).collect())
    }
}

fn run_job(config: &ExperimentConfig, job: &Job, instance: &Result<Instance>) -> RunRecord {
    let mut record = RunRecord {
        instance: config.name.clone(),
        method: job.method,
        seed: job.seed,
        n: 0,
        m: 0,
        theta: config.theta,
        budget: job.budget,
        budget_percent: None,
        l1_used: None,
        l0_used: None,
        flipped: false,
        final_median: None,
        runtime_ms: 0.0,
        stooges: Vec::new(),
        objective_trace: Vec::new(),
        error: None,
    };
    let instance = match instance {
        Ok(i) => i,
        Err(e) => {
            record.error = Some(format!("instance: {e}"));
            return record;
        }
    };
    let n = instance.node_count();
    record.n = n;
    record.m = instance.network().edge_count();
    let params = MethodParams {
        seed: job.seed,
        ..config.params_for(job.method)
    };

    let start = Instant::now();
    let outcome = match job.budget {
        Some(b) => run_method(instance, job.method, b, config.theta, &params).map(|r| (Some(b), Some(r))),
        None => {
            let max = match config.budget {
                BudgetPlan::Flip { max: Some(m) } => m,
                _ => n as f64,
            };
            min_budget_to_flip(instance, job.method, config.theta, max, &params).map(|f| (f.budget, f.result))
        }
    };
    record.runtime_ms = start.elapsed().as_secs_f64() * 1e3;

    let filled = outcome.and_then(|(budget, result)| {
        record.budget = budget;
        record.budget_percent = budget.map(|b| 100.0 * b / n as f64);
        match result {
            Some(r) => {
                record.stooges = stooge_set(job.method, instance, &r, budget.unwrap_or(0.0))?;
                record.l1_used = Some(r.l1_budget_used);
                record.l0_used = Some(r.l0_budget_used);
                record.flipped = r.flipped;
                record.final_median = Some(r.final_median);
                record.objective_trace = r.objective_trace;
            }
            None => {
                // Either already flipped at zero budget or never flipped.
                let med = median(&equilibrium(instance)?.x_star)?;
                record.flipped = budget.is_some();
                record.l1_used = Some(0.0);
                record.l0_used = Some(0);
                record.final_median = Some(med);
            }
        }
        Ok(())
    });
    if let Err(e) = filled {
        log::warn!("{} seed {} failed: {e}", job.method, job.seed);
        record.error = Some(e.to_string());
        record.flipped = false;
    }
    record
}

/// Runs every method on every seed. Failures become report rows; they never
/// stop sibling runs. Records are ordered by method, seed, then budget.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let seeds = config.seeds();
    let budgets: Vec<Option<f64>> = match &config.budget {
        BudgetPlan::Fixed { budgets } => budgets.iter().map(|&b| Some(b)).collect(),
        BudgetPlan::Flip { .. } => vec![None],
    };
    let mut methods = config.methods.clone();
    methods.sort();
    methods.dedup();
    let mut jobs = Vec::new();
    for &method in &methods {
        for &seed in &seeds {
            for &budget in &budgets {
                jobs.push(Job { method, seed, budget });
            }
        }
    }

    let work = || -> Vec<RunRecord> {
        let instances: Vec<Result<Instance>> = seeds.par_iter().map(|&s| config.instance.load(s)).collect();
        jobs.par_iter()
            .map(|job| {
                let idx = seeds.iter().position(|&s| s == job.seed).expect("seed listed");
                run_job(config, job, &instances[idx])
            })
            .collect()
    };
    let records = match config.max_workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?
            .install(work),
        None => work(),
    };
    Ok(ExperimentReport::from_records(records))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

pub const CSV_COLUMNS: [&str; 12] = [
    "instance",
    "method",
    "seed",
    "n",
    "m",
    "theta",
    "budget",
    "l1_used",
    "l0_used",
    "flipped",
    "final_median",
    "runtime_ms",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_csv<W: Write>(report: &ExperimentReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in &report.records {
        w.write_record([
            r.instance.clone(),
            r.method.to_string(),
            r.seed.to_string(),
            r.n.to_string(),
            r.m.to_string(),
            r.theta.to_string(),
            opt(r.budget),
            opt(r.l1_used),
            opt(r.l0_used),
            r.flipped.to_string(),
            opt(r.final_median),
            format!("{:.3}", r.runtime_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(report: &ExperimentReport, out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, report)?;
    Ok(())
}

pub fn emit_report(report: &ExperimentReport, format: ReportFormat, path: &Path) -> Result<()> {
    let file = std::io::BufWriter::new(fs::File::create(path)?);
    match format {
        ReportFormat::Csv => write_csv(report, file),
        ReportFormat::Json => write_json(report, file),
    }
}

pub fn read_json_report(path: &Path) -> Result<ExperimentReport> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JaccardMatrix {
    pub methods: Vec<Method>,
    pub values: Vec<Vec<f64>>,
}

/// Mean pairwise Jaccard similarity of stooge sets, pairing runs by seed and
/// budget.
///
/// Flip searches end at a different budget per method, so when two methods
/// share no (seed, budget) pair their runs are paired by seed alone, as long
/// as each method has a single run for that seed.
pub fn compare_stooges(report: &ExperimentReport) -> Result<JaccardMatrix> {
    type Runs<'a> = BTreeMap<u64, Vec<(u64, &'a [usize])>>;
    let mut sets: BTreeMap<Method, Runs> = BTreeMap::new();
    for r in report.records.iter().filter(|r| r.succeeded()) {
        let budget = r.budget.unwrap_or(f64::NAN).to_bits();
        sets.entry(r.method)
            .or_default()
            .entry(r.seed)
            .or_default()
            .push((budget, &r.stooges));
    }
    let mut methods: Vec<Method> = report.records.iter().map(|r| r.method).collect();
    methods.sort();
    methods.dedup();
    if let Some(m) = methods.iter().find(|m| !sets.contains_key(m)) {
        return Err(Error::invalid(format!("no stooge set recorded for {m}")));
    }
    let k = methods.len();
    let mut values = vec![vec![1.0; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let (a, b) = (&sets[&methods[i]], &sets[&methods[j]]);
            let mut shared = Vec::new();
            for (seed, runs_a) in a {
                for (budget, sa) in runs_a {
                    let hit = b.get(seed).and_then(|runs_b| runs_b.iter().find(|(bb, _)| bb == budget));
                    if let Some((_, sb)) = hit {
                        shared.push(jaccard(sa, sb));
                    }
                }
            }
            if shared.is_empty() {
                for (seed, runs_a) in a {
                    if let (&[(_, sa)], Some(&[(_, sb)])) = (runs_a.as_slice(), b.get(seed).map(Vec::as_slice)) {
                        shared.push(jaccard(sa, sb));
                    }
                }
            }
            if shared.is_empty() {
                return Err(Error::invalid(format!(
                    "{} and {} share no seed and budget",
                    methods[i], methods[j]
                )));
            }
            let v = shared.iter().sum::<f64>() / shared.len() as f64;
            values[i][j] = v;
            values[j][i] = v;
        }
    }
    Ok(JaccardMatrix { methods, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(method: Method, seed: u64, stooges: Vec<usize>) -> RunRecord {
        RunRecord {
            instance: "t".into(),
            method,
            seed,
            n: 10,
            m: 9,
            theta: 0.5,
            budget: Some(3.0),
            budget_percent: Some(30.0),
            l1_used: Some(1.5),
            l0_used: Some(3),
            flipped: true,
            final_median: Some(0.51),
            runtime_ms: 1.0,
            stooges,
            objective_trace: Vec::new(),
            error: None,
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        let mut buf = Vec::new();
        write_csv(&ExperimentReport::from_records(vec![]), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), CSV_COLUMNS.join(",") + "\n");
    }

    #[test]
    fn one_record_one_row() {
        let report = ExperimentReport::from_records(vec![record(Method::Greedy, 0, vec![1])]);
        let mut buf = Vec::new();
        write_csv(&report, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.lines().nth(1).unwrap().starts_with("t,greedy,0,10,9,0.5,3,1.5,3,true,0.51,"));
    }

    #[test]
    fn json_round_trip() {
        let report = ExperimentReport::from_records(vec![
            record(Method::Greedy, 0, vec![1, 2]),
            record(Method::Huber, 1, vec![3]),
        ]);
        let mut buf = Vec::new();
        write_json(&report, &mut buf).unwrap();
        let back: ExperimentReport = serde_json::from_slice(&buf).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn jaccard_matrix_examples() {
        let one = ExperimentReport::from_records(vec![record(Method::Greedy, 0, vec![1, 2])]);
        assert_eq!(compare_stooges(&one).unwrap().values, vec![vec![1.0]]);

        let same = ExperimentReport::from_records(vec![
            record(Method::Greedy, 0, vec![1, 2]),
            record(Method::Degree, 0, vec![2, 1]),
        ]);
        assert_eq!(compare_stooges(&same).unwrap().values[0][1], 1.0);

        let disjoint = ExperimentReport::from_records(vec![
            record(Method::Greedy, 0, vec![1, 2]),
            record(Method::Degree, 0, vec![3]),
        ]);
        let m = compare_stooges(&disjoint).unwrap();
        assert_eq!(m.values[0][1], 0.0);
        assert_eq!(m.values[1][0], 0.0);

        // Flip searches stop at different budgets; runs pair by seed.
        let mut a = record(Method::Greedy, 0, vec![1, 2]);
        a.budget = Some(2.0);
        let mut b = record(Method::Degree, 0, vec![2, 3, 4]);
        b.budget = Some(3.0);
        let mut c = record(Method::Degree, 1, vec![5]);
        c.budget = Some(1.0);
        let flip = ExperimentReport::from_records(vec![a, b, c]);
        assert_eq!(compare_stooges(&flip).unwrap().values[0][1], 0.25);
    }

    #[test]
    fn aggregates_skip_failures() {
        let mut bad = record(Method::Greedy, 1, vec![]);
        bad.error = Some("boom".into());
        bad.budget = None;
        let mut other = record(Method::Greedy, 2, vec![1]);
        other.budget = Some(5.0);
        let report = ExperimentReport::from_records(vec![record(Method::Greedy, 0, vec![1]), bad, other]);
        let agg = report.aggregate(Method::Greedy).unwrap();
        assert_eq!((agg.runs, agg.failures), (3, 1));
        let b = agg.budget.unwrap();
        assert_eq!(b.count, 2);
        assert!((b.mean - 4.0).abs() < 1e-12);
        assert!((b.std - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn config_parses_from_toml() {
        let text = r#"
            name = "grid"
            methods = ["greedy", "huber"]
            repetitions = 3

            [instance]
            kind = "generated"
            topology = { kind = "grid", rows = 4, cols = 4 }

            [budget]
            kind = "flip"

            [method_params.huber]
            huber_c = 0.05
        "#;
        let c = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(c.seeds(), vec![0, 1, 2]);
        assert_eq!(c.theta, 0.5);
        assert_eq!(c.params_for(Method::Huber).huber_c, Some(0.05));
        assert_eq!(c.params_for(Method::Greedy).huber_c, None);
        assert!(ExperimentConfig::from_toml(&text.replace("repetitions = 3", "repetitions = 0")).is_err());
    }
}
