use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fj_median::estimators::{find_c, FindCConfig};
use fj_median::experiment::{
    compare_stooges, emit_report, read_json_report, run_experiment, write_csv, ExperimentConfig,
    ReportFormat,
};
use fj_median::graph::{equilibrium, Instance};
use fj_median::instances::{
    generate, instance_stats, load_instance, save_instance, to_json, GeneratorSpec, InstanceFormat,
    OpinionDist, Topology,
};
use fj_median::method::{min_budget_to_flip, run_method, Method, MethodParams};

#[derive(Parser)]
#[command(
    name = "fjmedian",
    version,
    about = "Push the median FJ equilibrium opinion past a threshold"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic instance.
    Gen(GenArgs),
    /// Solve for the equilibrium and print summary statistics.
    Solve {
        #[command(flatten)]
        input: InputArgs,
        /// Write the equilibrium opinions, one per line.
        #[arg(long)]
        opinions_out: Option<PathBuf>,
    },
    /// Run one method at one budget.
    Optimize {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Budget in stooges; continuous methods get half of it as L1 budget.
        #[arg(long)]
        budget: f64,
        /// Write the full result as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Find the least budget that flips the median.
    Flip {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Largest budget to try, in stooges; defaults to n.
        #[arg(long)]
        max_budget: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a TOML experiment config.
    Bench {
        config: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Pairwise Jaccard similarity of stooge sets in a JSON report.
    Jaccard { report: PathBuf },
}

#[derive(Args)]
struct InputArgs {
    /// Canonical JSON instance, or an edge list when --opinions is given.
    instance: PathBuf,
    /// Opinion file accompanying an edge list.
    #[arg(long)]
    opinions: Option<PathBuf>,
    /// Treat the edge list as directed.
    #[arg(long)]
    directed: bool,
}

impl InputArgs {
    fn load(&self) -> fj_median::Result<Instance> {
        let format = match &self.opinions {
            Some(o) => InstanceFormat::EdgeListPair {
                opinions: o.clone(),
                directed: self.directed,
            },
            None => InstanceFormat::Canonical,
        };
        load_instance(&self.instance, &format)
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value = "huber")]
    method: Method,
    #[arg(long, default_value_t = 0.5)]
    theta: f64,
    /// Laziness of the greedy scan.
    #[arg(long, default_value_t = 0.8)]
    phi: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fixed Huber constant instead of the perturbation heuristic.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
}

impl RunArgs {
    fn params(&self) -> MethodParams {
        let mut p = MethodParams {
            phi: self.phi,
            seed: self.seed,
            huber_c: self.c,
            ..MethodParams::default()
        };
        if let Some(m) = self.max_iters {
            p.optimizer.max_iters = m;
        }
        if let Some(e) = self.eta {
            p.optimizer.eta = e;
        }
        p
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TopologyKind {
    Grid,
    Star,
    Gnp,
    Tree,
    Ba,
    Communities,
    DepthTree,
    OrgChart,
}

#[derive(Clone, Copy, ValueEnum)]
enum OpinionKind {
    Normal,
    Lognormal,
    Bimodal,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    topology: TopologyKind,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    rows: usize,
    #[arg(long, default_value_t = 10)]
    cols: usize,
    /// Edge probability for gnp.
    #[arg(long, default_value_t = 0.1)]
    p: f64,
    /// Edges per new node for ba.
    #[arg(long, default_value_t = 5)]
    attach: usize,
    /// Orient tree arcs away from the root.
    #[arg(long)]
    directed: bool,
    /// Swap intra- and inter-community probabilities.
    #[arg(long)]
    swap: bool,
    #[arg(long, default_value = "normal")]
    opinions: OpinionKind,
    /// Read opinions from a file instead of sampling them.
    #[arg(long)]
    opinion_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; stdout when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

impl GenArgs {
    fn spec(&self) -> GeneratorSpec {
        let n = self.n;
        let topology = match self.topology {
            TopologyKind::Grid => Topology::Grid {
                rows: self.rows,
                cols: self.cols,
            },
            TopologyKind::Star => Topology::Star { n },
            TopologyKind::Gnp => Topology::Gnp { n, p: self.p },
            TopologyKind::Tree => Topology::RandomTree {
                n,
                directed: self.directed,
            },
            TopologyKind::Ba => Topology::Ba {
                n,
                attach: self.attach,
            },
            TopologyKind::Communities => Topology::Communities { swap: self.swap },
            TopologyKind::DepthTree => Topology::DepthTree { n, window: 5 },
            TopologyKind::OrgChart => Topology::OrgChart {
                n,
                min_children: 2,
                max_children: 5,
            },
        };
        let opinions = match (&self.opinion_file, self.opinions) {
            (Some(path), _) => OpinionDist::File { path: path.clone() },
            (None, OpinionKind::Normal) => OpinionDist::Normal,
            (None, OpinionKind::Lognormal) => OpinionDist::Lognormal,
            (None, OpinionKind::Bimodal) => OpinionDist::Bimodal,
        };
        GeneratorSpec {
            topology,
            opinions,
            seed: self.seed,
        }
    }
}

fn run(cli: Cli, stdout: &mut impl Write) -> fj_median::Result<()> {
    match cli.command {
        Command::Gen(args) => {
            let inst = generate(&args.spec())?;
            match &args.out {
                Some(p) => save_instance(&inst, p)?,
                None => writeln!(stdout, "{}", to_json(&inst)?)?,
            }
        }
        Command::Solve {
            input,
            opinions_out,
        } => {
            let inst = input.load()?;
            let stats = instance_stats(&inst)?;
            writeln!(stdout, "{}", serde_json::to_string_pretty(&stats)?)?;
            if let Some(p) = opinions_out {
                let x = equilibrium(&inst)?.x_star;
                let lines: Vec<String> = x.iter().map(|v| v.to_string()).collect();
                fs::write(p, lines.join("\n") + "\n")?;
            }
        }
        Command::Optimize {
            input,
            run,
            budget,
            out,
        } => {
            let inst = input.load()?;
            let mut params = run.params();
            if run.method == Method::Huber && params.huber_c.is_none() {
                let c = find_c(
                    &inst,
                    &FindCConfig {
                        seed: run.seed,
                        ..params.find_c.clone()
                    },
                )?
                .c;
                eprintln!("huber constant c = {c}");
                params.huber_c = Some(c);
            }
            let r = run_method(&inst, run.method, budget, run.theta, &params)?;
            writeln!(
                stdout,
                "method={} budget={budget} flipped={} final_median={:.6} l0_used={} l1_used={:.6}",
                run.method, r.flipped, r.final_median, r.l0_budget_used, r.l1_budget_used
            )?;
            if !run.method.is_continuous() {
                for &(u, a) in &r.stooges {
                    writeln!(stdout, "{u} -> {a}")?;
                }
            }
            if let Some(p) = out {
                fs::write(p, serde_json::to_string_pretty(&r)?)?;
            }
        }
        Command::Flip {
            input,
            run,
            max_budget,
            out,
        } => {
            let inst = input.load()?;
            let n = inst.node_count();
            let max = max_budget.unwrap_or(n as f64);
            let f = min_budget_to_flip(&inst, run.method, run.theta, max, &run.params())?;
            match f.budget {
                Some(b) => writeln!(
                    stdout,
                    "method={} budget_to_flip={b} percent={:.2} runs={}",
                    run.method,
                    100.0 * b / n as f64,
                    f.runs
                ),
                None => writeln!(
                    stdout,
                    "method={} no flip within budget {max} runs={}",
                    run.method, f.runs
                ),
            }?;
            if let Some(p) = out {
                fs::write(p, serde_json::to_string_pretty(&f)?)?;
            }
        }
        Command::Bench { config, csv, json } => {
            let cfg = ExperimentConfig::load(&config)?;
            let report = run_experiment(&cfg)?;
            let csv = csv.or(cfg.output.csv.clone());
            let json = json.or(cfg.output.json.clone());
            if let Some(p) = &csv {
                emit_report(&report, ReportFormat::Csv, p)?;
            }
            if let Some(p) = &json {
                emit_report(&report, ReportFormat::Json, p)?;
            }
            if csv.is_none() && json.is_none() {
                write_csv(&report, &mut *stdout)?;
            }
            for a in &report.aggregates {
                let budget = a
                    .budget_percent
                    .map(|s| format!("{:.2}% ± {:.2}", s.mean, s.std))
                    .unwrap_or_else(|| "-".into());
                eprintln!(
                    "{:<13} runs={} failures={} flipped={} budget={budget}",
                    a.method.to_string(),
                    a.runs,
                    a.failures,
                    a.flipped
                );
            }
        }
        Command::Jaccard { report } => {
            let m = compare_stooges(&read_json_report(&report)?)?;
            let names: Vec<String> = m.methods.iter().map(|x| x.to_string()).collect();
            writeln!(
                stdout,
                "{:<13} {}",
                "",
                names.iter().map(|s| format!("{s:>13}")).collect::<String>()
            )?;
            for (name, row) in names.iter().zip(&m.values) {
                writeln!(
                    stdout,
                    "{name:<13} {}",
                    row.iter().map(|v| format!("{v:>13.3}")).collect::<String>()
                )?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli, &mut io::stdout().lock()) {
        Ok(()) => ExitCode::SUCCESS,
        // A closed pipe (`fjmedian ... | head`) is not an error.
        Err(fj_median::Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_solver_failure() { 3 } else { 2 })
        }
    }
}
