//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage or configuration error,
//! 3 I/O or input-format error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analysis::{
    degree_fit_test, scaling_exponent_experiment, survival_fractions, Configuration, ExtinctionOptions,
    FitOptions,
};
use crate::checks::{degree_check, run_suite, CheckResult, Suite, Thresholds};
use crate::edgelist::{read_edge_list, write_edge_list, Header};
use crate::error::{Error, Result};
use crate::graph::{components, degrees, largest_forward_cluster, MultiDigraph};
use crate::sampler::{evolve, sample_graph_fast, sample_graph_naive_with_cap, NAIVE_MAX_N};
use crate::weights::{normalizer, sample_weights, NormalizerMode, WeightModel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Settings shared by all subcommands, loadable from a JSON file. Flags given
/// on the command line override the file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<WeightModel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalizer_mode: Option<NormalizerMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kmax: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub configuration: Option<Configuration>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<Suite>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub from: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub to: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Thresholds>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($f:ident),*) => {
        RunConfig { $($f: $top.$f.or($base.$f)),* }
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(self, top: RunConfig) -> RunConfig {
        overlay!(
            self, top, model, n, seed, normalizer_mode, reps, kmax, tol, max_iter, mc_samples, n_list,
            configuration, suite, from, to, thresholds
        )
    }

    fn model(&self) -> Result<WeightModel> {
        self.model.ok_or_else(|| Error::InvalidArgument("a weight model is required (--model)".into()))
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn mode(&self) -> NormalizerMode {
        self.normalizer_mode.unwrap_or(NormalizerMode::DeterministicMuN)
    }
}

#[derive(Debug, Parser)]
#[command(name = "cpdigraph", version, about = "Conditionally Poissonian random digraphs")]
pub struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "CPDIGRAPH_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct Common {
    /// JSON run configuration; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Weight model, JSON or short form such as `constant:2`, `pareto-mirrored:3.5,1`.
    #[arg(long)]
    pub model: Option<WeightModel>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// deterministic-mu-n, empirical-product or capacity-sum.
    #[arg(long = "normalizer")]
    pub normalizer_mode: Option<NormalizerMode>,
}

impl Common {
    fn base(&self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        Ok(file.overlay(RunConfig {
            model: self.model,
            seed: self.seed,
            normalizer_mode: self.normalizer_mode,
            ..Default::default()
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplerKind {
    Fast,
    Naive,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a graph and write it as an edge list.
    Sample {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum, default_value_t = SamplerKind::Fast)]
        sampler: SamplerKind,
        /// Vertex cap for the quadratic sampler.
        #[arg(long, default_value_t = NAIVE_MAX_N)]
        naive_cap: usize,
        /// Output file; standard output if absent.
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Also write the weight sequence as TSV.
        #[arg(long)]
        weights_out: Option<PathBuf>,
    },
    /// Sample at `--from` vertices and run the thinning process up to `--to`.
    Evolve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        from: Option<usize>,
        #[arg(long)]
        to: Option<usize>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Component report of an edge list as JSON.
    Components {
        input: PathBuf,
        /// Vertex count, overriding the header.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 10)]
        top_k: usize,
        /// Also report the largest forward cluster.
        #[arg(long)]
        forward: bool,
    },
    /// Degree statistics of an edge list; with `--model`, the degree fit too.
    Stats {
        input: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        kmax: Option<usize>,
    },
    /// Extinction probabilities and giant component fractions.
    Survival {
        #[command(flatten)]
        common: Common,
        #[arg(long = "configuration", alias = "config-kind")]
        configuration: Option<Configuration>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long)]
        mc_samples: Option<usize>,
    },
    /// Growth exponent of the largest components at criticality.
    Scaling {
        #[command(flatten)]
        common: Common,
        /// Pareto tail exponent; with `--critical` builds the critical mirrored model.
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        critical: bool,
        /// Comma-separated sizes.
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
        #[arg(long)]
        reps: Option<usize>,
        /// Emit the full report as JSON instead of TSV.
        #[arg(long)]
        json: bool,
    },
    /// Run the check suite, or check a graph against a model.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        suite: Option<Suite>,
        /// Edge list to test against `--graph-model` (or `--model`).
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        graph_model: Option<WeightModel>,
        #[arg(long)]
        kmax: Option<usize>,
    },
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::Parse { .. } => EXIT_IO,
        Error::NonConvergence { .. } => EXIT_CHECK_FAILED,
        _ => EXIT_USAGE,
    }
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_graph(path: &Path, n: Option<usize>) -> Result<(MultiDigraph, Header)> {
    read_edge_list(BufReader::new(File::open(path)?), n)
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn header(model: &WeightModel, seed: u64, mode: NormalizerMode, l_n: f64) -> Header {
    Header {
        seed: Some(seed),
        model: Some(model.to_json()),
        normalizer: Some(mode.name().to_string()),
        l_n: Some(l_n),
        ..Default::default()
    }
}

fn positive(name: &str, v: Option<usize>) -> Result<usize> {
    match v {
        Some(x) if x > 0 => Ok(x),
        Some(_) => Err(Error::InvalidArgument(format!("--{name} must be positive"))),
        None => Err(Error::InvalidArgument(format!("--{name} is required"))),
    }
}

#[derive(Serialize)]
struct GraphStats {
    n: usize,
    total_arcs: u64,
    total_loops: u64,
    mean_in: f64,
    mean_out: f64,
    max_in: u64,
    max_out: u64,
    in_histogram: Vec<u64>,
    out_histogram: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    degree_fit: Option<crate::analysis::DegreeFit>,
}

#[derive(Serialize)]
struct ComponentsJson {
    #[serde(flatten)]
    report: crate::graph::ComponentReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    largest_forward: Option<usize>,
}

fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Sample { common, n, sampler, naive_cap, out, weights_out } => {
            let cfg = common.base()?.overlay(RunConfig { n, ..Default::default() });
            let model = cfg.model()?;
            let n = positive("n", cfg.n)?;
            let (seed, mode) = (cfg.seed(), cfg.mode());
            let w = sample_weights(&model, n, seed)?;
            let l_n = normalizer(&w, model.mean(), mode)?;
            let g = match sampler {
                SamplerKind::Fast => sample_graph_fast(&w, l_n, seed)?,
                SamplerKind::Naive => sample_graph_naive_with_cap(&w, l_n, seed, naive_cap)?,
            };
            if let Some(p) = weights_out {
                w.write_tsv(BufWriter::new(File::create(p)?))?;
            }
            let mut h = header(&model, seed, mode, l_n);
            h.extra.insert("sampler".into(), format!("{sampler:?}").to_lowercase());
            let mut o = open_out(&out)?;
            write_edge_list(&g, &h, &mut o)?;
            o.flush()?;
            Ok(EXIT_OK)
        }
        Command::Evolve { common, from, to, out } => {
            let cfg = common.base()?.overlay(RunConfig { from, to, ..Default::default() });
            let model = cfg.model()?;
            let from = positive("from", cfg.from)?;
            let to = positive("to", cfg.to)?;
            if to < from {
                return Err(Error::InvalidArgument("--to must be at least --from".into()));
            }
            let (seed, mode) = (cfg.seed(), cfg.mode());
            if !mode.is_monotone() {
                return Err(Error::ModeMismatch {
                    mode: mode.name().into(),
                    reason: "evolution needs a non-decreasing normalizer".into(),
                });
            }
            let mu = model.mean();
            let w = sample_weights(&model, to, seed)?;
            let start = w.prefix(from)?;
            let mut l_n = normalizer(&start, mu, mode)?;
            let mut g = sample_graph_fast(&start, l_n, seed)?;
            for n in from..to {
                let l_next = normalizer(&w.prefix(n + 1)?, mu, mode)?;
                g = evolve(&g, &w, l_n, l_next, seed)?;
                l_n = l_next;
            }
            let mut h = header(&model, seed, mode, l_n);
            h.extra.insert("from".into(), from.to_string());
            let mut o = open_out(&out)?;
            write_edge_list(&g, &h, &mut o)?;
            o.flush()?;
            Ok(EXIT_OK)
        }
        Command::Components { input, n, top_k, forward } => {
            let (g, _) = read_graph(&input, n)?;
            let report = components(&g).report(top_k);
            print_json(&ComponentsJson { report, largest_forward: forward.then(|| largest_forward_cluster(&g)) })?;
            Ok(EXIT_OK)
        }
        Command::Stats { input, n, common, kmax } => {
            let cfg = common.base()?.overlay(RunConfig { kmax, ..Default::default() });
            let (g, _) = read_graph(&input, n)?;
            let d = degrees(&g);
            let nv = d.len().max(1) as f64;
            let degree_fit = match cfg.model {
                Some(m) => Some(degree_fit_test(&g, &m, cfg.kmax.unwrap_or(30), cfg.seed(), &FitOptions::default())?),
                None => None,
            };
            print_json(&GraphStats {
                n: g.n(),
                total_arcs: g.total_arcs(),
                total_loops: g.total_loops(),
                mean_in: d.iter().map(|x| x.d_in as f64).sum::<f64>() / nv,
                mean_out: d.iter().map(|x| x.d_out as f64).sum::<f64>() / nv,
                max_in: d.iter().map(|x| x.d_in).max().unwrap_or(0),
                max_out: d.iter().map(|x| x.d_out).max().unwrap_or(0),
                in_histogram: crate::stats::histogram(d.iter().map(|x| x.d_in)),
                out_histogram: crate::stats::histogram(d.iter().map(|x| x.d_out)),
                degree_fit,
            })?;
            Ok(EXIT_OK)
        }
        Command::Survival { common, configuration, tol, max_iter, mc_samples } => {
            let cfg = common.base()?.overlay(RunConfig {
                configuration,
                tol,
                max_iter,
                mc_samples,
                ..Default::default()
            });
            let model = cfg.model()?;
            let d = ExtinctionOptions::default();
            let opts = ExtinctionOptions {
                tol: cfg.tol.unwrap_or(d.tol),
                max_iter: cfg.max_iter.unwrap_or(d.max_iter),
                mc_samples: cfg.mc_samples.unwrap_or(d.mc_samples),
                seed: cfg.seed(),
            };
            let configuration = cfg.configuration.unwrap_or(if model.is_mirrored() {
                Configuration::MirroredSum
            } else {
                Configuration::IndependentSum
            });
            print_json(&survival_fractions(&model, configuration, &opts)?)?;
            Ok(EXIT_OK)
        }
        Command::Scaling { common, tau, critical, n_list, reps, json } => {
            let mut cfg = common.base()?.overlay(RunConfig { n_list, reps, ..Default::default() });
            if let Some(t) = tau {
                cfg.model = Some(if critical {
                    WeightModel::critical_pareto_mirrored(t)?
                } else {
                    WeightModel::pareto_mirrored(t, 1.0)?
                });
            }
            let model = cfg.model()?;
            let n_list = cfg.n_list.clone().unwrap_or_else(|| (12..=17).map(|k| 1usize << k).collect());
            let report = scaling_exponent_experiment(&model, &n_list, cfg.reps.unwrap_or(50), cfg.seed())?;
            if json {
                print_json(&report)?;
            } else {
                let mut out = io::stdout().lock();
                report.write_tsv(&mut out)?;
                writeln!(out, "# alpha={}", report.alpha)?;
                for (name, s) in [("weak", &report.weak), ("forward", &report.forward), ("strong", &report.strong)] {
                    writeln!(out, "# slope_{name}={} ci=[{}, {}]", s.estimate, s.ci.0, s.ci.1)?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Verify { common, suite, graph, graph_model, kmax } => {
            let cfg = common.base()?.overlay(RunConfig { suite, kmax, ..Default::default() });
            let thresholds = cfg.thresholds.unwrap_or_default();
            let results: Vec<CheckResult> = match graph {
                Some(p) => {
                    let model = graph_model.or(cfg.model).ok_or_else(|| {
                        Error::InvalidArgument("--graph needs --graph-model or --model".into())
                    })?;
                    let (g, _) = read_graph(&p, None)?;
                    vec![degree_check(&g, &model, cfg.kmax.unwrap_or(30), cfg.seed(), thresholds.tv)?]
                }
                None => run_suite(cfg.suite.unwrap_or(Suite::Quick), cfg.seed(), &thresholds)?,
            };
            let mut out = io::stdout().lock();
            for r in &results {
                serde_json::to_writer(&mut out, r)?;
                writeln!(out)?;
            }
            Ok(if results.iter().all(|r| r.pass) { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
    }
}

/// Parse arguments, run, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("warning: could not configure {t} threads: {e}");
        }
    }
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
