//! `herd`: herdability analysis of edge-list networks.

mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use herd_core::centrality::{ClassicMeasure, ClassicParams};
use herd_core::energy::CutoffPolicy;
use herd_core::herd::TieBreak;
use herd_core::synth::Synthetic;
use herd_core::{graph, Error, Graph};

use report::Failure;

#[derive(Debug, Parser)]
#[command(name = "herd", version, about = "Herdability analysis of positive networked systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub opts: GlobalOpts,
}

#[derive(Debug, Clone, Args, serde::Serialize)]
pub struct GlobalOpts {
    /// Treat every edge as undirected.
    #[arg(long, global = true)]
    pub undirected: bool,

    /// Orthant threshold d for energy computations.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub d: f64,

    /// Katz attenuation (default 0.85/λ_max of the adjacency).
    #[arg(long, global = true)]
    pub katz_alpha: Option<f64>,

    /// Fraction of most herdable nodes in the hub-degree report.
    #[arg(long, global = true, default_value_t = 0.1)]
    pub top_fraction: f64,

    /// Representative choice inside a root SCC.
    #[arg(long, global = true, default_value = "smallest-id")]
    pub tie_break: String,

    /// Relative Gramian rank cutoff (default 1e-9·n).
    #[arg(long, global = true)]
    pub rank_cutoff: Option<f64>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Overrides the seed of --synthetic.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Generate the input graph: erdos:n,p,seed or scalefree:n,m,seed.
    #[arg(long, global = true)]
    pub synthetic: Option<String>,

    /// Worker threads for per-node energy solves.
    #[arg(long, global = true, env = "HERD_JOBS")]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureArg {
    Hc,
    Indegree,
    Eccentricity,
    Closeness,
    Betweenness,
    Eigenvector,
    Katz,
}

#[derive(Debug, Subcommand, serde::Serialize)]
#[serde(rename_all = "lowercase", tag = "command")]
pub enum Command {
    /// Decide whether the listed input nodes make the network herdable.
    Check {
        file: Option<PathBuf>,
        /// Comma-separated input node labels.
        #[arg(long, value_delimiter = ',', required = true)]
        inputs: Vec<String>,
    },
    /// Minimal herding-node set (one node per root SCC).
    Cover { file: Option<PathBuf> },
    /// Per-node centrality on the largest SCC.
    Centrality {
        file: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = MeasureArg::Hc)]
        measure: MeasureArg,
    },
    /// All classical centralities on the largest SCC.
    Classic { file: Option<PathBuf> },
    /// Herdability centrality of each classical measure's best nodes.
    Compare { file: Option<PathBuf> },
    /// Driver-node count from maximum matching.
    Drivers { file: Option<PathBuf> },
    /// Simulate minimum-energy herding from one node.
    Simulate {
        file: Option<PathBuf>,
        #[arg(long)]
        node: String,
        /// Synthesis horizon, or "auto" for 40/|spectral abscissa|.
        #[arg(long, default_value = "auto")]
        tf: String,
        /// Integration step, or "auto".
        #[arg(long, default_value = "auto")]
        h: String,
        /// Write the trajectory as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Network summary row: N, L, n_w, n_H, n_c.
    Table { file: Option<PathBuf> },
}

impl Command {
    fn file(&self) -> Option<&PathBuf> {
        match self {
            Command::Check { file, .. }
            | Command::Cover { file }
            | Command::Centrality { file, .. }
            | Command::Classic { file }
            | Command::Compare { file }
            | Command::Drivers { file }
            | Command::Simulate { file, .. }
            | Command::Table { file } => file.as_ref(),
        }
    }
}

/// Settings derived from the command line, shared by all commands.
pub struct RunConfig {
    pub cli: Cli,
    pub policy: CutoffPolicy,
    pub tie_break: TieBreak,
    pub classic: ClassicParams,
}

impl RunConfig {
    fn from_cli(cli: Cli) -> Result<Self, Failure> {
        let o = &cli.opts;
        if !(o.d > 0.0 && o.d.is_finite()) {
            return Err(Failure::input(format!("--d must be positive, got {}", o.d)));
        }
        if !(o.top_fraction > 0.0 && o.top_fraction <= 1.0) {
            return Err(Failure::input(format!(
                "--top-fraction must lie in (0, 1], got {}",
                o.top_fraction
            )));
        }
        let tie_break: TieBreak = o.tie_break.parse().map_err(Failure::from)?;
        let policy = match o.rank_cutoff {
            None => CutoffPolicy::Default,
            Some(eps) if eps > 0.0 && eps < 1.0 => CutoffPolicy::Relative(eps),
            Some(eps) => return Err(Failure::input(format!("--rank-cutoff must lie in (0, 1), got {eps}"))),
        };
        let classic = ClassicParams {
            katz_alpha: o.katz_alpha,
        };
        Ok(RunConfig {
            cli,
            policy,
            tie_break,
            classic,
        })
    }

    fn load_graph(&self) -> Result<Graph, Failure> {
        let o = &self.cli.opts;
        let directed = !o.undirected;
        match (&o.synthetic, self.cli.command.file()) {
            (Some(_), Some(_)) => Err(Failure::input("give either an input file or --synthetic, not both")),
            (None, None) => Err(Failure::input("no input: give an edge-list file or --synthetic")),
            (Some(spec), None) => {
                let mut s: Synthetic = spec.parse().map_err(Failure::from)?;
                if let Some(seed) = o.seed {
                    s = match s {
                        Synthetic::Erdos { n, p, .. } => Synthetic::Erdos { n, p, seed },
                        Synthetic::ScaleFree { n, m, .. } => Synthetic::ScaleFree { n, m, seed },
                    };
                }
                s.generate(directed).map_err(Failure::from)
            }
            (None, Some(path)) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
                graph::parse_edge_list(&text, directed).map_err(|e| match e {
                    Error::Parse { line, reason } => {
                        Failure::input(format!("{}:{line}: {reason}", path.display()))
                    }
                    other => Failure::from(other),
                })
            }
        }
    }
}

impl MeasureArg {
    fn classic(self) -> Option<ClassicMeasure> {
        match self {
            MeasureArg::Hc => None,
            MeasureArg::Indegree => Some(ClassicMeasure::InDegree),
            MeasureArg::Eccentricity => Some(ClassicMeasure::Eccentricity),
            MeasureArg::Closeness => Some(ClassicMeasure::Closeness),
            MeasureArg::Betweenness => Some(ClassicMeasure::Betweenness),
            MeasureArg::Eigenvector => Some(ClassicMeasure::Eigenvector),
            MeasureArg::Katz => Some(ClassicMeasure::Katz),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(jobs) = cli.opts.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("warning: could not size worker pool: {e}");
        }
    }

    let outcome = RunConfig::from_cli(cli).and_then(|cfg| report::run(&cfg));
    match outcome {
        Ok(text) => {
            let mut out = std::io::stdout().lock();
            if out.write_all(text.as_bytes()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
