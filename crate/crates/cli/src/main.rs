//! `coclust`: co-cluster the two node sets of a sparse bipartite graph,
//! fusing the graph with text covariates.
//!
//! Subcommands: ingest (corpus -> matrices), fit (matrices -> clusters),
//! diagnose (clusters -> interpretive tables), benchmark (simulation grid),
//! simulate (write a synthetic instance).
//!
//! Exit codes: 0 success, 1 user error (bad arguments, malformed input),
//! 2 internal error (e.g. solver non-convergence).

mod artifacts;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{BenchRunConfig, DocsArgs, NcscbmArgs};
use config::RunConfig;

#[derive(Parser)]
#[command(name = "coclust", version, about = "Bipartite graph + text co-clustering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Read a corpus record file and write the adjacency and document-term
    /// matrices, vocabularies, and id maps.
    Ingest {
        /// Corpus record file (post/comment lines, tab separated).
        #[arg(long)]
        corpus: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Vocabulary document-frequency cutoff (fraction of documents).
        #[arg(long, default_value_t = 0.001)]
        cutoff: f64,
        /// Optional stopword file, one word per line.
        #[arg(long)]
        stopwords: Option<PathBuf>,
    },
    /// Run the co-clustering pipeline on ingested (or simulated) matrices.
    Fit {
        /// Directory with a.mtx, x.mtx, y.mtx (as written by ingest or
        /// simulate).
        #[arg(long)]
        input: PathBuf,
        /// Output directory for labels, embeddings, and the manifest.
        #[arg(long)]
        out: PathBuf,
        /// TOML config or a previously written manifest; flags below
        /// override individual fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: FitOverrides,
    },
    /// Interaction tables, keyword scores, attention histogram, scree table.
    Diagnose {
        /// The ingest/simulate directory the fit read from.
        #[arg(long)]
        input: PathBuf,
        /// The fit output directory.
        #[arg(long)]
        fit: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Rows per cluster in keyword and central-member tables.
        #[arg(long, default_value_t = 20)]
        top_n: usize,
    },
    /// Mis-clustering benchmark over a (graph signal, text signal) grid.
    Benchmark {
        #[arg(long)]
        out: PathBuf,
        /// TOML config or a previously written benchmark manifest.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Signal exponents (base 10), e.g. -1.8,-1,0,1,2,3.
        #[arg(long, value_delimiter = ',')]
        exponents: Option<Vec<f64>>,
        /// Axes: both, graph, text.
        #[arg(long, value_delimiter = ',')]
        axes: Option<Vec<String>>,
        /// Replicates per cell.
        #[arg(long)]
        reps: Option<usize>,
        /// Methods: combined, graph_only, text_only, all_one.
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<String>>,
        #[arg(long)]
        seed: Option<u64>,
        /// k-means restarts per fit.
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        n_docs: Option<usize>,
        #[arg(long)]
        n_words: Option<usize>,
        /// Expected links per document.
        #[arg(long)]
        mean_links: Option<f64>,
        /// Expected words per document.
        #[arg(long)]
        mean_words: Option<f64>,
    },
    /// Write a synthetic instance (block model or document model).
    #[command(subcommand)]
    Simulate(SimulateCommand),
}

#[derive(Subcommand)]
enum SimulateCommand {
    /// Bipartite co-blockmodel with block-constant covariate means.
    Ncscbm {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 500)]
        n_citizens: usize,
        #[arg(long, default_value_t = 500)]
        n_posts: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 0.2)]
        p_in: f64,
        #[arg(long, default_value_t = 0.02)]
        p_out: f64,
        #[arg(long, default_value_t = 16)]
        m_c: usize,
        #[arg(long, default_value_t = 16)]
        m_p: usize,
        #[arg(long, default_value_t = 2.0)]
        covariate_mean: f64,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Linked-document model with graph and text signal levels.
    Docs {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1000)]
        n_docs: usize,
        #[arg(long, default_value_t = 1000)]
        n_words: usize,
        #[arg(long, default_value_t = 1.0)]
        sig_g: f64,
        #[arg(long, default_value_t = 1.0)]
        sig_t: f64,
        #[arg(long, default_value_t = 20.0)]
        mean_links: f64,
        #[arg(long, default_value_t = 200.0)]
        mean_words: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct FitOverrides {
    /// plain | center | scale | tfidf
    #[arg(long)]
    scaling: Option<String>,
    /// graph | combined | text | all-one
    #[arg(long)]
    h_mode: Option<String>,
    /// Text weight in calibrated units.
    #[arg(long)]
    h: Option<f64>,
    /// none | first | second
    #[arg(long)]
    calibration: Option<String>,
    /// Threshold tail fraction.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    k_c: Option<usize>,
    #[arg(long)]
    k_p: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// k-means restarts.
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    svd_tol: Option<f64>,
    #[arg(long)]
    svd_max_iter: Option<usize>,
}

impl FitOverrides {
    fn apply(&self, config: &mut RunConfig) {
        if let Some(v) = &self.scaling {
            config.scaling = v.clone();
        }
        if let Some(v) = &self.h_mode {
            config.h_mode = v.clone();
        }
        if let Some(v) = self.h {
            config.h = v;
        }
        if let Some(v) = &self.calibration {
            config.calibration = v.clone();
        }
        if let Some(v) = self.alpha {
            config.alpha = v;
        }
        if let Some(v) = self.k_c {
            config.k_c = v;
        }
        if let Some(v) = self.k_p {
            config.k_p = v;
        }
        if let Some(v) = self.seed {
            config.seed = v;
        }
        if let Some(v) = self.restarts {
            config.kmeans.restarts = v;
        }
        if let Some(v) = self.svd_tol {
            config.svd.tol = v;
        }
        if let Some(v) = self.svd_max_iter {
            config.svd.max_iter = v;
        }
    }
}

fn run() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Ingest {
            corpus,
            out,
            cutoff,
            stopwords,
        } => commands::cmd_ingest(&corpus, &out, cutoff, stopwords.as_deref()),
        Command::Fit {
            input,
            out,
            config,
            overrides,
        } => {
            let mut run_config = match config {
                Some(path) => config::load_config(&path)?,
                None => RunConfig::default(),
            };
            overrides.apply(&mut run_config);
            commands::cmd_fit(&input, &out, &run_config)
        }
        Command::Diagnose {
            input,
            fit,
            out,
            top_n,
        } => commands::cmd_diagnose(&input, &fit, &out, top_n),
        Command::Benchmark {
            out,
            config,
            exponents,
            axes,
            reps,
            methods,
            seed,
            restarts,
            n_docs,
            n_words,
            mean_links,
            mean_words,
        } => {
            let mut bench = match config {
                Some(path) => commands::load_bench_config(&path)?,
                None => BenchRunConfig::default(),
            };
            if let Some(v) = exponents {
                bench.exponents = v;
            }
            if let Some(v) = axes {
                bench.axes = v;
            }
            if let Some(v) = reps {
                bench.reps = v;
            }
            if let Some(v) = methods {
                bench.methods = v;
            }
            if let Some(v) = seed {
                bench.seed = v;
            }
            if let Some(v) = restarts {
                bench.restarts = v;
            }
            if let Some(v) = n_docs {
                bench.n_docs = v;
            }
            if let Some(v) = n_words {
                bench.n_words = v;
            }
            if let Some(v) = mean_links {
                bench.mean_links = v;
            }
            if let Some(v) = mean_words {
                bench.mean_words = v;
            }
            commands::cmd_benchmark(&out, &bench)
        }
        Command::Simulate(sim) => match sim {
            SimulateCommand::Ncscbm {
                out,
                n_citizens,
                n_posts,
                k,
                p_in,
                p_out,
                m_c,
                m_p,
                covariate_mean,
                noise,
                seed,
            } => commands::cmd_simulate_ncscbm(
                &out,
                &NcscbmArgs {
                    n_citizens,
                    n_posts,
                    k,
                    p_in,
                    p_out,
                    m_c,
                    m_p,
                    covariate_mean,
                    noise,
                    seed,
                },
            ),
            SimulateCommand::Docs {
                out,
                n_docs,
                n_words,
                sig_g,
                sig_t,
                mean_links,
                mean_words,
                seed,
            } => commands::cmd_simulate_docs(
                &out,
                &DocsArgs {
                    n_docs,
                    n_words,
                    sig_g,
                    sig_t,
                    mean_links,
                    mean_words,
                    seed,
                },
            ),
        },
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let internal = err
                .chain()
                .any(|cause| matches!(
                    cause.downcast_ref::<coclust_core::Error>(),
                    Some(coclust_core::Error::NonConvergence { .. })
                ));
            if internal {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
