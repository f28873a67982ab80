//! `hardcore`: approximate counting, sampling and diagnostics for the
//! bipartite hard-core model.

mod commands;
mod error;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "hardcore", version, about)]
struct Cli {
    /// Emit machine-readable JSON (errors included).
    #[arg(long, global = true)]
    json: bool,
    /// Write the result document here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report the sufficient conditions and the KP certificate.
    Check {
        graph: PathBuf,
        #[command(flatten)]
        lam: RealFugacities,
        #[command(flatten)]
        kp: KpArgs,
    },
    /// Certified approximation of log Z.
    Count {
        graph: PathBuf,
        #[command(flatten)]
        lam: RealFugacities,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[command(flatten)]
        kp: KpArgs,
        /// Cutoff override (clusters of total size below m).
        #[arg(long)]
        m: Option<usize>,
        /// Cluster enumeration cap.
        #[arg(long)]
        max_clusters: Option<u64>,
        /// Write every cluster used by the estimate to this file.
        #[arg(long)]
        dump_clusters: Option<PathBuf>,
    },
    /// Exact Z by enumeration, at real or complex fugacities.
    Exact {
        graph: PathBuf,
        #[arg(long)]
        lambda_l: Option<f64>,
        #[arg(long)]
        lambda_r: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        lambda_l_re: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        lambda_l_im: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        lambda_r_re: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        lambda_r_im: Option<f64>,
        /// Also report every single-vertex occupation probability.
        #[arg(long)]
        marginals: bool,
    },
    /// Draw independent sets; one JSON array of [side, index] pairs per line.
    Sample {
        graph: PathBuf,
        #[command(flatten)]
        lam: RealFugacities,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        /// Number of draws.
        #[arg(long, short = 'n', default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Backend::Truncated)]
        backend: Backend,
        #[command(flatten)]
        kp: KpArgs,
        /// Cutoff override for the truncated backend.
        #[arg(long)]
        m: Option<usize>,
        /// Largest automatic cutoff for the truncated backend.
        #[arg(long, default_value_t = 10)]
        max_m: usize,
    },
    /// Cumulant and correlation tables against their decay bounds (CSV).
    Decay {
        graph: PathBuf,
        #[command(flatten)]
        lam: RealFugacities,
        #[arg(long, default_value_t = 8)]
        m: usize,
        /// Largest right-vertex set whose cumulant is tabulated.
        #[arg(long, default_value_t = 3)]
        max_size: usize,
        #[command(flatten)]
        kp: KpArgs,
    },
    /// Probe |Z| at random complex fugacities in the region
    /// |λ_R| <= Λ_R, |1+λ_L| >= 1+Λ_L.
    Zeros {
        graph: PathBuf,
        /// Λ_L.
        #[arg(long)]
        lambda_l: f64,
        /// Λ_R.
        #[arg(long)]
        lambda_r: f64,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Generate a graph from a named family in edge-list format.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
struct RealFugacities {
    #[arg(long)]
    lambda_l: f64,
    #[arg(long)]
    lambda_r: f64,
}

#[derive(Debug, Args)]
struct KpArgs {
    #[arg(long, default_value_t = 0.1)]
    eta: f64,
    /// Largest polymer size enumerated by the empirical KP check.
    #[arg(long, default_value_t = 6)]
    k_max: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Backend {
    Exact,
    Truncated,
}

#[derive(Debug, Args)]
struct GenArgs {
    /// complete_bipartite, star_center_L, star_center_R, random_biregular,
    /// even_cycle or path.
    #[arg(long)]
    family: String,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    a: Option<usize>,
    #[arg(long)]
    b: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d_left: Option<usize>,
    #[arg(long)]
    d_right: Option<usize>,
    #[arg(long)]
    n_left: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// What a command produces.
enum Document {
    /// Human text and its JSON counterpart.
    Report { text: String, json: Value },
    /// Output that is the same in both modes (CSV, JSON-lines, edge lists).
    Raw(String),
}

fn main() -> ExitCode {
    let wants_json = std::env::args().any(|a| a == "--json");
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            if wants_json {
                let rendered = e.to_string();
                let first = rendered.lines().next().unwrap_or_default();
                let message = first.strip_prefix("error: ").unwrap_or(first);
                print_json_error("usage", message, 1);
            }
            return ExitCode::from(1);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if cli.json {
                print_json_error(e.kind(), &e.to_string(), e.exit_code());
            }
            ExitCode::from(e.exit_code())
        }
    }
}

fn print_json_error(kind: &str, message: &str, code: u8) {
    let doc = json!({ "error": { "kind": kind, "message": message, "exit_code": code } });
    println!("{doc}");
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Threads(e.to_string()))?;
    }
    let doc = match &cli.command {
        Command::Check { graph, lam, kp } => commands::check(
            &read_graph(graph)?,
            lam.lambda_l,
            lam.lambda_r,
            kp.eta,
            kp.k_max,
        )?,
        Command::Count {
            graph,
            lam,
            eps,
            kp,
            m,
            max_clusters,
            dump_clusters,
        } => commands::count(
            &read_graph(graph)?,
            commands::CountArgs {
                lambda_l: lam.lambda_l,
                lambda_r: lam.lambda_r,
                eps: *eps,
                eta: kp.eta,
                k_max: kp.k_max,
                m: *m,
                max_clusters: *max_clusters,
                dump: dump_clusters.as_deref(),
            },
        )?,
        Command::Exact {
            graph,
            lambda_l,
            lambda_r,
            lambda_l_re,
            lambda_l_im,
            lambda_r_re,
            lambda_r_im,
            marginals,
        } => {
            let g = read_graph(graph)?;
            let complex = [lambda_l_re, lambda_l_im, lambda_r_re, lambda_r_im]
                .iter()
                .any(|x| x.is_some());
            if complex {
                if lambda_l.is_some() || lambda_r.is_some() {
                    return Err(CliError::Usage(
                        "give either --lambda-l/--lambda-r or the complex --lambda-*-re/--lambda-*-im flags".into(),
                    ));
                }
                let part = |x: &Option<f64>| x.unwrap_or(0.0);
                commands::exact_complex(
                    &g,
                    (part(lambda_l_re), part(lambda_l_im)),
                    (part(lambda_r_re), part(lambda_r_im)),
                )?
            } else {
                let (Some(l), Some(r)) = (lambda_l, lambda_r) else {
                    return Err(CliError::Usage(
                        "exact needs --lambda-l and --lambda-r".into(),
                    ));
                };
                commands::exact_real(&g, *l, *r, *marginals)?
            }
        }
        Command::Sample {
            graph,
            lam,
            eps,
            samples,
            seed,
            backend,
            kp,
            m,
            max_m,
        } => commands::sample(
            &read_graph(graph)?,
            commands::SampleArgs {
                lambda_l: lam.lambda_l,
                lambda_r: lam.lambda_r,
                eps: *eps,
                draws: *samples,
                seed: *seed,
                exact_backend: *backend == Backend::Exact,
                eta: kp.eta,
                k_max: kp.k_max,
                m: *m,
                max_m: *max_m,
            },
        )?,
        Command::Decay {
            graph,
            lam,
            m,
            max_size,
            kp,
        } => commands::decay(
            &read_graph(graph)?,
            lam.lambda_l,
            lam.lambda_r,
            *m,
            *max_size,
            kp.eta,
            kp.k_max,
            cli.json,
        )?,
        Command::Zeros {
            graph,
            lambda_l,
            lambda_r,
            samples,
            seed,
        } => commands::zeros(&read_graph(graph)?, *lambda_l, *lambda_r, *samples, *seed)?,
        Command::Gen(args) => {
            let family = gen_family(args)?;
            let graph = family.generate()?;
            let edges = graph.to_edge_list();
            let Some(path) = &cli.out else {
                print!("{edges}");
                return Ok(());
            };
            write_file(path, &edges)?;
            let json = json!({
                "family": family.to_string(),
                "n_L": graph.n_left(),
                "n_R": graph.n_right(),
                "edges": graph.edges().len(),
                "path": path.display().to_string(),
            });
            let text = format!(
                "wrote {family} to {} (n_L = {}, n_R = {}, {} edges)\n",
                path.display(),
                graph.n_left(),
                graph.n_right(),
                graph.edges().len()
            );
            emit(cli.json, None, Document::Report { text, json })?;
            return Ok(());
        }
    };
    emit(cli.json, cli.out.as_deref(), doc)
}

fn emit(json: bool, out: Option<&Path>, doc: Document) -> Result<(), CliError> {
    let body = match doc {
        Document::Report { json: value, .. } if json => {
            let mut s = serde_json::to_string_pretty(&value).expect("JSON values serialize");
            s.push('\n');
            s
        }
        Document::Report { text, .. } => text,
        Document::Raw(s) => s,
    };
    match out {
        Some(path) => write_file(path, &body),
        None => {
            let mut stdout = io::stdout().lock();
            // a closed pipe is not an error worth reporting
            let _ = stdout.write_all(body.as_bytes());
            Ok(())
        }
    }
}

fn write_file(path: &Path, body: &str) -> Result<(), CliError> {
    fs::write(path, body).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn read_graph(path: &Path) -> Result<hardcore::BipartiteGraph, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    hardcore::BipartiteGraph::from_edge_list(&text).map_err(|source| CliError::MalformedGraph {
        path: path.to_path_buf(),
        source,
    })
}

fn gen_family(args: &GenArgs) -> Result<hardcore::GraphFamily, CliError> {
    use hardcore::GraphFamily as F;
    let need = |value: Option<usize>, flag: &str| {
        value.ok_or_else(|| CliError::Usage(format!("family {} needs --{flag}", args.family)))
    };
    Ok(match args.family.as_str() {
        "complete_bipartite" => F::CompleteBipartite {
            a: need(args.a, "a")?,
            b: need(args.b, "b")?,
        },
        "star_center_L" => F::StarCenterLeft {
            k: need(args.k, "k")?,
        },
        "star_center_R" => F::StarCenterRight {
            k: need(args.k, "k")?,
        },
        "random_biregular" => F::RandomBiregular {
            d_left: need(args.d_left, "d-left")?,
            d_right: need(args.d_right, "d-right")?,
            n_left: need(args.n_left, "n-left")?,
            seed: args.seed,
        },
        "even_cycle" => F::EvenCycle {
            n: need(args.n, "n")?,
        },
        "path" => F::Path {
            n: need(args.n, "n")?,
        },
        other => return Err(CliError::Usage(format!("unknown graph family `{other}`"))),
    })
}
