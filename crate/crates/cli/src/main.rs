use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use hyperbench::ergm::{fit_mple, fit_report, ErgmSpec, MpleOptions, DEFAULT_DECAY};
use hyperbench::graph::{core_k, graph_stats};
use hyperbench::hypergraph::{derive_hypergraph, export_hypergraph};
use hyperbench::pipeline::{load_dataset, pivot_table, run_experiment, write_outputs, ExperimentConfig, OneOrMany};

#[derive(Parser)]
#[command(name = "hyperbench", version, about = "Missing-interaction inference benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment grid and write results.csv / aggregate.csv.
    Run {
        /// TOML experiment manifest; defaults apply to missing fields.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Registry keys or file paths.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        datasets: Option<Vec<String>>,
        /// LP-CN, LP-AA, HP-CN, HP-AA, HP-Null, HP-MatComp, HP-CHESHIRE, ERGM
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        methods: Option<Vec<String>>,
        /// Fractions of hyperedges to hide, each in (0, 1).
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        rho: Option<Vec<f64>>,
        /// mcar or mnar
        #[arg(long)]
        mechanism: Option<String>,
        /// Trials per (dataset, method, rho) cell.
        #[arg(long)]
        trials: Option<usize>,
        /// Trial t uses seed + t.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write chart.svg.
        #[arg(long)]
        chart: bool,
    },
    /// Print node, edge, density and triangle counts.
    Stats {
        #[arg(long)]
        dataset: String,
    },
    /// List the maximal cliques (size >= 3) of the clique hypergraph.
    Cliques {
        #[arg(long)]
        dataset: String,
        /// Write the full hypergraph (dyads included) here instead.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Fit the edges + gwdegree + gwesp ERGM by pseudolikelihood.
    FitErgm {
        #[arg(long)]
        dataset: String,
        /// Restrict to the k highest-activity nodes.
        #[arg(long)]
        core: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_DECAY)]
        degree_decay: f64,
        #[arg(long, default_value_t = DEFAULT_DECAY)]
        esp_decay: f64,
    },
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Run {
            config,
            datasets,
            methods,
            rho,
            mechanism,
            trials,
            seed,
            out,
            chart,
        } => {
            let mut cfg = match &config {
                Some(path) => ExperimentConfig::from_file(path)?,
                None => ExperimentConfig::default(),
            };
            if let Some(v) = datasets {
                cfg.datasets = v;
            }
            if let Some(v) = methods {
                cfg.methods = v;
            }
            if let Some(v) = rho {
                cfg.rho = OneOrMany::Many(v);
            }
            if let Some(v) = mechanism {
                cfg.mechanism = v;
            }
            if let Some(v) = trials {
                cfg.trials = v;
            }
            if let Some(v) = seed {
                cfg.seed = v;
            }
            if let Some(v) = out {
                cfg.out = v;
            }
            cfg.chart |= chart;
            cfg.validate()?;

            let output = run_experiment(&cfg)?;
            let paths = write_outputs(&cfg.out, &output, cfg.chart)
                .with_context(|| format!("writing outputs to {}", cfg.out.display()))?;
            print!("{}", pivot_table(&output.aggregate));
            let failed = output.results.iter().filter(|r| !r.is_ok()).count();
            println!(
                "{} trials ({} not ok) -> {}, {}",
                output.results.len(),
                failed,
                paths.results.display(),
                paths.aggregate.display()
            );
            if let Some(p) = paths.chart {
                println!("chart -> {}", p.display());
            }
        }
        Command::Stats { dataset } => {
            let d = load_dataset(&dataset)?;
            let s = graph_stats(&d.graph)?;
            println!("dataset,nodes,edges,density,triangles");
            println!("{},{},{},{},{}", d.name, s.nodes, s.edges, s.density_display(), s.triangles);
        }
        Command::Cliques { dataset, output } => {
            let d = load_dataset(&dataset)?;
            let h = derive_hypergraph(&d.graph)?;
            match output {
                Some(path) => {
                    std::fs::write(&path, export_hypergraph(&h, d.graph.labels()))
                        .with_context(|| format!("writing {}", path.display()))?;
                    println!("{} hyperedges -> {}", h.len(), path.display());
                }
                None => {
                    for e in h.edges().iter().filter(|e| e.len() >= 3) {
                        let labels: Vec<&str> = e.iter().map(|&i| d.graph.label(i)).collect();
                        println!("{}", labels.join(","));
                    }
                }
            }
        }
        Command::FitErgm {
            dataset,
            core,
            degree_decay,
            esp_decay,
        } => {
            let d = load_dataset(&dataset)?;
            let g = match core {
                Some(k) => {
                    let volumes = d.volumes.clone().unwrap_or_else(|| d.graph.degrees());
                    core_k(&d.graph, &volumes, k)?
                }
                None => d.graph.clone(),
            };
            let spec = ErgmSpec::standard(degree_decay, esp_decay)?;
            let fit = fit_mple(&g, &spec, &MpleOptions::default())?;
            print!("{}", fit_report(&fit));
        }
    }
    Ok(())
}
