use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde::Serialize;

use expcrs_cli::error::EXIT_USAGE;
use expcrs_cli::harness::verify_paper;
use expcrs_cli::scan::{scan, write_jsonl, ScanOptions};
use expcrs_cli::{table_cap, CliError};
use expcrs_core::analytics::{density_report, CSV_HEADER};
use expcrs_core::conditions::classify;
use expcrs_core::oracle::{count_witnesses, decide, SearchConfig, Verdict};

#[derive(Parser)]
#[command(
    name = "expcrs",
    version,
    about = "Decide whether n admits a permutation sigma with i^sigma(i) a complete residue system mod n"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify n and print the verdict with its witness.
    Classify { n: u64 },
    /// Run the exhaustive search on n.
    Search {
        n: u64,
        #[arg(long, default_value_t = 100_000_000)]
        budget_nodes: u64,
        #[arg(long)]
        budget_secs: Option<f64>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Count every witness instead of stopping at the first.
        #[arg(long)]
        count: bool,
    },
    /// Classify every n in [lo, hi] and write JSON lines.
    Scan {
        lo: u64,
        hi: u64,
        /// Cross-check against the search for n up to this bound.
        #[arg(long, default_value_t = 0)]
        oracle_max: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Prime-density statistics up to X.
    Density {
        x: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Extra bounds to report, comma separated.
        #[arg(long, value_delimiter = ',')]
        checkpoints: Vec<u64>,
    },
    /// Rerun the reproduction checks.
    VerifyPaper,
}

fn search_config(
    budget_nodes: u64,
    budget_secs: Option<f64>,
    jobs: usize,
) -> Result<SearchConfig, CliError> {
    if budget_nodes == 0 || jobs == 0 {
        return Err(CliError::Usage(
            "budgets and --jobs must be positive".into(),
        ));
    }
    let time_budget = match budget_secs {
        Some(s) if !(s > 0.0 && s.is_finite()) => {
            return Err(CliError::Usage(format!(
                "--budget-secs must be positive, got {s}"
            )))
        }
        s => s.map(Duration::from_secs_f64),
    };
    Ok(SearchConfig {
        node_budget: budget_nodes,
        time_budget,
        jobs,
        table_cap: table_cap()?,
        ..SearchConfig::default()
    })
}

fn need_modulus(n: u64) -> Result<(), CliError> {
    if n < 2 {
        return Err(CliError::Usage(format!("n must be at least 2, got {n}")));
    }
    Ok(())
}

fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).context("writing JSON")?;
    writeln!(out)?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Classify { n } => {
            need_modulus(n)?;
            print_json(&classify(n))
        }
        Command::Search {
            n,
            budget_nodes,
            budget_secs,
            jobs,
            count,
        } => {
            need_modulus(n)?;
            let cfg = search_config(budget_nodes, budget_secs, jobs)?;
            let out = if count {
                count_witnesses(n, &cfg)
            } else {
                decide(n, &cfg)
            }
            .context("search")?;
            print_json(&out)?;
            if out.verdict == Verdict::Inconclusive {
                return Err(CliError::Inconclusive(format!(
                    "budget exhausted after {} nodes",
                    out.stats.nodes
                )));
            }
            Ok(())
        }
        Command::Scan {
            lo,
            hi,
            oracle_max,
            jobs,
            out,
        } => {
            let search = search_config(SearchConfig::default().node_budget, None, 1)?;
            let result = scan(&ScanOptions {
                lo,
                hi,
                oracle_max,
                jobs,
                search,
            })?;
            let keep = result
                .disagreement
                .as_ref()
                .map_or(result.records.len(), |d| d.0);
            let records = &result.records[..keep];
            match &out {
                Some(path) => {
                    let file = File::create(path)
                        .with_context(|| format!("creating {}", path.display()))?;
                    write_jsonl(BufWriter::new(file), records)?;
                }
                None => write_jsonl(io::stdout().lock(), records)?,
            }
            if let Some((_, why)) = result.disagreement {
                return Err(CliError::Disagreement(why));
            }
            log::info!("scanned {} values", records.len());
            Ok(())
        }
        Command::Density {
            x,
            csv,
            checkpoints,
        } => {
            let mut bounds = checkpoints;
            bounds.push(x);
            bounds.sort_unstable();
            bounds.dedup();
            let mut reports = Vec::with_capacity(bounds.len());
            for b in bounds {
                reports.push(density_report(b).map_err(|e| CliError::Usage(e.to_string()))?);
            }
            for r in &reports {
                println!(
                    "X = {}: pi = {}, sf = {}, sf/pi = {:.5} (alpha = {}), sophie_germain = {} (estimate {:.1}), gaps = {}",
                    r.bound,
                    r.pi,
                    r.squarefree_shifted,
                    r.sf_over_pi,
                    r.artin,
                    r.sophie_germain,
                    r.sophie_germain_estimate,
                    r.gap_candidates.len()
                );
            }
            if let Some(path) = csv {
                let mut w = csv::Writer::from_path(&path)
                    .with_context(|| format!("creating {}", path.display()))?;
                w.write_record(CSV_HEADER).context("writing CSV")?;
                for r in &reports {
                    w.write_record(r.csv_row()).context("writing CSV")?;
                }
                w.flush()?;
            }
            Ok(())
        }
        Command::VerifyPaper => {
            let items = verify_paper();
            for item in &items {
                println!("{}", item.line());
            }
            let failed: Vec<_> = items.iter().filter(|i| !i.passed).collect();
            match failed.iter().find(|i| i.disagreement) {
                Some(i) => Err(CliError::Disagreement(i.detail.clone())),
                None if failed.is_empty() => Ok(()),
                None => Err(CliError::Other(anyhow::anyhow!(
                    "{} check(s) failed",
                    failed.len()
                ))),
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("expcrs: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
