use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Parser, Subcommand};
use fedsignal::pipeline::{cmd_fetch, cmd_predict, cmd_run, cmd_stats, cmd_tune};
use fedsignal::{Overrides, PipelineConfig, PipelineError};
use fedsignal_core::features::Method;

#[derive(Parser)]
#[command(name = "fedsignal", version, about = "Forecast FOMC rate decisions from macro series and policy text")]
struct Cli {
    /// JSON pipeline configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Upper bound on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Download the configured macro series from FRED (needs FRED_API_KEY).
    Fetch,
    /// Corpus statistics and per-document lexicon sentiment.
    Stats,
    /// Cross-validate, fit, test and explain one method.
    Run {
        #[arg(long)]
        method: Option<Method>,
    },
    /// Random then grid hyperparameter search.
    Tune {
        #[arg(long)]
        method: Option<Method>,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        grid_radius: Option<usize>,
    },
    /// Score a meeting on a given date with a saved model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        as_of: NaiveDate,
    },
}

fn execute(cli: Cli) -> Result<String, PipelineError> {
    let mut cfg = PipelineConfig::load(cli.config.as_deref())?;
    let method = match &cli.command {
        Command::Run { method } | Command::Tune { method, .. } => *method,
        _ => None,
    };
    cfg.apply(&Overrides { seed: cli.seed, threads: cli.threads, out: cli.out, method });
    match cli.command {
        Command::Fetch => {
            let files = cmd_fetch(&cfg)?;
            Ok(format!("wrote {} series to {}", files.len(), cfg.out.join("fred").display()))
        }
        Command::Stats => Ok(format!("wrote {}", cmd_stats(&cfg)?.display())),
        Command::Run { .. } => {
            let r = cmd_run(&cfg)?.report;
            let auc = r.cv.ovr_macro_auc.map_or("n/a".to_string(), |s| format!("{:.4} ± {:.4}", s.mean, s.std));
            let test_auc = r.test.ovr_macro_auc.map_or("n/a".to_string(), |a| format!("{a:.4}"));
            Ok(format!(
                "{} / {}: cv auc {auc}, test auc {test_auc}, test accuracy {:.4}; artifacts in {}",
                r.method,
                r.model,
                r.test.accuracy,
                cfg.out.display()
            ))
        }
        Command::Tune { budget, grid_radius, .. } => {
            if let Some(b) = budget {
                cfg.tuning.random_budget = b;
            }
            if let Some(g) = grid_radius {
                cfg.tuning.grid_radius = g;
            }
            let t = cmd_tune(&cfg)?;
            Ok(format!(
                "best candidate {} of {}: mean cv auc {:.4}; wrote {}",
                t.result.best_index,
                t.result.trail.len(),
                t.result.mean_cv_auc,
                cfg.out.join("tuning.json").display()
            ))
        }
        Command::Predict { model, as_of } => {
            let p = cmd_predict(&cfg, &model, as_of)?;
            Ok(serde_json::to_string(&p).expect("prediction serializes"))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
