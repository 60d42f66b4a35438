//! Operator entry point. Every subcommand is a thin shell over the library
//! modules; no business logic lives here.
//!
//! Configuration comes from a key = value file (`--config` or the
//! LEDGERLEARN_CONFIG environment variable), overridden by `--set key=value`
//! flags and the dedicated flags of each subcommand. The effective config is
//! printed to stderr at startup. Exit codes: 0 success, 1 domain error, 2
//! usage error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::canonical::to_canonical_json;
use crate::contracts::{account_id, Role};
use crate::ingest::{generate_csv, load_csv, prepare, select_features, GeneratorParams};
use crate::learner::FeatureScaler;
use crate::ledger::verify_chain;
use crate::metrics::MetricsReport;
use crate::sampling::Dataset;
use crate::simnet::{
    balance_and_split, bench_mining, bench_to_csv, contribute, init_network, persist, query,
    run_scenario, ContributionOutcome, ScenarioReport, SimConfig, SimState,
};

#[derive(Parser)]
#[command(name = "ledgerlearn", version, about = "Collaborative fraud-detection ledger")]
struct Cli {
    /// Key = value config file; defaults to $LEDGERLEARN_CONFIG when set.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Where journals, models, and counters live.
    #[arg(long, global = true, default_value = "ledgerlearn-data")]
    data_dir: PathBuf,
    /// Emit machine-readable JSON instead of human tables.
    #[arg(long, global = true)]
    json: bool,
    /// Override one config key, repeatable: --set difficulty=3
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the initial model from a CSV and mine the genesis block.
    Init {
        /// Training CSV in the transaction schema.
        #[arg(long)]
        train: PathBuf,
        /// Contributor organizations to register, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "org-1,org-2,org-3")]
        contributors: Vec<String>,
    },
    /// Submit a dataset; pays out per the gate decision.
    Contribute {
        csv: PathBuf,
        /// Registration name of the submitting contributor.
        #[arg(long = "as", value_name = "NAME", default_value = "org-1")]
        contributor: String,
    },
    /// Predict one feature row with the current best model.
    Query {
        /// JSON array, e.g. '[1.0,100.0,5000.0,5000.0,0.0,0.0,5000.0]'
        row: String,
        /// Registration name of the caller.
        #[arg(long = "as", value_name = "NAME", default_value = "user-1")]
        caller: String,
    },
    /// Inspect or verify the block journal.
    Chain {
        #[command(subcommand)]
        action: ChainAction,
    },
    /// Measure train/evaluate/mine phase times across difficulties and volumes.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        difficulties: Vec<u8>,
        #[arg(long, value_delimiter = ',', default_value = "500,1000")]
        volumes: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        repeats: u32,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Write the CSV table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a full deterministic scenario and write its artifacts.
    Simulate {
        #[arg(long, default_value_t = 15)]
        contributions: u32,
        #[arg(long)]
        seed: Option<u64>,
        /// Artifact directory; defaults to <data-dir>/scenario-<seed>.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic transaction CSV.
    GenerateData {
        #[arg(long)]
        rows: usize,
        #[arg(long, default_value_t = 0.0013)]
        fraud_rate: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the JSON-over-HTTP node interface.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
}

#[derive(Subcommand)]
enum ChainAction {
    /// Reload the journal and run the full integrity audit.
    Verify,
    /// Print the chain.
    Show,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Message(String),
    #[error("config key {0} is not recognized")]
    UnknownKey(String),
    #[error("config value for {key} does not parse: {value}")]
    BadValue { key: String, value: String },
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Message(e.to_string())
    }
}

macro_rules! impl_from_display {
    ($($ty:ty),*) => {$(
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self { CliError::Message(e.to_string()) }
        }
    )*};
}
impl_from_display!(
    crate::simnet::SimError,
    crate::ingest::IngestError,
    crate::sampling::SamplingError,
    crate::learner::LearnerError,
    crate::ledger::LedgerError,
    crate::contracts::ContractError,
    serde_json::Error
);

/// Parses `key = value` lines; `#` starts a comment.
fn parse_config_file(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut pairs = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Message(format!("config line is not key = value: {line}")))?;
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

fn apply_key(cfg: &mut SimConfig, key: &str, value: &str) -> Result<(), CliError> {
    fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
        value.parse().map_err(|_| CliError::BadValue {
            key: key.to_string(),
            value: value.to_string(),
        })
    }
    match key {
        "difficulty" => cfg.difficulty = parse(key, value)?,
        "seed" => cfg.seed = parse(key, value)?,
        "split_ratio" => cfg.split_ratio = parse(key, value)?,
        "beta" => cfg.beta = parse(key, value)?,
        "epsilon" => cfg.epsilon = parse(key, value)?,
        "balance_fraction" => cfg.balance_fraction = parse(key, value)?,
        "k" => cfg.k = parse(key, value)?,
        "base_incentive" => cfg.base_incentive = parse(key, value)?,
        "initial_price" => cfg.initial_price = parse(key, value)?,
        "initial_gamma" => cfg.initial_gamma = parse(key, value)?,
        "gamma_step" => cfg.gamma_step = parse(key, value)?,
        "n_verifier_nodes" => cfg.n_verifier_nodes = parse(key, value)?,
        "clock_start" => cfg.clock_start = parse(key, value)?,
        "max_step" | "c" => cfg.max_step = parse(key, value)?,
        "tolerance" | "tol" => cfg.tolerance = parse(key, value)?,
        "max_epochs" => cfg.max_epochs = parse(key, value)?,
        "epochs_per_batch" => cfg.epochs_per_batch = parse(key, value)?,
        "smote_test_side" => cfg.smote_test_side = parse(key, value)?,
        "drop_step" => cfg.drop_step = parse(key, value)?,
        "mine_workers" => cfg.mine_workers = parse(key, value)?,
        "salt" => cfg.salt = value.to_string(),
        "regulator_name" => cfg.regulator_name = value.to_string(),
        other => return Err(CliError::UnknownKey(other.to_string())),
    }
    Ok(())
}

/// Resolves the effective config: defaults, then file, then --set overrides.
fn effective_config(cli: &Cli) -> Result<SimConfig, CliError> {
    let mut cfg = SimConfig::default();
    let path = cli
        .config
        .clone()
        .or_else(|| std::env::var_os("LEDGERLEARN_CONFIG").map(PathBuf::from));
    if let Some(path) = path {
        for (key, value) in parse_config_file(&fs::read_to_string(&path)?)? {
            apply_key(&mut cfg, &key, &value)?;
        }
    }
    for item in &cli.overrides {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| CliError::Message(format!("--set expects KEY=VALUE, got {item}")))?;
        apply_key(&mut cfg, key.trim(), value.trim())?;
    }
    Ok(cfg)
}

/// Runs the CLI; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return 2;
        }
    };
    let cfg = match effective_config(&cli) {
        Ok(cfg) => cfg,
        Err(err) => {
            eprintln!("{}", to_canonical_json(&serde_json::json!({ "error": err.to_string() })));
            return 2;
        }
    };
    eprintln!("config: {}", to_canonical_json(&cfg));
    match dispatch(&cli, cfg) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("{}", to_canonical_json(&serde_json::json!({ "error": err.to_string() })));
            1
        }
    }
}

fn load_state(dir: &Path) -> Result<SimState, CliError> {
    if !dir.join("config.json").exists() {
        return Err(CliError::Message(format!(
            "no initialized network under {} (run `init` first)",
            dir.display()
        )));
    }
    Ok(persist::load_state(dir)?)
}

fn ingest_file(path: &Path, cfg: &SimConfig) -> Result<Dataset, CliError> {
    let raw = load_csv(path)?;
    let (clean, _) = prepare(&raw)?;
    Ok(select_features(&clean, cfg.drop_step)?)
}

fn print_outcome(json: bool, outcome: &ContributionOutcome) {
    if json {
        println!("{}", to_canonical_json(outcome));
        return;
    }
    match outcome {
        ContributionOutcome::Accepted {
            block_number,
            incentive,
            model_hash,
            metrics,
        } => {
            println!("accepted: block #{block_number}, incentive {incentive:.6}");
            println!("  model {model_hash}");
            println!(
                "  fnr {:.6}  precision {:.6}  recall {:.6}  fbeta {:.6}",
                metrics.fnr, metrics.precision, metrics.recall, metrics.fbeta
            );
        }
        ContributionOutcome::BaseRewarded { amount, reason } => {
            println!("base reward {amount} (skip: {})", reason.as_str());
        }
        ContributionOutcome::Rejected { reason } => println!("rejected: {reason}"),
    }
}

fn metrics_csv(report: &ScenarioReport) -> String {
    let mut out = String::from(
        "update,fnr,precision,recall,fbeta,testing_accuracy,incentive\n",
    );
    let line = |i: usize, m: &MetricsReport, incentive: Option<f64>| {
        format!(
            "{},{},{},{},{},{},{}\n",
            i,
            m.fnr,
            m.precision,
            m.recall,
            m.fbeta,
            m.testing_accuracy,
            incentive.map_or(String::new(), |v| v.to_string())
        )
    };
    for (i, m) in report.accepted_series.iter().enumerate() {
        let incentive = if i == 0 {
            None
        } else {
            report.incentive_series.get(i - 1).copied()
        };
        out.push_str(&line(i, m, incentive));
    }
    out
}

fn dispatch(cli: &Cli, cfg: SimConfig) -> Result<i32, CliError> {
    match &cli.command {
        Command::Init { train, contributors } => {
            let ds = ingest_file(train, &cfg)?;
            let provisional = FeatureScaler::fit(&ds, &crate::ingest::MONETARY_FEATURES);
            let (train_ds, test_ds) = balance_and_split(
                &cfg,
                &ds,
                crate::simnet::derive_seed(cfg.seed, "genesis-split", 0),
                Some(&provisional),
            )?;
            let mut state = init_network(&cfg, &train_ds, &test_ds)?;
            for name in contributors {
                state.register(name, Role::Contributor)?;
            }
            state.register("user-1", Role::User)?;
            persist::save_state(&state, &cli.data_dir)?;
            if cli.json {
                let accounts: BTreeMap<_, _> = state
                    .contract
                    .accounts
                    .values()
                    .map(|a| (a.id.clone(), format!("{:?}", a.role)))
                    .collect();
                println!(
                    "{}",
                    to_canonical_json(&serde_json::json!({
                        "genesis_hash": state.chain.tip_hash(),
                        "model_hash": state.contract.current_model_hash,
                        "metrics": state.contract.best,
                        "accounts": accounts,
                    }))
                );
            } else {
                println!("genesis block mined: {}", state.chain.tip_hash().unwrap_or_default());
                println!("model {}", state.contract.current_model_hash);
                println!("accounts:");
                for account in state.contract.accounts.values() {
                    println!("  {:?}\t{}", account.role, account.id);
                }
            }
            Ok(0)
        }
        Command::Contribute { csv, contributor } => {
            let mut state = load_state(&cli.data_dir)?;
            let id = account_id(contributor, &state.config.salt);
            let bytes = fs::read(csv)?;
            let outcome = contribute(&mut state, &id, &bytes)?;
            persist::save_state(&state, &cli.data_dir)?;
            print_outcome(cli.json, &outcome);
            Ok(if matches!(outcome, ContributionOutcome::Rejected { .. }) {
                1
            } else {
                0
            })
        }
        Command::Query { row, caller } => {
            let mut state = load_state(&cli.data_dir)?;
            let id = account_id(caller, &state.config.salt);
            let features: Vec<f64> = serde_json::from_str(row)?;
            let (prediction, model_hash) = query(&mut state, &id, &features)?;
            persist::save_state(&state, &cli.data_dir)?;
            println!(
                "{}",
                to_canonical_json(&serde_json::json!({
                    "prediction": prediction,
                    "model_hash": model_hash,
                }))
            );
            Ok(0)
        }
        Command::Chain { action } => {
            let state = load_state(&cli.data_dir)?;
            match action {
                ChainAction::Verify => match verify_chain(&state.chain) {
                    Ok(()) => {
                        if cli.json {
                            println!(
                                "{}",
                                to_canonical_json(
                                    &serde_json::json!({ "ok": true, "length": state.chain.blocks.len() })
                                )
                            );
                        } else {
                            println!("ok ({} blocks)", state.chain.blocks.len());
                        }
                        Ok(0)
                    }
                    Err(fault) => {
                        println!(
                            "{}",
                            to_canonical_json(&serde_json::json!({
                                "ok": false,
                                "first_invalid_index": fault.index,
                            }))
                        );
                        Ok(1)
                    }
                },
                ChainAction::Show => {
                    if cli.json {
                        println!("{}", to_canonical_json(&state.chain));
                    } else {
                        for block in &state.chain.blocks {
                            let entry = &block.entries[0];
                            println!(
                                "#{} ts={} nonce={} fnr={:.6} contributor={} incentive={}",
                                block.number,
                                block.timestamp,
                                block.nonce,
                                entry.metrics.fnr,
                                &entry.contributor_id[..12],
                                entry.incentive_paid
                            );
                        }
                    }
                    Ok(0)
                }
            }
        }
        Command::Bench {
            difficulties,
            volumes,
            repeats,
            workers,
            out,
        } => {
            let rows = bench_mining(&cfg, difficulties, volumes, *repeats, *workers)?;
            let csv = bench_to_csv(&rows);
            match out {
                Some(path) => fs::write(path, csv)?,
                None if cli.json => println!("{}", to_canonical_json(&rows)),
                None => print!("{csv}"),
            }
            Ok(0)
        }
        Command::Simulate {
            contributions,
            seed,
            out,
        } => {
            let mut cfg = cfg;
            if let Some(seed) = seed {
                cfg.seed = *seed;
            }
            let (state, report) = run_scenario(&cfg, *contributions)?;
            let out_dir = out
                .clone()
                .unwrap_or_else(|| cli.data_dir.join(format!("scenario-{}", cfg.seed)));
            fs::create_dir_all(&out_dir)?;
            fs::write(out_dir.join("report.json"), to_canonical_json(&report))?;
            fs::write(out_dir.join("metrics.csv"), metrics_csv(&report))?;
            persist::save_state(&state, &out_dir)?;
            if cli.json {
                println!("{}", to_canonical_json(&report));
            } else {
                let accepted = report.incentive_series.len();
                println!(
                    "scenario seed {}: {} contributions, {} accepted, chain length {}, tip {}",
                    cfg.seed,
                    report.n_contributions,
                    accepted,
                    report.chain_length,
                    report.chain_tip_hash
                );
                println!(
                    "final fnr {:.6}, price {:.4}, gamma {:.4}",
                    report.accepted_series.last().map_or(f64::NAN, |m| m.fnr),
                    report.final_price,
                    report.final_gamma
                );
                println!("artifacts in {}", out_dir.display());
            }
            Ok(0)
        }
        Command::GenerateData {
            rows,
            fraud_rate,
            seed,
            noise,
            out,
        } => {
            let csv = generate_csv(GeneratorParams::new(*rows, *fraud_rate, *seed).with_noise(*noise))?;
            match out {
                Some(path) => fs::write(path, csv)?,
                None => print!("{csv}"),
            }
            Ok(0)
        }
        Command::Serve { port } => {
            let state = load_state(&cli.data_dir)?;
            let data_dir = cli.data_dir.clone();
            let runtime = tokio::runtime::Builder::new_multi_thread()
                .enable_all()
                .build()?;
            runtime.block_on(async move {
                let addr: std::net::SocketAddr = ([127, 0, 0, 1], *port).into();
                let (bound, handle) =
                    crate::service::serve_on_with_persistence(state, addr, Some(data_dir)).await?;
                eprintln!("serving on http://{bound}");
                handle
                    .await
                    .map_err(|e| std::io::Error::other(e.to_string()))?
            })?;
            Ok(0)
        }
    }
}
