//! Prints the accept/skip trajectory of seeded scenario runs. Handy when
//! tuning generator noise schedules.
//!
//! Usage: cargo run --example scenario_trace [-- -v]

use ledgerlearn::simnet::{run_scenario, ContributionOutcome, SimConfig};

fn main() {
    let verbose = std::env::args().any(|a| a == "-v");
    for seed in [7u64, 42, 101, 202, 303, 404, 505] {
        let cfg = SimConfig {
            difficulty: 1,
            seed,
            ..SimConfig::default()
        };
        let (_state, report) = run_scenario(&cfg, 15).unwrap();
        let accepted = report.incentive_series.len();
        let skipped = report
            .outcomes
            .iter()
            .filter(|o| matches!(o.outcome, ContributionOutcome::BaseRewarded { .. }))
            .count();
        let fns: Vec<u64> = report
            .probe_confusions
            .iter()
            .map(|c| c.false_negatives)
            .collect();
        println!(
            "seed {seed:4}: accepted={accepted:2} skipped={skipped:2} genesis_fnr={:.3} probe_fns={fns:?}",
            report.accepted_series[0].fnr
        );
        if verbose {
            for rec in &report.outcomes {
                match &rec.outcome {
                    ContributionOutcome::Accepted { metrics, incentive, .. } => println!(
                        "  #{:02} accept fnr={:.4} prec={:.4} rec={:.4} incentive={:.4}",
                        rec.index, metrics.fnr, metrics.precision, metrics.recall, incentive
                    ),
                    ContributionOutcome::BaseRewarded { reason, .. } => {
                        println!("  #{:02} skip   reason={}", rec.index, reason.as_str())
                    }
                    ContributionOutcome::Rejected { reason } => {
                        println!("  #{:02} reject {reason}", rec.index)
                    }
                }
            }
        }
    }
}
