//! PaySim-schema CSV loading, the data-preparation filter, feature
//! selection/encoding, and a desk-scale synthetic data generator.
//!
//! Loading is permissive (empty cells survive as nulls), preparation rejects
//! the bad rows with reasons, and feature selection keeps only the TRANSFER
//! and CASH-OUT rows where fraud occurs.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sampling::Dataset;

/// The eleven schema columns, in the order the generator emits them.
pub const COLUMNS: [&str; 11] = [
    "step",
    "type",
    "amount",
    "nameOrig",
    "nameDest",
    "oldbalanceOrig",
    "newbalanceOrig",
    "oldbalanceDest",
    "newbalanceDest",
    "isFlaggedFraud",
    "isFraud",
];

/// Monetary columns that take a log1p before min-max scaling.
pub const MONETARY_FEATURES: [&str; 5] = [
    "amount",
    "oldbalanceOrig",
    "newbalanceOrig",
    "oldbalanceDest",
    "newbalanceDest",
];

/// Features retained after selection, in vector order.
pub const SELECTED_FEATURES: [&str; 7] = [
    "type",
    "step",
    "amount",
    "oldbalanceOrig",
    "newbalanceOrig",
    "oldbalanceDest",
    "newbalanceDest",
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IngestError {
    #[error("missing column {0}")]
    MissingColumn(String),
    #[error("malformed row at line {line}")]
    MalformedRow { line: usize },
    #[error("every row was rejected during preparation")]
    AllRowsRejected,
    #[error("no TRANSFER or CASH-OUT rows to select")]
    NoEligibleRows,
    #[error("invalid generator parameters: {0}")]
    InvalidParams(&'static str),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for IngestError {
    fn from(e: std::io::Error) -> Self {
        IngestError::Io(e.to_string())
    }
}

/// The five transaction types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TxType {
    CashIn,
    CashOut,
    Debit,
    Payment,
    Transfer,
}

impl TxType {
    pub fn as_str(self) -> &'static str {
        match self {
            TxType::CashIn => "CASH-IN",
            TxType::CashOut => "CASH-OUT",
            TxType::Debit => "DEBIT",
            TxType::Payment => "PAYMENT",
            TxType::Transfer => "TRANSFER",
        }
    }

    /// Accepts both the hyphenated spelling and the public dataset's
    /// underscore spelling, case-insensitively.
    pub fn parse(s: &str) -> Option<TxType> {
        match s.trim().to_ascii_uppercase().replace('_', "-").as_str() {
            "CASH-IN" => Some(TxType::CashIn),
            "CASH-OUT" => Some(TxType::CashOut),
            "DEBIT" => Some(TxType::Debit),
            "PAYMENT" => Some(TxType::Payment),
            "TRANSFER" => Some(TxType::Transfer),
            _ => None,
        }
    }
}

/// One row as loaded: empty cells survive as `None` so preparation can
/// reject them with a reason instead of the loader crashing.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTransaction {
    pub step: Option<i64>,
    pub tx_type: String,
    pub amount: Option<f64>,
    pub name_orig: String,
    pub name_dest: String,
    pub oldbalance_orig: Option<f64>,
    pub newbalance_orig: Option<f64>,
    pub oldbalance_dest: Option<f64>,
    pub newbalance_dest: Option<f64>,
    pub is_flagged_fraud: Option<i64>,
    pub is_fraud: Option<i64>,
}

/// A row that passed preparation: every field present, finite, non-negative,
/// type recognized, labels binary.
#[derive(Debug, Clone, PartialEq)]
pub struct CleanTransaction {
    pub step: u32,
    pub tx_type: TxType,
    pub amount: f64,
    pub name_orig: String,
    pub name_dest: String,
    pub oldbalance_orig: f64,
    pub newbalance_orig: f64,
    pub oldbalance_dest: f64,
    pub newbalance_dest: f64,
    pub is_flagged_fraud: u8,
    pub is_fraud: u8,
}

/// Why preparation rejected a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    Null,
    NonFinite,
    Negative,
    UnknownType,
    Label,
    Range,
}

/// Preparation outcome: how many rows came in and which were rejected.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PrepareReport {
    pub total: usize,
    pub rejected: Vec<(usize, RejectReason)>,
}

fn parse_optional_f64(cell: &str, line: usize) -> Result<Option<f64>, IngestError> {
    let cell = cell.trim();
    if cell.is_empty() {
        return Ok(None);
    }
    cell.parse::<f64>()
        .map(Some)
        .map_err(|_| IngestError::MalformedRow { line })
}

fn parse_optional_i64(cell: &str, line: usize) -> Result<Option<i64>, IngestError> {
    let cell = cell.trim();
    if cell.is_empty() {
        return Ok(None);
    }
    cell.parse::<i64>()
        .map(Some)
        .map_err(|_| IngestError::MalformedRow { line })
}

/// Loads a PaySim-schema CSV. Column names are matched case-insensitively
/// and the public dataset's `oldbalanceOrg` spelling is aliased to
/// `oldbalanceOrig`. The row count is preserved; semantic filtering happens
/// in [`prepare`].
pub fn load_csv(path: &Path) -> Result<Vec<RawTransaction>, IngestError> {
    let file = std::fs::File::open(path)?;
    load_csv_reader(file)
}

pub fn load_csv_reader<R: std::io::Read>(reader: R) -> Result<Vec<RawTransaction>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|_| IngestError::MalformedRow { line: 1 })?
        .clone();
    let find = |name: &str| -> Result<usize, IngestError> {
        let lowered = name.to_ascii_lowercase();
        headers
            .iter()
            .position(|h| {
                let h = h.trim().to_ascii_lowercase();
                h == lowered || (lowered == "oldbalanceorig" && h == "oldbalanceorg")
            })
            .ok_or_else(|| IngestError::MissingColumn(name.to_string()))
    };
    let idx: Vec<usize> = COLUMNS.iter().map(|c| find(c)).collect::<Result<_, _>>()?;
    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2; // header is line 1
        let record = record.map_err(|_| IngestError::MalformedRow { line })?;
        let cell = |c: usize| record.get(idx[c]).unwrap_or("").to_string();
        out.push(RawTransaction {
            step: parse_optional_i64(&cell(0), line)?,
            tx_type: cell(1).trim().to_string(),
            amount: parse_optional_f64(&cell(2), line)?,
            name_orig: cell(3).trim().to_string(),
            name_dest: cell(4).trim().to_string(),
            oldbalance_orig: parse_optional_f64(&cell(5), line)?,
            newbalance_orig: parse_optional_f64(&cell(6), line)?,
            oldbalance_dest: parse_optional_f64(&cell(7), line)?,
            newbalance_dest: parse_optional_f64(&cell(8), line)?,
            is_flagged_fraud: parse_optional_i64(&cell(9), line)?,
            is_fraud: parse_optional_i64(&cell(10), line)?,
        });
    }
    Ok(out)
}

fn vet(row: &RawTransaction) -> Result<CleanTransaction, RejectReason> {
    let step = row.step.ok_or(RejectReason::Null)?;
    let amount = row.amount.ok_or(RejectReason::Null)?;
    let oldbalance_orig = row.oldbalance_orig.ok_or(RejectReason::Null)?;
    let newbalance_orig = row.newbalance_orig.ok_or(RejectReason::Null)?;
    let oldbalance_dest = row.oldbalance_dest.ok_or(RejectReason::Null)?;
    let newbalance_dest = row.newbalance_dest.ok_or(RejectReason::Null)?;
    let is_flagged_fraud = row.is_flagged_fraud.ok_or(RejectReason::Null)?;
    let is_fraud = row.is_fraud.ok_or(RejectReason::Null)?;
    if row.tx_type.is_empty() {
        return Err(RejectReason::Null);
    }
    let money = [amount, oldbalance_orig, newbalance_orig, oldbalance_dest, newbalance_dest];
    if money.iter().any(|v| !v.is_finite()) {
        return Err(RejectReason::NonFinite);
    }
    if money.iter().any(|&v| v < 0.0) {
        return Err(RejectReason::Negative);
    }
    let tx_type = TxType::parse(&row.tx_type).ok_or(RejectReason::UnknownType)?;
    if !(0..=1).contains(&is_fraud) || !(0..=1).contains(&is_flagged_fraud) {
        return Err(RejectReason::Label);
    }
    if step < 1 {
        return Err(RejectReason::Range);
    }
    Ok(CleanTransaction {
        step: step as u32,
        tx_type,
        amount,
        name_orig: row.name_orig.clone(),
        name_dest: row.name_dest.clone(),
        oldbalance_orig,
        newbalance_orig,
        oldbalance_dest,
        newbalance_dest,
        is_flagged_fraud: is_flagged_fraud as u8,
        is_fraud: is_fraud as u8,
    })
}

/// The data-preparation filter: rejects rows with nulls, non-finite values,
/// negative amounts, or unknown types, returning the cleaned rows plus a
/// rejection report.
pub fn prepare(records: &[RawTransaction]) -> Result<(Vec<CleanTransaction>, PrepareReport), IngestError> {
    let mut clean = Vec::with_capacity(records.len());
    let mut report = PrepareReport {
        total: records.len(),
        rejected: Vec::new(),
    };
    for (i, row) in records.iter().enumerate() {
        match vet(row) {
            Ok(tx) => clean.push(tx),
            Err(reason) => report.rejected.push((i, reason)),
        }
    }
    if clean.is_empty() {
        return Err(IngestError::AllRowsRejected);
    }
    Ok((clean, report))
}

/// Keeps only TRANSFER and CASH-OUT rows, drops the identifier columns and
/// the flagged-fraud indicator, and encodes the feature vector
/// `[type, step, amount, oldbalanceOrig, newbalanceOrig, oldbalanceDest,
/// newbalanceDest]` with TRANSFER = 0 and CASH-OUT = 1. The label is
/// `isFraud`. `drop_step` removes the hour index for deployments that do
/// not want it.
pub fn select_features(records: &[CleanTransaction], drop_step: bool) -> Result<Dataset, IngestError> {
    let feature_names: Vec<String> = SELECTED_FEATURES
        .iter()
        .filter(|&&n| !(drop_step && n == "step"))
        .map(|&n| n.to_string())
        .collect();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for tx in records {
        let encoded = match tx.tx_type {
            TxType::Transfer => 0.0,
            TxType::CashOut => 1.0,
            _ => continue,
        };
        let mut row = Vec::with_capacity(feature_names.len());
        row.push(encoded);
        if !drop_step {
            row.push(f64::from(tx.step));
        }
        row.extend_from_slice(&[
            tx.amount,
            tx.oldbalance_orig,
            tx.newbalance_orig,
            tx.oldbalance_dest,
            tx.newbalance_dest,
        ]);
        rows.push(row);
        labels.push(tx.is_fraud);
    }
    if rows.is_empty() {
        return Err(IngestError::NoEligibleRows);
    }
    Ok(Dataset {
        feature_names,
        rows,
        labels,
    })
}

/// Synthetic generator parameters. `noise` is the probability that a fraud
/// row's account-draining signature is destroyed (balances rewritten to look
/// honest while the label stays 1), which caps how well any model can score
/// on the batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub n_rows: usize,
    pub fraud_rate: f64,
    pub seed: u64,
    pub noise: f64,
}

impl GeneratorParams {
    pub fn new(n_rows: usize, fraud_rate: f64, seed: u64) -> GeneratorParams {
        GeneratorParams {
            n_rows,
            fraud_rate,
            seed,
            noise: 0.0,
        }
    }

    pub fn with_noise(mut self, noise: f64) -> GeneratorParams {
        self.noise = noise;
        self
    }
}

fn round_cents(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

/// Standard normal via Box-Muller so the generator depends only on the
/// seeded uniform stream.
fn normal(rng: &mut ChaCha20Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-12);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Generates schema-compatible rows. Fraud sits in TRANSFER/CASH-OUT with
/// `amount == oldbalanceOrig` and `newbalanceOrig == 0` (the draining
/// pattern), honest rows draw log-normal amounts that never empty the
/// account, so the signal is linearly separable at zero noise.
pub fn generate_rows(params: GeneratorParams) -> Result<Vec<CleanTransaction>, IngestError> {
    if params.n_rows < 100 {
        return Err(IngestError::InvalidParams("n_rows must be at least 100"));
    }
    if !(params.fraud_rate > 0.0 && params.fraud_rate <= 0.5) {
        return Err(IngestError::InvalidParams("fraud_rate must lie in (0, 0.5]"));
    }
    if !(0.0..=1.0).contains(&params.noise) {
        return Err(IngestError::InvalidParams("noise must lie in [0, 1]"));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(params.seed);
    let n_fraud = ((params.n_rows as f64) * params.fraud_rate).round() as usize;
    let mut is_fraud = vec![false; params.n_rows];
    is_fraud[..n_fraud].fill(true);
    for i in (1..is_fraud.len()).rev() {
        let j = rng.random_range(0..=i);
        is_fraud.swap(i, j);
    }

    let mut rows = Vec::with_capacity(params.n_rows);
    for fraud in is_fraud {
        let step = rng.random_range(1..=744u32);
        let name_orig = format!("C{:09}", rng.random_range(0..1_000_000_000u64));
        if fraud {
            let tx_type = if rng.random::<f64>() < 0.5 {
                TxType::Transfer
            } else {
                TxType::CashOut
            };
            let name_dest = format!("C{:09}", rng.random_range(0..1_000_000_000u64));
            // A destroyed row keeps the fraud label but draws the honest
            // body, so the only remaining signal is the draining pattern on
            // the surviving rows.
            let destroyed = rng.random::<f64>() < params.noise;
            let (amount, oldbalance_orig, newbalance_orig) = if destroyed {
                honest_balances(&mut rng)
            } else {
                let old = round_cents((6.0 + 1.3 * normal(&mut rng)).exp().max(100.0));
                (old, old, 0.0)
            };
            let (oldbalance_dest, newbalance_dest) = dest_balances(&mut rng, amount);
            rows.push(CleanTransaction {
                step,
                tx_type,
                amount,
                name_orig,
                name_dest,
                oldbalance_orig,
                newbalance_orig,
                oldbalance_dest,
                newbalance_dest,
                is_flagged_fraud: 0,
                is_fraud: 1,
            });
        } else {
            let tx_type = match rng.random_range(0..100u32) {
                0..=34 => TxType::Payment,
                35..=59 => TxType::CashOut,
                60..=74 => TxType::CashIn,
                75..=89 => TxType::Transfer,
                _ => TxType::Debit,
            };
            let name_dest = if matches!(tx_type, TxType::Payment | TxType::Debit) {
                format!("M{:09}", rng.random_range(0..1_000_000_000u64))
            } else {
                format!("C{:09}", rng.random_range(0..1_000_000_000u64))
            };
            let (amount, oldbalance_orig, newbalance_orig) = if tx_type == TxType::CashIn {
                let amount = round_cents((4.5 + 1.2 * normal(&mut rng)).exp().max(1.0));
                let old = round_cents(amount * (1.5 + 18.5 * rng.random::<f64>()));
                (amount, old, round_cents(old + amount))
            } else {
                honest_balances(&mut rng)
            };
            let (oldbalance_dest, newbalance_dest) = dest_balances(&mut rng, amount);
            rows.push(CleanTransaction {
                step,
                tx_type,
                amount,
                name_orig,
                name_dest,
                oldbalance_orig,
                newbalance_orig,
                oldbalance_dest,
                newbalance_dest,
                is_flagged_fraud: 0,
                is_fraud: 0,
            });
        }
    }
    Ok(rows)
}

/// Honest pattern: the account covers the amount, sometimes only barely,
/// so the class boundary has real tension near the draining signature.
fn honest_balances(rng: &mut ChaCha20Rng) -> (f64, f64, f64) {
    let amount = round_cents((4.5 + 1.2 * normal(rng)).exp().max(1.0));
    let old = round_cents(amount * (1.1 + 10.0 * rng.random::<f64>()));
    (amount, old, round_cents(old - amount))
}

/// Destination balances drawn identically for every row so the receiving
/// side carries no class signal: some accounts are fresh, some funded.
fn dest_balances(rng: &mut ChaCha20Rng, amount: f64) -> (f64, f64) {
    let old = if rng.random::<f64>() < 0.3 {
        0.0
    } else {
        round_cents((5.0 + 1.5 * normal(rng)).exp())
    };
    (old, round_cents(old + amount))
}

fn display_money(v: f64) -> String {
    format!("{v}")
}

/// Renders rows as a CSV document with the schema header.
pub fn rows_to_csv(rows: &[CleanTransaction]) -> String {
    let mut out = String::new();
    out.push_str(&COLUMNS.join(","));
    out.push('\n');
    for tx in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            tx.step,
            tx.tx_type.as_str(),
            display_money(tx.amount),
            tx.name_orig,
            tx.name_dest,
            display_money(tx.oldbalance_orig),
            display_money(tx.newbalance_orig),
            display_money(tx.oldbalance_dest),
            display_money(tx.newbalance_dest),
            tx.is_flagged_fraud,
            tx.is_fraud
        )
        .expect("write to string");
    }
    out
}

/// Generates a CSV document directly; byte-identical for identical params.
pub fn generate_csv(params: GeneratorParams) -> Result<String, IngestError> {
    Ok(rows_to_csv(&generate_rows(params)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load_str(csv: &str) -> Result<Vec<RawTransaction>, IngestError> {
        load_csv_reader(csv.as_bytes())
    }

    const HEADER: &str = "step,type,amount,nameOrig,nameDest,oldbalanceOrig,newbalanceOrig,oldbalanceDest,newbalanceDest,isFlaggedFraud,isFraud";

    #[test]
    fn loads_well_formed_rows() {
        let csv = format!(
            "{HEADER}\n1,TRANSFER,100.0,C1,C2,100.0,0.0,0.0,100.0,0,1\n2,PAYMENT,10.0,C3,M4,50.0,40.0,5.0,15.0,0,0\n3,CASH-OUT,20.0,C5,C6,60.0,40.0,0.0,20.0,0,0\n"
        );
        let rows = load_str(&csv).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].tx_type, "TRANSFER");
        assert_eq!(rows[1].amount, Some(10.0));
    }

    #[test]
    fn missing_column_is_named() {
        let csv = "step,type,amount\n1,TRANSFER,5\n";
        assert_eq!(
            load_str(csv).unwrap_err(),
            IngestError::MissingColumn("nameOrig".into())
        );
        let no_label = HEADER.replace(",isFraud", ",other");
        let csv = format!("{no_label}\n1,TRANSFER,1,C1,C2,1,0,0,1,0,1\n");
        assert_eq!(
            load_str(&csv).unwrap_err(),
            IngestError::MissingColumn("isFraud".into())
        );
    }

    #[test]
    fn public_dataset_spelling_loads_via_alias() {
        let aliased = HEADER.replace("oldbalanceOrig", "oldbalanceOrg");
        let csv = format!("{aliased}\n1,CASH_OUT,20.0,C5,C6,60.0,40.0,0.0,20.0,0,0\n");
        let rows = load_str(&csv).unwrap();
        assert_eq!(rows[0].oldbalance_orig, Some(60.0));
        // The public dataset's underscore type spelling is recognized too.
        assert_eq!(TxType::parse(&rows[0].tx_type), Some(TxType::CashOut));
    }

    #[test]
    fn public_dataset_column_order_loads_unmodified() {
        // The published file orders its columns differently and spells
        // oldbalanceOrg without the i; lookup is by name, not position.
        let csv = "step,type,amount,nameOrig,oldbalanceOrg,newbalanceOrig,nameDest,oldbalanceDest,newbalanceDest,isFlaggedFraud,isFraud\n\
                   1,TRANSFER,181.0,C1305486145,181.0,0.0,C553264065,0.0,181.0,0,1\n";
        let rows = load_str(csv).unwrap();
        assert_eq!(rows[0].oldbalance_orig, Some(181.0));
        assert_eq!(rows[0].name_dest, "C553264065");
        let (clean, report) = prepare(&rows).unwrap();
        assert!(report.rejected.is_empty());
        assert_eq!(clean[0].is_fraud, 1);
    }

    #[test]
    fn unparseable_cells_are_malformed_rows() {
        let csv = format!("{HEADER}\n1,TRANSFER,abc,C1,C2,1,0,0,1,0,1\n");
        assert_eq!(load_str(&csv).unwrap_err(), IngestError::MalformedRow { line: 2 });
    }

    #[test]
    fn prepare_rejects_with_reasons() {
        let csv = format!(
            "{HEADER}\n1,TRANSFER,,C1,C2,1,0,0,1,0,1\n1,TRANSFER,5,C1,C2,10,5,0,5,0,0\n1,BARTER,5,C1,C2,10,5,0,5,0,0\n1,TRANSFER,-5,C1,C2,10,5,0,5,0,0\n"
        );
        let rows = load_str(&csv).unwrap();
        let (clean, report) = prepare(&rows).unwrap();
        assert_eq!(clean.len(), 1);
        assert_eq!(
            report.rejected,
            vec![
                (0, RejectReason::Null),
                (2, RejectReason::UnknownType),
                (3, RejectReason::Negative)
            ]
        );
    }

    #[test]
    fn prepare_counts_seeded_defects_exactly() {
        let mut rows = generate_rows(GeneratorParams::new(100, 0.1, 5)).unwrap();
        let mut raws: Vec<RawTransaction> = rows
            .drain(..)
            .map(|tx| RawTransaction {
                step: Some(i64::from(tx.step)),
                tx_type: tx.tx_type.as_str().to_string(),
                amount: Some(tx.amount),
                name_orig: tx.name_orig,
                name_dest: tx.name_dest,
                oldbalance_orig: Some(tx.oldbalance_orig),
                newbalance_orig: Some(tx.newbalance_orig),
                oldbalance_dest: Some(tx.oldbalance_dest),
                newbalance_dest: Some(tx.newbalance_dest),
                is_flagged_fraud: Some(i64::from(tx.is_flagged_fraud)),
                is_fraud: Some(i64::from(tx.is_fraud)),
            })
            .collect();
        // Seed exactly seven defects.
        raws[3].amount = None;
        raws[10].tx_type = "GIFT".into();
        raws[20].oldbalance_dest = Some(-1.0);
        raws[33].newbalance_orig = Some(f64::NAN);
        raws[47].is_fraud = Some(7);
        raws[58].step = Some(0);
        raws[71].amount = Some(-0.01);
        let (clean, report) = prepare(&raws).unwrap();
        assert_eq!(report.rejected.len(), 7);
        assert_eq!(clean.len(), 93);
    }

    #[test]
    fn all_rows_rejected_errors() {
        let csv = format!("{HEADER}\n1,TRANSFER,,C1,C2,1,0,0,1,0,1\n");
        let rows = load_str(&csv).unwrap();
        assert_eq!(prepare(&rows).unwrap_err(), IngestError::AllRowsRejected);
    }

    #[test]
    fn selection_requires_eligible_types() {
        let rows = vec![CleanTransaction {
            step: 1,
            tx_type: TxType::Payment,
            amount: 1.0,
            name_orig: "C1".into(),
            name_dest: "M1".into(),
            oldbalance_orig: 2.0,
            newbalance_orig: 1.0,
            oldbalance_dest: 0.0,
            newbalance_dest: 1.0,
            is_flagged_fraud: 0,
            is_fraud: 0,
        }];
        assert_eq!(select_features(&rows, false).unwrap_err(), IngestError::NoEligibleRows);
    }

    #[test]
    fn selection_keeps_transfer_and_cashout_only() {
        let rows = generate_rows(GeneratorParams::new(500, 0.1, 6)).unwrap();
        let eligible = rows
            .iter()
            .filter(|t| matches!(t.tx_type, TxType::Transfer | TxType::CashOut))
            .count();
        let ds = select_features(&rows, false).unwrap();
        assert_eq!(ds.len(), eligible);
        assert!(!ds.feature_names.iter().any(|n| n.contains("name")));
        assert!(!ds.feature_names.iter().any(|n| n == "isFlaggedFraud"));
        assert_eq!(ds.feature_names, SELECTED_FEATURES.map(String::from).to_vec());
        // Brute-force recount of the class balance.
        let fraud = rows
            .iter()
            .filter(|t| matches!(t.tx_type, TxType::Transfer | TxType::CashOut) && t.is_fraud == 1)
            .count();
        assert_eq!(ds.labels.iter().filter(|&&l| l == 1).count(), fraud);
    }

    #[test]
    fn drop_step_flag_removes_the_column() {
        let rows = generate_rows(GeneratorParams::new(200, 0.1, 7)).unwrap();
        let ds = select_features(&rows, true).unwrap();
        assert_eq!(ds.arity(), 6);
        assert!(!ds.feature_names.iter().any(|n| n == "step"));
    }

    #[test]
    fn generator_hits_requested_fraud_count() {
        let rows = generate_rows(GeneratorParams::new(10_000, 0.0013, 8)).unwrap();
        let fraud = rows.iter().filter(|t| t.is_fraud == 1).count();
        assert_eq!(fraud, 13);
    }

    #[test]
    fn generator_is_byte_deterministic() {
        let a = generate_csv(GeneratorParams::new(300, 0.05, 9)).unwrap();
        let b = generate_csv(GeneratorParams::new(300, 0.05, 9)).unwrap();
        assert_eq!(a, b);
        let c = generate_csv(GeneratorParams::new(300, 0.05, 10)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn generated_files_load_and_prepare_cleanly() {
        let csv = generate_csv(GeneratorParams::new(400, 0.08, 11)).unwrap();
        let rows = load_str(&csv).unwrap();
        assert_eq!(rows.len(), 400);
        let (clean, report) = prepare(&rows).unwrap();
        assert!(report.rejected.is_empty());
        assert_eq!(clean.len(), 400);
        let fraud = clean.iter().filter(|t| t.is_fraud == 1).count();
        assert_eq!(fraud, 32);
    }

    #[test]
    fn generator_validates_params() {
        assert!(matches!(
            generate_rows(GeneratorParams::new(50, 0.1, 1)),
            Err(IngestError::InvalidParams(_))
        ));
        assert!(matches!(
            generate_rows(GeneratorParams::new(200, 0.0, 1)),
            Err(IngestError::InvalidParams(_))
        ));
        assert!(matches!(
            generate_rows(GeneratorParams::new(200, 0.6, 1)),
            Err(IngestError::InvalidParams(_))
        ));
    }
}
