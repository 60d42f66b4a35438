//! Append-only blockchain with SHA-256 proof-of-work mining, block
//! verification, and chain-integrity checking.
//!
//! A block seals an ordered, non-empty list of model-update entries under a
//! Merkle root. The header hashed for proof of work is the canonical JSON
//! array `[number, previous_hash, merkle_root, timestamp, difficulty, nonce]`;
//! a seal is valid when the hash carries at least `difficulty` leading `'0'`
//! hex characters. Difficulty is fixed per chain.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canonical::{
    canonical_bytes, is_hex_digest, sha256_hex, sha256_raw, to_canonical_json, zero_digest,
};
use crate::metrics::MetricsReport;

/// Highest supported difficulty (leading zero hex characters).
pub const MAX_DIFFICULTY: u8 = 8;

/// Nonce values past this cap abort the search.
pub const DEFAULT_NONCE_CAP: u64 = 1 << 40;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LedgerError {
    #[error("no entries supplied")]
    EmptyEntries,
    #[error("nonce space exhausted after {attempts} attempts")]
    NonceExhausted { attempts: u64 },
    #[error("difficulty must lie in 0..={MAX_DIFFICULTY}")]
    InvalidDifficulty,
    #[error("nonce stride must be positive")]
    InvalidStride,
    #[error("block failed verification: {0}")]
    InvalidBlock(BlockFault),
    #[error("malformed journal line {line}")]
    MalformedJournal { line: usize },
    #[error("journal io: {0}")]
    JournalIo(String),
}

impl From<io::Error> for LedgerError {
    fn from(e: io::Error) -> Self {
        LedgerError::JournalIo(e.to_string())
    }
}

/// Why a block failed verification.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum BlockFault {
    #[error("previous-hash linkage broken")]
    Linkage,
    #[error("merkle root does not recompute")]
    MerkleRoot,
    #[error("hash misses the difficulty prefix")]
    Difficulty,
    #[error("block number does not increment")]
    Number,
}

/// One accepted model update: who contributed, the evaluated metrics, the
/// off-chain model's hash, and the incentive paid. No feature rows, labels,
/// or weights ever appear here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub contributor_id: String,
    pub metrics: MetricsReport,
    pub model_hash: String,
    pub incentive_paid: f64,
}

impl Entry {
    /// Checks the shape invariants: hex ids, complete metrics, non-negative pay.
    pub fn validate(&self) -> bool {
        is_hex_digest(&self.contributor_id)
            && is_hex_digest(&self.model_hash)
            && self.metrics.is_complete()
            && self.incentive_paid >= 0.0
            && self.incentive_paid.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub number: u64,
    pub previous_hash: String,
    pub nonce: u64,
    pub timestamp: u64,
    pub entries: Vec<Entry>,
    pub merkle_root: String,
}

impl Block {
    /// Builds an unsealed candidate: merkle root computed, nonce zero.
    pub fn candidate(
        number: u64,
        previous_hash: String,
        timestamp: u64,
        entries: Vec<Entry>,
    ) -> Result<Block, LedgerError> {
        let merkle_root = merkle_root(&entries)?;
        Ok(Block {
            number,
            previous_hash,
            nonce: 0,
            timestamp,
            entries,
            merkle_root,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub blocks: Vec<Block>,
    pub difficulty: u8,
}

impl Chain {
    pub fn new(difficulty: u8) -> Result<Chain, LedgerError> {
        if difficulty > MAX_DIFFICULTY {
            return Err(LedgerError::InvalidDifficulty);
        }
        Ok(Chain {
            blocks: Vec::new(),
            difficulty,
        })
    }

    pub fn tip(&self) -> Option<&Block> {
        self.blocks.last()
    }

    pub fn tip_hash(&self) -> Option<String> {
        self.tip().map(|b| block_hash(b, self.difficulty))
    }
}

/// Merkle root over SHA-256 leaf digests of each entry's canonical bytes.
/// Odd layers duplicate the last node; a single leaf is its own root.
pub fn merkle_root(entries: &[Entry]) -> Result<String, LedgerError> {
    if entries.is_empty() {
        return Err(LedgerError::EmptyEntries);
    }
    let mut layer: Vec<[u8; 32]> = entries
        .iter()
        .map(|e| sha256_raw(&canonical_bytes(e)))
        .collect();
    while layer.len() > 1 {
        if layer.len() % 2 == 1 {
            layer.push(*layer.last().expect("layer non-empty"));
        }
        layer = layer
            .chunks_exact(2)
            .map(|pair| {
                let mut buf = [0u8; 64];
                buf[..32].copy_from_slice(&pair[0]);
                buf[32..].copy_from_slice(&pair[1]);
                sha256_raw(&buf)
            })
            .collect();
    }
    Ok(hex::encode(layer[0]))
}

/// Canonical header bytes hashed for proof of work:
/// `[number,"previous_hash","merkle_root",timestamp,difficulty,nonce]`.
pub fn header_bytes(block: &Block, difficulty: u8) -> Vec<u8> {
    canonical_bytes(&(
        block.number,
        &block.previous_hash,
        &block.merkle_root,
        block.timestamp,
        difficulty,
        block.nonce,
    ))
}

/// SHA-256 of the canonical header, as 64 lowercase hex characters.
/// Pure: the same block and difficulty always hash identically.
pub fn block_hash(block: &Block, difficulty: u8) -> String {
    sha256_hex(&header_bytes(block, difficulty))
}

/// True iff the digest starts with at least `difficulty` zero hex characters.
pub fn meets_difficulty(digest: &[u8; 32], difficulty: u8) -> bool {
    let full = (difficulty / 2) as usize;
    if digest[..full].iter().any(|&b| b != 0) {
        return false;
    }
    if difficulty % 2 == 1 && digest[full] >= 0x10 {
        return false;
    }
    true
}

/// Outcome of a nonce search: the sealed block and how many hash
/// evaluations it took.
#[derive(Debug, Clone, PartialEq)]
pub struct Sealed {
    pub block: Block,
    pub attempts: u64,
}

/// Scans the arithmetic progression `nonce_start, +stride, ...` for the
/// smallest nonce whose header hash meets the difficulty. Deterministic for
/// fixed inputs, which makes single-lane mining the reproducibility mode;
/// parallel workers partition the space by owning disjoint lanes.
pub fn mine(
    block: Block,
    difficulty: u8,
    nonce_start: u64,
    nonce_stride: u64,
) -> Result<Sealed, LedgerError> {
    mine_with_cap(block, difficulty, nonce_start, nonce_stride, DEFAULT_NONCE_CAP)
}

pub fn mine_with_cap(
    mut block: Block,
    difficulty: u8,
    nonce_start: u64,
    nonce_stride: u64,
    nonce_cap: u64,
) -> Result<Sealed, LedgerError> {
    if difficulty > MAX_DIFFICULTY {
        return Err(LedgerError::InvalidDifficulty);
    }
    if nonce_stride == 0 {
        return Err(LedgerError::InvalidStride);
    }
    // The nonce is the last header term, so the search loop splices digits
    // onto a fixed prefix instead of reserializing the whole header.
    let mut buf = String::with_capacity(192);
    write!(
        buf,
        "[{},\"{}\",\"{}\",{},{},",
        block.number, block.previous_hash, block.merkle_root, block.timestamp, difficulty
    )
    .expect("write to string");
    let prefix_len = buf.len();
    let mut nonce = nonce_start;
    let mut attempts: u64 = 0;
    loop {
        buf.truncate(prefix_len);
        write!(buf, "{nonce}]").expect("write to string");
        attempts += 1;
        if meets_difficulty(&sha256_raw(buf.as_bytes()), difficulty) {
            block.nonce = nonce;
            debug_assert_eq!(buf.as_bytes(), header_bytes(&block, difficulty));
            return Ok(Sealed { block, attempts });
        }
        nonce = match nonce.checked_add(nonce_stride) {
            Some(n) if n <= nonce_cap => n,
            _ => return Err(LedgerError::NonceExhausted { attempts }),
        };
    }
}

/// Fans the nonce search out over `workers` lanes; the first seal wins and
/// the other lanes stop. Validity is worker-count independent; bit-identical
/// results are only guaranteed with one worker. Returns the total hash
/// evaluations across all lanes.
pub fn mine_parallel(
    block: Block,
    difficulty: u8,
    workers: usize,
    nonce_cap: u64,
) -> Result<Sealed, LedgerError> {
    if workers <= 1 {
        return mine_with_cap(block, difficulty, 0, 1, nonce_cap);
    }
    let stop = AtomicBool::new(false);
    let total = AtomicU64::new(0);
    let winner: Mutex<Option<Block>> = Mutex::new(None);
    std::thread::scope(|scope| {
        for lane in 0..workers {
            let block = block.clone();
            let (stop, total, winner) = (&stop, &total, &winner);
            scope.spawn(move || {
                let mut candidate = block;
                let mut buf = String::with_capacity(192);
                write!(
                    buf,
                    "[{},\"{}\",\"{}\",{},{},",
                    candidate.number,
                    candidate.previous_hash,
                    candidate.merkle_root,
                    candidate.timestamp,
                    difficulty
                )
                .expect("write to string");
                let prefix_len = buf.len();
                let mut nonce = lane as u64;
                let mut attempts: u64 = 0;
                loop {
                    if stop.load(Ordering::Relaxed) {
                        break;
                    }
                    buf.truncate(prefix_len);
                    write!(buf, "{nonce}]").expect("write to string");
                    attempts += 1;
                    if meets_difficulty(&sha256_raw(buf.as_bytes()), difficulty) {
                        candidate.nonce = nonce;
                        let mut slot = winner.lock().expect("winner lock");
                        if slot.is_none() {
                            *slot = Some(candidate);
                            stop.store(true, Ordering::Relaxed);
                        }
                        break;
                    }
                    nonce = match nonce.checked_add(workers as u64) {
                        Some(n) if n <= nonce_cap => n,
                        _ => break,
                    };
                }
                total.fetch_add(attempts, Ordering::Relaxed);
            });
        }
    });
    let sealed = winner.lock().expect("winner lock").take();
    match sealed {
        Some(block) => Ok(Sealed {
            block,
            attempts: total.load(Ordering::Relaxed),
        }),
        None => Err(LedgerError::NonceExhausted {
            attempts: total.load(Ordering::Relaxed),
        }),
    }
}

/// Full verdict on one block against its predecessor (none for genesis).
pub fn verify_block_detailed(
    block: &Block,
    predecessor: Option<&Block>,
    difficulty: u8,
) -> Result<(), BlockFault> {
    let expected_prev = match predecessor {
        Some(p) => block_hash(p, difficulty),
        None => zero_digest(),
    };
    if block.previous_hash != expected_prev {
        return Err(BlockFault::Linkage);
    }
    match merkle_root(&block.entries) {
        Ok(root) if root == block.merkle_root => {}
        _ => return Err(BlockFault::MerkleRoot),
    }
    let digest = sha256_raw(&header_bytes(block, difficulty));
    if !meets_difficulty(&digest, difficulty) {
        return Err(BlockFault::Difficulty);
    }
    let expected_number = predecessor.map_or(0, |p| p.number + 1);
    if block.number != expected_number {
        return Err(BlockFault::Number);
    }
    Ok(())
}

pub fn verify_block(block: &Block, predecessor: Option<&Block>, difficulty: u8) -> bool {
    verify_block_detailed(block, predecessor, difficulty).is_ok()
}

/// First failing block of a chain, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainFault {
    pub index: usize,
    pub fault: BlockFault,
}

/// Applies block verification pairwise from genesis. An empty chain is ok.
pub fn verify_chain(chain: &Chain) -> Result<(), ChainFault> {
    let mut predecessor: Option<&Block> = None;
    for (index, block) in chain.blocks.iter().enumerate() {
        verify_block_detailed(block, predecessor, chain.difficulty)
            .map_err(|fault| ChainFault { index, fault })?;
        predecessor = Some(block);
    }
    Ok(())
}

/// Appends a block after verifying it against the current tip.
pub fn append(chain: &mut Chain, block: Block) -> Result<(), LedgerError> {
    verify_block_detailed(&block, chain.tip(), chain.difficulty)
        .map_err(LedgerError::InvalidBlock)?;
    chain.blocks.push(block);
    Ok(())
}

/// One canonical-JSON journal line for a block.
pub fn journal_line(block: &Block) -> String {
    to_canonical_json(block)
}

/// Writes the whole chain as a block journal: one canonical-JSON block per
/// line. The bytes are the same canonical form used for hashing, so reload
/// plus chain verification is a full integrity audit.
pub fn write_journal<W: Write>(chain: &Chain, mut w: W) -> Result<(), LedgerError> {
    for block in &chain.blocks {
        writeln!(w, "{}", journal_line(block))?;
    }
    Ok(())
}

/// Reads a block journal back into a chain at the expected difficulty.
pub fn read_journal<R: BufRead>(r: R, difficulty: u8) -> Result<Chain, LedgerError> {
    let mut chain = Chain::new(difficulty)?;
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let block: Block =
            serde_json::from_str(&line).map_err(|_| LedgerError::MalformedJournal { line: i + 1 })?;
        chain.blocks.push(block);
    }
    Ok(chain)
}
