//! Canonical JSON encoding and SHA-256 helpers.
//!
//! Every hash in the system (entry digests, block headers, model hashes,
//! journal lines) is computed over the same canonical byte form: UTF-8 JSON
//! with lexicographically sorted object keys, no insignificant whitespace,
//! and floats rendered in their shortest round-trip form. Two implementations
//! that agree on this encoding agree on every hash.

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Length of a SHA-256 digest rendered as lowercase hex.
pub const HEX_DIGEST_LEN: usize = 64;

/// Serializes a value to its canonical JSON string.
///
/// Routing through `serde_json::Value` sorts object keys at every level
/// (the default `Map` is a `BTreeMap`). Compact output, no trailing newline.
/// Non-finite floats are not representable in JSON; upstream invariants keep
/// them out of anything that reaches this function.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let tree = serde_json::to_value(value).expect("canonical values serialize to JSON");
    serde_json::to_string(&tree).expect("JSON tree renders to a string")
}

/// Canonical bytes of a value, ready for hashing or journal storage.
pub fn canonical_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    to_canonical_json(value).into_bytes()
}

/// SHA-256 of raw bytes as 64 lowercase hex characters.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// SHA-256 of raw bytes as the raw 32-byte digest.
pub fn sha256_raw(bytes: &[u8]) -> [u8; 32] {
    Sha256::digest(bytes).into()
}

/// SHA-256 of a value's canonical JSON form, as lowercase hex.
pub fn canonical_sha256<T: Serialize>(value: &T) -> String {
    sha256_hex(&canonical_bytes(value))
}

/// True iff `s` is exactly 64 lowercase hex characters.
pub fn is_hex_digest(s: &str) -> bool {
    s.len() == HEX_DIGEST_LEN && s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
}

/// The all-zero digest used as the genesis predecessor hash.
pub fn zero_digest() -> String {
    "0".repeat(HEX_DIGEST_LEN)
}
