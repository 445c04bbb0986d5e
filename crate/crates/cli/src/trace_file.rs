//! One JSON object per line: `tick`, `seq`, `actor`, `kind`, `detail`.

use std::io::{self, Write};
use std::path::Path;

use postal_rps_core::sim::Trace;
use sha2::{Digest, Sha256};

pub fn to_jsonl(trace: &Trace) -> Vec<u8> {
    let mut out = Vec::new();
    for event in &trace.events {
        serde_json::to_writer(&mut out, event).expect("trace events always serialize");
        out.push(b'\n');
    }
    out
}

/// Lowercase hex SHA-256 of the serialized trace.
pub fn trace_digest(trace: &Trace) -> String {
    digest_bytes(&to_jsonl(trace))
}

pub fn digest_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn write_trace(trace: &Trace, path: &Path) -> io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&to_jsonl(trace))?;
    f.flush()
}
