use std::io::Write;

use anyhow::Context;
use rayon::prelude::*;
use serde::Serialize;

use expcrs_core::conditions::{classify, Classification, Status};
use expcrs_core::oracle::{decide, SearchConfig, Verdict};

use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct ScanRecord {
    pub n: u64,
    pub classification: Classification,
    pub oracle_verdict: Option<Verdict>,
    /// Seconds since the epoch, taken from `SOURCE_DATE_EPOCH` so output stays reproducible.
    pub timestamp: Option<u64>,
    pub tool_version: &'static str,
}

pub fn timestamp() -> Option<u64> {
    std::env::var("SOURCE_DATE_EPOCH").ok()?.trim().parse().ok()
}

/// `None` when the verdict is consistent with the status.
pub fn disagreement(status: Status, verdict: Verdict) -> Option<&'static str> {
    match (status, verdict) {
        (_, Verdict::Inconclusive) => None,
        (Status::ExponentialProven, Verdict::WitnessFound) => None,
        (Status::NotExponentialProven | Status::ConjecturalGap, Verdict::ExhaustivelyRefuted) => {
            None
        }
        (Status::ExponentialProven, _) => Some("proven exponential but the search refuted it"),
        (Status::NotExponentialProven, _) => {
            Some("proven not exponential but the search found a witness")
        }
        (Status::ConjecturalGap, _) => {
            Some("gap member with a witness: counterexample to the conjecture")
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScanOptions {
    pub lo: u64,
    pub hi: u64,
    pub oracle_max: u64,
    pub jobs: usize,
    pub search: SearchConfig,
}

pub struct ScanResult {
    pub records: Vec<ScanRecord>,
    /// First record whose oracle verdict contradicts its classification.
    pub disagreement: Option<(usize, String)>,
}

pub fn scan(opts: &ScanOptions) -> Result<ScanResult, CliError> {
    if opts.lo < 2 || opts.lo > opts.hi {
        return Err(CliError::Usage(format!(
            "need 2 <= lo <= hi, got {} {}",
            opts.lo, opts.hi
        )));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.max(1))
        .build()
        .context("building worker pool")?;
    let ts = timestamp();
    let search = SearchConfig {
        jobs: 1,
        ..opts.search.clone()
    };
    let records: Vec<Result<ScanRecord, CliError>> = pool.install(|| {
        (opts.lo..=opts.hi)
            .into_par_iter()
            .map(|n| {
                let classification = classify(n);
                let oracle_verdict = if n <= opts.oracle_max {
                    let out = decide(n, &search).with_context(|| format!("oracle for n = {n}"))?;
                    Some(out.verdict)
                } else {
                    None
                };
                Ok(ScanRecord {
                    n,
                    classification,
                    oracle_verdict,
                    timestamp: ts,
                    tool_version: env!("CARGO_PKG_VERSION"),
                })
            })
            .collect()
    });
    let records = records.into_iter().collect::<Result<Vec<_>, _>>()?;
    let disagreement = records.iter().enumerate().find_map(|(i, r)| {
        let why = disagreement(r.classification.status, r.oracle_verdict?)?;
        Some((i, format!("n = {}: {why}", r.n)))
    });
    Ok(ScanResult {
        records,
        disagreement,
    })
}

pub fn write_jsonl<W: Write>(mut out: W, records: &[ScanRecord]) -> anyhow::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}
