//! Frontend plumbing for the `expcrs` binary: scan records, oracle
//! cross-checks and the reproduction harness.

pub mod error;
pub mod harness;
pub mod scan;

pub use error::CliError;

/// Environment variable capping the power-table size.
pub const TABLE_CAP_VAR: &str = "CRS_MAX_TABLE_N";

pub fn table_cap() -> Result<u64, CliError> {
    match std::env::var(TABLE_CAP_VAR) {
        Err(_) => Ok(expcrs_core::residue::DEFAULT_TABLE_CAP),
        Ok(v) => v.trim().parse().map_err(|_| {
            CliError::Usage(format!(
                "{TABLE_CAP_VAR} must be a positive integer, got {v:?}"
            ))
        }),
    }
}
