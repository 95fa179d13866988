//! Exponential integers: moduli `n` with a permutation `sigma` of `1..=n` such
//! that `i^sigma(i)` runs through every residue class mod `n`.

pub mod analytics;
pub mod conditions;
pub mod constructor;
pub mod counts;
pub mod modarith;
pub mod oracle;
pub mod residue;

pub use conditions::{classify, evaluate, Classification, Status};
pub use constructor::{build_witness, construct_even, construct_odd, table_witness, Construction};
pub use oracle::{count_witnesses, decide, PruningRules, SearchConfig, SearchOutcome, Verdict};
pub use residue::{verify_witness, Witness};
