//! Explicit witness permutations.
//!
//! * `n <= 7`: a fixed table.
//! * odd `p = 2l + 1` with `l` Sophie Germain: orbit assignments over powers of a
//!   generator `g` mod `p` indexed by powers of a generator `q` mod `2l`.
//! * `n = 2p` with the same `p` and `p = 3 (mod 4)`: fixed points on
//!   `{1, p, p+1, 2p}` and the two values `= -1 (mod p)`, plus one orbit rule
//!   per parity class.
//!
//! Each recipe is first assembled with `2q` and `2g` read as plain products
//! (stage `paper_recipe`), which does not always yield the intended even
//! element. When assembly or verification fails
//! the repair stage rebuilds the plan with CRT lifts (the even element
//! congruent to `q` mod `l`, resp. to `g` mod `p`), and, for `n = 2p`, negates
//! the orbit exponents on the even-parity copy so that both copies together
//! use each exponent class exactly twice. A bounded search seeded with the
//! fixed assignments is the last resort. Nothing leaves this module without
//! passing [`verify_witness`].

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::modarith::{is_prime, is_sophie_germain, pow_mod_u, primitive_root};
use crate::oracle::{self, PruningRules, SearchConfig, Verdict};
use crate::residue::{verify_witness, ResidueError, Witness};

/// Node budget of the search fallback.
pub const REPAIR_NODE_BUDGET: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructError {
    #[error("table witnesses exist only for 2 <= n <= 7, got {0}")]
    OutOfRange(u64),
    #[error("precondition failed for n = {n}: {reason}")]
    PreconditionFailed { n: u64, reason: String },
    #[error("construction failed for n = {n}: {reason}")]
    ConstructionFailed { n: u64, reason: String },
    #[error("{0} is not in the domain of any construction")]
    NotConstructible(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    #[serde(rename = "paper_recipe")]
    Literal,
    Repair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Table,
    OddConstruction,
    EvenConstruction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RepairMethod {
    CrtLift,
    Search,
}

/// Structured audit record for one construction stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageRecord {
    pub n: u64,
    pub stage: Stage,
    pub outcome: String,
}

impl StageRecord {
    fn emit(n: u64, stage: Stage, outcome: String) -> Self {
        let rec = StageRecord { n, stage, outcome };
        let json = serde_json::to_string(&rec).expect("record serializes");
        if rec.outcome.starts_with("failed: literal recipe and repair") {
            log::warn!("{json}");
        } else if stage == Stage::Literal && rec.outcome == "verified" {
            log::debug!("{json}");
        } else {
            log::info!("{json}");
        }
        rec
    }
}

/// A verified witness together with where it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Construction {
    pub witness: Witness,
    pub source: Source,
    pub stage: Stage,
    pub repair: Option<RepairMethod>,
    pub log: Vec<StageRecord>,
}

impl Construction {
    pub fn used_repair(&self) -> bool {
        self.stage == Stage::Repair
    }

    pub fn describe(&self) -> String {
        let src = match self.source {
            Source::Table => "table",
            Source::OddConstruction => "odd construction",
            Source::EvenConstruction => "even construction",
        };
        match self.repair {
            None if self.source == Source::Table => format!("{src} witness"),
            None => format!("{src}, literal recipe"),
            Some(RepairMethod::CrtLift) => format!("{src}, repaired with CRT-lifted generators"),
            Some(RepairMethod::Search) => format!("{src}, repaired by bounded search"),
        }
    }
}

const TABLE: [&[u64]; 6] = [
    &[1, 2],
    &[2, 1, 3],
    &[2, 1, 3, 4],
    &[2, 5, 1, 3, 4],
    &[2, 1, 4, 5, 3, 6],
    &[6, 2, 1, 5, 7, 3, 4],
];

pub fn table_witness(n: u64) -> Result<Witness, ConstructError> {
    if !(2..=7).contains(&n) {
        return Err(ConstructError::OutOfRange(n));
    }
    let w = Witness::new(n, TABLE[n as usize - 2].to_vec());
    verify_witness(w).map_err(|e| ConstructError::ConstructionFailed {
        n,
        reason: e.to_string(),
    })
}

fn from_table(n: u64) -> Result<Construction, ConstructError> {
    Ok(Construction {
        witness: table_witness(n)?,
        source: Source::Table,
        stage: Stage::Literal,
        repair: None,
        log: Vec::new(),
    })
}

/// How the doubled generators are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reading {
    /// `2q` and `2g` are plain products.
    Literal,
    /// `2q` is the even element congruent to `q` mod `l`; `2g` the even element congruent to `g` mod `p`.
    CrtLift,
}

/// Partial permutation under assembly.
struct Assembler {
    n: u64,
    sigma: Vec<u64>,
    exp_used: Vec<bool>,
}

impl Assembler {
    fn new(n: u64) -> Self {
        Assembler {
            n,
            sigma: vec![0; n as usize + 1],
            exp_used: vec![false; n as usize + 1],
        }
    }

    fn is_free(&self, base: u64) -> bool {
        self.sigma[base as usize] == 0
    }

    fn set(&mut self, base: u64, exp: u64) -> Result<(), String> {
        if !(1..=self.n).contains(&base) {
            return Err(format!("base {base} outside 1..={}", self.n));
        }
        if !self.is_free(base) {
            return Err(format!("base {base} assigned twice"));
        }
        if std::mem::replace(&mut self.exp_used[exp as usize], true) {
            return Err(format!("exponent {exp} assigned twice"));
        }
        self.sigma[base as usize] = exp;
        Ok(())
    }

    /// Smallest unused exponent in `[1, n]` congruent to `class` modulo the
    /// first modulus that has one.
    fn take(&mut self, class: u64, moduli: &[u64]) -> Option<u64> {
        for &m in moduli {
            let start = match class % m {
                0 => m,
                c => c,
            };
            let found = (start..=self.n)
                .step_by(m as usize)
                .find(|&e| !self.exp_used[e as usize]);
            if let Some(e) = found {
                self.exp_used[e as usize] = true;
                return Some(e);
            }
        }
        None
    }

    fn assign(&mut self, base: u64, class: u64, moduli: &[u64]) -> Result<(), String> {
        if !(1..=self.n).contains(&base) || !self.is_free(base) {
            return Err(format!("base {base} assigned twice"));
        }
        let e = self
            .take(class, moduli)
            .ok_or_else(|| format!("no free exponent left in class {class} for base {base}"))?;
        self.sigma[base as usize] = e;
        Ok(())
    }

    fn fixed(&self) -> Vec<(u64, u64)> {
        (1..=self.n)
            .filter(|&b| !self.is_free(b))
            .map(|b| (b, self.sigma[b as usize]))
            .collect()
    }

    fn finish(self) -> Result<Witness, String> {
        if let Some(b) = (1..=self.n).find(|&b| self.is_free(b)) {
            return Err(format!("base {b} left unassigned"));
        }
        verify_witness(Witness::new(self.n, self.sigma[1..].to_vec())).map_err(|e| e.to_string())
    }
}

/// Parameters of the odd construction for `p = 2l + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OddConstructionPlan {
    pub p: u64,
    pub ell: u64,
    /// Smallest primitive root mod `p`.
    pub g: u64,
    /// Smallest primitive root mod `2l`; always odd.
    pub q: u64,
    /// The element standing for `2q` in the quadratic-residue orbits.
    pub doubled_q: u64,
    pub reading: Reading,
    /// `(base, exponent class mod 2l)` in assembly order, fixed points first.
    pub nonresidue_orbit: Vec<(u64, u64)>,
    pub residue_orbit: Vec<(u64, u64)>,
}

impl OddConstructionPlan {
    pub fn new(p: u64, reading: Reading) -> Result<Self, ConstructError> {
        check_safe_prime(p, 11)?;
        let ell = (p - 1) / 2;
        let m = 2 * ell;
        let g = primitive_root(p).expect("primes have primitive roots");
        let q = primitive_root(m).expect("2l has a primitive root");
        let doubled_q = match reading {
            Reading::Literal => 2 * q % m,
            Reading::CrtLift => (q + ell) % m,
        };
        let base = |x: u64| pow_mod_u(g, x, p);
        let qp = |i: u64| pow_mod_u(q, i, m);
        let tp = |i: u64| pow_mod_u(doubled_q, i, m);

        let mut nonresidue_orbit = Vec::with_capacity(ell as usize - 1);
        for i in 0..=(ell - 3) / 2 {
            nonresidue_orbit.push((base(qp(i)), qp(i)));
        }
        for i in (ell - 1) / 2..=ell - 2 {
            nonresidue_orbit.push((base(qp(i)), qp(i + 1)));
        }
        let mut residue_orbit = Vec::with_capacity(ell as usize - 1);
        for i in 1..=(ell - 1) / 2 {
            residue_orbit.push((base(tp(i)), tp(i)));
        }
        for i in ell.div_ceil(2)..=ell - 2 {
            residue_orbit.push((base(tp(i)), tp(i - 1)));
        }
        residue_orbit.push((base(tp(ell - 1)), tp(ell - 2)));
        Ok(OddConstructionPlan {
            p,
            ell,
            g,
            q,
            doubled_q,
            reading,
            nonresidue_orbit,
            residue_orbit,
        })
    }

    fn fixed_points(&self) -> [(u64, u64); 3] {
        let ell = self.ell;
        [(1, 2 * ell), (2 * ell, ell), (self.p, ell + 1)]
    }

    fn assemble(&self) -> Result<Witness, (String, Vec<(u64, u64)>)> {
        let mut asm = Assembler::new(self.p);
        let m = 2 * self.ell;
        let run = |asm: &mut Assembler| -> Result<(), String> {
            for (b, e) in self.fixed_points() {
                asm.set(b, e)?;
            }
            for &(b, class) in &self.nonresidue_orbit {
                asm.assign(b, class, &[m])?;
            }
            // residue bases only see the exponent mod l
            for &(b, class) in &self.residue_orbit {
                asm.assign(b, class, &[m, self.ell])?;
            }
            Ok(())
        };
        match run(&mut asm) {
            Ok(()) => asm.finish().map_err(|e| (e, self.fixed_points().to_vec())),
            Err(e) => Err((e, self.fixed_points().to_vec())),
        }
    }
}

/// Parameters of the even construction for `n = 2p`, `p = 2l + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EvenConstructionPlan {
    pub n: u64,
    pub p: u64,
    pub ell: u64,
    /// Smallest generator of `(Z/2pZ)*`; odd.
    pub g: u64,
    /// The element standing for `2g`.
    pub doubled_g: u64,
    pub q: u64,
    pub doubled_q: u64,
    pub reading: Reading,
    pub fixed: Vec<(u64, u64)>,
}

impl EvenConstructionPlan {
    pub fn new(n: u64, reading: Reading) -> Result<Self, ConstructError> {
        if !n.is_multiple_of(2) {
            return Err(ConstructError::PreconditionFailed {
                n,
                reason: "n must be even".into(),
            });
        }
        let p = n / 2;
        check_safe_prime(p, 7).map_err(|e| match e {
            ConstructError::PreconditionFailed { reason, .. } => {
                ConstructError::PreconditionFailed { n, reason }
            }
            other => other,
        })?;
        if p % 4 != 3 {
            return Err(ConstructError::PreconditionFailed {
                n,
                reason: format!("p = {p} is not 3 mod 4"),
            });
        }
        let ell = (p - 1) / 2;
        let g = primitive_root(n).expect("2p has a primitive root");
        let q = primitive_root(2 * ell).expect("2l has a primitive root");
        let (doubled_g, doubled_q) = match reading {
            Reading::Literal => (2 * g % n, 2 * q % (2 * ell)),
            Reading::CrtLift => (if g > p { g - p } else { g + p }, (q + ell) % (2 * ell)),
        };
        let fixed = vec![
            (1, p - 1),
            (p, 2 * p - 1),
            (p + 1, 2 * p - 2),
            (n, n),
            (pow_mod_u(g, ell, n), ell),
            (pow_mod_u(doubled_g, ell, n), 3 * ell),
        ];
        Ok(EvenConstructionPlan {
            n,
            p,
            ell,
            g,
            doubled_g,
            q,
            doubled_q,
            reading,
            fixed,
        })
    }

    fn shift(&self, i: u64) -> u64 {
        i + 2 * i / (self.ell + 1)
    }

    fn assemble(&self) -> Result<Witness, (String, Vec<(u64, u64)>)> {
        let mut asm = Assembler::new(self.n);
        let fixed_ok = self.fixed.iter().try_for_each(|&(b, e)| asm.set(b, e));
        if let Err(e) = fixed_ok {
            return Err((format!("fixed assignments collide: {e}"), Vec::new()));
        }
        let fixed = asm.fixed();
        let (p, m) = (self.p, self.p - 1);
        let gens = [self.q, self.doubled_q];
        let result = match self.reading {
            Reading::Literal => (|| {
                for &t in &gens {
                    for i in 1..=self.n {
                        let class = pow_mod_u(self.g, pow_mod_u(t, i, m), p);
                        let Some(b) = [class, class + p]
                            .into_iter()
                            .find(|&b| b <= self.n && asm.is_free(b))
                        else {
                            continue;
                        };
                        asm.assign(b, pow_mod_u(t, self.shift(i), m), &[m])?;
                    }
                }
                Ok(())
            })(),
            Reading::CrtLift => (|| {
                for parity in [1u64, 0] {
                    for &t in &gens {
                        for i in 1..self.ell {
                            let class = pow_mod_u(self.g, pow_mod_u(t, i, m), p);
                            let b = if class % 2 == parity {
                                class
                            } else {
                                class + p
                            };
                            let e = pow_mod_u(t, self.shift(i), m);
                            let e = if parity == 1 { e } else { (m - e) % m };
                            asm.assign(b, e, &[m])?;
                        }
                    }
                }
                Ok(())
            })(),
        };
        match result {
            Ok(()) => asm.finish().map_err(|e| (e, fixed)),
            Err(e) => Err((e, fixed)),
        }
    }
}

fn check_safe_prime(p: u64, min: u64) -> Result<(), ConstructError> {
    let fail = |reason: String| Err(ConstructError::PreconditionFailed { n: p, reason });
    if p < min || !is_prime(p) {
        return fail(format!("{p} is not a prime >= {min}"));
    }
    if !is_sophie_germain((p - 1) / 2) {
        return fail(format!(
            "(p-1)/2 = {} is not a Sophie Germain prime",
            (p - 1) / 2
        ));
    }
    Ok(())
}

/// Runs `assemble` under both readings, then the search fallback.
fn with_repair(
    n: u64,
    source: Source,
    assemble: impl Fn(Reading) -> Result<Result<Witness, (String, Vec<(u64, u64)>)>, ConstructError>,
) -> Result<Construction, ConstructError> {
    let mut log = Vec::new();
    let literal_fixed = match assemble(Reading::Literal)? {
        Ok(witness) => {
            log.push(StageRecord::emit(n, Stage::Literal, "verified".into()));
            return Ok(Construction {
                witness,
                source,
                stage: Stage::Literal,
                repair: None,
                log,
            });
        }
        Err((reason, fixed)) => {
            log.push(StageRecord::emit(
                n,
                Stage::Literal,
                format!("failed: {reason}"),
            ));
            fixed
        }
    };
    let lifted_fixed = match assemble(Reading::CrtLift)? {
        Ok(witness) => {
            log.push(StageRecord::emit(
                n,
                Stage::Repair,
                "verified (crt_lift)".into(),
            ));
            return Ok(Construction {
                witness,
                source,
                stage: Stage::Repair,
                repair: Some(RepairMethod::CrtLift),
                log,
            });
        }
        Err((reason, fixed)) => {
            log.push(StageRecord::emit(
                n,
                Stage::Repair,
                format!("crt_lift failed: {reason}"),
            ));
            fixed
        }
    };
    let seed = if lifted_fixed.is_empty() {
        literal_fixed
    } else {
        lifted_fixed
    };
    match search_repair(n, &seed) {
        Ok(witness) => {
            log.push(StageRecord::emit(
                n,
                Stage::Repair,
                "verified (search)".into(),
            ));
            Ok(Construction {
                witness,
                source,
                stage: Stage::Repair,
                repair: Some(RepairMethod::Search),
                log,
            })
        }
        Err(reason) => {
            let reason = format!("literal recipe and repair failed; {reason}");
            log.push(StageRecord::emit(
                n,
                Stage::Repair,
                format!("failed: {reason}"),
            ));
            Err(ConstructError::ConstructionFailed { n, reason })
        }
    }
}

/// Bounded search extending `seed`, retried without it if the seed cannot be extended.
fn search_repair(n: u64, seed: &[(u64, u64)]) -> Result<Witness, String> {
    let cfg = SearchConfig {
        node_budget: REPAIR_NODE_BUDGET,
        pruning: PruningRules::all(),
        ..SearchConfig::default()
    };
    let mut outcome = oracle::decide_with_fixed(n, &cfg, seed).map_err(|e| e.to_string())?;
    if outcome.verdict == Verdict::ExhaustivelyRefuted && !seed.is_empty() {
        outcome = oracle::decide(n, &cfg).map_err(|e| e.to_string())?;
    }
    match (outcome.verdict, outcome.witness) {
        (Verdict::WitnessFound, Some(w)) => Ok(w),
        (verdict, _) => Err(format!(
            "search {verdict} after {} nodes",
            outcome.stats.nodes
        )),
    }
}

/// Witness for a prime `p = 2l + 1` with `l` Sophie Germain.
pub fn construct_odd(p: u64) -> Result<Construction, ConstructError> {
    if matches!(p, 3 | 5 | 7) {
        return from_table(p);
    }
    with_repair(p, Source::OddConstruction, |reading| {
        Ok(OddConstructionPlan::new(p, reading)?.assemble())
    })
}

/// Witness for `n = 2p` with `p = 2l + 1`, `l` Sophie Germain and `p = 3 (mod 4)`.
pub fn construct_even(n: u64) -> Result<Construction, ConstructError> {
    if matches!(n, 2 | 6) {
        return from_table(n);
    }
    with_repair(n, Source::EvenConstruction, |reading| {
        Ok(EvenConstructionPlan::new(n, reading)?.assemble())
    })
}

pub fn build_witness(n: u64) -> Result<Construction, ConstructError> {
    if (2..=7).contains(&n) {
        return from_table(n);
    }
    let odd = n % 2 == 1 && n >= 11 && is_prime(n) && is_sophie_germain((n - 1) / 2);
    let even = n.is_multiple_of(2)
        && n >= 14
        && is_prime(n / 2)
        && (n / 2) % 4 == 3
        && is_sophie_germain((n / 2 - 1) / 2);
    if odd {
        construct_odd(n)
    } else if even {
        construct_even(n)
    } else {
        Err(ConstructError::NotConstructible(n))
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Literal => "paper_recipe",
            Stage::Repair => "repair",
        })
    }
}

impl From<ResidueError> for ConstructError {
    fn from(e: ResidueError) -> Self {
        let n = match &e {
            ResidueError::NotAPermutation { n, .. } | ResidueError::NotACrs { n, .. } => *n,
            _ => 0,
        };
        ConstructError::ConstructionFailed {
            n,
            reason: e.to_string(),
        }
    }
}
