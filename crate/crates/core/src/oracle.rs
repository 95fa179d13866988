//! Exhaustive search for witnesses.
//!
//! The problem is an exact cover with three column families: every base, every
//! exponent and every residue class must be used exactly once, and a row is a
//! triple `(b, e, b^e mod n)`. Nothing here depends on the classification
//! theory, so the verdicts can be used to check it.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::modarith::radical;
use crate::residue::{verify_witness, PowerTable, ResidueError, Witness, DEFAULT_TABLE_CAP};

const CHECK_INTERVAL: u64 = 256;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("search needs n >= 2, got {0}")]
    InvalidModulus(u64),
    #[error("power table for n = {n} exceeds the cap {cap}")]
    MemoryCap { n: u64, cap: u64 },
    #[error("fixed assignment ({base}, {exp}) is outside 1..={n}")]
    InvalidFixed { n: u64, base: u64, exp: u64 },
    #[error("search produced a permutation that fails verification: {0}")]
    Unsound(String),
}

impl From<ResidueError> for SearchError {
    fn from(e: ResidueError) -> Self {
        match e {
            ResidueError::CapExceeded { n, cap } => SearchError::MemoryCap { n, cap },
            ResidueError::ModulusTooSmall(n) => SearchError::InvalidModulus(n),
            other => SearchError::Unsound(other.to_string()),
        }
    }
}

/// Individually switchable cuts. With everything off the search is plain
/// backtracking: bases in increasing order, exponents ascending, residues
/// checked for distinctness on assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PruningRules {
    /// Most-constrained column first, backtrack on an empty base domain.
    pub forward_checking: bool,
    /// Multiples of `rad(n)` other than `n` never take residue 0.
    pub radical: bool,
    /// Empty exponent or residue columns and conflicting forced rows.
    pub hall: bool,
    /// Free square bases and free even exponents each need a free square residue.
    pub quadratic_budget: bool,
    /// Skip an exponent whose power column equals that of a smaller free exponent.
    pub dominance: bool,
}

impl PruningRules {
    pub const fn all() -> Self {
        PruningRules {
            forward_checking: true,
            radical: true,
            hall: true,
            quadratic_budget: true,
            dominance: true,
        }
    }

    pub const fn none() -> Self {
        PruningRules {
            forward_checking: false,
            radical: false,
            hall: false,
            quadratic_budget: false,
            dominance: false,
        }
    }

    /// The rules that keep witness counts exact.
    pub const fn counting(self) -> Self {
        PruningRules {
            quadratic_budget: false,
            dominance: false,
            ..self
        }
    }
}

impl Default for PruningRules {
    fn default() -> Self {
        Self::all()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    pub node_budget: u64,
    pub time_budget: Option<Duration>,
    /// Worker threads; 1 keeps the search sequential.
    pub jobs: usize,
    pub pruning: PruningRules,
    pub table_cap: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            node_budget: 100_000_000,
            time_budget: None,
            jobs: 1,
            pruning: PruningRules::all(),
            table_cap: DEFAULT_TABLE_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    WitnessFound,
    ExhaustivelyRefuted,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::WitnessFound => "witness_found",
            Verdict::ExhaustivelyRefuted => "exhaustively_refuted",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    /// Assignments made, fixed ones excluded.
    pub nodes: u64,
    pub max_depth: u32,
    pub elapsed_ms: u64,
    pub node_budget: u64,
    pub budget_exhausted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchOutcome {
    pub n: u64,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<u64>,
    pub stats: SearchStats,
}

struct Budget {
    nodes: AtomicU64,
    limit: u64,
    start: Instant,
    time_limit: Option<Duration>,
    exhausted: AtomicBool,
}

impl Budget {
    fn charge(&self, pending: u64) -> bool {
        let total = self.nodes.fetch_add(pending, Ordering::Relaxed) + pending;
        let over = total > self.limit || self.time_limit.is_some_and(|t| self.start.elapsed() > t);
        if over {
            self.exhausted.store(true, Ordering::Relaxed);
        }
        !over && !self.exhausted.load(Ordering::Relaxed)
    }
}

/// Data shared by all workers.
struct Problem {
    n: usize,
    table: PowerTable,
    rules: PruningRules,
    counting: bool,
    /// Multiples of `rad(n)` below `n`.
    radical_base: Vec<bool>,
    square_base: Vec<bool>,
    square_res: Vec<bool>,
    /// Smaller exponents with the same power column.
    twins: Vec<Vec<u32>>,
}

impl Problem {
    fn new(n: u64, cfg: &SearchConfig, counting: bool) -> Result<Self, SearchError> {
        if n < 2 {
            return Err(SearchError::InvalidModulus(n));
        }
        let table = PowerTable::with_cap(n, cfg.table_cap)?;
        let rules = if counting {
            cfg.pruning.counting()
        } else {
            cfg.pruning
        };
        let size = n as usize;
        let rad = radical(n as i64).expect("n >= 2") as usize;
        let radical_base = (0..=size)
            .map(|b| b > 0 && b < size && b % rad == 0)
            .collect();
        let mut square_res = vec![false; size];
        for s in 0..n {
            square_res[(s * s % n) as usize] = true;
        }
        let square_base = (0..=size).map(|b| b > 0 && square_res[b % size]).collect();
        let mut twins = vec![Vec::new(); size + 1];
        if rules.dominance {
            let column = |e: usize| (1..=n).map(|b| table.get(b, e as u64)).collect::<Vec<_>>();
            let columns: Vec<Vec<u64>> = (0..=size)
                .map(|e| if e == 0 { Vec::new() } else { column(e) })
                .collect();
            for e2 in 1..=size {
                for e1 in 1..e2 {
                    if columns[e1] == columns[e2] {
                        twins[e2].push(e1 as u32);
                    }
                }
            }
        }
        Ok(Problem {
            n: size,
            table,
            rules,
            counting,
            radical_base,
            square_base,
            square_res,
            twins,
        })
    }

    #[inline]
    fn res(&self, b: usize, e: usize) -> usize {
        self.table.row(b as u64)[e - 1] as usize
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Column {
    Base(usize),
    Exp(usize),
    Res(usize),
}

enum Flow {
    Continue,
    Stop,
}

#[derive(Clone)]
struct State {
    sigma: Vec<u32>,
    exp_free: Vec<bool>,
    res_free: Vec<bool>,
    free_bases: usize,
    free_square_bases: usize,
    free_even_exps: usize,
    free_square_res: usize,
}

impl State {
    fn new(p: &Problem) -> Self {
        let n = p.n;
        State {
            sigma: vec![0; n + 1],
            exp_free: (0..=n).map(|e| e > 0).collect(),
            res_free: vec![true; n],
            free_bases: n,
            free_square_bases: (1..=n).filter(|&b| p.square_base[b]).count(),
            free_even_exps: n / 2,
            free_square_res: p.square_res.iter().filter(|&&s| s).count(),
        }
    }

    #[inline]
    fn base_free(&self, b: usize) -> bool {
        self.sigma[b] == 0
    }

    #[inline]
    fn allowed(&self, p: &Problem, b: usize, e: usize) -> bool {
        if !self.exp_free[e] {
            return false;
        }
        let r = p.res(b, e);
        self.res_free[r] && !(p.rules.radical && r == 0 && p.radical_base[b])
    }

    fn dominated(&self, p: &Problem, e: usize) -> bool {
        p.rules.dominance && !p.counting && p.twins[e].iter().any(|&e1| self.exp_free[e1 as usize])
    }

    fn apply(&mut self, p: &Problem, b: usize, e: usize) {
        let r = p.res(b, e);
        self.sigma[b] = e as u32;
        self.exp_free[e] = false;
        self.res_free[r] = false;
        self.free_bases -= 1;
        self.free_square_bases -= p.square_base[b] as usize;
        self.free_even_exps -= e.is_multiple_of(2) as usize;
        self.free_square_res -= p.square_res[r] as usize;
    }

    fn undo(&mut self, p: &Problem, b: usize, e: usize) {
        let r = p.res(b, e);
        self.sigma[b] = 0;
        self.exp_free[e] = true;
        self.res_free[r] = true;
        self.free_bases += 1;
        self.free_square_bases += p.square_base[b] as usize;
        self.free_even_exps += e.is_multiple_of(2) as usize;
        self.free_square_res += p.square_res[r] as usize;
    }

    fn quadratic_cut(&self, p: &Problem) -> bool {
        p.rules.quadratic_budget
            && !p.counting
            && self.free_square_bases.max(self.free_even_exps) > self.free_square_res
    }

    /// The column to branch on, or `None` on a wipeout.
    fn select(&self, p: &Problem) -> Option<Column> {
        let rules = p.rules;
        if !rules.forward_checking && !rules.hall {
            let b = (1..=p.n).find(|&b| self.base_free(b)).expect("a free base");
            return Some(Column::Base(b));
        }
        let n = p.n;
        let mut base_cnt = vec![0u32; n + 1];
        let mut exp_cnt = vec![0u32; n + 1];
        let mut res_cnt = vec![0u32; n];
        let mut base_last = vec![0u32; n + 1];
        let mut exp_last = vec![0u32; n + 1];
        let mut res_last = vec![(0u32, 0u32); n];
        for b in (1..=n).filter(|&b| self.base_free(b)) {
            for e in 1..=n {
                if self.allowed(p, b, e) {
                    let r = p.res(b, e);
                    base_cnt[b] += 1;
                    exp_cnt[e] += 1;
                    res_cnt[r] += 1;
                    base_last[b] = e as u32;
                    exp_last[e] = b as u32;
                    res_last[r] = (b as u32, e as u32);
                }
            }
        }
        let free_b = (1..=n).filter(|&b| self.base_free(b));
        let free_e = (1..=n).filter(|&e| self.exp_free[e]);
        let free_r = (0..n).filter(|&r| self.res_free[r]);
        let mut best: Option<(u32, Column)> = None;
        let mut consider = |cnt: u32, col: Column| {
            if best.is_none_or(|(c, _)| cnt < c) {
                best = Some((cnt, col));
            }
        };
        if rules.forward_checking {
            for b in free_b.clone() {
                consider(base_cnt[b], Column::Base(b));
            }
        }
        if rules.hall {
            for e in free_e.clone() {
                consider(exp_cnt[e], Column::Exp(e));
            }
            for r in free_r.clone() {
                consider(res_cnt[r], Column::Res(r));
            }
        }
        let (cnt, col) = match best {
            Some(b) => b,
            None => (1, Column::Base(free_b.clone().next().expect("a free base"))),
        };
        if cnt == 0 {
            return None;
        }
        if rules.hall {
            let mut forced: Vec<(usize, usize)> = Vec::new();
            forced.extend(
                free_b
                    .filter(|&b| base_cnt[b] == 1)
                    .map(|b| (b, base_last[b] as usize)),
            );
            forced.extend(
                free_e
                    .filter(|&e| exp_cnt[e] == 1)
                    .map(|e| (exp_last[e] as usize, e)),
            );
            forced.extend(
                free_r
                    .filter(|&r| res_cnt[r] == 1)
                    .map(|r| (res_last[r].0 as usize, res_last[r].1 as usize)),
            );
            if !forced.is_empty() {
                forced.sort_unstable();
                forced.dedup();
                let mut claim_b = vec![0u32; n + 1];
                let mut claim_e = vec![0u32; n + 1];
                let mut claim_r = vec![0u32; n];
                for (b, e) in forced {
                    let r = p.res(b, e);
                    if claim_b[b] != 0 || claim_e[e] != 0 || claim_r[r] != 0 {
                        return None;
                    }
                    claim_b[b] = 1;
                    claim_e[e] = 1;
                    claim_r[r] = 1;
                }
            }
        }
        Some(col)
    }

    fn options(&self, p: &Problem, col: Column) -> Vec<(usize, usize)> {
        let n = p.n;
        match col {
            Column::Base(b) => (1..=n)
                .filter(|&e| self.allowed(p, b, e) && !self.dominated(p, e))
                .map(|e| (b, e))
                .collect(),
            Column::Exp(e) => (1..=n)
                .filter(|&b| self.base_free(b) && self.allowed(p, b, e))
                .map(|b| (b, e))
                .collect(),
            Column::Res(r) => {
                let mut out = Vec::new();
                for b in (1..=n).filter(|&b| self.base_free(b)) {
                    for e in 1..=n {
                        if p.res(b, e) == r && self.allowed(p, b, e) && !self.dominated(p, e) {
                            out.push((b, e));
                        }
                    }
                }
                out
            }
        }
    }
}

struct Worker<'a> {
    problem: &'a Problem,
    budget: &'a Budget,
    state: State,
    depth: u32,
    max_depth: u32,
    nodes: u64,
    pending: u64,
    aborted: bool,
    count: u64,
    first: Option<Vec<u32>>,
}

impl<'a> Worker<'a> {
    fn new(problem: &'a Problem, budget: &'a Budget, state: State) -> Self {
        Worker {
            problem,
            budget,
            state,
            depth: 0,
            max_depth: 0,
            nodes: 0,
            pending: 0,
            aborted: false,
            count: 0,
            first: None,
        }
    }

    fn tick(&mut self) -> bool {
        self.nodes += 1;
        self.pending += 1;
        if self.pending == CHECK_INTERVAL {
            self.pending = 0;
            if !self.budget.charge(CHECK_INTERVAL) {
                self.aborted = true;
            }
        }
        !self.aborted
    }

    fn flush(&mut self) {
        if self.pending > 0 {
            self.budget.charge(std::mem::take(&mut self.pending));
        }
    }

    fn descend(&mut self, b: usize, e: usize) -> Flow {
        if !self.tick() {
            return Flow::Stop;
        }
        self.state.apply(self.problem, b, e);
        self.depth += 1;
        self.max_depth = self.max_depth.max(self.depth);
        let flow = self.search();
        self.depth -= 1;
        self.state.undo(self.problem, b, e);
        flow
    }

    fn search(&mut self) -> Flow {
        let p = self.problem;
        if self.state.free_bases == 0 {
            self.count += 1;
            if self.first.is_none() {
                self.first = Some(self.state.sigma.clone());
            }
            return if p.counting {
                Flow::Continue
            } else {
                Flow::Stop
            };
        }
        if self.state.quadratic_cut(p) {
            return Flow::Continue;
        }
        let Some(col) = self.state.select(p) else {
            return Flow::Continue;
        };
        for (b, e) in self.state.options(p, col) {
            if let Flow::Stop = self.descend(b, e) {
                return Flow::Stop;
            }
        }
        Flow::Continue
    }
}

struct Partial {
    witness: Option<Vec<u32>>,
    count: u64,
    nodes: u64,
    max_depth: u32,
    aborted: bool,
}

fn run(
    n: u64,
    cfg: &SearchConfig,
    fixed: &[(u64, u64)],
    counting: bool,
) -> Result<SearchOutcome, SearchError> {
    let problem = Problem::new(n, cfg, counting)?;
    let budget = Budget {
        nodes: AtomicU64::new(0),
        limit: cfg.node_budget,
        start: Instant::now(),
        time_limit: cfg.time_budget,
        exhausted: AtomicBool::new(false),
    };
    let mut state = State::new(&problem);
    let mut consistent = true;
    for &(b, e) in fixed {
        if !(1..=n).contains(&b) || !(1..=n).contains(&e) {
            return Err(SearchError::InvalidFixed { n, base: b, exp: e });
        }
        let (b, e) = (b as usize, e as usize);
        if state.base_free(b) && state.allowed(&problem, b, e) {
            state.apply(&problem, b, e);
        } else {
            consistent = false;
        }
    }

    let partials: Vec<Partial> = if !consistent {
        Vec::new()
    } else if cfg.jobs <= 1 || state.free_bases == 0 {
        vec![solve(&problem, &budget, state, None)]
    } else {
        match root_options(&problem, &state) {
            None => vec![Partial {
                witness: None,
                count: 0,
                nodes: 0,
                max_depth: 0,
                aborted: false,
            }],
            Some(opts) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(cfg.jobs)
                    .build()
                    .map_err(|e| SearchError::Unsound(e.to_string()))?;
                pool.install(|| {
                    opts.par_iter()
                        .map(|&opt| solve(&problem, &budget, state.clone(), Some(opt)))
                        .collect()
                })
            }
        }
    };

    let aborted = partials.iter().any(|p| p.aborted);
    let witness = partials.iter().filter_map(|p| p.witness.clone()).min();
    let count: u64 = partials.iter().map(|p| p.count).sum();
    let verdict = match (&witness, aborted) {
        (Some(_), _) if !counting || !aborted => Verdict::WitnessFound,
        (_, true) => Verdict::Inconclusive,
        (None, false) => Verdict::ExhaustivelyRefuted,
        (Some(_), false) => unreachable!(),
    };
    let witness = match witness {
        Some(sigma) => {
            let sigma = sigma[1..].iter().map(|&e| e as u64).collect();
            Some(
                verify_witness(Witness::new(n, sigma))
                    .map_err(|e| SearchError::Unsound(e.to_string()))?,
            )
        }
        None => None,
    };
    let stats = SearchStats {
        nodes: partials.iter().map(|p| p.nodes).sum(),
        max_depth: partials.iter().map(|p| p.max_depth).max().unwrap_or(0),
        elapsed_ms: budget.start.elapsed().as_millis() as u64,
        node_budget: cfg.node_budget,
        budget_exhausted: aborted,
    };
    Ok(SearchOutcome {
        n,
        verdict,
        witness,
        count: (counting && !aborted).then_some(count),
        stats,
    })
}

fn root_options(p: &Problem, state: &State) -> Option<Vec<(usize, usize)>> {
    if state.quadratic_cut(p) {
        return None;
    }
    let col = state.select(p)?;
    Some(state.options(p, col))
}

fn solve(p: &Problem, budget: &Budget, state: State, root: Option<(usize, usize)>) -> Partial {
    let mut w = Worker::new(p, budget, state);
    match root {
        Some((b, e)) => {
            w.descend(b, e);
        }
        None => {
            w.search();
        }
    }
    w.flush();
    Partial {
        witness: w.first,
        count: w.count,
        nodes: w.nodes,
        max_depth: w.max_depth,
        aborted: w.aborted,
    }
}

/// Finds a witness for `n` or proves that none exists.
pub fn decide(n: u64, cfg: &SearchConfig) -> Result<SearchOutcome, SearchError> {
    run(n, cfg, &[], false)
}

/// As [`decide`], restricted to permutations extending `fixed`.
///
/// Fixed pairs that clash with each other make the restricted problem
/// infeasible, which is reported as a refutation.
pub fn decide_with_fixed(
    n: u64,
    cfg: &SearchConfig,
    fixed: &[(u64, u64)],
) -> Result<SearchOutcome, SearchError> {
    run(n, cfg, fixed, false)
}

/// Counts every witness for `n`; `count` is `None` when the budget runs out.
pub fn count_witnesses(n: u64, cfg: &SearchConfig) -> Result<SearchOutcome, SearchError> {
    run(n, cfg, &[], true)
}
