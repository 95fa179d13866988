//! Necessary-condition filters and the classification of `n`.
//!
//! For `n >= 8` the pipeline is: radical filter, quadratic-residue filter,
//! then the odd (prime `p`) or even (`n = 2p`) refinements. A rejection is
//! terminal. Survivors are either proven exponential by an explicit
//! construction or land in the conjectural gap, which is never folded into
//! either proven status.

use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::constructor::{self, Construction};
use crate::counts::qr_count;
use crate::modarith::{factorize, is_prime, is_sophie_germain, is_squarefree, omega, radical, v2};
use crate::residue::Witness;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConditionError {
    #[error("odd filters need a prime p >= 11, got {0}")]
    NotOddPrime(u64),
    #[error("even filters need n = 2p with p prime and n >= 8, got {0}")]
    NotTwicePrime(u64),
}

/// Shape of `n` with respect to the radical filter: `r`, `2r`, `4r` for odd squarefree `r > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    SmallTable,
    OddR,
    TwoR,
    FourR,
    Other,
}

pub fn shape(n: u64) -> Shape {
    if n <= 7 {
        return Shape::SmallTable;
    }
    let k = v2(n);
    let odd = n >> k;
    if odd == 1 || !is_squarefree(odd) {
        return Shape::Other;
    }
    match k {
        0 => Shape::OddR,
        1 => Shape::TwoR,
        2 => Shape::FourR,
        _ => Shape::Other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub outcome: Outcome,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, pass: bool, detail: String) -> Self {
        Check {
            name,
            outcome: if pass { Outcome::Pass } else { Outcome::Reject },
            detail,
        }
    }

    pub fn passed(&self) -> bool {
        self.outcome == Outcome::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionReport {
    pub n: u64,
    pub shape: Shape,
    checks: Vec<Check>,
}

impl ConditionReport {
    fn new(n: u64) -> Self {
        ConditionReport {
            n,
            shape: shape(n),
            checks: Vec::new(),
        }
    }

    /// Appends a check; returns false once the report holds a rejection.
    fn push(&mut self, check: Check) -> bool {
        assert!(
            self.rejection().is_none(),
            "check recorded after a rejection"
        );
        self.checks.push(check);
        self.rejection().is_none()
    }

    pub fn checks(&self) -> &[Check] {
        &self.checks
    }

    pub fn rejection(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed())
    }
}

/// Radical filter: at least `|A_n| = n / rad(n) - 1` exponents `e` in `[1, n]` must satisfy
/// `n ∤ rad(n)^e`, and the shape must be `r`, `2r` or `4r`.
pub fn radical_filter(n: u64) -> Check {
    assert!(n >= 8);
    let rad = radical(n as i64).expect("n is nonzero");
    let needed = n / rad - 1;
    // rad^e mod n stays 0 once it hits 0, so counting stops at the first zero
    let mut good = 0u64;
    let mut acc = 1u64;
    for _ in 1..=n {
        acc = (acc as u128 * rad as u128 % n as u128) as u64;
        if acc == 0 || good >= needed {
            break;
        }
        good += 1;
    }
    let s = shape(n);
    let shape_ok = matches!(s, Shape::OddR | Shape::TwoR | Shape::FourR);
    let detail = format!(
        "rad({n}) = {rad}, |A_n| = {needed}, found {good} exponent(s) with n not dividing rad^e; shape {s:?}"
    );
    Check::new("radical", good >= needed && shape_ok, detail)
}

/// `|Q_n| >= floor(n / 2)`.
pub fn qr_filter(n: u64) -> Check {
    assert!(n >= 8);
    let q = qr_count(n).count;
    Check::new(
        "quadratic_residues",
        q >= n / 2,
        format!("|Q_{n}| = {q}, need at least {}", n / 2),
    )
}

/// `p - 1` squarefree, then `omega(p - 1) = 2`.
pub fn odd_filters(p: u64) -> Result<Vec<Check>, ConditionError> {
    if p < 11 || !is_prime(p) {
        return Err(ConditionError::NotOddPrime(p));
    }
    let mut out = vec![squarefree_check(p)];
    if out[0].passed() {
        let w = omega((p - 1) as i64).expect("p - 1 is nonzero");
        out.push(Check::new(
            "omega_p_minus_1",
            w == 2,
            format!("omega({}) = {w}", p - 1),
        ));
    }
    Ok(out)
}

/// `v2(p - 1) = 1`, then `p - 1` squarefree, for `n = 2p`.
pub fn even_filters(n: u64) -> Result<Vec<Check>, ConditionError> {
    if n < 8 || !n.is_multiple_of(2) || !is_prime(n / 2) {
        return Err(ConditionError::NotTwicePrime(n));
    }
    let p = n / 2;
    let k = v2(p - 1);
    let mut out = vec![Check::new(
        "two_adic_p_minus_1",
        k == 1,
        format!("p = {p}, v2({}) = {k}", p - 1),
    )];
    if out[0].passed() {
        out.push(squarefree_check(p));
    }
    Ok(out)
}

fn squarefree_check(p: u64) -> Check {
    let f = factorize(p - 1);
    let pretty: Vec<String> = f
        .iter()
        .map(|&(q, k)| {
            if k == 1 {
                q.to_string()
            } else {
                format!("{q}^{k}")
            }
        })
        .collect();
    Check::new(
        "p_minus_1_squarefree",
        f.iter().all(|&(_, k)| k == 1),
        format!("{} = {}", p - 1, pretty.join("*")),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    ExponentialProven,
    NotExponentialProven,
    ConjecturalGap,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::ExponentialProven => "exponential",
            Status::NotExponentialProven => "not_exponential",
            Status::ConjecturalGap => "conjectural_gap",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Status {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// Which construction proves an exponential verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Table,
    Odd,
    Even,
}

/// Filter-only verdict, without building a witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub status: Status,
    pub route: Option<Route>,
    pub report: ConditionReport,
}

pub fn evaluate(n: u64) -> Evaluation {
    assert!(n >= 2, "classification starts at n = 2");
    let mut report = ConditionReport::new(n);
    let done = |status, route, report| Evaluation {
        status,
        route,
        report,
    };
    if n <= 7 {
        report.push(Check::new(
            "small_table",
            true,
            format!("tabulated witness for n = {n}"),
        ));
        return done(Status::ExponentialProven, Some(Route::Table), report);
    }
    if !report.push(radical_filter(n)) || !report.push(qr_filter(n)) {
        return done(Status::NotExponentialProven, None, report);
    }
    let refinements = if n % 2 == 1 {
        odd_filters(n)
    } else {
        even_filters(n)
    }
    .unwrap_or_else(|_| {
        panic!("{n} passed the quadratic-residue filter but is neither prime nor twice a prime")
    });
    for c in refinements {
        if !report.push(c) {
            return done(Status::NotExponentialProven, None, report);
        }
    }
    let p = if n % 2 == 1 { n } else { n / 2 };
    let ell = (p - 1) / 2;
    if n % 2 == 1 {
        debug_assert!(is_sophie_germain(ell));
        done(Status::ExponentialProven, Some(Route::Odd), report)
    } else if is_sophie_germain(ell) {
        done(Status::ExponentialProven, Some(Route::Even), report)
    } else {
        done(Status::ConjecturalGap, None, report)
    }
}

/// `n = 2p`, `p` prime, `v2(p - 1) = 1`, `p - 1` squarefree, `(p - 1) / 2` not Sophie Germain.
pub fn satisfies_gap_invariants(n: u64) -> bool {
    if !n.is_multiple_of(2) || n < 8 {
        return false;
    }
    let p = n / 2;
    is_prime(p) && v2(p - 1) == 1 && is_squarefree(p - 1) && !is_sophie_germain((p - 1) / 2)
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub n: u64,
    pub status: Status,
    pub report: ConditionReport,
    pub construction: Option<Construction>,
}

impl Classification {
    pub fn witness(&self) -> Option<&Witness> {
        self.construction.as_ref().map(|c| &c.witness)
    }

    pub fn reason(&self) -> String {
        match (self.status, &self.construction) {
            (Status::ExponentialProven, Some(c)) => c.describe(),
            (Status::NotExponentialProven, _) => {
                let c = self.report.rejection().expect("rejection recorded");
                format!("rejected by {}: {}", c.name, c.detail)
            }
            (Status::ConjecturalGap, _) => {
                let p = self.n / 2;
                format!(
                    "n = 2p with p = {p}: all necessary conditions hold but ({}-1)/2 = {} is not a Sophie Germain prime",
                    p,
                    (p - 1) / 2
                )
            }
            (Status::ExponentialProven, None) => {
                unreachable!("exponential verdict without witness")
            }
        }
    }
}

impl Serialize for Classification {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            n: u64,
            status: Status,
            reason: String,
            witness: Option<&'a Witness>,
        }
        Repr {
            n: self.n,
            status: self.status,
            reason: self.reason(),
            witness: self.witness(),
        }
        .serialize(s)
    }
}

/// Classifies `n`, attaching a verified witness to every exponential verdict.
///
/// Panics if a construction that the filters promise fails to verify; that is
/// an implementation defect, not a mathematical outcome.
pub fn classify(n: u64) -> Classification {
    let Evaluation {
        status,
        route,
        report,
    } = evaluate(n);
    let construction = route.map(|route| {
        let built = match route {
            Route::Table => constructor::build_witness(n),
            Route::Odd => constructor::construct_odd(n),
            Route::Even => constructor::construct_even(n),
        };
        built.unwrap_or_else(|e| panic!("no verified witness for exponential n = {n}: {e}"))
    });
    let c = Classification {
        n,
        status,
        report,
        construction,
    };
    debug_assert!(
        c.status != Status::ExponentialProven || c.witness().is_some_and(Witness::is_verified)
    );
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::residue::verify_witness;

    #[test]
    fn radical_filter_examples() {
        assert!(!radical_filter(8).passed());
        assert!(!radical_filter(9).passed());
        assert!(radical_filter(30).passed());
        assert!(radical_filter(12).passed());
        assert!(!radical_filter(18).passed());
        assert!(!radical_filter(16).passed());
        assert!(!radical_filter(24).passed());
    }

    #[test]
    fn qr_filter_examples() {
        assert!(!qr_filter(12).passed());
        assert!(!qr_filter(15).passed());
        assert!(qr_filter(22).passed());
        assert!(qr_filter(11).passed());
    }

    #[test]
    fn odd_filter_examples() {
        let r13 = odd_filters(13).unwrap();
        assert_eq!(r13.len(), 1);
        assert!(!r13[0].passed());
        let r31 = odd_filters(31).unwrap();
        assert_eq!((r31[0].passed(), r31[1].passed()), (true, false));
        assert!(odd_filters(23).unwrap().iter().all(Check::passed));
        assert_eq!(odd_filters(15), Err(ConditionError::NotOddPrime(15)));
        assert_eq!(odd_filters(7), Err(ConditionError::NotOddPrime(7)));
    }

    #[test]
    fn even_filter_examples() {
        assert!(!even_filters(10).unwrap()[0].passed());
        assert!(!even_filters(26).unwrap()[0].passed());
        assert!(even_filters(62).unwrap().iter().all(Check::passed));
        assert_eq!(even_filters(30), Err(ConditionError::NotTwicePrime(30)));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(11).status, Status::ExponentialProven);
        assert_eq!(classify(10).status, Status::NotExponentialProven);
        assert_eq!(classify(62).status, Status::ConjecturalGap);
        assert_eq!(
            classify(10).report.rejection().unwrap().name,
            "two_adic_p_minus_1"
        );
    }

    #[test]
    fn exponential_below_25() {
        let got: Vec<u64> = (2..=24)
            .filter(|&n| classify(n).status == Status::ExponentialProven)
            .collect();
        assert_eq!(got, [2, 3, 4, 5, 6, 7, 11, 14, 22, 23]);
    }

    #[test]
    fn witnesses_reverify() {
        for n in 2..=400 {
            let c = classify(n);
            if c.status == Status::ExponentialProven {
                let w = c.witness().unwrap().clone();
                assert!(w.is_verified());
                let fresh = Witness::new(w.n(), w.sigma().to_vec());
                assert!(verify_witness(fresh).is_ok(), "n = {n}");
            } else {
                assert!(c.witness().is_none());
            }
        }
    }

    #[test]
    fn shape_matches_valuations() {
        assert_eq!(shape(30), Shape::TwoR);
        assert_eq!(shape(60), Shape::FourR);
        assert_eq!(shape(15), Shape::OddR);
        assert_eq!(shape(8), Shape::Other);
        assert_eq!(shape(45), Shape::Other);
        assert_eq!(shape(5), Shape::SmallTable);
    }

    #[test]
    fn reports_stop_at_first_rejection() {
        for n in 8..3000 {
            let r = evaluate(n).report;
            if let Some(pos) = r.checks().iter().position(|c| !c.passed()) {
                assert_eq!(pos, r.checks().len() - 1, "n = {n}");
            }
        }
    }

    #[test]
    fn rejection_names_are_stable() {
        for n in [8u64, 12, 13, 20, 26, 31, 45, 99, 1000] {
            let a = evaluate(n).report.rejection().map(|c| c.name);
            let b = evaluate(n).report.rejection().map(|c| c.name);
            assert!(a.is_some());
            assert_eq!(a, b);
        }
    }

    #[test]
    fn classification_json() {
        let v = serde_json::to_value(classify(10)).unwrap();
        assert_eq!(v["status"], "not_exponential");
        assert!(v["witness"].is_null());
        assert!(v["reason"].as_str().unwrap().contains("two_adic_p_minus_1"));
        let v = serde_json::to_value(classify(7)).unwrap();
        assert_eq!(v["status"], "exponential");
        assert_eq!(
            v["witness"]["sigma"],
            serde_json::json!([6, 2, 1, 5, 7, 3, 4])
        );
    }
}
