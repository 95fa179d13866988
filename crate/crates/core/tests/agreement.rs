use expcrs_core::conditions::{classify, Status};
use expcrs_core::oracle::{decide, SearchConfig, Verdict};

#[test]
fn classification_matches_exhaustive_search() {
    let mut exponential = Vec::new();
    for n in 2..=28 {
        let c = classify(n);
        let o = decide(n, &SearchConfig::default()).unwrap();
        match (c.status, o.verdict) {
            (Status::ExponentialProven, Verdict::WitnessFound) => exponential.push(n),
            (Status::NotExponentialProven, Verdict::ExhaustivelyRefuted) => {}
            (status, verdict) => panic!("n = {n}: classified {status}, search says {verdict}"),
        }
        if let Some(w) = o.witness {
            assert!(w.is_verified());
        }
    }
    assert_eq!(exponential, [2, 3, 4, 5, 6, 7, 11, 14, 22, 23]);
}

#[test]
fn first_gap_is_not_settled_by_a_small_budget() {
    let c = classify(62);
    assert_eq!(c.status, Status::ConjecturalGap);
    let cfg = SearchConfig {
        node_budget: 20_000,
        ..SearchConfig::default()
    };
    let o = decide(62, &cfg).unwrap();
    // a witness here would contradict the conjecture
    assert_ne!(o.verdict, Verdict::WitnessFound);
}
