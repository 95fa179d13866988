use expcrs_core::analytics::density_report;

/// Sophie Germain counts against `2 C2 X / (ln X)^2`, tolerance 15%.
#[test]
fn sophie_germain_counts_track_the_heuristic() {
    let mut misses = Vec::new();
    for x in [10_000u64, 100_000, 1_000_000] {
        let r = density_report(x).unwrap();
        let ratio = r.sophie_germain_ratio();
        println!(
            "X = {x}: count {}, estimate {:.1}, ratio {ratio:.5}",
            r.sophie_germain, r.sophie_germain_estimate
        );
        if (ratio - 1.0).abs() > 0.15 {
            misses.push((x, ratio));
        }
    }
    assert!(misses.is_empty(), "outside 15%: {misses:?}");
}
