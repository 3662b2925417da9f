use kex_core::color::{
    deterministic_family, deterministic_family_with, verify_family, Construction, FamilyOptions,
};

#[test]
fn small_universes_are_perfect() {
    for n in 1..=12 {
        for k in 1..=4 {
            let fam = deterministic_family(n, k).unwrap();
            assert_eq!(verify_family(&fam), Ok(()), "n = {n}, k = {k}");
        }
    }
}

#[test]
fn larger_palettes_are_perfect() {
    for (n, k) in [(20, 5), (16, 6)] {
        let fam = deterministic_family(n, k).unwrap();
        assert_eq!(verify_family(&fam), Ok(()), "n = {n}, k = {k}");
    }
}

#[test]
fn forced_two_stage_is_perfect() {
    let opts = FamilyOptions {
        force_two_stage: true,
        ..FamilyOptions::default()
    };
    for (n, k) in [(12, 3), (16, 4), (16, 6)] {
        let start = std::time::Instant::now();
        let fam = deterministic_family_with(n, k, opts).unwrap();
        assert!(matches!(fam.construction, Construction::TwoStage { .. }));
        assert_eq!(verify_family(&fam), Ok(()), "n = {n}, k = {k}");
        eprintln!(
            "({n},{k}) two-stage: {} maps in {:?}",
            fam.len(),
            start.elapsed()
        );
    }
}
