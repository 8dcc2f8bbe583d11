use ragfuzz_core::diff::{classify, DiffError, Kind};
use ragfuzz_core::toolchain::RunStatus;
use ragfuzz_fixtures::{brute_force_classify, random_matrix};

#[test]
fn classify_agrees_with_brute_force_on_1000_matrices() {
    let mut disagreements = Vec::new();
    let mut nonempty = 0;
    for seed in 0..1000u64 {
        let (matrix, policy) = random_matrix(seed);
        let oracle = brute_force_classify(&matrix, &policy);
        let got = classify(&matrix, &policy.to_policy());
        match (oracle, got) {
            (None, Err(DiffError::InsufficientCells { .. })) => {}
            (Some(want), Ok(got)) => {
                nonempty += usize::from(!want.is_empty());
                if want != got {
                    disagreements.push(seed);
                }
            }
            _ => disagreements.push(seed),
        }
    }
    assert!(disagreements.is_empty(), "seeds {disagreements:?}");
    // The generator has to exercise the classifier, not just empty matrices.
    assert!(nonempty > 500, "{nonempty}");
}

#[test]
fn identical_matrix_has_no_findings() {
    let (mut matrix, policy) = random_matrix(7);
    for r in matrix.cells.values_mut() {
        r.status = RunStatus::Ok;
        r.stdout = "same\n".into();
        r.stderr.clear();
    }
    assert_eq!(brute_force_classify(&matrix, &policy), Some(vec![]));
}

#[test]
fn every_kind_appears_across_the_seed_range() {
    let mut seen = std::collections::BTreeSet::new();
    for seed in 0..200u64 {
        let (matrix, policy) = random_matrix(seed);
        for d in brute_force_classify(&matrix, &policy).unwrap_or_default() {
            seen.insert(d.kind);
        }
    }
    assert_eq!(seen.into_iter().collect::<Vec<_>>(), Kind::ALL.to_vec());
}
