//! Brute-force oracles for the tree-query matcher and edit distance.

mod support;

use std::time::Instant;

use qgen_core::corpus::levenshtein;

#[test]
fn tree_query_matches_brute_force() {
    let started = Instant::now();
    let run = support::tree_oracle(1000, 4, 2024).unwrap();
    assert_eq!(run.trees, 1000);
    // the generator must actually exercise matches
    assert!(run.nonempty > 1000, "only {} non-empty cases", run.nonempty);
    assert!(started.elapsed().as_secs() < 30);
}

#[test]
fn levenshtein_matches_recursive_definition() {
    assert_eq!(support::levenshtein_oracle(2500, 99), Ok(2500));
    assert_eq!(levenshtein("kitten", "sitting"), 3);
}
mod props {
    use proptest::prelude::*;
    use qgen_core::corpus::levenshtein;

    proptest! {
        #[test]
        fn symmetric_and_bounded(a in "[a-d]{0,10}", b in "[a-d]{0,10}") {
            let d = levenshtein(&a, &b);
            prop_assert_eq!(d, levenshtein(&b, &a));
            prop_assert!(d <= a.len().max(b.len()));
            prop_assert!(d >= a.len().abs_diff(b.len()));
            prop_assert_eq!(d == 0, a == b);
        }

        #[test]
        fn triangle(a in "[ab]{0,8}", b in "[ab]{0,8}", c in "[ab]{0,8}") {
            prop_assert!(levenshtein(&a, &c) <= levenshtein(&a, &b) + levenshtein(&b, &c));
        }
    }
}
