mod support;

use bcfuse_core::align::lexical_similarity;
use proptest::prelude::*;
use support::*;

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig::with_cases(n)
}

proptest! {
    #![proptest_config(cases(2000))]

    #[test]
    fn normalize_idempotent(s in "\\PC{0,32}") {
        prop_assert_eq!(check_normalize_idempotent(&s), Ok(()));
    }

    #[test]
    fn lexical_axioms(a in "[a-zA-Z _-]{0,16}", b in "[a-zA-Z _-]{0,16}") {
        prop_assert_eq!(check_lexical_axioms(&a, &b), Ok(()));
    }

    #[test]
    fn parsers_are_total(seed in any::<u64>()) {
        let text = random_text(&mut rng(seed), 400);
        prop_assert_eq!(check_parsers_total(&text), Ok(()));
    }

    #[test]
    fn parsers_are_total_on_arbitrary_strings(s in "\\PC{0,200}") {
        prop_assert_eq!(check_parsers_total(&s), Ok(()));
    }
}

proptest! {
    #![proptest_config(cases(300))]

    #[test]
    fn bcm_round_trip(seed in any::<u64>()) {
        let m = random_model(&mut rng(seed), "Comp", 6);
        prop_assert_eq!(check_round_trip(&m), Ok(()));
    }

    #[test]
    fn semantic_axioms(i in 0usize..9, j in 0usize..9) {
        let res = resources();
        let ids: Vec<&String> = res.domain.concepts.keys().collect();
        prop_assert_eq!(check_semantic_axioms(&res.domain, ids[i], ids[j]), Ok(()));
    }

    #[test]
    fn alignment_symmetry(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_model(&mut r, "Left", 6);
        let b = random_model(&mut r, "Right", 6);
        prop_assert_eq!(check_alignment_symmetry(&a, &b), Ok(()));
    }

    #[test]
    fn transform_preserves_counts(seed in any::<u64>()) {
        let m = random_model(&mut rng(seed), "Comp", 6);
        prop_assert_eq!(check_transform_counts(&m), Ok(()));
    }

    #[test]
    fn default_merge_conserves_and_has_no_naming_conflicts(seed in any::<u64>(), n in 2usize..=3) {
        let mut r = rng(seed);
        let models: Vec<_> = (0..n).map(|i| random_model(&mut r, &format!("C{i}"), 5)).collect();
        prop_assert_eq!(check_default_merge(&models), Ok(()));
    }

    #[test]
    fn self_merge_is_idempotent(seed in any::<u64>()) {
        let m = random_model(&mut rng(seed), "Comp", 6);
        prop_assert_eq!(check_self_merge(&m), Ok(()));
    }

    #[test]
    fn prefilter_is_sound(seed in any::<u64>()) {
        prop_assert!(iso_trial(seed).is_ok(), "{:?}", iso_trial(seed).err());
    }
}

#[test]
fn lexical_oracle_values() {
    // Edit distances computed by hand: author/writer = 5, writer/reviewer = 5.
    assert!((lexical_similarity("author", "writer") - 1.0 / 6.0).abs() < 1e-12);
    assert!((lexical_similarity("writer", "reviewer") - (1.0 - 5.0 / 8.0)).abs() < 1e-12);
    assert_eq!(lexical_similarity("", ""), 1.0);
}
