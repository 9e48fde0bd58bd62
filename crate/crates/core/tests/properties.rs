mod common;

use common::{load, outcome};
use proptest::prelude::*;
use pwd_core::synth::{self, random_grammar, RandomShape, ALPHABET};
use pwd_core::{earley_count, earley_recognize, enumerate_language, Grammar, ParseCount};

fn word() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(ALPHABET.to_vec()), 0..7)
        .prop_map(|w| w.into_iter().map(String::from).collect())
}

fn strs(w: &[String]) -> Vec<&str> {
    w.iter().map(String::as_str).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn recognizer_matches_earley(seed in any::<u64>(), w in word()) {
        let bnf = random_grammar(seed, RandomShape::default());
        let mut g = Grammar::from_bnf(bnf.clone(), Default::default());
        prop_assert_eq!(g.recognize(&w), earley_recognize(&bnf, &strs(&w)));
        prop_assert_eq!(g.parse(&w).count(), earley_count(&bnf, &strs(&w)));
    }

    #[test]
    fn every_sentence_is_accepted(seed in any::<u64>()) {
        let bnf = random_grammar(seed, RandomShape::default());
        let mut g = Grammar::from_bnf(bnf.clone(), Default::default());
        for w in enumerate_language(&bnf, 5) {
            prop_assert!(g.recognize(&w), "{:?}", w);
            let count = g.parse(&w).count();
            prop_assert!(!count.is_zero());
            prop_assert_eq!(count, earley_count(&bnf, &strs(&w)));
        }
    }

    #[test]
    fn compaction_preserves_results(seed in any::<u64>(), w in word()) {
        let bnf = random_grammar(seed, RandomShape::default());
        let mut on = load(&bnf, |_| {});
        let mut off = load(&bnf, |c| c.compaction = false);
        prop_assert_eq!(outcome(&mut on, &w), outcome(&mut off, &w));
        prop_assert!(on.seq_right_violations().is_empty());
    }

    #[test]
    fn derivative_is_left_quotient(seed in any::<u64>(), c in prop::sample::select(ALPHABET.to_vec()), w in word()) {
        let bnf = random_grammar(seed, RandomShape::default());
        let mut g = Grammar::from_bnf(bnf.clone(), Default::default());
        g.reset();
        let mut d = g.derive_label(g.root(), c);
        for t in &w {
            d = g.derive_label(d, t);
        }
        let mut cw = vec![c];
        cw.extend(strs(&w));
        prop_assert_eq!(g.is_nullable(d), earley_recognize(&bnf, &cw));
    }

    #[test]
    fn counters_are_consistent(seed in any::<u64>(), w in word()) {
        let bnf = random_grammar(seed, RandomShape::default());
        let mut g = Grammar::from_bnf(bnf, Default::default());
        g.recognize(&w);
        let c = *g.counters();
        prop_assert!(c.derive_calls_uncached <= c.nodes_created.total());
        prop_assert_eq!(g.node_count(), g.initial_len() + c.nodes_created.total() as usize);
    }
}

#[test]
fn forest_stays_polynomial_while_count_explodes() {
    common::big_stack(|| {
        let mut g = Grammar::load(synth::CATALAN).unwrap();
        let mut sizes = Vec::new();
        for n in [4usize, 8, 12, 16] {
            let forest = g.parse(&vec!["a"; n]);
            assert_eq!(forest.count(), ParseCount::from(synth::catalan(n - 1) as u64));
            let size = forest.reachable_nodes().len();
            assert!(size <= 4 * n * n * n, "n={n}: {size} forest nodes");
            sizes.push(size);
        }
        // Parse counts grow by roughly 4× per extra token, the forest by far less.
        let growth = sizes[3] as f64 / sizes[2] as f64;
        assert!(growth < (16.0f64 / 12.0).powi(3) * 1.5, "{sizes:?}");
    });
}
