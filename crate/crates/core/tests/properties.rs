mod support;

use std::time::Instant;

use modelcc::binder::apply_semantics;
use modelcc::gallery::{self, eval_semantics};
use modelcc::text::{read_model, write_model};
use modelcc::{Mode, RuleSet};
use proptest::prelude::*;
use support::checks::{builtin, order_independence, overlapping_language, token_soundness, validator_sweep};
use support::{count_trees_bruteforce, eval_conventional};

#[test]
fn disambiguation_matches_validators_up_to_ten_tokens() {
    let n = validator_sweep(10).unwrap();
    assert!(n > 1000, "{n}");
}

#[test]
fn left_recursive_chain_of_500_operators() {
    let lang = builtin("arith");
    let input = format!("1{}", "+1".repeat(500));
    let started = Instant::now();
    let asg = lang.parse(&input, &lang.symbol_table()).unwrap();
    let value = apply_semantics(&asg, &eval_semantics()).unwrap();
    assert_eq!(value, 501.0);
    assert!(started.elapsed().as_secs_f64() < 5.0, "{:?}", started.elapsed());
}

#[test]
fn gallery_models_round_trip() {
    for e in gallery::ENTRIES {
        let first = read_model(e.source).unwrap().model;
        let text = write_model(&first);
        let second = read_model(&text).unwrap().model;
        assert_eq!(first, second, "{}", e.name);
        assert_eq!(write_model(&second), text, "{}", e.name);
    }
}

/// Random expression text with depth at most `depth`.
fn expr_strategy(depth: u32) -> impl Strategy<Value = String> {
    let leaf = prop_oneof![(0u32..100).prop_map(|n| n.to_string()), (0u32..100, 1u32..100).prop_map(|(a, b)| format!("{a}.{b}"))];
    leaf.prop_recursive(depth, 64, 2, |inner| {
        prop_oneof![
            (inner.clone(), prop_oneof![Just('+'), Just('-'), Just('*'), Just('/')], inner.clone())
                .prop_map(|(a, op, b)| format!("{a}{op}{b}")),
            inner.prop_map(|e| format!("({e})")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn evaluation_agrees_with_shunting_yard(e in expr_strategy(6)) {
        let lang = builtin("arith");
        let asg = lang.parse(&e, &lang.symbol_table()).unwrap();
        let got = apply_semantics(&asg, &eval_semantics()).unwrap();
        let want = eval_conventional(&e);
        prop_assert!(got == want || (got.is_nan() && want.is_nan()), "{e}: {got} vs {want}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn unfiltered_count_matches_brute_force(ops in proptest::collection::vec(0usize..4, 0..7), parens in any::<bool>()) {
        let lang = builtin("arith").with_rules(RuleSet::NONE);
        let symbols = ["+", "-", "*", "/"];
        let mut e = String::from("1");
        for (i, op) in ops.iter().enumerate() {
            e.push_str(symbols[*op]);
            e.push_str(if parens && i == 0 { "(2)" } else { "2" });
        }
        let parsed = lang.parse_forest(&e, Mode::Off).unwrap();
        let classes: Vec<usize> = parsed.tokens.tokens.iter().map(|t| t.class).collect();
        prop_assert_eq!(parsed.forest.tree_count(), count_trees_bruteforce(lang.grammar(), &classes));
    }

    #[test]
    fn token_graph_is_path_sound(input in "[a-z0-9 .+*()<=-]{0,14}") {
        let lang = overlapping_language();
        if let Err(e) = token_soundness(&lang, &input) {
            prop_assert!(false, "{}", e);
        }
    }

    #[test]
    fn reference_resolution_ignores_declaration_order(
        edges in proptest::collection::vec(proptest::collection::vec(0usize..6, 0..4), 1..6),
        seed in any::<u64>(),
    ) {
        if let Err(e) = order_independence(&builtin("graph"), &edges, seed) {
            prop_assert!(false, "{}", e);
        }
    }
}
#[test]
fn json_model_agrees_with_reference_parser() {
    let lang = builtin("json");
    for doc in support::json::documents(0x5eed, 100) {
        let want: serde_json::Value = serde_json::from_str(&doc).unwrap();
        let asg = lang.parse(&doc, &lang.symbol_table()).unwrap_or_else(|e| panic!("{doc:?}: {e}"));
        let got = support::json::asg_value(&asg);
        assert!(support::json_equal(&got, &want), "{doc:?}\n{got}\n{want}");
    }
    for doc in support::json::INVALID {
        assert!(serde_json::from_str::<serde_json::Value>(doc).is_err(), "{doc:?}");
        assert!(lang.parse(doc, &lang.symbol_table()).is_err(), "{doc:?}");
    }
}
