//! Checks shared by the property suite and the acceptance report. Each
//! returns a short summary or a description of the first failure.

use std::collections::BTreeMap;

use modelcc::binder::FieldValue;
use modelcc::gallery;
use modelcc::lexer::Lexer;
use modelcc::text::read_model;
use modelcc::Language;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;

use super::harness::{block_strings, check_rules, expressions};
use super::{maximal_matches, violates_arith, violates_composition, CompositionRule};

pub fn builtin(name: &str) -> Language {
    gallery::entry(name).unwrap().language().unwrap()
}

/// The ifelse gallery model with its composition switched to lazy.
pub fn lazy_ifelse() -> Language {
    let src = gallery::entry("ifelse").unwrap().source.replace("@composition(eager)", "@composition(lazy)");
    Language::from_source(&src).unwrap()
}

/// Every rule-bearing gallery family against its validator on all inputs up
/// to `max_tokens` tokens.
pub fn validator_sweep(max_tokens: usize) -> Result<usize, String> {
    let mut checked = 0;
    let arith = builtin("arith");
    let (g, m) = (arith.grammar().clone(), arith.model().clone());
    let mut inputs = expressions(&["+", "-", "*"], max_tokens);
    inputs.extend(["1+", "()", "1 1", "+1", "(1", "1)*", "1+*1", ")("].map(String::from));
    for input in &inputs {
        check_rules(&arith, input, &|t, toks| violates_arith(&g, &m, t, toks))?;
        checked += 1;
    }
    let blocks = block_strings(&["if c then", "x", "else"], max_tokens);
    for (lang, eager) in [(builtin("ifelse"), true), (lazy_ifelse(), false)] {
        let (g, m) = (lang.grammar().clone(), lang.model().clone());
        let rule = CompositionRule { element: "IfStatement", field: "otherwise", trailing: "ElseClause", eager };
        for input in &blocks {
            check_rules(&lang, input, &|t, _| violates_composition(&g, &m, t, &rule))?;
            checked += 1;
        }
    }
    let awk = builtin("awk");
    let (g, m) = (awk.grammar().clone(), awk.model().clone());
    let rule = CompositionRule { element: "PatternRule", field: "action", trailing: "Action", eager: true };
    for input in block_strings(&["/p/", "{ s }", "{ }", "{ s ; s }"], max_tokens) {
        check_rules(&awk, &input, &|t, _| violates_composition(&g, &m, t, &rule))?;
        checked += 1;
    }
    Ok(checked)
}

/// Overlapping classes: words, keywords, numbers, operators.
pub fn overlapping_language() -> Language {
    let src = r#"
        language Tok;
        element Doc @start { items : Item @multiplicity(0, *); }
        abstract element Item;
        basic element Word : Item @pattern("[a-z]+") @value(text);
        basic element Key : Item @pattern("if|in|int") @value(text);
        basic element Num : Item @pattern("[0-9]+(\\.[0-9]+)?") @value(number);
        basic element Dotted : Item @pattern("[0-9]+\\.") @value(text);
        basic element Op : Item @pattern("[+*<=-]|<=|==") @value(text);
        element Group : Item @prefix("\\(") @suffix("\\)") { inner : Item @multiplicity(0, *); }
    "#;
    Language::new(read_model(src).unwrap().model).unwrap()
}

/// Candidates equal the oracle's maximal matches; the pruned graph keeps
/// exactly the tokens on complete paths.
pub fn token_soundness(lang: &Language, input: &str) -> Result<(), String> {
    let g = lang.grammar();
    let (all, complete) = maximal_matches(g, &g.reachable_terminals(), input);
    let (raw, error) = Lexer::for_grammar(g).candidates(input);
    let got: Vec<_> = raw.tokens.iter().map(|t| (t.class, t.start, t.end, t.next)).collect();
    if got != all {
        return Err(format!("{input:?}: candidates {got:?}, oracle {all:?}"));
    }
    let full = complete.iter().any(|t| t.3 == input.len()) || input.trim().is_empty();
    if error.is_none() != full {
        return Err(format!("{input:?}: lexer error {error:?}, oracle complete={full}"));
    }
    if let Ok(graph) = lang.tokenize(input) {
        let kept: Vec<_> = graph.tokens.iter().map(|t| (t.class, t.start, t.end, t.next)).collect();
        if kept != complete {
            return Err(format!("{input:?}: kept {kept:?}, oracle {complete:?}"));
        }
        for t in &graph.tokens {
            if graph.text(t) != &input[t.start..t.end] || !input[t.end..t.next].trim().is_empty() {
                return Err(format!("{input:?}: token {t:?} misplaced"));
            }
        }
    } else if full {
        return Err(format!("{input:?}: tokenize failed on a coverable input"));
    }
    Ok(())
}

/// Graph declarations in index order and in a shuffled order.
pub fn graph_declarations(edges: &[Vec<usize>], seed: u64) -> (String, String) {
    let n = edges.len();
    let decl = |i: usize| {
        let targets: String = edges[i].iter().map(|t| format!(" -> v{}", t % n)).collect();
        format!("node v{i}{targets};")
    };
    let mut order: Vec<usize> = (0..n).collect();
    let forward = order.iter().map(|&i| decl(i)).collect::<Vec<_>>().join(" ");
    order.shuffle(&mut StdRng::seed_from_u64(seed));
    let shuffled = order.iter().map(|&i| decl(i)).collect::<Vec<_>>().join(" ");
    (forward, shuffled)
}

/// Node name to the names its edges resolve to.
pub fn graph_shape(lang: &Language, text: &str) -> Result<BTreeMap<String, Vec<String>>, String> {
    let asg = lang.parse(text, &lang.symbol_table()).map_err(|e| format!("{text:?}: {e}"))?;
    let mut out = BTreeMap::new();
    for (i, inst) in asg.nodes.iter().enumerate() {
        if asg.type_name(i) != "Node" {
            continue;
        }
        let Some(FieldValue::List(es)) = inst.field("edges") else { return Err("edges is not a list".into()) };
        let mut targets = Vec::new();
        for e in es {
            let edge = e.target().ok_or("edge is not an instance")?;
            let node = asg.nodes[edge].field("target").and_then(FieldValue::target).ok_or("unresolved edge")?;
            targets.push(asg.key_of(node).ok_or("target has no key")?.to_string());
        }
        out.insert(asg.key_of(i).ok_or("node has no key")?.to_string(), targets);
    }
    Ok(out)
}

pub fn order_independence(lang: &Language, edges: &[Vec<usize>], seed: u64) -> Result<(), String> {
    let (forward, shuffled) = graph_declarations(edges, seed);
    let a = graph_shape(lang, &forward)?;
    let b = graph_shape(lang, &shuffled)?;
    if a.len() != edges.len() || a != b {
        return Err(format!("{forward:?} vs {shuffled:?}: {a:?} vs {b:?}"));
    }
    Ok(())
}
