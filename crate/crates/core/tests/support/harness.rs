//! Glue between the oracles and the pipeline under test.

use std::collections::BTreeSet;

use modelcc::grammar::{ProdId, TermId};
use modelcc::{Language, Mode};

use super::{maximal_matches, token_paths, OTree, TreeOracle};

pub type TreeSet = BTreeSet<Vec<ProdId>>;

/// Trees the pipeline yields in `mode`; an error counts as no tree.
pub fn pipeline_trees(lang: &Language, input: &str, mode: Mode) -> TreeSet {
    match lang.parse_forest(input, mode) {
        Ok(p) => p.forest.enumerate_trees(usize::MAX).trees.iter().map(|t| t.productions()).collect(),
        Err(_) => TreeSet::new(),
    }
}

/// Every tree over every complete tokenization, with the token classes it
/// was built on.
pub fn oracle_trees(lang: &Language, input: &str) -> Vec<(OTree, Vec<TermId>)> {
    let g = lang.grammar();
    let classes = g.reachable_terminals();
    let (_, complete) = maximal_matches(g, &classes, input);
    let origin = input.len() - input.trim_start().len();
    let mut out = Vec::new();
    for path in token_paths(&complete, origin, input.len()) {
        if path.is_empty() && origin < input.len() {
            continue;
        }
        for t in TreeOracle::new(g, &path).all_trees() {
            out.push((t, path.clone()));
        }
    }
    out
}

/// Checks unfiltered completeness and filtered soundness/completeness of
/// both rule modes against `violates`.
pub fn check_rules(lang: &Language, input: &str, violates: &dyn Fn(&OTree, &[TermId]) -> bool) -> Result<(), String> {
    let oracle = oracle_trees(lang, input);
    let all: TreeSet = oracle.iter().map(|(t, _)| t.productions()).collect();
    let kept: TreeSet = oracle.iter().filter(|(t, p)| !violates(t, p)).map(|(t, _)| t.productions()).collect();
    let off = pipeline_trees(lang, input, Mode::Off);
    if off != all {
        return Err(format!("{input:?}: unfiltered {} trees, oracle {}", off.len(), all.len()));
    }
    for mode in [Mode::Post, Mode::Inline] {
        let got = pipeline_trees(lang, input, mode);
        if got != kept {
            return Err(format!("{input:?} {mode:?}: kept {} trees, oracle keeps {}", got.len(), kept.len()));
        }
    }
    Ok(())
}

/// All concatenations of `blocks` (joined by spaces) with at most
/// `max_tokens` tokens, counting a block's words.
pub fn block_strings(blocks: &[&str], max_tokens: usize) -> Vec<String> {
    let sizes: Vec<usize> = blocks.iter().map(|b| b.split_whitespace().count()).collect();
    let mut out = Vec::new();
    let mut stack: Vec<(Vec<usize>, usize)> = vec![(Vec::new(), 0)];
    while let Some((seq, n)) = stack.pop() {
        if !seq.is_empty() {
            out.push(seq.iter().map(|&i| blocks[i]).collect::<Vec<_>>().join(" "));
        }
        for (i, &s) in sizes.iter().enumerate() {
            if n + s <= max_tokens {
                let mut next = seq.clone();
                next.push(i);
                stack.push((next, n + s));
            }
        }
    }
    out.sort();
    out
}

/// Expressions `E := 1 | E op E | (E)` over `ops` with at most
/// `max_tokens` tokens, as token lists joined without spaces.
pub fn expressions(ops: &[&str], max_tokens: usize) -> Vec<String> {
    // by_len[n] = every expression with exactly n tokens
    let mut by_len: Vec<BTreeSet<Vec<String>>> = vec![BTreeSet::new(); max_tokens + 1];
    by_len[1].insert(vec!["1".to_string()]);
    for n in 2..=max_tokens {
        let mut here = BTreeSet::new();
        if n >= 3 {
            for e in &by_len[n - 2] {
                let mut v = vec!["(".to_string()];
                v.extend(e.iter().cloned());
                v.push(")".to_string());
                here.insert(v);
            }
        }
        for a in 1..n.saturating_sub(1) {
            let b = n - 1 - a;
            for l in &by_len[a] {
                for r in &by_len[b] {
                    for op in ops {
                        let mut v = l.clone();
                        v.push(op.to_string());
                        v.extend(r.iter().cloned());
                        here.insert(v);
                    }
                }
            }
        }
        by_len[n] = here;
    }
    by_len.iter().flatten().map(|v| v.concat()).collect()
}
