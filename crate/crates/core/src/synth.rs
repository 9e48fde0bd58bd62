//! Grammars and inputs used by tests and benchmarks.

use indexmap::IndexMap;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::oracle::{BnfGrammar, BnfSymbol};

/// `L : L L | '.' ;` drives node creation to its cubic worst case.
pub const WORST_CASE: &str = "start = L ;\nL : L L | '.' ;\n";

/// `S : S S | 'a' ;`: `aⁿ` has Catalan(n-1) parses.
pub const CATALAN: &str = "start = S ;\nS : S S | 'a' ;\n";

/// Left-recursive expression grammar over `n`, `+`, `*` and parentheses.
pub const ARITHMETIC: &str = "start = E ;
E : E '+' T | T ;
T : T '*' F | F ;
F : '(' E ')' | 'n' ;
";

/// `n` pairwise distinct tokens, for the wildcard grammar.
pub fn distinct_tokens(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("t{i}")).collect()
}

/// A random well-formed expression of roughly `n` tokens for [`ARITHMETIC`].
pub fn arithmetic_tokens(n: usize, seed: u64) -> Vec<String> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out: Vec<&str> = Vec::with_capacity(n + 16);
    let mut depth = 0usize;
    loop {
        while depth < 8 && rng.gen_bool(0.15) {
            out.push("(");
            depth += 1;
        }
        out.push("n");
        while depth > 0 && rng.gen_bool(0.3) {
            out.push(")");
            depth -= 1;
        }
        if out.len() + depth >= n {
            break;
        }
        out.push(if rng.gen_bool(0.5) { "+" } else { "*" });
    }
    out.extend(std::iter::repeat_n(")", depth));
    out.into_iter().map(String::from).collect()
}

/// Shape limits for [`random_grammar`].
#[derive(Clone, Copy, Debug)]
pub struct RandomShape {
    pub max_nonterminals: usize,
    pub max_alternatives: usize,
    pub max_symbols: usize,
    pub alphabet: usize,
}

impl Default for RandomShape {
    fn default() -> Self {
        RandomShape {
            max_nonterminals: 10,
            max_alternatives: 3,
            max_symbols: 3,
            alphabet: 3,
        }
    }
}

pub const ALPHABET: [&str; 3] = ["a", "b", "c"];

/// A random grammar over `a`, `b`, `c`. Recursion of any kind, empty
/// alternatives and empty languages all occur. Alternatives of one
/// nonterminal are distinct.
pub fn random_grammar(seed: u64, shape: RandomShape) -> BnfGrammar {
    let mut rng = StdRng::seed_from_u64(seed);
    let k = rng.gen_range(1..=shape.max_nonterminals);
    let sigma = shape.alphabet.clamp(1, ALPHABET.len());
    let names: Vec<String> = (0..k).map(|i| format!("N{i}")).collect();
    let mut productions = IndexMap::new();
    for name in &names {
        let want = rng.gen_range(1..=shape.max_alternatives);
        let mut alts: Vec<Vec<BnfSymbol>> = Vec::new();
        for _ in 0..want * 4 {
            if alts.len() == want {
                break;
            }
            let len = rng.gen_range(0..=shape.max_symbols);
            let alt: Vec<BnfSymbol> = (0..len)
                .map(|_| {
                    if rng.gen_bool(0.5) {
                        BnfSymbol::t(ALPHABET[rng.gen_range(0..sigma)])
                    } else {
                        BnfSymbol::n(&names[rng.gen_range(0..k)])
                    }
                })
                .collect();
            if !alts.contains(&alt) {
                alts.push(alt);
            }
        }
        productions.insert(name.clone(), alts);
    }
    BnfGrammar {
        start: names[0].clone(),
        productions,
    }
}

/// Every string over the first `sigma` letters of [`ALPHABET`] with at most
/// `max_len` letters, shortest first.
pub fn all_strings(sigma: usize, max_len: usize) -> Vec<Vec<&'static str>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for a in &ALPHABET[..sigma] {
                let mut v: Vec<&'static str> = w.clone();
                v.push(a);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Catalan numbers by the binary-tree recurrence `C(n+1) = Σ C(i)·C(n-i)`.
pub fn catalan(n: usize) -> u128 {
    let mut c = vec![1u128];
    for m in 1..=n {
        c.push((0..m).map(|i| c[i] * c[m - 1 - i]).sum());
    }
    c[n]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loader::parse_grammar_text;
    use crate::oracle::earley_recognize;

    #[test]
    fn fixed_grammars_load() {
        for text in [WORST_CASE, CATALAN, ARITHMETIC] {
            parse_grammar_text(text).unwrap();
        }
    }

    #[test]
    fn arithmetic_inputs_are_sentences() {
        let g = parse_grammar_text(ARITHMETIC).unwrap();
        for seed in 0..20 {
            let toks = arithmetic_tokens(40, seed);
            assert!(toks.len() >= 40);
            let w: Vec<&str> = toks.iter().map(String::as_str).collect();
            assert!(earley_recognize(&g, &w), "{w:?}");
        }
    }

    #[test]
    fn random_grammars_respect_shape() {
        for seed in 0..100 {
            let g = random_grammar(seed, RandomShape::default());
            assert!(g.productions.len() <= 10);
            for alts in g.productions.values() {
                assert!(!alts.is_empty() && alts.len() <= 3);
            }
            assert!(g.terminals().len() <= 3);
            assert_eq!(parse_grammar_text(&g.to_text()).unwrap(), g);
        }
    }

    #[test]
    fn catalan_by_tree_count() {
        // Binary trees with n internal nodes, counted by explicit enumeration.
        fn trees(leaves: usize) -> usize {
            if leaves == 1 {
                return 1;
            }
            (1..leaves).map(|k| trees(k) * trees(leaves - k)).sum()
        }
        for n in 1..=10 {
            assert_eq!(catalan(n - 1), trees(n) as u128);
        }
        assert_eq!(all_strings(2, 2).len(), 7);
    }
}
