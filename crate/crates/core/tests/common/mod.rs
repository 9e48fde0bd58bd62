#![allow(dead_code)]

use pwd_core::oracle::BnfGrammar;
use pwd_core::synth::{self, all_strings, random_grammar, RandomShape};
use pwd_core::{parse_grammar_text, Grammar, ParserConfig, Tree};

pub struct Case {
    pub name: String,
    pub grammar: BnfGrammar,
    pub inputs: Vec<Vec<String>>,
}

fn owned(ws: Vec<Vec<&str>>) -> Vec<Vec<String>> {
    ws.into_iter()
        .map(|w| w.into_iter().map(String::from).collect())
        .collect()
}

const HANDPICKED: &[(&str, &str)] = &[
    ("ambiguous-nullable", "start = S ; S : S S | 'a' | ;"),
    ("unit-cycle", "start = S ; S : S | 'a' ;"),
    ("left-rec", "start = L ; L : L 'a' | 'b' ;"),
    ("right-rec", "start = R ; R : 'a' R | 'b' ;"),
    ("hidden-left-rec", "start = S ; S : A S 'b' | 'a' ; A : 'c' | ;"),
    ("mutual", "start = A ; A : B 'a' | 'c' ; B : A 'b' | ;"),
    ("empty-language", "start = S ; S : 'a' S ;"),
    ("balanced", "start = S ; S : 'a' S 'b' S | ;"),
    ("ab-ambiguous", "start = S ; S : S S | 'a' | 'b' ;"),
    ("nullable-chain", "start = S ; S : A B C ; A : 'a' | ; B : 'b' | ; C : 'c' | A ;"),
];

/// Grammars and inputs shared by the differential checks.
pub fn corpus(random: usize, max_len: usize) -> Vec<Case> {
    let mut out = Vec::new();
    for (name, text) in HANDPICKED {
        out.push(Case {
            name: name.to_string(),
            grammar: parse_grammar_text(text).unwrap(),
            inputs: owned(all_strings(3, max_len)),
        });
    }
    out.push(Case {
        name: "catalan".into(),
        grammar: parse_grammar_text(synth::CATALAN).unwrap(),
        inputs: (0..=7).map(|n| vec!["a".to_string(); n]).collect(),
    });
    out.push(Case {
        name: "worst-case".into(),
        grammar: parse_grammar_text(synth::WORST_CASE).unwrap(),
        inputs: (0..=8).map(synth::distinct_tokens).collect(),
    });
    out.push(Case {
        name: "arithmetic".into(),
        grammar: parse_grammar_text(synth::ARITHMETIC).unwrap(),
        inputs: (0..6)
            .map(|s| synth::arithmetic_tokens(10 + 10 * s as usize, s))
            .chain([vec!["n".into(), "+".into()], vec!["(".into(), "n".into()]])
            .collect(),
    });
    for seed in 0..random as u64 {
        out.push(Case {
            name: format!("random-{seed}"),
            grammar: random_grammar(10_000 + seed, RandomShape::default()),
            inputs: owned(all_strings(3, max_len)),
        });
    }
    out
}

pub fn load(bnf: &BnfGrammar, f: impl FnOnce(&mut ParserConfig)) -> Grammar {
    let mut cfg = ParserConfig::default();
    f(&mut cfg);
    Grammar::from_bnf(bnf.clone(), cfg)
}

/// Recognition, parse count and (when small and finite) the sorted trees.
#[derive(Debug, PartialEq, Eq)]
pub struct Outcome {
    pub accepted: bool,
    pub count: String,
    pub trees: Option<Vec<Tree>>,
}

pub fn outcome(g: &mut Grammar, w: &[String]) -> Outcome {
    let accepted = g.recognize(w);
    let forest = g.parse(w);
    let count = forest.count();
    let small = count.finite().is_some_and(|c| *c <= 64u32.into());
    Outcome {
        accepted,
        count: count.to_string(),
        trees: small.then(|| forest.trees(64)),
    }
}

/// Runs `f` on a thread with a large stack; deep grammars recurse deeply.
pub fn big_stack<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> T {
    std::thread::Builder::new()
        .stack_size(1 << 30)
        .spawn(f)
        .unwrap()
        .join()
        .unwrap()
}
