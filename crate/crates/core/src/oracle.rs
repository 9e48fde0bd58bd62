//! Reference algorithms over plain BNF: an Earley recognizer, a parse counter
//! built on the Earley chart, and a bounded language enumerator.
//!
//! Nothing here touches the expression graph, so these serve as independent
//! checks on the derivative parser.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use indexmap::IndexMap;

use crate::forest::ParseCount;
use crate::ids::WILDCARD;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BnfSymbol {
    Terminal(String),
    Nonterminal(String),
}

impl BnfSymbol {
    pub fn t(label: &str) -> BnfSymbol {
        BnfSymbol::Terminal(label.to_string())
    }

    pub fn n(name: &str) -> BnfSymbol {
        BnfSymbol::Nonterminal(name.to_string())
    }
}

/// A context-free grammar in conventional form.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BnfGrammar {
    pub start: String,
    pub productions: IndexMap<String, Vec<Vec<BnfSymbol>>>,
}

impl BnfGrammar {
    /// Concrete terminal labels, without the wildcard.
    pub fn terminals(&self) -> BTreeSet<String> {
        self.productions
            .values()
            .flatten()
            .flatten()
            .filter_map(|s| match s {
                BnfSymbol::Terminal(t) if t != WILDCARD => Some(t.clone()),
                _ => None,
            })
            .collect()
    }

    /// Renders the grammar in the text format accepted by the loader.
    pub fn to_text(&self) -> String {
        let mut out = format!("start = {} ;\n", self.start);
        for (name, alts) in &self.productions {
            let _ = write!(out, "{name} :");
            for (i, alt) in alts.iter().enumerate() {
                if i > 0 {
                    out.push_str(" |");
                }
                for sym in alt {
                    match sym {
                        BnfSymbol::Terminal(t) => {
                            let escaped = t.replace('\\', "\\\\").replace('\'', "\\'");
                            let _ = write!(out, " '{escaped}'");
                        }
                        BnfSymbol::Nonterminal(n) => {
                            let _ = write!(out, " {n}");
                        }
                    }
                }
            }
            out.push_str(" ;\n");
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Sym<'a> {
    T(&'a str),
    N(usize),
}

/// Productions indexed by number, with nonterminals as dense integers.
struct Indexed<'a> {
    start: usize,
    lhs: Vec<usize>,
    rhs: Vec<Vec<Sym<'a>>>,
    by_lhs: Vec<Vec<usize>>,
    nullable: Vec<bool>,
}

impl<'a> Indexed<'a> {
    fn new(g: &'a BnfGrammar) -> Indexed<'a> {
        let id = |n: &str| {
            g.productions
                .get_index_of(n)
                .unwrap_or_else(|| panic!("undefined nonterminal `{n}`"))
        };
        let mut lhs = Vec::new();
        let mut rhs = Vec::new();
        let mut by_lhs = vec![Vec::new(); g.productions.len()];
        for (a, (_, alts)) in g.productions.iter().enumerate() {
            for alt in alts {
                by_lhs[a].push(lhs.len());
                lhs.push(a);
                rhs.push(
                    alt.iter()
                        .map(|s| match s {
                            BnfSymbol::Terminal(t) => Sym::T(t.as_str()),
                            BnfSymbol::Nonterminal(n) => Sym::N(id(n)),
                        })
                        .collect::<Vec<_>>(),
                );
            }
        }
        let mut nullable = vec![false; g.productions.len()];
        loop {
            let mut changed = false;
            for (p, body) in rhs.iter().enumerate() {
                if !nullable[lhs[p]] && body.iter().all(|s| matches!(s, Sym::N(b) if nullable[*b])) {
                    nullable[lhs[p]] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        Indexed {
            start: id(&g.start),
            lhs,
            rhs,
            by_lhs,
            nullable,
        }
    }
}

fn matches(terminal: &str, token: &str) -> bool {
    terminal == WILDCARD || terminal == token
}

/// `(nonterminal, from, to)` triples such that the nonterminal derives
/// `w[from..to]`, read off the completed items of an Earley chart.
fn chart(ix: &Indexed<'_>, w: &[&str]) -> HashSet<(usize, usize, usize)> {
    #[derive(Clone, Copy, PartialEq, Eq, Hash)]
    struct Item {
        prod: usize,
        dot: usize,
        origin: usize,
    }
    let n = w.len();
    let mut sets: Vec<Vec<Item>> = vec![Vec::new(); n + 1];
    let mut seen: Vec<HashSet<Item>> = vec![HashSet::new(); n + 1];
    let mut done = HashSet::new();
    let add = |sets: &mut Vec<Vec<Item>>, seen: &mut Vec<HashSet<Item>>, k: usize, it: Item| {
        if seen[k].insert(it) {
            sets[k].push(it);
        }
    };
    for &p in &ix.by_lhs[ix.start] {
        add(&mut sets, &mut seen, 0, Item { prod: p, dot: 0, origin: 0 });
    }
    for k in 0..=n {
        let mut i = 0;
        while i < sets[k].len() {
            let it = sets[k][i];
            i += 1;
            let body = &ix.rhs[it.prod];
            match body.get(it.dot) {
                None => {
                    let a = ix.lhs[it.prod];
                    done.insert((a, it.origin, k));
                    let waiting: Vec<Item> = sets[it.origin]
                        .iter()
                        .filter(|x| ix.rhs[x.prod].get(x.dot) == Some(&Sym::N(a)))
                        .copied()
                        .collect();
                    for x in waiting {
                        add(&mut sets, &mut seen, k, Item { dot: x.dot + 1, ..x });
                    }
                }
                Some(Sym::N(b)) => {
                    for &p in &ix.by_lhs[*b] {
                        add(&mut sets, &mut seen, k, Item { prod: p, dot: 0, origin: k });
                    }
                    if ix.nullable[*b] {
                        add(&mut sets, &mut seen, k, Item { dot: it.dot + 1, ..it });
                    }
                }
                Some(Sym::T(t)) => {
                    if k < n && matches(t, w[k]) {
                        add(&mut sets, &mut seen, k + 1, Item { dot: it.dot + 1, ..it });
                    }
                }
            }
        }
    }
    // Nullable completions skipped by the prediction shortcut still need
    // their spans recorded for counting.
    for (a, &nl) in ix.nullable.iter().enumerate() {
        if nl {
            for k in 0..=n {
                done.insert((a, k, k));
            }
        }
    }
    done
}

/// Whether `w` is in the language of `g`.
pub fn earley_recognize(g: &BnfGrammar, w: &[&str]) -> bool {
    let ix = Indexed::new(g);
    chart(&ix, w).contains(&(ix.start, 0, w.len()))
}

/// Number of distinct parse trees of `w`; `Infinite` when a cycle of unit or
/// empty productions can be pumped.
pub fn earley_count(g: &BnfGrammar, w: &[&str]) -> ParseCount {
    let ix = Indexed::new(g);
    let derivable = chart(&ix, w);
    if !derivable.contains(&(ix.start, 0, w.len())) {
        return ParseCount::zero();
    }
    let mut c = Count {
        ix: &ix,
        w,
        derivable,
        memo: HashMap::new(),
        on_stack: HashSet::new(),
        suffix: HashMap::new(),
    };
    c.nt(ix.start, 0, w.len())
}

struct Count<'a, 'b> {
    ix: &'b Indexed<'a>,
    w: &'b [&'b str],
    derivable: HashSet<(usize, usize, usize)>,
    memo: HashMap<(usize, usize, usize), ParseCount>,
    on_stack: HashSet<(usize, usize, usize)>,
    suffix: HashMap<(usize, usize, usize, usize), bool>,
}

impl Count<'_, '_> {
    fn nt(&mut self, a: usize, i: usize, j: usize) -> ParseCount {
        let key = (a, i, j);
        if let Some(c) = self.memo.get(&key) {
            return c.clone();
        }
        if !self.on_stack.insert(key) {
            return ParseCount::Infinite;
        }
        let mut total = ParseCount::zero();
        for p in self.ix.by_lhs[a].clone() {
            total = total + self.ways(p, 0, i, j);
        }
        self.on_stack.remove(&key);
        self.memo.insert(key, total.clone());
        total
    }

    /// Derivations of `w[i..j]` from the body of `p` starting at position `k`.
    fn ways(&mut self, p: usize, k: usize, i: usize, j: usize) -> ParseCount {
        let body = &self.ix.rhs[p];
        match body.get(k) {
            None => {
                if i == j {
                    ParseCount::one()
                } else {
                    ParseCount::zero()
                }
            }
            Some(Sym::T(t)) => {
                if i < j && matches(t, self.w[i]) {
                    self.ways(p, k + 1, i + 1, j)
                } else {
                    ParseCount::zero()
                }
            }
            Some(&Sym::N(b)) => {
                let mut total = ParseCount::zero();
                for m in i..=j {
                    if self.derivable.contains(&(b, i, m)) && self.suffix_ok(p, k + 1, m, j) {
                        let head = self.nt(b, i, m);
                        let tail = self.ways(p, k + 1, m, j);
                        total = total + head * tail;
                    }
                }
                total
            }
        }
    }

    fn suffix_ok(&mut self, p: usize, k: usize, i: usize, j: usize) -> bool {
        if let Some(&v) = self.suffix.get(&(p, k, i, j)) {
            return v;
        }
        let v = match self.ix.rhs[p].get(k) {
            None => i == j,
            Some(Sym::T(t)) => i < j && matches(t, self.w[i]) && self.suffix_ok(p, k + 1, i + 1, j),
            Some(&Sym::N(b)) => {
                (i..=j).any(|m| self.derivable.contains(&(b, i, m)) && self.suffix_ok(p, k + 1, m, j))
            }
        };
        self.suffix.insert((p, k, i, j), v);
        v
    }
}

/// Every word of the language with at most `max_len` tokens.
///
/// Computed as a least fixed point over bounded word sets per nonterminal.
/// The wildcard stands for each concrete terminal of the grammar (or for the
/// literal wildcard label when the grammar has none).
pub fn enumerate_language(g: &BnfGrammar, max_len: usize) -> BTreeSet<Vec<String>> {
    let ix = Indexed::new(g);
    let mut alphabet: Vec<String> = g.terminals().into_iter().collect();
    if alphabet.is_empty() {
        alphabet.push(WILDCARD.to_string());
    }
    let mut lang: Vec<BTreeSet<Vec<String>>> = vec![BTreeSet::new(); g.productions.len()];
    loop {
        let mut changed = false;
        for p in 0..ix.rhs.len() {
            let mut partial: BTreeSet<Vec<String>> = BTreeSet::from([Vec::new()]);
            for sym in &ix.rhs[p] {
                let options: Vec<Vec<String>> = match sym {
                    Sym::T(t) if *t == WILDCARD => alphabet.iter().map(|a| vec![a.clone()]).collect(),
                    Sym::T(t) => vec![vec![t.to_string()]],
                    Sym::N(b) => lang[*b].iter().cloned().collect(),
                };
                let mut next = BTreeSet::new();
                for pre in &partial {
                    for o in &options {
                        if pre.len() + o.len() <= max_len {
                            let mut w = pre.clone();
                            w.extend(o.iter().cloned());
                            next.insert(w);
                        }
                    }
                }
                partial = next;
                if partial.is_empty() {
                    break;
                }
            }
            let a = ix.lhs[p];
            for w in partial {
                changed |= lang[a].insert(w);
            }
        }
        if !changed {
            break;
        }
    }
    std::mem::take(&mut lang[ix.start])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loader::parse_grammar_text;

    fn g(text: &str) -> BnfGrammar {
        parse_grammar_text(text).unwrap()
    }

    fn words(list: &[&str]) -> BTreeSet<Vec<String>> {
        list.iter()
            .map(|w| w.chars().map(|c| c.to_string()).collect())
            .collect()
    }

    #[test]
    fn recognize_examples() {
        let ab = g("start = S ; S : S S | 'a' | 'b' ;");
        assert!(earley_recognize(&ab, &["a", "b"]));
        let nul = g("start = S ; S : 'a' | ;");
        assert!(earley_recognize(&nul, &[]));
        let empty = g("start = S ; S : 'a' S ;");
        assert!(!earley_recognize(&empty, &["a", "a", "a"]));
        let hidden = g("start = S ; S : A S 'b' | 'x' ; A : ;");
        assert!(earley_recognize(&hidden, &["x", "b", "b"]));
    }

    #[test]
    fn count_examples() {
        let cat = g("start = S ; S : S S | 'a' ;");
        assert_eq!(earley_count(&cat, &["a"; 4]), ParseCount::from(5));
        assert_eq!(earley_count(&g("start = S ; S : 'a' ;"), &["a"]), ParseCount::from(1));
        assert_eq!(earley_count(&g("start = S ; S : S | 'a' ;"), &["a"]), ParseCount::Infinite);
        assert_eq!(earley_count(&g("start = S ; S : S | 'a' ;"), &["b"]), ParseCount::zero());
        let eps_cycle = g("start = S ; S : S S | 'a' | ;");
        assert_eq!(earley_count(&eps_cycle, &[]), ParseCount::Infinite);
        let wild = g("start = S ; S : '.' '.' ;");
        assert_eq!(earley_count(&wild, &["q", "r"]), ParseCount::from(1));
    }

    #[test]
    fn language_examples() {
        assert_eq!(
            enumerate_language(&g("start = S ; S : 'a' S | ;"), 3),
            words(&["", "a", "aa", "aaa"])
        );
        assert_eq!(enumerate_language(&g("start = S ; S : S S | 'a' ;"), 2), words(&["a", "aa"]));
        assert!(enumerate_language(&g("start = S ; S : 'a' S ;"), 5).is_empty());
    }

    #[test]
    fn text_round_trip() {
        let src = g(r"start = S ; S : S 'it\'s' | T ; T : '\\' | ;");
        assert_eq!(g(&src.to_text()), src);
    }
}
