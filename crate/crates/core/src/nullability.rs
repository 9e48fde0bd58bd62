//! Nullability as a least fixed point over the booleans.
//!
//! The optimized engine runs a plain recursion first. A node met again while
//! its own computation is open answers "assumed not nullable" for the current
//! generation; only then are dependency edges recorded, and a worklist
//! re-evaluates dependents of nodes that later flip to nullable. A node still
//! assumed at the end of its generation is not nullable, so later generations
//! promote it without looking at it again.

use std::collections::HashMap;

use crate::grammar::{Form, Grammar, NullabilityMode};
use crate::ids::NodeId;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NullState {
    /// Never visited.
    Unknown,
    Nullable,
    NotNullable,
    /// Assumed not nullable by the computation of the given generation.
    Assumed(u64),
}

impl NullState {
    pub(crate) fn initial_productive(form: &Form) -> NullState {
        match form {
            Form::Empty => NullState::NotNullable,
            Form::Eps(_) | Form::Token(_) => NullState::Nullable,
            _ => NullState::Unknown,
        }
    }

    pub(crate) fn initial(form: &Form) -> NullState {
        match form {
            Form::Empty | Form::Token(_) => NullState::NotNullable,
            Form::Eps(_) => NullState::Nullable,
            _ => NullState::Unknown,
        }
    }

    pub fn is_final(self) -> bool {
        matches!(self, NullState::Nullable | NullState::NotNullable)
    }
}

/// Per-parse bookkeeping of the optimized engine.
#[derive(Clone, Debug, Default)]
pub struct NullEngine {
    generation: u64,
    /// `child → nodes whose provisional answer read child`.
    deps: HashMap<NodeId, Vec<NodeId>>,
    worklist: Vec<NodeId>,
}

impl NullEngine {
    pub fn generation(&self) -> u64 {
        self.generation
    }
}

/// Answer of one visit: the value, and whether it may still change.
#[derive(Clone, Copy)]
struct Answer {
    value: bool,
    provisional: bool,
}

const TRUE: Answer = Answer {
    value: true,
    provisional: false,
};
const FALSE: Answer = Answer {
    value: false,
    provisional: false,
};
const ASSUMED: Answer = Answer {
    value: false,
    provisional: true,
};

/// Which least fixed point a query computes. Both use the same lattice and
/// the same rules for `Alt`, `Seq` and `Red`; they differ only on tokens.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Analysis {
    Nullable,
    Productive,
}

impl Grammar {
    /// Whether the language of `n` contains the empty word, using the
    /// configured algorithm.
    pub fn is_nullable(&mut self, n: NodeId) -> bool {
        match self.config.nullability {
            NullabilityMode::Optimized => {
                match self.nodes[n.index()].null {
                    NullState::Nullable => return true,
                    NullState::NotNullable => return false,
                    _ => {}
                }
                let generation = self.mint_generation();
                self.nullable_in_generation(n, generation)
            }
            NullabilityMode::Naive => self.is_nullable_naive(n),
        }
    }

    /// Starts a new top-level computation.
    pub fn mint_generation(&mut self) -> u64 {
        self.counters.generation_count += 1;
        self.next_generation()
    }

    fn next_generation(&mut self) -> u64 {
        self.nulls.generation += 1;
        self.nulls.deps.clear();
        self.nulls.worklist.clear();
        self.nulls.generation
    }

    /// Optimized query within generation `generation`, which must be the
    /// most recently minted one.
    pub fn nullable_in_generation(&mut self, n: NodeId, generation: u64) -> bool {
        debug_assert_eq!(generation, self.nulls.generation);
        self.query(n, generation, Analysis::Nullable)
    }

    /// Whether `n` derives at least one word.
    pub fn is_productive(&mut self, n: NodeId) -> bool {
        match self.nodes[n.index()].prod {
            NullState::Nullable => true,
            NullState::NotNullable => false,
            _ => {
                let generation = self.next_generation();
                self.query(n, generation, Analysis::Productive)
            }
        }
    }

    fn query(&mut self, n: NodeId, generation: u64, a: Analysis) -> bool {
        let answer = self.visit(n, generation, a);
        self.drain(generation, a);
        answer.value || *self.cell(n, a) == NullState::Nullable
    }

    fn cell(&mut self, n: NodeId, a: Analysis) -> &mut NullState {
        let node = &mut self.nodes[n.index()];
        match a {
            Analysis::Nullable => &mut node.null,
            Analysis::Productive => &mut node.prod,
        }
    }

    fn visit(&mut self, n: NodeId, generation: u64, a: Analysis) -> Answer {
        let cell = self.cell(n, a);
        match *cell {
            NullState::Nullable => TRUE,
            NullState::NotNullable => FALSE,
            NullState::Assumed(g) if g == generation => ASSUMED,
            NullState::Assumed(_) => {
                *cell = NullState::NotNullable;
                FALSE
            }
            NullState::Unknown => {
                *cell = NullState::Assumed(generation);
                self.compute(n, generation, a)
            }
        }
    }

    fn depend(&mut self, child: NodeId, parent: NodeId) {
        let list = self.nulls.deps.entry(child).or_default();
        if !list.contains(&parent) {
            list.push(parent);
        }
    }

    /// Evaluates `n` from its children and records the outcome.
    fn compute(&mut self, n: NodeId, generation: u64, a: Analysis) -> Answer {
        match a {
            Analysis::Nullable => self.counters.nullable_visits += 1,
            Analysis::Productive => self.counters.emptiness_visits += 1,
        }
        let answer = match self.nodes[n.index()].form {
            Form::Empty => FALSE,
            Form::Token(_) if a == Analysis::Nullable => FALSE,
            Form::Token(_) | Form::Eps(_) => TRUE,
            Form::Alt(l, r) => {
                let x = self.visit(l, generation, a);
                if x.value {
                    TRUE
                } else {
                    let y = self.visit(r, generation, a);
                    if y.value {
                        TRUE
                    } else {
                        if x.provisional {
                            self.depend(l, n);
                        }
                        if y.provisional {
                            self.depend(r, n);
                        }
                        Answer {
                            value: false,
                            provisional: x.provisional || y.provisional,
                        }
                    }
                }
            }
            Form::Seq(l, r) => {
                let x = self.visit(l, generation, a);
                if !x.value {
                    if x.provisional {
                        self.depend(l, n);
                    }
                    x
                } else {
                    let y = self.visit(r, generation, a);
                    if y.provisional {
                        self.depend(r, n);
                    }
                    y
                }
            }
            Form::Red(p, _) => {
                let x = self.visit(p, generation, a);
                if x.provisional {
                    self.depend(p, n);
                }
                x
            }
        };
        if answer.value {
            *self.cell(n, a) = NullState::Nullable;
            if let Some(ds) = self.nulls.deps.remove(&n) {
                self.nulls.worklist.extend(ds);
            }
        } else if !answer.provisional {
            *self.cell(n, a) = NullState::NotNullable;
        }
        answer
    }

    /// Re-evaluates dependents of nodes that flipped to true.
    fn drain(&mut self, generation: u64, a: Analysis) {
        while let Some(d) = self.nulls.worklist.pop() {
            if *self.cell(d, a) == NullState::Assumed(generation) {
                self.compute(d, generation, a);
            }
        }
    }

    /// Replaces every node allocated at or after `from` that derives no word
    /// with `Empty`. Local compaction cannot see emptiness through a cycle, so
    /// without this a dead branch such as `X = (X ∘ p) ∪ ∅` would be carried
    /// along and re-derived for every remaining token.
    pub(crate) fn prune_empty_since(&mut self, from: usize) {
        for i in from..self.nodes.len() {
            let n = NodeId::from_index(i);
            if self.nodes[i].form != Form::Empty && !self.is_productive(n) {
                self.set_form(n, Form::Empty);
            }
        }
    }

    /// Reference implementation: repeated passes over every undecided node
    /// reachable from `n` until no value changes. Every node evaluation in
    /// every pass counts as a visit.
    pub fn is_nullable_naive(&mut self, n: NodeId) -> bool {
        if let Some(v) = self.final_value(n) {
            return v;
        }
        let mut undecided = Vec::new();
        let mut index: HashMap<NodeId, usize> = HashMap::new();
        let mut stack = vec![n];
        while let Some(x) = stack.pop() {
            if self.final_value(x).is_some() || index.contains_key(&x) {
                continue;
            }
            index.insert(x, undecided.len());
            undecided.push(x);
            match self.nodes[x.index()].form {
                Form::Seq(l, r) | Form::Alt(l, r) => {
                    stack.push(r);
                    stack.push(l);
                }
                Form::Red(p, _) => stack.push(p),
                _ => {}
            }
        }
        let mut values = vec![false; undecided.len()];
        loop {
            let mut changed = false;
            for i in 0..undecided.len() {
                self.counters.nullable_visits += 1;
                let read = |c: NodeId| -> bool {
                    match index.get(&c) {
                        Some(&j) => values[j],
                        None => self.nodes[c.index()].null == NullState::Nullable,
                    }
                };
                let v = match self.nodes[undecided[i].index()].form {
                    Form::Empty | Form::Token(_) => false,
                    Form::Eps(_) => true,
                    Form::Alt(l, r) => read(l) || read(r),
                    Form::Seq(l, r) => read(l) && read(r),
                    Form::Red(p, _) => read(p),
                };
                if v != values[i] {
                    values[i] = v;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        for (x, v) in undecided.iter().zip(&values) {
            self.nodes[x.index()].null = if *v {
                NullState::Nullable
            } else {
                NullState::NotNullable
            };
        }
        values[0]
    }

    fn final_value(&self, n: NodeId) -> Option<bool> {
        match self.nodes[n.index()].null {
            NullState::Nullable => Some(true),
            NullState::NotNullable => Some(false),
            _ => None,
        }
    }

    /// Clears every non-final nullability state. Used to rerun a query from scratch.
    pub fn forget_nullability(&mut self) {
        for node in &mut self.nodes {
            node.null = NullState::initial(&node.form);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::ParserConfig;

    fn both(text: &str) -> (Grammar, Grammar) {
        let opt = Grammar::load_with(text, ParserConfig { compaction: false, ..Default::default() }).unwrap();
        let naive = Grammar::load_with(
            text,
            ParserConfig {
                compaction: false,
                nullability: NullabilityMode::Naive,
                ..Default::default()
            },
        )
        .unwrap();
        (opt, naive)
    }

    #[test]
    fn figure_cases() {
        for (text, expected) in [
            ("start = S ; S : 'a' | ;", true),
            ("start = S ; S : E 'a' ; E : ;", false),
            ("start = L ; L : L 'a' | 'a' ;", false),
            ("start = L ; L : L 'a' | ;", true),
            ("start = S ; S : 'a' S ;", false),
            ("start = S ; S : A B ; A : B | ; B : A | 'b' ;", true),
        ] {
            let (mut opt, mut naive) = both(text);
            let root = opt.root();
            assert_eq!(opt.is_nullable(root), expected, "{text}");
            assert_eq!(naive.is_nullable(root), expected, "{text}");
        }
    }

    #[test]
    fn naive_costs_more_on_left_recursion() {
        let (mut opt, mut naive) = both("start = L ; L : L 'a' | ;");
        let root = opt.root();
        opt.is_nullable(root);
        naive.is_nullable(root);
        assert!(opt.counters().nullable_visits < naive.counters().nullable_visits);
    }

    #[test]
    fn old_assumptions_are_promoted_without_visits() {
        let (mut g, _) = both("start = L ; L : L 'a' | 'a' ;");
        let root = g.root();
        let gen = g.mint_generation();
        assert!(!g.nullable_in_generation(root, gen));
        let assumed: Vec<_> = (0..g.node_count())
            .map(NodeId::from_index)
            .filter(|&n| g.node(n).nullability() == NullState::Assumed(gen))
            .collect();
        assert!(!assumed.is_empty());
        let visits = g.counters().nullable_visits;
        for n in assumed {
            assert!(!g.is_nullable(n));
            assert_eq!(g.node(n).nullability(), NullState::NotNullable);
        }
        assert_eq!(g.counters().nullable_visits, visits);
    }

    #[test]
    fn nullable_stays_nullable() {
        let (mut g, _) = both("start = S ; S : S S | 'a' | ;");
        let root = g.root();
        assert!(g.is_nullable(root));
        for _ in 0..3 {
            g.mint_generation();
            assert!(g.is_nullable(root));
        }
    }
}
