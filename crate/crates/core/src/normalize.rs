//! Load-time normalization.
//!
//! Derivation only ever replaces the left child of a sequence, so once no
//! reachable `Seq` has an `Empty`, `Eps` or `Red` right child, none ever will.
//! This pass establishes that property on the loaded grammar.

use crate::forest::Reduction;
use crate::grammar::{Form, Grammar};
use crate::ids::NodeId;
use crate::instrument::CompactionRule;

const MAX_PASSES: usize = 10_000;

impl Grammar {
    /// Rewrites the loaded grammar in place until no rule applies.
    pub(crate) fn normalize(&mut self) {
        self.prune_unproductive();
        for _ in 0..MAX_PASSES {
            let mut changed = false;
            for n in self.reachable_from(self.root) {
                changed |= self.rewrite(n);
            }
            if !changed {
                return;
            }
        }
        panic!("normalization did not converge");
    }

    /// Replaces every node that derives no word with `Empty`.
    ///
    /// Removing these first guarantees that floating reductions out of right
    /// children terminates: a cycle made only of `Seq` and `Red` edges derives
    /// nothing.
    fn prune_unproductive(&mut self) {
        let nodes = self.reachable_from(self.root);
        let mut productive = vec![false; self.nodes.len()];
        loop {
            let mut changed = false;
            for &n in &nodes {
                if productive[n.index()] {
                    continue;
                }
                let p = match self.form(n) {
                    Form::Empty => false,
                    Form::Eps(_) | Form::Token(_) => true,
                    Form::Alt(l, r) => productive[l.index()] || productive[r.index()],
                    Form::Seq(l, r) => productive[l.index()] && productive[r.index()],
                    Form::Red(p, _) => productive[p.index()],
                };
                if p {
                    productive[n.index()] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        for n in nodes {
            if !productive[n.index()] && self.form(n) != Form::Empty {
                self.set_form(n, Form::Empty);
            }
        }
    }

    /// Applies the first matching rule at `n`. Returns whether `n` changed.
    fn rewrite(&mut self, n: NodeId) -> bool {
        let new = match self.form(n) {
            Form::Alt(l, r) => match (self.form(l), self.form(r)) {
                (Form::Empty, rf) if r != n => Some((CompactionRule::AltEmptyLeft, rf)),
                (lf, Form::Empty) if l != n => Some((CompactionRule::AltEmptyRight, lf)),
                (Form::Eps(a), Form::Eps(b)) => {
                    let s = self.store.union(Some(a), Some(b)).expect("non-empty union");
                    Some((CompactionRule::AltEpsEps, Form::Eps(s)))
                }
                _ => None,
            },
            Form::Seq(l, r) => match (self.form(l), self.form(r)) {
                (Form::Empty, _) => Some((CompactionRule::SeqEmptyLeft, Form::Empty)),
                (_, Form::Empty) => Some((CompactionRule::SeqEmptyRight, Form::Empty)),
                (Form::Eps(s), _) => {
                    let f = self.store.add_reduction(Reduction::PairLeft(s));
                    Some((CompactionRule::SeqEpsLeft, Form::Red(r, f)))
                }
                (_, Form::Eps(s)) => {
                    let f = self.store.add_reduction(Reduction::PairRight(s));
                    Some((CompactionRule::SeqEpsRight, Form::Red(l, f)))
                }
                (_, Form::Red(p2, f)) => {
                    let seq = self.alloc(Form::Seq(l, p2));
                    let g = self.store.add_reduction(Reduction::LiftRight(f));
                    Some((CompactionRule::SeqRedRight, Form::Red(seq, g)))
                }
                (Form::Red(p1, f), _) => {
                    let seq = self.alloc(Form::Seq(p1, r));
                    let g = self.store.add_reduction(Reduction::LiftLeft(f));
                    Some((CompactionRule::SeqRedLeft, Form::Red(seq, g)))
                }
                (Form::Seq(p1, p2), _) if l != n => {
                    let inner = self.alloc(Form::Seq(p2, r));
                    let outer = self.alloc(Form::Seq(p1, inner));
                    let f = self.store.add_reduction(Reduction::Reassociate);
                    Some((CompactionRule::SeqReassociate, Form::Red(outer, f)))
                }
                _ => None,
            },
            Form::Red(p, f) if p != n => match self.form(p) {
                Form::Empty => Some((CompactionRule::RedEmpty, Form::Empty)),
                Form::Eps(s) => Some((CompactionRule::RedEps, Form::Eps(self.store.deferred(f, s)))),
                Form::Red(q, g) if q != p => {
                    Some((CompactionRule::RedRed, Form::Red(q, self.store.compose(f, g))))
                }
                _ => None,
            },
            _ => None,
        };
        match new {
            Some((rule, form)) if form != self.form(n) => {
                self.counters.compaction_firings.bump(rule);
                self.set_form(n, form);
                true
            }
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::grammar::{Form, Grammar, ParserConfig};

    fn load(text: &str, compaction: bool) -> Grammar {
        Grammar::load_with(
            text,
            ParserConfig {
                compaction,
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn right_children_are_clean() {
        for text in [
            "start = S ; S : 'a' E ; E : ;",
            "start = S ; S : 'a' N ; N : 'b' N ;",
            "start = S ; S : 'a' T | 'a' ; T : 'b' 'c' | 'd' ;",
            "start = S ; S : S 'a' X | ; X : | 'x' ;",
            "start = S ; S : A A A ; A : B ; B : 'b' | ;",
        ] {
            let g = load(text, true);
            assert!(g.seq_right_violations().is_empty(), "{text}");
        }
    }

    #[test]
    fn eps_right_child_becomes_reduction() {
        let g = load("start = S ; S : 'a' E ; E : ;", true);
        let root = g.root();
        match g.form(root) {
            Form::Red(p, _) => assert!(matches!(g.form(p), Form::Token(_))),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_right_child_empties_sequence() {
        let g = load("start = S ; S : 'a' N | 'b' ; N : 'b' N ;", true);
        let root = g.root();
        match g.form(root) {
            Form::Red(p, _) => assert!(matches!(g.form(p), Form::Token(_))),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn clean_grammar_is_unchanged() {
        let text = "start = S ; S : 'a' S 'b' | 'c' ;";
        let raw = load(text, false);
        let norm = load(text, true);
        assert_eq!(raw.node_count(), norm.node_count());
        for i in 0..raw.node_count() {
            let id = crate::ids::NodeId::from_index(i);
            assert_eq!(raw.form(id).kind(), norm.form(id).kind());
        }
    }
}
