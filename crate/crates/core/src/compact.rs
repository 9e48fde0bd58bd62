//! Smart constructors. Each applies the local rewrite rules once and never
//! iterates; a rule fires at most twice per call (a sequence rule plus one
//! follow-up reduction rule).

use thiserror::Error;

use crate::forest::{ForestSet, Reduction};
use crate::grammar::{Form, Grammar};
use crate::ids::{NodeId, RedId};
use crate::instrument::CompactionRule;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BuildError {
    #[error("an epsilon node needs a non-empty set of result trees")]
    EmptyEpsilon,
}

/// Outcome of a rewrite: an existing node, or the form of a node to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Built {
    Existing(NodeId),
    Fresh(Form),
}

impl Grammar {
    fn fire(&mut self, rule: CompactionRule) {
        self.counters.compaction_firings.bump(rule);
    }

    pub(crate) fn compact_alt(&mut self, l: NodeId, r: NodeId) -> Built {
        match (self.form(l), self.form(r)) {
            (Form::Empty, _) => {
                self.fire(CompactionRule::AltEmptyLeft);
                Built::Existing(r)
            }
            (_, Form::Empty) => {
                self.fire(CompactionRule::AltEmptyRight);
                Built::Existing(l)
            }
            (Form::Eps(a), Form::Eps(b)) => {
                self.fire(CompactionRule::AltEpsEps);
                let s = self.store.union(Some(a), Some(b)).expect("union of non-empty sets");
                Built::Fresh(Form::Eps(s))
            }
            _ => Built::Fresh(Form::Alt(l, r)),
        }
    }

    /// Left-child rules only; right-child rules belong to normalization.
    pub(crate) fn compact_seq(&mut self, l: NodeId, r: NodeId) -> Built {
        match self.form(l) {
            Form::Empty => {
                self.fire(CompactionRule::SeqEmptyLeft);
                Built::Existing(l)
            }
            Form::Eps(s) => {
                self.fire(CompactionRule::SeqEpsLeft);
                let f = self.store.add_reduction(Reduction::PairLeft(s));
                self.compact_red(r, f)
            }
            Form::Seq(p1, p2) => {
                self.fire(CompactionRule::SeqReassociate);
                let inner = self.alloc(Form::Seq(p2, r));
                let outer = self.alloc(Form::Seq(p1, inner));
                let f = self.store.add_reduction(Reduction::Reassociate);
                Built::Fresh(Form::Red(outer, f))
            }
            Form::Red(p1, f) => {
                self.fire(CompactionRule::SeqRedLeft);
                let seq = self.alloc(Form::Seq(p1, r));
                let g = self.store.add_reduction(Reduction::LiftLeft(f));
                Built::Fresh(Form::Red(seq, g))
            }
            _ => Built::Fresh(Form::Seq(l, r)),
        }
    }

    pub(crate) fn compact_red(&mut self, p: NodeId, f: RedId) -> Built {
        match self.form(p) {
            Form::Empty => {
                self.fire(CompactionRule::RedEmpty);
                Built::Existing(p)
            }
            Form::Eps(s) => {
                self.fire(CompactionRule::RedEps);
                Built::Fresh(Form::Eps(self.store.deferred(f, s)))
            }
            Form::Red(q, g) => {
                self.fire(CompactionRule::RedRed);
                Built::Fresh(Form::Red(q, self.store.compose(f, g)))
            }
            _ => Built::Fresh(Form::Red(p, f)),
        }
    }

    pub(crate) fn materialize(&mut self, b: Built) -> NodeId {
        match b {
            Built::Existing(n) => n,
            Built::Fresh(form) => self.alloc(form),
        }
    }

    fn compacting(&self, children: &[NodeId]) -> bool {
        self.config.compaction && children.iter().all(|&c| !self.is_in_progress(c))
    }

    pub fn mk_empty(&mut self) -> NodeId {
        self.alloc(Form::Empty)
    }

    pub fn mk_eps(&mut self, results: ForestSet) -> Result<NodeId, BuildError> {
        let s = results.ok_or(BuildError::EmptyEpsilon)?;
        Ok(self.alloc(Form::Eps(s)))
    }

    pub fn mk_token(&mut self, label: &str) -> NodeId {
        let s = self.intern(label);
        self.alloc(Form::Token(s))
    }

    pub fn mk_alt(&mut self, l: NodeId, r: NodeId) -> NodeId {
        if !self.compacting(&[l, r]) {
            return self.alloc(Form::Alt(l, r));
        }
        let b = self.compact_alt(l, r);
        self.materialize(b)
    }

    pub fn mk_seq(&mut self, l: NodeId, r: NodeId) -> NodeId {
        if !self.compacting(&[l, r]) {
            return self.alloc(Form::Seq(l, r));
        }
        let b = self.compact_seq(l, r);
        self.materialize(b)
    }

    pub fn mk_red(&mut self, p: NodeId, f: Reduction) -> NodeId {
        let f = self.store.add_reduction(f);
        if !self.compacting(&[p]) {
            return self.alloc(Form::Red(p, f));
        }
        let b = self.compact_red(p, f);
        self.materialize(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::Tree;
    use crate::grammar::ParserConfig;

    fn blank(compaction: bool) -> Grammar {
        Grammar::load_with(
            "start = S ; S : 'a' ;",
            ParserConfig {
                compaction,
                ..Default::default()
            },
        )
        .unwrap()
    }

    fn eps(g: &mut Grammar, label: &str) -> NodeId {
        let s = g.intern(label);
        let leaf = g.store.leaf(s);
        g.mk_eps(Some(leaf)).unwrap()
    }

    fn trees(g: &mut Grammar, n: NodeId) -> Vec<Tree> {
        let f = g.parse_null(n);
        g.store.view(f).trees(100)
    }

    #[test]
    fn constructors_and_nullability() {
        let mut g = blank(true);
        let e = g.mk_empty();
        let x = eps(&mut g, "x");
        let a = g.mk_token("a");
        assert!(!g.is_nullable(e));
        assert!(g.is_nullable(x));
        assert!(!g.is_nullable(a));
        assert_eq!(g.mk_eps(None), Err(BuildError::EmptyEpsilon));
    }

    #[test]
    fn alt_rules() {
        let mut g = blank(true);
        let e = g.mk_empty();
        let a = g.mk_token("a");
        let b = g.mk_token("b");
        assert_eq!(g.mk_alt(e, a), a);
        assert_eq!(g.mk_alt(a, e), a);
        let ab = g.mk_alt(a, b);
        assert_eq!(g.form(ab), Form::Alt(a, b));
        let x = eps(&mut g, "x");
        let y = eps(&mut g, "y");
        let xy = g.mk_alt(x, y);
        assert!(matches!(g.form(xy), Form::Eps(_)));
        assert_eq!(trees(&mut g, xy), vec![Tree::leaf("x"), Tree::leaf("y")]);
        assert_eq!(g.counters().compaction_firings.get(CompactionRule::AltEpsEps), 1);
    }

    #[test]
    fn seq_rules() {
        let mut g = blank(true);
        let e = g.mk_empty();
        let a = g.mk_token("a");
        let b = g.mk_token("b");
        let c = g.mk_token("c");
        assert_eq!(g.mk_seq(e, a), e);
        let x = eps(&mut g, "x");
        let xa = g.mk_seq(x, a);
        assert!(matches!(g.form(xa), Form::Red(p, _) if p == a));
        let ab = g.mk_seq(a, b);
        let abc = g.mk_seq(ab, c);
        match g.form(abc) {
            Form::Red(s, f) => {
                assert_eq!(g.store.reduction(f), Reduction::Reassociate);
                match g.form(s) {
                    Form::Seq(l, r) => {
                        assert_eq!(l, a);
                        assert_eq!(g.form(r), Form::Seq(b, c));
                    }
                    other => panic!("{other:?}"),
                }
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn red_rules() {
        let mut g = blank(true);
        let e = g.mk_empty();
        let a = g.mk_token("a");
        let s = g.intern("S");
        let prod = Reduction::Production { name: s, arity: 1 };
        assert_eq!(g.mk_red(e, prod), e);
        let x = eps(&mut g, "x");
        let rx = g.mk_red(x, prod);
        assert_eq!(trees(&mut g, rx), vec![Tree::node("S", vec![Tree::leaf("x")])]);
        let ra = g.mk_red(a, prod);
        let rra = g.mk_red(ra, prod);
        match g.form(rra) {
            Form::Red(p, f) => {
                assert_eq!(p, a);
                assert!(matches!(g.store.reduction(f), Reduction::Compose(..)));
            }
            other => panic!("{other:?}"),
        }
        assert!(g.counters().compaction_firings.total() <= 3);
    }

    #[test]
    fn eps_seq_fires_at_most_two_rules() {
        let mut g = blank(true);
        let x = eps(&mut g, "x");
        let y = eps(&mut g, "y");
        let before = g.counters().compaction_firings.total();
        let xy = g.mk_seq(x, y);
        assert_eq!(g.counters().compaction_firings.total() - before, 2);
        assert_eq!(
            trees(&mut g, xy),
            vec![Tree::Pair(Box::new(Tree::leaf("x")), Box::new(Tree::leaf("y")))]
        );
    }

    #[test]
    fn raw_when_disabled_or_in_progress() {
        let mut g = blank(false);
        let e = g.mk_empty();
        let a = g.mk_token("a");
        let n = g.mk_alt(e, a);
        assert_eq!(g.form(n), Form::Alt(e, a));

        let mut g = blank(true);
        let e = g.mk_empty();
        let shell = g.alloc_shell(Form::Alt(NodeId::PENDING, NodeId::PENDING));
        let n = g.mk_seq(e, shell);
        assert_eq!(g.form(n), Form::Seq(e, shell));
    }
}
