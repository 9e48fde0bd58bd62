//! Derivatives over cyclic grammar graphs.
//!
//! A miss allocates a shell of the right outer form, stores it in the memo
//! and only then derives the children, so a cycle back to the same
//! `(node, token)` finds the shell. Once the children exist the shell is
//! filled. With compaction on and no child still in progress, the compacted
//! result replaces the shell: if nothing has seen the shell yet, an existing
//! node may stand in for it directly; otherwise its form is overwritten.

use crate::compact::Built;
use crate::forest::{ForestSet, ParseForest, Reduction};
use crate::grammar::{Form, Grammar, MemoMode, IN_PROGRESS, MEMO_SUBSTITUTED, REFERENCED};
use crate::ids::{NodeId, Sym, Symbols};
use crate::instrument::{name_node, NamingError, NamingRule};
use crate::nullability::NullState;

impl Grammar {
    fn memo_get(&self, n: NodeId, c: Sym) -> Option<(NodeId, bool)> {
        match self.config.memo {
            MemoMode::SingleEntry => {
                let node = &self.nodes[n.index()];
                match node.memo {
                    Some((k, r)) if k == c => Some((r, node.flags & MEMO_SUBSTITUTED != 0)),
                    _ => None,
                }
            }
            MemoMode::FullMap => self.full_memo.get(&(n, c)).copied(),
        }
    }

    fn memo_put(&mut self, n: NodeId, c: Sym, r: NodeId, substituted: bool) {
        match self.config.memo {
            MemoMode::SingleEntry => {
                let node = &mut self.nodes[n.index()];
                node.memo = Some((c, r));
                if substituted {
                    node.flags |= MEMO_SUBSTITUTED;
                } else {
                    node.flags &= !MEMO_SUBSTITUTED;
                }
            }
            MemoMode::FullMap => {
                self.full_memo.insert((n, c), (r, substituted));
            }
        }
    }

    /// The naming rule that applies to the memoized derivative of `n`.
    fn rule_for(&self, n: NodeId) -> NamingRule {
        match self.form(n) {
            Form::Seq(l, _) if self.nodes[l.index()].null == NullState::Nullable => NamingRule::Bullet,
            _ => NamingRule::Extend,
        }
    }

    fn mint_name(&mut self, parent: NodeId, c: Sym, rule: NamingRule) -> Option<crate::instrument::NodeName> {
        let table = self.names.as_mut()?;
        let p = table.names[parent.index()].clone();
        match name_node(&mut table.supply, p.as_ref(), c, rule) {
            Ok(n) => Some(n),
            Err(NamingError::DoubleBullet) => {
                table.double_bullets += 1;
                name_node(&mut table.supply, p.as_ref(), c, NamingRule::Extend).ok()
            }
            Err(NamingError::MissingParent) => None,
        }
    }

    fn set_name(&mut self, id: NodeId, parent: NodeId, c: Sym, rule: NamingRule) {
        if let Some(name) = self.mint_name(parent, c, rule) {
            self.names.as_mut().unwrap().names[id.index()] = Some(name);
        }
    }

    fn check_hit_name(&mut self, n: NodeId, c: Sym, hit: NodeId) {
        let rule = self.rule_for(n);
        if let Some(expected) = self.mint_name(n, c, rule) {
            let table = self.names.as_mut().unwrap();
            table.checked_hits += 1;
            if table.names[hit.index()].as_ref() != Some(&expected) {
                table.mismatches += 1;
            }
        }
    }

    /// Derivative of `n` with respect to token `c`.
    pub fn derive(&mut self, n: NodeId, c: Sym) -> NodeId {
        if let Some((hit, substituted)) = self.memo_get(n, c) {
            self.counters.derive_calls_cached += 1;
            if self.is_in_progress(hit) {
                self.nodes[hit.index()].flags |= REFERENCED;
            }
            if self.names.is_some() && !substituted {
                self.check_hit_name(n, c, hit);
            }
            return hit;
        }
        self.counters.derive_calls_uncached += 1;
        match self.form(n) {
            Form::Empty | Form::Eps(_) => self.leaf_result(n, c, Form::Empty),
            Form::Token(t) => {
                let form = if t == c || t == Symbols::WILDCARD {
                    Form::Eps(self.store.leaf(c))
                } else {
                    Form::Empty
                };
                self.leaf_result(n, c, form)
            }
            Form::Alt(l, r) => {
                let shell = self.open_shell(n, c, Form::Alt(NodeId::PENDING, NodeId::PENDING), NamingRule::Extend);
                let dl = self.derive(l, c);
                let dr = self.derive(r, c);
                self.close(n, c, shell, Form::Alt(dl, dr), &[dl, dr], |g| g.compact_alt(dl, dr))
            }
            Form::Red(p, f) => {
                let shell = self.open_shell(n, c, Form::Red(NodeId::PENDING, f), NamingRule::Extend);
                let dp = self.derive(p, c);
                self.close(n, c, shell, Form::Red(dp, f), &[dp], |g| g.compact_red(dp, f))
            }
            Form::Seq(l, r) => {
                if !self.is_nullable(l) {
                    let shell = self.open_shell(n, c, Form::Seq(NodeId::PENDING, r), NamingRule::Extend);
                    let dl = self.derive(l, c);
                    self.close(n, c, shell, Form::Seq(dl, r), &[dl], |g| g.compact_seq(dl, r))
                } else {
                    self.derive_nullable_seq(n, c, l, r)
                }
            }
        }
    }

    /// `D_c(l ∘ r) = (D_c(l) ∘ r) ∪ (D_c(r) → (parse_null(l), ·))` for nullable `l`.
    fn derive_nullable_seq(&mut self, n: NodeId, c: Sym, l: NodeId, r: NodeId) -> NodeId {
        let outer = self.open_shell(n, c, Form::Alt(NodeId::PENDING, NodeId::PENDING), NamingRule::Bullet);
        let inner = self.alloc_shell(Form::Seq(NodeId::PENDING, r));
        self.set_name(inner, n, c, NamingRule::Extend);
        let dl = self.derive(l, c);
        let dr = self.derive(r, c);
        let s = self.parse_null(l).expect("nullable node has a null parse");
        let left = self.fill(inner, Form::Seq(dl, r), &[dl], |g| g.compact_seq(dl, r));
        let f = self.store.add_reduction(Reduction::PairLeft(s));
        let right = if self.config.compaction && !self.is_in_progress(dr) {
            let b = self.compact_red(dr, f);
            self.materialize(b)
        } else {
            self.alloc(Form::Red(dr, f))
        };
        self.close(n, c, outer, Form::Alt(left, right), &[left, right], |g| g.compact_alt(left, right))
    }

    fn leaf_result(&mut self, n: NodeId, c: Sym, form: Form) -> NodeId {
        let id = self.alloc(form);
        self.set_name(id, n, c, NamingRule::Extend);
        self.memo_put(n, c, id, false);
        id
    }

    fn open_shell(&mut self, n: NodeId, c: Sym, form: Form, rule: NamingRule) -> NodeId {
        let shell = self.alloc_shell(form);
        self.set_name(shell, n, c, rule);
        self.memo_put(n, c, shell, false);
        shell
    }

    /// Fills a shell and returns the node that now denotes it.
    fn fill(
        &mut self,
        shell: NodeId,
        raw: Form,
        children: &[NodeId],
        compact: impl FnOnce(&mut Grammar) -> Built,
    ) -> NodeId {
        let compacting = self.config.compaction && children.iter().all(|&ch| !self.is_in_progress(ch));
        self.set_form(shell, raw);
        self.nodes[shell.index()].flags &= !IN_PROGRESS;
        if compacting {
            match compact(self) {
                Built::Existing(p) if self.nodes[shell.index()].flags & REFERENCED == 0 => return p,
                Built::Existing(_) => {}
                Built::Fresh(form) => self.set_form(shell, form),
            }
        }
        shell
    }

    fn close(
        &mut self,
        n: NodeId,
        c: Sym,
        shell: NodeId,
        raw: Form,
        children: &[NodeId],
        compact: impl FnOnce(&mut Grammar) -> Built,
    ) -> NodeId {
        let result = self.fill(shell, raw, children, compact);
        if result != shell {
            self.memo_put(n, c, result, true);
        }
        result
    }

    pub fn derive_label(&mut self, n: NodeId, token: &str) -> NodeId {
        let c = self.intern(token);
        self.derive(n, c)
    }

    /// Clears all parse state, then derives by each token in turn starting
    /// from the root. With compaction on, nodes built for a token that derive
    /// no word are replaced by `Empty` before the next token. Stops early once
    /// the language is empty.
    pub fn derive_all<S: AsRef<str>>(&mut self, tokens: &[S]) -> NodeId {
        self.reset();
        let mut cur = self.root;
        for t in tokens {
            if self.form(cur) == Form::Empty {
                break;
            }
            let c = self.intern(t.as_ref());
            let first_new = self.nodes.len();
            cur = self.derive(cur, c);
            if self.config.compaction {
                self.prune_empty_since(first_new);
            }
        }
        cur
    }

    /// Whether the token sequence is in the language.
    pub fn recognize<S: AsRef<str>>(&mut self, tokens: &[S]) -> bool {
        let end = self.derive_all(tokens);
        self.is_nullable(end)
    }

    /// Parses the tokens and returns the forest of all parse trees. The forest
    /// is empty when the input is rejected.
    pub fn parse<S: AsRef<str>>(&mut self, tokens: &[S]) -> ParseForest<'_> {
        let root = self.parse_set(tokens);
        self.store.view(root)
    }

    pub fn parse_set<S: AsRef<str>>(&mut self, tokens: &[S]) -> ForestSet {
        let end = self.derive_all(tokens);
        self.parse_null(end)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::{ParseCount, Tree};
    use crate::grammar::ParserConfig;

    fn with(text: &str, f: impl Fn(&mut ParserConfig)) -> Grammar {
        let mut cfg = ParserConfig::default();
        f(&mut cfg);
        Grammar::load_with(text, cfg).unwrap()
    }

    #[test]
    fn token_derivatives() {
        let mut g = Grammar::load("start = S ; S : 'a' ;").unwrap();
        let a = g.mk_token("a");
        let d = g.derive_label(a, "a");
        assert!(matches!(g.form(d), Form::Eps(_)));
        let dd = g.derive_label(d, "a");
        assert_eq!(g.form(dd), Form::Empty);
        let db = g.derive_label(a, "b");
        assert_eq!(g.form(db), Form::Empty);
        let w = g.mk_token(".");
        let dw = g.derive_label(w, "zz");
        assert!(matches!(g.form(dw), Form::Eps(_)));
    }

    #[test]
    fn memo_identity() {
        let mut g = Grammar::load("start = L ; L : L 'c' | 'c' ;").unwrap();
        let root = g.root();
        let c = g.intern("c");
        let d1 = g.derive(root, c);
        let d2 = g.derive(root, c);
        assert_eq!(d1, d2);
        assert!(g.live_shells().is_empty());
    }

    #[test]
    fn left_recursive_derivative_is_cyclic() {
        let mut g = with("start = L ; L : L 'c' | 'c' ;", |c| c.compaction = false);
        let root = g.root();
        let d = g.derive_label(root, "c");
        assert!(g.reachable_from(d).len() > 1);
        let reach = g.reachable_from(d);
        let cyclic = reach.iter().any(|&x| match g.form(x) {
            Form::Seq(l, _) | Form::Alt(l, _) => l == d,
            _ => false,
        }) || reach.iter().any(|&x| g.reachable_from(x).contains(&d) && x != d);
        assert!(cyclic);
        assert!(g.is_nullable(d));
    }

    #[test]
    fn simple_parses() {
        let mut g = Grammar::load("start = S ; S : 'a' ;").unwrap();
        assert_eq!(g.parse(&["a"]).trees(10), vec![Tree::node("S", vec![Tree::leaf("a")])]);
        assert!(g.parse(&["b"]).is_empty());
        assert!(g.parse(&["a", "a"]).is_empty());
    }

    #[test]
    fn catalan_four() {
        let mut g = Grammar::load("start = S ; S : S S | 'a' ;").unwrap();
        let f = g.parse(&["a"; 4]);
        assert_eq!(f.count(), ParseCount::from(5));
        let trees = f.trees(10);
        assert_eq!(trees.len(), 5);
        assert!(trees.iter().all(|t| t.leaves() == vec!["a"; 4]));
    }

    #[test]
    fn recognize_examples() {
        let mut g = Grammar::load("start = S ; S : S S | 'a' | 'b' ;").unwrap();
        assert!(g.recognize(&["a", "b"]));
        let mut n = Grammar::load("start = S ; S : 'a' | ;").unwrap();
        assert!(n.recognize::<&str>(&[]));
        let mut e = Grammar::load("start = S ; S : 'a' S ;").unwrap();
        assert!(!e.recognize(&["a", "a"]));
    }

    #[test]
    fn unit_cycle_is_infinite() {
        let mut g = Grammar::load("start = S ; S : S | 'a' ;").unwrap();
        assert_eq!(g.parse(&["a"]).count(), ParseCount::Infinite);
    }

    #[test]
    fn nullable_prefix_contributes_trees() {
        let mut g = Grammar::load("start = S ; S : E 'a' ; E : 'x' | ;").unwrap();
        let trees = g.parse(&["a"]).trees(10);
        assert_eq!(
            trees,
            vec![Tree::node("S", vec![Tree::node("E", vec![]), Tree::leaf("a")])]
        );
    }

    #[test]
    fn uncached_calls_create_nodes() {
        for memo in [MemoMode::SingleEntry, MemoMode::FullMap] {
            let mut g = with("start = L ; L : L L | '.' ;", |c| c.memo = memo);
            let toks: Vec<String> = (0..12).map(|i| format!("t{i}")).collect();
            g.recognize(&toks);
            let c = g.counters();
            assert!(c.derive_calls_uncached <= c.nodes_created.total());
            assert!(g.live_shells().is_empty());
        }
    }
}
