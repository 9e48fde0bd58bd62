//! Shared, possibly cyclic parse forests.
//!
//! Parse-null extraction builds forests in a [`ForestStore`]. Reductions are
//! not applied during extraction: a `Deferred` node records the reduction and
//! its input so extraction stays linear in the number of grammar nodes.
//! Reductions run when trees are enumerated.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::ops::{Add, Mul};

use num_bigint::BigUint;
use serde_json::{json, Value};

use crate::grammar::{Form, Grammar, NullMemo};
use crate::ids::{ForestId, NodeId, RedId, Sym, Symbols};

/// A set of trees: `None` is the empty set, otherwise the forest node
/// denoting the set (a single tree, or an `Amb` of alternatives).
pub type ForestSet = Option<ForestId>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ForestKind {
    /// A matched input token.
    Leaf(Sym),
    /// Cross product of two tree sets.
    Pair(ForestId, ForestId),
    /// A production node with its children (one tree set per child).
    Prod(Sym, Vec<ForestId>),
    /// Union of alternatives, at least two.
    Amb(Vec<ForestId>),
    /// `reduction` mapped over every tree of the inner set.
    Deferred(RedId, ForestId),
    /// Placeholder for a cyclic extraction that has not finished.
    Pending,
}

/// The closed algebra of reduction functions.
///
/// Reductions are set-valued: `PairLeft(s)` maps `u` to `{(t, u) | t ∈ s}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Reduction {
    /// `u ↦ (s, u)`
    PairLeft(ForestId),
    /// `u ↦ (u, s)`
    PairRight(ForestId),
    /// `(t1, (t2, t3)) ↦ ((t1, t2), t3)`
    Reassociate,
    /// `(t1, t2) ↦ (f t1, t2)`
    LiftLeft(RedId),
    /// `(t1, t2) ↦ (t1, f t2)`
    LiftRight(RedId),
    /// Right-nested pairs of `arity` trees become one production node.
    Production { name: Sym, arity: u32 },
    /// `compose(g, f)` applies `f` first.
    Compose(RedId, RedId),
}

/// Arena for forest nodes, reductions and labels.
#[derive(Clone, Debug, Default)]
pub struct ForestStore {
    nodes: Vec<ForestKind>,
    reductions: Vec<Reduction>,
    pub(crate) symbols: Symbols,
}

impl ForestStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn kind(&self, f: ForestId) -> &ForestKind {
        &self.nodes[f.index()]
    }

    pub fn reduction(&self, r: RedId) -> Reduction {
        self.reductions[r.index()]
    }

    pub fn symbols(&self) -> &Symbols {
        &self.symbols
    }

    pub(crate) fn forest_len(&self) -> usize {
        self.nodes.len()
    }

    pub(crate) fn reduction_len(&self) -> usize {
        self.reductions.len()
    }

    pub(crate) fn truncate(&mut self, forests: usize, reductions: usize) {
        self.nodes.truncate(forests);
        self.reductions.truncate(reductions);
    }

    fn push(&mut self, kind: ForestKind) -> ForestId {
        let id = ForestId::from_index(self.nodes.len());
        self.nodes.push(kind);
        id
    }

    pub fn leaf(&mut self, token: Sym) -> ForestId {
        self.push(ForestKind::Leaf(token))
    }

    pub fn pair(&mut self, left: ForestId, right: ForestId) -> ForestId {
        self.push(ForestKind::Pair(left, right))
    }

    pub fn prod(&mut self, name: Sym, children: Vec<ForestId>) -> ForestId {
        self.push(ForestKind::Prod(name, children))
    }

    pub fn deferred(&mut self, red: RedId, inner: ForestId) -> ForestId {
        self.push(ForestKind::Deferred(red, inner))
    }

    pub(crate) fn pending(&mut self) -> ForestId {
        self.push(ForestKind::Pending)
    }

    /// Set union. Equal operands collapse; otherwise a binary `Amb`.
    pub fn union(&mut self, a: ForestSet, b: ForestSet) -> ForestSet {
        match (a, b) {
            (None, x) | (x, None) => x,
            (Some(a), Some(b)) if a == b => Some(a),
            (Some(a), Some(b)) => Some(self.push(ForestKind::Amb(vec![a, b]))),
        }
    }

    /// Resolves a placeholder with the extracted set. A placeholder that is
    /// its own alternative drops that alternative: it adds no trees.
    pub(crate) fn fill(&mut self, shell: ForestId, result: ForestSet) {
        let Some(result) = result else { return };
        if result == shell {
            return;
        }
        let kind = match &self.nodes[result.index()] {
            ForestKind::Amb(alts) => {
                let rest: Vec<_> = alts.iter().copied().filter(|&x| x != shell).collect();
                match rest.len() {
                    0 => return,
                    1 => self.nodes[rest[0].index()].clone(),
                    _ => ForestKind::Amb(rest),
                }
            }
            other => other.clone(),
        };
        self.nodes[shell.index()] = kind;
    }

    pub fn add_reduction(&mut self, r: Reduction) -> RedId {
        let id = RedId::from_index(self.reductions.len());
        self.reductions.push(r);
        id
    }

    pub fn compose(&mut self, outer: RedId, inner: RedId) -> RedId {
        self.add_reduction(Reduction::Compose(outer, inner))
    }

    pub fn view(&self, root: ForestSet) -> ParseForest<'_> {
        ParseForest { store: self, root }
    }
}

impl Grammar {
    /// The trees associated with the empty word in `n`.
    ///
    /// Memoized per node. A cyclic request for a node still being extracted
    /// receives a placeholder that is filled once the node finishes, so cyclic
    /// grammars yield cyclic forests.
    pub fn parse_null(&mut self, n: NodeId) -> ForestSet {
        match self.nodes[n.index()].null_memo {
            NullMemo::Done(f) => return f,
            NullMemo::InProgress(Some(x)) => return Some(x),
            NullMemo::InProgress(None) => {
                let x = self.store.pending();
                self.nodes[n.index()].null_memo = NullMemo::InProgress(Some(x));
                return Some(x);
            }
            NullMemo::None => {}
        }
        if !self.is_nullable(n) {
            self.nodes[n.index()].null_memo = NullMemo::Done(None);
            return None;
        }
        self.nodes[n.index()].null_memo = NullMemo::InProgress(None);
        let result = match self.nodes[n.index()].form {
            Form::Empty | Form::Token(_) => None,
            Form::Eps(s) => Some(s),
            Form::Alt(l, r) => {
                let a = self.parse_null(l);
                let b = self.parse_null(r);
                self.store.union(a, b)
            }
            Form::Seq(l, r) => {
                let a = self.parse_null(l);
                let b = self.parse_null(r);
                match (a, b) {
                    (Some(a), Some(b)) => Some(self.store.pair(a, b)),
                    _ => None,
                }
            }
            Form::Red(p, f) => self.parse_null(p).map(|x| self.store.deferred(f, x)),
        };
        let result = match self.nodes[n.index()].null_memo {
            NullMemo::InProgress(Some(x)) => {
                self.store.fill(x, result);
                Some(x)
            }
            _ => result,
        };
        self.nodes[n.index()].null_memo = NullMemo::Done(result);
        result
    }
}

/// Number of trees in a forest.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ParseCount {
    Finite(BigUint),
    Infinite,
}

impl ParseCount {
    pub fn zero() -> Self {
        ParseCount::Finite(BigUint::from(0u32))
    }

    pub fn one() -> Self {
        ParseCount::Finite(BigUint::from(1u32))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ParseCount::Finite(n) if *n == BigUint::from(0u32))
    }

    pub fn finite(&self) -> Option<&BigUint> {
        match self {
            ParseCount::Finite(n) => Some(n),
            ParseCount::Infinite => None,
        }
    }
}

impl From<u64> for ParseCount {
    fn from(n: u64) -> Self {
        ParseCount::Finite(BigUint::from(n))
    }
}

impl Add for ParseCount {
    type Output = ParseCount;
    fn add(self, rhs: ParseCount) -> ParseCount {
        match (self, rhs) {
            (ParseCount::Finite(a), ParseCount::Finite(b)) => ParseCount::Finite(a + b),
            _ => ParseCount::Infinite,
        }
    }
}

impl Mul for ParseCount {
    type Output = ParseCount;
    fn mul(self, rhs: ParseCount) -> ParseCount {
        if self.is_zero() || rhs.is_zero() {
            return ParseCount::zero();
        }
        match (self, rhs) {
            (ParseCount::Finite(a), ParseCount::Finite(b)) => ParseCount::Finite(a * b),
            _ => ParseCount::Infinite,
        }
    }
}

impl fmt::Display for ParseCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseCount::Finite(n) => write!(f, "{n}"),
            ParseCount::Infinite => write!(f, "infinite"),
        }
    }
}

/// A fully resolved tree.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tree {
    Leaf(String),
    Pair(Box<Tree>, Box<Tree>),
    Node(String, Vec<Tree>),
}

impl Tree {
    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            match t {
                Tree::Leaf(s) => out.push(s.as_str()),
                Tree::Pair(a, b) => {
                    stack.push(b);
                    stack.push(a);
                }
                Tree::Node(_, ch) => stack.extend(ch.iter().rev()),
            }
        }
        out
    }

    pub fn node(name: &str, children: Vec<Tree>) -> Tree {
        Tree::Node(name.to_string(), children)
    }

    pub fn leaf(label: &str) -> Tree {
        Tree::Leaf(label.to_string())
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tree::Leaf(s) => write!(f, "{s}"),
            Tree::Pair(a, b) => write!(f, "({a}, {b})"),
            Tree::Node(n, ch) => {
                write!(f, "{n}(")?;
                for (i, c) in ch.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// A read-only view of an extracted forest.
#[derive(Clone, Copy, Debug)]
pub struct ParseForest<'a> {
    store: &'a ForestStore,
    root: ForestSet,
}

impl<'a> ParseForest<'a> {
    pub fn root(&self) -> ForestSet {
        self.root
    }

    pub fn store(&self) -> &'a ForestStore {
        self.store
    }

    /// True when the forest denotes no trees, i.e. the input was rejected.
    pub fn is_empty(&self) -> bool {
        self.root.is_none()
    }

    pub fn count(&self) -> ParseCount {
        count_parses(self.store, self.root)
    }

    pub fn trees(&self, limit: usize) -> Vec<Tree> {
        enumerate_trees(self.store, self.root, limit)
    }

    /// Forest nodes reachable from the root, including captured sets.
    pub fn reachable_nodes(&self) -> Vec<ForestId> {
        reachable(self.store, self.root).0
    }

    pub fn to_json(&self) -> Value {
        forest_json(self.store, self.root)
    }
}

fn reduction_captures(store: &ForestStore, r: RedId, out: &mut Vec<ForestId>, reds: &mut Vec<RedId>) {
    match store.reduction(r) {
        Reduction::PairLeft(s) | Reduction::PairRight(s) => out.push(s),
        Reduction::LiftLeft(g) | Reduction::LiftRight(g) => reds.push(g),
        Reduction::Compose(g, f) => {
            reds.push(g);
            reds.push(f);
        }
        Reduction::Reassociate | Reduction::Production { .. } => {}
    }
}

/// Breadth-first order of forest nodes and reductions reachable from `root`.
fn reachable(store: &ForestStore, root: ForestSet) -> (Vec<ForestId>, Vec<RedId>) {
    let mut forests = Vec::new();
    let mut reds = Vec::new();
    let Some(root) = root else {
        return (forests, reds);
    };
    let mut seen_f = HashSet::new();
    let mut seen_r = HashSet::new();
    let mut queue = VecDeque::from([root]);
    seen_f.insert(root);
    let mut red_queue: Vec<RedId> = Vec::new();
    while let Some(f) = queue.pop_front() {
        forests.push(f);
        let mut next = Vec::new();
        match store.kind(f) {
            ForestKind::Leaf(_) | ForestKind::Pending => {}
            ForestKind::Pair(a, b) => next.extend([*a, *b]),
            ForestKind::Prod(_, ch) | ForestKind::Amb(ch) => next.extend(ch.iter().copied()),
            ForestKind::Deferred(r, inner) => {
                next.push(*inner);
                red_queue.push(*r);
            }
        }
        while let Some(r) = red_queue.pop() {
            if seen_r.insert(r) {
                reds.push(r);
                reduction_captures(store, r, &mut next, &mut red_queue);
            }
        }
        for n in next {
            if seen_f.insert(n) {
                queue.push_back(n);
            }
        }
    }
    (forests, reds)
}

/// Number of trees denoted by the forest. A reachable cycle means infinitely many.
pub fn count_parses(store: &ForestStore, root: ForestSet) -> ParseCount {
    let Some(root) = root else {
        return ParseCount::zero();
    };
    let mut c = Counting {
        store,
        memo: HashMap::new(),
        red_memo: HashMap::new(),
        on_stack: HashSet::new(),
    };
    c.forest(root)
}

struct Counting<'a> {
    store: &'a ForestStore,
    memo: HashMap<ForestId, ParseCount>,
    red_memo: HashMap<RedId, ParseCount>,
    on_stack: HashSet<ForestId>,
}

impl Counting<'_> {
    fn forest(&mut self, f: ForestId) -> ParseCount {
        if let Some(c) = self.memo.get(&f) {
            return c.clone();
        }
        if !self.on_stack.insert(f) {
            return ParseCount::Infinite;
        }
        let c = match self.store.kind(f) {
            ForestKind::Leaf(_) => ParseCount::one(),
            ForestKind::Pending => ParseCount::zero(),
            ForestKind::Pair(a, b) => {
                let (a, b) = (*a, *b);
                self.forest(a) * self.forest(b)
            }
            ForestKind::Prod(_, ch) => ch
                .clone()
                .into_iter()
                .fold(ParseCount::one(), |acc, x| acc * self.forest(x)),
            ForestKind::Amb(alts) => alts
                .clone()
                .into_iter()
                .fold(ParseCount::zero(), |acc, x| acc + self.forest(x)),
            ForestKind::Deferred(r, inner) => {
                let (r, inner) = (*r, *inner);
                self.forest(inner) * self.multiplicity(r)
            }
        };
        self.on_stack.remove(&f);
        self.memo.insert(f, c.clone());
        c
    }

    /// How many output trees the reduction produces per input tree.
    fn multiplicity(&mut self, r: RedId) -> ParseCount {
        if let Some(c) = self.red_memo.get(&r) {
            return c.clone();
        }
        let c = match self.store.reduction(r) {
            Reduction::PairLeft(s) | Reduction::PairRight(s) => self.forest(s),
            Reduction::Reassociate | Reduction::Production { .. } => ParseCount::one(),
            Reduction::LiftLeft(g) | Reduction::LiftRight(g) => self.multiplicity(g),
            Reduction::Compose(g, f) => self.multiplicity(g) * self.multiplicity(f),
        };
        self.red_memo.insert(r, c.clone());
        c
    }
}

/// Up to `limit` resolved trees, sorted.
///
/// Cyclic forests are unfolded with an increasing bound on how often a node
/// may re-enter itself until `limit` trees are found.
pub fn enumerate_trees(store: &ForestStore, root: ForestSet, limit: usize) -> Vec<Tree> {
    let Some(root) = root else {
        return Vec::new();
    };
    if limit == 0 {
        return Vec::new();
    }
    let mut unfold = 0;
    loop {
        let mut e = Enumerator {
            store,
            limit,
            unfold,
            on_stack: HashMap::new(),
            memo: HashMap::new(),
            cut: false,
        };
        let mut trees = e.forest(root);
        trees.sort();
        trees.truncate(limit);
        if !e.cut || trees.len() >= limit || unfold >= limit {
            return trees;
        }
        unfold += 1;
    }
}

struct Enumerator<'a> {
    store: &'a ForestStore,
    limit: usize,
    unfold: usize,
    on_stack: HashMap<ForestId, usize>,
    memo: HashMap<ForestId, Vec<Tree>>,
    cut: bool,
}

impl Enumerator<'_> {
    fn forest(&mut self, f: ForestId) -> Vec<Tree> {
        if let Some(t) = self.memo.get(&f) {
            return t.clone();
        }
        let depth = self.on_stack.get(&f).copied().unwrap_or(0);
        if depth > self.unfold {
            self.cut = true;
            return Vec::new();
        }
        self.on_stack.insert(f, depth + 1);
        let outer_cut = std::mem::replace(&mut self.cut, false);
        let out = match self.store.kind(f).clone() {
            ForestKind::Leaf(s) => vec![Tree::Leaf(self.store.symbols.name(s).to_string())],
            ForestKind::Pending => Vec::new(),
            ForestKind::Pair(a, b) => {
                let left = self.forest(a);
                let right = if left.is_empty() { Vec::new() } else { self.forest(b) };
                self.cross(&left, &right)
            }
            ForestKind::Prod(name, ch) => {
                let mut acc: Vec<Vec<Tree>> = vec![Vec::new()];
                for c in ch {
                    let sub = self.forest(c);
                    let mut next = Vec::new();
                    'outer: for prefix in &acc {
                        for t in &sub {
                            if next.len() >= self.limit {
                                break 'outer;
                            }
                            let mut p = prefix.clone();
                            p.push(t.clone());
                            next.push(p);
                        }
                    }
                    acc = next;
                }
                let name = self.store.symbols.name(name).to_string();
                acc.into_iter().map(|ch| Tree::Node(name.clone(), ch)).collect()
            }
            ForestKind::Amb(alts) => {
                let mut out = Vec::new();
                for a in alts {
                    if out.len() >= self.limit {
                        break;
                    }
                    out.extend(self.forest(a));
                }
                out.truncate(self.limit);
                out
            }
            ForestKind::Deferred(r, inner) => {
                let inputs = self.forest(inner);
                let mut out = Vec::new();
                for t in inputs {
                    if out.len() >= self.limit {
                        break;
                    }
                    out.extend(self.apply(r, t));
                }
                out.truncate(self.limit);
                out
            }
        };
        if depth == 0 {
            self.on_stack.remove(&f);
        } else {
            self.on_stack.insert(f, depth);
        }
        if !self.cut {
            self.memo.insert(f, out.clone());
        }
        self.cut |= outer_cut;
        out
    }

    fn cross(&self, left: &[Tree], right: &[Tree]) -> Vec<Tree> {
        let mut out = Vec::new();
        for a in left {
            for b in right {
                if out.len() >= self.limit {
                    return out;
                }
                out.push(Tree::Pair(Box::new(a.clone()), Box::new(b.clone())));
            }
        }
        out
    }

    fn apply(&mut self, r: RedId, t: Tree) -> Vec<Tree> {
        match self.store.reduction(r) {
            Reduction::PairLeft(s) => {
                let left = self.forest(s);
                self.cross(&left, &[t])
            }
            Reduction::PairRight(s) => {
                let right = self.forest(s);
                self.cross(&[t], &right)
            }
            Reduction::Reassociate => match t {
                Tree::Pair(a, bc) => match *bc {
                    Tree::Pair(b, c) => vec![Tree::Pair(Box::new(Tree::Pair(a, b)), c)],
                    other => unreachable!("reassociate applied to ({a}, {other})"),
                },
                other => unreachable!("reassociate applied to {other}"),
            },
            Reduction::LiftLeft(g) => match t {
                Tree::Pair(a, b) => self
                    .apply(g, *a)
                    .into_iter()
                    .map(|x| Tree::Pair(Box::new(x), b.clone()))
                    .collect(),
                other => unreachable!("lift-left applied to {other}"),
            },
            Reduction::LiftRight(g) => match t {
                Tree::Pair(a, b) => self
                    .apply(g, *b)
                    .into_iter()
                    .map(|x| Tree::Pair(a.clone(), Box::new(x)))
                    .collect(),
                other => unreachable!("lift-right applied to {other}"),
            },
            Reduction::Production { name, arity } => {
                let mut children = Vec::with_capacity(arity as usize);
                let mut rest = t;
                for _ in 1..arity {
                    match rest {
                        Tree::Pair(a, b) => {
                            children.push(*a);
                            rest = *b;
                        }
                        other => unreachable!("production of arity {arity} applied to {other}"),
                    }
                }
                children.push(rest);
                vec![Tree::Node(self.store.symbols.name(name).to_string(), children)]
            }
            Reduction::Compose(g, f) => {
                let mut out = Vec::new();
                for x in self.apply(f, t) {
                    out.extend(self.apply(g, x));
                    if out.len() >= self.limit {
                        break;
                    }
                }
                out.truncate(self.limit);
                out
            }
        }
    }
}

fn reduction_label(store: &ForestStore, r: Reduction) -> String {
    match r {
        Reduction::PairLeft(_) => "pair-left".into(),
        Reduction::PairRight(_) => "pair-right".into(),
        Reduction::Reassociate => "reassociate".into(),
        Reduction::LiftLeft(_) => "lift-left".into(),
        Reduction::LiftRight(_) => "lift-right".into(),
        Reduction::Production { name, arity } => {
            format!("production:{}/{}", store.symbols.name(name), arity)
        }
        Reduction::Compose(..) => "compose".into(),
    }
}

/// JSON form of a forest: every node once, edges by dense integer id.
fn forest_json(store: &ForestStore, root: ForestSet) -> Value {
    let (forests, reds) = reachable(store, root);
    let fid: HashMap<ForestId, usize> = forests.iter().enumerate().map(|(i, f)| (*f, i)).collect();
    let rid: HashMap<RedId, usize> = reds.iter().enumerate().map(|(i, r)| (*r, i)).collect();
    let nodes: Vec<Value> = forests
        .iter()
        .enumerate()
        .map(|(i, f)| match store.kind(*f) {
            ForestKind::Leaf(s) => {
                json!({"id": i, "kind": "leaf", "label": store.symbols.name(*s), "children": []})
            }
            ForestKind::Pair(a, b) => {
                json!({"id": i, "kind": "pair", "label": null, "children": [fid[a], fid[b]]})
            }
            ForestKind::Prod(n, ch) => json!({
                "id": i, "kind": "prod", "label": store.symbols.name(*n),
                "children": ch.iter().map(|c| fid[c]).collect::<Vec<_>>()
            }),
            ForestKind::Amb(ch) => json!({
                "id": i, "kind": "amb", "label": null,
                "children": ch.iter().map(|c| fid[c]).collect::<Vec<_>>()
            }),
            ForestKind::Deferred(r, inner) => json!({
                "id": i, "kind": "reduce", "label": reduction_label(store, store.reduction(*r)),
                "children": [fid[inner]], "reduction": rid[r]
            }),
            ForestKind::Pending => json!({"id": i, "kind": "pending", "label": null, "children": []}),
        })
        .collect();
    let reductions: Vec<Value> = reds
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let red = store.reduction(*r);
            let (children, args): (Vec<usize>, Vec<usize>) = match red {
                Reduction::PairLeft(s) | Reduction::PairRight(s) => (vec![fid[&s]], vec![]),
                Reduction::LiftLeft(g) | Reduction::LiftRight(g) => (vec![], vec![rid[&g]]),
                Reduction::Compose(g, f) => (vec![], vec![rid[&g], rid[&f]]),
                _ => (vec![], vec![]),
            };
            json!({"id": i, "kind": reduction_label(store, red), "children": children, "reductions": args})
        })
        .collect();
    json!({
        "root": root.map(|r| fid[&r]),
        "nodes": nodes,
        "reductions": reductions,
    })
}
