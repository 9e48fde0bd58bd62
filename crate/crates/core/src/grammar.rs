//! Grammar graph: the six expression forms, per-node memo fields, and the
//! arena that owns both the loaded grammar and every derivative built from it.

use std::collections::HashMap;

use indexmap::IndexMap;

use crate::forest::{ForestSet, ForestStore};
use crate::ids::{ForestId, NodeId, RedId, Sym, Symbols};
use crate::instrument::{Counters, NameTable, NodeName};
use crate::loader::{self, LoadError};
use crate::nullability::{NullEngine, NullState};
use crate::oracle::BnfGrammar;

/// A parsing expression.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Form {
    /// The empty language.
    Empty,
    /// The empty word, carrying a non-empty set of result trees.
    Eps(ForestId),
    /// A single terminal. The wildcard label matches any token.
    Token(Sym),
    Seq(NodeId, NodeId),
    Alt(NodeId, NodeId),
    /// Post-processes the child's trees with a reduction.
    Red(NodeId, RedId),
}

impl Form {
    pub fn kind(&self) -> FormKind {
        match self {
            Form::Empty => FormKind::Empty,
            Form::Eps(_) => FormKind::Eps,
            Form::Token(_) => FormKind::Token,
            Form::Seq(..) => FormKind::Seq,
            Form::Alt(..) => FormKind::Alt,
            Form::Red(..) => FormKind::Red,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FormKind {
    Empty,
    Eps,
    Token,
    Seq,
    Alt,
    Red,
}

/// State of the `parse_null` memo for one node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum NullMemo {
    None,
    /// Extraction is running; `Some` once a cycle asked for a placeholder.
    InProgress(Option<ForestId>),
    Done(ForestSet),
}

pub(crate) const IN_PROGRESS: u8 = 1;
/// A cache hit returned this node while it was still a shell.
pub(crate) const REFERENCED: u8 = 1 << 1;
/// The single-entry memo of this node holds a compaction result, not a minted shell.
pub(crate) const MEMO_SUBSTITUTED: u8 = 1 << 2;

#[derive(Clone, Debug)]
pub struct Node {
    pub(crate) form: Form,
    pub(crate) null: NullState,
    /// Whether the node derives any word; `Nullable` reads as "productive".
    pub(crate) prod: NullState,
    pub(crate) memo: Option<(Sym, NodeId)>,
    pub(crate) null_memo: NullMemo,
    pub(crate) flags: u8,
}

impl Node {
    pub(crate) fn new(form: Form) -> Node {
        Node {
            form,
            null: NullState::initial(&form),
            prod: NullState::initial_productive(&form),
            memo: None,
            null_memo: NullMemo::None,
            flags: 0,
        }
    }

    pub fn form(&self) -> Form {
        self.form
    }

    pub fn nullability(&self) -> NullState {
        self.null
    }

    pub fn in_progress(&self) -> bool {
        self.flags & IN_PROGRESS != 0
    }

    /// The single-entry derive memo, if one is stored.
    pub fn memo_entry(&self) -> Option<(Sym, NodeId)> {
        self.memo
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MemoMode {
    /// One `(token, result)` slot per node; a second token evicts the first.
    #[default]
    SingleEntry,
    /// A full `token → result` table per node.
    FullMap,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NullabilityMode {
    /// Recursive fast path, dependency tracking after cycles, generation labels.
    #[default]
    Optimized,
    /// Repeated traversal of the whole reachable set until nothing changes.
    Naive,
}

/// Algorithm variants. Fixed for the lifetime of a [`Grammar`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParserConfig {
    pub memo: MemoMode,
    /// Construction-time compaction and load-time normalization.
    pub compaction: bool,
    pub nullability: NullabilityMode,
    pub debug_names: bool,
}

impl Default for ParserConfig {
    fn default() -> Self {
        ParserConfig {
            memo: MemoMode::SingleEntry,
            compaction: true,
            nullability: NullabilityMode::Optimized,
            debug_names: false,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Baseline {
    nodes: usize,
    forests: usize,
    reductions: usize,
    names: usize,
}

/// A loaded grammar together with every node derived from it during a parse.
///
/// Nodes, forests and memo state live in arenas owned by this value. A parse
/// truncates the arenas back to the loaded grammar before starting, so memo
/// tables never leak between parses.
#[derive(Clone, Debug)]
pub struct Grammar {
    pub(crate) nodes: Vec<Node>,
    pub(crate) store: ForestStore,
    pub(crate) root: NodeId,
    pub(crate) nonterminals: IndexMap<String, NodeId>,
    pub(crate) bnf: BnfGrammar,
    pub(crate) config: ParserConfig,
    pub(crate) counters: Counters,
    pub(crate) nulls: NullEngine,
    pub(crate) full_memo: HashMap<(NodeId, Sym), (NodeId, bool)>,
    pub(crate) names: Option<NameTable>,
    size_g: usize,
    baseline: Baseline,
}

impl Grammar {
    /// Loads a grammar with the default configuration.
    pub fn load(text: &str) -> Result<Grammar, LoadError> {
        Grammar::load_with(text, ParserConfig::default())
    }

    pub fn load_with(text: &str, config: ParserConfig) -> Result<Grammar, LoadError> {
        let bnf = loader::parse_grammar_text(text)?;
        Ok(Grammar::from_bnf(bnf, config))
    }

    /// Converts a BNF grammar to its expression graph and, when compaction
    /// is on, normalizes it.
    pub fn from_bnf(bnf: BnfGrammar, config: ParserConfig) -> Grammar {
        let mut g = Grammar {
            nodes: Vec::new(),
            store: ForestStore::new(),
            root: NodeId::PENDING,
            nonterminals: IndexMap::new(),
            bnf,
            config,
            counters: Counters::default(),
            nulls: NullEngine::default(),
            full_memo: HashMap::new(),
            names: None,
            size_g: 0,
            baseline: Baseline {
                nodes: 0,
                forests: 0,
                reductions: 0,
                names: 0,
            },
        };
        loader::build_graph(&mut g);
        if config.compaction {
            g.normalize();
        }
        g.seal();
        g
    }

    /// Records the loaded grammar as the state every parse starts from.
    pub(crate) fn seal(&mut self) {
        for node in &mut self.nodes {
            node.null = NullState::initial(&node.form);
            node.prod = NullState::initial_productive(&node.form);
            node.memo = None;
            node.null_memo = NullMemo::None;
            node.flags = 0;
        }
        self.size_g = self.reachable_from(self.root).len();
        if self.config.debug_names {
            let mut table = NameTable::default();
            for _ in 0..self.nodes.len() {
                let n = table.supply.fresh();
                table.names.push(Some(n));
            }
            self.names = Some(table);
        }
        self.baseline = Baseline {
            nodes: self.nodes.len(),
            forests: self.store.forest_len(),
            reductions: self.store.reduction_len(),
            names: self.nodes.len(),
        };
        self.counters.reset();
    }

    /// Drops every derived node and clears all memo tables and counters.
    pub fn reset(&mut self) {
        let b = self.baseline;
        self.nodes.truncate(b.nodes);
        for node in &mut self.nodes {
            node.null = NullState::initial(&node.form);
            node.prod = NullState::initial_productive(&node.form);
            node.memo = None;
            node.null_memo = NullMemo::None;
            node.flags = 0;
        }
        self.store.truncate(b.forests, b.reductions);
        self.full_memo.clear();
        self.nulls = NullEngine::default();
        if let Some(t) = &mut self.names {
            t.names.truncate(b.names);
            t.supply = Default::default();
            for _ in 0..b.names {
                t.supply.fresh();
            }
            t.mismatches = 0;
            t.double_bullets = 0;
            t.checked_hits = 0;
        }
        self.counters.reset();
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn config(&self) -> ParserConfig {
        self.config
    }

    /// Switches the nullability algorithm. Both compute the same answers, so
    /// this is safe at any point, including between derivatives.
    pub fn set_nullability(&mut self, mode: NullabilityMode) {
        self.config.nullability = mode;
    }

    /// Number of nodes reachable from the root of the loaded grammar.
    pub fn size(&self) -> usize {
        self.size_g
    }

    /// Number of nodes belonging to the loaded grammar (reachable or not).
    pub fn initial_len(&self) -> usize {
        self.baseline.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn form(&self, id: NodeId) -> Form {
        self.nodes[id.index()].form
    }

    pub fn nonterminal(&self, name: &str) -> Option<NodeId> {
        self.nonterminals.get(name).copied()
    }

    pub fn nonterminals(&self) -> impl Iterator<Item = (&str, NodeId)> {
        self.nonterminals.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn bnf(&self) -> &BnfGrammar {
        &self.bnf
    }

    pub fn counters(&self) -> &Counters {
        &self.counters
    }

    pub fn symbols(&self) -> &Symbols {
        &self.store.symbols
    }

    pub fn forests(&self) -> &ForestStore {
        &self.store
    }

    pub fn intern(&mut self, label: &str) -> Sym {
        self.store.symbols.intern(label)
    }

    pub fn names(&self) -> Option<&NameTable> {
        self.names.as_ref()
    }

    pub fn name_of(&self, id: NodeId) -> Option<&NodeName> {
        self.names.as_ref().and_then(|t| t.get(id.index()))
    }

    pub(crate) fn is_in_progress(&self, id: NodeId) -> bool {
        self.nodes[id.index()].flags & IN_PROGRESS != 0
    }

    /// Appends a node without applying any rewrite.
    pub(crate) fn alloc(&mut self, form: Form) -> NodeId {
        let id = NodeId::from_index(self.nodes.len());
        let c = &mut self.counters.nodes_created;
        match form {
            Form::Empty => c.empty += 1,
            Form::Eps(_) => c.epsilon += 1,
            Form::Token(_) => c.token += 1,
            Form::Seq(..) => c.seq += 1,
            Form::Alt(..) => c.alt += 1,
            Form::Red(..) => c.red += 1,
        }
        self.nodes.push(Node::new(form));
        if let Some(t) = &mut self.names {
            let n = t.supply.fresh();
            t.names.push(Some(n));
        }
        id
    }

    /// Allocates a shell of the given outer form whose children are pending.
    pub(crate) fn alloc_shell(&mut self, form: Form) -> NodeId {
        let id = self.alloc(form);
        self.nodes[id.index()].flags |= IN_PROGRESS;
        id
    }

    /// Overwrites a node's form. Used to fill shells and by the normalizer.
    pub(crate) fn set_form(&mut self, id: NodeId, form: Form) {
        let node = &mut self.nodes[id.index()];
        node.form = form;
        node.null = NullState::initial(&form);
        node.prod = NullState::initial_productive(&form);
    }

    /// All nodes reachable from `from`, in depth-first preorder.
    pub fn reachable_from(&self, from: NodeId) -> Vec<NodeId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut order = Vec::new();
        let mut stack = vec![from];
        while let Some(n) = stack.pop() {
            if n == NodeId::PENDING || seen[n.index()] {
                continue;
            }
            seen[n.index()] = true;
            order.push(n);
            match self.nodes[n.index()].form {
                Form::Seq(l, r) | Form::Alt(l, r) => {
                    stack.push(r);
                    stack.push(l);
                }
                Form::Red(p, _) => stack.push(p),
                _ => {}
            }
        }
        order
    }

    /// Seq nodes whose right child is `Empty`, `Eps` or `Red`, among nodes
    /// reachable from the loaded root and every node created since loading.
    pub fn seq_right_violations(&self) -> Vec<NodeId> {
        let mut candidates = self.reachable_from(self.root);
        candidates.extend((self.baseline.nodes..self.nodes.len()).map(NodeId::from_index));
        candidates
            .into_iter()
            .filter(|&n| match self.nodes[n.index()].form {
                Form::Seq(_, r) => matches!(
                    self.nodes[r.index()].form,
                    Form::Empty | Form::Eps(_) | Form::Red(..)
                ),
                _ => false,
            })
            .collect()
    }

    /// Nodes still flagged as in-progress shells.
    pub fn live_shells(&self) -> Vec<NodeId> {
        (0..self.nodes.len())
            .filter(|&i| self.nodes[i].flags & IN_PROGRESS != 0)
            .map(NodeId::from_index)
            .collect()
    }

    /// Every `(node, token, result)` memo entry currently stored.
    pub fn memo_entries(&self) -> Vec<(NodeId, Sym, NodeId)> {
        let mut out: Vec<_> = self
            .nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.memo.map(|(c, r)| (NodeId::from_index(i), c, r)))
            .collect();
        out.extend(self.full_memo.iter().map(|(&(n, c), &(r, _))| (n, c, r)));
        out
    }
}
