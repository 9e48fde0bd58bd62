use std::collections::HashMap;
use std::fmt;

macro_rules! index_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(pub(crate) u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }

            #[inline]
            pub fn from_index(i: usize) -> Self {
                debug_assert!(i < u32::MAX as usize);
                $name(i as u32)
            }
        }
    };
}

index_type!(
    /// Identity of a grammar node. Stable for the lifetime of the node.
    NodeId
);
index_type!(
    /// Interned terminal or nonterminal label.
    Sym
);
index_type!(
    /// Identity of a node in a parse forest.
    ForestId
);
index_type!(
    /// Identity of an interned reduction.
    RedId
);

impl NodeId {
    /// Placeholder child of a shell whose children are not filled in yet.
    pub(crate) const PENDING: NodeId = NodeId(u32::MAX);
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// The label that matches any input token.
pub const WILDCARD: &str = ".";

/// String interner for terminal and nonterminal labels.
#[derive(Clone, Debug)]
pub struct Symbols {
    names: Vec<Box<str>>,
    lookup: HashMap<Box<str>, Sym>,
}

impl Symbols {
    /// The wildcard label is always interned first.
    pub const WILDCARD: Sym = Sym(0);

    pub fn new() -> Self {
        let mut s = Symbols {
            names: Vec::new(),
            lookup: HashMap::new(),
        };
        s.intern(WILDCARD);
        s
    }

    pub fn intern(&mut self, name: &str) -> Sym {
        if let Some(&s) = self.lookup.get(name) {
            return s;
        }
        let s = Sym::from_index(self.names.len());
        self.names.push(name.into());
        self.lookup.insert(name.into(), s);
        s
    }

    pub fn get(&self, name: &str) -> Option<Sym> {
        self.lookup.get(name).copied()
    }

    pub fn name(&self, s: Sym) -> &str {
        &self.names[s.index()]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

impl Default for Symbols {
    fn default() -> Self {
        Self::new()
    }
}
