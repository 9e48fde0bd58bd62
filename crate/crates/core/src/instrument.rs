//! Event counters and the debug node-naming scheme.
//!
//! Names follow three rules. Nodes of the loaded grammar, and helper nodes
//! built by compaction, get a fresh base symbol. The `Alt` node produced by
//! deriving a `Seq` whose left child is nullable is named `w•c`. Every other
//! memoized derivative of a node named `w` by token `c` is named `wc`.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::ids::{Sym, Symbols};

/// Node counts broken down by form.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FormCounts {
    pub empty: u64,
    pub epsilon: u64,
    pub token: u64,
    pub seq: u64,
    pub alt: u64,
    pub red: u64,
}

impl FormCounts {
    pub fn total(&self) -> u64 {
        self.empty + self.epsilon + self.token + self.seq + self.alt + self.red
    }
}

/// Every local rewrite the compacting constructors and the normalizer can fire.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompactionRule {
    /// `∅ ∪ p ⇒ p`
    AltEmptyLeft,
    /// `p ∪ ∅ ⇒ p`
    AltEmptyRight,
    /// `ε_s1 ∪ ε_s2 ⇒ ε_(s1 ∪ s2)`
    AltEpsEps,
    /// `∅ ∘ p ⇒ ∅`
    SeqEmptyLeft,
    /// `ε_s ∘ p ⇒ p → (s, ·)`
    SeqEpsLeft,
    /// `(p1 ∘ p2) ∘ p3 ⇒ (p1 ∘ (p2 ∘ p3)) → reassociate`
    SeqReassociate,
    /// `(p1 → f) ∘ p2 ⇒ (p1 ∘ p2) → lift-left f`
    SeqRedLeft,
    /// `p ∘ ∅ ⇒ ∅` (normalization only)
    SeqEmptyRight,
    /// `p ∘ ε_s ⇒ p → (·, s)` (normalization only)
    SeqEpsRight,
    /// `p1 ∘ (p2 → f) ⇒ (p1 ∘ p2) → lift-right f` (normalization only)
    SeqRedRight,
    /// `∅ → f ⇒ ∅`
    RedEmpty,
    /// `ε_s → f ⇒ ε_(f s)`
    RedEps,
    /// `(p → f) → g ⇒ p → (g ∘ f)`
    RedRed,
}

impl CompactionRule {
    pub const ALL: [CompactionRule; 13] = [
        CompactionRule::AltEmptyLeft,
        CompactionRule::AltEmptyRight,
        CompactionRule::AltEpsEps,
        CompactionRule::SeqEmptyLeft,
        CompactionRule::SeqEpsLeft,
        CompactionRule::SeqReassociate,
        CompactionRule::SeqRedLeft,
        CompactionRule::SeqEmptyRight,
        CompactionRule::SeqEpsRight,
        CompactionRule::SeqRedRight,
        CompactionRule::RedEmpty,
        CompactionRule::RedEps,
        CompactionRule::RedRed,
    ];
}

/// Firing counts per compaction rule.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RuleCounts([u64; 13]);

impl RuleCounts {
    pub fn get(&self, rule: CompactionRule) -> u64 {
        self.0[rule as usize]
    }

    pub(crate) fn bump(&mut self, rule: CompactionRule) {
        self.0[rule as usize] += 1;
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }
}

impl Serialize for RuleCounts {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(CompactionRule::ALL.len()))?;
        for rule in CompactionRule::ALL {
            m.serialize_entry(&rule, &self.get(rule))?;
        }
        m.end()
    }
}

/// Instrumentation record for one parse. All counts are monotone during a parse.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Counters {
    pub nodes_created: FormCounts,
    pub derive_calls_cached: u64,
    pub derive_calls_uncached: u64,
    pub nullable_visits: u64,
    /// Node evaluations of the per-token emptiness check.
    pub emptiness_visits: u64,
    pub compaction_firings: RuleCounts,
    pub generation_count: u64,
}

impl Counters {
    pub fn snapshot(&self) -> Counters {
        *self
    }

    pub fn reset(&mut self) {
        *self = Counters::default();
    }

    pub fn emit(&self, format: &str) -> Result<String, EmitError> {
        match format {
            "csv" => Ok(format!(
                "nodes_created,derive_cached,derive_uncached,nullable_visits,compactions,generations\n{},{},{},{},{},{}\n",
                self.nodes_created.total(),
                self.derive_calls_cached,
                self.derive_calls_uncached,
                self.nullable_visits,
                self.compaction_firings.total(),
                self.generation_count,
            )),
            "json" => Ok(serde_json::to_string_pretty(self).expect("counters serialize")),
            other => Err(EmitError::UnknownFormat(other.to_string())),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EmitError {
    #[error("unknown output format `{0}` (expected `csv` or `json`)")]
    UnknownFormat(String),
}

/// One symbol of a name suffix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NamePart {
    Token(Sym),
    Bullet,
}

/// Debug name of a grammar node: a base symbol followed by derivation tokens.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NodeName {
    pub base: u32,
    pub suffix: Vec<NamePart>,
}

impl NodeName {
    pub fn bullets(&self) -> usize {
        self.suffix.iter().filter(|p| **p == NamePart::Bullet).count()
    }

    /// The suffix with the bullet removed.
    pub fn tokens(&self) -> impl Iterator<Item = Sym> + '_ {
        self.suffix.iter().filter_map(|p| match p {
            NamePart::Token(s) => Some(*s),
            NamePart::Bullet => None,
        })
    }

    pub fn display<'a>(&'a self, symbols: &'a Symbols) -> impl fmt::Display + 'a {
        DisplayName(self, symbols)
    }
}

struct DisplayName<'a>(&'a NodeName, &'a Symbols);

impl fmt::Display for DisplayName<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N{}", self.0.base)?;
        for p in &self.0.suffix {
            match p {
                NamePart::Token(s) => write!(f, "{}", self.1.name(*s))?,
                NamePart::Bullet => write!(f, "•")?,
            }
        }
        Ok(())
    }
}

/// Which naming rule applies to a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NamingRule {
    /// Fresh base symbol.
    Fresh,
    /// `Alt` created from a `Seq` with nullable left child: `w•c`.
    Bullet,
    /// Any other memoized derivative: `wc`.
    Extend,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NamingError {
    #[error("name already contains a bullet; a second one would break the single-bullet invariant")]
    DoubleBullet,
    #[error("rule requires a parent name")]
    MissingParent,
}

/// Allocates fresh base symbols.
#[derive(Clone, Debug, Default)]
pub struct NameSupply {
    next: u32,
}

impl NameSupply {
    pub fn fresh(&mut self) -> NodeName {
        let base = self.next;
        self.next += 1;
        NodeName {
            base,
            suffix: Vec::new(),
        }
    }
}

/// Mints the name a derived node receives under `rule`.
pub fn name_node(
    supply: &mut NameSupply,
    parent: Option<&NodeName>,
    token: Sym,
    rule: NamingRule,
) -> Result<NodeName, NamingError> {
    match rule {
        NamingRule::Fresh => Ok(supply.fresh()),
        NamingRule::Extend => {
            let mut n = parent.ok_or(NamingError::MissingParent)?.clone();
            n.suffix.push(NamePart::Token(token));
            Ok(n)
        }
        NamingRule::Bullet => {
            let parent = parent.ok_or(NamingError::MissingParent)?;
            if parent.bullets() > 0 {
                return Err(NamingError::DoubleBullet);
            }
            let mut n = parent.clone();
            n.suffix.push(NamePart::Bullet);
            n.suffix.push(NamePart::Token(token));
            Ok(n)
        }
    }
}

/// Per-grammar name storage used when debug naming is on.
#[derive(Clone, Debug, Default)]
pub struct NameTable {
    pub(crate) names: Vec<Option<NodeName>>,
    pub(crate) supply: NameSupply,
    /// Memo hits whose node name differs from the name the rules would mint.
    pub mismatches: u64,
    /// Attempts to add a second bullet to a name.
    pub double_bullets: u64,
    /// Memo hits that were checked.
    pub checked_hits: u64,
}

impl NameTable {
    pub fn get(&self, index: usize) -> Option<&NodeName> {
        self.names.get(index).and_then(|n| n.as_ref())
    }

    pub fn iter(&self) -> impl Iterator<Item = &NodeName> {
        self.names.iter().flatten()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extend_and_bullet() {
        let mut syms = Symbols::new();
        let c1 = syms.intern("c1");
        let c2 = syms.intern("c2");
        let mut supply = NameSupply::default();
        let _l = supply.fresh();
        let m = supply.fresh();
        let mc1 = name_node(&mut supply, Some(&m), c1, NamingRule::Extend).unwrap();
        assert_eq!(mc1.display(&syms).to_string(), "N1c1");
        let mc1bc2 = name_node(&mut supply, Some(&mc1), c2, NamingRule::Bullet).unwrap();
        assert_eq!(mc1bc2.display(&syms).to_string(), "N1c1•c2");
        assert_eq!(
            name_node(&mut supply, Some(&mc1bc2), c1, NamingRule::Bullet),
            Err(NamingError::DoubleBullet)
        );
        let fresh = name_node(&mut supply, None, c1, NamingRule::Fresh).unwrap();
        assert_eq!(fresh.base, 2);
        assert!(fresh.suffix.is_empty());
    }

    #[test]
    fn reset_gives_zero_record() {
        let mut c = Counters {
            derive_calls_cached: 7,
            ..Default::default()
        };
        c.nodes_created.alt = 3;
        c.compaction_firings.bump(CompactionRule::RedRed);
        c.reset();
        assert_eq!(c.snapshot(), Counters::default());
    }

    #[test]
    fn emit_formats() {
        let mut c = Counters::default();
        c.nodes_created.seq = 2;
        c.nodes_created.epsilon += 1;
        let csv = c.emit("csv").unwrap();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[1].starts_with("3,"));
        let json: serde_json::Value = serde_json::from_str(&c.emit("json").unwrap()).unwrap();
        assert_eq!(json["nodes_created"]["seq"], 2);
        assert_eq!(json["compaction_firings"]["red-red"], 0);
        assert_eq!(c.emit("xml"), Err(EmitError::UnknownFormat("xml".into())));
    }
}
