//! Grammar text format and conversion to the expression graph.
//!
//! ```text
//! # comment
//! start = Expr ;
//! Expr : Expr '+' Term | Term ;
//! Term : 'n' | ;
//! ```
//!
//! Each alternative `N : X1 … Xk` becomes a right-nested sequence wrapped in a
//! production reduction; an empty alternative becomes `ε` carrying the empty
//! production node. Nonterminal references point directly at the
//! nonterminal's node, so recursion shows up as cycles.

use std::collections::HashMap;

use indexmap::IndexMap;
use thiserror::Error;

use crate::forest::Reduction;
use crate::grammar::{Form, Grammar};
use crate::ids::NodeId;
use crate::oracle::{BnfGrammar, BnfSymbol};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LoadError {
    #[error("{line}:{column}: syntax error: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: undefined nonterminal `{name}`")]
    Undefined { name: String, line: usize, column: usize },
    #[error("{line}:{column}: nonterminal `{name}` is defined twice")]
    Duplicate { name: String, line: usize, column: usize },
    #[error("grammar defines no nonterminals")]
    NoProductions,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Quoted(String),
    Punct(char),
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, LoadError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1, 1);
    let err = |line, column, message: String| LoadError::Syntax { line, column, message };
    while let Some(&c) = chars.peek() {
        let (l0, c0) = (line, column);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            c
        };
        match c {
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump(&mut chars);
                }
            }
            c if c.is_whitespace() => {
                bump(&mut chars);
            }
            '=' | ':' | '|' | ';' => {
                bump(&mut chars);
                out.push(Spanned { tok: Tok::Punct(c), line: l0, column: c0 });
            }
            '\'' => {
                bump(&mut chars);
                let mut label = String::new();
                loop {
                    match bump(&mut chars) {
                        None | Some('\n') => {
                            return Err(err(l0, c0, "unterminated terminal".into()));
                        }
                        Some('\\') => match bump(&mut chars) {
                            Some(e @ ('\\' | '\'')) => label.push(e),
                            _ => return Err(err(l0, c0, "invalid escape in terminal".into())),
                        },
                        Some('\'') => break,
                        Some(ch) => label.push(ch),
                    }
                }
                if label.is_empty() {
                    return Err(err(l0, c0, "empty terminal label".into()));
                }
                out.push(Spanned { tok: Tok::Quoted(label), line: l0, column: c0 });
            }
            c if c.is_alphanumeric() || c == '_' => {
                let mut name = String::new();
                while let Some(&c) = chars.peek() {
                    if !(c.is_alphanumeric() || c == '_' || c == '-') {
                        break;
                    }
                    name.push(c);
                    bump(&mut chars);
                }
                out.push(Spanned { tok: Tok::Ident(name), line: l0, column: c0 });
            }
            other => return Err(err(l0, c0, format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

/// Parses grammar text into BNF. The start symbol defaults to the first
/// nonterminal when no `start = N ;` line is present.
pub fn parse_grammar_text(text: &str) -> Result<BnfGrammar, LoadError> {
    let toks = lex(text)?;
    let mut pos = 0;
    let mut start: Option<(String, usize, usize)> = None;
    let mut productions: IndexMap<String, Vec<Vec<BnfSymbol>>> = IndexMap::new();
    let mut refs: Vec<(String, usize, usize)> = Vec::new();
    let (end_line, end_col) = toks.last().map_or((1, 1), |t| (t.line, t.column));
    let syntax = |t: Option<&Spanned>, message: &str| {
        let (line, column) = t.map_or((end_line, end_col), |t| (t.line, t.column));
        LoadError::Syntax { line, column, message: message.to_string() }
    };
    while pos < toks.len() {
        let head = &toks[pos];
        let Tok::Ident(name) = &head.tok else {
            return Err(syntax(Some(head), "expected a nonterminal name"));
        };
        match toks.get(pos + 1).map(|t| &t.tok) {
            Some(Tok::Punct('=')) if name == "start" => {
                let (Some(Spanned { tok: Tok::Ident(s), line, column }), Some(Spanned { tok: Tok::Punct(';'), .. })) =
                    (toks.get(pos + 2), toks.get(pos + 3))
                else {
                    return Err(syntax(toks.get(pos + 2), "expected `start = Name ;`"));
                };
                if start.is_some() {
                    return Err(syntax(Some(head), "start symbol declared twice"));
                }
                start = Some((s.clone(), *line, *column));
                pos += 4;
            }
            Some(Tok::Punct(':')) => {
                if productions.contains_key(name) {
                    return Err(LoadError::Duplicate {
                        name: name.clone(),
                        line: head.line,
                        column: head.column,
                    });
                }
                pos += 2;
                let mut alts = vec![Vec::new()];
                loop {
                    let Some(t) = toks.get(pos) else {
                        return Err(syntax(None, "expected `;` at end of production"));
                    };
                    pos += 1;
                    match &t.tok {
                        Tok::Punct(';') => break,
                        Tok::Punct('|') => alts.push(Vec::new()),
                        Tok::Quoted(label) => alts.last_mut().unwrap().push(BnfSymbol::Terminal(label.clone())),
                        Tok::Ident(n) => {
                            refs.push((n.clone(), t.line, t.column));
                            alts.last_mut().unwrap().push(BnfSymbol::Nonterminal(n.clone()));
                        }
                        Tok::Punct(_) => return Err(syntax(Some(t), "unexpected punctuation in production")),
                    }
                }
                productions.insert(name.clone(), alts);
            }
            _ => return Err(syntax(toks.get(pos + 1), "expected `:` after nonterminal name")),
        }
    }
    if productions.is_empty() {
        return Err(LoadError::NoProductions);
    }
    if let Some((s, line, column)) = &start {
        refs.push((s.clone(), *line, *column));
    }
    for (name, line, column) in refs {
        if !productions.contains_key(&name) {
            return Err(LoadError::Undefined { name, line, column });
        }
    }
    let start = match start {
        Some((s, ..)) => s,
        None => productions.keys().next().unwrap().clone(),
    };
    Ok(BnfGrammar { start, productions })
}

/// Builds the expression graph for `g.bnf` into `g`'s arenas.
pub(crate) fn build_graph(g: &mut Grammar) {
    let bnf = g.bnf.clone();
    for name in bnf.productions.keys() {
        let id = g.alloc(Form::Empty);
        g.nonterminals.insert(name.clone(), id);
    }
    let mut tokens: HashMap<String, NodeId> = HashMap::new();
    for (name, alts) in &bnf.productions {
        let nsym = g.intern(name);
        let mut forms = Vec::with_capacity(alts.len());
        for alt in alts {
            let form = if alt.is_empty() {
                let leaf = g.store.prod(nsym, Vec::new());
                Form::Eps(leaf)
            } else {
                let items: Vec<NodeId> = alt
                    .iter()
                    .map(|s| match s {
                        BnfSymbol::Nonterminal(n) => g.nonterminals[n],
                        BnfSymbol::Terminal(t) => *tokens.entry(t.clone()).or_insert_with(|| {
                            let sym = g.store.symbols.intern(t);
                            g.alloc(Form::Token(sym))
                        }),
                    })
                    .collect();
                let mut body = *items.last().unwrap();
                for &x in items.iter().rev().skip(1) {
                    body = g.alloc(Form::Seq(x, body));
                }
                let f = g.store.add_reduction(Reduction::Production {
                    name: nsym,
                    arity: alt.len() as u32,
                });
                Form::Red(body, f)
            };
            forms.push(form);
        }
        let top = join_alternatives(g, &forms);
        let id = g.nonterminals[name];
        g.set_form(id, top);
    }
    g.root = g.nonterminals[&bnf.start];
}

fn join_alternatives(g: &mut Grammar, forms: &[Form]) -> Form {
    match forms {
        [only] => *only,
        [first, rest @ ..] => {
            let l = g.alloc(*first);
            let r = join_alternatives(g, rest);
            let r = g.alloc(r);
            Form::Alt(l, r)
        }
        [] => unreachable!("a production has at least one alternative"),
    }
}
