//! Parser for the `.views` text format.
//!
//! Grammar, one statement per line, `#` starting a comment:
//!
//! ```text
//! doc      := (stmt NL)*
//! stmt     := "head" NAME
//!           | "lit" NAME "=" STRING
//!           | "univ" NAME attrlist
//!           | "link" NAME ":" ref "," ref attrlist? block?
//! block    := "{" NL (substmt NL)* "}"
//! substmt  := ("prop1" | "prop2") ":" ref "," ref attrlist? block?
//! ref      := NAME | STRING | "_"
//! attrlist := "[" (KEY "=" NUM)* "]"
//! ```
//!
//! `_` is NULL and a STRING ref is an external literal. Keys `depth`,
//! `activ` and `alock` belong on `univ` statements; `cond1`, `slip1`,
//! `cond2` and `slip2` on link and sub statements. Lock values are 0 or 1.
//!
//! Name resolution is two-pass: a first pass collects every `head` and
//! `lit` declaration, so forward references are legal; the second pass
//! builds the database in statement order, materialising a referenced
//! headnode's row at the first statement that mentions it. Rows take the
//! lowest free address at creation, so a document's address layout is
//! deterministic.
//!
//! Documents always build CNSM databases at the default geometry; the
//! Normalised allocation exists only behind the binary image format.

use crate::db::ViewsDb;
use crate::error::{Error, Result};
use crate::model::{Addr, AllocationScheme, Ref, Side};
use crate::slipnet::{set_head_universals, set_link_universals, HeadUniversals, LinkUniversals};

use super::SymbolTable;

const MAX_BLOCK_DEPTH: usize = 64;

/// Line/column of a token, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

fn err_at(pos: Pos, msg: impl Into<String>) -> Error {
    Error::Parse {
        line: pos.line,
        col: pos.col,
        msg: msg.into(),
    }
}

// ---------------------------------------------------------------------------
// AST
// ---------------------------------------------------------------------------

/// A parsed document: the statement list before database construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewsTextDocument {
    pub statements: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Head {
        name: String,
        pos: Pos,
    },
    Lit {
        name: String,
        value: String,
        pos: Pos,
    },
    Univ {
        name: String,
        attrs: Vec<Attr>,
        pos: Pos,
    },
    Link {
        owner: String,
        edge: RefAst,
        dest: RefAst,
        attrs: Vec<Attr>,
        subs: Vec<SubStmt>,
        pos: Pos,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubStmt {
    pub side: Side,
    pub edge: RefAst,
    pub dest: RefAst,
    pub attrs: Vec<Attr>,
    pub subs: Vec<SubStmt>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RefAst {
    Name(String, Pos),
    Str(String),
    Null,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attr {
    pub key: String,
    pub value: f64,
    pub pos: Pos,
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Str(String),
    Num(f64),
    Colon,
    Comma,
    Eq,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Underscore,
    Newline,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn tokens(mut self) -> Result<Vec<(Tok, Pos)>> {
        let mut out = Vec::new();
        loop {
            // skip horizontal whitespace
            while matches!(self.chars.peek(), Some(' ' | '\t' | '\r')) {
                self.bump();
            }
            // comments run to end of line
            if self.chars.peek() == Some(&'#') {
                while !matches!(self.chars.peek(), None | Some('\n')) {
                    self.bump();
                }
            }
            let pos = self.pos();
            let Some(&c) = self.chars.peek() else { break };
            match c {
                '\n' => {
                    self.bump();
                    out.push((Tok::Newline, pos));
                }
                ':' => {
                    self.bump();
                    out.push((Tok::Colon, pos));
                }
                ',' => {
                    self.bump();
                    out.push((Tok::Comma, pos));
                }
                '=' => {
                    self.bump();
                    out.push((Tok::Eq, pos));
                }
                '[' => {
                    self.bump();
                    out.push((Tok::LBracket, pos));
                }
                ']' => {
                    self.bump();
                    out.push((Tok::RBracket, pos));
                }
                '{' => {
                    self.bump();
                    out.push((Tok::LBrace, pos));
                }
                '}' => {
                    self.bump();
                    out.push((Tok::RBrace, pos));
                }
                '_' => {
                    self.bump();
                    if matches!(self.chars.peek(), Some(c) if c.is_alphanumeric() || *c == '_') {
                        return Err(err_at(pos, "names may not start with '_'"));
                    }
                    out.push((Tok::Underscore, pos));
                }
                '"' => {
                    self.bump();
                    out.push((Tok::Str(self.string_body(pos)?), pos));
                }
                c if c.is_ascii_digit() => {
                    let mut text = String::new();
                    while matches!(self.chars.peek(), Some(c) if c.is_ascii_digit() || *c == '.') {
                        text.push(self.bump().unwrap());
                    }
                    let value: f64 = text
                        .parse()
                        .map_err(|_| err_at(pos, format!("bad number {text:?}")))?;
                    out.push((Tok::Num(value), pos));
                }
                c if c.is_ascii_alphabetic() => {
                    let mut name = String::new();
                    while matches!(self.chars.peek(), Some(c) if c.is_ascii_alphanumeric() || *c == '_')
                    {
                        name.push(self.bump().unwrap());
                    }
                    out.push((Tok::Name(name), pos));
                }
                other => {
                    return Err(err_at(pos, format!("unexpected character {other:?}")));
                }
            }
        }
        Ok(out)
    }

    fn string_body(&mut self, start: Pos) -> Result<String> {
        let mut s = String::new();
        loop {
            match self.bump() {
                None | Some('\n') => {
                    return Err(err_at(start, "unterminated string"));
                }
                Some('"') => return Ok(s),
                Some('\\') => match self.bump() {
                    Some('"') => s.push('"'),
                    Some('\\') => s.push('\\'),
                    Some('n') => s.push('\n'),
                    Some('t') => s.push('\t'),
                    Some('r') => s.push('\r'),
                    other => {
                        return Err(err_at(
                            start,
                            format!("unknown escape {:?}", other.unwrap_or('\0')),
                        ))
                    }
                },
                Some(c) => s.push(c),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.toks
            .get(self.at)
            .or_else(|| self.toks.last())
            .map(|&(_, p)| p)
            .unwrap_or(Pos { line: 1, col: 1 })
    }

    fn next(&mut self) -> Option<(Tok, Pos)> {
        let t = self.toks.get(self.at).cloned();
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    fn skip_newlines(&mut self) {
        while self.peek() == Some(&Tok::Newline) {
            self.at += 1;
        }
    }

    fn expect_end_of_statement(&mut self) -> Result<()> {
        match self.next() {
            None | Some((Tok::Newline, _)) => Ok(()),
            Some((_, p)) => Err(err_at(p, "expected end of line")),
        }
    }

    fn document(&mut self) -> Result<ViewsTextDocument> {
        let mut statements = Vec::new();
        loop {
            self.skip_newlines();
            let Some((tok, pos)) = self.next() else { break };
            let Tok::Name(kw) = tok else {
                return Err(err_at(pos, "expected a statement keyword"));
            };
            let stmt = match kw.as_str() {
                "head" => {
                    let name = self.name("headnode name")?;
                    Stmt::Head { name, pos }
                }
                "lit" => {
                    let name = self.name("literal name")?;
                    self.punct(Tok::Eq, "'='")?;
                    let value = self.string("literal value")?;
                    Stmt::Lit { name, value, pos }
                }
                "univ" => {
                    let name = self.name("headnode name")?;
                    let attrs = self.attrlist(true)?;
                    Stmt::Univ { name, attrs, pos }
                }
                "link" => {
                    let owner = self.name("chain owner")?;
                    self.punct(Tok::Colon, "':'")?;
                    let edge = self.reference()?;
                    self.punct(Tok::Comma, "','")?;
                    let dest = self.reference()?;
                    let attrs = self.attrlist(false)?;
                    let subs = self.block(0)?;
                    Stmt::Link {
                        owner,
                        edge,
                        dest,
                        attrs,
                        subs,
                        pos,
                    }
                }
                other => {
                    return Err(err_at(pos, format!("unknown statement {other:?}")));
                }
            };
            statements.push(stmt);
            self.expect_end_of_statement()?;
        }
        Ok(ViewsTextDocument { statements })
    }

    fn name(&mut self, what: &str) -> Result<String> {
        match self.next() {
            Some((Tok::Name(n), _)) => Ok(n),
            Some((_, p)) => Err(err_at(p, format!("expected {what}"))),
            None => Err(err_at(self.pos(), format!("expected {what}"))),
        }
    }

    fn string(&mut self, what: &str) -> Result<String> {
        match self.next() {
            Some((Tok::Str(s), _)) => Ok(s),
            Some((_, p)) => Err(err_at(p, format!("expected {what}"))),
            None => Err(err_at(self.pos(), format!("expected {what}"))),
        }
    }

    fn punct(&mut self, tok: Tok, what: &str) -> Result<()> {
        match self.next() {
            Some((t, _)) if t == tok => Ok(()),
            Some((_, p)) => Err(err_at(p, format!("expected {what}"))),
            None => Err(err_at(self.pos(), format!("expected {what}"))),
        }
    }

    fn reference(&mut self) -> Result<RefAst> {
        match self.next() {
            Some((Tok::Name(n), p)) => Ok(RefAst::Name(n, p)),
            Some((Tok::Str(s), _)) => Ok(RefAst::Str(s)),
            Some((Tok::Underscore, _)) => Ok(RefAst::Null),
            Some((_, p)) => Err(err_at(p, "expected a name, string or '_'")),
            None => Err(err_at(self.pos(), "expected a name, string or '_'")),
        }
    }

    /// `univ_keys` selects which attribute keys are legal here.
    fn attrlist(&mut self, univ_keys: bool) -> Result<Vec<Attr>> {
        if self.peek() != Some(&Tok::LBracket) {
            return Ok(Vec::new());
        }
        self.next();
        let mut attrs = Vec::new();
        loop {
            match self.next() {
                Some((Tok::RBracket, _)) => return Ok(attrs),
                Some((Tok::Name(key), pos)) => {
                    let legal: &[&str] = if univ_keys {
                        &["depth", "activ", "alock"]
                    } else {
                        &["cond1", "slip1", "cond2", "slip2"]
                    };
                    if !legal.contains(&key.as_str()) {
                        return Err(err_at(
                            pos,
                            format!("attribute {key:?} is not valid on this statement"),
                        ));
                    }
                    self.punct(Tok::Eq, "'='")?;
                    let value = match self.next() {
                        Some((Tok::Num(v), _)) => v,
                        Some((_, p)) => return Err(err_at(p, "expected a number")),
                        None => return Err(err_at(self.pos(), "expected a number")),
                    };
                    attrs.push(Attr { key, value, pos });
                }
                Some((_, p)) => return Err(err_at(p, "expected an attribute key or ']'")),
                None => return Err(err_at(self.pos(), "unterminated attribute list")),
            }
        }
    }

    fn block(&mut self, depth: usize) -> Result<Vec<SubStmt>> {
        if self.peek() != Some(&Tok::LBrace) {
            return Ok(Vec::new());
        }
        if depth >= MAX_BLOCK_DEPTH {
            return Err(err_at(self.pos(), "blocks nest too deeply"));
        }
        self.next();
        let mut subs = Vec::new();
        loop {
            self.skip_newlines();
            match self.next() {
                Some((Tok::RBrace, _)) => return Ok(subs),
                Some((Tok::Name(kw), pos)) if kw == "prop1" || kw == "prop2" => {
                    let side = if kw == "prop1" {
                        Side::Edge
                    } else {
                        Side::Dest
                    };
                    self.punct(Tok::Colon, "':'")?;
                    let edge = self.reference()?;
                    self.punct(Tok::Comma, "','")?;
                    let dest = self.reference()?;
                    let attrs = self.attrlist(false)?;
                    let nested = self.block(depth + 1)?;
                    subs.push(SubStmt {
                        side,
                        edge,
                        dest,
                        attrs,
                        subs: nested,
                        pos,
                    });
                    // a sub statement ends at the line break or directly
                    // before the closing brace
                    if self.peek() == Some(&Tok::RBrace) {
                        continue;
                    }
                    match self.next() {
                        Some((Tok::Newline, _)) => {}
                        Some((_, p)) => return Err(err_at(p, "expected end of line")),
                        None => return Err(err_at(self.pos(), "unterminated block")),
                    }
                }
                Some((_, p)) => return Err(err_at(p, "expected 'prop1', 'prop2' or '}'")),
                None => return Err(err_at(self.pos(), "unterminated block")),
            }
        }
    }
}

/// Parse text into its statement list without building a database.
pub fn parse_document(text: &str) -> Result<ViewsTextDocument> {
    let toks = Lexer::new(text).tokens()?;
    Parser { toks, at: 0 }.document()
}

// ---------------------------------------------------------------------------
// Build pass
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Decl {
    Head,
    Lit(String),
}

struct Builder {
    db: ViewsDb,
    symbols: SymbolTable,
    decls: std::collections::BTreeMap<String, Decl>,
}

impl Builder {
    fn head_addr(&mut self, name: &str) -> Result<Addr> {
        if let Some(a) = self.symbols.head(name) {
            return Ok(a);
        }
        let a = self.db.create_headnode()?;
        self.symbols.insert(name, a);
        Ok(a)
    }

    fn resolve(&mut self, r: &RefAst) -> Result<Ref> {
        match r {
            RefAst::Null => Ok(Ref::NULL),
            RefAst::Str(s) => {
                let ix = self.db.literals_mut().intern(s);
                Ref::literal(ix)
            }
            RefAst::Name(name, pos) => match self.decls.get(name.as_str()) {
                Some(Decl::Head) => {
                    let a = self.head_addr(name).map_err(|e| wrap(e, *pos))?;
                    Ref::addr(a)
                }
                Some(Decl::Lit(s)) => {
                    let s = s.clone();
                    let ix = self.db.literals_mut().intern(&s);
                    Ref::literal(ix)
                }
                None => Err(err_at(*pos, format!("unresolved name {name:?}"))),
            },
        }
    }

    fn apply_link_attrs(&mut self, row: Addr, attrs: &[Attr]) -> Result<()> {
        if attrs.is_empty() {
            return Ok(());
        }
        let mut edge = LinkUniversals::default();
        let mut dest = LinkUniversals::default();
        for attr in attrs {
            match attr.key.as_str() {
                "cond1" => edge.conductance = attr.value,
                "slip1" => edge.slip_lock = attr.value != 0.0,
                "cond2" => dest.conductance = attr.value,
                "slip2" => dest.slip_lock = attr.value != 0.0,
                _ => unreachable!("parser admits only link keys"),
            }
        }
        let pos = attrs[0].pos;
        set_link_universals(&mut self.db, row, Side::Edge, &edge)
            .map_err(|e| err_at(pos, e.to_string()))?;
        set_link_universals(&mut self.db, row, Side::Dest, &dest)
            .map_err(|e| err_at(pos, e.to_string()))
    }

    fn build_subs(&mut self, parent: Addr, subs: &[SubStmt]) -> Result<()> {
        for sub in subs {
            let edge = self.resolve(&sub.edge)?;
            let dest = self.resolve(&sub.dest)?;
            let row = self
                .db
                .add_subordinate(parent, sub.side, edge, dest)
                .map_err(|e| err_at(sub.pos, e.to_string()))?;
            self.apply_link_attrs(row, &sub.attrs)?;
            self.build_subs(row, &sub.subs)?;
        }
        Ok(())
    }
}

/// Build a database from a parsed document.
pub fn build(doc: &ViewsTextDocument) -> Result<(ViewsDb, SymbolTable)> {
    // pass 1: declarations
    let mut decls = std::collections::BTreeMap::new();
    for stmt in &doc.statements {
        let (name, decl, pos) = match stmt {
            Stmt::Head { name, pos } => (name, Decl::Head, *pos),
            Stmt::Lit { name, value, pos } => (name, Decl::Lit(value.clone()), *pos),
            _ => continue,
        };
        if let Some(prev) = decls.insert(name.clone(), decl) {
            // re-declaring an identical head is harmless; anything else is not
            if prev != decls[name] || matches!(prev, Decl::Lit(_)) {
                return Err(err_at(pos, format!("duplicate declaration of {name:?}")));
            }
        }
    }

    // pass 2: build in statement order
    let mut b = Builder {
        db: ViewsDb::new(AllocationScheme::Cnsm),
        symbols: SymbolTable::new(),
        decls,
    };
    for stmt in &doc.statements {
        match stmt {
            Stmt::Head { name, pos } => {
                b.head_addr(name).map_err(|e| wrap(e, *pos))?;
            }
            Stmt::Lit { value, .. } => {
                b.db.literals_mut().intern(value);
            }
            Stmt::Univ { name, attrs, pos } => {
                if !matches!(b.decls.get(name.as_str()), Some(Decl::Head)) {
                    return Err(err_at(
                        *pos,
                        format!("univ needs a headnode, {name:?} is not one"),
                    ));
                }
                let h = b.head_addr(name).map_err(|e| wrap(e, *pos))?;
                let mut u = HeadUniversals::default();
                for attr in attrs {
                    match attr.key.as_str() {
                        "depth" => u.conceptual_depth = attr.value,
                        "activ" => u.activ = attr.value,
                        "alock" => u.activ_lock = attr.value != 0.0,
                        _ => unreachable!("parser admits only univ keys"),
                    }
                }
                set_head_universals(&mut b.db, h, &u).map_err(|e| wrap(e, *pos))?;
            }
            Stmt::Link {
                owner,
                edge,
                dest,
                attrs,
                subs,
                pos,
            } => {
                if !matches!(b.decls.get(owner.as_str()), Some(Decl::Head)) {
                    return Err(err_at(
                        *pos,
                        format!("link owner {owner:?} is not a declared headnode"),
                    ));
                }
                let h = b.head_addr(owner).map_err(|e| wrap(e, *pos))?;
                let edge = b.resolve(edge)?;
                let dest = b.resolve(dest)?;
                let row = b.db.add_link(h, edge, dest).map_err(|e| wrap(e, *pos))?;
                b.apply_link_attrs(row, attrs)?;
                b.build_subs(row, subs)?;
            }
        }
    }
    Ok((b.db, b.symbols))
}

fn wrap(e: Error, pos: Pos) -> Error {
    match e {
        Error::Parse { .. } => e,
        other => err_at(pos, other.to_string()),
    }
}

/// Parse text and build the database it describes.
pub fn parse(text: &str) -> Result<(ViewsDb, SymbolTable)> {
    build(&parse_document(text)?)
}
