//! Surface syntax: tokens, commands, declarations and morphism expressions.
//!
//! Identifiers are runs of letters, digits, `'` and `_` (so `0`, `s`, `in1`
//! and `dyn'` are identifiers) or runs of `!`. Composition is written `.`
//! and is flattened while parsing; `id` is the identity.

use std::fmt;

use thiserror::Error;

use crate::env::{Component, Environment, ObjectDecl, Side};
use crate::expr::{Atom, Expr};
use crate::fexpr::FExpr;
use crate::Name;

/// A syntax error with a 1-based position inside the command text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at line {line}, column {col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Colon,
    Arrow,
    Equals,
    Semi,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Equals => f.write_str("`=`"),
            Tok::Semi => f.write_str("`;`"),
        }
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\'' || c == '_'
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let (line, col) = (li + 1, i + 1);
            let single = match c {
                '(' => Some(Tok::LParen),
                ')' => Some(Tok::RParen),
                ',' => Some(Tok::Comma),
                '.' => Some(Tok::Dot),
                ':' => Some(Tok::Colon),
                '=' => Some(Tok::Equals),
                ';' => Some(Tok::Semi),
                _ => None,
            };
            if c.is_whitespace() {
                i += 1;
            } else if let Some(tok) = single {
                out.push(Spanned { tok, line, col });
                i += 1;
            } else if c == '-' && chars.get(i + 1) == Some(&'>') {
                out.push(Spanned {
                    tok: Tok::Arrow,
                    line,
                    col,
                });
                i += 2;
            } else if c == '!' || is_ident_char(c) {
                let start = i;
                let same = |d: char| if c == '!' { d == '!' } else { is_ident_char(d) };
                while i < chars.len() && same(chars[i]) {
                    i += 1;
                }
                out.push(Spanned {
                    tok: Tok::Ident(chars[start..i].iter().collect()),
                    line,
                    col,
                });
            } else {
                return Err(ParseError {
                    line,
                    col,
                    message: format!("unexpected character `{c}`"),
                });
            }
        }
    }
    Ok(out)
}

/// A morphism expression before name resolution, with composition flattened.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SExpr(pub Vec<STerm>);

/// One factor of an [`SExpr`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct STerm {
    pub name: String,
    pub args: Option<Vec<SExpr>>,
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("id");
        }
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            f.write_str(&t.name)?;
            if let Some(args) = &t.args {
                f.write_str("(")?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")?;
            }
        }
        Ok(())
    }
}

/// An interpreter command.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Command {
    /// Opens a multi-line buffer terminated by `;`.
    Edit,
    Declare(ObjectDecl),
    Let {
        name: String,
        expr: SExpr,
    },
    Show(SExpr),
    Simp {
        expr: SExpr,
        full: bool,
    },
    Set {
        option: String,
        value: bool,
    },
    Quit,
    Load(String),
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn new(text: &str) -> Result<Parser, ParseError> {
        let toks = lex(text)?;
        let lines: Vec<&str> = text.lines().collect();
        let end = (
            lines.len().max(1),
            lines.last().map_or(0, |l| l.chars().count()) + 1,
        );
        Ok(Parser { toks, pos: 0, end })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map_or(self.end, |s| (s.line, s.col))
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError {
            line,
            col,
            message: message.into(),
        })
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T, ParseError> {
        match self.peek() {
            Some(t) => self.error(format!("expected {wanted}, found {t}")),
            None => self.error(format!("expected {wanted}, found end of input")),
        }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.unexpected(&t.to_string())
        }
    }

    fn is_keyword(&self, k: usize, word: &str) -> bool {
        matches!(self.peek_at(k), Some(Tok::Ident(s)) if s == word)
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.unexpected(what),
        }
    }

    fn keyword(&mut self, word: &str) -> Result<(), ParseError> {
        if self.is_keyword(0, word) {
            self.pos += 1;
            Ok(())
        } else {
            self.unexpected(&format!("`{word}`"))
        }
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        self.eat(&Tok::Semi);
        if self.pos < self.toks.len() {
            return self.unexpected("end of command");
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<SExpr, ParseError> {
        let mut terms = Vec::new();
        loop {
            self.factor(&mut terms)?;
            if !self.eat(&Tok::Dot) {
                return Ok(SExpr(terms));
            }
        }
    }

    fn factor(&mut self, terms: &mut Vec<STerm>) -> Result<(), ParseError> {
        if self.eat(&Tok::LParen) {
            let inner = self.expr()?;
            self.expect(Tok::RParen)?;
            terms.extend(inner.0);
            return Ok(());
        }
        let (line, col) = self.here();
        let name = self.ident("an expression")?;
        if name == "id" {
            return Ok(());
        }
        let args = if self.eat(&Tok::LParen) {
            let mut args = vec![self.expr()?];
            while self.eat(&Tok::Comma) {
                args.push(self.expr()?);
            }
            self.expect(Tok::RParen)?;
            Some(args)
        } else {
            None
        };
        terms.push(STerm {
            name,
            args,
            line,
            col,
        });
        Ok(())
    }

    fn fexpr(&mut self) -> Result<FExpr, ParseError> {
        let name = self.ident("an object expression")?;
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) {
            args.push(self.fexpr()?);
            while self.eat(&Tok::Comma) {
                args.push(self.fexpr()?);
            }
            self.expect(Tok::RParen)?;
        }
        Ok(FExpr::App(Name::from(name.as_str()), args))
    }

    fn declaration(&mut self) -> Result<ObjectDecl, ParseError> {
        let side = match self.ident("`left` or `right`")?.as_str() {
            "left" => Side::Left,
            "right" => Side::Right,
            _ => {
                self.pos -= 1;
                return self.unexpected("`left` or `right`");
            }
        };
        self.keyword("object")?;
        let name = self.ident("an object name")?;
        let mut params = Vec::new();
        if self.eat(&Tok::LParen) {
            params.push(Name::from(self.ident("a parameter name")?.as_str()));
            while self.eat(&Tok::Comma) {
                params.push(Name::from(self.ident("a parameter name")?.as_str()));
            }
            self.expect(Tok::RParen)?;
        }
        self.keyword("with")?;
        let factorizer = self.ident("a factorizer name")?;
        if self.is_keyword(0, "is") && self.peek_at(1) != Some(&Tok::Colon) {
            self.pos += 1;
        }
        let mut components = Vec::new();
        while !(self.is_keyword(0, "end") && self.is_keyword(1, "object")) {
            let cname = self.ident("a component name or `end object`")?;
            self.expect(Tok::Colon)?;
            let dom = self.fexpr()?;
            self.expect(Tok::Arrow)?;
            let cod = self.fexpr()?;
            components.push(Component {
                name: Name::from(cname.as_str()),
                dom,
                cod,
            });
        }
        self.pos += 2;
        Ok(ObjectDecl {
            side,
            name: Name::from(name.as_str()),
            params,
            factorizer: Name::from(factorizer.as_str()),
            components,
        })
    }
}

/// Parses one morphism expression.
pub fn parse_expr(text: &str) -> Result<SExpr, ParseError> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

/// Parses one object declaration.
pub fn parse_declaration(text: &str) -> Result<ObjectDecl, ParseError> {
    let mut p = Parser::new(text)?;
    let d = p.declaration()?;
    p.finish()?;
    Ok(d)
}

/// Parses a command. The text may span several lines (an edit buffer without
/// its terminating `;`, or with it).
pub fn parse_command(text: &str) -> Result<Command, ParseError> {
    let trimmed = text.trim_start();
    let word: String = trimmed.chars().take_while(|c| is_ident_char(*c)).collect();
    if word == "load" {
        let path = trimmed[4..].trim().trim_end_matches(';').trim();
        if path.is_empty() {
            let mut p = Parser::new(text)?;
            p.pos = p.toks.len();
            return p.error("expected a file name after `load`");
        }
        return Ok(Command::Load(path.to_string()));
    }
    let mut p = Parser::new(text)?;
    let cmd = match word.as_str() {
        "left" | "right" => Command::Declare(p.declaration()?),
        "edit" => {
            p.pos += 1;
            Command::Edit
        }
        "quit" | "exit" => {
            p.pos += 1;
            Command::Quit
        }
        "let" => {
            p.pos += 1;
            let name = p.ident("a name")?;
            p.expect(Tok::Equals)?;
            Command::Let {
                name,
                expr: p.expr()?,
            }
        }
        "show" => {
            p.pos += 1;
            Command::Show(p.expr()?)
        }
        "simp" => {
            p.pos += 1;
            let full = p.is_keyword(0, "full")
                && p.peek_at(1)
                    .is_some_and(|t| !matches!(t, Tok::Dot | Tok::LParen));
            if full {
                p.pos += 1;
            }
            Command::Simp {
                expr: p.expr()?,
                full,
            }
        }
        "set" => {
            p.pos += 1;
            let option = p.ident("an option name")?;
            let value = match p.ident("`on` or `off`")?.as_str() {
                "on" => true,
                "off" => false,
                _ => {
                    p.pos -= 1;
                    return p.unexpected("`on` or `off`");
                }
            };
            Command::Set { option, value }
        }
        _ => return p.unexpected("a command (edit, let, show, simp, set, load, quit)"),
    };
    p.finish()?;
    Ok(cmd)
}

/// A name that cannot be turned into an expression.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResolveError {
    #[error("unknown name `{name}` at line {line}, column {col}")]
    Unknown {
        name: String,
        line: usize,
        col: usize,
    },
    #[error("`{name}` at line {line}, column {col} takes {expected} argument(s), given {got}")]
    Arity {
        name: String,
        expected: usize,
        got: usize,
        line: usize,
        col: usize,
    },
    #[error("`it` is not bound yet; run `simp` first")]
    NoResult,
}

/// Resolves names against the environment, inlining `let` bindings and `it`.
pub fn resolve(e: &SExpr, env: &Environment, it: Option<&Expr>) -> Result<Expr, ResolveError> {
    let mut atoms = Vec::new();
    for t in &e.0 {
        let args = t
            .args
            .as_ref()
            .map(|xs| {
                xs.iter()
                    .map(|x| resolve(x, env, it))
                    .collect::<Result<Vec<_>, _>>()
            })
            .transpose()?;
        let arity_error = |expected: usize, got: usize| ResolveError::Arity {
            name: t.name.clone(),
            expected,
            got,
            line: t.line,
            col: t.col,
        };
        let given = args.as_ref().map_or(0, Vec::len);
        let name = t.name.as_str();
        if let Some(o) = env.factorizer(name) {
            if given != o.components.len() {
                return Err(arity_error(o.components.len(), given));
            }
            atoms.push(Atom::Fact(
                o.factorizer.clone(),
                args.unwrap_or_default().into(),
            ));
        } else if let Some(o) = env.object(name) {
            if given != o.arity() {
                return Err(arity_error(o.arity(), given));
            }
            atoms.push(Atom::Func(o.name.clone(), args.unwrap_or_default().into()));
        } else if args.is_some()
            && (env.natural(name).is_some() || env.let_binding(name).is_some() || name == "it")
        {
            return Err(arity_error(0, given));
        } else if let Some((o, j)) = env.natural(name) {
            atoms.push(Atom::Nat(o.components[j].name.clone()));
        } else if let Some(b) = env.let_binding(name) {
            atoms.extend(b.expr.atoms().iter().cloned());
        } else if name == "it" {
            atoms.extend(it.ok_or(ResolveError::NoResult)?.atoms().iter().cloned());
        } else {
            return Err(ResolveError::Unknown {
                name: t.name.clone(),
                line: t.line,
                col: t.col,
            });
        }
    }
    Ok(Expr::from_atoms(atoms))
}
