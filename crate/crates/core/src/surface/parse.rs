use thiserror::Error;

use super::{Expr, ExprKind, Span};
use crate::cc::Const;
use crate::coercion::BlameLabel;
use crate::lattice::{Base, LType, Label, Level, RawType};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at {line}:{col}: {message}")]
pub struct ParseError {
    pub message: String,
    pub offset: usize,
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ParseOptions {
    /// Reject function and arrow types whose PC label is omitted.
    pub strict_pc: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Kw(&'static str),
    Sym(&'static str),
    Eof,
}

const KEYWORDS: &[&str] = &[
    "lam",
    "if",
    "then",
    "else",
    "let",
    "in",
    "ref",
    "true",
    "false",
    "unit",
    "low",
    "high",
    "publish",
    "user-input",
    "Unit",
    "Bool",
    "Ref",
];

const SYMBOLS: &[&str] = &["]->", "-[", "->", ":=", "(", ")", "[", "]", ":", ".", "@", "*", "!", "="];

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, (String, usize)> {
    let bytes = src.as_bytes();
    let mut i = 0;
    let mut out = vec![];
    'outer: while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if src[i..].starts_with("--") {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if src[i..].starts_with("user-input") {
            out.push((Tok::Kw("user-input"), i));
            i += "user-input".len();
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len()
                && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'')
            {
                i += 1;
            }
            let word = &src[start..i];
            match KEYWORDS.iter().find(|k| **k == word) {
                Some(k) => out.push((Tok::Kw(k), start)),
                None => out.push((Tok::Ident(word.to_string()), start)),
            }
            continue;
        }
        for s in SYMBOLS {
            if src[i..].starts_with(s) {
                out.push((Tok::Sym(s), i));
                i += s.len();
                continue 'outer;
            }
        }
        return Err((format!("unexpected character `{c}`"), i));
    }
    out.push((Tok::Eof, src.len()));
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
    pos: usize,
    opts: ParseOptions,
}

type PResult<T> = Result<T, ParseError>;

fn locate(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(offset, |n| offset - n - 1) + 1;
    (line, col)
}

fn error_at(src: &str, offset: usize, message: String) -> ParseError {
    let (line, col) = locate(src, offset);
    ParseError { message, offset, line, col }
}

const P0: BlameLabel = BlameLabel(0);

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn prev_end(&self) -> usize {
        if self.pos == 0 {
            return 0;
        }
        let (t, o) = &self.toks[self.pos - 1];
        o + match t {
            Tok::Ident(s) => s.len(),
            Tok::Kw(s) | Tok::Sym(s) => s.len(),
            Tok::Eof => 0,
        }
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let found = match self.peek() {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Kw(s) | Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        };
        Err(error_at(self.src, self.offset(), format!("{}, found {found}", msg.into())))
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Kw(x) if *x == s)
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.is_sym(s) {
            self.bump();
            Ok(())
        } else {
            self.fail(format!("expected `{s}`"))
        }
    }

    fn expect_kw(&mut self, s: &str) -> PResult<()> {
        if self.is_kw(s) {
            self.bump();
            Ok(())
        } else {
            self.fail(format!("expected `{s}`"))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.fail("expected an identifier"),
        }
    }

    fn label(&mut self) -> PResult<Label> {
        match self.peek() {
            Tok::Kw("low") => {
                self.bump();
                Ok(Label::LOW)
            }
            Tok::Kw("high") => {
                self.bump();
                Ok(Label::HIGH)
            }
            Tok::Sym("*") => {
                self.bump();
                Ok(Label::Star)
            }
            _ => self.fail("expected a label (low, high or *)"),
        }
    }

    fn level(&mut self) -> PResult<Level> {
        let at = self.offset();
        match self.label()? {
            Label::Known(l) => Ok(l),
            Label::Star => Err(error_at(self.src, at, "expected low or high, found `*`".into())),
        }
    }

    fn ltype(&mut self) -> PResult<LType> {
        let raw = self.rawtype()?;
        self.expect_sym("@")?;
        Ok(raw.at(self.label()?))
    }

    fn rawtype(&mut self) -> PResult<RawType> {
        match self.peek() {
            Tok::Kw("Unit") => {
                self.bump();
                Ok(RawType::Base(Base::Unit))
            }
            Tok::Kw("Bool") => {
                self.bump();
                Ok(RawType::Base(Base::Bool))
            }
            Tok::Kw("Ref") => {
                self.bump();
                Ok(RawType::reference(self.ltype()?))
            }
            Tok::Sym("(") => {
                self.bump();
                let dom = self.ltype()?;
                let pc = if self.is_sym("-[") {
                    self.bump();
                    let g = self.label()?;
                    self.expect_sym("]->")?;
                    g
                } else if self.is_sym("->") {
                    if self.opts.strict_pc {
                        return self.fail("arrow type without an explicit PC label");
                    }
                    self.bump();
                    Label::Star
                } else {
                    return self.fail("expected `-[` or `->`");
                };
                let cod = self.ltype()?;
                self.expect_sym(")")?;
                Ok(RawType::fun(dom, pc, cod))
            }
            _ => self.fail("expected a type"),
        }
    }

    fn mk(&self, kind: ExprKind, start: usize) -> Expr {
        Expr { kind, span: Span { start, end: self.prev_end() } }
    }

    fn expr(&mut self) -> PResult<Expr> {
        let start = self.offset();
        match self.peek() {
            Tok::Kw("lam") => {
                self.bump();
                let pc = if self.is_sym("[") {
                    self.bump();
                    let g = self.label()?;
                    self.expect_sym("]")?;
                    g
                } else if self.opts.strict_pc {
                    return self.fail("function without an explicit PC label");
                } else {
                    Label::Star
                };
                self.expect_sym("(")?;
                let var = self.ident()?;
                self.expect_sym(":")?;
                let ann = self.ltype()?;
                self.expect_sym(")")?;
                self.expect_sym(".")?;
                let body = self.expr()?;
                let level = if self.is_sym("@") {
                    self.bump();
                    self.level()?
                } else {
                    Level::Low
                };
                Ok(self.mk(ExprKind::Lam { pc, var, ann, body: Box::new(body), level }, start))
            }
            Tok::Kw("if") => {
                self.bump();
                let cond = self.expr()?;
                self.expect_kw("then")?;
                let thn = self.expr()?;
                self.expect_kw("else")?;
                let els = self.expr()?;
                Ok(self.mk(
                    ExprKind::If { cond: Box::new(cond), thn: Box::new(thn), els: Box::new(els), blame: P0 },
                    start,
                ))
            }
            Tok::Kw("let") => {
                self.bump();
                let var = self.ident()?;
                self.expect_sym("=")?;
                let bound = self.expr()?;
                self.expect_kw("in")?;
                let body = self.expr()?;
                Ok(self.mk(ExprKind::Let { var, bound: Box::new(bound), body: Box::new(body) }, start))
            }
            _ => {
                let lhs = self.app()?;
                if self.is_sym(":=") {
                    self.bump();
                    let rhs = self.expr()?;
                    return Ok(self.mk(ExprKind::Assign { lhs: Box::new(lhs), rhs: Box::new(rhs), blame: P0 }, start));
                }
                Ok(lhs)
            }
        }
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Ident(_) => true,
            Tok::Kw(k) => matches!(*k, "true" | "false" | "unit" | "ref" | "publish" | "user-input"),
            Tok::Sym(s) => matches!(*s, "(" | "!"),
            Tok::Eof => false,
        }
    }

    fn app(&mut self) -> PResult<Expr> {
        let start = self.offset();
        let mut f = self.atom()?;
        while self.starts_atom() {
            let a = self.atom()?;
            f = self.mk(ExprKind::App { fun: Box::new(f), arg: Box::new(a), blame: P0 }, start);
        }
        Ok(f)
    }

    fn atom(&mut self) -> PResult<Expr> {
        let start = self.offset();
        match self.peek().clone() {
            Tok::Ident(x) => {
                self.bump();
                Ok(self.mk(ExprKind::Var(x), start))
            }
            Tok::Kw("user-input") => {
                self.bump();
                Ok(self.mk(ExprKind::Var(super::INPUT.to_string()), start))
            }
            Tok::Kw(k @ ("true" | "false" | "unit")) => {
                self.bump();
                let c = match k {
                    "true" => Const::Bool(true),
                    "false" => Const::Bool(false),
                    _ => Const::Unit,
                };
                let level = if self.is_sym("@") {
                    self.bump();
                    self.level()?
                } else {
                    Level::Low
                };
                Ok(self.mk(ExprKind::Const(c, level), start))
            }
            Tok::Kw("ref") => {
                self.bump();
                let level = self.level()?;
                let init = self.atom()?;
                Ok(self.mk(ExprKind::Ref { level, init: Box::new(init), blame: P0 }, start))
            }
            Tok::Kw("publish") => {
                self.bump();
                let e = self.atom()?;
                Ok(self.mk(ExprKind::Ann { e: Box::new(e), ty: LType::bool(Level::Low), blame: P0 }, start))
            }
            Tok::Sym("!") => {
                self.bump();
                let r = self.atom()?;
                Ok(self.mk(ExprKind::Deref { r: Box::new(r), blame: P0 }, start))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                if self.is_sym(":") {
                    self.bump();
                    let ty = self.ltype()?;
                    self.expect_sym(")")?;
                    return Ok(self.mk(ExprKind::Ann { e: Box::new(e), ty, blame: P0 }, start));
                }
                self.expect_sym(")")?;
                Ok(e)
            }
            _ => self.fail("expected a term"),
        }
    }
}

fn parser(src: &str, opts: ParseOptions) -> PResult<Parser<'_>> {
    let toks = lex(src).map_err(|(m, o)| error_at(src, o, m))?;
    Ok(Parser { src, toks, pos: 0, opts })
}

/// Parses a whole program and numbers its blame labels.
pub fn parse_program(src: &str, opts: ParseOptions) -> Result<Expr, ParseError> {
    let mut p = parser(src, opts)?;
    let mut e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return p.fail("expected end of input");
    }
    e.number_blame();
    Ok(e)
}

/// Parses a labeled type such as `(Bool@high -[low]-> Bool@low)@low`.
pub fn parse_type(src: &str) -> Result<LType, ParseError> {
    let mut p = parser(src, ParseOptions::default())?;
    let t = p.ltype()?;
    if *p.peek() != Tok::Eof {
        return p.fail("expected end of input");
    }
    Ok(t)
}
