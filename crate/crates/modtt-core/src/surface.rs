//! The surface language: SML-flavored modules over the core calculus.
//!
//! Files hold signature, structure, and functor declarations. Structures
//! are field lists of type and value definitions; signatures are field
//! lists of type and value specifications, refinable with `where type`.
//! Program expressions include the monadic `bind`, `ret`, `throw`,
//! conditionals, and list case analysis.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use crate::check::Span;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub span: Span,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SPath {
    pub parts: Vec<String>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum STy {
    Bool,
    Path(SPath),
    List(Box<STy>),
    Prod(Box<STy>, Box<STy>),
    Arrow(Box<STy>, Box<STy>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SSpec {
    /// `type t`
    TypeAbs(String, Span),
    /// `type t = τ`
    TypeEq(String, STy, Span),
    /// `val x : τ`
    Val(String, STy, Span),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SSig {
    Named(String, Span),
    Body(Vec<SSpec>, Span),
    WhereType(Box<SSig>, SPath, STy, Span),
    /// `(X : S1) -> S2`, a generative functor signature.
    Arrow(String, Box<SSig>, Box<SSig>, Span),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SPat {
    Var(String),
    Tuple(Box<SPat>, Box<SPat>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SExpr {
    Path(SPath),
    Tt(Span),
    Ff(Span),
    Nil(Span),
    Throw(Span),
    Pair(Box<SExpr>, Box<SExpr>, Span),
    Cons(Box<SExpr>, Box<SExpr>, Span),
    App(Box<SExpr>, Box<SExpr>, Span),
    Struct(Vec<SMember>, Span),
    Ret(Box<SExpr>, Span),
    Bind {
        name: String,
        rhs: Box<SExpr>,
        body: Box<SExpr>,
        span: Span,
    },
    Let {
        name: String,
        opaque: bool,
        sig: Option<SSig>,
        rhs: Box<SExpr>,
        body: Box<SExpr>,
        span: Span,
    },
    If(Box<SExpr>, Box<SExpr>, Box<SExpr>, Span),
    Case {
        scrut: Box<SExpr>,
        nil_arm: Box<SExpr>,
        head: String,
        tail: String,
        cons_arm: Box<SExpr>,
        span: Span,
    },
    /// From `fun f pat = e`; anonymous partial functions.
    Fn {
        pat: SPat,
        body: Box<SExpr>,
        span: Span,
    },
}

impl SExpr {
    pub fn span(&self) -> Span {
        match self {
            SExpr::Path(p) => p.span,
            SExpr::Tt(s)
            | SExpr::Ff(s)
            | SExpr::Nil(s)
            | SExpr::Throw(s)
            | SExpr::Pair(_, _, s)
            | SExpr::Cons(_, _, s)
            | SExpr::App(_, _, s)
            | SExpr::Struct(_, s)
            | SExpr::Ret(_, s)
            | SExpr::If(_, _, _, s)
            | SExpr::Fn { span: s, .. }
            | SExpr::Bind { span: s, .. }
            | SExpr::Let { span: s, .. }
            | SExpr::Case { span: s, .. } => *s,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SMember {
    /// `type t = τ`
    TypeDef(String, STy, Span),
    /// `val x = e`
    ValDef(String, SExpr, Span),
    /// `fun f pat = e`
    FunDef(String, SPat, SExpr, Span),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SDecl {
    Signature(String, SSig, Span),
    Structure {
        name: String,
        /// `(sig, opaque)`: `:` is transparent, `:>` opaque.
        ascription: Option<(SSig, bool)>,
        body: SExpr,
        span: Span,
    },
    Functor {
        name: String,
        params: Vec<(String, SSig)>,
        result: Option<(SSig, bool)>,
        body: SExpr,
        span: Span,
    },
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    // keywords
    KwSignature,
    KwStructure,
    KwFunctor,
    KwSig,
    KwStruct,
    KwEnd,
    KwType,
    KwVal,
    KwFun,
    KwWhere,
    KwLet,
    KwIn,
    KwBind,
    KwRet,
    KwCase,
    KwOf,
    KwThrow,
    KwIf,
    KwThen,
    KwElse,
    KwNil,
    // symbols
    Eq,
    Colon,
    ColonGt,
    LParen,
    RParen,
    Star,
    Arrow,
    LArrow,
    ColonColon,
    FatArrow,
    Dot,
    Comma,
    Bar,
}

#[derive(Clone, Debug)]
struct SpannedTok {
    tok: Tok,
    span: Span,
}

fn keyword(s: &str) -> Option<Tok> {
    Some(match s {
        "signature" => Tok::KwSignature,
        "structure" => Tok::KwStructure,
        "functor" => Tok::KwFunctor,
        "sig" => Tok::KwSig,
        "struct" => Tok::KwStruct,
        "end" => Tok::KwEnd,
        "type" => Tok::KwType,
        "val" => Tok::KwVal,
        "fun" => Tok::KwFun,
        "where" => Tok::KwWhere,
        "let" => Tok::KwLet,
        "in" => Tok::KwIn,
        "bind" => Tok::KwBind,
        "ret" => Tok::KwRet,
        "case" => Tok::KwCase,
        "of" => Tok::KwOf,
        "throw" => Tok::KwThrow,
        "if" => Tok::KwIf,
        "then" => Tok::KwThen,
        "else" => Tok::KwElse,
        "nil" => Tok::KwNil,
        _ => return None,
    })
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Lexer<'a> {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn span(&self) -> Span {
        Span {
            line: self.line,
            col: self.col,
        }
    }

    fn bump(&mut self) -> u8 {
        let c = self.src[self.pos];
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        c
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<u8> {
        self.src.get(self.pos + 1).copied()
    }

    fn err(&self, message: &str) -> ParseError {
        ParseError {
            span: self.span(),
            message: String::from(message),
        }
    }

    fn tokens(mut self) -> Result<Vec<SpannedTok>, ParseError> {
        let mut out = Vec::new();
        loop {
            // whitespace and (* comments *), which nest
            loop {
                match self.peek() {
                    Some(c) if c.is_ascii_whitespace() => {
                        self.bump();
                    }
                    Some(b'(') if self.peek2() == Some(b'*') => {
                        let open = self.span();
                        self.bump();
                        self.bump();
                        let mut depth = 1usize;
                        while depth > 0 {
                            match self.peek() {
                                None => {
                                    return Err(ParseError {
                                        span: open,
                                        message: String::from("unterminated comment"),
                                    })
                                }
                                Some(b'(') if self.peek2() == Some(b'*') => {
                                    self.bump();
                                    self.bump();
                                    depth += 1;
                                }
                                Some(b'*') if self.peek2() == Some(b')') => {
                                    self.bump();
                                    self.bump();
                                    depth -= 1;
                                }
                                Some(_) => {
                                    self.bump();
                                }
                            }
                        }
                    }
                    _ => break,
                }
            }
            let span = self.span();
            let c = match self.peek() {
                None => return Ok(out),
                Some(c) => c,
            };
            let tok = match c {
                b'(' => {
                    self.bump();
                    Tok::LParen
                }
                b')' => {
                    self.bump();
                    Tok::RParen
                }
                b'*' => {
                    self.bump();
                    Tok::Star
                }
                b',' => {
                    self.bump();
                    Tok::Comma
                }
                b'.' => {
                    self.bump();
                    Tok::Dot
                }
                b'|' => {
                    self.bump();
                    Tok::Bar
                }
                b'=' => {
                    self.bump();
                    if self.peek() == Some(b'>') {
                        self.bump();
                        Tok::FatArrow
                    } else {
                        Tok::Eq
                    }
                }
                b':' => {
                    self.bump();
                    match self.peek() {
                        Some(b'>') => {
                            self.bump();
                            Tok::ColonGt
                        }
                        Some(b':') => {
                            self.bump();
                            Tok::ColonColon
                        }
                        _ => Tok::Colon,
                    }
                }
                b'-' => {
                    self.bump();
                    if self.peek() == Some(b'>') {
                        self.bump();
                        Tok::Arrow
                    } else {
                        return Err(self.err("expected '->'"));
                    }
                }
                b'<' => {
                    self.bump();
                    if self.peek() == Some(b'-') {
                        self.bump();
                        Tok::LArrow
                    } else {
                        return Err(self.err("expected '<-'"));
                    }
                }
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    let start = self.pos;
                    while let Some(c) = self.peek() {
                        if c.is_ascii_alphanumeric() || c == b'_' || c == b'\'' {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    let text = core::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    match keyword(text) {
                        Some(kw) => kw,
                        None => Tok::Ident(String::from(text)),
                    }
                }
                _ => return Err(self.err("unexpected character")),
            };
            out.push(SpannedTok { tok, span });
        }
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser {
    toks: Vec<SpannedTok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_span(&self) -> Span {
        self.toks.get(self.pos).map(|t| t.span).unwrap_or_else(|| {
            self.toks
                .last()
                .map(|t| t.span)
                .unwrap_or(Span { line: 1, col: 1 })
        })
    }

    fn at(&self, tok: &Tok) -> bool {
        self.peek() == Some(tok)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: Tok, what: &str) -> Result<Span, ParseError> {
        let span = self.peek_span();
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(span)
        } else {
            Err(ParseError {
                span,
                message: alloc::format!("expected {}", what),
            })
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Span), ParseError> {
        let span = self.peek_span();
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok((s, span))
            }
            _ => Err(ParseError {
                span,
                message: alloc::format!("expected {}", what),
            }),
        }
    }

    fn err(&self, message: &str) -> ParseError {
        ParseError {
            span: self.peek_span(),
            message: String::from(message),
        }
    }

    // ---- types ----

    fn ty(&mut self) -> Result<STy, ParseError> {
        let lhs = self.ty_prod()?;
        if self.at(&Tok::Arrow) {
            self.bump();
            let rhs = self.ty()?;
            Ok(STy::Arrow(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn ty_prod(&mut self) -> Result<STy, ParseError> {
        let lhs = self.ty_postfix()?;
        if self.at(&Tok::Star) {
            self.bump();
            let rhs = self.ty_prod()?;
            Ok(STy::Prod(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn ty_postfix(&mut self) -> Result<STy, ParseError> {
        let mut t = self.ty_atom()?;
        // `τ list`, possibly iterated
        while matches!(self.peek(), Some(Tok::Ident(s)) if s == "list") {
            self.bump();
            t = STy::List(Box::new(t));
        }
        Ok(t)
    }

    fn ty_atom(&mut self) -> Result<STy, ParseError> {
        match self.peek() {
            Some(Tok::LParen) => {
                self.bump();
                let t = self.ty()?;
                self.eat(Tok::RParen, "')'")?;
                Ok(t)
            }
            Some(Tok::Ident(s)) if s == "bool" => {
                self.bump();
                Ok(STy::Bool)
            }
            Some(Tok::Ident(_)) => Ok(STy::Path(self.path()?)),
            _ => Err(self.err("expected a type")),
        }
    }

    fn path(&mut self) -> Result<SPath, ParseError> {
        let (first, span) = self.ident("a name")?;
        let mut parts = alloc::vec![first];
        while self.at(&Tok::Dot) {
            self.bump();
            let (next, _) = self.ident("a field name")?;
            parts.push(next);
        }
        Ok(SPath { parts, span })
    }

    // ---- signatures ----

    fn sigexp(&mut self) -> Result<SSig, ParseError> {
        let span = self.peek_span();
        // `(X : S1) -> S2`
        if self.at(&Tok::LParen) {
            // lookahead for `ident :`
            if let (Some(Tok::Ident(_)), Some(Tok::Colon)) = (
                self.toks.get(self.pos + 1).map(|t| &t.tok),
                self.toks.get(self.pos + 2).map(|t| &t.tok),
            ) {
                self.bump();
                let (param, _) = self.ident("a parameter name")?;
                self.eat(Tok::Colon, "':'")?;
                let dom = self.sigexp()?;
                self.eat(Tok::RParen, "')'")?;
                self.eat(Tok::Arrow, "'->'")?;
                let cod = self.sigexp()?;
                return Ok(SSig::Arrow(param, Box::new(dom), Box::new(cod), span));
            }
        }
        let mut base = self.sig_atom()?;
        // `where type p = τ`, possibly iterated
        while self.at(&Tok::KwWhere) {
            self.bump();
            self.eat(Tok::KwType, "'type'")?;
            let p = self.path()?;
            self.eat(Tok::Eq, "'='")?;
            let t = self.ty()?;
            base = SSig::WhereType(Box::new(base), p, t, span);
        }
        Ok(base)
    }

    fn sig_atom(&mut self) -> Result<SSig, ParseError> {
        let span = self.peek_span();
        match self.peek() {
            Some(Tok::KwSig) => {
                self.bump();
                let mut specs = Vec::new();
                while !self.at(&Tok::KwEnd) {
                    specs.push(self.spec()?);
                }
                self.eat(Tok::KwEnd, "'end'")?;
                Ok(SSig::Body(specs, span))
            }
            Some(Tok::Ident(_)) => {
                let (name, span) = self.ident("a signature name")?;
                Ok(SSig::Named(name, span))
            }
            Some(Tok::LParen) => {
                self.bump();
                let s = self.sigexp()?;
                self.eat(Tok::RParen, "')'")?;
                Ok(s)
            }
            _ => Err(self.err("expected a signature")),
        }
    }

    fn spec(&mut self) -> Result<SSpec, ParseError> {
        let span = self.peek_span();
        match self.peek() {
            Some(Tok::KwType) => {
                self.bump();
                let (name, _) = self.ident("a type name")?;
                if self.at(&Tok::Eq) {
                    self.bump();
                    let t = self.ty()?;
                    Ok(SSpec::TypeEq(name, t, span))
                } else {
                    Ok(SSpec::TypeAbs(name, span))
                }
            }
            Some(Tok::KwVal) => {
                self.bump();
                let (name, _) = self.ident("a value name")?;
                self.eat(Tok::Colon, "':'")?;
                let t = self.ty()?;
                Ok(SSpec::Val(name, t, span))
            }
            _ => Err(self.err("expected 'type' or 'val' in signature body")),
        }
    }

    // ---- expressions ----

    fn expr(&mut self) -> Result<SExpr, ParseError> {
        let span = self.peek_span();
        match self.peek() {
            Some(Tok::KwBind) => {
                self.bump();
                // optional `val` as in `bind val x ← e in m`
                if self.at(&Tok::KwVal) {
                    self.bump();
                }
                let (name, _) = self.ident("a binder name")?;
                self.eat(Tok::LArrow, "'<-'")?;
                let rhs = self.expr()?;
                self.eat(Tok::KwIn, "'in'")?;
                let body = self.expr()?;
                Ok(SExpr::Bind {
                    name,
                    rhs: Box::new(rhs),
                    body: Box::new(body),
                    span,
                })
            }
            Some(Tok::KwLet) => {
                self.bump();
                let (name, _) = self.ident("a binder name")?;
                let (sig, opaque) = match self.peek() {
                    Some(Tok::Colon) => {
                        self.bump();
                        (Some(self.sigexp()?), false)
                    }
                    Some(Tok::ColonGt) => {
                        self.bump();
                        (Some(self.sigexp()?), true)
                    }
                    _ => (None, false),
                };
                self.eat(Tok::Eq, "'='")?;
                let rhs = self.expr()?;
                self.eat(Tok::KwIn, "'in'")?;
                let body = self.expr()?;
                Ok(SExpr::Let {
                    name,
                    opaque,
                    sig,
                    rhs: Box::new(rhs),
                    body: Box::new(body),
                    span,
                })
            }
            Some(Tok::KwRet) => {
                self.bump();
                let e = self.expr_cons()?;
                Ok(SExpr::Ret(Box::new(e), span))
            }
            Some(Tok::KwThrow) => {
                self.bump();
                Ok(SExpr::Throw(span))
            }
            Some(Tok::KwIf) => {
                self.bump();
                let c = self.expr_cons()?;
                self.eat(Tok::KwThen, "'then'")?;
                let t = self.expr()?;
                self.eat(Tok::KwElse, "'else'")?;
                let e = self.expr()?;
                Ok(SExpr::If(Box::new(c), Box::new(t), Box::new(e), span))
            }
            Some(Tok::KwCase) => {
                self.bump();
                let scrut = self.expr_cons()?;
                self.eat(Tok::KwOf, "'of'")?;
                if self.at(&Tok::Bar) {
                    self.bump();
                }
                self.eat(Tok::KwNil, "'nil'")?;
                self.eat(Tok::FatArrow, "'=>'")?;
                let nil_arm = self.expr()?;
                self.eat(Tok::Bar, "'|'")?;
                let (head, _) = self.ident("a head binder")?;
                self.eat(Tok::ColonColon, "'::'")?;
                let (tail, _) = self.ident("a tail binder")?;
                self.eat(Tok::FatArrow, "'=>'")?;
                let cons_arm = self.expr()?;
                Ok(SExpr::Case {
                    scrut: Box::new(scrut),
                    nil_arm: Box::new(nil_arm),
                    head,
                    tail,
                    cons_arm: Box::new(cons_arm),
                    span,
                })
            }
            _ => self.expr_cons(),
        }
    }

    fn expr_cons(&mut self) -> Result<SExpr, ParseError> {
        let span = self.peek_span();
        let lhs = self.expr_app()?;
        if self.at(&Tok::ColonColon) {
            self.bump();
            let rhs = self.expr_cons()?;
            Ok(SExpr::Cons(Box::new(lhs), Box::new(rhs), span))
        } else {
            Ok(lhs)
        }
    }

    fn expr_app(&mut self) -> Result<SExpr, ParseError> {
        let span = self.peek_span();
        let mut head = self.expr_atom()?;
        // `tt`/`ff` are idents here; keywords that start a new construct
        // never begin an atom.
        while matches!(
            self.peek(),
            Some(Tok::LParen) | Some(Tok::Ident(_)) | Some(Tok::KwNil)
        ) {
            let arg = self.expr_atom()?;
            head = SExpr::App(Box::new(head), Box::new(arg), span);
        }
        Ok(head)
    }

    fn expr_atom(&mut self) -> Result<SExpr, ParseError> {
        let span = self.peek_span();
        match self.peek() {
            Some(Tok::KwNil) => {
                self.bump();
                Ok(SExpr::Nil(span))
            }
            Some(Tok::KwStruct) => {
                self.bump();
                let mut members = Vec::new();
                while !self.at(&Tok::KwEnd) {
                    members.push(self.member()?);
                }
                self.eat(Tok::KwEnd, "'end'")?;
                Ok(SExpr::Struct(members, span))
            }
            Some(Tok::Ident(s)) if s == "tt" => {
                self.bump();
                Ok(SExpr::Tt(span))
            }
            Some(Tok::Ident(s)) if s == "ff" => {
                self.bump();
                Ok(SExpr::Ff(span))
            }
            Some(Tok::Ident(_)) => Ok(SExpr::Path(self.path()?)),
            Some(Tok::LParen) => {
                self.bump();
                let first = self.expr()?;
                if self.at(&Tok::Comma) {
                    let mut items = alloc::vec![first];
                    while self.at(&Tok::Comma) {
                        self.bump();
                        items.push(self.expr()?);
                    }
                    self.eat(Tok::RParen, "')'")?;
                    // (a, b, c) associates as (a, (b, c)).
                    let mut it = items.into_iter().rev();
                    let mut acc = it.next().unwrap();
                    for item in it {
                        acc = SExpr::Pair(Box::new(item), Box::new(acc), span);
                    }
                    Ok(acc)
                } else {
                    self.eat(Tok::RParen, "')'")?;
                    Ok(first)
                }
            }
            _ => Err(self.err("expected an expression")),
        }
    }

    fn pat(&mut self) -> Result<SPat, ParseError> {
        match self.peek() {
            Some(Tok::Ident(_)) => {
                let (name, _) = self.ident("a pattern variable")?;
                Ok(SPat::Var(name))
            }
            Some(Tok::LParen) => {
                self.bump();
                let first = self.pat()?;
                if self.at(&Tok::Comma) {
                    let mut items = alloc::vec![first];
                    while self.at(&Tok::Comma) {
                        self.bump();
                        items.push(self.pat()?);
                    }
                    self.eat(Tok::RParen, "')'")?;
                    let mut it = items.into_iter().rev();
                    let mut acc = it.next().unwrap();
                    for item in it {
                        acc = SPat::Tuple(Box::new(item), Box::new(acc));
                    }
                    Ok(acc)
                } else {
                    self.eat(Tok::RParen, "')'")?;
                    Ok(first)
                }
            }
            _ => Err(self.err("expected a pattern")),
        }
    }

    fn member(&mut self) -> Result<SMember, ParseError> {
        let span = self.peek_span();
        match self.peek() {
            Some(Tok::KwType) => {
                self.bump();
                let (name, _) = self.ident("a type name")?;
                self.eat(Tok::Eq, "'='")?;
                let t = self.ty()?;
                Ok(SMember::TypeDef(name, t, span))
            }
            Some(Tok::KwVal) => {
                self.bump();
                let (name, _) = self.ident("a value name")?;
                self.eat(Tok::Eq, "'='")?;
                let e = self.expr()?;
                Ok(SMember::ValDef(name, e, span))
            }
            Some(Tok::KwFun) => {
                self.bump();
                let (name, _) = self.ident("a function name")?;
                let pat = self.pat()?;
                self.eat(Tok::Eq, "'='")?;
                let e = self.expr()?;
                Ok(SMember::FunDef(name, pat, e, span))
            }
            _ => Err(self.err("expected 'type', 'val', or 'fun' in structure body")),
        }
    }

    // ---- declarations ----

    fn decl(&mut self) -> Result<SDecl, ParseError> {
        let span = self.peek_span();
        match self.peek() {
            Some(Tok::KwSignature) => {
                self.bump();
                let (name, _) = self.ident("a signature name")?;
                self.eat(Tok::Eq, "'='")?;
                let sig = self.sigexp()?;
                Ok(SDecl::Signature(name, sig, span))
            }
            Some(Tok::KwStructure) => {
                self.bump();
                let (name, _) = self.ident("a structure name")?;
                let ascription = match self.peek() {
                    Some(Tok::Colon) => {
                        self.bump();
                        Some((self.sigexp()?, false))
                    }
                    Some(Tok::ColonGt) => {
                        self.bump();
                        Some((self.sigexp()?, true))
                    }
                    _ => None,
                };
                self.eat(Tok::Eq, "'='")?;
                let body = self.expr()?;
                Ok(SDecl::Structure {
                    name,
                    ascription,
                    body,
                    span,
                })
            }
            Some(Tok::KwFunctor) => {
                self.bump();
                let (name, _) = self.ident("a functor name")?;
                let mut params = Vec::new();
                while self.at(&Tok::LParen) {
                    self.bump();
                    let (p, _) = self.ident("a parameter name")?;
                    self.eat(Tok::Colon, "':'")?;
                    let psig = self.sigexp()?;
                    self.eat(Tok::RParen, "')'")?;
                    params.push((p, psig));
                }
                if params.is_empty() {
                    return Err(self.err("a functor needs at least one parameter"));
                }
                let result = match self.peek() {
                    Some(Tok::Colon) => {
                        self.bump();
                        Some((self.sigexp()?, false))
                    }
                    Some(Tok::ColonGt) => {
                        self.bump();
                        Some((self.sigexp()?, true))
                    }
                    _ => None,
                };
                self.eat(Tok::Eq, "'='")?;
                let body = self.expr()?;
                Ok(SDecl::Functor {
                    name,
                    params,
                    result,
                    body,
                    span,
                })
            }
            _ => Err(self.err("expected 'signature', 'structure', or 'functor'")),
        }
    }
}

/// Parse a whole compilation unit.
pub fn parse(source: &str) -> Result<Vec<SDecl>, ParseError> {
    let toks = Lexer::new(source).tokens()?;
    let mut p = Parser { toks, pos: 0 };
    let mut decls = Vec::new();
    while p.peek().is_some() {
        decls.push(p.decl()?);
    }
    Ok(decls)
}
