//! The core-term text format: an s-expression syntax for signatures, values,
//! and computations. The printer output is stable and is what golden tests
//! pin down; the reader accepts exactly the printer's grammar plus arbitrary
//! whitespace.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::syntax::{Computation, Signature, TypeCon, Value};

pub fn print_value(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v);
    out
}

pub fn print_computation(m: &Computation) -> String {
    let mut out = String::new();
    write_computation(&mut out, m);
    out
}

pub fn print_signature(s: &Signature) -> String {
    let mut out = String::new();
    write_signature(&mut out, s);
    out
}

fn write_value(out: &mut String, v: &Value) {
    match v {
        Value::Var(i) => {
            let _ = write!(out, "(var {})", i);
        }
        Value::Lam(b) => {
            out.push_str("(lam ");
            write_value(out, b);
            out.push(')');
        }
        Value::App(f, a) => {
            out.push_str("(app ");
            write_value(out, f);
            out.push(' ');
            write_value(out, a);
            out.push(')');
        }
        Value::Pair(a, b) => {
            out.push_str("(pair ");
            write_value(out, a);
            out.push(' ');
            write_value(out, b);
            out.push(')');
        }
        Value::Fst(p) => {
            out.push_str("(fst ");
            write_value(out, p);
            out.push(')');
        }
        Value::Snd(p) => {
            out.push_str("(snd ");
            write_value(out, p);
            out.push(')');
        }
        Value::InExt(v, w) => {
            out.push_str("(in-ext ");
            write_value(out, v);
            out.push(' ');
            write_value(out, w);
            out.push(')');
        }
        Value::OutExt(u) => {
            out.push_str("(out-ext ");
            write_value(out, u);
            out.push(')');
        }
        Value::Susp(m, ann) => {
            out.push_str("(susp ");
            write_computation(out, m);
            out.push(' ');
            write_signature(out, ann);
            out.push(')');
        }
        Value::Tt => out.push_str("tt"),
        Value::Ff => out.push_str("ff"),
        Value::PFun(m) => {
            out.push_str("(pfun ");
            write_computation(out, m);
            out.push(')');
        }
        Value::Nil => out.push_str("nil"),
        Value::Cons(h, t) => {
            out.push_str("(cons ");
            write_value(out, h);
            out.push(' ');
            write_value(out, t);
            out.push(')');
        }
        Value::TypeCode(tc) => {
            out.push_str("(code ");
            write_typecon(out, tc);
            out.push(')');
        }
        Value::Star => out.push_str("star"),
        Value::Rev(t) => {
            out.push_str("(rev ");
            write_value(out, t);
            out.push(')');
        }
    }
}

fn write_typecon(out: &mut String, tc: &TypeCon) {
    match tc {
        TypeCon::Bool => out.push_str("bool"),
        TypeCon::PArrow(s, t) => {
            out.push_str("(parrow ");
            write_value(out, s);
            out.push(' ');
            write_value(out, t);
            out.push(')');
        }
        TypeCon::List(e) => {
            out.push_str("(list ");
            write_value(out, e);
            out.push(')');
        }
        TypeCon::Prod(a, b) => {
            out.push_str("(prod ");
            write_value(out, a);
            out.push(' ');
            write_value(out, b);
            out.push(')');
        }
    }
}

fn write_computation(out: &mut String, m: &Computation) {
    match m {
        Computation::Ret(v) => {
            out.push_str("(ret ");
            write_value(out, v);
            out.push(')');
        }
        Computation::Bind(v, body) => {
            out.push_str("(bind ");
            write_value(out, v);
            out.push(' ');
            write_computation(out, body);
            out.push(')');
        }
        Computation::Throw => out.push_str("throw"),
        Computation::If(b, m1, m2) => {
            out.push_str("(if ");
            write_value(out, b);
            out.push(' ');
            write_computation(out, m1);
            out.push(' ');
            write_computation(out, m2);
            out.push(')');
        }
        Computation::CaseList(s, mn, mc) => {
            out.push_str("(case ");
            write_value(out, s);
            out.push(' ');
            write_computation(out, mn);
            out.push(' ');
            write_computation(out, mc);
            out.push(')');
        }
        Computation::AppP(f, a) => {
            out.push_str("(appp ");
            write_value(out, f);
            out.push(' ');
            write_value(out, a);
            out.push(')');
        }
    }
}

fn write_signature(out: &mut String, s: &Signature) {
    match s {
        Signature::Type => out.push_str("type"),
        Signature::Dyn(t) => {
            out.push_str("(dyn ");
            write_value(out, t);
            out.push(')');
        }
        Signature::Pi(a, b) => {
            out.push_str("(pi ");
            write_signature(out, a);
            out.push(' ');
            write_signature(out, b);
            out.push(')');
        }
        Signature::Sigma(a, b) => {
            out.push_str("(sigma ");
            write_signature(out, a);
            out.push(' ');
            write_signature(out, b);
            out.push(')');
        }
        Signature::Ext(base, v) => {
            out.push_str("(ext ");
            write_signature(out, base);
            out.push(' ');
            write_value(out, v);
            out.push(')');
        }
        Signature::Cmp(inner) => {
            out.push_str("(cmp ");
            write_signature(out, inner);
            out.push(')');
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoreParseError {
    pub at: usize,
    pub message: String,
}

// A tiny s-expression reader, shared by the three entry points below.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

struct Reader<'a> {
    input: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(input: &'a str) -> Reader<'a> {
        Reader {
            input: input.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.input.len() && self.input[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn err<T>(&self, message: &str) -> Result<T, CoreParseError> {
        Err(CoreParseError {
            at: self.pos,
            message: String::from(message),
        })
    }

    fn read(&mut self) -> Result<Sexp, CoreParseError> {
        self.skip_ws();
        if self.pos >= self.input.len() {
            return self.err("unexpected end of input");
        }
        match self.input[self.pos] {
            b'(' => {
                self.pos += 1;
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    if self.pos >= self.input.len() {
                        return self.err("unterminated list");
                    }
                    if self.input[self.pos] == b')' {
                        self.pos += 1;
                        return Ok(Sexp::List(items));
                    }
                    items.push(self.read()?);
                }
            }
            b')' => self.err("unexpected ')'"),
            _ => {
                let start = self.pos;
                while self.pos < self.input.len()
                    && !self.input[self.pos].is_ascii_whitespace()
                    && self.input[self.pos] != b'('
                    && self.input[self.pos] != b')'
                {
                    self.pos += 1;
                }
                let atom = core::str::from_utf8(&self.input[start..self.pos]).map_err(|_| {
                    CoreParseError {
                        at: start,
                        message: String::from("invalid utf-8 atom"),
                    }
                })?;
                Ok(Sexp::Atom(String::from(atom)))
            }
        }
    }

    fn finish(&mut self) -> Result<(), CoreParseError> {
        self.skip_ws();
        if self.pos < self.input.len() {
            self.err("trailing input")
        } else {
            Ok(())
        }
    }
}

fn parse_one(input: &str) -> Result<Sexp, CoreParseError> {
    let mut r = Reader::new(input);
    let sexp = r.read()?;
    r.finish()?;
    Ok(sexp)
}

fn bad(message: &str) -> CoreParseError {
    CoreParseError {
        at: 0,
        message: String::from(message),
    }
}

fn expect_len(items: &[Sexp], n: usize, head: &str) -> Result<(), CoreParseError> {
    if items.len() != n {
        Err(bad(head))
    } else {
        Ok(())
    }
}

fn sexp_value(s: &Sexp) -> Result<Value, CoreParseError> {
    match s {
        Sexp::Atom(a) => match a.as_str() {
            "tt" => Ok(Value::Tt),
            "ff" => Ok(Value::Ff),
            "nil" => Ok(Value::Nil),
            "star" => Ok(Value::Star),
            _ => Err(bad("unknown value atom")),
        },
        Sexp::List(items) => {
            let head = match items.first() {
                Some(Sexp::Atom(a)) => a.as_str(),
                _ => return Err(bad("expected value form")),
            };
            match head {
                "var" => {
                    expect_len(items, 2, "var takes one index")?;
                    match &items[1] {
                        Sexp::Atom(n) => n
                            .parse::<usize>()
                            .map(Value::Var)
                            .map_err(|_| bad("bad variable index")),
                        _ => Err(bad("bad variable index")),
                    }
                }
                "lam" => {
                    expect_len(items, 2, "lam takes one body")?;
                    Ok(Value::Lam(Box::new(sexp_value(&items[1])?)))
                }
                "app" => {
                    expect_len(items, 3, "app takes two arguments")?;
                    Ok(Value::app(sexp_value(&items[1])?, sexp_value(&items[2])?))
                }
                "pair" => {
                    expect_len(items, 3, "pair takes two arguments")?;
                    Ok(Value::pair(sexp_value(&items[1])?, sexp_value(&items[2])?))
                }
                "fst" => {
                    expect_len(items, 2, "fst takes one argument")?;
                    Ok(Value::fst(sexp_value(&items[1])?))
                }
                "snd" => {
                    expect_len(items, 2, "snd takes one argument")?;
                    Ok(Value::snd(sexp_value(&items[1])?))
                }
                "in-ext" => {
                    expect_len(items, 3, "in-ext takes two arguments")?;
                    Ok(Value::in_ext(
                        sexp_value(&items[1])?,
                        sexp_value(&items[2])?,
                    ))
                }
                "out-ext" => {
                    expect_len(items, 2, "out-ext takes one argument")?;
                    Ok(Value::out_ext(sexp_value(&items[1])?))
                }
                "susp" => {
                    expect_len(items, 3, "susp takes a computation and a signature")?;
                    Ok(Value::susp(
                        sexp_computation(&items[1])?,
                        sexp_signature(&items[2])?,
                    ))
                }
                "pfun" => {
                    expect_len(items, 2, "pfun takes one body")?;
                    Ok(Value::pfun(sexp_computation(&items[1])?))
                }
                "cons" => {
                    expect_len(items, 3, "cons takes two arguments")?;
                    Ok(Value::cons(sexp_value(&items[1])?, sexp_value(&items[2])?))
                }
                "code" => {
                    expect_len(items, 2, "code takes one type constructor")?;
                    Ok(Value::TypeCode(sexp_typecon(&items[1])?))
                }
                "rev" => {
                    expect_len(items, 2, "rev takes one element type")?;
                    Ok(Value::rev(sexp_value(&items[1])?))
                }
                _ => Err(bad("unknown value form")),
            }
        }
    }
}

fn sexp_typecon(s: &Sexp) -> Result<TypeCon, CoreParseError> {
    match s {
        Sexp::Atom(a) if a == "bool" => Ok(TypeCon::Bool),
        Sexp::List(items) => {
            let head = match items.first() {
                Some(Sexp::Atom(a)) => a.as_str(),
                _ => return Err(bad("expected type constructor")),
            };
            match head {
                "parrow" => {
                    expect_len(items, 3, "parrow takes two arguments")?;
                    Ok(TypeCon::PArrow(
                        Box::new(sexp_value(&items[1])?),
                        Box::new(sexp_value(&items[2])?),
                    ))
                }
                "list" => {
                    expect_len(items, 2, "list takes one argument")?;
                    Ok(TypeCon::List(Box::new(sexp_value(&items[1])?)))
                }
                "prod" => {
                    expect_len(items, 3, "prod takes two arguments")?;
                    Ok(TypeCon::Prod(
                        Box::new(sexp_value(&items[1])?),
                        Box::new(sexp_value(&items[2])?),
                    ))
                }
                _ => Err(bad("unknown type constructor")),
            }
        }
        _ => Err(bad("expected type constructor")),
    }
}

fn sexp_computation(s: &Sexp) -> Result<Computation, CoreParseError> {
    match s {
        Sexp::Atom(a) if a == "throw" => Ok(Computation::Throw),
        Sexp::List(items) => {
            let head = match items.first() {
                Some(Sexp::Atom(a)) => a.as_str(),
                _ => return Err(bad("expected computation form")),
            };
            match head {
                "ret" => {
                    expect_len(items, 2, "ret takes one value")?;
                    Ok(Computation::Ret(sexp_value(&items[1])?))
                }
                "bind" => {
                    expect_len(items, 3, "bind takes a scrutinee and a body")?;
                    Ok(Computation::bind(
                        sexp_value(&items[1])?,
                        sexp_computation(&items[2])?,
                    ))
                }
                "if" => {
                    expect_len(items, 4, "if takes a condition and two branches")?;
                    Ok(Computation::if_(
                        sexp_value(&items[1])?,
                        sexp_computation(&items[2])?,
                        sexp_computation(&items[3])?,
                    ))
                }
                "case" => {
                    expect_len(items, 4, "case takes a scrutinee and two branches")?;
                    Ok(Computation::case_list(
                        sexp_value(&items[1])?,
                        sexp_computation(&items[2])?,
                        sexp_computation(&items[3])?,
                    ))
                }
                "appp" => {
                    expect_len(items, 3, "appp takes a function and an argument")?;
                    Ok(Computation::app_p(
                        sexp_value(&items[1])?,
                        sexp_value(&items[2])?,
                    ))
                }
                _ => Err(bad("unknown computation form")),
            }
        }
        _ => Err(bad("expected computation form")),
    }
}

fn sexp_signature(s: &Sexp) -> Result<Signature, CoreParseError> {
    match s {
        Sexp::Atom(a) if a == "type" => Ok(Signature::Type),
        Sexp::List(items) => {
            let head = match items.first() {
                Some(Sexp::Atom(a)) => a.as_str(),
                _ => return Err(bad("expected signature form")),
            };
            match head {
                "dyn" => {
                    expect_len(items, 2, "dyn takes one type value")?;
                    Ok(Signature::Dyn(sexp_value(&items[1])?))
                }
                "pi" => {
                    expect_len(items, 3, "pi takes a domain and a codomain")?;
                    Ok(Signature::pi(
                        sexp_signature(&items[1])?,
                        sexp_signature(&items[2])?,
                    ))
                }
                "sigma" => {
                    expect_len(items, 3, "sigma takes two components")?;
                    Ok(Signature::sigma(
                        sexp_signature(&items[1])?,
                        sexp_signature(&items[2])?,
                    ))
                }
                "ext" => {
                    expect_len(items, 3, "ext takes a signature and a value")?;
                    Ok(Signature::ext(
                        sexp_signature(&items[1])?,
                        sexp_value(&items[2])?,
                    ))
                }
                "cmp" => {
                    expect_len(items, 2, "cmp takes one signature")?;
                    Ok(Signature::cmp(sexp_signature(&items[1])?))
                }
                _ => Err(bad("unknown signature form")),
            }
        }
        _ => Err(bad("expected signature form")),
    }
}

pub fn parse_value(input: &str) -> Result<Value, CoreParseError> {
    sexp_value(&parse_one(input)?)
}

pub fn parse_computation(input: &str) -> Result<Computation, CoreParseError> {
    sexp_computation(&parse_one(input)?)
}

pub fn parse_signature(input: &str) -> Result<Signature, CoreParseError> {
    sexp_signature(&parse_one(input)?)
}
