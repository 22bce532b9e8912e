//! Core abstract syntax: signatures, module values, module computations.
//!
//! Terms use de Bruijn indices for value variables. Context markers for the
//! static open are proof-irrelevant and never consume an index, so indices
//! count value binders only. Signatures contain no signature variables; the
//! grammar of signatures is closed over embedded values.

use alloc::boxed::Box;

/// Object-level type constructors, embedded in values via [`Value::TypeCode`].
///
/// A neutral type is just a neutral `Value` of signature `type`; it needs no
/// constructor of its own here.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TypeCon {
    Bool,
    /// Partial function type `s ⇀ t`.
    PArrow(Box<Value>, Box<Value>),
    List(Box<Value>),
    /// Binary product of program types, required by `ins : bool * t ⇀ t`.
    Prod(Box<Value>, Box<Value>),
}

/// Module values, `V : σ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Var(usize),
    /// Binds one variable.
    Lam(Box<Value>),
    App(Box<Value>, Box<Value>),
    Pair(Box<Value>, Box<Value>),
    Fst(Box<Value>),
    Snd(Box<Value>),
    /// Extent introduction `in{V}(W)`: static part annotation, then payload.
    /// The annotation is only meaningful under the static open.
    InExt(Box<Value>, Box<Value>),
    /// Extent elimination.
    OutExt(Box<Value>),
    /// Suspension `⟨M⟩ : ○σ`, annotated with its result signature so that
    /// `bind` scrutinees always synthesize.
    Susp(Box<Computation>, Box<Signature>),
    Tt,
    Ff,
    /// Intro form at `dyn (s ⇀ t)`; binds one variable of `dyn s`.
    PFun(Box<Computation>),
    Nil,
    Cons(Box<Value>, Box<Value>),
    TypeCode(TypeCon),
    /// The canonical point `∗` of a statically connected sort. Only
    /// well-typed under the static open, at `dyn t` and `○σ` sorts.
    Star,
    /// List reversal at the given element type, `rev t : dyn (list t ⇀ list t)`.
    Rev(Box<Value>),
}

/// Module computations, `M ÷ σ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Computation {
    Ret(Value),
    /// `bind x ← V in M`; the scrutinee is a value of `○σ`, the body binds
    /// one variable of `σ`.
    Bind(Value, Box<Computation>),
    Throw,
    If(Value, Box<Computation>, Box<Computation>),
    /// `case V of nil ⇒ M | x :: xs ⇒ N`; the cons branch binds the head
    /// (index 1) then the tail (index 0).
    CaseList(Value, Box<Computation>, Box<Computation>),
    /// Application of a partial function value to an argument.
    AppP(Value, Value),
}

/// Signatures, `σ sig`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Signature {
    Type,
    Dyn(Value),
    /// `Π X:σ. τ`; the codomain binds one variable.
    Pi(Box<Signature>, Box<Signature>),
    /// `Σ X:σ. τ`; the second component binds one variable.
    Sigma(Box<Signature>, Box<Signature>),
    /// Static extent `σ {V}`; `V` is a value of `σ` under the static open.
    Ext(Box<Signature>, Value),
    /// Lax modality `○σ`.
    Cmp(Box<Signature>),
}

impl Value {
    pub fn shifted(&self, by: usize, cutoff: usize) -> Value {
        if by == 0 {
            return self.clone();
        }
        match self {
            Value::Var(i) => {
                if *i >= cutoff {
                    Value::Var(i + by)
                } else {
                    Value::Var(*i)
                }
            }
            Value::Lam(b) => Value::Lam(Box::new(b.shifted(by, cutoff + 1))),
            Value::App(f, a) => Value::App(
                Box::new(f.shifted(by, cutoff)),
                Box::new(a.shifted(by, cutoff)),
            ),
            Value::Pair(a, b) => Value::Pair(
                Box::new(a.shifted(by, cutoff)),
                Box::new(b.shifted(by, cutoff)),
            ),
            Value::Fst(p) => Value::Fst(Box::new(p.shifted(by, cutoff))),
            Value::Snd(p) => Value::Snd(Box::new(p.shifted(by, cutoff))),
            Value::InExt(v, w) => Value::InExt(
                Box::new(v.shifted(by, cutoff)),
                Box::new(w.shifted(by, cutoff)),
            ),
            Value::OutExt(u) => Value::OutExt(Box::new(u.shifted(by, cutoff))),
            Value::Susp(m, ann) => Value::Susp(
                Box::new(m.shifted(by, cutoff)),
                Box::new(ann.shifted(by, cutoff)),
            ),
            Value::Tt => Value::Tt,
            Value::Ff => Value::Ff,
            Value::PFun(m) => Value::PFun(Box::new(m.shifted(by, cutoff + 1))),
            Value::Nil => Value::Nil,
            Value::Cons(h, t) => Value::Cons(
                Box::new(h.shifted(by, cutoff)),
                Box::new(t.shifted(by, cutoff)),
            ),
            Value::TypeCode(tc) => Value::TypeCode(tc.shifted(by, cutoff)),
            Value::Star => Value::Star,
            Value::Rev(t) => Value::Rev(Box::new(t.shifted(by, cutoff))),
        }
    }

    /// Substitute `repl` for index `idx`, lowering the indices above it.
    /// `repl` is taken to be well-scoped in the context outside the `idx`
    /// innermost binders.
    pub fn subst(&self, repl: &Value, idx: usize) -> Value {
        match self {
            Value::Var(i) => {
                if *i == idx {
                    repl.shifted(idx, 0)
                } else if *i > idx {
                    Value::Var(i - 1)
                } else {
                    Value::Var(*i)
                }
            }
            Value::Lam(b) => Value::Lam(Box::new(b.subst(repl, idx + 1))),
            Value::App(f, a) => {
                Value::App(Box::new(f.subst(repl, idx)), Box::new(a.subst(repl, idx)))
            }
            Value::Pair(a, b) => {
                Value::Pair(Box::new(a.subst(repl, idx)), Box::new(b.subst(repl, idx)))
            }
            Value::Fst(p) => Value::Fst(Box::new(p.subst(repl, idx))),
            Value::Snd(p) => Value::Snd(Box::new(p.subst(repl, idx))),
            Value::InExt(v, w) => {
                Value::InExt(Box::new(v.subst(repl, idx)), Box::new(w.subst(repl, idx)))
            }
            Value::OutExt(u) => Value::OutExt(Box::new(u.subst(repl, idx))),
            Value::Susp(m, ann) => {
                Value::Susp(Box::new(m.subst(repl, idx)), Box::new(ann.subst(repl, idx)))
            }
            Value::Tt => Value::Tt,
            Value::Ff => Value::Ff,
            Value::PFun(m) => Value::PFun(Box::new(m.subst(repl, idx + 1))),
            Value::Nil => Value::Nil,
            Value::Cons(h, t) => {
                Value::Cons(Box::new(h.subst(repl, idx)), Box::new(t.subst(repl, idx)))
            }
            Value::TypeCode(tc) => Value::TypeCode(tc.subst(repl, idx)),
            Value::Star => Value::Star,
            Value::Rev(t) => Value::Rev(Box::new(t.subst(repl, idx))),
        }
    }
}

impl TypeCon {
    pub fn shifted(&self, by: usize, cutoff: usize) -> TypeCon {
        match self {
            TypeCon::Bool => TypeCon::Bool,
            TypeCon::PArrow(s, t) => TypeCon::PArrow(
                Box::new(s.shifted(by, cutoff)),
                Box::new(t.shifted(by, cutoff)),
            ),
            TypeCon::List(e) => TypeCon::List(Box::new(e.shifted(by, cutoff))),
            TypeCon::Prod(a, b) => TypeCon::Prod(
                Box::new(a.shifted(by, cutoff)),
                Box::new(b.shifted(by, cutoff)),
            ),
        }
    }

    pub fn subst(&self, repl: &Value, idx: usize) -> TypeCon {
        match self {
            TypeCon::Bool => TypeCon::Bool,
            TypeCon::PArrow(s, t) => {
                TypeCon::PArrow(Box::new(s.subst(repl, idx)), Box::new(t.subst(repl, idx)))
            }
            TypeCon::List(e) => TypeCon::List(Box::new(e.subst(repl, idx))),
            TypeCon::Prod(a, b) => {
                TypeCon::Prod(Box::new(a.subst(repl, idx)), Box::new(b.subst(repl, idx)))
            }
        }
    }
}

impl Computation {
    pub fn shifted(&self, by: usize, cutoff: usize) -> Computation {
        match self {
            Computation::Ret(v) => Computation::Ret(v.shifted(by, cutoff)),
            Computation::Bind(v, m) => {
                Computation::Bind(v.shifted(by, cutoff), Box::new(m.shifted(by, cutoff + 1)))
            }
            Computation::Throw => Computation::Throw,
            Computation::If(b, m, n) => Computation::If(
                b.shifted(by, cutoff),
                Box::new(m.shifted(by, cutoff)),
                Box::new(n.shifted(by, cutoff)),
            ),
            Computation::CaseList(s, mn, mc) => Computation::CaseList(
                s.shifted(by, cutoff),
                Box::new(mn.shifted(by, cutoff)),
                Box::new(mc.shifted(by, cutoff + 2)),
            ),
            Computation::AppP(f, a) => {
                Computation::AppP(f.shifted(by, cutoff), a.shifted(by, cutoff))
            }
        }
    }

    pub fn subst(&self, repl: &Value, idx: usize) -> Computation {
        match self {
            Computation::Ret(v) => Computation::Ret(v.subst(repl, idx)),
            Computation::Bind(v, m) => {
                Computation::Bind(v.subst(repl, idx), Box::new(m.subst(repl, idx + 1)))
            }
            Computation::Throw => Computation::Throw,
            Computation::If(b, m, n) => Computation::If(
                b.subst(repl, idx),
                Box::new(m.subst(repl, idx)),
                Box::new(n.subst(repl, idx)),
            ),
            Computation::CaseList(s, mn, mc) => Computation::CaseList(
                s.subst(repl, idx),
                Box::new(mn.subst(repl, idx)),
                Box::new(mc.subst(repl, idx + 2)),
            ),
            Computation::AppP(f, a) => Computation::AppP(f.subst(repl, idx), a.subst(repl, idx)),
        }
    }
}

impl Signature {
    pub fn shifted(&self, by: usize, cutoff: usize) -> Signature {
        match self {
            Signature::Type => Signature::Type,
            Signature::Dyn(t) => Signature::Dyn(t.shifted(by, cutoff)),
            Signature::Pi(a, b) => Signature::Pi(
                Box::new(a.shifted(by, cutoff)),
                Box::new(b.shifted(by, cutoff + 1)),
            ),
            Signature::Sigma(a, b) => Signature::Sigma(
                Box::new(a.shifted(by, cutoff)),
                Box::new(b.shifted(by, cutoff + 1)),
            ),
            Signature::Ext(s, v) => {
                Signature::Ext(Box::new(s.shifted(by, cutoff)), v.shifted(by, cutoff))
            }
            Signature::Cmp(s) => Signature::Cmp(Box::new(s.shifted(by, cutoff))),
        }
    }

    pub fn subst(&self, repl: &Value, idx: usize) -> Signature {
        match self {
            Signature::Type => Signature::Type,
            Signature::Dyn(t) => Signature::Dyn(t.subst(repl, idx)),
            Signature::Pi(a, b) => Signature::Pi(
                Box::new(a.subst(repl, idx)),
                Box::new(b.subst(repl, idx + 1)),
            ),
            Signature::Sigma(a, b) => Signature::Sigma(
                Box::new(a.subst(repl, idx)),
                Box::new(b.subst(repl, idx + 1)),
            ),
            Signature::Ext(s, v) => {
                Signature::Ext(Box::new(s.subst(repl, idx)), v.subst(repl, idx))
            }
            Signature::Cmp(s) => Signature::Cmp(Box::new(s.subst(repl, idx))),
        }
    }

    /// Whether the signature classifies purely static content: no `dyn` or
    /// `○` node anywhere in its structure. Embedded values are indexing data
    /// and do not count.
    pub fn is_purely_static(&self) -> bool {
        match self {
            Signature::Type => true,
            Signature::Dyn(_) | Signature::Cmp(_) => false,
            Signature::Pi(a, b) | Signature::Sigma(a, b) => {
                a.is_purely_static() && b.is_purely_static()
            }
            Signature::Ext(s, _) => s.is_purely_static(),
        }
    }
}

/// Convenience constructors used across the crate and its tests.
impl Value {
    pub fn var(i: usize) -> Value {
        Value::Var(i)
    }
    pub fn bool_code() -> Value {
        Value::TypeCode(TypeCon::Bool)
    }
    pub fn list_code(elem: Value) -> Value {
        Value::TypeCode(TypeCon::List(Box::new(elem)))
    }
    pub fn prod_code(a: Value, b: Value) -> Value {
        Value::TypeCode(TypeCon::Prod(Box::new(a), Box::new(b)))
    }
    pub fn parrow_code(s: Value, t: Value) -> Value {
        Value::TypeCode(TypeCon::PArrow(Box::new(s), Box::new(t)))
    }
    pub fn pair(a: Value, b: Value) -> Value {
        Value::Pair(Box::new(a), Box::new(b))
    }
    pub fn fst(p: Value) -> Value {
        Value::Fst(Box::new(p))
    }
    pub fn snd(p: Value) -> Value {
        Value::Snd(Box::new(p))
    }
    pub fn app(f: Value, a: Value) -> Value {
        Value::App(Box::new(f), Box::new(a))
    }
    pub fn lam(b: Value) -> Value {
        Value::Lam(Box::new(b))
    }
    pub fn susp(m: Computation, ann: Signature) -> Value {
        Value::Susp(Box::new(m), Box::new(ann))
    }
    pub fn pfun(m: Computation) -> Value {
        Value::PFun(Box::new(m))
    }
    pub fn cons(h: Value, t: Value) -> Value {
        Value::Cons(Box::new(h), Box::new(t))
    }
    pub fn in_ext(v: Value, w: Value) -> Value {
        Value::InExt(Box::new(v), Box::new(w))
    }
    pub fn out_ext(u: Value) -> Value {
        Value::OutExt(Box::new(u))
    }
    pub fn rev(elem: Value) -> Value {
        Value::Rev(Box::new(elem))
    }
}

impl Signature {
    pub fn dyn_bool() -> Signature {
        Signature::Dyn(Value::bool_code())
    }
    pub fn dyn_of(t: Value) -> Signature {
        Signature::Dyn(t)
    }
    pub fn pi(dom: Signature, cod: Signature) -> Signature {
        Signature::Pi(Box::new(dom), Box::new(cod))
    }
    pub fn sigma(fst: Signature, snd: Signature) -> Signature {
        Signature::Sigma(Box::new(fst), Box::new(snd))
    }
    pub fn ext(base: Signature, v: Value) -> Signature {
        Signature::Ext(Box::new(base), v)
    }
    pub fn cmp(s: Signature) -> Signature {
        Signature::Cmp(Box::new(s))
    }
}

impl Computation {
    pub fn bind(scrut: Value, body: Computation) -> Computation {
        Computation::Bind(scrut, Box::new(body))
    }
    pub fn if_(cond: Value, then_: Computation, else_: Computation) -> Computation {
        Computation::If(cond, Box::new(then_), Box::new(else_))
    }
    pub fn case_list(scrut: Value, nil: Computation, cons: Computation) -> Computation {
        Computation::CaseList(scrut, Box::new(nil), Box::new(cons))
    }
    pub fn app_p(f: Value, a: Value) -> Computation {
        Computation::AppP(f, a)
    }
}
