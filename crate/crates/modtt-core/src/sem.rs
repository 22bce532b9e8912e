//! Semantic domain for normalization by evaluation.
//!
//! Values evaluate into this domain and are read back as β-normal η-long
//! terms by the quoter in [`crate::nbe`]. Neutrals are spines over variable
//! levels. `StaticPoint` is the canonical inhabitant of statically connected
//! sorts; it only arises when reading back at `Static` phase or from the `∗`
//! token in source terms.

use alloc::rc::Rc;
use alloc::vec::Vec;

use crate::syntax::{Computation, Signature, Value};

pub type Lvl = usize;

/// Evaluation environment; entry `i` from the back interprets index `i`.
#[derive(Clone, Debug, Default)]
pub struct Env {
    values: Vec<Rc<SemValue>>,
}

impl Env {
    pub fn new() -> Env {
        Env { values: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&Rc<SemValue>> {
        let len = self.values.len();
        if index < len {
            Some(&self.values[len - 1 - index])
        } else {
            None
        }
    }

    pub fn extended(&self, v: Rc<SemValue>) -> Env {
        let mut values = self.values.clone();
        values.push(v);
        Env { values }
    }
}

#[derive(Clone, Debug)]
pub struct ValClosure {
    pub env: Env,
    pub body: Value,
}

#[derive(Clone, Debug)]
pub struct CmpClosure {
    pub env: Env,
    pub body: Computation,
}

/// Closure for a cons branch; binds the head then the tail.
#[derive(Clone, Debug)]
pub struct CaseClosure {
    pub env: Env,
    pub body: Computation,
}

#[derive(Clone, Debug)]
pub struct SigClosure {
    pub env: Env,
    pub body: Signature,
}

/// A suspension `⟨M⟩` kept unevaluated together with its annotation.
#[derive(Clone, Debug)]
pub struct SuspClosure {
    pub env: Env,
    pub body: Computation,
    pub ann: Signature,
}

#[derive(Clone, Debug)]
pub enum SemValue {
    Lam(ValClosure),
    PFun(CmpClosure),
    Susp(SuspClosure),
    Pair(Rc<SemValue>, Rc<SemValue>),
    /// Extent introduction, kept so that out-projection of a wrapped payload
    /// is a plain unwrap rather than a spine extension.
    InExt(Rc<SemValue>, Rc<SemValue>),
    Tt,
    Ff,
    Nil,
    Cons(Rc<SemValue>, Rc<SemValue>),
    TypeCode(SemTypeCon),
    Rev(Rc<SemValue>),
    Neutral(Rc<SemNeutral>),
    StaticPoint,
}

#[derive(Clone, Debug)]
pub enum SemTypeCon {
    Bool,
    PArrow(Rc<SemValue>, Rc<SemValue>),
    List(Rc<SemValue>),
    Prod(Rc<SemValue>, Rc<SemValue>),
}

#[derive(Clone, Debug)]
pub struct SemNeutral {
    pub head: Lvl,
    pub spine: Vec<SemElim>,
}

impl SemNeutral {
    pub fn var(head: Lvl) -> SemNeutral {
        SemNeutral {
            head,
            spine: Vec::new(),
        }
    }

    pub fn extended(&self, elim: SemElim) -> SemNeutral {
        let mut spine = self.spine.clone();
        spine.push(elim);
        SemNeutral {
            head: self.head,
            spine,
        }
    }
}

#[derive(Clone, Debug)]
pub enum SemElim {
    App(Rc<SemValue>),
    Fst,
    Snd,
    OutExt,
}

#[derive(Clone, Debug)]
pub enum SemSig {
    Type,
    Dyn(Rc<SemValue>),
    Pi(Rc<SemSig>, SigClosure),
    Sigma(Rc<SemSig>, SigClosure),
    /// The static part is evaluated at `Static` phase.
    Ext(Rc<SemSig>, Rc<SemValue>),
    Cmp(Rc<SemSig>),
}

impl SemSig {
    /// See [`Signature::is_purely_static`]; closures are inspected
    /// syntactically since purity is structural.
    pub fn is_purely_static(&self) -> bool {
        match self {
            SemSig::Type => true,
            SemSig::Dyn(_) | SemSig::Cmp(_) => false,
            SemSig::Pi(a, b) | SemSig::Sigma(a, b) => {
                a.is_purely_static() && b.body.is_purely_static()
            }
            SemSig::Ext(s, _) => s.is_purely_static(),
        }
    }
}

/// A pending continuation of a stuck computation, with the signature of the
/// variable it binds when that is known (it is recorded whenever the
/// continuation came from binding an annotated suspension; for a neutral
/// scrutinee the quoter synthesizes it instead).
#[derive(Clone, Debug)]
pub struct Cont {
    pub clos: CmpClosure,
    pub input_sig: Option<Rc<SemSig>>,
}

/// Normalized computations: `ret`/`throw`, or an elimination stuck on a
/// neutral followed by a queue of pending continuations. Monad β and throw
/// propagation are applied eagerly, and bind nests are kept right-associated
/// by appending to the continuation queue.
#[derive(Clone, Debug)]
pub enum SemCmp {
    Ret(Rc<SemValue>),
    Throw,
    Seq {
        stuck: SemStuck,
        /// Result signature of the stuck computation when it came from
        /// forcing an annotated suspension.
        stuck_sig: Option<Rc<SemSig>>,
        conts: Vec<Cont>,
    },
}

#[derive(Clone, Debug)]
pub enum SemStuck {
    /// Binding a neutral value of `○σ`.
    Force(Rc<SemNeutral>),
    If(Rc<SemNeutral>, Rc<SemCmp>, Rc<SemCmp>),
    Case(Rc<SemNeutral>, Rc<SemCmp>, CaseClosure),
    AppP(StuckFn, Rc<SemValue>),
}

#[derive(Clone, Debug)]
pub enum StuckFn {
    Neutral(Rc<SemNeutral>),
    /// `rev` applied to a non-canonical list.
    Rev(Rc<SemValue>),
}
