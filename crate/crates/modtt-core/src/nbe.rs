//! Phase-sensitive judgmental equality by normalization.
//!
//! Evaluation is untyped and β-eager; readback is directed by the semantic
//! signature and produces η-long normal forms. The phase threads through
//! readback: at `Static` phase every position of `dyn` or `○` sort collapses
//! to the canonical point, which is exactly the static connectivity
//! collapse. Equality of terms is syntactic equality of their normal forms.

use alloc::rc::Rc;
use alloc::vec::Vec;

use crate::ctx::{Context, Entry, Phase};
use crate::sem::{
    CaseClosure, CmpClosure, Cont, Env, SemCmp, SemElim, SemNeutral, SemSig, SemStuck, SemTypeCon,
    SemValue, SigClosure, StuckFn, SuspClosure, ValClosure,
};
use crate::syntax::{Computation, Signature, TypeCon, Value};

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

pub fn eval_value(env: &Env, v: &Value, phase: Phase) -> Rc<SemValue> {
    match v {
        Value::Var(i) => env
            .get(*i)
            .unwrap_or_else(|| panic!("eval: unbound variable {}", i))
            .clone(),
        Value::Lam(b) => Rc::new(SemValue::Lam(ValClosure {
            env: env.clone(),
            body: (**b).clone(),
        })),
        Value::App(f, a) => do_app(eval_value(env, f, phase), eval_value(env, a, phase), phase),
        Value::Pair(a, b) => Rc::new(SemValue::Pair(
            eval_value(env, a, phase),
            eval_value(env, b, phase),
        )),
        Value::Fst(p) => do_fst(eval_value(env, p, phase)),
        Value::Snd(p) => do_snd(eval_value(env, p, phase)),
        Value::InExt(v0, w) => Rc::new(SemValue::InExt(
            eval_value(env, v0, phase),
            eval_value(env, w, phase),
        )),
        Value::OutExt(u) => do_out(eval_value(env, u, phase)),
        Value::Susp(m, ann) => Rc::new(SemValue::Susp(SuspClosure {
            env: env.clone(),
            body: (**m).clone(),
            ann: (**ann).clone(),
        })),
        Value::Tt => Rc::new(SemValue::Tt),
        Value::Ff => Rc::new(SemValue::Ff),
        Value::PFun(m) => Rc::new(SemValue::PFun(CmpClosure {
            env: env.clone(),
            body: (**m).clone(),
        })),
        Value::Nil => Rc::new(SemValue::Nil),
        Value::Cons(h, t) => Rc::new(SemValue::Cons(
            eval_value(env, h, phase),
            eval_value(env, t, phase),
        )),
        Value::TypeCode(tc) => Rc::new(SemValue::TypeCode(eval_typecon(env, tc, phase))),
        Value::Star => Rc::new(SemValue::StaticPoint),
        Value::Rev(t) => Rc::new(SemValue::Rev(eval_value(env, t, phase))),
    }
}

fn eval_typecon(env: &Env, tc: &TypeCon, phase: Phase) -> SemTypeCon {
    match tc {
        TypeCon::Bool => SemTypeCon::Bool,
        TypeCon::PArrow(s, t) => {
            SemTypeCon::PArrow(eval_value(env, s, phase), eval_value(env, t, phase))
        }
        TypeCon::List(e) => SemTypeCon::List(eval_value(env, e, phase)),
        TypeCon::Prod(a, b) => {
            SemTypeCon::Prod(eval_value(env, a, phase), eval_value(env, b, phase))
        }
    }
}

pub fn eval_sig(env: &Env, s: &Signature, phase: Phase) -> Rc<SemSig> {
    match s {
        Signature::Type => Rc::new(SemSig::Type),
        Signature::Dyn(t) => Rc::new(SemSig::Dyn(eval_value(env, t, phase))),
        Signature::Pi(a, b) => Rc::new(SemSig::Pi(
            eval_sig(env, a, phase),
            SigClosure {
                env: env.clone(),
                body: (**b).clone(),
            },
        )),
        Signature::Sigma(a, b) => Rc::new(SemSig::Sigma(
            eval_sig(env, a, phase),
            SigClosure {
                env: env.clone(),
                body: (**b).clone(),
            },
        )),
        // The static part lives under the static open.
        Signature::Ext(base, v) => Rc::new(SemSig::Ext(
            eval_sig(env, base, phase),
            eval_value(env, v, Phase::Static),
        )),
        Signature::Cmp(inner) => Rc::new(SemSig::Cmp(eval_sig(env, inner, phase))),
    }
}

pub fn eval_cmp(env: &Env, m: &Computation, phase: Phase) -> SemCmp {
    match m {
        Computation::Ret(v) => SemCmp::Ret(eval_value(env, v, phase)),
        Computation::Throw => SemCmp::Throw,
        Computation::Bind(v, body) => {
            let scrut = eval_value(env, v, phase);
            let k = CmpClosure {
                env: env.clone(),
                body: (**body).clone(),
            };
            bind_sem(scrut, k, phase)
        }
        Computation::If(b, m1, m2) => match &*eval_value(env, b, phase) {
            SemValue::Tt => eval_cmp(env, m1, phase),
            SemValue::Ff => eval_cmp(env, m2, phase),
            SemValue::Neutral(n) => SemCmp::Seq {
                stuck: SemStuck::If(
                    n.clone(),
                    Rc::new(eval_cmp(env, m1, phase)),
                    Rc::new(eval_cmp(env, m2, phase)),
                ),
                stuck_sig: None,
                conts: Vec::new(),
            },
            SemValue::StaticPoint => SemCmp::Ret(Rc::new(SemValue::StaticPoint)),
            _ => panic!("eval: if on a non-boolean"),
        },
        Computation::CaseList(s, mn, mc) => match &*eval_value(env, s, phase) {
            SemValue::Nil => eval_cmp(env, mn, phase),
            SemValue::Cons(h, t) => {
                let env2 = env.extended(h.clone()).extended(t.clone());
                eval_cmp(&env2, mc, phase)
            }
            SemValue::Neutral(n) => SemCmp::Seq {
                stuck: SemStuck::Case(
                    n.clone(),
                    Rc::new(eval_cmp(env, mn, phase)),
                    CaseClosure {
                        env: env.clone(),
                        body: (**mc).clone(),
                    },
                ),
                stuck_sig: None,
                conts: Vec::new(),
            },
            SemValue::StaticPoint => SemCmp::Ret(Rc::new(SemValue::StaticPoint)),
            _ => panic!("eval: case on a non-list"),
        },
        Computation::AppP(f, a) => {
            do_appp(eval_value(env, f, phase), eval_value(env, a, phase), phase)
        }
    }
}

pub fn do_app(f: Rc<SemValue>, a: Rc<SemValue>, phase: Phase) -> Rc<SemValue> {
    match &*f {
        SemValue::Lam(clos) => eval_value(&clos.env.extended(a), &clos.body, phase),
        SemValue::Neutral(n) => Rc::new(SemValue::Neutral(Rc::new(n.extended(SemElim::App(a))))),
        SemValue::StaticPoint => f.clone(),
        _ => panic!("do_app: not a function"),
    }
}

pub fn do_fst(p: Rc<SemValue>) -> Rc<SemValue> {
    match &*p {
        SemValue::Pair(a, _) => a.clone(),
        SemValue::Neutral(n) => Rc::new(SemValue::Neutral(Rc::new(n.extended(SemElim::Fst)))),
        SemValue::StaticPoint => p.clone(),
        _ => panic!("do_fst: not a pair"),
    }
}

pub fn do_snd(p: Rc<SemValue>) -> Rc<SemValue> {
    match &*p {
        SemValue::Pair(_, b) => b.clone(),
        SemValue::Neutral(n) => Rc::new(SemValue::Neutral(Rc::new(n.extended(SemElim::Snd)))),
        SemValue::StaticPoint => p.clone(),
        _ => panic!("do_snd: not a pair"),
    }
}

pub fn do_out(u: Rc<SemValue>) -> Rc<SemValue> {
    match &*u {
        SemValue::InExt(_, w) => w.clone(),
        SemValue::Neutral(n) => Rc::new(SemValue::Neutral(Rc::new(n.extended(SemElim::OutExt)))),
        SemValue::StaticPoint => u.clone(),
        _ => panic!("do_out: not an extent value"),
    }
}

/// Apply a partial function value; `rev` computes on canonical lists.
pub fn do_appp(f: Rc<SemValue>, a: Rc<SemValue>, phase: Phase) -> SemCmp {
    match &*f {
        SemValue::PFun(clos) => eval_cmp(&clos.env.extended(a), &clos.body, phase),
        SemValue::Rev(elem) => match reverse_list(&a) {
            Some(rev) => SemCmp::Ret(rev),
            None => SemCmp::Seq {
                stuck: SemStuck::AppP(StuckFn::Rev(elem.clone()), a),
                stuck_sig: None,
                conts: Vec::new(),
            },
        },
        SemValue::Neutral(n) => SemCmp::Seq {
            stuck: SemStuck::AppP(StuckFn::Neutral(n.clone()), a),
            stuck_sig: None,
            conts: Vec::new(),
        },
        SemValue::StaticPoint => SemCmp::Ret(Rc::new(SemValue::StaticPoint)),
        _ => panic!("do_appp: not a partial function"),
    }
}

fn reverse_list(list: &Rc<SemValue>) -> Option<Rc<SemValue>> {
    let mut items = Vec::new();
    let mut cur = list.clone();
    loop {
        match &*cur.clone() {
            SemValue::Nil => break,
            SemValue::Cons(h, t) => {
                items.push(h.clone());
                cur = t.clone();
            }
            _ => return None,
        }
    }
    let mut out = Rc::new(SemValue::Nil);
    for item in items {
        out = Rc::new(SemValue::Cons(item, out));
    }
    Some(out)
}

/// Bind a value of `○σ` against a continuation: monad β for returned
/// suspensions, throw propagation, and re-association onto the continuation
/// queue otherwise.
pub fn bind_sem(scrut: Rc<SemValue>, k: CmpClosure, phase: Phase) -> SemCmp {
    match &*scrut {
        SemValue::Susp(sclos) => {
            let ann_sem = eval_sig(&sclos.env, &sclos.ann, phase);
            let mut inner = eval_cmp(&sclos.env, &sclos.body, phase);
            if let SemCmp::Seq {
                stuck_sig, conts, ..
            } = &mut inner
            {
                if stuck_sig.is_none() && conts.is_empty() {
                    *stuck_sig = Some(ann_sem.clone());
                }
            }
            seq_sem(
                inner,
                Cont {
                    clos: k,
                    input_sig: Some(ann_sem),
                },
                phase,
            )
        }
        SemValue::Neutral(n) => SemCmp::Seq {
            stuck: SemStuck::Force(n.clone()),
            stuck_sig: None,
            conts: alloc::vec![Cont {
                clos: k,
                input_sig: None
            }],
        },
        SemValue::StaticPoint => SemCmp::Ret(Rc::new(SemValue::StaticPoint)),
        _ => panic!("bind_sem: scrutinee is not a suspension"),
    }
}

/// Pipe the result of `c` into `cont`.
pub fn seq_sem(c: SemCmp, cont: Cont, phase: Phase) -> SemCmp {
    match c {
        SemCmp::Ret(v) => eval_cmp(&cont.clos.env.extended(v), &cont.clos.body, phase),
        SemCmp::Throw => SemCmp::Throw,
        SemCmp::Seq {
            stuck,
            stuck_sig,
            mut conts,
        } => {
            conts.push(cont);
            SemCmp::Seq {
                stuck,
                stuck_sig,
                conts,
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Readback
// ---------------------------------------------------------------------------

/// Quoting state: the signatures of the variables in scope, by level, and
/// the phase directing the connectivity collapse.
pub struct Quoter {
    sigs: Vec<Rc<SemSig>>,
    pub phase: Phase,
}

impl Quoter {
    pub fn new(sigs: Vec<Rc<SemSig>>, phase: Phase) -> Quoter {
        Quoter { sigs, phase }
    }

    fn depth(&self) -> usize {
        self.sigs.len()
    }

    fn idx_of(&self, lvl: usize) -> usize {
        self.depth() - 1 - lvl
    }

    fn fresh(&mut self, sig: Rc<SemSig>) -> Rc<SemValue> {
        let lvl = self.sigs.len();
        self.sigs.push(sig);
        Rc::new(SemValue::Neutral(Rc::new(SemNeutral::var(lvl))))
    }

    fn pop(&mut self) {
        self.sigs.pop();
    }
}

fn statically_connected(sig: &SemSig) -> bool {
    matches!(sig, SemSig::Dyn(_) | SemSig::Cmp(_))
}

pub fn quote_value(q: &mut Quoter, v: &Rc<SemValue>, sig: &Rc<SemSig>) -> Value {
    if q.phase == Phase::Static && statically_connected(sig) {
        return Value::Star;
    }
    match &**sig {
        SemSig::Pi(dom, cod) => {
            let fresh = q.fresh(dom.clone());
            let cod_sem = eval_sig(&cod.env.extended(fresh.clone()), &cod.body, q.phase);
            let body = quote_value(q, &do_app(v.clone(), fresh, q.phase), &cod_sem);
            q.pop();
            Value::lam(body)
        }
        SemSig::Sigma(a, b) => {
            let fst = do_fst(v.clone());
            let snd_sig = eval_sig(&b.env.extended(fst.clone()), &b.body, q.phase);
            let fst_nf = quote_value(q, &fst, a);
            let snd_nf = quote_value(q, &do_snd(v.clone()), &snd_sig);
            Value::pair(fst_nf, snd_nf)
        }
        SemSig::Ext(base, w) => {
            let static_nf = {
                let saved = q.phase;
                q.phase = Phase::Static;
                let nf = quote_value(q, w, base);
                q.phase = saved;
                nf
            };
            let payload = do_out(v.clone());
            let payload_nf = quote_value(q, &payload, base);
            Value::in_ext(static_nf, payload_nf)
        }
        SemSig::Cmp(inner) => match &**v {
            SemValue::Susp(sclos) => {
                let mut c = eval_cmp(&sclos.env, &sclos.body, q.phase);
                if let SemCmp::Seq {
                    stuck_sig, conts, ..
                } = &mut c
                {
                    if stuck_sig.is_none() && conts.is_empty() {
                        *stuck_sig = Some(eval_sig(&sclos.env, &sclos.ann, q.phase));
                    }
                }
                let body_nf = quote_cmp(q, &c, inner);
                Value::susp(body_nf, quote_sig(q, inner))
            }
            SemValue::Neutral(n) => quote_neutral(q, n).0,
            SemValue::StaticPoint => Value::Star,
            _ => panic!("quote: non-suspension at a computation signature"),
        },
        SemSig::Dyn(t) => quote_program_value(q, v, t),
        SemSig::Type => match &**v {
            SemValue::TypeCode(tc) => Value::TypeCode(quote_typecon(q, tc)),
            SemValue::Neutral(n) => quote_neutral(q, n).0,
            SemValue::StaticPoint => Value::Star,
            _ => panic!("quote: non-code at signature type"),
        },
    }
}

fn quote_typecon(q: &mut Quoter, tc: &SemTypeCon) -> TypeCon {
    let ty = Rc::new(SemSig::Type);
    match tc {
        SemTypeCon::Bool => TypeCon::Bool,
        SemTypeCon::PArrow(s, t) => TypeCon::PArrow(
            alloc::boxed::Box::new(quote_value(q, s, &ty)),
            alloc::boxed::Box::new(quote_value(q, t, &ty)),
        ),
        SemTypeCon::List(e) => TypeCon::List(alloc::boxed::Box::new(quote_value(q, e, &ty))),
        SemTypeCon::Prod(a, b) => TypeCon::Prod(
            alloc::boxed::Box::new(quote_value(q, a, &ty)),
            alloc::boxed::Box::new(quote_value(q, b, &ty)),
        ),
    }
}

/// Readback at `dyn t`, directed by the head of `t`.
fn quote_program_value(q: &mut Quoter, v: &Rc<SemValue>, t: &Rc<SemValue>) -> Value {
    if let SemValue::StaticPoint = &**v {
        return Value::Star;
    }
    match &**t {
        SemValue::TypeCode(SemTypeCon::Bool) => match &**v {
            SemValue::Tt => Value::Tt,
            SemValue::Ff => Value::Ff,
            SemValue::Neutral(n) => quote_neutral(q, n).0,
            _ => panic!("quote: non-boolean at dyn bool"),
        },
        SemValue::TypeCode(SemTypeCon::List(e)) => match &**v {
            SemValue::Nil => Value::Nil,
            SemValue::Cons(h, tail) => {
                let head_nf = quote_program_value(q, h, e);
                let tail_nf = quote_program_value(q, tail, t);
                Value::cons(head_nf, tail_nf)
            }
            SemValue::Neutral(n) => quote_neutral(q, n).0,
            _ => panic!("quote: non-list at dyn list"),
        },
        // η at products.
        SemValue::TypeCode(SemTypeCon::Prod(a, b)) => {
            let fst_nf = quote_program_value(q, &do_fst(v.clone()), a);
            let snd_nf = quote_program_value(q, &do_snd(v.clone()), b);
            Value::pair(fst_nf, snd_nf)
        }
        // η at partial functions, via the ⇀/val isomorphism.
        SemValue::TypeCode(SemTypeCon::PArrow(s, tcod)) => {
            let arg_sig = Rc::new(SemSig::Dyn(s.clone()));
            let res_sig = Rc::new(SemSig::Dyn(tcod.clone()));
            let fresh = q.fresh(arg_sig);
            let body = do_appp(v.clone(), fresh, q.phase);
            let body_nf = quote_cmp(q, &body, &res_sig);
            q.pop();
            Value::pfun(body_nf)
        }
        // Neutral type: inhabitants are neutral.
        SemValue::Neutral(_) => match &**v {
            SemValue::Neutral(n) => quote_neutral(q, n).0,
            _ => panic!("quote: canonical value at a neutral type"),
        },
        _ => panic!("quote: malformed type value"),
    }
}

enum NeuState {
    /// Still a syntactic spine; the semantic prefix is kept for dependent
    /// second projections.
    Neutral(Value, Rc<SemNeutral>),
    /// The spine was discharged by extent inversion; elimination continues
    /// semantically.
    Jumped(Rc<SemValue>),
}

/// Read back a neutral, synthesizing its signature along the spine. Under
/// the static open — and at purely static extents, which are singletons —
/// an out-projection is discharged by the extent's recorded static value
/// instead of extending the spine.
pub fn quote_neutral(q: &mut Quoter, n: &SemNeutral) -> (Value, Rc<SemSig>) {
    let head_sig = q
        .sigs
        .get(n.head)
        .unwrap_or_else(|| panic!("quote: unbound level {}", n.head))
        .clone();
    let mut sig = head_sig;
    let mut state = NeuState::Neutral(
        Value::Var(q.idx_of(n.head)),
        Rc::new(SemNeutral::var(n.head)),
    );
    for elim in &n.spine {
        match elim {
            SemElim::App(arg) => {
                let (dom, cod) = match &*sig {
                    SemSig::Pi(d, c) => (d.clone(), c.clone()),
                    _ => panic!("quote: application at a non-functor signature"),
                };
                match &mut state {
                    NeuState::Neutral(syn, prefix) => {
                        let arg_nf = quote_value(q, arg, &dom);
                        *syn = Value::app(core::mem::replace(syn, Value::Tt), arg_nf);
                        *prefix = Rc::new(prefix.extended(SemElim::App(arg.clone())));
                    }
                    NeuState::Jumped(v) => {
                        *v = do_app(v.clone(), arg.clone(), q.phase);
                    }
                }
                sig = eval_sig(&cod.env.extended(arg.clone()), &cod.body, q.phase);
            }
            SemElim::Fst => match &*sig.clone() {
                SemSig::Sigma(a, _) => {
                    match &mut state {
                        NeuState::Neutral(syn, prefix) => {
                            *syn = Value::fst(core::mem::replace(syn, Value::Tt));
                            *prefix = Rc::new(prefix.extended(SemElim::Fst));
                        }
                        NeuState::Jumped(v) => *v = do_fst(v.clone()),
                    }
                    sig = a.clone();
                }
                SemSig::Dyn(t) => {
                    let (a, _) = expect_prod(t);
                    match &mut state {
                        NeuState::Neutral(syn, prefix) => {
                            *syn = Value::fst(core::mem::replace(syn, Value::Tt));
                            *prefix = Rc::new(prefix.extended(SemElim::Fst));
                        }
                        NeuState::Jumped(v) => *v = do_fst(v.clone()),
                    }
                    sig = Rc::new(SemSig::Dyn(a));
                }
                _ => panic!("quote: fst at a non-pair signature"),
            },
            SemElim::Snd => match &*sig.clone() {
                SemSig::Sigma(_, b) => {
                    let fst_sem = match &state {
                        NeuState::Neutral(_, prefix) => {
                            Rc::new(SemValue::Neutral(Rc::new(prefix.extended(SemElim::Fst))))
                        }
                        NeuState::Jumped(v) => do_fst(v.clone()),
                    };
                    sig = eval_sig(&b.env.extended(fst_sem), &b.body, q.phase);
                    match &mut state {
                        NeuState::Neutral(syn, prefix) => {
                            *syn = Value::snd(core::mem::replace(syn, Value::Tt));
                            *prefix = Rc::new(prefix.extended(SemElim::Snd));
                        }
                        NeuState::Jumped(v) => *v = do_snd(v.clone()),
                    }
                }
                SemSig::Dyn(t) => {
                    let (_, b) = expect_prod(t);
                    match &mut state {
                        NeuState::Neutral(syn, prefix) => {
                            *syn = Value::snd(core::mem::replace(syn, Value::Tt));
                            *prefix = Rc::new(prefix.extended(SemElim::Snd));
                        }
                        NeuState::Jumped(v) => *v = do_snd(v.clone()),
                    }
                    sig = Rc::new(SemSig::Dyn(b));
                }
                _ => panic!("quote: snd at a non-pair signature"),
            },
            SemElim::OutExt => {
                let (base, w) = match &*sig {
                    SemSig::Ext(base, w) => (base.clone(), w.clone()),
                    _ => panic!("quote: out-projection at a non-extent signature"),
                };
                let invert = q.phase == Phase::Static || base.is_purely_static();
                if invert {
                    state = NeuState::Jumped(w);
                } else {
                    match &mut state {
                        NeuState::Neutral(syn, prefix) => {
                            *syn = Value::out_ext(core::mem::replace(syn, Value::Tt));
                            *prefix = Rc::new(prefix.extended(SemElim::OutExt));
                        }
                        NeuState::Jumped(v) => *v = do_out(v.clone()),
                    }
                }
                sig = base;
            }
        }
    }
    match state {
        NeuState::Neutral(syn, _) => (syn, sig),
        NeuState::Jumped(v) => (quote_value(q, &v, &sig), sig),
    }
}

fn expect_prod(t: &Rc<SemValue>) -> (Rc<SemValue>, Rc<SemValue>) {
    match &**t {
        SemValue::TypeCode(SemTypeCon::Prod(a, b)) => (a.clone(), b.clone()),
        _ => panic!("quote: projection at a non-product program type"),
    }
}

pub fn quote_cmp(q: &mut Quoter, c: &SemCmp, sig: &Rc<SemSig>) -> Computation {
    match c {
        SemCmp::Ret(v) => Computation::Ret(quote_value(q, v, sig)),
        SemCmp::Throw => Computation::Throw,
        SemCmp::Seq {
            stuck,
            stuck_sig,
            conts,
        } => {
            if conts.is_empty() {
                return quote_stuck(q, stuck, sig).1;
            }
            // The stuck computation's result signature: recorded on the
            // suspension, recorded as the first continuation's input, or
            // synthesized from the stuck head.
            let sig0 = stuck_sig
                .clone()
                .or_else(|| conts[0].input_sig.clone())
                .unwrap_or_else(|| synth_stuck_sig(q, stuck));
            let (scrut_nf, _) = quote_stuck_as_value(q, stuck, &sig0);
            let fresh = q.fresh(sig0.clone());
            let first = &conts[0];
            let mut body_sem = eval_cmp(&first.clos.env.extended(fresh), &first.clos.body, q.phase);
            for cont in &conts[1..] {
                body_sem = seq_sem(body_sem, cont.clone(), q.phase);
            }
            let body_nf = quote_cmp(q, &body_sem, sig);
            q.pop();
            Computation::bind(scrut_nf, body_nf)
        }
    }
}

/// Signature of the result of a stuck computation, when it can be read off
/// the stuck head itself.
fn synth_stuck_sig(q: &mut Quoter, stuck: &SemStuck) -> Rc<SemSig> {
    match stuck {
        SemStuck::Force(n) => match &*quote_neutral(q, n).1 {
            SemSig::Cmp(inner) => inner.clone(),
            _ => panic!("quote: forced scrutinee is not a computation"),
        },
        SemStuck::AppP(StuckFn::Neutral(n), _) => match &*quote_neutral(q, n).1 {
            SemSig::Dyn(t) => match &**t {
                SemValue::TypeCode(SemTypeCon::PArrow(_, cod)) => Rc::new(SemSig::Dyn(cod.clone())),
                _ => panic!("quote: application head is not a partial function"),
            },
            _ => panic!("quote: application head is not a program value"),
        },
        SemStuck::AppP(StuckFn::Rev(elem), _) => Rc::new(SemSig::Dyn(Rc::new(SemValue::TypeCode(
            SemTypeCon::List(elem.clone()),
        )))),
        SemStuck::If(..) | SemStuck::Case(..) => {
            panic!("quote: unannotated branching computation under a continuation")
        }
    }
}

/// Read a stuck computation back as (the value to scrutinize in a `bind`,
/// the bare computation). For `Force` the value is the neutral itself; for
/// the others the computation is wrapped in an annotated suspension by the
/// caller when needed.
fn quote_stuck(q: &mut Quoter, stuck: &SemStuck, sig: &Rc<SemSig>) -> (Option<Value>, Computation) {
    match stuck {
        SemStuck::Force(n) => {
            let (vn, _) = quote_neutral(q, n);
            // A bare forced neutral only occurs under a continuation; as a
            // standalone computation it is `bind x ← V in ret x`.
            (
                Some(vn.clone()),
                Computation::bind(vn, Computation::Ret(Value::Var(0))),
            )
        }
        SemStuck::If(n, c1, c2) => {
            let cond = quote_neutral(q, n).0;
            let m1 = quote_cmp(q, c1, sig);
            let m2 = quote_cmp(q, c2, sig);
            (None, Computation::if_(cond, m1, m2))
        }
        SemStuck::Case(n, cnil, cclos) => {
            let (scrut_nf, scrut_sig) = quote_neutral(q, n);
            let elem = match &*scrut_sig {
                SemSig::Dyn(t) => match &**t {
                    SemValue::TypeCode(SemTypeCon::List(e)) => e.clone(),
                    _ => panic!("quote: case scrutinee is not a list"),
                },
                _ => panic!("quote: case scrutinee is not a program value"),
            };
            let mnil = quote_cmp(q, cnil, sig);
            let head_sig = Rc::new(SemSig::Dyn(elem.clone()));
            let tail_sig = Rc::new(SemSig::Dyn(Rc::new(SemValue::TypeCode(SemTypeCon::List(
                elem,
            )))));
            let fresh_h = q.fresh(head_sig);
            let fresh_t = q.fresh(tail_sig);
            let body_sem = eval_cmp(
                &cclos.env.extended(fresh_h).extended(fresh_t),
                &cclos.body,
                q.phase,
            );
            let mcons = quote_cmp(q, &body_sem, sig);
            q.pop();
            q.pop();
            (None, Computation::case_list(scrut_nf, mnil, mcons))
        }
        SemStuck::AppP(f, a) => {
            let (f_nf, arg_sig) = match f {
                StuckFn::Neutral(n) => {
                    let (vf, fsig) = quote_neutral(q, n);
                    let dom = match &*fsig {
                        SemSig::Dyn(t) => match &**t {
                            SemValue::TypeCode(SemTypeCon::PArrow(dom, _)) => dom.clone(),
                            _ => panic!("quote: application head is not a partial function"),
                        },
                        _ => panic!("quote: application head is not a program value"),
                    };
                    (vf, Rc::new(SemSig::Dyn(dom)))
                }
                StuckFn::Rev(elem) => {
                    let ty = Rc::new(SemSig::Type);
                    let elem_nf = quote_value(q, elem, &ty);
                    let dom = Rc::new(SemSig::Dyn(Rc::new(SemValue::TypeCode(SemTypeCon::List(
                        elem.clone(),
                    )))));
                    (Value::rev(elem_nf), dom)
                }
            };
            let a_nf = quote_value(q, a, &arg_sig);
            (None, Computation::app_p(f_nf, a_nf))
        }
    }
}

/// The value form of a stuck computation for use as a `bind` scrutinee.
fn quote_stuck_as_value(
    q: &mut Quoter,
    stuck: &SemStuck,
    sig0: &Rc<SemSig>,
) -> (Value, Rc<SemSig>) {
    match quote_stuck(q, stuck, sig0) {
        (Some(vn), _) => (vn, sig0.clone()),
        (None, m) => {
            let ann = quote_sig(q, sig0);
            (Value::susp(m, ann), sig0.clone())
        }
    }
}

pub fn quote_sig(q: &mut Quoter, sig: &Rc<SemSig>) -> Signature {
    match &**sig {
        SemSig::Type => Signature::Type,
        SemSig::Dyn(t) => {
            let ty = Rc::new(SemSig::Type);
            Signature::Dyn(quote_value(q, t, &ty))
        }
        SemSig::Pi(a, b) => {
            let a_nf = quote_sig(q, a);
            let fresh = q.fresh(a.clone());
            let b_sem = eval_sig(&b.env.extended(fresh), &b.body, q.phase);
            let b_nf = quote_sig(q, &b_sem);
            q.pop();
            Signature::pi(a_nf, b_nf)
        }
        SemSig::Sigma(a, b) => {
            let a_nf = quote_sig(q, a);
            let fresh = q.fresh(a.clone());
            let b_sem = eval_sig(&b.env.extended(fresh), &b.body, q.phase);
            let b_nf = quote_sig(q, &b_sem);
            q.pop();
            Signature::sigma(a_nf, b_nf)
        }
        SemSig::Ext(base, w) => {
            let base_nf = quote_sig(q, base);
            let saved = q.phase;
            q.phase = Phase::Static;
            let w_nf = quote_value(q, w, base);
            q.phase = saved;
            Signature::ext(base_nf, w_nf)
        }
        SemSig::Cmp(inner) => Signature::cmp(quote_sig(q, inner)),
    }
}

// ---------------------------------------------------------------------------
// Contexts, normalization, equality
// ---------------------------------------------------------------------------

/// Identity environment and level signatures for a typing context.
pub struct NbeCtx {
    pub env: Env,
    pub sigs: Vec<Rc<SemSig>>,
    pub phase: Phase,
}

pub fn nbe_ctx(ctx: &Context) -> NbeCtx {
    let phase = ctx.phase();
    let mut env = Env::new();
    let mut sigs: Vec<Rc<SemSig>> = Vec::new();
    for entry in ctx.entries() {
        if let Entry::Var(sig) = entry {
            let sem = eval_sig(&env, sig, phase);
            let lvl = sigs.len();
            sigs.push(sem);
            env = env.extended(Rc::new(SemValue::Neutral(Rc::new(SemNeutral::var(lvl)))));
        }
    }
    NbeCtx { env, sigs, phase }
}

impl NbeCtx {
    pub fn quoter(&self) -> Quoter {
        Quoter::new(self.sigs.clone(), self.phase)
    }
}

/// β-normal η-long form of a value at a signature.
pub fn normalize_val(ctx: &Context, v: &Value, sig: &Signature) -> Value {
    let nc = nbe_ctx(ctx);
    let sig_sem = eval_sig(&nc.env, sig, nc.phase);
    let sem = eval_value(&nc.env, v, nc.phase);
    let mut q = nc.quoter();
    quote_value(&mut q, &sem, &sig_sem)
}

pub fn normalize_cmp(ctx: &Context, m: &Computation, sig: &Signature) -> Computation {
    let nc = nbe_ctx(ctx);
    let sig_sem = eval_sig(&nc.env, sig, nc.phase);
    let sem = eval_cmp(&nc.env, m, nc.phase);
    let mut q = nc.quoter();
    quote_cmp(&mut q, &sem, &sig_sem)
}

pub fn normalize_sig(ctx: &Context, sig: &Signature) -> Signature {
    let nc = nbe_ctx(ctx);
    let sig_sem = eval_sig(&nc.env, sig, nc.phase);
    let mut q = nc.quoter();
    quote_sig(&mut q, &sig_sem)
}

/// Judgmental equality of values at a signature, at the phase of the
/// context. Statically connected sorts short-circuit under the static open.
pub fn equal_val(ctx: &Context, a: &Value, b: &Value, sig: &Signature) -> bool {
    if ctx.phase() == Phase::Static && matches!(sig, Signature::Dyn(_) | Signature::Cmp(_)) {
        return true;
    }
    normalize_val(ctx, a, sig) == normalize_val(ctx, b, sig)
}

/// Judgmental equality of computations. Under the static open all
/// computations of a signature are identified.
pub fn equal_cmp(ctx: &Context, a: &Computation, b: &Computation, sig: &Signature) -> bool {
    if ctx.phase() == Phase::Static {
        return true;
    }
    normalize_cmp(ctx, a, sig) == normalize_cmp(ctx, b, sig)
}

/// Structural equality of signatures with embedded values compared at the
/// phase of the context.
pub fn equal_sig(ctx: &Context, a: &Signature, b: &Signature) -> bool {
    match (a, b) {
        (Signature::Type, Signature::Type) => true,
        (Signature::Dyn(s), Signature::Dyn(t)) => equal_val(ctx, s, t, &Signature::Type),
        (Signature::Pi(a1, b1), Signature::Pi(a2, b2))
        | (Signature::Sigma(a1, b1), Signature::Sigma(a2, b2)) => {
            equal_sig(ctx, a1, a2) && equal_sig(&ctx.with_var((**a1).clone()), b1, b2)
        }
        (Signature::Ext(s1, v1), Signature::Ext(s2, v2)) => {
            equal_sig(ctx, s1, s2) && equal_val(&ctx.with_static_open(), v1, v2, s1)
        }
        (Signature::Cmp(s1), Signature::Cmp(s2)) => equal_sig(ctx, s1, s2),
        _ => false,
    }
}


#[cfg(test)]
mod property_tests {
    use super::*;
    use crate::oracle::{ESort, Enumerator};
    use crate::syntax::{Signature as S, Value as V};

    #[test]
    fn normalization_is_idempotent_on_enumerated_terms() {
        let ctx = Context::empty();
        let mut en = Enumerator::new();
        let dyn_bool = S::dyn_bool();
        for t in en.closed_values_up_to(ESort::Bool, 7) {
            let nf = normalize_val(&ctx, &t, &dyn_bool);
            assert_eq!(normalize_val(&ctx, &nf, &dyn_bool), nf);
        }
        let cmp = S::cmp(S::dyn_bool());
        for t in en.closed_values_up_to(ESort::CmpBool, 7) {
            let nf = normalize_val(&ctx, &t, &cmp);
            assert_eq!(normalize_val(&ctx, &nf, &cmp), nf);
        }
    }

    #[test]
    fn equality_is_an_equivalence_and_a_congruence() {
        let ctx = Context::empty();
        let mut en = Enumerator::new();
        let dyn_bool = S::dyn_bool();
        let list_bool = S::Dyn(V::list_code(V::bool_code()));
        let terms = en.closed_values_up_to(ESort::Bool, 6);
        for a in &terms {
            assert!(equal_val(&ctx, a, a, &dyn_bool));
        }
        for a in terms.iter().take(20) {
            for b in terms.iter().take(20) {
                let ab = equal_val(&ctx, a, b, &dyn_bool);
                assert_eq!(ab, equal_val(&ctx, b, a, &dyn_bool));
                if ab {
                    // Congruence at cons, pairs, suspensions, and the
                    // conditional.
                    let tail = V::Nil;
                    assert!(equal_val(
                        &ctx,
                        &V::cons(a.clone(), tail.clone()),
                        &V::cons(b.clone(), tail),
                        &list_bool
                    ));
                    assert!(equal_val(
                        &ctx,
                        &V::pair(a.clone(), V::Tt),
                        &V::pair(b.clone(), V::Tt),
                        &S::Dyn(V::prod_code(V::bool_code(), V::bool_code()))
                    ));
                    let m = |x: &V| {
                        V::susp(
                            Computation::if_(
                                x.clone(),
                                Computation::Ret(V::Ff),
                                Computation::Throw,
                            ),
                            S::dyn_bool(),
                        )
                    };
                    assert!(equal_val(&ctx, &m(a), &m(b), &S::cmp(S::dyn_bool())));
                }
            }
        }
        // Transitivity on a spot sample.
        for a in terms.iter().take(12) {
            for b in terms.iter().take(12) {
                for c in terms.iter().take(12) {
                    if equal_val(&ctx, a, b, &dyn_bool) && equal_val(&ctx, b, c, &dyn_bool) {
                        assert!(equal_val(&ctx, a, c, &dyn_bool));
                    }
                }
            }
        }
    }
}
