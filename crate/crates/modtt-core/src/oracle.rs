//! An independent decision procedure for judgmental equality on small
//! terms, used only by test suites: equality is decided by exhaustively
//! rewriting with the β-equations of the theory (function, pair, and extent
//! β; monad unit, associativity, and throw propagation; both conditional
//! branches; list case analysis; list reversal) and comparing the resulting
//! normal forms syntactically. The implementation deliberately shares
//! nothing with the semantic-domain engine except the term syntax and
//! substitution.
//!
//! Also hosts the typed enumerator of closed program terms that the
//! agreement suite feeds to both engines.

use alloc::collections::BTreeMap;
use alloc::rc::Rc;
use alloc::vec::Vec;

use crate::syntax::{Computation, Signature, Value};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleTimeout;

const DEFAULT_STEPS: usize = 100_000;

/// One leftmost-outermost rewriting step on a value; `None` when normal.
fn step_value(v: &Value) -> Option<Value> {
    match v {
        Value::App(f, a) => {
            if let Value::Lam(body) = &**f {
                return Some(body.subst(a, 0));
            }
            step_under_2(f, a, Value::app)
        }
        Value::Fst(p) => {
            if let Value::Pair(a, _) = &**p {
                return Some((**a).clone());
            }
            step_value(p).map(Value::fst)
        }
        Value::Snd(p) => {
            if let Value::Pair(_, b) = &**p {
                return Some((**b).clone());
            }
            step_value(p).map(Value::snd)
        }
        Value::OutExt(u) => {
            if let Value::InExt(_, w) = &**u {
                return Some((**w).clone());
            }
            step_value(u).map(Value::out_ext)
        }
        Value::Lam(b) => step_value(b).map(Value::lam),
        Value::Pair(a, b) => step_under_2(a, b, Value::pair),
        Value::InExt(a, b) => step_under_2(a, b, Value::in_ext),
        Value::Cons(a, b) => step_under_2(a, b, Value::cons),
        Value::Susp(m, ann) => step_cmp(m).map(|m2| Value::susp(m2, (**ann).clone())),
        Value::PFun(m) => step_cmp(m).map(Value::pfun),
        Value::Rev(t) => step_value(t).map(Value::rev),
        _ => None,
    }
}

fn step_under_2(a: &Value, b: &Value, rebuild: impl Fn(Value, Value) -> Value) -> Option<Value> {
    if let Some(a2) = step_value(a) {
        return Some(rebuild(a2, b.clone()));
    }
    step_value(b).map(|b2| rebuild(a.clone(), b2))
}

fn as_literal_list(v: &Value) -> Option<Vec<Value>> {
    let mut items = Vec::new();
    let mut cur = v;
    loop {
        match cur {
            Value::Nil => return Some(items),
            Value::Cons(h, t) => {
                items.push((**h).clone());
                cur = t;
            }
            _ => return None,
        }
    }
}

fn step_cmp(m: &Computation) -> Option<Computation> {
    match m {
        Computation::Ret(v) => step_value(v).map(Computation::Ret),
        Computation::Throw => None,
        Computation::Bind(scrut, body) => {
            if let Value::Susp(inner, ann) = scrut {
                match &**inner {
                    // bind x ← ⟨ret V⟩ in M  ≡  M[V]
                    Computation::Ret(v) => return Some(body.subst(v, 0)),
                    // The effect is exceptional: it discards continuations.
                    Computation::Throw => return Some(Computation::Throw),
                    // bind x ← ⟨bind y ← V in G⟩ in F
                    //   ≡  bind y ← V in bind x ← ⟨G⟩ in F
                    Computation::Bind(v, g) => {
                        return Some(Computation::bind(
                            v.clone(),
                            Computation::bind(
                                Value::susp((**g).clone(), ann.shifted(1, 0)),
                                body.shifted(1, 1),
                            ),
                        ));
                    }
                    _ => {}
                }
            }
            if let Some(s2) = step_value(scrut) {
                return Some(Computation::bind(s2, (**body).clone()));
            }
            step_cmp(body).map(|b2| Computation::bind(scrut.clone(), b2))
        }
        Computation::If(b, m1, m2) => match b {
            Value::Tt => Some((**m1).clone()),
            Value::Ff => Some((**m2).clone()),
            _ => {
                if let Some(b2) = step_value(b) {
                    return Some(Computation::if_(b2, (**m1).clone(), (**m2).clone()));
                }
                if let Some(m1b) = step_cmp(m1) {
                    return Some(Computation::if_(b.clone(), m1b, (**m2).clone()));
                }
                step_cmp(m2).map(|m2b| Computation::if_(b.clone(), (**m1).clone(), m2b))
            }
        },
        Computation::CaseList(s, mn, mc) => match s {
            Value::Nil => Some((**mn).clone()),
            Value::Cons(h, t) => Some(mc.subst(t, 0).subst(h, 0)),
            _ => {
                if let Some(s2) = step_value(s) {
                    return Some(Computation::case_list(s2, (**mn).clone(), (**mc).clone()));
                }
                if let Some(mnb) = step_cmp(mn) {
                    return Some(Computation::case_list(s.clone(), mnb, (**mc).clone()));
                }
                step_cmp(mc).map(|mcb| Computation::case_list(s.clone(), (**mn).clone(), mcb))
            }
        },
        Computation::AppP(f, a) => {
            match f {
                Value::PFun(body) => return Some(body.subst(a, 0)),
                Value::Rev(_) => {
                    if let Some(items) = as_literal_list(a) {
                        let mut out = Value::Nil;
                        for item in items {
                            out = Value::cons(item, out);
                        }
                        return Some(Computation::Ret(out));
                    }
                }
                _ => {}
            }
            if let Some(f2) = step_value(f) {
                return Some(Computation::app_p(f2, a.clone()));
            }
            step_value(a).map(|a2| Computation::app_p(f.clone(), a2))
        }
    }
}

pub fn rewrite_value_nf(v: &Value, budget: usize) -> Result<Value, OracleTimeout> {
    let mut cur = v.clone();
    for _ in 0..budget {
        match step_value(&cur) {
            Some(next) => cur = next,
            None => return Ok(cur),
        }
    }
    Err(OracleTimeout)
}

pub fn rewrite_cmp_nf(m: &Computation, budget: usize) -> Result<Computation, OracleTimeout> {
    let mut cur = m.clone();
    for _ in 0..budget {
        match step_cmp(&cur) {
            Some(next) => cur = next,
            None => return Ok(cur),
        }
    }
    Err(OracleTimeout)
}

/// Equality by exhaustive rewriting: both sides reduce to rewriting normal
/// form and are compared syntactically. Complete for the closed program
/// fragment the enumerator produces (booleans and suspended boolean
/// computations), where β-normal closed terms are canonical.
pub fn rewrite_oracle_equal_val(a: &Value, b: &Value) -> Result<bool, OracleTimeout> {
    Ok(rewrite_value_nf(a, DEFAULT_STEPS)? == rewrite_value_nf(b, DEFAULT_STEPS)?)
}

pub fn rewrite_oracle_equal_cmp(a: &Computation, b: &Computation) -> Result<bool, OracleTimeout> {
    Ok(rewrite_cmp_nf(a, DEFAULT_STEPS)? == rewrite_cmp_nf(b, DEFAULT_STEPS)?)
}

/// Context- and sort-aware entry point: under the static open, statically
/// connected sorts collapse before any rewriting happens.
pub fn rewrite_oracle_equal(
    ctx: &crate::ctx::Context,
    a: &Value,
    b: &Value,
    sig: &Signature,
) -> Result<bool, OracleTimeout> {
    if ctx.phase() == crate::ctx::Phase::Static
        && matches!(sig, Signature::Dyn(_) | Signature::Cmp(_))
    {
        return Ok(true);
    }
    rewrite_oracle_equal_val(a, b)
}

// ---------------------------------------------------------------------------
// Typed enumeration of closed program terms
// ---------------------------------------------------------------------------

/// Sorts of the enumerated fragment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ESort {
    /// `dyn bool`
    Bool,
    /// `dyn (list bool)`
    ListBool,
    /// `dyn (bool × bool)`
    ProdBB,
    /// `dyn (bool ⇀ bool)`
    FunBB,
    /// `○ dyn bool`
    CmpBool,
    /// `(dyn bool){∗}`
    ExtBool,
}

impl ESort {
    pub fn signature(self) -> Signature {
        match self {
            ESort::Bool => Signature::dyn_bool(),
            ESort::ListBool => Signature::Dyn(Value::list_code(Value::bool_code())),
            ESort::ProdBB => {
                Signature::Dyn(Value::prod_code(Value::bool_code(), Value::bool_code()))
            }
            ESort::FunBB => {
                Signature::Dyn(Value::parrow_code(Value::bool_code(), Value::bool_code()))
            }
            ESort::CmpBool => Signature::cmp(Signature::dyn_bool()),
            ESort::ExtBool => Signature::ext(Signature::dyn_bool(), Value::Star),
        }
    }
}

type Ctx = Vec<ESort>;

type ValKey = (Ctx, ESort, usize);
type CmpKey = (Ctx, usize);

/// Enumerator with memoization. Size counts constructor nodes; suspension
/// annotations are free. Computations are enumerated at result sort
/// `dyn bool` only, which keeps the fragment closed under its own binders.
pub struct Enumerator {
    vals: BTreeMap<ValKey, Rc<Vec<Value>>>,
    cmps: BTreeMap<CmpKey, Rc<Vec<Computation>>>,
}

impl Default for Enumerator {
    fn default() -> Enumerator {
        Enumerator::new()
    }
}

impl Enumerator {
    pub fn new() -> Enumerator {
        Enumerator {
            vals: BTreeMap::new(),
            cmps: BTreeMap::new(),
        }
    }

    /// Closed values of the given sort with exactly `size` nodes.
    pub fn values(&mut self, ctx: &Ctx, sort: ESort, size: usize) -> Rc<Vec<Value>> {
        let key = (ctx.clone(), sort, size);
        if let Some(hit) = self.vals.get(&key) {
            return hit.clone();
        }
        let mut out = Vec::new();
        if size >= 1 {
            // Variables of the sort.
            for (idx, entry) in ctx.iter().rev().enumerate() {
                if *entry == sort && size == 1 {
                    out.push(Value::Var(idx));
                }
            }
            match sort {
                ESort::Bool => {
                    if size == 1 {
                        out.push(Value::Tt);
                        out.push(Value::Ff);
                    }
                    for p in self.values(ctx, ESort::ProdBB, size - 1).iter() {
                        out.push(Value::fst(p.clone()));
                        out.push(Value::snd(p.clone()));
                    }
                    for e in self.values(ctx, ESort::ExtBool, size - 1).iter() {
                        out.push(Value::out_ext(e.clone()));
                    }
                }
                ESort::ListBool => {
                    if size == 1 {
                        out.push(Value::Nil);
                    }
                    for (sh, st) in splits(size - 1) {
                        for h in self.values(ctx, ESort::Bool, sh).iter() {
                            for t in self.values(ctx, ESort::ListBool, st).iter() {
                                out.push(Value::cons(h.clone(), t.clone()));
                            }
                        }
                    }
                }
                ESort::ProdBB => {
                    for (sa, sb) in splits(size - 1) {
                        for a in self.values(ctx, ESort::Bool, sa).iter() {
                            for b in self.values(ctx, ESort::Bool, sb).iter() {
                                out.push(Value::pair(a.clone(), b.clone()));
                            }
                        }
                    }
                }
                ESort::FunBB => {
                    let mut ctx2 = ctx.clone();
                    ctx2.push(ESort::Bool);
                    for m in self.computations(&ctx2, size - 1).iter() {
                        out.push(Value::pfun(m.clone()));
                    }
                }
                ESort::CmpBool => {
                    for m in self.computations(ctx, size - 1).iter() {
                        out.push(Value::susp(m.clone(), Signature::dyn_bool()));
                    }
                }
                ESort::ExtBool => {
                    // in{∗}(w): the side condition holds for every boolean
                    // payload, since everything collapses under the static
                    // open. The token costs one node.
                    if size >= 2 {
                        for w in self.values(ctx, ESort::Bool, size - 2).iter() {
                            out.push(Value::in_ext(Value::Star, w.clone()));
                        }
                    }
                }
            }
        }
        let rc = Rc::new(out);
        self.vals.insert(key, rc.clone());
        rc
    }

    /// Closed computations of result sort `dyn bool` with exactly `size`
    /// nodes.
    pub fn computations(&mut self, ctx: &Ctx, size: usize) -> Rc<Vec<Computation>> {
        let key = (ctx.clone(), size);
        if let Some(hit) = self.cmps.get(&key) {
            return hit.clone();
        }
        let mut out = Vec::new();
        if size >= 1 {
            if size == 1 {
                out.push(Computation::Throw);
            }
            for v in self.values(ctx, ESort::Bool, size - 1).iter() {
                out.push(Computation::Ret(v.clone()));
            }
            // bind x ← V in M with V : ○ dyn bool
            {
                let mut ctx2 = ctx.clone();
                ctx2.push(ESort::Bool);
                for (sv, sm) in splits(size - 1) {
                    for v in self.values(ctx, ESort::CmpBool, sv).iter() {
                        for m in self.computations(&ctx2, sm).iter() {
                            out.push(Computation::bind(v.clone(), m.clone()));
                        }
                    }
                }
            }
            // if
            for (sb, sbr) in splits(size - 1) {
                for b in self.values(ctx, ESort::Bool, sb).iter() {
                    for (s1, s2) in splits(sbr) {
                        for m1 in self.computations(ctx, s1).iter() {
                            for m2 in self.computations(ctx, s2).iter() {
                                out.push(Computation::if_(b.clone(), m1.clone(), m2.clone()));
                            }
                        }
                    }
                }
            }
            // case
            {
                let mut ctx2 = ctx.clone();
                ctx2.push(ESort::Bool);
                ctx2.push(ESort::ListBool);
                for (ss, sbr) in splits(size - 1) {
                    for s in self.values(ctx, ESort::ListBool, ss).iter() {
                        for (s1, s2) in splits(sbr) {
                            for mn in self.computations(ctx, s1).iter() {
                                for mc in self.computations(&ctx2, s2).iter() {
                                    out.push(Computation::case_list(
                                        s.clone(),
                                        mn.clone(),
                                        mc.clone(),
                                    ));
                                }
                            }
                        }
                    }
                }
            }
            // application
            for (sf, sa) in splits(size - 1) {
                for f in self.values(ctx, ESort::FunBB, sf).iter() {
                    for a in self.values(ctx, ESort::Bool, sa).iter() {
                        out.push(Computation::app_p(f.clone(), a.clone()));
                    }
                }
            }
        }
        let rc = Rc::new(out);
        self.cmps.insert(key, rc.clone());
        rc
    }

    /// All closed values of the sort up to the size bound.
    pub fn closed_values_up_to(&mut self, sort: ESort, max_size: usize) -> Vec<Value> {
        let ctx = Vec::new();
        let mut out = Vec::new();
        for size in 1..=max_size {
            out.extend(self.values(&ctx, sort, size).iter().cloned());
        }
        out
    }
}

/// Splits of `n` into two positive parts.
fn splits(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    if n >= 2 {
        for a in 1..n {
            out.push((a, n - a));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctx::Context;
    use crate::nbe::{equal_cmp, equal_val, normalize_cmp, normalize_val};
    use crate::syntax::{Computation as C, Signature as S, Value as V};

    #[test]
    fn bind_associativity_instance() {
        // bind x ← ⟨bind y ← ⟨ret tt⟩ in ret y⟩ in ret x rewrites to ret tt
        // and is oracle-equal to its re-associated form.
        let inner = C::bind(V::susp(C::Ret(V::Tt), S::dyn_bool()), C::Ret(V::Var(0)));
        let lhs = C::bind(V::susp(inner, S::dyn_bool()), C::Ret(V::Var(0)));
        let rhs = C::bind(
            V::susp(C::Ret(V::Tt), S::dyn_bool()),
            C::bind(V::susp(C::Ret(V::Var(0)), S::dyn_bool()), C::Ret(V::Var(0))),
        );
        assert!(rewrite_oracle_equal_cmp(&lhs, &rhs).unwrap());
        assert_eq!(rewrite_cmp_nf(&lhs, 1000).unwrap(), C::Ret(V::Tt));
    }

    #[test]
    fn reflexivity_on_enumerated_terms() {
        let mut en = Enumerator::new();
        for t in en.closed_values_up_to(ESort::Bool, 5) {
            assert!(rewrite_oracle_equal_val(&t, &t).unwrap());
        }
    }

    #[test]
    fn extent_beta_by_rewriting() {
        let v = V::out_ext(V::in_ext(V::Star, V::Tt));
        assert_eq!(rewrite_value_nf(&v, 100).unwrap(), V::Tt);
    }

    #[test]
    fn agreement_with_nbe_on_small_booleans() {
        // Every enumerated term maps to a (rewriting NF, semantic NF) pair;
        // agreement means the two keys induce the same partition.
        let ctx = Context::empty();
        let mut en = Enumerator::new();
        let mut pairs: Vec<(Value, Value)> = Vec::new();
        for t in en.closed_values_up_to(ESort::Bool, 8) {
            let o = rewrite_value_nf(&t, 10_000).unwrap();
            let n = normalize_val(&ctx, &t, &S::dyn_bool());
            pairs.push((o, n));
        }
        assert_partition_agreement(&pairs);
    }

    #[test]
    fn spot_checks_against_equal_val() {
        let ctx = Context::empty();
        let mut en = Enumerator::new();
        let terms = en.closed_values_up_to(ESort::Bool, 6);
        // Quadratic comparison on a small slice.
        let slice: Vec<&Value> = terms.iter().take(60).collect();
        for a in &slice {
            for b in &slice {
                let oracle = rewrite_oracle_equal_val(a, b).unwrap();
                let nbe = equal_val(&ctx, a, b, &S::dyn_bool());
                assert_eq!(oracle, nbe, "disagree on {:?} vs {:?}", a, b);
            }
        }
    }

    #[test]
    fn computation_agreement_smoke() {
        let ctx = Context::empty();
        let mut en = Enumerator::new();
        let terms = en.closed_values_up_to(ESort::CmpBool, 6);
        let sig = S::cmp(S::dyn_bool());
        let slice: Vec<&Value> = terms.iter().take(50).collect();
        for a in &slice {
            for b in &slice {
                let oracle = rewrite_oracle_equal_val(a, b).unwrap();
                let nbe = equal_val(&ctx, a, b, &sig);
                assert_eq!(oracle, nbe, "disagree on {:?} vs {:?}", a, b);
            }
        }
        // Throw propagation agrees too.
        let m = C::bind(V::susp(C::Throw, S::dyn_bool()), C::Ret(V::Var(0)));
        assert_eq!(rewrite_cmp_nf(&m, 100).unwrap(), C::Throw);
        assert_eq!(normalize_cmp(&ctx, &m, &S::dyn_bool()), C::Throw);
        assert!(equal_cmp(&ctx, &m, &C::Throw, &S::dyn_bool()));
    }

    /// The two normal-form keys must classify identically: each oracle NF
    /// corresponds to exactly one semantic NF and vice versa.
    pub(crate) fn assert_partition_agreement(pairs: &[(Value, Value)]) {
        use alloc::collections::BTreeMap;
        use alloc::format;
        let mut fwd: BTreeMap<alloc::string::String, alloc::string::String> = BTreeMap::new();
        let mut bwd: BTreeMap<alloc::string::String, alloc::string::String> = BTreeMap::new();
        for (o, n) in pairs {
            let ok = format!("{:?}", o);
            let nk = format!("{:?}", n);
            if let Some(prev) = fwd.insert(ok.clone(), nk.clone()) {
                assert_eq!(prev, nk, "oracle class split by semantic engine");
            }
            if let Some(prev) = bwd.insert(nk, ok.clone()) {
                assert_eq!(prev, ok, "semantic class split by oracle");
            }
        }
    }
}
