//! Big-step evaluator for closed computations in the dynamic fragment, with
//! the exception effect.
//!
//! Evaluation is environment-based with closures; no substitution happens at
//! runtime. Agreement with the equality engine's normal forms is a tested
//! invariant, not a shared code path.

use alloc::rc::Rc;
use alloc::vec::Vec;

use crate::syntax::{Computation, Value};

#[derive(Clone, Debug)]
pub enum RtValue {
    Tt,
    Ff,
    Nil,
    Cons(Rc<RtValue>, Rc<RtValue>),
    Pair(Rc<RtValue>, Rc<RtValue>),
    Lam(RtEnv, Value),
    PFun(RtEnv, Computation),
    Susp(RtEnv, Computation),
    /// Type components are inert at runtime; kept closed over their
    /// environment for readback.
    Code(RtEnv, Value),
    Rev,
}

#[derive(Clone, Debug, Default)]
pub struct RtEnv {
    values: Vec<Rc<RtValue>>,
}

impl RtEnv {
    pub fn new() -> RtEnv {
        RtEnv { values: Vec::new() }
    }

    fn get(&self, index: usize) -> Option<&Rc<RtValue>> {
        let len = self.values.len();
        if index < len {
            Some(&self.values[len - 1 - index])
        } else {
            None
        }
    }

    fn extended(&self, v: Rc<RtValue>) -> RtEnv {
        let mut values = self.values.clone();
        values.push(v);
        RtEnv { values }
    }
}

/// Result of running a closed computation.
#[derive(Clone, Debug)]
pub enum Outcome {
    Returned(Rc<RtValue>),
    Threw,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunError {
    FuelExhausted,
    /// A closed, well-typed computation cannot get stuck; this reports a
    /// corpus or harness bug, never a language feature.
    Stuck(&'static str),
}

pub const DEFAULT_FUEL: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FuelBudget(pub u64);

impl Default for FuelBudget {
    fn default() -> FuelBudget {
        FuelBudget(DEFAULT_FUEL)
    }
}

struct Fuel {
    remaining: u64,
}

impl Fuel {
    fn tick(&mut self) -> Result<(), RunError> {
        if self.remaining == 0 {
            return Err(RunError::FuelExhausted);
        }
        self.remaining -= 1;
        Ok(())
    }
}

/// Run a closed computation.
pub fn run_cmp(m: &Computation, fuel: FuelBudget) -> Result<Outcome, RunError> {
    let mut fuel = Fuel { remaining: fuel.0 };
    rt_cmp(&RtEnv::new(), m, &mut fuel)
}

fn rt_cmp(env: &RtEnv, m: &Computation, fuel: &mut Fuel) -> Result<Outcome, RunError> {
    fuel.tick()?;
    match m {
        Computation::Ret(v) => Ok(Outcome::Returned(rt_val(env, v, fuel)?)),
        Computation::Throw => Ok(Outcome::Threw),
        Computation::Bind(scrut, body) => match &*rt_val(env, scrut, fuel)? {
            RtValue::Susp(senv, sm) => match rt_cmp(senv, sm, fuel)? {
                Outcome::Returned(x) => rt_cmp(&env.extended(x), body, fuel),
                Outcome::Threw => Ok(Outcome::Threw),
            },
            _ => Err(RunError::Stuck("bind scrutinee is not a suspension")),
        },
        Computation::If(b, m1, m2) => match &*rt_val(env, b, fuel)? {
            RtValue::Tt => rt_cmp(env, m1, fuel),
            RtValue::Ff => rt_cmp(env, m2, fuel),
            _ => Err(RunError::Stuck("if condition is not a boolean")),
        },
        Computation::CaseList(s, mn, mc) => match &*rt_val(env, s, fuel)? {
            RtValue::Nil => rt_cmp(env, mn, fuel),
            RtValue::Cons(h, t) => {
                let env2 = env.extended(h.clone()).extended(t.clone());
                rt_cmp(&env2, mc, fuel)
            }
            _ => Err(RunError::Stuck("case scrutinee is not a list")),
        },
        Computation::AppP(f, a) => {
            let fv = rt_val(env, f, fuel)?;
            let av = rt_val(env, a, fuel)?;
            match &*fv {
                RtValue::PFun(fenv, body) => rt_cmp(&fenv.extended(av), body, fuel),
                RtValue::Rev => {
                    let mut items = Vec::new();
                    let mut cur = av;
                    loop {
                        match &*cur.clone() {
                            RtValue::Nil => break,
                            RtValue::Cons(h, t) => {
                                items.push(h.clone());
                                cur = t.clone();
                            }
                            _ => return Err(RunError::Stuck("rev argument is not a list")),
                        }
                    }
                    let mut out = Rc::new(RtValue::Nil);
                    for item in items {
                        out = Rc::new(RtValue::Cons(item, out));
                    }
                    Ok(Outcome::Returned(out))
                }
                _ => Err(RunError::Stuck(
                    "application head is not a partial function",
                )),
            }
        }
    }
}

fn rt_val(env: &RtEnv, v: &Value, fuel: &mut Fuel) -> Result<Rc<RtValue>, RunError> {
    fuel.tick()?;
    match v {
        Value::Var(i) => env
            .get(*i)
            .cloned()
            .ok_or(RunError::Stuck("unbound variable at runtime")),
        Value::Lam(b) => Ok(Rc::new(RtValue::Lam(env.clone(), (**b).clone()))),
        Value::App(f, a) => {
            let fv = rt_val(env, f, fuel)?;
            let av = rt_val(env, a, fuel)?;
            match &*fv {
                RtValue::Lam(fenv, body) => rt_val(&fenv.extended(av), body, fuel),
                _ => Err(RunError::Stuck("application head is not a functor")),
            }
        }
        Value::Pair(a, b) => Ok(Rc::new(RtValue::Pair(
            rt_val(env, a, fuel)?,
            rt_val(env, b, fuel)?,
        ))),
        Value::Fst(p) => match &*rt_val(env, p, fuel)? {
            RtValue::Pair(a, _) => Ok(a.clone()),
            _ => Err(RunError::Stuck("fst of a non-pair")),
        },
        Value::Snd(p) => match &*rt_val(env, p, fuel)? {
            RtValue::Pair(_, b) => Ok(b.clone()),
            _ => Err(RunError::Stuck("snd of a non-pair")),
        },
        // Extent wrappers are static bookkeeping; at runtime only the
        // payload exists.
        Value::InExt(_, w) => rt_val(env, w, fuel),
        Value::OutExt(u) => rt_val(env, u, fuel),
        Value::Susp(m, _) => Ok(Rc::new(RtValue::Susp(env.clone(), (**m).clone()))),
        Value::Tt => Ok(Rc::new(RtValue::Tt)),
        Value::Ff => Ok(Rc::new(RtValue::Ff)),
        Value::PFun(m) => Ok(Rc::new(RtValue::PFun(env.clone(), (**m).clone()))),
        Value::Nil => Ok(Rc::new(RtValue::Nil)),
        Value::Cons(h, t) => Ok(Rc::new(RtValue::Cons(
            rt_val(env, h, fuel)?,
            rt_val(env, t, fuel)?,
        ))),
        Value::TypeCode(_) => Ok(Rc::new(RtValue::Code(env.clone(), v.clone()))),
        Value::Star => Err(RunError::Stuck(
            "the connectivity point has no runtime meaning",
        )),
        Value::Rev(_) => Ok(Rc::new(RtValue::Rev)),
    }
}

/// Canonical form of a closed value.
pub fn eval_closed_val(v: &Value, fuel: FuelBudget) -> Result<Rc<RtValue>, RunError> {
    let mut fuel = Fuel { remaining: fuel.0 };
    rt_val(&RtEnv::new(), v, &mut fuel)
}

/// Read a first-order canonical value (booleans, lists, pairs of those) back
/// into syntax. Closures and codes have no first-order readback.
pub fn readback_first_order(v: &RtValue) -> Option<Value> {
    match v {
        RtValue::Tt => Some(Value::Tt),
        RtValue::Ff => Some(Value::Ff),
        RtValue::Nil => Some(Value::Nil),
        RtValue::Cons(h, t) => Some(Value::cons(
            readback_first_order(h)?,
            readback_first_order(t)?,
        )),
        RtValue::Pair(a, b) => Some(Value::pair(
            readback_first_order(a)?,
            readback_first_order(b)?,
        )),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservationSortError;

/// Observational agreement at `dyn bool`: both throw, or both return the
/// same boolean literal.
pub fn observe_eq(a: &Outcome, b: &Outcome) -> Result<bool, ObservationSortError> {
    match (a, b) {
        (Outcome::Threw, Outcome::Threw) => Ok(true),
        (Outcome::Threw, Outcome::Returned(_)) | (Outcome::Returned(_), Outcome::Threw) => {
            Ok(false)
        }
        (Outcome::Returned(x), Outcome::Returned(y)) => match (&**x, &**y) {
            (RtValue::Tt, RtValue::Tt) | (RtValue::Ff, RtValue::Ff) => Ok(true),
            (RtValue::Tt, RtValue::Ff) | (RtValue::Ff, RtValue::Tt) => Ok(false),
            _ => Err(ObservationSortError),
        },
    }
}
