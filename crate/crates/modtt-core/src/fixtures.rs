//! Hand-built core terms used by test suites: the queue signature, the two
//! list-based implementations, and three behaviorally broken variants of the
//! second one. These are constructed directly in core syntax, independently
//! of the elaborator, so the two transcription routes can be compared.

use crate::syntax::{Computation, Signature, Value};

fn bool_code() -> Value {
    Value::bool_code()
}

fn list_bool() -> Value {
    Value::list_code(Value::bool_code())
}

fn rev_bool(arg: Value) -> Value {
    Value::susp(
        Computation::app_p(Value::rev(bool_code()), arg),
        Signature::Dyn(list_bool()),
    )
}

/// `if b then ret ff else ret tt`, suspended.
fn negate(bit: Value) -> Value {
    Value::susp(
        Computation::if_(
            bit,
            Computation::Ret(Value::Ff),
            Computation::Ret(Value::Tt),
        ),
        Signature::dyn_bool(),
    )
}

/// `Σ t:type. dyn t × dyn (bool × t ⇀ t) × dyn (t ⇀ bool × t)`.
pub fn queue_sig() -> Signature {
    let t0 = Value::Var(0);
    let t1 = Value::Var(1);
    let t2 = Value::Var(2);
    Signature::sigma(
        Signature::Type,
        Signature::sigma(
            Signature::Dyn(t0),
            Signature::sigma(
                Signature::Dyn(Value::parrow_code(
                    Value::prod_code(bool_code(), t1.clone()),
                    t1,
                )),
                Signature::Dyn(Value::parrow_code(
                    t2.clone(),
                    Value::prod_code(bool_code(), t2),
                )),
            ),
        ),
    )
}

/// Queue as a single list, newest element at the head. Removal reverses to
/// reach the oldest element, then restores the remainder's orientation.
pub fn q0_value() -> Value {
    // ins (x, q) = ret (x :: q)
    let ins = Value::pfun(Computation::Ret(Value::cons(
        Value::fst(Value::Var(0)),
        Value::snd(Value::Var(0)),
    )));
    // rem q = bind rq ← rev q in case rq of
    //   nil ⇒ throw | x :: xs ⇒ bind rxs ← rev xs in ret (x, rxs)
    let rem = Value::pfun(Computation::bind(
        rev_bool(Value::Var(0)),
        Computation::case_list(
            Value::Var(0),
            Computation::Throw,
            Computation::bind(
                rev_bool(Value::Var(0)),
                Computation::Ret(Value::pair(Value::Var(2), Value::Var(0))),
            ),
        ),
    ));
    Value::pair(list_bool(), Value::pair(Value::Nil, Value::pair(ins, rem)))
}

/// The documented behavioral mutations of the second implementation. Each
/// preserves the signature but breaks the simulation with the first
/// implementation: the abstract contents of `(fs, rs)` are `fs` followed by
/// `rev rs`, and every mutation falsifies that reading.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Q1Variant {
    Faithful,
    /// Removal returns the negated bit.
    NegatedBit,
    /// The rear list is consumed without reversal when the front is empty.
    DroppedReversal,
    /// The rebuilt queue swaps its front and rear lists after a removal
    /// from the rear.
    SwappedComponents,
}

/// Queue as a front list and a reversed rear list.
pub fn q1_value() -> Value {
    q1_with(Q1Variant::Faithful)
}

pub fn q1_with(variant: Q1Variant) -> Value {
    // ins (x, (fs, rs)) = ret (fs, x :: rs)
    let ins = Value::pfun(Computation::Ret(Value::pair(
        Value::fst(Value::snd(Value::Var(0))),
        Value::cons(
            Value::fst(Value::Var(0)),
            Value::snd(Value::snd(Value::Var(0))),
        ),
    )));

    // Front hit: x = 1, fs' = 0, q = 2.
    let front_hit = match variant {
        Q1Variant::NegatedBit => Computation::bind(
            negate(Value::Var(1)),
            // nx = 0; x = 2, fs' = 1, q = 3.
            Computation::Ret(Value::pair(
                Value::Var(0),
                Value::pair(Value::Var(1), Value::snd(Value::Var(3))),
            )),
        ),
        _ => Computation::Ret(Value::pair(
            Value::Var(1),
            Value::pair(Value::Var(0), Value::snd(Value::Var(2))),
        )),
    };

    // Empty front: consume the rear. q = 0 at the head of the branch.
    let nil_front = match variant {
        Q1Variant::DroppedReversal => Computation::case_list(
            // Forgot to reverse: the head of `rs` is the newest element.
            Value::snd(Value::Var(0)),
            Computation::Throw,
            // x = 1, rs' = 0.
            Computation::Ret(Value::pair(
                Value::Var(1),
                Value::pair(Value::Var(0), Value::Nil),
            )),
        ),
        Q1Variant::SwappedComponents => Computation::bind(
            rev_bool(Value::snd(Value::Var(0))),
            // rr = 0; q = 1.
            Computation::case_list(
                Value::Var(0),
                Computation::Throw,
                // x = 1, rs' = 0: rebuild as (nil, rs') instead of (rs', nil).
                Computation::Ret(Value::pair(
                    Value::Var(1),
                    Value::pair(Value::Nil, Value::Var(0)),
                )),
            ),
        ),
        Q1Variant::NegatedBit => Computation::bind(
            rev_bool(Value::snd(Value::Var(0))),
            Computation::case_list(
                Value::Var(0),
                Computation::Throw,
                // x = 1, rs' = 0.
                Computation::bind(
                    negate(Value::Var(1)),
                    // nx = 0; rs' = 1.
                    Computation::Ret(Value::pair(
                        Value::Var(0),
                        Value::pair(Value::Var(1), Value::Nil),
                    )),
                ),
            ),
        ),
        Q1Variant::Faithful => Computation::bind(
            rev_bool(Value::snd(Value::Var(0))),
            Computation::case_list(
                Value::Var(0),
                Computation::Throw,
                // x = 1, rs' = 0: the rest of the queue is (rs', nil).
                Computation::Ret(Value::pair(
                    Value::Var(1),
                    Value::pair(Value::Var(0), Value::Nil),
                )),
            ),
        ),
    };

    // rem (fs, rs) = case fs of nil ⇒ … | x :: fs' ⇒ …
    let rem = Value::pfun(Computation::case_list(
        Value::fst(Value::Var(0)),
        nil_front,
        front_hit,
    ));

    Value::pair(
        Value::prod_code(list_bool(), list_bool()),
        Value::pair(Value::pair(Value::Nil, Value::Nil), Value::pair(ins, rem)),
    )
}
