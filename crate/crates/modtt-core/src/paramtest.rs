//! Desk-scale representation independence testing.
//!
//! Clients are closed functors `Π X:σ. ○ dyn bool` compiled from abstract
//! operation scripts against the queue interface. Two implementations agree
//! on a client when running the applied client produces observationally
//! equal outcomes: the same boolean literal, or a throw on both sides.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::check::{check_val, TypeError};
use crate::ctx::Context;
use crate::runtime::{observe_eq, run_cmp, FuelBudget, Outcome, RunError};
use crate::syntax::{Computation, Signature, Value};

/// One abstract queue operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QueueOp {
    Ins(bool),
    Rem,
}

/// How the bits observed by removals feed the final boolean.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FoldMode {
    /// The bit of the last removal; `ff` when the script has no removals.
    LastBit,
    /// Exclusive or of all removed bits.
    XorBits,
    /// Whether the script would remove from an empty queue, decided by
    /// script-level counting: the core has no handler, so the fatal removal
    /// is not executed and the verdict is returned as a literal.
    ObserveThrow,
}

impl FoldMode {
    pub fn name(self) -> &'static str {
        match self {
            FoldMode::LastBit => "last-bit",
            FoldMode::XorBits => "xor-bits",
            FoldMode::ObserveThrow => "observe-throw",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpScript {
    pub ops: Vec<QueueOp>,
    pub fold: FoldMode,
}

impl OpScript {
    pub fn describe(&self) -> String {
        let mut out = String::new();
        for op in &self.ops {
            match op {
                QueueOp::Ins(true) => out.push_str("I1 "),
                QueueOp::Ins(false) => out.push_str("I0 "),
                QueueOp::Rem => out.push_str("R "),
            }
        }
        let _ = write!(out, "[{}]", self.fold.name());
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    HandWritten,
    Generated { seed: u64 },
}

/// A closed client of the queue interface together with where it came from.
#[derive(Clone, Debug)]
pub struct ClientProgram {
    pub value: Value,
    pub provenance: Provenance,
}

/// splitmix64; fixed here so that generated campaigns are reproducible
/// across platforms and releases.
#[derive(Clone, Debug)]
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }
}

/// Deterministic script generation: the same seed gives the same script.
/// Length is uniform in `1..=max_len`; each operation is an insertion of a
/// random bit or a removal with equal probability; the fold mode is drawn
/// uniformly.
pub fn gen_script(seed: u64, max_len: usize) -> OpScript {
    debug_assert!(max_len >= 1);
    let mut rng = SplitMix(seed);
    let len = 1 + (rng.below(max_len as u64) as usize);
    let mut ops = Vec::with_capacity(len);
    for _ in 0..len {
        if rng.below(2) == 0 {
            ops.push(QueueOp::Ins(rng.below(2) == 0));
        } else {
            ops.push(QueueOp::Rem);
        }
    }
    let fold = match rng.below(3) {
        0 => FoldMode::LastBit,
        1 => FoldMode::XorBits,
        _ => FoldMode::ObserveThrow,
    };
    OpScript { ops, fold }
}

/// All scripts with at most `max_len` operations, under every fold mode.
pub fn exhaustive_scripts(max_len: usize) -> Vec<OpScript> {
    let mut seqs: Vec<Vec<QueueOp>> = alloc::vec![Vec::new()];
    let mut frontier: Vec<Vec<QueueOp>> = alloc::vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for seq in &frontier {
            for op in [QueueOp::Ins(false), QueueOp::Ins(true), QueueOp::Rem] {
                let mut s = seq.clone();
                s.push(op);
                next.push(s);
            }
        }
        seqs.extend(next.iter().cloned());
        frontier = next;
    }
    let mut out = Vec::with_capacity(seqs.len() * 3);
    for seq in seqs {
        for fold in [FoldMode::LastBit, FoldMode::XorBits, FoldMode::ObserveThrow] {
            out.push(OpScript {
                ops: seq.clone(),
                fold,
            });
        }
    }
    out
}

// Projections out of the queue interface Σ t. (emp, (ins, rem)), applied to
// the functor argument at de Bruijn index `q`.
fn q_type(q: usize) -> Value {
    Value::fst(Value::Var(q))
}

fn q_emp(q: usize) -> Value {
    Value::fst(Value::snd(Value::Var(q)))
}

fn q_ins(q: usize) -> Value {
    Value::fst(Value::snd(Value::snd(Value::Var(q))))
}

fn q_rem(q: usize) -> Value {
    Value::snd(Value::snd(Value::snd(Value::Var(q))))
}

fn lit(b: bool) -> Value {
    if b {
        Value::Tt
    } else {
        Value::Ff
    }
}

/// xor as a computation: `if a then (if b then ff else tt) else ret b`.
fn xor_cmp(a: Value, b: Value) -> Computation {
    Computation::if_(
        a,
        Computation::if_(
            b.clone(),
            Computation::Ret(Value::Ff),
            Computation::Ret(Value::Tt),
        ),
        Computation::Ret(b),
    )
}

enum FinalObservable {
    Literal(bool),
    /// The last removed bit, tracked in `acc`.
    LastBit,
    /// The xor accumulator, tracked in `acc`.
    Accumulator,
}

/// Compile a script to a closed client `λQ. ⟨…⟩`.
///
/// The queue state threads through binds. For `ObserveThrow` the script is
/// simulated by counting insertions against removals: the executed prefix
/// stops before a fatal removal and the verdict is returned as a literal,
/// so the no-throw path is syntactically guaranteed. The other modes
/// compile every operation faithfully, so underflowing scripts genuinely
/// throw on both sides.
pub fn compile_script(script: &OpScript) -> ClientProgram {
    let (ops, final_obs) = match script.fold {
        FoldMode::ObserveThrow => {
            let mut depth = 0usize;
            let mut kept = Vec::new();
            let mut threw = false;
            for op in &script.ops {
                match op {
                    QueueOp::Ins(_) => {
                        depth += 1;
                        kept.push(*op);
                    }
                    QueueOp::Rem => {
                        if depth == 0 {
                            threw = true;
                            break;
                        }
                        depth -= 1;
                        kept.push(*op);
                    }
                }
            }
            (kept, FinalObservable::Literal(threw))
        }
        FoldMode::LastBit => (script.ops.clone(), FinalObservable::LastBit),
        FoldMode::XorBits => (script.ops.clone(), FinalObservable::Accumulator),
    };
    // Inside the lambda the argument is index 0 and the queue starts as
    // `emp`; each bind pushes the argument one binder deeper.
    let body = build_ops(&ops, 0, 0, q_emp(0), None, &final_obs);
    ClientProgram {
        value: Value::lam(Value::susp(body, Signature::dyn_bool())),
        provenance: Provenance::HandWritten,
    }
}

/// Build the operation chain. `arg` is the functor argument's index at the
/// current depth, `queue` the current queue expression at that depth, and
/// `acc` the current observable value when one exists.
fn build_ops(
    ops: &[QueueOp],
    at: usize,
    arg: usize,
    queue: Value,
    acc: Option<Value>,
    final_obs: &FinalObservable,
) -> Computation {
    if at == ops.len() {
        return match final_obs {
            FinalObservable::Literal(b) => Computation::Ret(lit(*b)),
            FinalObservable::LastBit | FinalObservable::Accumulator => {
                Computation::Ret(acc.unwrap_or(Value::Ff))
            }
        };
    }
    match ops[at] {
        QueueOp::Ins(bit) => {
            let call = Computation::app_p(q_ins(arg), Value::pair(lit(bit), queue));
            let ann = Signature::Dyn(q_type(arg));
            let rest = build_ops(
                ops,
                at + 1,
                arg + 1,
                Value::Var(0),
                acc.map(|a| a.shifted(1, 0)),
                final_obs,
            );
            Computation::bind(Value::susp(call, ann), rest)
        }
        QueueOp::Rem => {
            let call = Computation::app_p(q_rem(arg), queue);
            let ann = Signature::Dyn(Value::prod_code(Value::bool_code(), q_type(arg)));
            match final_obs {
                FinalObservable::Accumulator => {
                    let old_acc = acc.unwrap_or(Value::Ff).shifted(1, 0);
                    let xor = xor_cmp(old_acc, Value::fst(Value::Var(0)));
                    let rest = build_ops(
                        ops,
                        at + 1,
                        arg + 2,
                        Value::snd(Value::Var(1)),
                        Some(Value::Var(0)),
                        final_obs,
                    );
                    Computation::bind(
                        Value::susp(call, ann),
                        Computation::bind(Value::susp(xor, Signature::dyn_bool()), rest),
                    )
                }
                _ => {
                    let rest = build_ops(
                        ops,
                        at + 1,
                        arg + 1,
                        Value::snd(Value::Var(0)),
                        Some(Value::fst(Value::Var(0))),
                        final_obs,
                    );
                    Computation::bind(Value::susp(call, ann), rest)
                }
            }
        }
    }
}

/// The client signature `Π X:σ. ○ dyn bool`.
pub fn client_sig(iface: &Signature) -> Signature {
    Signature::pi(iface.clone(), Signature::cmp(Signature::dyn_bool()))
}

#[derive(Clone, Debug)]
pub struct DisagreeReport {
    pub outcome_a: String,
    pub outcome_b: String,
    pub client: String,
}

#[derive(Clone, Debug)]
pub enum RelateOutcome {
    Agree,
    Disagree(DisagreeReport),
    /// Fuel ran out or an invariant broke; never counted as agreement.
    Inconclusive(String),
}

fn outcome_name(o: &Outcome) -> String {
    match o {
        Outcome::Threw => String::from("threw"),
        Outcome::Returned(v) => match crate::runtime::readback_first_order(v) {
            Some(nf) => format!("ret {}", crate::pretty::print_value(&nf)),
            None => String::from("ret <higher-order>"),
        },
    }
}

/// Run one client against two implementations and compare observations.
pub fn relate(f: &ClientProgram, m0: &Value, m1: &Value, fuel: FuelBudget) -> RelateOutcome {
    let run = |m: &Value| -> Result<Outcome, RunError> {
        let applied = Computation::bind(
            Value::app(f.value.clone(), m.clone()),
            Computation::Ret(Value::Var(0)),
        );
        run_cmp(&applied, fuel)
    };
    let a = match run(m0) {
        Ok(o) => o,
        Err(e) => return RelateOutcome::Inconclusive(format!("left: {:?}", e)),
    };
    let b = match run(m1) {
        Ok(o) => o,
        Err(e) => return RelateOutcome::Inconclusive(format!("right: {:?}", e)),
    };
    match observe_eq(&a, &b) {
        Ok(true) => RelateOutcome::Agree,
        Ok(false) => RelateOutcome::Disagree(DisagreeReport {
            outcome_a: outcome_name(&a),
            outcome_b: outcome_name(&b),
            client: crate::pretty::print_value(&f.value),
        }),
        Err(_) => RelateOutcome::Inconclusive(String::from("non-boolean observable")),
    }
}

#[derive(Clone, Debug)]
pub struct Counterexample {
    pub index: usize,
    pub seed: u64,
    pub script: String,
    pub outcome_a: String,
    pub outcome_b: String,
}

#[derive(Clone, Debug, Default)]
pub struct CampaignReport {
    pub agree: usize,
    pub disagree: usize,
    pub inconclusive: usize,
    pub first_counterexample: Option<Counterexample>,
}

/// Run `n_clients` generated clients over two implementations of `iface`.
/// Deterministic in `(seed0, n_clients, max_len)`; client `i` uses seed
/// `seed0 + i`.
pub fn campaign(
    m0: &Value,
    m1: &Value,
    iface: &Signature,
    n_clients: usize,
    max_len: usize,
    seed0: u64,
    fuel: FuelBudget,
) -> Result<CampaignReport, TypeError> {
    let ctx = Context::empty();
    check_val(&ctx, m0, iface)?;
    check_val(&ctx, m1, iface)?;
    let mut report = CampaignReport::default();
    for i in 0..n_clients {
        let seed = seed0.wrapping_add(i as u64);
        let script = gen_script(seed, max_len);
        let mut client = compile_script(&script);
        client.provenance = Provenance::Generated { seed };
        match relate(&client, m0, m1, fuel) {
            RelateOutcome::Agree => report.agree += 1,
            RelateOutcome::Disagree(d) => {
                report.disagree += 1;
                if report.first_counterexample.is_none() {
                    report.first_counterexample = Some(Counterexample {
                        index: i,
                        seed,
                        script: script.describe(),
                        outcome_a: d.outcome_a,
                        outcome_b: d.outcome_b,
                    });
                }
            }
            RelateOutcome::Inconclusive(_) => report.inconclusive += 1,
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::check_val;
    use crate::fixtures;

    fn fuel() -> FuelBudget {
        FuelBudget::default()
    }

    #[test]
    fn scripts_are_deterministic_and_bounded() {
        for seed in 0..200u64 {
            let a = gen_script(seed, 20);
            let b = gen_script(seed, 20);
            assert_eq!(a, b);
            assert!(!a.ops.is_empty() && a.ops.len() <= 20);
        }
    }

    #[test]
    fn generated_scripts_mix_operations() {
        let mut ins = 0usize;
        let mut rem = 0usize;
        let mut total = 0usize;
        for seed in 0..10_000u64 {
            let s = gen_script(seed, 20);
            for op in &s.ops {
                total += 1;
                match op {
                    QueueOp::Ins(_) => ins += 1,
                    QueueOp::Rem => rem += 1,
                }
            }
        }
        assert!(ins * 5 >= total, "insertions under 20%");
        assert!(rem * 5 >= total, "removals under 20%");
    }

    #[test]
    fn compiled_clients_typecheck() {
        let iface = fixtures::queue_sig();
        let csig = client_sig(&iface);
        for seed in 0..50u64 {
            let script = gen_script(seed, 8);
            let client = compile_script(&script);
            check_val(&Context::empty(), &client.value, &csig)
                .unwrap_or_else(|e| panic!("seed {}: {:?} for {}", seed, e, script.describe()));
        }
    }

    #[test]
    fn constant_client_agrees() {
        let f = ClientProgram {
            value: Value::lam(Value::susp(
                Computation::Ret(Value::Tt),
                Signature::dyn_bool(),
            )),
            provenance: Provenance::HandWritten,
        };
        let out = relate(&f, &fixtures::q0_value(), &fixtures::q1_value(), fuel());
        assert!(matches!(out, RelateOutcome::Agree));
    }

    #[test]
    fn insert_remove_client_agrees_with_tt() {
        // λQ. bind q ← ins (tt, emp) in bind p ← rem q in ret (fst p)
        let script = OpScript {
            ops: alloc::vec![QueueOp::Ins(true), QueueOp::Rem],
            fold: FoldMode::LastBit,
        };
        let f = compile_script(&script);
        let q0 = fixtures::q0_value();
        let q1 = fixtures::q1_value();
        assert!(matches!(relate(&f, &q0, &q1, fuel()), RelateOutcome::Agree));
        // And the observed value is tt on both sides.
        let applied = Computation::bind(
            Value::app(f.value.clone(), q0),
            Computation::Ret(Value::Var(0)),
        );
        match run_cmp(&applied, fuel()).unwrap() {
            Outcome::Returned(v) => {
                assert_eq!(crate::runtime::readback_first_order(&v).unwrap(), Value::Tt)
            }
            Outcome::Threw => panic!("unexpected throw"),
        }
    }

    #[test]
    fn removal_from_empty_agrees_by_throwing() {
        let script = OpScript {
            ops: alloc::vec![QueueOp::Rem],
            fold: FoldMode::LastBit,
        };
        let f = compile_script(&script);
        let q0 = fixtures::q0_value();
        let q1 = fixtures::q1_value();
        assert!(matches!(relate(&f, &q0, &q1, fuel()), RelateOutcome::Agree));
        let applied = Computation::bind(
            Value::app(f.value.clone(), q0),
            Computation::Ret(Value::Var(0)),
        );
        assert!(matches!(run_cmp(&applied, fuel()).unwrap(), Outcome::Threw));
    }

    #[test]
    fn observe_throw_examples() {
        // Empty script: no throw occurred.
        let empty = compile_script(&OpScript {
            ops: Vec::new(),
            fold: FoldMode::ObserveThrow,
        });
        let q0 = fixtures::q0_value();
        let applied = Computation::bind(
            Value::app(empty.value, q0.clone()),
            Computation::Ret(Value::Var(0)),
        );
        match run_cmp(&applied, fuel()).unwrap() {
            Outcome::Returned(v) => {
                assert_eq!(crate::runtime::readback_first_order(&v).unwrap(), Value::Ff)
            }
            Outcome::Threw => panic!("unexpected throw"),
        }
        // A lone removal is detected as a would-throw on both sides.
        let lone = compile_script(&OpScript {
            ops: alloc::vec![QueueOp::Rem],
            fold: FoldMode::ObserveThrow,
        });
        for m in [fixtures::q0_value(), fixtures::q1_value()] {
            let applied = Computation::bind(
                Value::app(lone.value.clone(), m),
                Computation::Ret(Value::Var(0)),
            );
            match run_cmp(&applied, fuel()).unwrap() {
                Outcome::Returned(v) => {
                    assert_eq!(crate::runtime::readback_first_order(&v).unwrap(), Value::Tt)
                }
                Outcome::Threw => panic!("observe-throw client must not itself throw"),
            }
        }
    }

    #[test]
    fn campaign_reflexivity() {
        let q0 = fixtures::q0_value();
        let report = campaign(&q0, &q0, &fixtures::queue_sig(), 100, 10, 7, fuel()).unwrap();
        assert_eq!(report.agree, 100);
        assert_eq!(report.disagree, 0);
        assert_eq!(report.inconclusive, 0);
    }

    #[test]
    fn campaign_q0_q1_smoke() {
        let report = campaign(
            &fixtures::q0_value(),
            &fixtures::q1_value(),
            &fixtures::queue_sig(),
            200,
            12,
            42,
            fuel(),
        )
        .unwrap();
        assert_eq!(report.disagree, 0, "{:?}", report.first_counterexample);
        assert_eq!(report.inconclusive, 0);
    }

    #[test]
    fn relate_is_symmetric() {
        let q0 = fixtures::q0_value();
        let q1 = fixtures::q1_with(fixtures::Q1Variant::NegatedBit);
        for seed in 0..60u64 {
            let f = compile_script(&gen_script(seed, 10));
            let ab = relate(&f, &q0, &q1, fuel());
            let ba = relate(&f, &q1, &q0, fuel());
            match (ab, ba) {
                (RelateOutcome::Agree, RelateOutcome::Agree) => {}
                (RelateOutcome::Disagree(d1), RelateOutcome::Disagree(d2)) => {
                    assert_eq!(d1.outcome_a, d2.outcome_b);
                    assert_eq!(d1.outcome_b, d2.outcome_a);
                }
                other => panic!("asymmetric relate: {:?}", other),
            }
        }
    }

    #[test]
    fn mutants_are_caught() {
        let q0 = fixtures::q0_value();
        for variant in [
            fixtures::Q1Variant::NegatedBit,
            fixtures::Q1Variant::DroppedReversal,
            fixtures::Q1Variant::SwappedComponents,
        ] {
            let broken = fixtures::q1_with(variant);
            let report =
                campaign(&q0, &broken, &fixtures::queue_sig(), 1000, 20, 42, fuel()).unwrap();
            assert!(
                report.disagree >= 1,
                "mutant {:?} not caught: {:?}",
                variant,
                report
            );
        }
    }
}

#[cfg(test)]
mod transcription_tests {
    use super::*;
    use crate::elaborate::{elaborate, Elaborator};
    use crate::fixtures;
    use crate::surface::parse;

    // The elaborated corpus queues and the hand-built fixtures are not just
    // judgmentally equal: they behave identically on every small client.
    #[test]
    fn elaborated_and_fixture_queues_agree_behaviorally() {
        let src = include_str!("../../../corpus/good/queues.mtt");
        let defs = elaborate(&parse(src).unwrap()).unwrap();
        let mut pairs = Vec::new();
        for (name, fixture) in [("Q0", fixtures::q0_value()), ("Q1", fixtures::q1_value())] {
            let def = defs
                .iter()
                .find_map(|d| match d {
                    crate::elaborate::ElabDef::Mod {
                        name: n,
                        value,
                        sig,
                        layout,
                    } if n == name => Some((value.clone(), sig.clone(), layout.clone())),
                    _ => None,
                })
                .unwrap();
            let mut elab = Elaborator::new();
            let sealed = elab
                .seal(
                    def.0,
                    &def.1,
                    &def.2,
                    &fixtures::queue_sig(),
                    &def.2,
                    crate::check::Span { line: 0, col: 0 },
                )
                .unwrap();
            pairs.push((sealed, fixture));
        }
        for script in exhaustive_scripts(4) {
            let client = compile_script(&script);
            for (sealed, fixture) in &pairs {
                match relate(&client, sealed, fixture, FuelBudget::default()) {
                    RelateOutcome::Agree => {}
                    other => panic!(
                        "transcriptions disagree on {}: {:?}",
                        script.describe(),
                        other
                    ),
                }
            }
        }
    }
}
