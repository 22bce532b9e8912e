//! Acceptance suite: one test per criterion, each printing a pass line.
//!
//! Tolerances and thresholds are pinned in the assertions. Run with
//! `cargo test -p modtt --test acceptance` (add `-- --nocapture` to see the
//! pass lines).

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use modtt::{campaign_parallel, elaborate_source, find_def, find_main};
use modtt_core::check::Span;
use modtt_core::ctx::Context;
use modtt_core::elaborate::{ElabDef, Elaborator, Layout};
use modtt_core::nbe::{equal_cmp, equal_val, normalize_cmp, normalize_val};
use modtt_core::oracle::{rewrite_cmp_nf, rewrite_value_nf, ESort, Enumerator};
use modtt_core::paramtest::{
    campaign, compile_script, exhaustive_scripts, gen_script, relate, RelateOutcome, SplitMix,
};
use modtt_core::phase::{check_static_iso_arrow, static_part_sig};
use modtt_core::runtime::{readback_first_order, run_cmp, FuelBudget, Outcome};
use modtt_core::{Computation, Signature, Value};

fn corpus(sub: &str, file: &str) -> String {
    let path: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(sub)
        .join(file);
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {}", path.display(), e))
}

fn load(sub: &str, file: &str) -> Vec<ElabDef> {
    elaborate_source(&corpus(sub, file)).unwrap_or_else(|e| panic!("{}: {:?}", file, e))
}

fn mod_parts<'a>(defs: &'a [ElabDef], name: &str) -> (&'a Value, &'a Signature, &'a Layout) {
    match find_def(defs, name) {
        Some(ElabDef::Mod {
            value, sig, layout, ..
        }) => (value, sig, layout),
        _ => panic!("missing structure {}", name),
    }
}

fn sig_parts<'a>(defs: &'a [ElabDef], name: &str) -> (&'a Signature, &'a Layout) {
    match find_def(defs, name) {
        Some(ElabDef::Sig { sig, layout, .. }) => (sig, layout),
        _ => panic!("missing signature {}", name),
    }
}

/// Seal a named structure at a named signature from the same unit.
fn sealed_impl(defs: &[ElabDef], name: &str, sig_name: &str) -> (Value, Signature) {
    let (value, vsig, vlayout) = mod_parts(defs, name);
    let (iface, ilayout) = sig_parts(defs, sig_name);
    let mut elab = Elaborator::new();
    let sealed = elab
        .seal(
            value.clone(),
            vsig,
            vlayout,
            iface,
            ilayout,
            Span { line: 0, col: 0 },
        )
        .unwrap_or_else(|e| panic!("sealing {}: {:?}", name, e));
    (sealed, iface.clone())
}

fn fuel() -> FuelBudget {
    FuelBudget::default()
}

#[test]
fn criterion_1_corpus_typechecking() {
    let start = Instant::now();
    let show = load("good", "show.mtt");
    let namespace = load("good", "namespace.mtt");
    let queues = load("good", "queues.mtt");
    // The named transcriptions all exist.
    for name in ["SHOW", "SHOW_BOOL"] {
        sig_parts(&show, name);
    }
    mod_parts(&show, "ShowBool");
    mod_parts(&show, "ShowProd");
    for name in ["ARRAY", "NAMESPACE"] {
        sig_parts(&namespace, name);
    }
    mod_parts(&namespace, "Namespace");
    sig_parts(&queues, "QUEUE");
    mod_parts(&queues, "Q0");
    mod_parts(&queues, "Q1");
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 2.0,
        "corpus typechecking took {:?}",
        elapsed
    );
    println!(
        "ACCEPTANCE 1 corpus-typechecking: PASS ({} ms)",
        elapsed.as_millis()
    );
}

#[test]
fn criterion_2_queue_agreement_at_desk_scale() {
    let defs = load("good", "queues.mtt");
    let (q0, iface) = sealed_impl(&defs, "Q0", "QUEUE");
    let (q1, _) = sealed_impl(&defs, "Q1", "QUEUE");

    let start = Instant::now();
    let report = campaign(&q0, &q1, &iface, 1000, 20, 42, fuel()).unwrap();
    let elapsed = start.elapsed();
    assert_eq!(report.disagree, 0, "{:?}", report.first_counterexample);
    assert_eq!(report.inconclusive, 0);
    assert_eq!(report.agree, 1000);
    assert!(elapsed.as_secs_f64() < 10.0, "campaign took {:?}", elapsed);

    // Exhaustive agreement for every script of length at most 6.
    let mut exhaustive = 0usize;
    for script in exhaustive_scripts(6) {
        let client = compile_script(&script);
        match relate(&client, &q0, &q1, fuel()) {
            RelateOutcome::Agree => exhaustive += 1,
            other => panic!("script {} gave {:?}", script.describe(), other),
        }
    }
    println!(
        "ACCEPTANCE 2 queue-agreement: PASS (1000 random clients in {} ms, {} exhaustive clients)",
        elapsed.as_millis(),
        exhaustive
    );
}

#[test]
fn criterion_3_mutation_sensitivity() {
    let defs = load("good", "mutants.mtt");
    let (q0, iface) = sealed_impl(&defs, "Q0", "QUEUE");
    for mutant in ["Q1Negate", "Q1NoRev", "Q1Swap"] {
        let (broken, _) = sealed_impl(&defs, mutant, "QUEUE");
        let report = campaign(&q0, &broken, &iface, 1000, 20, 42, fuel()).unwrap();
        assert!(
            report.disagree >= 1,
            "mutant {} escaped 1000 clients",
            mutant
        );
    }
    println!("ACCEPTANCE 3 mutation-sensitivity: PASS (3/3 mutants caught)");
}

#[test]
fn criterion_4_equational_suite() {
    let dyn_bool = Signature::dyn_bool();
    let mut en = Enumerator::new();
    let bools = en.closed_values_up_to(ESort::Bool, 8);
    let open_cmps: Vec<Computation> = {
        let ctx = vec![ESort::Bool];
        let mut out = Vec::new();
        for size in 1..=6 {
            out.extend(en.computations(&ctx, size).iter().cloned());
        }
        out
    };
    let assoc_cmps: Vec<Computation> = {
        let ctx = vec![ESort::CmpBool, ESort::Bool];
        let mut out = Vec::new();
        for size in 1..=5 {
            out.extend(en.computations(&ctx, size).iter().cloned());
        }
        out
    };
    let mut rng = SplitMix(0x5EED);
    let pick_bool = |rng: &mut SplitMix| bools[rng.below(bools.len() as u64) as usize].clone();
    let pick_open =
        |rng: &mut SplitMix| open_cmps[rng.below(open_cmps.len() as u64) as usize].clone();
    let pick_assoc =
        |rng: &mut SplitMix| assoc_cmps[rng.below(assoc_cmps.len() as u64) as usize].clone();

    let empty = Context::empty();
    let n = 50usize;

    // Monad unit: bind x ← ⟨ret V⟩ in M ≡ M[V].
    for _ in 0..n {
        let v = pick_bool(&mut rng);
        let m = pick_open(&mut rng);
        let lhs = Computation::bind(
            Value::susp(Computation::Ret(v.clone()), dyn_bool.clone()),
            m.clone(),
        );
        let rhs = m.subst(&v, 0);
        assert!(equal_cmp(&empty, &lhs, &rhs, &dyn_bool), "monad β failed");
    }

    // Monad associativity, under a free suspension variable.
    let mut assoc_ctx = Context::empty();
    assoc_ctx.push_var(Signature::cmp(dyn_bool.clone()));
    for _ in 0..n {
        let g = pick_assoc(&mut rng);
        let f = pick_assoc(&mut rng);
        let lhs = Computation::bind(
            Value::susp(
                Computation::bind(Value::Var(0), g.clone()),
                dyn_bool.clone(),
            ),
            f.clone(),
        );
        let rhs = Computation::bind(
            Value::Var(0),
            Computation::bind(Value::susp(g, dyn_bool.clone()), f.shifted(1, 1)),
        );
        assert!(
            equal_cmp(&assoc_ctx, &lhs, &rhs, &dyn_bool),
            "monad associativity failed"
        );
    }

    // Extent β: out(in{∗} W) ≡ W.
    let ext_bool = Signature::ext(dyn_bool.clone(), Value::Star);
    for _ in 0..n {
        let w = pick_bool(&mut rng);
        let lhs = Value::out_ext(Value::in_ext(Value::Star, w.clone()));
        assert!(equal_val(&empty, &lhs, &w, &dyn_bool), "extent β failed");
    }

    // Extent η: U ≡ in{∗}(out U) at the extent.
    for _ in 0..n {
        let u = Value::in_ext(Value::Star, pick_bool(&mut rng));
        let rhs = Value::in_ext(Value::Star, Value::out_ext(u.clone()));
        assert!(equal_val(&empty, &u, &rhs, &ext_bool), "extent η failed");
    }

    // Extent inversion: under the static open, out v ≡ the recorded part.
    for _ in 0..n {
        let code = random_type_code(&mut rng, 2);
        let mut ctx = Context::empty();
        ctx.push_var(Signature::ext(Signature::Type, code.clone()));
        ctx.push_static_open();
        assert!(
            equal_val(
                &ctx,
                &Value::out_ext(Value::Var(0)),
                &code,
                &Signature::Type
            ),
            "extent inversion failed"
        );
    }

    // Conditional β on both branches.
    for _ in 0..n {
        let m = pick_open(&mut rng).subst(&Value::Tt, 0);
        let k = pick_open(&mut rng).subst(&Value::Ff, 0);
        assert!(equal_cmp(
            &empty,
            &Computation::if_(Value::Tt, m.clone(), k.clone()),
            &m,
            &dyn_bool
        ));
        assert!(equal_cmp(
            &empty,
            &Computation::if_(Value::Ff, m, k.clone()),
            &k,
            &dyn_bool
        ));
    }

    // η at functors and at sums over a pool of component signatures.
    let sig_pool: Vec<Signature> = vec![
        Signature::Type,
        dyn_bool.clone(),
        Signature::cmp(dyn_bool.clone()),
        Signature::sigma(Signature::Type, Signature::Dyn(Value::Var(0))),
        Signature::ext(Signature::Type, Value::bool_code()),
        Signature::Dyn(Value::list_code(Value::bool_code())),
    ];
    for _ in 0..n {
        let a = sig_pool[rng.below(sig_pool.len() as u64) as usize].clone();
        let b = sig_pool[rng.below(sig_pool.len() as u64) as usize].clone();
        let pi = Signature::pi(a.clone(), b.shifted(1, 0));
        let mut ctx = Context::empty();
        ctx.push_var(pi.clone());
        let eta = Value::lam(Value::app(Value::Var(1), Value::Var(0)));
        assert!(equal_val(&ctx, &Value::Var(0), &eta, &pi), "Π η failed");

        let sigma = Signature::sigma(a, b.shifted(1, 0));
        let mut ctx = Context::empty();
        ctx.push_var(sigma.clone());
        let eta = Value::pair(Value::fst(Value::Var(0)), Value::snd(Value::Var(0)));
        assert!(equal_val(&ctx, &Value::Var(0), &eta, &sigma), "Σ η failed");
    }

    println!(
        "ACCEPTANCE 4 equational-suite: PASS (8 laws x {} instances)",
        n
    );
}

fn random_type_code(rng: &mut SplitMix, depth: u32) -> Value {
    if depth == 0 {
        return Value::bool_code();
    }
    match rng.below(4) {
        0 => Value::bool_code(),
        1 => Value::list_code(random_type_code(rng, depth - 1)),
        2 => Value::prod_code(
            random_type_code(rng, depth - 1),
            random_type_code(rng, depth - 1),
        ),
        _ => Value::parrow_code(
            random_type_code(rng, depth - 1),
            random_type_code(rng, depth - 1),
        ),
    }
}

#[test]
fn criterion_5_static_connectivity() {
    let mut en = Enumerator::new();
    let bools = en.closed_values_up_to(ESort::Bool, 8);
    let lists = en.closed_values_up_to(ESort::ListBool, 8);
    let cmps = en.closed_values_up_to(ESort::CmpBool, 8);

    let mut static_ctx = Context::empty();
    static_ctx.push_static_open();
    let dynamic_ctx = Context::empty();

    let mut rng = SplitMix(0xC0);
    let mut distinguishable_dyn = 0usize;
    for i in 0..200usize {
        let (pool, sig): (&[Value], Signature) = if i % 2 == 0 {
            (&bools, Signature::dyn_bool())
        } else {
            (&lists, Signature::Dyn(Value::list_code(Value::bool_code())))
        };
        let a = &pool[rng.below(pool.len() as u64) as usize];
        let b = &pool[rng.below(pool.len() as u64) as usize];
        assert!(
            equal_val(&static_ctx, a, b, &sig),
            "static collapse failed at a dynamic sort"
        );
        if !equal_val(&dynamic_ctx, a, b, &sig) {
            distinguishable_dyn += 1;
        }
    }
    assert!(
        distinguishable_dyn * 10 >= 200 * 3,
        "only {}/200 dynamic-sort pairs distinguishable",
        distinguishable_dyn
    );

    let cmp_sig = Signature::cmp(Signature::dyn_bool());
    let mut distinguishable_cmp = 0usize;
    for _ in 0..200usize {
        let a = &cmps[rng.below(cmps.len() as u64) as usize];
        let b = &cmps[rng.below(cmps.len() as u64) as usize];
        assert!(
            equal_val(&static_ctx, a, b, &cmp_sig),
            "static collapse failed at a computation sort"
        );
        if !equal_val(&dynamic_ctx, a, b, &cmp_sig) {
            distinguishable_cmp += 1;
        }
    }
    assert!(
        distinguishable_cmp * 10 >= 200 * 3,
        "only {}/200 computation pairs distinguishable",
        distinguishable_cmp
    );
    println!(
        "ACCEPTANCE 5 static-connectivity: PASS (200+200 pairs collapse; {}/200 and {}/200 dynamically distinct)",
        distinguishable_dyn, distinguishable_cmp
    );
}

#[test]
fn criterion_6_oracle_equivalence() {
    let ctx = Context::empty();
    let mut en = Enumerator::new();

    // Two normal-form keys per term; agreement means the keys induce the
    // same partition, which decides every pairwise equality question.
    fn assert_partition(pairs: &[(String, String)]) {
        use std::collections::HashMap;
        let mut fwd: HashMap<&str, &str> = HashMap::new();
        let mut bwd: HashMap<&str, &str> = HashMap::new();
        for (o, nf) in pairs {
            if let Some(prev) = fwd.insert(o, nf) {
                assert_eq!(prev, nf, "oracle class split by the semantic engine");
            }
            if let Some(prev) = bwd.insert(nf, o) {
                assert_eq!(prev, o, "semantic class split by the oracle");
            }
        }
    }

    let bools = en.closed_values_up_to(ESort::Bool, 12);
    let dyn_bool = Signature::dyn_bool();
    let mut pairs = Vec::with_capacity(bools.len());
    for t in &bools {
        let o = rewrite_value_nf(t, 1_000_000).expect("oracle budget");
        let nf = normalize_val(&ctx, t, &dyn_bool);
        pairs.push((
            modtt_core::pretty::print_value(&o),
            modtt_core::pretty::print_value(&nf),
        ));
    }
    assert_partition(&pairs);
    let n_bools = bools.len();

    let cmps = en.closed_values_up_to(ESort::CmpBool, 12);
    let cmp_sig = Signature::cmp(dyn_bool);
    let mut pairs = Vec::with_capacity(cmps.len());
    for t in &cmps {
        let o = rewrite_value_nf(t, 1_000_000).expect("oracle budget");
        let nf = normalize_val(&ctx, t, &cmp_sig);
        pairs.push((
            modtt_core::pretty::print_value(&o),
            modtt_core::pretty::print_value(&nf),
        ));
    }
    assert_partition(&pairs);
    println!(
        "ACCEPTANCE 6 oracle-equivalence: PASS ({} boolean terms, {} suspension terms, zero mismatches)",
        n_bools,
        cmps.len()
    );
}

#[test]
fn criterion_7_static_projection_laws() {
    let ctx = Context::empty();
    let queues = load("good", "queues.mtt");
    let show = load("good", "show.mtt");
    let namespace = load("good", "namespace.mtt");
    let letabs = load("good", "letabs.mtt");

    let (queue, _) = sig_parts(&queues, "QUEUE");
    let (show_sig, _) = sig_parts(&show, "SHOW");
    let (show_bool, _) = sig_parts(&show, "SHOW_BOOL");
    let (array, _) = sig_parts(&namespace, "ARRAY");
    let (ns, _) = sig_parts(&namespace, "NAMESPACE");
    let (eq, _) = sig_parts(&letabs, "EQ");

    let pairs: Vec<(&Signature, &Signature)> = vec![
        (show_sig, show_sig),
        (queue, queue),
        (queue, show_sig),
        (show_bool, queue),
        (array, ns),
        (ns, array),
        (eq, queue),
        (show_sig, eq),
        (show_bool, show_sig),
        (array, show_bool),
    ];
    assert_eq!(pairs.len(), 10);
    for (i, (dom, cod)) in pairs.iter().enumerate() {
        assert!(
            check_static_iso_arrow(&ctx, dom, cod),
            "arrow projection law failed on pair {}",
            i
        );
    }

    // Idempotence corpus-wide.
    let mut sig_count = 0usize;
    for unit in [&queues, &show, &namespace, &letabs] {
        for def in unit.iter() {
            let sig = match def {
                ElabDef::Sig { sig, .. } => sig,
                ElabDef::Mod { sig, .. } => sig,
            };
            let sk = static_part_sig(&ctx, sig);
            let again = static_part_sig(&ctx, &sk.to_signature());
            assert_eq!(sk, again, "idempotence failed for a corpus signature");
            sig_count += 1;
        }
    }
    println!(
        "ACCEPTANCE 7 static-projection-laws: PASS (10 arrow pairs, idempotence on {} signatures)",
        sig_count
    );
}

#[test]
fn criterion_8_generativity() {
    // Consistent use of one generative instance is accepted.
    assert!(elaborate_source(&corpus("good", "namespace.mtt")).is_ok());
    // Passing one instance's symbol to another instance's operation is not.
    let err = elaborate_source(&corpus("bad", "generativity-cross.mtt")).unwrap_err();
    match err {
        modtt::Failure::Elab(e) => {
            assert_eq!(e.kind, modtt_core::check::TypeErrorKind::Mismatch)
        }
        other => panic!("unexpected failure {:?}", other),
    }
    println!("ACCEPTANCE 8 generativity: PASS (consistent use accepted, cross use rejected)");
}

#[test]
fn criterion_9_evaluator_equality_coherence() {
    let ctx = Context::empty();
    let mut checked = 0usize;

    // Every runnable corpus computation.
    for file in ["show.mtt", "namespace.mtt", "letabs.mtt", "queue-demo.mtt"] {
        let defs = load("good", file);
        let (main, sig) =
            find_main(&defs).unwrap_or_else(|| panic!("{} has no runnable main", file));
        coherent(&ctx, &main, &sig, file);
        checked += 1;
    }

    // A batch of generated clients applied to both queue implementations.
    let defs = load("good", "queues.mtt");
    let (q0, iface) = sealed_impl(&defs, "Q0", "QUEUE");
    let (q1, _) = sealed_impl(&defs, "Q1", "QUEUE");
    let dyn_bool = Signature::dyn_bool();
    for seed in 0..100u64 {
        let client = compile_script(&gen_script(seed, 10));
        for q in [&q0, &q1] {
            let m = Computation::bind(
                Value::app(client.value.clone(), q.clone()),
                Computation::Ret(Value::Var(0)),
            );
            coherent(&ctx, &m, &dyn_bool, "generated client");
            checked += 1;
        }
    }
    let _ = iface;
    println!(
        "ACCEPTANCE 9 evaluator-equality-coherence: PASS ({} closed computations)",
        checked
    );
}

fn coherent(ctx: &Context, m: &Computation, sig: &Signature, what: &str) {
    let nf = normalize_cmp(ctx, m, sig);
    match run_cmp(m, fuel()).unwrap_or_else(|e| panic!("{}: {:?}", what, e)) {
        Outcome::Threw => assert_eq!(nf, Computation::Throw, "{}: threw but NF differs", what),
        Outcome::Returned(v) => match nf {
            Computation::Ret(w) => {
                if let Some(rb) = readback_first_order(&v) {
                    assert_eq!(rb, w, "{}: returned value differs from NF", what);
                }
            }
            other => panic!("{}: returned but NF is {:?}", what, other),
        },
    }
}

#[test]
fn parallel_campaign_matches_sequential() {
    // Not a numbered criterion; pins the worker-pool determinism contract.
    let defs = load("good", "mutants.mtt");
    let (q0, iface) = sealed_impl(&defs, "Q0", "QUEUE");
    let (broken, _) = sealed_impl(&defs, "Q1Negate", "QUEUE");
    let seq = campaign(&q0, &broken, &iface, 400, 12, 7, fuel()).unwrap();
    let par = campaign_parallel(&q0, &broken, &iface, 400, 12, 7, fuel(), 4).unwrap();
    assert_eq!(seq.agree, par.agree);
    assert_eq!(seq.disagree, par.disagree);
    assert_eq!(seq.inconclusive, par.inconclusive);
    assert_eq!(
        seq.first_counterexample.as_ref().map(|c| c.index),
        par.first_counterexample.as_ref().map(|c| c.index)
    );
}

#[test]
fn oracle_also_validates_rewriting_of_corpus_mains() {
    // The rewriting engine agrees with the evaluator on runnable corpus
    // mains: these are first-order programs, so the β-normal form is the
    // returned literal itself.
    for file in ["letabs.mtt", "queue-demo.mtt", "throw-demo.mtt"] {
        let defs = load("good", file);
        let (main, _) = find_main(&defs).unwrap();
        let nf = rewrite_cmp_nf(&main, 1_000_000).expect("oracle budget");
        match run_cmp(&main, fuel()).unwrap() {
            Outcome::Threw => assert_eq!(nf, Computation::Throw, "{}", file),
            Outcome::Returned(v) => {
                let rb = readback_first_order(&v).expect("first-order outcome");
                assert_eq!(nf, Computation::Ret(rb), "{}", file);
            }
        }
    }
}

#[test]
fn engines_cohere_on_enumerated_computations() {
    // Beyond the corpus: run/normalize agreement over every enumerated
    // closed suspension up to size 9, exercising case analysis, stuck-free
    // conditionals, list reversal, and throw propagation together.
    let ctx = Context::empty();
    let mut en = Enumerator::new();
    let dyn_bool = Signature::dyn_bool();
    let mut checked = 0usize;
    for susp in en.closed_values_up_to(ESort::CmpBool, 9) {
        let m = Computation::bind(susp, Computation::Ret(Value::Var(0)));
        coherent(&ctx, &m, &dyn_bool, "enumerated computation");
        checked += 1;
    }
    assert!(checked > 900);
    println!(
        "coherence sweep: {} enumerated computations agree across engines",
        checked
    );
}

/// Three-way differential on generated closed computations, deeper than
/// the exhaustive enumeration: the rewriting oracle, the normalizer, and
/// the evaluator must tell the same story for every sample.
#[test]
fn three_engines_agree_on_random_deep_terms() {
    #[derive(Clone, Copy, PartialEq)]
    enum Sort {
        B,
        L,
    }

    struct Gen {
        rng: SplitMix,
    }

    impl Gen {
        fn var_of(&mut self, ctx: &[Sort], sort: Sort) -> Option<Value> {
            let hits: Vec<usize> = ctx
                .iter()
                .rev()
                .enumerate()
                .filter(|(_, s)| **s == sort)
                .map(|(i, _)| i)
                .collect();
            if hits.is_empty() {
                None
            } else {
                Some(Value::Var(hits[self.rng.below(hits.len() as u64) as usize]))
            }
        }

        fn bool_val(&mut self, ctx: &[Sort], depth: u32) -> Value {
            match self.rng.below(if depth == 0 { 3 } else { 5 }) {
                0 => Value::Tt,
                1 => Value::Ff,
                2 => self.var_of(ctx, Sort::B).unwrap_or(Value::Tt),
                3 => Value::fst(Value::pair(
                    self.bool_val(ctx, depth - 1),
                    self.bool_val(ctx, depth - 1),
                )),
                _ => Value::out_ext(Value::in_ext(Value::Star, self.bool_val(ctx, depth - 1))),
            }
        }

        fn list_val(&mut self, ctx: &[Sort], depth: u32) -> Value {
            match self.rng.below(if depth == 0 { 2 } else { 4 }) {
                0 => Value::Nil,
                1 => self.var_of(ctx, Sort::L).unwrap_or(Value::Nil),
                _ => Value::cons(self.bool_val(ctx, depth - 1), self.list_val(ctx, depth - 1)),
            }
        }

        fn cmp(&mut self, ctx: &mut Vec<Sort>, depth: u32) -> Computation {
            if depth == 0 {
                return match self.rng.below(3) {
                    0 => Computation::Throw,
                    _ => Computation::Ret(self.bool_val(ctx, 0)),
                };
            }
            match self.rng.below(6) {
                0 => Computation::Ret(self.bool_val(ctx, depth - 1)),
                1 => Computation::Throw,
                2 => Computation::if_(
                    self.bool_val(ctx, depth - 1),
                    self.cmp(ctx, depth - 1),
                    self.cmp(ctx, depth - 1),
                ),
                3 => {
                    let scrut = Value::susp(self.cmp(ctx, depth - 1), Signature::dyn_bool());
                    ctx.push(Sort::B);
                    let body = self.cmp(ctx, depth - 1);
                    ctx.pop();
                    Computation::bind(scrut, body)
                }
                4 => {
                    let list = self.list_val(ctx, depth - 1);
                    let reversed = Value::susp(
                        Computation::app_p(Value::rev(Value::bool_code()), list),
                        Signature::Dyn(Value::list_code(Value::bool_code())),
                    );
                    ctx.push(Sort::L);
                    let nil_arm = self.cmp(ctx, depth - 1);
                    ctx.push(Sort::B);
                    ctx.push(Sort::L);
                    let cons_arm = self.cmp(ctx, depth - 1);
                    ctx.pop();
                    ctx.pop();
                    ctx.pop();
                    Computation::bind(
                        reversed,
                        Computation::case_list(Value::Var(0), nil_arm, cons_arm),
                    )
                }
                _ => {
                    let arg = self.bool_val(ctx, depth - 1);
                    ctx.push(Sort::B);
                    let body = self.cmp(ctx, depth - 1);
                    ctx.pop();
                    Computation::app_p(Value::pfun(body), arg)
                }
            }
        }
    }

    let ctx = Context::empty();
    let dyn_bool = Signature::dyn_bool();
    let mut g = Gen {
        rng: SplitMix(0xD1FF),
    };
    let mut by_nf: std::collections::HashMap<String, ()> = std::collections::HashMap::new();
    for round in 0..2000usize {
        let m = g.cmp(&mut Vec::new(), 5);
        let nf = normalize_cmp(&ctx, &m, &dyn_bool);
        let onf = rewrite_cmp_nf(&m, 1_000_000).expect("oracle budget");
        // NbE and rewriting land on the same β-normal form for closed
        // boolean computations.
        assert_eq!(nf, onf, "round {}: engines split on {:?}", round, m);
        // And the evaluator agrees with that normal form.
        match run_cmp(&m, fuel()).unwrap() {
            Outcome::Threw => assert_eq!(nf, Computation::Throw, "round {}", round),
            Outcome::Returned(v) => {
                let rb = readback_first_order(&v).expect("boolean outcome");
                assert_eq!(nf, Computation::Ret(rb), "round {}", round);
            }
        }
        let key = modtt_core::pretty::print_computation(&nf);
        by_nf.entry(key).or_default();
    }
    assert!(by_nf.len() >= 2, "degenerate sample");
    println!(
        "three-engine differential: 2000 samples, {} distinct outcomes",
        by_nf.len()
    );
}
