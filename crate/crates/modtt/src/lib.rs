//! File handling, diagnostics, and the parallel campaign driver for the
//! modtt command-line front end.

use std::fs;
use std::path::Path;

use modtt_core::check::{Span, TypeError};
use modtt_core::ctx::Context;
use modtt_core::elaborate::{self, ElabDef, Layout, Proj};
use modtt_core::paramtest::{
    compile_script, gen_script, relate, CampaignReport, Counterexample, Provenance, RelateOutcome,
};
use modtt_core::runtime::FuelBudget;
use modtt_core::surface::{self, ParseError};
use modtt_core::{Computation, Signature, Value};

#[derive(Debug)]
pub enum Failure {
    Io(std::io::Error),
    Parse(ParseError),
    Elab(TypeError),
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::Io(e)
    }
}

/// Parse and elaborate one compilation unit.
pub fn load_unit(path: &Path) -> Result<Vec<ElabDef>, Failure> {
    let source = fs::read_to_string(path)?;
    elaborate_source(&source)
}

pub fn elaborate_source(source: &str) -> Result<Vec<ElabDef>, Failure> {
    let decls = surface::parse(source).map_err(Failure::Parse)?;
    elaborate::elaborate(&decls).map_err(Failure::Elab)
}

/// Diagnostic kind, span, and message of a failure.
pub fn failure_parts(f: &Failure) -> (String, Option<Span>, String) {
    match f {
        Failure::Io(e) => ("io".to_string(), None, e.to_string()),
        Failure::Parse(e) => ("parse".to_string(), Some(e.span), e.message.clone()),
        Failure::Elab(e) => (e.kind.name().to_string(), e.span, e.message.clone()),
    }
}

pub fn failure_json(f: &Failure) -> serde_json::Value {
    let (kind, span, message) = failure_parts(f);
    let mut obj = serde_json::json!({
        "kind": kind,
        "message": message,
    });
    if let Some(span) = span {
        obj["span"] = serde_json::json!({ "line": span.line, "col": span.col });
    }
    if let Failure::Elab(e) = f {
        if let Some(expected) = &e.expected {
            obj["expected"] = serde_json::Value::String(expected.clone());
        }
        if let Some(actual) = &e.actual {
            obj["actual"] = serde_json::Value::String(actual.clone());
        }
    }
    obj
}

/// Find a definition by name.
pub fn find_def<'a>(defs: &'a [ElabDef], name: &str) -> Option<&'a ElabDef> {
    defs.iter().find(|d| match d {
        ElabDef::Sig { name: n, .. } | ElabDef::Mod { name: n, .. } => n == name,
    })
}

/// Strip module-level transparency, contracting on literal introductions.
pub fn strip_transparency(mut value: Value, mut sig: Signature) -> (Value, Signature) {
    while let Signature::Ext(base, _) = sig {
        value = match value {
            Value::InExt(_, w) => *w,
            other => Value::out_ext(other),
        };
        sig = *base;
    }
    (value, sig)
}

pub fn project_field(
    value: &Value,
    sig: &Signature,
    layout: &Layout,
    field: &str,
) -> Option<(Value, Signature)> {
    let path = layout.path_of(field)?;
    let (mut v, mut s) = strip_transparency(value.clone(), sig.clone());
    for p in path {
        let (base_v, base_s) = strip_transparency(v, s);
        match (p, base_s) {
            (Proj::Fst, Signature::Sigma(a, _)) => {
                v = match base_v {
                    Value::Pair(x, _) => *x,
                    other => Value::fst(other),
                };
                s = *a;
            }
            (Proj::Snd, Signature::Sigma(_, b)) => {
                let fst = match &base_v {
                    Value::Pair(x, _) => (**x).clone(),
                    other => Value::fst(other.clone()),
                };
                v = match base_v {
                    Value::Pair(_, y) => *y,
                    other => Value::snd(other),
                };
                s = b.subst(&fst, 0);
            }
            _ => return None,
        }
    }
    Some((v, s))
}

/// The runnable entry point of a unit: the `main` field of the last
/// structure that has one, as a closed computation.
pub fn find_main(defs: &[ElabDef]) -> Option<(Computation, Signature)> {
    for def in defs.iter().rev() {
        if let ElabDef::Mod {
            value, sig, layout, ..
        } = def
        {
            if let Some((main_v, Signature::Cmp(inner))) = project_field(value, sig, layout, "main")
            {
                let m = Computation::bind(main_v, Computation::Ret(Value::Var(0)));
                return Some((m, *inner));
            }
        }
    }
    None
}

/// Stable textual form of an elaborated unit, one definition per line.
pub fn emit_core(defs: &[ElabDef]) -> String {
    use modtt_core::pretty::{print_signature, print_value};
    let mut out = String::new();
    for def in defs {
        match def {
            ElabDef::Sig { name, sig, .. } => {
                out.push_str(&format!("(sig-def {} {})\n", name, print_signature(sig)));
            }
            ElabDef::Mod {
                name, value, sig, ..
            } => {
                out.push_str(&format!(
                    "(mod-def {} {} {})\n",
                    name,
                    print_signature(sig),
                    print_value(value)
                ));
            }
        }
    }
    out
}

/// Campaign over a worker pool: client indices are split into contiguous
/// chunks, reports merge by counting, and the reported counterexample is
/// the least-indexed one, so the result equals the sequential campaign's.
#[allow(clippy::too_many_arguments)]
pub fn campaign_parallel(
    m0: &Value,
    m1: &Value,
    iface: &Signature,
    n_clients: usize,
    max_len: usize,
    seed0: u64,
    fuel: FuelBudget,
    jobs: usize,
) -> Result<CampaignReport, TypeError> {
    let ctx = Context::empty();
    modtt_core::check::check_val(&ctx, m0, iface)?;
    modtt_core::check::check_val(&ctx, m1, iface)?;
    let jobs = jobs.max(1).min(n_clients.max(1));
    if jobs == 1 {
        return modtt_core::paramtest::campaign(m0, m1, iface, n_clients, max_len, seed0, fuel);
    }
    let chunk = n_clients.div_ceil(jobs);
    let mut partials: Vec<CampaignReport> = Vec::new();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for w in 0..jobs {
            let lo = w * chunk;
            let hi = ((w + 1) * chunk).min(n_clients);
            if lo >= hi {
                continue;
            }
            let m0 = m0.clone();
            let m1 = m1.clone();
            handles.push(scope.spawn(move || {
                let mut report = CampaignReport::default();
                for i in lo..hi {
                    let seed = seed0.wrapping_add(i as u64);
                    let script = gen_script(seed, max_len);
                    let mut client = compile_script(&script);
                    client.provenance = Provenance::Generated { seed };
                    match relate(&client, &m0, &m1, fuel) {
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
                report
            }));
        }
        for handle in handles {
            partials.push(handle.join().expect("campaign worker panicked"));
        }
    });
    let mut merged = CampaignReport::default();
    for part in partials {
        merged.agree += part.agree;
        merged.disagree += part.disagree;
        merged.inconclusive += part.inconclusive;
        if let Some(ce) = part.first_counterexample {
            match &merged.first_counterexample {
                Some(existing) if existing.index <= ce.index => {}
                _ => merged.first_counterexample = Some(ce),
            }
        }
    }
    Ok(merged)
}

pub fn report_json(
    report: &CampaignReport,
    impl_a: &str,
    impl_b: &str,
    sig: &str,
    clients: usize,
    max_len: usize,
    seed: u64,
) -> serde_json::Value {
    serde_json::json!({
        "impl_a": impl_a,
        "impl_b": impl_b,
        "signature": sig,
        "clients": clients,
        "max_len": max_len,
        "seed": seed,
        "agree": report.agree,
        "disagree": report.disagree,
        "inconclusive": report.inconclusive,
        "first_counterexample": report.first_counterexample.as_ref().map(|ce| {
            serde_json::json!({
                "index": ce.index,
                "seed": ce.seed,
                "script": ce.script,
                "outcome_a": ce.outcome_a,
                "outcome_b": ce.outcome_b,
            })
        }),
    })
}

/// Print a first-order runtime value.
pub fn print_outcome_value(v: &modtt_core::runtime::RtValue) -> String {
    match modtt_core::runtime::readback_first_order(v) {
        Some(nf) => modtt_core::pretty::print_value(&nf),
        None => "<higher-order value>".to_string(),
    }
}

/// The static projection behind `modtt static`: skeletons for signatures,
/// static normal forms for structures (with module-level transparency
/// stripped for readability).
pub fn static_of_item(defs: &[ElabDef], item: &str) -> Option<String> {
    use modtt_core::phase::{static_part_sig, static_part_val};
    let ctx = Context::empty();
    match find_def(defs, item)? {
        ElabDef::Sig { sig, .. } => Some(static_part_sig(&ctx, sig).print()),
        ElabDef::Mod { value, sig, .. } => {
            let (value, sig) = strip_transparency(value.clone(), sig.clone());
            let nf = static_part_val(&ctx, &value, &sig);
            Some(modtt_core::pretty::print_value(&nf))
        }
    }
}
