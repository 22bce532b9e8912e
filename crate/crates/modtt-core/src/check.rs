//! Bidirectional typechecking of signatures, values, and computations.
//!
//! Introduction forms check, elimination forms synthesize. Conversion is
//! delegated to the equality engine at the phase of the ambient context, so
//! the static connectivity rules come for free: under the static open a
//! term of `dyn t` or `○σ` sort compares equal to anything of that sort.

use alloc::format;
use alloc::string::String;

use crate::ctx::{Context, Phase};
use crate::nbe::{equal_sig, equal_val, normalize_val};
use crate::pretty::{print_signature, print_value};
use crate::syntax::{Computation, Signature, TypeCon, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TypeErrorKind {
    Mismatch,
    NotAFunction,
    NotAPair,
    ExtentSideCondition,
    Scope,
    PhaseViolation,
    DynamicInStatic,
    NeedsAnnotation,
}

impl TypeErrorKind {
    /// Stable machine-readable name, used by diagnostics and corpus sidecar
    /// files.
    pub fn name(self) -> &'static str {
        match self {
            TypeErrorKind::Mismatch => "mismatch",
            TypeErrorKind::NotAFunction => "not-a-function",
            TypeErrorKind::NotAPair => "not-a-pair",
            TypeErrorKind::ExtentSideCondition => "extent-side-condition",
            TypeErrorKind::Scope => "scope",
            TypeErrorKind::PhaseViolation => "phase-violation",
            TypeErrorKind::DynamicInStatic => "dynamic-in-static",
            TypeErrorKind::NeedsAnnotation => "needs-annotation",
        }
    }
}

/// A position in a surface source file; attached by the elaborator, absent
/// on errors from hand-constructed core terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

#[derive(Clone, Debug)]
pub struct TypeError {
    pub kind: TypeErrorKind,
    pub span: Option<Span>,
    pub expected: Option<String>,
    pub actual: Option<String>,
    pub message: String,
}

impl TypeError {
    pub fn new(kind: TypeErrorKind, message: String) -> TypeError {
        TypeError {
            kind,
            span: None,
            expected: None,
            actual: None,
            message,
        }
    }

    pub fn mismatch(message: String, expected: String, actual: String) -> TypeError {
        TypeError {
            kind: TypeErrorKind::Mismatch,
            span: None,
            expected: Some(expected),
            actual: Some(actual),
            message,
        }
    }

    pub fn with_span(mut self, span: Span) -> TypeError {
        if self.span.is_none() {
            self.span = Some(span);
        }
        self
    }
}

impl core::fmt::Display for TypeError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}: {}", self.kind.name(), self.message)?;
        if let Some(expected) = &self.expected {
            write!(f, "\n  expected: {}", expected)?;
        }
        if let Some(actual) = &self.actual {
            write!(f, "\n  actual:   {}", actual)?;
        }
        Ok(())
    }
}

pub type CheckResult = Result<(), TypeError>;

/// `Γ ⊢ σ sig`.
pub fn check_sig(ctx: &Context, sig: &Signature) -> CheckResult {
    match sig {
        Signature::Type => Ok(()),
        Signature::Dyn(t) => check_val(ctx, t, &Signature::Type),
        Signature::Pi(a, b) | Signature::Sigma(a, b) => {
            check_sig(ctx, a)?;
            check_sig(&ctx.with_var((**a).clone()), b)
        }
        Signature::Ext(base, v) => {
            check_sig(ctx, base)?;
            // The recorded static part is a module under the static open.
            check_val(&ctx.with_static_open(), v, base)
        }
        Signature::Cmp(inner) => check_sig(ctx, inner),
    }
}

/// `Γ ⊢ V : σ`. The signature is assumed well-formed.
pub fn check_val(ctx: &Context, v: &Value, sig: &Signature) -> CheckResult {
    match (v, sig) {
        (Value::Lam(body), Signature::Pi(dom, cod)) => {
            check_val(&ctx.with_var((**dom).clone()), body, cod)
        }
        (Value::Lam(_), _) => Err(TypeError::mismatch(
            String::from("a functor value requires a functor signature"),
            print_signature(sig),
            String::from("(lam _)"),
        )),
        (Value::Pair(a, b), Signature::Sigma(s1, s2)) => {
            check_val(ctx, a, s1)?;
            check_val(ctx, b, &s2.subst(a, 0))
        }
        (Value::Pair(a, b), Signature::Dyn(t)) => match type_head(ctx, t) {
            TypeHead::Prod(ta, tb) => {
                check_val(ctx, a, &Signature::Dyn(ta))?;
                check_val(ctx, b, &Signature::Dyn(tb))
            }
            _ => Err(TypeError::mismatch(
                String::from("a pair requires a product type"),
                print_signature(sig),
                print_value(v),
            )),
        },
        (Value::Pair(..), _) => Err(TypeError::mismatch(
            String::from("a pair requires a pair signature"),
            print_signature(sig),
            print_value(v),
        )),
        (Value::PFun(body), Signature::Dyn(t)) => match type_head(ctx, t) {
            TypeHead::PArrow(s, cod) => {
                let body_ctx = ctx.with_var(Signature::Dyn(s));
                check_cmp(&body_ctx, body, &Signature::Dyn(cod.shifted(1, 0)))
            }
            _ => Err(TypeError::mismatch(
                String::from("a partial function requires a partial function type"),
                print_signature(sig),
                String::from("(pfun _)"),
            )),
        },
        (Value::PFun(_), _) => Err(TypeError::mismatch(
            String::from("a partial function requires a dynamic signature"),
            print_signature(sig),
            String::from("(pfun _)"),
        )),
        (Value::Nil, Signature::Dyn(t)) => match type_head(ctx, t) {
            TypeHead::List(_) => Ok(()),
            _ => Err(TypeError::mismatch(
                String::from("nil requires a list type"),
                print_signature(sig),
                String::from("nil"),
            )),
        },
        (Value::Cons(h, tl), Signature::Dyn(t)) => match type_head(ctx, t) {
            TypeHead::List(e) => {
                check_val(ctx, h, &Signature::Dyn(e))?;
                check_val(ctx, tl, sig)
            }
            _ => Err(TypeError::mismatch(
                String::from("cons requires a list type"),
                print_signature(sig),
                print_value(v),
            )),
        },
        (Value::Nil | Value::Cons(..), _) => Err(TypeError::mismatch(
            String::from("a list value requires a dynamic signature"),
            print_signature(sig),
            print_value(v),
        )),
        (Value::InExt(va, w), Signature::Ext(base, vs)) => {
            check_val(ctx, w, base)?;
            let static_ctx = ctx.with_static_open();
            check_val(&static_ctx, va, base)?;
            if !equal_val(&static_ctx, w, va, base) {
                return Err(TypeError {
                    kind: TypeErrorKind::ExtentSideCondition,
                    span: None,
                    expected: Some(print_value(va)),
                    actual: Some(print_value(w)),
                    message: String::from(
                        "payload does not agree with the recorded static part under the static open",
                    ),
                });
            }
            if !equal_val(&static_ctx, va, vs, base) {
                return Err(TypeError {
                    kind: TypeErrorKind::ExtentSideCondition,
                    span: None,
                    expected: Some(print_value(vs)),
                    actual: Some(print_value(va)),
                    message: String::from("static part does not agree with the extent signature"),
                });
            }
            Ok(())
        }
        (Value::InExt(..), _) => Err(TypeError::mismatch(
            String::from("an extent introduction requires an extent signature"),
            print_signature(sig),
            print_value(v),
        )),
        (Value::Susp(m, ann), Signature::Cmp(inner)) => {
            check_sig(ctx, ann)?;
            if !equal_sig(ctx, ann, inner) {
                return Err(TypeError::mismatch(
                    String::from("suspension annotation disagrees with the expected signature"),
                    print_signature(inner),
                    print_signature(ann),
                ));
            }
            check_cmp(ctx, m, ann)
        }
        (Value::Susp(..), _) => Err(TypeError::mismatch(
            String::from("a suspension requires a computation signature"),
            print_signature(sig),
            print_value(v),
        )),
        (Value::Star, _) => {
            if ctx.phase() != Phase::Static {
                return Err(TypeError::new(
                    TypeErrorKind::PhaseViolation,
                    String::from("the connectivity point only exists under the static open"),
                ));
            }
            match sig {
                Signature::Dyn(_) | Signature::Cmp(_) => Ok(()),
                _ => Err(TypeError::mismatch(
                    String::from("the connectivity point inhabits statically connected sorts only"),
                    print_signature(sig),
                    String::from("star"),
                )),
            }
        }
        _ => {
            let actual = synth_val(ctx, v)?;
            if equal_sig(ctx, &actual, sig) {
                Ok(())
            } else {
                Err(TypeError::mismatch(
                    String::from("signature mismatch"),
                    print_signature(sig),
                    print_signature(&actual),
                ))
            }
        }
    }
}

/// `Γ ⊢ M ÷ σ`.
pub fn check_cmp(ctx: &Context, m: &Computation, sig: &Signature) -> CheckResult {
    match m {
        Computation::Ret(v) => check_val(ctx, v, sig),
        // One throw per signature; the effect needs no annotation.
        Computation::Throw => Ok(()),
        Computation::Bind(scrut, body) => {
            let scrut_sig = synth_val(ctx, scrut)?;
            match scrut_sig {
                Signature::Cmp(inner) => {
                    let body_ctx = ctx.with_var((*inner).clone());
                    check_cmp(&body_ctx, body, &sig.shifted(1, 0))
                }
                other => Err(TypeError::mismatch(
                    String::from("bind scrutinee must be a suspended computation"),
                    String::from("(cmp _)"),
                    print_signature(&other),
                )),
            }
        }
        Computation::If(b, m1, m2) => {
            check_val(ctx, b, &Signature::dyn_bool())?;
            check_cmp(ctx, m1, sig)?;
            check_cmp(ctx, m2, sig)
        }
        Computation::CaseList(scrut, mnil, mcons) => {
            let scrut_sig = synth_val(ctx, scrut)?;
            let elem = match &scrut_sig {
                Signature::Dyn(t) => match type_head(ctx, t) {
                    TypeHead::List(e) => e,
                    _ => {
                        return Err(TypeError::mismatch(
                            String::from("case scrutinee must be a list"),
                            String::from("(dyn (code (list _)))"),
                            print_signature(&scrut_sig),
                        ))
                    }
                },
                other => {
                    return Err(TypeError::mismatch(
                        String::from("case scrutinee must be a program value"),
                        String::from("(dyn _)"),
                        print_signature(other),
                    ))
                }
            };
            check_cmp(ctx, mnil, sig)?;
            let mut cons_ctx = ctx.clone();
            cons_ctx.push_var(Signature::Dyn(elem.clone()));
            cons_ctx.push_var(Signature::Dyn(Value::list_code(elem.shifted(1, 0))));
            check_cmp(&cons_ctx, mcons, &sig.shifted(2, 0))
        }
        Computation::AppP(f, a) => {
            // Applying a literal partial function: the result signature is
            // already known, so the body checks directly once the argument
            // synthesizes.
            if let Value::PFun(body) = f {
                if let Signature::Dyn(_) = sig {
                    let a_sig = synth_val(ctx, a)?;
                    return match a_sig {
                        Signature::Dyn(s) => {
                            let body_ctx = ctx.with_var(Signature::Dyn(s));
                            check_cmp(&body_ctx, body, &sig.shifted(1, 0))
                        }
                        other => Err(TypeError::mismatch(
                            String::from("partial functions apply to program values"),
                            String::from("(dyn _)"),
                            print_signature(&other),
                        )),
                    };
                }
            }
            let f_sig = synth_val(ctx, f)?;
            match &f_sig {
                Signature::Dyn(t) => match type_head(ctx, t) {
                    TypeHead::PArrow(s, cod) => {
                        check_val(ctx, a, &Signature::Dyn(s))?;
                        let result = Signature::Dyn(cod);
                        if equal_sig(ctx, &result, sig) {
                            Ok(())
                        } else {
                            Err(TypeError::mismatch(
                                String::from("application result mismatch"),
                                print_signature(sig),
                                print_signature(&result),
                            ))
                        }
                    }
                    _ => Err(TypeError::new(
                        TypeErrorKind::NotAFunction,
                        format!("cannot apply a value of type {}", print_value(t)),
                    )),
                },
                other => Err(TypeError::new(
                    TypeErrorKind::NotAFunction,
                    format!(
                        "cannot apply a value of signature {}",
                        print_signature(other)
                    ),
                )),
            }
        }
    }
}

/// Principal signature of a synthesizable value.
pub fn synth_val(ctx: &Context, v: &Value) -> Result<Signature, TypeError> {
    match v {
        Value::Var(i) => ctx
            .lookup(*i)
            .ok_or_else(|| TypeError::new(TypeErrorKind::Scope, format!("unbound variable {}", i))),
        Value::App(f, a) => {
            let f_sig = synth_val(ctx, f)?;
            match f_sig {
                Signature::Pi(dom, cod) => {
                    check_val(ctx, a, &dom)?;
                    Ok(cod.subst(a, 0))
                }
                other => Err(TypeError::new(
                    TypeErrorKind::NotAFunction,
                    format!(
                        "cannot apply a module of signature {}",
                        print_signature(&other)
                    ),
                )),
            }
        }
        Value::Fst(p) => match synth_val(ctx, p)? {
            Signature::Sigma(a, _) => Ok(*a),
            Signature::Dyn(t) => match type_head(ctx, &t) {
                TypeHead::Prod(a, _) => Ok(Signature::Dyn(a)),
                _ => Err(TypeError::new(
                    TypeErrorKind::NotAPair,
                    format!("cannot project from a value of type {}", print_value(&t)),
                )),
            },
            other => Err(TypeError::new(
                TypeErrorKind::NotAPair,
                format!("cannot project from signature {}", print_signature(&other)),
            )),
        },
        Value::Snd(p) => match synth_val(ctx, p)? {
            Signature::Sigma(_, b) => Ok(b.subst(&Value::fst((**p).clone()), 0)),
            Signature::Dyn(t) => match type_head(ctx, &t) {
                TypeHead::Prod(_, b) => Ok(Signature::Dyn(b)),
                _ => Err(TypeError::new(
                    TypeErrorKind::NotAPair,
                    format!("cannot project from a value of type {}", print_value(&t)),
                )),
            },
            other => Err(TypeError::new(
                TypeErrorKind::NotAPair,
                format!("cannot project from signature {}", print_signature(&other)),
            )),
        },
        Value::OutExt(u) => match synth_val(ctx, u)? {
            Signature::Ext(base, _) => Ok(*base),
            other => Err(TypeError::mismatch(
                String::from("out-projection requires an extent signature"),
                String::from("(ext _ _)"),
                print_signature(&other),
            )),
        },
        Value::TypeCode(tc) => {
            match tc {
                TypeCon::Bool => {}
                TypeCon::PArrow(s, t) | TypeCon::Prod(s, t) => {
                    check_val(ctx, s, &Signature::Type)?;
                    check_val(ctx, t, &Signature::Type)?;
                }
                TypeCon::List(e) => check_val(ctx, e, &Signature::Type)?,
            }
            Ok(Signature::Type)
        }
        Value::Tt | Value::Ff => Ok(Signature::dyn_bool()),
        Value::Susp(m, ann) => {
            check_sig(ctx, ann)?;
            check_cmp(ctx, m, ann)?;
            Ok(Signature::cmp((**ann).clone()))
        }
        Value::Rev(elem) => {
            check_val(ctx, elem, &Signature::Type)?;
            Ok(Signature::Dyn(Value::parrow_code(
                Value::list_code((**elem).clone()),
                Value::list_code((**elem).clone()),
            )))
        }
        // A pair of synthesizable components has a principal signature: a
        // product when both are program values, a non-dependent sum
        // otherwise.
        Value::Pair(a, b) => {
            let sa = synth_val(ctx, a)?;
            let sb = synth_val(ctx, b)?;
            match (sa, sb) {
                (Signature::Dyn(ta), Signature::Dyn(tb)) => {
                    Ok(Signature::Dyn(Value::prod_code(ta, tb)))
                }
                (sa, sb) => Ok(Signature::sigma(sa, sb.shifted(1, 0))),
            }
        }
        Value::Lam(_)
        | Value::InExt(..)
        | Value::PFun(_)
        | Value::Nil
        | Value::Cons(..)
        | Value::Star => Err(TypeError::new(
            TypeErrorKind::NeedsAnnotation,
            String::from("this form only checks against a given signature"),
        )),
    }
}

enum TypeHead {
    Bool,
    PArrow(Value, Value),
    List(Value),
    Prod(Value, Value),
    Other,
}

/// Weak head of a type value, up to judgmental equality.
fn type_head(ctx: &Context, t: &Value) -> TypeHead {
    let nf = normalize_val(ctx, t, &Signature::Type);
    match nf {
        Value::TypeCode(TypeCon::Bool) => TypeHead::Bool,
        Value::TypeCode(TypeCon::PArrow(s, t)) => TypeHead::PArrow(*s, *t),
        Value::TypeCode(TypeCon::List(e)) => TypeHead::List(*e),
        Value::TypeCode(TypeCon::Prod(a, b)) => TypeHead::Prod(*a, *b),
        _ => TypeHead::Other,
    }
}
