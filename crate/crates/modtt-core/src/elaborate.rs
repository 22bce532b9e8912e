//! Elaboration of the surface language into core terms.
//!
//! Named fields become iterated dependent-sum projections; transparent type
//! fields and `where type` become static extents; functors become functions
//! into the lax modality, so every application is generative and must be
//! bound. Signature matching inserts η-guided coercions: width and
//! permutation by field name, depth at functors, pairs, and suspensions,
//! extent introduction when the static side condition holds, and extent
//! elimination when transparency is forgotten.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::check::{check_sig, check_val, Span, TypeError, TypeErrorKind};
use crate::ctx::Context;
use crate::nbe::{equal_sig, equal_val, normalize_val};
use crate::phase::static_part_val;
use crate::surface::{SDecl, SExpr, SMember, SPat, SPath, SSig, SSpec, STy};
use crate::syntax::{Computation, Signature, TypeCon, Value};

type Result<T> = core::result::Result<T, TypeError>;

fn err(kind: TypeErrorKind, span: Span, message: String) -> TypeError {
    TypeError::new(kind, message).with_span(span)
}

// ---------------------------------------------------------------------------
// Layouts
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Proj {
    Fst,
    Snd,
}

/// Field-name metadata for an elaborated signature: the projection path of
/// every named field in the right-nested sum.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Layout {
    pub fields: Vec<(String, Vec<Proj>)>,
}

impl Layout {
    fn empty() -> Layout {
        Layout::default()
    }

    /// Paths for `n` fields in a right-nested sum.
    fn for_fields(names: &[String]) -> Layout {
        let n = names.len();
        let mut fields = Vec::with_capacity(n);
        for (i, name) in names.iter().enumerate() {
            let mut path = alloc::vec![Proj::Snd; i];
            if i + 1 < n {
                path.push(Proj::Fst);
            }
            fields.push((name.clone(), path));
        }
        Layout { fields }
    }

    pub fn path_of(&self, name: &str) -> Option<&[Proj]> {
        self.fields
            .iter()
            .find(|(f, _)| f == name)
            .map(|(_, p)| p.as_slice())
    }

    fn index_of(&self, name: &str) -> Option<usize> {
        self.fields.iter().position(|(f, _)| f == name)
    }
}

fn apply_projs(mut v: Value, path: &[Proj]) -> Value {
    for p in path {
        v = match p {
            Proj::Fst => fst_smart(v),
            Proj::Snd => snd_smart(v),
        };
    }
    v
}

// ---------------------------------------------------------------------------
// Environment
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
enum Binding {
    SigDef {
        sig: Signature,
        layout: Layout,
    },
    /// A definition spliced at use sites. `depth` is the binder depth at
    /// which the value was formed; splicing under further binders weakens
    /// it by the difference.
    ModDef {
        value: Value,
        sig: Signature,
        layout: Layout,
        depth: usize,
    },
    /// A variable bound in the current term; `level` counts binders below
    /// it, and `sig` is well-scoped at that level.
    ModVar {
        level: usize,
        sig: Signature,
        layout: Layout,
    },
}

pub struct Elaborator {
    scopes: Vec<Vec<(String, Binding)>>,
    ctx: Context,
    depth: usize,
}

/// The elaborated form of one top-level declaration.
#[derive(Clone, Debug)]
pub enum ElabDef {
    Sig {
        name: String,
        sig: Signature,
        layout: Layout,
    },
    Mod {
        name: String,
        value: Value,
        sig: Signature,
        layout: Layout,
    },
}

/// One elaborated term: a value or a computation, with its signature and
/// the field layout it exposes.
#[derive(Clone, Debug)]
pub struct ElabTerm {
    pub term: Term,
    pub sig: Signature,
    pub layout: Layout,
}

#[derive(Clone, Debug)]
pub enum Term {
    Val(Value),
    Cmp(Computation),
}

impl Default for Elaborator {
    fn default() -> Elaborator {
        Elaborator::new()
    }
}

impl Elaborator {
    pub fn new() -> Elaborator {
        Elaborator {
            scopes: alloc::vec![Vec::new()],
            ctx: Context::empty(),
            depth: 0,
        }
    }

    fn lookup(&self, name: &str) -> Option<&Binding> {
        for scope in self.scopes.iter().rev() {
            for (n, b) in scope.iter().rev() {
                if n == name {
                    return Some(b);
                }
            }
        }
        None
    }

    fn define(&mut self, name: String, binding: Binding) {
        self.scopes.last_mut().unwrap().push((name, binding));
    }

    fn push_scope(&mut self) {
        self.scopes.push(Vec::new());
    }

    fn pop_scope(&mut self) {
        self.scopes.pop();
    }

    /// Bind a term variable: extends the core context and the name scope.
    fn push_var(&mut self, name: Option<&str>, sig: Signature, layout: Layout) {
        let level = self.depth;
        self.ctx.push_var(sig.clone());
        self.depth += 1;
        if let Some(name) = name {
            self.define(String::from(name), Binding::ModVar { level, sig, layout });
        }
    }

    fn pop_var(&mut self) {
        self.ctx.pop();
        self.depth -= 1;
    }

    // -----------------------------------------------------------------------
    // Paths
    // -----------------------------------------------------------------------

    /// Resolve a path to a value with its signature and layout, peeling
    /// module-level transparency wrappers along the way.
    fn resolve_path(&self, path: &SPath) -> Result<ElabTerm> {
        let head = &path.parts[0];
        let (mut value, mut sig, mut layout) = match self.lookup(head) {
            Some(Binding::ModDef {
                value,
                sig,
                layout,
                depth,
            }) => {
                let by = self.depth - depth;
                (value.shifted(by, 0), sig.shifted(by, 0), layout.clone())
            }
            Some(Binding::ModVar { level, sig, layout }) => {
                let index = self.depth - 1 - level;
                (
                    Value::Var(index),
                    sig.shifted(self.depth - level, 0),
                    layout.clone(),
                )
            }
            Some(Binding::SigDef { .. }) => {
                return Err(err(
                    TypeErrorKind::Mismatch,
                    path.span,
                    format!("'{}' is a signature, not a module", head),
                ))
            }
            None => {
                return Err(err(
                    TypeErrorKind::Scope,
                    path.span,
                    format!("unresolved name '{}'", head),
                ))
            }
        };
        for field in &path.parts[1..] {
            // Strip transparency before projecting.
            while let Signature::Ext(base, _) = sig {
                value = strip_ext(value);
                sig = *base;
            }
            let idx = layout.index_of(field).ok_or_else(|| {
                err(
                    TypeErrorKind::Scope,
                    path.span,
                    format!("no field '{}' in this module", field),
                )
            })?;
            let (new_value, new_sig) = project_component(&value, &sig, &layout, idx);
            value = new_value;
            sig = new_sig;
            layout = Layout::empty();
        }
        Ok(ElabTerm {
            term: Term::Val(value),
            sig,
            layout,
        })
    }

    /// A path used as an object-level type: the resolved component must be
    /// a type, possibly behind a transparency wrapper.
    fn path_as_type(&self, path: &SPath) -> Result<Value> {
        let t = self.resolve_path(path)?;
        let (mut value, mut sig) = match t.term {
            Term::Val(v) => (v, t.sig),
            Term::Cmp(_) => unreachable!("paths elaborate to values"),
        };
        loop {
            match sig {
                Signature::Type => return Ok(value),
                Signature::Ext(base, _) => {
                    value = strip_ext(value);
                    sig = *base;
                }
                other => {
                    return Err(err(
                        TypeErrorKind::Mismatch,
                        path.span,
                        format!(
                            "path does not denote a type (its signature is {})",
                            crate::pretty::print_signature(&other)
                        ),
                    ))
                }
            }
        }
    }

    // -----------------------------------------------------------------------
    // Types and signatures
    // -----------------------------------------------------------------------

    fn elab_ty(&self, ty: &STy) -> Result<Value> {
        match ty {
            STy::Bool => Ok(Value::bool_code()),
            STy::Path(p) => self.path_as_type(p),
            STy::List(e) => Ok(Value::list_code(self.elab_ty(e)?)),
            STy::Prod(a, b) => Ok(Value::prod_code(self.elab_ty(a)?, self.elab_ty(b)?)),
            STy::Arrow(a, b) => Ok(Value::parrow_code(self.elab_ty(a)?, self.elab_ty(b)?)),
        }
    }

    pub fn elab_sig(&mut self, ssig: &SSig) -> Result<(Signature, Layout)> {
        match ssig {
            SSig::Named(name, span) => match self.lookup(name) {
                Some(Binding::SigDef { sig, layout }) => Ok((sig.clone(), layout.clone())),
                Some(_) => Err(err(
                    TypeErrorKind::Mismatch,
                    *span,
                    format!("'{}' is not a signature", name),
                )),
                None => Err(err(
                    TypeErrorKind::Scope,
                    *span,
                    format!("unresolved signature '{}'", name),
                )),
            },
            SSig::Body(specs, _span) => self.elab_sig_body(specs),
            SSig::WhereType(base, path, ty, span) => {
                let (base_sig, layout) = self.elab_sig(base)?;
                let ty_val = self.elab_ty(ty)?;
                if path.parts.len() != 1 {
                    return Err(err(
                        TypeErrorKind::Scope,
                        *span,
                        String::from("where-type paths into substructures are not supported"),
                    ));
                }
                let value = build_where_value(&base_sig, &layout, &path.parts[0], &ty_val, *span)?;
                Ok((Signature::ext(base_sig, value), layout))
            }
            SSig::Arrow(param, dom, cod, _span) => {
                let (dom_sig, dom_layout) = self.elab_sig(dom)?;
                self.push_var(Some(param), dom_sig.clone(), dom_layout);
                self.push_scope();
                let cod_res = self.elab_sig(cod);
                self.pop_scope();
                self.pop_var();
                // The layout travels to application results.
                let (cod_sig, cod_layout) = cod_res?;
                Ok((Signature::pi(dom_sig, Signature::cmp(cod_sig)), cod_layout))
            }
        }
    }

    fn elab_sig_body(&mut self, specs: &[SSpec]) -> Result<(Signature, Layout)> {
        // The empty signature is the canonical purely static singleton.
        if specs.is_empty() {
            return Ok((
                Signature::ext(Signature::Type, Value::bool_code()),
                Layout::empty(),
            ));
        }
        let mut names = Vec::new();
        let mut field_sigs = Vec::new();
        self.push_scope();
        for spec in specs {
            let (name, span, field_sig) = match spec {
                SSpec::TypeAbs(name, span) => (name, span, Signature::Type),
                SSpec::TypeEq(name, ty, span) => {
                    let c = match self.elab_ty(ty) {
                        Ok(c) => c,
                        Err(e) => {
                            self.cleanup_fields(names.len());
                            return Err(e);
                        }
                    };
                    (name, span, Signature::ext(Signature::Type, c))
                }
                SSpec::Val(name, ty, span) => {
                    let c = match self.elab_ty(ty) {
                        Ok(c) => c,
                        Err(e) => {
                            self.cleanup_fields(names.len());
                            return Err(e);
                        }
                    };
                    (name, span, Signature::Dyn(c))
                }
            };
            if names.contains(name) {
                self.cleanup_fields(names.len());
                return Err(err(
                    TypeErrorKind::Mismatch,
                    *span,
                    format!("duplicate field '{}'", name),
                ));
            }
            self.push_var(Some(name), field_sig.clone(), Layout::empty());
            names.push(name.clone());
            field_sigs.push(field_sig);
        }
        self.cleanup_fields(names.len());
        let mut sig = field_sigs.pop().unwrap();
        for field_sig in field_sigs.into_iter().rev() {
            sig = Signature::sigma(field_sig, sig);
        }
        Ok((sig, Layout::for_fields(&names)))
    }

    fn cleanup_fields(&mut self, n: usize) {
        for _ in 0..n {
            self.pop_var();
        }
        self.pop_scope();
    }

    // -----------------------------------------------------------------------
    // Expressions
    // -----------------------------------------------------------------------

    /// Synthesize a term and its signature.
    pub fn elab_expr(&mut self, e: &SExpr) -> Result<ElabTerm> {
        match e {
            SExpr::Path(p) => {
                if p.parts.len() == 1 && self.lookup(&p.parts[0]).is_none() {
                    return Err(err(
                        TypeErrorKind::Scope,
                        p.span,
                        format!("unresolved name '{}'", p.parts[0]),
                    ));
                }
                self.resolve_path(p)
            }
            SExpr::Tt(_) => Ok(val_term(Value::Tt, Signature::dyn_bool())),
            SExpr::Ff(_) => Ok(val_term(Value::Ff, Signature::dyn_bool())),
            SExpr::Nil(span) => Err(err(
                TypeErrorKind::NeedsAnnotation,
                *span,
                String::from("the type of nil cannot be inferred here"),
            )),
            SExpr::Throw(span) => Err(err(
                TypeErrorKind::NeedsAnnotation,
                *span,
                String::from("the signature of throw cannot be inferred here"),
            )),
            SExpr::Cons(h, t, span) => {
                let head = self.elab_expr(h)?;
                let hv = expect_val(head.term, *span)?;
                let elem = match &head.sig {
                    Signature::Dyn(t) => t.clone(),
                    other => {
                        return Err(err(
                            TypeErrorKind::Mismatch,
                            *span,
                            format!(
                                "list elements are program values, got {}",
                                crate::pretty::print_signature(other)
                            ),
                        ))
                    }
                };
                let list_sig = Signature::Dyn(Value::list_code(elem));
                let tail = self.elab_val_against(t, &list_sig, &Layout::empty())?;
                Ok(val_term(Value::cons(hv, tail), list_sig))
            }
            SExpr::Pair(a, b, span) => {
                let ta = self.elab_expr(a)?;
                let tb = self.elab_expr(b)?;
                let va = expect_val(ta.term, *span)?;
                let vb = expect_val(tb.term, *span)?;
                match (&ta.sig, &tb.sig) {
                    (Signature::Dyn(s), Signature::Dyn(t)) => {
                        let sig = Signature::Dyn(Value::prod_code(s.clone(), t.clone()));
                        Ok(val_term(Value::pair(va, vb), sig))
                    }
                    _ => {
                        let sig = Signature::sigma(ta.sig, tb.sig.shifted(1, 0));
                        Ok(val_term(Value::pair(va, vb), sig))
                    }
                }
            }
            SExpr::App(f, a, span) => self.elab_app(f, a, *span),
            SExpr::Ret(inner, span) => {
                let t = self.elab_expr(inner)?;
                let v = expect_val(t.term, *span)?;
                Ok(ElabTerm {
                    term: Term::Cmp(Computation::Ret(v)),
                    sig: t.sig,
                    layout: t.layout,
                })
            }
            SExpr::Bind {
                name,
                rhs,
                body,
                span,
            } => self.elab_bind(name, rhs, body, *span),
            SExpr::Let {
                name,
                opaque,
                sig,
                rhs,
                body,
                span,
            } => self.elab_let(name, *opaque, sig.as_ref(), rhs, body, *span),
            SExpr::If(c, t, e, _span) => {
                let cond = self.elab_val_against(c, &Signature::dyn_bool(), &Layout::empty())?;
                let tt = self.elab_expr_cmp(t)?;
                let te = self.elab_cmp_against(e, &tt.sig, &tt.layout)?;
                Ok(ElabTerm {
                    term: Term::Cmp(Computation::if_(cond, as_cmp(tt.term), te)),
                    sig: tt.sig,
                    layout: tt.layout,
                })
            }
            SExpr::Case {
                scrut,
                nil_arm,
                head,
                tail,
                cons_arm,
                span,
            } => {
                let s = self.elab_expr(scrut)?;
                let sv = expect_val(s.term, *span)?;
                let elem = match &s.sig {
                    Signature::Dyn(t) => match self.type_head_of(t) {
                        Some(TypeCon::List(e)) => *e,
                        _ => {
                            return Err(err(
                                TypeErrorKind::Mismatch,
                                *span,
                                String::from("case analysis requires a list"),
                            ))
                        }
                    },
                    _ => {
                        return Err(err(
                            TypeErrorKind::Mismatch,
                            *span,
                            String::from("case analysis requires a program value"),
                        ))
                    }
                };
                let nil = self.elab_expr_cmp(nil_arm)?;
                // Bind head then tail for the cons branch.
                self.push_var(Some(head), Signature::Dyn(elem.clone()), Layout::empty());
                self.push_var(
                    Some(tail),
                    Signature::Dyn(Value::list_code(elem.shifted(1, 0))),
                    Layout::empty(),
                );
                let expected = nil.sig.shifted(2, 0);
                let cons = self.elab_cmp_against(cons_arm, &expected, &nil.layout);
                self.pop_var();
                self.pop_var();
                let cons = cons?;
                Ok(ElabTerm {
                    term: Term::Cmp(Computation::case_list(sv, as_cmp(nil.term), cons)),
                    sig: nil.sig,
                    layout: nil.layout,
                })
            }
            SExpr::Fn { span, .. } => Err(err(
                TypeErrorKind::NeedsAnnotation,
                *span,
                String::from("a function needs an expected partial function type"),
            )),
            SExpr::Struct(members, span) => self.elab_struct_synth(members, *span),
        }
    }

    fn type_head_of(&self, t: &Value) -> Option<TypeCon> {
        match normalize_val(&self.ctx, t, &Signature::Type) {
            Value::TypeCode(tc) => Some(tc),
            _ => None,
        }
    }

    /// Elaborate an expression that must be a computation; pure values are
    /// wrapped in `ret`.
    fn elab_expr_cmp(&mut self, e: &SExpr) -> Result<ElabTerm> {
        let t = self.elab_expr(e)?;
        Ok(promote_to_cmp(t))
    }

    fn elab_app(&mut self, f: &SExpr, a: &SExpr, span: Span) -> Result<ElabTerm> {
        // Built-in heads: rev, fst, snd.
        if let SExpr::Path(p) = f {
            if p.parts.len() == 1 && self.lookup(&p.parts[0]).is_none() {
                match p.parts[0].as_str() {
                    "rev" => {
                        let arg = self.elab_expr(a)?;
                        let av = expect_val(arg.term, span)?;
                        let elem = match &arg.sig {
                            Signature::Dyn(t) => match self.type_head_of(t) {
                                Some(TypeCon::List(e)) => *e,
                                _ => {
                                    return Err(err(
                                        TypeErrorKind::Mismatch,
                                        span,
                                        String::from("rev applies to lists"),
                                    ))
                                }
                            },
                            _ => {
                                return Err(err(
                                    TypeErrorKind::Mismatch,
                                    span,
                                    String::from("rev applies to program values"),
                                ))
                            }
                        };
                        let sig = Signature::Dyn(Value::list_code(elem.clone()));
                        return Ok(ElabTerm {
                            term: Term::Cmp(Computation::app_p(Value::rev(elem), av)),
                            sig,
                            layout: Layout::empty(),
                        });
                    }
                    "fst" | "snd" => {
                        let first = p.parts[0] == "fst";
                        let arg = self.elab_expr(a)?;
                        let av = expect_val(arg.term, span)?;
                        return self.elab_proj(av, &arg.sig, first, span);
                    }
                    _ => {}
                }
            }
        }
        let ft = self.elab_expr(f)?;
        let mut fv = expect_val(ft.term, span)?;
        let mut fsig = ft.sig;
        // Strip transparency to reach an applicable signature.
        while let Signature::Ext(base, _) = fsig {
            fv = strip_ext(fv);
            fsig = *base;
        }
        match fsig {
            Signature::Pi(dom, cod) => {
                let arg = self.elab_expr(a)?;
                let arg_v = expect_val(arg.term, span)?;
                let coerced =
                    self.coerce(arg_v, &arg.sig, &arg.layout, &dom, &Layout::empty(), span)?;
                let result_sig = contract_admin_sig(&cod.subst(&coerced, 0));
                // Splice spliced functors by β so the result synthesizes;
                // contract the administrative redexes this introduces.
                let applied = match fv {
                    Value::Lam(body) => contract_admin_val(&body.subst(&coerced, 0)),
                    other => Value::app(other, coerced),
                };
                Ok(ElabTerm {
                    term: Term::Val(applied),
                    sig: result_sig,
                    layout: ft.layout,
                })
            }
            Signature::Dyn(t) => match self.type_head_of(&t) {
                Some(TypeCon::PArrow(s, cod)) => {
                    let arg_sig = Signature::Dyn((*s).clone());
                    let av = self.elab_val_against(a, &arg_sig, &Layout::empty())?;
                    // A literal function head cannot synthesize; bind it
                    // first so the application head is a variable.
                    let term = if matches!(fv, Value::PFun(_)) {
                        let fn_sig = Signature::Dyn(Value::parrow_code(*s, (*cod).clone()));
                        Term::Cmp(Computation::bind(
                            Value::susp(Computation::Ret(fv), fn_sig),
                            Computation::app_p(Value::Var(0), av.shifted(1, 0)),
                        ))
                    } else {
                        Term::Cmp(Computation::app_p(fv, av))
                    };
                    Ok(ElabTerm {
                        term,
                        sig: Signature::Dyn(*cod),
                        layout: Layout::empty(),
                    })
                }
                _ => Err(err(
                    TypeErrorKind::NotAFunction,
                    span,
                    String::from("this value cannot be applied"),
                )),
            },
            other => Err(err(
                TypeErrorKind::NotAFunction,
                span,
                format!(
                    "a module of signature {} cannot be applied",
                    crate::pretty::print_signature(&other)
                ),
            )),
        }
    }

    fn elab_proj(
        &mut self,
        v: Value,
        sig: &Signature,
        first: bool,
        span: Span,
    ) -> Result<ElabTerm> {
        let mut v = v;
        let mut sig = sig.clone();
        while let Signature::Ext(base, _) = sig {
            v = strip_ext(v);
            sig = *base;
        }
        match &sig {
            Signature::Dyn(t) => match self.type_head_of(t) {
                Some(TypeCon::Prod(a, b)) => {
                    let (proj, component) = if first {
                        (fst_smart(v), *a)
                    } else {
                        (snd_smart(v), *b)
                    };
                    Ok(val_term(proj, Signature::Dyn(component)))
                }
                _ => Err(err(
                    TypeErrorKind::NotAPair,
                    span,
                    String::from("projection requires a product"),
                )),
            },
            Signature::Sigma(a, b) => {
                if first {
                    Ok(val_term(fst_smart(v), (**a).clone()))
                } else {
                    let fst = fst_smart(v.clone());
                    let snd_sig = contract_admin_sig(&b.subst(&fst, 0));
                    Ok(val_term(snd_smart(v), snd_sig))
                }
            }
            _ => Err(err(
                TypeErrorKind::NotAPair,
                span,
                String::from("projection requires a pair"),
            )),
        }
    }

    fn elab_bind(&mut self, name: &str, rhs: &SExpr, body: &SExpr, span: Span) -> Result<ElabTerm> {
        let r = self.elab_expr(rhs)?;
        let (scrut, inner_sig, inner_layout) = match (r.term, r.sig) {
            // A value of `○σ` binds directly.
            (Term::Val(v), Signature::Cmp(inner)) => (v, *inner, r.layout),
            // An effectful right-hand side is suspended.
            (Term::Cmp(m), sig) => {
                let scrut = Value::susp(m, sig.clone());
                (scrut, sig, r.layout)
            }
            // A pure value: `bind` degenerates to a monadic let.
            (Term::Val(v), sig) => {
                let scrut = Value::susp(Computation::Ret(v), sig.clone());
                (scrut, sig, r.layout)
            }
        };
        self.push_var(Some(name), inner_sig, inner_layout);
        self.push_scope();
        let body_res = self.elab_expr_cmp(body);
        self.pop_scope();
        self.pop_var();
        let body_t = body_res?;
        let result_sig = try_unshift(&body_t.sig).ok_or_else(|| {
            err(
                TypeErrorKind::Mismatch,
                span,
                String::from("the result signature depends on a generatively bound module"),
            )
        })?;
        Ok(ElabTerm {
            term: Term::Cmp(Computation::bind(scrut, as_cmp(body_t.term))),
            sig: result_sig,
            layout: body_t.layout,
        })
    }

    fn elab_let(
        &mut self,
        name: &str,
        opaque: bool,
        sig: Option<&SSig>,
        rhs: &SExpr,
        body: &SExpr,
        span: Span,
    ) -> Result<ElabTerm> {
        // An ascribed struct literal elaborates in checking mode so that its
        // fun members see their expected types.
        if let (Some(ssig), SExpr::Struct(members, _)) = (sig, rhs) {
            let (target, target_layout) = self.elab_sig(ssig)?;
            let coerced = self.elab_struct_against(members, &target, &target_layout, span)?;
            return self.finish_let(name, opaque, coerced, target, target_layout, body, span);
        }
        let r = self.elab_expr(rhs)?;
        let rv = match r.term {
            Term::Val(v) => v,
            Term::Cmp(_) => {
                return Err(err(
                    TypeErrorKind::Mismatch,
                    span,
                    String::from("an effectful module must be bound with 'bind'"),
                ))
            }
        };
        match sig {
            None => {
                // Plain substitution.
                self.push_scope();
                let depth = self.depth;
                self.define(
                    String::from(name),
                    Binding::ModDef {
                        value: rv,
                        sig: r.sig,
                        layout: r.layout,
                        depth,
                    },
                );
                let body_res = self.elab_expr(body);
                self.pop_scope();
                body_res
            }
            Some(ssig) => {
                let (target, target_layout) = self.elab_sig(ssig)?;
                let coerced = self.coerce(rv, &r.sig, &r.layout, &target, &target_layout, span)?;
                self.finish_let(name, opaque, coerced, target, target_layout, body, span)
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn finish_let(
        &mut self,
        name: &str,
        opaque: bool,
        coerced: Value,
        target: Signature,
        target_layout: Layout,
        body: &SExpr,
        span: Span,
    ) -> Result<ElabTerm> {
        if opaque {
            // Static abstraction: the body sees an opaque variable,
            // introduced through the monadic let.
            self.push_var(Some(name), target.clone(), target_layout);
            self.push_scope();
            let body_res = self.elab_expr_cmp(body);
            self.pop_scope();
            self.pop_var();
            let body_t = body_res?;
            let result_sig = try_unshift(&body_t.sig).ok_or_else(|| {
                err(
                    TypeErrorKind::Mismatch,
                    span,
                    String::from("the result signature depends on a sealed module"),
                )
            })?;
            Ok(ElabTerm {
                term: Term::Cmp(Computation::bind(
                    Value::susp(Computation::Ret(coerced), target),
                    as_cmp(body_t.term),
                )),
                sig: result_sig,
                layout: body_t.layout,
            })
        } else {
            // Transparent: record the static identity and substitute.
            let (value, final_sig) = self.selfify(coerced, &target, span)?;
            self.push_scope();
            let depth = self.depth;
            self.define(
                String::from(name),
                Binding::ModDef {
                    value,
                    sig: final_sig,
                    layout: target_layout,
                    depth,
                },
            );
            let body_res = self.elab_expr(body);
            self.pop_scope();
            body_res
        }
    }

    /// Record the known static identity of a value: wrap it at the extent
    /// of its own static part.
    fn selfify(&self, v: Value, sig: &Signature, span: Span) -> Result<(Value, Signature)> {
        let static_part = static_part_val(&self.ctx, &v, sig);
        let final_sig = Signature::ext(sig.clone(), static_part.clone());
        let value = Value::in_ext(static_part, v);
        // The elaborator only selfifies values it has just checked.
        check_val(&self.ctx, &value, &final_sig).map_err(|e| e.with_span(span))?;
        Ok((value, final_sig))
    }

    /// Check an expression against an expected signature, pushing the
    /// expectation into introduction forms and coercing at the leaves.
    fn elab_val_against(
        &mut self,
        e: &SExpr,
        expected: &Signature,
        expected_layout: &Layout,
    ) -> Result<Value> {
        let span = e.span();
        match (e, expected) {
            (SExpr::Nil(_), Signature::Dyn(t)) => match self.type_head_of(t) {
                Some(TypeCon::List(_)) => Ok(Value::Nil),
                _ => Err(err(
                    TypeErrorKind::Mismatch,
                    span,
                    String::from("nil requires a list type"),
                )),
            },
            (SExpr::Cons(h, tl, _), Signature::Dyn(t)) => match self.type_head_of(t) {
                Some(TypeCon::List(e_ty)) => {
                    let hv = self.elab_val_against(h, &Signature::Dyn(*e_ty), &Layout::empty())?;
                    let tv = self.elab_val_against(tl, expected, &Layout::empty())?;
                    Ok(Value::cons(hv, tv))
                }
                _ => Err(err(
                    TypeErrorKind::Mismatch,
                    span,
                    String::from("cons requires a list type"),
                )),
            },
            (SExpr::Pair(a, b, _), Signature::Dyn(t)) => match self.type_head_of(t) {
                Some(TypeCon::Prod(ta, tb)) => {
                    let av = self.elab_val_against(a, &Signature::Dyn(*ta), &Layout::empty())?;
                    let bv = self.elab_val_against(b, &Signature::Dyn(*tb), &Layout::empty())?;
                    Ok(Value::pair(av, bv))
                }
                _ => Err(err(
                    TypeErrorKind::Mismatch,
                    span,
                    String::from("a tuple requires a product type"),
                )),
            },
            (SExpr::Pair(a, b, _), Signature::Sigma(s1, s2)) => {
                let av = self.elab_val_against(a, s1, &Layout::empty())?;
                let bv = self.elab_val_against(b, &s2.subst(&av, 0), &Layout::empty())?;
                Ok(Value::pair(av, bv))
            }
            (SExpr::Fn { pat, body, .. }, Signature::Dyn(t)) => match self.type_head_of(t) {
                Some(TypeCon::PArrow(s, cod)) => {
                    self.push_var(None, Signature::Dyn(*s.clone()), Layout::empty());
                    self.push_scope();
                    let bind_res = self.bind_pattern(pat, Value::Var(0), &Signature::Dyn(*s), span);
                    let body_res = bind_res.and_then(|()| {
                        let expected = Signature::Dyn(cod.shifted(1, 0));
                        self.elab_cmp_against(body, &expected, &Layout::empty())
                    });
                    self.pop_scope();
                    self.pop_var();
                    Ok(Value::pfun(body_res?))
                }
                _ => Err(err(
                    TypeErrorKind::Mismatch,
                    span,
                    String::from("a function requires a partial function type"),
                )),
            },
            (SExpr::Struct(members, _), _) => {
                let v = self.elab_struct_against(members, expected, expected_layout, span)?;
                Ok(v)
            }
            (SExpr::Throw(_), _) => Err(err(
                TypeErrorKind::Mismatch,
                span,
                String::from("throw is a computation, not a value"),
            )),
            // Suspended computations at a ○ signature.
            (_, Signature::Cmp(inner)) if is_effectful(e) => {
                let m = self.elab_cmp_against(e, inner, &Layout::empty())?;
                Ok(Value::susp(m, (**inner).clone()))
            }
            _ => {
                let t = self.elab_expr(e)?;
                let v = expect_val(t.term, span)?;
                self.coerce(v, &t.sig, &t.layout, expected, expected_layout, span)
            }
        }
    }

    /// Check an expression as a computation of the expected signature.
    fn elab_cmp_against(
        &mut self,
        e: &SExpr,
        expected: &Signature,
        expected_layout: &Layout,
    ) -> Result<Computation> {
        let span = e.span();
        match e {
            SExpr::Throw(_) => Ok(Computation::Throw),
            SExpr::Ret(inner, _) => {
                let v = self.elab_val_against(inner, expected, expected_layout)?;
                Ok(Computation::Ret(v))
            }
            SExpr::If(c, t, f, _) => {
                let cond = self.elab_val_against(c, &Signature::dyn_bool(), &Layout::empty())?;
                let tt = self.elab_cmp_against(t, expected, expected_layout)?;
                let ff = self.elab_cmp_against(f, expected, expected_layout)?;
                Ok(Computation::if_(cond, tt, ff))
            }
            SExpr::Case {
                scrut,
                nil_arm,
                head,
                tail,
                cons_arm,
                span,
            } => {
                let s = self.elab_expr(scrut)?;
                let sv = expect_val(s.term, *span)?;
                let elem = match &s.sig {
                    Signature::Dyn(t) => match self.type_head_of(t) {
                        Some(TypeCon::List(e)) => *e,
                        _ => {
                            return Err(err(
                                TypeErrorKind::Mismatch,
                                *span,
                                String::from("case analysis requires a list"),
                            ))
                        }
                    },
                    _ => {
                        return Err(err(
                            TypeErrorKind::Mismatch,
                            *span,
                            String::from("case analysis requires a program value"),
                        ))
                    }
                };
                let nil = self.elab_cmp_against(nil_arm, expected, expected_layout)?;
                self.push_var(Some(head), Signature::Dyn(elem.clone()), Layout::empty());
                self.push_var(
                    Some(tail),
                    Signature::Dyn(Value::list_code(elem.shifted(1, 0))),
                    Layout::empty(),
                );
                let shifted = expected.shifted(2, 0);
                let cons = self.elab_cmp_against(cons_arm, &shifted, expected_layout);
                self.pop_var();
                self.pop_var();
                Ok(Computation::case_list(sv, nil, cons?))
            }
            SExpr::Bind {
                name,
                rhs,
                body,
                span,
            } => {
                let r = self.elab_expr(rhs)?;
                let (scrut, inner_sig, inner_layout) = match (r.term, r.sig) {
                    (Term::Val(v), Signature::Cmp(inner)) => (v, *inner, r.layout),
                    (Term::Cmp(m), sig) => {
                        let scrut = Value::susp(m, sig.clone());
                        (scrut, sig, r.layout)
                    }
                    (Term::Val(v), sig) => {
                        let scrut = Value::susp(Computation::Ret(v), sig.clone());
                        (scrut, sig, r.layout)
                    }
                };
                self.push_var(Some(name), inner_sig, inner_layout);
                self.push_scope();
                let shifted = expected.shifted(1, 0);
                let body_res = self.elab_cmp_against(body, &shifted, expected_layout);
                self.pop_scope();
                self.pop_var();
                let _ = span;
                Ok(Computation::bind(scrut, body_res?))
            }
            SExpr::Let { .. } => {
                // Re-use synthesis, then convert.
                let t = self.elab_expr(e)?;
                let t = promote_to_cmp(t);
                if !equal_sig(&self.ctx, &t.sig, expected) {
                    return Err(err(
                        TypeErrorKind::Mismatch,
                        span,
                        format!(
                            "computation signature mismatch: expected {}, got {}",
                            crate::pretty::print_signature(expected),
                            crate::pretty::print_signature(&t.sig)
                        ),
                    ));
                }
                Ok(as_cmp(t.term))
            }
            _ => {
                let t = self.elab_expr(e)?;
                match t.term {
                    Term::Cmp(m) => {
                        if equal_sig(&self.ctx, &t.sig, expected) {
                            Ok(m)
                        } else {
                            Err(err(
                                TypeErrorKind::Mismatch,
                                span,
                                format!(
                                    "computation signature mismatch: expected {}, got {}",
                                    crate::pretty::print_signature(expected),
                                    crate::pretty::print_signature(&t.sig)
                                ),
                            ))
                        }
                    }
                    Term::Val(v) => {
                        let coerced =
                            self.coerce(v, &t.sig, &t.layout, expected, expected_layout, span)?;
                        Ok(Computation::Ret(coerced))
                    }
                }
            }
        }
    }

    /// Bind pattern names as projections of the just-pushed argument
    /// variable. `sig` is the projected component's signature, well-scoped
    /// at the current depth.
    fn bind_pattern(
        &mut self,
        pat: &SPat,
        value: Value,
        sig: &Signature,
        span: Span,
    ) -> Result<()> {
        match pat {
            SPat::Var(name) => {
                self.define(
                    name.clone(),
                    Binding::ModDef {
                        value,
                        sig: sig.clone(),
                        layout: Layout::empty(),
                        depth: self.depth,
                    },
                );
                Ok(())
            }
            SPat::Tuple(a, b) => {
                let (sa, sb) = match sig {
                    Signature::Dyn(t) => match self.type_head_of(t) {
                        Some(TypeCon::Prod(x, y)) => (Signature::Dyn(*x), Signature::Dyn(*y)),
                        _ => {
                            return Err(err(
                                TypeErrorKind::Mismatch,
                                span,
                                String::from("tuple pattern requires a product type"),
                            ))
                        }
                    },
                    _ => {
                        return Err(err(
                            TypeErrorKind::Mismatch,
                            span,
                            String::from("tuple pattern requires a program value"),
                        ))
                    }
                };
                self.bind_pattern(a, Value::fst(value.clone()), &sa, span)?;
                self.bind_pattern(b, Value::snd(value), &sb, span)
            }
        }
    }

    // -----------------------------------------------------------------------
    // Structures
    // -----------------------------------------------------------------------

    /// Elaborate a structure literal without an expected signature. Every
    /// member must synthesize; type members become transparent fields.
    fn elab_struct_synth(&mut self, members: &[SMember], span: Span) -> Result<ElabTerm> {
        check_member_names(members, span)?;
        let mut names: Vec<String> = Vec::new();
        let mut values: Vec<Value> = Vec::new();
        let mut sigs: Vec<Signature> = Vec::new();
        self.push_scope();
        for member in members {
            let r = (|| -> Result<(String, Value, Signature, Layout)> {
                match member {
                    SMember::TypeDef(name, ty, _span) => {
                        let c = self.elab_ty(ty)?;
                        let sig = Signature::ext(Signature::Type, c.clone());
                        let value = Value::in_ext(c.clone(), c);
                        Ok((name.clone(), value, sig, Layout::empty()))
                    }
                    SMember::ValDef(name, e, _span) => {
                        let t = self.elab_expr(e)?;
                        match t.term {
                            Term::Val(v) => Ok((name.clone(), v, t.sig, t.layout)),
                            Term::Cmp(m) => {
                                let sig = Signature::cmp(t.sig.clone());
                                Ok((name.clone(), Value::susp(m, t.sig), sig, t.layout))
                            }
                        }
                    }
                    SMember::FunDef(..) => Err(err(
                        TypeErrorKind::NeedsAnnotation,
                        span,
                        String::from("a fun member needs a signature ascription on the structure"),
                    )),
                }
            })();
            match r {
                Ok((name, value, sig, layout)) => {
                    let depth = self.depth;
                    self.define(
                        name.clone(),
                        Binding::ModDef {
                            value: value.clone(),
                            sig: sig.clone(),
                            layout,
                            depth,
                        },
                    );
                    names.push(name);
                    values.push(value);
                    sigs.push(sig);
                }
                Err(e) => {
                    self.pop_scope();
                    return Err(e);
                }
            }
        }
        self.pop_scope();
        if names.is_empty() {
            // The empty structure inhabits the canonical unit.
            return Ok(ElabTerm {
                term: Term::Val(Value::in_ext(Value::bool_code(), Value::bool_code())),
                sig: Signature::ext(Signature::Type, Value::bool_code()),
                layout: Layout::empty(),
            });
        }
        // Member values are closed over earlier members by splicing, so the
        // signature components do not depend on each other structurally.
        let mut sig = sigs.pop().unwrap();
        for s in sigs.into_iter().rev() {
            sig = Signature::sigma(s, sig.shifted(1, 0));
        }
        let mut value = values.pop().unwrap();
        for v in values.into_iter().rev() {
            value = Value::pair(v, value);
        }
        Ok(ElabTerm {
            term: Term::Val(value),
            sig,
            layout: Layout::for_fields(&names),
        })
    }

    /// Elaborate a structure literal against an expected signature: fields
    /// are matched by name, member definitions are available to later
    /// members, and the assembled tuple follows the expected field order.
    fn elab_struct_against(
        &mut self,
        members: &[SMember],
        expected: &Signature,
        expected_layout: &Layout,
        span: Span,
    ) -> Result<Value> {
        check_member_names(members, span)?;
        // An extent expectation constrains the static part: build at the
        // base, then retype.
        if let Signature::Ext(base, w) = expected {
            let inner = self.elab_struct_against(members, base, expected_layout, span)?;
            let static_ctx = self.ctx.with_static_open();
            if !equal_val(&static_ctx, &inner, w, base) {
                return Err(err(
                    TypeErrorKind::ExtentSideCondition,
                    span,
                    String::from("the structure's static part disagrees with the ascription"),
                ));
            }
            return Ok(Value::in_ext(w.clone(), inner));
        }
        if expected_layout.fields.is_empty() {
            // Behave as in synthesis mode, then coerce.
            let t = self.elab_struct_synth(members, span)?;
            let v = expect_val(t.term, span)?;
            return self.coerce(v, &t.sig, &t.layout, expected, expected_layout, span);
        }
        // Elaborate members in declaration order against the expected field
        // signatures, tracking the remaining telescope.
        self.push_scope();
        let mut assembled: Vec<(String, Value)> = Vec::new();
        let mut result: Result<()> = Ok(());
        'members: for member in members {
            let name: &str = match member {
                SMember::TypeDef(n, _, _)
                | SMember::ValDef(n, _, _)
                | SMember::FunDef(n, _, _, _) => n,
            };
            let expected_pos = expected_layout.index_of(name);
            // The expected signature of this field, with earlier fields
            // instantiated by their actual components.
            let field_expected = match expected_pos {
                None => None,
                Some(pos) => {
                    match self.field_signature(expected, expected_layout, pos, &assembled) {
                        Ok(s) => Some(s),
                        Err(e) => {
                            result = Err(e);
                            break 'members;
                        }
                    }
                }
            };
            let elaborated: Result<(Value, Signature, Layout)> = (|| match (member, &field_expected)
            {
                (SMember::TypeDef(_, ty, _), _) => {
                    let c = self.elab_ty(ty)?;
                    let sig = Signature::ext(Signature::Type, c.clone());
                    Ok((Value::in_ext(c.clone(), c), sig, Layout::empty()))
                }
                (SMember::ValDef(_, e, _), Some(exp)) => {
                    let v = self.elab_val_against(e, exp, &Layout::empty())?;
                    Ok((v, exp.clone(), Layout::empty()))
                }
                (SMember::ValDef(_, e, _), None) => {
                    let t = self.elab_expr(e)?;
                    let v = expect_val(t.term, span)?;
                    Ok((v, t.sig, t.layout))
                }
                (SMember::FunDef(_, pat, body, mspan), Some(exp)) => {
                    let v = self.elab_fun(pat, body, exp, *mspan)?;
                    Ok((v, exp.clone(), Layout::empty()))
                }
                (SMember::FunDef(..), None) => Err(err(
                    TypeErrorKind::NeedsAnnotation,
                    span,
                    String::from("a fun member outside the ascribed signature"),
                )),
            })();
            match elaborated {
                Ok((value, sig, layout)) => {
                    let depth = self.depth;
                    self.define(
                        String::from(name),
                        Binding::ModDef {
                            value: value.clone(),
                            sig: sig.clone(),
                            layout,
                            depth,
                        },
                    );
                    if expected_pos.is_some() {
                        // Coerce to the expected component signature.
                        let coerced = match &field_expected {
                            Some(exp)
                                if !matches!(member, SMember::ValDef(..) | SMember::FunDef(..)) =>
                            {
                                match self.coerce(
                                    value,
                                    &sig,
                                    &Layout::empty(),
                                    exp,
                                    &Layout::empty(),
                                    span,
                                ) {
                                    Ok(c) => c,
                                    Err(e) => {
                                        result = Err(e);
                                        break 'members;
                                    }
                                }
                            }
                            _ => value,
                        };
                        assembled.push((String::from(name), coerced));
                    }
                }
                Err(e) => {
                    result = Err(e);
                    break 'members;
                }
            }
        }
        self.pop_scope();
        result?;
        // Assemble in expected order.
        let mut components = Vec::with_capacity(expected_layout.fields.len());
        for (fname, _) in &expected_layout.fields {
            match assembled.iter().find(|(n, _)| n == fname) {
                Some((_, v)) => components.push(v.clone()),
                None => {
                    return Err(err(
                        TypeErrorKind::Mismatch,
                        span,
                        format!("missing field '{}'", fname),
                    ))
                }
            }
        }
        let mut value = components.pop().unwrap();
        for v in components.into_iter().rev() {
            value = Value::pair(v, value);
        }
        check_val(&self.ctx, &value, expected).map_err(|e| e.with_span(span))?;
        Ok(value)
    }

    /// The expected signature of field `pos`, instantiated with the actual
    /// values of the earlier fields.
    fn field_signature(
        &self,
        expected: &Signature,
        layout: &Layout,
        pos: usize,
        assembled: &[(String, Value)],
    ) -> Result<Signature> {
        let n = layout.fields.len();
        let mut sig = expected.clone();
        for i in 0..pos {
            let (fname, _) = &layout.fields[i];
            let actual = assembled
                .iter()
                .find(|(n2, _)| n2 == fname)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| {
                    TypeError::new(
                        TypeErrorKind::Scope,
                        format!("field '{}' used before its definition", fname),
                    )
                })?;
            sig = match sig {
                Signature::Sigma(_, rest) => contract_admin_sig(&rest.subst(&actual, 0)),
                other => other,
            };
        }
        Ok(match sig {
            Signature::Sigma(first, _) if pos + 1 < n => *first,
            other => other,
        })
    }

    fn elab_fun(
        &mut self,
        pat: &SPat,
        body: &SExpr,
        expected: &Signature,
        span: Span,
    ) -> Result<Value> {
        match expected {
            Signature::Dyn(t) => match self.type_head_of(t) {
                Some(TypeCon::PArrow(s, cod)) => {
                    let arg_sig = Signature::Dyn(*s);
                    self.push_var(None, arg_sig.clone(), Layout::empty());
                    self.push_scope();
                    let bind_res =
                        self.bind_pattern(pat, Value::Var(0), &arg_sig.shifted(1, 0), span);
                    let body_res = bind_res.and_then(|()| {
                        let body_expected = Signature::Dyn(cod.shifted(1, 0));
                        self.elab_cmp_against(body, &body_expected, &Layout::empty())
                    });
                    self.pop_scope();
                    self.pop_var();
                    Ok(Value::pfun(body_res?))
                }
                _ => Err(err(
                    TypeErrorKind::Mismatch,
                    span,
                    String::from("fun members require a partial function type"),
                )),
            },
            _ => Err(err(
                TypeErrorKind::Mismatch,
                span,
                String::from("fun members require a dynamic field"),
            )),
        }
    }

    // -----------------------------------------------------------------------
    // Coercion
    // -----------------------------------------------------------------------

    /// η-guided coercion from one signature to another: identity on equal
    /// signatures, transparency forgetting and selfification at extents,
    /// width and permutation at sums driven by layouts, and depth at
    /// functors, sums, and suspensions.
    pub fn coerce(
        &mut self,
        v: Value,
        from: &Signature,
        from_layout: &Layout,
        to: &Signature,
        to_layout: &Layout,
        span: Span,
    ) -> Result<Value> {
        if equal_sig(&self.ctx, from, to) {
            return Ok(v);
        }
        // Retyping: establish the extent's static side condition.
        if let Signature::Ext(base, w) = to {
            let inner = self.coerce(v, from, from_layout, base, to_layout, span)?;
            let static_ctx = self.ctx.with_static_open();
            if !equal_val(&static_ctx, &inner, w, base) {
                return Err(err(
                    TypeErrorKind::ExtentSideCondition,
                    span,
                    String::from("static parts disagree in sealing coercion"),
                ));
            }
            return Ok(Value::in_ext(w.clone(), inner));
        }
        // Forget transparency.
        if let Signature::Ext(base, _) = from {
            return self.coerce(strip_ext(v), base, from_layout, to, to_layout, span);
        }
        match (from, to) {
            (Signature::Sigma(..), Signature::Sigma(..))
                if !from_layout.fields.is_empty() && !to_layout.fields.is_empty() =>
            {
                // Field-name directed: width and permutation.
                let mut assembled: Vec<(String, Value)> = Vec::new();
                for (pos, (fname, _)) in to_layout.fields.iter().enumerate() {
                    let from_path = from_layout.path_of(fname).ok_or_else(|| {
                        err(
                            TypeErrorKind::Mismatch,
                            span,
                            format!("missing field '{}' in coercion", fname),
                        )
                    })?;
                    let component = apply_projs(v.clone(), from_path);
                    let component_sig = self.component_sig_at(from, from_layout, fname, &v)?;
                    let expected = self.field_signature(to, to_layout, pos, &assembled)?;
                    let coerced = self.coerce(
                        component,
                        &component_sig,
                        &Layout::empty(),
                        &expected,
                        &Layout::empty(),
                        span,
                    )?;
                    assembled.push((fname.clone(), coerced));
                }
                let mut components: Vec<Value> = assembled.into_iter().map(|(_, v)| v).collect();
                let mut value = components.pop().unwrap();
                for c in components.into_iter().rev() {
                    value = Value::pair(c, value);
                }
                Ok(value)
            }
            (Signature::Sigma(a1, b1), Signature::Sigma(a2, b2)) => {
                // Positional depth coercion.
                let fst = fst_smart(v.clone());
                let cfst = self.coerce(
                    fst.clone(),
                    a1,
                    &Layout::empty(),
                    a2,
                    &Layout::empty(),
                    span,
                )?;
                let snd_from = b1.subst(&fst, 0);
                let snd_to = b2.subst(&cfst, 0);
                let csnd = self.coerce(
                    snd_smart(v),
                    &snd_from,
                    &Layout::empty(),
                    &snd_to,
                    &Layout::empty(),
                    span,
                )?;
                Ok(Value::pair(cfst, csnd))
            }
            (Signature::Pi(a1, b1), Signature::Pi(a2, b2)) => {
                // η-expand; contravariant on the domain.
                self.push_var(None, (**a2).clone(), Layout::empty());
                let res = (|| {
                    let arg = self.coerce(
                        Value::Var(0),
                        &a2.shifted(1, 0),
                        &Layout::empty(),
                        &a1.shifted(1, 0),
                        &Layout::empty(),
                        span,
                    )?;
                    let applied = Value::app(v.shifted(1, 0), arg.clone());
                    let from_cod = b1.shifted(1, 1).subst(&arg, 0);
                    let to_cod = (**b2).clone();
                    self.coerce(
                        applied,
                        &from_cod,
                        &Layout::empty(),
                        &to_cod,
                        &Layout::empty(),
                        span,
                    )
                })();
                self.pop_var();
                Ok(Value::lam(res?))
            }
            (Signature::Cmp(s1), Signature::Cmp(s2)) => {
                // Monadic map.
                self.push_var(None, (**s1).clone(), Layout::empty());
                let res = self.coerce(
                    Value::Var(0),
                    &s1.shifted(1, 0),
                    &Layout::empty(),
                    &s2.shifted(1, 0),
                    &Layout::empty(),
                    span,
                );
                self.pop_var();
                let body = Computation::Ret(res?);
                Ok(Value::susp(Computation::bind(v, body), (**s2).clone()))
            }
            _ => Err(err(
                TypeErrorKind::Mismatch,
                span,
                format!(
                    "no coercion from {} to {}",
                    crate::pretty::print_signature(from),
                    crate::pretty::print_signature(to)
                ),
            )),
        }
    }

    /// Signature of a named component of a module value.
    fn component_sig_at(
        &self,
        sig: &Signature,
        layout: &Layout,
        field: &str,
        base: &Value,
    ) -> Result<Signature> {
        let path = layout
            .path_of(field)
            .ok_or_else(|| TypeError::new(TypeErrorKind::Scope, format!("no field '{}'", field)))?;
        let mut cur_sig = sig.clone();
        let mut cur_val = base.clone();
        for p in path {
            while let Signature::Ext(inner, _) = cur_sig {
                cur_val = strip_ext(cur_val);
                cur_sig = *inner;
            }
            match (p, cur_sig) {
                (Proj::Fst, Signature::Sigma(a, _)) => {
                    cur_sig = *a;
                    cur_val = fst_smart(cur_val);
                }
                (Proj::Snd, Signature::Sigma(_, b)) => {
                    cur_sig = contract_admin_sig(&b.subst(&fst_smart(cur_val.clone()), 0));
                    cur_val = snd_smart(cur_val);
                }
                _ => {
                    return Err(TypeError::new(
                        TypeErrorKind::Mismatch,
                        String::from("layout does not match signature structure"),
                    ))
                }
            }
        }
        Ok(cur_sig)
    }

    /// Sealing: a pure coercion that drops transparency not present in the
    /// target.
    pub fn seal(
        &mut self,
        v: Value,
        from: &Signature,
        from_layout: &Layout,
        to: &Signature,
        to_layout: &Layout,
        span: Span,
    ) -> Result<Value> {
        self.coerce(v, from, from_layout, to, to_layout, span)
    }

    // -----------------------------------------------------------------------
    // Declarations
    // -----------------------------------------------------------------------

    pub fn elab_decl(&mut self, decl: &SDecl) -> Result<ElabDef> {
        match decl {
            SDecl::Signature(name, ssig, span) => {
                let (sig, layout) = self.elab_sig(ssig)?;
                check_sig(&self.ctx, &sig).map_err(|e| e.with_span(*span))?;
                self.define(
                    name.clone(),
                    Binding::SigDef {
                        sig: sig.clone(),
                        layout: layout.clone(),
                    },
                );
                Ok(ElabDef::Sig {
                    name: name.clone(),
                    sig,
                    layout,
                })
            }
            SDecl::Structure {
                name,
                ascription,
                body,
                span,
            } => {
                let (value, sig, layout) = match ascription {
                    None => {
                        let t = self.elab_expr(body)?;
                        let v = match t.term {
                            Term::Val(v) => v,
                            Term::Cmp(_) => {
                                return Err(err(
                                    TypeErrorKind::Mismatch,
                                    *span,
                                    String::from(
                                        "a generative application at top level must be bound inside a computation",
                                    ),
                                ))
                            }
                        };
                        (v, t.sig, t.layout)
                    }
                    Some((ssig, opaque)) => {
                        let (target, target_layout) = self.elab_sig(ssig)?;
                        let coerced = match body {
                            SExpr::Struct(members, _) => {
                                self.elab_struct_against(members, &target, &target_layout, *span)?
                            }
                            _ => {
                                let t = self.elab_expr(body)?;
                                let v = expect_val(t.term, *span)?;
                                self.seal(v, &t.sig, &t.layout, &target, &target_layout, *span)?
                            }
                        };
                        if *opaque {
                            (coerced, target, target_layout)
                        } else {
                            let (value, final_sig) = self.selfify(coerced, &target, *span)?;
                            (value, final_sig, target_layout)
                        }
                    }
                };
                check_val(&self.ctx, &value, &sig).map_err(|e| e.with_span(*span))?;
                self.define(
                    name.clone(),
                    Binding::ModDef {
                        value: value.clone(),
                        sig: sig.clone(),
                        layout: layout.clone(),
                        depth: self.depth,
                    },
                );
                Ok(ElabDef::Mod {
                    name: name.clone(),
                    value,
                    sig,
                    layout,
                })
            }
            SDecl::Functor {
                name,
                params,
                result,
                body,
                span,
            } => {
                let mut param_sigs = Vec::new();
                self.push_scope();
                for (pname, psig) in params {
                    let (sig, layout) = match self.elab_sig(psig) {
                        Ok(x) => x,
                        Err(e) => {
                            for _ in 0..param_sigs.len() {
                                self.pop_var();
                            }
                            self.pop_scope();
                            return Err(e);
                        }
                    };
                    self.push_var(Some(pname), sig.clone(), layout);
                    param_sigs.push(sig);
                }
                let body_res = (|| -> Result<(Value, Signature, Layout)> {
                    match result {
                        Some((rsig, _opaque)) => {
                            let (target, target_layout) = self.elab_sig(rsig)?;
                            let v = match body {
                                SExpr::Struct(members, _) => self.elab_struct_against(
                                    members,
                                    &target,
                                    &target_layout,
                                    *span,
                                )?,
                                _ => {
                                    let t = self.elab_expr(body)?;
                                    let v = expect_val(t.term, *span)?;
                                    self.seal(v, &t.sig, &t.layout, &target, &target_layout, *span)?
                                }
                            };
                            Ok((v, target, target_layout))
                        }
                        None => {
                            let t = self.elab_expr(body)?;
                            let v = expect_val(t.term, *span)?;
                            Ok((v, t.sig, t.layout))
                        }
                    }
                })();
                let (body_v, body_sig, body_layout) = match body_res {
                    Ok(x) => x,
                    Err(e) => {
                        for _ in 0..param_sigs.len() {
                            self.pop_var();
                        }
                        self.pop_scope();
                        return Err(e);
                    }
                };
                for _ in 0..param_sigs.len() {
                    self.pop_var();
                }
                self.pop_scope();
                // Wrap: the innermost result is suspended, so applications
                // are generative; outer parameters curry.
                let mut value = Value::susp(Computation::Ret(body_v), body_sig.clone());
                let mut sig = Signature::cmp(body_sig);
                for psig in param_sigs.into_iter().rev() {
                    value = Value::lam(value);
                    sig = Signature::pi(psig, sig);
                }
                check_val(&self.ctx, &value, &sig).map_err(|e| e.with_span(*span))?;
                self.define(
                    name.clone(),
                    Binding::ModDef {
                        value: value.clone(),
                        sig: sig.clone(),
                        layout: body_layout.clone(),
                        depth: self.depth,
                    },
                );
                Ok(ElabDef::Mod {
                    name: name.clone(),
                    value,
                    sig,
                    layout: body_layout,
                })
            }
        }
    }
}

/// Contract administrative redexes introduced by definition splicing:
/// projections of literal pairs, out-projections of literal introductions,
/// and module-level β. Program-level applications are left alone.
fn contract_admin_val(v: &Value) -> Value {
    match v {
        Value::Var(_) | Value::Tt | Value::Ff | Value::Nil | Value::Star => v.clone(),
        Value::Lam(b) => Value::lam(contract_admin_val(b)),
        Value::App(f, a) => {
            let f = contract_admin_val(f);
            let a = contract_admin_val(a);
            match f {
                Value::Lam(body) => contract_admin_val(&body.subst(&a, 0)),
                other => Value::app(other, a),
            }
        }
        Value::Pair(a, b) => Value::pair(contract_admin_val(a), contract_admin_val(b)),
        Value::Fst(p) => fst_smart(contract_admin_val(p)),
        Value::Snd(p) => snd_smart(contract_admin_val(p)),
        Value::InExt(a, b) => Value::in_ext(contract_admin_val(a), contract_admin_val(b)),
        Value::OutExt(u) => strip_ext(contract_admin_val(u)),
        Value::Susp(m, ann) => Value::susp(contract_admin_cmp(m), contract_admin_sig(ann)),
        Value::PFun(m) => Value::pfun(contract_admin_cmp(m)),
        Value::Cons(h, t) => Value::cons(contract_admin_val(h), contract_admin_val(t)),
        Value::TypeCode(tc) => Value::TypeCode(match tc {
            TypeCon::Bool => TypeCon::Bool,
            TypeCon::PArrow(a, b) => TypeCon::PArrow(
                Box::new(contract_admin_val(a)),
                Box::new(contract_admin_val(b)),
            ),
            TypeCon::Prod(a, b) => TypeCon::Prod(
                Box::new(contract_admin_val(a)),
                Box::new(contract_admin_val(b)),
            ),
            TypeCon::List(e) => TypeCon::List(Box::new(contract_admin_val(e))),
        }),
        Value::Rev(t) => Value::rev(contract_admin_val(t)),
    }
}

fn contract_admin_cmp(m: &Computation) -> Computation {
    match m {
        Computation::Ret(v) => Computation::Ret(contract_admin_val(v)),
        Computation::Throw => Computation::Throw,
        Computation::Bind(v, body) => {
            Computation::bind(contract_admin_val(v), contract_admin_cmp(body))
        }
        Computation::If(b, m1, m2) => Computation::if_(
            contract_admin_val(b),
            contract_admin_cmp(m1),
            contract_admin_cmp(m2),
        ),
        Computation::CaseList(s, mn, mc) => Computation::case_list(
            contract_admin_val(s),
            contract_admin_cmp(mn),
            contract_admin_cmp(mc),
        ),
        Computation::AppP(f, a) => Computation::app_p(contract_admin_val(f), contract_admin_val(a)),
    }
}

fn check_member_names(members: &[SMember], span: Span) -> Result<()> {
    let mut seen: Vec<&str> = Vec::new();
    for member in members {
        let name: &str = match member {
            SMember::TypeDef(n, _, _) | SMember::ValDef(n, _, _) | SMember::FunDef(n, _, _, _) => n,
        };
        if seen.contains(&name) {
            return Err(err(
                TypeErrorKind::Mismatch,
                span,
                format!("duplicate member '{}'", name),
            ));
        }
        seen.push(name);
    }
    Ok(())
}

fn contract_admin_sig(sig: &Signature) -> Signature {
    match sig {
        Signature::Type => Signature::Type,
        Signature::Dyn(v) => Signature::Dyn(contract_admin_val(v)),
        Signature::Pi(a, b) => Signature::pi(contract_admin_sig(a), contract_admin_sig(b)),
        Signature::Sigma(a, b) => Signature::sigma(contract_admin_sig(a), contract_admin_sig(b)),
        Signature::Ext(base, v) => Signature::ext(contract_admin_sig(base), contract_admin_val(v)),
        Signature::Cmp(inner) => Signature::cmp(contract_admin_sig(inner)),
    }
}

fn strip_ext(v: Value) -> Value {
    match v {
        Value::InExt(_, w) => *w,
        other => Value::out_ext(other),
    }
}

fn fst_smart(v: Value) -> Value {
    match v {
        Value::Pair(a, _) => *a,
        other => Value::fst(other),
    }
}

fn snd_smart(v: Value) -> Value {
    match v {
        Value::Pair(_, b) => *b,
        other => Value::snd(other),
    }
}

fn val_term(v: Value, sig: Signature) -> ElabTerm {
    ElabTerm {
        term: Term::Val(v),
        sig,
        layout: Layout::empty(),
    }
}

fn expect_val(term: Term, span: Span) -> Result<Value> {
    match term {
        Term::Val(v) => Ok(v),
        Term::Cmp(_) => Err(err(
            TypeErrorKind::Mismatch,
            span,
            String::from("expected a module value, found a computation"),
        )),
    }
}

fn as_cmp(term: Term) -> Computation {
    match term {
        Term::Cmp(m) => m,
        Term::Val(v) => Computation::Ret(v),
    }
}

fn promote_to_cmp(t: ElabTerm) -> ElabTerm {
    match t.term {
        Term::Cmp(_) => t,
        Term::Val(v) => ElabTerm {
            term: Term::Cmp(Computation::Ret(v)),
            sig: t.sig,
            layout: t.layout,
        },
    }
}

/// Effectful surface forms, which suspend when a `○` signature is expected.
fn is_effectful(e: &SExpr) -> bool {
    matches!(
        e,
        SExpr::Bind { .. }
            | SExpr::Ret(..)
            | SExpr::Throw(_)
            | SExpr::If(..)
            | SExpr::Case { .. }
            | SExpr::App(..)
    )
}

/// Strengthen a signature out of one binder; fails when the variable occurs.
fn try_unshift(sig: &Signature) -> Option<Signature> {
    if occurs_sig(sig, 0) {
        None
    } else {
        Some(unshift_sig(sig, 0))
    }
}

fn occurs_sig(sig: &Signature, idx: usize) -> bool {
    match sig {
        Signature::Type => false,
        Signature::Dyn(v) => occurs_val(v, idx),
        Signature::Pi(a, b) | Signature::Sigma(a, b) => {
            occurs_sig(a, idx) || occurs_sig(b, idx + 1)
        }
        Signature::Ext(s, v) => occurs_sig(s, idx) || occurs_val(v, idx),
        Signature::Cmp(s) => occurs_sig(s, idx),
    }
}

fn occurs_val(v: &Value, idx: usize) -> bool {
    match v {
        Value::Var(i) => *i == idx,
        Value::Lam(b) => occurs_val(b, idx + 1),
        Value::App(f, a) => occurs_val(f, idx) || occurs_val(a, idx),
        Value::Pair(a, b) | Value::Cons(a, b) | Value::InExt(a, b) => {
            occurs_val(a, idx) || occurs_val(b, idx)
        }
        Value::Fst(p) | Value::Snd(p) | Value::OutExt(p) | Value::Rev(p) => occurs_val(p, idx),
        Value::Susp(m, ann) => occurs_cmp(m, idx) || occurs_sig(ann, idx),
        Value::PFun(m) => occurs_cmp(m, idx + 1),
        Value::TypeCode(tc) => match tc {
            TypeCon::Bool => false,
            TypeCon::PArrow(a, b) | TypeCon::Prod(a, b) => occurs_val(a, idx) || occurs_val(b, idx),
            TypeCon::List(e) => occurs_val(e, idx),
        },
        _ => false,
    }
}

fn occurs_cmp(m: &Computation, idx: usize) -> bool {
    match m {
        Computation::Ret(v) => occurs_val(v, idx),
        Computation::Bind(v, body) => occurs_val(v, idx) || occurs_cmp(body, idx + 1),
        Computation::Throw => false,
        Computation::If(b, m1, m2) => {
            occurs_val(b, idx) || occurs_cmp(m1, idx) || occurs_cmp(m2, idx)
        }
        Computation::CaseList(s, mn, mc) => {
            occurs_val(s, idx) || occurs_cmp(mn, idx) || occurs_cmp(mc, idx + 2)
        }
        Computation::AppP(f, a) => occurs_val(f, idx) || occurs_val(a, idx),
    }
}

fn unshift_sig(sig: &Signature, cutoff: usize) -> Signature {
    match sig {
        Signature::Type => Signature::Type,
        Signature::Dyn(v) => Signature::Dyn(unshift_val(v, cutoff)),
        Signature::Pi(a, b) => Signature::pi(unshift_sig(a, cutoff), unshift_sig(b, cutoff + 1)),
        Signature::Sigma(a, b) => {
            Signature::sigma(unshift_sig(a, cutoff), unshift_sig(b, cutoff + 1))
        }
        Signature::Ext(s, v) => Signature::ext(unshift_sig(s, cutoff), unshift_val(v, cutoff)),
        Signature::Cmp(s) => Signature::cmp(unshift_sig(s, cutoff)),
    }
}

fn unshift_val(v: &Value, cutoff: usize) -> Value {
    match v {
        Value::Var(i) => {
            if *i > cutoff {
                Value::Var(i - 1)
            } else {
                Value::Var(*i)
            }
        }
        Value::Lam(b) => Value::lam(unshift_val(b, cutoff + 1)),
        Value::App(f, a) => Value::app(unshift_val(f, cutoff), unshift_val(a, cutoff)),
        Value::Pair(a, b) => Value::pair(unshift_val(a, cutoff), unshift_val(b, cutoff)),
        Value::Cons(a, b) => Value::cons(unshift_val(a, cutoff), unshift_val(b, cutoff)),
        Value::InExt(a, b) => Value::in_ext(unshift_val(a, cutoff), unshift_val(b, cutoff)),
        Value::Fst(p) => Value::fst(unshift_val(p, cutoff)),
        Value::Snd(p) => Value::snd(unshift_val(p, cutoff)),
        Value::OutExt(p) => Value::out_ext(unshift_val(p, cutoff)),
        Value::Rev(p) => Value::rev(unshift_val(p, cutoff)),
        Value::Susp(m, ann) => Value::susp(unshift_cmp(m, cutoff), unshift_sig(ann, cutoff)),
        Value::PFun(m) => Value::pfun(unshift_cmp(m, cutoff + 1)),
        Value::TypeCode(tc) => Value::TypeCode(match tc {
            TypeCon::Bool => TypeCon::Bool,
            TypeCon::PArrow(a, b) => TypeCon::PArrow(
                Box::new(unshift_val(a, cutoff)),
                Box::new(unshift_val(b, cutoff)),
            ),
            TypeCon::Prod(a, b) => TypeCon::Prod(
                Box::new(unshift_val(a, cutoff)),
                Box::new(unshift_val(b, cutoff)),
            ),
            TypeCon::List(e) => TypeCon::List(Box::new(unshift_val(e, cutoff))),
        }),
        other => other.clone(),
    }
}

fn unshift_cmp(m: &Computation, cutoff: usize) -> Computation {
    match m {
        Computation::Ret(v) => Computation::Ret(unshift_val(v, cutoff)),
        Computation::Bind(v, body) => {
            Computation::bind(unshift_val(v, cutoff), unshift_cmp(body, cutoff + 1))
        }
        Computation::Throw => Computation::Throw,
        Computation::If(b, m1, m2) => Computation::if_(
            unshift_val(b, cutoff),
            unshift_cmp(m1, cutoff),
            unshift_cmp(m2, cutoff),
        ),
        Computation::CaseList(s, mn, mc) => Computation::case_list(
            unshift_val(s, cutoff),
            unshift_cmp(mn, cutoff),
            unshift_cmp(mc, cutoff + 2),
        ),
        Computation::AppP(f, a) => {
            Computation::app_p(unshift_val(f, cutoff), unshift_val(a, cutoff))
        }
    }
}

/// Project a component out of a flat telescope by layout index.
fn project_component(
    base: &Value,
    sig: &Signature,
    layout: &Layout,
    idx: usize,
) -> (Value, Signature) {
    let path = &layout.fields[idx].1;
    let mut cur_val = base.clone();
    let mut cur_sig = sig.clone();
    for p in path {
        while let Signature::Ext(inner, _) = cur_sig {
            cur_val = strip_ext(cur_val);
            cur_sig = *inner;
        }
        match (p, cur_sig) {
            (Proj::Fst, Signature::Sigma(a, _)) => {
                cur_sig = *a;
                cur_val = fst_smart(cur_val);
            }
            (Proj::Snd, Signature::Sigma(_, b)) => {
                cur_sig = contract_admin_sig(&b.subst(&fst_smart(cur_val.clone()), 0));
                cur_val = snd_smart(cur_val);
            }
            (_, other) => {
                cur_sig = other;
            }
        }
    }
    (cur_val, cur_sig)
}

/// Canonical static value of a signature under the static open, with one
/// abstract type field constrained.
fn build_where_value(
    sig: &Signature,
    layout: &Layout,
    field: &str,
    ty: &Value,
    span: Span,
) -> Result<Value> {
    let pos = layout.index_of(field).ok_or_else(|| {
        err(
            TypeErrorKind::Scope,
            span,
            format!("no field '{}' to constrain", field),
        )
    })?;
    let n = layout.fields.len();
    // Validate the constrained component before synthesizing the rest:
    // constraint heads are stable under the telescope's substitutions.
    let mut cur = sig;
    for i in 0..pos {
        cur = match cur {
            Signature::Sigma(_, rest) if i < n => rest,
            other => other,
        };
    }
    let component = match cur {
        Signature::Sigma(first, _) if pos + 1 < n => first,
        other => other,
    };
    match component {
        Signature::Type => {}
        Signature::Dyn(_) | Signature::Cmp(_) => {
            return Err(err(
                TypeErrorKind::DynamicInStatic,
                span,
                String::from("where-type must address a static component"),
            ))
        }
        _ => {
            return Err(err(
                TypeErrorKind::Mismatch,
                span,
                String::from("where-type must address an abstract type field"),
            ))
        }
    }
    build_where_at(sig, 0, pos, n, ty, span)
}

fn build_where_at(
    sig: &Signature,
    i: usize,
    pos: usize,
    n: usize,
    ty: &Value,
    span: Span,
) -> Result<Value> {
    if i + 1 < n {
        match sig {
            Signature::Sigma(a, b) => {
                let head = if i == pos {
                    constrain_component(a, ty, span)?
                } else {
                    canonical_static(a, span)?
                };
                let rest = b.subst(&head, 0);
                let tail = build_where_at(&rest, i + 1, pos, n, ty, span)?;
                Ok(Value::pair(head, tail))
            }
            _ => Err(err(
                TypeErrorKind::Mismatch,
                span,
                String::from("layout does not match signature structure"),
            )),
        }
    } else if i == pos {
        constrain_component(sig, ty, span)
    } else {
        canonical_static(sig, span)
    }
}

fn constrain_component(sig: &Signature, ty: &Value, span: Span) -> Result<Value> {
    match sig {
        Signature::Type => Ok(ty.clone()),
        Signature::Dyn(_) | Signature::Cmp(_) => Err(err(
            TypeErrorKind::DynamicInStatic,
            span,
            String::from("where-type must address a static component"),
        )),
        _ => Err(err(
            TypeErrorKind::Mismatch,
            span,
            String::from("where-type must address an abstract type field"),
        )),
    }
}

/// Canonical inhabitant of a signature under the static open. Statically
/// connected sorts have the point; extents carry their recorded value;
/// abstract type components have no canonical inhabitant and are rejected.
fn canonical_static(sig: &Signature, span: Span) -> Result<Value> {
    match sig {
        Signature::Dyn(_) | Signature::Cmp(_) => Ok(Value::Star),
        Signature::Ext(_, w) => Ok(Value::in_ext(w.clone(), w.clone())),
        Signature::Sigma(a, b) => {
            let ca = canonical_static(a, span)?;
            let cb = canonical_static(&b.subst(&ca, 0), span)?;
            Ok(Value::pair(ca, cb))
        }
        Signature::Pi(_, b) => Ok(Value::lam(canonical_static(b, span)?)),
        Signature::Type => Err(err(
            TypeErrorKind::Mismatch,
            span,
            String::from("where-type leaves an abstract type component unconstrained"),
        )),
    }
}

/// Elaborate a parsed compilation unit.
pub fn elaborate(decls: &[SDecl]) -> Result<Vec<ElabDef>> {
    let mut elab = Elaborator::new();
    let mut out = Vec::new();
    for decl in decls {
        out.push(elab.elab_decl(decl)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::TypeErrorKind;
    use crate::fixtures;
    use crate::nbe::equal_val;
    use crate::runtime::{run_cmp, FuelBudget, Outcome};
    use crate::surface::parse;
    use crate::syntax::{Computation as C, Signature as S, Value as V};

    fn elab_src(src: &str) -> Vec<ElabDef> {
        let decls = parse(src).unwrap_or_else(|e| panic!("parse error: {:?}", e));
        elaborate(&decls).unwrap_or_else(|e| panic!("elaboration error: {:?}", e))
    }

    fn find_mod<'a>(defs: &'a [ElabDef], name: &str) -> (&'a Value, &'a Signature, &'a Layout) {
        for def in defs {
            if let ElabDef::Mod {
                name: n,
                value,
                sig,
                layout,
            } = def
            {
                if n == name {
                    return (value, sig, layout);
                }
            }
        }
        panic!("no module '{}'", name);
    }

    fn find_sig<'a>(defs: &'a [ElabDef], name: &str) -> (&'a Signature, &'a Layout) {
        for def in defs {
            if let ElabDef::Sig {
                name: n,
                sig,
                layout,
            } = def
            {
                if n == name {
                    return (sig, layout);
                }
            }
        }
        panic!("no signature '{}'", name);
    }

    const QUEUES: &str = include_str!("../../../corpus/good/queues.mtt");
    const SHOW: &str = include_str!("../../../corpus/good/show.mtt");
    const NAMESPACE: &str = include_str!("../../../corpus/good/namespace.mtt");
    const LETABS: &str = include_str!("../../../corpus/good/letabs.mtt");
    const QUEUE_DEMO: &str = include_str!("../../../corpus/good/queue-demo.mtt");
    const MUTANTS: &str = include_str!("../../../corpus/good/mutants.mtt");
    const GENERATIVITY_CROSS: &str = include_str!("../../../corpus/bad/generativity-cross.mtt");
    const LETABS_CROSS: &str = include_str!("../../../corpus/bad/letabs-cross.mtt");
    const EXTENT_MISMATCH: &str = include_str!("../../../corpus/bad/extent-mismatch.mtt");

    #[test]
    fn queue_signature_matches_the_hand_transcription() {
        let defs = elab_src(QUEUES);
        let (sig, layout) = find_sig(&defs, "QUEUE");
        assert_eq!(*sig, fixtures::queue_sig());
        assert_eq!(
            layout
                .fields
                .iter()
                .map(|(n, _)| n.as_str())
                .collect::<Vec<_>>(),
            ["t", "emp", "ins", "rem"]
        );
        assert_eq!(layout.path_of("t").unwrap(), &[Proj::Fst]);
        assert_eq!(layout.path_of("emp").unwrap(), &[Proj::Snd, Proj::Fst]);
        assert_eq!(
            layout.path_of("rem").unwrap(),
            &[Proj::Snd, Proj::Snd, Proj::Snd]
        );
    }

    #[test]
    fn elaborated_queues_agree_with_the_fixtures() {
        let defs = elab_src(QUEUES);
        let ctx = Context::empty();
        let queue = fixtures::queue_sig();
        for (name, fixture) in [("Q0", fixtures::q0_value()), ("Q1", fixtures::q1_value())] {
            let (value, sig, _) = find_mod(&defs, name);
            // The transparent ascription wraps the value in its extent.
            assert!(matches!(sig, Signature::Ext(..)));
            let unsealed = Value::out_ext(value.clone());
            assert!(
                equal_val(&ctx, &unsealed, &fixture, &queue),
                "{} disagrees with the hand transcription",
                name
            );
        }
    }

    #[test]
    fn where_type_elaborates_to_an_extent() {
        let defs = elab_src(SHOW);
        let (show_sig, _) = find_sig(&defs, "SHOW");
        let (show_bool, _) = find_sig(&defs, "SHOW_BOOL");
        assert_eq!(
            *show_bool,
            Signature::ext(show_sig.clone(), V::pair(V::bool_code(), V::Star))
        );
    }

    #[test]
    fn empty_signature_is_the_canonical_unit() {
        let decls = parse("signature U = sig end").unwrap();
        let defs = elaborate(&decls).unwrap();
        let (sig, layout) = find_sig(&defs, "U");
        assert_eq!(*sig, Signature::ext(S::Type, V::bool_code()));
        assert!(layout.fields.is_empty());
    }

    #[test]
    fn paths_elaborate_to_projections() {
        let src = r#"
            signature SHOW = sig
              type t
              val show : t -> bool list
            end
            functor UseIt (S1 : SHOW) : sig val go : S1.t -> bool list end = struct
              fun go x = S1.show x
            end
        "#;
        let defs = elab_src(src);
        let (value, sig, _) = find_mod(&defs, "UseIt");
        // The parameter's `t` appears as a first projection of the bound
        // variable inside the result signature.
        match sig {
            Signature::Pi(_, cod) => match &**cod {
                Signature::Cmp(inner) => match &**inner {
                    Signature::Dyn(t) => {
                        assert_eq!(
                            *t,
                            V::parrow_code(V::fst(V::Var(0)), V::list_code(V::bool_code()))
                        );
                    }
                    other => panic!("unexpected result: {:?}", other),
                },
                other => panic!("unexpected result: {:?}", other),
            },
            other => panic!("unexpected functor signature: {:?}", other),
        }
        let _ = value;
    }

    #[test]
    fn show_file_elaborates_and_its_demo_runs() {
        let defs = elab_src(SHOW);
        let (demo, demo_sig, demo_layout) = find_mod(&defs, "Demo");
        // Project `main` and run it: the printer yields tt :: ff :: nil
        // tagged with tt, i.e. (tt :: ff :: nil) from the second show.
        let mut sig = demo_sig.clone();
        let mut value = demo.clone();
        while let Signature::Ext(base, _) = sig {
            value = Value::out_ext(value);
            sig = *base;
        }
        let path = demo_layout.path_of("main").unwrap();
        let main_v = apply_projs(value, path);
        let m = C::bind(main_v, C::Ret(V::Var(0)));
        match run_cmp(&m, FuelBudget::default()).unwrap() {
            Outcome::Returned(v) => {
                let nf = crate::runtime::readback_first_order(&v).unwrap();
                assert_eq!(nf, V::cons(V::Tt, V::cons(V::Ff, V::Nil)));
            }
            Outcome::Threw => panic!("unexpected throw"),
        }
    }

    #[test]
    fn namespace_file_elaborates_and_consistent_use_runs() {
        let defs = elab_src(NAMESPACE);
        let (client, sig, layout) = find_mod(&defs, "Client");
        let mut sig = sig.clone();
        let mut value = client.clone();
        while let Signature::Ext(base, _) = sig {
            value = Value::out_ext(value);
            sig = *base;
        }
        let main_v = apply_projs(value, layout.path_of("main").unwrap());
        let m = C::bind(main_v, C::Ret(V::Var(0)));
        match run_cmp(&m, FuelBudget::default()).unwrap() {
            Outcome::Returned(v) => {
                let nf = crate::runtime::readback_first_order(&v).unwrap();
                // tt vs ff under the namespace's equality.
                assert_eq!(nf, V::Ff);
            }
            Outcome::Threw => panic!("unexpected throw"),
        }
    }

    #[test]
    fn generativity_cross_use_is_rejected() {
        let decls = parse(GENERATIVITY_CROSS).unwrap();
        let e = elaborate(&decls).unwrap_err();
        assert_eq!(e.kind, TypeErrorKind::Mismatch);
    }

    #[test]
    fn sealed_let_hides_identity_and_unsealed_exposes_it() {
        let decls = parse(LETABS).unwrap();
        assert!(elaborate(&decls).is_ok());

        let decls = parse(LETABS_CROSS).unwrap();
        let e = elaborate(&decls).unwrap_err();
        assert_eq!(e.kind, TypeErrorKind::Mismatch);

        // The same cross-use is fine when the lets are transparent.
        let transparent = LETABS_CROSS.replace(":> EQ", ": EQ");
        let decls = parse(&transparent).unwrap();
        assert!(elaborate(&decls).is_ok());
    }

    #[test]
    fn sealed_and_unsealed_lets_share_runtime_components() {
        let defs = elab_src(LETABS);
        let (demo, sig, layout) = find_mod(&defs, "Demo");
        let mut sig = sig.clone();
        let mut value = demo.clone();
        while let Signature::Ext(base, _) = sig {
            value = Value::out_ext(value);
            sig = *base;
        }
        let main_v = apply_projs(value, layout.path_of("main").unwrap());
        let m = C::bind(main_v, C::Ret(V::Var(0)));
        match run_cmp(&m, FuelBudget::default()).unwrap() {
            Outcome::Returned(v) => {
                assert_eq!(crate::runtime::readback_first_order(&v).unwrap(), V::Tt);
            }
            Outcome::Threw => panic!("unexpected throw"),
        }
    }

    #[test]
    fn extent_mismatch_is_detected() {
        let decls = parse(EXTENT_MISMATCH).unwrap();
        let e = elaborate(&decls).unwrap_err();
        assert_eq!(e.kind, TypeErrorKind::ExtentSideCondition);
    }

    #[test]
    fn queue_demo_main_returns_the_inserted_bit() {
        let defs = elab_src(QUEUE_DEMO);
        let (m, sig, layout) = find_mod(&defs, "Main");
        let mut sig = sig.clone();
        let mut value = m.clone();
        while let Signature::Ext(base, _) = sig {
            value = Value::out_ext(value);
            sig = *base;
        }
        let main_v = apply_projs(value, layout.path_of("main").unwrap());
        let m = C::bind(main_v, C::Ret(V::Var(0)));
        match run_cmp(&m, FuelBudget::default()).unwrap() {
            Outcome::Returned(v) => {
                assert_eq!(crate::runtime::readback_first_order(&v).unwrap(), V::Tt);
            }
            Outcome::Threw => panic!("unexpected throw"),
        }
    }

    #[test]
    fn mutants_elaborate_and_match_their_fixtures() {
        let defs = elab_src(MUTANTS);
        let ctx = Context::empty();
        let queue = fixtures::queue_sig();
        for (name, fixture) in [
            (
                "Q1Negate",
                fixtures::q1_with(fixtures::Q1Variant::NegatedBit),
            ),
            (
                "Q1NoRev",
                fixtures::q1_with(fixtures::Q1Variant::DroppedReversal),
            ),
            (
                "Q1Swap",
                fixtures::q1_with(fixtures::Q1Variant::SwappedComponents),
            ),
        ] {
            let (value, _, _) = find_mod(&defs, name);
            let unsealed = Value::out_ext(value.clone());
            assert!(
                equal_val(&ctx, &unsealed, &fixture, &queue),
                "{} disagrees with its fixture",
                name
            );
        }
    }

    #[test]
    fn coercion_examples() {
        let mut elab = Elaborator::new();
        let span = Span { line: 1, col: 1 };

        // Forgetting transparency: Ext(dyn bool){tt-as-static} to dyn bool.
        let from = S::ext(S::dyn_bool(), V::Star);
        let v = V::in_ext(V::Star, V::Tt);
        let out = elab
            .coerce(
                v.clone(),
                &from,
                &Layout::empty(),
                &S::dyn_bool(),
                &Layout::empty(),
                span,
            )
            .unwrap();
        // The projection contracts on a literal introduction.
        assert_eq!(out, V::Tt);

        // Selfification: a pair at SHOW retypes at its own extent.
        let show = S::sigma(
            S::Type,
            S::Dyn(V::parrow_code(V::Var(0), V::list_code(V::bool_code()))),
        );
        let impl_v = V::pair(V::bool_code(), V::pfun(C::Ret(V::cons(V::Var(0), V::Nil))));
        let target = S::ext(show.clone(), V::pair(V::bool_code(), V::Star));
        let sealed = elab
            .coerce(
                impl_v.clone(),
                &show,
                &Layout::empty(),
                &target,
                &Layout::empty(),
                span,
            )
            .unwrap();
        assert_eq!(sealed, V::in_ext(V::pair(V::bool_code(), V::Star), impl_v));
        assert!(check_val(&Context::empty(), &sealed, &target).is_ok());

        // Width and permutation: three named fields to two, reordered.
        let from_sig = S::sigma(S::dyn_bool(), S::sigma(S::Type, S::Dyn(V::Var(0))));
        let from_layout = Layout::for_fields(&[
            String::from("flag"),
            String::from("ty"),
            String::from("payload"),
        ]);
        let to_sig = S::sigma(S::Type, S::Dyn(V::Var(0)));
        let to_layout = Layout::for_fields(&[String::from("ty"), String::from("payload")]);
        let big = V::pair(V::Tt, V::pair(V::bool_code(), V::Ff));
        let small = elab
            .coerce(
                big.clone(),
                &from_sig,
                &from_layout,
                &to_sig,
                &to_layout,
                span,
            )
            .unwrap();
        assert!(check_val(&Context::empty(), &small, &to_sig).is_ok());
        // Components survive the reshuffle up to judgmental equality.
        let ctx = Context::empty();
        assert!(equal_val(
            &ctx,
            &V::fst(small.clone()),
            &V::fst(V::snd(big.clone())),
            &S::Type
        ));
        assert!(equal_val(
            &ctx,
            &V::snd(small),
            &V::snd(V::snd(big)),
            &S::Dyn(V::bool_code())
        ));
    }

    #[test]
    fn coercion_coherence_on_a_triple() {
        // Coercing transparently in two hops agrees with the direct hop.
        let mut elab = Elaborator::new();
        let span = Span { line: 1, col: 1 };
        let show = S::sigma(
            S::Type,
            S::Dyn(V::parrow_code(V::Var(0), V::list_code(V::bool_code()))),
        );
        let ext1 = S::ext(show.clone(), V::pair(V::bool_code(), V::Star));
        let impl_v = V::pair(V::bool_code(), V::pfun(C::Ret(V::cons(V::Var(0), V::Nil))));
        let sealed = elab
            .coerce(
                impl_v.clone(),
                &show,
                &Layout::empty(),
                &ext1,
                &Layout::empty(),
                span,
            )
            .unwrap();
        let back = elab
            .coerce(
                sealed,
                &ext1,
                &Layout::empty(),
                &show,
                &Layout::empty(),
                span,
            )
            .unwrap();
        let ctx = Context::empty();
        assert!(equal_val(&ctx, &back, &impl_v, &show));
    }

    #[test]
    fn layout_faithfulness_for_a_struct() {
        let src = r#"
            structure P = struct
              type t = bool
              val x = tt
              val l = ff :: nil
            end
        "#;
        let defs = elab_src(src);
        let (value, sig, layout) = find_mod(&defs, "P");
        let ctx = Context::empty();
        // Each field projects to its definition.
        let x = apply_projs(value.clone(), layout.path_of("x").unwrap());
        assert!(equal_val(&ctx, &x, &V::Tt, &S::dyn_bool()));
        let l = apply_projs(value.clone(), layout.path_of("l").unwrap());
        assert!(equal_val(
            &ctx,
            &l,
            &V::cons(V::Ff, V::Nil),
            &S::Dyn(V::list_code(V::bool_code()))
        ));
        let t = apply_projs(value.clone(), layout.path_of("t").unwrap());
        assert!(equal_val(&ctx, &V::out_ext(t), &V::bool_code(), &S::Type));
        let _ = sig;
    }
}
