//! Static parts of signatures and modules: the projection realized by
//! normalizing under an appended static open.

use alloc::boxed::Box;
use alloc::string::String;

use crate::ctx::Context;
use crate::nbe::{normalize_sig, normalize_val};
use crate::pretty::print_value;
use crate::syntax::{Signature, Value};

/// A signature with every statically connected position collapsed to the
/// singleton marker. Skeletons are an output format: the marker prints as
/// `(unit)` and re-embeds into core syntax as `(cmp type)`, a signature
/// whose values are statically connected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StaticSkeleton {
    Type,
    Unit,
    Pi(Box<StaticSkeleton>, Box<StaticSkeleton>),
    Sigma(Box<StaticSkeleton>, Box<StaticSkeleton>),
    Ext(Box<StaticSkeleton>, Value),
}

impl StaticSkeleton {
    /// Re-embedding into core syntax; the collapsed marker becomes `○ type`.
    pub fn to_signature(&self) -> Signature {
        match self {
            StaticSkeleton::Type => Signature::Type,
            StaticSkeleton::Unit => Signature::cmp(Signature::Type),
            StaticSkeleton::Pi(a, b) => Signature::pi(a.to_signature(), b.to_signature()),
            StaticSkeleton::Sigma(a, b) => Signature::sigma(a.to_signature(), b.to_signature()),
            StaticSkeleton::Ext(base, v) => Signature::ext(base.to_signature(), v.clone()),
        }
    }

    pub fn print(&self) -> String {
        let mut out = String::new();
        self.write(&mut out);
        out
    }

    fn write(&self, out: &mut String) {
        match self {
            StaticSkeleton::Type => out.push_str("type"),
            StaticSkeleton::Unit => out.push_str("(unit)"),
            StaticSkeleton::Pi(a, b) => {
                out.push_str("(pi ");
                a.write(out);
                out.push(' ');
                b.write(out);
                out.push(')');
            }
            StaticSkeleton::Sigma(a, b) => {
                out.push_str("(sigma ");
                a.write(out);
                out.push(' ');
                b.write(out);
                out.push(')');
            }
            StaticSkeleton::Ext(base, v) => {
                out.push_str("(ext ");
                base.write(out);
                out.push(' ');
                out.push_str(&print_value(v));
                out.push(')');
            }
        }
    }
}

fn skeletonize(sig: &Signature) -> StaticSkeleton {
    match sig {
        Signature::Type => StaticSkeleton::Type,
        Signature::Dyn(_) | Signature::Cmp(_) => StaticSkeleton::Unit,
        Signature::Pi(a, b) => {
            StaticSkeleton::Pi(Box::new(skeletonize(a)), Box::new(skeletonize(b)))
        }
        Signature::Sigma(a, b) => {
            StaticSkeleton::Sigma(Box::new(skeletonize(a)), Box::new(skeletonize(b)))
        }
        Signature::Ext(base, v) => StaticSkeleton::Ext(Box::new(skeletonize(base)), v.clone()),
    }
}

/// Static part of a signature: normalize under an appended static open, then
/// collapse the connected positions. Idempotent through
/// [`StaticSkeleton::to_signature`].
pub fn static_part_sig(ctx: &Context, sig: &Signature) -> StaticSkeleton {
    let nf = normalize_sig(&ctx.with_static_open(), sig);
    skeletonize(&nf)
}

/// Static part of a value: its normal form under an appended static open,
/// with dynamic components collapsed to the connectivity point.
pub fn static_part_val(ctx: &Context, v: &Value, sig: &Signature) -> Value {
    normalize_val(&ctx.with_static_open(), v, sig)
}

/// The static projection commutes with non-dependent functor formation:
/// both readings of `⊙(σ ⇒ τ)` produce the same skeleton.
pub fn check_static_iso_arrow(ctx: &Context, dom: &Signature, cod: &Signature) -> bool {
    let arrow = Signature::pi(dom.clone(), cod.shifted(1, 0));
    let lhs = static_part_sig(ctx, &arrow);
    let rhs = StaticSkeleton::Pi(
        Box::new(static_part_sig(ctx, dom)),
        Box::new(static_part_sig(ctx, cod)),
    );
    lhs == rhs
}



#[cfg(test)]
mod class_tests {
    use super::*;
    use crate::nbe::equal_val;
    use crate::syntax::{Computation as C, Signature as S, Value as V};

    #[test]
    fn static_part_depends_only_on_the_static_class() {
        // Values equal under the static open have identical static parts.
        let show = S::sigma(
            S::Type,
            S::Dyn(V::parrow_code(V::Var(0), V::list_code(V::bool_code()))),
        );
        let impls = [
            V::pfun(C::Ret(V::cons(V::Var(0), V::Nil))),
            V::pfun(C::Ret(V::Nil)),
            V::pfun(C::Throw),
        ];
        let ctx = Context::empty();
        let static_ctx = ctx.with_static_open();
        let values: Vec<V> = impls
            .iter()
            .map(|f| V::pair(V::bool_code(), f.clone()))
            .collect();
        for a in &values {
            for b in &values {
                assert!(equal_val(&static_ctx, a, b, &show));
                assert_eq!(
                    static_part_val(&ctx, a, &show),
                    static_part_val(&ctx, b, &show)
                );
            }
        }
    }
}
