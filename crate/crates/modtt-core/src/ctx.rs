//! Typing contexts: telescopes of typed variables interleaved with static
//! open markers.

use alloc::vec::Vec;

use crate::syntax::Signature;

/// The phase at which a judgment is read. `Static` holds exactly when the
/// context contains at least one static open marker.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Dynamic,
    Static,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Entry {
    /// A variable binding. Its signature is well-formed in the prefix
    /// context.
    Var(Signature),
    /// The static open `☾st`. Proof-irrelevant: it carries no inhabitant and
    /// is transparent to variable indexing.
    StaticOpen,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Context {
    entries: Vec<Entry>,
}

impl Context {
    pub fn empty() -> Context {
        Context {
            entries: Vec::new(),
        }
    }

    pub fn push_var(&mut self, sig: Signature) {
        self.entries.push(Entry::Var(sig));
    }

    pub fn push_static_open(&mut self) {
        self.entries.push(Entry::StaticOpen);
    }

    pub fn pop(&mut self) {
        self.entries.pop();
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    /// Number of variable entries; markers do not count.
    pub fn var_count(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| matches!(e, Entry::Var(_)))
            .count()
    }

    /// `Static` iff some entry is a static open. Appending further markers is
    /// idempotent.
    pub fn phase(&self) -> Phase {
        if self.entries.iter().any(|e| matches!(e, Entry::StaticOpen)) {
            Phase::Static
        } else {
            Phase::Dynamic
        }
    }

    /// Signature of the variable at de Bruijn index `index`, weakened to the
    /// full context. Markers are skipped during counting.
    pub fn lookup(&self, index: usize) -> Option<Signature> {
        let mut seen = 0usize;
        for entry in self.entries.iter().rev() {
            if let Entry::Var(sig) = entry {
                if seen == index {
                    return Some(sig.shifted(index + 1, 0));
                }
                seen += 1;
            }
        }
        None
    }

    /// Clone of this context with a static open appended; used for the
    /// hypothetical premises of the extent rules.
    pub fn with_static_open(&self) -> Context {
        let mut ctx = self.clone();
        ctx.push_static_open();
        ctx
    }

    pub fn with_var(&self, sig: Signature) -> Context {
        let mut ctx = self.clone();
        ctx.push_var(sig);
        ctx
    }
}

/// Free function form of [`Context::phase`].
pub fn phase_of(ctx: &Context) -> Phase {
    ctx.phase()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::Value;

    #[test]
    fn phase_of_empty_is_dynamic() {
        assert_eq!(phase_of(&Context::empty()), Phase::Dynamic);
    }

    #[test]
    fn phase_of_marker_is_static() {
        let mut ctx = Context::empty();
        ctx.push_var(Signature::Type);
        ctx.push_static_open();
        assert_eq!(phase_of(&ctx), Phase::Static);
    }

    #[test]
    fn phase_of_markers_idempotent() {
        let mut ctx = Context::empty();
        ctx.push_static_open();
        ctx.push_static_open();
        assert_eq!(phase_of(&ctx), Phase::Static);
        // Monotone: appending another marker cannot flip back.
        ctx.push_static_open();
        assert_eq!(phase_of(&ctx), Phase::Static);
    }

    #[test]
    fn lookup_single() {
        let mut ctx = Context::empty();
        ctx.push_var(Signature::Type);
        assert_eq!(ctx.lookup(0), Some(Signature::Type));
    }

    #[test]
    fn lookup_weakens() {
        let mut ctx = Context::empty();
        ctx.push_var(Signature::Type);
        ctx.push_var(Signature::Dyn(Value::Var(0)));
        // The innermost entry's signature mentioned the outer variable as
        // index 0; seen from the full context that variable is index 1.
        assert_eq!(ctx.lookup(0), Some(Signature::Dyn(Value::Var(1))));
        assert_eq!(ctx.lookup(1), Some(Signature::Type));
    }

    #[test]
    fn lookup_skips_markers() {
        let mut ctx = Context::empty();
        ctx.push_var(Signature::Type);
        ctx.push_static_open();
        assert_eq!(ctx.lookup(0), Some(Signature::Type));
    }

    #[test]
    fn lookup_out_of_range() {
        let ctx = Context::empty();
        assert_eq!(ctx.lookup(0), None);
    }
}
