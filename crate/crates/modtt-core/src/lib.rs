//! Core of the modtt module calculus.
//!
//! The calculus separates module values `V : σ` from module computations
//! `M ÷ σ` with a lax modality `○σ`, distinguishes static from dynamic
//! content through a context marker (the static open), and provides a static
//! extent connective `σ {V}` subsuming singleton kinds and `where type`.
//!
//! This crate is `no_std` (with `alloc`) and carries no I/O: the surface
//! parser works on in-memory strings, and the companion `modtt` crate adds
//! the command-line front end and file handling.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod check;
pub mod ctx;
pub mod elaborate;
pub mod nbe;
pub mod paramtest;
pub mod phase;
pub mod pretty;
pub mod runtime;
pub mod sem;
pub mod surface;
pub mod syntax;

#[cfg(any(test, feature = "oracle"))]
pub mod oracle;

#[cfg(any(test, feature = "oracle"))]
pub mod fixtures;

pub use ctx::{Context, Phase};
pub use syntax::{Computation, Signature, TypeCon, Value};
