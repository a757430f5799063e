//! Type checker and reference interpreter for MinErl, a core calculus with
//! polymorphic set-theoretic types and guarded pattern matching.
//!
//! The crate is organised as a pipeline:
//!
//! * [`ast`] — surface syntax, parser, pretty-printer
//! * [`types`] — hash-consed, possibly cyclic type graphs and schemes
//! * [`subty`] — semantic subtyping: emptiness, projections, witnesses
//! * [`patenv`] — types accepted by guarded patterns and the environments
//!   they produce
//! * [`interp`] — small-step call-by-value evaluator with match oracles
//! * [`constraints`] — constraint generation and rewriting
//! * [`tally`] — constraint solving (normalize / saturate / solve)
//! * [`checker`] — the top-level checking driver and diagnostics
//! * [`cli`] — command-line front end shared by the `minerl` binary
//!
//! Types are interned in a [`types::TyStore`]; every operation that may
//! allocate or decide types takes `&mut TyStore`. A store is cheap to
//! create and all results are deterministic for a fixed sequence of store
//! operations, so one store per compilation unit of work is the intended
//! usage.

pub mod ast;
pub mod checker;
pub mod cli;
pub mod constraints;
pub mod interp;
pub mod patenv;
pub mod subty;
pub mod tally;
pub mod types;
