//! Clustered-choice game logic over cirquents.
//!
//! A *cirquent* is a formula tree built from literals, the parallel
//! connectives `&` / `|`, and *clustered* choice connectives and quantifiers
//! `&[c]`, `|[c]`, `all[c] x.`, `ex[c] x.`. Every choice node carries a
//! cluster name; all nodes sharing a cluster are resolved by one move of the
//! corresponding player, which is what distinguishes cirquents from plain
//! formulas.
//!
//! The crate provides, bottom to top:
//!
//! * [`syntax`] — the tree, parser, printer, substitution, paths,
//!   alpha-equivalence;
//! * [`semantics`] — runs, legality, residues, winning, tautology checking;
//! * [`calculus`] — the proof system (axiom `T` plus 23 rules), forward rule
//!   application, step and proof checking, a textual proof format;
//! * [`purify`] — the rank function and the purification rewrite that turns a
//!   closed cirquent into a pure one together with a replayable derivation;
//! * [`decide`] — a decision procedure for validity of closed cirquents that
//!   extracts checkable proofs for the valid ones;
//! * [`oracle`] — an independent brute-force game search used to cross-check
//!   the decision procedure on small instances;
//! * [`corpus`] — seeded and exhaustive instance generators plus the
//!   agreement / preservation / purification harnesses built from them.

pub mod calculus;
pub mod corpus;
pub mod decide;
pub mod oracle;
pub mod purify;
pub mod semantics;
pub mod syntax;

pub use syntax::{parse, print, Cirquent, ClusterKind, Path, Step, Term};
