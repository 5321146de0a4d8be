//! A multi-model query engine over thin set categories.
//!
//! Relational tables, XML trees and graphs are loaded into one
//! [`InstanceCategory`](model::InstanceCategory). Queries are written in a
//! textual calculus ([`calculus`]), compiled into algebra plans
//! ([`compiler`], [`algebra`]), rewritten by [`optimizer`] and executed. The
//! calculus also has a brute-force evaluator that serves as the reference
//! semantics; [`check`] runs the randomized equivalence suites built on it.

pub mod algebra;
pub mod calculus;
pub mod check;
pub mod compiler;
pub mod ingest;
pub mod model;
pub mod optimizer;
