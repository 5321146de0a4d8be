//! Randomized equivalence checks between the calculus oracle, compiled
//! plans and optimizer rewrites.

pub mod fixtures;
pub mod gen;
pub mod oracle;
pub mod suites;
