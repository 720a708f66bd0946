//! Invariants of Calabi-Yau links from weight systems.
//!
//! A weight system (w1..w5) with d = w1+...+w5 cuts out a Calabi-Yau link: the
//! intersection of a weighted homogeneous hypersurface {f = 0} in C^5 with the
//! unit 9-sphere. This crate computes the link's Sasakian Hodge numbers and
//! Crowley-Nordstrom invariant through Groebner bases of the Jacobian ideal of
//! f, runs equivalence and inequality checks across many weight systems, and
//! trains small learned surrogates (a feedforward network and evolved symbolic
//! expressions) that predict invariants directly from the weights.
//!
//! The layers, bottom to top:
//!
//! * [`algebra`]: exact polynomials over GF(p) or the rationals.
//! * [`groebner`]: Buchberger's algorithm with budget control, plus quotient
//!   ring dimension counts.
//! * [`links`]: weight systems, hypersurface candidates, smoothness screening.
//! * [`invariants`]: Milnor numbers, Sasakian Hodge numbers, the
//!   Crowley-Nordstrom invariant, and equivalence campaigns.
//! * [`learn`] and [`symreg`]: surrogate models over computed datasets.
//! * [`pipeline`]: batch orchestration, dataset files, external tables, and
//!   plot emission backing the `cylink` binary.

pub mod algebra;
pub mod groebner;
pub mod invariants;
pub mod learn;
pub mod links;
pub mod pipeline;
pub mod symreg;

mod book;
