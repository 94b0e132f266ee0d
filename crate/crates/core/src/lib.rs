//! Energy-aware mutation testing for component architecture models.
//!
//! The pipeline: parse a model ([`model`]), generate first-order mutants
//! ([`mutation`]), translate models to priced timed automata ([`pta`]),
//! simulate them ([`sim`]), filter equivalent mutants by a bounded search over
//! the environment parameters ([`equiv`]), then derive, execute and minimize
//! a test suite ([`testing`]). [`pipeline`] wires the stages together and
//! builds the [`report`].

pub mod equiv;
pub mod model;
pub mod mutation;
mod par;
pub mod pipeline;
pub mod pta;
pub mod rational;
pub mod report;
pub mod sim;
pub mod testing;

pub use par::current_threads;
pub use rational::Rational;
