//! A one-bit ProbNetKAT fragment: bit assignment, `dup`, sequencing,
//! probabilistic choice and a single Kleene star, interpreted on sets of
//! packet histories truncated to a fixed length.
//!
//! The star is evaluated exactly by analysing the finite Markov chain that its
//! body induces: once a sample path enters a closed communicating class it
//! visits every state of that class, so the union of the path is known from
//! the transient prefix plus the class reached.

mod chain;
mod history;
mod semantics;
mod star;
mod syntax;

pub use chain::{build_chain, build_chain_from, ReachableChain};
pub use history::{History, PacketSet, MAX_LEVEL};
pub use semantics::{apply_primitive, step_distribution, Distribution};
pub use star::{
    evaluate, monte_carlo_star, prob_member, prob_member_hitting, prob_superset, star_eval, StarBudgets,
    StarResult,
};
pub use syntax::{parse_program, Program};
