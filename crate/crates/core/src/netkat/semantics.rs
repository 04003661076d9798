use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::netkat::{PacketSet, Program};

/// A finite distribution over program states.
pub type Distribution = BTreeMap<PacketSet, f64>;

/// Direct image of a state under `p0!`, `p1!` or `dup` at truncation `level`.
pub fn apply_primitive(prog: &Program, state: &PacketSet, level: usize) -> Result<PacketSet> {
    match prog {
        Program::Assign0 => Ok(state.map(|h| h.assign(0))),
        Program::Assign1 => Ok(state.map(|h| h.assign(1))),
        Program::Dup => Ok(state.map(|h| h.dup(level))),
        other => Err(Error::InvalidArgument(format!("`{other}` is not a primitive"))),
    }
}

/// One run of a star-free program from `state`.
pub fn step_distribution(prog: &Program, state: &PacketSet, level: usize) -> Result<Distribution> {
    match prog {
        Program::Assign0 | Program::Assign1 | Program::Dup => {
            Ok(Distribution::from([(apply_primitive(prog, state, level)?, 1.0)]))
        }
        Program::Choice { lambda, left, right } => {
            let mut out = Distribution::new();
            for (weight, branch) in [(*lambda, left), (1.0 - lambda, right)] {
                if weight == 0.0 {
                    continue;
                }
                for (s, p) in step_distribution(branch, state, level)? {
                    *out.entry(s).or_insert(0.0) += weight * p;
                }
            }
            Ok(out)
        }
        Program::Seq(first, second) => {
            let mut out = Distribution::new();
            for (mid, p) in step_distribution(first, state, level)? {
                for (s, q) in step_distribution(second, &mid, level)? {
                    *out.entry(s).or_insert(0.0) += p * q;
                }
            }
            Ok(out)
        }
        Program::Star(_) => Err(Error::StarNotAllowed),
    }
}
