use std::str::FromStr;

use clap::Args;
use krn_core::netkat::{
    evaluate, monte_carlo_star, parse_program, prob_member, prob_member_hitting, prob_superset, History, PacketSet,
    Program, StarBudgets, StarResult,
};
use krn_core::Error;
use serde::Serialize;

use crate::{CliError, CliResult};

#[derive(Debug, Clone, Args)]
pub struct NetkatArgs {
    /// Program text, or `@path` to read it from a file.
    #[arg(long)]
    pub program: String,
    /// Truncation level: histories keep at most this many entries.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=63))]
    pub level: u32,
    /// Input state, e.g. `(0)` or `{(0),(1,1)}`.
    #[arg(long, default_value = "(0)")]
    pub input: String,
    /// `member:(1,0)`, `superset:{(0),(1)}` or `superset-all-level`; repeatable.
    #[arg(long = "query", required = true)]
    pub queries: Vec<NetkatQuery>,
    /// Monte Carlo cross-check `samples,horizon,seed`.
    #[arg(long, value_parser = parse_mc)]
    pub mc: Option<McSpec>,
    #[arg(long = "state-budget", default_value_t = StarBudgets::default().states)]
    pub state_budget: usize,
    #[arg(long = "pair-budget", default_value_t = StarBudgets::default().pairs)]
    pub pair_budget: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NetkatQuery {
    Member(History),
    Superset(PacketSet),
    SupersetAllLevel,
}

impl FromStr for NetkatQuery {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "superset-all-level" {
            Ok(NetkatQuery::SupersetAllLevel)
        } else if let Some(h) = s.strip_prefix("member:") {
            h.parse().map(NetkatQuery::Member).map_err(|e: Error| e.to_string())
        } else if let Some(set) = s.strip_prefix("superset:") {
            set.parse().map(NetkatQuery::Superset).map_err(|e: Error| e.to_string())
        } else {
            Err(format!(
                "unknown query {s:?}; expected member:(..), superset:{{..}} or superset-all-level"
            ))
        }
    }
}

impl NetkatQuery {
    fn label(&self) -> String {
        match self {
            NetkatQuery::Member(h) => format!("member:{h}"),
            NetkatQuery::Superset(s) => format!("superset:{s}"),
            NetkatQuery::SupersetAllLevel => "superset-all-level".into(),
        }
    }

    fn answer(&self, r: &StarResult) -> f64 {
        match self {
            NetkatQuery::Member(h) => prob_member(r, h),
            NetkatQuery::Superset(s) => prob_superset(r, s),
            NetkatQuery::SupersetAllLevel => prob_superset(r, &all_of_level(r.level)),
        }
    }
}

fn all_of_level(level: usize) -> PacketSet {
    History::all_of_length(level).into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct McSpec {
    pub samples: usize,
    pub horizon: usize,
    pub seed: u64,
}

fn parse_mc(s: &str) -> Result<McSpec, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [samples, horizon, seed] = parts[..] else {
        return Err(format!("expected samples,horizon,seed, got {s:?}"));
    };
    let num = |t: &str| t.parse::<u64>().map_err(|_| format!("{t:?} is not a non-negative integer"));
    let spec = McSpec {
        samples: num(samples)? as usize,
        horizon: num(horizon)? as usize,
        seed: num(seed)?,
    };
    if spec.samples == 0 || spec.horizon == 0 {
        return Err("samples and horizon must be at least 1".into());
    }
    Ok(spec)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Answer {
    pub query: String,
    /// `None` when the exact evaluation exceeded its budget.
    pub probability: Option<f64>,
    /// Membership queries only: the same probability from a hitting-time solve.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hitting: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<f64>,
    /// Binomial standard error of the Monte Carlo estimate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monte_carlo_stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deviation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetkatReport {
    pub program: String,
    pub level: usize,
    pub input: String,
    pub chain_states: Option<usize>,
    pub closed_classes: Option<usize>,
    pub union_atoms: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<McSpec>,
    pub answers: Vec<Answer>,
}

fn load_program(spec: &str) -> CliResult<Program> {
    let text = match spec.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("error: cannot read {path}: {e}")))?,
        None => spec.to_string(),
    };
    parse_program(text.trim()).map_err(|e| match e {
        Error::Parse { position, ref expected } => CliError::Usage(format!(
            "error: parse error at position {position}: expected one of {}\n  {}\n  {}^",
            expected.join(", "),
            text.trim(),
            " ".repeat(position)
        )),
        other => other.into(),
    })
}

/// The prefix-then-star split of `program` as a distribution fed to the body.
fn monte_carlo(program: &Program, input: &PacketSet, level: usize, mc: McSpec) -> CliResult<StarResult> {
    let factors = program.seq_factors();
    let Some((Program::Star(body), prefix)) = factors.split_last().map(|(l, p)| (*l, p)) else {
        // star-free: the exact evaluation is already a finite enumeration
        return Ok(evaluate(program, input, level, StarBudgets::default())?);
    };
    let prefix_program = prefix
        .iter()
        .map(|p| (*p).clone())
        .reduce(Program::seq);
    let initial = match prefix_program {
        Some(p) => evaluate(&p, input, level, StarBudgets::default())?.initial,
        None => [(input.clone(), 1.0)].into_iter().collect(),
    };
    Ok(monte_carlo_star(body, &initial, level, mc.samples, mc.horizon, mc.seed)?)
}

pub fn report(args: &NetkatArgs) -> CliResult<NetkatReport> {
    let program = load_program(&args.program)?;
    let level = args.level as usize;
    let input: PacketSet = args.input.parse().map_err(CliError::from)?;
    let budgets = StarBudgets {
        states: args.state_budget,
        pairs: args.pair_budget,
        ..StarBudgets::default()
    };
    let exact = match evaluate(&program, &input, level, budgets) {
        Ok(r) => Ok(r),
        Err(e @ (Error::StateBudgetExceeded { .. } | Error::PairBudgetExceeded { .. })) if args.mc.is_some() => Err(e),
        Err(e @ (Error::StateBudgetExceeded { .. } | Error::PairBudgetExceeded { .. })) => {
            return Err(CliError::Numeric(format!(
                "error: {e}\nhint: rerun with --mc samples,horizon,seed for a Monte Carlo estimate"
            )))
        }
        Err(e) => return Err(e.into()),
    };
    let sampled = args.mc.map(|mc| monte_carlo(&program, &input, level, mc)).transpose()?;

    let mut answers = Vec::new();
    for query in &args.queries {
        let too_long = match query {
            NetkatQuery::Member(h) => h.len() > level,
            NetkatQuery::Superset(s) => s.max_len() > level,
            NetkatQuery::SupersetAllLevel => false,
        };
        if too_long {
            return Err(CliError::Usage(format!(
                "error: query {} mentions histories longer than level {level}",
                query.label()
            )));
        }
        let probability = exact.as_ref().ok().map(|r| query.answer(r));
        let hitting = match (query, &exact) {
            (NetkatQuery::Member(h), Ok(r)) => Some(prob_member_hitting(r, h)?),
            _ => None,
        };
        let monte_carlo = sampled.as_ref().map(|r| query.answer(r));
        let monte_carlo_stderr = match (monte_carlo, args.mc) {
            (Some(p), Some(mc)) => Some((p * (1.0 - p) / mc.samples as f64).sqrt()),
            _ => None,
        };
        let deviation = match (probability, monte_carlo) {
            (Some(a), Some(b)) => Some((a - b).abs()),
            _ => None,
        };
        answers.push(Answer {
            query: query.label(),
            probability,
            hitting,
            monte_carlo,
            monte_carlo_stderr,
            deviation,
        });
    }
    let exact_ok = exact.as_ref().ok();
    Ok(NetkatReport {
        program: program.to_string(),
        level,
        input: input.to_string(),
        chain_states: exact_ok.and_then(|r| r.chain.as_ref()).map(|c| c.len()),
        closed_classes: exact_ok.and_then(|r| r.chain.as_ref()).map(|c| c.bottom_classes().len()),
        union_atoms: exact_ok.map(|r| r.union_support.len()),
        exact_error: exact.as_ref().err().map(|e| e.to_string()),
        monte_carlo: args.mc,
        answers,
    })
}

pub fn run(args: &NetkatArgs) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(&report(args)?).expect("report serializes");
    s.push('\n');
    Ok(s)
}
