use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::netkat::{build_chain_from, step_distribution, Distribution, History, PacketSet, Program, ReachableChain};
use crate::random;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarBudgets {
    pub states: usize,
    pub pairs: usize,
    pub max_iterations: usize,
    /// Stop once the mass still in transient states drops below this.
    pub residual: f64,
}

impl Default for StarBudgets {
    fn default() -> Self {
        Self {
            states: 100_000,
            pairs: 1_000_000,
            max_iterations: 100_000,
            residual: 1e-12,
        }
    }
}

/// Distribution of the union of all states a path visits.
#[derive(Debug, Clone, PartialEq)]
pub struct StarResult {
    pub level: usize,
    /// Atoms in increasing order of the union.
    pub union_support: Vec<(PacketSet, f64)>,
    /// The chain the star body induces, absent for star-free programs evaluated
    /// without one and for Monte Carlo runs that exceeded the state budget.
    pub chain: Option<ReachableChain>,
    /// Distribution of the state fed to the star body.
    pub initial: Distribution,
}

impl StarResult {
    pub fn total_probability(&self) -> f64 {
        self.union_support.iter().map(|(_, p)| p).sum()
    }
}

fn ensure_distribution(initial: &Distribution, level: usize) -> Result<()> {
    if initial.is_empty() {
        return Err(Error::InvalidArgument("initial distribution is empty".into()));
    }
    let mut total = 0.0;
    for (s, &p) in initial {
        s.ensure_level(level)?;
        if !(p.is_finite() && p >= 0.0) {
            return Err(Error::InvalidArgument(format!("initial probability of {s} is {p}")));
        }
        total += p;
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("initial distribution has mass {total}")));
    }
    Ok(())
}

/// Exact path-union distribution of `body*` started from `initial`.
///
/// The pair chain (current state, union so far) is iterated until the mass
/// that has not yet reached a closed class is below `budgets.residual`; on
/// entering a closed class the union is completed with every state of it.
pub fn star_eval(body: &Program, initial: &Distribution, level: usize, budgets: StarBudgets) -> Result<StarResult> {
    if body.contains_star() {
        return Err(Error::StarNotAllowed);
    }
    ensure_distribution(initial, level)?;
    let starts: Vec<PacketSet> = initial.keys().cloned().collect();
    let chain = build_chain_from(body, &starts, level, budgets.states)?;
    let class_unions: Vec<PacketSet> = (0..chain.bottom_classes().len()).map(|c| chain.class_union(c)).collect();

    let mut support: BTreeMap<PacketSet, f64> = BTreeMap::new();
    let mut frontier: BTreeMap<(usize, PacketSet), f64> = BTreeMap::new();
    // a pair whose state lies in a closed class is absorbed at once
    let mut visit = |frontier: &mut BTreeMap<(usize, PacketSet), f64>, i: usize, acc: PacketSet, p: f64| {
        match chain.class_of(i) {
            Some(c) => *support.entry(acc.union(&class_unions[c])).or_insert(0.0) += p,
            None => *frontier.entry((i, acc)).or_insert(0.0) += p,
        }
    };
    for (s, &p) in initial {
        if p > 0.0 {
            let i = chain.index_of(s).expect("initial states are interned");
            visit(&mut frontier, i, s.clone(), p);
        }
    }
    let mut pairs_seen = frontier.len();
    let mut iterations = 0usize;
    while frontier.values().sum::<f64>() >= budgets.residual {
        iterations += 1;
        if iterations > budgets.max_iterations {
            return Err(Error::TransientMassNotDrained {
                residual: frontier.values().sum(),
                iterations,
            });
        }
        let mut next = BTreeMap::new();
        for ((i, acc), p) in frontier {
            for &(j, q) in chain.transitions(i) {
                if p * q > 0.0 {
                    visit(&mut next, j, acc.union(chain.state(j)), p * q);
                }
            }
        }
        pairs_seen += next.len();
        if pairs_seen > budgets.pairs {
            return Err(Error::PairBudgetExceeded {
                reached: pairs_seen,
                budget: budgets.pairs,
            });
        }
        frontier = next;
    }
    Ok(StarResult {
        level,
        union_support: support.into_iter().collect(),
        chain: Some(chain),
        initial: initial.clone(),
    })
}

pub fn prob_member(result: &StarResult, h: &History) -> f64 {
    result
        .union_support
        .iter()
        .filter(|(u, _)| u.contains(h))
        .fold(0.0, |acc, (_, p)| acc + p)
}

pub fn prob_superset(result: &StarResult, s: &PacketSet) -> f64 {
    result
        .union_support
        .iter()
        .filter(|(u, _)| u.is_superset(s))
        .fold(0.0, |acc, (_, p)| acc + p)
}

/// `prob_member` recomputed as the probability that the path ever hits a
/// state containing `h`, by a linear solve on the chain.
pub fn prob_member_hitting(result: &StarResult, h: &History) -> Result<f64> {
    let chain = result
        .chain
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("result carries no chain".into()))?;
    let hit = chain.hitting_probabilities(|s| s.contains(h))?;
    let mut total = 0.0;
    for (s, p) in &result.initial {
        let i = chain
            .index_of(s)
            .ok_or_else(|| Error::InvalidArgument(format!("initial state {s} is not in the chain")))?;
        total += p * hit[i];
    }
    Ok(total)
}

fn sample<'a, T>(rng: &mut impl Rng, items: impl IntoIterator<Item = (&'a T, f64)>) -> &'a T
where
    T: 'a,
{
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = None;
    for (item, p) in items {
        acc += p;
        last = Some(item);
        if u < acc {
            return item;
        }
    }
    last.expect("sampling from an empty distribution")
}

/// Simulates `samples` paths of `horizon` steps. A path whose final state lies
/// in a closed class is completed with the union of that class.
pub fn monte_carlo_star(
    body: &Program,
    initial: &Distribution,
    level: usize,
    samples: usize,
    horizon: usize,
    seed: u64,
) -> Result<StarResult> {
    if samples == 0 || horizon == 0 {
        return Err(Error::InvalidArgument("samples and horizon must be at least 1".into()));
    }
    if body.contains_star() {
        return Err(Error::StarNotAllowed);
    }
    ensure_distribution(initial, level)?;
    let starts: Vec<PacketSet> = initial.keys().cloned().collect();
    let chain = match build_chain_from(body, &starts, level, StarBudgets::default().states) {
        Ok(c) => Some(c),
        Err(Error::StateBudgetExceeded { .. }) => None,
        Err(e) => return Err(e),
    };
    let mut rng = random::rng(seed);
    let mut counts: BTreeMap<PacketSet, usize> = BTreeMap::new();
    for _ in 0..samples {
        let start = sample(&mut rng, initial.iter().map(|(s, &p)| (s, p)));
        let union = match &chain {
            Some(chain) => {
                let mut i = chain.index_of(start).expect("initial states are interned");
                let mut union = start.clone();
                for _ in 0..horizon {
                    let row = chain.transitions(i);
                    i = *sample(&mut rng, row.iter().map(|(j, p)| (j, *p)));
                    union.extend(chain.state(i));
                }
                if let Some(c) = chain.class_of(i) {
                    union.extend(&chain.class_union(c));
                }
                union
            }
            None => {
                let mut state = start.clone();
                let mut union = start.clone();
                for _ in 0..horizon {
                    let dist = step_distribution(body, &state, level)?;
                    state = sample(&mut rng, dist.iter().map(|(s, &p)| (s, p))).clone();
                    union.extend(&state);
                }
                union
            }
        };
        *counts.entry(union).or_insert(0) += 1;
    }
    Ok(StarResult {
        level,
        union_support: counts
            .into_iter()
            .map(|(u, c)| (u, c as f64 / samples as f64))
            .collect(),
        chain,
        initial: initial.clone(),
    })
}

/// Evaluates `prefix ; body*` (or a star-free program) on a single input.
pub fn evaluate(program: &Program, input: &PacketSet, level: usize, budgets: StarBudgets) -> Result<StarResult> {
    input.ensure_level(level)?;
    let factors = program.seq_factors();
    let star_at = factors.iter().position(|f| f.contains_star());
    let (prefix, body) = match star_at {
        None => (&factors[..], None),
        Some(i) if i + 1 == factors.len() => match factors[i] {
            Program::Star(body) => (&factors[..i], Some(body.as_ref())),
            _ => return Err(unsupported(program)),
        },
        Some(_) => return Err(unsupported(program)),
    };
    let mut dist = Distribution::from([(input.clone(), 1.0)]);
    for factor in prefix {
        let mut next = Distribution::new();
        for (s, p) in &dist {
            for (t, q) in step_distribution(factor, s, level)? {
                *next.entry(t).or_insert(0.0) += p * q;
            }
        }
        dist = next;
    }
    match body {
        Some(body) => star_eval(body, &dist, level, budgets),
        None => Ok(StarResult {
            level,
            union_support: dist.iter().map(|(s, &p)| (s.clone(), p)).collect(),
            chain: Some(ReachableChain::absorbing(dist.keys().cloned().collect())),
            initial: dist,
        }),
    }
}

fn unsupported(program: &Program) -> Error {
    Error::UnsupportedShape(format!(
        "`{program}`: only a star-free prefix followed by one starred factor is supported"
    ))
}
