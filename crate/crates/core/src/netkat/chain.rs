use std::collections::{BTreeMap, VecDeque};

use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::error::{Error, Result};
use crate::netkat::{step_distribution, PacketSet, Program};

/// The finite Markov chain a star-free body induces on the states reachable
/// from a set of initial states, with its closed communicating classes.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachableChain {
    states: Vec<PacketSet>,
    transitions: Vec<Vec<(usize, f64)>>,
    initial: Vec<usize>,
    bottom_classes: Vec<Vec<usize>>,
    class_of: Vec<Option<usize>>,
}

/// Breadth-first closure of `body` from a single state.
pub fn build_chain(body: &Program, initial: &PacketSet, level: usize, state_budget: usize) -> Result<ReachableChain> {
    build_chain_from(body, std::slice::from_ref(initial), level, state_budget)
}

/// Breadth-first closure of `body` from several initial states.
pub fn build_chain_from(
    body: &Program,
    initial: &[PacketSet],
    level: usize,
    state_budget: usize,
) -> Result<ReachableChain> {
    if state_budget == 0 {
        return Err(Error::InvalidArgument("state budget must be at least 1".into()));
    }
    let mut index: BTreeMap<PacketSet, usize> = BTreeMap::new();
    let mut states = Vec::new();
    let mut queue = VecDeque::new();
    let mut intern = |s: &PacketSet, states: &mut Vec<PacketSet>, queue: &mut VecDeque<usize>| -> Result<usize> {
        if let Some(&i) = index.get(s) {
            return Ok(i);
        }
        let i = states.len();
        if i >= state_budget {
            return Err(Error::StateBudgetExceeded {
                reached: i + 1,
                budget: state_budget,
            });
        }
        index.insert(s.clone(), i);
        states.push(s.clone());
        queue.push_back(i);
        Ok(i)
    };

    let mut initial_idx = Vec::new();
    for s in initial {
        s.ensure_level(level)?;
        let i = intern(s, &mut states, &mut queue)?;
        if !initial_idx.contains(&i) {
            initial_idx.push(i);
        }
    }
    let mut transitions: Vec<Vec<(usize, f64)>> = Vec::new();
    while let Some(i) = queue.pop_front() {
        let dist = step_distribution(body, &states[i].clone(), level)?;
        let mut row = Vec::with_capacity(dist.len());
        for (s, p) in dist {
            if p > 0.0 {
                row.push((intern(&s, &mut states, &mut queue)?, p));
            }
        }
        if transitions.len() <= i {
            transitions.resize(i + 1, Vec::new());
        }
        transitions[i] = row;
    }
    Ok(ReachableChain::from_parts(states, transitions, initial_idx))
}

impl ReachableChain {
    fn from_parts(states: Vec<PacketSet>, transitions: Vec<Vec<(usize, f64)>>, initial: Vec<usize>) -> Self {
        let mut graph = DiGraph::<(), ()>::with_capacity(states.len(), 0);
        let nodes: Vec<_> = (0..states.len()).map(|_| graph.add_node(())).collect();
        for (i, row) in transitions.iter().enumerate() {
            for &(j, _) in row {
                graph.add_edge(nodes[i], nodes[j], ());
            }
        }
        let mut bottom_classes: Vec<Vec<usize>> = tarjan_scc(&graph)
            .into_iter()
            .map(|scc| {
                let mut members: Vec<usize> = scc.into_iter().map(|n| n.index()).collect();
                members.sort_unstable();
                members
            })
            .filter(|members| {
                members
                    .iter()
                    .all(|&i| transitions[i].iter().all(|(j, _)| members.binary_search(j).is_ok()))
            })
            .collect();
        bottom_classes.sort();
        let mut class_of = vec![None; states.len()];
        for (c, members) in bottom_classes.iter().enumerate() {
            for &i in members {
                class_of[i] = Some(c);
            }
        }
        Self {
            states,
            transitions,
            initial,
            bottom_classes,
            class_of,
        }
    }

    /// A chain in which every state is absorbing; used for star-free programs.
    pub fn absorbing(states: Vec<PacketSet>) -> Self {
        let transitions = (0..states.len()).map(|i| vec![(i, 1.0)]).collect();
        let initial = (0..states.len()).collect();
        Self::from_parts(states, transitions, initial)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[PacketSet] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &PacketSet {
        &self.states[i]
    }

    pub fn index_of(&self, s: &PacketSet) -> Option<usize> {
        self.states.iter().position(|t| t == s)
    }

    pub fn transitions(&self, i: usize) -> &[(usize, f64)] {
        &self.transitions[i]
    }

    pub fn probability(&self, i: usize, j: usize) -> f64 {
        self.transitions[i].iter().filter(|(t, _)| *t == j).map(|(_, p)| p).sum()
    }

    pub fn initial(&self) -> &[usize] {
        &self.initial
    }

    /// Closed communicating classes (bottom strongly connected components).
    pub fn bottom_classes(&self) -> &[Vec<usize>] {
        &self.bottom_classes
    }

    pub fn class_of(&self, i: usize) -> Option<usize> {
        self.class_of[i]
    }

    /// Union of the histories of every state in a bottom class.
    pub fn class_union(&self, class: usize) -> PacketSet {
        let mut out = PacketSet::empty();
        for &i in &self.bottom_classes[class] {
            out.extend(&self.states[i]);
        }
        out
    }

    /// Largest deviation of a transition row from unit mass.
    pub fn stochasticity_defect(&self) -> f64 {
        self.transitions
            .iter()
            .map(|row| (row.iter().map(|(_, p)| p).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Probability, from each state, of ever visiting (time zero included) a
    /// state satisfying `target`. Minimal non-negative solution of
    /// `h = 1` on the target, `h = P h` elsewhere.
    pub fn hitting_probabilities(&self, target: impl Fn(&PacketSet) -> bool) -> Result<Vec<f64>> {
        let n = self.len();
        let is_target: Vec<bool> = self.states.iter().map(&target).collect();
        // states that can reach the target: reverse reachability
        let mut reverse = vec![Vec::new(); n];
        for (i, row) in self.transitions.iter().enumerate() {
            for &(j, _) in row {
                reverse[j].push(i);
            }
        }
        let mut reaches = is_target.clone();
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| is_target[i]).collect();
        while let Some(j) = queue.pop_front() {
            for &i in &reverse[j] {
                if !reaches[i] {
                    reaches[i] = true;
                    queue.push_back(i);
                }
            }
        }
        let unknown: Vec<usize> = (0..n).filter(|&i| reaches[i] && !is_target[i]).collect();
        let mut h: Vec<f64> = is_target.iter().map(|&t| if t { 1.0 } else { 0.0 }).collect();
        if unknown.is_empty() {
            return Ok(h);
        }
        let pos: BTreeMap<usize, usize> = unknown.iter().enumerate().map(|(a, &i)| (i, a)).collect();
        let m = unknown.len();
        let mut a = DMatrix::<f64>::identity(m, m);
        let mut b = DVector::<f64>::zeros(m);
        for (r, &i) in unknown.iter().enumerate() {
            for &(j, p) in &self.transitions[i] {
                if is_target[j] {
                    b[r] += p;
                } else if let Some(&c) = pos.get(&j) {
                    a[(r, c)] -= p;
                }
            }
        }
        let solution = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::Singular("hitting-probability system".into()))?;
        for (r, &i) in unknown.iter().enumerate() {
            h[i] = solution[r].clamp(0.0, 1.0);
        }
        Ok(h)
    }
}
