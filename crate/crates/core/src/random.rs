//! Seeded generators of random spaces, kernels, quotients and predicates, used
//! by the property suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::discretize::FiniteQuotient;
use crate::measure::{FiniteMeasureVector, KernelMorphism, MeasuredSpace, Predicate};
use crate::netkat::{History, PacketSet, Program};

pub type InstanceRng = ChaCha8Rng;

pub fn rng(seed: u64) -> InstanceRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random probability vector; entries are bounded away from zero.
pub fn probability_vector(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| 0.05 + rng.random::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// Random probability vector in which each entry is zero with probability `null_rate`
/// (at least one entry stays positive).
pub fn sparse_probability_vector(rng: &mut impl Rng, len: usize, null_rate: f64) -> Vec<f64> {
    let keep = rng.random_range(0..len);
    let raw: Vec<f64> = (0..len)
        .map(|k| {
            if k != keep && rng.random::<f64>() < null_rate {
                0.0
            } else {
                0.05 + rng.random::<f64>()
            }
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

pub fn space(rng: &mut impl Rng, len: usize) -> MeasuredSpace {
    MeasuredSpace::from_weights(probability_vector(rng, len)).expect("normalized weights")
}

pub fn labels(prefix: &str, len: usize) -> Vec<String> {
    (0..len).map(|k| format!("{prefix}{k}")).collect()
}

/// Random kernel with strictly positive entries.
pub fn kernel(rng: &mut impl Rng, source: &MeasuredSpace, target_len: usize) -> KernelMorphism {
    let rows: Vec<Vec<f64>> = (0..source.len()).map(|_| probability_vector(rng, target_len)).collect();
    KernelMorphism::from_rows(source.clone(), labels("y", target_len), &rows).expect("stochastic rows")
}

/// Random kernel whose rows have zero entries, so the target may have null cells.
pub fn sparse_kernel(rng: &mut impl Rng, source: &MeasuredSpace, target_len: usize, null_rate: f64) -> KernelMorphism {
    let rows: Vec<Vec<f64>> = (0..source.len())
        .map(|_| sparse_probability_vector(rng, target_len, null_rate))
        .collect();
    KernelMorphism::from_rows(source.clone(), labels("y", target_len), &rows).expect("stochastic rows")
}

/// Random kernel out of a space with labels prefixed by `prefix`.
pub fn kernel_with_labels(rng: &mut impl Rng, source: &MeasuredSpace, prefix: &str, target_len: usize) -> KernelMorphism {
    let rows: Vec<Vec<f64>> = (0..source.len()).map(|_| probability_vector(rng, target_len)).collect();
    KernelMorphism::from_rows(source.clone(), labels(prefix, target_len), &rows).expect("stochastic rows")
}

/// Random surjective quotient onto at most `max_classes` cells.
pub fn quotient(rng: &mut impl Rng, source: &MeasuredSpace, max_classes: usize) -> FiniteQuotient {
    let classes = rng.random_range(1..=max_classes.min(source.len()).max(1));
    let mut assignment: Vec<usize> = (0..source.len())
        .map(|k| if k < classes { k } else { rng.random_range(0..classes) })
        .collect();
    // shuffle so that the forced surjective prefix is not always cells 0..classes
    for i in (1..assignment.len()).rev() {
        let j = rng.random_range(0..=i);
        assignment.swap(i, j);
    }
    FiniteQuotient::from_assignment(source, assignment).expect("surjective by construction")
}

pub fn predicate(rng: &mut impl Rng, len: usize) -> Predicate {
    Predicate::new((0..len).map(|_| rng.random_range(-3.0..3.0)).collect()).expect("finite values")
}

/// Random finite measure absolutely continuous w.r.t. `space`.
pub fn measure_vector(rng: &mut impl Rng, space: &MeasuredSpace) -> FiniteMeasureVector {
    let values = space
        .weights()
        .iter()
        .map(|&w| if w > 0.0 { rng.random::<f64>() * 2.0 } else { 0.0 })
        .collect();
    FiniteMeasureVector::new(values).expect("non-negative values")
}

/// A kernel for which `q` (a quotient of its target) is a left
/// hemi-bisimulation: each row is a coarse distribution over the fibres of
/// `q`, spread inside every fibre by one fixed profile.
pub fn left_hemi_bisimilar(
    rng: &mut impl Rng,
    source: &MeasuredSpace,
    target_len: usize,
    classes: usize,
) -> (KernelMorphism, Vec<usize>) {
    let classes = classes.clamp(1, target_len);
    let mut assignment: Vec<usize> = (0..target_len)
        .map(|l| if l < classes { l } else { rng.random_range(0..classes) })
        .collect();
    for i in (1..assignment.len()).rev() {
        let j = rng.random_range(0..=i);
        assignment.swap(i, j);
    }
    let mut profile: Vec<f64> = (0..target_len).map(|_| 0.05 + rng.random::<f64>()).collect();
    for c in 0..classes {
        let total: f64 = (0..target_len).filter(|&l| assignment[l] == c).map(|l| profile[l]).sum();
        (0..target_len)
            .filter(|&l| assignment[l] == c)
            .for_each(|l| profile[l] /= total);
    }
    let rows: Vec<Vec<f64>> = (0..source.len())
        .map(|_| {
            let coarse = probability_vector(rng, classes);
            (0..target_len).map(|l| coarse[assignment[l]] * profile[l]).collect()
        })
        .collect();
    let f = KernelMorphism::from_rows(source.clone(), labels("y", target_len), &rows).expect("stochastic rows");
    (f, assignment)
}

/// A kernel whose rows are constant on the fibres of `assignment` over its source.
pub fn right_hemi_bisimilar(
    rng: &mut impl Rng,
    source: &MeasuredSpace,
    assignment: &[usize],
    target_len: usize,
) -> KernelMorphism {
    let classes = assignment.iter().max().map_or(1, |m| m + 1);
    let coarse: Vec<Vec<f64>> = (0..classes).map(|_| probability_vector(rng, target_len)).collect();
    let rows: Vec<Vec<f64>> = assignment.iter().map(|&c| coarse[c].clone()).collect();
    KernelMorphism::from_rows(source.clone(), labels("z", target_len), &rows).expect("stochastic rows")
}

/// Random star-free program of nesting depth at most `depth`.
pub fn program(rng: &mut impl Rng, depth: usize) -> Program {
    if depth == 0 || rng.random::<f64>() < 0.3 {
        return match rng.random_range(0..3) {
            0 => Program::Assign0,
            1 => Program::Assign1,
            _ => Program::Dup,
        };
    }
    let left = program(rng, depth - 1);
    let right = program(rng, depth - 1);
    if rng.random::<bool>() {
        Program::seq(left, right)
    } else {
        // quarter steps keep the printed form exact
        Program::choice(f64::from(rng.random_range(0..=4u8)) / 4.0, left, right)
    }
}

/// Random set of one or two histories of length at most `level`.
pub fn packet_set(rng: &mut impl Rng, level: usize) -> PacketSet {
    let count = rng.random_range(1..=2);
    (0..count)
        .map(|_| {
            let len = rng.random_range(1..=level);
            let bits: Vec<u8> = (0..len).map(|_| rng.random_range(0..2)).collect();
            History::new(&bits).expect("valid length")
        })
        .collect()
}
