//! Shared fixtures for the benchmarks.

use krn_core::measure::KernelMorphism;
use krn_core::random;

/// A dense random kernel on an `n`-point space with full support.
pub fn dense_kernel(seed: u64, n: usize) -> KernelMorphism {
    let mut rng = random::rng(seed);
    let x = random::space(&mut rng, n);
    random::kernel(&mut rng, &x, n)
}

pub const CANTOR: &str = "(p0! +[0.5] p1!) ; ((dup ; (p0! +[0.5] p1!)))*";
