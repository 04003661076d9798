//! Seeded randomized checks of the algebraic laws of finite kernels, their
//! approximations and the star semantics. Each suite reports, per law, the
//! number of instances and the largest defect observed.
//!
//! Suites take the dagger as a parameter so that a deliberately broken
//! implementation can be shown to be caught.

use std::fmt;

use rand::Rng;

use crate::discretize::{approximate_finite, internalize, FiniteQuotient};
use crate::error::Error;
use crate::measure::{
    adjointness_defect, lp_norm, mr, rn_derivative, DensityVector, KernelMorphism, Lp, MeasuredSpace, Predicate,
    NULL_MASS,
};
use crate::netkat::{
    evaluate, parse_program, prob_member, prob_member_hitting, step_distribution, History, Program, StarBudgets,
};
use crate::random::{self, InstanceRng};
use crate::Result;

pub type DaggerFn = fn(&KernelMorphism) -> KernelMorphism;

/// The Bayesian inversion of [`KernelMorphism::dagger`].
pub fn bayes_dagger(f: &KernelMorphism) -> KernelMorphism {
    f.dagger()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LawCheck {
    pub suite: &'static str,
    pub law: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Index of the first failing instance within the suite run.
    pub first_failure: Option<usize>,
    pub max_defect: f64,
    pub tolerance: f64,
}

impl LawCheck {
    fn new(suite: &'static str, law: &'static str, tolerance: f64) -> Self {
        Self {
            suite,
            law,
            cases: 0,
            failures: 0,
            first_failure: None,
            max_defect: 0.0,
            tolerance,
        }
    }

    /// Records one instance; an error counts as an infinite defect.
    fn record(&mut self, defect: Result<f64>) {
        let d = defect.unwrap_or(f64::INFINITY);
        if !(d <= self.tolerance) {
            self.failures += 1;
            self.first_failure.get_or_insert(self.cases);
        }
        self.cases += 1;
        if d.is_nan() || d > self.max_defect {
            self.max_defect = d;
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl fmt::Display for LawCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}/{}: {} passed, max defect {:.3e} (tol {:.0e})",
            if self.passed() { "ok  " } else { "FAIL" },
            self.suite,
            self.law,
            self.cases - self.failures,
            self.max_defect,
            self.tolerance
        )
    }
}

/// Entrywise a.e. difference, or an error when the kernels are not comparable.
pub fn ae_defect(f: &KernelMorphism, g: &KernelMorphism) -> Result<f64> {
    f.ensure_comparable(g)?;
    if f.matrix().shape() != g.matrix().shape() {
        return Err(Error::SpaceMismatch("matrix shapes differ".into()));
    }
    Ok(f.max_ae_difference(g, NULL_MASS))
}

fn dim(rng: &mut InstanceRng, max_dim: usize) -> usize {
    rng.random_range(1..=max_dim.max(1))
}

fn sparse_space(rng: &mut InstanceRng, len: usize) -> MeasuredSpace {
    MeasuredSpace::from_weights(random::sparse_probability_vector(rng, len, 0.3)).expect("normalized weights")
}

/// Involution, identity, contravariance, tensor exchange, Bayes adjointness
/// on cell sets, coupling marginals and the a.e. involution with null cells.
pub fn dagger_suite(seed: u64, cases: usize, max_dim: usize, dagger: DaggerFn) -> Vec<LawCheck> {
    const S: &str = "dagger";
    let mut involution = LawCheck::new(S, "involution", 1e-9);
    let mut identity = LawCheck::new(S, "identity", 1e-12);
    let mut contravariance = LawCheck::new(S, "contravariance", 1e-9);
    let mut tensor = LawCheck::new(S, "tensor-exchange", 1e-9);
    let mut adjoint = LawCheck::new(S, "adjointness", 1e-12);
    let mut marginals = LawCheck::new(S, "coupling-marginals", 1e-12);
    let mut null_involution = LawCheck::new(S, "involution-with-null-cells", 1e-9);
    let mut rng = random::rng(seed);
    for _ in 0..cases {
        let (n, m, r) = (dim(&mut rng, max_dim), dim(&mut rng, max_dim), dim(&mut rng, max_dim));
        let x = random::space(&mut rng, n);
        let f = random::kernel(&mut rng, &x, m);
        let g = random::kernel_with_labels(&mut rng, f.target(), "z", r);

        involution.record(ae_defect(&dagger(&dagger(&f)), &f));
        let id = KernelMorphism::identity(&x);
        identity.record(ae_defect(&dagger(&id), &id));
        contravariance.record(
            f.compose(&g)
                .and_then(|fg| dagger(&g).compose(&dagger(&f)).and_then(|rhs| ae_defect(&dagger(&fg), &rhs))),
        );

        let (a, b) = (dim(&mut rng, max_dim.min(4)), dim(&mut rng, max_dim.min(4)));
        let w = random::space(&mut rng, a);
        let h = random::kernel_with_labels(&mut rng, &w, "w", b);
        let fh = f.tensor(&h);
        tensor.record(ae_defect(&dagger(&fh), &dagger(&f).tensor(&dagger(&h))));

        let fd = dagger(&f);
        adjoint.record(Ok(adjointness_sweep(&mut rng, &f, &fd)));

        let gamma = f.coupling_matrix();
        let mut worst: f64 = 0.0;
        for (k, mu) in x.weights().iter().enumerate() {
            worst = worst.max((gamma.row(k).sum() - mu).abs());
        }
        for (l, nu) in f.target().weights().iter().enumerate() {
            worst = worst.max((gamma.column(l).sum() - nu).abs());
        }
        marginals.record(Ok(worst));

        let xs = sparse_space(&mut rng, n);
        let fs = random::sparse_kernel(&mut rng, &xs, m, 0.4);
        null_involution.record(ae_defect(&dagger(&dagger(&fs)), &fs));
    }
    vec![
        involution,
        identity,
        contravariance,
        tensor,
        adjoint,
        marginals,
        null_involution,
    ]
}

/// Largest adjointness defect over all cell-set pairs when both spaces have
/// at most four cells, and over 64 random pairs otherwise.
pub fn adjointness_sweep(rng: &mut impl Rng, f: &KernelMorphism, fd: &KernelMorphism) -> f64 {
    let (n, m) = (f.source().len(), f.target().len());
    if fd.source().len() != m || fd.target().len() != n {
        return f64::INFINITY;
    }
    let mut worst: f64 = 0.0;
    if n <= 4 && m <= 4 {
        for a in 0..1u64 << n {
            for b in 0..1u64 << m {
                worst = worst.max(adjointness_defect(f, fd, a, b));
            }
        }
    } else {
        for _ in 0..64 {
            let a = rng.random::<u64>() & ((1u64 << n) - 1);
            let b = rng.random::<u64>() & ((1u64 << m) - 1);
            worst = worst.max(adjointness_defect(f, fd, a, b));
        }
    }
    worst
}

/// The same assignment viewed as a quotient of another space with the same cells.
fn requotient(p: &FiniteQuotient, space: &MeasuredSpace) -> Result<FiniteQuotient> {
    FiniteQuotient::from_assignment(space, p.assignment().to_vec())
}

/// `max |internalize(f, p, p) − E_p∘f|` for an endo-kernel `f`, with `p`
/// taken once on the source and once on the target measure.
pub fn approx_endo_defect(f: &KernelMorphism, p: &FiniteQuotient) -> Result<f64> {
    let p_out = requotient(p, f.target())?;
    let lhs = internalize(f, p, &p_out)?;
    let rhs = p.conditional_expectation().compose(f)?;
    ae_defect(&lhs, &rhs)
}

/// Commutation of Bayesian inversion with `approximate_finite` and with
/// `internalize`, non-expansiveness in L¹, L², L^∞, compositionality along
/// hemi-bisimulations and idempotence.
pub fn approximation_suite(seed: u64, cases: usize, max_dim: usize, dagger: DaggerFn) -> Vec<LawCheck> {
    const S: &str = "approximation";
    let mut endo = LawCheck::new(S, "endo-identity-on-hemi-bisimilar", 1e-12);
    let mut inverse_coarse = LawCheck::new(S, "bayes-inverse-commutes-coarse", 1e-9);
    let mut inverse_internal = LawCheck::new(S, "bayes-inverse-commutes-internal", 1e-9);
    let mut non_expansive = LawCheck::new(S, "non-expansive", 1e-12);
    let mut left = LawCheck::new(S, "compositional-left-hemi", 1e-9);
    let mut right = LawCheck::new(S, "compositional-right-hemi", 1e-9);
    let mut idempotent = LawCheck::new(S, "idempotent", 1e-9);
    let mut rng = random::rng(seed);
    for _ in 0..cases {
        let (n, m, r) = (dim(&mut rng, max_dim), dim(&mut rng, max_dim), dim(&mut rng, max_dim));
        let x = random::space(&mut rng, n);

        // E_p∘f has p as a left hemi-bisimulation whenever f does
        let classes = dim(&mut rng, n);
        let (f, assignment) = random::left_hemi_bisimilar(&mut rng, &x, n, classes);
        let relabelled = KernelMorphism::new(x.clone(), x.labels().to_vec(), f.matrix().clone());
        endo.record(relabelled.and_then(|f| {
            let p = FiniteQuotient::from_assignment(&x, assignment.clone())?;
            approx_endo_defect(&f, &p)
        }));

        let f = random::kernel(&mut rng, &x, m);
        let p = random::quotient(&mut rng, &x, n);
        let q = random::quotient(&mut rng, f.target(), m);
        let fd = dagger(&f);
        inverse_coarse.record((|| {
            let lhs = dagger(&approximate_finite(&f, &p, &q)?);
            let rhs = approximate_finite(&fd, &requotient(&q, fd.source())?, &requotient(&p, fd.target())?)?;
            ae_defect(&lhs, &rhs)
        })());
        inverse_internal.record((|| {
            let lhs = dagger(&internalize(&f, &p, &q)?);
            let rhs = internalize(&fd, &requotient(&q, fd.source())?, &requotient(&p, fd.target())?)?;
            ae_defect(&lhs, &rhs)
        })());

        non_expansive.record((|| {
            let smoothed = internalize(&f, &p, &FiniteQuotient::identity(f.target()))?;
            let mut worst = f64::NEG_INFINITY;
            for _ in 0..100 {
                let phi = random::predicate(&mut rng, m);
                let a = smoothed.predicate_transform(&phi)?;
                let b = f.predicate_transform(&phi)?;
                for norm in Lp::ALL {
                    worst = worst.max(lp_norm(&a, &x, norm)? - lp_norm(&b, &x, norm)?);
                }
            }
            Ok(worst.max(0.0))
        })());

        let classes = dim(&mut rng, m);
        let (fl, assignment) = random::left_hemi_bisimilar(&mut rng, &x, m, classes);
        left.record((|| {
            let q = FiniteQuotient::from_assignment(fl.target(), assignment.clone())?;
            let g = random::kernel_with_labels(&mut rng, fl.target(), "z", r);
            compositionality_defect(&mut rng, &fl, &g, &p, &q)
        })());

        right.record((|| {
            let g = random::right_hemi_bisimilar(&mut rng, f.target(), q.assignment(), r);
            compositionality_defect(&mut rng, &f, &g, &p, &q)
        })());

        idempotent.record((|| {
            let once = internalize(&f, &p, &q)?;
            let twice = internalize(&once, &requotient(&p, once.source())?, &requotient(&q, once.target())?)?;
            ae_defect(&once, &twice)
        })());
    }
    vec![
        endo,
        inverse_coarse,
        inverse_internal,
        non_expansive,
        left,
        right,
        idempotent,
    ]
}

/// `internalize(f∘g, p, s)` against `internalize(f, p, q)∘internalize(g, q, s)`
/// for a random quotient `s` of the final space.
fn compositionality_defect(
    rng: &mut InstanceRng,
    f: &KernelMorphism,
    g: &KernelMorphism,
    p: &FiniteQuotient,
    q: &FiniteQuotient,
) -> Result<f64> {
    let fg = f.compose(g)?;
    let s = random::quotient(rng, fg.target(), g.target().len());
    let lhs = internalize(&fg, p, &s)?;
    let first = internalize(f, p, q)?;
    let second = internalize(g, &requotient(q, first.target())?, &requotient(&s, g.target())?)?;
    let rhs = first.compose(&second)?;
    ae_defect(&lhs, &rhs)
}

/// Naturality of the Radon–Nikodym derivative, the mr/rn inverse pair, change
/// of variables and the basic properties of the predicate transformer.
pub fn naturality_suite(seed: u64, cases: usize, max_dim: usize, dagger: DaggerFn) -> Vec<LawCheck> {
    const S: &str = "naturality";
    let mut square = LawCheck::new(S, "rn-square", 1e-9);
    let mut mr_rn = LawCheck::new(S, "mr-after-rn", 1e-12);
    let mut rn_mr = LawCheck::new(S, "rn-after-mr", 1e-9);
    let mut change = LawCheck::new(S, "change-of-variables", 1e-12);
    let mut transformer = LawCheck::new(S, "predicate-transformer", 1e-12);
    let mut rng = random::rng(seed);
    for _ in 0..cases {
        let (n, m) = (dim(&mut rng, max_dim), dim(&mut rng, max_dim));
        let x = if rng.random::<bool>() {
            random::space(&mut rng, n)
        } else {
            sparse_space(&mut rng, n)
        };
        let f = random::sparse_kernel(&mut rng, &x, m, 0.3);
        let rho = random::measure_vector(&mut rng, &x);

        square.record((|| {
            let lhs = rn_derivative(&f.state_transform(&rho)?, f.target())?;
            let rhs = dagger(&f).predicate_transform(&rn_derivative(&rho, &x)?.into_predicate())?;
            if rhs.len() != lhs.len() {
                return Err(Error::SpaceMismatch("density lengths differ".into()));
            }
            Ok(f.target()
                .weights()
                .iter()
                .enumerate()
                .filter(|(_, &w)| w > NULL_MASS)
                .map(|(l, _)| (lhs.values()[l] - rhs.values()[l]).abs())
                .fold(0.0, f64::max))
        })());

        mr_rn.record((|| {
            let back = mr(&rn_derivative(&rho, &x)?, &x)?;
            Ok(max_abs_diff(back.values(), rho.values()))
        })());

        rn_mr.record((|| {
            let d = DensityVector::new((0..n).map(|_| rng.random_range(0.0..4.0)).collect())?;
            let back = rn_derivative(&mr(&d, &x)?, &x)?;
            Ok((0..n)
                .filter(|&k| x.mass(k) > 0.0)
                .map(|k| (back.values()[k] - d.values()[k]).abs())
                .fold(0.0, f64::max))
        })());

        let phi = random::predicate(&mut rng, m);
        change.record(f.change_of_variables_check(&phi).map(|(a, b)| (a - b).abs()));

        transformer.record((|| {
            let psi = random::predicate(&mut rng, m);
            let (a, b) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let combo = Predicate::new(
                phi.values()
                    .iter()
                    .zip(psi.values())
                    .map(|(u, v)| a * u + b * v)
                    .collect(),
            )?;
            let lhs = f.predicate_transform(&combo)?;
            let fp = f.predicate_transform(&phi)?;
            let fq = f.predicate_transform(&psi)?;
            let expected: Vec<f64> = fp.values().iter().zip(fq.values()).map(|(u, v)| a * u + b * v).collect();
            let mut worst = max_abs_diff(lhs.values(), &expected);
            let one = f.predicate_transform(&Predicate::constant(m, 1.0))?;
            worst = worst.max(one.values().iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max));
            let positive = Predicate::new(phi.values().iter().map(|v| v.abs()).collect())?;
            let image = f.predicate_transform(&positive)?;
            worst = worst.max(image.values().iter().map(|v| (-v).max(0.0)).fold(0.0, f64::max));
            Ok(worst)
        })());
    }
    vec![square, mr_rn, rn_mr, change, transformer]
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Printing and re-parsing, normalization of one-step distributions, and for
/// `prefix ; (body)*` normalization of the union distribution and agreement
/// of the membership probabilities with the hitting-probability solve.
pub fn netkat_suite(seed: u64, cases: usize) -> Vec<LawCheck> {
    const S: &str = "netkat";
    let mut roundtrip = LawCheck::new(S, "print-parse-roundtrip", 0.0);
    let mut step = LawCheck::new(S, "step-normalized", 1e-12);
    let mut star = LawCheck::new(S, "star-normalized", 1e-9);
    let mut hitting = LawCheck::new(S, "member-equals-hitting", 1e-9);
    let mut rng = random::rng(seed);
    for _ in 0..cases {
        let level = rng.random_range(1..=3);
        let prefix = random::program(&mut rng, 2);
        let body = random::program(&mut rng, 3);
        let input = random::packet_set(&mut rng, level);

        let whole = Program::seq(prefix.clone(), Program::star(body.clone()));
        roundtrip.record(parse_program(&whole.to_string()).map(|p| if p == whole { 0.0 } else { 1.0 }));

        step.record(step_distribution(&body, &input, level).map(|d| (d.values().sum::<f64>() - 1.0).abs()));

        match evaluate(&whole, &input, level, StarBudgets::default()) {
            Ok(result) => {
                star.record(Ok((result.total_probability() - 1.0).abs()));
                let len = rng.random_range(1..=level);
                let bits: Vec<u8> = (0..len).map(|_| rng.random_range(0..2)).collect();
                let h = History::new(&bits).expect("valid length");
                hitting.record(prob_member_hitting(&result, &h).map(|v| (v - prob_member(&result, &h)).abs()));
            }
            Err(Error::PairBudgetExceeded { .. } | Error::StateBudgetExceeded { .. }) => {}
            Err(e) => star.record(Err(e)),
        }
    }
    vec![roundtrip, step, star, hitting]
}

/// All four suites with the given dagger.
pub fn all_suites(seed: u64, cases: usize, dagger: DaggerFn) -> Vec<LawCheck> {
    let mut out = dagger_suite(seed, cases, 8, dagger);
    out.extend(approximation_suite(seed.wrapping_add(1), cases, 8, dagger));
    out.extend(naturality_suite(seed.wrapping_add(2), cases, 8, dagger));
    out.extend(netkat_suite(seed.wrapping_add(3), cases));
    out
}
