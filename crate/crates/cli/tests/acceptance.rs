//! Acceptance criteria, one PASS/FAIL line each. Run with
//! `cargo test -p krn-cli --test acceptance`.
//!
//! The process exits non-zero if any criterion fails, except for those listed
//! in `KNOWN_FAILURES`, which are still reported as FAIL.

use std::path::PathBuf;
use std::time::Instant;

use rand::Rng;

use krn_cli::bayes::{posterior_report, BayesArgs, Format, Query};
use krn_core::convergence::{refinement_sweep, tensor_convergence_check};
use krn_core::discretize::{discretize_kernel, window_scheme, RefinementChain};
use krn_core::laws::{approx_endo_defect, approximation_suite, bayes_dagger, dagger_suite, naturality_suite, LawCheck};
use krn_core::measure::{kernels_equal_ae, KernelMorphism, MeasuredSpace};
use krn_core::models::{gaussian_kernel, normal, Measure1D};
use krn_core::netkat::{
    build_chain_from, evaluate, monte_carlo_star, parse_program, prob_member, prob_member_hitting, prob_superset,
    History, PacketSet, StarBudgets,
};
use krn_core::quadrature::QuadratureConfig;
use krn_core::random;

const SEED: u64 = 20_240_601;

/// Criteria that cannot hold as stated; see the README.
const KNOWN_FAILURES: &[u32] = &[3];

struct Verdict {
    id: u32,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn law<'a>(checks: &'a [LawCheck], name: &str) -> &'a LawCheck {
    checks.iter().find(|c| c.law == name).expect("law present")
}

fn within(c: &LawCheck, tol: f64) -> bool {
    c.cases > 0 && c.max_defect <= tol
}

fn bayes(m: u32, n: u32) -> BayesArgs {
    BayesArgs {
        m,
        n,
        prior: normal(0.0, 1.0).unwrap(),
        likelihood_var: 1.0,
        obs: 0.5,
        queries: vec![Query::GreaterThan(1.0)],
        format: Format::Json,
        quad_nodes: 16,
        exact: true,
        emit_plot: None::<PathBuf>,
    }
}

fn gaussian_posterior() -> Verdict {
    let start = Instant::now();
    let fine = posterior_report(&bayes(7, 5)).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let coarse = posterior_report(&bayes(3, 2)).unwrap();
    let (f, c) = (fine.exact.unwrap(), coarse.exact.unwrap());
    let pass = f.mean_deviation <= 0.02
        && f.variance_deviation <= 0.02
        && f.density_sup_deviation <= 0.02
        && elapsed < 1.0
        && c.density_sup_deviation > f.density_sup_deviation;
    Verdict {
        id: 1,
        title: "gaussian posterior",
        pass,
        detail: format!(
            "mean {:.5} (dev {:.1e}), variance {:.5} (dev {:.1e}), density dev {:.1e} vs coarse {:.1e}, {:.0} ms",
            fine.summary.mean,
            f.mean_deviation,
            fine.summary.variance,
            f.variance_deviation,
            f.density_sup_deviation,
            c.density_sup_deviation,
            elapsed * 1e3
        ),
    }
}

fn dagger_algebra() -> Verdict {
    let start = Instant::now();
    let checks = dagger_suite(SEED, 500, 8, bayes_dagger);
    let elapsed = start.elapsed().as_secs_f64();
    let names = ["involution", "identity", "contravariance", "tensor-exchange", "adjointness"];
    let pass = names.iter().all(|n| within(law(&checks, n), 1e-9)) && elapsed < 10.0;
    let worst = names.iter().map(|n| law(&checks, n).max_defect).fold(0.0, f64::max);
    Verdict {
        id: 2,
        title: "dagger algebra",
        pass,
        detail: format!("500 kernels up to 8x8, worst defect {worst:.1e}, {:.0} ms", elapsed * 1e3),
    }
}

fn approximation_laws() -> Verdict {
    // the endo identity on unrestricted random instances
    let mut rng = random::rng(SEED);
    let (mut worst, mut broken, cases) = (0.0f64, 0usize, 500usize);
    for _ in 0..cases {
        let n = rng_dim(&mut rng, 8);
        let x = random::space(&mut rng, n);
        let f = random::kernel(&mut rng, &x, n);
        let f = KernelMorphism::new(x.clone(), x.labels().to_vec(), f.matrix().clone()).unwrap();
        let p = random::quotient(&mut rng, &x, n);
        let d = approx_endo_defect(&f, &p).unwrap();
        worst = worst.max(d);
        broken += usize::from(d > 1e-12);
    }
    let checks = approximation_suite(SEED, 500, 8, bayes_dagger);
    let inverse = within(law(&checks, "bayes-inverse-commutes-coarse"), 1e-9)
        && within(law(&checks, "bayes-inverse-commutes-internal"), 1e-9);
    let non_expansive = within(law(&checks, "non-expansive"), 1e-12);
    let compositional = within(law(&checks, "compositional-left-hemi"), 1e-9)
        && within(law(&checks, "compositional-right-hemi"), 1e-9);
    let hemi_endo = law(&checks, "endo-identity-on-hemi-bisimilar");
    Verdict {
        id: 3,
        title: "approximation laws",
        pass: worst <= 1e-12 && inverse && non_expansive && compositional,
        detail: format!(
            "endo identity off on {broken}/{cases} instances (max {worst:.2e}; on hemi-bisimilar kernels max {:.1e}); \
             inversion commutes {}, non-expansive {}, compositional {}",
            hemi_endo.max_defect,
            ok(inverse),
            ok(non_expansive),
            ok(compositional)
        ),
    }
}

fn rng_dim(rng: &mut random::InstanceRng, max: usize) -> usize {
    rng.random_range(1..=max)
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAILED"
    }
}

fn naturality() -> Verdict {
    let checks = naturality_suite(SEED, 500, 8, bayes_dagger);
    let names = ["rn-square", "mr-after-rn", "rn-after-mr"];
    let pass = names.iter().all(|n| within(law(&checks, n), 1e-9));
    let worst = names.iter().map(|n| law(&checks, n).max_defect).fold(0.0, f64::max);
    Verdict {
        id: 4,
        title: "naturality",
        pass,
        detail: format!("500 instances with null cells, worst defect {worst:.1e}"),
    }
}

fn change_of_variables() -> Verdict {
    let checks = naturality_suite(SEED.wrapping_add(1), 1000, 8, bayes_dagger);
    let c = law(&checks, "change-of-variables");
    Verdict {
        id: 5,
        title: "change of variables",
        pass: within(c, 1e-12),
        detail: format!("{} instances, max defect {:.1e}", c.cases, c.max_defect),
    }
}

fn sot_convergence() -> Verdict {
    let start = Instant::now();
    let k = gaussian_kernel(1.0).unwrap();
    let prior = normal(0.0, 1.0).unwrap();
    let chain = RefinementChain::windows(7, &[1, 2, 4, 8, 16]).unwrap();
    let q = QuadratureConfig::default();
    let sweep = refinement_sweep(&k, &prior, &chain, &[(0.0, 1.0)], &q).unwrap();
    let gaps = sweep.gaps_for("(0,1]");
    let tensor = tensor_convergence_check(&k, &k, &prior, &prior, &chain, ((0.0, 1.0), (0.0, 1.0)), &q).unwrap();
    let tgaps: Vec<f64> = tensor.rows.iter().map(|r| r.sot_gap).collect();
    let elapsed = start.elapsed().as_secs_f64();
    let (first, last, tlast) = (gaps[0], gaps[gaps.len() - 1], tgaps[tgaps.len() - 1]);
    Verdict {
        id: 6,
        title: "SOT convergence",
        pass: last < first && last <= 0.01 && tlast <= 2e-3 && elapsed < 30.0,
        detail: format!(
            "gaps {}; rectangle gap {:.2e} -> {:.2e}; {:.0} ms",
            gaps.iter().map(|g| format!("{g:.2e}")).collect::<Vec<_>>().join(" "),
            tgaps[0],
            tlast,
            elapsed * 1e3
        ),
    }
}

fn cantor() -> Verdict {
    let start = Instant::now();
    let program = parse_program("(p0! +[0.5] p1!) ; ((dup ; (p0! +[0.5] p1!)))*").unwrap();
    let input = PacketSet::singleton("(0)".parse().unwrap());
    let h = |s: &str| s.parse::<History>().unwrap();
    let r = evaluate(&program, &input, 3, StarBudgets::default()).unwrap();
    let all3: PacketSet = History::all_of_length(3).into_iter().collect();
    let mut fails = Vec::new();
    for (q, expected) in [("(1)", 0.5), ("(1,0)", 0.25), ("(0,1)", 0.25)] {
        let p = prob_member(&r, &h(q));
        if (p - expected).abs() > 1e-9 {
            fails.push(format!("member {q} = {p}"));
        }
        if (prob_member_hitting(&r, &h(q)).unwrap() - p).abs() > 1e-9 {
            fails.push(format!("hitting solve disagrees on {q}"));
        }
    }
    if (prob_superset(&r, &all3) - 1.0).abs() > 1e-9 {
        fails.push("superset of length-3 histories".into());
    }
    if !r.union_support.iter().all(|(u, _)| u.is_superset(&all3)) {
        fails.push("an atom misses a length-3 history".into());
    }

    // stationarity of the uniform law on the closed class
    let body = parse_program("dup ; (p0! +[0.5] p1!)").unwrap();
    let starts: Vec<PacketSet> = r.initial.keys().cloned().collect();
    let chain = build_chain_from(&body, &starts, 3, 1000).unwrap();
    let class = &chain.bottom_classes()[0];
    let u = 1.0 / class.len() as f64;
    let stationary = class.iter().all(|&j| {
        let inflow: f64 = class.iter().map(|&i| u * chain.probability(i, j)).sum();
        (inflow - u).abs() <= 1e-12
    }) && class.iter().all(|&i| {
        let out: f64 = class.iter().map(|&j| chain.probability(i, j)).sum();
        (out - 1.0).abs() <= 1e-12
    });
    if !stationary || class.len() != 8 {
        fails.push("uniform law not stationary on an 8-state class".into());
    }

    let mc = monte_carlo_star(&body, &r.initial, 3, 100_000, 50, 42).unwrap();
    let mut mc_worst: f64 = 0.0;
    for q in ["(1)", "(1,0)", "(0,1)"] {
        mc_worst = mc_worst.max((prob_member(&mc, &h(q)) - prob_member(&r, &h(q))).abs());
    }
    mc_worst = mc_worst.max((prob_superset(&mc, &all3) - 1.0).abs());
    if mc_worst > 0.01 {
        fails.push(format!("Monte Carlo off by {mc_worst}"));
    }

    let short: Vec<History> = (1..=2).flat_map(History::all_of_length).collect();
    let answers = |level: usize| -> Vec<f64> {
        let r = evaluate(&program, &input, level, StarBudgets::default()).unwrap();
        short.iter().map(|x| prob_member(&r, x)).collect()
    };
    let base = answers(3);
    if answers(4) != base || answers(5) != base {
        fails.push("short-history answers change with the level".into());
    }
    let elapsed = start.elapsed().as_secs_f64();
    if elapsed >= 10.0 {
        fails.push(format!("took {elapsed:.1} s"));
    }
    Verdict {
        id: 7,
        title: "cantor star",
        pass: fails.is_empty(),
        detail: if fails.is_empty() {
            format!(
                "0.5/0.25/0.25, superset 1, {} atoms, MC dev {mc_worst:.1e}, levels 3-5 agree, {:.0} ms",
                r.union_support.len(),
                elapsed * 1e3
            )
        } else {
            fails.join("; ")
        },
    }
}

fn robustness() -> Verdict {
    let mut rng = random::rng(SEED);
    let mut involution = true;
    for _ in 0..500 {
        let n = rng_dim(&mut rng, 8);
        let m = rng_dim(&mut rng, 8);
        let x = MeasuredSpace::from_weights(random::sparse_probability_vector(&mut rng, n, 0.4)).unwrap();
        let f = random::sparse_kernel(&mut rng, &x, m, 0.5);
        involution &= kernels_equal_ae(&f.dagger().dagger(), &f, 1e-9).unwrap();
    }
    let prior = Measure1D::uniform(0.0, 1.0).unwrap();
    let p = window_scheme(2, 2).unwrap();
    let f = discretize_kernel(&gaussian_kernel(0.5).unwrap(), &prior, &p, &p, &QuadratureConfig::default()).unwrap();
    let null_cells = f.source().weights().iter().filter(|&&w| w == 0.0).count();
    let stochastic = f.stochasticity_defect() <= 1e-12 && f.matrix().iter().all(|&v| v >= 0.0);
    Verdict {
        id: 8,
        title: "robustness",
        pass: involution && stochastic && null_cells > 0,
        detail: format!(
            "a.e. involution on 500 kernels with null cells {}, discretization with {null_cells} null prior cells stochastic {}",
            ok(involution),
            ok(stochastic)
        ),
    }
}

fn main() {
    let verdicts = [
        gaussian_posterior(),
        dagger_algebra(),
        approximation_laws(),
        naturality(),
        change_of_variables(),
        sot_convergence(),
        cantor(),
        robustness(),
    ];
    let mut unexpected = 0;
    for v in &verdicts {
        println!("{} {} {}: {}", if v.pass { "PASS" } else { "FAIL" }, v.id, v.title, v.detail);
        if !v.pass && !KNOWN_FAILURES.contains(&v.id) {
            unexpected += 1;
        }
    }
    let passed = verdicts.iter().filter(|v| v.pass).count();
    println!("{passed}/{} criteria passed", verdicts.len());
    if unexpected > 0 {
        std::process::exit(1);
    }
}
