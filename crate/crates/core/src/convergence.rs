//! Empirical checks of strong-operator-topology convergence of discretized
//! kernels towards their continuous originals.

use std::fmt::Write as _;
use std::time::Instant;

use nalgebra::DMatrix;

use crate::discretize::{cell_masses, check_tail_mass, discretize_kernel, Partition1D, RefinementChain};
use crate::error::{Error, Result};
use crate::measure::{KernelMorphism, Predicate};
use crate::models::{KernelModel1D, Measure1D};
use crate::quadrature::QuadratureConfig;

/// `Σ_k μ(k)·|Σ_l (f(k)(l) − g(k)(l))·φ(l)|`, the L¹(μ) distance between the
/// images of φ.
pub fn sot_gap(f: &KernelMorphism, g: &KernelMorphism, phi: &Predicate) -> Result<f64> {
    f.ensure_comparable(g)?;
    let a = f.predicate_transform(phi)?;
    let b = g.predicate_transform(phi)?;
    Ok(f.source()
        .weights()
        .iter()
        .zip(a.values().iter().zip(b.values()))
        .map(|(w, (x, y))| w * (x - y).abs())
        .sum())
}

/// Per-row total variation: maximum over rows of positive mass, and the
/// mass-weighted mean.
pub fn tv_pointwise(f: &KernelMorphism, g: &KernelMorphism) -> Result<(f64, f64)> {
    f.ensure_comparable(g)?;
    Ok(row_tv(f.matrix(), g.matrix(), f.source().weights()))
}

fn row_tv(a: &DMatrix<f64>, b: &DMatrix<f64>, weights: &[f64]) -> (f64, f64) {
    let mut max: f64 = 0.0;
    let mut mean = 0.0;
    for (k, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        let tv = 0.5 * (0..a.ncols()).map(|l| (a[(k, l)] - b[(k, l)]).abs()).sum::<f64>();
        max = max.max(tv);
        mean += w * tv;
    }
    (max, mean)
}

/// Mass of `(a, b]` under the image of `prior` through `kernel`, in closed
/// form when available and by quadrature otherwise.
fn output_mass(kernel: &KernelModel1D, prior: &Measure1D, a: f64, b: f64, q: &QuadratureConfig) -> f64 {
    if let Some(nu) = kernel.pushforward(prior) {
        return nu.interval_mass(a, b);
    }
    let rule = q.rule();
    let (lo, hi) = integration_window(prior, q);
    q.panels(lo, hi)
        .map(|(pa, pb)| rule.integrate(pa, pb, |x| prior.pdf(x) * kernel.at(x).interval_mass(a, b)))
        .sum()
}

fn integration_window(prior: &Measure1D, q: &QuadratureConfig) -> (f64, f64) {
    let (lo, hi) = prior.support();
    (lo.max(-q.tail_cutoff), hi.min(q.tail_cutoff))
}

/// For every source cell, the probability the internalized step kernel gives
/// to `(a, b]`: output cells are spread back out according to the continuous
/// output marginal.
fn step_values(
    kernel: &KernelModel1D,
    prior: &Measure1D,
    approx: &KernelMorphism,
    partition: &Partition1D,
    (a, b): (f64, f64),
    q: &QuadratureConfig,
) -> Vec<f64> {
    let fractions: Vec<f64> = (0..partition.cell_count())
        .map(|l| {
            let (cl, cr) = partition.cell_bounds(l);
            let cell = output_mass(kernel, prior, cl, cr, q);
            if cell > 0.0 {
                output_mass(kernel, prior, cl.max(a), cr.min(b), q) / cell
            } else {
                let rep = partition.representative(l);
                if rep > a && rep <= b {
                    1.0
                } else {
                    0.0
                }
            }
        })
        .collect();
    (0..approx.source().len())
        .map(|k| (0..fractions.len()).map(|l| approx.entry(k, l) * fractions[l]).sum())
        .collect()
}

/// Cuts of the prior's integration window at the partition's breakpoints.
fn window_cuts(prior: &Measure1D, partition: &Partition1D, q: &QuadratureConfig) -> Vec<f64> {
    let (lo, hi) = integration_window(prior, q);
    let mut cuts = vec![lo];
    cuts.extend(partition.breakpoints().iter().copied().filter(|&b| b > lo && b < hi));
    cuts.push(hi);
    cuts
}

/// Quadrature nodes over the window split at the breakpoints:
/// `(x, prior-weighted weight)`.
fn prior_nodes(prior: &Measure1D, partition: &Partition1D, q: &QuadratureConfig) -> Vec<(f64, f64)> {
    let rule = q.rule();
    let mut nodes = Vec::new();
    for w in window_cuts(prior, partition, q).windows(2) {
        for (a, b) in q.panels(w[0], w[1]) {
            nodes.extend(rule.mapped(a, b).map(|(x, wt)| (x, wt * prior.pdf(x))));
        }
    }
    nodes
}

/// Sign changes of `g` on `[a, b]`, located by bisection on a uniform scan.
fn sign_changes(g: &impl Fn(f64) -> f64, a: f64, b: f64, scan: usize) -> Vec<f64> {
    let mut roots = Vec::new();
    let mut x0 = a;
    let mut g0 = g(a);
    for i in 1..=scan {
        let x1 = a + (b - a) * i as f64 / scan as f64;
        let g1 = g(x1);
        if g0 * g1 < 0.0 {
            let (mut l, mut r, mut gl) = (x0, x1, g0);
            for _ in 0..60 {
                let m = 0.5 * (l + r);
                let gm = g(m);
                if gm * gl <= 0.0 {
                    r = m;
                } else {
                    l = m;
                    gl = gm;
                }
            }
            roots.push(0.5 * (l + r));
        }
        x0 = x1;
        g0 = g1;
    }
    roots
}

fn check_shapes(approx: &KernelMorphism, partition: &Partition1D) -> Result<()> {
    let n = partition.cell_count();
    if approx.source().len() != n || approx.target().len() != n {
        return Err(Error::SpaceMismatch(format!(
            "approximant is {}x{} but the partition has {n} cells",
            approx.source().len(),
            approx.target().len()
        )));
    }
    Ok(())
}

/// `∫ |K(x)((a,b]) − f^n(x)((a,b])| dμ(x)` where `f^n` is the step kernel
/// obtained by internalizing `approx` along `partition`.
pub fn sot_gap_analytic(
    kernel: &KernelModel1D,
    prior: &Measure1D,
    approx: &KernelMorphism,
    partition: &Partition1D,
    interval: (f64, f64),
    q: &QuadratureConfig,
) -> Result<f64> {
    q.validate()?;
    check_tail_mass(prior, q)?;
    check_shapes(approx, partition)?;
    let (a, b) = interval;
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::InvalidArgument(format!("interval ({a}, {b}] must be finite with a <= b")));
    }
    if a == b {
        return Ok(0.0);
    }
    let step = step_values(kernel, prior, approx, partition, interval, q);
    let rule = q.rule();
    let mut total = 0.0;
    for cell in window_cuts(prior, partition, q).windows(2) {
        let c = step[partition.cell_of(0.5 * (cell[0] + cell[1]))];
        let g = |x: f64| kernel.at(x).interval_mass(a, b) - c;
        for (pa, pb) in q.panels(cell[0], cell[1]) {
            // the integrand has a kink wherever g changes sign
            let mut pieces = vec![pa];
            pieces.extend(sign_changes(&g, pa, pb, 8));
            pieces.push(pb);
            for w in pieces.windows(2) {
                total += rule.integrate(w[0], w[1], |x| prior.pdf(x) * g(x).abs());
            }
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub scheme: String,
    pub cells: usize,
    pub interval: String,
    pub sot_gap: f64,
    pub tv_max: Option<f64>,
    pub tv_mean: Option<f64>,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub const CSV_HEADER: &'static str = "scheme,cells,interval,sot_gap,tv_max,tv_mean,runtime_ms";

    /// Gaps for one test interval (or rectangle), in chain order.
    pub fn gaps_for(&self, interval: &str) -> Vec<f64> {
        self.rows.iter().filter(|r| r.interval == interval).map(|r| r.sot_gap).collect()
    }

    /// CSV rendering; timings are left empty unless `with_timing` is set so
    /// that output is reproducible.
    pub fn to_csv(&self, with_timing: bool) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.17e}")).unwrap_or_default();
        for r in &self.rows {
            let runtime = if with_timing { format!("{:.3}", r.runtime_ms) } else { String::new() };
            let _ = writeln!(
                out,
                "{},{},\"{}\",{:.17e},{},{},{}",
                r.scheme,
                r.cells,
                r.interval,
                r.sot_gap,
                opt(r.tv_max),
                opt(r.tv_mean),
                runtime
            );
        }
        out
    }
}

pub fn interval_label((a, b): (f64, f64)) -> String {
    format!("({a},{b}]")
}

/// The kernel evaluated at each cell's representative point, read off on the
/// same partition.
fn pointwise_matrix(kernel: &KernelModel1D, partition: &Partition1D) -> DMatrix<f64> {
    let n = partition.cell_count();
    let mut m = DMatrix::zeros(n, n);
    for k in 0..n {
        for (l, v) in cell_masses(&kernel.at(partition.representative(k)), partition)
            .into_iter()
            .enumerate()
        {
            m[(k, l)] = v;
        }
    }
    m
}

/// Discretizes the kernel on every partition of the chain and measures the
/// analytic SOT gap for each test interval.
pub fn refinement_sweep(
    kernel: &KernelModel1D,
    prior: &Measure1D,
    chain: &RefinementChain,
    intervals: &[(f64, f64)],
    q: &QuadratureConfig,
) -> Result<ConvergenceReport> {
    let mut report = ConvergenceReport::default();
    for (partition, name) in chain.partitions().iter().zip(chain.names()) {
        let start = Instant::now();
        let approx = discretize_kernel(kernel, prior, partition, partition, q)?;
        let (tv_max, tv_mean) = row_tv(
            approx.matrix(),
            &pointwise_matrix(kernel, partition),
            approx.source().weights(),
        );
        let build_ms = start.elapsed().as_secs_f64() * 1e3;
        for &interval in intervals {
            let t = Instant::now();
            let gap = sot_gap_analytic(kernel, prior, &approx, partition, interval, q)?;
            report.rows.push(ConvergenceRow {
                scheme: name.clone(),
                cells: partition.cell_count(),
                interval: interval_label(interval),
                sot_gap: gap,
                tv_max: Some(tv_max),
                tv_mean: Some(tv_mean),
                runtime_ms: build_ms + t.elapsed().as_secs_f64() * 1e3,
            });
        }
    }
    Ok(report)
}

/// One factor of a product kernel, as quadrature nodes carrying
/// `(weight, exact probability, step-kernel probability)`.
fn factor_nodes(
    kernel: &KernelModel1D,
    prior: &Measure1D,
    partition: &Partition1D,
    interval: (f64, f64),
    q: &QuadratureConfig,
) -> Result<Vec<(f64, f64, f64)>> {
    let approx = discretize_kernel(kernel, prior, partition, partition, q)?;
    let step = step_values(kernel, prior, &approx, partition, interval, q);
    Ok(prior_nodes(prior, partition, q)
        .into_iter()
        .map(|(x, w)| {
            (
                w,
                kernel.at(x).interval_mass(interval.0, interval.1),
                step[partition.cell_of(x)],
            )
        })
        .collect())
}

/// SOT gap of `f^n ⊗ g^n` against the continuous product kernel for the
/// indicator of a rectangle `(a,b] × (c,d]`.
#[allow(clippy::too_many_arguments)]
pub fn tensor_convergence_check(
    kernel_f: &KernelModel1D,
    kernel_g: &KernelModel1D,
    prior_f: &Measure1D,
    prior_g: &Measure1D,
    chain: &RefinementChain,
    rectangle: ((f64, f64), (f64, f64)),
    q: &QuadratureConfig,
) -> Result<ConvergenceReport> {
    q.validate()?;
    check_tail_mass(prior_f, q)?;
    check_tail_mass(prior_g, q)?;
    let (first, second) = rectangle;
    let label = format!("{}x{}", interval_label(first), interval_label(second));
    let mut report = ConvergenceReport::default();
    for (partition, name) in chain.partitions().iter().zip(chain.names()) {
        let start = Instant::now();
        let xs = factor_nodes(kernel_f, prior_f, partition, first, q)?;
        let ys = factor_nodes(kernel_g, prior_g, partition, second, q)?;
        let gap: f64 = xs
            .iter()
            .map(|&(wx, ex, sx)| {
                wx * ys
                    .iter()
                    .map(|&(wy, ey, sy)| wy * (ex * ey - sx * sy).abs())
                    .sum::<f64>()
            })
            .sum();
        report.rows.push(ConvergenceRow {
            scheme: name.clone(),
            cells: partition.cell_count(),
            interval: label.clone(),
            sot_gap: gap,
            tv_max: None,
            tv_mean: None,
            runtime_ms: start.elapsed().as_secs_f64() * 1e3,
        });
    }
    Ok(report)
}
