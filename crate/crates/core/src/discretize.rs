//! Discretization schemes on the real line and fibre-averaging approximation
//! of continuous and finite kernels.
//!
//! A [`Partition1D`] is a deterministic quotient ℝ → {0, …, K}; a
//! [`FiniteQuotient`] is its analogue between finite spaces. Approximating a
//! kernel means averaging it over the fibres of such quotients: conditioning
//! on the source cell (w.r.t. μ) and coarsening on the target side, then, for
//! the internalized form, spreading each target cell back out according to ν.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::measure::{KernelMorphism, MeasuredSpace, DIVISION_TOL};
use crate::models::{KernelModel1D, Measure1D};
use crate::quadrature::QuadratureConfig;

/// An interval partition of ℝ with right-closed cells
/// `(-∞, b_0], (b_0, b_1], …, (b_{K-1}, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition1D {
    breakpoints: Vec<f64>,
}

impl Partition1D {
    pub fn new(breakpoints: Vec<f64>) -> Result<Self> {
        if let Some(i) = breakpoints.iter().position(|b| !b.is_finite()) {
            return Err(Error::InvalidArgument(format!("breakpoint {i} is not finite")));
        }
        if let Some(i) = breakpoints.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!(
                "breakpoints must be strictly increasing: b[{i}] = {} >= b[{}] = {}",
                breakpoints[i],
                i + 1,
                breakpoints[i + 1]
            )));
        }
        Ok(Self { breakpoints })
    }

    /// Parses the JSON array form `[b_0, b_1, …]`.
    pub fn from_json(text: &str) -> Result<Self> {
        let breakpoints: Vec<f64> = serde_json::from_str(text).map_err(|e| {
            Error::InvalidArgument(format!("partition JSON, line {} column {}: {e}", e.line(), e.column()))
        })?;
        Self::new(breakpoints)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.breakpoints).expect("finite floats serialize")
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn cell_count(&self) -> usize {
        self.breakpoints.len() + 1
    }

    /// Bounds `(left, right)` of a cell; the outer cells have infinite ends.
    pub fn cell_bounds(&self, cell: usize) -> (f64, f64) {
        let left = if cell == 0 {
            f64::NEG_INFINITY
        } else {
            self.breakpoints[cell - 1]
        };
        let right = self.breakpoints.get(cell).copied().unwrap_or(f64::INFINITY);
        (left, right)
    }

    pub fn cell_of(&self, x: f64) -> usize {
        self.breakpoints.partition_point(|&b| b < x)
    }

    /// Midpoint of a bounded cell, or the adjacent breakpoint of an outer one.
    pub fn representative(&self, cell: usize) -> f64 {
        match self.cell_bounds(cell) {
            (l, r) if l.is_finite() && r.is_finite() => 0.5 * (l + r),
            (l, _) if l.is_finite() => l,
            (_, r) if r.is_finite() => r,
            _ => 0.0,
        }
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.cell_count())
            .map(|c| match self.cell_bounds(c) {
                (l, r) if l.is_infinite() && r.is_infinite() => "(-inf,+inf)".to_string(),
                (l, r) if l.is_infinite() => format!("(-inf,{r}]"),
                (l, r) if r.is_infinite() => format!("({l},+inf)"),
                (l, r) => format!("({l},{r}]"),
            })
            .collect()
    }

    /// True when every breakpoint of `self` is also a breakpoint of `finer`.
    pub fn is_refined_by(&self, finer: &Partition1D) -> bool {
        self.breakpoints.iter().all(|&b| {
            let i = finer.breakpoints.partition_point(|&x| x < b);
            [i.checked_sub(1), Some(i)]
                .into_iter()
                .flatten()
                .filter_map(|j| finer.breakpoints.get(j))
                .any(|&x| (x - b).abs() <= 1e-12 * b.abs().max(1.0))
        })
    }
}

/// The window scheme: `[-m, m]` cut into `2mn` equal intervals plus the two
/// unbounded tails, `2mn + 2` cells in total.
pub fn window_scheme(m: u32, n: u32) -> Result<Partition1D> {
    if m < 1 || n < 1 {
        return Err(Error::InvalidArgument(format!(
            "window scheme needs m, n >= 1, got m = {m}, n = {n}"
        )));
    }
    let (m, n) = (i64::from(m), i64::from(n));
    let breakpoints = (0..=2 * m * n).map(|i| (i - m * n) as f64 / n as f64).collect();
    Partition1D::new(breakpoints)
}

pub fn cell_of(x: f64, partition: &Partition1D) -> usize {
    partition.cell_of(x)
}

/// A filtration of partitions: each one refines its predecessors.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementChain {
    partitions: Vec<Partition1D>,
    names: Vec<String>,
}

impl RefinementChain {
    pub fn new(partitions: Vec<Partition1D>) -> Result<Self> {
        if partitions.is_empty() {
            return Err(Error::InvalidArgument("a refinement chain needs at least one partition".into()));
        }
        if let Some(i) = partitions.windows(2).position(|w| !w[0].is_refined_by(&w[1])) {
            return Err(Error::InvalidArgument(format!(
                "partition {} does not refine partition {i}",
                i + 1
            )));
        }
        let names = (0..partitions.len()).map(|i| format!("partition:{i}")).collect();
        Ok(Self { partitions, names })
    }

    /// Window schemes with a common half-width at increasing resolutions.
    pub fn windows(m: u32, levels: &[u32]) -> Result<Self> {
        let mut chain = Self::new(levels.iter().map(|&n| window_scheme(m, n)).collect::<Result<_>>()?)?;
        chain.names = levels.iter().map(|n| format!("window:{m}:{n}")).collect();
        Ok(chain)
    }

    pub fn partitions(&self) -> &[Partition1D] {
        &self.partitions
    }

    /// Human-readable descriptor of each partition, e.g. `window:7:16`.
    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// Masses of every cell of `partition` under `measure`.
///
/// Each breakpoint is evaluated once, through the CDF left of the median and
/// through the survival function right of it, so far-tail cells keep their
/// relative precision.
pub fn cell_masses(measure: &Measure1D, partition: &Partition1D) -> Vec<f64> {
    let split = measure.median();
    let tails: Vec<f64> = partition
        .breakpoints
        .iter()
        .map(|&b| if b <= split { measure.cdf(b) } else { measure.sf(b) })
        .collect();
    let bps = &partition.breakpoints;
    let k = bps.len();
    if k == 0 {
        return vec![1.0];
    }
    let mut out = Vec::with_capacity(k + 1);
    out.push(if bps[0] <= split { tails[0] } else { 1.0 - tails[0] });
    for l in 1..k {
        let (a, b) = (bps[l - 1], bps[l]);
        let v = if b <= split {
            tails[l] - tails[l - 1]
        } else if a > split {
            tails[l - 1] - tails[l]
        } else {
            1.0 - tails[l - 1] - tails[l]
        };
        out.push(v.max(0.0));
    }
    out.push(if bps[k - 1] > split { tails[k - 1] } else { 1.0 - tails[k - 1] });
    out
}

/// `(E[x | cell], E[x² | cell])` under `measure` for every cell, by
/// quadrature over the cell clipped to `±tail_cutoff`. Cells of zero mass
/// report the moments of their representative point.
pub fn conditional_moments(measure: &Measure1D, partition: &Partition1D, q: &QuadratureConfig) -> Vec<(f64, f64)> {
    let rule = q.rule();
    let (support_lo, support_hi) = measure.support();
    (0..partition.cell_count())
        .map(|k| {
            let (left, right) = partition.cell_bounds(k);
            let (lo, hi) = (left.max(support_lo).max(-q.tail_cutoff), right.min(support_hi).min(q.tail_cutoff));
            let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
            if lo < hi {
                for (a, b) in q.panels(lo, hi) {
                    for (x, w) in rule.mapped(a, b) {
                        let d = w * measure.pdf(x);
                        m0 += d;
                        m1 += d * x;
                        m2 += d * x * x;
                    }
                }
            }
            if m0 > 0.0 {
                (m1 / m0, m2 / m0)
            } else {
                let x = partition.representative(k);
                (x, x * x)
            }
        })
        .collect()
}

/// Pushforward of a continuous measure along a partition.
pub fn push_measure(measure: &Measure1D, partition: &Partition1D) -> Result<MeasuredSpace> {
    MeasuredSpace::new(partition.labels(), cell_masses(measure, partition))
}

/// Discretizes `x ↦ K(x)` along `input`/`output` partitions: row `k` is the
/// prior-weighted average of `K(x)` over input cell `k`, read off on the
/// output cells.
///
/// Cells of zero prior mass evaluate the kernel at the cell's representative
/// point instead.
pub fn discretize_kernel(
    kernel: &KernelModel1D,
    prior: &Measure1D,
    input: &Partition1D,
    output: &Partition1D,
    q: &QuadratureConfig,
) -> Result<KernelMorphism> {
    q.validate()?;
    check_tail_mass(prior, q)?;
    let source = push_measure(prior, input)?;
    let rule = q.rule();
    let (support_lo, support_hi) = prior.support();
    let window_lo = support_lo.max(-q.tail_cutoff);
    let window_hi = support_hi.min(q.tail_cutoff);

    let n_out = output.cell_count();
    let mut matrix = DMatrix::zeros(input.cell_count(), n_out);
    for k in 0..input.cell_count() {
        let mass = source.mass(k);
        let (left, right) = input.cell_bounds(k);
        let (lo, hi) = (left.max(window_lo), right.min(window_hi));
        let row = if mass <= 0.0 || lo >= hi {
            cell_masses(&kernel.at(input.representative(k)), output)
        } else {
            let mut acc = vec![0.0; n_out];
            for (a, b) in q.panels(lo, hi) {
                for (x, w) in rule.mapped(a, b) {
                    let weight = w * prior.pdf(x);
                    for (slot, v) in acc.iter_mut().zip(cell_masses(&kernel.at(x), output)) {
                        *slot += weight * v;
                    }
                }
            }
            acc.iter_mut().for_each(|v| *v /= mass);
            acc
        };
        let sum: f64 = row.iter().sum();
        let deviation = (sum - 1.0).abs();
        if deviation > 1e-6 {
            return Err(Error::QuadratureFailure { row: k, sum, deviation });
        }
        for (l, v) in row.into_iter().enumerate() {
            matrix[(k, l)] = v / sum;
        }
    }
    KernelMorphism::new(source, output.labels(), matrix)
}

pub(crate) fn check_tail_mass(prior: &Measure1D, q: &QuadratureConfig) -> Result<()> {
    let mass = prior.tail_mass(q.tail_cutoff);
    if mass > q.tail_tolerance {
        return Err(Error::TailMassTooLarge {
            mass,
            cutoff: q.tail_cutoff,
            tolerance: q.tail_tolerance,
        });
    }
    Ok(())
}

/// A deterministic surjection from the cells of a finite space onto a set of
/// coarser cells.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteQuotient {
    source: MeasuredSpace,
    target_labels: Vec<String>,
    assignment: Vec<usize>,
}

impl FiniteQuotient {
    pub fn new(source: MeasuredSpace, target_labels: Vec<String>, assignment: Vec<usize>) -> Result<Self> {
        source.ensure_len(assignment.len())?;
        let mut hit = vec![false; target_labels.len()];
        for &j in &assignment {
            *hit.get_mut(j).ok_or_else(|| {
                Error::InvalidArgument(format!("assignment targets missing cell {j}"))
            })? = true;
        }
        if let Some(j) = hit.iter().position(|h| !h) {
            return Err(Error::InvalidArgument(format!("quotient cell {j} has an empty fibre")));
        }
        Ok(Self {
            source,
            target_labels,
            assignment,
        })
    }

    /// Quotient by an assignment to cells `0..K`, labelled by index.
    pub fn from_assignment(source: &MeasuredSpace, assignment: Vec<usize>) -> Result<Self> {
        let count = assignment.iter().max().map_or(0, |m| m + 1);
        Self::new(source.clone(), (0..count).map(|j| format!("q{j}")).collect(), assignment)
    }

    pub fn identity(source: &MeasuredSpace) -> Self {
        Self {
            source: source.clone(),
            target_labels: source.labels().to_vec(),
            assignment: (0..source.len()).collect(),
        }
    }

    pub fn collapse(source: &MeasuredSpace) -> Self {
        Self {
            source: source.clone(),
            target_labels: vec!["*".to_string()],
            assignment: vec![0; source.len()],
        }
    }

    pub fn source(&self) -> &MeasuredSpace {
        &self.source
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn target_len(&self) -> usize {
        self.target_labels.len()
    }

    /// The quotient map as a deterministic kernel onto the pushed-forward space.
    pub fn as_kernel(&self) -> KernelMorphism {
        KernelMorphism::deterministic(&self.source, self.target_labels.clone(), &self.assignment)
            .expect("assignment validated at construction")
    }

    /// `p†∘p`: the conditional-expectation kernel of the fibres.
    pub fn conditional_expectation(&self) -> KernelMorphism {
        let p = self.as_kernel();
        p.compose(&p.dagger()).expect("p and p† are composable")
    }
}

/// `f_{p,q} = q∘f∘p†_μ`: the kernel between the quotient spaces.
pub fn approximate_finite(f: &KernelMorphism, p: &FiniteQuotient, q: &FiniteQuotient) -> Result<KernelMorphism> {
    p.source.ensure_same(f.source(), "source quotient")?;
    q.source.ensure_same(f.target(), "target quotient")?;
    p.as_kernel().dagger().compose(f)?.compose(&q.as_kernel())
}

/// `f^{p,q} = q†_ν∘q∘f∘p†_μ∘p`: the approximation with the type of `f`.
pub fn internalize(f: &KernelMorphism, p: &FiniteQuotient, q: &FiniteQuotient) -> Result<KernelMorphism> {
    let coarse = approximate_finite(f, p, q)?;
    p.as_kernel().compose(&coarse)?.compose(&q.as_kernel().dagger())
}

/// Whether `f = q†∘q∘f`, i.e. every row of `f` has constant density relative
/// to ν on each fibre of `q`.
pub fn is_left_hemi_bisimulation(f: &KernelMorphism, q: &FiniteQuotient) -> Result<bool> {
    q.source.ensure_same(f.target(), "target quotient")?;
    let smoothed = f.compose(&q.conditional_expectation())?;
    f.equal_ae(&smoothed, DIVISION_TOL)
}

/// Whether `g = g∘q†∘q`, i.e. the rows of `g` are constant on each fibre of `q`.
pub fn is_right_hemi_bisimulation(g: &KernelMorphism, q: &FiniteQuotient) -> Result<bool> {
    q.source.ensure_same(g.source(), "source quotient")?;
    let averaged = q.conditional_expectation().compose(g)?;
    g.equal_ae(&averaged, DIVISION_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{gaussian_kernel, normal};
    use crate::quadrature::GaussLegendre;

    /// Truncated-normal moments in closed form:
    /// `E[x 1_(a,b]] = mP + v(φ(a) − φ(b))`,
    /// `E[x² 1_(a,b]] = (m² + v)P + v((a + m)φ(a) − (b + m)φ(b))`.
    #[test]
    fn conditional_moments_match_truncated_normal() {
        let (m, v) = (0.3, 1.7);
        let prior = normal(m, v).unwrap();
        let p = window_scheme(2, 3).unwrap();
        let moments = conditional_moments(&prior, &p, &QuadratureConfig::default());
        for (k, &(first, second)) in moments.iter().enumerate() {
            let (a, b) = p.cell_bounds(k);
            let phi = |t: f64| if t.is_finite() { prior.pdf(t) } else { 0.0 };
            let at = |t: f64| if t.is_finite() { (t + m) * phi(t) } else { 0.0 };
            let mass = prior.interval_mass(a, b);
            let e1 = m * mass + v * (phi(a) - phi(b));
            let e2 = (m * m + v) * mass + v * (at(a) - at(b));
            assert!((first - e1 / mass).abs() < 1e-10, "cell {k}");
            assert!((second - e2 / mass).abs() < 1e-9, "cell {k}");
        }
    }

    #[test]
    fn window_scheme_sizes() {
        let p = window_scheme(1, 1).unwrap();
        assert_eq!(p.breakpoints(), &[-1.0, 0.0, 1.0]);
        assert_eq!(p.cell_count(), 4);
        assert_eq!(window_scheme(5, 3).unwrap().cell_count(), 32);
        assert_eq!(window_scheme(7, 5).unwrap().cell_count(), 72);
        assert!(window_scheme(0, 3).is_err());
        assert!(window_scheme(3, 0).is_err());
    }

    #[test]
    fn cell_of_right_closed() {
        let p = window_scheme(1, 1).unwrap();
        assert_eq!(cell_of(-10.0, &p), 0);
        assert_eq!(cell_of(-1.0, &p), 0);
        assert_eq!(cell_of(0.0, &p), 1);
        assert_eq!(cell_of(0.5, &p), 2);
        assert_eq!(cell_of(1.0, &p), 2);
        assert_eq!(cell_of(1.0 + 1e-12, &p), 3);
    }

    #[test]
    fn partition_rejects_unsorted() {
        assert!(Partition1D::new(vec![0.0, 0.0]).is_err());
        assert!(Partition1D::from_json("[1, 0.5]").is_err());
        assert_eq!(Partition1D::from_json("[-1, 0, 2.5]").unwrap().cell_count(), 4);
    }

    #[test]
    fn labels_describe_cells() {
        assert_eq!(
            window_scheme(1, 1).unwrap().labels(),
            vec!["(-inf,-1]", "(-1,0]", "(0,1]", "(1,+inf)"]
        );
        assert_eq!(window_scheme(7, 5).unwrap().labels()[1], "(-7,-6.8]");
    }

    #[test]
    fn push_standard_normal_on_unit_window() {
        let s = push_measure(&normal(0.0, 1.0).unwrap(), &window_scheme(1, 1).unwrap()).unwrap();
        let expected = [0.158_655_253_931_457, 0.341_344_746_068_543, 0.341_344_746_068_543, 0.158_655_253_931_457];
        for (w, e) in s.weights().iter().zip(expected) {
            assert!((w - e).abs() < 1e-12);
        }
    }

    #[test]
    fn push_at_median_splits_evenly() {
        let m = normal(1.3, 2.0).unwrap();
        let s = push_measure(&m, &Partition1D::new(vec![1.3]).unwrap()).unwrap();
        assert_eq!(s.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn push_is_consistent_along_refinements() {
        let prior = normal(0.2, 1.5).unwrap();
        let chain = RefinementChain::windows(3, &[1, 2, 4]).unwrap();
        let coarse = push_measure(&prior, &chain.partitions()[0]).unwrap();
        let fine_p = &chain.partitions()[2];
        let fine = push_measure(&prior, fine_p).unwrap();
        for c in 0..coarse.len() {
            let (l, r) = chain.partitions()[0].cell_bounds(c);
            let sum: f64 = (0..fine.len())
                .filter(|&f| {
                    let (fl, fr) = fine_p.cell_bounds(f);
                    fl >= l && fr <= r
                })
                .map(|f| fine.mass(f))
                .sum();
            assert!((sum - coarse.mass(c)).abs() < 1e-15);
        }
    }

    #[test]
    fn chain_rejects_non_refinement() {
        assert!(RefinementChain::windows(2, &[2, 3]).is_err());
        assert!(RefinementChain::windows(2, &[1, 3, 6]).is_ok());
        assert!(RefinementChain::new(vec![]).is_err());
    }

    #[test]
    fn near_deterministic_kernel_is_near_identity() {
        let p = window_scheme(2, 2).unwrap();
        let k = gaussian_kernel(1e-12).unwrap();
        let f = discretize_kernel(&k, &normal(0.0, 1.0).unwrap(), &p, &p, &QuadratureConfig::default()).unwrap();
        for i in 1..p.cell_count() - 1 {
            for j in 0..p.cell_count() {
                if i != j {
                    assert!(f.entry(i, j) < 1e-6, "({i},{j}) = {}", f.entry(i, j));
                }
            }
        }
    }

    #[test]
    fn central_entry_matches_high_order_oracle() {
        let p = window_scheme(1, 1).unwrap();
        let f = discretize_kernel(
            &gaussian_kernel(1.0).unwrap(),
            &normal(0.0, 1.0).unwrap(),
            &p,
            &p,
            &QuadratureConfig::default(),
        )
        .unwrap();
        // ∫_{(-1,0]} [Φ(0-x) - Φ(-1-x)] φ(x) dx / μ((-1,0]) with an independent 64-node rule
        let std = normal(0.0, 1.0).unwrap();
        let rule = GaussLegendre::new(64);
        let num = rule.integrate(-1.0, 0.0, |x| (std.cdf(-x) - std.cdf(-1.0 - x)) * std.pdf(x));
        let den = std.cdf(0.0) - std.cdf(-1.0);
        assert!((f.entry(1, 1) - num / den).abs() < 1e-12);
    }

    #[test]
    fn prior_null_cell_uses_representative() {
        let p = window_scheme(1, 2).unwrap();
        let prior = Measure1D::uniform(0.0, 1.0).unwrap();
        let k = gaussian_kernel(1.0).unwrap();
        let f = discretize_kernel(&k, &prior, &p, &p, &QuadratureConfig::default()).unwrap();
        assert_eq!(f.source().mass(1), 0.0);
        assert!(f.stochasticity_defect() < 1e-12);
        let expected = cell_masses(&k.at(-0.75), &p);
        for (a, b) in f.row(1).iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn tail_mass_is_checked() {
        let p = window_scheme(1, 1).unwrap();
        let err = discretize_kernel(
            &gaussian_kernel(1.0).unwrap(),
            &normal(10.0, 1.0).unwrap(),
            &p,
            &p,
            &QuadratureConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::TailMassTooLarge { .. }));
    }

    fn space(w: &[f64]) -> MeasuredSpace {
        MeasuredSpace::from_weights(w.to_vec()).unwrap()
    }

    fn kernel(w: &[f64], rows: &[Vec<f64>]) -> KernelMorphism {
        KernelMorphism::from_rows(space(w), (0..rows[0].len()).map(|l| l.to_string()).collect(), rows).unwrap()
    }

    #[test]
    fn fibre_average_by_hand() {
        let rows = vec![vec![0.2, 0.8], vec![0.6, 0.4], vec![0.5, 0.5]];
        let f = kernel(&[0.25, 0.25, 0.5], &rows);
        let p = FiniteQuotient::from_assignment(f.source(), vec![0, 0, 1]).unwrap();
        let q = FiniteQuotient::identity(f.target());
        let a = approximate_finite(&f, &p, &q).unwrap();
        let merged = [(0.25 * 0.2 + 0.25 * 0.6) / 0.5, (0.25 * 0.8 + 0.25 * 0.4) / 0.5];
        assert!((a.entry(0, 0) - merged[0]).abs() < 1e-15);
        assert!((a.entry(0, 1) - merged[1]).abs() < 1e-15);
        assert_eq!(a.row(1), vec![0.5, 0.5]);
    }

    #[test]
    fn identity_and_collapse_quotients() {
        let rows = vec![vec![0.2, 0.8], vec![0.6, 0.4]];
        let f = kernel(&[0.3, 0.7], &rows);
        let idp = FiniteQuotient::identity(f.source());
        let idq = FiniteQuotient::identity(f.target());
        assert!(approximate_finite(&f, &idp, &idq).unwrap().equal_ae(&f, 1e-15).unwrap());
        assert!(internalize(&f, &idp, &idq).unwrap().equal_ae(&f, 1e-15).unwrap());

        let cp = FiniteQuotient::collapse(f.source());
        let cq = FiniteQuotient::collapse(f.target());
        let one = approximate_finite(&f, &cp, &cq).unwrap();
        assert_eq!(one.matrix().shape(), (1, 1));
        assert!((one.entry(0, 0) - 1.0).abs() < 1e-15);

        let constant = internalize(&f, &cp, &cq).unwrap();
        for k in 0..2 {
            for l in 0..2 {
                assert!((constant.entry(k, l) - f.target().mass(l)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn null_fibre_gets_target_marginal() {
        let rows = vec![vec![0.2, 0.8], vec![0.6, 0.4], vec![1.0, 0.0]];
        let f = kernel(&[0.5, 0.5, 0.0], &rows);
        let p = FiniteQuotient::from_assignment(f.source(), vec![0, 0, 1]).unwrap();
        let q = FiniteQuotient::identity(f.target());
        let a = approximate_finite(&f, &p, &q).unwrap();
        for l in 0..2 {
            assert!((a.entry(1, l) - f.target().mass(l)).abs() < 1e-15);
        }
    }

    #[test]
    fn hemi_bisimulation_examples() {
        let s = space(&[0.5, 0.5]);
        let id = KernelMorphism::identity(&s);
        let collapse = FiniteQuotient::collapse(&s);
        assert!(!is_left_hemi_bisimulation(&id, &collapse).unwrap());
        assert!(!is_right_hemi_bisimulation(&id, &collapse).unwrap());

        let rows = vec![vec![0.2, 0.8], vec![0.6, 0.4]];
        let f = kernel(&[0.3, 0.7], &rows);
        assert!(is_left_hemi_bisimulation(&f, &FiniteQuotient::identity(f.target())).unwrap());
        assert!(is_right_hemi_bisimulation(&f, &FiniteQuotient::identity(f.source())).unwrap());

        let c = KernelMorphism::constant(f.source(), f.target());
        assert!(is_left_hemi_bisimulation(&c, &FiniteQuotient::collapse(c.target())).unwrap());
        assert!(is_right_hemi_bisimulation(&c, &FiniteQuotient::collapse(c.source())).unwrap());
    }
}
