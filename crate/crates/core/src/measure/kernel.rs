use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::measure::space::normalize_weights;
use crate::measure::{FiniteMeasureVector, MeasuredSpace, Predicate};

/// Target masses at or below this are treated as null when inverting.
pub const NULL_MASS: f64 = 1e-12;

/// A Markov kernel `(X, μ) ⇸ (Y, ν)` between finite measured spaces.
///
/// Row `k` of the matrix is the distribution `f(k)` on the target cells. The
/// target weights are always computed as `ν = μ·f`, so the pushforward law
/// holds by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMorphism {
    source: MeasuredSpace,
    target: MeasuredSpace,
    matrix: DMatrix<f64>,
}

impl KernelMorphism {
    /// Builds a kernel from its source space, the target labels and a
    /// row-stochastic matrix. Rows within `1e-9` of unit mass are rescaled.
    pub fn new(source: MeasuredSpace, target_labels: Vec<String>, matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != source.len() {
            return Err(Error::IndexMismatch {
                expected: source.len(),
                actual: matrix.nrows(),
            });
        }
        if matrix.ncols() != target_labels.len() {
            return Err(Error::IndexMismatch {
                expected: target_labels.len(),
                actual: matrix.ncols(),
            });
        }
        let mut matrix = matrix;
        for k in 0..matrix.nrows() {
            let row: Vec<f64> = matrix.row(k).iter().copied().collect();
            let row = normalize_weights(row, &format!("kernel row {k}"))
                .map_err(|e| Error::InvalidKernel(e.to_string()))?;
            for (l, v) in row.into_iter().enumerate() {
                matrix[(k, l)] = v;
            }
        }
        let nu = pushforward(source.weights(), &matrix);
        let target = MeasuredSpace::new(target_labels, nu)?;
        Ok(Self {
            source,
            target,
            matrix,
        })
    }

    pub fn from_rows(source: MeasuredSpace, target_labels: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let ncols = target_labels.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
            return Err(Error::IndexMismatch {
                expected: ncols,
                actual: bad.len(),
            });
        }
        let matrix = DMatrix::from_fn(rows.len(), ncols, |k, l| rows[k][l]);
        Self::new(source, target_labels, matrix)
    }

    pub fn identity(space: &MeasuredSpace) -> Self {
        let n = space.len();
        Self {
            source: space.clone(),
            target: space.clone(),
            matrix: DMatrix::identity(n, n),
        }
    }

    /// The kernel sending every source cell to the target's weights.
    pub fn constant(source: &MeasuredSpace, target: &MeasuredSpace) -> Self {
        let matrix = DMatrix::from_fn(source.len(), target.len(), |_, l| target.mass(l));
        Self {
            source: source.clone(),
            target: target.clone(),
            matrix,
        }
    }

    /// The kernel of a deterministic map given as a cell-to-cell assignment.
    pub fn deterministic(source: &MeasuredSpace, target_labels: Vec<String>, map: &[usize]) -> Result<Self> {
        source.ensure_len(map.len())?;
        if let Some(&bad) = map.iter().find(|&&j| j >= target_labels.len()) {
            return Err(Error::InvalidArgument(format!(
                "assignment targets cell {bad} but the target has {} cells",
                target_labels.len()
            )));
        }
        let matrix = DMatrix::from_fn(source.len(), target_labels.len(), |k, l| {
            if map[k] == l {
                1.0
            } else {
                0.0
            }
        });
        Self::new(source.clone(), target_labels, matrix)
    }

    pub fn source(&self) -> &MeasuredSpace {
        &self.source
    }

    pub fn target(&self) -> &MeasuredSpace {
        &self.target
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn entry(&self, k: usize, l: usize) -> f64 {
        self.matrix[(k, l)]
    }

    pub fn row(&self, k: usize) -> Vec<f64> {
        self.matrix.row(k).iter().copied().collect()
    }

    /// Kleisli composition: first `self`, then `next`.
    pub fn compose(&self, next: &KernelMorphism) -> Result<KernelMorphism> {
        self.target.ensure_same(&next.source, "compose")?;
        let matrix = &self.matrix * &next.matrix;
        KernelMorphism::new(self.source.clone(), next.target.labels().to_vec(), matrix)
    }

    /// Product kernel `(f⊗g)(k,k') = f(k)⊗g(k')` on the product spaces.
    pub fn tensor(&self, other: &KernelMorphism) -> KernelMorphism {
        let source = self.source.product(&other.source);
        let target = self.target.product(&other.target);
        let matrix = self.matrix.kronecker(&other.matrix);
        KernelMorphism {
            source,
            target,
            matrix,
        }
    }

    /// The joint law `γ(k,l) = μ(k)·f(k)(l)` as an `|X|×|Y|` matrix.
    pub fn coupling_matrix(&self) -> DMatrix<f64> {
        let mu = self.source.weights();
        DMatrix::from_fn(self.matrix.nrows(), self.matrix.ncols(), |k, l| mu[k] * self.matrix[(k, l)])
    }

    /// The coupling as a measure on `X×Y` (row-major, matching [`MeasuredSpace::product`]).
    pub fn coupling(&self) -> FiniteMeasureVector {
        let gamma = self.coupling_matrix();
        let values = (0..gamma.nrows())
            .flat_map(|k| (0..gamma.ncols()).map(move |l| (k, l)))
            .map(|(k, l)| gamma[(k, l)])
            .collect();
        FiniteMeasureVector::new(values).expect("coupling entries are non-negative")
    }

    /// Bayesian inversion `f†: (Y, ν) ⇸ (X, μ)`,
    /// `f†(l)(k) = μ(k)·f(k)(l) / ν(l)`.
    ///
    /// Rows over ν-null cells (mass at most [`NULL_MASS`]) are set to μ.
    pub fn dagger(&self) -> KernelMorphism {
        let mu = self.source.weights();
        let nu = self.target.weights();
        let matrix = DMatrix::from_fn(self.target.len(), self.source.len(), |l, k| {
            if nu[l] > NULL_MASS {
                mu[k] * self.matrix[(k, l)] / nu[l]
            } else {
                mu[k]
            }
        });
        KernelMorphism::new(self.target.clone(), self.source.labels().to_vec(), matrix)
            .expect("the Bayes adjoint of a valid kernel is a valid kernel")
    }

    /// Backward action on functions: `(f φ)(k) = Σ_l f(k)(l)·φ(l)`.
    pub fn predicate_transform(&self, phi: &Predicate) -> Result<Predicate> {
        self.target.ensure_len(phi.len())?;
        let values = (0..self.matrix.nrows())
            .map(|k| {
                self.matrix
                    .row(k)
                    .iter()
                    .zip(phi.values())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect();
        Predicate::new(values)
    }

    /// Forward action on measures absolutely continuous w.r.t. μ: `ρ ↦ ρ·f`.
    pub fn state_transform(&self, rho: &FiniteMeasureVector) -> Result<FiniteMeasureVector> {
        rho.ensure_abs_continuous(&self.source)?;
        FiniteMeasureVector::new(pushforward(rho.values(), &self.matrix))
    }

    /// `(∫ φ dν, ∫ (f φ) dμ)`; both sides of the change-of-variables law.
    pub fn change_of_variables_check(&self, phi: &Predicate) -> Result<(f64, f64)> {
        let lhs = phi.integrate(&self.target)?;
        let rhs = self.predicate_transform(phi)?.integrate(&self.source)?;
        Ok((lhs, rhs))
    }

    /// Fails unless both kernels share the source space and the target labels.
    pub fn ensure_comparable(&self, other: &KernelMorphism) -> Result<()> {
        self.source.ensure_same(&other.source, "source")?;
        if self.target.labels() != other.target.labels() {
            return Err(Error::SpaceMismatch("target labels differ".into()));
        }
        Ok(())
    }

    /// Equality almost everywhere: rows may differ only on cells of source
    /// mass at most `tol`.
    pub fn equal_ae(&self, other: &KernelMorphism, tol: f64) -> Result<bool> {
        self.ensure_comparable(other)?;
        Ok(self.max_ae_difference(other, tol) <= tol)
    }

    /// Largest entrywise difference over rows of source mass above `null_tol`.
    pub fn max_ae_difference(&self, other: &KernelMorphism, null_tol: f64) -> f64 {
        let mu = self.source.weights();
        let mut worst: f64 = 0.0;
        for k in (0..self.matrix.nrows()).filter(|&k| mu[k] > null_tol) {
            for l in 0..self.matrix.ncols() {
                worst = worst.max((self.matrix[(k, l)] - other.matrix[(k, l)]).abs());
            }
        }
        worst
    }

    /// Largest deviation of a row sum from one.
    pub fn stochasticity_defect(&self) -> f64 {
        (0..self.matrix.nrows())
            .map(|k| (self.matrix.row(k).sum() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest deviation between the stored ν and `μ·f`.
    pub fn pushforward_defect(&self) -> f64 {
        pushforward(self.source.weights(), &self.matrix)
            .iter()
            .zip(self.target.weights())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn pushforward(weights: &[f64], matrix: &DMatrix<f64>) -> Vec<f64> {
    (0..matrix.ncols())
        .map(|l| {
            weights
                .iter()
                .enumerate()
                .map(|(k, w)| w * matrix[(k, l)])
                .sum()
        })
        .collect()
}

pub fn compose(f: &KernelMorphism, g: &KernelMorphism) -> Result<KernelMorphism> {
    f.compose(g)
}

pub fn tensor(f: &KernelMorphism, g: &KernelMorphism) -> KernelMorphism {
    f.tensor(g)
}

pub fn coupling(f: &KernelMorphism) -> FiniteMeasureVector {
    f.coupling()
}

pub fn dagger(f: &KernelMorphism) -> KernelMorphism {
    f.dagger()
}

pub fn kernels_equal_ae(f: &KernelMorphism, g: &KernelMorphism, tol: f64) -> Result<bool> {
    f.equal_ae(g, tol)
}

/// Checks `Σ_{k∈A,l∈B} μ(k)f(k)(l) = Σ_{l∈B,k∈A} ν(l)f†(l)(k)` for one pair of
/// cell sets given as bitmasks; returns the absolute discrepancy.
pub fn adjointness_defect(f: &KernelMorphism, f_dagger: &KernelMorphism, a_mask: u64, b_mask: u64) -> f64 {
    let mu = f.source().weights();
    let nu = f.target().weights();
    let mut forward = 0.0;
    let mut backward = 0.0;
    for k in (0..mu.len()).filter(|k| a_mask >> k & 1 == 1) {
        for l in (0..nu.len()).filter(|l| b_mask >> l & 1 == 1) {
            forward += mu[k] * f.entry(k, l);
            backward += nu[l] * f_dagger.entry(l, k);
        }
    }
    (forward - backward).abs()
}
