//! Functions and measures on a finite measured space: predicates, densities
//! and (sub-)probability weight vectors, with the Radon–Nikodym pair between
//! the last two.

use crate::error::{Error, Result};
use crate::measure::MeasuredSpace;

/// A real-valued function on the cells of a space.
#[derive(Debug, Clone, PartialEq)]
pub struct Predicate(Vec<f64>);

impl Predicate {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("predicate entry {k} is not finite")));
        }
        Ok(Self(values))
    }

    pub fn constant(len: usize, value: f64) -> Self {
        Self(vec![value; len])
    }

    pub fn indicator(len: usize, cell: usize) -> Self {
        let mut values = vec![0.0; len];
        values[cell] = 1.0;
        Self(values)
    }

    /// Indicator of an arbitrary set of cells.
    pub fn indicator_of(len: usize, cells: impl IntoIterator<Item = usize>) -> Self {
        let mut values = vec![0.0; len];
        for c in cells {
            values[c] = 1.0;
        }
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Integral against the weights of `space`.
    pub fn integrate(&self, space: &MeasuredSpace) -> Result<f64> {
        space.ensure_len(self.len())?;
        Ok(self.0.iter().zip(space.weights()).map(|(v, w)| v * w).sum())
    }
}

/// A Radon–Nikodym derivative with respect to a space's weights.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityVector(Vec<f64>);

impl DensityVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_non_negative(&values, "density")?;
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_predicate(self) -> Predicate {
        Predicate(self.0)
    }
}

/// A finite non-negative measure on a space, not necessarily normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMeasureVector(Vec<f64>);

impl FiniteMeasureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_non_negative(&values, "measure")?;
        Ok(Self(values))
    }

    pub fn zero(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn point_mass(len: usize, cell: usize, mass: f64) -> Self {
        let mut values = vec![0.0; len];
        values[cell] = mass;
        Self(values)
    }

    pub fn from_space(space: &MeasuredSpace) -> Self {
        Self(space.weights().to_vec())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Fails unless every cell of zero reference mass carries zero mass.
    pub fn ensure_abs_continuous(&self, space: &MeasuredSpace) -> Result<()> {
        space.ensure_len(self.len())?;
        for (cell, (&v, &w)) in self.0.iter().zip(space.weights()).enumerate() {
            if w == 0.0 && v != 0.0 {
                return Err(Error::AbsoluteContinuityViolation { cell, value: v });
            }
        }
        Ok(())
    }
}

fn check_non_negative(values: &[f64], what: &str) -> Result<()> {
    if let Some(k) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "{what} entry {k} must be finite and non-negative, got {}",
            values[k]
        )));
    }
    Ok(())
}

/// `dρ/dμ`, set to zero on cells of zero reference mass.
pub fn rn_derivative(rho: &FiniteMeasureVector, space: &MeasuredSpace) -> Result<DensityVector> {
    rho.ensure_abs_continuous(space)?;
    let values = rho
        .values()
        .iter()
        .zip(space.weights())
        .map(|(&r, &w)| if w > 0.0 { r / w } else { 0.0 })
        .collect();
    Ok(DensityVector(values))
}

/// The measure with density `density` against the space's weights.
pub fn mr(density: &DensityVector, space: &MeasuredSpace) -> Result<FiniteMeasureVector> {
    space.ensure_len(density.len())?;
    let values = density
        .values()
        .iter()
        .zip(space.weights())
        .map(|(d, w)| d * w)
        .collect();
    Ok(FiniteMeasureVector(values))
}

/// Exponent of a weighted ℓ^p norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lp {
    One,
    Two,
    Infinity,
}

impl Lp {
    pub const ALL: [Lp; 3] = [Lp::One, Lp::Two, Lp::Infinity];
}

/// Norm of `phi` in L^p of the space's weights. The ∞-norm is the essential
/// supremum, i.e. the maximum over cells of positive mass.
pub fn lp_norm(phi: &Predicate, space: &MeasuredSpace, p: Lp) -> Result<f64> {
    space.ensure_len(phi.len())?;
    let pairs = phi.values().iter().zip(space.weights());
    Ok(match p {
        Lp::One => pairs.map(|(v, w)| w * v.abs()).sum(),
        Lp::Two => pairs.map(|(v, w)| w * v * v).sum::<f64>().sqrt(),
        Lp::Infinity => pairs
            .filter(|(_, &w)| w > 0.0)
            .map(|(v, _)| v.abs())
            .fold(0.0, f64::max),
    })
}
