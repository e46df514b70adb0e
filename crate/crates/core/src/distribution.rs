use crate::error::{Error, Result};

/// Absolute tolerance on the total mass of a [`DiscreteDistribution`].
pub const MASS_TOLERANCE: f64 = 1e-12;

/// A probability mass function over `k >= 1` atoms.
///
/// Masses are nonnegative and sum to one within [`MASS_TOLERANCE`].
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    masses: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::Input("distribution needs at least one atom".into()));
        }
        if let Some((i, m)) = masses.iter().enumerate().find(|(_, m)| !m.is_finite() || **m < 0.0) {
            return Err(Error::Domain(format!("mass {m} at atom {i} is not a probability")));
        }
        let total = compensated_sum(&masses);
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::Domain(format!("masses sum to {total}, not 1")));
        }
        Ok(Self { masses })
    }

    /// Normalizes nonnegative weights into a distribution.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Domain("weights must be finite and nonnegative".into()));
        }
        let total = compensated_sum(weights);
        if !(total > 0.0) {
            return Err(Error::Domain("weights must have positive total".into()));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Input("distribution needs at least one atom".into()));
        }
        Ok(Self { masses: vec![1.0 / k as f64; k] })
    }

    /// Unit mass on `atom`.
    pub fn point_mass(k: usize, atom: usize) -> Result<Self> {
        if atom >= k {
            return Err(Error::Input(format!("atom {atom} outside support of size {k}")));
        }
        let mut masses = vec![0.0; k];
        masses[atom] = 1.0;
        Ok(Self { masses })
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    /// Number of atoms with positive mass.
    pub fn support_size(&self) -> usize {
        self.masses.iter().filter(|m| **m > 0.0).count()
    }

    /// The mixture `lambda * self + (1 - lambda) * other`.
    pub fn mixture(&self, other: &Self, lambda: f64) -> Result<Self> {
        crate::error::check_shape(self.len(), other.len())?;
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::Domain(format!("mixture weight {lambda} outside [0, 1]")));
        }
        let masses = self.masses.iter().zip(&other.masses).map(|(p, q)| lambda * p + (1.0 - lambda) * q).collect();
        Ok(Self { masses })
    }

    /// L1 distance `sum_a |P(a) - Q(a)|`.
    pub fn l1_distance(&self, other: &Self) -> Result<f64> {
        crate::error::check_shape(self.len(), other.len())?;
        Ok(self.masses.iter().zip(&other.masses).map(|(p, q)| (p - q).abs()).sum())
    }

    pub fn into_masses(self) -> Vec<f64> {
        self.masses
    }

    /// Builds a distribution whose masses already sum to one up to rounding
    /// in the caller's arithmetic (e.g. `(N_a + b) / (n + kb)`).
    pub(crate) fn from_normalized_unchecked(masses: Vec<f64>) -> Self {
        debug_assert!(!masses.is_empty());
        debug_assert!((masses.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        Self { masses }
    }
}

/// Neumaier-compensated sum; keeps the total of many small masses accurate
/// to a few ulps.
pub(crate) fn compensated_sum(xs: &[f64]) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for &x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
