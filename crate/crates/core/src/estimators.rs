//! Distribution estimates from sample histograms.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::distribution::DiscreteDistribution;
use crate::error::{domain, Error, Result};

/// Per-atom counts `N_a` of a sample over a declared support of size `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    counts: Vec<u64>,
    n: u64,
    count_of_counts: BTreeMap<u64, u64>,
}

impl Histogram {
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::Input("histogram needs at least one atom".into()));
        }
        let n = counts
            .iter()
            .try_fold(0u64, |acc, c| acc.checked_add(*c))
            .ok_or_else(|| Error::Input("total count overflows".into()))?;
        let mut count_of_counts = BTreeMap::new();
        for c in &counts {
            *count_of_counts.entry(*c).or_insert(0) += 1;
        }
        Ok(Self { counts, n, count_of_counts })
    }

    /// Tallies atom indices in `[0, k)`.
    pub fn from_sample(sample: &[usize], k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Input("histogram needs at least one atom".into()));
        }
        let mut counts = vec![0u64; k];
        for (i, &a) in sample.iter().enumerate() {
            if a >= k {
                return Err(Error::Input(format!("sample[{i}] = {a} outside [0, {k})")));
            }
            counts[a] += 1;
        }
        Self::from_counts(counts)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Sample size `n = sum_a N_a`.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Declared support size.
    pub fn k(&self) -> usize {
        self.counts.len()
    }

    /// `phi_t`, the number of atoms seen exactly `t` times. `phi_0` counts
    /// unseen atoms of the declared support.
    pub fn phi(&self, t: u64) -> u64 {
        self.count_of_counts.get(&t).copied().unwrap_or(0)
    }

    /// Nonzero entries of the count-of-counts map, in increasing `t`.
    pub fn count_of_counts(&self) -> &BTreeMap<u64, u64> {
        &self.count_of_counts
    }
}

/// Tallies a sample of atom indices in `[0, k)`.
pub fn histogram(sample: &[usize], k: usize) -> Result<Histogram> {
    Histogram::from_sample(sample, k)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorKind {
    Empirical,
    AddConstant(f64),
    /// Add-one.
    Laplace,
    /// Add-one-half.
    KrichevskyTrofimov,
    BraessSauer,
    GoodTuring,
}

impl EstimatorKind {
    /// The five estimators compared in the smoothing study.
    pub const STANDARD: [EstimatorKind; 5] = [
        EstimatorKind::Empirical,
        EstimatorKind::Laplace,
        EstimatorKind::KrichevskyTrofimov,
        EstimatorKind::BraessSauer,
        EstimatorKind::GoodTuring,
    ];

    /// Replaces the named add-constant aliases by their constant.
    pub fn canonical(self) -> Self {
        match self {
            Self::Laplace => Self::AddConstant(1.0),
            Self::KrichevskyTrofimov => Self::AddConstant(0.5),
            other => other,
        }
    }

    pub fn estimate(&self, h: &Histogram) -> Result<DiscreteDistribution> {
        match self.canonical() {
            Self::Empirical => empirical(h),
            Self::AddConstant(b) => add_constant(h, b),
            Self::BraessSauer => Ok(braess_sauer(h)),
            Self::GoodTuring => good_turing(h),
            Self::Laplace | Self::KrichevskyTrofimov => unreachable!(),
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Empirical => write!(f, "empirical"),
            Self::AddConstant(b) => write!(f, "add:{b}"),
            Self::Laplace => write!(f, "laplace"),
            Self::KrichevskyTrofimov => write!(f, "kt"),
            Self::BraessSauer => write!(f, "braess-sauer"),
            Self::GoodTuring => write!(f, "good-turing"),
        }
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    /// `empirical | laplace | kt | braess-sauer | good-turing | add:<b>`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        Ok(match t.as_str() {
            "empirical" => Self::Empirical,
            "laplace" => Self::Laplace,
            "kt" | "krichevsky-trofimov" => Self::KrichevskyTrofimov,
            "braess-sauer" | "bs" => Self::BraessSauer,
            "good-turing" | "gt" => Self::GoodTuring,
            _ => {
                let b = t
                    .strip_prefix("add:")
                    .ok_or_else(|| Error::Parse { line: 0, msg: format!("unknown estimator `{s}`") })?
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse { line: 0, msg: format!("bad add-constant in `{s}`") })?;
                if !(b > 0.0 && b.is_finite()) {
                    return domain(format!("add-constant {b} must be positive and finite"));
                }
                Self::AddConstant(b)
            }
        })
    }
}

fn require_samples(h: &Histogram, what: &str) -> Result<()> {
    if h.n() == 0 {
        Err(Error::Input(format!("{what} estimator needs at least one sample")))
    } else {
        Ok(())
    }
}

/// `N_a / n`.
pub fn empirical(h: &Histogram) -> Result<DiscreteDistribution> {
    require_samples(h, "empirical")?;
    let n = h.n() as f64;
    Ok(DiscreteDistribution::from_normalized_unchecked(h.counts().iter().map(|c| *c as f64 / n).collect()))
}

/// `(N_a + b) / (n + k b)`.
pub fn add_constant(h: &Histogram, b: f64) -> Result<DiscreteDistribution> {
    if !(b > 0.0 && b.is_finite()) {
        return domain(format!("add-constant {b} must be positive and finite"));
    }
    let denom = h.n() as f64 + h.k() as f64 * b;
    Ok(DiscreteDistribution::from_normalized_unchecked(h.counts().iter().map(|c| (*c as f64 + b) / denom).collect()))
}

/// Add-constant with count-dependent constants: `b_a = 1/2` for unseen atoms,
/// `1` for singletons, `3/4` otherwise, normalized by `n + sum_a b_a`.
pub fn braess_sauer(h: &Histogram) -> DiscreteDistribution {
    let b = |c: u64| match c {
        0 => 0.5,
        1 => 1.0,
        _ => 0.75,
    };
    let total_b: f64 = h.counts().iter().map(|c| b(*c)).sum();
    let denom = h.n() as f64 + total_b;
    DiscreteDistribution::from_normalized_unchecked(h.counts().iter().map(|c| (*c as f64 + b(*c)) / denom).collect())
}

/// Modified Good-Turing: weight `N_a` when `N_a > phi_{N_a + 1}`, otherwise
/// `(phi_{N_a + 1} + 1)(N_a + 1) / phi_{N_a}`; normalized.
///
/// If the second branch meets `phi_{N_a} = 0` the weight falls back to
/// `max(N_a, 1)`.
pub fn good_turing(h: &Histogram) -> Result<DiscreteDistribution> {
    require_samples(h, "Good-Turing")?;
    let weights: Vec<f64> = h
        .counts()
        .iter()
        .map(|&c| {
            let next = h.phi(c + 1);
            if c > next {
                c as f64
            } else {
                let here = h.phi(c);
                if here == 0 {
                    c.max(1) as f64
                } else {
                    (next as f64 + 1.0) * (c as f64 + 1.0) / here as f64
                }
            }
        })
        .collect();
    let total: f64 = weights.iter().sum();
    Ok(DiscreteDistribution::from_normalized_unchecked(weights.iter().map(|w| w / total).collect()))
}
