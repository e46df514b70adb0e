//! Synthetic distributions, seeded samplers and 2-D densities.
//!
//! Every random stream is a ChaCha8 generator (`rand_chacha`). Independent
//! substreams are seeded by mixing a base seed with integer keys (for
//! example a sweep index and a trial index) through SplitMix64.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::distribution::DiscreteDistribution;
use crate::divergence::fi_term;
use crate::error::{domain, Error, Result};
use crate::quadrature::GaussLegendre;

/// Name of the pseudo-random generator used throughout the crate.
pub const RNG_ALGORITHM: &str = "ChaCha8";

/// Half-width, in standard deviations, of the Gaussian integration box.
pub const GAUSSIAN_BOX_SIGMAS: f64 = 7.0;
/// Half-width, in units of `sqrt(scale)`, of the Student-t integration box.
pub const T_BOX_HALF_WIDTH: f64 = 40.0;
/// Quadrature nodes per axis for Student-t ground truth.
pub const T_GROUND_TRUTH_NODES: usize = 512;
/// Quadrature nodes per axis for Gaussian ground truth.
pub const GAUSSIAN_GROUND_TRUTH_NODES: usize = 256;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the substream identified by `keys` under `base_seed`.
pub fn substream_seed(base_seed: u64, keys: &[u64]) -> u64 {
    keys.iter().fold(splitmix64(base_seed), |h, k| splitmix64(h ^ splitmix64(k.wrapping_add(0x632B_E59B_D9B4_E019))))
}

/// A seeded source of random streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngSpec {
    pub base_seed: u64,
}

impl RngSpec {
    pub fn new(base_seed: u64) -> Self {
        Self { base_seed }
    }

    /// The stream seeded directly by `base_seed`.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.base_seed)
    }

    /// An independent stream keyed by `keys`.
    pub fn substream(&self, keys: &[u64]) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(substream_seed(self.base_seed, keys))
    }
}

/// `P(i) ∝ i^(-r)`, `i = 1..=k`.
pub fn zipf_pmf(k: usize, r: f64) -> Result<DiscreteDistribution> {
    if k == 0 {
        return Err(Error::Input("zipf needs k >= 1".into()));
    }
    if !(r >= 0.0 && r.is_finite()) {
        return domain(format!("zipf exponent {r} must be finite and nonnegative"));
    }
    let weights: Vec<f64> = (1..=k).map(|i| (i as f64).powf(-r)).collect();
    DiscreteDistribution::from_weights(&weights)
}

/// Mass `1/(2k)` on the first half of the atoms and `3/(2k)` on the second.
pub fn step_pmf(k: usize) -> Result<DiscreteDistribution> {
    if k == 0 || !k.is_multiple_of(2) {
        return domain(format!("step pmf needs an even k >= 2, got {k}"));
    }
    let kf = k as f64;
    let masses = (0..k).map(|i| if i < k / 2 { 1.0 / (2.0 * kf) } else { 3.0 / (2.0 * kf) }).collect();
    DiscreteDistribution::new(masses)
}

/// One draw from the symmetric Dirichlet(`alpha`) over `k` atoms, as
/// normalized Gamma(`alpha`, 1) variates.
pub fn dirichlet_draw<R: Rng + ?Sized>(alpha: f64, k: usize, rng: &mut R) -> Result<DiscreteDistribution> {
    if k == 0 {
        return Err(Error::Input("dirichlet needs k >= 1".into()));
    }
    let gamma = Gamma::new(alpha, 1.0).map_err(|e| Error::Domain(format!("dirichlet alpha {alpha}: {e}")))?;
    let weights: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
    DiscreteDistribution::from_weights(&weights)
}

/// Inverse-CDF sampler over a fixed pmf.
#[derive(Debug, Clone)]
pub struct DiscreteSampler {
    cumulative: Vec<f64>,
    last_positive: usize,
}

impl DiscreteSampler {
    pub fn new(p: &DiscreteDistribution) -> Self {
        let mut acc = 0.0;
        let cumulative = p
            .masses()
            .iter()
            .map(|m| {
                acc += m;
                acc
            })
            .collect();
        let last_positive = p.masses().iter().rposition(|m| *m > 0.0).expect("some mass is positive");
        Self { cumulative, last_positive }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = self.cumulative[self.cumulative.len() - 1];
        let u = rng.random::<f64>() * total;
        self.cumulative.partition_point(|c| *c <= u).min(self.last_positive)
    }
}

/// `n` i.i.d. atom indices from `p`.
pub fn sample_discrete<R: Rng + ?Sized>(p: &DiscreteDistribution, n: usize, rng: &mut R) -> Vec<usize> {
    let sampler = DiscreteSampler::new(p);
    (0..n).map(|_| sampler.sample(rng)).collect()
}

/// A 2-D location-scale distribution with covariance parameter `scale * I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContinuousSpec {
    Gaussian { mean: [f64; 2], scale: f64 },
    StudentT { df: u32, mean: [f64; 2], scale: f64 },
}

impl ContinuousSpec {
    pub fn gaussian(mean: [f64; 2], scale: f64) -> Result<Self> {
        let s = Self::Gaussian { mean, scale };
        s.validate()?;
        Ok(s)
    }

    pub fn student_t(df: u32, mean: [f64; 2], scale: f64) -> Result<Self> {
        let s = Self::StudentT { df, mean, scale };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let (mean, scale) = (self.mean(), self.scale());
        if !(scale > 0.0 && scale.is_finite()) {
            return domain(format!("scale {scale} must be positive and finite"));
        }
        if !(mean[0].is_finite() && mean[1].is_finite()) {
            return domain("mean must be finite");
        }
        if let Self::StudentT { df: 0, .. } = self {
            return domain("degrees of freedom must be at least 1");
        }
        Ok(())
    }

    pub fn mean(&self) -> [f64; 2] {
        match *self {
            Self::Gaussian { mean, .. } | Self::StudentT { mean, .. } => mean,
        }
    }

    pub fn scale(&self) -> f64 {
        match *self {
            Self::Gaussian { scale, .. } | Self::StudentT { scale, .. } => scale,
        }
    }

    fn is_heavy_tailed(&self) -> bool {
        matches!(self, Self::StudentT { .. })
    }
}

/// A pair of independent standard normals by Box–Muller.
fn box_muller<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    let u1 = 1.0 - rng.random::<f64>();
    let u2 = rng.random::<f64>();
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (2.0 * PI * u2).sin_cos();
    (r * c, r * s)
}

/// `n` points from `spec`. Student-t points divide a Gaussian pair by
/// `sqrt(chi2_df / df)`, with the chi-square built from the same stream.
pub fn sample_continuous<R: Rng + ?Sized>(spec: &ContinuousSpec, n: usize, rng: &mut R) -> Vec<[f64; 2]> {
    let sd = spec.scale().sqrt();
    let mean = spec.mean();
    (0..n)
        .map(|_| {
            let (z0, z1) = box_muller(rng);
            let w = match *spec {
                ContinuousSpec::Gaussian { .. } => 1.0,
                ContinuousSpec::StudentT { df, .. } => {
                    let mut chi2 = 0.0;
                    let mut left = df;
                    while left > 0 {
                        let (a, b) = box_muller(rng);
                        chi2 += a * a;
                        if left > 1 {
                            chi2 += b * b;
                        }
                        left = left.saturating_sub(2);
                    }
                    (chi2 / df as f64).sqrt()
                }
            };
            [mean[0] + sd * z0 / w, mean[1] + sd * z1 / w]
        })
        .collect()
}

/// Density of `spec` at `x`.
pub fn density(spec: &ContinuousSpec, x: [f64; 2]) -> f64 {
    let mean = spec.mean();
    let s = spec.scale();
    let r2 = (x[0] - mean[0]).powi(2) + (x[1] - mean[1]).powi(2);
    match *spec {
        ContinuousSpec::Gaussian { .. } => (-r2 / (2.0 * s)).exp() / (2.0 * PI * s),
        ContinuousSpec::StudentT { df, .. } => {
            let nu = df as f64;
            (1.0 + r2 / (nu * s)).powf(-(nu + 2.0) / 2.0) / (2.0 * PI * s)
        }
    }
}

/// Axis-aligned box `[lo, hi]^2` covering both distributions.
fn integration_box(p: &ContinuousSpec, q: &ContinuousSpec) -> [(f64, f64); 2] {
    let half = if p.is_heavy_tailed() || q.is_heavy_tailed() {
        T_BOX_HALF_WIDTH * p.scale().max(q.scale()).sqrt()
    } else {
        GAUSSIAN_BOX_SIGMAS * p.scale().max(q.scale()).sqrt()
    };
    let (a, b) = (p.mean(), q.mean());
    [(a[0].min(b[0]) - half, a[0].max(b[0]) + half), (a[1].min(b[1]) - half, a[1].max(b[1]) + half)]
}

/// Tensor-product Gauss–Legendre integral of `g` over `[x0, x1] x [y0, y1]`.
pub fn integrate_2d(rule: &GaussLegendre, bx: [(f64, f64); 2], g: impl Fn([f64; 2]) -> f64) -> f64 {
    let (xs, wx) = rule.mapped(bx[0].0, bx[0].1);
    let (ys, wy) = rule.mapped(bx[1].0, bx[1].1);
    let mut total = 0.0;
    for (x, a) in xs.iter().zip(&wx) {
        let row: f64 = ys.iter().zip(&wy).map(|(y, b)| b * g([*x, *y])).sum();
        total += a * row;
    }
    total
}

/// Frontier integral between two 2-D densities by tensor Gauss–Legendre
/// quadrature of the pointwise frontier-integral term with `grid_nodes` per
/// axis. Gaussians are integrated over a box reaching seven standard
/// deviations past both means; Student-t pairs over a box of half-width
/// 40 `sqrt(scale)`.
pub fn continuous_frontier_integral(p: &ContinuousSpec, q: &ContinuousSpec, grid_nodes: usize) -> Result<f64> {
    p.validate()?;
    q.validate()?;
    if grid_nodes < 32 {
        return domain(format!("need at least 32 nodes per axis, got {grid_nodes}"));
    }
    if p == q {
        return Ok(0.0);
    }
    let rule = GaussLegendre::new(grid_nodes);
    let bx = integration_box(p, q);
    Ok(integrate_2d(&rule, bx, |x| fi_term(density(p, x), density(q, x))))
}

/// Ground-truth frontier integral with the documented node counts.
pub fn continuous_ground_truth(p: &ContinuousSpec, q: &ContinuousSpec) -> Result<f64> {
    let nodes =
        if p.is_heavy_tailed() || q.is_heavy_tailed() { T_GROUND_TRUTH_NODES } else { GAUSSIAN_GROUND_TRUTH_NODES };
    continuous_frontier_integral(p, q, nodes)
}

/// A named distribution in experiment configurations:
/// `zipf:<r>`, `step`, `dir:<alpha>`, `gauss:<mx>,<my>,<scale>`,
/// `t:<df>,<mx>,<my>,<scale>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistSpec {
    Zipf(f64),
    Step,
    Dirichlet(f64),
    Continuous(ContinuousSpec),
}

impl DistSpec {
    pub fn is_discrete(&self) -> bool {
        !matches!(self, Self::Continuous(_))
    }
}

impl fmt::Display for DistSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zipf(r) => write!(f, "zipf:{r}"),
            Self::Step => write!(f, "step"),
            Self::Dirichlet(a) => write!(f, "dir:{a}"),
            Self::Continuous(ContinuousSpec::Gaussian { mean, scale }) => {
                write!(f, "gauss:{},{},{}", mean[0], mean[1], scale)
            }
            Self::Continuous(ContinuousSpec::StudentT { df, mean, scale }) => {
                write!(f, "t:{},{},{},{}", df, mean[0], mean[1], scale)
            }
        }
    }
}

impl FromStr for DistSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| Error::Parse { line: 0, msg };
        let t = s.trim().to_ascii_lowercase();
        let (name, args) = match t.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (t.as_str(), None),
        };
        let nums = |want: usize| -> Result<Vec<f64>> {
            let a = args.ok_or_else(|| bad(format!("`{s}` needs {want} parameter(s)")))?;
            let v: Vec<f64> = a
                .split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| bad(format!("bad number `{x}` in `{s}`"))))
                .collect::<Result<_>>()?;
            if v.len() != want {
                return Err(bad(format!("`{s}` needs {want} parameter(s), got {}", v.len())));
            }
            Ok(v)
        };
        let spec = match name {
            "zipf" => {
                let r = nums(1)?[0];
                if !(r >= 0.0 && r.is_finite()) {
                    return domain(format!("zipf exponent {r} must be finite and nonnegative"));
                }
                Self::Zipf(r)
            }
            "step" if args.is_none() => Self::Step,
            "dir" | "dirichlet" => {
                let a = nums(1)?[0];
                if !(a > 0.0 && a.is_finite()) {
                    return domain(format!("dirichlet alpha {a} must be positive"));
                }
                Self::Dirichlet(a)
            }
            "gauss" | "gaussian" => {
                let v = nums(3)?;
                Self::Continuous(ContinuousSpec::gaussian([v[0], v[1]], v[2])?)
            }
            "t" => {
                let v = nums(4)?;
                if !(v[0] >= 1.0 && v[0].fract() == 0.0 && v[0] <= u32::MAX as f64) {
                    return domain(format!("degrees of freedom {} must be a positive integer", v[0]));
                }
                Self::Continuous(ContinuousSpec::student_t(v[0] as u32, [v[1], v[2]], v[3])?)
            }
            _ => return Err(bad(format!("unknown distribution `{s}`"))),
        };
        Ok(spec)
    }
}
