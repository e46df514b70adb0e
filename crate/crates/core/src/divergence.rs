//! f-divergences, divergence frontiers and the frontier integral.
//!
//! All logarithms are natural, so every quantity is in nats.

use crate::distribution::DiscreteDistribution;
use crate::error::{check_shape, domain, Result};
use crate::family::{fi_series, GeneratorFamily, FI_TAYLOR_THRESHOLD};
use crate::quadrature::GaussLegendre;

/// Default number of Gauss–Legendre nodes for the frontier-integral oracle.
pub const DEFAULT_QUADRATURE_NODES: usize = 128;
/// Default truncation of the mixture weight for sup-errors over the frontier.
pub const DEFAULT_LAMBDA0: f64 = 0.01;
/// Default number of grid points on `[lambda0, 1 - lambda0]`.
pub const DEFAULT_FRONTIER_GRID: usize = 99;

/// One point `(KL(P || R_l), KL(Q || R_l))` of the divergence frontier, where
/// `R_l = l P + (1 - l) Q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontierPoint {
    pub lambda: f64,
    pub x: f64,
    pub y: f64,
}

/// `psi(p, q) = q f(p / q)` without argument checks.
///
/// The larger argument goes in the denominator (`p f*(q / p)` when `p > q`)
/// so that the ratio never overflows.
pub(crate) fn psi_unchecked(family: GeneratorFamily, p: f64, q: f64) -> f64 {
    if p == 0.0 && q == 0.0 {
        0.0
    } else if q == 0.0 {
        let c = family.f_star(0.0);
        if c.is_infinite() {
            f64::INFINITY
        } else {
            p * c
        }
    } else if p == 0.0 {
        q * family.f(0.0)
    } else if p > q {
        p * family.f_star(q / p)
    } else {
        q * family.f(p / q)
    }
}

fn check_mass(x: f64, name: &str) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        domain(format!("{name} = {x} must be finite and nonnegative"))
    }
}

/// `psi(p, q) = q f(p / q)` with `psi(0, 0) = 0`, `psi(p, 0) = p f*(0)` and
/// `psi(0, q) = q f(0)`. Infinite conventions return `+inf`.
pub fn psi(family: GeneratorFamily, p: f64, q: f64) -> Result<f64> {
    family.validate()?;
    check_mass(p, "p")?;
    check_mass(q, "q")?;
    Ok(psi_unchecked(family, p, q))
}

/// `D_f(P || Q) = sum_a psi(P(a), Q(a))`.
pub fn f_divergence(family: GeneratorFamily, p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    family.validate()?;
    check_shape(p.len(), q.len())?;
    Ok(f_divergence_slices(family, p.masses(), q.masses()))
}

pub(crate) fn f_divergence_slices(family: GeneratorFamily, p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| psi_unchecked(family, *a, *b)).sum()
}

/// `KL(P || Q)`; `+inf` when `P` puts mass where `Q` does not.
pub fn kl(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    check_shape(p.len(), q.len())?;
    Ok(kl_slices(p.masses(), q.masses()))
}

fn kl_slices(p: &[f64], q: &[f64]) -> f64 {
    let mut total = 0.0;
    for (a, b) in p.iter().zip(q) {
        if *a == 0.0 {
            continue;
        }
        if *b == 0.0 {
            return f64::INFINITY;
        }
        total += a * (a / b).ln();
    }
    total
}

/// `KL(P || lambda P + (1 - lambda) Q)`, on slices, finite for `lambda > 0`.
fn kl_to_mixture(p: &[f64], q: &[f64], lambda: f64) -> f64 {
    let lb = 1.0 - lambda;
    p.iter().zip(q).filter(|(a, b)| **a > 0.0 && a != b).map(|(a, b)| a * (a / (lambda * a + lb * b)).ln()).sum()
}

fn check_open_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda < 1.0 {
        Ok(())
    } else {
        domain(format!("lambda {lambda} must lie in (0, 1)"))
    }
}

/// Interpolated KL, `KL(P || lambda P + (1 - lambda) Q)`.
pub fn interpolated_kl(p: &DiscreteDistribution, q: &DiscreteDistribution, lambda: f64) -> Result<f64> {
    check_open_lambda(lambda)?;
    check_shape(p.len(), q.len())?;
    Ok(kl_to_mixture(p.masses(), q.masses(), lambda))
}

/// Linearized cost `lambda KL(P || R) + (1 - lambda) KL(Q || R)` with
/// `R = lambda P + (1 - lambda) Q`, i.e. the lambda-skew Jensen–Shannon
/// divergence.
pub fn linearized_cost(p: &DiscreteDistribution, q: &DiscreteDistribution, lambda: f64) -> Result<f64> {
    check_open_lambda(lambda)?;
    check_shape(p.len(), q.len())?;
    Ok(linearized_cost_slices(p.masses(), q.masses(), lambda))
}

fn linearized_cost_slices(p: &[f64], q: &[f64], lambda: f64) -> f64 {
    let cost = lambda * kl_to_mixture(p, q, lambda) + (1.0 - lambda) * kl_to_mixture(q, p, 1.0 - lambda);
    cost.max(0.0)
}

/// Per-atom contribution to the frontier integral:
/// `(a + b) / 2 - ab / (a - b) ln(a / b)`.
///
/// Evaluated on the ordered pair `(max, min)` so that swapping the arguments
/// gives the identical result.
pub(crate) fn fi_term(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == 0.0 {
        return 0.0;
    }
    if lo == 0.0 {
        return hi / 2.0;
    }
    let delta = (hi - lo) / lo;
    if delta < FI_TAYLOR_THRESHOLD {
        return lo * fi_series(delta);
    }
    let term = (hi + lo) / 2.0 - hi * delta.ln_1p() / delta;
    term.max(0.0)
}

/// Frontier integral in closed form, `sum_a fi_term(P(a), Q(a))`.
///
/// The result lies in `[0, 1]`, is symmetric in its arguments and vanishes
/// exactly when `P = Q`.
pub fn frontier_integral_closed(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    check_shape(p.len(), q.len())?;
    Ok(frontier_integral_slices(p.masses(), q.masses()))
}

pub(crate) fn frontier_integral_slices(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| fi_term(*a, *b)).sum::<f64>().min(1.0)
}

/// Frontier integral as `2 int_0^1 L_lambda(P, Q) d lambda`, integrated by
/// Gauss–Legendre quadrature with `nodes` points. Independent of the closed
/// form; used to cross-check it.
pub fn frontier_integral_quadrature(p: &DiscreteDistribution, q: &DiscreteDistribution, nodes: usize) -> Result<f64> {
    check_shape(p.len(), q.len())?;
    if nodes < 8 {
        return domain(format!("quadrature needs at least 8 nodes, got {nodes}"));
    }
    let rule = GaussLegendre::new(nodes);
    let (pm, qm) = (p.masses(), q.masses());
    Ok(2.0 * rule.integrate(0.0, 1.0, |l| linearized_cost_slices(pm, qm, l)))
}

fn check_grid(grid: &[f64]) -> Result<()> {
    for l in grid {
        check_open_lambda(*l)?;
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return domain("lambda grid must be strictly increasing");
    }
    Ok(())
}

/// Frontier points at each mixture weight of `lambda_grid`.
///
/// The x-coordinate is non-increasing and the y-coordinate non-decreasing in
/// lambda.
pub fn frontier_curve(
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
    lambda_grid: &[f64],
) -> Result<Vec<FrontierPoint>> {
    check_shape(p.len(), q.len())?;
    check_grid(lambda_grid)?;
    let (pm, qm) = (p.masses(), q.masses());
    Ok(lambda_grid
        .iter()
        .map(|&lambda| FrontierPoint {
            lambda,
            x: kl_to_mixture(pm, qm, lambda),
            y: kl_to_mixture(qm, pm, 1.0 - lambda),
        })
        .collect())
}

/// `size` equally spaced points on `[lambda0, 1 - lambda0]`, endpoints
/// included. A single point is placed at 1/2.
pub fn closed_lambda_grid(lambda0: f64, size: usize) -> Result<Vec<f64>> {
    if !(lambda0 > 0.0 && lambda0 < 0.5) {
        return domain(format!("lambda0 {lambda0} must lie in (0, 1/2)"));
    }
    if size == 0 {
        return domain("grid size must be positive");
    }
    if size == 1 {
        return Ok(vec![0.5]);
    }
    let span = 1.0 - 2.0 * lambda0;
    Ok((0..size).map(|i| lambda0 + span * i as f64 / (size - 1) as f64).collect())
}

/// `size` points `i / (size + 1)`, `i = 1..=size`, strictly inside `(0, 1)`.
pub fn open_lambda_grid(size: usize) -> Vec<f64> {
    (1..=size).map(|i| i as f64 / (size + 1) as f64).collect()
}

/// `max_lambda |KL(P^ || R^) - KL(P || R)| + |KL(Q^ || R^) - KL(Q || R)|`
/// over a uniform closed grid on `[lambda0, 1 - lambda0]`.
pub fn frontier_sup_error(
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
    p_hat: &DiscreteDistribution,
    q_hat: &DiscreteDistribution,
    lambda0: f64,
    grid_size: usize,
) -> Result<f64> {
    let k = p.len();
    for d in [q, p_hat, q_hat] {
        check_shape(k, d.len())?;
    }
    let grid = closed_lambda_grid(lambda0, grid_size)?;
    Ok(frontier_sup_error_slices(p.masses(), q.masses(), p_hat.masses(), q_hat.masses(), &grid))
}

pub(crate) fn frontier_sup_error_slices(p: &[f64], q: &[f64], p_hat: &[f64], q_hat: &[f64], grid: &[f64]) -> f64 {
    grid.iter()
        .map(|&l| {
            let dx = kl_to_mixture(p_hat, q_hat, l) - kl_to_mixture(p, q, l);
            let dy = kl_to_mixture(q_hat, p_hat, 1.0 - l) - kl_to_mixture(q, p, 1.0 - l);
            dx.abs() + dy.abs()
        })
        .fold(0.0, f64::max)
}

/// Jeffreys divergence `KL(P || Q) + KL(Q || P)`; `+inf` unless the supports
/// coincide.
pub fn jeffreys(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    check_shape(p.len(), q.len())?;
    Ok(kl_slices(p.masses(), q.masses()) + kl_slices(q.masses(), p.masses()))
}

/// Length of the polyline through the frontier at the open grid
/// `i / (grid_size + 1)`, closed off by the curve's limits
/// `(KL(P || Q), 0)` as lambda -> 0 and `(0, KL(Q || P))` as lambda -> 1.
///
/// Returns `+inf` when the supports differ (the curve is unbounded).
pub fn frontier_length(p: &DiscreteDistribution, q: &DiscreteDistribution, grid_size: usize) -> Result<f64> {
    check_shape(p.len(), q.len())?;
    if grid_size == 0 {
        return domain("grid size must be positive");
    }
    let (pm, qm) = (p.masses(), q.masses());
    if pm == qm {
        return Ok(0.0);
    }
    let start = kl_slices(pm, qm);
    let end = kl_slices(qm, pm);
    if !start.is_finite() || !end.is_finite() {
        return Ok(f64::INFINITY);
    }
    let mut points = Vec::with_capacity(grid_size + 2);
    points.push((start, 0.0));
    for l in open_lambda_grid(grid_size) {
        points.push((kl_to_mixture(pm, qm, l), kl_to_mixture(qm, pm, 1.0 - l)));
    }
    points.push((0.0, end));
    Ok(points.windows(2).map(|w| (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1)).sum())
}
