//! Closed-form error bounds for plug-in and smoothed divergence estimates,
//! quantization, and their combination.
//!
//! Functions named `*_bound` with a [`GeneratorFamily`] argument carry the
//! family's regularity constants explicitly. The constant-free "plot forms"
//! ([`simplified_bound`], [`oracle_plot_bound`], [`total_error_bound`]) drop
//! the universal constant and are only meaningful up to scale.

use serde::Serialize;

use crate::distribution::DiscreteDistribution;
use crate::error::{check_shape, domain, Error, Result};
use crate::family::GeneratorFamily;

/// Distribution-dependent (`Oracle`) or distribution-free (`Free`) form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMode {
    Oracle,
    Free,
}

fn check_n(n: u64, min: u64, name: &str) -> Result<()> {
    if n >= min {
        Ok(())
    } else {
        domain(format!("{name} = {n} must be at least {min}"))
    }
}

/// `alpha_n(P) = sum_a sqrt(P(a) / n)`; at most `sqrt(k / n)`.
pub fn alpha(p: &DiscreteDistribution, n: u64) -> Result<f64> {
    check_n(n, 1, "n")?;
    let n = n as f64;
    Ok(p.masses().iter().map(|m| (m / n).sqrt()).sum())
}

/// `beta_n(P) = sum_a (1 - P(a))^n P(a) max(1, ln 1/P(a))`, the expected
/// log-weighted missing mass. Requires `n >= 3`.
pub fn beta_exact(p: &DiscreteDistribution, n: u64) -> Result<f64> {
    check_n(n, 3, "n")?;
    Ok(p.masses().iter().filter(|m| **m > 0.0).map(|&m| miss_probability(m, n) * m * 1.0_f64.max(-m.ln())).sum())
}

/// Expected missing mass `sum_a (1 - P(a))^n P(a)`.
pub fn missing_mass_expectation(p: &DiscreteDistribution, n: u64) -> Result<f64> {
    check_n(n, 1, "n")?;
    Ok(p.masses().iter().filter(|m| **m > 0.0).map(|&m| miss_probability(m, n) * m).sum())
}

/// `(1 - m)^n`, accurate for small `m`.
fn miss_probability(m: f64, n: u64) -> f64 {
    if m >= 1.0 {
        0.0
    } else {
        (n as f64 * (-m).ln_1p()).exp()
    }
}

/// `gamma_{n,k}(P) = bk / (n + bk) * sum_a |P(a) - 1/k|`, the bias of the
/// add-constant estimator.
pub fn gamma(p: &DiscreteDistribution, n: u64, b: f64) -> Result<f64> {
    if !(b > 0.0 && b.is_finite()) {
        return domain(format!("b = {b} must be positive and finite"));
    }
    let k = p.len() as f64;
    let spread: f64 = p.masses().iter().map(|m| (m - 1.0 / k).abs()).sum();
    Ok(b * k / (n as f64 + b * k) * spread)
}

/// Plug-in error bound on `E|D_f(P^_n || Q^_m) - D_f(P || Q)|`.
///
/// Oracle form:
/// `(C1 ln n + C0* v C2) alpha_n(P) + (C1* ln m + C0 v C2*) alpha_m(Q)
///  + (C1 + C0* v C2) beta_n(P) + (C1* + C0 v C2*) beta_m(Q)`.
///
/// Free form: [`plug_in_free_bound`] with `k` the common support size.
pub fn plug_in_error_bound(
    family: GeneratorFamily,
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
    n: u64,
    m: u64,
    mode: BoundMode,
) -> Result<f64> {
    family.require_bounded()?;
    check_shape(p.len(), q.len())?;
    check_n(n, 3, "n")?;
    check_n(m, 3, "m")?;
    match mode {
        BoundMode::Free => plug_in_free_bound(family, p.len(), n, m),
        BoundMode::Oracle => {
            let c = family.constants();
            let (ln_n, ln_m) = ((n as f64).ln(), (m as f64).ln());
            let a_p = c.c0_star.max(c.c2);
            let a_q = c.c0.max(c.c2_star);
            Ok((c.c1 * ln_n + a_p) * alpha(p, n)?
                + (c.c1_star * ln_m + a_q) * alpha(q, m)?
                + (c.c1 + a_p) * beta_exact(p, n)?
                + (c.c1_star + a_q) * beta_exact(q, m)?)
        }
    }
}

/// Distribution-free plug-in bound
/// `(c1 ln N + c2)(sqrt(k / N) + k / N)` with `N = min(n, m)`.
pub fn plug_in_free_bound(family: GeneratorFamily, k: usize, n: u64, m: u64) -> Result<f64> {
    family.require_bounded()?;
    check_n(n, 1, "n")?;
    check_n(m, 1, "m")?;
    let c = family.constants();
    let big_n = n.min(m) as f64;
    let ratio = k as f64 / big_n;
    Ok((c.c1_sum() * big_n.ln() + c.c2_sum()) * (ratio.sqrt() + ratio))
}

/// Constant-free distribution-free rate `(sqrt(k/n) + k/n) ln n`.
pub fn simplified_bound(k: usize, n: u64) -> Result<f64> {
    check_n(n, 2, "n")?;
    let ratio = k as f64 / n as f64;
    Ok((ratio.sqrt() + ratio) * (n as f64).ln())
}

/// Constant-free oracle rate `(alpha_n(P) + alpha_n(Q)) ln n + beta_n(P) + beta_n(Q)`.
pub fn oracle_plot_bound(p: &DiscreteDistribution, q: &DiscreteDistribution, n: u64) -> Result<f64> {
    check_shape(p.len(), q.len())?;
    check_n(n, 3, "n")?;
    Ok((alpha(p, n)? + alpha(q, n)?) * (n as f64).ln() + beta_exact(p, n)? + beta_exact(q, n)?)
}

/// Error bound for the add-constant estimator with constant `b`.
///
/// Oracle form, per side:
/// `[n alpha_n(P) / (n + kb) + gamma_{n,k}(P)] (C1 ln(n/b + k) + C0* v C2)`.
/// Free form replaces the bracket by `(sqrt(kn) + 2b(k - 1)) / (n + kb)`.
/// Starred constants are used for the `Q` side.
pub fn add_constant_error_bound(
    family: GeneratorFamily,
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
    n: u64,
    m: u64,
    b: f64,
    mode: BoundMode,
) -> Result<f64> {
    family.require_bounded()?;
    check_shape(p.len(), q.len())?;
    check_n(n, 3, "n")?;
    check_n(m, 3, "m")?;
    if !(b > 0.0 && b.is_finite()) {
        return domain(format!("b = {b} must be positive and finite"));
    }
    let k = p.len();
    match mode {
        BoundMode::Free => add_constant_free_bound(family, k, n, m, b),
        BoundMode::Oracle => {
            let c = family.constants();
            let kf = k as f64;
            let (w_p, w_q) = add_constant_weights(family, kf, n, m, b);
            let tv_p = n as f64 * alpha(p, n)? / (n as f64 + kf * b) + gamma(p, n, b)?;
            let tv_q = m as f64 * alpha(q, m)? / (m as f64 + kf * b) + gamma(q, m, b)?;
            debug_assert!(c.all_finite());
            Ok(tv_p * w_p + tv_q * w_q)
        }
    }
}

fn add_constant_weights(family: GeneratorFamily, k: f64, n: u64, m: u64, b: f64) -> (f64, f64) {
    let c = family.constants();
    let w_p = c.c1 * (n as f64 / b + k).ln() + c.c0_star.max(c.c2);
    let w_q = c.c1_star * (m as f64 / b + k).ln() + c.c0.max(c.c2_star);
    (w_p, w_q)
}

/// Distribution-free add-constant bound; see [`add_constant_error_bound`].
pub fn add_constant_free_bound(family: GeneratorFamily, k: usize, n: u64, m: u64, b: f64) -> Result<f64> {
    family.require_bounded()?;
    if !(b > 0.0 && b.is_finite()) {
        return domain(format!("b = {b} must be positive and finite"));
    }
    let kf = k as f64;
    let (w_p, w_q) = add_constant_weights(family, kf, n, m, b);
    let side = |s: u64| ((kf * s as f64).sqrt() + 2.0 * b * (kf - 1.0)) / (s as f64 + kf * b);
    Ok(w_p * side(n) + w_q * side(m))
}

/// McDiarmid tail `2 exp(-N eps^2 / (2 (c1 ln N + c2)^2))` with
/// `N = min(n, m)`, clipped to `[0, 1]`.
pub fn deviation_probability(family: GeneratorFamily, n: u64, m: u64, eps: f64) -> Result<f64> {
    family.require_bounded()?;
    check_n(n, 1, "n")?;
    check_n(m, 1, "m")?;
    if !(eps >= 0.0) {
        return domain(format!("epsilon {eps} must be nonnegative"));
    }
    let c = family.constants();
    let big_n = n.min(m) as f64;
    let scale = c.c1_sum() * big_n.ln() + c.c2_sum();
    let p = 2.0 * (-big_n * eps * eps / (2.0 * scale * scale)).exp();
    Ok(p.clamp(0.0, 1.0))
}

/// Error level `eps` such that `|D_f(P^_n || Q^_m) - D_f(P || Q)| <= eps`
/// with probability at least `1 - delta`:
///
/// `eps = (c1 ln N + c2) sqrt(2 ln(2/delta) / N) + E`,
///
/// where `E` is the expectation bound: the free bound
/// `(c1 ln N + c2)(sqrt(k/N) + k/N)` or, when `oracle` supplies the pair,
/// the oracle plug-in bound.
pub fn high_prob_epsilon(
    family: GeneratorFamily,
    k: usize,
    n: u64,
    m: u64,
    delta: f64,
    oracle: Option<(&DiscreteDistribution, &DiscreteDistribution)>,
) -> Result<f64> {
    family.require_bounded()?;
    if !(delta > 0.0 && delta < 1.0) {
        return domain(format!("delta {delta} must lie in (0, 1)"));
    }
    check_n(n, 3, "n")?;
    check_n(m, 3, "m")?;
    let c = family.constants();
    let big_n = n.min(m) as f64;
    let scale = c.c1_sum() * big_n.ln() + c.c2_sum();
    let deviation = scale * (2.0 * (2.0 / delta).ln() / big_n).sqrt();
    let expectation = match oracle {
        Some((p, q)) => {
            check_shape(k, p.len())?;
            plug_in_error_bound(family, p, q, n, m, BoundMode::Oracle)?
        }
        None => plug_in_free_bound(family, k, n, m)?,
    };
    Ok(deviation + expectation)
}

/// Quantization guarantee `(f(0) + f*(0)) / floor(bins / 2)` for a level-set
/// partition with `bins` cells.
pub fn quantization_bound(family: GeneratorFamily, bins: usize) -> Result<f64> {
    family.validate()?;
    if bins < 2 {
        return domain(format!("bins = {bins} must be at least 2"));
    }
    let c = family.constants();
    if !(c.c0.is_finite() && c.c0_star.is_finite()) {
        return Err(Error::UnsupportedFamily(family.to_string()));
    }
    Ok((c.c0 + c.c0_star) / (bins / 2) as f64)
}

/// Constant-free total error `(sqrt(k/n) + k/n) ln n + 1/k`.
pub fn total_error_bound(k: usize, n: u64) -> Result<f64> {
    if k == 0 {
        return domain("k must be positive");
    }
    Ok(simplified_bound(k, n)? + 1.0 / k as f64)
}

/// Total error with the family's constants:
/// `(c1 ln N + c2)(sqrt(k/N) + k/N) + (f(0) + f*(0)) / k`.
pub fn total_error_bound_with_constants(family: GeneratorFamily, k: usize, n: u64, m: u64) -> Result<f64> {
    if k == 0 {
        return domain("k must be positive");
    }
    let c = family.constants();
    Ok(plug_in_free_bound(family, k, n, m)? + (c.c0 + c.c0_star) / k as f64)
}

/// Quantization level `round(n^(1/3))`, at least 2.
pub fn suggest_k(n: u64) -> usize {
    ((n as f64).cbrt().round() as usize).max(2)
}

/// Everything the `bounds` command reports for one configuration.
///
/// Distribution-dependent fields are `None` when no pair is supplied.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_bound: Option<f64>,
    pub free_bound: f64,
    pub c1: f64,
    pub c2: f64,
    pub k: usize,
    pub n: u64,
    pub m: u64,
    pub delta: f64,
    pub high_prob_epsilon: f64,
}

/// Builds a [`BoundReport`]. `b` is the add-constant used for `gamma`.
pub fn bound_report(
    family: GeneratorFamily,
    k: usize,
    n: u64,
    m: u64,
    delta: f64,
    b: f64,
    pair: Option<(&DiscreteDistribution, &DiscreteDistribution)>,
) -> Result<BoundReport> {
    family.require_bounded()?;
    let c = family.constants();
    let free_bound = plug_in_free_bound(family, k, n, m)?;
    let high_prob_epsilon = high_prob_epsilon(family, k, n, m, delta, None)?;
    let mut report = BoundReport {
        alpha_p: None,
        alpha_q: None,
        beta_p: None,
        beta_q: None,
        gamma_p: None,
        gamma_q: None,
        oracle_bound: None,
        free_bound,
        c1: c.c1_sum(),
        c2: c.c2_sum(),
        k,
        n,
        m,
        delta,
        high_prob_epsilon,
    };
    if let Some((p, q)) = pair {
        check_shape(p.len(), q.len())?;
        check_shape(k, p.len())?;
        report.alpha_p = Some(alpha(p, n)?);
        report.alpha_q = Some(alpha(q, m)?);
        report.beta_p = Some(beta_exact(p, n)?);
        report.beta_q = Some(beta_exact(q, m)?);
        report.gamma_p = Some(gamma(p, n, b)?);
        report.gamma_q = Some(gamma(q, m, b)?);
        report.oracle_bound = Some(plug_in_error_bound(family, p, q, n, m, BoundMode::Oracle)?);
    }
    Ok(report)
}
