//! Generators of f-divergences.
//!
//! A divergence `D_f(P || Q) = sum_a Q(a) f(P(a) / Q(a))` is fixed by a convex
//! generator `f` with `f(1) = 0`. Its conjugate `f*(t) = t f(1/t)` generates the
//! argument-swapped divergence, `D_{f*}(P || Q) = D_f(Q || P)`.
//!
//! Every family also carries the regularity constants `C0, C0*, C1, C1*, C2, C2*`
//! used by the error bounds:
//!
//! * `C0 = f(0)`, `C0* = f*(0)`;
//! * `|f'(t)| <= C1 * max(1, ln 1/t)` on `(0, 1)`, likewise for `f*` with `C1*`;
//! * `t f''(t) / 2 <= C2` on `(0, inf)`, likewise for `f*` with `C2*`.
//!
//! KL and squared Hellinger are evaluable but violate these assumptions, so
//! some of their constants are infinite and bound operations reject them.

use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};

/// Below this distance from 1, the frontier-integral generator is summed as
/// the power series `sum_{j>=2} (1 - t)^j / (j (j + 1))`.
pub const FI_TAYLOR_THRESHOLD: f64 = 0.1;

/// `f(1 + delta)` for the frontier-integral generator, `|delta| < 0.1`.
pub(crate) fn fi_series(delta: f64) -> f64 {
    let x = -delta;
    let mut pow = x * x;
    let mut sum = 0.0;
    for j in 2..64u32 {
        let term = pow / f64::from(j * (j + 1));
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
        pow *= x;
    }
    sum
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneratorFamily {
    Kl,
    InterpolatedKl(f64),
    Js,
    SkewJs(f64),
    FrontierIntegral,
    InterpolatedChi2(f64),
    LeCam,
    Hellinger,
}

/// Regularity constants of a generator. Infinite entries mean the
/// corresponding assumption fails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityConstants {
    pub c0: f64,
    pub c0_star: f64,
    pub c1: f64,
    pub c1_star: f64,
    pub c2: f64,
    pub c2_star: f64,
}

impl RegularityConstants {
    pub fn all_finite(&self) -> bool {
        [self.c0, self.c0_star, self.c1, self.c1_star, self.c2, self.c2_star].iter().all(|c| c.is_finite())
    }

    /// `c1 = C1 + C1*`.
    pub fn c1_sum(&self) -> f64 {
        self.c1 + self.c1_star
    }

    /// `c2 = max(C2, C0*) + max(C2*, C0)`.
    pub fn c2_sum(&self) -> f64 {
        self.c2.max(self.c0_star) + self.c2_star.max(self.c0)
    }
}

impl GeneratorFamily {
    /// Mixture weight for parameterized families.
    pub fn lambda(&self) -> Option<f64> {
        match *self {
            Self::InterpolatedKl(l) | Self::SkewJs(l) | Self::InterpolatedChi2(l) => Some(l),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.lambda() {
            Some(l) if !(l > 0.0 && l < 1.0) => domain(format!("lambda {l} must lie in (0, 1)")),
            _ => Ok(()),
        }
    }

    /// Whether the family satisfies the regularity assumptions needed by the
    /// error bounds (all constants finite).
    pub fn supports_bounds(&self) -> bool {
        !matches!(self, Self::Kl | Self::Hellinger)
    }

    /// Returns an error unless the family is accepted by bound operations.
    pub fn require_bounded(&self) -> Result<()> {
        self.validate()?;
        if self.supports_bounds() {
            Ok(())
        } else {
            Err(Error::UnsupportedFamily(self.to_string()))
        }
    }

    pub fn is_symmetric(&self) -> bool {
        matches!(self, Self::Js | Self::FrontierIntegral | Self::LeCam | Self::Hellinger)
    }

    /// The family generating the conjugate divergence, when it is itself a
    /// member of the enumeration.
    pub fn conjugate_family(&self) -> Option<Self> {
        match *self {
            Self::SkewJs(l) => Some(Self::SkewJs(1.0 - l)),
            Self::InterpolatedChi2(l) => Some(Self::InterpolatedChi2(1.0 - l)),
            s if s.is_symmetric() => Some(s),
            _ => None,
        }
    }

    /// `f(t)` for `t >= 0`, with `f(0) = f(0+)`. No argument checks.
    pub(crate) fn f(&self, t: f64) -> f64 {
        match *self {
            Self::Kl => {
                if t == 0.0 {
                    1.0
                } else {
                    t * t.ln() - t + 1.0
                }
            }
            Self::InterpolatedKl(l) => {
                let lb = 1.0 - l;
                if t == 0.0 {
                    lb
                } else {
                    t * (t / (l * t + lb)).ln() - lb * (t - 1.0)
                }
            }
            Self::Js => skew_js(0.5, t),
            Self::SkewJs(l) => skew_js(l, t),
            Self::FrontierIntegral => frontier_integral_generator(t),
            Self::InterpolatedChi2(l) => (t - 1.0) * (t - 1.0) / (l * t + 1.0 - l),
            Self::LeCam => (t - 1.0) * (t - 1.0) / (2.0 * (t + 1.0)),
            Self::Hellinger => {
                let r = 1.0 - t.sqrt();
                r * r
            }
        }
    }

    /// `f*(t) = t f(1/t)` for `t >= 0`, with `f*(0) = lim t f(1/t)`.
    pub(crate) fn f_star(&self, t: f64) -> f64 {
        match *self {
            Self::Kl => {
                if t == 0.0 {
                    f64::INFINITY
                } else {
                    -t.ln() + t - 1.0
                }
            }
            Self::InterpolatedKl(l) => {
                let lb = 1.0 - l;
                -(lb * t + l).ln() + lb * (t - 1.0)
            }
            Self::SkewJs(l) => skew_js(1.0 - l, t),
            Self::InterpolatedChi2(l) => (t - 1.0) * (t - 1.0) / ((1.0 - l) * t + l),
            Self::Js | Self::FrontierIntegral | Self::LeCam | Self::Hellinger => self.f(t),
        }
    }

    pub fn constants(&self) -> RegularityConstants {
        let inf = f64::INFINITY;
        match *self {
            Self::Kl => RegularityConstants { c0: 1.0, c0_star: inf, c1: 1.0, c1_star: inf, c2: 0.5, c2_star: inf },
            Self::InterpolatedKl(l) => {
                let lb = 1.0 - l;
                RegularityConstants {
                    c0: lb,
                    c0_star: (1.0 / l).ln() - lb,
                    c1: 1.0,
                    c1_star: lb * lb / l,
                    c2: 0.5,
                    c2_star: lb / (8.0 * l),
                }
            }
            Self::Js => {
                let h = 0.5 * std::f64::consts::LN_2;
                RegularityConstants { c0: h, c0_star: h, c1: 0.5, c1_star: 0.5, c2: 0.25, c2_star: 0.25 }
            }
            Self::SkewJs(l) => {
                let lb = 1.0 - l;
                RegularityConstants {
                    c0: lb * (1.0 / lb).ln(),
                    c0_star: l * (1.0 / l).ln(),
                    c1: l,
                    c1_star: lb,
                    c2: l / 2.0,
                    c2_star: lb / 2.0,
                }
            }
            // C1 = C1* = 1 is the proven value; the summary table lists 4.
            Self::FrontierIntegral => {
                RegularityConstants { c0: 0.5, c0_star: 0.5, c1: 1.0, c1_star: 1.0, c2: 0.5, c2_star: 0.5 }
            }
            Self::InterpolatedChi2(l) => {
                let lb = 1.0 - l;
                RegularityConstants {
                    c0: 1.0 / lb,
                    c0_star: 1.0 / l,
                    c1: 2.0 / (lb * lb),
                    c1_star: 2.0 / (l * l),
                    c2: 4.0 / (27.0 * l * lb * lb),
                    c2_star: 4.0 / (27.0 * l * l * lb),
                }
            }
            Self::LeCam => RegularityConstants {
                c0: 0.5,
                c0_star: 0.5,
                c1: 2.0,
                c1_star: 2.0,
                c2: 8.0 / 27.0,
                c2_star: 8.0 / 27.0,
            },
            Self::Hellinger => {
                RegularityConstants { c0: 1.0, c0_star: 1.0, c1: inf, c1_star: inf, c2: inf, c2_star: inf }
            }
        }
    }
}

fn skew_js(l: f64, t: f64) -> f64 {
    let lb = 1.0 - l;
    let mix = l * t + lb;
    let first = if t == 0.0 { 0.0 } else { l * t * (t / mix).ln() };
    first - lb * mix.ln()
}

fn frontier_integral_generator(t: f64) -> f64 {
    if t == 0.0 {
        return 0.5;
    }
    let delta = t - 1.0;
    if delta.abs() < FI_TAYLOR_THRESHOLD {
        return fi_series(delta);
    }
    (t + 1.0) / 2.0 - t * delta.ln_1p() / delta
}

fn check_argument(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        domain(format!("generator argument {t} must be finite and nonnegative"))
    }
}

/// `f(t)`; `t = 0` returns the limit `f(0+)`.
pub fn generator_value(family: GeneratorFamily, t: f64) -> Result<f64> {
    family.validate()?;
    check_argument(t)?;
    Ok(family.f(t))
}

/// `f*(t) = t f(1/t)`; `t = 0` returns the limit, which is `+inf` for KL.
pub fn conjugate_value(family: GeneratorFamily, t: f64) -> Result<f64> {
    family.validate()?;
    check_argument(t)?;
    Ok(family.f_star(t))
}

/// The regularity constants of `family`.
pub fn constants(family: GeneratorFamily) -> RegularityConstants {
    family.constants()
}

impl fmt::Display for GeneratorFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Kl => write!(f, "kl"),
            Self::InterpolatedKl(l) => write!(f, "ikl:{l}"),
            Self::Js => write!(f, "js"),
            Self::SkewJs(l) => write!(f, "sjs:{l}"),
            Self::FrontierIntegral => write!(f, "fi"),
            Self::InterpolatedChi2(l) => write!(f, "ichi2:{l}"),
            Self::LeCam => write!(f, "lecam"),
            Self::Hellinger => write!(f, "hellinger"),
        }
    }
}

impl FromStr for GeneratorFamily {
    type Err = Error;

    /// Accepts `kl`, `ikl:<l>`, `js`, `sjs:<l>`, `fi`, `ichi2:<l>`, `lecam`,
    /// `hellinger` (case-insensitive; long aliases are also recognized).
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let (name, arg) = match lower.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (lower.as_str(), None),
        };
        let lambda = |arg: Option<&str>| -> Result<f64> {
            let a = arg.ok_or_else(|| Error::Parse { line: 0, msg: format!("family `{s}` needs a lambda") })?;
            a.trim().parse::<f64>().map_err(|_| Error::Parse { line: 0, msg: format!("bad lambda `{a}`") })
        };
        let no_arg = |fam: Self| -> Result<Self> {
            match arg {
                None => Ok(fam),
                Some(_) => Err(Error::Parse { line: 0, msg: format!("family `{name}` takes no parameter") }),
            }
        };
        let family = match name {
            "kl" => no_arg(Self::Kl)?,
            "ikl" | "interpolated-kl" => Self::InterpolatedKl(lambda(arg)?),
            "js" => no_arg(Self::Js)?,
            "sjs" | "skew-js" => Self::SkewJs(lambda(arg)?),
            "fi" | "frontier-integral" => no_arg(Self::FrontierIntegral)?,
            "ichi2" | "interpolated-chi2" => Self::InterpolatedChi2(lambda(arg)?),
            "lecam" | "le-cam" => no_arg(Self::LeCam)?,
            "hellinger" => no_arg(Self::Hellinger)?,
            _ => return Err(Error::Parse { line: 0, msg: format!("unknown family `{s}`") }),
        };
        family.validate()?;
        Ok(family)
    }
}

/// Relative slack accepted by the constant audit. Second derivatives come
/// from finite differences, whose truncation error overshoots a supremum
/// that is approached in a limit.
pub const AUDIT_REL_TOL: f64 = 1e-3;
const AUDIT_ABS_TOL: f64 = 1e-9;
const FIRST_DIFF_STEP: f64 = 1e-6;
// The second difference uses a wider relative step: with 1e-6 the rounding
// error of f (magnitude ~1) divided by h^2 swamps t f''(t) for small t.
const SECOND_DIFF_STEP: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct AuditCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Largest ratio `measured / allowed` over the grid.
    pub worst_ratio: f64,
    /// Grid point where `worst_ratio` was attained.
    pub worst_t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConstantAudit {
    /// The family has infinite constants; nothing to check.
    NotApplicable {
        family: GeneratorFamily,
    },
    Checked {
        family: GeneratorFamily,
        checks: Vec<AuditCheck>,
    },
}

impl ConstantAudit {
    pub fn is_applicable(&self) -> bool {
        matches!(self, Self::Checked { .. })
    }

    /// True when every check passed. Not-applicable audits are not failures.
    pub fn passed(&self) -> bool {
        match self {
            Self::NotApplicable { .. } => true,
            Self::Checked { checks, .. } => checks.iter().all(|c| c.passed),
        }
    }

    pub fn checks(&self) -> &[AuditCheck] {
        match self {
            Self::NotApplicable { .. } => &[],
            Self::Checked { checks, .. } => checks,
        }
    }
}

fn central_first(g: &dyn Fn(f64) -> f64, t: f64) -> f64 {
    let h = FIRST_DIFF_STEP * t;
    (g(t + h) - g(t - h)) / (2.0 * h)
}

fn central_second(g: &dyn Fn(f64) -> f64, t: f64) -> f64 {
    let h = SECOND_DIFF_STEP * t;
    (g(t + h) - 2.0 * g(t) + g(t - h)) / (h * h)
}

fn run_check(
    name: &'static str,
    grid: impl Iterator<Item = f64>,
    measured: impl Fn(f64) -> f64,
    allowed: impl Fn(f64) -> f64,
) -> AuditCheck {
    let mut worst_ratio = 0.0_f64;
    let mut worst_t = f64::NAN;
    let mut passed = true;
    for t in grid {
        let m = measured(t);
        let a = allowed(t);
        if !(m <= a * (1.0 + AUDIT_REL_TOL) + AUDIT_ABS_TOL) {
            passed = false;
        }
        let ratio = if a > 0.0 {
            m / a
        } else if m > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        if ratio > worst_ratio || worst_t.is_nan() {
            worst_ratio = ratio;
            worst_t = t;
        }
    }
    AuditCheck { name, passed, worst_ratio, worst_t }
}

/// Numerically audits the regularity constants of `family` on `grid`
/// with central finite differences.
pub fn verify_constants(family: GeneratorFamily, grid: &[f64]) -> Result<ConstantAudit> {
    family.validate()?;
    if let Some(t) = grid.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return domain(format!("audit grid point {t} must be positive and finite"));
    }
    let c = family.constants();
    if !c.all_finite() {
        return Ok(ConstantAudit::NotApplicable { family });
    }
    let f = move |t: f64| family.f(t);
    let fs = move |t: f64| family.f_star(t);
    let below_one = || grid.iter().copied().filter(|t| *t < 1.0);
    let all = || grid.iter().copied();
    let log_weight = |t: f64| 1.0_f64.max((1.0 / t).ln());

    let checks = vec![
        run_check("C0 = f(0)", std::iter::once(0.0), |_| (family.f(0.0) - c.c0).abs(), |_| 1e-12),
        run_check("C0* = f*(0)", std::iter::once(0.0), |_| (family.f_star(0.0) - c.c0_star).abs(), |_| 1e-12),
        run_check(
            "|f'(t)| <= C1 max(1, ln 1/t)",
            below_one(),
            |t| central_first(&f, t).abs(),
            |t| c.c1 * log_weight(t),
        ),
        run_check(
            "|f*'(t)| <= C1* max(1, ln 1/t)",
            below_one(),
            |t| central_first(&fs, t).abs(),
            |t| c.c1_star * log_weight(t),
        ),
        run_check("t f''(t) / 2 <= C2", all(), |t| t * central_second(&f, t) / 2.0, |_| c.c2),
        run_check("t f*''(t) / 2 <= C2*", all(), |t| t * central_second(&fs, t) / 2.0, |_| c.c2_star),
    ];
    Ok(ConstantAudit::Checked { family, checks })
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALL: [GeneratorFamily; 8] = [
        GeneratorFamily::Kl,
        GeneratorFamily::InterpolatedKl(0.3),
        GeneratorFamily::Js,
        GeneratorFamily::SkewJs(0.3),
        GeneratorFamily::FrontierIntegral,
        GeneratorFamily::InterpolatedChi2(0.3),
        GeneratorFamily::LeCam,
        GeneratorFamily::Hellinger,
    ];

    #[test]
    fn generators_vanish_at_one_and_are_nonnegative() {
        for fam in ALL {
            assert!(fam.f(1.0).abs() < 1e-15, "{fam}");
            assert!(fam.f_star(1.0).abs() < 1e-15, "{fam}");
            for t in log_grid(1e-8, 1e4, 200) {
                assert!(fam.f(t) >= -1e-15, "{fam} f({t}) = {}", fam.f(t));
                assert!(fam.f_star(t) >= -1e-15, "{fam} f*({t})");
            }
        }
    }

    #[test]
    fn conjugate_is_perspective() {
        for fam in ALL {
            for t in log_grid(1e-3, 1e3, 50) {
                let direct = t * fam.f(1.0 / t);
                let closed = fam.f_star(t);
                assert!((direct - closed).abs() <= 1e-10 * (1.0 + closed.abs()), "{fam} at {t}");
            }
        }
    }

    #[test]
    fn frontier_integral_examples() {
        let fi = GeneratorFamily::FrontierIntegral;
        assert_eq!(generator_value(fi, 0.0).unwrap(), 0.5);
        assert!(generator_value(fi, 1.0 + 1e-9).unwrap().abs() < 1e-18);
        assert_eq!(generator_value(fi, 1.0).unwrap(), 0.0);
        for t in log_grid(1e-4, 1e4, 40) {
            assert_eq!(generator_value(fi, t).unwrap(), conjugate_value(fi, t).unwrap());
        }
    }

    #[test]
    fn frontier_integral_continuous_across_taylor_switch() {
        let fi = GeneratorFamily::FrontierIntegral;
        let inside = fi.f(1.0 + 0.099_999_999);
        let outside = fi.f(1.0 + 0.100_000_001);
        assert!((inside - outside).abs() / inside < 1e-7);
        for t in [0.95, 1.0 + 1e-6, 1.05] {
            let d: f64 = t - 1.0;
            let exact = (t + 1.0) / 2.0 - t * d.ln_1p() / d;
            assert!((fi.f(t) - exact).abs() < 1e-15, "{t}");
        }
        assert!((fi.f(1.0 + 1e-6) - 1e-12 / 6.0).abs() < 1e-19);
    }

    #[test]
    fn interpolated_kl_example() {
        // 2 ln(4/3) - 1/2
        let v = generator_value(GeneratorFamily::InterpolatedKl(0.5), 2.0).unwrap();
        assert!((v - 0.075_364_144_903_561_7).abs() < 1e-15, "{v}");
        assert_eq!(conjugate_value(GeneratorFamily::InterpolatedKl(0.4), 1.0).unwrap(), 0.0);
    }

    #[test]
    fn skew_js_conjugate_at_zero() {
        let v = conjugate_value(GeneratorFamily::SkewJs(0.3), 0.0).unwrap();
        assert!((v - 0.3 * (1.0_f64 / 0.3).ln()).abs() < 1e-15);
        assert!((v - 0.361_191_841_297_600_9).abs() < 1e-12);
    }

    #[test]
    fn kl_conjugate_diverges_at_zero() {
        assert_eq!(conjugate_value(GeneratorFamily::Kl, 0.0).unwrap(), f64::INFINITY);
        assert_eq!(generator_value(GeneratorFamily::Kl, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn rejects_bad_arguments() {
        let fi = GeneratorFamily::FrontierIntegral;
        assert!(generator_value(fi, -1.0).is_err());
        assert!(generator_value(fi, f64::NAN).is_err());
        assert!(conjugate_value(fi, f64::INFINITY).is_err());
        assert!(generator_value(GeneratorFamily::SkewJs(1.0), 0.5).is_err());
        assert!(generator_value(GeneratorFamily::InterpolatedKl(0.0), 0.5).is_err());
    }

    #[test]
    fn constants_table_rows() {
        let fi = constants(GeneratorFamily::FrontierIntegral);
        assert_eq!((fi.c0, fi.c0_star, fi.c1, fi.c1_star, fi.c2, fi.c2_star), (0.5, 0.5, 1.0, 1.0, 0.5, 0.5));
        let js = constants(GeneratorFamily::Js);
        let h = 0.5 * 2f64.ln();
        assert_eq!((js.c0, js.c0_star, js.c1, js.c1_star, js.c2, js.c2_star), (h, h, 0.5, 0.5, 0.25, 0.25));
        let l = 0.3;
        let lb = 0.7;
        let chi = constants(GeneratorFamily::InterpolatedChi2(l));
        assert_eq!(chi.c0, 1.0 / lb);
        assert_eq!(chi.c0_star, 1.0 / l);
        assert_eq!(chi.c1, 2.0 / (lb * lb));
        assert_eq!(chi.c1_star, 2.0 / (l * l));
        assert_eq!(chi.c2, 4.0 / (27.0 * l * lb * lb));
        assert_eq!(chi.c2_star, 4.0 / (27.0 * l * l * lb));
        assert_eq!(constants(GeneratorFamily::Kl).c0_star, f64::INFINITY);
        let hel = constants(GeneratorFamily::Hellinger);
        assert!(hel.c1.is_infinite() && hel.c1_star.is_infinite());
        assert!(GeneratorFamily::FrontierIntegral.constants().all_finite());
        assert_eq!(fi.c1_sum(), 2.0);
        assert_eq!(fi.c2_sum(), 1.0);
    }

    #[test]
    fn lecam_is_quarter_of_chi2_at_half() {
        let chi = GeneratorFamily::InterpolatedChi2(0.5);
        for t in log_grid(1e-3, 1e3, 30) {
            assert!((GeneratorFamily::LeCam.f(t) - chi.f(t) / 4.0).abs() < 1e-12 * (1.0 + chi.f(t)));
        }
    }

    #[test]
    fn audit_passes_on_frontier_integral_and_skew_js() {
        let grid = log_grid(1e-6, 1e3, 400);
        for fam in [GeneratorFamily::FrontierIntegral, GeneratorFamily::SkewJs(0.5)] {
            let audit = verify_constants(fam, &grid).unwrap();
            assert!(audit.is_applicable());
            assert!(audit.passed(), "{fam}: {:?}", audit.checks());
        }
    }

    #[test]
    fn audit_not_applicable_for_infinite_constants() {
        let grid = log_grid(1e-6, 1e3, 10);
        for fam in [GeneratorFamily::Hellinger, GeneratorFamily::Kl] {
            let audit = verify_constants(fam, &grid).unwrap();
            assert!(!audit.is_applicable());
            assert!(audit.passed());
        }
    }

    #[test]
    fn audit_catches_understated_constant() {
        // The table's C1 = 4 passes trivially; a C1 of 0.5 must not.
        let grid = log_grid(1e-6, 1e3, 200);
        let f = GeneratorFamily::FrontierIntegral;
        let c1_check = verify_constants(f, &grid).unwrap().checks()[2].clone();
        // |f'(t)| approaches ln(1/t) - 3/2, so the worst ratio is well above 0.5.
        assert!(c1_check.worst_ratio > 0.5 && c1_check.worst_ratio <= 1.0);
    }

    #[test]
    fn parse_roundtrip() {
        for fam in ALL {
            let s = fam.to_string();
            assert_eq!(s.parse::<GeneratorFamily>().unwrap(), fam);
        }
        assert!("ikl".parse::<GeneratorFamily>().is_err());
        assert!("ikl:1.5".parse::<GeneratorFamily>().is_err());
        assert!("fi:0.2".parse::<GeneratorFamily>().is_err());
        assert!("tv".parse::<GeneratorFamily>().is_err());
    }
}
