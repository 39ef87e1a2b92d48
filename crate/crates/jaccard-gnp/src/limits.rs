//! Regime classification for (n, p(n)) families, the standardization
//! transforms of the pair and average limit laws, and the reference-law
//! numerics (normal CDF, Poisson pmf, characteristic functions).
//!
//! A family's regime is decided symbolically from its parametric form by
//! comparing exponents and coefficients — never by numeric extrapolation,
//! which can misclassify slowly converging families.
//!
//! The pair index has five regimes driven by `np^2(1-p)`, `np^2`, and
//! `n(1-p)`:
//!
//! - `np^2(1-p) -> inf`: centered and scaled J is asymptotically standard
//!   normal;
//! - `np^2 -> lambda in (0,inf)`: `2npJ` converges to Poisson(lambda);
//! - `np^2 -> 0`: `npJ` vanishes in probability;
//! - `n(1-p) -> c in (0,inf)`: `n(1-J)` converges to Poisson(2c);
//! - `n(1-p) -> 0`: `n(1-J)` vanishes in probability.
//!
//! The all-pairs average is asymptotically normal under `np -> inf` and
//! `n^2(1-p) -> inf`, tracked independently as `avg_clt_applies`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::kahan::KahanSum;
use crate::moments::mean_jaccard;

/// Parametric forms for p = p(n).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProbabilityFamily {
    /// p = p0 for all n.
    Constant(f64),
    /// p = c * n^(-gamma), the sparse side.
    PowerLaw { c: f64, gamma: f64 },
    /// p = 1 - c * n^(-gamma), the dense side.
    DenseComplement { c: f64, gamma: f64 },
}

impl ProbabilityFamily {
    /// Validates parameters: c > 0, gamma >= 0, and p(n) in (0,1) for all
    /// n above some threshold.
    pub fn validate(&self) -> Result<()> {
        match *self {
            ProbabilityFamily::Constant(p0) => {
                if p0.is_finite() && 0.0 < p0 && p0 < 1.0 {
                    Ok(())
                } else {
                    Err(invalid(format!("constant family requires p in (0,1), got {p0}")))
                }
            }
            ProbabilityFamily::PowerLaw { c, gamma }
            | ProbabilityFamily::DenseComplement { c, gamma } => {
                if !(c > 0.0 && c.is_finite()) {
                    return Err(invalid(format!("family requires c > 0, got {c}")));
                }
                if !(gamma >= 0.0 && gamma.is_finite()) {
                    return Err(invalid(format!("family requires gamma >= 0, got {gamma}")));
                }
                if gamma == 0.0 && c >= 1.0 {
                    return Err(invalid(format!(
                        "family with gamma = 0 and c = {c} never lies in (0,1)"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Smallest n >= 2 with p(n) in (0,1) (constant for all larger n).
    pub fn n_min(&self) -> Result<usize> {
        self.validate()?;
        match *self {
            ProbabilityFamily::Constant(_) => Ok(2),
            ProbabilityFamily::PowerLaw { c, gamma }
            | ProbabilityFamily::DenseComplement { c, gamma } => {
                if gamma == 0.0 {
                    return Ok(2);
                }
                // need c * n^(-gamma) < 1, i.e. n > c^(1/gamma)
                let bound = c.powf(1.0 / gamma);
                let mut n = (bound.floor() as usize + 1).max(2);
                while self.eval_unchecked(n) <= 0.0 || self.eval_unchecked(n) >= 1.0 {
                    n += 1;
                }
                Ok(n)
            }
        }
    }

    fn eval_unchecked(&self, n: usize) -> f64 {
        match *self {
            ProbabilityFamily::Constant(p0) => p0,
            ProbabilityFamily::PowerLaw { c, gamma } => c * (n as f64).powf(-gamma),
            ProbabilityFamily::DenseComplement { c, gamma } => 1.0 - c * (n as f64).powf(-gamma),
        }
    }

    /// p(n); errors when n is below the family's validity threshold.
    pub fn eval(&self, n: usize) -> Result<f64> {
        let n_min = self.n_min()?;
        if n < n_min {
            return Err(invalid(format!(
                "family is only valid for n >= {n_min}, got {n}"
            )));
        }
        Ok(self.eval_unchecked(n))
    }

    /// Parses the spec grammar `const:<p>`, `pow:<c>:<gamma>`,
    /// `dense:<c>:<gamma>`.
    pub fn parse(spec: &str) -> Result<ProbabilityFamily> {
        let parts: Vec<&str> = spec.split(':').collect();
        let num = |tok: &str| -> Result<f64> {
            tok.parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad number '{tok}' in family spec: {e}")))
        };
        let family = match parts.as_slice() {
            ["const", p] => ProbabilityFamily::Constant(num(p)?),
            ["pow", c, gamma] => ProbabilityFamily::PowerLaw { c: num(c)?, gamma: num(gamma)? },
            ["dense", c, gamma] => {
                ProbabilityFamily::DenseComplement { c: num(c)?, gamma: num(gamma)? }
            }
            _ => {
                return Err(Error::Parse(format!(
                    "bad family spec '{spec}'; expected const:<p>, pow:<c>:<gamma>, or dense:<c>:<gamma>"
                )))
            }
        };
        family.validate()?;
        Ok(family)
    }
}

impl std::fmt::Display for ProbabilityFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            ProbabilityFamily::Constant(p0) => write!(f, "const:{p0}"),
            ProbabilityFamily::PowerLaw { c, gamma } => write!(f, "pow:{c}:{gamma}"),
            ProbabilityFamily::DenseComplement { c, gamma } => write!(f, "dense:{c}:{gamma}"),
        }
    }
}

/// Limit of a nonnegative sequence determined symbolically.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Limit {
    Zero,
    Finite(f64),
    Infinite,
}

impl Limit {
    /// Limit of `coeff * n^exponent` with coeff > 0.
    fn of_power(coeff: f64, exponent: f64) -> Limit {
        if exponent > 0.0 {
            Limit::Infinite
        } else if exponent < 0.0 {
            Limit::Zero
        } else {
            Limit::Finite(coeff)
        }
    }
}

/// Pair-index regime of a family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PairRegime {
    /// np^2(1-p) -> inf: standardized J is asymptotically N(0,1).
    Normal,
    /// np^2 -> lambda: 2npJ is asymptotically Poisson(lambda).
    Poisson { lambda: f64 },
    /// np^2 -> 0: npJ -> 0 in probability.
    DegenerateZero,
    /// n(1-p) -> c: n(1-J) is asymptotically Poisson(2c).
    DensePoisson { c: f64 },
    /// n(1-p) -> 0: n(1-J) -> 0 in probability.
    DenseDegenerateZero,
    /// The family falls outside the covered cases.
    Unclassified,
}

impl PairRegime {
    /// Poisson parameter of the limit law, where one applies
    /// (lambda for the sparse case, 2c for the dense case).
    pub fn poisson_parameter(&self) -> Option<f64> {
        match *self {
            PairRegime::Poisson { lambda } => Some(lambda),
            PairRegime::DensePoisson { c } => Some(2.0 * c),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            PairRegime::Normal => "standard_normal".into(),
            PairRegime::Poisson { lambda } => format!("poisson({lambda})"),
            PairRegime::DegenerateZero | PairRegime::DenseDegenerateZero => {
                "degenerate_zero".into()
            }
            PairRegime::DensePoisson { c } => format!("poisson({})", 2.0 * c),
            PairRegime::Unclassified => "unclassified".into(),
        }
    }
}

/// Classification of a family: the pair regime plus whether the
/// average-index CLT conditions hold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeClass {
    pub pair_regime: PairRegime,
    /// Poisson parameter of the pair limit law where one applies.
    pub limit_param: Option<f64>,
    /// np -> inf and n^2(1-p) -> inf both hold.
    pub avg_clt_applies: bool,
}

/// Symbolic limits of the five deciding quantities for a family.
struct FamilyLimits {
    np2_1mp: Limit,
    np2: Limit,
    n_1mp: Limit,
    np: Limit,
    n2_1mp: Limit,
}

fn family_limits(family: &ProbabilityFamily) -> FamilyLimits {
    match *family {
        ProbabilityFamily::Constant(p0) => FamilyLimits {
            np2_1mp: Limit::Infinite,
            np2: Limit::Infinite,
            n_1mp: Limit::Infinite,
            np: Limit::Infinite,
            n2_1mp: Limit::Infinite,
        }
        .scaled_by(p0),
        ProbabilityFamily::PowerLaw { c, gamma } => {
            if gamma == 0.0 {
                return family_limits(&ProbabilityFamily::Constant(c));
            }
            FamilyLimits {
                // 1-p -> 1, so np^2(1-p) matches np^2 = c^2 n^(1-2g)
                np2_1mp: Limit::of_power(c * c, 1.0 - 2.0 * gamma),
                np2: Limit::of_power(c * c, 1.0 - 2.0 * gamma),
                n_1mp: Limit::Infinite,
                np: Limit::of_power(c, 1.0 - gamma),
                n2_1mp: Limit::Infinite,
            }
        }
        ProbabilityFamily::DenseComplement { c, gamma } => {
            if gamma == 0.0 {
                return family_limits(&ProbabilityFamily::Constant(1.0 - c));
            }
            FamilyLimits {
                // p -> 1, so np^2(1-p) matches n(1-p) = c n^(1-g)
                np2_1mp: Limit::of_power(c, 1.0 - gamma),
                np2: Limit::Infinite,
                n_1mp: Limit::of_power(c, 1.0 - gamma),
                np: Limit::Infinite,
                n2_1mp: Limit::of_power(c, 2.0 - gamma),
            }
        }
    }
}

impl FamilyLimits {
    /// For a constant family everything diverges; no scaling is actually
    /// needed, the coefficient is kept only for symmetry of the API.
    fn scaled_by(self, _p0: f64) -> FamilyLimits {
        self
    }
}

/// Maps a family to its pair regime and average-CLT applicability.
pub fn classify(family: &ProbabilityFamily) -> Result<RegimeClass> {
    family.validate()?;
    let limits = family_limits(family);
    let pair_regime = match limits.np2_1mp {
        Limit::Infinite => PairRegime::Normal,
        _ => match limits.np2 {
            Limit::Finite(lambda) if lambda > 0.0 => PairRegime::Poisson { lambda },
            Limit::Zero => PairRegime::DegenerateZero,
            _ => match limits.n_1mp {
                Limit::Finite(c) if c > 0.0 => PairRegime::DensePoisson { c },
                Limit::Zero => PairRegime::DenseDegenerateZero,
                _ => PairRegime::Unclassified,
            },
        },
    };
    let avg_clt_applies =
        limits.np == Limit::Infinite && limits.n2_1mp == Limit::Infinite;
    Ok(RegimeClass {
        pair_regime,
        limit_param: pair_regime.poisson_parameter(),
        avg_clt_applies,
    })
}

/// Applies the regime's standardization to one pair Jaccard value:
/// normal regime centers at p/(2-p) and scales by sqrt(n(2-p)^3 / 2(1-p));
/// sparse regimes scale to `2npJ` / `npJ`; dense regimes to `n(1-J)`.
pub fn standardize_pair(j: f64, n: usize, p: f64, regime: PairRegime) -> Result<f64> {
    let nf = n as f64;
    match regime {
        PairRegime::Normal => {
            if !(0.0 < p && p < 1.0) {
                return Err(invalid(format!(
                    "normal-regime standardization requires p in (0,1), got {p}"
                )));
            }
            let scale = (nf * (2.0 - p).powi(3) / (2.0 * (1.0 - p))).sqrt();
            Ok(scale * (j - mean_jaccard(p)))
        }
        PairRegime::Poisson { .. } => Ok(2.0 * nf * p * j),
        PairRegime::DegenerateZero => Ok(nf * p * j),
        PairRegime::DensePoisson { .. } | PairRegime::DenseDegenerateZero => Ok(nf * (1.0 - j)),
        PairRegime::Unclassified => Err(invalid("cannot standardize an unclassified regime")),
    }
}

/// Standardization of the all-pairs average:
/// `n (2-p)^2 / sqrt(8 p (1-p)) * (J_avg - p/(2-p))`.
pub fn standardize_average(j_avg: f64, n: usize, p: f64) -> Result<f64> {
    if !(0.0 < p && p < 1.0) {
        return Err(invalid(format!(
            "average standardization requires p in (0,1), got {p}"
        )));
    }
    let nf = n as f64;
    Ok(nf * (2.0 - p) * (2.0 - p) / (8.0 * p * (1.0 - p)).sqrt() * (j_avg - mean_jaccard(p)))
}

/// Characteristic function of the negated centered contribution `-V`:
/// `p^2 e^(-2it(1-p)) + 2p(1-p) e^(itp) + (1-p)^2`.
pub fn cf_neg_contribution(t: f64, p: f64) -> Complex64 {
    let q = 1.0 - p;
    Complex64::new(0.0, -2.0 * t * q).exp() * (p * p)
        + Complex64::new(0.0, t * p).exp() * (2.0 * p * q)
        + q * q
}

/// Limit characteristic function `exp(2c (e^(it) - it - 1))`, the CF of
/// `Poisson(2c) - 2c`.
pub fn cf_poisson_centered(t: f64, c: f64) -> Result<Complex64> {
    if !(c > 0.0) {
        return Err(invalid(format!("requires c > 0, got {c}")));
    }
    let e_it = Complex64::new(0.0, t).exp();
    Ok((2.0 * c * (e_it - Complex64::new(1.0, t))).exp())
}

/// Standard normal CDF via the complementary error function,
/// `Phi(x) = erfc(-x / sqrt(2)) / 2`; absolute error well below 1e-10.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Poisson pmf in log space: `exp(k ln l - l - ln k!)`.
pub fn poisson_pmf(k: u64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(invalid(format!("requires lambda > 0, got {lambda}")));
    }
    let mut ln_factorial = KahanSum::default();
    for i in 1..=k {
        ln_factorial.add((i as f64).ln());
    }
    Ok((k as f64 * lambda.ln() - lambda - ln_factorial.value()).exp())
}
