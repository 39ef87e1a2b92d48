//! Exact and asymptotic moments of the pair Jaccard index, and the
//! binomial (inverse-)moment numerics underneath them.
//!
//! The pair index has mean `p/(2-p)` exactly for every n >= 2. Its exact
//! variance is driven by the first inverse moment of `T ~ Bin(n-2, p(2-p))`:
//!
//! ```text
//! Var[J] = 2 p (1-p) / (2-p)^2 * sum_{m>=1} P(T=m)/m
//! ```
//!
//! which approaches `2(1-p) / (n (2-p)^3)` with an O(1/np) relative
//! correction as np grows.
//!
//! Exact expectations over a binomial support are full-support sums for
//! small n and mode-anchored recurrences with far-tail truncation
//! (truncated mass below 1e-15; the retained mass is reported) for large
//! n, with compensated accumulation throughout. n up to 1e6 runs in
//! milliseconds.

use crate::error::{check_probability, invalid, Result};
use crate::kahan::KahanSum;

/// E[J] = p/(2-p), exact for all n >= 2.
pub fn mean_jaccard(p: f64) -> f64 {
    p / (2.0 - p)
}

/// E[S | T = m] = m p / (2-p).
pub fn conditional_mean_s(m: u64, p: f64) -> f64 {
    m as f64 * p / (2.0 - p)
}

/// Var[S | T = m] = 2 m p (1-p) / (2-p)^2.
pub fn conditional_var_s(m: u64, p: f64) -> f64 {
    2.0 * m as f64 * p * (1.0 - p) / ((2.0 - p) * (2.0 - p))
}

/// A value plus a flag marking a degenerate boundary case (p or q in
/// {0,1}) where the quantity collapses rather than erroring, so CLI
/// boundary sweeps stay total.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flagged {
    pub value: f64,
    pub degenerate: bool,
}

/// ln C(n,m) as a compensated sum of `ln((n-m+k)/k)`, k = 1..=min(m,n-m).
///
/// Summing ratio logs keeps every term O(ln n) so no large-magnitude
/// cancellation enters the exponent.
fn ln_choose(n: u64, m: u64) -> f64 {
    debug_assert!(m <= n);
    let m = m.min(n - m);
    let mut acc = KahanSum::default();
    for k in 1..=m {
        acc.add(((n - m + k) as f64 / k as f64).ln());
    }
    acc.value()
}

fn ln_pmf(n: u64, q: f64, m: u64) -> f64 {
    debug_assert!(m <= n);
    if q == 0.0 {
        return if m == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if q == 1.0 {
        return if m == n { 0.0 } else { f64::NEG_INFINITY };
    }
    // For q >= 1/2 the subtraction 1-q is exact (Sterbenz); below it,
    // log1p avoids the rounding of 1-q.
    let ln_1mq = if q >= 0.5 { (1.0 - q).ln() } else { libm::log1p(-q) };
    ln_choose(n, m) + m as f64 * q.ln() + (n - m) as f64 * ln_1mq
}

/// Binomial pmf `C(n,m) q^m (1-q)^(n-m)` in log space.
pub fn binom_pmf(n: u64, q: f64, m: u64) -> Result<f64> {
    check_probability(q, "q")?;
    if m > n {
        return Err(invalid(format!("m = {m} out of range for n = {n}")));
    }
    Ok(ln_pmf(n, q, m).exp())
}

pub(crate) struct Expectation {
    pub value: f64,
    /// Probability mass covered by the summation window; 1 minus this
    /// bounds the truncation.
    pub mass: f64,
}

/// E[f(X)] for X ~ Bin(n, q) by summation over the support.
///
/// Full support for n <= 2048; otherwise a window of +-45 standard
/// deviations around the mean, swept by the multiplicative pmf recurrence
/// from the mode outward (fixed order, so results are deterministic).
pub(crate) fn binomial_expectation(n: u64, q: f64, f: impl Fn(u64) -> f64) -> Expectation {
    debug_assert!((0.0..=1.0).contains(&q));
    if q == 0.0 || n == 0 {
        return Expectation { value: f(0), mass: 1.0 };
    }
    if q == 1.0 {
        return Expectation { value: f(n), mass: 1.0 };
    }
    let nf = n as f64;
    let (lo, hi) = if n <= 2048 {
        (0u64, n)
    } else {
        let mean = nf * q;
        let sd = (nf * q * (1.0 - q)).sqrt();
        let lo = (mean - 45.0 * sd - 64.0).floor().max(0.0) as u64;
        let hi = ((mean + 45.0 * sd + 64.0).ceil() as u64).min(n);
        (lo, hi)
    };
    let mode = (((n + 1) as f64) * q).floor().min(nf) as u64;
    let mode = mode.clamp(lo, hi);
    let pmf_mode = ln_pmf(n, q, mode).exp();
    let ratio_up = q / (1.0 - q);

    let mut value = KahanSum::default();
    let mut mass = KahanSum::default();

    // downward from the mode: pmf(m-1) = pmf(m) * m (1-q) / ((n-m+1) q)
    let mut pmf = pmf_mode;
    let mut m = mode;
    loop {
        value.add(pmf * f(m));
        mass.add(pmf);
        if m == lo {
            break;
        }
        pmf *= m as f64 / ((n - m + 1) as f64 * ratio_up);
        m -= 1;
    }
    // upward from mode+1: pmf(m+1) = pmf(m) * (n-m) q / ((m+1)(1-q))
    let mut pmf = pmf_mode;
    let mut m = mode;
    while m < hi {
        pmf *= (n - m) as f64 * ratio_up / (m + 1) as f64;
        m += 1;
        value.add(pmf * f(m));
        mass.add(pmf);
    }

    Expectation {
        value: value.value(),
        mass: mass.value(),
    }
}

/// First inverse moment over the positive part of Bin(n, q):
/// `sum_{m=1}^{n} P(X=m)/m`. Degenerate (empty sum) at q = 0.
pub fn inverse_first_moment_positive(n: u64, q: f64) -> Result<Flagged> {
    check_probability(q, "q")?;
    if n < 1 {
        return Err(invalid("inverse moment requires n >= 1"));
    }
    if q == 0.0 {
        return Ok(Flagged { value: 0.0, degenerate: true });
    }
    let e = binomial_expectation(n, q, |m| if m == 0 { 0.0 } else { 1.0 / m as f64 });
    Ok(Flagged { value: e.value, degenerate: false })
}

/// Leading-order value `1/(nq)` of the positive-part inverse moment.
pub fn inverse_first_moment_asymptotic(n: u64, q: f64) -> f64 {
    1.0 / (n as f64 * q)
}

/// Exact inverse moment together with its `1/(nq)` limit and the relative
/// gap between them (O(1/nq) as nq grows).
#[derive(Debug, Clone, Copy)]
pub struct InverseMomentGap {
    pub exact: f64,
    pub asymptotic: f64,
    pub relative_gap: f64,
    pub degenerate: bool,
}

pub fn inverse_first_moment_gap(n: u64, q: f64) -> Result<InverseMomentGap> {
    let exact = inverse_first_moment_positive(n, q)?;
    if exact.degenerate {
        return Ok(InverseMomentGap {
            exact: 0.0,
            asymptotic: 0.0,
            relative_gap: 0.0,
            degenerate: true,
        });
    }
    let asymptotic = inverse_first_moment_asymptotic(n, q);
    Ok(InverseMomentGap {
        exact: exact.value,
        asymptotic,
        relative_gap: (exact.value - asymptotic).abs() / exact.value,
        degenerate: false,
    })
}

/// Exact Var[J] via the law of total variance over T ~ Bin(n-2, p(2-p)).
/// Returns a flagged zero at p in {0,1} where J is constant.
pub fn var_jaccard_exact(n: u64, p: f64) -> Result<Flagged> {
    check_probability(p, "p")?;
    if n < 3 {
        return Err(invalid(format!("variance requires n >= 3, got {n}")));
    }
    if p == 0.0 || p == 1.0 {
        return Ok(Flagged { value: 0.0, degenerate: true });
    }
    let q = p * (2.0 - p);
    let inv = inverse_first_moment_positive(n - 2, q)?;
    Ok(Flagged {
        value: 2.0 * p * (1.0 - p) / ((2.0 - p) * (2.0 - p)) * inv.value,
        degenerate: false,
    })
}

/// Leading-order variance `2(1-p) / (n (2-p)^3)`.
pub fn var_jaccard_asymptotic(n: u64, p: f64) -> f64 {
    2.0 * (1.0 - p) / (n as f64 * (2.0 - p).powi(3))
}

/// E[((n+a)p / (b+X) - 1)^2] for X ~ Bin(n,p); O(1/np) as np grows.
pub fn mean_sq_ratio_error(n: u64, p: f64, a: f64, b: f64) -> Result<f64> {
    check_probability(p, "p")?;
    if n < 1 || p == 0.0 {
        return Err(invalid("requires n >= 1 and p > 0"));
    }
    if !(a >= 0.0) || !(b > 0.0) {
        return Err(invalid(format!("requires a >= 0 and b > 0, got a={a} b={b}")));
    }
    let target = (n as f64 + a) * p;
    Ok(binomial_expectation(n, p, |m| {
        let r = target / (b + m as f64) - 1.0;
        r * r
    })
    .value)
}

/// E[1/(b+X)^alpha] for X ~ Bin(n,p); approaches `(np)^-alpha`.
pub fn shifted_inverse_moment(n: u64, p: f64, b: f64, alpha: f64) -> Result<f64> {
    check_probability(p, "p")?;
    if n < 1 || p == 0.0 {
        return Err(invalid("requires n >= 1 and p > 0"));
    }
    if !(b > 0.0) || !(alpha > 0.0) {
        return Err(invalid(format!("requires b > 0 and alpha > 0, got b={b} alpha={alpha}")));
    }
    Ok(binomial_expectation(n, p, |m| (b + m as f64).powf(-alpha)).value)
}

/// Mean, exact variance, asymptotic variance and their relative gap for
/// the pair Jaccard index at (n, p).
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct MomentReport {
    pub n: u64,
    pub p: f64,
    pub mean: f64,
    pub var_exact: f64,
    pub var_asymptotic: f64,
    pub relative_gap: f64,
    pub degenerate: bool,
}

pub fn moment_report(n: u64, p: f64) -> Result<MomentReport> {
    let exact = var_jaccard_exact(n, p)?;
    let asymptotic = if exact.degenerate { 0.0 } else { var_jaccard_asymptotic(n, p) };
    let relative_gap = if exact.degenerate || exact.value == 0.0 {
        0.0
    } else {
        (exact.value - asymptotic).abs() / exact.value
    };
    Ok(MomentReport {
        n,
        p,
        mean: mean_jaccard(p),
        var_exact: exact.value,
        var_asymptotic: asymptotic,
        relative_gap,
        degenerate: exact.degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_fixed_points_and_monotonicity() {
        assert_eq!(mean_jaccard(0.0), 0.0);
        assert_eq!(mean_jaccard(1.0), 1.0);
        assert!((mean_jaccard(0.5) - 1.0 / 3.0).abs() < 1e-15);
        let mut prev = -1.0;
        for i in 0..=100 {
            let v = mean_jaccard(i as f64 / 100.0);
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn conditional_moments() {
        assert_eq!(conditional_mean_s(0, 0.7), 0.0);
        assert_eq!(conditional_var_s(0, 0.7), 0.0);
        assert!((conditional_mean_s(2, 0.5) - 2.0 / 3.0).abs() < 1e-15);
        assert!((conditional_var_s(2, 0.5) - 4.0 / 9.0).abs() < 1e-15);
    }

    /// Exact pmf for n small enough that C(n,m) fits in u128.
    fn pmf_exact_small(n: u64, q: f64, m: u64) -> f64 {
        let mut c: u128 = 1;
        for k in 1..=m.min(n - m) {
            c = c * (n - m.min(n - m) + k) as u128 / k as u128;
        }
        c as f64 * q.powi(m as i32) * (1.0 - q).powi((n - m) as i32)
    }

    #[test]
    fn pmf_trivial_and_hand_values() {
        assert_eq!(binom_pmf(2, 0.5, 1).unwrap(), 0.5);
        assert_eq!(binom_pmf(7, 0.0, 0).unwrap(), 1.0);
        assert_eq!(binom_pmf(7, 0.0, 3).unwrap(), 0.0);
        assert_eq!(binom_pmf(7, 1.0, 7).unwrap(), 1.0);
        let v = binom_pmf(10, 0.3, 3).unwrap();
        assert!((v - 0.266827932).abs() < 1e-9);
        assert!(binom_pmf(10, 0.3, 11).is_err());
        assert!(binom_pmf(10, 1.3, 1).is_err());
    }

    #[test]
    fn pmf_matches_exact_small_oracle() {
        for n in [5u64, 17, 60, 120] {
            for q in [0.07, 0.3, 0.5, 0.77] {
                for m in 0..=n {
                    let got = binom_pmf(n, q, m).unwrap();
                    let want = pmf_exact_small(n, q, m);
                    let tol = 1e-13 * want.max(1e-300);
                    assert!((got - want).abs() <= tol, "n={n} q={q} m={m}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn pmf_matches_high_precision_oracle() {
        // frozen 20-digit reference values
        let cases = [
            (10_000u64, 0.5, 5000u64, 0.0079786461393821537604),
            (10_000, 0.5, 4800, 2.6729691794219091192e-6),
            (10_000, 0.3, 3100, 0.00080943155127828531197),
            (10_000, 0.9, 8950, 0.0033105365519752408726),
            (1000, 0.2, 210, 0.022737342979483466663),
            (637, 0.123, 80, 0.04672021036162570358),
        ];
        for (n, q, m, want) in cases {
            let got = binom_pmf(n, q, m).unwrap();
            let rel = (got - want).abs() / want;
            assert!(rel <= 1e-12, "n={n} q={q} m={m}: rel {rel:.3e}");
        }
    }

    #[test]
    fn pmf_normalizes() {
        for (n, q) in [(10_000u64, 0.5), (2000, 0.03)] {
            let mut acc = KahanSum::default();
            for m in 0..=n {
                acc.add(binom_pmf(n, q, m).unwrap());
            }
            assert!((acc.value() - 1.0).abs() < 1e-11, "n={n} q={q}");
        }
    }

    #[test]
    fn expectation_window_keeps_mass() {
        for (n, q) in [(5_000u64, 0.4), (1_000_000, 0.5), (300_000, 0.001)] {
            let e = binomial_expectation(n, q, |_| 1.0);
            assert!((e.mass - 1.0).abs() < 1e-10, "n={n} q={q} mass {}", e.mass);
            assert!((e.value - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn expectation_matches_mean_and_second_moment() {
        let (n, q) = (50_000u64, 0.27);
        let nq = n as f64 * q;
        let mean = binomial_expectation(n, q, |m| m as f64).value;
        assert!((mean - nq).abs() / nq < 1e-10);
        let var = binomial_expectation(n, q, |m| (m as f64 - nq) * (m as f64 - nq)).value;
        let want = nq * (1.0 - q);
        assert!((var - want).abs() / want < 1e-8, "var {var} want {want}");
    }

    #[test]
    fn inverse_moment_values() {
        // closed-form two-term sum at n=2
        let v = inverse_first_moment_positive(2, 0.5).unwrap();
        assert!(!v.degenerate);
        assert!((v.value - 0.625).abs() < 1e-15);
        // X == 1
        let v = inverse_first_moment_positive(1, 1.0).unwrap();
        assert_eq!(v.value, 1.0);
        // frozen full-sum oracle values
        for (n, q, want) in [
            (10u64, 0.3, 0.4049636360925),
            (200, 0.25, 0.020311089264028985256),
            (10_000, 0.5, 0.00020002000600260150108),
        ] {
            let got = inverse_first_moment_positive(n, q).unwrap().value;
            assert!((got - want).abs() / want < 1e-12, "n={n} q={q}");
        }
        // degenerate flag at q = 0
        let v = inverse_first_moment_positive(5, 0.0).unwrap();
        assert!(v.degenerate && v.value == 0.0);
    }

    #[test]
    fn inverse_moment_near_asymptote() {
        let g = inverse_first_moment_gap(10_000, 0.5).unwrap();
        assert!((g.exact - 2.0e-4).abs() / 2.0e-4 < 0.01);
        // nq * sum -> 1 with O(1/nq) gap; slack 30/(nq)
        for (n, q) in [(1000u64, 0.1), (10_000, 0.1), (100_000, 0.1)] {
            let nq = n as f64 * q;
            let sum = inverse_first_moment_positive(n, q).unwrap().value;
            assert!((nq * sum - 1.0).abs() <= 30.0 / nq, "nq={nq}: {}", nq * sum);
        }
    }

    /// Brute-force Var[J12] by enumerating all 2^(2(n-2)) configurations
    /// of rows 1 and 2.
    fn var_by_enumeration(n: u64, p: f64) -> f64 {
        let k = (n - 2) as u32;
        let mut mean = 0.0;
        let mut second = 0.0;
        for mask in 0u64..(1 << (2 * k)) {
            let row1 = mask & ((1 << k) - 1);
            let row2 = mask >> k;
            let ones = mask.count_ones();
            let prob = p.powi(ones as i32) * (1.0 - p).powi((2 * k - ones) as i32);
            let s = (row1 & row2).count_ones() as f64;
            let t = (row1 | row2).count_ones() as f64;
            let j = if t > 0.0 { s / t } else { p / (2.0 - p) };
            mean += prob * j;
            second += prob * j * j;
        }
        second - mean * mean
    }

    #[test]
    fn variance_matches_enumeration() {
        for n in [3u64, 4, 5] {
            for p in [0.2, 0.5, 0.8] {
                let got = var_jaccard_exact(n, p).unwrap().value;
                let want = var_by_enumeration(n, p);
                assert!((got - want).abs() <= 1e-12, "n={n} p={p}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn variance_values_and_flags() {
        let v = var_jaccard_exact(3, 0.5).unwrap();
        assert!((v.value - 1.0 / 6.0).abs() < 1e-15);
        let v = var_jaccard_exact(500, 0.2).unwrap();
        assert!((v.value - 0.00055288530786503906292).abs() / v.value < 1e-12);
        let v = var_jaccard_exact(100, 1.0).unwrap();
        assert!(v.degenerate && v.value == 0.0);
        assert!(var_jaccard_exact(2, 0.5).is_err());
    }

    #[test]
    fn asymptotic_variance_values() {
        assert_eq!(var_jaccard_asymptotic(100, 1.0), 0.0);
        let v = var_jaccard_asymptotic(1000, 0.5);
        assert!((v - 1.0 / 3375.0).abs() < 1e-18);
        assert!((var_jaccard_asymptotic(2000, 0.5) - v / 2.0).abs() < 1e-18);
    }

    #[test]
    fn exact_variance_approaches_asymptotic() {
        // ratio within 1 +- 15/(np) once np >= 100
        for (n, p) in [(500u64, 0.2), (1000, 0.2), (10_000, 0.2), (5000, 0.6)] {
            let np = n as f64 * p;
            let exact = var_jaccard_exact(n, p).unwrap().value;
            let asym = var_jaccard_asymptotic(n, p);
            let ratio = exact / asym;
            assert!((ratio - 1.0).abs() <= 15.0 / np, "n={n} p={p} ratio {ratio}");
        }
    }

    #[test]
    fn ratio_error_values() {
        let v = mean_sq_ratio_error(1, 0.5, 0.0, 1.0).unwrap();
        assert!((v - 0.40625).abs() < 1e-15);
        let v = mean_sq_ratio_error(1, 1.0, 0.0, 1.0).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
        let v = mean_sq_ratio_error(50, 0.3, 2.0, 1.5).unwrap();
        assert!((v - 0.046709812459482054021).abs() < 1e-14);
        assert!(mean_sq_ratio_error(10, 0.3, -1.0, 1.0).is_err());
        assert!(mean_sq_ratio_error(10, 0.3, 0.0, 0.0).is_err());
    }

    #[test]
    fn ratio_error_is_order_one_over_np() {
        for (n, p) in [(1000u64, 0.1), (10_000, 0.1), (100_000, 0.1)] {
            let np = n as f64 * p;
            let v = mean_sq_ratio_error(n, p, 0.0, 1.0).unwrap();
            assert!(np * v <= 10.0, "np={np}: np*v = {}", np * v);
        }
    }

    #[test]
    fn shifted_inverse_values() {
        let v = shifted_inverse_moment(1, 0.5, 1.0, 1.0).unwrap();
        assert!((v - 0.75).abs() < 1e-15);
        let v = shifted_inverse_moment(1, 1.0, 1.0, 2.0).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
        let v = shifted_inverse_moment(40, 0.6, 1.0, 2.0).unwrap();
        assert!((v - 0.0016809915475531878248).abs() / v < 1e-12);
        assert!(shifted_inverse_moment(10, 0.3, 0.0, 1.0).is_err());
        assert!(shifted_inverse_moment(10, 0.3, 1.0, -2.0).is_err());
    }

    #[test]
    fn shifted_inverse_scaling_limit() {
        // (np)^alpha * E[1/(b+X)^alpha] -> 1
        for alpha in [1.0, 2.0] {
            let (n, p) = (100_000u64, 0.1);
            let np = n as f64 * p;
            let v = shifted_inverse_moment(n, p, 1.0, alpha).unwrap();
            let scaled = np.powf(alpha) * v;
            assert!((scaled - 1.0).abs() < 0.02, "alpha={alpha}: {scaled}");
        }
    }

    #[test]
    fn report_fields_consistent() {
        let r = moment_report(1000, 0.5).unwrap();
        assert!((r.mean - 1.0 / 3.0).abs() < 1e-15);
        assert!((r.var_asymptotic - 2.963e-4).abs() < 1e-6);
        assert!(r.var_exact > 0.0 && !r.degenerate);
        let gap = (r.var_exact - r.var_asymptotic).abs() / r.var_exact;
        assert!((r.relative_gap - gap).abs() < 1e-15);
        let r = moment_report(1000, 1.0).unwrap();
        assert!(r.degenerate && r.var_exact == 0.0 && r.mean == 1.0);
    }
}
