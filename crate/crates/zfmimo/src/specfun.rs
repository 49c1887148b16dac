//! Self-contained special-function kernel.
//!
//! Everything the closed forms need: Bessel J0, the exponential integral Ei
//! on negative arguments, integer-shape incomplete gamma functions, and the
//! Tricomi confluent hypergeometric U for positive-integer first argument.
//! All gamma-type functions are restricted to integer shape on purpose —
//! every use site has integer parameters, which keeps the values exact
//! finite sums instead of general-purpose approximations.

use std::sync::OnceLock;

use thiserror::Error;

use crate::mpfloat::MpF;
use crate::quad::gauss_laguerre;

/// Value with a coarse absolute-error estimate, for accuracy tracking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub value: f64,
    pub abs_err_estimate: f64,
}

impl EvalResult {
    fn new(value: f64, abs_err_estimate: f64) -> Self {
        EvalResult { value, abs_err_estimate }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SpecFunError {
    #[error("domain error: {0}")]
    Domain(String),
}

/// ln(n!) for integer n, exact summation cached up to the largest n seen.
pub fn ln_factorial(n: usize) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(4097);
        t.push(0.0f64);
        let mut acc = 0.0f64;
        let mut comp = 0.0f64;
        for j in 1..=4096usize {
            // Kahan-compensated running sum of ln j.
            let y = (j as f64).ln() - comp;
            let s = acc + y;
            comp = (s - acc) - y;
            acc = s;
            t.push(acc);
        }
        t
    });
    if n < table.len() {
        table[n]
    } else {
        // Stirling with the standard correction terms; n this large only
        // appears inside log-domain magnitude scans.
        let x = n as f64 + 1.0;
        (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x)
    }
}

/// Zeroth-order Bessel function of the first kind.
///
/// Power series evaluated in extended precision sized to the cancellation
/// (the terms reach ~e^{|x|} before decaying), so the result is accurate to
/// well below the 1e-13 contract over |x| <= 50.
pub fn bessel_j0(x: f64) -> EvalResult {
    assert!(x.is_finite(), "bessel_j0 requires finite input");
    let ax = x.abs();
    if ax == 0.0 {
        return EvalResult::new(1.0, 0.0);
    }
    let prec = 96 + (1.5 * ax).ceil() as u32;
    let q = MpF::from_f64(x, prec).mul(&MpF::from_f64(x, prec)).scale2(-2); // x^2/4
    let mut term = MpF::one(prec);
    let mut sum = MpF::one(prec);
    let mut k = 1u64;
    loop {
        term = term.mul(&q).div_u64(k).div_u64(k);
        sum = if k % 2 == 1 { sum.sub(&term) } else { sum.add(&term) };
        if k as f64 > ax && term.log2_magnitude() < -(prec as i64) {
            break;
        }
        k += 1;
    }
    EvalResult::new(sum.to_f64(), 1e-16 + 2.0f64.powi(-(prec as i32) + 40))
}

/// Exponential integral Ei(x) for x < 0.
///
/// Series on [-1, 0), continued fraction below -1; underflows to -0 once
/// e^x is below the f64 range.
pub fn expint_ei(x: f64) -> Result<EvalResult, SpecFunError> {
    if !(x < 0.0) {
        return Err(SpecFunError::Domain(format!("expint_ei requires x < 0, got {x}")));
    }
    let t = -x;
    if t > 745.0 {
        return Ok(EvalResult::new(-0.0, 1e-300));
    }
    if t <= 1.0 {
        // Ei(x) = gamma + ln|x| + sum x^k/(k k!)
        const EULER: f64 = 0.577215664901532861;
        let mut term = 1.0f64;
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        let mut k = 1u64;
        loop {
            term *= x / k as f64;
            let contrib = term / k as f64;
            let y = contrib - comp;
            let s = sum + y;
            comp = (s - sum) - y;
            sum = s;
            if contrib.abs() < 1e-18 {
                break;
            }
            k += 1;
        }
        let v = EULER + t.ln() + sum;
        Ok(EvalResult::new(v, 1e-16 * (1.0 + v.abs())))
    } else {
        // -Ei(-t) = E1(t) = e^{-t} / (t+1 - 1^2/(t+3 - 2^2/(t+5 - ...)))
        let tiny = 1e-300;
        let mut f = t + 1.0;
        let mut c = f;
        let mut d = 0.0f64;
        let mut k = 1u64;
        loop {
            let a = -((k * k) as f64);
            let b = t + 2.0 * k as f64 + 1.0;
            d = b + a * d;
            if d == 0.0 {
                d = tiny;
            }
            c = b + a / c;
            if c == 0.0 {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
            k += 1;
            if k > 10_000 {
                break;
            }
        }
        let v = -(-t).exp() / f;
        Ok(EvalResult::new(v, 1e-15 * v.abs() + 1e-308))
    }
}

/// Upper incomplete gamma for positive-integer shape:
/// `Gamma(a, x) = (a-1)! e^{-x} sum_{j<a} x^j/j!`.
///
/// The sum is accumulated through Poisson probabilities (each term <= 1), so
/// the only overflow is the mathematical one in `(a-1)!` itself, which
/// saturates to +inf.
pub fn gamma_upper_int(a: i64, x: f64) -> Result<EvalResult, SpecFunError> {
    if a <= 0 {
        return Err(SpecFunError::Domain(format!(
            "gamma_upper_int requires a >= 1, got {a} (negative shapes from index typos are rejected)"
        )));
    }
    if x < 0.0 {
        return Err(SpecFunError::Domain(format!("gamma_upper_int requires x >= 0, got {x}")));
    }
    let a = a as usize;
    // sum of Poisson(x) masses for j = 0..a-1
    let mut mass = (-x).exp();
    let mut sum = mass;
    for j in 1..a {
        mass *= x / j as f64;
        sum += mass;
    }
    let lf = ln_factorial(a - 1);
    if lf > 709.0 {
        // (a-1)! alone exceeds f64; report the mathematically correct overflow.
        return Ok(EvalResult::new(f64::INFINITY, f64::INFINITY));
    }
    let fact = lf.exp();
    Ok(EvalResult::new(fact * sum, fact * sum * 1e-15 * a as f64))
}

/// Regularized lower incomplete gamma for positive-integer shape:
/// `P(a, x) = 1 - e^{-x} sum_{t<a} x^t/t!`.
pub fn gamma_lower_reg_int(a: i64, x: f64) -> Result<EvalResult, SpecFunError> {
    if a <= 0 {
        return Err(SpecFunError::Domain(format!("gamma_lower_reg_int requires a >= 1, got {a}")));
    }
    if x < 0.0 {
        return Err(SpecFunError::Domain(format!("gamma_lower_reg_int requires x >= 0, got {x}")));
    }
    let mut mass = (-x).exp();
    let mut sum = mass;
    for t in 1..a as usize {
        mass *= x / t as f64;
        sum += mass;
    }
    let v = (1.0 - sum).clamp(0.0, 1.0);
    Ok(EvalResult::new(v, 1e-15 * a as f64))
}

/// Tricomi confluent hypergeometric U(a, b, x) for integer a >= 1, integer b,
/// x > 0, from the integral representation
/// `U(a,b,x) = (1/Gamma(a)) ∫_0^∞ e^{-xt} t^{a-1} (1+t)^{b-a-1} dt`.
///
/// Gauss-Laguerre in the scaled variable with log-domain accumulation; the
/// node count doubles until two rules agree. Values beyond f64 range come
/// back as +inf with the log magnitude still correct internally.
pub fn tricomi_u_int(a: i64, b: i64, x: f64) -> Result<EvalResult, SpecFunError> {
    let ln = tricomi_u_ln(a, b, x)?;
    let v = if ln.value > 709.0 { f64::INFINITY } else { ln.value.exp() };
    Ok(EvalResult::new(v, v * (ln.abs_err_estimate + 1e-12)))
}

/// ln U(a, b, x); same contract as [`tricomi_u_int`].
pub fn tricomi_u_ln(a: i64, b: i64, x: f64) -> Result<EvalResult, SpecFunError> {
    if a < 1 {
        return Err(SpecFunError::Domain(format!("tricomi_u requires a >= 1, got {a}")));
    }
    if !(x > 0.0) {
        return Err(SpecFunError::Domain(format!("tricomi_u requires x > 0, got {x}")));
    }
    let am1 = (a - 1) as f64;
    let d = (b - a - 1) as f64;
    // substitute t = s/x: U = x^{-a}/Gamma(a) * ∫ e^{-s} s^{a-1} (1+s/x)^d ds
    let mut prev = f64::NAN;
    let mut err = f64::INFINITY;
    for &n in &[64usize, 128, 256, 512] {
        let (nodes, weights) = laguerre_cached(n);
        let mut maxlog = f64::NEG_INFINITY;
        let logs: Vec<f64> = nodes
            .iter()
            .zip(weights)
            .map(|(&s, &w)| {
                let l = w.ln() + am1 * s.ln() + d * (s / x).ln_1p();
                if l > maxlog {
                    maxlog = l;
                }
                l
            })
            .collect();
        let sum: f64 = logs.iter().map(|l| (l - maxlog).exp()).sum();
        let ln_u = maxlog + sum.ln() - ln_factorial((a - 1) as usize) - a as f64 * x.ln();
        if prev.is_finite() {
            err = (ln_u - prev).abs();
            if err < 1e-11 {
                return Ok(EvalResult::new(ln_u, err));
            }
        }
        prev = ln_u;
    }
    Ok(EvalResult::new(prev, err))
}

fn laguerre_cached(n: usize) -> (&'static [f64], &'static [f64]) {
    static RULES: OnceLock<Vec<(usize, Vec<f64>, Vec<f64>)>> = OnceLock::new();
    let rules = RULES.get_or_init(|| {
        [64usize, 128, 256, 512]
            .iter()
            .map(|&n| {
                let (x, w) = gauss_laguerre(n);
                (n, x, w)
            })
            .collect()
    });
    let r = rules.iter().find(|r| r.0 == n).expect("unsupported Laguerre order");
    (&r.1, &r.2)
}

/// `e^x E1(x) = -e^x Ei(-x)` in f64, building on [`expint_ei`] for moderate x
/// and the continued fraction directly for large x (where e^x overflows).
pub fn eiex(x: f64) -> Result<f64, SpecFunError> {
    if !(x > 0.0) {
        return Err(SpecFunError::Domain(format!("eiex requires x > 0, got {x}")));
    }
    if x <= 600.0 {
        Ok(-x.exp() * expint_ei(-x)?.value)
    } else {
        let m = MpF::from_f64(x, 96);
        Ok(crate::mpfloat::eiex_mp(&m, 96).to_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{gk_adaptive, simpson_adaptive};

    // ------------------------------------------------------------------
    // Independent oracles (kept deliberately naive).
    // ------------------------------------------------------------------

    /// 30-term J0 power series in plain f64 — adequate only for |x| <= ~4,
    /// which covers the frozen example points.
    fn j0_series_oracle(x: f64) -> f64 {
        let q = x * x / 4.0;
        let mut term = 1.0f64;
        let mut sum = 1.0f64;
        for k in 1..=30u64 {
            term *= -q / (k * k) as f64;
            sum += term;
        }
        sum
    }

    /// Ei(-t) for t > 0 by adaptive quadrature of the defining integral,
    /// with the e^{-t} envelope factored out so the tolerance is relative:
    /// Ei(-t) = -e^{-t} ∫_0^∞ e^{-s}/(s+t) ds.
    fn ei_quad_oracle(x: f64) -> f64 {
        let t = -x;
        let magnitude = if t < 1.0 { 1.0 - t.ln() } else { 1.0 / t };
        let (v, _) = gk_adaptive(|s: f64| (-s).exp() / (s + t), 0.0, 80.0, 1e-13 * magnitude, 20000);
        -(-t).exp() * v
    }

    #[test]
    fn j0_trivial_and_derived_values() {
        assert_eq!(bessel_j0(0.0).value, 1.0);
        // First root, frozen from the oracle: j0_series_oracle(2.404825557695773) ~ 3e-17.
        let root = 2.404825557695773;
        assert!(j0_series_oracle(root).abs() < 1e-15);
        assert!(bessel_j0(root).value.abs() < 1e-12);
        // x = 1: oracle gives 0.7651976865579666.
        let oracle = j0_series_oracle(1.0);
        assert!((oracle - 0.7651976865579666).abs() < 1e-15);
        assert!((bessel_j0(1.0).value - oracle).abs() < 1e-14);
        assert!((bessel_j0(1.0).value - 0.7651976866).abs() < 1e-9);
    }

    #[test]
    fn j0_alternates_sign_between_roots() {
        // First ten J0 roots (standard table values, verified to be roots by
        // the implementation itself staying below 1e-10 there).
        let roots = [
            2.404825557695773,
            5.520078110286311,
            8.653727912911013,
            11.791534439014281,
            14.930917708487787,
            18.071063967910924,
            21.21163662987926,
            24.352471530749302,
            27.493479132040253,
            30.634606468431976,
            33.77582021357357,
        ];
        for r in roots {
            assert!(bessel_j0(r).value.abs() < 1e-10);
        }
        let mut expected = -1.0f64; // J0 is negative between root 1 and 2
        for w in roots.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let v = bessel_j0(mid).value;
            assert!(v * expected > 0.0, "sign at {mid} should be {expected}");
            expected = -expected;
        }
    }

    #[test]
    fn ei_examples_against_quadrature_oracle() {
        // Frozen from the oracle: Ei(-1) = -0.21938393439552026,
        // Ei(-2) = -0.04890051070806112.
        assert!((ei_quad_oracle(-1.0) - (-0.21938393439552026)).abs() < 1e-13);
        assert!((ei_quad_oracle(-2.0) - (-0.04890051070806112)).abs() < 1e-13);
        assert!((expint_ei(-1.0).unwrap().value - (-0.21938393440)).abs() < 1e-10);
        assert!((expint_ei(-2.0).unwrap().value - (-0.04890051071)).abs() < 1e-10);
        // Spot relative accuracy across the contract range.
        for &t in &[1e-8, 1e-4, 0.5, 1.0, 3.0, 10.0, 50.0, 300.0, 700.0] {
            let got = expint_ei(-t).unwrap().value;
            let want = ei_quad_oracle(-t);
            assert!(
                (got - want).abs() <= 1e-12 * want.abs(),
                "t={t}: {got} vs {want}"
            );
        }
        // Deep tail underflows to -0.
        let far = expint_ei(-1e6).unwrap().value;
        assert!(far == 0.0 && far.is_sign_negative());
        assert!(expint_ei(0.0).is_err());
        assert!(expint_ei(1.0).is_err());
    }

    #[test]
    fn ei_strictly_monotone_on_negative_axis() {
        // d/dx Ei(x) = e^x/x < 0 for x < 0: Ei decreases from 0^- toward
        // -inf as x -> 0^-. (Equivalently E1(t) = -Ei(-t) decreases in t.)
        let xs = [-40.0, -10.0, -3.0, -1.0, -0.5, -0.1, -1e-3, -1e-6];
        let mut prev = -0.0f64;
        for x in xs {
            let v = expint_ei(x).unwrap().value;
            assert!(v < prev, "Ei not decreasing at {x}: {v} vs {prev}");
            assert!(v < 0.0);
            prev = v;
        }
    }

    #[test]
    fn gamma_upper_examples() {
        // Gamma(1, x) = e^{-x}
        for &x in &[0.0, 0.3, 2.5, 10.0] {
            assert!((gamma_upper_int(1, x).unwrap().value - (-x).exp()).abs() < 1e-15);
        }
        // Gamma(3, 0) = 2! = 2
        assert_eq!(gamma_upper_int(3, 0.0).unwrap().value, 2.0);
        // Gamma(4, 1.5) = e^{-1.5} (6 + 6*1.5 + 3*2.25 + 3.375): the finite
        // sum evaluates to 5.60615, cross-checked against quadrature below.
        let hand = (-1.5f64).exp() * (6.0 + 6.0 * 1.5 + 3.0 * 2.25 + 3.375);
        let got = gamma_upper_int(4, 1.5).unwrap().value;
        assert!((got - hand).abs() < 1e-14);
        assert!((got - 5.60615).abs() < 1e-5);
        let (quad, _) = gk_adaptive(|t: f64| t.powi(3) * (-t).exp(), 1.5, 120.0, 1e-12, 4000);
        assert!((got - quad).abs() < 1e-10);
        assert!(gamma_upper_int(0, 1.0).is_err());
        assert!(gamma_upper_int(-3, 1.0).is_err());
    }

    #[test]
    fn gamma_lower_examples_and_identity() {
        for a in [1i64, 2, 5, 17, 30] {
            assert_eq!(gamma_lower_reg_int(a, 0.0).unwrap().value, 0.0);
        }
        for &x in &[0.1, 1.0, 4.0] {
            assert!(
                (gamma_lower_reg_int(1, x).unwrap().value - (1.0 - (-x).exp())).abs() < 1e-15
            );
        }
        let v = gamma_lower_reg_int(2, 1.0).unwrap().value;
        assert!((v - (1.0 - 2.0 * (-1.0f64).exp())).abs() < 1e-15);
        assert!((v - 0.2642411).abs() < 1e-7);
        // Gamma(a,x) + Gamma(a) P(a,x) = Gamma(a), relative 1e-12, a<=30, x<=50.
        for a in [1i64, 2, 3, 7, 15, 30] {
            let ga = ln_factorial((a - 1) as usize).exp();
            for &x in &[0.0, 0.5, 3.0, 12.5, 50.0] {
                let up = gamma_upper_int(a, x).unwrap().value;
                let lo = gamma_lower_reg_int(a, x).unwrap().value;
                assert!(
                    (up + ga * lo - ga).abs() <= 1e-12 * ga,
                    "a={a} x={x}"
                );
            }
        }
    }

    /// Second, independent quadrature route for U: adaptive GK on the
    /// compactified integral, in log space per panel-free transform.
    fn tricomi_quad_oracle_ln(a: i64, b: i64, x: f64) -> f64 {
        let am1 = (a - 1) as f64;
        let d = (b - a - 1) as f64;
        // peak of ln integrand for scaling; with a = 1 the t^{a-1} factor is
        // gone and the peak is at t = max(0, d/x - 1) in closed form.
        let mut tp: f64 = if am1 == 0.0 {
            (d / x - 1.0).max(0.0)
        } else {
            am1.max(1.0) / x
        };
        if am1 > 0.0 {
            for _ in 0..60 {
                let g = am1 / tp + d / (1.0 + tp) - x;
                let h = -am1 / (tp * tp) - d / ((1.0 + tp) * (1.0 + tp));
                let step = g / h;
                tp = (tp - step).max(tp * 0.25);
                if step.abs() < 1e-12 * tp.abs().max(1e-12) {
                    break;
                }
            }
        }
        // 0 * ln(0) must read as 0 when a = 1
        let plog = move |t: f64| if am1 == 0.0 { 0.0 } else { am1 * t.ln() };
        let lpk = if tp > 0.0 && tp.is_finite() {
            -x * tp + plog(tp) + d * tp.ln_1p()
        } else {
            0.0
        };
        let f = move |t: f64| {
            if t <= 0.0 {
                return 0.0;
            }
            (-x * t + plog(t) + d * t.ln_1p() - lpk).exp()
        };
        let hi = (tp.max(1.0)) * 4.0 + (am1 + d.abs() + 50.0) / x + 80.0 / x;
        let (v, _) = gk_adaptive(f, 0.0, hi, 1e-14, 6000);
        lpk + v.ln() - ln_factorial((a - 1) as usize)
    }

    #[test]
    fn tricomi_identity_u1() {
        // U(1, b, x) = e^x x^{1-b} Gamma(b-1, x) for integer b >= 2.
        for &(b, x) in &[(2i64, 0.5), (3, 1.0), (5, 2.5), (9, 0.2)] {
            let u = tricomi_u_int(1, b, x).unwrap().value;
            let rhs = x.exp() * x.powi(1 - b as i32) * gamma_upper_int(b - 1, x).unwrap().value;
            assert!((u - rhs).abs() <= 1e-9 * rhs, "b={b} x={x}: {u} vs {rhs}");
        }
    }

    #[test]
    fn tricomi_u11_is_scaled_ei() {
        for &x in &[0.2, 1.0, 4.0, 20.0] {
            let u = tricomi_u_int(1, 1, x).unwrap().value;
            let want = -x.exp() * expint_ei(-x).unwrap().value;
            assert!((u - want).abs() <= 1e-9 * want, "x={x}");
        }
    }

    #[test]
    fn tricomi_against_independent_quadratures() {
        // (2,3,1) and a spread of (a, b, x) with the two quadrature routes
        // agreeing to 1e-8 in log (equivalently relative value).
        let cases = [
            (2i64, 3i64, 1.0),
            (1, 1, 0.5),
            (5, 2, 3.0),
            (10, -4, 0.7),
            (60, 80, 2.0),
            (200, 390, 5.0),
            (200, -200, 1e-3),
            (7, 20, 1e3),
        ];
        for (a, b, x) in cases {
            let l1 = tricomi_u_ln(a, b, x).unwrap().value;
            let l2 = tricomi_quad_oracle_ln(a, b, x);
            assert!(
                (l1 - l2).abs() < 1e-8 * l1.abs().max(1.0),
                "a={a} b={b} x={x}: {l1} vs {l2}"
            );
        }
        // Frozen check for the spec point (2,3,1): Laguerre-64 style oracle.
        let u231 = tricomi_u_int(2, 3, 1.0).unwrap().value;
        let oracle = tricomi_quad_oracle_ln(2, 3, 1.0).exp();
        assert!((u231 - oracle).abs() < 1e-9 * oracle);
        assert!(tricomi_u_int(2, 3, 0.0).is_err());
        assert!(tricomi_u_int(2, 3, -1.0).is_err());
    }

    #[test]
    fn simpson_and_gk_cross_check_on_u_integrand() {
        // The dual-rule requirement exercised directly on one integrand.
        let f = |t: f64| (-2.0 * t).exp() * (1.0 + t).powi(3);
        let (v1, _) = gk_adaptive(f, 0.0, 60.0, 1e-13, 3000);
        let v2 = simpson_adaptive(f, 0.0, 60.0, 1e-13);
        assert!((v1 - v2).abs() < 1e-10 * v1);
    }

    #[test]
    fn eiex_consistent_with_ei() {
        for &x in &[0.5, 1.0, 10.0, 300.0] {
            let a = eiex(x).unwrap();
            let b = -x.exp() * expint_ei(-x).unwrap().value;
            assert!((a - b).abs() < 1e-13 * b.abs());
        }
        // Huge arguments go through the MP continued fraction: ~1/x.
        let v = eiex(5000.0).unwrap();
        assert!(v > 1.0 / 5001.0 && v < 1.0 / 5000.0);
    }
}
