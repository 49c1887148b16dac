//! Arbitrary-precision binary floating point.
//!
//! The closed-form rate and outage expressions are alternating sums whose
//! intermediate terms can exceed the final value by hundreds of orders of
//! magnitude (factorials up to `(N-K)!` against powers of near-zero pole
//! gaps), so `f64` — and even double-double — arithmetic is insufficient at
//! production antenna counts. This module provides a compact
//! mantissa/exponent float on top of `BigUint` with just the operations the
//! kernels need: field arithmetic, `exp`, `ln`, and the exponentially-scaled
//! exponential integral `e^x E1(x)`.
//!
//! Values are `sign * mant * 2^exp` with `mant` normalized to exactly `prec`
//! bits. Arithmetic truncates toward zero at `prec` bits; callers budget
//! guard bits for that (every consumer in this crate works at the precision
//! returned by a magnitude pre-scan plus a generous margin).

use std::cmp::Ordering;
use std::sync::RwLock;

use num_bigint::BigUint;
use num_traits::Zero;

/// Natural log of 2, used to size precision requests from decimal digits.
pub const LN_2: f64 = std::f64::consts::LN_2;

#[derive(Clone, Debug)]
pub struct MpF {
    /// -1, 0, +1. Zero iff sign == 0.
    sign: i8,
    /// Normalized mantissa: `prec` bits exactly when nonzero.
    mant: BigUint,
    /// Value = mant * 2^exp.
    exp: i64,
    /// Working precision in bits.
    prec: u32,
}

impl MpF {
    pub fn zero(prec: u32) -> Self {
        MpF { sign: 0, mant: BigUint::zero(), exp: 0, prec }
    }

    pub fn one(prec: u32) -> Self {
        Self::from_u64(1, prec)
    }

    pub fn from_u64(v: u64, prec: u32) -> Self {
        if v == 0 {
            return Self::zero(prec);
        }
        Self::make(1, BigUint::from(v), 0, prec)
    }

    pub fn from_i64(v: i64, prec: u32) -> Self {
        if v < 0 {
            Self::from_u64(v.unsigned_abs(), prec).neg()
        } else {
            Self::from_u64(v as u64, prec)
        }
    }

    /// Exact conversion: every finite f64 is a dyadic rational.
    pub fn from_f64(v: f64, prec: u32) -> Self {
        assert!(v.is_finite(), "MpF::from_f64 requires finite input, got {v}");
        if v == 0.0 {
            return Self::zero(prec);
        }
        let bits = v.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if biased == 0 {
            (frac, -1074i64) // subnormal
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        Self::make(sign, BigUint::from(m), e, prec)
    }

    /// Normalize `mant` to exactly `prec` bits (truncating low bits).
    fn make(sign: i8, mut mant: BigUint, mut exp: i64, prec: u32) -> Self {
        if mant.is_zero() {
            return Self::zero(prec);
        }
        let nbits = mant.bits() as i64;
        let shift = nbits - prec as i64;
        match shift.cmp(&0) {
            Ordering::Greater => {
                mant >>= shift as u64;
                exp += shift;
            }
            Ordering::Less => {
                mant <<= (-shift) as u64;
                exp += shift;
            }
            Ordering::Equal => {}
        }
        if mant.is_zero() {
            return Self::zero(prec);
        }
        MpF { sign, mant, exp, prec }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn is_negative(&self) -> bool {
        self.sign < 0
    }

    /// floor(log2 |x|) + 1; i64::MIN for zero. Used by magnitude trackers.
    pub fn log2_magnitude(&self) -> i64 {
        if self.sign == 0 {
            i64::MIN
        } else {
            self.exp + self.prec as i64
        }
    }

    /// Re-round to a (usually lower) precision.
    pub fn with_prec(&self, prec: u32) -> Self {
        Self::make(self.sign, self.mant.clone(), self.exp, prec)
    }

    pub fn abs(&self) -> Self {
        let mut r = self.clone();
        if r.sign != 0 {
            r.sign = 1;
        }
        r
    }

    /// Exact scaling by 2^k.
    pub fn scale2(&self, k: i64) -> Self {
        let mut r = self.clone();
        if r.sign != 0 {
            r.exp += k;
        }
        r
    }

    pub fn to_f64(&self) -> f64 {
        if self.sign == 0 {
            return 0.0;
        }
        // Top 54 bits, manually rounded to nearest.
        let nbits = self.mant.bits() as i64;
        let take = 54i64.min(nbits);
        let top: BigUint = &self.mant >> (nbits - take) as u64;
        let mut m = top.iter_u64_digits().next().unwrap_or(0);
        let mut e = self.exp + (nbits - take);
        if take == 54 {
            m = (m >> 1) + (m & 1);
            e += 1;
        }
        let mf = m as f64;
        if e > 1100 {
            return if self.sign > 0 { f64::INFINITY } else { f64::NEG_INFINITY };
        }
        if e < -1200 {
            return if self.sign > 0 { 0.0 } else { -0.0 };
        }
        // Scale in chunks so intermediate powers of two stay in range.
        let mut v = mf;
        let mut rem = e;
        while rem > 0 {
            let step = rem.min(1000);
            v *= pow2(step as i32);
            rem -= step;
        }
        while rem < 0 {
            let step = (-rem).min(1000);
            v *= pow2(-(step as i32));
            rem += step;
        }
        if self.sign > 0 {
            v
        } else {
            -v
        }
    }

    pub fn cmp_abs(&self, rhs: &Self) -> Ordering {
        if self.sign == 0 || rhs.sign == 0 {
            return (self.sign != 0).cmp(&(rhs.sign != 0));
        }
        let la = self.exp + self.mant.bits() as i64;
        let lb = rhs.exp + rhs.mant.bits() as i64;
        if la != lb {
            return la.cmp(&lb);
        }
        // Align and compare mantissas.
        let (a, b) = align(&self.mant, self.exp, &rhs.mant, rhs.exp);
        a.cmp(&b)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let prec = self.prec.max(rhs.prec);
        if self.sign == 0 {
            return rhs.with_prec(prec);
        }
        if rhs.sign == 0 {
            return self.with_prec(prec);
        }
        // If the magnitudes are too far apart the smaller is below 1 ulp.
        let la = self.exp + self.mant.bits() as i64;
        let lb = rhs.exp + rhs.mant.bits() as i64;
        if la - lb > prec as i64 + 2 {
            return self.with_prec(prec);
        }
        if lb - la > prec as i64 + 2 {
            return rhs.with_prec(prec);
        }
        let exp = self.exp.min(rhs.exp);
        let (a, b) = align(&self.mant, self.exp, &rhs.mant, rhs.exp);
        if self.sign == rhs.sign {
            Self::make(self.sign, a + b, exp, prec)
        } else {
            match a.cmp(&b) {
                Ordering::Equal => Self::zero(prec),
                Ordering::Greater => Self::make(self.sign, a - b, exp, prec),
                Ordering::Less => Self::make(rhs.sign, b - a, exp, prec),
            }
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        let mut r = self.clone();
        r.sign = -r.sign;
        r
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let prec = self.prec.max(rhs.prec);
        if self.sign == 0 || rhs.sign == 0 {
            return Self::zero(prec);
        }
        Self::make(self.sign * rhs.sign, &self.mant * &rhs.mant, self.exp + rhs.exp, prec)
    }

    pub fn mul_u64(&self, v: u64) -> Self {
        if self.sign == 0 || v == 0 {
            return Self::zero(self.prec);
        }
        Self::make(self.sign, &self.mant * v, self.exp, self.prec)
    }

    pub fn div(&self, rhs: &Self) -> Self {
        let prec = self.prec.max(rhs.prec);
        assert!(rhs.sign != 0, "MpF division by zero");
        if self.sign == 0 {
            return Self::zero(prec);
        }
        let extra = prec as i64 + 2;
        let num: BigUint = &self.mant << extra as u64;
        let q = num / &rhs.mant;
        Self::make(self.sign * rhs.sign, q, self.exp - rhs.exp - extra, prec)
    }

    pub fn div_u64(&self, v: u64) -> Self {
        assert!(v != 0, "MpF division by zero");
        if self.sign == 0 {
            return Self::zero(self.prec);
        }
        let extra = 66i64;
        let num: BigUint = &self.mant << extra as u64;
        let q = num / v;
        Self::make(self.sign, q, self.exp - extra, self.prec)
    }

    pub fn recip(&self) -> Self {
        Self::one(self.prec).div(self)
    }

    /// Integer power by binary exponentiation.
    pub fn powi(&self, mut n: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.prec);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }
}

/// 2^e as f64, exact within range.
fn pow2(e: i32) -> f64 {
    if e >= -1022 && e <= 1023 {
        f64::from_bits(((e + 1023) as u64) << 52)
    } else {
        2.0f64.powi(e)
    }
}

fn align(a: &BigUint, ea: i64, b: &BigUint, eb: i64) -> (BigUint, BigUint) {
    match ea.cmp(&eb) {
        Ordering::Equal => (a.clone(), b.clone()),
        Ordering::Greater => (a << (ea - eb) as u64, b.clone()),
        Ordering::Less => (a.clone(), b << (eb - ea) as u64),
    }
}

// ---------------------------------------------------------------------------
// Transcendentals
// ---------------------------------------------------------------------------

struct ConstCache {
    ln2: Option<MpF>,
    euler: Option<MpF>,
}

static CACHE: RwLock<ConstCache> = RwLock::new(ConstCache { ln2: None, euler: None });

/// ln 2 at the requested precision (cached at the highest precision seen).
pub fn ln2(prec: u32) -> MpF {
    {
        let c = CACHE.read().unwrap();
        if let Some(v) = &c.ln2 {
            if v.prec() >= prec {
                return v.with_prec(prec);
            }
        }
    }
    // 2*atanh(1/3) = ln 2, series in exact dyadic steps. Cache at the
    // precision the value is actually good to, not the working precision.
    let w = prec + 64;
    let third = MpF::from_u64(1, w).div_u64(3);
    let v = atanh_small(&third, w).scale2(1).with_prec(prec + 32);
    let mut c = CACHE.write().unwrap();
    c.ln2 = Some(v.clone());
    v.with_prec(prec)
}

/// Euler-Mascheroni constant via the exponential-integral route:
/// gamma = sum_{k>=1} (-1)^{k+1} n^k/(k k!) - ln n - E1(n), with n large
/// enough that E1(n) < 2^-(prec+8) is negligible.
pub fn euler_gamma(prec: u32) -> MpF {
    {
        let c = CACHE.read().unwrap();
        if let Some(v) = &c.euler {
            if v.prec() >= prec {
                return v.with_prec(prec);
            }
        }
    }
    let n = ((prec as f64 + 16.0) * LN_2).ceil() as u64 + 2;
    // The alternating sum peaks near e^n, so budget n*log2(e) cancellation bits.
    let w = prec + (n as f64 * std::f64::consts::LOG2_E).ceil() as u32 + 64;
    let nf = MpF::from_u64(n, w);
    let mut term = MpF::one(w); // n^k / k!
    let mut sum = MpF::zero(w);
    let mut k = 1u64;
    loop {
        term = term.mul(&nf).div_u64(k);
        let contrib = term.div_u64(k);
        sum = if k % 2 == 1 { sum.add(&contrib) } else { sum.sub(&contrib) };
        if k > n && contrib.log2_magnitude() < -(w as i64) {
            break;
        }
        k += 1;
    }
    // The dropped E1(n) tail bounds the accuracy at ~2^-(prec+16); cache at
    // that honest precision so higher-precision callers recompute.
    let v = sum.sub(&ln_mp(&nf, w)).with_prec(prec + 8);
    let mut c = CACHE.write().unwrap();
    c.euler = Some(v.clone());
    v.with_prec(prec)
}

/// atanh for |x| < 1/2 by plain series; callers reduce the argument.
fn atanh_small(x: &MpF, prec: u32) -> MpF {
    let x2 = x.mul(x);
    let mut term = x.clone();
    let mut sum = x.clone();
    let mut k = 1u64;
    loop {
        term = term.mul(&x2);
        let contrib = term.div_u64(2 * k + 1);
        sum = sum.add(&contrib);
        if contrib.log2_magnitude() < sum.log2_magnitude() - prec as i64 - 8 {
            return sum;
        }
        k += 1;
    }
}

/// Natural logarithm for x > 0.
pub fn ln_mp(x: &MpF, prec: u32) -> MpF {
    assert!(x.sign > 0, "ln_mp requires a positive argument");
    let w = prec + 32;
    // x = m * 2^e with m in [1, 2)
    let e = x.exp + x.prec as i64 - 1;
    let m = x.with_prec(w).scale2(-e);
    let num = m.sub(&MpF::one(w));
    let den = m.add(&MpF::one(w));
    let z = num.div(&den); // in [0, 1/3)
    let lnm = if z.is_zero() { MpF::zero(w) } else { atanh_small(&z, w).scale2(1) };
    let le = ln2(w).mul(&MpF::from_i64(e, w));
    lnm.add(&le).with_prec(prec)
}

/// exp(x) with argument reduction by ln2 and 2^-32 halving.
pub fn exp_mp(x: &MpF, prec: u32) -> MpF {
    let w = prec + 96;
    if x.is_zero() {
        return MpF::one(prec);
    }
    let xf = x.to_f64();
    assert!(xf.abs() < 1e15, "exp_mp argument out of supported range: {xf}");
    let k = (xf / LN_2).round() as i64;
    let r = x.with_prec(w).sub(&ln2(w).mul(&MpF::from_i64(k, w)));
    // |r| <= ln2/2 + eps; halve 32 times for a fast Taylor tail.
    const H: i64 = 32;
    let rh = r.scale2(-H);
    let mut term = MpF::one(w);
    let mut sum = MpF::one(w);
    let mut i = 1u64;
    loop {
        term = term.mul(&rh).div_u64(i);
        sum = sum.add(&term);
        if term.log2_magnitude() < -(w as i64) - 8 {
            break;
        }
        i += 1;
    }
    for _ in 0..H {
        sum = sum.mul(&sum);
    }
    sum.scale2(k).with_prec(prec)
}

/// Exponentially-scaled exponential integral `e^x E1(x)` for x > 0.
///
/// Series route for moderate x (with cancellation head-room), modified-Lentz
/// continued fraction for large x where the series would need too many guard
/// bits. The scaled form stays O(1/x) and never over/underflows.
pub fn eiex_mp(x: &MpF, prec: u32) -> MpF {
    assert!(x.sign > 0, "eiex_mp requires a positive argument");
    let xf = x.to_f64();
    // The series partial sums peak near e^x while E1(x) ~ e^{-x}, so the
    // cancellation spans 2x log2(e) bits.
    let series_cost_bits = 2.0 * xf * std::f64::consts::LOG2_E;
    if series_cost_bits <= prec as f64 + 512.0 {
        eiex_series(x, prec, series_cost_bits.ceil() as u32)
    } else {
        eiex_cf(x, prec)
    }
}

fn eiex_series(x: &MpF, prec: u32, extra: u32) -> MpF {
    let w = prec + extra + 96;
    let xw = x.with_prec(w);
    // E1(x) = -gamma - ln x + sum_{k>=1} (-1)^{k+1} x^k / (k k!)
    let mut term = MpF::one(w);
    let mut sum = MpF::zero(w);
    let mut k = 1u64;
    loop {
        term = term.mul(&xw).div_u64(k);
        let contrib = term.div_u64(k);
        sum = if k % 2 == 1 { sum.add(&contrib) } else { sum.sub(&contrib) };
        if contrib.log2_magnitude() < -(w as i64) && k as f64 > x.to_f64() {
            break;
        }
        k += 1;
    }
    let e1 = sum.sub(&euler_gamma(w)).sub(&ln_mp(&xw, w));
    exp_mp(&xw, w).mul(&e1).with_prec(prec)
}

fn eiex_cf(x: &MpF, prec: u32) -> MpF {
    // e^x E1(x) = 1 / (x+1 - 1^2/(x+3 - 2^2/(x+5 - ...)))
    let w = prec + 64;
    let xw = x.with_prec(w);
    let tiny = MpF::one(w).scale2(-2 * w as i64 - 64);
    let b0 = xw.add(&MpF::from_u64(1, w));
    let mut f = if b0.is_zero() { tiny.clone() } else { b0.clone() };
    let mut c = f.clone();
    let mut d = MpF::zero(w);
    // Truncation error of this CF behaves like exp(-4 sqrt(k x)); run at
    // least the count that model predicts before trusting the Lentz delta.
    let xf = x.to_f64();
    let need = (LN_2 * (prec as f64 + 48.0) / 4.0).powi(2) / xf.max(1.0);
    let min_iter = need.ceil() as u64 + 8;
    let mut small_streak = 0u32;
    let mut k = 1u64;
    let max_iter = 400_000u64;
    loop {
        let a = MpF::from_i64(-((k * k) as i64), w);
        let b = xw.add(&MpF::from_u64(2 * k + 1, w));
        d = b.add(&a.mul(&d));
        if d.is_zero() {
            d = tiny.clone();
        }
        c = b.add(&a.div(&c));
        if c.is_zero() {
            c = tiny.clone();
        }
        d = d.recip();
        let delta = c.mul(&d);
        f = f.mul(&delta);
        let dev = delta.sub(&MpF::one(w));
        if dev.log2_magnitude() < -(prec as i64) - 16 {
            small_streak += 1;
            if small_streak >= 2 && k >= min_iter {
                break;
            }
        } else {
            small_streak = 0;
        }
        k += 1;
        assert!(k < max_iter, "eiex_cf failed to converge at x = {}", x.to_f64());
    }
    f.recip().with_prec(prec)
}
