//! Exact rationals with power-of-two denominators, and exact power sums.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `num / 2^exp`, kept in lowest terms (odd numerator or `exp == 0`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: BigInt,
    exp: u32,
}

impl Dyadic {
    pub fn new(num: impl Into<BigInt>, exp: u32) -> Self {
        let mut num = num.into();
        let mut exp = exp;
        if num.is_zero() {
            return Dyadic { num, exp: 0 };
        }
        let tz = num.trailing_zeros().unwrap_or(0).min(exp as u64) as u32;
        if tz > 0 {
            num >>= tz;
            exp -= tz;
        }
        Dyadic { num, exp }
    }

    pub fn zero() -> Self {
        Dyadic { num: BigInt::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Dyadic { num: BigInt::one(), exp: 0 }
    }

    pub fn from_int(n: impl Into<BigInt>) -> Self {
        Dyadic::new(n, 0)
    }

    /// `2^{-k}`
    pub fn pow2_neg(k: u32) -> Self {
        Dyadic { num: BigInt::one(), exp: k }
    }

    pub fn numer(&self) -> &BigInt {
        &self.num
    }

    /// Exponent of the power-of-two denominator.
    pub fn exp(&self) -> u32 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn abs(&self) -> Self {
        Dyadic { num: self.num.abs(), exp: self.exp }
    }

    pub fn signum(&self) -> i32 {
        match self.num.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    /// Multiplies by `2^k` (`k` may be negative).
    pub fn scale_pow2(&self, k: i64) -> Self {
        if k >= 0 {
            let k = k as u32;
            if k >= self.exp {
                Dyadic::new(&self.num << (k - self.exp), 0)
            } else {
                Dyadic::new(self.num.clone(), self.exp - k)
            }
        } else {
            Dyadic::new(self.num.clone(), self.exp + (-k) as u32)
        }
    }

    /// Numerator over the common denominator `2^exp`; `exp` must be at least `self.exp()`.
    pub fn scaled_numer(&self, exp: u32) -> BigInt {
        assert!(exp >= self.exp, "denominator 2^{exp} too small");
        &self.num << (exp - self.exp)
    }

    pub fn to_f64(&self) -> f64 {
        if self.exp <= 1000 {
            let n = self.num.to_f64().unwrap_or(f64::NAN);
            n * 2f64.powi(-(self.exp as i32))
        } else {
            self.to_ratio().to_f64().unwrap_or(0.0)
        }
    }

    pub fn to_ratio(&self) -> BigRational {
        BigRational::new(self.num.clone(), BigInt::one() << self.exp)
    }

    fn align(a: &Dyadic, b: &Dyadic) -> (BigInt, BigInt, u32) {
        let e = a.exp.max(b.exp);
        (a.scaled_numer(e), b.scaled_numer(e), e)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, BigInt::one() << self.exp)
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = Dyadic::align(self, other);
        a.cmp(&b)
    }
}

impl<'a> Add<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        let (a, b, e) = Dyadic::align(self, rhs);
        Dyadic::new(a + b, e)
    }
}

impl<'a> Sub<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        let (a, b, e) = Dyadic::align(self, rhs);
        Dyadic::new(a - b, e)
    }
}

impl<'a> Mul<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        Dyadic::new(&self.num * &rhs.num, self.exp + rhs.exp)
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { num: -&self.num, exp: self.exp }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Dyadic> for Dyadic {
            type Output = Dyadic;
            fn $m(self, rhs: Dyadic) -> Dyadic {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Dyadic> for Dyadic {
            type Output = Dyadic;
            fn $m(self, rhs: &Dyadic) -> Dyadic {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        -&self
    }
}

impl std::iter::Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::zero(), |acc, x| acc + x)
    }
}

/// Renders a rational as `p/q` (or `p` when the denominator is 1).
pub fn ratio_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Accumulates `Σ|v|^q` over integers `v`. Integer exponents are summed exactly.
#[derive(Clone, Debug)]
pub struct PowerSum {
    q: f64,
    int_q: Option<u32>,
    small: u128,
    /// 256-bit lane `wide[1]·2^128 + wide[0]`; overflow spills into `big`.
    wide: [u128; 2],
    big: BigUint,
    real: f64,
}

impl PowerSum {
    pub fn new(q: f64) -> Self {
        let int_q = if q.fract() == 0.0 && (1.0..=64.0).contains(&q) {
            Some(q as u32)
        } else {
            None
        };
        PowerSum { q, int_q, small: 0, wide: [0; 2], big: BigUint::zero(), real: 0.0 }
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn is_exact(&self) -> bool {
        self.int_q.is_some()
    }

    pub fn add(&mut self, v: i128) {
        match i64::try_from(v) {
            Ok(v) => self.add_slice(&[v]),
            Err(_) => self.add_general(v.unsigned_abs()),
        }
    }

    fn add_general(&mut self, a: u128) {
        let Some(q) = self.int_q else {
            self.real += (a as f64).powf(self.q);
            return;
        };
        if a == 0 {
            return;
        }
        if let Some(p) = u64::try_from(a).ok().and_then(|a| pow_limbs(a, q)) {
            return self.add_wide(&p);
        }
        self.big += BigUint::from(a).pow(q);
    }

    /// Adds `|v|^q` for every `v`, with the exponent dispatched once per call.
    pub fn add_slice(&mut self, vals: &[i64]) {
        match self.int_q {
            Some(1) => {
                // each term is below 2^63, so no slice can overflow the total
                let t: u128 = vals.iter().map(|v| v.unsigned_abs() as u128).sum();
                self.add_small(t);
            }
            Some(2) => {
                for v in vals {
                    let a = v.unsigned_abs() as u128;
                    self.add_small(a * a);
                }
            }
            Some(q @ (3 | 4)) => {
                // below 2^32 the power fits in u128
                for v in vals {
                    let a = v.unsigned_abs();
                    if a >> 32 == 0 {
                        let sq = a * a;
                        let m = if q == 3 { a } else { sq };
                        self.add_small(sq as u128 * m as u128);
                    } else {
                        self.add_wide(&pow34(a, q));
                    }
                }
            }
            Some(_) => vals.iter().for_each(|&v| self.add_general(v.unsigned_abs() as u128)),
            None => {
                let q = self.q;
                self.real += vals.iter().map(|v| (v.unsigned_abs() as f64).powf(q)).sum::<f64>();
            }
        }
    }

    #[inline]
    fn add_small(&mut self, p: u128) {
        match self.small.checked_add(p) {
            Some(t) => self.small = t,
            None => {
                self.big += BigUint::from(self.small);
                self.small = p;
            }
        }
    }

    #[inline]
    fn add_wide(&mut self, p: &[u64; 4]) {
        let lo = p[0] as u128 | (p[1] as u128) << 64;
        let hi = p[2] as u128 | (p[3] as u128) << 64;
        let (l, c) = self.wide[0].overflowing_add(lo);
        self.wide[0] = l;
        match self.wide[1].checked_add(hi + c as u128) {
            Some(h) => self.wide[1] = h,
            None => {
                self.big += BigUint::from(self.wide[1]) << 128u32;
                self.wide[1] = hi + c as u128;
            }
        }
    }

    fn total(&self) -> BigUint {
        &self.big + BigUint::from(self.small) + BigUint::from(self.wide[0]) + (BigUint::from(self.wide[1]) << 128u32)
    }

    pub fn merge(&mut self, other: &PowerSum) {
        debug_assert_eq!(self.int_q, other.int_q);
        self.big += &other.big;
        let w = other.wide;
        self.add_wide(&[w[0] as u64, (w[0] >> 64) as u64, w[1] as u64, (w[1] >> 64) as u64]);
        match self.small.checked_add(other.small) {
            Some(t) => self.small = t,
            None => {
                self.big += BigUint::from(self.small);
                self.small = other.small;
            }
        }
        self.real += other.real;
    }

    /// The exact sum for integer exponents.
    pub fn exact(&self) -> Option<BigUint> {
        self.int_q.map(|_| self.total())
    }

    pub fn to_f64(&self) -> f64 {
        match self.int_q {
            Some(_) => self.total().to_f64().unwrap_or(f64::INFINITY),
            None => self.real,
        }
    }

    /// `(Σ|v|^q · 2^{-norm_exp})^{1/q} · 2^{-scale_exp}`: the normalized grid norm of values
    /// stored as integers scaled by `2^{scale_exp}`, averaged over `2^{norm_exp}` grid cells.
    pub fn norm(&self, norm_exp: u32, scale_exp: u32) -> f64 {
        let mean_log2 = log2_of_sum(self) - norm_exp as f64;
        if mean_log2 == f64::NEG_INFINITY {
            return 0.0;
        }
        (mean_log2 / self.q - scale_exp as f64).exp2()
    }
}

/// log2 of the accumulated sum, computed without overflow.
fn log2_of_sum(p: &PowerSum) -> f64 {
    match p.int_q {
        Some(_) => {
            let s = p.total();
            if s.is_zero() {
                return f64::NEG_INFINITY;
            }
            let bits = s.bits();
            if bits <= 1000 {
                s.to_f64().unwrap().log2()
            } else {
                let shift = bits - 64;
                (&s >> shift).to_f64().unwrap().log2() + shift as f64
            }
        }
        None => {
            if p.real == 0.0 {
                f64::NEG_INFINITY
            } else {
                p.real.log2()
            }
        }
    }
}

/// `a^3` or `a^4` in four little-endian limbs, from `a² = hi·2^64 + lo`.
#[inline]
fn pow34(a: u64, q: u32) -> [u64; 4] {
    let sq = a as u128 * a as u128;
    let (lo, hi) = (sq as u64, (sq >> 64) as u64);
    let m = if q == 3 { a } else { lo };
    // (hi·2^64 + lo)·m
    let l = lo as u128 * m as u128;
    let h = hi as u128 * m as u128 + (l >> 64);
    let mut p = [l as u64, h as u64, (h >> 64) as u64, 0];
    if q == 4 {
        // the second hi·lo·2^64 cross term and hi²·2^128
        let c = hi as u128 * lo as u128;
        let hh = hi as u128 * hi as u128;
        let t1 = p[1] as u128 + (c as u64) as u128;
        p[1] = t1 as u64;
        let t2 = p[2] as u128 + (c >> 64) + (t1 >> 64) + (hh as u64) as u128;
        p[2] = t2 as u64;
        p[3] = (hh >> 64) as u64 + (t2 >> 64) as u64;
    }
    p
}

/// `a^q` in four little-endian limbs, if it fits.
fn pow_limbs(a: u64, q: u32) -> Option<[u64; 4]> {
    let mut r = [1u64, 0, 0, 0];
    for _ in 0..q {
        let mut carry = 0u128;
        for limb in r.iter_mut() {
            let t = *limb as u128 * a as u128 + carry;
            *limb = t as u64;
            carry = t >> 64;
        }
        if carry != 0 {
            return None;
        }
    }
    Some(r)
}

/// Signed integer arithmetic usable by the scaled-integer kernels: `i128` when the bit
/// budget allows, `BigInt` otherwise.
pub(crate) trait Wide:
    Clone + Ord + Zero + One + Signed + From<u64> + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self>
{
    fn shl(self, k: u32) -> Self;
    fn to_bigint(&self) -> BigInt;
}

impl Wide for i128 {
    fn shl(self, k: u32) -> Self {
        self << k
    }
    fn to_bigint(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl Wide for BigInt {
    fn shl(self, k: u32) -> Self {
        self << k
    }
    fn to_bigint(&self) -> BigInt {
        self.clone()
    }
}
