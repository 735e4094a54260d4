//! Fixed-precision dyadic rationals, XOR shifts, projections and elementary boxes.
//!
//! Bits are numbered from 1 at the most significant fractional digit, so `bit(y, a)` is the
//! coefficient of `2^{-a}` in the binary expansion of `y`.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::exact::Dyadic;

pub const MAX_PRECISION: u32 = 64;

/// Mantissa of a `w`-bit value re-expressed at `a` bits, i.e. `floor(m·2^{a-w})`.
#[inline]
pub fn level_index(mantissa: u64, w: u32, a: u32) -> u64 {
    if a >= w {
        if a - w >= 64 {
            0
        } else {
            mantissa << (a - w)
        }
    } else if w - a >= 64 {
        0
    } else {
        mantissa >> (w - a)
    }
}

#[inline]
pub(crate) fn mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

fn check_mantissa(mantissa: u64, precision: u32) -> Result<()> {
    if precision > MAX_PRECISION {
        return Err(Error::PrecisionTooLarge(precision));
    }
    if precision < 64 && mantissa >> precision != 0 {
        return Err(Error::MantissaOutOfRange { mantissa, precision });
    }
    Ok(())
}

/// `mantissa · 2^{-precision}` with `mantissa < 2^precision`.
///
/// Equality, ordering and hashing are by value, so `1/2` at precision 1 equals `2/4`.
#[derive(Clone, Copy, Debug)]
pub struct DyadicScalar {
    mantissa: u64,
    precision: u32,
}

impl DyadicScalar {
    pub fn new(mantissa: u64, precision: u32) -> Result<Self> {
        check_mantissa(mantissa, precision)?;
        Ok(DyadicScalar { mantissa, precision })
    }

    pub fn zero() -> Self {
        DyadicScalar { mantissa: 0, precision: 0 }
    }

    /// Quantizes `x ∈ [0,1)` down to `precision` bits.
    pub fn from_f64(x: f64, precision: u32) -> Result<Self> {
        if !(0.0..1.0).contains(&x) {
            return Err(Error::InvalidParameter(format!("{x} is outside [0,1)")));
        }
        if precision > MAX_PRECISION {
            return Err(Error::PrecisionTooLarge(precision));
        }
        // x < 1 has at most 53 significant bits, so the scaled floor is exact.
        let scaled = (x * 2f64.powi(precision as i32)).floor();
        let m = if scaled >= 2f64.powi(64) { u64::MAX } else { scaled as u64 };
        DyadicScalar::new(m.min(mask(precision)), precision)
    }

    pub fn mantissa(self) -> u64 {
        self.mantissa
    }

    pub fn precision(self) -> u32 {
        self.precision
    }

    /// The value times `2^64`.
    #[inline]
    pub fn aligned(self) -> u64 {
        if self.precision == 0 {
            0
        } else {
            self.mantissa << (64 - self.precision)
        }
    }

    fn from_aligned(a: u64, precision: u32) -> Self {
        let m = if precision == 0 { 0 } else { a >> (64 - precision) };
        DyadicScalar { mantissa: m, precision }
    }

    pub fn to_f64(self) -> f64 {
        self.mantissa as f64 * 2f64.powi(-(self.precision as i32))
    }

    pub fn to_dyadic(self) -> Dyadic {
        Dyadic::new(BigInt::from(self.mantissa), self.precision)
    }

    /// `η_a(y)`; zero beyond the stored precision.
    pub fn bit(self, a: u32) -> u8 {
        assert!(a >= 1, "bits are numbered from 1");
        if a > 64 {
            return 0;
        }
        ((self.aligned() >> (64 - a)) & 1) as u8
    }

    /// Digitwise XOR; the result carries the larger precision.
    pub fn xor(self, other: DyadicScalar) -> DyadicScalar {
        let p = self.precision.max(other.precision);
        DyadicScalar::from_aligned(self.aligned() ^ other.aligned(), p)
    }

    /// `y^{(s)}`, the first `s` digits, as an element of `Q(2^s)`.
    pub fn project(self, s: u32) -> DyadicScalar {
        let s = s.min(MAX_PRECISION);
        let keep = if s == 0 { 0 } else { self.aligned() & !mask(64 - s) };
        DyadicScalar::from_aligned(keep, s)
    }

    /// `θ_s(y) = (y - y^{(s)})·2^s`.
    pub fn remainder(self, s: u32) -> Result<DyadicScalar> {
        if s > self.precision {
            return Err(Error::LevelExceedsPrecision { level: s, precision: self.precision });
        }
        let p = self.precision - s;
        Ok(DyadicScalar { mantissa: self.mantissa & mask(p), precision: p })
    }

    /// Same value at a larger precision.
    pub fn with_precision(self, precision: u32) -> Result<DyadicScalar> {
        if precision < self.precision {
            return Err(Error::LevelExceedsPrecision { level: self.precision, precision });
        }
        if precision > MAX_PRECISION {
            return Err(Error::PrecisionTooLarge(precision));
        }
        Ok(DyadicScalar::from_aligned(self.aligned(), precision))
    }
}

impl PartialEq for DyadicScalar {
    fn eq(&self, other: &Self) -> bool {
        self.aligned() == other.aligned()
    }
}
impl Eq for DyadicScalar {}

impl Hash for DyadicScalar {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.aligned().hash(state)
    }
}

impl PartialOrd for DyadicScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for DyadicScalar {
    fn cmp(&self, other: &Self) -> Ordering {
        self.aligned().cmp(&other.aligned())
    }
}

impl fmt::Display for DyadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dyadic())
    }
}

/// `δ^{(s)}(x,y)`: 1 when the first `s` digits agree.
pub fn kernel_delta(x: DyadicScalar, y: DyadicScalar, s: u32) -> u8 {
    (x.project(s) == y.project(s)) as u8
}

/// `r_a(y) = 1 - 2η_a(y)`, with `r_0 ≡ 1`.
pub fn rademacher(a: u32, y: DyadicScalar) -> i8 {
    if a == 0 {
        1
    } else {
        1 - 2 * y.bit(a) as i8
    }
}

/// `r_A(Y) = Π_j r_{a_j}(y_j)`.
pub fn rademacher_multi(levels: &[u32], y: &DyadicPoint) -> Result<i8> {
    check_dim(levels.len(), y.dim())?;
    Ok(levels
        .iter()
        .enumerate()
        .map(|(j, &a)| rademacher(a, y.coord(j)))
        .product())
}

/// Number of nonzero levels.
pub fn kappa(levels: &[u32]) -> usize {
    levels.iter().filter(|&&a| a != 0).count()
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        Err(Error::DimensionMismatch { expected, got })
    } else {
        Ok(())
    }
}

/// A point of `U^d` whose coordinates share one precision.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyadicPoint {
    mantissas: Vec<u64>,
    precision: u32,
}

impl DyadicPoint {
    pub fn new(mantissas: Vec<u64>, precision: u32) -> Result<Self> {
        if mantissas.is_empty() {
            return Err(Error::InvalidParameter("a point needs at least one coordinate".into()));
        }
        for &m in &mantissas {
            check_mantissa(m, precision)?;
        }
        Ok(DyadicPoint { mantissas, precision })
    }

    pub(crate) fn new_unchecked(mantissas: Vec<u64>, precision: u32) -> Self {
        DyadicPoint { mantissas, precision }
    }

    /// The origin of `U^d`.
    pub fn zero(d: usize) -> Self {
        DyadicPoint { mantissas: vec![0; d.max(1)], precision: 0 }
    }

    pub fn from_scalars(coords: &[DyadicScalar]) -> Result<Self> {
        let w = coords.iter().map(|c| c.precision()).max().unwrap_or(0);
        let m = coords.iter().map(|c| c.with_precision(w).map(|c| c.mantissa())).collect::<Result<_>>()?;
        DyadicPoint::new(m, w)
    }

    pub fn from_f64(xs: &[f64], precision: u32) -> Result<Self> {
        let m = xs
            .iter()
            .map(|&x| DyadicScalar::from_f64(x, precision).map(|c| c.mantissa()))
            .collect::<Result<_>>()?;
        DyadicPoint::new(m, precision)
    }

    pub fn dim(&self) -> usize {
        self.mantissas.len()
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn mantissas(&self) -> &[u64] {
        &self.mantissas
    }

    pub fn coord(&self, j: usize) -> DyadicScalar {
        DyadicScalar { mantissa: self.mantissas[j], precision: self.precision }
    }

    pub fn coords(&self) -> Vec<DyadicScalar> {
        (0..self.dim()).map(|j| self.coord(j)).collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords().into_iter().map(|c| c.to_f64()).collect()
    }

    pub fn xor(&self, other: &DyadicPoint) -> Result<DyadicPoint> {
        check_dim(self.dim(), other.dim())?;
        let p = self.precision.max(other.precision);
        let m = self
            .coords()
            .into_iter()
            .zip(other.coords())
            .map(|(a, b)| a.xor(b).with_precision(p).unwrap().mantissa())
            .collect();
        Ok(DyadicPoint { mantissas: m, precision: p })
    }

    pub fn project(&self, s: u32) -> DyadicPoint {
        let s = s.min(MAX_PRECISION);
        let m = self.mantissas.iter().map(|&m| level_index(m, self.precision, s)).collect();
        DyadicPoint { mantissas: m, precision: s }
    }

    /// `Θ_s(Y)`, coordinatewise remainder.
    pub fn remainder(&self, s: u32) -> Result<DyadicPoint> {
        let c = self.coords().into_iter().map(|c| c.remainder(s)).collect::<Result<Vec<_>>>()?;
        DyadicPoint::from_scalars(&c)
    }

    pub fn with_precision(&self, precision: u32) -> Result<DyadicPoint> {
        if precision < self.precision {
            return Err(Error::LevelExceedsPrecision { level: self.precision, precision });
        }
        if precision > MAX_PRECISION {
            return Err(Error::PrecisionTooLarge(precision));
        }
        let m = self.mantissas.iter().map(|&m| level_index(m, self.precision, precision)).collect();
        Ok(DyadicPoint { mantissas: m, precision })
    }

    /// Volume of the anchored box `[0, y_1) × … × [0, y_d)`.
    pub fn volume(&self) -> Dyadic {
        let mut num = BigInt::from(1u8);
        for &m in &self.mantissas {
            num *= m;
        }
        Dyadic::new(num, self.precision * self.dim() as u32)
    }

    /// True when every coordinate has at most `s` significant digits.
    pub fn is_on_grid(&self, s: u32) -> bool {
        self.project(s).with_precision(self.precision.max(s)).ok()
            == self.with_precision(self.precision.max(s)).ok()
    }
}

impl fmt::Display for DyadicPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for j in 0..self.dim() {
            if j > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", self.coord(j))?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoxFlavor {
    /// `Δ^M_A = Π_j [m_j 2^{-a_j}, (m_j+1) 2^{-a_j})`
    Delta,
    /// `Π_A`: `m_j = 1` when `a_j ≥ 1`, the whole interval when `a_j = 0`.
    Pi,
}

/// A dyadic elementary box.
#[derive(Clone, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub struct ElementaryBox {
    levels: Vec<u32>,
    offsets: Vec<u64>,
    flavor: BoxFlavor,
}

impl ElementaryBox {
    pub fn delta(levels: Vec<u32>, offsets: Vec<u64>) -> Result<Self> {
        check_dim(levels.len(), offsets.len())?;
        for (&a, &m) in levels.iter().zip(&offsets) {
            if a > MAX_PRECISION {
                return Err(Error::PrecisionTooLarge(a));
            }
            check_mantissa(m, a)?;
        }
        Ok(ElementaryBox { levels, offsets, flavor: BoxFlavor::Delta })
    }

    pub fn pi(levels: Vec<u32>) -> Result<Self> {
        if let Some(&a) = levels.iter().find(|&&a| a > MAX_PRECISION) {
            return Err(Error::PrecisionTooLarge(a));
        }
        let offsets = levels.iter().map(|&a| (a >= 1) as u64).collect();
        Ok(ElementaryBox { levels, offsets, flavor: BoxFlavor::Pi })
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    pub fn flavor(&self) -> BoxFlavor {
        self.flavor
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    /// `Σ a_j`, so the volume is `2^{-level_sum}`.
    pub fn level_sum(&self) -> u32 {
        self.levels.iter().sum()
    }

    pub fn volume(&self) -> Dyadic {
        Dyadic::pow2_neg(self.level_sum())
    }

    pub fn contains(&self, x: &DyadicPoint) -> Result<bool> {
        check_dim(self.dim(), x.dim())?;
        Ok(match self.flavor {
            BoxFlavor::Delta => self
                .levels
                .iter()
                .zip(&self.offsets)
                .enumerate()
                .all(|(j, (&a, &m))| level_index(x.mantissas[j], x.precision, a) == m),
            BoxFlavor::Pi => self.levels.iter().enumerate().all(|(j, &a)| {
                let z = x.coord(j);
                a == 0 || (z.bit(a) == 1 && (1..a).all(|i| z.bit(i) == 0))
            }),
        })
    }
}

/// Index `a ∈ {1, …, s}` of the interval `Π_a` containing a value whose first `s` digits are
/// `m` (stored as an `s`-bit mantissa), or 0 when those digits vanish.
#[inline]
pub(crate) fn pi_level(m: u64, s: u32) -> u32 {
    if m == 0 {
        0
    } else {
        s - (63 - m.leading_zeros())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc(m: u64, w: u32) -> DyadicScalar {
        DyadicScalar::new(m, w).unwrap()
    }

    #[test]
    fn bits() {
        let y = sc(3, 3);
        assert_eq!((y.bit(1), y.bit(2), y.bit(3)), (0, 1, 1));
        assert_eq!(y.bit(4), 0);
        assert!((1..70).all(|a| DyadicScalar::zero().bit(a) == 0));
        let h = sc(1, 1);
        assert_eq!(h.bit(1), 1);
        assert!((2..70).all(|a| h.bit(a) == 0));
        for w in 0..=8 {
            for m in 0..(1u64 << w) {
                let y = sc(m, w);
                let back: u64 = (1..=w).map(|a| (y.bit(a) as u64) << (w - a)).sum();
                assert_eq!(back, m);
            }
        }
    }

    #[test]
    fn xor_projection_remainder() {
        assert_eq!(sc(1, 1).xor(sc(1, 2)), sc(3, 2));
        let x = sc(11, 4);
        assert_eq!(x.xor(x), DyadicScalar::zero());
        assert_eq!(x.xor(DyadicScalar::zero()), x);
        assert_eq!(x.project(2), sc(1, 1));
        assert_eq!(x.project(4), x);
        assert_eq!(x.project(0), DyadicScalar::zero());
        assert_eq!(x.remainder(2).unwrap(), sc(3, 2));
        assert_eq!(x.remainder(4).unwrap(), DyadicScalar::zero());
        assert!(x.remainder(5).is_err());
        assert!(DyadicScalar::new(8, 3).is_err());
        assert!(DyadicScalar::new(0, 65).is_err());
        assert_eq!(DyadicScalar::new(u64::MAX, 64).unwrap().bit(64), 1);
    }

    #[test]
    fn kernel_and_rademacher() {
        assert_eq!(kernel_delta(sc(3, 3), sc(1, 2), 2), 1);
        assert_eq!(kernel_delta(sc(3, 3), sc(3, 2), 1), 0);
        assert!((0..8).all(|m| rademacher(0, sc(m, 3)) == 1));
        assert_eq!(rademacher(1, sc(3, 2)), -1);
        // 1/2 - (1/2)(Σ_{a≤w} 2^{-a} r_a(y) + 2^{-w}) = y over all 3-bit y
        for m in 0..8u64 {
            let y = sc(m, 3);
            let num: i64 = (1..=3).map(|a| rademacher(a, y) as i64 * (1 << (3 - a))).sum::<i64>() + 1;
            // scaled by 2^4: 8 - num = 2m
            assert_eq!(8 - num, 2 * m as i64);
        }
    }

    #[test]
    fn boxes() {
        let x = DyadicPoint::new(vec![3], 3).unwrap();
        assert!(ElementaryBox::pi(vec![2]).unwrap().contains(&x).unwrap());
        assert!(ElementaryBox::pi(vec![0]).unwrap().contains(&x).unwrap());
        assert!(!ElementaryBox::pi(vec![1]).unwrap().contains(&x).unwrap());
        let b = ElementaryBox::delta(vec![1, 2], vec![1, 3]).unwrap();
        assert_eq!(b.volume(), Dyadic::pow2_neg(3));
        assert!(b.contains(&DyadicPoint::new(vec![5, 7], 3).unwrap()).unwrap());
        assert!(!b.contains(&DyadicPoint::new(vec![5, 5], 3).unwrap()).unwrap());
        assert!(b.contains(&DyadicPoint::new(vec![5], 3).unwrap()).is_err());
        assert!(ElementaryBox::delta(vec![1], vec![2]).is_err());
        // Π_a for a > s partitions (0, 2^{-s}): each nonzero point of a fine grid lies in exactly one
        let s = 2;
        for m in 1..(1u64 << 8) >> s {
            let p = DyadicPoint::new(vec![m], 8).unwrap();
            let hits = (s + 1..=8).filter(|&a| ElementaryBox::pi(vec![a]).unwrap().contains(&p).unwrap()).count();
            assert_eq!(hits, 1);
        }
        assert_eq!(kappa(&[0, 0, 0]), 0);
        assert_eq!(kappa(&[0, 2, 1]), 2);
    }

    #[test]
    fn pi_flavor_agrees_with_delta_flavor() {
        for a in 0..=4u32 {
            let pi = ElementaryBox::pi(vec![a]).unwrap();
            let delta = ElementaryBox::delta(vec![a], vec![(a >= 1) as u64]).unwrap();
            for m in 0..32 {
                let p = DyadicPoint::new(vec![m], 5).unwrap();
                assert_eq!(pi.contains(&p).unwrap(), delta.contains(&p).unwrap());
                let lvl = pi_level(level_index(m, 5, 4), 4);
                if a >= 1 {
                    assert_eq!(pi.contains(&p).unwrap(), lvl == a);
                }
            }
        }
    }

    #[test]
    fn from_f64_quantizes_down() {
        assert_eq!(DyadicScalar::from_f64(0.7, 2).unwrap(), sc(1, 1));
        assert_eq!(DyadicScalar::from_f64(0.999, 64).unwrap().bit(1), 1);
        assert!(DyadicScalar::from_f64(1.0, 8).is_err());
        let p = DyadicPoint::from_f64(&[0.25, 0.5], 4).unwrap();
        assert_eq!(p.mantissas(), &[4, 8]);
        assert_eq!(p.volume(), Dyadic::pow2_neg(3));
        assert!(p.is_on_grid(2));
        assert!(!p.is_on_grid(1));
    }
}
