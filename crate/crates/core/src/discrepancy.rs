//! Local discrepancy, exact `L_2` and `L_∞` discrepancy, and grid `L_q` brackets.

use std::ops::{Add, Mul};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::decomposition::{coincidence_counts, sweep_truncated, uniform_error_bound};
use crate::dyadic::{check_dim, level_index, DyadicPoint};
use crate::error::{invalid, Error, Result};
use crate::exact::{Dyadic, PowerSum, Wide};
use crate::exponent::Exponent;
use crate::pointset::PointSet;
use crate::report::{self, ExactNumber, ExactPower};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactClosedForm,
    ExactCriticalGrid,
    GridDecomposition,
}

impl Method {
    pub fn is_exact(self) -> bool {
        !matches!(self, Method::GridDecomposition)
    }
}

/// A discrepancy value with a guaranteed bracket `[lower, upper]` around the true `L_q`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscrepancyResult {
    pub q: Exponent,
    #[serde(serialize_with = "report::float")]
    pub value: f64,
    pub method: Method,
    #[serde(serialize_with = "report::float")]
    pub error_radius: f64,
    #[serde(serialize_with = "report::float")]
    pub lower: f64,
    #[serde(serialize_with = "report::float")]
    pub upper: f64,
    pub s_used: Option<u32>,
    /// `value^power` as an exact rational, when known.
    pub exact: Option<ExactPower>,
}

impl DiscrepancyResult {
    fn exact(q: Exponent, method: Method, power: u32, ratio: BigRational) -> Self {
        let v = ratio.to_f64().unwrap_or(f64::NAN).powf(1.0 / power as f64);
        DiscrepancyResult {
            q,
            value: v,
            method,
            error_radius: 0.0,
            lower: v,
            upper: v,
            s_used: None,
            exact: Some(ExactPower::new(power, ratio)),
        }
    }
}

/// `L[D,Y] = |D ∩ [0,Y)| − |D| vol [0,Y)`.
pub fn local_discrepancy(d: &PointSet, y: &DyadicPoint) -> Result<Dyadic> {
    check_dim(d.dim(), y.dim())?;
    let ya: Vec<u64> = y.coords().into_iter().map(|c| c.aligned()).collect();
    let w = d.precision();
    let count = d
        .rows()
        .filter(|row| {
            row.iter().zip(&ya).all(|(&m, &ya)| level_index(m, w, 64) < ya)
        })
        .count();
    Ok(Dyadic::from_int(count as i64) - Dyadic::from_int(d.len() as i64) * y.volume())
}

/// Accumulator types for the closed-form sums.
trait Acc: Clone + Zero + Add<Output = Self> + Mul<Output = Self> + From<u64> {
    fn big(self) -> BigUint;
}
impl Acc for u128 {
    fn big(self) -> BigUint {
        BigUint::from(self)
    }
}
impl Acc for BigUint {
    fn big(self) -> BigUint {
        self
    }
}

fn bits_of(n: usize) -> u32 {
    usize::BITS - n.leading_zeros()
}

/// Drops trailing zero digits shared by every mantissa.
fn reduced(d: &PointSet) -> (Vec<u64>, u32) {
    let w = d.precision();
    let tz = d.mantissas().iter().filter(|&&m| m != 0).map(|m| m.trailing_zeros()).min().unwrap_or(w).min(w);
    (d.mantissas().iter().map(|&m| m >> tz).collect(), w - tz)
}

/// Exact `L_2` discrepancy from the double-sum closed form.
///
/// Expanding the square of `L[D,Y] = Σ_x Π_j [x_j < y_j] − N Π_j y_j` and integrating each
/// product over `U^d` factor by factor:
///
/// ```text
/// ∫ [x_j < y][x'_j < y] dy = 1 − max(x_j, x'_j)
/// ∫ [x_j < y] y dy         = (1 − x_j²) / 2
/// ∫ y² dy                  = 1/3
/// ```
///
/// so `L_2[D]² = Σ_{x,x'} Π_j (1 − max(x_j,x'_j)) − 2N Σ_x Π_j (1 − x_j²)/2 + N² 3^{-d}`.
pub fn l2_exact(d: &PointSet) -> DiscrepancyResult {
    let sq = l2_squared(d);
    DiscrepancyResult::exact(Exponent::Finite(2.0), Method::ExactClosedForm, 2, sq)
}

/// `L_2[D]²` as an exact rational.
pub fn l2_squared(d: &PointSet) -> BigRational {
    let n = d.len();
    let dim = d.dim() as u32;
    if n == 0 {
        return BigRational::zero();
    }
    let (m, w) = reduced(d);
    let fits_pairs = w * dim + 2 * bits_of(n) < 127;
    let a_int = if dim == 2 {
        if fits_pairs {
            pair_sum_2d::<u128>(&m, w)
        } else {
            pair_sum_2d::<BigUint>(&m, w)
        }
    } else if fits_pairs {
        pair_sum::<u128>(&m, dim as usize, w)
    } else {
        pair_sum::<BigUint>(&m, dim as usize, w)
    };
    let b_int = if 2 * w * dim + bits_of(n) < 127 {
        single_sum::<u128>(&m, dim as usize, w)
    } else {
        single_sum::<BigUint>(&m, dim as usize, w)
    };
    let three_d = BigInt::from(3u8).pow(dim);
    let two_d1 = BigInt::from(1u8) << (dim - 1);
    let wd = BigInt::from(1u8) << (w * dim);
    let w2d = BigInt::from(1u8) << (2 * w * dim);
    let nb = BigInt::from(n);
    let num = &three_d * &two_d1 * &wd * BigInt::from(a_int) - &three_d * &nb * BigInt::from(b_int)
        + &nb * &nb * &two_d1 * &w2d;
    BigRational::new(num, three_d * two_d1 * w2d)
}

/// `Σ_{x,x'} Π_j (2^w − max(m_j, m'_j))`.
fn pair_sum<T: Acc>(m: &[u64], dim: usize, w: u32) -> BigUint {
    let n = m.len() / dim;
    let top = 1u128 << w;
    let mut acc = T::zero();
    for i in 0..n {
        let xi = &m[i * dim..(i + 1) * dim];
        let mut diag = T::from(1u64);
        for &a in xi {
            diag = diag * from_u128::<T>(top - a as u128);
        }
        acc = acc + diag;
        for k in i + 1..n {
            let xk = &m[k * dim..(k + 1) * dim];
            let mut p = T::from(2u64);
            for (&a, &b) in xi.iter().zip(xk) {
                p = p * from_u128::<T>(top - a.max(b) as u128);
            }
            acc = acc + p;
        }
    }
    acc.big()
}

fn from_u128<T: Acc>(v: u128) -> T {
    let hi = (v >> 64) as u64;
    let lo = v as u64;
    if hi == 0 {
        T::from(lo)
    } else {
        T::from(hi) * T::from(1u64 << 32) * T::from(1u64 << 32) + T::from(lo)
    }
}

/// The same pair sum for `d = 2` in `O(N log N)`: with `u = 2^w − m_1`, `v = 2^w − m_2`,
/// sort by `u` and sweep a Fenwick tree over `v` ranks holding counts and sums.
fn pair_sum_2d<T: Acc>(m: &[u64], w: u32) -> BigUint {
    let n = m.len() / 2;
    let top = 1u128 << w;
    let mut pts: Vec<(u128, u128)> = (0..n).map(|i| (top - m[2 * i] as u128, top - m[2 * i + 1] as u128)).collect();
    pts.sort_unstable();
    let mut vs: Vec<u128> = pts.iter().map(|p| p.1).collect();
    vs.sort_unstable();
    vs.dedup();
    let rank = |v: u128| vs.partition_point(|&x| x < v);
    let k = vs.len();
    let mut cnt = vec![0u64; k + 1];
    let mut sum = vec![T::zero(); k + 1];
    let mut total_cnt = 0u64;
    let mut total_sum = T::zero();
    let mut acc = T::zero();
    for &(u, v) in pts.iter().rev() {
        // later points have u' ≥ u; Σ_{later} min(v, v') = Σ_{v' ≤ v} v' + v · #{v' > v}
        let r = rank(v) + 1;
        let (mut c_le, mut s_le) = (0u64, T::zero());
        let mut i = r;
        while i > 0 {
            c_le += cnt[i];
            s_le = s_le + sum[i].clone();
            i &= i - 1;
        }
        let inner = s_le + from_u128::<T>(v) * T::from(total_cnt - c_le);
        acc = acc + from_u128::<T>(u) * (T::from(2u64) * inner + from_u128::<T>(v));
        let mut i = r;
        while i <= k {
            cnt[i] += 1;
            sum[i] = sum[i].clone() + from_u128::<T>(v);
            i += i & i.wrapping_neg();
        }
        total_cnt += 1;
        total_sum = total_sum + from_u128::<T>(v);
    }
    let _ = total_sum;
    acc.big()
}

/// `Σ_x Π_j (2^{2w} − m_j²)`.
fn single_sum<T: Acc>(m: &[u64], dim: usize, w: u32) -> BigUint {
    let top = BigUint::from(1u8) << (2 * w);
    let mut acc = T::zero();
    for x in m.chunks_exact(dim) {
        let mut p = T::from(1u64);
        for &a in x {
            let t = &top - BigUint::from(a) * a;
            p = p * big_to::<T>(&t);
        }
        acc = acc + p;
    }
    acc.big()
}

fn big_to<T: Acc>(v: &BigUint) -> T {
    match v.to_u128() {
        Some(x) => from_u128::<T>(x),
        None => {
            let digits = v.to_u64_digits();
            digits.iter().rev().fold(T::zero(), |acc, &dg| {
                acc * T::from(1u64 << 32) * T::from(1u64 << 32) + T::from(dg)
            })
        }
    }
}

/// Largest critical-grid size accepted by [`linf_exact`].
pub const LINF_CANDIDATE_LIMIT: u64 = 10_000_000;

/// Exact `L_∞` discrepancy over the critical grid `Π_j ({x_j} ∪ {1})`.
///
/// At each candidate anchor both the strict count (points below) and the weak count (points
/// at or below, the limit from above) are compared with `N·vol`; each is a limit of values
/// of `L[D,·]` on `U^d`, and together they attain the supremum.
pub fn linf_exact(d: &PointSet) -> Result<DiscrepancyResult> {
    let n = d.len();
    if n == 0 {
        return Ok(DiscrepancyResult::exact(Exponent::Infinity, Method::ExactCriticalGrid, 1, BigRational::zero()));
    }
    let dim = d.dim();
    let (m, w) = reduced(d);
    let mut vals: Vec<Vec<u64>> = (0..dim)
        .map(|j| {
            let mut v: Vec<u64> = m.iter().skip(j).step_by(dim).copied().collect();
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect();
    let mut candidates: u64 = 1;
    for v in &vals {
        candidates = candidates.saturating_mul(v.len() as u64 + 1);
    }
    if candidates > LINF_CANDIDATE_LIMIT {
        return Err(Error::Guard {
            what: "critical-grid L_inf",
            needed_log2: (candidates as f64).log2(),
            limit_log2: (LINF_CANDIDATE_LIMIT as f64).log2(),
            hint: "use grid-decomposition L_q estimates instead",
        });
    }
    let dims: Vec<usize> = vals.iter().map(|v| v.len()).collect();
    let mut strides = vec![1usize; dim];
    for j in (0..dim.saturating_sub(1)).rev() {
        strides[j] = strides[j + 1] * dims[j + 1];
    }
    let total: usize = dims.iter().product();
    let mut prefix = vec![0u32; total];
    for x in m.chunks_exact(dim) {
        let idx: usize = (0..dim).map(|j| vals[j].binary_search(&x[j]).unwrap() * strides[j]).sum();
        prefix[idx] += 1;
    }
    for j in 0..dim {
        let side = dims[j];
        let inner = strides[j];
        let outer = total / (side * inner);
        for o in 0..outer {
            for t in 0..inner {
                let base = o * side * inner + t;
                for k in 1..side {
                    prefix[base + k * inner] += prefix[base + (k - 1) * inner];
                }
            }
        }
    }
    // the value 1 closes each axis
    let top = 1u64 << w.min(63);
    for v in vals.iter_mut() {
        if w < 64 {
            v.push(top);
        }
    }
    let best = if dim as u32 * w + bits_of(n) + 2 < 126 && w < 64 {
        linf_scan::<i128>(&vals, &dims, &strides, &prefix, n, w)
    } else {
        linf_scan::<BigInt>(&vals, &dims, &strides, &prefix, n, w)
    };
    let ratio = BigRational::new(best, BigInt::from(1u8) << (dim as u32 * w));
    Ok(DiscrepancyResult::exact(Exponent::Infinity, Method::ExactCriticalGrid, 1, ratio))
}

fn linf_scan<T: Wide>(vals: &[Vec<u64>], dims: &[usize], strides: &[usize], prefix: &[u32], n: usize, w: u32) -> BigInt {
    let dim = dims.len();
    let top = T::from(1u64).shl(w);
    let value = |j: usize, i: usize| -> T {
        if i == dims[j] {
            top.clone()
        } else {
            T::from(vals[j][i])
        }
    };
    let scale = T::from(1u64).shl(w * dim as u32);
    let nn = T::from(n as u64);
    let mut idx = vec![0usize; dim];
    let mut best = T::zero();
    loop {
        let mut vol = nn.clone();
        for j in 0..dim {
            vol = vol * value(j, idx[j]);
        }
        let closed: usize = (0..dim).map(|j| idx[j].min(dims[j] - 1) * strides[j]).sum();
        let c = T::from(prefix[closed] as u64) * scale.clone() - vol.clone();
        if c.abs() > best {
            best = c.abs();
        }
        if idx.iter().all(|&i| i >= 1) {
            let open: usize = (0..dim).map(|j| (idx[j] - 1) * strides[j]).sum();
            let o = T::from(prefix[open] as u64) * scale.clone() - vol;
            if o.abs() > best {
                best = o.abs();
            }
        } else if vol > best {
            // an empty open box: |0 − N vol|
            best = vol;
        }
        let mut j = dim;
        loop {
            if j == 0 {
                return best.to_bigint();
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] <= dims[j] {
                break;
            }
            idx[j] = 0;
        }
    }
}

/// `(value, lower, upper)` of the grid bracket for one exponent.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Bracket {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Evaluates `‖L^{(s)}[D,·]‖_{s,q}` for several finite `q` in one sweep, and `max |L^{(s)}|`.
pub(crate) fn grid_sweep(d: &PointSet, qs: &[f64], s: u32) -> Result<(Vec<PowerSum>, i64)> {
    let mut sums: Vec<PowerSum> = qs.iter().map(|&q| PowerSum::new(q)).collect();
    let mut sup = 0i64;
    sweep_truncated(d, s, |_, row| {
        sup = row.iter().fold(sup, |m, v| m.max(v.abs()));
        for p in sums.iter_mut() {
            p.add_slice(row);
        }
    })?;
    Ok((sums, sup))
}

/// Bracket from the grid norm and the coincidence bound on `|E^{(s)}|`.
///
/// For `q ≥ 1`, `|E^{(s)}[D,Y]| ≤ (1/2)(Σ_j N_{j,m_j(Y)} + dN2^{-s})` pointwise and Minkowski
/// give `‖E^{(s)}‖_q ≤ (1/2)(Σ_j (2^{-s} Σ_m N_{j,m}^q)^{1/q} + dN2^{-s})`. For `q < 1` the
/// `q`-th powers are subadditive and bound `|‖L‖_q^q − ‖L^{(s)}‖_q^q|` instead.
pub(crate) fn bracket(d: &PointSet, q: f64, s: u32, sum: &PowerSum) -> Result<Bracket> {
    let dim = d.dim() as u32;
    let value = sum.norm(dim * s, dim * (s + 1));
    let counts = coincidence_counts(d, s)?;
    let col_power = |col: &Vec<u64>| col.iter().map(|&c| (c as f64).powf(q)).sum::<f64>() * (-(s as f64)).exp2();
    let dn = dim as f64 * d.len() as f64 * (-(s as f64)).exp2();
    let slack = 1.0 + 1e-12;
    if q >= 1.0 {
        let r = 0.5 * (counts.iter().map(|c| col_power(c).powf(1.0 / q)).sum::<f64>() + dn) * slack;
        Ok(Bracket { value, lower: (value - r).max(0.0), upper: value + r })
    } else {
        let rho = 0.5f64.powf(q) * (counts.iter().map(col_power).sum::<f64>() + dn.powf(q)) * slack;
        let vq = value.powf(q);
        Ok(Bracket { value, lower: (vq - rho).max(0.0).powf(1.0 / q), upper: (vq + rho).powf(1.0 / q) })
    }
}

/// `L_q[D]` bracketed through the truncated part on `Q^d(2^s)`.
pub fn lq_grid(d: &PointSet, q: Exponent, s: u32) -> Result<DiscrepancyResult> {
    let q = q.finite_value("lq_grid")?;
    let (sums, _) = grid_sweep(d, &[q], s)?;
    let b = bracket(d, q, s, &sums[0])?;
    Ok(DiscrepancyResult {
        q: Exponent::Finite(q),
        value: b.value,
        method: Method::GridDecomposition,
        error_radius: (b.value - b.lower).max(b.upper - b.value),
        lower: b.lower,
        upper: b.upper,
        s_used: Some(s),
        exact: None,
    })
}

/// The chain `L_q ≤ L_∞ ≤ 2^{ds/q}(L_q + 2 E^{(s)}_∞)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma62Report {
    pub q: Exponent,
    pub s: u32,
    pub lq: DiscrepancyResult,
    pub linf: DiscrepancyResult,
    pub e_inf_bound: ExactNumber,
    #[serde(serialize_with = "report::float")]
    pub rhs: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub holds: bool,
}

pub fn lemma62_check(d: &PointSet, q: Exponent, s: u32) -> Result<Lemma62Report> {
    let qv = q.finite_value("the L_inf chain")?;
    if qv < 1.0 {
        return Err(invalid("the L_inf chain needs q ≥ 1"));
    }
    let lq = lq_grid(d, q, s)?;
    let linf = linf_exact(d)?;
    let e = uniform_error_bound(d, s)?;
    let rhs = (d.dim() as f64 * s as f64 / qv).exp2() * (lq.upper + 2.0 * e.to_f64());
    let lower_ok = lq.lower <= linf.value * (1.0 + 1e-12);
    let upper_ok = linf.value <= rhs;
    Ok(Lemma62Report {
        q,
        s,
        e_inf_bound: (&e).into(),
        rhs,
        lower_ok,
        upper_ok,
        holds: lower_ok && upper_ok,
        lq,
        linf,
    })
}

/// Best available `L_q` for one set: exact for `q ∈ {2, ∞}`, grid bracket otherwise.
pub fn discrepancy(d: &PointSet, q: Exponent, s: u32) -> Result<DiscrepancyResult> {
    match q {
        Exponent::Infinity => linf_exact(d),
        Exponent::Finite(2.0) => Ok(l2_exact(d)),
        _ => lq_grid(d, q, s),
    }
}
