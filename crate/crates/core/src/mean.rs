//! Mean discrepancies over the dyadic shift group `Q^d(2^s)`, the principal and error terms of
//! the shifted decomposition, and extremal shift search.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::decomposition::{check_grid_guard, sweep_truncated, uniform_error_bound, MicroLocalTable};
use crate::discrepancy::{bracket, grid_sweep, l2_squared, linf_exact, Method};
use crate::dyadic::{level_index, mask, DyadicPoint};
use crate::error::{invalid, Error, Result};
use crate::exact::{Dyadic, PowerSum};
use crate::exponent::Exponent;
use crate::pointset::{check_net, PointSet};
use crate::report::{self, ExactNumber, ExactPower};

/// Exact mode enumerates at most `2^24` shifts.
pub const SHIFT_LIMIT_LOG2: u32 = 24;
/// Shift-anchor pair enumeration is capped at `2^28`.
pub const PAIR_LIMIT_LOG2: u32 = 28;

/// How shifts `T ∈ Q^d(2^s)` are chosen.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ShiftMode {
    /// All `2^{ds}` shifts.
    Exact,
    /// `count` uniform shifts; shift `i` comes from stream `i` of a ChaCha8 generator seeded
    /// with `seed`, so the sample does not depend on how work is split.
    Sampled { count: u64, seed: u64 },
}

/// The shifts actually averaged over, as recorded in reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Averaging {
    Exact { shifts: u64 },
    Sampled { count: u64, seed: u64 },
    Subset { size: u64 },
}

/// Shift number `i` of the sampled stream.
pub fn sampled_shift(seed: u64, i: u64, d: usize, s: u32) -> DyadicPoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    let m = (0..d).map(|_| if s == 0 { 0 } else { rng.next_u64() >> (64 - s) }).collect();
    DyadicPoint::new_unchecked(m, s)
}

/// Shift number `t` in lexicographic order (first coordinate slowest).
pub fn enumerated_shift(t: u64, d: usize, s: u32) -> DyadicPoint {
    let m = (0..d).map(|j| (t >> (s as usize * (d - 1 - j))) & mask(s)).collect();
    DyadicPoint::new_unchecked(m, s)
}

fn guard_shifts(d: usize, s: u32, limit: u32, what: &'static str) -> Result<u64> {
    let need = d as u64 * s as u64;
    if need > limit as u64 {
        return Err(Error::Guard {
            what,
            needed_log2: need as f64,
            limit_log2: limit as f64,
            hint: "use sampled mode",
        });
    }
    Ok(1u64 << need)
}

/// The list of shifts a mode stands for.
#[derive(Clone, Debug)]
pub(crate) enum ShiftList<'a> {
    Enumerated { d: usize, s: u32, count: u64 },
    Sampled { d: usize, s: u32, count: u64, seed: u64 },
    Given(&'a [DyadicPoint]),
}

impl ShiftList<'_> {
    pub(crate) fn from_mode(mode: &ShiftMode, d: usize, s: u32, limit: u32, what: &'static str) -> Result<Self> {
        match *mode {
            ShiftMode::Exact => Ok(ShiftList::Enumerated { d, s, count: guard_shifts(d, s, limit, what)? }),
            ShiftMode::Sampled { count, seed } => {
                if count == 0 {
                    return Err(invalid("sampled mode needs at least one shift"));
                }
                Ok(ShiftList::Sampled { d, s, count, seed })
            }
        }
    }

    pub(crate) fn len(&self) -> u64 {
        match self {
            ShiftList::Enumerated { count, .. } | ShiftList::Sampled { count, .. } => *count,
            ShiftList::Given(v) => v.len() as u64,
        }
    }

    pub(crate) fn get(&self, i: u64) -> DyadicPoint {
        match *self {
            ShiftList::Enumerated { d, s, .. } => enumerated_shift(i, d, s),
            ShiftList::Sampled { d, s, seed, .. } => sampled_shift(seed, i, d, s),
            ShiftList::Given(v) => v[i as usize].clone(),
        }
    }

    fn averaging(&self) -> Averaging {
        match *self {
            ShiftList::Enumerated { count, .. } => Averaging::Exact { shifts: count },
            ShiftList::Sampled { count, seed, .. } => Averaging::Sampled { count, seed },
            ShiftList::Given(v) => Averaging::Subset { size: v.len() as u64 },
        }
    }

    /// Runs `f` on every shift in parallel and returns the results in shift order.
    pub(crate) fn map<T: Send>(&self, f: impl Fn(&DyadicPoint) -> Result<T> + Sync) -> Result<Vec<T>> {
        (0..self.len()).into_par_iter().map(|i| f(&self.get(i))).collect()
    }
}

/// `min(max(s, ⌈log₂ N⌉), ⌊20/d⌋)`: the level of the grid used for `L_q` brackets.
pub fn default_grid_level(d: usize, n: usize, s: u32) -> u32 {
    let log_n = if n <= 1 { 0 } else { usize::BITS - (n - 1).leading_zeros() };
    s.max(log_n).min(20 / d as u32)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeanDiscrepancyEstimate {
    pub q: Exponent,
    pub s: u32,
    pub n: usize,
    pub d: usize,
    /// The mean over the shifts averaged (the maximum for `q = ∞`).
    #[serde(serialize_with = "report::float")]
    pub value: f64,
    /// Bracket from per-shift evaluation error; sampling error is not included.
    #[serde(serialize_with = "report::float")]
    pub lower: f64,
    /// Absent for sampled `q = ∞`, where the sample maximum is only a lower bound.
    #[serde(serialize_with = "report::opt_float")]
    pub upper: Option<f64>,
    pub mode: Averaging,
    pub per_shift_method: Method,
    pub grid_level: Option<u32>,
    /// Sampled mode: one-sided 95% normal-approximation lower bound on the mean of
    /// `L_q^q` (rooted); for `q = ∞` the certified sample maximum.
    #[serde(serialize_with = "report::opt_float")]
    pub lower_confidence: Option<f64>,
    /// `value^power` exactly, when every per-shift value is exact.
    pub exact: Option<ExactPower>,
}

/// Per-shift results for a list of exponents.
struct ShiftEval {
    l2: Option<BigRational>,
    linf: Option<BigRational>,
    grid: Vec<(f64, f64, f64)>,
}

fn evaluate_shift(d: &PointSet, t: &DyadicPoint, qs: &[Exponent], level: u32) -> Result<ShiftEval> {
    let shifted = d.shift(t)?;
    let l2 = qs.contains(&Exponent::Finite(2.0)).then(|| l2_squared(&shifted));
    let linf = if qs.iter().any(|q| q.is_infinite()) {
        Some(linf_exact(&shifted)?.exact.expect("critical grid is exact").ratio)
    } else {
        None
    };
    let grid_qs: Vec<f64> = grid_exponents(qs);
    let grid = if grid_qs.is_empty() {
        Vec::new()
    } else {
        let (sums, _) = grid_sweep(&shifted, &grid_qs, level)?;
        grid_qs
            .iter()
            .zip(&sums)
            .map(|(&q, p)| bracket(&shifted, q, level, p).map(|b| (b.value, b.lower, b.upper)))
            .collect::<Result<_>>()?
    };
    Ok(ShiftEval { l2, linf, grid })
}

fn grid_exponents(qs: &[Exponent]) -> Vec<f64> {
    let mut v: Vec<f64> = qs
        .iter()
        .filter_map(|q| match q {
            Exponent::Finite(x) if *x != 2.0 => Some(*x),
            _ => None,
        })
        .collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup();
    v
}

/// `M_{s,q}[D]` for one exponent.
pub fn mean_lq(d: &PointSet, s: u32, q: Exponent, mode: &ShiftMode) -> Result<MeanDiscrepancyEstimate> {
    Ok(mean_lq_many(d, s, &[q], mode, None)?.remove(0))
}

/// `M_{s,q}[D]` for several exponents from one pass over the shifts.
pub fn mean_lq_many(
    d: &PointSet,
    s: u32,
    qs: &[Exponent],
    mode: &ShiftMode,
    grid_level: Option<u32>,
) -> Result<Vec<MeanDiscrepancyEstimate>> {
    let shifts = ShiftList::from_mode(mode, d.dim(), s, SHIFT_LIMIT_LOG2, "exact shift enumeration")?;
    average(d, s, qs, &shifts, grid_level)
}

/// `(|V|^{-1} Σ_{T ∈ V} L_q[D ⊕ T]^q)^{1/q}` over a given shift subset.
pub fn conditional_mean(
    d: &PointSet,
    s: u32,
    q: Exponent,
    shifts: &[DyadicPoint],
    grid_level: Option<u32>,
) -> Result<MeanDiscrepancyEstimate> {
    if shifts.is_empty() {
        return Err(invalid("the shift subset is empty"));
    }
    for t in shifts {
        if t.dim() != d.dim() || !t.is_on_grid(s) {
            return Err(invalid(format!("shift {t} is not in Q^{}(2^{s})", d.dim())));
        }
    }
    Ok(average(d, s, &[q], &ShiftList::Given(shifts), grid_level)?.remove(0))
}

fn average(
    d: &PointSet,
    s: u32,
    qs: &[Exponent],
    shifts: &ShiftList,
    grid_level: Option<u32>,
) -> Result<Vec<MeanDiscrepancyEstimate>> {
    let level = grid_level.unwrap_or_else(|| default_grid_level(d.dim(), d.len(), s));
    let grid_qs = grid_exponents(qs);
    if !grid_qs.is_empty() {
        check_grid_guard(d.dim(), d.len(), level)?;
    }
    let evals = shifts.map(|t| evaluate_shift(d, t, qs, level))?;
    let count = evals.len() as f64;
    let averaging = shifts.averaging();
    let sampled = matches!(averaging, Averaging::Sampled { .. });
    let base = |q: Exponent| MeanDiscrepancyEstimate {
        q,
        s,
        n: d.len(),
        d: d.dim(),
        value: 0.0,
        lower: 0.0,
        upper: None,
        mode: averaging.clone(),
        per_shift_method: Method::ExactClosedForm,
        grid_level: None,
        lower_confidence: None,
        exact: None,
    };
    let mut out = Vec::with_capacity(qs.len());
    for &q in qs {
        let mut est = base(q);
        match q {
            Exponent::Infinity => {
                let best = evals.iter().map(|e| e.linf.clone().unwrap()).max().unwrap_or_else(BigRational::zero);
                let v = best.to_f64().unwrap_or(f64::NAN);
                est.per_shift_method = Method::ExactCriticalGrid;
                est.value = v;
                est.lower = v;
                est.upper = (!sampled).then_some(v);
                est.lower_confidence = sampled.then_some(v);
                est.exact = Some(ExactPower::new(1, best));
            }
            Exponent::Finite(2.0) => {
                let vals: Vec<&BigRational> = evals.iter().map(|e| e.l2.as_ref().unwrap()).collect();
                let total = sum_common(&vals);
                let mean = total / BigInt::from(evals.len());
                let v = mean.to_f64().unwrap_or(f64::NAN).sqrt();
                est.value = v;
                est.lower = v;
                est.upper = Some(v);
                if sampled {
                    let xs: Vec<f64> = vals.iter().map(|r| r.to_f64().unwrap_or(f64::NAN)).collect();
                    est.lower_confidence = Some(confidence_lower(&xs, 2.0));
                }
                est.exact = Some(ExactPower::new(2, mean));
            }
            Exponent::Finite(qv) => {
                let k = grid_qs.iter().position(|&g| g == qv).unwrap();
                let (mut sv, mut sl, mut su) = (0.0, 0.0, 0.0);
                for e in &evals {
                    let (v, l, u) = e.grid[k];
                    sv += v.powf(qv);
                    sl += l.powf(qv);
                    su += u.powf(qv);
                }
                est.per_shift_method = Method::GridDecomposition;
                est.grid_level = Some(level);
                est.value = (sv / count).powf(1.0 / qv);
                est.lower = (sl / count).powf(1.0 / qv);
                est.upper = Some((su / count).powf(1.0 / qv));
                if sampled {
                    let xs: Vec<f64> = evals.iter().map(|e| e.grid[k].1.powf(qv)).collect();
                    est.lower_confidence = Some(confidence_lower(&xs, qv));
                }
            }
        }
        out.push(est);
    }
    Ok(out)
}

/// Sums rationals in order, over a common denominator when they share one.
fn sum_common(vals: &[&BigRational]) -> BigRational {
    let mut acc = BigRational::zero();
    let mut run_num = BigInt::zero();
    let mut run_den: Option<BigInt> = None;
    for v in vals {
        match &run_den {
            Some(den) if den == v.denom() => run_num += v.numer(),
            _ => {
                if let Some(den) = run_den.take() {
                    acc += BigRational::new(std::mem::take(&mut run_num), den);
                }
                run_num = v.numer().clone();
                run_den = Some(v.denom().clone());
            }
        }
    }
    if let Some(den) = run_den {
        acc += BigRational::new(run_num, den);
    }
    acc
}

/// `max(m − 1.645·sd/√n, 0)^{1/q}` for sample values `x = L_q^q`.
fn confidence_lower(xs: &[f64], q: f64) -> f64 {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return m.max(0.0).powf(1.0 / q);
    }
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m - 1.6448536269514722 * (var / n).sqrt()).max(0.0).powf(1.0 / q)
}

/// A principal-term value with its exact power sum when `q` is an integer.
#[derive(Clone, Debug, Serialize)]
pub struct PrincipalTerm {
    pub q: Exponent,
    pub s: u32,
    #[serde(serialize_with = "report::float")]
    pub value: f64,
    pub mode: Averaging,
    /// `Σ_{Z,Y} |2^{d(s+1)} F^{(s)}[D,Z,Y]|^q`, exact for integer `q`.
    pub power_sum: Option<String>,
    #[serde(skip)]
    pub raw: PowerSum,
}

fn finish_principal(q: f64, s: u32, d: usize, raw: PowerSum, count: u64, mode: Averaging) -> PrincipalTerm {
    let ds = d as u32 * s;
    // mean over the averaged Z and over Y ∈ Q^d(2^s)
    let log_count = (count as f64).log2();
    let total = raw.to_f64();
    let value = if total == 0.0 {
        0.0
    } else {
        let scaled = raw.norm(ds, d as u32 * (s + 1));
        scaled * (-(log_count) / q).exp2()
    };
    PrincipalTerm {
        q: Exponent::Finite(q),
        s,
        value,
        mode,
        power_sum: raw.exact().map(|b| b.to_string()),
        raw,
    }
}

/// `M^{(s)}_q[D] = (2^{-ds} Σ_Z F^{(s)}_q[D,Z]^q)^{1/q}`, each `F^{(s)}_q[D,Z]` the grid norm
/// of the polynomial built from the micro-local table at `Z`.
pub fn principal_term_mq(d: &PointSet, s: u32, q: f64, mode: &ShiftMode) -> Result<PrincipalTerm> {
    let q = Exponent::finite(q)?.value();
    let zs = ShiftList::from_mode(mode, d.dim(), s, PAIR_LIMIT_LOG2 / 2, "principal-term enumeration")?;
    guard_shifts(d.dim(), s, crate::rademacher::GRID_LIMIT_LOG2, "principal-term grid")?;
    let parts = zs.map(|z| {
        let poly = MicroLocalTable::build(d, s, z)?.to_polynomial()?;
        poly.grid_power_sum(q)
    })?;
    let mut raw = PowerSum::new(q);
    for p in &parts {
        raw.merge(p);
    }
    Ok(finish_principal(q, s, d.dim(), raw, zs.len(), zs.averaging()))
}

/// The same quantity as a direct double sum over `(T, Y)` of `|L^{(s)}[D ⊕ T, Y]|^q`.
pub fn principal_term_direct(d: &PointSet, s: u32, q: f64) -> Result<PrincipalTerm> {
    let q = Exponent::finite(q)?.value();
    guard_shifts(d.dim(), s, PAIR_LIMIT_LOG2 / 2, "principal-term enumeration")?;
    let ts = ShiftList::from_mode(&ShiftMode::Exact, d.dim(), s, SHIFT_LIMIT_LOG2, "shift enumeration")?;
    let parts = ts.map(|t| {
        let mut p = PowerSum::new(q);
        sweep_truncated(&d.shift(t)?, s, |_, row| p.add_slice(row))?;
        Ok(p)
    })?;
    let mut raw = PowerSum::new(q);
    for p in &parts {
        raw.merge(p);
    }
    Ok(finish_principal(q, s, d.dim(), raw, ts.len(), ts.averaging()))
}

/// `τ(T, Y) = (T ⊕ Y, Y)`.
pub fn tau_map(t: &DyadicPoint, y: &DyadicPoint) -> Result<(DyadicPoint, DyadicPoint)> {
    Ok((t.xor(y)?, y.clone()))
}

/// `F^{(s)}_{1,∞}[D] = 2^{-ds} Σ_Z max_Y |F^{(s)}[D,Z,Y]|`.
#[derive(Clone, Debug, Serialize)]
pub struct PrincipalInf {
    pub s: u32,
    #[serde(serialize_with = "report::float")]
    pub value: f64,
    pub exact: Option<ExactNumber>,
    pub mode: Averaging,
    /// Smallest per-`Z` ratio `F^{(s)}_∞[D,Z] / (α_1^{d-1} Q_{1,2})`, when `d ≥ 2`.
    #[serde(serialize_with = "report::opt_float")]
    pub min_lemma32_ratio: Option<f64>,
}

pub fn principal_term_finf(d: &PointSet, s: u32, mode: &ShiftMode) -> Result<PrincipalInf> {
    let zs = ShiftList::from_mode(mode, d.dim(), s, PAIR_LIMIT_LOG2 / 2, "principal-term enumeration")?;
    guard_shifts(d.dim(), s, crate::rademacher::GRID_LIMIT_LOG2, "principal-term grid")?;
    let dim = d.dim();
    let parts = zs.map(|z| {
        let poly = MicroLocalTable::build(d, s, z)?.to_polynomial()?;
        let sup = poly.sup_norm()?;
        let ratio = if dim >= 2 {
            let b = poly.lemma32_bound()?;
            (b.bound > 0.0).then(|| b.sup_norm / b.bound)
        } else {
            None
        };
        Ok((sup, ratio))
    })?;
    let total: Dyadic = parts.iter().map(|p| p.0.clone()).sum();
    let mean_exact = total.to_ratio() / BigInt::from(zs.len());
    let value = mean_exact.to_f64().unwrap_or(f64::NAN);
    let min_ratio = parts.iter().filter_map(|p| p.1).fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.min(r))));
    Ok(PrincipalInf {
        s,
        value,
        exact: Some(ExactNumber::from(&mean_exact)),
        mode: zs.averaging(),
        min_lemma32_ratio: min_ratio,
    })
}

/// Bounds on the error-term norms `E^{(s)}_q[D]` and `E^{(s)}_{1,∞}[D]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorTermBounds {
    pub q: Exponent,
    pub s: u32,
    /// The smallest applicable bound on `E^{(s)}_q`.
    #[serde(serialize_with = "report::float")]
    pub eq_bound: f64,
    /// Deficiency certified by `check_net` when `N = 2^s`.
    pub net_delta: Option<u32>,
    /// `d 2^δ` for a certified net.
    #[serde(serialize_with = "report::opt_float")]
    pub net_bound: Option<f64>,
    /// `dN2^{-s}` for `q ≤ 1`, the coincidence bound `(1/2)(Σ_j max_m N_{j,m} + dN2^{-s})` otherwise.
    #[serde(serialize_with = "report::float")]
    pub generic_bound: f64,
    /// `dN2^{-s}`
    #[serde(serialize_with = "report::float")]
    pub e1inf_bound: f64,
}

pub fn error_term_norms(d: &PointSet, s: u32, q: Exponent) -> Result<ErrorTermBounds> {
    let n = d.len();
    let dn = d.dim() as f64 * n as f64 * (-(s as f64)).exp2();
    let uniform = uniform_error_bound(d, s)?.to_f64();
    let generic = match q {
        Exponent::Finite(q) if q <= 1.0 => dn.min(uniform),
        _ => uniform,
    };
    let net_delta = if n == 1usize << s.min(63) && n.is_power_of_two() {
        Some(check_net(d, 0)?.minimal_delta)
    } else {
        None
    };
    let net_bound = net_delta.map(|delta| d.dim() as f64 * (delta as f64).exp2());
    Ok(ErrorTermBounds {
        q,
        s,
        eq_bound: net_bound.map_or(generic, |b| b.min(generic)),
        net_delta,
        net_bound,
        generic_bound: generic,
        e1inf_bound: dn,
    })
}

/// Error-term norms measured from exact residuals `E = L − L^{(s)}` at anchors of a finer grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasuredErrors {
    pub q: Exponent,
    pub s: u32,
    pub fine_level: u32,
    /// `(2^{-ds} Σ_T 2^{-df} Σ_Y |E[D⊕T,Y]|^q)^{1/q}` (max for `q = ∞`).
    #[serde(serialize_with = "report::float")]
    pub eq: f64,
    /// `2^{-ds} Σ_T max_Y |E[D⊕T,Y]|`
    #[serde(serialize_with = "report::float")]
    pub e1inf: f64,
    #[serde(serialize_with = "report::float")]
    pub max_abs: f64,
}

pub fn measured_error_norms(d: &PointSet, s: u32, q: Exponent, fine: u32) -> Result<MeasuredErrors> {
    let dim = d.dim();
    if fine <= s {
        return Err(invalid("the anchor grid must be finer than s"));
    }
    guard_shifts(dim, s + fine, SHIFT_LIMIT_LOG2, "residual sweep")?;
    let ts = ShiftList::from_mode(&ShiftMode::Exact, dim, s, SHIFT_LIMIT_LOG2, "residual sweep")?;
    let up = dim as u32 * (fine - s - 1);
    let side = 1usize << fine;
    let cells = 1usize << (dim as u32 * fine);
    let n = d.len() as i128;
    let qv = q.value();
    let per = ts.map(|t| {
        let shifted = d.shift(t)?;
        let mut coarse = Vec::with_capacity(1 << (dim as u32 * s));
        sweep_truncated(&shifted, s, |_, row| coarse.extend_from_slice(row))?;
        // strict prefix counts on the fine grid
        let mut cnt = vec![0i64; cells];
        for row in shifted.rows() {
            let idx = row.iter().fold(0usize, |a, &m| a * side + level_index(m, shifted.precision(), fine) as usize);
            cnt[idx] += 1;
        }
        let mut inner = cells;
        for _ in 0..dim {
            inner /= side;
            let outer = cells / (inner * side);
            for o in 0..outer {
                for r in 0..inner {
                    let mut run = 0;
                    for m in 0..side {
                        let k = o * side * inner + m * inner + r;
                        let v = cnt[k];
                        cnt[k] = run;
                        run += v;
                    }
                }
            }
        }
        let mut p = PowerSum::new(if qv.is_finite() { qv } else { 1.0 });
        let mut max = 0u128;
        for (y, &c) in cnt.iter().enumerate() {
            let mut vol = n;
            let mut coarse_idx = 0usize;
            let mut r = y;
            let mut digits = vec![0usize; dim];
            for j in (0..dim).rev() {
                digits[j] = r % side;
                r /= side;
            }
            for &m in &digits {
                vol *= m as i128;
                coarse_idx = (coarse_idx << s) | (m >> (fine - s));
            }
            let l = ((c as i128) << (dim as u32 * fine)) - vol;
            let e = l - ((coarse[coarse_idx] as i128) << up);
            max = max.max(e.unsigned_abs());
            p.add(e);
        }
        Ok((p, max))
    })?;
    let scale = dim as u32 * fine;
    let e1inf = per.iter().map(|(_, m)| *m as f64).sum::<f64>() / ts.len() as f64 * (-(scale as f64)).exp2();
    let max_abs = per.iter().map(|(_, m)| *m).max().unwrap_or(0) as f64 * (-(scale as f64)).exp2();
    let eq = if qv.is_finite() {
        let mut total = PowerSum::new(qv);
        for (p, _) in &per {
            total.merge(p);
        }
        total.norm(dim as u32 * (s + fine), scale)
    } else {
        max_abs
    };
    Ok(MeasuredErrors { q, s, fine_level: fine, eq, e1inf, max_abs })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    MinimizeLq,
    MaximizeLq,
    MaximizeLinf,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftSearchResult {
    pub best_shift: Vec<u64>,
    pub shift_precision: u32,
    #[serde(serialize_with = "report::float")]
    pub best_value: f64,
    pub objective: Objective,
    pub q: Exponent,
    pub shifts_examined: u64,
    pub exhaustive: bool,
    pub method: Method,
}

/// Scans shifts for the extremal discrepancy; ties keep the first shift in scan order.
///
/// With `budget ≥ 2^{ds}` every shift is examined in lexicographic order; otherwise
/// `budget` shifts are sampled with `seed`.
pub fn shift_search(
    d: &PointSet,
    s: u32,
    objective: Objective,
    q: Exponent,
    budget: u64,
    seed: u64,
) -> Result<ShiftSearchResult> {
    if budget == 0 {
        return Err(invalid("the search budget must be at least 1"));
    }
    let q = if objective == Objective::MaximizeLinf { Exponent::Infinity } else { q };
    if q.is_infinite() && objective != Objective::MaximizeLinf {
        return Err(invalid("use the maximize-linf objective for q = inf"));
    }
    let ds = d.dim() as u64 * s as u64;
    let exhaustive = ds < 64 && budget >= 1u64 << ds;
    let shifts = if exhaustive {
        ShiftList::from_mode(&ShiftMode::Exact, d.dim(), s, SHIFT_LIMIT_LOG2, "exhaustive search")?
    } else {
        ShiftList::Sampled { d: d.dim(), s, count: budget, seed }
    };
    let level = default_grid_level(d.dim(), d.len(), s);
    let eval = |shifted: &PointSet| -> Result<(f64, Method)> {
        let r = crate::discrepancy::discrepancy(shifted, q, level)?;
        Ok((r.value, r.method))
    };
    let values = shifts.map(|t| eval(&d.shift(t)?).map(|v| v.0))?;
    let mut best = 0usize;
    for (i, &v) in values.iter().enumerate() {
        let better = match objective {
            Objective::MinimizeLq => v < values[best],
            _ => v > values[best],
        };
        if better {
            best = i;
        }
    }
    let t = shifts.get(best as u64);
    let (best_value, method) = eval(&d.shift(&t)?)?;
    Ok(ShiftSearchResult {
        best_shift: t.mantissas().to_vec(),
        shift_precision: t.precision(),
        best_value,
        objective,
        q,
        shifts_examined: shifts.len(),
        exhaustive,
        method,
    })
}

/// `⟨⟨t⟩⟩`, the distance to the nearest integer.
pub fn nearest_int_dist(t: f64) -> f64 {
    (t - t.round()).abs()
}

/// `⟨⟨t⟩⟩` for an exact dyadic `t`.
pub fn nearest_int_dist_exact(t: &Dyadic) -> Dyadic {
    let e = t.exp();
    if e == 0 {
        return Dyadic::zero();
    }
    let one = BigInt::from(1u8) << e;
    let r = t.numer().clone() % &one;
    let r = if r < BigInt::zero() { r + &one } else { r };
    let other = &one - &r;
    Dyadic::new(r.min(other), e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrepancy::l2_exact;
    use crate::pointset::generate_bitrev_net;

    fn origin() -> PointSet {
        PointSet::new(1, 8, vec![0]).unwrap()
    }

    #[test]
    fn mean_examples() {
        let m = mean_lq(&origin(), 1, Exponent::Finite(1.0), &ShiftMode::Exact).unwrap();
        assert!(m.lower <= 0.375 && 0.375 <= m.upper.unwrap(), "{m:?}");
        let m = mean_lq(&origin(), 1, Exponent::Infinity, &ShiftMode::Exact).unwrap();
        assert_eq!(m.value, 1.0);
        let m = mean_lq(&origin(), 1, Exponent::Finite(2.0), &ShiftMode::Exact).unwrap();
        // (1/2)(1/3 + 1/12) = 5/24
        assert_eq!(m.exact.unwrap().value.exact, "5/24");
    }

    #[test]
    fn mean_is_shift_invariant() {
        let d = PointSet::new(2, 4, vec![1, 14, 7, 4, 9, 9]).unwrap();
        let t0 = DyadicPoint::new(vec![2, 1], 2).unwrap();
        for q in [Exponent::Finite(2.0), Exponent::Infinity] {
            let a = mean_lq(&d, 2, q, &ShiftMode::Exact).unwrap();
            let b = mean_lq(&d.shift(&t0).unwrap(), 2, q, &ShiftMode::Exact).unwrap();
            assert_eq!(a.exact, b.exact);
        }
    }

    #[test]
    fn conditional_means() {
        let d = PointSet::new(1, 6, vec![5, 40, 22]).unwrap();
        let all: Vec<DyadicPoint> = (0..8).map(|t| enumerated_shift(t, 1, 3)).collect();
        let q = Exponent::Finite(2.0);
        let full = mean_lq(&d, 3, q, &ShiftMode::Exact).unwrap();
        assert_eq!(conditional_mean(&d, 3, q, &all, None).unwrap().exact, full.exact);
        let zero = conditional_mean(&d, 3, q, &all[..1], None).unwrap();
        assert_eq!(zero.value, l2_exact(&d).value);
        assert!(conditional_mean(&d, 3, q, &[], None).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_uniform_in_range() {
        let a: Vec<_> = (0..5).map(|i| sampled_shift(7, i, 3, 5)).collect();
        let b: Vec<_> = (0..5).map(|i| sampled_shift(7, i, 3, 5)).collect();
        assert_eq!(a, b);
        assert!(a.iter().all(|t| t.mantissas().iter().all(|&m| m < 32)));
        assert_ne!(a[0], a[1]);
    }

    #[test]
    fn principal_routes_agree() {
        let d = PointSet::new(2, 5, vec![1, 30, 17, 4, 9, 9]).unwrap();
        for q in [1.0, 2.0, 4.0] {
            let a = principal_term_mq(&d, 2, q, &ShiftMode::Exact).unwrap();
            let b = principal_term_direct(&d, 2, q).unwrap();
            assert_eq!(a.raw.exact(), b.raw.exact());
        }
        let e = PointSet::empty(1, 3).unwrap();
        assert_eq!(principal_term_mq(&e, 3, 1.0, &ShiftMode::Exact).unwrap().value, 0.0);
        assert_eq!(principal_term_finf(&e, 3, &ShiftMode::Exact).unwrap().value, 0.0);
    }

    #[test]
    fn error_bounds() {
        let grid = PointSet::full_grid(1, 4).unwrap();
        let b = error_term_norms(&grid, 4, Exponent::Finite(2.0)).unwrap();
        assert_eq!(b.net_delta, Some(0));
        assert_eq!(b.net_bound, Some(1.0));
        let d = PointSet::new(2, 12, vec![1, 2, 3, 4, 5, 6, 7, 8]).unwrap();
        let b = error_term_norms(&d, 10, Exponent::Finite(1.0)).unwrap();
        assert_eq!(b.e1inf_bound, 1.0 / 128.0);
        let net = generate_bitrev_net(3).unwrap();
        for q in [Exponent::Finite(0.5), Exponent::Finite(2.0), Exponent::Infinity] {
            let m = measured_error_norms(&net, 2, q, 4).unwrap();
            let b = error_term_norms(&net, 2, q).unwrap();
            assert!(m.eq <= b.eq_bound, "{m:?} {b:?}");
            assert!(m.e1inf <= b.e1inf_bound);
        }
    }

    #[test]
    fn search_examples() {
        let r = shift_search(&origin(), 1, Objective::MinimizeLq, Exponent::Finite(2.0), 10, 0).unwrap();
        assert_eq!(r.best_shift, vec![1]);
        assert!(r.exhaustive);
        assert_eq!(r.best_value, l2_exact(&PointSet::new(1, 8, vec![128]).unwrap()).value);
    }

    #[test]
    fn nearest_integer() {
        assert_eq!(nearest_int_dist(1.75), 0.25);
        assert_eq!(nearest_int_dist(3.0), 0.0);
        assert_eq!(nearest_int_dist_exact(&Dyadic::new(7, 2)), Dyadic::new(1, 2));
        assert_eq!(nearest_int_dist_exact(&Dyadic::new(-3, 2)), Dyadic::new(1, 2));
        assert_eq!(nearest_int_dist_exact(&Dyadic::from_int(5)), Dyadic::zero());
        assert_eq!(default_grid_level(2, 1024, 6), 10);
        assert_eq!(default_grid_level(2, 4, 11), 10);
        assert_eq!(default_grid_level(3, 4, 2), 2);
        assert_eq!(default_grid_level(3, 4, 9), 6);
    }
}
