//! Truncated characteristic functions, micro-local discrepancies and the split
//! `L[D,Y] = L^{(s)}[D,Y] + E^{(s)}[D,Y]`.

use num_bigint::BigInt;
use serde::Serialize;

use crate::dyadic::{check_dim, kappa, level_index, pi_level, rademacher, rademacher_multi, DyadicPoint, DyadicScalar};
use crate::error::{invalid, Error, Result};
use crate::exact::{Dyadic, PowerSum};
use crate::pointset::PointSet;
use crate::rademacher::RademacherPolynomial;
use crate::report::ExactNumber;

/// Largest `ds` for which `2^{ds}` grid cells are enumerated.
pub const GRID_LIMIT_LOG2: u32 = 24;

fn in_pi(z: DyadicScalar, a: u32) -> bool {
    a == 0 || (z.bit(a) == 1 && (1..a).all(|i| z.bit(i) == 0))
}

/// `χ^{(s)}([0,y), x) = 1/2 − (1/2) Σ_{a=1}^s χ(Π_a, x^{(s)} ⊕ y^{(s)}) r_a(y)`.
pub fn chi_s_interval(y: DyadicScalar, x: DyadicScalar, s: u32) -> Dyadic {
    let z = x.project(s).xor(y.project(s));
    let sum: i64 = (1..=s).filter(|&a| in_pi(z, a)).map(|a| rademacher(a, y) as i64).sum();
    // (1 - sum) / 2
    Dyadic::new(1 - sum, 1)
}

/// `ε^{(s)}(x,y) = χ([0,y),x) − χ^{(s)}([0,y),x)`.
pub fn epsilon_interval(y: DyadicScalar, x: DyadicScalar, s: u32) -> Dyadic {
    Dyadic::from_int((x < y) as i64) - chi_s_interval(y, x, s)
}

/// `χ^{(s)}(B_Y, X) = 2^{-d} Σ_{A ∈ I^d_s} (−1)^{κ(A)} χ(Π_A, X^{(s)} ⊕ Y^{(s)}) r_A(Y)`.
pub fn chi_s_box(y: &DyadicPoint, x: &DyadicPoint, s: u32) -> Result<Dyadic> {
    check_dim(y.dim(), x.dim())?;
    let d = y.dim();
    let z = x.project(s).xor(&y.project(s))?;
    let mut acc = 0i64;
    for_each_level(d, s, |a| {
        if a.iter().enumerate().all(|(j, &aj)| in_pi(z.coord(j), aj)) {
            let sign = if kappa(a) % 2 == 0 { 1 } else { -1 };
            acc += sign * rademacher_multi(a, y).unwrap() as i64;
        }
    })?;
    Ok(Dyadic::new(acc, d as u32))
}

/// `vol^{(s)} B_Y = 2^{-d} Σ_{A ∈ I^d_s} (−1)^{κ(A)} vol Π_A r_A(Y)`.
pub fn vol_s(y: &DyadicPoint, s: u32) -> Result<Dyadic> {
    let d = y.dim();
    let e = d as u32 * s;
    let mut acc = BigInt::from(0);
    for_each_level(d, s, |a| {
        let sign = if kappa(a) % 2 == 0 { 1 } else { -1 };
        let lvl: u32 = a.iter().sum();
        acc += BigInt::from(sign * rademacher_multi(a, y).unwrap() as i64) << (e - lvl);
    })?;
    Ok(Dyadic::new(acc, e + d as u32))
}

/// Visits `A ∈ {0..s}^d` in row-major order.
pub(crate) fn for_each_level(d: usize, s: u32, mut f: impl FnMut(&[u32])) -> Result<()> {
    let b = s as u64 + 1;
    let total = b.checked_pow(d as u32).filter(|&t| t <= 1 << 28).ok_or_else(|| invalid("level table too large"))?;
    let mut a = vec![0u32; d];
    for _ in 0..total {
        f(&a);
        for j in (0..d).rev() {
            a[j] += 1;
            if a[j] as u64 == b {
                a[j] = 0;
            } else {
                break;
            }
        }
    }
    Ok(())
}

fn check_grid_point(z: &DyadicPoint, s: u32) -> Result<()> {
    if !z.is_on_grid(s) {
        return Err(invalid(format!("shift {z} is not in Q^d(2^{s})")));
    }
    Ok(())
}

/// `λ_A[D ⊕ Z] = |(D ⊕ Z) ∩ Π_A| − |D| vol Π_A`, by direct counting.
pub fn micro_local(d: &PointSet, s: u32, z: &DyadicPoint, levels: &[u32]) -> Result<Dyadic> {
    check_dim(d.dim(), z.dim())?;
    check_dim(d.dim(), levels.len())?;
    check_grid_point(z, s)?;
    if let Some(&a) = levels.iter().find(|&&a| a > s) {
        return Err(invalid(format!("level {a} outside I_s with s = {s}")));
    }
    let shifted = d.shift(z)?;
    let count = shifted
        .points()
        .iter()
        .filter(|x| levels.iter().enumerate().all(|(j, &a)| in_pi(x.coord(j), a)))
        .count();
    let vol: u32 = levels.iter().sum();
    Ok(Dyadic::from_int(count as i64) - Dyadic::new(d.len() as i64, vol))
}

/// All micro-local discrepancies `λ_A[D ⊕ Z]`, `A ∈ I^d_s`, stored times `2^{ds}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MicroLocalTable {
    d: usize,
    s: u32,
    z: DyadicPoint,
    values: Vec<i128>,
}

impl MicroLocalTable {
    pub fn build(points: &PointSet, s: u32, z: &DyadicPoint) -> Result<Self> {
        let d = points.dim();
        check_dim(d, z.dim())?;
        check_grid_point(z, s)?;
        if d as u64 * s as u64 > 120 {
            return Err(invalid("d·s too large for the micro-local table"));
        }
        let b = s as usize + 1;
        let len = b.checked_pow(d as u32).filter(|&t| t <= 1 << 28).ok_or_else(|| invalid("level table too large"))?;
        let zs: Vec<u64> = z.mantissas().iter().map(|&m| level_index(m, z.precision(), s)).collect();
        // histogram of the leading-digit index of each coordinate
        let mut counts = vec![0i128; len];
        for row in points.rows() {
            let mut idx = 0usize;
            for j in 0..d {
                let m = level_index(row[j], points.precision(), s) ^ zs[j];
                idx = idx * b + pi_level(m, s) as usize;
            }
            counts[idx] += 1;
        }
        // X ∈ Π_A iff each a_j is 0 or equals the leading index: per axis, slot 0 takes the total.
        let mut inner = len;
        for _ in 0..d {
            inner /= b;
            let outer = len / (inner * b);
            for o in 0..outer {
                for t in 0..inner {
                    let base = o * b * inner + t;
                    let total: i128 = (0..b).map(|a| counts[base + a * inner]).sum();
                    counts[base] = total;
                }
            }
        }
        let n = points.len() as i128;
        let e = d as u32 * s;
        let mut values = counts;
        let mut a = vec![0u32; d];
        for v in values.iter_mut() {
            let lvl: u32 = a.iter().sum();
            *v = (*v << e) - (n << (e - lvl));
            for j in (0..d).rev() {
                a[j] += 1;
                if a[j] as usize == b {
                    a[j] = 0;
                } else {
                    break;
                }
            }
        }
        Ok(MicroLocalTable { d, s, z: z.project(s), values })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn shift(&self) -> &DyadicPoint {
        &self.z
    }

    /// Values times `2^{ds}`, row-major in `A`.
    pub fn scaled_values(&self) -> &[i128] {
        &self.values
    }

    fn index_of(&self, levels: &[u32]) -> Result<usize> {
        check_dim(self.d, levels.len())?;
        let mut i = 0;
        for &a in levels {
            if a > self.s {
                return Err(invalid(format!("level {a} outside I_s with s = {}", self.s)));
            }
            i = i * (self.s as usize + 1) + a as usize;
        }
        Ok(i)
    }

    pub fn get(&self, levels: &[u32]) -> Result<Dyadic> {
        Ok(Dyadic::new(self.values[self.index_of(levels)?], self.d as u32 * self.s))
    }

    /// `F^{(s)}[D, Z, ·] = 2^{-d} Σ_A (−1)^{κ(A)} λ_A[D ⊕ Z] r_A` as a polynomial.
    pub fn to_polynomial(&self) -> Result<RademacherPolynomial> {
        let b = self.s as usize + 1;
        let coeffs = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let mut k = 0;
                let mut t = i;
                for _ in 0..self.d {
                    k += (t % b != 0) as usize;
                    t /= b;
                }
                if k % 2 == 0 {
                    v
                } else {
                    -v
                }
            })
            .collect();
        RademacherPolynomial::new(self.d, self.s, self.d as u32 * (self.s + 1), coeffs)
    }

    /// Nonzero entries, for sparse serialization.
    pub fn sparse(&self) -> Vec<MicroLocalEntry> {
        let b = self.s as usize + 1;
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(|(i, &v)| {
                let mut a = vec![0u32; self.d];
                let mut t = i;
                for j in (0..self.d).rev() {
                    a[j] = (t % b) as u32;
                    t /= b;
                }
                MicroLocalEntry { levels: a, value: ExactNumber::from(&Dyadic::new(v, self.d as u32 * self.s)) }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MicroLocalEntry {
    pub levels: Vec<u32>,
    pub value: ExactNumber,
}

impl Serialize for MicroLocalTable {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = ser.serialize_struct("MicroLocalTable", 4)?;
        st.serialize_field("d", &self.d)?;
        st.serialize_field("s", &self.s)?;
        st.serialize_field("z", &self.z.mantissas())?;
        st.serialize_field("nonzero", &self.sparse())?;
        st.end()
    }
}

/// `L^{(s)}[D,Y] = 2^{-d} Σ_A (−1)^{κ(A)} λ_A[D^{(s)} ⊕ Y^{(s)}] r_A(Y)`.
pub fn truncated_discrepancy(d: &PointSet, s: u32, y: &DyadicPoint) -> Result<Dyadic> {
    check_dim(d.dim(), y.dim())?;
    let table = MicroLocalTable::build(d, s, &y.project(s))?;
    let poly = table.to_polynomial()?;
    poly.evaluate(y)
}

/// `(1/2)(Σ_j δ_j + d|D|2^{-s})` with `δ_j = #{X : x_j^{(s)} = y_j^{(s)}}`.
pub fn error_term_bound(d: &PointSet, s: u32, y: &DyadicPoint) -> Result<Dyadic> {
    check_dim(d.dim(), y.dim())?;
    let ys: Vec<u64> = y.mantissas().iter().map(|&m| level_index(m, y.precision(), s)).collect();
    let mut coincide = 0u64;
    for row in d.rows() {
        for (j, &m) in row.iter().enumerate() {
            coincide += (level_index(m, d.precision(), s) == ys[j]) as u64;
        }
    }
    let dn = (d.dim() * d.len()) as u64;
    // (coincide·2^s + dN) / 2^{s+1}
    Ok(Dyadic::new(BigInt::from(coincide) * (BigInt::from(1u8) << s) + dn, s + 1))
}

/// `N_{j,m} = |D ∩ {x_j ∈ [m2^{-s}, (m+1)2^{-s})}|` for each coordinate `j`.
pub fn coincidence_counts(d: &PointSet, s: u32) -> Result<Vec<Vec<u64>>> {
    if s > 26 {
        return Err(Error::Guard { what: "coincidence counts", needed_log2: s as f64, limit_log2: 26.0, hint: "lower s" });
    }
    let mut c = vec![vec![0u64; 1 << s]; d.dim()];
    for row in d.rows() {
        for (j, &m) in row.iter().enumerate() {
            c[j][level_index(m, d.precision(), s) as usize] += 1;
        }
    }
    Ok(c)
}

/// `(1/2)(Σ_j max_m N_{j,m} + d|D|2^{-s})`, a bound on `|E^{(s)}[D,Y]|` uniform in `Y`.
pub fn uniform_error_bound(d: &PointSet, s: u32) -> Result<Dyadic> {
    let c = coincidence_counts(d, s)?;
    let maxes: u64 = c.iter().map(|col| col.iter().copied().max().unwrap_or(0)).sum();
    let dn = (d.dim() * d.len()) as u64;
    Ok(Dyadic::new(BigInt::from(maxes) * (BigInt::from(1u8) << s) + dn, s + 1))
}

/// Checks `L = L^{(s)} + E^{(s)}` against the coincidence bound at one anchor.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionCheck {
    pub local: ExactNumber,
    pub truncated: ExactNumber,
    pub residual: ExactNumber,
    pub bound: ExactNumber,
    pub within_bound: bool,
}

pub fn decomposition_check(d: &PointSet, s: u32, y: &DyadicPoint) -> Result<DecompositionCheck> {
    let local = crate::discrepancy::local_discrepancy(d, y)?;
    let truncated = truncated_discrepancy(d, s, y)?;
    let residual = &local - &truncated;
    let bound = error_term_bound(d, s, y)?;
    Ok(DecompositionCheck {
        within_bound: residual.abs() <= bound,
        local: (&local).into(),
        truncated: (&truncated).into(),
        residual: (&residual).into(),
        bound: (&bound).into(),
    })
}

/// Sweep of the decomposition over every anchor of `Q^d(2^level)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub s: u32,
    pub level: u32,
    pub anchors: u64,
    pub violations: u64,
    pub max_abs_residual: ExactNumber,
    /// Largest `|E| / bound` seen.
    #[serde(serialize_with = "crate::report::float")]
    pub max_ratio: f64,
    pub holds: bool,
}

pub fn verify_decomposition(d: &PointSet, s: u32, level: u32) -> Result<DecompositionReport> {
    let dim = d.dim();
    if dim as u64 * level as u64 > 16 {
        return Err(Error::Guard {
            what: "decomposition sweep",
            needed_log2: dim as f64 * level as f64,
            limit_log2: 16.0,
            hint: "lower the anchor level",
        });
    }
    let grid = PointSet::full_grid(dim, level)?;
    let mut worst = Dyadic::zero();
    let mut ratio: f64 = 0.0;
    let mut violations = 0;
    for y in grid.points() {
        let local = crate::discrepancy::local_discrepancy(d, &y)?;
        let residual = (&local - &truncated_discrepancy(d, s, &y)?).abs();
        let bound = error_term_bound(d, s, &y)?;
        if residual > bound {
            violations += 1;
        }
        if !bound.is_zero() {
            ratio = ratio.max(residual.to_f64() / bound.to_f64());
        }
        if residual > worst {
            worst = residual;
        }
    }
    Ok(DecompositionReport {
        s,
        level,
        anchors: grid.len() as u64,
        violations,
        max_abs_residual: (&worst).into(),
        max_ratio: ratio,
        holds: violations == 0,
    })
}

/// Values of `L^{(s)}[D,·]` on `Q^d(2^s)`, times `2^{d(s+1)}`, row-major with `y_1` slowest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedGrid {
    pub d: usize,
    pub s: u32,
    pub values: Vec<i64>,
}

impl TruncatedGrid {
    pub fn scale_exp(&self) -> u32 {
        self.d as u32 * (self.s + 1)
    }

    pub fn value(&self, idx: usize) -> Dyadic {
        Dyadic::new(self.values[idx], self.scale_exp())
    }

    pub fn power_sum(&self, q: f64) -> PowerSum {
        let mut p = PowerSum::new(q);
        p.add_slice(&self.values);
        p
    }

    pub fn sup(&self) -> Dyadic {
        Dyadic::new(self.values.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0), self.scale_exp())
    }
}

/// `L^{(s)}` on the whole grid via counts: on `Q^d(2^s)` each factor of `χ^{(s)}` is
/// `[x^{(s)} < y] + (1/2)[x^{(s)} = y]` and `vol^{(s)} = Π (y_j + 2^{-s-1})`.
pub fn truncated_grid(d: &PointSet, s: u32) -> Result<TruncatedGrid> {
    let mut values = Vec::new();
    sweep_truncated(d, s, |_, row| values.extend_from_slice(row))?;
    Ok(TruncatedGrid { d: d.dim(), s, values })
}

pub(crate) fn check_grid_guard(d: usize, n: usize, s: u32) -> Result<()> {
    let ds = d as u64 * s as u64;
    if ds > GRID_LIMIT_LOG2 as u64 {
        return Err(Error::Guard {
            what: "grid sweep",
            needed_log2: ds as f64,
            limit_log2: GRID_LIMIT_LOG2 as f64,
            hint: "use a coarser grid level",
        });
    }
    let bits = ds + d as u64 + 64 - (n as u64).leading_zeros() as u64 + 2;
    if bits > 62 {
        return Err(invalid("point count too large for the scaled grid arithmetic"));
    }
    Ok(())
}

/// Streams `2^{d(s+1)} L^{(s)}[D,Y]` over `Y ∈ Q^d(2^s)` in row-major order, one slab of
/// fixed `y_1` at a time, with the flat index of the slab's first entry.
///
/// Sweeps the first axis with a running slab over the remaining `d − 1` axes, so memory is
/// `O(2^{(d-1)s})`.
pub(crate) fn sweep_truncated(d: &PointSet, s: u32, mut f: impl FnMut(usize, &[i64])) -> Result<()> {
    let dim = d.dim();
    let n = d.len();
    check_grid_guard(dim, n, s)?;
    let side = 1usize << s;
    let slab = 1usize << (s as usize * (dim - 1));
    let ds = dim as u32 * s;
    // (first-axis index, slab index) per point, grouped by the first axis
    let mut keys: Vec<(usize, usize)> = d
        .rows()
        .map(|row| {
            let m0 = level_index(row[0], d.precision(), s) as usize;
            let t = row[1..]
                .iter()
                .fold(0usize, |acc, &m| (acc << s) | level_index(m, d.precision(), s) as usize);
            (m0, t)
        })
        .collect();
    keys.sort_unstable();
    // Π_{j ≥ 2} (2 m_j + 1) over the slab
    let mut slab_vol = vec![1i64; slab];
    for (t, v) in slab_vol.iter_mut().enumerate() {
        let mut r = t;
        for _ in 1..dim {
            *v *= 2 * (r & (side - 1)) as i64 + 1;
            r >>= s;
        }
    }
    let n = n as i64;
    let mut acc = vec![0i64; slab];
    let mut row = vec![0i64; slab];
    let mut out = vec![0i64; slab];
    let mut next = 0usize;
    for m0 in 0..side {
        let start = next;
        while next < keys.len() && keys[next].0 == m0 {
            next += 1;
        }
        let w0 = n * (2 * m0 as i64 + 1);
        let off = m0 * slab;
        if start == next {
            for t in 0..slab {
                out[t] = (acc[t] << (ds + 1)) - w0 * slab_vol[t];
            }
            f(off, &out);
            continue;
        }
        row.iter_mut().for_each(|r| *r = 0);
        for &(_, t) in &keys[start..next] {
            row[t] += 1;
        }
        transform_axes(&mut row, dim - 1, side);
        for t in 0..slab {
            let h = 2 * acc[t] + row[t];
            out[t] = (h << ds) - w0 * slab_vol[t];
            acc[t] += row[t];
        }
        f(off, &out);
    }
    Ok(())
}

/// In place along each of `k` axes of length `side`: `out[m] = 2 Σ_{m' < m} in[m'] + in[m]`.
fn transform_axes(data: &mut [i64], k: usize, side: usize) {
    let mut inner = data.len();
    for _ in 0..k {
        inner /= side;
        let outer = data.len() / (inner * side);
        for o in 0..outer {
            for t in 0..inner {
                let mut run = 0i64;
                let base = o * side * inner + t;
                for m in 0..side {
                    let v = data[base + m * inner];
                    data[base + m * inner] = 2 * run + v;
                    run += v;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrepancy::local_discrepancy;
    use crate::pointset::generate_bitrev_net;

    fn sc(m: u64, w: u32) -> DyadicScalar {
        DyadicScalar::new(m, w).unwrap()
    }

    fn pt(m: &[u64], w: u32) -> DyadicPoint {
        DyadicPoint::new(m.to_vec(), w).unwrap()
    }

    #[test]
    fn interval_examples() {
        let y = sc(11, 4);
        assert_eq!(chi_s_interval(y, y, 3), Dyadic::new(1, 1));
        assert_eq!(epsilon_interval(y, y, 3), Dyadic::new(-1, 1));
        assert_eq!(chi_s_interval(sc(3, 2), DyadicScalar::zero(), 1), Dyadic::one());
        // agree on the first two digits, differ later
        assert_eq!(chi_s_interval(sc(9, 4), sc(8, 4), 2), Dyadic::new(1, 1));
        assert_eq!(epsilon_interval(sc(9, 4), sc(2, 4), 2), Dyadic::zero());
    }

    #[test]
    fn interval_sweep() {
        for s in 0..=4 {
            for xm in 0..16 {
                for ym in 0..16 {
                    let (x, y) = (sc(xm, 4), sc(ym, 4));
                    let chi = chi_s_interval(y, x, s);
                    assert!(chi >= Dyadic::zero() && chi <= Dyadic::one());
                    let eps = epsilon_interval(y, x, s);
                    let kd = crate::dyadic::kernel_delta(x, y, s) as i64;
                    assert!(eps.abs() <= Dyadic::new(kd, 1));
                    // ν ≤ s: exact indicator
                    if kd == 0 {
                        assert_eq!(chi, Dyadic::from_int((x < y) as i64));
                    }
                }
            }
        }
    }

    #[test]
    fn box_is_product_of_intervals() {
        let y = pt(&[5, 12, 3], 4);
        let x = pt(&[6, 12, 9], 4);
        for s in 0..=4 {
            let prod = (0..3).fold(Dyadic::one(), |acc, j| acc * chi_s_interval(y.coord(j), x.coord(j), s));
            assert_eq!(chi_s_box(&y, &x, s).unwrap(), prod);
        }
        assert_eq!(chi_s_box(&y, &y, 3).unwrap(), Dyadic::pow2_neg(3));
    }

    #[test]
    fn truncated_volume() {
        let y = pt(&[5, 3], 4);
        assert_eq!(vol_s(&y, 0).unwrap(), Dyadic::pow2_neg(2));
        for s in 0..=6 {
            for m in 0..64 {
                let y = pt(&[m], 6);
                let v = vol_s(&y, s).unwrap();
                let expect = y.coord(0).project(s).to_dyadic() + Dyadic::pow2_neg(s + 1);
                assert_eq!(v, expect);
                assert!((v - y.coord(0).to_dyadic()).abs() <= Dyadic::pow2_neg(s + 1));
            }
        }
    }

    #[test]
    fn table_matches_direct_counts() {
        let d = PointSet::new(2, 5, vec![1, 30, 17, 4, 9, 9, 31, 0, 12, 22]).unwrap();
        for s in 0..=3 {
            let z = pt(&[3 & ((1 << s) - 1), 1 & ((1 << s) - 1)], s);
            let table = MicroLocalTable::build(&d, s, &z).unwrap();
            for a1 in 0..=s {
                for a2 in 0..=s {
                    assert_eq!(table.get(&[a1, a2]).unwrap(), micro_local(&d, s, &z, &[a1, a2]).unwrap());
                }
            }
            assert_eq!(table.get(&[0, 0]).unwrap(), Dyadic::zero());
        }
        assert!(MicroLocalTable::build(&d, 2, &pt(&[1, 1], 3)).is_err());
    }

    #[test]
    fn series_and_grid_routes_agree() {
        let d = PointSet::new(2, 4, vec![1, 14, 7, 4, 9, 9, 15, 0, 3, 3]).unwrap();
        for s in 0..=3 {
            let grid = truncated_grid(&d, s).unwrap();
            let side = 1u64 << s;
            for y1 in 0..side {
                for y2 in 0..side {
                    let y = pt(&[y1, y2], s);
                    let series = truncated_discrepancy(&d, s, &y).unwrap();
                    assert_eq!(grid.value((y1 * side + y2) as usize), series, "s={s} y={y}");
                }
            }
        }
    }

    #[test]
    fn decomposition_on_a_small_set() {
        let d = generate_bitrev_net(3).unwrap();
        for s in 1..=3 {
            let rep = verify_decomposition(&d, s, 3).unwrap();
            assert!(rep.holds);
        }
        let one = PointSet::new(1, 3, vec![0]).unwrap();
        let b = error_term_bound(&one, 3, &pt(&[0], 3)).unwrap();
        assert_eq!(b, Dyadic::new(9, 4));
        let c = coincidence_counts(&d, 3).unwrap();
        assert!(c.iter().all(|col| col.iter().sum::<u64>() == 8));
        let check = decomposition_check(&d, 2, &pt(&[5, 3], 3)).unwrap();
        assert!(check.within_bound);
        let l = local_discrepancy(&d, &pt(&[5, 3], 3)).unwrap();
        assert_eq!(check.local.exact, l.to_string());
    }

    #[test]
    fn empty_set_has_zero_truncated_part() {
        let e = PointSet::empty(2, 4).unwrap();
        assert!(truncated_grid(&e, 3).unwrap().values.iter().all(|&v| v == 0));
        assert_eq!(truncated_discrepancy(&e, 2, &pt(&[3, 1], 2)).unwrap(), Dyadic::zero());
    }
}
