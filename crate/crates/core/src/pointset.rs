//! Point sets, digital net generators and exhaustive net verification.

use rand::Rng;
use serde::Serialize;

use crate::dyadic::{check_dim, level_index, mask, DyadicPoint, ElementaryBox, MAX_PRECISION};
use crate::error::{invalid, Error, Result};

/// A finite multiset of points of `U^d` sharing one precision `w`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    d: usize,
    precision: u32,
    /// Row-major `N × d` mantissas.
    data: Vec<u64>,
}

impl PointSet {
    pub fn new(d: usize, precision: u32, data: Vec<u64>) -> Result<Self> {
        if d == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        if precision > MAX_PRECISION {
            return Err(Error::PrecisionTooLarge(precision));
        }
        if data.len() % d != 0 {
            return Err(invalid(format!("{} mantissas do not form rows of length {d}", data.len())));
        }
        if let Some(&m) = data.iter().find(|&&m| m & !mask(precision) != 0) {
            return Err(Error::MantissaOutOfRange { mantissa: m, precision });
        }
        Ok(PointSet { d, precision, data })
    }

    pub fn empty(d: usize, precision: u32) -> Result<Self> {
        PointSet::new(d, precision, Vec::new())
    }

    /// Points are brought to the largest precision among them.
    pub fn from_points(points: &[DyadicPoint]) -> Result<Self> {
        let first = points.first().ok_or_else(|| invalid("no points given; use PointSet::empty"))?;
        let d = first.dim();
        let w = points.iter().map(|p| p.precision()).max().unwrap_or(0);
        let mut data = Vec::with_capacity(points.len() * d);
        for p in points {
            check_dim(d, p.dim())?;
            data.extend_from_slice(p.with_precision(w)?.mantissas());
        }
        PointSet::new(d, w, data)
    }

    /// Quantizes rows of reals in `[0,1)` to `precision` bits.
    pub fn from_f64_rows(rows: &[Vec<f64>], precision: u32) -> Result<Self> {
        let pts = rows.iter().map(|r| DyadicPoint::from_f64(r, precision)).collect::<Result<Vec<_>>>()?;
        PointSet::from_points(&pts)
    }

    /// `n` independent uniform points at precision `w`.
    pub fn random<R: Rng + ?Sized>(d: usize, n: usize, w: u32, rng: &mut R) -> Result<Self> {
        let data = (0..n * d).map(|_| rng.gen::<u64>() & mask(w)).collect();
        PointSet::new(d, w, data)
    }

    /// `Q^d(2^s)` as a point set, lexicographic with the first coordinate slowest.
    pub fn full_grid(d: usize, s: u32) -> Result<Self> {
        if d as u64 * s as u64 > 26 {
            return Err(Error::Guard {
                what: "full grid",
                needed_log2: d as f64 * s as f64,
                limit_log2: 26.0,
                hint: "lower s",
            });
        }
        let n = 1usize << (d as u32 * s);
        let mut data = Vec::with_capacity(n * d);
        for t in 0..n as u64 {
            for j in 0..d {
                data.push((t >> (s * (d - 1 - j) as u32)) & mask(s));
            }
        }
        PointSet::new(d, s, data)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn mantissas(&self) -> &[u64] {
        &self.data
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, u64> {
        self.data.chunks_exact(self.d)
    }

    pub fn point(&self, i: usize) -> DyadicPoint {
        DyadicPoint::new_unchecked(self.data[i * self.d..(i + 1) * self.d].to_vec(), self.precision)
    }

    pub fn points(&self) -> Vec<DyadicPoint> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// `D ⊕ T`.
    pub fn shift(&self, t: &DyadicPoint) -> Result<PointSet> {
        check_dim(self.d, t.dim())?;
        let w = self.precision.max(t.precision());
        let tm: Vec<u64> = t.mantissas().iter().map(|&m| level_index(m, t.precision(), w)).collect();
        let data = self
            .data
            .chunks_exact(self.d)
            .flat_map(|row| row.iter().zip(&tm).map(|(&x, &t)| level_index(x, self.precision, w) ^ t))
            .collect();
        Ok(PointSet { d: self.d, precision: w, data })
    }

    /// `D^{(s)}` as a multiset at precision `s`.
    pub fn project(&self, s: u32) -> PointSet {
        let s = s.min(MAX_PRECISION);
        let data = self.data.iter().map(|&m| level_index(m, self.precision, s)).collect();
        PointSet { d: self.d, precision: s, data }
    }

    pub fn with_precision(&self, w: u32) -> Result<PointSet> {
        if w < self.precision {
            return Err(Error::LevelExceedsPrecision { level: self.precision, precision: w });
        }
        if w > MAX_PRECISION {
            return Err(Error::PrecisionTooLarge(w));
        }
        Ok(self.project(w))
    }

    /// Multiset union `D₁ ⊎ D₂`.
    pub fn union(&self, other: &PointSet) -> Result<PointSet> {
        check_dim(self.d, other.d)?;
        let w = self.precision.max(other.precision);
        let mut data = self.project(w).data;
        data.extend(other.project(w).data);
        Ok(PointSet { d: self.d, precision: w, data })
    }

    /// Per-coordinate mantissas at level `a`, row-major.
    pub(crate) fn level_rows(&self, a: u32) -> Vec<u64> {
        self.data.iter().map(|&m| level_index(m, self.precision, a)).collect()
    }
}

/// `d` binary `s × s` matrices. Row `i` (`0..s`) produces digit `η_{i+1}`; bit `k` of a row
/// multiplies bit `k` (least significant first) of the point index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorMatrices {
    s: u32,
    rows: Vec<Vec<u64>>,
}

const SOBOL_TABLE: &str = include_str!("../data/sobol_directions.txt");

/// Largest dimension covered by the vendored Sobol table.
pub const SOBOL_MAX_DIM: usize = 8;

impl GeneratorMatrices {
    pub fn new(s: u32, rows: Vec<Vec<u64>>) -> Result<Self> {
        if s > 63 {
            return Err(invalid(format!("s = {s} is too large for a digital net")));
        }
        if rows.is_empty() {
            return Err(invalid("at least one matrix is required"));
        }
        for (j, m) in rows.iter().enumerate() {
            if m.len() != s as usize {
                return Err(invalid(format!("matrix {j} has {} rows, expected {s}", m.len())));
            }
            if m.iter().any(|&r| r & !mask(s) != 0) {
                return Err(invalid(format!("matrix {j} has a row wider than {s} columns")));
            }
        }
        Ok(GeneratorMatrices { s, rows })
    }

    /// Rows given as strings of `0`/`1`; character `k` is column `k`.
    pub fn from_bit_strings(s: u32, matrices: &[Vec<String>]) -> Result<Self> {
        let rows = matrices
            .iter()
            .map(|m| {
                m.iter()
                    .map(|row| {
                        let row = row.trim();
                        if row.len() != s as usize {
                            return Err(invalid(format!("row {row:?} should have {s} digits")));
                        }
                        row.chars().enumerate().try_fold(0u64, |acc, (k, c)| match c {
                            '0' => Ok(acc),
                            '1' => Ok(acc | 1 << k),
                            _ => Err(invalid(format!("row {row:?} has a non-binary digit"))),
                        })
                    })
                    .collect::<Result<Vec<u64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        GeneratorMatrices::new(s, rows)
    }

    pub fn to_bit_strings(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|m| {
                m.iter()
                    .map(|&r| (0..self.s).map(|k| if r >> k & 1 == 1 { '1' } else { '0' }).collect())
                    .collect()
            })
            .collect()
    }

    /// Identity matrix: the van der Corput digit reversal of the index.
    pub fn identity_matrix(s: u32) -> Vec<u64> {
        (0..s).map(|i| 1u64 << i).collect()
    }

    /// Anti-diagonal matrix: coordinate `m·2^{-s}`.
    pub fn reversal_matrix(s: u32) -> Vec<u64> {
        (0..s).map(|i| 1u64 << (s - 1 - i)).collect()
    }

    pub fn identity(s: u32) -> Result<Self> {
        GeneratorMatrices::new(s, vec![GeneratorMatrices::identity_matrix(s)])
    }

    /// The pair producing `m ↦ (m·2^{-s}, bitreverse_s(m)·2^{-s})`.
    pub fn bitrev(s: u32) -> Result<Self> {
        GeneratorMatrices::new(s, vec![GeneratorMatrices::reversal_matrix(s), GeneratorMatrices::identity_matrix(s)])
    }

    /// Sobol matrices from the vendored direction numbers, `1 ≤ d ≤ 8`.
    pub fn sobol(d: usize, s: u32) -> Result<Self> {
        if d == 0 || d > SOBOL_MAX_DIM {
            return Err(invalid(format!("the vendored Sobol table covers 1 ≤ d ≤ {SOBOL_MAX_DIM}, got {d}")));
        }
        let mut mats = vec![GeneratorMatrices::identity_matrix(s)];
        for line in SOBOL_TABLE.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()).take(d - 1) {
            let f: Vec<u64> = line.split_whitespace().map(|t| t.parse().unwrap()).collect();
            let (deg, a, init) = (f[1] as usize, f[2], &f[3..]);
            let mut m: Vec<u64> = init.to_vec();
            for i in deg..s as usize {
                let mut v = m[i - deg] ^ (m[i - deg] << deg);
                for k in 1..deg {
                    if (a >> (deg - 1 - k)) & 1 == 1 {
                        v ^= m[i - k] << k;
                    }
                }
                m.push(v);
            }
            // column k holds v_{k+1} = m_{k+1} 2^{-(k+1)} as an s-digit mantissa
            let cols: Vec<u64> = (0..s as usize).map(|k| m[k] << (s as usize - 1 - k)).collect();
            mats.push(columns_to_rows(s, &cols));
        }
        GeneratorMatrices::new(s, mats)
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    /// Column `k` of matrix `j` as an `s`-digit mantissa.
    fn columns(&self, j: usize) -> Vec<u64> {
        (0..self.s)
            .map(|k| {
                (0..self.s).fold(0u64, |acc, i| acc | ((self.rows[j][i as usize] >> k) & 1) << (self.s - 1 - i))
            })
            .collect()
    }

    /// Rank over F₂ of matrix `j`.
    pub fn rank(&self, j: usize) -> u32 {
        let mut rows = self.rows[j].clone();
        let mut rank = 0;
        for bit in 0..self.s {
            if let Some(p) = (rank as usize..rows.len()).find(|&r| rows[r] >> bit & 1 == 1) {
                rows.swap(rank as usize, p);
                let pivot = rows[rank as usize];
                for (r, row) in rows.iter_mut().enumerate() {
                    if r != rank as usize && *row >> bit & 1 == 1 {
                        *row ^= pivot;
                    }
                }
                rank += 1;
            }
        }
        rank
    }
}

fn columns_to_rows(s: u32, cols: &[u64]) -> Vec<u64> {
    (0..s)
        .map(|i| {
            cols.iter().enumerate().fold(0u64, |acc, (k, &c)| acc | ((c >> (s - 1 - i)) & 1) << k)
        })
        .collect()
}

/// The `2^s` points `x_m` whose coordinate `j` has digit vector `C_j · bits(m)`.
pub fn generate_digital_net(g: &GeneratorMatrices) -> Result<PointSet> {
    let s = g.s;
    if s > 30 {
        return Err(invalid(format!("2^{s} points is too many to generate")));
    }
    let d = g.dim();
    let cols: Vec<Vec<u64>> = (0..d).map(|j| g.columns(j)).collect();
    let n = 1u64 << s;
    let mut data = Vec::with_capacity((n as usize) * d);
    for m in 0..n {
        for c in &cols {
            let mut x = 0u64;
            let mut bits = m;
            while bits != 0 {
                let k = bits.trailing_zeros() as usize;
                x ^= c[k];
                bits &= bits - 1;
            }
            data.push(x);
        }
    }
    PointSet::new(d, s, data)
}

/// `m ↦ (m·2^{-s}, bitreverse_s(m)·2^{-s})`.
pub fn generate_bitrev_net(s: u32) -> Result<PointSet> {
    if s > 30 {
        return Err(invalid(format!("2^{s} points is too many to generate")));
    }
    let n = 1u64 << s;
    let data = (0..n)
        .flat_map(|m| [m, if s == 0 { 0 } else { m.reverse_bits() >> (64 - s) }])
        .collect();
    PointSet::new(2, s, data)
}

/// Visits every `A ∈ {0..cap}^parts` with `Σ a_j = total`, in lexicographic order.
pub(crate) fn for_each_composition(total: u32, parts: usize, cap: u32, f: &mut dyn FnMut(&[u32])) {
    fn rec(a: &mut Vec<u32>, j: usize, left: u32, cap: u32, f: &mut dyn FnMut(&[u32])) {
        if j + 1 == a.len() {
            if left <= cap {
                a[j] = left;
                f(a);
            }
            return;
        }
        for v in 0..=left.min(cap) {
            a[j] = v;
            rec(a, j + 1, left - v, cap, f);
        }
    }
    if parts == 0 {
        if total == 0 {
            f(&[]);
        }
        return;
    }
    let mut a = vec![0u32; parts];
    rec(&mut a, 0, total, cap, f);
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NetWitness {
    pub r#box: ElementaryBox,
    pub count: u64,
    pub expected: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NetCheckReport {
    pub s: u32,
    pub d: usize,
    pub delta: u32,
    pub is_net: bool,
    pub minimal_delta: u32,
    pub witness: Option<NetWitness>,
}

/// First box of volume `2^{δ-s}` whose count differs from `2^δ`, if any.
fn net_violation(d: &PointSet, s: u32, delta: u32) -> Option<NetWitness> {
    let dim = d.dim();
    let level = s - delta;
    let expected = 1u64 << delta;
    let mut found = None;
    let mut hist = vec![0u64; 1usize << level];
    let per_level: Vec<Vec<u64>> = (0..=level).map(|a| d.level_rows(a)).collect();
    for_each_composition(level, dim, level, &mut |a| {
        if found.is_some() {
            return;
        }
        hist.iter_mut().for_each(|h| *h = 0);
        for i in 0..d.len() {
            let mut key = 0u64;
            for (j, &aj) in a.iter().enumerate() {
                key = (key << aj) | per_level[aj as usize][i * dim + j];
            }
            hist[key as usize] += 1;
        }
        if let Some((key, &count)) = hist.iter().enumerate().find(|(_, &c)| c != expected) {
            let mut offsets = vec![0u64; dim];
            let mut k = key as u64;
            for j in (0..dim).rev() {
                offsets[j] = k & mask(a[j]);
                k >>= a[j];
            }
            let b = ElementaryBox::delta(a.to_vec(), offsets).expect("offsets fit their levels");
            found = Some(NetWitness { r#box: b, count, expected });
        }
    });
    found
}

/// Checks the net property at deficiency `delta` and finds the smallest passing deficiency.
///
/// The property is monotone in `δ` (a box at level sum `s−δ−1` splits into two at `s−δ`),
/// so the smallest passing value is found by scanning upward.
pub fn check_net(d: &PointSet, delta: u32) -> Result<NetCheckReport> {
    let n = d.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let s = n.trailing_zeros();
    if delta > s {
        return Err(invalid(format!("δ = {delta} exceeds s = {s}")));
    }
    let witness = net_violation(d, s, delta);
    let is_net = witness.is_none();
    let minimal_delta = if is_net {
        (0..delta).find(|&t| net_violation(d, s, t).is_none()).unwrap_or(delta)
    } else {
        (delta + 1..=s).find(|&t| net_violation(d, s, t).is_none()).unwrap_or(s)
    };
    Ok(NetCheckReport { s, d: d.dim(), delta, is_net, minimal_delta, witness })
}

/// Smallest `δ` for which `d` is a `(δ, s, d)`-net.
pub fn minimal_delta(d: &PointSet) -> Result<u32> {
    Ok(check_net(d, 0)?.minimal_delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn set(d: usize, w: u32, pts: &[u64]) -> PointSet {
        PointSet::new(d, w, pts.to_vec()).unwrap()
    }

    #[test]
    fn shifts_and_projections() {
        let d = set(2, 3, &[1, 2, 7, 5]);
        let z = DyadicPoint::zero(2);
        assert_eq!(d.shift(&z).unwrap(), d);
        let t = DyadicPoint::new(vec![3, 1], 2).unwrap();
        let back = d.shift(&t).unwrap().shift(&t).unwrap();
        assert_eq!(back, d);
        assert!(d.shift(&DyadicPoint::zero(3)).is_err());
        assert_eq!(d.project(3), d);
        assert_eq!(d.project(0).mantissas(), &[0, 0, 0, 0]);
        assert_eq!(d.project(1).len(), 2);
        assert_eq!(d.project(1).mantissas(), &[0, 0, 1, 1]);
    }

    #[test]
    fn full_grid_shift_is_a_bijection() {
        let g = PointSet::full_grid(2, 3).unwrap();
        let mut t = g.shift(&DyadicPoint::new(vec![5, 2], 3).unwrap()).unwrap().mantissas().chunks(2).map(|r| r.to_vec()).collect::<Vec<_>>();
        t.sort();
        let mut orig = g.mantissas().chunks(2).map(|r| r.to_vec()).collect::<Vec<_>>();
        orig.sort();
        assert_eq!(t, orig);
    }

    #[test]
    fn generators() {
        let vdc = generate_digital_net(&GeneratorMatrices::identity(2).unwrap()).unwrap();
        assert_eq!(vdc.mantissas(), &[0, 2, 1, 3]);
        let g = GeneratorMatrices::new(2, vec![GeneratorMatrices::identity_matrix(2), GeneratorMatrices::reversal_matrix(2)]).unwrap();
        let net = generate_digital_net(&g).unwrap();
        let mut pts: Vec<_> = net.rows().map(|r| (r[0], r[1])).collect();
        pts.sort();
        assert_eq!(pts, vec![(0, 0), (1, 2), (2, 1), (3, 3)]);
        assert_eq!(generate_bitrev_net(1).unwrap().mantissas(), &[0, 0, 1, 1]);
        assert_eq!(generate_digital_net(&GeneratorMatrices::bitrev(5).unwrap()).unwrap(), generate_bitrev_net(5).unwrap());
        let strings = g.to_bit_strings();
        assert_eq!(strings[1], vec!["01".to_string(), "10".to_string()]);
        assert_eq!(GeneratorMatrices::from_bit_strings(2, &strings).unwrap(), g);
    }

    #[test]
    fn sobol_matrices_are_invertible_and_start_like_sobol() {
        let g = GeneratorMatrices::sobol(8, 10).unwrap();
        for j in 0..8 {
            assert_eq!(g.rank(j), 10);
        }
        // second coordinate of the first Sobol points: 0, 1/2, 3/4, 1/4
        let net = generate_digital_net(&GeneratorMatrices::sobol(2, 2).unwrap()).unwrap();
        assert_eq!(net.rows().map(|r| r[1]).collect::<Vec<_>>(), vec![0, 2, 3, 1]);
        assert!(GeneratorMatrices::sobol(9, 4).is_err());
    }

    #[test]
    fn net_checks() {
        for s in 0..=8 {
            let r = check_net(&generate_bitrev_net(s).unwrap(), 0).unwrap();
            assert!(r.is_net && r.minimal_delta == 0, "s = {s}");
        }
        assert!(check_net(&PointSet::full_grid(1, 4).unwrap(), 0).unwrap().is_net);
        assert_eq!(minimal_delta(&PointSet::full_grid(2, 2).unwrap()).unwrap(), 2);
        let mut pts = generate_bitrev_net(2).unwrap().mantissas().to_vec();
        pts[2] = 3; // (1,2) -> (3,2)
        let bad = PointSet::new(2, 2, pts).unwrap();
        let r = check_net(&bad, 0).unwrap();
        assert!(!r.is_net);
        let w = r.witness.unwrap();
        assert_eq!(w.r#box.level_sum(), 2);
        assert_ne!(w.count, 1);
        assert!(r.minimal_delta > 0);
        assert!(matches!(check_net(&set(1, 2, &[0, 1, 2]), 0), Err(Error::NotPowerOfTwo(3))));
    }

    #[test]
    fn compositions_enumerate_in_order() {
        let mut all = Vec::new();
        for_each_composition(3, 2, 3, &mut |a| all.push(a.to_vec()));
        assert_eq!(all, vec![vec![0, 3], vec![1, 2], vec![2, 1], vec![3, 0]]);
        let mut capped = 0;
        for_each_composition(3, 2, 1, &mut |_| capped += 1);
        assert_eq!(capped, 0);
    }

    #[test]
    fn random_sets_respect_precision() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = PointSet::random(3, 10, 5, &mut rng).unwrap();
        assert_eq!(d.len(), 10);
        assert!(d.mantissas().iter().all(|&m| m < 32));
    }
}
