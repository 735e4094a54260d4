//! Naive reference computations on raw mantissas. Nothing here calls into the library.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Points as rows of mantissas at precision `w` (coordinate value `m / 2^w`).
#[derive(Clone, Debug)]
pub struct Pts {
    pub d: usize,
    pub w: u32,
    pub rows: Vec<Vec<u64>>,
}

pub fn frac(m: u64, w: u32) -> BigRational {
    BigRational::new(BigInt::from(m), BigInt::one() << w)
}

/// The `a`-th binary digit (`a ≥ 1`) of `m / 2^w`.
pub fn digit(m: u64, w: u32, a: u32) -> u64 {
    if a == 0 || a > w {
        0
    } else {
        (m >> (w - a)) & 1
    }
}

pub fn rad(a: u32, m: u64, w: u32) -> i64 {
    if a == 0 {
        1
    } else {
        1 - 2 * digit(m, w, a) as i64
    }
}

/// First `s` digits of `m / 2^w`, as a mantissa at precision `s`.
pub fn head(m: u64, w: u32, s: u32) -> u64 {
    (1..=s).fold(0, |acc, a| (acc << 1) | digit(m, w, a))
}

/// `m / 2^s ∈ [2^{-a}, 2^{1-a})`, with `a = 0` meaning `[0, 1)`.
pub fn in_pi(m: u64, s: u32, a: u32) -> bool {
    a == 0 || ((1..a).all(|i| digit(m, s, i) == 0) && digit(m, s, a) == 1)
}

fn less(x: u64, wx: u32, y: u64, wy: u32) -> bool {
    (x as u128) << wy < (y as u128) << wx
}

/// `#{x ∈ D : x < Y} − N y_1⋯y_d`.
pub fn local(p: &Pts, y: &[u64], wy: u32) -> BigRational {
    let count = p.rows.iter().filter(|x| x.iter().zip(y).all(|(&a, &b)| less(a, p.w, b, wy))).count();
    let vol = y.iter().fold(BigRational::one(), |acc, &m| acc * frac(m, wy));
    BigRational::from_integer(BigInt::from(count)) - vol * BigInt::from(p.rows.len())
}

/// Every `A ∈ {0..=s}^d`.
pub fn level_vectors(d: usize, s: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..=s).map(move |a| {
                    let mut v = v.clone();
                    v.push(a);
                    v
                })
            })
            .collect();
    }
    out
}

/// Every point of `Q^d(2^s)` as mantissas at precision `s`, first coordinate slowest.
pub fn grid(d: usize, s: u32) -> Vec<Vec<u64>> {
    let g = 1u64 << s;
    (0..g.pow(d as u32))
        .map(|mut t| {
            let mut v = vec![0; d];
            for j in (0..d).rev() {
                v[j] = t % g;
                t /= g;
            }
            v
        })
        .collect()
}

/// `#{X ∈ D : X^{(s)} ⊕ Z ∈ Π_A} − N 2^{-Σa}` with `Z` at precision `s`.
pub fn lambda(p: &Pts, s: u32, z: &[u64], a: &[u32]) -> BigRational {
    let count = p
        .rows
        .iter()
        .filter(|x| (0..p.d).all(|j| in_pi(head(x[j], p.w, s) ^ z[j], s, a[j])))
        .count();
    let vol: u32 = a.iter().sum();
    BigRational::from_integer(BigInt::from(count)) - frac(p.rows.len() as u64, vol)
}

/// The Rademacher series of the truncated discrepancy, summed term by term.
pub fn truncated(p: &Pts, y: &[u64], wy: u32, s: u32) -> BigRational {
    let z: Vec<u64> = y.iter().map(|&m| head(m, wy, s)).collect();
    let mut sum = BigRational::zero();
    for a in level_vectors(p.d, s) {
        let kappa = a.iter().filter(|&&t| t > 0).count();
        let sign: i64 = (0..p.d).map(|j| rad(a[j], y[j], wy)).product::<i64>() * if kappa % 2 == 0 { 1 } else { -1 };
        sum += lambda(p, s, &z, &a) * BigInt::from(sign);
    }
    sum / (BigInt::one() << p.d)
}

/// `(1/2)(Σ_j #{x : x_j, y_j share their first s digits} + dN2^{-s})`.
pub fn error_bound(p: &Pts, y: &[u64], wy: u32, s: u32) -> BigRational {
    let mut c = 0u64;
    for x in &p.rows {
        for j in 0..p.d {
            c += (head(x[j], p.w, s) == head(y[j], wy, s)) as u64;
        }
    }
    let dn = frac((p.d * p.rows.len()) as u64, s);
    (BigRational::from_integer(BigInt::from(c)) + dn) / BigInt::from(2)
}

pub fn xor_shift(p: &Pts, t: &[u64], wt: u32) -> Pts {
    let w = p.w.max(wt);
    let rows = p
        .rows
        .iter()
        .map(|x| x.iter().zip(t).map(|(&a, &b)| (a << (w - p.w)) ^ (b << (w - wt))).collect())
        .collect();
    Pts { d: p.d, w, rows }
}

/// `Σ_{T,Y ∈ Q^d(2^s)} |2^{d(s+1)} L^{(s)}[D ⊕ T, Y]|^q` for each `q` in `qs`.
pub fn principal_power_sums(p: &Pts, s: u32, qs: &[u32]) -> Vec<BigInt> {
    let scale = BigRational::from_integer(BigInt::one() << (p.d as u32 * (s + 1)));
    let g = grid(p.d, s);
    let mut sums = vec![BigInt::zero(); qs.len()];
    for t in &g {
        let shifted = xor_shift(p, t, s);
        for y in &g {
            let v = truncated(&shifted, y, s, s) * &scale;
            assert!(v.is_integer());
            let v = v.to_integer().abs();
            for (acc, &q) in sums.iter_mut().zip(qs) {
                *acc += num_traits::pow(v.clone(), q as usize);
            }
        }
    }
    sums
}

/// Values of `Σ_A c_A r_A(Y)` over `Y ∈ Q^k(2^s)`; `coeffs` indexed like [`level_vectors`].
pub fn rademacher_values(k: usize, s: u32, coeffs: &[i64]) -> Vec<i64> {
    let levels = level_vectors(k, s);
    grid(k, s)
        .iter()
        .map(|y| {
            levels
                .iter()
                .zip(coeffs)
                .map(|(a, &c)| c * (0..k).map(|j| rad(a[j], y[j], s)).product::<i64>())
                .sum()
        })
        .collect()
}

/// Whether every box of volume `2^{δ−s}` holds exactly `2^δ` points, by trying them all.
pub fn is_net(p: &Pts, delta: u32) -> bool {
    let n = p.rows.len();
    assert!(n.is_power_of_two());
    let s = n.trailing_zeros();
    let level = s - delta;
    for a in level_vectors(p.d, level) {
        if a.iter().sum::<u32>() != level {
            continue;
        }
        let boxes: Vec<Vec<u64>> = (0..p.d).fold(vec![vec![]], |acc, j| {
            acc.into_iter()
                .flat_map(|v| {
                    (0..1u64 << a[j]).map(move |m| {
                        let mut v = v.clone();
                        v.push(m);
                        v
                    })
                })
                .collect()
        });
        for m in boxes {
            let count = p.rows.iter().filter(|x| (0..p.d).all(|j| head(x[j], p.w, a[j]) == m[j])).count();
            if count != 1 << delta {
                return false;
            }
        }
    }
    true
}

pub fn min_delta(p: &Pts) -> u32 {
    let s = p.rows.len().trailing_zeros();
    (0..=s).find(|&t| is_net(p, t)).unwrap()
}

/// `#{A ∈ {0..=s}^k : Σa = σ}` by listing.
pub fn j_sigma(k: usize, sigma: u32, s: u32) -> u64 {
    level_vectors(k, s).iter().filter(|a| a.iter().sum::<u32>() == sigma).count() as u64
}

/// Cell-wise control of `L` on the mesh of side `2^{-m}`.
///
/// With `P(k)` the number of points strictly below the corner `k2^{-m}`, every anchor in
/// the cell at `k` has `P(k) − NΠ(k_j+1)2^{-m} ≤ L ≤ P(k+1) − NΠk_j2^{-m}`. All values
/// are stored times `2^{dm}`.
#[derive(Clone, Debug)]
pub struct Mesh {
    pub m: u32,
    pub d: usize,
    /// `Σ_cells L(corner)^2`, the left Riemann sum of `L^2` times `2^{3dm}`.
    pub riemann: u128,
    /// `Σ_cells min_{cell} L^2` and `Σ_cells max_{cell} L^2`, bounds on it.
    pub lower: u128,
    pub upper: u128,
    /// `max |L(corner)|` over the mesh corners in `U^d`, and the cell-wise sup bound.
    pub corner_max: u64,
    pub cell_max: u64,
}

impl Mesh {
    pub fn ratio(&self, v: u128, power: u32) -> BigRational {
        BigRational::new(BigInt::from(v), BigInt::one() << (power * self.d as u32 * self.m))
    }
}

/// Sweeps the mesh slab by slab along the first axis, so memory stays at two slabs.
/// For `d < 3` the slab is padded with leading axes of a single cell of factor 1.
pub fn mesh(p: &Pts, m: u32) -> Mesh {
    let d = p.d;
    assert!((1..=3).contains(&d));
    let g = 1usize << m;
    let n = p.rows.len() as i64;
    let cell = |x: u64| -> usize { (x >> (p.w - m.min(p.w)) << m.saturating_sub(p.w)) as usize };
    // corners per slab axis; the last axis is present whenever d ≥ 2
    let e2 = if d == 3 { g + 1 } else { 1 };
    let e3 = if d >= 2 { g + 1 } else { 1 };
    let (c2, c3) = (e2.min(g), e3.min(g));
    let mut by_first: Vec<Vec<&Vec<u64>>> = vec![vec![]; g];
    for x in &p.rows {
        by_first[cell(x[0])].push(x);
    }
    let full = 1i64 << (d as u32 * m);
    // prev[k2*e3+k3] = #{x : cell(x_1) < k_1, and likewise on the slab axes}
    let mut prev = vec![0i64; e2 * e3];
    let mut next = vec![0i64; e2 * e3];
    let mut out = Mesh { m, d, riemann: 0, lower: 0, upper: 0, corner_max: 0, cell_max: 0 };
    for k1 in 0..g {
        // points in this slab raise every count whose corner lies beyond them
        let filled = !by_first[k1].is_empty();
        if filled {
            next.copy_from_slice(&prev);
            for x in &by_first[k1] {
                let (i2, i3) = match d {
                    1 => (0, 0),
                    2 => (0, cell(x[1]) + 1),
                    _ => (cell(x[1]) + 1, cell(x[2]) + 1),
                };
                for k2 in i2..e2 {
                    next[k2 * e3 + i3..(k2 + 1) * e3].iter_mut().for_each(|v| *v += 1);
                }
            }
        }
        let after = if filled { &next } else { &prev };
        let up3 = (d >= 2) as usize;
        for k2 in 0..c2 {
            let (lo2, hi2, up2) = if d == 3 { (k2 as i64, k2 as i64 + 1, k2 + 1) } else { (1, 1, 0) };
            // L·2^{dm} at the corner is prev·full − n k1 lo2 k3; the cell bounds shift one index
            let base_lo = n * (k1 as i64 + 1) * hi2;
            let base_hi = n * k1 as i64 * lo2;
            let below = &prev[k2 * e3..k2 * e3 + c3];
            let above = &after[up2 * e3 + up3..up2 * e3 + up3 + c3];
            let (mut rs, mut ls, mut us) = (0u128, 0u128, 0u128);
            let (mut cm, mut um) = (0u64, 0u64);
            // n k1 lo2 k3 and n (k1+1) hi2 (k3+1), stepped along the row
            let (inc_hi, inc_lo) = if d >= 2 { (base_hi, base_lo) } else { (0, 0) };
            let mut sub_hi = if d >= 2 { 0 } else { base_hi };
            let mut sub_lo = base_lo;
            for (&b, &a) in below.iter().zip(above) {
                let corner = b * full - sub_hi;
                let lo = b * full - sub_lo;
                let hi = a * full - sub_hi;
                sub_hi += inc_hi;
                sub_lo += inc_lo;
                let (x, y, c) = (lo.unsigned_abs(), hi.unsigned_abs(), corner.unsigned_abs());
                let big = x.max(y);
                let small = if lo <= 0 && hi >= 0 { 0 } else { x.min(y) };
                rs += c as u128 * c as u128;
                ls += small as u128 * small as u128;
                us += big as u128 * big as u128;
                cm = cm.max(c);
                um = um.max(big);
            }
            out.riemann += rs;
            out.lower += ls;
            out.upper += us;
            out.corner_max = out.corner_max.max(cm);
            out.cell_max = out.cell_max.max(um);
        }
        if filled {
            std::mem::swap(&mut prev, &mut next);
        }
    }
    out
}
