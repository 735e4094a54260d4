//! Rademacher polynomials `f(Y) = Σ_{A ∈ I^k_s} λ_A r_A(Y)` and Khinchin-type checks.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::dyadic::{check_dim, rademacher_multi, DyadicPoint};
use crate::error::{invalid, Error, Result};
use crate::exact::{Dyadic, PowerSum};
use crate::exponent::Exponent;
use crate::report;

/// Relative slack for comparisons between a computed norm and a floating bound.
pub const REL_TOL: f64 = 1e-12;

pub(crate) fn le_tol(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + REL_TOL * rhs.abs().max(lhs.abs()) + f64::MIN_POSITIVE
}

/// Grid enumeration limit for `2^{ks}` evaluations.
pub const GRID_LIMIT_LOG2: u32 = 24;

/// Coefficients `λ_A` over `A ∈ {0,…,s}^k`, stored as integers times `2^{-scale}`.
///
/// Multi-indices are laid out row-major with `a_1` slowest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RademacherPolynomial {
    k: usize,
    s: u32,
    scale: u32,
    coeffs: Vec<i128>,
}

impl RademacherPolynomial {
    pub fn new(k: usize, s: u32, scale: u32, coeffs: Vec<i128>) -> Result<Self> {
        if k == 0 {
            return Err(invalid("a Rademacher polynomial needs k ≥ 1"));
        }
        let len = table_len(k, s)?;
        if coeffs.len() != len {
            return Err(invalid(format!("expected {len} coefficients for k = {k}, s = {s}, got {}", coeffs.len())));
        }
        Ok(RademacherPolynomial { k, s, scale, coeffs })
    }

    pub fn zero(k: usize, s: u32) -> Result<Self> {
        let len = table_len(k.max(1), s)?;
        RademacherPolynomial::new(k, s, 0, vec![0; len])
    }

    /// Builds a table from exact coefficients, which must share a bounded denominator.
    pub fn from_dyadics(k: usize, s: u32, coeffs: &[Dyadic]) -> Result<Self> {
        let scale = coeffs.iter().map(|c| c.exp()).max().unwrap_or(0);
        let ints = coeffs
            .iter()
            .map(|c| c.scaled_numer(scale).to_i128().ok_or_else(|| invalid("coefficient too large for the table")))
            .collect::<Result<Vec<_>>>()?;
        RademacherPolynomial::new(k, s, scale, ints)
    }

    /// `c · r_A`
    pub fn single(k: usize, s: u32, levels: &[u32], c: i128) -> Result<Self> {
        let mut p = RademacherPolynomial::zero(k, s)?;
        let i = p.index_of(levels)?;
        p.coeffs[i] = c;
        Ok(p)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn scaled_coefficients(&self) -> &[i128] {
        &self.coeffs
    }

    pub fn index_of(&self, levels: &[u32]) -> Result<usize> {
        check_dim(self.k, levels.len())?;
        let mut i = 0usize;
        for &a in levels {
            if a > self.s {
                return Err(invalid(format!("level {a} outside I_s with s = {}", self.s)));
            }
            i = i * (self.s as usize + 1) + a as usize;
        }
        Ok(i)
    }

    pub fn levels_of(&self, mut i: usize) -> Vec<u32> {
        let b = self.s as usize + 1;
        let mut a = vec![0u32; self.k];
        for j in (0..self.k).rev() {
            a[j] = (i % b) as u32;
            i /= b;
        }
        a
    }

    pub fn coefficient(&self, levels: &[u32]) -> Result<Dyadic> {
        Ok(Dyadic::new(self.coeffs[self.index_of(levels)?], self.scale))
    }

    /// `f(Y)`, summed term by term.
    pub fn evaluate(&self, y: &DyadicPoint) -> Result<Dyadic> {
        check_dim(self.k, y.dim())?;
        let mut acc = BigInt::from(0);
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c != 0 {
                acc += c * rademacher_multi(&self.levels_of(i), y)? as i128;
            }
        }
        Ok(Dyadic::new(acc, self.scale))
    }

    /// Values on `Q^k(2^s)` times `2^{scale}`, row-major in the mantissas with `y_1` slowest.
    pub fn grid_values(&self) -> Result<Vec<i128>> {
        guard_grid(self.k, self.s)?;
        Ok(synthesize(&self.coeffs, self.k, self.s))
    }

    /// `Σ_{Y ∈ Q^k(2^s)} |f(Y)|^q` in scaled units.
    pub fn grid_power_sum(&self, q: f64) -> Result<PowerSum> {
        let mut acc = PowerSum::new(q);
        for v in self.grid_values()? {
            acc.add(v);
        }
        Ok(acc)
    }

    /// `max_Y |f(Y)|`, exactly.
    pub fn sup_norm(&self) -> Result<Dyadic> {
        let m = self.grid_values()?.into_iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
        Ok(Dyadic::new(BigInt::from(m), self.scale))
    }

    /// `‖f‖_{s,q}`.
    pub fn norm_grid(&self, q: Exponent) -> Result<f64> {
        match q {
            Exponent::Infinity => Ok(self.sup_norm()?.to_f64()),
            Exponent::Finite(q) => {
                Ok(self.grid_power_sum(q)?.norm(self.k as u32 * self.s, self.scale))
            }
        }
    }

    /// `Σ λ_A²`, exactly.
    pub fn q2_squared(&self) -> Dyadic {
        let mut acc = BigInt::from(0);
        for &c in &self.coeffs {
            acc += BigInt::from(c) * c;
        }
        Dyadic::new(acc, 2 * self.scale)
    }

    pub fn q2(&self) -> f64 {
        self.q2_squared().to_f64().sqrt()
    }

    fn require_split(&self, what: &str) -> Result<()> {
        if self.k < 2 {
            Err(invalid(format!("{what} needs k ≥ 2")))
        } else {
            Ok(())
        }
    }

    /// Scaled values of `Φ_𝐀(y)` for every `𝐀 ∈ I^{k-1}_s` (rows) and `y ∈ Q(2^s)` (columns).
    pub fn window_values(&self) -> Result<Vec<Vec<i128>>> {
        self.require_split("the window split")?;
        guard_grid(1, self.s)?;
        let b = self.s as usize + 1;
        Ok(self.coeffs.chunks(b).map(|row| synthesize(row, 1, self.s)).collect())
    }

    /// `max_{𝐀, y} |Φ_𝐀(y)|`, exactly.
    pub fn max_window(&self) -> Result<Dyadic> {
        let m = self.window_values()?.iter().flatten().map(|v| v.unsigned_abs()).max().unwrap_or(0);
        Ok(Dyadic::new(BigInt::from(m), self.scale))
    }

    /// `Q_{∞,2}[f] = max_y (Σ_𝐀 Φ_𝐀(y)²)^{1/2}`.
    pub fn q_inf2(&self) -> Result<f64> {
        let rows = self.window_values()?;
        let n = 1usize << self.s;
        let mut best = BigInt::from(0);
        for y in 0..n {
            let mut t = BigInt::from(0);
            for row in &rows {
                t += BigInt::from(row[y]) * row[y];
            }
            if t > best {
                best = t;
            }
        }
        Ok(Dyadic::new(best, 2 * self.scale).to_f64().sqrt())
    }

    /// `Q_{1,2}[f] = Σ_a Q_2[φ_a]`.
    pub fn q_12(&self) -> Result<f64> {
        self.require_split("Q_{1,2}")?;
        (0..=self.s).map(|a| self.slice_varphi(a).map(|p| p.q2())).sum::<Result<f64>>()
    }

    /// `φ_a(𝐘) = Σ_𝐀 λ_{(𝐀,a)} r_𝐀(𝐘)` as a polynomial in `k − 1` variables.
    pub fn slice_varphi(&self, a: u32) -> Result<RademacherPolynomial> {
        self.require_split("the slice φ_a")?;
        if a > self.s {
            return Err(invalid(format!("level {a} outside I_s")));
        }
        let b = self.s as usize + 1;
        let c = self.coeffs.iter().skip(a as usize).step_by(b).copied().collect();
        RademacherPolynomial::new(self.k - 1, self.s, self.scale, c)
    }

    /// `Φ_𝐀(y) = Σ_a λ_{(𝐀,a)} r_a(y)` as a one-variable polynomial.
    pub fn slice_phi(&self, bold: &[u32]) -> Result<RademacherPolynomial> {
        self.require_split("the slice Φ_𝐀")?;
        check_dim(self.k - 1, bold.len())?;
        let mut full = bold.to_vec();
        full.push(0);
        let start = self.index_of(&full)?;
        let b = self.s as usize + 1;
        RademacherPolynomial::new(1, self.s, self.scale, self.coeffs[start..start + b].to_vec())
    }

    pub fn khinchin_check(&self, q: f64) -> Result<KhinchinReport> {
        let q = Exponent::finite(q)?.value();
        let c = KhinchinConstants::new(q, self.k as u32);
        let norm = self.norm_grid(Exponent::Finite(q))?;
        let q2 = self.q2();
        let lower = c.alpha_k() * q2;
        let upper = c.beta_k() * q2;
        Ok(KhinchinReport {
            q,
            k: self.k as u32,
            alpha_k: c.alpha_k(),
            beta_k: c.beta_k(),
            norm,
            q2,
            lower_ok: le_tol(lower, norm),
            upper_ok: le_tol(norm, upper),
            ratio: (q2 > 0.0).then(|| norm / q2),
        })
    }

    /// The bracket `α_q^d Q_2[f] ≤ ‖f‖_{s,q} ≤ β_q^{d-1} Q_{∞,2}[f]`.
    pub fn lemma31_bounds(&self, q: f64) -> Result<Lemma31Report> {
        self.require_split("the split-variable bracket")?;
        let q = Exponent::finite(q)?.value();
        let d = self.k as u32;
        let c = KhinchinConstants::new(q, d);
        let norm = self.norm_grid(Exponent::Finite(q))?;
        let upper = c.beta_q.powi(d as i32 - 1) * self.q_inf2()?;
        let lower = c.alpha_k() * self.q2();
        Ok(Lemma31Report { q, d, upper, lower, norm, holds: le_tol(lower, norm) && le_tol(norm, upper) })
    }

    /// `α_1^{d-1} Q_{1,2}[f] ≤ ‖f‖_{s,∞}`.
    pub fn lemma32_bound(&self) -> Result<Lemma32Report> {
        self.require_split("Q_{1,2}")?;
        let d = self.k as u32;
        let bound = KhinchinConstants::new(1.0, d).alpha_q.powi(d as i32 - 1) * self.q_12()?;
        let sup = self.sup_norm()?.to_f64();
        Ok(Lemma32Report { d, bound, sup_norm: sup, holds: le_tol(bound, sup) })
    }
}

fn table_len(k: usize, s: u32) -> Result<usize> {
    (s as usize + 1)
        .checked_pow(k as u32)
        .filter(|&n| n <= 1 << 28)
        .ok_or_else(|| invalid(format!("coefficient table (s+1)^k with k = {k}, s = {s} is too large")))
}

fn guard_grid(k: usize, s: u32) -> Result<()> {
    let need = k as u64 * s as u64;
    if need > GRID_LIMIT_LOG2 as u64 {
        return Err(Error::Guard {
            what: "grid evaluation",
            needed_log2: need as f64,
            limit_log2: GRID_LIMIT_LOG2 as f64,
            hint: "lower s or k",
        });
    }
    Ok(())
}

/// Separable synthesis: turns the coefficient axis `{0..s}` into the grid axis `{0..2^s}`
/// one coordinate at a time.
pub(crate) fn synthesize(coeffs: &[i128], k: usize, s: u32) -> Vec<i128> {
    let b = s as usize + 1;
    let g = 1usize << s;
    // signs[y][a] = r_a(y) for y an s-bit mantissa
    let signs: Vec<Vec<i128>> = (0..g)
        .map(|y| {
            (0..b)
                .map(|a| if a == 0 { 1 } else { 1 - 2 * ((y >> (s as usize - a)) & 1) as i128 })
                .collect()
        })
        .collect();
    let mut data = coeffs.to_vec();
    // axis j goes from length b to length g; `outer` counts the slower axes, `inner` the faster.
    for j in 0..k {
        let outer = g.pow(j as u32);
        let inner = b.pow((k - 1 - j) as u32);
        let mut out = vec![0i128; outer * g * inner];
        for o in 0..outer {
            for (y, sg) in signs.iter().enumerate() {
                let dst = &mut out[(o * g + y) * inner..(o * g + y + 1) * inner];
                for (a, &sign) in sg.iter().enumerate() {
                    let src = &data[(o * b + a) * inner..(o * b + a + 1) * inner];
                    if sign == 1 {
                        for (d, &v) in dst.iter_mut().zip(src) {
                            *d += v;
                        }
                    } else {
                        for (d, &v) in dst.iter_mut().zip(src) {
                            *d -= v;
                        }
                    }
                }
            }
        }
        data = out;
    }
    data
}

/// Khinchin constants `α_q`, `β_q` and their `k`-th powers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KhinchinConstants {
    #[serde(serialize_with = "report::float")]
    pub q: f64,
    #[serde(serialize_with = "report::float")]
    pub alpha_q: f64,
    #[serde(serialize_with = "report::float")]
    pub beta_q: f64,
    pub k: u32,
}

impl KhinchinConstants {
    pub fn new(q: f64, k: u32) -> Self {
        let alpha_q = if q < 2.0 { (-(2.0 - q) / q).exp2() } else { 1.0 };
        let beta_q = (q / 2.0).ceil().sqrt();
        KhinchinConstants { q, alpha_q, beta_q, k }
    }

    pub fn alpha_k(&self) -> f64 {
        self.alpha_q.powi(self.k as i32)
    }

    pub fn beta_k(&self) -> f64 {
        (self.q / 2.0).ceil().powf(self.k as f64 / 2.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KhinchinReport {
    #[serde(serialize_with = "report::float")]
    pub q: f64,
    pub k: u32,
    #[serde(serialize_with = "report::float")]
    pub alpha_k: f64,
    #[serde(serialize_with = "report::float")]
    pub beta_k: f64,
    #[serde(serialize_with = "report::float")]
    pub norm: f64,
    #[serde(serialize_with = "report::float")]
    pub q2: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
    /// `‖f‖_{s,q} / Q_2[f]`, absent for the zero polynomial.
    #[serde(serialize_with = "report::opt_float")]
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma31Report {
    #[serde(serialize_with = "report::float")]
    pub q: f64,
    pub d: u32,
    #[serde(serialize_with = "report::float")]
    pub upper: f64,
    #[serde(serialize_with = "report::float")]
    pub lower: f64,
    #[serde(serialize_with = "report::float")]
    pub norm: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma32Report {
    pub d: u32,
    #[serde(serialize_with = "report::float")]
    pub bound: f64,
    #[serde(serialize_with = "report::float")]
    pub sup_norm: f64,
    pub holds: bool,
}
