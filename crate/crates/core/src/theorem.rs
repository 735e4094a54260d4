//! Bound constants, thresholds and verdicts for the three mean-discrepancy bounds, with the
//! intermediate proof quantities as diagnostics.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::decomposition::MicroLocalTable;
use crate::error::{invalid, Error, Result};
use crate::exponent::Exponent;
use crate::mean::{mean_lq, nearest_int_dist, MeanDiscrepancyEstimate, ShiftList, ShiftMode};
use crate::pointset::{check_net, PointSet};
use crate::report;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Theorem {
    /// Upper bound for nets: `M_{s,q} < 2^{-d+δ+1}(⌈q/2⌉(s+1))^{(d-1)/2} + d2^δ`.
    T21,
    /// Lower bound `M_{s,q} > γ_q(d)(log N)^{(d-1)/2}` for `0 < q ≤ 1`, `d ≥ 2`.
    T22,
    /// Lower bound `M_{s,∞} > γ_∞(d)(log N)^{d/2}` for `d ≥ 3`.
    T23,
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Theorem::T21 => "2.1",
            Theorem::T22 => "2.2",
            Theorem::T23 => "2.3",
        })
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "2.1" => Ok(Theorem::T21),
            "2.2" => Ok(Theorem::T22),
            "2.3" => Ok(Theorem::T23),
            _ => Err(invalid(format!("unknown bound {s:?}; expected 2.1, 2.2 or 2.3"))),
        }
    }
}

impl Serialize for Theorem {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Violated,
    Inconclusive,
}

fn log2(n: usize) -> f64 {
    (n as f64).log2()
}

/// `x^x` with `0^0 = 1`.
fn self_power(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.powf(e)
    }
}

/// `c_q(d) = 2^{-2d/q-d-1}(d-1)^{-(d-1)/2}`
pub fn c_q(d: usize, q: f64) -> f64 {
    let d = d as f64;
    (-2.0 * d / q - d - 1.0).exp2() * self_power(d - 1.0, -(d - 1.0) / 2.0)
}

/// `γ_q(d) = 2^{-1/q} c_q(d) = 2^{-(2d+1)/q-d-1}(d-1)^{-(d-1)/2}`
pub fn gamma_q(d: usize, q: f64) -> f64 {
    (-1.0 / q).exp2() * c_q(d, q)
}

/// `c_∞(d) = 2^{-2d}(d-2)^{-(d-2)/2}`
pub fn c_inf(d: usize) -> f64 {
    let d = d as f64;
    (-2.0 * d).exp2() * self_power(d - 2.0, -(d - 2.0) / 2.0)
}

/// `γ_∞(d) = c_∞(d)/2 = 2^{-2d-1}(d-2)^{-(d-2)/2}`
pub fn gamma_inf(d: usize) -> f64 {
    c_inf(d) / 2.0
}

fn ceil_tol(x: f64) -> u32 {
    (x - 1e-9).ceil().max(0.0) as u32
}

/// Smallest `s ≥ log N + (2d+1)/q + ½(d-1)log(d-1) + d + 1 + log d`.
pub fn threshold_t22(n: usize, d: usize, q: f64) -> u32 {
    let df = d as f64;
    let dl = if d > 1 { (df - 1.0) * (df - 1.0).log2() / 2.0 } else { 0.0 };
    ceil_tol(log2(n) + (2.0 * df + 1.0) / q + dl + df + 1.0 + df.log2())
}

/// Smallest `s ≥ log N + ½(d-2)log(d-2) + 2d + log d`.
pub fn threshold_t23(n: usize, d: usize) -> u32 {
    let df = d as f64;
    let dl = if d > 2 { (df - 2.0) * (df - 2.0).log2() / 2.0 } else { 0.0 };
    ceil_tol(log2(n) + dl + 2.0 * df + df.log2())
}

/// `2^{-d+δ+1}(⌈q/2⌉(s+1))^{(d-1)/2} + d2^δ`
pub fn rhs_t21(d: usize, q: f64, delta: u32, s: u32) -> f64 {
    let df = d as f64;
    let k = (q / 2.0).ceil();
    (-df + delta as f64 + 1.0).exp2() * (k * (s as f64 + 1.0)).powf((df - 1.0) / 2.0) + df * (delta as f64).exp2()
}

/// The bound side of a theorem check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoremBounds {
    pub theorem: Theorem,
    pub n: usize,
    pub d: usize,
    pub q: Exponent,
    pub delta: Option<u32>,
    pub s: u32,
    #[serde(serialize_with = "report::float")]
    pub bound_value: f64,
    /// The `γ` constant for the lower bounds.
    #[serde(serialize_with = "report::opt_float")]
    pub constant: Option<f64>,
    /// Minimal qualifying `s` for the lower bounds.
    pub threshold_s: Option<u32>,
}

/// Closed-form bound and threshold. `s` defaults to `log₂ N` for 2.1 and to the threshold
/// otherwise; `delta` defaults to 0.
pub fn theorem_bounds(
    theorem: Theorem,
    n: usize,
    d: usize,
    q: Exponent,
    delta: Option<u32>,
    s: Option<u32>,
) -> Result<TheoremBounds> {
    if d == 0 {
        return Err(invalid("dimension must be positive"));
    }
    match theorem {
        Theorem::T21 => {
            let qv = q.finite_value("the net upper bound")?;
            if n == 0 || !n.is_power_of_two() {
                return Err(Error::NotPowerOfTwo(n));
            }
            let s_net = n.trailing_zeros();
            let s = s.unwrap_or(s_net);
            if s != s_net {
                return Err(invalid(format!("a net with N = {n} points has s = {s_net}, not {s}")));
            }
            let delta = delta.unwrap_or(0);
            if delta > s {
                return Err(invalid(format!("δ = {delta} exceeds s = {s}")));
            }
            Ok(TheoremBounds {
                theorem,
                n,
                d,
                q,
                delta: Some(delta),
                s,
                bound_value: rhs_t21(d, qv, delta, s),
                constant: None,
                threshold_s: None,
            })
        }
        Theorem::T22 => {
            let qv = q.finite_value("the L_q lower bound")?;
            if d < 2 || qv > 1.0 {
                return Err(invalid("the L_q lower bound needs d ≥ 2 and 0 < q ≤ 1"));
            }
            if n == 0 {
                return Err(invalid("the lower bounds need N ≥ 1"));
            }
            let g = gamma_q(d, qv);
            let threshold = threshold_t22(n, d, qv);
            Ok(TheoremBounds {
                theorem,
                n,
                d,
                q,
                delta,
                s: s.unwrap_or(threshold),
                bound_value: g * log2(n).powf((d as f64 - 1.0) / 2.0),
                constant: Some(g),
                threshold_s: Some(threshold),
            })
        }
        Theorem::T23 => {
            if d < 3 {
                return Err(invalid("the L_∞ lower bound needs d ≥ 3"));
            }
            if n == 0 {
                return Err(invalid("the lower bounds need N ≥ 1"));
            }
            let g = gamma_inf(d);
            let threshold = threshold_t23(n, d);
            Ok(TheoremBounds {
                theorem,
                n,
                d,
                q: Exponent::Infinity,
                delta,
                s: s.unwrap_or(threshold),
                bound_value: g * log2(n).powf(d as f64 / 2.0),
                constant: Some(g),
                threshold_s: Some(threshold),
            })
        }
    }
}

/// `|J^k_σ(s)|`, the number of `A ∈ I^k_s` with `a_1 + … + a_k = σ`, against `(σ/(k-1))^{k-1}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JSigma {
    pub k: usize,
    pub sigma: u32,
    pub s: u32,
    pub count: u128,
    #[serde(serialize_with = "report::float")]
    pub bound: f64,
    /// The bound is claimed only for `s ≥ σ`.
    pub bound_applies: bool,
    pub bound_ok: bool,
}

pub fn j_sigma(k: usize, sigma: u32, s: u32) -> Result<JSigma> {
    if k < 2 {
        return Err(invalid("j_sigma needs k ≥ 2"));
    }
    let count = compositions(k, sigma, s);
    let bound = (sigma as f64 / (k as f64 - 1.0)).powi(k as i32 - 1);
    let bound_applies = s >= sigma;
    Ok(JSigma { k, sigma, s, count, bound, bound_applies, bound_ok: !bound_applies || count as f64 >= bound })
}

/// Compositions of `total` into `parts` parts in `{0..cap}`.
fn compositions(parts: usize, total: u32, cap: u32) -> u128 {
    let total = total as usize;
    let mut ways = vec![0u128; total + 1];
    ways[0] = 1;
    for _ in 0..parts {
        let mut next = vec![0u128; total + 1];
        for (t, &w) in ways.iter().enumerate() {
            if w == 0 {
                continue;
            }
            for a in 0..=(cap as usize).min(total - t) {
                next[t + a] += w;
            }
        }
        ways = next;
    }
    ways[total]
}

/// Proof-path quantities; informational, never gates a verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProofDiagnostics {
    /// `2^{δ+1}`, the claimed bound on every window sum `|Φ_𝐀(Z, y)|` of a net.
    #[serde(serialize_with = "report::opt_float")]
    pub window_bound: Option<f64>,
    /// Largest `|Φ_𝐀(Z, y)|` seen over the inspected shifts `Z`.
    #[serde(serialize_with = "report::opt_float")]
    pub window_max: Option<f64>,
    pub window_shifts_inspected: Option<u64>,
    /// `σ = ⌈log N⌉ + 1`
    pub sigma: Option<u32>,
    pub j_sigma: Option<JSigma>,
    /// `2^{-d}(Σ_{A ∈ I^d_s} ⟨⟨N vol Π_A⟩⟩²)^{1/2}`, a floor for every `Q_2` of the table.
    #[serde(serialize_with = "report::opt_float")]
    pub q2_floor: Option<f64>,
    /// `c_q(d)` or `c_∞(d)`
    #[serde(serialize_with = "report::opt_float")]
    pub c: Option<f64>,
    /// `ξ_q(s) = c_q^{-q}(dN2^{-s})^q` or `ξ_∞(s) = c_∞^{-1} dN2^{-s}`
    #[serde(serialize_with = "report::opt_float")]
    pub xi: Option<f64>,
    pub xi_ok: Option<bool>,
}

impl ProofDiagnostics {
    fn empty() -> Self {
        ProofDiagnostics {
            window_bound: None,
            window_max: None,
            window_shifts_inspected: None,
            sigma: None,
            j_sigma: None,
            q2_floor: None,
            c: None,
            xi: None,
            xi_ok: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoremReport {
    pub theorem: Theorem,
    pub n: usize,
    pub d: usize,
    pub q: Exponent,
    pub delta: Option<u32>,
    pub s: u32,
    #[serde(serialize_with = "report::float")]
    pub bound_value: f64,
    pub threshold_s: Option<u32>,
    pub measured: MeanDiscrepancyEstimate,
    pub verdict: Verdict,
    /// Shifts averaged in sampled mode; verdicts then describe the sample only.
    pub sample_count: Option<u64>,
    pub diagnostics: ProofDiagnostics,
}

/// Shifts whose tables are inspected for the window diagnostic.
const WINDOW_SHIFTS: u64 = 64;

/// Evaluates the mean in `mode` and compares it with the bound.
///
/// Upper bound (2.1): holds when the bracket's upper end is below the bound, violated when
/// an exact lower end reaches it. Lower bounds: holds when the lower end exceeds the bound,
/// violated when an exact upper end does not. Everything else is inconclusive.
pub fn verify_theorem(
    d: &PointSet,
    theorem: Theorem,
    q: Exponent,
    s: Option<u32>,
    mode: &ShiftMode,
    delta: Option<u32>,
) -> Result<TheoremReport> {
    let n = d.len();
    let dim = d.dim();
    let mut diag = ProofDiagnostics::empty();
    let delta = match theorem {
        Theorem::T21 => {
            let r = check_net(d, delta.unwrap_or(0))?;
            match delta {
                Some(dl) if !r.is_net => {
                    return Err(Error::NotANet {
                        delta: dl,
                        detail: format!("smallest passing deficiency is {}", r.minimal_delta),
                    })
                }
                Some(dl) => Some(dl),
                None => Some(r.minimal_delta),
            }
        }
        _ => delta,
    };
    let bounds = theorem_bounds(theorem, n, dim, q, delta, s)?;
    let s = bounds.s;
    let measured = mean_lq(d, s, bounds.q, mode)?;
    let exact = matches!(mode, ShiftMode::Exact);
    let bound = bounds.bound_value;
    let verdict = match theorem {
        Theorem::T21 => match measured.upper {
            Some(u) if u < bound => Verdict::Holds,
            _ if exact && measured.lower >= bound => Verdict::Violated,
            _ => Verdict::Inconclusive,
        },
        Theorem::T22 | Theorem::T23 => {
            if measured.lower > bound {
                Verdict::Holds
            } else if exact && measured.upper.is_some_and(|u| u <= bound) {
                Verdict::Violated
            } else {
                Verdict::Inconclusive
            }
        }
    };

    let dn = dim as f64 * n as f64 * (-(s as f64)).exp2();
    match theorem {
        Theorem::T21 => {
            let dl = bounds.delta.unwrap_or(0);
            diag.window_bound = Some((dl as f64 + 1.0).exp2());
            if dim >= 2 && dim as u64 * s as u64 <= 16 {
                let zs = ShiftList::from_mode(mode, dim, s, 24, "window diagnostic")?;
                let count = zs.len().min(WINDOW_SHIFTS);
                let maxes = (0..count)
                    .map(|i| {
                        let p = MicroLocalTable::build(d, s, &zs.get(i))?.to_polynomial()?;
                        Ok(p.max_window()?.to_f64() * (dim as f64).exp2())
                    })
                    .collect::<Result<Vec<f64>>>()?;
                diag.window_max = Some(maxes.into_iter().fold(0.0, f64::max));
                diag.window_shifts_inspected = Some(count);
            }
        }
        Theorem::T22 => {
            let qv = bounds.q.value();
            let sigma = sigma_of(n);
            let c = c_q(dim, qv);
            diag.sigma = Some(sigma);
            diag.j_sigma = Some(j_sigma(dim, sigma, s)?);
            diag.q2_floor = Some(q2_floor(n, dim, s));
            diag.c = Some(c);
            let xi = c.powf(-qv) * dn.powf(qv);
            diag.xi = Some(xi);
            diag.xi_ok = Some(xi <= 0.5);
        }
        Theorem::T23 => {
            let sigma = sigma_of(n);
            let c = c_inf(dim);
            diag.sigma = Some(sigma);
            diag.j_sigma = Some(j_sigma(dim - 1, sigma, s)?);
            diag.c = Some(c);
            let xi = dn / c;
            diag.xi = Some(xi);
            diag.xi_ok = Some(xi <= 0.5);
        }
    }

    Ok(TheoremReport {
        theorem,
        n,
        d: dim,
        q: bounds.q,
        delta: bounds.delta,
        s,
        bound_value: bound,
        threshold_s: bounds.threshold_s,
        sample_count: match mode {
            ShiftMode::Sampled { count, .. } => Some(*count),
            ShiftMode::Exact => None,
        },
        measured,
        verdict,
        diagnostics: diag,
    })
}

/// `σ = ⌈log N⌉ + 1`, so that `1/4 < N2^{-σ} ≤ 1/2`.
pub fn sigma_of(n: usize) -> u32 {
    let log = if n <= 1 { 0 } else { usize::BITS - (n - 1).leading_zeros() };
    log + 1
}

/// `2^{-d}(Σ_{A ∈ I^d_s} ⟨⟨N 2^{-|A|}⟩⟩²)^{1/2}`, grouping `A` by level sum.
pub fn q2_floor(n: usize, d: usize, s: u32) -> f64 {
    let total: f64 = (0..=d as u32 * s)
        .map(|sum| {
            let t = nearest_int_dist(n as f64 * (-(sum as f64)).exp2());
            compositions(d, sum, s) as f64 * t * t
        })
        .sum();
    (-(d as f64)).exp2() * total.sqrt()
}
