//! Certified enclosures of the localization constants
//!
//! * `ζ(s)`,
//! * `D_s = sup_{x∈ℝ} Σ_{n≥1} (1+|n−x|)^{-s}`,
//! * an admissible separation constant `C_s = 2ζ(s)`: whenever indices are
//!   pairwise at least `δ` apart, `Σ_{n≠m} (1+|n−m|)^{-s} ≤ C_s/δ^s`.
//!
//! For `C_s`: the `k`-th nearest neighbor on either side of `m` sits at
//! distance at least `kδ`, so the sum is at most
//! `2Σ_{k≥1} (1+kδ)^{-s} ≤ 2Σ_{k≥1} (kδ)^{-s} = 2ζ(s)/δ^s`.
//!
//! For `D_s`: write `x = N + θ`. Pairing the distances `k+θ` and `k+1−θ` with
//! `k` and `k+1` and using convexity of `t ↦ (1+t)^{-s}` shows the two-sided
//! sum never exceeds its value at an integer, `1 + 2(ζ(s) − 1)`. Restricting to
//! `n ≥ 1` only removes terms, and the missing left tail vanishes as `N → ∞`,
//! so `D_s = 2ζ(s) − 1`. The enclosure takes that as its upper end and the best
//! certified grid value deep in the interior as its lower end.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_exponent, Error, Result};
use crate::numeric::{hurwitz, power_tail_bracket, ExactSum, Interval};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrochenigConstants {
    pub s: f64,
    pub zeta: Interval,
    pub d_s: Interval,
    pub c_s: f64,
}

impl GrochenigConstants {
    pub fn compute(s: f64, tol: f64) -> Result<Self> {
        Ok(Self { s, zeta: zeta(s, tol)?, d_s: d_s(s, tol)?, c_s: c_s(s)? })
    }
}

/// Enclosure of `ζ(s)` of width at most `tol`.
pub fn zeta(s: f64, tol: f64) -> Result<Interval> {
    hurwitz(1.0, s, tol)
}

/// Tolerance used for `C_s`: `1e-12`, relaxed near `s = 1` where `ζ(s)` blows
/// up and double precision cannot resolve an absolute `1e-12`.
pub(crate) fn c_s_tolerance(s: f64) -> f64 {
    (1e-14 * (1.0 / (s - 1.0) + 1.0)).max(1e-12)
}

/// Admissible separation constant `2·ζ_hi(s)`.
pub fn c_s(s: f64) -> Result<f64> {
    check_exponent(s)?;
    Ok(2.0 * zeta(s, c_s_tolerance(s))?.hi)
}

const GRID_POINTS: usize = 16;
const MAX_DEPTH_LOG2: i32 = 1000;

/// Enclosure of `D_s`. The width is at most `tol` unless `s` is so close to 1
/// that the left tail cannot be pushed below `tol/4` within `f64` range.
pub fn d_s(s: f64, tol: f64) -> Result<Interval> {
    check_exponent(s)?;
    let z = zeta(s, tol / 4.0)?;
    let upper = 2.0 * z.hi - 1.0;

    // depth N: the left tail H(N+1+θ) ≤ ∫_{N+1/2}^∞ t^{-s} dt must be ≤ tol/4
    let left_tail = |depth: f64| (depth + 0.5).powf(1.0 - s) / (s - 1.0);
    let mut log2_depth = 6;
    while left_tail(2f64.powi(log2_depth)) > tol / 4.0 && log2_depth < MAX_DEPTH_LOG2 {
        log2_depth += 1;
    }
    let missing = left_tail(2f64.powi(log2_depth));

    // F(N+θ) = H(1+θ) + H(2−θ) − H(N+1+θ), H(a) = Σ_{k≥0}(a+k)^{-s}
    let mut lower = 2.0 * z.lo - 1.0 - missing;
    for i in 1..GRID_POINTS {
        let theta = i as f64 / GRID_POINTS as f64;
        let left = hurwitz(1.0 + theta, s, tol / 8.0)?;
        let right = hurwitz(2.0 - theta, s, tol / 8.0)?;
        lower = lower.max(left.lo + right.lo - missing);
    }
    // x = n contributes the term 1
    let lower = lower.max(1.0);
    Ok(Interval::new(lower.min(upper), upper))
}

/// One separation `δ` checked against `C_s/δ^s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparationCheck {
    pub delta: usize,
    /// Largest off-diagonal sum seen inside the truncated progression.
    pub truncated_sup: f64,
    /// Certified upper bound on the supremum over the infinite progression.
    pub sup_upper: f64,
    pub bound: f64,
    /// `sup_upper · δ^s / C_s`; at most 1 when the bound holds.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationReport {
    pub s: f64,
    pub c_s: f64,
    pub pass: bool,
    pub worst_ratio: f64,
    pub checks: Vec<SeparationCheck>,
}

/// Numerically confirms the separation bound for `δ = 1..=delta_max` on the
/// extremal δ-separated set, the progression `{δ, 2δ, 3δ, …}`.
///
/// Members up to `trunc` are summed explicitly; the rest of the progression
/// is bracketed in closed form.
pub fn verify_separation_bound(s: f64, delta_max: usize, trunc: usize) -> Result<SeparationReport> {
    check_exponent(s)?;
    if delta_max == 0 {
        return Err(Error::InvalidParameter { name: "delta_max", reason: "must be at least 1".into() });
    }
    if trunc < 10 * delta_max {
        return Err(Error::InvalidParameter {
            name: "trunc",
            reason: format!("must be at least 10·delta_max = {}", 10 * delta_max),
        });
    }
    let c = c_s(s)?;
    let checks: Vec<SeparationCheck> = (1..=delta_max)
        .into_par_iter()
        .map(|delta| separation_check(s, c, delta, trunc))
        .collect();
    let worst_ratio = checks.iter().map(|c| c.ratio).fold(0.0, f64::max);
    let pass = checks.iter().all(|c| c.sup_upper <= c.bound && c.truncated_sup <= c.bound);
    Ok(SeparationReport { s, c_s: c, pass, worst_ratio, checks })
}

fn separation_check(s: f64, c: f64, delta: usize, trunc: usize) -> SeparationCheck {
    let members = trunc / delta;
    let step = delta as f64;
    // prefix[k] = Σ_{i=1..k} (1 + iδ)^{-s}
    let mut prefix = Vec::with_capacity(members + 1);
    let mut acc = ExactSum::new();
    prefix.push(0.0);
    for i in 1..=members {
        acc.add((1.0 + i as f64 * step).powf(-s));
        prefix.push(acc.value());
    }
    // member j (1-based) sees j−1 neighbors on the left and members−j on the right
    let truncated_sup = (1..=members)
        .map(|j| prefix[j - 1] + prefix[members - j])
        .fold(0.0, f64::max);

    // Σ_{i>members} (1+iδ)^{-s} = δ^{-s} Σ_{k≥0} (1/δ + members + 1 + k)^{-s}
    let tail = power_tail_bracket(1.0 / step + members as f64 + 1.0, s).scale(step.powf(-s));
    let one_side = prefix[members] + tail.hi;
    let sup_upper = 2.0 * one_side * (1.0 + 4.0 * f64::EPSILON);
    let bound = c / step.powf(s);
    SeparationCheck { delta, truncated_sup, sup_upper, bound, ratio: sup_upper / bound }
}
