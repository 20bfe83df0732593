//! Small numeric toolkit: closed intervals, correctly rounded summation and
//! certified enclosures of power sums `Σ_{k≥0} (a+k)^{-s}`.
//!
//! The power-sum enclosures rely only on convexity of `x ↦ x^{-s}`: the
//! trapezoid rule overestimates and the midpoint rule underestimates the
//! integral of a convex function, which brackets every tail between two
//! closed-form integrals.

use serde::{Deserialize, Serialize};

use crate::error::{check_exponent, Error, Result};

/// Closed interval `[lo, hi]`, serialized as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "empty interval [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// `self ⊆ other`
    pub fn is_subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn scale(&self, c: f64) -> Self {
        if c >= 0.0 {
            Self::new(self.lo * c, self.hi * c)
        } else {
            Self::new(self.hi * c, self.lo * c)
        }
    }

    pub fn add(&self, other: &Interval) -> Self {
        Self::new(self.lo + other.lo, self.hi + other.hi)
    }
}

impl From<[f64; 2]> for Interval {
    fn from(v: [f64; 2]) -> Self {
        Self { lo: v[0], hi: v[1] }
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

/// Streaming, correctly rounded floating-point sum (Shewchuk partials with
/// the half-way correction used by CPython's `math.fsum`).
///
/// Because the result is the correctly rounded true sum, it is monotone in
/// every summand. The oracle relies on that to prune exactly.
#[derive(Debug, Clone, Default)]
pub struct ExactSum {
    partials: Vec<f64>,
}

impl ExactSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, mut x: f64) {
        let mut i = 0;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        self.partials.truncate(i);
        self.partials.push(x);
    }

    pub fn value(&self) -> f64 {
        let p = &self.partials;
        let Some(mut n) = p.len().checked_sub(1) else {
            return 0.0;
        };
        let mut hi = p[n];
        let mut lo = 0.0;
        while n > 0 {
            let x = hi;
            n -= 1;
            let y = p[n];
            hi = x + y;
            let yr = hi - x;
            lo = y - yr;
            if lo != 0.0 {
                break;
            }
        }
        // round-half-even correction when the discarded tail has the same sign
        if n > 0 && ((lo < 0.0 && p[n - 1] < 0.0) || (lo > 0.0 && p[n - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            let yr = x - hi;
            if y == yr {
                hi = x;
            }
        }
        hi
    }
}

impl Extend<f64> for ExactSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

pub fn exact_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = ExactSum::new();
    acc.extend(values);
    acc.value()
}

/// `∫_a^∞ x^{-s} dx`
fn tail_integral(a: f64, s: f64) -> f64 {
    a.powf(1.0 - s) / (s - 1.0)
}

/// Enclosure of `Σ_{k≥0} (b+k)^{-s}` with no explicit terms, valid for `b > 1/2`:
/// `f(b)/2 + ∫_b^∞ f  ≤  Σ  ≤  ∫_{b-1/2}^∞ f`.
pub fn power_tail_bracket(b: f64, s: f64) -> Interval {
    debug_assert!(b > 0.5 && s > 1.0);
    let lo = 0.5 * b.powf(-s) + tail_integral(b, s);
    let hi = tail_integral(b - 0.5, s);
    // a few ulps of outward rounding
    let pad = 8.0 * f64::EPSILON * hi;
    Interval::new((lo - pad).max(0.0), hi + pad)
}

const MAX_TERMS: usize = 1 << 30;

/// Certified enclosure of the Hurwitz-type sum `Σ_{k≥0} (a+k)^{-s}` with width
/// at most `tol`. `a > 0`, `s > 1`.
///
/// `K` explicit terms are summed exactly rounded; the remainder is bracketed by
/// [`power_tail_bracket`]. `K` doubles until the enclosure is narrow enough.
pub fn hurwitz(a: f64, s: f64, tol: f64) -> Result<Interval> {
    check_exponent(s)?;
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::InvalidParameter {
            name: "a",
            reason: format!("shift must be positive and finite, got {a}"),
        });
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol",
            reason: format!("tolerance must be positive, got {tol}"),
        });
    }

    // cheap width model to pick a starting K: width ≈ s·b^{-s-1}/8
    let mut terms = 16usize;
    loop {
        let b = a + terms as f64;
        let predicted = s * b.powf(-s - 1.0) / 8.0;
        if predicted <= 0.5 * tol || terms >= MAX_TERMS {
            break;
        }
        terms *= 2;
    }

    loop {
        let enclosure = hurwitz_with_terms(a, s, terms);
        if enclosure.width() <= tol {
            return Ok(enclosure);
        }
        if terms >= MAX_TERMS {
            return Err(Error::ToleranceTooTight(tol));
        }
        terms *= 2;
    }
}

/// Enclosure using exactly `terms` explicit summands.
pub fn hurwitz_with_terms(a: f64, s: f64, terms: usize) -> Interval {
    let mut acc = ExactSum::new();
    // smallest first
    for k in (0..terms).rev() {
        acc.add((a + k as f64).powf(-s));
    }
    let partial = acc.value();
    let tail = power_tail_bracket(a + terms as f64, s);
    // pow is accurate to about an ulp per term
    let pad = 4.0 * f64::EPSILON * partial;
    Interval::new(partial + tail.lo - pad, partial + tail.hi + pad)
}

/// Certified enclosure of `Σ_{k≥k0} (1 + k·step)^{-s}` for `step ≥ 1`, `k0 ≥ 1`.
///
/// Rewritten as `step^{-s} · Σ_{j≥0} (1/step + k0 + j)^{-s}`.
pub fn progression_sum(step: f64, s: f64, k0: u64, tol: f64) -> Result<Interval> {
    let scale = step.powf(-s);
    let inner = hurwitz(1.0 / step + k0 as f64, s, tol / scale.max(f64::MIN_POSITIVE))?;
    let out = inner.scale(scale);
    let pad = 4.0 * f64::EPSILON * out.hi;
    Ok(Interval::new((out.lo - pad).max(0.0), out.hi + pad))
}
