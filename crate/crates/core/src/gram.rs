//! Cross-Gram systems `G[n][m] = |f_n(τ_m)|`: a finite truncation plus an
//! optional decay envelope and diagonal floor that describe the infinite tail.
//!
//! Indices in the public API are 1-based, matching the natural-number
//! indexing of the underlying sequences.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_exponent, Error, Result};
use crate::numeric::{hurwitz, Interval};

/// Absolute slack allowed when checking stored entries against an envelope
/// or a diagonal floor.
pub const DEFAULT_ENVELOPE_TOL: f64 = 1e-9;

/// Polynomial off-diagonal decay `|f_n(τ_m)| ≤ A / (1 + |n − m|)^s`, `s > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EnvelopeRepr", into = "EnvelopeRepr")]
pub struct DecayEnvelope {
    amplitude: f64,
    exponent: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnvelopeRepr {
    #[serde(rename = "A")]
    a: f64,
    s: f64,
}

impl TryFrom<EnvelopeRepr> for DecayEnvelope {
    type Error = Error;
    fn try_from(r: EnvelopeRepr) -> Result<Self> {
        DecayEnvelope::new(r.a, r.s)
    }
}

impl From<DecayEnvelope> for EnvelopeRepr {
    fn from(e: DecayEnvelope) -> Self {
        EnvelopeRepr { a: e.amplitude, s: e.exponent }
    }
}

impl DecayEnvelope {
    /// `A = 0` is accepted: it describes a system with no off-diagonal mass.
    pub fn new(amplitude: f64, exponent: f64) -> Result<Self> {
        check_exponent(exponent)?;
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "A",
                reason: format!("envelope amplitude must be finite and nonnegative, got {amplitude}"),
            });
        }
        Ok(Self { amplitude, exponent })
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// `A / (1 + distance)^s`
    pub fn bound(&self, distance: usize) -> f64 {
        self.amplitude / (1.0 + distance as f64).powf(self.exponent)
    }
}

/// Whether a bound is asserted for all of ℕ or only observed on the truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scope {
    Global,
    TruncationOnly,
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scope::Global => "global",
            Scope::TruncationOnly => "truncation-only",
        })
    }
}

/// Storage of the `T × T` truncation.
#[derive(Debug, Clone, PartialEq)]
pub enum Layout {
    /// Row-major, `T²` values.
    Dense(Vec<f64>),
    /// `2w + 1` diagonals ordered by offset `-w..=w`; the diagonal with offset
    /// `k` has `T − |k|` values. Entries outside the band are zero.
    Banded { bandwidth: usize, bands: Vec<Vec<f64>> },
    /// Symmetric Toeplitz: `profile[d]` is the value at distance `d`.
    Toeplitz(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayoutKind {
    Dense,
    Banded,
    Toeplitz,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramSystem {
    size: usize,
    layout: Layout,
    envelope: Option<DecayEnvelope>,
    diag_floor: Option<f64>,
    metadata: BTreeMap<String, serde_json::Value>,
}

impl GramSystem {
    pub fn dense(rows: Vec<Vec<f64>>) -> Result<Self> {
        let size = rows.len();
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != size) {
            return Err(Error::InvalidSystem(format!(
                "row {} has {} entries, expected {size}",
                i + 1,
                row.len()
            )));
        }
        Self::from_layout(size, Layout::Dense(rows.into_iter().flatten().collect()))
    }

    /// Dense system with `entry(n, m)` given by a closure over 1-based indices.
    pub fn from_fn(size: usize, mut entry: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(size * size);
        for n in 1..=size {
            for m in 1..=size {
                values.push(entry(n, m));
            }
        }
        Self::from_layout(size, Layout::Dense(values))
    }

    pub fn banded(size: usize, bandwidth: usize, bands: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_layout(size, Layout::Banded { bandwidth, bands })
    }

    pub fn toeplitz(profile: Vec<f64>) -> Result<Self> {
        Self::from_layout(profile.len(), Layout::Toeplitz(profile))
    }

    pub fn from_layout(size: usize, layout: Layout) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidSystem("size must be at least 1".into()));
        }
        check_layout(size, &layout)?;
        Ok(Self {
            size,
            layout,
            envelope: None,
            diag_floor: None,
            metadata: BTreeMap::new(),
        })
    }

    /// Attach a global envelope; every stored off-diagonal entry must respect it
    /// up to [`DEFAULT_ENVELOPE_TOL`].
    pub fn with_envelope(mut self, envelope: DecayEnvelope) -> Result<Self> {
        let report = verify_envelope(&self, &envelope, DEFAULT_ENVELOPE_TOL);
        if let Some(v) = report.violations.first() {
            return Err(Error::InvalidSystem(format!(
                "entry ({}, {}) exceeds the envelope bound by {:e} ({} violations)",
                v.n,
                v.m,
                v.excess,
                report.violations.len()
            )));
        }
        self.envelope = Some(envelope);
        Ok(self)
    }

    /// Assert a global lower bound on the diagonal.
    pub fn with_diag_floor(mut self, floor: f64) -> Result<Self> {
        if !(floor.is_finite() && floor >= 0.0) {
            return Err(Error::InvalidSystem(format!(
                "diag_floor must be finite and nonnegative, got {floor}"
            )));
        }
        for i in 0..self.size {
            let d = self.value(i, i);
            if d < floor - DEFAULT_ENVELOPE_TOL {
                return Err(Error::InvalidSystem(format!(
                    "diagonal entry {} = {d} is below diag_floor {floor}",
                    i + 1
                )));
            }
        }
        self.diag_floor = Some(floor);
        Ok(self)
    }

    pub fn with_metadata(mut self, key: &str, value: serde_json::Value) -> Self {
        self.metadata.insert(key.to_owned(), value);
        self
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn envelope(&self) -> Option<&DecayEnvelope> {
        self.envelope.as_ref()
    }

    pub fn diag_floor(&self) -> Option<f64> {
        self.diag_floor
    }

    pub fn metadata(&self) -> &BTreeMap<String, serde_json::Value> {
        &self.metadata
    }

    /// Stored value at 1-based `(n, m)`, or `None` outside the truncation.
    pub fn get(&self, n: usize, m: usize) -> Option<f64> {
        if (1..=self.size).contains(&n) && (1..=self.size).contains(&m) {
            Some(self.value(n - 1, m - 1))
        } else {
            None
        }
    }

    /// 0-based unchecked accessor.
    pub(crate) fn value(&self, i: usize, j: usize) -> f64 {
        match &self.layout {
            Layout::Dense(v) => v[i * self.size + j],
            Layout::Banded { bandwidth, bands } => {
                let offset = j as isize - i as isize;
                if offset.unsigned_abs() > *bandwidth {
                    0.0
                } else {
                    bands[(offset + *bandwidth as isize) as usize][i.min(j)]
                }
            }
            Layout::Toeplitz(profile) => profile[i.abs_diff(j)],
        }
    }

    pub fn is_symmetric(&self) -> bool {
        match &self.layout {
            Layout::Toeplitz(_) => true,
            _ => (0..self.size).all(|i| (0..i).all(|j| self.value(i, j) == self.value(j, i))),
        }
    }

    /// Calls `f(i, j, value)` (0-based) for every stored off-diagonal entry that
    /// may be nonzero.
    fn for_each_offdiag(&self, mut f: impl FnMut(usize, usize, f64)) {
        match &self.layout {
            Layout::Banded { bandwidth, bands } => {
                let w = *bandwidth as isize;
                for (b, band) in bands.iter().enumerate() {
                    let offset = b as isize - w;
                    if offset == 0 {
                        continue;
                    }
                    for (k, &v) in band.iter().enumerate() {
                        let (i, j) = if offset > 0 {
                            (k, k + offset as usize)
                        } else {
                            (k + offset.unsigned_abs(), k)
                        };
                        f(i, j, v);
                    }
                }
            }
            _ => {
                for i in 0..self.size {
                    for j in 0..self.size {
                        if i != j {
                            f(i, j, self.value(i, j));
                        }
                    }
                }
            }
        }
    }

    pub fn to_layout(&self, kind: LayoutKind) -> Result<Self> {
        let layout = match kind {
            LayoutKind::Dense => {
                let mut v = Vec::with_capacity(self.size * self.size);
                for i in 0..self.size {
                    for j in 0..self.size {
                        v.push(self.value(i, j));
                    }
                }
                Layout::Dense(v)
            }
            LayoutKind::Banded => {
                let mut bandwidth = 0;
                for i in 0..self.size {
                    for j in 0..self.size {
                        if self.value(i, j) != 0.0 {
                            bandwidth = bandwidth.max(i.abs_diff(j));
                        }
                    }
                }
                let w = bandwidth as isize;
                let bands = (-w..=w)
                    .map(|offset| {
                        let len = self.size - offset.unsigned_abs();
                        (0..len)
                            .map(|k| {
                                if offset >= 0 {
                                    self.value(k, k + offset as usize)
                                } else {
                                    self.value(k + offset.unsigned_abs(), k)
                                }
                            })
                            .collect()
                    })
                    .collect();
                Layout::Banded { bandwidth, bands }
            }
            LayoutKind::Toeplitz => {
                let profile: Vec<f64> = (0..self.size).map(|d| self.value(0, d)).collect();
                for i in 0..self.size {
                    for j in 0..self.size {
                        if self.value(i, j) != profile[i.abs_diff(j)] {
                            return Err(Error::InvalidSystem(format!(
                                "entry ({}, {}) breaks symmetric Toeplitz structure",
                                i + 1,
                                j + 1
                            )));
                        }
                    }
                }
                Layout::Toeplitz(profile)
            }
        };
        Ok(Self { layout, ..self.clone() })
    }

    pub fn from_json_str(text: &str) -> std::result::Result<Self, JsonError> {
        let mut de = serde_json::Deserializer::from_str(text);
        let sys = serde_path_to_error::deserialize(&mut de).map_err(|e| JsonError {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        de.end().map_err(|e| JsonError { path: ".".into(), message: e.to_string() })?;
        Ok(sys)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("Gram systems always serialize")
    }
}

/// Deserialization failure with the JSON path of the offending value.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("at `{path}`: {message}")]
pub struct JsonError {
    pub path: String,
    pub message: String,
}

fn check_layout(size: usize, layout: &Layout) -> Result<()> {
    let values: Box<dyn Iterator<Item = &f64>> = match layout {
        Layout::Dense(v) => {
            if v.len() != size * size {
                return Err(Error::InvalidSystem(format!(
                    "dense storage holds {} values, expected {}",
                    v.len(),
                    size * size
                )));
            }
            Box::new(v.iter())
        }
        Layout::Banded { bandwidth, bands } => {
            if *bandwidth >= size {
                return Err(Error::InvalidSystem(format!(
                    "bandwidth {bandwidth} must be smaller than size {size}"
                )));
            }
            if bands.len() != 2 * bandwidth + 1 {
                return Err(Error::InvalidSystem(format!(
                    "expected {} bands for bandwidth {bandwidth}, got {}",
                    2 * bandwidth + 1,
                    bands.len()
                )));
            }
            for (b, band) in bands.iter().enumerate() {
                let expected = size - b.abs_diff(*bandwidth);
                if band.len() != expected {
                    return Err(Error::InvalidSystem(format!(
                        "band {b} has {} values, expected {expected}",
                        band.len()
                    )));
                }
            }
            Box::new(bands.iter().flatten())
        }
        Layout::Toeplitz(p) => Box::new(p.iter()),
    };
    for &v in values {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::InvalidSystem(format!(
                "entries must be finite moduli (>= 0), found {v}"
            )));
        }
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GramSystemRepr {
    size: usize,
    entries: EntriesRepr,
    #[serde(default)]
    envelope: Option<DecayEnvelope>,
    #[serde(default)]
    diag_floor: Option<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    metadata: BTreeMap<String, serde_json::Value>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum EntriesRepr {
    Dense(Vec<Vec<f64>>),
    Banded { banded: BandedRepr },
    Toeplitz { toeplitz: Vec<f64> },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BandedRepr {
    bandwidth: usize,
    bands: Vec<Vec<f64>>,
}

impl Serialize for GramSystem {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let entries = match &self.layout {
            Layout::Dense(v) => {
                EntriesRepr::Dense(v.chunks(self.size).map(<[f64]>::to_vec).collect())
            }
            Layout::Banded { bandwidth, bands } => EntriesRepr::Banded {
                banded: BandedRepr { bandwidth: *bandwidth, bands: bands.clone() },
            },
            Layout::Toeplitz(p) => EntriesRepr::Toeplitz { toeplitz: p.clone() },
        };
        GramSystemRepr {
            size: self.size,
            entries,
            envelope: self.envelope,
            diag_floor: self.diag_floor,
            metadata: self.metadata.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GramSystem {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = GramSystemRepr::deserialize(deserializer)?;
        let build = || -> Result<GramSystem> {
            let size = repr.size;
            let sys = match repr.entries {
                EntriesRepr::Dense(rows) => {
                    let sys = GramSystem::dense(rows)?;
                    if sys.size != size {
                        return Err(Error::InvalidSystem(format!(
                            "size is {size} but entries hold {} rows",
                            sys.size
                        )));
                    }
                    sys
                }
                EntriesRepr::Banded { banded } => {
                    GramSystem::banded(size, banded.bandwidth, banded.bands)?
                }
                EntriesRepr::Toeplitz { toeplitz } => {
                    if toeplitz.len() != size {
                        return Err(Error::InvalidSystem(format!(
                            "size is {size} but the Toeplitz profile has {} values",
                            toeplitz.len()
                        )));
                    }
                    GramSystem::toeplitz(toeplitz)?
                }
            };
            let mut sys = match repr.envelope {
                Some(e) => sys.with_envelope(e)?,
                None => sys,
            };
            if let Some(c) = repr.diag_floor {
                sys = sys.with_diag_floor(c)?;
            }
            sys.metadata = repr.metadata;
            Ok(sys)
        };
        build().map_err(D::Error::custom)
    }
}

/// Bounds on `|f_n(τ_m)|` for 1-based indices, reaching past the truncation
/// through the envelope.
///
/// Beyond the truncation an off-diagonal entry lies in `[0, A/(1+|n−m|)^s]`.
/// A diagonal entry beyond the truncation lies in `[diag_floor, ∞)`; the
/// envelope says nothing about the diagonal.
pub fn entry_bound(g: &GramSystem, n: usize, m: usize) -> Result<Interval> {
    for index in [n, m] {
        if index == 0 {
            return Err(Error::IndexOutOfRange { index, size: g.size });
        }
    }
    if let Some(v) = g.get(n, m) {
        return Ok(Interval::point(v));
    }
    let beyond = Error::IndexBeyondTruncation { n, m, size: g.size };
    if n == m {
        return match (g.diag_floor, g.envelope) {
            (Some(c), _) => Ok(Interval::new(c, f64::INFINITY)),
            (None, Some(_)) => Ok(Interval::new(0.0, f64::INFINITY)),
            (None, None) => Err(beyond),
        };
    }
    match g.envelope {
        Some(e) => Ok(Interval::new(0.0, e.bound(n.abs_diff(m)))),
        None => Err(beyond),
    }
}

/// Smallest `A` such that every stored off-diagonal entry satisfies
/// `G[n][m] ≤ A/(1+|n−m|)^s`. A lower bound for any global envelope with
/// this exponent.
pub fn certified_min_a(g: &GramSystem, s: f64) -> Result<f64> {
    check_exponent(s)?;
    let ratio = |d: usize, v: f64| v * (1.0 + d as f64).powf(s);
    let mut best = 0.0f64;
    match &g.layout {
        Layout::Toeplitz(profile) => {
            for (d, &v) in profile.iter().enumerate().skip(1) {
                best = best.max(ratio(d, v));
            }
        }
        _ => g.for_each_offdiag(|i, j, v| best = best.max(ratio(i.abs_diff(j), v))),
    }
    // ratio and bound round differently; nudge up until the envelope holds exactly
    while !verify_envelope(g, &DecayEnvelope { amplitude: best, exponent: s }, 0.0).pass {
        best = best.next_up();
    }
    Ok(best)
}

/// One entry exceeding an envelope, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub n: usize,
    pub m: usize,
    pub value: f64,
    pub bound: f64,
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeReport {
    pub pass: bool,
    pub violations: Vec<Violation>,
}

/// Checks `G[n][m] ≤ A/(1+|n−m|)^s + tol` for all stored `n ≠ m`; the diagonal
/// is governed by the floor, not the envelope.
pub fn verify_envelope(g: &GramSystem, e: &DecayEnvelope, tol: f64) -> EnvelopeReport {
    let mut violations = Vec::new();
    let mut check = |i: usize, j: usize, v: f64| {
        let bound = e.bound(i.abs_diff(j));
        if v > bound + tol {
            violations.push(Violation { n: i + 1, m: j + 1, value: v, bound, excess: v - bound });
        }
    };
    match &g.layout {
        Layout::Toeplitz(profile) => {
            for (d, &v) in profile.iter().enumerate().skip(1) {
                if v > e.bound(d) + tol {
                    for i in 0..g.size - d {
                        check(i, i + d, v);
                        check(i + d, i, v);
                    }
                }
            }
        }
        _ => g.for_each_offdiag(&mut check),
    }
    if !matches!(g.layout, Layout::Dense(_)) {
        violations.sort_by_key(|v| (v.n, v.m));
    }
    EnvelopeReport { pass: violations.is_empty(), violations }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagBound {
    pub value: f64,
    pub scope: Scope,
}

/// The bounded-below constant `C`: the smallest stored diagonal entry, capped
/// by the asserted floor. Global only when a floor was asserted.
pub fn diag_lower_bound(g: &GramSystem) -> DiagBound {
    let observed = (0..g.size).map(|i| g.value(i, i)).fold(f64::INFINITY, f64::min);
    match g.diag_floor {
        Some(c) => DiagBound { value: observed.min(c), scope: Scope::Global },
        None => DiagBound { value: observed, scope: Scope::TruncationOnly },
    }
}

/// Exponents scanned by [`fit_envelope`]: 1.1, 1.2, …, 6.0.
pub fn fit_exponent_grid() -> impl Iterator<Item = f64> {
    (11..=60).map(|k| k as f64 / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FittedEnvelope {
    #[serde(rename = "A")]
    pub amplitude: f64,
    pub s: f64,
    /// `2A·Σ_{d≥1}(1+d)^{-s} = 2A(ζ(s) − 1)`, the envelope's row-sum bound.
    pub tail_mass: f64,
    pub scope: Scope,
}

/// Heuristic grid search over `s` minimizing the implied off-diagonal row mass.
/// The result only describes the truncation; re-verify before certifying.
pub fn fit_envelope(g: &GramSystem) -> Result<FittedEnvelope> {
    let mut best: Option<FittedEnvelope> = None;
    for s in fit_exponent_grid() {
        let amplitude = certified_min_a(g, s)?;
        let zeta = hurwitz(1.0, s, 1e-9)?;
        let tail_mass = 2.0 * amplitude * (zeta.hi - 1.0);
        if best.is_none_or(|b| tail_mass < b.tail_mass) {
            best = Some(FittedEnvelope { amplitude, s, tail_mass, scope: Scope::TruncationOnly });
        }
    }
    Ok(best.expect("exponent grid is nonempty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn power_law(a: f64, s: f64, c: f64, size: usize) -> GramSystem {
        let e = DecayEnvelope::new(a, s).unwrap();
        GramSystem::from_fn(size, |n, m| if n == m { c } else { e.bound(n.abs_diff(m)) })
            .unwrap()
            .with_envelope(e)
            .unwrap()
            .with_diag_floor(c)
            .unwrap()
    }

    fn diagonal(values: &[f64]) -> GramSystem {
        GramSystem::from_fn(values.len(), |n, m| if n == m { values[n - 1] } else { 0.0 }).unwrap()
    }

    #[test]
    fn envelope_rejects_bad_exponent() {
        assert_eq!(DecayEnvelope::new(1.0, 1.0), Err(Error::InvalidExponent(1.0)));
        assert!(DecayEnvelope::new(1.0, 0.5).is_err());
        assert!(DecayEnvelope::new(-1.0, 2.0).is_err());
        assert!(DecayEnvelope::new(1.0, f64::NAN).is_err());
    }

    #[test]
    fn entry_bound_inside_and_beyond() {
        let g = power_law(1.0, 2.0, 1.0, 10);
        assert_eq!(entry_bound(&g, 1, 2).unwrap(), Interval::point(0.25));
        assert_eq!(entry_bound(&g, 5, 5).unwrap(), Interval::point(1.0));
        let far = entry_bound(&g, 1, 100).unwrap();
        assert_eq!(far.lo, 0.0);
        // 1 + |1 − 100| = 100
        assert_eq!(far.hi, 1e-4);
        assert_eq!(entry_bound(&g, 20, 20).unwrap(), Interval::new(1.0, f64::INFINITY));
    }

    #[test]
    fn entry_bound_without_envelope() {
        let g = diagonal(&[1.0, 1.0]);
        assert_eq!(
            entry_bound(&g, 1, 3),
            Err(Error::IndexBeyondTruncation { n: 1, m: 3, size: 2 })
        );
        assert!(matches!(entry_bound(&g, 0, 1), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn min_a_examples() {
        assert_eq!(certified_min_a(&diagonal(&[1.0; 4]), 2.0).unwrap(), 0.0);
        let exact = power_law(2.0, 2.0, 1.0, 8);
        assert!((certified_min_a(&exact, 2.0).unwrap() - 2.0).abs() < 1e-14);

        let expo = GramSystem::from_fn(6, |n, m| 0.5f64.powi(n.abs_diff(m) as i32)).unwrap();
        let a = certified_min_a(&expo, 2.0).unwrap();
        assert!((a - 2.25).abs() < 1e-14, "{a}");
        assert_eq!(certified_min_a(&expo, 1.0), Err(Error::InvalidExponent(1.0)));
    }

    #[test]
    fn envelope_verdicts() {
        let g = power_law(2.0, 2.0, 1.0, 6);
        assert!(verify_envelope(&g, &DecayEnvelope::new(2.0, 2.0).unwrap(), 1e-12).pass);

        let report = verify_envelope(&g, &DecayEnvelope::new(1.0, 2.0).unwrap(), 1e-12);
        assert!(!report.pass);
        let first = report.violations[0];
        assert_eq!((first.n, first.m), (1, 2));
        assert_eq!(first.value, 0.5);
        assert_eq!(first.bound, 0.25);
        // every off-diagonal pair is violated
        assert_eq!(report.violations.len(), 30);

        assert!(verify_envelope(&diagonal(&[3.0; 5]), &DecayEnvelope::new(0.1, 1.5).unwrap(), 0.0).pass);
    }

    #[test]
    fn toeplitz_violations_match_dense() {
        let g = power_law(2.0, 2.0, 1.0, 5);
        let t = g.to_layout(LayoutKind::Toeplitz).unwrap();
        let e = DecayEnvelope::new(1.0, 2.5).unwrap();
        assert_eq!(verify_envelope(&g, &e, 0.0), verify_envelope(&t, &e, 0.0));
    }

    #[test]
    fn diag_bound_scopes() {
        assert_eq!(diag_lower_bound(&diagonal(&[1.0; 5])).value, 1.0);
        let g = diagonal(&[2.0, 3.0, 1.5, 2.0]);
        assert_eq!(diag_lower_bound(&g), DiagBound { value: 1.5, scope: Scope::TruncationOnly });
        let g = g.with_diag_floor(1.2).unwrap();
        assert_eq!(diag_lower_bound(&g), DiagBound { value: 1.2, scope: Scope::Global });
    }

    #[test]
    fn construction_validates() {
        assert!(GramSystem::dense(vec![vec![1.0, -0.1], vec![0.0, 1.0]]).is_err());
        assert!(GramSystem::dense(vec![vec![1.0], vec![0.0, 1.0]]).is_err());
        assert!(GramSystem::dense(vec![]).is_err());
        assert!(GramSystem::banded(3, 1, vec![vec![0.0; 2], vec![1.0; 3]]).is_err());
        assert!(GramSystem::banded(3, 3, vec![]).is_err());
        assert!(diagonal(&[1.0, 0.5]).with_diag_floor(0.9).is_err());
        let over = GramSystem::dense(vec![vec![1.0, 0.6], vec![0.6, 1.0]]).unwrap();
        assert!(over.with_envelope(DecayEnvelope::new(2.0, 2.0).unwrap()).is_err());
    }

    #[test]
    fn banded_layout_access() {
        // tridiagonal 4x4 with super = 0.1, sub = 0.2, diag = 1
        let g = GramSystem::banded(4, 1, vec![vec![0.2; 3], vec![1.0; 4], vec![0.1; 3]]).unwrap();
        assert_eq!(g.get(1, 2), Some(0.1));
        assert_eq!(g.get(2, 1), Some(0.2));
        assert_eq!(g.get(1, 3), Some(0.0));
        assert_eq!(g.get(4, 4), Some(1.0));
        assert!(!g.is_symmetric());
        assert!((certified_min_a(&g, 2.0).unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn json_layouts_round_trip() {
        let g = power_law(1.0, 2.0, 1.0, 4).with_metadata("generator", "power-law".into());
        for kind in [LayoutKind::Dense, LayoutKind::Banded, LayoutKind::Toeplitz] {
            let h = g.to_layout(kind).unwrap();
            let text = h.to_json_string();
            let back = GramSystem::from_json_str(&text).unwrap();
            assert_eq!(back, h);
            assert_eq!(back.to_json_string(), text);
        }
    }

    #[test]
    fn json_schema_shape() {
        let text = r#"{"size": 2, "entries": [[1, 0.5], [0.5, 1]], "envelope": {"A": 2, "s": 2}, "diag_floor": null}"#;
        let g = GramSystem::from_json_str(text).unwrap();
        assert_eq!(g.envelope().unwrap().amplitude(), 2.0);
        let banded = r#"{"size": 3, "entries": {"banded": {"bandwidth": 0, "bands": [[1, 2, 3]]}}, "envelope": null, "diag_floor": 1}"#;
        let g = GramSystem::from_json_str(banded).unwrap();
        assert_eq!(g.get(3, 3), Some(3.0));
        assert_eq!(g.get(1, 3), Some(0.0));
    }

    #[test]
    fn json_errors_name_a_path() {
        let err = GramSystem::from_json_str(r#"{"size": 2, "entries": [[1, 0], [0, 1]], "envelope": {"A": 1, "s": "x"}}"#)
            .unwrap_err();
        assert!(err.path.contains("envelope"), "{err}");
        assert!(GramSystem::from_json_str(r#"{"size": 3, "entries": [[1]]}"#).is_err());
        assert!(GramSystem::from_json_str(r#"{"size": 1, "entries": [[1]], "extra": 0}"#).is_err());
    }

    #[test]
    fn fit_prefers_true_exponent_family() {
        let g = power_law(1.0, 3.0, 1.0, 30);
        let fit = fit_envelope(&g).unwrap();
        // the re-verified fit must hold on the truncation
        let e = DecayEnvelope::new(fit.amplitude, fit.s).unwrap();
        assert!(verify_envelope(&g, &e, 0.0).pass);
        assert_eq!(fit.scope, Scope::TruncationOnly);
    }

    fn arb_system() -> impl Strategy<Value = GramSystem> {
        (1usize..8).prop_flat_map(|n| {
            prop::collection::vec(0.0f64..2.0, n * n).prop_map(move |v| {
                GramSystem::from_layout(n, Layout::Dense(v)).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn min_a_monotone_in_exponent(g in arb_system(), s in 1.01f64..5.0, ds in 0.0f64..2.0) {
            prop_assume!(g.size() >= 2);
            let lo = certified_min_a(&g, s).unwrap();
            let hi = certified_min_a(&g, s + ds).unwrap();
            prop_assert!(hi >= lo);
        }

        #[test]
        fn min_a_envelope_always_passes(g in arb_system(), s in 1.01f64..6.0) {
            let a = certified_min_a(&g, s).unwrap();
            let e = DecayEnvelope::new(a, s).unwrap();
            prop_assert!(verify_envelope(&g, &e, 0.0).pass);
        }

        #[test]
        fn diag_bound_below_every_diagonal(g in arb_system()) {
            let c = diag_lower_bound(&g).value;
            for n in 1..=g.size() {
                prop_assert!(c <= g.get(n, n).unwrap());
            }
        }

        #[test]
        fn layouts_agree(g in arb_system()) {
            let b = g.to_layout(LayoutKind::Banded).unwrap();
            for n in 1..=g.size() {
                for m in 1..=g.size() {
                    prop_assert_eq!(b.get(n, m), g.get(n, m));
                }
            }
            let back = GramSystem::from_json_str(&b.to_json_string()).unwrap();
            prop_assert_eq!(back, b);
        }
    }
}
