//! Residue-class pavings and their approximate-Riesz certificates.
//!
//! For a system with off-diagonal envelope `(A, s)` and diagonal floor `C`,
//! splitting ℕ into the residue classes modulo `M` with `A·C_s/M^s ≤ C/2`
//! leaves every class with margin
//! `|f_n(τ_n)| − Σ_{m∈Q, m≠n} |f_n(τ_m)| ≥ C/2`.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{c_s, c_s_tolerance};
use crate::error::{check_exponent, Error, Result};
use crate::gram::{
    certified_min_a, diag_lower_bound, entry_bound, fit_envelope, DecayEnvelope, GramSystem, Scope,
};
use crate::numeric::{progression_sum, ExactSum};

/// Index set a paving covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RangeRepr", into = "RangeRepr")]
pub enum IndexRange {
    /// All of ℕ = {1, 2, 3, …}.
    Naturals,
    /// `{1, …, T}`.
    Prefix(usize),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RangeRepr {
    Size(usize),
    Name(String),
}

impl TryFrom<RangeRepr> for IndexRange {
    type Error = String;
    fn try_from(r: RangeRepr) -> std::result::Result<Self, String> {
        match r {
            RangeRepr::Size(0) => Err("range size must be at least 1".into()),
            RangeRepr::Size(t) => Ok(IndexRange::Prefix(t)),
            RangeRepr::Name(s) if s == "N" => Ok(IndexRange::Naturals),
            RangeRepr::Name(s) => Err(format!("unknown range {s:?}, expected \"N\" or a size")),
        }
    }
}

impl From<IndexRange> for RangeRepr {
    fn from(r: IndexRange) -> Self {
        match r {
            IndexRange::Naturals => RangeRepr::Name("N".into()),
            IndexRange::Prefix(t) => RangeRepr::Size(t),
        }
    }
}

impl fmt::Display for IndexRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexRange::Naturals => f.write_str("N"),
            IndexRange::Prefix(t) => write!(f, "1..={t}"),
        }
    }
}

/// One class of a paving: an explicit sorted index list or the infinite
/// progression `{first + k·step : k ≥ 0}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Class {
    Explicit(Vec<usize>),
    Residue { first: usize, step: usize },
}

impl Class {
    fn smallest_gap(&self) -> Option<usize> {
        match self {
            Class::Explicit(v) => v.windows(2).map(|w| w[1] - w[0]).min(),
            Class::Residue { step, .. } => Some(*step),
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Class::Explicit(v) if v.len() <= 8 => write!(f, "{v:?}"),
            Class::Explicit(v) => write!(f, "[{}, {}, …, {}] ({} indices)", v[0], v[1], v[v.len() - 1], v.len()),
            Class::Residue { first, step } => write!(f, "{{{first} + {step}k : k ≥ 0}}"),
        }
    }
}

/// A partition of an index range into finitely many classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PavingRepr")]
pub struct Paving {
    modulus: Option<usize>,
    range: IndexRange,
    classes: Vec<Class>,
}

#[derive(Deserialize)]
struct PavingRepr {
    #[serde(default)]
    modulus: Option<usize>,
    range: IndexRange,
    classes: Vec<Class>,
}

impl TryFrom<PavingRepr> for Paving {
    type Error = Error;
    fn try_from(r: PavingRepr) -> Result<Self> {
        Paving::new(r.range, r.classes, r.modulus)
    }
}

impl Paving {
    /// Validates that `classes` partition `range` exactly and, when `modulus`
    /// is given, that they are its residue classes.
    pub fn new(range: IndexRange, classes: Vec<Class>, modulus: Option<usize>) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::InvalidPaving("a paving needs at least one class".into()));
        }
        match range {
            IndexRange::Prefix(size) => check_finite_partition(size, &classes)?,
            IndexRange::Naturals => check_residue_partition(&classes)?,
        }
        if let Some(m) = modulus {
            let expected = residue_classes(m, range)?;
            if expected != classes {
                return Err(Error::InvalidPaving(format!(
                    "classes are not the residue classes modulo {m}"
                )));
            }
        }
        Ok(Self { modulus, range, classes })
    }

    pub fn modulus(&self) -> Option<usize> {
        self.modulus
    }

    pub fn range(&self) -> IndexRange {
        self.range
    }

    pub fn classes(&self) -> &[Class] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Smallest distance between two members of the same class, `None` when
    /// every class is a singleton.
    pub fn min_separation(&self) -> Option<usize> {
        self.classes.iter().filter_map(Class::smallest_gap).min()
    }
}

fn check_finite_partition(size: usize, classes: &[Class]) -> Result<()> {
    let mut owner = vec![false; size + 1];
    for class in classes {
        let Class::Explicit(members) = class else {
            return Err(Error::InvalidPaving(format!(
                "residue descriptor {class} in a paving of the finite range 1..={size}"
            )));
        };
        if members.is_empty() {
            return Err(Error::InvalidPaving("empty class".into()));
        }
        if members.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPaving(format!("class {class} is not strictly increasing")));
        }
        for &n in members {
            if n == 0 || n > size {
                return Err(Error::IndexOutOfRange { index: n, size });
            }
            if std::mem::replace(&mut owner[n], true) {
                return Err(Error::Overlap { index: n });
            }
        }
    }
    match (1..=size).find(|&n| !owner[n]) {
        Some(index) => Err(Error::CoverageGap { index }),
        None => Ok(()),
    }
}

fn check_residue_partition(classes: &[Class]) -> Result<()> {
    let modulus = classes.len();
    let mut seen = vec![false; modulus + 1];
    for class in classes {
        match class {
            Class::Residue { first, step } if *step == modulus && (1..=modulus).contains(first) => {
                if std::mem::replace(&mut seen[*first], true) {
                    return Err(Error::Overlap { index: *first });
                }
            }
            _ => {
                return Err(Error::InvalidPaving(format!(
                    "a paving of N needs residue classes {{j + {modulus}k}} with 1 <= j <= {modulus}, found {class}"
                )))
            }
        }
    }
    Ok(())
}

fn residue_classes(modulus: usize, range: IndexRange) -> Result<Vec<Class>> {
    if modulus == 0 {
        return Err(Error::InvalidParameter { name: "modulus", reason: "must be at least 1".into() });
    }
    Ok(match range {
        IndexRange::Naturals => {
            (1..=modulus).map(|first| Class::Residue { first, step: modulus }).collect()
        }
        // classes j > T would be empty and are left out
        IndexRange::Prefix(size) => (1..=modulus.min(size))
            .map(|first| Class::Explicit((first..=size).step_by(modulus).collect()))
            .collect(),
    })
}

/// Residue classes modulo `modulus` over `range`.
pub fn residue_partition(modulus: usize, range: IndexRange) -> Result<Paving> {
    let classes = residue_classes(modulus, range)?;
    Ok(Paving { modulus: Some(modulus), range, classes })
}

fn modulus_ok(amplitude: f64, cs: f64, s: f64, c: f64, m: usize) -> bool {
    amplitude * cs / (m as f64).powf(s) <= c / 2.0
}

/// Smallest `M ≥ 1` with `A·C_s/M^s ≤ C/2`.
pub fn choose_modulus(amplitude: f64, s: f64, c: f64) -> Result<usize> {
    check_exponent(s)?;
    if !(amplitude.is_finite() && amplitude >= 0.0) {
        return Err(Error::InvalidParameter { name: "A", reason: format!("must be nonnegative, got {amplitude}") });
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidParameter { name: "C", reason: format!("must be positive, got {c}") });
    }
    if amplitude == 0.0 {
        return Ok(1);
    }
    let cs = c_s(s)?;
    let radicand = (2.0 * amplitude * cs / c).next_up();
    let root = radicand.powf(1.0 / s).ceil();
    if !root.is_finite() || root >= 2f64.powi(52) {
        return Err(Error::InvalidParameter {
            name: "C",
            reason: format!("required modulus {root:e} is not representable"),
        });
    }
    let mut m = (root as usize).max(1);
    while !modulus_ok(amplitude, cs, s, c, m) {
        m += 1;
    }
    while m > 1 && modulus_ok(amplitude, cs, s, c, m - 1) {
        m -= 1;
    }
    Ok(m)
}

/// The cruder uniform bound `C − A·C_s/M^s`.
pub fn uniform_margin_bound(amplitude: f64, s: f64, c: f64, modulus: usize) -> Result<f64> {
    Ok(c - amplitude * c_s(s)? / (modulus as f64).powf(s))
}

/// Certified lower bound on `inf_{n∈Q} (G[n][n] − Σ_{m∈Q, m≠n} G[n][m])`.
///
/// Explicit classes use stored entries inside the truncation and envelope
/// bounds beyond it. A residue class over ℕ gets the bound
/// `C − 2A·Σ_{k≥1}(1+kM)^{-s}`, uniform in `n`; it needs a global envelope
/// and diagonal floor.
pub fn class_margin_lower_bound(g: &GramSystem, class: &Class) -> Result<f64> {
    match class {
        Class::Residue { step, .. } => {
            let envelope = g.envelope().ok_or(Error::MissingEnvelope)?;
            g.diag_floor().ok_or(Error::MissingDiagFloor)?;
            let c = diag_lower_bound(g).value;
            if envelope.amplitude() == 0.0 {
                return Ok(c);
            }
            let s = envelope.exponent();
            let tail = progression_sum(*step as f64, s, 1, c_s_tolerance(s))?;
            Ok(c - 2.0 * envelope.amplitude() * tail.hi)
        }
        Class::Explicit(members) => {
            if members.is_empty() {
                return Err(Error::InvalidPaving("empty class".into()));
            }
            members
                .par_iter()
                .map(|&n| explicit_row_margin(g, members, n))
                .try_reduce(|| f64::INFINITY, |a, b| Ok(a.min(b)))
        }
    }
}

fn explicit_row_margin(g: &GramSystem, members: &[usize], n: usize) -> Result<f64> {
    let size = g.size();
    let mut acc = ExactSum::new();
    acc.add(entry_bound(g, n, n)?.lo);
    for &m in members {
        if m == n {
            continue;
        }
        let upper = if n <= size && m <= size {
            g.value(n - 1, m - 1)
        } else {
            entry_bound(g, n, m)?.hi
        };
        acc.add(-upper);
    }
    Ok(acc.value())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        })
    }
}

/// The inputs of the modulus rule, recorded for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryBound {
    #[serde(rename = "A")]
    pub amplitude: f64,
    pub s: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub c_s: f64,
    /// `C − A·C_s/M^s`
    pub guaranteed_margin: f64,
    pub envelope_scope: Scope,
}

/// Per-class margins of a paving with the verdict at threshold `epsilon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArsCertificate {
    #[serde(flatten)]
    pub paving: Paving,
    pub margins: Vec<f64>,
    pub epsilon: f64,
    pub scope: Scope,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theory: Option<TheoryBound>,
}

impl ArsCertificate {
    pub fn min_margin(&self) -> f64 {
        self.margins.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Certifies every class of `paving`. A class passes when its margin is at
/// least `epsilon` and strictly positive, so `epsilon = 0` asks for plain
/// positivity.
pub fn certify(g: &GramSystem, paving: &Paving, epsilon: f64) -> Result<ArsCertificate> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::InvalidParameter { name: "epsilon", reason: format!("must be nonnegative, got {epsilon}") });
    }
    let scope = match paving.range {
        IndexRange::Naturals => Scope::Global,
        IndexRange::Prefix(t) if t == g.size() => Scope::TruncationOnly,
        IndexRange::Prefix(t) => {
            return Err(Error::InvalidPaving(format!(
                "paving covers 1..={t} but the system has size {}",
                g.size()
            )))
        }
    };
    let margins = paving
        .classes
        .par_iter()
        .map(|class| class_margin_lower_bound(g, class))
        .collect::<Result<Vec<f64>>>()?;
    let pass = margins.iter().all(|&mu| mu >= epsilon && mu > 0.0);
    Ok(ArsCertificate {
        paving: paving.clone(),
        margins,
        epsilon,
        scope,
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
        theory: None,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PaveOptions {
    /// Defaults to `C/2`.
    pub epsilon: Option<f64>,
    /// Overrides the modulus rule.
    pub modulus: Option<usize>,
}

/// Full pipeline: constants, modulus, residue paving and certificate.
///
/// With a global envelope and diagonal floor the paving covers ℕ. Otherwise
/// the envelope is fitted on the truncation (or the stored one is used), `C`
/// is the observed diagonal minimum and the certificate is truncation-only.
pub fn pave(g: &GramSystem, options: PaveOptions) -> Result<ArsCertificate> {
    let diag = diag_lower_bound(g);
    let (envelope, range, envelope_scope) = match (g.envelope(), diag.scope) {
        (Some(e), Scope::Global) => (*e, IndexRange::Naturals, Scope::Global),
        (Some(e), Scope::TruncationOnly) => (*e, IndexRange::Prefix(g.size()), Scope::Global),
        (None, _) => {
            let fit = fit_envelope(g)?;
            let s = fit.s;
            let e = DecayEnvelope::new(certified_min_a(g, s)?, s)?;
            (e, IndexRange::Prefix(g.size()), Scope::TruncationOnly)
        }
    };
    let c = diag.value;
    let modulus = match options.modulus {
        Some(m) => m,
        None => choose_modulus(envelope.amplitude(), envelope.exponent(), c)?,
    };
    let paving = residue_partition(modulus, range)?;
    let epsilon = options.epsilon.unwrap_or(c / 2.0);
    let mut cert = certify(g, &paving, epsilon)?;
    let cs = c_s(envelope.exponent())?;
    cert.theory = Some(TheoryBound {
        amplitude: envelope.amplitude(),
        s: envelope.exponent(),
        c,
        c_s: cs,
        guaranteed_margin: c - envelope.amplitude() * cs / (modulus as f64).powf(envelope.exponent()),
        envelope_scope,
    });
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gram::DecayEnvelope;
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

    fn constant_offdiag(size: usize, diag: f64, off: f64) -> GramSystem {
        GramSystem::from_fn(size, |n, m| if n == m { diag } else { off }).unwrap()
    }

    #[test]
    fn modulus_examples() {
        assert_eq!(choose_modulus(1.0, 2.0, 1.0).unwrap(), 3);
        assert_eq!(choose_modulus(1.0, 2.0, 4.0).unwrap(), 2);
        assert_eq!(choose_modulus(0.0, 2.0, 1.0).unwrap(), 1);
        assert_eq!(choose_modulus(0.0, 7.0, 1e-9).unwrap(), 1);
        assert!(choose_modulus(1.0, 1.0, 1.0).is_err());
        assert!(choose_modulus(1.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn modulus_accepts_ties() {
        // pick C so that A·C_s/M^s = C/2 exactly at M = 4, s = 2
        let cs = c_s(2.0).unwrap();
        let c = 2.0 * cs / 16.0;
        assert_eq!(choose_modulus(1.0, 2.0, c).unwrap(), 4);
    }

    #[test]
    fn residue_examples() {
        let p = residue_partition(3, IndexRange::Prefix(10)).unwrap();
        assert_eq!(
            p.classes(),
            &[
                Class::Explicit(vec![1, 4, 7, 10]),
                Class::Explicit(vec![2, 5, 8]),
                Class::Explicit(vec![3, 6, 9])
            ]
        );
        assert_eq!(p.min_separation(), Some(3));
        let one = residue_partition(1, IndexRange::Prefix(5)).unwrap();
        assert_eq!(one.classes(), &[Class::Explicit(vec![1, 2, 3, 4, 5])]);
        let nat = residue_partition(4, IndexRange::Naturals).unwrap();
        assert_eq!(nat.len(), 4);
        assert_eq!(nat.classes()[1], Class::Residue { first: 2, step: 4 });
        assert!(residue_partition(0, IndexRange::Naturals).is_err());
    }

    #[test]
    fn paving_validation() {
        let gap = Paving::new(
            IndexRange::Prefix(10),
            vec![Class::Explicit(vec![1, 2, 3, 4, 5, 6]), Class::Explicit(vec![8, 9, 10])],
            None,
        );
        assert_eq!(gap, Err(Error::CoverageGap { index: 7 }));
        let overlap = Paving::new(
            IndexRange::Prefix(3),
            vec![Class::Explicit(vec![1, 2]), Class::Explicit(vec![2, 3])],
            None,
        );
        assert_eq!(overlap, Err(Error::Overlap { index: 2 }));
        let outside = Paving::new(IndexRange::Prefix(2), vec![Class::Explicit(vec![1, 2, 3])], None);
        assert!(matches!(outside, Err(Error::IndexOutOfRange { index: 3, .. })));
        let wrong_mod = Paving::new(
            IndexRange::Prefix(4),
            vec![Class::Explicit(vec![1, 2]), Class::Explicit(vec![3, 4])],
            Some(2),
        );
        assert!(wrong_mod.is_err());
        let bad_residue = Paving::new(
            IndexRange::Naturals,
            vec![Class::Residue { first: 1, step: 2 }, Class::Residue { first: 1, step: 2 }],
            None,
        );
        assert!(bad_residue.is_err());
    }

    #[test]
    fn paving_json_shapes() {
        let p = residue_partition(2, IndexRange::Naturals).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(text, r#"{"modulus":2,"range":"N","classes":[{"first":1,"step":2},{"first":2,"step":2}]}"#);
        let back: Paving = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
        let gap: std::result::Result<Paving, _> =
            serde_json::from_str(r#"{"range": 3, "classes": [[1], [3]]}"#);
        assert!(gap.unwrap_err().to_string().contains("index 2"));
    }

    #[test]
    fn margin_examples() {
        let g = constant_offdiag(6, 2.0, 0.0);
        let m = class_margin_lower_bound(&g, &Class::Explicit(vec![1, 3, 5])).unwrap();
        assert_eq!(m, 2.0);

        let g = power_law(1.0, 2.0, 1.0, 50);
        let sharp = class_margin_lower_bound(&g, &Class::Residue { first: 1, step: 3 }).unwrap();
        // oracle: plain summation to 10^6 terms plus integral tail
        let sum: f64 = (1..=1_000_000).rev().map(|k| (1.0 + 3.0 * k as f64).powi(-2)).sum::<f64>()
            + 1.0 / (3.0 * (1.0 + 3.0e6));
        assert!((sharp - (1.0 - 2.0 * sum)).abs() < 1e-9, "{sharp}");
        assert!((sharp - 0.7565).abs() < 1e-3);
        let crude = uniform_margin_bound(1.0, 2.0, 1.0, 3).unwrap();
        assert!((crude - 0.6345).abs() < 1e-3);
        assert!(crude <= sharp);
    }

    #[test]
    fn residue_margin_needs_tail_model() {
        let g = constant_offdiag(4, 1.0, 0.0);
        let class = Class::Residue { first: 1, step: 2 };
        assert_eq!(class_margin_lower_bound(&g, &class), Err(Error::MissingEnvelope));
        let g = g.with_envelope(DecayEnvelope::new(1.0, 2.0).unwrap()).unwrap();
        assert_eq!(class_margin_lower_bound(&g, &class), Err(Error::MissingDiagFloor));
    }

    #[test]
    fn explicit_class_beyond_truncation_uses_envelope() {
        let g = power_law(1.0, 2.0, 1.0, 5);
        // member 8 lies beyond T = 5: diagonal floor 1, envelope for its neighbors
        let m = class_margin_lower_bound(&g, &Class::Explicit(vec![2, 5, 8])).unwrap();
        // worst row is n = 5 with neighbors at distance 3 on both sides
        assert!((m - (1.0 - 2.0 / 16.0)).abs() < 1e-15, "{m}");
        let bare = constant_offdiag(5, 1.0, 0.0);
        assert!(matches!(
            class_margin_lower_bound(&bare, &Class::Explicit(vec![1, 6])),
            Err(Error::IndexBeyondTruncation { .. })
        ));
    }

    #[test]
    fn certify_examples() {
        let g = power_law(1.0, 2.0, 1.0, 50);
        let m = choose_modulus(1.0, 2.0, 1.0).unwrap();
        let p = residue_partition(m, IndexRange::Naturals).unwrap();
        let cert = certify(&g, &p, 0.5).unwrap();
        assert_eq!(cert.verdict, Verdict::Pass);
        assert_eq!(cert.scope, Scope::Global);
        assert!(cert.margins.iter().all(|&mu| mu >= 0.5));

        let id = constant_offdiag(6, 1.0, 0.0);
        let one = residue_partition(1, IndexRange::Prefix(6)).unwrap();
        let cert = certify(&id, &one, 0.9).unwrap();
        assert_eq!((cert.verdict, cert.margins[0], cert.scope), (Verdict::Pass, 1.0, Scope::TruncationOnly));

        let pair = residue_partition(1, IndexRange::Prefix(2)).unwrap();
        let cert = certify(&constant_offdiag(2, 1.0, 0.9), &pair, 0.0).unwrap();
        assert_eq!(cert.verdict, Verdict::Pass);
        assert!((cert.margins[0] - 0.1).abs() < 1e-15);
        let tight = constant_offdiag(2, 1.0, 1.0);
        assert_eq!(certify(&tight, &pair, 0.0).unwrap().verdict, Verdict::Fail);
        assert_eq!(certify(&tight, &pair, 1e-12).unwrap().verdict, Verdict::Fail);
    }

    #[test]
    fn certify_rejects_mismatched_range() {
        let g = constant_offdiag(4, 1.0, 0.0);
        let p = residue_partition(2, IndexRange::Prefix(5)).unwrap();
        assert!(matches!(certify(&g, &p, 0.1), Err(Error::InvalidPaving(_))));
        let nat = residue_partition(2, IndexRange::Naturals).unwrap();
        assert_eq!(certify(&g, &nat, 0.1), Err(Error::MissingEnvelope));
        assert!(certify(&g, &residue_partition(2, IndexRange::Prefix(4)).unwrap(), -1.0).is_err());
    }

    #[test]
    fn pave_truncation_path_without_envelope() {
        let g = GramSystem::from_fn(20, |n, m| if n == m { 1.0 } else { 0.5f64.powi(n.abs_diff(m) as i32 + 1) })
            .unwrap();
        let cert = pave(&g, PaveOptions::default()).unwrap();
        assert_eq!(cert.scope, Scope::TruncationOnly);
        assert_eq!(cert.paving.range(), IndexRange::Prefix(20));
        assert_eq!(cert.verdict, Verdict::Pass);
        let theory = cert.theory.unwrap();
        assert_eq!(theory.envelope_scope, Scope::TruncationOnly);
        assert!(cert.min_margin() >= theory.guaranteed_margin - 1e-12);
    }

    proptest! {
        #[test]
        fn modulus_is_minimal(a in 0.01f64..5.0, s in 1.2f64..4.0, c in 0.05f64..5.0) {
            let m = choose_modulus(a, s, c).unwrap();
            let cs = c_s(s).unwrap();
            prop_assert!(a * cs / (m as f64).powf(s) <= c / 2.0);
            if m >= 2 {
                prop_assert!(a * cs / ((m - 1) as f64).powf(s) > c / 2.0);
            }
        }

        #[test]
        fn residue_partition_is_exact(m in 1usize..12, t in 1usize..60) {
            let p = residue_partition(m, IndexRange::Prefix(t)).unwrap();
            let mut all: Vec<usize> = p.classes().iter().flat_map(|c| match c {
                Class::Explicit(v) => v.clone(),
                Class::Residue { .. } => unreachable!(),
            }).collect();
            all.sort_unstable();
            prop_assert_eq!(all, (1..=t).collect::<Vec<_>>());
            if t > m {
                prop_assert_eq!(p.min_separation(), Some(m));
            }
        }

        #[test]
        fn truncation_margins_shrink_toward_global_bound(
            a in 0.2f64..2.0, s in 1.5f64..3.0, t1 in 5usize..30, extra in 1usize..30
        ) {
            let c = 1.0;
            let m = choose_modulus(a, s, c).unwrap();
            let small = power_law(a, s, c, t1);
            let large = power_law(a, s, c, t1 + extra);
            let global = class_margin_lower_bound(&large, &Class::Residue { first: 1, step: m }).unwrap();
            let class = |t: usize| Class::Explicit((1..=t).step_by(m).collect());
            let mu_small = class_margin_lower_bound(&small, &class(t1)).unwrap();
            let mu_large = class_margin_lower_bound(&large, &class(t1 + extra)).unwrap();
            prop_assert!(mu_large <= mu_small);
            prop_assert!(mu_large >= global);
        }
    }
}
