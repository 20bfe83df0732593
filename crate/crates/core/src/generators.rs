//! Test systems with known ground truth.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::{DecayEnvelope, GramSystem};
use crate::numeric::exact_sum;

/// Exact-envelope system: diagonal `C`, off-diagonal `A/(1+|n−m|)^s`, with the
/// envelope and the diagonal floor asserted globally. Stored as a Toeplitz
/// profile so large truncations stay cheap.
///
/// `sign_seed` is recorded in the metadata; the phases it generates (see
/// [`power_law_sign`]) never affect the stored moduli.
pub fn power_law_gram(amplitude: f64, s: f64, c: f64, size: usize, sign_seed: Option<u64>) -> Result<GramSystem> {
    let envelope = DecayEnvelope::new(amplitude, s)?;
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidParameter { name: "C", reason: format!("must be positive, got {c}") });
    }
    if size == 0 {
        return Err(Error::InvalidParameter { name: "size", reason: "must be at least 1".into() });
    }
    let profile = (0..size).map(|d| if d == 0 { c } else { envelope.bound(d) }).collect();
    let mut g = GramSystem::toeplitz(profile)?
        .with_envelope(envelope)?
        .with_diag_floor(c)?
        .with_metadata("generator", "power-law".into());
    if let Some(seed) = sign_seed {
        g = g.with_metadata("sign_seed", seed.into());
    }
    Ok(g)
}

/// Reproducible symmetric sign `±1` of entry `(n, m)` for a given seed.
pub fn power_law_sign(seed: u64, n: usize, m: usize) -> f64 {
    let (lo, hi) = (n.min(m) as u64, n.max(m) as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((lo << 32) ^ hi);
    if rng.gen::<bool>() {
        1.0
    } else {
        -1.0
    }
}

/// Gram matrix of the `P` cyclic translates of a finitely supported window:
/// `G[n][m] = Σ_k w(k−n)·w(k−m)` with indices mod `P`. Circulant, so it is
/// stored as a symmetric Toeplitz profile. No envelope is attached.
pub fn translate_frame_gram(window: &[f64], period: usize) -> Result<GramSystem> {
    if period == 0 {
        return Err(Error::InvalidParameter { name: "period", reason: "must be at least 1".into() });
    }
    if window.len() > period {
        return Err(Error::WindowTooLong { len: window.len(), period });
    }
    if window.iter().any(|w| !w.is_finite()) {
        return Err(Error::InvalidParameter { name: "window", reason: "values must be finite".into() });
    }
    let w = |k: usize| window.get(k).copied().unwrap_or(0.0);
    // correctly rounded, so offsets d and period − d (same products) agree bitwise
    let profile = (0..period)
        .map(|d| exact_sum((0..period).map(|k| w(k) * w((k + d) % period))).abs())
        .collect();
    Ok(GramSystem::toeplitz(profile)?.with_metadata("generator", "translates".into()))
}

/// Symmetric random system: diagonal `diag`, off-diagonal moduli i.i.d.
/// uniform on `[0, max_off]`.
pub fn random_symmetric_gram(size: usize, diag: f64, max_off: f64, seed: u64) -> Result<GramSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = vec![vec![0.0; size]; size];
    for i in 0..size {
        rows[i][i] = diag;
        for j in i + 1..size {
            let v = rng.gen_range(0.0..=max_off);
            rows[i][j] = v;
            rows[j][i] = v;
        }
    }
    GramSystem::dense(rows)
}

/// Finite frame-like system in `ℝ^d`: vectors `τ_n` and functionals `f_n`
/// acting by the dot product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FrameRepr")]
pub struct FrameSystem {
    dim: usize,
    vectors: Vec<Vec<f64>>,
    functionals: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameRepr {
    dim: usize,
    vectors: Vec<Vec<f64>>,
    #[serde(default)]
    functionals: Option<Vec<Vec<f64>>>,
}

impl TryFrom<FrameRepr> for FrameSystem {
    type Error = Error;
    fn try_from(r: FrameRepr) -> Result<Self> {
        FrameSystem::new(r.dim, r.vectors, r.functionals)
    }
}

impl FrameSystem {
    /// Functionals default to the vectors themselves (`f_n = ⟨·, τ_n⟩`).
    pub fn new(dim: usize, vectors: Vec<Vec<f64>>, functionals: Option<Vec<Vec<f64>>>) -> Result<Self> {
        if dim == 0 || vectors.is_empty() {
            return Err(Error::InvalidParameter {
                name: "vectors",
                reason: "need at least one vector in dimension >= 1".into(),
            });
        }
        let functionals = functionals.unwrap_or_else(|| vectors.clone());
        if functionals.len() != vectors.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} vectors but {} functionals",
                vectors.len(),
                functionals.len()
            )));
        }
        for (kind, list) in [("vector", &vectors), ("functional", &functionals)] {
            for (i, v) in list.iter().enumerate() {
                if v.len() != dim {
                    return Err(Error::DimensionMismatch(format!(
                        "{kind} {} has length {}, expected {dim}",
                        i + 1,
                        v.len()
                    )));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidParameter { name: "vectors", reason: "values must be finite".into() });
                }
            }
        }
        Ok(Self { dim, vectors, functionals })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Cross-Gram moduli `|f_n(τ_m)|`.
    pub fn gram(&self) -> Result<GramSystem> {
        GramSystem::from_fn(self.len(), |n, m| {
            dot(&self.functionals[n - 1], &self.vectors[m - 1]).abs()
        })
    }

    /// `S = Σ_n τ_n f_nᵀ`, so that `Sx = Σ_n f_n(x) τ_n`.
    pub fn frame_operator(&self) -> DMatrix<f64> {
        let mut s = DMatrix::zeros(self.dim, self.dim);
        for (tau, f) in self.vectors.iter().zip(&self.functionals) {
            for i in 0..self.dim {
                for j in 0..self.dim {
                    s[(i, j)] += tau[i] * f[j];
                }
            }
        }
        s
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub const INVERTIBILITY_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub dim: usize,
    pub count: usize,
    /// Descending.
    pub singular_values: Vec<f64>,
    /// Ascending; only when every functional equals its vector, making `S`
    /// symmetric positive semidefinite.
    pub eigenvalues: Option<Vec<f64>>,
    pub min_singular_value: f64,
    pub max_singular_value: f64,
    pub invertible: bool,
}

/// Spectrum of the finite-dimensional frame operator; invertible iff the
/// smallest singular value exceeds [`INVERTIBILITY_THRESHOLD`].
pub fn frame_operator_check(fs: &FrameSystem) -> SpectrumReport {
    let s = fs.frame_operator();
    let mut singular_values: Vec<f64> = s.clone().svd(false, false).singular_values.iter().copied().collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    let eigenvalues = (fs.vectors == fs.functionals).then(|| {
        let mut ev: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    });
    let min_singular_value = *singular_values.last().expect("dim >= 1");
    SpectrumReport {
        dim: fs.dim,
        count: fs.len(),
        max_singular_value: singular_values[0],
        min_singular_value,
        invertible: min_singular_value > INVERTIBILITY_THRESHOLD,
        singular_values,
        eigenvalues,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gram::{certified_min_a, verify_envelope};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn power_law_examples() {
        let one = power_law_gram(1.0, 2.0, 3.0, 1, None).unwrap();
        assert_eq!(one.get(1, 1), Some(3.0));
        let g = power_law_gram(1.0, 2.0, 1.0, 3, Some(7)).unwrap();
        let expect = [[1.0, 0.25, 1.0 / 9.0], [0.25, 1.0, 0.25], [1.0 / 9.0, 0.25, 1.0]];
        for n in 1..=3 {
            for m in 1..=3 {
                assert_abs_diff_eq!(g.get(n, m).unwrap(), expect[n - 1][m - 1], epsilon = 1e-16);
            }
        }
        assert_eq!(g.metadata()["sign_seed"], 7);
        assert_abs_diff_eq!(certified_min_a(&g, 2.0).unwrap(), 1.0, epsilon = 1e-15);
        assert!(power_law_gram(1.0, 1.0, 1.0, 3, None).is_err());
        assert!(power_law_gram(1.0, 2.0, 0.0, 3, None).is_err());
    }

    #[test]
    fn signs_are_symmetric_and_reproducible() {
        for (n, m) in [(1, 2), (3, 9), (10, 4)] {
            assert_eq!(power_law_sign(5, n, m), power_law_sign(5, m, n));
            assert_eq!(power_law_sign(5, n, m), power_law_sign(5, n, m));
        }
        let flips = (2..200).filter(|&m| power_law_sign(1, 1, m) < 0.0).count();
        assert!(flips > 50 && flips < 150);
    }

    #[test]
    fn translate_examples() {
        let id = translate_frame_gram(&[1.0], 5).unwrap();
        for n in 1..=5 {
            for m in 1..=5 {
                assert_eq!(id.get(n, m), Some(if n == m { 1.0 } else { 0.0 }));
            }
        }
        let g = translate_frame_gram(&[1.0, 1.0], 4).unwrap();
        let expect = [[2.0, 1.0, 0.0, 1.0], [1.0, 2.0, 1.0, 0.0], [0.0, 1.0, 2.0, 1.0], [1.0, 0.0, 1.0, 2.0]];
        for n in 1..=4 {
            for m in 1..=4 {
                assert_eq!(g.get(n, m).unwrap(), expect[n - 1][m - 1]);
            }
        }
        let g = translate_frame_gram(&[1.0, 0.5, 0.25], 8).unwrap();
        assert_eq!(g.get(1, 1), Some(1.3125));
        assert_eq!(g.get(1, 2), Some(0.625));
        assert_eq!(translate_frame_gram(&[1.0; 4], 3), Err(Error::WindowTooLong { len: 4, period: 3 }));
    }

    #[test]
    fn frame_check_examples() {
        let e = |i: usize| (0..3).map(|j| if i == j { 1.0 } else { 0.0 }).collect::<Vec<_>>();
        let onb = FrameSystem::new(3, (0..3).map(e).collect(), None).unwrap();
        let r = frame_operator_check(&onb);
        assert!(r.invertible);
        for sv in &r.singular_values {
            assert_abs_diff_eq!(*sv, 1.0, epsilon = 1e-14);
        }

        let angle = |deg: f64| vec![deg.to_radians().cos(), deg.to_radians().sin()];
        let mercedes = FrameSystem::new(2, vec![angle(0.0), angle(120.0), angle(240.0)], None).unwrap();
        let r = frame_operator_check(&mercedes);
        for sv in &r.singular_values {
            assert_abs_diff_eq!(*sv, 1.5, epsilon = 1e-14);
        }
        let s = mercedes.frame_operator();
        assert_abs_diff_eq!(s[(0, 1)], 0.0, epsilon = 1e-15);

        let twins = FrameSystem::new(2, vec![vec![1.0, 2.0], vec![1.0, 2.0]], None).unwrap();
        let r = frame_operator_check(&twins);
        assert!(!r.invertible);
        assert_abs_diff_eq!(r.min_singular_value, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn frame_dimension_errors() {
        assert!(matches!(
            FrameSystem::new(2, vec![vec![1.0, 0.0], vec![1.0]], None),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            FrameSystem::new(2, vec![vec![1.0, 0.0]], Some(vec![])),
            Err(Error::DimensionMismatch(_))
        ));
        let underdetermined = FrameSystem::new(3, vec![vec![1.0, 0.0, 0.0]], None).unwrap();
        assert!(!frame_operator_check(&underdetermined).invertible);
    }

    #[test]
    fn dual_pair_frame_operator() {
        // biorthogonal pair: S is the identity without being symmetric term by term
        let vectors = vec![vec![1.0, 0.0], vec![1.0, 1.0]];
        let functionals = vec![vec![1.0, -1.0], vec![0.0, 1.0]];
        let fs = FrameSystem::new(2, vectors, Some(functionals)).unwrap();
        let r = frame_operator_check(&fs);
        assert!(r.eigenvalues.is_none());
        assert_abs_diff_eq!(r.min_singular_value, 1.0, epsilon = 1e-14);
        let g = fs.gram().unwrap();
        assert_eq!(g.get(1, 1), Some(1.0));
        assert_eq!(g.get(1, 2), Some(0.0));
    }

    proptest! {
        #[test]
        fn power_law_meets_own_envelope(a in 0.0f64..5.0, s in 1.01f64..6.0, c in 0.1f64..5.0, size in 1usize..40) {
            let g = power_law_gram(a, s, c, size, None).unwrap();
            let e = *g.envelope().unwrap();
            prop_assert!(verify_envelope(&g, &e, 0.0).pass);
        }

        #[test]
        fn translates_are_circulant(window in prop::collection::vec(0.0f64..2.0, 1..6), extra in 0usize..6) {
            let p = window.len() + extra;
            let g = translate_frame_gram(&window, p).unwrap();
            for n in 0..p {
                for m in 0..p {
                    prop_assert_eq!(g.get(n + 1, m + 1), g.get((n + 1) % p + 1, (m + 1) % p + 1));
                }
            }
        }

        #[test]
        fn self_dual_frame_operator_is_psd(
            vs in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 3), 1..8)
        ) {
            let r = frame_operator_check(&FrameSystem::new(3, vs, None).unwrap());
            for ev in r.eigenvalues.unwrap() {
                prop_assert!(ev >= -1e-12);
            }
        }
    }
}
