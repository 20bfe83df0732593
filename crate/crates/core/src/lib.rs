//! Certified pavings of localized cross-Gram systems into approximate Riesz
//! sequences.
//!
//! A system `(f_n, τ_n)` is described by its cross-Gram moduli
//! `G[n][m] = |f_n(τ_m)|`. If the diagonal is bounded below by `C > 0` and the
//! off-diagonal decays like `A/(1+|n−m|)^s` with `s > 1`, the residue classes
//! modulo a computable `M` each have margin
//! `G[n][n] − Σ_{m∈Q, m≠n} G[n][m] ≥ C/2`.
//!
//! * [`gram`]: systems, envelopes and the bounded-below constant
//! * [`constants`]: certified `ζ(s)`, `D_s` and `C_s`
//! * [`partition`]: modulus choice, residue pavings and certificates
//! * [`oracle`]: exact minimum pavings of small truncations
//! * [`generators`]: systems with known ground truth
//! * [`cli`]: the `framepaver` command line

pub mod cli;
pub mod constants;
mod error;
pub mod generators;
pub mod gram;
pub mod numeric;
pub mod oracle;
pub mod partition;

pub use constants::{c_s, d_s, verify_separation_bound, zeta, GrochenigConstants};
pub use error::{Error, Result};
pub use generators::{frame_operator_check, power_law_gram, translate_frame_gram, FrameSystem};
pub use gram::{
    certified_min_a, diag_lower_bound, entry_bound, verify_envelope, DecayEnvelope, GramSystem, Scope,
};
pub use numeric::Interval;
pub use oracle::{exact_margin, min_partition};
pub use partition::{
    certify, choose_modulus, class_margin_lower_bound, pave, residue_partition, ArsCertificate, Class,
    IndexRange, Paving, Verdict,
};
