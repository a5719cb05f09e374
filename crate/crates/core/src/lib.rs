//! Finite parts of divergent integrals on complex projective space.
//!
//! The crate computes `fp ∫_{ℙⁿ} ω` for the form
//! `ω = (i/2)ⁿ dz∧dz̄ / |z₁⋯zₙ|²` along three independent routes:
//! an exact Γ-ratio closed form, a symbolic expansion into integrable terms
//! evaluated exactly or by quadrature, and a Laurent fit to sampled values
//! of the local zeta function `Z(λ) = ∫ ‖s‖^{2λ} ω`.

pub mod error;
pub mod expansion;
pub mod gamma;
pub mod grassmann;
pub mod laurent;
pub mod pipeline;
pub mod quadrature;
pub mod zring;

pub use error::{Error, Result};
pub use laurent::{Coeff, LaurentSeries};
pub use zring::{ZetaExpr, ZetaMonomial};
