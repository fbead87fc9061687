//! Numerical laboratory for an `ℓ_r`-saturated Bourgain–Delbaen space built
//! over a Tsirelson-type norm with weights `b_1 > … > b_n`.
//!
//! * [`weights`]: parameters and their validation.
//! * [`tsirelson`]: the Tsirelson-type norm, its norming functionals and an
//!   independent brute-force oracle.
//! * [`bd`]: stages `Γ_q`, extension operators and FDD projections.
//! * [`analysis`]: evaluation, r- and tree analyses of `e*_γ`.
//! * [`estimates`]: constructive lower/upper estimates and experiments.

pub mod analysis;
pub mod bd;
pub mod error;
pub mod estimates;
pub mod tsirelson;
pub mod weights;

pub use error::{Error, Result};
pub use weights::Params;
