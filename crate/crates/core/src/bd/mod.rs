//! Bourgain–Delbaen stages `Γ_q`, extension operators `i_{q,m}`, FDD
//! projections `P_I` and the coordinate functionals `e*_γ`, `c*_γ`, `d*_γ`.

mod eval;
mod node;
mod ops;
mod registry;
mod vector;

pub use node::{GammaId, GammaKind, GammaNode};
pub use ops::{
    bd_sup_norm, c_star_apply, d_star, e_star, extend, fdd_support, is_skipped, op_norm_i, op_norm_projection, project,
    prop3_gaps, Coords, SupNorm,
};
pub use registry::{Filters, GammaRegistry, Priority};
pub use vector::BDVec;
