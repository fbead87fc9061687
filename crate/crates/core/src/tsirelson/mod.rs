//! The Tsirelson-type space `T(𝒜_n, b̄)`: vectors, norming functionals and the
//! exact norm.

mod extremal;
mod functional;
mod norm;
mod oracle;
mod vector;

pub use extremal::{lr_sandwich, prop14_lp_closed_form, prop14_vector, Sandwich};
pub use functional::{
    branching_functional, eval_functional, height_check, properize, HeightCheck, WFunctional, DEFAULT_SIZE_CAP,
};
pub use norm::{ts_norm, ts_norm_capped, ts_norm_with_witness};
pub use oracle::{ts_norm_oracle, ts_norm_oracle_capped, DEFAULT_ORACLE_CAP};
pub use vector::SparseVec;
