//! Block-sequence estimates: witnesses for the lower `T`-estimate, the block
//! renormalization and decomposition behind the upper estimate, and the
//! experiments built on both.

mod blocks;
mod experiments;
mod instances;
mod recipe;
mod upper;
mod witness;

pub use blocks::{combine, random_blocks, random_window_vector, Block, Layout};
pub use experiments::{
    coeff_hash, default_m_samples, estimate_m, fmt_sig, prop14_suite, recipe_run, saturation_experiment, supply_needed,
    MEstimate, Prop14Report, Prop14Row, RecipeRun, SaturationConfig, SaturationReport, SaturationRow,
};
pub use instances::{lower_instance, lower_instance_stages, random_proper_functional, LowerInstance};
pub use recipe::{
    build_section5_blocks, norm_proxy, random_supply, supply_gap, supply_layout, BlockRecipe, NormProxy, Section5Blocks,
};
pub use upper::{
    decompose_blocks, prop8_check, remark11_eps, upper_estimate_check, BlockParts, Decomposition, NodeCount, PairSets,
    Prop8Report, Remark7, UpperEstimate,
};
pub use witness::{find_peak_gamma, lower_estimate_check, witness_gamma, LowerEstimate, Peak, Witness};
