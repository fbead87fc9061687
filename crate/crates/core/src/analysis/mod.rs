//! Structural decompositions of `e*_γ`: evaluation analysis, `r`-analysis,
//! tree analysis and the telescoping evaluation along the tree.

mod evaluation;
mod tree;

pub use evaluation::{evaluation_analysis, r_analysis, AnalysisEntry, EvaluationAnalysis, RAnalysis};
pub use tree::{lemma4_eval, tree_analysis, FgSplit, Lemma4Eval, TreeAnalysis, TreeNode, MAX_TREE_DEPTH};
