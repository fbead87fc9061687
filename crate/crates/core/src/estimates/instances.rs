use rand::Rng;

use crate::bd::GammaRegistry;
use crate::error::Result;
use crate::estimates::{random_blocks, Block, Layout};
use crate::tsirelson::WFunctional;
use crate::weights::Params;

/// A random proper functional on the given increasing leaves, of height at
/// most `max_height`; needs `leaves.len() ≤ n^max_height`.
pub fn random_proper_functional<R: Rng>(leaves: &[usize], n: usize, max_height: usize, rng: &mut R) -> WFunctional {
    if leaves.len() == 1 || max_height == 0 {
        return WFunctional::leaf(leaves[0]);
    }
    let cap = n.pow(max_height as u32 - 1);
    loop {
        let a = rng.gen_range(2..=n.min(leaves.len()));
        let mut cuts: Vec<usize> = (1..leaves.len()).collect();
        // a − 1 distinct cut points chosen by partial shuffle
        for i in 0..a - 1 {
            let j = rng.gen_range(i..cuts.len());
            cuts.swap(i, j);
        }
        let mut cuts = cuts[..a - 1].to_vec();
        cuts.sort_unstable();
        cuts.insert(0, 0);
        cuts.push(leaves.len());
        if cuts.windows(2).all(|w| w[1] - w[0] <= cap) {
            let children =
                cuts.windows(2).map(|w| random_proper_functional(&leaves[w[0]..w[1]], n, max_height - 1, rng));
            return WFunctional::node(children.collect());
        }
    }
}

/// A compliant lower-estimate instance: gapped random blocks, positive
/// coefficients and a proper functional on a random subset of the blocks.
#[derive(Debug, Clone)]
pub struct LowerInstance {
    pub blocks: Vec<Block>,
    pub coeffs: Vec<f64>,
    pub phi: WFunctional,
}

/// Stages needed by [`lower_instance`] for `max_blocks` blocks of width up to 2.
pub fn lower_instance_stages(max_blocks: usize) -> usize {
    Layout::gapped(max_blocks, 2).top() + 2
}

pub fn lower_instance<R: Rng>(
    reg: &GammaRegistry,
    params: &Params,
    max_blocks: usize,
    max_height: usize,
    rng: &mut R,
) -> Result<LowerInstance> {
    let count = rng.gen_range(1..=max_blocks);
    let layout = Layout::gapped(count, rng.gen_range(1..=2));
    let blocks = random_blocks(&layout, reg.stages(), reg, params, rng)?;
    let coeffs: Vec<f64> = (0..count).map(|_| rng.gen_range(0.05..=1.0)).collect();
    let cap = params.n.pow(max_height as u32).min(count);
    let mut leaves: Vec<usize> = (1..=count).filter(|_| rng.gen_bool(0.8)).take(cap).collect();
    if leaves.is_empty() {
        leaves.push(rng.gen_range(1..=count));
    }
    let phi = random_proper_functional(&leaves, params.n, max_height, rng);
    Ok(LowerInstance { blocks, coeffs, phi })
}
