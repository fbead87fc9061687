use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bd::{GammaId, GammaKind, GammaNode};
use crate::error::{Error, Result};
use crate::weights::Params;

/// Order in which cuts and candidate references are taken when filters cap
/// the enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Priority {
    /// Largest cuts and most recent references first.
    Newest,
    /// Smallest cuts and earliest references first.
    Oldest,
}

/// Caps applied while enumerating a new stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Filters {
    pub enabled: bool,
    pub max_p_choices: usize,
    pub max_xi: usize,
    pub max_eta: usize,
    pub max_stage_size: usize,
    pub priority: Priority,
    /// Hard limit on `|Δ_q|` when filters are disabled.
    pub stage_cap: usize,
}

impl Default for Filters {
    fn default() -> Self {
        Filters {
            enabled: true,
            max_p_choices: 2,
            max_xi: 3,
            max_eta: 2,
            max_stage_size: 24,
            priority: Priority::Newest,
            stage_cap: 20_000,
        }
    }
}

impl Filters {
    /// Exhaustive enumeration, guarded only by `stage_cap`.
    pub fn none() -> Self {
        Filters { enabled: false, ..Filters::default() }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}

/// Arena of nodes plus the materialized stages `Γ_1 ⊂ Γ_2 ⊂ …`.
///
/// Materialized nodes are listed in rank order, so `Γ_q` is a prefix of
/// `members`. Nodes added with [`GammaRegistry::add_symbolic`] live only in
/// the arena; a vector carries no FDD component on them.
#[derive(Debug, Clone)]
pub struct GammaRegistry {
    nodes: Vec<GammaNode>,
    index: HashMap<GammaNode, GammaId>,
    position: Vec<Option<usize>>,
    members: Vec<GammaId>,
    /// `stage_end[q] = |Γ_q|`.
    stage_end: Vec<usize>,
    filters: Filters,
}

impl GammaRegistry {
    /// A registry holding `Γ_1 = {Base}`.
    pub fn new(filters: Filters) -> Self {
        let mut reg = GammaRegistry {
            nodes: Vec::new(),
            index: HashMap::new(),
            position: Vec::new(),
            members: Vec::new(),
            stage_end: vec![0],
            filters,
        };
        let base = reg.intern(GammaNode::base());
        reg.materialize(base);
        reg.stage_end.push(1);
        reg
    }

    /// Builds stages until `Γ_q` is available.
    pub fn build(params: &Params, filters: Filters, q: usize) -> Result<Self> {
        let mut reg = GammaRegistry::new(filters);
        reg.build_to(q, params)?;
        Ok(reg)
    }

    pub fn filters(&self) -> &Filters {
        &self.filters
    }

    /// Number of built stages.
    pub fn stages(&self) -> usize {
        self.stage_end.len() - 1
    }

    /// `|Γ_q|`.
    pub fn gamma_len(&self, q: usize) -> usize {
        self.stage_end[q.min(self.stages())]
    }

    /// Materialized nodes of `Γ_q` in rank order.
    pub fn gamma(&self, q: usize) -> &[GammaId] {
        &self.members[..self.gamma_len(q)]
    }

    /// Materialized nodes of `Δ_q`.
    pub fn delta(&self, q: usize) -> &[GammaId] {
        if q == 0 || q > self.stages() {
            return &[];
        }
        &self.members[self.stage_end[q - 1]..self.stage_end[q]]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: GammaId) -> Result<&GammaNode> {
        self.nodes.get(id.0).ok_or(Error::UnknownGamma(id))
    }

    pub(crate) fn node_unchecked(&self, id: GammaId) -> &GammaNode {
        &self.nodes[id.0]
    }

    /// Position in `Γ` if materialized.
    pub fn position(&self, id: GammaId) -> Option<usize> {
        self.position.get(id.0).copied().flatten()
    }

    pub fn is_materialized(&self, id: GammaId) -> bool {
        self.position(id).is_some()
    }

    /// The materialized node at `pos`.
    pub fn member(&self, pos: usize) -> GammaId {
        self.members[pos]
    }

    pub fn lookup(&self, node: &GammaNode) -> Option<GammaId> {
        self.index.get(node).copied()
    }

    fn intern(&mut self, node: GammaNode) -> GammaId {
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let id = GammaId(self.nodes.len());
        self.nodes.push(node);
        self.position.push(None);
        self.index.insert(node, id);
        id
    }

    fn materialize(&mut self, id: GammaId) {
        if self.position[id.0].is_none() {
            self.position[id.0] = Some(self.members.len());
            self.members.push(id);
        }
    }

    /// Checks the rank, age and reference constraints of `node`.
    pub fn check_node(&self, node: &GammaNode, params: &Params) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidGamma(msg));
        let rank_of = |id: GammaId| self.node(id).map(|n| n.rank);
        match node.kind {
            GammaKind::Base => {
                if node.rank != 1 {
                    return bad(format!("base node at rank {}", node.rank));
                }
            }
            GammaKind::Age1 { p, eps, xi } => {
                let rx = rank_of(xi)?;
                if eps.abs() != 1 {
                    return bad(format!("eps = {eps}"));
                }
                if !(p < rx && rx < node.rank) {
                    return bad(format!("age1 needs p < rank xi < rank: {p}, {rx}, {}", node.rank));
                }
            }
            GammaKind::AgeA { a, p, eta, eps, xi } => {
                let rx = rank_of(xi)?;
                let eta_node = self.node(eta)?;
                if eps.abs() != 1 {
                    return bad(format!("eps = {eps}"));
                }
                if !(2..=params.n).contains(&a) {
                    return bad(format!("age {a} outside 2..={}", params.n));
                }
                if eta_node.kind == GammaKind::Base || eta_node.age() != a - 1 {
                    return bad(format!("eta {eta} has age {} but age {} is required", eta_node.age(), a - 1));
                }
                if !(eta_node.rank <= p && p < rx && rx < node.rank) {
                    return bad(format!(
                        "need rank eta <= p < rank xi < rank: {}, {p}, {rx}, {}",
                        eta_node.rank, node.rank
                    ));
                }
            }
        }
        Ok(())
    }

    /// Adds a node without materializing it; returns the existing id when the
    /// same tuple is already known.
    pub fn add_symbolic(&mut self, node: GammaNode, params: &Params) -> Result<GammaId> {
        if let Some(id) = self.lookup(&node) {
            return Ok(id);
        }
        self.check_node(&node, params)?;
        Ok(self.intern(node))
    }

    pub fn build_to(&mut self, q: usize, params: &Params) -> Result<()> {
        while self.stages() < q {
            self.build_stage(params)?;
        }
        Ok(())
    }

    /// Enumerates and materializes `Δ_{q+1}`.
    pub fn build_stage(&mut self, params: &Params) -> Result<()> {
        let q = self.stages();
        let candidates = self.candidates(q, params)?;
        for node in candidates {
            let id = self.intern(node);
            self.materialize(id);
        }
        self.stage_end.push(self.members.len());
        Ok(())
    }

    fn ordered<T: Copy>(&self, mut items: Vec<T>) -> Vec<T> {
        if self.filters.priority == Priority::Newest {
            items.reverse();
        }
        items
    }

    fn capped<T: Copy>(&self, items: Vec<T>, cap: usize) -> Vec<T> {
        let items = self.ordered(items);
        if self.filters.enabled {
            items.into_iter().take(cap).collect()
        } else {
            items
        }
    }

    /// Materialized `ξ` with `p < rank ξ ≤ q`, in priority order.
    fn xi_candidates(&self, p: usize, q: usize) -> Vec<GammaId> {
        let slice = &self.members[self.stage_end[p]..self.stage_end[q]];
        self.capped(slice.to_vec(), self.filters.max_xi)
    }

    fn candidates(&self, q: usize, params: &Params) -> Result<Vec<GammaNode>> {
        let rank = q + 1;
        let f = &self.filters;
        // by_age[a - 1] holds the new nodes of age a
        let mut by_age: Vec<Vec<GammaNode>> = vec![Vec::new(); params.n];
        for p in self.capped((0..q).collect(), f.max_p_choices) {
            for xi in self.xi_candidates(p, q) {
                for eps in [1, -1] {
                    by_age[0].push(GammaNode::age1(rank, p, eps, xi));
                }
            }
        }
        for a in 2..=params.n {
            let cuts: Vec<usize> = (1..q).collect();
            for p in self.capped(cuts, f.max_p_choices) {
                let etas: Vec<GammaId> = self.members[..self.stage_end[p]]
                    .iter()
                    .copied()
                    .filter(|&id| {
                        let n = self.node_unchecked(id);
                        n.kind != GammaKind::Base && n.age() == a - 1
                    })
                    .collect();
                let etas = self.capped(etas, f.max_eta);
                let xis = self.xi_candidates(p, q);
                for &eta in &etas {
                    for &xi in &xis {
                        for eps in [1, -1] {
                            by_age[a - 1].push(GammaNode::age_a(rank, a, p, eta, eps, xi));
                        }
                    }
                }
            }
        }
        let total: usize = by_age.iter().map(Vec::len).sum();
        if !f.enabled {
            if total > f.stage_cap {
                return Err(Error::StageTooLarge { stage: rank, size: total, cap: f.stage_cap });
            }
            return Ok(by_age.concat());
        }
        // round robin over ages keeps every age represented under the cap
        let mut out = Vec::with_capacity(total.min(f.max_stage_size));
        let mut cursors = vec![0usize; by_age.len()];
        while out.len() < total.min(f.max_stage_size) {
            for (a, list) in by_age.iter().enumerate() {
                if cursors[a] < list.len() && out.len() < f.max_stage_size {
                    out.push(list[cursors[a]]);
                    cursors[a] += 1;
                }
            }
        }
        Ok(out)
    }

    /// One line per materialized node: `id rank kind a p eta_id eps xi_id`,
    /// with `-` for absent fields and ids renumbered by position.
    pub fn dump(&self) -> String {
        let mut out = format!("# stages {}\n", self.stages());
        let pos = |id: GammaId| self.position(id).expect("materialized references");
        for (i, &id) in self.members.iter().enumerate() {
            let node = self.node_unchecked(id);
            let (a, p, eta, eps, xi) = match node.kind {
                GammaKind::Base => ("1".into(), "-".into(), "-".into(), "-".into(), "-".into()),
                GammaKind::Age1 { p, eps, xi } => {
                    ("1".into(), p.to_string(), "-".into(), eps.to_string(), pos(xi).to_string())
                }
                GammaKind::AgeA { a, p, eta, eps, xi } => {
                    (a.to_string(), p.to_string(), pos(eta).to_string(), eps.to_string(), pos(xi).to_string())
                }
            };
            let _ = writeln!(out, "{i} {} {} {a} {p} {eta} {eps} {xi}", node.rank, node.kind_name());
        }
        out
    }

    /// Inverse of [`GammaRegistry::dump`]; every node is re-validated.
    pub fn load(text: &str, params: &Params, filters: Filters) -> Result<Self> {
        let mut reg = GammaRegistry {
            nodes: Vec::new(),
            index: HashMap::new(),
            position: Vec::new(),
            members: Vec::new(),
            stage_end: vec![0],
            filters,
        };
        let mut stages = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(s) = rest.trim().strip_prefix("stages") {
                    stages = Some(s.trim().parse::<usize>().map_err(|e| Error::Parse(e.to_string()))?);
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let node = parse_line(line, lineno + 1, reg.nodes.len())?;
            if reg.lookup(&node).is_some() {
                return Err(Error::Parse(format!("line {}: duplicate node", lineno + 1)));
            }
            reg.check_node(&node, params)?;
            let last_rank = reg.members.last().map_or(0, |&id| reg.node_unchecked(id).rank);
            if node.rank < last_rank || node.rank > last_rank + 1 {
                return Err(Error::Parse(format!("line {}: rank {} out of order", lineno + 1, node.rank)));
            }
            while reg.stage_end.len() < node.rank {
                reg.stage_end.push(reg.members.len());
            }
            let id = reg.intern(node);
            reg.materialize(id);
        }
        let top = reg.members.last().map_or(0, |&id| reg.node_unchecked(id).rank);
        if top == 0 {
            return Err(Error::Parse("empty registry".into()));
        }
        reg.stage_end.push(reg.members.len());
        if let Some(s) = stages {
            if s != top {
                return Err(Error::Parse(format!("header says {s} stages, found {top}")));
            }
        }
        Ok(reg)
    }
}

fn parse_line(line: &str, lineno: usize, expected_id: usize) -> Result<GammaNode> {
    let err = |msg: &str| Error::Parse(format!("line {lineno}: {msg}"));
    let f: Vec<&str> = line.split_whitespace().collect();
    if f.len() != 8 {
        return Err(err("expected 8 fields"));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| err(&format!("bad number `{s}`")));
    if num(f[0])? != expected_id {
        return Err(err("ids must be consecutive from 0"));
    }
    let rank = num(f[1])?;
    let eps = || f[6].parse::<i8>().map_err(|_| err("bad eps"));
    let kind = match f[2] {
        "base" => GammaKind::Base,
        "age1" => GammaKind::Age1 { p: num(f[4])?, eps: eps()?, xi: GammaId(num(f[7])?) },
        "agea" => GammaKind::AgeA {
            a: num(f[3])?,
            p: num(f[4])?,
            eta: GammaId(num(f[5])?),
            eps: eps()?,
            xi: GammaId(num(f[7])?),
        },
        other => return Err(err(&format!("unknown kind `{other}`"))),
    };
    Ok(GammaNode { rank, kind })
}
