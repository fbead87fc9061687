use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::path::{Path, PathBuf};

use bdx::analysis::{evaluation_analysis, r_analysis, tree_analysis};
use bdx::bd::{bd_sup_norm, BDVec, Filters, GammaRegistry};
use bdx::estimates::{fmt_sig, saturation_experiment, SaturationConfig};
use bdx::tsirelson::{ts_norm_with_witness, SparseVec};
use bdx::weights::{derive_weights, validate};
use bdx::{Error, Params};
use serde_json::json;

use crate::{suites, Command, Experiment, ParamsArgs, RegistryArgs};

/// Registry dumps are cached here when set.
pub const CACHE_ENV: &str = "BDX_CACHE_DIR";

#[derive(Debug)]
pub enum CliError {
    /// Bad input: exit 2.
    Usage(String),
    /// A computation failed: exit 1.
    Run(Error),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Run(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Run(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::Io(_) | Error::InvalidParams(_) | Error::Infeasible { .. } => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Run(other),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parameters from `--params`, `--derive` or the `n = 2` example, unvalidated.
fn raw_params(args: &ParamsArgs) -> Result<Params> {
    if let Some(path) = &args.params {
        return Ok(Params::load(path)?);
    }
    if let Some(text) = &args.derive {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        let [n, r, b1] = parts[..] else {
            return Err(usage(format!("--derive expects n,r,b1, got `{text}`")));
        };
        let n: usize = n.parse().map_err(|_| usage(format!("bad n `{n}`")))?;
        let r: f64 = r.parse().map_err(|_| usage(format!("bad r `{r}`")))?;
        let b1: f64 = b1.parse().map_err(|_| usage(format!("bad b1 `{b1}`")))?;
        return Ok(derive_weights(n, r, b1)?);
    }
    Ok(Params::example_n2())
}

fn load_params(args: &ParamsArgs) -> Result<Params> {
    Ok(raw_params(args)?.checked()?)
}

fn load_filters(path: Option<&Path>) -> Result<Filters> {
    match path {
        Some(p) => Ok(Filters::load(p)?),
        None => Ok(Filters::none()),
    }
}

/// Text after reading `arg` as a file, or `arg` itself when no such file exists.
fn file_or_inline(arg: &str) -> Result<String> {
    let path = Path::new(arg);
    if path.is_file() {
        Ok(std::fs::read_to_string(path).map_err(Error::from)?)
    } else {
        Ok(arg.to_string())
    }
}

fn cache_path(params: &Params, filters: &Filters, stages: usize) -> Option<PathBuf> {
    let dir = std::env::var_os(CACHE_ENV)?;
    let mut h = DefaultHasher::new();
    params.to_config_string().hash(&mut h);
    serde_json::to_string(filters).expect("filters serialize").hash(&mut h);
    Some(PathBuf::from(dir).join(format!("registry-n{}-q{stages}-{:016x}.txt", params.n, h.finish())))
}

/// Builds `Γ_1 … Γ_stages`, reusing a cached dump when one matches.
pub fn registry(params: &Params, filters: Filters, stages: usize) -> Result<GammaRegistry> {
    let cache = cache_path(params, &filters, stages);
    if let Some(path) = &cache {
        if let Ok(text) = std::fs::read_to_string(path) {
            // a stale or corrupt entry is rebuilt rather than reported
            if let Ok(reg) = GammaRegistry::load(&text, params, filters.clone()) {
                if reg.stages() == stages {
                    return Ok(reg);
                }
            }
        }
    }
    let reg = GammaRegistry::build(params, filters, stages)?;
    if let Some(path) = &cache {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(Error::from)?;
        }
        std::fs::write(path, reg.dump()).map_err(Error::from)?;
    }
    Ok(reg)
}

fn registry_from(params: &Params, args: &RegistryArgs) -> Result<GammaRegistry> {
    registry(params, load_filters(args.filters.as_deref())?, args.stages as usize)
}

/// Parses `position:value` pairs over registry positions (0-based, as in the dump).
fn parse_positions(text: &str) -> Result<Vec<(usize, f64)>> {
    let mut out = Vec::new();
    for tok in text.split_whitespace() {
        let (i, v) = tok.split_once(':').ok_or_else(|| usage(format!("expected position:value, got `{tok}`")))?;
        let i: usize = i.parse().map_err(|_| usage(format!("bad position `{i}`")))?;
        let v: f64 = v.parse().map_err(|_| usage(format!("bad value `{v}`")))?;
        if !v.is_finite() {
            return Err(usage(format!("non-finite value at position {i}")));
        }
        out.push((i, v));
    }
    Ok(out)
}

fn write_out(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

/// Runs one subcommand; `Ok(false)` reports failed checks.
pub fn run(command: Command) -> Result<bool> {
    match command {
        Command::Params { params } => {
            let p = raw_params(&params)?;
            let report = validate(&p);
            println!("n = {}", p.n);
            println!("r = {}", fmt_sig(p.r));
            println!("r' = {}", fmt_sig(p.r_conj));
            let b: Vec<String> = p.b.iter().map(|&v| fmt_sig(v)).collect();
            println!("b = [{}]", b.join(", "));
            println!("sum b = {}", fmt_sig(p.weight_sum()));
            println!("C = {}", fmt_sig(p.c));
            println!("valid: {report}");
            Ok(report.is_ok())
        }
        Command::TsNorm { params, vec, witness } => {
            let p = load_params(&params)?;
            let x: SparseVec = file_or_inline(&vec)?.parse()?;
            let (value, phi) = ts_norm_with_witness(&x, &p)?;
            println!("{}", fmt_sig(value));
            if witness {
                match phi {
                    Some(phi) => println!("witness {phi}"),
                    None => println!("witness none"),
                }
            }
            Ok(true)
        }
        Command::BdBuild { params, registry: args, out } => {
            let p = load_params(&params)?;
            let reg = registry_from(&p, &args)?;
            let dump = reg.dump();
            match out {
                Some(path) => {
                    write_out(&path, &dump)?;
                    for q in 1..=reg.stages() {
                        println!("stage {q}: {} new, {} total", reg.delta(q).len(), reg.gamma_len(q));
                    }
                }
                None => print!("{dump}"),
            }
            Ok(true)
        }
        Command::BdNorm { params, vec, horizon, filters } => {
            let p = load_params(&params)?;
            let pairs = parse_positions(&file_or_inline(&vec)?)?;
            let top = pairs.iter().map(|&(i, _)| i).max().unwrap_or(0);
            if horizon == 0 {
                return Err(usage("--horizon must be at least 1"));
            }
            let reg = registry(&p, load_filters(filters.as_deref())?, horizon)?;
            // the vector lives at the first stage holding its highest position
            let stage = (1..=horizon)
                .find(|&q| reg.gamma_len(q) > top)
                .ok_or_else(|| usage(format!("position {top} lies outside Γ_{horizon}")))?;
            let mut values = vec![0.0; reg.gamma_len(stage)];
            for (i, v) in pairs {
                values[i] += v;
            }
            let x = BDVec::from_values(&reg, stage, values)?;
            let norm = bd_sup_norm(&x, horizon, &reg, &p)?;
            println!("stage {stage}");
            println!("horizon {}", norm.horizon);
            println!("norm {}", fmt_sig(norm.value));
            println!("increment {}", fmt_sig(norm.increment));
            Ok(true)
        }
        Command::AnalyzeGamma { params, registry: args, id, r, tree } => {
            let p = load_params(&params)?;
            let reg = registry_from(&p, &args)?;
            if id >= reg.gamma_len(reg.stages()) {
                return Err(usage(format!("position {id} is outside Γ_{}", reg.stages())));
            }
            let gamma = reg.member(id);
            let node = reg.node(gamma)?;
            let mut doc = json!({
                "gamma": id,
                "rank": node.rank,
                "kind": node.kind_name(),
                "age": node.age(),
                "evaluation": evaluation_analysis(gamma, &reg)?,
            });
            if let Some(r) = r {
                doc["r_analysis"] = json!({ "r": r, "result": r_analysis(gamma, r, &reg)? });
            }
            if tree {
                doc["tree"] = serde_json::to_value(tree_analysis(gamma, &reg)?).expect("tree serializes");
            }
            println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
            Ok(true)
        }
        Command::Verify { params, suite, stages, seed } => {
            let p = load_params(&params)?;
            let checks = suites::run(suite, &p, stages as usize, seed)?;
            let passed = checks.iter().filter(|c| c.ok).count();
            for c in &checks {
                println!("{} {} {}", if c.ok { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            println!("{passed}/{} checks passed", checks.len());
            Ok(passed == checks.len())
        }
        Command::Experiment { kind: Experiment::Saturation { params, seed, scale, out, jobs: _ } } => {
            let p = load_params(&params)?;
            let config = SaturationConfig::new(seed, scale as usize);
            let report = saturation_experiment(&config, &p)?;
            if let Some(path) = &out {
                let json = path.extension().is_some_and(|e| e == "json");
                write_out(path, &if json { report.to_json() } else { report.to_csv() })?;
            }
            println!("seed {seed}");
            println!("blocks {}", report.recipe.f_seq.len());
            println!("M_est {}", fmt_sig(report.m_est.value));
            println!("envelope [{}, {}]", fmt_sig(report.envelope.0), fmt_sig(report.envelope.1));
            for row in &report.rows {
                println!("{} {} ratio {} horizon {}", row.instance, row.coeff_hash, fmt_sig(row.ratio), row.horizon);
            }
            println!("ratios in [{}, {}]: {}", fmt_sig(report.min_ratio), fmt_sig(report.max_ratio), report.ok);
            Ok(report.ok)
        }
    }
}
