//! Experiment specification files.
//!
//! Specs are TOML documents — a line-based key-value format with sections
//! — versioned through a mandatory top-level `version` field. Parsing is
//! total: syntax problems, unknown keys and semantic violations all come
//! back as field-level error messages, never panics. A parsed spec
//! normalizes to a canonical document that re-parses to the same plan.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use feedsolve::zoo::{
    make_layered_mlp, make_linear_triangular, make_made, make_synthetic, Activation, ChainKind,
    Connectivity, LayeredMlpSpec, LinearTriangularSpec, MadeSpec, SparsityMask,
    SyntheticChainSpec,
};
use feedsolve::{BlockPartition, Initializer, NormKind, RecurrenceSystem};

use crate::error::CliError;

pub const SPEC_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub version: u32,
    pub model: ModelSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub cost: CostSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bench: Option<BenchSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Independent,
    Skip,
    Markov,
    Linear,
    MlpChain,
    MlpDense,
    Made,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Independent => "independent",
            ModelKind::Skip => "skip",
            ModelKind::Markov => "markov",
            ModelKind::Linear => "linear",
            ModelKind::MlpChain => "mlp-chain",
            ModelKind::MlpDense => "mlp-dense",
            ModelKind::Made => "made",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
    pub t: usize,
    #[serde(default)]
    pub seed: u64,
    /// Seed for the input sample; defaults to `seed + 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_dim: Option<usize>,
    /// Linear sparsity: `full`, `none`, `band:<k>` or `random:<p>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<String>,
    /// MLP activation: `identity`, `tanh` or `rectifier`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activation: Option<String>,
    /// MADE hidden-layer widths (exactly two).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_scale: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodName {
    Feedforward,
    FeedforwardCached,
    Jacobi,
    JacobiGs,
    GsJacobi,
}

impl MethodName {
    pub fn name(self) -> &'static str {
        match self {
            MethodName::Feedforward => "feedforward",
            MethodName::FeedforwardCached => "feedforward-cached",
            MethodName::Jacobi => "jacobi",
            MethodName::JacobiGs => "jacobi-gs",
            MethodName::GsJacobi => "gs-jacobi",
        }
    }

    pub fn parse(name: &str) -> Result<Self, CliError> {
        match name {
            "feedforward" => Ok(MethodName::Feedforward),
            "feedforward-cached" => Ok(MethodName::FeedforwardCached),
            "jacobi" => Ok(MethodName::Jacobi),
            "jacobi-gs" => Ok(MethodName::JacobiGs),
            "gs-jacobi" => Ok(MethodName::GsJacobi),
            other => Err(CliError::Spec(format!(
                "unknown method `{other}`; expected feedforward, feedforward-cached, jacobi, jacobi-gs or gs-jacobi"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_method")]
    pub method: MethodName,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default = "default_norm")]
    pub norm: String,
    #[serde(default = "default_init")]
    pub init: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_sweeps: Option<usize>,
    #[serde(default = "default_true")]
    pub ground_truth: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

fn default_method() -> MethodName {
    MethodName::Jacobi
}

fn default_norm() -> String {
    "linf".into()
}

fn default_init() -> String {
    "zeros".into()
}

fn default_true() -> bool {
    true
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            method: default_method(),
            epsilon: 0.0,
            norm: default_norm(),
            init: default_init(),
            partition: None,
            block_size: None,
            max_sweeps: None,
            ground_truth: true,
            workers: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct CostSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniform: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parallel: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub serial: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSection {
    pub methods: Vec<MethodName>,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
}

fn default_repeats() -> usize {
    1
}

/// Command-line overrides applied over the file before validation.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub method: Option<String>,
    pub epsilon: Option<f64>,
    pub seed: Option<u64>,
    pub trace: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub repeats: Option<usize>,
}

/// A fully validated experiment plan.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    file: SpecFile,
    pub method: MethodName,
    pub epsilon: f64,
    pub norm: NormKind,
    pub initializer: Initializer,
    pub partition: Option<BlockPartition>,
    pub max_sweeps: Option<usize>,
    pub ground_truth: bool,
    pub workers: Option<usize>,
    pub input_seed: u64,
    pub parallel_costs: Vec<f64>,
    pub serial_costs: Vec<f64>,
    pub trace_path: PathBuf,
    pub summary_path: PathBuf,
    pub table_path: PathBuf,
    pub bench_methods: Vec<MethodName>,
    pub bench_repeats: usize,
}

impl ExperimentSpec {
    pub fn model(&self) -> &ModelSection {
        &self.file.model
    }

    pub fn t_len(&self) -> usize {
        self.file.model.t
    }

    /// Canonical document: defaults filled, block sizes expanded into an
    /// explicit partition. Re-parsing it yields the same plan.
    pub fn canonical_document(&self) -> String {
        toml::to_string(&self.file).expect("spec serializes")
    }

    pub fn build_system(&self) -> Result<RecurrenceSystem, CliError> {
        let m = &self.file.model;
        let t = m.t;
        let system = match m.kind {
            ModelKind::Independent | ModelKind::Skip | ModelKind::Markov => {
                let kind = match m.kind {
                    ModelKind::Independent => ChainKind::Independent,
                    ModelKind::Skip => ChainKind::Skip,
                    _ => ChainKind::Markov,
                };
                make_synthetic(&SyntheticChainSpec { kind, t_len: t }, m.seed)?
            }
            ModelKind::Linear => {
                let mut spec = LinearTriangularSpec::uniform(
                    t,
                    m.state_dim.unwrap_or(2),
                    m.input_dim.unwrap_or(2),
                    parse_mask(m.mask.as_deref().unwrap_or("random:0.5"))
                        .map_err(CliError::Spec)?,
                );
                spec.weight_scale = m.weight_scale.unwrap_or(1.0);
                make_linear_triangular(&spec, m.seed)?
            }
            ModelKind::MlpChain | ModelKind::MlpDense => {
                let connectivity = if m.kind == ModelKind::MlpChain {
                    Connectivity::Chain
                } else {
                    Connectivity::Dense
                };
                let mut spec = LayeredMlpSpec::uniform(
                    t,
                    m.state_dim.unwrap_or(2),
                    m.input_dim.unwrap_or(2),
                    parse_activation(m.activation.as_deref().unwrap_or("tanh"))
                        .map_err(CliError::Spec)?,
                    connectivity,
                );
                spec.weight_scale = m.weight_scale.unwrap_or(1.0);
                make_layered_mlp(&spec, m.seed)?
            }
            ModelKind::Made => {
                let hidden = match m.hidden.as_deref() {
                    Some([a, b]) => [*a, *b],
                    Some(_) => unreachable!("validated"),
                    None => {
                        let h = t.saturating_sub(1).max(4);
                        [h, h]
                    }
                };
                make_made(&MadeSpec { t_len: t, hidden }, m.seed)?
            }
        };
        Ok(system)
    }
}

/// Parses and validates a spec document, applying CLI overrides first.
/// All semantic problems are gathered and reported together.
pub fn parse_experiment_spec(text: &str, overrides: &Overrides) -> Result<ExperimentSpec, CliError> {
    let mut file: SpecFile = toml::from_str(text)
        .map_err(|e| CliError::Spec(format!("spec does not parse: {e}")))?;

    if let Some(method) = &overrides.method {
        file.solver.method = MethodName::parse(method)?;
    }
    if let Some(eps) = overrides.epsilon {
        file.solver.epsilon = eps;
    }
    if let Some(seed) = overrides.seed {
        file.model.seed = seed;
    }
    if let Some(trace) = &overrides.trace {
        file.output.trace = Some(trace.display().to_string());
    }
    if let Some(summary) = &overrides.summary {
        file.output.summary = Some(summary.display().to_string());
    }
    if let Some(repeats) = overrides.repeats {
        if let Some(bench) = &mut file.bench {
            bench.repeats = repeats;
        } else {
            file.bench = Some(BenchSection {
                methods: vec![file.solver.method],
                repeats,
            });
        }
    }

    validate(file)
}

fn validate(mut file: SpecFile) -> Result<ExperimentSpec, CliError> {
    let mut errors: Vec<String> = Vec::new();

    if file.version != SPEC_VERSION {
        errors.push(format!(
            "version: expected {SPEC_VERSION}, got {}",
            file.version
        ));
    }

    let t = file.model.t;
    if t == 0 {
        errors.push("model.t: must be at least 1".into());
    }

    validate_model_keys(&file.model, &mut errors);

    if !file.solver.epsilon.is_finite() || file.solver.epsilon < 0.0 {
        errors.push(format!(
            "solver.epsilon: must be finite and non-negative, got {}",
            file.solver.epsilon
        ));
    }

    let norm = match file.solver.norm.as_str() {
        "linf" => NormKind::LInf,
        "l2" => NormKind::L2,
        other => {
            errors.push(format!("solver.norm: unknown norm `{other}`, expected linf or l2"));
            NormKind::LInf
        }
    };

    let initializer = match parse_init(&file.solver.init) {
        Ok(i) => i,
        Err(e) => {
            errors.push(format!("solver.init: {e}"));
            Initializer::Zeros
        }
    };

    if file.solver.workers == Some(0) {
        errors.push("solver.workers: must be at least 1".into());
    }
    if file.solver.max_sweeps == Some(0) {
        errors.push("solver.max_sweeps: must be at least 1".into());
    }

    // resolve the partition, expanding block_size into explicit intervals
    let partition = match (&file.solver.partition, file.solver.block_size) {
        (Some(_), Some(_)) => {
            errors.push("solver: give either partition or block_size, not both".into());
            None
        }
        (Some(text), None) => match parse_partition(text, t) {
            Ok(p) => Some(p),
            Err(e) => {
                errors.push(format!("solver.partition: {e} (t = {t})"));
                None
            }
        },
        (None, Some(size)) => match BlockPartition::uniform(t.max(1), size) {
            Ok(p) => Some(p),
            Err(e) => {
                errors.push(format!("solver.block_size: {e}"));
                None
            }
        },
        (None, None) => None,
    };
    if let Some(p) = &partition {
        file.solver.partition = Some(p.to_string());
        file.solver.block_size = None;
    }

    let (parallel_costs, serial_costs) = resolve_costs(&file.cost, t, &mut errors);

    if let Some(bench) = &file.bench {
        if bench.methods.is_empty() {
            errors.push("bench.methods: must list at least one method".into());
        }
        if bench.repeats == 0 {
            errors.push("bench.repeats: must be at least 1".into());
        }
    }

    if !errors.is_empty() {
        return Err(CliError::Spec(format!(
            "invalid spec:\n  - {}",
            errors.join("\n  - ")
        )));
    }

    // canonical view: defaults made explicit
    if file.output.trace.is_none() {
        file.output.trace = Some("trace.csv".into());
    }
    if file.output.summary.is_none() {
        file.output.summary = Some("summary.txt".into());
    }
    if file.output.table.is_none() {
        file.output.table = Some("bench.csv".into());
    }

    let input_seed = file
        .model
        .input_seed
        .unwrap_or_else(|| file.model.seed.wrapping_add(1));

    Ok(ExperimentSpec {
        method: file.solver.method,
        epsilon: file.solver.epsilon,
        norm,
        initializer,
        partition,
        max_sweeps: file.solver.max_sweeps,
        ground_truth: file.solver.ground_truth,
        workers: file.solver.workers,
        input_seed,
        parallel_costs,
        serial_costs,
        trace_path: PathBuf::from(file.output.trace.clone().unwrap()),
        summary_path: PathBuf::from(file.output.summary.clone().unwrap()),
        table_path: PathBuf::from(file.output.table.clone().unwrap()),
        bench_methods: file
            .bench
            .as_ref()
            .map(|b| b.methods.clone())
            .unwrap_or_default(),
        bench_repeats: file.bench.as_ref().map(|b| b.repeats).unwrap_or(1),
        file,
    })
}

fn validate_model_keys(m: &ModelSection, errors: &mut Vec<String>) {
    let kind = m.kind;
    let is_linear = kind == ModelKind::Linear;
    let is_mlp = matches!(kind, ModelKind::MlpChain | ModelKind::MlpDense);
    let is_made = kind == ModelKind::Made;

    if m.mask.is_some() && !is_linear {
        errors.push(format!("model.mask: only applies to kind = linear, not {}", kind.name()));
    }
    if m.activation.is_some() && !is_mlp {
        errors.push(format!(
            "model.activation: only applies to mlp kinds, not {}",
            kind.name()
        ));
    }
    if m.hidden.is_some() && !is_made {
        errors.push(format!("model.hidden: only applies to kind = made, not {}", kind.name()));
    }
    if let Some(h) = &m.hidden {
        if h.len() != 2 {
            errors.push(format!("model.hidden: expected exactly two widths, got {}", h.len()));
        }
    }
    if m.state_dim.is_some() && !(is_linear || is_mlp) {
        errors.push(format!(
            "model.state_dim: only applies to linear and mlp kinds, not {}",
            kind.name()
        ));
    }
    if m.input_dim.is_some() && !(is_linear || is_mlp) {
        errors.push(format!(
            "model.input_dim: only applies to linear and mlp kinds, not {}",
            kind.name()
        ));
    }
    if m.weight_scale.is_some() && !(is_linear || is_mlp) {
        errors.push(format!(
            "model.weight_scale: only applies to linear and mlp kinds, not {}",
            kind.name()
        ));
    }
    if let Some(mask) = &m.mask {
        if let Err(e) = parse_mask(mask) {
            errors.push(format!("model.mask: {e}"));
        }
    }
    if let Some(act) = &m.activation {
        if let Err(e) = parse_activation(act) {
            errors.push(format!("model.activation: {e}"));
        }
    }
}

fn resolve_costs(cost: &CostSection, t: usize, errors: &mut Vec<String>) -> (Vec<f64>, Vec<f64>) {
    if cost.uniform.is_some() && cost.parallel.is_some() {
        errors.push("cost: give either uniform or parallel, not both".into());
    }
    let parallel = if let Some(list) = &cost.parallel {
        if list.len() != t {
            errors.push(format!(
                "cost.parallel: {} entries for t = {t}",
                list.len()
            ));
        }
        list.clone()
    } else {
        let v = cost.uniform.unwrap_or(1.0);
        if !v.is_finite() || v <= 0.0 {
            errors.push(format!("cost.uniform: must be finite and positive, got {v}"));
        }
        vec![v; t.max(1)]
    };
    let serial = if let Some(list) = &cost.serial {
        if list.len() != t {
            errors.push(format!("cost.serial: {} entries for t = {t}", list.len()));
        }
        list.clone()
    } else {
        parallel.clone()
    };
    for v in parallel.iter().chain(&serial) {
        if !v.is_finite() || *v <= 0.0 {
            errors.push(format!("cost: entries must be finite and positive, got {v}"));
            break;
        }
    }
    (parallel, serial)
}

/// `"1-3,4-4,5-10"`, single indices allowed as `"4"`.
fn parse_partition(text: &str, t: usize) -> Result<BlockPartition, String> {
    let mut blocks = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            return Err("empty interval".into());
        }
        let (a, b) = match part.split_once('-') {
            Some((a, b)) => (
                a.trim().parse::<usize>().map_err(|_| format!("bad interval `{part}`"))?,
                b.trim().parse::<usize>().map_err(|_| format!("bad interval `{part}`"))?,
            ),
            None => {
                let v = part
                    .parse::<usize>()
                    .map_err(|_| format!("bad interval `{part}`"))?;
                (v, v)
            }
        };
        blocks.push((a, b));
    }
    BlockPartition::new(blocks, t).map_err(|e| e.to_string())
}

/// `"zeros"`, `"constant:<c>"` or `"random:<seed>:<scale>"`.
fn parse_init(text: &str) -> Result<Initializer, String> {
    if text == "zeros" {
        return Ok(Initializer::Zeros);
    }
    if let Some(c) = text.strip_prefix("constant:") {
        let c: f64 = c
            .parse()
            .map_err(|_| format!("bad constant in `{text}`"))?;
        if !c.is_finite() {
            return Err(format!("constant must be finite in `{text}`"));
        }
        return Ok(Initializer::Constant(c));
    }
    if let Some(rest) = text.strip_prefix("random:") {
        let (seed, scale) = rest
            .split_once(':')
            .ok_or_else(|| format!("expected random:<seed>:<scale>, got `{text}`"))?;
        let seed: u64 = seed.parse().map_err(|_| format!("bad seed in `{text}`"))?;
        let scale: f64 = scale.parse().map_err(|_| format!("bad scale in `{text}`"))?;
        if !scale.is_finite() || scale <= 0.0 {
            return Err(format!("scale must be positive in `{text}`"));
        }
        return Ok(Initializer::SeededRandom { seed, scale });
    }
    Err(format!(
        "unknown initializer `{text}`; expected zeros, constant:<c> or random:<seed>:<scale>"
    ))
}

fn parse_mask(text: &str) -> Result<SparsityMask, String> {
    match text {
        "full" => return Ok(SparsityMask::Full),
        "none" => return Ok(SparsityMask::None),
        _ => {}
    }
    if let Some(k) = text.strip_prefix("band:") {
        let k: usize = k.parse().map_err(|_| format!("bad bandwidth in `{text}`"))?;
        return Ok(SparsityMask::Band(k));
    }
    if let Some(p) = text.strip_prefix("random:") {
        let p: f64 = p.parse().map_err(|_| format!("bad density in `{text}`"))?;
        if !(0.0..=1.0).contains(&p) {
            return Err(format!("density must lie in [0, 1], got {p}"));
        }
        return Ok(SparsityMask::Random { density: p });
    }
    Err(format!(
        "unknown mask `{text}`; expected full, none, band:<k> or random:<p>"
    ))
}

fn parse_activation(text: &str) -> Result<Activation, String> {
    match text {
        "identity" => Ok(Activation::Identity),
        "tanh" => Ok(Activation::Tanh),
        "rectifier" => Ok(Activation::Rectifier),
        other => Err(format!(
            "unknown activation `{other}`; expected identity, tanh or rectifier"
        )),
    }
}
