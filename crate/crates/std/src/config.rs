//! Experiment configuration documents.
//!
//! A configuration is one JSON object:
//!
//! ```json
//! {
//!   "schema": 1,
//!   "experiment": "compare",
//!   "seed": 42,
//!   "model": { "family": "linear", "d": 2,
//!              "innovation": { "tag": "standard_normal" },
//!              "coefficients": [ { "at": [0, 0], "a": 1.0 }, { "at": [1, 0], "a": 0.5 } ] },
//!   "mc": { "reps": 200, "n_max": 64, "p": 1.5 },
//!   "format": "csv",
//!   "params": { "kind": "linear" }
//! }
//! ```
//!
//! `params` depends on the experiment; every field in it has a default. The
//! resolved document (defaults filled in, seed override applied, relative
//! paths made absolute) is echoed into every output.

use std::path::{Path, PathBuf};

use lilfields_core::bounds::{ShellKind, Target};
use lilfields_core::devcheck::Nonneg;
use lilfields_core::fields::{
    CenterMethod, CoefficientField, FieldModel, HolderFn, InnovationSpec, PairCoefficientField,
};
use lilfields_core::lattice::{LatticeIndex, Rect};
use lilfields_core::maxfun::McConfig;
use lilfields_core::sets::RectUnion;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::RunError;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentTag {
    Maxnorm,
    Bound,
    Compare,
    Verify,
    Orlicz,
    Hermite,
    Sets,
    Simulate,
}

impl ExperimentTag {
    pub const ALL: [ExperimentTag; 8] = [
        ExperimentTag::Maxnorm,
        ExperimentTag::Bound,
        ExperimentTag::Compare,
        ExperimentTag::Verify,
        ExperimentTag::Orlicz,
        ExperimentTag::Hermite,
        ExperimentTag::Sets,
        ExperimentTag::Simulate,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentTag::Maxnorm => "maxnorm",
            ExperimentTag::Bound => "bound",
            ExperimentTag::Compare => "compare",
            ExperimentTag::Verify => "verify",
            ExperimentTag::Orlicz => "orlicz",
            ExperimentTag::Hermite => "hermite",
            ExperimentTag::Sets => "sets",
            ExperimentTag::Simulate => "simulate",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
    /// Flat little-endian grid; `simulate` only.
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Iid,
    Linear,
    HolderOfLinear,
    Volterra,
    Hermite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coef {
    pub at: Vec<i64>,
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairCoef {
    pub s1: Vec<i64>,
    pub s2: Vec<i64>,
    pub a: f64,
}

fn standard_normal() -> InnovationSpec {
    InnovationSpec::StandardNormal
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub family: Family,
    pub d: usize,
    #[serde(default = "standard_normal")]
    pub innovation: InnovationSpec,
    /// Linear, Hölder and Hermite families.
    #[serde(default)]
    pub coefficients: Vec<Coef>,
    /// Volterra family.
    #[serde(default)]
    pub pairs: Vec<PairCoef>,
    /// Hölder family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<HolderFn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<CenterMethod>,
    /// Hermite family: `c_1, ..., c_Q`.
    #[serde(default)]
    pub hermite: Vec<f64>,
}

impl ModelSpec {
    pub fn iid_normal(d: usize) -> Self {
        ModelSpec {
            family: Family::Iid,
            d,
            innovation: InnovationSpec::StandardNormal,
            coefficients: vec![],
            pairs: vec![],
            g: None,
            center: None,
            hermite: vec![],
        }
    }

    fn index(&self, c: &[i64], what: &str) -> Result<LatticeIndex, RunError> {
        if c.len() != self.d {
            return Err(RunError::Validation(format!(
                "model: {what} {c:?} has {} coordinates, d = {}",
                c.len(),
                self.d
            )));
        }
        Ok(LatticeIndex::new(c.to_vec()))
    }

    fn coeffs(&self) -> Result<CoefficientField, RunError> {
        let entries = self
            .coefficients
            .iter()
            .map(|c| Ok((self.index(&c.at, "coefficient site")?, c.a)))
            .collect::<Result<Vec<_>, RunError>>()?;
        Ok(CoefficientField::new(self.d, entries)?)
    }

    fn unused(&self, field: &str, present: bool) -> Result<(), RunError> {
        if present {
            return Err(RunError::Validation(format!("model: `{field}` does not apply to the {:?} family", self.family)));
        }
        Ok(())
    }

    pub fn build(&self) -> Result<FieldModel, RunError> {
        let f = self.family;
        self.unused("coefficients", matches!(f, Family::Iid | Family::Volterra) && !self.coefficients.is_empty())?;
        self.unused("pairs", f != Family::Volterra && !self.pairs.is_empty())?;
        self.unused("g", f != Family::HolderOfLinear && self.g.is_some())?;
        self.unused("center", f != Family::HolderOfLinear && self.center.is_some())?;
        self.unused("hermite", f != Family::Hermite && !self.hermite.is_empty())?;
        let model = match f {
            Family::Iid => FieldModel::iid(self.innovation, self.d)?,
            Family::Linear => FieldModel::linear(self.coeffs()?, self.innovation)?,
            Family::HolderOfLinear => {
                let g = self.g.ok_or_else(|| RunError::Validation("model: holder_of_linear needs `g`".into()))?;
                FieldModel::holder_of_linear(self.coeffs()?, self.innovation, g, self.center.unwrap_or_default())?
            }
            Family::Volterra => {
                let entries = self
                    .pairs
                    .iter()
                    .map(|p| Ok((self.index(&p.s1, "pair site")?, self.index(&p.s2, "pair site")?, p.a)))
                    .collect::<Result<Vec<_>, RunError>>()?;
                FieldModel::volterra(PairCoefficientField::new(self.d, entries)?, self.innovation)?
            }
            Family::Hermite => {
                if !self.innovation.is_normal() {
                    return Err(RunError::Validation("model: the hermite family needs standard_normal innovations".into()));
                }
                FieldModel::hermite(self.coeffs()?, self.hermite.clone())?
            }
        };
        Ok(model)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSpec {
    pub reps: usize,
    pub n_max: u64,
    pub p: f64,
}

impl Default for McSpec {
    fn default() -> Self {
        McSpec { reps: 200, n_max: 64, p: 1.5 }
    }
}

impl McSpec {
    pub fn with_seed(&self, seed: u64) -> McConfig {
        McConfig { reps: self.reps, seed, n_max: self.n_max, p: self.p }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxnormMode {
    #[default]
    Both,
    Full,
    Dyadic,
}

/// Where a region sequence comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetsSource {
    /// Nested boxes with cardinalities about `c a^n`.
    Geometric { a: f64, count: usize },
    /// A JSON array of rectangle unions.
    File { path: PathBuf },
    Inline { regions: Vec<RectUnion> },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaxnormParams {
    pub mode: MaxnormMode,
    /// When nonempty: a saturation curve over `N = 2^k`.
    pub exponents: Vec<u32>,
    /// When present: the maximal function over this region sequence.
    pub sets: Option<SetsSource>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundParams {
    /// Defaults by model family.
    pub kind: Option<ShellKind>,
    pub target: Target,
    /// Replications per site of the physical-dependence profile.
    pub dep_reps: usize,
    /// Also write the dependence profile here as CSV.
    pub dep_out: Option<PathBuf>,
}

impl Default for BoundParams {
    fn default() -> Self {
        BoundParams { kind: None, target: Target::Rectangles, dep_reps: 10_000, dep_out: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareParams {
    pub kind: Option<ShellKind>,
    pub target: Target,
    pub dep_reps: usize,
    /// Block sides; defaults to `[mc.n_max]`.
    pub sides: Vec<u64>,
}

impl Default for CompareParams {
    fn default() -> Self {
        CompareParams { kind: None, target: Target::Rectangles, dep_reps: 10_000, sides: vec![] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "suite", rename_all = "snake_case", deny_unknown_fields)]
pub enum SuiteSpec {
    BercuTouati { innovation: InnovationSpec, n: usize, x: Vec<f64>, y: f64, reps: usize },
    Freedman { innovation: InnovationSpec, n: usize, x: Vec<f64>, y: f64, reps: usize },
    MaximalErgodic { model: ModelSpec, transform: Nonneg, n_max: u64, y: Vec<f64>, reps: usize, tail_reps: usize },
}

impl SuiteSpec {
    /// The three reference configurations.
    pub fn reference() -> Vec<SuiteSpec> {
        let sd = 10.0;
        vec![
            SuiteSpec::BercuTouati {
                innovation: InnovationSpec::StandardNormal,
                n: 100,
                x: (1..=10).map(|k| 0.5 * k as f64 * sd).collect(),
                y: 100.0,
                reps: 100_000,
            },
            SuiteSpec::Freedman {
                innovation: InnovationSpec::Rademacher,
                n: 64,
                x: (1..=8).map(|k| 4.0 * k as f64).collect(),
                y: 64.0,
                reps: 100_000,
            },
            SuiteSpec::MaximalErgodic {
                model: ModelSpec::iid_normal(2),
                transform: Nonneg::Abs,
                n_max: 64,
                y: vec![1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0],
                reps: 10_000,
                tail_reps: 1_000_000,
            },
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyParams {
    pub suites: Vec<SuiteSpec>,
}

impl Default for VerifyParams {
    fn default() -> Self {
        VerifyParams { suites: SuiteSpec::reference() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OrliczExperiment {
    /// File with one number per line (or in the first CSV column).
    pub samples: Option<PathBuf>,
    pub values: Vec<f64>,
    /// Exact norm of an innovation law by quadrature.
    pub law: Option<InnovationSpec>,
    pub p: f64,
    pub r: f64,
    pub tol: f64,
    pub nodes: usize,
}

impl Default for OrliczExperiment {
    fn default() -> Self {
        OrliczExperiment {
            samples: None,
            values: vec![],
            law: None,
            p: 2.0,
            r: 0.0,
            tol: lilfields_core::scalars::DEFAULT_TOL,
            nodes: 2048,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HermiteParams {
    /// `f = sum_q c_q H_q` given by `c_0, c_1, ...`.
    pub series: Option<Vec<f64>>,
    pub holder: Option<HolderFn>,
    pub order: usize,
    pub nodes: usize,
    pub d: usize,
    pub target: Target,
}

impl Default for HermiteParams {
    fn default() -> Self {
        HermiteParams {
            series: None,
            holder: None,
            order: lilfields_core::chaos::DEFAULT_ORDER,
            nodes: lilfields_core::chaos::DEFAULT_NODES,
            d: 1,
            target: Target::Rectangles,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthSpec {
    pub cardinalities: Vec<u64>,
    pub horizon: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometricSpec {
    pub d: usize,
    pub a: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SetsParams {
    pub union: Option<RectUnion>,
    pub union_file: Option<PathBuf>,
    pub j: u64,
    pub growth: Option<GrowthSpec>,
    pub geometric: Option<GeometricSpec>,
}

impl Default for SetsParams {
    fn default() -> Self {
        SetsParams { union: None, union_file: None, j: 1, growth: None, geometric: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateParams {
    pub block: Rect,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Params {
    Maxnorm(MaxnormParams),
    Bound(BoundParams),
    Compare(CompareParams),
    Verify(VerifyParams),
    Orlicz(OrliczExperiment),
    Hermite(HermiteParams),
    Sets(SetsParams),
    Simulate(SimulateParams),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema: u32,
    experiment: ExperimentTag,
    seed: Option<u64>,
    #[serde(default)]
    model: Option<ModelSpec>,
    #[serde(default)]
    mc: Option<McSpec>,
    #[serde(default)]
    format: Format,
    #[serde(default)]
    out: Option<PathBuf>,
    #[serde(default)]
    params: serde_json::Value,
}

/// A validated configuration with defaults applied.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub experiment: ExperimentTag,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc: Option<McSpec>,
    pub format: Format,
    /// Not echoed: the same experiment written elsewhere is the same artifact.
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub params: Params,
}

fn typed<T: DeserializeOwned + Default>(v: serde_json::Value, what: &str) -> Result<T, RunError> {
    if v.is_null() {
        return Ok(T::default());
    }
    serde_json::from_value(v).map_err(|e| RunError::Validation(format!("params for {what}: {e}")))
}

fn absolutize(p: &mut PathBuf, base: &Path) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

fn must_exist(p: &Path) -> Result<(), RunError> {
    if !p.is_file() {
        return Err(RunError::Validation(format!("referenced file {} does not exist", p.display())));
    }
    Ok(())
}

impl ExperimentConfig {
    /// Parse and resolve a configuration. `base` resolves relative paths.
    /// Unknown experiment tags are usage errors; everything else that fails
    /// is a validation error.
    pub fn from_json(text: &str, seed_override: Option<u64>, base: &Path) -> Result<Self, RunError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| RunError::Validation(format!("config is not valid JSON: {e}")))?;
        Self::from_value(value, seed_override, base)
    }

    pub fn from_value(value: serde_json::Value, seed_override: Option<u64>, base: &Path) -> Result<Self, RunError> {
        let tag = value
            .get("experiment")
            .ok_or_else(|| RunError::Validation("config lacks the `experiment` field".into()))?;
        match tag.as_str() {
            Some(s) if ExperimentTag::from_name(s).is_some() => {}
            _ => {
                let known: Vec<&str> = ExperimentTag::ALL.iter().map(|t| t.name()).collect();
                return Err(RunError::Usage(format!("unknown experiment {tag}; expected one of {}", known.join(", "))));
            }
        }
        let raw: RawConfig =
            serde_json::from_value(value).map_err(|e| RunError::Validation(format!("invalid config: {e}")))?;
        if raw.schema != SCHEMA {
            return Err(RunError::Validation(format!("unsupported schema {} (this build reads {SCHEMA})", raw.schema)));
        }
        let seed = seed_override
            .or(raw.seed)
            .ok_or_else(|| RunError::Validation("a seed is mandatory (config `seed` or --seed)".into()))?;
        let name = raw.experiment.name();
        let mut params = match raw.experiment {
            ExperimentTag::Maxnorm => Params::Maxnorm(typed(raw.params, name)?),
            ExperimentTag::Bound => Params::Bound(typed(raw.params, name)?),
            ExperimentTag::Compare => Params::Compare(typed(raw.params, name)?),
            ExperimentTag::Verify => Params::Verify(typed(raw.params, name)?),
            ExperimentTag::Orlicz => Params::Orlicz(typed(raw.params, name)?),
            ExperimentTag::Hermite => Params::Hermite(typed(raw.params, name)?),
            ExperimentTag::Sets => Params::Sets(typed(raw.params, name)?),
            ExperimentTag::Simulate => Params::Simulate(
                serde_json::from_value(raw.params).map_err(|e| RunError::Validation(format!("params for {name}: {e}")))?,
            ),
        };
        match &mut params {
            Params::Maxnorm(MaxnormParams { sets: Some(SetsSource::File { path }), .. }) => {
                absolutize(path, base);
                must_exist(path)?;
            }
            Params::Bound(BoundParams { dep_out: Some(path), .. }) => absolutize(path, base),
            Params::Orlicz(OrliczExperiment { samples: Some(path), .. }) => {
                absolutize(path, base);
                must_exist(path)?;
            }
            Params::Sets(SetsParams { union_file: Some(path), .. }) => {
                absolutize(path, base);
                must_exist(path)?;
            }
            _ => {}
        }
        let needs_model = matches!(
            raw.experiment,
            ExperimentTag::Maxnorm | ExperimentTag::Bound | ExperimentTag::Compare | ExperimentTag::Simulate
        );
        if needs_model && raw.model.is_none() {
            return Err(RunError::Validation(format!("the {name} experiment needs a `model`")));
        }
        if let Some(m) = &raw.model {
            m.build()?;
        }
        let needs_mc = matches!(raw.experiment, ExperimentTag::Maxnorm | ExperimentTag::Compare);
        let mc = if needs_mc { Some(raw.mc.unwrap_or_default()) } else { raw.mc };
        if raw.format == Format::Binary && raw.experiment != ExperimentTag::Simulate {
            return Err(RunError::Validation("binary output is only available for simulate".into()));
        }
        let mut out = raw.out;
        if let Some(p) = &mut out {
            absolutize(p, base);
        }
        Ok(ExperimentConfig { schema: raw.schema, experiment: raw.experiment, seed, model: raw.model, mc, format: raw.format, out, params })
    }

    /// The resolved document echoed into outputs.
    pub fn echo(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn model(&self) -> Result<FieldModel, RunError> {
        self.model.as_ref().ok_or_else(|| RunError::Validation("no model in config".into()))?.build()
    }

    pub fn mc(&self) -> McConfig {
        self.mc.unwrap_or_default().with_seed(self.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn base() -> PathBuf {
        PathBuf::from("/")
    }

    #[test]
    fn defaults_are_filled_and_echoed() {
        let v = json!({"schema": 1, "experiment": "verify", "seed": 3});
        let c = ExperimentConfig::from_value(v, None, &base()).unwrap();
        let echo = c.echo();
        assert_eq!(echo["params"]["suites"].as_array().unwrap().len(), 3);
        assert_eq!(echo["seed"], 3);
    }

    #[test]
    fn seed_is_mandatory_and_overridable() {
        let v = json!({"schema": 1, "experiment": "hermite", "params": {"series": [0, 0, 1]}});
        assert!(matches!(ExperimentConfig::from_value(v.clone(), None, &base()), Err(RunError::Validation(_))));
        assert_eq!(ExperimentConfig::from_value(v, Some(9), &base()).unwrap().seed, 9);
    }

    #[test]
    fn unknown_tag_is_usage() {
        let v = json!({"schema": 1, "experiment": "plot", "seed": 1});
        assert!(matches!(ExperimentConfig::from_value(v, None, &base()), Err(RunError::Usage(_))));
    }

    #[test]
    fn model_specs_build() {
        let m: ModelSpec = serde_json::from_value(json!({
            "family": "volterra", "d": 1, "innovation": {"tag": "rademacher"},
            "pairs": [{"s1": [0], "s2": [1], "a": 1.0}]
        }))
        .unwrap();
        assert_eq!(m.build().unwrap().radius(), 1);
        let bad: ModelSpec = serde_json::from_value(json!({
            "family": "linear", "d": 2, "coefficients": [{"at": [0], "a": 1.0}]
        }))
        .unwrap();
        assert!(bad.build().is_err());
        let h: ModelSpec = serde_json::from_value(json!({
            "family": "holder_of_linear", "d": 1, "g": {"tag": "abs_power", "gamma": 0.5},
            "coefficients": [{"at": [0], "a": 1.0}]
        }))
        .unwrap();
        assert_eq!(h.build().unwrap().tag(), "holder_of_linear");
    }

    #[test]
    fn missing_files_fail_at_parse_time() {
        let v = json!({"schema": 1, "experiment": "orlicz", "seed": 1, "params": {"samples": "nope.txt"}});
        assert!(matches!(ExperimentConfig::from_value(v, None, Path::new("/nonexistent")), Err(RunError::Validation(_))));
    }
}
