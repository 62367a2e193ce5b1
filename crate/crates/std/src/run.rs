//! Experiment pipelines: simulate, estimate, bound, compare, report.

use std::path::PathBuf;

use lilfields_core::bounds::{model_bound, BoundReport, ShellKind, Target};
use lilfields_core::chaos::{hermite_coeffs, hermite_series, series_constant, HermiteCoeffs, SeriesConstant};
use lilfields_core::devcheck::{check_bercu_touati, check_freedman, check_maximal_ergodic, VerifyReport};
use lilfields_core::fields::{rep_seed, simulate_block, FieldModel};
use lilfields_core::maxfun::{
    estimate_lp_norm_with, full_and_dyadic, maximal_function_sets, saturation_curve, MaxEstimate,
};
use lilfields_core::projections::{dependence_profile, DependenceProfile};
use lilfields_core::scalars::{orlicz_norm_law, orlicz_norm_samples_se, OrliczParams};
use lilfields_core::sets::{
    check_partition_bounds, geometric_union_sequence, validate_growth, GrowthCertificate, PartitionReport, Region,
    RectUnion, SetSequence,
};
use lilfields_core::Executor;
use serde::Serialize;

use crate::config::*;
use crate::formats::{self, fmt_f64, json_document, Provenance, Table};
use crate::RunError;

/// What a run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    /// The main output document.
    pub bytes: Vec<u8>,
    /// Additional files requested by the configuration.
    pub extra: Vec<(PathBuf, Vec<u8>)>,
    /// Some verification check did not pass.
    pub checks_failed: bool,
}

impl Artifact {
    fn main(bytes: Vec<u8>) -> Self {
        Artifact { bytes, extra: vec![], checks_failed: false }
    }
}

pub fn run(cfg: &ExperimentConfig, exec: &dyn Executor) -> Result<Artifact, RunError> {
    let prov = Provenance::new(cfg.echo());
    match &cfg.params {
        Params::Maxnorm(p) => maxnorm(cfg, p, exec, &prov),
        Params::Bound(p) => bound(cfg, p, exec, &prov),
        Params::Compare(p) => compare(cfg, p, exec, &prov),
        Params::Verify(p) => verify(cfg, p, exec, &prov),
        Params::Orlicz(p) => orlicz(cfg, p, &prov),
        Params::Hermite(p) => hermite(cfg, p, &prov),
        Params::Sets(p) => sets(cfg, p, &prov),
        Params::Simulate(p) => simulate(cfg, p, &prov),
    }
}

fn finite(x: f64, what: &str) -> Result<f64, RunError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(RunError::Numeric(format!("{what} is not finite ({x})")))
    }
}

#[derive(Debug, Clone, Serialize)]
struct MaxRow {
    model: &'static str,
    mode: &'static str,
    d: usize,
    p: f64,
    /// `N = 2^k` on saturation curves.
    k: Option<u32>,
    /// Block side or number of regions.
    truncation: u64,
    reps: usize,
    estimate: f64,
    se: f64,
    seed: u64,
}

fn max_row(model: &FieldModel, mode: &'static str, p: f64, k: Option<u32>, e: &MaxEstimate, seed: u64) -> MaxRow {
    MaxRow {
        model: model.tag(),
        mode,
        d: model.dim(),
        p,
        k,
        truncation: e.truncation,
        reps: e.reps,
        estimate: e.lp_estimate,
        se: e.se,
        seed,
    }
}

fn load_sequence(src: &SetsSource, d: usize) -> Result<SetSequence, RunError> {
    let unions: Vec<RectUnion> = match src {
        SetsSource::Geometric { a, count } => return Ok(geometric_union_sequence(d, *a, *count)?),
        SetsSource::File { path } => {
            let text = std::fs::read_to_string(path).map_err(|e| RunError::Validation(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| RunError::Validation(format!("{}: expected an array of unions: {e}", path.display())))?
        }
        SetsSource::Inline { regions } => regions.clone(),
    };
    Ok(SetSequence::new(unions.into_iter().map(Region::Boxes).collect())?.certify()?)
}

fn maxnorm(cfg: &ExperimentConfig, p: &MaxnormParams, exec: &dyn Executor, prov: &Provenance) -> Result<Artifact, RunError> {
    let model = cfg.model()?;
    let mc = cfg.mc();
    mc.validate()?;
    let mut rows = Vec::new();
    if let Some(src) = &p.sets {
        let seq = load_sequence(src, model.dim())?;
        if seq.dim() != model.dim() {
            return Err(RunError::Validation("region sequence and model differ in dimension".into()));
        }
        let sampler = |s: u64| maximal_function_sets(&model, &seq, s).expect("validated model and sequence");
        let est = estimate_lp_norm_with(exec, sampler, mc.p, mc.reps, mc.seed, seq.regions.len() as u64)?;
        rows.push(max_row(&model, "sets", mc.p, None, &est, mc.seed));
    } else if !p.exponents.is_empty() {
        let (curve, _) = saturation_curve(exec, &model, mc.p, &p.exponents, mc.reps, mc.seed)?;
        for (k, e) in p.exponents.iter().zip(&curve) {
            rows.push(max_row(&model, "full", mc.p, Some(*k), e, mc.seed));
        }
    } else {
        let (full, dy) = full_and_dyadic(exec, &model, &mc)?;
        if p.mode != MaxnormMode::Dyadic {
            rows.push(max_row(&model, "full", mc.p, None, &full, mc.seed));
        }
        if p.mode != MaxnormMode::Full {
            rows.push(max_row(&model, "dyadic", mc.p, None, &dy, mc.seed));
        }
    }
    for r in &rows {
        finite(r.estimate, "maximal-function estimate")?;
    }
    Ok(Artifact::main(match cfg.format {
        Format::Csv => {
            let mut t = Table::new(
                Some(prov),
                &["model", "mode", "d", "p", "k", "truncation", "reps", "estimate", "se", "seed"],
            );
            for r in &rows {
                t.row([
                    r.model.to_string(),
                    r.mode.to_string(),
                    r.d.to_string(),
                    fmt_f64(r.p),
                    r.k.map_or(String::new(), |k| k.to_string()),
                    r.truncation.to_string(),
                    r.reps.to_string(),
                    fmt_f64(r.estimate),
                    fmt_f64(r.se),
                    r.seed.to_string(),
                ]);
            }
            t.finish()
        }
        _ => json_document(prov, &rows),
    }))
}

fn default_kind(model: &FieldModel) -> ShellKind {
    match model {
        FieldModel::Iid { .. } => ShellKind::PhysDep,
        FieldModel::Linear { .. } => ShellKind::Linear,
        FieldModel::HolderOfLinear { .. } => ShellKind::Holder,
        FieldModel::Volterra { .. } => ShellKind::Volterra,
        FieldModel::Hermite { .. } => ShellKind::Hermite,
    }
}

fn bound_for(
    model: &FieldModel,
    kind: Option<ShellKind>,
    target: Target,
    dep_reps: usize,
    exec: &dyn Executor,
    seed: u64,
) -> Result<(BoundReport, Option<DependenceProfile>), RunError> {
    let kind = kind.unwrap_or_else(|| default_kind(model));
    let dep = if kind == ShellKind::PhysDep {
        let r = target.log_weight(model.dim());
        Some(dependence_profile(model, r, model.radius(), exec, dep_reps, seed)?)
    } else {
        None
    };
    let rep = model_bound(model, kind, target, dep.as_ref())?;
    finite(rep.total, "bound series")?;
    Ok((rep, dep))
}

fn bound(cfg: &ExperimentConfig, p: &BoundParams, exec: &dyn Executor, prov: &Provenance) -> Result<Artifact, RunError> {
    let model = cfg.model()?;
    let (rep, dep) = bound_for(&model, p.kind, p.target, p.dep_reps, exec, cfg.seed)?;
    let bytes = match cfg.format {
        Format::Csv => {
            let mut t = Table::new(Some(prov), &["j", "weight", "shell_norm", "term", "partial_sum"]);
            for j in 0..rep.terms.len() {
                t.row([
                    j.to_string(),
                    fmt_f64(rep.weights[j]),
                    fmt_f64(rep.shell_norms[j]),
                    fmt_f64(rep.terms[j]),
                    fmt_f64(rep.partial_sums[j]),
                ]);
            }
            t.finish()
        }
        _ => json_document(prov, &rep),
    };
    let mut art = Artifact::main(bytes);
    if let (Some(path), Some(dep)) = (&p.dep_out, &dep) {
        art.extra.push((path.clone(), formats::dependence_csv(dep, Some(prov))));
    }
    Ok(art)
}

#[derive(Debug, Clone, Serialize)]
struct CompareRow {
    n_max: u64,
    empirical_lp: f64,
    se: f64,
    bound_series: f64,
    /// Empirical norm over the constant-free bound.
    ratio_unitless: f64,
}

fn compare(cfg: &ExperimentConfig, p: &CompareParams, exec: &dyn Executor, prov: &Provenance) -> Result<Artifact, RunError> {
    let model = cfg.model()?;
    let mc = cfg.mc();
    let (rep, _) = bound_for(&model, p.kind, p.target, p.dep_reps, exec, cfg.seed)?;
    let sides = if p.sides.is_empty() { vec![mc.n_max] } else { p.sides.clone() };
    let mut rows = Vec::new();
    for n in sides {
        let (full, _) = full_and_dyadic(exec, &model, &lilfields_core::maxfun::McConfig { n_max: n, ..mc })?;
        rows.push(CompareRow {
            n_max: n,
            empirical_lp: finite(full.lp_estimate, "empirical norm")?,
            se: full.se,
            bound_series: rep.total,
            ratio_unitless: full.lp_estimate / rep.total,
        });
    }
    Ok(Artifact::main(match cfg.format {
        Format::Csv => {
            let mut t = Table::new(Some(prov), &["n_max", "empirical_lp", "se", "bound_series", "ratio_unitless"]);
            for r in &rows {
                t.row([
                    r.n_max.to_string(),
                    fmt_f64(r.empirical_lp),
                    fmt_f64(r.se),
                    fmt_f64(r.bound_series),
                    fmt_f64(r.ratio_unitless),
                ]);
            }
            t.finish()
        }
        _ => {
            #[derive(Serialize)]
            struct Out<'a> {
                rows: &'a [CompareRow],
                bound: &'a BoundReport,
            }
            json_document(prov, &Out { rows: &rows, bound: &rep })
        }
    }))
}

pub fn run_suite(s: &SuiteSpec, exec: &dyn Executor, seed: u64) -> Result<VerifyReport, RunError> {
    Ok(match s {
        SuiteSpec::BercuTouati { innovation, n, x, y, reps } => {
            check_bercu_touati(exec, *innovation, *n, x, *y, *reps, seed)?
        }
        SuiteSpec::Freedman { innovation, n, x, y, reps } => check_freedman(exec, *innovation, *n, x, *y, *reps, seed)?,
        SuiteSpec::MaximalErgodic { model, transform, n_max, y, reps, tail_reps } => {
            check_maximal_ergodic(exec, &model.build()?, *transform, *n_max, y, *reps, *tail_reps, seed)?
        }
    })
}

fn verify(cfg: &ExperimentConfig, p: &VerifyParams, exec: &dyn Executor, prov: &Provenance) -> Result<Artifact, RunError> {
    let reports = p
        .suites
        .iter()
        .enumerate()
        .map(|(k, s)| run_suite(s, exec, rep_seed(cfg.seed, k)))
        .collect::<Result<Vec<_>, _>>()?;
    let verdict = reports.iter().all(|r| r.all_pass && r.empirical_monotone);
    let bytes = match cfg.format {
        Format::Csv => formats::verify_csv(&reports, Some(prov)),
        _ => {
            #[derive(Serialize)]
            struct Out<'a> {
                verdict: bool,
                reports: &'a [VerifyReport],
            }
            json_document(prov, &Out { verdict, reports: &reports })
        }
    };
    Ok(Artifact { bytes, extra: vec![], checks_failed: !verdict })
}

#[derive(Debug, Clone, Serialize)]
struct OrliczOut {
    norm: f64,
    se: f64,
    /// Number of samples; zero for quadrature.
    n: usize,
    p: f64,
    r: f64,
}

fn orlicz(cfg: &ExperimentConfig, p: &OrliczExperiment, prov: &Provenance) -> Result<Artifact, RunError> {
    let params = OrliczParams::gauge(p.p, p.r)?;
    let sources = p.samples.is_some() as u8 + !p.values.is_empty() as u8 + p.law.is_some() as u8;
    if sources != 1 {
        return Err(RunError::Validation("orlicz needs exactly one of `samples`, `values`, `law`".into()));
    }
    let out = if let Some(law) = p.law {
        law.validate()?;
        let v = orlicz_norm_law(&law.law(), params, p.nodes)?;
        OrliczOut { norm: v, se: 0.0, n: 0, p: p.p, r: p.r }
    } else {
        let xs = match &p.samples {
            Some(path) => formats::read_samples(path)?,
            None => p.values.clone(),
        };
        let est = orlicz_norm_samples_se(&xs, params, p.tol)?;
        OrliczOut { norm: est.mean, se: est.se, n: xs.len(), p: p.p, r: p.r }
    };
    finite(out.norm, "Orlicz norm")?;
    Ok(Artifact::main(match cfg.format {
        Format::Csv => {
            let mut t = Table::new(Some(prov), &["norm", "se", "n", "p", "r"]);
            t.row([fmt_f64(out.norm), fmt_f64(out.se), out.n.to_string(), fmt_f64(out.p), fmt_f64(out.r)]);
            t.finish()
        }
        _ => json_document(prov, &out),
    }))
}

fn hermite(cfg: &ExperimentConfig, p: &HermiteParams, prov: &Provenance) -> Result<Artifact, RunError> {
    let coeffs: HermiteCoeffs = match (&p.series, &p.holder) {
        (Some(c), None) => {
            let (c0, rest) = c.split_first().ok_or_else(|| RunError::Validation("empty `series`".into()))?;
            let rest = rest.to_vec();
            hermite_coeffs(|x| c0 + hermite_series(&rest, x), p.order, p.nodes)
        }
        (None, Some(g)) => {
            g.validate()?;
            hermite_coeffs(|x| g.eval(x), p.order, p.nodes)
        }
        _ => return Err(RunError::Validation("hermite needs exactly one of `series`, `holder`".into())),
    };
    let constant: SeriesConstant = series_constant(&coeffs.c, p.d, p.target.chaos_profile());
    finite(constant.value, "series constant")?;
    Ok(Artifact::main(match cfg.format {
        Format::Csv => {
            let mut t = Table::new(Some(prov), &["q", "coefficient"]);
            t.row(["0".to_string(), fmt_f64(coeffs.c0)]);
            for (k, c) in coeffs.c.iter().enumerate() {
                t.row([(k + 1).to_string(), fmt_f64(*c)]);
            }
            t.finish()
        }
        _ => {
            #[derive(Serialize)]
            struct Out<'a> {
                coefficients: &'a HermiteCoeffs,
                series_constant: SeriesConstant,
            }
            json_document(prov, &Out { coefficients: &coeffs, series_constant: constant })
        }
    }))
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
enum GrowthOutcome {
    Certified { certificate: GrowthCertificate },
    Rejected { reason: String },
}

fn growth_outcome(r: lilfields_core::Result<GrowthCertificate>) -> Result<GrowthOutcome, RunError> {
    match r {
        Ok(certificate) => Ok(GrowthOutcome::Certified { certificate }),
        Err(e @ lilfields_core::Error::Validation { .. }) => Ok(GrowthOutcome::Rejected { reason: e.to_string() }),
        Err(e) => Err(e.into()),
    }
}

#[derive(Debug, Clone, Serialize, Default)]
struct SetsOut {
    #[serde(skip_serializing_if = "Option::is_none")]
    partition: Option<PartitionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    growth: Option<GrowthOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    geometric_cardinalities: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    geometric_certificate: Option<GrowthCertificate>,
}

fn sets(cfg: &ExperimentConfig, p: &SetsParams, prov: &Provenance) -> Result<Artifact, RunError> {
    let mut out = SetsOut::default();
    let union = match (&p.union, &p.union_file) {
        (Some(_), Some(_)) => return Err(RunError::Validation("give `union` or `union_file`, not both".into())),
        (Some(u), None) => Some(u.clone()),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| RunError::Validation(format!("{}: {e}", path.display())))?;
            Some(serde_json::from_str(&text).map_err(|e| RunError::Validation(format!("{}: {e}", path.display())))?)
        }
        (None, None) => None,
    };
    if let Some(u) = union {
        out.partition = Some(check_partition_bounds(&u, p.j)?);
    }
    if let Some(g) = &p.growth {
        out.growth = Some(growth_outcome(validate_growth(&g.cardinalities, g.horizon.unwrap_or(g.cardinalities.len())))?);
    }
    if let Some(g) = &p.geometric {
        let seq = geometric_union_sequence(g.d, g.a, g.count)?;
        out.geometric_cardinalities = Some(seq.cardinalities());
        out.geometric_certificate = seq.certificate;
    }
    if out.partition.is_none() && out.growth.is_none() && out.geometric_cardinalities.is_none() {
        return Err(RunError::Validation("sets needs at least one of `union`, `union_file`, `growth`, `geometric`".into()));
    }
    Ok(Artifact::main(match cfg.format {
        Format::Csv => {
            let mut t = Table::new(Some(prov), &["residue", "count", "lower_ok", "upper_ok"]);
            if let Some(r) = &out.partition {
                for c in &r.residues {
                    t.row([c.residue.to_string(), c.count.to_string(), c.lower_ok.to_string(), c.upper_ok.to_string()]);
                }
            }
            t.finish()
        }
        _ => json_document(prov, &out),
    }))
}

fn simulate(cfg: &ExperimentConfig, p: &SimulateParams, prov: &Provenance) -> Result<Artifact, RunError> {
    let model = cfg.model()?;
    let grid = simulate_block(&model, &p.block, cfg.seed)?;
    let mut art = Artifact::main(match cfg.format {
        Format::Binary => {
            let mut buf = Vec::new();
            formats::write_grid_binary(&grid, &mut buf).expect("in-memory write");
            buf
        }
        Format::Csv => formats::grid_csv(&grid, Some(prov)),
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                rect: &'a lilfields_core::Rect,
                values: &'a [f64],
            }
            json_document(prov, &Out { rect: grid.rect(), values: grid.values() })
        }
    });
    if cfg.format == Format::Binary {
        // the binary layout has no room for provenance; it goes in a sidecar
        if let Some(out) = &cfg.out {
            let mut side = out.clone().into_os_string();
            side.push(".json");
            art.extra.push((side.into(), json_document(prov, &serde_json::json!({"file": out}))));
        }
    }
    Ok(art)
}
