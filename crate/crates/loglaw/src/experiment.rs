//! Declarative Monte Carlo experiments over the process engines, with a
//! deterministic parallel runner and a fixed CSV output schema.
//!
//! A single JSON document describes the experiment (density, net, bandwidth
//! schedule, grids, seeds); the runner fans `(seed, replication, n)` cells
//! out to workers, merges results by cell key, and emits
//! `experiment_id,seed,n,h,statistic,value,aux` rows plus a JSON summary
//! with per-statistic medians. Identical configs produce byte-identical CSV
//! regardless of worker count.

use crate::density::{Density, GaussComponent, Marginal};
use crate::error::{Error, Result};
use crate::functions::{
    anchored_rect_net, build_net, interval_endpoints, interval_net, ClassSpec,
    FunctionDescriptor, FunctionNet, Kernel1d,
};
use crate::limit::LimitBallModel;
use crate::poisson;
use crate::process::{
    self, centering_terms, increment_process, kde, local_empirical_with, oscillation_modulus,
    BandwidthSchedule, IndexedSample, Normalization, ScheduleReport, SortedUniform,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};

// ---------------------------------------------------------------------------
// Config types

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentId {
    #[serde(rename = "EXP-A")]
    ExpA,
    #[serde(rename = "EXP-B")]
    ExpB,
    #[serde(rename = "EXP-C")]
    ExpC,
    #[serde(rename = "EXP-D")]
    ExpD,
    #[serde(rename = "DIAG-COV")]
    DiagCov,
    #[serde(rename = "DIAG-FACT6")]
    DiagFact6,
    #[serde(rename = "DIAG-GAUSS")]
    DiagGauss,
    #[serde(rename = "DIAG-LDP")]
    DiagLdp,
}

impl ExperimentId {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentId::ExpA => "EXP-A",
            ExperimentId::ExpB => "EXP-B",
            ExperimentId::ExpC => "EXP-C",
            ExperimentId::ExpD => "EXP-D",
            ExperimentId::DiagCov => "DIAG-COV",
            ExperimentId::DiagFact6 => "DIAG-FACT6",
            ExperimentId::DiagGauss => "DIAG-GAUSS",
            ExperimentId::DiagLdp => "DIAG-LDP",
        }
    }
}

/// Overrides for the declared positivity region `J` and margin `gamma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySpec {
    UniformBox {
        lo: Vec<f64>,
        hi: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        region: Option<RegionSpec>,
    },
    Triangular {
        lo: f64,
        hi: f64,
        mode: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        region: Option<RegionSpec>,
    },
    TruncGaussMix {
        lo: f64,
        hi: f64,
        components: Vec<GaussComponent>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        region: Option<RegionSpec>,
    },
    Product {
        marginals: Vec<Marginal>,
        region: RegionSpec,
    },
}

impl DensitySpec {
    pub fn build(&self) -> Result<Density> {
        let with_region = |marginals: Vec<Marginal>, region: &Option<RegionSpec>, fallback: Density| {
            match region {
                Some(r) => Density::new(marginals, r.lo.clone(), r.hi.clone(), r.gamma),
                None => Ok(fallback),
            }
        };
        match self {
            DensitySpec::UniformBox { lo, hi, region } => {
                let base = Density::uniform_box(lo.clone(), hi.clone())?;
                let marginals: Vec<Marginal> = lo
                    .iter()
                    .zip(hi)
                    .map(|(&a, &b)| Marginal::Uniform { lo: a, hi: b })
                    .collect();
                with_region(marginals, region, base)
            }
            DensitySpec::Triangular { lo, hi, mode, region } => {
                let base = Density::triangular(*lo, *hi, *mode)?;
                with_region(
                    vec![Marginal::Triangular { lo: *lo, hi: *hi, mode: *mode }],
                    region,
                    base,
                )
            }
            DensitySpec::TruncGaussMix { lo, hi, components, region } => {
                let base = Density::trunc_gauss_mix(*lo, *hi, components.clone())?;
                with_region(
                    vec![Marginal::TruncGaussMix {
                        lo: *lo,
                        hi: *hi,
                        components: components.clone(),
                    }],
                    region,
                    base,
                )
            }
            DensitySpec::Product { marginals, region } => Density::product(
                marginals.clone(),
                region.lo.clone(),
                region.hi.clone(),
                region.gamma,
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NetSpec {
    /// `{1_{[0, t]}}` at explicit endpoints.
    Intervals { ts: Vec<f64> },
    /// Covering net of the interval class at radius `mesh_delta`.
    IntervalsCover { mesh_delta: f64 },
    /// Anchored rectangles `[-1/2, u] x [-1/2, v]`.
    AnchoredRects { us: Vec<f64>, vs: Vec<f64> },
    /// A single product kernel.
    SingleKernel { kernel: Kernel1d, dim: usize },
    /// Covering net of the rectangle class in `I^2`.
    RectanglesCover { mesh_delta: f64 },
    /// Arbitrary explicit members.
    Explicit { members: Vec<FunctionDescriptor> },
}

impl NetSpec {
    pub fn build(&self) -> Result<FunctionNet> {
        match self {
            NetSpec::Intervals { ts } => interval_net(ts),
            NetSpec::IntervalsCover { mesh_delta } => {
                build_net(&ClassSpec::Intervals1d, *mesh_delta)
            }
            NetSpec::AnchoredRects { us, vs } => anchored_rect_net(us, vs),
            NetSpec::SingleKernel { kernel, dim } => build_net(
                &ClassSpec::SingleKernel { kernel: *kernel, dim: *dim },
                1.0,
            ),
            NetSpec::RectanglesCover { mesh_delta } => {
                build_net(&ClassSpec::Rectangles2d, *mesh_delta)
            }
            NetSpec::Explicit { members } => {
                FunctionNet::from_members("explicit", members.clone(), None)
            }
        }
    }
}

/// Relative t-grid density for the increment experiments: `per_window` grid
/// points per bandwidth-length window, spanning `[0, 1 - h]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TGridSpec {
    pub per_window: u32,
}

/// Inclusive rectangular grid: `counts[i]` points along `[lo[i], hi[i]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZGridSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub counts: Vec<u32>,
}

impl ZGridSpec {
    pub fn expand(&self) -> Result<Vec<Vec<f64>>> {
        let d = self.lo.len();
        if d == 0 || self.hi.len() != d || self.counts.len() != d {
            return Err(Error::Config("z grid dimensions mismatch".into()));
        }
        if self.counts.iter().any(|&c| c == 0) {
            return Err(Error::Config("z grid needs at least one point per axis".into()));
        }
        let axes: Vec<Vec<f64>> = (0..d)
            .map(|i| {
                let c = self.counts[i] as usize;
                if c == 1 {
                    vec![0.5 * (self.lo[i] + self.hi[i])]
                } else {
                    (0..c)
                        .map(|k| {
                            self.lo[i]
                                + (self.hi[i] - self.lo[i]) * k as f64 / (c - 1) as f64
                        })
                        .collect()
                }
            })
            .collect();
        let mut out = Vec::new();
        let mut odo = vec![0usize; d];
        loop {
            out.push((0..d).map(|i| axes[i][odo[i]]).collect());
            let mut i = d;
            loop {
                if i == 0 {
                    return Ok(out);
                }
                i -= 1;
                odo[i] += 1;
                if odo[i] < axes[i].len() {
                    break;
                }
                odo[i] = 0;
            }
        }
    }
}

/// The target element of the limit ball for part-(b) style statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ThetaSpec {
    /// `theta_l = level * int g_l`, the functional of the constant slope
    /// `xi = level` (energy `level^2 / 2` on a unit-volume domain).
    ConstantXi { level: f64 },
    /// `theta = Sigma a` for explicit coefficients.
    Coefficients { a: Vec<f64> },
}

impl ThetaSpec {
    pub fn resolve(&self, net: &FunctionNet, model: &LimitBallModel) -> Result<Vec<f64>> {
        let theta = match self {
            ThetaSpec::ConstantXi { level } => net
                .members
                .iter()
                .map(|g| level * g.integral())
                .collect::<Vec<f64>>(),
            ThetaSpec::Coefficients { a } => {
                if a.len() != net.len() {
                    return Err(Error::Config("theta coefficient length mismatch".into()));
                }
                let q = net.len();
                let gram = net.gram()?;
                (0..q)
                    .map(|l| (0..q).map(|k| gram[l * q + k] * a[k]).sum())
                    .collect()
            }
        };
        let rate = model.rate(&theta);
        if rate > 0.5 * (1.0 + 1e-9) {
            return Err(Error::Config(format!(
                "target theta lies outside the unit ball: I(theta) = {rate}"
            )));
        }
        Ok(theta)
    }
}

fn default_reps() -> u64 {
    1
}

/// Declarative experiment description. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment_id: ExperimentId,
    pub density: DensitySpec,
    pub net: NetSpec,
    pub schedule: BandwidthSchedule,
    pub n_list: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<TGridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_grid: Option<ZGridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_theta: Option<ThetaSpec>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_reps")]
    pub reps_per_seed: u64,
    /// Monte Carlo replications for the DIAG experiments.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_reps: Option<u64>,
    /// Evaluation point for the DIAG experiments.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_point: Option<Vec<f64>>,
    /// Evaluation points for DIAG-FACT6.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_list: Option<Vec<Vec<f64>>>,
    /// Box-event radii for DIAG-FACT6, one row per event, one radius per z.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_radii: Option<Vec<Vec<f64>>>,
    /// Threshold for DIAG-LDP.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

// ---------------------------------------------------------------------------
// Result rows

/// One CSV output row in the shared schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment_id: String,
    pub seed: u64,
    pub n: u64,
    pub h: f64,
    pub statistic: String,
    pub value: f64,
    pub aux: String,
}

fn row_key(r: &ResultRow) -> (String, u64, u64, String, String) {
    (
        r.experiment_id.clone(),
        r.seed,
        r.n,
        r.statistic.clone(),
        r.aux.clone(),
    )
}

/// Completed run: ordered rows plus the JSON summary document.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    pub summary: serde_json::Value,
}

// ---------------------------------------------------------------------------
// Validated plan

struct Plan {
    id: ExperimentId,
    density: Density,
    net: FunctionNet,
    model: Option<LimitBallModel>,
    schedule: BandwidthSchedule,
    schedule_report: ScheduleReport,
    n_list: Vec<u64>,
    hs: Vec<f64>,
    t_per_window: Option<u32>,
    z_points: Vec<Vec<f64>>,
    theta: Option<Vec<f64>>,
    interval_ts: Option<Vec<f64>>,
    /// per n index: cached centerings / smoothed values per z point
    per_n_centering: Vec<Vec<Vec<f64>>>,
    per_n_smoothed: Vec<Vec<f64>>,
    f_at_z: Vec<f64>,
    sup_sqrt_f: Option<f64>,
    mc_reps: u64,
    z_point: Vec<f64>,
    z_list: Vec<Vec<f64>>,
    event_radii: Vec<Vec<f64>>,
    lambda: f64,
    seeds: Vec<u64>,
    reps_per_seed: u64,
}

fn is_uniform01(density: &Density) -> bool {
    density.dim() == 1
        && matches!(
            density.marginals()[0],
            Marginal::Uniform { lo, hi } if lo == 0.0 && hi == 1.0
        )
}

fn validate(config: &ExperimentConfig) -> Result<Plan> {
    if config.seeds.is_empty() {
        return Err(Error::Config("need at least one seed".into()));
    }
    if config.n_list.is_empty() {
        return Err(Error::Config("need a nonempty n list".into()));
    }
    if config.reps_per_seed == 0 {
        return Err(Error::Config("reps_per_seed must be >= 1".into()));
    }
    let density = config.density.build()?;
    let net = config.net.build()?;
    let schedule_report = process::validate_schedule(&config.schedule, &config.n_list)?;
    if !schedule_report.all_pass() {
        return Err(Error::Config(format!(
            "bandwidth schedule fails the validity conditions: {schedule_report:?}"
        )));
    }
    let mut n_list = config.n_list.clone();
    n_list.sort_unstable();
    n_list.dedup();
    let hs: Vec<f64> = n_list
        .iter()
        .map(|&n| config.schedule.h(n))
        .collect::<Result<_>>()?;

    let id = config.experiment_id;
    let mut plan = Plan {
        id,
        model: None,
        schedule: config.schedule.clone(),
        schedule_report,
        n_list: n_list.clone(),
        hs: hs.clone(),
        t_per_window: config.t_grid.map(|t| t.per_window),
        z_points: Vec::new(),
        theta: None,
        interval_ts: None,
        per_n_centering: Vec::new(),
        per_n_smoothed: Vec::new(),
        f_at_z: Vec::new(),
        sup_sqrt_f: None,
        mc_reps: config.mc_reps.unwrap_or(0),
        z_point: config.z_point.clone().unwrap_or_default(),
        z_list: config.z_list.clone().unwrap_or_default(),
        event_radii: config.event_radii.clone().unwrap_or_default(),
        lambda: config.lambda.unwrap_or(0.0),
        seeds: config.seeds.clone(),
        reps_per_seed: config.reps_per_seed,
        density,
        net,
    };
    match id {
        ExperimentId::ExpA => {
            if !is_uniform01(&plan.density) {
                return Err(Error::Config(
                    "EXP-A needs the uniform density on [0, 1]".into(),
                ));
            }
            let ts = interval_endpoints(&plan.net)
                .map_err(|_| Error::Config("EXP-A needs an interval net on [0, 1]".into()))?;
            let model = LimitBallModel::from_net(&plan.net)?;
            if let Some(spec) = &config.target_theta {
                plan.theta = Some(spec.resolve(&plan.net, &model)?);
            }
            plan.model = Some(model);
            plan.interval_ts = Some(ts);
            if plan.t_per_window.is_none() {
                return Err(Error::Config("EXP-A needs a t_grid".into()));
            }
        }
        ExperimentId::ExpB => {
            if !is_uniform01(&plan.density) {
                return Err(Error::Config(
                    "EXP-B needs the uniform density on [0, 1]".into(),
                ));
            }
        }
        ExperimentId::ExpC => {
            if plan.net.len() != 1
                || !matches!(plan.net.members[0], FunctionDescriptor::ProductKernel { .. })
            {
                return Err(Error::Config("EXP-C needs a single-kernel net".into()));
            }
            let zg = config
                .z_grid
                .as_ref()
                .ok_or_else(|| Error::Config("EXP-C needs a z_grid".into()))?;
            plan.z_points = zg.expand()?;
            // the f-normalized statistic needs f > 0 everywhere on the grid
            for z in &plan.z_points {
                if !(plan.density.pdf(z) > 0.0) {
                    return Err(Error::Config(format!(
                        "EXP-C grid point {z:?} has zero density"
                    )));
                }
            }
            plan.f_at_z = plan.z_points.iter().map(|z| plan.density.pdf(z)).collect();
            plan.sup_sqrt_f = Some(plan.density.sup_pdf_on(&zg.lo, &zg.hi).sqrt());
            // smoothed values per (n, z)
            let kernel = plan.net.members[0].clone();
            for &h in &hs {
                let ef: Vec<f64> = plan
                    .z_points
                    .iter()
                    .map(|z| crate::density::smoothed_density(&plan.density, &kernel, h, z))
                    .collect::<Result<_>>()?;
                plan.per_n_smoothed.push(ef);
            }
        }
        ExperimentId::ExpD => {
            if plan.density.dim() != 2 || plan.net.dim() != 2 {
                return Err(Error::Config("EXP-D runs in dimension 2".into()));
            }
            let zg = config
                .z_grid
                .as_ref()
                .ok_or_else(|| Error::Config("EXP-D needs a z_grid".into()))?;
            plan.z_points = zg.expand()?;
            for z in &plan.z_points {
                let inside = (0..2).all(|i| {
                    z[i] >= plan.density.region_lo[i] && z[i] <= plan.density.region_hi[i]
                });
                if !inside || !(plan.density.pdf(z) > 0.0) {
                    return Err(Error::Config(format!(
                        "EXP-D grid point {z:?} is outside the declared positivity region"
                    )));
                }
            }
            plan.f_at_z = plan.z_points.iter().map(|z| plan.density.pdf(z)).collect();
            let model = LimitBallModel::from_net(&plan.net)?;
            if let Some(spec) = &config.target_theta {
                plan.theta = Some(spec.resolve(&plan.net, &model)?);
            }
            plan.model = Some(model);
            for &h in &hs {
                let per_z: Vec<Vec<f64>> = plan
                    .z_points
                    .iter()
                    .map(|z| centering_terms(&plan.density, &plan.net, z, h))
                    .collect::<Result<_>>()?;
                plan.per_n_centering.push(per_z);
            }
        }
        ExperimentId::DiagCov | ExperimentId::DiagGauss | ExperimentId::DiagLdp => {
            if plan.z_point.len() != plan.density.dim() {
                return Err(Error::Config(
                    "diagnostic experiments need a z_point of the density's dimension".into(),
                ));
            }
            if plan.mc_reps < 1000 {
                return Err(Error::Config(
                    "diagnostic experiments need mc_reps >= 1000".into(),
                ));
            }
            if id == ExperimentId::DiagLdp && config.lambda.is_none() {
                return Err(Error::Config("DIAG-LDP needs lambda".into()));
            }
        }
        ExperimentId::DiagFact6 => {
            if plan.n_list.len() != 1 {
                return Err(Error::Config("DIAG-FACT6 runs at a single n".into()));
            }
            if plan.z_list.is_empty() || plan.event_radii.is_empty() {
                return Err(Error::Config(
                    "DIAG-FACT6 needs z_list and event_radii".into(),
                ));
            }
            for radii in &plan.event_radii {
                if radii.len() != plan.z_list.len() {
                    return Err(Error::Config(
                        "each DIAG-FACT6 event needs one radius per z".into(),
                    ));
                }
            }
            if plan.mc_reps < 1000 {
                return Err(Error::Config("DIAG-FACT6 needs mc_reps >= 1000".into()));
            }
        }
    }
    Ok(plan)
}

// ---------------------------------------------------------------------------
// Runner

/// Validate a config without running it; returns the resolved summary
/// skeleton (the `--dry-run` pathway).
pub fn dry_run(config: &ExperimentConfig) -> Result<serde_json::Value> {
    let plan = validate(config)?;
    Ok(serde_json::json!({
        "experiment_id": plan.id.as_str(),
        "resolved_config": config,
        "schedule_report": plan.schedule_report,
        "net_size": plan.net.len(),
        "z_grid_points": plan.z_points.len(),
        "cells": plan.seeds.len() as u64
            * plan.reps_per_seed
            * plan.n_list.len() as u64,
    }))
}

/// Run an experiment to completion.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    let plan = validate(config)?;
    let rows = match plan.id {
        ExperimentId::ExpA | ExperimentId::ExpB | ExperimentId::ExpC | ExperimentId::ExpD => {
            let mut cells = Vec::new();
            for &seed in &plan.seeds {
                for rep in 0..plan.reps_per_seed {
                    for ni in 0..plan.n_list.len() {
                        cells.push((seed, rep, ni));
                    }
                }
            }
            let results: Vec<Result<Vec<ResultRow>>> = cells
                .par_iter()
                .map(|&(seed, rep, ni)| run_cell(&plan, seed, rep, ni))
                .collect();
            let mut rows = Vec::new();
            for r in results {
                rows.extend(r?);
            }
            rows
        }
        _ => {
            let results: Vec<Result<Vec<ResultRow>>> = plan
                .seeds
                .par_iter()
                .map(|&seed| run_diag_seed(&plan, seed))
                .collect();
            let mut rows = Vec::new();
            for r in results {
                rows.extend(r?);
            }
            rows
        }
    };
    let mut rows = rows;
    rows.sort_by(|a, b| row_key(a).cmp(&row_key(b)));
    let summary = build_summary(config, &plan, &rows);
    Ok(RunOutput { rows, summary })
}

fn aux_common(plan: &Plan, rep: u64) -> String {
    let mesh = plan
        .net
        .mesh_delta
        .map(|m| m.to_string())
        .unwrap_or_else(|| "na".into());
    let tol = plan
        .model
        .as_ref()
        .map(|m| m.solver_tol.to_string())
        .unwrap_or_else(|| "na".into());
    format!("rep={rep};mesh={mesh};solver_tol={tol}")
}

/// Supremum of ball distances over many process vectors. Vectors inside the
/// ball (rate at most 1/2) are at distance zero; the rest are solved in
/// descending order of a cheap feasible upper bound, stopping as soon as the
/// remaining bounds cannot raise the maximum. The result equals the true
/// supremum of the solved distances.
fn sup_ball_distance(model: &LimitBallModel, psis: &[Vec<f64>]) -> Result<f64> {
    let mut bounds: Vec<(f64, usize)> = Vec::new();
    for (i, psi) in psis.iter().enumerate() {
        if model.rate(psi) <= 0.5 * (1.0 + 1e-9) {
            continue;
        }
        bounds.push((model.dist_upper_bound(psi), i));
    }
    bounds.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let mut best = 0.0f64;
    for &(ub, i) in &bounds {
        if ub <= best {
            break;
        }
        best = best.max(model.dist_to_unit_ball(&psis[i])?.dist);
    }
    Ok(best)
}

fn run_cell(plan: &Plan, seed: u64, rep: u64, ni: usize) -> Result<Vec<ResultRow>> {
    let n = plan.n_list[ni];
    let h = plan.hs[ni];
    let id = plan.id.as_str().to_string();
    let mut rows = Vec::new();
    match plan.id {
        ExperimentId::ExpA => {
            let sample = plan.density.sample_rep(n as usize, seed, rep);
            let sorted = SortedUniform::from_sample(&sample)?;
            let ts = plan.interval_ts.as_ref().unwrap();
            let model = plan.model.as_ref().unwrap();
            let per_window = plan.t_per_window.unwrap() as f64;
            let step = h / per_window;
            let t_count = ((1.0 - h) / step).floor() as usize + 1;
            let mut sup_norm: f64 = 0.0;
            let mut min_theta = f64::INFINITY;
            let mut psis: Vec<Vec<f64>> = Vec::with_capacity(t_count);
            for k in 0..t_count {
                let t = (k as f64 * step).min(1.0 - h);
                let eval = increment_process(&sorted, t, h, ts, true)?;
                let norm = eval.psi.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
                sup_norm = sup_norm.max(norm);
                if let Some(theta) = &plan.theta {
                    let d = eval
                        .psi
                        .iter()
                        .zip(theta)
                        .fold(0.0f64, |m, (p, t)| m.max((p - t).abs()));
                    min_theta = min_theta.min(d);
                }
                psis.push(eval.psi);
            }
            let sup_dist = sup_ball_distance(model, &psis)?;
            let aux = format!("{};tgrid={}", aux_common(plan, rep), t_count);
            rows.push(ResultRow {
                experiment_id: id.clone(),
                seed,
                n,
                h,
                statistic: "sup_dist".into(),
                value: sup_dist,
                aux: aux.clone(),
            });
            rows.push(ResultRow {
                experiment_id: id.clone(),
                seed,
                n,
                h,
                statistic: "sup_norm".into(),
                value: sup_norm,
                aux: aux.clone(),
            });
            if plan.theta.is_some() {
                rows.push(ResultRow {
                    experiment_id: id,
                    seed,
                    n,
                    h,
                    statistic: "min_theta_dist".into(),
                    value: min_theta,
                    aux,
                });
            }
        }
        ExperimentId::ExpB => {
            let sample = plan.density.sample_rep(n as usize, seed, rep);
            let ratio =
                oscillation_modulus(&sample.points, h) / (2.0 * h * (1.0 / h).ln()).sqrt();
            rows.push(ResultRow {
                experiment_id: id,
                seed,
                n,
                h,
                statistic: "osc_ratio".into(),
                value: ratio,
                aux: aux_common(plan, rep),
            });
        }
        ExperimentId::ExpC => {
            let sample = plan.density.sample_rep(n as usize, seed, rep);
            let idx = IndexedSample::new(&sample);
            let kernel = &plan.net.members[0];
            let norm_sq = kernel.norm_sq()?;
            let denom = (2.0 * norm_sq * (1.0 / h).ln()).sqrt();
            let amp = (n as f64 * h).sqrt();
            let ef = &plan.per_n_smoothed[ni];
            let mut sup_f: f64 = 0.0;
            let mut sup_raw: f64 = 0.0;
            for (zi, z) in plan.z_points.iter().enumerate() {
                let fnz = kde(&idx, kernel, h, z)?;
                let t = amp * (fnz - ef[zi]).abs() / denom;
                sup_raw = sup_raw.max(t);
                sup_f = sup_f.max(t / plan.f_at_z[zi].sqrt());
            }
            let aux = format!(
                "{};zgrid={};theory_ratio_f=1;theory_ratio={}",
                aux_common(plan, rep),
                plan.z_points.len(),
                plan.sup_sqrt_f.unwrap()
            );
            rows.push(ResultRow {
                experiment_id: id.clone(),
                seed,
                n,
                h,
                statistic: "kde_ratio_f".into(),
                value: sup_f,
                aux: aux.clone(),
            });
            rows.push(ResultRow {
                experiment_id: id,
                seed,
                n,
                h,
                statistic: "kde_ratio".into(),
                value: sup_raw,
                aux,
            });
        }
        ExperimentId::ExpD => {
            let sample = plan.density.sample_rep(n as usize, seed, rep);
            let idx = IndexedSample::new(&sample);
            let model = plan.model.as_ref().unwrap();
            let centering = &plan.per_n_centering[ni];
            let mut sup_norm: f64 = 0.0;
            let mut min_theta = f64::INFINITY;
            let mut psis: Vec<Vec<f64>> = Vec::with_capacity(plan.z_points.len());
            for (zi, z) in plan.z_points.iter().enumerate() {
                let eval = local_empirical_with(
                    &idx,
                    z,
                    h,
                    &plan.net,
                    &centering[zi],
                    plan.f_at_z[zi],
                    Normalization::LogDensity,
                )?;
                let norm = eval.psi.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
                sup_norm = sup_norm.max(norm);
                if let Some(theta) = &plan.theta {
                    let d = eval
                        .psi
                        .iter()
                        .zip(theta)
                        .fold(0.0f64, |m, (p, t)| m.max((p - t).abs()));
                    min_theta = min_theta.min(d);
                }
                psis.push(eval.psi);
            }
            let sup_dist = sup_ball_distance(model, &psis)?;
            let aux = format!("{};zgrid={}", aux_common(plan, rep), plan.z_points.len());
            rows.push(ResultRow {
                experiment_id: id.clone(),
                seed,
                n,
                h,
                statistic: "sup_dist".into(),
                value: sup_dist,
                aux: aux.clone(),
            });
            rows.push(ResultRow {
                experiment_id: id.clone(),
                seed,
                n,
                h,
                statistic: "sup_norm".into(),
                value: sup_norm,
                aux: aux.clone(),
            });
            if plan.theta.is_some() {
                rows.push(ResultRow {
                    experiment_id: id,
                    seed,
                    n,
                    h,
                    statistic: "min_theta_dist".into(),
                    value: min_theta,
                    aux,
                });
            }
        }
        _ => unreachable!("diagnostic ids use run_diag_seed"),
    }
    Ok(rows)
}

fn run_diag_seed(plan: &Plan, seed: u64) -> Result<Vec<ResultRow>> {
    let id = plan.id.as_str().to_string();
    let mut rows = Vec::new();
    match plan.id {
        ExperimentId::DiagCov => {
            for (ni, &n) in plan.n_list.iter().enumerate() {
                let h = plan.hs[ni];
                let rep = poisson::covariance_check(
                    &plan.density,
                    n,
                    &plan.z_point,
                    h,
                    &plan.net,
                    plan.mc_reps,
                    seed,
                )?;
                rows.push(ResultRow {
                    experiment_id: id.clone(),
                    seed,
                    n,
                    h,
                    statistic: "cov_max_dev".into(),
                    value: rep.max_abs_deviation,
                    aux: format!(
                        "stderr={};theoretical=0;reps={}",
                        rep.stderr_at_max, rep.reps
                    ),
                });
            }
        }
        ExperimentId::DiagFact6 => {
            let n = plan.n_list[0];
            let h = plan.hs[0];
            for (ev, radii) in plan.event_radii.iter().enumerate() {
                let rep = poisson::fact6_check(
                    &plan.density,
                    n,
                    &plan.z_list,
                    h,
                    &plan.net,
                    radii,
                    plan.mc_reps,
                    seed,
                )?;
                let aux = format!(
                    "event={ev};se_sample={};se_poisson={};condition={}",
                    rep.se_sample, rep.se_poisson, rep.condition_sum
                );
                rows.push(ResultRow {
                    experiment_id: id.clone(),
                    seed,
                    n,
                    h,
                    statistic: format!("fact6_p_sample_{ev:02}"),
                    value: rep.p_sample,
                    aux: aux.clone(),
                });
                rows.push(ResultRow {
                    experiment_id: id.clone(),
                    seed,
                    n,
                    h,
                    statistic: format!("fact6_p_poisson_{ev:02}"),
                    value: rep.p_poisson,
                    aux: aux.clone(),
                });
                rows.push(ResultRow {
                    experiment_id: id.clone(),
                    seed,
                    n,
                    h,
                    statistic: format!("fact6_holds_{ev:02}"),
                    value: if rep.holds { 1.0 } else { 0.0 },
                    aux,
                });
            }
        }
        ExperimentId::DiagGauss => {
            let out = poisson::gaussian_compare(
                &plan.density,
                &plan.n_list,
                &plan.z_point,
                &plan.schedule,
                &plan.net,
                plan.mc_reps,
                seed,
            )?;
            for row in out {
                for (l, ks) in row.ks.iter().enumerate() {
                    rows.push(ResultRow {
                        experiment_id: id.clone(),
                        seed,
                        n: row.n,
                        h: row.h,
                        statistic: format!("ks_distance_{l:02}"),
                        value: *ks,
                        aux: format!("crit99={};reps={}", row.ks_crit_99, plan.mc_reps),
                    });
                }
            }
        }
        ExperimentId::DiagLdp => {
            let out = poisson::ldp_tail_rate(
                &plan.density,
                &plan.n_list,
                &plan.z_point,
                &plan.schedule,
                &plan.net,
                plan.lambda,
                plan.mc_reps,
                seed,
            )?;
            for row in out {
                let (value, bound_flag) = match (row.eps_log_p, row.zero_hit_bound) {
                    (Some(v), _) => (v, 0),
                    (None, Some(b)) => (b, 1),
                    _ => unreachable!(),
                };
                rows.push(ResultRow {
                    experiment_id: id.clone(),
                    seed,
                    n: row.n,
                    h: row.h,
                    statistic: "ldp_eps_log_p".into(),
                    value,
                    aux: format!(
                        "hits={};theoretical={};zero_hit_bound={bound_flag};lambda={}",
                        row.hits, row.theoretical, plan.lambda
                    ),
                });
            }
        }
        _ => unreachable!(),
    }
    Ok(rows)
}

fn median(values: &mut Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = values.len();
    if m == 0 {
        return f64::NAN;
    }
    if m % 2 == 1 {
        values[m / 2]
    } else {
        0.5 * (values[m / 2 - 1] + values[m / 2])
    }
}

fn build_summary(
    config: &ExperimentConfig,
    plan: &Plan,
    rows: &[ResultRow],
) -> serde_json::Value {
    let mut groups: BTreeMap<String, BTreeMap<u64, Vec<f64>>> = BTreeMap::new();
    for r in rows {
        groups
            .entry(r.statistic.clone())
            .or_default()
            .entry(r.n)
            .or_default()
            .push(r.value);
    }
    let medians: BTreeMap<String, BTreeMap<u64, f64>> = groups
        .into_iter()
        .map(|(stat, by_n)| {
            let m = by_n
                .into_iter()
                .map(|(n, mut vs)| (n, median(&mut vs)))
                .collect();
            (stat, m)
        })
        .collect();
    let mut theoretical = serde_json::Map::new();
    if let Some(s) = plan.sup_sqrt_f {
        theoretical.insert("sup_sqrt_f".into(), serde_json::json!(s));
        theoretical.insert("kde_ratio_limit".into(), serde_json::json!(s));
        theoretical.insert("kde_ratio_f_limit".into(), serde_json::json!(1.0));
    }
    if plan.id == ExperimentId::DiagLdp {
        let q = plan.net.len();
        let mut max_diag = 0.0f64;
        for l in 0..q {
            if let Ok(v) = plan.net.gram_entry(l, l) {
                max_diag = max_diag.max(v);
            }
        }
        if plan.lambda > 0.0 && max_diag > 0.0 {
            theoretical.insert(
                "ldp_rate".into(),
                serde_json::json!(-plan.lambda * plan.lambda / (2.0 * max_diag)),
            );
        }
    }
    // small nets are dumped whole (kind, geometry, gram) for inspection
    let net_dump = if plan.net.len() <= 64 {
        plan.net.to_json()
    } else {
        serde_json::json!({"id": plan.net.id, "members": plan.net.len()})
    };
    serde_json::json!({
        "experiment_id": plan.id.as_str(),
        "resolved_config": config,
        "schedule_report": plan.schedule_report,
        "net": net_dump,
        "row_count": rows.len(),
        "medians": medians,
        "theoretical": theoretical,
    })
}

// ---------------------------------------------------------------------------
// Emission

/// Render rows in the fixed CSV schema (header always present).
pub fn rows_to_csv_string(rows: &[ResultRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["experiment_id", "seed", "n", "h", "statistic", "value", "aux"])
        .expect("csv header");
    for r in rows {
        w.write_record([
            r.experiment_id.as_str(),
            &r.seed.to_string(),
            &r.n.to_string(),
            &r.h.to_string(),
            r.statistic.as_str(),
            &r.value.to_string(),
            r.aux.as_str(),
        ])
        .expect("csv row");
    }
    String::from_utf8(w.into_inner().expect("csv flush")).expect("csv utf8")
}

/// Parse rows back from the CSV schema.
pub fn read_rows_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })?;
        let parse_err = |what: &str| Error::Config(format!("csv field {what} in {path:?}"));
        out.push(ResultRow {
            experiment_id: rec.get(0).ok_or_else(|| parse_err("experiment_id"))?.to_string(),
            seed: rec
                .get(1)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err("seed"))?,
            n: rec
                .get(2)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err("n"))?,
            h: rec
                .get(3)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err("h"))?,
            statistic: rec.get(4).ok_or_else(|| parse_err("statistic"))?.to_string(),
            value: rec
                .get(5)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err("value"))?,
            aux: rec.get(6).ok_or_else(|| parse_err("aux"))?.to_string(),
        });
    }
    Ok(out)
}

/// Paths written by [`emit`].
#[derive(Debug, Clone)]
pub struct EmitPaths {
    pub csv: PathBuf,
    pub summary: PathBuf,
}

/// Write `results.csv` and `summary.json` into `dir`.
pub fn emit(output: &RunOutput, dir: &Path) -> Result<EmitPaths> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let csv_path = dir.join("results.csv");
    let mut f = std::fs::File::create(&csv_path).map_err(|e| Error::Io {
        path: csv_path.clone(),
        source: e,
    })?;
    f.write_all(rows_to_csv_string(&output.rows).as_bytes())
        .map_err(|e| Error::Io {
            path: csv_path.clone(),
            source: e,
        })?;
    let summary_path = dir.join("summary.json");
    let text = serde_json::to_string_pretty(&output.summary).expect("summary serializes");
    std::fs::write(&summary_path, text).map_err(|e| Error::Io {
        path: summary_path.clone(),
        source: e,
    })?;
    Ok(EmitPaths {
        csv: csv_path,
        summary: summary_path,
    })
}
