//! Spec and strategy file formats, command reports, and sweep runners.
//!
//! Specs and strategies are JSON; sweep data is plain comma-separated CSV
//! with a header row and '.' decimals. All outputs are deterministic for
//! fixed inputs and seed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{self, BoundError};
use crate::evaluation::{best_response_level, ProtectionReport};
use crate::game::{validate, GameError, GameStructure, VertexGroup};
use crate::synthesis::{naive_strategy, synthesize, ModularStrategy, SynthesisError};

pub const SAMPLER_SEED_CONTRACT: &str =
    "systematic sampling over per-instance extra-probabilities, interval order by descending \
     expected count then (attack_length, cost); concurrent consumers must use independent \
     ChaCha8 streams derived from (seed, stream_id)";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Validation(#[from] GameError),
    #[error("spec parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("{0}")]
    Infeasible(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Internal(String),
}

impl From<BoundError> for CliError {
    fn from(e: BoundError) -> Self {
        CliError::Infeasible(e.to_string())
    }
}

impl From<SynthesisError> for CliError {
    fn from(e: SynthesisError) -> Self {
        match e {
            SynthesisError::InfeasiblePatrollerCount { .. } => CliError::Infeasible(e.to_string()),
            SynthesisError::PeriodOverflow => CliError::Internal(e.to_string()),
        }
    }
}

impl CliError {
    /// 0 success, 2 validation error, 3 infeasible, 4 internal failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Parse(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Io(_) | CliError::Internal(_) => 4,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub count: u64,
    pub attack_length: u32,
    pub cost: u64,
}

/// On-disk game spec. Unknown fields are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSpecFile {
    pub detection_prob: f64,
    pub groups: Vec<GroupSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl GameSpecFile {
    pub fn parse(json: &str) -> Result<Self, CliError> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn vertex_groups(&self) -> Vec<VertexGroup> {
        self.groups
            .iter()
            .map(|g| VertexGroup::new(g.count, g.attack_length, g.cost))
            .collect()
    }

    pub fn to_structure(&self, patrollers: u64) -> Result<GameStructure, CliError> {
        Ok(validate(self.vertex_groups(), self.detection_prob, patrollers)?)
    }

    /// Scaled copy: group counts multiplied by x, rounded to nearest >= 1.
    pub fn scaled(&self, x: f64) -> Self {
        let groups = self
            .groups
            .iter()
            .map(|g| GroupSpec {
                count: ((g.count as f64 * x).round() as u64).max(1),
                attack_length: g.attack_length,
                cost: g.cost,
            })
            .collect();
        Self { detection_prob: self.detection_prob, groups, label: self.label.clone() }
    }
}

/// Exported strategy: the factored description plus its evaluation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrategyFile {
    pub strategy: ModularStrategy,
    pub level: f64,
    pub upper_bound: f64,
    pub relative_deviation: f64,
    pub sampler_seed_contract: String,
}

impl StrategyFile {
    pub fn parse(json: &str) -> Result<Self, CliError> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("serializable");
        out.push('\n');
        out
    }
}

/// Synthesizes, evaluates, and packages a strategy for export.
pub fn synthesize_report(gs: &GameStructure, k: u64) -> Result<(StrategyFile, ProtectionReport), CliError> {
    let strategy = synthesize(gs, k)?;
    let report = best_response_level(&strategy, gs).map_err(|e| CliError::Internal(e.to_string()))?;
    let file = StrategyFile {
        strategy,
        level: report.level,
        upper_bound: report.upper_bound,
        relative_deviation: report.relative_deviation,
        sampler_seed_contract: SAMPLER_SEED_CONTRACT.to_string(),
    };
    Ok((file, report))
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupBound {
    pub count: u64,
    pub attack_length: u32,
    pub cost: u64,
    pub q: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub patrollers: u64,
    pub rho: f64,
    pub effective_k: f64,
    pub saturated: bool,
    pub groups: Vec<GroupBound>,
}

pub fn bound_report(gs: &GameStructure, k: u64) -> BoundReport {
    let sol = bounds::protection_upper_bound(gs, k);
    let groups = gs
        .groups()
        .iter()
        .zip(&sol.q_values)
        .map(|(g, &q)| GroupBound { count: g.count, attack_length: g.attack_length, cost: g.cost, q })
        .collect();
    BoundReport { patrollers: k, rho: sol.rho, effective_k: sol.effective_k, saturated: sol.saturated, groups }
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub patrollers: u64,
    pub upper_bound: f64,
    pub level_modular: f64,
    pub level_naive: f64,
    pub gap_modular: f64,
    pub gap_naive: f64,
}

pub fn compare(gs: &GameStructure, k: u64) -> Result<CompareReport, CliError> {
    let (_, report) = synthesize_report(gs, k)?;
    let naive = naive_strategy(gs, k);
    Ok(CompareReport {
        patrollers: k,
        upper_bound: report.upper_bound,
        level_modular: report.level,
        level_naive: naive.level,
        gap_modular: report.upper_bound - report.level,
        gap_naive: report.upper_bound - naive.level,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PatrollerReport {
    pub target: f64,
    /// Theoretical lower bound on the required patrollers.
    pub k_bound: u64,
    /// Smallest k whose synthesized strategy reaches the target.
    pub k_modular: u64,
    /// Smallest k whose naive strategy reaches the target.
    pub k_naive: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn level_tolerance(gs: &GameStructure) -> f64 {
    1e-9 * gs.alpha_max() as f64
}

/// Smallest patroller count whose synthesized strategy reaches `target`,
/// scanning up from the theoretical lower bound. `tolerance` is the slack
/// allowed when testing level >= target (defaults to 1e-9 * alpha_max).
pub fn patrollers_for_target_with_tolerance(
    spec: &GameSpecFile,
    target: f64,
    tolerance: Option<f64>,
) -> Result<PatrollerReport, CliError> {
    if target <= 0.0 {
        return Ok(PatrollerReport {
            target,
            k_bound: 0,
            k_modular: 0,
            k_naive: 0,
            note: Some("non-positive target protection needs no patrollers".to_string()),
        });
    }
    let gs = spec.to_structure(1)?;
    let tol = tolerance.unwrap_or_else(|| level_tolerance(&gs));
    let k_bound = bounds::min_patrollers(&gs, target)?;
    let vertices = gs.vertex_count();

    let mut k_modular = None;
    let mut k = k_bound.max(1);
    while k <= vertices {
        let strategy = synthesize(&gs, k)?;
        let report = best_response_level(&strategy, &gs).map_err(|e| CliError::Internal(e.to_string()))?;
        if report.level >= target - tol {
            k_modular = Some(k);
            break;
        }
        k += 1;
    }
    let k_modular = k_modular
        .ok_or_else(|| CliError::Infeasible(format!("no strategy reaches protection {target}")))?;

    // Naive level is monotone in k: binary search the threshold.
    let reaches = |k: u64| naive_strategy(&gs, k).level >= target - tol;
    if !reaches(vertices) {
        return Err(CliError::Infeasible(format!("naive strategy cannot reach protection {target}")));
    }
    let mut lo = 1u64;
    let mut hi = vertices;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if reaches(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(PatrollerReport { target, k_bound, k_modular, k_naive: lo, note: None })
}

pub fn patrollers_for_target(spec: &GameSpecFile, target: f64) -> Result<PatrollerReport, CliError> {
    patrollers_for_target_with_tolerance(spec, target, None)
}

fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    (0..n).map(|i| start + i as f64 * step).collect()
}

#[derive(Debug, Clone, Copy)]
pub struct LevelSweep {
    pub x_start: f64,
    pub x_stop: f64,
    pub x_step: f64,
    pub patrollers: u64,
}

/// Scale sweep at fixed k: one CSV row per x with the bound and both levels.
/// Points run concurrently; rows are emitted in x order.
pub fn run_level_sweep(spec: &GameSpecFile, sweep: &LevelSweep) -> Result<String, CliError> {
    if sweep.x_step <= 0.0 {
        return Err(CliError::Internal("sweep step must be positive".to_string()));
    }
    let points = grid(sweep.x_start, sweep.x_stop, sweep.x_step);
    let rows: Result<Vec<String>, CliError> = points
        .par_iter()
        .map(|&x| {
            let scaled = spec.scaled(x);
            let gs = scaled.to_structure(sweep.patrollers)?;
            let (_, report) = synthesize_report(&gs, sweep.patrollers)?;
            let naive = naive_strategy(&gs, sweep.patrollers);
            Ok(format!("{},{},{},{}", x, report.upper_bound, report.level, naive.level))
        })
        .collect();
    let mut csv = String::from("x,bound,level_eta,level_sigma\n");
    for row in rows? {
        csv.push_str(&row);
        csv.push('\n');
    }
    Ok(csv)
}

#[derive(Debug, Clone, Copy)]
pub struct PatrollerSweep {
    pub tau_start: f64,
    pub tau_stop: f64,
    pub tau_step: f64,
}

/// Protection-target sweep: one CSV row per target with the patroller lower
/// bound and the counts required by the modular and naive strategies.
pub fn run_patroller_sweep(spec: &GameSpecFile, sweep: &PatrollerSweep) -> Result<String, CliError> {
    if sweep.tau_step <= 0.0 {
        return Err(CliError::Internal("sweep step must be positive".to_string()));
    }
    let points = grid(sweep.tau_start, sweep.tau_stop, sweep.tau_step);
    let rows: Result<Vec<String>, CliError> = points
        .par_iter()
        .map(|&tau| {
            let report = patrollers_for_target(spec, tau)?;
            Ok(format!("{},{},{},{}", tau, report.k_bound, report.k_modular, report.k_naive))
        })
        .collect();
    let mut csv = String::from("tau,k_bound,k_eta,k_sigma\n");
    for row in rows? {
        csv.push_str(&row);
        csv.push('\n');
    }
    Ok(csv)
}
