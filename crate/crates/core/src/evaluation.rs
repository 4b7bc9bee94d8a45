//! Exact and empirical evaluation of factored strategies.
//!
//! For product-form strategies (independent round draws given the phase) the
//! attacker's best response is an attack on some vertex class at some start
//! phase, and the expected damage over the attack window factorizes into a
//! product of per-round miss probabilities. A brute-force enumerator over all
//! window randomness serves as an independent oracle for small sets, and a
//! Monte Carlo walk estimates the same quantity empirically.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::bounds::{protection_upper_bound, BoundSolution};
use crate::game::{damage, GameStructure};
use crate::synthesis::{schedule_visit_prob, BasicSet, ModularStrategy, SetAssignment};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("exact evaluation requires a product-form strategy")]
    NonProductStrategy,
    #[error("window enumeration limited to size <= 4 and attack length <= 6 (got {size}, {attack_length})")]
    WindowTooLarge { size: u32, attack_length: u32 },
    #[error("relative deviation undefined for level {0} <= 0")]
    DegenerateLevel(f64),
}

/// Phase-indexed visit probabilities of one representative vertex of a basic
/// set record, marginalized over the per-round allocation draw.
#[derive(Debug, Clone, PartialEq)]
pub struct VisitProfile {
    pub attack_length: u32,
    pub probs: Vec<f64>,
}

/// Marginal visit probability of vertex 0 at every phase: the K-patroller
/// schedule with weight 1 - lambda plus the (K+1)-patroller schedule with
/// weight lambda.
pub fn visit_profile(sa: &SetAssignment) -> VisitProfile {
    let q = sa.set.size;
    let d = sa.set.attack_length;
    let probs = (0..d)
        .map(|phase| {
            let low = schedule_visit_prob(q, d, sa.base, phase, 0);
            let high = if sa.extra_prob > 0.0 {
                schedule_visit_prob(q, d, sa.base + 1, phase, 0)
            } else {
                low
            };
            (1.0 - sa.extra_prob) * low + sa.extra_prob * high
        })
        .collect();
    VisitProfile { attack_length: d, probs }
}

/// Expected damage of an attack on one vertex of the record starting at the
/// given phase: cost * prod over the window of (1 - p * visit_prob).
pub fn window_product_damage(sa: &SetAssignment, p: f64, start_phase: u32) -> f64 {
    let profile = visit_profile(sa);
    let d = profile.attack_length;
    let mut product = 1.0;
    for i in 1..=d {
        product *= 1.0 - p * profile.probs[((start_phase + i) % d) as usize];
    }
    sa.set.cost as f64 * product
}

/// Where the attacker's best response strikes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstAttack {
    pub set: BasicSet,
    /// Index into the retained records, or None for a removed set.
    pub record: Option<usize>,
    pub vertex: u32,
    pub phase: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProtectionReport {
    pub level: f64,
    pub worst_attack: WorstAttack,
    pub upper_bound: f64,
    pub relative_deviation: f64,
    #[serde(skip)]
    pub bound_solution: BoundSolution,
}

/// Exact level of protection via attacker best response over (record, phase)
/// pairs. The attack window spans one full period of the record's profile,
/// so the window product is the same for every start phase; one
/// representative vertex per record suffices by circular symmetry.
pub fn best_response_level(
    strategy: &ModularStrategy,
    gs: &GameStructure,
) -> Result<ProtectionReport, EvalError> {
    if !strategy.independent_rounds {
        return Err(EvalError::NonProductStrategy);
    }
    let p = strategy.detection_prob;
    let alpha = strategy.alpha_max as f64;

    let mut worst_damage = f64::NEG_INFINITY;
    let mut worst = None;
    for (idx, sa) in strategy.assignment.sets.iter().enumerate() {
        let dmg = window_product_damage(sa, p, 0);
        if dmg > worst_damage {
            worst_damage = dmg;
            worst = Some(WorstAttack { set: sa.set, record: Some(idx), vertex: 0, phase: 0 });
        }
    }
    for set in &strategy.assignment.removed {
        let dmg = set.cost as f64;
        if dmg > worst_damage {
            worst_damage = dmg;
            worst = Some(WorstAttack { set: *set, record: None, vertex: 0, phase: 0 });
        }
    }
    let level = alpha - worst_damage;
    let bound_solution = protection_upper_bound(gs, strategy.patrollers);
    let upper_bound = bound_solution.rho;
    let relative_deviation = if level > 0.0 { (upper_bound - level) / level } else { f64::INFINITY };
    Ok(ProtectionReport {
        level,
        worst_attack: worst.expect("strategy covers at least one set"),
        upper_bound,
        relative_deviation,
        bound_solution,
    })
}

/// Relative deviation of an achieved level from the theoretical bound, a
/// conservative upper estimate of the deviation from optimal.
pub fn relative_deviation(level: f64, bound: f64) -> Result<f64, EvalError> {
    if level <= 0.0 {
        return Err(EvalError::DegenerateLevel(level));
    }
    Ok((bound - level) / level)
}

/// The attacked position for a simulation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackSpec {
    /// Index into the retained records (`assignment.sets`).
    pub record: usize,
    pub vertex: u32,
    pub start_phase: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationReport {
    pub trials: u64,
    pub mean_damage: f64,
    /// Half-width of the 95% normal-approximation confidence interval.
    pub ci_half_width: f64,
}

/// Monte Carlo estimate of the expected damage of an attack. Each trial draws
/// the window's allocation and tail-subset randomness for the attacked vertex
/// and counts visits; detection randomness is folded analytically into
/// (1-p)^c. A `None` attacker never attacks and takes zero damage.
pub fn simulate<R: Rng + ?Sized>(
    strategy: &ModularStrategy,
    attacker: Option<AttackSpec>,
    trials: u64,
    rng: &mut R,
) -> SimulationReport {
    let Some(attack) = attacker else {
        return SimulationReport { trials, mean_damage: 0.0, ci_half_width: 0.0 };
    };
    let sa = &strategy.assignment.sets[attack.record];
    let p = strategy.detection_prob;
    let q = sa.set.size;
    let d = sa.set.attack_length;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..trials {
        let mut visits = 0u32;
        for i in 1..=d {
            let phase = (attack.start_phase + i) % d;
            let n = if sa.extra_prob > 0.0 && rng.random::<f64>() < sa.extra_prob {
                sa.base + 1
            } else {
                sa.base
            };
            let circular_phases = (d / q) * q;
            let visited = if phase < circular_phases {
                schedule_visit_prob(q, d, n, phase, attack.vertex) == 1.0
            } else {
                rng.random::<f64>() < n as f64 / q as f64
            };
            if visited {
                visits += 1;
            }
        }
        let dmg = damage(p, sa.set.cost, visits);
        sum += dmg;
        sum_sq += dmg * dmg;
    }
    let n = trials as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
    SimulationReport { trials, mean_damage: mean, ci_half_width: 1.96 * (var / n).sqrt() }
}

fn binomial(n: u32, k: u32) -> u64 {
    if k > n {
        return 0;
    }
    let mut result = 1u64;
    for i in 0..k.min(n - k) {
        result = result * (n - i) as u64 / (i + 1) as u64;
    }
    result
}

/// Exact expected damage by enumerating every joint realization of the
/// window's allocation draws and tail-phase subset draws. Independent of the
/// product-formula path; feasible only for small records.
pub fn brute_force_window_damage(
    sa: &SetAssignment,
    p: f64,
    vertex: u32,
    start_phase: u32,
) -> Result<f64, EvalError> {
    let q = sa.set.size;
    let d = sa.set.attack_length;
    if q > 4 || d > 6 {
        return Err(EvalError::WindowTooLarge { size: q, attack_length: d });
    }
    let circular_phases = (d / q) * q;
    let tau = sa.set.cost as f64;

    // Per round, the possible (probability, visited) outcomes.
    let round_outcomes = |phase: u32| -> Vec<(f64, bool)> {
        let mut outcomes = Vec::new();
        let allocations: Vec<(f64, u32)> = if sa.extra_prob > 0.0 && sa.extra_prob < 1.0 {
            vec![(1.0 - sa.extra_prob, sa.base), (sa.extra_prob, sa.base + 1)]
        } else if sa.extra_prob >= 1.0 {
            vec![(1.0, sa.base + 1)]
        } else {
            vec![(1.0, sa.base)]
        };
        for (weight, n) in allocations {
            if phase < circular_phases {
                let visited = schedule_visit_prob(q, d, n, phase, vertex) == 1.0;
                outcomes.push((weight, visited));
            } else {
                // Enumerate all n-subsets of the q vertices.
                let total = binomial(q, n) as f64;
                for mask in 0u32..(1 << q) {
                    if mask.count_ones() == n {
                        outcomes.push((weight / total, mask & (1 << vertex) != 0));
                    }
                }
            }
        }
        outcomes
    };

    fn recurse(
        phases: &[u32],
        outcomes: &dyn Fn(u32) -> Vec<(f64, bool)>,
        p: f64,
        tau: f64,
        prob: f64,
        visits: u32,
    ) -> f64 {
        match phases.split_first() {
            None => prob * damage(p, 1, visits) * tau,
            Some((&phase, rest)) => outcomes(phase)
                .into_iter()
                .map(|(w, visited)| {
                    recurse(rest, outcomes, p, tau, prob * w, visits + visited as u32)
                })
                .sum(),
        }
    }

    let phases: Vec<u32> = (1..=d).map(|i| (start_phase + i) % d).collect();
    Ok(recurse(&phases, &round_outcomes, p, tau, 1.0, 0))
}
