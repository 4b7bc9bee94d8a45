//! Strategy synthesis by decomposition into basic sets.
//!
//! A game structure is split into basic sets of q <= D vertices sharing one
//! attack length and cost. Each set runs a circular-token schedule; the
//! patroller budget is split across sets by solving for the common protection
//! level at which every retained set is protected equally well. The result is
//! a factored modular strategy: per-set phase schedules plus a dependent
//! allocation sampler that hands each set either K or K+1 patrollers.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::GameStructure;

const MAX_BISECTION_ITERS: usize = 200;
const SEGMENT_BISECTION_ITERS: usize = 100;

#[derive(Debug, Error, PartialEq)]
pub enum SynthesisError {
    #[error("{patrollers} patrollers exceed the {vertices} vertices retained after removals")]
    InfeasiblePatrollerCount { patrollers: u64, vertices: u64 },
    #[error("lcm of attack lengths overflows u64")]
    PeriodOverflow,
}

/// A decomposition unit: q <= D vertices with one attack length and cost.
/// Full sets (q = D) of the same group share a record via `multiplicity`;
/// a nonempty remainder set is its own record with multiplicity 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasicSet {
    pub attack_length: u32,
    pub cost: u64,
    pub size: u32,
    pub multiplicity: u64,
}

impl BasicSet {
    pub fn vertex_count(&self) -> u64 {
        self.size as u64 * self.multiplicity
    }
}

/// Splits each group into floor(count / D) full sets plus one remainder set.
pub fn decompose(gs: &GameStructure) -> Vec<BasicSet> {
    let mut sets = Vec::new();
    for g in gs.groups() {
        let d = g.attack_length as u64;
        let full = g.count / d;
        let rest = (g.count % d) as u32;
        if full > 0 {
            sets.push(BasicSet {
                attack_length: g.attack_length,
                cost: g.cost,
                size: g.attack_length,
                multiplicity: full,
            });
        }
        if rest > 0 {
            sets.push(BasicSet { attack_length: g.attack_length, cost: g.cost, size: rest, multiplicity: 1 });
        }
    }
    sets
}

/// Probability that vertex `index` of a q-vertex set is visited at phase
/// `phase` when `n` patrollers run the circular-token schedule.
///
/// The first floor(D/q)*q phases move n tokens deterministically around the
/// circle; the remaining D mod q phases pick a uniform n-subset afresh each
/// round.
pub fn schedule_visit_prob(q: u32, attack_length: u32, n: u32, phase: u32, index: u32) -> f64 {
    debug_assert!(n <= q && q <= attack_length && index < q);
    let circular_phases = (attack_length / q) * q;
    if phase < circular_phases {
        let start = phase % q;
        let offset = (index + q - start) % q;
        if offset < n {
            1.0
        } else {
            0.0
        }
    } else {
        n as f64 / q as f64
    }
}

/// Per-vertex visit probabilities of one basic set at one phase.
pub fn basic_set_visit_schedule(q: u32, attack_length: u32, n: u32, phase: u32) -> Vec<f64> {
    (0..q).map(|j| schedule_visit_prob(q, attack_length, n, phase, j)).collect()
}

/// Expected damage of an attack on a vertex of a basic set receiving an
/// expected `e` patrollers (K = floor(e) guaranteed, one extra with
/// probability e - K), over a full attack window:
///
///   cost * (1-p)^(K*b) * (1 - p*lambda)^b * (1 - p*e/q)^r
///
/// with b = floor(D/q), r = D mod q and 0^0 = 1. Extended linearly below
/// zero (used only for the removal test); strictly decreasing in e.
pub fn set_window_damage(set: &BasicSet, p: f64, e: f64) -> f64 {
    let tau = set.cost as f64;
    let q = set.size as f64;
    let b = (set.attack_length / set.size) as i32;
    let r = (set.attack_length % set.size) as i32;
    let pow0 = |base: f64, exp: i32| if exp == 0 { 1.0 } else { base.powi(exp) };
    if e <= 0.0 {
        return tau * pow0(1.0 - p * e, b) * pow0(1.0 - p * e / q, r);
    }
    let k = e.floor();
    let lambda = e - k;
    tau * pow0(1.0 - p, (k as i32) * b) * pow0(1.0 - p * lambda, b) * pow0(1.0 - p * e / q, r)
}

/// Inverts `set_window_damage` in e for a target damage. Returns the
/// (possibly negative) expected patroller count, and a flag when even e = q
/// leaves the damage above target (e is then clamped to q).
fn invert_set_e(set: &BasicSet, p: f64, target: f64) -> (f64, bool) {
    let tau = set.cost as f64;
    let q = set.size as f64;
    if target >= tau {
        if target == tau {
            return (0.0, false);
        }
        // Negative extension: bisect on the extended branch.
        let mut lo = -1.0;
        while set_window_damage(set, p, lo) < target {
            lo *= 2.0;
            if lo < -1e12 {
                return (lo, false);
            }
        }
        let mut hi = 0.0;
        for _ in 0..SEGMENT_BISECTION_ITERS {
            let mid = 0.5 * (lo + hi);
            if set_window_damage(set, p, mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return (0.5 * (lo + hi), false);
    }
    if set_window_damage(set, p, q) > target {
        return (q, true);
    }
    // Smallest integer m with damage(m + 1) <= target; binary search over the
    // (decreasing) damages at integer points.
    let mut lo_m = 0u32;
    let mut hi_m = set.size - if set.size > 0 { 1 } else { 0 };
    while lo_m < hi_m {
        let mid = (lo_m + hi_m) / 2;
        if set_window_damage(set, p, (mid + 1) as f64) <= target {
            hi_m = mid;
        } else {
            lo_m = mid + 1;
        }
    }
    let m = lo_m as f64;
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    for _ in 0..SEGMENT_BISECTION_ITERS {
        let mid = 0.5 * (lo + hi);
        if set_window_damage(set, p, m + mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let e = m + 0.5 * (lo + hi);
    (e.min(q), false)
}

/// One retained basic-set record of a solved assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetAssignment {
    pub set: BasicSet,
    /// Expected patrollers per set instance, E = K + lambda.
    pub expected: f64,
    /// Guaranteed patrollers K = floor(E).
    pub base: u32,
    /// Probability lambda of one extra patroller.
    pub extra_prob: f64,
}

/// Equal-protection split of the patroller budget over basic sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub sets: Vec<SetAssignment>,
    /// Sets assigned E <= 0 (already better protected with zero patrollers).
    pub removed: Vec<BasicSet>,
    /// The equalized protection value across retained sets.
    pub common_protection: f64,
    /// True when some removed set's zero-patroller protection ended up below
    /// the final common protection (see the restart rule).
    pub removed_underprotected: bool,
}

impl Assignment {
    pub fn patrollers(&self) -> u64 {
        self.sets
            .iter()
            .map(|s| s.set.multiplicity as f64 * s.expected)
            .sum::<f64>()
            .round() as u64
    }
}

/// Solves the equal-protection assignment: a common level rho* and per-set
/// expected counts E with Sum multiplicity * E = k. Sets solving to E <= 0
/// are removed and the solve restarts without them.
pub fn solve_assignment(
    basic_sets: &[BasicSet],
    k: u64,
    p: f64,
    alpha_max: u64,
) -> Result<Assignment, SynthesisError> {
    let alpha = alpha_max as f64;
    let mut retained: Vec<BasicSet> = basic_sets.to_vec();
    let mut removed: Vec<BasicSet> = Vec::new();
    let kf = k as f64;

    loop {
        let vertices: u64 = retained.iter().map(|s| s.vertex_count()).sum();
        if k > vertices {
            return Err(SynthesisError::InfeasiblePatrollerCount { patrollers: k, vertices });
        }

        let budget_at = |rho: f64| -> f64 {
            retained
                .iter()
                .map(|s| s.multiplicity as f64 * invert_set_e(s, p, alpha - rho).0)
                .sum()
        };

        // rho low enough that every set sits at E <= 0.
        let tau_max = retained.iter().map(|s| s.cost).max().unwrap_or(1) as f64;
        let mut lo = alpha - tau_max;
        let mut hi = alpha;
        let tol = 1e-12 * alpha.max(1.0);
        for _ in 0..MAX_BISECTION_ITERS {
            if hi - lo <= tol {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if budget_at(mid) < kf {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let rho = 0.5 * (lo + hi);

        let inverted: Vec<f64> = retained.iter().map(|s| invert_set_e(s, p, alpha - rho).0).collect();
        let negatives: Vec<usize> =
            (0..retained.len()).filter(|&i| inverted[i] <= 1e-12).collect();
        if !negatives.is_empty() {
            for &i in negatives.iter().rev() {
                removed.push(retained.remove(i));
            }
            continue;
        }

        // Near saturation the budget is extremely flat in rho, so bisection
        // can stall with expected counts below their caps and patrollers left
        // unassigned. Top the counts up to the exact budget; extra coverage
        // never lowers a set's protection.
        let mut inverted = inverted;
        let assigned: f64 =
            retained.iter().zip(&inverted).map(|(s, &e)| s.multiplicity as f64 * e).sum();
        let mut deficit = kf - assigned;
        if deficit > 0.0 {
            for (set, e) in retained.iter().zip(inverted.iter_mut()) {
                let mult = set.multiplicity as f64;
                let room = mult * ((set.size as f64) - *e).max(0.0);
                let take = deficit.min(room);
                *e += take / mult;
                deficit -= take;
                if deficit <= 0.0 {
                    break;
                }
            }
        }

        let sets = retained
            .iter()
            .zip(&inverted)
            .map(|(set, &e)| {
                // Snap to the integer grid so K and lambda come out exact at
                // segment boundaries despite bisection noise.
                let e = if (e - e.round()).abs() < 1e-9 { e.round() } else { e };
                SetAssignment { set: *set, expected: e, base: e.floor() as u32, extra_prob: e - e.floor() }
            })
            .collect();
        let removed_underprotected =
            removed.iter().any(|s| alpha - (s.cost as f64) < rho - 1e-9 * alpha.max(1.0));
        return Ok(Assignment { sets, removed, common_protection: rho, removed_underprotected });
    }
}

/// One sampled allocation: per retained record, the instances that receive
/// the extra (K+1-th) patroller this round.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationSample {
    /// Extra-patroller instance indices per record, in assignment order.
    pub extras: Vec<Vec<u64>>,
}

impl AllocationSample {
    /// Patrollers assigned to a given instance of a record.
    pub fn patrollers_for(&self, assignment: &Assignment, record: usize, instance: u64) -> u32 {
        let base = assignment.sets[record].base;
        if self.extras[record].binary_search(&instance).is_ok() {
            base + 1
        } else {
            base
        }
    }

    pub fn total(&self, assignment: &Assignment) -> u64 {
        assignment
            .sets
            .iter()
            .zip(&self.extras)
            .map(|(s, e)| s.set.multiplicity * s.base as u64 + e.len() as u64)
            .sum()
    }
}

/// Order in which set instances are laid on the sampling circle: descending
/// expected count, ties by (attack length, cost). Deterministic so runs are
/// reproducible under a fixed seed.
fn sampler_order(assignment: &Assignment) -> Vec<usize> {
    let mut order: Vec<usize> = (0..assignment.sets.len()).collect();
    order.sort_by(|&a, &b| {
        let sa = &assignment.sets[a];
        let sb = &assignment.sets[b];
        sb.expected
            .partial_cmp(&sa.expected)
            .unwrap()
            .then((sa.set.attack_length, sa.set.cost).cmp(&(sb.set.attack_length, sb.set.cost)))
    });
    order
}

/// Draws one eligible allocation by systematic sampling: the per-instance
/// lambda intervals are laid end-to-end on a circle of integer circumference
/// L, one uniform offset is drawn, and the L points offset + t (integer t)
/// pick the instances receiving the extra patroller. Marginals are exact and
/// every draw sums to k.
pub fn sample_allocation<R: Rng + ?Sized>(assignment: &Assignment, rng: &mut R) -> AllocationSample {
    let order = sampler_order(assignment);
    let mut extras: Vec<Vec<u64>> = vec![Vec::new(); assignment.sets.len()];
    let total_lambda: f64 = assignment
        .sets
        .iter()
        .map(|s| s.set.multiplicity as f64 * s.extra_prob)
        .sum();
    let circumference = total_lambda.round();
    debug_assert!((total_lambda - circumference).abs() < 1e-6 * circumference.max(1.0));
    if circumference < 0.5 {
        return AllocationSample { extras };
    }

    let u: f64 = rng.random::<f64>();
    // Walk the records in sampler order, keeping the cumulative start of each
    // record's lambda block; hits inside a block map to instance indices.
    // Widths are rescaled so the circumference is exactly the integer L,
    // making every draw place exactly L extras.
    let scale = circumference / total_lambda;
    let mut start = 0.0_f64;
    let mut next_point = u; // next sampling point >= start
    for &idx in &order {
        let s = &assignment.sets[idx];
        let lambda = s.extra_prob * scale;
        let block = s.set.multiplicity as f64 * lambda;
        if lambda > 0.0 {
            while next_point < start + block && next_point < circumference {
                let instance = ((next_point - start) / lambda).floor() as u64;
                extras[idx].push(instance.min(s.set.multiplicity - 1));
                next_point += 1.0;
            }
        }
        start += block;
    }
    // Floating drift can leave the final point a hair past the last block.
    let assigned: u64 = extras.iter().map(|e| e.len() as u64).sum();
    if assigned < circumference as u64 {
        for &idx in order.iter().rev() {
            if assignment.sets[idx].extra_prob > 0.0 {
                let last = assignment.sets[idx].set.multiplicity - 1;
                if extras[idx].last() != Some(&last) {
                    extras[idx].push(last);
                    break;
                }
            }
        }
    }
    AllocationSample { extras }
}

/// Factored modular strategy: the solved assignment plus the per-set
/// circular-token schedules. Rounds are independent draws given the phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModularStrategy {
    pub alpha_max: u64,
    pub detection_prob: f64,
    pub patrollers: u64,
    /// lcm of retained attack lengths; the round distribution depends only on
    /// the round index modulo this.
    pub period: u64,
    pub assignment: Assignment,
    /// Certificate that round draws are independent given the phase; set for
    /// every strategy built here, required by the exact evaluator.
    pub independent_rounds: bool,
}

fn lcm(a: u64, b: u64) -> Option<u64> {
    fn gcd(mut a: u64, mut b: u64) -> u64 {
        while b != 0 {
            let t = a % b;
            a = b;
            b = t;
        }
        a
    }
    (a / gcd(a, b)).checked_mul(b)
}

/// Composes the solved assignment into the global modular strategy.
pub fn compose(gs: &GameStructure, k: u64, assignment: Assignment) -> Result<ModularStrategy, SynthesisError> {
    let mut period = 1u64;
    for s in &assignment.sets {
        period = lcm(period, s.set.attack_length as u64).ok_or(SynthesisError::PeriodOverflow)?;
    }
    Ok(ModularStrategy {
        alpha_max: gs.alpha_max(),
        detection_prob: gs.detection_prob(),
        patrollers: k,
        period,
        assignment,
        independent_rounds: true,
    })
}

/// Full pipeline: decompose, solve the assignment, compose.
pub fn synthesize(gs: &GameStructure, k: u64) -> Result<ModularStrategy, SynthesisError> {
    let sets = decompose(gs);
    let assignment = solve_assignment(&sets, k, gs.detection_prob(), gs.alpha_max())?;
    compose(gs, k, assignment)
}

/// The naive baseline: positional, round-independent marginals r per group
/// with Sum count * r = k, equalizing cost * (1 - p*r)^D across groups.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NaiveStrategy {
    /// Per group (canonical order): the round marginal r in [0, 1].
    pub marginals: Vec<f64>,
    /// Exact level of protection: alpha_max minus the worst group damage.
    pub level: f64,
}

pub fn naive_strategy(gs: &GameStructure, k: u64) -> NaiveStrategy {
    let p = gs.detection_prob();
    let alpha = gs.alpha_max() as f64;
    let kf = k as f64;
    let marginal_for = |g: &crate::game::VertexGroup, target: f64| -> f64 {
        let tau = g.cost as f64;
        let r = (1.0 - (target / tau).powf(1.0 / g.attack_length as f64)) / p;
        r.clamp(0.0, 1.0)
    };
    let coverage_at = |target: f64| -> f64 {
        gs.groups().iter().map(|g| g.count as f64 * marginal_for(g, target)).sum()
    };
    // coverage is decreasing in the common damage target; bisect.
    let mut lo = 0.0_f64;
    let mut hi = alpha;
    for _ in 0..MAX_BISECTION_ITERS {
        if hi - lo <= 1e-12 * alpha.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if coverage_at(mid) > kf {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let target = 0.5 * (lo + hi);
    let marginals: Vec<f64> = gs.groups().iter().map(|g| marginal_for(g, target)).collect();
    let worst = gs
        .groups()
        .iter()
        .zip(&marginals)
        .map(|(g, &r)| g.cost as f64 * (1.0 - p * r).powi(g.attack_length as i32))
        .fold(0.0_f64, f64::max);
    NaiveStrategy { marginals, level: alpha - worst }
}
