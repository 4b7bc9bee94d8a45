//! Theoretical protection bounds.
//!
//! For a game structure and a common protection level rho, each vertex class
//! must receive an expected number of visits Q in its attack window so that
//!
//!   rho = alpha_max - cost * (1-p)^floor(Q) * (1 - p * (Q - floor(Q)))
//!
//! (for p = 1 the equation degenerates to rho = alpha_max - cost * (1 - Q)
//! with Q capped at 1). Summing Q/attack_length over all vertices with Q > 0
//! ties rho to the patroller count. Both directions are solved here: the
//! upper bound on protection for k patrollers and the lower bound on the
//! patrollers needed for a target protection.

use serde::Serialize;
use thiserror::Error;

use crate::game::GameStructure;

/// Bisection tolerance on rho, relative to the alpha_max scale.
pub const RHO_TOLERANCE: f64 = 1e-9;
const MAX_BISECTION_ITERS: usize = 200;

#[derive(Debug, Error, PartialEq)]
pub enum BoundError {
    #[error("protection level {target} is not achievable for any number of patrollers")]
    Infeasible { target: f64 },
}

/// Result of inverting the per-vertex equation for a fixed rho.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QInversion {
    /// The required expected visit count. Negative values extend the p < 1
    /// branch linearly below zero and are used only for the Q > 0 test.
    pub q: f64,
    /// True when the required Q exceeds the cap (attack_length for p < 1,
    /// 1 for p = 1); `q` then holds the cap.
    pub capped: bool,
}

/// Per-vertex expected damage at Q expected visits in the attack window.
/// Piecewise linear in the fractional part of Q and strictly decreasing.
pub fn window_damage(cost: u64, p: f64, q: f64) -> f64 {
    let tau = cost as f64;
    if q <= 0.0 {
        // Linear extension below zero, matching the m = 0 segment.
        return tau * (1.0 - p * q);
    }
    let m = q.floor();
    let frac = q - m;
    let base = if m == 0.0 { 1.0 } else { (1.0 - p).powi(m as i32) };
    tau * base * (1.0 - p * frac)
}

/// Inverts the per-vertex equation: returns the Q at which the expected
/// damage equals `alpha_max - rho`, unique by strict monotonicity.
pub fn invert_vertex_q(cost: u64, attack_length: u32, p: f64, alpha_max: u64, rho: f64) -> QInversion {
    let tau = cost as f64;
    let target = alpha_max as f64 - rho;
    let cap = if p < 1.0 { attack_length as f64 } else { 1.0 };
    if target < 0.0 {
        // rho above alpha_max: unreachable at any visit rate.
        return QInversion { q: cap, capped: true };
    }
    if target > tau {
        // Over-protected already at Q = 0: negative extension.
        return QInversion { q: (1.0 - target / tau) / p, capped: false };
    }
    if p >= 1.0 {
        // rho = alpha_max - tau * (1 - Q), Q in [0, 1].
        return QInversion { q: 1.0 - target / tau, capped: false };
    }
    // Smallest integer m >= 0 with tau * (1-p)^(m+1) <= target.
    let max_m = attack_length as u32;
    let mut m = 0u32;
    let mut seg = tau; // tau * (1-p)^m
    while seg * (1.0 - p) > target {
        m += 1;
        seg *= 1.0 - p;
        if m > max_m {
            return QInversion { q: cap, capped: true };
        }
    }
    let q = m as f64 + (1.0 - target / seg) / p;
    // Overshoots within solver noise of the cap count as the cap itself.
    if q > cap + 1e-6 * cap.max(1.0) {
        QInversion { q: cap, capped: true }
    } else {
        QInversion { q: q.min(cap), capped: false }
    }
}

/// Solution of the bound equation system for a fixed patroller count.
#[derive(Debug, Clone, Serialize)]
pub struct BoundSolution {
    /// Common protection level (proven upper bound on the achievable level).
    pub rho: f64,
    /// Per group (canonical order): the inverted Q, possibly negative.
    pub q_values: Vec<f64>,
    /// Sum of count * Q / attack_length over groups with Q > 0.
    pub effective_k: f64,
    /// Set when the patroller budget exceeds what the capped Q's can absorb
    /// (only possible for p = 1); rho is then alpha_max.
    pub saturated: bool,
}

fn effective_k_at(gs: &GameStructure, rho: f64) -> f64 {
    let p = gs.detection_prob();
    let alpha_max = gs.alpha_max();
    gs.groups()
        .iter()
        .map(|g| {
            let inv = invert_vertex_q(g.cost, g.attack_length, p, alpha_max, rho);
            let q = inv.q.max(0.0);
            g.count as f64 * q / g.attack_length as f64
        })
        .sum()
}

/// Upper bound on the level of protection achievable with k patrollers:
/// bisection on rho so that the positive Q's consume exactly k patrollers.
pub fn protection_upper_bound(gs: &GameStructure, k: u64) -> BoundSolution {
    let alpha_max = gs.alpha_max() as f64;
    let p = gs.detection_prob();
    let kf = k as f64;

    let solution_at = |rho: f64, saturated: bool| {
        let q_values: Vec<f64> = gs
            .groups()
            .iter()
            .map(|g| invert_vertex_q(g.cost, g.attack_length, p, gs.alpha_max(), rho).q)
            .collect();
        BoundSolution { rho, q_values, effective_k: effective_k_at(gs, rho), saturated }
    };

    if effective_k_at(gs, alpha_max) < kf {
        // Every vertex pinned at its cap still leaves patrollers idle; with
        // p = 1 this means certain coverage and full protection.
        return solution_at(alpha_max, true);
    }

    let mut lo = 0.0_f64;
    let mut hi = alpha_max;
    let tol = RHO_TOLERANCE * alpha_max.max(1.0);
    for _ in 0..MAX_BISECTION_ITERS {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if effective_k_at(gs, mid) < kf {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    solution_at(0.5 * (lo + hi), false)
}

/// Lower bound on the number of patrollers needed to reach protection
/// `target`, or `Infeasible` when no capped solution exists.
pub fn min_patrollers(gs: &GameStructure, target: f64) -> Result<u64, BoundError> {
    let alpha_max = gs.alpha_max() as f64;
    if target > alpha_max {
        return Err(BoundError::Infeasible { target });
    }
    let p = gs.detection_prob();
    let mut total = 0.0;
    for g in gs.groups() {
        let inv = invert_vertex_q(g.cost, g.attack_length, p, gs.alpha_max(), target);
        if inv.capped {
            return Err(BoundError::Infeasible { target });
        }
        if inv.q > 0.0 {
            total += g.count as f64 * inv.q / g.attack_length as f64;
        }
    }
    Ok((total - 1e-9).ceil().max(0.0) as u64)
}
