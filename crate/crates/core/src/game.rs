//! Game structures and the damage / level-of-protection semantics.
//!
//! Targets are kept grouped by (attack length, cost): every algorithm in this
//! crate depends only on group statistics, so instances with tens of millions
//! of vertices stay cheap to represent.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GameError {
    #[error("{name} must be a positive integer (got {value})")]
    NonPositiveParameter { name: &'static str, value: i64 },
    #[error("detection probability must lie in (0, 1] (got {0})")]
    InvalidProbability(f64),
    #[error("{patrollers} patrollers exceed the {vertices} available vertices")]
    TooManyPatrollers { patrollers: u64, vertices: u64 },
}

/// A class of identical targets: `count` vertices sharing one attack length
/// and one cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexGroup {
    pub count: u64,
    pub attack_length: u32,
    pub cost: u64,
}

impl VertexGroup {
    pub fn new(count: u64, attack_length: u32, cost: u64) -> Self {
        Self { count, attack_length, cost }
    }
}

/// A validated, canonical game structure: grouped targets plus the global
/// detection probability. Groups are merged by (attack length, cost) and
/// sorted, so equal inputs compare equal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameStructure {
    groups: Vec<VertexGroup>,
    detection_prob: f64,
}

impl GameStructure {
    /// Canonicalizes and validates raw groups: merges duplicate
    /// (attack length, cost) pairs by summing counts, sorts, and checks the
    /// parameter ranges.
    pub fn new(groups: Vec<VertexGroup>, detection_prob: f64) -> Result<Self, GameError> {
        if !(detection_prob > 0.0 && detection_prob <= 1.0) {
            return Err(GameError::InvalidProbability(detection_prob));
        }
        if groups.is_empty() {
            return Err(GameError::NonPositiveParameter { name: "group count", value: 0 });
        }
        for g in &groups {
            if g.count < 1 {
                return Err(GameError::NonPositiveParameter { name: "count", value: g.count as i64 });
            }
            if g.attack_length < 1 {
                return Err(GameError::NonPositiveParameter {
                    name: "attack_length",
                    value: g.attack_length as i64,
                });
            }
            if g.cost < 1 {
                return Err(GameError::NonPositiveParameter { name: "cost", value: g.cost as i64 });
            }
        }
        let mut merged: Vec<VertexGroup> = Vec::new();
        let mut sorted = groups;
        sorted.sort_by_key(|g| (g.attack_length, g.cost));
        for g in sorted {
            match merged.last_mut() {
                Some(last) if last.attack_length == g.attack_length && last.cost == g.cost => {
                    last.count += g.count;
                }
                _ => merged.push(g),
            }
        }
        Ok(Self { groups: merged, detection_prob })
    }

    pub fn groups(&self) -> &[VertexGroup] {
        &self.groups
    }

    pub fn detection_prob(&self) -> f64 {
        self.detection_prob
    }

    /// Total number of vertices.
    pub fn vertex_count(&self) -> u64 {
        self.groups.iter().map(|g| g.count).sum()
    }

    /// Maximal cost over all vertices.
    pub fn alpha_max(&self) -> u64 {
        self.groups.iter().map(|g| g.cost).max().expect("non-empty")
    }
}

/// Validates a raw (groups, p, k) triple and returns the canonical structure.
pub fn validate(groups: Vec<VertexGroup>, detection_prob: f64, patrollers: u64) -> Result<GameStructure, GameError> {
    if patrollers < 1 {
        return Err(GameError::NonPositiveParameter { name: "patrollers", value: patrollers as i64 });
    }
    let gs = GameStructure::new(groups, detection_prob)?;
    let vertices = gs.vertex_count();
    if patrollers > vertices {
        return Err(GameError::TooManyPatrollers { patrollers, vertices });
    }
    Ok(gs)
}

/// Expected damage of an attack on a vertex of the given cost that was
/// visited `visit_count` times during its attack window: `(1-p)^c * cost`,
/// with `0^0 = 1` (an unvisited vertex takes full damage even when p = 1).
pub fn damage(detection_prob: f64, cost: u64, visit_count: u32) -> f64 {
    if visit_count == 0 {
        return cost as f64;
    }
    (1.0 - detection_prob).powi(visit_count as i32) * cost as f64
}
