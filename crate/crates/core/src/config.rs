//! Navigation configuration. Defaults follow the benchmark parameter set;
//! every field can be overridden from a config file (unknown keys are an
//! error, missing keys take the defaults).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use alloc::format;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NavConfig {
    /// Radius at which a frontier counts as reached (m).
    pub r_near: f64,
    /// Success radius around the final target (m).
    pub r_goal: f64,
    /// Suppression radius around cleared positions (m).
    pub r_clear: f64,
    /// Minimum per-tick progress that resets the stall counter (m).
    pub epsilon_stall: f64,
    /// Consecutive sub-epsilon ticks before the current target is dropped.
    #[serde(rename = "T_stall")]
    pub t_stall: u32,
    /// Presence probability a target verification must exceed (strict).
    pub p_presence: f64,
    /// Emergency rotation rounds before the no_frontiers failure.
    pub n_emergency: u32,
    /// Merge radius matching fresh proposals to active frontiers (m).
    pub tau_merge: f64,
    /// Minimum raw information gain for a frontier to survive pruning.
    pub g_min: f64,
    /// Steps between frontier detection / scoring refreshes.
    pub prediction_interval: u32,
    /// Viewpoint standoff distance from an object hypothesis (m).
    pub r_sep: f64,
    /// Forward translation per MOVE_FORWARD (m).
    pub step_size: f64,
    /// Rotation per TURN action (radians).
    pub turn_angle: f64,
    /// Episode step budget.
    pub max_steps: u32,
    /// Seed for world-generation randomness.
    pub rng_seed: u64,
    /// Radius of the information-gain disc around a frontier centroid (m).
    pub r_gain: f64,
    /// Frontier clusters smaller than this are discarded.
    pub min_cluster_cells: usize,
    /// Horizontal camera field of view (radians).
    pub hfov: f64,
}

impl Default for NavConfig {
    fn default() -> Self {
        NavConfig {
            r_near: 0.2,
            r_goal: 1.0,
            r_clear: 0.5,
            epsilon_stall: 0.1,
            t_stall: 15,
            p_presence: 0.7,
            n_emergency: 3,
            tau_merge: 1.8,
            g_min: 0.5,
            prediction_interval: 6,
            r_sep: 1.0,
            step_size: 0.25,
            turn_angle: 30.0f64.to_radians(),
            max_steps: 500,
            rng_seed: 0,
            r_gain: 2.0,
            min_cluster_cells: 3,
            hfov: 79.0f64.to_radians(),
        }
    }
}

impl NavConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("r_near", self.r_near),
            ("r_goal", self.r_goal),
            ("r_clear", self.r_clear),
            ("epsilon_stall", self.epsilon_stall),
            ("tau_merge", self.tau_merge),
            ("r_sep", self.r_sep),
            ("step_size", self.step_size),
            ("turn_angle", self.turn_angle),
            ("r_gain", self.r_gain),
            ("hfov", self.hfov),
        ] {
            if !(v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("p_presence", self.p_presence), ("g_min", self.g_min)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::Config(format!("{name} must be in (0, 1], got {v}")));
            }
        }
        if self.t_stall == 0 || self.prediction_interval == 0 || self.max_steps == 0 {
            return Err(Error::Config("counters must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_table() {
        let c = NavConfig::default();
        assert_eq!(c.r_near, 0.2);
        assert_eq!(c.r_goal, 1.0);
        assert_eq!(c.r_clear, 0.5);
        assert_eq!(c.epsilon_stall, 0.1);
        assert_eq!(c.t_stall, 15);
        assert_eq!(c.p_presence, 0.7);
        assert_eq!(c.n_emergency, 3);
        assert_eq!(c.tau_merge, 1.8);
        assert_eq!(c.g_min, 0.5);
        assert_eq!(c.prediction_interval, 6);
        assert_eq!(c.r_sep, 1.0);
        assert_eq!(c.step_size, 0.25);
        assert!((c.turn_angle - 30.0f64.to_radians()).abs() < 1e-15);
        assert_eq!(c.max_steps, 500);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_out_of_range() {
        let mut c = NavConfig::default();
        c.p_presence = 1.5;
        assert!(c.validate().is_err());
        let mut c = NavConfig::default();
        c.r_goal = 0.0;
        assert!(c.validate().is_err());
    }
}
