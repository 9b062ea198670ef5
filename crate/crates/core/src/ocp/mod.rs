//! Mode-conditioned trajectory optimization over a fixed contact schedule.
//!
//! Decision variables are the inputs of every step; states come from a
//! single-shooting rollout. Costs and constraint penalties are written as
//! weighted residuals, so the merit is a plain sum of squares and a
//! Gauss–Newton step is an LQR problem solved by a Riccati recursion.

mod constraints;
mod cost;
mod dynamics;
mod solver;
mod timeline;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::contact_logic::{build_mode_schedule_with, ContactState, ModeSchedule, ScheduleTiming, SwitchAction};
use crate::scene::{HybridState, Layout, Scenario};

pub use constraints::{build_constraints, Constraint, ConstraintKind, ConstraintSet, ConstraintSpec, Family, Window};
pub use dynamics::rollout;
pub use solver::{evaluate_merit, solve_ocp, MeritEval};
pub use timeline::trapezoid_speed;

/// Diagonal weights of the quadratic cost. Tracking acts on the reference
/// space (base pose, object coordinates); regularization on inputs, object
/// velocity, end-effector offset from its mount and heading offset from yaw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostWeights {
    pub track_base_pos: f64,
    pub track_base_yaw: f64,
    /// Per object coordinate; defaults to `track_object_default` each.
    pub track_object: Option<Vec<f64>>,
    pub track_object_default: f64,
    pub reg_object_vel: f64,
    pub reg_ee_nominal: f64,
    pub reg_heading: f64,
    pub reg_base_vel: f64,
    pub reg_base_rate: f64,
    pub reg_ee_vel: f64,
    pub reg_heading_rate: f64,
    pub reg_force_arm: f64,
    pub reg_force_foot: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        CostWeights {
            track_base_pos: 100.0,
            track_base_yaw: 100.0,
            track_object: None,
            track_object_default: 400.0,
            reg_object_vel: 20.0,
            reg_ee_nominal: 1.0,
            reg_heading: 0.1,
            reg_base_vel: 1.0,
            reg_base_rate: 1.0,
            reg_ee_vel: 0.4,
            reg_heading_rate: 0.4,
            reg_force_arm: 5e-3,
            reg_force_foot: 1e-3,
        }
    }
}

impl CostWeights {
    pub fn is_valid(&self) -> bool {
        let nonneg = [
            self.track_base_pos,
            self.track_base_yaw,
            self.track_object_default,
            self.reg_object_vel,
            self.reg_ee_nominal,
            self.reg_heading,
        ];
        let pos = [
            self.reg_base_vel,
            self.reg_base_rate,
            self.reg_ee_vel,
            self.reg_heading_rate,
            self.reg_force_arm,
            self.reg_force_foot,
        ];
        nonneg.iter().all(|w| *w >= 0.0 && w.is_finite())
            && pos.iter().all(|w| *w > 0.0 && w.is_finite())
            && self
                .track_object
                .as_ref()
                .is_none_or(|v| v.iter().all(|w| *w >= 0.0))
    }

    pub fn object_weight(&self, j: usize) -> f64 {
        self.track_object
            .as_ref()
            .map(|v| v[j])
            .unwrap_or(self.track_object_default)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OcpSettings {
    /// Segment duration T [s].
    pub horizon: f64,
    pub dt: f64,
    pub timing: ScheduleTiming,
    /// Peak of the trapezoidal approach/retract gap rate [m/s].
    pub approach_peak_speed: f64,
    pub merit_weight: f64,
    pub tol_feas: f64,
    pub max_iterations: usize,
    pub collision_margin: f64,
    /// In-surface bounds are tightened by this much at both ends [m].
    pub surface_margin: f64,
    pub weights: CostWeights,
}

impl Default for OcpSettings {
    fn default() -> Self {
        OcpSettings {
            horizon: 1.2,
            dt: 0.1,
            timing: ScheduleTiming::default(),
            approach_peak_speed: 0.25,
            merit_weight: 100.0,
            tol_feas: 1e-2,
            max_iterations: 50,
            collision_margin: 0.0,
            surface_margin: 0.05,
            weights: CostWeights::default(),
        }
    }
}

impl OcpSettings {
    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }
}

/// One segment's manipulation mode and its schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentMode {
    pub state: ContactState,
    pub action: SwitchAction,
    pub schedule: ModeSchedule,
}

impl SegmentMode {
    pub fn new(state: ContactState, action: SwitchAction, settings: &OcpSettings) -> Self {
        let schedule = build_mode_schedule_with(&state, action, settings.horizon, &settings.timing);
        SegmentMode {
            state,
            action,
            schedule,
        }
    }

    /// Contact a limb works with in this segment (target when establishing).
    pub fn limb_contact(&self, limb: usize) -> usize {
        if self.action.limb == limb && self.action.contact != 0 {
            self.action.contact
        } else {
            self.state.slot(limb)
        }
    }
}

/// An optimal control problem over one or more consecutive segments.
#[derive(Debug, Clone)]
pub struct OcpProblem<'a> {
    pub scenario: &'a Scenario,
    pub x0: Vec<f64>,
    pub segments: Vec<SegmentMode>,
    pub steps_per_segment: usize,
    pub dt: f64,
    /// Tracking reference (x, y, yaw, q…) for each state 0..=N; entry 0 is
    /// unused.
    pub refs: Vec<Vec<f64>>,
    pub weights: CostWeights,
    pub merit_weight: f64,
    pub tol_feas: f64,
    pub max_iterations: usize,
    /// Restrict constraints to these families (all when `None`).
    pub families: Option<BTreeSet<Family>>,
}

impl<'a> OcpProblem<'a> {
    /// Single-segment problem with a constant reference.
    pub fn segment(
        scenario: &'a Scenario,
        x0: &HybridState,
        state: &ContactState,
        action: SwitchAction,
        reference: &[f64],
    ) -> Self {
        let st = &scenario.ocp;
        let seg = SegmentMode::new(state.clone(), action, st);
        let k = st.steps();
        OcpProblem {
            scenario,
            x0: x0.to_flat(),
            segments: vec![seg],
            steps_per_segment: k,
            dt: st.dt,
            refs: vec![reference.to_vec(); k + 1],
            weights: st.weights.clone(),
            merit_weight: st.merit_weight,
            tol_feas: st.tol_feas,
            max_iterations: st.max_iterations,
            families: None,
        }
    }

    /// Multi-segment problem with per-state references.
    pub fn long_horizon(
        scenario: &'a Scenario,
        x0: &HybridState,
        segments: Vec<SegmentMode>,
        refs: Vec<Vec<f64>>,
        max_iterations: usize,
    ) -> Self {
        let st = &scenario.ocp;
        OcpProblem {
            scenario,
            x0: x0.to_flat(),
            segments,
            steps_per_segment: st.steps(),
            dt: st.dt,
            refs,
            weights: st.weights.clone(),
            merit_weight: st.merit_weight,
            tol_feas: st.tol_feas,
            max_iterations,
            families: None,
        }
    }

    pub fn layout(&self) -> Layout {
        self.scenario.layout()
    }

    pub fn n_steps(&self) -> usize {
        self.segments.len() * self.steps_per_segment
    }

    pub fn family_enabled(&self, f: Family) -> bool {
        self.families.as_ref().is_none_or(|s| s.contains(&f))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcpSolution {
    /// Flat states 0..=N from a rollout of `inputs`.
    pub states: Vec<Vec<f64>>,
    pub inputs: Vec<Vec<f64>>,
    pub cost: f64,
    pub violation: f64,
    pub merit: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl OcpSolution {
    pub fn terminal(&self, layout: Layout) -> HybridState {
        HybridState::from_flat(layout, self.states.last().expect("rollout has states"))
    }
}

/// Wrap an angle to (-π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut r = a.rem_euclid(two_pi);
    if r > std::f64::consts::PI {
        r -= two_pi;
    }
    r
}

/// Distance of a state's reference projection from the goal mean over the
/// selected coordinates (yaw difference wrapped).
pub fn goal_deviation(x: &HybridState, sc: &Scenario) -> f64 {
    let r = x.reference_coords();
    sc.goal
        .select
        .iter()
        .map(|&i| {
            let mut d = r[i] - sc.goal.mu[i];
            if i == 2 {
                d = wrap_angle(d);
            }
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Goal-set membership.
pub fn check_goal(x: &HybridState, sc: &Scenario) -> bool {
    goal_deviation(x, sc) <= sc.goal.delta
}
