//! Long-horizon refinement of a stitched plan over its fixed contact
//! schedule.

use serde::{Deserialize, Serialize};

use crate::ocp::{check_goal, evaluate_merit, solve_ocp, OcpProblem};
use crate::scene::{HybridState, Scenario};
use crate::search::{Plan, Segment};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RefineConfig {
    /// Track the stitched trajectory instead of the per-segment constant
    /// references.
    pub track_stitched: bool,
    pub max_iterations: usize,
}

impl Default for RefineConfig {
    fn default() -> Self {
        RefineConfig {
            track_stitched: true,
            max_iterations: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinedPlan {
    pub plan: Plan,
    /// Long-horizon merit of the stitched warm start.
    pub merit_before: f64,
    pub merit_after: f64,
    pub violation_before: f64,
    pub violation_after: f64,
    pub iterations: usize,
    /// Refinement left the goal set and the input plan was returned.
    pub left_goal: bool,
}

impl RefinedPlan {
    pub fn improved(&self) -> bool {
        self.merit_after < self.merit_before
    }
}

/// Tracking references of the long-horizon problem for every state.
pub fn refinement_refs(plan: &Plan, sc: &Scenario, track_stitched: bool) -> Vec<Vec<f64>> {
    let l = sc.layout();
    if track_stitched {
        return plan
            .states()
            .iter()
            .map(|x| HybridState::from_flat(l, x).reference_coords())
            .collect();
    }
    let mut refs = vec![plan.start.reference_coords()];
    for s in &plan.segments {
        refs.extend(std::iter::repeat_n(s.reference.clone(), s.inputs.len()));
    }
    refs
}

/// The long-horizon problem over `plan`'s schedule.
pub fn long_horizon_problem<'a>(plan: &Plan, sc: &'a Scenario, cfg: &RefineConfig) -> OcpProblem<'a> {
    let segments = plan.segments.iter().map(|s| s.mode.clone()).collect();
    let refs = refinement_refs(plan, sc, cfg.track_stitched);
    OcpProblem::long_horizon(sc, &plan.start, segments, refs, cfg.max_iterations)
}

/// Re-optimize `plan` as one problem over its whole duration, warm-started
/// by the stitched inputs. The schedule never changes; if the result is not
/// better or leaves the goal set the input plan is returned.
pub fn refine_plan(plan: &Plan, sc: &Scenario, cfg: &RefineConfig) -> RefinedPlan {
    let identity = |before: f64, violation: f64, left_goal: bool| RefinedPlan {
        plan: plan.clone(),
        merit_before: before,
        merit_after: before,
        violation_before: violation,
        violation_after: violation,
        iterations: 0,
        left_goal,
    };
    if plan.segments.is_empty() {
        return identity(0.0, 0.0, false);
    }
    let p = long_horizon_problem(plan, sc, cfg);
    let guess = plan.inputs();
    let before = evaluate_merit(&p, &guess);
    let sol = solve_ocp(&p, Some(&guess));
    if sol.merit.is_nan() || sol.merit > before.merit {
        return identity(before.merit, before.violation, false);
    }
    let l = sc.layout();
    if !check_goal(&sol.terminal(l), sc) {
        log::warn!("refinement left the goal set; keeping the stitched plan");
        return identity(before.merit, before.violation, true);
    }
    let k = p.steps_per_segment;
    let segments = plan
        .segments
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let states = sol.states[i * k..=(i + 1) * k].to_vec();
            let inputs = sol.inputs[i * k..(i + 1) * k].to_vec();
            let x0 = HybridState::from_flat(l, &states[0]);
            let mut sp = OcpProblem::segment(sc, &x0, &s.mode.state, s.mode.action, &s.reference);
            sp.refs = p.refs[i * k..=(i + 1) * k].to_vec();
            let m = evaluate_merit(&sp, &inputs);
            Segment {
                mode: s.mode.clone(),
                reference: s.reference.clone(),
                states,
                inputs,
                cost: m.cost,
                violation: m.violation,
                merit: m.merit,
            }
        })
        .collect();
    RefinedPlan {
        plan: Plan {
            start: plan.start.clone(),
            start_contact: plan.start_contact.clone(),
            segments,
            cost: plan.cost,
        },
        merit_before: before.merit,
        merit_after: sol.merit,
        violation_before: before.violation,
        violation_after: sol.violation,
        iterations: sol.iterations,
        left_goal: false,
    }
}
