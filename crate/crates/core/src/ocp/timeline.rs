use crate::contact_logic::LimbStatus;

use super::OcpProblem;

const TIME_EPS: f64 = 1e-9;

/// Trapezoidal speed profile over a window of length `duration`, ramping up
/// and down over a third of the window each.
pub fn trapezoid_speed(tau: f64, duration: f64, peak: f64) -> f64 {
    if tau <= 0.0 || tau >= duration {
        return 0.0;
    }
    let ramp = duration / 3.0;
    peak * (tau / ramp).min((duration - tau) / ramp).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LimbStep {
    pub status: LimbStatus,
    /// Contact the limb works with during this step (0 if none).
    pub contact: usize,
    pub switching: bool,
    /// Target rate of the normal gap while approaching (<0) or retracting (>0).
    pub gap_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct StepInfo {
    pub base_frozen: bool,
    pub limbs: Vec<LimbStep>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct StateInfo {
    /// Closed contact per limb (0 = none): a state is in contact when either
    /// adjacent step is closed.
    pub closed: Vec<usize>,
    /// Limb is switching and free of the object on both sides of this state.
    pub open_switching: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Timeline {
    pub steps: Vec<StepInfo>,
    pub states: Vec<StateInfo>,
}

impl Timeline {
    pub fn build(p: &OcpProblem) -> Self {
        let n_e = p.scenario.robot.n_limbs();
        let k_seg = p.steps_per_segment;
        let peak = p.scenario.ocp.approach_peak_speed;
        let mut steps = Vec::with_capacity(p.n_steps());
        for seg in &p.segments {
            let sch = &seg.schedule;
            for j in 0..k_seg {
                let t = j as f64 * p.dt;
                let limbs = (1..=n_e)
                    .map(|limb| {
                        let status = sch.status_at(limb, t + TIME_EPS);
                        let switching = sch.switching_limb == Some(limb);
                        let held = seg.state.slot(limb);
                        let contact = match status {
                            LimbStatus::Open if !switching => 0,
                            LimbStatus::Closed
                                if switching && held != 0 && sch.t_close.is_some_and(|tc| t + TIME_EPS < tc) =>
                            {
                                held
                            }
                            _ => seg.limb_contact(limb),
                        };
                        let mid = t + 0.5 * p.dt;
                        let gap_rate = match status {
                            LimbStatus::Approaching => sch.t_close.map(|tc| {
                                let start = tc - sch.delta_approach;
                                -trapezoid_speed(mid - start, sch.delta_approach, peak)
                            }),
                            LimbStatus::Retracting => sch
                                .t_open
                                .map(|to| trapezoid_speed(mid - to, sch.delta_retract, peak)),
                            _ => None,
                        };
                        LimbStep {
                            status,
                            contact,
                            switching,
                            gap_rate,
                        }
                    })
                    .collect();
                steps.push(StepInfo {
                    base_frozen: sch.base_frozen,
                    limbs,
                });
            }
        }
        let n = steps.len();
        let states = (0..=n)
            .map(|k| {
                let prev = if k > 0 { steps.get(k - 1) } else { None };
                let next = steps.get(k);
                let closed = (0..n_e)
                    .map(|i| {
                        [prev, next]
                            .iter()
                            .flatten()
                            .map(|s| s.limbs[i])
                            .find(|l| l.status == LimbStatus::Closed)
                            .map_or(0, |l| l.contact)
                    })
                    .collect();
                let open_switching = (0..n_e)
                    .map(|i| {
                        let adj: Vec<LimbStep> = [prev, next].iter().flatten().map(|s| s.limbs[i]).collect();
                        adj.iter().all(|l| l.status == LimbStatus::Open)
                            && adj.iter().any(|l| l.switching)
                    })
                    .collect();
                StateInfo {
                    closed,
                    open_switching,
                }
            })
            .collect();
        Timeline { steps, states }
    }
}
