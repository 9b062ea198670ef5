//! Discrete contact modes: contact states, switching actions, the transition
//! map, the rule-based admissible-action filter and per-segment mode schedules.
//!
//! Limb and contact indices are 1-based throughout; `0` means "none"
//! (an open slot in a [`ContactState`], "maintain" or "break" in a
//! [`SwitchAction`]).

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

/// Tolerance used when comparing schedule instants.
const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimbKind {
    Arm,
    Foot,
}

/// A robot end-effector that can take part in manipulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndEffectorSpec {
    pub id: usize,
    pub kind: LimbKind,
    pub prehensile: bool,
    /// Mount point in the base frame [m].
    pub mount_offset: Vector2<f64>,
    /// Radius of the reachable disk around the mount point [m].
    pub reach_radius: f64,
    /// Radius of the collision disk used while the limb switches contact [m].
    #[serde(default = "default_ee_collision_radius")]
    pub collision_radius: f64,
    /// Optional bound on |heading - base yaw| [rad] (wrist range).
    #[serde(default)]
    pub heading_limit: Option<f64>,
}

fn default_ee_collision_radius() -> f64 {
    0.02
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactGeometry {
    /// A single point in the object frame.
    Point { position: Vector2<f64> },
    /// A segment in the object frame; any point on it may be used.
    Surface {
        start: Vector2<f64>,
        end: Vector2<f64>,
    },
}

/// A user-specified object affordance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectContactSpec {
    pub id: usize,
    pub geometry: ContactGeometry,
    pub prehensile: bool,
    /// Unit normal in the object frame, pointing into the object
    /// (the pushing direction).
    pub normal: Vector2<f64>,
    /// Object DoF index the contact acts on.
    #[serde(default)]
    pub lever_link: usize,
}

impl ObjectContactSpec {
    pub fn is_point(&self) -> bool {
        matches!(self.geometry, ContactGeometry::Point { .. })
    }

    /// Reference point in the object frame: the point itself, or the
    /// segment start for surfaces.
    pub fn anchor(&self) -> Vector2<f64> {
        match &self.geometry {
            ContactGeometry::Point { position } => *position,
            ContactGeometry::Surface { start, .. } => *start,
        }
    }

    /// Unit tangent in the object frame.
    pub fn tangent(&self) -> Vector2<f64> {
        match &self.geometry {
            ContactGeometry::Point { .. } => Vector2::new(-self.normal.y, self.normal.x),
            ContactGeometry::Surface { start, end } => (end - start).normalize(),
        }
    }

    /// Segment length for surfaces, zero for points.
    pub fn surface_length(&self) -> f64 {
        match &self.geometry {
            ContactGeometry::Point { .. } => 0.0,
            ContactGeometry::Surface { start, end } => (end - start).norm(),
        }
    }
}

/// Per-limb assignment to object contacts; `0` is an open slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ContactState(pub Vec<usize>);

impl ContactState {
    pub fn open(n_limbs: usize) -> Self {
        ContactState(vec![0; n_limbs])
    }

    pub fn n_limbs(&self) -> usize {
        self.0.len()
    }

    /// Contact held by 1-based `limb`.
    pub fn slot(&self, limb: usize) -> usize {
        self.0[limb - 1]
    }

    pub fn closed_limbs(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, _)| i + 1)
    }

    pub fn has_object_contact(&self) -> bool {
        self.0.iter().any(|&c| c != 0)
    }
}

impl fmt::Display for ContactState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// `(limb, contact)`: limb 0 maintains the state, contact 0 breaks the
/// limb's contact, anything else establishes `contact` on `limb`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SwitchAction {
    pub limb: usize,
    pub contact: usize,
}

impl SwitchAction {
    pub const MAINTAIN: SwitchAction = SwitchAction { limb: 0, contact: 0 };

    pub fn new(limb: usize, contact: usize) -> Self {
        SwitchAction { limb, contact }
    }

    pub fn is_switch(&self) -> bool {
        self.limb != 0
    }

    pub fn is_break(&self) -> bool {
        self.limb != 0 && self.contact == 0
    }

    pub fn is_establish(&self) -> bool {
        self.limb != 0 && self.contact != 0
    }
}

impl fmt::Display for SwitchAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {})", self.limb, self.contact)
    }
}

/// The transition map: slot `a.limb` takes `a.contact`, everything else is kept.
pub fn transition(s: &ContactState, a: SwitchAction) -> ContactState {
    let mut next = s.clone();
    if a.limb != 0 {
        next.0[a.limb - 1] = a.contact;
    }
    next
}

/// Built-in pruning rules. They are always active in normal operation;
/// disabling is reserved for ablation runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoreRule {
    /// R1: a contact established by the previous action may not be broken now.
    NoImmediateBreak,
    /// R3: a limb may establish a contact only from an open slot.
    EstablishFromOpen,
    /// R4: a point contact is occupied by at most one limb.
    SinglePointOccupancy,
    /// R5: nonprehensile end-effectors never take prehensile contacts.
    PrehensilePairing,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RuleConfig {
    /// Reject contact-making while the object is moving freely.
    pub forbid_contact_with_free_object: bool,
    /// Never break the last remaining object contact.
    pub require_continuous_contact: bool,
    /// Core rules switched off (ablation only).
    pub disabled: BTreeSet<CoreRule>,
}

impl RuleConfig {
    pub fn enabled(&self, rule: CoreRule) -> bool {
        !self.disabled.contains(&rule)
    }
}

/// Admissible switching actions from `s`, given the state `s_prev` of the
/// parent node (`None` at the root).
///
/// The result is sorted; the maintain action `(0 0)` is always first.
pub fn admissible_actions(
    s: &ContactState,
    s_prev: Option<&ContactState>,
    end_effectors: &[EndEffectorSpec],
    contacts: &[ObjectContactSpec],
    rules: &RuleConfig,
    object_free: bool,
) -> Vec<SwitchAction> {
    let mut actions = vec![SwitchAction::MAINTAIN];
    let n_closed = s.closed_limbs().count();
    for ee in end_effectors {
        let limb = ee.id;
        let held = s.slot(limb);
        if held != 0 {
            let newly_established = s_prev.is_some_and(|p| p.slot(limb) != held);
            let r1_blocks = rules.enabled(CoreRule::NoImmediateBreak) && newly_established;
            let continuity_blocks = rules.require_continuous_contact && n_closed == 1;
            if !r1_blocks && !continuity_blocks {
                actions.push(SwitchAction::new(limb, 0));
            }
            if rules.enabled(CoreRule::EstablishFromOpen) {
                continue;
            }
        }
        if rules.forbid_contact_with_free_object && object_free {
            continue;
        }
        for oc in contacts {
            if oc.id == held {
                continue;
            }
            if rules.enabled(CoreRule::PrehensilePairing) && oc.prehensile && !ee.prehensile {
                continue;
            }
            if rules.enabled(CoreRule::SinglePointOccupancy) && oc.is_point() {
                let taken = s
                    .0
                    .iter()
                    .enumerate()
                    .any(|(i, &c)| c == oc.id && i + 1 != limb);
                if taken {
                    continue;
                }
            }
            actions.push(SwitchAction::new(limb, oc.id));
        }
    }
    actions
}

/// Limb sets induced by a mode `(s, a)`. All sets hold 1-based limb ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ContactSets {
    pub open: BTreeSet<usize>,
    pub object: BTreeSet<usize>,
    pub breaking: BTreeSet<usize>,
    pub establishing: BTreeSet<usize>,
    pub switching: BTreeSet<usize>,
    pub active: BTreeSet<usize>,
}

pub fn classify_sets(s: &ContactState, a: SwitchAction) -> ContactSets {
    let mut sets = ContactSets::default();
    if a.is_break() {
        sets.breaking.insert(a.limb);
    } else if a.is_establish() {
        sets.establishing.insert(a.limb);
    }
    sets.switching = sets.breaking.union(&sets.establishing).copied().collect();
    for limb in 1..=s.n_limbs() {
        if sets.switching.contains(&limb) {
            continue;
        }
        if s.slot(limb) == 0 {
            sets.open.insert(limb);
        } else {
            sets.object.insert(limb);
        }
    }
    sets.active = sets.switching.union(&sets.object).copied().collect();
    sets
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimbStatus {
    Open,
    Closed,
    Approaching,
    Retracting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub start: f64,
    pub statuses: Vec<LimbStatus>,
}

/// Timing parameters of contact-making and contact-breaking segments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScheduleTiming {
    pub delta_approach: f64,
    pub delta_retract: f64,
    /// Switch instant as a fraction of the horizon.
    pub switch_fraction: f64,
}

impl Default for ScheduleTiming {
    fn default() -> Self {
        ScheduleTiming {
            delta_approach: 0.3,
            delta_retract: 0.3,
            switch_fraction: 0.5,
        }
    }
}

/// Within-segment mode sequence with its switching instants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSchedule {
    pub horizon: f64,
    pub phases: Vec<Phase>,
    pub t_close: Option<f64>,
    pub t_open: Option<f64>,
    pub delta_approach: f64,
    pub delta_retract: f64,
    pub base_frozen: bool,
    /// The limb whose status changes, if any.
    pub switching_limb: Option<usize>,
}

impl ModeSchedule {
    /// Status of 1-based `limb` at time `t` (right-continuous).
    pub fn status_at(&self, limb: usize, t: f64) -> LimbStatus {
        let phase = self
            .phases
            .iter()
            .rev()
            .find(|p| p.start <= t + TIME_EPS)
            .unwrap_or(&self.phases[0]);
        phase.statuses[limb - 1]
    }

    pub fn n_limbs(&self) -> usize {
        self.phases[0].statuses.len()
    }
}

pub fn build_mode_schedule(s: &ContactState, a: SwitchAction, horizon: f64) -> ModeSchedule {
    build_mode_schedule_with(s, a, horizon, &ScheduleTiming::default())
}

pub fn build_mode_schedule_with(
    s: &ContactState,
    a: SwitchAction,
    horizon: f64,
    timing: &ScheduleTiming,
) -> ModeSchedule {
    let base: Vec<LimbStatus> = s
        .0
        .iter()
        .map(|&c| if c == 0 { LimbStatus::Open } else { LimbStatus::Closed })
        .collect();
    let mut schedule = ModeSchedule {
        horizon,
        phases: vec![Phase {
            start: 0.0,
            statuses: base.clone(),
        }],
        t_close: None,
        t_open: None,
        delta_approach: timing.delta_approach,
        delta_retract: timing.delta_retract,
        base_frozen: false,
        switching_limb: None,
    };
    if !a.is_switch() {
        return schedule;
    }
    let switch_at = timing.switch_fraction * horizon;
    let idx = a.limb - 1;
    let with = |status: LimbStatus| {
        let mut v = base.clone();
        v[idx] = status;
        v
    };
    let push = |phases: &mut Vec<Phase>, start: f64, statuses: Vec<LimbStatus>| {
        let start = start.clamp(0.0, horizon);
        match phases.last_mut() {
            Some(last) if (last.start - start).abs() < TIME_EPS => last.statuses = statuses,
            _ => phases.push(Phase { start, statuses }),
        }
    };
    let mut phases = Vec::new();
    if a.is_establish() && s.slot(a.limb) != 0 {
        // hand-over on the same limb: held on the old contact until the
        // switch, on the new one after it
        push(&mut phases, 0.0, with(LimbStatus::Closed));
        schedule.t_close = Some(switch_at);
    } else if a.is_establish() {
        push(&mut phases, 0.0, with(LimbStatus::Open));
        push(&mut phases, switch_at - timing.delta_approach, with(LimbStatus::Approaching));
        push(&mut phases, switch_at, with(LimbStatus::Closed));
        schedule.t_close = Some(switch_at);
    } else {
        push(&mut phases, 0.0, with(LimbStatus::Closed));
        push(&mut phases, switch_at, with(LimbStatus::Retracting));
        push(&mut phases, switch_at + timing.delta_retract, with(LimbStatus::Open));
        schedule.t_open = Some(switch_at);
    }
    schedule.phases = phases;
    schedule.base_frozen = true;
    schedule.switching_limb = Some(a.limb);
    schedule
}
