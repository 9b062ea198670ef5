//! Planar robot and object models, contact kinematics, collision distances
//! and scenario files.

pub(crate) mod geometry;
pub(crate) mod object;
mod scenario;

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::contact_logic::{ContactState, EndEffectorSpec, ObjectContactSpec, RuleConfig};
use crate::ocp::OcpSettings;
use crate::search::SearchConfig;

pub use geometry::{capsule_distance, capsule_distance_grad, signed_distances, Body, CapsuleGrad};
pub use object::{contact_kinematics, object_accel, object_bias, BiasJacobian, ContactKinematics, ObjectPose};
pub use scenario::{parse_scenario, parse_scenario_str, validate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseBounds {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub yaw: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotSpec {
    pub base_bounds: BaseBounds,
    /// (linear [m/s], angular [rad/s]).
    pub v_max_base: [f64; 2],
    /// Base speeds used when generating tracking references; defaults to
    /// `v_max_base`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_v_max: Option<[f64; 2]>,
    pub base_radius: f64,
    pub ee_v_max: f64,
    pub end_effectors: Vec<EndEffectorSpec>,
}

impl RobotSpec {
    pub fn n_limbs(&self) -> usize {
        self.end_effectors.len()
    }

    /// World position of a limb's mount point for base pose `base`.
    pub fn mount_world(&self, limb: usize, base: &Vector3<f64>) -> Vector2<f64> {
        let m = self.end_effectors[limb - 1].mount_offset;
        let (s, c) = base.z.sin_cos();
        Vector2::new(base.x + c * m.x - s * m.y, base.y + s * m.x + c * m.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ObjectKind {
    /// One revolute DoF about `axis`; the link frame has its x-axis along the
    /// link at angle `rest_angle + q`.
    Hinge {
        axis: Vector2<f64>,
        length: f64,
        #[serde(default)]
        rest_angle: f64,
    },
    /// Rigid body sliding on the ground, q = (x, y, yaw).
    PlanarFree { footprint: Vector2<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BiasTerm {
    /// gain·tanh(slope·q[dof])
    PositionTanh { dof: usize, gain: f64, slope: f64 },
    /// gain·tanh(slope·v[dof])
    VelocityTanh { dof: usize, gain: f64, slope: f64 },
    /// coeff·v[dof]
    Viscous { dof: usize, coeff: f64 },
    /// Ground friction of a planar body lumped at footprint vertices (body
    /// frame); each vertex contributes gain·tanh(slope·v_vertex) per axis.
    VertexFriction {
        gain: f64,
        slope: f64,
        vertices: Vec<Vector2<f64>>,
    },
}

/// Capsule in some frame: the segment `a`–`b` inflated by `radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "CapsuleDef")]
pub struct Capsule {
    pub a: Vector2<f64>,
    pub b: Vector2<f64>,
    pub radius: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CapsuleDef {
    Segment {
        a: Vector2<f64>,
        b: Vector2<f64>,
        #[serde(default)]
        radius: f64,
    },
    Circle { center: Vector2<f64>, radius: f64 },
}

impl From<CapsuleDef> for Capsule {
    fn from(d: CapsuleDef) -> Self {
        match d {
            CapsuleDef::Segment { a, b, radius } => Capsule { a, b, radius },
            CapsuleDef::Circle { center, radius } => Capsule {
                a: center,
                b: center,
                radius,
            },
        }
    }
}

impl Capsule {
    pub fn circle(center: Vector2<f64>, radius: f64) -> Self {
        Capsule {
            a: center,
            b: center,
            radius,
        }
    }

    pub fn segment(a: Vector2<f64>, b: Vector2<f64>, radius: f64) -> Self {
        Capsule { a, b, radius }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub kind: ObjectKind,
    pub mass: f64,
    /// Rotational inertia override [kg m^2].
    #[serde(default)]
    pub inertia: Option<f64>,
    #[serde(default)]
    pub bias: Vec<BiasTerm>,
    pub q_bounds: Vec<[f64; 2]>,
    pub v_bounds: Vec<[f64; 2]>,
    pub contacts: Vec<ObjectContactSpec>,
    /// Collision capsules in the object frame.
    #[serde(default)]
    pub collision: Vec<Capsule>,
    pub friction_mu: f64,
    /// Check object bodies against static obstacles. Defaults to true for
    /// planar bodies and false for hinged ones.
    #[serde(default)]
    pub collide_with_obstacles: Option<bool>,
    /// Zero force along the motion-constrained (radial) direction. Defaults
    /// to true for hinged objects.
    #[serde(default)]
    pub no_constrained_force: Option<bool>,
    /// Per-coordinate reference speed limit used when stepping references
    /// and estimating remaining segments.
    #[serde(default)]
    pub reference_v_max: Option<Vec<f64>>,
}

impl ObjectSpec {
    pub fn n_dof(&self) -> usize {
        match self.kind {
            ObjectKind::Hinge { .. } => 1,
            ObjectKind::PlanarFree { .. } => 3,
        }
    }

    pub fn is_free(&self) -> bool {
        matches!(self.kind, ObjectKind::PlanarFree { .. })
    }

    /// Number of object sub-steps per step of length `dt`, chosen so the
    /// explicit treatment of the bias stays non-oscillatory near rest.
    pub fn substeps(&self, dt: f64) -> usize {
        let n = self.n_dof();
        let zeros = [0.0; 3];
        let jac = object::bias_with_jacobian(self, &zeros[..n], &zeros[..n]);
        let mass = self.mass_diag();
        let rate = (0..n)
            .map(|j| {
                let damp: f64 = (0..n).map(|i| jac.db_dv[(j, i)].abs()).sum();
                let stiff: f64 = (0..n).map(|i| jac.db_dq[(j, i)].abs()).sum();
                damp / mass[j] + (stiff / mass[j]).sqrt()
            })
            .fold(0.0, f64::max);
        ((dt * rate).ceil() as usize).max(1)
    }

    /// Diagonal of the generalized mass matrix.
    pub fn mass_diag(&self) -> Vec<f64> {
        match &self.kind {
            ObjectKind::Hinge { length, .. } => {
                vec![self.inertia.unwrap_or(self.mass * length * length / 3.0)]
            }
            ObjectKind::PlanarFree { footprint } => {
                let iz = self.inertia.unwrap_or(
                    self.mass * (footprint.x * footprint.x + footprint.y * footprint.y) / 12.0,
                );
                vec![self.mass, self.mass, iz]
            }
        }
    }

    pub fn collides_with_obstacles(&self) -> bool {
        self.collide_with_obstacles.unwrap_or(self.is_free())
    }

    pub fn constrained_force_zero(&self) -> bool {
        self.no_constrained_force.unwrap_or(!self.is_free())
    }

    pub fn reference_speed(&self, dof: usize) -> f64 {
        self.reference_v_max
            .as_ref()
            .map(|v| v[dof])
            .unwrap_or(0.5)
    }

    pub fn contact(&self, id: usize) -> &ObjectContactSpec {
        &self.contacts[id - 1]
    }
}

/// Robot base pose, end-effector world positions and headings, object
/// coordinates and velocities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridState {
    pub base: [f64; 3],
    pub ee: Vec<[f64; 2]>,
    pub heading: Vec<f64>,
    pub q: Vec<f64>,
    pub v: Vec<f64>,
}

/// Index map of the flat state and input vectors.
///
/// State: `[x, y, yaw, ee_1.x, ee_1.y, …, h_1, …, q…, v…]`.
/// Input: `[v_x, v_y, ω, u_1.x, u_1.y, …, ω_1, …, f_1.x, f_1.y, …]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub n_e: usize,
    pub n_o: usize,
}

impl Layout {
    pub fn new(n_e: usize, n_o: usize) -> Self {
        Layout { n_e, n_o }
    }

    pub fn for_scenario(sc: &Scenario) -> Self {
        Layout::new(sc.robot.n_limbs(), sc.object.n_dof())
    }

    pub fn nx(&self) -> usize {
        3 + 3 * self.n_e + 2 * self.n_o
    }

    pub fn nu(&self) -> usize {
        3 + 5 * self.n_e
    }

    /// Index of the x-coordinate of 1-based `limb`.
    pub fn ee(&self, limb: usize) -> usize {
        3 + 2 * (limb - 1)
    }

    pub fn heading(&self, limb: usize) -> usize {
        3 + 2 * self.n_e + (limb - 1)
    }

    pub fn q(&self, j: usize) -> usize {
        3 + 3 * self.n_e + j
    }

    pub fn v(&self, j: usize) -> usize {
        3 + 3 * self.n_e + self.n_o + j
    }

    pub fn u_ee(&self, limb: usize) -> usize {
        3 + 2 * (limb - 1)
    }

    pub fn u_heading(&self, limb: usize) -> usize {
        3 + 2 * self.n_e + (limb - 1)
    }

    pub fn u_force(&self, limb: usize) -> usize {
        3 + 3 * self.n_e + 2 * (limb - 1)
    }
}

impl HybridState {
    pub fn layout(&self) -> Layout {
        Layout::new(self.ee.len(), self.q.len())
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.layout().nx());
        x.extend_from_slice(&self.base);
        for e in &self.ee {
            x.extend_from_slice(e);
        }
        x.extend_from_slice(&self.heading);
        x.extend_from_slice(&self.q);
        x.extend_from_slice(&self.v);
        x
    }

    pub fn from_flat(layout: Layout, x: &[f64]) -> Self {
        let l = layout;
        HybridState {
            base: [x[0], x[1], x[2]],
            ee: (1..=l.n_e).map(|i| [x[l.ee(i)], x[l.ee(i) + 1]]).collect(),
            heading: (1..=l.n_e).map(|i| x[l.heading(i)]).collect(),
            q: (0..l.n_o).map(|j| x[l.q(j)]).collect(),
            v: (0..l.n_o).map(|j| x[l.v(j)]).collect(),
        }
    }

    pub fn base_vec(&self) -> Vector3<f64> {
        Vector3::from(self.base)
    }

    /// Projection onto the reference space (x, y, yaw, q…).
    pub fn reference_coords(&self) -> Vec<f64> {
        let mut r = self.base.to_vec();
        r.extend_from_slice(&self.q);
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartSpec {
    pub base: [f64; 3],
    /// Defaults to the mount points.
    #[serde(default)]
    pub ee: Option<Vec<[f64; 2]>>,
    /// Defaults to the base yaw.
    #[serde(default)]
    pub heading: Option<Vec<f64>>,
    pub q: Vec<f64>,
    #[serde(default)]
    pub v: Option<Vec<f64>>,
    #[serde(default)]
    pub contact_state: Option<Vec<usize>>,
}

fn default_goal_delta() -> f64 {
    0.15
}

/// Goal region over the reference space (x, y, yaw, q…).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalSpec {
    pub mu: Vec<f64>,
    pub sigma_diag: Vec<f64>,
    /// Reference-space indices that must reach `mu`.
    pub select: Vec<usize>,
    #[serde(default = "default_goal_delta")]
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingBounds {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub robot: RobotSpec,
    pub object: ObjectSpec,
    #[serde(default)]
    pub obstacles: Vec<Capsule>,
    pub start: StartSpec,
    pub goal: GoalSpec,
    pub sampling: SamplingBounds,
    #[serde(default)]
    pub rules: RuleConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub ocp: OcpSettings,
    #[serde(default)]
    pub search: SearchConfig,
}

impl Scenario {
    pub fn layout(&self) -> Layout {
        Layout::for_scenario(self)
    }

    /// Start state with defaults filled in.
    pub fn start_state(&self) -> HybridState {
        let st = &self.start;
        let base = Vector3::from(st.base);
        let ee = st.ee.clone().unwrap_or_else(|| {
            (1..=self.robot.n_limbs())
                .map(|i| {
                    let m = self.robot.mount_world(i, &base);
                    [m.x, m.y]
                })
                .collect()
        });
        let heading = st
            .heading
            .clone()
            .unwrap_or_else(|| vec![st.base[2]; self.robot.n_limbs()]);
        HybridState {
            base: st.base,
            ee,
            heading,
            q: st.q.clone(),
            v: st.v.clone().unwrap_or_else(|| vec![0.0; self.object.n_dof()]),
        }
    }

    pub fn start_contact_state(&self) -> ContactState {
        self.start
            .contact_state
            .clone()
            .map(ContactState)
            .unwrap_or_else(|| ContactState::open(self.robot.n_limbs()))
    }

    /// Per-coordinate speed limits of the reference space.
    pub fn reference_speeds(&self) -> Vec<f64> {
        let [lin, ang] = self.robot.reference_v_max.unwrap_or(self.robot.v_max_base);
        let mut v = vec![lin, lin, ang];
        v.extend((0..self.object.n_dof()).map(|j| self.object.reference_speed(j)));
        v
    }
}

pub mod presets;

#[cfg(test)]
pub(crate) mod test_support {
    use super::{parse_scenario_str, Scenario};

    pub fn door_scenario_json() -> String {
        include_str!("../../../../scenarios/door_pull.json").to_string()
    }

    pub fn door_scenario() -> Scenario {
        parse_scenario_str(&door_scenario_json()).expect("door scenario")
    }

    pub fn box_scenario() -> Scenario {
        parse_scenario_str(include_str!("../../../../scenarios/box_push.json")).expect("box scenario")
    }
}
