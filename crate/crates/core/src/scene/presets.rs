//! Object models with the friction and recoil parameters of the reference
//! set of articulated objects. Geometric dimensions are example values.

use nalgebra::Vector2;

use super::{BiasTerm, Capsule, ObjectKind, ObjectSpec};
use crate::contact_logic::{ContactGeometry, ObjectContactSpec};

fn point(id: usize, x: f64, y: f64, normal: Vector2<f64>, prehensile: bool) -> ObjectContactSpec {
    ObjectContactSpec {
        id,
        geometry: ContactGeometry::Point {
            position: Vector2::new(x, y),
        },
        prehensile,
        normal,
        lever_link: 0,
    }
}

/// Door: 40 kg, 0.9 m leaf, recoil 15·tanh(15q) plus viscous 10·v. Contact 1
/// is a prehensile handle 0.7 m from the hinge, contact 2 the push face.
pub fn door_object() -> ObjectSpec {
    ObjectSpec {
        kind: ObjectKind::Hinge {
            axis: Vector2::zeros(),
            length: 0.9,
            rest_angle: 0.0,
        },
        mass: 40.0,
        inertia: None,
        bias: vec![
            BiasTerm::PositionTanh {
                dof: 0,
                gain: 15.0,
                slope: 15.0,
            },
            BiasTerm::Viscous { dof: 0, coeff: 10.0 },
        ],
        q_bounds: vec![[-1.7, 1.7]],
        v_bounds: vec![[-2.0, 2.0]],
        contacts: vec![
            point(1, 0.7, 0.0, Vector2::new(0.0, 1.0), true),
            ObjectContactSpec {
                id: 2,
                geometry: ContactGeometry::Surface {
                    start: Vector2::new(0.2, -0.02),
                    end: Vector2::new(0.85, -0.02),
                },
                prehensile: false,
                normal: Vector2::new(0.0, 1.0),
                lever_link: 0,
            },
        ],
        collision: vec![Capsule::segment(Vector2::zeros(), Vector2::new(0.9, 0.0), 0.02)],
        friction_mu: 0.7,
        collide_with_obstacles: None,
        no_constrained_force: None,
        reference_v_max: Some(vec![0.5]),
    }
}

/// Dishwasher door: 25 kg, 0.6 m, friction 20·tanh(20·v).
pub fn dishwasher_object() -> ObjectSpec {
    ObjectSpec {
        kind: ObjectKind::Hinge {
            axis: Vector2::zeros(),
            length: 0.6,
            rest_angle: 0.0,
        },
        mass: 25.0,
        inertia: None,
        bias: vec![BiasTerm::VelocityTanh {
            dof: 0,
            gain: 20.0,
            slope: 20.0,
        }],
        q_bounds: vec![[-1.6, 0.0]],
        v_bounds: vec![[-2.0, 2.0]],
        contacts: vec![point(1, 0.55, 0.0, Vector2::new(0.0, 1.0), true)],
        collision: vec![Capsule::segment(Vector2::zeros(), Vector2::new(0.6, 0.0), 0.02)],
        friction_mu: 0.7,
        collide_with_obstacles: None,
        no_constrained_force: None,
        reference_v_max: Some(vec![0.5]),
    }
}

/// Valve wheel: 2 kg ring of `radius`, friction tanh(v), four prehensile rim
/// grasps at quarter turns with inward normals.
pub fn valve_object_with_radius(radius: f64) -> ObjectSpec {
    let contacts = (0..4)
        .map(|i| {
            let a = i as f64 * std::f64::consts::FRAC_PI_2;
            let (s, c) = a.sin_cos();
            point(i + 1, radius * c, radius * s, Vector2::new(-c, -s), true)
        })
        .collect();
    ObjectSpec {
        kind: ObjectKind::Hinge {
            axis: Vector2::zeros(),
            length: radius,
            rest_angle: 0.0,
        },
        mass: 2.0,
        inertia: Some(2.0 * radius * radius),
        bias: vec![BiasTerm::VelocityTanh {
            dof: 0,
            gain: 1.0,
            slope: 1.0,
        }],
        q_bounds: vec![[-7.0, 7.0]],
        v_bounds: vec![[-3.0, 3.0]],
        contacts,
        collision: vec![Capsule::circle(Vector2::zeros(), radius - 0.05)],
        friction_mu: 0.7,
        collide_with_obstacles: None,
        no_constrained_force: None,
        reference_v_max: Some(vec![0.6]),
    }
}

pub fn valve_object() -> ObjectSpec {
    valve_object_with_radius(0.4)
}

/// Box: 2 kg, 0.6×0.6 m footprint, μ = 0.7, ground friction lumped at the
/// four footprint corners as 3.4·tanh(3.4·v). Contacts 1–4 are the faces at
/// −x, +x, −y, +y with inward normals.
pub fn box_object() -> ObjectSpec {
    let h = 0.3;
    let face = |id: usize, start: [f64; 2], end: [f64; 2], n: [f64; 2]| ObjectContactSpec {
        id,
        geometry: ContactGeometry::Surface {
            start: Vector2::from(start),
            end: Vector2::from(end),
        },
        prehensile: false,
        normal: Vector2::from(n),
        lever_link: 0,
    };
    let corners = [
        Vector2::new(-h, -h),
        Vector2::new(h, -h),
        Vector2::new(h, h),
        Vector2::new(-h, h),
    ];
    let mut collision: Vec<Capsule> = (0..4)
        .map(|i| Capsule::segment(corners[i], corners[(i + 1) % 4], 0.0))
        .collect();
    collision.push(Capsule::circle(Vector2::zeros(), 0.25));
    ObjectSpec {
        kind: ObjectKind::PlanarFree {
            footprint: Vector2::new(2.0 * h, 2.0 * h),
        },
        mass: 2.0,
        inertia: None,
        bias: vec![BiasTerm::VertexFriction {
            gain: 3.4,
            slope: 3.4,
            vertices: corners.to_vec(),
        }],
        q_bounds: vec![[-10.0, 10.0], [-10.0, 10.0], [-7.0, 7.0]],
        v_bounds: vec![[-1.0, 1.0], [-1.0, 1.0], [-2.0, 2.0]],
        contacts: vec![
            face(1, [-h, -h], [-h, h], [1.0, 0.0]),
            face(2, [h, h], [h, -h], [-1.0, 0.0]),
            face(3, [h, -h], [-h, -h], [0.0, 1.0]),
            face(4, [-h, h], [h, h], [0.0, -1.0]),
        ],
        collision,
        friction_mu: 0.7,
        collide_with_obstacles: None,
        no_constrained_force: None,
        reference_v_max: Some(vec![0.4, 0.4, 0.5]),
    }
}
