use nalgebra::{Vector2, Vector3};

use super::object::ObjectPose;
use super::{Capsule, HybridState, Scenario};

const EPS: f64 = 1e-12;

/// Closest-point parameters (s, t) of segments p1–q1 and p2–q2.
fn closest_params(p1: Vector2<f64>, q1: Vector2<f64>, p2: Vector2<f64>, q2: Vector2<f64>) -> (f64, f64) {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.dot(&d1);
    let e = d2.dot(&d2);
    let f = d2.dot(&r);
    if a <= EPS && e <= EPS {
        return (0.0, 0.0);
    }
    if a <= EPS {
        return (0.0, (f / e).clamp(0.0, 1.0));
    }
    let c = d1.dot(&r);
    if e <= EPS {
        return ((-c / a).clamp(0.0, 1.0), 0.0);
    }
    let b = d1.dot(&d2);
    let denom = a * e - b * b;
    let mut s = if denom > EPS * a * e {
        ((b * f - c * e) / denom).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let mut t = (b * s + f) / e;
    if t < 0.0 {
        t = 0.0;
        s = (-c / a).clamp(0.0, 1.0);
    } else if t > 1.0 {
        t = 1.0;
        s = ((b - c) / a).clamp(0.0, 1.0);
    }
    (s, t)
}

/// Signed distance between two capsules; negative when they overlap.
pub fn capsule_distance(a: &Capsule, b: &Capsule) -> f64 {
    capsule_distance_grad(a, b).d
}

/// Distance with derivatives w.r.t. the four segment endpoints.
#[derive(Debug, Clone, Copy)]
pub struct CapsuleGrad {
    pub d: f64,
    pub d_a0: Vector2<f64>,
    pub d_a1: Vector2<f64>,
    pub d_b0: Vector2<f64>,
    pub d_b1: Vector2<f64>,
}

pub fn capsule_distance_grad(a: &Capsule, b: &Capsule) -> CapsuleGrad {
    let (s, t) = closest_params(a.a, a.b, b.a, b.b);
    let pa = a.a + (a.b - a.a) * s;
    let pb = b.a + (b.b - b.a) * t;
    let diff = pa - pb;
    let dist = diff.norm();
    let n = if dist > EPS { diff / dist } else { Vector2::zeros() };
    CapsuleGrad {
        d: dist - a.radius - b.radius,
        d_a0: n * (1.0 - s),
        d_a1: n * s,
        d_b0: -n * (1.0 - t),
        d_b1: -n * t,
    }
}

/// A collision body of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Body {
    Base,
    /// End-effector disk of a 1-based limb.
    Limb(usize),
    /// Object collision capsule by index.
    Object(usize),
    Obstacle(usize),
}

pub(crate) fn world_capsule(body: Body, state: &HybridState, sc: &Scenario) -> Capsule {
    match body {
        Body::Base => Capsule::circle(Vector2::new(state.base[0], state.base[1]), sc.robot.base_radius),
        Body::Limb(i) => Capsule::circle(
            Vector2::from(state.ee[i - 1]),
            sc.robot.end_effectors[i - 1].collision_radius,
        ),
        Body::Object(k) => {
            let pose = ObjectPose::new(&sc.object, &state.q);
            let c = &sc.object.collision[k];
            Capsule::segment(pose.to_world(c.a), pose.to_world(c.b), c.radius)
        }
        Body::Obstacle(k) => sc.obstacles[k],
    }
}

/// Exact signed distance for each body pair.
pub fn signed_distances(state: &HybridState, sc: &Scenario, pairs: &[(Body, Body)]) -> Vec<f64> {
    pairs
        .iter()
        .map(|(a, b)| capsule_distance(&world_capsule(*a, state, sc), &world_capsule(*b, state, sc)))
        .collect()
}

/// Base-frame mount point in world coordinates with its derivative w.r.t. yaw.
pub(crate) fn mount_with_yaw_derivative(
    offset: Vector2<f64>,
    base: &Vector3<f64>,
) -> (Vector2<f64>, Vector2<f64>) {
    let (s, c) = base.z.sin_cos();
    let r = Vector2::new(c * offset.x - s * offset.y, s * offset.x + c * offset.y);
    (Vector2::new(base.x, base.y) + r, Vector2::new(-r.y, r.x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(x: f64, y: f64) -> Vector2<f64> {
        Vector2::new(x, y)
    }

    #[test]
    fn circle_pair() {
        let a = Capsule::circle(v(0.0, 0.0), 0.1);
        let b = Capsule::circle(v(0.5, 0.0), 0.1);
        assert!((capsule_distance(&a, &b) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn point_on_segment() {
        let seg = Capsule::segment(v(-1.0, 0.0), v(1.0, 0.0), 0.05);
        let p = Capsule::circle(v(0.3, 0.0), 0.1);
        assert!((capsule_distance(&seg, &p) + 0.15).abs() < 1e-12);
        let bare = Capsule::segment(v(-1.0, 0.0), v(1.0, 0.0), 0.0);
        let q = Capsule::circle(v(0.3, 0.0), 0.0);
        assert!(capsule_distance(&bare, &q).abs() < 1e-12);
    }

    #[test]
    fn base_against_wall() {
        let wall = Capsule::segment(v(0.0, -2.0), v(0.0, 2.0), 0.0);
        let base = Capsule::circle(v(0.25, 0.3), 0.3);
        assert!((capsule_distance(&wall, &base) + 0.05).abs() < 1e-12);
    }

    #[test]
    fn crossing_segments_touch() {
        let a = Capsule::segment(v(-1.0, 0.0), v(1.0, 0.0), 0.0);
        let b = Capsule::segment(v(0.0, -1.0), v(0.0, 1.0), 0.0);
        assert_eq!(capsule_distance(&a, &b), 0.0);
    }

    fn arb_capsule() -> impl Strategy<Value = Capsule> {
        (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64, 0.0..0.5f64)
            .prop_map(|(ax, ay, bx, by, r)| Capsule::segment(v(ax, ay), v(bx, by), r))
    }

    fn moved(c: &Capsule, th: f64, t: Vector2<f64>) -> Capsule {
        let r = super::super::object::rot(th);
        Capsule::segment(r * c.a + t, r * c.b + t, c.radius)
    }

    proptest! {
        #[test]
        fn symmetric(a in arb_capsule(), b in arb_capsule()) {
            let d1 = capsule_distance(&a, &b);
            let d2 = capsule_distance(&b, &a);
            prop_assert!((d1 - d2).abs() < 1e-9);
        }

        #[test]
        fn rigid_invariant(a in arb_capsule(), b in arb_capsule(), th in -3.0..3.0f64,
                           tx in -5.0..5.0f64, ty in -5.0..5.0f64) {
            let d1 = capsule_distance(&a, &b);
            let d2 = capsule_distance(&moved(&a, th, v(tx, ty)), &moved(&b, th, v(tx, ty)));
            prop_assert!((d1 - d2).abs() < 1e-9);
        }

        #[test]
        fn gradient_matches_fd(a in arb_capsule(), b in arb_capsule()) {
            let g = capsule_distance_grad(&a, &b);
            prop_assume!(g.d + a.radius + b.radius > 1e-3);
            let h = 1e-7;
            let mut e = Vector2::zeros();
            e[0] = h;
            let mut ap = a; ap.a += e;
            let mut am = a; am.a -= e;
            let fd = (capsule_distance(&ap, &b) - capsule_distance(&am, &b)) / (2.0 * h);
            prop_assert!((fd - g.d_a0.x).abs() < 1e-4);
        }
    }
}
