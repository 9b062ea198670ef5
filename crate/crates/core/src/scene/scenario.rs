use std::collections::BTreeSet;
use std::path::Path;

use super::object::bias_with_jacobian;
use super::{BiasTerm, ObjectKind, Scenario};
use crate::contact_logic::ContactGeometry;
use crate::error::ScenarioError;

/// Read, parse and validate a scenario file.
pub fn parse_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario_str(&text)
}

pub fn parse_scenario_str(text: &str) -> Result<Scenario, ScenarioError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        ScenarioError::Schema {
            field,
            message: e.into_inner().to_string(),
        }
    })?;
    validate(&scenario)?;
    Ok(scenario)
}

fn check(cond: bool, invariant: &str, detail: impl FnOnce() -> String) -> Result<(), ScenarioError> {
    if cond {
        Ok(())
    } else {
        Err(ScenarioError::invariant(invariant, detail()))
    }
}

fn finite_range(r: &[f64; 2]) -> bool {
    r[0].is_finite() && r[1].is_finite() && r[0] <= r[1]
}

/// Check every model invariant of a scenario.
pub fn validate(sc: &Scenario) -> Result<(), ScenarioError> {
    let robot = &sc.robot;
    let obj = &sc.object;
    let n_e = robot.n_limbs();
    let n_o = obj.n_dof();
    let n_c = obj.contacts.len();
    let n_r = 3 + n_o;

    let bb = &robot.base_bounds;
    check(
        finite_range(&bb.x) && finite_range(&bb.y) && finite_range(&bb.yaw),
        "RobotSpec.base_bounds finite and ordered",
        || format!("{bb:?}"),
    )?;
    check(
        robot.v_max_base.iter().all(|v| v.is_finite() && *v > 0.0),
        "RobotSpec.v_max_base > 0",
        || format!("{:?}", robot.v_max_base),
    )?;
    if let Some(r) = robot.reference_v_max {
        check(
            r.iter().all(|v| v.is_finite() && *v > 0.0),
            "RobotSpec.reference_v_max > 0",
            || format!("{r:?}"),
        )?;
    }
    check(robot.ee_v_max > 0.0 && robot.ee_v_max.is_finite(), "RobotSpec.ee_v_max > 0", || {
        robot.ee_v_max.to_string()
    })?;
    check(robot.base_radius > 0.0, "RobotSpec.base_radius > 0", || robot.base_radius.to_string())?;
    check(n_e > 0, "RobotSpec has at least one end-effector", String::new)?;
    for (i, ee) in robot.end_effectors.iter().enumerate() {
        check(ee.id == i + 1, "EndEffectorSpec ids form 1..n_e", || {
            format!("position {} has id {}", i + 1, ee.id)
        })?;
        check(ee.reach_radius > 0.0, "EndEffectorSpec.reach_radius > 0", || {
            format!("limb {} has reach_radius {}", ee.id, ee.reach_radius)
        })?;
        check(ee.collision_radius >= 0.0, "EndEffectorSpec.collision_radius >= 0", || {
            format!("limb {}", ee.id)
        })?;
        check(
            ee.mount_offset.iter().all(|v| v.is_finite()),
            "EndEffectorSpec.mount_offset finite",
            || format!("limb {}", ee.id),
        )?;
    }

    check(obj.mass > 0.0, "ObjectSpec.mass > 0", || obj.mass.to_string())?;
    check(
        obj.mass_diag().iter().all(|m| *m > 0.0 && m.is_finite()),
        "ObjectSpec inertia symmetric positive definite",
        || format!("{:?}", obj.mass_diag()),
    )?;
    check(obj.friction_mu > 0.0, "ObjectSpec.friction_mu > 0", || obj.friction_mu.to_string())?;
    match &obj.kind {
        ObjectKind::Hinge { length, .. } => {
            check(*length > 0.0, "ObjectSpec hinge length > 0", || length.to_string())?
        }
        ObjectKind::PlanarFree { footprint } => check(
            footprint.x > 0.0 && footprint.y > 0.0,
            "ObjectSpec footprint > 0",
            || format!("{footprint:?}"),
        )?,
    }
    check(
        obj.q_bounds.len() == n_o && obj.v_bounds.len() == n_o,
        "ObjectSpec bounds have n_o entries",
        || format!("expected {n_o}"),
    )?;
    check(
        obj.q_bounds.iter().chain(&obj.v_bounds).all(finite_range),
        "ObjectSpec bounds finite and ordered",
        String::new,
    )?;
    if let Some(vm) = &obj.reference_v_max {
        check(
            vm.len() == n_o && vm.iter().all(|v| *v > 0.0),
            "ObjectSpec.reference_v_max has n_o positive entries",
            || format!("{vm:?}"),
        )?;
    }
    for term in &obj.bias {
        match term {
            BiasTerm::PositionTanh { dof, .. }
            | BiasTerm::VelocityTanh { dof, .. }
            | BiasTerm::Viscous { dof, .. } => {
                check(*dof < n_o, "bias term dof index valid", || dof.to_string())?
            }
            BiasTerm::VertexFriction { vertices, .. } => check(
                obj.is_free() && !vertices.is_empty(),
                "vertex friction only on planar_free objects",
                String::new,
            )?,
        }
    }
    // bias must stay finite over the state box
    let corners = 1usize << (2 * n_o);
    for mask in 0..corners {
        let q: Vec<f64> = (0..n_o).map(|j| obj.q_bounds[j][(mask >> j) & 1]).collect();
        let v: Vec<f64> = (0..n_o)
            .map(|j| obj.v_bounds[j][(mask >> (n_o + j)) & 1])
            .collect();
        let b = bias_with_jacobian(obj, &q, &v).b;
        check(
            b.iter().all(|x| x.is_finite()),
            "bias terms evaluate finitely on the bounded state box",
            || format!("q={q:?} v={v:?}"),
        )?;
    }

    for (i, c) in obj.contacts.iter().enumerate() {
        check(c.id == i + 1, "ObjectContactSpec ids form 1..n_c", || {
            format!("position {} has id {}", i + 1, c.id)
        })?;
        check((c.normal.norm() - 1.0).abs() < 1e-6, "ObjectContactSpec.normal has unit length", || {
            format!("contact {} normal norm {}", c.id, c.normal.norm())
        })?;
        check(c.lever_link < n_o, "ObjectContactSpec.lever_link < n_o", || {
            format!("contact {}", c.id)
        })?;
        if let ContactGeometry::Surface { start, end } = &c.geometry {
            check(!c.prehensile, "surface contacts are never prehensile", || {
                format!("contact {}", c.id)
            })?;
            check((end - start).norm() > 0.0, "surface contacts have positive length", || {
                format!("contact {}", c.id)
            })?;
        }
    }
    for cap in obj.collision.iter().chain(&sc.obstacles) {
        check(cap.radius >= 0.0, "collision radius >= 0", || format!("{cap:?}"))?;
    }

    let st = &sc.start;
    check(
        st.q.len() == n_o && st.v.as_ref().is_none_or(|v| v.len() == n_o),
        "start q/v have n_o entries",
        String::new,
    )?;
    if let Some(ee) = &st.ee {
        check(ee.len() == n_e, "start ee has n_e entries", String::new)?;
    }
    if let Some(h) = &st.heading {
        check(h.len() == n_e, "start heading has n_e entries", String::new)?;
    }
    if let Some(cs) = &st.contact_state {
        check(
            cs.len() == n_e && cs.iter().all(|c| *c <= n_c),
            "start contact_state has n_e slots within 0..n_c",
            || format!("{cs:?}"),
        )?;
        for (i, c) in cs.iter().enumerate() {
            if *c != 0 && obj.contact(*c).is_point() {
                check(
                    cs.iter().filter(|d| *d == c).count() == 1,
                    "ContactState point contact occupied by one limb",
                    || format!("contact {c} at slot {}", i + 1),
                )?;
            }
        }
    }

    let g = &sc.goal;
    check(g.delta > 0.0, "goal delta > 0", || g.delta.to_string())?;
    check(
        g.mu.len() == n_r && g.sigma_diag.len() == n_r,
        "goal mu/sigma have 3+n_o entries",
        || format!("expected {n_r}"),
    )?;
    check(
        g.sigma_diag.iter().all(|s| *s >= 0.0 && s.is_finite()),
        "goal sigma diagonal nonnegative",
        || format!("{:?}", g.sigma_diag),
    )?;
    let uniq: BTreeSet<_> = g.select.iter().collect();
    check(
        !g.select.is_empty() && uniq.len() == g.select.len() && g.select.iter().all(|i| *i < n_r),
        "goal select indices valid",
        || format!("{:?}", g.select),
    )?;

    let sm = &sc.sampling;
    check(
        sm.min.len() == n_r && sm.max.len() == n_r && sm.min.iter().zip(&sm.max).all(|(a, b)| a <= b),
        "sampling bounds have 3+n_o ordered entries",
        String::new,
    )?;

    let o = &sc.ocp;
    let steps = o.horizon / o.dt;
    check(
        o.dt > 0.0 && o.horizon > 0.0 && (steps - steps.round()).abs() < 1e-9,
        "horizon/dt integral",
        || format!("T={} dt={}", o.horizon, o.dt),
    )?;
    check(o.weights.is_valid(), "cost weights nonnegative, input weights positive", String::new)?;
    if let Some(tw) = &o.weights.track_object {
        check(tw.len() == n_o, "object tracking weights have n_o entries", String::new)?;
    }
    check(sc.search.is_valid(), "search parameters positive, decay in (0,1)", String::new)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::test_support::door_scenario_json;

    #[test]
    fn door_goal_parsed() {
        let sc = parse_scenario_str(&door_scenario_json()).unwrap();
        assert_eq!(sc.goal.mu, vec![2.0, -0.35, 0.0, -1.2]);
        assert_eq!(sc.goal.sigma_diag, vec![0.01, 0.04, 0.09, 0.64]);
    }

    #[test]
    fn missing_delta_defaults() {
        let sc = parse_scenario_str(&door_scenario_json()).unwrap();
        assert_eq!(sc.goal.delta, 0.15);
    }

    #[test]
    fn negative_reach_rejected() {
        let text = door_scenario_json().replace("\"reach_radius\": 0.6", "\"reach_radius\": -0.6");
        let err = parse_scenario_str(&text).unwrap_err();
        assert!(err.to_string().contains("EndEffectorSpec.reach_radius"), "{err}");
    }

    #[test]
    fn schema_error_names_field() {
        let text = door_scenario_json().replace("\"mass\": 40.0", "\"mass\": \"heavy\"");
        match parse_scenario_str(&text).unwrap_err() {
            ScenarioError::Schema { field, .. } => assert_eq!(field, "object.mass"),
            other => panic!("{other}"),
        }
    }
}
