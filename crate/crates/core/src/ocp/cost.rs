use nalgebra::{Vector2, Vector3};

use super::constraints::Rows;
use super::CostWeights;
use crate::contact_logic::LimbKind;
use crate::scene::geometry::mount_with_yaw_derivative;
use crate::scene::{Layout, Scenario};

/// Quadratic tracking and regularization terms on state `x` with time
/// factor `f` (dt for stage states, 1 for the terminal state).
pub(crate) fn state_cost(
    sc: &Scenario,
    w: &CostWeights,
    l: Layout,
    x: &[f64],
    reference: &[f64],
    f: f64,
    rows: &mut Rows,
) {
    let c = rows.x0();
    let track = |idx: usize, weight: f64, target: f64, rows: &mut Rows| {
        if weight > 0.0 {
            let s = (weight * f).sqrt();
            let r = rows.push(s * (x[idx] - target), false);
            rows.add(r, c + idx, s);
        }
    };
    track(0, w.track_base_pos, reference[0], rows);
    track(1, w.track_base_pos, reference[1], rows);
    track(2, w.track_base_yaw, reference[2], rows);
    for j in 0..l.n_o {
        track(l.q(j), w.object_weight(j), reference[3 + j], rows);
    }
    if w.reg_object_vel > 0.0 {
        let s = (w.reg_object_vel * f).sqrt();
        for j in 0..l.n_o {
            let r = rows.push(s * x[l.v(j)], false);
            rows.add(r, c + l.v(j), s);
        }
    }
    let base = Vector3::new(x[0], x[1], x[2]);
    for ee in &sc.robot.end_effectors {
        let i = l.ee(ee.id);
        if w.reg_ee_nominal > 0.0 {
            let s = (w.reg_ee_nominal * f).sqrt();
            let (mount, dmount) = mount_with_yaw_derivative(ee.mount_offset, &base);
            let d = Vector2::new(x[i], x[i + 1]) - mount;
            for axis in 0..2 {
                let r = rows.push(s * d[axis], false);
                rows.add(r, c + i + axis, s);
                rows.add(r, c + axis, -s);
                rows.add(r, c + 2, -s * dmount[axis]);
            }
        }
        if w.reg_heading > 0.0 {
            let s = (w.reg_heading * f).sqrt();
            let ih = l.heading(ee.id);
            let r = rows.push(s * (x[ih] - x[2]), false);
            rows.add(r, c + ih, s);
            rows.add(r, c + 2, -s);
        }
    }
}

/// Input regularization for one step.
pub(crate) fn input_cost(sc: &Scenario, w: &CostWeights, l: Layout, u: &[f64], dt: f64, rows: &mut Rows) {
    let c = rows.u();
    let reg = |idx: usize, weight: f64, rows: &mut Rows| {
        let s = (weight * dt).sqrt();
        let r = rows.push(s * u[idx], false);
        rows.add(r, c + idx, s);
    };
    reg(0, w.reg_base_vel, rows);
    reg(1, w.reg_base_vel, rows);
    reg(2, w.reg_base_rate, rows);
    for ee in &sc.robot.end_effectors {
        let i = l.u_ee(ee.id);
        reg(i, w.reg_ee_vel, rows);
        reg(i + 1, w.reg_ee_vel, rows);
        reg(l.u_heading(ee.id), w.reg_heading_rate, rows);
        let wf = match ee.kind {
            LimbKind::Arm => w.reg_force_arm,
            LimbKind::Foot => w.reg_force_foot,
        };
        let fi = l.u_force(ee.id);
        reg(fi, wf, rows);
        reg(fi + 1, wf, rows);
    }
}
