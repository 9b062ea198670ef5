use nalgebra::{DMatrix, Vector2};

use super::timeline::{StepInfo, Timeline};
use super::OcpProblem;
use crate::contact_logic::LimbStatus;
use crate::scene::object::bias_with_jacobian;
use crate::scene::{Layout, ObjectPose, ObjectSpec};

/// Semi-implicit Euler step of the planar flow map.
///
/// The object integrates over `substeps` equal sub-intervals with the contact
/// forces and end-effector positions held at their step values.
///
/// Base and end-effectors are kinematic: end-effectors ride the base and add
/// their own command on top. Forces of closed limbs act on the object at the
/// end-effector positions. With `jac`, also fills A = ∂x'/∂x and B = ∂x'/∂u.
pub(crate) fn step(
    obj: &ObjectSpec,
    mass: &[f64],
    l: Layout,
    info: &StepInfo,
    dt: f64,
    substeps: usize,
    x: &[f64],
    u: &[f64],
    out: &mut [f64],
    jac: Option<(&mut DMatrix<f64>, &mut DMatrix<f64>)>,
) {
    let m = if info.base_frozen { 0.0 } else { 1.0 };
    let (bx, by) = (x[0], x[1]);
    let (vx, vy, w) = (u[0], u[1], u[2]);
    out[0] = bx + dt * m * vx;
    out[1] = by + dt * m * vy;
    out[2] = x[2] + dt * m * w;
    for i in 1..=l.n_e {
        let ie = l.ee(i);
        let rel = Vector2::new(x[ie] - bx, x[ie + 1] - by);
        let ue = l.u_ee(i);
        out[ie] = x[ie] + dt * (m * (vx - w * rel.y) + u[ue]);
        out[ie + 1] = x[ie + 1] + dt * (m * (vy + w * rel.x) + u[ue + 1]);
        let ih = l.heading(i);
        out[ih] = x[ih] + dt * (m * w + u[l.u_heading(i)]);
    }
    let n = l.n_o;
    let closed: Vec<usize> = (1..=l.n_e)
        .filter(|&i| info.limbs[i - 1].status == LimbStatus::Closed)
        .collect();
    let points: Vec<(usize, Vector2<f64>, Vector2<f64>)> = closed
        .iter()
        .map(|&i| {
            let p = Vector2::new(x[l.ee(i)], x[l.ee(i) + 1]);
            let f = Vector2::new(u[l.u_force(i)], u[l.u_force(i) + 1]);
            (i, p, f)
        })
        .collect();
    let h = dt / substeps as f64;
    let mut q = x[l.q(0)..l.q(0) + n].to_vec();
    let mut v = x[l.v(0)..l.v(0) + n].to_vec();
    let want_jac = jac.is_some();
    // sensitivities of (q, v) w.r.t. the step's x and u
    let (mut qx, mut vx_, mut qu, mut vu) = if want_jac {
        let mut qx = DMatrix::zeros(n, l.nx());
        let mut vx_ = DMatrix::zeros(n, l.nx());
        for j in 0..n {
            qx[(j, l.q(j))] = 1.0;
            vx_[(j, l.v(j))] = 1.0;
        }
        (qx, vx_, DMatrix::zeros(n, l.nu()), DMatrix::zeros(n, l.nu()))
    } else {
        Default::default()
    };
    for _ in 0..substeps {
        let pose = ObjectPose::new(obj, &q);
        let bias = bias_with_jacobian(obj, &q, &v);
        let mut force = bias.b * -1.0;
        for &(_, p, f) in &points {
            force += pose.generalized_force(p, f);
        }
        if want_jac {
            let mut f_q = DMatrix::from_fn(n, n, |r, c| -bias.db_dq[(r, c)]);
            let f_v = DMatrix::from_fn(n, n, |r, c| -bias.db_dv[(r, c)]);
            let mut dv_x = &f_v * &vx_;
            let mut dv_u = &f_v * &vu;
            for &(i, p, f) in &points {
                let (dp, df, dq) = pose.generalized_force_jacobians(p, f);
                for r in 0..n {
                    for c in 0..n {
                        f_q[(r, c)] += dq[(r, c)];
                    }
                    for c in 0..2 {
                        dv_x[(r, l.ee(i) + c)] += dp[(r, c)];
                        dv_u[(r, l.u_force(i) + c)] += df[(r, c)];
                    }
                }
            }
            dv_x += &f_q * &qx;
            dv_u += &f_q * &qu;
            for j in 0..n {
                let s = h / mass[j];
                for c in 0..l.nx() {
                    vx_[(j, c)] += s * dv_x[(j, c)];
                    qx[(j, c)] += h * vx_[(j, c)];
                }
                for c in 0..l.nu() {
                    vu[(j, c)] += s * dv_u[(j, c)];
                    qu[(j, c)] += h * vu[(j, c)];
                }
            }
        }
        for j in 0..n {
            v[j] += h * force[j] / mass[j];
            q[j] += h * v[j];
        }
    }
    for j in 0..n {
        out[l.v(j)] = v[j];
        out[l.q(j)] = q[j];
    }

    let Some((a, b)) = jac else { return };
    a.fill(0.0);
    b.fill(0.0);
    for r in 0..l.nx() {
        a[(r, r)] = 1.0;
    }
    for r in 0..3 {
        b[(r, r)] = dt * m;
    }
    for i in 1..=l.n_e {
        let ie = l.ee(i);
        let rel = Vector2::new(x[ie] - bx, x[ie + 1] - by);
        // ∂/∂e of ω·perp(e - b) = ω·[[0,-1],[1,0]]
        a[(ie, ie + 1)] += -dt * m * w;
        a[(ie + 1, ie)] += dt * m * w;
        a[(ie, 1)] += dt * m * w;
        a[(ie + 1, 0)] += -dt * m * w;
        b[(ie, 0)] = dt * m;
        b[(ie + 1, 1)] = dt * m;
        b[(ie, 2)] = -dt * m * rel.y;
        b[(ie + 1, 2)] = dt * m * rel.x;
        let ue = l.u_ee(i);
        b[(ie, ue)] = dt;
        b[(ie + 1, ue + 1)] = dt;
        let ih = l.heading(i);
        b[(ih, 2)] = dt * m;
        b[(ih, l.u_heading(i))] = dt;
    }
    for j in 0..n {
        for c in 0..l.nx() {
            a[(l.q(j), c)] = qx[(j, c)];
            a[(l.v(j), c)] = vx_[(j, c)];
        }
        for c in 0..l.nu() {
            b[(l.q(j), c)] = qu[(j, c)];
            b[(l.v(j), c)] = vu[(j, c)];
        }
    }
}

pub(crate) fn rollout_with(p: &OcpProblem, tl: &Timeline, inputs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let l = p.layout();
    let mass = p.scenario.object.mass_diag();
    let sub = p.scenario.object.substeps(p.dt);
    let mut states = Vec::with_capacity(inputs.len() + 1);
    states.push(p.x0.clone());
    for (k, u) in inputs.iter().enumerate() {
        let mut next = vec![0.0; l.nx()];
        step(&p.scenario.object, &mass, l, &tl.steps[k], p.dt, sub, &states[k], u, &mut next, None);
        states.push(next);
    }
    states
}

/// Simulate the problem's dynamics from its initial state.
pub fn rollout(problem: &OcpProblem, inputs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let tl = Timeline::build(problem);
    rollout_with(problem, &tl, inputs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact_logic::LimbStatus;
    use crate::ocp::timeline::LimbStep;
    use crate::scene::presets::{box_object, door_object};

    fn info(closed: bool, frozen: bool) -> StepInfo {
        StepInfo {
            base_frozen: frozen,
            limbs: vec![LimbStep {
                status: if closed { LimbStatus::Closed } else { LimbStatus::Open },
                contact: 1,
                switching: false,
                gap_rate: None,
            }],
        }
    }

    fn fd_check(obj: &ObjectSpec, inf: &StepInfo, x: &[f64], u: &[f64]) {
        let l = Layout::new(1, obj.n_dof());
        let mass = obj.mass_diag();
        let dt = 0.1;
        let mut a = DMatrix::zeros(l.nx(), l.nx());
        let mut b = DMatrix::zeros(l.nx(), l.nu());
        let mut out = vec![0.0; l.nx()];
        step(obj, &mass, l, inf, dt, obj.substeps(dt), x, u, &mut out, Some((&mut a, &mut b)));
        let h = 1e-6;
        let eval = |x: &[f64], u: &[f64]| {
            let mut o = vec![0.0; l.nx()];
            step(obj, &mass, l, inf, dt, obj.substeps(dt), x, u, &mut o, None);
            o
        };
        for c in 0..l.nx() {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[c] += h;
            xm[c] -= h;
            let (op, om) = (eval(&xp, u), eval(&xm, u));
            for r in 0..l.nx() {
                let fd = (op[r] - om[r]) / (2.0 * h);
                assert!((fd - a[(r, c)]).abs() < 1e-6, "A[{r},{c}] {fd} vs {}", a[(r, c)]);
            }
        }
        for c in 0..l.nu() {
            let mut up = u.to_vec();
            let mut um = u.to_vec();
            up[c] += h;
            um[c] -= h;
            let (op, om) = (eval(x, &up), eval(x, &um));
            for r in 0..l.nx() {
                let fd = (op[r] - om[r]) / (2.0 * h);
                assert!((fd - b[(r, c)]).abs() < 1e-6, "B[{r},{c}] {fd} vs {}", b[(r, c)]);
            }
        }
    }

    #[test]
    fn step_jacobians_box() {
        let x = [0.1, -0.2, 0.3, 0.4, 0.1, 0.2, 1.0, 0.2, 0.5, 0.1, -0.1, 0.2];
        let u = [0.2, -0.1, 0.3, 0.05, 0.1, -0.2, 4.0, 1.0];
        fd_check(&box_object(), &info(true, false), &x, &u);
        fd_check(&box_object(), &info(false, true), &x, &u);
    }

    #[test]
    fn step_jacobians_door() {
        let x = [0.1, -0.2, 0.3, 0.4, 0.1, 0.2, 0.15, -0.3];
        let u = [0.2, -0.1, 0.3, 0.05, 0.1, -0.2, 4.0, 1.0];
        fd_check(&door_object(), &info(true, false), &x, &u);
    }
}
