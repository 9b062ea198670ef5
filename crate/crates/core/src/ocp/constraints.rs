use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use super::timeline::Timeline;
use super::OcpProblem;
use crate::contact_logic::LimbStatus;
use crate::scene::geometry::{capsule_distance_grad, mount_with_yaw_derivative};
use crate::scene::{Body, Capsule, Layout, ObjectKind, ObjectPose, Scenario};

/// Constraint families; each can be toggled for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    StateBounds,
    InputBounds,
    Reach,
    HeadingLimit,
    Collision,
    ContactPosition,
    SurfaceNormal,
    SurfaceBounds,
    Stick,
    HeadingMatch,
    ZeroForce,
    Unilateral,
    FrictionCone,
    ConstrainedForce,
    GapRate,
}

impl Family {
    pub const ALL: [Family; 15] = [
        Family::StateBounds,
        Family::InputBounds,
        Family::Reach,
        Family::HeadingLimit,
        Family::Collision,
        Family::ContactPosition,
        Family::SurfaceNormal,
        Family::SurfaceBounds,
        Family::Stick,
        Family::HeadingMatch,
        Family::ZeroForce,
        Family::Unilateral,
        Family::FrictionCone,
        Family::ConstrainedForce,
        Family::GapRate,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    Equality,
    /// Residual must be nonnegative.
    Inequality,
}

/// Where a constraint is evaluated: on state k, on input k, or on the
/// transition (x_k, u_k, x_{k+1}).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    State(usize),
    Input(usize),
    Pair(usize),
}

impl Window {
    pub fn stage(&self) -> usize {
        match *self {
            Window::State(k) | Window::Input(k) | Window::Pair(k) => k,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintSpec {
    BaseBounds,
    ObjectBounds,
    BaseSpeed,
    EeSpeed { limb: usize },
    Reach { limb: usize },
    HeadingLimit { limb: usize, limit: f64 },
    Collision { a: Body, b: Body, margin: f64 },
    ContactPosition { limb: usize, contact: usize },
    SurfaceNormal { limb: usize, contact: usize },
    SurfaceBounds { limb: usize, contact: usize, margin: f64 },
    Stick { limb: usize, contact: usize },
    HeadingMatch { limb: usize, contact: usize },
    ZeroForce { limb: usize },
    Unilateral { limb: usize, contact: usize },
    FrictionCone { limb: usize, contact: usize, mu: f64 },
    ConstrainedForce { limb: usize },
    GapRate { limb: usize, contact: usize, target: f64 },
}

impl ConstraintSpec {
    pub fn family(&self) -> Family {
        use ConstraintSpec::*;
        match self {
            BaseBounds | ObjectBounds => Family::StateBounds,
            BaseSpeed | EeSpeed { .. } => Family::InputBounds,
            Reach { .. } => Family::Reach,
            HeadingLimit { .. } => Family::HeadingLimit,
            Collision { .. } => Family::Collision,
            ContactPosition { .. } => Family::ContactPosition,
            SurfaceNormal { .. } => Family::SurfaceNormal,
            SurfaceBounds { .. } => Family::SurfaceBounds,
            Stick { .. } => Family::Stick,
            HeadingMatch { .. } => Family::HeadingMatch,
            ZeroForce { .. } => Family::ZeroForce,
            Unilateral { .. } => Family::Unilateral,
            FrictionCone { .. } => Family::FrictionCone,
            ConstrainedForce { .. } => Family::ConstrainedForce,
            GapRate { .. } => Family::GapRate,
        }
    }

    pub fn kind(&self) -> ConstraintKind {
        use ConstraintSpec::*;
        match self {
            ContactPosition { .. }
            | SurfaceNormal { .. }
            | Stick { .. }
            | HeadingMatch { .. }
            | ZeroForce { .. }
            | ConstrainedForce { .. }
            | GapRate { .. } => ConstraintKind::Equality,
            _ => ConstraintKind::Inequality,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub window: Window,
    pub spec: ConstraintSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    pub items: Vec<Constraint>,
    /// Item indices per stage 0..=N.
    pub by_stage: Vec<Vec<usize>>,
}

impl ConstraintSet {
    pub fn count(&self, family: Family) -> usize {
        self.items.iter().filter(|c| c.spec.family() == family).count()
    }
}

/// Activate constraints over the problem's horizon according to each step's
/// contact status.
pub fn build_constraints(p: &OcpProblem) -> ConstraintSet {
    build_with(p, &Timeline::build(p))
}

pub(crate) fn build_with(p: &OcpProblem, tl: &Timeline) -> ConstraintSet {
    let sc = p.scenario;
    let obj = &sc.object;
    let n = tl.steps.len();
    let margin = sc.ocp.collision_margin;
    let mut items = Vec::new();
    let mut add = |window: Window, spec: ConstraintSpec| {
        if p.family_enabled(spec.family()) {
            items.push(Constraint { window, spec });
        }
    };
    for k in 1..=n {
        let w = Window::State(k);
        add(w, ConstraintSpec::BaseBounds);
        add(w, ConstraintSpec::ObjectBounds);
        for ee in &sc.robot.end_effectors {
            add(w, ConstraintSpec::Reach { limb: ee.id });
            if let Some(limit) = ee.heading_limit {
                add(w, ConstraintSpec::HeadingLimit { limb: ee.id, limit });
            }
        }
        for j in 0..sc.obstacles.len() {
            add(w, ConstraintSpec::Collision { a: Body::Base, b: Body::Obstacle(j), margin });
        }
        for c in 0..obj.collision.len() {
            add(w, ConstraintSpec::Collision { a: Body::Base, b: Body::Object(c), margin });
            if obj.collides_with_obstacles() {
                for j in 0..sc.obstacles.len() {
                    add(w, ConstraintSpec::Collision { a: Body::Object(c), b: Body::Obstacle(j), margin });
                }
            }
        }
        let st = &tl.states[k];
        for limb in 1..=sc.robot.n_limbs() {
            if st.open_switching[limb - 1] {
                for c in 0..obj.collision.len() {
                    add(w, ConstraintSpec::Collision { a: Body::Limb(limb), b: Body::Object(c), margin });
                }
            }
            let contact = st.closed[limb - 1];
            if contact == 0 {
                continue;
            }
            let cs = obj.contact(contact);
            if cs.is_point() {
                add(w, ConstraintSpec::ContactPosition { limb, contact });
            } else {
                add(w, ConstraintSpec::SurfaceNormal { limb, contact });
                add(
                    w,
                    ConstraintSpec::SurfaceBounds { limb, contact, margin: sc.ocp.surface_margin },
                );
            }
            if cs.prehensile {
                add(w, ConstraintSpec::HeadingMatch { limb, contact });
            }
        }
    }
    for k in 0..n {
        let w = Window::Input(k);
        add(w, ConstraintSpec::BaseSpeed);
        for limb in 1..=sc.robot.n_limbs() {
            add(w, ConstraintSpec::EeSpeed { limb });
            let ls = tl.steps[k].limbs[limb - 1];
            if ls.status == LimbStatus::Closed {
                let cs = obj.contact(ls.contact);
                let radial = obj.constrained_force_zero();
                if !cs.prehensile {
                    add(w, ConstraintSpec::Unilateral { limb, contact: ls.contact });
                    if !radial {
                        add(
                            w,
                            ConstraintSpec::FrictionCone { limb, contact: ls.contact, mu: obj.friction_mu },
                        );
                    }
                }
                if radial {
                    add(w, ConstraintSpec::ConstrainedForce { limb });
                }
                if !cs.is_point() {
                    add(Window::Pair(k), ConstraintSpec::Stick { limb, contact: ls.contact });
                }
            } else {
                add(w, ConstraintSpec::ZeroForce { limb });
            }
            if let Some(target) = ls.gap_rate {
                add(Window::Pair(k), ConstraintSpec::GapRate { limb, contact: ls.contact, target });
            }
        }
    }
    let mut by_stage = vec![Vec::new(); n + 1];
    for (i, c) in items.iter().enumerate() {
        by_stage[c.window.stage()].push(i);
    }
    ConstraintSet { items, by_stage }
}

/// Weighted residual rows of one stage with their Jacobians w.r.t.
/// `[x_k | u_k | x_{k+1}]`.
#[derive(Debug, Clone)]
pub(crate) struct Rows {
    pub nx: usize,
    pub nu: usize,
    pub width: usize,
    pub vals: Vec<f64>,
    pub jac: Vec<f64>,
    pub constraint: Vec<bool>,
    pub want_jac: bool,
}

impl Rows {
    pub fn new(l: Layout, want_jac: bool) -> Self {
        let (nx, nu) = (l.nx(), l.nu());
        Rows {
            nx,
            nu,
            width: 2 * nx + nu,
            vals: Vec::new(),
            jac: Vec::new(),
            constraint: Vec::new(),
            want_jac,
        }
    }

    pub fn clear(&mut self) {
        self.vals.clear();
        self.jac.clear();
        self.constraint.clear();
    }

    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn push(&mut self, val: f64, constraint: bool) -> usize {
        self.vals.push(val);
        self.constraint.push(constraint);
        if self.want_jac {
            self.jac.resize(self.jac.len() + self.width, 0.0);
        }
        self.vals.len() - 1
    }

    #[inline]
    pub fn add(&mut self, r: usize, col: usize, v: f64) {
        if self.want_jac {
            self.jac[r * self.width + col] += v;
        }
    }

    #[inline]
    pub fn add2(&mut self, r: usize, col: usize, v: Vector2<f64>) {
        self.add(r, col, v.x);
        self.add(r, col + 1, v.y);
    }

    pub fn x0(&self) -> usize {
        0
    }

    pub fn u(&self) -> usize {
        self.nx
    }

    pub fn x1(&self) -> usize {
        self.nx + self.nu
    }
}

pub(crate) struct Evaluator<'a> {
    pub sc: &'a Scenario,
    pub l: Layout,
    pub sqrt_rho: f64,
    pub dt: f64,
}

/// Endpoint jacobian of a world point w.r.t. the flat state.
#[derive(Clone, Copy)]
struct PointJac {
    p: Vector2<f64>,
    cols: [usize; 3],
    d: [Vector2<f64>; 3],
    n: usize,
}

impl PointJac {
    fn fixed(p: Vector2<f64>) -> Self {
        PointJac { p, cols: [0; 3], d: [Vector2::zeros(); 3], n: 0 }
    }
}

const FORCE_SCALE: f64 = 10.0;

fn v2(x: &[f64], i: usize) -> Vector2<f64> {
    Vector2::new(x[i], x[i + 1])
}

impl Evaluator<'_> {
    /// Push a scaled constraint row; returns the row and the factor to apply
    /// to raw derivatives, or `None` for a satisfied inequality.
    fn row(&self, rows: &mut Rows, kind: ConstraintKind, g: f64, scale: f64) -> Option<(usize, f64)> {
        if kind == ConstraintKind::Inequality && g >= 0.0 {
            return None;
        }
        let coef = self.sqrt_rho / scale;
        Some((rows.push(coef * g, true), coef))
    }

    fn ineq(&self, rows: &mut Rows, g: f64, scale: f64) -> Option<(usize, f64)> {
        self.row(rows, ConstraintKind::Inequality, g, scale)
    }

    fn eq(&self, rows: &mut Rows, g: f64, scale: f64) -> (usize, f64) {
        self.row(rows, ConstraintKind::Equality, g, scale).expect("equality rows always emitted")
    }

    fn pose(&self, x: &[f64]) -> ObjectPose {
        let q0 = self.l.q(0);
        ObjectPose::new(&self.sc.object, &x[q0..q0 + self.l.n_o])
    }

    fn body_points(&self, body: Body, x: &[f64]) -> (PointJac, PointJac, f64) {
        let l = self.l;
        match body {
            Body::Base => {
                let pj = PointJac {
                    p: v2(x, 0),
                    cols: [0, 1, 0],
                    d: [Vector2::x(), Vector2::y(), Vector2::zeros()],
                    n: 2,
                };
                (pj, pj, self.sc.robot.base_radius)
            }
            Body::Limb(i) => {
                let c = l.ee(i);
                let pj = PointJac {
                    p: v2(x, c),
                    cols: [c, c + 1, 0],
                    d: [Vector2::x(), Vector2::y(), Vector2::zeros()],
                    n: 2,
                };
                (pj, pj, self.sc.robot.end_effectors[i - 1].collision_radius)
            }
            Body::Object(k) => {
                let pose = self.pose(x);
                let cap = &self.sc.object.collision[k];
                let mk = |pl: Vector2<f64>| PointJac {
                    p: pose.to_world(pl),
                    cols: [l.q(0), l.q(0) + 1, l.q(0) + 2],
                    d: pose.point_jacobian(pl),
                    n: l.n_o,
                };
                (mk(cap.a), mk(cap.b), cap.radius)
            }
            Body::Obstacle(k) => {
                let cap = &self.sc.obstacles[k];
                (PointJac::fixed(cap.a), PointJac::fixed(cap.b), cap.radius)
            }
        }
    }

    /// Object-frame coordinates of limb `limb`'s position relative to a
    /// contact: (normal gap, tangential coordinate) and their derivatives
    /// (w.r.t. ee position, and w.r.t. q_j).
    fn contact_coords(
        &self,
        x: &[f64],
        limb: usize,
        contact: usize,
    ) -> (f64, f64, Vector2<f64>, Vector2<f64>, [f64; 3], [f64; 3]) {
        let cs = self.sc.object.contact(contact);
        let pose = self.pose(x);
        let e = v2(x, self.l.ee(limb));
        let (el, rt, dq) = pose.local_with_jacobian(e);
        let anchor = cs.anchor();
        let n = cs.normal;
        let t = cs.tangent();
        let gap = n.dot(&(anchor - el));
        let s = t.dot(&(el - anchor));
        let dgap_de = -(rt.transpose() * n);
        let ds_de = rt.transpose() * t;
        let mut dgap_dq = [0.0; 3];
        let mut ds_dq = [0.0; 3];
        for j in 0..self.l.n_o {
            dgap_dq[j] = -n.dot(&dq[j]);
            ds_dq[j] = t.dot(&dq[j]);
        }
        (gap, s, dgap_de, ds_de, dgap_dq, ds_dq)
    }

    pub fn eval(&self, c: &Constraint, xk: &[f64], uk: Option<&[f64]>, xk1: Option<&[f64]>, rows: &mut Rows) {
        let l = self.l;
        let sc = self.sc;
        let x0c = rows.x0();
        let uc = rows.u();
        let x1c = rows.x1();
        match &c.spec {
            ConstraintSpec::BaseBounds => {
                let bb = &sc.robot.base_bounds;
                for (i, r) in [bb.x, bb.y, bb.yaw].iter().enumerate() {
                    if let Some((row, k)) = self.ineq(rows, xk[i] - r[0], 1.0) {
                        rows.add(row, x0c + i, k);
                    }
                    if let Some((row, k)) = self.ineq(rows, r[1] - xk[i], 1.0) {
                        rows.add(row, x0c + i, -k);
                    }
                }
            }
            ConstraintSpec::ObjectBounds => {
                for j in 0..l.n_o {
                    for (idx, r) in [(l.q(j), sc.object.q_bounds[j]), (l.v(j), sc.object.v_bounds[j])] {
                        if let Some((row, k)) = self.ineq(rows, xk[idx] - r[0], 1.0) {
                            rows.add(row, x0c + idx, k);
                        }
                        if let Some((row, k)) = self.ineq(rows, r[1] - xk[idx], 1.0) {
                            rows.add(row, x0c + idx, -k);
                        }
                    }
                }
            }
            ConstraintSpec::BaseSpeed => {
                let u = uk.expect("input window");
                let v = v2(u, 0);
                let nv = v.norm();
                if let Some((row, k)) = self.ineq(rows, sc.robot.v_max_base[0] - nv, 1.0) {
                    if nv > 1e-12 {
                        rows.add2(row, uc, -v / nv * k);
                    }
                }
                let wmax = sc.robot.v_max_base[1];
                if let Some((row, k)) = self.ineq(rows, wmax - u[2], 1.0) {
                    rows.add(row, uc + 2, -k);
                }
                if let Some((row, k)) = self.ineq(rows, wmax + u[2], 1.0) {
                    rows.add(row, uc + 2, k);
                }
            }
            ConstraintSpec::EeSpeed { limb } => {
                let u = uk.expect("input window");
                let i = l.u_ee(*limb);
                let v = v2(u, i);
                let nv = v.norm();
                if let Some((row, k)) = self.ineq(rows, sc.robot.ee_v_max - nv, 1.0) {
                    if nv > 1e-12 {
                        rows.add2(row, uc + i, -v / nv * k);
                    }
                }
            }
            ConstraintSpec::Reach { limb } => {
                let ee = &sc.robot.end_effectors[limb - 1];
                let base = nalgebra::Vector3::new(xk[0], xk[1], xk[2]);
                let (mount, dmount) = mount_with_yaw_derivative(ee.mount_offset, &base);
                let d = v2(xk, l.ee(*limb)) - mount;
                let nd = d.norm();
                if let Some((row, k)) = self.ineq(rows, ee.reach_radius - nd, 1.0) {
                    if nd > 1e-12 {
                        let g = -d / nd * k;
                        rows.add2(row, x0c + l.ee(*limb), g);
                        rows.add2(row, x0c, -g);
                        rows.add(row, x0c + 2, -g.dot(&dmount));
                    }
                }
            }
            ConstraintSpec::HeadingLimit { limb, limit } => {
                let ih = l.heading(*limb);
                let rel = xk[ih] - xk[2];
                if let Some((row, k)) = self.ineq(rows, limit - rel, 1.0) {
                    rows.add(row, x0c + ih, -k);
                    rows.add(row, x0c + 2, k);
                }
                if let Some((row, k)) = self.ineq(rows, limit + rel, 1.0) {
                    rows.add(row, x0c + ih, k);
                    rows.add(row, x0c + 2, -k);
                }
            }
            ConstraintSpec::Collision { a, b, margin } => {
                let (a0, a1, ra) = self.body_points(*a, xk);
                let (b0, b1, rb) = self.body_points(*b, xk);
                let g = capsule_distance_grad(&Capsule::segment(a0.p, a1.p, ra), &Capsule::segment(b0.p, b1.p, rb));
                if let Some((row, k)) = self.ineq(rows, g.d - margin, 1.0) {
                    for (pj, grad) in [(a0, g.d_a0), (a1, g.d_a1), (b0, g.d_b0), (b1, g.d_b1)] {
                        for m in 0..pj.n {
                            rows.add(row, x0c + pj.cols[m], k * grad.dot(&pj.d[m]));
                        }
                    }
                }
            }
            ConstraintSpec::ContactPosition { limb, contact } => {
                let cs = sc.object.contact(*contact);
                let pose = self.pose(xk);
                let pl = cs.anchor();
                let p = pose.to_world(pl);
                let jp = pose.point_jacobian(pl);
                let e = v2(xk, l.ee(*limb));
                for axis in 0..2 {
                    let (row, k) = self.eq(rows, e[axis] - p[axis], 1.0);
                    rows.add(row, x0c + l.ee(*limb) + axis, k);
                    for j in 0..l.n_o {
                        rows.add(row, x0c + l.q(j), -k * jp[j][axis]);
                    }
                }
            }
            ConstraintSpec::SurfaceNormal { limb, contact } => {
                let (gap, _, dg_de, _, dg_dq, _) = self.contact_coords(xk, *limb, *contact);
                let (row, k) = self.eq(rows, gap, 1.0);
                rows.add2(row, x0c + l.ee(*limb), dg_de * k);
                for j in 0..l.n_o {
                    rows.add(row, x0c + l.q(j), k * dg_dq[j]);
                }
            }
            ConstraintSpec::SurfaceBounds { limb, contact, margin } => {
                let len = sc.object.contact(*contact).surface_length();
                let (_, s, _, ds_de, _, ds_dq) = self.contact_coords(xk, *limb, *contact);
                for (g, sign) in [(s - margin, 1.0), (len - margin - s, -1.0)] {
                    if let Some((row, k)) = self.ineq(rows, g, 1.0) {
                        rows.add2(row, x0c + l.ee(*limb), ds_de * (sign * k));
                        for j in 0..l.n_o {
                            rows.add(row, x0c + l.q(j), sign * k * ds_dq[j]);
                        }
                    }
                }
            }
            ConstraintSpec::Stick { limb, contact } => {
                let x1 = xk1.expect("pair window");
                let (_, s0, _, d0e, _, d0q) = self.contact_coords(xk, *limb, *contact);
                let (_, s1, _, d1e, _, d1q) = self.contact_coords(x1, *limb, *contact);
                let (row, k) = self.eq(rows, s1 - s0, 1.0);
                rows.add2(row, x1c + l.ee(*limb), d1e * k);
                rows.add2(row, x0c + l.ee(*limb), -d0e * k);
                for j in 0..l.n_o {
                    rows.add(row, x1c + l.q(j), k * d1q[j]);
                    rows.add(row, x0c + l.q(j), -k * d0q[j]);
                }
            }
            ConstraintSpec::GapRate { limb, contact, target } => {
                let x1 = xk1.expect("pair window");
                let (g0, _, d0e, _, d0q, _) = self.contact_coords(xk, *limb, *contact);
                let (g1, _, d1e, _, d1q, _) = self.contact_coords(x1, *limb, *contact);
                let (row, k) = self.eq(rows, (g1 - g0) / self.dt - target, 1.0);
                let kd = k / self.dt;
                rows.add2(row, x1c + l.ee(*limb), d1e * kd);
                rows.add2(row, x0c + l.ee(*limb), -d0e * kd);
                for j in 0..l.n_o {
                    rows.add(row, x1c + l.q(j), kd * d1q[j]);
                    rows.add(row, x0c + l.q(j), -kd * d0q[j]);
                }
            }
            ConstraintSpec::HeadingMatch { limb, contact } => {
                let cs = sc.object.contact(*contact);
                let pose = self.pose(xk);
                let phi = pose.theta + cs.normal.y.atan2(cs.normal.x);
                let half = 0.5 * (xk[l.heading(*limb)] - phi);
                let (row, k) = self.eq(rows, 2.0 * half.sin(), 1.0);
                let c = half.cos() * k;
                rows.add(row, x0c + l.heading(*limb), c);
                for j in 0..l.n_o {
                    rows.add(row, x0c + l.q(j), -c * pose.d_theta[j]);
                }
            }
            ConstraintSpec::ZeroForce { limb } => {
                let u = uk.expect("input window");
                let i = l.u_force(*limb);
                for axis in 0..2 {
                    let (row, k) = self.eq(rows, u[i + axis], FORCE_SCALE);
                    rows.add(row, uc + i + axis, k);
                }
            }
            ConstraintSpec::Unilateral { limb, contact } => {
                let u = uk.expect("input window");
                let cs = sc.object.contact(*contact);
                let pose = self.pose(xk);
                let f = v2(u, l.u_force(*limb));
                let n = pose.dir_to_world(cs.normal);
                let dn = pose.dir_jacobian(cs.normal);
                if let Some((row, k)) = self.ineq(rows, n.dot(&f), FORCE_SCALE) {
                    rows.add2(row, uc + l.u_force(*limb), n * k);
                    for j in 0..l.n_o {
                        rows.add(row, x0c + l.q(j), k * dn[j].dot(&f));
                    }
                }
            }
            ConstraintSpec::FrictionCone { limb, contact, mu } => {
                let u = uk.expect("input window");
                let cs = sc.object.contact(*contact);
                let pose = self.pose(xk);
                let f = v2(u, l.u_force(*limb));
                let n = pose.dir_to_world(cs.normal);
                let t = pose.dir_to_world(cs.tangent());
                let dn = pose.dir_jacobian(cs.normal);
                let dt_ = pose.dir_jacobian(cs.tangent());
                for sign in [1.0, -1.0] {
                    let dir = n * *mu + t * sign;
                    if let Some((row, k)) = self.ineq(rows, dir.dot(&f), FORCE_SCALE) {
                        rows.add2(row, uc + l.u_force(*limb), dir * k);
                        for j in 0..l.n_o {
                            let dd = dn[j] * *mu + dt_[j] * sign;
                            rows.add(row, x0c + l.q(j), k * dd.dot(&f));
                        }
                    }
                }
            }
            ConstraintSpec::ConstrainedForce { limb } => {
                let u = uk.expect("input window");
                let axis = match &sc.object.kind {
                    ObjectKind::Hinge { axis, .. } => *axis,
                    ObjectKind::PlanarFree { .. } => self.pose(xk).origin,
                };
                let f = v2(u, l.u_force(*limb));
                let d = v2(xk, l.ee(*limb)) - axis;
                let nd = d.norm().max(1e-9);
                let r = d / nd;
                let (row, k) = self.eq(rows, r.dot(&f), FORCE_SCALE);
                rows.add2(row, uc + l.u_force(*limb), r * k);
                // d(r·f)/de = (f - r (r·f)) / |d|
                let de = (f - r * r.dot(&f)) / nd;
                rows.add2(row, x0c + l.ee(*limb), de * k);
                if sc.object.is_free() {
                    rows.add2(row, x0c + l.q(0), -de * k);
                }
            }
        }
    }
}
