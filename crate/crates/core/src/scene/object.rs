use nalgebra::{Matrix2, Matrix2xX, Matrix3, Vector2, Vector3};

use super::{BiasTerm, ObjectKind, ObjectSpec};
use crate::contact_logic::{ContactGeometry, ObjectContactSpec};
use crate::error::KinematicsError;

pub(crate) fn perp(v: Vector2<f64>) -> Vector2<f64> {
    Vector2::new(-v.y, v.x)
}

pub(crate) fn cross(a: Vector2<f64>, b: Vector2<f64>) -> f64 {
    a.x * b.y - a.y * b.x
}

pub(crate) fn rot(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Object frame as a function of the generalized coordinates, with
/// derivatives. For a hinge the frame sits on the axis with its x-axis along
/// the link.
#[derive(Debug, Clone, Copy)]
pub struct ObjectPose {
    pub n: usize,
    pub origin: Vector2<f64>,
    pub theta: f64,
    pub rot: Matrix2<f64>,
    /// d origin / d q_j
    pub d_origin: [Vector2<f64>; 3],
    /// d theta / d q_j
    pub d_theta: [f64; 3],
}

impl ObjectPose {
    pub fn new(obj: &ObjectSpec, q: &[f64]) -> Self {
        match &obj.kind {
            ObjectKind::Hinge {
                axis, rest_angle, ..
            } => {
                let theta = rest_angle + q[0];
                ObjectPose {
                    n: 1,
                    origin: *axis,
                    theta,
                    rot: rot(theta),
                    d_origin: [Vector2::zeros(); 3],
                    d_theta: [1.0, 0.0, 0.0],
                }
            }
            ObjectKind::PlanarFree { .. } => ObjectPose {
                n: 3,
                origin: Vector2::new(q[0], q[1]),
                theta: q[2],
                rot: rot(q[2]),
                d_origin: [Vector2::x(), Vector2::y(), Vector2::zeros()],
                d_theta: [0.0, 0.0, 1.0],
            },
        }
    }

    pub fn to_world(&self, p_local: Vector2<f64>) -> Vector2<f64> {
        self.origin + self.rot * p_local
    }

    pub fn dir_to_world(&self, d_local: Vector2<f64>) -> Vector2<f64> {
        self.rot * d_local
    }

    pub fn to_local(&self, p_world: Vector2<f64>) -> Vector2<f64> {
        self.rot.transpose() * (p_world - self.origin)
    }

    /// d(world point)/d q_j for a point fixed in the object frame.
    pub fn point_jacobian(&self, p_local: Vector2<f64>) -> [Vector2<f64>; 3] {
        let arm = perp(self.rot * p_local);
        let mut j = [Vector2::zeros(); 3];
        for (k, col) in j.iter_mut().enumerate().take(self.n) {
            *col = self.d_origin[k] + arm * self.d_theta[k];
        }
        j
    }

    /// d(world direction)/d q_j for a direction fixed in the object frame.
    pub fn dir_jacobian(&self, d_local: Vector2<f64>) -> [Vector2<f64>; 3] {
        let r = perp(self.rot * d_local);
        let mut j = [Vector2::zeros(); 3];
        for (k, col) in j.iter_mut().enumerate().take(self.n) {
            *col = r * self.d_theta[k];
        }
        j
    }

    /// Local coordinates of a world point, with derivatives w.r.t. the point
    /// (2×2) and w.r.t. q_j.
    pub fn local_with_jacobian(
        &self,
        p_world: Vector2<f64>,
    ) -> (Vector2<f64>, Matrix2<f64>, [Vector2<f64>; 3]) {
        let rt = self.rot.transpose();
        let local = rt * (p_world - self.origin);
        let mut dq = [Vector2::zeros(); 3];
        for (k, col) in dq.iter_mut().enumerate().take(self.n) {
            *col = -(rt * self.d_origin[k]) - perp(local) * self.d_theta[k];
        }
        (local, rt, dq)
    }

    /// Generalized force of a world force `f` applied at world point `p`.
    pub fn generalized_force(&self, p: Vector2<f64>, f: Vector2<f64>) -> Vector3<f64> {
        let arm = perp(p - self.origin);
        let mut tau = Vector3::zeros();
        for k in 0..self.n {
            tau[k] = (self.d_origin[k] + arm * self.d_theta[k]).dot(&f);
        }
        tau
    }

    /// Derivatives of [`generalized_force`](Self::generalized_force) with
    /// respect to `p` (rows: dof, cols: p.x, p.y), `f`, and `q`.
    pub fn generalized_force_jacobians(
        &self,
        p: Vector2<f64>,
        f: Vector2<f64>,
    ) -> (nalgebra::Matrix3x2<f64>, nalgebra::Matrix3x2<f64>, Matrix3<f64>) {
        let arm = perp(p - self.origin);
        let mut dp = nalgebra::Matrix3x2::zeros();
        let mut df = nalgebra::Matrix3x2::zeros();
        let mut dq = Matrix3::zeros();
        // d/dp of perp(p - o)·f = (f.y, -f.x)
        let g = Vector2::new(f.y, -f.x);
        for j in 0..self.n {
            let col = self.d_origin[j] + arm * self.d_theta[j];
            df[(j, 0)] = col.x;
            df[(j, 1)] = col.y;
            dp[(j, 0)] = g.x * self.d_theta[j];
            dp[(j, 1)] = g.y * self.d_theta[j];
            for k in 0..self.n {
                dq[(j, k)] = -(g.dot(&self.d_origin[k])) * self.d_theta[j];
            }
        }
        (dp, df, dq)
    }
}

/// Bias vector and its partial derivatives.
#[derive(Debug, Clone, Copy)]
pub struct BiasJacobian {
    pub b: Vector3<f64>,
    pub db_dq: Matrix3<f64>,
    pub db_dv: Matrix3<f64>,
}

fn sech2(x: f64) -> f64 {
    let t = x.tanh();
    1.0 - t * t
}

pub(crate) fn bias_with_jacobian(obj: &ObjectSpec, q: &[f64], v: &[f64]) -> BiasJacobian {
    let mut out = BiasJacobian {
        b: Vector3::zeros(),
        db_dq: Matrix3::zeros(),
        db_dv: Matrix3::zeros(),
    };
    for term in &obj.bias {
        match term {
            BiasTerm::PositionTanh { dof, gain, slope } => {
                out.b[*dof] += gain * (slope * q[*dof]).tanh();
                out.db_dq[(*dof, *dof)] += gain * slope * sech2(slope * q[*dof]);
            }
            BiasTerm::VelocityTanh { dof, gain, slope } => {
                out.b[*dof] += gain * (slope * v[*dof]).tanh();
                out.db_dv[(*dof, *dof)] += gain * slope * sech2(slope * v[*dof]);
            }
            BiasTerm::Viscous { dof, coeff } => {
                out.b[*dof] += coeff * v[*dof];
                out.db_dv[(*dof, *dof)] += coeff;
            }
            BiasTerm::VertexFriction {
                gain,
                slope,
                vertices,
            } => {
                let r = rot(q[2]);
                let w = v[2];
                let lin = Vector2::new(v[0], v[1]);
                for vl in vertices {
                    let ri = r * vl;
                    let pr = perp(ri);
                    let vf = lin + pr * w;
                    let force = Vector2::new(
                        gain * (slope * vf.x).tanh(),
                        gain * (slope * vf.y).tanh(),
                    );
                    let g = Matrix2::new(
                        gain * slope * sech2(slope * vf.x),
                        0.0,
                        0.0,
                        gain * slope * sech2(slope * vf.y),
                    );
                    out.b[0] += force.x;
                    out.b[1] += force.y;
                    out.b[2] += cross(ri, force);
                    // d vf / d(v_x, v_y, w) = [I | perp(ri)], d vf / d yaw = -w ri
                    let df_dw = g * pr;
                    let df_dyaw = g * (-ri * w);
                    let dvs = [Vector2::new(g[(0, 0)], 0.0), Vector2::new(0.0, g[(1, 1)]), df_dw];
                    for (k, dfk) in dvs.iter().enumerate() {
                        out.db_dv[(0, k)] += dfk.x;
                        out.db_dv[(1, k)] += dfk.y;
                        out.db_dv[(2, k)] += cross(ri, *dfk);
                    }
                    out.db_dq[(0, 2)] += df_dyaw.x;
                    out.db_dq[(1, 2)] += df_dyaw.y;
                    out.db_dq[(2, 2)] += cross(pr, force) + cross(ri, df_dyaw);
                }
            }
        }
    }
    out
}

/// Generalized bias b_o(q) + b_o(v): recoil springs and velocity-dependent
/// friction.
pub fn object_bias(obj: &ObjectSpec, q: &[f64], v: &[f64]) -> Vec<f64> {
    let b = bias_with_jacobian(obj, q, v).b;
    b.iter().take(obj.n_dof()).copied().collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContactKinematics {
    pub point: Vector2<f64>,
    pub normal: Vector2<f64>,
    pub tangent: Vector2<f64>,
    /// Maps generalized velocity to contact-point world velocity.
    pub jacobian: Matrix2xX<f64>,
}

pub fn contact_kinematics(
    obj: &ObjectSpec,
    contact: &ObjectContactSpec,
    q: &[f64],
    surface_param: Option<f64>,
) -> Result<ContactKinematics, KinematicsError> {
    let local = match &contact.geometry {
        ContactGeometry::Point { position } => *position,
        ContactGeometry::Surface { start, end } => {
            let s = surface_param.unwrap_or(0.5);
            if !(0.0..=1.0).contains(&s) {
                return Err(KinematicsError::SurfaceParam(s));
            }
            start + (end - start) * s
        }
    };
    let pose = ObjectPose::new(obj, q);
    let cols = pose.point_jacobian(local);
    let jacobian = Matrix2xX::from_fn(pose.n, |r, c| cols[c][r]);
    Ok(ContactKinematics {
        point: pose.to_world(local),
        normal: pose.dir_to_world(contact.normal),
        tangent: pose.dir_to_world(contact.tangent()),
        jacobian,
    })
}

/// Generalized acceleration M⁻¹(Σ Jᵀf − b) for forces at
/// `(contact, surface_param, world force)`.
pub fn object_accel(
    obj: &ObjectSpec,
    q: &[f64],
    v: &[f64],
    forces: &[(&ObjectContactSpec, Option<f64>, Vector2<f64>)],
) -> Result<Vec<f64>, KinematicsError> {
    let n = obj.n_dof();
    let mut rhs: Vec<f64> = object_bias(obj, q, v).iter().map(|b| -b).collect();
    for (contact, s, f) in forces {
        let kin = contact_kinematics(obj, contact, q, *s)?;
        let tau = kin.jacobian.transpose() * f;
        for j in 0..n {
            rhs[j] += tau[j];
        }
    }
    let m = obj.mass_diag();
    Ok(rhs.iter().zip(&m).map(|(r, m)| r / m).collect())
}
