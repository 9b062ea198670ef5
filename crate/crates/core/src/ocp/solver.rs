use nalgebra::{DMatrix, DVector};

use super::constraints::{build_with, ConstraintSet, Evaluator, Rows};
use super::cost::{input_cost, state_cost};
use super::dynamics::{rollout_with, step};
use super::timeline::Timeline;
use super::{OcpProblem, OcpSolution};
use crate::scene::Layout;

const STEP_TOL: f64 = 1e-6;
const DECREASE_TOL: f64 = 1e-8;
const ARMIJO: f64 = 1e-4;
const MIN_ALPHA: f64 = 1.0 / 1024.0;

/// Cost, scaled violation and merit of an input sequence, with the merit
/// gradient w.r.t. every input.
#[derive(Debug, Clone, PartialEq)]
pub struct MeritEval {
    pub cost: f64,
    pub violation: f64,
    pub merit: f64,
    pub gradient: Vec<Vec<f64>>,
}

struct Ctx<'a> {
    p: &'a OcpProblem<'a>,
    l: Layout,
    tl: Timeline,
    cons: ConstraintSet,
    mass: Vec<f64>,
    substeps: usize,
    ev: Evaluator<'a>,
}

/// Stage quadratic of the Gauss–Newton model: Q = JxᵀJx, R = JuᵀJu,
/// N = JxᵀJu, q = Jxᵀρ, r = Juᵀρ, after folding x_{k+1} through the
/// linearized dynamics.
struct StageLq {
    q_mat: DMatrix<f64>,
    r_mat: DMatrix<f64>,
    n_mat: DMatrix<f64>,
    q: DVector<f64>,
    r: DVector<f64>,
}

struct Linearization {
    a: Vec<DMatrix<f64>>,
    b: Vec<DMatrix<f64>>,
    stages: Vec<StageLq>,
}

#[derive(Clone, Copy, Default)]
struct Sums {
    cost: f64,
    violation: f64,
}

impl<'a> Ctx<'a> {
    fn new(p: &'a OcpProblem<'a>) -> Self {
        let tl = Timeline::build(p);
        let cons = build_with(p, &tl);
        let l = p.layout();
        Ctx {
            p,
            l,
            mass: p.scenario.object.mass_diag(),
            substeps: p.scenario.object.substeps(p.dt),
            ev: Evaluator {
                sc: p.scenario,
                l,
                sqrt_rho: p.merit_weight.sqrt(),
                dt: p.dt,
            },
            tl,
            cons,
        }
    }

    fn n(&self) -> usize {
        self.tl.steps.len()
    }

    fn stage_rows(&self, k: usize, xs: &[Vec<f64>], us: &[Vec<f64>], rows: &mut Rows) {
        rows.clear();
        let n = self.n();
        let p = self.p;
        if k >= 1 {
            let f = if k < n { p.dt } else { 1.0 };
            state_cost(p.scenario, &p.weights, self.l, &xs[k], &p.refs[k], f, rows);
        }
        if k < n {
            input_cost(p.scenario, &p.weights, self.l, &us[k], p.dt, rows);
        }
        let uk = us.get(k).map(|u| u.as_slice());
        let xk1 = xs.get(k + 1).map(|x| x.as_slice());
        for &ci in &self.cons.by_stage[k] {
            self.ev.eval(&self.cons.items[ci], &xs[k], uk, xk1, rows);
        }
    }

    fn sums(&self, rows: &Rows, acc: &mut Sums) {
        for (v, c) in rows.vals.iter().zip(&rows.constraint) {
            if *c {
                acc.violation += v * v;
            } else {
                acc.cost += v * v;
            }
        }
    }

    fn rollout(&self, us: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rollout_with(self.p, &self.tl, us)
    }

    fn evaluate(&self, xs: &[Vec<f64>], us: &[Vec<f64>]) -> Sums {
        let mut rows = Rows::new(self.l, false);
        let mut acc = Sums::default();
        for k in 0..=self.n() {
            self.stage_rows(k, xs, us, &mut rows);
            self.sums(&rows, &mut acc);
        }
        // rows carry sqrt(rho); report violation unweighted
        acc.violation /= self.p.merit_weight;
        acc
    }

    fn linearize(&self, xs: &[Vec<f64>], us: &[Vec<f64>]) -> Linearization {
        let (nx, nu) = (self.l.nx(), self.l.nu());
        let n = self.n();
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        let mut scratch = vec![0.0; nx];
        for k in 0..n {
            let mut ak = DMatrix::zeros(nx, nx);
            let mut bk = DMatrix::zeros(nx, nu);
            step(
                &self.p.scenario.object,
                &self.mass,
                self.l,
                &self.tl.steps[k],
                self.p.dt,
                self.substeps,
                &xs[k],
                &us[k],
                &mut scratch,
                Some((&mut ak, &mut bk)),
            );
            a.push(ak);
            b.push(bk);
        }
        let mut rows = Rows::new(self.l, true);
        let mut stages = Vec::with_capacity(n + 1);
        for k in 0..=n {
            self.stage_rows(k, xs, us, &mut rows);
            let m = rows.len();
            let j = DMatrix::from_row_slice(m, rows.width, &rows.jac);
            let rho = DVector::from_column_slice(&rows.vals);
            let mut jx = j.columns(0, nx).into_owned();
            let mut ju = j.columns(nx, nu).into_owned();
            if k < n {
                let jx1 = j.columns(nx + nu, nx);
                jx += jx1 * &a[k];
                ju += jx1 * &b[k];
            }
            let jxt = jx.transpose();
            let jut = ju.transpose();
            stages.push(StageLq {
                q_mat: &jxt * &jx,
                r_mat: &jut * &ju,
                n_mat: &jxt * &ju,
                q: &jxt * &rho,
                r: &jut * &rho,
            });
        }
        Linearization { a, b, stages }
    }

    fn gradient(&self, lin: &Linearization) -> Vec<Vec<f64>> {
        let n = self.n();
        let mut lam = &lin.stages[n].q * 2.0;
        let mut g = vec![Vec::new(); n];
        for k in (0..n).rev() {
            let st = &lin.stages[k];
            let gu = &st.r * 2.0 + lin.b[k].transpose() * &lam;
            lam = &st.q * 2.0 + lin.a[k].transpose() * &lam;
            g[k] = gu.iter().copied().collect();
        }
        g
    }

    /// Riccati recursion for the damped Gauss–Newton step. Returns the input
    /// step and the merit's directional derivative along it.
    fn gn_step(&self, lin: &Linearization, mu: f64) -> Option<(Vec<DVector<f64>>, f64)> {
        let n = self.n();
        let nu = self.l.nu();
        let mut pm = lin.stages[n].q_mat.clone();
        let mut pv = lin.stages[n].q.clone();
        let mut gains = Vec::with_capacity(n);
        for k in (0..n).rev() {
            let (a, b, st) = (&lin.a[k], &lin.b[k], &lin.stages[k]);
            let pa = &pm * a;
            let pb = &pm * b;
            let hxx = &st.q_mat + a.transpose() * &pa;
            let mut huu = &st.r_mat + b.transpose() * &pb;
            for i in 0..nu {
                huu[(i, i)] += mu;
            }
            let hux = st.n_mat.transpose() + b.transpose() * &pa;
            let hx = &st.q + a.transpose() * &pv;
            let hu = &st.r + b.transpose() * &pv;
            let chol = huu.cholesky()?;
            let kk = -chol.solve(&hux);
            let dd = -chol.solve(&hu);
            let mut pnext = &hxx + hux.transpose() * &kk;
            pnext = (&pnext + pnext.transpose()) * 0.5;
            pv = &hx + hux.transpose() * &dd;
            pm = pnext;
            gains.push((kk, dd));
        }
        gains.reverse();
        let mut dx = DVector::zeros(self.l.nx());
        let mut du_all = Vec::with_capacity(n);
        let mut slope = 0.0;
        for k in 0..n {
            let (kk, dd) = &gains[k];
            let du = kk * &dx + dd;
            let st = &lin.stages[k];
            slope += 2.0 * (st.q.dot(&dx) + st.r.dot(&du));
            dx = &lin.a[k] * &dx + &lin.b[k] * &du;
            du_all.push(du);
        }
        slope += 2.0 * lin.stages[n].q.dot(&dx);
        Some((du_all, slope))
    }
}

fn zero_inputs(p: &OcpProblem) -> Vec<Vec<f64>> {
    vec![vec![0.0; p.layout().nu()]; p.n_steps()]
}

/// Merit of `inputs` with its gradient from the adjoint recursion.
pub fn evaluate_merit(p: &OcpProblem, inputs: &[Vec<f64>]) -> MeritEval {
    let ctx = Ctx::new(p);
    let xs = ctx.rollout(inputs);
    let s = ctx.evaluate(&xs, inputs);
    let lin = ctx.linearize(&xs, inputs);
    MeritEval {
        cost: s.cost,
        violation: s.violation,
        merit: s.cost + p.merit_weight * s.violation,
        gradient: ctx.gradient(&lin),
    }
}

/// Damped Gauss–Newton on the merit with a Riccati step and backtracking
/// line search.
pub fn solve_ocp(p: &OcpProblem, init: Option<&[Vec<f64>]>) -> OcpSolution {
    let ctx = Ctx::new(p);
    let mut us: Vec<Vec<f64>> = match init {
        Some(u) if u.len() == p.n_steps() => u.to_vec(),
        _ => zero_inputs(p),
    };
    let mut xs = ctx.rollout(&us);
    let mut sums = ctx.evaluate(&xs, &us);
    let merit_of = |s: &Sums| s.cost + p.merit_weight * s.violation;
    let mut merit = merit_of(&sums);
    let mut mu = 1e-8;
    let mut iterations = 0;
    let mut relinearize = true;
    let mut lin = None;
    while iterations < p.max_iterations {
        if relinearize {
            lin = Some(ctx.linearize(&xs, &us));
        }
        let l = lin.as_ref().expect("linearized");
        let Some((du, slope)) = ctx.gn_step(l, mu) else {
            mu *= 10.0;
            relinearize = false;
            if mu > 1e6 {
                break;
            }
            continue;
        };
        iterations += 1;
        if slope > -1e-14 {
            break;
        }
        let step_norm = du.iter().map(|d| d.norm_squared()).sum::<f64>().sqrt();
        let mut alpha = 1.0;
        let mut accepted = None;
        while alpha >= MIN_ALPHA {
            let trial: Vec<Vec<f64>> = us
                .iter()
                .zip(&du)
                .map(|(u, d)| u.iter().zip(d.iter()).map(|(a, b)| a + alpha * b).collect())
                .collect();
            let txs = ctx.rollout(&trial);
            let ts = ctx.evaluate(&txs, &trial);
            let tm = merit_of(&ts);
            if tm.is_finite() && tm <= merit + ARMIJO * alpha * slope {
                accepted = Some((trial, txs, ts, tm));
                break;
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((trial, txs, ts, tm)) => {
                debug_assert!(tm <= merit);
                let decrease = merit - tm;
                us = trial;
                xs = txs;
                sums = ts;
                merit = tm;
                relinearize = true;
                mu = (mu / 3.0).max(1e-8);
                if alpha * step_norm < STEP_TOL || decrease < DECREASE_TOL * merit.max(1.0) {
                    break;
                }
            }
            None => {
                mu *= 10.0;
                relinearize = false;
                if mu > 1e6 {
                    break;
                }
            }
        }
    }
    OcpSolution {
        states: xs,
        inputs: us,
        cost: sums.cost,
        violation: sums.violation,
        merit,
        converged: sums.violation < p.tol_feas,
        iterations,
    }
}
