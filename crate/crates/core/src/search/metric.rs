use std::f64::consts::TAU;

use crate::contact_logic::{ContactState, SwitchAction};
use crate::ocp::{check_goal, wrap_angle};
use crate::scene::{HybridState, Scenario};

use super::SearchConfig;

/// Distance between two reference-space configurations (x, y, yaw, q…).
pub fn distance(a: &[f64], b: &[f64], cfg: &SearchConfig) -> f64 {
    let dxy = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    let dq = a[3..]
        .iter()
        .zip(&b[3..])
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let dyaw = (a[2] - b[2]).abs().rem_euclid(TAU);
    cfg.c1 * dxy + cfg.c2 * dq + cfg.c3 * dyaw.min(TAU - dyaw)
}

/// Step `v·T` from `from` toward `to`, with the speed clamped to `v_max`.
fn clamped_step(diff: &[f64], horizon: f64, v_max: f64) -> Vec<f64> {
    let norm = diff.iter().map(|d| d * d).sum::<f64>().sqrt();
    if norm < 1e-12 {
        return vec![0.0; diff.len()];
    }
    let speed = (norm / horizon).min(v_max);
    diff.iter().map(|d| horizon * speed * d / norm).collect()
}

/// Tracking reference for extending a node at `r_bar` in contact state `s`
/// with action `a` toward the sample `y`.
///
/// `v_max` holds the speed limits of (x, y, yaw, q…); only entry 0 is used
/// for the planar position.
pub fn make_reference(
    r_bar: &[f64],
    s: &ContactState,
    a: SwitchAction,
    y: &[f64],
    horizon: f64,
    v_max: &[f64],
) -> Vec<f64> {
    let mut r = r_bar.to_vec();
    if a.is_switch() {
        return r;
    }
    let dxy = clamped_step(&[y[0] - r_bar[0], y[1] - r_bar[1]], horizon, v_max[0]);
    r[0] += dxy[0];
    r[1] += dxy[1];
    r[2] += clamped_step(&[wrap_angle(y[2] - r_bar[2])], horizon, v_max[2])[0];
    if s.has_object_contact() {
        for i in 3..r.len() {
            r[i] += clamped_step(&[y[i] - r_bar[i]], horizon, v_max[i])[0];
        }
    }
    r
}

/// Estimated number of free-motion segments from `x` to the goal.
pub fn segments_to_goal(x: &HybridState, sc: &Scenario, v_max: &[f64], horizon: f64) -> usize {
    if check_goal(x, sc) {
        return 0;
    }
    let r = x.reference_coords();
    sc.goal
        .select
        .iter()
        .map(|&i| {
            let mut d = r[i] - sc.goal.mu[i];
            if i == 2 {
                d = wrap_angle(d);
            }
            (d.abs() / (v_max[i] * horizon)).ceil() as usize
        })
        .max()
        .unwrap_or(0)
        .max(1)
}

/// Heuristic cost-to-go: estimated segments times the average edge cost.
pub fn heuristic(x: &HybridState, sc: &Scenario, v_max: &[f64], horizon: f64, e_avg: f64) -> f64 {
    segments_to_goal(x, sc, v_max, horizon) as f64 * e_avg
}

/// UCT reward of every subtree given its best cumulative cost and attempt
/// count.
pub fn subtree_rewards(subtrees: &[(f64, usize)], lambda: f64, beta: f64) -> Vec<f64> {
    let c_min = subtrees.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = subtrees.iter().map(|s| (-(s.0 - c_min) / lambda).exp()).collect();
    let total_w: f64 = weights.iter().sum();
    let total_n: usize = subtrees.iter().map(|s| s.1).sum();
    let ln_n = (total_n.max(1) as f64).ln();
    subtrees
        .iter()
        .zip(&weights)
        .map(|(&(_, n), w)| {
            let n = n.max(1) as f64;
            w / (n * total_w) + beta * (ln_n / n).sqrt()
        })
        .collect()
}

/// Index of the subtree with the highest UCT reward (lowest index on ties).
pub fn select_subtree(subtrees: &[(f64, usize)], lambda: f64, beta: f64) -> usize {
    let rewards = subtree_rewards(subtrees, lambda, beta);
    let mut best = 0;
    for (i, r) in rewards.iter().enumerate() {
        if *r > rewards[best] {
            best = i;
        }
    }
    best
}
