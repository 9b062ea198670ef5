use std::time::Instant;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::contact_logic::{admissible_actions, transition, SwitchAction};
use crate::ocp::{check_goal, solve_ocp, OcpProblem};
use crate::scene::Scenario;

use super::metric::{distance, make_reference, segments_to_goal, select_subtree};
use super::tree::{Node, Segment, Tree};
use super::SearchConfig;

/// Object speed above which a contact-free object counts as moving freely.
const FREE_MOTION_SPEED: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub node: usize,
    pub cost: f64,
    /// Seconds since the start of the search.
    pub time_s: f64,
    pub segments: usize,
    pub switches: usize,
    /// Extensions attempted when the solution was found.
    pub extensions: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchStats {
    /// OCP solves attempted.
    pub extensions_attempted: usize,
    /// OCP solves that converged.
    pub extensions_succeeded: usize,
    /// Wall time of every OCP solve [s].
    pub solve_times_s: Vec<f64>,
    pub nodes_appended: usize,
    pub nodes_pruned: usize,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PlanResult {
    /// Recorded solutions in discovery order (strictly decreasing cost).
    pub solutions: Vec<SolutionRecord>,
    pub stats: SearchStats,
    /// Heuristic weight after each solution, starting with the initial one.
    pub alpha_history: Vec<f64>,
    pub tree: Tree,
}

impl PlanResult {
    pub fn best(&self) -> Option<&SolutionRecord> {
        self.solutions.last()
    }

    pub fn tree_size(&self) -> usize {
        self.tree.live().count()
    }
}

/// Incremental bilevel search. `plan` drives it to termination; tests and
/// tools can step it one outer iteration at a time.
pub struct Planner<'a, R: Rng> {
    sc: &'a Scenario,
    cfg: SearchConfig,
    rng: R,
    tree: Tree,
    open: Vec<Node>,
    alpha: f64,
    alpha_history: Vec<f64>,
    delta_prune: f64,
    solutions: Vec<SolutionRecord>,
    stats: SearchStats,
    started: Instant,
    last: usize,
    v_max: Vec<f64>,
    horizon: f64,
    e_avg_bootstrap: f64,
}

impl<'a, R: Rng> Planner<'a, R> {
    pub fn new(sc: &'a Scenario, cfg: &SearchConfig, rng: R) -> Self {
        let x = sc.start_state();
        let mut p = Planner {
            sc,
            cfg: cfg.clone(),
            rng,
            tree: Tree::default(),
            open: Vec::new(),
            alpha: cfg.alpha0,
            alpha_history: vec![cfg.alpha0],
            delta_prune: cfg.delta_prune,
            solutions: Vec::new(),
            stats: SearchStats::default(),
            started: Instant::now(),
            last: 0,
            v_max: sc.reference_speeds(),
            horizon: sc.ocp.horizon,
            e_avg_bootstrap: cfg.e_avg_bootstrap(sc.ocp.merit_weight, sc.ocp.tol_feas),
        };
        let h = p.heuristic(&x);
        let root = Node {
            id: 0,
            parent: None,
            state: sc.start_contact_state(),
            action: SwitchAction::MAINTAIN,
            config: x.reference_coords(),
            x,
            edge_cost: 0.0,
            g: 0.0,
            h,
            cost: p.alpha * h,
            depth: 0,
            edge: None,
            children: 0,
            pruned: false,
        };
        p.tree.append(root);
        p.stats.nodes_appended = 1;
        p.check_solution(0);
        p
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn open_set(&self) -> &[Node] {
        &self.open
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn delta_prune(&self) -> f64 {
        self.delta_prune
    }

    /// Cost of the best recorded solution (∞ before the first one).
    pub fn incumbent(&self) -> f64 {
        self.solutions.last().map_or(f64::INFINITY, |s| s.cost)
    }

    pub fn solutions(&self) -> &[SolutionRecord] {
        &self.solutions
    }

    pub fn stats(&self) -> &SearchStats {
        &self.stats
    }

    fn e_avg(&self) -> f64 {
        self.tree.average_edge_cost().unwrap_or(self.e_avg_bootstrap)
    }

    fn heuristic(&self, x: &crate::scene::HybridState) -> f64 {
        segments_to_goal(x, self.sc, &self.v_max, self.horizon) as f64 * self.e_avg()
    }

    fn out_of_budget(&self) -> bool {
        self.stats.extensions_attempted >= self.cfg.max_extensions
            || self.started.elapsed().as_secs_f64() >= self.cfg.max_time_s
    }

    /// True once a termination condition holds.
    pub fn done(&self) -> bool {
        (self.cfg.stop_at_first && !self.solutions.is_empty())
            || self.out_of_budget()
            || self.incumbent() == 0.0
    }

    fn sample_goal(&mut self) -> Vec<f64> {
        let g = &self.sc.goal;
        g.mu.iter()
            .zip(&g.sigma_diag)
            .map(|(m, s)| {
                let z: f64 = StandardNormal.sample(&mut self.rng);
                m + s.sqrt() * z
            })
            .collect()
    }

    fn sample_uniform(&mut self) -> Vec<f64> {
        let b = &self.sc.sampling;
        b.min
            .iter()
            .zip(&b.max)
            .map(|(lo, hi)| if hi > lo { self.rng.random_range(*lo..*hi) } else { *lo })
            .collect()
    }

    /// One outer iteration: a goal-directed phase followed by a uniformly
    /// random extension.
    pub fn iterate(&mut self) {
        let y = self.sample_goal();
        let mut iterations = 0;
        loop {
            if self.done() {
                return;
            }
            let n_before = self.solutions.len();
            self.generate_successors(self.last, &y, true);
            iterations += 1;
            if self.solutions.len() > n_before {
                break;
            }
            if self.open.is_empty() || iterations >= self.cfg.max_goal_iterations {
                break;
            }
        }
        if !self.cfg.random_extensions {
            return;
        }
        loop {
            if self.done() {
                return;
            }
            let y = self.sample_uniform();
            let candidates: Vec<usize> = (0..self.tree.subtrees.len())
                .filter(|&i| !self.tree.subtrees[i].nodes.is_empty())
                .collect();
            let stats: Vec<(f64, usize)> = candidates
                .iter()
                .map(|&i| (self.tree.best_cost(i), self.tree.subtrees[i].attempts))
                .collect();
            let sub = candidates[select_subtree(&stats, self.cfg.uct_lambda, self.cfg.uct_beta)];
            let nearest = self.tree.subtrees[sub]
                .nodes
                .iter()
                .copied()
                .min_by(|&a, &b| {
                    let da = distance(&self.tree.nodes[a].config, &y, &self.cfg);
                    let db = distance(&self.tree.nodes[b].config, &y, &self.cfg);
                    da.total_cmp(&db)
                })
                .expect("subtree has live nodes");
            if self.generate_successors(nearest, &y, false).is_some() {
                return;
            }
        }
    }

    /// Extend `node` toward `y` with every admissible action (only the
    /// maintain action outside the goal-directed phase), then move the least
    /// cost open node into the tree. Returns the appended node.
    pub fn generate_successors(&mut self, node: usize, y: &[f64], goal_phase: bool) -> Option<usize> {
        let n = self.tree.nodes[node].clone();
        let actions = if goal_phase {
            let prev = n.parent.map(|p| self.tree.nodes[p].state.clone());
            let moving = n.x.v.iter().any(|v| v.abs() > FREE_MOTION_SPEED);
            let object_free = self.sc.object.is_free() && !n.state.has_object_contact() && moving;
            admissible_actions(
                &n.state,
                prev.as_ref(),
                &self.sc.robot.end_effectors,
                &self.sc.object.contacts,
                &self.sc.rules,
                object_free,
            )
        } else {
            vec![SwitchAction::MAINTAIN]
        };
        let sub = self.tree.subtree_of(&n.state).expect("node is indexed");
        let layout = self.sc.layout();
        for a in actions {
            if self.out_of_budget() {
                break;
            }
            let reference = make_reference(&n.config, &n.state, a, y, self.horizon, &self.v_max);
            let problem = OcpProblem::segment(self.sc, &n.x, &n.state, a, &reference);
            let t0 = Instant::now();
            let sol = solve_ocp(&problem, None);
            self.stats.solve_times_s.push(t0.elapsed().as_secs_f64());
            self.stats.extensions_attempted += 1;
            self.tree.subtrees[sub].attempts += 1;
            if !sol.converged {
                continue;
            }
            self.stats.extensions_succeeded += 1;
            let x = sol.terminal(layout);
            let edge_cost = sol.merit + if a.is_switch() { self.cfg.switch_weight } else { 0.0 };
            let g = n.g + edge_cost;
            let h = self.heuristic(&x);
            let cost = g + self.alpha * h;
            if cost >= self.incumbent() {
                continue;
            }
            let mode = problem.segments[0].clone();
            self.open.push(Node {
                id: usize::MAX,
                parent: Some(node),
                state: transition(&n.state, a),
                action: a,
                config: x.reference_coords(),
                x,
                edge_cost,
                g,
                h,
                cost,
                depth: n.depth + 1,
                edge: Some(Segment {
                    mode,
                    reference,
                    states: sol.states,
                    inputs: sol.inputs,
                    cost: sol.cost,
                    violation: sol.violation,
                    merit: sol.merit,
                }),
                children: 0,
                pruned: false,
            });
        }
        self.append_best()
    }

    /// Move the least-cost open node into the tree, prune around it and
    /// check it against the goal.
    fn append_best(&mut self) -> Option<usize> {
        let best = (0..self.open.len()).min_by(|&a, &b| self.open[a].cost.total_cmp(&self.open[b].cost))?;
        let node = self.open.remove(best);
        let switched = node.action.is_switch();
        let id = self.tree.append(node);
        self.stats.nodes_appended += 1;
        self.last = id;
        if !switched {
            self.prune_neighbors(id);
        }
        if !self.tree.nodes[id].pruned {
            self.check_solution(id);
        }
        Some(id)
    }

    /// Keep only the cheapest node among same-subtree nodes within the
    /// pruning radius of `id`; nodes with children and the root are kept.
    fn prune_neighbors(&mut self, id: usize) {
        let sub = self.tree.subtree_of(&self.tree.nodes[id].state).expect("indexed");
        let center = self.tree.nodes[id].config.clone();
        let group: Vec<usize> = self.tree.subtrees[sub]
            .nodes
            .iter()
            .copied()
            .filter(|&m| m == id || distance(&self.tree.nodes[m].config, &center, &self.cfg) < self.delta_prune)
            .collect();
        // compare under the current E_avg, not the one each node was created with
        for &m in &group {
            let h = self.heuristic(&self.tree.nodes[m].x);
            let nd = &mut self.tree.nodes[m];
            nd.h = h;
            nd.cost = nd.g + self.alpha * h;
        }
        let best = group
            .iter()
            .copied()
            .min_by(|&a, &b| self.tree.nodes[a].cost.total_cmp(&self.tree.nodes[b].cost).then(a.cmp(&b)))
            .expect("group contains id");
        for m in group {
            let nd = &self.tree.nodes[m];
            if m == best || nd.children > 0 || nd.parent.is_none() {
                continue;
            }
            self.tree.prune(m);
            self.stats.nodes_pruned += 1;
            self.open.retain(|o| o.parent != Some(m));
        }
        if self.tree.nodes[id].pruned {
            self.last = best;
        }
    }

    fn check_solution(&mut self, id: usize) {
        let node = &self.tree.nodes[id];
        if !check_goal(&node.x, self.sc) || node.g >= self.incumbent() {
            return;
        }
        let path = self.tree.path_to(id);
        let switches = path.iter().filter(|&&i| self.tree.nodes[i].action.is_switch()).count();
        self.solutions.push(SolutionRecord {
            node: id,
            cost: node.g,
            time_s: self.started.elapsed().as_secs_f64(),
            segments: path.len() - 1,
            switches,
            extensions: self.stats.extensions_attempted,
        });
        self.alpha = self.cfg.next_alpha(self.alpha);
        self.alpha_history.push(self.alpha);
        self.delta_prune *= self.cfg.prune_decay;
        self.recompute_costs();
    }

    /// Refresh heuristics and cumulative costs after α changes, and drop open
    /// nodes that can no longer beat the incumbent.
    fn recompute_costs(&mut self) {
        let e_avg = self.e_avg();
        let (sc, v, t, alpha) = (self.sc, &self.v_max, self.horizon, self.alpha);
        let refresh = |n: &mut Node| {
            n.h = segments_to_goal(&n.x, sc, v, t) as f64 * e_avg;
            n.cost = n.g + alpha * n.h;
        };
        self.tree.nodes.iter_mut().for_each(refresh);
        self.open.iter_mut().for_each(refresh);
        let incumbent = self.incumbent();
        self.open.retain(|n| n.cost < incumbent);
    }

    pub fn finish(mut self) -> PlanResult {
        self.stats.elapsed_s = self.started.elapsed().as_secs_f64();
        PlanResult {
            solutions: self.solutions,
            stats: self.stats,
            alpha_history: self.alpha_history,
            tree: self.tree,
        }
    }
}

/// Run the bilevel search until a termination condition holds.
pub fn plan<R: Rng>(scenario: &Scenario, cfg: &SearchConfig, rng: &mut R) -> PlanResult {
    let mut planner = Planner::new(scenario, cfg, rng);
    while !planner.done() {
        planner.iterate();
    }
    planner.finish()
}
