use serde::{Deserialize, Serialize};

/// Search hyperparameters as stored in a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub alpha0: f64,
    pub alpha_decay: f64,
    pub alpha_floor: f64,
    pub max_goal_iterations: usize,
    pub switch_weight: f64,
    pub uct_lambda: f64,
    pub uct_beta: f64,
    pub delta_prune: f64,
    pub prune_decay: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub max_extensions: usize,
    pub max_time_s: f64,
    pub stop_at_first: bool,
    /// Uniformly random extensions between goal-directed phases.
    pub random_extensions: bool,
    /// Average edge cost used by the heuristic before any edge exists.
    pub e_avg_default: Option<f64>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            alpha0: 10.0,
            alpha_decay: 0.8,
            alpha_floor: 1.0,
            max_goal_iterations: 10,
            switch_weight: 100.0,
            uct_lambda: 1000.0,
            uct_beta: 0.2,
            delta_prune: 0.2,
            prune_decay: 0.5,
            c1: 1.0,
            c2: 0.1,
            c3: 1.0,
            max_extensions: 5000,
            max_time_s: 120.0,
            stop_at_first: true,
            random_extensions: true,
            e_avg_default: None,
        }
    }
}

impl SearchConfig {
    pub fn is_valid(&self) -> bool {
        let pos = [
            self.alpha0,
            self.alpha_floor,
            self.uct_lambda,
            self.delta_prune,
            self.c1,
            self.c2,
            self.c3,
            self.max_time_s,
        ];
        pos.iter().all(|v| *v > 0.0 && v.is_finite())
            && self.alpha_decay > 0.0
            && self.alpha_decay < 1.0
            && self.prune_decay > 0.0
            && self.prune_decay <= 1.0
            && self.uct_beta >= 0.0
            && self.switch_weight >= 0.0
            && self.max_goal_iterations > 0
            && self.e_avg_default.is_none_or(|e| e >= 0.0 && e.is_finite())
    }
}

impl SearchConfig {
    /// The search settings stored in `scenario`.
    pub fn from_scenario(scenario: &crate::scene::Scenario) -> Self {
        scenario.search.clone()
    }

    /// Keep searching for better solutions until the budget runs out.
    pub fn anytime(mut self) -> Self {
        self.stop_at_first = false;
        self
    }

    /// Heuristic weight after a new solution.
    pub fn next_alpha(&self, alpha: f64) -> f64 {
        (alpha * self.alpha_decay).max(self.alpha_floor)
    }

    /// Average edge cost assumed before the tree has any edge.
    pub fn e_avg_bootstrap(&self, merit_weight: f64, tol_feas: f64) -> f64 {
        self.e_avg_default.unwrap_or(merit_weight * tol_feas)
    }
}
