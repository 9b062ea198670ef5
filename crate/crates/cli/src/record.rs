use serde::{Deserialize, Serialize};

use modeplan::search::{PlanResult, SolutionRecord};
use modeplan::RefinedPlan;

/// Mean, minimum, maximum and sample standard deviation of a series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub std: f64,
}

impl Stats {
    /// `None` for an empty series; the deviation of a single value is 0.
    pub fn of(xs: &[f64]) -> Option<Stats> {
        if xs.is_empty() {
            return None;
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Some(Stats {
            mean,
            min: xs.iter().copied().fold(f64::INFINITY, f64::min),
            max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            std: var.sqrt(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSummary {
    pub cost: f64,
    /// Seconds since the start of the search.
    pub time_s: f64,
    pub segments: usize,
    pub switches: usize,
    pub extensions: usize,
}

impl From<&SolutionRecord> for SolutionSummary {
    fn from(s: &SolutionRecord) -> Self {
        SolutionSummary {
            cost: s.cost,
            time_s: s.time_s,
            segments: s.segments,
            switches: s.switches,
            extensions: s.extensions,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineSummary {
    pub merit_before: f64,
    pub merit_after: f64,
    pub violation_before: f64,
    pub violation_after: f64,
    pub iterations: usize,
    pub left_goal: bool,
}

impl From<&RefinedPlan> for RefineSummary {
    fn from(r: &RefinedPlan) -> Self {
        RefineSummary {
            merit_before: r.merit_before,
            merit_after: r.merit_after,
            violation_before: r.violation_before,
            violation_after: r.violation_after,
            iterations: r.iterations,
            left_goal: r.left_goal,
        }
    }
}

/// Statistics of one planner run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario: String,
    pub seed: u64,
    /// Recorded solutions in discovery order.
    pub solutions: Vec<SolutionSummary>,
    pub extensions_attempted: usize,
    pub extensions_succeeded: usize,
    /// Per-extension OCP solve time [ms].
    pub extension_time_ms: Option<Stats>,
    pub tree_size: usize,
    pub nodes_pruned: usize,
    pub alpha_history: Vec<f64>,
    /// Wall time of the search [s].
    pub plan_time_s: f64,
    pub refined: Option<RefineSummary>,
}

impl RunRecord {
    pub fn new(scenario: &str, seed: u64, r: &PlanResult, refined: Option<&RefinedPlan>) -> Self {
        let ms: Vec<f64> = r.stats.solve_times_s.iter().map(|t| t * 1e3).collect();
        RunRecord {
            scenario: scenario.to_string(),
            seed,
            solutions: r.solutions.iter().map(SolutionSummary::from).collect(),
            extensions_attempted: r.stats.extensions_attempted,
            extensions_succeeded: r.stats.extensions_succeeded,
            extension_time_ms: Stats::of(&ms),
            tree_size: r.tree_size(),
            nodes_pruned: r.stats.nodes_pruned,
            alpha_history: r.alpha_history.clone(),
            plan_time_s: r.stats.elapsed_s,
            refined: refined.map(RefineSummary::from),
        }
    }

    pub fn solved(&self) -> bool {
        !self.solutions.is_empty()
    }

    /// Copy with every wall-clock field zeroed. Two runs with the same
    /// scenario and seed have equal canonical records unless the time
    /// budget cut one of them short.
    pub fn canonical(&self) -> RunRecord {
        let mut r = self.clone();
        r.plan_time_s = 0.0;
        r.extension_time_ms = None;
        for s in &mut r.solutions {
            s.time_s = 0.0;
        }
        r
    }

    /// Canonical record as JSON text.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(&self.canonical()).expect("record serializes")
    }
}
