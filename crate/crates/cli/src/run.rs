use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use modeplan::ocp::rollout;
use modeplan::postprocess::long_horizon_problem;
use modeplan::{extract_sequence, plan, refine_plan, Plan, RefineConfig, RefinedPlan, Scenario, SearchConfig};

use crate::record::RunRecord;
use crate::CliError;

/// Overrides applied on top of a scenario's search settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub seed: u64,
    pub max_extensions: Option<usize>,
    pub max_time_s: Option<f64>,
    pub anytime: bool,
    pub stop_at_first: bool,
    pub postprocess: bool,
    pub random_extensions: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            seed: 0,
            max_extensions: None,
            max_time_s: None,
            anytime: false,
            stop_at_first: true,
            postprocess: false,
            random_extensions: true,
        }
    }
}

impl RunOptions {
    pub fn search_config(&self, sc: &Scenario) -> SearchConfig {
        let mut cfg = SearchConfig::from_scenario(sc);
        if let Some(n) = self.max_extensions {
            cfg.max_extensions = n;
        }
        if let Some(t) = self.max_time_s {
            cfg.max_time_s = t;
        }
        cfg.stop_at_first = self.stop_at_first && !self.anytime;
        cfg.random_extensions = self.random_extensions;
        cfg
    }
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub record: RunRecord,
    /// Best stitched plan.
    pub plan: Option<Plan>,
    pub refined: Option<RefinedPlan>,
}

impl RunOutput {
    /// The plan handed to the user: refined when refinement ran.
    pub fn final_plan(&self) -> Option<&Plan> {
        self.refined.as_ref().map(|r| &r.plan).or(self.plan.as_ref())
    }
}

pub fn run_scenario(sc: &Scenario, opts: &RunOptions) -> RunOutput {
    let cfg = opts.search_config(sc);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let result = plan(sc, &cfg, &mut rng);
    let stitched = result.best().map(|b| extract_sequence(&result.tree, b.node));
    let refined = match (&stitched, opts.postprocess) {
        (Some(p), true) => Some(refine_plan(p, sc, &RefineConfig::default())),
        _ => None,
    };
    RunOutput {
        record: RunRecord::new(&sc.name, opts.seed, &result, refined.as_ref()),
        plan: stitched,
        refined,
    }
}

/// Contents of `plan.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanFile {
    pub scenario: String,
    pub seed: u64,
    pub refined: bool,
    pub plan: Plan,
}

/// Re-simulate a plan's inputs from its start state over its schedule and
/// return the largest deviation from the recorded states.
pub fn replay_error(plan: &Plan, sc: &Scenario) -> f64 {
    if plan.segments.is_empty() {
        return 0.0;
    }
    let p = long_horizon_problem(plan, sc, &RefineConfig::default());
    let xs = rollout(&p, &plan.inputs());
    xs.iter()
        .zip(plan.states())
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect::<Vec<_>>())
        .fold(0.0, f64::max)
}

/// Header of `traj.csv` for a robot with `n_e` limbs and `n_o` object DoFs.
pub fn trajectory_header(n_e: usize, n_o: usize) -> Vec<String> {
    let mut h: Vec<String> = ["t", "segment", "mode", "base_x", "base_y", "base_yaw"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for i in 1..=n_e {
        h.push(format!("ee{i}_x"));
        h.push(format!("ee{i}_y"));
    }
    h.extend((0..n_o).map(|j| format!("q{j}")));
    h.extend((0..n_o).map(|j| format!("v{j}")));
    for i in 1..=n_e {
        h.push(format!("f{i}_x"));
        h.push(format!("f{i}_y"));
    }
    h
}

/// One row per state. Forces are those applied over the following step and
/// are left empty on the final row; `mode` is the contact state the row's
/// segment is conditioned on, slots joined by `.`.
pub fn write_trajectory(path: &Path, plan: &Plan, sc: &Scenario) -> Result<(), CliError> {
    let l = sc.layout();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(trajectory_header(l.n_e, l.n_o))?;
    let states = plan.states();
    let inputs = plan.inputs();
    let k = sc.ocp.steps();
    let last = plan.segments.len().saturating_sub(1);
    for (i, x) in states.iter().enumerate() {
        let seg = (i / k).min(last);
        let state = plan.segments.get(seg).map_or(&plan.start_contact, |s| &s.mode.state);
        let mode = state.0.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(".");
        let mut row = vec![format!("{}", i as f64 * sc.ocp.dt), seg.to_string(), mode];
        row.extend(x[..3].iter().map(|v| v.to_string()));
        for limb in 1..=l.n_e {
            row.push(x[l.ee(limb)].to_string());
            row.push(x[l.ee(limb) + 1].to_string());
        }
        row.extend((0..l.n_o).map(|j| x[l.q(j)].to_string()));
        row.extend((0..l.n_o).map(|j| x[l.v(j)].to_string()));
        for limb in 1..=l.n_e {
            match inputs.get(i) {
                Some(u) => {
                    row.push(u[l.u_force(limb)].to_string());
                    row.push(u[l.u_force(limb) + 1].to_string());
                }
                None => row.extend([String::new(), String::new()]),
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Write `run.json`, and `plan.json` plus `traj.csv` when a plan exists.
pub fn write_artifacts(dir: &Path, out: &RunOutput, sc: &Scenario) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("run.json"), serde_json::to_string_pretty(&out.record)?)?;
    if let Some(p) = out.final_plan() {
        let file = PlanFile {
            scenario: sc.name.clone(),
            seed: out.record.seed,
            refined: out.refined.as_ref().is_some_and(|r| !r.left_goal),
            plan: p.clone(),
        };
        fs::write(dir.join("plan.json"), serde_json::to_string(&file)?)?;
        write_trajectory(&dir.join("traj.csv"), p, sc)?;
    }
    Ok(())
}

pub fn read_plan(path: &Path) -> Result<PlanFile, CliError> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
