use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use modeplan::Scenario;

use crate::record::{RunRecord, Stats};
use crate::run::{run_scenario, RunOptions};

/// One scenario's aggregate over its seeded runs, in the column layout of
/// the planner timing table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub scenario: String,
    pub runs: usize,
    pub solved: usize,
    /// Seeds that ended without a solution.
    pub failed_seeds: Vec<u64>,
    /// Shortest plan duration among solved runs [s].
    pub behavior_min_duration_s: Option<f64>,
    /// Time to the first solution over solved runs [s].
    pub plan_time_s: Option<Stats>,
    /// Mean per-extension solve time over all runs [ms].
    pub extension_mean_ms: Option<f64>,
}

impl BenchRow {
    pub fn from_records(sc: &Scenario, records: &[RunRecord]) -> Self {
        let solved: Vec<&RunRecord> = records.iter().filter(|r| r.solved()).collect();
        let seg_time = sc.ocp.horizon;
        let durations: Vec<f64> = solved.iter().map(|r| r.solutions[0].segments as f64 * seg_time).collect();
        let times: Vec<f64> = solved.iter().map(|r| r.solutions[0].time_s).collect();
        let ext: Vec<f64> = records.iter().filter_map(|r| r.extension_time_ms.map(|s| s.mean)).collect();
        BenchRow {
            scenario: sc.name.clone(),
            runs: records.len(),
            solved: solved.len(),
            failed_seeds: records.iter().filter(|r| !r.solved()).map(|r| r.seed).collect(),
            behavior_min_duration_s: durations.iter().copied().reduce(f64::min),
            plan_time_s: Stats::of(&times),
            extension_mean_ms: Stats::of(&ext).map(|s| s.mean),
        }
    }

    /// Row with every wall-clock field cleared.
    pub fn canonical(&self) -> BenchRow {
        BenchRow {
            plan_time_s: None,
            extension_mean_ms: None,
            ..self.clone()
        }
    }

    pub fn flagged(&self) -> bool {
        self.solved == 0
    }
}

/// Worker count: `MODEPLAN_THREADS` when set, else the available cores.
pub fn thread_count() -> usize {
    std::env::var("MODEPLAN_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Run every scenario with every seed and aggregate one row per scenario.
/// Cells run concurrently on up to `threads` workers; results do not depend
/// on the schedule.
pub fn bench(
    scenarios: &[Scenario],
    seeds: &[u64],
    opts: &RunOptions,
    threads: usize,
) -> (Vec<BenchRow>, Vec<Vec<RunRecord>>) {
    let cells: Vec<(usize, u64)> = (0..scenarios.len())
        .flat_map(|i| seeds.iter().map(move |&s| (i, s)))
        .collect();
    let slots: Mutex<Vec<Option<RunRecord>>> = Mutex::new(vec![None; cells.len()]);
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..threads.max(1).min(cells.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(sc, seed)) = cells.get(i) else { break };
                let o = RunOptions { seed, ..opts.clone() };
                let rec = run_scenario(&scenarios[sc], &o).record;
                slots.lock().expect("no worker panicked")[i] = Some(rec);
            });
        }
    });
    let mut all = slots.into_inner().expect("no worker panicked").into_iter().flatten();
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for sc in scenarios {
        let recs: Vec<RunRecord> = all.by_ref().take(seeds.len()).collect();
        rows.push(BenchRow::from_records(sc, &recs));
        records.push(recs);
    }
    (rows, records)
}

fn cell(x: Option<f64>, digits: usize) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.digits$}"))
}

/// Plain-text table, one line per row.
pub fn format_table(rows: &[BenchRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<20} {:>6} {:>10} {:>8} {:>8} {:>8} {:>8} {:>10}",
        "scenario", "solved", "min_dur_s", "mean_s", "min_s", "max_s", "std_s", "ext_ms"
    );
    for r in rows {
        let st = r.plan_time_s;
        let _ = writeln!(
            s,
            "{:<20} {:>6} {:>10} {:>8} {:>8} {:>8} {:>8} {:>10}{}",
            r.scenario,
            format!("{}/{}", r.solved, r.runs),
            cell(r.behavior_min_duration_s, 1),
            cell(st.map(|x| x.mean), 2),
            cell(st.map(|x| x.min), 2),
            cell(st.map(|x| x.max), 2),
            cell(st.map(|x| x.std), 2),
            cell(r.extension_mean_ms, 2),
            if r.flagged() { "  (no solution)" } else { "" }
        );
    }
    s
}
