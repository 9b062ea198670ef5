use std::path::PathBuf;

use modeplan::search::Planner;
use modeplan::{extract_sequence, parse_scenario, plan, Scenario, SearchConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn scenario(name: &str) -> Scenario {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "scenarios", name].iter().collect();
    parse_scenario(path).unwrap()
}

fn anytime(sc: &Scenario, budget: usize) -> SearchConfig {
    let mut cfg = SearchConfig::from_scenario(sc).anytime();
    cfg.max_extensions = budget;
    cfg.max_time_s = 1e6;
    cfg
}

#[test]
fn alpha_decays_to_floor() {
    let cfg = SearchConfig::default();
    let mut seq = vec![cfg.alpha0];
    for _ in 0..14 {
        seq.push(cfg.next_alpha(*seq.last().unwrap()));
    }
    let expected = [10.0, 8.0, 6.4, 5.12, 4.096];
    for (a, e) in seq.iter().zip(expected) {
        assert!((a - e).abs() < 1e-12, "{seq:?}");
    }
    assert!(seq.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(seq[11], 1.0);
    assert_eq!(*seq.last().unwrap(), 1.0);
}

#[test]
fn start_in_goal_gives_empty_plan() {
    let mut sc = scenario("door_push.json");
    sc.goal.mu[0] = sc.start.base[0];
    sc.goal.mu[1] = sc.start.base[1];
    let r = plan(&sc, &SearchConfig::from_scenario(&sc), &mut ChaCha8Rng::seed_from_u64(0));
    assert_eq!(r.solutions.len(), 1);
    assert_eq!(r.solutions[0].cost, 0.0);
    assert_eq!(r.stats.extensions_attempted, 0);
    let p = extract_sequence(&r.tree, r.solutions[0].node);
    assert!(p.segments.is_empty());
    assert_eq!(p.states(), vec![sc.start_state().to_flat()]);
}

#[test]
fn anytime_run_is_sound() {
    let sc = scenario("door_push.json");
    let cfg = anytime(&sc, 900);
    for seed in [0, 2] {
        let mut planner = Planner::new(&sc, &cfg, ChaCha8Rng::seed_from_u64(seed));
        while !planner.done() {
            planner.iterate();
            let best = planner.incumbent();
            assert!(planner.open_set().iter().all(|n| n.cost < best));
        }
        let r = planner.finish();
        assert!(r.solutions.len() >= 2, "seed {seed}: {:?}", r.solutions);
        assert!(r.solutions.windows(2).all(|w| w[1].cost < w[0].cost));
        assert_eq!(r.alpha_history.len(), r.solutions.len() + 1);
        assert_eq!(&r.alpha_history[..3], &[10.0, 8.0, 6.4]);
        assert!(r.stats.extensions_attempted <= 900);
    }
}

#[test]
fn same_seed_same_search() {
    let sc = scenario("door_push.json");
    let cfg = anytime(&sc, 300);
    let a = plan(&sc, &cfg, &mut ChaCha8Rng::seed_from_u64(5));
    let b = plan(&sc, &cfg, &mut ChaCha8Rng::seed_from_u64(5));
    assert_eq!(a.tree, b.tree);
    assert_eq!(a.alpha_history, b.alpha_history);
    assert_eq!(a.solutions.len(), b.solutions.len());
    for (x, y) in a.solutions.iter().zip(&b.solutions) {
        assert_eq!((x.node, x.cost, x.extensions), (y.node, y.cost, y.extensions));
    }
    assert_eq!(a.stats.extensions_attempted, b.stats.extensions_attempted);
    assert_eq!(a.stats.extensions_succeeded, b.stats.extensions_succeeded);
}

#[test]
fn extracted_plan_is_contiguous() {
    let sc = scenario("door_push.json");
    let r = plan(&sc, &SearchConfig::from_scenario(&sc), &mut ChaCha8Rng::seed_from_u64(1));
    let best = r.best().expect("push door solves");
    let p = extract_sequence(&r.tree, best.node);
    assert_eq!(p.segments.len(), best.segments);
    assert_eq!(p.switches(), best.switches);
    assert_eq!(p.segments[0].states[0], sc.start_state().to_flat());
    for w in p.segments.windows(2) {
        assert_eq!(w[0].states.last(), w[1].states.first());
    }
    let k = sc.ocp.steps();
    assert_eq!(p.states().len(), p.segments.len() * k + 1);
    assert_eq!(p.inputs().len(), p.segments.len() * k);
    assert!(modeplan::check_goal(&p.terminal(sc.layout()), &sc));
    let g: f64 = r.tree.path_to(best.node).iter().map(|&i| r.tree.nodes[i].edge_cost).sum();
    assert!((g - p.cost).abs() < 1e-9 * g);
}

#[test]
fn tree_partition_by_contact_state() {
    let sc = scenario("valve_regrasp.json");
    let r = plan(&sc, &SearchConfig::from_scenario(&sc), &mut ChaCha8Rng::seed_from_u64(2));
    let mut seen = vec![0usize; r.tree.nodes.len()];
    for sub in &r.tree.subtrees {
        for &n in &sub.nodes {
            assert_eq!(r.tree.nodes[n].state, sub.state);
            seen[n] += 1;
        }
    }
    for n in &r.tree.nodes {
        assert_eq!(seen[n.id], usize::from(!n.pruned));
    }
}
