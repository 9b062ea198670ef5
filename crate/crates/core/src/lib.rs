//! Multi-contact planar loco-manipulation planning.
//!
//! An outer tree search chooses contact modes (which end-effector touches
//! which object affordance) while an inner trajectory optimization solves a
//! short, mode-invariant optimal control problem for every tree edge. A final
//! long-horizon solve smooths the stitched plan over its fixed contact
//! schedule.
//!
//! ```no_run
//! use modeplan::{parse_scenario, plan, SearchConfig};
//! use rand::SeedableRng;
//!
//! let scenario = parse_scenario("scenarios/box_push.json").unwrap();
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(scenario.seed);
//! let result = plan(&scenario, &SearchConfig::from_scenario(&scenario), &mut rng);
//! println!("{} solutions", result.solutions.len());
//! ```

pub mod contact_logic;
pub mod error;
pub mod ocp;
pub mod postprocess;
pub mod scene;
pub mod search;

pub use contact_logic::{
    admissible_actions, build_mode_schedule, classify_sets, transition, ContactState,
    EndEffectorSpec, LimbStatus, ModeSchedule, ObjectContactSpec, RuleConfig, SwitchAction,
};
pub use error::ScenarioError;
pub use ocp::{check_goal, solve_ocp, OcpProblem, OcpSettings, OcpSolution};
pub use postprocess::{refine_plan, RefineConfig, RefinedPlan};
pub use scene::{parse_scenario, HybridState, ObjectSpec, RobotSpec, Scenario};
pub use search::{extract_sequence, plan, Plan, PlanResult, SearchConfig};
