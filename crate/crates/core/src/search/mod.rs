//! Bilevel tree search over contact modes.
//!
//! Every tree node holds a contact state and the terminal state of the
//! trajectory segment leading to it. Nodes are expanded best-first on
//! `g + α·h` with α decaying after each solution, alternating with uniformly
//! random extensions from the nearest node of a subtree chosen by a UCT
//! reward.

mod config;
mod metric;
mod plan;
mod planner;
mod tree;

pub use config::SearchConfig;
pub use metric::{distance, heuristic, make_reference, segments_to_goal, select_subtree, subtree_rewards};
pub use plan::{extract_sequence, Plan};
pub use planner::{plan, PlanResult, Planner, SearchStats, SolutionRecord};
pub use tree::{Node, Segment, Subtree, Tree};
