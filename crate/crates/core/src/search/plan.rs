use serde::{Deserialize, Serialize};

use crate::contact_logic::{ContactState, SwitchAction};
use crate::scene::{HybridState, Layout};

use super::tree::{Segment, Tree};

/// A root-to-goal sequence of mode-invariant segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub start: HybridState,
    pub start_contact: ContactState,
    pub segments: Vec<Segment>,
    /// Sum of edge costs along the path.
    pub cost: f64,
}

impl Plan {
    /// The discrete schedule: contact state and action of every segment.
    pub fn schedule(&self) -> Vec<(ContactState, SwitchAction)> {
        self.segments
            .iter()
            .map(|s| (s.mode.state.clone(), s.mode.action))
            .collect()
    }

    pub fn switches(&self) -> usize {
        self.segments.iter().filter(|s| s.mode.action.is_switch()).count()
    }

    pub fn merit(&self) -> f64 {
        self.segments.iter().map(|s| s.merit).sum()
    }

    pub fn violation(&self) -> f64 {
        self.segments.iter().map(|s| s.violation).sum()
    }

    /// Concatenated inputs of all segments.
    pub fn inputs(&self) -> Vec<Vec<f64>> {
        self.segments.iter().flat_map(|s| s.inputs.iter().cloned()).collect()
    }

    /// Concatenated states, with each shared boundary state listed once.
    pub fn states(&self) -> Vec<Vec<f64>> {
        let mut out = vec![self.start.to_flat()];
        for s in &self.segments {
            out.extend(s.states.iter().skip(1).cloned());
        }
        out
    }

    pub fn terminal(&self, layout: Layout) -> HybridState {
        HybridState::from_flat(layout, self.states().last().expect("plan has a start state"))
    }
}

/// Walk from the root to `goal` and collect the edge trajectories.
pub fn extract_sequence(tree: &Tree, goal: usize) -> Plan {
    let path = tree.path_to(goal);
    let root = &tree.nodes[path[0]];
    let segments: Vec<Segment> = path[1..]
        .iter()
        .map(|&i| tree.nodes[i].edge.clone().expect("non-root nodes carry an edge"))
        .collect();
    Plan {
        start: root.x.clone(),
        start_contact: root.state.clone(),
        segments,
        cost: tree.nodes[goal].g,
    }
}
