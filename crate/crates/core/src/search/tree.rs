use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::contact_logic::{ContactState, SwitchAction};
use crate::ocp::SegmentMode;
use crate::scene::HybridState;

/// One mode-invariant trajectory segment: the edge leading into a node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub mode: SegmentMode,
    /// Constant tracking reference of the segment.
    pub reference: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub inputs: Vec<Vec<f64>>,
    pub cost: f64,
    pub violation: f64,
    pub merit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    pub parent: Option<usize>,
    /// Contact state after the incoming action.
    pub state: ContactState,
    pub action: SwitchAction,
    /// Terminal continuous state of the incoming edge.
    pub x: HybridState,
    /// Reference-space projection of `x`.
    pub config: Vec<f64>,
    pub edge_cost: f64,
    /// Sum of edge costs from the root.
    pub g: f64,
    pub h: f64,
    /// g + α·h.
    pub cost: f64,
    pub depth: usize,
    pub edge: Option<Segment>,
    pub children: usize,
    pub pruned: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subtree {
    pub state: ContactState,
    /// Live (unpruned) member nodes.
    pub nodes: Vec<usize>,
    /// Attempted extensions from this subtree, plus one for its creation.
    pub attempts: usize,
}

/// Tree nodes partitioned into one subtree per contact state.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
    pub subtrees: Vec<Subtree>,
    #[serde(skip)]
    by_state: BTreeMap<ContactState, usize>,
}

impl Tree {
    pub fn subtree_of(&self, s: &ContactState) -> Option<usize> {
        self.by_state.get(s).copied()
    }

    /// Append `node` (its id is overwritten) and index it.
    pub fn append(&mut self, mut node: Node) -> usize {
        let id = self.nodes.len();
        node.id = id;
        if let Some(p) = node.parent {
            self.nodes[p].children += 1;
        }
        let sub = match self.by_state.get(&node.state) {
            Some(&i) => i,
            None => {
                self.subtrees.push(Subtree {
                    state: node.state.clone(),
                    nodes: Vec::new(),
                    attempts: 1,
                });
                self.by_state.insert(node.state.clone(), self.subtrees.len() - 1);
                self.subtrees.len() - 1
            }
        };
        self.subtrees[sub].nodes.push(id);
        self.nodes.push(node);
        id
    }

    pub fn prune(&mut self, id: usize) {
        let node = &mut self.nodes[id];
        debug_assert!(node.children == 0 && node.parent.is_some());
        node.pruned = true;
        let sub = self.by_state[&node.state];
        self.subtrees[sub].nodes.retain(|&n| n != id);
    }

    pub fn live(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| !n.pruned)
    }

    /// Lowest cumulative cost among the live nodes of subtree `i`.
    pub fn best_cost(&self, i: usize) -> f64 {
        self.subtrees[i]
            .nodes
            .iter()
            .map(|&n| self.nodes[n].cost)
            .fold(f64::INFINITY, f64::min)
    }

    /// Average edge cost over live non-root nodes.
    pub fn average_edge_cost(&self) -> Option<f64> {
        let (sum, n) = self
            .live()
            .filter(|n| n.parent.is_some())
            .fold((0.0, 0usize), |(s, c), n| (s + n.edge_cost, c + 1));
        (n > 0).then(|| sum / n as f64)
    }

    /// Node ids from the root to `id`.
    pub fn path_to(&self, id: usize) -> Vec<usize> {
        let mut path = vec![id];
        let mut cur = id;
        while let Some(p) = self.nodes[cur].parent {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }
}
