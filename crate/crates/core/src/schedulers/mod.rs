//! Schedules: how the next decider is picked, the canonical policies, and
//! scheduler-side optimization (nonadaptive enumeration, commitment search).

mod named;
mod nonadaptive;
mod stackelberg;
mod tree;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::blockdp::BlockState;
use crate::engine::NeighborCounts;
use crate::error::{CascadeError, Result};
use crate::game::Situation;
use crate::graphs::{Blockmodel, ExplicitGraph, FamilySpec};

pub use named::{canonical, fig5_pbe_tree, fig5_stackelberg_tree, PolicyId};
pub use nonadaptive::{
    block_order_performance, block_sequences, node_order_performance, nonadaptive_enumerate, permutations,
    BoundViolation, NonadaptiveResult,
};
pub use stackelberg::{stackelberg_search, stackelberg_search_with, StackelbergResult};
pub use tree::PolicyTree;

/// Who picks the next decider: a fixed policy, or the subgame-optimal
/// scheduler that maximizes expected final Y at every state (ties go to the
/// lowest node or block index).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Scheduling {
    Policy(SchedulePolicy),
    PbeOptimal,
}

impl Scheduling {
    pub fn policy(&self) -> Option<&SchedulePolicy> {
        match self {
            Scheduling::Policy(p) => Some(p),
            Scheduling::PbeOptimal => None,
        }
    }
}

/// A deterministic schedule.
///
/// The same value can drive an explicit graph (indices are nodes) or a
/// blockmodel (indices are blocks). Adaptive tables are keyed by the text
/// form of a [`Situation`] or a [`BlockState`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SchedulePolicy {
    Nonadaptive { order: Vec<usize> },
    Adaptive { table: BTreeMap<String, usize> },
    Named { id: PolicyId, family: FamilySpec },
}

impl SchedulePolicy {
    pub fn order(order: Vec<usize>) -> Self {
        SchedulePolicy::Nonadaptive { order }
    }

    pub fn is_nonadaptive(&self) -> bool {
        matches!(self, SchedulePolicy::Nonadaptive { .. })
    }

    /// Next node to decide, or `None` once every node has decided.
    pub fn next_node(
        &self,
        graph: &ExplicitGraph,
        initial: &Situation,
        situation: &Situation,
    ) -> Result<Option<usize>> {
        if situation.is_complete() {
            return Ok(None);
        }
        let node = match self {
            SchedulePolicy::Nonadaptive { order } => {
                let step = situation.decided_count() - initial.decided_count();
                *order.get(step).ok_or_else(|| {
                    CascadeError::Schedule(format!(
                        "order of length {} does not cover step {step}",
                        order.len()
                    ))
                })?
            }
            SchedulePolicy::Adaptive { table } => {
                let key = situation.to_string();
                *table.get(&key).ok_or_else(|| {
                    CascadeError::Schedule(format!("adaptive table has no move for {key}"))
                })?
            }
            SchedulePolicy::Named { id, family } => named::next_node(*id, family, graph, situation)?,
        };
        if node >= situation.len() {
            return Err(CascadeError::Schedule(format!("node {node} out of range")));
        }
        if situation.is_decided(node) {
            return Err(CascadeError::Schedule(format!(
                "schedule selected already-decided node {node} in {situation}"
            )));
        }
        Ok(Some(node))
    }

    /// Next block to schedule, or `None` once every block is exhausted.
    pub fn next_block(
        &self,
        bm: &Blockmodel,
        initial: &BlockState,
        state: &BlockState,
    ) -> Result<Option<usize>> {
        if state.is_terminal(bm) {
            return Ok(None);
        }
        let block = match self {
            SchedulePolicy::Nonadaptive { order } => {
                let step = state.total_decided() - initial.total_decided();
                *order.get(step).ok_or_else(|| {
                    CascadeError::Schedule(format!(
                        "block sequence of length {} does not cover step {step}",
                        order.len()
                    ))
                })?
            }
            SchedulePolicy::Adaptive { table } => {
                let key = state.to_string();
                *table.get(&key).ok_or_else(|| {
                    CascadeError::Schedule(format!("adaptive table has no move for {key}"))
                })?
            }
            SchedulePolicy::Named { id, family } => named::next_block(*id, family, bm, state)?,
        };
        if block >= bm.block_count() {
            return Err(CascadeError::Schedule(format!("block {block} out of range")));
        }
        if state.undecided(bm, block) == 0 {
            return Err(CascadeError::Schedule(format!(
                "policy selected exhausted block {block} in {state}"
            )));
        }
        Ok(Some(block))
    }

    /// Incremental view of the policy for long playouts.
    pub fn cursor<'a>(
        &'a self,
        graph: &'a ExplicitGraph,
        initial: &Situation,
    ) -> Result<Box<dyn ScheduleCursor + 'a>> {
        if let SchedulePolicy::Named {
            id: PolicyId::CouncilS,
            family,
        } = self
        {
            return Ok(Box::new(named::CouncilCursor::new(family, graph)?));
        }
        Ok(Box::new(GenericCursor {
            policy: self,
            graph,
            initial: initial.clone(),
        }))
    }
}

/// Stateful schedule walker; must agree with [`SchedulePolicy::next_node`]
/// along any single playout.
pub trait ScheduleCursor {
    fn next(&mut self, situation: &Situation, counts: &NeighborCounts<'_>) -> Result<Option<usize>>;
}

struct GenericCursor<'a> {
    policy: &'a SchedulePolicy,
    graph: &'a ExplicitGraph,
    initial: Situation,
}

impl ScheduleCursor for GenericCursor<'_> {
    fn next(&mut self, situation: &Situation, _counts: &NeighborCounts<'_>) -> Result<Option<usize>> {
        self.policy.next_node(self.graph, &self.initial, situation)
    }
}

/// Lifts a block-level choice to the lowest undecided node of that block.
pub(crate) fn lowest_undecided_in_block(
    bm: &Blockmodel,
    situation: &Situation,
    block: usize,
) -> Option<usize> {
    let start = bm.offset(block);
    (start..start + bm.size(block)).find(|&v| !situation.is_decided(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Choice;
    use crate::graphs;

    #[test]
    fn nonadaptive_rejects_decided_node() {
        let g = graphs::clique(3).unwrap().expand();
        let policy = SchedulePolicy::order(vec![0, 0, 1]);
        let init = Situation::empty(3);
        let s = init.with(0, Choice::Y);
        assert!(policy.next_node(&g, &init, &s).is_err());
    }

    #[test]
    fn nonadaptive_block_sequence() {
        let bm = graphs::star(3).unwrap();
        let policy = SchedulePolicy::order(vec![1, 0, 1]);
        let init = BlockState::empty(2);
        assert_eq!(policy.next_block(&bm, &init, &init).unwrap(), Some(1));
        let s = init.with(1, Choice::Y);
        assert_eq!(policy.next_block(&bm, &init, &s).unwrap(), Some(0));
        let bad = SchedulePolicy::order(vec![0, 0, 1]);
        let s = init.with(0, Choice::N);
        assert!(bad.next_block(&bm, &init, &s).is_err());
    }

    #[test]
    fn policy_json_shape() {
        let policy = SchedulePolicy::order(vec![2, 0, 1]);
        let js = serde_json::to_value(&policy).unwrap();
        assert_eq!(js["kind"], "nonadaptive");
        let back: SchedulePolicy = serde_json::from_value(js).unwrap();
        assert_eq!(back, policy);
    }
}
