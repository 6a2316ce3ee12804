use serde::{Deserialize, Serialize};

use crate::blockdp::BlockState;
use crate::engine::NeighborCounts;
use crate::error::{CascadeError, Result};
use crate::game::{Choice, Situation};
use crate::graphs::{self, Blockmodel, CouncilLayout, ExplicitGraph, FamilySpec};

use super::{lowest_undecided_in_block, PolicyTree, ScheduleCursor, SchedulePolicy};

/// The canonical schedules studied for specific families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyId {
    /// Star: exterior agents until Y leads, then the interior, then the rest.
    StarSopt,
    /// Cloud: vertex 1, then 2 before 3 if 1 chose Y (3 before 2 otherwise), then the clouds.
    CloudSopt,
    /// Council: probe fresh subcliques, promote representatives, then the council.
    #[serde(rename = "council_s")]
    CouncilS,
    /// Committed three-group schedule that relies on a non-credible threat.
    Fig5Stackelberg,
    /// Subgame-optimal three-group schedule.
    Fig5Pbe,
}

impl std::str::FromStr for PolicyId {
    type Err = CascadeError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "star_sopt" => Ok(PolicyId::StarSopt),
            "cloud_sopt" => Ok(PolicyId::CloudSopt),
            "council_s" | "council_S" => Ok(PolicyId::CouncilS),
            "fig5_stackelberg" => Ok(PolicyId::Fig5Stackelberg),
            "fig5_pbe" => Ok(PolicyId::Fig5Pbe),
            other => Err(CascadeError::InvalidParameter(format!("unknown policy {other:?}"))),
        }
    }
}

impl std::fmt::Display for PolicyId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            PolicyId::StarSopt => "star_sopt",
            PolicyId::CloudSopt => "cloud_sopt",
            PolicyId::CouncilS => "council_s",
            PolicyId::Fig5Stackelberg => "fig5_stackelberg",
            PolicyId::Fig5Pbe => "fig5_pbe",
        };
        f.write_str(s)
    }
}

fn mismatch(id: PolicyId, reason: impl Into<String>) -> CascadeError {
    CascadeError::FamilyMismatch {
        policy: id.to_string(),
        reason: reason.into(),
    }
}

/// Resolves a policy id against the family it is meant for.
pub fn canonical(id: PolicyId, family: &FamilySpec) -> Result<SchedulePolicy> {
    family.validate()?;
    let ok = match (id, family) {
        (PolicyId::StarSopt, FamilySpec::Star { .. }) => true,
        (PolicyId::CloudSopt, FamilySpec::Cloud { .. }) => true,
        (PolicyId::CouncilS, FamilySpec::Council { .. }) => true,
        (PolicyId::Fig5Stackelberg | PolicyId::Fig5Pbe, FamilySpec::ThreeGroup { sizes, .. }) => {
            *sizes == [2, 2, 1]
        }
        _ => false,
    };
    if !ok {
        return Err(mismatch(id, format!("not defined for {family:?}")));
    }
    Ok(SchedulePolicy::Named {
        id,
        family: family.clone(),
    })
}

const A: usize = 0;
const B: usize = 1;
const C: usize = 2;

/// Commitment schedule on the (2, 2, 1) three-group graph.
pub fn fig5_stackelberg_tree() -> PolicyTree {
    use PolicyTree as T;
    T::branch(
        A,
        T::branch(
            A,
            T::branch(B, T::seq(&[B, C]), T::seq(&[C, B])),
            T::branch(B, T::seq(&[C, B]), T::seq(&[B, C])),
        ),
        T::branch(
            C,
            T::seq(&[A, B, B]),
            T::branch(B, T::seq(&[B, A]), T::seq(&[A, B])),
        ),
    )
}

/// Subgame-optimal schedule on the (2, 2, 1) three-group graph.
pub fn fig5_pbe_tree() -> PolicyTree {
    use PolicyTree as T;
    T::branch(
        C,
        T::branch(B, T::seq(&[A, A, B]), T::seq(&[A, A, B])),
        T::seq(&[A, A, B, B]),
    )
}

fn block_model_for(id: PolicyId, family: &FamilySpec) -> Result<Blockmodel> {
    match graphs::generate(family)? {
        graphs::Graph::Block(bm) => Ok(bm),
        graphs::Graph::Explicit(_) => Err(mismatch(id, "family has no block form")),
    }
}

fn check_shape(id: PolicyId, family: &FamilySpec, bm: &Blockmodel) -> Result<()> {
    let expected = block_model_for(id, family)?;
    if expected.sizes() != bm.sizes() || expected.adjacency() != bm.adjacency() {
        return Err(mismatch(id, "blockmodel does not match the policy's family"));
    }
    Ok(())
}

pub(super) fn next_block(
    id: PolicyId,
    family: &FamilySpec,
    bm: &Blockmodel,
    state: &BlockState,
) -> Result<usize> {
    check_shape(id, family, bm)?;
    let open = |b: usize| state.undecided(bm, b) > 0;
    let pick = match id {
        PolicyId::StarSopt => {
            let d = state.y(1) as i64 - state.n(1) as i64;
            if open(0) && (d >= 1 || !open(1)) {
                0
            } else {
                1
            }
        }
        PolicyId::CloudSopt => {
            if open(0) {
                0
            } else {
                let first = if state.y(0) == 1 { [1, 2] } else { [2, 1] };
                first
                    .into_iter()
                    .chain([3, 4])
                    .find(|&b| open(b))
                    .expect("nonterminal state has an open block")
            }
        }
        PolicyId::Fig5Stackelberg | PolicyId::Fig5Pbe => {
            let tree = if id == PolicyId::Fig5Stackelberg {
                fig5_stackelberg_tree()
            } else {
                fig5_pbe_tree()
            };
            let compiled = tree.compile(bm, &BlockState::empty(3))?;
            return compiled
                .next_block(bm, &BlockState::empty(3), state)?
                .ok_or_else(|| CascadeError::Schedule("terminal state".into()));
        }
        PolicyId::CouncilS => return Err(mismatch(id, "council policy has no block form")),
    };
    Ok(pick)
}

pub(super) fn next_node(
    id: PolicyId,
    family: &FamilySpec,
    graph: &ExplicitGraph,
    situation: &Situation,
) -> Result<usize> {
    if id == PolicyId::CouncilS {
        let layout = council_layout(family)?;
        if layout.node_count() != graph.node_count() {
            return Err(mismatch(id, "graph size does not match council parameters"));
        }
        return Ok(council_next(&layout, graph, situation));
    }
    let bm = block_model_for(id, family)?;
    if bm.node_count() != graph.node_count() {
        return Err(mismatch(id, "graph size does not match family parameters"));
    }
    let state = BlockState::from_situation(&bm, situation);
    let block = next_block(id, family, &bm, &state)?;
    lowest_undecided_in_block(&bm, situation, block)
        .ok_or_else(|| CascadeError::Schedule(format!("block {block} exhausted")))
}

fn council_layout(family: &FamilySpec) -> Result<CouncilLayout> {
    match *family {
        FamilySpec::Council {
            k,
            m,
            subclique_size,
        } => Ok(CouncilLayout {
            k,
            m,
            subclique_size,
        }),
        _ => Err(mismatch(PolicyId::CouncilS, "not a council family")),
    }
}

const COUNCIL_REPS_NEEDED: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum SubcliqueStatus {
    Fresh,
    InProgress(usize),
    AllY,
    Failed,
}

fn subclique_status(layout: &CouncilLayout, s: &Situation, j: usize) -> SubcliqueStatus {
    let nodes = layout.subclique_nodes(j);
    if nodes.clone().any(|v| s.get(v) == Some(Choice::N)) {
        return SubcliqueStatus::Failed;
    }
    match nodes.clone().find(|&v| !s.is_decided(v)) {
        None => SubcliqueStatus::AllY,
        Some(v) if v == nodes.start => SubcliqueStatus::Fresh,
        Some(v) => SubcliqueStatus::InProgress(v),
    }
}

/// Council schedule as a pure function of the situation.
fn council_next(layout: &CouncilLayout, graph: &ExplicitGraph, s: &Situation) -> usize {
    let m = layout.m;
    let status: Vec<SubcliqueStatus> = (0..m).map(|j| subclique_status(layout, s, j)).collect();
    let reps_scheduled = (0..m).filter(|&j| s.is_decided(layout.representative(j))).count();
    // only promoted representatives may be decided while probing
    let probing = (0..layout.k).filter(|&v| s.is_decided(v)).all(|v| {
        layout.is_representative(v) && status[v] == SubcliqueStatus::AllY
    });
    if probing && reps_scheduled < COUNCIL_REPS_NEEDED {
        if let Some(j) = (0..m)
            .find(|&j| status[j] == SubcliqueStatus::AllY && !s.is_decided(layout.representative(j)))
        {
            return layout.representative(j);
        }
        if let Some(v) = status.iter().find_map(|st| match st {
            SubcliqueStatus::InProgress(v) => Some(*v),
            _ => None,
        }) {
            return v;
        }
        if let Some(j) = status.iter().position(|st| *st == SubcliqueStatus::Fresh) {
            return layout.subclique_nodes(j).start;
        }
    }
    let has_n_neighbor =
        |v: usize| graph.neighbors(v).iter().any(|&u| s.get(u) == Some(Choice::N));
    if let Some(v) = (0..layout.k).find(|&v| !s.is_decided(v) && !has_n_neighbor(v)) {
        return v;
    }
    if let Some(v) = (0..layout.k).find(|&v| !s.is_decided(v)) {
        return v;
    }
    (layout.k..layout.node_count())
        .find(|&v| !s.is_decided(v))
        .expect("incomplete situation has an undecided node")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum CouncilPhase {
    Probe,
    CleanCouncil,
    RestCouncil,
    Subcliques,
}

/// Linear-time walker of the council schedule for long playouts.
pub(super) struct CouncilCursor {
    layout: CouncilLayout,
    phase: CouncilPhase,
    current: Option<usize>,
    next_fresh: usize,
    reps: usize,
    ptr: usize,
}

impl CouncilCursor {
    pub(super) fn new(family: &FamilySpec, graph: &ExplicitGraph) -> Result<Self> {
        let layout = council_layout(family)?;
        if layout.node_count() != graph.node_count() {
            return Err(mismatch(PolicyId::CouncilS, "graph size does not match council parameters"));
        }
        Ok(CouncilCursor {
            layout,
            phase: CouncilPhase::Probe,
            current: None,
            next_fresh: 0,
            reps: 0,
            ptr: 0,
        })
    }
}

impl ScheduleCursor for CouncilCursor {
    fn next(&mut self, s: &Situation, counts: &NeighborCounts<'_>) -> Result<Option<usize>> {
        let layout = self.layout;
        loop {
            match self.phase {
                CouncilPhase::Probe => {
                    if self.reps >= COUNCIL_REPS_NEEDED {
                        self.phase = CouncilPhase::CleanCouncil;
                        self.ptr = 0;
                        continue;
                    }
                    if let Some(j) = self.current {
                        let mut nodes = layout.subclique_nodes(j);
                        if nodes.clone().any(|v| s.get(v) == Some(Choice::N)) {
                            self.current = None;
                            continue;
                        }
                        if let Some(v) = nodes.find(|&v| !s.is_decided(v)) {
                            return Ok(Some(v));
                        }
                        let rep = layout.representative(j);
                        if !s.is_decided(rep) {
                            return Ok(Some(rep));
                        }
                        self.reps += 1;
                        self.current = None;
                        continue;
                    }
                    if self.next_fresh < layout.m {
                        self.current = Some(self.next_fresh);
                        self.next_fresh += 1;
                        continue;
                    }
                    self.phase = CouncilPhase::CleanCouncil;
                    self.ptr = 0;
                }
                CouncilPhase::CleanCouncil => {
                    while self.ptr < layout.k
                        && (s.is_decided(self.ptr) || counts.decided(self.ptr).1 > 0)
                    {
                        self.ptr += 1;
                    }
                    if self.ptr < layout.k {
                        return Ok(Some(self.ptr));
                    }
                    self.phase = CouncilPhase::RestCouncil;
                    self.ptr = 0;
                }
                CouncilPhase::RestCouncil => {
                    while self.ptr < layout.k && s.is_decided(self.ptr) {
                        self.ptr += 1;
                    }
                    if self.ptr < layout.k {
                        return Ok(Some(self.ptr));
                    }
                    self.phase = CouncilPhase::Subcliques;
                    self.ptr = layout.k;
                }
                CouncilPhase::Subcliques => {
                    let n = layout.node_count();
                    while self.ptr < n && s.is_decided(self.ptr) {
                        self.ptr += 1;
                    }
                    return Ok((self.ptr < n).then_some(self.ptr));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{cloud, star, three_group};

    #[test]
    fn family_mismatch() {
        assert!(canonical(PolicyId::StarSopt, &FamilySpec::Clique { n: 3 }).is_err());
        assert!(canonical(PolicyId::Fig5Pbe, &FamilySpec::ThreeGroup { sizes: [1, 2, 2], pattern: 0 }).is_err());
        assert!(canonical(PolicyId::CloudSopt, &FamilySpec::Cloud { a: 2, b: 3 }).is_ok());
    }

    #[test]
    fn cloud_sopt_after_y_schedules_two() {
        let fam = FamilySpec::Cloud { a: 2, b: 4 };
        let policy = canonical(PolicyId::CloudSopt, &fam).unwrap();
        let bm = cloud(2, 4).unwrap();
        let init = BlockState::empty(5);
        assert_eq!(policy.next_block(&bm, &init, &init).unwrap(), Some(0));
        let after_y = init.with(0, Choice::Y);
        assert_eq!(policy.next_block(&bm, &init, &after_y).unwrap(), Some(1));
        assert_eq!(policy.next_block(&bm, &init, &after_y.with(1, Choice::N)).unwrap(), Some(2));
        let after_n = init.with(0, Choice::N);
        assert_eq!(policy.next_block(&bm, &init, &after_n).unwrap(), Some(2));
        assert_eq!(policy.next_block(&bm, &init, &after_n.with(2, Choice::Y)).unwrap(), Some(1));
    }

    #[test]
    fn star_sopt_interior_once_y_leads() {
        let fam = FamilySpec::Star { n: 6 };
        let policy = canonical(PolicyId::StarSopt, &fam).unwrap();
        let bm = star(6).unwrap();
        let init = BlockState::empty(2);
        assert_eq!(policy.next_block(&bm, &init, &init).unwrap(), Some(1));
        let s = init.with(1, Choice::N).with(1, Choice::Y);
        assert_eq!(policy.next_block(&bm, &init, &s).unwrap(), Some(1));
        let s = s.with(1, Choice::Y);
        assert_eq!(policy.next_block(&bm, &init, &s).unwrap(), Some(0));
        // on the expansion the lifted choice is node 0
        let g = bm.expand();
        let sit: Situation = "UYNYUU".parse().unwrap();
        assert_eq!(policy.next_node(&g, &Situation::empty(6), &sit).unwrap(), Some(0));
    }

    #[test]
    fn fig5_trees_are_state_functions() {
        let bm = three_group([2, 2, 1], 0).unwrap();
        fig5_stackelberg_tree().compile(&bm, &BlockState::empty(3)).unwrap();
        fig5_pbe_tree().compile(&bm, &BlockState::empty(3)).unwrap();
    }

    #[test]
    fn council_skips_failed_representative() {
        let fam = FamilySpec::Council {
            k: 6,
            m: 3,
            subclique_size: 5,
        };
        let g = graphs::council(6, 3, 5).unwrap();
        let policy = canonical(PolicyId::CouncilS, &fam).unwrap();
        let init = Situation::empty(g.node_count());
        let layout = council_layout(&fam).unwrap();
        let first = layout.subclique_nodes(0).start;
        assert_eq!(policy.next_node(&g, &init, &init).unwrap(), Some(first));
        let s = init.with(first, Choice::N);
        // the failed subclique's representative is skipped for a fresh subclique
        assert_eq!(
            policy.next_node(&g, &init, &s).unwrap(),
            Some(layout.subclique_nodes(1).start)
        );
        // a completed all-Y subclique promotes its representative
        let mut s = init.clone();
        for v in layout.subclique_nodes(0) {
            s = s.with(v, Choice::Y);
        }
        assert_eq!(policy.next_node(&g, &init, &s).unwrap(), Some(0));
    }
}
