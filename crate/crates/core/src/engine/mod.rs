//! Exact play on explicit graphs: myopic playouts, backward induction under
//! a schedule, the brute-force performance oracle, and Monte Carlo estimates.

mod montecarlo;

use std::collections::HashMap;

use serde::Serialize;

use crate::blockdp::{mix, Response};
use crate::error::{CascadeError, Result};
use crate::game::{myopic_decision, tie_break, Choice, GameParams, GameSpec, Mode, Rational, Situation};
use crate::graphs::ExplicitGraph;
use crate::schedulers::{SchedulePolicy, Scheduling};

pub use montecarlo::{monte_carlo_performance, sample_types, trial_rng, McEstimate};

/// Undecided-node cap for nonadaptive schedules.
pub const NONADAPTIVE_CAP: usize = 14;
/// Undecided-node cap for adaptive and subgame-optimal schedules.
pub const ADAPTIVE_CAP: usize = 12;
/// Largest graph a packed situation key can hold.
const KEY_NODES: usize = 32;

/// Per-node counts of decided Y and N neighbors, maintained per clique of
/// the graph's edge-disjoint cover.
pub struct NeighborCounts<'g> {
    g: &'g ExplicitGraph,
    per_clique: Vec<(u32, u32)>,
    own: Vec<Option<Choice>>,
}

impl<'g> NeighborCounts<'g> {
    pub fn new(g: &'g ExplicitGraph, initial: &Situation) -> Self {
        let mut counts = NeighborCounts {
            g,
            per_clique: vec![(0, 0); g.cliques().len()],
            own: vec![None; g.node_count()],
        };
        for (v, slot) in initial.slots().iter().enumerate() {
            if let Some(c) = slot {
                counts.record(v, *c);
            }
        }
        counts
    }

    /// `(m_Y, m_N)` among the decided neighbors of `v`.
    pub fn decided(&self, v: usize) -> (usize, usize) {
        let (mut my, mut mn) = (0usize, 0usize);
        for &c in self.g.cliques_of(v) {
            let (y, n) = self.per_clique[c];
            my += y as usize;
            mn += n as usize;
        }
        let k = self.g.cliques_of(v).len();
        match self.own[v] {
            Some(Choice::Y) => my -= k,
            Some(Choice::N) => mn -= k,
            None => {}
        }
        (my, mn)
    }

    pub fn record(&mut self, v: usize, c: Choice) {
        debug_assert!(self.own[v].is_none(), "node {v} decided twice");
        self.own[v] = Some(c);
        for &id in self.g.cliques_of(v) {
            match c {
                Choice::Y => self.per_clique[id].0 += 1,
                Choice::N => self.per_clique[id].1 += 1,
            }
        }
    }
}

/// Myopic playout from `initial` with realized types for every node.
pub fn play_myopic_from(
    g: &ExplicitGraph,
    initial: &Situation,
    types: &[Choice],
    pi: &Rational,
    policy: &SchedulePolicy,
) -> Result<Situation> {
    if types.len() != g.node_count() || initial.len() != g.node_count() {
        return Err(CascadeError::InvalidParameter(format!(
            "expected {} types and slots",
            g.node_count()
        )));
    }
    let mut s = initial.clone();
    let mut counts = NeighborCounts::new(g, initial);
    let mut cursor = policy.cursor(g, initial)?;
    while let Some(v) = cursor.next(&s, &counts)? {
        if s.is_decided(v) {
            return Err(CascadeError::Schedule(format!("node {v} scheduled twice")));
        }
        let (my, mn) = counts.decided(v);
        let c = myopic_decision(types[v], my, mn, pi);
        s.decide(v, c)?;
        counts.record(v, c);
    }
    if !s.is_complete() {
        return Err(CascadeError::Schedule("schedule stopped early".into()));
    }
    Ok(s)
}

/// Myopic playout from the empty situation; returns every node's choice.
pub fn play_myopic(
    g: &ExplicitGraph,
    types: &[Choice],
    pi: &Rational,
    policy: &SchedulePolicy,
) -> Result<Vec<Choice>> {
    let s = play_myopic_from(g, &Situation::empty(g.node_count()), types, pi, policy)?;
    Ok(s.slots().iter().map(|c| c.expect("complete")).collect())
}

fn key_of(s: &Situation) -> u64 {
    s.slots().iter().enumerate().fold(0u64, |k, (v, slot)| {
        k | match slot {
            None => 0,
            Some(Choice::Y) => 1u64 << (2 * v),
            Some(Choice::N) => 2u64 << (2 * v),
        }
    })
}

fn situation_of(key: u64, n: usize) -> Situation {
    Situation::from_slots(
        (0..n)
            .map(|v| match (key >> (2 * v)) & 3 {
                1 => Some(Choice::Y),
                2 => Some(Choice::N),
                _ => None,
            })
            .collect(),
    )
}

/// Equilibrium data at one explicit situation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitEntry {
    /// Probability that each node ends at Y (0 or 1 for decided nodes).
    pub prob_y: Vec<Rational>,
    /// Node deciding here; `None` once every node has decided.
    pub node: Option<usize>,
    pub response: Option<Response>,
}

impl ExplicitEntry {
    pub fn total(&self) -> Rational {
        self.prob_y.iter().sum()
    }
}

/// Memoized equilibrium over every situation the solver visited.
#[derive(Clone, Debug)]
pub struct EquilibriumTable {
    n: usize,
    mode: Mode,
    initial: Situation,
    entries: HashMap<u64, ExplicitEntry>,
}

#[derive(Serialize)]
struct ExplicitRow<'a> {
    state: String,
    node: Option<usize>,
    #[serde(rename = "action_Y_type")]
    action_y_type: Option<Choice>,
    #[serde(rename = "action_N_type")]
    action_n_type: Option<Choice>,
    prob_y: &'a [Rational],
}

impl EquilibriumTable {
    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn initial(&self) -> &Situation {
        &self.initial
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, s: &Situation) -> Result<&ExplicitEntry> {
        self.entries
            .get(&key_of(s))
            .ok_or_else(|| CascadeError::UnknownState(s.to_string()))
    }

    pub fn root(&self) -> &ExplicitEntry {
        &self.entries[&key_of(&self.initial)]
    }

    pub fn entries(&self) -> impl Iterator<Item = (Situation, &ExplicitEntry)> + '_ {
        self.entries.iter().map(|(&k, e)| (situation_of(k, self.n), e))
    }

    /// Expected performance read off the root's probability vector.
    pub fn performance(&self) -> Performance {
        Performance::new(self.root().total(), self.n)
    }

    /// Follows equilibrium actions for one realized type vector.
    pub fn walk(&self, types: &[Choice]) -> Result<Situation> {
        let mut s = self.initial.clone();
        loop {
            let e = self.get(&s)?;
            let (Some(v), Some(r)) = (e.node, e.response.as_ref()) else {
                return Ok(s);
            };
            s.decide(v, r.action(types[v]))?;
        }
    }

    /// The deciding node at every solved situation, as an adaptive schedule.
    pub fn schedule(&self) -> SchedulePolicy {
        let table = self
            .entries()
            .filter_map(|(s, e)| e.node.map(|v| (s.to_string(), v)))
            .collect();
        SchedulePolicy::Adaptive { table }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut keys: Vec<_> = self.entries.keys().copied().collect();
        keys.sort_unstable();
        let rows: Vec<_> = keys
            .iter()
            .map(|k| {
                let e = &self.entries[k];
                ExplicitRow {
                    state: situation_of(*k, self.n).to_string(),
                    node: e.node,
                    action_y_type: e.response.as_ref().map(|r| r.action_y),
                    action_n_type: e.response.as_ref().map(|r| r.action_n),
                    prob_y: &e.prob_y,
                }
            })
            .collect();
        serde_json::to_value(rows).expect("rows serialize")
    }
}

/// Agent response at an explicit situation given the children's Y-probabilities.
pub fn respond_explicit(
    g: &ExplicitGraph,
    params: &GameParams,
    mode: Mode,
    s: &Situation,
    v: usize,
    prob_if_y: &[Rational],
    prob_if_n: &[Rational],
) -> Response {
    match mode {
        Mode::Myopic => {
            let my = g.neighbors(v).iter().filter(|&&j| s.get(j) == Some(Choice::Y)).count();
            let mn = g.neighbors(v).iter().filter(|&&j| s.get(j) == Some(Choice::N)).count();
            Response {
                action_y: myopic_decision(Choice::Y, my, mn, &params.pi),
                action_n: myopic_decision(Choice::N, my, mn, &params.pi),
                gap: Rational::from_int(my as i64 - mn as i64),
            }
        }
        Mode::Strategic => {
            let mut gap = Rational::zero();
            for &j in g.neighbors(v) {
                gap += &prob_if_y[j];
                gap += &prob_if_n[j];
                gap -= Rational::one();
            }
            let zero = Rational::zero();
            let with_bonus = &gap + &params.pi;
            Response {
                action_y: tie_break(Choice::Y, &with_bonus, &zero),
                action_n: tie_break(Choice::N, &gap, &params.pi),
                gap,
            }
        }
    }
}

struct ExplicitSolver<'a> {
    g: &'a ExplicitGraph,
    params: &'a GameParams,
    mode: Mode,
    scheduling: &'a Scheduling,
    initial: Situation,
    memo: HashMap<u64, ExplicitEntry>,
}

impl ExplicitSolver<'_> {
    fn evaluate(&mut self, s: &Situation, v: usize) -> Result<(Response, Vec<Rational>)> {
        let (sy, sn) = (s.with(v, Choice::Y), s.with(v, Choice::N));
        let (ky, kn) = (key_of(&sy), key_of(&sn));
        self.ensure(&sy, ky)?;
        self.ensure(&sn, kn)?;
        let (py, pn) = (&self.memo[&ky].prob_y, &self.memo[&kn].prob_y);
        let r = respond_explicit(self.g, self.params, self.mode, s, v, py, pn);
        let pick = |c: Choice| if c.is_y() { py } else { pn };
        let value = mix(&self.params.p, &self.params.q(), pick(r.action_y), pick(r.action_n));
        Ok((r, value))
    }

    fn ensure(&mut self, s: &Situation, key: u64) -> Result<()> {
        if self.memo.contains_key(&key) {
            return Ok(());
        }
        let entry = if s.is_complete() {
            ExplicitEntry {
                prob_y: s
                    .slots()
                    .iter()
                    .map(|c| if *c == Some(Choice::Y) { Rational::one() } else { Rational::zero() })
                    .collect(),
                node: None,
                response: None,
            }
        } else {
            let (v, r, value) = match self.scheduling {
                Scheduling::Policy(policy) => {
                    let v = policy
                        .next_node(self.g, &self.initial, s)?
                        .expect("incomplete situation");
                    let (r, value) = self.evaluate(s, v)?;
                    (v, r, value)
                }
                Scheduling::PbeOptimal => {
                    let mut best: Option<(Rational, usize, Response, Vec<Rational>)> = None;
                    let open: Vec<usize> = s.undecided().collect();
                    for v in open {
                        let (r, value) = self.evaluate(s, v)?;
                        let total: Rational = value.iter().sum();
                        if best.as_ref().is_none_or(|(t, ..)| total > *t) {
                            best = Some((total, v, r, value));
                        }
                    }
                    let (_, v, r, value) = best.expect("incomplete situation has an open node");
                    (v, r, value)
                }
            };
            ExplicitEntry {
                prob_y: value,
                node: Some(v),
                response: Some(r),
            }
        };
        self.memo.insert(key, entry);
        Ok(())
    }
}

fn default_cap(scheduling: &Scheduling) -> usize {
    match scheduling {
        Scheduling::Policy(p) if p.is_nonadaptive() => NONADAPTIVE_CAP,
        _ => ADAPTIVE_CAP,
    }
}

/// Backward induction on an explicit graph from `initial`, with the default
/// undecided-node caps.
pub fn solve_explicit(
    g: &ExplicitGraph,
    params: &GameParams,
    mode: Mode,
    scheduling: &Scheduling,
    initial: &Situation,
) -> Result<EquilibriumTable> {
    solve_explicit_capped(g, params, mode, scheduling, initial, default_cap(scheduling))
}

/// As [`solve_explicit`] with an explicit cap on undecided nodes.
pub fn solve_explicit_capped(
    g: &ExplicitGraph,
    params: &GameParams,
    mode: Mode,
    scheduling: &Scheduling,
    initial: &Situation,
    cap: usize,
) -> Result<EquilibriumTable> {
    params.validate()?;
    let n = g.node_count();
    if initial.len() != n {
        return Err(CascadeError::InvalidParameter(format!(
            "situation has {} slots, graph has {n} nodes",
            initial.len()
        )));
    }
    let open = n - initial.decided_count();
    if open > cap || n > KEY_NODES {
        return Err(CascadeError::CapExceeded {
            what: "undecided nodes",
            size: open,
            limit: cap.min(KEY_NODES),
            hint: "use the blockmodel solver for symmetric graphs",
        });
    }
    let mut solver = ExplicitSolver {
        g,
        params,
        mode,
        scheduling,
        initial: initial.clone(),
        memo: HashMap::new(),
    };
    solver.ensure(initial, key_of(initial))?;
    Ok(EquilibriumTable {
        n,
        mode,
        initial: initial.clone(),
        entries: solver.memo,
    })
}

/// Strategic equilibrium of `game` under a fixed schedule.
pub fn solve_strategic_fixed(game: &GameSpec, schedule: &SchedulePolicy) -> Result<EquilibriumTable> {
    let g = game.graph.to_explicit();
    let sched = Scheduling::Policy(schedule.clone());
    solve_explicit(&g, &game.params, Mode::Strategic, &sched, &Situation::empty(g.node_count()))
}

/// Expected Y-count and fraction, both exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Performance {
    pub count: Rational,
    pub fraction: Rational,
}

impl Performance {
    pub fn new(count: Rational, n: usize) -> Self {
        let fraction = &count / Rational::from(n);
        Performance { count, fraction }
    }

    pub fn float(&self) -> f64 {
        self.fraction.to_f64()
    }
}

impl Serialize for Performance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Performance", 3)?;
        st.serialize_field("count", &self.count)?;
        st.serialize_field("fraction", &self.fraction)?;
        st.serialize_field("float", &self.float())?;
        st.end()
    }
}

/// Weighted sum `sum_k acc[k] p^k q^(u-k)` of per-popcount totals.
fn weigh(acc: &[u64], params: &GameParams) -> Rational {
    let u = acc.len() - 1;
    let q = params.q();
    acc.iter()
        .enumerate()
        .filter(|(_, &a)| a > 0)
        .map(|(k, &a)| Rational::from(a as usize) * params.p.pow(k as u32) * q.pow((u - k) as u32))
        .sum()
}

/// Exact performance by enumerating every type vector of the undecided nodes.
///
/// Myopic play under a fixed policy is simulated directly; otherwise each
/// type vector follows the equilibrium table's actions, independently of the
/// table's own probability vectors.
pub fn brute_force_from(
    g: &ExplicitGraph,
    params: &GameParams,
    mode: Mode,
    scheduling: &Scheduling,
    initial: &Situation,
) -> Result<Performance> {
    params.validate()?;
    let open: Vec<usize> = initial.undecided().collect();
    let cap = default_cap(scheduling).max(if mode == Mode::Myopic { NONADAPTIVE_CAP } else { 0 });
    if open.len() > cap {
        return Err(CascadeError::CapExceeded {
            what: "undecided nodes",
            size: open.len(),
            limit: cap,
            hint: "use Monte Carlo or the blockmodel solver",
        });
    }
    let table = match (mode, scheduling) {
        (Mode::Myopic, Scheduling::Policy(_)) => None,
        _ => Some(solve_explicit(g, params, mode, scheduling, initial)?),
    };
    let mut types = vec![Choice::N; g.node_count()];
    let mut acc = vec![0u64; open.len() + 1];
    for mask in 0u32..(1u32 << open.len()) {
        for (i, &v) in open.iter().enumerate() {
            types[v] = if mask >> i & 1 == 1 { Choice::Y } else { Choice::N };
        }
        let end = match (&table, scheduling) {
            (Some(t), _) => t.walk(&types)?,
            (None, Scheduling::Policy(policy)) => {
                play_myopic_from(g, initial, &types, &params.pi, policy)?
            }
            (None, Scheduling::PbeOptimal) => unreachable!("table built for subgame-optimal play"),
        };
        acc[mask.count_ones() as usize] += end.count(Choice::Y) as u64;
    }
    Ok(Performance::new(weigh(&acc, params), g.node_count()))
}

/// Exact performance of `game` from the empty situation.
pub fn brute_force_performance(game: &GameSpec, scheduling: &Scheduling, mode: Mode) -> Result<Performance> {
    let g = game.graph.to_explicit();
    brute_force_from(&g, &game.params, mode, scheduling, &Situation::empty(g.node_count()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{self, Graph};

    fn gp(p: &str, pi: &str) -> GameParams {
        GameParams::new(p.parse().unwrap(), pi.parse().unwrap()).unwrap()
    }

    fn types(s: &str) -> Vec<Choice> {
        s.chars().map(|c| if c == 'Y' { Choice::Y } else { Choice::N }).collect()
    }

    fn k3() -> ExplicitGraph {
        graphs::clique(3).unwrap().expand()
    }

    #[test]
    fn myopic_k3_examples() {
        let pi: Rational = "11/10".parse().unwrap();
        let order = SchedulePolicy::order(vec![0, 1, 2]);
        assert_eq!(play_myopic(&k3(), &types("YNN"), &pi, &order).unwrap(), types("YNN"));
        assert_eq!(play_myopic(&k3(), &types("YYN"), &pi, &order).unwrap(), types("YYY"));
    }

    #[test]
    fn myopic_star_interior_first() {
        let g = graphs::star(3).unwrap().expand();
        let pi: Rational = "1/2".parse().unwrap();
        let order = SchedulePolicy::order(vec![0, 1, 2]);
        assert_eq!(play_myopic(&g, &types("NYY"), &pi, &order).unwrap(), types("NNN"));
    }

    #[test]
    fn repeated_node_is_an_error() {
        let pi: Rational = "1/2".parse().unwrap();
        let order = SchedulePolicy::order(vec![0, 0, 1]);
        assert!(play_myopic(&k3(), &types("YYY"), &pi, &order).is_err());
    }

    #[test]
    fn k3_root_plays_n_for_both_types() {
        let game = GameSpec::new(Graph::Block(graphs::clique(3).unwrap()), gp("9/100", "11/10")).unwrap();
        let table = solve_strategic_fixed(&game, &SchedulePolicy::order(vec![0, 1, 2])).unwrap();
        let r = table.root().response.clone().unwrap();
        assert_eq!((r.action_y, r.action_n), (Choice::N, Choice::N));
        assert!(table.performance().count.is_zero());
    }

    #[test]
    fn k3_brute_force_both_modes() {
        let game = GameSpec::new(Graph::Block(graphs::clique(3).unwrap()), gp("9/100", "11/10")).unwrap();
        let order = Scheduling::Policy(SchedulePolicy::order(vec![0, 1, 2]));
        let s = brute_force_performance(&game, &order, Mode::Strategic).unwrap();
        assert!(s.fraction.is_zero());
        let m = brute_force_performance(&game, &order, Mode::Myopic).unwrap();
        // first two play their types; the third copies them when they agree
        let p = Rational::ratio(9, 100);
        let q = Rational::one() - &p;
        let expected = Rational::from_int(3) * p.pow(2)
            + Rational::from_int(2) * &p * &q * (Rational::one() + &p);
        assert_eq!(m.count, expected);
    }

    #[test]
    fn single_node_is_p() {
        let game = GameSpec::new(Graph::Block(graphs::clique(1).unwrap()), gp("2/7", "1")).unwrap();
        for mode in Mode::BOTH {
            let perf = brute_force_performance(&game, &Scheduling::PbeOptimal, mode).unwrap();
            assert_eq!(perf.fraction, Rational::ratio(2, 7));
        }
    }

    #[test]
    fn large_pi_everyone_plays_type() {
        let g = graphs::cloud(1, 2).unwrap().expand();
        let params = gp("1/3", "7");
        let table = solve_explicit(&g, &params, Mode::Strategic, &Scheduling::PbeOptimal, &Situation::empty(6))
            .unwrap();
        for (_, e) in table.entries() {
            if let Some(r) = &e.response {
                assert_eq!((r.action_y, r.action_n), (Choice::Y, Choice::N));
            }
        }
    }

    #[test]
    fn table_root_matches_type_walk() {
        let g = graphs::star(5).unwrap().expand();
        let params = gp("3/10", "1/2");
        for mode in Mode::BOTH {
            let sched = Scheduling::PbeOptimal;
            let table = solve_explicit(&g, &params, mode, &sched, &Situation::empty(5)).unwrap();
            let walked = brute_force_from(&g, &params, mode, &sched, &Situation::empty(5)).unwrap();
            assert_eq!(table.performance(), walked);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let g = graphs::clique(13).unwrap().expand();
        let params = gp("1/4", "1/2");
        let err = solve_explicit(&g, &params, Mode::Strategic, &Scheduling::PbeOptimal, &Situation::empty(13));
        assert!(matches!(err, Err(CascadeError::CapExceeded { .. })));
    }

    #[test]
    fn neighbor_counts_per_clique() {
        let g = graphs::council(4, 2, 5).unwrap();
        let mut s = Situation::empty(g.node_count());
        let mut counts = NeighborCounts::new(&g, &s);
        for (v, c) in [(4, Choice::Y), (5, Choice::N), (1, Choice::N), (0, Choice::Y)] {
            s.decide(v, c).unwrap();
            counts.record(v, c);
        }
        for v in 0..g.node_count() {
            let my = g.neighbors(v).iter().filter(|&&j| s.get(j) == Some(Choice::Y)).count();
            let mn = g.neighbors(v).iter().filter(|&&j| s.get(j) == Some(Choice::N)).count();
            assert_eq!(counts.decided(v), (my, mn), "node {v}");
        }
    }

    #[test]
    fn json_export_is_sorted() {
        let g = graphs::clique(2).unwrap().expand();
        let table = solve_explicit(&g, &gp("1/4", "1/2"), Mode::Strategic, &Scheduling::PbeOptimal, &Situation::empty(2))
            .unwrap();
        let js = table.to_json();
        assert_eq!(js[0]["state"], "UU");
        assert_eq!(js[0]["action_Y_type"], "Y");
    }
}
