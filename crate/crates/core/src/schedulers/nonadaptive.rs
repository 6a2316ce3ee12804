use rayon::prelude::*;
use serde::Serialize;

use crate::blockdp::dp_solve;
use crate::engine::solve_explicit;
use crate::error::{CascadeError, Result};
use crate::game::{GameSpec, Mode, Rational, Situation};
use crate::graphs::{Blockmodel, ExplicitGraph, Graph};

use super::{SchedulePolicy, Scheduling};

/// Explicit graphs up to this size are enumerated over all node orders.
pub const EXPLICIT_ORDER_CAP: usize = 8;
/// Cap on distinct block sequences for block-symmetric enumeration.
pub const BLOCK_ORDER_CAP: usize = 500_000;

/// A nonadaptive order whose performance exceeds `p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundViolation {
    pub order: Vec<usize>,
    pub performance: Rational,
    pub bound: Rational,
}

/// Exhaustive comparison of nonadaptive schedules.
#[derive(Clone, Debug, Serialize)]
pub struct NonadaptiveResult {
    /// Best order: block labels for blockmodels, node indices otherwise.
    pub best_order: Vec<usize>,
    pub best: Rational,
    pub worst: Rational,
    pub orders_checked: usize,
    /// Whether orders are sequences of block labels.
    pub block_orders: bool,
    pub violations: Vec<BoundViolation>,
}

/// All distinct sequences using block `b` exactly `counts[b]` times, in
/// lexicographic order.
pub fn block_sequences(counts: &[usize]) -> Vec<Vec<usize>> {
    fn rec(left: &mut [usize], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left.iter().all(|&c| c == 0) {
            out.push(cur.clone());
            return;
        }
        for b in 0..left.len() {
            if left[b] == 0 {
                continue;
            }
            left[b] -= 1;
            cur.push(b);
            rec(left, cur, out);
            cur.pop();
            left[b] += 1;
        }
    }
    let mut out = Vec::new();
    rec(&mut counts.to_vec(), &mut Vec::new(), &mut out);
    out
}

fn multinomial(counts: &[usize]) -> Option<usize> {
    let mut total = 0usize;
    let mut acc = 1u128;
    for &c in counts {
        for i in 1..=c {
            total += 1;
            acc = acc * total as u128 / i as u128;
            if acc > usize::MAX as u128 {
                return None;
            }
        }
    }
    Some(acc as usize)
}

/// Every permutation of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    block_sequences(&[1].repeat(n))
}

/// Exact performance of a nonadaptive block sequence.
pub fn block_order_performance(
    bm: &Blockmodel,
    params: &crate::game::GameParams,
    mode: Mode,
    order: &[usize],
) -> Result<Rational> {
    let sched = Scheduling::Policy(SchedulePolicy::order(order.to_vec()));
    Ok(dp_solve(bm, params, mode, &sched, None)?.root_performance())
}

/// Exact performance of a nonadaptive node order on an explicit graph.
pub fn node_order_performance(
    g: &ExplicitGraph,
    params: &crate::game::GameParams,
    mode: Mode,
    order: &[usize],
) -> Result<Rational> {
    let sched = Scheduling::Policy(SchedulePolicy::order(order.to_vec()));
    let table = solve_explicit(g, params, mode, &sched, &Situation::empty(g.node_count()))?;
    Ok(table.performance().fraction)
}

/// Best nonadaptive schedule by exhaustive search, recording every order
/// that beats the bound `p`.
///
/// Blockmodels enumerate block sequences, since orders that differ only
/// within a block are equivalent; explicit graphs enumerate node orders.
pub fn nonadaptive_enumerate(game: &GameSpec, mode: Mode) -> Result<NonadaptiveResult> {
    let params = &game.params;
    let (orders, block_orders) = match &game.graph {
        Graph::Block(bm) => {
            let count = multinomial(bm.sizes()).unwrap_or(usize::MAX);
            if count > BLOCK_ORDER_CAP {
                return Err(CascadeError::CapExceeded {
                    what: "block sequences",
                    size: count,
                    limit: BLOCK_ORDER_CAP,
                    hint: "use the subgame-optimal scheduler or a smaller model",
                });
            }
            (block_sequences(bm.sizes()), true)
        }
        Graph::Explicit(g) => {
            if g.node_count() > EXPLICIT_ORDER_CAP {
                return Err(CascadeError::CapExceeded {
                    what: "nodes for order enumeration",
                    size: g.node_count(),
                    limit: EXPLICIT_ORDER_CAP,
                    hint: "sample orders instead",
                });
            }
            (permutations(g.node_count()), false)
        }
    };
    let perfs: Vec<Rational> = orders
        .par_iter()
        .map(|order| match &game.graph {
            Graph::Block(bm) => block_order_performance(bm, params, mode, order),
            Graph::Explicit(g) => node_order_performance(g, params, mode, order),
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    let mut worst = 0;
    for (i, v) in perfs.iter().enumerate() {
        if *v > perfs[best] {
            best = i;
        }
        if *v < perfs[worst] {
            worst = i;
        }
    }
    let violations = orders
        .iter()
        .zip(&perfs)
        .filter(|(_, v)| **v > params.p)
        .map(|(o, v)| BoundViolation {
            order: o.clone(),
            performance: v.clone(),
            bound: params.p.clone(),
        })
        .collect();
    Ok(NonadaptiveResult {
        best_order: orders[best].clone(),
        best: perfs[best].clone(),
        worst: perfs[worst].clone(),
        orders_checked: orders.len(),
        block_orders,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::GameParams;
    use crate::graphs;

    fn gp(p: &str, pi: &str) -> GameParams {
        GameParams::new(p.parse().unwrap(), pi.parse().unwrap()).unwrap()
    }

    #[test]
    fn sequence_counts() {
        assert_eq!(block_sequences(&[1, 2]).len(), 3);
        assert_eq!(block_sequences(&[2, 2, 1]).len(), multinomial(&[2, 2, 1]).unwrap());
        assert_eq!(permutations(4).len(), 24);
    }

    #[test]
    fn star_interior_first_attains_p() {
        let params = gp("3/10", "1/2");
        let game = GameSpec::new(Graph::Block(graphs::star(5).unwrap()), params.clone()).unwrap();
        for mode in Mode::BOTH {
            let r = nonadaptive_enumerate(&game, mode).unwrap();
            assert_eq!(r.best, params.p);
            assert_eq!(r.best_order[0], 0);
            assert!(r.violations.is_empty());
        }
    }

    #[test]
    fn clique_orders_all_equal() {
        let game = GameSpec::new(Graph::Explicit(graphs::clique(4).unwrap().expand()), gp("1/5", "3/2")).unwrap();
        for mode in Mode::BOTH {
            let r = nonadaptive_enumerate(&game, mode).unwrap();
            assert_eq!(r.best, r.worst);
            assert_eq!(r.orders_checked, 24);
        }
    }
}
