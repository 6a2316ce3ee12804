use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::trial_rng;
use crate::error::Result;
use crate::game::{GameParams, Mode, Rational};
use crate::graphs::ExplicitGraph;
use crate::schedulers::{node_order_performance, permutations};

/// Random simple graph where each pair is joined with probability 1/2.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> ExplicitGraph {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(0.5) {
                edges.push((a, b));
            }
        }
    }
    ExplicitGraph::new(n, &edges).expect("generated edges are valid")
}

/// Orders to test: all of them for `n <= 4`, otherwise `count` shuffles.
pub fn sample_orders(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<Vec<usize>> {
    if n <= 4 {
        return permutations(n);
    }
    (0..count)
        .map(|_| {
            let mut o: Vec<usize> = (0..n).collect();
            o.shuffle(rng);
            o
        })
        .collect()
}

/// `p = i / 20` for a random `i` in `1..=9`.
fn sample_p(rng: &mut ChaCha8Rng) -> Rational {
    Rational::ratio(rng.gen_range(1..=9), 20)
}

/// `pi = j / 4` for a random `j` in `1..=16`.
fn sample_pi(rng: &mut ChaCha8Rng) -> Rational {
    Rational::ratio(rng.gen_range(1..=16), 4)
}

/// One checked (graph, order, mode, parameters) combination.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundCase {
    pub sample: usize,
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub order: Vec<usize>,
    pub mode: Mode,
    pub p: Rational,
    pub pi: Rational,
    pub performance: Rational,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub seed: u64,
    pub samples: usize,
    pub cases: Vec<BoundCase>,
    pub violations: usize,
    /// Largest `performance - p` observed; at most 0 when the bound holds.
    pub max_slack: Rational,
    pub passed: bool,
}

/// Samples graphs, parameters and nonadaptive orders and checks that exact
/// performance never exceeds `p` in either mode. Every tenth sample uses
/// `p = 1/2` as a symmetric boundary case.
pub fn verify_nonadaptive_bound(seed: u64, samples: usize, n_max: usize) -> Result<BoundReport> {
    let per_sample: Vec<Vec<BoundCase>> = (0..samples)
        .into_par_iter()
        .map(|sample| {
            let mut rng = trial_rng(seed, sample as u64);
            let n = rng.gen_range(1..=n_max.max(1));
            let g = random_graph(&mut rng, n);
            let p = if sample % 10 == 9 { Rational::ratio(1, 2) } else { sample_p(&mut rng) };
            let pi = sample_pi(&mut rng);
            let params = GameParams::allowing_half(p.clone(), pi.clone())?;
            let orders = sample_orders(&mut rng, n, 6);
            let mut cases = Vec::new();
            for order in orders {
                for mode in Mode::BOTH {
                    let performance = node_order_performance(&g, &params, mode, &order)?;
                    cases.push(BoundCase {
                        sample,
                        n,
                        edges: g.edges(),
                        order: order.clone(),
                        mode,
                        p: p.clone(),
                        pi: pi.clone(),
                        ok: performance <= p,
                        performance,
                    });
                }
            }
            Ok(cases)
        })
        .collect::<Result<_>>()?;
    let cases: Vec<BoundCase> = per_sample.into_iter().flatten().collect();
    let violations = cases.iter().filter(|c| !c.ok).count();
    let max_slack = cases
        .iter()
        .map(|c| &c.performance - &c.p)
        .max()
        .unwrap_or_else(Rational::zero);
    Ok(BoundReport {
        seed,
        samples,
        violations,
        max_slack,
        passed: violations == 0,
        cases,
    })
}

/// Performance at `p` and at a larger `p_hi` under the same schedule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MonotoneCase {
    pub sample: usize,
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub order: Vec<usize>,
    pub mode: Mode,
    pub pi: Rational,
    pub p: Rational,
    pub p_hi: Rational,
    pub performance: Rational,
    pub performance_hi: Rational,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MonotoneReport {
    pub seed: u64,
    pub samples: usize,
    pub cases: Vec<MonotoneCase>,
    pub violations: usize,
    pub passed: bool,
}

/// Checks that raising `p` never lowers exact performance under a fixed
/// nonadaptive schedule, for random graphs with up to ten nodes.
pub fn verify_monotone_p(seed: u64, samples: usize) -> Result<MonotoneReport> {
    let cases: Vec<Vec<MonotoneCase>> = (0..samples)
        .into_par_iter()
        .map(|sample| {
            let mut rng = trial_rng(seed, sample as u64);
            let n = rng.gen_range(1..=10);
            let g = random_graph(&mut rng, n);
            let i = rng.gen_range(1..=9);
            let j = rng.gen_range(i..=9);
            let (p, p_hi) = (Rational::ratio(i, 20), Rational::ratio(j, 20));
            let pi = sample_pi(&mut rng);
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            let lo = GameParams::new(p.clone(), pi.clone())?;
            let hi = GameParams::new(p_hi.clone(), pi.clone())?;
            Mode::BOTH
                .into_iter()
                .map(|mode| {
                    let performance = node_order_performance(&g, &lo, mode, &order)?;
                    let performance_hi = node_order_performance(&g, &hi, mode, &order)?;
                    Ok(MonotoneCase {
                        sample,
                        n,
                        edges: g.edges(),
                        order: order.clone(),
                        mode,
                        pi: pi.clone(),
                        p: p.clone(),
                        p_hi: p_hi.clone(),
                        ok: performance <= performance_hi,
                        performance,
                        performance_hi,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let cases: Vec<MonotoneCase> = cases.into_iter().flatten().collect();
    let violations = cases.iter().filter(|c| !c.ok).count();
    Ok(MonotoneReport {
        seed,
        samples,
        violations,
        passed: violations == 0,
        cases,
    })
}
