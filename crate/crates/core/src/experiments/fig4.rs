use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::game::{GameParams, Rational};
use crate::graphs;
use crate::schedulers::stackelberg_search;

/// Published three-decimal values: committed schedule, then subgame-optimal.
/// They are expected numbers of Y-agents out of five, not fractions.
pub const FIG4_TARGET: (&str, &str) = ("573/1000", "371/1000");

/// One three-group instance with both scheduler performances.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Fig4Instance {
    pub sizes: [usize; 3],
    pub pattern: u8,
    /// Fractions of agents choosing Y.
    pub stackelberg: Rational,
    pub pbe: Rational,
    /// Expected numbers of agents choosing Y.
    pub stackelberg_count: Rational,
    pub pbe_count: Rational,
    /// Both expected counts rounded half-up to three decimals.
    pub rounded: (Rational, Rational),
}

#[derive(Clone, Debug, Serialize)]
pub struct Fig4Report {
    pub p: Rational,
    pub pi: Rational,
    /// Size splits that were searched, in order.
    pub searched_sizes: Vec<[usize; 3]>,
    pub instances: Vec<Fig4Instance>,
    pub matches: Vec<Fig4Instance>,
}

fn target() -> (Rational, Rational) {
    (FIG4_TARGET.0.parse().unwrap(), FIG4_TARGET.1.parse().unwrap())
}

fn search_sizes(sizes: [usize; 3], params: &GameParams) -> Result<Vec<Fig4Instance>> {
    (0u8..64)
        .into_par_iter()
        .map(|pattern| {
            let bm = graphs::three_group(sizes, pattern)?;
            let r = stackelberg_search(&bm, params)?;
            let n = Rational::from(bm.node_count());
            let stackelberg_count = &r.stackelberg * &n;
            let pbe_count = &r.pbe * &n;
            Ok(Fig4Instance {
                sizes,
                pattern,
                rounded: (stackelberg_count.round_half_up(3), pbe_count.round_half_up(3)),
                stackelberg: r.stackelberg,
                pbe: r.pbe,
                stackelberg_count,
                pbe_count,
            })
        })
        .collect()
}

/// Searches three-group graphs on five nodes for the published pair.
///
/// The (2, 2, 1) split is tried first over all 64 adjacency patterns; the
/// other ordered splits of five are searched only if it yields no match.
pub fn recover_fig4(params: &GameParams) -> Result<Fig4Report> {
    let goal = target();
    let mut splits = vec![[2, 2, 1]];
    for a in 1..=3 {
        for b in 1..=(4 - a) {
            let s = [a, b, 5 - a - b];
            if s != [2, 2, 1] {
                splits.push(s);
            }
        }
    }
    let mut report = Fig4Report {
        p: params.p.clone(),
        pi: params.pi.clone(),
        searched_sizes: Vec::new(),
        instances: Vec::new(),
        matches: Vec::new(),
    };
    for sizes in splits {
        let found = search_sizes(sizes, params)?;
        report.searched_sizes.push(sizes);
        report
            .matches
            .extend(found.iter().filter(|i| i.rounded == goal).cloned());
        report.instances.extend(found);
        if !report.matches.is_empty() {
            break;
        }
    }
    Ok(report)
}
