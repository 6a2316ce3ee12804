use serde::Serialize;

use crate::error::{CascadeError, Result};
use crate::game::{Choice, GameParams, Mode, Rational};
use crate::graphs::{self, FamilySpec};
use crate::schedulers::{canonical, PolicyId, Scheduling};

use super::{BlockState, DpSolver};

const INTERIOR: usize = 0;
const EXTERIOR: usize = 1;

/// Exterior-agent cutoffs for one count `k` of unscheduled exterior agents
/// (the decider included), in terms of `d = y - n` among decided exteriors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThresholdRow {
    pub k: usize,
    /// Least `d` at which a Y-type plays Y; `None` if it never does.
    pub y_star: Option<i64>,
    /// One more than the greatest `d` at which a Y-type plays N; `None` if
    /// it plays Y everywhere. Any cutoff in `y_floor..=y_star` fits the row,
    /// since only every other `d` is reachable for a given `k`.
    pub y_floor: Option<i64>,
    /// Greatest `d <= 0` at which an N-type plays N.
    pub n_star: Option<i64>,
    /// Least `d` at which an N-type plays Y, counting states where the
    /// schedule would already have moved to the interior.
    pub n_star_switch: Option<i64>,
    /// N-type plays N at every `d <= 0`.
    pub n_type_always_n: bool,
}

/// Cutoffs per `k` and the interior's Y-probability `i(d, k)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StarThresholds {
    pub n: usize,
    pub rows: Vec<ThresholdRow>,
    /// `(d, k, i(d, k))` for every state with the interior undecided.
    pub interior: Vec<(i64, usize, Rational)>,
}

impl StarThresholds {
    pub fn row(&self, k: usize) -> Option<&ThresholdRow> {
        self.rows.iter().find(|r| r.k == k)
    }

    /// Whether some cutoff sequence, nonincreasing in `k`, fits every row.
    pub fn y_star_monotone(&self) -> bool {
        let lo = |r: &ThresholdRow| r.y_floor.unwrap_or(i64::MIN);
        let hi = |r: &ThresholdRow| r.y_star.unwrap_or(i64::MAX);
        self.rows.iter().all(|small| {
            self.rows
                .iter()
                .filter(|big| big.k > small.k)
                .all(|big| lo(big) <= hi(small))
        })
    }

    pub fn interior_at(&self, d: i64, k: usize) -> Option<&Rational> {
        self.interior.iter().find(|(dd, kk, _)| *dd == d && *kk == k).map(|(.., v)| v)
    }
}

fn exterior_state(ext: usize, d: i64, k: usize) -> BlockState {
    let decided = (ext - k) as i64;
    let y = ((decided + d) / 2) as u32;
    let n = ((decided - d) / 2) as u32;
    BlockState {
        counts: vec![(0, 0), (y, n)],
    }
}

/// Reads threshold strategies off the strategic star equilibrium under the
/// star schedule that moves to the interior once Y leads.
pub fn star_thresholds(n: usize, params: &GameParams) -> Result<StarThresholds> {
    if params.pi >= Rational::one() {
        return Err(CascadeError::InvalidParameter(
            "threshold extraction needs pi < 1".into(),
        ));
    }
    if n < 2 {
        return Err(CascadeError::InvalidParameter("star needs n >= 2".into()));
    }
    let bm = graphs::star(n)?;
    let policy = canonical(PolicyId::StarSopt, &FamilySpec::Star { n })?;
    let scheduling = Scheduling::Policy(policy);
    let mut solver = DpSolver::new(&bm, params, Mode::Strategic, &scheduling, None)?;
    let ext = n - 1;
    let mut rows = Vec::new();
    let mut interior = Vec::new();
    for k in (0..=ext).rev() {
        let reach = (ext - k) as i64;
        let ds: Vec<i64> = (-reach..=reach).step_by(2).collect();
        for &d in &ds {
            let s = exterior_state(ext, d, k);
            let v = solver.solve(&s)?.expected_y[INTERIOR].clone();
            interior.push((d, k, v));
        }
        if k == 0 {
            continue;
        }
        let mut plays_y = Vec::new();
        for &d in &ds {
            let r = solver.respond_at(&exterior_state(ext, d, k), EXTERIOR)?;
            plays_y.push((d, r.action_y == Choice::Y, r.action_n == Choice::Y));
        }
        let cutoff = |pick: fn(&(i64, bool, bool)) -> bool, label: &str| -> Result<Option<i64>> {
            let first = plays_y.iter().position(pick);
            if let Some(i) = first {
                if !plays_y[i..].iter().all(pick) {
                    return Err(CascadeError::NonThreshold(format!(
                        "{label} exterior agent at k={k} plays Y on a non-upward set"
                    )));
                }
            }
            Ok(first.map(|i| plays_y[i].0))
        };
        let y_star = cutoff(|r| r.1, "Y-type")?;
        let y_floor = plays_y.iter().filter(|r| !r.1).map(|r| r.0 + 1).max();
        let n_star_switch = cutoff(|r| r.2, "N-type")?;
        let region: Vec<_> = plays_y.iter().filter(|r| r.0 <= 0).collect();
        let n_star = region.iter().filter(|r| !r.2).map(|r| r.0).max();
        rows.push(ThresholdRow {
            k,
            y_star,
            y_floor,
            n_star,
            n_star_switch,
            n_type_always_n: region.iter().all(|r| !r.2),
        });
    }
    Ok(StarThresholds { n, rows, interior })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gp(p: &str, pi: &str) -> GameParams {
        GameParams::new(p.parse().unwrap(), pi.parse().unwrap()).unwrap()
    }

    fn base_case(d: i64, p: &Rational) -> Rational {
        match d {
            d if d <= -1 => Rational::zero(),
            0 => p.clone(),
            _ => Rational::one(),
        }
    }

    #[test]
    fn interior_base_case() {
        let params = gp("3/10", "1/2");
        for n in [8, 9] {
            let th = star_thresholds(n, &params).unwrap();
            for &(d, k, ref v) in th.interior.iter().filter(|r| r.1 == 0) {
                assert_eq!(*v, base_case(d, &params.p), "n={n} d={d} k={k}");
            }
        }
    }

    #[test]
    fn one_remaining_follows_base_case_when_small() {
        let params = gp("1/5", "1/2");
        for n in [8, 9] {
            let th = star_thresholds(n, &params).unwrap();
            for &(d, k, ref v) in th.interior.iter().filter(|r| r.1 == 1) {
                assert_eq!(*v, base_case(d, &params.p), "n={n} d={d} k={k}");
            }
        }
    }

    #[test]
    fn n_type_never_switches_early() {
        let th = star_thresholds(11, &gp("3/10", "3/5")).unwrap();
        assert!(th.rows.iter().all(|r| r.n_type_always_n));
    }

    #[test]
    fn cutoffs_fit_a_monotone_sequence() {
        for n in [3, 6, 9] {
            let th = star_thresholds(n, &gp("27/125", "4/5")).unwrap();
            assert!(th.y_star_monotone(), "n={n}");
        }
    }

    #[test]
    fn monotone_check_sees_rising_cutoffs() {
        let row = |k, lo, hi| ThresholdRow {
            k,
            y_star: Some(hi),
            y_floor: Some(lo),
            n_star: None,
            n_star_switch: None,
            n_type_always_n: true,
        };
        let mut th = StarThresholds {
            n: 4,
            rows: vec![row(2, -1, 0), row(1, -1, -1)],
            interior: Vec::new(),
        };
        assert!(th.y_star_monotone());
        th.rows = vec![row(2, 1, 1), row(1, -1, 0)];
        assert!(!th.y_star_monotone());
    }

    #[test]
    fn rejects_large_pi() {
        assert!(star_thresholds(5, &gp("1/4", "1")).is_err());
    }
}
