//! Game definition and the per-agent decision primitives every solver uses.

mod rational;

use std::fmt;
use std::ops::Not;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{CascadeError, Result};
use crate::graphs::Graph;

pub use rational::Rational;

/// One of the two actions, also used for preference types.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Choice {
    Y,
    N,
}

impl Choice {
    pub const BOTH: [Choice; 2] = [Choice::Y, Choice::N];

    pub fn complement(self) -> Choice {
        match self {
            Choice::Y => Choice::N,
            Choice::N => Choice::Y,
        }
    }

    pub fn is_y(self) -> bool {
        self == Choice::Y
    }

    pub fn as_char(self) -> char {
        match self {
            Choice::Y => 'Y',
            Choice::N => 'N',
        }
    }
}

impl Not for Choice {
    type Output = Choice;
    fn not(self) -> Choice {
        self.complement()
    }
}

impl fmt::Display for Choice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Whether agents look ahead (strategic) or only at decided neighbors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Myopic,
    Strategic,
}

impl Mode {
    pub const BOTH: [Mode; 2] = [Mode::Myopic, Mode::Strategic];
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Myopic => write!(f, "myopic"),
            Mode::Strategic => write!(f, "strategic"),
        }
    }
}

impl FromStr for Mode {
    type Err = CascadeError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "myopic" => Ok(Mode::Myopic),
            "strategic" => Ok(Mode::Strategic),
            other => Err(CascadeError::InvalidParameter(format!("unknown mode {other:?}"))),
        }
    }
}

/// The two numeric game parameters: Y-type probability and type bonus.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameParams {
    pub p: Rational,
    pub pi: Rational,
    /// Set when p = 1/2 was admitted for symmetry experiments.
    #[serde(default)]
    pub symmetric: bool,
}

impl GameParams {
    /// Requires 0 < p < 1/2 and pi > 0.
    pub fn new(p: Rational, pi: Rational) -> Result<Self> {
        let params = GameParams {
            p,
            pi,
            symmetric: false,
        };
        params.validate()?;
        Ok(params)
    }

    /// Like [`GameParams::new`] but also admits p = 1/2.
    pub fn allowing_half(p: Rational, pi: Rational) -> Result<Self> {
        let symmetric = p == Rational::ratio(1, 2);
        let params = GameParams { p, pi, symmetric };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let half = Rational::ratio(1, 2);
        if !self.p.is_positive() {
            return Err(CascadeError::InvalidParameter(format!("p must be > 0, got {}", self.p)));
        }
        if self.p > half || (self.p == half && !self.symmetric) {
            return Err(CascadeError::InvalidParameter(format!(
                "p must be < 1/2 (1/2 only with the symmetric flag), got {}",
                self.p
            )));
        }
        if !self.pi.is_positive() {
            return Err(CascadeError::InvalidParameter(format!("pi must be > 0, got {}", self.pi)));
        }
        Ok(())
    }

    pub fn q(&self) -> Rational {
        Rational::one() - &self.p
    }

    pub fn with_p(&self, p: Rational) -> Result<Self> {
        if self.symmetric {
            GameParams::allowing_half(p, self.pi.clone())
        } else {
            GameParams::new(p, self.pi.clone())
        }
    }

    pub fn with_pi(&self, pi: Rational) -> Result<Self> {
        let params = GameParams {
            p: self.p.clone(),
            pi,
            symmetric: self.symmetric,
        };
        params.validate()?;
        Ok(params)
    }

    /// Probability of drawing type `t`.
    pub fn prob(&self, t: Choice) -> Rational {
        match t {
            Choice::Y => self.p.clone(),
            Choice::N => self.q(),
        }
    }
}

/// A game: graph plus parameters.
#[derive(Clone, Debug, Serialize)]
pub struct GameSpec {
    pub graph: Graph,
    pub params: GameParams,
}

impl GameSpec {
    pub fn new(graph: Graph, params: GameParams) -> Result<Self> {
        params.validate()?;
        if graph.node_count() == 0 {
            return Err(CascadeError::InvalidParameter("graph must be nonempty".into()));
        }
        Ok(GameSpec { graph, params })
    }
}

/// Per-node decision status: `Some(choice)` once decided, `None` while undecided.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Situation {
    slots: Vec<Option<Choice>>,
}

impl Situation {
    pub fn empty(n: usize) -> Self {
        Situation {
            slots: vec![None; n],
        }
    }

    pub fn from_slots(slots: Vec<Option<Choice>>) -> Self {
        Situation { slots }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn get(&self, node: usize) -> Option<Choice> {
        self.slots[node]
    }

    pub fn is_decided(&self, node: usize) -> bool {
        self.slots[node].is_some()
    }

    pub fn slots(&self) -> &[Option<Choice>] {
        &self.slots
    }

    pub fn decided_count(&self) -> usize {
        self.slots.iter().filter(|s| s.is_some()).count()
    }

    pub fn is_complete(&self) -> bool {
        self.slots.iter().all(Option::is_some)
    }

    pub fn undecided(&self) -> impl Iterator<Item = usize> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_none())
            .map(|(i, _)| i)
    }

    /// Records a decision; deciding an already-decided node is an error.
    pub fn decide(&mut self, node: usize, c: Choice) -> Result<()> {
        match self.slots.get(node) {
            None => Err(CascadeError::Schedule(format!("node {node} out of range"))),
            Some(Some(_)) => Err(CascadeError::Schedule(format!("node {node} already decided"))),
            Some(None) => {
                self.slots[node] = Some(c);
                Ok(())
            }
        }
    }

    pub fn with(&self, node: usize, c: Choice) -> Situation {
        let mut next = self.clone();
        next.slots[node] = Some(c);
        next
    }

    pub fn count(&self, c: Choice) -> usize {
        self.slots.iter().filter(|s| **s == Some(c)).count()
    }
}

impl fmt::Display for Situation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.slots {
            let ch = match s {
                Some(c) => c.as_char(),
                None => 'U',
            };
            write!(f, "{ch}")?;
        }
        Ok(())
    }
}

impl FromStr for Situation {
    type Err = CascadeError;
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|ch| match ch {
                'Y' => Ok(Some(Choice::Y)),
                'N' => Ok(Some(Choice::N)),
                'U' => Ok(None),
                other => Err(CascadeError::InvalidParameter(format!(
                    "situation character {other:?} not in Y/N/U"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Situation::from_slots)
    }
}

impl Serialize for Situation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Situation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// End-of-game utility of an agent with type `t` choosing `c`.
pub fn utility(t: Choice, c: Choice, neighbor_choices: &[Choice], pi: &Rational) -> Rational {
    let matches = neighbor_choices.iter().filter(|&&x| x == c).count();
    let bonus = if c == t { pi.clone() } else { Rational::zero() };
    bonus + Rational::from(matches)
}

/// Myopic rule: play the type unless the decided-neighbor margin exceeds `pi`.
pub fn myopic_decision(t: Choice, m_y: usize, m_n: usize, pi: &Rational) -> Choice {
    let margin = Rational::from(m_y.abs_diff(m_n));
    if &margin <= pi {
        t
    } else if m_y > m_n {
        Choice::Y
    } else {
        Choice::N
    }
}

/// Best response to exact expected utilities; indifference resolves to the type.
pub fn tie_break(t: Choice, u_y: &Rational, u_n: &Rational) -> Choice {
    match u_y.cmp(u_n) {
        std::cmp::Ordering::Greater => Choice::Y,
        std::cmp::Ordering::Less => Choice::N,
        std::cmp::Ordering::Equal => t,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Choice::{N, Y};

    fn r(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    #[test]
    fn utility_examples() {
        assert_eq!(utility(Y, Y, &[Y, Y], &r(11, 10)), r(31, 10));
        assert_eq!(utility(Y, N, &[], &Rational::from_int(5)), Rational::zero());
        assert_eq!(utility(N, Y, &[Y, N, N], &r(1, 2)), Rational::one());
    }

    #[test]
    fn myopic_examples() {
        assert_eq!(myopic_decision(N, 3, 0, &r(5, 2)), Y);
        assert_eq!(myopic_decision(Y, 0, 0, &r(1, 100)), Y);
        assert_eq!(myopic_decision(N, 2, 0, &r(11, 10)), Y);
        // margin equal to pi still plays the type
        assert_eq!(myopic_decision(N, 2, 0, &Rational::from_int(2)), N);
        assert_eq!(myopic_decision(Y, 0, 3, &r(5, 2)), N);
    }

    #[test]
    fn tie_break_examples() {
        let two = Rational::from_int(2);
        assert_eq!(tie_break(Y, &two, &two), Y);
        assert_eq!(tie_break(N, &two, &two), N);
        assert_eq!(tie_break(N, &r(201, 100), &two), Y);
        assert_eq!(tie_break(Y, &r(199, 100), &two), N);
    }

    #[test]
    fn complement_is_involution() {
        for c in Choice::BOTH {
            assert_eq!(!!c, c);
            assert_ne!(!c, c);
        }
    }

    #[test]
    fn params_validation() {
        assert!(GameParams::new(r(1, 2), r(1, 1)).is_err());
        assert!(GameParams::allowing_half(r(1, 2), r(1, 1)).is_ok());
        assert!(GameParams::new(r(1, 4), Rational::zero()).is_err());
        assert!(GameParams::new(Rational::zero(), r(1, 1)).is_err());
        assert!(GameParams::new(r(1, 4), r(100, 1)).is_ok());
    }

    #[test]
    fn situation_text_round_trip() {
        let s: Situation = "YUNU".parse().unwrap();
        assert_eq!(s.decided_count(), 2);
        assert_eq!(s.to_string(), "YUNU");
        let mut s2 = s.clone();
        assert!(s2.decide(0, N).is_err());
        s2.decide(1, Y).unwrap();
        assert_eq!(s2.to_string(), "YYNU");
    }

    fn choice() -> impl Strategy<Value = Choice> {
        prop_oneof![Just(Y), Just(N)]
    }

    proptest! {
        #[test]
        fn myopic_negation_symmetry(t in choice(), my in 0usize..12, mn in 0usize..12, pn in 1i64..40, pd in 1i64..10) {
            let pi = r(pn, pd);
            prop_assert_eq!(myopic_decision(!t, mn, my, &pi), !myopic_decision(t, my, mn, &pi));
        }

        #[test]
        fn utility_adds_one_per_match(t in choice(), c in choice(), ns in proptest::collection::vec(choice(), 0..8), pn in 1i64..40) {
            let pi = r(pn, 7);
            let base = utility(t, c, &ns, &pi);
            let mut more = ns.clone();
            more.push(c);
            prop_assert_eq!(utility(t, c, &more, &pi), base + Rational::one());
        }

        #[test]
        fn tie_break_never_picks_worse(t in choice(), a in -50i64..50, b in -50i64..50) {
            let (uy, un) = (r(a, 3), r(b, 3));
            let pick = tie_break(t, &uy, &un);
            let (mine, other) = if pick == Y { (&uy, &un) } else { (&un, &uy) };
            prop_assert!(mine >= other);
        }
    }
}
