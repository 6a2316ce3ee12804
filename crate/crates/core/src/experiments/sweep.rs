use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blockdp::{classify_clique, dp_solve, CliqueClass};
use crate::error::{CascadeError, Result};
use crate::game::{GameParams, Mode, Rational};
use crate::graphs;
use crate::schedulers::Scheduling;

/// Families a sweep can range over; the size axis supplies `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepFamily {
    Clique,
    Star,
}

/// A parameter grid. Both modes are solved with the subgame-optimal
/// scheduler in every cell.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub family: SweepFamily,
    pub n: Vec<usize>,
    pub p: Vec<Rational>,
    pub pi: Vec<Rational>,
}

/// `count` evenly spaced values `lo + i * (hi - lo) / count` for `i = 1..=count`.
pub fn axis(lo: &Rational, hi: &Rational, count: usize) -> Vec<Rational> {
    let step = (hi - lo) / Rational::from(count);
    (1..=count).map(|i| lo + &(&step * Rational::from(i))).collect()
}

impl SweepSpec {
    /// Default 50 x 50 grid: `p` strictly inside (0, 1/2), `pi` in (0, 4].
    pub fn default_grid(family: SweepFamily, n: Vec<usize>) -> Self {
        SweepSpec {
            family,
            n,
            p: (1..=50).map(|i| Rational::ratio(i, 101)).collect(),
            pi: axis(&Rational::zero(), &Rational::from_int(4), 50),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n.is_empty() || self.p.is_empty() || self.pi.is_empty() {
            return Err(CascadeError::InvalidParameter("sweep axes must be nonempty".into()));
        }
        for p in &self.p {
            for pi in &self.pi {
                GameParams::new(p.clone(), pi.clone())?;
            }
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.n.len() * self.p.len() * self.pi.len()
    }
}

/// One grid cell. Values are exact; CSV output renders them as decimals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cell {
    pub p: Rational,
    pub pi: Rational,
    pub n: usize,
    pub myopic: Option<Rational>,
    pub strategic: Option<Rational>,
    /// Strategic over myopic; `None` when myopic is 0 or a solve failed.
    pub ratio: Option<Rational>,
    pub class: Option<CliqueClass>,
    pub flags: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GridResult {
    pub spec: SweepSpec,
    pub cells: Vec<Cell>,
}

/// Text written in the ratio column when myopic performance is 0.
pub const RATIO_SENTINEL: &str = "NA";

fn solve_cell(spec: &SweepSpec, n: usize, p: &Rational, pi: &Rational) -> Cell {
    let mut cell = Cell {
        p: p.clone(),
        pi: pi.clone(),
        n,
        myopic: None,
        strategic: None,
        ratio: None,
        class: None,
        flags: Vec::new(),
    };
    let run = |cell: &mut Cell| -> Result<()> {
        let params = GameParams::new(p.clone(), pi.clone())?;
        let bm = match spec.family {
            SweepFamily::Clique => graphs::clique(n)?,
            SweepFamily::Star => graphs::star(n)?,
        };
        let perf = |mode| -> Result<Rational> {
            Ok(dp_solve(&bm, &params, mode, &Scheduling::PbeOptimal, None)?.root_performance())
        };
        let m = perf(Mode::Myopic)?;
        let s = perf(Mode::Strategic)?;
        if m.is_zero() {
            cell.flags.push("myopic_zero".into());
        } else {
            cell.ratio = Some(&s / &m);
        }
        cell.myopic = Some(m);
        cell.strategic = Some(s);
        if spec.family == SweepFamily::Clique && n >= 2 {
            cell.class = Some(classify_clique(n, &params)?);
        }
        Ok(())
    };
    if let Err(e) = run(&mut cell) {
        cell.flags.push(format!("error: {e}"));
    }
    cell
}

/// Solves every cell exactly; per-cell failures are recorded in the cell.
pub fn sweep(spec: &SweepSpec) -> Result<GridResult> {
    spec.validate()?;
    let coords: Vec<(usize, &Rational, &Rational)> = spec
        .n
        .iter()
        .flat_map(|&n| spec.p.iter().flat_map(move |p| spec.pi.iter().map(move |pi| (n, p, pi))))
        .collect();
    let cells = coords
        .par_iter()
        .map(|&(n, p, pi)| solve_cell(spec, n, p, pi))
        .collect();
    Ok(GridResult {
        spec: spec.clone(),
        cells,
    })
}

fn decimal(r: &Option<Rational>) -> String {
    match r {
        Some(r) => format!("{:.10}", r.to_f64()),
        None => String::new(),
    }
}

impl GridResult {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| CascadeError::InvalidParameter(format!("csv output failed: {e}"));
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["p", "pi", "n", "myopic", "strategic", "ratio", "class", "flags"])
            .map_err(io)?;
        for c in &self.cells {
            let ratio = match (&c.ratio, &c.myopic) {
                (Some(_), _) => decimal(&c.ratio),
                (None, Some(m)) if m.is_zero() => RATIO_SENTINEL.to_string(),
                _ => String::new(),
            };
            w.write_record([
                c.p.to_string(),
                c.pi.to_string(),
                c.n.to_string(),
                decimal(&c.myopic),
                decimal(&c.strategic),
                ratio,
                c.class.map(|k| k.to_string()).unwrap_or_default(),
                c.flags.join(";"),
            ])
            .map_err(io)?;
        }
        w.flush()
            .map_err(|e| CascadeError::InvalidParameter(format!("csv output failed: {e}")))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    /// Largest defined ratio, if any.
    pub fn max_ratio(&self) -> Option<&Rational> {
        self.cells.iter().filter_map(|c| c.ratio.as_ref()).max()
    }
}
