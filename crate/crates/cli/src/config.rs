use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Every option a command can take. A JSON config file has the same shape
/// (snake_case keys); flags given on the command line win.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// Graph family: clique, star, cloud, three_group, council
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,

    /// Node count; comma-separated list for sweeps
    #[arg(long, global = true, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<Vec<usize>>,

    /// Council size
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,

    /// Number of subcliques in a council
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,

    /// Council subclique size
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subclique_size: Option<usize>,

    /// Cloud sizes
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<usize>,

    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<usize>,

    /// Three-group block sizes, e.g. 2,2,1
    #[arg(long, global = true, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,

    /// Three-group adjacency bits (AA, BB, CC, AB, AC, BC from bit 0)
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pattern: Option<u8>,

    /// Probability of type Y, as a/b or an exact decimal
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<String>,

    /// Preference weight, as a/b or an exact decimal
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pi: Option<String>,

    /// Sweep axis for p (comma-separated); default is the 50-point grid
    #[arg(long, global = true, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ps: Option<Vec<String>>,

    /// Sweep axis for pi (comma-separated); default is the 50-point grid
    #[arg(long, global = true, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pis: Option<Vec<String>>,

    /// myopic, strategic or both
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,

    /// optimal, order, or a named policy (star_sopt, cloud_sopt, council_s,
    /// fig5_stackelberg, fig5_pbe)
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<String>,

    /// Order for --schedule order: block sequence on block families, node
    /// order on explicit graphs
    #[arg(long, global = true, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<usize>>,

    /// Verification campaign: nonadaptive-bound, monotone-p, council, witness, margin
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub campaign: Option<String>,

    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,

    /// Random graphs drawn by a campaign
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,

    /// Largest random graph in a campaign
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,

    /// Include the full equilibrium table in solve output
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<bool>,

    /// Worker threads; default is the available parallelism
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,

    #[arg(long, global = true, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,

    /// Write results here instead of stdout
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($field:ident),+) => {
        Options { $($field: $top.$field.or($base.$field)),+ }
    };
}

impl Options {
    /// `top` wins wherever it sets a field.
    pub fn overlay(self, top: Options) -> Options {
        let base = self;
        overlay!(
            base, top, family, n, k, m, subclique_size, a, b, sizes, pattern, p, pi, ps, pis, mode,
            schedule, order, campaign, seed, trials, samples, n_max, table, jobs, format, output
        )
    }
}
