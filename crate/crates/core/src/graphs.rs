//! Explicit graphs, blockmodels, and generators for the studied families.
//!
//! Node numbering is deterministic: a blockmodel expands to its blocks
//! concatenated in index order, and the council graph lists council nodes
//! first (representatives leading), followed by subcliques in order.

use std::borrow::Cow;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{CascadeError, Result};

/// A finite simple undirected graph.
///
/// Besides adjacency lists the graph carries an edge-disjoint clique cover.
/// Playouts count decided neighbors per clique, which keeps a decision at
/// `O(cliques containing the node)` even on dense graphs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitGraph {
    adj: Vec<Vec<usize>>,
    cliques: Vec<Vec<usize>>,
    node_cliques: Vec<Vec<usize>>,
}

impl ExplicitGraph {
    /// Builds a graph from an edge list; duplicate edges collapse, self-loops are rejected.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(CascadeError::InvalidParameter(format!(
                    "edge ({a},{b}) out of range for {n} nodes"
                )));
            }
            if a == b {
                return Err(CascadeError::InvalidParameter(format!("self-loop at node {a}")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let cliques = set.into_iter().map(|(a, b)| vec![a, b]).collect();
        Self::from_cliques(n, cliques)
    }

    /// Builds a graph as the union of edge-disjoint cliques.
    pub fn from_cliques(n: usize, cliques: Vec<Vec<usize>>) -> Result<Self> {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut node_cliques = vec![Vec::new(); n];
        let mut kept = Vec::with_capacity(cliques.len());
        for mut clique in cliques {
            clique.sort_unstable();
            clique.dedup();
            if clique.len() < 2 {
                continue;
            }
            if let Some(&bad) = clique.iter().find(|&&v| v >= n) {
                return Err(CascadeError::InvalidParameter(format!(
                    "clique node {bad} out of range for {n} nodes"
                )));
            }
            let id = kept.len();
            for (i, &a) in clique.iter().enumerate() {
                node_cliques[a].push(id);
                for &b in &clique[i + 1..] {
                    adj[a].push(b);
                    adj[b].push(a);
                }
            }
            kept.push(clique);
        }
        for (v, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            let before = list.len();
            list.dedup();
            if list.len() != before {
                return Err(CascadeError::InvalidParameter(format!(
                    "clique cover is not edge-disjoint at node {v}"
                )));
            }
        }
        Ok(ExplicitGraph {
            adj,
            cliques: kept,
            node_cliques,
        })
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (a, list) in self.adj.iter().enumerate() {
            out.extend(list.iter().filter(|&&b| b > a).map(|&b| (a, b)));
        }
        out
    }

    pub fn cliques(&self) -> &[Vec<usize>] {
        &self.cliques
    }

    pub fn cliques_of(&self, v: usize) -> &[usize] {
        &self.node_cliques[v]
    }

    /// Relabels nodes: node `v` becomes `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let cliques = self
            .cliques
            .iter()
            .map(|c| c.iter().map(|&v| perm[v]).collect())
            .collect();
        Self::from_cliques(self.node_count(), cliques)
    }
}

/// Graph given by block sizes and all-or-nothing block adjacency.
///
/// `adjacency[i][j]` joins every node of block `i` to every node of block
/// `j`; a true diagonal entry makes the block internally complete.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Blockmodel {
    sizes: Vec<usize>,
    adjacency: Vec<Vec<bool>>,
}

impl Blockmodel {
    pub fn new(sizes: Vec<usize>, adjacency: Vec<Vec<bool>>) -> Result<Self> {
        let b = sizes.len();
        if b == 0 {
            return Err(CascadeError::InvalidParameter("blockmodel needs at least one block".into()));
        }
        if sizes.iter().any(|&s| s == 0) {
            return Err(CascadeError::InvalidParameter("block sizes must be positive".into()));
        }
        if adjacency.len() != b || adjacency.iter().any(|row| row.len() != b) {
            return Err(CascadeError::InvalidParameter(format!(
                "block adjacency must be {b}x{b}"
            )));
        }
        for i in 0..b {
            for j in 0..b {
                if adjacency[i][j] != adjacency[j][i] {
                    return Err(CascadeError::InvalidParameter(format!(
                        "block adjacency not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(Blockmodel { sizes, adjacency })
    }

    pub fn block_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn size(&self, block: usize) -> usize {
        self.sizes[block]
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.adjacency[i][j]
    }

    pub fn adjacency(&self) -> &[Vec<bool>] {
        &self.adjacency
    }

    pub fn node_count(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// First node index of `block` in the expansion.
    pub fn offset(&self, block: usize) -> usize {
        self.sizes[..block].iter().sum()
    }

    pub fn block_of(&self, node: usize) -> usize {
        let mut start = 0;
        for (b, &s) in self.sizes.iter().enumerate() {
            if node < start + s {
                return b;
            }
            start += s;
        }
        panic!("node {node} out of range");
    }

    /// Per-node block labels of the expansion.
    pub fn labels(&self) -> Vec<usize> {
        self.sizes
            .iter()
            .enumerate()
            .flat_map(|(b, &s)| std::iter::repeat(b).take(s))
            .collect()
    }

    /// Number of neighbors a node of block `b` has in the expansion.
    pub fn degree_of_block(&self, b: usize) -> usize {
        (0..self.block_count())
            .filter(|&j| self.adjacency[b][j])
            .map(|j| if j == b { self.sizes[j] - 1 } else { self.sizes[j] })
            .sum()
    }

    pub fn expand(&self) -> ExplicitGraph {
        let b = self.block_count();
        let mut cliques = Vec::new();
        for i in 0..b {
            let oi = self.offset(i);
            if self.adjacency[i][i] {
                cliques.push((oi..oi + self.sizes[i]).collect());
            }
            for j in i + 1..b {
                if !self.adjacency[i][j] {
                    continue;
                }
                let oj = self.offset(j);
                for u in oi..oi + self.sizes[i] {
                    for v in oj..oj + self.sizes[j] {
                        cliques.push(vec![u, v]);
                    }
                }
            }
        }
        ExplicitGraph::from_cliques(self.node_count(), cliques)
            .expect("blockmodel expansion is a valid edge-disjoint cover")
    }
}

/// Bits of the three-group adjacency pattern: three diagonal entries
/// (A-A, B-B, C-C) then the off-diagonal pairs (A-B, A-C, B-C).
pub mod pattern_bits {
    pub const AA: u8 = 1 << 0;
    pub const BB: u8 = 1 << 1;
    pub const CC: u8 = 1 << 2;
    pub const AB: u8 = 1 << 3;
    pub const AC: u8 = 1 << 4;
    pub const BC: u8 = 1 << 5;
}

/// The graph families under study.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilySpec {
    Clique {
        n: usize,
    },
    Star {
        n: usize,
    },
    Council {
        k: usize,
        m: usize,
        subclique_size: usize,
    },
    Cloud {
        a: usize,
        b: usize,
    },
    ThreeGroup {
        sizes: [usize; 3],
        pattern: u8,
    },
}

impl FamilySpec {
    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::Clique { .. } => "clique",
            FamilySpec::Star { .. } => "star",
            FamilySpec::Council { .. } => "council",
            FamilySpec::Cloud { .. } => "cloud",
            FamilySpec::ThreeGroup { .. } => "three_group",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CascadeError::InvalidParameter(m));
        match *self {
            FamilySpec::Clique { n } if n == 0 => bad("clique needs n >= 1".into()),
            FamilySpec::Star { n } if n < 2 => bad("star needs n >= 2".into()),
            FamilySpec::Council {
                k,
                m,
                subclique_size,
            } => {
                if k == 0 {
                    bad("council needs K >= 1".into())
                } else if m > k {
                    bad(format!("council needs M <= K, got M={m}, K={k}"))
                } else if subclique_size < 5 {
                    bad(format!("council subcliques need size >= 5, got {subclique_size}"))
                } else {
                    Ok(())
                }
            }
            FamilySpec::Cloud { a, b } if a == 0 || b == 0 => {
                bad(format!("cloud needs a, b >= 1, got a={a}, b={b}"))
            }
            FamilySpec::ThreeGroup { sizes, pattern } => {
                if sizes.iter().any(|&s| s == 0) {
                    bad("three_group sizes must be positive".into())
                } else if pattern >= 64 {
                    bad(format!("three_group pattern must fit in 6 bits, got {pattern}"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// A generated graph: a blockmodel where the family admits one, else explicit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Graph {
    Explicit(ExplicitGraph),
    Block(Blockmodel),
}

impl Graph {
    pub fn node_count(&self) -> usize {
        match self {
            Graph::Explicit(g) => g.node_count(),
            Graph::Block(bm) => bm.node_count(),
        }
    }

    pub fn to_explicit(&self) -> Cow<'_, ExplicitGraph> {
        match self {
            Graph::Explicit(g) => Cow::Borrowed(g),
            Graph::Block(bm) => Cow::Owned(bm.expand()),
        }
    }

    pub fn as_block(&self) -> Option<&Blockmodel> {
        match self {
            Graph::Block(bm) => Some(bm),
            Graph::Explicit(_) => None,
        }
    }
}

impl serde::Serialize for Graph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Graph::Explicit(g) => {
                use serde::ser::SerializeStruct;
                let mut st = s.serialize_struct("ExplicitGraph", 2)?;
                st.serialize_field("n", &g.node_count())?;
                st.serialize_field("edges", &g.edges())?;
                st.end()
            }
            Graph::Block(bm) => bm.serialize(s),
        }
    }
}

pub fn clique(n: usize) -> Result<Blockmodel> {
    FamilySpec::Clique { n }.validate()?;
    Blockmodel::new(vec![n], vec![vec![true]])
}

/// Block 0 is the interior node, block 1 the `n - 1` exterior nodes.
pub fn star(n: usize) -> Result<Blockmodel> {
    FamilySpec::Star { n }.validate()?;
    Blockmodel::new(vec![1, n - 1], vec![vec![false, true], vec![true, false]])
}

/// Blocks: outer vertex 1, inner vertex 2, outer vertex 3, cloud A, cloud B.
pub fn cloud(a: usize, b: usize) -> Result<Blockmodel> {
    FamilySpec::Cloud { a, b }.validate()?;
    let mut adj = vec![vec![false; 5]; 5];
    for (i, j) in [(0, 3), (1, 3), (1, 4), (2, 4)] {
        adj[i][j] = true;
        adj[j][i] = true;
    }
    Blockmodel::new(vec![1, 1, 1, a, b], adj)
}

pub fn three_group(sizes: [usize; 3], pattern: u8) -> Result<Blockmodel> {
    use pattern_bits::*;
    FamilySpec::ThreeGroup { sizes, pattern }.validate()?;
    let bit = |m: u8| pattern & m != 0;
    let (aa, bb, cc, ab, ac, bc) = (bit(AA), bit(BB), bit(CC), bit(AB), bit(AC), bit(BC));
    Blockmodel::new(
        sizes.to_vec(),
        vec![vec![aa, ab, ac], vec![ab, bb, bc], vec![ac, bc, cc]],
    )
}

/// Index layout of the council graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CouncilLayout {
    pub k: usize,
    pub m: usize,
    pub subclique_size: usize,
}

impl CouncilLayout {
    pub fn node_count(&self) -> usize {
        self.k + self.m * self.subclique_size
    }

    pub fn is_council(&self, v: usize) -> bool {
        v < self.k
    }

    /// Representative `j` is council node `j`.
    pub fn representative(&self, j: usize) -> usize {
        j
    }

    pub fn is_representative(&self, v: usize) -> bool {
        v < self.m
    }

    pub fn subclique_nodes(&self, j: usize) -> std::ops::Range<usize> {
        let start = self.k + j * self.subclique_size;
        start..start + self.subclique_size
    }

    pub fn subclique_of(&self, v: usize) -> Option<usize> {
        (v >= self.k).then(|| (v - self.k) / self.subclique_size)
    }
}

/// Council of size K whose first M members each represent a private subclique.
pub fn council(k: usize, m: usize, subclique_size: usize) -> Result<ExplicitGraph> {
    FamilySpec::Council {
        k,
        m,
        subclique_size,
    }
    .validate()?;
    let layout = CouncilLayout {
        k,
        m,
        subclique_size,
    };
    let mut cliques = vec![(0..k).collect::<Vec<_>>()];
    for j in 0..m {
        let mut c: Vec<usize> = layout.subclique_nodes(j).collect();
        c.push(layout.representative(j));
        cliques.push(c);
    }
    ExplicitGraph::from_cliques(layout.node_count(), cliques)
}

pub fn generate(spec: &FamilySpec) -> Result<Graph> {
    spec.validate()?;
    Ok(match *spec {
        FamilySpec::Clique { n } => Graph::Block(clique(n)?),
        FamilySpec::Star { n } => Graph::Block(star(n)?),
        FamilySpec::Cloud { a, b } => Graph::Block(cloud(a, b)?),
        FamilySpec::ThreeGroup { sizes, pattern } => Graph::Block(three_group(sizes, pattern)?),
        FamilySpec::Council {
            k,
            m,
            subclique_size,
        } => Graph::Explicit(council(k, m, subclique_size)?),
    })
}

/// JSON form of a generated graph; edge lists only for explicit graphs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphDoc {
    pub family: String,
    pub params: FamilySpec,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Blockmodel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(usize, usize)>>,
}

impl GraphDoc {
    pub fn new(spec: &FamilySpec, graph: &Graph) -> Self {
        let (blocks, edges) = match graph {
            Graph::Block(bm) => (Some(bm.clone()), None),
            Graph::Explicit(g) => (None, Some(g.edges())),
        };
        GraphDoc {
            family: spec.name().to_string(),
            params: spec.clone(),
            n: graph.node_count(),
            blocks,
            edges,
        }
    }
}
