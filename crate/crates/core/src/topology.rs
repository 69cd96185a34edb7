//! Graph construction, benchmark generators, BFS distance oracle, and the
//! edge-list text format.
//!
//! Networks are immutable after construction and safe to share across
//! concurrently running trials. Node ids are `0..n-1`; generators fix the
//! source at node 0 so traces are reproducible. Adjacency is kept by both
//! in-neighbor and out-neighbor lists: reception (the hot loop) iterates
//! in-edges of listeners via the transmitters' out-lists, and BFS walks
//! out-lists.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::radio::NodeId;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TopologyError {
    #[error("network must have at least one node")]
    ZeroNodes,
    #[error("node {id} out of range for {node_count} nodes")]
    NodeOutOfRange { id: u64, node_count: u32 },
    #[error("self-loop at node {node}")]
    SelfLoop { node: NodeId },
    #[error("node {node} is not reachable from the source")]
    Unreachable { node: NodeId },
    #[error("layer widths ({widths}) do not match depth {depth}")]
    DepthMismatch { depth: u32, widths: usize },
    #[error("edge probability {p} outside [0, 1]")]
    BadProbability { p: f64 },
    #[error("malformed header: {0}")]
    BadHeader(String),
    #[error("malformed edge on line {line}: {text}")]
    BadEdgeLine { line: usize, text: String },
    #[error("header declares {declared} edges but {found} were given")]
    EdgeCountMismatch { declared: usize, found: usize },
    #[error("unknown graph shorthand: {0}")]
    BadShorthand(String),
}

/// A directed or undirected radio network with a designated source.
///
/// Invariants: no self-loops, ids in `0..n`, source valid, every node
/// reachable from the source, and (if undirected) adjacency symmetric.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    node_count: u32,
    directed: bool,
    source: NodeId,
    ins: Vec<Vec<NodeId>>,
    outs: Vec<Vec<NodeId>>,
}

impl Network {
    /// Build and validate a network from ordered edge pairs. For undirected
    /// networks each pair is materialized in both directions; duplicates
    /// collapse (edges are a set).
    pub fn from_edges(
        node_count: u32,
        directed: bool,
        source: NodeId,
        edges: &[(NodeId, NodeId)],
    ) -> Result<Self, TopologyError> {
        if node_count == 0 {
            return Err(TopologyError::ZeroNodes);
        }
        if source >= node_count {
            return Err(TopologyError::NodeOutOfRange {
                id: source as u64,
                node_count,
            });
        }
        let n = node_count as usize;
        let mut ins: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        let mut outs: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= node_count || v >= node_count {
                return Err(TopologyError::NodeOutOfRange {
                    id: u.max(v) as u64,
                    node_count,
                });
            }
            if u == v {
                return Err(TopologyError::SelfLoop { node: u });
            }
            outs[u as usize].push(v);
            ins[v as usize].push(u);
            if !directed {
                outs[v as usize].push(u);
                ins[u as usize].push(v);
            }
        }
        for list in ins.iter_mut().chain(outs.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }
        let net = Network {
            node_count,
            directed,
            source,
            ins,
            outs,
        };
        if let Some(node) = net.first_unreachable() {
            return Err(TopologyError::Unreachable { node });
        }
        Ok(net)
    }

    fn first_unreachable(&self) -> Option<NodeId> {
        let dist = self.bfs_distances();
        dist.iter()
            .position(|d| d.is_none())
            .map(|idx| idx as NodeId)
    }

    fn bfs_distances(&self) -> Vec<Option<u32>> {
        let n = self.node_count as usize;
        let mut dist: Vec<Option<u32>> = vec![None; n];
        let mut queue = alloc::collections::VecDeque::new();
        dist[self.source as usize] = Some(0);
        queue.push_back(self.source);
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize].unwrap();
            for &v in self.out_neighbors(u) {
                if dist[v as usize].is_none() {
                    dist[v as usize] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn node_count(&self) -> usize {
        self.node_count as usize
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn in_neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.ins[v as usize]
    }

    pub fn out_neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.outs[v as usize]
    }

    /// Canonical edge list, ascending. Undirected networks list each edge
    /// once with the smaller endpoint first.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for u in 0..self.node_count {
            for &v in self.out_neighbors(u) {
                if self.directed || u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }
}

/// Exact hop distances from the source, plus their maximum (the network's
/// eccentricity from the source). The construction invariant guarantees
/// totality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMap {
    pub dist: Vec<u32>,
    pub eccentricity: u32,
}

pub fn bfs(network: &Network) -> DistanceMap {
    let dist: Vec<u32> = network
        .bfs_distances()
        .into_iter()
        .map(|d| d.expect("reachability is a construction invariant"))
        .collect();
    let eccentricity = dist.iter().copied().max().unwrap_or(0);
    DistanceMap { dist, eccentricity }
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// Directed path `0 -> 1 -> ... -> n-1`, source 0.
pub fn make_path(n: u32) -> Result<Network, TopologyError> {
    if n == 0 {
        return Err(TopologyError::ZeroNodes);
    }
    let edges: Vec<_> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
    Network::from_edges(n, true, 0, &edges)
}

/// Undirected star with the source at the center and `n - 1` leaves.
pub fn make_star(n: u32) -> Result<Network, TopologyError> {
    if n == 0 {
        return Err(TopologyError::ZeroNodes);
    }
    let edges: Vec<_> = (1..n).map(|leaf| (0, leaf)).collect();
    Network::from_edges(n, false, 0, &edges)
}

/// Undirected clique: the single-hop case, eccentricity 1.
pub fn make_clique(n: u32) -> Result<Network, TopologyError> {
    if n == 0 {
        return Err(TopologyError::ZeroNodes);
    }
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            edges.push((u, v));
        }
    }
    Network::from_edges(n, false, 0, &edges)
}

/// Source, then `depth` layers of `widths[i]` nodes; every node in a layer
/// is connected to all nodes of the next layer.
pub fn make_layered(depth: u32, widths: &[u32], directed: bool) -> Result<Network, TopologyError> {
    if depth == 0 || widths.contains(&0) {
        return Err(TopologyError::ZeroNodes);
    }
    if widths.len() != depth as usize {
        return Err(TopologyError::DepthMismatch {
            depth,
            widths: widths.len(),
        });
    }
    let n = 1 + widths.iter().sum::<u32>();
    let mut edges = Vec::new();
    let mut prev: Vec<NodeId> = vec![0];
    let mut next_id: NodeId = 1;
    for &w in widths {
        let layer: Vec<NodeId> = (next_id..next_id + w).collect();
        next_id += w;
        for &u in &prev {
            for &v in &layer {
                edges.push((u, v));
            }
        }
        prev = layer;
    }
    Network::from_edges(n, directed, 0, &edges)
}

/// Undirected 4-neighbor lattice, source at the corner (row 0, col 0),
/// ids row-major.
pub fn make_grid(rows: u32, cols: u32) -> Result<Network, TopologyError> {
    if rows == 0 || cols == 0 {
        return Err(TopologyError::ZeroNodes);
    }
    let id = |r: u32, c: u32| r * cols + c;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                edges.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    Network::from_edges(rows * cols, false, 0, &edges)
}

/// Directed G(n, p) conditioned on source reachability: a random spanning
/// arborescence from node 0 is laid down first, then every ordered pair is
/// added independently with probability `p`. Bit-identical for a given
/// seed.
pub fn make_gnp(n: u32, p: f64, seed: u64) -> Result<Network, TopologyError> {
    if n == 0 {
        return Err(TopologyError::ZeroNodes);
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(TopologyError::BadProbability { p });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut edges = Vec::new();

    // Random attachment order, then a uniform parent among earlier nodes.
    let mut order: Vec<NodeId> = (1..n).collect();
    for i in (1..order.len()).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let mut attached: Vec<NodeId> = vec![0];
    for &v in &order {
        let parent = attached[rng.random_range(0..attached.len())];
        edges.push((parent, v));
        attached.push(v);
    }

    for u in 0..n {
        for v in 0..n {
            if u != v && rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Network::from_edges(n, true, 0, &edges)
}

// ---------------------------------------------------------------------------
// Edge-list text format
// ---------------------------------------------------------------------------

/// Parse the edge-list format: a header `directed|undirected n m source`
/// followed by `m` lines `u v`.
pub fn load_edge_list(text: &str) -> Result<Network, TopologyError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| TopologyError::BadHeader(String::from("empty input")))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 {
        return Err(TopologyError::BadHeader(String::from(header)));
    }
    let directed = match fields[0] {
        "directed" => true,
        "undirected" => false,
        _ => return Err(TopologyError::BadHeader(String::from(header))),
    };
    let node_count: u32 = fields[1]
        .parse()
        .map_err(|_| TopologyError::BadHeader(String::from(header)))?;
    let declared: usize = fields[2]
        .parse()
        .map_err(|_| TopologyError::BadHeader(String::from(header)))?;
    let source: u64 = fields[3]
        .parse()
        .map_err(|_| TopologyError::BadHeader(String::from(header)))?;
    if node_count == 0 {
        return Err(TopologyError::ZeroNodes);
    }
    if source >= node_count as u64 {
        return Err(TopologyError::NodeOutOfRange {
            id: source,
            node_count,
        });
    }

    let mut edges = Vec::with_capacity(declared);
    for (line_no, line) in lines {
        let mut it = line.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<u64, TopologyError> {
            tok.and_then(|t| t.parse().ok())
                .ok_or_else(|| TopologyError::BadEdgeLine {
                    line: line_no + 1,
                    text: String::from(line),
                })
        };
        let u = parse(it.next())?;
        let v = parse(it.next())?;
        if it.next().is_some() {
            return Err(TopologyError::BadEdgeLine {
                line: line_no + 1,
                text: String::from(line),
            });
        }
        if u >= node_count as u64 || v >= node_count as u64 {
            return Err(TopologyError::NodeOutOfRange {
                id: u.max(v),
                node_count,
            });
        }
        edges.push((u as NodeId, v as NodeId));
    }
    if edges.len() != declared {
        return Err(TopologyError::EdgeCountMismatch {
            declared,
            found: edges.len(),
        });
    }
    Network::from_edges(node_count, directed, source as NodeId, &edges)
}

/// Serialize in the canonical form `load_edge_list` accepts; edge order is
/// ascending, so save-then-load is the identity.
pub fn save_edge_list(network: &Network) -> String {
    let edges = network.edges();
    let mut out = format!(
        "{} {} {} {}\n",
        if network.directed() {
            "directed"
        } else {
            "undirected"
        },
        network.node_count(),
        edges.len(),
        network.source()
    );
    for (u, v) in edges {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

// ---------------------------------------------------------------------------
// Shorthand
// ---------------------------------------------------------------------------

/// Construct a benchmark network from a CLI shorthand: `path:100`,
/// `star:64`, `clique:32`, `layered:D:W`, `grid:RxC`, `gnp:N:P[:SEED]`
/// (seed defaults to 1 so the graph is stable across experiment seeds).
pub fn from_shorthand(spec: &str) -> Result<Network, TopologyError> {
    let bad = || TopologyError::BadShorthand(String::from(spec));
    let mut parts = spec.split(':');
    let family = parts.next().ok_or_else(bad)?;
    let rest: Vec<&str> = parts.collect();
    let uint = |s: &str| s.parse::<u32>().map_err(|_| bad());
    match (family, rest.as_slice()) {
        ("path", [n]) => make_path(uint(n)?),
        ("star", [n]) => make_star(uint(n)?),
        ("clique", [n]) => make_clique(uint(n)?),
        ("layered", [d, w]) => {
            let depth = uint(d)?;
            let width = uint(w)?;
            make_layered(depth, &vec![width; depth as usize], true)
        }
        ("grid", [dims]) => {
            let (r, c) = dims.split_once('x').ok_or_else(bad)?;
            make_grid(uint(r)?, uint(c)?)
        }
        ("gnp", [n, p]) => make_gnp(uint(n)?, p.parse().map_err(|_| bad())?, 1),
        ("gnp", [n, p, seed]) => make_gnp(
            uint(n)?,
            p.parse().map_err(|_| bad())?,
            seed.parse().map_err(|_| bad())?,
        ),
        _ => Err(bad()),
    }
}
