//! Storage topology: servers are vertices, messages are indexed edges.
//!
//! Every message is replicated on exactly the two endpoint servers of its
//! edge. Vertices, edges (messages) and symbol positions are 1-based
//! throughout the public API.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Brute-force automorphism search is only attempted up to this many vertices
/// unless the caller raises the cap.
pub const DEFAULT_AUTOMORPHISM_CAP: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph must have at least one vertex")]
    NoVertices,
    #[error("edge {edge} is a self-loop on vertex {vertex}")]
    SelfLoop { edge: usize, vertex: usize },
    #[error("edge {edge} duplicates {{{u},{v}}}")]
    DuplicateEdge { edge: usize, u: usize, v: usize },
    #[error("vertex {vertex} is outside [1, {n}]")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("invalid family parameters: {0}")]
    InvalidFamilyParams(String),
    #[error("index {index} is outside [1, {max}]")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("graph has {n} vertices, above the brute-force cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("malformed graph file: {0}")]
    Parse(String),
}

/// Per-server message index sets `I_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StorageMap {
    sets: Vec<Vec<usize>>,
}

impl StorageMap {
    fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut sets = vec![Vec::new(); n];
        for (idx, &(u, v)) in edges.iter().enumerate() {
            sets[u - 1].push(idx + 1);
            sets[v - 1].push(idx + 1);
        }
        Self { sets }
    }

    /// Message indices stored at server `n`, ascending.
    pub fn index_set(&self, n: usize) -> &[usize] {
        &self.sets[n - 1]
    }

    pub fn stores(&self, n: usize, k: usize) -> bool {
        self.sets[n - 1].binary_search(&k).is_ok()
    }

    pub fn servers(&self) -> usize {
        self.sets.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    storage: StorageMap,
}

/// Serialized form: `{"n": N, "edges": [[u, v], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

impl Graph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::NoVertices);
        }
        let mut seen = HashSet::new();
        for (idx, &(u, v)) in edges.iter().enumerate() {
            for vertex in [u, v] {
                if vertex == 0 || vertex > n {
                    return Err(GraphError::VertexOutOfRange { vertex, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop {
                    edge: idx + 1,
                    vertex: u,
                });
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(GraphError::DuplicateEdge { edge: idx + 1, u, v });
            }
        }
        Ok(Self {
            n,
            edges: edges.to_vec(),
            storage: StorageMap::from_edges(n, edges),
        })
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let file: GraphFile =
            serde_json::from_str(text).map_err(|e| GraphError::Parse(e.to_string()))?;
        let edges: Vec<_> = file.edges.iter().map(|e| (e[0], e[1])).collect();
        Self::new(file.n, &edges)
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            n: self.n,
            edges: self.edges.iter().map(|&(u, v)| [u, v]).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("graph file serializes")
    }

    pub fn num_servers(&self) -> usize {
        self.n
    }

    pub fn num_messages(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn storage(&self) -> &StorageMap {
        &self.storage
    }

    pub fn index_set(&self, n: usize) -> &[usize] {
        self.storage.index_set(n)
    }

    pub fn degree(&self, n: usize) -> usize {
        self.storage.index_set(n).len()
    }

    /// The two servers replicating message `k`, in edge-list order.
    pub fn endpoints(&self, k: usize) -> (usize, usize) {
        self.edges[k - 1]
    }

    pub fn check_message(&self, k: usize) -> Result<(), GraphError> {
        if k == 0 || k > self.edges.len() {
            return Err(GraphError::IndexOutOfRange {
                index: k,
                max: self.edges.len(),
            });
        }
        Ok(())
    }

    pub fn check_server(&self, n: usize) -> Result<(), GraphError> {
        if n == 0 || n > self.n {
            return Err(GraphError::IndexOutOfRange { index: n, max: self.n });
        }
        Ok(())
    }

    /// Endpoint of message `k` other than `server`.
    pub fn other_endpoint(&self, k: usize, server: usize) -> usize {
        let (u, v) = self.endpoints(k);
        if u == server {
            v
        } else {
            u
        }
    }

    pub fn servers(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.n
    }

    pub fn messages(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.edges.len()
    }

    fn adjacency(&self) -> Vec<Vec<bool>> {
        let mut adj = vec![vec![false; self.n]; self.n];
        for &(u, v) in &self.edges {
            adj[u - 1][v - 1] = true;
            adj[v - 1][u - 1] = true;
        }
        adj
    }

    fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut nb = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            nb[u - 1].push(v);
            nb[v - 1].push(u);
        }
        nb
    }

    /// Connected components ordered by their smallest vertex. Each component is
    /// relabelled with vertices and messages in increasing global order.
    pub fn components(&self) -> Vec<Component> {
        let nb = self.neighbors();
        let mut label = vec![usize::MAX; self.n];
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for start in 1..=self.n {
            if label[start - 1] != usize::MAX {
                continue;
            }
            let id = groups.len();
            let mut members = vec![start];
            label[start - 1] = id;
            let mut queue = VecDeque::from([start]);
            while let Some(x) = queue.pop_front() {
                for &y in &nb[x - 1] {
                    if label[y - 1] == usize::MAX {
                        label[y - 1] = id;
                        members.push(y);
                        queue.push_back(y);
                    }
                }
            }
            members.sort_unstable();
            groups.push(members);
        }

        groups
            .into_iter()
            .enumerate()
            .map(|(id, vertices)| {
                let mut local = vec![0usize; self.n];
                for (i, &v) in vertices.iter().enumerate() {
                    local[v - 1] = i + 1;
                }
                let mut messages = Vec::new();
                let mut edges = Vec::new();
                for (idx, &(u, v)) in self.edges.iter().enumerate() {
                    if label[u - 1] == id {
                        messages.push(idx + 1);
                        edges.push((local[u - 1], local[v - 1]));
                    }
                }
                let graph = Graph::new(vertices.len(), &edges).expect("component of a valid graph");
                Component {
                    graph,
                    vertices,
                    messages,
                }
            })
            .collect()
    }

    /// Two-colouring with the smallest vertex of every component in `V1`, or
    /// `None` when an odd cycle exists.
    pub fn bipartition(&self) -> Option<Bipartition> {
        let nb = self.neighbors();
        let mut colour: Vec<Option<u8>> = vec![None; self.n];
        for start in 1..=self.n {
            if colour[start - 1].is_some() {
                continue;
            }
            colour[start - 1] = Some(0);
            let mut queue = VecDeque::from([start]);
            while let Some(x) = queue.pop_front() {
                let cx = colour[x - 1].unwrap();
                for &y in &nb[x - 1] {
                    match colour[y - 1] {
                        None => {
                            colour[y - 1] = Some(1 - cx);
                            queue.push_back(y);
                        }
                        Some(cy) if cy == cx => return None,
                        Some(_) => {}
                    }
                }
            }
        }
        let (mut v1, mut v2) = (Vec::new(), Vec::new());
        for (i, c) in colour.iter().enumerate() {
            match c {
                Some(0) => v1.push(i + 1),
                _ => v2.push(i + 1),
            }
        }
        Some(Bipartition { v1, v2 })
    }

    pub fn local_subgraph(&self, k: usize) -> Result<LocalSubgraph, GraphError> {
        self.check_message(k)?;
        let (i, j) = self.endpoints(k);
        let edges: BTreeSet<usize> = self
            .index_set(i)
            .iter()
            .chain(self.index_set(j))
            .copied()
            .collect();
        let vertices: BTreeSet<usize> = edges
            .iter()
            .flat_map(|&l| {
                let (u, v) = self.endpoints(l);
                [u, v]
            })
            .collect();
        Ok(LocalSubgraph {
            message: k,
            endpoints: (i, j),
            vertices: vertices.into_iter().collect(),
            edges: edges.into_iter().collect(),
        })
    }

    pub fn is_edge_transitive(&self) -> Result<bool, GraphError> {
        self.is_edge_transitive_capped(DEFAULT_AUTOMORPHISM_CAP)
    }

    /// Decides edge-transitivity by searching, for every edge, for an
    /// automorphism carrying edge 1 onto it. Backtracking prunes partial maps
    /// that already break adjacency.
    pub fn is_edge_transitive_capped(&self, cap: usize) -> Result<bool, GraphError> {
        if self.n > cap {
            return Err(GraphError::TooLarge { n: self.n, cap });
        }
        let Some(&(u0, v0)) = self.edges.first() else {
            return Ok(true);
        };
        let adj = self.adjacency();
        let degree: Vec<usize> = (1..=self.n).map(|v| self.degree(v)).collect();
        let mut order = vec![u0 - 1, v0 - 1];
        order.extend((0..self.n).filter(|&x| x != u0 - 1 && x != v0 - 1));

        for &(a, b) in &self.edges[1..] {
            let found = [(a, b), (b, a)].iter().any(|&(x, y)| {
                let mut image = vec![usize::MAX; self.n];
                let mut used = vec![false; self.n];
                extend_automorphism(&adj, &degree, &order, 0, &[x - 1, y - 1], &mut image, &mut used)
            });
            if !found {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn extend_automorphism(
    adj: &[Vec<bool>],
    degree: &[usize],
    order: &[usize],
    depth: usize,
    forced: &[usize],
    image: &mut [usize],
    used: &mut [bool],
) -> bool {
    if depth == order.len() {
        return true;
    }
    let w = order[depth];
    let candidates: Vec<usize> = match forced.get(depth) {
        Some(&c) => vec![c],
        None => (0..adj.len()).collect(),
    };
    for c in candidates {
        if used[c] || degree[c] != degree[w] {
            continue;
        }
        let consistent = order[..depth]
            .iter()
            .all(|&x| adj[w][x] == adj[c][image[x]]);
        if !consistent {
            continue;
        }
        image[w] = c;
        used[c] = true;
        if extend_automorphism(adj, degree, order, depth + 1, forced, image, used) {
            return true;
        }
        used[c] = false;
        image[w] = usize::MAX;
    }
    false
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "G(N={}, K={})", self.n, self.edges.len())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub graph: Graph,
    /// `vertices[local - 1]` is the global server index.
    pub vertices: Vec<usize>,
    /// `messages[local - 1]` is the global message index.
    pub messages: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Bipartition {
    pub v1: Vec<usize>,
    pub v2: Vec<usize>,
}

impl Bipartition {
    pub fn part(&self, m: usize) -> &[usize] {
        if m == 1 {
            &self.v1
        } else {
            &self.v2
        }
    }

    /// `Some(1)` / `Some(2)` for the part holding `v`.
    pub fn part_of(&self, v: usize) -> Option<usize> {
        if self.v1.contains(&v) {
            Some(1)
        } else if self.v2.contains(&v) {
            Some(2)
        } else {
            None
        }
    }

    /// True when the parts cover every vertex once and every edge crosses.
    pub fn is_valid_for(&self, g: &Graph) -> bool {
        let mut seen = vec![0u8; g.num_servers()];
        for &v in self.v1.iter().chain(&self.v2) {
            if v == 0 || v > g.num_servers() {
                return false;
            }
            seen[v - 1] += 1;
        }
        if seen.iter().any(|&c| c != 1) {
            return false;
        }
        g.edges()
            .iter()
            .all(|&(u, v)| self.part_of(u) != self.part_of(v))
    }
}

/// The servers and messages involved when retrieving message `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalSubgraph {
    pub message: usize,
    pub endpoints: (usize, usize),
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

/// Graph families with fixed labelings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Family {
    /// Message n on servers {n, n+1 mod N}.
    Cycle(usize),
    /// Message n on servers {n, n+1}.
    Path(usize),
    /// Server N is the centre; message n on {n, N}.
    Star(usize),
    /// Messages on all pairs in lexicographic order.
    Complete(usize),
    /// Parts {1..a} and {a+1..a+b}; edges in lexicographic order.
    CompleteBipartite(usize, usize),
    /// `m` relabelled copies of the base family, copy c on vertices c*N+1..
    DisjointCopies(Box<Family>, usize),
}

impl Family {
    pub fn build(&self) -> Result<Graph, GraphError> {
        let bad = |msg: &str| Err(GraphError::InvalidFamilyParams(msg.to_string()));
        match self {
            Family::Cycle(n) => {
                if *n < 3 {
                    return bad("cycle needs N >= 3");
                }
                let edges: Vec<_> = (1..=*n).map(|i| (i, i % n + 1)).collect();
                Graph::new(*n, &edges)
            }
            Family::Path(n) => {
                if *n < 2 {
                    return bad("path needs N >= 2");
                }
                let edges: Vec<_> = (1..*n).map(|i| (i, i + 1)).collect();
                Graph::new(*n, &edges)
            }
            Family::Star(n) => {
                if *n < 2 {
                    return bad("star needs N >= 2");
                }
                let edges: Vec<_> = (1..*n).map(|i| (i, *n)).collect();
                Graph::new(*n, &edges)
            }
            Family::Complete(n) => {
                if *n < 2 {
                    return bad("complete graph needs N >= 2");
                }
                let mut edges = Vec::new();
                for u in 1..=*n {
                    for v in u + 1..=*n {
                        edges.push((u, v));
                    }
                }
                Graph::new(*n, &edges)
            }
            Family::CompleteBipartite(a, b) => {
                if *a < 1 || *b < 1 {
                    return bad("complete bipartite needs a, b >= 1");
                }
                let mut edges = Vec::new();
                for u in 1..=*a {
                    for v in a + 1..=a + b {
                        edges.push((u, v));
                    }
                }
                Graph::new(a + b, &edges)
            }
            Family::DisjointCopies(base, m) => {
                if *m < 1 {
                    return bad("disjoint copies needs m >= 1");
                }
                let g = base.build()?;
                let n = g.num_servers();
                let mut edges = Vec::new();
                for c in 0..*m {
                    edges.extend(g.edges().iter().map(|&(u, v)| (u + c * n, v + c * n)));
                }
                Graph::new(n * m, &edges)
            }
        }
    }

    pub fn num_servers(&self) -> usize {
        match self {
            Family::Cycle(n) | Family::Path(n) | Family::Star(n) | Family::Complete(n) => *n,
            Family::CompleteBipartite(a, b) => a + b,
            Family::DisjointCopies(base, m) => base.num_servers() * m,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Cycle(n) => write!(f, "C_{n}"),
            Family::Path(n) => write!(f, "P_{n}"),
            Family::Star(n) => write!(f, "S_{n}"),
            Family::Complete(n) => write!(f, "K_{n}"),
            Family::CompleteBipartite(a, b) => write!(f, "K_{{{a},{b}}}"),
            Family::DisjointCopies(base, m) => write!(f, "{m}x{base}"),
        }
    }
}
