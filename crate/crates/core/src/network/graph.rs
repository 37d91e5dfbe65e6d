use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Dense vertex index, `0..network.num_vertices()`.
pub type VertexId = usize;

/// An undirected edge stored in canonical orientation `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub conductance: f64,
}

impl Edge {
    pub fn resistance(&self) -> f64 {
        1.0 / self.conductance
    }
}

/// One half of an undirected edge as seen from its tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub head: VertexId,
    pub edge: usize,
    pub conductance: f64,
    /// Whether tail → head agrees with the edge's canonical orientation.
    pub forward: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Source,
    Sink,
    Free,
}

/// A connected finite network with positive conductances, a source set `A`
/// and a disjoint sink set `B`.
///
/// Parallel edges are merged by adding their conductances, and zero-conductance
/// edges and self-loops are dropped; none of them changes any energy.
#[derive(Debug, Clone)]
pub struct Network {
    edges: Vec<Edge>,
    offsets: Vec<usize>,
    arcs: Vec<Arc>,
    roles: Vec<Role>,
    source: Vec<VertexId>,
    sink: Vec<VertexId>,
    labels: Option<Vec<u64>>,
}

impl Network {
    pub fn new<E, A, B>(num_vertices: usize, edges: E, source: A, sink: B) -> Result<Self>
    where
        E: IntoIterator<Item = (VertexId, VertexId, f64)>,
        A: IntoIterator<Item = VertexId>,
        B: IntoIterator<Item = VertexId>,
    {
        let mut raw = Vec::new();
        for (a, b, c) in edges {
            for x in [a, b] {
                if x >= num_vertices {
                    return Err(Error::UnknownVertex(x));
                }
            }
            if !c.is_finite() || c < 0.0 {
                return Err(Error::InvalidNetwork(format!(
                    "edge ({a}, {b}) has conductance {c}; conductances must be finite and nonnegative"
                )));
            }
            if c > 0.0 && a != b {
                raw.push((a.min(b), a.max(b), c));
            }
        }
        raw.sort_by_key(|x| (x.0, x.1));
        let mut merged: Vec<Edge> = Vec::with_capacity(raw.len());
        for (u, v, c) in raw {
            match merged.last_mut() {
                Some(e) if e.u == u && e.v == v => e.conductance += c,
                _ => merged.push(Edge { u, v, conductance: c }),
            }
        }

        let mut roles = vec![Role::Free; num_vertices];
        let mut source_set = Vec::new();
        for a in source {
            if a >= num_vertices {
                return Err(Error::UnknownVertex(a));
            }
            if roles[a] == Role::Free {
                roles[a] = Role::Source;
                source_set.push(a);
            }
        }
        let mut sink_set = Vec::new();
        for b in sink {
            if b >= num_vertices {
                return Err(Error::UnknownVertex(b));
            }
            match roles[b] {
                Role::Source => {
                    return Err(Error::InvalidNetwork(format!(
                        "vertex {b} is in both the source and the sink set"
                    )))
                }
                Role::Sink => {}
                Role::Free => {
                    roles[b] = Role::Sink;
                    sink_set.push(b);
                }
            }
        }
        if source_set.is_empty() || sink_set.is_empty() {
            return Err(Error::InvalidNetwork("source and sink sets must be nonempty".into()));
        }
        source_set.sort_unstable();
        sink_set.sort_unstable();

        let mut degree = vec![0usize; num_vertices + 1];
        for e in &merged {
            degree[e.u] += 1;
            degree[e.v] += 1;
        }
        let mut offsets = vec![0usize; num_vertices + 1];
        for x in 0..num_vertices {
            offsets[x + 1] = offsets[x] + degree[x];
        }
        let mut fill = offsets.clone();
        let placeholder = Arc { head: 0, edge: 0, conductance: 0.0, forward: true };
        let mut arcs = vec![placeholder; offsets[num_vertices]];
        for (i, e) in merged.iter().enumerate() {
            arcs[fill[e.u]] = Arc { head: e.v, edge: i, conductance: e.conductance, forward: true };
            fill[e.u] += 1;
            arcs[fill[e.v]] = Arc { head: e.u, edge: i, conductance: e.conductance, forward: false };
            fill[e.v] += 1;
        }

        let net = Network {
            edges: merged,
            offsets,
            arcs,
            roles,
            source: source_set,
            sink: sink_set,
            labels: None,
        };
        if let Some(x) = net.first_unreached() {
            return Err(Error::InvalidNetwork(format!(
                "the positive-conductance graph is disconnected (vertex {x} is unreachable)"
            )));
        }
        Ok(net)
    }

    /// Attaches external vertex labels (e.g. ids from an edge-list file).
    pub fn with_labels(mut self, labels: Vec<u64>) -> Result<Self> {
        if labels.len() != self.num_vertices() {
            return Err(Error::LengthMismatch { expected: self.num_vertices(), got: labels.len() });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn label(&self, x: VertexId) -> u64 {
        match &self.labels {
            Some(l) => l[x],
            None => x as u64,
        }
    }

    #[inline]
    pub fn num_vertices(&self) -> usize {
        self.roles.len()
    }

    #[inline]
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    #[inline]
    pub fn arcs(&self, x: VertexId) -> &[Arc] {
        &self.arcs[self.offsets[x]..self.offsets[x + 1]]
    }

    #[inline]
    pub fn role(&self, x: VertexId) -> Role {
        self.roles[x]
    }

    #[inline]
    pub fn is_free(&self, x: VertexId) -> bool {
        self.roles[x] == Role::Free
    }

    pub fn source(&self) -> &[VertexId] {
        &self.source
    }

    pub fn sink(&self) -> &[VertexId] {
        &self.sink
    }

    pub fn free_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.num_vertices()).filter(move |&x| self.is_free(x))
    }

    /// The edge joining `x` and `y`, with `true` when `x → y` is its canonical orientation.
    pub fn find_edge(&self, x: VertexId, y: VertexId) -> Option<(usize, bool)> {
        if x >= self.num_vertices() || y >= self.num_vertices() {
            return None;
        }
        let (from, to) = if self.arcs(x).len() <= self.arcs(y).len() { (x, y) } else { (y, x) };
        let arc = self.arcs(from).iter().find(|a| a.head == to)?;
        let forward = if from == x { arc.forward } else { !arc.forward };
        Some((arc.edge, forward))
    }

    pub(crate) fn check_vertex(&self, x: VertexId) -> Result<()> {
        if x < self.num_vertices() {
            Ok(())
        } else {
            Err(Error::UnknownVertex(x))
        }
    }

    /// Breadth-first spanning tree rooted at `root`: the parent of every vertex
    /// (`usize::MAX` at the root and at unreached vertices) and the visit order.
    pub(crate) fn bfs_tree(&self, root: VertexId) -> (Vec<usize>, Vec<VertexId>) {
        let n = self.num_vertices();
        let mut parent = vec![usize::MAX; n];
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut queue = VecDeque::new();
        seen[root] = true;
        queue.push_back(root);
        while let Some(x) = queue.pop_front() {
            order.push(x);
            for a in self.arcs(x) {
                if !seen[a.head] {
                    seen[a.head] = true;
                    parent[a.head] = x;
                    queue.push_back(a.head);
                }
            }
        }
        (parent, order)
    }

    fn first_unreached(&self) -> Option<VertexId> {
        if self.num_vertices() == 0 {
            return None;
        }
        let (_, order) = self.bfs_tree(0);
        if order.len() == self.num_vertices() {
            return None;
        }
        let mut seen = vec![false; self.num_vertices()];
        for x in order {
            seen[x] = true;
        }
        seen.iter().position(|s| !s)
    }
}
