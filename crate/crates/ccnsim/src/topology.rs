//! Router topologies: a built-in 11-node research-backbone graph, a
//! line-oriented file format, and shortest-path forwarding tables.

use std::collections::{BTreeMap, VecDeque};

use crate::error::SimError;

pub type NodeId = usize;

#[derive(Debug, Clone)]
pub struct Topology {
    names: Vec<String>,
    index: BTreeMap<String, NodeId>,
    adj: Vec<Vec<NodeId>>,
}

/// Edge list of the Abilene backbone (11 routers).
const ABILENE_EDGES: &[(&str, &str)] = &[
    ("n0", "n10"),
    ("n0", "n1"),
    ("n1", "n10"),
    ("n1", "n2"),
    ("n2", "n3"),
    ("n2", "n8"),
    ("n3", "n4"),
    ("n3", "n7"),
    ("n4", "n5"),
    ("n5", "n6"),
    ("n6", "n7"),
    ("n7", "n8"),
    ("n8", "n9"),
    ("n9", "n10"),
];

impl Topology {
    pub fn abilene() -> Self {
        let nodes: Vec<String> = (0..11).map(|i| format!("n{i}")).collect();
        Topology::build(nodes, ABILENE_EDGES.iter().map(|&(a, b)| (a.into(), b.into())))
            .expect("built-in topology is valid")
    }

    fn build(
        nodes: Vec<String>,
        edges: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self, SimError> {
        let mut index = BTreeMap::new();
        for (i, name) in nodes.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(SimError::Topology(format!("duplicate node {name:?}")));
            }
        }
        let mut adj = vec![Vec::new(); nodes.len()];
        let mut seen = std::collections::BTreeSet::new();
        for (a, b) in edges {
            let &ia = index
                .get(&a)
                .ok_or_else(|| SimError::Topology(format!("edge references unknown node {a:?}")))?;
            let &ib = index
                .get(&b)
                .ok_or_else(|| SimError::Topology(format!("edge references unknown node {b:?}")))?;
            if ia == ib {
                return Err(SimError::Topology(format!("self-loop at {a:?}")));
            }
            if !seen.insert((ia.min(ib), ia.max(ib))) {
                return Err(SimError::Topology(format!("duplicate edge {a:?} -- {b:?}")));
            }
            adj[ia].push(ib);
            adj[ib].push(ia);
        }
        for n in &mut adj {
            n.sort_unstable();
        }
        let t = Topology { names: nodes, index, adj };
        t.check_connected()?;
        Ok(t)
    }

    /// Parses the line-oriented format: `node <id>` and `edge <a> <b>`
    /// lines, `#` comments, blank lines ignored.
    pub fn parse(text: &str, path: &str) -> Result<Self, SimError> {
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| SimError::TopologyFormat {
                path: path.to_string(),
                line: i + 1,
                message,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                ["node", id] => nodes.push(id.to_string()),
                ["edge", a, b] => edges.push((a.to_string(), b.to_string())),
                _ => return Err(err(format!("expected `node <id>` or `edge <a> <b>`, got {line:?}"))),
            }
        }
        Topology::build(nodes, edges)
    }

    pub fn load(path: &str) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path).map_err(|source| SimError::Io {
            path: path.to_string(),
            source,
        })?;
        Topology::parse(&text, path)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, node: NodeId) -> &str {
        &self.names[node]
    }

    pub fn node(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied()
    }

    pub fn neighbors(&self, node: NodeId) -> &[NodeId] {
        &self.adj[node]
    }

    fn check_connected(&self) -> Result<(), SimError> {
        if self.names.is_empty() {
            return Err(SimError::Topology("no nodes".into()));
        }
        let d = self.distances(0);
        if let Some(unreached) = d.iter().position(|x| x.is_none()) {
            return Err(SimError::Topology(format!(
                "graph is disconnected: no path to {}",
                self.names[unreached]
            )));
        }
        Ok(())
    }

    /// BFS hop distances from `from` to every node.
    pub fn distances(&self, from: NodeId) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.len()];
        dist[from] = Some(0);
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &v in &self.adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn diameter(&self) -> u32 {
        (0..self.len())
            .flat_map(|n| self.distances(n))
            .flatten()
            .max()
            .unwrap_or(0)
    }

    /// Next hop toward `producer_node` for each router, on a shortest
    /// path; ties fall to the neighbor with the smallest name. The
    /// producer's own router has no next hop (local delivery).
    pub fn build_fib(&self, producer_node: NodeId) -> Vec<Option<NodeId>> {
        let dist = self.distances(producer_node);
        (0..self.len())
            .map(|u| {
                if u == producer_node {
                    return None;
                }
                let du = dist[u].expect("connected");
                self.adj[u]
                    .iter()
                    .copied()
                    .filter(|&v| dist[v] == Some(du - 1))
                    .min_by(|&a, &b| self.names[a].cmp(&self.names[b]))
            })
            .collect()
    }
}
