//! Coupling graphs and greedy SWAP routing.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::circuit::{Circuit, Instruction, MAX_QUBITS};
use crate::gate::GateKind;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TopologyError {
    #[error("qubit {qubit} out of range for {n} qubits")]
    OutOfRange { qubit: usize, n: usize },
    #[error("self-loop on qubit {0}")]
    SelfLoop(usize),
    #[error("topology {0} is not connected")]
    Disconnected(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown topology {0:?}")]
    UnknownPreset(String),
    #[error("circuit has {circuit} qubits but topology has {topology}")]
    CircuitTooLarge { circuit: usize, topology: usize },
    #[error("placement: {0}")]
    BadPlacement(String),
    #[error("routed circuit touches {0} qubits, more than the simulator allows")]
    TooManyActive(usize),
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopologyGraph {
    name: String,
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

const PRESETS: [(&str, &str); 4] = [
    ("ionq-11", include_str!("../data/topologies/ionq-11.topo")),
    (
        "ibm-melbourne-15",
        include_str!("../data/topologies/ibm-melbourne-15.topo"),
    ),
    ("ibm-vigo-5", include_str!("../data/topologies/ibm-vigo-5.topo")),
    (
        "rigetti-aspen8-31",
        include_str!("../data/topologies/rigetti-aspen8-31.topo"),
    ),
];

impl TopologyGraph {
    pub const PRESET_NAMES: [&'static str; 4] =
        ["ionq-11", "ibm-melbourne-15", "ibm-vigo-5", "rigetti-aspen8-31"];

    /// Builds a graph, rejecting self-loops, out-of-range endpoints and
    /// disconnected graphs.
    pub fn new(
        name: &str,
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, TopologyError> {
        let mut set = BTreeSet::new();
        let mut adjacency = vec![Vec::new(); n];
        for (a, b) in edges {
            for q in [a, b] {
                if q >= n {
                    return Err(TopologyError::OutOfRange { qubit: q, n });
                }
            }
            if a == b {
                return Err(TopologyError::SelfLoop(a));
            }
            if set.insert((a.min(b), a.max(b))) {
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let g = TopologyGraph {
            name: name.to_string(),
            n,
            edges: set,
            adjacency,
        };
        if n > 0 && g.distances_from(0).iter().any(Option::is_none) {
            return Err(TopologyError::Disconnected(name.to_string()));
        }
        Ok(g)
    }

    pub fn complete(name: &str, n: usize) -> Self {
        let edges = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)));
        TopologyGraph::new(name, n, edges).expect("complete graphs are valid")
    }

    pub fn preset(name: &str) -> Result<Self, TopologyError> {
        PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, text)| text.parse().expect("preset topologies parse"))
            .ok_or_else(|| TopologyError::UnknownPreset(name.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, TopologyError> {
        std::fs::read_to_string(path)
            .map_err(|e| TopologyError::Io(format!("{}: {e}", path.display())))?
            .parse()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn neighbors(&self, q: usize) -> &[usize] {
        &self.adjacency[q]
    }

    pub fn degree(&self, q: usize) -> usize {
        self.adjacency[q].len()
    }

    fn check(&self, q: usize) -> Result<(), TopologyError> {
        if q >= self.n {
            Err(TopologyError::OutOfRange { qubit: q, n: self.n })
        } else {
            Ok(())
        }
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> Result<bool, TopologyError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.edges.contains(&(a.min(b), a.max(b))))
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    fn distances_from(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap();
            for &w in &self.adjacency[v] {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Vertices in breadth-first order from `source`, neighbours visited in
    /// ascending index order.
    pub fn bfs_order(&self, source: usize) -> Vec<usize> {
        let mut seen = vec![false; self.n];
        seen[source] = true;
        let mut order = vec![source];
        let mut i = 0;
        while i < order.len() {
            for &w in &self.adjacency[order[i]] {
                if !seen[w] {
                    seen[w] = true;
                    order.push(w);
                }
            }
            i += 1;
        }
        order
    }

    /// Minimal-length path; ties go to the lexicographically smallest vertex
    /// sequence.
    pub fn shortest_path(&self, a: usize, b: usize) -> Result<Vec<usize>, TopologyError> {
        self.check(a)?;
        self.check(b)?;
        // Distances to `b` let us walk forward from `a` greedily, always taking
        // the smallest neighbour that stays on a shortest path.
        let dist = self.distances_from(b);
        let mut path = vec![a];
        let mut cur = a;
        while cur != b {
            let d = dist[cur].expect("graphs are connected");
            cur = *self.adjacency[cur]
                .iter()
                .find(|&&w| dist[w] == Some(d - 1))
                .expect("a neighbour is closer");
            path.push(cur);
        }
        Ok(path)
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for TopologyGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "name {}", self.name)?;
        writeln!(f, "qubits {}", self.n)?;
        for (a, b) in &self.edges {
            writeln!(f, "edge {a} {b}")?;
        }
        Ok(())
    }
}

impl FromStr for TopologyGraph {
    type Err = TopologyError;

    fn from_str(text: &str) -> Result<Self, TopologyError> {
        let mut name = None;
        let mut n = None;
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let err = |message: String| TopologyError::Parse { line, message };
            let words: Vec<&str> = body.split_whitespace().collect();
            let int = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| err(format!("bad integer {s:?}")))
            };
            match words[..] {
                ["name", value] => name = Some(value.to_string()),
                ["qubits", value] => n = Some(int(value)?),
                ["edge", a, b] => edges.push((int(a)?, int(b)?)),
                _ => return Err(err(format!("unrecognised line {body:?}"))),
            }
        }
        let missing = |what: &str| TopologyError::Parse {
            line: 0,
            message: format!("missing {what}"),
        };
        TopologyGraph::new(
            &name.ok_or_else(|| missing("name"))?,
            n.ok_or_else(|| missing("qubits"))?,
            edges,
        )
    }
}

/// Injective map from logical (circuit) qubits to physical vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QubitMapping {
    to_physical: Vec<usize>,
    to_logical: Vec<Option<usize>>,
}

impl QubitMapping {
    pub fn new(to_physical: Vec<usize>, n_physical: usize) -> Result<Self, TopologyError> {
        let mut to_logical = vec![None; n_physical];
        for (l, &p) in to_physical.iter().enumerate() {
            if p >= n_physical {
                return Err(TopologyError::BadPlacement(format!(
                    "physical {p} out of range"
                )));
            }
            if to_logical[p].replace(l).is_some() {
                return Err(TopologyError::BadPlacement(format!(
                    "physical {p} used twice"
                )));
            }
        }
        Ok(QubitMapping {
            to_physical,
            to_logical,
        })
    }

    pub fn identity(n_logical: usize, n_physical: usize) -> Result<Self, TopologyError> {
        QubitMapping::new((0..n_logical).collect(), n_physical)
    }

    pub fn physical(&self, logical: usize) -> usize {
        self.to_physical[logical]
    }

    pub fn logical(&self, physical: usize) -> Option<usize> {
        self.to_logical[physical]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.to_physical
    }

    pub fn n_logical(&self) -> usize {
        self.to_physical.len()
    }

    /// Exchanges whatever sits on two physical vertices.
    pub fn swap_physical(&mut self, p: usize, q: usize) {
        let (lp, lq) = (self.to_logical[p], self.to_logical[q]);
        self.to_logical[p] = lq;
        self.to_logical[q] = lp;
        if let Some(l) = lp {
            self.to_physical[l] = q;
        }
        if let Some(l) = lq {
            self.to_physical[l] = p;
        }
    }
}

/// Places the last logical qubit on the first maximum-degree vertex and the
/// others in breadth-first order around it.
pub fn hub_placement(g: &TopologyGraph, n_logical: usize) -> Result<QubitMapping, TopologyError> {
    if n_logical > g.n() {
        return Err(TopologyError::CircuitTooLarge {
            circuit: n_logical,
            topology: g.n(),
        });
    }
    if n_logical == 0 {
        return QubitMapping::new(Vec::new(), g.n());
    }
    let max = g.max_degree();
    let hub = (0..g.n()).find(|&q| g.degree(q) == max).unwrap_or(0);
    let order = g.bfs_order(hub);
    let mut to_physical: Vec<usize> = order[1..n_logical].to_vec();
    to_physical.push(hub);
    QubitMapping::new(to_physical, g.n())
}

/// Greedy routing. Each non-adjacent two-qubit gate moves its first operand
/// along the shortest path until it neighbours the second; the SWAPs are not
/// undone.
///
/// The output is compacted to the physical vertices it touches, in ascending
/// order, and records them in `layout`. Measurement and preparation follow
/// the logical qubits, so the output distribution lines up with the input.
pub fn route(
    c: &Circuit,
    g: &TopologyGraph,
    placement: &QubitMapping,
) -> Result<(Circuit, QubitMapping), TopologyError> {
    if c.n_qubits > g.n() {
        return Err(TopologyError::CircuitTooLarge {
            circuit: c.n_qubits,
            topology: g.n(),
        });
    }
    if placement.n_logical() != c.n_qubits {
        return Err(TopologyError::BadPlacement(format!(
            "{} entries for {} qubits",
            placement.n_logical(),
            c.n_qubits
        )));
    }
    let mut mapping = placement.clone();
    let mut active: BTreeSet<usize> = placement.as_slice().iter().copied().collect();
    let mut physical = Vec::with_capacity(c.instructions.len());
    for inst in &c.instructions {
        match inst.operands[..] {
            [a, b] => {
                let (pa, pb) = (mapping.physical(a), mapping.physical(b));
                if !g.is_adjacent(pa, pb)? {
                    let path = g.shortest_path(pa, pb)?;
                    for w in path[..path.len() - 1].windows(2) {
                        physical.push(Instruction::two(GateKind::SWAP, w[0], w[1]));
                        mapping.swap_physical(w[0], w[1]);
                        active.extend([w[0], w[1]]);
                    }
                }
                let mut moved = inst.clone();
                moved.operands = vec![mapping.physical(a), mapping.physical(b)];
                physical.push(moved);
            }
            _ => {
                let mut moved = inst.clone();
                moved.operands = inst.operands.iter().map(|&q| mapping.physical(q)).collect();
                physical.push(moved);
            }
        }
    }
    if active.len() > MAX_QUBITS {
        return Err(TopologyError::TooManyActive(active.len()));
    }
    let layout: Vec<usize> = active.iter().copied().collect();
    let compact = |p: usize| layout.binary_search(&p).expect("active vertex");
    let mut out = Circuit::new(layout.len());
    out.instructions = physical
        .into_iter()
        .map(|mut i| {
            i.operands = i.operands.iter().map(|&p| compact(p)).collect();
            i
        })
        .collect();
    out.initial_ones = c
        .initial_ones
        .iter()
        .map(|&l| compact(placement.physical(l)))
        .collect();
    out.measured = c
        .measured
        .iter()
        .map(|&l| compact(mapping.physical(l)))
        .collect();
    out.complemented = c
        .complemented
        .iter()
        .map(|&l| compact(mapping.physical(l)))
        .collect();
    out.layout = Some(layout);
    Ok((out, mapping))
}

/// Number of SWAPs a routed circuit gained relative to its source.
pub fn inserted_swaps(original: &Circuit, routed: &Circuit) -> usize {
    let count = |c: &Circuit| {
        c.instructions
            .iter()
            .filter(|i| i.kind == GateKind::SWAP)
            .count()
    };
    count(routed) - count(original)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::outcome_distribution;

    #[test]
    fn presets_load() {
        for name in TopologyGraph::PRESET_NAMES {
            let g = TopologyGraph::preset(name).unwrap();
            assert_eq!(g.name(), name);
        }
        assert_eq!(TopologyGraph::preset("ionq-11").unwrap().edges().count(), 55);
        assert_eq!(TopologyGraph::preset("ibm-vigo-5").unwrap().edges().count(), 4);
        assert_eq!(TopologyGraph::preset("rigetti-aspen8-31").unwrap().n(), 31);
        assert!(TopologyGraph::preset("nope").is_err());
    }

    #[test]
    fn adjacency_examples() {
        let ionq = TopologyGraph::preset("ionq-11").unwrap();
        for a in 0..11 {
            for b in 0..11 {
                assert_eq!(ionq.is_adjacent(a, b).unwrap(), a != b);
            }
        }
        let vigo = TopologyGraph::preset("ibm-vigo-5").unwrap();
        assert!(!vigo.is_adjacent(0, 2).unwrap());
        assert!(vigo.is_adjacent(1, 3).unwrap());
        assert!(vigo.is_adjacent(9, 1).is_err());
    }

    #[test]
    fn degrees() {
        let deg = |n| TopologyGraph::preset(n).unwrap().max_degree();
        assert_eq!(deg("ibm-vigo-5"), 3);
        assert_eq!(deg("ionq-11"), 10);
        assert_eq!(deg("ibm-melbourne-15"), 3);
        assert_eq!(deg("rigetti-aspen8-31"), 3);
    }

    #[test]
    fn paths() {
        let vigo = TopologyGraph::preset("ibm-vigo-5").unwrap();
        assert_eq!(vigo.shortest_path(0, 1).unwrap(), vec![0, 1]);
        assert_eq!(vigo.shortest_path(0, 2).unwrap(), vec![0, 1, 2]);
        assert_eq!(vigo.shortest_path(4, 0).unwrap(), vec![4, 3, 1, 0]);
        let ionq = TopologyGraph::preset("ionq-11").unwrap();
        assert_eq!(ionq.shortest_path(3, 9).unwrap(), vec![3, 9]);
        // Square 0-1-3, 0-2-3: both length 2, lexicographic choice goes via 1.
        let sq = TopologyGraph::new("sq", 4, [(0, 2), (2, 3), (0, 1), (1, 3)]).unwrap();
        assert_eq!(sq.shortest_path(0, 3).unwrap(), vec![0, 1, 3]);
        assert_eq!(sq.shortest_path(3, 0).unwrap(), vec![3, 1, 0]);
    }

    #[test]
    fn invalid_graphs() {
        assert_eq!(
            TopologyGraph::new("x", 2, [(1, 1)]),
            Err(TopologyError::SelfLoop(1))
        );
        assert!(matches!(
            TopologyGraph::new("x", 2, [(0, 2)]),
            Err(TopologyError::OutOfRange { .. })
        ));
        assert!(matches!(
            TopologyGraph::new("x", 3, [(0, 1)]),
            Err(TopologyError::Disconnected(_))
        ));
        assert!("qubits 2\nedge 0 1".parse::<TopologyGraph>().is_err());
        assert!("name a\nqubits 2\nedge 0".parse::<TopologyGraph>().is_err());
    }

    #[test]
    fn text_round_trip() {
        for name in TopologyGraph::PRESET_NAMES {
            let g = TopologyGraph::preset(name).unwrap();
            assert_eq!(g.to_text().parse::<TopologyGraph>().unwrap(), g);
        }
    }

    #[test]
    fn mapping_swaps_stay_bijective() {
        let mut m = QubitMapping::new(vec![2, 0], 4).unwrap();
        m.swap_physical(0, 3);
        assert_eq!(m.as_slice(), &[2, 3]);
        assert_eq!(m.logical(3), Some(1));
        assert_eq!(m.logical(0), None);
        m.swap_physical(2, 3);
        assert_eq!(m.as_slice(), &[3, 2]);
        assert!(QubitMapping::new(vec![1, 1], 3).is_err());
    }

    #[test]
    fn routing_on_vigo() {
        let vigo = TopologyGraph::preset("ibm-vigo-5").unwrap();
        let mut c = Circuit::new(5);
        c.h(0).cnot(0, 2).cnot(4, 0).measure(&[0, 2, 4]);
        let (routed, mapping) = route(&c, &vigo, &QubitMapping::identity(5, 5).unwrap()).unwrap();
        assert_eq!(inserted_swaps(&c, &routed), 2);
        let layout = routed.layout.clone().unwrap();
        for inst in &routed.instructions {
            if inst.kind.arity() == 2 {
                let (a, b) = (layout[inst.operands[0]], layout[inst.operands[1]]);
                assert!(vigo.is_adjacent(a, b).unwrap());
            }
        }
        let (a, b) = (outcome_distribution(&c).unwrap(), outcome_distribution(&routed).unwrap());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
        assert_eq!(mapping.n_logical(), 5);
    }

    #[test]
    fn compaction_keeps_only_touched_vertices() {
        let aspen = TopologyGraph::preset("rigetti-aspen8-31").unwrap();
        let mut c = Circuit::new(2);
        c.prepare_one(1).cnot(1, 0).measure_all();
        let placement = QubitMapping::new(vec![0, 4], 31).unwrap();
        let (routed, _) = route(&c, &aspen, &placement).unwrap();
        assert_eq!(routed.n_qubits, 5);
        assert_eq!(routed.layout, Some(vec![0, 1, 2, 3, 4]));
        assert_eq!(
            outcome_distribution(&routed).unwrap(),
            outcome_distribution(&c).unwrap()
        );
    }

    #[test]
    fn hub_placement_on_vigo() {
        let vigo = TopologyGraph::preset("ibm-vigo-5").unwrap();
        let m = hub_placement(&vigo, 5).unwrap();
        assert_eq!(m.as_slice(), &[0, 2, 3, 4, 1]);
        assert!(hub_placement(&vigo, 6).is_err());
    }

    #[test]
    fn too_large() {
        let vigo = TopologyGraph::preset("ibm-vigo-5").unwrap();
        let c = Circuit::new(6);
        let m = QubitMapping::identity(6, 6).unwrap();
        assert!(matches!(
            route(&c, &vigo, &m),
            Err(TopologyError::CircuitTooLarge { .. })
        ));
    }
}
