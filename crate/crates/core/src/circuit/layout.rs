use crate::error::CircuitError;
use std::collections::BTreeSet;
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Topology {
    AllToAll,
    HeavyHex,
    SquareGrid,
    Custom,
}

impl Topology {
    pub fn name(self) -> &'static str {
        match self {
            Topology::AllToAll => "all-to-all",
            Topology::HeavyHex => "heavy-hex",
            Topology::SquareGrid => "square-grid",
            Topology::Custom => "custom",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [Topology::AllToAll, Topology::HeavyHex, Topology::SquareGrid, Topology::Custom].into_iter().find(|t| t.name() == s)
    }
}

/// Physical coupling graph plus the logical → physical assignment.
#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    pub topology: Topology,
    adjacency: Vec<BTreeSet<usize>>,
    pub placement: Vec<usize>,
}

impl Layout {
    pub fn new(topology: Topology, n_physical: usize, edges: &[(usize, usize)], placement: Vec<usize>) -> Result<Self, CircuitError> {
        let mut adjacency = vec![BTreeSet::new(); n_physical];
        for &(a, b) in edges {
            if a >= n_physical || b >= n_physical || a == b {
                return Err(CircuitError::Parse { line: 0, reason: format!("invalid edge ({a}, {b})") });
            }
            adjacency[a].insert(b);
            adjacency[b].insert(a);
        }
        let layout = Layout { topology, adjacency, placement };
        layout.check_placement()?;
        Ok(layout)
    }

    fn check_placement(&self) -> Result<(), CircuitError> {
        let mut seen = vec![false; self.n_physical()];
        for (l, &p) in self.placement.iter().enumerate() {
            if p >= self.n_physical() || seen[p] {
                return Err(CircuitError::Parse { line: 0, reason: format!("placement of logical qubit {l} is not injective or out of range") });
            }
            seen[p] = true;
        }
        Ok(())
    }

    pub fn all_to_all(n_qubits: usize) -> Self {
        let adjacency = (0..n_qubits).map(|p| (0..n_qubits).filter(|&q| q != p).collect()).collect();
        Layout { topology: Topology::AllToAll, adjacency, placement: (0..n_qubits).collect() }
    }

    /// Degree-3 chain layout: sites are linked in triples, each site carries
    /// its oscillator qubit, and consecutive triples are joined through the
    /// oscillator qubit of the last site of the earlier triple. Physical
    /// numbering equals logical numbering (sites 0..N, oscillators N..2N).
    pub fn heavy_hex(n_sites: usize) -> Self {
        let mut edges = Vec::new();
        for n in 0..n_sites {
            edges.push((n, n_sites + n));
            if n + 1 < n_sites {
                if n / 3 == (n + 1) / 3 {
                    edges.push((n, n + 1));
                } else {
                    edges.push((n_sites + n, n + 1));
                }
            }
        }
        Layout::new(Topology::HeavyHex, 2 * n_sites, &edges, (0..2 * n_sites).collect()).expect("edges are valid by construction")
    }

    /// 2 × N grid with sites on the first row and their oscillators below.
    pub fn square_grid(n_sites: usize) -> Self {
        let mut edges = Vec::new();
        for n in 0..n_sites {
            edges.push((n, n_sites + n));
            if n + 1 < n_sites {
                edges.push((n, n + 1));
                edges.push((n_sites + n, n_sites + n + 1));
            }
        }
        Layout::new(Topology::SquareGrid, 2 * n_sites, &edges, (0..2 * n_sites).collect()).expect("edges are valid by construction")
    }

    pub fn n_physical(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, p: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[p].iter().copied()
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency.get(a).is_some_and(|s| s.contains(&b))
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(|s| s.len()).max().unwrap_or(0)
    }

    /// Adjacency-list text: header comments for topology and placement, then `p: q r s` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# topology {}", self.topology.name()).unwrap();
        let placement: Vec<String> = self.placement.iter().map(|p| p.to_string()).collect();
        writeln!(out, "# placement {}", placement.join(" ")).unwrap();
        for (p, nbrs) in self.adjacency.iter().enumerate() {
            let list: Vec<String> = nbrs.iter().map(|q| q.to_string()).collect();
            writeln!(out, "{p}: {}", list.join(" ")).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, CircuitError> {
        let err = |line: usize, reason: &str| CircuitError::Parse { line, reason: reason.to_string() };
        let mut topology = Topology::Custom;
        let mut placement = None;
        let mut rows: Vec<(usize, Vec<usize>)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let mut words = rest.split_whitespace();
                match words.next() {
                    Some("topology") => {
                        topology = words.next().and_then(Topology::from_name).ok_or_else(|| err(line_no, "unknown topology"))?;
                    }
                    Some("placement") => {
                        let list: Result<Vec<usize>, _> = words.map(str::parse).collect();
                        placement = Some(list.map_err(|_| err(line_no, "bad placement entry"))?);
                    }
                    _ => {}
                }
                continue;
            }
            let (head, tail) = line.split_once(':').ok_or_else(|| err(line_no, "expected `p: neighbors`"))?;
            let p = head.trim().parse().map_err(|_| err(line_no, "bad qubit index"))?;
            let nbrs: Result<Vec<usize>, _> = tail.split_whitespace().map(str::parse).collect();
            rows.push((p, nbrs.map_err(|_| err(line_no, "bad neighbor index"))?));
        }
        let n = rows.iter().flat_map(|(p, ns)| std::iter::once(*p).chain(ns.iter().copied())).max().map_or(0, |m| m + 1);
        let edges: Vec<(usize, usize)> = rows.iter().flat_map(|(p, ns)| ns.iter().map(move |&q| (*p, q))).collect();
        let placement = placement.unwrap_or_else(|| (0..n).collect());
        Layout::new(topology, n, &edges, placement)
    }
}
