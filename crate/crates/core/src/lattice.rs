//! PEPS graphs, honeycomb lattices and connected regions.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};

/// A PEPS edge. `slot_a`/`slot_b` locate the virtual qudit inside each site.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PepsEdge {
    pub a: usize,
    pub b: usize,
    pub slot_a: usize,
    pub slot_b: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PepsGraph {
    pub sites: Vec<String>,
    pub edges: Vec<PepsEdge>,
    pub degree: Vec<usize>,
    pub meta: BTreeMap<String, Value>,
}

impl PepsGraph {
    /// Slots are assigned in order of appearance.
    pub fn new(sites: Vec<String>, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut next = vec![0usize; sites.len()];
        let mut edges = Vec::with_capacity(pairs.len());
        for &(a, b) in pairs {
            if a >= sites.len() || b >= sites.len() {
                return Err(Error::InvalidSpec(format!("edge ({a},{b}) references a missing site")));
            }
            let slot_a = next[a];
            next[a] += 1;
            let slot_b = next[b];
            next[b] += 1;
            edges.push(PepsEdge { a, b, slot_a, slot_b });
        }
        Self::with_edges(sites, edges)
    }

    pub fn with_edges(sites: Vec<String>, edges: Vec<PepsEdge>) -> Result<Self> {
        let n = sites.len();
        let mut degree = vec![0usize; n];
        let mut used: BTreeSet<(usize, usize)> = BTreeSet::new();
        for e in &edges {
            if e.a >= n || e.b >= n {
                return Err(Error::InvalidSpec(format!("edge ({},{}) references a missing site", e.a, e.b)));
            }
            if e.a == e.b {
                return Err(Error::InvalidSpec(format!("self-loop at site {}", e.a)));
            }
            if !used.insert((e.a, e.slot_a)) || !used.insert((e.b, e.slot_b)) {
                return Err(Error::InvalidSpec("virtual slot used twice".into()));
            }
            degree[e.a] += 1;
            degree[e.b] += 1;
        }
        for (s, &d) in degree.iter().enumerate() {
            let slots: Vec<usize> = used.range((s, 0)..(s + 1, 0)).map(|x| x.1).collect();
            if slots != (0..d).collect::<Vec<_>>() {
                return Err(Error::InvalidSpec(format!("site {s} slots are not 0..{d}")));
            }
        }
        Ok(Self { sites, edges, degree, meta: BTreeMap::new() })
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn max_degree(&self) -> usize {
        self.degree.iter().copied().max().unwrap_or(0)
    }

    /// Edges incident to `s`, ordered by slot.
    pub fn incident(&self, s: usize) -> Vec<usize> {
        let mut v: Vec<(usize, usize)> = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if e.a == s {
                v.push((e.slot_a, i));
            }
            if e.b == s {
                v.push((e.slot_b, i));
            }
        }
        v.sort();
        v.into_iter().map(|x| x.1).collect()
    }

    pub fn edge_sites(&self, edges: &BTreeSet<usize>) -> BTreeSet<usize> {
        edges.iter().flat_map(|&e| [self.edges[e].a, self.edges[e].b]).collect()
    }

    pub fn to_json(&self) -> Value {
        let edges: Vec<Value> = self.edges.iter().map(|e| json!([e.a, e.b])).collect();
        let slots: Vec<Value> = self.edges.iter().map(|e| json!([e.slot_a, e.slot_b])).collect();
        let mut meta = self.meta.clone();
        meta.insert("slots".into(), Value::Array(slots));
        meta.insert("max_degree".into(), json!(self.max_degree()));
        json!({ "sites": self.sites, "edges": edges, "meta": meta })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::InvalidSpec(format!("graph json: {m}"));
        let sites: Vec<String> = v
            .get("sites")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing sites"))?
            .iter()
            .map(|s| match s {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            })
            .collect();
        let mut pairs = Vec::new();
        for e in v.get("edges").and_then(Value::as_array).ok_or_else(|| bad("missing edges"))? {
            let a = e.get(0).and_then(Value::as_u64).ok_or_else(|| bad("edge endpoint"))? as usize;
            let b = e.get(1).and_then(Value::as_u64).ok_or_else(|| bad("edge endpoint"))? as usize;
            pairs.push((a, b));
        }
        let meta: BTreeMap<String, Value> = match v.get("meta") {
            Some(Value::Object(m)) => m.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
            _ => BTreeMap::new(),
        };
        let mut g = match meta.get("slots").and_then(Value::as_array) {
            Some(slots) if slots.len() == pairs.len() => {
                let mut edges = Vec::new();
                for (&(a, b), s) in pairs.iter().zip(slots) {
                    let slot_a = s.get(0).and_then(Value::as_u64).ok_or_else(|| bad("slot"))? as usize;
                    let slot_b = s.get(1).and_then(Value::as_u64).ok_or_else(|| bad("slot"))? as usize;
                    edges.push(PepsEdge { a, b, slot_a, slot_b });
                }
                Self::with_edges(sites, edges)?
            }
            _ => Self::new(sites, &pairs)?,
        };
        g.meta = meta;
        g.meta.remove("slots");
        g.meta.remove("max_degree");
        Ok(g)
    }
}

/// Open chain of `n` sites.
pub fn chain(n: usize) -> Result<PepsGraph> {
    let pairs: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
    PepsGraph::new((0..n).map(|i| format!("s{i}")).collect(), &pairs)
}

/// Closed ring of `n ≥ 3` sites.
pub fn ring(n: usize) -> Result<PepsGraph> {
    if n < 3 {
        return Err(Error::InvalidSpec("ring needs at least 3 sites".into()));
    }
    let mut pairs: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
    pairs.push((0, n - 1));
    PepsGraph::new((0..n).map(|i| format!("s{i}")).collect(), &pairs)
}

/// Open square grid, sites ordered row-major.
pub fn square_grid(rows: usize, cols: usize) -> Result<PepsGraph> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidSpec("square grid needs rows, cols ≥ 1".into()));
    }
    let id = |r: usize, c: usize| r * cols + c;
    let mut pairs = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                pairs.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                pairs.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    let sites = (0..rows).flat_map(|r| (0..cols).map(move |c| format!("({r},{c})"))).collect();
    let mut g = PepsGraph::new(sites, &pairs)?;
    g.meta.insert("lattice".into(), json!("square"));
    g.meta.insert("rows".into(), json!(rows));
    g.meta.insert("cols".into(), json!(cols));
    Ok(g)
}

/// Elementary square faces of an open grid, as PEPS edge index lists.
pub fn square_plaquettes(g: &PepsGraph, rows: usize, cols: usize) -> Vec<Vec<usize>> {
    let id = |r: usize, c: usize| r * cols + c;
    let find = |a: usize, b: usize| {
        g.edges.iter().position(|e| (e.a == a && e.b == b) || (e.a == b && e.b == a)).expect("grid edge")
    };
    let mut out = Vec::new();
    for r in 0..rows.saturating_sub(1) {
        for c in 0..cols.saturating_sub(1) {
            let mut p = vec![
                find(id(r, c), id(r, c + 1)),
                find(id(r, c + 1), id(r + 1, c + 1)),
                find(id(r + 1, c), id(r + 1, c + 1)),
                find(id(r, c), id(r + 1, c)),
            ];
            p.sort();
            out.push(p);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Torus,
    OpenPatch,
}

/// How the two virtual qubits of a slot pair are joined across a honeycomb edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pairing {
    /// Each PEPS edge joins the two corner qubits facing the same plaquette.
    Geometric,
    /// Slot `k` of one vertex joins slot `k` of the other.
    Straight,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Northeast,
    Northwest,
    Vertical,
}

impl Direction {
    pub const ALL: [Direction; 3] = [Direction::Northeast, Direction::Northwest, Direction::Vertical];

    pub fn index(self) -> usize {
        match self {
            Direction::Northeast => 0,
            Direction::Northwest => 1,
            Direction::Vertical => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    Up,
    Down,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HoneycombSpec {
    pub rows: usize,
    pub cols: usize,
    pub boundary: Boundary,
    pub pairing: Pairing,
}

impl HoneycombSpec {
    pub fn torus(rows: usize, cols: usize) -> Self {
        Self { rows, cols, boundary: Boundary::Torus, pairing: Pairing::Geometric }
    }

    pub fn open_patch(rows: usize, cols: usize) -> Self {
        Self { rows, cols, boundary: Boundary::OpenPatch, pairing: Pairing::Geometric }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub m: i64,
    pub n: i64,
    pub orientation: Orientation,
}

/// A honeycomb edge from an up vertex `u` to a down vertex `v`, doubled into two PEPS edges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HoneyEdge {
    pub u: usize,
    pub v: usize,
    pub dir: Direction,
    pub peps: [usize; 2],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plaquette {
    pub cell: (i64, i64),
    pub honey_edges: Vec<usize>,
    /// PEPS edges closest to the centre, one per side of the hexagon.
    pub interior: Vec<usize>,
    pub self_overlap: bool,
}

#[derive(Clone, Debug)]
pub struct Honeycomb {
    pub spec: HoneycombSpec,
    pub graph: PepsGraph,
    pub vertices: Vec<Vertex>,
    pub honey_edges: Vec<HoneyEdge>,
    pub plaquettes: Vec<Plaquette>,
    pub legs: usize,
}

// Slot layout per vertex: pair 0 (slots 0,1), pair 1 (2,3), pair 2 (4,5).
// Up vertex: pair 0 on the NE edge, pair 1 on NW, pair 2 on the vertical edge below.
// Down vertex is the up vertex rotated by π: pair 0 on SW, pair 1 on SE, pair 2 above.
// Geometric joins (up slot, down slot): NE (1,0),(0,1); NW (2,3),(3,2); vertical (4,5),(5,4).
const GEOMETRIC_JOIN: [[(usize, usize); 2]; 3] = [[(1, 0), (0, 1)], [(2, 3), (3, 2)], [(4, 5), (5, 4)]];
const STRAIGHT_JOIN: [[(usize, usize); 2]; 3] = [[(1, 1), (0, 0)], [(2, 2), (3, 3)], [(4, 4), (5, 5)]];

// Plaquette, relative to the cell of the up vertex, faced by each up-vertex slot.
const UP_SLOT_FACE: [(i64, i64); 6] = [(0, -1), (0, 0), (0, 0), (-1, 0), (-1, 0), (0, -1)];

pub fn build_honeycomb(spec: &HoneycombSpec) -> Result<Honeycomb> {
    if spec.rows == 0 || spec.cols == 0 {
        return Err(Error::InvalidSpec(format!("honeycomb {}x{} is empty", spec.rows, spec.cols)));
    }
    let (rows, cols) = (spec.rows as i64, spec.cols as i64);
    let torus = spec.boundary == Boundary::Torus;
    let wrap = |m: i64, n: i64| if torus { (m.rem_euclid(cols), n.rem_euclid(rows)) } else { (m, n) };

    // Vertex set keyed by (n, m, sub) for lexicographic (row, col, sublattice) ordering.
    let mut keys: BTreeSet<(i64, i64, u8)> = BTreeSet::new();
    if torus {
        for n in 0..rows {
            for m in 0..cols {
                keys.insert((n, m, 0));
                keys.insert((n, m, 1));
            }
        }
    } else {
        for n in 0..rows {
            for m in 0..cols {
                for (dm, dn, s) in [(0, 0, 0), (1, 0, 1), (0, 1, 1), (1, 0, 0), (0, 1, 0), (1, 1, 1)] {
                    keys.insert((n + dn, m + dm, s));
                }
            }
        }
    }
    let index: BTreeMap<(i64, i64, u8), usize> = keys.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    let vertices: Vec<Vertex> = keys
        .iter()
        .map(|&(n, m, s)| Vertex { m, n, orientation: if s == 0 { Orientation::Up } else { Orientation::Down } })
        .collect();

    // Honeycomb edges from every up vertex.
    let mut raw: Vec<(usize, usize, Direction, (i64, i64))> = Vec::new();
    let mut legs = 0usize;
    for &(n, m, s) in &keys {
        if s != 0 {
            continue;
        }
        let u = index[&(n, m, 0)];
        for (dir, dm, dn) in [(Direction::Northeast, 1, 0), (Direction::Northwest, 0, 1), (Direction::Vertical, 0, 0)] {
            let (wm, wn) = wrap(m + dm, n + dn);
            match index.get(&(wn, wm, 1)) {
                Some(&v) => raw.push((u, v, dir, (m, n))),
                None => legs += 1,
            }
        }
    }
    if !torus {
        for &(n, m, s) in &keys {
            if s == 1 {
                for (dm, dn) in [(-1, 0), (0, -1), (0, 0)] {
                    if !index.contains_key(&(n + dn, m + dm, 0)) {
                        legs += 1;
                    }
                }
            }
        }
    }

    // Slots: full 6-slot layout, compacted for open patches.
    let mut present: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); vertices.len()];
    for &(u, v, dir, _) in &raw {
        let p = dir.index();
        present[u].extend([2 * p, 2 * p + 1]);
        present[v].extend([2 * p, 2 * p + 1]);
    }
    let compact = |s: usize, slot: usize| present[s].range(..slot).count();

    let join = match spec.pairing {
        Pairing::Geometric => GEOMETRIC_JOIN,
        Pairing::Straight => STRAIGHT_JOIN,
    };
    let mut edges = Vec::new();
    let mut honey_edges = Vec::new();
    let mut face_of_edge: Vec<(i64, i64)> = Vec::new();
    for &(u, v, dir, (m, n)) in &raw {
        let mut peps = [0usize; 2];
        for (c, &(su, sv)) in join[dir.index()].iter().enumerate() {
            peps[c] = edges.len();
            edges.push(PepsEdge { a: u, b: v, slot_a: compact(u, su), slot_b: compact(v, sv) });
            let (fm, fn_) = UP_SLOT_FACE[su];
            face_of_edge.push(wrap(m + fm, n + fn_));
        }
        honey_edges.push(HoneyEdge { u, v, dir, peps });
    }

    let names = vertices
        .iter()
        .map(|v| format!("{}({},{})", if v.orientation == Orientation::Up { "A" } else { "B" }, v.n, v.m))
        .collect();
    let mut graph = PepsGraph::with_edges(names, edges)?;
    graph.meta.insert("lattice".into(), json!("honeycomb"));
    graph.meta.insert("rows".into(), json!(spec.rows));
    graph.meta.insert("cols".into(), json!(spec.cols));
    graph.meta.insert("boundary".into(), serde_json::to_value(spec.boundary)?);
    graph.meta.insert("pairing".into(), serde_json::to_value(spec.pairing)?);
    graph.meta.insert("legs".into(), json!(legs));

    let mut plaquettes = Vec::new();
    for n in 0..rows {
        for m in 0..cols {
            let cell = (m, n);
            let mut interior: Vec<usize> = (0..face_of_edge.len()).filter(|&e| face_of_edge[e] == cell).collect();
            interior.sort();
            let hex = [
                (m, n, Direction::Northeast),
                (m, n, Direction::Northwest),
                (m + 1, n, Direction::Vertical),
                (m + 1, n, Direction::Northwest),
                (m, n + 1, Direction::Vertical),
                (m, n + 1, Direction::Northeast),
            ];
            let mut hes = Vec::new();
            for (hm, hn, dir) in hex {
                let (wm, wn) = wrap(hm, hn);
                if let Some(i) = raw.iter().position(|r| r.3 == (wm, wn) && r.2 == dir) {
                    hes.push(i);
                }
            }
            let distinct: BTreeSet<usize> = hes.iter().copied().collect();
            let sites: BTreeSet<usize> = hes.iter().flat_map(|&h| [raw[h].0, raw[h].1]).collect();
            let self_overlap = distinct.len() < 6 || sites.len() < 6;
            plaquettes.push(Plaquette { cell, honey_edges: hes, interior, self_overlap });
        }
    }
    Ok(Honeycomb { spec: spec.clone(), graph, vertices, honey_edges, plaquettes, legs })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionKind {
    Sites,
    Edges,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Region {
    pub kind: RegionKind,
    pub sites: BTreeSet<usize>,
    pub edges: BTreeSet<usize>,
    pub connected: bool,
}

impl Region {
    pub fn from_sites(sites: impl IntoIterator<Item = usize>) -> Self {
        Self { kind: RegionKind::Sites, sites: sites.into_iter().collect(), edges: BTreeSet::new(), connected: false }
    }

    /// Edge region; its sites are the edge endpoints.
    pub fn from_edges(g: &PepsGraph, edges: impl IntoIterator<Item = usize>) -> Self {
        let edges: BTreeSet<usize> = edges.into_iter().collect();
        let sites = g.edge_sites(&edges);
        let connected = is_connected(g, &edges);
        Self { kind: RegionKind::Edges, sites, edges, connected }
    }

    pub fn size(&self) -> usize {
        self.sites.len()
    }
}

/// Whether the edges form a connected subgraph (edges sharing a site are adjacent).
pub fn is_connected(g: &PepsGraph, edges: &BTreeSet<usize>) -> bool {
    let Some(&first) = edges.iter().next() else { return true };
    let mut seen = BTreeSet::from([first]);
    let mut queue = VecDeque::from([first]);
    while let Some(e) = queue.pop_front() {
        let (a, b) = (g.edges[e].a, g.edges[e].b);
        for &f in edges {
            let (c, d) = (g.edges[f].a, g.edges[f].b);
            if !seen.contains(&f) && (a == c || a == d || b == c || b == d) {
                seen.insert(f);
                queue.push_back(f);
            }
        }
    }
    seen.len() == edges.len()
}

/// Every connected edge region with at most `max_edges` edges, sorted and deduplicated.
pub fn enumerate_connected_regions(g: &PepsGraph, max_edges: usize) -> Vec<Region> {
    let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
    if max_edges == 0 {
        return Vec::new();
    }
    let mut frontier: BTreeSet<Vec<usize>> = (0..g.edges.len()).map(|e| vec![e]).collect();
    for _ in 1..=max_edges {
        let mut next = BTreeSet::new();
        for set in &frontier {
            found.insert(set.clone());
            let sites: BTreeSet<usize> = set.iter().flat_map(|&e| [g.edges[e].a, g.edges[e].b]).collect();
            for (f, e) in g.edges.iter().enumerate() {
                if !set.contains(&f) && (sites.contains(&e.a) || sites.contains(&e.b)) {
                    let mut grown = set.clone();
                    grown.push(f);
                    grown.sort();
                    if !found.contains(&grown) {
                        next.insert(grown);
                    }
                }
            }
        }
        frontier = next;
    }
    found.into_iter().map(|s| Region::from_edges(g, s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_counts() {
        for (r, c) in [(1, 1), (2, 2), (1, 3)] {
            let h = build_honeycomb(&HoneycombSpec::torus(r, c)).unwrap();
            assert_eq!(h.graph.n_sites(), 2 * r * c);
            assert_eq!(h.honey_edges.len(), 3 * r * c);
            assert_eq!(h.graph.edges.len(), 6 * r * c);
            assert_eq!(h.plaquettes.len(), r * c);
            assert!(h.graph.degree.iter().all(|&d| d == 6));
            for p in &h.plaquettes {
                assert_eq!(p.interior.len(), 6);
            }
        }
    }

    #[test]
    fn minimal_torus_joins() {
        let h = build_honeycomb(&HoneycombSpec::torus(1, 1)).unwrap();
        let mut joins: Vec<(usize, usize)> = h.graph.edges.iter().map(|e| (e.slot_a, e.slot_b)).collect();
        joins.sort();
        assert_eq!(joins, vec![(0, 1), (1, 0), (2, 3), (3, 2), (4, 5), (5, 4)]);
        assert!(h.plaquettes[0].self_overlap);
    }

    #[test]
    fn each_peps_edge_in_one_plaquette() {
        let h = build_honeycomb(&HoneycombSpec::torus(2, 3)).unwrap();
        let mut count = vec![0; h.graph.edges.len()];
        for p in &h.plaquettes {
            for &e in &p.interior {
                count[e] += 1;
            }
            let distinct: BTreeSet<usize> = p.honey_edges.iter().copied().collect();
            assert_eq!(distinct.len(), 6);
        }
        assert!(count.iter().all(|&c| c == 1));
    }

    #[test]
    fn single_hexagon_patch() {
        let h = build_honeycomb(&HoneycombSpec::open_patch(1, 1)).unwrap();
        assert_eq!(h.graph.n_sites(), 6);
        assert_eq!(h.honey_edges.len(), 6);
        assert_eq!(h.legs, 6);
        assert_eq!(h.plaquettes[0].interior.len(), 6);
        assert!(!h.plaquettes[0].self_overlap);
    }

    #[test]
    fn empty_spec_rejected() {
        assert!(build_honeycomb(&HoneycombSpec::open_patch(0, 0)).is_err());
    }

    #[test]
    fn triangle_regions() {
        let g = PepsGraph::new(vec!["a".into(), "b".into(), "c".into()], &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(enumerate_connected_regions(&g, 0).len(), 0);
        assert_eq!(enumerate_connected_regions(&g, 1).len(), 3);
        assert_eq!(enumerate_connected_regions(&g, 2).len(), 6);
        assert_eq!(enumerate_connected_regions(&g, 3).len(), 7);
    }

    #[test]
    fn regions_match_brute_force() {
        let g = square_grid(2, 3).unwrap();
        for k in 0..=4 {
            let fast = enumerate_connected_regions(&g, k);
            let mut slow = Vec::new();
            for mask in 1u32..(1 << g.edges.len()) {
                let set: BTreeSet<usize> = (0..g.edges.len()).filter(|&e| mask >> e & 1 == 1).collect();
                if set.len() <= k && is_connected(&g, &set) {
                    slow.push(set);
                }
            }
            slow.sort();
            let fast: Vec<BTreeSet<usize>> = fast.into_iter().map(|r| r.edges).collect();
            assert_eq!(fast, slow);
        }
    }

    #[test]
    fn json_roundtrip() {
        let h = build_honeycomb(&HoneycombSpec::torus(1, 1)).unwrap();
        let back = PepsGraph::from_json(&h.graph.to_json()).unwrap();
        assert_eq!(back.edges, h.graph.edges);
        assert_eq!(back.sites, h.graph.sites);
    }

    #[test]
    fn self_loop_rejected() {
        assert!(PepsGraph::new(vec!["a".into()], &[(0, 0)]).is_err());
    }
}
