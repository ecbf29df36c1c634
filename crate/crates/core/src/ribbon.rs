//! Half-edge representation of ribbon graphs.
//!
//! A graph on `2E` half-edges is a pair of permutations: `sigma0` rotates the
//! half-edges around their vertex, `sigma1` swaps the two halves of each edge.
//! Boundaries are the orbits of `sigma2 = sigma0^-1 . sigma1` (apply `sigma1`
//! first).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::RibbonError;

pub const MAX_HALF_EDGES: usize = 254;

/// A half-edge label.
pub type Half = u8;

/// The sector between half-edge `h` and `sigma0(h)` at the vertex of `h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Corner(pub Half);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RibbonGraph {
    sigma0: Vec<Half>,
    sigma1: Vec<Half>,
}

fn check_permutation(which: &'static str, p: &[usize]) -> Result<(), RibbonError> {
    let mut seen = vec![false; p.len()];
    for (i, &x) in p.iter().enumerate() {
        if x >= p.len() {
            return Err(RibbonError::NotPermutation {
                which,
                len: p.len(),
                detail: format!("image {x} of {i} out of range"),
            });
        }
        if seen[x] {
            return Err(RibbonError::NotPermutation {
                which,
                len: p.len(),
                detail: format!("{x} is hit twice"),
            });
        }
        seen[x] = true;
    }
    Ok(())
}

/// Checks the raw permutation data. Connectivity is not required.
pub fn validate(sigma0: &[usize], sigma1: &[usize]) -> Result<(), RibbonError> {
    if sigma0.len() != sigma1.len() {
        return Err(RibbonError::LengthMismatch {
            sigma0: sigma0.len(),
            sigma1: sigma1.len(),
        });
    }
    let n = sigma0.len();
    if n == 0 {
        return Err(RibbonError::Empty);
    }
    if n > MAX_HALF_EDGES {
        return Err(RibbonError::TooLarge(n));
    }
    check_permutation("sigma0", sigma0)?;
    check_permutation("sigma1", sigma1)?;
    if n % 2 == 1 {
        return Err(RibbonError::OddHalfEdges(n));
    }
    for (h, &x) in sigma1.iter().enumerate() {
        if x == h {
            return Err(RibbonError::FixedPoint(h));
        }
        if sigma1[x] != h {
            return Err(RibbonError::NotInvolution(h));
        }
    }
    Ok(())
}

fn orbits(perm: &[Half]) -> Vec<Vec<Half>> {
    let mut seen = vec![false; perm.len()];
    let mut out = Vec::new();
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut cyc = Vec::new();
        let mut h = start;
        while !seen[h] {
            seen[h] = true;
            cyc.push(h as Half);
            h = perm[h] as usize;
        }
        out.push(cyc);
    }
    out
}

/// Labels every element by the index of its orbit; orbits are numbered by
/// their minimal element.
pub(crate) fn orbit_ids(perm: &[Half]) -> (Vec<usize>, usize) {
    let mut id = vec![usize::MAX; perm.len()];
    let mut count = 0;
    for start in 0..perm.len() {
        if id[start] != usize::MAX {
            continue;
        }
        let mut h = start;
        while id[h] == usize::MAX {
            id[h] = count;
            h = perm[h] as usize;
        }
        count += 1;
    }
    (id, count)
}

impl RibbonGraph {
    pub fn new(sigma0: Vec<usize>, sigma1: Vec<usize>) -> Result<Self, RibbonError> {
        validate(&sigma0, &sigma1)?;
        Ok(RibbonGraph {
            sigma0: sigma0.into_iter().map(|x| x as Half).collect(),
            sigma1: sigma1.into_iter().map(|x| x as Half).collect(),
        })
    }

    /// Builds a graph from vertex cycles and edge pairs over `0..2E`.
    pub fn from_cycles(vertices: &[&[usize]], edges: &[(usize, usize)]) -> Result<Self, RibbonError> {
        let n = 2 * edges.len();
        let mut s0 = vec![usize::MAX; n];
        let mut s1 = vec![usize::MAX; n];
        let bad = |detail: String| RibbonError::NotPermutation {
            which: "cycles",
            len: n,
            detail,
        };
        for cyc in vertices {
            for (i, &h) in cyc.iter().enumerate() {
                if h >= n || s0[h] != usize::MAX {
                    return Err(bad(format!("half-edge {h} misplaced in vertex cycles")));
                }
                s0[h] = cyc[(i + 1) % cyc.len()];
            }
        }
        for &(a, b) in edges {
            if a >= n || b >= n || s1[a] != usize::MAX || s1[b] != usize::MAX {
                return Err(bad(format!("edge ({a} {b}) misplaced")));
            }
            s1[a] = b;
            s1[b] = a;
        }
        if s0.contains(&usize::MAX) {
            return Err(bad("vertex cycles do not cover all half-edges".into()));
        }
        Self::new(s0, s1)
    }

    /// Trusted constructor for permutations produced inside the crate.
    pub(crate) fn from_raw(sigma0: Vec<Half>, sigma1: Vec<Half>) -> Self {
        debug_assert!(validate(
            &sigma0.iter().map(|&x| x as usize).collect::<Vec<_>>(),
            &sigma1.iter().map(|&x| x as usize).collect::<Vec<_>>()
        )
        .is_ok());
        RibbonGraph { sigma0, sigma1 }
    }

    /// Graph whose edges are `{2k, 2k+1}`.
    pub(crate) fn from_sigma0_standard(sigma0: Vec<Half>) -> Self {
        let sigma1 = (0..sigma0.len()).map(|h| (h ^ 1) as Half).collect();
        RibbonGraph { sigma0, sigma1 }
    }

    pub fn sigma0(&self) -> &[Half] {
        &self.sigma0
    }

    pub fn sigma1(&self) -> &[Half] {
        &self.sigma1
    }

    pub fn sigma2(&self) -> Vec<Half> {
        let inv = self.sigma0_inverse();
        self.sigma1.iter().map(|&x| inv[x as usize]).collect()
    }

    pub fn sigma0_inverse(&self) -> Vec<Half> {
        let mut inv = vec![0; self.sigma0.len()];
        for (h, &x) in self.sigma0.iter().enumerate() {
            inv[x as usize] = h as Half;
        }
        inv
    }

    pub fn num_half_edges(&self) -> usize {
        self.sigma0.len()
    }

    pub fn num_edges(&self) -> usize {
        self.sigma0.len() / 2
    }

    pub fn num_vertices(&self) -> usize {
        orbit_ids(&self.sigma0).1
    }

    pub fn num_boundaries(&self) -> usize {
        orbit_ids(&self.sigma2()).1
    }

    /// Vertex cycles, each starting at its smallest half-edge, sorted.
    pub fn vertices(&self) -> Vec<Vec<Half>> {
        orbits(&self.sigma0)
    }

    /// Edges as `(a, b)` with `a < b`, sorted by `a`.
    pub fn edges(&self) -> Vec<(Half, Half)> {
        (0..self.sigma1.len())
            .filter(|&h| (h as Half) < self.sigma1[h])
            .map(|h| (h as Half, self.sigma1[h]))
            .collect()
    }

    /// Boundary cycles (orbits of sigma2), each starting at its smallest
    /// half-edge, sorted by that element.
    pub fn boundaries(&self) -> Vec<Vec<Half>> {
        orbits(&self.sigma2())
    }

    /// Vertex index of every half-edge (vertices numbered by smallest label).
    pub fn vertex_ids(&self) -> (Vec<usize>, usize) {
        orbit_ids(&self.sigma0)
    }

    /// Boundary index of every half-edge (boundaries numbered by smallest label).
    pub fn boundary_ids(&self) -> (Vec<usize>, usize) {
        orbit_ids(&self.sigma2())
    }

    pub fn valences(&self) -> Vec<usize> {
        self.vertices().iter().map(Vec::len).collect()
    }

    pub fn min_valence(&self) -> usize {
        self.valences().into_iter().min().unwrap_or(0)
    }

    pub fn max_valence(&self) -> usize {
        self.valences().into_iter().max().unwrap_or(0)
    }

    /// `|E| - |V| - |B|`; even and at least -2 for a connected graph.
    pub fn euler_defect(&self) -> i64 {
        self.num_edges() as i64 - self.num_vertices() as i64 - self.num_boundaries() as i64
    }

    pub fn genus(&self) -> Result<usize, RibbonError> {
        let e = self.num_edges();
        let v = self.num_vertices();
        let b = self.num_boundaries();
        let twice = 2 + e as i64 - v as i64 - b as i64;
        if twice < 0 || twice % 2 != 0 || !self.is_connected() {
            return Err(RibbonError::Inconsistent {
                edges: e,
                vertices: v,
                boundaries: b,
            });
        }
        Ok((twice / 2) as usize)
    }

    /// Corners grouped by boundary, in boundary order. The corners of a
    /// boundary follow its cyclic order.
    pub fn corners(&self) -> Vec<Vec<Corner>> {
        self.boundaries().into_iter().map(|b| b.into_iter().map(Corner).collect()).collect()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.sigma0.len();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(h) = stack.pop() {
            for next in [self.sigma0[h] as usize, self.sigma1[h] as usize] {
                if !seen[next] {
                    seen[next] = true;
                    count += 1;
                    stack.push(next);
                }
            }
        }
        count == n
    }

    /// Applies a relabelling `h -> map[h]`.
    pub fn relabel(&self, map: &[Half]) -> RibbonGraph {
        let n = self.sigma0.len();
        let mut s0 = vec![0; n];
        let mut s1 = vec![0; n];
        for h in 0..n {
            s0[map[h] as usize] = map[self.sigma0[h] as usize];
            s1[map[h] as usize] = map[self.sigma1[h] as usize];
        }
        RibbonGraph { sigma0: s0, sigma1: s1 }
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            h: self.sigma0.len(),
            sigma0: self.sigma0.iter().map(|&x| x as usize).collect(),
            sigma1: self.sigma1.iter().map(|&x| x as usize).collect(),
        }
    }

    /// Graphviz rendering: one node per vertex, one link per edge, each link
    /// labelled with the boundaries on its two sides.
    pub fn to_dot(&self) -> String {
        let (vid, nv) = self.vertex_ids();
        let (bid, nb) = self.boundary_ids();
        let mut out = String::new();
        let _ = writeln!(out, "graph ribbon {{");
        let _ = writeln!(out, "  label=\"B={nb}\";");
        for v in 0..nv {
            let _ = writeln!(out, "  v{v};");
        }
        for (a, b) in self.edges() {
            let _ = writeln!(
                out,
                "  v{} -- v{} [label=\"{}:{}\", taillabel=\"b{}\", headlabel=\"b{}\"];",
                vid[a as usize], vid[b as usize], a, b, bid[a as usize], bid[b as usize]
            );
        }
        out.push_str("}\n");
        out
    }
}

/// Wire form `{"h": 2E, "sigma0": [...], "sigma1": [...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub h: usize,
    pub sigma0: Vec<usize>,
    pub sigma1: Vec<usize>,
}

impl TryFrom<GraphJson> for RibbonGraph {
    type Error = RibbonError;

    fn try_from(j: GraphJson) -> Result<Self, RibbonError> {
        if j.sigma0.len() != j.h {
            return Err(RibbonError::LengthMismatch {
                sigma0: j.sigma0.len(),
                sigma1: j.h,
            });
        }
        RibbonGraph::new(j.sigma0, j.sigma1)
    }
}

impl Serialize for RibbonGraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for RibbonGraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = GraphJson::deserialize(d)?;
        RibbonGraph::try_from(j).map_err(serde::de::Error::custom)
    }
}

/// Small named graphs used across tests and examples.
pub mod named {
    use super::RibbonGraph;

    pub fn loop_graph() -> RibbonGraph {
        RibbonGraph::new(vec![1, 0], vec![1, 0]).unwrap()
    }

    pub fn banana() -> RibbonGraph {
        RibbonGraph::from_cycles(&[&[0, 1], &[2, 3]], &[(0, 2), (1, 3)]).unwrap()
    }

    pub fn double_loop() -> RibbonGraph {
        RibbonGraph::from_cycles(&[&[0, 1, 2, 3]], &[(0, 2), (1, 3)]).unwrap()
    }

    pub fn theta_genus1() -> RibbonGraph {
        RibbonGraph::from_cycles(&[&[0, 1, 2], &[3, 4, 5]], &[(0, 3), (1, 4), (2, 5)]).unwrap()
    }

    pub fn theta_planar() -> RibbonGraph {
        RibbonGraph::from_cycles(&[&[0, 1, 2], &[3, 5, 4]], &[(0, 3), (1, 4), (2, 5)]).unwrap()
    }

    pub fn dumbbell() -> RibbonGraph {
        RibbonGraph::from_cycles(&[&[0, 1, 4], &[2, 3, 5]], &[(0, 1), (2, 3), (4, 5)]).unwrap()
    }

    pub fn segment() -> RibbonGraph {
        RibbonGraph::from_cycles(&[&[0], &[1]], &[(0, 1)]).unwrap()
    }

    /// The cycle with `k` bivalent vertices.
    pub fn polygon(k: usize) -> RibbonGraph {
        // vertex i holds half-edges 2i+1 (edge i) and 2((i+1) % k) (edge i+1)
        let mut s0 = vec![0; 2 * k];
        for i in 0..k {
            let a = 2 * i + 1;
            let b = 2 * ((i + 1) % k);
            s0[a] = b;
            s0[b] = a;
        }
        let s1 = (0..2 * k).map(|h| h ^ 1).collect();
        RibbonGraph::new(s0, s1).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::named::*;
    use super::*;

    #[test]
    fn validate_errors_are_distinct() {
        assert!(validate(&[1, 0], &[1, 0]).is_ok());
        assert_eq!(validate(&[0, 1], &[0, 1]), Err(RibbonError::FixedPoint(0)));
        assert_eq!(validate(&[1, 2, 0], &[1, 0, 2]), Err(RibbonError::OddHalfEdges(3)));
        assert!(matches!(
            validate(&[0, 0], &[1, 0]),
            Err(RibbonError::NotPermutation { which: "sigma0", .. })
        ));
        assert!(matches!(validate(&[], &[]), Err(RibbonError::Empty)));
        assert_eq!(validate(&[0, 1, 2, 3], &[1, 2, 3, 0]), Err(RibbonError::NotInvolution(0)));
    }

    #[test]
    fn boundary_examples() {
        assert_eq!(loop_graph().boundaries(), vec![vec![0], vec![1]]);
        assert_eq!(banana().boundaries(), vec![vec![0, 3], vec![1, 2]]);
        let t = theta_genus1().boundaries();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].len(), 6);
        assert_eq!(theta_planar().num_boundaries(), 3);
        let lens: Vec<usize> = dumbbell().corners().iter().map(Vec::len).collect();
        assert_eq!(lens, vec![1, 4, 1]);
        assert_eq!(dumbbell().boundaries()[1], vec![1, 4, 3, 5]);
    }

    #[test]
    fn genus_examples() {
        assert_eq!(loop_graph().genus(), Ok(0));
        assert_eq!(theta_genus1().genus(), Ok(1));
        assert_eq!(double_loop().genus(), Ok(1));
        assert_eq!(theta_planar().genus(), Ok(0));
        assert_eq!(segment().genus(), Ok(0));
        let two_loops = RibbonGraph::new(vec![1, 0, 3, 2], vec![1, 0, 3, 2]).unwrap();
        assert!(!two_loops.is_connected());
        assert!(two_loops.genus().is_err());
        assert!(dumbbell().is_connected());
    }

    #[test]
    fn polygon_is_planar_cylinder() {
        for k in 1..7 {
            let p = polygon(k);
            assert_eq!(p.num_vertices(), k);
            assert_eq!(p.num_boundaries(), 2);
            assert_eq!(p.genus(), Ok(0));
            assert_eq!(p.valences(), vec![2; k]);
        }
    }

    #[test]
    fn json_round_trip() {
        let g = dumbbell();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"h":6,"sigma0":[1,4,3,5,0,2],"sigma1":[1,0,3,2,5,4]}"#);
        let back: RibbonGraph = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<RibbonGraph>(r#"{"h":2,"sigma0":[0,1],"sigma1":[0,1]}"#).is_err());
    }

    #[test]
    fn dot_lists_vertices_and_edges() {
        let dot = theta_genus1().to_dot();
        assert!(dot.contains("label=\"B=1\""));
        assert_eq!(dot.matches(" -- ").count(), 3);
        let nodes = dot.lines().filter(|l| l.trim().starts_with('v') && !l.contains("--")).count();
        assert_eq!(nodes, 2);
    }
}
