//! Vertex splitting and corner connecting on oriented classes.

use std::collections::BTreeMap;

use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::canonical::{self, content_hash, OrRef, Orientation, OrientedClass, Parity};
use crate::error::RibbonError;
use crate::ribbon::{Corner, Half, RibbonGraph};

/// Which vertex splittings the differential sums over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SplitConvention {
    /// Also split off an empty arc, creating a univalent vertex.
    pub allow_univalent: bool,
}

/// Finite rational combination of nonzero canonical classes, keyed by the
/// canonical graph; each coefficient multiplies the reference orientation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalSum {
    parity: Parity,
    terms: BTreeMap<RibbonGraph, Rational64>,
}

impl FormalSum {
    pub fn zero(parity: Parity) -> Self {
        FormalSum {
            parity,
            terms: BTreeMap::new(),
        }
    }

    pub fn single(class: &OrientedClass) -> Self {
        let mut s = FormalSum::zero(class.parity());
        s.insert(class, Rational64::one());
        s
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// Adds `coeff * class`; zero classes are dropped.
    pub fn insert(&mut self, class: &OrientedClass, coeff: Rational64) {
        if class.zero_flag {
            return;
        }
        self.add_canonical(class.canonical_graph.clone(), coeff);
    }

    /// `graph` must be canonical and not a zero class.
    pub(crate) fn add_canonical(&mut self, graph: RibbonGraph, coeff: Rational64) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(graph);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Adds `coeff * (g, or)` for an arbitrary connected graph.
    pub fn add_graph(&mut self, g: &RibbonGraph, or: &Orientation, coeff: Rational64) -> Result<(), RibbonError> {
        let (class, sign) = canonical::to_oriented_class(g, or)?;
        self.insert(&class, coeff * Rational64::from(sign as i64));
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, g: &RibbonGraph) -> Rational64 {
        self.terms.get(g).copied().unwrap_or_else(Rational64::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&RibbonGraph, &Rational64)> {
        self.terms.iter()
    }

    pub fn add_assign(&mut self, other: &FormalSum) {
        for (g, c) in &other.terms {
            self.add_canonical(g.clone(), *c);
        }
    }

    pub fn scaled(&self, k: Rational64) -> FormalSum {
        let mut s = FormalSum::zero(self.parity);
        if !k.is_zero() {
            for (g, c) in &self.terms {
                s.terms.insert(g.clone(), *c * k);
            }
        }
        s
    }

    pub fn retain(&mut self, f: impl Fn(&RibbonGraph) -> bool) {
        self.terms.retain(|g, _| f(g));
    }

    /// Applies a linear operator defined on classes.
    pub fn map_linear(&self, op: impl Fn(&RibbonGraph) -> FormalSum) -> FormalSum {
        let mut out = FormalSum::zero(self.parity);
        for (g, c) in &self.terms {
            out.add_assign(&op(g).scaled(*c));
        }
        out
    }

    pub fn trace(&self, input: &str) -> OperatorTrace {
        OperatorTrace {
            input: input.to_string(),
            terms: self
                .terms
                .iter()
                .map(|(g, c)| (content_hash("ribbon", g, self.parity), c.to_string()))
                .collect(),
        }
    }
}

/// Debug record of one operator application.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorTrace {
    pub input: String,
    pub terms: Vec<(String, String)>,
}

/// A raw output term: graph, orientation in its own labels, sign.
pub type RawTerm = (RibbonGraph, Orientation, i8);

fn with_new_edge(g: &RibbonGraph) -> (Vec<Half>, Vec<Half>, Half, Half) {
    let n = g.num_half_edges();
    let x = n as Half;
    let y = (n + 1) as Half;
    let mut s0 = g.sigma0().to_vec();
    let mut s1 = g.sigma1().to_vec();
    s0.extend([x, y]);
    s1.extend([y, x]);
    (s0, s1, x, y)
}

/// Inserts a new edge from corner `c1` to corner `c2` of the same boundary.
/// The new half-edges are `2E` (after `c1`) and `2E+1` (after `c2`).
pub fn attach_edge(g: &RibbonGraph, c1: Corner, c2: Corner) -> Result<RibbonGraph, RibbonError> {
    let n = g.num_half_edges();
    let (a, b) = (c1.0 as usize, c2.0 as usize);
    if a == b || a >= n || b >= n {
        return Err(RibbonError::BadCorners(a, b));
    }
    let (bid, _) = g.boundary_ids();
    if bid[a] != bid[b] {
        return Err(RibbonError::BadCorners(a, b));
    }
    Ok(attach_unchecked(g, c1.0, c2.0))
}

fn attach_unchecked(g: &RibbonGraph, h1: Half, h2: Half) -> RibbonGraph {
    let (mut s0, s1, x, y) = with_new_edge(g);
    s0[x as usize] = s0[h1 as usize];
    s0[h1 as usize] = x;
    s0[y as usize] = s0[h2 as usize];
    s0[h2 as usize] = y;
    RibbonGraph::from_raw(s0, s1)
}

/// Raw terms of the corner-connecting operator applied to `(g, reference)`.
pub fn bridgeland_terms(g: &RibbonGraph, parity: Parity) -> Vec<RawTerm> {
    let mut out = Vec::new();
    visit_bridgeland(g, parity, |s0, s1, or, sign| out.push(raw_term(s0, s1, or, sign)));
    out
}

fn raw_term(s0: &[Half], s1: &[Half], or: OrRef, sign: i8) -> RawTerm {
    let or = match or {
        OrRef::Even(e) => Orientation::Even { edge_order: e.to_vec() },
        OrRef::Odd(v, b, e) => Orientation::Odd {
            vertex_order: v.to_vec(),
            boundary_order: b.to_vec(),
            edge_directions: e.to_vec(),
        },
    };
    (RibbonGraph::from_raw(s0.to_vec(), s1.to_vec()), or, sign)
}

/// Scratch copy of a graph plus its reference orientations in both parities,
/// extended by one new edge `x = 2E`, `y = 2E + 1`.
struct TermBuf {
    s0: Vec<Half>,
    s1: Vec<Half>,
    base_s0: Vec<Half>,
    edges: Vec<Half>,
    verts: Vec<Half>,
    bounds: Vec<Half>,
    dirs: Vec<(Half, Half)>,
    x: Half,
    y: Half,
}

impl TermBuf {
    fn new(g: &RibbonGraph) -> TermBuf {
        let (s0, s1, x, y) = with_new_edge(g);
        let base_s0 = s0.clone();
        let mut t = TermBuf {
            s0,
            s1,
            base_s0,
            edges: Vec::new(),
            verts: Vec::new(),
            bounds: Vec::new(),
            dirs: Vec::new(),
            x,
            y,
        };
        if let Orientation::Even { edge_order } = Orientation::reference(g, Parity::Even) {
            t.edges = edge_order;
            t.edges.push(x);
        }
        if let Orientation::Odd {
            vertex_order,
            boundary_order,
            edge_directions,
        } = Orientation::reference(g, Parity::Odd)
        {
            t.verts = vertex_order;
            t.bounds = boundary_order;
            t.dirs = edge_directions;
            t.dirs.push((x, y));
        }
        t
    }

    fn reset(&mut self) {
        self.s0.copy_from_slice(&self.base_s0);
    }

    /// Even and odd orientations, in that order.
    fn or_refs(&self) -> [OrRef<'_>; 2] {
        [OrRef::Even(&self.edges), OrRef::Odd(&self.verts, &self.bounds, &self.dirs)]
    }
}

/// Calls `f` on every raw corner-connecting term of `(g, reference)`.
pub(crate) fn visit_bridgeland(g: &RibbonGraph, parity: Parity, mut f: impl FnMut(&[Half], &[Half], OrRef, i8)) {
    let p = parity as usize;
    visit_bridgeland_both(g, |s0, s1, ors, signs| f(s0, s1, ors[p], signs[p]));
}

/// [`visit_bridgeland`] for both parities at once; orientations and signs
/// are indexed by `Parity as usize`.
pub(crate) fn visit_bridgeland_both(g: &RibbonGraph, mut f: impl FnMut(&[Half], &[Half], [OrRef; 2], [i8; 2])) {
    let mut t = TermBuf::new(g);
    for b in g.boundaries() {
        let slot = t.bounds.iter().position(|&h| h == b[0]);
        if let Some(slot) = slot {
            t.bounds[slot] = t.x;
            t.bounds.push(t.y);
        }
        for p in 0..b.len() {
            for q in p + 1..b.len() {
                t.reset();
                let (h1, h2) = (b[p] as usize, b[q] as usize);
                let (x, y) = (t.x as usize, t.y as usize);
                t.s0[x] = t.s0[h1];
                t.s0[h1] = t.x;
                t.s0[y] = t.s0[h2];
                t.s0[h2] = t.y;
                f(&t.s0, &t.s1, t.or_refs(), [1, 1]);
            }
        }
        if let Some(slot) = slot {
            t.bounds.pop();
            t.bounds[slot] = b[0];
        }
    }
}

/// Splits the vertex with cyclic order `cyc` at corners `i <= j`.
///
/// The arc `cyc[i+1] ..= cyc[j]` keeps the new half-edge `2E` and the arc
/// `cyc[j+1] ..= cyc[i]` moves to a new vertex with `2E+1`. When `i == j` the
/// new vertex is univalent.
pub(crate) fn split_vertex(g: &RibbonGraph, cyc: &[Half], i: usize, j: usize) -> RibbonGraph {
    let k = cyc.len();
    let (mut s0, s1, x, y) = with_new_edge(g);
    let after_i = cyc[(i + 1) % k];
    let after_j = cyc[(j + 1) % k];
    if i == j {
        s0[cyc[i] as usize] = x;
        s0[x as usize] = after_i;
        s0[y as usize] = y;
    } else {
        s0[cyc[j] as usize] = x;
        s0[x as usize] = after_i;
        s0[cyc[i] as usize] = y;
        s0[y as usize] = after_j;
    }
    RibbonGraph::from_raw(s0, s1)
}

/// Raw terms of vertex splitting applied to `(g, reference)`.
pub fn delta_terms(g: &RibbonGraph, parity: Parity, conv: SplitConvention) -> Vec<RawTerm> {
    let mut out = Vec::new();
    visit_delta(g, parity, conv, |s0, s1, or, sign| out.push(raw_term(s0, s1, or, sign)));
    out
}

/// Calls `f` on every raw vertex-splitting term of `(g, reference)`.
pub(crate) fn visit_delta(g: &RibbonGraph, parity: Parity, conv: SplitConvention, mut f: impl FnMut(&[Half], &[Half], OrRef, i8)) {
    let p = parity as usize;
    visit_delta_both(g, conv, |s0, s1, ors, signs| f(s0, s1, ors[p], signs[p]));
}

/// [`visit_delta`] for both parities at once.
pub(crate) fn visit_delta_both(g: &RibbonGraph, conv: SplitConvention, mut f: impl FnMut(&[Half], &[Half], [OrRef; 2], [i8; 2])) {
    let mut t = TermBuf::new(g);
    // in odd parity the new vertex passes every boundary in the combined wedge
    let sign: [i8; 2] = [1, if g.num_boundaries().is_multiple_of(2) { 1 } else { -1 }];
    for cyc in g.vertices() {
        let k = cyc.len();
        let slot = t.verts.iter().position(|&h| h == cyc[0]);
        if let Some(slot) = slot {
            t.verts[slot] = t.x;
            t.verts.push(t.y);
        }
        for i in 0..k {
            let lo = if conv.allow_univalent { i } else { i + 1 };
            for j in lo..k {
                t.reset();
                let (x, y) = (t.x, t.y);
                let after_i = cyc[(i + 1) % k];
                let after_j = cyc[(j + 1) % k];
                if i == j {
                    t.s0[cyc[i] as usize] = x;
                    t.s0[x as usize] = after_i;
                    t.s0[y as usize] = y;
                } else {
                    t.s0[cyc[j] as usize] = x;
                    t.s0[x as usize] = after_i;
                    t.s0[cyc[i] as usize] = y;
                    t.s0[y as usize] = after_j;
                }
                f(&t.s0, &t.s1, t.or_refs(), sign);
            }
        }
        if let Some(slot) = slot {
            t.verts.pop();
            t.verts[slot] = cyc[0];
        }
    }
}

fn collect(parity: Parity, terms: Vec<RawTerm>) -> FormalSum {
    let mut s = FormalSum::zero(parity);
    for (t, or, sign) in terms {
        if let Some((c, rel)) = classify(&t, &or) {
            s.add_canonical(c, Rational64::from((sign * rel) as i64));
        }
    }
    s
}

/// Canonical graph and sign of `(g, or)`, or `None` for a zero class.
pub(crate) fn classify(g: &RibbonGraph, or: &Orientation) -> Option<(RibbonGraph, i8)> {
    canonical::classify_oriented(g, or).map(|(code, sign)| (RibbonGraph::from_sigma0_standard(code), sign))
}

/// Vertex splitting of a canonical class graph.
pub fn delta_graph(g: &RibbonGraph, parity: Parity, conv: SplitConvention) -> FormalSum {
    collect(parity, delta_terms(g, parity, conv))
}

pub fn bridgeland_graph(g: &RibbonGraph, parity: Parity) -> FormalSum {
    collect(parity, bridgeland_terms(g, parity))
}

pub fn delta(x: &OrientedClass, conv: SplitConvention) -> FormalSum {
    if x.zero_flag {
        return FormalSum::zero(x.parity());
    }
    delta_graph(&x.canonical_graph, x.parity(), conv)
}

pub fn bridgeland(x: &OrientedClass) -> FormalSum {
    if x.zero_flag {
        return FormalSum::zero(x.parity());
    }
    bridgeland_graph(&x.canonical_graph, x.parity())
}

pub fn delta_sum(s: &FormalSum, conv: SplitConvention) -> FormalSum {
    let p = s.parity();
    s.map_linear(|g| delta_graph(g, p, conv))
}

pub fn bridgeland_sum(s: &FormalSum) -> FormalSum {
    let p = s.parity();
    s.map_linear(|g| bridgeland_graph(g, p))
}

/// Drops every term with a vertex of valence at most two.
pub fn project_ge3(s: &FormalSum) -> FormalSum {
    let mut out = s.clone();
    out.retain(|g| g.min_valence() >= 3);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::{canonicalize, is_isomorphic};
    use crate::ribbon::named::*;

    fn class(g: &RibbonGraph, p: Parity) -> OrientedClass {
        canonical::to_oriented_class(g, &Orientation::reference(g, p)).unwrap().0
    }

    #[test]
    fn attach_edge_examples() {
        let b = banana();
        let t = attach_edge(&b, Corner(0), Corner(3)).unwrap();
        assert_eq!(t.num_edges(), 3);
        assert_eq!(t.num_boundaries(), 3);
        assert_eq!(t.genus(), Ok(0));
        assert!(is_isomorphic(&t, &theta_planar()).unwrap());

        let th = theta_genus1();
        let corners = &th.corners()[0];
        for p in 0..6 {
            for q in p + 1..6 {
                let t = attach_edge(&th, corners[p], corners[q]).unwrap();
                assert_eq!((t.num_edges(), t.num_boundaries(), t.genus()), (4, 2, Ok(1)));
            }
        }
        let l = loop_graph();
        assert!(attach_edge(&l, Corner(0), Corner(1)).is_err());
        assert!(attach_edge(&l, Corner(0), Corner(0)).is_err());
    }

    #[test]
    fn bridgeland_examples() {
        assert!(bridgeland(&class(&loop_graph(), Parity::Even)).is_zero());
        let raw = bridgeland_terms(&banana(), Parity::Even);
        assert_eq!(raw.len(), 2);
        let theta0 = canonicalize(&theta_planar()).unwrap().graph;
        for (t, _, _) in &raw {
            assert_eq!(canonicalize(t).unwrap().graph, theta0);
        }
        assert_eq!(bridgeland_terms(&theta_genus1(), Parity::Even).len(), 15);
    }

    #[test]
    fn delta_of_loop_vanishes_in_even_parity() {
        let raw = delta_terms(&loop_graph(), Parity::Even, SplitConvention::default());
        assert_eq!(raw.len(), 1);
        assert!(is_isomorphic(&raw[0].0, &banana()).unwrap());
        assert!(delta(&class(&loop_graph(), Parity::Even), SplitConvention::default()).is_zero());
    }

    #[test]
    fn delta_of_double_loop_is_trivalent() {
        let d = double_loop();
        let raw = delta_terms(&d, Parity::Even, SplitConvention::default());
        assert_eq!(raw.len(), 6);
        for p in [Parity::Even, Parity::Odd] {
            let s = delta_graph(&canonicalize(&d).unwrap().graph, p, SplitConvention::default());
            assert_eq!(project_ge3(&s), s);
        }
    }

    #[test]
    fn projection_drops_low_valence() {
        let mut s = FormalSum::zero(Parity::Odd);
        let l = class(&loop_graph(), Parity::Odd);
        assert!(!l.zero_flag);
        s.insert(&l, Rational64::from(3));
        assert!(project_ge3(&s).is_zero());
        assert!(project_ge3(&FormalSum::zero(Parity::Even)).is_zero());
    }

    #[test]
    fn univalent_convention_adds_terms() {
        let conv = SplitConvention { allow_univalent: true };
        let raw = delta_terms(&loop_graph(), Parity::Even, conv);
        assert_eq!(raw.len(), 3);
        for (t, _, _) in &raw {
            assert_eq!(t.num_vertices(), 2);
            assert_eq!(t.genus(), Ok(0));
        }
    }
}
