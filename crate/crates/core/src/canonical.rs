//! Canonical labelling, automorphism groups and orientation signs.
//!
//! For a root half-edge `r` the traversal labels `r -> 0`, `sigma1(r) -> 1`
//! and then walks the labelled half-edges in label order, giving the next free
//! pair of labels to `sigma0(h)` and its partner whenever `sigma0(h)` is new.
//! The relabelled `sigma0` is the code of the root; the canonical graph is the
//! smallest code over roots of minimal local invariant. Its edges are always
//! `{2k, 2k+1}`. Every minimal root yields the same canonical graph, so the
//! minimal roots enumerate the automorphism group.

use std::cell::RefCell;
use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::RibbonError;
use crate::perm;
use crate::ribbon::{orbit_ids, Half, RibbonGraph};

const UNSET: Half = Half::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(d: i64) -> Parity {
        if d.rem_euclid(2) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

/// Result of canonicalizing a graph.
#[derive(Debug, Clone)]
pub struct Canonical {
    pub graph: RibbonGraph,
    /// `relabel[h]` is the canonical label of input half-edge `h`.
    pub relabel: Vec<Half>,
    /// Automorphisms of the canonical graph, identity first.
    pub automorphisms: Vec<Vec<Half>>,
}

#[derive(Default)]
struct Scratch {
    label: Vec<Half>,
    order: Vec<Half>,
    code: Vec<Half>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Scratch {
            label: vec![UNSET; n],
            order: vec![0; n],
            code: vec![0; n],
        }
    }

    fn reset(&mut self, n: usize) {
        self.label.resize(n, UNSET);
        self.order.resize(n, 0);
        self.code.resize(n, 0);
    }
}

/// Runs the traversal from `root`, comparing against `best` as it goes.
/// Returns `Greater` as soon as the code is known to exceed `best`.
fn traverse(s0: &[Half], s1: &[Half], root: usize, best: Option<&[Half]>, sc: &mut Scratch) -> Ordering {
    let n = s0.len();
    sc.label.iter_mut().for_each(|l| *l = UNSET);
    sc.label[root] = 0;
    sc.order[0] = root as Half;
    let partner = s1[root] as usize;
    sc.label[partner] = 1;
    sc.order[1] = partner as Half;
    let mut next = 2usize;
    let mut state = if best.is_some() { Ordering::Equal } else { Ordering::Less };
    for i in 0..n {
        let h = sc.order[i] as usize;
        let t = s0[h] as usize;
        if sc.label[t] == UNSET {
            sc.label[t] = next as Half;
            sc.order[next] = t as Half;
            let p = s1[t] as usize;
            sc.label[p] = (next + 1) as Half;
            sc.order[next + 1] = p as Half;
            next += 2;
        }
        let c = sc.label[t];
        sc.code[i] = c;
        if state == Ordering::Equal {
            let b = best.unwrap()[i];
            if c > b {
                return Ordering::Greater;
            }
            if c < b {
                state = Ordering::Less;
            }
        }
    }
    state
}

/// Isomorphism-invariant key of a half-edge used to restrict the roots.
fn root_keys(g: &RibbonGraph) -> Vec<u32> {
    let s1 = g.sigma1();
    let (vid, nv) = orbit_ids(g.sigma0());
    let (bid, nb) = orbit_ids(&g.sigma2());
    let mut vlen = vec![0u32; nv];
    let mut blen = vec![0u32; nb];
    for h in 0..vid.len() {
        vlen[vid[h]] += 1;
        blen[bid[h]] += 1;
    }
    (0..vid.len())
        .map(|h| {
            let p = s1[h] as usize;
            (vlen[vid[h]] << 24) | (blen[bid[h]] << 16) | (vlen[vid[p]] << 8) | blen[bid[p]]
        })
        .collect()
}

pub fn canonicalize(g: &RibbonGraph) -> Result<Canonical, RibbonError> {
    if !g.is_connected() {
        return Err(RibbonError::Disconnected);
    }
    Ok(canonicalize_connected(g))
}

pub(crate) fn canonicalize_connected(g: &RibbonGraph) -> Canonical {
    let n = g.num_half_edges();
    let s0 = g.sigma0();
    let s1 = g.sigma1();
    let keys = root_keys(g);
    let min_key = *keys.iter().min().unwrap();
    let mut sc = Scratch::new(n);
    let mut best: Option<Vec<Half>> = None;
    let mut labels: Vec<Vec<Half>> = Vec::new();
    for root in 0..n {
        if keys[root] != min_key {
            continue;
        }
        match traverse(s0, s1, root, best.as_deref(), &mut sc) {
            Ordering::Greater => {}
            Ordering::Less => {
                best = Some(sc.code.clone());
                labels.clear();
                labels.push(sc.label.clone());
            }
            Ordering::Equal => labels.push(sc.label.clone()),
        }
    }
    let graph = RibbonGraph::from_sigma0_standard(best.unwrap());
    let first_inv = perm::inverse(&labels[0]);
    let automorphisms = labels.iter().map(|l| first_inv.iter().map(|&h| l[h as usize]).collect()).collect();
    Canonical {
        graph,
        relabel: labels.swap_remove(0),
        automorphisms,
    }
}

/// Reusable buffers for [`classify_slices`].
#[derive(Default)]
struct Workspace {
    vid: Vec<Half>,
    bid: Vec<Half>,
    vlen: Vec<u8>,
    blen: Vec<u8>,
    keys: Vec<u32>,
    best: Vec<Half>,
    labels: Vec<Half>,
    vmin: Vec<Half>,
    bmin: Vec<Half>,
    seq: Vec<Half>,
    sc: Scratch,
}

/// Orbit ids and orbit lengths of `next`, which must be a permutation.
fn fill_orbits(next: impl Fn(usize) -> usize, n: usize, id: &mut Vec<Half>, len: &mut Vec<u8>) -> usize {
    id.clear();
    id.resize(n, UNSET);
    len.clear();
    for start in 0..n {
        if id[start] != UNSET {
            continue;
        }
        let c = len.len() as Half;
        let mut h = start;
        let mut l = 0u8;
        loop {
            id[h] = c;
            l += 1;
            h = next(h);
            if h == start {
                break;
            }
        }
        len.push(l);
    }
    len.len()
}

fn inversion_sign(seq: &[Half]) -> i8 {
    let mut inv = 0usize;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            inv += (seq[i] > seq[j]) as usize;
        }
    }
    if inv.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

impl Workspace {
    /// Sign of `or` carried along `label` relative to the reference
    /// orientation of the canonical graph.
    fn sign_under(&mut self, label: &[Half], or: OrRef, nv: usize, nb: usize) -> i8 {
        match or {
            OrRef::Even(edge_order) => {
                self.seq.clear();
                self.seq.extend(edge_order.iter().map(|&h| label[h as usize] / 2));
                inversion_sign(&self.seq)
            }
            OrRef::Odd(vertex_order, boundary_order, edge_directions) => {
                self.vmin.clear();
                self.vmin.resize(nv, UNSET);
                self.bmin.clear();
                self.bmin.resize(nb, UNSET);
                let n = label.len();
                for ((&l, &v), &b) in label.iter().zip(&self.vid[..n]).zip(&self.bid[..n]) {
                    let vm = &mut self.vmin[v as usize];
                    *vm = (*vm).min(l);
                    let bm = &mut self.bmin[b as usize];
                    *bm = (*bm).min(l);
                }
                self.seq.clear();
                self.seq
                    .extend(vertex_order.iter().map(|&h| self.vmin[self.vid[h as usize] as usize]));
                let mut s = inversion_sign(&self.seq);
                self.seq.clear();
                self.seq
                    .extend(boundary_order.iter().map(|&h| self.bmin[self.bid[h as usize] as usize]));
                s *= inversion_sign(&self.seq);
                for &(a, b) in edge_directions {
                    if label[a as usize] > label[b as usize] {
                        s = -s;
                    }
                }
                s
            }
        }
    }
}

thread_local! {
    static WORKSPACE: RefCell<Workspace> = RefCell::new(Workspace::default());
}

/// Canonical `sigma0` of a connected graph together with the sign of `or`
/// relative to the canonical reference orientation, or `None` when the class
/// is zero. `or` must be a well-formed orientation of `g`.
pub(crate) fn classify_oriented(g: &RibbonGraph, or: &Orientation) -> Option<(Vec<Half>, i8)> {
    let mut out = None;
    classify_slices(g.sigma0(), g.sigma1(), or.as_ref(), |code, sign| out = Some((code.to_vec(), sign)));
    out
}

/// Allocation-free form of [`classify_oriented`]: calls `f` with the
/// canonical code and sign unless the class is zero.
pub(crate) fn classify_slices(s0: &[Half], s1: &[Half], or: OrRef, f: impl FnOnce(&[Half], i8)) {
    classify_both(s0, s1, [Some(or), None], |code, signs| {
        if let Some(s) = signs[0] {
            f(code, s)
        }
    })
}

/// Classifies one graph under up to two orientations sharing the canonical
/// labelling. `f` gets the code and, per orientation, its sign or `None`
/// when absent or zero; it is not called when every entry is `None`.
pub(crate) fn classify_both(s0: &[Half], s1: &[Half], ors: [Option<OrRef>; 2], f: impl FnOnce(&[Half], [Option<i8>; 2])) {
    WORKSPACE.with(|w| {
        let w = &mut *w.borrow_mut();
        let n = s0.len();
        if n == 0 {
            return;
        }
        let nv = fill_orbits(|h| s0[h] as usize, n, &mut w.vid, &mut w.vlen);
        // sigma1 sigma0 is the inverse of sigma2, with the same orbits
        let nb = fill_orbits(|h| s1[s0[h] as usize] as usize, n, &mut w.bid, &mut w.blen);
        w.keys.clear();
        {
            let (vid, bid, vlen, blen) = (&w.vid[..n], &w.bid[..n], &w.vlen, &w.blen);
            w.keys.extend((0..n).map(|h| {
                let p = s1[h] as usize;
                ((vlen[vid[h] as usize] as u32) << 24)
                    | ((blen[bid[h] as usize] as u32) << 16)
                    | ((vlen[vid[p] as usize] as u32) << 8)
                    | blen[bid[p] as usize] as u32
            }));
        }
        let min_key = *w.keys.iter().min().unwrap();
        w.sc.reset(n);
        let mut found = false;
        w.labels.clear();
        for root in 0..n {
            if w.keys[root] != min_key {
                continue;
            }
            let best = if found { Some(&w.best[..]) } else { None };
            match traverse(s0, s1, root, best, &mut w.sc) {
                Ordering::Greater => {}
                Ordering::Less => {
                    found = true;
                    w.best.clear();
                    w.best.extend_from_slice(&w.sc.code);
                    w.labels.clear();
                    w.labels.extend_from_slice(&w.sc.label);
                }
                Ordering::Equal => w.labels.extend_from_slice(&w.sc.label),
            }
        }
        let labels = std::mem::take(&mut w.labels);
        let mut out = [None; 2];
        for (slot, or) in out.iter_mut().zip(ors) {
            if let Some(or) = or {
                let sign = w.sign_under(&labels[..n], or, nv, nb);
                if labels.chunks(n).skip(1).all(|l| w.sign_under(l, or, nv, nb) == sign) {
                    *slot = Some(sign);
                }
            }
        }
        w.labels = labels;
        if out.iter().any(Option::is_some) {
            f(&w.best, out);
        }
    })
}

pub fn canonical_form(g: &RibbonGraph) -> Result<(RibbonGraph, Vec<Half>), RibbonError> {
    let c = canonicalize(g)?;
    Ok((c.graph, c.relabel))
}

pub fn is_isomorphic(a: &RibbonGraph, b: &RibbonGraph) -> Result<bool, RibbonError> {
    if a.num_half_edges() != b.num_half_edges() {
        return Ok(false);
    }
    Ok(canonical_form(a)?.0 == canonical_form(b)?.0)
}

pub fn is_automorphism(g: &RibbonGraph, a: &[Half]) -> bool {
    let n = g.num_half_edges();
    if a.len() != n || !perm::is_permutation(a) {
        return false;
    }
    (0..n).all(|h| a[g.sigma0()[h] as usize] == g.sigma0()[a[h] as usize] && a[g.sigma1()[h] as usize] == g.sigma1()[a[h] as usize])
}

/// Automorphisms of `g` in its own labelling, identity first.
pub fn automorphisms(g: &RibbonGraph) -> Result<Vec<Vec<Half>>, RibbonError> {
    let c = canonicalize(g)?;
    let inv = perm::inverse(&c.relabel);
    Ok(c.automorphisms
        .iter()
        .map(|a| c.relabel.iter().map(|&x| inv[a[x as usize] as usize]).collect())
        .collect())
}

/// Ordering data fixing a generator of the orientation line of a graph.
///
/// Every vertex, boundary and edge is named by one of its half-edges, so an
/// orientation can be carried along any relabelling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "parity", rename_all = "lowercase")]
pub enum Orientation {
    Even {
        edge_order: Vec<Half>,
    },
    Odd {
        vertex_order: Vec<Half>,
        boundary_order: Vec<Half>,
        /// `(source, target)` per edge.
        edge_directions: Vec<(Half, Half)>,
    },
}

/// Borrowed view of an [`Orientation`].
#[derive(Clone, Copy)]
pub(crate) enum OrRef<'a> {
    Even(&'a [Half]),
    Odd(&'a [Half], &'a [Half], &'a [(Half, Half)]),
}

fn first_of_orbits(ids: &[usize], count: usize) -> Vec<Half> {
    let mut rep = vec![UNSET; count];
    for (h, &i) in ids.iter().enumerate() {
        if rep[i] == UNSET {
            rep[i] = h as Half;
        }
    }
    rep
}

impl Orientation {
    /// The stored orientation of a graph: edges by smallest label (even), or
    /// vertices and boundaries by smallest label with each edge pointing from
    /// its smaller to its larger half-edge (odd).
    pub fn reference(g: &RibbonGraph, parity: Parity) -> Orientation {
        match parity {
            Parity::Even => Orientation::Even {
                edge_order: g.edges().into_iter().map(|(a, _)| a).collect(),
            },
            Parity::Odd => {
                let (vid, nv) = g.vertex_ids();
                let (bid, nb) = g.boundary_ids();
                Orientation::Odd {
                    vertex_order: first_of_orbits(&vid, nv),
                    boundary_order: first_of_orbits(&bid, nb),
                    edge_directions: g.edges(),
                }
            }
        }
    }

    pub(crate) fn as_ref(&self) -> OrRef<'_> {
        match self {
            Orientation::Even { edge_order } => OrRef::Even(edge_order),
            Orientation::Odd {
                vertex_order,
                boundary_order,
                edge_directions,
            } => OrRef::Odd(vertex_order, boundary_order, edge_directions),
        }
    }

    pub fn parity(&self) -> Parity {
        match self {
            Orientation::Even { .. } => Parity::Even,
            Orientation::Odd { .. } => Parity::Odd,
        }
    }

    pub fn transport(&self, map: &[Half]) -> Orientation {
        let m = |v: &Vec<Half>| v.iter().map(|&h| map[h as usize]).collect::<Vec<_>>();
        match self {
            Orientation::Even { edge_order } => Orientation::Even { edge_order: m(edge_order) },
            Orientation::Odd {
                vertex_order,
                boundary_order,
                edge_directions,
            } => Orientation::Odd {
                vertex_order: m(vertex_order),
                boundary_order: m(boundary_order),
                edge_directions: edge_directions.iter().map(|&(a, b)| (map[a as usize], map[b as usize])).collect(),
            },
        }
    }

    /// The orientation differing by one transposition or one edge flip, when
    /// such a generator exists.
    pub fn opposite(&self) -> Option<Orientation> {
        let mut o = self.clone();
        match &mut o {
            Orientation::Even { edge_order } => {
                if edge_order.len() < 2 {
                    return None;
                }
                edge_order.swap(0, 1);
            }
            Orientation::Odd { edge_directions, .. } => {
                let first = edge_directions.first_mut()?;
                *first = (first.1, first.0);
            }
        }
        Some(o)
    }

    /// Sign of this orientation relative to `Orientation::reference(g, _)`.
    pub fn sign_relative_to_reference(&self, g: &RibbonGraph) -> Result<i8, RibbonError> {
        let n = g.num_half_edges();
        let bad = |m: &str| RibbonError::BadOrientation(m.to_string());
        let in_range = |v: &[Half]| v.iter().all(|&h| (h as usize) < n);
        match self {
            Orientation::Even { edge_order } => {
                if !in_range(edge_order) {
                    return Err(bad("half-edge out of range"));
                }
                let mut edge_index = vec![usize::MAX; n];
                for (k, (a, b)) in g.edges().into_iter().enumerate() {
                    edge_index[a as usize] = k;
                    edge_index[b as usize] = k;
                }
                let p: Vec<usize> = edge_order.iter().map(|&h| edge_index[h as usize]).collect();
                if p.len() != g.num_edges() || !perm::is_permutation(&p) {
                    return Err(bad("edge order does not list every edge once"));
                }
                Ok(perm::sign(&p))
            }
            Orientation::Odd {
                vertex_order,
                boundary_order,
                edge_directions,
            } => {
                if !in_range(vertex_order) || !in_range(boundary_order) {
                    return Err(bad("half-edge out of range"));
                }
                let (vid, nv) = g.vertex_ids();
                let (bid, nb) = g.boundary_ids();
                let pv: Vec<usize> = vertex_order.iter().map(|&h| vid[h as usize]).collect();
                let pb: Vec<usize> = boundary_order.iter().map(|&h| bid[h as usize]).collect();
                if pv.len() != nv || !perm::is_permutation(&pv) {
                    return Err(bad("vertex order does not list every vertex once"));
                }
                if pb.len() != nb || !perm::is_permutation(&pb) {
                    return Err(bad("boundary order does not list every boundary once"));
                }
                let mut seen = vec![false; n];
                let mut flips = 0;
                for &(a, b) in edge_directions {
                    let (a, b) = (a as usize, b as usize);
                    if a >= n || b >= n || g.sigma1()[a] as usize != b || seen[a] {
                        return Err(bad("edge directions must name every edge once"));
                    }
                    seen[a] = true;
                    seen[b] = true;
                    if a > b {
                        flips += 1;
                    }
                }
                if edge_directions.len() != g.num_edges() {
                    return Err(bad("edge directions must name every edge once"));
                }
                let s = perm::sign(&pv) * perm::sign(&pb);
                Ok(if flips % 2 == 0 { s } else { -s })
            }
        }
    }
}

/// Sign by which automorphism `a` acts on orientation `or` of `g`.
pub fn orientation_sign(g: &RibbonGraph, a: &[Half], or: &Orientation) -> Result<i8, RibbonError> {
    if !is_automorphism(g, a) {
        return Err(RibbonError::NotAutomorphism);
    }
    let before = or.sign_relative_to_reference(g)?;
    let after = or.transport(a).sign_relative_to_reference(g)?;
    Ok(before * after)
}

/// Sign of an automorphism of a canonical graph on its reference orientation.
/// `vid`/`bid` are the vertex and boundary ids of the canonical graph.
pub(crate) fn reference_aut_sign(a: &[Half], parity: Parity, vid: &[usize], bid: &[usize], nv: usize, nb: usize) -> i8 {
    let ne = a.len() / 2;
    match parity {
        Parity::Even => {
            let p: Vec<usize> = (0..ne).map(|k| a[2 * k] as usize / 2).collect();
            perm::sign(&p)
        }
        Parity::Odd => {
            let vrep = first_of_orbits(vid, nv);
            let brep = first_of_orbits(bid, nb);
            let pv: Vec<usize> = vrep.iter().map(|&h| vid[a[h as usize] as usize]).collect();
            let pb: Vec<usize> = brep.iter().map(|&h| bid[a[h as usize] as usize]).collect();
            let flips = (0..ne).filter(|&k| a[2 * k] % 2 == 1).count();
            let s = perm::sign(&pv) * perm::sign(&pb);
            if flips % 2 == 0 {
                s
            } else {
                -s
            }
        }
    }
}

/// Content hash of a canonical graph in a parity regime.
pub fn content_hash(tag: &str, g: &RibbonGraph, parity: Parity) -> String {
    let mut h = Sha256::new();
    h.update(tag.as_bytes());
    h.update([0u8, parity as u8]);
    h.update(g.sigma0());
    h.update(g.sigma1());
    hex::encode(h.finalize())
}

/// Canonical representative with its reference orientation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrientedClass {
    pub canonical_graph: RibbonGraph,
    pub orientation: Orientation,
    pub zero_flag: bool,
    pub hash: String,
}

impl OrientedClass {
    /// Class of a graph that is already canonical.
    pub fn from_canonical(c: &Canonical, parity: Parity) -> OrientedClass {
        let zero_flag = is_zero_class(c, parity);
        OrientedClass {
            orientation: Orientation::reference(&c.graph, parity),
            hash: content_hash("ribbon", &c.graph, parity),
            canonical_graph: c.graph.clone(),
            zero_flag,
        }
    }

    pub fn parity(&self) -> Parity {
        self.orientation.parity()
    }
}

pub(crate) fn is_zero_class(c: &Canonical, parity: Parity) -> bool {
    if c.automorphisms.len() == 1 {
        return false;
    }
    let (vid, nv) = c.graph.vertex_ids();
    let (bid, nb) = c.graph.boundary_ids();
    c.automorphisms
        .iter()
        .skip(1)
        .any(|a| reference_aut_sign(a, parity, &vid, &bid, nv, nb) < 0)
}

/// Canonicalizes `(g, or)`: `(g, or) = sign * (class, reference orientation)`.
pub fn to_oriented_class(g: &RibbonGraph, or: &Orientation) -> Result<(OrientedClass, i8), RibbonError> {
    let c = canonicalize(g)?;
    let moved = or.transport(&c.relabel);
    let sign = moved.sign_relative_to_reference(&c.graph)?;
    Ok((OrientedClass::from_canonical(&c, or.parity()), sign))
}
