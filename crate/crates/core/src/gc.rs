//! Ordinary graph complex: multigraphs without loop edges, every vertex at
//! least bivalent, oriented by an ordering of the edges.
//!
//! Parallel edges make a class vanish (swapping them is an odd
//! automorphism), so bases consist of simple graphs. Edges carry odd degree
//! and vertices even degree for every `d`, so `d` only shifts degrees:
//! `|G| = 2d(V-1) + (1-2d)E = E - 2dL` at loop order `L = E - V + 1`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cache::Cache;
use crate::complex::{CohomologyRow, Column, Graded, MatrixReport, Status};
use crate::error::ComplexError;
use crate::linalg::SparseIntMatrix;

pub const MAX_LOOP_ORDER: usize = 4;
pub const MAX_VERTICES: usize = 16;
/// Vertex bound for the edge-subset scan.
pub const BRUTE_FORCE_MAX_VERTICES: usize = 7;

/// Vertex count and an ordered edge list; the order is the orientation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SimpleGraph {
    pub vertices: usize,
    /// Pairs stored as `(min, max)`.
    pub edges: Vec<(u8, u8)>,
}

impl SimpleGraph {
    pub fn new(vertices: usize, edges: &[(usize, usize)]) -> Result<Self, ComplexError> {
        if vertices > MAX_VERTICES {
            return Err(ComplexError::InvalidSpec(format!("at most {MAX_VERTICES} vertices")));
        }
        let mut out = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= vertices || b >= vertices {
                return Err(ComplexError::InvalidSpec(format!("edge ({a},{b}) leaves the vertex range")));
            }
            if a == b {
                return Err(ComplexError::InvalidSpec(format!("loop edge at vertex {a}")));
            }
            out.push((a.min(b) as u8, a.max(b) as u8));
        }
        Ok(SimpleGraph { vertices, edges: out })
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn loop_order(&self) -> i64 {
        self.edges.len() as i64 - self.vertices as i64 + 1
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.vertices];
        for &(a, b) in &self.edges {
            d[a as usize] += 1;
            d[b as usize] += 1;
        }
        d
    }

    pub fn min_degree(&self) -> usize {
        self.degrees().into_iter().min().unwrap_or(0)
    }

    pub fn has_parallel_edges(&self) -> bool {
        let set: BTreeSet<_> = self.edges.iter().collect();
        set.len() != self.edges.len()
    }

    pub fn is_connected(&self) -> bool {
        if self.vertices == 0 {
            return true;
        }
        let mut reach = vec![false; self.vertices];
        reach[0] = true;
        let mut changed = true;
        while changed {
            changed = false;
            for &(a, b) in &self.edges {
                let (a, b) = (a as usize, b as usize);
                if reach[a] != reach[b] {
                    reach[a] = true;
                    reach[b] = true;
                    changed = true;
                }
            }
        }
        reach.into_iter().all(|r| r)
    }

    /// `2d(V-1) + (1-2d)E`.
    pub fn degree(&self, d: i64) -> i64 {
        2 * d * (self.vertices as i64 - 1) + (1 - 2 * d) * self.edges.len() as i64
    }

    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(b"gc2");
        h.update([self.vertices as u8]);
        for &(a, b) in &self.edges {
            h.update([a, b]);
        }
        hex::encode(h.finalize())
    }

    pub fn to_dot(&self) -> String {
        let mut s = format!(
            "graph G {{\n  label=\"V={} E={} L={}\";\n",
            self.vertices,
            self.edges.len(),
            self.loop_order()
        );
        for v in 0..self.vertices {
            s.push_str(&format!("  v{v};\n"));
        }
        for (i, &(a, b)) in self.edges.iter().enumerate() {
            s.push_str(&format!("  v{a} -- v{b} [label=\"{i}\"];\n"));
        }
        s.push_str("}\n");
        s
    }
}

/// Multiplicity matrix; loops count once on the diagonal.
fn adjacency(n: usize, edges: &[(u8, u8)]) -> Vec<Vec<u32>> {
    let mut adj = vec![vec![0u32; n]; n];
    for &(a, b) in edges {
        adj[a as usize][b as usize] += 1;
        if a != b {
            adj[b as usize][a as usize] += 1;
        }
    }
    adj
}

/// Equitable refinement of a colouring; colours are re-ranked by signature,
/// which keeps the result independent of vertex names.
fn refine(adj: &[Vec<u32>], colors: &mut [u32]) {
    let n = colors.len();
    let mut classes = colors.iter().collect::<BTreeSet<_>>().len();
    loop {
        let sigs: Vec<(u32, Vec<(u32, u32)>)> = (0..n)
            .map(|v| {
                let mut nb: Vec<(u32, u32)> = (0..n).filter(|&u| adj[v][u] > 0).map(|u| (colors[u], adj[v][u])).collect();
                nb.sort_unstable();
                (colors[v], nb)
            })
            .collect();
        let ranks: Vec<&(u32, Vec<(u32, u32)>)> = sigs.iter().collect::<BTreeSet<_>>().into_iter().collect();
        for v in 0..n {
            colors[v] = ranks.binary_search(&&sigs[v]).unwrap() as u32;
        }
        if ranks.len() == classes {
            return;
        }
        classes = ranks.len();
    }
}

/// All leaves of the individualization-refinement tree, as labellings
/// `old vertex -> new vertex`.
fn leaves(adj: &[Vec<u32>], colors: Vec<u32>, out: &mut Vec<Vec<u32>>) {
    let n = colors.len();
    let mut count = vec![0usize; n];
    for &c in &colors {
        count[c as usize] += 1;
    }
    let Some(target) = (0..n as u32).find(|&c| count[c as usize] > 1) else {
        out.push(colors);
        return;
    };
    for v in (0..n).filter(|&v| colors[v] == target) {
        let mut c: Vec<u32> = colors.iter().enumerate().map(|(w, &x)| 2 * x + u32::from(w != v)).collect();
        refine(adj, &mut c);
        leaves(adj, c, out);
    }
}

fn relabel_edges(edges: &[(u8, u8)], lab: &[u32]) -> Vec<(u8, u8)> {
    edges
        .iter()
        .map(|&(a, b)| {
            let (x, y) = (lab[a as usize] as u8, lab[b as usize] as u8);
            (x.min(y), x.max(y))
        })
        .collect()
}

/// Parity of the permutation sorting distinct items.
fn sort_sign(seq: &[(u8, u8)]) -> i8 {
    let mut inv = 0usize;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            inv += usize::from(seq[i] > seq[j]);
        }
    }
    if inv.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Canonical form of a multigraph (loops allowed), with edges sorted.
pub fn canonical_multigraph(n: usize, edges: &[(u8, u8)]) -> Vec<(u8, u8)> {
    let adj = adjacency(n, edges);
    let mut colors = vec![0u32; n];
    refine(&adj, &mut colors);
    let mut ls = Vec::new();
    leaves(&adj, colors, &mut ls);
    ls.iter()
        .map(|l| {
            let mut e = relabel_edges(edges, l);
            e.sort_unstable();
            e
        })
        .min()
        .unwrap_or_default()
}

/// Canonical class of an oriented graph: the canonical graph (edges sorted)
/// and the sign relating the given edge order to the sorted one. `None` for
/// zero classes.
pub fn classify(g: &SimpleGraph) -> Option<(SimpleGraph, i8)> {
    if g.has_parallel_edges() {
        return None;
    }
    let adj = adjacency(g.vertices, &g.edges);
    let mut colors = vec![0u32; g.vertices];
    refine(&adj, &mut colors);
    let mut ls = Vec::new();
    leaves(&adj, colors, &mut ls);
    let mut best: Option<(Vec<(u8, u8)>, i8)> = None;
    let mut zero = false;
    for l in &ls {
        let mapped = relabel_edges(&g.edges, l);
        let sign = sort_sign(&mapped);
        let mut code = mapped;
        code.sort_unstable();
        match &best {
            Some((b, s)) if *b == code => zero |= *s != sign,
            Some((b, _)) if *b < code => {}
            _ => {
                best = Some((code, sign));
                zero = false;
            }
        }
    }
    if zero {
        return None;
    }
    let (edges, sign) = best?;
    Some((
        SimpleGraph {
            vertices: g.vertices,
            edges,
        },
        sign,
    ))
}

/// Whether the graph (possibly with parallel edges) has an odd automorphism.
pub fn is_zero_class(g: &SimpleGraph) -> bool {
    classify(g).is_none()
}

fn check_guard(loop_order: usize, edges: usize) -> Result<(), ComplexError> {
    if loop_order > MAX_LOOP_ORDER {
        return Err(ComplexError::Refused(format!(
            "loop order {loop_order} exceeds the guard {MAX_LOOP_ORDER}"
        )));
    }
    if edges + 1 > MAX_VERTICES + loop_order {
        return Err(ComplexError::Refused(format!("E={edges} needs more than {MAX_VERTICES} vertices")));
    }
    Ok(())
}

/// No simple graph with min degree `m` exists at this size.
pub fn forced_empty(loop_order: usize, edges: usize, min_valence: usize) -> bool {
    let v = edges as i64 - loop_order as i64 + 1;
    v < 2 || edges as i64 > v * (v - 1) / 2 || (min_valence as i64) * v > 2 * edges as i64
}

/// Connected multigraphs with loops, min degree 3, loop order `L`, up to
/// isomorphism, as sorted canonical edge lists per vertex count.
fn cores(loop_order: usize) -> Vec<(usize, Vec<(u8, u8)>)> {
    let mut out = BTreeSet::new();
    for v in 1..=2 * loop_order.saturating_sub(1) {
        let e = v + loop_order - 1;
        let pairs: Vec<(u8, u8)> = (0..v as u8).flat_map(|a| (a..v as u8).map(move |b| (a, b))).collect();
        let mut pick = Vec::with_capacity(e);
        multisets(&pairs, 0, e, &mut pick, &mut |es| {
            let mut deg = vec![0usize; v];
            for &(a, b) in es {
                deg[a as usize] += 1;
                deg[b as usize] += 1;
            }
            if deg.iter().all(|&d| d >= 3)
                && (SimpleGraph {
                    vertices: v,
                    edges: es.to_vec(),
                })
                .is_connected()
            {
                out.insert((v, canonical_multigraph(v, es)));
            }
        });
    }
    out.into_iter().collect()
}

fn multisets(pairs: &[(u8, u8)], from: usize, left: usize, pick: &mut Vec<(u8, u8)>, f: &mut impl FnMut(&[(u8, u8)])) {
    if left == 0 {
        f(pick);
        return;
    }
    for i in from..pairs.len() {
        pick.push(pairs[i]);
        multisets(pairs, i, left - 1, pick, f);
        pick.pop();
    }
}

/// Compositions of `total` into `parts` positive integers.
fn compositions(total: usize, parts: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if parts == 0 {
        if total == 0 {
            f(cur);
        }
        return;
    }
    let max = total.saturating_sub(parts - 1);
    for s in 1..=max {
        cur.push(s);
        compositions(total - s, parts - 1, cur, f);
        cur.pop();
    }
}

fn subdivide(v: usize, core: &[(u8, u8)], lengths: &[usize]) -> SimpleGraph {
    let mut n = v;
    let mut edges = Vec::new();
    for (&(a, b), &s) in core.iter().zip(lengths) {
        let mut prev = a as usize;
        for _ in 1..s {
            edges.push((prev, n));
            prev = n;
            n += 1;
        }
        edges.push((prev, b as usize));
    }
    SimpleGraph {
        vertices: n,
        edges: edges.into_iter().map(|(x, y)| (x.min(y) as u8, x.max(y) as u8)).collect(),
    }
}

fn insert_class(out: &mut BTreeMap<String, SimpleGraph>, g: &SimpleGraph) {
    if g.edges.iter().any(|&(a, b)| a == b) {
        return;
    }
    if let Some((c, _)) = classify(g) {
        out.insert(c.hash(), c);
    }
}

/// Nonzero classes at loop order `L` with `E` edges and min degree
/// `min_valence`, in hash order. Built by subdividing trivalent-or-more cores.
pub fn gc_enumerate(loop_order: usize, edges: usize, min_valence: usize) -> Result<Vec<SimpleGraph>, ComplexError> {
    check_guard(loop_order, edges)?;
    let mut out = BTreeMap::new();
    if loop_order == 0 || forced_empty(loop_order, edges, min_valence) {
        return Ok(Vec::new());
    }
    if loop_order == 1 {
        if min_valence <= 2 {
            let cycle: Vec<(usize, usize)> = (0..edges).map(|i| (i, (i + 1) % edges)).collect();
            insert_class(&mut out, &SimpleGraph::new(edges, &cycle)?);
        }
        return Ok(out.into_values().collect());
    }
    for (v, core) in cores(loop_order) {
        if min_valence >= 3 {
            if core.len() == edges {
                insert_class(
                    &mut out,
                    &SimpleGraph {
                        vertices: v,
                        edges: core.clone(),
                    },
                );
            }
            continue;
        }
        if core.len() > edges {
            continue;
        }
        compositions(edges, core.len(), &mut Vec::new(), &mut |ls| {
            insert_class(&mut out, &subdivide(v, &core, ls));
        });
    }
    Ok(out.into_values().collect())
}

/// Same classes by scanning every edge subset on `V = E - L + 1` labelled
/// vertices.
pub fn gc_enumerate_bruteforce(loop_order: usize, edges: usize, min_valence: usize) -> Result<Vec<SimpleGraph>, ComplexError> {
    let v = edges as i64 - loop_order as i64 + 1;
    if v < 1 {
        return Ok(Vec::new());
    }
    let v = v as usize;
    if v > BRUTE_FORCE_MAX_VERTICES {
        return Err(ComplexError::Refused(format!(
            "brute force is limited to {BRUTE_FORCE_MAX_VERTICES} vertices"
        )));
    }
    let pairs: Vec<(u8, u8)> = (0..v as u8).flat_map(|a| (a + 1..v as u8).map(move |b| (a, b))).collect();
    let mut out = BTreeMap::new();
    if edges > pairs.len() {
        return Ok(Vec::new());
    }
    let mut idx: Vec<usize> = (0..edges).collect();
    loop {
        let g = SimpleGraph {
            vertices: v,
            edges: idx.iter().map(|&i| pairs[i]).collect(),
        };
        if g.min_degree() >= min_valence.max(1) && g.is_connected() {
            insert_class(&mut out, &g);
        }
        // next combination
        let mut i = edges;
        loop {
            if i == 0 {
                return Ok(out.into_values().collect());
            }
            i -= 1;
            if idx[i] < pairs.len() - edges + i {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..edges {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Vertex splitting: for each vertex, each split of its edges into a part
/// containing its first edge and a nonempty rest, with the new edge last.
/// Returns canonical graphs with coefficients, zero classes removed.
pub fn gc_delta(g: &SimpleGraph) -> BTreeMap<SimpleGraph, i64> {
    let mut acc: BTreeMap<SimpleGraph, i64> = BTreeMap::new();
    let w = g.vertices as u8;
    for v in 0..g.vertices as u8 {
        let inc: Vec<usize> = (0..g.edges.len()).filter(|&i| g.edges[i].0 == v || g.edges[i].1 == v).collect();
        let k = inc.len();
        if k < 2 {
            continue;
        }
        for mask in 1u32..(1 << (k - 1)) {
            let mut edges = g.edges.clone();
            for (bit, &e) in inc[1..].iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    let (a, b) = edges[e];
                    let other = if a == v { b } else { a };
                    edges[e] = (other.min(w), other.max(w));
                }
            }
            edges.push((v, w));
            let h = SimpleGraph {
                vertices: g.vertices + 1,
                edges,
            };
            if let Some((c, s)) = classify(&h) {
                *acc.entry(c).or_insert(0) += s as i64;
            }
        }
    }
    acc.retain(|_, c| *c != 0);
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GcSpec {
    pub loop_order: usize,
    pub d: i64,
    pub min_valence: usize,
    pub e_min: usize,
    pub e_max: usize,
}

impl GcSpec {
    pub fn new(loop_order: usize, d: i64, e_min: usize, e_max: usize) -> Self {
        GcSpec {
            loop_order,
            d,
            min_valence: 2,
            e_min,
            e_max,
        }
    }

    /// `E - 2dL`.
    pub fn degree(&self, edges: usize) -> i64 {
        edges as i64 - 2 * self.d * self.loop_order as i64
    }

    pub fn validate(&self) -> Result<(), ComplexError> {
        if self.e_min == 0 || self.e_min > self.e_max {
            return Err(ComplexError::InvalidSpec("edge range must satisfy 1 <= E_min <= E_max".into()));
        }
        if !(2..=3).contains(&self.min_valence) {
            return Err(ComplexError::InvalidSpec("min valence must be 2 or 3".into()));
        }
        check_guard(self.loop_order, self.e_max + 1)
    }
}

#[derive(Debug, Clone, Serialize)]
struct GcCellKey {
    loop_order: usize,
    edges: usize,
    min_valence: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GcTable {
    pub spec: GcSpec,
    pub rows: Vec<CohomologyRow>,
    pub matrices: Vec<MatrixReport>,
    /// Terms with a bivalent vertex dropped when `min_valence = 3`.
    pub dropped_terms: usize,
}

impl GcTable {
    pub fn certified(&self) -> impl Iterator<Item = &CohomologyRow> {
        self.rows.iter().filter(|r| r.status == Status::Certified)
    }
}

pub struct GcSlice {
    pub spec: GcSpec,
    pub bases: BTreeMap<usize, Vec<SimpleGraph>>,
    /// `E -> matrix to E + 1`.
    pub differentials: BTreeMap<usize, SparseIntMatrix>,
    pub dropped_terms: usize,
}

pub fn gc_basis(cache: &Cache, loop_order: usize, edges: usize, min_valence: usize) -> Result<Vec<SimpleGraph>, ComplexError> {
    let key = GcCellKey {
        loop_order,
        edges,
        min_valence,
    };
    let (b, ()) = cache.records("gc2", "basis", &key, || Ok((gc_enumerate(loop_order, edges, min_valence)?, ())))?;
    Ok(b)
}

fn gc_matrix(source: &[SimpleGraph], target: &[SimpleGraph], min_valence: usize) -> Result<(SparseIntMatrix, usize), ComplexError> {
    let index: BTreeMap<&SimpleGraph, usize> = target.iter().enumerate().map(|(i, g)| (g, i)).collect();
    let cols: Vec<Column> = source
        .par_iter()
        .map(|g| {
            let mut entries = Vec::new();
            let mut dropped = 0;
            for (h, c) in gc_delta(g) {
                match index.get(&h) {
                    Some(&r) => entries.push((r, c)),
                    None if h.min_degree() < min_valence => dropped += 1,
                    None => return Err(ComplexError::AssemblyIncomplete { hash: h.hash() }),
                }
            }
            Ok((entries, dropped))
        })
        .collect();
    let mut triplets = Vec::new();
    let mut dropped = 0;
    for (j, col) in cols.into_iter().enumerate() {
        let (es, d) = col?;
        dropped += d;
        triplets.extend(es.into_iter().map(|(r, v)| (r, j, BigInt::from(v))));
    }
    Ok((SparseIntMatrix::from_triplets(target.len(), source.len(), triplets)?, dropped))
}

pub fn gc_build(spec: &GcSpec, cache: &Cache) -> Result<GcSlice, ComplexError> {
    spec.validate()?;
    let es: Vec<usize> = (spec.e_min..=spec.e_max).collect();
    let bases: BTreeMap<usize, Vec<SimpleGraph>> = es
        .par_iter()
        .map(|&e| gc_basis(cache, spec.loop_order, e, spec.min_valence).map(|b| (e, b)))
        .collect::<Result<_, _>>()?;
    let mats: Vec<(usize, (SparseIntMatrix, usize))> = es[..es.len() - 1]
        .par_iter()
        .map(|&e| {
            let key = (
                GcCellKey {
                    loop_order: spec.loop_order,
                    edges: e,
                    min_valence: spec.min_valence,
                },
                "delta",
            );
            cache
                .matrix("gc2", "matrix", &key, || gc_matrix(&bases[&e], &bases[&(e + 1)], spec.min_valence))
                .map(|m| (e, m))
        })
        .collect::<Result<_, _>>()?;
    let dropped_terms = mats.iter().map(|(_, (_, d))| d).sum();
    Ok(GcSlice {
        spec: *spec,
        bases,
        differentials: mats.into_iter().map(|(e, (m, _))| (e, m)).collect(),
        dropped_terms,
    })
}

pub fn gc_cohomology(slice: &GcSlice) -> Result<GcTable, ComplexError> {
    let spec = &slice.spec;
    let diffs: Vec<SparseIntMatrix> = slice.differentials.values().cloned().collect();
    let graded = Graded {
        e_min: spec.e_min,
        e_max: spec.e_max,
        degree: &|e| spec.degree(e),
        cell_dims: &|e| BTreeMap::from([(spec.loop_order, slice.bases.get(&e).map_or(0, Vec::len))]),
        forced_empty: &|e| forced_empty(spec.loop_order, e, spec.min_valence),
    };
    let (rows, matrices) = graded.table(&diffs)?;
    Ok(GcTable {
        spec: *spec,
        rows,
        matrices,
        dropped_terms: slice.dropped_terms,
    })
}
