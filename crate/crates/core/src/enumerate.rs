//! Isomorphism classes of connected ribbon graphs with prescribed genus,
//! boundary count, edge count and minimal valence.
//!
//! Graphs are grown from one-vertex graphs (chord diagrams on `2E'` points)
//! by repeated vertex splitting. Contracting a non-loop edge keeps genus and
//! boundary count, so every graph with `V` vertices is a splitting of one with
//! `V - 1`. When the minimal valence `m` is at least two the merged vertex has
//! valence at least `2m - 2 >= m`, so intermediate levels can be filtered by
//! `m` as well.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canonical::{canonicalize_connected, OrientedClass, Parity};
use crate::differential::split_vertex;
use crate::ribbon::{orbit_ids, Half, RibbonGraph};

pub const BRUTE_FORCE_MAX_HALF_EDGES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EnumSpec {
    pub genus: usize,
    pub boundaries: usize,
    pub edges: usize,
    pub min_valence: usize,
    pub parity: Parity,
}

impl EnumSpec {
    pub fn new(genus: usize, boundaries: usize, edges: usize, min_valence: usize, parity: Parity) -> Self {
        EnumSpec {
            genus,
            boundaries,
            edges,
            min_valence,
            parity,
        }
    }

    /// Vertex count forced by the Euler relation, if the spec admits graphs.
    pub fn vertices(&self) -> Result<usize, String> {
        cell_vertices(self.genus, self.boundaries, self.edges, self.min_valence)
    }
}

/// `V = E - n + 2 - 2g`, checked against `V >= 1` and `m V <= 2E`.
pub fn cell_vertices(genus: usize, boundaries: usize, edges: usize, min_valence: usize) -> Result<usize, String> {
    if edges == 0 {
        return Err("graphs need at least one edge".into());
    }
    if boundaries == 0 {
        return Err("graphs have at least one boundary".into());
    }
    let v = edges as i64 - boundaries as i64 + 2 - 2 * genus as i64;
    if v < 1 {
        return Err(format!("E={edges}, n={boundaries}, g={genus} leaves V={v}; need V >= 1"));
    }
    let v = v as usize;
    if min_valence * v > 2 * edges {
        return Err(format!(
            "V={v} vertices of valence >= {min_valence} need more than {} half-edges",
            2 * edges
        ));
    }
    Ok(v)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Enumeration {
    pub spec: EnumSpec,
    /// Nonzero classes in content-hash order.
    pub classes: Vec<OrientedClass>,
    pub zero_classes: usize,
    pub note: Option<String>,
}

impl Enumeration {
    pub fn total_classes(&self) -> usize {
        self.classes.len() + self.zero_classes
    }
}

/// Splits a list of canonical graphs into nonzero classes (hash order) and a
/// zero-class count.
pub fn orient_all(graphs: &[RibbonGraph], parity: Parity) -> (Vec<OrientedClass>, usize) {
    let all: Vec<OrientedClass> = graphs
        .par_iter()
        .map(|g| OrientedClass::from_canonical(&canonicalize_connected(g), parity))
        .collect();
    let zero = all.iter().filter(|c| c.zero_flag).count();
    let mut nonzero: Vec<OrientedClass> = all.into_iter().filter(|c| !c.zero_flag).collect();
    nonzero.sort_by(|a, b| a.hash.cmp(&b.hash));
    (nonzero, zero)
}

type Level = Arc<Vec<RibbonGraph>>;
/// One-vertex graphs on `E` edges by `(genus, boundaries)`.
type OneVertexMaps = Arc<BTreeMap<(usize, usize), Vec<RibbonGraph>>>;

/// Memoizing enumerator. Results are sorted canonical graphs, independent of
/// thread count.
#[derive(Default)]
pub struct Enumerator {
    levels: Mutex<HashMap<(usize, usize, usize, usize), Level>>,
    one_vertex: Mutex<HashMap<usize, OneVertexMaps>>,
}

impl Enumerator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn enumerate(&self, spec: EnumSpec) -> Enumeration {
        match spec.vertices() {
            Err(note) => Enumeration {
                spec,
                classes: Vec::new(),
                zero_classes: 0,
                note: Some(note),
            },
            Ok(_) => {
                let graphs = self.graphs(spec.genus, spec.boundaries, spec.edges, spec.min_valence);
                let (classes, zero_classes) = orient_all(&graphs, spec.parity);
                Enumeration {
                    spec,
                    classes,
                    zero_classes,
                    note: None,
                }
            }
        }
    }

    /// All isomorphism classes (zero or not), sorted.
    pub fn graphs(&self, genus: usize, boundaries: usize, edges: usize, min_valence: usize) -> Level {
        let m = min_valence.max(1);
        let key = (genus, boundaries, edges, m);
        if let Some(l) = self.levels.lock().unwrap().get(&key) {
            return l.clone();
        }
        let level = Arc::new(self.compute_level(genus, boundaries, edges, m));
        self.levels.lock().unwrap().insert(key, level.clone());
        level
    }

    fn compute_level(&self, genus: usize, boundaries: usize, edges: usize, m: usize) -> Vec<RibbonGraph> {
        let Ok(v) = cell_vertices(genus, boundaries, edges, m) else {
            return Vec::new();
        };
        if v == 1 {
            let maps = self.one_vertex_maps(edges);
            return maps.get(&(genus, boundaries)).cloned().unwrap_or_default();
        }
        if edges == 1 {
            // the segment; its contraction would have no half-edges
            let seg = RibbonGraph::from_raw(vec![0, 1], vec![1, 0]);
            return vec![canonicalize_connected(&seg).graph];
        }
        let parents = self.graphs(genus, boundaries, edges - 1, if m >= 2 { m } else { 1 });
        let allow_empty = m == 1;
        let children: HashSet<RibbonGraph> = parents
            .par_iter()
            .fold(HashSet::new, |mut acc, p| {
                for cyc in p.vertices() {
                    let k = cyc.len();
                    for i in 0..k {
                        let lo = if allow_empty { i } else { i + 1 };
                        for j in lo..k {
                            // valences of the two new vertices
                            let (a, b) = if i == j { (k + 1, 1) } else { (j - i + 1, k - (j - i) + 1) };
                            if a < m || b < m {
                                continue;
                            }
                            let c = split_vertex(p, &cyc, i, j);
                            if c.min_valence() >= m {
                                acc.insert(canonicalize_connected(&c).graph);
                            }
                        }
                    }
                }
                acc
            })
            .reduce(HashSet::new, |mut a, b| {
                if a.len() < b.len() {
                    return merge(b, a);
                }
                a.extend(b);
                a
            });
        let mut out: Vec<RibbonGraph> = children.into_iter().collect();
        out.sort();
        out
    }

    /// One-vertex graphs with `edges` edges bucketed by `(genus, boundaries)`.
    fn one_vertex_maps(&self, edges: usize) -> OneVertexMaps {
        if let Some(m) = self.one_vertex.lock().unwrap().get(&edges) {
            return m.clone();
        }
        let n = 2 * edges;
        let rotation: Vec<Half> = (0..n).map(|h| ((h + 1) % n) as Half).collect();
        // fix the partner of 0, then enumerate the remaining matchings in parallel
        let found: HashSet<RibbonGraph> = (1..n)
            .into_par_iter()
            .fold(HashSet::new, |mut acc, first| {
                let mut s1 = vec![Half::MAX; n];
                s1[0] = first as Half;
                s1[first] = 0;
                matchings(&mut s1, &mut |s1| {
                    let g = RibbonGraph::from_raw(rotation.clone(), s1.to_vec());
                    acc.insert(canonicalize_connected(&g).graph);
                });
                acc
            })
            .reduce(HashSet::new, merge);
        let mut buckets: BTreeMap<(usize, usize), Vec<RibbonGraph>> = BTreeMap::new();
        for g in found {
            let b = g.num_boundaries();
            let genus = (1 + edges - b) / 2;
            buckets.entry((genus, b)).or_default().push(g);
        }
        for v in buckets.values_mut() {
            v.sort();
        }
        let arc = Arc::new(buckets);
        self.one_vertex.lock().unwrap().insert(edges, arc.clone());
        arc
    }

    /// Nonzero-class counts over `(n, E)` for `E <= e_max`.
    pub fn basis_table(&self, genus: usize, e_max: usize, min_valence: usize, parity: Parity) -> BTreeMap<(usize, usize), usize> {
        let mut t = BTreeMap::new();
        for e in 1..=e_max {
            let n_max = (e + 1).saturating_sub(2 * genus);
            for n in 1..=n_max {
                let r = self.enumerate(EnumSpec::new(genus, n, e, min_valence, parity));
                t.insert((n, e), r.classes.len());
            }
        }
        t
    }
}

fn merge(mut a: HashSet<RibbonGraph>, b: HashSet<RibbonGraph>) -> HashSet<RibbonGraph> {
    a.extend(b);
    a
}

fn matchings(s1: &mut Vec<Half>, f: &mut impl FnMut(&[Half])) {
    let Some(a) = s1.iter().position(|&x| x == Half::MAX) else {
        f(s1);
        return;
    };
    for b in a + 1..s1.len() {
        if s1[b] == Half::MAX {
            s1[a] = b as Half;
            s1[b] = a as Half;
            matchings(s1, f);
            s1[a] = Half::MAX;
            s1[b] = Half::MAX;
        }
    }
}

/// Every labelled graph on `2E` half-edges with edges `{2k, 2k+1}`, bucketed by
/// `(genus, boundaries, exact minimal valence)`.
#[derive(Debug, Clone, Default)]
pub struct Census {
    pub edges: usize,
    pub buckets: BTreeMap<(usize, usize, usize), BTreeSet<RibbonGraph>>,
}

impl Census {
    pub fn scan(edges: usize) -> Result<Census, String> {
        let n = 2 * edges;
        if n > BRUTE_FORCE_MAX_HALF_EDGES {
            return Err(format!(
                "brute force scans all (2E)! rotations; 2E={n} exceeds the limit of {BRUTE_FORCE_MAX_HALF_EDGES}"
            ));
        }
        if edges == 0 {
            return Ok(Census {
                edges,
                buckets: BTreeMap::new(),
            });
        }
        let sigma1: Vec<Half> = (0..n).map(|h| (h ^ 1) as Half).collect();
        let mut buckets: BTreeMap<(usize, usize, usize), BTreeSet<RibbonGraph>> = BTreeMap::new();
        let mut p: Vec<Half> = (0..n as Half).collect();
        loop {
            if let Some(key) = census_key(&p, &sigma1) {
                let g = RibbonGraph::from_raw(p.clone(), sigma1.clone());
                buckets.entry(key).or_default().insert(canonicalize_connected(&g).graph);
            }
            if !next_permutation(&mut p) {
                break;
            }
        }
        Ok(Census { edges, buckets })
    }

    pub fn classes(&self, genus: usize, boundaries: usize, min_valence: usize) -> BTreeSet<RibbonGraph> {
        self.buckets
            .iter()
            .filter(|((g, b, m), _)| *g == genus && *b == boundaries && *m >= min_valence)
            .flat_map(|(_, s)| s.iter().cloned())
            .collect()
    }
}

fn census_key(s0: &[Half], s1: &[Half]) -> Option<(usize, usize, usize)> {
    let n = s0.len();
    // connectivity
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(h) = stack.pop() {
        for t in [s0[h] as usize, s1[h] as usize] {
            if !seen[t] {
                seen[t] = true;
                count += 1;
                stack.push(t);
            }
        }
    }
    if count != n {
        return None;
    }
    let (vid, nv) = orbit_ids(s0);
    let mut inv = vec![0; n];
    for (h, &x) in s0.iter().enumerate() {
        inv[x as usize] = h as Half;
    }
    let s2: Vec<Half> = s1.iter().map(|&x| inv[x as usize]).collect();
    let (_, nb) = orbit_ids(&s2);
    let mut val = vec![0usize; nv];
    for &v in &vid {
        val[v] += 1;
    }
    let genus = (2 + n / 2 - nv - nb) / 2;
    Some((genus, nb, *val.iter().min().unwrap()))
}

fn next_permutation(p: &mut [Half]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Brute-force enumeration over all rotation systems; same contract as
/// [`Enumerator::enumerate`].
pub fn enumerate_bruteforce(spec: EnumSpec) -> Result<Enumeration, String> {
    let census = Census::scan(spec.edges)?;
    Ok(bruteforce_from_census(&census, spec))
}

pub fn bruteforce_from_census(census: &Census, spec: EnumSpec) -> Enumeration {
    let graphs: Vec<RibbonGraph> = census
        .classes(spec.genus, spec.boundaries, spec.min_valence.max(1))
        .into_iter()
        .collect();
    let (classes, zero_classes) = orient_all(&graphs, spec.parity);
    Enumeration {
        spec,
        classes,
        zero_classes,
        note: spec.vertices().err(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(e: &Enumerator, g: usize, n: usize, ed: usize, m: usize) -> usize {
        e.enumerate(EnumSpec::new(g, n, ed, m, Parity::Even)).total_classes()
    }

    #[test]
    fn small_examples() {
        let e = Enumerator::new();
        assert_eq!(count(&e, 0, 2, 1, 1), 1);
        assert_eq!(count(&e, 0, 1, 1, 1), 1);
        assert_eq!(count(&e, 1, 1, 2, 3), 1);
        assert_eq!(count(&e, 0, 3, 3, 3), 2);
        let r = e.enumerate(EnumSpec::new(1, 1, 0, 1, Parity::Even));
        assert!(r.classes.is_empty() && r.note.is_some());
    }

    #[test]
    fn basis_table_examples() {
        let e = Enumerator::new();
        let t = e.basis_table(0, 1, 1, Parity::Even);
        assert_eq!(t.get(&(1, 1)), Some(&1));
        assert_eq!(t.get(&(2, 1)), Some(&1));
        let t = e.basis_table(2, 2, 3, Parity::Even);
        assert!(t.values().all(|&c| c == 0));
    }

    #[test]
    fn brute_force_guard() {
        assert!(enumerate_bruteforce(EnumSpec::new(0, 1, 6, 1, Parity::Even)).is_err());
        let r = enumerate_bruteforce(EnumSpec::new(0, 2, 1, 1, Parity::Even)).unwrap();
        assert_eq!(r.total_classes(), 1);
        let r = enumerate_bruteforce(EnumSpec::new(0, 1, 1, 1, Parity::Even)).unwrap();
        assert_eq!(r.total_classes(), 1);
    }

    #[test]
    fn agrees_with_brute_force_up_to_three_edges() {
        let e = Enumerator::new();
        for edges in 1..=3 {
            let census = Census::scan(edges).unwrap();
            for g in 0..=2 {
                for n in 1..=edges + 1 {
                    for m in 1..=3 {
                        let fast: BTreeSet<RibbonGraph> = e.graphs(g, n, edges, m).iter().cloned().collect();
                        assert_eq!(fast, census.classes(g, n, m), "g={g} n={n} E={edges} m={m}");
                    }
                }
            }
        }
    }
}
