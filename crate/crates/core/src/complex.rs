//! Graded ribbon graph complexes: bases, assembled differentials and
//! certified cohomology tables.
//!
//! A cell is the basis at fixed `(g, n, E)`. The KP complex uses one `n` and
//! the vertex-splitting differential. The MW complex stacks every `n` at each
//! `E` and adds the corner-connecting part, which raises `n` by one.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::cache::Cache;
use crate::canonical::{classify_slices, content_hash, OrRef, OrientedClass, Parity};
use crate::differential::{visit_bridgeland, visit_delta, SplitConvention};
use crate::enumerate::{cell_vertices, EnumSpec, Enumerator};
use crate::error::ComplexError;
use crate::linalg::{CertifiedRank, SparseIntMatrix};
use crate::ribbon::{Half, RibbonGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComplexKind {
    Kp,
    Mw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    /// Every vertex at least bivalent.
    Full,
    /// Every vertex at least trivalent; terms leaving the sector are dropped.
    Ge3,
    /// Every vertex exactly bivalent.
    Le2,
}

impl Sector {
    pub fn min_valence(self) -> usize {
        match self {
            Sector::Ge3 => 3,
            Sector::Full | Sector::Le2 => 2,
        }
    }

    /// Whether a graph with rotation `s0` belongs to the sector.
    fn contains(self, s0: &[Half]) -> bool {
        let mut seen = vec![false; s0.len()];
        for start in 0..s0.len() {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut h = start;
            while !seen[h] {
                seen[h] = true;
                h = s0[h] as usize;
                len += 1;
            }
            let ok = match self {
                Sector::Full => len >= 2,
                Sector::Ge3 => len >= 3,
                Sector::Le2 => len == 2,
            };
            if !ok {
                return false;
            }
        }
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ComplexSpec {
    pub kind: ComplexKind,
    pub genus: usize,
    pub d: i64,
    pub sector: Sector,
    pub e_min: usize,
    pub e_max: usize,
    /// Required for KP, ignored (must be `None`) for MW.
    pub boundaries: Option<usize>,
}

impl ComplexSpec {
    pub fn kp(genus: usize, boundaries: usize, d: i64, sector: Sector, e_min: usize, e_max: usize) -> Self {
        ComplexSpec {
            kind: ComplexKind::Kp,
            genus,
            d,
            sector,
            e_min,
            e_max,
            boundaries: Some(boundaries),
        }
    }

    pub fn mw(genus: usize, d: i64, sector: Sector, e_min: usize, e_max: usize) -> Self {
        ComplexSpec {
            kind: ComplexKind::Mw,
            genus,
            d,
            sector,
            e_min,
            e_max,
            boundaries: None,
        }
    }

    pub fn parity(&self) -> Parity {
        Parity::of(self.d)
    }

    /// `k = E - 2gd`.
    pub fn degree(&self, edges: usize) -> i64 {
        edges as i64 - 2 * self.genus as i64 * self.d
    }

    pub fn validate(&self) -> Result<(), ComplexError> {
        let bad = |m: &str| Err(ComplexError::InvalidSpec(m.to_string()));
        if self.e_min == 0 || self.e_min > self.e_max {
            return bad("edge range must satisfy 1 <= E_min <= E_max");
        }
        if 2 * self.e_max + 2 > crate::ribbon::MAX_HALF_EDGES {
            return bad("edge range too large for the half-edge encoding");
        }
        match (self.kind, self.boundaries) {
            (ComplexKind::Kp, None) => bad("KP complexes need a boundary count"),
            (ComplexKind::Kp, Some(0)) => bad("graphs have at least one boundary"),
            (ComplexKind::Mw, Some(_)) => bad("MW complexes aggregate all boundary counts; drop -n"),
            (ComplexKind::Mw, None) if self.sector == Sector::Le2 => {
                bad("the corner-connecting part does not preserve the bivalent sector")
            }
            _ => Ok(()),
        }
    }

    /// Boundary counts contributing at `E` edges.
    pub fn boundary_counts(&self, edges: usize) -> Vec<usize> {
        match self.boundaries {
            Some(n) => vec![n],
            None => (1..=(edges + 1).saturating_sub(2 * self.genus)).collect(),
        }
    }

    /// The basis at `E` is empty by counting alone, without enumeration.
    pub fn forced_empty(&self, edges: usize) -> bool {
        edges == 0
            || self
                .boundary_counts(edges)
                .into_iter()
                .all(|n| cell_forced_empty(self.genus, n, edges, self.sector))
    }
}

fn cell_forced_empty(genus: usize, n: usize, edges: usize, sector: Sector) -> bool {
    match cell_vertices(genus, n, edges, sector.min_valence()) {
        Err(_) => true,
        Ok(v) => sector == Sector::Le2 && v != edges,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellKey {
    pub genus: usize,
    pub boundaries: usize,
    pub edges: usize,
    pub sector: Sector,
    pub parity: Parity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellMeta {
    pub zero_classes: usize,
    pub note: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub key: CellKey,
    /// Nonzero classes in content-hash order.
    pub classes: Vec<OrientedClass>,
    pub meta: CellMeta,
}

impl Cell {
    pub fn dim(&self) -> usize {
        self.classes.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Op {
    Delta,
    Bridgeland,
}

#[derive(Debug, Clone, Serialize)]
struct MatrixKey {
    op: Op,
    source: CellKey,
    target: CellKey,
    convention: SplitConvention,
}

/// One operator between two cells. Rows index the target basis.
#[derive(Debug, Clone)]
pub struct Block {
    pub op: Op,
    pub source: CellKey,
    pub target: CellKey,
    pub matrix: SparseIntMatrix,
    /// Nonzero terms that left the sector and were projected away.
    pub dropped: usize,
}

/// Shared state for building complexes.
pub struct Context {
    pub enumerator: Enumerator,
    pub cache: Cache,
    pub convention: SplitConvention,
}

impl Context {
    pub fn new(cache: Cache) -> Self {
        Context {
            enumerator: Enumerator::new(),
            cache,
            convention: SplitConvention::default(),
        }
    }

    pub fn cell(&self, key: CellKey) -> Result<Cell, ComplexError> {
        let (classes, meta) = self.cache.records("ribbon", "basis", &key, || {
            if cell_forced_empty(key.genus, key.boundaries, key.edges, key.sector) {
                let note = cell_vertices(key.genus, key.boundaries, key.edges, key.sector.min_valence())
                    .err()
                    .unwrap_or_else(|| "bivalent graphs need V = E".to_string());
                return Ok((
                    Vec::new(),
                    CellMeta {
                        zero_classes: 0,
                        note: Some(note),
                    },
                ));
            }
            let spec = EnumSpec::new(key.genus, key.boundaries, key.edges, key.sector.min_valence(), key.parity);
            let en = self.enumerator.enumerate(spec);
            let keep = |c: &OrientedClass| key.sector != Sector::Le2 || c.canonical_graph.max_valence() == 2;
            let zero = if key.sector == Sector::Le2 {
                self.enumerator
                    .graphs(key.genus, key.boundaries, key.edges, 2)
                    .iter()
                    .filter(|g| g.max_valence() == 2)
                    .count()
                    - en.classes.iter().filter(|c| keep(c)).count()
            } else {
                en.zero_classes
            };
            let classes: Vec<OrientedClass> = en.classes.into_iter().filter(keep).collect();
            Ok((
                classes,
                CellMeta {
                    zero_classes: zero,
                    note: en.note,
                },
            ))
        })?;
        Ok(Cell { key, classes, meta })
    }

    /// Matrix of `op` from `source` to `target`.
    pub fn block(&self, op: Op, source: &Cell, target: &Cell) -> Result<Block, ComplexError> {
        let mkey = MatrixKey {
            op,
            source: source.key,
            target: target.key,
            convention: self.convention,
        };
        let (matrix, dropped) = self
            .cache
            .matrix("ribbon", "matrix", &mkey, || assemble(op, source, target, self.convention))?;
        Ok(Block {
            op,
            source: source.key,
            target: target.key,
            matrix,
            dropped,
        })
    }
}

/// One assembled column: `(row, coefficient)` pairs and the number of
/// dropped out-of-sector terms.
pub(crate) type Column = Result<(Vec<(usize, i64)>, usize), ComplexError>;

fn assemble(op: Op, source: &Cell, target: &Cell, conv: SplitConvention) -> Result<(SparseIntMatrix, usize), ComplexError> {
    let parity = source.key.parity;
    let sector = target.key.sector;
    let index: FxHashMap<&[Half], usize> = target
        .classes
        .iter()
        .enumerate()
        .map(|(i, c)| (c.canonical_graph.sigma0(), i))
        .collect();
    let columns: Vec<Column> = source
        .classes
        .par_iter()
        .map(|c| {
            let mut acc: BTreeMap<Vec<Half>, i64> = BTreeMap::new();
            let mut add = |s0: &[Half], s1: &[Half], or: OrRef, sign: i8| {
                classify_slices(s0, s1, or, |code, rel| {
                    *acc.entry(code.to_vec()).or_insert(0) += (sign * rel) as i64;
                })
            };
            match op {
                Op::Delta => visit_delta(&c.canonical_graph, parity, conv, &mut add),
                Op::Bridgeland => visit_bridgeland(&c.canonical_graph, parity, &mut add),
            }
            let mut entries = Vec::new();
            let mut dropped = 0;
            for (code, v) in acc {
                if v == 0 {
                    continue;
                }
                match index.get(code.as_slice()) {
                    Some(&r) => entries.push((r, v)),
                    None if sector.contains(&code) => {
                        let g = RibbonGraph::from_sigma0_standard(code);
                        return Err(ComplexError::AssemblyIncomplete {
                            hash: content_hash("ribbon", &g, parity),
                        });
                    }
                    None => dropped += 1,
                }
            }
            Ok((entries, dropped))
        })
        .collect();
    let mut triplets = Vec::new();
    let mut dropped = 0;
    for (j, col) in columns.into_iter().enumerate() {
        let (entries, d) = col?;
        dropped += d;
        triplets.extend(entries.into_iter().map(|(r, v)| (r, j, BigInt::from(v))));
    }
    Ok((SparseIntMatrix::from_triplets(target.dim(), source.dim(), triplets)?, dropped))
}

/// Bases and blocks for every edge count in range.
#[derive(Debug, Clone)]
pub struct ComplexSlice {
    pub spec: ComplexSpec,
    /// Cells per edge count, by increasing `n`.
    pub cells: BTreeMap<usize, Vec<Cell>>,
    /// Blocks of the differential leaving edge count `E`, for `E < E_max`.
    pub blocks: BTreeMap<usize, Vec<Block>>,
}

impl ComplexSlice {
    pub fn dim(&self, edges: usize) -> usize {
        self.cells.get(&edges).map_or(0, |cs| cs.iter().map(Cell::dim).sum())
    }

    fn offsets(&self, edges: usize) -> BTreeMap<usize, usize> {
        let mut off = BTreeMap::new();
        let mut acc = 0;
        for c in self.cells.get(&edges).into_iter().flatten() {
            off.insert(c.key.boundaries, acc);
            acc += c.dim();
        }
        off
    }

    /// The total differential from `E` to `E + 1` edges.
    pub fn differential(&self, edges: usize) -> Result<SparseIntMatrix, ComplexError> {
        let src = self.offsets(edges);
        let dst = self.offsets(edges + 1);
        let mut acc: BTreeMap<(usize, usize), BigInt> = BTreeMap::new();
        for b in self.blocks.get(&edges).into_iter().flatten() {
            let (r0, c0) = (dst[&b.target.boundaries], src[&b.source.boundaries]);
            for (r, c, v) in b.matrix.entries() {
                *acc.entry((r0 + r, c0 + c)).or_default() += v;
            }
        }
        Ok(SparseIntMatrix::from_triplets(
            self.dim(edges + 1),
            self.dim(edges),
            acc.into_iter().map(|((r, c), v)| (r, c, v)),
        )?)
    }

    pub fn dropped_terms(&self) -> usize {
        self.blocks.values().flatten().map(|b| b.dropped).sum()
    }
}

/// Enumerates every cell and assembles every block in range.
pub fn build(spec: &ComplexSpec, ctx: &Context) -> Result<ComplexSlice, ComplexError> {
    spec.validate()?;
    let parity = spec.parity();
    let keys: Vec<CellKey> = (spec.e_min..=spec.e_max)
        .flat_map(|e| {
            spec.boundary_counts(e).into_iter().map(move |n| CellKey {
                genus: spec.genus,
                boundaries: n,
                edges: e,
                sector: spec.sector,
                parity,
            })
        })
        .collect();
    let built: Vec<Cell> = keys.par_iter().map(|&k| ctx.cell(k)).collect::<Result<_, _>>()?;
    let mut cells: BTreeMap<usize, Vec<Cell>> = BTreeMap::new();
    for c in built {
        cells.entry(c.key.edges).or_default().push(c);
    }
    let mut jobs: Vec<(Op, &Cell, &Cell)> = Vec::new();
    for e in spec.e_min..spec.e_max {
        for s in cells.get(&e).into_iter().flatten() {
            for t in cells.get(&(e + 1)).into_iter().flatten() {
                let n = s.key.boundaries;
                if t.key.boundaries == n {
                    jobs.push((Op::Delta, s, t));
                }
                if spec.kind == ComplexKind::Mw && t.key.boundaries == n + 1 {
                    jobs.push((Op::Bridgeland, s, t));
                }
            }
        }
    }
    let built: Vec<Block> = jobs.par_iter().map(|&(op, s, t)| ctx.block(op, s, t)).collect::<Result<_, _>>()?;
    let mut blocks: BTreeMap<usize, Vec<Block>> = BTreeMap::new();
    for b in built {
        blocks.entry(b.source.edges).or_default().push(b);
    }
    Ok(ComplexSlice {
        spec: *spec,
        cells,
        blocks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    /// Both neighbouring differentials are complete and the ranks agree
    /// modulo both primes.
    Certified,
    /// Complete, but a modular rank disagrees with the rational one.
    Provisional,
    /// A neighbouring cell lies outside the edge range and may be nonempty.
    Truncated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohomologyRow {
    pub degree: i64,
    pub edges: usize,
    pub dim: usize,
    /// Dimensions of the cells by boundary count.
    pub cell_dims: BTreeMap<usize, usize>,
    pub rank_in: usize,
    pub rank_out: usize,
    /// Computed inside the truncated complex when `status` is `truncated`.
    pub h: usize,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixReport {
    pub edges: usize,
    pub rows: usize,
    pub cols: usize,
    pub nnz: usize,
    pub rank: CertifiedRank,
    /// Nonzero entries of the product with the next differential.
    pub composite_nonzero: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohomologyTable {
    pub spec: ComplexSpec,
    pub rows: Vec<CohomologyRow>,
    pub matrices: Vec<MatrixReport>,
    pub dropped_terms: usize,
}

impl CohomologyTable {
    pub fn row(&self, edges: usize) -> Option<&CohomologyRow> {
        self.rows.iter().find(|r| r.edges == edges)
    }

    pub fn certified(&self) -> impl Iterator<Item = &CohomologyRow> {
        self.rows.iter().filter(|r| r.status == Status::Certified)
    }

    pub fn all_ranks_certified(&self) -> bool {
        self.matrices.iter().all(|m| m.rank.certified())
    }

    pub fn composites_vanish(&self) -> bool {
        self.matrices.iter().all(|m| m.composite_nonzero == 0)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{} g={} d={} sector={} E={}..{}{}",
            format!("{:?}", self.spec.kind).to_lowercase(),
            self.spec.genus,
            self.spec.d,
            format!("{:?}", self.spec.sector).to_lowercase(),
            self.spec.e_min,
            self.spec.e_max,
            self.spec.boundaries.map(|n| format!(" n={n}")).unwrap_or_default()
        );
        let _ = writeln!(
            s,
            "{:>6} {:>4} {:>8} {:>8} {:>8} {:>6}  status",
            "degree", "E", "dim", "rank_in", "rank_out", "h"
        );
        for r in &self.rows {
            let status = match r.status {
                Status::Certified => "certified",
                Status::Provisional => "provisional",
                Status::Truncated => "truncated",
            };
            let _ = writeln!(
                s,
                "{:>6} {:>4} {:>8} {:>8} {:>8} {:>6}  {status}",
                r.degree, r.edges, r.dim, r.rank_in, r.rank_out, r.h
            );
        }
        if self.dropped_terms > 0 {
            let _ = writeln!(s, "terms projected out of sector: {}", self.dropped_terms);
        }
        s
    }
}

/// Exact cohomology of a built slice. A nonzero composite of consecutive
/// differentials is a hard error.
pub fn cohomology(slice: &ComplexSlice) -> Result<CohomologyTable, ComplexError> {
    let spec = &slice.spec;
    let diffs: Vec<SparseIntMatrix> = (spec.e_min..spec.e_max).map(|e| slice.differential(e)).collect::<Result<_, _>>()?;
    let graded = Graded {
        e_min: spec.e_min,
        e_max: spec.e_max,
        degree: &|e| spec.degree(e),
        cell_dims: &|e| {
            slice
                .cells
                .get(&e)
                .into_iter()
                .flatten()
                .map(|c| (c.key.boundaries, c.dim()))
                .collect()
        },
        forced_empty: &|e| spec.forced_empty(e),
    };
    let (rows, matrices) = graded.table(&diffs)?;
    Ok(CohomologyTable {
        spec: *spec,
        rows,
        matrices,
        dropped_terms: slice.dropped_terms(),
    })
}

/// Edge-graded data shared by the ribbon and ordinary graph complexes.
pub(crate) struct Graded<'a> {
    pub e_min: usize,
    pub e_max: usize,
    pub degree: &'a (dyn Fn(usize) -> i64 + Sync),
    pub cell_dims: &'a (dyn Fn(usize) -> BTreeMap<usize, usize> + Sync),
    pub forced_empty: &'a (dyn Fn(usize) -> bool + Sync),
}

impl Graded<'_> {
    /// `diffs[i]` maps edge count `e_min + i` to the next one.
    pub fn table(&self, diffs: &[SparseIntMatrix]) -> Result<(Vec<CohomologyRow>, Vec<MatrixReport>), ComplexError> {
        let ranks: Vec<CertifiedRank> = diffs.par_iter().map(CertifiedRank::of).collect();
        let mut matrices = Vec::new();
        for (i, m) in diffs.iter().enumerate() {
            let composite_nonzero = match diffs.get(i + 1) {
                Some(next) => next.mul(m)?.nnz(),
                None => 0,
            };
            if composite_nonzero > 0 {
                return Err(ComplexError::Linalg(crate::error::LinalgError::NonzeroComposite {
                    nonzero: composite_nonzero,
                }));
            }
            matrices.push(MatrixReport {
                edges: self.e_min + i,
                rows: m.rows(),
                cols: m.cols(),
                nnz: m.nnz(),
                rank: ranks[i],
                composite_nonzero,
            });
        }
        let rank_out = |e: usize| (e < self.e_max).then(|| ranks[e - self.e_min]);
        let rank_in = |e: usize| (e > self.e_min).then(|| ranks[e - 1 - self.e_min]);
        let mut rows = Vec::new();
        for e in self.e_min..=self.e_max {
            let cell_dims = (self.cell_dims)(e);
            let dim: usize = cell_dims.values().sum();
            let (ri, ro) = (rank_in(e), rank_out(e));
            let lower_ok = e > self.e_min || (self.forced_empty)(e - 1);
            let upper_ok = e < self.e_max || (self.forced_empty)(e + 1);
            let status = if !(lower_ok && upper_ok) {
                Status::Truncated
            } else if ri.iter().chain(ro.iter()).all(CertifiedRank::certified) {
                Status::Certified
            } else {
                Status::Provisional
            };
            let (ri, ro) = (ri.map_or(0, |r| r.rank), ro.map_or(0, |r| r.rank));
            rows.push(CohomologyRow {
                degree: (self.degree)(e),
                edges: e,
                dim,
                cell_dims,
                rank_in: ri,
                rank_out: ro,
                h: dim - ri - ro,
                status,
            });
        }
        Ok((rows, matrices))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EulerReport {
    /// `sum_E (-1)^E dim` per boundary count.
    pub per_boundaries: BTreeMap<usize, i64>,
    pub total: i64,
    /// `sum_E (-1)^E h` over the same (possibly truncated) range.
    pub from_cohomology: i64,
}

fn alt(e: usize, x: usize) -> i64 {
    if e.is_multiple_of(2) {
        x as i64
    } else {
        -(x as i64)
    }
}

pub fn euler(slice: &ComplexSlice, table: &CohomologyTable) -> EulerReport {
    let mut per_boundaries: BTreeMap<usize, i64> = BTreeMap::new();
    for (&e, cs) in &slice.cells {
        for c in cs {
            *per_boundaries.entry(c.key.boundaries).or_default() += alt(e, c.dim());
        }
    }
    EulerReport {
        total: per_boundaries.values().sum(),
        per_boundaries,
        from_cohomology: table.rows.iter().map(|r| alt(r.edges, r.h)).sum(),
    }
}

/// Lowest degree carrying cohomology among certified rows.
pub fn lowest_certified_class(table: &CohomologyTable) -> Option<i64> {
    table.certified().filter(|r| r.h > 0).map(|r| r.degree).min()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Calc1Comparison {
    /// Computed degree minus the expected degree.
    pub offset: Option<i64>,
    /// `(computed degree, computed h, expected h)` over certified rows.
    pub matched: Vec<(i64, usize, u64)>,
    pub agrees: bool,
}

/// Aligns a genus-one table with the expected pattern. The offset is read
/// off from the lowest certified class, which should be the isolated class
/// at `2 + 2d`; every certified degree is then compared.
pub fn compare_calc1(table: &CohomologyTable) -> Calc1Comparison {
    let d = table.spec.d;
    let Some(low) = lowest_certified_class(table) else {
        return Calc1Comparison {
            offset: None,
            matched: Vec::new(),
            agrees: false,
        };
    };
    let offset = low - (2 + 2 * d);
    let certified: Vec<&CohomologyRow> = table.certified().collect();
    let (lo, hi) = match (certified.first(), certified.last()) {
        (Some(a), Some(b)) => (a.degree - offset, b.degree - offset),
        _ => (0, -1),
    };
    let expected = crate::modular::calc1_expectation(d, lo, hi);
    let matched: Vec<(i64, usize, u64)> = certified
        .iter()
        .map(|r| (r.degree, r.h, expected.get(&(r.degree - offset)).copied().unwrap_or(0)))
        .collect();
    let agrees = matched.iter().all(|&(_, h, x)| h as u64 == x);
    Calc1Comparison {
        offset: Some(offset),
        matched,
        agrees,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Context {
        Context::new(Cache::disabled())
    }

    #[test]
    fn spec_validation() {
        assert!(ComplexSpec::kp(0, 2, 0, Sector::Le2, 1, 4).validate().is_ok());
        assert!(ComplexSpec::mw(0, 0, Sector::Le2, 1, 4).validate().is_err());
        assert!(ComplexSpec::kp(0, 0, 0, Sector::Full, 1, 4).validate().is_err());
        assert!(ComplexSpec::mw(0, 0, Sector::Full, 3, 2).validate().is_err());
        let mut s = ComplexSpec::mw(1, 0, Sector::Full, 1, 3);
        s.boundaries = Some(1);
        assert!(s.validate().is_err());
    }

    #[test]
    fn degrees_and_grid() {
        let s = ComplexSpec::mw(1, 1, Sector::Full, 1, 5);
        assert_eq!(s.degree(5), 3);
        assert_eq!(s.boundary_counts(3), vec![1, 2]);
        assert_eq!(s.boundary_counts(1), Vec::<usize>::new());
    }

    #[test]
    fn sector_membership() {
        let s0: Vec<Half> = vec![1, 0, 3, 2];
        assert!(Sector::Le2.contains(&s0));
        assert!(!Sector::Ge3.contains(&s0));
        let s0: Vec<Half> = vec![1, 2, 0, 3];
        assert!(!Sector::Full.contains(&s0));
    }

    #[test]
    fn genus_two_small_cells_are_empty() {
        let spec = ComplexSpec::kp(2, 1, 0, Sector::Ge3, 1, 3);
        let slice = build(&spec, &ctx()).unwrap();
        assert!((1..=3).all(|e| slice.dim(e) == 0));
        assert!((1..=3).all(|e| spec.forced_empty(e)));
        assert!(!spec.forced_empty(4));
    }

    #[test]
    fn loop_sector_small_range() {
        let spec = ComplexSpec::kp(0, 2, 0, Sector::Le2, 1, 4);
        let slice = build(&spec, &ctx()).unwrap();
        assert!((1..=4).all(|e| slice.dim(e) <= 1));
        assert_eq!(slice.dim(1), 1);
        let t = cohomology(&slice).unwrap();
        assert_eq!(t.row(1).unwrap().h, 1);
        assert_eq!(t.row(4).unwrap().status, Status::Truncated);
        let eu = euler(&slice, &t);
        assert_eq!(eu.total, eu.from_cohomology);
    }

    #[test]
    fn mw_genus0_blocks_raise_boundaries() {
        let spec = ComplexSpec::mw(0, 0, Sector::Full, 1, 3);
        let slice = build(&spec, &ctx()).unwrap();
        for b in slice.blocks.values().flatten() {
            let dn = b.target.boundaries - b.source.boundaries;
            assert_eq!(dn, if b.op == Op::Delta { 0 } else { 1 });
            assert_eq!(b.target.edges, b.source.edges + 1);
        }
        let t = cohomology(&slice).unwrap();
        assert!(t.composites_vanish());
    }

    #[test]
    fn kp_genus1_theta_window() {
        let spec = ComplexSpec::kp(1, 1, 0, Sector::Ge3, 2, 3);
        let slice = build(&spec, &ctx()).unwrap();
        let t = cohomology(&slice).unwrap();
        let r3 = t.row(3).unwrap();
        assert_eq!((r3.h, r3.status), (1, Status::Certified));
        assert_eq!(t.row(2).unwrap().h, 0);
    }

    #[test]
    fn cached_build_replays_identically() {
        let dir = tempfile::tempdir().unwrap();
        let spec = ComplexSpec::mw(0, 1, Sector::Ge3, 1, 5);
        let a = build(&spec, &Context::new(Cache::at(dir.path()))).unwrap();
        let b = build(&spec, &Context::new(Cache::at(dir.path()))).unwrap();
        for e in 1..5 {
            assert_eq!(a.differential(e).unwrap(), b.differential(e).unwrap());
        }
        assert_eq!(a.dropped_terms(), b.dropped_terms());
        assert_eq!(cohomology(&a).unwrap(), cohomology(&b).unwrap());
    }
}
