//! The verification suite: identity checks, the enumeration oracle, the
//! reference cohomology computations, and their pass/fail evaluation.
//!
//! The payload holds results only (no timings), so two runs can be compared
//! byte for byte.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::cache::Cache;
use crate::canonical::Parity;
use crate::complex::{
    build, cohomology, compare_calc1, euler, Calc1Comparison, CohomologyTable, ComplexSpec, Context, EulerReport, Sector, Status,
};
use crate::enumerate::{Census, BRUTE_FORCE_MAX_HALF_EDGES};
use crate::error::ComplexError;
use crate::gc::{gc_build, gc_cohomology, gc_enumerate, gc_enumerate_bruteforce, GcSpec, GcTable, BRUTE_FORCE_MAX_VERTICES};
use crate::identities::{check_parities, IdentityBounds, IdentityReport};
use crate::ribbon::RibbonGraph;

const SHAPE_CHECKS: [&str; 2] = ["delta term shape", "bridgeland term shape"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    /// Each entry is checked in both parities.
    pub identity_bounds: Vec<IdentityBounds>,
    pub oracle_max_edges: usize,
    pub loop_sector: ComplexSpec,
    pub loop_sector_edges: usize,
    pub mw_genus0: ComplexSpec,
    pub mw_genus0_edges: usize,
    pub kp_genus1: ComplexSpec,
    pub mw_genus1: ComplexSpec,
    pub gc: Vec<GcSpec>,
    /// Loop order expected to carry the single class.
    pub gc_class_loop_order: usize,
    /// Tables recomputed in odd parity for side-by-side dimensions.
    pub cross_parity: Vec<ComplexSpec>,
}

impl SuiteConfig {
    /// The full acceptance bounds.
    pub fn acceptance() -> Self {
        SuiteConfig {
            identity_bounds: vec![
                IdentityBounds {
                    genus_min: 0,
                    genus_max: 2,
                    edges_max: 6,
                    min_valence: 1,
                },
                IdentityBounds {
                    genus_min: 0,
                    genus_max: 1,
                    edges_max: 8,
                    min_valence: 3,
                },
                IdentityBounds {
                    genus_min: 2,
                    genus_max: 2,
                    edges_max: 7,
                    min_valence: 3,
                },
            ],
            oracle_max_edges: BRUTE_FORCE_MAX_HALF_EDGES / 2,
            loop_sector: ComplexSpec::kp(0, 2, 0, Sector::Le2, 1, 10),
            loop_sector_edges: 9,
            mw_genus0: ComplexSpec::mw(0, 0, Sector::Ge3, 1, 8),
            mw_genus0_edges: 7,
            kp_genus1: ComplexSpec::kp(1, 1, 0, Sector::Ge3, 2, 3),
            mw_genus1: ComplexSpec::mw(1, 0, Sector::Ge3, 1, 8),
            gc: vec![GcSpec::new(1, 1, 1, 10), GcSpec::new(2, 1, 1, 10), GcSpec::new(3, 1, 1, 9)],
            gc_class_loop_order: 3,
            cross_parity: vec![
                ComplexSpec::kp(0, 2, 1, Sector::Le2, 1, 10),
                ComplexSpec::mw(0, 1, Sector::Ge3, 1, 7),
            ],
        }
    }

    /// Small bounds for smoke tests; same structure, seconds to run.
    pub fn quick() -> Self {
        SuiteConfig {
            identity_bounds: vec![IdentityBounds {
                genus_min: 0,
                genus_max: 1,
                edges_max: 5,
                min_valence: 2,
            }],
            oracle_max_edges: 3,
            loop_sector: ComplexSpec::kp(0, 2, 0, Sector::Le2, 1, 6),
            loop_sector_edges: 5,
            mw_genus0: ComplexSpec::mw(0, 0, Sector::Ge3, 1, 6),
            mw_genus0_edges: 5,
            kp_genus1: ComplexSpec::kp(1, 1, 0, Sector::Ge3, 2, 3),
            mw_genus1: ComplexSpec::mw(1, 0, Sector::Ge3, 1, 6),
            gc: vec![GcSpec::new(2, 1, 1, 7), GcSpec::new(3, 1, 1, 8)],
            gc_class_loop_order: 3,
            cross_parity: vec![ComplexSpec::kp(0, 2, 1, Sector::Le2, 1, 6)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleMismatch {
    pub genus: usize,
    pub boundaries: usize,
    pub edges: usize,
    pub min_valence: usize,
    pub fast: usize,
    pub brute: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleReport {
    pub max_edges: usize,
    /// Class counts per `g{g}_n{n}_e{E}_m{m}` for nonempty specs.
    pub classes: BTreeMap<String, usize>,
    pub mismatches: Vec<OracleMismatch>,
    /// GC² class counts checked against the edge-subset scan.
    pub gc_checked: BTreeMap<String, usize>,
    pub gc_mismatches: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableWithEuler {
    pub table: CohomologyTable,
    pub euler: EulerReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuitePayload {
    pub config: SuiteConfig,
    pub identities: Vec<IdentityReport>,
    pub oracle: OracleReport,
    pub loop_sector: TableWithEuler,
    pub mw_genus0: TableWithEuler,
    pub kp_genus1: TableWithEuler,
    pub mw_genus1: TableWithEuler,
    pub calc1: Calc1Comparison,
    pub gc: Vec<GcTable>,
    pub cross_parity: Vec<TableWithEuler>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "{} criterion {:>2} {}: {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail
        )
    }
}

fn table(spec: &ComplexSpec, ctx: &Context) -> Result<TableWithEuler, ComplexError> {
    let slice = build(spec, ctx)?;
    let table = cohomology(&slice)?;
    let euler = euler(&slice, &table);
    Ok(TableWithEuler { table, euler })
}

pub fn enumeration_oracle(ctx: &Context, max_edges: usize) -> Result<OracleReport, ComplexError> {
    let mut classes = BTreeMap::new();
    let mut mismatches = Vec::new();
    for edges in 1..=max_edges {
        let census = Census::scan(edges).map_err(ComplexError::Refused)?;
        for genus in 0..=edges.div_ceil(2) {
            for n in 1..=edges + 1 {
                for m in 1..=3 {
                    let fast: BTreeSet<RibbonGraph> = ctx.enumerator.graphs(genus, n, edges, m).iter().cloned().collect();
                    let brute = census.classes(genus, n, m);
                    if !fast.is_empty() {
                        classes.insert(format!("g{genus}_n{n}_e{edges}_m{m}"), fast.len());
                    }
                    if fast != brute {
                        mismatches.push(OracleMismatch {
                            genus,
                            boundaries: n,
                            edges,
                            min_valence: m,
                            fast: fast.len(),
                            brute: brute.len(),
                        });
                    }
                }
            }
        }
    }
    let mut gc_checked = BTreeMap::new();
    let mut gc_mismatches = Vec::new();
    for l in 1..=3 {
        for e in 1..=(BRUTE_FORCE_MAX_VERTICES + l - 1) {
            for m in 2..=3 {
                let fast = gc_enumerate(l, e, m)?;
                let brute = gc_enumerate_bruteforce(l, e, m)?;
                let key = format!("l{l}_e{e}_m{m}");
                if fast != brute {
                    gc_mismatches.push(key.clone());
                }
                if !fast.is_empty() {
                    gc_checked.insert(key, fast.len());
                }
            }
        }
    }
    Ok(OracleReport {
        max_edges,
        classes,
        mismatches,
        gc_checked,
        gc_mismatches,
    })
}

/// Runs every computation of the suite on the current rayon pool.
pub fn run_suite(config: &SuiteConfig, ctx: &Context) -> Result<SuitePayload, ComplexError> {
    let mut identities = Vec::new();
    for &b in &config.identity_bounds {
        identities.extend(check_parities(
            &ctx.enumerator,
            ctx.convention,
            None,
            b,
            &[Parity::Even, Parity::Odd],
        ));
    }
    let oracle = enumeration_oracle(ctx, config.oracle_max_edges)?;
    let loop_sector = table(&config.loop_sector, ctx)?;
    let mw_genus0 = table(&config.mw_genus0, ctx)?;
    let kp_genus1 = table(&config.kp_genus1, ctx)?;
    let mw_genus1 = table(&config.mw_genus1, ctx)?;
    let calc1 = compare_calc1(&mw_genus1.table);
    let gc = config
        .gc
        .iter()
        .map(|s| gc_build(s, &ctx.cache).and_then(|sl| gc_cohomology(&sl)))
        .collect::<Result<_, _>>()?;
    let cross_parity = config.cross_parity.iter().map(|s| table(s, ctx)).collect::<Result<_, _>>()?;
    Ok(SuitePayload {
        config: config.clone(),
        identities,
        oracle,
        loop_sector,
        mw_genus0,
        kp_genus1,
        mw_genus1,
        calc1,
        gc,
        cross_parity,
    })
}

/// Runs the suite on a pool of `jobs` threads.
pub fn run_suite_with_jobs(config: &SuiteConfig, cache: Cache, jobs: usize) -> Result<SuitePayload, ComplexError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| ComplexError::InvalidSpec(e.to_string()))?;
    pool.install(|| run_suite(config, &Context::new(cache)))
}

pub fn payload_json(p: &SuitePayload) -> String {
    serde_json::to_string_pretty(p).expect("payload serializes")
}

fn certified_h(t: &CohomologyTable, max_edges: usize) -> Vec<(usize, usize, Status)> {
    t.rows
        .iter()
        .filter(|r| r.edges <= max_edges)
        .map(|r| (r.edges, r.h, r.status))
        .collect()
}

fn identity_counts(p: &SuitePayload, shape: bool) -> (usize, usize, Vec<String>) {
    let mut gens = 0;
    let mut bad = 0;
    let mut first = Vec::new();
    for r in &p.identities {
        gens += r.generators;
        for v in &r.violations {
            if SHAPE_CHECKS.contains(&v.check.as_str()) == shape {
                bad += 1;
                if first.len() < 3 {
                    first.push(format!("{:?} {} {}", r.parity, v.check, v.generator));
                }
            }
        }
    }
    (gens, bad, first)
}

fn matrices_certified(t: &CohomologyTable) -> (usize, usize) {
    (t.matrices.iter().filter(|m| m.rank.certified()).count(), t.matrices.len())
}

/// Pass/fail for criteria 1 to 9. Criterion 10 compares two payloads; see
/// [`determinism`].
pub fn evaluate(p: &SuitePayload) -> Vec<CriterionResult> {
    let mut out = Vec::new();
    let bounds: Vec<String> = p
        .config
        .identity_bounds
        .iter()
        .map(|b| format!("{}<=g<={} E<={} m>={}", b.genus_min, b.genus_max, b.edges_max, b.min_valence))
        .collect();

    let (gens, bad, first) = identity_counts(p, false);
    out.push(CriterionResult {
        id: 1,
        name: "differential identities".into(),
        pass: bad == 0 && gens > 0,
        detail: format!(
            "{gens} generator checks over [{}], both parities, {bad} violations {first:?}",
            bounds.join("; ")
        ),
    });

    let (gens, bad, first) = identity_counts(p, true);
    out.push(CriterionResult {
        id: 2,
        name: "term structure".into(),
        pass: bad == 0 && gens > 0,
        detail: format!("{gens} generator checks, {bad} shape violations {first:?}"),
    });

    let o = &p.oracle;
    out.push(CriterionResult {
        id: 3,
        name: "enumeration oracle".into(),
        pass: o.mismatches.is_empty() && o.gc_mismatches.is_empty() && !o.classes.is_empty(),
        detail: format!(
            "{} ribbon specs with 2E<={}, {} gc specs; {} + {} mismatches",
            o.classes.len(),
            2 * o.max_edges,
            o.gc_checked.len(),
            o.mismatches.len(),
            o.gc_mismatches.len()
        ),
    });

    let t = &p.loop_sector.table;
    let rows = certified_h(t, p.config.loop_sector_edges);
    let ok =
        rows.len() == p.config.loop_sector_edges && rows.iter().all(|&(e, h, s)| s == Status::Certified && h == usize::from(e % 4 == 1));
    let nonzero: Vec<i64> = t.certified().filter(|r| r.h > 0).map(|r| r.degree).collect();
    out.push(CriterionResult {
        id: 4,
        name: "loop classes".into(),
        pass: ok,
        detail: format!("classes in degrees {nonzero:?} for E<={}", p.config.loop_sector_edges),
    });

    let t = &p.mw_genus0.table;
    let rows = certified_h(t, p.config.mw_genus0_edges);
    let ok = rows.len() == p.config.mw_genus0_edges && rows.iter().all(|&(_, h, s)| s == Status::Certified && h == 0);
    out.push(CriterionResult {
        id: 5,
        name: "genus-0 acyclicity".into(),
        pass: ok,
        detail: format!(
            "h={:?} for E<={}; {} terms projected out",
            rows.iter().map(|r| r.1).collect::<Vec<_>>(),
            p.config.mw_genus0_edges,
            t.dropped_terms
        ),
    });

    let t = &p.kp_genus1.table;
    let rows: Vec<(usize, usize, Status)> = certified_h(t, usize::MAX);
    let ok = rows.iter().all(|&(e, h, s)| s == Status::Certified && h == usize::from(e == 3)) && rows.iter().any(|r| r.0 == 3);
    out.push(CriterionResult {
        id: 6,
        name: "(1,1) sector".into(),
        pass: ok,
        detail: format!("(E, h) = {:?}", rows.iter().map(|r| (r.0, r.1)).collect::<Vec<_>>()),
    });

    let c = &p.calc1;
    out.push(CriterionResult {
        id: 7,
        name: "genus-1 modular pattern".into(),
        pass: c.agrees && c.offset.is_some() && c.matched.len() >= 2,
        detail: format!("offset {:?}; (degree, h, expected) {:?}", c.offset, c.matched),
    });

    let tables = [&p.loop_sector.table, &p.mw_genus0.table, &p.kp_genus1.table, &p.mw_genus1.table];
    let (good, all) = tables
        .iter()
        .map(|t| matrices_certified(t))
        .fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    out.push(CriterionResult {
        id: 8,
        name: "rank certification".into(),
        pass: good == all,
        detail: format!("{good}/{all} matrices agree modulo both primes"),
    });

    let classes: Vec<(usize, i64, usize)> =
        p.gc.iter()
            .flat_map(|t| t.certified().filter(|r| r.h > 0).map(move |r| (t.spec.loop_order, r.degree, r.h)))
            .collect();
    let want = p.config.gc_class_loop_order;
    let composites: usize = p.gc.iter().flat_map(|t| &t.matrices).map(|m| m.composite_nonzero).sum();
    let ok = classes.len() == 1 && classes[0].0 == want && classes[0].2 == 1 && composites == 0;
    out.push(CriterionResult {
        id: 9,
        name: "GC2 sanity".into(),
        pass: ok,
        detail: format!("certified classes (loop order, degree, h) {classes:?}, expected one at loop order {want}; {composites} nonzero entries in gc_delta^2"),
    });
    out
}

/// Criterion 10: two runs with different thread counts sharing one cache
/// directory, the first cold and the second warm.
pub fn determinism(a: &SuitePayload, b: &SuitePayload, jobs: (usize, usize)) -> CriterionResult {
    let (ja, jb) = (payload_json(a), payload_json(b));
    CriterionResult {
        id: 10,
        name: "determinism and cache".into(),
        pass: ja == jb,
        detail: format!(
            "--jobs {} vs --jobs {}: {} vs {} payload bytes, identical: {}",
            jobs.0,
            jobs.1,
            ja.len(),
            jb.len(),
            ja == jb
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes() {
        let p = run_suite(&SuiteConfig::quick(), &Context::new(Cache::disabled())).unwrap();
        let r = evaluate(&p);
        assert_eq!(r.len(), 9);
        for c in &r {
            assert!(c.pass, "{}", c.line());
        }
    }
}
