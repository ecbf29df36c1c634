use std::collections::BTreeMap;

use num_bigint::BigInt;
use proptest::prelude::*;

use rgc_core::cache::Cache;
use rgc_core::canonical::{canonical_form, is_isomorphic, Parity};
use rgc_core::complex::{build, cohomology, compare_calc1, euler, ComplexSpec, Context, Sector, Status};
use rgc_core::differential::attach_edge;
use rgc_core::enumerate::{cell_vertices, enumerate_bruteforce, Census, EnumSpec, Enumerator};
use rgc_core::gc::{classify as gc_classify, gc_build, gc_cohomology, gc_enumerate, gc_enumerate_bruteforce, GcSpec, SimpleGraph};
use rgc_core::linalg::{cohomology_dims, SparseIntMatrix, PRIMES};
use rgc_core::modular::{calc1_expectation, modular_dims};
use rgc_core::ribbon::named::*;
use rgc_core::ribbon::{Corner, RibbonGraph};

fn count(g: usize, n: usize, e: usize, m: usize) -> usize {
    Enumerator::new().enumerate(EnumSpec::new(g, n, e, m, Parity::Even)).total_classes()
}

#[test]
fn small_enumerations() {
    assert_eq!(count(0, 2, 1, 1), 1);
    assert_eq!(count(1, 1, 2, 3), 1);
    assert_eq!(count(0, 3, 3, 3), 2);
    assert_eq!(count(0, 1, 1, 1), 1);
    let theta0 = canonical_form(&theta_planar()).unwrap().0;
    let dumbbell = canonical_form(&dumbbell()).unwrap().0;
    let level = Enumerator::new().graphs(0, 3, 3, 3);
    let mut expected = vec![theta0, dumbbell];
    expected.sort();
    let mut got: Vec<RibbonGraph> = level.iter().cloned().collect();
    got.sort();
    assert_eq!(got, expected);
}

#[test]
fn inconsistent_spec_is_empty_with_note() {
    let r = Enumerator::new().enumerate(EnumSpec::new(1, 1, 0, 1, Parity::Even));
    assert!(r.classes.is_empty());
    assert!(r.note.is_some());
    assert!(cell_vertices(2, 1, 2, 3).is_err());
}

/// Independent recount: every rotation system on `2E` half-edges, bucketed
/// by invariants computed here from raw cycle counts.
fn raw_counts(e: usize) -> BTreeMap<(usize, usize, usize), usize> {
    let n = 2 * e;
    let cycles = |p: &[usize]| {
        let mut seen = vec![false; p.len()];
        let mut c = 0;
        for s in 0..p.len() {
            if !seen[s] {
                c += 1;
                let mut h = s;
                while !seen[h] {
                    seen[h] = true;
                    h = p[h];
                }
            }
        }
        c
    };
    let mut out = BTreeMap::new();
    let mut s0: Vec<usize> = (0..n).collect();
    loop {
        let g = RibbonGraph::new(s0.clone(), (0..n).map(|h| h ^ 1).collect()).unwrap();
        if g.is_connected() {
            let s2 = g.sigma2().iter().map(|&h| h as usize).collect::<Vec<_>>();
            let (v, b) = (cycles(&s0), cycles(&s2));
            let genus = (2 + e - v - b) / 2;
            let mv = g.min_valence();
            for m in 1..=mv.min(3) {
                *out.entry((genus, b, m)).or_insert(0) += 1;
            }
        }
        if !next_perm(&mut s0) {
            break;
        }
    }
    out
}

fn next_perm(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

#[test]
fn fast_enumerator_matches_brute_force() {
    let en = Enumerator::new();
    for e in 1..=4 {
        let census = Census::scan(e).unwrap();
        let raw = raw_counts(e);
        for genus in 0..=2 {
            for n in 1..=(e + 1).saturating_sub(2 * genus) {
                for m in 1..=3 {
                    let fast = en.graphs(genus, n, e, m);
                    let slow = census.classes(genus, n, m);
                    assert_eq!(
                        fast.iter().cloned().collect::<std::collections::BTreeSet<_>>(),
                        slow,
                        "g{genus} n{n} e{e} m{m}"
                    );
                    // orbit-stabilizer: labelled rotation systems sum to (2E)!/|Aut| per class,
                    // where only relabellings fixing the pairing act
                    let group = (1..=e).product::<usize>() << e;
                    let labelled: usize = slow
                        .iter()
                        .map(|g| {
                            let auts = rgc_core::canonical::automorphisms(g).unwrap().len();
                            group / auts
                        })
                        .sum();
                    assert_eq!(labelled, raw.get(&(genus, n, m)).copied().unwrap_or(0), "g{genus} n{n} e{e} m{m}");
                }
            }
        }
    }
}

#[test]
fn brute_force_guard() {
    assert!(enumerate_bruteforce(EnumSpec::new(0, 1, 6, 1, Parity::Even)).is_err());
    let r = enumerate_bruteforce(EnumSpec::new(1, 1, 3, 3, Parity::Even)).unwrap();
    let fast = Enumerator::new().enumerate(EnumSpec::new(1, 1, 3, 3, Parity::Even));
    assert_eq!(r.classes, fast.classes);
    assert_eq!(r.zero_classes, fast.zero_classes);
    let theta1 = canonical_form(&theta_genus1()).unwrap().0;
    assert!(Census::scan(3).unwrap().classes(1, 1, 3).contains(&theta1));
}

#[test]
fn basis_tables() {
    let en = Enumerator::new();
    let t = en.basis_table(0, 1, 1, Parity::Even);
    assert_eq!(t.get(&(1, 1)), Some(&1));
    assert_eq!(t.get(&(2, 1)), Some(&1));
    assert!(en.basis_table(2, 2, 3, Parity::Even).values().all(|&v| v == 0));
    let t = en.basis_table(1, 3, 3, Parity::Even);
    for (&(n, e), &v) in &t {
        let slow = enumerate_bruteforce(EnumSpec::new(1, n, e, 3, Parity::Even)).unwrap();
        assert_eq!(v, slow.classes.len(), "n{n} e{e}");
    }
    // the double loop is a class, but a zero one in even parity
    assert_eq!((count(1, 1, 2, 3), t[&(1, 2)]), (1, 0));
    assert!(t[&(1, 3)] > 0);
}

#[test]
fn attaching_an_edge_inside_a_boundary() {
    let b = banana();
    let t = attach_edge(&b, Corner(0), Corner(3)).unwrap();
    assert_eq!((t.num_edges(), t.num_vertices(), t.num_boundaries()), (3, 2, 3));
    assert_eq!(t.genus().unwrap(), 0);
    assert!(is_isomorphic(&t, &theta_planar()).unwrap());
    assert!(attach_edge(&b, Corner(0), Corner(0)).is_err());
}

#[test]
fn linear_algebra_examples() {
    assert_eq!(SparseIntMatrix::zero(3, 4).rank(), 0);
    assert_eq!(SparseIntMatrix::from_dense(&[vec![1, 2], vec![2, 4]]).rank(), 1);
    let id = SparseIntMatrix::identity(5);
    assert!(PRIMES.iter().all(|&p| id.rank_modp(p).unwrap() == 5));
    let p = PRIMES[0];
    let m = SparseIntMatrix::from_triplets(1, 1, [(0, 0, BigInt::from(p))]).unwrap();
    assert_eq!((m.rank(), m.rank_modp(p).unwrap()), (1, 0));
    assert!(m.rank_modp(1_000_000).is_err());

    let z = SparseIntMatrix::zero(0, 3);
    assert_eq!(cohomology_dims(3, Some(&SparseIntMatrix::zero(3, 0)), Some(&z)).unwrap(), 3);
    let inj = SparseIntMatrix::from_dense(&[vec![1, 0], vec![0, 1], vec![1, 1]]);
    assert_eq!(cohomology_dims(2, Some(&SparseIntMatrix::zero(2, 0)), Some(&inj)).unwrap(), 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rank_agrees_with_modular_oracle(entries in proptest::collection::vec((0usize..30, 0usize..40, -9i64..10), 0..120)) {
        let mut dense = vec![vec![0i64; 40]; 30];
        for (r, c, v) in entries {
            dense[r][c] = v;
        }
        let m = SparseIntMatrix::from_dense(&dense);
        let r = m.rank();
        prop_assert_eq!(r, m.transpose().rank());
        for p in PRIMES {
            prop_assert_eq!(m.rank_modp(p).unwrap(), r);
        }
    }
}

fn ctx() -> Context {
    Context::new(Cache::disabled())
}

#[test]
fn loop_sector_example() {
    let spec = ComplexSpec::kp(0, 2, 0, Sector::Le2, 1, 6);
    let slice = build(&spec, &ctx()).unwrap();
    assert_eq!(slice.dim(1), 1);
    let t = cohomology(&slice).unwrap();
    let h: Vec<(usize, usize)> = t.certified().map(|r| (r.edges, r.h)).collect();
    assert_eq!(h, vec![(1, 1), (2, 0), (3, 0), (4, 0), (5, 1)]);
    assert_eq!(t.row(6).unwrap().status, Status::Truncated);
    let eu = euler(&slice, &t);
    assert_eq!(eu.total, eu.from_cohomology);
}

#[test]
fn mw_genus0_blocks() {
    let spec = ComplexSpec::mw(0, 0, Sector::Full, 1, 3);
    let slice = build(&spec, &ctx()).unwrap();
    for (e, cells) in &slice.cells {
        assert!(cells.iter().all(|c| c.key.boundaries <= e + 1 && c.key.genus == 0));
    }
    for blocks in slice.blocks.values() {
        for b in blocks {
            let dn = b.target.boundaries as i64 - b.source.boundaries as i64;
            assert_eq!(b.target.edges, b.source.edges + 1);
            assert_eq!(dn, if b.op == rgc_core::complex::Op::Delta { 0 } else { 1 });
        }
    }
    cohomology(&slice).unwrap();
}

#[test]
fn genus_two_trivalent_cells_are_empty() {
    let spec = ComplexSpec::kp(2, 1, 0, Sector::Ge3, 1, 3);
    let slice = build(&spec, &ctx()).unwrap();
    assert!((1..=3).all(|e| slice.dim(e) == 0));
}

#[test]
fn genus_one_one_boundary_trivalent() {
    let spec = ComplexSpec::kp(1, 1, 0, Sector::Ge3, 2, 3);
    let slice = build(&spec, &ctx()).unwrap();
    let t = cohomology(&slice).unwrap();
    let h: Vec<(usize, usize, Status)> = t.rows.iter().map(|r| (r.edges, r.h, r.status)).collect();
    assert_eq!(h, vec![(2, 0, Status::Certified), (3, 1, Status::Certified)]);
    let eu = euler(&slice, &t);
    assert_eq!(eu.total, slice.dim(2) as i64 - slice.dim(3) as i64);
    assert_eq!(eu.total, eu.from_cohomology);
    for m in &t.matrices {
        assert!(m.rank.certified());
    }
}

#[test]
fn cached_slices_replay() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ComplexSpec::mw(1, 0, Sector::Ge3, 1, 5);
    let a = cohomology(&build(&spec, &Context::new(Cache::at(dir.path()))).unwrap()).unwrap();
    let b = cohomology(&build(&spec, &Context::new(Cache::at(dir.path()))).unwrap()).unwrap();
    let c = cohomology(&build(&spec, &ctx()).unwrap()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
}

/// `dim M_k` counted as solutions of `4a + 6b = k`.
fn modular_forms_dim(k: i64) -> u64 {
    (0..=k / 4).filter(|a| (k - 4 * a) >= 0 && (k - 4 * a) % 6 == 0).count() as u64
}

#[test]
fn modular_dimensions_match_generator_count() {
    for k in 4..=60 {
        let (s, e) = modular_dims(k);
        if k % 2 == 0 {
            assert_eq!(s + e, modular_forms_dim(k), "k={k}");
            assert_eq!(e, 1);
        } else {
            assert_eq!((s, e), (0, 0));
        }
    }
    assert_eq!(modular_dims(12), (1, 1));
    assert_eq!(modular_dims(4), (0, 1));
    assert_eq!(modular_dims(2), (0, 0));
}

#[test]
fn genus_one_expectation() {
    let w = calc1_expectation(0, 2, 7);
    assert_eq!(w, BTreeMap::from([(2, 1), (3, 0), (4, 0), (5, 1), (6, 0), (7, 0)]));
    // the first cusp form pair sits at weight 12, n = 11, degree 2(11) - 1
    assert_eq!(calc1_expectation(0, 21, 21)[&21], 3);
    assert!(calc1_expectation(3, 0, 7).values().all(|&v| v == 0));
}

#[test]
fn genus_one_offset_is_reported() {
    let spec = ComplexSpec::mw(1, 0, Sector::Ge3, 1, 6);
    let t = cohomology(&build(&spec, &ctx()).unwrap()).unwrap();
    let c = compare_calc1(&t);
    assert_eq!(c.offset, Some(1));
    assert!(c.agrees);
}

#[test]
fn gc_examples() {
    assert!(gc_enumerate(1, 3, 2).unwrap().is_empty());
    let theta = SimpleGraph::new(2, &[(0, 1), (0, 1), (0, 1)]).unwrap();
    assert!(gc_classify(&theta).is_none());
    let k4 = SimpleGraph::new(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
    let (c, _) = gc_classify(&k4).unwrap();
    assert!(gc_enumerate(3, 6, 3).unwrap().contains(&c));
    for (l, e) in [(2, 4), (2, 5), (3, 6), (3, 7)] {
        assert_eq!(
            gc_enumerate(l, e, 2).unwrap(),
            gc_enumerate_bruteforce(l, e, 2).unwrap(),
            "L{l} E{e}"
        );
    }
    let t = gc_cohomology(&gc_build(&GcSpec::new(2, 1, 1, 8), &Cache::disabled()).unwrap()).unwrap();
    assert!(t.certified().all(|r| r.h == 0));
}
