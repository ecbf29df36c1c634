//! Pointwise checks of `d^2 = 0` for both differentials and their
//! anticommutator, plus the structural invariants of each raw term.

use std::collections::BTreeMap;

use num_rational::Rational64;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::canonical::{classify_both, content_hash, Parity};
use crate::differential::{
    bridgeland_terms, classify, delta_terms, visit_bridgeland_both, visit_delta_both, FormalSum, RawTerm, SplitConvention,
};
use crate::enumerate::{EnumSpec, Enumerator};
use crate::ribbon::{Half, RibbonGraph};

/// Deliberate sign error for exercising the checker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fault {
    /// Negate the first raw vertex-splitting term of every graph.
    NegateFirstSplit,
}

#[derive(Debug, Clone, Copy)]
pub struct Operators {
    pub parity: Parity,
    pub conv: SplitConvention,
    pub fault: Option<Fault>,
}

impl Operators {
    pub fn new(parity: Parity) -> Self {
        Operators {
            parity,
            conv: SplitConvention::default(),
            fault: None,
        }
    }

    fn collect(&self, terms: Vec<RawTerm>) -> FormalSum {
        let mut s = FormalSum::zero(self.parity);
        for (t, or, sign) in terms {
            if let Some((c, rel)) = classify(&t, &or) {
                s.add_canonical(c, Rational64::from((sign * rel) as i64));
            }
        }
        s
    }

    pub fn delta(&self, g: &RibbonGraph) -> FormalSum {
        let mut terms = delta_terms(g, self.parity, self.conv);
        if self.fault == Some(Fault::NegateFirstSplit) {
            if let Some(t) = terms.first_mut() {
                t.2 = -t.2;
            }
        }
        self.collect(terms)
    }

    pub fn bridgeland(&self, g: &RibbonGraph) -> FormalSum {
        self.collect(bridgeland_terms(g, self.parity))
    }

    pub fn delta_of(&self, s: &FormalSum) -> FormalSum {
        s.map_linear(|g| self.delta(g))
    }

    pub fn bridgeland_of(&self, s: &FormalSum) -> FormalSum {
        s.map_linear(|g| self.bridgeland(g))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub check: String,
    pub generator: String,
    pub graph: RibbonGraph,
    pub residual_terms: usize,
}

/// Integer combinations of canonical codes (canonical `sigma0`; `sigma1` is
/// the standard pairing), one coefficient per parity.
#[derive(Default)]
struct Acc(FxHashMap<Vec<Half>, [i64; 2]>);

impl Acc {
    fn add(&mut self, code: &[Half], c: [i64; 2]) {
        match self.0.get_mut(code) {
            Some(v) => {
                v[0] += c[0];
                v[1] += c[1];
                if *v == [0, 0] {
                    self.0.remove(code);
                }
            }
            None => {
                if c != [0, 0] {
                    self.0.insert(code.to_vec(), c);
                }
            }
        }
    }

    fn sorted(&self) -> Vec<(&Vec<Half>, [i64; 2])> {
        let mut v: Vec<_> = self.0.iter().map(|(k, &c)| (k, c)).collect();
        v.sort();
        v
    }

    fn support(&self, p: usize) -> usize {
        self.0.values().filter(|c| c[p] != 0).count()
    }
}

/// Contribution of one raw term: `c * sign * rel` per parity, zero where the
/// class vanishes.
fn contrib(c: [i64; 2], sign: [i8; 2], rel: [Option<i8>; 2]) -> [i64; 2] {
    let one = |p: usize| rel[p].map_or(0, |r| c[p] * (sign[p] * r) as i64);
    [one(0), one(1)]
}

/// Both parities of the identity checks in one pass: the canonical labelling
/// of a term does not depend on the parity, only its sign does.
struct Engine {
    conv: SplitConvention,
    fault: Option<Fault>,
}

impl Engine {
    fn apply_delta(&self, g: &RibbonGraph, c: [i64; 2], acc: &mut Acc) {
        let mut first = self.fault == Some(Fault::NegateFirstSplit);
        visit_delta_both(g, self.conv, |s0, s1, ors, sign| {
            let sign = if std::mem::take(&mut first) { [-sign[0], -sign[1]] } else { sign };
            let ors = [(c[0] != 0).then_some(ors[0]), (c[1] != 0).then_some(ors[1])];
            classify_both(s0, s1, ors, |code, rel| acc.add(code, contrib(c, sign, rel)));
        });
    }

    fn apply_bridgeland(&self, g: &RibbonGraph, c: [i64; 2], acc: &mut Acc) {
        visit_bridgeland_both(g, |s0, s1, ors, sign| {
            let ors = [(c[0] != 0).then_some(ors[0]), (c[1] != 0).then_some(ors[1])];
            classify_both(s0, s1, ors, |code, rel| acc.add(code, contrib(c, sign, rel)));
        });
    }

    /// Violations per parity; `active[p]` says whether `g` is a generator in
    /// parity `p`.
    fn check(&self, g: &RibbonGraph, active: [bool; 2]) -> [Vec<Violation>; 2] {
        let unit = [active[0] as i64, active[1] as i64];
        let mut d = Acc::default();
        let mut b = Acc::default();
        self.apply_delta(g, unit, &mut d);
        self.apply_bridgeland(g, unit, &mut b);
        let mut dd = Acc::default();
        let mut bb = Acc::default();
        let mut anti = Acc::default();
        // sorted so that the order of accumulation is reproducible
        for (code, c) in d.sorted() {
            let y = RibbonGraph::from_sigma0_standard(code.clone());
            self.apply_delta(&y, c, &mut dd);
            self.apply_bridgeland(&y, c, &mut anti);
        }
        for (code, c) in b.sorted() {
            let y = RibbonGraph::from_sigma0_standard(code.clone());
            self.apply_delta(&y, c, &mut anti);
            self.apply_bridgeland(&y, c, &mut bb);
        }
        let (e, v, n) = (g.num_edges(), g.num_vertices(), g.num_boundaries());
        let genus = g.genus();
        let mut bad_delta = false;
        visit_delta_both(g, self.conv, |s0, s1, _, _| {
            let t = RibbonGraph::from_raw(s0.to_vec(), s1.to_vec());
            bad_delta |= !(t.num_edges() == e + 1 && t.num_vertices() == v + 1 && t.num_boundaries() == n && t.genus() == genus);
        });
        let mut bad_bridge = false;
        visit_bridgeland_both(g, |s0, s1, _, _| {
            let t = RibbonGraph::from_raw(s0.to_vec(), s1.to_vec());
            bad_bridge |= !(t.num_edges() == e + 1 && t.num_vertices() == v && t.num_boundaries() == n + 1 && t.genus() == genus);
        });
        let mut out = [Vec::new(), Vec::new()];
        for (p, parity) in [Parity::Even, Parity::Odd].into_iter().enumerate() {
            if !active[p] {
                continue;
            }
            let hash = content_hash("ribbon", g, parity);
            let mut fail = |check: &str, residual: usize| {
                out[p].push(Violation {
                    check: check.to_string(),
                    generator: hash.clone(),
                    graph: g.clone(),
                    residual_terms: residual,
                })
            };
            for (name, acc) in [("delta^2", &dd), ("bridgeland^2", &bb), ("anticommutator", &anti)] {
                let r = acc.support(p);
                if r > 0 {
                    fail(name, r);
                }
            }
            if bad_delta {
                fail("delta term shape", 1);
            }
            if bad_bridge {
                fail("bridgeland term shape", 1);
            }
        }
        out
    }
}

/// Checks every identity on one canonical generator. Returns violations.
pub fn check_generator(ops: &Operators, g: &RibbonGraph) -> Vec<Violation> {
    let engine = Engine {
        conv: ops.conv,
        fault: ops.fault,
    };
    let p = ops.parity as usize;
    let mut active = [false; 2];
    active[p] = true;
    let [even, odd] = engine.check(g, active);
    if p == 0 {
        even
    } else {
        odd
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityBounds {
    #[serde(default)]
    pub genus_min: usize,
    pub genus_max: usize,
    pub edges_max: usize,
    pub min_valence: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub parity: Parity,
    pub bounds: IdentityBounds,
    /// Generators checked per `(genus, boundaries, edges)`.
    pub checked: BTreeMap<String, usize>,
    pub generators: usize,
    pub violations: Vec<Violation>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Runs [`check_generator`] over every nonzero class inside the bounds.
pub fn check_all(enumerator: &Enumerator, ops: &Operators, bounds: IdentityBounds) -> IdentityReport {
    check_parities(enumerator, ops.conv, ops.fault, bounds, &[ops.parity]).remove(0)
}

/// One report per requested parity, sharing the canonicalization work.
pub fn check_parities(
    enumerator: &Enumerator,
    conv: SplitConvention,
    fault: Option<Fault>,
    bounds: IdentityBounds,
    parities: &[Parity],
) -> Vec<IdentityReport> {
    let engine = Engine { conv, fault };
    let mut checked = [BTreeMap::new(), BTreeMap::new()];
    let mut violations = [Vec::new(), Vec::new()];
    let mut generators = [0, 0];
    for genus in bounds.genus_min..=bounds.genus_max {
        for e in 1..=bounds.edges_max {
            for n in 1..=(e + 1).saturating_sub(2 * genus) {
                let mut block: BTreeMap<RibbonGraph, [bool; 2]> = BTreeMap::new();
                for &parity in parities {
                    let spec = EnumSpec::new(genus, n, e, bounds.min_valence, parity);
                    let classes = enumerator.enumerate(spec).classes;
                    if !classes.is_empty() {
                        checked[parity as usize].insert(format!("g{genus}_n{n}_e{e}"), classes.len());
                    }
                    generators[parity as usize] += classes.len();
                    for c in classes {
                        block.entry(c.canonical_graph).or_default()[parity as usize] = true;
                    }
                }
                let block: Vec<_> = block.into_iter().collect();
                let found: Vec<[Vec<Violation>; 2]> = block.par_iter().map(|(g, active)| engine.check(g, *active)).collect();
                for [even, odd] in found {
                    violations[0].extend(even);
                    violations[1].extend(odd);
                }
            }
        }
    }
    parities
        .iter()
        .map(|&parity| {
            let p = parity as usize;
            IdentityReport {
                parity,
                bounds,
                checked: std::mem::take(&mut checked[p]),
                generators: generators[p],
                violations: std::mem::take(&mut violations[p]),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::canonicalize;
    use crate::ribbon::named::*;

    #[test]
    fn identities_hold_on_small_graphs() {
        for parity in [Parity::Even, Parity::Odd] {
            let ops = Operators::new(parity);
            for g in [
                loop_graph(),
                segment(),
                banana(),
                double_loop(),
                theta_genus1(),
                theta_planar(),
                dumbbell(),
            ] {
                let c = canonicalize(&g).unwrap().graph;
                assert!(check_generator(&ops, &c).is_empty(), "{parity:?} {g:?}");
            }
        }
    }

    #[test]
    fn injected_fault_is_reported() {
        let e = Enumerator::new();
        let mut ops = Operators::new(Parity::Even);
        ops.fault = Some(Fault::NegateFirstSplit);
        let bounds = IdentityBounds {
            genus_min: 0,
            genus_max: 1,
            edges_max: 4,
            min_valence: 2,
        };
        let r = check_all(&e, &ops, bounds);
        assert!(!r.passed());
        assert!(r.violations.iter().any(|v| v.check == "delta^2"));
    }

    #[test]
    fn empty_bounds_pass() {
        let e = Enumerator::new();
        let bounds = IdentityBounds {
            genus_min: 0,
            genus_max: 0,
            edges_max: 0,
            min_valence: 2,
        };
        let r = check_all(&e, &Operators::new(Parity::Odd), bounds);
        assert!(r.passed());
        assert_eq!(r.generators, 0);
    }
}
