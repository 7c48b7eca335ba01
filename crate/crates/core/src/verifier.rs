//! Independent verification of KS sets of any rank mixture: structural
//! soundness, the parity-proof census argument, and a brute-force search
//! for a noncontextual 0/1 assignment.
//!
//! The parity argument and the colorability search are deliberately two
//! separate routes to the same conclusion: a parity proof (odd basis count,
//! every projector an even number of times) implies no coloring exists, and
//! the backtracking search confirms it without shortcuts.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::catalog::{BasisId, Catalog, Projector};
use crate::linalg::{dot, CanonicalSubspace, RayId, DIM};
use crate::seeker::{Census, KsSet};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StructureViolation {
    #[error("basis {basis}: ray {ray} is used by more than one projector")]
    RayReuse { basis: BasisId, ray: RayId },
    #[error("basis {basis}: rays {a} and {b} are not orthogonal (dot {dot})")]
    NotOrthogonal {
        basis: BasisId,
        a: RayId,
        b: RayId,
        dot: i64,
    },
    #[error("basis {basis}: projector ranks sum to {sum}, expected {DIM}")]
    RankSum { basis: BasisId, sum: usize },
}

#[derive(Debug, Default)]
pub struct StructureReport {
    pub violations: Vec<StructureViolation>,
}

impl StructureReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for StructureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            write!(f, "structure ok")
        } else {
            for v in &self.violations {
                writeln!(f, "violation: {v}")?;
            }
            Ok(())
        }
    }
}

/// Per basis: underlying rays distinct, pairwise orthogonal (every ray of
/// one projector against every ray of another), and ranks summing to 8.
pub fn check_structure(catalog: &Catalog, set: &KsSet) -> StructureReport {
    let mut violations = Vec::new();
    for basis in set.bases() {
        let rays = basis.ray_set();
        for w in rays.windows(2) {
            if w[0] == w[1] {
                violations.push(StructureViolation::RayReuse {
                    basis: basis.index(),
                    ray: w[0],
                });
            }
        }
        for (i, &a) in rays.iter().enumerate() {
            for &b in &rays[i + 1..] {
                if a == b {
                    continue;
                }
                let d = dot(&catalog.ray(a), &catalog.ray(b));
                if d != 0 {
                    violations.push(StructureViolation::NotOrthogonal {
                        basis: basis.index(),
                        a,
                        b,
                        dot: d,
                    });
                }
            }
        }
        let sum = basis.rank_sum();
        if sum != DIM {
            violations.push(StructureViolation::RankSum {
                basis: basis.index(),
                sum,
            });
        }
    }
    StructureReport { violations }
}

/// True iff the number of bases is odd and every distinct projector occurs
/// an even number of times. The census is recomputed from the bases (the
/// stored one is not trusted) and returned alongside.
pub fn has_parity_proof(set: &KsSet) -> (bool, Census) {
    let census = Census::of_bases(set.bases());
    let ok = set.bases().len() % 2 == 1 && census.all_even();
    (ok, census)
}

/// A noncontextual 0/1 assignment: within every basis exactly one
/// projector is assigned 1. Projectors are identified by canonical
/// subspace, so one shared between bases has a single value.
#[derive(Clone, Debug)]
pub struct Coloring {
    entries: BTreeMap<CanonicalSubspace, (Projector, bool)>,
}

impl Coloring {
    pub fn value(&self, p: &Projector) -> Option<bool> {
        self.entries.get(p.subspace()).map(|e| e.1)
    }

    /// Projectors assigned 1.
    pub fn ones(&self) -> impl Iterator<Item = &Projector> {
        self.entries.values().filter(|e| e.1).map(|e| &e.0)
    }

    /// Replay the assignment: exactly one projector valued 1 per basis.
    pub fn satisfies(&self, set: &KsSet) -> bool {
        set.bases().iter().all(|basis| {
            let ones = basis
                .projectors()
                .iter()
                .filter(|p| self.value(p) == Some(true))
                .count();
            ones == 1
        })
    }
}

/// Exhaustive backtracking over projector assignments with the
/// exactly-one-per-basis constraint. Returns a witness coloring when one
/// exists, `None` when the search space is exhausted.
pub fn is_colorable(set: &KsSet) -> Option<Coloring> {
    // variables: distinct canonical subspaces
    let mut vars: Vec<Projector> = Vec::new();
    let mut ids: BTreeMap<CanonicalSubspace, usize> = BTreeMap::new();
    let mut bases: Vec<Vec<usize>> = Vec::new();
    for basis in set.bases() {
        let mut members = Vec::new();
        for p in basis.projectors() {
            let id = *ids.entry(p.subspace().clone()).or_insert_with(|| {
                vars.push(p.clone());
                vars.len() - 1
            });
            if !members.contains(&id) {
                members.push(id);
            }
        }
        bases.push(members);
    }
    let mut var_bases = vec![Vec::new(); vars.len()];
    for (b, members) in bases.iter().enumerate() {
        for &v in members {
            var_bases[v].push(b);
        }
    }

    let state = SearchState {
        assign: vec![None; vars.len()],
        satisfied: vec![false; bases.len()],
        unassigned: bases.iter().map(Vec::len).collect(),
    };
    let assignment = solve(&bases, &var_bases, state)?;

    let entries = vars
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let value = assignment[i] == Some(true);
            (p.subspace().clone(), (p, value))
        })
        .collect();
    Some(Coloring { entries })
}

#[derive(Clone)]
struct SearchState {
    assign: Vec<Option<bool>>,
    satisfied: Vec<bool>,
    unassigned: Vec<usize>,
}

impl SearchState {
    /// Assign and propagate: a 1 satisfies its bases and zeroes their other
    /// members; a 0 may force the last unassigned member of a basis to 1.
    /// Returns false on contradiction.
    fn assign(
        &mut self,
        bases: &[Vec<usize>],
        var_bases: &[Vec<usize>],
        var: usize,
        value: bool,
    ) -> bool {
        let mut queue = vec![(var, value)];
        while let Some((v, val)) = queue.pop() {
            match self.assign[v] {
                Some(prev) if prev == val => continue,
                Some(_) => return false,
                None => {}
            }
            self.assign[v] = Some(val);
            for &b in &var_bases[v] {
                self.unassigned[b] -= 1;
                if val {
                    if self.satisfied[b] {
                        return false; // a second 1 in this basis
                    }
                    self.satisfied[b] = true;
                    for &w in &bases[b] {
                        if self.assign[w].is_none() {
                            queue.push((w, false));
                        }
                    }
                } else if !self.satisfied[b] {
                    if self.unassigned[b] == 0 {
                        return false; // basis all zero
                    }
                    if self.unassigned[b] == 1 {
                        let w = bases[b]
                            .iter()
                            .copied()
                            .find(|&w| self.assign[w].is_none())
                            .expect("one member unassigned");
                        queue.push((w, true));
                    }
                }
            }
        }
        true
    }
}

fn solve(
    bases: &[Vec<usize>],
    var_bases: &[Vec<usize>],
    state: SearchState,
) -> Option<Vec<Option<bool>>> {
    // branch on the unsatisfied basis with the fewest open members
    let target = (0..bases.len())
        .filter(|&b| !state.satisfied[b])
        .min_by_key(|&b| state.unassigned[b]);
    let Some(target) = target else {
        return Some(state.assign); // every basis satisfied
    };
    let candidates: Vec<usize> = bases[target]
        .iter()
        .copied()
        .filter(|&v| state.assign[v].is_none())
        .collect();
    for v in candidates {
        let mut next = state.clone();
        if next.assign(bases, var_bases, v, true) {
            if let Some(result) = solve(bases, var_bases, next) {
                return Some(result);
            }
        }
    }
    None
}

/// Combined verification report (text and JSON surfaces).
#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub structure_ok: bool,
    pub structure_violations: Vec<String>,
    pub basis_count: usize,
    pub parity_proof: bool,
    pub census_histogram: BTreeMap<u32, usize>,
    pub colorable: bool,
    pub witness: Option<Vec<Vec<u8>>>,
}

impl VerifyReport {
    /// A set passes verification when it is structurally sound and admits
    /// no noncontextual coloring.
    pub fn passed(&self) -> bool {
        self.structure_ok && !self.colorable
    }

    pub fn summary(&self) -> String {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let parity = if self.parity_proof {
            "parity proof"
        } else {
            "not a parity proof"
        };
        let color = if self.colorable {
            "colorable"
        } else {
            "not colorable"
        };
        format!("{verdict}: {parity}; {color}")
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "bases: {}", self.basis_count)?;
        if self.structure_ok {
            writeln!(f, "structure: ok")?;
        } else {
            writeln!(
                f,
                "structure: {} violations",
                self.structure_violations.len()
            )?;
            for v in &self.structure_violations {
                writeln!(f, "  {v}")?;
            }
        }
        let hist: Vec<String> = self
            .census_histogram
            .iter()
            .map(|(count, n)| format!("{n} x{count}"))
            .collect();
        writeln!(f, "census: {}", hist.join(", "))?;
        writeln!(f, "parity proof: {}", self.parity_proof)?;
        writeln!(f, "colorable: {}", self.colorable)?;
        if let Some(witness) = &self.witness {
            let ones: Vec<String> = witness.iter().map(|p| format!("{p:?}")).collect();
            writeln!(f, "witness (projectors valued 1): {}", ones.join(" "))?;
        }
        write!(f, "{}", self.summary())
    }
}

pub fn verify(catalog: &Catalog, set: &KsSet) -> VerifyReport {
    let structure = check_structure(catalog, set);
    let (parity, census) = has_parity_proof(set);
    let coloring = is_colorable(set);
    VerifyReport {
        structure_ok: structure.is_ok(),
        structure_violations: structure.violations.iter().map(|v| v.to_string()).collect(),
        basis_count: set.bases().len(),
        parity_proof: parity,
        census_histogram: census.histogram(),
        colorable: coloring.is_some(),
        witness: coloring.map(|c| {
            c.ones()
                .map(|p| p.rays().iter().map(|r| r.get()).collect())
                .collect()
        }),
    }
}
