//! Exhaustive search over the 25 bases for KS subsets and the occurrence
//! bookkeeping that drives the transformation: censuses, profile strings,
//! and the Γ/¬Γ split of each pure basis.
//!
//! The search condition is stated as "every ray occurrence count is even";
//! the expected 5-pure/10-hybrid structure and the 20₂20₄ profile are
//! asserted on the results afterwards rather than assumed.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Basis, BasisId, BasisKind, Catalog, CatalogError, Projector};
use crate::linalg::{CanonicalSubspace, RayId};
use crate::verifier;

#[derive(Debug, Error)]
pub enum SeekerError {
    #[error("basis {0} is not in the catalog")]
    UnknownBasis(u8),
    #[error("pure basis {basis}: rays split {high}/{low} by occurrence count, expected 4/4")]
    GammaSplit {
        basis: BasisId,
        high: usize,
        low: usize,
    },
    #[error("ray {ray} occurs {count} times; a seed has only counts 2 and 4")]
    BadOccurrence { ray: RayId, count: usize },
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Occurrence counts of distinct projectors across a set of bases.
/// Projector identity is the canonical subspace, so a rank-1 ray standing
/// alone and the rank-2 plane containing it are distinct entries.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Census {
    entries: BTreeMap<CanonicalSubspace, (Projector, u32)>,
}

impl Census {
    pub fn of_bases(bases: &[Basis]) -> Census {
        let mut entries: BTreeMap<CanonicalSubspace, (Projector, u32)> = BTreeMap::new();
        for basis in bases {
            for p in basis.projectors() {
                entries
                    .entry(p.subspace().clone())
                    .and_modify(|e| e.1 += 1)
                    .or_insert_with(|| (p.clone(), 1));
            }
        }
        Census { entries }
    }

    pub fn count(&self, p: &Projector) -> u32 {
        self.entries.get(p.subspace()).map_or(0, |e| e.1)
    }

    pub fn all_even(&self) -> bool {
        self.entries.values().all(|e| e.1 % 2 == 0)
    }

    /// distinct projectors per occurrence count
    pub fn histogram(&self) -> BTreeMap<u32, usize> {
        let mut hist = BTreeMap::new();
        for (_, count) in self.entries.values() {
            *hist.entry(*count).or_insert(0) += 1;
        }
        hist
    }

    pub fn distinct(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Projector, u32)> {
        self.entries.values().map(|(p, c)| (p, *c))
    }

    /// (distinct rank-1 projectors, distinct rank-2 projectors)
    pub fn rank_counts(&self) -> (usize, usize) {
        let mut counts = (0, 0);
        for (p, _) in self.entries.values() {
            match p.rank() {
                1 => counts.0 += 1,
                _ => counts.1 += 1,
            }
        }
        counts
    }
}

/// An ordered collection of bases plus its projector census and profile.
#[derive(Clone, Debug)]
pub struct KsSet {
    bases: Vec<Basis>,
    census: Census,
    profile: String,
    pure_count: usize,
    hybrid_count: usize,
}

impl PartialEq for KsSet {
    fn eq(&self, other: &Self) -> bool {
        self.bases == other.bases
    }
}

impl Eq for KsSet {}

impl KsSet {
    pub fn new(bases: Vec<Basis>) -> KsSet {
        let census = Census::of_bases(&bases);
        let profile = profile_of(&census, &bases);
        let pure_count = bases.iter().filter(|b| b.kind() == BasisKind::Pure).count();
        let hybrid_count = bases.len() - pure_count;
        KsSet {
            bases,
            census,
            profile,
            pure_count,
            hybrid_count,
        }
    }

    /// A set of catalog bases with their original rank-1 projectors.
    pub fn from_basis_ids(catalog: &Catalog, ids: &[BasisId]) -> Result<KsSet, SeekerError> {
        let bases = ids
            .iter()
            .map(|id| {
                catalog
                    .basis(*id)
                    .cloned()
                    .ok_or(SeekerError::UnknownBasis(id.get()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(KsSet::new(bases))
    }

    pub fn bases(&self) -> &[Basis] {
        &self.bases
    }

    pub fn basis(&self, id: BasisId) -> Option<&Basis> {
        self.bases.iter().find(|b| b.index() == id)
    }

    pub fn basis_ids(&self) -> Vec<BasisId> {
        self.bases.iter().map(Basis::index).collect()
    }

    pub fn census(&self) -> &Census {
        &self.census
    }

    pub fn profile(&self) -> &str {
        &self.profile
    }

    pub fn pure_count(&self) -> usize {
        self.pure_count
    }

    pub fn hybrid_count(&self) -> usize {
        self.hybrid_count
    }

    /// How many times each ray index appears across the bases.
    pub fn ray_occurrences(&self) -> BTreeMap<RayId, usize> {
        let mut counts = BTreeMap::new();
        for basis in &self.bases {
            for &ray in basis.ray_set() {
                *counts.entry(ray).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Normalized wire form: bases sorted by index, projectors and their
    /// rays ascending, with the parity-proof flag recomputed.
    pub fn to_doc(&self) -> KsSetDoc {
        let mut bases: Vec<BasisDoc> = self
            .bases
            .iter()
            .map(|b| BasisDoc {
                index: b.index().get(),
                kind: b.kind(),
                projectors: b
                    .projectors()
                    .iter()
                    .map(|p| p.rays().iter().map(|r| r.get()).collect())
                    .collect(),
            })
            .collect();
        bases.sort_by_key(|b| b.index);
        KsSetDoc {
            bases,
            profile: self.profile.clone(),
            parity_proof: verifier::has_parity_proof(self).0,
        }
    }

    pub fn from_doc(catalog: &Catalog, doc: &KsSetDoc) -> Result<KsSet, SeekerError> {
        let bases = doc
            .bases
            .iter()
            .map(|b| {
                let projectors = b
                    .projectors
                    .iter()
                    .map(|rays| {
                        let ids: Vec<RayId> = rays.iter().map(|r| RayId::new(*r)).collect();
                        Projector::new(catalog, &ids)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Basis::new(BasisId::new(b.index), b.kind, projectors))
            })
            .collect::<Result<Vec<_>, CatalogError>>()?;
        Ok(KsSet::new(bases))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("doc serializes")
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("doc serializes")
    }
}

impl fmt::Display for KsSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for basis in &self.bases {
            let projs: Vec<String> = basis.projectors().iter().map(|p| p.to_string()).collect();
            writeln!(f, "{}: {}", basis.index(), projs.join(" "))?;
        }
        write!(f, "profile: {}", self.profile)
    }
}

/// Wire form of a KS set (the committed JSON schema).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KsSetDoc {
    pub bases: Vec<BasisDoc>,
    pub profile: String,
    pub parity_proof: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisDoc {
    pub index: u8,
    pub kind: BasisKind,
    pub projectors: Vec<Vec<u8>>,
}

/// The profile notation: distinct projectors grouped by occurrence count,
/// then bases grouped by projector count ("20_2 20_4 - 15_8"). When ranks
/// are mixed the projector groups carry a rank suffix, rank-2 first
/// ("28_2r2 4_2r1 - 11_4 4_5").
pub fn classify_profile(set: &KsSet) -> String {
    profile_of(set.census(), set.bases())
}

fn profile_of(census: &Census, bases: &[Basis]) -> String {
    let (n_rank1, n_rank2) = census.rank_counts();
    let mixed = n_rank1 > 0 && n_rank2 > 0;

    let mut left_terms = Vec::new();
    for rank in [2usize, 1] {
        let mut by_count: BTreeMap<u32, usize> = BTreeMap::new();
        for (p, count) in census.iter() {
            if p.rank() == rank {
                *by_count.entry(count).or_insert(0) += 1;
            }
        }
        for (count, n) in by_count {
            if mixed {
                left_terms.push(format!("{n}_{count}r{rank}"));
            } else {
                left_terms.push(format!("{n}_{count}"));
            }
        }
    }

    let mut by_size: BTreeMap<usize, usize> = BTreeMap::new();
    for basis in bases {
        *by_size.entry(basis.projectors().len()).or_insert(0) += 1;
    }
    let right_terms: Vec<String> = by_size
        .into_iter()
        .map(|(size, n)| format!("{n}_{size}"))
        .collect();

    format!("{} - {}", left_terms.join(" "), right_terms.join(" "))
}

/// The Γ/¬Γ split of one pure basis of a seed: the four rays occurring
/// four times and the four occurring twice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaSet {
    pub pure_index: BasisId,
    pub gamma: [RayId; 4],
    pub not_gamma: [RayId; 4],
}

/// Γ sets of a 20₂20₄ seed, one per pure basis in ascending index order.
pub fn gammas(seed: &KsSet) -> Result<Vec<GammaSet>, SeekerError> {
    let counts = seed.ray_occurrences();
    for (&ray, &count) in &counts {
        if count != 2 && count != 4 {
            return Err(SeekerError::BadOccurrence { ray, count });
        }
    }
    let mut out = Vec::new();
    for basis in seed.bases() {
        if basis.kind() != BasisKind::Pure {
            continue;
        }
        let mut gamma = Vec::new();
        let mut not_gamma = Vec::new();
        for &ray in basis.ray_set() {
            if counts[&ray] == 4 {
                gamma.push(ray);
            } else {
                not_gamma.push(ray);
            }
        }
        let (high, low) = (gamma.len(), not_gamma.len());
        let (Ok(gamma), Ok(not_gamma)) = (gamma.try_into(), not_gamma.try_into()) else {
            return Err(SeekerError::GammaSplit {
                basis: basis.index(),
                high,
                low,
            });
        };
        out.push(GammaSet {
            pure_index: basis.index(),
            gamma,
            not_gamma,
        });
    }
    out.sort_by_key(|g| g.pure_index);
    Ok(out)
}

/// Every 15-subset of the 25 catalog bases in which each ray's occurrence
/// count is even. Asserts the structure of each result (5 pure + 10 hybrid
/// bases, all 40 rays, profile 20₂20₄) and returns them sorted by
/// basis-index tuple. Deterministic for any worker count.
pub fn find_seed_sets(catalog: &Catalog, workers: usize) -> Vec<KsSet> {
    let all: Vec<BasisId> = catalog.bases().iter().map(Basis::index).collect();
    let sets = find_seed_sets_among(catalog, &all, 15, workers);
    for set in &sets {
        assert_eq!(set.pure_count(), 5, "seed must hold 5 pure bases");
        assert_eq!(set.hybrid_count(), 10, "seed must hold 10 hybrid bases");
        assert_eq!(set.ray_occurrences().len(), 40, "seed must use all 40 rays");
        assert_eq!(set.profile(), "20_2 20_4 - 15_8", "seed profile");
    }
    sets
}

/// The general search: `size`-subsets of `candidates` with all ray
/// occurrence counts even. No structural assertions are made here.
pub fn find_seed_sets_among(
    catalog: &Catalog,
    candidates: &[BasisId],
    size: usize,
    workers: usize,
) -> Vec<KsSet> {
    assert!(
        catalog.rays().len() <= 64,
        "parity masks are 64-bit; the catalog holds {} rays",
        catalog.rays().len()
    );
    if size == 0 || size > candidates.len() {
        return Vec::new();
    }
    let masks: Vec<u64> = candidates
        .iter()
        .map(|id| {
            let basis = catalog.basis(*id).expect("candidate basis in catalog");
            basis
                .ray_set()
                .iter()
                .fold(0u64, |m, r| m ^ (1 << (r.get() - 1)))
        })
        .collect();
    let found = search_even_parity(&masks, size, workers.max(1));
    found
        .into_iter()
        .map(|subset| {
            let ids: Vec<BasisId> = subset.iter().map(|&i| candidates[i]).collect();
            KsSet::from_basis_ids(catalog, &ids).expect("candidates exist in catalog")
        })
        .collect()
}

/// Depth-first subset enumeration with two prunes: a remaining-count budget
/// and a parity cut (a ray whose occurrence parity is odd and which occurs
/// in no later basis can never become even). Work is partitioned across
/// workers by the first included basis; the merged result is sorted, so the
/// output is independent of the worker count.
fn search_even_parity(masks: &[u64], size: usize, workers: usize) -> Vec<Vec<usize>> {
    let n = masks.len();
    let mut suffix_or = vec![0u64; n + 1];
    for i in (0..n).rev() {
        suffix_or[i] = suffix_or[i + 1] | masks[i];
    }

    // branch b: bases before b excluded, b included
    let branches: Vec<usize> = (0..n).filter(|b| n - b >= size).collect();
    let results: Vec<Mutex<Vec<Vec<usize>>>> =
        branches.iter().map(|_| Mutex::new(Vec::new())).collect();
    let next = AtomicUsize::new(0);

    std::thread::scope(|scope| {
        for _ in 0..workers.min(branches.len().max(1)) {
            scope.spawn(|| loop {
                let j = next.fetch_add(1, Ordering::Relaxed);
                if j >= branches.len() {
                    break;
                }
                let b = branches[j];
                let mut chosen = vec![b];
                let mut out = Vec::new();
                dfs(
                    masks,
                    &suffix_or,
                    size,
                    b + 1,
                    masks[b],
                    &mut chosen,
                    &mut out,
                );
                *results[j].lock().unwrap() = out;
            });
        }
    });

    let mut merged: Vec<Vec<usize>> = results
        .into_iter()
        .flat_map(|m| m.into_inner().unwrap())
        .collect();
    merged.sort();
    merged
}

fn dfs(
    masks: &[u64],
    suffix_or: &[u64],
    size: usize,
    i: usize,
    parity: u64,
    chosen: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if chosen.len() == size {
        if parity == 0 {
            out.push(chosen.clone());
        }
        return;
    }
    if i == masks.len() || size - chosen.len() > masks.len() - i {
        return;
    }
    if parity & !suffix_or[i] != 0 {
        return;
    }
    chosen.push(i);
    dfs(
        masks,
        suffix_or,
        size,
        i + 1,
        parity ^ masks[i],
        chosen,
        out,
    );
    chosen.pop();
    dfs(masks, suffix_or, size, i + 1, parity, chosen, out);
}
