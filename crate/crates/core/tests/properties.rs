//! Property and cross-module invariant tests: the generative counterpart
//! of the acceptance suite.

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};

use kset_core::{
    dot, enumerate_matchings, enumerate_transforms, find_seed_sets, gammas, has_parity_proof,
    is_colorable, rule1_select_hbs, BasisId, CanonicalSubspace, Catalog, EnumerateOptions, KsSet,
    Projector, RayId,
};

fn catalog() -> Catalog {
    Catalog::kernaghan_peres()
}

fn orthogonal_pairs(cat: &Catalog) -> Vec<(RayId, RayId)> {
    let rays = cat.rays();
    let mut pairs = Vec::new();
    for (i, a) in rays.iter().enumerate() {
        for b in &rays[i + 1..] {
            if dot(a, b) == 0 {
                pairs.push((a.index().unwrap(), b.index().unwrap()));
            }
        }
    }
    pairs
}

/// Orthogonal-pair count over all C(40,2) = 780 pairs, and the injectivity
/// of the canonical form: within the catalog, plane identity coincides with
/// unordered-pair identity. Any collision is printed, not hidden.
#[test]
fn canonical_planes_are_pairwise_distinct() {
    let cat = catalog();
    let pairs = orthogonal_pairs(&cat);
    assert_eq!(pairs.len(), 460); // brute-forced independently up front

    let mut by_plane: BTreeMap<CanonicalSubspace, Vec<(RayId, RayId)>> = BTreeMap::new();
    for &(a, b) in &pairs {
        let plane = CanonicalSubspace::span_of_rays(&[cat.ray(a), cat.ray(b)]).unwrap();
        by_plane.entry(plane).or_default().push((a, b));
    }
    let collisions: Vec<_> = by_plane.values().filter(|v| v.len() > 1).collect();
    assert!(
        collisions.is_empty(),
        "distinct ray pairs span one plane: {collisions:?}"
    );
    assert_eq!(by_plane.len(), 460);
}

/// Every pair arising in the construction co-occurs inside a catalog basis;
/// the 64 seeds only ever pair rays within a basis, so this is the superset
/// the rank-2 identity check must cover.
#[test]
fn every_cooccurring_pair_is_orthogonal_and_vice_versa() {
    let cat = catalog();
    let mut cooccur: BTreeSet<(RayId, RayId)> = BTreeSet::new();
    for basis in cat.bases() {
        let rays = basis.ray_set();
        for (i, &a) in rays.iter().enumerate() {
            for &b in &rays[i + 1..] {
                cooccur.insert((a, b));
            }
        }
    }
    let orthogonal: BTreeSet<(RayId, RayId)> = orthogonal_pairs(&cat).into_iter().collect();
    assert_eq!(cooccur, orthogonal);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    /// span(a, b) is invariant under swapping and sign flips, and the
    /// canonical form re-canonicalizes to itself.
    #[test]
    fn subspace_invariances(pair_index in 0usize..460, swap: bool, flip_a: bool, flip_b: bool) {
        let cat = catalog();
        let pairs = orthogonal_pairs(&cat);
        let (a, b) = pairs[pair_index];
        let reference = CanonicalSubspace::span_of_rays(&[cat.ray(a), cat.ray(b)]).unwrap();

        let mut rows = [*cat.ray(a).coords(), *cat.ray(b).coords()];
        if swap {
            rows.swap(0, 1);
        }
        if flip_a {
            for x in rows[0].iter_mut() { *x = -*x; }
        }
        if flip_b {
            for x in rows[1].iter_mut() { *x = -*x; }
        }
        let variant = CanonicalSubspace::from_rows(&rows).unwrap();
        prop_assert_eq!(&reference, &variant);

        let again = CanonicalSubspace::from_rows(reference.rows()).unwrap();
        prop_assert_eq!(&reference, &again);
    }

    /// Projector identity equals unordered-pair identity for catalog pairs.
    #[test]
    fn projector_identity_is_pair_identity(i in 0usize..460, j in 0usize..460) {
        let cat = catalog();
        let pairs = orthogonal_pairs(&cat);
        let (a1, b1) = pairs[i];
        let (a2, b2) = pairs[j];
        let p = Projector::new(&cat, &[a1, b1]).unwrap();
        let q = Projector::new(&cat, &[a2, b2]).unwrap();
        prop_assert_eq!(p.subspace() == q.subspace(), i == j);
    }
}

/// Rule-1 structure across all 64 seeds and all five Γ sets: four hybrid
/// bases realizing the four distinct 3-subsets, with 9 matchings per step
/// of which exactly 3 are rule-3 compatible.
#[test]
fn rule1_and_matching_counts_hold_for_every_seed() {
    let cat = catalog();
    for seed in find_seed_sets(&cat, 4) {
        let gs = gammas(&seed).unwrap();
        assert_eq!(gs.len(), 5);
        for g in &gs {
            let selection = rule1_select_hbs(&seed, g).unwrap();
            assert_eq!(selection.picks.len(), 4);
            let candidates = enumerate_matchings(&seed, g).unwrap();
            assert_eq!(candidates.len(), 9, "seed {:?}", seed.basis_ids());
            assert_eq!(candidates.iter().filter(|c| c.r3_compatible()).count(), 3);
            // each Γ ray sits in exactly 3 hybrid bases of the seed
            for ray in g.gamma {
                let hybrids = seed
                    .bases()
                    .iter()
                    .filter(|b| b.kind() == kset_core::BasisKind::Hybrid && b.contains_ray(ray))
                    .count();
                assert_eq!(hybrids, 3);
            }
        }
    }
}

/// Each rule-2 pair lands once in a pure and once in a hybrid basis; each
/// rule-3 pair lands in two hybrid bases.
#[test]
fn pair_placement_split_in_rank2_transforms() {
    let cat = catalog();
    let ids: Vec<BasisId> = [1, 2, 3, 4, 5, 6, 7, 8, 10, 14, 15, 16, 20, 22, 24]
        .iter()
        .map(|i| BasisId::new(*i))
        .collect();
    let seed = KsSet::from_basis_ids(&cat, &ids).unwrap();
    let mut enumeration = enumerate_transforms(&cat, &seed, &EnumerateOptions::default()).unwrap();
    let set = enumeration.next().unwrap();

    for (projector, count) in set.census().iter() {
        assert_eq!(count, 2);
        let hosts: Vec<_> = set
            .bases()
            .iter()
            .filter(|b| {
                b.projectors()
                    .iter()
                    .any(|p| p.subspace() == projector.subspace())
            })
            .collect();
        assert_eq!(hosts.len(), 2);
        let pure_hosts = hosts
            .iter()
            .filter(|b| b.kind() == kset_core::BasisKind::Pure)
            .count();
        // rule-2 pairs: one pure + one hybrid host; rule-3 pairs: two hybrid
        assert!(pure_hosts <= 1);
    }
}

/// Distinctness holds for mixed-rank enumerations too.
#[test]
fn skip_pattern_enumeration_is_distinct() {
    let cat = catalog();
    let ids: Vec<BasisId> = [1, 2, 3, 4, 5, 6, 7, 8, 10, 14, 15, 16, 20, 22, 24]
        .iter()
        .map(|i| BasisId::new(*i))
        .collect();
    let seed = KsSet::from_basis_ids(&cat, &ids).unwrap();
    let opts = EnumerateOptions::with_skips([3]);
    let mut keys: Vec<String> = enumerate_transforms(&cat, &seed, &opts)
        .unwrap()
        .map(|s| s.to_json_line())
        .collect();
    assert_eq!(keys.len(), 486);
    keys.sort();
    keys.dedup();
    assert_eq!(keys.len(), 486);
}

/// Whenever a coloring exists its replay satisfies exactly-one-per-basis,
/// and a parity proof always rules one out (soundness link), across random
/// small subsets of the catalog.
#[test]
fn coloring_witnesses_replay_and_parity_implies_none() {
    let cat = catalog();
    let all: Vec<BasisId> = (1..=25).map(BasisId::new).collect();
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..200 {
        let k = rng.random_range(1..=6);
        let mut ids = Vec::new();
        while ids.len() < k {
            let id = *all.choose(&mut rng).unwrap();
            if !ids.contains(&id) {
                ids.push(id);
            }
        }
        let set = KsSet::from_basis_ids(&cat, &ids).unwrap();
        let coloring = is_colorable(&set);
        if let Some(witness) = &coloring {
            assert!(witness.satisfies(&set), "witness must replay on {ids:?}");
        }
        if has_parity_proof(&set).0 {
            assert!(
                coloring.is_none(),
                "parity proof implies noncolorable on {ids:?}"
            );
        }
    }
}

/// Profile strings for mixed-rank sets carry per-rank groups.
#[test]
fn mixed_rank_profile_format() {
    let cat = catalog();
    let ids: Vec<BasisId> = [1, 2, 3, 4, 5, 6, 7, 8, 10, 14, 15, 16, 20, 22, 24]
        .iter()
        .map(|i| BasisId::new(*i))
        .collect();
    let seed = KsSet::from_basis_ids(&cat, &ids).unwrap();
    let opts = EnumerateOptions::with_skips([2]);
    let set = enumerate_transforms(&cat, &seed, &opts)
        .unwrap()
        .next()
        .unwrap();
    // 28 rank-2 pairs twice each, 4 leftover rays twice each; the four
    // step-2 hosts hold five projectors, the other eleven bases four
    assert_eq!(set.profile(), "28_2r2 4_2r1 - 11_4 4_5");

    // a leftover ray counts separately from the rank-2 pair containing it
    let rank1: Vec<_> = set
        .census()
        .iter()
        .filter(|(p, _)| p.rank() == 1)
        .map(|(p, count)| (p.rays()[0], count))
        .collect();
    assert_eq!(rank1.len(), 4);
    for (ray, count) in rank1 {
        assert_eq!(count, 2);
        let inside_pairs = set
            .census()
            .iter()
            .filter(|(p, _)| p.rank() == 2 && p.rays().contains(&ray))
            .count();
        assert!(
            inside_pairs >= 1,
            "ray {ray} also appears inside rank-2 pairs"
        );
    }
}
