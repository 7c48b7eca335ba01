//! The three-rule/five-step scheme that converts a 20₂20₄–15₈ seed into KS
//! sets of rank-2 (or mixed rank-1/rank-2) projectors, plus the exhaustive
//! enumeration of every choice the rules leave open.
//!
//! Per step i the rules run in order. Rule 1 extracts the four hybrid bases
//! holding three rays of Γ^i apiece. Rule 2 couples each Γ ray with a ¬Γ
//! partner into a rank-2 projector placed in the pure basis and repeated in
//! the hybrid basis where the pair co-occurs. Rule 3, when its leftovers
//! collapse to two repeated Γ-Γ pairs, places those as rank-2 projectors in
//! their two hybrid hosts; a step that does not apply rule 3 leaves the
//! leftovers as rank-1 projectors.

use std::collections::BTreeSet;

use itertools::Itertools;
use serde::Serialize;
use thiserror::Error;

use crate::catalog::{Basis, BasisId, BasisKind, Catalog, CatalogError, Projector};
use crate::linalg::RayId;
use crate::seeker::{gammas, GammaSet, KsSet, SeekerError};

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("rule 1 for Γ of pure basis {pure}: found {found} hybrid bases with a 3-ray Γ subset, expected 4")]
    Rule1Bases { pure: BasisId, found: usize },
    #[error(
        "rule 1 for Γ of pure basis {pure}: the Γ subsets are not the four distinct 3-subsets"
    )]
    Rule1Subsets { pure: BasisId },
    #[error("rule 1: basis {basis} holds {count} rays of ¬Γ, expected exactly 1")]
    Rule1Partner { basis: BasisId, count: usize },
    #[error("step {step}: matching is not one of the rule-2 candidates")]
    UnknownMatching { step: usize },
    #[error("step {step}: rule 3 requested but the matching is not rule-3 compatible")]
    R3Incompatible { step: usize },
    #[error("step {step}: recorded rule-3 pairs differ from the induced leftover pairs")]
    R3PairsMismatch { step: usize },
    #[error("step {step}: pair ({gamma},{partner}) does not repeat in any hybrid basis")]
    PairNotRepeated {
        step: usize,
        gamma: RayId,
        partner: RayId,
    },
    #[error("ray {ray} in basis {basis} is already consumed by another projector")]
    Conflict { basis: BasisId, ray: RayId },
    #[error("basis {basis} is not fully partitioned (rank sum {sum} of 8)")]
    Unfilled { basis: BasisId, sum: usize },
    #[error("step 1 always applies rule 3; set allow_skip_step1 to lift")]
    SkipStepOne,
    #[error("skip steps must lie in 1..=5, got {0}")]
    BadSkipStep(usize),
    #[error(transparent)]
    Seeker(#[from] SeekerError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

/// One hybrid basis selected by rule 1: it holds three rays of Γ (the
/// subset Γ_j) and exactly one ray of ¬Γ (the partner available there).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule1Pick {
    pub basis: BasisId,
    pub gamma_subset: [RayId; 3],
    pub partner: RayId,
}

/// The four rule-1 picks for one Γ set, ascending by basis index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule1Selection {
    pub picks: Vec<Rule1Pick>,
}

impl Rule1Selection {
    pub fn basis_ids(&self) -> Vec<BasisId> {
        self.picks.iter().map(|p| p.basis).collect()
    }
}

/// The four hybrid bases of the seed each containing exactly three rays of
/// Γ^i; fails unless they realize exactly the four distinct 3-subsets.
pub fn rule1_select_hbs(seed: &KsSet, g: &GammaSet) -> Result<Rule1Selection, TransformError> {
    let gamma: BTreeSet<RayId> = g.gamma.iter().copied().collect();
    let not_gamma: BTreeSet<RayId> = g.not_gamma.iter().copied().collect();
    let mut picks = Vec::new();
    for basis in seed.bases() {
        if basis.kind() != BasisKind::Hybrid {
            continue;
        }
        let inside: Vec<RayId> = basis
            .ray_set()
            .iter()
            .copied()
            .filter(|r| gamma.contains(r))
            .collect();
        if inside.len() != 3 {
            continue;
        }
        let partners: Vec<RayId> = basis
            .ray_set()
            .iter()
            .copied()
            .filter(|r| not_gamma.contains(r))
            .collect();
        if partners.len() != 1 {
            return Err(TransformError::Rule1Partner {
                basis: basis.index(),
                count: partners.len(),
            });
        }
        picks.push(Rule1Pick {
            basis: basis.index(),
            gamma_subset: inside.try_into().expect("three rays"),
            partner: partners[0],
        });
    }
    if picks.len() != 4 {
        return Err(TransformError::Rule1Bases {
            pure: g.pure_index,
            found: picks.len(),
        });
    }
    let subsets: BTreeSet<[RayId; 3]> = picks.iter().map(|p| p.gamma_subset).collect();
    if subsets.len() != 4 {
        return Err(TransformError::Rule1Subsets { pure: g.pure_index });
    }
    picks.sort_by_key(|p| p.basis);
    Ok(Rule1Selection { picks })
}

/// A rule-2 matching: each Γ ray coupled with a distinct ¬Γ partner such
/// that the pair co-occurs in a rule-1 basis. Pairs kept in ascending
/// Γ-ray order, so the ordering of matchings is the lexicographic order of
/// their partner tuples.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Matching {
    pub pairs: [(RayId, RayId); 4],
}

impl Matching {
    pub fn partner_of(&self, gamma: RayId) -> Option<RayId> {
        self.pairs
            .iter()
            .find(|(g, _)| *g == gamma)
            .map(|(_, p)| *p)
    }
}

/// A matching plus its rule-3 analysis: `r3_pairs` holds the two repeated
/// leftover Γ-Γ pairs exactly when rule 3 is applicable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchingCandidate {
    pub matching: Matching,
    pub r3_pairs: Option<[(RayId, RayId); 2]>,
}

impl MatchingCandidate {
    pub fn r3_compatible(&self) -> bool {
        self.r3_pairs.is_some()
    }

    /// Freeze into a per-step choice. Applying rule 3 requires a
    /// compatible matching; not applying it drops the induced pairs.
    pub fn to_choice(
        &self,
        step_index: usize,
        apply_r3: bool,
    ) -> Result<StepChoice, TransformError> {
        if apply_r3 && self.r3_pairs.is_none() {
            return Err(TransformError::R3Incompatible { step: step_index });
        }
        Ok(StepChoice {
            step_index,
            matching: self.matching.clone(),
            apply_r3,
            r3_pairs: if apply_r3 { self.r3_pairs } else { None },
        })
    }
}

/// All bijections Γ → ¬Γ in which every pair co-occurs in a rule-1 basis,
/// in lexicographic partner order, each with its rule-3 analysis.
pub fn enumerate_matchings(
    seed: &KsSet,
    g: &GammaSet,
) -> Result<Vec<MatchingCandidate>, TransformError> {
    let selection = rule1_select_hbs(seed, g)?;
    let mut out = Vec::new();
    for perm in g.not_gamma.iter().permutations(4) {
        let pairs: Vec<(RayId, RayId)> = g
            .gamma
            .iter()
            .zip(&perm)
            .map(|(gm, p)| (*gm, **p))
            .collect();
        // every pair must sit inside the rule-1 basis holding its partner
        let hosted = pairs.iter().all(|(gm, p)| {
            selection
                .picks
                .iter()
                .any(|pick| pick.partner == *p && pick.gamma_subset.contains(gm))
        });
        if !hosted {
            continue;
        }
        let matching = Matching {
            pairs: pairs.try_into().expect("four pairs"),
        };
        let r3_pairs = r3_analysis(&selection, &matching);
        out.push(MatchingCandidate { matching, r3_pairs });
    }
    out.sort_by(|a, b| a.matching.cmp(&b.matching));
    Ok(out)
}

/// Leftover Γ rays per rule-1 basis after rule 2 consumes one. Rule 3 is
/// applicable iff the four leftover pairs are two distinct pairs occurring
/// twice each; returns them sorted.
fn r3_analysis(selection: &Rule1Selection, matching: &Matching) -> Option<[(RayId, RayId); 2]> {
    let mut leftovers = Vec::new();
    for pick in &selection.picks {
        let consumed = matching
            .pairs
            .iter()
            .find(|(_, p)| *p == pick.partner)
            .map(|(g, _)| *g)?;
        let left: Vec<RayId> = pick
            .gamma_subset
            .iter()
            .copied()
            .filter(|r| *r != consumed)
            .collect();
        let mut pair = (left[0], left[1]);
        if pair.0 > pair.1 {
            pair = (pair.1, pair.0);
        }
        leftovers.push(pair);
    }
    let distinct: BTreeSet<(RayId, RayId)> = leftovers.iter().copied().collect();
    if distinct.len() == 2
        && distinct
            .iter()
            .all(|p| leftovers.iter().filter(|q| *q == p).count() == 2)
    {
        let pair_vec: Vec<(RayId, RayId)> = distinct.into_iter().collect();
        Some(pair_vec.try_into().expect("two pairs"))
    } else {
        None
    }
}

/// Per-step record: which rule-2 matching was selected and whether rule 3
/// was applied (with the induced Γ-Γ pairs when it was).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepChoice {
    pub step_index: usize,
    pub matching: Matching,
    pub apply_r3: bool,
    pub r3_pairs: Option<[(RayId, RayId); 2]>,
}

/// Accumulates the per-basis partial partitions across the five steps.
/// Later insertions conflicting with already-placed projectors are
/// rejected; valid choices never conflict.
#[derive(Clone, Debug)]
pub struct TransformState {
    entries: Vec<StateBasis>,
}

#[derive(Clone, Debug)]
struct StateBasis {
    index: BasisId,
    kind: BasisKind,
    rays: Vec<RayId>,
    placed: Vec<Projector>,
    consumed: BTreeSet<RayId>,
}

impl TransformState {
    pub fn new(seed: &KsSet) -> TransformState {
        let entries = seed
            .bases()
            .iter()
            .map(|b| StateBasis {
                index: b.index(),
                kind: b.kind(),
                rays: b.ray_set().to_vec(),
                placed: Vec::new(),
                consumed: BTreeSet::new(),
            })
            .collect();
        TransformState { entries }
    }

    /// Projectors placed so far in one basis (unordered).
    pub fn projectors_of(&self, basis: BasisId) -> Option<&[Projector]> {
        self.entries
            .iter()
            .find(|e| e.index == basis)
            .map(|e| e.placed.as_slice())
    }

    fn position(&self, basis: BasisId) -> Option<usize> {
        self.entries.iter().position(|e| e.index == basis)
    }

    fn insert(
        &mut self,
        catalog: &Catalog,
        basis: BasisId,
        rays: &[RayId],
    ) -> Result<(), TransformError> {
        let pos = self
            .position(basis)
            .unwrap_or_else(|| panic!("basis {basis} not in the transform state"));
        let entry = &mut self.entries[pos];
        for ray in rays {
            if entry.consumed.contains(ray) {
                return Err(TransformError::Conflict { basis, ray: *ray });
            }
        }
        entry.consumed.extend(rays.iter().copied());
        entry.placed.push(Projector::new(catalog, rays)?);
        Ok(())
    }

    /// The hybrid basis in which `gamma` and `partner` co-occur.
    fn host_of_pair(
        &self,
        step: usize,
        gamma: RayId,
        partner: RayId,
    ) -> Result<BasisId, TransformError> {
        self.entries
            .iter()
            .find(|e| {
                e.kind == BasisKind::Hybrid && e.rays.contains(&gamma) && e.rays.contains(&partner)
            })
            .map(|e| e.index)
            .ok_or(TransformError::PairNotRepeated {
                step,
                gamma,
                partner,
            })
    }

    /// Finalize: every basis fully partitioned, ranks summing to 8.
    fn into_ks_set(self) -> Result<KsSet, TransformError> {
        let mut bases = Vec::new();
        for entry in self.entries {
            let sum: usize = entry.placed.iter().map(Projector::rank).sum();
            if sum != entry.rays.len() || entry.consumed.len() != entry.rays.len() {
                return Err(TransformError::Unfilled {
                    basis: entry.index,
                    sum,
                });
            }
            bases.push(Basis::new(entry.index, entry.kind, entry.placed));
        }
        Ok(KsSet::new(bases))
    }
}

/// Execute one step: place the four rule-2 pairs in the pure basis and
/// repeat each in its hybrid host; then either place the two rule-3 pairs
/// in both their hosts or leave the leftovers as rank-1 projectors.
pub fn apply_step(
    catalog: &Catalog,
    state: &mut TransformState,
    g: &GammaSet,
    choice: &StepChoice,
) -> Result<(), TransformError> {
    let step = choice.step_index;
    let gamma: BTreeSet<RayId> = g.gamma.iter().copied().collect();

    let mut hosts = Vec::new();
    for (gm, partner) in choice.matching.pairs {
        state.insert(catalog, g.pure_index, &[gm, partner])?;
        let host = state.host_of_pair(step, gm, partner)?;
        state.insert(catalog, host, &[gm, partner])?;
        hosts.push((host, gm));
    }

    // leftover Γ rays of each host after rule 2 consumed one
    let mut leftovers: Vec<(BasisId, Vec<RayId>)> = Vec::new();
    for (host, consumed) in hosts {
        let pos = state.position(host).expect("host exists");
        let left: Vec<RayId> = state.entries[pos]
            .rays
            .iter()
            .copied()
            .filter(|r| gamma.contains(r) && *r != consumed)
            .collect();
        leftovers.push((host, left));
    }

    if choice.apply_r3 {
        let mut induced: BTreeSet<(RayId, RayId)> = BTreeSet::new();
        for (_, left) in &leftovers {
            induced.insert((left[0], left[1]));
        }
        let recorded: BTreeSet<(RayId, RayId)> = choice
            .r3_pairs
            .ok_or(TransformError::R3PairsMismatch { step })?
            .into_iter()
            .collect();
        if induced != recorded {
            return Err(TransformError::R3PairsMismatch { step });
        }
        for (host, left) in &leftovers {
            state.insert(catalog, *host, left)?;
        }
    } else {
        for (host, left) in &leftovers {
            for ray in left {
                state.insert(catalog, *host, &[*ray])?;
            }
        }
    }
    Ok(())
}

/// Run the five steps over a seed and finalize. Each choice must be one
/// produced by `enumerate_matchings` for its step's Γ set; rule-3 pairs,
/// when applied, must match the induced leftovers.
pub fn transform(
    catalog: &Catalog,
    seed: &KsSet,
    choices: &[StepChoice; 5],
) -> Result<KsSet, TransformError> {
    let gs = gammas(seed)?;
    for (i, (g, choice)) in gs.iter().zip(choices).enumerate() {
        let step = i + 1;
        if choice.step_index != step {
            return Err(TransformError::UnknownMatching { step });
        }
        let candidates = enumerate_matchings(seed, g)?;
        let candidate = candidates
            .iter()
            .find(|c| c.matching == choice.matching)
            .ok_or(TransformError::UnknownMatching { step })?;
        if choice.apply_r3 {
            if candidate.r3_pairs.is_none() {
                return Err(TransformError::R3Incompatible { step });
            }
            if choice.r3_pairs != candidate.r3_pairs {
                return Err(TransformError::R3PairsMismatch { step });
            }
        } else if choice.r3_pairs.is_some() {
            return Err(TransformError::R3PairsMismatch { step });
        }
    }
    run_steps(catalog, seed, &gs, choices)
}

/// The unvalidated execution path shared by `transform` and the enumerator
/// (whose choices are valid by construction).
fn run_steps(
    catalog: &Catalog,
    seed: &KsSet,
    gs: &[GammaSet],
    choices: &[StepChoice; 5],
) -> Result<KsSet, TransformError> {
    let mut state = TransformState::new(seed);
    for (g, choice) in gs.iter().zip(choices) {
        apply_step(catalog, &mut state, g, choice)?;
    }
    state.into_ks_set()
}

/// Which matchings a step with rule 3 turned off draws from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SkippedPool {
    /// Only the rule-3-incompatible matchings (6 per skipped step; the
    /// convention behind the pinned census counts).
    #[default]
    IncompatibleOnly,
    /// Every matching, including compatible ones deliberately left
    /// unapplied (9 per skipped step; outside the pinned census counts).
    AllMatchings,
}

#[derive(Clone, Debug, Default)]
pub struct EnumerateOptions {
    /// Steps (2..=5 by default) at which rule 3 is not applied.
    pub skip_steps: BTreeSet<usize>,
    pub skipped_pool: SkippedPool,
    /// Allow step 1 in `skip_steps`. The scheme normally always applies
    /// rule 3 at step 1; lifting that is exploratory.
    pub allow_skip_step1: bool,
}

impl EnumerateOptions {
    pub fn with_skips<I: IntoIterator<Item = usize>>(steps: I) -> EnumerateOptions {
        EnumerateOptions {
            skip_steps: steps.into_iter().collect(),
            ..EnumerateOptions::default()
        }
    }
}

/// Census of an enumeration run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TransformCensus {
    /// steps at which rule 3 was not applied
    pub n_r3_skipped: usize,
    /// sets generated
    pub n_ks: usize,
    /// rank-2 projectors per set
    pub n_rank2: usize,
    /// residual rank-1 projectors per set
    pub n_rank1: usize,
}

/// Streaming enumeration over the Cartesian product of per-step choices:
/// rule-3-compatible matchings (3 per step) where rule 3 applies,
/// the skipped pool (6 per step by default) where it does not. Step-1-major
/// odometer order, deterministic.
pub struct TransformEnumeration<'a> {
    catalog: &'a Catalog,
    seed: &'a KsSet,
    gammas: Vec<GammaSet>,
    per_step: Vec<Vec<StepChoice>>,
    odometer: Vec<usize>,
    done: bool,
    n_r3_skipped: usize,
}

impl<'a> TransformEnumeration<'a> {
    pub fn total(&self) -> usize {
        self.per_step.iter().map(Vec::len).product()
    }

    pub fn n_r3_skipped(&self) -> usize {
        self.n_r3_skipped
    }

    /// Drain the iterator, verifying the projector-count relation
    /// (rank-2 = 30 - 2·skips, rank-1 = 4·skips) on every set.
    pub fn census(self) -> TransformCensus {
        let skipped = self.n_r3_skipped;
        let expect_rank2 = 30 - 2 * skipped;
        let expect_rank1 = 4 * skipped;
        let mut n_ks = 0;
        for set in self {
            let (n1, n2) = set.census().rank_counts();
            assert_eq!(
                (n1, n2),
                (expect_rank1, expect_rank2),
                "projector counts must follow the skip count"
            );
            n_ks += 1;
        }
        TransformCensus {
            n_r3_skipped: skipped,
            n_ks,
            n_rank2: expect_rank2,
            n_rank1: expect_rank1,
        }
    }
}

impl Iterator for TransformEnumeration<'_> {
    type Item = KsSet;

    fn next(&mut self) -> Option<KsSet> {
        if self.done {
            return None;
        }
        let choices: Vec<StepChoice> = self
            .odometer
            .iter()
            .enumerate()
            .map(|(step, &i)| self.per_step[step][i].clone())
            .collect();
        let choices: [StepChoice; 5] = choices.try_into().expect("five steps");
        let set = run_steps(self.catalog, self.seed, &self.gammas, &choices)
            .expect("enumerated choices are valid by construction");

        // advance, rightmost digit fastest
        let mut pos = self.odometer.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            self.odometer[pos] += 1;
            if self.odometer[pos] < self.per_step[pos].len() {
                break;
            }
            self.odometer[pos] = 0;
        }
        Some(set)
    }
}

/// Build the enumeration for a seed. Step 1 always applies rule 3 unless
/// `allow_skip_step1` lifts the restriction.
pub fn enumerate_transforms<'a>(
    catalog: &'a Catalog,
    seed: &'a KsSet,
    options: &EnumerateOptions,
) -> Result<TransformEnumeration<'a>, TransformError> {
    for &step in &options.skip_steps {
        if !(1..=5).contains(&step) {
            return Err(TransformError::BadSkipStep(step));
        }
        if step == 1 && !options.allow_skip_step1 {
            return Err(TransformError::SkipStepOne);
        }
    }
    let gs = gammas(seed)?;
    let mut per_step = Vec::new();
    for (i, g) in gs.iter().enumerate() {
        let step = i + 1;
        let candidates = enumerate_matchings(seed, g)?;
        let skipped = options.skip_steps.contains(&step);
        let pool: Vec<StepChoice> = if skipped {
            candidates
                .iter()
                .filter(|c| options.skipped_pool == SkippedPool::AllMatchings || !c.r3_compatible())
                .map(|c| c.to_choice(step, false))
                .collect::<Result<_, _>>()?
        } else {
            candidates
                .iter()
                .filter(|c| c.r3_compatible())
                .map(|c| c.to_choice(step, true))
                .collect::<Result<_, _>>()?
        };
        per_step.push(pool);
    }
    let done = per_step.iter().any(Vec::is_empty);
    Ok(TransformEnumeration {
        catalog,
        seed,
        gammas: gs,
        odometer: vec![0; per_step.len()],
        done,
        n_r3_skipped: options.skip_steps.len(),
        per_step,
    })
}

/// Convenience map from a matching given as plain ray index pairs.
pub fn matching_from_pairs(pairs: &[(u8, u8); 4]) -> Matching {
    let mut typed: Vec<(RayId, RayId)> = pairs
        .iter()
        .map(|(g, p)| (RayId::new(*g), RayId::new(*p)))
        .collect();
    typed.sort_by_key(|(g, _)| *g);
    Matching {
        pairs: typed.try_into().expect("four pairs"),
    }
}
