//! Exact combinatorial engine for Kochen-Specker sets in the three-qubit
//! (eight-dimensional) system.
//!
//! - [`catalog`]: the Kernaghan-Peres 40-ray/25-basis tables, embedded and
//!   validated, with plain-text interchange formats.
//! - [`linalg`]: exact integer inner products, ray sign canonicalization,
//!   and the canonical subspace form used as projector identity.
//! - [`seeker`]: exhaustive search for the 64 seed sets of type
//!   20₂20₄–15₈ and their Γ/¬Γ occurrence structure.
//! - [`transformer`]: the three-rule/five-step scheme producing rank-2
//!   (or mixed-rank) KS sets, with full enumeration of the open choices.
//! - [`verifier`]: independent checks: structure, the parity-proof census
//!   argument, and brute-force noncontextual colorability.
//!
//! All arithmetic is exact; there is no floating point anywhere.

pub mod catalog;
pub mod linalg;
pub mod seeker;
pub mod transformer;
pub mod verifier;

pub use catalog::{
    kp_bases, kp_rays, validate_catalog, Basis, BasisId, BasisKind, Catalog, CatalogReport,
    CatalogViolation, Projector,
};
pub use linalg::{dot, CanonicalSubspace, LinalgError, Ray, RayId, DIM};
pub use seeker::{
    classify_profile, find_seed_sets, find_seed_sets_among, gammas, Census, GammaSet, KsSet,
    KsSetDoc,
};
pub use transformer::{
    apply_step, enumerate_matchings, enumerate_transforms, matching_from_pairs, rule1_select_hbs,
    transform, EnumerateOptions, Matching, MatchingCandidate, Rule1Selection, SkippedPool,
    StepChoice, TransformCensus, TransformEnumeration, TransformError, TransformState,
};
pub use verifier::{
    check_structure, has_parity_proof, is_colorable, verify, Coloring, StructureReport,
    VerifyReport,
};
