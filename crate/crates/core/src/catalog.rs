//! The Kernaghan-Peres catalog: 40 rays and 25 bases of the three-qubit
//! KS proof, embedded as static data, plus validation and the plain-text
//! interchange formats.
//!
//! The first five bases are pure (their rays are disjoint); the remaining
//! twenty are hybrid, each mixing half of one pure basis with half of
//! another. Every ray occurs once among the pure bases and four times
//! among the hybrid ones; `validate_catalog` re-derives both facts instead
//! of assuming them.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{dot, integer_rank, CanonicalSubspace, LinalgError, Ray, RayId, DIM};

/// Catalog index of a basis, 1-based (1..=25 for the Kernaghan-Peres table).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct BasisId(u8);

impl BasisId {
    pub fn new(index: u8) -> BasisId {
        debug_assert!(index >= 1, "basis indices are 1-based");
        BasisId(index)
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl fmt::Display for BasisId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    Pure,
    Hybrid,
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("ray text must be 8 characters of 0/1/-, got {0:?}")]
    BadRayText(String),
    #[error("ray index {0} is not in the catalog")]
    UnknownRay(u8),
    #[error("basis line {0:?} is not of the form \"index: r1 r2 ... r8\"")]
    BadBasisLine(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Ray texts exactly as printed in the source table ('-' denotes -1).
/// Rows 39 and 40 are printed with a negative leading coordinate and get
/// flipped by canonicalization.
const RAY_DATA: [&str; 40] = [
    "10000000", "01000000", "00100000", "00010000", //  1- 4
    "00001000", "00000100", "00000010", "00000001", //  5- 8
    "11110000", "11--0000", "1-1-0000", "1--10000", //  9-12
    "00001111", "000011--", "00001-1-", "00001--1", // 13-16
    "11001100", "1100--00", "1-001-00", "1-00-100", // 17-20
    "00110011", "001100--", "001-001-", "001-00-1", // 21-24
    "10101010", "1010-0-0", "10-010-0", "10-0-010", // 25-28
    "01010101", "01010-0-", "010-010-", "010-0-01", // 29-32
    "100101-0", "100-0110", "10010-10", "100-0--0", // 33-36
    "0110-001", "01-01001", "0-101001", "0--0-001", // 37-40
];

const BASIS_DATA: [[u8; 8]; 25] = [
    [1, 2, 3, 4, 5, 6, 7, 8],
    [9, 10, 11, 12, 13, 14, 15, 16],
    [17, 18, 19, 20, 21, 22, 23, 24],
    [25, 26, 27, 28, 29, 30, 31, 32],
    [33, 34, 35, 36, 37, 38, 39, 40],
    [1, 2, 3, 4, 13, 14, 15, 16],
    [1, 2, 5, 6, 21, 22, 23, 24],
    [1, 3, 5, 7, 29, 30, 31, 32],
    [1, 4, 6, 7, 37, 38, 39, 40],
    [2, 3, 5, 8, 33, 34, 35, 36],
    [2, 4, 6, 8, 25, 26, 27, 28],
    [3, 4, 7, 8, 17, 18, 19, 20],
    [5, 6, 7, 8, 9, 10, 11, 12],
    [9, 10, 13, 14, 19, 20, 23, 24],
    [9, 11, 13, 15, 27, 28, 31, 32],
    [9, 12, 14, 15, 34, 36, 38, 39],
    [10, 11, 13, 16, 33, 35, 37, 40],
    [10, 12, 14, 16, 25, 26, 29, 30],
    [11, 12, 15, 16, 17, 18, 21, 22],
    [17, 19, 21, 23, 26, 28, 30, 32],
    [17, 20, 22, 23, 35, 36, 37, 39],
    [18, 19, 21, 24, 33, 34, 38, 40],
    [18, 20, 22, 24, 25, 27, 29, 31],
    [25, 28, 30, 31, 33, 36, 37, 38],
    [26, 27, 29, 32, 34, 35, 39, 40],
];

/// Parse the 8-character ray text format (characters 0, 1, '-').
pub fn parse_ray_text(s: &str) -> Result<[i64; DIM], CatalogError> {
    let mut coords = [0i64; DIM];
    let chars: Vec<char> = s.trim().chars().collect();
    if chars.len() != DIM {
        return Err(CatalogError::BadRayText(s.to_string()));
    }
    for (c, out) in chars.iter().zip(&mut coords) {
        *out = match c {
            '0' => 0,
            '1' => 1,
            '-' => -1,
            _ => return Err(CatalogError::BadRayText(s.to_string())),
        };
    }
    Ok(coords)
}

/// Render coordinates in the 8-character text format.
pub fn ray_text(coords: &[i64; DIM]) -> String {
    coords
        .iter()
        .map(|c| match c {
            0 => '0',
            1 => '1',
            _ => '-',
        })
        .collect()
}

/// A rank-1 or rank-2 projector: an unordered set of 1 or 2 catalog rays
/// together with the canonical form of the subspace they span.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Projector {
    rays: Vec<RayId>,
    subspace: CanonicalSubspace,
}

impl Projector {
    /// Build from catalog ray indices. A pair must be orthogonal; duplicate
    /// indices are rejected as dependent.
    pub fn new(catalog: &Catalog, rays: &[RayId]) -> Result<Projector, CatalogError> {
        let mut ids = rays.to_vec();
        ids.sort_unstable();
        let vecs = ids
            .iter()
            .map(|id| catalog.try_ray(*id))
            .collect::<Result<Vec<_>, _>>()?;
        let subspace = CanonicalSubspace::span_of_rays(&vecs)?;
        Ok(Projector {
            rays: ids,
            subspace,
        })
    }

    pub fn rank(&self) -> usize {
        self.rays.len()
    }

    pub fn rays(&self) -> &[RayId] {
        &self.rays
    }

    pub fn subspace(&self) -> &CanonicalSubspace {
        &self.subspace
    }
}

impl fmt::Display for Projector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rays.as_slice() {
            [r] => write!(f, "{r}"),
            [a, b] => write!(f, "({a},{b})"),
            _ => unreachable!("projectors hold 1 or 2 rays"),
        }
    }
}

/// A measurement context: projectors whose ranks sum to the dimension.
/// Construction does not validate; the verifier reports violations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis {
    index: BasisId,
    kind: BasisKind,
    projectors: Vec<Projector>,
    ray_set: Vec<RayId>,
}

impl Basis {
    pub fn new(index: BasisId, kind: BasisKind, mut projectors: Vec<Projector>) -> Basis {
        projectors.sort();
        let mut ray_set: Vec<RayId> = projectors
            .iter()
            .flat_map(|p| p.rays().iter().copied())
            .collect();
        ray_set.sort_unstable();
        Basis {
            index,
            kind,
            projectors,
            ray_set,
        }
    }

    pub fn index(&self) -> BasisId {
        self.index
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn projectors(&self) -> &[Projector] {
        &self.projectors
    }

    /// Underlying ray indices, sorted; duplicates are preserved so that the
    /// verifier can report reuse.
    pub fn ray_set(&self) -> &[RayId] {
        &self.ray_set
    }

    pub fn rank_sum(&self) -> usize {
        self.projectors.iter().map(Projector::rank).sum()
    }

    pub fn contains_ray(&self, ray: RayId) -> bool {
        self.ray_set.binary_search(&ray).is_ok()
    }
}

/// The ray and basis tables, constructed once and immutable thereafter.
#[derive(Clone, Debug)]
pub struct Catalog {
    rays: Vec<Ray>,
    bases: Vec<Basis>,
}

impl Catalog {
    /// The embedded Kernaghan-Peres catalog.
    pub fn kernaghan_peres() -> Catalog {
        let rays: Vec<Ray> = RAY_DATA
            .iter()
            .enumerate()
            .map(|(i, text)| {
                let coords = parse_ray_text(text).expect("embedded ray data");
                Ray::with_index(coords, RayId::new(i as u8 + 1)).expect("embedded ray data")
            })
            .collect();
        let mut catalog = Catalog {
            rays,
            bases: Vec::new(),
        };
        catalog.bases = BASIS_DATA
            .iter()
            .enumerate()
            .map(|(i, rays)| {
                catalog
                    .rank1_basis(i as u8 + 1, rays)
                    .expect("embedded basis data")
            })
            .collect();
        catalog
    }

    /// Load a catalog from the two text formats. Ray lines are
    /// canonicalized on input, so a sign-flipped ray denotes the same
    /// catalog entry.
    pub fn from_text(rays_text: &str, bases_text: &str) -> Result<Catalog, CatalogError> {
        let mut rays = Vec::new();
        for line in rays_text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let coords = parse_ray_text(line)?;
            let id = RayId::new(rays.len() as u8 + 1);
            rays.push(Ray::with_index(coords, id)?);
        }
        let mut catalog = Catalog {
            rays,
            bases: Vec::new(),
        };
        let mut bases = Vec::new();
        for line in bases_text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (idx, rest) = line
                .split_once(':')
                .ok_or_else(|| CatalogError::BadBasisLine(line.to_string()))?;
            let index: u8 = idx
                .trim()
                .parse()
                .map_err(|_| CatalogError::BadBasisLine(line.to_string()))?;
            let ray_ids = rest
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<u8>()
                        .map_err(|_| CatalogError::BadBasisLine(line.to_string()))
                })
                .collect::<Result<Vec<u8>, _>>()?;
            if ray_ids.is_empty() {
                return Err(CatalogError::BadBasisLine(line.to_string()));
            }
            bases.push(catalog.rank1_basis(index, &ray_ids)?);
        }
        catalog.bases = bases;
        Ok(catalog)
    }

    fn rank1_basis(&self, index: u8, rays: &[u8]) -> Result<Basis, CatalogError> {
        let projectors = rays
            .iter()
            .map(|r| Projector::new(self, &[RayId::new(*r)]))
            .collect::<Result<Vec<_>, _>>()?;
        let kind = if index <= 5 {
            BasisKind::Pure
        } else {
            BasisKind::Hybrid
        };
        Ok(Basis::new(BasisId::new(index), kind, projectors))
    }

    pub fn rays(&self) -> &[Ray] {
        &self.rays
    }

    pub fn bases(&self) -> &[Basis] {
        &self.bases
    }

    pub fn try_ray(&self, id: RayId) -> Result<Ray, CatalogError> {
        self.rays
            .get(id.get() as usize - 1)
            .copied()
            .ok_or(CatalogError::UnknownRay(id.get()))
    }

    /// Panics on an out-of-range index; use `try_ray` for untrusted input.
    pub fn ray(&self, id: RayId) -> Ray {
        self.try_ray(id).expect("ray index in range")
    }

    pub fn basis(&self, id: BasisId) -> Option<&Basis> {
        self.bases.iter().find(|b| b.index() == id)
    }

    /// One ray per line in the 8-character text format.
    pub fn rays_text(&self) -> String {
        let mut out = String::new();
        for ray in &self.rays {
            out.push_str(&ray_text(ray.coords()));
            out.push('\n');
        }
        out
    }

    /// One basis per line: `index: r1 r2 ... r8`.
    pub fn bases_text(&self) -> String {
        let mut out = String::new();
        for basis in &self.bases {
            let rays: Vec<String> = basis.ray_set().iter().map(|r| r.to_string()).collect();
            out.push_str(&format!("{}: {}\n", basis.index(), rays.join(" ")));
        }
        out
    }
}

/// The 40 rays of the embedded catalog, indexed 1..=40, in canonical sign.
pub fn kp_rays() -> Vec<Ray> {
    Catalog::kernaghan_peres().rays().to_vec()
}

/// The 25 bases of the embedded catalog, all projectors rank-1.
pub fn kp_bases() -> Vec<Basis> {
    Catalog::kernaghan_peres().bases().to_vec()
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CatalogViolation {
    #[error("basis {basis}: rays {a} and {b} are not orthogonal (dot {dot})")]
    NotOrthogonal {
        basis: BasisId,
        a: RayId,
        b: RayId,
        dot: i64,
    },
    #[error("basis {basis}: rank {rank} does not span the space")]
    Incomplete { basis: BasisId, rank: usize },
    #[error("basis {basis}: ray {ray} appears more than once")]
    DuplicateRay { basis: BasisId, ray: RayId },
    #[error(
        "ray {ray}: occurs {pure} times in pure bases and {hybrid} in hybrid (expected 1 and 4)"
    )]
    Occurrence {
        ray: RayId,
        pure: usize,
        hybrid: usize,
    },
}

/// Result of `validate_catalog`: violations plus the per-ray occurrence
/// census that was checked.
#[derive(Debug)]
pub struct CatalogReport {
    pub violations: Vec<CatalogViolation>,
    /// Per ray: (occurrences among pure bases, occurrences among hybrid).
    pub occurrences: BTreeMap<RayId, (usize, usize)>,
}

impl CatalogReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for CatalogReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            writeln!(f, "catalog ok: every basis orthogonal and complete; every ray occurs once in pure and four times in hybrid bases")
        } else {
            for v in &self.violations {
                writeln!(f, "violation: {v}")?;
            }
            Ok(())
        }
    }
}

/// Check every basis for orthogonality and completeness (exact rank 8) and
/// the per-ray occurrence counts (once in bases 1-5, four times in 6-25).
pub fn validate_catalog(catalog: &Catalog) -> CatalogReport {
    let mut violations = Vec::new();

    for basis in catalog.bases() {
        let rays = basis.ray_set();
        for w in rays.windows(2) {
            if w[0] == w[1] {
                violations.push(CatalogViolation::DuplicateRay {
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
                    violations.push(CatalogViolation::NotOrthogonal {
                        basis: basis.index(),
                        a,
                        b,
                        dot: d,
                    });
                }
            }
        }
        let rows: Vec<[i64; DIM]> = rays.iter().map(|r| *catalog.ray(*r).coords()).collect();
        let rank = integer_rank(&rows);
        if rank != DIM {
            violations.push(CatalogViolation::Incomplete {
                basis: basis.index(),
                rank,
            });
        }
    }

    let mut occurrences: BTreeMap<RayId, (usize, usize)> = BTreeMap::new();
    for ray in catalog.rays() {
        if let Some(id) = ray.index() {
            occurrences.insert(id, (0, 0));
        }
    }
    for basis in catalog.bases() {
        for &ray in basis.ray_set() {
            let entry = occurrences.entry(ray).or_insert((0, 0));
            match basis.kind() {
                BasisKind::Pure => entry.0 += 1,
                BasisKind::Hybrid => entry.1 += 1,
            }
        }
    }
    for (&ray, &(pure, hybrid)) in &occurrences {
        if (pure, hybrid) != (1, 4) {
            violations.push(CatalogViolation::Occurrence { ray, pure, hybrid });
        }
    }

    CatalogReport {
        violations,
        occurrences,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_rays_match_table() {
        let rays = kp_rays();
        assert_eq!(rays.len(), 40);
        assert_eq!(rays[16].coords(), &[1, 1, 0, 0, 1, 1, 0, 0]); // index 17
        assert_eq!(rays[35].coords(), &[1, 0, 0, -1, 0, -1, -1, 0]); // index 36
        assert_eq!(rays[0].coords(), &[1, 0, 0, 0, 0, 0, 0, 0]); // index 1
                                                                 // rows printed with a negative lead come out sign-flipped
        assert_eq!(rays[38].coords(), &[0, 1, -1, 0, -1, 0, 0, -1]); // index 39
        assert_eq!(rays[39].coords(), &[0, 1, 1, 0, 1, 0, 0, -1]); // index 40
        for (i, ray) in rays.iter().enumerate() {
            assert_eq!(ray.index(), Some(RayId::new(i as u8 + 1)));
        }
    }

    #[test]
    fn embedded_bases_match_table() {
        let bases = kp_bases();
        assert_eq!(bases.len(), 25);
        let ids = |b: &Basis| b.ray_set().iter().map(|r| r.get()).collect::<Vec<_>>();
        assert_eq!(ids(&bases[12]), vec![5, 6, 7, 8, 9, 10, 11, 12]); // basis 13
        assert_eq!(ids(&bases[0]), vec![1, 2, 3, 4, 5, 6, 7, 8]); // basis 1
        assert_eq!(ids(&bases[24]), vec![26, 27, 29, 32, 34, 35, 39, 40]); // basis 25
        for basis in &bases[..5] {
            assert_eq!(basis.kind(), BasisKind::Pure);
        }
        for basis in &bases[5..] {
            assert_eq!(basis.kind(), BasisKind::Hybrid);
        }
    }

    #[test]
    fn full_catalog_validates() {
        let catalog = Catalog::kernaghan_peres();
        let report = validate_catalog(&catalog);
        assert!(report.is_ok(), "{report}");
        for &counts in report.occurrences.values() {
            assert_eq!(counts, (1, 4));
        }
    }

    #[test]
    fn negated_ray_canonicalizes_and_validates() {
        let catalog = Catalog::kernaghan_peres();
        let mut rays_text = String::new();
        for (i, ray) in catalog.rays().iter().enumerate() {
            let mut coords = *ray.coords();
            if i == 16 {
                for c in &mut coords {
                    *c = -*c;
                }
            }
            // render the raw (possibly negated) coordinates
            rays_text.push_str(&ray_text(&coords));
            rays_text.push('\n');
        }
        let loaded = Catalog::from_text(&rays_text, &catalog.bases_text()).unwrap();
        assert!(validate_catalog(&loaded).is_ok());
        // compare coordinates, not the index fast path
        assert_eq!(
            loaded.ray(RayId::new(17)).coords(),
            catalog.ray(RayId::new(17)).coords()
        );
    }

    #[test]
    fn missing_ray_is_a_completeness_failure() {
        let catalog = Catalog::kernaghan_peres();
        let mut bases_text = String::new();
        for basis in catalog.bases() {
            let rays: Vec<String> = basis
                .ray_set()
                .iter()
                .filter(|r| !(basis.index().get() == 3 && r.get() == 24))
                .map(|r| r.to_string())
                .collect();
            bases_text.push_str(&format!("{}: {}\n", basis.index(), rays.join(" ")));
        }
        let loaded = Catalog::from_text(&catalog.rays_text(), &bases_text).unwrap();
        let report = validate_catalog(&loaded);
        assert!(!report.is_ok());
        assert!(report.violations.iter().any(|v| matches!(
            v,
            CatalogViolation::Incomplete { basis, rank: 7 } if basis.get() == 3
        )));
    }

    #[test]
    fn text_round_trip() {
        let catalog = Catalog::kernaghan_peres();
        let loaded = Catalog::from_text(&catalog.rays_text(), &catalog.bases_text()).unwrap();
        assert_eq!(loaded.rays_text(), catalog.rays_text());
        assert_eq!(loaded.bases_text(), catalog.bases_text());
        for (a, b) in loaded.rays().iter().zip(catalog.rays()) {
            assert_eq!(a.coords(), b.coords());
        }
    }

    #[test]
    fn pure_bases_partition_the_rays() {
        let catalog = Catalog::kernaghan_peres();
        let mut seen = Vec::new();
        for basis in &catalog.bases()[..5] {
            seen.extend(basis.ray_set().iter().map(|r| r.get()));
        }
        seen.sort_unstable();
        assert_eq!(seen, (1..=40).collect::<Vec<u8>>());
    }

    #[test]
    fn all_basis_pairs_orthogonal() {
        // every one of the 25 bases: all C(8,2) = 28 pairs orthogonal
        let catalog = Catalog::kernaghan_peres();
        for basis in catalog.bases() {
            let rays = basis.ray_set();
            for (i, &a) in rays.iter().enumerate() {
                for &b in &rays[i + 1..] {
                    assert_eq!(dot(&catalog.ray(a), &catalog.ray(b)), 0, "{a} . {b}");
                }
            }
        }
    }
}
