//! Exact integer linear algebra for rays and small subspaces.
//!
//! Everything in the catalog is ±1/0 combinatorics, so all arithmetic here
//! is over the integers: inner products, sign canonicalization of rays, and
//! a unique reduced integer echelon form that serves as the identity test
//! for rank-1 and rank-2 projectors. No floating point anywhere.

use std::fmt;

use thiserror::Error;

/// Dimension of the ambient real Hilbert space (three qubits).
pub const DIM: usize = 8;

/// Catalog index of a ray, 1-based (1..=40 for the Kernaghan-Peres table).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct RayId(u8);

impl RayId {
    pub fn new(index: u8) -> RayId {
        debug_assert!(index >= 1, "ray indices are 1-based");
        RayId(index)
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl fmt::Display for RayId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinalgError {
    #[error("zero vector cannot be canonicalized")]
    ZeroVector,
    #[error("ray coordinate {0} is outside {{-1, 0, 1}}")]
    CoordOutOfRange(i64),
    #[error("rays are linearly dependent")]
    Dependent,
    #[error("rays are not orthogonal (dot product {0})")]
    NotOrthogonal(i64),
    #[error("a subspace is spanned by 1 or 2 rays, got {0}")]
    BadSpanSize(usize),
}

/// A rank-1 projector direction: an 8-vector with entries in {-1, 0, +1},
/// stored in canonical sign (first nonzero coordinate positive). A ray and
/// its negative represent the same projector, so construction canonicalizes.
#[derive(Clone, Copy, Debug)]
pub struct Ray {
    coords: [i64; DIM],
    index: Option<RayId>,
}

impl Ray {
    /// Canonicalize a raw coordinate vector, flipping the overall sign if
    /// the first nonzero coordinate is negative. Rejects the zero vector
    /// and entries outside {-1, 0, +1}.
    pub fn new(coords: [i64; DIM]) -> Result<Ray, LinalgError> {
        if let Some(&bad) = coords.iter().find(|c| c.abs() > 1) {
            return Err(LinalgError::CoordOutOfRange(bad));
        }
        let lead = *coords
            .iter()
            .find(|c| **c != 0)
            .ok_or(LinalgError::ZeroVector)?;
        let mut coords = coords;
        if lead < 0 {
            for c in &mut coords {
                *c = -*c;
            }
        }
        Ok(Ray {
            coords,
            index: None,
        })
    }

    /// A catalog ray; only the catalog constructor assigns indices, so an
    /// index always agrees with the canonical coordinates it labels.
    pub(crate) fn with_index(coords: [i64; DIM], index: RayId) -> Result<Ray, LinalgError> {
        let mut ray = Ray::new(coords)?;
        ray.index = Some(index);
        Ok(ray)
    }

    pub fn coords(&self) -> &[i64; DIM] {
        &self.coords
    }

    pub fn index(&self) -> Option<RayId> {
        self.index
    }
}

/// Rays compare by catalog index when both carry one, by canonical
/// coordinates otherwise.
impl PartialEq for Ray {
    fn eq(&self, other: &Self) -> bool {
        match (self.index, other.index) {
            (Some(a), Some(b)) => a == b,
            _ => self.coords == other.coords,
        }
    }
}

impl Eq for Ray {}

impl std::hash::Hash for Ray {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.coords.hash(state);
    }
}

impl fmt::Display for Ray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.coords {
            f.write_str(match c {
                0 => "0",
                1 => "1",
                _ => "-",
            })?;
        }
        Ok(())
    }
}

/// Standard inner product over the integers.
pub fn dot(a: &Ray, b: &Ray) -> i64 {
    a.coords.iter().zip(&b.coords).map(|(x, y)| x * y).sum()
}

/// The unique reduced integer echelon form of a 1- or 2-dimensional row
/// space: pivot entries positive, each row primitive (content 1), pivot
/// columns cleared in the other rows. Two subspaces are equal as sets of
/// vectors iff their canonical forms are identical component-wise, which
/// makes this the identity key for projectors.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalSubspace {
    rows: Vec<[i64; DIM]>,
}

impl CanonicalSubspace {
    /// Span of 1 or 2 rays. A pair must be orthogonal and independent; the
    /// result is invariant under input order and per-ray sign.
    pub fn span_of_rays(rays: &[Ray]) -> Result<CanonicalSubspace, LinalgError> {
        match rays {
            [a] => Self::from_rows(&[*a.coords()]),
            [a, b] => {
                let d = dot(a, b);
                if d != 0 {
                    return Err(LinalgError::NotOrthogonal(d));
                }
                Self::from_rows(&[*a.coords(), *b.coords()])
            }
            _ => Err(LinalgError::BadSpanSize(rays.len())),
        }
    }

    /// Canonicalize arbitrary integer rows. Idempotent: feeding a canonical
    /// form's rows back returns it unchanged. Rejects rank-deficient input.
    pub fn from_rows(rows: &[[i64; DIM]]) -> Result<CanonicalSubspace, LinalgError> {
        let reduced = reduce_rows(rows.to_vec());
        if reduced.is_empty() {
            return Err(LinalgError::ZeroVector);
        }
        if reduced.len() < rows.len() {
            return Err(LinalgError::Dependent);
        }
        if reduced.len() > 2 {
            return Err(LinalgError::BadSpanSize(reduced.len()));
        }
        Ok(CanonicalSubspace { rows: reduced })
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[[i64; DIM]] {
        &self.rows
    }
}

impl fmt::Debug for CanonicalSubspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "span{:?}", self.rows)
    }
}

/// Rank of an integer matrix over the rationals, computed exactly.
pub fn integer_rank(rows: &[[i64; DIM]]) -> usize {
    reduce_rows(rows.to_vec()).len()
}

/// Fraction-free Gauss-Jordan elimination to the unique primitive reduced
/// echelon form. Rows are kept primitive after every elimination so entries
/// stay small; zero rows are dropped.
fn reduce_rows(mut m: Vec<[i64; DIM]>) -> Vec<[i64; DIM]> {
    for row in &mut m {
        normalize_primitive(row);
    }
    let nrows = m.len();
    let mut rank = 0;
    for col in 0..DIM {
        let Some(pivot) = (rank..nrows).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(rank, pivot);
        let pivot_row = m[rank];
        for (r, row) in m.iter_mut().enumerate() {
            if r == rank || row[col] == 0 {
                continue;
            }
            let (a, b) = (pivot_row[col], row[col]);
            let g = gcd(a, b);
            let (fa, fb) = (a / g, b / g);
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                *x = *x * fa - p * fb;
            }
            normalize_primitive(row);
        }
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    m.truncate(rank);
    for row in &mut m {
        normalize_primitive(row);
    }
    m
}

/// Divide a row by its content and flip the sign so the leading entry is
/// positive. Zero rows are left untouched.
fn normalize_primitive(row: &mut [i64; DIM]) {
    let mut g: i64 = 0;
    for &x in row.iter() {
        g = gcd(g, x);
    }
    if g == 0 {
        return;
    }
    let lead = *row.iter().find(|x| **x != 0).unwrap();
    let divisor = if lead < 0 { -g } else { g };
    for x in row.iter_mut() {
        *x /= divisor;
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
