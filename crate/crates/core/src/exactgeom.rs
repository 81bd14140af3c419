//! Exact rational scalars and the homogeneous integer layout used for both
//! inequalities and points.
//!
//! An inequality `0 <= c0 + c1 x1 + ... + cd xd` is stored as the integer
//! vector `(c0, c1, ..., cd)` scaled to entry-gcd 1. A point `(x1, ..., xd)`
//! is stored as `(1, x1, ..., xd)` scaled to entry-gcd 1 with a positive
//! leading entry. The sign of the dot product of the two is the satisfaction
//! test: positive means strictly satisfied, zero means incident.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};
use thiserror::Error;

/// Exact rational number, always stored in lowest terms with a positive denominator.
pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeomError {
    #[error("cannot normalize the all-zero vector")]
    ZeroVector,
    #[error("dimension mismatch: expected {expected} entries, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("homogeneous vectors need at least 2 entries, found {0}")]
    TooShort(usize),
    #[error("point vector must have a positive leading entry")]
    NonPositiveLeading,
    #[error("expected a vector of kind {expected:?}, found {found:?}")]
    WrongKind { expected: VectorKind, found: VectorKind },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VectorKind {
    Inequality,
    Point,
}

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `p/q`, `p`, or a plain decimal like `0.75`.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        let negative = whole.trim_start().starts_with('-');
        let whole_abs = whole.trim().trim_start_matches(['-', '+']);
        let digits = format!("{}{}", if whole_abs.is_empty() { "0" } else { whole_abs }, frac);
        if !frac.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let mut n: BigInt = digits.parse().ok()?;
        if negative {
            n = -n;
        }
        let d = num_traits::pow(BigInt::from(10), frac.len());
        return Some(Rational::new(n, d));
    }
    let n: BigInt = text.parse().ok()?;
    Some(Rational::from_integer(n))
}

/// Decimal rendering for reports; exact values are carried separately.
pub fn to_f64(value: &Rational) -> f64 {
    let n = value.numer().to_string().parse::<f64>().unwrap_or(f64::NAN);
    let d = value.denom().to_string().parse::<f64>().unwrap_or(f64::NAN);
    n / d
}

pub(crate) fn gcd_of(entries: &[BigInt]) -> BigInt {
    entries.iter().fold(BigInt::zero(), |acc, e| acc.gcd(e))
}

/// Divides a nonzero integer vector by the gcd of its entries.
pub(crate) fn primitive(mut entries: Vec<BigInt>) -> Vec<BigInt> {
    let g = gcd_of(&entries);
    if !g.is_zero() && !g.is_one() {
        for e in entries.iter_mut() {
            *e = &*e / &g;
        }
    }
    entries
}

/// Clears denominators of a rational vector, keeping the direction.
pub(crate) fn integer_direction(raw: &[Rational]) -> Vec<BigInt> {
    let lcm = raw.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    raw.iter().map(|r| r.numer() * (&lcm / r.denom())).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawVector", into = "RawVector")]
pub struct HomogeneousVector {
    entries: Vec<BigInt>,
    kind: VectorKind,
}

/// Wire form: integer entries as decimal strings.
#[serde_as]
#[derive(Serialize, Deserialize)]
struct RawVector {
    #[serde_as(as = "Vec<DisplayFromStr>")]
    entries: Vec<BigInt>,
    kind: VectorKind,
}

impl TryFrom<RawVector> for HomogeneousVector {
    type Error = GeomError;

    fn try_from(raw: RawVector) -> Result<Self, Self::Error> {
        HomogeneousVector::from_integers(raw.entries, raw.kind)
    }
}

impl From<HomogeneousVector> for RawVector {
    fn from(v: HomogeneousVector) -> Self {
        RawVector { entries: v.entries, kind: v.kind }
    }
}

impl HomogeneousVector {
    /// Scales `raw` by a positive rational so the result is an integer vector
    /// with entry-gcd 1.
    pub fn normalize(raw: &[Rational], kind: VectorKind) -> Result<Self, GeomError> {
        if raw.len() < 2 {
            return Err(GeomError::TooShort(raw.len()));
        }
        if raw.iter().all(Zero::is_zero) {
            return Err(GeomError::ZeroVector);
        }
        Self::from_integers(integer_direction(raw), kind)
    }

    pub fn from_integers(entries: Vec<BigInt>, kind: VectorKind) -> Result<Self, GeomError> {
        if entries.len() < 2 {
            return Err(GeomError::TooShort(entries.len()));
        }
        if entries.iter().all(Zero::is_zero) {
            return Err(GeomError::ZeroVector);
        }
        if kind == VectorKind::Point && !entries[0].is_positive() {
            return Err(GeomError::NonPositiveLeading);
        }
        Ok(Self { entries: primitive(entries), kind })
    }

    pub fn from_i64(entries: &[i64], kind: VectorKind) -> Result<Self, GeomError> {
        Self::from_integers(entries.iter().map(|&e| BigInt::from(e)).collect(), kind)
    }

    /// Homogenizes the affine point `coords` as `(1, coords...)`.
    pub fn point(coords: &[Rational]) -> Result<Self, GeomError> {
        let mut raw = Vec::with_capacity(coords.len() + 1);
        raw.push(Rational::one());
        raw.extend_from_slice(coords);
        Self::normalize(&raw, VectorKind::Point)
    }

    /// The inequality `constant + coefficients . x >= 0`.
    pub fn inequality(constant: &Rational, coefficients: &[Rational]) -> Result<Self, GeomError> {
        let mut raw = Vec::with_capacity(coefficients.len() + 1);
        raw.push(constant.clone());
        raw.extend_from_slice(coefficients);
        Self::normalize(&raw, VectorKind::Inequality)
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.entries
    }

    pub fn kind(&self) -> VectorKind {
        self.kind
    }

    /// Ambient dimension `d` (the vector has `d + 1` entries).
    pub fn dimension(&self) -> usize {
        self.entries.len() - 1
    }

    /// Affine coordinates of a point, dividing out the leading entry.
    pub fn coords(&self) -> Vec<Rational> {
        let lead = &self.entries[0];
        self.entries[1..]
            .iter()
            .map(|e| Rational::new(e.clone(), lead.clone()))
            .collect()
    }

    /// Constant term of an inequality.
    pub fn constant(&self) -> &BigInt {
        &self.entries[0]
    }

    pub fn coefficients(&self) -> &[BigInt] {
        &self.entries[1..]
    }
}

impl fmt::Display for HomogeneousVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|e| e.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Exact pairing `h . v`; its sign tells whether `v` satisfies `h`.
pub fn pair(h: &HomogeneousVector, v: &HomogeneousVector) -> Result<Rational, GeomError> {
    if h.kind != VectorKind::Inequality {
        return Err(GeomError::WrongKind { expected: VectorKind::Inequality, found: h.kind });
    }
    if v.kind != VectorKind::Point {
        return Err(GeomError::WrongKind { expected: VectorKind::Point, found: v.kind });
    }
    if h.entries.len() != v.entries.len() {
        return Err(GeomError::DimensionMismatch {
            expected: h.entries.len(),
            found: v.entries.len(),
        });
    }
    Ok(Rational::from_integer(dot(&h.entries, &v.entries)))
}

pub(crate) fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn canonical_rows(
    rows: Vec<HomogeneousVector>,
    dimension: usize,
    kind: VectorKind,
) -> Result<Vec<HomogeneousVector>, GeomError> {
    for row in &rows {
        if row.entries.len() != dimension + 1 {
            return Err(GeomError::DimensionMismatch {
                expected: dimension + 1,
                found: row.entries.len(),
            });
        }
        if row.kind != kind {
            return Err(GeomError::WrongKind { expected: kind, found: row.kind });
        }
    }
    let mut rows = rows;
    rows.sort();
    rows.dedup();
    Ok(rows)
}

/// Facet description: every row `h` demands `h . (1, x) >= 0`; every
/// equality `e` demands `e . (1, x) = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawHRep")]
pub struct HRep {
    dimension: usize,
    rows: Vec<HomogeneousVector>,
    #[serde(default)]
    equalities: Vec<HomogeneousVector>,
}

#[derive(Deserialize)]
struct RawHRep {
    dimension: usize,
    rows: Vec<HomogeneousVector>,
    #[serde(default)]
    equalities: Vec<HomogeneousVector>,
}

impl TryFrom<RawHRep> for HRep {
    type Error = GeomError;

    fn try_from(raw: RawHRep) -> Result<Self, Self::Error> {
        HRep::with_equalities(raw.dimension, raw.rows, raw.equalities)
    }
}

impl HRep {
    pub fn new(dimension: usize, rows: Vec<HomogeneousVector>) -> Result<Self, GeomError> {
        Self::with_equalities(dimension, rows, Vec::new())
    }

    pub fn with_equalities(
        dimension: usize,
        rows: Vec<HomogeneousVector>,
        equalities: Vec<HomogeneousVector>,
    ) -> Result<Self, GeomError> {
        let rows = canonical_rows(rows, dimension, VectorKind::Inequality)?;
        let equalities = canonical_rows(equalities, dimension, VectorKind::Inequality)?;
        Ok(Self { dimension, rows, equalities })
    }

    pub fn from_i64_rows(dimension: usize, rows: &[Vec<i64>]) -> Result<Self, GeomError> {
        let rows = rows
            .iter()
            .map(|r| HomogeneousVector::from_i64(r, VectorKind::Inequality))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(dimension, rows)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn rows(&self) -> &[HomogeneousVector] {
        &self.rows
    }

    pub fn equalities(&self) -> &[HomogeneousVector] {
        &self.equalities
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// True when `point` satisfies every inequality and equality.
    pub fn contains(&self, point: &HomogeneousVector) -> Result<bool, GeomError> {
        for row in &self.rows {
            if pair(row, point)?.is_negative() {
                return Ok(false);
            }
        }
        for eq in &self.equalities {
            if !pair(eq, point)?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Vertex description: the polytope is the convex hull of the rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawVRep")]
pub struct VRep {
    dimension: usize,
    rows: Vec<HomogeneousVector>,
}

#[derive(Deserialize)]
struct RawVRep {
    dimension: usize,
    rows: Vec<HomogeneousVector>,
}

impl TryFrom<RawVRep> for VRep {
    type Error = GeomError;

    fn try_from(raw: RawVRep) -> Result<Self, Self::Error> {
        VRep::new(raw.dimension, raw.rows)
    }
}

impl VRep {
    pub fn new(dimension: usize, rows: Vec<HomogeneousVector>) -> Result<Self, GeomError> {
        let rows = canonical_rows(rows, dimension, VectorKind::Point)?;
        Ok(Self { dimension, rows })
    }

    pub fn from_points(dimension: usize, points: &[Vec<Rational>]) -> Result<Self, GeomError> {
        let rows = points
            .iter()
            .map(|p| {
                if p.len() != dimension {
                    return Err(GeomError::DimensionMismatch { expected: dimension, found: p.len() });
                }
                HomogeneousVector::point(p)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(dimension, rows)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn rows(&self) -> &[HomogeneousVector] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Affine coordinates of every vertex, in canonical order.
    pub fn points(&self) -> Vec<Vec<Rational>> {
        self.rows.iter().map(HomogeneousVector::coords).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &HomogeneousVector) -> Vec<i64> {
        v.entries().iter().map(|e| e.to_string().parse().unwrap()).collect()
    }

    fn rats(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| rat(x)).collect()
    }

    #[test]
    fn normalize_examples() {
        let h = HomogeneousVector::normalize(&rats(&[1, 1, -1]), VectorKind::Inequality).unwrap();
        assert_eq!(ints(&h), vec![1, 1, -1]);
        let h = HomogeneousVector::normalize(&rats(&[2, 4, -6]), VectorKind::Inequality).unwrap();
        assert_eq!(ints(&h), vec![1, 2, -3]);
        let p = HomogeneousVector::point(&rats(&[0, 0, -1])).unwrap();
        assert_eq!(ints(&p), vec![1, 0, 0, -1]);
    }

    #[test]
    fn normalize_clears_denominators() {
        let p = HomogeneousVector::point(&[ratio(1, 2), rat(0), ratio(-1, 3)]).unwrap();
        assert_eq!(ints(&p), vec![6, 3, 0, -2]);
        assert_eq!(p.coords(), vec![ratio(1, 2), rat(0), ratio(-1, 3)]);
    }

    #[test]
    fn normalize_rejects_zero_and_short() {
        assert_eq!(
            HomogeneousVector::normalize(&rats(&[0, 0, 0]), VectorKind::Inequality),
            Err(GeomError::ZeroVector)
        );
        assert_eq!(
            HomogeneousVector::normalize(&rats(&[3]), VectorKind::Inequality),
            Err(GeomError::TooShort(1))
        );
        assert_eq!(
            HomogeneousVector::normalize(&rats(&[-1, 2]), VectorKind::Point),
            Err(GeomError::NonPositiveLeading)
        );
    }

    #[test]
    fn pair_examples() {
        let h = HomogeneousVector::from_i64(&[1, 1, -1], VectorKind::Inequality).unwrap();
        let origin = HomogeneousVector::from_i64(&[1, 0, 0], VectorKind::Point).unwrap();
        let incident = HomogeneousVector::from_i64(&[1, 0, 1], VectorKind::Point).unwrap();
        assert_eq!(pair(&h, &origin).unwrap(), rat(1));
        assert_eq!(pair(&h, &incident).unwrap(), rat(0));

        let h = HomogeneousVector::from_i64(&[1, 1, 1, -1], VectorKind::Inequality).unwrap();
        let v = HomogeneousVector::point(&rats(&[1, 1, 1])).unwrap();
        assert_eq!(pair(&h, &v).unwrap(), rat(2));
    }

    #[test]
    fn pair_rejects_mismatch() {
        let h = HomogeneousVector::from_i64(&[1, 1, -1], VectorKind::Inequality).unwrap();
        let v = HomogeneousVector::from_i64(&[1, 0, 0, 0], VectorKind::Point).unwrap();
        assert_eq!(pair(&h, &v), Err(GeomError::DimensionMismatch { expected: 3, found: 4 }));
        assert!(matches!(pair(&v, &h), Err(GeomError::WrongKind { .. })));
    }

    #[test]
    fn reps_sort_and_dedup() {
        let h = HRep::from_i64_rows(1, &[vec![1, -1], vec![1, 1], vec![2, 2]]).unwrap();
        assert_eq!(h.len(), 2);
        assert_eq!(ints(&h.rows()[0]), vec![1, -1]);
        assert!(HRep::from_i64_rows(2, &[vec![1, -1]]).is_err());
    }

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational("9/10"), Some(ratio(9, 10)));
        assert_eq!(parse_rational("-3"), Some(rat(-3)));
        assert_eq!(parse_rational("0.75"), Some(ratio(3, 4)));
        assert_eq!(parse_rational("-0.5"), Some(ratio(-1, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
    }
}
