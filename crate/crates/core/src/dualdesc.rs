//! Conversion between facet and vertex descriptions of bounded polytopes,
//! plus redundancy removal, all in exact arithmetic.
//!
//! Both directions reduce to one problem: enumerating the extreme rays of a
//! pointed cone `{y : A y >= 0}`. That is done with the incremental double
//! description method, testing adjacency combinatorially on incidence sets.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::exactgeom::{dot, primitive, GeomError, HRep, HomogeneousVector, Rational, VRep, VectorKind};
use crate::linalg::{self, to_rational};
use crate::lp::{self, ConeMembership, Optimum};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("the inequalities describe an empty polytope")]
    EmptyPolytope,
    #[error("the inequalities describe an unbounded polyhedron")]
    Unbounded,
    #[error("empty input")]
    EmptyInput,
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Re-sort the pending rows after this many insertions.
const REORDER_INTERVAL: usize = 8;

#[derive(Clone, Debug)]
struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    fn new(len: usize) -> Self {
        Self { words: vec![0; len.div_ceil(64)] }
    }

    fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    fn intersection(&self, other: &Self) -> Self {
        Self { words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect() }
    }

    fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn is_subset_of(&self, other: &Self) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }
}

#[derive(Clone, Debug)]
struct Ray {
    v: Vec<BigInt>,
    zeros: BitSet,
}

/// Extreme rays of `{y : row . y >= 0 for all rows}`, which must be pointed
/// (the rows span the full space of dimension `dim`).
pub(crate) fn extreme_rays(rows: &[Vec<BigInt>], dim: usize) -> Vec<Vec<BigInt>> {
    let nrows = rows.len();
    let rational_rows: Vec<Vec<Rational>> = rows.iter().map(|r| to_rational(r)).collect();

    // Greedy full-rank starting subsystem.
    let mut basis: Vec<usize> = Vec::new();
    let mut basis_rows: Vec<Vec<Rational>> = Vec::new();
    for (i, row) in rational_rows.iter().enumerate() {
        basis_rows.push(row.clone());
        if linalg::rank(&basis_rows) == basis_rows.len() {
            basis.push(i);
            if basis.len() == dim {
                break;
            }
        } else {
            basis_rows.pop();
        }
    }
    assert_eq!(basis.len(), dim, "extreme_rays requires a pointed cone");

    let inv = linalg::inverse(&basis_rows).expect("basis rows are independent");
    let mut rays: Vec<Ray> = (0..dim)
        .map(|j| {
            let column: Vec<Rational> = inv.iter().map(|r| r[j].clone()).collect();
            let v = linalg::primitive_from_rational(&column);
            let mut zeros = BitSet::new(nrows);
            for (k, &b) in basis.iter().enumerate() {
                if k != j {
                    zeros.insert(b);
                }
            }
            Ray { v, zeros }
        })
        .collect();

    let mut pending: Vec<usize> = (0..nrows).filter(|i| !basis.contains(i)).collect();
    let mut since_reorder = REORDER_INTERVAL;
    while !pending.is_empty() {
        if since_reorder == REORDER_INTERVAL {
            reorder(&mut pending, rows, &rays);
            since_reorder = 0;
        }
        let row_index = pending.remove(0);
        since_reorder += 1;
        rays = insert_row(rays, &rows[row_index], row_index, dim);
    }
    rays.into_iter().map(|r| r.v).collect()
}

/// Pending rows ordered by how many current rays lie on their hyperplane,
/// fewest first; ties keep input order.
fn reorder(pending: &mut [usize], rows: &[Vec<BigInt>], rays: &[Ray]) {
    let mut keyed: Vec<(usize, usize)> = pending
        .par_iter()
        .map(|&i| {
            let incident = rays.iter().filter(|r| dot(&rows[i], &r.v).is_zero()).count();
            (incident, i)
        })
        .collect();
    keyed.sort();
    for (slot, (_, i)) in pending.iter_mut().zip(keyed) {
        *slot = i;
    }
}

fn insert_row(rays: Vec<Ray>, row: &[BigInt], row_index: usize, dim: usize) -> Vec<Ray> {
    let values: Vec<BigInt> = rays.iter().map(|r| dot(row, &r.v)).collect();
    let plus: Vec<usize> = (0..rays.len()).filter(|&k| values[k].is_positive()).collect();
    let minus: Vec<usize> = (0..rays.len()).filter(|&k| values[k].is_negative()).collect();
    if minus.is_empty() {
        let mut rays = rays;
        for (ray, value) in rays.iter_mut().zip(&values) {
            if value.is_zero() {
                ray.zeros.insert(row_index);
            }
        }
        return rays;
    }

    let threshold = dim.saturating_sub(2);
    let created: Vec<Ray> = plus
        .par_iter()
        .flat_map_iter(|&p| {
            let rays = &rays;
            let values = &values;
            minus.iter().filter_map(move |&n| {
                let common = rays[p].zeros.intersection(&rays[n].zeros);
                if common.count() < threshold {
                    return None;
                }
                let blocked = rays.iter().enumerate().any(|(k, r)| {
                    k != p && k != n && common.is_subset_of(&r.zeros)
                });
                if blocked {
                    return None;
                }
                let vp = &values[p];
                let vn = &values[n];
                let combined: Vec<BigInt> = rays[n]
                    .v
                    .iter()
                    .zip(&rays[p].v)
                    .map(|(a, b)| vp * a - vn * b)
                    .collect();
                let mut zeros = common;
                zeros.insert(row_index);
                Some(Ray { v: primitive(combined), zeros })
            })
        })
        .collect();

    let mut next: Vec<Ray> = Vec::with_capacity(rays.len() + created.len());
    for (mut ray, value) in rays.into_iter().zip(values) {
        if value.is_negative() {
            continue;
        }
        if value.is_zero() {
            ray.zeros.insert(row_index);
        }
        next.push(ray);
    }
    next.extend(created);
    next
}

fn feasible_point(h: &HRep) -> bool {
    let mut constraints: Vec<(Rational, Vec<Rational>)> = h
        .rows()
        .iter()
        .map(|r| (Rational::from_integer(r.constant().clone()), to_rational(r.coefficients())))
        .collect();
    for e in h.equalities() {
        let c = Rational::from_integer(e.constant().clone());
        let a = to_rational(e.coefficients());
        constraints.push((-c.clone(), a.iter().map(|v| -v).collect()));
        constraints.push((c, a));
    }
    let zero = vec![Rational::zero(); h.dimension()];
    !matches!(lp::maximize(&constraints, &zero), Optimum::Infeasible)
}

/// Vertex enumeration for a bounded, nonempty polytope.
pub fn facets_to_vertices(h: &HRep) -> Result<VRep, PolyError> {
    let d = h.dimension();
    if !feasible_point(h) {
        return Err(PolyError::EmptyPolytope);
    }
    let mut rows: Vec<Vec<BigInt>> = h.rows().iter().map(|r| r.entries().to_vec()).collect();
    for e in h.equalities() {
        rows.push(e.entries().to_vec());
        rows.push(e.entries().iter().map(|x| -x).collect());
    }
    let mut lead = vec![BigInt::zero(); d + 1];
    lead[0] = BigInt::one();
    rows.push(lead);
    if linalg::rank_int(&rows) < d + 1 {
        return Err(PolyError::Unbounded);
    }
    let mut vertices = Vec::new();
    for ray in extreme_rays(&rows, d + 1) {
        if ray[0].is_zero() {
            return Err(PolyError::Unbounded);
        }
        vertices.push(HomogeneousVector::from_integers(ray, VectorKind::Point)?);
    }
    if vertices.is_empty() {
        return Err(PolyError::EmptyPolytope);
    }
    Ok(VRep::new(d, vertices)?)
}

/// Rank of the difference vectors from the first point.
pub fn affine_dimension(points: &[Vec<Rational>]) -> usize {
    let Some(first) = points.first() else {
        return 0;
    };
    let diffs: Vec<Vec<Rational>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(first).map(|(a, b)| a - b).collect())
        .collect();
    linalg::rank(&diffs)
}

fn sign_normalized(v: Vec<BigInt>) -> Vec<BigInt> {
    let v = primitive(v);
    match v.iter().find(|x| !x.is_zero()) {
        Some(x) if x.is_negative() => v.into_iter().map(|x| -x).collect(),
        _ => v,
    }
}

/// Facet enumeration. Lower-dimensional hulls get their affine hull as a
/// separate equality block, with facets computed inside the hull.
pub fn vertices_to_facets(v: &VRep) -> Result<HRep, PolyError> {
    if v.is_empty() {
        return Err(PolyError::EmptyInput);
    }
    let d = v.dimension();
    let points = v.points();
    let k = affine_dimension(&points);
    if k == d {
        let rows: Vec<Vec<BigInt>> = v.rows().iter().map(|r| r.entries().to_vec()).collect();
        let facets = extreme_rays(&rows, d + 1)
            .into_iter()
            .filter(|r| r[1..].iter().any(|x| !x.is_zero()))
            .map(|r| HomogeneousVector::from_integers(r, VectorKind::Inequality))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(HRep::new(d, facets)?);
    }

    // Affine hull equalities: the null space of the homogenized point matrix.
    let homogenized: Vec<Vec<Rational>> = v.rows().iter().map(|r| to_rational(r.entries())).collect();
    let equalities = linalg::nullspace(&homogenized, d + 1)
        .iter()
        .map(|e| {
            HomogeneousVector::from_integers(
                sign_normalized(linalg::primitive_from_rational(e)),
                VectorKind::Inequality,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;

    // Project onto coordinates that parametrize the hull, solve, lift back.
    let first = &points[0];
    let diffs: Vec<Vec<Rational>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(first).map(|(a, b)| a - b).collect())
        .collect();
    let (_, chosen) = linalg::rref(&diffs);
    let mut facets = Vec::new();
    if k > 0 {
        let projected: Vec<Vec<Rational>> = points
            .iter()
            .map(|p| chosen.iter().map(|&c| p[c].clone()).collect())
            .collect();
        let inner = vertices_to_facets(&VRep::from_points(k, &projected)?)?;
        for f in inner.rows() {
            let mut lifted = vec![BigInt::zero(); d + 1];
            lifted[0] = f.constant().clone();
            for (&c, coeff) in chosen.iter().zip(f.coefficients()) {
                lifted[c + 1] = coeff.clone();
            }
            facets.push(HomogeneousVector::from_integers(lifted, VectorKind::Inequality)?);
        }
    }
    Ok(HRep::with_equalities(d, facets, equalities)?)
}

/// H to V to H must reproduce the canonical input.
pub fn roundtrip_check(h: &HRep) -> Result<bool, PolyError> {
    let back = vertices_to_facets(&facets_to_vertices(h)?)?;
    Ok(&back == h)
}

/// A point removed as non-extremal, with weights over the surviving vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexCertificate {
    pub point: Vec<Rational>,
    pub weights: Vec<Rational>,
}

/// A surviving vertex with a hyperplane `offset + normal . x` that is
/// positive at the vertex and nonpositive at every other input point.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparationCertificate {
    pub vertex: Vec<Rational>,
    pub offset: Rational,
    pub normal: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointReduction {
    /// Extremal points, duplicates removed, in lexicographic order.
    pub vertices: Vec<Vec<Rational>>,
    pub removed: Vec<ConvexCertificate>,
    pub separators: Vec<SeparationCertificate>,
    pub input_len: usize,
    pub distinct_len: usize,
}

impl PointReduction {
    /// Re-checks every certificate with plain exact arithmetic.
    pub fn certificates_hold(&self) -> bool {
        let removed_ok = self.removed.iter().all(|c| {
            if c.weights.len() != self.vertices.len() || c.weights.iter().any(Signed::is_negative) {
                return false;
            }
            let total: Rational = c.weights.iter().sum();
            if !total.is_one() {
                return false;
            }
            (0..c.point.len()).all(|i| {
                let s: Rational = c.weights.iter().zip(&self.vertices).map(|(w, v)| w * &v[i]).sum();
                s == c.point[i]
            })
        });
        let evaluate = |s: &SeparationCertificate, p: &[Rational]| -> Rational {
            &s.offset + s.normal.iter().zip(p).map(|(a, b)| a * b).sum::<Rational>()
        };
        let separated_ok = self.separators.iter().all(|s| {
            evaluate(s, &s.vertex).is_positive()
                && self.vertices.iter().all(|v| v == &s.vertex || !evaluate(s, v).is_positive())
                && self.removed.iter().all(|c| !evaluate(s, &c.point).is_positive())
        });
        removed_ok && separated_ok && self.separators.len() == self.vertices.len()
    }
}

fn homogenize(p: &[Rational]) -> Vec<Rational> {
    let mut h = Vec::with_capacity(p.len() + 1);
    h.push(Rational::one());
    h.extend_from_slice(p);
    h
}

/// Keeps exactly the points that are vertices of the hull of the input.
pub fn remove_redundant_points(points: &[Vec<Rational>]) -> PointReduction {
    let distinct: Vec<Vec<Rational>> = points.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let lifted: Vec<Vec<Rational>> = distinct.iter().map(|p| homogenize(p)).collect();

    let verdicts: Vec<ConeMembership> = (0..distinct.len())
        .into_par_iter()
        .map(|i| {
            let others: Vec<Vec<Rational>> = lifted
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != i)
                .map(|(_, v)| v.clone())
                .collect();
            lp::cone_membership(&lifted[i], &others)
        })
        .collect();

    let mut vertices = Vec::new();
    let mut separators = Vec::new();
    let mut redundant = Vec::new();
    for (p, verdict) in distinct.iter().zip(verdicts) {
        match verdict {
            ConeMembership::Outside(y) => {
                vertices.push(p.clone());
                separators.push(SeparationCertificate {
                    vertex: p.clone(),
                    offset: y[0].clone(),
                    normal: y[1..].to_vec(),
                });
            }
            ConeMembership::Inside(_) => redundant.push(p.clone()),
        }
    }

    let vertex_lifts: Vec<Vec<Rational>> = vertices.iter().map(|p| homogenize(p)).collect();
    let removed = redundant
        .into_par_iter()
        .map(|p| match lp::cone_membership(&homogenize(&p), &vertex_lifts) {
            ConeMembership::Inside(weights) => ConvexCertificate { point: p, weights },
            ConeMembership::Outside(_) => unreachable!("hull of the vertices contains every input point"),
        })
        .collect();

    PointReduction {
        vertices,
        removed,
        separators,
        input_len: points.len(),
        distinct_len: distinct.len(),
    }
}

/// Drops inequalities implied by the remaining ones.
pub fn remove_redundant_inequalities(h: &HRep) -> Result<HRep, PolyError> {
    let mut kept: Vec<HomogeneousVector> = h.rows().to_vec();
    let mut i = 0;
    while i < kept.len() {
        let mut constraints: Vec<(Rational, Vec<Rational>)> = kept
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != i)
            .map(|(_, r)| (Rational::from_integer(r.constant().clone()), to_rational(r.coefficients())))
            .collect();
        for e in h.equalities() {
            let c = Rational::from_integer(e.constant().clone());
            let a = to_rational(e.coefficients());
            constraints.push((-c.clone(), a.iter().map(|v| -v).collect()));
            constraints.push((c, a));
        }
        let target = &kept[i];
        let neg: Vec<Rational> = to_rational(target.coefficients()).iter().map(|v| -v).collect();
        let implied = match lp::maximize(&constraints, &neg) {
            Optimum::Finite { value, .. } => {
                // min (c + a.x) = c - max(-a.x)
                !(Rational::from_integer(target.constant().clone()) - value).is_negative()
            }
            Optimum::Unbounded => false,
            Optimum::Infeasible => return Err(PolyError::EmptyPolytope),
        };
        if implied {
            kept.remove(i);
        } else {
            i += 1;
        }
    }
    Ok(HRep::with_equalities(h.dimension(), kept, h.equalities().to_vec())?)
}

/// `h . v >= 0` for every row pair.
pub fn is_consistent(h: &HRep, v: &VRep) -> bool {
    h.rows()
        .iter()
        .all(|row| v.rows().iter().all(|p| !dot(row.entries(), p.entries()).is_negative()))
        && h
            .equalities()
            .iter()
            .all(|e| v.rows().iter().all(|p| dot(e.entries(), p.entries()).is_zero()))
}

/// Indices of rows that are nonnegative combinations of the other rows.
pub fn concise_violations(rows: &[HomogeneousVector]) -> Vec<usize> {
    let vectors: Vec<Vec<Rational>> = rows.iter().map(|r| to_rational(r.entries())).collect();
    (0..rows.len())
        .into_par_iter()
        .filter(|&i| {
            let others: Vec<Vec<Rational>> = vectors
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != i)
                .map(|(_, v)| v.clone())
                .collect();
            matches!(lp::cone_membership(&vectors[i], &others), ConeMembership::Inside(_))
        })
        .collect()
}

/// Vertices by brute force: every nonsingular `d`-subset of rows, kept when
/// the intersection point satisfies all rows. Exponential; for small inputs.
pub fn vertices_by_subsets(h: &HRep) -> Result<VRep, PolyError> {
    let d = h.dimension();
    let rows: Vec<(Rational, Vec<Rational>)> = h
        .rows()
        .iter()
        .map(|r| (Rational::from_integer(r.constant().clone()), to_rational(r.coefficients())))
        .collect();
    let mut found: BTreeSet<Vec<Rational>> = BTreeSet::new();
    let mut chosen = Vec::with_capacity(d);
    subsets(rows.len(), d, 0, &mut chosen, &mut |idx| {
        let a: Vec<Vec<Rational>> = idx.iter().map(|&i| rows[i].1.clone()).collect();
        let Some(inv) = linalg::inverse(&a) else { return };
        let x: Vec<Rational> = inv
            .iter()
            .map(|r| r.iter().zip(idx).map(|(m, &i)| m * -&rows[i].0).sum())
            .collect();
        let feasible = rows
            .iter()
            .all(|(c, a)| !(c + a.iter().zip(&x).map(|(p, q)| p * q).sum::<Rational>()).is_negative());
        if feasible {
            found.insert(x);
        }
    });
    if found.is_empty() {
        return Err(PolyError::EmptyPolytope);
    }
    let points: Vec<Vec<Rational>> = found.into_iter().collect();
    Ok(VRep::from_points(d, &points)?)
}

fn subsets(n: usize, k: usize, start: usize, chosen: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if chosen.len() == k {
        f(chosen);
        return;
    }
    for i in start..n {
        if n - i < k - chosen.len() {
            break;
        }
        chosen.push(i);
        subsets(n, k, i + 1, chosen, f);
        chosen.pop();
    }
}
