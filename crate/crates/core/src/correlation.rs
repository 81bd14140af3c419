//! The noncontextual correlation polytope: entry-wise products of
//! measurement and source assignment vertices, its facets, and their classes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dualdesc::{self, PointReduction, PolyError};
use crate::exactgeom::{rat, HRep, HomogeneousVector, Rational, VRep};
use crate::linalg;
use crate::scenario::{AssignmentRole, CellGrid, Scenario};
use crate::symmetry::{self, SymmetryError, SymmetryGroup};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CorrelationError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
    #[error("correlation polytope has affine dimension {found}, expected {expected}")]
    Deficient { found: usize, expected: usize },
    #[error("coefficient {0} does not fit in 64 bits")]
    Overflow(BigInt),
    #[error("trivial-class inequality {0} is violated by a logically possible sign matrix")]
    TrivialViolated(String),
}

pub type CorrelationPoint = CellGrid<Rational>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum InequalityClass {
    Trivial,
    ClassI,
    ClassII,
}

impl fmt::Display for InequalityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InequalityClass::Trivial => "trivial",
            InequalityClass::ClassI => "class-I",
            InequalityClass::ClassII => "class-II",
        })
    }
}

/// `sum alpha_ij omega_ij <= beta`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Inequality {
    pub alpha: Vec<Vec<i64>>,
    pub beta: i64,
    #[serde(rename = "class", default, skip_serializing_if = "Option::is_none")]
    pub klass: Option<InequalityClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbit: Option<usize>,
    #[serde(default)]
    pub representative: bool,
}

impl Inequality {
    pub fn new(alpha: [[i64; 3]; 3], beta: i64) -> Self {
        Self {
            alpha: alpha.iter().map(|r| r.to_vec()).collect(),
            beta,
            klass: None,
            orbit: None,
            representative: false,
        }
    }

    /// From a facet row `c0 + c.x >= 0`.
    pub fn from_row(row: &HomogeneousVector, cols: usize) -> Result<Self, CorrelationError> {
        let to_i64 = |b: &BigInt| b.to_i64().ok_or_else(|| CorrelationError::Overflow(b.clone()));
        let flat: Vec<i64> = row.coefficients().iter().map(|c| to_i64(&-c)).collect::<Result<_, _>>()?;
        Ok(Self {
            alpha: flat.chunks(cols).map(<[i64]>::to_vec).collect(),
            beta: to_i64(row.constant())?,
            klass: None,
            orbit: None,
            representative: false,
        })
    }

    pub fn to_row(&self) -> HomogeneousVector {
        let mut entries = vec![BigInt::from(self.beta)];
        entries.extend(self.alpha.iter().flatten().map(|&a| BigInt::from(-a)));
        HomogeneousVector::from_integers(entries, crate::exactgeom::VectorKind::Inequality)
            .expect("inequality with a nonzero entry")
    }

    pub fn flat_alpha(&self) -> Vec<i64> {
        self.alpha.iter().flatten().copied().collect()
    }

    /// Identity ignoring class labels.
    pub fn key(&self) -> (Vec<i64>, i64) {
        (self.flat_alpha(), self.beta)
    }

    pub fn value(&self, omega: &[Rational]) -> Rational {
        self.flat_alpha().iter().zip(omega).map(|(&a, w)| rat(a) * w).sum()
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .alpha
            .iter()
            .map(|r| r.iter().map(|a| format!("{a:+}")).collect::<Vec<_>>().join(" "))
            .collect();
        write!(f, "[{}] <= {}", rows.join(" | "), self.beta)
    }
}

/// Returns `(value, value > beta)`.
pub fn evaluate(ineq: &Inequality, point: &CorrelationPoint) -> (Rational, bool) {
    let value = ineq.value(point.values());
    let violated = value > rat(ineq.beta);
    (value, violated)
}

/// All entry-wise products, measurement vertex first, duplicates kept.
pub fn pair_vertices(m: &VRep, s: &VRep, rows: usize, cols: usize) -> Vec<CorrelationPoint> {
    let mp = m.points();
    let sp = s.points();
    mp.par_iter()
        .flat_map_iter(|a| {
            sp.iter().map(move |b| {
                CellGrid::new(rows, cols, a.iter().zip(b).map(|(x, y)| x * y).collect())
                    .expect("assignment points match the grid")
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct CorrelationVertices {
    pub assignment: VRep,
    pub products: usize,
    pub reduction: PointReduction,
    pub vertices: VRep,
    pub affine_dimension: usize,
}

/// Assignment vertices, their pairings, and the extremal products.
pub fn correlation_vertices(scenario: &Scenario) -> Result<CorrelationVertices, CorrelationError> {
    let h = scenario.build_assignment_polytope(AssignmentRole::Measurement);
    let m = dualdesc::facets_to_vertices(&h)?;
    let s = dualdesc::facets_to_vertices(&scenario.build_assignment_polytope(AssignmentRole::Source))?;
    let products = pair_vertices(&m, &s, scenario.rows, scenario.cols);
    let raw: Vec<Vec<Rational>> = products.iter().map(|p| p.values().to_vec()).collect();
    let reduction = dualdesc::remove_redundant_points(&raw);
    let vertices = VRep::from_points(scenario.num_cells(), &reduction.vertices).map_err(PolyError::from)?;
    let affine_dimension = dualdesc::affine_dimension(&reduction.vertices);
    Ok(CorrelationVertices { assignment: m, products: products.len(), reduction, vertices, affine_dimension })
}

/// Facets of the correlation polytope as inequalities (unclassified).
/// Fails unless the vertex set is full-dimensional.
pub fn derive_inequalities(vertices: &VRep, cols: usize) -> Result<Vec<Inequality>, CorrelationError> {
    let d = vertices.dimension();
    let found = dualdesc::affine_dimension(&vertices.points());
    if found != d {
        return Err(CorrelationError::Deficient { found, expected: d });
    }
    let h = dualdesc::vertices_to_facets(vertices)?;
    h.rows().iter().map(|r| Inequality::from_row(r, cols)).collect()
}

pub fn inequalities_to_hrep(ineqs: &[Inequality], dimension: usize) -> HRep {
    HRep::new(dimension, ineqs.iter().map(Inequality::to_row).collect()).expect("rows share the dimension")
}

/// Rank of the homogenized vertices tight at `ineq`; a facet of a
/// full-dimensional polytope in dimension `d` reaches `d`.
pub fn tight_rank(ineq: &Inequality, vertices: &VRep) -> usize {
    let beta = rat(ineq.beta);
    let tight: Vec<Vec<Rational>> = vertices
        .rows()
        .iter()
        .filter(|v| ineq.value(&v.coords()) == beta)
        .map(|v| linalg::to_rational(v.entries()))
        .collect();
    linalg::rank(&tight)
}

/// Correlation-group action on coefficients; `beta` is fixed.
pub fn act_on_inequality(g: &symmetry::SignedPermutation, ineq: &Inequality) -> Inequality {
    let flat = g.apply(&ineq.flat_alpha());
    let cols = ineq.alpha.first().map_or(0, Vec::len);
    Inequality {
        alpha: flat.chunks(cols.max(1)).map(<[i64]>::to_vec).collect(),
        beta: ineq.beta,
        klass: None,
        orbit: None,
        representative: false,
    }
}

fn holds_on_all(ineq: &Inequality, points: &[Vec<Rational>]) -> bool {
    let beta = rat(ineq.beta);
    points.iter().all(|p| ineq.value(p) <= beta)
}

fn logical_points(scenario: &Scenario) -> Vec<Vec<Rational>> {
    scenario
        .logically_possible_sign_matrices()
        .iter()
        .map(|m| m.values().iter().map(|&s| rat(i64::from(s))).collect())
        .collect()
}

/// Tags each inequality with its orbit under `group`. Orbits satisfied by
/// every logically possible sign matrix are trivial; the remaining orbits,
/// ordered by bound, are class I and class II (when there are exactly two).
/// Output order: by class, then orbit, then coefficients.
pub fn classify(
    ineqs: &[Inequality],
    group: &SymmetryGroup,
    scenario: &Scenario,
) -> Result<Vec<Inequality>, CorrelationError> {
    let bare: Vec<Inequality> = ineqs
        .iter()
        .map(|i| Inequality { klass: None, orbit: None, representative: false, ..i.clone() })
        .collect();
    let classes = symmetry::orbits(&bare, group, act_on_inequality)?;
    let logical = logical_points(scenario);
    let mut orbit_order: Vec<(bool, i64, usize)> = classes
        .iter()
        .enumerate()
        .map(|(k, o)| (!o.members.iter().all(|i| holds_on_all(i, &logical)), o.representative.beta, k))
        .collect();
    orbit_order.sort();
    let nontrivial = orbit_order.iter().filter(|o| o.0).count();
    let mut out = Vec::with_capacity(ineqs.len());
    let mut nontrivial_seen = 0;
    for (orbit_id, &(is_nontrivial, _, k)) in orbit_order.iter().enumerate() {
        let klass = if !is_nontrivial {
            Some(InequalityClass::Trivial)
        } else {
            nontrivial_seen += 1;
            match (nontrivial, nontrivial_seen) {
                (2, 1) => Some(InequalityClass::ClassI),
                (2, 2) => Some(InequalityClass::ClassII),
                _ => None,
            }
        };
        for member in &classes[k].members {
            out.push(Inequality {
                klass,
                orbit: Some(orbit_id),
                representative: *member == classes[k].representative,
                ..member.clone()
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrivialReport {
    pub logical_vertices: usize,
    pub trivial_checked: usize,
    pub nontrivial_checked: usize,
    /// Nontrivial inequalities not violated by any logical vertex.
    pub insensitive: Vec<String>,
}

impl TrivialReport {
    pub fn passed(&self) -> bool {
        self.insensitive.is_empty()
    }
}

/// Checks the bound-1 inequalities against every logically possible sign
/// matrix and that every other inequality is violated by one of them.
pub fn verify_trivial_class(ineqs: &[Inequality], scenario: &Scenario) -> Result<TrivialReport, CorrelationError> {
    let logical = logical_points(scenario);
    let mut report = TrivialReport {
        logical_vertices: logical.len(),
        trivial_checked: 0,
        nontrivial_checked: 0,
        insensitive: Vec::new(),
    };
    for ineq in ineqs {
        if ineq.beta == 1 {
            if !holds_on_all(ineq, &logical) {
                return Err(CorrelationError::TrivialViolated(ineq.to_string()));
            }
            report.trivial_checked += 1;
        } else {
            report.nontrivial_checked += 1;
            if holds_on_all(ineq, &logical) {
                report.insensitive.push(ineq.to_string());
            }
        }
    }
    Ok(report)
}

/// All entries nonzero with every row and column product +1.
pub fn is_class_ii_pattern(alpha: &[i64]) -> bool {
    alpha.len() == 9
        && alpha.iter().all(|&a| a == 1 || a == -1)
        && (0..3).all(|i| alpha[3 * i] * alpha[3 * i + 1] * alpha[3 * i + 2] == 1)
        && (0..3).all(|j| alpha[j] * alpha[3 + j] * alpha[6 + j] == 1)
}

/// A special cell with a sign, zeros on the rest of its row and column, and
/// signs on the remaining 2x2 minor with the five nonzero entries multiplying to +1.
pub fn class_i_construction() -> BTreeSet<Vec<i64>> {
    let mut out = BTreeSet::new();
    for i in 0..3 {
        for j in 0..3 {
            for special in [1i64, -1] {
                let others: Vec<usize> =
                    (0..9).filter(|&k| k / 3 != i && k % 3 != j).collect();
                for mask in 0u32..16 {
                    let mut alpha = vec![0i64; 9];
                    alpha[3 * i + j] = special;
                    for (b, &k) in others.iter().enumerate() {
                        alpha[k] = if mask >> b & 1 == 1 { -1 } else { 1 };
                    }
                    if alpha.iter().filter(|&&a| a != 0).product::<i64>() == 1 {
                        out.insert(alpha);
                    }
                }
            }
        }
    }
    out
}

/// One full row or column with product -1, zeros elsewhere.
pub fn trivial_construction() -> BTreeSet<Vec<i64>> {
    let mut out = BTreeSet::new();
    let lines: Vec<[usize; 3]> = (0..3)
        .map(|i| [3 * i, 3 * i + 1, 3 * i + 2])
        .chain((0..3).map(|j| [j, 3 + j, 6 + j]))
        .collect();
    for line in lines {
        for mask in 0u32..8 {
            let signs: Vec<i64> = (0..3).map(|b| if mask >> b & 1 == 1 { -1 } else { 1 }).collect();
            if signs.iter().product::<i64>() == -1 {
                let mut alpha = vec![0i64; 9];
                for (k, s) in line.iter().zip(&signs) {
                    alpha[*k] = *s;
                }
                out.insert(alpha);
            }
        }
    }
    out
}

/// Class counts keyed by tag.
pub fn class_sizes(ineqs: &[Inequality]) -> BTreeMap<Option<InequalityClass>, usize> {
    let mut out = BTreeMap::new();
    for i in ineqs {
        *out.entry(i.klass).or_insert(0) += 1;
    }
    out
}

pub fn all_entries_in_unit_range(points: &[Vec<Rational>]) -> bool {
    points.iter().flatten().all(|x| x.is_zero() || *x == rat(1) || *x == rat(-1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactgeom::HomogeneousVector;

    fn grid(rows: [[i64; 3]; 3]) -> CorrelationPoint {
        CellGrid::from_i64_rows(&[&rows[0], &rows[1], &rows[2]]).unwrap()
    }

    fn vrep(points: &[CorrelationPoint]) -> VRep {
        VRep::new(9, points.iter().map(|p| HomogeneousVector::point(p.values()).unwrap()).collect()).unwrap()
    }

    #[test]
    fn pairing_examples() {
        let k1 = grid([[0, 0, -1], [0, 0, 1], [1, 1, 1]]);
        let k2 = grid([[0, 0, 1], [1, 0, 0], [0, -1, 0]]);
        let k3 = grid([[0, 0, 1], [0, 0, -1], [1, 1, 1]]);
        let v = vrep(&[k1.clone(), k2.clone(), k3.clone()]);
        let products = pair_vertices(&v, &v, 3, 3);
        assert_eq!(products.len(), 9);
        assert!(products.contains(&grid([[0, 0, 1], [0, 0, 1], [1, 1, 1]])));
        assert!(products.contains(&grid([[0, 0, 1], [1, 0, 0], [0, 1, 0]])));
        assert_eq!(k1.hadamard(&k1), k3.hadamard(&k3));
        let zero = grid([[0; 3]; 3]);
        assert_eq!(k1.hadamard(&zero), zero);
    }

    #[test]
    fn evaluation() {
        let ones = grid([[1; 3]; 3]);
        let qvi1 = Inequality::new([[1, 1, 0], [1, 1, 0], [0, 0, 1]], 3);
        let qvi2 = Inequality::new([[1; 3]; 3], 5);
        assert_eq!(evaluate(&qvi1, &ones), (rat(5), true));
        assert_eq!(evaluate(&qvi2, &ones), (rat(9), true));
        assert_eq!(evaluate(&qvi2, &grid([[0; 3]; 3])), (rat(0), false));
        let trivial = Inequality::new([[-1, 1, 1], [0; 3], [0; 3]], 1);
        assert_eq!(evaluate(&trivial, &ones), (rat(1), false));
    }

    #[test]
    fn row_conversion_roundtrip() {
        let ineq = Inequality::new([[-1, 0, 1], [1, 0, 1], [0, -1, 0]], 3);
        let row = ineq.to_row();
        assert_eq!(row.constant(), &BigInt::from(3));
        assert_eq!(Inequality::from_row(&row, 3).unwrap(), ineq);
    }

    #[test]
    fn constructions_have_expected_sizes() {
        assert_eq!(class_i_construction().len(), 144);
        assert_eq!(trivial_construction().len(), 24);
        let all: Vec<Vec<i64>> = (0u32..512)
            .map(|m| (0..9).map(|k| if m >> k & 1 == 1 { -1 } else { 1 }).collect())
            .collect();
        assert_eq!(all.iter().filter(|a| is_class_ii_pattern(a)).count(), 16);
        assert!(class_i_construction().contains(&vec![-1, 0, 1, 1, 0, 1, 0, -1, 0]));
        assert!(class_i_construction().contains(&vec![1, 1, 0, 1, 1, 0, 0, 0, 1]));
    }

    #[test]
    fn deficient_vertex_set_is_rejected() {
        let pts = vec![grid([[0; 3]; 3]), grid([[1, 0, 0], [0; 3], [0; 3]])];
        assert!(matches!(derive_inequalities(&vrep(&pts), 3), Err(CorrelationError::Deficient { found: 1, .. })));
    }

    #[test]
    fn inequality_json_shape() {
        let mut ineq = Inequality::new([[1; 3]; 3], 5);
        ineq.klass = Some(InequalityClass::ClassII);
        ineq.orbit = Some(2);
        let text = serde_json::to_string(&ineq).unwrap();
        assert!(text.contains("\"alpha\":[[1,1,1],[1,1,1],[1,1,1]]"));
        assert!(text.contains("\"class\":\"ClassII\""));
        assert_eq!(serde_json::from_str::<Inequality>(&text).unwrap(), ineq);
    }
}
