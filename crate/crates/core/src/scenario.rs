//! Compatibility structure of a parity-constrained square of binary
//! measurements (and, identically, sources), with the Peres-Mermin square as
//! the built-in instance.
//!
//! Cells are addressed `(row, col)` and flattened row-major. Each context is
//! an ordered triple of cells simulated by one four-outcome device whose
//! outcome pair `(a, b)` fixes the first two cells; the third cell reads
//! `parity * a * b`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactgeom::{HRep, HomogeneousVector, Rational, VectorKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScenarioError {
    #[error("cell ({row}, {col}) lies outside the {rows}x{cols} grid")]
    CellOutOfRange { row: usize, col: usize, rows: usize, cols: usize },
    #[error("context {0} repeats a cell")]
    RepeatedCell(usize),
    #[error("context {index} has parity {parity}; parities must be +1 or -1")]
    BadParity { index: usize, parity: i8 },
    #[error("grid values must have {expected} entries, found {found}")]
    GridShape { expected: usize, found: usize },
    #[error("deterministic assignments take values in {{-1, +1}}, found {0}")]
    NotASign(i8),
    #[error("cell indices are 1-based, found {0}")]
    ZeroIndex(usize),
}

/// Grid position, 0-based internally and `[row, col]` 1-based on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "[usize; 2]", into = "[usize; 2]")]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

impl TryFrom<[usize; 2]> for Cell {
    type Error = ScenarioError;

    fn try_from(value: [usize; 2]) -> Result<Self, Self::Error> {
        for v in value {
            if v == 0 {
                return Err(ScenarioError::ZeroIndex(v));
            }
        }
        Ok(Cell::new(value[0] - 1, value[1] - 1))
    }
}

impl From<Cell> for [usize; 2] {
    fn from(c: Cell) -> Self {
        [c.row + 1, c.col + 1]
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.row + 1, self.col + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Context {
    pub cells: [Cell; 3],
    pub parity: i8,
}

/// Which half of the scenario a polytope or product constraint refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Measurement,
    Source,
    Correlation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssignmentRole {
    Measurement,
    Source,
}

/// Row-major matrix over the scenario's cells.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellGrid<T> {
    rows: usize,
    cols: usize,
    values: Vec<T>,
}

impl<T> CellGrid<T> {
    pub fn new(rows: usize, cols: usize, values: Vec<T>) -> Result<Self, ScenarioError> {
        if values.len() != rows * cols {
            return Err(ScenarioError::GridShape { expected: rows * cols, found: values.len() });
        }
        Ok(Self { rows, cols, values })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self, ScenarioError> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let values: Vec<T> = rows.into_iter().flatten().collect();
        Self::new(nrows, ncols, values)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn get(&self, cell: Cell) -> &T {
        &self.values[cell.row * self.cols + cell.col]
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> CellGrid<U> {
        CellGrid { rows: self.rows, cols: self.cols, values: self.values.iter().map(f).collect() }
    }

    pub fn to_rows(&self) -> Vec<Vec<T>>
    where
        T: Clone,
    {
        self.values.chunks(self.cols.max(1)).map(<[T]>::to_vec).collect()
    }
}

impl CellGrid<Rational> {
    pub fn from_i64_rows(rows: &[&[i64]]) -> Result<Self, ScenarioError> {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| crate::exactgeom::rat(x)).collect()).collect())
    }

    /// Entry-wise product.
    pub fn hadamard(&self, other: &Self) -> Self {
        CellGrid {
            rows: self.rows,
            cols: self.cols,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        }
    }
}

impl<T: fmt::Display> fmt::Display for CellGrid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.values.chunks(self.cols.max(1)).enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let parts: Vec<String> = row.iter().map(|v| format!("{v:>3}")).collect();
            write!(f, "{}", parts.join(" "))?;
        }
        Ok(())
    }
}

/// Ontic expectation values for each cell (measurement or source side).
pub type AssignmentPoint = CellGrid<Rational>;

/// Outcome-deterministic assignment of +1/-1 to every cell.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DeterministicAssignment {
    signs: CellGrid<i8>,
}

impl DeterministicAssignment {
    pub fn new(signs: CellGrid<i8>) -> Result<Self, ScenarioError> {
        if let Some(&bad) = signs.values().iter().find(|&&s| s != 1 && s != -1) {
            return Err(ScenarioError::NotASign(bad));
        }
        Ok(Self { signs })
    }

    pub fn all_plus(rows: usize, cols: usize) -> Self {
        Self { signs: CellGrid { rows, cols, values: vec![1; rows * cols] } }
    }

    pub fn signs(&self) -> &CellGrid<i8> {
        &self.signs
    }

    pub fn product(&self, context: &Context) -> i8 {
        context.cells.iter().map(|&c| *self.signs.get(c)).product()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub contexts: Vec<Context>,
}

impl Scenario {
    /// Rows and the first two columns multiply to +1; the third column to -1.
    pub fn peres_mermin() -> Self {
        let mut contexts = Vec::new();
        for i in 0..3 {
            contexts.push(Context { cells: [Cell::new(i, 0), Cell::new(i, 1), Cell::new(i, 2)], parity: 1 });
        }
        for j in 0..3 {
            contexts.push(Context {
                cells: [Cell::new(0, j), Cell::new(1, j), Cell::new(2, j)],
                parity: if j == 2 { -1 } else { 1 },
            });
        }
        Self { name: "peres-mermin".to_string(), rows: 3, cols: 3, contexts }
    }

    pub fn from_json(text: &str) -> Result<Self, Box<dyn std::error::Error + Send + Sync>> {
        let scenario: Scenario = serde_json::from_str(text)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        for (index, ctx) in self.contexts.iter().enumerate() {
            for c in ctx.cells {
                if c.row >= self.rows || c.col >= self.cols {
                    return Err(ScenarioError::CellOutOfRange {
                        row: c.row + 1,
                        col: c.col + 1,
                        rows: self.rows,
                        cols: self.cols,
                    });
                }
            }
            let [a, b, c] = ctx.cells;
            if a == b || b == c || a == c {
                return Err(ScenarioError::RepeatedCell(index));
            }
            if ctx.parity != 1 && ctx.parity != -1 {
                return Err(ScenarioError::BadParity { index, parity: ctx.parity });
            }
        }
        Ok(())
    }

    pub fn num_cells(&self) -> usize {
        self.rows * self.cols
    }

    pub fn cell_index(&self, cell: Cell) -> usize {
        cell.row * self.cols + cell.col
    }

    /// Nonnegativity of the four-outcome response function of every context:
    /// `1 + a x_first + b x_second + parity a b x_third >= 0` for `a, b = +-1`.
    /// Measurement and source polytopes coincide.
    pub fn build_assignment_polytope(&self, _role: AssignmentRole) -> HRep {
        let d = self.num_cells();
        let mut rows = Vec::with_capacity(4 * self.contexts.len());
        for ctx in &self.contexts {
            for (a, b) in [(1i64, 1i64), (1, -1), (-1, 1), (-1, -1)] {
                let mut entries = vec![0i64; d + 1];
                entries[0] = 1;
                let [first, second, third] = ctx.cells;
                entries[self.cell_index(first) + 1] += a;
                entries[self.cell_index(second) + 1] += b;
                entries[self.cell_index(third) + 1] += i64::from(ctx.parity) * a * b;
                rows.push(
                    HomogeneousVector::from_i64(&entries, VectorKind::Inequality)
                        .expect("context rows are nonzero"),
                );
            }
        }
        HRep::new(d, rows).expect("rows share the scenario dimension")
    }

    /// Indices of the contexts whose outcome product differs from their parity.
    pub fn check_deterministic_assignment(&self, d: &DeterministicAssignment) -> Vec<usize> {
        self.contexts
            .iter()
            .enumerate()
            .filter(|(_, ctx)| d.product(ctx) != ctx.parity)
            .map(|(i, _)| i)
            .collect()
    }

    /// Fixed outcome product per context. Correlation products multiply a
    /// measurement outcome by a source outcome, so the parities square to +1.
    pub fn triple_product_constraints(&self, role: Role) -> Vec<(Context, i8)> {
        self.contexts
            .iter()
            .map(|ctx| {
                let parity = match role {
                    Role::Measurement | Role::Source => ctx.parity,
                    Role::Correlation => ctx.parity * ctx.parity,
                };
                (ctx.clone(), parity)
            })
            .collect()
    }

    /// Every +1/-1 assignment to the cells, in binary counting order
    /// (bit k set means cell k is -1).
    pub fn all_deterministic_assignments(&self) -> impl Iterator<Item = DeterministicAssignment> + '_ {
        let n = self.num_cells();
        (0u64..1 << n).map(move |mask| {
            let values = (0..n).map(|k| if mask >> k & 1 == 1 { -1 } else { 1 }).collect();
            DeterministicAssignment { signs: CellGrid { rows: self.rows, cols: self.cols, values } }
        })
    }

    /// Sign matrices whose correlation-role context products are all +1.
    pub fn logically_possible_sign_matrices(&self) -> Vec<CellGrid<i8>> {
        let constraints = self.triple_product_constraints(Role::Correlation);
        self.all_deterministic_assignments()
            .filter(|d| constraints.iter().all(|(ctx, parity)| d.product(ctx) == *parity))
            .map(|d| d.signs)
            .collect()
    }

    pub fn context_label(&self, index: usize) -> String {
        let ctx = &self.contexts[index];
        let [a, b, c] = ctx.cells;
        if a.row == b.row && b.row == c.row {
            format!("row {}", a.row + 1)
        } else if a.col == b.col && b.col == c.col {
            format!("column {}", a.col + 1)
        } else {
            format!("context {}", index + 1)
        }
    }
}

/// Assignment point as a homogeneous point vector.
pub fn assignment_to_point(p: &AssignmentPoint) -> HomogeneousVector {
    HomogeneousVector::point(p.values()).expect("points have a leading 1")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dualdesc;
    use crate::exactgeom::rat;
    use crate::lp::{self, Optimum};
    use num_traits::Zero;

    fn row_as_ints(h: &HomogeneousVector) -> Vec<i64> {
        h.entries().iter().map(|e| e.to_string().parse().unwrap()).collect()
    }

    #[test]
    fn assignment_polytope_has_24_rows() {
        let pm = Scenario::peres_mermin();
        let h = pm.build_assignment_polytope(AssignmentRole::Measurement);
        assert_eq!(h.len(), 24);
        assert_eq!(h, pm.build_assignment_polytope(AssignmentRole::Source));
        let rows: Vec<Vec<i64>> = h.rows().iter().map(row_as_ints).collect();
        // x11 + x12 - x13 <= 1
        assert!(rows.contains(&vec![1, -1, -1, 1, 0, 0, 0, 0, 0, 0]));
        // x13 + x23 + x33 <= 1
        assert!(rows.contains(&vec![1, 0, 0, -1, 0, 0, -1, 0, 0, -1]));
    }

    #[test]
    fn assignment_polytope_implies_unit_box() {
        let pm = Scenario::peres_mermin();
        let h = pm.build_assignment_polytope(AssignmentRole::Measurement);
        let constraints: Vec<(Rational, Vec<Rational>)> = h
            .rows()
            .iter()
            .map(|r| (Rational::from_integer(r.constant().clone()), crate::linalg::to_rational(r.coefficients())))
            .collect();
        for k in 0..9 {
            for s in [1, -1] {
                let mut obj = vec![Rational::zero(); 9];
                obj[k] = rat(s);
                match lp::maximize(&constraints, &obj) {
                    Optimum::Finite { value, .. } => assert_eq!(value, rat(1)),
                    other => panic!("{other:?}"),
                }
            }
        }
        assert!(dualdesc::remove_redundant_inequalities(&h).unwrap().len() == 24);
    }

    #[test]
    fn no_deterministic_assignment_satisfies_all_contexts() {
        let pm = Scenario::peres_mermin();
        let all: Vec<_> = pm.all_deterministic_assignments().collect();
        assert_eq!(all.len(), 512);
        for d in &all {
            let violated = pm.check_deterministic_assignment(d);
            assert!(!violated.is_empty());
            // The product of all six context products is +1 (each cell appears twice)
            // while the product of parities is -1, so the violation count is odd.
            assert_eq!(violated.len() % 2, 1);
        }
        let plus = DeterministicAssignment::all_plus(3, 3);
        assert_eq!(pm.check_deterministic_assignment(&plus), vec![5]);
        assert_eq!(pm.context_label(5), "column 3");
    }

    #[test]
    fn assignment_polytope_has_120_vertices() {
        let pm = Scenario::peres_mermin();
        let h = pm.build_assignment_polytope(AssignmentRole::Measurement);
        let v = dualdesc::facets_to_vertices(&h).unwrap();
        assert_eq!(v.len(), 120);
        assert!(dualdesc::is_consistent(&h, &v));
    }

    #[test]
    fn triple_products_by_role() {
        let pm = Scenario::peres_mermin();
        let m: Vec<i8> = pm.triple_product_constraints(Role::Measurement).iter().map(|c| c.1).collect();
        assert_eq!(m, vec![1, 1, 1, 1, 1, -1]);
        let c: Vec<i8> = pm.triple_product_constraints(Role::Correlation).iter().map(|c| c.1).collect();
        assert_eq!(c, vec![1; 6]);
    }

    #[test]
    fn logical_sign_matrices() {
        assert_eq!(Scenario::peres_mermin().logically_possible_sign_matrices().len(), 16);
    }

    #[test]
    fn scenario_json_roundtrip_and_validation() {
        let pm = Scenario::peres_mermin();
        let text = serde_json::to_string(&pm).unwrap();
        assert!(text.contains("[1,1]"));
        assert_eq!(Scenario::from_json(&text).unwrap(), pm);
        let bad = text.replace("[3,3]", "[4,3]");
        assert!(Scenario::from_json(&bad).is_err());
        assert!(DeterministicAssignment::new(CellGrid::new(1, 3, vec![1, 0, 1]).unwrap()).is_err());
    }
}
