//! Deterministic-processing symmetries of the square as signed permutations
//! of the cell coordinates, their closure, the explicit permutation/sign-set
//! enumeration, and orbit classification.
//!
//! A signed permutation `g = (p, s)` acts by `(g x)_k = s_k x_{p(k)}`, i.e. the
//! primed cell `k` reads the unprimed cell `p(k)` with its outcome multiplied
//! by `s_k`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::ops::Neg;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactgeom::{HRep, HomogeneousVector};
use crate::scenario::{Cell, Scenario};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymmetryError {
    #[error("generator {0} does not preserve the polytope")]
    NotASymmetry(usize),
    #[error("item {item} is mapped outside the input set")]
    NotClosed { item: usize },
    #[error("generator {index} acts on {found} coordinates, expected {expected}")]
    Dimension { index: usize, expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SignedPermutation {
    perm: Vec<usize>,
    signs: Vec<i8>,
}

impl SignedPermutation {
    pub fn new(perm: Vec<usize>, signs: Vec<i8>) -> Option<Self> {
        let n = perm.len();
        if signs.len() != n || signs.iter().any(|&s| s != 1 && s != -1) {
            return None;
        }
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return None;
            }
        }
        Some(Self { perm, signs })
    }

    pub fn identity(n: usize) -> Self {
        Self { perm: (0..n).collect(), signs: vec![1; n] }
    }

    /// Builds a map on a `rows x cols` grid from `source(i, j)`, the unprimed
    /// cell read by primed cell `(i, j)`, and the sign applied there.
    pub fn from_cell_map(
        rows: usize,
        cols: usize,
        mut source: impl FnMut(usize, usize) -> (usize, usize),
        mut sign: impl FnMut(usize, usize) -> i8,
    ) -> Option<Self> {
        let mut perm = Vec::with_capacity(rows * cols);
        let mut signs = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let (si, sj) = source(i, j);
                perm.push(si * cols + sj);
                signs.push(sign(i, j));
            }
        }
        Self::new(perm, signs)
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(k, &p)| k == p) && self.signs.iter().all(|&s| s == 1)
    }

    pub fn apply<T: Clone + Neg<Output = T>>(&self, x: &[T]) -> Vec<T> {
        self.perm
            .iter()
            .zip(&self.signs)
            .map(|(&p, &s)| if s < 0 { -x[p].clone() } else { x[p].clone() })
            .collect()
    }

    /// `self` after `other`: `(self.compose(other)) x = self(other(x))`.
    pub fn compose(&self, other: &Self) -> Self {
        let perm = self.perm.iter().map(|&p| other.perm[p]).collect();
        let signs = self.perm.iter().zip(&self.signs).map(|(&p, &s)| s * other.signs[p]).collect();
        Self { perm, signs }
    }

    pub fn inverse(&self) -> Self {
        let n = self.perm.len();
        let mut perm = vec![0; n];
        let mut signs = vec![1; n];
        for (k, (&p, &s)) in self.perm.iter().zip(&self.signs).enumerate() {
            perm[p] = k;
            signs[p] = s;
        }
        Self { perm, signs }
    }

    /// Action on a homogeneous vector: the leading entry is fixed, the rest
    /// transforms as a coordinate vector. Signed permutations are orthogonal,
    /// so the same formula maps inequalities to inequalities of the image.
    pub fn act_homogeneous(&self, v: &HomogeneousVector) -> HomogeneousVector {
        let mut entries = Vec::with_capacity(v.entries().len());
        entries.push(v.constant().clone());
        entries.extend(self.apply(v.coefficients()));
        HomogeneousVector::from_integers(entries, v.kind()).expect("image of a nonzero vector")
    }
}

impl fmt::Display for SignedPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .perm
            .iter()
            .zip(&self.signs)
            .map(|(p, s)| format!("{}{}", if *s < 0 { "-" } else { "+" }, p))
            .collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

/// A finite group of signed permutations in sorted order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetryGroup {
    elements: Vec<SignedPermutation>,
}

impl SymmetryGroup {
    pub fn from_elements(elements: impl IntoIterator<Item = SignedPermutation>) -> Self {
        let set: BTreeSet<SignedPermutation> = elements.into_iter().collect();
        Self { elements: set.into_iter().collect() }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[SignedPermutation] {
        &self.elements
    }

    pub fn contains(&self, g: &SignedPermutation) -> bool {
        self.elements.binary_search(g).is_ok()
    }

    /// Closed under composition and inverses.
    pub fn is_group(&self) -> bool {
        self.elements.iter().all(|g| self.contains(&g.inverse()))
            && self
                .elements
                .par_iter()
                .all(|g| self.elements.iter().all(|h| self.contains(&g.compose(h))))
    }
}

/// Breadth-first closure of `gens`; every generator must pass `preserves`.
pub fn close_generators(
    dimension: usize,
    gens: &[SignedPermutation],
    preserves: impl Fn(&SignedPermutation) -> bool,
) -> Result<SymmetryGroup, SymmetryError> {
    for (index, g) in gens.iter().enumerate() {
        if g.len() != dimension {
            return Err(SymmetryError::Dimension { index, expected: dimension, found: g.len() });
        }
        if !preserves(g) {
            return Err(SymmetryError::NotASymmetry(index));
        }
    }
    let identity = SignedPermutation::identity(dimension);
    let mut seen = BTreeSet::from([identity.clone()]);
    let mut queue = VecDeque::from([identity]);
    while let Some(e) = queue.pop_front() {
        for g in gens {
            let next = e.compose(g);
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    Ok(SymmetryGroup { elements: seen.into_iter().collect() })
}

/// True when `g` maps the row set of `h` onto itself.
pub fn preserves_hrep(h: &HRep, g: &SignedPermutation) -> bool {
    let rows: BTreeSet<&HomogeneousVector> = h.rows().iter().collect();
    h.rows().iter().all(|r| rows.contains(&g.act_homogeneous(r)))
}

/// True when `g` maps the point set onto itself.
pub fn preserves_points<T: Ord + Clone + Neg<Output = T>>(points: &[Vec<T>], g: &SignedPermutation) -> bool {
    let set: BTreeSet<&Vec<T>> = points.iter().collect();
    points.iter().all(|p| set.contains(&g.apply(p)))
}

fn swap_columns(a: usize, b: usize) -> SignedPermutation {
    SignedPermutation::from_cell_map(3, 3, |i, j| (i, if j == a { b } else if j == b { a } else { j }), |_, _| 1)
        .expect("valid permutation")
}

fn swap_rows(a: usize, b: usize) -> SignedPermutation {
    SignedPermutation::from_cell_map(3, 3, |i, j| (if i == a { b } else if i == b { a } else { i }, j), |_, _| 1)
        .expect("valid permutation")
}

fn signed_transpose(negated: &[(usize, usize)]) -> SignedPermutation {
    SignedPermutation::from_cell_map(3, 3, |i, j| (j, i), |i, j| if negated.contains(&(i, j)) { -1 } else { 1 })
        .expect("valid permutation")
}

/// Swap of columns 1 and 2, swap of rows 2 and 3, and the transpose with the
/// (3,3) outcome negated. Acts on measurement (and source) assignments.
pub fn assignment_generators() -> Vec<SignedPermutation> {
    vec![swap_columns(0, 1), swap_rows(1, 2), signed_transpose(&[(2, 2)])]
}

/// Same swaps; the transpose negates the four corner correlations.
pub fn correlation_generators() -> Vec<SignedPermutation> {
    vec![swap_columns(0, 1), swap_rows(1, 2), signed_transpose(&[(0, 0), (0, 2), (2, 0), (2, 2)])]
}

/// Bijection on the nine cells; `map[k]` is the unprimed cell read by primed cell `k`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellPermutation(pub [usize; 9]);

impl CellPermutation {
    pub fn identity() -> Self {
        Self(std::array::from_fn(|k| k))
    }

    fn rows(order: [usize; 3]) -> Self {
        Self(std::array::from_fn(|k| order[k / 3] * 3 + k % 3))
    }

    fn cols(order: [usize; 3]) -> Self {
        Self(std::array::from_fn(|k| (k / 3) * 3 + order[k % 3]))
    }

    fn transpose() -> Self {
        Self(std::array::from_fn(|k| (k % 3) * 3 + k / 3))
    }

    /// Product as maps on outcomes: `self` applied after `other`.
    pub fn then(&self, other: &Self) -> Self {
        Self(std::array::from_fn(|k| other.0[self.0[k]]))
    }

    fn image(&self, cells: &[Cell; 3]) -> BTreeSet<usize> {
        cells.iter().map(|c| self.0[c.row * 3 + c.col]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SignMatrix(pub [i8; 9]);

impl SignMatrix {
    pub fn all_plus() -> Self {
        Self([1; 9])
    }

    pub fn with_minus(cells: &[(usize, usize)]) -> Self {
        let mut s = [1; 9];
        for &(i, j) in cells {
            s[i * 3 + j] = -1;
        }
        Self(s)
    }

    pub fn hadamard(&self, other: &Self) -> Self {
        Self(std::array::from_fn(|k| self.0[k] * other.0[k]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PermutationClass {
    /// Column 3 is read from column 3.
    A,
    /// Column 3 is read from another column.
    B,
    /// Column 3 is read from a row.
    C,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SymmetryElement {
    pub pi: CellPermutation,
    pub zeta: SignMatrix,
    pub gamma: SignMatrix,
}

impl SymmetryElement {
    /// Induced action on correlations: only `zeta o gamma` survives.
    pub fn correlation_action(&self) -> SignedPermutation {
        let delta = self.zeta.hadamard(&self.gamma);
        SignedPermutation { perm: self.pi.0.to_vec(), signs: delta.0.to_vec() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExplicitSymmetryGroup {
    pub p_a: Vec<CellPermutation>,
    pub p_b: Vec<CellPermutation>,
    pub p_c: Vec<CellPermutation>,
    pub z_a: Vec<SignMatrix>,
    pub elements: Vec<SymmetryElement>,
    pub d_a: BTreeSet<SignMatrix>,
    pub d_b: BTreeSet<SignMatrix>,
    pub d_c: BTreeSet<SignMatrix>,
    /// Solutions of the class-A sign constraints (the rectangle list is a subset).
    pub class_a_solutions: usize,
    /// How many of the literal `pi_C pi_R` products take column 3 to a row.
    pub literal_pc_to_row: usize,
    /// Size of the literal `pi~_C pi_R (C2 C3)` family.
    pub literal_pb_len: usize,
}

impl ExplicitSymmetryGroup {
    pub fn ds_agree(&self) -> bool {
        self.d_a == self.d_b && self.d_b == self.d_c
    }

    pub fn induced_correlation_group(&self) -> SymmetryGroup {
        SymmetryGroup::from_elements(self.elements.iter().map(SymmetryElement::correlation_action))
    }

    pub fn permutation_count(&self) -> usize {
        self.p_a.len() + self.p_b.len() + self.p_c.len()
    }
}

fn all_orders() -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                if a != b && b != c && a != c {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

/// The 72 context-preserving cell permutations (rows x columns x transpose).
pub fn context_permutations() -> Vec<CellPermutation> {
    let mut out = BTreeSet::new();
    for r in all_orders() {
        for c in all_orders() {
            let base = CellPermutation::cols(c).then(&CellPermutation::rows(r));
            out.insert(base.then(&CellPermutation::transpose()));
            out.insert(base);
        }
    }
    out.into_iter().collect()
}

/// Index of the unprimed context read by each primed context, if `pi` maps contexts to contexts.
fn context_images(scenario: &Scenario, pi: &CellPermutation) -> Option<Vec<usize>> {
    let sets: Vec<BTreeSet<usize>> = scenario
        .contexts
        .iter()
        .map(|c| c.cells.iter().map(|x| x.row * 3 + x.col).collect())
        .collect();
    scenario
        .contexts
        .iter()
        .map(|c| {
            let img = pi.image(&c.cells);
            sets.iter().position(|s| *s == img)
        })
        .collect()
}

/// Required product of the signs over each primed context.
fn required_products(scenario: &Scenario, pi: &CellPermutation) -> Vec<i8> {
    let images = context_images(scenario, pi).expect("context permutation");
    scenario
        .contexts
        .iter()
        .zip(images)
        .map(|(c, i)| c.parity * scenario.contexts[i].parity)
        .collect()
}

/// Whether relabelling by `(pi, zeta)` keeps every context's parity.
pub fn preserves_compatibility(scenario: &Scenario, pi: &CellPermutation, zeta: &SignMatrix) -> bool {
    let Some(images) = context_images(scenario, pi) else {
        return false;
    };
    scenario.contexts.iter().zip(images).all(|(c, i)| {
        let prod: i8 = c.cells.iter().map(|x| zeta.0[x.row * 3 + x.col]).product();
        prod == c.parity * scenario.contexts[i].parity
    })
}

pub fn classify_permutation(pi: &CellPermutation) -> PermutationClass {
    let col3 = pi.image(&[Cell::new(0, 2), Cell::new(1, 2), Cell::new(2, 2)]);
    let cols: BTreeSet<usize> = col3.iter().map(|k| k % 3).collect();
    let rows: BTreeSet<usize> = col3.iter().map(|k| k / 3).collect();
    if cols.len() == 1 {
        if cols.contains(&2) {
            PermutationClass::A
        } else {
            PermutationClass::B
        }
    } else {
        debug_assert_eq!(rows.len(), 1);
        PermutationClass::C
    }
}

/// Translate of the rectangle set used for a permutation outside class A:
/// `-1` on row 3 of the two parity-flipped columns, or at the crossing of the
/// flipped row with column 3.
fn base_sign(scenario: &Scenario, pi: &CellPermutation) -> SignMatrix {
    let flipped: Vec<usize> = required_products(scenario, pi)
        .iter()
        .enumerate()
        .filter(|(_, &p)| p < 0)
        .map(|(i, _)| i)
        .collect();
    let mut cells = Vec::new();
    let ctx = |i: usize| &scenario.contexts[i].cells;
    match flipped.as_slice() {
        [] => {}
        [a, b] => {
            let (ca, cb) = (ctx(*a), ctx(*b));
            let same_col = |c: &[Cell; 3]| c.iter().all(|x| x.col == c[0].col);
            if same_col(ca) && same_col(cb) {
                cells.push((2, ca[0].col));
                cells.push((2, cb[0].col));
            } else {
                for x in ca {
                    if cb.contains(x) {
                        cells.push((x.row, x.col));
                    }
                }
            }
        }
        _ => unreachable!("a context permutation flips zero or two contexts"),
    }
    SignMatrix::with_minus(&cells)
}

/// The all-plus matrix and the nine rectangle patterns.
pub fn rectangle_signs() -> Vec<SignMatrix> {
    let mut out = vec![SignMatrix::all_plus()];
    for (i, ii) in [(0, 1), (0, 2), (1, 2)] {
        for (j, jj) in [(0, 1), (0, 2), (1, 2)] {
            out.push(SignMatrix::with_minus(&[(i, j), (ii, j), (i, jj), (ii, jj)]));
        }
    }
    out.sort();
    out
}

/// Explicit enumeration of permutation classes and sign sets for the
/// Peres-Mermin square. Class C includes the transpose factor and class B
/// covers every column permutation that moves column 3 to another column.
pub fn enumerate_explicit_group() -> ExplicitSymmetryGroup {
    let scenario = Scenario::peres_mermin();
    let perms = context_permutations();
    let mut p_a = Vec::new();
    let mut p_b = Vec::new();
    let mut p_c = Vec::new();
    for pi in perms {
        match classify_permutation(&pi) {
            PermutationClass::A => p_a.push(pi),
            PermutationClass::B => p_b.push(pi),
            PermutationClass::C => p_c.push(pi),
        }
    }

    let z_a = rectangle_signs();
    let class_a_solutions = (0u32..512)
        .filter(|mask| {
            let zeta = SignMatrix(std::array::from_fn(|k| if mask >> k & 1 == 1 { -1 } else { 1 }));
            preserves_compatibility(&scenario, &CellPermutation::identity(), &zeta)
        })
        .count();

    let mut elements = Vec::new();
    let mut ds: BTreeMap<PermutationClass, BTreeSet<SignMatrix>> = BTreeMap::new();
    for (class, list) in [(PermutationClass::A, &p_a), (PermutationClass::B, &p_b), (PermutationClass::C, &p_c)] {
        for pi in list {
            let base = base_sign(&scenario, pi);
            let zs: Vec<SignMatrix> = z_a.iter().map(|z| z.hadamard(&base)).collect();
            debug_assert!(zs.iter().all(|z| preserves_compatibility(&scenario, pi, z)));
            for zeta in &zs {
                for gamma in &zs {
                    ds.entry(class).or_default().insert(zeta.hadamard(gamma));
                    elements.push(SymmetryElement { pi: pi.clone(), zeta: *zeta, gamma: *gamma });
                }
            }
        }
    }

    let mut literal_pc = BTreeSet::new();
    let mut literal_pb = BTreeSet::new();
    for r in all_orders() {
        let rows = CellPermutation::rows(r);
        for c in all_orders() {
            literal_pc.insert(CellPermutation::cols(c).then(&rows));
        }
        for c in [[0, 1, 2], [1, 0, 2]] {
            literal_pb.insert(CellPermutation::cols(c).then(&rows).then(&CellPermutation::cols([0, 2, 1])));
        }
    }
    let literal_pc_to_row =
        literal_pc.iter().filter(|p| classify_permutation(p) == PermutationClass::C).count();

    let mut take = |c| ds.remove(&c).unwrap_or_default();
    ExplicitSymmetryGroup {
        d_a: take(PermutationClass::A),
        d_b: take(PermutationClass::B),
        d_c: take(PermutationClass::C),
        p_a,
        p_b,
        p_c,
        z_a,
        elements,
        class_a_solutions,
        literal_pc_to_row,
        literal_pb_len: literal_pb.len(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Orbit<T> {
    pub representative: T,
    pub members: Vec<T>,
}

impl<T> Orbit<T> {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// Partitions `items` into orbits under `act`; classes are listed in order of
/// their (lexicographically minimal) representatives.
pub fn orbits<T, F>(items: &[T], group: &SymmetryGroup, act: F) -> Result<Vec<Orbit<T>>, SymmetryError>
where
    T: Ord + Clone + Send + Sync,
    F: Fn(&SignedPermutation, &T) -> T + Sync,
{
    let index: BTreeMap<&T, usize> = items.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let images: Vec<Result<BTreeSet<usize>, SymmetryError>> = items
        .par_iter()
        .enumerate()
        .map(|(i, t)| {
            group
                .elements()
                .iter()
                .map(|g| index.get(&act(g, t)).copied().ok_or(SymmetryError::NotClosed { item: i }))
                .collect()
        })
        .collect();
    let mut assigned = vec![false; items.len()];
    let mut out = Vec::new();
    for (i, img) in images.into_iter().enumerate() {
        let img = img?;
        if assigned[i] {
            continue;
        }
        let mut members: Vec<T> = img
            .iter()
            .map(|&k| {
                assigned[k] = true;
                items[k].clone()
            })
            .collect();
        members.sort();
        members.dedup();
        out.push(Orbit { representative: members[0].clone(), members });
    }
    out.sort_by(|a, b| a.representative.cmp(&b.representative));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dualdesc;
    use crate::exactgeom::{rat, Rational};
    use crate::scenario::AssignmentRole;

    fn pm_hrep() -> HRep {
        Scenario::peres_mermin().build_assignment_polytope(AssignmentRole::Measurement)
    }

    fn assignment_group() -> SymmetryGroup {
        let h = pm_hrep();
        close_generators(9, &assignment_generators(), |g| preserves_hrep(&h, g)).unwrap()
    }

    #[test]
    fn compose_and_inverse() {
        let gens = correlation_generators();
        let g = gens[2].compose(&gens[0]);
        let x: Vec<i64> = (1..=9).collect();
        assert_eq!(g.apply(&x), gens[2].apply(&gens[0].apply(&x)));
        assert!(g.compose(&g.inverse()).is_identity());
        assert!(g.inverse().compose(&g).is_identity());
    }

    #[test]
    fn identity_only_closure() {
        let g = close_generators(9, &[SignedPermutation::identity(9)], |_| true).unwrap();
        assert_eq!(g.order(), 1);
    }

    #[test]
    fn assignment_group_matches_brute_force_stabilizer() {
        let group = assignment_group();
        assert_eq!(group.order(), 1152);
        assert!(group.is_group());
        // Oracle: every context permutation with every sign pattern, kept iff
        // it maps the 24 rows onto themselves.
        let h = pm_hrep();
        let mut oracle = BTreeSet::new();
        for pi in context_permutations() {
            for mask in 0u32..512 {
                let signs = (0..9).map(|k| if mask >> k & 1 == 1 { -1 } else { 1 }).collect();
                let g = SignedPermutation::new(pi.0.to_vec(), signs).unwrap();
                if preserves_hrep(&h, &g) {
                    oracle.insert(g);
                }
            }
        }
        assert_eq!(oracle.into_iter().collect::<Vec<_>>(), group.elements());
    }

    #[test]
    fn non_symmetry_generator_rejected() {
        let h = pm_hrep();
        let bad = SignedPermutation::from_cell_map(3, 3, |i, j| (j, i), |_, _| 1).unwrap();
        assert_eq!(
            close_generators(9, &[bad], |g| preserves_hrep(&h, g)),
            Err(SymmetryError::NotASymmetry(0))
        );
    }

    #[test]
    fn explicit_enumeration() {
        let b = enumerate_explicit_group();
        assert_eq!(b.z_a.len(), 10);
        assert!(b.z_a.contains(&SignMatrix::with_minus(&[(0, 0), (0, 1), (1, 0), (1, 1)])));
        assert_eq!(b.class_a_solutions, 16);
        assert_eq!((b.p_a.len(), b.p_b.len(), b.p_c.len()), (12, 24, 36));
        assert_eq!(b.literal_pc_to_row, 0);
        assert_eq!(b.literal_pb_len, 12);
        assert!(b.ds_agree());
        assert_eq!(b.d_a.len(), 16);
        assert!(b.d_a.contains(&SignMatrix::with_minus(&[(0, 0), (0, 1), (1, 0), (1, 2), (2, 1), (2, 2)])));
        let induced = b.induced_correlation_group();
        assert_eq!(induced.order(), 1152);
        let closed = close_generators(9, &correlation_generators(), |_| true).unwrap();
        assert_eq!(closed, induced);
    }

    #[test]
    fn example_sign_sets_for_named_permutations() {
        let pm = Scenario::peres_mermin();
        let c23 = CellPermutation::cols([0, 2, 1]);
        assert_eq!(classify_permutation(&c23), PermutationClass::B);
        assert_eq!(base_sign(&pm, &c23), SignMatrix::with_minus(&[(2, 1), (2, 2)]));
        let t = CellPermutation::transpose();
        assert_eq!(classify_permutation(&t), PermutationClass::C);
        assert_eq!(base_sign(&pm, &t), SignMatrix::with_minus(&[(2, 2)]));
        assert!(preserves_compatibility(&pm, &t, &SignMatrix::with_minus(&[(2, 2)])));
        assert!(!preserves_compatibility(&pm, &t, &SignMatrix::all_plus()));
    }

    fn vertex_grid(rows: [[i64; 3]; 3]) -> Vec<Rational> {
        rows.iter().flatten().map(|&x| rat(x)).collect()
    }

    #[test]
    fn assignment_vertex_classes() {
        let v = dualdesc::facets_to_vertices(&pm_hrep()).unwrap();
        let points = v.points();
        let group = assignment_group();
        let classes = orbits(&points, &group, |g, p| g.apply(p)).unwrap();
        let mut sizes: Vec<usize> = classes.iter().map(Orbit::size).collect();
        sizes.sort();
        assert_eq!(sizes, vec![48, 72]);

        let zeros = |p: &Vec<Rational>| p.iter().filter(|x| **x == rat(0)).count();
        let signed_perm_matrix = |p: &Vec<Rational>| {
            (0..3).all(|i| (0..3).filter(|&j| p[3 * i + j] != rat(0)).count() == 1)
                && (0..3).all(|j| (0..3).filter(|&i| p[3 * i + j] != rat(0)).count() == 1)
        };
        for class in &classes {
            let z = zeros(&class.representative);
            assert!(class.members.iter().all(|p| zeros(p) == z));
            let is48 = class.size() == 48;
            assert!(class.members.iter().all(|p| signed_perm_matrix(p) == is48));
            assert_eq!(z, if is48 { 6 } else { 4 });
        }
        let find = |p: &Vec<Rational>| classes.iter().find(|c| c.members.contains(p)).unwrap().size();
        assert_eq!(find(&vertex_grid([[0, 0, -1], [0, 0, 1], [1, 1, 1]])), 72);
        assert_eq!(find(&vertex_grid([[0, 0, 1], [1, 0, 0], [0, -1, 0]])), 48);
    }

    #[test]
    fn orbits_reject_unclosed_input() {
        let group = SymmetryGroup::from_elements(correlation_generators());
        let items = vec![vec![1i64, 0, 0, 0, 0, 0, 0, 0, 0]];
        assert!(matches!(orbits(&items, &group, |g, p| g.apply(p)), Err(SymmetryError::NotClosed { .. })));
        let fixed = vec![vec![0i64; 9]];
        let o = orbits(&fixed, &group, |g, p| g.apply(p)).unwrap();
        assert_eq!(o.len(), 1);
        assert_eq!(o[0].size(), 1);
    }
}
