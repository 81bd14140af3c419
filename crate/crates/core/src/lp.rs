//! Exact revised simplex (two phases, Bland's rule) over big rationals.
//!
//! Problems are taken in equality standard form
//! `minimize c.x subject to A x = b, x >= 0`. Infeasible problems return a
//! Farkas certificate `y` with `y.A_j <= 0` for every column and `y.b > 0`.

use num_traits::{One, Signed, Zero};

use crate::exactgeom::Rational;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<Rational>, value: Rational, duals: Vec<Rational> },
    Infeasible { farkas: Vec<Rational> },
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct StandardLp {
    pub a: Vec<Vec<Rational>>,
    pub b: Vec<Rational>,
    pub c: Vec<Rational>,
}

/// Revised simplex state: explicit basis inverse over sparse columns, with
/// artificial identity columns numbered `n..n+m`.
struct Revised {
    columns: Vec<Vec<(usize, Rational)>>,
    binv: Vec<Vec<Rational>>,
    xb: Vec<Rational>,
    basis: Vec<usize>,
    n: usize,
}

impl Revised {
    fn m(&self) -> usize {
        self.basis.len()
    }

    fn column_dot(&self, y: &[Rational], j: usize) -> Rational {
        if j >= self.n {
            return y[j - self.n].clone();
        }
        self.columns[j].iter().map(|(i, v)| &y[*i] * v).sum()
    }

    /// `B^-1 A_j`.
    fn ftran(&self, j: usize) -> Vec<Rational> {
        if j >= self.n {
            return self.binv.iter().map(|row| row[j - self.n].clone()).collect();
        }
        self.binv
            .iter()
            .map(|row| self.columns[j].iter().map(|(i, v)| &row[*i] * v).sum())
            .collect()
    }

    /// `y = c_B B^-1`.
    fn duals(&self, cost: &[Rational]) -> Vec<Rational> {
        let m = self.m();
        let mut y = vec![Rational::zero(); m];
        for (r, &bv) in self.basis.iter().enumerate() {
            let cb = &cost[bv];
            if cb.is_zero() {
                continue;
            }
            for (yi, v) in y.iter_mut().zip(&self.binv[r]) {
                if !v.is_zero() {
                    *yi += cb * v;
                }
            }
        }
        y
    }

    fn objective(&self, cost: &[Rational]) -> Rational {
        self.basis.iter().zip(&self.xb).map(|(&bv, v)| &cost[bv] * v).sum()
    }

    fn pivot(&mut self, row: usize, col: usize, u: &[Rational]) {
        let piv = u[row].clone();
        if !piv.is_one() {
            for v in self.binv[row].iter_mut() {
                *v = &*v / &piv;
            }
            self.xb[row] = &self.xb[row] / &piv;
        }
        let pivot_row = self.binv[row].clone();
        let pivot_x = self.xb[row].clone();
        for (r, factor) in u.iter().enumerate() {
            if r == row || factor.is_zero() {
                continue;
            }
            for (v, p) in self.binv[r].iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= factor * p;
                }
            }
            self.xb[r] -= factor * &pivot_x;
        }
        self.basis[row] = col;
    }

    /// Bland's rule with entering columns restricted to `< allowed`.
    /// Returns false when the objective is unbounded below.
    fn optimize(&mut self, cost: &[Rational], allowed: usize) -> bool {
        loop {
            let y = self.duals(cost);
            let in_basis: Vec<bool> = {
                let mut flags = vec![false; self.n + self.m()];
                for &b in &self.basis {
                    flags[b] = true;
                }
                flags
            };
            let Some(enter) =
                (0..allowed).find(|&j| !in_basis[j] && (&cost[j] - self.column_dot(&y, j)).is_negative())
            else {
                return true;
            };
            let u = self.ftran(enter);
            let mut leave: Option<(usize, Rational)> = None;
            for (r, coef) in u.iter().enumerate() {
                if !coef.is_positive() {
                    continue;
                }
                let ratio = &self.xb[r] / coef;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((lr, lratio)) => {
                        if ratio < lratio || (ratio == lratio && self.basis[r] < self.basis[lr]) {
                            Some((r, ratio))
                        } else {
                            Some((lr, lratio))
                        }
                    }
                };
            }
            match leave {
                None => return false,
                Some((row, _)) => self.pivot(row, enter, &u),
            }
        }
    }
}

/// Solves `minimize c.x s.t. A x = b, x >= 0` exactly.
pub fn solve(problem: &StandardLp) -> LpOutcome {
    let m = problem.a.len();
    let n = problem.c.len();
    debug_assert_eq!(problem.b.len(), m);
    // Flip rows so every right-hand side is nonnegative.
    let signs: Vec<bool> = problem.b.iter().map(|b| b.is_negative()).collect();
    let mut columns: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); n];
    for (i, row) in problem.a.iter().enumerate() {
        debug_assert_eq!(row.len(), n);
        for (j, v) in row.iter().enumerate() {
            if !v.is_zero() {
                columns[j].push((i, if signs[i] { -v } else { v.clone() }));
            }
        }
    }
    let xb = problem.b.iter().zip(&signs).map(|(b, &f)| if f { -b } else { b.clone() }).collect();
    let binv = (0..m)
        .map(|i| (0..m).map(|k| if k == i { Rational::one() } else { Rational::zero() }).collect())
        .collect();
    let mut lp = Revised { columns, binv, xb, basis: (n..n + m).collect(), n };

    let mut phase1 = vec![Rational::zero(); n + m];
    for c in phase1.iter_mut().skip(n) {
        *c = Rational::one();
    }
    lp.optimize(&phase1, n + m);
    let unflip = |y: Vec<Rational>| -> Vec<Rational> {
        y.into_iter().zip(&signs).map(|(v, &flip)| if flip { -v } else { v }).collect()
    };
    if lp.objective(&phase1).is_positive() {
        // Phase-1 duals satisfy y.A_j <= 0 and y.b > 0 for the flipped rows.
        return LpOutcome::Infeasible { farkas: unflip(lp.duals(&phase1)) };
    }

    // Drive zero-level artificials out of the basis where possible.
    for r in 0..m {
        if lp.basis[r] >= n {
            let row = lp.binv[r].clone();
            if let Some(col) = (0..n).find(|&j| !lp.column_dot(&row, j).is_zero()) {
                let u = lp.ftran(col);
                lp.pivot(r, col, &u);
            }
        }
    }

    let mut phase2 = problem.c.clone();
    phase2.resize(n + m, Rational::zero());
    if !lp.optimize(&phase2, n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Rational::zero(); n];
    for (r, &bv) in lp.basis.iter().enumerate() {
        if bv < n {
            x[bv] = lp.xb[r].clone();
        }
    }
    let value = lp.objective(&phase2);
    LpOutcome::Optimal { x, value, duals: unflip(lp.duals(&phase2)) }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConeMembership {
    /// Nonnegative weights reproducing the target.
    Inside(Vec<Rational>),
    /// A vector `y` with `y.g <= 0` for every generator and `y.target > 0`.
    Outside(Vec<Rational>),
}

/// Decides whether `target` is a nonnegative combination of `generators`.
pub fn cone_membership(target: &[Rational], generators: &[Vec<Rational>]) -> ConeMembership {
    let dim = target.len();
    let a: Vec<Vec<Rational>> = (0..dim)
        .map(|i| generators.iter().map(|g| g[i].clone()).collect())
        .collect();
    let problem = StandardLp {
        a,
        b: target.to_vec(),
        c: vec![Rational::zero(); generators.len()],
    };
    match solve(&problem) {
        LpOutcome::Optimal { x, .. } => ConeMembership::Inside(x),
        LpOutcome::Infeasible { farkas } => ConeMembership::Outside(farkas),
        LpOutcome::Unbounded => unreachable!("zero objective cannot be unbounded"),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Optimum {
    Finite { value: Rational, argmax: Vec<Rational> },
    Unbounded,
    Infeasible,
}

/// Maximizes `objective . x` over `{x : constant_i + coeffs_i . x >= 0}` with `x` free.
pub fn maximize(constraints: &[(Rational, Vec<Rational>)], objective: &[Rational]) -> Optimum {
    let d = objective.len();
    let m = constraints.len();
    // x = u - w, slack s >= 0:  -coeffs.u + coeffs.w + s = constant
    let mut a = Vec::with_capacity(m);
    let mut b = Vec::with_capacity(m);
    for (i, (constant, coeffs)) in constraints.iter().enumerate() {
        let mut row = Vec::with_capacity(2 * d + m);
        row.extend(coeffs.iter().map(|v| -v));
        row.extend(coeffs.iter().cloned());
        row.extend((0..m).map(|k| if k == i { Rational::one() } else { Rational::zero() }));
        a.push(row);
        b.push(constant.clone());
    }
    let mut c: Vec<Rational> = objective.iter().map(|v| -v).collect();
    c.extend(objective.iter().cloned());
    c.extend((0..m).map(|_| Rational::zero()));
    match solve(&StandardLp { a, b, c }) {
        LpOutcome::Optimal { x, value, .. } => {
            let argmax = (0..d).map(|j| &x[j] - &x[d + j]).collect();
            Optimum::Finite { value: -value, argmax }
        }
        LpOutcome::Unbounded => Optimum::Unbounded,
        LpOutcome::Infeasible { .. } => Optimum::Infeasible,
    }
}
