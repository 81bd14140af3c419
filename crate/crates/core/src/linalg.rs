//! Small exact linear-algebra helpers over the rationals.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::exactgeom::{primitive, Rational};

pub fn to_rational(v: &[BigInt]) -> Vec<Rational> {
    v.iter().map(|e| Rational::from_integer(e.clone())).collect()
}

/// Reduced row echelon form; returns the nonzero rows and their pivot columns.
pub fn rref(rows: &[Vec<Rational>]) -> (Vec<Vec<Rational>>, Vec<usize>) {
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    let ncols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Rational::one() / &m[r][c];
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    (m, pivots)
}

pub fn rank(rows: &[Vec<Rational>]) -> usize {
    rref(rows).1.len()
}

pub fn rank_int(rows: &[Vec<BigInt>]) -> usize {
    let rows: Vec<Vec<Rational>> = rows.iter().map(|r| to_rational(r)).collect();
    rank(&rows)
}

/// Basis of `{x : row . x = 0 for every row}`, in reduced echelon form.
pub fn nullspace(rows: &[Vec<Rational>], ncols: usize) -> Vec<Vec<Rational>> {
    let (reduced, pivots) = rref(rows);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    let basis: Vec<Vec<Rational>> = free
        .iter()
        .map(|&f| {
            let mut x = vec![Rational::zero(); ncols];
            x[f] = Rational::one();
            for (row, &p) in reduced.iter().zip(&pivots) {
                x[p] = -row[f].clone();
            }
            x
        })
        .collect();
    rref(&basis).0
}

/// Inverse of a square nonsingular matrix.
pub fn inverse(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let augmented: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|k| if k == i { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    let (reduced, pivots) = rref(&augmented);
    if pivots.len() < n || pivots[n - 1] >= n {
        return None;
    }
    Some(reduced.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Integer primitive vector along a rational direction.
pub fn primitive_from_rational(v: &[Rational]) -> Vec<BigInt> {
    primitive(crate::exactgeom::integer_direction(v))
}
