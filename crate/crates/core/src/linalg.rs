//! Dense exact linear algebra over any [`Field`].
//!
//! Matrices are row-major `Vec<Vec<_>>`; sizes here are at most a few
//! thousand so nothing fancier is needed.

use crate::arith::Field;

pub type Matrix<E> = Vec<Vec<E>>;

pub fn transpose<E: Clone>(m: &[Vec<E>]) -> Matrix<E> {
    if m.is_empty() {
        return Vec::new();
    }
    let cols = m[0].len();
    (0..cols)
        .map(|c| m.iter().map(|row| row[c].clone()).collect())
        .collect()
}

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref<F: Field>(field: &F, m: &mut Matrix<F::Elem>) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !field.is_zero(&m[i][c])) else {
            continue;
        };
        m.swap(r, p);
        let inv = field.inv(&m[r][c]).expect("nonzero pivot");
        for j in c..cols {
            m[r][j] = field.mul(&m[r][j], &inv);
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || field.is_zero(&row[c]) {
                continue;
            }
            let f = row[c].clone();
            for j in c..cols {
                let t = field.mul(&f, &pivot_row[j]);
                row[j] = field.sub(&row[j], &t);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank<F: Field>(field: &F, m: &[Vec<F::Elem>]) -> usize {
    let mut work = m.to_vec();
    forward_rank(field, &mut work)
}

/// Row-echelon elimination without back substitution; cheaper than [`rref`]
/// when only the rank is wanted.
fn forward_rank<F: Field>(field: &F, m: &mut Matrix<F::Elem>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !field.is_zero(&m[i][c])) else {
            continue;
        };
        m.swap(r, p);
        let inv = field.inv(&m[r][c]).expect("nonzero pivot");
        let (top, bottom) = m.split_at_mut(r + 1);
        let pivot_row = &top[r];
        for row in bottom.iter_mut() {
            if field.is_zero(&row[c]) {
                continue;
            }
            let f = field.mul(&row[c], &inv);
            for j in c..cols {
                let t = field.mul(&f, &pivot_row[j]);
                row[j] = field.sub(&row[j], &t);
            }
        }
        r += 1;
    }
    r
}

/// Basis of `{x : m x = 0}`. `cols` is needed when `m` has no rows.
pub fn kernel<F: Field>(field: &F, m: &[Vec<F::Elem>], cols: usize) -> Matrix<F::Elem> {
    let mut work = m.to_vec();
    let pivots = rref(field, &mut work);
    let mut is_pivot = vec![None; cols];
    for (i, &c) in pivots.iter().enumerate() {
        is_pivot[c] = Some(i);
    }
    let mut basis = Vec::new();
    for free in (0..cols).filter(|&c| is_pivot[c].is_none()) {
        let mut v = vec![field.zero(); cols];
        v[free] = field.one();
        for (i, &pc) in pivots.iter().enumerate() {
            v[pc] = field.neg(&work[i][free]);
        }
        basis.push(v);
    }
    basis
}

/// Basis of `{y : y m = 0}`.
pub fn left_kernel<F: Field>(field: &F, m: &[Vec<F::Elem>]) -> Matrix<F::Elem> {
    kernel(field, &transpose(m), m.len())
}

/// Some solution of `a x = b`, if one exists.
pub fn solve<F: Field>(field: &F, a: &[Vec<F::Elem>], b: &[F::Elem]) -> Option<Vec<F::Elem>> {
    let cols = a.first().map_or(0, |r| r.len());
    let mut aug: Matrix<F::Elem> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(field, &mut aug);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut x = vec![field.zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = aug[i][cols].clone();
    }
    Some(x)
}

pub fn inverse<F: Field>(field: &F, a: &[Vec<F::Elem>]) -> Option<Matrix<F::Elem>> {
    let n = a.len();
    let mut aug: Matrix<F::Elem> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { field.one() } else { field.zero() }));
            r
        })
        .collect();
    let pivots = rref(field, &mut aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn mat_mul<F: Field>(field: &F, a: &[Vec<F::Elem>], b: &[Vec<F::Elem>]) -> Matrix<F::Elem> {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut acc = field.zero();
                    for k in 0..inner {
                        acc = field.add(&acc, &field.mul(&row[k], &b[k][j]));
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn mat_vec<F: Field>(field: &F, a: &[Vec<F::Elem>], v: &[F::Elem]) -> Vec<F::Elem> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(field.zero(), |acc, (x, y)| field.add(&acc, &field.mul(x, y)))
        })
        .collect()
}

/// Maintains an echelon basis of a growing set of row vectors.
#[derive(Clone, Debug)]
pub struct IncrementalBasis<E> {
    rows: Vec<(usize, Vec<E>)>,
}

impl<E: Clone> Default for IncrementalBasis<E> {
    fn default() -> Self {
        Self { rows: Vec::new() }
    }
}

impl<E: Clone> IncrementalBasis<E> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduce `v` against the basis and return the remainder.
    pub fn reduce<F: Field<Elem = E>>(&self, field: &F, v: &[E]) -> Vec<E> {
        let mut v = v.to_vec();
        for (p, row) in &self.rows {
            if field.is_zero(&v[*p]) {
                continue;
            }
            let f = v[*p].clone();
            for (x, y) in v.iter_mut().zip(row) {
                *x = field.sub(x, &field.mul(&f, y));
            }
        }
        v
    }

    /// Inserts `v` if it is independent of the current rows; returns whether
    /// the rank grew.
    pub fn insert<F: Field<Elem = E>>(&mut self, field: &F, v: &[E]) -> bool {
        let mut v = self.reduce(field, v);
        let Some(p) = v.iter().position(|x| !field.is_zero(x)) else {
            return false;
        };
        let inv = field.inv(&v[p]).expect("nonzero");
        for x in v.iter_mut() {
            *x = field.mul(x, &inv);
        }
        self.rows.push((p, v));
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{Rationals, Ring};
    use num_rational::BigRational;

    fn q(m: &[&[i64]]) -> Matrix<BigRational> {
        m.iter()
            .map(|r| r.iter().map(|&x| Rationals.from_i64(x)).collect())
            .collect()
    }

    #[test]
    fn rank_and_kernel() {
        let m = q(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(rank(&Rationals, &m), 2);
        let k = kernel(&Rationals, &m, 3);
        assert_eq!(k.len(), 1);
        assert!(mat_vec(&Rationals, &m, &k[0]).iter().all(|x| Rationals.is_zero(x)));
        let lk = left_kernel(&Rationals, &m);
        assert_eq!(lk.len(), 1);
    }

    #[test]
    fn inverse_and_solve() {
        let m = q(&[&[2, 1], &[5, 3]]);
        let inv = inverse(&Rationals, &m).unwrap();
        assert_eq!(mat_mul(&Rationals, &m, &inv), q(&[&[1, 0], &[0, 1]]));
        let b = vec![Rationals.from_i64(1), Rationals.from_i64(2)];
        let x = solve(&Rationals, &m, &b).unwrap();
        assert_eq!(mat_vec(&Rationals, &m, &x), b);
        assert!(inverse(&Rationals, &q(&[&[1, 2], &[2, 4]])).is_none());
        let b2 = vec![Rationals.from_i64(1), Rationals.from_i64(3)];
        assert!(solve(&Rationals, &q(&[&[1, 2], &[2, 4]]), &b2).is_none());
    }

    #[test]
    fn incremental_basis_tracks_rank() {
        let mut b = IncrementalBasis::new();
        let rows = q(&[&[1, 2, 3], &[2, 4, 6], &[0, 1, 1], &[1, 3, 4]]);
        let grew: Vec<bool> = rows.iter().map(|r| b.insert(&Rationals, r)).collect();
        assert_eq!(grew, vec![true, false, true, false]);
        assert_eq!(b.rank(), 2);
    }
}
