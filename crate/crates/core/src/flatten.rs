//! Flattenings, their exact ranks, and the set-theoretic σ₂ test.
//!
//! [`gss_sigma2_test`] either exhibits a nonzero 3×3 minor of some
//! flattening or writes the tensor as a point of `σ₂`: rank one, a sum of two
//! rank-one tensors (over `Q` or a quadratic extension), or a tangent vector
//! `Σ_i a_1 ⊗ … ⊗ a'_i ⊗ … ⊗ a_k`. Every answer is checked exactly before it
//! is returned.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::arith::{det_small, rational_sqrt, Field, QuadElem, QuadraticField, Rationals, Ring};
use crate::error::{Error, Result};
use crate::linalg::{inverse, rank, rref, solve, transpose, IncrementalBasis, Matrix};
use crate::tensor::{rational_to_json, strides, RankOnePoint, Tensor};

pub const MINOR_SPAN_GUARD: usize = 1000;
const MINOR_COUNT_GUARD: usize = 500_000;

/// Matricization of a tensor: factors in `rows` index the rows, the others
/// the columns, each in increasing factor order.
#[derive(Clone, Debug, PartialEq)]
pub struct Flattening {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub matrix: Matrix<BigRational>,
}

fn check_split(k: usize, rows: &[usize]) -> Result<Vec<usize>> {
    let mut sorted = rows.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != rows.len() || sorted.iter().any(|&f| f >= k) {
        return Err(Error::Argument(format!(
            "bad factor set {rows:?} for a {k}-factor tensor"
        )));
    }
    if sorted.is_empty() || sorted.len() == k {
        return Err(Error::Argument("both sides of a flattening must be nonempty".into()));
    }
    Ok(sorted)
}

pub fn flattening(t: &Tensor<BigRational>, rows: &[usize]) -> Result<Flattening> {
    let rows = check_split(t.order(), rows)?;
    let cols = (0..t.order()).filter(|f| !rows.contains(f)).collect();
    Ok(Flattening {
        matrix: t.flatten(&rows),
        rows,
        cols,
    })
}

pub fn flattening_rank(t: &Tensor<BigRational>, rows: &[usize]) -> Result<usize> {
    Ok(rank(&Rationals, &flattening(t, rows)?.matrix))
}

/// One side of every split of `{0, …, k-1}` into two nonempty parts, always
/// the side containing factor 0.
pub fn bipartitions(k: usize) -> Vec<Vec<usize>> {
    if k < 2 {
        return Vec::new();
    }
    (0..(1usize << (k - 1)) - 1)
        .map(|mask| {
            std::iter::once(0)
                .chain((1..k).filter(|i| mask >> (i - 1) & 1 == 1))
                .collect()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Certificates

#[derive(Clone, Debug, PartialEq)]
pub enum Sigma2Certificate {
    /// `T = a_1 ⊗ … ⊗ a_k`; `degenerate` marks the zero tensor.
    RankOne {
        point: RankOnePoint<BigRational>,
        degenerate: bool,
    },
    /// `T = p_1 + p_2`, with coordinates in `Q(sqrt radicand)` when a
    /// radicand is given and in `Q` otherwise.
    RankTwo {
        radicand: Option<BigRational>,
        points: Vec<RankOnePoint<QuadElem>>,
    },
    /// `T = Σ_i base_1 ⊗ … ⊗ perturbation_i ⊗ … ⊗ base_k`.
    Tangent {
        base: RankOnePoint<BigRational>,
        perturbation: Vec<Vec<BigRational>>,
    },
    /// A nonzero 3×3 minor of the flattening with row factors `rows`.
    Witness {
        rows: Vec<usize>,
        row_indices: Vec<usize>,
        col_indices: Vec<usize>,
        minor: BigRational,
    },
}

fn quad_to_json(x: &QuadElem) -> Value {
    if x.b.is_zero() {
        rational_to_json(&x.a)
    } else {
        json!({ "a": rational_to_json(&x.a), "b": rational_to_json(&x.b) })
    }
}

fn point_json(p: &RankOnePoint<BigRational>) -> Value {
    Value::Array(
        p.vectors
            .iter()
            .map(|v| Value::Array(v.iter().map(rational_to_json).collect()))
            .collect(),
    )
}

impl Sigma2Certificate {
    pub fn kind(&self) -> &'static str {
        match self {
            Sigma2Certificate::RankOne { .. } => "rank_one",
            Sigma2Certificate::RankTwo { .. } => "rank_two",
            Sigma2Certificate::Tangent { .. } => "tangent",
            Sigma2Certificate::Witness { .. } => "witness",
        }
    }

    pub fn in_sigma2(&self) -> bool {
        !matches!(self, Sigma2Certificate::Witness { .. })
    }

    /// The tensor a decomposition certificate describes; `None` for a
    /// witness or if irrational parts fail to cancel.
    pub fn reconstruct(&self) -> Option<Tensor<BigRational>> {
        let q = Rationals;
        match self {
            Sigma2Certificate::RankOne { point, .. } => Some(Tensor::rank_one(&q, point)),
            Sigma2Certificate::Tangent { base, perturbation } => {
                let dims = base.dims();
                let mut t = Tensor::zeros(&q, &dims);
                for (i, p) in perturbation.iter().enumerate() {
                    let mut pt = base.clone();
                    pt.vectors[i] = p.clone();
                    t.add_assign(&q, &Tensor::rank_one(&q, &pt));
                }
                Some(t)
            }
            Sigma2Certificate::RankTwo { radicand, points } => {
                let dims = points.first()?.dims();
                let data: Vec<QuadElem> = match radicand {
                    None => {
                        let pts: Vec<RankOnePoint<BigRational>> =
                            points.iter().map(|p| p.map(|x| x.a.clone())).collect();
                        if points
                            .iter()
                            .any(|p| p.vectors.iter().flatten().any(|x| !x.b.is_zero()))
                        {
                            return None;
                        }
                        return Some(Tensor::sum_of(&q, &dims, &pts));
                    }
                    Some(d) => {
                        let k = QuadraticField::new(d.clone())?;
                        Tensor::sum_of(&k, &dims, points).data
                    }
                };
                if data.iter().any(|x| !x.b.is_zero()) {
                    return None;
                }
                Some(Tensor {
                    dims,
                    data: data.into_iter().map(|x| x.a).collect(),
                })
            }
            Sigma2Certificate::Witness { .. } => None,
        }
    }

    /// Decompositions reconstruct `t` exactly; a witness minor recomputes to
    /// the same nonzero value.
    pub fn verify(&self, t: &Tensor<BigRational>) -> bool {
        match self {
            Sigma2Certificate::Witness {
                rows,
                row_indices,
                col_indices,
                minor,
            } => {
                let Ok(f) = flattening(t, rows) else {
                    return false;
                };
                let in_range = row_indices.len() == 3
                    && col_indices.len() == 3
                    && row_indices.iter().all(|&i| i < f.matrix.len())
                    && col_indices.iter().all(|&j| j < f.matrix[0].len());
                if !in_range {
                    return false;
                }
                let sub: Matrix<BigRational> = row_indices
                    .iter()
                    .map(|&i| col_indices.iter().map(|&j| f.matrix[i][j].clone()).collect())
                    .collect();
                let d = det_small(&Rationals, &sub);
                !d.is_zero() && &d == minor
            }
            Sigma2Certificate::RankOne { point, degenerate } => {
                let zero = point.vectors.iter().flatten().all(|x| x.is_zero());
                *degenerate == zero && self.reconstruct().as_ref() == Some(t)
            }
            _ => self.reconstruct().as_ref() == Some(t),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Sigma2Certificate::RankOne { point, degenerate } => json!({
                "kind": self.kind(),
                "degenerate": degenerate,
                "point": point_json(point),
            }),
            Sigma2Certificate::RankTwo { radicand, points } => json!({
                "kind": self.kind(),
                "radicand": radicand.as_ref().map(rational_to_json),
                "points": points.iter().map(|p| Value::Array(
                    p.vectors.iter().map(|v| Value::Array(v.iter().map(quad_to_json).collect())).collect()
                )).collect::<Vec<_>>(),
            }),
            Sigma2Certificate::Tangent { base, perturbation } => json!({
                "kind": self.kind(),
                "base": point_json(base),
                "perturbation": perturbation.iter().map(|v| Value::Array(v.iter().map(rational_to_json).collect())).collect::<Vec<_>>(),
            }),
            Sigma2Certificate::Witness {
                rows,
                row_indices,
                col_indices,
                minor,
            } => json!({
                "kind": self.kind(),
                "rows": rows.iter().map(|r| r + 1).collect::<Vec<_>>(),
                "row_indices": row_indices,
                "col_indices": col_indices,
                "minor": rational_to_json(minor),
            }),
        }
    }
}

// ---------------------------------------------------------------------------
// Generic tensor helpers

fn unravel(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for f in (0..dims.len()).rev() {
        out[f] = idx % dims[f];
        idx /= dims[f];
    }
    out
}

/// Replace factor `f` by its image under `m` (an `r × dims[f]` matrix).
fn mode_product<R: Ring>(ring: &R, t: &Tensor<R::Elem>, f: usize, m: &[Vec<R::Elem>]) -> Tensor<R::Elem> {
    let outer: usize = t.dims[..f].iter().product();
    let inner: usize = t.dims[f + 1..].iter().product();
    let (n, r) = (t.dims[f], m.len());
    let mut data = Vec::with_capacity(outer * r * inner);
    for o in 0..outer {
        for row in m {
            for i in 0..inner {
                let mut acc = ring.zero();
                for (j, c) in row.iter().enumerate().take(n) {
                    if !ring.is_zero(c) {
                        acc = ring.add(&acc, &ring.mul(c, &t.data[(o * n + j) * inner + i]));
                    }
                }
                data.push(acc);
            }
        }
    }
    let mut dims = t.dims.clone();
    dims[f] = r;
    Tensor { dims, data }
}

/// Factors of a rank-one tensor, or `None` if it is zero or not rank one.
fn rank_one_factors<F: Field>(field: &F, t: &Tensor<F::Elem>) -> Option<Vec<Vec<F::Elem>>> {
    let idx = t.data.iter().position(|x| !field.is_zero(x))?;
    let multi = unravel(idx, &t.dims);
    let st = strides(&t.dims);
    let pivot = t.data[idx].clone();
    let inv = field.inv(&pivot)?;
    let vectors: Vec<Vec<F::Elem>> = (0..t.order())
        .map(|f| {
            let base = idx - multi[f] * st[f];
            (0..t.dims[f])
                .map(|j| {
                    let x = &t.data[base + j * st[f]];
                    if f == 0 {
                        x.clone()
                    } else {
                        field.mul(x, &inv)
                    }
                })
                .collect()
        })
        .collect();
    let back = Tensor::rank_one(field, &RankOnePoint::new(vectors.clone()));
    (back.data == t.data).then_some(vectors)
}

fn lift<F: Field>(field: &F, t: &Tensor<BigRational>, embed: impl Fn(&BigRational) -> F::Elem) -> Tensor<F::Elem> {
    let _ = field;
    Tensor {
        dims: t.dims.clone(),
        data: t.data.iter().map(embed).collect(),
    }
}

fn find_witness(rows: &[usize], m: &Matrix<BigRational>) -> Option<Sigma2Certificate> {
    let q = Rationals;
    let mut basis = IncrementalBasis::new();
    let mut picked = Vec::new();
    for (i, row) in m.iter().enumerate() {
        if basis.insert(&q, row) {
            picked.push(i);
            if picked.len() == 3 {
                break;
            }
        }
    }
    if picked.len() < 3 {
        return None;
    }
    let sub: Matrix<BigRational> = picked.iter().map(|&i| m[i].clone()).collect();
    let cols = transpose(&sub);
    let mut cb = IncrementalBasis::new();
    let mut cpick = Vec::new();
    for (j, c) in cols.iter().enumerate() {
        if cb.insert(&q, c) {
            cpick.push(j);
            if cpick.len() == 3 {
                break;
            }
        }
    }
    let minor_m: Matrix<BigRational> = picked
        .iter()
        .map(|&i| cpick.iter().map(|&j| m[i][j].clone()).collect())
        .collect();
    Some(Sigma2Certificate::Witness {
        rows: rows.to_vec(),
        row_indices: picked,
        col_indices: cpick,
        minor: det_small(&q, &minor_m),
    })
}

/// Column-space basis `E` (`n × r`, stored as `r` columns) of the
/// single-factor flattening and a left inverse `P` (`r × n`).
fn image_basis(m: &Matrix<BigRational>) -> (Vec<Vec<BigRational>>, Matrix<BigRational>) {
    let q = Rationals;
    let mut work = m.clone();
    let pivots = rref(&q, &mut work);
    let cols: Vec<Vec<BigRational>> = pivots
        .iter()
        .map(|&c| m.iter().map(|row| row[c].clone()).collect())
        .collect();
    // rows of E that form an invertible square block
    let mut et = cols.clone();
    let row_pivots = rref(&q, &mut et);
    let block: Matrix<BigRational> = row_pivots
        .iter()
        .map(|&i| cols.iter().map(|c| c[i].clone()).collect())
        .collect();
    let inv = inverse(&q, &block).expect("pivot block is invertible");
    let n = m.len();
    let p: Matrix<BigRational> = inv
        .iter()
        .map(|row| {
            let mut full = vec![BigRational::zero(); n];
            for (&i, x) in row_pivots.iter().zip(row) {
                full[i] = x.clone();
            }
            full
        })
        .collect();
    (cols, p)
}

fn apply_basis(cols: &[Vec<BigRational>], v: &[BigRational]) -> Vec<BigRational> {
    let n = cols.first().map_or(0, |c| c.len());
    (0..n)
        .map(|i| {
            cols.iter()
                .zip(v)
                .fold(BigRational::zero(), |acc, (c, x)| acc + &c[i] * x)
        })
        .collect()
}

fn apply_basis_quad(cols: &[Vec<BigRational>], v: &[QuadElem]) -> Vec<QuadElem> {
    let n = cols.first().map_or(0, |c| c.len());
    (0..n)
        .map(|i| {
            let mut a = BigRational::zero();
            let mut b = BigRational::zero();
            for (c, x) in cols.iter().zip(v) {
                a += &c[i] * &x.a;
                b += &c[i] * &x.b;
            }
            QuadElem { a, b }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// The σ₂ test

enum Core {
    RankOne(Vec<Vec<BigRational>>),
    RankTwo(Option<BigRational>, Vec<Vec<Vec<QuadElem>>>),
    Tangent(Vec<Vec<BigRational>>, Vec<Vec<BigRational>>),
}

fn internal(msg: &str) -> Error {
    Error::Internal(format!("σ₂ construction: {msg}"))
}

/// Split `t` (factors `p < q` two-dimensional) as `Σ_ij E_ij ⊗ W_ij` and
/// return the 2×2 matrices spanning the `(p, q)` part together with the
/// rest-tensors multiplying them.
fn rest_dims(dims: &[usize], p: usize, q: usize) -> Vec<usize> {
    dims.iter()
        .enumerate()
        .filter(|&(i, _)| i != p && i != q)
        .map(|(_, &n)| n)
        .collect()
}

fn det2<R: Ring>(ring: &R, m: &[Vec<R::Elem>]) -> R::Elem {
    ring.sub(&ring.mul(&m[0][0], &m[1][1]), &ring.mul(&m[0][1], &m[1][0]))
}

fn mat2<R: Ring>(ring: &R, s: &R::Elem, m: &[Vec<R::Elem>], t: &R::Elem, n: &[Vec<R::Elem>]) -> Vec<Vec<R::Elem>> {
    (0..2)
        .map(|i| {
            (0..2)
                .map(|j| ring.add(&ring.mul(s, &m[i][j]), &ring.mul(t, &n[i][j])))
                .collect()
        })
        .collect()
}

/// `x ⊗ y` from a rank-one 2×2 matrix.
fn split_rank_one<F: Field>(field: &F, n: &[Vec<F::Elem>]) -> Option<(Vec<F::Elem>, Vec<F::Elem>)> {
    let r0 = (0..2).find(|&i| n[i].iter().any(|x| !field.is_zero(x)))?;
    let y = n[r0].clone();
    let c0 = (0..2).find(|&j| !field.is_zero(&y[j]))?;
    let inv = field.inv(&y[c0])?;
    let x: Vec<F::Elem> = (0..2).map(|i| field.mul(&n[i][c0], &inv)).collect();
    Some((x, y))
}

/// Insert the `(p, q)` vectors into a list of rest-factor vectors.
fn assemble<E: Clone>(p: usize, q: usize, x: Vec<E>, y: Vec<E>, rest: Vec<Vec<E>>) -> Vec<Vec<E>> {
    let k = rest.len() + 2;
    let mut rest = rest.into_iter();
    (0..k)
        .map(|i| {
            if i == p {
                x.clone()
            } else if i == q {
                y.clone()
            } else {
                rest.next().unwrap()
            }
        })
        .collect()
}

/// Rest-tensors `(w, w')` with `T = M ⊗ w + M' ⊗ w'`, read off from the
/// `(p, q)`-flattening `l` (rows indexed `2i + j`).
fn coefficients<F: Field>(
    field: &F,
    l: &Matrix<F::Elem>,
    m: &[Vec<F::Elem>],
    m2: &[Vec<F::Elem>],
    rdims: &[usize],
) -> Option<(Tensor<F::Elem>, Tensor<F::Elem>)> {
    let a: Matrix<F::Elem> = (0..4)
        .map(|r| vec![m[r / 2][r % 2].clone(), m2[r / 2][r % 2].clone()])
        .collect();
    let cols = l[0].len();
    let mut w = Vec::with_capacity(cols);
    let mut w2 = Vec::with_capacity(cols);
    for c in 0..cols {
        let b: Vec<F::Elem> = (0..4).map(|r| l[r][c].clone()).collect();
        let x = solve(field, &a, &b)?;
        w.push(x[0].clone());
        w2.push(x[1].clone());
    }
    Some((
        Tensor {
            dims: rdims.to_vec(),
            data: w,
        },
        Tensor {
            dims: rdims.to_vec(),
            data: w2,
        },
    ))
}

fn two_distinct_roots<F: Field>(
    field: &F,
    core: &Tensor<F::Elem>,
    p: usize,
    q: usize,
    m: &[Vec<F::Elem>],
    m2: &[Vec<F::Elem>],
    roots: [(F::Elem, F::Elem); 2],
) -> Result<Vec<Vec<Vec<F::Elem>>>> {
    let rdims = rest_dims(&core.dims, p, q);
    let l = core.flatten(&[p, q]);
    let (w, w2) = coefficients(field, &l, m, m2, &rdims).ok_or_else(|| internal("pencil coefficients"))?;
    let s: Matrix<F::Elem> = roots.iter().map(|(a, b)| vec![a.clone(), b.clone()]).collect();
    let u = inverse(field, &s).ok_or_else(|| internal("roots are not distinct"))?;
    let mut points = Vec::with_capacity(2);
    for i in 0..2 {
        let n = mat2(field, &roots[i].0, m, &roots[i].1, m2);
        let (x, y) = split_rank_one(field, &n).ok_or_else(|| internal("root matrix vanished"))?;
        // M = u00 N1 + u01 N2, M' = u10 N1 + u11 N2
        let z = Tensor {
            dims: rdims.clone(),
            data: w
                .data
                .iter()
                .zip(&w2.data)
                .map(|(a, b)| field.add(&field.mul(&u[0][i], a), &field.mul(&u[1][i], b)))
                .collect(),
        };
        let rest = rank_one_factors(field, &z).ok_or_else(|| internal("rest of a rank-two term is not rank one"))?;
        points.push(assemble(p, q, x, y, rest));
    }
    Ok(points)
}

fn tangent_branch(
    core: &Tensor<BigRational>,
    p: usize,
    q: usize,
    m: &[Vec<BigRational>],
    m2: &[Vec<BigRational>],
    root: (BigRational, BigRational),
) -> Result<Core> {
    let f = Rationals;
    let rdims = rest_dims(&core.dims, p, q);
    let n = mat2(&f, &root.0, m, &root.1, m2);
    let k = if root.1.is_zero() { m2 } else { m };
    let l = core.flatten(&[p, q]);
    let (wk, wn) = coefficients(&f, &l, k, &n, &rdims).ok_or_else(|| internal("tangent coefficients"))?;
    let (a, b) = split_rank_one(&f, &n).ok_or_else(|| internal("double root matrix vanished"))?;
    let complement = |v: &[BigRational]| -> Vec<BigRational> {
        if v[1].is_zero() {
            vec![BigRational::zero(), BigRational::one()]
        } else {
            vec![BigRational::one(), BigRational::zero()]
        }
    };
    let (abar, bbar) = (complement(&a), complement(&b));
    let pa = vec![vec![a[0].clone(), abar[0].clone()], vec![a[1].clone(), abar[1].clone()]];
    let pb = vec![vec![b[0].clone(), bbar[0].clone()], vec![b[1].clone(), bbar[1].clone()]];
    let pa_inv = inverse(&f, &pa).ok_or_else(|| internal("singular basis"))?;
    let pb_inv = inverse(&f, &pb).ok_or_else(|| internal("singular basis"))?;
    // C = Pa^{-1} K Pb^{-T}
    let c = crate::linalg::mat_mul(&f, &crate::linalg::mat_mul(&f, &pa_inv, k), &transpose(&pb_inv));
    if !c[1][1].is_zero() {
        return Err(internal("double root without a tangent shape"));
    }
    let a_prime: Vec<BigRational> = abar.iter().map(|x| x * &c[1][0]).collect();
    let b_prime: Vec<BigRational> = (0..2).map(|i| &b[i] * &c[0][0] + &bbar[i] * &c[0][1]).collect();
    let base_rest = rank_one_factors(&f, &wk).ok_or_else(|| internal("tangent base is not rank one"))?;
    // wn = Σ_j base with factor j replaced by an unknown vector
    let mut columns: Matrix<BigRational> = Vec::new();
    let mut owners = Vec::new();
    for (j, nj) in rdims.iter().enumerate() {
        for e in 0..*nj {
            let mut vs = base_rest.clone();
            vs[j] = (0..*nj)
                .map(|i| {
                    if i == e {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect();
            columns.push(Tensor::rank_one(&f, &RankOnePoint::new(vs)).data);
            owners.push((j, e));
        }
    }
    let sol = solve(&f, &transpose(&columns), &wn.data).ok_or_else(|| internal("rest is not a tangent vector"))?;
    let mut rest_pert: Vec<Vec<BigRational>> = rdims.iter().map(|&nj| vec![BigRational::zero(); nj]).collect();
    for ((j, e), x) in owners.into_iter().zip(sol) {
        rest_pert[j][e] = x;
    }
    Ok(Core::Tangent(
        assemble(p, q, a, b, base_rest),
        assemble(p, q, a_prime, b_prime, rest_pert),
    ))
}

fn decompose_core(core: &Tensor<BigRational>) -> Result<Core> {
    let f = Rationals;
    let active: Vec<usize> = (0..core.order()).filter(|&i| core.dims[i] == 2).collect();
    if active.len() < 2 {
        return rank_one_factors(&f, core)
            .map(Core::RankOne)
            .ok_or_else(|| internal("reduced tensor is not rank one"));
    }
    let (p, q) = (active[0], active[1]);
    let l = core.flatten(&[p, q]);
    let mut work = l.clone();
    let pivots = rref(&f, &mut work);
    let col = |c: usize| -> Vec<Vec<BigRational>> {
        (0..2)
            .map(|i| (0..2).map(|j| l[2 * i + j][c].clone()).collect())
            .collect()
    };
    match pivots.len() {
        1 => {
            // T = M ⊗ w with M of rank two: split M by rows
            let m = col(pivots[0]);
            let rdims = rest_dims(&core.dims, p, q);
            let zero = vec![vec![BigRational::zero(); 2]; 2];
            let (w, _) = coefficients(&f, &l, &m, &zero, &rdims).ok_or_else(|| internal("rank-one pencil"))?;
            let rest = rank_one_factors(&f, &w).ok_or_else(|| internal("rest is not rank one"))?;
            let q2 = QuadElem::rational;
            let points = (0..2)
                .filter(|&i| m[i].iter().any(|x| !x.is_zero()))
                .map(|i| {
                    let e: Vec<BigRational> = (0..2)
                        .map(|j| {
                            if i == j {
                                BigRational::one()
                            } else {
                                BigRational::zero()
                            }
                        })
                        .collect();
                    assemble(p, q, e, m[i].clone(), rest.clone())
                        .into_iter()
                        .map(|v| v.into_iter().map(q2).collect())
                        .collect()
                })
                .collect();
            Ok(Core::RankTwo(None, points))
        }
        2 => {
            let (m, m2) = (col(pivots[0]), col(pivots[1]));
            let alpha = det2(&f, &m);
            let gamma = det2(&f, &m2);
            let beta = det2(&f, &mat2(&f, &f.one(), &m, &f.one(), &m2)) - &alpha - &gamma;
            let disc = &beta * &beta - BigRational::from_integer(BigInt::from(4)) * &alpha * &gamma;
            if alpha.is_zero() && beta.is_zero() && gamma.is_zero() {
                return Err(internal("pencil of singular matrices"));
            }
            let two = BigRational::from_integer(BigInt::from(2));
            if disc.is_zero() {
                let root = if alpha.is_zero() {
                    (f.one(), f.zero())
                } else {
                    (-&beta / (&two * &alpha), f.one())
                };
                return tangent_branch(core, p, q, &m, &m2, root);
            }
            let rational_roots = |sq: BigRational| -> [(BigRational, BigRational); 2] {
                if alpha.is_zero() {
                    [(f.one(), f.zero()), (gamma.clone(), -&beta)]
                } else {
                    [
                        ((-&beta + &sq) / (&two * &alpha), f.one()),
                        ((-&beta - &sq) / (&two * &alpha), f.one()),
                    ]
                }
            };
            match rational_sqrt(&disc) {
                Some(sq) => {
                    let pts = two_distinct_roots(&f, core, p, q, &m, &m2, rational_roots(sq))?;
                    let pts = pts
                        .into_iter()
                        .map(|vs| {
                            vs.into_iter()
                                .map(|v| v.into_iter().map(QuadElem::rational).collect())
                                .collect()
                        })
                        .collect();
                    Ok(Core::RankTwo(None, pts))
                }
                None => {
                    // α ≠ 0 here, since α = 0 forces disc = β²
                    let k = QuadraticField::new(disc.clone()).expect("non-square radicand");
                    let lift_m = |x: &Vec<Vec<BigRational>>| -> Vec<Vec<QuadElem>> {
                        x.iter().map(|r| r.iter().map(|y| k.embed(y)).collect()).collect()
                    };
                    let denom = k.embed(&(&two * &alpha));
                    let inv = k.inv(&denom).expect("nonzero");
                    let mb = k.embed(&-&beta);
                    let roots = [
                        (k.mul(&k.add(&mb, &k.root()), &inv), k.one()),
                        (k.mul(&k.sub(&mb, &k.root()), &inv), k.one()),
                    ];
                    let core_k = lift(&k, core, |x| k.embed(x));
                    let pts = two_distinct_roots(&k, &core_k, p, q, &lift_m(&m), &lift_m(&m2), roots)?;
                    Ok(Core::RankTwo(Some(disc), pts))
                }
            }
        }
        _ => Err(internal("(p, q)-flattening of rank above two")),
    }
}

/// Decide membership of `t` in `σ₂` of the Segre product, with a
/// certificate either way.
pub fn gss_sigma2_test(t: &Tensor<BigRational>) -> Result<Sigma2Certificate> {
    let k = t.order();
    if k < 3 {
        return Err(Error::Argument(format!(
            "the σ₂ test needs at least three factors, got {k}"
        )));
    }
    let q = Rationals;
    if t.is_zero(&q) {
        return Ok(Sigma2Certificate::RankOne {
            point: RankOnePoint::new(t.dims.iter().map(|&n| vec![BigRational::zero(); n]).collect()),
            degenerate: true,
        });
    }
    for rows in bipartitions(k) {
        let m = t.flatten(&rows);
        if let Some(w) = find_witness(&rows, &m) {
            return Ok(w);
        }
    }
    let mut bases = Vec::with_capacity(k);
    let mut core = t.clone();
    for f in 0..k {
        let (cols, p) = image_basis(&t.flatten(&[f]));
        core = mode_product(&q, &core, f, &p);
        bases.push(cols);
    }
    let cert = match decompose_core(&core)? {
        Core::RankOne(vs) => Sigma2Certificate::RankOne {
            point: RankOnePoint::new(vs.iter().zip(&bases).map(|(v, e)| apply_basis(e, v)).collect()),
            degenerate: false,
        },
        Core::Tangent(base, pert) => Sigma2Certificate::Tangent {
            base: RankOnePoint::new(base.iter().zip(&bases).map(|(v, e)| apply_basis(e, v)).collect()),
            perturbation: pert.iter().zip(&bases).map(|(v, e)| apply_basis(e, v)).collect(),
        },
        Core::RankTwo(radicand, pts) => Sigma2Certificate::RankTwo {
            radicand,
            points: pts
                .iter()
                .map(|vs| RankOnePoint::new(vs.iter().zip(&bases).map(|(v, e)| apply_basis_quad(e, v)).collect()))
                .collect(),
        },
    };
    if !cert.verify(t) {
        return Err(internal("certificate does not reconstruct the input"));
    }
    Ok(cert)
}

// ---------------------------------------------------------------------------
// Span of flattening minors

fn subsets(n: usize, s: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, s: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == s {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < s - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, s, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, s, &mut Vec::new(), &mut out);
    out
}

fn signed_permutations(s: usize) -> Vec<(Vec<usize>, i64)> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..s).collect();
    fn heap(k: usize, p: &mut Vec<usize>, sign: &mut i64, out: &mut Vec<(Vec<usize>, i64)>) {
        if k <= 1 {
            out.push((p.clone(), *sign));
            return;
        }
        for i in 0..k - 1 {
            heap(k - 1, p, sign, out);
            if k.is_multiple_of(2) {
                p.swap(i, k - 1);
            } else {
                p.swap(0, k - 1);
            }
            *sign = -*sign;
        }
        heap(k - 1, p, sign, out);
    }
    let mut sign = 1;
    heap(s, &mut p, &mut sign, &mut out);
    out
}

/// Dimension of the span of all `(r+1) × (r+1)` minors of all flattenings,
/// as polynomials of degree `r + 1` on the tensor space.
pub fn minor_span_dimension(dims: &[usize], r: usize) -> Result<usize> {
    let n: usize = dims.iter().product();
    if dims.len() < 2 || dims.contains(&0) {
        return Err(Error::Argument(format!("bad dims {dims:?}")));
    }
    if n > MINOR_SPAN_GUARD {
        return Err(Error::Size(format!("ambient dimension {n} exceeds {MINOR_SPAN_GUARD}")));
    }
    let s = r + 1;
    let index = Tensor {
        dims: dims.to_vec(),
        data: (0..n).collect::<Vec<usize>>(),
    };
    let perms = signed_permutations(s);
    // minors grouped by the multiset of variables' row and column labels,
    // which fixes their torus weight
    let mut groups: HashMap<Vec<usize>, Vec<BTreeMap<Vec<usize>, i64>>> = HashMap::new();
    let mut count = 0usize;
    for rows in bipartitions(dims.len()) {
        let m = index.flatten(&rows);
        let (nr, nc) = (m.len(), m[0].len());
        if nr < s || nc < s {
            continue;
        }
        let rsets = subsets(nr, s);
        let csets = subsets(nc, s);
        count += rsets.len() * csets.len();
        if count > MINOR_COUNT_GUARD {
            return Err(Error::Size(format!("more than {MINOR_COUNT_GUARD} minors")));
        }
        for rs in &rsets {
            for cs in &csets {
                let mut poly: BTreeMap<Vec<usize>, i64> = BTreeMap::new();
                for (perm, sign) in &perms {
                    let mut mono: Vec<usize> = (0..s).map(|i| m[rs[i]][cs[perm[i]]]).collect();
                    mono.sort_unstable();
                    *poly.entry(mono).or_insert(0) += sign;
                }
                poly.retain(|_, c| *c != 0);
                let Some(first) = poly.keys().next() else {
                    continue;
                };
                let mut weight: Vec<usize> = Vec::new();
                for &v in first {
                    weight.extend(unravel(v, dims));
                }
                let mut w = vec![0usize; dims.iter().sum()];
                let offsets: Vec<usize> = dims
                    .iter()
                    .scan(0, |acc, &d| {
                        let o = *acc;
                        *acc += d;
                        Some(o)
                    })
                    .collect();
                for chunk in weight.chunks(dims.len()) {
                    for (f, &i) in chunk.iter().enumerate() {
                        w[offsets[f] + i] += 1;
                    }
                }
                groups.entry(w).or_default().push(poly);
            }
        }
    }
    let mut total = 0;
    let q = Rationals;
    for polys in groups.values() {
        let mut monos: BTreeMap<&Vec<usize>, usize> = BTreeMap::new();
        for p in polys {
            for m in p.keys() {
                let len = monos.len();
                monos.entry(m).or_insert(len);
            }
        }
        let rows: Matrix<BigRational> = polys
            .iter()
            .map(|p| {
                let mut row = vec![BigRational::zero(); monos.len()];
                for (m, c) in p {
                    row[monos[m]] = BigRational::from_integer(BigInt::from(*c));
                }
                row
            })
            .collect();
        total += rank(&q, &rows);
    }
    Ok(total)
}
