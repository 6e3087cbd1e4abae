//! Dense tensors, rank-one points and their JSON encoding.
//!
//! Storage is row-major: the last factor's index varies fastest. On disk a
//! tensor is a nested JSON array of depth `k`; entries are integers or
//! rational strings such as `"-3/4"`.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::arith::Ring;
use crate::error::{Error, Result};

/// A point of the cone over the Segre variety: one vector per factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankOnePoint<E> {
    pub vectors: Vec<Vec<E>>,
}

impl<E: Clone> RankOnePoint<E> {
    pub fn new(vectors: Vec<Vec<E>>) -> Self {
        Self { vectors }
    }

    pub fn dims(&self) -> Vec<usize> {
        self.vectors.iter().map(|v| v.len()).collect()
    }

    pub fn map<F, G>(&self, f: F) -> RankOnePoint<G>
    where
        F: Fn(&E) -> G,
    {
        RankOnePoint {
            vectors: self.vectors.iter().map(|v| v.iter().map(&f).collect()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<E> {
    pub dims: Vec<usize>,
    pub data: Vec<E>,
}

impl<E: Clone> Tensor<E> {
    pub fn zeros<R: Ring<Elem = E>>(ring: &R, dims: &[usize]) -> Self {
        Self {
            dims: dims.to_vec(),
            data: vec![ring.zero(); dims.iter().product()],
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn strides(&self) -> Vec<usize> {
        strides(&self.dims)
    }

    pub fn index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(self.strides()).map(|(i, s)| i * s).sum()
    }

    pub fn get(&self, multi: &[usize]) -> &E {
        &self.data[self.index(multi)]
    }

    pub fn rank_one<R: Ring<Elem = E>>(ring: &R, point: &RankOnePoint<E>) -> Self {
        let mut data = vec![ring.one()];
        for v in &point.vectors {
            let mut next = Vec::with_capacity(data.len() * v.len());
            for x in &data {
                for y in v {
                    next.push(ring.mul(x, y));
                }
            }
            data = next;
        }
        Self {
            dims: point.dims(),
            data,
        }
    }

    pub fn sum_of<R: Ring<Elem = E>>(ring: &R, dims: &[usize], points: &[RankOnePoint<E>]) -> Self {
        let mut t = Self::zeros(ring, dims);
        for p in points {
            t.add_assign(ring, &Self::rank_one(ring, p));
        }
        t
    }

    pub fn add_assign<R: Ring<Elem = E>>(&mut self, ring: &R, other: &Self) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a = ring.add(a, b);
        }
    }

    pub fn is_zero<R: Ring<Elem = E>>(&self, ring: &R) -> bool {
        self.data.iter().all(|x| ring.is_zero(x))
    }

    /// Matricization with the factors in `rows` as row index (in increasing
    /// factor order) and the rest as column index.
    pub fn flatten(&self, rows: &[usize]) -> Vec<Vec<E>> {
        let k = self.order();
        let cols: Vec<usize> = (0..k).filter(|i| !rows.contains(i)).collect();
        let mut rows_sorted = rows.to_vec();
        rows_sorted.sort_unstable();
        let rdims: Vec<usize> = rows_sorted.iter().map(|&i| self.dims[i]).collect();
        let cdims: Vec<usize> = cols.iter().map(|&i| self.dims[i]).collect();
        let nr: usize = rdims.iter().product();
        let nc: usize = cdims.iter().product();
        let st = self.strides();
        let rs = strides(&rdims);
        let cs = strides(&cdims);
        let mut out = Vec::with_capacity(nr);
        for r in 0..nr {
            let roff: usize = rows_sorted
                .iter()
                .enumerate()
                .map(|(j, &f)| (r / rs[j]) % rdims[j] * st[f])
                .sum();
            let row = (0..nc)
                .map(|c| {
                    let coff: usize = cols
                        .iter()
                        .enumerate()
                        .map(|(j, &f)| (c / cs[j]) % cdims[j] * st[f])
                        .sum();
                    self.data[roff + coff].clone()
                })
                .collect();
            out.push(row);
        }
        out
    }
}

pub fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Parse `"3"`, `"-3/4"` or a JSON number into a rational.
pub fn parse_rational(v: &Value) -> Result<BigRational> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigRational::from_integer(BigInt::from(i)))
            } else {
                Err(Error::Argument(format!("non-integer number {n}; use a \"p/q\" string")))
            }
        }
        Value::String(s) => {
            let s = s.trim();
            let bad = || Error::Argument(format!("cannot parse rational {s:?}"));
            if let Some((n, d)) = s.split_once('/') {
                let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                if d == BigInt::from(0) {
                    return Err(bad());
                }
                Ok(BigRational::new(n, d))
            } else {
                Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?))
            }
        }
        other => Err(Error::Argument(format!("unexpected tensor entry {other}"))),
    }
}

pub fn rational_to_json(q: &BigRational) -> Value {
    if q.is_integer() {
        let n = q.numer();
        match i64::try_from(n) {
            Ok(i) => Value::from(i),
            Err(_) => Value::String(n.to_string()),
        }
    } else {
        Value::String(format!("{}/{}", q.numer(), q.denom()))
    }
}

/// Read a nested-array tensor. A `{"tensor": [...]}` wrapper is accepted.
pub fn tensor_from_json(v: &Value) -> Result<Tensor<BigRational>> {
    let v = match v {
        Value::Object(m) => m
            .get("tensor")
            .ok_or_else(|| Error::Argument("object without \"tensor\" key".into()))?,
        other => other,
    };
    let mut dims = Vec::new();
    let mut cur = v;
    while let Value::Array(a) = cur {
        if a.is_empty() {
            return Err(Error::Argument("empty array in tensor".into()));
        }
        dims.push(a.len());
        cur = &a[0];
    }
    if dims.is_empty() {
        return Err(Error::Argument("tensor must be a nested array".into()));
    }
    let mut data = Vec::with_capacity(dims.iter().product());
    fn walk(v: &Value, depth: usize, dims: &[usize], out: &mut Vec<BigRational>) -> Result<()> {
        if depth == dims.len() {
            out.push(parse_rational(v)?);
            return Ok(());
        }
        match v {
            Value::Array(a) if a.len() == dims[depth] => {
                for x in a {
                    walk(x, depth + 1, dims, out)?;
                }
                Ok(())
            }
            _ => Err(Error::Argument(format!("ragged tensor at depth {depth}"))),
        }
    }
    walk(v, 0, &dims, &mut data)?;
    Ok(Tensor { dims, data })
}

pub fn tensor_to_json(t: &Tensor<BigRational>) -> Value {
    fn build(t: &Tensor<BigRational>, depth: usize, offset: usize, st: &[usize]) -> Value {
        if depth == t.dims.len() {
            return rational_to_json(&t.data[offset]);
        }
        Value::Array(
            (0..t.dims[depth])
                .map(|i| build(t, depth + 1, offset + i * st[depth], st))
                .collect(),
        )
    }
    build(t, 0, 0, &t.strides())
}
