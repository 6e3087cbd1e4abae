//! Monomial bases of `S^d V*` and sparse polynomials on tensor spaces.

use std::collections::{BTreeMap, HashMap};

use crate::arith::Ring;
use crate::tensor::strides;

pub type Exponent = Vec<u16>;

/// Monomials of degree `deg` in `n` variables, graded-lex order
/// (`x_0^deg` first).
pub fn monomials(n: usize, deg: usize) -> Vec<Exponent> {
    fn rec(i: usize, rem: usize, cur: &mut Exponent, out: &mut Vec<Exponent>) {
        if i + 1 == cur.len() {
            cur[i] = rem as u16;
            out.push(cur.clone());
            cur[i] = 0;
            return;
        }
        for e in (0..=rem).rev() {
            cur[i] = e as u16;
            rec(i + 1, rem - e, cur, out);
        }
        cur[i] = 0;
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    rec(0, deg, &mut vec![0; n], &mut out);
    out
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

pub fn index_of(monos: &[Exponent]) -> HashMap<Exponent, usize> {
    monos.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect()
}

pub fn eval_monomial<R: Ring>(ring: &R, exps: &[u16], x: &[R::Elem]) -> R::Elem {
    let mut acc = ring.one();
    for (e, xi) in exps.iter().zip(x) {
        for _ in 0..*e {
            acc = ring.mul(&acc, xi);
        }
    }
    acc
}

/// Sparse polynomial with coefficients in some ring.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<E> {
    pub terms: BTreeMap<Exponent, E>,
}

impl<E: Clone> Poly<E> {
    pub fn new() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn add_term<R: Ring<Elem = E>>(&mut self, ring: &R, exps: Exponent, c: E) {
        let entry = self.terms.entry(exps).or_insert_with(|| ring.zero());
        *entry = ring.add(entry, &c);
    }

    pub fn prune<R: Ring<Elem = E>>(&mut self, ring: &R) {
        self.terms.retain(|_, c| !ring.is_zero(c));
    }

    pub fn eval<R: Ring<Elem = E>>(&self, ring: &R, x: &[E]) -> E {
        self.terms.iter().fold(ring.zero(), |acc, (m, c)| {
            ring.add(&acc, &ring.mul(c, &eval_monomial(ring, m, x)))
        })
    }

    /// Dense coefficient vector against a monomial index.
    pub fn to_dense<R: Ring<Elem = E>>(&self, ring: &R, index: &HashMap<Exponent, usize>) -> Vec<E> {
        let mut v = vec![ring.zero(); index.len()];
        for (m, c) in &self.terms {
            v[index[m]] = c.clone();
        }
        v
    }
}

impl<E: Clone> Default for Poly<E> {
    fn default() -> Self {
        Self::new()
    }
}

/// Torus weight of a monomial in the coordinates of `A_1 ⊗ … ⊗ A_k`: for
/// each factor, how often each basis index occurs.
pub fn tensor_weight(dims: &[usize], exps: &[u16]) -> Vec<u16> {
    let st = strides(dims);
    let mut w = vec![0u16; dims.iter().sum()];
    for (flat, &e) in exps.iter().enumerate() {
        if e == 0 {
            continue;
        }
        let mut off = 0;
        for (f, &n) in dims.iter().enumerate() {
            let i = (flat / st[f]) % n;
            w[off + i] += e;
            off += n;
        }
    }
    w
}

/// Group monomial indices by torus weight; groups in first-seen order.
pub fn weight_classes(dims: &[usize], monos: &[Exponent]) -> Vec<Vec<usize>> {
    let mut order: Vec<Vec<u16>> = Vec::new();
    let mut map: HashMap<Vec<u16>, Vec<usize>> = HashMap::new();
    for (i, m) in monos.iter().enumerate() {
        let w = tensor_weight(dims, m);
        map.entry(w.clone())
            .or_insert_with(|| {
                order.push(w.clone());
                Vec::new()
            })
            .push(i);
    }
    order.into_iter().map(|w| map.remove(&w).unwrap()).collect()
}
