//! Sum-product contraction of a factor network by variable elimination.
//!
//! All variables share one domain `0..domain`. A factor's table is indexed
//! by `Σ x_{vars[i]} · domain^i`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::arith::Ring;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Factor<E> {
    pub vars: Vec<usize>,
    pub table: Vec<E>,
}

#[derive(Clone, Debug)]
pub struct EliminationPlan {
    pub order: Vec<usize>,
    /// Largest number of variables of any intermediate table.
    pub width: usize,
}

const ORDER_RESTARTS: usize = 256;

fn simulate(scopes: &[Vec<usize>], order: &[usize]) -> usize {
    let mut scopes: Vec<Vec<usize>> = scopes.to_vec();
    let mut width = 0;
    for &v in order {
        let (inv, rest): (Vec<_>, Vec<_>) = scopes.into_iter().partition(|s| s.contains(&v));
        let mut u: Vec<usize> = inv.into_iter().flatten().filter(|&x| x != v).collect();
        u.sort_unstable();
        u.dedup();
        width = width.max(u.len());
        scopes = rest;
        scopes.push(u);
    }
    width
}

fn greedy_order(scopes: &[Vec<usize>], nvars: usize) -> Vec<usize> {
    let mut scopes: Vec<Vec<usize>> = scopes.to_vec();
    let mut remaining: Vec<usize> = (0..nvars).collect();
    let mut order = Vec::with_capacity(nvars);
    while !remaining.is_empty() {
        let (pos, _) = remaining
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let mut u: Vec<usize> = scopes
                    .iter()
                    .filter(|s| s.contains(&v))
                    .flatten()
                    .copied()
                    .filter(|&x| x != v)
                    .collect();
                u.sort_unstable();
                u.dedup();
                (i, u.len())
            })
            .min_by_key(|&(i, w)| (w, remaining[i]))
            .unwrap();
        let v = remaining.remove(pos);
        let (inv, rest): (Vec<_>, Vec<_>) = scopes.into_iter().partition(|s| s.contains(&v));
        let mut u: Vec<usize> = inv.into_iter().flatten().filter(|&x| x != v).collect();
        u.sort_unstable();
        u.dedup();
        scopes = rest;
        scopes.push(u);
        order.push(v);
    }
    order
}

/// Greedy min-degree order, improved by a fixed number of seeded random
/// restarts; deterministic.
pub fn plan(scopes: &[Vec<usize>], nvars: usize) -> EliminationPlan {
    let order = greedy_order(scopes, nvars);
    let mut best = EliminationPlan {
        width: simulate(scopes, &order),
        order,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut cand: Vec<usize> = (0..nvars).collect();
    for _ in 0..ORDER_RESTARTS {
        cand.shuffle(&mut rng);
        let w = simulate(scopes, &cand);
        if w < best.width {
            best = EliminationPlan {
                order: cand.clone(),
                width: w,
            };
        }
    }
    best
}

/// `Σ_x ∏_f f(x)` over all assignments of `nvars` variables.
pub fn contract<R: Ring>(
    ring: &R,
    mut factors: Vec<Factor<R::Elem>>,
    nvars: usize,
    domain: usize,
    max_entries: usize,
) -> Result<R::Elem> {
    let scopes: Vec<Vec<usize>> = factors.iter().map(|f| f.vars.clone()).collect();
    let plan = plan(&scopes, nvars);
    let entries = (domain as f64).powi(plan.width as i32);
    if entries > max_entries as f64 {
        return Err(Error::Size(format!(
            "best elimination order found has width {} ({} entries > guard {})",
            plan.width, entries, max_entries
        )));
    }
    for &v in &plan.order {
        let (inv, rest): (Vec<_>, Vec<_>) = factors.into_iter().partition(|f| f.vars.contains(&v));
        factors = rest;
        if inv.is_empty() {
            // unconstrained variable contributes a factor `domain`
            factors.push(Factor {
                vars: vec![],
                table: vec![ring.from_i64(domain as i64)],
            });
            continue;
        }
        factors.push(eliminate(ring, &inv, v, domain));
    }
    Ok(factors.iter().fold(ring.one(), |acc, f| ring.mul(&acc, &f.table[0])))
}

fn eliminate<R: Ring>(ring: &R, inv: &[Factor<R::Elem>], v: usize, domain: usize) -> Factor<R::Elem> {
    let mut u: Vec<usize> = inv
        .iter()
        .flat_map(|f| f.vars.iter().copied())
        .filter(|&x| x != v)
        .collect();
    u.sort_unstable();
    u.dedup();
    // for each factor: stride of v, and stride contributed by each position of u
    let strides: Vec<(usize, Vec<usize>)> = inv
        .iter()
        .map(|f| {
            let pos_stride = |var: usize| {
                f.vars
                    .iter()
                    .position(|&x| x == var)
                    .map_or(0, |p| domain.pow(p as u32))
            };
            (pos_stride(v), u.iter().map(|&x| pos_stride(x)).collect())
        })
        .collect();
    let size = domain.pow(u.len() as u32);
    let mut table = Vec::with_capacity(size);
    let mut digits = vec![0usize; u.len()];
    let mut base: Vec<usize> = vec![0; inv.len()];
    for _ in 0..size {
        let mut sum = ring.zero();
        for xv in 0..domain {
            let mut prod = ring.one();
            for (fi, f) in inv.iter().enumerate() {
                let idx = base[fi] + xv * strides[fi].0;
                prod = ring.mul(&prod, &f.table[idx]);
                if ring.is_zero(&prod) {
                    break;
                }
            }
            sum = ring.add(&sum, &prod);
        }
        table.push(sum);
        // increment mixed-radix counter over u (first variable fastest)
        for (p, dgt) in digits.iter_mut().enumerate() {
            *dgt += 1;
            for (fi, s) in strides.iter().enumerate() {
                base[fi] += s.1[p];
            }
            if *dgt < domain {
                break;
            }
            *dgt = 0;
            for (fi, s) in strides.iter().enumerate() {
                base[fi] -= s.1[p] * domain;
            }
        }
    }
    Factor { vars: u, table }
}
