//! Exact evaluation of symmetrized minor-product forms.
//!
//! Every evaluation here is a sum, over some set of maps `φ: slots → args`,
//! of `F(args[φ(1)], …, args[φ(d)])`. Which maps are summed decides what is
//! computed:
//!
//! * bijections: the polarization `P(a_1, …, a_d)` of the symmetrized form
//! * maps with fibre sizes `m_1, …, m_r`: the multidegree-`m` component of
//!   `F(T, …, T)` at `T = Σ t_j`
//! * all maps: `F(T, …, T) = P(T) / d!`
//!
//! Each minor group is precomputed as a table over tuples of argument
//! indices, so the enumeration only multiplies table entries and prunes a
//! branch as soon as a completed minor is zero.

pub mod network;

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;

use crate::arith::{det_small, PrimeField, Ring};
use crate::error::{Error, Result};
use crate::forms::MinorProductForm;
use crate::linalg::rank;
use crate::tensor::RankOnePoint;

pub use network::{contract, Factor};

/// Largest degree summed over all `d!` permutations.
pub const MAX_NAIVE_DEGREE: usize = 9;
/// Largest per-group table built for enumeration.
const MAX_TABLE: usize = 1 << 22;

/// A multidegree `(m_1, …, m_r)` with `Σ m_j = d`.
pub type HomogeneityPattern = Vec<usize>;

/// All compositions of `d` into `r` nonnegative parts, lexicographically
/// decreasing.
pub fn compositions(d: usize, r: usize) -> Vec<HomogeneityPattern> {
    fn rec(rem: usize, slots: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            cur.push(rem);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for m in (0..=rem).rev() {
            cur.push(m);
            rec(rem - m, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if r > 0 {
        rec(d, r, &mut Vec::new(), &mut out);
    }
    out
}

fn check_points<E: Clone>(form: &MinorProductForm, pts: &[RankOnePoint<E>]) -> Result<()> {
    for p in pts {
        if p.vectors.len() != form.k() {
            return Err(Error::Argument(format!(
                "point has {} factors, form has {}",
                p.vectors.len(),
                form.k()
            )));
        }
        for (f, v) in p.vectors.iter().enumerate() {
            let need = form.factors()[f].iter().map(|g| g.size()).max().unwrap_or(0);
            if v.len() < need || v.len() != form.dims()[f] {
                return Err(Error::Argument(format!(
                    "factor {f}: vector of length {} for dimension {}",
                    v.len(),
                    form.dims()[f]
                )));
            }
        }
    }
    Ok(())
}

fn minor<R: Ring>(ring: &R, cov: &[usize], vecs: &[&Vec<R::Elem>]) -> R::Elem {
    let m: Vec<Vec<R::Elem>> = cov
        .iter()
        .map(|&i| vecs.iter().map(|v| v[i].clone()).collect())
        .collect();
    det_small(ring, &m)
}

/// `F(args[0], …, args[d-1])`: the product of all minors.
pub fn eval_raw<R: Ring>(ring: &R, form: &MinorProductForm, args: &[RankOnePoint<R::Elem>]) -> Result<R::Elem> {
    if args.len() != form.degree() {
        return Err(Error::Argument(format!(
            "{} arguments for a degree-{} form",
            args.len(),
            form.degree()
        )));
    }
    check_points(form, args)?;
    let mut acc = ring.one();
    for (f, g) in form.groups() {
        let vecs: Vec<&Vec<R::Elem>> = g.slots.iter().map(|&s| &args[s].vectors[f]).collect();
        acc = ring.mul(&acc, &minor(ring, &g.covectors, &vecs));
        if ring.is_zero(&acc) {
            break;
        }
    }
    Ok(acc)
}

#[derive(Clone, Copy, Debug)]
enum Mode<'a> {
    Bijection,
    Pattern(&'a [usize]),
    All,
}

struct Engine<'a, R: Ring> {
    ring: &'a R,
    d: usize,
    n: usize,
    group_slots: Vec<Vec<usize>>,
    tables: Vec<Vec<R::Elem>>,
    order: Vec<usize>,
    /// groups whose last slot (in `order`) is assigned at each depth
    completes: Vec<Vec<usize>>,
}

enum Sink<E> {
    Single(E),
    Buckets(HashMap<Vec<u8>, E>),
}

impl<'a, R: Ring> Engine<'a, R> {
    fn new(ring: &'a R, form: &MinorProductForm, pts: &[RankOnePoint<R::Elem>]) -> Result<Self> {
        check_points(form, pts)?;
        let n = pts.len();
        let d = form.degree();
        let mut group_slots = Vec::new();
        let mut tables = Vec::new();
        for (f, g) in form.groups() {
            let s = g.size();
            let size = n
                .checked_pow(s as u32)
                .filter(|&x| x <= MAX_TABLE)
                .ok_or_else(|| Error::Size(format!("minor table {n}^{s} too large")))?;
            let mut table = Vec::with_capacity(size);
            for code in 0..size {
                let vecs: Vec<&Vec<R::Elem>> = (0..s).map(|j| &pts[(code / n.pow(j as u32)) % n].vectors[f]).collect();
                table.push(minor(ring, &g.covectors, &vecs));
            }
            group_slots.push(g.slots.clone());
            tables.push(table);
        }
        let order = slot_order(d, &group_slots);
        let mut pos = vec![0; d];
        for (i, &s) in order.iter().enumerate() {
            pos[s] = i;
        }
        let mut completes = vec![Vec::new(); d];
        for (gi, slots) in group_slots.iter().enumerate() {
            let last = slots.iter().map(|&s| pos[s]).max().unwrap();
            completes[last].push(gi);
        }
        Ok(Self {
            ring,
            d,
            n,
            group_slots,
            tables,
            order,
            completes,
        })
    }

    fn index(&self, g: usize, assign: &[usize]) -> usize {
        self.group_slots[g]
            .iter()
            .rev()
            .fold(0, |acc, &s| acc * self.n + assign[s])
    }

    fn limits(&self, mode: Mode) -> Vec<usize> {
        match mode {
            Mode::Bijection => vec![1; self.n],
            Mode::Pattern(m) => m.to_vec(),
            Mode::All => vec![self.d; self.n],
        }
    }

    fn step(&self, depth: usize, assign: &[usize], acc: &R::Elem) -> R::Elem {
        let mut v = acc.clone();
        for &g in &self.completes[depth] {
            v = self.ring.mul(&v, &self.tables[g][self.index(g, assign)]);
            if self.ring.is_zero(&v) {
                break;
            }
        }
        v
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &self,
        depth: usize,
        assign: &mut [usize],
        counts: &mut [u8],
        limits: &[usize],
        acc: &R::Elem,
        sink: &mut Sink<R::Elem>,
    ) {
        if depth == self.d {
            match sink {
                Sink::Single(s) => *s = self.ring.add(s, acc),
                Sink::Buckets(b) => {
                    let e = b.entry(counts.to_vec()).or_insert_with(|| self.ring.zero());
                    *e = self.ring.add(e, acc);
                }
            }
            return;
        }
        let slot = self.order[depth];
        for p in 0..self.n {
            if counts[p] as usize == limits[p] {
                continue;
            }
            assign[slot] = p;
            let v = self.step(depth, assign, acc);
            if self.ring.is_zero(&v) {
                continue;
            }
            counts[p] += 1;
            self.dfs(depth + 1, assign, counts, limits, &v, sink);
            counts[p] -= 1;
        }
    }

    /// Prefix states at a fixed depth, used as parallel work items.
    fn prefixes(&self, limits: &[usize]) -> Vec<(usize, Vec<usize>, Vec<u8>, R::Elem)> {
        let mut frontier = vec![(0usize, vec![0usize; self.d], vec![0u8; self.n], self.ring.one())];
        let target = 4 * rayon::current_num_threads().max(1);
        while !frontier.is_empty()
            && frontier.len() < target
            && frontier.iter().all(|(dp, ..)| *dp < self.d.saturating_sub(2))
        {
            let mut next = Vec::new();
            for (depth, assign, counts, acc) in frontier {
                let slot = self.order[depth];
                for p in 0..self.n {
                    if counts[p] as usize == limits[p] {
                        continue;
                    }
                    let mut a = assign.clone();
                    a[slot] = p;
                    let v = self.step(depth, &a, &acc);
                    if self.ring.is_zero(&v) {
                        continue;
                    }
                    let mut c = counts.clone();
                    c[p] += 1;
                    next.push((depth + 1, a, c, v));
                }
            }
            frontier = next;
        }
        frontier
    }

    fn run(&self, mode: Mode, buckets: bool) -> Sink<R::Elem> {
        let limits = self.limits(mode);
        let fresh = || {
            if buckets {
                Sink::Buckets(HashMap::new())
            } else {
                Sink::Single(self.ring.zero())
            }
        };
        let work = self.prefixes(&limits);
        let partials: Vec<Sink<R::Elem>> = work
            .into_par_iter()
            .map(|(depth, mut assign, mut counts, acc)| {
                let mut sink = fresh();
                self.dfs(depth, &mut assign, &mut counts, &limits, &acc, &mut sink);
                sink
            })
            .collect();
        let mut total = fresh();
        for part in partials {
            match (&mut total, part) {
                (Sink::Single(t), Sink::Single(p)) => *t = self.ring.add(t, &p),
                (Sink::Buckets(t), Sink::Buckets(p)) => {
                    for (k, v) in p {
                        let e = t.entry(k).or_insert_with(|| self.ring.zero());
                        *e = self.ring.add(e, &v);
                    }
                }
                _ => unreachable!(),
            }
        }
        total
    }

    fn single(&self, mode: Mode) -> R::Elem {
        match self.run(mode, false) {
            Sink::Single(v) => v,
            Sink::Buckets(_) => unreachable!(),
        }
    }
}

/// Order slots so that minor groups complete as early as possible.
fn slot_order(d: usize, groups: &[Vec<usize>]) -> Vec<usize> {
    let mut placed = vec![false; d];
    let mut remaining: Vec<usize> = groups.iter().map(|g| g.len()).collect();
    let mut order = Vec::with_capacity(d);
    for _ in 0..d {
        let best = (0..d)
            .filter(|&s| !placed[s])
            .map(|s| {
                let mut completed = 0;
                let mut pending = 0;
                for (gi, g) in groups.iter().enumerate() {
                    if g.contains(&s) {
                        if remaining[gi] == 1 {
                            completed += 1;
                        }
                        pending += remaining[gi];
                    }
                }
                (s, completed, pending)
            })
            .max_by(|a, b| a.1.cmp(&b.1).then(b.2.cmp(&a.2)).then(b.0.cmp(&a.0)))
            .unwrap()
            .0;
        placed[best] = true;
        for (gi, g) in groups.iter().enumerate() {
            if g.contains(&best) {
                remaining[gi] -= 1;
            }
        }
        order.push(best);
    }
    order
}

/// `P(args) = Σ_{σ ∈ S_d} F(args[σ(1)], …, args[σ(d)])`.
pub fn eval_symmetrized<R: Ring>(ring: &R, form: &MinorProductForm, args: &[RankOnePoint<R::Elem>]) -> Result<R::Elem> {
    let d = form.degree();
    if d > MAX_NAIVE_DEGREE {
        return Err(Error::Size(format!(
            "symmetrizing over {d}! permutations is refused above degree {MAX_NAIVE_DEGREE}; use eval_at_sum"
        )));
    }
    if args.len() != d {
        return Err(Error::Argument(format!(
            "{} arguments for a degree-{d} form",
            args.len()
        )));
    }
    Ok(Engine::new(ring, form, args)?.single(Mode::Bijection))
}

/// Multidegree-`pattern` component of `F(T, …, T)`, `T = Σ points`.
pub fn eval_pattern<R: Ring>(
    ring: &R,
    form: &MinorProductForm,
    points: &[RankOnePoint<R::Elem>],
    pattern: &[usize],
) -> Result<R::Elem> {
    if pattern.len() != points.len() || pattern.iter().sum::<usize>() != form.degree() {
        return Err(Error::Argument(format!(
            "pattern {pattern:?} does not split degree {} over {} points",
            form.degree(),
            points.len()
        )));
    }
    Ok(Engine::new(ring, form, points)?.single(Mode::Pattern(pattern)))
}

/// Every multidegree component at once, keyed by pattern; patterns whose
/// component is zero may be absent.
pub fn eval_all_patterns<R: Ring>(
    ring: &R,
    form: &MinorProductForm,
    points: &[RankOnePoint<R::Elem>],
) -> Result<HashMap<HomogeneityPattern, R::Elem>> {
    match Engine::new(ring, form, points)?.run(Mode::All, true) {
        Sink::Buckets(b) => Ok(b
            .into_iter()
            .map(|(k, v)| (k.into_iter().map(|x| x as usize).collect(), v))
            .collect()),
        Sink::Single(_) => unreachable!(),
    }
}

/// `F(T, …, T)` by enumerating all `r^d` slot maps.
pub fn eval_at_sum_enumerate<R: Ring>(
    ring: &R,
    form: &MinorProductForm,
    points: &[RankOnePoint<R::Elem>],
) -> Result<R::Elem> {
    Ok(Engine::new(ring, form, points)?.single(Mode::All))
}

/// Default entry guard for intermediate tables of the network path:
/// `max(r^8, 2^20)`.
pub fn default_network_guard(r: usize) -> usize {
    r.saturating_pow(8).max(1 << 20)
}

/// `F(T, …, T)` at `T = Σ points`, by contracting the network whose
/// factors are the minor groups' value tables and whose variables are the
/// slots.
pub fn eval_at_sum<R: Ring>(ring: &R, form: &MinorProductForm, points: &[RankOnePoint<R::Elem>]) -> Result<R::Elem> {
    eval_at_sum_guarded(ring, form, points, default_network_guard(points.len()))
}

pub fn eval_at_sum_guarded<R: Ring>(
    ring: &R,
    form: &MinorProductForm,
    points: &[RankOnePoint<R::Elem>],
    max_entries: usize,
) -> Result<R::Elem> {
    let engine = Engine::new(ring, form, points)?;
    let factors = engine
        .group_slots
        .iter()
        .zip(engine.tables)
        .map(|(slots, table)| Factor {
            vars: slots.clone(),
            table,
        })
        .collect();
    contract(ring, factors, form.degree(), points.len(), max_entries)
}

/// Uniform random rank-one points over a prime field.
pub fn random_points_fp<Rn: Rng + ?Sized>(
    field: &PrimeField,
    dims: &[usize],
    count: usize,
    rng: &mut Rn,
) -> Vec<RankOnePoint<crate::arith::Fp>> {
    (0..count)
        .map(|_| {
            RankOnePoint::new(
                dims.iter()
                    .map(|&n| (0..n).map(|_| field.random(rng)).collect())
                    .collect(),
            )
        })
        .collect()
}

/// Rank-one points with integer entries in `[-bound, bound]`.
pub fn random_points_int<Rn: Rng + ?Sized>(
    dims: &[usize],
    count: usize,
    bound: i64,
    rng: &mut Rn,
) -> Vec<RankOnePoint<i64>> {
    (0..count)
        .map(|_| {
            RankOnePoint::new(
                dims.iter()
                    .map(|&n| (0..n).map(|_| rng.gen_range(-bound..=bound)).collect())
                    .collect(),
            )
        })
        .collect()
}

/// Rank of the matrix with rows = forms and columns = values of their
/// symmetrizations at `trial_count` random argument tuples.
pub fn linear_independence<Rn: Rng + ?Sized>(
    field: &PrimeField,
    forms: &[MinorProductForm],
    trial_count: usize,
    rng: &mut Rn,
) -> Result<usize> {
    let Some(first) = forms.first() else {
        return Ok(0);
    };
    if forms
        .iter()
        .any(|f| f.dims() != first.dims() || f.degree() != first.degree())
    {
        return Err(Error::Argument("forms differ in degree or dims".into()));
    }
    let mut columns = Vec::with_capacity(trial_count);
    for _ in 0..trial_count {
        let args = random_points_fp(field, first.dims(), first.degree(), rng);
        let col = forms
            .iter()
            .map(|f| eval_symmetrized(field, f, &args))
            .collect::<Result<Vec<_>>>()?;
        columns.push(col);
    }
    let rows: Vec<Vec<_>> = (0..forms.len())
        .map(|i| columns.iter().map(|c| c[i]).collect())
        .collect();
    Ok(rank(field, &rows))
}
