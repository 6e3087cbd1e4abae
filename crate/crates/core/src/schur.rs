//! Isotypic decomposition of `S^d(A_1 ⊗ … ⊗ A_k)`, dimension counts for
//! cubics vanishing on σ₂, and prolongation of quadric systems.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{Field, Rationals};
use crate::error::{Error, Result};
use crate::linalg::{kernel, IncrementalBasis};
use crate::poly::{binomial, eval_monomial, index_of, monomials, Exponent};
use crate::symgroup::{invariant_multiplicity, partitions_bounded, Partition};
use crate::tensor::strides;

pub const MAX_DECOMPOSE_DEGREE: usize = 12;
pub const PROLONGATION_GUARD: u128 = 1_000_000;
/// Dense constraint matrices beyond this many entries are refused.
const PROLONGATION_MATRIX_GUARD: u128 = 200_000_000;

/// `dim S_π(C^n)` by the hook-content formula.
pub fn gl_dimension(pi: &Partition, n: usize) -> u128 {
    if pi.len() > n {
        return 0;
    }
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for (i, row) in pi.hooks().iter().enumerate() {
        for (j, &h) in row.iter().enumerate() {
            num *= BigUint::from(n + j - i);
            den *= BigUint::from(h);
        }
    }
    (num / den).to_u128().expect("dimension fits in u128")
}

/// An isotypic component `S_{π_1}A_1 ⊗ … ⊗ S_{π_k}A_k` with its
/// multiplicity in `S^d`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModuleLabel {
    pub partitions: Vec<Partition>,
    pub multiplicity_in_sd: u64,
}

impl ModuleLabel {
    pub fn new(partitions: Vec<Partition>) -> Result<Self> {
        let m = invariant_multiplicity(&partitions)?;
        Ok(Self {
            partitions,
            multiplicity_in_sd: m,
        })
    }

    pub fn degree(&self) -> usize {
        self.partitions[0].size()
    }

    pub fn k(&self) -> usize {
        self.partitions.len()
    }

    /// `∏ dim S_{π_i}(C^{n_i})`, the dimension of one copy.
    pub fn copy_dimension(&self, dims: &[usize]) -> u128 {
        self.partitions
            .iter()
            .zip(dims)
            .map(|(p, &n)| gl_dimension(p, n))
            .product()
    }

    /// The `"321|321|3111"` form.
    pub fn key(&self) -> String {
        label_key(&self.partitions)
    }
}

pub fn label_key(parts: &[Partition]) -> String {
    parts.iter().map(|p| p.to_string()).collect::<Vec<_>>().join("|")
}

impl fmt::Display for ModuleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

impl fmt::Debug for ModuleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (x{})", self.key(), self.multiplicity_in_sd)
    }
}

impl FromStr for ModuleLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts = s.split('|').map(str::parse).collect::<Result<Vec<Partition>>>()?;
        if parts.len() < 2 {
            return Err(Error::Argument(format!("label {s:?} needs at least two factors")));
        }
        if parts.iter().any(|p| p.size() != parts[0].size()) {
            return Err(Error::Argument(format!("label {s:?} mixes degrees")));
        }
        ModuleLabel::new(parts)
    }
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.len() < 2 {
        return Err(Error::Argument("need at least two factors".into()));
    }
    if dims.contains(&0) {
        return Err(Error::Argument("factor dimension 0".into()));
    }
    Ok(())
}

/// All labels of `S^d(A_1 ⊗ … ⊗ A_k)` with positive multiplicity, in
/// lexicographic order of the partition tuples.
pub fn decompose_symmetric_power(d: usize, dims: &[usize]) -> Result<Vec<ModuleLabel>> {
    if !(1..=MAX_DECOMPOSE_DEGREE).contains(&d) {
        return Err(Error::Config(format!("degree {d} outside 1..={MAX_DECOMPOSE_DEGREE}")));
    }
    check_dims(dims)?;
    let per_factor: Vec<Vec<Partition>> = dims
        .iter()
        .map(|&n| partitions_bounded(d as u32, d as u32, n))
        .collect();
    let mut tuples: Vec<Vec<Partition>> = vec![Vec::new()];
    for ps in &per_factor {
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                ps.iter().map(move |p| {
                    let mut t = t.clone();
                    t.push(p.clone());
                    t
                })
            })
            .collect();
    }
    let labels: Vec<ModuleLabel> = tuples
        .into_par_iter()
        .map(ModuleLabel::new)
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|l| l.multiplicity_in_sd > 0)
        .collect();

    let total: u128 = labels
        .iter()
        .map(|l| l.multiplicity_in_sd as u128 * l.copy_dimension(dims))
        .sum();
    let n: usize = dims.iter().product();
    let expected = binomial((n + d - 1) as u64, d as u64);
    if total != expected {
        return Err(Error::Internal(format!(
            "S^{d} of dims {dims:?}: module dimensions sum to {total}, expected {expected}"
        )));
    }
    Ok(labels)
}

/// One summand of the cubic count: a factor assignment to `S_3`, `S_21`,
/// `S_111` with the multiplicity it contributes to `I_3(σ₂)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CubicFamily {
    pub label: String,
    pub multiplicity: u64,
    pub dimension: u128,
}

fn s21_multiplicity(j: u32) -> i64 {
    if j == 0 {
        return 0;
    }
    ((1i64 << (j - 1)) - if (j - 1).is_multiple_of(2) { 1 } else { -1 }) / 3
}

/// Families with nonzero contribution to `dim I_3(σ₂)`.
pub fn cubic_ideal_families(dims: &[usize]) -> Vec<CubicFamily> {
    let types = [
        Partition::row(3),
        Partition::new(vec![2, 1]).unwrap(),
        Partition::column(3),
    ];
    let k = dims.len();
    let mut out = Vec::new();
    for code in 0..3usize.pow(k as u32) {
        let assign: Vec<usize> = (0..k).map(|i| (code / 3usize.pow((k - 1 - i) as u32)) % 3).collect();
        let j = assign.iter().filter(|&&t| t == 1).count() as u32;
        let l = assign.iter().filter(|&&t| t == 2).count() as u32;
        let mult = if j > 1 && l > 0 {
            s21_multiplicity(j)
        } else if l == 0 && j > 1 {
            s21_multiplicity(j) - 1
        } else if j == 0 && l > 0 && l.is_multiple_of(2) {
            1
        } else {
            0
        };
        if mult <= 0 {
            continue;
        }
        let parts: Vec<Partition> = assign.iter().map(|&t| types[t].clone()).collect();
        let dim: u128 = parts.iter().zip(dims).map(|(p, &n)| gl_dimension(p, n)).product();
        if dim == 0 {
            continue;
        }
        out.push(CubicFamily {
            label: label_key(&parts),
            multiplicity: mult as u64,
            dimension: dim * mult as u128,
        });
    }
    out
}

/// `dim I_3(σ₂(Seg(P A_1 × … × P A_k)))`.
pub fn cubic_ideal_dimension(dims: &[usize]) -> u128 {
    cubic_ideal_families(dims).iter().map(|f| f.dimension).sum()
}

/// The closed-form 3-factor polynomial as printed (its last term is not
/// symmetric in `a, b, c`).
pub fn cubic_closed_form_printed(a: i64, b: i64, c: i64) -> BigRational {
    cubic_closed_form_3(a, b, c, false)
}

/// Same polynomial with the `a²b², a²c², b²c²` term symmetrized.
pub fn cubic_closed_form_symmetrized(a: i64, b: i64, c: i64) -> BigRational {
    cubic_closed_form_3(a, b, c, true)
}

fn cubic_closed_form_3(a: i64, b: i64, c: i64, symmetric: bool) -> BigRational {
    let (a, b, c) = (a as i128, b as i128, c as i128);
    let last = if symmetric {
        2 * (a * a * b * b + a * a * c * c + b * b * c * c)
    } else {
        2 * (a * a * b * b + 2 * a * a * c * c + 2 * b * b * c * c)
    };
    let inner = -6 * (a * b + a * c + b * c) - 8 * (a + b + c) + 16 + 27 * a * b * c
        - 5 * (a * a * b * b * c + a * a * b * c * c + a * b * b * c * c)
        - 3 * (a * a * b * c + a * b * b * c + a * b * c * c)
        + 5 * a * a * b * b * c * c
        + 2 * (a * a * b + a * a * c + a * b * b + a * c * c + b * b * c + b * c * c)
        + last;
    BigRational::new((a * b * c * inner).into(), 72.into())
}

/// The printed 4-factor cubic count.
pub fn cubic_closed_form_4(a: i64, b: i64, c: i64, d: i64) -> BigRational {
    let (a, b, c, d) = (a as i128, b as i128, c as i128, d as i128);
    let abcd = a * b * c * d;
    let mut s = 368
        - 72 * (a + b + c + d + a * b + a * c + a * d + b * c + b * d + c * d)
        - 8 * (a * a + b * b + c * c + d * d)
        - 54 * (a * b * c + a * b * d + a * c * d + b * c * d)
        + 8 * (a * a * b * b + a * a * c * c + b * b * c * c + a * a * d * d + b * b * d * d + c * c * d * d)
        + 567 * abcd;
    s += 18
        * (a * a * b * c
            + a * b * b * c
            + a * b * c * c
            + a * a * b * d
            + a * b * b * d
            + a * a * c * d
            + b * b * c * d
            + a * c * c * d
            + b * c * c * d
            + a * b * d * d
            + a * c * d * d
            + b * c * d * d);
    s += -27 * abcd * (a + b + c + d)
        + 18 * (a * a * b * b * c
            + a * a * b * c * c
            + a * b * b * c * c
            + b * b * c * c * d
            + a * a * b * b * d
            + a * a * c * c * d
            + b * b * c * d * d
            + a * a * b * d * d
            + a * b * b * d * d
            + a * a * c * d * d
            + a * c * c * d * d
            + b * c * c * d * d);
    s += 10 * (a * a * b * b * c * c + b * b * c * c * d * d + a * a * b * b * d * d + a * a * c * c * d * d)
        - 45 * abcd * (c * d + b * d + a * d + b * c + a * c + a * b)
        - 63 * abcd * (a * b * c + a * b * d + a * d * c + b * c * d)
        + 143 * abcd * abcd;
    BigRational::new((abcd * s).into(), 1296.into())
}

// ---------------------------------------------------------------------------
// Prolongation

/// A linear system of quadrics on `V = C^ambient_dim`; each basis element is
/// a coefficient vector against `monomials(ambient_dim, 2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadricSystem {
    pub ambient_dim: usize,
    pub basis: Vec<Vec<BigRational>>,
}

impl QuadricSystem {
    /// Builds the system from arbitrary spanning quadrics, keeping an
    /// independent subset.
    pub fn from_spanning(ambient_dim: usize, quadrics: Vec<Vec<BigRational>>) -> Self {
        let mut ech = IncrementalBasis::new();
        let basis = quadrics.into_iter().filter(|q| ech.insert(&Rationals, q)).collect();
        Self { ambient_dim, basis }
    }

    /// All of `S²V*`.
    pub fn full(ambient_dim: usize) -> Self {
        let n = monomials(ambient_dim, 2).len();
        let basis = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            BigRational::one()
                        } else {
                            BigRational::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        Self { ambient_dim, basis }
    }

    /// The 2×2 minors of the single-factor flattenings of
    /// `A_1 ⊗ … ⊗ A_k`, pruned to a basis of `I_2` of the Segre variety.
    pub fn segre(dims: &[usize]) -> Self {
        let n: usize = dims.iter().product();
        let monos = monomials(n, 2);
        let idx = index_of(&monos);
        let st = strides(dims);
        let mut quadrics = Vec::new();
        let quad = |i: usize, j: usize| {
            let mut e = vec![0u16; n];
            e[i] += 1;
            e[j] += 1;
            idx[&e]
        };
        for f in 0..dims.len() {
            let others = n / dims[f];
            // column multi-index of the flattening A_f ⊗ (rest)
            let col_offsets: Vec<usize> = (0..n).filter(|x| (x / st[f]).is_multiple_of(dims[f])).collect();
            debug_assert_eq!(col_offsets.len(), others);
            for r1 in 0..dims[f] {
                for r2 in r1 + 1..dims[f] {
                    for c1 in 0..others {
                        for c2 in c1 + 1..others {
                            let x = |r: usize, c: usize| col_offsets[c] + r * st[f];
                            let mut v = vec![BigRational::zero(); monos.len()];
                            v[quad(x(r1, c1), x(r2, c2))] += BigRational::one();
                            v[quad(x(r1, c2), x(r2, c1))] -= BigRational::one();
                            quadrics.push(v);
                        }
                    }
                }
            }
        }
        Self::from_spanning(n, quadrics)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// `(μ+β)!/μ!` as a field element.
fn falling_ratio<F: Field>(field: &F, mu: &[u16], beta: &[u16]) -> F::Elem {
    let mut acc = field.one();
    for (&m, &b) in mu.iter().zip(beta) {
        for t in 1..=b as i64 {
            acc = field.mul(&acc, &field.from_i64(m as i64 + t));
        }
    }
    acc
}

/// Basis (coefficient vectors against `monomials(n, k + 2)`) of
/// `A^{(k)} = (A ⊗ S^k V*) ∩ S^{k+2} V*`, computed over `field`.
pub fn prolongation<F: Field>(
    field: &F,
    system: &QuadricSystem,
    k: usize,
    to_field: impl Fn(&BigRational) -> F::Elem,
) -> Result<Vec<Vec<F::Elem>>> {
    let n = system.ambient_dim;
    let target = binomial((n + k + 1) as u64, (k + 2) as u64);
    if target > PROLONGATION_GUARD {
        return Err(Error::Size(format!(
            "dim S^{} of a {n}-dimensional space is {target} > {PROLONGATION_GUARD}",
            k + 2
        )));
    }
    let quad_monos = monomials(n, 2);
    let a_rows: Vec<Vec<F::Elem>> = system.basis.iter().map(|q| q.iter().map(&to_field).collect()).collect();
    // annihilator of A under the coefficient pairing
    let annihilator = kernel(field, &a_rows, quad_monos.len());
    let betas = monomials(n, k);
    let rows = betas.len() as u128 * annihilator.len() as u128;
    if rows * target > PROLONGATION_MATRIX_GUARD {
        return Err(Error::Size(format!(
            "prolongation constraint matrix {rows} x {target} too large"
        )));
    }
    let top = monomials(n, k + 2);
    let top_idx = index_of(&top);
    let mut constraints = Vec::with_capacity(rows as usize);
    for beta in &betas {
        for w in &annihilator {
            let mut row = vec![field.zero(); top.len()];
            for (nu, wv) in quad_monos.iter().zip(w) {
                if field.is_zero(wv) {
                    continue;
                }
                let mu: Exponent = nu.iter().zip(beta).map(|(a, b)| a + b).collect();
                let c = field.mul(wv, &falling_ratio(field, nu, beta));
                let j = top_idx[&mu];
                row[j] = field.add(&row[j], &c);
            }
            constraints.push(row);
        }
    }
    if constraints.is_empty() {
        // A is everything: every form qualifies
        return Ok((0..top.len())
            .map(|i| {
                (0..top.len())
                    .map(|j| if i == j { field.one() } else { field.zero() })
                    .collect()
            })
            .collect());
    }
    Ok(kernel(field, &constraints, top.len()))
}

/// Checks that every form (coefficients against `monomials(n, deg)`)
/// vanishes at `samples` points drawn from `sampler`. Returns the number of
/// (form, point) pairs that failed.
pub fn count_nonvanishing<F: Field>(
    field: &F,
    forms: &[Vec<F::Elem>],
    n: usize,
    deg: usize,
    samples: usize,
    mut sampler: impl FnMut() -> Vec<F::Elem>,
) -> usize {
    let monos = monomials(n, deg);
    let mut failures = 0;
    for _ in 0..samples {
        let x = sampler();
        let values: Vec<F::Elem> = monos.iter().map(|m| eval_monomial(field, m, &x)).collect();
        for f in forms {
            let v = f
                .iter()
                .zip(&values)
                .fold(field.zero(), |acc, (c, m)| field.add(&acc, &field.mul(c, m)));
            if !field.is_zero(&v) {
                failures += 1;
            }
        }
    }
    failures
}

/// Sum of `multiplicity · copy dimension` for a set of labels.
pub fn total_dimension(labels: &[(ModuleLabel, u64)], dims: &[usize]) -> u128 {
    labels.iter().map(|(l, m)| *m as u128 * l.copy_dimension(dims)).sum()
}

/// Labels grouped by multiplicity, handy for reports.
pub fn multiplicity_histogram(labels: &[ModuleLabel]) -> HashMap<u64, usize> {
    let mut h = HashMap::new();
    for l in labels {
        *h.entry(l.multiplicity_in_sd).or_insert(0) += 1;
    }
    h
}
