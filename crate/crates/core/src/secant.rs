//! Secant varieties of Segre products: sampling, the Terracini probe, and the
//! module-by-module scan of `I_d(σ_r)`.
//!
//! A module `S_{π_1}A_1 ⊗ … ⊗ S_{π_k}A_k` of multiplicity `m` in `S^d` is
//! tested by building `m` independent highest weight vectors, evaluating
//! them on random points of `σ_r` split by homogeneity pattern, and reading
//! off the kernel of the resulting matrix. Kernel vectors are lifted to
//! small rationals and re-checked on fresh samples modulo every prime.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{default_primes, det, Fp, Integers, PrimeField, Ring};
use crate::error::{Error, Result};
use crate::eval::{
    eval_all_patterns, eval_at_sum, eval_symmetrized, random_points_fp, random_points_int, MAX_NAIVE_DEGREE,
};
use crate::forms::{build_form, catalog, MinorProductForm, CATALOG_NAMES};
use crate::linalg::{left_kernel, rank, IncrementalBasis, Matrix};
use crate::poly::{binomial, eval_monomial, monomials, weight_classes};
use crate::schur::{decompose_symmetric_power, label_key, ModuleLabel};
use crate::symgroup::Partition;
use crate::tensor::{RankOnePoint, Tensor};

/// Entries of [`sample_secant_point`] lie in `[-SAMPLE_BOUND, SAMPLE_BOUND]`.
pub const SAMPLE_BOUND: i64 = 1 << 20;
pub const TERRACINI_GUARD: usize = 10_000;
/// τ-search trials allowed per copy of the module.
pub const TAU_BUDGET_PER_COPY: usize = 50;
pub const MIN_POINT_SETS: usize = 3;
pub const FRESH_POINT_SETS: usize = 3;
/// Columns beyond the number of forms required before a rank is trusted.
pub const COLUMN_MARGIN: usize = 4;
pub const ORACLE_MAX_MULTIPLICITY: u64 = 12;
pub const MONOMIAL_GUARD: u128 = 50_000;
/// Degrees at or below this get an exact integer re-check of kernel vectors.
pub const EXACT_CHECK_DEGREE: usize = 6;
const PATTERN_ENUMERATION_LIMIT: f64 = (1u64 << 24) as f64;
const ORACLE_SALT: u64 = 0x6f72_6163_6c65;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecantSpec {
    pub dims: Vec<usize>,
    pub r: usize,
    pub seed: u64,
}

impl SecantSpec {
    pub fn new(dims: Vec<usize>, r: usize, seed: u64) -> Result<Self> {
        if r == 0 {
            return Err(Error::Argument("r must be at least 1".into()));
        }
        if dims.len() < 2 {
            return Err(Error::Argument("need at least two factors".into()));
        }
        if dims.iter().any(|&n| n < 2) {
            return Err(Error::Argument(format!(
                "factor dimensions {dims:?} must all be at least 2"
            )));
        }
        Ok(Self { dims, r, seed })
    }

    pub fn k(&self) -> usize {
        self.dims.len()
    }
}

/// `r` random rank-one points; their sum is a point of `σ_r`.
pub fn sample_secant_point(spec: &SecantSpec) -> Vec<RankOnePoint<i64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    random_points_int(&spec.dims, spec.r, SAMPLE_BOUND, &mut rng)
}

fn unit(field: &PrimeField, n: usize, i: usize) -> Vec<Fp> {
    (0..n)
        .map(|j| if i == j { field.one() } else { field.zero() })
        .collect()
}

/// Dimension of the affine cone over `σ_r`, as the rank of the span of the
/// tangent spaces `A_1 ⊗ a_2 ⊗ … + … + a_1 ⊗ … ⊗ A_k` at `r` random points.
pub fn terracini_dimension(spec: &SecantSpec) -> Result<usize> {
    let n: usize = spec.dims.iter().product();
    if n > TERRACINI_GUARD {
        return Err(Error::Size(format!(
            "ambient dimension {n} exceeds the Terracini guard {TERRACINI_GUARD}"
        )));
    }
    let field = PrimeField::new(default_primes(1)[0]).expect("default prime");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let pts = random_points_fp(&field, &spec.dims, spec.r, &mut rng);
    let mut rows = Vec::with_capacity(spec.r * spec.dims.iter().sum::<usize>());
    for p in &pts {
        for (f, &nf) in spec.dims.iter().enumerate() {
            for i in 0..nf {
                let mut q = p.clone();
                q.vectors[f] = unit(&field, nf, i);
                rows.push(Tensor::rank_one(&field, &q).data);
            }
        }
    }
    Ok(rank(&field, &rows))
}

// ---------------------------------------------------------------------------
// Reduction filters

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    /// `I_d(σ_d) = 0`.
    DegreeAtMostR,
    /// Only one factor is left, and `σ_r` of a projective space is the
    /// whole space.
    SingleFactor,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Reduction {
    /// Evaluate in the given (lowered) factor dimensions.
    Keep { eval_dims: Vec<usize> },
    /// Not in the ideal without any computation.
    Drop { reason: DropReason },
    /// A factor carries `S_(d)`; the verdict is that of the label with this
    /// factor removed.
    Transfer {
        factor: usize,
        label: String,
        dims: Vec<usize>,
    },
}

pub fn reduction_filters(label: &[Partition], d: usize, spec: &SecantSpec) -> Reduction {
    reduce(label, d, &spec.dims, spec.r)
}

fn reduce(label: &[Partition], d: usize, dims: &[usize], r: usize) -> Reduction {
    if d <= r {
        return Reduction::Drop {
            reason: DropReason::DegreeAtMostR,
        };
    }
    if let Some(f) = label.iter().position(|p| p.len() == 1) {
        if label.len() <= 2 {
            return Reduction::Drop {
                reason: DropReason::SingleFactor,
            };
        }
        let (sub, sub_dims) = remove_factor(label, dims, f);
        return Reduction::Transfer {
            factor: f,
            label: label_key(&sub),
            dims: sub_dims,
        };
    }
    Reduction::Keep {
        eval_dims: label.iter().map(|p| p.len()).collect(),
    }
}

fn remove_factor(label: &[Partition], dims: &[usize], f: usize) -> (Vec<Partition>, Vec<usize>) {
    let sub = label
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != f)
        .map(|(_, p)| p.clone())
        .collect();
    let sub_dims = dims
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != f)
        .map(|(_, &n)| n)
        .collect();
    (sub, sub_dims)
}

// ---------------------------------------------------------------------------
// Vanishing of a family of forms on σ_r

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnMode {
    /// One column per homogeneity pattern of each point set.
    Patterns,
    /// One column per point set: the value at the sum.
    AtSum,
}

fn column_mode(d: usize, r: usize) -> ColumnMode {
    if (r as f64).powi(d as i32) <= PATTERN_ENUMERATION_LIMIT {
        ColumnMode::Patterns
    } else {
        ColumnMode::AtSum
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Evidence {
    pub primes: Vec<u64>,
    /// Point sets per prime used for the rank.
    pub point_sets: usize,
    /// Columns evaluated, over all primes, including re-verification.
    pub patterns_tested: usize,
    pub column_mode: ColumnMode,
    pub forms: usize,
    pub rank: usize,
    /// 1-based permutation tuples of the forms, when built by τ-search.
    pub taus: Vec<Vec<Vec<usize>>>,
    /// Integer kernel vectors on the form basis; empty if the kernel is
    /// zero or could not be lifted to small rationals.
    pub coefficients: Vec<Vec<String>>,
    pub fresh_point_sets: usize,
    /// Whether the kernel vectors were also confirmed over the integers.
    pub exact_check: bool,
}

#[derive(Clone, Debug)]
pub struct FormsVerdict {
    pub multiplicity_in_ideal: usize,
    pub kernel: Vec<Vec<BigInt>>,
    pub evidence: Evidence,
}

fn fields(primes: &[u64]) -> Result<Vec<PrimeField>> {
    if primes.len() < 2 {
        return Err(Error::Config("at least two primes are required".into()));
    }
    let distinct: BTreeSet<u64> = primes.iter().copied().collect();
    if distinct.len() != primes.len() {
        return Err(Error::Config(format!("primes {primes:?} are not distinct")));
    }
    primes
        .iter()
        .map(|&p| PrimeField::new(p).ok_or_else(|| Error::Config(format!("{p} is not a prime in (2^59, 2^62)"))))
        .collect()
}

/// Rows: one per form; columns: the values at one point set.
fn column_block(
    field: &PrimeField,
    forms: &[MinorProductForm],
    pts: &[RankOnePoint<Fp>],
    mode: ColumnMode,
) -> Result<Matrix<Fp>> {
    match mode {
        ColumnMode::AtSum => forms
            .par_iter()
            .map(|f| eval_at_sum(field, f, pts).map(|v| vec![v]))
            .collect(),
        ColumnMode::Patterns => {
            let maps = forms
                .par_iter()
                .map(|f| eval_all_patterns(field, f, pts))
                .collect::<Result<Vec<_>>>()?;
            let keys: BTreeSet<&Vec<usize>> = maps.iter().flat_map(|m| m.keys()).collect();
            if keys.is_empty() {
                // every pattern of every form vanished: one zero column
                return Ok(vec![vec![field.zero()]; forms.len()]);
            }
            Ok(maps
                .iter()
                .map(|m| keys.iter().map(|k| m.get(*k).copied().unwrap_or_default()).collect())
                .collect())
        }
    }
}

fn append(rows: &mut Matrix<Fp>, block: Matrix<Fp>) {
    for (row, b) in rows.iter_mut().zip(block) {
        row.extend(b);
    }
}

fn integer_direction(v: &[BigRational]) -> Vec<BigInt> {
    let l = v.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let ints: Vec<BigInt> = v.iter().map(|q| (q * &l).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    let sign = ints.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative());
    ints.into_iter()
        .map(|x| {
            let y = x / &g;
            if sign {
                -y
            } else {
                y
            }
        })
        .collect()
}

fn combine(field: &PrimeField, rows: &Matrix<Fp>, c: &[Fp]) -> Vec<Fp> {
    let cols = rows.first().map_or(0, |r| r.len());
    (0..cols)
        .map(|j| {
            rows.iter()
                .zip(c)
                .fold(field.zero(), |acc, (row, ci)| field.add(&acc, &field.mul(ci, &row[j])))
        })
        .collect()
}

fn exact_check(forms: &[MinorProductForm], r: usize, kernel: &[Vec<BigInt>], rng: &mut ChaCha8Rng) -> Result<bool> {
    let dims = forms[0].dims();
    let pts: Vec<RankOnePoint<BigInt>> = random_points_int(dims, r, 30, rng)
        .iter()
        .map(|p| p.map(|&x| BigInt::from(x)))
        .collect();
    let maps = forms
        .par_iter()
        .map(|f| eval_all_patterns(&Integers, f, &pts))
        .collect::<Result<Vec<_>>>()?;
    let keys: BTreeSet<&Vec<usize>> = maps.iter().flat_map(|m| m.keys()).collect();
    Ok(kernel.iter().all(|c| {
        keys.iter().all(|k| {
            let s: BigInt = maps
                .iter()
                .zip(c)
                .map(|(m, ci)| m.get(*k).map_or(BigInt::zero(), |v| v * ci))
                .sum();
            s.is_zero()
        })
    }))
}

/// Dimension of the space of linear combinations of the symmetrized
/// `forms` that vanish on `σ_r`, with kernel vectors and the sampling
/// record behind the verdict.
pub fn vanishing_kernel(forms: &[MinorProductForm], r: usize, primes: &[u64], seed: u64) -> Result<FormsVerdict> {
    let fields = fields(primes)?;
    let Some(first) = forms.first() else {
        return Err(Error::Argument("no forms to test".into()));
    };
    if forms
        .iter()
        .any(|f| f.dims() != first.dims() || f.degree() != first.degree())
    {
        return Err(Error::Argument("forms differ in degree or dims".into()));
    }
    let (m, d, dims) = (forms.len(), first.degree(), first.dims().to_vec());
    let mode = column_mode(d, r);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sets = MIN_POINT_SETS;
    for _ in 0..3 {
        let mut tested = 0;
        let mut mats = Vec::with_capacity(fields.len());
        let mut used_sets = 0;
        for field in &fields {
            let mut rows: Matrix<Fp> = vec![Vec::new(); m];
            let mut used = 0;
            while used < sets || rows[0].len() < m + COLUMN_MARGIN {
                let pts = random_points_fp(field, &dims, r, &mut rng);
                append(&mut rows, column_block(field, forms, &pts, mode)?);
                used += 1;
            }
            used_sets = used_sets.max(used);
            tested += rows[0].len();
            mats.push(rows);
        }
        let ranks: Vec<usize> = fields.iter().zip(&mats).map(|(f, m)| rank(f, m)).collect();
        let best = (0..fields.len()).max_by_key(|&i| (ranks[i], usize::MAX - i)).unwrap();
        let rk = ranks[best];
        let mut evidence = Evidence {
            primes: primes.to_vec(),
            point_sets: used_sets,
            patterns_tested: tested,
            column_mode: mode,
            forms: m,
            rank: rk,
            taus: Vec::new(),
            coefficients: Vec::new(),
            fresh_point_sets: 0,
            exact_check: false,
        };
        if rk == m {
            return Ok(FormsVerdict {
                multiplicity_in_ideal: 0,
                kernel: Vec::new(),
                evidence,
            });
        }
        let bf = &fields[best];
        let modular = left_kernel(bf, &mats[best]);
        let lifted: Option<Vec<Vec<BigInt>>> = modular
            .iter()
            .map(|v| {
                v.iter()
                    .map(|x| bf.rational_reconstruct(*x))
                    .collect::<Option<Vec<_>>>()
                    .map(|q| integer_direction(&q))
            })
            .collect();

        let mut ok = true;
        for (fi, field) in fields.iter().enumerate() {
            let mut fresh: Matrix<Fp> = vec![Vec::new(); m];
            for _ in 0..FRESH_POINT_SETS {
                let pts = random_points_fp(field, &dims, r, &mut rng);
                append(&mut fresh, column_block(field, forms, &pts, mode)?);
            }
            tested += fresh[0].len();
            if rank(field, &fresh) > rk {
                ok = false;
            }
            let vectors: Vec<Vec<Fp>> = match &lifted {
                Some(ints) => ints
                    .iter()
                    .map(|c| c.iter().map(|x| field.from_bigint(x)).collect())
                    .collect(),
                None if fi == best => modular.clone(),
                None => Vec::new(),
            };
            if vectors
                .iter()
                .any(|c| combine(field, &fresh, c).iter().any(|x| !field.is_zero(x)))
            {
                ok = false;
            }
        }
        if ok {
            if let Some(ints) = &lifted {
                if d <= EXACT_CHECK_DEGREE && mode == ColumnMode::Patterns {
                    ok = exact_check(forms, r, ints, &mut rng)?;
                    evidence.exact_check = ok;
                }
            }
        }
        if ok {
            evidence.patterns_tested = tested;
            evidence.fresh_point_sets = FRESH_POINT_SETS;
            let kernel = lifted.unwrap_or_default();
            evidence.coefficients = kernel
                .iter()
                .map(|c| c.iter().map(|x| x.to_string()).collect())
                .collect();
            return Ok(FormsVerdict {
                multiplicity_in_ideal: m - rk,
                kernel,
                evidence,
            });
        }
        sets *= 2;
    }
    Err(Error::Internal(
        "kernel vectors keep failing re-verification on fresh samples".into(),
    ))
}

// ---------------------------------------------------------------------------
// Form bases

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Seed of the sample stream for one label.
pub fn label_seed(seed: u64, key: &str) -> u64 {
    seed ^ fnv1a(key.as_bytes())
}

type Taus = Vec<Vec<Vec<usize>>>;

/// Random τ-tuples with `τ_1 = id` until `m` forms with independent
/// symmetrizations are found or the budget runs out.
fn tau_search(
    label: &[Partition],
    m: usize,
    dims: &[usize],
    field: &PrimeField,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<MinorProductForm>, Taus)> {
    let d = label[0].size();
    let args: Vec<Vec<RankOnePoint<Fp>>> = (0..m + COLUMN_MARGIN)
        .map(|_| random_points_fp(field, dims, d, rng))
        .collect();
    let identity: Vec<usize> = (0..d).collect();
    let mut basis = IncrementalBasis::new();
    let mut forms = Vec::with_capacity(m);
    let mut taus_out = Vec::with_capacity(m);
    for _ in 0..TAU_BUDGET_PER_COPY * m {
        if forms.len() == m {
            break;
        }
        let taus: Vec<Vec<usize>> = (0..label.len())
            .map(|i| {
                let mut t = identity.clone();
                if i > 0 {
                    t.shuffle(rng);
                }
                t
            })
            .collect();
        let form = build_form(label, &taus, dims)?;
        let vals = args
            .par_iter()
            .map(|a| eval_symmetrized(field, &form, a))
            .collect::<Result<Vec<_>>>()?;
        if basis.insert(field, &vals) {
            forms.push(form);
            taus_out.push(taus.iter().map(|t| t.iter().map(|x| x + 1).collect()).collect());
        }
    }
    Ok((forms, taus_out))
}

/// Catalog forms realizing `key`, skipping entries that symmetrize to zero.
pub fn catalog_forms(key: &str) -> Result<Vec<MinorProductForm>> {
    let mut out = Vec::new();
    for name in CATALOG_NAMES {
        let (forms, entry) = catalog(name)?;
        if entry.label == key && !name.ends_with("-identity") {
            out.extend(forms);
        }
    }
    if out.is_empty() {
        return Err(Error::Lookup(format!("no catalog form for label {key}")));
    }
    Ok(out)
}

fn forms_for(
    label: &[Partition],
    m: usize,
    dims: &[usize],
    field: &PrimeField,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<MinorProductForm>, Taus, bool)> {
    if label[0].size() <= MAX_NAIVE_DEGREE {
        let (forms, taus) = tau_search(label, m, dims, field, rng)?;
        return Ok((forms, taus, false));
    }
    let forms = catalog_forms(&label_key(label))?
        .into_iter()
        .map(|f| f.with_dims(dims.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    Ok((forms, Vec::new(), true))
}

// ---------------------------------------------------------------------------
// Oracles

fn random_invertible(field: &PrimeField, n: usize, rng: &mut ChaCha8Rng) -> Matrix<Fp> {
    loop {
        let g: Matrix<Fp> = (0..n).map(|_| (0..n).map(|_| field.random(rng)).collect()).collect();
        if !field.is_zero(&det(field, g.clone())) {
            return g;
        }
    }
}

/// Multiplicity of `label` in `I_d(σ_r)` computed without the reduction
/// filters: a fresh τ-search in the full dimensions, points moved by a
/// random change of basis in every factor, and one column per point set
/// from the tensor-network evaluation at the sum.
pub fn kernel_oracle(label: &ModuleLabel, spec: &SecantSpec, primes: &[u64]) -> Result<u64> {
    let fields = fields(primes)?;
    let field = fields.last().unwrap();
    let parts = &label.partitions;
    if parts.len() != spec.k() {
        return Err(Error::Argument(format!(
            "label {} has {} factors, dims have {}",
            label,
            parts.len(),
            spec.k()
        )));
    }
    let m = effective_multiplicity(label, &spec.dims);
    if m == 0 {
        return Ok(0);
    }
    if m > ORACLE_MAX_MULTIPLICITY {
        return Err(Error::Argument(format!(
            "oracle handles multiplicity up to {ORACLE_MAX_MULTIPLICITY}, label {label} has {m}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(label_seed(spec.seed ^ ORACLE_SALT, &label.key()));
    let (forms, _, _) = forms_for(parts, m as usize, &spec.dims, field, &mut rng)?;
    if forms.is_empty() {
        return Ok(0);
    }
    let change: Vec<Matrix<Fp>> = spec
        .dims
        .iter()
        .map(|&n| random_invertible(field, n, &mut rng))
        .collect();
    let sets = 2 * forms.len() + COLUMN_MARGIN;
    let mut rows: Matrix<Fp> = vec![Vec::new(); forms.len()];
    for _ in 0..sets {
        let pts: Vec<RankOnePoint<Fp>> = random_points_fp(field, &spec.dims, spec.r, &mut rng)
            .into_iter()
            .map(|p| {
                RankOnePoint::new(
                    p.vectors
                        .iter()
                        .zip(&change)
                        .map(|(v, g)| crate::linalg::mat_vec(field, g, v))
                        .collect(),
                )
            })
            .collect();
        append(&mut rows, column_block(field, &forms, &pts, ColumnMode::AtSum)?);
    }
    Ok((forms.len() - rank(field, &rows)) as u64)
}

/// `dim I_d(σ_r)` from scratch: for every torus weight, the number of
/// degree-`d` monomials of that weight minus the rank of their values at
/// random points of `σ_r`.
pub fn ideal_dimension_oracle(d: usize, spec: &SecantSpec, prime: u64) -> Result<u128> {
    let field = PrimeField::new(prime).ok_or_else(|| Error::Config(format!("{prime} is not a usable prime")))?;
    let n: usize = spec.dims.iter().product();
    let count = binomial((n + d - 1) as u64, d as u64);
    if count > MONOMIAL_GUARD {
        return Err(Error::Size(format!(
            "{count} monomials of degree {d} exceed the guard {MONOMIAL_GUARD}"
        )));
    }
    let monos = monomials(n, d);
    let classes = weight_classes(&spec.dims, &monos);
    let samples = classes.iter().map(Vec::len).max().unwrap_or(0) + COLUMN_MARGIN;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ ORACLE_SALT);
    let pts: Vec<Vec<Fp>> = (0..samples)
        .map(|_| {
            Tensor::sum_of(
                &field,
                &spec.dims,
                &random_points_fp(&field, &spec.dims, spec.r, &mut rng),
            )
            .data
        })
        .collect();
    let total: usize = classes
        .par_iter()
        .map(|class| {
            let rows: Matrix<Fp> = class
                .iter()
                .map(|&i| pts.iter().map(|x| eval_monomial(&field, &monos[i], x)).collect())
                .collect();
            class.len() - rank(&field, &rows)
        })
        .sum();
    Ok(total as u128)
}

// ---------------------------------------------------------------------------
// Scanning

#[derive(Clone, Debug)]
pub struct ScanOptions {
    pub primes: Vec<u64>,
    /// Restrict the scan to these labels; required above degree 9.
    pub labels: Option<Vec<ModuleLabel>>,
    pub budget: Option<Duration>,
    /// Run [`kernel_oracle`] on every label as well.
    pub oracle: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            primes: default_primes(2),
            labels: None,
            budget: None,
            oracle: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LabelStatus {
    Computed,
    /// The τ-search found fewer independent forms than the multiplicity;
    /// the verdict covers only the forms found.
    IncompleteBasis {
        found: usize,
    },
    /// Only catalog forms were tested.
    CatalogOnly {
        found: usize,
    },
    Transferred {
        via: String,
        inner: Box<LabelStatus>,
    },
    Dropped {
        reason: DropReason,
    },
    /// Multiplicity zero once factor dimensions are taken into account.
    Absent,
    BudgetExceeded,
}

impl LabelStatus {
    fn is_complete(&self) -> bool {
        match self {
            LabelStatus::Computed | LabelStatus::Dropped { .. } | LabelStatus::Absent => true,
            LabelStatus::Transferred { inner, .. } => inner.is_complete(),
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleCheck {
    pub multiplicity_in_ideal: u64,
    pub agrees: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LabelEntry {
    pub label: String,
    pub multiplicity_in_sd: u64,
    pub multiplicity_in_ideal: u64,
    pub dimension_in_ideal: u128,
    pub status: LabelStatus,
    pub reduction: Reduction,
    pub evidence: Option<Evidence>,
    pub oracle: Option<OracleCheck>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanReport {
    pub degree: usize,
    pub dims: Vec<usize>,
    pub r: usize,
    pub seed: u64,
    pub primes: Vec<u64>,
    pub entries: Vec<LabelEntry>,
    /// Keys of labels with positive multiplicity in the ideal.
    pub in_ideal: Vec<String>,
    pub ideal_dimension: u128,
    /// False if any label ran out of budget or lacks a full basis.
    pub complete: bool,
    /// False if the oracle disagreed on some label.
    pub consistent: bool,
}

impl ScanReport {
    pub fn entry(&self, key: &str) -> Option<&LabelEntry> {
        self.entries.iter().find(|e| e.label == key)
    }
}

fn effective_multiplicity(label: &ModuleLabel, dims: &[usize]) -> u64 {
    if label.partitions.iter().zip(dims).any(|(p, &n)| p.len() > n) {
        0
    } else {
        label.multiplicity_in_sd
    }
}

struct Outcome {
    multiplicity_in_ideal: u64,
    status: LabelStatus,
    evidence: Option<Evidence>,
}

struct Ctx<'a> {
    spec: &'a SecantSpec,
    fields: Vec<PrimeField>,
    primes: &'a [u64],
}

fn scan_label(ctx: &Ctx, label: &[Partition], m: u64, dims: &[usize]) -> Result<(Reduction, Outcome)> {
    let d = label[0].size();
    let r = ctx.spec.r;
    let reduction = reduce(label, d, dims, r);
    let outcome = match &reduction {
        Reduction::Drop { reason } => Outcome {
            multiplicity_in_ideal: 0,
            status: LabelStatus::Dropped { reason: *reason },
            evidence: None,
        },
        Reduction::Transfer { factor, label: key, .. } => {
            let (sub, sub_dims) = remove_factor(label, dims, *factor);
            let (_, inner) = scan_label(ctx, &sub, m, &sub_dims)?;
            Outcome {
                multiplicity_in_ideal: inner.multiplicity_in_ideal,
                status: LabelStatus::Transferred {
                    via: key.clone(),
                    inner: Box::new(inner.status),
                },
                evidence: inner.evidence,
            }
        }
        Reduction::Keep { eval_dims } => {
            let mut rng = ChaCha8Rng::seed_from_u64(label_seed(ctx.spec.seed, &label_key(label)));
            let (forms, taus, from_catalog) = forms_for(label, m as usize, eval_dims, &ctx.fields[0], &mut rng)?;
            let found = forms.len();
            if found == 0 {
                return Ok((
                    reduction,
                    Outcome {
                        multiplicity_in_ideal: 0,
                        status: LabelStatus::IncompleteBasis { found },
                        evidence: None,
                    },
                ));
            }
            let verdict = vanishing_kernel(&forms, r, ctx.primes, rng.gen())?;
            let mut evidence = verdict.evidence;
            evidence.taus = taus;
            let status = if from_catalog && (found as u64) < m {
                LabelStatus::CatalogOnly { found }
            } else if (found as u64) < m {
                LabelStatus::IncompleteBasis { found }
            } else {
                LabelStatus::Computed
            };
            Outcome {
                multiplicity_in_ideal: verdict.multiplicity_in_ideal as u64,
                status,
                evidence: Some(evidence),
            }
        }
    };
    Ok((reduction, outcome))
}

fn scan_labels(d: usize, spec: &SecantSpec, opts: &ScanOptions) -> Result<Vec<ModuleLabel>> {
    match &opts.labels {
        Some(labels) => {
            for l in labels {
                if l.degree() != d || l.k() != spec.k() {
                    return Err(Error::Argument(format!(
                        "label {l} does not live in S^{d} of a {}-factor space",
                        spec.k()
                    )));
                }
            }
            Ok(labels.clone())
        }
        None if d > MAX_NAIVE_DEGREE => Err(Error::Config(format!(
            "full scans stop at degree {MAX_NAIVE_DEGREE}; name catalog labels to go higher"
        ))),
        None => decompose_symmetric_power(d, &spec.dims),
    }
}

/// Every label of `S^d` (or the requested ones) with its multiplicity in
/// `I_d(σ_r)`.
pub fn scan_ideal(d: usize, spec: &SecantSpec, opts: &ScanOptions) -> Result<ScanReport> {
    let ctx = Ctx {
        spec,
        fields: fields(&opts.primes)?,
        primes: &opts.primes,
    };
    let labels = scan_labels(d, spec, opts)?;
    let deadline = opts.budget.map(|b| Instant::now() + b);
    let mut order: Vec<usize> = (0..labels.len()).collect();
    if d >= 7 {
        order.sort_by_key(|&i| labels[i].multiplicity_in_sd);
    }
    let mut oracle_primes = opts.primes.clone();
    oracle_primes.reverse();

    let mut results: Vec<(usize, LabelEntry)> = order
        .par_iter()
        .map(|&i| {
            let label = &labels[i];
            let m = effective_multiplicity(label, &spec.dims);
            let over_budget = deadline.is_some_and(|t| Instant::now() >= t);
            let (reduction, outcome) = if m == 0 {
                (
                    reduce(&label.partitions, d, &spec.dims, spec.r),
                    Outcome {
                        multiplicity_in_ideal: 0,
                        status: LabelStatus::Absent,
                        evidence: None,
                    },
                )
            } else if over_budget {
                (
                    reduce(&label.partitions, d, &spec.dims, spec.r),
                    Outcome {
                        multiplicity_in_ideal: 0,
                        status: LabelStatus::BudgetExceeded,
                        evidence: None,
                    },
                )
            } else {
                scan_label(&ctx, &label.partitions, m, &spec.dims)?
            };
            let oracle = if opts.oracle
                && m > 0
                && m <= ORACLE_MAX_MULTIPLICITY
                && outcome.status != LabelStatus::BudgetExceeded
            {
                let o = kernel_oracle(label, spec, &oracle_primes)?;
                Some(OracleCheck {
                    multiplicity_in_ideal: o,
                    agrees: o == outcome.multiplicity_in_ideal,
                })
            } else {
                None
            };
            Ok((
                i,
                LabelEntry {
                    label: label.key(),
                    multiplicity_in_sd: m,
                    multiplicity_in_ideal: outcome.multiplicity_in_ideal,
                    dimension_in_ideal: outcome.multiplicity_in_ideal as u128 * label.copy_dimension(&spec.dims),
                    status: outcome.status,
                    reduction,
                    evidence: outcome.evidence,
                    oracle,
                },
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    results.sort_by_key(|(i, _)| *i);
    let entries: Vec<LabelEntry> = results.into_iter().map(|(_, e)| e).collect();
    Ok(ScanReport {
        degree: d,
        dims: spec.dims.clone(),
        r: spec.r,
        seed: spec.seed,
        primes: opts.primes.clone(),
        in_ideal: entries
            .iter()
            .filter(|e| e.multiplicity_in_ideal > 0)
            .map(|e| e.label.clone())
            .collect(),
        ideal_dimension: entries.iter().map(|e| e.dimension_in_ideal).sum(),
        complete: entries.iter().all(|e| e.status.is_complete()),
        consistent: entries.iter().all(|e| e.oracle.as_ref().is_none_or(|o| o.agrees)),
        entries,
    })
}
