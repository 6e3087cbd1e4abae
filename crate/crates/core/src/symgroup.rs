//! Partitions and irreducible characters of the symmetric group.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const MAX_DEGREE: usize = 16;

/// A weakly decreasing sequence of positive integers.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::Argument("empty partition".into()));
        }
        if parts.contains(&0) {
            return Err(Error::Argument(format!("zero part in {parts:?}")));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Argument(format!("parts not decreasing: {parts:?}")));
        }
        Ok(Self { parts })
    }

    pub fn row(d: u32) -> Self {
        Self { parts: vec![d] }
    }

    pub fn column(d: u32) -> Self {
        Self {
            parts: vec![1; d as usize],
        }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn size(&self) -> usize {
        self.parts.iter().map(|&p| p as usize).sum()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn conjugate(&self) -> Partition {
        let first = self.parts[0] as usize;
        let parts = (0..first)
            .map(|j| self.parts.iter().filter(|&&p| p as usize > j).count() as u32)
            .collect();
        Partition { parts }
    }

    /// Hook lengths, row by row.
    pub fn hooks(&self) -> Vec<Vec<u32>> {
        let conj = self.conjugate();
        self.parts
            .iter()
            .enumerate()
            .map(|(i, &row)| {
                (0..row as usize)
                    .map(|j| (row as usize - j) as u32 + conj.parts[j] - i as u32 - 1)
                    .collect()
            })
            .collect()
    }

    /// Multiplicity `m_i` of each part size `i` (index 0 unused).
    pub fn part_multiplicities(&self) -> Vec<u32> {
        let mut m = vec![0; self.parts[0] as usize + 1];
        for &p in &self.parts {
            m[p as usize] += 1;
        }
        m
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.iter().all(|&p| p < 10) {
            for p in &self.parts {
                write!(f, "{p}")?;
            }
            Ok(())
        } else {
            let s: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
            write!(f, "{}", s.join("."))
        }
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

/// Accepts `"3111"`, `"12.3"` or `"3,1,1,1"`.
impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Argument(format!("cannot parse partition {s:?}"));
        let parts: Vec<u32> = if s.contains(['.', ',']) {
            s.split(['.', ','])
                .map(|t| t.trim().parse().map_err(|_| bad()))
                .collect::<Result<_>>()?
        } else {
            s.chars()
                .map(|c| c.to_digit(10).ok_or_else(bad))
                .collect::<Result<_>>()?
        };
        Partition::new(parts)
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.parts.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let parts = Vec::<u32>::deserialize(d)?;
        Partition::new(parts).map_err(serde::de::Error::custom)
    }
}

/// A conjugacy class of `S_d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CycleType {
    pub cycle_lengths: Partition,
    pub class_size: u64,
}

impl CycleType {
    pub fn new(cycle_lengths: Partition) -> Self {
        let d = cycle_lengths.size() as u64;
        let mut denom: u64 = 1;
        for (i, &m) in cycle_lengths.part_multiplicities().iter().enumerate().skip(1) {
            denom *= (i as u64).pow(m) * factorial(m as u64);
        }
        Self {
            class_size: factorial(d) / denom,
            cycle_lengths,
        }
    }

    pub fn identity(d: u32) -> Self {
        Self::new(Partition::column(d))
    }
}

pub fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

fn check_degree(d: usize) -> Result<()> {
    if !(1..=MAX_DEGREE).contains(&d) {
        return Err(Error::Config(format!("degree {d} outside 1..={MAX_DEGREE}")));
    }
    Ok(())
}

/// All partitions of `d`, lexicographically decreasing.
pub fn enumerate_partitions(d: usize) -> Result<Vec<Partition>> {
    check_degree(d)?;
    Ok(partitions_bounded(d as u32, d as u32, usize::MAX))
}

/// Partitions of `d` with largest part `<= max_part` and at most `max_len`
/// parts, lexicographically decreasing.
pub fn partitions_bounded(d: u32, max_part: u32, max_len: usize) -> Vec<Partition> {
    fn rec(rem: u32, max: u32, max_len: usize, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if rem == 0 {
            out.push(Partition { parts: cur.clone() });
            return;
        }
        if cur.len() == max_len {
            return;
        }
        for p in (1..=max.min(rem)).rev() {
            cur.push(p);
            rec(rem - p, p, max_len, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if d == 0 {
        return out;
    }
    rec(d, max_part, max_len, &mut Vec::new(), &mut out);
    out
}

pub fn cycle_types(d: usize) -> Result<Vec<CycleType>> {
    Ok(enumerate_partitions(d)?.into_iter().map(CycleType::new).collect())
}

thread_local! {
    static CHAR_MEMO: RefCell<HashMap<(Vec<u32>, Vec<u32>), i64>> = RefCell::new(HashMap::new());
}

/// `χ_π(μ)` by the Murnaghan–Nakayama rule on beta-sets.
pub fn character(pi: &Partition, mu: &CycleType) -> Result<i64> {
    if pi.size() != mu.cycle_lengths.size() {
        return Err(Error::Argument(format!(
            "character of {pi} on a class of size {}",
            mu.cycle_lengths.size()
        )));
    }
    Ok(mn(&pi.parts, &mu.cycle_lengths.parts))
}

fn mn(lambda: &[u32], mu: &[u32]) -> i64 {
    if mu.is_empty() {
        return if lambda.is_empty() { 1 } else { 0 };
    }
    if lambda.len() == 1 {
        return 1;
    }
    let key = (lambda.to_vec(), mu.to_vec());
    if let Some(v) = CHAR_MEMO.with(|m| m.borrow().get(&key).copied()) {
        return v;
    }
    let h = mu[0];
    let rest = &mu[1..];
    let n = lambda.len() as u32;
    let beta: Vec<u32> = lambda.iter().enumerate().map(|(i, &l)| l + n - 1 - i as u32).collect();
    let mut total = 0i64;
    for (idx, &b) in beta.iter().enumerate() {
        if b < h || beta.contains(&(b - h)) {
            continue;
        }
        let target = b - h;
        let between = beta.iter().filter(|&&x| x > target && x < b).count();
        let mut nb = beta.clone();
        nb[idx] = target;
        nb.sort_unstable_by(|a, b| b.cmp(a));
        let new_lambda: Vec<u32> = nb
            .iter()
            .enumerate()
            .map(|(i, &x)| x - (n - 1 - i as u32))
            .filter(|&x| x > 0)
            .collect();
        let v = mn(&new_lambda, rest);
        total += if between % 2 == 0 { v } else { -v };
    }
    CHAR_MEMO.with(|m| m.borrow_mut().insert(key, total));
    total
}

/// Rows indexed by `enumerate_partitions(d)`, columns by `cycle_types(d)`.
pub fn character_table(d: usize) -> Result<Vec<Vec<i64>>> {
    let parts = enumerate_partitions(d)?;
    let classes = cycle_types(d)?;
    parts
        .iter()
        .map(|p| classes.iter().map(|c| character(p, c)).collect())
        .collect()
}

/// `dim [π]` by the hook length formula.
pub fn irrep_dimension(pi: &Partition) -> u64 {
    let num: u128 = (1..=pi.size() as u128).product();
    let denom: u128 = pi.hooks().iter().flatten().map(|&h| h as u128).product();
    (num / denom) as u64
}

/// `dim([π_1] ⊗ … ⊗ [π_k])^{S_d}`.
pub fn invariant_multiplicity(pis: &[Partition]) -> Result<u64> {
    let Some(first) = pis.first() else {
        return Err(Error::Argument("no partitions".into()));
    };
    let d = first.size();
    if pis.iter().any(|p| p.size() != d) {
        return Err(Error::Argument(format!("partitions of unequal size: {pis:?}")));
    }
    let classes = cycle_types(d)?;
    let mut acc: i128 = 0;
    let mut big: Option<BigInt> = None;
    for c in &classes {
        let mut term: Option<i128> = Some(c.class_size as i128);
        let mut big_term = BigInt::from(c.class_size);
        for p in pis {
            let chi = character(p, c)?;
            term = term.and_then(|t| t.checked_mul(chi as i128));
            big_term *= chi;
        }
        if big_term.is_zero() {
            continue;
        }
        match (term, &mut big) {
            (Some(t), None) => match acc.checked_add(t) {
                Some(s) => acc = s,
                None => big = Some(BigInt::from(acc) + BigInt::from(t)),
            },
            (None, None) => big = Some(BigInt::from(acc) + big_term),
            (_, Some(b)) => *b += big_term,
        }
    }
    let total = big.unwrap_or_else(|| BigInt::from(acc));
    let order = BigInt::from(factorial(d as u64));
    if (&total % &order) != BigInt::zero() {
        return Err(Error::Internal(format!(
            "character sum {total} not divisible by {d}! for {pis:?}"
        )));
    }
    (total / order)
        .to_u64()
        .ok_or_else(|| Error::Internal(format!("negative multiplicity for {pis:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Partition {
        s.parse().unwrap()
    }

    #[test]
    fn partitions_small() {
        let ps = enumerate_partitions(3).unwrap();
        assert_eq!(ps, vec![p("3"), p("21"), p("111")]);
        assert_eq!(enumerate_partitions(1).unwrap(), vec![p("1")]);
        assert_eq!(enumerate_partitions(6).unwrap().len(), 11);
        assert!(enumerate_partitions(0).is_err());
        assert!(enumerate_partitions(17).is_err());
    }

    #[test]
    fn s3_character_table() {
        // classes: (3), (21), (111); rows (3), (21), (111)
        let t = character_table(3).unwrap();
        assert_eq!(t, vec![vec![1, 1, 1], vec![-1, 0, 2], vec![1, -1, 1]]);
        let sizes: Vec<u64> = cycle_types(3).unwrap().iter().map(|c| c.class_size).collect();
        assert_eq!(sizes, vec![2, 3, 1]);
    }

    #[test]
    fn dimensions() {
        assert_eq!(irrep_dimension(&p("21")), 2);
        assert_eq!(irrep_dimension(&p("211")), 3);
        assert_eq!(irrep_dimension(&p("5")), 1);
        assert_eq!(irrep_dimension(&p("3311")), 56);
    }

    #[test]
    fn multiplicities() {
        assert_eq!(invariant_multiplicity(&[p("3"), p("3")]).unwrap(), 1);
        assert_eq!(invariant_multiplicity(&[p("21"), p("21"), p("21")]).unwrap(), 1);
        assert_eq!(invariant_multiplicity(&[p("21"), p("21"), p("111")]).unwrap(), 1);
        assert_eq!(invariant_multiplicity(&[p("21"), p("3"), p("111")]).unwrap(), 0);
        assert!(invariant_multiplicity(&[p("21"), p("4")]).is_err());
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(p("3,1,1,1"), p("3111"));
        assert_eq!(p("12.3").to_string(), "12.3");
        assert!("132".parse::<Partition>().is_err());
        assert_eq!(p("3111").conjugate(), p("411"));
    }

    /// `[21]` as the hyperplane `x_1 + x_2 + x_3 = 0` with basis
    /// `e = (1,-1,0)`, `f = (0,1,-1)`; returns `Σ_σ (σv_1) ⊗ … ⊗ (σv_4)`.
    fn orbit_sum(v: [usize; 4]) -> Vec<i64> {
        let basis = [[1i64, -1, 0], [0, 1, -1]];
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let mut out = vec![0i64; 16];
        for p in perms {
            let image = |b: usize| {
                let mut w = [0i64; 3];
                for i in 0..3 {
                    w[p[i]] = basis[b][i];
                }
                [w[0], -w[2]]
            };
            let ws: Vec<[i64; 2]> = v.iter().map(|&b| image(b)).collect();
            for (idx, slot) in out.iter_mut().enumerate() {
                *slot += (0..4).map(|j| ws[j][(idx >> (3 - j)) & 1]).product::<i64>();
            }
        }
        out
    }

    #[test]
    fn worked_example_of_four_copies_of_21() {
        // I_1 = eeee + (e+f)^4 + ffff and I_2 as printed, indices e = 0, f = 1
        let i1: Vec<i64> = (0..16).map(|i| if i == 0 || i == 15 { 2 } else { 1 }).collect();
        let i2 = vec![2, 1, 1, 3, 1, 0, 0, 1, 1, 0, 0, 1, 3, 1, 1, 2];
        assert_eq!(orbit_sum([0, 0, 0, 0]), i1.iter().map(|x| 2 * x).collect::<Vec<_>>());
        assert_eq!(orbit_sum([0, 0, 1, 1]), i2);
        // averaging all 16 basis tensors spans a 3-dimensional space,
        // matching the character count rather than the two invariants shown
        let rows: Vec<Vec<num_rational::BigRational>> = (0..16)
            .map(|c| orbit_sum([c >> 3 & 1, c >> 2 & 1, c >> 1 & 1, c & 1]))
            .map(|r| {
                r.into_iter()
                    .map(|x| num_rational::BigRational::from_integer(x.into()))
                    .collect()
            })
            .collect();
        assert_eq!(crate::linalg::rank(&crate::arith::Rationals, &rows), 3);
        assert_eq!(
            invariant_multiplicity(&[p("21"), p("21"), p("21"), p("21")]).unwrap(),
            3
        );
    }
}
