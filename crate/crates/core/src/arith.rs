//! Exact scalar arithmetic.
//!
//! Everything downstream is written against the [`Ring`] / [`Field`] traits,
//! which carry their context (modulus, adjoined square root) in `&self`
//! rather than in the elements. This keeps prime-field elements a plain
//! `Copy` word and lets the same evaluation kernel run over `Z`, `Q`,
//! `Q(sqrt D)` and `F_p`.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub trait Ring: Sync + Send {
    type Elem: Clone + Debug + PartialEq + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_i64(&self, v: i64) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;

    fn sum<'a, I>(&self, items: I) -> Self::Elem
    where
        I: IntoIterator<Item = &'a Self::Elem>,
        Self::Elem: 'a,
    {
        items.into_iter().fold(self.zero(), |acc, x| self.add(&acc, x))
    }
}

pub trait Field: Ring {
    /// `None` for zero.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Option<Self::Elem> {
        self.inv(b).map(|bi| self.mul(a, &bi))
    }
}

/// Determinant by Bareiss-free Gaussian elimination over a field.
pub fn det<F: Field>(field: &F, mut m: Vec<Vec<F::Elem>>) -> F::Elem {
    let n = m.len();
    let mut acc = field.one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !field.is_zero(&m[r][col])) else {
            return field.zero();
        };
        if piv != col {
            m.swap(piv, col);
            acc = field.neg(&acc);
        }
        let pinv = field.inv(&m[col][col]).expect("nonzero pivot");
        acc = field.mul(&acc, &m[col][col]);
        for r in col + 1..n {
            if field.is_zero(&m[r][col]) {
                continue;
            }
            let f = field.mul(&m[r][col], &pinv);
            for c in col..n {
                let t = field.mul(&f, &m[col][c]);
                m[r][c] = field.sub(&m[r][c], &t);
            }
        }
    }
    acc
}

/// Determinant by Laplace/Leibniz expansion; works over any commutative
/// ring and is the fast path for the small minors used by the forms.
pub fn det_small<R: Ring + ?Sized>(ring: &R, m: &[Vec<R::Elem>]) -> R::Elem {
    match m.len() {
        0 => ring.one(),
        1 => m[0][0].clone(),
        2 => ring.sub(&ring.mul(&m[0][0], &m[1][1]), &ring.mul(&m[0][1], &m[1][0])),
        3 => {
            let minor = |a: usize, b: usize| ring.sub(&ring.mul(&m[1][a], &m[2][b]), &ring.mul(&m[1][b], &m[2][a]));
            let t0 = ring.mul(&m[0][0], &minor(1, 2));
            let t1 = ring.mul(&m[0][1], &minor(0, 2));
            let t2 = ring.mul(&m[0][2], &minor(0, 1));
            ring.add(&ring.sub(&t0, &t1), &t2)
        }
        n => {
            // cofactor expansion along the first row
            let mut acc = ring.zero();
            for c in 0..n {
                if ring.is_zero(&m[0][c]) {
                    continue;
                }
                let sub: Vec<Vec<R::Elem>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|&(j, _)| j != c)
                            .map(|(_, x)| x.clone())
                            .collect()
                    })
                    .collect();
                let term = ring.mul(&m[0][c], &det_small(ring, &sub));
                acc = if c % 2 == 0 {
                    ring.add(&acc, &term)
                } else {
                    ring.sub(&acc, &term)
                };
            }
            acc
        }
    }
}

// ---------------------------------------------------------------------------
// Prime fields

/// Element of a [`PrimeField`], stored in Montgomery form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Fp(u64);

/// `Z/pZ` for an odd prime `2^59 < p < 2^62`, Montgomery multiplication with
/// `R = 2^64`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
    /// `-p^{-1} mod 2^64`
    neg_pinv: u64,
    /// `R^2 mod p`
    r2: u64,
}

pub const MIN_PRIME: u64 = 1 << 59;
pub const MAX_PRIME: u64 = 1 << 62;

impl PrimeField {
    pub fn new(p: u64) -> Option<Self> {
        if !(MIN_PRIME < p && p < MAX_PRIME && is_prime_u64(p)) {
            return None;
        }
        let mut inv: u64 = p;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(inv)));
        }
        debug_assert_eq!(p.wrapping_mul(inv), 1);
        let r = (1u128 << 64) % p as u128;
        let r2 = ((r * r) % p as u128) as u64;
        Some(Self {
            p,
            neg_pinv: inv.wrapping_neg(),
            r2,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline(always)]
    fn redc(&self, t: u128) -> u64 {
        let m = (t as u64).wrapping_mul(self.neg_pinv);
        let u = ((t + m as u128 * self.p as u128) >> 64) as u64;
        if u >= self.p {
            u - self.p
        } else {
            u
        }
    }

    pub fn from_u64(&self, v: u64) -> Fp {
        Fp(self.redc((v % self.p) as u128 * self.r2 as u128))
    }

    /// Canonical residue in `0..p`.
    pub fn to_u64(&self, a: Fp) -> u64 {
        self.redc(a.0 as u128)
    }

    /// Signed representative in `(-p/2, p/2]`.
    pub fn to_i128_centered(&self, a: Fp) -> i128 {
        let v = self.to_u64(a) as i128;
        if v > (self.p / 2) as i128 {
            v - self.p as i128
        } else {
            v
        }
    }

    pub fn from_bigint(&self, v: &BigInt) -> Fp {
        let p = BigInt::from(self.p);
        let r = v.mod_floor(&p);
        let (_, digits) = r.to_u64_digits();
        self.from_u64(digits.first().copied().unwrap_or(0))
    }

    pub fn from_rational(&self, v: &BigRational) -> Option<Fp> {
        let n = self.from_bigint(v.numer());
        let d = self.from_bigint(v.denom());
        self.inv(&d).map(|di| self.mul(&n, &di))
    }

    pub fn pow(&self, mut base: Fp, mut e: u64) -> Fp {
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// Uniform element.
    pub fn random<Rn: rand::Rng + ?Sized>(&self, rng: &mut Rn) -> Fp {
        self.from_u64(rng.gen_range(0..self.p))
    }

    /// Recover `n/d` with `|n|, d < sqrt(p/2)` from its residue, if one exists.
    pub fn rational_reconstruct(&self, a: Fp) -> Option<BigRational> {
        let p = self.p as i128;
        let bound = ((self.p / 2) as f64).sqrt() as i128;
        let (mut r0, mut r1) = (p, self.to_u64(a) as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 > bound {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        if t1 == 0 || t1.abs() > bound {
            return None;
        }
        let (n, d) = if t1 < 0 { (-r1, -t1) } else { (r1, t1) };
        Some(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }
}

impl Ring for PrimeField {
    type Elem = Fp;

    #[inline]
    fn zero(&self) -> Fp {
        Fp(0)
    }
    #[inline]
    fn one(&self) -> Fp {
        self.from_u64(1)
    }
    fn from_i64(&self, v: i64) -> Fp {
        if v >= 0 {
            self.from_u64(v as u64)
        } else {
            self.neg(&self.from_u64(v.unsigned_abs()))
        }
    }
    #[inline(always)]
    fn add(&self, a: &Fp, b: &Fp) -> Fp {
        let s = a.0 + b.0;
        Fp(if s >= self.p { s - self.p } else { s })
    }
    #[inline(always)]
    fn sub(&self, a: &Fp, b: &Fp) -> Fp {
        Fp(if a.0 >= b.0 { a.0 - b.0 } else { a.0 + self.p - b.0 })
    }
    #[inline(always)]
    fn mul(&self, a: &Fp, b: &Fp) -> Fp {
        Fp(self.redc(a.0 as u128 * b.0 as u128))
    }
    #[inline(always)]
    fn neg(&self, a: &Fp) -> Fp {
        Fp(if a.0 == 0 { 0 } else { self.p - a.0 })
    }
    #[inline(always)]
    fn is_zero(&self, a: &Fp) -> bool {
        a.0 == 0
    }
}

impl Field for PrimeField {
    fn inv(&self, a: &Fp) -> Option<Fp> {
        if a.0 == 0 {
            None
        } else {
            Some(self.pow(*a, self.p - 2))
        }
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for all `u64`.
pub fn is_prime_u64(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'outer: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// The `count` largest primes below `2^bits`; `bits` must be 60, 61 or 62.
pub fn primes_with_bits(bits: u32, count: usize) -> Option<Vec<u64>> {
    if !(60..=62).contains(&bits) {
        return None;
    }
    let mut out = Vec::with_capacity(count);
    let mut c = (1u64 << bits) - 1;
    while out.len() < count && c > MIN_PRIME {
        if is_prime_u64(c) {
            out.push(c);
        }
        c -= 2;
    }
    Some(out)
}

/// Default primes: the largest primes below `2^61`.
pub fn default_primes(count: usize) -> Vec<u64> {
    primes_with_bits(61, count).expect("61 bits is supported")
}

// ---------------------------------------------------------------------------
// Integers and rationals

#[derive(Clone, Copy, Debug, Default)]
pub struct Integers;

impl Ring for Integers {
    type Elem = BigInt;

    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn one(&self) -> BigInt {
        BigInt::one()
    }
    fn from_i64(&self, v: i64) -> BigInt {
        BigInt::from(v)
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }
    fn sub(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a - b
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b
    }
    fn neg(&self, a: &BigInt) -> BigInt {
        -a
    }
    fn is_zero(&self, a: &BigInt) -> bool {
        a.is_zero()
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Rationals;

impl Ring for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn from_i64(&self, v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
}

impl Field for Rationals {
    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        if a.is_zero() {
            None
        } else {
            Some(a.recip())
        }
    }
}

/// Exact square root of a nonnegative rational, if it is a perfect square.
pub fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    if &(&n * &n) == q.numer() && &(&d * &d) == q.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

/// Element `a + b*sqrt(D)` of a quadratic extension of `Q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadElem {
    pub a: BigRational,
    pub b: BigRational,
}

impl QuadElem {
    pub fn rational(a: BigRational) -> Self {
        Self {
            a,
            b: BigRational::zero(),
        }
    }
}

/// `Q(sqrt D)` for a non-square rational `D`. With `D` a square this is
/// still a commutative ring but not a field, so construction checks it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticField {
    d: BigRational,
}

impl QuadraticField {
    pub fn new(d: BigRational) -> Option<Self> {
        if rational_sqrt(&d).is_some() {
            None
        } else {
            Some(Self { d })
        }
    }

    pub fn radicand(&self) -> &BigRational {
        &self.d
    }

    /// `sqrt(D)` itself.
    pub fn root(&self) -> QuadElem {
        QuadElem {
            a: BigRational::zero(),
            b: BigRational::one(),
        }
    }

    pub fn embed(&self, q: &BigRational) -> QuadElem {
        QuadElem::rational(q.clone())
    }
}

impl Ring for QuadraticField {
    type Elem = QuadElem;

    fn zero(&self) -> QuadElem {
        QuadElem::rational(BigRational::zero())
    }
    fn one(&self) -> QuadElem {
        QuadElem::rational(BigRational::one())
    }
    fn from_i64(&self, v: i64) -> QuadElem {
        QuadElem::rational(BigRational::from_integer(BigInt::from(v)))
    }
    fn add(&self, x: &QuadElem, y: &QuadElem) -> QuadElem {
        QuadElem {
            a: &x.a + &y.a,
            b: &x.b + &y.b,
        }
    }
    fn sub(&self, x: &QuadElem, y: &QuadElem) -> QuadElem {
        QuadElem {
            a: &x.a - &y.a,
            b: &x.b - &y.b,
        }
    }
    fn mul(&self, x: &QuadElem, y: &QuadElem) -> QuadElem {
        QuadElem {
            a: &x.a * &y.a + &x.b * &y.b * &self.d,
            b: &x.a * &y.b + &x.b * &y.a,
        }
    }
    fn neg(&self, x: &QuadElem) -> QuadElem {
        QuadElem { a: -&x.a, b: -&x.b }
    }
    fn is_zero(&self, x: &QuadElem) -> bool {
        x.a.is_zero() && x.b.is_zero()
    }
}

impl Field for QuadraticField {
    fn inv(&self, x: &QuadElem) -> Option<QuadElem> {
        let norm = &x.a * &x.a - &x.b * &x.b * &self.d;
        if norm.is_zero() {
            return None;
        }
        Some(QuadElem {
            a: &x.a / &norm,
            b: -&x.b / &norm,
        })
    }
}
