//! Exact arithmetic in the localization of the integers at an odd prime.
//!
//! A [`PLocal`] is an arbitrary exact rational carrying the prime `p` of its
//! computation context. Elements of the valuation ring `R = Z_(p)` are the
//! values with `valuation() >= 0`; the full fraction field `F = Q` is
//! available everywhere, which is what witness matrices and dual lattices
//! need. [`Fp`] is the residue field `k = R/pR`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Additive p-adic valuation, with `Infinite` reserved for zero.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn is_finite(self) -> bool {
        matches!(self, Valuation::Finite(_))
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn min(self, other: Valuation) -> Valuation {
        if self <= other {
            self
        } else {
            other
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (self, other) {
            (Valuation::Infinite, Valuation::Infinite) => std::cmp::Ordering::Equal,
            (Valuation::Infinite, _) => std::cmp::Ordering::Greater,
            (_, Valuation::Infinite) => std::cmp::Ordering::Less,
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
        }
    }
}

impl Add<Valuation> for Valuation {
    type Output = Valuation;
    fn add(self, rhs: Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }
}

impl Add<i64> for Valuation {
    type Output = Valuation;
    fn add(self, rhs: i64) -> Valuation {
        match self {
            Valuation::Finite(a) => Valuation::Finite(a + rhs),
            Valuation::Infinite => Valuation::Infinite,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

/// Checks that `p` is an odd prime. The theory assumes `2` is a unit, so
/// `p = 2` is a hard error, as is any composite.
pub fn check_odd_prime(p: u64) -> Result<()> {
    if p < 3 || p % 2 == 0 {
        return Err(Error::BadPrime(p));
    }
    let mut d = 3u64;
    while d * d <= p {
        if p % d == 0 {
            return Err(Error::BadPrime(p));
        }
        d += 2;
    }
    Ok(())
}

/// An exact rational in the fraction field of `Z_(p)`, tagged with its prime.
///
/// The tag `0` marks prime-agnostic constants (the values produced by
/// `Zero::zero` and `One::one`); arithmetic adopts the other operand's prime,
/// and mixing two distinct nonzero primes panics.
#[derive(Clone)]
pub struct PLocal {
    ratio: BigRational,
    prime: u64,
}

// Equality is on the rational value; the prime tag is context, not data.
impl PartialEq for PLocal {
    fn eq(&self, other: &Self) -> bool {
        self.ratio == other.ratio
    }
}

impl Eq for PLocal {}

impl std::hash::Hash for PLocal {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.ratio.hash(state);
    }
}

fn merge_primes(a: u64, b: u64) -> u64 {
    match (a, b) {
        (0, q) => q,
        (q, 0) => q,
        (q, r) => {
            assert_eq!(q, r, "mixed prime contexts: {q} vs {r}");
            q
        }
    }
}

impl PLocal {
    pub fn new(ratio: BigRational, p: u64) -> Self {
        PLocal { ratio, prime: p }
    }

    pub fn from_int(n: i64, p: u64) -> Self {
        PLocal::new(BigRational::from_integer(BigInt::from(n)), p)
    }

    pub fn from_bigint(n: BigInt, p: u64) -> Self {
        PLocal::new(BigRational::from_integer(n), p)
    }

    /// `num/den` with `den != 0`.
    pub fn from_ratio(num: i64, den: i64, p: u64) -> Self {
        assert!(den != 0, "zero denominator");
        PLocal::new(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            p,
        )
    }

    /// `p^e` as an element of `F`.
    pub fn p_power(e: i64, p: u64) -> Self {
        let base = BigInt::from(p);
        let pw = base.pow(e.unsigned_abs() as u32);
        if e >= 0 {
            PLocal::new(BigRational::from_integer(pw), p)
        } else {
            PLocal::new(BigRational::new(BigInt::one(), pw), p)
        }
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn ratio(&self) -> &BigRational {
        &self.ratio
    }

    pub fn numer(&self) -> &BigInt {
        self.ratio.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.ratio.denom()
    }

    /// Attaches a prime context to an unattached constant (no-op when the
    /// primes already agree; panics on a genuine mismatch).
    pub fn attach(&self, p: u64) -> PLocal {
        PLocal {
            ratio: self.ratio.clone(),
            prime: merge_primes(self.prime, p),
        }
    }

    /// The additive valuation `nu_p`, with `nu(0) = Infinite`.
    pub fn valuation(&self) -> Valuation {
        if self.ratio.is_zero() {
            return Valuation::Infinite;
        }
        if self.ratio.numer().magnitude().is_one() && self.ratio.denom().is_one() {
            return Valuation::Finite(0); // +-1 is a unit at every prime
        }
        assert!(
            self.prime != 0,
            "valuation of a scalar without a prime context"
        );
        let p = BigInt::from(self.prime);
        let mut v: i64 = 0;
        if (self.ratio.numer() % &p).is_zero() {
            let mut n = self.ratio.numer() / &p;
            v += 1;
            while (&n % &p).is_zero() {
                n /= &p;
                v += 1;
            }
        }
        if (self.ratio.denom() % &p).is_zero() {
            let mut d = self.ratio.denom() / &p;
            v -= 1;
            while (&d % &p).is_zero() {
                d /= &p;
                v -= 1;
            }
        }
        Valuation::Finite(v)
    }

    pub fn is_integral(&self) -> bool {
        self.valuation() >= Valuation::Finite(0)
    }

    pub fn is_unit(&self) -> bool {
        self.valuation() == Valuation::Finite(0)
    }

    /// `self / p^nu(self)`; panics on zero.
    pub fn unit_part(&self) -> PLocal {
        let v = self.valuation().finite().expect("unit part of zero");
        self.clone() / PLocal::p_power(v, self.prime)
    }

    pub fn inv(&self) -> Option<PLocal> {
        if self.ratio.is_zero() {
            None
        } else {
            Some(PLocal {
                ratio: self.ratio.recip(),
                prime: self.prime,
            })
        }
    }

    /// Residue in `k = F_p` of an element with `nu >= 0`.
    pub fn residue(&self) -> Result<Fp> {
        if !self.is_integral() {
            return Err(Error::NotIntegral(self.to_string()));
        }
        let p = self.prime;
        assert!(p != 0, "residue of a scalar without a prime context");
        let pb = BigInt::from(p);
        let n = self.ratio.numer().mod_floor(&pb);
        let d = self.ratio.denom().mod_floor(&pb);
        let n64 = n.to_string().parse::<u64>().unwrap();
        let d64 = d.to_string().parse::<u64>().unwrap();
        Ok(Fp::new(n64, p) * Fp::new(mod_inverse(d64, p), p))
    }

    /// Canonical representative of `self mod p^k` for integral `self`,
    /// in `[0, p^k)`.
    pub fn mod_pk(&self, k: u32) -> Result<BigInt> {
        if !self.is_integral() {
            return Err(Error::NotIntegral(self.to_string()));
        }
        let m = BigInt::from(self.prime).pow(k);
        let n = self.ratio.numer().mod_floor(&m);
        let d = self.ratio.denom().mod_floor(&m);
        let dinv = bigint_mod_inverse(&d, &m).expect("denominator coprime to p");
        Ok((n * dinv).mod_floor(&m))
    }
}

impl fmt::Debug for PLocal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ratio)
    }
}

impl fmt::Display for PLocal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ratio)
    }
}

macro_rules! plocal_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for PLocal {
            type Output = PLocal;
            fn $method(self, rhs: PLocal) -> PLocal {
                PLocal {
                    prime: merge_primes(self.prime, rhs.prime),
                    ratio: self.ratio.$method(rhs.ratio),
                }
            }
        }
        impl<'a> $trait<&'a PLocal> for &'a PLocal {
            type Output = PLocal;
            fn $method(self, rhs: &'a PLocal) -> PLocal {
                PLocal {
                    prime: merge_primes(self.prime, rhs.prime),
                    ratio: (&self.ratio).$method(&rhs.ratio),
                }
            }
        }
    };
}

plocal_binop!(Add, add);
plocal_binop!(Sub, sub);
plocal_binop!(Mul, mul);

impl Div for PLocal {
    type Output = PLocal;
    fn div(self, rhs: PLocal) -> PLocal {
        assert!(!rhs.ratio.is_zero(), "division by zero");
        PLocal {
            prime: merge_primes(self.prime, rhs.prime),
            ratio: self.ratio / rhs.ratio,
        }
    }
}

impl Neg for PLocal {
    type Output = PLocal;
    fn neg(self) -> PLocal {
        PLocal {
            ratio: -self.ratio,
            prime: self.prime,
        }
    }
}

impl Zero for PLocal {
    fn zero() -> Self {
        PLocal {
            ratio: BigRational::zero(),
            prime: 0,
        }
    }
    fn is_zero(&self) -> bool {
        self.ratio.is_zero()
    }
}

impl One for PLocal {
    fn one() -> Self {
        PLocal {
            ratio: BigRational::one(),
            prime: 0,
        }
    }
    fn is_one(&self) -> bool {
        self.ratio.is_one()
    }
}

/// The Legendre symbol of a unit: `+1` iff its residue is a nonzero square
/// in `k`. Rejects non-units.
pub fn legendre(u: &PLocal) -> Result<i8> {
    if !u.is_unit() {
        return Err(Error::NonUnit(u.to_string()));
    }
    let r = u.residue()?;
    Ok(legendre_residue(r.value(), r.prime()))
}

fn legendre_residue(r: u64, p: u64) -> i8 {
    debug_assert!(r % p != 0);
    let e = pow_mod(r % p, (p - 1) / 2, p);
    if e == 1 {
        1
    } else {
        -1
    }
}

/// The Hilbert symbol `(a, b)_p` for an odd prime, via the valuation/Legendre
/// formula. Rejects zero arguments.
pub fn hilbert_symbol(a: &PLocal, b: &PLocal) -> Result<i8> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::ZeroArgument);
    }
    let p = merge_primes(a.prime(), b.prime());
    check_odd_prime(p)?;
    let alpha = a.valuation().finite().unwrap();
    let beta = b.valuation().finite().unwrap();
    let u = a.unit_part().attach(p);
    let v = b.unit_part().attach(p);
    let eps = ((p - 1) / 2) % 2; // class of -1: nonsquare iff p = 3 mod 4
    let mut sign = 1i8;
    if (alpha & 1) == 1 && (beta & 1) == 1 && eps == 1 {
        sign = -sign;
    }
    if (beta & 1) == 1 && legendre(&u)? == -1 {
        sign = -sign;
    }
    if (alpha & 1) == 1 && legendre(&v)? == -1 {
        sign = -sign;
    }
    Ok(sign)
}

/// The smallest quadratic non-residue mod `p`.
pub fn nonresidue(p: u64) -> u64 {
    (2..p)
        .find(|&r| legendre_residue(r, p) == -1)
        .expect("odd prime has a non-residue")
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc
}

pub fn mod_inverse(a: u64, p: u64) -> u64 {
    assert!(a % p != 0, "inverse of zero mod {p}");
    pow_mod(a, p - 2, p)
}

fn bigint_mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// An element of the residue field `k = F_p`. Prime tag `0` marks the
/// constants from `Zero`/`One`, as for [`PLocal`].
#[derive(Clone, Copy)]
pub struct Fp {
    value: u64,
    prime: u64,
}

// Same convention as `PLocal`: equality on the reduced value only.
impl PartialEq for Fp {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl Eq for Fp {}

impl std::hash::Hash for Fp {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.value.hash(state);
    }
}

impl Fp {
    pub fn new(v: u64, p: u64) -> Self {
        Fp {
            value: v % p,
            prime: p,
        }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn attach(&self, p: u64) -> Fp {
        let q = merge_primes(self.prime, p);
        if q == 0 {
            return *self;
        }
        Fp {
            value: self.value % q,
            prime: q,
        }
    }

    pub fn inv(&self) -> Option<Fp> {
        if self.value == 0 {
            None
        } else if self.prime == 0 {
            assert!(self.value == 1, "inverse needs a prime context");
            Some(*self)
        } else {
            Some(Fp {
                value: mod_inverse(self.value, self.prime),
                prime: self.prime,
            })
        }
    }

    /// Lift to a `PLocal` integer in `[0, p)`.
    pub fn lift(&self, p: u64) -> PLocal {
        let q = merge_primes(self.prime, p);
        PLocal::from_int((self.value % q) as i64, q)
    }
}

impl fmt::Debug for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Add for Fp {
    type Output = Fp;
    fn add(self, rhs: Fp) -> Fp {
        let p = merge_primes(self.prime, rhs.prime);
        if p == 0 {
            // both unattached constants; values are 0 or 1
            return Fp {
                value: self.value + rhs.value,
                prime: 0,
            };
        }
        Fp::new(self.value % p + rhs.value % p, p)
    }
}

impl Sub for Fp {
    type Output = Fp;
    fn sub(self, rhs: Fp) -> Fp {
        let p = merge_primes(self.prime, rhs.prime);
        assert!(p != 0 || rhs.value == 0, "subtraction needs a context");
        if p == 0 {
            return self;
        }
        Fp::new(self.value % p + p - rhs.value % p, p)
    }
}

impl Mul for Fp {
    type Output = Fp;
    fn mul(self, rhs: Fp) -> Fp {
        let p = merge_primes(self.prime, rhs.prime);
        if p == 0 {
            return Fp {
                value: self.value * rhs.value,
                prime: 0,
            };
        }
        Fp::new((self.value % p) * (rhs.value % p), p)
    }
}

impl Neg for Fp {
    type Output = Fp;
    fn neg(self) -> Fp {
        if self.prime == 0 {
            assert!(self.value == 0, "negation needs a context");
            return self;
        }
        Fp::new(self.prime - self.value % self.prime, self.prime)
    }
}

impl Zero for Fp {
    fn zero() -> Self {
        Fp { value: 0, prime: 0 }
    }
    fn is_zero(&self) -> bool {
        self.value == 0
    }
}

impl One for Fp {
    fn one() -> Self {
        Fp { value: 1, prime: 0 }
    }
    fn is_one(&self) -> bool {
        self.value == 1 || (self.prime != 0 && self.value % self.prime == 1)
    }
}
