//! A fixed computable bijection between natural numbers and the rationals,
//! with index 0 mapped to 0, plus the initial-segment comparison sets used
//! by the coordinate encoder.
//!
//! The scheme interleaves signs over the Calkin-Wilf tree in breadth-first
//! (heap) order: node 1 is 1/1, node m has children a/(a+b) and (a+b)/b.
//! Index 2m-1 is +cw(m), index 2m is -cw(m).

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational number in lowest terms, denominator >= 1.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn new(num: BigInt, den: BigInt) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Precondition("zero denominator".into()));
        }
        Ok(Rational(BigRational::new(num, den)))
    }

    /// Fraction p/q from machine integers; q must be nonzero.
    pub fn ratio(p: i64, q: i64) -> Self {
        Rational(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    /// 2^-k.
    pub fn pow2_neg(k: u32) -> Self {
        let den = BigInt::one() << (k as usize);
        Rational(BigRational::new_raw(BigInt::one(), den))
    }

    /// num / 3^exp where num is already coprime to 3 (or zero).
    pub(crate) fn from_ternary(num: BigUint, exp: u64) -> Self {
        if num.is_zero() {
            return Rational::zero();
        }
        let den = BigUint::from(3u8).pow(exp.try_into().expect("exponent fits u32"));
        Rational(BigRational::new_raw(
            BigInt::from_biguint(Sign::Plus, num),
            BigInt::from_biguint(Sign::Plus, den),
        ))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    /// Parses "p", "-p" or "p/q" in canonical lowest terms.
    pub fn parse(text: &str) -> Result<Self> {
        let s = text.trim();
        let (num_s, den_s) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), Some(d.trim())),
            None => (s, None),
        };
        let num: BigInt = num_s.parse().map_err(|_| Error::Parse {
            position: 0,
            message: format!("invalid integer \"{num_s}\""),
        })?;
        let den: BigInt = match den_s {
            Some(d) => d.parse().map_err(|_| Error::Parse {
                position: 0,
                message: format!("invalid denominator \"{d}\""),
            })?,
            None => BigInt::one(),
        };
        Rational::new(num, den)
    }

    /// Inexact decimal preview, for display only.
    pub fn approx(&self) -> f64 {
        let n = self.0.numer();
        let d = self.0.denom();
        // Good enough for previews at desk scale.
        let nf = n.to_string().parse::<f64>().unwrap_or(f64::NAN);
        let df = d.to_string().parse::<f64>().unwrap_or(f64::NAN);
        nf / df
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl std::ops::Add for &Rational {
    type Output = Rational;
    fn add(self, rhs: &Rational) -> Rational {
        Rational(&self.0 + &rhs.0)
    }
}

impl std::ops::Sub for &Rational {
    type Output = Rational;
    fn sub(self, rhs: &Rational) -> Rational {
        Rational(&self.0 - &rhs.0)
    }
}

impl std::ops::Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl std::ops::Mul for &Rational {
    type Output = Rational;
    fn mul(self, rhs: &Rational) -> Rational {
        Rational(&self.0 * &rhs.0)
    }
}

/// Position in the fixed enumeration of the rationals.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct RationalIndex(pub BigUint);

impl RationalIndex {
    pub fn from_u64(j: u64) -> Self {
        RationalIndex(BigUint::from(j))
    }

    pub fn to_u64(&self) -> Option<u64> {
        u64::try_from(&self.0).ok()
    }

    /// True iff this index is strictly below `n`.
    pub fn below(&self, n: u32) -> bool {
        self.0 < BigUint::from(n)
    }
}

impl fmt::Display for RationalIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

// Total path bits allowed when recovering an index; beyond this the index
// value itself is astronomically large and nothing downstream could use it.
const INDEX_BIT_CAP: u64 = 1 << 20;

/// Calkin-Wilf node value for heap position m >= 1, walking the bits of m
/// below its leading one: 0 takes the left child a/(a+b), 1 the right (a+b)/b.
fn calkin_wilf(m: &BigUint) -> (BigUint, BigUint) {
    let mut a = BigUint::one();
    let mut b = BigUint::one();
    let bits = m.bits();
    for k in (0..bits.saturating_sub(1)).rev() {
        if m.bit(k) {
            a += &b;
        } else {
            b += &a;
        }
    }
    (a, b)
}

/// The j-th rational of the fixed enumeration.
pub fn enumerate(j: &RationalIndex) -> Rational {
    if j.0.is_zero() {
        return Rational::zero();
    }
    let m = (&j.0 + BigUint::one()) >> 1;
    let (p, q) = calkin_wilf(&m);
    let positive = j.0.bit(0); // odd index -> positive
    let sign = if positive { Sign::Plus } else { Sign::Minus };
    Rational(BigRational::new_raw(
        BigInt::from_biguint(sign, p),
        BigInt::from_biguint(Sign::Plus, q),
    ))
}

/// Convenience for small indices.
pub fn enumerate_u64(j: u64) -> Rational {
    enumerate(&RationalIndex::from_u64(j))
}

/// Exact inverse of `enumerate`. Walks the Calkin-Wilf tree upward in
/// quotient-sized runs, so large-entry fractions do not loop step by step.
pub fn index_of(q: &Rational) -> Result<RationalIndex> {
    if q.is_zero() {
        return Ok(RationalIndex(BigUint::zero()));
    }
    let positive = !q.is_negative();
    let mut p = q.numer().magnitude().clone();
    let mut d = q.denom().magnitude().clone();
    // Runs of identical path bits, collected leaf to root.
    let mut runs: Vec<(bool, BigUint)> = Vec::new();
    let mut total_bits = BigUint::zero();
    let one = BigUint::one();
    while !(p.is_one() && d.is_one()) {
        if p > d {
            let k = (&p - &one) / &d;
            p -= &k * &d;
            total_bits += &k;
            runs.push((true, k));
        } else {
            let k = (&d - &one) / &p;
            d -= &k * &p;
            total_bits += &k;
            runs.push((false, k));
        }
        if total_bits > BigUint::from(INDEX_BIT_CAP) {
            return Err(Error::Capacity(format!(
                "enumeration index of {q} exceeds {INDEX_BIT_CAP} bits"
            )));
        }
    }
    let mut m = BigUint::one();
    for (bit, k) in runs.iter().rev() {
        let k = u64::try_from(k).expect("run length bounded by bit cap");
        m <<= k;
        if *bit {
            // k consecutive one-bits
            m += (BigUint::one() << k) - &one;
        }
    }
    let j = if positive {
        (&m << 1) - &one
    } else {
        &m << 1
    };
    Ok(RationalIndex(j))
}

/// Width-tagged subset of the first `width` enumerated rationals,
/// bit j set iff q_j is a member.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct KSet {
    width: u32,
    mask: u64,
}

impl KSet {
    pub fn empty(width: u32) -> Self {
        assert!(width <= 64, "k-set width limited to 64");
        KSet { width, mask: 0 }
    }

    pub fn from_mask(width: u32, mask: u64) -> Self {
        assert!(width <= 64, "k-set width limited to 64");
        assert!(width == 64 || mask >> width == 0, "mask exceeds width");
        KSet { width, mask }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn contains(&self, j: u32) -> bool {
        j < self.width && self.mask >> j & 1 == 1
    }

    pub fn len(&self) -> u32 {
        self.mask.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    /// Little-endian bit string of length `width`: character j is the
    /// membership bit of q_j.
    pub fn mask_string(&self) -> String {
        (0..self.width)
            .map(|j| if self.contains(j) { '1' } else { '0' })
            .collect()
    }
}

/// k_i(q): the indices j < i whose enumerated rational lies strictly below q.
pub fn k_set(i: u32, q: &Rational) -> KSet {
    assert!(i <= 64, "k-set width limited to 64");
    let mut mask = 0u64;
    for j in 0..i {
        if enumerate_u64(j as u64).cmp(q) == Ordering::Less {
            mask |= 1 << j;
        }
    }
    KSet { width: i, mask }
}
