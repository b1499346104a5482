//! A concrete embedding of the code space into the reals: each coordinate
//! owns a fixed block of ternary digit positions, each possible entry one
//! position inside the block, and a present entry contributes the digit 2 at
//! its position. Bit-position agreement is then coordinate agreement, and the
//! standard Cantor gap gives the inverse an explicit modulus of continuity.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::RwLock;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use once_cell::sync::Lazy;

use crate::encoder::{encode, CodePoint, CoordinateEntry};
use crate::error::{Error, Result};
use crate::hamel::HamelVector;
use crate::rationals::Rational;

/// Bound on the largest non-empty coordinate an embedded point may carry.
#[derive(Clone, Copy, Debug)]
pub struct EmbedConfig {
    pub n_max: u32,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        EmbedConfig { n_max: 5 }
    }
}

const MAX_BLOCK_INDEX: u32 = 20;

/// Number of digit positions owned by coordinate i: one per possible entry,
/// |2^i x {0,1} x P(i) x P(i)| = 2^(3i+1).
pub fn block_length(i: u32) -> u64 {
    assert!(i <= MAX_BLOCK_INDEX);
    1u64 << (3 * i + 1)
}

/// First digit position of coordinate k's block: the sum of the earlier
/// block lengths, 2(8^k - 1)/7.
pub fn block_offset(k: u32) -> u64 {
    assert!(k <= MAX_BLOCK_INDEX);
    (0..k).map(block_length).sum()
}

/// Canonical position of an entry inside its coordinate's block. Reads zeta
/// as a big-endian integer and the comparison sets as membership masks;
/// injective per width, with range 0..2^(3i+1).
pub fn entry_rank(e: &CoordinateEntry) -> u64 {
    let i = e.width();
    assert!(i <= MAX_BLOCK_INDEX);
    let zeta_val = e
        .zeta
        .bytes()
        .fold(0u64, |acc, b| acc * 2 + (b - b'0') as u64);
    (((zeta_val * 2 + e.parity as u64) << i) | e.k_eta.mask()) << i | e.k_xi.mask()
}

static POW3_CACHE: Lazy<RwLock<HashMap<u64, BigUint>>> = Lazy::new(|| RwLock::new(HashMap::new()));

/// 3^e, cached. Exponents repeat heavily across a campaign.
pub(crate) fn pow3(e: u64) -> BigUint {
    if let Some(v) = POW3_CACHE.read().unwrap().get(&e) {
        return v.clone();
    }
    let v = BigUint::from(3u8).pow(u32::try_from(e).expect("exponent fits u32"));
    POW3_CACHE.write().unwrap().insert(e, v.clone());
    v
}

/// An exact value num / 3^exp with num coprime to 3 (zero is 0 / 3^0).
/// Embed outputs and their differences live here so the hot comparison paths
/// never run a general big-integer gcd.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct CantorValue {
    num: BigUint,
    exp: u64,
}

impl CantorValue {
    pub fn zero() -> Self {
        CantorValue { num: BigUint::zero(), exp: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn normalize(mut num: BigUint, mut exp: u64) -> Self {
        if num.is_zero() {
            return CantorValue::zero();
        }
        // Strip factors of 3 in chunks, then singly.
        let chunk = BigUint::from(3u64.pow(32));
        while exp >= 32 {
            let (q, r) = num.div_rem(&chunk);
            if r.is_zero() {
                num = q;
                exp -= 32;
            } else {
                break;
            }
        }
        let three = BigUint::from(3u8);
        while exp > 0 {
            let (q, r) = num.div_rem(&three);
            if r.is_zero() {
                num = q;
                exp -= 1;
            } else {
                break;
            }
        }
        CantorValue { num, exp }
    }

    /// |a - b|, exact.
    pub fn abs_diff(&self, other: &Self) -> Self {
        let exp = self.exp.max(other.exp);
        let a = &self.num * pow3(exp - self.exp);
        let b = &other.num * pow3(exp - other.exp);
        let num = if a >= b { a - b } else { b - a };
        CantorValue::normalize(num, exp)
    }

    /// True iff the value is >= 3^-e.
    pub fn at_least_pow3_neg(&self, e: u64) -> bool {
        if self.num.is_zero() {
            return false;
        }
        if e >= self.exp {
            true
        } else {
            self.num >= pow3(self.exp - e)
        }
    }

    pub fn to_rational(&self) -> Rational {
        Rational::from_ternary(self.num.clone(), self.exp)
    }

    /// Factored display "p/3^e"; "0" when zero, "p" when the exponent is 0.
    pub fn factored(&self) -> String {
        if self.num.is_zero() {
            "0".to_string()
        } else if self.exp == 0 {
            format!("{}", self.num)
        } else {
            format!("{}/3^{}", self.num, self.exp)
        }
    }
}

impl PartialOrd for CantorValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CantorValue {
    fn cmp(&self, other: &Self) -> Ordering {
        let exp = self.exp.max(other.exp);
        let a = &self.num * pow3(exp - self.exp);
        let b = &other.num * pow3(exp - other.exp);
        a.cmp(&b)
    }
}

/// Digit positions occupied by a code point, in increasing order.
fn digit_positions(t: &CodePoint, cfg: &EmbedConfig) -> Result<Vec<u64>> {
    let mut positions = Vec::new();
    for (i, coord) in t.coordinates() {
        if coord.is_empty() {
            continue;
        }
        if i as u32 > cfg.n_max {
            return Err(Error::Capacity(format!(
                "non-empty coordinate {i} exceeds n_max = {}",
                cfg.n_max
            )));
        }
        let base = block_offset(i as u32);
        for e in coord {
            positions.push(base + entry_rank(e));
        }
    }
    positions.sort_unstable();
    Ok(positions)
}

/// The embedding, as an exact ternary value: the sum over present entries of
/// 2 * 3^-(position + 1).
pub fn embed_raw(t: &CodePoint, cfg: &EmbedConfig) -> Result<CantorValue> {
    let positions = digit_positions(t, cfg)?;
    let Some(&max_pos) = positions.last() else {
        return Ok(CantorValue::zero());
    };
    let two = BigUint::from(2u8);
    let mut num = BigUint::zero();
    for pos in positions {
        num += &two * pow3(max_pos - pos);
    }
    // num = 2 mod 3 thanks to the max-position term, so this is reduced.
    Ok(CantorValue { num, exp: max_pos + 1 })
}

/// The embedding as a rational in [0,1) with a power-of-3 denominator.
pub fn embed(t: &CodePoint, cfg: &EmbedConfig) -> Result<Rational> {
    Ok(embed_raw(t, cfg)?.to_rational())
}

/// The per-point threshold 3^-B(n+1): values closer than this decode to
/// points agreeing on coordinates 0..n.
pub fn epsilon(x: &HamelVector, cfg: &EmbedConfig) -> Result<Rational> {
    Ok(CantorValue { num: BigUint::one(), exp: epsilon_exponent(x, cfg)? }.to_rational())
}

/// Exponent e with epsilon = 3^-e.
pub fn epsilon_exponent(x: &HamelVector, cfg: &EmbedConfig) -> Result<u64> {
    let n = x.separation_index()?;
    if n + 1 > cfg.n_max {
        return Err(Error::Capacity(format!(
            "separation index {n} + 1 exceeds n_max = {}",
            cfg.n_max
        )));
    }
    Ok(block_offset(n + 1))
}

/// The composed function: embed the code of x.
pub fn eval(x: &HamelVector, cfg: &EmbedConfig) -> Result<Rational> {
    Ok(eval_raw(x, cfg)?.to_rational())
}

pub fn eval_raw(x: &HamelVector, cfg: &EmbedConfig) -> Result<CantorValue> {
    embed_raw(&encode(x)?, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamel::Label;
    use crate::rationals::KSet;
    use num_bigint::BigInt;

    fn v1(label: &str, p: i64, q: i64) -> HamelVector {
        HamelVector::single(Label::parse(label).unwrap(), Rational::ratio(p, q))
    }

    #[test]
    fn block_layout_values() {
        assert_eq!(block_length(0), 2);
        assert_eq!(block_length(1), 16);
        assert_eq!(block_length(2), 128);
        assert_eq!(block_offset(1), 2);
        assert_eq!(block_offset(2), 18);
        assert_eq!(block_offset(3), 146);
        assert_eq!(block_offset(4), 1170);
        assert_eq!(block_offset(5), 9362);
    }

    fn entry(zeta: &str, parity: u8, k_eta: KSet, k_xi: KSet) -> CoordinateEntry {
        CoordinateEntry { zeta: zeta.into(), parity, k_eta, k_xi }
    }

    #[test]
    fn entry_rank_width_zero() {
        let e0 = entry("", 0, KSet::empty(0), KSet::empty(0));
        let e1 = entry("", 1, KSet::empty(0), KSet::empty(0));
        assert_eq!(entry_rank(&e0), 0);
        assert_eq!(entry_rank(&e1), 1);
    }

    #[test]
    fn entry_rank_width_one_bijection() {
        // All 16 width-1 entries map onto 0..16 exactly once.
        let one = Rational::from_integer(1);
        let full = crate::rationals::k_set(1, &one);
        assert_eq!(full.mask(), 1);
        let sets = [KSet::empty(1), full];
        let mut seen = vec![false; 16];
        for zeta in ["0", "1"] {
            for parity in [0u8, 1] {
                for ke in sets {
                    for kx in sets {
                        let r = entry_rank(&entry(zeta, parity, ke, kx)) as usize;
                        assert!(r < 16 && !seen[r], "rank {r} out of range or repeated");
                        seen[r] = true;
                    }
                }
            }
        }
        assert!(seen.iter().all(|&s| s));
        assert_eq!(entry_rank(&entry("1", 1, full, full)), 15);
    }

    #[test]
    fn embed_empty_point_is_zero() {
        let cfg = EmbedConfig::default();
        assert_eq!(embed(&CodePoint::empty(), &cfg).unwrap(), Rational::zero());
    }

    #[test]
    fn embed_single_entry() {
        // Entry <"",1,{},{}> at coordinate 0: rank 1, so 2 * 3^-2 = 2/9.
        let cfg = EmbedConfig::default();
        let t = CodePoint::new(vec![vec![entry("", 1, KSet::empty(0), KSet::empty(0))]]).unwrap();
        assert_eq!(embed(&t, &cfg).unwrap(), Rational::ratio(2, 9));
    }

    #[test]
    fn embed_matches_direct_sum_oracle() {
        // Oracle: sum the terms 2*3^-(pos+1) with plain rational arithmetic.
        let cfg = EmbedConfig::default();
        let x = HamelVector::from_terms([
            (Label::parse("").unwrap(), Rational::from_integer(1)),
            (Label::parse("1").unwrap(), Rational::from_integer(1)),
        ]);
        let t = encode(&x).unwrap();
        let mut expected = Rational::zero();
        for (i, coord) in t.coordinates() {
            for e in coord {
                let pos = block_offset(i as u32) + entry_rank(e);
                let term = Rational::new(
                    BigInt::from(2),
                    BigInt::from(3u8).pow(pos as u32 + 1),
                )
                .unwrap();
                expected = &expected + &term;
            }
        }
        assert_eq!(embed(&t, &cfg).unwrap(), expected);
    }

    #[test]
    fn embed_denominator_is_power_of_three() {
        let cfg = EmbedConfig::default();
        let val = eval(&v1("", 1, 1), &cfg).unwrap();
        // Coordinates 0..2 occupy digit positions below B(3) = 146.
        let budget = BigInt::from(3u8).pow(146);
        assert!((&budget % val.denom()).is_zero());
    }

    #[test]
    fn embed_capacity_error() {
        let cfg = EmbedConfig { n_max: 1 };
        // n_x = 2 puts a non-empty coordinate at index 2.
        let err = eval_raw(&v1("", 1, 1), &cfg).unwrap_err();
        assert!(matches!(err, Error::Capacity(_)));
    }

    #[test]
    fn epsilon_values() {
        let cfg = EmbedConfig::default();
        let e0 = epsilon_exponent(&HamelVector::zero(), &cfg).unwrap();
        assert_eq!(e0, 18);
        let e1 = epsilon_exponent(&v1("", 1, 1), &cfg).unwrap();
        assert_eq!(e1, 146);
    }

    #[test]
    fn eval_of_zero_is_zero() {
        let cfg = EmbedConfig::default();
        assert_eq!(eval(&HamelVector::zero(), &cfg).unwrap(), Rational::zero());
    }

    #[test]
    fn cantor_value_ordering_and_diff() {
        let a = CantorValue { num: BigUint::from(2u8), exp: 2 }; // 2/9
        let b = CantorValue { num: BigUint::from(2u8), exp: 1 }; // 2/3
        assert!(a < b);
        let d = a.abs_diff(&b); // 4/9
        assert_eq!(d.to_rational(), Rational::ratio(4, 9));
        assert!(d.at_least_pow3_neg(2));
        assert!(!d.at_least_pow3_neg(0));
        assert!(a.abs_diff(&a).is_zero());
    }

    #[test]
    fn separation_bound_on_pairs() {
        // Distinct points differing first at global digit position m keep
        // their embeddings at least 3^-(m+1) apart.
        let cfg = EmbedConfig::default();
        let one = Rational::from_integer(1);
        let full = crate::rationals::k_set(1, &one);
        let mk = |entries: Vec<Vec<CoordinateEntry>>| CodePoint::new(entries).unwrap();
        let pts = [
            CodePoint::empty(),
            mk(vec![vec![entry("", 0, KSet::empty(0), KSet::empty(0))]]),
            mk(vec![vec![entry("", 1, KSet::empty(0), KSet::empty(0))]]),
            mk(vec![vec![], vec![entry("0", 1, full, full)]]),
            mk(vec![
                vec![entry("", 1, KSet::empty(0), KSet::empty(0))],
                vec![entry("1", 0, KSet::empty(1), full)],
            ]),
        ];
        for s in &pts {
            for t in &pts {
                if s == t {
                    continue;
                }
                let ps = digit_positions(s, &cfg).unwrap();
                let pt = digit_positions(t, &cfg).unwrap();
                let m = ps
                    .iter()
                    .filter(|p| !pt.contains(p))
                    .chain(pt.iter().filter(|p| !ps.contains(p)))
                    .min()
                    .copied()
                    .unwrap();
                let diff = embed_raw(s, &cfg).unwrap().abs_diff(&embed_raw(t, &cfg).unwrap());
                assert!(diff.at_least_pow3_neg(m + 1), "s={s:?} t={t:?}");
            }
        }
    }
}
