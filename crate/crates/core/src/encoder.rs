//! The code map from symbolic reals into the countable part of the product
//! space: per-coordinate entry sets, the prefix selectors, the ultrametric,
//! and the per-point tolerance.

use std::collections::BTreeSet;

use serde::ser::{Serialize, SerializeMap, SerializeSeq, Serializer};

use crate::error::{Error, Result};
use crate::hamel::{HamelVector, Label};
use crate::rationals::{k_set, KSet, Rational};

/// One element of a coordinate value: prefix, extension-count parity, and the
/// two comparison sets attached to the least and second-least extensions.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct CoordinateEntry {
    pub zeta: String,
    pub parity: u8,
    pub k_eta: KSet,
    pub k_xi: KSet,
}

impl CoordinateEntry {
    pub fn width(&self) -> u32 {
        self.zeta.len() as u32
    }
}

/// A point of the countable code space: finitely many non-empty coordinates,
/// each a set of entries of common width; everything beyond is implicitly
/// the empty set.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct CodePoint {
    coords: Vec<Vec<CoordinateEntry>>,
}

impl CodePoint {
    /// Normalizes: sorts entries within each coordinate, checks widths and
    /// zeta uniqueness, trims trailing empty coordinates.
    pub fn new(mut coords: Vec<Vec<CoordinateEntry>>) -> Result<Self> {
        for (i, coord) in coords.iter_mut().enumerate() {
            coord.sort();
            for pair in coord.windows(2) {
                if pair[0].zeta == pair[1].zeta {
                    return Err(Error::Precondition(format!(
                        "duplicate zeta \"{}\" at coordinate {i}",
                        pair[0].zeta
                    )));
                }
            }
            if coord.iter().any(|e| e.width() != i as u32) {
                return Err(Error::Precondition(format!(
                    "entry width mismatch at coordinate {i}"
                )));
            }
        }
        while coords.last().is_some_and(Vec::is_empty) {
            coords.pop();
        }
        Ok(CodePoint { coords })
    }

    pub fn empty() -> Self {
        CodePoint::default()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    /// Coordinate i, the empty set beyond the stored length.
    pub fn coordinate(&self, i: usize) -> &[CoordinateEntry] {
        self.coords.get(i).map_or(&[], Vec::as_slice)
    }

    pub fn coordinates(&self) -> impl Iterator<Item = (usize, &[CoordinateEntry])> {
        self.coords.iter().enumerate().map(|(i, c)| (i, c.as_slice()))
    }
}

// Wire form: array of coordinates, each an array of entries with the
// comparison sets as little-endian membership bit strings.
impl Serialize for CoordinateEntry {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(4))?;
        map.serialize_entry("zeta", &self.zeta)?;
        map.serialize_entry("parity", &self.parity)?;
        map.serialize_entry("k_eta", &self.k_eta.mask_string())?;
        map.serialize_entry("k_xi", &self.k_xi.mask_string())?;
        map.end()
    }
}

impl Serialize for CodePoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.coords.len()))?;
        for coord in &self.coords {
            seq.serialize_element(coord)?;
        }
        seq.end()
    }
}

/// The lex-least support label extending `prefix`.
pub fn least_extension(x: &HamelVector, prefix: &str) -> Result<Label> {
    x.support()
        .find(|l| l.extends(prefix))
        .cloned()
        .ok_or_else(|| Error::NoExtension(prefix.to_string()))
}

/// The second-least support label extending `prefix` when two or more exist;
/// otherwise the least one.
pub fn second_extension(x: &HamelVector, prefix: &str) -> Result<Label> {
    let mut it = x.support().filter(|l| l.extends(prefix));
    let first = it
        .next()
        .ok_or_else(|| Error::NoExtension(prefix.to_string()))?;
    Ok(it.next().unwrap_or(first).clone())
}

/// Encodes a symbolic real. Coordinates 0..=n carry one entry per distinct
/// length-i prefix of the support; the zero vector encodes to the all-empty
/// point. The comparison-set representation limits n to 64.
pub fn encode(x: &HamelVector) -> Result<CodePoint> {
    let n = x.separation_index()?;
    if n > 64 {
        return Err(Error::Capacity(format!(
            "separation index {n} exceeds the 64-coordinate budget"
        )));
    }
    encode_up_to(x, n)
}

/// Coordinates 0..=min(n, max_coord) of the code of x. Agreement of two such
/// prefixes at every coordinate up to k decides whether the full codes are
/// closer than 2^-k, which is all the lemma checks ever need.
pub fn encode_up_to(x: &HamelVector, max_coord: u32) -> Result<CodePoint> {
    assert!(max_coord <= 64, "coordinate budget limited to 64");
    if x.is_zero() {
        return Ok(CodePoint::empty());
    }
    let n = x.separation_index()?.min(max_coord);
    let mut coords = Vec::with_capacity(n as usize + 1);
    for i in 0..=n {
        let prefixes: BTreeSet<String> = x.support().map(|l| l.restrict(i)).collect();
        let mut coord = Vec::with_capacity(prefixes.len());
        for zeta in prefixes {
            let count = x.support().filter(|l| l.extends(&zeta)).count();
            let eta = least_extension(x, &zeta)?;
            let xi = second_extension(x, &zeta)?;
            coord.push(CoordinateEntry {
                parity: (count % 2) as u8,
                k_eta: k_set(i, &x.coefficient(&eta)),
                k_xi: k_set(i, &x.coefficient(&xi)),
                zeta,
            });
        }
        coords.push(coord);
    }
    CodePoint::new(coords)
}

/// The ultrametric: 2^-i for the least coordinate where the points differ,
/// zero when equal (implicit empty tails included).
pub fn distance(s: &CodePoint, t: &CodePoint) -> Rational {
    let len = s.len().max(t.len());
    for i in 0..len {
        if s.coordinate(i) != t.coordinate(i) {
            return Rational::pow2_neg(i as u32);
        }
    }
    Rational::zero()
}

/// 2^-n for n the separation index of x.
pub fn delta(x: &HamelVector) -> Result<Rational> {
    Ok(Rational::pow2_neg(x.separation_index()?))
}
