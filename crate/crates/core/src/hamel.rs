//! Symbolic reals: finite rational combinations of basis vectors indexed by
//! canonical binary labels. A label stands for the infinite 0/1 sequence
//! obtained by appending an all-zero tail, so canonical form forbids a
//! trailing '0'.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::rationals::{self, Rational};

/// Canonical finite binary string naming a basis vector.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Label(String);

impl Label {
    /// Accepts only canonical strings: empty, or over {0,1} ending in '1'.
    /// Non-canonical input is rejected, not rewritten.
    pub fn parse(bits: &str) -> Result<Self> {
        if !bits.chars().all(|c| c == '0' || c == '1') {
            return Err(Error::NonCanonicalLabel(bits.to_string()));
        }
        if bits.ends_with('0') {
            return Err(Error::NonCanonicalLabel(bits.to_string()));
        }
        Ok(Label(bits.to_string()))
    }

    pub fn empty() -> Self {
        Label(String::new())
    }

    pub fn bits(&self) -> &str {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// First `i` bits of the zero-extended sequence.
    pub fn restrict(&self, i: u32) -> String {
        let i = i as usize;
        let mut out = String::with_capacity(i);
        for k in 0..i {
            out.push(self.0.as_bytes().get(k).map_or('0', |&b| b as char));
        }
        out
    }

    /// Bit at position `i` of the zero-extended sequence.
    fn bit(&self, i: usize) -> u8 {
        self.0.as_bytes().get(i).map_or(0, |&b| b - b'0')
    }

    /// True iff `prefix` is an initial segment of the zero-extended sequence.
    pub fn extends(&self, prefix: &str) -> bool {
        prefix
            .bytes()
            .enumerate()
            .all(|(i, b)| self.bit(i) == b - b'0')
    }
}

/// Lexicographic order on the denoted elements of 2^omega, 0 before 1.
impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.0 == other.0 {
            return Ordering::Equal;
        }
        let n = self.0.len().max(other.0.len());
        for i in 0..n {
            match self.bit(i).cmp(&other.bit(i)) {
                Ordering::Equal => {}
                ord => return ord,
            }
        }
        // Canonical labels denoting equal sequences are identical strings.
        Ordering::Equal
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y({})", self.0)
    }
}

pub fn lex_compare(a: &Label, b: &Label) -> Ordering {
    a.cmp(b)
}

/// A symbolic real: finite map from labels to nonzero rational coefficients.
/// The key set is the support; the zero vector has empty support.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct HamelVector {
    terms: BTreeMap<Label, Rational>,
}

impl HamelVector {
    pub fn zero() -> Self {
        HamelVector::default()
    }

    pub fn single(label: Label, coeff: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(label, coeff);
        }
        HamelVector { terms }
    }

    /// Builds from (label, coefficient) pairs, merging repeats and dropping
    /// zero totals.
    pub fn from_terms<I: IntoIterator<Item = (Label, Rational)>>(iter: I) -> Self {
        let mut terms: BTreeMap<Label, Rational> = BTreeMap::new();
        for (label, coeff) in iter {
            let entry = terms.entry(label.clone()).or_insert_with(Rational::zero);
            *entry = &*entry + &coeff;
            if entry.is_zero() {
                terms.remove(&label);
            }
        }
        HamelVector { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Support in lexicographic label order.
    pub fn support(&self) -> impl Iterator<Item = &Label> {
        self.terms.keys()
    }

    pub fn support_len(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Label, &Rational)> {
        self.terms.iter()
    }

    /// Coefficient at `label`, zero when absent.
    pub fn coefficient(&self, label: &Label) -> Rational {
        self.terms.get(label).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn contains(&self, label: &Label) -> bool {
        self.terms.contains_key(label)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.terms.clone();
        for (label, coeff) in &other.terms {
            let entry = out.entry(label.clone()).or_insert_with(Rational::zero);
            *entry = &*entry + coeff;
            if entry.is_zero() {
                out.remove(label);
            }
        }
        HamelVector { terms: out }
    }

    pub fn negate(&self) -> Self {
        HamelVector {
            terms: self
                .terms
                .iter()
                .map(|(l, c)| (l.clone(), -c))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.negate())
    }

    /// The separation index: the least n >= 1 at which all support labels
    /// have pairwise distinct length-n prefixes and every coefficient appears
    /// among the first n enumerated rationals.
    pub fn separation_index(&self) -> Result<u32> {
        let mut coeff_bound: u32 = 0;
        for coeff in self.terms.values() {
            let idx = rationals::index_of(coeff)?;
            let j = idx.to_u64().and_then(|j| u32::try_from(j).ok()).ok_or_else(|| {
                Error::Capacity(format!("coefficient {coeff} has an oversized enumeration index"))
            })?;
            coeff_bound = coeff_bound.max(j.checked_add(1).ok_or_else(|| {
                Error::Capacity("separation index overflows u32".into())
            })?);
        }
        // Upward search from 1, as both bounds are tiny at desk scale.
        let labels: Vec<&Label> = self.terms.keys().collect();
        let mut n: u32 = coeff_bound.max(1);
        loop {
            let mut prefixes: Vec<String> = labels.iter().map(|l| l.restrict(n)).collect();
            prefixes.sort();
            prefixes.dedup();
            if prefixes.len() == labels.len() {
                return Ok(n);
            }
            n = n.checked_add(1).ok_or_else(|| {
                Error::Capacity("separation index overflows u32".into())
            })?;
        }
    }

    /// Canonical expression form; parses back via the CLI grammar.
    pub fn to_expression(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        self.terms
            .iter()
            .map(|(l, c)| format!("{c}*{l}"))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl fmt::Display for HamelVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expression())
    }
}
