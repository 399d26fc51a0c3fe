//! Decidable subsets of ℕ with eventually periodic characteristic sequence.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::alphabet::{Symbol, SymbolSet};
use super::epfn::EpFn;
use crate::error::{Error, Result};

const OUT: Symbol = Symbol(0);
const IN: Symbol = Symbol(1);

/// A subset of ℕ read off an eventually periodic `{0,1}`-word (`1` = member).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EpSet {
    bits: EpFn,
}

/// Scenario/CLI encoding: `{"prefix": "1", "period": "10"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpSetWords {
    #[serde(default)]
    pub prefix: String,
    pub period: String,
}

impl EpSet {
    pub fn from_bits(prefix: &[bool], period: &[bool]) -> Result<Self> {
        let conv = |v: &[bool]| v.iter().map(|&b| if b { IN } else { OUT }).collect();
        Ok(EpSet {
            bits: EpFn::new(conv(prefix), conv(period))?,
        })
    }

    pub fn parse(prefix: &str, period: &str) -> Result<Self> {
        let conv = |w: &str| -> Result<Vec<bool>> {
            w.chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    _ => Err(Error::Domain(format!("set words use 0/1, found `{c}`"))),
                })
                .collect()
        };
        EpSet::from_bits(&conv(prefix)?, &conv(period)?)
    }

    /// Parses `prefix/period` or `period` alone.
    pub fn parse_compact(text: &str) -> Result<Self> {
        match text.split_once('/') {
            Some((pre, per)) => EpSet::parse(pre, per),
            None => EpSet::parse("", text),
        }
    }

    pub fn from_words(w: &EpSetWords) -> Result<Self> {
        EpSet::parse(&w.prefix, &w.period)
    }

    pub fn to_words(&self) -> EpSetWords {
        let conv = |v: &[Symbol]| v.iter().map(|&s| if s == IN { '1' } else { '0' }).collect();
        EpSetWords {
            prefix: conv(self.bits.prefix()),
            period: conv(self.bits.period()),
        }
    }

    pub fn everything() -> Self {
        EpSet {
            bits: EpFn::constant(IN),
        }
    }

    pub fn nothing() -> Self {
        EpSet {
            bits: EpFn::constant(OUT),
        }
    }

    /// `{n : n > d}`.
    pub fn tail(d: usize) -> Self {
        EpSet {
            bits: EpFn::new(vec![OUT; d + 1], vec![IN]).expect("nonempty"),
        }
    }

    /// `{n : f(n) ∈ set}`.
    pub fn preimage(f: &EpFn, set: SymbolSet) -> Self {
        EpSet {
            bits: f.map(|s| if set.contains(s) { IN } else { OUT }),
        }
    }

    pub fn as_fn(&self) -> &EpFn {
        &self.bits
    }

    pub fn contains(&self, n: usize) -> bool {
        self.bits.eval(n) == IN
    }

    pub fn complement(&self) -> Self {
        EpSet {
            bits: self.bits.map(|s| if s == IN { OUT } else { IN }),
        }
    }

    pub fn intersection(&self, other: &EpSet) -> Self {
        EpSet {
            bits: self.bits.zip_with(
                &other.bits,
                |a, b| if a == IN && b == IN { IN } else { OUT },
            ),
        }
    }

    pub fn union(&self, other: &EpSet) -> Self {
        EpSet {
            bits: self.bits.zip_with(
                &other.bits,
                |a, b| if a == IN || b == IN { IN } else { OUT },
            ),
        }
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.range().contains(IN)
    }

    pub fn is_finite(&self) -> bool {
        !self.bits.cofinal_range().contains(IN)
    }

    pub fn is_subset(&self, other: &EpSet) -> bool {
        self.difference_witness(other, 0).is_none()
    }

    /// `self ∖ other` is finite, i.e. `self ∩ ⌊d⌋ ⊆ other` for some `d`.
    pub fn almost_subset(&self, other: &EpSet) -> bool {
        let start = self.bits.prefix().len().max(other.bits.prefix().len());
        self.difference_witness(other, start).is_none()
    }

    /// Least `n ≥ from` in `self` but not in `other`, searched over one window.
    fn difference_witness(&self, other: &EpSet, from: usize) -> Option<usize> {
        let end = from.max(self.bits.window(&other.bits)) + self.bits.window(&other.bits);
        (from..end).find(|&n| self.contains(n) && !other.contains(n))
    }

    /// Length of the canonical period.
    pub fn period_len(&self) -> usize {
        self.bits.period().len()
    }

    pub fn prefix_len(&self) -> usize {
        self.bits.prefix().len()
    }
}

impl fmt::Display for EpSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.to_words();
        write!(f, "{}({})^ω", w.prefix, w.period)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_sets() {
        let evens = EpSet::parse("", "10").unwrap();
        let odds = EpSet::parse("", "01").unwrap();
        assert_eq!(evens.complement(), odds);
        assert!(evens.intersection(&odds).is_empty());
        assert_eq!(evens.union(&odds), EpSet::everything());
        assert!(EpSet::tail(3).contains(4) && !EpSet::tail(3).contains(3));
        assert!(EpSet::tail(3).almost_subset(&EpSet::everything()));
        assert!(!EpSet::everything().almost_subset(&evens));
        assert!(EpSet::parse("1111", "0")
            .unwrap()
            .almost_subset(&EpSet::nothing()));
        assert!(EpSet::parse("1111", "0").unwrap().is_finite());
        assert_eq!(
            EpSet::parse_compact("1/10").unwrap(),
            EpSet::parse("1", "10").unwrap()
        );
        assert!(EpSet::parse("", "12").is_err());
    }

    #[test]
    fn almost_subset_against_enumeration() {
        let words = ["", "1", "0", "01", "110", "0010"];
        let periods = ["1", "0", "10", "01", "110", "1000", "011"];
        let mut sets = Vec::new();
        for w in words {
            for p in periods {
                sets.push(EpSet::parse(w, p).unwrap());
            }
        }
        for a in &sets {
            for b in &sets {
                // beyond index 200 everything has repeated many times over
                let brute = (0..400)
                    .filter(|&n| a.contains(n) && !b.contains(n))
                    .all(|n| n < 200);
                assert_eq!(a.almost_subset(b), brute, "{a} ⊆* {b}");
                let exact = (0..400).all(|n| !a.contains(n) || b.contains(n));
                assert_eq!(a.is_subset(b), exact, "{a} ⊆ {b}");
            }
        }
    }
}
