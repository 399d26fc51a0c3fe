use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard limit on alphabet size; symbol sets are 64-bit masks.
pub const MAX_SYMBOLS: usize = 64;

/// A symbol, identified by its position in the [`Alphabet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Symbol(pub u8);

impl Symbol {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A finite set of symbols. Doubles as the group element type: the group law
/// is symmetric difference.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
pub struct SymbolSet(pub u64);

impl SymbolSet {
    pub const EMPTY: SymbolSet = SymbolSet(0);

    pub fn singleton(s: Symbol) -> Self {
        SymbolSet(1 << s.0)
    }

    /// All symbols `0..n`.
    pub fn full(n: usize) -> Self {
        if n >= 64 {
            SymbolSet(u64::MAX)
        } else {
            SymbolSet((1u64 << n) - 1)
        }
    }

    pub fn contains(self, s: Symbol) -> bool {
        self.0 >> s.0 & 1 == 1
    }

    pub fn insert(&mut self, s: Symbol) {
        self.0 |= 1 << s.0;
    }

    pub fn toggle(&mut self, s: Symbol) {
        self.0 ^= 1 << s.0;
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn delta(self, other: Self) -> Self {
        SymbolSet(self.0 ^ other.0)
    }

    pub fn union(self, other: Self) -> Self {
        SymbolSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        SymbolSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        SymbolSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn min(self) -> Option<Symbol> {
        (self.0 != 0).then(|| Symbol(self.0.trailing_zeros() as u8))
    }

    /// Symbols in ascending (alphabet) order.
    pub fn iter(self) -> impl Iterator<Item = Symbol> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let s = bits.trailing_zeros() as u8;
            bits &= bits - 1;
            Some(Symbol(s))
        })
    }

    /// Every subset of `self`, ordered by size and then lexicographically on
    /// the ascending element list.
    pub fn subsets(self) -> Vec<SymbolSet> {
        let elems: Vec<Symbol> = self.iter().collect();
        let mut out = Vec::with_capacity(1 << elems.len());
        for mask in 0u64..(1u64 << elems.len()) {
            let mut s = SymbolSet::EMPTY;
            for (k, e) in elems.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    s.insert(*e);
                }
            }
            out.push(s);
        }
        out.sort_by_key(|s| (s.len(), s.iter().map(|x| x.0).collect::<Vec<_>>()));
        out
    }
}

impl FromIterator<Symbol> for SymbolSet {
    fn from_iter<T: IntoIterator<Item = Symbol>>(iter: T) -> Self {
        let mut s = SymbolSet::EMPTY;
        for x in iter {
            s.insert(x);
        }
        s
    }
}

/// The declared symbols. Declaration order is the total order used wherever a
/// minimum is taken.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl TryFrom<Vec<String>> for Alphabet {
    type Error = Error;

    fn try_from(symbols: Vec<String>) -> Result<Self> {
        Alphabet::new(symbols)
    }
}

impl From<Alphabet> for Vec<String> {
    fn from(a: Alphabet) -> Self {
        a.symbols
    }
}

impl Alphabet {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Result<Self> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::InvalidAlphabet("alphabet is empty".into()));
        }
        if symbols.len() > MAX_SYMBOLS {
            return Err(Error::AlphabetExhausted {
                requested: symbols.len(),
                limit: MAX_SYMBOLS,
            });
        }
        for (k, s) in symbols.iter().enumerate() {
            if s.is_empty()
                || s.contains(|c: char| c == ',' || c == '{' || c == '}' || c.is_whitespace())
            {
                return Err(Error::InvalidAlphabet(format!("bad symbol name `{s}`")));
            }
            if symbols[..k].contains(s) {
                return Err(Error::InvalidAlphabet(format!("duplicate symbol `{s}`")));
            }
        }
        Ok(Alphabet { symbols })
    }

    /// `i0, i1, …, i{n-1}`.
    pub fn indexed(n: usize) -> Result<Self> {
        Alphabet::new((0..n).map(|k| format!("i{k}")))
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn all(&self) -> SymbolSet {
        SymbolSet::full(self.len())
    }

    pub fn name(&self, s: Symbol) -> &str {
        &self.symbols[s.index()]
    }

    pub fn symbol(&self, name: &str) -> Result<Symbol> {
        self.symbols
            .iter()
            .position(|x| x == name)
            .map(|k| Symbol(k as u8))
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))
    }

    /// Appends fresh symbols, failing once `limit` (capped at [`MAX_SYMBOLS`])
    /// would be exceeded.
    pub fn extended(&self, extra: &[String], limit: usize) -> Result<Self> {
        let limit = limit.min(MAX_SYMBOLS);
        let requested = self.len() + extra.len();
        if requested > limit {
            return Err(Error::AlphabetExhausted { requested, limit });
        }
        let mut symbols = self.symbols.clone();
        symbols.extend(extra.iter().cloned());
        Alphabet::new(symbols)
    }

    /// A name not yet used, derived from `base`.
    pub fn fresh_name(&self, base: &str, taken: &[String]) -> String {
        let mut name = base.to_string();
        while self.symbols.contains(&name) || taken.contains(&name) {
            name.push('\'');
        }
        name
    }

    pub fn format_set(&self, set: SymbolSet) -> String {
        SetDisplay {
            alphabet: self,
            set,
        }
        .to_string()
    }

    /// Parses `{a,b}` (braces optional, `{}` for the empty set).
    pub fn parse_set(&self, text: &str) -> Result<SymbolSet> {
        let inner = text.trim().trim_start_matches('{').trim_end_matches('}');
        let mut set = SymbolSet::EMPTY;
        for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            set.insert(self.symbol(part)?);
        }
        Ok(set)
    }

    pub fn set_names(&self, set: SymbolSet) -> Vec<String> {
        set.iter().map(|s| self.name(s).to_string()).collect()
    }

    pub fn set_from_names<S: AsRef<str>>(&self, names: &[S]) -> Result<SymbolSet> {
        names.iter().map(|n| self.symbol(n.as_ref())).collect()
    }

    /// Reads a word: each character is one symbol when every symbol name is a
    /// single character.
    pub fn parse_word(&self, text: &str) -> Result<Vec<Symbol>> {
        text.chars().map(|c| self.symbol(&c.to_string())).collect()
    }

    pub fn format_word(&self, word: &[Symbol]) -> String {
        word.iter()
            .map(|s| self.name(*s))
            .collect::<Vec<_>>()
            .join("")
    }

    pub fn single_char(&self) -> bool {
        self.symbols.iter().all(|s| s.chars().count() == 1)
    }
}

struct SetDisplay<'a> {
    alphabet: &'a Alphabet,
    set: SymbolSet,
}

impl fmt::Display for SetDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, s) in self.set.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", self.alphabet.name(s))?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_algebra() {
        let a = SymbolSet::singleton(Symbol(0));
        let b = SymbolSet::singleton(Symbol(1));
        assert_eq!(a.delta(a), SymbolSet::EMPTY);
        assert_eq!(a.delta(b), a.union(b));
        assert_eq!(a.union(b).delta(b), a);
    }

    #[test]
    fn subset_order_is_size_then_lex() {
        let s = SymbolSet::full(3);
        let names: Vec<Vec<u8>> = s
            .subsets()
            .iter()
            .map(|x| x.iter().map(|y| y.0).collect())
            .collect();
        assert_eq!(
            names,
            vec![
                vec![],
                vec![0],
                vec![1],
                vec![2],
                vec![0, 1],
                vec![0, 2],
                vec![1, 2],
                vec![0, 1, 2]
            ]
        );
    }

    #[test]
    fn alphabet_validation_and_sets() {
        assert!(Alphabet::new(Vec::<String>::new()).is_err());
        assert!(Alphabet::new(["a", "a"]).is_err());
        let x = Alphabet::new(["a", "b", "c"]).unwrap();
        let s = x.parse_set("{c, a}").unwrap();
        assert_eq!(x.format_set(s), "{a,c}");
        assert_eq!(x.parse_set("{}").unwrap(), SymbolSet::EMPTY);
        assert!(x.parse_set("{z}").is_err());
        assert!(matches!(
            x.extended(&["d".into(), "e".into()], 4),
            Err(Error::AlphabetExhausted {
                requested: 5,
                limit: 4
            })
        ));
    }
}
