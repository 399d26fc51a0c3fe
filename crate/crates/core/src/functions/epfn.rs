//! Eventually periodic functions `ℕ → X`, table functions on finite orders,
//! and the refinement preorder between them.

use std::collections::BTreeMap;

use num_integer::Integer;

use super::alphabet::{Symbol, SymbolSet};
use crate::error::{Error, Result};
use crate::indexing::{Regime, Successors};

/// An eventually periodic word, stored in canonical form: the period is
/// primitive and the prefix is as short as possible. Equal functions have
/// equal representations.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EpFn {
    prefix: Vec<Symbol>,
    period: Vec<Symbol>,
}

impl EpFn {
    pub fn new(prefix: Vec<Symbol>, period: Vec<Symbol>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::Domain("period word must be nonempty".into()));
        }
        let mut f = EpFn { prefix, period };
        f.canonicalize();
        Ok(f)
    }

    pub fn constant(s: Symbol) -> Self {
        EpFn {
            prefix: Vec::new(),
            period: vec![s],
        }
    }

    fn canonicalize(&mut self) {
        let n = self.period.len();
        if let Some(p) = (1..=n)
            .find(|&p| n.is_multiple_of(p) && (p..n).all(|k| self.period[k] == self.period[k - p]))
        {
            self.period.truncate(p);
        }
        while let (Some(a), Some(b)) = (self.prefix.last(), self.period.last()) {
            if a != b {
                break;
            }
            self.prefix.pop();
            self.period.rotate_right(1);
        }
    }

    pub fn prefix(&self) -> &[Symbol] {
        &self.prefix
    }

    pub fn period(&self) -> &[Symbol] {
        &self.period
    }

    pub fn eval(&self, n: usize) -> Symbol {
        if n < self.prefix.len() {
            self.prefix[n]
        } else {
            self.period[(n - self.prefix.len()) % self.period.len()]
        }
    }

    pub fn range(&self) -> SymbolSet {
        self.prefix
            .iter()
            .chain(self.period.iter())
            .copied()
            .collect()
    }

    /// Symbols attained cofinally often: those of the period.
    pub fn cofinal_range(&self) -> SymbolSet {
        self.period.iter().copied().collect()
    }

    /// `{f(n) : n > d}`.
    pub fn tail_range(&self, d: usize) -> SymbolSet {
        let start = d + 1;
        let mut s = self.cofinal_range();
        if start < self.prefix.len() {
            s = s.union(self.prefix[start..].iter().copied().collect());
        }
        s
    }

    /// Length of a window after which `self` and `other` are jointly periodic,
    /// plus one joint period.
    pub fn window(&self, other: &EpFn) -> usize {
        self.prefix.len() + other.prefix.len() + self.period.len().lcm(&other.period.len())
    }

    /// Pointwise combination; the result is canonicalized.
    pub fn zip_with(&self, other: &EpFn, mut op: impl FnMut(Symbol, Symbol) -> Symbol) -> EpFn {
        let pre = self.prefix.len().max(other.prefix.len());
        let per = self.period.len().lcm(&other.period.len());
        let prefix = (0..pre).map(|n| op(self.eval(n), other.eval(n))).collect();
        let period = (pre..pre + per)
            .map(|n| op(self.eval(n), other.eval(n)))
            .collect();
        EpFn::new(prefix, period).expect("period nonempty")
    }

    pub fn map(&self, mut op: impl FnMut(Symbol) -> Symbol) -> EpFn {
        EpFn::new(
            self.prefix.iter().map(|&s| op(s)).collect(),
            self.period.iter().map(|&s| op(s)).collect(),
        )
        .expect("period nonempty")
    }
}

/// A member of a function family: eventually periodic on `(ℕ,<)`, or an
/// explicit table over a finite order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Func {
    Periodic(EpFn),
    Table(Vec<Symbol>),
}

impl Func {
    pub fn eval(&self, n: usize) -> Symbol {
        match self {
            Func::Periodic(f) => f.eval(n),
            Func::Table(t) => t[n],
        }
    }

    pub fn as_periodic(&self) -> Option<&EpFn> {
        match self {
            Func::Periodic(f) => Some(f),
            Func::Table(_) => None,
        }
    }

    pub fn range(&self) -> SymbolSet {
        match self {
            Func::Periodic(f) => f.range(),
            Func::Table(t) => t.iter().copied().collect(),
        }
    }

    /// `ran(f ↾ ⌊d⌋)`, with `⌊d⌋` taken in `regime`.
    pub fn tail_range(&self, regime: &Regime, d: usize) -> Result<SymbolSet> {
        match (self, regime.successors(d)?) {
            (Func::Periodic(f), Successors::Tail(t)) => Ok(f.tail_range(t.threshold)),
            (Func::Table(t), Successors::Finite(s)) => Ok(s.iter().map(|&x| t[x]).collect()),
            _ => Err(Error::UnsupportedRegime(
                "function does not match the index regime".into(),
            )),
        }
    }

    /// `ran*(f)`: the intersection of all tail ranges.
    pub fn cofinal_range(&self, regime: &Regime) -> Result<SymbolSet> {
        match (self, regime) {
            (Func::Periodic(f), Regime::Omega) => Ok(f.cofinal_range()),
            (Func::Table(_), Regime::Finite(o)) => {
                let mut acc = self.range();
                for d in 0..o.len() {
                    acc = acc.intersection(self.tail_range(regime, d)?);
                }
                Ok(acc)
            }
            _ => Err(Error::UnsupportedRegime(
                "function does not match the index regime".into(),
            )),
        }
    }

    /// Indices that decide every pointwise question about `self` and `other`.
    pub fn joint_window(&self, other: &Func) -> Option<usize> {
        match (self, other) {
            (Func::Periodic(f), Func::Periodic(g)) => Some(f.window(g)),
            (Func::Table(a), Func::Table(b)) if a.len() == b.len() => Some(a.len()),
            _ => None,
        }
    }
}

/// The unique `e: ran(f₂) → ran(f₁)` with `f₁ = e ∘ f₂`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ComparisonWitness {
    map: BTreeMap<Symbol, Symbol>,
}

impl ComparisonWitness {
    pub fn identity(domain: SymbolSet) -> Self {
        ComparisonWitness {
            map: domain.iter().map(|s| (s, s)).collect(),
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Symbol, Symbol)>) -> Self {
        ComparisonWitness {
            map: pairs.into_iter().collect(),
        }
    }

    pub fn apply(&self, s: Symbol) -> Option<Symbol> {
        self.map.get(&s).copied()
    }

    pub fn domain(&self) -> SymbolSet {
        self.map.keys().copied().collect()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (Symbol, Symbol)> + '_ {
        self.map.iter().map(|(a, b)| (*a, *b))
    }

    /// Image of a set; symbols outside the domain are dropped.
    pub fn image(&self, set: SymbolSet) -> SymbolSet {
        set.iter().filter_map(|s| self.apply(s)).collect()
    }

    /// `{i : an odd number of j ∈ set have e(j) = i}`; symbols outside the
    /// domain contribute nothing. This map is additive for `Δ`.
    pub fn odd_image(&self, set: SymbolSet) -> SymbolSet {
        let mut out = SymbolSet::EMPTY;
        for s in set.iter() {
            if let Some(t) = self.apply(s) {
                out.toggle(t);
            }
        }
        out
    }

    pub fn is_injective_on(&self, set: SymbolSet) -> bool {
        let img = self.image(set);
        set.is_subset(self.domain()) && img.len() == set.len()
    }

    /// `self ∘ inner`, defined where both are.
    pub fn compose(&self, inner: &ComparisonWitness) -> ComparisonWitness {
        ComparisonWitness {
            map: inner
                .map
                .iter()
                .filter_map(|(a, b)| self.apply(*b).map(|c| (*a, c)))
                .collect(),
        }
    }
}

/// Decides `f1 ≤ f2` and returns the witness `e` with `f1 = e ∘ f2`. The
/// decision reads one joint window; past it both functions repeat with a
/// common period.
pub fn compare(f1: &Func, f2: &Func) -> Option<ComparisonWitness> {
    let window = f1.joint_window(f2)?;
    let mut map = BTreeMap::new();
    for n in 0..window {
        let (x, y) = (f1.eval(n), f2.eval(n));
        match map.insert(y, x) {
            Some(prev) if prev != x => return None,
            _ => {}
        }
    }
    Some(ComparisonWitness { map })
}

pub fn equivalent(f1: &Func, f2: &Func) -> bool {
    compare(f1, f2).is_some() && compare(f2, f1).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::alphabet::Alphabet;

    fn ab() -> Alphabet {
        Alphabet::new(["a", "b", "c"]).unwrap()
    }

    pub(crate) fn ep(prefix: &str, period: &str) -> EpFn {
        let x = ab();
        EpFn::new(x.parse_word(prefix).unwrap(), x.parse_word(period).unwrap()).unwrap()
    }

    fn p(prefix: &str, period: &str) -> Func {
        Func::Periodic(ep(prefix, period))
    }

    const A: Symbol = Symbol(0);
    const B: Symbol = Symbol(1);

    #[test]
    fn evaluate_examples() {
        assert_eq!(ep("", "ab").eval(4), A);
        assert_eq!(ep("b", "a").eval(0), B);
        assert_eq!(ep("b", "a").eval(7), A);
    }

    #[test]
    fn canonical_form() {
        assert_eq!(ep("", "abab"), ep("", "ab"));
        assert_eq!(ep("ab", "ab"), ep("", "ab"));
        assert_eq!(ep("b", "ab").prefix().len(), 0);
        assert_eq!(ep("b", "ab").period(), ep("", "ba").period());
        assert_eq!(ep("aaa", "a"), EpFn::constant(A));
        let f = ep("cab", "abab");
        assert_eq!(f.prefix().len(), 1);
        assert_eq!(f.period().len(), 2);
        for n in 0..40 {
            assert_eq!(f.eval(n), ep("cab", "abab").eval(n));
        }
        assert!(EpFn::new(vec![A], vec![]).is_err());
    }

    #[test]
    fn compare_examples() {
        let e = compare(&p("", "a"), &p("", "ab")).unwrap();
        assert_eq!(e, ComparisonWitness::from_pairs([(A, A), (B, A)]));
        let e = compare(&p("", "ab"), &p("", "ba")).unwrap();
        assert_eq!(e, ComparisonWitness::from_pairs([(A, B), (B, A)]));
        assert!(compare(&p("", "ba"), &p("", "ab")).is_some());
        assert!(compare(&p("", "ab"), &p("", "a")).is_none());
    }

    #[test]
    fn tail_range_examples() {
        let x = ab();
        assert_eq!(ep("", "a").tail_range(10), x.parse_set("{a}").unwrap());
        assert_eq!(ep("b", "a").tail_range(0), x.parse_set("{a}").unwrap());
        assert_eq!(ep("", "ab").tail_range(3), x.parse_set("{a,b}").unwrap());
        assert_eq!(ep("cb", "a").tail_range(0), x.parse_set("{a,b}").unwrap());
    }

    #[test]
    fn cofinal_range_examples() {
        let x = ab();
        assert_eq!(ep("b", "a").cofinal_range(), x.parse_set("{a}").unwrap());
        assert_eq!(ep("", "ab").cofinal_range(), x.parse_set("{a,b}").unwrap());
    }

    #[test]
    fn odd_image_counts_parity() {
        let e = ComparisonWitness::from_pairs([(A, A), (B, A)]);
        assert_eq!(
            e.odd_image(SymbolSet::singleton(A)),
            SymbolSet::singleton(A)
        );
        assert_eq!(e.odd_image(SymbolSet::full(2)), SymbolSet::EMPTY);
        // symbols outside ran(f₂) are ignored
        assert_eq!(
            e.odd_image(SymbolSet::singleton(Symbol(2))),
            SymbolSet::EMPTY
        );
    }
}
