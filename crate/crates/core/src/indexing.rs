//! Index orders: finite strict directed orders and the symbolic order `(ℕ, <)`.
//!
//! Every index is a `usize`. For `(ℕ, <)` it is the natural number itself; for a
//! finite order it is the position of the element in the declaration list.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// `{n : n > threshold}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TailSet {
    pub threshold: usize,
}

impl TailSet {
    pub fn contains(&self, n: usize) -> bool {
        n > self.threshold
    }
}

/// Result of [`Regime::successors`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Successors {
    Tail(TailSet),
    Finite(Vec<usize>),
}

impl Successors {
    pub fn contains(&self, n: usize) -> bool {
        match self {
            Successors::Tail(t) => t.contains(n),
            Successors::Finite(v) => v.contains(&n),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Successors::Finite(v) if v.is_empty())
    }
}

/// Directedness degree: subsets of size strictly below `tau` must be bounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tau {
    Finite(usize),
    /// All finite subsets.
    Aleph0,
    /// Any cardinal above ℵ₀; never decidable here.
    Uncountable,
}

/// Outcome of [`check_directed`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Directedness {
    Pass,
    Unbounded(Vec<usize>),
}

/// A finite strict partial order given by its element names and `lt` pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteOrder {
    names: Vec<String>,
    // lt[x][y] iff x ⊲ y
    lt: Vec<Vec<bool>>,
}

impl FiniteOrder {
    /// Builds a strict partial order. Rejects duplicate names, unknown names in
    /// `lt`, reflexive pairs and non-transitive relations. Directedness is not
    /// required here; see [`FiniteOrder::new_directed`].
    pub fn new<S: AsRef<str>>(elements: &[S], lt: &[(S, S)]) -> Result<Self> {
        let names: Vec<String> = elements.iter().map(|s| s.as_ref().to_string()).collect();
        if names.is_empty() {
            return Err(Error::NotStrictOrder("order has no elements".into()));
        }
        let distinct: BTreeSet<&String> = names.iter().collect();
        if distinct.len() != names.len() {
            return Err(Error::NotStrictOrder("duplicate element names".into()));
        }
        let n = names.len();
        let mut rel = vec![vec![false; n]; n];
        let pos = |s: &str| {
            names
                .iter()
                .position(|x| x == s)
                .ok_or_else(|| Error::UnknownElement(s.to_string()))
        };
        for (x, y) in lt {
            let (x, y) = (pos(x.as_ref())?, pos(y.as_ref())?);
            rel[x][y] = true;
        }
        for x in 0..n {
            if rel[x][x] {
                return Err(Error::NotStrictOrder(format!(
                    "{} ⊲ {}",
                    names[x], names[x]
                )));
            }
            for y in 0..n {
                if !rel[x][y] {
                    continue;
                }
                for z in 0..n {
                    if rel[y][z] && !rel[x][z] {
                        return Err(Error::NotStrictOrder(format!(
                            "not transitive: {} ⊲ {} ⊲ {} but not {} ⊲ {}",
                            names[x], names[y], names[z], names[x], names[z]
                        )));
                    }
                }
            }
        }
        Ok(FiniteOrder { names, lt: rel })
    }

    /// Like [`FiniteOrder::new`], additionally requiring every pair to have an
    /// upper bound.
    pub fn new_directed<S: AsRef<str>>(elements: &[S], lt: &[(S, S)]) -> Result<Self> {
        let order = Self::new(elements, lt)?;
        order.require_directed()?;
        Ok(order)
    }

    pub fn require_directed(&self) -> Result<()> {
        for x in 0..self.len() {
            for y in x + 1..self.len() {
                if self.upper_bound(&[x, y]).is_none() {
                    return Err(Error::NotDirected(
                        self.names[x].clone(),
                        self.names[y].clone(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, d: usize) -> &str {
        &self.names[d]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|x| x == name)
            .ok_or_else(|| Error::UnknownElement(name.to_string()))
    }

    pub fn lt(&self, x: usize, y: usize) -> bool {
        self.lt[x][y]
    }

    pub fn lt_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for x in 0..self.len() {
            for y in 0..self.len() {
                if self.lt[x][y] {
                    out.push((x, y));
                }
            }
        }
        out
    }

    /// Least-index `z` with `x ⊴ z` for every `x` in `set`.
    pub fn upper_bound(&self, set: &[usize]) -> Option<usize> {
        (0..self.len()).find(|&z| set.iter().all(|&x| x == z || self.lt[x][z]))
    }

    fn check(&self, d: usize) -> Result<()> {
        if d < self.len() {
            Ok(())
        } else {
            Err(Error::UnknownElement(format!("index {d}")))
        }
    }
}

/// The ambient index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Regime {
    /// `(ℕ, <)`, represented intensionally.
    Omega,
    Finite(FiniteOrder),
}

impl Regime {
    pub fn is_omega(&self) -> bool {
        matches!(self, Regime::Omega)
    }

    pub fn lt(&self, x: usize, y: usize) -> bool {
        match self {
            Regime::Omega => x < y,
            Regime::Finite(o) => o.lt(x, y),
        }
    }

    pub fn contains(&self, d: usize) -> bool {
        match self {
            Regime::Omega => true,
            Regime::Finite(o) => d < o.len(),
        }
    }

    /// `⌈d⌉`: the strict predecessors of `d`, in index order.
    pub fn predecessors(&self, d: usize) -> Result<Vec<usize>> {
        match self {
            Regime::Omega => Ok((0..d).collect()),
            Regime::Finite(o) => {
                o.check(d)?;
                Ok((0..o.len()).filter(|&x| o.lt(x, d)).collect())
            }
        }
    }

    /// `⌊d⌋`: the strict successors of `d`.
    pub fn successors(&self, d: usize) -> Result<Successors> {
        match self {
            Regime::Omega => Ok(Successors::Tail(TailSet { threshold: d })),
            Regime::Finite(o) => {
                o.check(d)?;
                Ok(Successors::Finite(
                    (0..o.len()).filter(|&x| o.lt(d, x)).collect(),
                ))
            }
        }
    }

    /// Human-readable name of an index.
    pub fn label(&self, d: usize) -> String {
        match self {
            Regime::Omega => d.to_string(),
            Regime::Finite(o) => o.name(d).to_string(),
        }
    }

    pub fn parse_index(&self, s: &str) -> Result<usize> {
        match self {
            Regime::Omega => s.parse().map_err(|_| Error::UnknownElement(s.to_string())),
            Regime::Finite(o) => o.index_of(s),
        }
    }
}

/// Checks that every subset of size `< tau` has an upper bound. The empty set
/// counts when `tau ≥ 1` and is bounded by any element.
pub fn check_directed(regime: &Regime, tau: Tau) -> Result<Directedness> {
    let order = match regime {
        Regime::Omega => {
            return match tau {
                Tau::Finite(_) | Tau::Aleph0 => Ok(Directedness::Pass),
                Tau::Uncountable => Err(Error::UnsupportedRegime(
                    "(ℕ,<) is not directed above ℵ₀".into(),
                )),
            }
        }
        Regime::Finite(o) => o,
    };
    let n = order.len();
    let limit = match tau {
        Tau::Finite(t) => t.saturating_sub(1).min(n),
        Tau::Aleph0 | Tau::Uncountable => n,
    };
    // subsets of size 1..=limit in increasing size, then lexicographic order
    for size in 1..=limit {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            if order.upper_bound(&combo).is_none() {
                return Ok(Directedness::Unbounded(combo));
            }
            let mut k = size;
            while k > 0 && combo[k - 1] == n - size + k - 1 {
                k -= 1;
            }
            if k == 0 {
                break;
            }
            combo[k - 1] += 1;
            for m in k..size {
                combo[m] = combo[m - 1] + 1;
            }
        }
    }
    Ok(Directedness::Pass)
}
