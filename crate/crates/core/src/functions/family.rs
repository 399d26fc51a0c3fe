use super::alphabet::{Alphabet, Symbol, SymbolSet, MAX_SYMBOLS};
use super::epfn::{compare, ComparisonWitness, EpFn, Func};
use super::epset::EpSet;
use crate::error::{Error, Result};
use crate::indexing::Regime;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Member {
    pub name: String,
    pub func: Func,
}

/// A finite family of functions on one index regime, directed under `≤`.
///
/// The refinement preorder is tabulated at construction: `leq(i, j)` holds
/// the witness `e` with `fᵢ = e ∘ fⱼ`.
#[derive(Debug, Clone)]
pub struct Family {
    alphabet: Alphabet,
    regime: Regime,
    members: Vec<Member>,
    leq: Vec<Vec<Option<ComparisonWitness>>>,
}

impl PartialEq for Family {
    fn eq(&self, other: &Self) -> bool {
        self.alphabet == other.alphabet
            && self.regime == other.regime
            && self.members == other.members
    }
}

impl Family {
    /// Builds a family and checks that it is directed.
    pub fn new(alphabet: Alphabet, regime: Regime, members: Vec<Member>) -> Result<Self> {
        let family = Self::new_undirected(alphabet, regime, members)?;
        if let Some((i, j)) = family.unbounded_pair() {
            return Err(Error::NotDirected(
                family.name(i).into(),
                family.name(j).into(),
            ));
        }
        Ok(family)
    }

    /// Builds a family without the directedness check (used while closing a
    /// family under refinement).
    pub fn new_undirected(
        alphabet: Alphabet,
        regime: Regime,
        members: Vec<Member>,
    ) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Domain("family has no members".into()));
        }
        for (k, m) in members.iter().enumerate() {
            if members[..k].iter().any(|o| o.name == m.name) {
                return Err(Error::Domain(format!(
                    "duplicate function name `{}`",
                    m.name
                )));
            }
            if m.func.range().difference(alphabet.all()) != SymbolSet::EMPTY {
                return Err(Error::Domain(format!(
                    "`{}` uses symbols outside the alphabet",
                    m.name
                )));
            }
            match (&m.func, &regime) {
                (Func::Periodic(_), Regime::Omega) => {}
                (Func::Table(t), Regime::Finite(o)) if t.len() == o.len() => {}
                _ => {
                    return Err(Error::UnsupportedRegime(format!(
                        "`{}` does not match the index regime",
                        m.name
                    )))
                }
            }
        }
        let leq = members
            .iter()
            .map(|a| members.iter().map(|b| compare(&a.func, &b.func)).collect())
            .collect();
        Ok(Family {
            alphabet,
            regime,
            members,
            leq,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn regime(&self) -> &Regime {
        &self.regime
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.members[i].name
    }

    pub fn func(&self, i: usize) -> &Func {
        &self.members[i].func
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.members
            .iter()
            .position(|m| m.name == name)
            .ok_or_else(|| Error::DanglingName(name.to_string()))
    }

    /// Witness for `fᵢ ≤ fⱼ`.
    pub fn leq(&self, i: usize, j: usize) -> Option<&ComparisonWitness> {
        self.leq[i][j].as_ref()
    }

    pub fn equivalent(&self, i: usize, j: usize) -> bool {
        self.leq(i, j).is_some() && self.leq(j, i).is_some()
    }

    /// Members `j` with `fᵢ ≤ fⱼ`, in family order.
    pub fn above(&self, i: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&j| self.leq(i, j).is_some())
            .collect()
    }

    /// First pair (in family order) lacking an upper bound in the family.
    pub fn unbounded_pair(&self) -> Option<(usize, usize)> {
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                if self.upper_bound(i, j).is_none() {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn upper_bound(&self, i: usize, j: usize) -> Option<usize> {
        (0..self.len()).find(|&k| self.leq(i, k).is_some() && self.leq(j, k).is_some())
    }

    /// Members that are `≤`-maximal: everything above them is equivalent.
    pub fn maximal(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.above(i).into_iter().all(|j| self.leq(j, i).is_some()))
            .collect()
    }

    /// Members above every member. Nonempty for a directed finite family.
    pub fn tops(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| (0..self.len()).all(|j| self.leq(j, i).is_some()))
            .collect()
    }

    pub fn tail_range(&self, i: usize, d: usize) -> Result<SymbolSet> {
        self.func(i).tail_range(&self.regime, d)
    }

    pub fn cofinal_range(&self, i: usize) -> SymbolSet {
        self.func(i)
            .cofinal_range(&self.regime)
            .expect("member matches regime")
    }

    pub fn periodic(&self, i: usize) -> Result<&EpFn> {
        self.func(i)
            .as_periodic()
            .ok_or_else(|| Error::UnsupportedRegime("operation needs the (ℕ,<) regime".into()))
    }

    pub fn preimage(&self, i: usize, set: SymbolSet) -> Result<EpSet> {
        Ok(preimage(self.periodic(i)?, set))
    }

    /// A copy with one more member appended (directedness re-checked).
    pub fn with_member(&self, member: Member) -> Result<Family> {
        let mut members = self.members.clone();
        members.push(member);
        Family::new(self.alphabet.clone(), self.regime.clone(), members)
    }

    /// Closes the family under [`refine`] until every pair has an upper bound.
    /// Returns the closed family and the names of adjoined members.
    pub fn close_under_refine(&self, max_symbols: usize) -> Result<(Family, Vec<String>)> {
        let mut family = self.clone();
        let mut added = Vec::new();
        while let Some((i, j)) = family.unbounded_pair() {
            let r = refine(
                &family.alphabet,
                family.func(i),
                family.func(j),
                max_symbols,
            )?;
            let mut name = format!("{}∨{}", family.name(i), family.name(j));
            while family.index_of(&name).is_ok() {
                name.push('\'');
            }
            let mut members = family.members.clone();
            members.push(Member {
                name: name.clone(),
                func: r.func,
            });
            family = Family::new_undirected(r.alphabet, family.regime.clone(), members)?;
            added.push(name);
        }
        Ok((family, added))
    }
}

/// `{n : f(n) ∈ set}`.
pub fn preimage(f: &EpFn, set: SymbolSet) -> EpSet {
    EpSet::preimage(f, set)
}

/// Result of [`refine`]: the common refinement and the (possibly enlarged)
/// alphabet it is written over.
#[derive(Debug, Clone)]
pub struct Refinement {
    pub func: Func,
    pub alphabet: Alphabet,
    pub enlarged: bool,
}

/// Common refinement of two functions: `g ≥ f1` and `g ≥ f2`, with the
/// partition of `g` the meet of the two partitions. When one input already
/// refines the other it is returned as is; otherwise the occurring value
/// pairs become fresh symbols appended to `alphabet` (at most `max_symbols`
/// symbols in total).
pub fn refine(alphabet: &Alphabet, f1: &Func, f2: &Func, max_symbols: usize) -> Result<Refinement> {
    if compare(f1, f2).is_some() {
        return Ok(Refinement {
            func: f2.clone(),
            alphabet: alphabet.clone(),
            enlarged: false,
        });
    }
    if compare(f2, f1).is_some() {
        return Ok(Refinement {
            func: f1.clone(),
            alphabet: alphabet.clone(),
            enlarged: false,
        });
    }
    let window = f1.joint_window(f2).ok_or_else(|| {
        Error::UnsupportedRegime("refine needs functions on the same regime".into())
    })?;
    let mut pairs: Vec<(Symbol, Symbol)> = (0..window).map(|n| (f1.eval(n), f2.eval(n))).collect();
    pairs.sort();
    pairs.dedup();
    let mut names = Vec::new();
    for (x, y) in &pairs {
        let base = format!("{}{}", alphabet.name(*x), alphabet.name(*y));
        names.push(alphabet.fresh_name(&base, &names));
    }
    let enlarged = alphabet.extended(&names, max_symbols.min(MAX_SYMBOLS))?;
    let code = |x: Symbol, y: Symbol| {
        let k = pairs.binary_search(&(x, y)).expect("pair occurs in window");
        Symbol((alphabet.len() + k) as u8)
    };
    let func = match (f1, f2) {
        (Func::Periodic(a), Func::Periodic(b)) => Func::Periodic(a.zip_with(b, code)),
        (Func::Table(a), Func::Table(b)) => {
            Func::Table(a.iter().zip(b).map(|(&x, &y)| code(x, y)).collect())
        }
        _ => unreachable!("joint window exists"),
    };
    Ok(Refinement {
        func,
        alphabet: enlarged,
        enlarged: true,
    })
}

/// Some member `f` and `X ⊆ ran(f)` with `A = f⁻¹X`, first in family order.
pub fn has_characteristic_fn(family: &Family, set: &EpSet) -> Result<Option<(usize, SymbolSet)>> {
    for i in 0..family.len() {
        let f = family.periodic(i)?;
        // the only candidate X: the values whose whole fiber lies inside A
        let x: SymbolSet = f
            .range()
            .iter()
            .filter(|&s| preimage(f, SymbolSet::singleton(s)).is_subset(set))
            .collect();
        if &preimage(f, x) == set {
            return Ok(Some((i, x)));
        }
    }
    Ok(None)
}
