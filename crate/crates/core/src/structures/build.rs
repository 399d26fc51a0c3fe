use std::fmt;

use serde::{Deserialize, Serialize};

use super::{BitMatrix, SigmaStructure, MAX_GROUP_BITS};
use crate::error::{Error, Result};
use crate::functions::{Family, SymbolSet};

/// Largest `A` carrier a level structure may have.
pub const MAX_LEVEL_ELEMENTS: usize = 4096;

/// Which structure of the construction: `M₀` (no `A`), `H₁` or `H₂`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
}

impl Side {
    pub fn from_number(n: u8) -> Result<Side> {
        match n {
            0 => Ok(Side::Zero),
            1 => Ok(Side::One),
            2 => Ok(Side::Two),
            _ => Err(Error::Domain(format!("side must be 0, 1 or 2, got {n}"))),
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Side::Zero => 0,
            Side::One => 1,
            Side::Two => 2,
        }
    }
}

/// An element `(f, n, u)` of the `A` sort: member index, index, group element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TripleElement {
    pub f: usize,
    pub n: usize,
    pub u: SymbolSet,
}

impl TripleElement {
    pub fn new(f: usize, n: usize, u: SymbolSet) -> Self {
        TripleElement { f, n, u }
    }

    pub fn label(&self, family: &Family) -> String {
        format!(
            "({},{},{})",
            family.name(self.f),
            family.regime().label(self.n),
            family.alphabet().format_set(self.u)
        )
    }
}

impl fmt::Display for TripleElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(#{},{},{:b})", self.f, self.n, self.u.0)
    }
}

/// `g_d(f, n, u) = (f, n, u Δ {f(d)})`, defined only when `n ⊲ d`.
pub fn apply_g(family: &Family, d: usize, x: TripleElement) -> Result<TripleElement> {
    if !family.regime().contains(d) {
        return Err(Error::UnknownElement(format!("index {d}")));
    }
    if !family.regime().lt(x.n, d) {
        return Err(Error::Domain(format!(
            "g_{} is undefined on middle coordinate {}",
            family.regime().label(d),
            family.regime().label(x.n)
        )));
    }
    let mut u = x.u;
    u.toggle(family.func(x.f).eval(d));
    Ok(TripleElement { u, ..x })
}

pub(crate) fn check_group_size(family: &Family) -> Result<usize> {
    let sigma = family.alphabet().len();
    if sigma > MAX_GROUP_BITS {
        return Err(Error::SizeGuard(format!(
            "alphabet has {sigma} symbols; G is materialized only up to {MAX_GROUP_BITS}"
        )));
    }
    Ok(sigma)
}

pub(crate) fn group_labels(family: &Family) -> Vec<String> {
    let sigma = family.alphabet().len();
    (0..1usize << sigma)
        .map(|k| family.alphabet().format_set(SymbolSet(k as u64)))
        .collect()
}

/// The side-one relations computed from their definitions.
#[derive(Debug, Clone)]
pub(crate) struct Formulas {
    pub family: Family,
    // odd[f][f'][u'] = odd image of u' under the witness of f ≤ f'
    odd: Vec<Vec<Option<Vec<SymbolSet>>>>,
}

impl Formulas {
    pub fn new(family: &Family) -> Result<Self> {
        let sigma = check_group_size(family)?;
        let g = 1usize << sigma;
        let odd = (0..family.len())
            .map(|f| {
                (0..family.len())
                    .map(|f2| {
                        family
                            .leq(f, f2)
                            .map(|e| (0..g).map(|u| e.odd_image(SymbolSet(u as u64))).collect())
                    })
                    .collect()
            })
            .collect();
        Ok(Formulas {
            family: family.clone(),
            odd,
        })
    }

    pub fn tail(&self, f: usize, n: usize) -> SymbolSet {
        self.family.tail_range(f, n).expect("index in regime")
    }

    pub fn p(&self, x: &TripleElement, tail: SymbolSet) -> bool {
        x.u.intersection(tail).len() % 2 == 1
    }

    pub fn dv(&self, v: SymbolSet, x: &TripleElement, tail: SymbolSet) -> bool {
        x.u.difference(tail).is_subset(v) && v.intersection(tail).is_empty()
    }

    pub fn e_prime(&self, x: &TripleElement, y: &TripleElement) -> bool {
        (x.f, x.n) == (y.f, y.n)
    }

    pub fn e(&self, x: &TripleElement, y: &TripleElement, tail: SymbolSet) -> bool {
        let diff = x.u.delta(y.u);
        self.e_prime(x, y) && diff.is_subset(tail) && diff.len().is_multiple_of(2)
    }

    pub fn r(&self, x: &TripleElement, y: &TripleElement) -> bool {
        match &self.odd[x.f][y.f] {
            Some(table) => table[y.u.0 as usize] == x.u,
            None => false,
        }
    }
}

/// A level structure together with the coordinates of its `A` elements.
#[derive(Debug, Clone)]
pub struct Level {
    side: Side,
    d: usize,
    family: Family,
    preds: Vec<usize>,
    elems: Vec<TripleElement>,
    structure: SigmaStructure,
}

impl Level {
    pub fn side(&self) -> Side {
        self.side
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn structure(&self) -> &SigmaStructure {
        &self.structure
    }

    pub fn into_structure(self) -> SigmaStructure {
        self.structure
    }

    /// `⌈d⌉` in index order.
    pub fn predecessors(&self) -> &[usize] {
        &self.preds
    }

    pub fn elements(&self) -> &[TripleElement] {
        &self.elems
    }

    pub fn index_of(&self, x: &TripleElement) -> Option<usize> {
        let pos = self.preds.iter().position(|&n| n == x.n)?;
        let g = self.structure.group_size() as u64;
        if x.f >= self.family.len() || x.u.0 >= g || self.side == Side::Zero {
            return None;
        }
        Some((x.f * self.preds.len() + pos) * g as usize + x.u.0 as usize)
    }

    /// `I`-sort index of `(f, n)`.
    pub fn i_index(&self, f: usize, n: usize) -> Option<usize> {
        let pos = self.preds.iter().position(|&m| m == n)?;
        (f < self.family.len()).then_some(f * self.preds.len() + pos)
    }

    /// `g_{d1}` as a permutation of the `A` carrier.
    pub fn g_permutation(&self, d1: usize) -> Result<Vec<usize>> {
        self.elems
            .iter()
            .map(|x| {
                let y = apply_g(&self.family, d1, *x)?;
                Ok(self.index_of(&y).expect("same carrier"))
            })
            .collect()
    }
}

/// Builds `H_{ℓ,d}` (`expanded = false`) or `M_{ℓ,d}` (`expanded = true`).
///
/// Side one evaluates the definitions with tails taken in the ambient regime;
/// side two is the transport of side one along `g_d`; side zero has an empty
/// `A` sort (and an empty `J` when expanded).
pub fn build_level(side: Side, d: usize, family: &Family, expanded: bool) -> Result<Level> {
    let regime = family.regime();
    let preds = regime.predecessors(d)?;
    let sigma = check_group_size(family)?;
    let g = 1usize << sigma;
    let n_a = family.len() * preds.len() * g;
    if n_a > MAX_LEVEL_ELEMENTS {
        return Err(Error::SizeGuard(format!(
            "level has {n_a} elements, limit {MAX_LEVEL_ELEMENTS}"
        )));
    }
    let i_labels: Vec<String> = (0..family.len())
        .flat_map(|f| preds.iter().map(move |&n| (f, n)))
        .map(|(f, n)| format!("({},{})", family.name(f), regime.label(n)))
        .collect();
    let j = match (side, expanded) {
        (_, false) => None,
        (Side::Zero, true) => Some(Vec::new()),
        (Side::One, true) => Some(vec!["i1".to_string()]),
        (Side::Two, true) => Some(vec!["i2".to_string()]),
    };
    let mut s = SigmaStructure::empty(sigma, group_labels(family), i_labels, j);
    let mut elems = Vec::new();
    if side == Side::Zero {
        return Ok(Level {
            side,
            d,
            family: family.clone(),
            preds,
            elems,
            structure: s,
        });
    }
    for f in 0..family.len() {
        for &n in &preds {
            for u in 0..g {
                elems.push(TripleElement::new(f, n, SymbolSet(u as u64)));
            }
        }
    }
    let formulas = Formulas::new(family)?;
    let tails: Vec<SymbolSet> = elems.iter().map(|x| formulas.tail(x.f, x.n)).collect();
    s.a = elems.iter().map(|x| x.label(family)).collect();
    s.pi = (0..n_a).map(|k| k / g).collect();
    if let Some(q) = s.q.as_mut() {
        *q = vec![0; n_a];
    }
    s.act = (0..g)
        .flat_map(|c| (0..n_a).map(move |x| (x & !(g - 1)) | ((x % g) ^ c)))
        .collect();
    s.p = elems
        .iter()
        .zip(&tails)
        .map(|(x, &t)| formulas.p(x, t))
        .collect();
    s.dv = BitMatrix::from_fn(g, n_a, |v, x| {
        formulas.dv(SymbolSet(v as u64), &elems[x], tails[x])
    });
    s.e_prime = BitMatrix::from_fn(n_a, n_a, |x, y| formulas.e_prime(&elems[x], &elems[y]));
    s.e = BitMatrix::from_fn(n_a, n_a, |x, y| formulas.e(&elems[x], &elems[y], tails[x]));
    s.r = BitMatrix::from_fn(n_a, n_a, |x, y| formulas.r(&elems[x], &elems[y]));
    let mut level = Level {
        side: Side::One,
        d,
        family: family.clone(),
        preds,
        elems,
        structure: s,
    };
    if side == Side::Two {
        let perm = level.g_permutation(d)?;
        level.structure = transport(&level.structure, &perm);
        level.side = Side::Two;
    }
    Ok(level)
}

/// The structure on the same carrier making `perm` an isomorphism from `s`:
/// every relation holds at `x` iff it holds in `s` at `perm⁻¹(x)`. For an
/// involution `perm⁻¹ = perm`.
fn transport(s: &SigmaStructure, perm: &[usize]) -> SigmaStructure {
    let n = s.a_len();
    let g = s.group_size();
    let mut inv = vec![0; n];
    for (x, &y) in perm.iter().enumerate() {
        inv[y] = x;
    }
    let mut t = s.clone();
    t.p = (0..n).map(|x| s.p[inv[x]]).collect();
    t.dv = BitMatrix::from_fn(g, n, |v, x| s.dv(v, inv[x]));
    t.act = (0..g)
        .flat_map(|c| (0..n).map(move |x| (c, x)))
        .map(|(c, x)| perm[s.fc(c, inv[x])])
        .collect();
    let rel = |m: &BitMatrix| BitMatrix::from_fn(n, n, |x, y| m.get(inv[x], inv[y]));
    t.e_prime = rel(&s.e_prime);
    t.e = rel(&s.e);
    t.r = rel(&s.r);
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::testing::*;
    use crate::functions::{Alphabet, Symbol};
    use crate::structures::{check_embedding, ElementMap, Sym};

    fn const_a() -> Family {
        omega_family(&Alphabet::new(["a"]).unwrap(), &[("c_a", "", "a")])
    }

    #[test]
    fn carrier_sizes() {
        let fam = const_a();
        let l1 = build_level(Side::One, 2, &fam, false).unwrap();
        assert_eq!(l1.structure().a_len(), 4);
        assert_eq!(l1.structure().i.len(), 2);
        let l0 = build_level(Side::Zero, 2, &fam, true).unwrap();
        assert_eq!(l0.structure().a_len(), 0);
        assert_eq!(l0.structure().i.len(), 2);
        assert_eq!(l0.structure().j_len(), 0);
        let m1 = build_level(Side::One, 2, &fam, true).unwrap();
        assert_eq!(m1.structure().j, Some(vec!["i1".to_string()]));
    }

    #[test]
    fn side_two_flips_exactly_parity() {
        let fam = const_a();
        let l1 = build_level(Side::One, 2, &fam, false).unwrap();
        let l2 = build_level(Side::Two, 2, &fam, false).unwrap();
        assert_eq!(l1.structure().a, l2.structure().a);
        for x in 0..4 {
            assert_ne!(l1.structure().p[x], l2.structure().p[x]);
        }
        let id = ElementMap::identity(l1.structure());
        let rest: Vec<Sym> = Sym::ALL.into_iter().filter(|&s| s != Sym::P).collect();
        assert_eq!(
            check_embedding(l1.structure(), l2.structure(), &id, &rest),
            Ok(())
        );
    }

    #[test]
    fn apply_g_examples() {
        let fam = s1();
        let par = fam.index_of("par").unwrap();
        let a = SymbolSet::singleton(Symbol(0));
        let b = SymbolSet::singleton(Symbol(1));
        let x = TripleElement::new(par, 0, a);
        assert_eq!(
            apply_g(&fam, 2, x).unwrap(),
            TripleElement::new(par, 0, SymbolSet::EMPTY)
        );
        assert_eq!(
            apply_g(&fam, 1, TripleElement::new(par, 0, SymbolSet::EMPTY))
                .unwrap()
                .u,
            b
        );
        assert_eq!(apply_g(&fam, 2, apply_g(&fam, 2, x).unwrap()).unwrap(), x);
        assert!(matches!(apply_g(&fam, 0, x), Err(Error::Domain(_))));
    }

    #[test]
    fn levels_are_nested() {
        for fam in bundled_like_families() {
            for side in [Side::One, Side::Two] {
                for d in 0..4 {
                    let small = build_level(side, d, &fam, false).unwrap();
                    let big = build_level(side, d + 1, &fam, false).unwrap();
                    assert_eq!(
                        small.structure().is_substructure_of(big.structure()),
                        Ok(())
                    );
                }
            }
        }
    }

    #[test]
    fn action_is_regular_on_fibers() {
        let fam = s1();
        let l = build_level(Side::One, 3, &fam, false).unwrap();
        let s = l.structure();
        let g = s.group_size();
        for x in 0..s.a_len() {
            let orbit: std::collections::BTreeSet<usize> = (0..g).map(|c| s.fc(c, x)).collect();
            assert_eq!(orbit.len(), g);
            assert!(orbit.iter().all(|&y| s.pi[y] == s.pi[x]));
        }
    }
}
