use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use super::build::{build_level, Level, Side, TripleElement};
use super::{check_embedding, qf_fingerprint, ElementMap, Mismatch, Sym};
use crate::error::{Error, Result};
use crate::functions::{Family, Func, SymbolSet};
use crate::indexing::Successors;

/// Indices of `⌊n⌋` that realize every value `f` takes there: one full
/// period past the prefix for `(ℕ,<)`, all successors for a finite order.
fn successor_window(family: &Family, f: usize, n: usize) -> Vec<usize> {
    match family.regime().successors(n).expect("index in regime") {
        Successors::Finite(v) => v,
        Successors::Tail(_) => {
            let span = match family.func(f) {
                Func::Periodic(p) => p.prefix().len() + p.period().len(),
                Func::Table(t) => t.len(),
            };
            (n + 1..=n + span).collect()
        }
    }
}

type State = (SymbolSet, bool);

/// A chain `d₀, …, d_{2k−1}` in `⌊n⌋` with `u Δ {f(d₀)} Δ … = u′`, found by
/// breadth-first search over (accumulated difference, parity) states with
/// moves taken in index order. `None` when `x` and `y` are not `E`-related.
pub fn witness_e(family: &Family, x: &TripleElement, y: &TripleElement) -> Option<Vec<usize>> {
    if (x.f, x.n) != (y.f, y.n) {
        return None;
    }
    let target = x.u.delta(y.u);
    let moves: Vec<(usize, SymbolSet)> = successor_window(family, x.f, x.n)
        .into_iter()
        .map(|m| (m, SymbolSet::singleton(family.func(x.f).eval(m))))
        .collect();
    let start = (SymbolSet::EMPTY, false);
    let mut parent: HashMap<State, Option<(State, usize)>> = HashMap::new();
    parent.insert(start, None);
    let mut queue = VecDeque::from([start]);
    while let Some(state) = queue.pop_front() {
        if state == (target, false) {
            let mut path = Vec::new();
            let mut cur = state;
            while let Some(Some((prev, m))) = parent.get(&cur) {
                path.push(*m);
                cur = *prev;
            }
            path.reverse();
            return Some(path);
        }
        for &(m, s) in &moves {
            let next = (state.0.delta(s), !state.1);
            parent.entry(next).or_insert_with(|| {
                queue.push_back(next);
                Some((state, m))
            });
        }
    }
    None
}

/// Replays a chain returned by [`witness_e`].
pub fn replay_e_witness(
    family: &Family,
    x: &TripleElement,
    y: &TripleElement,
    chain: &[usize],
) -> bool {
    if (x.f, x.n) != (y.f, y.n) || !chain.len().is_multiple_of(2) {
        return false;
    }
    let mut u = x.u;
    for &m in chain {
        if !family.regime().contains(m) || !family.regime().lt(x.n, m) {
            return false;
        }
        u.toggle(family.func(x.f).eval(m));
    }
    u == y.u
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EMismatch {
    pub x: String,
    pub y: String,
    pub closed_form: bool,
    pub conjunction: bool,
    pub replay: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ECharReport {
    pub pairs: usize,
    pub related: usize,
    pub mismatches: Vec<EMismatch>,
}

impl ECharReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Compares, on every pair of the level, the tabulated `E`, the conjunction
/// "same `E′`-class, same `P`, same `D_v` for all `v`", and the replayed
/// chain from [`witness_e`].
pub fn check_e_characterization(level: &Level) -> ECharReport {
    let s = level.structure();
    let fam = level.family();
    let g = s.group_size();
    let mut report = ECharReport {
        pairs: 0,
        related: 0,
        mismatches: Vec::new(),
    };
    for x in 0..s.a_len() {
        for y in 0..s.a_len() {
            let closed = s.e.get(x, y);
            let conj =
                s.e_prime.get(x, y) && s.p[x] == s.p[y] && (0..g).all(|v| s.dv(v, x) == s.dv(v, y));
            let (ex, ey) = (&level.elements()[x], &level.elements()[y]);
            let replay = witness_e(fam, ex, ey).is_some_and(|w| replay_e_witness(fam, ex, ey, &w));
            report.pairs += 1;
            report.related += closed as usize;
            if closed != conj || closed != replay {
                report.mismatches.push(EMismatch {
                    x: s.a[x].clone(),
                    y: s.a[y].clone(),
                    closed_form: closed,
                    conjunction: conj,
                    replay,
                });
            }
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairTypeReport {
    pub pairs: usize,
    pub types: usize,
    /// Types realized by more than one pair: the non-vacuous comparisons.
    pub shared_types: usize,
    pub violations: Vec<(String, String, String, String)>,
}

impl PairTypeReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Groups all pairs inside one `E′`-class by quantifier-free type and checks
/// that pairs of equal type have equal difference `u₁ Δ u₂`.
pub fn check_pair_types(level: &Level) -> PairTypeReport {
    let s = level.structure();
    let el = level.elements();
    let mut groups: HashMap<_, Vec<(usize, usize)>> = HashMap::new();
    let mut pairs = 0;
    for x in 0..s.a_len() {
        for y in 0..s.a_len() {
            if s.e_prime.get(x, y) {
                pairs += 1;
                groups
                    .entry(qf_fingerprint(s, &[x, y]))
                    .or_default()
                    .push((x, y));
            }
        }
    }
    let mut violations = Vec::new();
    let mut keys: Vec<_> = groups.keys().cloned().collect();
    keys.sort();
    for k in &keys {
        let members = &groups[k];
        let (x0, y0) = members[0];
        let diff = el[x0].u.delta(el[y0].u);
        for &(x, y) in &members[1..] {
            if el[x].u.delta(el[y].u) != diff {
                violations.push((
                    s.a[x0].clone(),
                    s.a[y0].clone(),
                    s.a[x].clone(),
                    s.a[y].clone(),
                ));
            }
        }
    }
    PairTypeReport {
        pairs,
        types: groups.len(),
        shared_types: groups.values().filter(|v| v.len() > 1).count(),
        violations,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum AutVerdict {
    Pass { elements: usize },
    Counterexample { mismatch: Mismatch },
}

impl AutVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, AutVerdict::Pass { .. })
    }
}

fn above_or_equal(family: &Family, d: usize, x: usize) -> bool {
    d == x || family.regime().lt(d, x)
}

/// `g_{d1} ∘ g_{d2}` as a map of the side-one level onto itself.
pub fn gg_map(level: &Level, d1: usize, d2: usize) -> Result<ElementMap> {
    let fam = level.family();
    for x in [d1, d2] {
        if !above_or_equal(fam, level.d(), x) {
            return Err(Error::Precondition(format!(
                "g_{} is not defined on all of level {}",
                fam.regime().label(x),
                fam.regime().label(level.d())
            )));
        }
    }
    let p1 = level.g_permutation(d1)?;
    let p2 = level.g_permutation(d2)?;
    let s = level.structure();
    Ok(ElementMap {
        a: p2.iter().map(|&y| p1[y]).collect(),
        ..ElementMap::identity(s)
    })
}

/// Exhaustive automorphism check of `g_{d1} ∘ g_{d2}` on a side-one level.
pub fn check_gg_on_level(level: &Level, d1: usize, d2: usize) -> Result<AutVerdict> {
    if level.side() != Side::One {
        return Err(Error::Precondition(
            "the check runs on side-one levels".into(),
        ));
    }
    let map = gg_map(level, d1, d2)?;
    let s = level.structure();
    Ok(match check_embedding(s, s, &map, &Sym::ALL) {
        Ok(()) => AutVerdict::Pass {
            elements: s.a_len(),
        },
        Err(mismatch) => AutVerdict::Counterexample { mismatch },
    })
}

/// Builds `H_{1,d}` and checks that `g_{d1} ∘ g_{d2}` is an automorphism.
/// Both `d1` and `d2` must lie at or above `d`.
pub fn check_gg_automorphism(
    family: &Family,
    d: usize,
    d1: usize,
    d2: usize,
) -> Result<AutVerdict> {
    let level = build_level(Side::One, d, family, false)?;
    check_gg_on_level(&level, d1, d2)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SingleGReport {
    pub flips_p_everywhere: bool,
    pub preserved: Vec<(Sym, bool)>,
}

/// A single `g_{d1}` on a side-one level: which symbols it preserves, and
/// whether it flips `P` at every element.
pub fn check_single_g(level: &Level, d1: usize) -> Result<SingleGReport> {
    let map = gg_map(level, d1, d1)?;
    let perm = level.g_permutation(d1)?;
    let map = ElementMap { a: perm, ..map };
    let s = level.structure();
    let flips = (0..s.a_len()).all(|x| s.p[x] != s.p[map.a[x]]);
    let preserved = Sym::ALL
        .into_iter()
        .map(|sym| (sym, check_embedding(s, s, &map, &[sym]).is_ok()))
        .collect();
    Ok(SingleGReport {
        flips_p_everywhere: flips,
        preserved,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RViolation {
    #[serde(skip)]
    pub x: TripleElement,
    #[serde(skip)]
    pub y: TripleElement,
    pub pair: (String, String),
    pub image: (String, String),
    pub in_h1: bool,
    pub in_h2: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct H0Report {
    pub level: usize,
    /// Some member takes two different values on `⌈d⌉`, so `h₀` must break `R`.
    pub violation_predicted: bool,
    pub other_symbols: Vec<(Sym, Option<Mismatch>)>,
    pub r_violation: Option<RViolation>,
}

impl H0Report {
    pub fn other_symbols_preserved(&self) -> bool {
        self.other_symbols.iter().all(|(_, m)| m.is_none())
    }

    /// The outcome matches the prediction and nothing else breaks.
    pub fn as_predicted(&self) -> bool {
        self.other_symbols_preserved() && self.violation_predicted == self.r_violation.is_some()
    }
}

/// `h₀(f, n, u) = (f, n, u Δ {f(n)})` from `H_{1,d}` to `H_{2,d}`: checks every
/// symbol but `R` and searches for the first pair on which `R` fails.
pub fn check_h0(family: &Family, d: usize) -> Result<H0Report> {
    let l1 = build_level(Side::One, d, family, false)?;
    let l2 = build_level(Side::Two, d, family, false)?;
    if l1.elements().is_empty() {
        return Err(Error::Precondition("level structure is empty".into()));
    }
    let h0 = |x: &TripleElement| {
        let mut u = x.u;
        u.toggle(family.func(x.f).eval(x.n));
        TripleElement { u, ..*x }
    };
    let a: Vec<usize> = l1
        .elements()
        .iter()
        .map(|x| l2.index_of(&h0(x)).expect("same carrier"))
        .collect();
    let map = ElementMap {
        a,
        ..ElementMap::identity(l1.structure())
    };
    let (s1, s2) = (l1.structure(), l2.structure());
    let other_symbols = Sym::ALL
        .into_iter()
        .filter(|&s| s != Sym::R)
        .map(|sym| (sym, check_embedding(s1, s2, &map, &[sym]).err()))
        .collect();
    let preds = l1.predecessors();
    let violation_predicted = (0..family.len()).any(|f| {
        let f = family.func(f);
        preds.iter().any(|&n| f.eval(n) != f.eval(preds[0]))
    });
    let mut r_violation = None;
    'outer: for x in 0..s1.a_len() {
        for y in 0..s1.a_len() {
            let (r1, r2) = (s1.r.get(x, y), s2.r.get(map.a[x], map.a[y]));
            if r1 != r2 {
                r_violation = Some(RViolation {
                    x: l1.elements()[x],
                    y: l1.elements()[y],
                    pair: (s1.a[x].clone(), s1.a[y].clone()),
                    image: (s2.a[map.a[x]].clone(), s2.a[map.a[y]].clone()),
                    in_h1: r1,
                    in_h2: r2,
                });
                break 'outer;
            }
        }
    }
    Ok(H0Report {
        level: d,
        violation_predicted,
        other_symbols,
        r_violation,
    })
}

/// `h₀` applied to one element.
pub fn apply_h0(family: &Family, x: &TripleElement) -> TripleElement {
    let mut u = x.u;
    u.toggle(family.func(x.f).eval(x.n));
    TripleElement { u, ..*x }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::testing::*;
    use crate::functions::{Alphabet, Symbol};
    use crate::structures::{LimitHandle, RelationQuery, RelationValue};

    fn const_a() -> Family {
        omega_family(&Alphabet::new(["a"]).unwrap(), &[("c_a", "", "a")])
    }

    #[test]
    fn witness_examples() {
        let fam = s1();
        let par = fam.index_of("par").unwrap();
        let x = TripleElement::new(par, 0, SymbolSet::EMPTY);
        let y = TripleElement::new(par, 0, SymbolSet(0b11));
        assert_eq!(witness_e(&fam, &x, &y), Some(vec![1, 2]));
        assert_eq!(witness_e(&fam, &x, &x), Some(vec![]));
        let z = TripleElement::new(par, 0, SymbolSet::singleton(Symbol(0)));
        assert_eq!(witness_e(&fam, &x, &z), None);
        assert!(replay_e_witness(&fam, &x, &y, &[1, 2]));
        assert!(!replay_e_witness(&fam, &x, &y, &[0, 1]));
    }

    #[test]
    fn e_characterization_on_bundled_levels() {
        for fam in bundled_like_families() {
            for d in 0..=3 {
                for side in [Side::One, Side::Two] {
                    let r = check_e_characterization(&build_level(side, d, &fam, false).unwrap());
                    assert!(r.passed(), "{:?}", r.mismatches.first());
                }
            }
        }
    }

    #[test]
    fn pair_types_determine_differences() {
        for fam in bundled_like_families().into_iter().take(2) {
            for d in 1..=3 {
                let r = check_pair_types(&build_level(Side::One, d, &fam, false).unwrap());
                assert!(r.passed());
                assert!(r.shared_types > 0 || d == 1);
            }
        }
    }

    #[test]
    fn gg_examples() {
        assert!(check_gg_automorphism(&const_a(), 2, 3, 5).unwrap().passed());
        assert!(check_gg_automorphism(&s1(), 3, 4, 6).unwrap().passed());
        assert!(matches!(
            check_gg_automorphism(&s1(), 3, 1, 6),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn single_g_flips_parity_only() {
        let l = build_level(Side::One, 3, &s1(), false).unwrap();
        let r = check_single_g(&l, 4).unwrap();
        assert!(r.flips_p_everywhere);
        for (sym, ok) in r.preserved {
            assert_eq!(ok, sym != Sym::P, "{sym}");
        }
    }

    #[test]
    fn h0_examples() {
        let r = check_h0(&const_a(), 3).unwrap();
        assert!(!r.violation_predicted && r.r_violation.is_none() && r.as_predicted());

        let fam = omega_family(&ab(), &[("c_a", "", "a"), ("par", "", "ab")]);
        let r = check_h0(&fam, 3).unwrap();
        assert!(r.violation_predicted && r.as_predicted());
        let v = r.r_violation.unwrap();
        let h1 = LimitHandle::new(Side::One, &fam).unwrap();
        let h2 = LimitHandle::new(Side::Two, &fam).unwrap();
        let (x2, y2) = (apply_h0(&fam, &v.x), apply_h0(&fam, &v.y));
        assert_eq!(
            h1.eval(&RelationQuery::R(v.x, v.y)).unwrap(),
            RelationValue::Bool(v.in_h1)
        );
        assert_eq!(
            h2.eval(&RelationQuery::R(x2, y2)).unwrap(),
            RelationValue::Bool(v.in_h2)
        );
        assert_ne!(v.in_h1, v.in_h2);
    }

    #[test]
    fn h0_breaks_parity_on_transient_prefix_values() {
        let fam = omega_family(&ab(), &[("c_a", "", "a"), ("q", "b", "a")]);
        let r = check_h0(&fam, 2).unwrap();
        assert!(!r.other_symbols_preserved());
    }
}
