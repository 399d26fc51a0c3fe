use serde::Serialize;

use super::build::{apply_g, check_group_size, Formulas, Level, Side, TripleElement};
use super::AtomicEval;
use crate::error::{Error, Result};
use crate::functions::{Family, SymbolSet};

/// `H_{ℓ,D}` over `(ℕ,<)`, evaluated intensionally.
///
/// Side two evaluates at the least level containing every argument: with
/// `d* = max n + 1`, a relation holds at a tuple iff it holds in side one at
/// the `g_{d*}`-images.
#[derive(Debug, Clone)]
pub struct LimitHandle {
    side: Side,
    formulas: Formulas,
}

/// One atomic query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RelationQuery {
    P(TripleElement),
    Dv(SymbolSet, TripleElement),
    EPrime(TripleElement, TripleElement),
    E(TripleElement, TripleElement),
    R(TripleElement, TripleElement),
    Fc(SymbolSet, TripleElement),
    Pi(TripleElement),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum RelationValue {
    Bool(bool),
    Element { f: usize, n: usize, u: u64 },
    Index { f: usize, n: usize },
}

impl LimitHandle {
    pub fn new(side: Side, family: &Family) -> Result<Self> {
        if side == Side::Zero {
            return Err(Error::Domain(
                "limit handles exist for sides 1 and 2".into(),
            ));
        }
        if !family.regime().is_omega() {
            return Err(Error::UnsupportedRegime(
                "limit structures are built over (ℕ,<) only".into(),
            ));
        }
        check_group_size(family)?;
        Ok(LimitHandle {
            side,
            formulas: Formulas::new(family)?,
        })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn family(&self) -> &Family {
        &self.formulas.family
    }

    /// Validates a triple against the family and the alphabet.
    pub fn element(&self, f: &str, n: usize, u: SymbolSet) -> Result<TripleElement> {
        let fam = self.family();
        let f = fam.index_of(f)?;
        if !u.is_subset(fam.alphabet().all()) {
            return Err(Error::UnknownElement(format!("group element {:b}", u.0)));
        }
        Ok(TripleElement::new(f, n, u))
    }

    fn check(&self, x: &TripleElement) -> Result<()> {
        let fam = self.family();
        if x.f >= fam.len() || !x.u.is_subset(fam.alphabet().all()) {
            return Err(Error::UnknownElement(x.to_string()));
        }
        Ok(())
    }

    /// The level used for side-two evaluation of a tuple.
    pub fn admissible_level(&self, args: &[TripleElement]) -> usize {
        args.iter().map(|x| x.n).max().map_or(0, |n| n + 1)
    }

    fn to_side_one(&self, dstar: usize, x: &TripleElement) -> TripleElement {
        match self.side {
            Side::Two => apply_g(self.family(), dstar, *x).expect("n < d*"),
            _ => *x,
        }
    }

    pub fn eval(&self, q: &RelationQuery) -> Result<RelationValue> {
        use RelationQuery::*;
        let args: Vec<TripleElement> = match q {
            P(x) | Dv(_, x) | Fc(_, x) | Pi(x) => vec![*x],
            EPrime(x, y) | E(x, y) | R(x, y) => vec![*x, *y],
        };
        for x in &args {
            self.check(x)?;
        }
        let dstar = self.admissible_level(&args);
        let one: Vec<TripleElement> = args.iter().map(|x| self.to_side_one(dstar, x)).collect();
        let fm = &self.formulas;
        let tail = |x: &TripleElement| fm.tail(x.f, x.n);
        Ok(match q {
            P(_) => RelationValue::Bool(fm.p(&one[0], tail(&one[0]))),
            Dv(v, _) => RelationValue::Bool(fm.dv(*v, &one[0], tail(&one[0]))),
            EPrime(..) => RelationValue::Bool(fm.e_prime(&one[0], &one[1])),
            E(..) => RelationValue::Bool(fm.e(&one[0], &one[1], tail(&one[0]))),
            R(..) => RelationValue::Bool(fm.r(&one[0], &one[1])),
            Fc(c, x) => {
                let y = TripleElement {
                    u: x.u.delta(*c),
                    ..*x
                };
                RelationValue::Element {
                    f: y.f,
                    n: y.n,
                    u: y.u.0,
                }
            }
            Pi(x) => RelationValue::Index { f: x.f, n: x.n },
        })
    }

    fn truth(&self, q: RelationQuery) -> bool {
        matches!(self.eval(&q), Ok(RelationValue::Bool(true)))
    }
}

/// Evaluates one atomic query on a limit structure.
pub fn eval_relation(handle: &LimitHandle, q: &RelationQuery) -> Result<RelationValue> {
    handle.eval(q)
}

impl Level {
    /// Evaluates one atomic query on this level; arguments must lie in `A_d`.
    pub fn eval(&self, q: &RelationQuery) -> Result<RelationValue> {
        use RelationQuery::*;
        let s = self.structure();
        let ix = |x: &TripleElement| {
            self.index_of(x)
                .ok_or_else(|| Error::UnknownElement(x.label(self.family())))
        };
        Ok(match q {
            P(x) => RelationValue::Bool(s.p[ix(x)?]),
            Dv(v, x) => RelationValue::Bool(s.dv(v.0 as usize, ix(x)?)),
            EPrime(x, y) => RelationValue::Bool(s.e_prime.get(ix(x)?, ix(y)?)),
            E(x, y) => RelationValue::Bool(s.e.get(ix(x)?, ix(y)?)),
            R(x, y) => RelationValue::Bool(s.r.get(ix(x)?, ix(y)?)),
            Fc(c, x) => {
                let y = self.elements()[s.fc(c.0 as usize, ix(x)?)];
                RelationValue::Element {
                    f: y.f,
                    n: y.n,
                    u: y.u.0,
                }
            }
            Pi(x) => {
                ix(x)?;
                RelationValue::Index { f: x.f, n: x.n }
            }
        })
    }
}

impl AtomicEval for LimitHandle {
    type Elem = TripleElement;

    fn group_size(&self) -> usize {
        1 << self.family().alphabet().len()
    }
    fn pi_eq(&self, x: &TripleElement, y: &TripleElement) -> bool {
        (x.f, x.n) == (y.f, y.n)
    }
    fn q_eq(&self, _: &TripleElement, _: &TripleElement) -> bool {
        true
    }
    fn fc(&self, c: usize, x: &TripleElement) -> TripleElement {
        TripleElement {
            u: x.u.delta(SymbolSet(c as u64)),
            ..*x
        }
    }
    fn p(&self, x: &TripleElement) -> bool {
        self.truth(RelationQuery::P(*x))
    }
    fn dv(&self, v: usize, x: &TripleElement) -> bool {
        self.truth(RelationQuery::Dv(SymbolSet(v as u64), *x))
    }
    fn e_prime(&self, x: &TripleElement, y: &TripleElement) -> bool {
        self.truth(RelationQuery::EPrime(*x, *y))
    }
    fn e(&self, x: &TripleElement, y: &TripleElement) -> bool {
        self.truth(RelationQuery::E(*x, *y))
    }
    fn r(&self, x: &TripleElement, y: &TripleElement) -> bool {
        self.truth(RelationQuery::R(*x, *y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::testing::*;
    use crate::functions::Symbol;
    use crate::structures::build_level;

    fn b(v: bool) -> RelationValue {
        RelationValue::Bool(v)
    }

    #[test]
    fn relation_examples() {
        let fam = s1();
        let h = LimitHandle::new(Side::One, &fam).unwrap();
        let a = SymbolSet::singleton(Symbol(0));
        let ab = SymbolSet(0b11);
        let par = h.element("par", 0, a).unwrap();
        assert_eq!(h.eval(&RelationQuery::P(par)).unwrap(), b(true));
        let x = h.element("par", 0, SymbolSet::EMPTY).unwrap();
        let y = h.element("par", 0, ab).unwrap();
        assert_eq!(h.eval(&RelationQuery::E(x, y)).unwrap(), b(true));
        let ca = h.element("c_a", 0, a).unwrap();
        assert_eq!(h.eval(&RelationQuery::R(ca, par)).unwrap(), b(true));
        assert!(h.element("nope", 0, a).is_err());
    }

    #[test]
    fn limit_agrees_with_levels() {
        for fam in bundled_like_families() {
            for side in [Side::One, Side::Two] {
                let h = LimitHandle::new(side, &fam).unwrap();
                for d in 1..4 {
                    let level = build_level(side, d, &fam, false).unwrap();
                    let el = level.elements();
                    for x in el {
                        let qs = [RelationQuery::P(*x), RelationQuery::Dv(SymbolSet(1), *x)];
                        for q in qs {
                            assert_eq!(
                                h.eval(&q).unwrap(),
                                level.eval(&q).unwrap(),
                                "{q:?} at level {d}"
                            );
                        }
                        for y in el {
                            for q in [
                                RelationQuery::E(*x, *y),
                                RelationQuery::R(*x, *y),
                                RelationQuery::EPrime(*x, *y),
                            ] {
                                assert_eq!(
                                    h.eval(&q).unwrap(),
                                    level.eval(&q).unwrap(),
                                    "{q:?} at level {d}"
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn finite_regimes_are_rejected() {
        let fam = crate::functions::testing::diamond_family();
        assert!(matches!(
            LimitHandle::new(Side::One, &fam),
            Err(Error::UnsupportedRegime(_))
        ));
    }
}
