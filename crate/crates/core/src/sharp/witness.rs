use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{Family, SymbolSet};

/// A candidate for the principle on `(D, F)`: a base member `f*` and, for
/// every `f ≥ f*`, a nonempty finite `u_f ⊆ ran*(f)` mapped bijectively onto
/// `u_{f*}` by the comparison witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharpWitness {
    pub fstar: String,
    pub u: BTreeMap<String, SymbolSet>,
}

/// JSON form: symbol sets as lists of symbol names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SharpWitnessDoc {
    pub fstar: String,
    pub u: BTreeMap<String, Vec<String>>,
}

impl SharpWitness {
    pub fn to_doc(&self, family: &Family) -> SharpWitnessDoc {
        SharpWitnessDoc {
            fstar: self.fstar.clone(),
            u: self
                .u
                .iter()
                .map(|(k, v)| (k.clone(), family.alphabet().set_names(*v)))
                .collect(),
        }
    }

    pub fn from_doc(doc: &SharpWitnessDoc, family: &Family) -> Result<Self> {
        let mut u = BTreeMap::new();
        for (k, v) in &doc.u {
            u.insert(k.clone(), family.alphabet().set_from_names(v)?);
        }
        Ok(SharpWitness {
            fstar: doc.fstar.clone(),
            u,
        })
    }

    pub fn base_set(&self) -> Option<SymbolSet> {
        self.u.get(&self.fstar).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SharpFailure {
    Missing,
    Empty,
    NotCofinal,
    NotBijective,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SharpVerdict {
    Pass,
    Violation {
        member: String,
        failure: SharpFailure,
    },
}

impl SharpVerdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, SharpVerdict::Pass)
    }
}

/// Checks every `f ≥ f*` in family order and reports the first failure.
pub fn verify_sharp(family: &Family, witness: &SharpWitness) -> Result<SharpVerdict> {
    let fstar = family.index_of(&witness.fstar)?;
    for name in witness.u.keys() {
        family.index_of(name)?;
    }
    let violation = |j: usize, failure| {
        Ok(SharpVerdict::Violation {
            member: family.name(j).to_string(),
            failure,
        })
    };
    let Some(base) = witness.base_set() else {
        return violation(fstar, SharpFailure::Missing);
    };
    for j in family.above(fstar) {
        let Some(&uf) = witness.u.get(family.name(j)) else {
            return violation(j, SharpFailure::Missing);
        };
        if uf.is_empty() {
            return violation(j, SharpFailure::Empty);
        }
        if !uf.is_subset(family.cofinal_range(j)) {
            return violation(j, SharpFailure::NotCofinal);
        }
        let e = family.leq(fstar, j).expect("j is above f*");
        if !e.is_injective_on(uf) || e.image(uf) != base {
            return violation(j, SharpFailure::NotBijective);
        }
    }
    Ok(SharpVerdict::Pass)
}

/// `≤`-maximal members first, then the rest, each group in family order.
fn fstar_candidates(family: &Family) -> Vec<usize> {
    let maximal = family.maximal();
    let rest = (0..family.len()).filter(|i| !maximal.contains(i));
    maximal.iter().copied().chain(rest).collect()
}

/// Exhaustive search in a fixed order: `f*` maximal members first, `u_{f*}` over
/// nonempty subsets of `ran*(f*)` by size then alphabet order, and for each
/// `f ≥ f*` the first admissible `u_f` in the same order.
pub fn search_sharp(family: &Family) -> Option<SharpWitness> {
    for fstar in fstar_candidates(family) {
        let cofinal = family.cofinal_range(fstar);
        'base: for base in cofinal.subsets().into_iter().filter(|s| !s.is_empty()) {
            let mut u = BTreeMap::new();
            for j in family.above(fstar) {
                let e = family.leq(fstar, j).expect("j is above f*");
                // the first subset in size-then-lex order picks the least
                // preimage of each target
                let mut uf = SymbolSet::EMPTY;
                for t in base.iter() {
                    match family
                        .cofinal_range(j)
                        .iter()
                        .find(|&s| e.apply(s) == Some(t))
                    {
                        Some(s) => uf.insert(s),
                        None => continue 'base,
                    }
                }
                u.insert(family.name(j).to_string(), uf);
            }
            return Some(SharpWitness {
                fstar: family.name(fstar).to_string(),
                u,
            });
        }
    }
    None
}

/// Exhaustive reference search used by tests: enumerates every subset for
/// every `f ≥ f*` instead of choosing preimages.
pub fn search_sharp_bruteforce(family: &Family) -> Option<SharpWitness> {
    for fstar in fstar_candidates(family) {
        for base in family
            .cofinal_range(fstar)
            .subsets()
            .into_iter()
            .filter(|s| !s.is_empty())
        {
            let mut u = BTreeMap::new();
            let mut ok = true;
            for j in family.above(fstar) {
                let e = family.leq(fstar, j).expect("above");
                let found = family
                    .cofinal_range(j)
                    .subsets()
                    .into_iter()
                    .find(|&s| !s.is_empty() && e.is_injective_on(s) && e.image(s) == base);
                match found {
                    Some(s) => {
                        u.insert(family.name(j).to_string(), s);
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                return Some(SharpWitness {
                    fstar: family.name(fstar).to_string(),
                    u,
                });
            }
        }
    }
    None
}

pub(crate) fn require_omega(family: &Family) -> Result<()> {
    if family.regime().is_omega() {
        Ok(())
    } else {
        Err(Error::UnsupportedRegime(
            "filters are built over (ℕ,<) only".into(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::testing::*;
    use crate::functions::{Alphabet, Func, Member, Symbol};
    use crate::indexing::{FiniteOrder, Regime};

    fn set(f: &Family, s: &str) -> SymbolSet {
        f.alphabet().parse_set(s).unwrap()
    }

    #[test]
    fn verify_examples() {
        let f0 = omega_family(&Alphabet::new(["a"]).unwrap(), &[("c_a", "", "a")]);
        let w = SharpWitness {
            fstar: "c_a".into(),
            u: [("c_a".to_string(), set(&f0, "{a}"))].into(),
        };
        assert_eq!(verify_sharp(&f0, &w).unwrap(), SharpVerdict::Pass);

        let f1 = s1();
        let w = SharpWitness {
            fstar: "par".into(),
            u: [("par".to_string(), set(&f1, "{a}"))].into(),
        };
        assert_eq!(verify_sharp(&f1, &w).unwrap(), SharpVerdict::Pass);

        // u_par = {a,b} against u_{f*} = {a}: both map to a
        let w = SharpWitness {
            fstar: "c_a".into(),
            u: [
                ("c_a".to_string(), set(&f1, "{a}")),
                ("c_b".to_string(), set(&f1, "{b}")),
                ("par".to_string(), set(&f1, "{a,b}")),
            ]
            .into(),
        };
        assert_eq!(
            verify_sharp(&f1, &w).unwrap(),
            SharpVerdict::Violation {
                member: "par".into(),
                failure: SharpFailure::NotBijective
            }
        );

        let w = SharpWitness {
            fstar: "nope".into(),
            u: BTreeMap::new(),
        };
        assert!(matches!(verify_sharp(&f1, &w), Err(Error::DanglingName(_))));
    }

    #[test]
    fn verify_reports_missing_and_cofinality() {
        let x = ab();
        let fam = omega_family(&x, &[("c_a", "", "a"), ("q", "b", "a")]);
        let w = SharpWitness {
            fstar: "c_a".into(),
            u: [
                ("c_a".to_string(), set(&fam, "{a}")),
                ("q".to_string(), set(&fam, "{b}")),
            ]
            .into(),
        };
        assert!(matches!(
            verify_sharp(&fam, &w).unwrap(),
            SharpVerdict::Violation {
                failure: SharpFailure::NotCofinal,
                ..
            }
        ));
        let w = SharpWitness {
            fstar: "c_a".into(),
            u: [("c_a".to_string(), set(&fam, "{a}"))].into(),
        };
        assert_eq!(
            verify_sharp(&fam, &w).unwrap(),
            SharpVerdict::Violation {
                member: "q".into(),
                failure: SharpFailure::Missing
            }
        );
    }

    #[test]
    fn search_examples() {
        let f0 = omega_family(&Alphabet::new(["a"]).unwrap(), &[("c_a", "", "a")]);
        let w = search_sharp(&f0).unwrap();
        assert_eq!(w.fstar, "c_a");
        assert_eq!(w.u["c_a"], set(&f0, "{a}"));

        let f1 = s1();
        let w = search_sharp(&f1).unwrap();
        assert_eq!(w.fstar, "par");
        assert_eq!(w.base_set().unwrap().len(), 1);
        assert!(verify_sharp(&f1, &w).unwrap().is_pass());
    }

    #[test]
    fn search_fails_over_a_finite_order() {
        let order = FiniteOrder::new_directed(
            &["bot", "a", "b", "top"],
            &[
                ("bot", "a"),
                ("bot", "b"),
                ("a", "top"),
                ("b", "top"),
                ("bot", "top"),
            ],
        )
        .unwrap();
        let x = ab();
        let members = vec![
            Member {
                name: "f".into(),
                func: Func::Table(vec![Symbol(0), Symbol(1), Symbol(0), Symbol(1)]),
            },
            Member {
                name: "g".into(),
                func: Func::Table(vec![Symbol(0); 4]),
            },
        ];
        let fam = Family::new(x, Regime::Finite(order), members).unwrap();
        assert_eq!(fam.cofinal_range(0), SymbolSet::EMPTY);
        assert_eq!(search_sharp(&fam), None);
    }

    #[test]
    fn search_agrees_with_bruteforce() {
        for fam in bundled_like_families() {
            let fast = search_sharp(&fam);
            assert_eq!(fast, search_sharp_bruteforce(&fam));
            assert!(verify_sharp(&fam, &fast.unwrap()).unwrap().is_pass());
        }
    }
}
