//! Coherent systems `f ↦ u_f` and the `π`-respecting isomorphisms
//! `H₁ → H₂` they induce by `h(f, n, u) = (f, n, u Δ u_f)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{Family, SymbolSet};
use crate::sharp::{verify_sharp, SharpVerdict, SharpWitness};
use crate::structures::{build_level, check_embedding, ElementMap, Level, Mismatch, Side, Sym};

/// A total assignment `f ↦ u_f`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CoherentSystem {
    pub u: BTreeMap<String, SymbolSet>,
}

impl CoherentSystem {
    pub fn get(&self, name: &str) -> SymbolSet {
        self.u.get(name).copied().unwrap_or_default()
    }

    /// JSON form: member name to list of symbol names.
    pub fn to_doc(&self, family: &Family) -> BTreeMap<String, Vec<String>> {
        self.u
            .iter()
            .map(|(k, v)| (k.clone(), family.alphabet().set_names(*v)))
            .collect()
    }

    pub fn from_doc(doc: &BTreeMap<String, Vec<String>>, family: &Family) -> Result<Self> {
        let mut u = BTreeMap::new();
        for (k, v) in doc {
            family.index_of(k)?;
            u.insert(k.clone(), family.alphabet().set_from_names(v)?);
        }
        Ok(CoherentSystem { u })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum CoherenceFailure {
    Missing {
        member: String,
    },
    /// (a) `u_f ⊄ ran*(f)`.
    NotCofinal {
        member: String,
    },
    /// (b) `|u_f|` even.
    EvenSize {
        member: String,
    },
    /// (c) `u_f` is not the odd image of `u_{f′}` for some `f ≤ f′`.
    Incoherent {
        lower: String,
        upper: String,
    },
}

/// Checks (a) and (b) per member in family order, then (c) over all
/// comparable pairs; returns the first failure.
pub fn is_coherent_system(
    family: &Family,
    system: &CoherentSystem,
) -> Result<Option<CoherenceFailure>> {
    for name in system.u.keys() {
        family.index_of(name)?;
    }
    for f in 0..family.len() {
        let member = family.name(f).to_string();
        let Some(&uf) = system.u.get(&member) else {
            return Ok(Some(CoherenceFailure::Missing { member }));
        };
        if !uf.is_subset(family.cofinal_range(f)) {
            return Ok(Some(CoherenceFailure::NotCofinal { member }));
        }
        if uf.len() % 2 == 0 {
            return Ok(Some(CoherenceFailure::EvenSize { member }));
        }
    }
    for f in 0..family.len() {
        for f2 in 0..family.len() {
            if let Some(e) = family.leq(f, f2) {
                if e.odd_image(system.get(family.name(f2))) != system.get(family.name(f)) {
                    return Ok(Some(CoherenceFailure::Incoherent {
                        lower: family.name(f).to_string(),
                        upper: family.name(f2).to_string(),
                    }));
                }
            }
        }
    }
    Ok(None)
}

fn require_omega(family: &Family) -> Result<()> {
    if family.regime().is_omega() {
        Ok(())
    } else {
        Err(Error::UnsupportedRegime(
            "limit structures are built over (ℕ,<) only".into(),
        ))
    }
}

/// Searches for a coherent system. Condition (c) applied below the first
/// top member `t` forces `u_f = odd image of u_t`, so the search runs over
/// odd subsets of `ran*(t)` (size, then alphabet order) and is exhaustive.
pub fn decide_limit_iso(family: &Family) -> Result<Option<CoherentSystem>> {
    require_omega(family)?;
    let top = *family
        .tops()
        .first()
        .ok_or_else(|| Error::Precondition("family has no top member; is it directed?".into()))?;
    for ut in family.cofinal_range(top).subsets() {
        if ut.len() % 2 == 0 {
            continue;
        }
        let u = (0..family.len())
            .map(|f| {
                let e = family.leq(f, top).expect("top is above everything");
                (family.name(f).to_string(), e.odd_image(ut))
            })
            .collect();
        let system = CoherentSystem { u };
        if is_coherent_system(family, &system)?.is_none() {
            return Ok(Some(system));
        }
    }
    Ok(None)
}

/// `H_{1,d}` and `H_{2,d}` built once, for checking many candidate maps.
#[derive(Debug, Clone)]
pub struct TruncationOracle {
    one: Level,
    two: Level,
}

impl TruncationOracle {
    pub fn new(family: &Family, d: usize) -> Result<Self> {
        require_omega(family)?;
        Ok(TruncationOracle {
            one: build_level(Side::One, d, family, false)?,
            two: build_level(Side::Two, d, family, false)?,
        })
    }

    pub fn level(&self) -> usize {
        self.one.d()
    }

    /// The induced map on the level-`d` carriers. Missing entries shift by `∅`.
    pub fn induced_map(&self, system: &CoherentSystem) -> ElementMap {
        let fam = self.one.family();
        let a = self
            .one
            .elements()
            .iter()
            .map(|x| {
                let mut y = *x;
                y.u = x.u.delta(system.get(fam.name(x.f)));
                self.two.index_of(&y).expect("shift stays in G")
            })
            .collect();
        ElementMap {
            a,
            ..ElementMap::identity(self.one.structure())
        }
    }

    /// Every symbol whose preservation fails, each with its first failing
    /// tuple. Empty means the induced map is a `π`-respecting isomorphism.
    pub fn check(&self, system: &CoherentSystem) -> Vec<Mismatch> {
        let map = self.induced_map(system);
        let (s1, s2) = (self.one.structure(), self.two.structure());
        let mut out = Vec::new();
        if !map.is_bijection_onto(s2) {
            out.push(Mismatch {
                symbol: Sym::Sort,
                tuple: vec!["not a bijection".into()],
            });
        }
        for sym in Sym::ALL {
            if let Err(m) = check_embedding(s1, s2, &map, &[sym]) {
                out.push(m);
            }
        }
        out
    }
}

/// Brute-force check of the induced map between the level-`d` structures.
pub fn verify_iso_on_truncation(
    family: &Family,
    system: &CoherentSystem,
    d: usize,
) -> Result<Vec<Mismatch>> {
    Ok(TruncationOracle::new(family, d)?.check(system))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HItem {
    pub item: u8,
    pub passed: bool,
    pub evidence: String,
}

/// The five listed properties of the induced map, checked at levels
/// `1..=bound`.
pub fn verify_h_properties(
    family: &Family,
    system: &CoherentSystem,
    bound: usize,
) -> Result<Vec<HItem>> {
    if let Some(f) = is_coherent_system(family, system)? {
        return Err(Error::Precondition(format!("not a coherent system: {f:?}")));
    }
    let alph = family.alphabet();
    let mut items = Vec::new();

    // (1) read h(f, n, ∅) off the induced map at every level and index
    let mut item1 = (true, String::from("u_{f,n} constant in n at every level"));
    let mut item2 = (
        true,
        String::from("h(f,n,u) = (f,n,u Δ u_f) on every element"),
    );
    for d in 1..=bound {
        let oracle = TruncationOracle::new(family, d)?;
        let map = oracle.induced_map(system);
        let els = oracle.one.elements();
        let two = oracle.two.elements();
        for f in 0..family.len() {
            let reads: Vec<SymbolSet> = oracle
                .one
                .predecessors()
                .iter()
                .map(|&n| {
                    let x = oracle.one.index_of(&crate::structures::TripleElement::new(
                        f,
                        n,
                        SymbolSet::EMPTY,
                    ));
                    two[map.a[x.expect("in level")]].u
                })
                .collect();
            if reads.windows(2).any(|w| w[0] != w[1]) && item1.0 {
                item1 = (
                    false,
                    format!("{} at level {d}: {:?}", family.name(f), reads),
                );
            }
        }
        for (k, x) in els.iter().enumerate() {
            if two[map.a[k]].u != x.u.delta(system.get(family.name(x.f))) && item2.0 {
                item2 = (false, oracle.one.structure().a[k].clone());
            }
        }
        if let Some(m) = oracle.check(system).first() {
            if item2.0 {
                item2 = (
                    false,
                    format!("induced map is not an isomorphism at level {d}: {m}"),
                );
            }
        }
    }
    items.push(HItem {
        item: 1,
        passed: item1.0,
        evidence: item1.1,
    });
    items.push(HItem {
        item: 2,
        passed: item2.0,
        evidence: item2.1,
    });

    let mut item3 = (true, String::from("|u_f| ≤ |u_f'| for every f ≤ f'"));
    for f in 0..family.len() {
        for f2 in family.above(f) {
            let (a, b) = (system.get(family.name(f)), system.get(family.name(f2)));
            if a.len() > b.len() && item3.0 {
                item3 = (
                    false,
                    format!(
                        "|u_{}| = {} > |u_{}| = {}",
                        family.name(f),
                        a.len(),
                        family.name(f2),
                        b.len()
                    ),
                );
            }
        }
    }
    items.push(HItem {
        item: 3,
        passed: item3.0,
        evidence: item3.1,
    });

    let empty = (0..family.len()).find(|&f| system.get(family.name(f)).is_empty());
    items.push(HItem {
        item: 4,
        passed: empty.is_none(),
        evidence: empty.map_or("every u_f is nonempty".into(), |f| {
            format!("u_{} = ∅", family.name(f))
        }),
    });
    let stray = (0..family.len()).find(|&f| {
        !system
            .get(family.name(f))
            .is_subset(family.cofinal_range(f))
    });
    items.push(HItem {
        item: 5,
        passed: stray.is_none(),
        evidence: stray.map_or("every u_f ⊆ ran*(f)".into(), |f| {
            format!(
                "u_{} = {}",
                family.name(f),
                alph.format_set(system.get(family.name(f)))
            )
        }),
    });
    Ok(items)
}

/// Reads a witness off a coherent system: `f*` is the first `≤`-maximal
/// member, and `u` is kept on the members above it.
pub fn extract_sharp(family: &Family, system: &CoherentSystem) -> Result<SharpWitness> {
    if let Some(f) = is_coherent_system(family, system)? {
        return Err(Error::Precondition(format!("not a coherent system: {f:?}")));
    }
    let fstar = *family
        .maximal()
        .first()
        .ok_or_else(|| Error::Precondition("no maximal member".into()))?;
    let u = family
        .above(fstar)
        .into_iter()
        .map(|j| (family.name(j).to_string(), system.get(family.name(j))))
        .collect();
    let witness = SharpWitness {
        fstar: family.name(fstar).to_string(),
        u,
    };
    match verify_sharp(family, &witness)? {
        SharpVerdict::Pass => Ok(witness),
        SharpVerdict::Violation { member, failure } => Err(Error::InvariantViolation(format!(
            "extracted witness fails at `{member}`: {failure:?}"
        ))),
    }
}

/// Serialized form used by the command line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemDoc(pub BTreeMap<String, Vec<String>>);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::testing::*;
    use crate::functions::Alphabet;

    fn sys(family: &Family, pairs: &[(&str, &str)]) -> CoherentSystem {
        CoherentSystem {
            u: pairs
                .iter()
                .map(|(k, v)| (k.to_string(), family.alphabet().parse_set(v).unwrap()))
                .collect(),
        }
    }

    #[test]
    fn coherence_examples() {
        let fam = s1();
        let good = sys(&fam, &[("c_a", "{a}"), ("c_b", "{b}"), ("par", "{a}")]);
        assert_eq!(is_coherent_system(&fam, &good).unwrap(), None);
        let bad = sys(&fam, &[("c_a", "{a}"), ("c_b", "{b}"), ("par", "{a,b}")]);
        assert_eq!(
            is_coherent_system(&fam, &bad).unwrap(),
            Some(CoherenceFailure::EvenSize {
                member: "par".into()
            })
        );
        let f0 = omega_family(&Alphabet::new(["a"]).unwrap(), &[("c_a", "", "a")]);
        assert_eq!(
            is_coherent_system(&f0, &sys(&f0, &[("c_a", "{a}")])).unwrap(),
            None
        );
    }

    #[test]
    fn decide_examples() {
        let f0 = omega_family(&Alphabet::new(["a"]).unwrap(), &[("c_a", "", "a")]);
        assert_eq!(
            decide_limit_iso(&f0).unwrap(),
            Some(sys(&f0, &[("c_a", "{a}")]))
        );
        let fam = s1();
        assert_eq!(
            decide_limit_iso(&fam).unwrap(),
            Some(sys(&fam, &[("c_a", "{a}"), ("c_b", "{b}"), ("par", "{a}")]))
        );
        for fam in bundled_like_families() {
            assert!(decide_limit_iso(&fam).unwrap().is_some());
        }
        assert!(matches!(
            decide_limit_iso(&diamond_family()),
            Err(Error::UnsupportedRegime(_))
        ));
    }

    #[test]
    fn truncation_examples() {
        let fam = s1();
        let good = sys(&fam, &[("c_a", "{a}"), ("c_b", "{b}"), ("par", "{a}")]);
        for d in 1..=4 {
            assert_eq!(verify_iso_on_truncation(&fam, &good, d).unwrap(), vec![]);
        }
        let bad = sys(&fam, &[("c_a", "{a}"), ("c_b", "{b}"), ("par", "{a,b}")]);
        let m = verify_iso_on_truncation(&fam, &bad, 2).unwrap();
        assert_eq!(m[0].symbol, Sym::P);
        let bad = sys(&fam, &[("c_a", "{b}"), ("c_b", "{b}"), ("par", "{a}")]);
        let m = verify_iso_on_truncation(&fam, &bad, 2).unwrap();
        assert!(m.iter().any(|m| m.symbol == Sym::R), "{m:?}");
    }

    #[test]
    fn h_properties_and_extraction() {
        let fam = s1();
        let good = decide_limit_iso(&fam).unwrap().unwrap();
        let items = verify_h_properties(&fam, &good, 3).unwrap();
        assert_eq!(items.len(), 5);
        assert!(items.iter().all(|i| i.passed), "{items:?}");
        let w = extract_sharp(&fam, &good).unwrap();
        assert_eq!(w.fstar, "par");
        assert_eq!(w.u["par"], fam.alphabet().parse_set("{a}").unwrap());

        let f0 = omega_family(&Alphabet::new(["a"]).unwrap(), &[("c_a", "", "a")]);
        assert_eq!(
            extract_sharp(&f0, &decide_limit_iso(&f0).unwrap().unwrap())
                .unwrap()
                .fstar,
            "c_a"
        );
        for fam in bundled_like_families() {
            let s = decide_limit_iso(&fam).unwrap().unwrap();
            assert!(verify_sharp(&fam, &extract_sharp(&fam, &s).unwrap())
                .unwrap()
                .is_pass());
        }
    }

    #[test]
    fn sizes_are_monotone() {
        let fam = omega_family(&ab(), &[("c_a", "", "a"), ("par", "", "ab")]);
        let s = decide_limit_iso(&fam).unwrap().unwrap();
        assert_eq!((s.get("c_a").len(), s.get("par").len()), (1, 1));
    }
}
