use std::collections::BTreeMap;
use std::sync::Mutex;

use super::witness::{require_omega, SharpWitness};
use crate::error::{Error, Result};
use crate::functions::{preimage, EpFn, EpSet, Family, Func, Member, Symbol, SymbolSet};

/// A deterministic in/out decision on eventually periodic subsets of ℕ.
pub trait UltraOracle {
    fn name(&self) -> &str;
    fn decide(&self, set: &EpSet) -> bool;
}

/// `A ∈ U₀` iff `A` contains every sufficiently large multiple of its period.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroResidue;

impl UltraOracle for ZeroResidue {
    fn name(&self) -> &str {
        "zero-residue"
    }

    fn decide(&self, set: &EpSet) -> bool {
        let p = set.period_len();
        // first multiple of p past the prefix; the rest repeat it
        let m = set.prefix_len().div_ceil(p) * p;
        set.contains(m)
    }
}

/// An oracle defined by a closure, for tests and scenario plumbing.
pub struct FnOracle<F> {
    name: String,
    decide: F,
}

impl<F: Fn(&EpSet) -> bool> FnOracle<F> {
    pub fn new(name: impl Into<String>, decide: F) -> Self {
        FnOracle {
            name: name.into(),
            decide,
        }
    }
}

impl<F: Fn(&EpSet) -> bool> UltraOracle for FnOracle<F> {
    fn name(&self) -> &str {
        &self.name
    }

    fn decide(&self, set: &EpSet) -> bool {
        (self.decide)(set)
    }
}

const CACHE_LIMIT: usize = 512;

/// Wraps an oracle and checks, on every query, that complements are decided
/// oppositely and that the new answer is closed under intersection with the
/// sets already answered `in`.
pub struct CheckedOracle<'a> {
    inner: &'a dyn UltraOracle,
    seen: Mutex<BTreeMap<EpSet, bool>>,
}

impl<'a> CheckedOracle<'a> {
    pub fn new(inner: &'a dyn UltraOracle) -> Self {
        CheckedOracle {
            inner,
            seen: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn name(&self) -> &str {
        self.inner.name()
    }

    pub fn decide(&self, set: &EpSet) -> Result<bool> {
        let mut seen = self.seen.lock().expect("oracle cache poisoned");
        if let Some(&v) = seen.get(set) {
            return Ok(v);
        }
        let v = self.inner.decide(set);
        let inconsistent = |what: String| {
            Err(Error::OracleInconsistency(format!(
                "{}: {what}",
                self.inner.name()
            )))
        };
        if self.inner.decide(&set.complement()) == v {
            return inconsistent(format!("{set} and its complement are decided alike"));
        }
        if v && set.is_empty() {
            return inconsistent("∅ is in".into());
        }
        if v {
            for (other, _) in seen.iter().filter(|(_, &b)| b) {
                let meet = set.intersection(other);
                if !self.inner.decide(&meet) {
                    return inconsistent(format!(
                        "{set} and {other} are in, their intersection is not"
                    ));
                }
            }
        }
        if seen.len() < CACHE_LIMIT {
            seen.insert(set.clone(), v);
        }
        Ok(v)
    }
}

/// Result of [`sharp_from_ultra`]; `family` includes `f*` when it was adjoined.
#[derive(Debug, Clone)]
pub struct UltraWitness {
    pub family: Family,
    pub witness: SharpWitness,
    pub adjoined: Option<String>,
}

/// Reads off `u_f = {i_f}` with `f⁻¹{i_f}` the unique in-fiber, and takes
/// `f*` to be the constant function at the first symbol.
pub fn sharp_from_ultra(family: &Family, oracle: &dyn UltraOracle) -> Result<UltraWitness> {
    require_omega(family)?;
    if family.alphabet().is_empty() {
        return Err(Error::Precondition("empty alphabet".into()));
    }
    let checked = CheckedOracle::new(oracle);
    let zero = Symbol(0);
    let constant = EpFn::constant(zero);
    let existing = (0..family.len()).find(|&i| family.periodic(i).ok() == Some(&constant));
    let (family, fstar, adjoined) = match existing {
        Some(i) => (family.clone(), i, None),
        None => {
            let taken: Vec<String> = family.members().iter().map(|m| m.name.clone()).collect();
            let name = family
                .alphabet()
                .fresh_name(&format!("c_{}", family.alphabet().name(zero)), &taken);
            let extended = family.with_member(Member {
                name: name.clone(),
                func: Func::Periodic(constant),
            })?;
            let idx = extended.index_of(&name)?;
            (extended, idx, Some(name))
        }
    };
    let mut u = BTreeMap::new();
    for j in 0..family.len() {
        let f = family.periodic(j)?;
        let mut ins = SymbolSet::EMPTY;
        for x in f.range().iter() {
            if checked.decide(&preimage(f, SymbolSet::singleton(x)))? {
                ins.insert(x);
            }
        }
        if ins.len() != 1 {
            return Err(Error::OracleInconsistency(format!(
                "{} puts {} fibers of `{}` in",
                oracle.name(),
                ins.len(),
                family.name(j)
            )));
        }
        u.insert(family.name(j).to_string(), ins);
    }
    // only members above f* belong to the witness; with f* constant that is all
    let above = family.above(fstar);
    u.retain(|k, _| above.iter().any(|&j| family.name(j) == k));
    let witness = SharpWitness {
        fstar: family.name(fstar).to_string(),
        u,
    };
    Ok(UltraWitness {
        family,
        witness,
        adjoined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::testing::*;
    use crate::functions::Alphabet;
    use crate::sharp::{check_measures, verify_sharp, DerivedFilter, Measure};

    /// Independent oracle: look at the multiples of the period far out.
    fn zero_residue_far(set: &EpSet) -> bool {
        let p = set.period_len();
        let k = set.prefix_len() + 10;
        set.contains(k * p) && set.contains((k + 3) * p)
    }

    #[test]
    fn zero_residue_examples() {
        let z = ZeroResidue;
        for (pre, per) in [
            ("", "10"),
            ("", "01"),
            ("111", "0"),
            ("0", "1"),
            ("01", "001"),
            ("1101", "0110"),
        ] {
            let s = EpSet::parse(pre, per).unwrap();
            assert_eq!(z.decide(&s), zero_residue_far(&s), "{s}");
            assert_ne!(z.decide(&s), z.decide(&s.complement()));
        }
    }

    #[test]
    fn checked_oracle_catches_a_bad_oracle() {
        let bad = FnOracle::new("always", |_: &EpSet| true);
        let c = CheckedOracle::new(&bad);
        assert!(matches!(
            c.decide(&EpSet::everything()),
            Err(Error::OracleInconsistency(_))
        ));

        // majority on {0,1,2}: consistent on complements, not on intersections
        let majority = FnOracle::new("majority", |s: &EpSet| {
            (0..3).filter(|&n| s.contains(n)).count() >= 2
        });
        let c = CheckedOracle::new(&majority);
        assert!(c.decide(&EpSet::parse("110", "0").unwrap()).unwrap());
        assert!(matches!(
            c.decide(&EpSet::parse("011", "0").unwrap()),
            Err(Error::OracleInconsistency(_))
        ));

        let z = ZeroResidue;
        let c = CheckedOracle::new(&z);
        for (pre, per) in [("", "10"), ("", "01"), ("1", "0"), ("", "110")] {
            c.decide(&EpSet::parse(pre, per).unwrap()).unwrap();
        }
    }

    #[test]
    fn ultra_examples() {
        let fam = s1();
        let r = sharp_from_ultra(&fam, &ZeroResidue).unwrap();
        assert_eq!(r.adjoined, None);
        assert_eq!(r.witness.fstar, "c_a");
        assert_eq!(r.witness.u["par"], fam.alphabet().parse_set("{a}").unwrap());
        assert!(verify_sharp(&r.family, &r.witness).unwrap().is_pass());

        let f0 = omega_family(&Alphabet::new(["a"]).unwrap(), &[("c_a", "", "a")]);
        let r = sharp_from_ultra(&f0, &ZeroResidue).unwrap();
        assert_eq!(r.witness.u["c_a"], SymbolSet::singleton(Symbol(0)));

        let x = ab();
        let fam = omega_family(&x, &[("f", "a", "b")]);
        let r = sharp_from_ultra(&fam, &ZeroResidue).unwrap();
        assert_eq!(r.adjoined.as_deref(), Some("c_a"));
        assert_eq!(r.witness.u["f"], x.parse_set("{b}").unwrap());
        assert!(verify_sharp(&r.family, &r.witness).unwrap().is_pass());
    }

    #[test]
    fn ultra_rejects_inconsistent_oracles() {
        let none_in = FnOracle::new("nothing", |s: &EpSet| s == &EpSet::everything());
        assert!(matches!(
            sharp_from_ultra(&s1(), &none_in),
            Err(Error::OracleInconsistency(_))
        ));
    }

    #[test]
    fn round_trip_agrees_with_the_oracle() {
        for fam in bundled_like_families() {
            let r = sharp_from_ultra(&fam, &ZeroResidue).unwrap();
            let filter =
                DerivedFilter::with_default_markers(r.family.clone(), r.witness.clone()).unwrap();
            for j in 0..r.family.len() {
                let f = r.family.periodic(j).unwrap();
                for x in f.range().subsets() {
                    let verdict = check_measures(&filter, j, x).unwrap();
                    let expected = ZeroResidue.decide(&preimage(f, x));
                    assert_eq!(verdict == Measure::DecidedIn, expected);
                }
            }
        }
    }
}
