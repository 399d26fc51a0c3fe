use std::collections::BTreeMap;

use serde::Serialize;

use super::witness::{require_omega, verify_sharp, SharpVerdict, SharpWitness};
use crate::error::{Error, Result};
use crate::functions::{preimage, EpSet, Family, Symbol, SymbolSet};

/// Selected markers `i_f ∈ u_f` with `e(i_f) = target` for every `f ≥ f*`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkerChoice {
    pub target: Symbol,
    pub markers: BTreeMap<String, Symbol>,
}

impl MarkerChoice {
    /// Derives the markers for `target` (default: `min u_{f*}` in alphabet
    /// order). The witness must already verify.
    pub fn new(family: &Family, witness: &SharpWitness, target: Option<Symbol>) -> Result<Self> {
        let fstar = family.index_of(&witness.fstar)?;
        let base = witness
            .base_set()
            .ok_or_else(|| Error::InvariantViolation("witness has no u_{f*}".into()))?;
        let target = match target {
            Some(t) if base.contains(t) => t,
            Some(t) => {
                return Err(Error::Precondition(format!(
                    "marker target `{}` is not in u_{{f*}}",
                    family.alphabet().name(t)
                )))
            }
            None => base
                .min()
                .ok_or_else(|| Error::InvariantViolation("u_{f*} is empty".into()))?,
        };
        let mut markers = BTreeMap::new();
        for j in family.above(fstar) {
            let e = family.leq(fstar, j).expect("above");
            let uf = witness.u.get(family.name(j)).copied().unwrap_or_default();
            let i = uf
                .iter()
                .find(|&s| e.apply(s) == Some(target))
                .ok_or_else(|| {
                    Error::InvariantViolation(format!("no marker for `{}`", family.name(j)))
                })?;
            markers.insert(family.name(j).to_string(), i);
        }
        Ok(MarkerChoice { target, markers })
    }
}

/// The filter on ℕ generated by the marked fibers: `A ∈ U` iff
/// `f⁻¹{i_f} ∩ ⌊d⌋ ⊆ A` for some `f ≥ f*` and some `d`.
#[derive(Debug, Clone)]
pub struct DerivedFilter {
    family: Family,
    witness: SharpWitness,
    markers: MarkerChoice,
    // (member index, marked fiber) for every f ≥ f*
    fibers: Vec<(usize, EpSet)>,
}

impl DerivedFilter {
    /// Validates the witness and the markers before anything is derived.
    pub fn new(family: Family, witness: SharpWitness, markers: MarkerChoice) -> Result<Self> {
        require_omega(&family)?;
        if let SharpVerdict::Violation { member, failure } = verify_sharp(&family, &witness)? {
            return Err(Error::InvariantViolation(format!(
                "witness fails at `{member}`: {failure:?}"
            )));
        }
        let fstar = family.index_of(&witness.fstar)?;
        let base = witness.base_set().expect("verified");
        if !base.contains(markers.target) {
            return Err(Error::InvariantViolation(
                "marker target outside u_{f*}".into(),
            ));
        }
        let mut fibers = Vec::new();
        for j in family.above(fstar) {
            let name = family.name(j);
            let i = *markers
                .markers
                .get(name)
                .ok_or_else(|| Error::InvariantViolation(format!("no marker for `{name}`")))?;
            let e = family.leq(fstar, j).expect("above");
            if !witness.u[name].contains(i) || e.apply(i) != Some(markers.target) {
                return Err(Error::InvariantViolation(format!(
                    "marker for `{name}` does not project to the target"
                )));
            }
            fibers.push((j, preimage(family.periodic(j)?, SymbolSet::singleton(i))));
        }
        // f ≤ f′ above f* must send i_{f′} to i_f, or two marked fibers can
        // be almost disjoint
        for &(j, _) in &fibers {
            for &(k, _) in &fibers {
                if let Some(e) = family.leq(j, k) {
                    let (ij, ik) = (
                        markers.markers[family.name(j)],
                        markers.markers[family.name(k)],
                    );
                    if e.apply(ik) != Some(ij) {
                        return Err(Error::InvariantViolation(format!(
                            "markers of `{}` and `{}` are incoherent",
                            family.name(j),
                            family.name(k)
                        )));
                    }
                }
            }
        }
        Ok(DerivedFilter {
            family,
            witness,
            markers,
            fibers,
        })
    }

    /// Builds the filter with the default marker target.
    pub fn with_default_markers(family: Family, witness: SharpWitness) -> Result<Self> {
        let markers = MarkerChoice::new(&family, &witness, None)?;
        DerivedFilter::new(family, witness, markers)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn witness(&self) -> &SharpWitness {
        &self.witness
    }

    pub fn markers(&self) -> &MarkerChoice {
        &self.markers
    }

    /// Membership together with a certificate `(f, d)`.
    pub fn membership(&self, set: &EpSet) -> Option<(String, usize)> {
        self.fibers
            .iter()
            .find(|(_, fib)| fib.almost_subset(set))
            .map(|(j, fib)| {
                let bad = fib.intersection(&set.complement());
                // bad is finite; its largest element (or 0) is a valid threshold
                let window =
                    fib.prefix_len() + set.prefix_len() + fib.period_len() * set.period_len() + 1;
                let d = (0..window).filter(|&n| bad.contains(n)).max().unwrap_or(0);
                (self.family.name(*j).to_string(), d)
            })
    }

    pub fn contains(&self, set: &EpSet) -> bool {
        self.membership(set).is_some()
    }
}

pub fn filter_contains(filter: &DerivedFilter, set: &EpSet) -> bool {
    filter.contains(set)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LawReport {
    pub checked: usize,
    pub failures: Vec<String>,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(what());
        }
    }
}

/// Properness, tails, closure under pairwise intersection and upward closure,
/// checked on the given sets and thresholds.
pub fn check_filter_laws(
    filter: &DerivedFilter,
    sets: &[EpSet],
    thresholds: &[usize],
) -> LawReport {
    let mut report = LawReport::default();
    report.record(!filter.contains(&EpSet::nothing()), || {
        "∅ is in the filter".into()
    });
    report.record(filter.contains(&EpSet::everything()), || {
        "ℕ is not in the filter".into()
    });
    for &d in thresholds {
        report.record(filter.contains(&EpSet::tail(d)), || {
            format!("tail above {d} is not in the filter")
        });
    }
    let member: Vec<bool> = sets.iter().map(|s| filter.contains(s)).collect();
    for (a, &a_in) in sets.iter().zip(&member) {
        for (b, &b_in) in sets.iter().zip(&member) {
            if a_in && b_in {
                report.record(filter.contains(&a.intersection(b)), || {
                    format!("{a} ∩ {b} is not in the filter")
                });
            }
            if a_in && a.is_subset(b) {
                report.record(b_in, || format!("{a} is in, {b} ⊇ it is not"));
            }
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompleteVerdict {
    Pass,
    Fail { intersection: EpSet },
}

/// The intersection of listed filter sets is again in the filter. Every
/// listed set must be a member; the empty list intersects to ℕ.
pub fn check_complete(filter: &DerivedFilter, members: &[EpSet]) -> Result<CompleteVerdict> {
    let mut acc = EpSet::everything();
    for (k, m) in members.iter().enumerate() {
        if !filter.contains(m) {
            return Err(Error::Precondition(format!(
                "listed set #{k} ({m}) is not in the filter"
            )));
        }
        acc = acc.intersection(m);
    }
    if filter.contains(&acc) {
        Ok(CompleteVerdict::Pass)
    } else {
        Ok(CompleteVerdict::Fail { intersection: acc })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    DecidedIn,
    DecidedOut,
}

/// Exactly one of `f⁻¹X` and its complement is in the filter. Anything else
/// is reported as an invariant violation.
pub fn check_measures(filter: &DerivedFilter, member: usize, x: SymbolSet) -> Result<Measure> {
    let a = preimage(filter.family.periodic(member)?, x);
    match (filter.contains(&a), filter.contains(&a.complement())) {
        (true, false) => Ok(Measure::DecidedIn),
        (false, true) => Ok(Measure::DecidedOut),
        (both, _) => Err(Error::InvariantViolation(format!(
            "filter {} {a} and its complement",
            if both {
                "contains both"
            } else {
                "contains neither"
            }
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::testing::*;
    use crate::functions::Alphabet;
    use crate::sharp::search_sharp;

    fn evens() -> EpSet {
        EpSet::parse("", "10").unwrap()
    }

    fn odds() -> EpSet {
        EpSet::parse("", "01").unwrap()
    }

    /// S1 with f* = par, u_par = {a}.
    fn s1_filter() -> DerivedFilter {
        let fam = s1();
        let a = fam.alphabet().parse_set("{a}").unwrap();
        let w = SharpWitness {
            fstar: "par".into(),
            u: [("par".to_string(), a)].into(),
        };
        DerivedFilter::with_default_markers(fam, w).unwrap()
    }

    fn s0_filter() -> DerivedFilter {
        let fam = omega_family(&Alphabet::new(["a"]).unwrap(), &[("c_a", "", "a")]);
        let w = search_sharp(&fam).unwrap();
        DerivedFilter::with_default_markers(fam, w).unwrap()
    }

    #[test]
    fn membership_examples() {
        let f = s1_filter();
        assert!(f.contains(&evens()));
        assert!(!f.contains(&odds()));
        assert!(!f.contains(&EpSet::nothing()));
        assert_eq!(f.membership(&evens()), Some(("par".into(), 0)));
        // evens minus {0, 2}: certificate threshold 2
        let late = evens().intersection(&EpSet::tail(2));
        assert_eq!(f.membership(&late), Some(("par".into(), 2)));
    }

    #[test]
    fn law_examples() {
        let f = s1_filter();
        let r = check_filter_laws(&f, &[evens(), EpSet::everything()], &[0, 5]);
        assert!(r.passed(), "{r:?}");

        let f0 = s0_filter();
        let cofinite = [
            EpSet::tail(0),
            EpSet::tail(3),
            EpSet::parse("0101", "1").unwrap(),
        ];
        let r = check_filter_laws(&f0, &cofinite, &[0, 1, 7]);
        assert!(r.passed(), "{r:?}");
        // S0's filter is the tail filter: cofinite sets in, infinite coinfinite sets out
        assert!(!f0.contains(&evens()));
        for s in &cofinite {
            assert!(f0.contains(s));
        }
    }

    #[test]
    fn corrupted_markers_are_rejected() {
        let fam = s1();
        let a = fam.alphabet().parse_set("{a}").unwrap();
        let w = SharpWitness {
            fstar: "par".into(),
            u: [("par".to_string(), a)].into(),
        };
        let bad = MarkerChoice {
            target: Symbol(0),
            markers: [("par".to_string(), Symbol(1))].into(),
        };
        assert!(matches!(
            DerivedFilter::new(fam, w, bad),
            Err(Error::InvariantViolation(_))
        ));
    }

    #[test]
    fn incoherent_markers_are_rejected() {
        // t and t_sw are equivalent through the swap; below the constant
        // f* = c_a every singleton choice passes the bijection test
        let fam = omega_family(
            &ab(),
            &[("c_a", "", "a"), ("t", "a", "ab"), ("t_sw", "b", "ba")],
        );
        let a = fam.alphabet().parse_set("{a}").unwrap();
        let w = SharpWitness {
            fstar: "c_a".into(),
            u: [
                ("c_a".to_string(), a),
                ("t".to_string(), a),
                ("t_sw".to_string(), a),
            ]
            .into(),
        };
        assert!(verify_sharp(&fam, &w).unwrap().is_pass());
        assert!(matches!(
            DerivedFilter::with_default_markers(fam, w),
            Err(Error::InvariantViolation(m)) if m.contains("incoherent")
        ));
    }

    #[test]
    fn completeness_examples() {
        let f = s1_filter();
        assert_eq!(
            check_complete(&f, &[evens(), EpSet::tail(3)]).unwrap(),
            CompleteVerdict::Pass
        );
        let f0 = s0_filter();
        assert_eq!(
            check_complete(&f0, &[EpSet::tail(1), EpSet::tail(5)]).unwrap(),
            CompleteVerdict::Pass
        );
        assert_eq!(check_complete(&f, &[]).unwrap(), CompleteVerdict::Pass);
        assert!(matches!(
            check_complete(&f, &[odds()]),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn measure_examples() {
        let f = s1_filter();
        let x = f.family().alphabet().clone();
        let par = f.family().index_of("par").unwrap();
        assert_eq!(
            check_measures(&f, par, x.parse_set("{a}").unwrap()).unwrap(),
            Measure::DecidedIn
        );
        assert_eq!(
            check_measures(&f, par, x.parse_set("{b}").unwrap()).unwrap(),
            Measure::DecidedOut
        );
        let f0 = s0_filter();
        assert_eq!(
            check_measures(&f0, 0, SymbolSet::EMPTY).unwrap(),
            Measure::DecidedOut
        );
    }

    #[test]
    fn different_targets_give_different_filters() {
        let fam = omega_family(&ab(), &[("par", "", "ab")]);
        let both = fam.alphabet().parse_set("{a,b}").unwrap();
        let w = SharpWitness {
            fstar: "par".into(),
            u: [("par".to_string(), both)].into(),
        };
        let fa = DerivedFilter::new(
            fam.clone(),
            w.clone(),
            MarkerChoice::new(&fam, &w, Some(Symbol(0))).unwrap(),
        )
        .unwrap();
        let fb = DerivedFilter::new(
            fam.clone(),
            w.clone(),
            MarkerChoice::new(&fam, &w, Some(Symbol(1))).unwrap(),
        )
        .unwrap();
        let disagree = fam
            .alphabet()
            .all()
            .iter()
            .map(|s| preimage(fam.periodic(0).unwrap(), SymbolSet::singleton(s)))
            .any(|a| fa.contains(&a) != fb.contains(&a));
        assert!(disagree);
        assert!(fa.contains(&evens()) && fb.contains(&odds()));
    }

    #[test]
    fn filter_needs_omega() {
        let fam = s1();
        let w = search_sharp(&fam).unwrap();
        assert!(DerivedFilter::with_default_markers(fam, w).is_ok());
    }
}
