//! Repleteness: closure of a family under the least-failure combination of
//! finitely many fibers.

use super::alphabet::{Alphabet, Symbol};
use super::epfn::{compare, EpFn, Func};
use super::family::Family;
use crate::error::{Error, Result};

/// Combines fibers `B_ε = f_ε⁻¹{i_ε}` into `f` over `{i0, …, iμ}` with
/// `f(n) = i0` iff `n ∈ ⋂ B_ε`, and otherwise `f(n) = i(α+1)` for the least
/// `α` with `n ∉ B_α`.
pub fn replete_combine(parts: &[(&EpFn, Symbol)]) -> Result<(Alphabet, EpFn)> {
    if parts.is_empty() {
        return Err(Error::Precondition(
            "replete_combine needs at least one fiber".into(),
        ));
    }
    let mu = parts.len();
    let alphabet = Alphabet::indexed(mu + 1)?;
    // start from the constant i0 and fold the fibers in; zip_with keeps the
    // window right
    let mut f = EpFn::constant(Symbol(0));
    for (alpha, (g, i)) in parts.iter().enumerate().rev() {
        let marker = Symbol((alpha + 1) as u8);
        let i = *i;
        f = f.zip_with(g, |cur, v| if v == i { cur } else { marker });
    }
    Ok((alphabet, f))
}

/// Verdict of [`check_replete`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RepleteVerdict {
    Pass {
        tuples: usize,
    },
    /// A fiber tuple `(member, value)` whose combination no member realizes.
    Counterexample {
        fibers: Vec<(usize, Symbol)>,
    },
    /// The budget ran out before all tuples were checked.
    Indeterminate {
        checked: usize,
    },
}

/// Checks, for every `μ ≤ mu_max` and every `μ`-tuple of fibers of members,
/// that some member is `≤`-equivalent to the combined function. At most
/// `budget` tuples are examined.
pub fn check_replete(family: &Family, mu_max: usize, budget: usize) -> Result<RepleteVerdict> {
    if mu_max == 0 {
        return Err(Error::Precondition("mu_max must be at least 1".into()));
    }
    let mut fibers = Vec::new();
    for i in 0..family.len() {
        for s in family.periodic(i)?.range().iter() {
            fibers.push((i, s));
        }
    }
    let members: Vec<Func> = family.members().iter().map(|m| m.func.clone()).collect();
    let mut checked = 0;
    for mu in 1..=mu_max {
        let mut idx = vec![0usize; mu];
        loop {
            if checked == budget {
                return Ok(RepleteVerdict::Indeterminate { checked });
            }
            checked += 1;
            let tuple: Vec<(usize, Symbol)> = idx.iter().map(|&k| fibers[k]).collect();
            let parts: Vec<(&EpFn, Symbol)> = tuple
                .iter()
                .map(|&(i, s)| (family.periodic(i).expect("checked above"), s))
                .collect();
            let (_, combined) = replete_combine(&parts)?;
            let combined = Func::Periodic(combined);
            let realized = members
                .iter()
                .any(|g| compare(g, &combined).is_some() && compare(&combined, g).is_some());
            if !realized {
                return Ok(RepleteVerdict::Counterexample { fibers: tuple });
            }
            // odometer over fiber indices
            let mut k = mu;
            loop {
                if k == 0 {
                    break;
                }
                idx[k - 1] += 1;
                if idx[k - 1] < fibers.len() {
                    break;
                }
                idx[k - 1] = 0;
                k -= 1;
            }
            if k == 0 {
                break;
            }
        }
    }
    Ok(RepleteVerdict::Pass { tuples: checked })
}
