use std::collections::BTreeMap;

use serde::Serialize;

use crate::structures::{BitMatrix, SigmaStructure};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClauseResult {
    pub clause: u8,
    pub passed: bool,
    pub evidence: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KMembershipReport {
    pub passed: bool,
    pub clauses: Vec<ClauseResult>,
    pub notes: Vec<String>,
}

impl KMembershipReport {
    pub fn first_failure(&self) -> Option<&ClauseResult> {
        self.clauses.iter().find(|c| !c.passed)
    }
}

/// Clause 1: the `F_c` form a group action of `G` that fixes `π` and `Q`
/// and is regular on every `(π, Q)` cell. Clause 2: `E′` and `E` are
/// equivalence relations and `E′` is the `π`-kernel. Clause 3: every cell
/// over `I × J` is inhabited.
pub fn is_member(m: &SigmaStructure) -> KMembershipReport {
    let mut notes =
        vec!["the action is read as regular (sharply transitive) on each (π, Q) cell".to_string()];
    let clauses = match m.check_shape() {
        Err(e) => vec![ClauseResult {
            clause: 0,
            passed: false,
            evidence: e.to_string(),
        }],
        Ok(()) => vec![clause_one(m), clause_two(m, &mut notes), clause_three(m)],
    };
    KMembershipReport {
        passed: clauses.iter().all(|c| c.passed),
        clauses,
        notes,
    }
}

fn result(clause: u8, failure: Option<String>, ok: &str) -> ClauseResult {
    match failure {
        Some(evidence) => ClauseResult {
            clause,
            passed: false,
            evidence,
        },
        None => ClauseResult {
            clause,
            passed: true,
            evidence: ok.to_string(),
        },
    }
}

fn cells(m: &SigmaStructure) -> BTreeMap<(usize, Option<usize>), Vec<usize>> {
    let mut out: BTreeMap<_, Vec<usize>> = BTreeMap::new();
    for x in 0..m.a_len() {
        out.entry((m.pi[x], m.q_of(x))).or_default().push(x);
    }
    out
}

fn clause_one(m: &SigmaStructure) -> ClauseResult {
    let g = m.group_size();
    let failure = (|| {
        for x in 0..m.a_len() {
            if m.fc(0, x) != x {
                return Some(format!("F_∅ moves {}", m.a[x]));
            }
            for c in 0..g {
                let y = m.fc(c, x);
                if m.pi[y] != m.pi[x] || m.q_of(y) != m.q_of(x) {
                    return Some(format!(
                        "F_{} moves {} to another cell",
                        m.group_labels[c], m.a[x]
                    ));
                }
                for d in 0..g {
                    if m.fc(d, y) != m.fc(c ^ d, x) {
                        return Some(format!(
                            "F_{} ∘ F_{} ≠ F_{} at {}",
                            m.group_labels[d],
                            m.group_labels[c],
                            m.group_labels[c ^ d],
                            m.a[x]
                        ));
                    }
                }
            }
        }
        for cell in cells(m).values() {
            if cell.len() != g {
                return Some(format!(
                    "cell of {} has {} elements, |G| = {g}",
                    m.a[cell[0]],
                    cell.len()
                ));
            }
            // with the cell of size |G|, regularity is injectivity of c ↦ F_c(x)
            let x = cell[0];
            let mut seen = vec![false; m.a_len()];
            for c in 0..g {
                if std::mem::replace(&mut seen[m.fc(c, x)], true) {
                    return Some(format!("two group elements agree on {}", m.a[x]));
                }
            }
        }
        None
    })();
    result(1, failure, "regular action on every cell")
}

fn equivalence(m: &SigmaStructure, r: &BitMatrix, name: &str) -> Option<String> {
    let n = m.a_len();
    for x in 0..n {
        if !r.get(x, x) {
            return Some(format!("{name} is not reflexive at {}", m.a[x]));
        }
        for y in 0..n {
            if r.get(x, y) {
                if !r.get(y, x) {
                    return Some(format!(
                        "{name} is not symmetric at ({}, {})",
                        m.a[x], m.a[y]
                    ));
                }
                if !r.row_subset(y, x) {
                    return Some(format!(
                        "{name} is not transitive through ({}, {})",
                        m.a[x], m.a[y]
                    ));
                }
            }
        }
    }
    None
}

fn clause_two(m: &SigmaStructure, notes: &mut Vec<String>) -> ClauseResult {
    let n = m.a_len();
    let failure = equivalence(m, &m.e_prime, "E'")
        .or_else(|| equivalence(m, &m.e, "E"))
        .or_else(|| {
            (0..n)
                .flat_map(|x| (0..n).map(move |y| (x, y)))
                .find(|&(x, y)| m.e_prime.get(x, y) != (m.pi[x] == m.pi[y]))
                .map(|(x, y)| format!("E' differs from the π-kernel at ({}, {})", m.a[x], m.a[y]))
        });
    if failure.is_none() {
        let refines = (0..n).all(|x| (0..n).all(|y| !m.e.get(x, y) || m.e_prime.get(x, y)));
        if !refines {
            notes.push("E does not refine E' (allowed)".into());
        }
    }
    result(2, failure, "E' is the π-kernel; E is an equivalence")
}

fn clause_three(m: &SigmaStructure) -> ClauseResult {
    let Some(j) = &m.j else {
        return result(3, Some("no J sort".into()), "");
    };
    let cells = cells(m);
    let failure = (0..m.i.len())
        .flat_map(|i| (0..j.len()).map(move |k| (i, k)))
        .find(|&(i, k)| !cells.contains_key(&(i, Some(k))))
        .map(|(i, k)| format!("no element over ({}, {})", m.i[i], j[k]));
    result(3, failure, "every cell over I × J is inhabited")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::testing::*;
    use crate::structures::{build_level, Side};

    #[test]
    fn levels_are_members() {
        for fam in bundled_like_families() {
            for d in 1..=3 {
                for side in [Side::Zero, Side::One, Side::Two] {
                    let l = build_level(side, d, &fam, true).unwrap();
                    let r = is_member(l.structure());
                    assert!(r.passed, "{:?} at {d}: {:?}", side, r.first_failure());
                }
            }
        }
    }

    #[test]
    fn short_fiber_fails_clause_one() {
        let l = build_level(Side::One, 1, &s1(), true).unwrap();
        let m = l.structure();
        // remove one element of the first cell
        let keep: Vec<usize> = (0..m.a_len()).filter(|&x| x != 3).collect();
        let mut sub = m.clone();
        sub.a = keep.iter().map(|&x| m.a[x].clone()).collect();
        sub.pi = keep.iter().map(|&x| m.pi[x]).collect();
        sub.q = Some(vec![0; keep.len()]);
        let g = m.group_size();
        let pos = |x: usize| keep.iter().position(|&k| k == x).unwrap_or(0);
        sub.act = (0..g)
            .flat_map(|c| keep.iter().map(move |&x| (c, x)))
            .map(|(c, x)| pos(m.fc(c, x)))
            .collect();
        sub.p = keep.iter().map(|&x| m.p[x]).collect();
        sub.dv = BitMatrix::from_fn(g, keep.len(), |v, k| m.dv(v, keep[k]));
        let rel = |r: &BitMatrix| {
            BitMatrix::from_fn(keep.len(), keep.len(), |x, y| r.get(keep[x], keep[y]))
        };
        sub.e_prime = rel(&m.e_prime);
        sub.e = rel(&m.e);
        sub.r = rel(&m.r);
        let r = is_member(&sub);
        assert!(!r.passed);
        assert_eq!(r.first_failure().unwrap().clause, 1);
    }

    #[test]
    fn empty_sorts_pass_vacuously() {
        let l = build_level(Side::Zero, 3, &s1(), true).unwrap();
        assert_eq!(l.structure().a_len(), 0);
        assert!(is_member(l.structure()).passed);
    }

    #[test]
    fn broken_e_prime_fails_clause_two() {
        let l = build_level(Side::One, 1, &s1(), true).unwrap();
        let mut m = l.structure().clone();
        m.e_prime.set(0, 4, true);
        m.e_prime.set(4, 0, true);
        assert_eq!(is_member(&m).first_failure().unwrap().clause, 2);
    }
}
