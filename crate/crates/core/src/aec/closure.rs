use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::member::is_member;
use super::{Point, Subset};
use crate::error::{Error, Result};
use crate::structures::SigmaStructure;

/// Largest structure (all sorts together) for which the substructure
/// lattice is enumerated.
pub const BRUTE_FORCE_LIMIT: usize = 40;

// free choices in the lattice enumeration
const MAX_FREE_BITS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Closure {
    pub set: Subset,
    pub structure: SigmaStructure,
}

fn check_in_range(m: &SigmaStructure, x: &Subset) -> Result<()> {
    let bad = |sort: &str, k: &usize| Error::UnknownElement(format!("{sort}-element #{k}"));
    if let Some(k) = x.a.iter().find(|&&k| k >= m.a_len()) {
        return Err(bad("A", k));
    }
    if let Some(k) = x.i.iter().find(|&&k| k >= m.i.len()) {
        return Err(bad("I", k));
    }
    if let Some(k) = x.j.iter().find(|&&k| k >= m.j_len()) {
        return Err(bad("J", k));
    }
    Ok(())
}

/// `cl¹ = (X∩J) ∪ Q[X∩A]`, `cl² = (X∩I) ∪ π[X∩A]`, and `cl³` the elements
/// of `A` over `cl² × cl¹`; the result is the substructure on their union.
pub fn closure(m: &SigmaStructure, x: &Subset) -> Result<Closure> {
    check_in_range(m, x)?;
    let mut set = Subset {
        a: Default::default(),
        i: x.i.clone(),
        j: x.j.clone(),
    };
    for &a in &x.a {
        set.i.insert(m.pi[a]);
        if let Some(q) = m.q_of(a) {
            set.j.insert(q);
        }
    }
    set.a = (0..m.a_len())
        .filter(|&a| set.i.contains(&m.pi[a]) && m.q_of(a).is_none_or(|q| set.j.contains(&q)))
        .collect();
    let (a, i, j): (Vec<usize>, Vec<usize>, Vec<usize>) = (
        set.a.iter().copied().collect(),
        set.i.iter().copied().collect(),
        set.j.iter().copied().collect(),
    );
    let structure = m.restrict(&a, &i, &j)?;
    Ok(Closure { set, structure })
}

/// `F`-orbits of the `A` sort, each sorted, ordered by least element.
fn orbits(m: &SigmaStructure) -> Vec<Vec<usize>> {
    let n = m.a_len();
    let mut comp = vec![usize::MAX; n];
    let mut out = Vec::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut stack = vec![start];
        let mut orbit = Vec::new();
        comp[start] = id;
        while let Some(x) = stack.pop() {
            orbit.push(x);
            for c in 0..m.group_size() {
                let y = m.fc(c, x);
                if comp[y] == usize::MAX {
                    comp[y] = id;
                    stack.push(y);
                }
            }
        }
        orbit.sort_unstable();
        out.push(orbit);
    }
    out
}

/// Carrier sets as bitmasks over the points `A`, then `I`, then `J`.
struct Points {
    a: usize,
    i: usize,
}

impl Points {
    fn new(m: &SigmaStructure) -> Self {
        Points {
            a: m.a_len(),
            i: m.i.len(),
        }
    }

    fn mask(&self, x: &Subset) -> u64 {
        let mut out = 0u64;
        x.a.iter().for_each(|&k| out |= 1 << k);
        x.i.iter().for_each(|&k| out |= 1 << (self.a + k));
        x.j.iter().for_each(|&k| out |= 1 << (self.a + self.i + k));
        out
    }

    fn subset(&self, mask: u64, total: usize) -> Subset {
        let mut s = Subset::default();
        for k in (0..total).filter(|k| mask >> k & 1 == 1) {
            if k < self.a {
                s.a.insert(k);
            } else if k < self.a + self.i {
                s.i.insert(k - self.a);
            } else {
                s.j.insert(k - self.a - self.i);
            }
        }
        s
    }
}

/// Clause 3 on a candidate carrier: a `J` sort exists and every chosen
/// `I × J` cell is inhabited.
fn cells_inhabited(m: &SigmaStructure, a: &[usize], i: &[usize], j: &[usize]) -> bool {
    m.has_j()
        && i.iter().all(|&ci| {
            j.iter()
                .all(|&cj| a.iter().any(|&x| m.pi[x] == ci && m.q_of(x) == Some(cj)))
        })
}

/// `I` and `J` points lying under some `A` element.
fn covered(m: &SigmaStructure) -> (Vec<usize>, Vec<usize>) {
    let mut i: Vec<usize> = m.pi.clone();
    let mut j: Vec<usize> = m.q.clone().unwrap_or_default();
    for v in [&mut i, &mut j] {
        v.sort_unstable();
        v.dedup();
    }
    (i, j)
}

/// Members with nonempty `I` and `J` parts. Clause 3 keeps every chosen
/// point under some `A` element, so only covered points are enumerated.
fn lattice_masks(m: &SigmaStructure) -> Result<Vec<u64>> {
    if m.total_len() > BRUTE_FORCE_LIMIT {
        return Err(Error::SizeGuard(format!(
            "structure has {} elements, brute force limit {BRUTE_FORCE_LIMIT}",
            m.total_len()
        )));
    }
    let (ci, cj) = covered(m);
    let bits = ci.len() + cj.len();
    if bits > MAX_FREE_BITS {
        return Err(Error::SizeGuard(format!(
            "{bits} free choices of I and J elements"
        )));
    }
    let pts = Points::new(m);
    let orbits = orbits(m);
    // clauses 1 and 2 read only the A part, so they are decided once per A-set
    let mut a_part: HashMap<Vec<usize>, bool> = HashMap::new();
    let (all_i, all_j): (Vec<usize>, Vec<usize>) =
        ((0..m.i.len()).collect(), (0..m.j_len()).collect());
    let mut out = Vec::new();
    for mask in 0u64..(1 << bits) {
        let i: Vec<usize> = (0..ci.len())
            .filter(|&k| mask >> k & 1 == 1)
            .map(|k| ci[k])
            .collect();
        let j: Vec<usize> = (0..cj.len())
            .filter(|&k| mask >> (ci.len() + k) & 1 == 1)
            .map(|k| cj[k])
            .collect();
        if i.is_empty() || j.is_empty() {
            continue;
        }
        let mut cells: BTreeMap<(usize, Option<usize>), Vec<usize>> = BTreeMap::new();
        for (k, o) in orbits.iter().enumerate() {
            let (ci, cj) = (m.pi[o[0]], m.q_of(o[0]));
            if i.contains(&ci) && cj.is_none_or(|q| j.contains(&q)) {
                cells.entry((ci, cj)).or_default().push(k);
            }
        }
        // per cell, a nonempty set of its orbits
        let choices: Vec<&Vec<usize>> = cells.values().collect();
        let free: usize = choices.iter().map(|c| c.len()).sum();
        if free > MAX_FREE_BITS {
            return Err(Error::SizeGuard(format!("{free} free orbit choices")));
        }
        let mut pick = vec![1u64; choices.len()];
        'odometer: loop {
            let mut a: Vec<usize> = Vec::new();
            for (c, &p) in choices.iter().zip(&pick) {
                for (k, &o) in c.iter().enumerate() {
                    if p >> k & 1 == 1 {
                        a.extend(&orbits[o]);
                    }
                }
            }
            a.sort_unstable();
            let ok = match a_part.get(&a) {
                Some(&ok) => ok,
                None => {
                    let r = is_member(&m.restrict(&a, &all_i, &all_j)?);
                    let ok = r.clauses.iter().filter(|c| c.clause != 3).all(|c| c.passed);
                    a_part.insert(a.clone(), ok);
                    ok
                }
            };
            if ok && cells_inhabited(m, &a, &i, &j) {
                let sub = Subset {
                    a: a.into_iter().collect(),
                    i: i.iter().copied().collect(),
                    j: j.iter().copied().collect(),
                };
                out.push(pts.mask(&sub));
            }
            for (k, c) in choices.iter().enumerate() {
                pick[k] += 1;
                if pick[k] < 1 << c.len() {
                    continue 'odometer;
                }
                pick[k] = 1;
            }
            break;
        }
    }
    Ok(out)
}

/// A carrier set with no `A` elements and one of `I`, `J` empty.
pub fn is_sort_only(x: &Subset) -> bool {
    x.a.is_empty() && (x.i.is_empty() || x.j.is_empty())
}

/// The `K`-substructures of `m`, split by shape.
///
/// Since `π` and `Q` are total, a member with an empty `I` or `J` part has
/// no `A` elements, and then every clause holds or fails independently of
/// which points it holds. Those members are the sort-only sets, all in or
/// all out together, and are tested one at a time rather than listed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubstructureLattice {
    /// Every member with nonempty `I` and `J` parts.
    pub mixed: Vec<Subset>,
    pub sort_only_members: bool,
}

fn sort_only_members(m: &SigmaStructure) -> Result<bool> {
    Ok(is_member(&m.restrict(&[], &[], &[])?).passed)
}

pub fn substructure_lattice(m: &SigmaStructure) -> Result<SubstructureLattice> {
    let pts = Points::new(m);
    Ok(SubstructureLattice {
        mixed: lattice_masks(m)?
            .into_iter()
            .map(|x| pts.subset(x, m.total_len()))
            .collect(),
        sort_only_members: sort_only_members(m)?,
    })
}

fn least_containing(lattice: &[u64], sort_only: bool, x: &Subset, pts: &Points) -> Option<u64> {
    if sort_only && is_sort_only(x) {
        return Some(pts.mask(x));
    }
    let x = pts.mask(x);
    lattice
        .iter()
        .filter(|&&n| x & !n == 0)
        .fold(None, |acc, &n| Some(acc.map_or(n, |a| a & n)))
}

/// The intersection of every `K`-substructure of `m` containing `x`.
pub fn closure_bruteforce(m: &SigmaStructure, x: &Subset) -> Result<Subset> {
    check_in_range(m, x)?;
    let pts = Points::new(m);
    least_containing(&lattice_masks(m)?, sort_only_members(m)?, x, &pts)
        .map(|n| pts.subset(n, m.total_len()))
        .ok_or_else(|| Error::Precondition("no member of K contains the subset".into()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum IntersectionVerdict {
    Pass {
        samples: usize,
        brute_forced: usize,
        certified: usize,
    },
    Counterexample {
        sample: usize,
        reason: String,
    },
}

impl IntersectionVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, IntersectionVerdict::Pass { .. })
    }
}

/// For each sample: the closure contains it, is a member of `K` and a
/// substructure of `m`, and is the least such. Leastness is brute-forced up
/// to [`BRUTE_FORCE_LIMIT`] elements; above it every closure element is
/// certified as forced (an `I`/`J` element lies in `X` or is an image of
/// `X`, and each cell over them is one regular orbit of `m`).
pub fn check_admits_intersections(
    m: &SigmaStructure,
    samples: &[Subset],
) -> Result<IntersectionVerdict> {
    let brute = m.total_len() <= BRUTE_FORCE_LIMIT;
    let member = is_member(m);
    if !brute && !member.clauses.iter().any(|c| c.clause == 1 && c.passed) {
        return Err(Error::SizeGuard(format!(
            "{} elements and no regular action to certify against",
            m.total_len()
        )));
    }
    let pts = Points::new(m);
    // too many free choices: fall back to certificates
    let sort_only = sort_only_members(m)?;
    let lattice = match brute.then(|| lattice_masks(m)).transpose() {
        Err(Error::SizeGuard(_)) if member.clauses.iter().any(|c| c.clause == 1 && c.passed) => {
            None
        }
        other => other?,
    };
    let (mut brute_forced, mut certified) = (0, 0);
    for (k, x) in samples.iter().enumerate() {
        let fail = |reason: String| Ok(IntersectionVerdict::Counterexample { sample: k, reason });
        let cl = closure(m, x)?;
        if !x.is_subset(&cl.set) {
            return fail("closure misses part of the sample".into());
        }
        let r = is_member(&cl.structure);
        if !r.passed {
            return fail(format!("closure is not in K: {:?}", r.first_failure()));
        }
        if let Err(mm) = cl.structure.is_substructure_of(m) {
            return fail(format!("closure is not a substructure: {mm}"));
        }
        if let Some(lattice) = &lattice {
            let least = least_containing(lattice, sort_only, x, &pts)
                .map(|n| pts.subset(n, m.total_len()))
                .ok_or_else(|| Error::Precondition("no member of K contains the subset".into()))?;
            if least != cl.set {
                return fail(format!(
                    "closure has {} elements, least substructure {}",
                    cl.set.len(),
                    least.len()
                ));
            }
            brute_forced += 1;
        } else {
            let justified_i = cl
                .set
                .i
                .iter()
                .all(|i| x.i.contains(i) || x.a.iter().any(|&a| m.pi[a] == *i));
            let justified_j = cl
                .set
                .j
                .iter()
                .all(|j| x.j.contains(j) || x.a.iter().any(|&a| m.q_of(a) == Some(*j)));
            if !justified_i || !justified_j {
                return fail("closure has an unforced I or J element".into());
            }
            certified += 1;
        }
    }
    Ok(IntersectionVerdict::Pass {
        samples: samples.len(),
        brute_forced,
        certified,
    })
}

/// Every subset of the carriers of `m`, for exhaustive runs on tiny inputs.
pub fn all_subsets(m: &SigmaStructure) -> Vec<Subset> {
    let points: Vec<Point> = (0..m.a_len())
        .map(Point::a)
        .chain((0..m.i.len()).map(Point::i))
        .chain((0..m.j_len()).map(Point::j))
        .collect();
    (0u64..1 << points.len())
        .map(|mask| {
            let mut s = Subset::default();
            for (k, p) in points.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    s.insert(*p);
                }
            }
            s
        })
        .collect()
}
