use std::collections::BTreeMap;

use serde::Serialize;

use super::closure::{closure, Closure, BRUTE_FORCE_LIMIT};
use super::member::is_member;
use super::{Point, Sort, Subset};
use crate::error::{Error, Result};
use crate::functions::Family;
use crate::structures::{
    build_level, check_embedding, qf_fingerprint, ElementMap, Side, SigmaStructure, Sym,
};

/// `gtp(a / M₀; M)`, kept together with `cl_M(M₀ ∪ {a})`.
#[derive(Debug, Clone)]
pub struct GaloisTypeHandle {
    base: SigmaStructure,
    ambient: SigmaStructure,
    point: Point,
    closure: Closure,
}

impl GaloisTypeHandle {
    /// `base` must be a substructure of `ambient` under label identity.
    pub fn new(base: SigmaStructure, ambient: SigmaStructure, point: Point) -> Result<Self> {
        let in_range = match point.sort {
            Sort::A => point.index < ambient.a_len(),
            Sort::I => point.index < ambient.i.len(),
            Sort::J => point.index < ambient.j_len(),
        };
        if !in_range {
            return Err(Error::UnknownElement(format!(
                "{:?}-element #{}",
                point.sort, point.index
            )));
        }
        if let Err(m) = base.is_substructure_of(&ambient) {
            return Err(Error::Precondition(format!(
                "base is not a substructure of the ambient model: {m}"
            )));
        }
        let map = base.label_map_into(&ambient).expect("checked above");
        let mut x = Subset {
            a: map.a.iter().copied().collect(),
            i: map.i.iter().copied().collect(),
            j: map.j.iter().copied().collect(),
        };
        x.insert(point);
        let closure = closure(&ambient, &x)?;
        Ok(GaloisTypeHandle {
            base,
            ambient,
            point,
            closure,
        })
    }

    /// A type over an arbitrary subset of the ambient carriers, closed first.
    pub fn over_set(ambient: SigmaStructure, base: &Subset, point: Point) -> Result<Self> {
        let base = closure(&ambient, base)?.structure;
        GaloisTypeHandle::new(base, ambient, point)
    }

    /// `gtp(i_ℓ / M_{0,d}; M_{ℓ,d})` for side one (`p_d`) or two (`q_d`).
    pub fn level(family: &Family, side: Side, d: usize) -> Result<Self> {
        if side == Side::Zero {
            return Err(Error::Domain("level types exist for sides 1 and 2".into()));
        }
        let base = build_level(Side::Zero, d, family, true)?.into_structure();
        let ambient = build_level(side, d, family, true)?.into_structure();
        GaloisTypeHandle::new(base, ambient, Point::j(0))
    }

    pub fn base(&self) -> &SigmaStructure {
        &self.base
    }

    pub fn ambient(&self) -> &SigmaStructure {
        &self.ambient
    }

    pub fn point(&self) -> Point {
        self.point
    }

    pub fn closure(&self) -> &Closure {
        &self.closure
    }

    /// The point as an element of the closure structure.
    fn point_in_closure(&self) -> Point {
        let pos = |s: &std::collections::BTreeSet<usize>| {
            s.iter()
                .position(|&k| k == self.point.index)
                .expect("in closure")
        };
        let index = match self.point.sort {
            Sort::A => pos(&self.closure.set.a),
            Sort::I => pos(&self.closure.set.i),
            Sort::J => pos(&self.closure.set.j),
        };
        Point {
            sort: self.point.sort,
            index,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMethod {
    FiberShift,
    Generic,
}

/// An isomorphism between the two closures, as index maps and as labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TypeWitness {
    #[serde(skip)]
    pub map: ElementMap,
    pub pairs: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum TypeVerdict {
    Equal {
        method: SearchMethod,
        explored: usize,
        witness: TypeWitness,
    },
    Distinct {
        method: SearchMethod,
        explored: usize,
        reason: String,
    },
}

impl TypeVerdict {
    pub fn is_equal(&self) -> bool {
        matches!(self, TypeVerdict::Equal { .. })
    }

    pub fn witness(&self) -> Option<&TypeWitness> {
        match self {
            TypeVerdict::Equal { witness, .. } => Some(witness),
            TypeVerdict::Distinct { .. } => None,
        }
    }
}

/// Decides equality with the fiber-shift search when it applies and with
/// generic backtracking otherwise.
pub fn galois_type_equal(t1: &GaloisTypeHandle, t2: &GaloisTypeHandle) -> Result<TypeVerdict> {
    match galois_type_equal_with(t1, t2, SearchMethod::FiberShift, None) {
        Err(Error::Precondition(m)) if m.starts_with(NOT_SHIFTABLE) => {
            galois_type_equal_with(t1, t2, SearchMethod::Generic, None)
        }
        other => other,
    }
}

const NOT_SHIFTABLE: &str = "fiber-shift search needs";

/// Runs one search. `hint` maps `A` indices of the first ambient model to
/// the second; the fiber-shift search tries the shift it induces first.
pub fn galois_type_equal_with(
    t1: &GaloisTypeHandle,
    t2: &GaloisTypeHandle,
    method: SearchMethod,
    hint: Option<&[usize]>,
) -> Result<TypeVerdict> {
    if t1.base != t2.base {
        return Err(Error::Precondition(
            "the two types are over different bases".into(),
        ));
    }
    let problem = match Problem::new(t1, t2) {
        Ok(p) => p,
        Err(reason) => {
            return Ok(TypeVerdict::Distinct {
                method,
                explored: 0,
                reason,
            })
        }
    };
    let found = match method {
        SearchMethod::Generic => problem.generic()?,
        SearchMethod::FiberShift => {
            let hint = hint.map(|h| problem.translate_hint(t1, t2, h));
            problem.fiber_shift(hint.as_deref())?
        }
    };
    let (explored, map) = match found {
        (explored, Err(reason)) => {
            return Ok(TypeVerdict::Distinct {
                method,
                explored,
                reason,
            })
        }
        (explored, Ok(map)) => (explored, map),
    };
    let (c1, c2) = (problem.c1, problem.c2);
    if !map.is_bijection_onto(c2) {
        return Err(Error::InvariantViolation(
            "search returned a non-bijective map".into(),
        ));
    }
    if let Err(m) = check_embedding(c1, c2, &map, &Sym::ALL) {
        return Err(Error::InvariantViolation(format!(
            "search returned a non-isomorphism: {m}"
        )));
    }
    let mut pairs: Vec<(String, String)> = Vec::new();
    pairs.extend(
        map.i
            .iter()
            .enumerate()
            .map(|(k, &v)| (c1.i[k].clone(), c2.i[v].clone())),
    );
    if let (Some(j1), Some(j2)) = (&c1.j, &c2.j) {
        pairs.extend(
            map.j
                .iter()
                .enumerate()
                .map(|(k, &v)| (j1[k].clone(), j2[v].clone())),
        );
    }
    pairs.extend(
        map.a
            .iter()
            .enumerate()
            .map(|(k, &v)| (c1.a[k].clone(), c2.a[v].clone())),
    );
    Ok(TypeVerdict::Equal {
        method,
        explored,
        witness: TypeWitness { map, pairs },
    })
}

type Found = (usize, std::result::Result<ElementMap, String>);

/// The two closures with the forced part of the map: base labels go to
/// themselves and the first point goes to the second.
struct Problem<'a> {
    c1: &'a SigmaStructure,
    c2: &'a SigmaStructure,
    fix_a: Vec<Option<usize>>,
    fix_i: Vec<Option<usize>>,
    fix_j: Vec<Option<usize>>,
}

impl<'a> Problem<'a> {
    fn new(
        t1: &'a GaloisTypeHandle,
        t2: &'a GaloisTypeHandle,
    ) -> std::result::Result<Self, String> {
        let (c1, c2) = (&t1.closure.structure, &t2.closure.structure);
        let (p1, p2) = (t1.point_in_closure(), t2.point_in_closure());
        if p1.sort != p2.sort {
            return Err("the points have different sorts".into());
        }
        if c1.sigma != c2.sigma
            || c1.a_len() != c2.a_len()
            || c1.i.len() != c2.i.len()
            || c1.j_len() != c2.j_len()
        {
            return Err("the closures have different sizes".into());
        }
        let index = |labels: &[String]| -> BTreeMap<String, usize> {
            labels
                .iter()
                .enumerate()
                .map(|(k, l)| (l.clone(), k))
                .collect()
        };
        let fix = |base: &[String], l1: &[String], l2: &[String]| -> Vec<Option<usize>> {
            let (i1, i2) = (index(l1), index(l2));
            let mut out = vec![None; l1.len()];
            for l in base {
                out[i1[l]] = Some(i2[l]);
            }
            out
        };
        let base = &t1.base;
        let empty = Vec::new();
        let mut p = Problem {
            c1,
            c2,
            fix_a: fix(&base.a, &c1.a, &c2.a),
            fix_i: fix(&base.i, &c1.i, &c2.i),
            fix_j: fix(
                base.j.as_ref().unwrap_or(&empty),
                c1.j.as_ref().unwrap_or(&empty),
                c2.j.as_ref().unwrap_or(&empty),
            ),
        };
        let slot = match p1.sort {
            Sort::A => &mut p.fix_a,
            Sort::I => &mut p.fix_i,
            Sort::J => &mut p.fix_j,
        };
        match slot[p1.index] {
            Some(v) if v != p2.index => {
                return Err("the first point is in the base and is not the second".into())
            }
            _ => slot[p1.index] = Some(p2.index),
        }
        Ok(p)
    }

    fn translate_hint(
        &self,
        t1: &GaloisTypeHandle,
        t2: &GaloisTypeHandle,
        hint: &[usize],
    ) -> Vec<Option<usize>> {
        let pos2: BTreeMap<usize, usize> = t2
            .closure
            .set
            .a
            .iter()
            .enumerate()
            .map(|(k, &v)| (v, k))
            .collect();
        t1.closure
            .set
            .a
            .iter()
            .map(|&x| hint.get(x).and_then(|y| pos2.get(y).copied()))
            .collect()
    }

    fn pairwise_ok(&self, ha: &[Option<usize>], x: usize, y: usize, x2: usize) -> bool {
        let (c1, c2) = (self.c1, self.c2);
        let y2 = ha[x2].expect("assigned");
        c1.e_prime.get(x, x2) == c2.e_prime.get(y, y2)
            && c1.e_prime.get(x2, x) == c2.e_prime.get(y2, y)
            && c1.e.get(x, x2) == c2.e.get(y, y2)
            && c1.e.get(x2, x) == c2.e.get(y2, y)
            && c1.r.get(x, x2) == c2.r.get(y, y2)
            && c1.r.get(x2, x) == c2.r.get(y2, y)
    }

    /// Element-wise backtracking. Candidates must share the single-element
    /// quantifier-free fingerprint and agree with everything assigned so far.
    fn generic(&self) -> Result<Found> {
        let (c1, c2) = (self.c1, self.c2);
        if c1.total_len() > BRUTE_FORCE_LIMIT {
            return Err(Error::SizeGuard(format!(
                "generic type search is limited to {BRUTE_FORCE_LIMIT} elements, closure has {}",
                c1.total_len()
            )));
        }
        let fp1: Vec<_> = (0..c1.a_len()).map(|x| qf_fingerprint(c1, &[x])).collect();
        let fp2: Vec<_> = (0..c2.a_len()).map(|y| qf_fingerprint(c2, &[y])).collect();
        let (mut s1, mut s2) = (fp1.clone(), fp2.clone());
        s1.sort();
        s2.sort();
        if s1 != s2 {
            return Ok((0, Err("element fingerprints differ".into())));
        }
        let mut order: Vec<usize> = (0..c1.a_len())
            .filter(|&x| self.fix_a[x].is_some())
            .collect();
        order.extend((0..c1.a_len()).filter(|&x| self.fix_a[x].is_none()));
        let mut st = GenericState {
            ha: vec![None; c1.a_len()],
            used_a: vec![false; c2.a_len()],
            hi: self.fix_i.clone(),
            used_i: used(&self.fix_i, c2.i.len()),
            hj: self.fix_j.clone(),
            used_j: used(&self.fix_j, c2.j_len()),
            explored: 0,
        };
        let ok = self.generic_step(&order, 0, &fp1, &fp2, &mut st);
        if !ok {
            return Ok((st.explored, Err("search space exhausted".into())));
        }
        let complete = |h: &mut Vec<Option<usize>>, used: &mut Vec<bool>| -> Vec<usize> {
            let mut free = (0..used.len()).filter(|&k| !used[k]);
            h.iter()
                .map(|v| v.unwrap_or_else(|| free.next().expect("equal sizes")))
                .collect()
        };
        let map = ElementMap {
            a: st.ha.iter().map(|v| v.expect("all assigned")).collect(),
            i: complete(&mut st.hi, &mut st.used_i),
            j: complete(&mut st.hj, &mut st.used_j),
        };
        Ok((st.explored, Ok(map)))
    }

    fn generic_step(
        &self,
        order: &[usize],
        k: usize,
        fp1: &[crate::structures::Fingerprint],
        fp2: &[crate::structures::Fingerprint],
        st: &mut GenericState,
    ) -> bool {
        let Some(&x) = order.get(k) else { return true };
        let (c1, c2) = (self.c1, self.c2);
        let g = c1.group_size();
        let candidates: Vec<usize> = match self.fix_a[x] {
            Some(y) => vec![y],
            None => (0..c2.a_len()).collect(),
        };
        for y in candidates {
            if st.used_a[y] || fp1[x] != fp2[y] {
                continue;
            }
            st.explored += 1;
            let (i1, i2) = (c1.pi[x], c2.pi[y]);
            let new_i = match st.hi[i1] {
                Some(v) if v != i2 => continue,
                Some(_) => false,
                None if st.used_i[i2] => continue,
                None => true,
            };
            let qs = (c1.q_of(x), c2.q_of(y));
            let new_j = match qs {
                (Some(j1), Some(j2)) => match st.hj[j1] {
                    Some(v) if v != j2 => continue,
                    Some(_) => false,
                    None if st.used_j[j2] => continue,
                    None => true,
                },
                (None, None) => false,
                _ => continue,
            };
            let consistent = order[..k].iter().all(|&x2| {
                let y2 = st.ha[x2].expect("assigned");
                self.pairwise_ok(&st.ha, x, y, x2)
                    && (0..g).all(|c| (c1.fc(c, x) == x2) == (c2.fc(c, y) == y2))
                    && (0..g).all(|c| (c1.fc(c, x2) == x) == (c2.fc(c, y2) == y))
            });
            if !consistent {
                continue;
            }
            st.ha[x] = Some(y);
            st.used_a[y] = true;
            if new_i {
                st.hi[i1] = Some(i2);
                st.used_i[i2] = true;
            }
            if new_j {
                let (j1, j2) = (qs.0.expect("J"), qs.1.expect("J"));
                st.hj[j1] = Some(j2);
                st.used_j[j2] = true;
            }
            if self.generic_step(order, k + 1, fp1, fp2, st) {
                return true;
            }
            st.ha[x] = None;
            st.used_a[y] = false;
            if new_i {
                st.hi[i1] = None;
                st.used_i[i2] = false;
            }
            if new_j {
                let (j1, j2) = (qs.0.expect("J"), qs.1.expect("J"));
                st.hj[j1] = None;
                st.used_j[j2] = false;
            }
        }
        false
    }

    /// Cell-wise search: with the `I` and `J` maps forced, the image of a
    /// regular cell is fixed by one shift `s ∈ G`, `F_c(x₀) ↦ F_{c+s}(y₀)`.
    fn fiber_shift(&self, hint: Option<&[Option<usize>]>) -> Result<Found> {
        let (c1, c2) = (self.c1, self.c2);
        let g = c1.group_size();
        let forced = |fix: &[Option<usize>], n2: usize| -> Option<Vec<usize>> {
            let free1: Vec<usize> = (0..fix.len()).filter(|&k| fix[k].is_none()).collect();
            let used2 = used(fix, n2);
            let free2: Vec<usize> = (0..n2).filter(|&k| !used2[k]).collect();
            match (free1.len(), free2.len()) {
                (0, 0) => Some(fix.iter().map(|v| v.expect("fixed")).collect()),
                (1, 1) => Some(fix.iter().map(|v| v.unwrap_or(free2[0])).collect()),
                _ => None,
            }
        };
        let (Some(hi), Some(hj)) = (
            forced(&self.fix_i, c2.i.len()),
            forced(&self.fix_j, c2.j_len()),
        ) else {
            return Err(Error::Precondition(format!(
                "{NOT_SHIFTABLE} the I and J maps fixed by the base"
            )));
        };
        for (c, name) in [(c1, "first"), (c2, "second")] {
            let r = is_member(c);
            if !r.passed {
                return Err(Error::Precondition(format!(
                    "{NOT_SHIFTABLE} members of K; the {name} closure fails clause {}",
                    r.first_failure().map_or(0, |f| f.clause)
                )));
            }
        }
        let cells = |c: &SigmaStructure| -> BTreeMap<(usize, Option<usize>), usize> {
            let mut out = BTreeMap::new();
            for x in (0..c.a_len()).rev() {
                out.insert((c.pi[x], c.q_of(x)), x);
            }
            out
        };
        let (cells1, cells2) = (cells(c1), cells(c2));
        // per cell: base point x₀ and, once a shift is chosen, y₀
        let mut plan: Vec<(usize, usize, Vec<usize>)> = Vec::new();
        for (&(i, q), &x0) in &cells1 {
            let key = (hi[i], q.map(|q| hj[q]));
            let Some(&y0) = cells2.get(&key) else {
                return Ok((
                    0,
                    Err(format!("no image cell for the cell of {}", c1.a[x0])),
                ));
            };
            let mut shifts: Vec<usize> = (0..g).collect();
            // forced by base elements and the point
            for c in 0..g {
                if let Some(y) = self.fix_a[c1.fc(c, x0)] {
                    let s = (0..g).find(|&s| c2.fc(s, y0) == y).map(|s| s ^ c);
                    shifts.retain(|&t| Some(t) == s);
                }
            }
            if let Some(y) = hint.and_then(|h| h[x0]) {
                if let Some(s) = (0..g).find(|&s| c2.fc(s, y0) == y) {
                    if let Some(p) = shifts.iter().position(|&t| t == s) {
                        shifts.remove(p);
                        shifts.insert(0, s);
                    }
                }
            }
            plan.push((x0, y0, shifts));
        }
        let mut ha = vec![None; c1.a_len()];
        let mut assigned = Vec::new();
        let mut explored = 0;
        if !self.shift_step(&plan, 0, &mut ha, &mut assigned, &mut explored) {
            return Ok((
                explored,
                Err("no shift assignment is an isomorphism".into()),
            ));
        }
        let map = ElementMap {
            a: ha.iter().map(|v| v.expect("every cell assigned")).collect(),
            i: hi,
            j: hj,
        };
        Ok((explored, Ok(map)))
    }

    fn shift_step(
        &self,
        plan: &[(usize, usize, Vec<usize>)],
        k: usize,
        ha: &mut Vec<Option<usize>>,
        assigned: &mut Vec<usize>,
        explored: &mut usize,
    ) -> bool {
        let Some((x0, y0, shifts)) = plan.get(k) else {
            return true;
        };
        let (c1, c2) = (self.c1, self.c2);
        let g = c1.group_size();
        for &s in shifts {
            *explored += 1;
            let mark = assigned.len();
            for c in 0..g {
                let (x, y) = (c1.fc(c, *x0), c2.fc(c ^ s, *y0));
                ha[x] = Some(y);
                assigned.push(x);
            }
            let cell = &assigned[mark..];
            let unary = cell.iter().all(|&x| {
                let y = ha[x].expect("just assigned");
                c1.p[x] == c2.p[y] && (0..g).all(|v| c1.dv(v, x) == c2.dv(v, y))
            });
            let ok = unary
                && cell.iter().all(|&x| {
                    let y = ha[x].expect("just assigned");
                    assigned.iter().all(|&x2| self.pairwise_ok(ha, x, y, x2))
                });
            if ok && self.shift_step(plan, k + 1, ha, assigned, explored) {
                return true;
            }
            for x in assigned.drain(mark..) {
                ha[x] = None;
            }
        }
        false
    }
}

struct GenericState {
    ha: Vec<Option<usize>>,
    used_a: Vec<bool>,
    hi: Vec<Option<usize>>,
    used_i: Vec<bool>,
    hj: Vec<Option<usize>>,
    used_j: Vec<bool>,
    explored: usize,
}

fn used(fix: &[Option<usize>], n: usize) -> Vec<bool> {
    let mut out = vec![false; n];
    for v in fix.iter().flatten() {
        out[*v] = true;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::testing::*;

    fn pq(fam: &Family, d: usize) -> (GaloisTypeHandle, GaloisTypeHandle) {
        (
            GaloisTypeHandle::level(fam, Side::One, d).unwrap(),
            GaloisTypeHandle::level(fam, Side::Two, d).unwrap(),
        )
    }

    #[test]
    fn level_types_agree_through_g_d() {
        for fam in bundled_like_families() {
            for d in 1..=3 {
                let (p, q) = pq(&fam, d);
                let perm = build_level(Side::One, d, &fam, false)
                    .unwrap()
                    .g_permutation(d)
                    .unwrap();
                let v =
                    galois_type_equal_with(&p, &q, SearchMethod::FiberShift, Some(&perm)).unwrap();
                assert_eq!(v.witness().unwrap().map.a, perm, "d = {d}");
                assert!(galois_type_equal(&p, &q).unwrap().is_equal());
            }
        }
    }

    #[test]
    fn generic_search_confirms_small_levels() {
        for fam in bundled_like_families() {
            for d in 1..=5 {
                let (p, q) = pq(&fam, d);
                if p.closure().structure.total_len() > BRUTE_FORCE_LIMIT {
                    continue;
                }
                let v = galois_type_equal_with(&p, &q, SearchMethod::Generic, None).unwrap();
                assert!(v.is_equal(), "d = {d}: {v:?}");
            }
        }
    }

    #[test]
    fn reflexive_via_identity() {
        let (p, _) = pq(&s1(), 2);
        let v = galois_type_equal(&p, &p).unwrap();
        let w = v.witness().unwrap();
        assert_eq!(w.map, ElementMap::identity(&p.closure().structure));
    }

    #[test]
    fn different_bases_are_rejected() {
        let p = GaloisTypeHandle::level(&s1(), Side::One, 2).unwrap();
        let q = GaloisTypeHandle::level(&s1(), Side::Two, 3).unwrap();
        assert!(matches!(
            galois_type_equal(&p, &q),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn corrupted_side_two_is_distinct() {
        let fam = s1();
        let p = GaloisTypeHandle::level(&fam, Side::One, 1).unwrap();
        let base = build_level(Side::Zero, 1, &fam, true)
            .unwrap()
            .into_structure();
        let mut bad = build_level(Side::Two, 1, &fam, true)
            .unwrap()
            .into_structure();
        bad.p[5] = !bad.p[5];
        let q = GaloisTypeHandle::new(base, bad, Point::j(0)).unwrap();
        for method in [SearchMethod::FiberShift, SearchMethod::Generic] {
            assert!(!galois_type_equal_with(&p, &q, method, None)
                .unwrap()
                .is_equal());
        }
    }

    #[test]
    fn types_over_sets() {
        let m = build_level(Side::One, 2, &s1(), true)
            .unwrap()
            .into_structure();
        let mut base = Subset::default();
        base.insert(Point::i(0));
        let t1 = GaloisTypeHandle::over_set(m.clone(), &base, Point::a(4)).unwrap();
        let t2 = GaloisTypeHandle::over_set(m.clone(), &base, Point::a(5)).unwrap();
        // a lone I-element closes to no A-elements
        assert_eq!(t1.base().a_len(), 0);
        let v1 = galois_type_equal(&t1, &t2).unwrap();
        let v2 = galois_type_equal_with(&t1, &t2, SearchMethod::Generic, None).unwrap();
        assert_eq!(v1.is_equal(), v2.is_equal());
    }
}
