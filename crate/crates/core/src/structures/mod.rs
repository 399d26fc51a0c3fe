//! Finite structures in the signature `π, Q, F_c, P, D_v, E′, E, R`, the
//! level structures built from a family, and their limits.

mod build;
mod claims;
mod dump;
mod limit;

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functions::SymbolSet;

pub use build::{apply_g, build_level, Level, Side, TripleElement, MAX_LEVEL_ELEMENTS};
pub use claims::{
    apply_h0, check_e_characterization, check_gg_automorphism, check_gg_on_level, check_h0,
    check_pair_types, check_single_g, gg_map, replay_e_witness, witness_e, AutVerdict, ECharReport,
    EMismatch, H0Report, PairTypeReport, RViolation, SingleGReport,
};
pub use dump::StructureDump;
pub use limit::{eval_relation, LimitHandle, RelationQuery, RelationValue};

/// Largest alphabet for which `G` is materialized.
pub const MAX_GROUP_BITS: usize = 8;

/// A dense boolean matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    words: Vec<u64>,
}

impl BitMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        let stride = cols.div_ceil(64);
        BitMatrix {
            rows,
            cols,
            stride,
            words: vec![0; rows * stride],
        }
    }

    pub fn square(n: usize) -> Self {
        BitMatrix::new(n, n)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.words[r * self.stride + c / 64] >> (c % 64) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let w = &mut self.words[r * self.stride + c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = BitMatrix::new(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                if f(r, c) {
                    m.set(r, c, true);
                }
            }
        }
        m
    }

    /// Row `r` is contained in row `s`.
    pub fn row_subset(&self, r: usize, s: usize) -> bool {
        let row = |k: usize| &self.words[k * self.stride..(k + 1) * self.stride];
        row(r).iter().zip(row(s)).all(|(x, y)| x & !y == 0)
    }

    /// Pairs `(r, c)` that are set, row-major.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    out.push((r, c));
                }
            }
        }
        out
    }
}

/// The symbols of the signature, as named in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Sym {
    #[serde(rename = "sort")]
    Sort,
    #[serde(rename = "π")]
    Pi,
    #[serde(rename = "Q")]
    Q,
    #[serde(rename = "F_c")]
    Fc,
    #[serde(rename = "P")]
    P,
    #[serde(rename = "D_v")]
    Dv,
    #[serde(rename = "E'")]
    EPrime,
    #[serde(rename = "E")]
    E,
    #[serde(rename = "R")]
    R,
}

impl Sym {
    pub const ALL: [Sym; 8] = [
        Sym::Pi,
        Sym::Q,
        Sym::Fc,
        Sym::P,
        Sym::Dv,
        Sym::EPrime,
        Sym::E,
        Sym::R,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Sym::Sort => "sort",
            Sym::Pi => "π",
            Sym::Q => "Q",
            Sym::Fc => "F_c",
            Sym::P => "P",
            Sym::Dv => "D_v",
            Sym::EPrime => "E'",
            Sym::E => "E",
            Sym::R => "R",
        }
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A finite structure for the signature with group `G = P({0..σ})`.
///
/// `act[c * |A| + x]` is `F_c(x)`; `dv` has one row per `v ∈ G`. `j` and `q`
/// are absent for the reduced signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaStructure {
    pub sigma: usize,
    pub group_labels: Vec<String>,
    pub a: Vec<String>,
    pub i: Vec<String>,
    pub j: Option<Vec<String>>,
    pub pi: Vec<usize>,
    pub q: Option<Vec<usize>>,
    pub act: Vec<usize>,
    pub p: Vec<bool>,
    pub dv: BitMatrix,
    pub e_prime: BitMatrix,
    pub e: BitMatrix,
    pub r: BitMatrix,
}

impl SigmaStructure {
    /// An empty structure with the given `I` carrier.
    pub fn empty(
        sigma: usize,
        group_labels: Vec<String>,
        i: Vec<String>,
        j: Option<Vec<String>>,
    ) -> Self {
        let g = 1 << sigma;
        SigmaStructure {
            sigma,
            group_labels,
            a: Vec::new(),
            i,
            q: j.as_ref().map(|_| Vec::new()),
            j,
            pi: Vec::new(),
            act: Vec::new(),
            p: Vec::new(),
            dv: BitMatrix::new(g, 0),
            e_prime: BitMatrix::square(0),
            e: BitMatrix::square(0),
            r: BitMatrix::square(0),
        }
    }

    pub fn group_size(&self) -> usize {
        1 << self.sigma
    }

    pub fn a_len(&self) -> usize {
        self.a.len()
    }

    pub fn j_len(&self) -> usize {
        self.j.as_ref().map_or(0, Vec::len)
    }

    pub fn has_j(&self) -> bool {
        self.j.is_some()
    }

    pub fn total_len(&self) -> usize {
        self.a.len() + self.i.len() + self.j_len()
    }

    pub fn fc(&self, c: usize, x: usize) -> usize {
        self.act[c * self.a.len() + x]
    }

    pub fn dv(&self, v: usize, x: usize) -> bool {
        self.dv.get(v, x)
    }

    pub fn q_of(&self, x: usize) -> Option<usize> {
        self.q.as_ref().map(|q| q[x])
    }

    /// Checks that the tables have the declared shapes and that `π`, `Q`,
    /// `F_c` are total with values in the right carriers.
    pub fn check_shape(&self) -> Result<()> {
        let n = self.a.len();
        let g = self.group_size();
        let bad = |what: &str| {
            Err(Error::InvariantViolation(format!(
                "malformed structure: {what}"
            )))
        };
        if self.sigma > MAX_GROUP_BITS {
            return Err(Error::SizeGuard(format!(
                "σ = {} exceeds {MAX_GROUP_BITS}",
                self.sigma
            )));
        }
        if self.group_labels.len() != g {
            return bad("group labels");
        }
        if self.pi.len() != n || self.pi.iter().any(|&i| i >= self.i.len()) {
            return bad("π");
        }
        match (&self.j, &self.q) {
            (None, None) => {}
            (Some(j), Some(q)) if q.len() == n && q.iter().all(|&x| x < j.len()) => {}
            _ => return bad("Q"),
        }
        if self.act.len() != g * n || self.act.iter().any(|&x| x >= n) {
            return bad("F_c");
        }
        if self.p.len() != n || self.dv.rows() != g || self.dv.cols() != n {
            return bad("unary predicates");
        }
        for m in [&self.e_prime, &self.e, &self.r] {
            if m.rows() != n || m.cols() != n {
                return bad("binary relations");
            }
        }
        Ok(())
    }

    /// The induced substructure on the listed elements (each list sorted and
    /// free of duplicates). The caller guarantees closure under the functions.
    pub fn restrict(&self, a: &[usize], i: &[usize], j: &[usize]) -> Result<SigmaStructure> {
        let pos = |list: &[usize], total: usize| {
            let mut p = vec![usize::MAX; total];
            for (k, &x) in list.iter().enumerate() {
                p[x] = k;
            }
            p
        };
        let pa = pos(a, self.a.len());
        let pi_ = pos(i, self.i.len());
        let pj = pos(j, self.j_len());
        let not_closed = |what: &str| {
            Err(Error::Precondition(format!(
                "subset is not closed under {what}"
            )))
        };
        let g = self.group_size();
        let mut out = SigmaStructure::empty(
            self.sigma,
            self.group_labels.clone(),
            i.iter().map(|&x| self.i[x].clone()).collect(),
            self.j
                .as_ref()
                .map(|jl| j.iter().map(|&x| jl[x].clone()).collect()),
        );
        out.a = a.iter().map(|&x| self.a[x].clone()).collect();
        for &x in a {
            let t = pi_[self.pi[x]];
            if t == usize::MAX {
                return not_closed("π");
            }
            out.pi.push(t);
            if let Some(q) = &self.q {
                let t = pj[q[x]];
                if t == usize::MAX {
                    return not_closed("Q");
                }
                out.q.as_mut().expect("j present").push(t);
            }
            out.p.push(self.p[x]);
        }
        out.act = Vec::with_capacity(g * a.len());
        for c in 0..g {
            for &x in a {
                let t = pa[self.fc(c, x)];
                if t == usize::MAX {
                    return not_closed("F_c");
                }
                out.act.push(t);
            }
        }
        out.dv = BitMatrix::from_fn(g, a.len(), |v, k| self.dv(v, a[k]));
        let sub = |m: &BitMatrix| BitMatrix::from_fn(a.len(), a.len(), |x, y| m.get(a[x], a[y]));
        out.e_prime = sub(&self.e_prime);
        out.e = sub(&self.e);
        out.r = sub(&self.r);
        Ok(out)
    }

    fn index_by_label(labels: &[String]) -> std::collections::HashMap<&str, usize> {
        labels
            .iter()
            .enumerate()
            .map(|(k, l)| (l.as_str(), k))
            .collect()
    }

    /// The identity-on-labels map from `self` into `other`, if every label of
    /// `self` occurs in `other` in the same sort.
    pub fn label_map_into(&self, other: &SigmaStructure) -> Option<ElementMap> {
        let look = |mine: &[String], theirs: &[String]| -> Option<Vec<usize>> {
            let idx = Self::index_by_label(theirs);
            mine.iter().map(|l| idx.get(l.as_str()).copied()).collect()
        };
        Some(ElementMap {
            a: look(&self.a, &other.a)?,
            i: look(&self.i, &other.i)?,
            j: match (&self.j, &other.j) {
                (Some(x), Some(y)) => look(x, y)?,
                (None, _) => Vec::new(),
                (Some(x), None) if x.is_empty() => Vec::new(),
                _ => return None,
            },
        })
    }

    /// `self` is a substructure of `other` under label identity.
    pub fn is_substructure_of(&self, other: &SigmaStructure) -> Result<(), Mismatch> {
        let map = self.label_map_into(other).ok_or(Mismatch {
            symbol: Sym::Sort,
            tuple: vec![],
        })?;
        check_embedding(self, other, &map, &Sym::ALL)
    }
}

/// A sort-respecting map between two structures.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ElementMap {
    pub a: Vec<usize>,
    pub i: Vec<usize>,
    pub j: Vec<usize>,
}

impl ElementMap {
    pub fn identity(s: &SigmaStructure) -> Self {
        ElementMap {
            a: (0..s.a_len()).collect(),
            i: (0..s.i.len()).collect(),
            j: (0..s.j_len()).collect(),
        }
    }

    pub fn is_bijection_onto(&self, dst: &SigmaStructure) -> bool {
        let onto = |m: &[usize], n: usize| {
            let mut seen = vec![false; n];
            m.len() == n
                && m.iter()
                    .all(|&x| x < n && !std::mem::replace(&mut seen[x], true))
        };
        onto(&self.a, dst.a_len()) && onto(&self.i, dst.i.len()) && onto(&self.j, dst.j_len())
    }
}

/// The first symbol and tuple (source labels) where a map fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub symbol: Sym,
    pub tuple: Vec<String>,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at ({})", self.symbol, self.tuple.join(", "))
    }
}

/// Checks that `map` is injective, commutes with `π`, `Q` and every `F_c`,
/// and preserves and reflects the listed relation symbols. Symbols not in
/// `symbols` are skipped. Tuples are checked in canonical order and the
/// first failure is returned.
pub fn check_embedding(
    src: &SigmaStructure,
    dst: &SigmaStructure,
    map: &ElementMap,
    symbols: &[Sym],
) -> Result<(), Mismatch> {
    let on = |s: Sym| symbols.contains(&s);
    let fail = |symbol, tuple: Vec<String>| Err(Mismatch { symbol, tuple });
    if map.a.len() != src.a_len()
        || map.i.len() != src.i.len()
        || map.j.len() != src.j_len()
        || src.sigma != dst.sigma
        || map.a.iter().any(|&x| x >= dst.a_len())
        || map.i.iter().any(|&x| x >= dst.i.len())
        || map.j.iter().any(|&x| x >= dst.j_len())
    {
        return fail(Sym::Sort, vec![]);
    }
    let injective = |m: &[usize], n: usize| {
        let mut seen = vec![false; n];
        m.iter().all(|&x| !std::mem::replace(&mut seen[x], true))
    };
    if !injective(&map.a, dst.a_len())
        || !injective(&map.i, dst.i.len())
        || !injective(&map.j, dst.j_len())
    {
        return fail(Sym::Sort, vec!["not injective".into()]);
    }
    let g = src.group_size();
    for x in 0..src.a_len() {
        let y = map.a[x];
        if on(Sym::Pi) && map.i[src.pi[x]] != dst.pi[y] {
            return fail(Sym::Pi, vec![src.a[x].clone()]);
        }
        if on(Sym::Q) {
            if let (Some(qs), Some(qd)) = (&src.q, &dst.q) {
                if map.j[qs[x]] != qd[y] {
                    return fail(Sym::Q, vec![src.a[x].clone()]);
                }
            }
        }
        if on(Sym::P) && src.p[x] != dst.p[y] {
            return fail(Sym::P, vec![src.a[x].clone()]);
        }
        if on(Sym::Dv) {
            if let Some(v) = (0..g).find(|&v| src.dv(v, x) != dst.dv(v, y)) {
                return fail(Sym::Dv, vec![src.group_labels[v].clone(), src.a[x].clone()]);
            }
        }
        if on(Sym::Fc) {
            if let Some(c) = (0..g).find(|&c| map.a[src.fc(c, x)] != dst.fc(c, y)) {
                return fail(Sym::Fc, vec![src.group_labels[c].clone(), src.a[x].clone()]);
            }
        }
    }
    for (sym, ms, md) in [
        (Sym::EPrime, &src.e_prime, &dst.e_prime),
        (Sym::E, &src.e, &dst.e),
        (Sym::R, &src.r, &dst.r),
    ] {
        if !on(sym) {
            continue;
        }
        for x in 0..src.a_len() {
            for y in 0..src.a_len() {
                if ms.get(x, y) != md.get(map.a[x], map.a[y]) {
                    return fail(sym, vec![src.a[x].clone(), src.a[y].clone()]);
                }
            }
        }
    }
    Ok(())
}

/// Atomic evaluation on `A`-sort elements, shared by finite structures and
/// limit handles.
pub trait AtomicEval {
    type Elem: Clone + PartialEq;

    fn group_size(&self) -> usize;
    fn pi_eq(&self, x: &Self::Elem, y: &Self::Elem) -> bool;
    fn q_eq(&self, x: &Self::Elem, y: &Self::Elem) -> bool;
    fn fc(&self, c: usize, x: &Self::Elem) -> Self::Elem;
    fn p(&self, x: &Self::Elem) -> bool;
    fn dv(&self, v: usize, x: &Self::Elem) -> bool;
    fn e_prime(&self, x: &Self::Elem, y: &Self::Elem) -> bool;
    fn e(&self, x: &Self::Elem, y: &Self::Elem) -> bool;
    fn r(&self, x: &Self::Elem, y: &Self::Elem) -> bool;
}

impl AtomicEval for SigmaStructure {
    type Elem = usize;

    fn group_size(&self) -> usize {
        SigmaStructure::group_size(self)
    }
    fn pi_eq(&self, x: &usize, y: &usize) -> bool {
        self.pi[*x] == self.pi[*y]
    }
    fn q_eq(&self, x: &usize, y: &usize) -> bool {
        self.q_of(*x) == self.q_of(*y)
    }
    fn fc(&self, c: usize, x: &usize) -> usize {
        SigmaStructure::fc(self, c, *x)
    }
    fn p(&self, x: &usize) -> bool {
        self.p[*x]
    }
    fn dv(&self, v: usize, x: &usize) -> bool {
        SigmaStructure::dv(self, v, *x)
    }
    fn e_prime(&self, x: &usize, y: &usize) -> bool {
        self.e_prime.get(*x, *y)
    }
    fn e(&self, x: &usize, y: &usize) -> bool {
        self.e.get(*x, *y)
    }
    fn r(&self, x: &usize, y: &usize) -> bool {
        self.r.get(*x, *y)
    }
}

/// Canonical encoding of the quantifier-free type of a tuple of `A`-elements.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fingerprint(Vec<u64>);

impl Fingerprint {
    fn push(bits: &mut Vec<u64>, len: &mut usize, b: bool) {
        if len.is_multiple_of(64) {
            bits.push(0);
        }
        if b {
            *bits.last_mut().expect("pushed") |= 1 << (*len % 64);
        }
        *len += 1;
    }
}

/// Per element: `P`, `D_v` for every `v`. Per ordered pair `(xᵢ, xⱼ)`,
/// including `i = j`: `π`- and `Q`-equality, `E′`, `E`, `R`, and
/// `F_c(xᵢ) = xⱼ` for every `c`.
pub fn qf_fingerprint<S: AtomicEval>(s: &S, tuple: &[S::Elem]) -> Fingerprint {
    let g = s.group_size();
    let mut bits = vec![tuple.len() as u64];
    let mut len = 64;
    for x in tuple {
        Fingerprint::push(&mut bits, &mut len, s.p(x));
        for v in 0..g {
            Fingerprint::push(&mut bits, &mut len, s.dv(v, x));
        }
    }
    for x in tuple {
        for y in tuple {
            for b in [
                s.pi_eq(x, y),
                s.q_eq(x, y),
                s.e_prime(x, y),
                s.e(x, y),
                s.r(x, y),
            ] {
                Fingerprint::push(&mut bits, &mut len, b);
            }
            for c in 0..g {
                Fingerprint::push(&mut bits, &mut len, s.fc(c, x) == *y);
            }
        }
    }
    Fingerprint(bits)
}

/// Element `k` of `G` as a symbol set.
pub fn group_element(k: usize) -> SymbolSet {
    SymbolSet(k as u64)
}
