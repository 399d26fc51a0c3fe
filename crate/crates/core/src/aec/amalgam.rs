use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::member::{is_member, KMembershipReport};
use crate::error::{Error, Result};
use crate::structures::{check_embedding, BitMatrix, ElementMap, Mismatch, SigmaStructure, Sym};

/// `M*` with the embeddings `f₁: M₁ → M*` and `f₂: M₂ → M*`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Amalgam {
    pub mstar: SigmaStructure,
    pub f1: ElementMap,
    pub f2: ElementMap,
    /// Labels of `M₂` outside `M₀` that clashed with `M₁`, with their new names.
    pub renamed: Vec<(String, String)>,
}

fn label_index(labels: &[String]) -> BTreeMap<&str, usize> {
    labels
        .iter()
        .enumerate()
        .map(|(k, l)| (l.as_str(), k))
        .collect()
}

fn require_member(m: &SigmaStructure, name: &str) -> Result<()> {
    if !m.has_j() {
        return Err(Error::Precondition(format!("{name} has no J sort")));
    }
    let r = is_member(m);
    match r.first_failure() {
        Some(f) => Err(Error::Precondition(format!(
            "{name} is not in K: clause {}: {}",
            f.clause, f.evidence
        ))),
        None => Ok(()),
    }
}

/// Renames the labels of `m2` that are outside `m0` but occur in `m1`.
fn rename_apart(
    m0: &SigmaStructure,
    m1: &SigmaStructure,
    m2: &SigmaStructure,
) -> (SigmaStructure, Vec<(String, String)>) {
    let mut out = m2.clone();
    let mut renamed = Vec::new();
    let fix = |mine: &mut Vec<String>,
               base: &[String],
               other: &[String],
               renamed: &mut Vec<(String, String)>| {
        let base: BTreeSet<&str> = base.iter().map(String::as_str).collect();
        let mut taken: BTreeSet<String> = other.iter().chain(mine.iter()).cloned().collect();
        for l in mine.iter_mut() {
            if base.contains(l.as_str()) || !other.contains(l) {
                continue;
            }
            let mut fresh = format!("{l}#2");
            while taken.contains(&fresh) {
                fresh.push_str("#2");
            }
            taken.insert(fresh.clone());
            renamed.push((l.clone(), fresh.clone()));
            *l = fresh;
        }
    };
    fix(&mut out.a, &m0.a, &m1.a, &mut renamed);
    fix(&mut out.i, &m0.i, &m1.i, &mut renamed);
    let empty = Vec::new();
    if let Some(j) = out.j.as_mut() {
        fix(
            j,
            m0.j.as_ref().unwrap_or(&empty),
            m1.j.as_ref().unwrap_or(&empty),
            &mut renamed,
        );
    }
    (out, renamed)
}

/// The rectangle amalgam: `I* = I₁ ∪ I₂`, `J* = J₁ ∪ J₂`, `A* = I* × G × J*`.
///
/// In each cell of `M_ℓ` the least label is the base point `x`, and
/// `f_ℓ(F_g x) = (π x, g, Q x)`. Relations on `A*` hold only at images:
/// `P`, `D_v` and `R` are unions of images, `E*` is the equivalence
/// generated by the images of `E`, and `E′*` is the `π`-kernel.
pub fn amalgamate(
    m0: &SigmaStructure,
    m1: &SigmaStructure,
    m2: &SigmaStructure,
) -> Result<Amalgam> {
    for (m, name) in [(m0, "M0"), (m1, "M1"), (m2, "M2")] {
        require_member(m, name)?;
    }
    if m1.sigma != m0.sigma || m2.sigma != m0.sigma || m1.group_labels != m0.group_labels {
        return Err(Error::Precondition(
            "the three structures use different groups".into(),
        ));
    }
    for (m, name) in [(m1, "M1"), (m2, "M2")] {
        if let Err(e) = m0.is_substructure_of(m) {
            return Err(Error::Precondition(format!(
                "M0 is not a substructure of {name}: {e}"
            )));
        }
    }
    let (m2r, renamed) = rename_apart(m0, m1, m2);
    let g = m0.group_size();

    let union = |x: &[String], y: &[String]| -> Vec<String> {
        let mut out = x.to_vec();
        out.extend(y.iter().filter(|l| !x.contains(l)).cloned());
        out
    };
    let istar = union(&m1.i, &m2r.i);
    let jstar = union(
        m1.j.as_deref().unwrap_or(&[]),
        m2r.j.as_deref().unwrap_or(&[]),
    );
    let (ii, ji) = (label_index(&istar), label_index(&jstar));
    let cell_of = |i: usize, j: usize, c: usize| (i * jstar.len() + j) * g + c;
    let n = istar.len() * jstar.len() * g;

    let mut mstar = SigmaStructure::empty(
        m0.sigma,
        m0.group_labels.clone(),
        istar.clone(),
        Some(jstar.clone()),
    );
    mstar.a = Vec::with_capacity(n);
    for il in &istar {
        for jl in &jstar {
            for c in 0..g {
                mstar.a.push(format!("<{il},{},{jl}>", m0.group_labels[c]));
            }
        }
    }
    mstar.pi = (0..n).map(|x| x / g / jstar.len()).collect();
    mstar.q = Some((0..n).map(|x| x / g % jstar.len()).collect());
    mstar.act = (0..g)
        .flat_map(|c| (0..n).map(move |x| (x & !(g - 1)) | ((x % g) ^ c)))
        .collect();
    mstar.p = vec![false; n];
    mstar.dv = BitMatrix::new(g, n);
    mstar.e_prime = BitMatrix::from_fn(n, n, |x, y| mstar.pi[x] == mstar.pi[y]);
    mstar.r = BitMatrix::square(n);

    let embed = |m: &SigmaStructure,
                 mstar: &mut SigmaStructure,
                 base_points: &mut BTreeMap<(String, String), String>| {
        let j = m.j.as_ref().expect("J present");
        let mut least: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for x in 0..m.a_len() {
            let key = (m.pi[x], m.q_of(x).expect("J present"));
            let e = least.entry(key).or_insert(x);
            if m.a[x] < m.a[*e] {
                *e = x;
            }
        }
        let mut a = Vec::with_capacity(m.a_len());
        for y in 0..m.a_len() {
            let (i, q) = (m.pi[y], m.q_of(y).expect("J present"));
            let x0 = least[&(i, q)];
            let c = (0..g).find(|&c| m.fc(c, x0) == y).expect("regular cell");
            a.push(cell_of(ii[m.i[i].as_str()], ji[j[q].as_str()], c));
        }
        for (&(i, q), &x0) in &least {
            base_points
                .entry((m.i[i].clone(), j[q].clone()))
                .or_insert_with(|| m.a[x0].clone());
        }
        for (y, &ay) in a.iter().enumerate() {
            if m.p[y] {
                mstar.p[ay] = true;
            }
            for v in 0..g {
                if m.dv(v, y) {
                    mstar.dv.set(v, ay, true);
                }
            }
        }
        for (x, y) in m.r.pairs() {
            mstar.r.set(a[x], a[y], true);
        }
        let e_pairs: Vec<(usize, usize)> =
            m.e.pairs().into_iter().map(|(x, y)| (a[x], a[y])).collect();
        let map = ElementMap {
            a,
            i: m.i.iter().map(|l| ii[l.as_str()]).collect(),
            j: j.iter().map(|l| ji[l.as_str()]).collect(),
        };
        (map, e_pairs)
    };
    let mut points1 = BTreeMap::new();
    let mut points2 = BTreeMap::new();
    let (f1, e1) = embed(m1, &mut mstar, &mut points1);
    let (f2, e2) = embed(&m2r, &mut mstar, &mut points2);
    for (cell, x) in &points1 {
        if let Some(y) = points2.get(cell) {
            if x != y {
                return Err(Error::InvariantViolation(format!(
                    "base points over ({}, {}) differ: {x} and {y}",
                    cell.0, cell.1
                )));
            }
        }
    }

    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut y = x;
        while parent[y] != r {
            let next = parent[y];
            parent[y] = r;
            y = next;
        }
        r
    }
    for (x, y) in e1.into_iter().chain(e2) {
        let (rx, ry) = (root(&mut parent, x), root(&mut parent, y));
        parent[rx] = ry;
    }
    let roots: Vec<usize> = (0..n).map(|x| root(&mut parent, x)).collect();
    mstar.e = BitMatrix::from_fn(n, n, |x, y| roots[x] == roots[y]);
    mstar.check_shape()?;
    Ok(Amalgam {
        mstar,
        f1,
        f2,
        renamed,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AmalgamReport {
    pub membership: KMembershipReport,
    pub f1: Option<Mismatch>,
    pub f2: Option<Mismatch>,
    pub agree_on_m0: bool,
    pub sizes: [usize; 3],
}

impl AmalgamReport {
    pub fn passed(&self) -> bool {
        self.membership.passed && self.f1.is_none() && self.f2.is_none() && self.agree_on_m0
    }
}

/// `M* ∈ K`, both maps are embeddings, and they agree on `M₀`.
pub fn verify_amalgam(
    m0: &SigmaStructure,
    m1: &SigmaStructure,
    m2: &SigmaStructure,
    am: &Amalgam,
) -> AmalgamReport {
    let f1 = check_embedding(m1, &am.mstar, &am.f1, &Sym::ALL).err();
    let f2 = check_embedding(m2, &am.mstar, &am.f2, &Sym::ALL).err();
    let agree = |l0: &[String], l1: &[String], l2: &[String], h1: &[usize], h2: &[usize]| {
        let (i1, i2) = (label_index(l1), label_index(l2));
        l0.iter()
            .all(|l| match (i1.get(l.as_str()), i2.get(l.as_str())) {
                (Some(&x), Some(&y)) => h1.get(x) == h2.get(y) && h1.get(x).is_some(),
                _ => false,
            })
    };
    let empty = Vec::new();
    let js = |m: &SigmaStructure| m.j.clone().unwrap_or_else(|| empty.clone());
    let agree_on_m0 = agree(&m0.a, &m1.a, &m2.a, &am.f1.a, &am.f2.a)
        && agree(&m0.i, &m1.i, &m2.i, &am.f1.i, &am.f2.i)
        && agree(&js(m0), &js(m1), &js(m2), &am.f1.j, &am.f2.j);
    AmalgamReport {
        membership: is_member(&am.mstar),
        f1,
        f2,
        agree_on_m0,
        sizes: [am.mstar.a_len(), am.mstar.i.len(), am.mstar.j_len()],
    }
}

/// Bounds for [`random_triple`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TripleParams {
    pub max_sigma: usize,
    pub max_base_i: usize,
    pub max_base_j: usize,
    pub max_new_i: usize,
    pub max_new_j: usize,
    /// Probability of each `R` pair, in percent.
    pub r_density: u32,
}

impl Default for TripleParams {
    fn default() -> Self {
        TripleParams {
            max_sigma: 2,
            max_base_i: 2,
            max_base_j: 1,
            max_new_i: 2,
            max_new_j: 1,
            r_density: 15,
        }
    }
}

/// A member of `K` under construction. Cells occupy `|G|` consecutive
/// slots, so `F_c` is `x ↦ x xor c` on offsets.
#[derive(Debug, Clone)]
struct Draft {
    sigma: usize,
    i: Vec<String>,
    j: Vec<String>,
    a: Vec<(String, usize, usize)>,
    p: Vec<bool>,
    dv: Vec<Vec<bool>>,
    class: Vec<usize>,
    r: BTreeSet<(usize, usize)>,
}

impl Draft {
    fn g(&self) -> usize {
        1 << self.sigma
    }

    fn has_cell(&self, i: usize, j: usize) -> bool {
        self.a.iter().any(|&(_, x, y)| (x, y) == (i, j))
    }

    fn add_cells(&mut self, rng: &mut ChaCha8Rng, prefix: &str, r_density: u32) {
        let start = self.a.len();
        for i in 0..self.i.len() {
            for j in 0..self.j.len() {
                if self.has_cell(i, j) {
                    continue;
                }
                for _ in 0..self.g() {
                    let label = format!("{prefix}{}", self.a.len() - start);
                    self.a.push((label, i, j));
                    self.p.push(rng.gen_bool(0.5));
                    self.dv
                        .push((0..self.g()).map(|_| rng.gen_bool(0.5)).collect());
                    let classes = self.class.iter().copied().max().map_or(0, |m| m + 1);
                    self.class.push(rng.gen_range(0..=classes));
                }
            }
        }
        for x in 0..self.a.len() {
            for y in 0..self.a.len() {
                if (x >= start || y >= start) && rng.gen_ratio(r_density, 100) {
                    self.r.insert((x, y));
                }
            }
        }
    }

    fn build(&self) -> SigmaStructure {
        let g = self.g();
        let n = self.a.len();
        let labels = (0..g).map(|k| format!("g{k}")).collect();
        let mut s = SigmaStructure::empty(self.sigma, labels, self.i.clone(), Some(self.j.clone()));
        s.a = self.a.iter().map(|(l, _, _)| l.clone()).collect();
        s.pi = self.a.iter().map(|&(_, i, _)| i).collect();
        s.q = Some(self.a.iter().map(|&(_, _, j)| j).collect());
        s.act = (0..g)
            .flat_map(|c| (0..n).map(move |x| (x & !(g - 1)) | ((x % g) ^ c)))
            .collect();
        s.p = self.p.clone();
        s.dv = BitMatrix::from_fn(g, n, |v, x| self.dv[x][v]);
        s.e_prime = BitMatrix::from_fn(n, n, |x, y| s.pi[x] == s.pi[y]);
        s.e = BitMatrix::from_fn(n, n, |x, y| self.class[x] == self.class[y]);
        s.r = BitMatrix::from_fn(n, n, |x, y| self.r.contains(&(x, y)));
        s
    }

    /// New `I`/`J` elements and the cells they require. Existing `E`-classes
    /// may gain elements but are never merged.
    fn extend(&self, rng: &mut ChaCha8Rng, params: &TripleParams) -> Draft {
        let mut out = self.clone();
        for k in 0..rng.gen_range(0..=params.max_new_i) {
            out.i.push(format!("ni{k}"));
        }
        for k in 0..rng.gen_range(0..=params.max_new_j) {
            out.j.push(format!("nj{k}"));
        }
        out.add_cells(rng, "n", params.r_density);
        out
    }
}

/// A seeded triple `M₀ ⊆ M₁, M₂` of small members of `K`. The extensions use
/// the same fresh labels, so amalgamation must rename apart.
pub fn random_triple(
    seed: u64,
    params: &TripleParams,
) -> (SigmaStructure, SigmaStructure, SigmaStructure) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = rng.gen_range(1..=params.max_sigma.max(1));
    let mut base = Draft {
        sigma,
        i: (0..rng.gen_range(0..=params.max_base_i))
            .map(|k| format!("i{k}"))
            .collect(),
        j: (0..rng.gen_range(0..=params.max_base_j))
            .map(|k| format!("j{k}"))
            .collect(),
        a: Vec::new(),
        p: Vec::new(),
        dv: Vec::new(),
        class: Vec::new(),
        r: BTreeSet::new(),
    };
    base.add_cells(&mut rng, "a", params.r_density);
    let m1 = base.extend(&mut rng, params);
    let m2 = base.extend(&mut rng, params);
    (base.build(), m1.build(), m2.build())
}
