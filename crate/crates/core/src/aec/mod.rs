//! The class `K_σ`: membership, closure, Galois types, amalgamation, and the
//! level-by-level type comparison for the two expanded level families.

mod amalgam;
mod closure;
mod member;
mod tameness;
mod types;

use std::collections::BTreeSet;

use serde::Serialize;

use crate::structures::SigmaStructure;

pub use amalgam::{
    amalgamate, random_triple, verify_amalgam, Amalgam, AmalgamReport, TripleParams,
};
pub use closure::{
    all_subsets, check_admits_intersections, closure, closure_bruteforce, is_sort_only,
    substructure_lattice, Closure, IntersectionVerdict, SubstructureLattice, BRUTE_FORCE_LIMIT,
};
pub use member::{is_member, ClauseResult, KMembershipReport};
pub use tameness::{tameness_report, LevelTypeRow, LimitSection, TamenessReport};
pub use types::{
    galois_type_equal, galois_type_equal_with, GaloisTypeHandle, SearchMethod, TypeVerdict,
    TypeWitness,
};

/// The three sorts of the signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Sort {
    A,
    I,
    J,
}

/// An element of a structure, by sort and index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Point {
    pub sort: Sort,
    pub index: usize,
}

impl Point {
    pub fn a(index: usize) -> Self {
        Point {
            sort: Sort::A,
            index,
        }
    }
    pub fn i(index: usize) -> Self {
        Point {
            sort: Sort::I,
            index,
        }
    }
    pub fn j(index: usize) -> Self {
        Point {
            sort: Sort::J,
            index,
        }
    }

    pub fn label(self, m: &SigmaStructure) -> &str {
        match self.sort {
            Sort::A => &m.a[self.index],
            Sort::I => &m.i[self.index],
            Sort::J => &m.j.as_ref().expect("J present")[self.index],
        }
    }
}

/// A subset of the carriers of one structure.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Subset {
    pub a: BTreeSet<usize>,
    pub i: BTreeSet<usize>,
    pub j: BTreeSet<usize>,
}

impl Subset {
    pub fn whole(m: &SigmaStructure) -> Self {
        Subset {
            a: (0..m.a_len()).collect(),
            i: (0..m.i.len()).collect(),
            j: (0..m.j_len()).collect(),
        }
    }

    pub fn insert(&mut self, p: Point) {
        match p.sort {
            Sort::A => self.a.insert(p.index),
            Sort::I => self.i.insert(p.index),
            Sort::J => self.j.insert(p.index),
        };
    }

    pub fn contains(&self, p: Point) -> bool {
        match p.sort {
            Sort::A => self.a.contains(&p.index),
            Sort::I => self.i.contains(&p.index),
            Sort::J => self.j.contains(&p.index),
        }
    }

    pub fn is_subset(&self, other: &Subset) -> bool {
        self.a.is_subset(&other.a) && self.i.is_subset(&other.i) && self.j.is_subset(&other.j)
    }

    pub fn len(&self) -> usize {
        self.a.len() + self.i.len() + self.j.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
