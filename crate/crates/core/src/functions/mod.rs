//! The function family `F`: eventually periodic functions on `(ℕ,<)` (or
//! tables on a finite order), the refinement preorder with its unique
//! witnesses, cofinal ranges, repleteness and characteristic functions.

mod alphabet;
mod epfn;
mod epset;
mod family;
mod replete;

#[cfg(test)]
pub(crate) mod testing;

pub use alphabet::{Alphabet, Symbol, SymbolSet, MAX_SYMBOLS};
pub use epfn::{compare, equivalent, ComparisonWitness, EpFn, Func};
pub use epset::{EpSet, EpSetWords};
pub use family::{has_characteristic_fn, preimage, refine, Family, Member, Refinement};
pub use replete::{check_replete, replete_combine, RepleteVerdict};
