use std::collections::BTreeMap;

use serde::Serialize;

use super::closure::BRUTE_FORCE_LIMIT;
use super::types::{galois_type_equal_with, GaloisTypeHandle, SearchMethod, TypeVerdict};
use crate::coherent::{decide_limit_iso, extract_sharp};
use crate::error::{Error, Result};
use crate::functions::Family;
use crate::sharp::{
    check_pipeline, search_sharp, DerivedFilter, PipelineReport, SharpWitnessDoc,
    DEFAULT_THRESHOLDS,
};
use crate::structures::{build_level, Side};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelTypeRow {
    pub d: String,
    pub equal: bool,
    pub method: SearchMethod,
    pub explored: usize,
    /// The witness acts on `A` as `g_d`.
    pub extends_g_d: bool,
    /// Verdict of the generic search, when the closure is within its guard.
    pub generic_confirmed: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum LimitSection {
    Declined {
        note: String,
    },
    Equal {
        system: BTreeMap<String, Vec<String>>,
        witness: SharpWitnessDoc,
        pipeline: PipelineReport,
    },
    Distinct {
        note: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TamenessReport {
    pub bound: usize,
    pub levels: Vec<LevelTypeRow>,
    pub limit: LimitSection,
    pub locality: String,
}

impl TamenessReport {
    pub fn passed(&self) -> bool {
        let levels = self
            .levels
            .iter()
            .all(|r| r.equal && r.extends_g_d && r.generic_confirmed != Some(false));
        let limit = match &self.limit {
            LimitSection::Equal { pipeline, .. } => pipeline.passed(),
            _ => true,
        };
        levels && limit
    }
}

fn level_row(family: &Family, d: usize) -> Result<LevelTypeRow> {
    let p = GaloisTypeHandle::level(family, Side::One, d)?;
    let q = GaloisTypeHandle::level(family, Side::Two, d)?;
    let perm = build_level(Side::One, d, family, false)?.g_permutation(d)?;
    let verdict = match galois_type_equal_with(&p, &q, SearchMethod::FiberShift, Some(&perm)) {
        Err(Error::Precondition(_)) => galois_type_equal_with(&p, &q, SearchMethod::Generic, None)?,
        other => other?,
    };
    let generic_confirmed = if p.closure().structure.total_len() <= BRUTE_FORCE_LIMIT {
        Some(galois_type_equal_with(&p, &q, SearchMethod::Generic, None)?.is_equal())
    } else {
        None
    };
    // the closure of base and point is the whole level, so indices agree
    let whole = p.closure().set.a.len() == perm.len();
    let d = family.regime().label(d);
    Ok(match verdict {
        TypeVerdict::Equal {
            method,
            explored,
            witness,
        } => LevelTypeRow {
            d,
            equal: true,
            method,
            explored,
            extends_g_d: whole && witness.map.a == perm,
            generic_confirmed,
            reason: None,
        },
        TypeVerdict::Distinct {
            method,
            explored,
            reason,
        } => LevelTypeRow {
            d,
            equal: false,
            method,
            explored,
            extends_g_d: false,
            generic_confirmed,
            reason: Some(reason),
        },
    })
}

fn limit_section(family: &Family) -> Result<LimitSection> {
    let system = match decide_limit_iso(family) {
        Err(Error::UnsupportedRegime(m)) => {
            return Ok(LimitSection::Declined {
                note: format!("limit types are not compared here: {m}"),
            })
        }
        other => other?,
    };
    let Some(system) = system else {
        let note = match search_sharp(family) {
            Some(w) => format!(
                "no coherent system; a sharp witness with f* = {} exists, so the principle alone does not decide the limit types",
                w.fstar
            ),
            None => "no coherent system and no sharp witness".into(),
        };
        return Ok(LimitSection::Distinct { note });
    };
    let witness = extract_sharp(family, &system)?;
    let filter = DerivedFilter::with_default_markers(family.clone(), witness.clone())?;
    let pipeline = check_pipeline(&filter, &DEFAULT_THRESHOLDS)?;
    Ok(LimitSection::Equal {
        system: system.to_doc(family),
        witness: witness.to_doc(family),
        pipeline,
    })
}

/// Compares `p_d` and `q_d` for every level up to `bound` and then the limit
/// types through the coherent-system decision.
pub fn tameness_report(family: &Family, bound: usize) -> Result<TamenessReport> {
    let regime = family.regime();
    let levels = (0..=bound)
        .filter(|&d| regime.contains(d))
        .map(|d| level_row(family, d))
        .collect::<Result<_>>()?;
    Ok(TamenessReport {
        bound,
        levels,
        limit: limit_section(family)?,
        locality: "the resolution ⟨M_{ℓ,d} : d⟩ is the test family: types agreeing at every level d are compared at the union".into(),
    })
}
