use serde::Serialize;

use super::filter::{
    check_complete, check_filter_laws, check_measures, CompleteVerdict, DerivedFilter, LawReport,
};
use crate::error::Result;
use crate::functions::{preimage, EpSet, SymbolSet};

/// Tails checked by default.
pub const DEFAULT_THRESHOLDS: [usize; 5] = [0, 1, 2, 3, 4];

const MAX_LIST: usize = 8;
const MAX_POOL: usize = 12;

/// Outcome of running every filter check over the standard sample sets.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PipelineReport {
    pub laws: LawReport,
    pub complete_lists: usize,
    pub complete_failures: Vec<String>,
    pub measures: usize,
    pub measure_failures: Vec<String>,
}

impl PipelineReport {
    pub fn passed(&self) -> bool {
        self.laws.passed() && self.complete_failures.is_empty() && self.measure_failures.is_empty()
    }
}

/// Tails `⌊d⌋` for the thresholds and every `f⁻¹X` over the alphabet.
pub fn sample_sets(filter: &DerivedFilter, thresholds: &[usize]) -> Result<Vec<EpSet>> {
    let fam = filter.family();
    let mut out: Vec<EpSet> = thresholds.iter().map(|&d| EpSet::tail(d)).collect();
    for f in 0..fam.len() {
        let p = fam.periodic(f)?;
        for x in fam.alphabet().all().subsets() {
            out.push(preimage(p, x));
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Filter laws on [`sample_sets`], completeness on every list of at most
/// eight distinct members drawn from the in-filter tails and single fibers,
/// and the measure property for every member and every `X`.
pub fn check_pipeline(filter: &DerivedFilter, thresholds: &[usize]) -> Result<PipelineReport> {
    let fam = filter.family();
    let sets = sample_sets(filter, thresholds)?;
    let mut report = PipelineReport {
        laws: check_filter_laws(filter, &sets, thresholds),
        ..Default::default()
    };

    let mut pool: Vec<EpSet> = thresholds.iter().map(|&d| EpSet::tail(d)).collect();
    for f in 0..fam.len() {
        let p = fam.periodic(f)?;
        for s in fam.alphabet().all().iter() {
            pool.push(preimage(p, SymbolSet::singleton(s)));
        }
    }
    pool.retain(|s| filter.contains(s));
    pool.sort();
    pool.dedup();
    pool.truncate(MAX_POOL);
    for mask in 0u32..(1 << pool.len()) {
        if mask.count_ones() as usize > MAX_LIST {
            continue;
        }
        let list: Vec<EpSet> = (0..pool.len())
            .filter(|k| mask >> k & 1 == 1)
            .map(|k| pool[k].clone())
            .collect();
        report.complete_lists += 1;
        if let CompleteVerdict::Fail { intersection } = check_complete(filter, &list)? {
            report
                .complete_failures
                .push(format!("list {mask:#b} meets in {intersection}"));
        }
    }

    for f in 0..fam.len() {
        for x in fam.alphabet().all().subsets() {
            report.measures += 1;
            if let Err(e) = check_measures(filter, f, x) {
                report.measure_failures.push(format!(
                    "{} {}: {e}",
                    fam.name(f),
                    fam.alphabet().format_set(x)
                ));
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::testing::*;
    use crate::sharp::search_sharp;

    #[test]
    fn pipeline_passes_on_searched_witnesses() {
        for fam in bundled_like_families() {
            let w = search_sharp(&fam).unwrap();
            let filter = DerivedFilter::with_default_markers(fam, w).unwrap();
            let r = check_pipeline(&filter, &DEFAULT_THRESHOLDS).unwrap();
            assert!(r.passed(), "{r:?}");
            assert!(r.complete_lists > 1);
        }
    }
}
