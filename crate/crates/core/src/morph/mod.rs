//! Morphological recovery: how many gold morpheme strings a vocabulary
//! contains, where `Init` and `Fin` vocabularies agree, and whether
//! agreement predicts piece log-probability.
//!
//! All matching is on exact bare strings (mark stripped), optionally case
//! folded through the lexicon.

mod agreement;
mod coverage;
mod lexicon;
mod ols;

pub use agreement::{
    build_agreement_table, export_score_distributions, long_rows, read_score_distributions,
    AgreementRecord, ModelId, ScoreRow, SCORE_HEADER,
};
pub use coverage::{bare_pieces, coverage, exclusive_matches, union_coverage, Coverage, ExclusiveMatches};
pub use lexicon::{Boundness, MorphLexicon, SkippedLine};
pub use ols::{ols, ols_fit, RegressionResult, INTERCEPT};

use serde::Serialize;

use crate::error::Result;
use crate::vocab::Vocabulary;

/// Everything the morphology comparison of one `Init`/`Fin` pair produces.
#[derive(Clone, Debug, Serialize)]
pub struct MorphReport {
    pub lexicon_entries: usize,
    pub lexicon_skipped: usize,
    pub fold_case: bool,
    pub coverage_init: usize,
    pub coverage_fin: usize,
    pub fraction_init: f64,
    pub fraction_fin: f64,
    pub union: usize,
    pub only_init: usize,
    pub only_fin: usize,
    pub exclusive: ExclusiveMatches,
    pub agreement_counts: [usize; 3],
    /// `None` if the regression could not be fitted; the reason is in
    /// `regression_error`.
    pub regression: Option<RegressionResult>,
    pub regression_error: Option<String>,
}

/// Runs coverage, agreement and regression for a vocabulary pair. Returns
/// the report and the agreement table.
pub fn analyze(
    init: &Vocabulary,
    fin: &Vocabulary,
    lexicon: &MorphLexicon,
) -> Result<(MorphReport, Vec<AgreementRecord>)> {
    let ci = coverage(init, lexicon);
    let cf = coverage(fin, lexicon);
    let exclusive = exclusive_matches(init, fin, lexicon);
    let records = build_agreement_table(init, fin, lexicon);
    let mut agreement_counts = [0usize; 3];
    for r in &records {
        agreement_counts[r.agreement as usize] += 1;
    }
    let (regression, regression_error) = match ols(&records) {
        Ok(r) => (Some(r), None),
        Err(e) => {
            log::warn!("agreement regression failed: {e}");
            (None, Some(e.to_string()))
        }
    };
    let report = MorphReport {
        lexicon_entries: lexicon.len(),
        lexicon_skipped: lexicon.skipped().len(),
        fold_case: lexicon.fold_case(),
        coverage_init: ci.count(),
        coverage_fin: cf.count(),
        fraction_init: ci.fraction(),
        fraction_fin: cf.fraction(),
        union: union_coverage(init, fin, lexicon),
        only_init: exclusive.only_a.len(),
        only_fin: exclusive.only_b.len(),
        exclusive,
        agreement_counts,
        regression,
        regression_error,
    };
    Ok((report, records))
}
