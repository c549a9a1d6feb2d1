use std::fmt::Write;

use crate::stats::StatsReport;

/// Placeholder for a missing cell.
pub const MISSING: &str = "—";

const MODEL_WIDTH: usize = 10;
const COL_WIDTH: usize = 9;

/// Fixed-width table: one row per model and a (tokens/word, entropy,
/// perplexity) column triple per corpus. Tokens/word and entropy are printed
/// with 3 decimals, perplexity with 2. Missing cells are rendered as
/// [`MISSING`].
pub fn render_table(cells: &[StatsReport], models: &[String], corpora: &[String]) -> String {
    let group_width = 3 * COL_WIDTH;
    let mut out = String::new();
    let _ = write!(out, "{:<MODEL_WIDTH$}", "");
    for corpus in corpora {
        let _ = write!(out, " | {corpus:<group_width$}");
    }
    out.push('\n');
    let _ = write!(out, "{:<MODEL_WIDTH$}", "model");
    for _ in corpora {
        let _ = write!(out, " | {:>COL_WIDTH$}{:>COL_WIDTH$}{:>COL_WIDTH$}", "tok/word", "H", "ppl");
    }
    out.push('\n');
    let rule = MODEL_WIDTH + corpora.len() * (group_width + 3);
    out.push_str(&"-".repeat(rule));
    out.push('\n');
    for model in models {
        let _ = write!(out, "{model:<MODEL_WIDTH$}");
        for corpus in corpora {
            let cell = cells
                .iter()
                .find(|c| &c.model_id == model && &c.corpus_id == corpus);
            let (a, b, c) = match cell {
                Some(c) => (
                    format!("{:.3}", c.tokens_per_word),
                    format!("{:.3}", c.corpus_entropy_bits),
                    c.perplexity
                        .map_or_else(|| MISSING.to_owned(), |p| format!("{p:.2}")),
                ),
                None => {
                    log::warn!("no cell for {model} on {corpus}");
                    (MISSING.to_owned(), MISSING.to_owned(), MISSING.to_owned())
                }
            };
            let _ = write!(out, " | {a:>COL_WIDTH$}{b:>COL_WIDTH$}{c:>COL_WIDTH$}");
        }
        out.push('\n');
    }
    out
}
