use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::vocab::{strip_mark, Vocabulary};

use super::MorphLexicon;

/// One bare piece string and how the two vocabularies treat it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AgreementRecord {
    pub bare_piece: String,
    /// Score in the `Init` vocabulary; the highest one if several marked
    /// variants share this bare string.
    pub score_init: Option<f64>,
    pub score_fin: Option<f64>,
    /// Number of vocabularies in which the string is present and is a
    /// lexicon entry: 0, 1 or 2.
    pub agreement: u8,
    pub is_morpheme: bool,
}

fn best_scores(vocab: &Vocabulary, lexicon: &MorphLexicon) -> BTreeMap<String, f64> {
    let mut out: BTreeMap<String, f64> = BTreeMap::new();
    for p in vocab.non_reserved() {
        let (bare, _) = strip_mark(&p.surface, vocab.scheme(), vocab.meta());
        if bare.is_empty() {
            continue;
        }
        let slot = out.entry(lexicon.normalize(&bare)).or_insert(f64::NEG_INFINITY);
        *slot = slot.max(p.score);
    }
    out
}

/// One record per distinct bare string in either vocabulary, sorted by bare
/// string.
pub fn build_agreement_table(
    init: &Vocabulary,
    fin: &Vocabulary,
    lexicon: &MorphLexicon,
) -> Vec<AgreementRecord> {
    let si = best_scores(init, lexicon);
    let sf = best_scores(fin, lexicon);
    let mut keys: Vec<&String> = si.keys().chain(sf.keys()).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|bare| {
            let score_init = si.get(bare).copied();
            let score_fin = sf.get(bare).copied();
            let is_morpheme = lexicon.contains(bare);
            let agreement = if is_morpheme {
                score_init.is_some() as u8 + score_fin.is_some() as u8
            } else {
                0
            };
            AgreementRecord {
                bare_piece: bare.clone(),
                score_init,
                score_fin,
                agreement,
                is_morpheme,
            }
        })
        .collect()
}

/// Long format: one `(bare_piece, model, score, agreement, is_morpheme)`
/// row per record and model that contains the piece, `init` before `fin`.
pub fn long_rows(records: &[AgreementRecord]) -> Vec<ScoreRow> {
    let mut rows = Vec::with_capacity(records.len() * 2);
    for r in records {
        for (model, score) in [(ModelId::Init, r.score_init), (ModelId::Fin, r.score_fin)] {
            if let Some(score) = score {
                rows.push(ScoreRow {
                    bare_piece: r.bare_piece.clone(),
                    model,
                    score,
                    agreement: r.agreement,
                    is_morpheme: r.is_morpheme,
                });
            }
        }
    }
    rows
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelId {
    Init,
    Fin,
}

impl ModelId {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelId::Init => "init",
            ModelId::Fin => "fin",
        }
    }

    /// Regression indicator: 0 for `Init`, 1 for `Fin`.
    pub fn indicator(self) -> f64 {
        match self {
            ModelId::Init => 0.0,
            ModelId::Fin => 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScoreRow {
    pub bare_piece: String,
    pub model: ModelId,
    pub score: f64,
    pub agreement: u8,
    pub is_morpheme: bool,
}

pub const SCORE_HEADER: &str = "bare_piece\tmodel\tscore\tagreement\tis_morpheme";

/// Writes [`long_rows`] as TSV with a header line. Returns the number of
/// data rows.
pub fn export_score_distributions<W: Write>(records: &[AgreementRecord], mut sink: W) -> Result<usize> {
    writeln!(sink, "{SCORE_HEADER}")?;
    let rows = long_rows(records);
    for r in &rows {
        writeln!(
            sink,
            "{}\t{}\t{:.16e}\t{}\t{}",
            r.bare_piece,
            r.model.as_str(),
            r.score,
            r.agreement,
            r.is_morpheme as u8
        )?;
    }
    sink.flush()?;
    Ok(rows.len())
}

/// Parses the export format back.
pub fn read_score_distributions<R: BufRead>(source: R) -> Result<Vec<ScoreRow>> {
    let mut out = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line != SCORE_HEADER {
                return Err(Error::parse(1, "missing score table header"));
            }
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        let bad = |what: &str| Error::parse(i + 1, format!("bad {what} in {line:?}"));
        if f.len() != 5 {
            return Err(bad("column count"));
        }
        out.push(ScoreRow {
            bare_piece: f[0].to_owned(),
            model: match f[1] {
                "init" => ModelId::Init,
                "fin" => ModelId::Fin,
                _ => return Err(bad("model")),
            },
            score: f[2].parse().map_err(|_| bad("score"))?,
            agreement: f[3].parse().map_err(|_| bad("agreement"))?,
            is_morpheme: match f[4] {
                "1" => true,
                "0" => false,
                _ => return Err(bad("is_morpheme")),
            },
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::{MarkingScheme, Piece, DEFAULT_META};

    fn vocab(pieces: &[(&str, f64)], scheme: MarkingScheme) -> Vocabulary {
        Vocabulary::new(
            pieces.iter().map(|&(s, p)| Piece::new(s, p)).collect(),
            scheme,
            DEFAULT_META,
        )
        .unwrap()
    }

    fn lex(src: &str) -> MorphLexicon {
        MorphLexicon::read_from(src.as_bytes(), false).unwrap()
    }

    #[test]
    fn agreement_levels() {
        let init = vocab(&[("ing", -3.0), ("▁xqz", -9.0), ("▁ing", -5.0)], MarkingScheme::Init);
        let fin = vocab(&[("ing▁", -4.0), ("xqz", -8.0), ("office▁", -7.0)], MarkingScheme::Fin);
        let t = build_agreement_table(&init, &fin, &lex("-ing\noffice\n"));
        let by: BTreeMap<_, _> = t.iter().map(|r| (r.bare_piece.as_str(), r)).collect();
        assert_eq!(by["ing"].agreement, 2);
        assert_eq!(by["ing"].score_init, Some(-3.0));
        assert_eq!(by["ing"].score_fin, Some(-4.0));
        assert_eq!(by["xqz"].agreement, 0);
        assert!(!by["xqz"].is_morpheme);
        assert_eq!(by["office"].agreement, 1);
        assert_eq!(by["office"].score_init, None);
        assert_eq!(t.len(), 3);
    }

    #[test]
    fn export_row_counts() {
        let rec = |b: &str, i: Option<f64>, f: Option<f64>| AgreementRecord {
            bare_piece: b.into(),
            score_init: i,
            score_fin: f,
            agreement: 0,
            is_morpheme: false,
        };
        let both = vec![
            rec("a", Some(-1.0), Some(-2.0)),
            rec("b", Some(-1.5), Some(-2.5)),
            rec("c", Some(-0.1), Some(-0.2)),
        ];
        let mut buf = Vec::new();
        assert_eq!(export_score_distributions(&both, &mut buf).unwrap(), 6);
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 7);
        let back = read_score_distributions(&buf[..]).unwrap();
        assert_eq!(back, long_rows(&both));

        let one = vec![rec("a", None, Some(-2.0))];
        let mut buf = Vec::new();
        assert_eq!(export_score_distributions(&one, &mut buf).unwrap(), 1);
    }
}
