use boundkit_core::segment::{build_lattice, viterbi};
use boundkit_core::vocab::DEFAULT_META;
use boundkit_core::{
    decode, encode_line, mark_word, pretokenize, train, MarkingScheme, Piece, PretokMode, TrainerConfig, Vocabulary,
};
use proptest::prelude::*;

const META: char = DEFAULT_META;

fn small_config(scheme: MarkingScheme, target: usize) -> TrainerConfig {
    TrainerConfig {
        target_vocab_size: target,
        seed_min_count: 1,
        scheme,
        ..TrainerConfig::default()
    }
}

fn toy_vocab(scheme: MarkingScheme) -> Vocabulary {
    let lines = [
        "the cat sat on the mat, and the rat sat too.",
        "cats chase rats; rats chase nobody!",
        "that is the thing",
    ];
    train(lines, &small_config(scheme, 40)).unwrap().vocab
}

fn scheme() -> impl Strategy<Value = MarkingScheme> {
    prop_oneof![Just(MarkingScheme::Init), Just(MarkingScheme::Fin)]
}

fn mode() -> impl Strategy<Value = PretokMode> {
    prop_oneof![
        Just(PretokMode::Raw),
        Just(PretokMode::RuleBased),
        Just(PretokMode::External)
    ]
}

fn reverse(s: &str) -> String {
    s.chars().rev().collect()
}

/// Scores of every segmentation of the oriented word, by exhaustive search.
fn all_path_scores(vocab: &Vocabulary, oriented: &[char], pos: usize, acc: f64, out: &mut Vec<f64>) {
    if pos == oriented.len() {
        out.push(acc);
        return;
    }
    let orient = |s: &str| match vocab.scheme() {
        MarkingScheme::Init => s.to_owned(),
        MarkingScheme::Fin => reverse(s),
    };
    let mut has_single = false;
    for end in pos + 1..=oriented.len() {
        let sub: String = oriented[pos..end].iter().collect();
        if let Some(p) = vocab.non_reserved().find(|p| orient(&p.surface) == sub) {
            has_single |= end == pos + 1;
            all_path_scores(vocab, oriented, end, acc + p.score, out);
        }
    }
    if !has_single {
        all_path_scores(vocab, oriented, pos + 1, acc + vocab.unk_score(), out);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn decode_inverts_encode(line in "[\\PC\t ]{0,40}", scheme in scheme(), mode in mode()) {
        prop_assume!(!line.contains('\u{E000}'));
        let vocab = toy_vocab(scheme);
        let pieces = encode_line(&line, &vocab, mode);
        prop_assert_eq!(decode(&pieces, scheme, META), pretokenize(&line, mode).join(" "));
    }

    #[test]
    fn viterbi_score_is_the_maximum(word in "[a-dx]{1,9}", scheme in scheme(),
                                    extra in prop::collection::btree_map("[a-d]{2,3}", 1u8..6, 0..12)) {
        let mut pieces: Vec<Piece> = Vec::new();
        for (i, c) in "abcd".chars().enumerate() {
            pieces.push(Piece::new(c.to_string(), -(i as f64) - 1.0));
            pieces.push(Piece::new(mark_word(&c.to_string(), scheme, META), -2.5));
        }
        for (s, w) in &extra {
            pieces.push(Piece::new(s.clone(), -f64::from(*w)));
        }
        let vocab = Vocabulary::new(pieces, scheme, META).unwrap();
        let marked = mark_word(&word, scheme, META);
        let (best_pieces, best) = viterbi(&build_lattice(&marked, &vocab)).unwrap();
        prop_assert_eq!(best_pieces.concat(), marked);

        let mut oriented = vec![META];
        match scheme {
            MarkingScheme::Init => oriented.extend(word.chars()),
            MarkingScheme::Fin => oriented.extend(word.chars().rev()),
        }
        let mut scores = Vec::new();
        all_path_scores(&vocab, &oriented, 0, 0.0, &mut scores);
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(best, max);
    }

    #[test]
    fn forward_backward_bounds_viterbi(word in "[a-d]{1,10}", scheme in scheme()) {
        let vocab = toy_vocab(scheme);
        let lattice = build_lattice(&mark_word(&word, scheme, META), &vocab);
        let (log_z, post) = lattice.forward_backward().unwrap();
        let (_, best) = viterbi(&lattice).unwrap();
        prop_assert!(log_z >= best - 1e-12);
        prop_assert!(post.iter().all(|&p| (-1e-12..=1.0 + 1e-12).contains(&p)));
        // every path crosses position 0 exactly once
        let first: f64 = lattice
            .edges()
            .iter()
            .zip(&post)
            .filter(|(e, _)| e.start == 0)
            .map(|(_, p)| p)
            .sum();
        prop_assert!((first - 1.0).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fin_training_mirrors_init_on_reversed_text(lines in prop::collection::vec("[abc]{1,5}( [abc]{1,5}){0,4}", 1..12)) {
        let reversed: Vec<String> = lines.iter().map(|l| reverse(l)).collect();
        let fin = train(&lines, &small_config(MarkingScheme::Fin, 8)).unwrap();
        let init = train(&reversed, &small_config(MarkingScheme::Init, 8)).unwrap();
        prop_assert_eq!(fin.vocab.len(), init.vocab.len());
        for p in fin.vocab.non_reserved() {
            let s = init.vocab.score(&reverse(&p.surface));
            prop_assert!(s.is_some_and(|s| (s - p.score).abs() <= 1e-9), "{}", p.surface);
        }
    }

    #[test]
    fn training_conserves_mass_and_never_loses_likelihood(
        lines in prop::collection::vec("[a-e]{1,6}( [a-e]{1,6}){0,5}", 1..20),
        scheme in scheme(),
    ) {
        let trained = train(&lines, &small_config(scheme, 10)).unwrap();
        let t = &trained.trace;
        for r in &t.rounds {
            prop_assert!((r.mass_after_em - 1.0).abs() < 1e-9);
            prop_assert!((r.mass_after_prune - 1.0).abs() < 1e-9);
            for w in r.em_logliks.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-9 * w[0].abs());
            }
        }
        for w in t.final_em_logliks.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-9 * w[0].abs());
        }
        prop_assert!((trained.vocab.probability_mass() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn vocabulary_file_round_trip() {
    for scheme in [MarkingScheme::Init, MarkingScheme::Fin] {
        let vocab = toy_vocab(scheme);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("toy.vocab");
        vocab.save(&path).unwrap();
        let loaded = Vocabulary::load(&path).unwrap();
        assert_eq!(loaded, vocab);
        for p in vocab.pieces() {
            assert_eq!(loaded.score(&p.surface), Some(p.score));
        }
    }
}
