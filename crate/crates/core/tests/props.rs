//! Property-based invariants.
//!
//! These are laws the library promises for *all* inputs, exercised here on
//! randomized data: projections stay projections, metrics stay metrics,
//! splits partition, encodings respect their caps, and rescalings that must
//! not change a decision do not change it.

use std::collections::{BTreeSet, HashSet};

use proptest::prelude::*;

use atrb_core::classical::{hellinger, ImpostersConfig, ImpostersModel, ScapModel};
use atrb_core::eval::micro_f1;
use atrb_core::features::{
    char_ngrams, encode_text, porter_stem, Alphabet, Tokenizer, Vocabulary, ALPHABET_PAD,
    WORD_OFFSET,
};
use atrb_core::nnet::ops::{conv_forward, max_over_time, softmax, ConvFilter};
use atrb_core::nnet::Tensor;
use atrb_core::rng::XorShift64;
use atrb_core::{Corpus, Document, SplitSpec};

// ---------------------------------------------------------------------------
// Strategies
// ---------------------------------------------------------------------------

/// Printable-ASCII text, possibly empty, spaces included.
fn ascii_text() -> impl Strategy<Value = String> {
    "[ -~]{0,60}"
}

/// A point on the probability simplex with the given number of coordinates.
fn simplex(dims: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-3..1.0f64, dims).prop_map(|v| {
        let total: f64 = v.iter().sum();
        v.into_iter().map(|x| x / total).collect()
    })
}

/// A corpus of 1-4 authors with alphabetic documents of 3-20 characters.
fn small_corpus() -> impl Strategy<Value = Corpus> {
    prop::collection::vec((0usize..4, "[a-z][a-z ]{2,19}"), 1..12).prop_map(|docs| {
        Corpus::from_documents(
            docs.into_iter().map(|(a, text)| Document::new(format!("a{a}"), text)).collect(),
        )
    })
}

/// A corpus where every author has enough documents for a 0.25/0.25 split.
fn splittable_corpus() -> impl Strategy<Value = Corpus> {
    prop::collection::vec(prop::collection::vec("[a-z]{3,12}", 4..8), 1..5).prop_map(|authors| {
        let mut docs = Vec::new();
        for (a, texts) in authors.into_iter().enumerate() {
            for text in texts {
                docs.push(Document::new(format!("a{a}"), text));
            }
        }
        Corpus::from_documents(docs)
    })
}

fn doc_key(d: &Document) -> (String, String) {
    (d.author_id.clone(), d.text.clone())
}

fn doc_multiset(c: &Corpus) -> Vec<(String, String)> {
    let mut keys: Vec<_> = c.documents().iter().map(doc_key).collect();
    keys.sort();
    keys
}

// ---------------------------------------------------------------------------
// Tokenization and n-grams
// ---------------------------------------------------------------------------

proptest! {
    /// Tokenizing is a projection: re-tokenizing the joined token stream
    /// reproduces it exactly, and the counting fast path agrees with the
    /// allocating path.
    #[test]
    fn tokenization_is_a_projection(text in ascii_text()) {
        let tok = Tokenizer::default();
        let tokens = tok.tokenize(&text);
        prop_assert_eq!(tok.count_tokens(&text), tokens.len());
        let rejoined = tokens.join(" ");
        prop_assert_eq!(&tok.tokenize(&rejoined), &tokens);
        prop_assert!(tokens.iter().all(|t| !t.is_empty() && !t.chars().any(char::is_whitespace)));
    }

    /// Space-inclusive n-gram counts cover every window of the text; the
    /// space-free counts are a subset of them and contain no whitespace.
    #[test]
    fn ngram_counts_cover_every_window(text in ascii_text(), n in 1usize..5) {
        let with_spaces = char_ngrams(&text, n, false);
        let chars = text.chars().count();
        let windows = (chars + 1).saturating_sub(n) as u64;
        prop_assert_eq!(with_spaces.values().sum::<u64>(), windows);
        prop_assert!(with_spaces.keys().all(|g| g.chars().count() == n));

        let space_free = char_ngrams(&text, n, true);
        prop_assert!(space_free.values().sum::<u64>() <= windows);
        for (gram, count) in &space_free {
            prop_assert!(!gram.chars().any(char::is_whitespace));
            prop_assert_eq!(Some(*count), with_spaces.get(gram).copied());
        }
    }

    /// Stemming lowercase words never produces an empty or longer word and
    /// stays within the lowercase alphabet.
    #[test]
    fn stemming_never_grows_words(word in "[a-z]{1,18}") {
        let stem = porter_stem(&word);
        prop_assert!(!stem.is_empty());
        prop_assert!(stem.len() <= word.len(), "{word} grew to {stem}");
        prop_assert!(stem.chars().all(|c| c.is_ascii_lowercase()));
        // Stemming the same word twice gives the same answer.
        prop_assert_eq!(porter_stem(&word), stem);
    }
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

proptest! {
    /// Hellinger distance is a metric on the simplex, bounded by [0, 1].
    #[test]
    fn hellinger_is_a_metric(
        dims in 1usize..8,
        seeds in prop::collection::vec(1e-3..1.0f64, 24),
    ) {
        let point = |offset: usize| -> Vec<f64> {
            let raw: Vec<f64> = (0..dims).map(|i| seeds[offset + i]).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|x| x / total).collect()
        };
        let (p, q, r) = (point(0), point(8), point(16));
        let (pq, qr, pr) = (
            hellinger(&p, &q).unwrap(),
            hellinger(&q, &r).unwrap(),
            hellinger(&p, &r).unwrap(),
        );
        prop_assert!((0.0..=1.0 + 1e-12).contains(&pq));
        prop_assert!(hellinger(&p, &p).unwrap() <= 1e-12);
        prop_assert!((pq - hellinger(&q, &p).unwrap()).abs() <= 1e-12, "asymmetric");
        prop_assert!(pr <= pq + qr + 1e-9, "triangle violated: {pr} > {pq} + {qr}");
    }

    /// For single-label prediction, micro-averaged F1 is plain accuracy.
    #[test]
    fn micro_f1_is_accuracy(
        pairs in prop::collection::vec(("[a-d]", "[a-d]"), 1..40),
    ) {
        let gold: Vec<&str> = pairs.iter().map(|(g, _)| g.as_str()).collect();
        let pred: Vec<&str> = pairs.iter().map(|(_, p)| p.as_str()).collect();
        let f1 = micro_f1(&gold, &pred).unwrap();
        let accuracy =
            gold.iter().zip(&pred).filter(|(g, p)| g == p).count() as f64 / gold.len() as f64;
        prop_assert!((f1 - accuracy).abs() <= 1e-12);
    }
}

// ---------------------------------------------------------------------------
// Corpus operations
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Smaller top-N author sets are always contained in larger ones.
    #[test]
    fn top_n_author_sets_nest(corpus in small_corpus()) {
        let total = corpus.author_count();
        for n in 1..total {
            let smaller: BTreeSet<String> =
                corpus.top_n_authors(n).unwrap().authors().map(str::to_string).collect();
            let larger: BTreeSet<String> =
                corpus.top_n_authors(n + 1).unwrap().authors().map(str::to_string).collect();
            prop_assert_eq!(smaller.len(), n);
            prop_assert!(smaller.is_subset(&larger), "top-{n} not inside top-{}", n + 1);
        }
    }

    /// A successful stratified split partitions the corpus: nothing lost,
    /// nothing duplicated, every author keeps at least one training
    /// document, and the same seed reproduces the same split.
    #[test]
    fn stratified_split_partitions_the_corpus(
        corpus in splittable_corpus(),
        test_fraction in 0.05f64..0.3,
        dev_fraction in 0.0f64..0.3,
        seed in 0u64..1000,
    ) {
        let spec = SplitSpec { test_fraction, dev_fraction, seed };
        let (train, dev, test) = corpus.stratified_split(&spec).unwrap();

        let mut recombined = doc_multiset(&train);
        recombined.extend(doc_multiset(&dev));
        recombined.extend(doc_multiset(&test));
        recombined.sort();
        prop_assert_eq!(recombined, doc_multiset(&corpus));

        for author in corpus.authors() {
            prop_assert!(
                !train.docs_of(author).is_empty(),
                "author {author} lost every training document"
            );
        }

        let (train2, dev2, test2) = corpus.stratified_split(&spec).unwrap();
        prop_assert_eq!(doc_multiset(&train), doc_multiset(&train2));
        prop_assert_eq!(doc_multiset(&dev), doc_multiset(&dev2));
        prop_assert_eq!(doc_multiset(&test), doc_multiset(&test2));
    }
}

// ---------------------------------------------------------------------------
// Encodings
// ---------------------------------------------------------------------------

proptest! {
    /// Encodings have exactly the capped length, ids stay inside their
    /// tables, and a smaller cap yields a strict prefix of a larger cap.
    #[test]
    fn encoding_respects_caps_and_prefixes(
        text in ascii_text(),
        small_cap in 1usize..8,
        extra in 1usize..24,
    ) {
        let alphabet = Alphabet::default_98();
        let vocab = Vocabulary::fit(
            [&["the".to_string(), "a".to_string()][..]].into_iter(),
            10,
        ).unwrap();
        let large_cap = small_cap + extra;
        let short = encode_text(&text, Some(&vocab), &alphabet, small_cap, small_cap);
        let long = encode_text(&text, Some(&vocab), &alphabet, large_cap, large_cap);

        for enc in [&short, &long] {
            prop_assert!(enc.true_word_len <= enc.word_ids.len());
            prop_assert!(enc.true_char_len <= enc.char_ids.len());
            prop_assert!(enc.word_ids.iter().all(|&id| id < vocab.len() + WORD_OFFSET));
            prop_assert!(enc.char_ids.iter().all(|&id| id < alphabet.size()));
            // Positions past the true length are padding.
            prop_assert!(enc.word_ids[enc.true_word_len..].iter().all(|&id| id == 0));
            prop_assert!(enc.char_ids[enc.true_char_len..].iter().all(|&id| id == ALPHABET_PAD));
        }
        prop_assert_eq!(short.word_ids.len(), small_cap);
        prop_assert_eq!(short.char_ids.len(), small_cap);
        prop_assert_eq!(long.word_ids.len(), large_cap);
        prop_assert_eq!(&long.word_ids[..small_cap], &short.word_ids[..]);
        prop_assert_eq!(&long.char_ids[..small_cap], &short.char_ids[..]);
    }
}

// ---------------------------------------------------------------------------
// Network building blocks
// ---------------------------------------------------------------------------

proptest! {
    /// Max-over-time pooling returns the maximum value regardless of order,
    /// and its argmax really points at that value.
    #[test]
    fn pooling_max_is_permutation_invariant(
        values in prop::collection::vec(-100.0f64..100.0, 1..50),
        seed in 0u64..1000,
    ) {
        let (max, at) = max_over_time(&values).unwrap();
        prop_assert_eq!(max, values[at]);
        prop_assert!(values.iter().all(|&v| v <= max));

        let mut shuffled = values.clone();
        XorShift64::new(seed).shuffle(&mut shuffled);
        let (max2, at2) = max_over_time(&shuffled).unwrap();
        prop_assert_eq!(max, max2);
        prop_assert_eq!(shuffled[at2], max2);
    }

    /// Softmax yields a probability distribution, is shift-invariant, and
    /// preserves the ordering of the logits.
    #[test]
    fn softmax_is_a_shift_invariant_distribution(
        logits in prop::collection::vec(-30.0f64..30.0, 1..8),
        shift in -10.0f64..10.0,
    ) {
        let p = softmax(&logits);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(p.iter().all(|&x| x > 0.0 && x <= 1.0));

        let shifted: Vec<f64> = logits.iter().map(|x| x + shift).collect();
        let q = softmax(&shifted);
        for (a, b) in p.iter().zip(&q) {
            prop_assert!((a - b).abs() <= 1e-12, "shift changed softmax: {a} vs {b}");
        }
        for i in 0..logits.len() {
            for j in 0..logits.len() {
                if logits[i] > logits[j] {
                    prop_assert!(p[i] > p[j], "ordering not preserved");
                }
            }
        }
    }

    /// Convolving two channels with a shared filter equals convolving their
    /// elementwise sum as a single channel.
    #[test]
    fn convolution_is_additive_across_channels(
        n in 3usize..12,
        k in 1usize..5,
        h in 1usize..4,
        seed in 0u64..1000,
    ) {
        prop_assume!(h <= n);
        let mut rng = XorShift64::new(seed + 1);
        let a = Tensor::uniform(n, k, -1.0, 1.0, &mut rng);
        let b = Tensor::uniform(n, k, -1.0, 1.0, &mut rng);
        let mut summed = Tensor::zeros(n, k);
        for r in 0..n {
            for c in 0..k {
                summed.set(r, c, a.row(r)[c] + b.row(r)[c]);
            }
        }
        let filter = ConvFilter::new(Tensor::uniform(h, k, -1.0, 1.0, &mut rng), 0.25);
        let two = conv_forward(&[&a, &b], &filter).unwrap();
        let one = conv_forward(&[&summed], &filter).unwrap();
        prop_assert_eq!(two.len(), one.len());
        for (x, y) in two.values.iter().zip(&one.values) {
            prop_assert!((x - y).abs() <= 1e-9, "channel sum diverged: {x} vs {y}");
        }
    }
}

// ---------------------------------------------------------------------------
// Classical attributors
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Each author's profile is a function of that author's documents
    /// alone: training on the author's slice of the corpus reproduces the
    /// profile from the full corpus exactly.
    #[test]
    fn profiles_are_per_author_functions(
        corpus in small_corpus(),
        ngram_size in 1usize..4,
        profile_size in 1usize..12,
    ) {
        let full = ScapModel::train(&corpus, ngram_size, profile_size).unwrap();
        for author in corpus.authors() {
            let slice = Corpus::from_documents(
                corpus
                    .documents()
                    .iter()
                    .filter(|d| d.author_id == author)
                    .cloned()
                    .collect(),
            );
            let solo = ScapModel::train(&slice, ngram_size, profile_size).unwrap();
            prop_assert_eq!(
                solo.profile(author).unwrap(),
                full.profile(author).unwrap(),
                "profile of {} depends on other authors' documents",
                author
            );
        }
    }

    /// With the full feature set drawn every round, the subset-vote
    /// classifier collapses to a single deterministic cosine vote: the score
    /// is 1.0 and the winner is the plain cosine argmax over the whole
    /// vocabulary (ties to the lexicographically smaller author).
    #[test]
    fn full_fraction_voting_equals_direct_cosine(
        corpus in small_corpus(),
        doc_pick in 0usize..12,
        iterations in 1usize..6,
    ) {
        let config = ImpostersConfig {
            ngram_size: 2,
            vocab_size: 400,
            iterations,
            feature_fraction: 1.0,
            seed: 77,
        };
        let model = match ImpostersModel::train(&corpus, &config) {
            Ok(model) => model,
            Err(atrb_core::Error::EmptyVocabulary) => {
                // Legitimate when no document has a single space-free bigram.
                return Ok(());
            }
            Err(other) => return Err(TestCaseError::fail(format!("train failed: {other}"))),
        };
        let probe = &corpus.documents()[doc_pick % corpus.len()].text;

        let counts = char_ngrams(probe, config.ngram_size, true);
        let probe_vec: Vec<f64> = model
            .vocab()
            .iter()
            .map(|g| counts.get(g).copied().unwrap_or(0) as f64)
            .collect();
        let probe_norm: f64 = probe_vec.iter().map(|x| x * x).sum::<f64>().sqrt();
        if probe_norm == 0.0 {
            // A document with no mass on the vocabulary (every bigram spans
            // a space) must starve rather than guess.
            prop_assert!(matches!(
                model.predict(probe),
                Err(atrb_core::Error::FeatureStarvation)
            ));
            return Ok(());
        }
        let prediction = model.predict(probe).unwrap();
        prop_assert_eq!(prediction.score, 1.0);
        let mut best: Option<(&str, f64)> = None;
        for author in model.authors() {
            let profile = model.profile(author).unwrap();
            let dot: f64 = profile.iter().zip(&probe_vec).map(|(a, b)| a * b).sum();
            let norm: f64 = profile.iter().map(|x| x * x).sum::<f64>().sqrt();
            let cosine = if norm == 0.0 { 0.0 } else { dot / (norm * probe_norm) };
            if best.map_or(true, |(_, s)| cosine > s) {
                best = Some((author, cosine));
            }
        }
        prop_assert_eq!(prediction.author, best.unwrap().0);
    }

    /// Every trained profile holds at most `profile_size` n-grams, all of
    /// length `ngram_size`, and every prediction score stays in [0, 1].
    #[test]
    fn profiles_and_scores_stay_bounded(
        corpus in small_corpus(),
        ngram_size in 1usize..4,
        profile_size in 1usize..8,
        probe in "[a-z ]{0,12}",
    ) {
        let model = ScapModel::train(&corpus, ngram_size, profile_size).unwrap();
        let authors: HashSet<&str> = model.authors().collect();
        for author in &authors {
            let profile = model.profile(author).unwrap();
            prop_assert!(profile.len() <= profile_size);
            prop_assert!(profile.iter().all(|g| g.chars().count() == ngram_size));
        }
        if !probe.is_empty() {
            let p = model.predict(&probe).unwrap();
            prop_assert!((0.0..=1.0).contains(&p.score));
            prop_assert!(authors.contains(p.author.as_str()));
        }
    }
}
