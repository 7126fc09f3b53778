use criterion::{criterion_group, criterion_main, Criterion};

use atrb_bench::{char_corpus, word_corpus};
use atrb_core::classical::ScapModel;
use atrb_core::eval::micro_f1;
use atrb_core::features::{stemmed_counts, Alphabet, Tokenizer, Vocabulary};
use atrb_core::nnet::{build_variant, conv_forward, ConvFilter, ModelConfig, Tensor, Variant};
use atrb_core::rng::XorShift64;

fn bench_conv_forward(c: &mut Criterion) {
    let mut rng = XorShift64::new(7);
    let input = Tensor::uniform(300, 64, -1.0, 1.0, &mut rng);
    let filter = ConvFilter {
        window: 7,
        weights: Tensor::uniform(7, 64, -0.05, 0.05, &mut rng),
        bias: 0.01,
    };
    c.bench_function("conv_forward 300x64 h7", |b| {
        b.iter(|| conv_forward(&[std::hint::black_box(&input)], &filter).unwrap())
    });
}

fn bench_cnn_predict(c: &mut Criterion) {
    let corpus = word_corpus(4, 6);
    let tokenizer = Tokenizer::default();
    let token_lists: Vec<Vec<String>> =
        corpus.documents().iter().map(|d| tokenizer.tokenize(&d.text)).collect();
    let vocab = Vocabulary::fit(token_lists.iter().map(|t| t.as_slice()), 2_000).unwrap();
    let config = ModelConfig {
        embedding_dim: 32,
        filter_windows: vec![3, 4],
        maps_per_window: 8,
        word_len_cap: 128,
        ..ModelConfig::for_variant(Variant::Word)
    };
    let model = build_variant(
        &config,
        Some(vocab),
        Alphabet::default_98(),
        None,
        &corpus.authors().map(str::to_string).collect::<Vec<_>>(),
        3,
    )
    .unwrap();
    let text = corpus.documents()[0].text.clone();
    c.bench_function("cnn-word predict", |b| {
        b.iter(|| model.predict(std::hint::black_box(&text)).unwrap())
    });
}

fn bench_scap(c: &mut Criterion) {
    let corpus = char_corpus(5, 10);
    let model = ScapModel::train(&corpus, 3, 2_000).unwrap();
    let text = corpus.documents()[0].text.clone();
    c.bench_function("scap train 5x10", |b| {
        b.iter(|| ScapModel::train(std::hint::black_box(&corpus), 3, 2_000).unwrap())
    });
    c.bench_function("scap predict", |b| {
        b.iter(|| model.predict(std::hint::black_box(&text)).unwrap())
    });
}

fn bench_stemmed_counts(c: &mut Criterion) {
    let corpus = word_corpus(3, 4);
    let text = corpus
        .documents()
        .iter()
        .map(|d| d.text.as_str())
        .collect::<Vec<_>>()
        .join(" ");
    c.bench_function("tokenize+stem counts", |b| {
        b.iter(|| stemmed_counts(std::hint::black_box(&text)))
    });
}

fn bench_micro_f1(c: &mut Criterion) {
    let mut rng = XorShift64::new(11);
    let labels: Vec<String> = (0..10_000).map(|_| format!("a{}", rng.below(25))).collect();
    let preds: Vec<String> = (0..10_000).map(|_| format!("a{}", rng.below(25))).collect();
    c.bench_function("micro_f1 10k", |b| {
        b.iter(|| micro_f1(std::hint::black_box(&labels), std::hint::black_box(&preds)).unwrap())
    });
}

criterion_group!(
    benches,
    bench_conv_forward,
    bench_cnn_predict,
    bench_scap,
    bench_stemmed_counts,
    bench_micro_f1
);
criterion_main!(benches);
