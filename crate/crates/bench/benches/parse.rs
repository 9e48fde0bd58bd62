use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use pwd_core::synth;
use pwd_core::{Grammar, MemoMode, NullabilityMode, ParserConfig};

type Tweak = fn(&mut ParserConfig);

fn grammar(text: &str, f: impl FnOnce(&mut ParserConfig)) -> Grammar {
    let mut cfg = ParserConfig::default();
    f(&mut cfg);
    Grammar::load_with(text, cfg).unwrap()
}

fn worst_case(c: &mut Criterion) {
    let mut group = c.benchmark_group("worst-case");
    group.sample_size(10);
    for n in [10usize, 20, 40] {
        let toks = synth::distinct_tokens(n);
        group.throughput(Throughput::Elements(n as u64));
        let mut g = grammar(synth::WORST_CASE, |_| {});
        group.bench_with_input(BenchmarkId::from_parameter(n), &toks, |b, t| {
            b.iter(|| g.recognize(t))
        });
    }
    group.finish();
}

fn arithmetic(c: &mut Criterion) {
    let mut group = c.benchmark_group("arithmetic");
    for n in [200usize, 2000] {
        let toks = synth::arithmetic_tokens(n, 1);
        group.throughput(Throughput::Elements(toks.len() as u64));
        let mut g = grammar(synth::ARITHMETIC, |_| {});
        group.bench_with_input(BenchmarkId::from_parameter(n), &toks, |b, t| {
            b.iter(|| g.parse_set(t))
        });
    }
    group.finish();
}

fn variants(c: &mut Criterion) {
    let mut group = c.benchmark_group("variants");
    group.sample_size(20);
    let toks = synth::distinct_tokens(20);
    let configs: [(&str, Tweak); 4] = [
        ("default", |_| {}),
        ("full-memo", |c| c.memo = MemoMode::FullMap),
        ("naive-nullability", |c| c.nullability = NullabilityMode::Naive),
        ("no-compaction", |c| c.compaction = false),
    ];
    for (name, f) in configs {
        let mut g = grammar(synth::WORST_CASE, f);
        group.bench_function(name, |b| b.iter(|| g.parse_set(&toks)));
    }
    group.finish();
}

criterion_group!(benches, worst_case, arithmetic, variants);
criterion_main!(benches);
