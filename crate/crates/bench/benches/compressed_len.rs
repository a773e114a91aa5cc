use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use ncd_core::{BackendKind, CompressorBackend};
use rand::{Rng, SeedableRng};

fn natural_text(len: usize) -> Vec<u8> {
    // Word-shaped filler with a zipf-ish repetition profile; closer to
    // news text than uniform random bytes.
    let words = [
        "the", "market", "team", "report", "season", "company", "game", "price", "world",
        "government", "new", "first", "said", "after", "over",
    ];
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(1234);
    let mut out = Vec::with_capacity(len + 16);
    while out.len() < len {
        let w = words[rng.gen_range(0..words.len())];
        out.extend_from_slice(w.as_bytes());
        out.push(b' ');
    }
    out.truncate(len);
    out
}

fn bench_backends(c: &mut Criterion) {
    let payload = natural_text(4096);
    let mut group = c.benchmark_group("compressed_len_4k");
    group.throughput(Throughput::Bytes(payload.len() as u64));
    for kind in [
        BackendKind::Gzip,
        BackendKind::Bz2,
        BackendKind::Lzma,
        BackendKind::Zstd,
        BackendKind::Identity,
    ] {
        let backend = CompressorBackend::with_default_level(kind);
        group.bench_with_input(BenchmarkId::from_parameter(kind), &backend, |b, backend| {
            b.iter(|| backend.compressed_len(black_box(&payload)).unwrap())
        });
    }
    group.finish();
}

fn bench_payload_sizes(c: &mut Criterion) {
    let backend = CompressorBackend::with_default_level(BackendKind::Gzip);
    let mut group = c.benchmark_group("gzip_by_size");
    for size in [256usize, 1024, 4096, 16384] {
        let payload = natural_text(size);
        group.throughput(Throughput::Bytes(size as u64));
        group.bench_with_input(BenchmarkId::from_parameter(size), &payload, |b, payload| {
            b.iter(|| backend.compressed_len(black_box(payload)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_backends, bench_payload_sizes);
criterion_main!(benches);
