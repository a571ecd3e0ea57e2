use criterion::{black_box, criterion_group, criterion_main, Criterion};

use padguard_core::messaging::{decode, encode};
use padguard_core::{BoundingBoxesDist, BoxDist};

fn message(n: usize) -> BoundingBoxesDist {
    BoundingBoxesDist {
        seq: 42,
        stamp: 12.345,
        boxes: (0..n)
            .map(|i| BoxDist {
                cx: 0.1 + 0.05 * i as f64,
                cy: 0.4,
                w: 0.06,
                h: 0.12,
                confidence: 0.9,
                dist: 1.5 + i as f64 * 0.25,
            })
            .collect(),
    }
}

fn bench_codec(c: &mut Criterion) {
    let msg = message(4);
    let line = encode(&msg).unwrap();
    c.bench_function("encode_4_boxes", |b| {
        b.iter(|| encode(black_box(&msg)).unwrap())
    });
    c.bench_function("decode_4_boxes", |b| {
        b.iter(|| decode(black_box(&line)).unwrap())
    });
}

criterion_group!(benches, bench_codec);
criterion_main!(benches);
