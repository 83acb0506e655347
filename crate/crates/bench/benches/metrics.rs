use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use fscad_bench::random_cloud;
use fscad_core::metrics::{chamfer, classify_edge_points, nearest_brute, EdgeParams, KdTree};

fn kd_tree(c: &mut Criterion) {
    let mut g = c.benchmark_group("nearest neighbor");
    for n in [1_000usize, 10_000] {
        let target = random_cloud(n, 1);
        let queries = random_cloud(256, 2);
        let tree = KdTree::new(&target.points);
        g.bench_with_input(BenchmarkId::new("kd-tree", n), &n, |b, _| {
            b.iter(|| queries.points.iter().map(|&q| tree.nearest(q).unwrap().0).sum::<usize>())
        });
        g.bench_with_input(BenchmarkId::new("brute force", n), &n, |b, _| {
            b.iter(|| queries.points.iter().map(|&q| nearest_brute(&target.points, q).unwrap().0).sum::<usize>())
        });
    }
    g.finish();
}

fn cloud_metrics(c: &mut Criterion) {
    let x = random_cloud(20_000, 3);
    let y = random_cloud(20_000, 4);
    c.bench_function("chamfer 20k x 20k", |b| b.iter(|| black_box(chamfer(&x, &y))));
    c.bench_function("edge classification 20k", |b| {
        b.iter(|| black_box(classify_edge_points(&x, &EdgeParams::default()).len()))
    });
}

criterion_group!(benches, kd_tree, cloud_metrics);
criterion_main!(benches);
