use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use relaysim::sweep::{evaluate_operating_points, Directions};
use relaysim::{OperatingPoint, Parallelism, ScenarioKind, SimConfig};

fn backends() -> Vec<(&'static str, Parallelism)> {
    let seq = ("sequential", Parallelism::Sequential);
    #[cfg(feature = "parallel")]
    return vec![seq, ("rayon", Parallelism::Rayon)];
    #[cfg(not(feature = "parallel"))]
    vec![seq]
}

fn drops(c: &mut Criterion) {
    let mut cfg = SimConfig::new(ScenarioKind::Urban, 4);
    cfg.scenario.n_drops = 8;
    let ops: Vec<OperatingPoint> = [(0.0, 0.0), (8.0, 2.0), (16.0, 4.0)]
        .iter()
        .map(|&(x, y)| OperatingPoint::new(x, y).unwrap())
        .collect();
    let mut g = c.benchmark_group("urban_rn4_8_drops_3_ops");
    g.sample_size(10);
    for (name, par) in backends() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &par, |b, &par| {
            b.iter(|| {
                evaluate_operating_points(&cfg, &ops, &cfg.power_control, Directions::BOTH, par)
                    .unwrap()
            })
        });
    }
    g.finish();
}

criterion_group!(benches, drops);
criterion_main!(benches);
