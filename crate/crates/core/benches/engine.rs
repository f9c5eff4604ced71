use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use seshadri::envelope::plot_envelope;
use seshadri::quad::rat;
use seshadri::{Engine, ExecMode, LatticeClass, Surface};

fn engine(entries: &[&[i64]], mode: ExecMode) -> Engine {
    let s = Surface::from_entries(entries.iter().map(|r| r.to_vec()).collect()).unwrap();
    Engine::new(s.with_exec(mode)).with_verification(false)
}

type Case = (&'static str, &'static [&'static [i64]], &'static [i64]);

const MODES: [(&str, ExecMode); 2] = [("sequential", ExecMode::Sequential), ("parallel", ExecMode::Parallel)];

fn constant(c: &mut Criterion) {
    let mut group = c.benchmark_group("seshadri_constant");
    let cases: [Case; 2] = [
        ("rho2", &[&[2, 3], &[3, 0]], &[7, 5]),
        ("rho3", &[&[2, 1, 0], &[1, -2, 0], &[0, 0, -4]], &[5, 1, 1]),
    ];
    for (name, m, l) in cases {
        let l = LatticeClass::new(l.to_vec());
        for (mode_name, mode) in MODES {
            let e = engine(m, mode);
            group.bench_with_input(BenchmarkId::new(name, mode_name), &l, |b, l| b.iter(|| e.seshadri_constant(l).unwrap()));
        }
    }
    group.finish();
}

fn envelope(c: &mut Criterion) {
    let mut group = c.benchmark_group("envelope");
    group.sample_size(10);
    for (mode_name, mode) in MODES {
        let e = engine(&[&[0, 5], &[5, 0]], mode);
        group.bench_function(BenchmarkId::new("n5", mode_name), |b| b.iter(|| plot_envelope(&e, &rat(1, 100)).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, constant, envelope);
criterion_main!(benches);
