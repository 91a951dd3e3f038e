use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use noiselab::boolfourier::{walsh_transform, BooleanFunction};
use noiselab::matcore::{haar_orthonormal_rows, permanent_ryser, ComplexMatrix, RandomSource};
use noiselab::nisqsim::{random_circuit, run_circuit_density, run_circuit_trajectories, NoiseModel};
use noiselab::noisybs::{noisy_boson_distribution, NoiseRate};
use noiselab::par::{self, Mode};

const MODES: [(&str, Mode); 2] = [("sequential", Mode::Sequential), ("parallel", Mode::Parallel)];

fn bench_modes(c: &mut Criterion, group: &str, mut f: impl FnMut()) {
    let mut g = c.benchmark_group(group);
    g.sample_size(10);
    for (label, mode) in MODES {
        par::set_mode(mode);
        g.bench_function(BenchmarkId::from_parameter(label), |b| b.iter(&mut f));
    }
    g.finish();
    par::set_mode(Mode::Parallel);
}

fn permanent(c: &mut Criterion) {
    let mut rng = RandomSource::new(1);
    let m = ComplexMatrix::from_fn(20, 20, |_, _| rng.complex_normal(1.0));
    bench_modes(c, "ryser_n20", || {
        black_box(permanent_ryser(black_box(&m)).unwrap());
    });
}

fn noisy_boson(c: &mut Criterion) {
    let a = haar_orthonormal_rows(4, 16, &mut RandomSource::new(2)).unwrap();
    let t = NoiseRate::new(0.3).unwrap();
    bench_modes(c, "noisy_boson_n4_m16_2000", || {
        black_box(noisy_boson_distribution(&a, t, 2000, &mut RandomSource::new(3)).unwrap());
    });
}

fn walsh(c: &mut Criterion) {
    let mut rng = RandomSource::new(4);
    let f = BooleanFunction::new(20, (0..1 << 20).map(|_| rng.normal()).collect()).unwrap();
    bench_modes(c, "walsh_n20", || {
        black_box(walsh_transform(black_box(&f)));
    });
}

fn density(c: &mut Criterion) {
    let circuit = random_circuit(9, 6, &mut RandomSource::new(5)).unwrap();
    let nm = NoiseModel::new(0.02, 0.02).unwrap();
    bench_modes(c, "density_n9_depth6", || {
        black_box(run_circuit_density(&circuit, &nm).unwrap());
    });
}

fn trajectories(c: &mut Criterion) {
    let circuit = random_circuit(10, 6, &mut RandomSource::new(6)).unwrap();
    let nm = NoiseModel::new(0.02, 0.02).unwrap();
    bench_modes(c, "trajectories_n10_depth6_2000", || {
        black_box(run_circuit_trajectories(&circuit, &nm, 2000, &mut RandomSource::new(7)).unwrap());
    });
}

criterion_group!(benches, permanent, noisy_boson, walsh, density, trajectories);
criterion_main!(benches);
