//! Sequential and parallel execution give bit-identical results.

use noiselab::boolfourier::{empirical_stability, make_majority};
use noiselab::matcore::{haar_orthonormal_rows, permanent_ryser, ComplexMatrix, RandomSource};
use noiselab::nisqsim::{random_circuit, run_circuit_density, run_circuit_trajectories, NoiseModel};
use noiselab::noisybs::{noisy_boson_distribution, NoiseRate};
use noiselab::par::{self, Mode};

#[test]
fn modes_agree_bit_for_bit() {
    let run = || {
        let mut rng = RandomSource::new(21);
        let m = ComplexMatrix::from_fn(17, 17, |_, _| rng.complex_normal(1.0));
        let per = permanent_ryser(&m).unwrap();

        let a = haar_orthonormal_rows(3, 6, &mut rng).unwrap();
        let noisy = noisy_boson_distribution(&a, NoiseRate::new(0.3).unwrap(), 500, &mut rng).unwrap();

        let (stab, _) = empirical_stability(&make_majority(5).unwrap(), 0.4, 50_000, &mut rng).unwrap();

        let c = random_circuit(8, 3, &mut rng).unwrap();
        let nm = NoiseModel::new(0.02, 0.02).unwrap();
        let (rho, _) = run_circuit_density(&c, &nm).unwrap();
        let traj = run_circuit_trajectories(&c, &nm, 600, &mut rng).unwrap();
        (
            per,
            noisy.dist.probs().to_vec(),
            noisy.std_err,
            stab,
            rho.entry(3, 5),
            traj.counts,
            traj.born_average.probs().to_vec(),
        )
    };
    par::set_mode(Mode::Sequential);
    let seq = run();
    par::set_mode(Mode::Parallel);
    // several workers even on a single-core host
    let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let parallel = pool.install(run);
    assert_eq!(seq, parallel);
}
