//! Small noisy circuits under depolarizing noise: exact density-matrix
//! evolution, pure-state trajectories with event logs, and the output
//! statistics built on them.

mod circuit;
mod density;
mod experiments;
mod kernel;
mod statevector;
mod trajectory;

pub use circuit::{
    cat_circuit, random_circuit, Circuit, Gate, GateKind, NoiseModel, ResolvedNoise, UNITARITY_TOLERANCE,
};
pub use density::{run_circuit_density, run_circuit_density_resolved, DensityMatrix, MAX_DENSITY_QUBITS};
pub use experiments::{
    bitflip_code_experiment, chaos_probe, ideal_vs_noisy_correlation, output_fourier_profile,
    three_bit_majority_failure, BitflipNoise, BitflipResult, ChaosProbe, FourierProfile,
};
pub use statevector::{StateVector, MAX_STATE_QUBITS};
pub use trajectory::{
    error_correlation, error_synchronization_stats, run_circuit_trajectories, run_trajectories_resolved,
    state_distribution, ErrorCorrelation, ErrorEvent, ErrorKind, PauliErrorRecord, SyncStats, TrajectoryRun,
};
