//! Shared fixtures for the criterion benchmarks.

use qreverse::engine::worker_rng;
use qreverse::observables::magnetization;
use qreverse::random::random_real_symmetric;
use qreverse::{MeasurementSchedule, ObservableDecomposition};

/// `steps` equally spaced `m_z` measurements on `sites` spins under a seeded
/// real symmetric Hamiltonian, starting from `I/d`.
pub fn magnetization_schedule(sites: usize, steps: usize, seed: u64) -> MeasurementSchedule {
    let m = magnetization(sites).expect("sites within cap");
    let obs = ObservableDecomposition::with_default_tol(&m).expect("diagonal observable");
    let h = random_real_symmetric(m.dim(), &mut worker_rng(seed, 0));
    MeasurementSchedule::equally_spaced(h, obs, steps, 1.0).expect("valid schedule")
}
