use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::network::ParamVector;
use super::spec::AnsatzSpec;

/// Xavier-uniform weights on `±sqrt(6/(fan_in+fan_out))`, zero biases.
/// Deterministic in `spec.seed`.
pub fn init_xavier(spec: &AnsatzSpec) -> ParamVector {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut q = vec![0.0; spec.n_params()];
    for l in spec.layout() {
        let bound = (6.0 / (l.fan_in + l.fan_out) as f64).sqrt();
        for w in &mut q[l.weights..l.biases] {
            *w = rng.random_range(-bound..bound);
        }
    }
    ParamVector(q)
}
