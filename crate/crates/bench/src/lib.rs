//! Shared fixtures for the kernel benchmarks.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use skysim_core::paths::{DropState, Environment};
use skysim_core::rng::StreamFactory;
use skysim_core::ScenarioConfig;

/// `m x n` i.i.d. CN(0, 1) channel, `m` AVs by `n` BSs.
pub fn gaussian_channel(m: usize, n: usize, seed: u64) -> DMatrix<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(m, n, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Default environment with one sampled drop.
pub fn default_drop(seed: u64) -> (Environment, DropState, StreamFactory) {
    let env = Environment::new(&ScenarioConfig::default());
    let streams = StreamFactory::new(seed);
    let state = DropState::sample(&env, &mut streams.outer(0));
    (env, state, streams)
}
