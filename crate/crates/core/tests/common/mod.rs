#![allow(dead_code)]

use mces_core::models::{EightSchoolsModel, LgcpModel, LgcpParams, LogisticRegressionModel};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_vector<R: Rng>(n: usize, scale: f64, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(n, |_, _| {
        let z: f64 = StandardNormal.sample(rng);
        scale * z
    })
}

pub fn eight_schools() -> EightSchoolsModel {
    EightSchoolsModel::new(
        [28.0, 8.0, -3.0, 7.0, -1.0, 1.0, 18.0, 12.0],
        [15.0, 10.0, 16.0, 11.0, 9.0, 11.0, 10.0, 18.0],
    )
    .unwrap()
}

/// 40 rows, 4 raw features, labels from a fixed logistic rule with noise.
pub fn toy_logistic(seed: u64) -> LogisticRegressionModel {
    let mut r = rng(seed);
    let features = DMatrix::from_fn(40, 4, |_, j| {
        let z: f64 = StandardNormal.sample(&mut r);
        (j as f64 + 1.0) * z + j as f64
    });
    let labels = DVector::from_fn(40, |i, _| {
        let z: f64 = features[(i, 0)] - 0.5 * features[(i, 2)];
        (r.random::<f64>() < 1.0 / (1.0 + (-z).exp())) as u8 as f64
    });
    LogisticRegressionModel::standardized(&features, labels).unwrap()
}

pub fn toy_lgcp(d: usize, seed: u64) -> LgcpModel {
    let mut r = rng(seed);
    let params = LgcpParams::reference(d);
    let counts = DVector::from_fn(d * d, |_, _| r.random_range(0..4) as f64);
    LgcpModel::new(params, counts).unwrap()
}
