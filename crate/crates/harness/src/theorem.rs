use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use mces_core::chain_rng;
use mces_core::gaussian_theory::{argmax_time_on_grid, conditional_covariance, random_commuting_pair};
use mces_core::MassMatrix;

use crate::error::Result;

/// One random instance of the optimality check.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoremCase {
    pub dim: usize,
    pub argmax_time: f64,
    /// Distance from pi/2 in grid cells.
    pub cells_from_optimum: f64,
    /// Largest entrywise gap between the conditional covariance at `M = Sigma⁻¹, T = pi/2`
    /// and `Sigma`.
    pub covariance_error: f64,
}

impl TheoremCase {
    pub fn passes(&self) -> bool {
        self.cells_from_optimum <= 1.0 && self.covariance_error <= 1e-8
    }
}

/// Draws `pairs` random commuting pairs of size `dim` (cycling through 1..=5 when `dim` is
/// `None`), sets `M = Sigma⁻¹`, and locates the best time on a `grid`-point grid over `(0, pi]`.
pub fn verify(dim: Option<usize>, grid: usize, pairs: usize, seed: u64) -> Result<Vec<TheoremCase>> {
    let mut rng = chain_rng(seed, 0);
    let cell = PI / grid as f64;
    (0..pairs)
        .map(|k| {
            let n = dim.unwrap_or(1 + k % 5);
            let (target, _) = random_commuting_pair(n, &mut rng)?;
            let mass = MassMatrix::new(target.precision().clone())?;
            let (t, _) = argmax_time_on_grid(&target, &mass, PI, grid)?;
            let c = conditional_covariance(&target, &mass, FRAC_PI_2)?;
            Ok(TheoremCase {
                dim: n,
                argmax_time: t,
                cells_from_optimum: (t - FRAC_PI_2).abs() / cell,
                covariance_error: (c - target.covariance()).amax(),
            })
        })
        .collect()
}

pub fn cases_to_csv(cases: &[TheoremCase]) -> String {
    let mut out = String::from("pair,dim,argmax_T,cells_from_optimum,covariance_error,pass\n");
    for (k, c) in cases.iter().enumerate() {
        let _ = writeln!(
            out,
            "{k},{},{:.16e},{:.16e},{:.16e},{}",
            c.dim,
            c.argmax_time,
            c.cells_from_optimum,
            c.covariance_error,
            c.passes() as u8
        );
    }
    out
}
