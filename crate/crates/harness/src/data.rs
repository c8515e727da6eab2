use std::fs;
use std::path::Path;

use mces_core::models::{EightSchoolsModel, LgcpParams, LogisticRegressionModel};
use mces_core::{chain_rng, linalg};
use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{HarnessError, Result};

/// The classic eight-schools coaching data.
pub const EIGHT_SCHOOLS: &str = include_str!("../data/eight_schools.csv");

/// Synthetic stand-in for the numeric German credit table (same 1000 x 25 layout).
pub const GERMAN_STANDIN: &str = include_str!("../data/german_standin.data-numeric");

pub const GERMAN_ROWS: usize = 1000;
pub const GERMAN_COLUMNS: usize = 25;

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))
}

/// Bundled data when `path` is empty, else the named file.
pub fn eight_schools(path: &str) -> Result<EightSchoolsModel> {
    let text = if path.is_empty() {
        EIGHT_SCHOOLS.to_string()
    } else {
        read_text(Path::new(path))?
    };
    EightSchoolsModel::parse(&text).map_err(|e| HarnessError::Data(format!("eight schools data: {e}")))
}

/// Parses the whitespace-separated numeric German credit table: 24 attributes then a label
/// (1 = good, 2 = bad). Attributes are standardized; bad credit becomes label 1.
pub fn parse_german_credit(text: &str) -> Result<LogisticRegressionModel> {
    let rows: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    if rows.len() != GERMAN_ROWS {
        return Err(HarnessError::Data(format!(
            "german credit: expected {GERMAN_ROWS} rows, found {}",
            rows.len()
        )));
    }
    let mut features = DMatrix::zeros(GERMAN_ROWS, GERMAN_COLUMNS - 1);
    let mut labels = DVector::zeros(GERMAN_ROWS);
    for (i, row) in rows.iter().enumerate() {
        let values = row
            .split_whitespace()
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| HarnessError::Data(format!("german credit row {}: {e}", i + 1)))?;
        if values.len() != GERMAN_COLUMNS {
            return Err(HarnessError::Data(format!(
                "german credit row {}: expected {GERMAN_COLUMNS} columns, found {}",
                i + 1,
                values.len()
            )));
        }
        for j in 0..GERMAN_COLUMNS - 1 {
            features[(i, j)] = values[j];
        }
        labels[i] = match values[GERMAN_COLUMNS - 1] {
            1.0 => 0.0,
            2.0 => 1.0,
            other => {
                return Err(HarnessError::Data(format!(
                    "german credit row {}: label must be 1 or 2, found {other}",
                    i + 1
                )))
            }
        };
    }
    LogisticRegressionModel::standardized(&features, labels).map_err(|e| HarnessError::Data(format!("german credit: {e}")))
}

pub fn german_credit(path: &str) -> Result<LogisticRegressionModel> {
    if path.is_empty() {
        parse_german_credit(GERMAN_STANDIN)
    } else {
        parse_german_credit(&read_text(Path::new(path))?)
    }
}

/// A synthetic LGCP data set: the latent field, the intensity `s·exp(X)` and the counts.
#[derive(Debug, Clone, PartialEq)]
pub struct LgcpData {
    pub params: LgcpParams,
    pub latent: DVector<f64>,
    pub intensity: DVector<f64>,
    pub counts: DVector<f64>,
}

/// Draws `X ~ N(mu, K)` through the Cholesky factor of the prior covariance, then
/// `Y_ij ~ Poisson(s·exp(X_ij))`.
pub fn generate_lgcp_data(params: &LgcpParams, seed: u64) -> Result<LgcpData> {
    params.validate()?;
    let factor = linalg::cholesky(&params.prior_covariance(), "LGCP prior covariance")?;
    let mut rng = chain_rng(seed, 0);
    let n = params.cells();
    let z = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
    let latent = factor.l() * z + DVector::from_element(n, params.mu);
    let intensity = latent.map(|x| params.s * x.exp());
    let mut counts = DVector::zeros(n);
    for (c, &rate) in counts.iter_mut().zip(intensity.iter()) {
        *c = if rate > 0.0 {
            Poisson::new(rate)
                .map_err(|e| HarnessError::Numerical(format!("Poisson rate {rate}: {e}")))?
                .sample(&mut rng)
        } else {
            0.0
        };
    }
    Ok(LgcpData {
        params: *params,
        latent,
        intensity,
        counts,
    })
}

/// `d` lines of `d` comma-separated values, row-major.
pub fn grid_to_csv(values: &DVector<f64>, d: usize) -> String {
    let mut out = String::new();
    for i in 0..d {
        let row: Vec<String> = (0..d).map(|j| format!("{:.16e}", values[i * d + j])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Count grids are written as integers.
pub fn counts_to_csv(counts: &DVector<f64>, d: usize) -> String {
    let mut out = String::new();
    for i in 0..d {
        let row: Vec<String> = (0..d).map(|j| format!("{}", counts[i * d + j] as u64)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Reads a square grid; returns the row-major values and the side length.
pub fn grid_from_csv(text: &str) -> Result<(DVector<f64>, usize)> {
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            l.split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| HarnessError::Data(format!("grid row {}: {e}", i + 1)))
        })
        .collect::<Result<_>>()?;
    let d = rows.len();
    if d == 0 || rows.iter().any(|r| r.len() != d) {
        return Err(HarnessError::Data(format!("grid must be square; found {d} rows of lengths {:?}", rows.iter().map(Vec::len).collect::<Vec<_>>())));
    }
    Ok((DVector::from_iterator(d * d, rows.into_iter().flatten()), d))
}
