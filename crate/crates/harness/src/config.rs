use std::fmt::Write as _;
use std::str::FromStr;

use mces_core::MCESConfig;

use crate::error::{HarnessError, Result};

/// The benchmark experiments the runner knows about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Gauss1d,
    Rosenbrock,
    EightSchools,
    GermanCredit,
    Lgcp,
    Robustness,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Gauss1d,
        Experiment::Rosenbrock,
        Experiment::EightSchools,
        Experiment::GermanCredit,
        Experiment::Lgcp,
        Experiment::Robustness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Gauss1d => "gauss1d",
            Experiment::Rosenbrock => "rosenbrock",
            Experiment::EightSchools => "eight_schools",
            Experiment::GermanCredit => "german_credit",
            Experiment::Lgcp => "lgcp",
            Experiment::Robustness => "robustness",
        }
    }
}

impl FromStr for Experiment {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
                HarnessError::Usage(format!("unknown experiment {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

/// Everything that determines one experiment's output.
///
/// Sampler keys use the algorithm's symbols (`Acc_min`, `N0`, `N_max`, ...); the rest are
/// experiment settings. `N_max` counts every draw including the warm start and the
/// `burn_in` prefix that diagnostics drop.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    pub mces: MCESConfig,
    pub replicates: usize,
    /// Worker threads for replicates; 0 uses every core.
    pub workers: usize,
    pub burn_in: usize,
    /// Rosenbrock curvature values.
    pub b: Vec<f64>,
    /// Gauss1d integration times as multiples of pi.
    pub times: Vec<f64>,
    /// LGCP grid side.
    pub d: usize,
    /// Seed of the synthetic LGCP field.
    pub data_seed: u64,
    /// Alternative data file (Eight Schools or German credit); empty uses the bundled copy.
    pub data: String,
    pub reference_samples: usize,
    pub reference_burn_in: usize,
    pub reference_steps: usize,
    pub reference_time: f64,
}

impl ExperimentSpec {
    /// Desk-scale defaults.
    pub fn new(experiment: Experiment) -> Self {
        let mut spec = ExperimentSpec {
            experiment,
            mces: MCESConfig::default(),
            replicates: 1,
            workers: 0,
            burn_in: 1000,
            b: Vec::new(),
            times: Vec::new(),
            d: 16,
            data_seed: 7,
            data: String::new(),
            reference_samples: 0,
            reference_burn_in: 0,
            reference_steps: 0,
            reference_time: 0.0,
        };
        match experiment {
            Experiment::Gauss1d => {
                spec.mces.n_max = 10_000;
                spec.burn_in = 0;
                spec.times = vec![0.45, 0.49, 0.5, 0.95, 0.99, 1.0];
            }
            Experiment::Rosenbrock => {
                spec.mces.n_max = 11_000;
                spec.replicates = 10;
                spec.b = (0..=14).map(|k| 0.05 * k as f64).collect();
            }
            Experiment::EightSchools | Experiment::Robustness => {
                spec.mces.n_max = 101_000;
            }
            Experiment::GermanCredit => {
                spec.mces.n_max = 11_000;
                spec.reference_samples = 20_000;
                spec.reference_burn_in = 1_000;
                spec.reference_steps = 20;
                spec.reference_time = 0.2;
            }
            Experiment::Lgcp => {
                spec.mces.n_max = 20_000;
                spec.burn_in = 2_000;
            }
        }
        spec
    }

    /// The full-size LGCP run: `d = 32`, `5.5e5` draws, `5e4` burn-in.
    pub fn paper_scale(mut self) -> Self {
        match self.experiment {
            Experiment::Lgcp => {
                self.d = 32;
                self.mces.n_max = 550_000;
                self.burn_in = 50_000;
            }
            Experiment::Rosenbrock => self.replicates = 100,
            _ => {}
        }
        self
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if MCESConfig::is_key(key) {
            return self.mces.set(key, value).map_err(HarnessError::from);
        }
        let bad = |what: &str| HarnessError::Data(format!("bad value {value:?} for {key}: expected {what}"));
        let count = || value.parse::<usize>().map_err(|_| bad("a non-negative integer"));
        let real = || value.parse::<f64>().map_err(|_| bad("a number"));
        let list = || {
            value
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| bad("a comma-separated list of numbers"))
        };
        match key {
            "experiment" => {
                if value != self.experiment.name() {
                    return Err(HarnessError::Data(format!(
                        "config is for experiment {value:?}, not {:?}",
                        self.experiment.name()
                    )));
                }
            }
            "replicates" => self.replicates = count()?,
            "workers" => self.workers = count()?,
            "burn_in" => self.burn_in = count()?,
            "b" => self.b = list()?,
            "times" => self.times = list()?,
            "d" => self.d = count()?,
            "data_seed" => self.data_seed = value.parse().map_err(|_| bad("an integer"))?,
            "data" => self.data = value.to_string(),
            "reference_samples" => self.reference_samples = count()?,
            "reference_burn_in" => self.reference_burn_in = count()?,
            "reference_L" => self.reference_steps = count()?,
            "reference_T" => self.reference_time = real()?,
            _ => return Err(HarnessError::Data(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines (`#` comments, blank lines ignored) on top of `self`.
    pub fn apply(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                HarnessError::Data(format!("config line {}: expected `key = value`, got {raw:?}", lineno + 1))
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let usage = |m: String| Err(HarnessError::Data(m));
        if self.replicates == 0 {
            return usage("replicates must be at least 1".into());
        }
        if self.experiment != Experiment::Gauss1d {
            self.mces.validate()?;
        }
        if self.burn_in >= self.mces.n_max {
            return usage(format!("burn_in {} leaves no samples out of N_max {}", self.burn_in, self.mces.n_max));
        }
        match self.experiment {
            Experiment::Gauss1d if self.times.is_empty() || self.times.iter().any(|t| !(*t > 0.0)) => {
                usage("times must be a non-empty list of positive multiples of pi".into())
            }
            Experiment::Rosenbrock if self.b.is_empty() || self.b.iter().any(|b| !(*b >= 0.0)) => {
                usage("b must be a non-empty list of non-negative values".into())
            }
            Experiment::Lgcp if self.d < 2 => usage("d must be at least 2".into()),
            Experiment::GermanCredit
                if self.reference_steps == 0
                    || !(self.reference_time > 0.0)
                    || self.reference_burn_in >= self.reference_samples =>
            {
                usage("reference sampler needs reference_L >= 1, reference_T > 0 and reference_samples > reference_burn_in".into())
            }
            _ => Ok(()),
        }
    }

    /// Every setting as `key = value` lines; feeding this back through [`apply`](Self::apply)
    /// reproduces the spec.
    pub fn to_snapshot(&self) -> String {
        let f = |v: f64| format!("{v:.16e}");
        let join = |v: &[f64]| v.iter().map(|x| f(*x)).collect::<Vec<_>>().join(",");
        let mut out = String::new();
        let _ = writeln!(out, "experiment = {}", self.experiment.name());
        out.push_str(&self.mces.to_snapshot());
        let _ = writeln!(out, "replicates = {}", self.replicates);
        let _ = writeln!(out, "workers = {}", self.workers);
        let _ = writeln!(out, "burn_in = {}", self.burn_in);
        match self.experiment {
            Experiment::Gauss1d => {
                let _ = writeln!(out, "times = {}", join(&self.times));
            }
            Experiment::Rosenbrock => {
                let _ = writeln!(out, "b = {}", join(&self.b));
            }
            Experiment::Lgcp => {
                let _ = writeln!(out, "d = {}", self.d);
                let _ = writeln!(out, "data_seed = {}", self.data_seed);
            }
            Experiment::GermanCredit => {
                let _ = writeln!(out, "data = {}", self.data);
                let _ = writeln!(out, "reference_samples = {}", self.reference_samples);
                let _ = writeln!(out, "reference_burn_in = {}", self.reference_burn_in);
                let _ = writeln!(out, "reference_L = {}", self.reference_steps);
                let _ = writeln!(out, "reference_T = {}", f(self.reference_time));
            }
            Experiment::EightSchools | Experiment::Robustness => {
                let _ = writeln!(out, "data = {}", self.data);
            }
        }
        out
    }
}
