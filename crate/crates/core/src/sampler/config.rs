use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Tuning constants of the adaptive sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct MCESConfig {
    /// Acceptance rate above which growth of `L` may stop.
    pub acc_min: f64,
    /// Warm-start samples drawn with plain HMC.
    pub n0: usize,
    /// Total chain length, warm start included.
    pub n_max: usize,
    /// No mass-matrix update at or after this many samples.
    pub n_m: usize,
    /// Monitoring window length.
    pub n_l: usize,
    pub l0: usize,
    pub l_max: usize,
    /// Growth factor for `L`.
    pub rho: f64,
    /// Consecutive non-improving windows tolerated before `L` is frozen.
    pub i_max: usize,
    /// Integration time per proposal.
    pub time: f64,
    /// Leapfrog steps of the warm-start sampler (identity mass, same integration time).
    pub warmstart_steps: usize,
    pub warmstart_time: f64,
    pub seed: u64,
}

impl Default for MCESConfig {
    fn default() -> Self {
        Self {
            acc_min: 0.6,
            n0: 1000,
            n_max: 10_000,
            n_m: 2000,
            n_l: 200,
            l0: 1,
            l_max: 60,
            rho: 1.2,
            i_max: 1,
            time: FRAC_PI_2,
            warmstart_steps: 20,
            warmstart_time: FRAC_PI_2,
            seed: 0,
        }
    }
}

const KEYS: [&str; 13] = [
    "Acc_min", "N0", "N_max", "N_M", "N_L", "L0", "L_max", "rho", "I_max", "T", "warmstart_L",
    "warmstart_T", "seed",
];

impl MCESConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.acc_min > 0.0 && self.acc_min < 1.0) {
            return fail(format!("Acc_min must lie in (0, 1), got {}", self.acc_min));
        }
        if self.n0 < 2 {
            return fail(format!("N0 must be at least 2 to estimate a covariance, got {}", self.n0));
        }
        if !(self.n0 <= self.n_m && self.n_m <= self.n_max) {
            return fail(format!(
                "need N0 <= N_M <= N_max, got {} / {} / {}",
                self.n0, self.n_m, self.n_max
            ));
        }
        if self.n_l == 0 {
            return fail("N_L must be positive".into());
        }
        if !(self.l0 >= 1 && self.l0 <= self.l_max) {
            return fail(format!("need 1 <= L0 <= L_max, got {} / {}", self.l0, self.l_max));
        }
        if !(self.rho > 1.0) || !self.rho.is_finite() {
            return fail(format!("rho must exceed 1, got {}", self.rho));
        }
        if self.i_max == 0 {
            return fail("I_max must be positive".into());
        }
        if !(self.time > 0.0 && self.time.is_finite()) {
            return fail(format!("T must be positive, got {}", self.time));
        }
        if self.warmstart_steps == 0 || !(self.warmstart_time > 0.0) {
            return fail("warm-start steps and time must be positive".into());
        }
        Ok(())
    }

    /// Next `L` when growing from `l_old`: `min(max(l_old + 1, round(rho · l_old)), L_max)`.
    pub fn grow_steps(&self, l_old: usize) -> usize {
        let scaled = (self.rho * l_old as f64).round() as usize;
        scaled.max(l_old + 1).min(self.l_max)
    }

    /// Sets one field from its key; keys use the symbols of the algorithm (`Acc_min`, `N0`, ...).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |e: &dyn std::fmt::Display| Error::InvalidConfig(format!("bad value {value:?} for {key}: {e}"));
        let float = || value.parse::<f64>().map_err(|e| bad(&e));
        let count = || value.parse::<usize>().map_err(|e| bad(&e));
        match key {
            "Acc_min" => self.acc_min = float()?,
            "N0" => self.n0 = count()?,
            "N_max" => self.n_max = count()?,
            "N_M" => self.n_m = count()?,
            "N_L" => self.n_l = count()?,
            "L0" => self.l0 = count()?,
            "L_max" => self.l_max = count()?,
            "rho" => self.rho = float()?,
            "I_max" => self.i_max = count()?,
            "T" => self.time = float()?,
            "warmstart_L" => self.warmstart_steps = count()?,
            "warmstart_T" => self.warmstart_time = float()?,
            "seed" => self.seed = value.parse::<u64>().map_err(|e| bad(&e))?,
            _ => return Err(Error::InvalidConfig(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn is_key(key: &str) -> bool {
        KEYS.contains(&key)
    }

    /// `(key, value)` pairs with floats printed to 17 significant digits.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let f = |v: f64| format!("{v:.16e}");
        vec![
            ("Acc_min", f(self.acc_min)),
            ("N0", self.n0.to_string()),
            ("N_max", self.n_max.to_string()),
            ("N_M", self.n_m.to_string()),
            ("N_L", self.n_l.to_string()),
            ("L0", self.l0.to_string()),
            ("L_max", self.l_max.to_string()),
            ("rho", f(self.rho)),
            ("I_max", self.i_max.to_string()),
            ("T", f(self.time)),
            ("warmstart_L", self.warmstart_steps.to_string()),
            ("warmstart_T", f(self.warmstart_time)),
            ("seed", self.seed.to_string()),
        ]
    }

    /// `key = value` lines.
    pub fn to_snapshot(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// Parses `key = value` lines; `#` starts a comment. Unlisted keys keep their defaults.
    pub fn from_snapshot(text: &str) -> Result<Self> {
        let mut config = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected `key = value`, got {raw:?}", lineno + 1))
            })?;
            config.set(key.trim(), value.trim())?;
        }
        Ok(config)
    }
}
