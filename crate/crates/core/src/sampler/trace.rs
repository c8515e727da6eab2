use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::sampler::config::MCESConfig;
use crate::sampler::kernel::DIVERGENCE_THRESHOLD;

/// A change of kernel parameters during adaptation, keyed by the sample count at which it
/// took effect.
#[derive(Debug, Clone, PartialEq)]
pub enum AdaptationEvent {
    MassUpdated { at: usize },
    StepsChanged { at: usize, from: usize, to: usize },
    /// Growth of `L` stopped; `steps` is the value kept for the rest of the run.
    StepsFrozen { at: usize, steps: usize },
}

/// Covariance estimate that defined the mass matrix `M = Σ̂⁻¹` from sample `at` onwards.
#[derive(Debug, Clone, PartialEq)]
pub struct MassUpdate {
    pub at: usize,
    pub covariance: DMatrix<f64>,
}

/// Record of a finished chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    dim: usize,
    samples: Vec<f64>,
    accepted: Vec<bool>,
    steps: Vec<usize>,
    energy_errors: Vec<f64>,
    config: Option<MCESConfig>,
    final_mass: Option<DMatrix<f64>>,
    mass_updates: Vec<MassUpdate>,
    events: Vec<AdaptationEvent>,
}

impl Trace {
    pub(crate) fn new(dim: usize) -> Self {
        Self {
            dim,
            samples: Vec::new(),
            accepted: Vec::new(),
            steps: Vec::new(),
            energy_errors: Vec::new(),
            config: None,
            final_mass: None,
            mass_updates: Vec::new(),
            events: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, x: &[f64], accepted: bool, steps: usize, delta_h: f64) {
        debug_assert_eq!(x.len(), self.dim);
        self.samples.extend_from_slice(x);
        self.accepted.push(accepted);
        self.steps.push(steps);
        self.energy_errors.push(delta_h);
    }

    pub(crate) fn set_config(&mut self, config: MCESConfig) {
        self.config = Some(config);
    }

    pub(crate) fn set_final_mass(&mut self, mass: DMatrix<f64>) {
        self.final_mass = Some(mass);
    }

    pub(crate) fn record_mass_update(&mut self, at: usize, covariance: DMatrix<f64>) {
        self.mass_updates.push(MassUpdate { at, covariance });
        self.events.push(AdaptationEvent::MassUpdated { at });
    }

    pub(crate) fn record(&mut self, event: AdaptationEvent) {
        self.events.push(event);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.accepted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accepted.is_empty()
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        &self.samples[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.samples.chunks_exact(self.dim.max(1))
    }

    /// Values of coordinate `j` from sample `start` onwards.
    pub fn column(&self, j: usize, start: usize) -> Vec<f64> {
        (start..self.len()).map(|i| self.samples[i * self.dim + j]).collect()
    }

    /// Samples from `start` onwards as an `N × n` matrix.
    pub fn sample_matrix(&self, start: usize) -> DMatrix<f64> {
        let n = self.len().saturating_sub(start);
        DMatrix::from_row_slice(n, self.dim, &self.samples[start * self.dim..])
    }

    pub fn accepted(&self) -> &[bool] {
        &self.accepted
    }

    /// Leapfrog steps used at each iteration.
    pub fn steps(&self) -> &[usize] {
        &self.steps
    }

    /// `H(end) − H(start)` per iteration; `+inf` marks a trajectory that blew up.
    pub fn energy_errors(&self) -> &[f64] {
        &self.energy_errors
    }

    pub fn is_divergent(&self, i: usize) -> bool {
        !(self.energy_errors[i].abs() <= DIVERGENCE_THRESHOLD)
    }

    pub fn divergences(&self) -> usize {
        (0..self.len()).filter(|&i| self.is_divergent(i)).count()
    }

    /// Fraction of accepted proposals from sample `start` onwards.
    pub fn acceptance_rate(&self, start: usize) -> f64 {
        let window = &self.accepted[start.min(self.len())..];
        if window.is_empty() {
            return 0.0;
        }
        window.iter().filter(|&&a| a).count() as f64 / window.len() as f64
    }

    pub fn config(&self) -> Option<&MCESConfig> {
        self.config.as_ref()
    }

    pub fn final_mass(&self) -> Option<&DMatrix<f64>> {
        self.final_mass.as_ref()
    }

    pub fn mass_updates(&self) -> &[MassUpdate] {
        &self.mass_updates
    }

    pub fn events(&self) -> &[AdaptationEvent] {
        &self.events
    }

    /// Sample count after which neither `M` nor `L` changed again.
    pub fn frozen_from(&self) -> usize {
        self.events
            .iter()
            .map(|e| match e {
                AdaptationEvent::MassUpdated { at }
                | AdaptationEvent::StepsChanged { at, .. }
                | AdaptationEvent::StepsFrozen { at, .. } => *at,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn csv_header(&self) -> String {
        let mut header = String::from("iter,accepted,L,delta_H");
        for j in 0..self.dim {
            let _ = write!(header, ",x_{j}");
        }
        header
    }

    /// `iter,accepted,L,delta_H,x_0,...` with every float at 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = self.csv_header();
        out.push('\n');
        for i in 0..self.len() {
            let _ = write!(
                out,
                "{},{},{},{:.16e}",
                i,
                u8::from(self.accepted[i]),
                self.steps[i],
                self.energy_errors[i]
            );
            for v in self.sample(i) {
                let _ = write!(out, ",{v:.16e}");
            }
            out.push('\n');
        }
        out
    }

    /// Parses the CSV layout written by [`Trace::to_csv`]. Configuration, mass matrix and
    /// adaptation history are not part of that layout and come back empty.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidArgument("empty trace file".into()))?;
        let columns: Vec<&str> = header.split(',').map(str::trim).collect();
        if columns.len() < 4 || columns[..4] != ["iter", "accepted", "L", "delta_H"] {
            return Err(Error::InvalidArgument(format!("unexpected trace header {header:?}")));
        }
        let dim = columns.len() - 4;
        for (j, name) in columns[4..].iter().enumerate() {
            if *name != format!("x_{j}") {
                return Err(Error::InvalidArgument(format!("unexpected column {name:?}")));
            }
        }
        let mut trace = Trace::new(dim);
        let mut row = Vec::with_capacity(dim);
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |what: &str| Error::InvalidArgument(format!("trace line {}: {what}", lineno + 2));
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != dim + 4 {
                return Err(bad(&format!("expected {} fields, found {}", dim + 4, fields.len())));
            }
            let accepted = match fields[1] {
                "1" => true,
                "0" => false,
                other => return Err(bad(&format!("accepted flag {other:?}"))),
            };
            let steps = fields[2].parse::<usize>().map_err(|e| bad(&e.to_string()))?;
            let delta_h = fields[3].parse::<f64>().map_err(|e| bad(&e.to_string()))?;
            row.clear();
            for f in &fields[4..] {
                row.push(f.parse::<f64>().map_err(|e| bad(&e.to_string()))?);
            }
            trace.push(&row, accepted, steps, delta_h);
        }
        Ok(trace)
    }

    /// True when samples, accept flags, steps and energy errors agree bit for bit.
    pub fn same_chain(&self, other: &Trace) -> bool {
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        self.dim == other.dim
            && self.accepted == other.accepted
            && self.steps == other.steps
            && bits(&self.samples) == bits(&other.samples)
            && bits(&self.energy_errors) == bits(&other.energy_errors)
    }
}
