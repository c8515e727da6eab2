use std::f64::consts::PI;

use mces_core::diagnostics::{self, ESSReport, Summary};
use mces_core::hamiltonian::LeapfrogConfig;
use mces_core::models::{gradient_check, EightSchoolsModel, GaussianTarget, LgcpModel, LgcpParams, RosenbrockTarget, TargetModel};
use mces_core::parallel::{self, Execution};
use mces_core::sampler::{run_chains, run_standard_hmc, ExactGaussianFlow, Leapfrog, MCESConfig};
use mces_core::{chain_rng, MassMatrix, Trace};
use nalgebra::DVector;

use crate::config::{Experiment, ExperimentSpec};
use crate::data;
use crate::error::Result;

/// Posterior means and standard deviations of (theta_1..8, mu, tau) published for the
/// adaptive sampler on the eight-schools data.
pub const EIGHT_SCHOOLS_PUBLISHED: [(f64, f64); 10] = [
    (10.3, 7.1),
    (7.5, 5.8),
    (6.0, 6.9),
    (7.3, 6.1),
    (5.0, 5.9),
    (6.0, 6.2),
    (10.0, 6.1),
    (7.8, 7.0),
    (7.3, 4.2),
    (5.7, 3.6),
];

/// Published posterior means of the German credit coefficients (beta_0..beta_24).
pub const GERMAN_PUBLISHED: [f64; 25] = [
    -1.20, -0.73, 0.42, -0.41, 0.13, -0.36, -0.17, -0.15, 0.01, 0.18, -0.11, -0.22, 0.12, 0.03, -0.13, -0.29, 0.28,
    -0.30, 0.30, 0.27, 0.12, -0.06, -0.09, -0.03, -0.02,
];

/// Per-replicate run statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainStats {
    /// Acceptance rate of the retained (post burn-in) draws.
    pub acceptance: f64,
    /// Acceptance rate once `M` and `L` stopped changing.
    pub frozen_acceptance: f64,
    pub frozen_from: usize,
    pub final_steps: usize,
    pub divergences: usize,
    pub min_ess_per_l: f64,
}

/// One sampler setting: its replicates and their diagnostics.
#[derive(Debug, Clone)]
pub struct SettingResult {
    /// Sub-directory name when an experiment has several settings.
    pub label: Option<String>,
    pub traces: Vec<Trace>,
    /// ESS averaged over replicates.
    pub ess: ESSReport,
    pub parameter_names: Vec<String>,
    /// Pooled over replicates, after burn-in, in reporting coordinates.
    pub summary: Summary,
    pub chains: Vec<ChainStats>,
    pub metrics: Vec<(String, f64)>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub settings: Vec<SettingResult>,
    /// Experiment-level scalar results.
    pub metrics: Vec<(String, f64)>,
    /// Extra CSV files written next to the settings: `(file name, contents)`.
    pub tables: Vec<(String, String)>,
}

impl ExperimentResult {
    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    pub fn setting(&self, label: &str) -> Option<&SettingResult> {
        self.settings.iter().find(|s| s.label.as_deref() == Some(label))
    }
}

impl SettingResult {
    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    match spec.experiment {
        Experiment::Gauss1d => gauss1d(spec),
        Experiment::Rosenbrock => rosenbrock(spec),
        Experiment::EightSchools => eight_schools(spec),
        Experiment::GermanCredit => german_credit(spec),
        Experiment::Lgcp => lgcp(spec),
        Experiment::Robustness => robustness(spec),
    }
}

fn execution(spec: &ExperimentSpec) -> Execution {
    Execution::with_workers((spec.workers > 0).then_some(spec.workers))
}

fn mean_report(reports: &[ESSReport]) -> ESSReport {
    let k = reports.len() as f64;
    let dim = reports[0].ess.len();
    let avg = |f: &dyn Fn(&ESSReport) -> &Vec<f64>| (0..dim).map(|j| reports.iter().map(|r| f(r)[j]).sum::<f64>() / k).collect();
    ESSReport {
        ess: avg(&|r| &r.ess),
        ess_per_l: avg(&|r| &r.ess_per_l),
        mean_steps: reports.iter().map(|r| r.mean_steps).sum::<f64>() / k,
        n_samples: reports[0].n_samples,
    }
}

/// Diagnostics shared by every setting; `report` maps a sampling-space row to the
/// reported parameters.
fn finish_setting(
    label: Option<String>,
    traces: Vec<Trace>,
    burn_in: usize,
    parameter_names: Vec<String>,
    report: impl Fn(&[f64]) -> Result<Vec<f64>>,
    exec: Execution,
) -> Result<SettingResult> {
    let reports = parallel::map(exec, &traces, |t| diagnostics::ess_per_l(t, burn_in))
        .into_iter()
        .collect::<mces_core::Result<Vec<_>>>()?;
    let chains = traces
        .iter()
        .zip(&reports)
        .map(|(t, r)| ChainStats {
            acceptance: t.acceptance_rate(burn_in),
            frozen_acceptance: t.acceptance_rate(t.frozen_from()),
            frozen_from: t.frozen_from(),
            final_steps: *t.steps().last().expect("non-empty trace"),
            divergences: t.divergences(),
            min_ess_per_l: r.ess_per_l.iter().copied().fold(f64::INFINITY, f64::min),
        })
        .collect();
    let rows = traces
        .iter()
        .flat_map(|t| t.rows().skip(burn_in))
        .map(&report)
        .collect::<Result<Vec<_>>>()?;
    let summary = Summary::from_rows(rows.iter().map(Vec::as_slice))?;
    Ok(SettingResult {
        label,
        traces,
        ess: mean_report(&reports),
        parameter_names,
        summary,
        chains,
        metrics: Vec::new(),
    })
}

fn identity(row: &[f64]) -> Result<Vec<f64>> {
    Ok(row.to_vec())
}

fn coordinate_names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|j| format!("{prefix}_{j}")).collect()
}

fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

/// Exact Hamiltonian flow on `N(0, 1)` with unit mass from `x0 = 1`, one chain per time.
fn gauss1d(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    let target = GaussianTarget::standard(1);
    let flow = ExactGaussianFlow { target: target.clone() };
    let mass = MassMatrix::identity(1);
    let exec = execution(spec);
    let traces = parallel::map(exec, &spec.times, |&multiple| -> Result<Trace> {
        let step = LeapfrogConfig::from_time(multiple * PI, 1)?;
        let mut rng = chain_rng(spec.mces.seed, 0);
        Ok(run_standard_hmc(&target, &flow, &DVector::from_element(1, 1.0), &mass, step, spec.mces.n_max, &mut rng)?)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut settings = Vec::new();
    let mut table = String::from("T_over_pi,acceptance,lag1_autocorrelation,ks_p_value,alternating\n");
    for (&multiple, trace) in spec.times.iter().zip(traces) {
        let x = trace.column(0, spec.burn_in);
        let alternating = x.iter().enumerate().all(|(i, &v)| v == if i % 2 == 0 { -1.0 } else { 1.0 });
        let lag1 = diagnostics::autocorrelation(&x, 1)?;
        let ks = diagnostics::ks_p_value(diagnostics::ks_statistic(&x, diagnostics::standard_normal_cdf), x.len());
        let acceptance = trace.acceptance_rate(spec.burn_in);
        table.push_str(&format!(
            "{multiple:.16e},{acceptance:.16e},{lag1:.16e},{ks:.16e},{}\n",
            alternating as u8
        ));
        let mut setting = finish_setting(Some(format!("T_{multiple:.2}pi")), vec![trace], spec.burn_in, vec!["x".into()], identity, exec)?;
        setting.metrics = vec![
            ("T_over_pi".into(), multiple),
            ("acceptance".into(), acceptance),
            ("lag1_autocorrelation".into(), lag1),
            ("ks_p_value".into(), ks),
            ("alternating".into(), alternating as u8 as f64),
        ];
        settings.push(setting);
    }
    Ok(ExperimentResult {
        spec: spec.clone(),
        settings,
        metrics: Vec::new(),
        tables: vec![("regimes.csv".into(), table)],
    })
}

fn rosenbrock(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    let exec = execution(spec);
    let mut settings = Vec::new();
    let mut table = String::from("b,ess_per_l_x0,ess_per_l_x1,var_x0,var_x1,acceptance\n");
    for &b in &spec.b {
        let model = RosenbrockTarget::new(b)?;
        let traces = run_chains(&model, &spec.mces, &DVector::zeros(2), spec.replicates, exec)?;
        let mut setting = finish_setting(Some(format!("b_{b:.2}")), traces, spec.burn_in, coordinate_names("x", 2), identity, exec)?;
        // Per-replicate variances, averaged, so the value does not depend on pooling.
        let var = |j: usize| {
            mean(setting.traces.iter().map(|t| {
                let s = diagnostics::summarize(t, spec.burn_in).expect("burn-in checked");
                s.sd[j] * s.sd[j]
            }))
        };
        let (v0, v1) = (var(0), var(1));
        let acceptance = mean(setting.chains.iter().map(|c| c.acceptance));
        table.push_str(&format!(
            "{b:.16e},{:.16e},{:.16e},{v0:.16e},{v1:.16e},{acceptance:.16e}\n",
            setting.ess.ess_per_l[0], setting.ess.ess_per_l[1]
        ));
        setting.metrics = vec![
            ("b".into(), b),
            ("var_x0".into(), v0),
            ("var_x1".into(), v1),
            ("acceptance".into(), acceptance),
        ];
        settings.push(setting);
    }
    Ok(ExperimentResult {
        spec: spec.clone(),
        settings,
        metrics: Vec::new(),
        tables: vec![("sweep.csv".into(), table)],
    })
}

fn eight_schools_setting(spec: &ExperimentSpec, config: &MCESConfig, label: Option<String>) -> Result<SettingResult> {
    let model = data::eight_schools(&spec.data)?;
    let exec = execution(spec);
    let traces = run_chains(&model, config, &DVector::zeros(model.dim()), spec.replicates, exec)?;
    let report = |row: &[f64]| Ok(EightSchoolsModel::constrained(&DVector::from_column_slice(row))?);
    let mut setting = finish_setting(label, traces, spec.burn_in, EightSchoolsModel::parameter_names(), report, exec)?;
    setting.metrics = vec![
        ("acceptance".into(), mean(setting.chains.iter().map(|c| c.acceptance))),
        ("frozen_acceptance".into(), mean(setting.chains.iter().map(|c| c.frozen_acceptance))),
        ("final_L".into(), mean(setting.chains.iter().map(|c| c.final_steps as f64))),
        ("min_ess_per_l".into(), setting.ess.ess_per_l.iter().copied().fold(f64::INFINITY, f64::min)),
    ];
    Ok(setting)
}

fn eight_schools(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    let setting = eight_schools_setting(spec, &spec.mces, None)?;
    let mut table = String::from("parameter,mean,sd,published_mean,published_sd\n");
    let (mut worst_mean, mut worst_sd) = (0.0f64, 0.0f64);
    for (j, name) in setting.parameter_names.iter().enumerate() {
        let (pm, ps) = EIGHT_SCHOOLS_PUBLISHED[j];
        let (m, s) = (setting.summary.mean[j], setting.summary.sd[j]);
        worst_mean = worst_mean.max((m - pm).abs());
        worst_sd = worst_sd.max((s - ps).abs());
        table.push_str(&format!("{name},{m:.16e},{s:.16e},{pm:.16e},{ps:.16e}\n"));
    }
    let mut metrics = setting.metrics.clone();
    metrics.push(("max_abs_mean_diff".into(), worst_mean));
    metrics.push(("max_abs_sd_diff".into(), worst_sd));
    Ok(ExperimentResult {
        spec: spec.clone(),
        settings: vec![setting],
        metrics,
        tables: vec![("comparison.csv".into(), table)],
    })
}

/// The three alternative schedules plus the baseline, each on the eight-schools target.
pub fn robustness_variants(base: &MCESConfig) -> Vec<(&'static str, MCESConfig)> {
    vec![
        ("baseline", base.clone()),
        ("test1", MCESConfig { acc_min: 0.4, i_max: 2, ..base.clone() }),
        ("test2", MCESConfig { i_max: 1, ..base.clone() }),
        ("test3", MCESConfig { l_max: 100, i_max: 2, ..base.clone() }),
    ]
}

fn robustness(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    let mut settings = Vec::new();
    let mut table = String::from("variant,Acc_min,I_max,L_max,acceptance,frozen_acceptance,final_L,min_ess_per_l,meets_acc_min\n");
    for (name, config) in robustness_variants(&spec.mces) {
        let setting = eight_schools_setting(spec, &config, Some(name.to_string()))?;
        let frozen = setting.metric("frozen_acceptance").unwrap_or(f64::NAN);
        table.push_str(&format!(
            "{name},{:.16e},{},{},{:.16e},{frozen:.16e},{:.16e},{:.16e},{}\n",
            config.acc_min,
            config.i_max,
            config.l_max,
            setting.metric("acceptance").unwrap_or(f64::NAN),
            setting.metric("final_L").unwrap_or(f64::NAN),
            setting.metric("min_ess_per_l").unwrap_or(f64::NAN),
            (frozen >= config.acc_min) as u8
        ));
        settings.push(setting);
    }
    Ok(ExperimentResult {
        spec: spec.clone(),
        settings,
        metrics: Vec::new(),
        tables: vec![("variants.csv".into(), table)],
    })
}

fn german_credit(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    let model = data::german_credit(&spec.data)?;
    let dim = model.dim();
    let exec = execution(spec);
    let names = coordinate_names("beta", dim);
    let traces = run_chains(&model, &spec.mces, &DVector::zeros(dim), spec.replicates, exec)?;
    let mut setting = finish_setting(None, traces, spec.burn_in, names.clone(), identity, exec)?;
    setting.metrics = vec![("acceptance".into(), mean(setting.chains.iter().map(|c| c.acceptance)))];

    // Long plain-HMC reference run on its own stream.
    let step = LeapfrogConfig::from_time(spec.reference_time, spec.reference_steps)?;
    let mut rng = chain_rng(spec.mces.seed, u64::MAX);
    let reference = run_standard_hmc(&model, &Leapfrog, &DVector::zeros(dim), &MassMatrix::identity(dim), step, spec.reference_samples, &mut rng)?;
    let ref_summary = diagnostics::summarize(&reference, spec.reference_burn_in)?;
    let ref_ess = diagnostics::ess_per_l(&reference, spec.reference_burn_in)?;

    let mut table = String::from("parameter,mean,sd,reference_mean,reference_sd,published_mean\n");
    let (mut worst_ref, mut worst_pub) = (0.0f64, 0.0f64);
    for (j, name) in names.iter().enumerate() {
        let (m, s) = (setting.summary.mean[j], setting.summary.sd[j]);
        let (rm, rs) = (ref_summary.mean[j], ref_summary.sd[j]);
        worst_ref = worst_ref.max((m - rm).abs());
        worst_pub = worst_pub.max((m - GERMAN_PUBLISHED[j]).abs());
        table.push_str(&format!("{name},{m:.16e},{s:.16e},{rm:.16e},{rs:.16e},{:.16e}\n", GERMAN_PUBLISHED[j]));
    }
    let metrics = vec![
        ("acceptance".into(), setting.metric("acceptance").unwrap_or(f64::NAN)),
        ("reference_acceptance".into(), reference.acceptance_rate(spec.reference_burn_in)),
        ("reference_min_ess".into(), ref_ess.ess.iter().copied().fold(f64::INFINITY, f64::min)),
        ("max_abs_diff_reference".into(), worst_ref),
        ("max_abs_diff_published".into(), worst_pub),
    ];
    Ok(ExperimentResult {
        spec: spec.clone(),
        settings: vec![setting],
        metrics,
        tables: vec![("comparison.csv".into(), table)],
    })
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a.iter().copied()), mean(b.iter().copied()));
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

fn lgcp(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    let params = LgcpParams::reference(spec.d);
    let field = data::generate_lgcp_data(&params, spec.data_seed)?;
    let model = LgcpModel::new(params, field.counts.clone())?;
    let start = model.prior_mean();
    let gradient_error = gradient_check(&model, &start)?;
    let exec = execution(spec);
    let traces = run_chains(&model, &spec.mces, &start, spec.replicates, exec)?;
    let mut setting = finish_setting(None, traces, spec.burn_in, coordinate_names("x", model.dim()), identity, exec)?;
    let correlation = pearson(&setting.summary.mean, field.latent.as_slice());
    let acceptance = mean(setting.chains.iter().map(|c| c.acceptance));
    let frozen = mean(setting.chains.iter().map(|c| c.frozen_acceptance));
    setting.metrics = vec![("acceptance".into(), acceptance), ("frozen_acceptance".into(), frozen)];
    let d = spec.d;
    let mean_field = DVector::from_column_slice(&setting.summary.mean);
    Ok(ExperimentResult {
        spec: spec.clone(),
        settings: vec![setting],
        metrics: vec![
            ("gradient_check".into(), gradient_error),
            ("acceptance".into(), acceptance),
            ("frozen_acceptance".into(), frozen),
            ("pearson_latent".into(), correlation),
            ("total_count".into(), field.counts.sum()),
        ],
        tables: vec![
            ("counts.csv".into(), data::counts_to_csv(&field.counts, d)),
            ("latent.csv".into(), data::grid_to_csv(&field.latent, d)),
            ("posterior_mean.csv".into(), data::grid_to_csv(&mean_field, d)),
        ],
    })
}
