//! Scenario configuration, gain sweeps, quadrature sampling runs and
//! equivalent-state tables, plus their CSV and JSON encodings.

use std::fmt;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{
    ideal_herald_probability, sp_model_covariance, sp_model_herald_probability, BetaParam,
};
use crate::channels::{distill, loss_channel, ChannelParams, SqueezingParam};
use crate::equiv::{solve_equivalent, EquivalenceOutcome};
use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, HilbertConfig, MAX_N_MAX};
use crate::quad::{
    apply_detection_efficiency, covariance_summary, duan_inseparability, empirical_moments,
    sample_quadratures, CovarianceSummary,
};

/// Header of the sweep CSV table.
pub const SWEEP_HEADER: [&str; 8] = [
    "g",
    "beta",
    "v_diff",
    "v_sum",
    "duan_I",
    "duan_a_star",
    "herald_p",
    "model",
];

pub const EQUIV_HEADER: [&str; 9] = [
    "g",
    "v_diff",
    "v_sum",
    "status",
    "gamma_eq",
    "eta_a_eq",
    "eta_b_eq",
    "gamma_eq_alt",
    "eta_b_eq_alt",
];

pub const SAMPLE_HEADER: [&str; 3] = ["g", "x_a", "x_b"];

/// Standard deviation of a vacuum quadrature, the shot-noise circle radius.
pub const VACUUM_RADIUS: f64 = std::f64::consts::FRAC_1_SQRT_2;

pub const MIN_SCENARIO_N_MAX: usize = 3;

/// Bundled configurations as `(name, json)`.
pub const PRESETS: [(&str, &str); 4] = [
    ("lowsqueeze", include_str!("../presets/lowsqueeze.json")),
    ("losschannel", include_str!("../presets/losschannel.json")),
    ("figS2a", include_str!("../presets/figS2a.json")),
    ("figS2b", include_str!("../presets/figS2b.json")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    let name = name.strip_suffix(".json").unwrap_or(name);
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, json)| *json)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum DegradeMode {
    #[default]
    None,
    /// Pump polarization rotated by `theta_deg` degrees: `γ → γ cos θ`.
    PumpRotation { theta_deg: f64 },
    /// Loss channel of intensity transmissivity `tau2` on mode B.
    Loss { tau2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainSweep {
    pub g_min: f64,
    pub g_max: f64,
    pub steps: usize,
    #[serde(default)]
    pub log_spacing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GainSpec {
    Fixed(f64),
    Sweep(GainSweep),
}

impl GainSpec {
    /// Gain values in increasing order; the last point is exactly `g_max`.
    pub fn values(&self) -> Vec<f64> {
        match *self {
            GainSpec::Fixed(g) => vec![g],
            GainSpec::Sweep(s) => {
                let n = s.steps.max(2);
                let (lo, hi) = if s.log_spacing {
                    (s.g_min.ln(), s.g_max.ln())
                } else {
                    (s.g_min, s.g_max)
                };
                (0..n)
                    .map(|i| {
                        if i == n - 1 {
                            return s.g_max;
                        }
                        let t = lo + (hi - lo) * i as f64 / (n - 1) as f64;
                        if s.log_spacing {
                            t.exp()
                        } else {
                            t
                        }
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// First-order pure-state theory; no ancilla or detector inefficiency.
    Ideal,
    /// Single-photon-level model with ancilla and detector efficiencies.
    SinglePhoton,
    /// Fock-space circuit with ancilla and detector efficiencies.
    #[default]
    FullNumeric,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Ideal => "ideal",
            ModelKind::SinglePhoton => "single_photon",
            ModelKind::FullNumeric => "full_numeric",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ideal" => Ok(ModelKind::Ideal),
            "single_photon" => Ok(ModelKind::SinglePhoton),
            "full_numeric" => Ok(ModelKind::FullNumeric),
            other => Err(format!(
                "unknown model `{other}` (expected ideal, single_photon or full_numeric)"
            )),
        }
    }
}

fn default_n_max() -> usize {
    3
}

fn default_sample_count() -> usize {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Initial two-mode squeezing `γ = tanh s`.
    pub gamma: f64,
    #[serde(default)]
    pub degrade: DegradeMode,
    pub gain: GainSpec,
    pub eta_ancilla: f64,
    pub eta_a: f64,
    pub eta_b: f64,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default)]
    pub model: ModelKind,
    #[serde(default = "default_sample_count")]
    pub sample_count: usize,
    #[serde(default)]
    pub seed: u64,
}

/// One rejected configuration field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn join_errors(errors: &[FieldError]) -> String {
    errors
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl ScenarioConfig {
    pub fn from_json(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::Scenario(e.to_string()))
    }

    pub fn from_preset(name: &str) -> Result<Self> {
        let json = preset(name).ok_or_else(|| {
            Error::Scenario(format!(
                "unknown preset `{name}` (available: {})",
                PRESETS.map(|(n, _)| n).join(", ")
            ))
        })?;
        Self::from_json(json)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    /// Field-level validation; an empty vector means the config is usable.
    pub fn validate(&self) -> Vec<FieldError> {
        let mut errors = Vec::new();
        let mut bad = |field: &str, message: String| {
            errors.push(FieldError {
                field: field.to_string(),
                message,
            })
        };
        let open_unit = |x: f64| x.is_finite() && x > 0.0 && x < 1.0;
        let closed_unit = |x: f64| x.is_finite() && (0.0..=1.0).contains(&x);

        if !open_unit(self.gamma) {
            bad("gamma", format!("{} is outside (0, 1)", self.gamma));
        }
        match self.degrade {
            DegradeMode::None => {}
            DegradeMode::PumpRotation { theta_deg } => {
                if !(theta_deg.is_finite() && (0.0..90.0).contains(&theta_deg)) {
                    bad(
                        "degrade.theta_deg",
                        format!("{theta_deg} is outside [0, 90)"),
                    );
                }
            }
            DegradeMode::Loss { tau2 } => {
                if !(tau2.is_finite() && tau2 > 0.0 && tau2 <= 1.0) {
                    bad("degrade.tau2", format!("{tau2} is outside (0, 1]"));
                }
            }
        }
        let gain_ok = |g: f64| g.is_finite() && g >= 1.0;
        match self.gain {
            GainSpec::Fixed(g) => {
                if !gain_ok(g) {
                    bad("gain", format!("{g} is outside [1, ∞)"));
                }
            }
            GainSpec::Sweep(s) => {
                if !gain_ok(s.g_min) {
                    bad("gain.g_min", format!("{} is outside [1, ∞)", s.g_min));
                }
                if !gain_ok(s.g_max) {
                    bad("gain.g_max", format!("{} is outside [1, ∞)", s.g_max));
                } else if gain_ok(s.g_min) && s.g_max <= s.g_min {
                    bad(
                        "gain.g_max",
                        format!("{} must exceed g_min = {}", s.g_max, s.g_min),
                    );
                }
                if s.steps < 2 {
                    bad("gain.steps", format!("{} is below 2", s.steps));
                }
            }
        }
        for (field, eta) in [
            ("eta_ancilla", self.eta_ancilla),
            ("eta_a", self.eta_a),
            ("eta_b", self.eta_b),
        ] {
            if !closed_unit(eta) {
                bad(field, format!("{eta} is outside [0, 1]"));
            }
        }
        if !(MIN_SCENARIO_N_MAX..=MAX_N_MAX).contains(&self.n_max) {
            bad(
                "n_max",
                format!(
                    "{} is outside [{MIN_SCENARIO_N_MAX}, {MAX_N_MAX}]",
                    self.n_max
                ),
            );
        }
        if self.sample_count == 0 {
            bad("sample_count", "must be at least 1".to_string());
        }
        errors
    }

    fn ensure_valid(&self) -> Result<()> {
        let errors = self.validate();
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Scenario(join_errors(&errors)))
        }
    }

    /// Squeezing after the degradation step.
    pub fn effective_gamma(&self) -> f64 {
        match self.degrade {
            DegradeMode::PumpRotation { theta_deg } => {
                self.gamma * theta_deg.to_radians().cos().clamp(0.0, 1.0)
            }
            _ => self.gamma,
        }
    }

    /// Amplitude transmissivity of the channel on mode B.
    pub fn tau(&self) -> f64 {
        match self.degrade {
            DegradeMode::Loss { tau2 } => tau2.sqrt(),
            _ => 1.0,
        }
    }

    /// `β = 1/(g γ τ)` after degradation.
    pub fn beta(&self, gain: f64) -> f64 {
        1.0 / (gain * self.effective_gamma() * self.tau())
    }

    pub fn hilbert(&self, mode_count: usize) -> Result<HilbertConfig> {
        HilbertConfig::new(self.n_max, mode_count)
    }
}

/// Normalized distilled `(A, B)` state at `gain`, before detection, and the
/// heralding probability.
pub fn distilled_state(config: &ScenarioConfig, gain: f64) -> Result<(DensityMatrix, f64)> {
    config.ensure_valid()?;
    let gamma = SqueezingParam::new(config.effective_gamma())?;
    let params = ChannelParams::from_gain(config.tau(), gain, config.eta_ancilla)?;
    distill(gamma, &params, config.hilbert(2)?)
}

/// Distilled state after detector losses `τ² = η_A`, `η_B` on each mode:
/// the state whose quadratures the homodyne detectors record.
pub fn detected_state(config: &ScenarioConfig, gain: f64) -> Result<(DensityMatrix, f64)> {
    let (state, p) = distilled_state(config, gain)?;
    let a = loss_channel(&state, 0, config.eta_a.sqrt())?;
    let b = loss_channel(&a, 1, config.eta_b.sqrt())?;
    Ok((b, p))
}

/// Detected-state moments and heralding probability of `model` at `gain`.
pub fn model_covariance(
    config: &ScenarioConfig,
    model: ModelKind,
    gain: f64,
) -> Result<(CovarianceSummary, f64)> {
    config.ensure_valid()?;
    let gamma = config.effective_gamma();
    let tau = config.tau();
    match model {
        ModelKind::Ideal => Ok((
            sp_model_covariance(gamma, tau, gain, 1.0)?,
            ideal_herald_probability(gamma, tau, gain)?,
        )),
        ModelKind::SinglePhoton => {
            let p = sp_model_herald_probability(gamma, tau, gain, config.eta_ancilla)?;
            if !(p > 0.0) {
                return Err(Error::HeraldingImpossible { probability: p });
            }
            let cov = sp_model_covariance(gamma, tau, gain, config.eta_ancilla)?;
            Ok((
                apply_detection_efficiency(&cov, config.eta_a, config.eta_b)?,
                p,
            ))
        }
        ModelKind::FullNumeric => {
            let (state, p) = distilled_state(config, gain)?;
            let cov = covariance_summary(&state)?;
            Ok((
                apply_detection_efficiency(&cov, config.eta_a, config.eta_b)?,
                p,
            ))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub g: f64,
    pub beta: f64,
    pub v_diff: f64,
    pub v_sum: f64,
    pub duan_i: f64,
    pub duan_a_star: f64,
    pub herald_probability: f64,
    pub model: ModelKind,
}

/// A gain at which the row could not be evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowFailure {
    pub g: f64,
    pub model: ModelKind,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub failures: Vec<RowFailure>,
}

pub fn evaluate_row(config: &ScenarioConfig, model: ModelKind, gain: f64) -> Result<SweepRow> {
    let (cov, p) = model_covariance(config, model, gain)?;
    let duan = duan_inseparability(&cov);
    let beta = BetaParam::new(config.beta(gain))?.value();
    let row = SweepRow {
        g: gain,
        beta,
        v_diff: cov.v_diff(),
        v_sum: cov.v_sum(),
        duan_i: duan.value,
        duan_a_star: duan.a_star,
        herald_probability: p,
        model,
    };
    let finite = [
        row.beta,
        row.v_diff,
        row.v_sum,
        row.duan_i,
        row.duan_a_star,
        row.herald_probability,
    ]
    .iter()
    .all(|x| x.is_finite());
    if !finite {
        return Err(Error::InvalidState(format!(
            "non-finite moments at g = {gain}"
        )));
    }
    if !(row.herald_probability > 0.0 && row.herald_probability <= 1.0 + 1e-12) {
        return Err(Error::HeraldingImpossible {
            probability: row.herald_probability,
        });
    }
    Ok(row)
}

/// Evaluates the configured model at every gain. Rows are computed in
/// parallel and returned in gain order; rows that fail are listed in
/// `failures` instead.
pub fn run_scenario(config: &ScenarioConfig) -> Result<SweepResult> {
    run_models(config, &[config.model])
}

/// Like [`run_scenario`] for several models; rows are ordered by gain, then
/// by position in `models`.
pub fn run_models(config: &ScenarioConfig, models: &[ModelKind]) -> Result<SweepResult> {
    config.ensure_valid()?;
    let tasks: Vec<(f64, ModelKind)> = config
        .gain
        .values()
        .into_iter()
        .flat_map(|g| models.iter().map(move |&m| (g, m)))
        .collect();
    let outcomes: Vec<_> = tasks
        .par_iter()
        .map(|&(g, m)| (g, m, evaluate_row(config, m, g)))
        .collect();
    let mut result = SweepResult {
        rows: Vec::new(),
        failures: Vec::new(),
    };
    for (g, model, outcome) in outcomes {
        match outcome {
            Ok(row) => result.rows.push(row),
            Err(e) => result.failures.push(RowFailure {
                g,
                model,
                reason: e.to_string(),
            }),
        }
    }
    Ok(result)
}

/// Metadata of one sampled gain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBlock {
    pub g: f64,
    pub seed: u64,
    pub herald_probability: f64,
    pub model_v_diff: f64,
    pub model_v_sum: f64,
    pub empirical_v_diff: f64,
    pub empirical_v_sum: f64,
    #[serde(skip)]
    pub samples: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub vacuum_radius: f64,
    pub sample_count: usize,
    pub blocks: Vec<SampleBlock>,
}

/// Homodyne samples of the detected distilled state at each configured
/// gain. Block `i` is seeded with `seed + i`.
pub fn run_sampling(config: &ScenarioConfig) -> Result<SampleSet> {
    config.ensure_valid()?;
    if config.model != ModelKind::FullNumeric {
        return Err(Error::Scenario(format!(
            "model: sampling needs full_numeric, got {}",
            config.model
        )));
    }
    let gains = config.gain.values();
    let blocks = gains
        .par_iter()
        .enumerate()
        .map(|(i, &g)| {
            let seed = config.seed.wrapping_add(i as u64);
            let (state, p) = detected_state(config, g)?;
            let cov = covariance_summary(&state)?;
            let samples = sample_quadratures(&state, config.sample_count, seed)?;
            let [_, _, diff, sum] = empirical_moments(&samples);
            Ok(SampleBlock {
                g,
                seed,
                herald_probability: p,
                model_v_diff: cov.v_diff(),
                model_v_sum: cov.v_sum(),
                empirical_v_diff: diff,
                empirical_v_sum: sum,
                samples,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleSet {
        vacuum_radius: VACUUM_RADIUS,
        sample_count: config.sample_count,
        blocks,
    })
}

/// Observed variances at one gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasuredPoint {
    pub g: f64,
    pub v_diff: f64,
    pub v_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceRow {
    pub g: f64,
    pub v_diff: f64,
    pub v_sum: f64,
    pub outcome: EquivalenceOutcome,
}

impl EquivalenceRow {
    pub fn is_infeasible(&self) -> bool {
        self.outcome.is_infeasible()
    }
}

/// Equivalent-state table with `η_A,eq` fixed to the configured `eta_a`.
/// Without `measured` points the configured model sweep supplies the
/// variances.
pub fn run_equivalence(
    config: &ScenarioConfig,
    measured: Option<&[MeasuredPoint]>,
) -> Result<Vec<EquivalenceRow>> {
    config.ensure_valid()?;
    if config.eta_a <= 0.0 {
        return Err(Error::Scenario(
            "eta_a: equivalent state needs eta_a > 0".to_string(),
        ));
    }
    let points: Vec<MeasuredPoint> = match measured {
        Some(points) => points.to_vec(),
        None => run_scenario(config)?
            .rows
            .iter()
            .map(|r| MeasuredPoint {
                g: r.g,
                v_diff: r.v_diff,
                v_sum: r.v_sum,
            })
            .collect(),
    };
    points
        .iter()
        .map(|p| {
            Ok(EquivalenceRow {
                g: p.g,
                v_diff: p.v_diff,
                v_sum: p.v_sum,
                outcome: solve_equivalent(p.v_diff, p.v_sum, config.eta_a)?,
            })
        })
        .collect()
}

/// Formats `x` with 12 significant digits in the style of C's `%.12g`.
pub fn format_sig(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..12).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `x` rounded to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x.is_finite() {
        format_sig(x).parse().unwrap_or(x)
    } else {
        x
    }
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn csv_error(e: csv::Error) -> Error {
    Error::Scenario(format!("csv: {e}"))
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Scenario(format!("json: {e}"))
}

pub fn write_sweep_csv<W: Write>(result: &SweepResult, out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(SWEEP_HEADER).map_err(csv_error)?;
    for r in &result.rows {
        w.write_record([
            format_sig(r.g),
            format_sig(r.beta),
            format_sig(r.v_diff),
            format_sig(r.v_sum),
            format_sig(r.duan_i),
            format_sig(r.duan_a_star),
            format_sig(r.herald_probability),
            r.model.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::Scenario(e.to_string()))
}

pub fn write_equivalence_csv<W: Write>(rows: &[EquivalenceRow], out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(EQUIV_HEADER).map_err(csv_error)?;
    for r in rows {
        let blank = String::new;
        let (status, gamma, eta_a, eta_b, alt_gamma, alt_eta_b) = match &r.outcome {
            EquivalenceOutcome::Solved { state, alternate } => (
                "solved".to_string(),
                format_sig(state.gamma_eq),
                format_sig(state.eta_a_eq),
                format_sig(state.eta_b_eq),
                alternate.map_or_else(blank, |a| format_sig(a.gamma_eq)),
                alternate.map_or_else(blank, |a| format_sig(a.eta_b_eq)),
            ),
            EquivalenceOutcome::Degenerate { eta_a_eq } => (
                "degenerate".to_string(),
                "0".to_string(),
                format_sig(*eta_a_eq),
                blank(),
                blank(),
                blank(),
            ),
            EquivalenceOutcome::Infeasible(reason) => (
                format!("infeasible:{}", infeasibility_tag(reason)),
                blank(),
                blank(),
                blank(),
                blank(),
                blank(),
            ),
        };
        w.write_record([
            format_sig(r.g),
            format_sig(r.v_diff),
            format_sig(r.v_sum),
            status,
            gamma,
            eta_a,
            eta_b,
            alt_gamma,
            alt_eta_b,
        ])
        .map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::Scenario(e.to_string()))
}

fn infeasibility_tag(reason: &crate::equiv::Infeasibility) -> &'static str {
    use crate::equiv::Infeasibility::*;
    match reason {
        NotCorrelated { .. } => "not_correlated",
        NoRoot => "no_root",
        EfficiencyAboveOne { .. } => "eta_b_above_one",
        SqueezingOutOfRange => "gamma_out_of_range",
    }
}

pub fn write_samples_csv<W: Write>(set: &SampleSet, out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(SAMPLE_HEADER).map_err(csv_error)?;
    for block in &set.blocks {
        let g = format_sig(block.g);
        for &(a, b) in &block.samples {
            w.write_record([g.as_str(), &format_sig(a), &format_sig(b)])
                .map_err(csv_error)?;
        }
    }
    w.flush().map_err(|e| Error::Scenario(e.to_string()))
}

/// Reads `g`, `v_diff` and `v_sum` columns by header name; other columns
/// (such as those of a sweep table) are ignored.
pub fn read_measured_csv<R: Read>(input: R) -> Result<Vec<MeasuredPoint>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers().map_err(csv_error)?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Scenario(format!("measured: missing column `{name}`")))
    };
    let (ig, id, is) = (column("g")?, column("v_diff")?, column("v_sum")?);
    let mut points = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(csv_error)?;
        let field = |i: usize, name: &str| -> Result<f64> {
            record
                .get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| {
                    Error::Scenario(format!("measured: row {}: bad `{name}`", line + 1))
                })
        };
        points.push(MeasuredPoint {
            g: field(ig, "g")?,
            v_diff: field(id, "v_diff")?,
            v_sum: field(is, "v_sum")?,
        });
    }
    Ok(points)
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    config: &'a ScenarioConfig,
    #[serde(flatten)]
    body: T,
}

fn write_report<W: Write, T: Serialize>(config: &ScenarioConfig, body: T, mut out: W) -> Result<()> {
    let json = serde_json::to_string_pretty(&Report { config, body }).map_err(json_error)?;
    out.write_all(json.as_bytes())
        .and_then(|_| out.write_all(b"\n"))
        .map_err(|e| Error::Scenario(e.to_string()))
}

impl SweepRow {
    fn rounded(&self) -> Self {
        Self {
            g: round_sig(self.g),
            beta: round_sig(self.beta),
            v_diff: round_sig(self.v_diff),
            v_sum: round_sig(self.v_sum),
            duan_i: round_sig(self.duan_i),
            duan_a_star: round_sig(self.duan_a_star),
            herald_probability: round_sig(self.herald_probability),
            model: self.model,
        }
    }
}

/// JSON report: config echo, rows and failures, values rounded to 12
/// significant digits.
pub fn write_sweep_report<W: Write>(
    config: &ScenarioConfig,
    result: &SweepResult,
    out: W,
) -> Result<()> {
    let rounded = SweepResult {
        rows: result.rows.iter().map(SweepRow::rounded).collect(),
        failures: result
            .failures
            .iter()
            .map(|f| RowFailure {
                g: round_sig(f.g),
                ..f.clone()
            })
            .collect(),
    };
    write_report(config, rounded, out)
}

pub fn write_sample_report<W: Write>(config: &ScenarioConfig, set: &SampleSet, out: W) -> Result<()> {
    let rounded = SampleSet {
        vacuum_radius: round_sig(set.vacuum_radius),
        sample_count: set.sample_count,
        blocks: set
            .blocks
            .iter()
            .map(|b| SampleBlock {
                g: round_sig(b.g),
                seed: b.seed,
                herald_probability: round_sig(b.herald_probability),
                model_v_diff: round_sig(b.model_v_diff),
                model_v_sum: round_sig(b.model_v_sum),
                empirical_v_diff: round_sig(b.empirical_v_diff),
                empirical_v_sum: round_sig(b.empirical_v_sum),
                samples: Vec::new(),
            })
            .collect(),
    };
    write_report(config, rounded, out)
}

pub fn write_equivalence_report<W: Write>(
    config: &ScenarioConfig,
    rows: &[EquivalenceRow],
    out: W,
) -> Result<()> {
    #[derive(Serialize)]
    struct Body {
        rows: Vec<EquivalenceRow>,
    }
    let round_state = |s: crate::equiv::EquivalentState| crate::equiv::EquivalentState {
        gamma_eq: round_sig(s.gamma_eq),
        eta_a_eq: round_sig(s.eta_a_eq),
        eta_b_eq: round_sig(s.eta_b_eq),
    };
    let rows = rows
        .iter()
        .map(|r| EquivalenceRow {
            g: round_sig(r.g),
            v_diff: round_sig(r.v_diff),
            v_sum: round_sig(r.v_sum),
            outcome: match r.outcome {
                EquivalenceOutcome::Solved { state, alternate } => EquivalenceOutcome::Solved {
                    state: round_state(state),
                    alternate: alternate.map(round_state),
                },
                other => other,
            },
        })
        .collect();
    write_report(config, Body { rows }, out)
}
