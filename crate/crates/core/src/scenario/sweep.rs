//! Parameter sweeps: one scenario repeated over a grid of values for a
//! single named parameter, with per-point seed derivation, parallel
//! execution, and a stable CSV rendering.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rx::metrics::MetricsReport;
use crate::scenario::{derive_seed, run_scenario, ScenarioConfig};
use crate::transforms::CompressionFactor;

/// How per-point seeds relate to the scenario's master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedPolicy {
    /// Every point reuses the master seed: noise realizations are common
    /// across the grid, which cancels realization noise out of curve
    /// *shapes* at the cost of correlated points.
    Shared,
    /// Each point derives its own seed from (master, point index):
    /// independent realizations, the default.
    PerPoint,
}

/// A sweep request: which parameter to vary, over which values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Dotted path of the swept field, e.g. `channel.impairments.osnr_db`
    /// or `compression`. See [`apply_parameter`] for the accepted set.
    pub parameter: String,
    /// Grid values, evaluated in the order given.
    pub values: Vec<f64>,
    #[serde(default = "SeedPolicy::default_per_point")]
    pub seed_policy: SeedPolicy,
}

impl SeedPolicy {
    fn default_per_point() -> Self {
        SeedPolicy::PerPoint
    }
}

/// One evaluated grid point: the report, or the error message of the
/// stage that failed. A failed point never aborts the sweep.
#[derive(Debug)]
pub struct SweepPoint {
    pub index: usize,
    pub value: f64,
    pub outcome: std::result::Result<MetricsReport, String>,
}

/// All points of one sweep, in grid order.
#[derive(Debug)]
pub struct SweepResult {
    pub parameter: String,
    pub n_subcarriers: usize,
    pub points: Vec<SweepPoint>,
}

/// Returns `base` with the named parameter set to `value`.
///
/// Accepted paths: `compression` (as a fraction α ≤ 1, matched to a
/// small-denominator rational), `baud`, `pcs_entropy`, `tone_ratio_db`,
/// `fec_threshold_ber`, `channel.fiber.span_count`,
/// `channel.wss.cascade`, `channel.wss.filter_3db_ghz`,
/// `channel.impairments.osnr_db`, `channel.impairments.cfo_hz`,
/// `channel.impairments.linewidth_hz`, `channel.impairments.clock_ppm`,
/// `rx.id_iterations`, `rx.feedback_iteration`.
pub fn apply_parameter(base: &ScenarioConfig, path: &str, value: f64) -> Result<ScenarioConfig> {
    let mut cfg = base.clone();
    match path {
        "compression" => cfg.compression = rational_alpha(value)?,
        "baud" => cfg.baud = value,
        "pcs_entropy" => cfg.pcs_entropy = value,
        "tone_ratio_db" => cfg.tone_ratio_db = value,
        "fec_threshold_ber" => cfg.fec_threshold_ber = value,
        "channel.fiber.span_count" => cfg.channel.fiber.span_count = as_count(path, value)?,
        "channel.wss.cascade" => cfg.channel.wss.cascade = as_count(path, value)?,
        "channel.wss.filter_3db_ghz" => cfg.channel.wss.filter_3db_ghz = value,
        "channel.impairments.osnr_db" => cfg.channel.impairments.osnr_db = value,
        "channel.impairments.cfo_hz" => cfg.channel.impairments.cfo_hz = value,
        "channel.impairments.linewidth_hz" => cfg.channel.impairments.linewidth_hz = value,
        "channel.impairments.clock_ppm" => cfg.channel.impairments.clock_ppm = value,
        "rx.id_iterations" => cfg.rx.id_iterations = as_count(path, value)?,
        "rx.feedback_iteration" => cfg.rx.feedback_iteration = as_count(path, value)?,
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown sweep parameter '{other}'; see apply_parameter for the accepted paths"
            )))
        }
    }
    Ok(cfg)
}

fn as_count(path: &str, value: f64) -> Result<usize> {
    if value < 0.0 || value.fract() != 0.0 || !value.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "{path} needs a non-negative integer, got {value}"
        )));
    }
    Ok(value as usize)
}

/// Finds the smallest-denominator rational b/c (c ≤ 64) within 1e-9 of
/// `alpha`, so grid values like 0.875 map exactly to 7/8.
fn rational_alpha(alpha: f64) -> Result<CompressionFactor> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "compression must lie in (0, 1], got {alpha}"
        )));
    }
    for c in 1..=64u32 {
        let b = (alpha * f64::from(c)).round();
        if b >= 1.0 && (b / f64::from(c) - alpha).abs() < 1e-9 {
            return CompressionFactor::new(b as u32, c);
        }
    }
    Err(Error::InvalidConfig(format!(
        "compression {alpha} has no exact rational form with denominator <= 64"
    )))
}

/// Evaluates every grid point, in parallel, and returns them in grid
/// order. Per-point seeds follow the spec's policy; a failing point
/// becomes an error-marked row rather than aborting the sweep.
pub fn run_sweep(base: &ScenarioConfig, spec: &SweepSpec) -> Result<SweepResult> {
    if spec.values.is_empty() {
        return Err(Error::InvalidConfig("sweep needs at least one value".into()));
    }
    base.validate()?;
    let points: Vec<SweepPoint> = spec
        .values
        .par_iter()
        .enumerate()
        .map(|(index, &value)| {
            let outcome = evaluate_point(base, spec, index, value).map_err(|e| e.to_string());
            SweepPoint {
                index,
                value,
                outcome,
            }
        })
        .collect();
    Ok(SweepResult {
        parameter: spec.parameter.clone(),
        n_subcarriers: base.n_subcarriers,
        points,
    })
}

fn evaluate_point(
    base: &ScenarioConfig,
    spec: &SweepSpec,
    index: usize,
    value: f64,
) -> Result<MetricsReport> {
    let mut cfg = apply_parameter(base, &spec.parameter, value)?;
    if spec.seed_policy == SeedPolicy::PerPoint {
        cfg.seed = derive_seed(base.seed, index as u64, "point");
    }
    Ok(run_scenario(&cfg)?.report)
}

/// Renders a sweep as CSV. Column count is fixed by the subcarrier count
/// of the base config; failed points carry the error text in `status`
/// and leave the numeric fields empty.
pub fn sweep_csv(result: &SweepResult) -> String {
    let mut out = String::new();
    out.push_str("parameter,value,status,pre_fec_ber,post_fec_ber,post_fec_ber_assisted");
    for k in 0..result.n_subcarriers {
        out.push_str(&format!(",ber_sc{k}"));
    }
    out.push_str(
        ",cfo_estimate_hz,residual_cfo_hz,clock_ppm_estimate,demod_complex_mults,demod_complex_adds,seed,config_digest\n",
    );
    for point in &result.points {
        out.push_str(&csv_field(&result.parameter));
        out.push(',');
        out.push_str(&point.value.to_string());
        out.push(',');
        match &point.outcome {
            Ok(r) => {
                out.push_str("ok");
                out.push_str(&format!(",{},{}", r.pre_fec_ber, r.post_fec_ber));
                match r.post_fec_ber_assisted {
                    Some(v) => out.push_str(&format!(",{v}")),
                    None => out.push(','),
                }
                for k in 0..result.n_subcarriers {
                    match r.per_subcarrier_ber.get(k) {
                        Some(v) => out.push_str(&format!(",{v}")),
                        None => out.push(','),
                    }
                }
                out.push_str(&format!(
                    ",{},{},{}",
                    r.cfo_estimate_hz, r.residual_cfo_hz, r.clock_ppm_estimate
                ));
                match r.demod_complex_mults {
                    Some(v) => out.push_str(&format!(",{v}")),
                    None => out.push(','),
                }
                match r.demod_complex_adds {
                    Some(v) => out.push_str(&format!(",{v}")),
                    None => out.push(','),
                }
                out.push_str(&format!(",{},{}", r.seed, r.config_digest));
            }
            Err(msg) => {
                out.push_str(&csv_field(&format!("error: {msg}")));
                // Three fixed BER columns + per-subcarrier + three offset
                // estimates + two op counts + seed + digest stay empty.
                for _ in 0..(3 + result.n_subcarriers + 3 + 2 + 2) {
                    out.push(',');
                }
            }
        }
        out.push('\n');
    }
    out
}

fn csv_field(text: &str) -> String {
    if text.contains(',') || text.contains('"') || text.contains('\n') {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

/// Interpolates the abscissa at which a monotonically falling BER curve
/// crosses `threshold`, linearly in log10(BER). `points` are (value,
/// BER) pairs, e.g. (OSNR in dB, pre-FEC BER); zero BERs are floored at
/// 1e-12 for the interpolation. Returns `None` when the curve never
/// crosses the threshold.
pub fn rosnr_at_threshold(points: &[(f64, f64)], threshold: f64) -> Option<f64> {
    if !(threshold > 0.0) {
        return None;
    }
    let mut sorted: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, b)| x.is_finite() && b.is_finite() && *b >= 0.0)
        .copied()
        .collect();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let log_t = threshold.log10();
    let log_ber = |b: f64| b.max(1e-12).log10();
    for pair in sorted.windows(2) {
        let (x0, b0) = pair[0];
        let (x1, b1) = pair[1];
        let (l0, l1) = (log_ber(b0), log_ber(b1));
        if (l0 - log_t) * (l1 - log_t) <= 0.0 {
            if (l1 - l0).abs() < 1e-12 {
                return Some(x0);
            }
            return Some(x0 + (x1 - x0) * (log_t - l0) / (l1 - l0));
        }
    }
    None
}
