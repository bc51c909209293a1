//! Config-driven experiment runner.
//!
//! An [`ExperimentConfig`] (JSON, units spelled out in the field names)
//! describes a family of encode/reconstruct runs: a bandlimited noise
//! source per seed, an encoder parameter sweep, and the set of decoders to
//! race. [`run_experiment`] executes seeds x parameter points on a bounded
//! worker pool and aggregates SER traces into a [`ResultBundle`];
//! [`emit`] writes `results.csv` / `summary.csv` or `results.json`.
//!
//! Reruns of the same config produce byte-identical output: runs are keyed
//! (point, seed, decoder) rather than appended in completion order, the RNG
//! is seeded per run, and wall times are reported as 0.0 except for the
//! `timing` experiment kind, whose whole point is the clock (its output is
//! exempt from byte-stability).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};

use crate::encoder::encode;
use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::reconstruction::{
    reconstruct_bia, reconstruct_iasr, reconstruct_voronoi, IASRConfig, ReconstructionReport,
    ReconstructionSetup,
};
use crate::signal::BandlimitedSignal;

// ─── Config types ───────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    SweepDelta,
    SweepAlpha,
    SweepBandwidth,
    FixedDensity,
    Timing,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::SweepDelta => "sweep_delta",
            Self::SweepAlpha => "sweep_alpha",
            Self::SweepBandwidth => "sweep_bandwidth",
            Self::FixedDensity => "fixed_density",
            Self::Timing => "timing",
        }
    }
}

fn one_or_many<'de, D, T>(deserializer: D) -> std::result::Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany<T> {
        One(T),
        Many(Vec<T>),
    }
    Ok(match OneOrMany::deserialize(deserializer)? {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(v) => v,
    })
}

fn opt_one_or_many<'de, D, T>(deserializer: D) -> std::result::Result<Option<Vec<T>>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany<T> {
        One(T),
        Many(Vec<T>),
    }
    Ok(Option::<OneOrMany<T>>::deserialize(deserializer)?.map(|v| match v {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(v) => v,
    }))
}

/// Source-signal family: seeded bandlimited white noise with sup-norm `amp`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalSpec {
    /// Band edge(s) in rad/s; a list only for `sweep_bandwidth`.
    #[serde(deserialize_with = "one_or_many")]
    pub sigma_rad_s: Vec<f64>,
    pub period_s: f64,
    pub amp: f64,
}

/// Encoder sweep: slopes plus level spacings, the latter either directly
/// (`delta_amp`) or as integer crossings per period (`crossings_per_period`,
/// giving `delta = alpha*T/N` exactly).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncoderSpec {
    #[serde(deserialize_with = "one_or_many")]
    pub alpha_per_s: Vec<f64>,
    #[serde(default, deserialize_with = "opt_one_or_many")]
    pub delta_amp: Option<Vec<f64>>,
    #[serde(default, deserialize_with = "opt_one_or_many")]
    pub crossings_per_period: Option<Vec<u64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoderFlags {
    #[serde(default = "default_true")]
    pub bia: bool,
    #[serde(default = "default_true")]
    pub iasr: bool,
    #[serde(default = "default_true")]
    pub voronoi: bool,
}

fn default_true() -> bool {
    true
}

impl Default for DecoderFlags {
    fn default() -> Self {
        Self { bia: true, iasr: true, voronoi: true }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Reconstruction grid length over one period.
    #[serde(default = "default_rec_len")]
    pub reconstruction_len: usize,
    /// Dense u-grid length for residual interpolation; 0 = automatic.
    #[serde(default)]
    pub dense_u_len: usize,
}

fn default_rec_len() -> usize {
    1024
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { reconstruction_len: default_rec_len(), dense_u_len: 0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub experiment_kind: ExperimentKind,
    pub seeds: Vec<u64>,
    pub signal: SignalSpec,
    pub encoder: EncoderSpec,
    #[serde(default)]
    pub decoders: DecoderFlags,
    /// Iteration budget for IASR and Voronoi.
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    /// IASR stopping threshold; absent means "run the full budget".
    #[serde(default)]
    pub epsilon_l2: Option<f64>,
    #[serde(default)]
    pub grids: GridSpec,
}

fn default_iterations() -> usize {
    8
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        cfg.expand_points()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Validate and expand the sweep into concrete run points. All checks
    /// happen here, before any numerical work.
    pub fn expand_points(&self) -> Result<Vec<RunPoint>> {
        if self.seeds.is_empty() {
            return Err(Error::ConfigInvalid("seeds list is empty".into()));
        }
        if self.name.trim().is_empty() {
            return Err(Error::ConfigInvalid("experiment name is empty".into()));
        }
        if self.iterations < 1 {
            return Err(Error::ConfigInvalid("iterations must be >= 1".into()));
        }
        if let Some(eps) = self.epsilon_l2 {
            if eps.is_nan() || eps < 0.0 {
                return Err(Error::ConfigInvalid(format!("epsilon_l2 must be >= 0, got {eps}")));
            }
        }
        let t = self.signal.period_s;
        let a = self.signal.amp;
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::ConfigInvalid(format!("period_s must be positive, got {t}")));
        }
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::ConfigInvalid(format!("amp must be positive, got {a}")));
        }
        if self.grids.reconstruction_len < 4 {
            return Err(Error::ConfigInvalid("reconstruction_len must be >= 4".into()));
        }
        for &s in &self.signal.sigma_rad_s {
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::ConfigInvalid(format!("sigma_rad_s must be positive, got {s}")));
            }
        }

        let alphas = &self.encoder.alpha_per_s;
        if alphas.is_empty() {
            return Err(Error::ConfigInvalid("alpha_per_s list is empty".into()));
        }
        let sigmas = &self.signal.sigma_rad_s;

        // resolve the level spacings
        let deltas_for = |alpha: f64| -> Result<Vec<f64>> {
            match (&self.encoder.delta_amp, &self.encoder.crossings_per_period) {
                (Some(_), Some(_)) => Err(Error::ConfigInvalid(
                    "give either delta_amp or crossings_per_period, not both".into(),
                )),
                (Some(d), None) => Ok(d.clone()),
                (None, Some(ns)) => ns
                    .iter()
                    .map(|&n| {
                        if n < 2 {
                            Err(Error::ConfigInvalid(format!(
                                "crossings_per_period must be >= 2, got {n}"
                            )))
                        } else {
                            Ok(alpha * t / n as f64)
                        }
                    })
                    .collect(),
                (None, None) => Err(Error::ConfigInvalid(
                    "encoder needs delta_amp or crossings_per_period".into(),
                )),
            }
        };

        let single = |list: &[f64], what: &str| -> Result<f64> {
            if list.len() != 1 {
                return Err(Error::ConfigInvalid(format!(
                    "{} expects exactly one {what}, got {}",
                    self.experiment_kind.as_str(),
                    list.len()
                )));
            }
            Ok(list[0])
        };

        let mut raw: Vec<(f64, f64, f64)> = Vec::new(); // (alpha, delta, sigma)
        match self.experiment_kind {
            ExperimentKind::SweepDelta => {
                let alpha = single(alphas, "alpha_per_s")?;
                let sigma = single(sigmas, "sigma_rad_s")?;
                for d in deltas_for(alpha)? {
                    raw.push((alpha, d, sigma));
                }
            }
            ExperimentKind::SweepAlpha => {
                let sigma = single(sigmas, "sigma_rad_s")?;
                let deltas = self.encoder.delta_amp.as_deref().ok_or_else(|| {
                    Error::ConfigInvalid(
                        "sweep_alpha varies alpha at fixed delta; give delta_amp".into(),
                    )
                })?;
                let delta = single(deltas, "delta_amp")?;
                for &alpha in alphas {
                    raw.push((alpha, delta, sigma));
                }
            }
            ExperimentKind::SweepBandwidth => {
                let alpha = single(alphas, "alpha_per_s")?;
                let deltas = deltas_for(alpha)?;
                let delta = single(&deltas, "level spacing")?;
                for &sigma in sigmas {
                    raw.push((alpha, delta, sigma));
                }
            }
            ExperimentKind::FixedDensity => {
                let sigma = single(sigmas, "sigma_rad_s")?;
                match (&self.encoder.delta_amp, &self.encoder.crossings_per_period) {
                    (Some(deltas), None) => {
                        if deltas.len() != alphas.len() {
                            return Err(Error::ConfigInvalid(format!(
                                "fixed_density zips alpha_per_s with delta_amp: {} vs {}",
                                alphas.len(),
                                deltas.len()
                            )));
                        }
                        for (&alpha, &delta) in alphas.iter().zip(deltas) {
                            raw.push((alpha, delta, sigma));
                        }
                    }
                    (None, Some(ns)) => {
                        let n = if ns.len() == 1 {
                            ns[0]
                        } else {
                            return Err(Error::ConfigInvalid(
                                "fixed_density takes one crossings_per_period for all alphas"
                                    .into(),
                            ));
                        };
                        if n < 2 {
                            return Err(Error::ConfigInvalid(format!(
                                "crossings_per_period must be >= 2, got {n}"
                            )));
                        }
                        for &alpha in alphas {
                            raw.push((alpha, alpha * t / n as f64, sigma));
                        }
                    }
                    _ => {
                        return Err(Error::ConfigInvalid(
                            "fixed_density needs delta_amp (zipped) or one crossings_per_period"
                                .into(),
                        ))
                    }
                }
            }
            ExperimentKind::Timing => {
                let alpha = single(alphas, "alpha_per_s")?;
                let sigma = single(sigmas, "sigma_rad_s")?;
                let deltas = deltas_for(alpha)?;
                let delta = single(&deltas, "level spacing")?;
                raw.push((alpha, delta, sigma));
            }
        }

        let mut points = Vec::with_capacity(raw.len());
        for (idx, (alpha, delta, sigma)) in raw.into_iter().enumerate() {
            if !(alpha > 0.0) || !alpha.is_finite() {
                return Err(Error::ConfigInvalid(format!(
                    "point {idx}: alpha_per_s must be positive, got {alpha}"
                )));
            }
            if alpha <= a * sigma {
                return Err(Error::ConfigInvalid(format!(
                    "point {idx}: alpha = {alpha} does not exceed A*sigma = {}; the ramp sum \
                     would not be monotone",
                    a * sigma
                )));
            }
            if !(delta > 0.0) || !delta.is_finite() {
                return Err(Error::ConfigInvalid(format!(
                    "point {idx}: delta_amp must be positive, got {delta}"
                )));
            }
            let ratio = alpha * t / delta;
            let n = ratio.round();
            if n < 2.0 || (ratio - n).abs() > 1e-9 * ratio {
                return Err(Error::ConfigInvalid(format!(
                    "point {idx}: alpha*T/delta = {ratio} must be an integer >= 2"
                )));
            }
            let nyquist = std::f64::consts::PI * self.grids.reconstruction_len as f64 / t;
            if nyquist <= sigma {
                return Err(Error::ConfigInvalid(format!(
                    "point {idx}: reconstruction grid Nyquist {nyquist} rad/s does not clear \
                     sigma = {sigma}"
                )));
            }
            let n_crossings = n as usize;
            let density_ratio = (n_crossings as f64 / t) / (sigma / std::f64::consts::PI);
            points.push(RunPoint {
                index: idx,
                alpha,
                delta,
                sigma,
                n_crossings,
                density_ratio,
                near_landau: (1.0..=1.3).contains(&density_ratio),
            });
        }

        if self.experiment_kind == ExperimentKind::FixedDensity {
            let n0 = points[0].n_crossings;
            if points.iter().any(|p| p.n_crossings != n0) {
                return Err(Error::ConfigInvalid(
                    "fixed_density requires alpha*T/delta constant across the sweep".into(),
                ));
            }
        }
        Ok(points)
    }
}

/// One concrete (alpha, delta, sigma) combination of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct RunPoint {
    pub index: usize,
    pub alpha: f64,
    pub delta: f64,
    pub sigma: f64,
    pub n_crossings: usize,
    /// Crossing density over the Landau density sigma/pi.
    pub density_ratio: f64,
    pub near_landau: bool,
}

// ─── Results ────────────────────────────────────────────────────────────────

#[derive(Debug, Clone, Serialize)]
pub struct TraceEntry {
    pub iteration: usize,
    /// SER in dB; saturated entries are serialized as null.
    #[serde(serialize_with = "ser_db_json")]
    pub ser_db: f64,
    pub saturated: bool,
    pub wall_time_s: f64,
}

fn ser_db_json<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_some(v)
    } else {
        s.serialize_none()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub point_index: usize,
    pub seed: u64,
    pub alpha: f64,
    pub delta: f64,
    pub sigma: f64,
    pub decoder: String,
    pub density_ratio: f64,
    pub near_landau: bool,
    pub status: String,
    pub trace: Vec<TraceEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FailureRecord {
    pub point_index: usize,
    pub seed: u64,
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub point_index: usize,
    pub alpha: f64,
    pub delta: f64,
    pub sigma: f64,
    pub decoder: String,
    pub iteration: usize,
    /// Mean over seeds with finite SER; null when every seed saturated.
    #[serde(serialize_with = "opt_json")]
    pub mean_ser_db: Option<f64>,
    #[serde(serialize_with = "opt_json")]
    pub std_ser_db: Option<f64>,
    pub n_finite: usize,
    pub n_saturated: usize,
}

fn opt_json<S: serde::Serializer>(
    v: &Option<f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.serialize_some(x),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultBundle {
    pub config: ExperimentConfig,
    pub points: Vec<RunPoint>,
    pub runs: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
    pub failures: Vec<FailureRecord>,
}

// ─── Runner ─────────────────────────────────────────────────────────────────

fn record_from_report(
    point: &RunPoint,
    seed: u64,
    report: &ReconstructionReport,
    keep_wall_times: bool,
) -> RunRecord {
    let trace = report
        .ser_per_iteration
        .iter()
        .zip(&report.wall_time_per_iteration)
        .enumerate()
        .map(|(i, (&ser, &wall))| TraceEntry {
            iteration: i + 1,
            ser_db: ser,
            saturated: ser == f64::INFINITY,
            wall_time_s: if keep_wall_times { wall } else { 0.0 },
        })
        .collect();
    RunRecord {
        point_index: point.index,
        seed,
        alpha: point.alpha,
        delta: point.delta,
        sigma: point.sigma,
        decoder: report.method.to_string(),
        density_ratio: point.density_ratio,
        near_landau: point.near_landau,
        status: report.status.to_string(),
        trace,
    }
}

fn run_one(
    cfg: &ExperimentConfig,
    point: &RunPoint,
    seed: u64,
) -> (Vec<RunRecord>, Vec<FailureRecord>) {
    let mut records = Vec::new();
    let mut failures = Vec::new();
    let fail = |stage: &str, e: Error| FailureRecord {
        point_index: point.index,
        seed,
        stage: stage.into(),
        message: e.to_string(),
    };
    let keep_wall = cfg.experiment_kind == ExperimentKind::Timing;

    let f = match BandlimitedSignal::synth_noise(
        seed,
        point.sigma,
        cfg.signal.period_s,
        cfg.signal.amp,
    ) {
        Ok(f) => f,
        Err(e) => return (records, vec![fail("synth", e)]),
    };
    let seq = match encode(&f, point.alpha, point.delta, 1e-12, 200) {
        Ok(s) => s,
        Err(e) => return (records, vec![fail("encode", e)]),
    };
    let n_rec = cfg.grids.reconstruction_len;
    let reference = match f.samples(n_rec) {
        Ok(r) => r,
        Err(e) => return (records, vec![fail("reference", e)]),
    };
    let rec_grid = match UniformGrid::over_period(cfg.signal.period_s, n_rec) {
        Ok(g) => g,
        Err(e) => return (records, vec![fail("grid", e)]),
    };
    let mut setup = match ReconstructionSetup::new(rec_grid, &reference) {
        Ok(s) => s,
        Err(e) => return (records, vec![fail("setup", e)]),
    };
    setup.dense_u_len = cfg.grids.dense_u_len;

    if cfg.decoders.bia {
        match reconstruct_bia(&seq, point.sigma, &setup) {
            Ok(report) => records.push(record_from_report(point, seed, &report, keep_wall)),
            Err(e) => failures.push(fail("bia", e)),
        }
    }
    if cfg.decoders.iasr {
        let iasr_cfg = IASRConfig {
            max_iterations_k: cfg.iterations,
            epsilon: cfg.epsilon_l2.unwrap_or(f64::INFINITY),
            lpf_cutoff_sigma: point.sigma,
        };
        match reconstruct_iasr(&seq, &iasr_cfg, &setup) {
            Ok(report) => records.push(record_from_report(point, seed, &report, keep_wall)),
            Err(e) => failures.push(fail("iasr", e)),
        }
    }
    if cfg.decoders.voronoi {
        match reconstruct_voronoi(&seq, point.sigma, cfg.iterations, &setup) {
            Ok(report) => records.push(record_from_report(point, seed, &report, keep_wall)),
            Err(e) => failures.push(fail("voronoi", e)),
        }
    }
    (records, failures)
}

/// Run every seed x sweep point on a bounded worker pool (`workers = 0`
/// uses the machine default). Per-run failures land in `bundle.failures`;
/// only an invalid config errors out.
pub fn run_experiment(cfg: &ExperimentConfig, workers: usize) -> Result<ResultBundle> {
    let points = cfg.expand_points()?;
    let tasks: Vec<(usize, u64)> = points
        .iter()
        .flat_map(|p| cfg.seeds.iter().map(move |&s| (p.index, s)))
        .collect();

    let run_all = || -> Vec<(Vec<RunRecord>, Vec<FailureRecord>)> {
        tasks
            .par_iter()
            .map(|&(pi, seed)| run_one(cfg, &points[pi], seed))
            .collect()
    };
    let outcomes = if workers == 0 {
        run_all()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::ConfigInvalid(format!("worker pool: {e}")))?;
        pool.install(run_all)
    };

    let mut runs: Vec<RunRecord> = Vec::new();
    let mut failures: Vec<FailureRecord> = Vec::new();
    for (r, f) in outcomes {
        runs.extend(r);
        failures.extend(f);
    }
    // keyed ordering, independent of worker scheduling
    runs.sort_by(|x, y| {
        (x.point_index, x.seed, x.decoder.as_str()).cmp(&(y.point_index, y.seed, y.decoder.as_str()))
    });
    failures.sort_by(|x, y| {
        (x.point_index, x.seed, x.stage.as_str()).cmp(&(y.point_index, y.seed, y.stage.as_str()))
    });

    // aggregate mean/std over seeds per (point, decoder, iteration)
    let mut cells: BTreeMap<(usize, String, usize), Vec<f64>> = BTreeMap::new();
    for run in &runs {
        for entry in &run.trace {
            cells
                .entry((run.point_index, run.decoder.clone(), entry.iteration))
                .or_default()
                .push(entry.ser_db);
        }
    }
    let summary = cells
        .into_iter()
        .map(|((pi, decoder, iteration), sers)| {
            let finite: Vec<f64> = sers.iter().copied().filter(|v| v.is_finite()).collect();
            let n_saturated = sers.iter().filter(|v| **v == f64::INFINITY).count();
            let (mean, std) = if finite.is_empty() {
                (None, None)
            } else {
                let n = finite.len() as f64;
                let mean = finite.iter().sum::<f64>() / n;
                let var = finite.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                    / (n - 1.0).max(1.0);
                (Some(mean), Some(var.sqrt()))
            };
            let p = &points[pi];
            SummaryRow {
                point_index: pi,
                alpha: p.alpha,
                delta: p.delta,
                sigma: p.sigma,
                decoder,
                iteration,
                mean_ser_db: mean,
                std_ser_db: std,
                n_finite: finite.len(),
                n_saturated,
            }
        })
        .collect();

    Ok(ResultBundle { config: cfg.clone(), points, runs, summary, failures })
}

// ─── Emission ───────────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Csv,
    Json,
}

impl std::str::FromStr for EmitFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::ConfigInvalid(format!(
                "unknown format '{other}', expected csv or json"
            ))),
        }
    }
}

pub fn results_csv(bundle: &ResultBundle) -> String {
    let mut out = String::from(
        "experiment,seed,alpha,delta,sigma,decoder,iteration,ser_db,wall_time_s\n",
    );
    let name = &bundle.config.name;
    for run in &bundle.runs {
        for e in &run.trace {
            out.push_str(&format!(
                "{name},{},{},{},{},{},{},{},{}\n",
                run.seed, run.alpha, run.delta, run.sigma, run.decoder, e.iteration, e.ser_db,
                e.wall_time_s
            ));
        }
    }
    out
}

pub fn summary_csv(bundle: &ResultBundle) -> String {
    let mut out = String::from(
        "experiment,alpha,delta,sigma,decoder,iteration,mean_ser_db,std_ser_db,n_finite,n_saturated\n",
    );
    let name = &bundle.config.name;
    for row in &bundle.summary {
        let fmt_opt = |v: Option<f64>| v.map_or_else(|| "inf".to_string(), |x| x.to_string());
        out.push_str(&format!(
            "{name},{},{},{},{},{},{},{},{},{}\n",
            row.alpha,
            row.delta,
            row.sigma,
            row.decoder,
            row.iteration,
            fmt_opt(row.mean_ser_db),
            fmt_opt(row.std_ser_db),
            row.n_finite,
            row.n_saturated
        ));
    }
    out
}

/// Write the bundle into `out_dir`: `results.csv` + `summary.csv` for CSV,
/// `results.json` (config embedded) for JSON. Returns the written paths.
pub fn emit(bundle: &ResultBundle, format: EmitFormat, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    match format {
        EmitFormat::Csv => {
            let results = out_dir.join("results.csv");
            std::fs::write(&results, results_csv(bundle))?;
            written.push(results);
            let summary = out_dir.join("summary.csv");
            std::fs::write(&summary, summary_csv(bundle))?;
            written.push(summary);
        }
        EmitFormat::Json => {
            let path = out_dir.join("results.json");
            std::fs::write(&path, serde_json::to_string_pretty(bundle)?)?;
            written.push(path);
        }
    }
    Ok(written)
}
