//! Monte-Carlo runs, result tables and output files.
//!
//! Every realization draws its scenario from its own generator stream keyed
//! by `(master_seed, realization)`, so results do not depend on how the
//! pool schedules work. All sweep values share the same streams, which pairs
//! realizations across the sweep.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{sample_scenario_seeded, Scenario, ScenarioConfig};
use crate::ci::{run_ci, CiError};
use crate::jcj::{
    lower_bound_power, run_jcj, ErrorScale, EtaSweep, JcjError, JcjOptions, DEFAULT_PHI,
};
use crate::linalg::ComplexMatrix;
use crate::metrics::{
    empirical_cdf, realization_metrics, threshold_errors, CdfSeries, RealizationResult,
    SchemeStatus,
};
use crate::sdp::{SolveStatus, SolverOptions};
use crate::units::{linear_to_db, mw_to_dbm};

pub const CSV_VERSION: &str = "v1";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid `{key}`: {msg}")]
    Invalid { key: String, msg: String },
}

fn invalid(key: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        msg: msg.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Jcj,
    Ci,
    /// The relaxation bound, needed for the power-error metrics.
    Sdr,
}

impl Scheme {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "jcj" => Some(Scheme::Jcj),
            "ci" => Some(Scheme::Ci),
            "sdr" => Some(Scheme::Sdr),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Jcj => "jcj",
            Scheme::Ci => "ci",
            Scheme::Sdr => "sdr",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    NTx,
    NUe,
    NUav,
    RTh,
    GammaThDb,
    EavesPowerDbm,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 6] = [
        SweepAxis::NTx,
        SweepAxis::NUe,
        SweepAxis::NUav,
        SweepAxis::RTh,
        SweepAxis::GammaThDb,
        SweepAxis::EavesPowerDbm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::NTx => "n_tx",
            SweepAxis::NUe => "n_ue",
            SweepAxis::NUav => "n_uav",
            SweepAxis::RTh => "r_th",
            SweepAxis::GammaThDb => "gamma_th_db",
            SweepAxis::EavesPowerDbm => "eaves_power_dbm",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.as_str() == s.trim())
    }

    fn is_count(self) -> bool {
        matches!(self, SweepAxis::NTx | SweepAxis::NUe | SweepAxis::NUav)
    }

    /// Scenario parameters at sweep value `v`.
    pub fn apply(self, base: &ScenarioConfig, v: f64) -> ScenarioConfig {
        let mut c = base.clone();
        match self {
            SweepAxis::NTx => c.n_tx = v as usize,
            SweepAxis::NUe => c.n_ue = v as usize,
            SweepAxis::NUav => c.n_uav = v as usize,
            SweepAxis::RTh => c.r_th = v,
            SweepAxis::GammaThDb => c.gamma_th_db = v,
            SweepAxis::EavesPowerDbm => c.eaves_power_dbm = v,
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

/// Everything that determines a run. Loaded from TOML; CLI flags override
/// file values, which override the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub realizations: usize,
    pub master_seed: u64,
    pub schemes: Vec<Scheme>,
    pub phi: Vec<f64>,
    pub error_scale: ErrorScale,
    /// Worker threads; 0 lets the pool decide.
    pub threads: usize,
    pub output_dir: PathBuf,
    pub scenario: ScenarioConfig,
    pub sweep: Option<SweepConfig>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            realizations: 200,
            master_seed: 1,
            schemes: vec![Scheme::Jcj, Scheme::Ci, Scheme::Sdr],
            phi: DEFAULT_PHI.to_vec(),
            error_scale: ErrorScale::Relative,
            threads: 0,
            output_dir: PathBuf::from("results"),
            scenario: ScenarioConfig::default(),
            sweep: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        let c: Self = toml::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serialises to TOML")
    }

    /// SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> String {
        format!("{:x}", Sha256::digest(self.to_toml_string().as_bytes()))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.realizations == 0 {
            return Err(invalid("realizations", "must be at least 1"));
        }
        if self.schemes.is_empty() {
            return Err(invalid("schemes", "must name at least one scheme"));
        }
        EtaSweep::new(self.phi.clone()).map_err(|_| {
            invalid(
                "phi",
                "must be a nonempty, strictly increasing list in (0, 1)",
            )
        })?;
        for cfg in self.sweep_scenarios()? {
            cfg.validate()
                .map_err(|e| invalid("scenario", e.to_string()))?;
        }
        Ok(())
    }

    fn sweep_scenarios(&self) -> Result<Vec<ScenarioConfig>, ConfigError> {
        let Some(sweep) = &self.sweep else {
            return Ok(vec![self.scenario.clone()]);
        };
        if sweep.values.is_empty() {
            return Err(invalid("sweep.values", "must be nonempty"));
        }
        sweep
            .values
            .iter()
            .map(|&v| {
                let whole = v >= 0.0 && v.fract() == 0.0;
                if !v.is_finite() || (sweep.axis.is_count() && !whole) {
                    return Err(invalid(
                        "sweep.values",
                        format!("{v} is not valid for {}", sweep.axis.as_str()),
                    ));
                }
                Ok(sweep.axis.apply(&self.scenario, v))
            })
            .collect()
    }

    pub fn runs(&self, scheme: Scheme) -> bool {
        self.schemes.contains(&scheme)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub sweep_value: Option<f64>,
    pub realization: u64,
    pub metrics: RealizationResult,
    pub chosen_eta: Option<f64>,
    pub rank_one_ratio: Option<f64>,
    /// Beamformers kept in memory for spot checks; not written to CSV.
    pub jcj_f: Option<ComplexMatrix>,
    pub ci_f: Option<ComplexMatrix>,
    /// Why the scenario could not be drawn, if it could not.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub sweep_axis: Option<SweepAxis>,
    pub master_seed: u64,
    pub rows: Vec<ResultRow>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    sweep_axis: &'a str,
    sweep_value: Option<f64>,
    realization: u64,
    master_seed: u64,
    jcj_status: &'a str,
    ci_status: &'a str,
    sdr_status: &'a str,
    chosen_eta: Option<f64>,
    rank_one_ratio: Option<f64>,
    jcj_power_mw: Option<f64>,
    jcj_power_dbm: Option<f64>,
    ci_power_mw: Option<f64>,
    ci_power_dbm: Option<f64>,
    sdr_power_mw: Option<f64>,
    sdr_power_dbm: Option<f64>,
    power_difference_db: Option<f64>,
    rate_error: Option<f64>,
    sinr_error_db: Option<f64>,
    power_error_mw: Option<f64>,
    power_error_dbm: Option<f64>,
    normalized_power_error: Option<f64>,
    normalized_power_error_db: Option<f64>,
    ci_rate_error: Option<f64>,
    ci_sinr_error_db: Option<f64>,
    error: &'a str,
}

/// Per-realization quantities plotted as CDFs, with axis labels.
pub const CDF_METRICS: [(&str, &str); 6] = [
    ("rate_error", "rate error (bit/s/Hz)"),
    ("sinr_error_db", "SINR error (dB)"),
    ("power_error_dbm", "power error (dBm)"),
    ("normalized_power_error_db", "normalized power error (dB)"),
    ("power_difference_db", "CI minus JCJ power (dB)"),
    ("jcj_power_dbm", "JCJ transmit power (dBm)"),
];

impl ResultRow {
    /// Value of one of [`CDF_METRICS`].
    pub fn metric(&self, name: &str) -> Option<f64> {
        let m = &self.metrics;
        match name {
            "rate_error" => m.rate_error,
            "sinr_error_db" => m.sinr_error_db,
            "power_error_dbm" => m.power_error_mw.map(mw_to_dbm),
            "normalized_power_error_db" => m.normalized_power_error.map(linear_to_db),
            "power_difference_db" => m.power_difference_db(),
            "jcj_power_dbm" => m.jcj_power_mw.map(mw_to_dbm),
            _ => None,
        }
        .filter(|v| v.is_finite())
    }
}

impl ResultTable {
    pub fn to_csv_string(&self) -> String {
        let axis = self.sweep_axis.map_or("", SweepAxis::as_str);
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            let m = &r.metrics;
            w.serialize(CsvRow {
                sweep_axis: axis,
                sweep_value: r.sweep_value,
                realization: r.realization,
                master_seed: self.master_seed,
                jcj_status: m.jcj_status.as_str(),
                ci_status: m.ci_status.as_str(),
                sdr_status: m.sdr_status.as_str(),
                chosen_eta: r.chosen_eta,
                rank_one_ratio: r.rank_one_ratio,
                jcj_power_mw: m.jcj_power_mw,
                jcj_power_dbm: m.jcj_power_mw.map(mw_to_dbm),
                ci_power_mw: m.ci_power_mw,
                ci_power_dbm: m.ci_power_mw.map(mw_to_dbm),
                sdr_power_mw: m.sdr_power_mw,
                sdr_power_dbm: m.sdr_power_mw.map(mw_to_dbm),
                power_difference_db: m.power_difference_db(),
                rate_error: m.rate_error,
                sinr_error_db: m.sinr_error_db,
                power_error_mw: m.power_error_mw,
                power_error_dbm: m.power_error_mw.map(mw_to_dbm),
                normalized_power_error: m.normalized_power_error,
                normalized_power_error_db: m.normalized_power_error.map(linear_to_db),
                ci_rate_error: m.ci_rate_error,
                ci_sinr_error_db: m.ci_sinr_error_db,
                error: r.error.as_deref().unwrap_or(""),
            })
            .expect("in-memory CSV write");
        }
        let body =
            String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("CSV is UTF-8");
        format!("# jcj results {CSV_VERSION}\n{body}")
    }

    /// Sweep values in table order, `None` once when there is no sweep.
    pub fn groups(&self) -> Vec<Option<f64>> {
        let mut out: Vec<Option<f64>> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.sweep_value) {
                out.push(r.sweep_value);
            }
        }
        out
    }

    /// Finite values of a metric for one sweep group.
    pub fn series(&self, metric: &str, group: Option<f64>) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.sweep_value == group)
            .filter_map(|r| r.metric(metric))
            .collect()
    }

    /// True when JCJ ran on every row and failed as infeasible on all.
    pub fn all_jcj_infeasible(&self) -> bool {
        !self.rows.is_empty()
            && self
                .rows
                .iter()
                .all(|r| r.metrics.jcj_status == SchemeStatus::Infeasible)
    }
}

fn jcj_status(e: &JcjError) -> SchemeStatus {
    match e {
        JcjError::AllEtaInfeasible(_) | JcjError::Unsolved(SolveStatus::Infeasible) => {
            SchemeStatus::Infeasible
        }
        _ => SchemeStatus::Failed,
    }
}

/// Runs the requested schemes on one scenario.
pub fn run_realization(scenario: &Scenario, config: &ExperimentConfig) -> ResultRow {
    let solver = SolverOptions::default();
    let sweep = EtaSweep::new(config.phi.clone()).unwrap_or_default();
    let mut row = ResultRow {
        sweep_value: None,
        realization: 0,
        metrics: RealizationResult::default(),
        chosen_eta: None,
        rank_one_ratio: None,
        jcj_f: None,
        ci_f: None,
        error: None,
    };
    let (mut jcj_st, mut ci_st, mut sdr_st) = (
        SchemeStatus::NotRun,
        SchemeStatus::NotRun,
        SchemeStatus::NotRun,
    );
    if config.runs(Scheme::Jcj) {
        let opts = JcjOptions {
            solver: solver.clone(),
            error_scale: config.error_scale,
            parallel: false,
            ..Default::default()
        };
        match run_jcj(scenario, &sweep, &opts) {
            Ok(bf) => {
                jcj_st = SchemeStatus::Ok;
                row.chosen_eta = bf.chosen_eta;
                row.rank_one_ratio = bf.rank_one_ratio;
                row.jcj_f = Some(bf.f);
            }
            Err(e) => {
                log::debug!("jcj: {e}");
                jcj_st = jcj_status(&e);
            }
        }
    }
    if config.runs(Scheme::Ci) {
        match run_ci(scenario) {
            Ok(ci) => {
                ci_st = SchemeStatus::Ok;
                row.ci_f = Some(ci.f);
            }
            Err(CiError::DimensionExceeded { .. }) => ci_st = SchemeStatus::DimensionExceeded,
            Err(CiError::RankDeficient) => ci_st = SchemeStatus::RankDeficient,
            Err(_) => ci_st = SchemeStatus::Failed,
        }
    }
    let mut sdr = None;
    if config.runs(Scheme::Sdr) {
        match lower_bound_power(scenario, true, &solver) {
            Ok(p) => {
                sdr_st = SchemeStatus::Ok;
                sdr = Some(p);
            }
            Err(e) => sdr_st = jcj_status(&e),
        }
    }
    row.metrics = realization_metrics(scenario, row.jcj_f.as_ref(), row.ci_f.as_ref(), sdr);
    row.metrics.jcj_status = jcj_st;
    row.metrics.ci_status = ci_st;
    row.metrics.sdr_status = sdr_st;
    row
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultTable, ConfigError> {
    config.validate()?;
    let scenarios = config.sweep_scenarios()?;
    let values: Vec<Option<f64>> = match &config.sweep {
        Some(s) => s.values.iter().copied().map(Some).collect(),
        None => vec![None],
    };
    let tasks: Vec<(usize, u64)> = (0..values.len())
        .flat_map(|g| (0..config.realizations as u64).map(move |r| (g, r)))
        .collect();
    let work = |&(g, r): &(usize, u64)| {
        let mut row = match sample_scenario_seeded(&scenarios[g], config.master_seed, r) {
            Ok(sc) => run_realization(&sc, config),
            Err(e) => ResultRow {
                sweep_value: None,
                realization: r,
                metrics: RealizationResult {
                    jcj_status: SchemeStatus::Failed,
                    ci_status: SchemeStatus::Failed,
                    sdr_status: SchemeStatus::Failed,
                    ..Default::default()
                },
                chosen_eta: None,
                rank_one_ratio: None,
                jcj_f: None,
                ci_f: None,
                error: Some(e.to_string()),
            },
        };
        row.sweep_value = values[g];
        row.realization = r;
        log::info!(
            "sweep {:?} realization {r}: jcj {}",
            values[g],
            row.metrics.jcj_status
        );
        row
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| invalid("threads", e.to_string()))?;
    // `collect` on an indexed parallel iterator keeps task order.
    let rows = pool.install(|| tasks.par_iter().map(work).collect());
    Ok(ResultTable {
        sweep_axis: config.sweep.as_ref().map(|s| s.axis),
        master_seed: config.master_seed,
        rows,
    })
}

/// Largest difference between the stored rate/SINR errors of a row and
/// those recomputed from its beamformer.
pub fn spot_check(config: &ExperimentConfig, row: &ResultRow) -> Option<f64> {
    let scenario_cfg = match (&config.sweep, row.sweep_value) {
        (Some(s), Some(v)) => s.axis.apply(&config.scenario, v),
        _ => config.scenario.clone(),
    };
    let sc = sample_scenario_seeded(&scenario_cfg, config.master_seed, row.realization).ok()?;
    let f = row.jcj_f.as_ref()?;
    let e = threshold_errors(&sc, f);
    let dr = (e.rate_error - row.metrics.rate_error?).abs();
    let ds = (e.sinr_error_db - row.metrics.sinr_error_db?).abs();
    Some(dr.max(ds))
}

fn group_suffix(axis: Option<SweepAxis>, group: Option<f64>) -> String {
    match (axis, group) {
        (Some(a), Some(v)) => format!("_{}_{}", a.as_str(), v),
        _ => String::new(),
    }
}

pub fn cdf_csv(cdf: &CdfSeries) -> String {
    let mut s = String::from("value,probability\n");
    for (v, p) in cdf.values.iter().zip(&cdf.probs) {
        let _ = writeln!(s, "{v},{p}");
    }
    s
}

const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// Step-curve CDF plot, one curve per labelled series.
pub fn cdf_svg(title: &str, xlabel: &str, curves: &[(String, CdfSeries)]) -> String {
    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (70.0, 20.0, 40.0, 60.0);
    let pw = w - left - right;
    let ph = h - top - bottom;
    let lo = curves
        .iter()
        .flat_map(|(_, c)| c.values.first())
        .fold(f64::INFINITY, |a, &b| a.min(b));
    let hi = curves
        .iter()
        .flat_map(|(_, c)| c.values.last())
        .fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let (lo, hi) = if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, lo + 0.5)
    };
    let sx = |v: f64| left + (v - lo) / (hi - lo) * pw;
    let sy = |p: f64| top + (1.0 - p) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=5 {
        let t = i as f64 / 5.0;
        let x = left + t * pw;
        let y = sy(t);
        let xv = lo + t * (hi - lo);
        let _ = writeln!(
            s,
            r##"<line x1="{x}" y1="{top}" x2="{x}" y2="{}" stroke="#ddd"/>"##,
            top + ph
        );
        let _ = writeln!(
            s,
            r##"<line x1="{left}" y1="{y}" x2="{}" y2="{y}" stroke="#ddd"/>"##,
            left + pw
        );
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{}" text-anchor="middle">{}</text>"#,
            top + ph + 16.0,
            tick(xv)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{t:.1}</text>"#,
            left - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        left + pw / 2.0,
        h - 18.0,
        escape(xlabel)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">CDF</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );
    for (i, (label, c)) in curves.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut pts = format!("{:.2},{:.2}", sx(c.values[0]), sy(0.0));
        let mut prev = 0.0;
        for (v, p) in c.values.iter().zip(&c.probs) {
            let _ = write!(
                pts,
                " {:.2},{:.2} {:.2},{:.2}",
                sx(*v),
                sy(prev),
                sx(*v),
                sy(*p)
            );
            prev = *p;
        }
        let _ = writeln!(
            s,
            r#"<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>"#
        );
        if !label.is_empty() {
            let ly = top + 16.0 + 16.0 * i as f64;
            let lx = left + pw - 150.0;
            let _ = writeln!(
                s,
                r#"<line x1="{lx}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="2"/>"#,
                ly - 4.0,
                lx + 20.0,
                ly - 4.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{ly}">{}</text>"#,
                lx + 26.0,
                escape(label)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.1e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Writes results CSV, per-metric CDF CSVs and SVG plots, and the manifest
/// into `config.output_dir`. Returns the paths written.
pub fn emit_outputs(table: &ResultTable, config: &ExperimentConfig) -> io::Result<Vec<PathBuf>> {
    let dir = &config.output_dir;
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: String, body: String| -> io::Result<()> {
        let path = dir.join(name);
        fs::write(&path, body)?;
        written.push(path);
        Ok(())
    };
    put("results.csv".into(), table.to_csv_string())?;

    let axis = table.sweep_axis;
    for (metric, label) in CDF_METRICS {
        let mut curves = Vec::new();
        for group in table.groups() {
            let Ok(cdf) = empirical_cdf(&table.series(metric, group)) else {
                continue;
            };
            put(
                format!("cdf_{metric}{}.csv", group_suffix(axis, group)),
                cdf_csv(&cdf),
            )?;
            let name = match (axis, group) {
                (Some(a), Some(v)) => format!("{} = {v}", a.as_str()),
                _ => String::new(),
            };
            curves.push((name, cdf));
        }
        if !curves.is_empty() {
            put(format!("cdf_{metric}.svg"), cdf_svg(label, label, &curves))?;
        }
    }

    let count = |f: fn(&RealizationResult) -> SchemeStatus, s: SchemeStatus| {
        table.rows.iter().filter(|r| f(&r.metrics) == s).count()
    };
    let mut manifest = String::new();
    let _ = writeln!(manifest, "format = jcj-manifest {CSV_VERSION}");
    let _ = writeln!(manifest, "config_hash = {}", config.hash());
    let _ = writeln!(manifest, "master_seed = {}", config.master_seed);
    let _ = writeln!(manifest, "realizations = {}", config.realizations);
    let _ = writeln!(manifest, "rows = {}", table.rows.len());
    let schemes: Vec<_> = config.schemes.iter().map(|s| s.as_str()).collect();
    let _ = writeln!(manifest, "schemes = {}", schemes.join(","));
    if let Some(s) = &config.sweep {
        let vals: Vec<_> = s.values.iter().map(f64::to_string).collect();
        let _ = writeln!(manifest, "sweep_axis = {}", s.axis.as_str());
        let _ = writeln!(manifest, "sweep_values = {}", vals.join(","));
    }
    let _ = writeln!(
        manifest,
        "jcj_ok = {}",
        count(|m| m.jcj_status, SchemeStatus::Ok)
    );
    let _ = writeln!(
        manifest,
        "jcj_infeasible = {}",
        count(|m| m.jcj_status, SchemeStatus::Infeasible)
    );
    let _ = writeln!(
        manifest,
        "ci_ok = {}",
        count(|m| m.ci_status, SchemeStatus::Ok)
    );
    let names: Vec<_> = written
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    let _ = writeln!(manifest, "files = {}", names.join(","));
    let path = dir.join("manifest.txt");
    fs::write(&path, manifest)?;
    written.push(path);
    Ok(written)
}
