//! Result bundle: CSV sweep table and JSON with the manifest echo, full
//! sweep, diagnostics and provenance.

use serde::Serialize;

use worstcase_core::converters::EffectiveNoiseReport;
use worstcase_core::lab::SweepRow;

use crate::error::CliError;

pub const CSV_COLUMNS: [&str; 11] = [
    "experiment",
    "b",
    "destination",
    "trials",
    "mse",
    "stderr",
    "ci95",
    "ks",
    "skew",
    "exkurt",
    "seed",
];

#[derive(Debug, Clone)]
pub struct ResultBundle {
    pub name: String,
    /// Manifest text exactly as read.
    pub manifest_echo: String,
    pub manifest_path: Option<String>,
    pub trials_override: Option<usize>,
    pub seed_override: Option<u64>,
    pub seed: u64,
    pub converter: String,
    pub rows: Vec<SweepRow>,
    pub unwrapped_rows: Option<Vec<SweepRow>>,
    pub noise_probes: Vec<EffectiveNoiseReport>,
    pub wall_clock_seconds: f64,
}

#[derive(Serialize)]
struct CsvRecord<'a> {
    experiment: &'a str,
    b: usize,
    destination: usize,
    trials: usize,
    mse: f64,
    stderr: f64,
    ci95: f64,
    ks: Option<f64>,
    skew: f64,
    exkurt: f64,
    seed: u64,
}

#[derive(Serialize)]
struct JsonDestination<'a> {
    destination: usize,
    mse: f64,
    stderr: f64,
    ci95: f64,
    sign_error_rate: f64,
    sign_error_stderr: f64,
    #[serde(skip_serializing_if = "<[f64]>::is_empty")]
    profile: &'a [f64],
    diagnostic_row: usize,
    ks: Option<f64>,
    skew: f64,
    exkurt: f64,
}

#[derive(Serialize)]
struct JsonRow<'a> {
    b: usize,
    scheme: &'a str,
    block_len: usize,
    trials: usize,
    destinations: Vec<JsonDestination<'a>>,
}

#[derive(Serialize)]
struct JsonProbeRow<'a> {
    row: usize,
    covariance: &'a [f64],
    covariance_stderr: &'a [f64],
    skewness: &'a [f64],
    excess_kurtosis: &'a [f64],
    ks: &'a [Option<f64>],
    lag1_autocorrelation: &'a [f64],
}

#[derive(Serialize)]
struct JsonProbe<'a> {
    b: usize,
    slots: usize,
    dim: usize,
    rows: Vec<JsonProbeRow<'a>>,
}

#[derive(Serialize)]
struct Provenance<'a> {
    seed: u64,
    trials_override: Option<usize>,
    seed_override: Option<u64>,
    manifest_path: Option<&'a str>,
    rng: &'static str,
    streams: &'static str,
    wall_clock_seconds: f64,
    version: &'static str,
}

#[derive(Serialize)]
struct JsonBundle<'a> {
    experiment: &'a str,
    converter: &'a str,
    manifest: &'a str,
    sweep: Vec<JsonRow<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    unwrapped_sweep: Option<Vec<JsonRow<'a>>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    effective_noise: Vec<JsonProbe<'a>>,
    provenance: Provenance<'a>,
}

fn json_rows(rows: &[SweepRow]) -> Vec<JsonRow<'_>> {
    rows.iter()
        .map(|r| JsonRow {
            b: r.b,
            scheme: &r.report.scheme,
            block_len: r.report.block_len,
            trials: r.report.trials,
            destinations: r
                .report
                .destinations
                .iter()
                .zip(&r.diagnostics)
                .map(|(d, g)| JsonDestination {
                    destination: d.destination,
                    mse: d.mse,
                    stderr: d.stderr,
                    ci95: d.ci95,
                    sign_error_rate: d.sign_error_rate,
                    sign_error_stderr: d.sign_error_stderr,
                    profile: &d.profile,
                    diagnostic_row: g.row,
                    ks: g.ks,
                    skew: g.skewness,
                    exkurt: g.excess_kurtosis,
                })
                .collect(),
        })
        .collect()
}

impl ResultBundle {
    /// One line per `(b, destination)`; deterministic given the manifest and
    /// seed.
    pub fn csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            for (d, g) in row.report.destinations.iter().zip(&row.diagnostics) {
                w.serialize(CsvRecord {
                    experiment: &self.name,
                    b: row.b,
                    destination: d.destination,
                    trials: row.report.trials,
                    mse: d.mse,
                    stderr: d.stderr,
                    ci95: d.ci95,
                    ks: g.ks,
                    skew: g.skewness,
                    exkurt: g.excess_kurtosis,
                    seed: self.seed,
                })
                .map_err(|e| CliError::Encode(e.to_string()))?;
            }
        }
        if self.rows.is_empty() {
            w.write_record(CSV_COLUMNS).map_err(|e| CliError::Encode(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Encode(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Encode(e.to_string()))
    }

    pub fn json(&self) -> Result<String, CliError> {
        let bundle = JsonBundle {
            experiment: &self.name,
            converter: &self.converter,
            manifest: &self.manifest_echo,
            sweep: json_rows(&self.rows),
            unwrapped_sweep: self.unwrapped_rows.as_deref().map(json_rows),
            effective_noise: self
                .noise_probes
                .iter()
                .map(|p| JsonProbe {
                    b: p.b,
                    slots: p.slots,
                    dim: p.dim,
                    rows: p
                        .rows
                        .iter()
                        .map(|r| JsonProbeRow {
                            row: r.row,
                            covariance: &r.covariance,
                            covariance_stderr: &r.covariance_stderr,
                            skewness: &r.skewness,
                            excess_kurtosis: &r.excess_kurtosis,
                            ks: &r.ks,
                            lag1_autocorrelation: &r.lag1,
                        })
                        .collect(),
                })
                .collect(),
            provenance: Provenance {
                seed: self.seed,
                trials_override: self.trials_override,
                seed_override: self.seed_override,
                manifest_path: self.manifest_path.as_deref(),
                rng: "ChaCha8, one stream per (seed, role, trial[, node])",
                streams: "common random numbers across the b sweep",
                wall_clock_seconds: self.wall_clock_seconds,
                version: env!("CARGO_PKG_VERSION"),
            },
        };
        serde_json::to_string_pretty(&bundle).map_err(|e| CliError::Encode(e.to_string()))
    }
}
