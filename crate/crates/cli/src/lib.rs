//! Manifest-driven experiment runner.
//!
//! A manifest names a source, a network, an inner scheme designed for
//! Gaussian data, optional wrappers and a conversion; [`run_manifest`] sweeps
//! the conversion over the listed transform sizes and writes
//! `<dir>/<name>.csv` and `<dir>/<name>.json`.

pub mod error;
pub mod manifest;
pub mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use worstcase_core::lab::{convergence_sweep, sweep_row, Converter, SweepConfig, SweepRow};
use worstcase_core::network::ChannelForm;
use worstcase_core::sources::{SampleStream, StreamRole};
use worstcase_core::{effective_noise_probe, MarginalFamily};

pub use error::CliError;
pub use manifest::{parse_manifest, Experiment, Manifest};
pub use report::{ResultBundle, CSV_COLUMNS};

/// Command-line adjustments applied on top of a manifest.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Overrides {
    pub out_dir: Option<PathBuf>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
}

/// Sorted names of everything a manifest can refer to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inventory {
    pub schemes: Vec<&'static str>,
    pub families: Vec<&'static str>,
    pub network_forms: Vec<&'static str>,
    pub converters: Vec<&'static str>,
}

impl Inventory {
    /// Every entry as `kind:name`, sorted.
    pub fn lines(&self) -> Vec<String> {
        let mut out: Vec<String> = [
            ("converter", &self.converters),
            ("family", &self.families),
            ("network", &self.network_forms),
            ("scheme", &self.schemes),
        ]
        .iter()
        .flat_map(|(kind, names)| names.iter().map(move |n| format!("{kind}:{n}")))
        .collect();
        out.sort();
        out
    }
}

pub fn list_components() -> Inventory {
    let sorted = |mut v: Vec<&'static str>| {
        v.sort_unstable();
        v
    };
    Inventory {
        schemes: sorted(manifest::SchemeSpec::NAMES.to_vec()),
        families: sorted(MarginalFamily::TAGS.to_vec()),
        network_forms: sorted(vec!["additive", "bit_pipe"]),
        converters: sorted(Converter::TAGS.to_vec()),
    }
}

fn sweep(exp: &Experiment, cfg: &SweepConfig, verbose: bool) -> Result<Vec<SweepRow>, CliError> {
    let mut rows = Vec::new();
    if exp.baseline {
        if verbose {
            eprintln!("running unconverted baseline");
        }
        rows.push(sweep_row(cfg, 1)?);
    }
    if cfg.converter == Converter::None {
        rows.extend(convergence_sweep(cfg, &[])?);
    } else {
        for &b in &exp.b_list {
            if verbose {
                eprintln!("running b = {b}");
            }
            rows.extend(convergence_sweep(cfg, &[b])?);
        }
    }
    Ok(rows)
}

/// Parses, validates and runs manifest text without touching the file
/// system.
pub fn run_manifest_text(text: &str, overrides: &Overrides, verbose: bool) -> Result<ResultBundle, CliError> {
    let start = Instant::now();
    let mut manifest = parse_manifest(text)?;
    if let Some(t) = overrides.trials {
        manifest.trials = t;
    }
    if let Some(s) = overrides.seed {
        manifest.seed = s;
    }
    let exp = manifest.build()?;
    let rows = sweep(&exp, &exp.config, verbose)?;
    let unwrapped_rows = match &exp.unwrapped {
        Some(cfg) => {
            if verbose {
                eprintln!("running unwrapped sweep");
            }
            Some(sweep(&exp, cfg, verbose)?)
        }
        None => None,
    };
    let mut noise_probes = Vec::new();
    if let (Converter::Noise, ChannelForm::Additive { .. }) = (exp.config.converter, exp.config.model.form()) {
        for &b in &exp.b_list {
            let stream = SampleStream::for_trial(manifest.seed, StreamRole::Probe, 1);
            let rows = [0, b / 2, b - 1];
            noise_probes.push(effective_noise_probe(
                &exp.config.model,
                b,
                manifest.diagnostic_samples.max(worstcase_core::converters::PROBE_MIN_SLOTS),
                &rows,
                stream,
            )?);
        }
    }
    Ok(ResultBundle {
        name: manifest.name.clone(),
        manifest_echo: text.to_owned(),
        manifest_path: None,
        trials_override: overrides.trials,
        seed_override: overrides.seed,
        seed: manifest.seed,
        converter: Converter::from(manifest.converter).tag().to_owned(),
        rows,
        unwrapped_rows,
        noise_probes,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Paths written by [`run_manifest`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Written {
    pub csv: PathBuf,
    pub json: PathBuf,
}

/// Runs the manifest at `path` and writes its CSV and JSON reports.
pub fn run_manifest(path: &Path, overrides: &Overrides, verbose: bool) -> Result<(ResultBundle, Written), CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_owned(),
        source,
    })?;
    let mut bundle = run_manifest_text(&text, overrides, verbose)?;
    bundle.manifest_path = Some(path.display().to_string());
    let dir = match &overrides.out_dir {
        Some(d) => d.clone(),
        None => PathBuf::from(parse_manifest(&text)?.output.dir),
    };
    fs::create_dir_all(&dir).map_err(|source| CliError::Write {
        path: dir.clone(),
        source,
    })?;
    let written = Written {
        csv: dir.join(format!("{}.csv", bundle.name)),
        json: dir.join(format!("{}.json", bundle.name)),
    };
    for (p, contents) in [(&written.csv, bundle.csv()?), (&written.json, bundle.json()?)] {
        fs::write(p, contents).map_err(|source| CliError::Write {
            path: p.clone(),
            source,
        })?;
    }
    Ok((bundle, written))
}

/// Directory of the manifests shipped with this crate.
pub fn bundled_manifest_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("manifests")
}
