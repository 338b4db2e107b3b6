use std::path::{Path, PathBuf};

use serde_json::json;

use qsmote::aol::OutlierBounds;
use qsmote::data::{
    histogram_csv, histogram_svg, load_csv, read_augmented, rounding_levels, write_augmented_to, write_processed_to,
    DataConfig, Dataset, Histogram, RUN_SECTIONS,
};
use qsmote::eval::{
    evaluate_augmented, run_experiment, write_results_to, ExperimentConfig, ExperimentRow, DEFAULT_GRID,
};
use qsmote::pipeline::{run_smote, SmoteConfig};

use crate::args::{AolModes, EvaluateArgs, Io, PreprocessArgs, SmoteArgs};
use crate::manifest::{now_unix, sha256_hex, RunManifest};
use crate::output::{sibling, Staged};
use crate::CliError;

/// Parsed run file.
struct RunFile {
    sha256: String,
    data: DataConfig,
    smote: SmoteConfig,
    evaluate: ExperimentConfig,
}

fn section<T: serde::de::DeserializeOwned + Default>(extra: &toml::Table, name: &str) -> Result<T, CliError> {
    match extra.get(name) {
        None => Ok(T::default()),
        Some(v) => v
            .clone()
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Usage(format!("[{name}] table: {e}"))),
    }
}

fn load_run_file(path: &Path) -> Result<RunFile, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| CliError::Usage(format!("{}: config is not UTF-8", path.display())))?;
    let (data, extra) = DataConfig::from_run_toml_str(&text, &RUN_SECTIONS)?;
    Ok(RunFile {
        sha256: sha256_hex(&bytes),
        data,
        smote: section(&extra, "smote")?,
        evaluate: section(&extra, "evaluate")?,
    })
}

fn manifest_path(io: &Io) -> PathBuf {
    io.manifest
        .clone()
        .unwrap_or_else(|| sibling(&io.output, ".manifest.json"))
}

fn minority_percent(ds: &Dataset) -> Option<f64> {
    let label = ds.minority_label()?;
    let m = ds.labels.iter().filter(|&&l| l == label).count();
    Some(100.0 * m as f64 / ds.len() as f64)
}

struct Finish<'a> {
    command: &'static str,
    run: &'a RunFile,
    io: &'a Io,
    inputs: Vec<PathBuf>,
    seed: Option<u64>,
    shots: Option<u64>,
    started: u64,
    achieved: Option<f64>,
    details: serde_json::Value,
}

/// Adds the manifest to `staged` and writes everything.
fn finish(mut staged: Staged, f: Finish<'_>) -> Result<(), CliError> {
    let manifest_path = manifest_path(f.io);
    let mut outputs = staged.paths();
    outputs.push(manifest_path.clone());
    let manifest = RunManifest {
        tool: "qsmote",
        version: env!("CARGO_PKG_VERSION"),
        command: f.command,
        config_sha256: f.run.sha256.clone(),
        seed: f.seed,
        shots: f.shots,
        inputs: f.inputs,
        outputs,
        started_unix: f.started,
        finished_unix: now_unix(),
        achieved_minority_percent: f.achieved,
        details: f.details,
    };
    staged.add(manifest_path, manifest.to_json());
    staged.commit()
}

pub fn preprocess(args: &PreprocessArgs) -> Result<(), CliError> {
    let started = now_unix();
    let run = load_run_file(&args.io.config)?;
    let ds = load_csv(&args.input, &run.data)?;
    let mut buf = Vec::new();
    write_processed_to(&ds, &mut buf)?;
    let mut staged = Staged::default();
    staged.add(&args.io.output, buf);
    eprintln!("preprocess: {} rows, {} features", ds.len(), ds.num_features());
    finish(
        staged,
        Finish {
            command: "preprocess",
            run: &run,
            io: &args.io,
            inputs: vec![args.input.clone(), args.io.config.clone()],
            seed: None,
            shots: None,
            started,
            achieved: minority_percent(&ds),
            details: json!({ "rows": ds.len(), "features": ds.feature_names, "class_counts": ds.class_counts() }),
        },
    )
}

pub fn smote(args: &SmoteArgs) -> Result<(), CliError> {
    let started = now_unix();
    let run = load_run_file(&args.io.config)?;
    let mut cfg = run.smote.clone();
    if let Some(t) = args.target_percent {
        cfg.target_minority_percent = t;
    }
    if let Some(sf) = args.sf {
        cfg.split_factor = sf;
    }
    if let Some(s) = args.shots {
        cfg.shots = s;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if args.aol {
        cfg.aol = true;
    }
    if let Some(b) = args.bins {
        cfg.num_bins = b;
    }
    if args.plot_bins == 0 {
        return Err(CliError::Usage("--plot-bins must be at least 1".into()));
    }
    cfg.validate()?;

    let ds = load_csv(&args.input, &run.data)?;
    let (mut table, report) = run_smote(&ds, &cfg)?;
    table.round_synthetic(&rounding_levels(&ds, &run.data));

    let mut staged = Staged::default();
    let mut buf = Vec::new();
    write_augmented_to(&table, &mut buf)?;
    staged.add(&args.io.output, buf);

    let distances = table.minority_angular_distances();
    let bounds = OutlierBounds::from_values(&distances)?;
    let hist = Histogram::new(&distances, args.plot_bins)?;
    staged.add(
        sibling(&args.io.output, ".angular.svg"),
        histogram_svg(&hist, &bounds, "Angular distance distribution"),
    );
    staged.add(sibling(&args.io.output, ".angular.csv"), histogram_csv(&hist));

    eprintln!(
        "smote: {} synthetic rows ({} boosted), minority {:.2}% -> {:.2}%",
        table.synthetic.len(),
        report.boosted_generated,
        100.0 * report.minority_count as f64 / report.original_total as f64,
        report.final_percent
    );
    finish(
        staged,
        Finish {
            command: "smote",
            run: &run,
            io: &args.io,
            inputs: vec![args.input.clone(), args.io.config.clone()],
            seed: Some(cfg.seed),
            shots: Some(cfg.shots),
            started,
            achieved: Some(report.final_percent),
            details: json!({ "settings": cfg, "report": report }),
        },
    )
}

fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    match text.trim() {
        "none" => Ok(Vec::new()),
        "default" => Ok(DEFAULT_GRID.to_vec()),
        list => list
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|t| t.is_finite() && *t > 0.0 && *t < 100.0)
                    .ok_or_else(|| CliError::Usage(format!("bad grid entry `{s}` (expected a percent in (0, 100))")))
            })
            .collect(),
    }
}

fn experiment_config(
    args: &EvaluateArgs,
    run: &RunFile,
    ds_levels: Vec<Option<u32>>,
) -> Result<ExperimentConfig, CliError> {
    let mut ec = run.evaluate.clone();
    ec.smote = run.smote.clone();
    ec.rounding = ds_levels;
    if let Some(g) = &args.grid {
        ec.targets = parse_grid(g)?;
    }
    if let Some(mode) = args.aol {
        ec.aol_modes = match mode {
            AolModes::Off => vec![false],
            AolModes::On => vec![true],
            AolModes::Both => vec![false, true],
        };
    }
    if let Some(k) = args.k {
        ec.k = k;
    }
    if let Some(s) = args.split {
        ec.test_fraction = s;
    }
    if let Some(s) = args.seed {
        ec.seed = s;
        ec.smote.seed = s;
    }
    if let Some(sf) = args.sf {
        ec.smote.split_factor = sf;
    }
    if let Some(b) = args.bins {
        ec.smote.num_bins = b;
    }
    if ec.k == 0 {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    ec.smote.validate()?;
    Ok(ec)
}

/// F1 at the largest non-AOL target against the baseline.
fn trend_holds(rows: &[ExperimentRow]) -> Result<(f64, f64, bool), CliError> {
    let f1 = |r: &ExperimentRow| r.f1.unwrap_or(0.0);
    let base = f1(&rows[0]);
    let top = rows
        .iter()
        .filter(|r| r.target_percent.is_some() && !r.aol)
        .max_by(|a, b| a.target_percent.partial_cmp(&b.target_percent).expect("finite targets"))
        .ok_or_else(|| CliError::Usage("--assert-trend needs at least one non-AOL grid target".into()))?;
    Ok((base, f1(top), f1(top) > base))
}

pub fn evaluate(args: &EvaluateArgs) -> Result<(), CliError> {
    let started = now_unix();
    let run = load_run_file(&args.io.config)?;
    let (rows, input, ec) = if let Some(path) = &args.augmented {
        let target = run.data.target().name.clone();
        let id = run.data.id().map(|c| c.name.clone());
        let table = read_augmented(path, &target, id.as_deref())?;
        let ec = experiment_config(args, &run, Vec::new())?;
        (vec![evaluate_augmented(&table, &ec)?], path, ec)
    } else {
        let input = args.input.as_ref().expect("clap requires a source");
        let ds = load_csv(input, &run.data)?;
        let ec = experiment_config(args, &run, rounding_levels(&ds, &run.data))?;
        (run_experiment(&ds, &ec)?, input, ec)
    };

    let mut buf = Vec::new();
    write_results_to(&rows, &mut buf)?;
    let mut staged = Staged::default();
    staged.add(&args.io.output, buf);

    for r in &rows {
        let show = |v: Option<f64>| v.map_or_else(|| "undefined".to_owned(), |x| format!("{x:.4}"));
        eprintln!(
            "{:>8} aol={} f1={} pr_auc={} roc_auc={}",
            r.target_percent
                .map_or_else(|| "baseline".to_owned(), |t| format!("{t:.2}%")),
            u8::from(r.aol),
            show(r.f1),
            show(r.pr_auc),
            show(r.roc_auc),
        );
    }

    let trend = if args.assert_trend {
        Some(trend_holds(&rows)?)
    } else {
        None
    };
    finish(
        staged,
        Finish {
            command: "evaluate",
            run: &run,
            io: &args.io,
            inputs: vec![input.clone(), args.io.config.clone()],
            seed: Some(ec.seed),
            shots: Some(ec.smote.shots),
            started,
            achieved: None,
            details: json!({
                "targets": ec.targets,
                "aol_modes": ec.aol_modes,
                "k": ec.k,
                "test_fraction": ec.test_fraction,
                "threshold": ec.threshold,
                "standardize": ec.standardize,
                "smote": ec.smote,
                "rows": rows,
            }),
        },
    )?;
    match trend {
        Some((base, top, false)) => Err(CliError::Trend(format!(
            "F1 did not improve with synthesis: baseline {base:.4}, largest target {top:.4}"
        ))),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert!(parse_grid("none").unwrap().is_empty());
        assert_eq!(parse_grid("default").unwrap().len(), 10);
        assert_eq!(parse_grid("30, 45.5").unwrap(), vec![30.0, 45.5]);
        assert!(matches!(parse_grid("30,abc"), Err(CliError::Usage(_))));
        assert!(matches!(parse_grid("100"), Err(CliError::Usage(_))));
    }
}
