use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ExperimentConfig;
use super::metrics::{
    MetricsRecorder, MetricsTrace, StepRecord, Summary, TraceWriter, TrialOutcome,
};
use crate::environment::Environment;
use crate::error::{io, Error, Result};
use crate::parallel::par_map;
use crate::seeded_rng;

/// Runs the select → respond → record → update loop, handing every step to `sink`.
pub fn simulate(
    config: &ExperimentConfig,
    seed: u64,
    mut sink: impl FnMut(&StepRecord),
) -> Result<TrialOutcome> {
    let mut rng = seeded_rng(seed);
    let mut automaton = config.automaton.build()?;
    let mut env = config.environment.build()?;
    let mut recorder = MetricsRecorder::new(config.favorable_action);
    for _ in 0..config.iterations {
        let action = automaton.select_action(&mut rng);
        let reward = env.respond(action, &mut rng);
        sink(&recorder.record(action, reward));
        automaton.update(reward);
    }
    Ok(recorder.outcome())
}

/// One seeded trial with its full per-iteration trace.
pub fn run_trial(config: &ExperimentConfig, seed: u64) -> Result<MetricsTrace> {
    config.validate()?;
    let mut trace = MetricsTrace {
        records: Vec::with_capacity(config.iterations),
    };
    simulate(config, seed, |r| trace.records.push(*r))?;
    Ok(trace)
}

/// Final counters of every seed, in seed order.
pub fn run_outcomes(
    config: &ExperimentConfig,
    seeds: &[u64],
    threads: Option<usize>,
) -> Result<Vec<TrialOutcome>> {
    config.validate()?;
    par_map(seeds.to_vec(), threads, |seed| {
        simulate(config, seed, |_| {})
    })
    .into_iter()
    .collect()
}

/// Mean/std summary over the config's own seeds.
pub fn run_config(config: &ExperimentConfig, threads: Option<usize>) -> Result<Summary> {
    Ok(Summary::from_outcomes(&run_outcomes(
        config,
        &config.seeds,
        threads,
    )?))
}

#[derive(Debug, Clone, Default)]
pub struct SuiteOptions {
    /// Where per-trial CSVs and `summary.json` go; nothing is written when unset.
    pub out_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    /// Replaces every config's seed list.
    pub seeds: Option<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteRow {
    pub name: String,
    pub automaton: &'static str,
    pub seeds: usize,
    #[serde(flatten)]
    pub summary: Summary,
}

pub const SUMMARY_FILE: &str = "summary.json";

/// Runs every (config, seed) pair and optionally writes one CSV per trial
/// plus an aggregate summary. On failure, files already written are removed.
pub fn run_suite(configs: &[ExperimentConfig], options: &SuiteOptions) -> Result<Vec<SuiteRow>> {
    let mut names = HashSet::new();
    for c in configs {
        c.validate()?;
        if !names.insert(c.name.as_str()) {
            return Err(Error::Config(format!(
                "duplicate experiment name {:?}",
                c.name
            )));
        }
    }
    let mut written = Written::default();
    let result = run_suite_inner(configs, options, &mut written);
    if result.is_err() {
        written.remove();
    }
    result
}

#[derive(Default)]
struct Written {
    files: Vec<PathBuf>,
    dirs: Vec<PathBuf>,
}

impl Written {
    fn remove(&self) {
        for f in &self.files {
            let _ = fs::remove_file(f);
        }
        for d in self.dirs.iter().rev() {
            let _ = fs::remove_dir(d);
        }
    }
}

fn create_dir(path: &Path, written: &mut Written) -> Result<()> {
    if !path.exists() {
        fs::create_dir_all(path).map_err(|e| io(path, e))?;
        written.dirs.push(path.to_path_buf());
    }
    Ok(())
}

fn run_suite_inner(
    configs: &[ExperimentConfig],
    options: &SuiteOptions,
    written: &mut Written,
) -> Result<Vec<SuiteRow>> {
    let jobs: Vec<(usize, u64, Option<PathBuf>)> = configs
        .iter()
        .enumerate()
        .flat_map(|(i, c)| {
            let seeds = options.seeds.clone().unwrap_or_else(|| c.seeds.clone());
            seeds.into_iter().map(move |s| (i, s))
        })
        .map(|(i, s)| {
            let path = options
                .out_dir
                .as_ref()
                .map(|dir| dir.join(&configs[i].name).join(format!("seed_{s}.csv")));
            (i, s, path)
        })
        .collect();

    if let Some(dir) = &options.out_dir {
        create_dir(dir, written)?;
        for c in configs {
            create_dir(&dir.join(&c.name), written)?;
        }
        written
            .files
            .extend(jobs.iter().filter_map(|j| j.2.clone()));
    }

    let results = par_map(
        jobs,
        options.threads,
        |(i, seed, path)| -> Result<(usize, TrialOutcome)> {
            let config = &configs[i];
            let outcome = match path {
                Some(path) => write_trial(config, seed, &path)?,
                None => simulate(config, seed, |_| {})?,
            };
            Ok((i, outcome))
        },
    );

    let mut per_config: Vec<Vec<TrialOutcome>> = vec![Vec::new(); configs.len()];
    for r in results {
        let (i, outcome) = r?;
        per_config[i].push(outcome);
    }
    let rows: Vec<SuiteRow> = configs
        .iter()
        .zip(&per_config)
        .map(|(c, outcomes)| SuiteRow {
            name: c.name.clone(),
            automaton: c.automaton.label(),
            seeds: outcomes.len(),
            summary: Summary::from_outcomes(outcomes),
        })
        .collect();

    if let Some(dir) = &options.out_dir {
        let path = dir.join(SUMMARY_FILE);
        written.files.push(path.clone());
        let summaries: BTreeMap<&str, &Summary> =
            rows.iter().map(|r| (r.name.as_str(), &r.summary)).collect();
        let mut json = serde_json::to_string_pretty(&summaries).expect("summaries serialize");
        json.push('\n');
        fs::write(&path, json).map_err(|e| io(&path, e))?;
    }
    Ok(rows)
}

fn write_trial(config: &ExperimentConfig, seed: u64, path: &Path) -> Result<TrialOutcome> {
    let file = File::create(path).map_err(|e| io(path, e))?;
    let csv_err = |e: csv::Error| io(path, e.into());
    let mut writer = TraceWriter::new(BufWriter::new(file)).map_err(csv_err)?;
    let mut failure = None;
    let outcome = simulate(config, seed, |r| {
        if failure.is_none() {
            if let Err(e) = writer.write(r) {
                failure = Some(e);
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(csv_err(e));
    }
    writer.finish().map_err(csv_err)?;
    Ok(outcome)
}
