use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::defense::DefenseSpec;
use super::fork_choice::WeightRule;
use super::sim::{run_simulation, SimulationResult, SimulationSpec};
use crate::error::{io, Error, Result};
use crate::experiment::config::DEFAULT_SEED_COUNT;
use crate::parallel::par_map;

/// Evenly spaced α values, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for AlphaGrid {
    fn default() -> Self {
        AlphaGrid {
            start: 0.01,
            stop: 0.49,
            step: 0.01,
        }
    }
}

impl AlphaGrid {
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        // rounded to kill drift from repeated float steps
        (0..=n)
            .map(|i| ((self.start + i as f64 * self.step) * 1e9).round() / 1e9)
            .collect()
    }

    fn validate(&self) -> Result<()> {
        let ok = self.step > 0.0 && self.start > 0.0 && self.start <= self.stop && self.stop < 0.5;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "alpha grid {}..{} step {} must lie in (0, 0.5) with a positive step",
                self.start, self.stop, self.step
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDefense {
    pub label: String,
    #[serde(flatten)]
    pub defense: DefenseSpec,
}

fn default_seeds() -> Vec<u64> {
    (0..DEFAULT_SEED_COUNT).collect()
}

fn default_total_blocks() -> u64 {
    10_000
}

fn default_gamma() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub name: String,
    #[serde(default)]
    pub alphas: AlphaGrid,
    #[serde(default = "default_total_blocks")]
    pub total_blocks: u64,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default)]
    pub weight_rule: WeightRule,
    pub defenses: Vec<LabeledDefense>,
}

impl SweepConfig {
    pub fn new(name: impl Into<String>, defenses: Vec<LabeledDefense>) -> Self {
        SweepConfig {
            name: name.into(),
            alphas: AlphaGrid::default(),
            total_blocks: default_total_blocks(),
            seeds: default_seeds(),
            gamma: default_gamma(),
            weight_rule: WeightRule::default(),
            defenses,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("sweep config serializes")
    }

    pub fn spec(&self, defense: &DefenseSpec, alpha: f64) -> SimulationSpec {
        SimulationSpec {
            total_blocks: self.total_blocks,
            alpha,
            gamma: self.gamma,
            defense: defense.clone(),
            weight_rule: self.weight_rule,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.alphas.validate()?;
        if self.seeds.is_empty() {
            return Err(Error::Config("a sweep needs at least one seed".into()));
        }
        if self.defenses.is_empty() {
            return Err(Error::Config("a sweep needs at least one defense".into()));
        }
        let mut labels = std::collections::HashSet::new();
        for d in &self.defenses {
            if !labels.insert(d.label.as_str()) {
                return Err(Error::Config(format!(
                    "duplicate defense label {:?}",
                    d.label
                )));
            }
            self.spec(&d.defense, self.alphas.start)
                .validate()
                .map_err(|e| Error::Config(format!("defense {:?}: {e}", d.label)))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub defense: String,
    pub controller: &'static str,
    pub alpha: f64,
    pub seed: u64,
    pub selfish_revenue: f64,
    pub honest_revenue: f64,
    #[serde(rename = "final_K")]
    pub final_k: Option<u64>,
    pub weight_decision_fraction: f64,
}

impl SweepRow {
    fn new(
        label: &str,
        defense: &DefenseSpec,
        alpha: f64,
        seed: u64,
        r: &SimulationResult,
    ) -> Self {
        SweepRow {
            defense: label.to_string(),
            controller: defense.controller_label(),
            alpha,
            seed,
            selfish_revenue: r.selfish_revenue,
            honest_revenue: r.honest_revenue,
            final_k: r.final_k,
            weight_decision_fraction: r.weight_decision_fraction(),
        }
    }
}

/// Smallest grid α whose mean selfish revenue exceeds α.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Threshold {
    At(f64),
    /// No crossing on the grid; the threshold is at least this.
    AtLeast(f64),
}

impl Threshold {
    /// Lower bound usable in comparisons.
    pub fn value(&self) -> f64 {
        match *self {
            Threshold::At(a) | Threshold::AtLeast(a) => a,
        }
    }
}

impl std::fmt::Display for Threshold {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Threshold::At(a) => write!(f, "{a:.2}"),
            Threshold::AtLeast(a) => write!(f, ">= {a:.2}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefenseCurve {
    pub label: String,
    pub controller: &'static str,
    pub threshold: Threshold,
    /// (α, mean selfish revenue) per grid point.
    pub mean_revenue: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub curves: Vec<DefenseCurve>,
}

pub fn threshold(curve: &[(f64, f64)]) -> Threshold {
    curve
        .iter()
        .find(|&&(alpha, revenue)| revenue > alpha)
        .map(|&(alpha, _)| Threshold::At(alpha))
        .unwrap_or_else(|| Threshold::AtLeast(curve.last().map_or(0.0, |c| c.0)))
}

/// Every (defense, α, seed) run, in that order. Seeds give common random
/// numbers across defenses and α values.
pub fn run_sweep(config: &SweepConfig, threads: Option<usize>) -> Result<SweepResult> {
    config.validate()?;
    let alphas = config.alphas.values();
    let jobs: Vec<(usize, f64, u64)> = (0..config.defenses.len())
        .flat_map(|d| {
            alphas
                .iter()
                .flat_map(move |&a| config.seeds.iter().map(move |&s| (d, a, s)))
        })
        .collect();
    let results = par_map(jobs, threads, |(d, alpha, seed)| {
        let defense = &config.defenses[d];
        run_simulation(&config.spec(&defense.defense, alpha), seed)
            .map(|r| SweepRow::new(&defense.label, &defense.defense, alpha, seed, &r))
    });
    let rows = results.into_iter().collect::<Result<Vec<_>>>()?;

    let per_defense = alphas.len() * config.seeds.len();
    let curves = config
        .defenses
        .iter()
        .zip(rows.chunks(per_defense))
        .map(|(d, chunk)| {
            let mean_revenue: Vec<(f64, f64)> = chunk
                .chunks(config.seeds.len())
                .map(|c| {
                    (
                        c[0].alpha,
                        c.iter().map(|r| r.selfish_revenue).sum::<f64>() / c.len() as f64,
                    )
                })
                .collect();
            DefenseCurve {
                label: d.label.clone(),
                controller: d.defense.controller_label(),
                threshold: threshold(&mean_revenue),
                mean_revenue,
            }
        })
        .collect();
    Ok(SweepResult { rows, curves })
}

pub fn write_rows_csv<W: Write>(rows: &[SweepRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// `{label: {threshold, controller, mean_revenue}}` as pretty JSON.
pub fn thresholds_json(curves: &[DefenseCurve]) -> String {
    #[derive(Serialize)]
    struct Entry<'a> {
        controller: &'a str,
        threshold: f64,
        crossed: bool,
        mean_revenue: &'a [(f64, f64)],
    }
    let map: BTreeMap<&str, Entry> = curves
        .iter()
        .map(|c| {
            (
                c.label.as_str(),
                Entry {
                    controller: c.controller,
                    threshold: c.threshold.value(),
                    crossed: matches!(c.threshold, Threshold::At(_)),
                    mean_revenue: &c.mean_revenue,
                },
            )
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&map).expect("thresholds serialize");
    s.push('\n');
    s
}
