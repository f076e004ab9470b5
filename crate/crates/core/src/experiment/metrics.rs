use std::io::Write;

use serde::{Deserialize, Serialize};

/// State of the counters after one interaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    /// 1-based interaction index.
    pub iteration: usize,
    pub reward: bool,
    pub cum_tnr: usize,
    pub cum_tnas: usize,
    pub action: usize,
    /// Running share of selections that picked the favorable action.
    pub p_favorable: Option<f64>,
}

/// Accumulates the total number of rewards (TNR), the total number of action
/// switches (TNAS) and the favorable-action frequency.
#[derive(Debug, Clone)]
pub struct MetricsRecorder {
    favorable: Option<usize>,
    iteration: usize,
    tnr: usize,
    tnas: usize,
    favorable_hits: usize,
    previous: Option<usize>,
}

impl MetricsRecorder {
    pub fn new(favorable: Option<usize>) -> Self {
        MetricsRecorder {
            favorable,
            iteration: 0,
            tnr: 0,
            tnas: 0,
            favorable_hits: 0,
            previous: None,
        }
    }

    pub fn record(&mut self, action: usize, reward: bool) -> StepRecord {
        self.iteration += 1;
        self.tnr += usize::from(reward);
        if self.previous.is_some_and(|p| p != action) {
            self.tnas += 1;
        }
        self.previous = Some(action);
        if self.favorable == Some(action) {
            self.favorable_hits += 1;
        }
        StepRecord {
            iteration: self.iteration,
            reward,
            cum_tnr: self.tnr,
            cum_tnas: self.tnas,
            action,
            p_favorable: self.p_favorable(),
        }
    }

    pub fn p_favorable(&self) -> Option<f64> {
        self.favorable?;
        (self.iteration > 0).then(|| self.favorable_hits as f64 / self.iteration as f64)
    }

    pub fn outcome(&self) -> TrialOutcome {
        TrialOutcome {
            iterations: self.iteration,
            tnr: self.tnr,
            tnas: self.tnas,
            p_favorable: self.p_favorable(),
        }
    }
}

/// Final counters of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub iterations: usize,
    pub tnr: usize,
    pub tnas: usize,
    pub p_favorable: Option<f64>,
}

/// Full per-iteration record of one trial.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricsTrace {
    pub records: Vec<StepRecord>,
}

impl MetricsTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn outcome(&self) -> TrialOutcome {
        let last = self.records.last();
        TrialOutcome {
            iterations: self.records.len(),
            tnr: last.map_or(0, |r| r.cum_tnr),
            tnas: last.map_or(0, |r| r.cum_tnas),
            p_favorable: last.and_then(|r| r.p_favorable),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut writer = TraceWriter::new(out)?;
        for r in &self.records {
            writer.write(r)?;
        }
        writer.finish()
    }
}

/// Streams step records as CSV rows.
pub struct TraceWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> TraceWriter<W> {
    pub const HEADER: [&'static str; 6] = [
        "iteration",
        "reward",
        "cum_tnr",
        "cum_tnas",
        "action",
        "p_favorable",
    ];

    pub fn new(out: W) -> csv::Result<Self> {
        let mut inner = csv::Writer::from_writer(out);
        inner.write_record(Self::HEADER)?;
        Ok(TraceWriter { inner })
    }

    pub fn write(&mut self, r: &StepRecord) -> csv::Result<()> {
        let p = r.p_favorable.map(|p| format!("{p:.6}")).unwrap_or_default();
        self.inner.write_record([
            r.iteration.to_string(),
            u8::from(r.reward).to_string(),
            r.cum_tnr.to_string(),
            r.cum_tnas.to_string(),
            r.action.to_string(),
            p,
        ])
    }

    pub fn finish(mut self) -> csv::Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

/// Mean and sample standard deviation of the final counters over seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean_tnr: f64,
    pub std_tnr: f64,
    pub mean_tnas: f64,
    pub std_tnas: f64,
    pub mean_p_favorable: Option<f64>,
}

impl Summary {
    pub fn from_outcomes(outcomes: &[TrialOutcome]) -> Self {
        let tnr: Vec<f64> = outcomes.iter().map(|o| o.tnr as f64).collect();
        let tnas: Vec<f64> = outcomes.iter().map(|o| o.tnas as f64).collect();
        let p: Option<Vec<f64>> = outcomes.iter().map(|o| o.p_favorable).collect();
        let (mean_tnr, std_tnr) = mean_std(&tnr);
        let (mean_tnas, std_tnas) = mean_std(&tnas);
        Summary {
            mean_tnr,
            std_tnr,
            mean_tnas,
            std_tnas,
            mean_p_favorable: p.filter(|v| !v.is_empty()).map(|v| mean_std(&v).0),
        }
    }
}

/// Mean and sample (n − 1) standard deviation; zero spread for fewer than two values.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
