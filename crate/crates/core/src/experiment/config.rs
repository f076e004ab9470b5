use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::automaton::{LearningAutomaton, PureChance};
use crate::environment::EnvironmentSpec;
use crate::error::{Error, Result};
use crate::fsla::Fsla;
use crate::hybrid::{HybridAutomaton, DEFAULT_MAX_DEPTH};
use crate::probability::{UpdateScheme, Vsla};

/// Seeds used when a config does not list its own.
pub const DEFAULT_SEED_COUNT: u64 = 30;

fn default_max_depth() -> usize {
    DEFAULT_MAX_DEPTH
}

fn default_seeds() -> Vec<u64> {
    (0..DEFAULT_SEED_COUNT).collect()
}

/// Which automaton to run and with what parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AutomatonSpec {
    PureChance {
        actions: usize,
    },
    Fsla {
        actions: usize,
        depth: usize,
    },
    Vsla {
        actions: usize,
        scheme: UpdateScheme,
    },
    /// SVDHLA(K, N, λ1, λ2)
    Svdhla {
        actions: usize,
        depth: usize,
        scheme: UpdateScheme,
        #[serde(default = "default_max_depth")]
        max_depth: usize,
    },
    /// AVDHLA(K, N₁..N_K, λ1, λ2); K is the length of `depths`.
    Avdhla {
        depths: Vec<usize>,
        scheme: UpdateScheme,
        #[serde(default = "default_max_depth")]
        max_depth: usize,
    },
}

impl AutomatonSpec {
    pub fn num_actions(&self) -> usize {
        match self {
            AutomatonSpec::PureChance { actions }
            | AutomatonSpec::Fsla { actions, .. }
            | AutomatonSpec::Vsla { actions, .. }
            | AutomatonSpec::Svdhla { actions, .. } => *actions,
            AutomatonSpec::Avdhla { depths, .. } => depths.len(),
        }
    }

    /// Short label used in file names and tables.
    pub fn label(&self) -> &'static str {
        match self {
            AutomatonSpec::PureChance { .. } => "pure-chance",
            AutomatonSpec::Fsla { .. } => "fsla",
            AutomatonSpec::Vsla { .. } => "vsla",
            AutomatonSpec::Svdhla { .. } => "svdhla",
            AutomatonSpec::Avdhla { .. } => "avdhla",
        }
    }

    pub fn build(&self) -> Result<Box<dyn LearningAutomaton + Send>> {
        Ok(match self {
            AutomatonSpec::PureChance { actions } => {
                if *actions == 0 {
                    return Err(Error::InvalidParameter("need at least one action".into()));
                }
                Box::new(PureChance::new(*actions))
            }
            AutomatonSpec::Fsla { actions, depth } => Box::new(Fsla::new(*actions, *depth)?),
            AutomatonSpec::Vsla { actions, scheme } => Box::new(Vsla::new(*actions, *scheme)?),
            AutomatonSpec::Svdhla {
                actions,
                depth,
                scheme,
                max_depth,
            } => Box::new(
                HybridAutomaton::symmetric(*actions, *depth, *scheme)?
                    .with_max_depth(*max_depth)?,
            ),
            AutomatonSpec::Avdhla {
                depths,
                scheme,
                max_depth,
            } => Box::new(
                HybridAutomaton::asymmetric(depths.clone(), *scheme)?.with_max_depth(*max_depth)?,
            ),
        })
    }
}

/// One experiment: an automaton facing an environment for a number of
/// iterations, repeated over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub iterations: usize,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Action whose selection frequency is tracked, if the environment has one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub favorable_action: Option<usize>,
    pub automaton: AutomatonSpec,
    pub environment: EnvironmentSpec,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| crate::error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment configs always serialize")
    }

    /// Checks everything that can be checked without simulating.
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::Config(format!(
                "invalid experiment name {:?}",
                self.name
            )));
        }
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        self.automaton.build()?;
        self.environment.build()?;
        let (ka, ke) = (self.automaton.num_actions(), self.environment.num_actions());
        if ka != ke {
            return Err(Error::Config(format!(
                "automaton has {ka} actions but the environment has {ke}"
            )));
        }
        if let Some(f) = self.favorable_action {
            if f >= ka {
                return Err(Error::Config(format!("favorable action {f} out of range")));
            }
        }
        Ok(())
    }
}
