//! P-model environments: stationary, Markovian switching and
//! state-dependent (Model A).

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::markov::{self, TransitionMatrix};

/// Source of binary reinforcement for a chosen action.
pub trait Environment {
    fn num_actions(&self) -> usize;

    /// Current reward probability of `action`.
    fn reward_probability(&self, action: usize) -> f64;

    /// Rewards (`true`) or penalizes the applied action, then advances any
    /// internal dynamics.
    fn respond(&mut self, action: usize, rng: &mut dyn RngCore) -> bool;
}

fn check_probabilities(what: &str, values: &[f64]) -> Result<()> {
    match values
        .iter()
        .find(|x| !x.is_finite() || **x < 0.0 || **x > 1.0)
    {
        Some(x) => Err(Error::InvalidParameter(format!(
            "{what} value {x} outside [0, 1]"
        ))),
        None => Ok(()),
    }
}

/// Fixed reward probability `d_i` per action.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryEnv {
    reward_probs: Vec<f64>,
}

impl StationaryEnv {
    pub fn new(reward_probs: Vec<f64>) -> Result<Self> {
        if reward_probs.is_empty() {
            return Err(Error::InvalidParameter(
                "environment needs at least one action".into(),
            ));
        }
        check_probabilities("reward probability", &reward_probs)?;
        Ok(StationaryEnv { reward_probs })
    }

    /// One favorable action (the first) rewarded with probability `best`; the
    /// remaining `1 − best` is split evenly over the other actions.
    pub fn one_favorable(actions: usize, best: f64) -> Result<Self> {
        if actions < 2 {
            return Err(Error::InvalidParameter("need at least two actions".into()));
        }
        let rest = (1.0 - best) / (actions - 1) as f64;
        let mut probs = vec![rest; actions];
        probs[0] = best;
        Self::new(probs)
    }

    pub fn reward_probs(&self) -> &[f64] {
        &self.reward_probs
    }
}

impl Environment for StationaryEnv {
    fn num_actions(&self) -> usize {
        self.reward_probs.len()
    }

    fn reward_probability(&self, action: usize) -> f64 {
        self.reward_probs[action]
    }

    fn respond(&mut self, action: usize, rng: &mut dyn RngCore) -> bool {
        rng.gen_bool(self.reward_probs[action])
    }
}

/// Reward probabilities governed by a hidden Markov chain over component
/// environments. The chain takes one step per interaction.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovSwitchingEnv {
    transition: TransitionMatrix,
    reward: Vec<Vec<f64>>,
    state: usize,
}

impl MarkovSwitchingEnv {
    pub fn new(
        transition: TransitionMatrix,
        reward: Vec<Vec<f64>>,
        initial_state: usize,
    ) -> Result<Self> {
        let states = transition.size();
        if reward.len() != states {
            return Err(Error::InvalidParameter(format!(
                "reward matrix has {} rows for {states} states",
                reward.len()
            )));
        }
        let actions = reward[0].len();
        if actions == 0 || reward.iter().any(|r| r.len() != actions) {
            return Err(Error::InvalidParameter(
                "reward matrix rows must share a nonzero length".into(),
            ));
        }
        for row in &reward {
            check_probabilities("reward probability", row)?;
        }
        if initial_state >= states {
            return Err(Error::InvalidParameter(format!(
                "initial state {initial_state} out of range for {states} states"
            )));
        }
        Ok(MarkovSwitchingEnv {
            transition,
            reward,
            state: initial_state,
        })
    }

    pub fn transition(&self) -> &TransitionMatrix {
        &self.transition
    }

    pub fn reward_matrix(&self) -> &[Vec<f64>] {
        &self.reward
    }

    pub fn current_state(&self) -> usize {
        self.state
    }

    /// Moves the chain one step along the current state's row.
    pub fn advance(&mut self, rng: &mut dyn RngCore) {
        let u: f64 = rng.gen();
        let row = self.transition.row(self.state);
        let mut acc = 0.0;
        let mut next = row.iter().rposition(|&p| p > 0.0).unwrap_or(self.state);
        for (j, &p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                next = j;
                break;
            }
        }
        self.state = next;
    }

    /// The stationary environment this chain averages out to.
    pub fn effective_stationary(&self) -> Result<StationaryEnv> {
        StationaryEnv::new(markov::effective_stationary(
            &self.transition,
            &self.reward,
        )?)
    }
}

impl Environment for MarkovSwitchingEnv {
    fn num_actions(&self) -> usize {
        self.reward[0].len()
    }

    fn reward_probability(&self, action: usize) -> f64 {
        self.reward[self.state][action]
    }

    fn respond(&mut self, action: usize, rng: &mut dyn RngCore) -> bool {
        let reward = rng.gen_bool(self.reward[self.state][action]);
        self.advance(rng);
        reward
    }
}

/// Model A: every use of an action makes it worse by `θ` and every other
/// action better by `φ`, both clamped to stay inside `[0, 1]`.
///
/// Stored in reward space (`d = 1 − c`), so the chosen action's reward
/// probability drops and the others rise.
#[derive(Debug, Clone, PartialEq)]
pub struct StateDependentEnv {
    reward_probs: Vec<f64>,
    theta: Vec<f64>,
    phi: Vec<f64>,
}

impl StateDependentEnv {
    pub fn new(reward_probs: Vec<f64>, theta: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        let k = reward_probs.len();
        if k == 0 {
            return Err(Error::InvalidParameter(
                "environment needs at least one action".into(),
            ));
        }
        if theta.len() != k || phi.len() != k {
            return Err(Error::InvalidParameter(format!(
                "theta and phi need one entry per action ({k})"
            )));
        }
        check_probabilities("reward probability", &reward_probs)?;
        check_probabilities("theta", &theta)?;
        check_probabilities("phi", &phi)?;
        Ok(StateDependentEnv {
            reward_probs,
            theta,
            phi,
        })
    }

    /// Same `θ` and `φ` for every action.
    pub fn uniform_drift(reward_probs: Vec<f64>, theta: f64, phi: f64) -> Result<Self> {
        let k = reward_probs.len();
        Self::new(reward_probs, vec![theta; k], vec![phi; k])
    }

    pub fn reward_probs(&self) -> &[f64] {
        &self.reward_probs
    }

    /// Applies one stage of drift after `chosen` was used.
    pub fn drift(&mut self, chosen: usize) {
        for (j, d) in self.reward_probs.iter_mut().enumerate() {
            *d = if j == chosen {
                (*d - self.theta[j]).max(0.0)
            } else {
                (*d + self.phi[j]).min(1.0)
            };
        }
    }
}

impl Environment for StateDependentEnv {
    fn num_actions(&self) -> usize {
        self.reward_probs.len()
    }

    fn reward_probability(&self, action: usize) -> f64 {
        self.reward_probs[action]
    }

    fn respond(&mut self, action: usize, rng: &mut dyn RngCore) -> bool {
        let reward = rng.gen_bool(self.reward_probs[action]);
        self.drift(action);
        reward
    }
}

/// Declarative environment description as it appears in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EnvironmentSpec {
    Stationary {
        reward_probs: Vec<f64>,
    },
    Markov {
        transition: Vec<Vec<f64>>,
        reward: Vec<Vec<f64>>,
        #[serde(default)]
        initial_state: usize,
    },
    StateDependent {
        reward_probs: Vec<f64>,
        theta: Vec<f64>,
        phi: Vec<f64>,
    },
}

impl EnvironmentSpec {
    pub fn build(&self) -> Result<AnyEnvironment> {
        Ok(match self {
            EnvironmentSpec::Stationary { reward_probs } => {
                AnyEnvironment::Stationary(StationaryEnv::new(reward_probs.clone())?)
            }
            EnvironmentSpec::Markov {
                transition,
                reward,
                initial_state,
            } => AnyEnvironment::Markov(MarkovSwitchingEnv::new(
                TransitionMatrix::new(transition.clone())?,
                reward.clone(),
                *initial_state,
            )?),
            EnvironmentSpec::StateDependent {
                reward_probs,
                theta,
                phi,
            } => AnyEnvironment::StateDependent(StateDependentEnv::new(
                reward_probs.clone(),
                theta.clone(),
                phi.clone(),
            )?),
        })
    }

    pub fn num_actions(&self) -> usize {
        match self {
            EnvironmentSpec::Stationary { reward_probs }
            | EnvironmentSpec::StateDependent { reward_probs, .. } => reward_probs.len(),
            EnvironmentSpec::Markov { reward, .. } => reward.first().map_or(0, Vec::len),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnyEnvironment {
    Stationary(StationaryEnv),
    Markov(MarkovSwitchingEnv),
    StateDependent(StateDependentEnv),
}

impl Environment for AnyEnvironment {
    fn num_actions(&self) -> usize {
        match self {
            AnyEnvironment::Stationary(e) => e.num_actions(),
            AnyEnvironment::Markov(e) => e.num_actions(),
            AnyEnvironment::StateDependent(e) => e.num_actions(),
        }
    }

    fn reward_probability(&self, action: usize) -> f64 {
        match self {
            AnyEnvironment::Stationary(e) => e.reward_probability(action),
            AnyEnvironment::Markov(e) => e.reward_probability(action),
            AnyEnvironment::StateDependent(e) => e.reward_probability(action),
        }
    }

    fn respond(&mut self, action: usize, rng: &mut dyn RngCore) -> bool {
        match self {
            AnyEnvironment::Stationary(e) => e.respond(action, rng),
            AnyEnvironment::Markov(e) => e.respond(action, rng),
            AnyEnvironment::StateDependent(e) => e.respond(action, rng),
        }
    }
}
