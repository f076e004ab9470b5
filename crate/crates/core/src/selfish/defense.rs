use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::fork_choice::DecisionKind;
use crate::error::{Error, Result};
use crate::fsla::{AutomatonState, Fsla};
use crate::hybrid::{DepthAction, HybridAutomaton, DEFAULT_MAX_DEPTH};
use crate::probability::UpdateScheme;

fn default_controller_depth() -> usize {
    2
}

fn default_max_depth() -> usize {
    DEFAULT_MAX_DEPTH
}

/// Automaton that moves the fail-safe parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ControllerSpec {
    /// Never changes K.
    Fixed,
    Fsla {
        #[serde(default = "default_controller_depth")]
        depth: usize,
    },
    Svdhla {
        #[serde(default = "default_controller_depth")]
        depth: usize,
        scheme: UpdateScheme,
        #[serde(default = "default_max_depth")]
        max_depth: usize,
    },
    Avdhla {
        #[serde(default = "default_controller_depth")]
        depth: usize,
        scheme: UpdateScheme,
        #[serde(default = "default_max_depth")]
        max_depth: usize,
    },
}

impl ControllerSpec {
    pub fn label(&self) -> &'static str {
        match self {
            ControllerSpec::Fixed => "fixed",
            ControllerSpec::Fsla { .. } => "fsla",
            ControllerSpec::Svdhla { .. } => "svdhla",
            ControllerSpec::Avdhla { .. } => "avdhla",
        }
    }

    /// Builds the controller over {Grow, Stop, Shrink}, starting on Stop.
    pub fn build(&self) -> Result<FailSafeController> {
        let start = |depth| AutomatonState::new(DepthAction::Stop.index(), depth);
        Ok(match self {
            ControllerSpec::Fixed => FailSafeController::Fixed,
            ControllerSpec::Fsla { depth } => {
                FailSafeController::Fsla(Fsla::with_state(vec![*depth; 3], start(*depth))?)
            }
            ControllerSpec::Svdhla {
                depth,
                scheme,
                max_depth,
            } => FailSafeController::Hybrid(Box::new(
                HybridAutomaton::symmetric(3, *depth, *scheme)?
                    .with_max_depth(*max_depth)?
                    .with_initial_state(start(*depth))?,
            )),
            ControllerSpec::Avdhla {
                depth,
                scheme,
                max_depth,
            } => FailSafeController::Hybrid(Box::new(
                HybridAutomaton::asymmetric(vec![*depth; 3], *scheme)?
                    .with_max_depth(*max_depth)?
                    .with_initial_state(start(*depth))?,
            )),
        })
    }
}

#[derive(Debug, Clone)]
pub enum FailSafeController {
    Fixed,
    Fsla(Fsla),
    Hybrid(Box<HybridAutomaton>),
}

impl FailSafeController {
    /// The controller's action, degraded to Stop when it is not on offer.
    pub fn choose(&mut self, offered: &[DepthAction], rng: &mut dyn RngCore) -> DepthAction {
        let wanted = match self {
            FailSafeController::Fixed => DepthAction::Stop,
            FailSafeController::Fsla(f) => DepthAction::from_index(f.current_action()),
            FailSafeController::Hybrid(h) => DepthAction::from_index(h.choose(rng)),
        };
        if offered.contains(&wanted) {
            wanted
        } else {
            DepthAction::Stop
        }
    }

    /// Delivers the S-model signal `beta` as a Bernoulli(β) reward, which is
    /// what these P-model automata accept.
    pub fn reinforce(&mut self, beta: f64, rng: &mut dyn RngCore) {
        match self {
            FailSafeController::Fixed => {}
            FailSafeController::Fsla(f) => f.step(rng.gen_bool(beta)),
            FailSafeController::Hybrid(h) => h.feed(rng.gen_bool(beta)),
        }
    }
}

fn default_k_min() -> u64 {
    1
}

fn default_k_max() -> u64 {
    5
}

fn default_tau() -> u64 {
    5
}

fn default_theta() -> u64 {
    10
}

/// Parameters of the fail-safe fork choice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NikSpec {
    pub controller: ControllerSpec,
    #[serde(default = "default_k_min")]
    pub k_min: u64,
    #[serde(default = "default_k_max")]
    pub k_max: u64,
    /// Starting K; defaults to `k_min`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_initial: Option<u64>,
    /// Blocks per decision interval.
    #[serde(default = "default_tau")]
    pub tau: u64,
    /// Decision intervals per feedback interval.
    #[serde(default = "default_theta")]
    pub theta: u64,
}

impl NikSpec {
    pub fn new(controller: ControllerSpec) -> Self {
        NikSpec {
            controller,
            k_min: default_k_min(),
            k_max: default_k_max(),
            k_initial: None,
            tau: default_tau(),
            theta: default_theta(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_min == 0 || self.k_min > self.k_max {
            return Err(Error::InvalidParameter(format!(
                "fail-safe range [{}, {}] is invalid",
                self.k_min, self.k_max
            )));
        }
        if let Some(k) = self.k_initial {
            if !(self.k_min..=self.k_max).contains(&k) {
                return Err(Error::InvalidParameter(format!(
                    "initial K {k} outside range"
                )));
            }
        }
        if self.tau == 0 || self.theta == 0 {
            return Err(Error::InvalidParameter(
                "tau and theta must be positive".into(),
            ));
        }
        self.controller.build().map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DefenseSpec {
    /// Longest chain; equal-length forks split honest power by γ.
    TieBreaking,
    Nik(NikSpec),
}

impl DefenseSpec {
    pub fn label(&self) -> &'static str {
        match self {
            DefenseSpec::TieBreaking => "tie-breaking",
            DefenseSpec::Nik(_) => "nik",
        }
    }

    pub fn controller_label(&self) -> &'static str {
        match self {
            DefenseSpec::TieBreaking => "none",
            DefenseSpec::Nik(n) => n.controller.label(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DefenseSpec::TieBreaking => Ok(()),
            DefenseSpec::Nik(n) => n.validate(),
        }
    }
}

/// Running state of the fail-safe defense, shared by the honest pool.
#[derive(Debug, Clone)]
pub struct NikDefense {
    controller: FailSafeController,
    k: u64,
    k_min: u64,
    k_max: u64,
    tau: u64,
    theta: u64,
    taus: u64,
    window_weight: u64,
    window_total: u64,
    run_weight: u64,
    run_total: u64,
    last_beta: Option<f64>,
}

impl NikDefense {
    pub fn new(spec: &NikSpec) -> Result<Self> {
        spec.validate()?;
        Ok(NikDefense {
            controller: spec.controller.build()?,
            k: spec.k_initial.unwrap_or(spec.k_min),
            k_min: spec.k_min,
            k_max: spec.k_max,
            tau: spec.tau,
            theta: spec.theta,
            taus: 0,
            window_weight: 0,
            window_total: 0,
            run_weight: 0,
            run_total: 0,
            last_beta: None,
        })
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn last_beta(&self) -> Option<f64> {
        self.last_beta
    }

    /// (weight decisions, total decisions) over the whole run.
    pub fn decisions(&self) -> (u64, u64) {
        (self.run_weight, self.run_total)
    }

    /// (weight decisions, total decisions) in the current feedback window.
    pub fn window(&self) -> (u64, u64) {
        (self.window_weight, self.window_total)
    }

    pub fn record(&mut self, kind: DecisionKind) {
        self.window_total += 1;
        self.run_total += 1;
        if kind == DecisionKind::Weight {
            self.window_weight += 1;
            self.run_weight += 1;
        }
    }

    /// Actions the controller may pick at the current K.
    pub fn offered(&self) -> &'static [DepthAction] {
        use DepthAction::*;
        match (self.k == self.k_max, self.k == self.k_min) {
            (true, true) => &[Stop],
            (true, false) => &[Stop, Shrink],
            (false, true) => &[Grow, Stop],
            (false, false) => &[Grow, Stop, Shrink],
        }
    }

    /// One decision-interval step of the fail-safe parameter.
    pub fn update_fail_safe(&mut self, rng: &mut dyn RngCore) -> DepthAction {
        let action = self.controller.choose(self.offered(), rng);
        match action {
            DepthAction::Grow => self.k += 1,
            DepthAction::Shrink => self.k -= 1,
            DepthAction::Stop => {}
        }
        debug_assert!((self.k_min..=self.k_max).contains(&self.k));
        action
    }

    /// Share of weight decisions in the window (0 without decisions), fed to
    /// the controller; the window counters restart.
    pub fn controller_feedback(&mut self, rng: &mut dyn RngCore) -> f64 {
        let beta = if self.window_total == 0 {
            0.0
        } else {
            self.window_weight as f64 / self.window_total as f64
        };
        self.controller.reinforce(beta, rng);
        self.window_weight = 0;
        self.window_total = 0;
        self.last_beta = Some(beta);
        beta
    }

    /// Advances the block clock; returns true at a decision-interval boundary.
    pub fn on_block(&mut self, tick: u64, rng: &mut dyn RngCore) -> bool {
        if !tick.is_multiple_of(self.tau) {
            return false;
        }
        self.taus += 1;
        if self.taus.is_multiple_of(self.theta) {
            self.controller_feedback(rng);
        }
        self.update_fail_safe(rng);
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded_rng;

    fn defense(controller: ControllerSpec, k_min: u64, k_max: u64) -> NikDefense {
        NikDefense::new(&NikSpec {
            k_min,
            k_max,
            ..NikSpec::new(controller)
        })
        .unwrap()
    }

    fn svdhla() -> ControllerSpec {
        ControllerSpec::Svdhla {
            depth: 2,
            scheme: UpdateScheme::reward_epsilon_penalty(0.1, 0.01),
            max_depth: DEFAULT_MAX_DEPTH,
        }
    }

    #[test]
    fn beta_is_weight_share() {
        let mut d = defense(ControllerSpec::Fixed, 1, 5);
        let mut rng = seeded_rng(0);
        assert_eq!(d.controller_feedback(&mut rng), 0.0);
        for kind in [
            DecisionKind::Weight,
            DecisionKind::Weight,
            DecisionKind::Length,
            DecisionKind::Weight,
        ] {
            d.record(kind);
        }
        assert_eq!(d.controller_feedback(&mut rng), 0.75);
        assert_eq!(d.window(), (0, 0));
        assert_eq!(d.decisions(), (3, 4));
        d.record(DecisionKind::Weight);
        assert_eq!(d.controller_feedback(&mut rng), 1.0);
    }

    #[test]
    fn offered_sets_follow_the_bounds() {
        let mut d = defense(svdhla(), 1, 5);
        assert_eq!(d.offered(), &[DepthAction::Grow, DepthAction::Stop]);
        d.k = 5;
        assert_eq!(d.offered(), &[DepthAction::Stop, DepthAction::Shrink]);
        d.k = 3;
        assert_eq!(d.offered().len(), 3);
        let d = defense(svdhla(), 2, 2);
        assert_eq!(d.offered(), &[DepthAction::Stop]);
    }

    #[test]
    fn k_stays_in_range() {
        for controller in [svdhla(), ControllerSpec::Fsla { depth: 1 }] {
            let mut d = defense(controller, 1, 3);
            let mut rng = seeded_rng(17);
            for tick in 1..=20_000u64 {
                if rng.gen_bool(0.3) {
                    d.record(if rng.gen_bool(0.5) {
                        DecisionKind::Weight
                    } else {
                        DecisionKind::Length
                    });
                }
                d.on_block(tick, &mut rng);
                assert!((1..=3).contains(&d.k()));
            }
        }
    }

    #[test]
    fn pinned_range_never_moves() {
        let mut d = defense(svdhla(), 3, 3);
        let mut rng = seeded_rng(2);
        for tick in 1..=5_000 {
            d.record(DecisionKind::Length);
            d.on_block(tick, &mut rng);
            assert_eq!(d.k(), 3);
        }
    }

    #[test]
    fn at_k_max_only_stop_or_shrink() {
        let mut rng = seeded_rng(4);
        for seed in 0..50 {
            let mut d = defense(svdhla(), 1, 4);
            d.k = 4;
            let mut r = seeded_rng(seed);
            let _ = &mut rng;
            let a = d.update_fail_safe(&mut r);
            assert_ne!(a, DepthAction::Grow);
            assert!(d.k() == 4 || d.k() == 3);
        }
    }

    #[test]
    fn rejects_bad_ranges() {
        assert!(NikSpec {
            k_min: 0,
            ..NikSpec::new(ControllerSpec::Fixed)
        }
        .validate()
        .is_err());
        assert!(NikSpec {
            k_min: 4,
            k_max: 2,
            ..NikSpec::new(ControllerSpec::Fixed)
        }
        .validate()
        .is_err());
        assert!(NikSpec {
            k_initial: Some(9),
            ..NikSpec::new(ControllerSpec::Fixed)
        }
        .validate()
        .is_err());
        assert!(NikSpec {
            tau: 0,
            ..NikSpec::new(ControllerSpec::Fixed)
        }
        .validate()
        .is_err());
    }
}
