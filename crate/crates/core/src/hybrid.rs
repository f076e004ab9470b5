//! Variable-depth hybrid automata.
//!
//! A Tsetlin automaton does the acting; variable-action-set automata decide,
//! at each action switch, whether the memory depth should grow, stay or
//! shrink. The symmetric variant shares one controller and one depth across
//! all actions; the asymmetric variant keeps a controller and a depth per
//! action.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::automaton::LearningAutomaton;
use crate::error::{Error, Result};
use crate::fsla::{AutomatonState, Fsla};
use crate::probability::{UpdateScheme, Vasla};

pub const DEFAULT_MAX_DEPTH: usize = 20;

/// Structural move chosen by a depth controller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DepthAction {
    Grow,
    Stop,
    Shrink,
}

impl DepthAction {
    pub const ALL: [DepthAction; 3] = [DepthAction::Grow, DepthAction::Stop, DepthAction::Shrink];

    pub const fn index(self) -> usize {
        match self {
            DepthAction::Grow => 0,
            DepthAction::Stop => 1,
            DepthAction::Shrink => 2,
        }
    }

    pub fn from_index(index: usize) -> Self {
        Self::ALL[index]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    Symmetric,
    Asymmetric,
}

/// Depth transitions and total transitions seen since the last switch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DepthCounters {
    pub depth: u64,
    pub transitions: u64,
}

impl DepthCounters {
    /// Share of transitions that landed in the deepest state; 0 when empty.
    pub fn ratio(&self) -> f64 {
        if self.transitions == 0 {
            0.0
        } else {
            self.depth as f64 / self.transitions as f64
        }
    }
}

/// What happened at the most recent switch-time depth decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DepthDecision {
    pub departed: usize,
    pub depth_before: usize,
    /// `None` when the decision was forced rather than drawn from a controller.
    pub chosen: Option<DepthAction>,
    pub applied: DepthAction,
}

#[derive(Debug, Clone)]
pub struct HybridAutomaton {
    fsla: Fsla,
    controllers: Vec<Vasla>,
    counters: Vec<DepthCounters>,
    mode: Symmetry,
    max_depth: usize,
    pending_switch: Option<usize>,
    last_feedback: Option<f64>,
    last_decision: Option<DepthDecision>,
    switches: u64,
}

impl HybridAutomaton {
    /// SVDHLA(K, N, λ1, λ2).
    pub fn symmetric(actions: usize, depth: usize, scheme: UpdateScheme) -> Result<Self> {
        Self::build(vec![depth; actions], scheme, Symmetry::Symmetric)
    }

    /// AVDHLA(K, N₁..N_K, λ1, λ2).
    pub fn asymmetric(depths: Vec<usize>, scheme: UpdateScheme) -> Result<Self> {
        Self::build(depths, scheme, Symmetry::Asymmetric)
    }

    fn build(depths: Vec<usize>, scheme: UpdateScheme, mode: Symmetry) -> Result<Self> {
        let actions = depths.len();
        let fsla = Fsla::with_depths(depths)?;
        let scopes = match mode {
            Symmetry::Symmetric => 1,
            Symmetry::Asymmetric => actions,
        };
        let controller = Vasla::new(DepthAction::ALL.len(), scheme)?;
        let hybrid = HybridAutomaton {
            fsla,
            controllers: vec![controller; scopes],
            counters: vec![DepthCounters::default(); scopes],
            mode,
            max_depth: DEFAULT_MAX_DEPTH,
            pending_switch: None,
            last_feedback: None,
            last_decision: None,
            switches: 0,
        };
        hybrid.check_max_depth()?;
        Ok(hybrid)
    }

    pub fn with_max_depth(mut self, max_depth: usize) -> Result<Self> {
        self.max_depth = max_depth;
        self.check_max_depth()?;
        Ok(self)
    }

    /// Replaces the starting state of the acting automaton.
    pub fn with_initial_state(mut self, state: AutomatonState) -> Result<Self> {
        self.fsla = Fsla::with_state(self.fsla.depths().to_vec(), state)?;
        Ok(self)
    }

    fn check_max_depth(&self) -> Result<()> {
        match self.fsla.depths().iter().max() {
            Some(&deepest) if deepest > self.max_depth => Err(Error::InvalidParameter(format!(
                "depth {deepest} exceeds max depth {}",
                self.max_depth
            ))),
            _ => Ok(()),
        }
    }

    pub fn mode(&self) -> Symmetry {
        self.mode
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn depth_of(&self, action: usize) -> usize {
        self.fsla.depth(action)
    }

    pub fn depths(&self) -> &[usize] {
        self.fsla.depths()
    }

    pub fn state(&self) -> AutomatonState {
        self.fsla.state()
    }

    pub fn controllers(&self) -> &[Vasla] {
        &self.controllers
    }

    pub fn counters(&self) -> &[DepthCounters] {
        &self.counters
    }

    /// The action whose switch still awaits a depth decision.
    pub fn pending_switch(&self) -> Option<usize> {
        self.pending_switch
    }

    /// The β fed to a controller at the most recent switch.
    pub fn last_feedback(&self) -> Option<f64> {
        self.last_feedback
    }

    pub fn last_decision(&self) -> Option<DepthDecision> {
        self.last_decision
    }

    pub fn switch_count(&self) -> u64 {
        self.switches
    }

    fn scope(&self, action: usize) -> usize {
        match self.mode {
            Symmetry::Symmetric => 0,
            Symmetry::Asymmetric => action,
        }
    }

    /// Returns the action to apply, first settling any pending depth decision
    /// with the governing controller.
    pub fn choose(&mut self, rng: &mut dyn RngCore) -> usize {
        if let Some(departed) = self.pending_switch.take() {
            let scope = self.scope(departed);
            let depth = self.fsla.depth(departed);
            let offered: &[usize] = if depth == 1 { &[0, 1] } else { &[0, 1, 2] };
            // A subset whose mass has underflowed to zero can only keep the depth.
            let chosen = self.controllers[scope]
                .choose(offered, rng)
                .map_or(DepthAction::Stop, DepthAction::from_index);
            self.restructure(departed, Some(chosen), chosen);
        }
        self.fsla.current_action()
    }

    /// Like [`HybridAutomaton::choose`] but a pending decision is settled with
    /// `forced` instead of a controller draw; no randomness is consumed.
    pub fn choose_forcing(&mut self, forced: DepthAction) -> usize {
        if let Some(departed) = self.pending_switch.take() {
            self.restructure(departed, None, forced);
        }
        self.fsla.current_action()
    }

    fn restructure(
        &mut self,
        departed: usize,
        chosen: Option<DepthAction>,
        requested: DepthAction,
    ) {
        let depth = self.fsla.depth(departed);
        let applied = match requested {
            DepthAction::Grow if depth >= self.max_depth => DepthAction::Stop,
            DepthAction::Shrink if depth == 1 => DepthAction::Stop,
            other => other,
        };
        let new_depth = match applied {
            DepthAction::Grow => depth + 1,
            DepthAction::Stop => depth,
            DepthAction::Shrink => depth - 1,
        };
        match self.mode {
            Symmetry::Symmetric => self.fsla.set_all_depths(new_depth),
            Symmetry::Asymmetric => self.fsla.set_depth(departed, new_depth),
        }
        let state = self.fsla.state();
        debug_assert!(state.position == self.fsla.depth(state.action));
        self.last_decision = Some(DepthDecision {
            departed,
            depth_before: depth,
            chosen,
            applied,
        });
    }

    /// Feeds one environment response through the counters, the controller
    /// (at a switch) and the acting automaton.
    pub fn feed(&mut self, reward: bool) {
        let current = self.fsla.current_action();
        let scope = self.scope(current);
        if reward {
            if self.fsla.is_depth_transition(true) {
                self.counters[scope].depth += 1;
            }
            self.fsla.step(true);
            self.counters[scope].transitions += 1;
            return;
        }
        self.counters[scope].transitions += 1;
        if self.fsla.is_action_switching(false) {
            let beta = self.counters[scope].ratio();
            // The first switch of a scope has no earlier depth choice to judge.
            self.controllers[scope].reinforce(beta);
            self.last_feedback = Some(beta);
            self.counters[scope] = DepthCounters::default();
            self.pending_switch = Some(current);
            self.switches += 1;
        }
        self.fsla.step(false);
    }
}

impl LearningAutomaton for HybridAutomaton {
    fn num_actions(&self) -> usize {
        self.fsla.num_actions()
    }

    fn select_action(&mut self, rng: &mut dyn RngCore) -> usize {
        self.choose(rng)
    }

    fn update(&mut self, reward: bool) {
        self.feed(reward);
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::seeded_rng;

    fn lrep() -> UpdateScheme {
        UpdateScheme::reward_epsilon_penalty(0.1, 0.01)
    }

    #[test]
    fn one_reward_then_two_penalties_gives_one_third() {
        let mut h = HybridAutomaton::symmetric(2, 2, lrep()).unwrap();
        h.feed(true);
        assert_eq!(
            h.counters()[0],
            DepthCounters {
                depth: 1,
                transitions: 1
            }
        );
        h.feed(false);
        assert_eq!(h.pending_switch(), None);
        h.feed(false);
        assert_eq!(h.last_feedback(), Some(1.0 / 3.0));
        assert_eq!(h.counters()[0], DepthCounters::default());
        assert_eq!(h.pending_switch(), Some(0));
    }

    #[test]
    fn rewards_in_depth_state_then_switch() {
        // depth 1: every reward is a depth transition, the first penalty switches
        for n in 0..6u64 {
            let mut h = HybridAutomaton::symmetric(3, 1, lrep()).unwrap();
            for _ in 0..n {
                h.feed(true);
            }
            h.feed(false);
            let want = n as f64 / (n + 1) as f64;
            assert_eq!(h.last_feedback(), Some(want));
        }
    }

    #[test]
    fn grow_at_three_lengthens_every_action() {
        let mut h = HybridAutomaton::symmetric(3, 3, lrep()).unwrap();
        h.feed(false);
        assert_eq!(h.pending_switch(), Some(0));
        assert_eq!(h.choose_forcing(DepthAction::Grow), 1);
        assert_eq!(h.depths(), &[4, 4, 4]);
        assert_eq!(h.state(), AutomatonState::new(1, 4));
    }

    #[test]
    fn asymmetric_depth_one_never_offered_shrink() {
        let mut h = HybridAutomaton::asymmetric(vec![1, 3, 2, 3], lrep()).unwrap();
        assert_eq!(h.depths(), &[1, 3, 2, 3]);
        let mut rng = seeded_rng(5);
        let mut seen_depth_one = 0;
        for i in 0..20_000 {
            h.choose(&mut rng);
            if let Some(d) = h.last_decision() {
                if d.depth_before == 1 {
                    assert_ne!(d.chosen, Some(DepthAction::Shrink));
                    seen_depth_one += 1;
                }
            }
            h.feed(i % 3 == 0);
        }
        assert!(seen_depth_one > 0);
    }

    #[test]
    fn no_pending_switch_is_pass_through() {
        let mut h = HybridAutomaton::symmetric(2, 4, lrep()).unwrap();
        assert_eq!(h.depth_of(0), 4);
        assert_eq!(h.depth_of(1), 4);
        let before = h.controllers()[0].probabilities().clone();
        let mut rng = seeded_rng(0);
        assert_eq!(h.choose(&mut rng), 0);
        assert_eq!(h.controllers()[0].probabilities(), &before);
        assert_eq!(h.last_decision(), None);
    }

    #[test]
    fn grow_at_cap_degrades_to_stop() {
        let mut h = HybridAutomaton::symmetric(2, 2, lrep())
            .unwrap()
            .with_max_depth(2)
            .unwrap();
        h.feed(false);
        h.choose_forcing(DepthAction::Grow);
        assert_eq!(h.depths(), &[2, 2]);
        assert_eq!(h.last_decision().unwrap().applied, DepthAction::Stop);
        assert!(HybridAutomaton::symmetric(2, 30, lrep()).is_err());
    }

    #[test]
    fn controllers_start_uniform() {
        let h = HybridAutomaton::asymmetric(vec![2; 4], lrep()).unwrap();
        assert_eq!(h.controllers().len(), 4);
        assert_eq!(h.counters().len(), 4);
        for c in h.controllers() {
            assert_eq!(c.probabilities().as_slice(), &[1.0 / 3.0; 3]);
        }
    }

    fn drive(
        h: &mut HybridAutomaton,
        seed: u64,
        signals: &[bool],
        mut check: impl FnMut(&HybridAutomaton, Option<usize>) -> std::result::Result<(), TestCaseError>,
    ) -> std::result::Result<(), TestCaseError> {
        let mut rng = seeded_rng(seed);
        for &s in signals {
            let pending = h.pending_switch();
            h.choose(&mut rng);
            check(h, pending)?;
            h.feed(s);
            check(h, None)?;
        }
        Ok(())
    }

    proptest! {
        #[test]
        fn symmetric_depths_stay_equal_and_bounded(
            k in 1usize..6,
            n in 1usize..6,
            seed in any::<u64>(),
            signals in prop::collection::vec(any::<bool>(), 0..400),
        ) {
            let mut h = HybridAutomaton::symmetric(k, n, lrep()).unwrap().with_max_depth(8).unwrap();
            drive(&mut h, seed, &signals, |h, _| {
                let d = h.depths();
                prop_assert!(d.iter().all(|&x| x == d[0]));
                prop_assert!(d[0] >= 1 && d[0] <= 8);
                let st = h.state();
                prop_assert!(st.position >= 1 && st.position <= h.depth_of(st.action));
                if let Some(beta) = h.last_feedback() {
                    prop_assert!((0.0..=1.0).contains(&beta));
                }
                Ok(())
            })?;
        }

        #[test]
        fn asymmetric_decision_touches_only_departed(
            depths in prop::collection::vec(1usize..5, 2..6),
            seed in any::<u64>(),
            signals in prop::collection::vec(any::<bool>(), 0..400),
        ) {
            let mut h = HybridAutomaton::asymmetric(depths, lrep()).unwrap();
            let mut rng = seeded_rng(seed);
            for &s in &signals {
                let before = h.depths().to_vec();
                let pending = h.pending_switch();
                h.choose(&mut rng);
                let changed: Vec<usize> = (0..before.len()).filter(|&i| before[i] != h.depths()[i]).collect();
                match pending {
                    Some(departed) => prop_assert!(changed.is_empty() || changed == vec![departed]),
                    None => prop_assert!(changed.is_empty()),
                }
                h.feed(s);
                if h.pending_switch().is_some() {
                    let departed = h.pending_switch().unwrap();
                    prop_assert_eq!(h.counters()[departed], DepthCounters::default());
                }
            }
        }
    }
}
