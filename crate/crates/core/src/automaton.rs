//! The common choose/reinforce interface shared by every automaton used in
//! the experiments.

use rand::{Rng, RngCore};

use crate::fsla::Fsla;
use crate::probability::Vsla;

/// An automaton interacting with a P-model environment.
pub trait LearningAutomaton {
    fn num_actions(&self) -> usize;

    /// Picks the action to apply at this instant.
    fn select_action(&mut self, rng: &mut dyn RngCore) -> usize;

    /// Feeds back the environment's response to the last selected action.
    fn update(&mut self, reward: bool);
}

/// Uniform draw from `0..k`.
pub fn pure_chance_select<R: Rng + ?Sized>(k: usize, rng: &mut R) -> usize {
    assert!(k >= 1, "need at least one action");
    rng.gen_range(0..k)
}

/// Chooses uniformly at random and ignores all feedback.
#[derive(Debug, Clone, Copy)]
pub struct PureChance {
    actions: usize,
}

impl PureChance {
    pub fn new(actions: usize) -> Self {
        assert!(actions >= 1, "need at least one action");
        PureChance { actions }
    }
}

impl LearningAutomaton for PureChance {
    fn num_actions(&self) -> usize {
        self.actions
    }

    fn select_action(&mut self, rng: &mut dyn RngCore) -> usize {
        pure_chance_select(self.actions, rng)
    }

    fn update(&mut self, _reward: bool) {}
}

impl LearningAutomaton for Fsla {
    fn num_actions(&self) -> usize {
        Fsla::num_actions(self)
    }

    fn select_action(&mut self, _rng: &mut dyn RngCore) -> usize {
        self.current_action()
    }

    fn update(&mut self, reward: bool) {
        self.step(reward);
    }
}

impl LearningAutomaton for Vsla {
    fn num_actions(&self) -> usize {
        self.probabilities().len()
    }

    fn select_action(&mut self, rng: &mut dyn RngCore) -> usize {
        self.choose(rng)
    }

    fn update(&mut self, reward: bool) {
        self.reinforce(reward);
    }
}

impl<A: LearningAutomaton + ?Sized> LearningAutomaton for Box<A> {
    fn num_actions(&self) -> usize {
        (**self).num_actions()
    }

    fn select_action(&mut self, rng: &mut dyn RngCore) -> usize {
        (**self).select_action(rng)
    }

    fn update(&mut self, reward: bool) {
        (**self).update(reward)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded_rng;

    #[test]
    fn singleton_always_first() {
        let mut rng = seeded_rng(1);
        assert!((0..100).all(|_| pure_chance_select(1, &mut rng) == 0));
    }

    #[test]
    fn two_actions_are_balanced() {
        let mut rng = seeded_rng(42);
        let n = 100_000;
        let first = (0..n)
            .filter(|_| pure_chance_select(2, &mut rng) == 0)
            .count();
        let freq = first as f64 / n as f64;
        assert!((0.49..=0.51).contains(&freq), "frequency {freq}");
    }

    #[test]
    fn seeded_draws_repeat() {
        let draw = |seed| {
            let mut rng = seeded_rng(seed);
            (0..50)
                .map(|_| pure_chance_select(7, &mut rng))
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
        assert_ne!(draw(9), draw(10));
    }

    #[test]
    fn fsla_through_trait_object() {
        let mut a: Box<dyn LearningAutomaton> = Box::new(Fsla::new(3, 1).unwrap());
        let mut rng = seeded_rng(0);
        assert_eq!(a.select_action(&mut rng), 0);
        a.update(false);
        assert_eq!(a.select_action(&mut rng), 1);
        a.update(true);
        assert_eq!(a.select_action(&mut rng), 1);
    }
}
