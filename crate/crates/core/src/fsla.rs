//! Fixed-structure automaton `L_{KN,K}` (Tsetlin) with per-action depths.
//!
//! Actions are indexed from 0. Positions are counted from 1, the deepest
//! state, up to the action's depth, its boundary state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Location of a fixed-structure automaton in its state graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AutomatonState {
    pub action: usize,
    pub position: usize,
}

impl AutomatonState {
    pub const fn new(action: usize, position: usize) -> Self {
        AutomatonState { action, position }
    }
}

/// State reached from `state` after one signal.
///
/// A reward moves one step deeper (floored at 1). A penalty moves one step
/// outward; from the boundary it hands over to the next action clockwise,
/// entering at that action's own boundary.
pub fn next_state(depths: &[usize], state: AutomatonState, reward: bool) -> AutomatonState {
    if reward {
        AutomatonState {
            position: state.position.saturating_sub(1).max(1),
            ..state
        }
    } else if state.position >= depths[state.action] {
        let action = (state.action + 1) % depths.len();
        AutomatonState::new(action, depths[action])
    } else {
        AutomatonState {
            position: state.position + 1,
            ..state
        }
    }
}

/// True when a penalty would move the automaton to another action.
pub fn is_action_switching(depths: &[usize], state: AutomatonState, reward: bool) -> bool {
    !reward && state.position == depths[state.action]
}

/// True when a reward lands in (or stays at) the deepest state.
pub fn is_depth_transition(state: AutomatonState, reward: bool) -> bool {
    reward && state.position <= 2
}

/// A Tsetlin automaton with an independent depth for every action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fsla {
    depths: Vec<usize>,
    state: AutomatonState,
}

impl Fsla {
    /// `actions` actions of equal depth, starting at the first action's boundary.
    pub fn new(actions: usize, depth: usize) -> Result<Self> {
        Self::with_depths(vec![depth; actions])
    }

    pub fn with_depths(depths: Vec<usize>) -> Result<Self> {
        let start = AutomatonState::new(0, depths.first().copied().unwrap_or(0));
        Self::with_state(depths, start)
    }

    pub fn with_state(depths: Vec<usize>, state: AutomatonState) -> Result<Self> {
        if depths.is_empty() {
            return Err(Error::InvalidParameter(
                "FSLA needs at least one action".into(),
            ));
        }
        if depths.contains(&0) {
            return Err(Error::InvalidParameter(
                "every depth must be at least 1".into(),
            ));
        }
        if state.action >= depths.len()
            || state.position == 0
            || state.position > depths[state.action]
        {
            return Err(Error::InvalidParameter(format!(
                "state {state:?} outside the automaton"
            )));
        }
        Ok(Fsla { depths, state })
    }

    pub fn state(&self) -> AutomatonState {
        self.state
    }

    pub fn depths(&self) -> &[usize] {
        &self.depths
    }

    pub fn depth(&self, action: usize) -> usize {
        self.depths[action]
    }

    pub fn num_actions(&self) -> usize {
        self.depths.len()
    }

    /// The current action; selection is a pure projection of the state.
    pub fn current_action(&self) -> usize {
        self.state.action
    }

    pub fn step(&mut self, reward: bool) {
        self.state = next_state(&self.depths, self.state, reward);
    }

    pub fn is_action_switching(&self, reward: bool) -> bool {
        is_action_switching(&self.depths, self.state, reward)
    }

    pub fn is_depth_transition(&self, reward: bool) -> bool {
        is_depth_transition(self.state, reward)
    }

    /// Changes one action's depth.
    ///
    /// Depths are only restructured at action switches; when the modified
    /// action is the current one it is re-entered at its new boundary.
    pub fn set_depth(&mut self, action: usize, depth: usize) {
        assert!(depth >= 1, "depth must be at least 1");
        self.depths[action] = depth;
        if action == self.state.action {
            self.state.position = depth;
        }
    }

    /// Sets every action to the same depth, re-entering the current action at its boundary.
    pub fn set_all_depths(&mut self, depth: usize) {
        assert!(depth >= 1, "depth must be at least 1");
        self.depths.iter_mut().for_each(|d| *d = depth);
        self.state.position = depth;
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    const S: fn(usize, usize) -> AutomatonState = AutomatonState::new;

    #[test]
    fn four_action_depth_two_walkthrough() {
        let d = [2; 4];
        assert_eq!(next_state(&d, S(0, 2), true), S(0, 1));
        assert_eq!(next_state(&d, S(0, 2), false), S(1, 2));
        assert_eq!(next_state(&d, S(0, 1), true), S(0, 1));
        assert_eq!(next_state(&d, S(0, 1), false), S(0, 2));
        assert_eq!(next_state(&d, S(3, 2), false), S(0, 2));
    }

    #[test]
    fn switch_enters_next_action_at_its_own_boundary() {
        let d = [1, 3, 2, 3];
        assert_eq!(next_state(&d, S(0, 1), false), S(1, 3));
        assert_eq!(next_state(&d, S(1, 3), false), S(2, 2));
    }

    #[test]
    fn switching_and_depth_predicates() {
        let d = [2, 2];
        assert!(is_action_switching(&d, S(0, 1 + 1), false));
        assert!(!is_action_switching(&d, S(0, 1), false));
        assert!(!is_action_switching(&d, S(0, 2), true));

        assert!(is_depth_transition(S(1, 2), true));
        assert!(is_depth_transition(S(1, 1), true));
        assert!(!is_depth_transition(S(1, 3), true));
        assert!(!is_depth_transition(S(1, 1), false));
    }

    #[test]
    fn constructor_validation() {
        assert!(Fsla::new(0, 2).is_err());
        assert!(Fsla::new(3, 0).is_err());
        assert!(Fsla::with_state(vec![2, 2], S(0, 3)).is_err());
        let f = Fsla::with_depths(vec![1, 3, 2, 3]).unwrap();
        assert_eq!(f.state(), S(0, 1));
        assert_eq!(f.depths(), &[1, 3, 2, 3]);
    }

    #[test]
    fn restructuring_current_action_reenters_boundary() {
        let mut f = Fsla::with_state(vec![3, 3], S(0, 1)).unwrap();
        f.set_depth(0, 2);
        assert_eq!(f.state(), S(0, 2));
        f.set_depth(1, 5);
        assert_eq!(f.state(), S(0, 2));
        f.set_all_depths(4);
        assert_eq!(f.state(), S(0, 4));
    }

    proptest! {
        #[test]
        fn positions_stay_in_bounds(
            depths in prop::collection::vec(1usize..8, 1..6),
            signals in prop::collection::vec(any::<bool>(), 0..500),
        ) {
            let mut f = Fsla::with_depths(depths).unwrap();
            for s in signals {
                f.step(s);
                let st = f.state();
                prop_assert!(st.action < f.num_actions());
                prop_assert!(st.position >= 1 && st.position <= f.depth(st.action));
            }
        }

        #[test]
        fn k_boundary_penalties_cycle_back(k in 1usize..10, n in 1usize..6) {
            let mut f = Fsla::new(k, n).unwrap();
            let start = f.state();
            for _ in 0..k {
                f.step(false);
            }
            prop_assert_eq!(f.state(), start);
        }
    }
}
