//! Action probability vectors and the linear reinforcement schemes that move
//! them: the classical VSLA update and the variable-action-set (VASLA) form,
//! which also accepts a continuous S-model signal.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest accepted deviation of a probability vector's sum from one.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Drift above which an updated vector is renormalized.
const RENORMALIZE_THRESHOLD: f64 = 1e-12;

/// Nonnegative weights over an action set that sum to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidProbabilities("empty vector".into()));
        }
        if let Some(w) = weights
            .iter()
            .find(|w| !w.is_finite() || **w < 0.0 || **w > 1.0)
        {
            return Err(Error::InvalidProbabilities(format!(
                "weight {w} outside [0, 1]"
            )));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidProbabilities(format!("weights sum to {sum}")));
        }
        Ok(ProbabilityVector(weights))
    }

    pub fn uniform(len: usize) -> Self {
        assert!(len > 0, "probability vector needs at least one action");
        ProbabilityVector(vec![1.0 / len as f64; len])
    }

    /// Wraps the output of an update rule, clamping round-off below zero and
    /// renormalizing when the sum has drifted.
    fn from_update(mut weights: Vec<f64>) -> Self {
        for w in &mut weights {
            if *w < 0.0 {
                *w = 0.0;
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > RENORMALIZE_THRESHOLD {
            for w in &mut weights {
                *w /= sum;
            }
        }
        ProbabilityVector(weights)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, index: usize) -> f64 {
        self.0[index]
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Draws an index by inverting the cumulative distribution.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, w) in self.0.iter().enumerate() {
            acc += w;
            if u < acc {
                return i;
            }
        }
        // u landed in the round-off gap at the top of the CDF
        self.0.iter().rposition(|w| *w > 0.0).unwrap_or(0)
    }
}

impl AsRef<[f64]> for ProbabilityVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Named families of linear schemes, classified by their two rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    PureChance,
    RewardInaction,
    PenaltyInaction,
    RewardPenalty,
    RewardEpsilonPenalty,
    /// Penalty rate larger than a nonzero reward rate; not one of the named presets.
    Unnamed,
}

/// Reward rate `λ1` and penalty rate `λ2` of a linear update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UpdateScheme {
    pub reward: f64,
    pub penalty: f64,
}

impl UpdateScheme {
    pub fn new(reward: f64, penalty: f64) -> Result<Self> {
        let scheme = UpdateScheme { reward, penalty };
        scheme.validate()?;
        Ok(scheme)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, rate) in [("reward", self.reward), ("penalty", self.penalty)] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::InvalidParameter(format!(
                    "{name} rate {rate} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }

    pub const fn pure_chance() -> Self {
        UpdateScheme {
            reward: 0.0,
            penalty: 0.0,
        }
    }

    /// `L_{R-I}`
    pub const fn reward_inaction(rate: f64) -> Self {
        UpdateScheme {
            reward: rate,
            penalty: 0.0,
        }
    }

    /// `L_{P-I}`
    pub const fn penalty_inaction(rate: f64) -> Self {
        UpdateScheme {
            reward: 0.0,
            penalty: rate,
        }
    }

    /// `L_{R-P}`
    pub const fn reward_penalty(rate: f64) -> Self {
        UpdateScheme {
            reward: rate,
            penalty: rate,
        }
    }

    /// `L_{R-εP}`; the reward rate must exceed the penalty rate.
    pub fn reward_epsilon_penalty(reward: f64, penalty: f64) -> Self {
        assert!(reward > penalty, "L_R-eP needs reward > penalty");
        UpdateScheme { reward, penalty }
    }

    pub fn kind(&self) -> SchemeKind {
        match (self.reward == 0.0, self.penalty == 0.0) {
            (true, true) => SchemeKind::PureChance,
            (false, true) => SchemeKind::RewardInaction,
            (true, false) => SchemeKind::PenaltyInaction,
            (false, false) if self.reward == self.penalty => SchemeKind::RewardPenalty,
            (false, false) if self.reward > self.penalty => SchemeKind::RewardEpsilonPenalty,
            _ => SchemeKind::Unnamed,
        }
    }

    /// A scheme that can never move a probability vector.
    pub fn is_inert(&self) -> bool {
        self.kind() == SchemeKind::PureChance
    }
}

/// Linear P-model update of a full action set.
///
/// On reward the chosen weight moves toward one by `λ1`; on penalty it
/// shrinks by `λ2` and the freed mass is spread evenly over the others.
pub fn vsla_update(
    p: &ProbabilityVector,
    chosen: usize,
    reward: bool,
    scheme: UpdateScheme,
) -> ProbabilityVector {
    let r = p.len();
    assert!(chosen < r, "action {chosen} out of range for {r} actions");
    if r == 1 {
        return p.clone();
    }
    let weights = p
        .as_slice()
        .iter()
        .enumerate()
        .map(|(j, &pj)| match (reward, j == chosen) {
            (true, true) => pj + scheme.reward * (1.0 - pj),
            (true, false) => (1.0 - scheme.reward) * pj,
            (false, true) => (1.0 - scheme.penalty) * pj,
            (false, false) => scheme.penalty / (r - 1) as f64 + (1.0 - scheme.penalty) * pj,
        })
        .collect();
    ProbabilityVector::from_update(weights)
}

/// Rescales the weights of the `available` actions so they sum to one.
///
/// The result is indexed like `available`. Fails when the subset carries no
/// probability mass at all.
pub fn vasla_scale(p: &ProbabilityVector, available: &[usize]) -> Result<ProbabilityVector> {
    if available.is_empty() {
        return Err(Error::InvalidParameter("empty action subset".into()));
    }
    if let Some(&bad) = available.iter().find(|&&a| a >= p.len()) {
        return Err(Error::InvalidParameter(format!(
            "action {bad} out of range for {} actions",
            p.len()
        )));
    }
    let total: f64 = available.iter().map(|&a| p.get(a)).sum();
    if total <= 0.0 {
        return Err(Error::DegenerateSubset);
    }
    Ok(ProbabilityVector::from_update(
        available.iter().map(|&a| p.get(a) / total).collect(),
    ))
}

/// S-model linear update with reinforcement `beta ∈ [0, 1]` over `r` actions.
///
/// `beta = 1` is a full reward and `beta = 0` a full penalty; intermediate
/// values blend the two moves. `p` must hold exactly the `r` actions that were
/// on offer.
pub fn vasla_update(
    p: &ProbabilityVector,
    chosen: usize,
    beta: f64,
    scheme: UpdateScheme,
    r: usize,
) -> ProbabilityVector {
    assert!((0.0..=1.0).contains(&beta), "signal {beta} outside [0, 1]");
    assert!(r >= 2, "need at least two available actions");
    assert_eq!(p.len(), r, "vector length must match the available count");
    assert!(chosen < r, "action {chosen} out of range for {r} actions");
    let (l1, l2) = (scheme.reward, scheme.penalty);
    let spread = 1.0 / (r - 1) as f64;
    let weights = p
        .as_slice()
        .iter()
        .enumerate()
        .map(|(j, &pj)| {
            if j == chosen {
                pj + l1 * beta * (1.0 - pj) - l2 * (1.0 - beta) * pj
            } else {
                pj - l1 * beta * pj + l2 * (1.0 - beta) * (spread - pj)
            }
        })
        .collect();
    ProbabilityVector::from_update(weights)
}

/// Variable-structure automaton over a fixed action set.
#[derive(Debug, Clone)]
pub struct Vsla {
    probs: ProbabilityVector,
    scheme: UpdateScheme,
    last: Option<usize>,
}

impl Vsla {
    pub fn new(actions: usize, scheme: UpdateScheme) -> Result<Self> {
        if actions == 0 {
            return Err(Error::InvalidParameter(
                "VSLA needs at least one action".into(),
            ));
        }
        scheme.validate()?;
        Ok(Vsla {
            probs: ProbabilityVector::uniform(actions),
            scheme,
            last: None,
        })
    }

    pub fn probabilities(&self) -> &ProbabilityVector {
        &self.probs
    }

    pub fn scheme(&self) -> UpdateScheme {
        self.scheme
    }

    pub fn choose<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        let action = self.probs.sample(rng);
        self.last = Some(action);
        action
    }

    /// Reinforces the most recent choice; a no-op before the first choice.
    pub fn reinforce(&mut self, reward: bool) {
        if let Some(action) = self.last {
            self.probs = vsla_update(&self.probs, action, reward, self.scheme);
        }
    }
}

/// Variable-action-set automaton: each choice is made from a subset of its
/// actions and the S-model feedback updates only that subset.
#[derive(Debug, Clone)]
pub struct Vasla {
    probs: ProbabilityVector,
    scheme: UpdateScheme,
    last: Option<(usize, Vec<usize>)>,
}

impl Vasla {
    pub fn new(actions: usize, scheme: UpdateScheme) -> Result<Self> {
        Self::with_probabilities(ProbabilityVector::uniform(actions.max(1)), scheme)
    }

    pub fn with_probabilities(probs: ProbabilityVector, scheme: UpdateScheme) -> Result<Self> {
        scheme.validate()?;
        Ok(Vasla {
            probs,
            scheme,
            last: None,
        })
    }

    pub fn probabilities(&self) -> &ProbabilityVector {
        &self.probs
    }

    pub fn scheme(&self) -> UpdateScheme {
        self.scheme
    }

    /// The action chosen by the last [`Vasla::choose`] still awaiting feedback.
    pub fn pending_choice(&self) -> Option<usize> {
        self.last.as_ref().map(|(a, _)| *a)
    }

    /// Samples from the rescaled distribution over `available`.
    pub fn choose<R: Rng + ?Sized>(&mut self, available: &[usize], rng: &mut R) -> Result<usize> {
        let scaled = vasla_scale(&self.probs, available)?;
        let action = available[scaled.sample(rng)];
        self.last = Some((action, available.to_vec()));
        Ok(action)
    }

    /// Applies S-model feedback `beta` to the pending choice.
    ///
    /// Only the subset that was on offer is updated, in its rescaled form, and
    /// the result is scaled back so the excluded actions keep their weight.
    /// Returns false when there was no pending choice.
    pub fn reinforce(&mut self, beta: f64) -> bool {
        let Some((chosen, available)) = self.last.take() else {
            return false;
        };
        if available.len() < 2 || self.scheme.is_inert() {
            return true;
        }
        if available.len() == self.probs.len() {
            self.probs = vasla_update(&self.probs, chosen, beta, self.scheme, available.len());
            return true;
        }
        let total: f64 = available.iter().map(|&a| self.probs.get(a)).sum();
        let scaled = vasla_scale(&self.probs, &available)
            .expect("subset had positive mass when it was chosen from");
        let slot = available
            .iter()
            .position(|&a| a == chosen)
            .expect("chosen action belongs to its subset");
        let updated = vasla_update(&scaled, slot, beta, self.scheme, available.len());
        let mut weights = self.probs.as_slice().to_vec();
        for (&a, &w) in available.iter().zip(updated.as_slice()) {
            weights[a] = w * total;
        }
        self.probs = ProbabilityVector::from_update(weights);
        true
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    use super::*;

    fn pv(w: &[f64]) -> ProbabilityVector {
        ProbabilityVector::new(w.to_vec()).unwrap()
    }

    #[test]
    fn rejects_malformed_vectors() {
        assert!(ProbabilityVector::new(vec![]).is_err());
        assert!(ProbabilityVector::new(vec![0.5, 0.6]).is_err());
        assert!(ProbabilityVector::new(vec![-0.1, 1.1]).is_err());
        assert!(ProbabilityVector::new(vec![0.25; 4]).is_ok());
    }

    #[test]
    fn reward_half_rate() {
        let p = vsla_update(
            &pv(&[0.5, 0.5]),
            0,
            true,
            UpdateScheme::reward_inaction(0.5),
        );
        assert_abs_diff_eq!(p.get(0), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(p.get(1), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn penalty_spreads_mass() {
        let p = vsla_update(
            &pv(&[0.2, 0.2, 0.6]),
            2,
            false,
            UpdateScheme::penalty_inaction(0.1),
        );
        for (got, want) in p.as_slice().iter().zip([0.23, 0.23, 0.54]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn pure_chance_never_moves() {
        let p = pv(&[0.1, 0.2, 0.7]);
        for reward in [true, false] {
            for chosen in 0..3 {
                assert_eq!(
                    vsla_update(&p, chosen, reward, UpdateScheme::pure_chance()),
                    p
                );
            }
        }
    }

    #[test]
    fn scale_examples() {
        let s = vasla_scale(&pv(&[0.4, 0.3, 0.3]), &[0, 1]).unwrap();
        assert_abs_diff_eq!(s.get(0), 4.0 / 7.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.get(1), 3.0 / 7.0, epsilon = 1e-15);

        let third = 1.0 / 3.0;
        let s = vasla_scale(&pv(&[third, third, third]), &[0, 1, 2]).unwrap();
        for w in s.as_slice() {
            assert_abs_diff_eq!(*w, third, epsilon = 1e-15);
        }

        let s = vasla_scale(&pv(&[0.5, 0.5, 0.0]), &[0]).unwrap();
        assert_eq!(s.as_slice(), &[1.0]);
    }

    #[test]
    fn scale_zero_mass_is_an_error() {
        let err = vasla_scale(&pv(&[0.5, 0.5, 0.0]), &[2]).unwrap_err();
        assert!(matches!(err, Error::DegenerateSubset));
        assert!(vasla_scale(&pv(&[1.0]), &[]).is_err());
        assert!(vasla_scale(&pv(&[1.0]), &[3]).is_err());
    }

    #[test]
    fn s_model_full_reward() {
        let third = 1.0 / 3.0;
        let p = vasla_update(
            &pv(&[third, third, third]),
            0,
            1.0,
            UpdateScheme::reward_inaction(0.1),
            3,
        );
        for (got, want) in p.as_slice().iter().zip([0.4, 0.3, 0.3]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn s_model_full_penalty_matches_worked_vector() {
        let p = vasla_update(
            &pv(&[0.2, 0.2, 0.6]),
            2,
            0.0,
            UpdateScheme::penalty_inaction(0.1),
            3,
        );
        for (got, want) in p.as_slice().iter().zip([0.23, 0.23, 0.54]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn reward_inaction_ignores_penalty() {
        let p = pv(&[0.2, 0.3, 0.5]);
        let q = vasla_update(&p, 1, 0.0, UpdateScheme::reward_inaction(0.3), 3);
        assert_eq!(p, q);
    }

    #[test]
    fn scheme_classification() {
        assert_eq!(UpdateScheme::pure_chance().kind(), SchemeKind::PureChance);
        assert_eq!(
            UpdateScheme::reward_inaction(0.1).kind(),
            SchemeKind::RewardInaction
        );
        assert_eq!(
            UpdateScheme::penalty_inaction(0.1).kind(),
            SchemeKind::PenaltyInaction
        );
        assert_eq!(
            UpdateScheme::reward_penalty(0.1).kind(),
            SchemeKind::RewardPenalty
        );
        assert_eq!(
            UpdateScheme::reward_epsilon_penalty(0.1, 0.01).kind(),
            SchemeKind::RewardEpsilonPenalty
        );
        assert_eq!(
            UpdateScheme {
                reward: 0.01,
                penalty: 0.1
            }
            .kind(),
            SchemeKind::Unnamed
        );
        assert!(UpdateScheme::new(1.5, 0.0).is_err());
    }

    #[test]
    fn subset_update_leaves_excluded_weight_alone() {
        let mut vasla =
            Vasla::with_probabilities(pv(&[0.2, 0.5, 0.3]), UpdateScheme::reward_penalty(0.2))
                .unwrap();
        let mut rng = crate::seeded_rng(3);
        let a = vasla.choose(&[0, 1], &mut rng).unwrap();
        assert!(a < 2);
        assert!(vasla.reinforce(0.7));
        let p = vasla.probabilities();
        assert_abs_diff_eq!(p.get(2), 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(p.sum(), 1.0, epsilon = 1e-12);
        assert!(!vasla.reinforce(0.7), "feedback is consumed");
    }

    fn arb_vector(len: usize) -> impl Strategy<Value = ProbabilityVector> {
        prop::collection::vec(0.0f64..1.0, len).prop_filter_map("zero mass", |raw| {
            let sum: f64 = raw.iter().sum();
            (sum > 1e-6)
                .then(|| ProbabilityVector::from_update(raw.iter().map(|w| w / sum).collect()))
        })
    }

    proptest! {
        #[test]
        fn updates_preserve_normalization(
            p in (2usize..8).prop_flat_map(arb_vector),
            chosen_seed in 0usize..1000,
            beta in 0.0f64..=1.0,
            l1 in 0.0f64..=1.0,
            l2 in 0.0f64..=1.0,
            reward in any::<bool>(),
        ) {
            let scheme = UpdateScheme { reward: l1, penalty: l2 };
            let chosen = chosen_seed % p.len();
            for q in [
                vsla_update(&p, chosen, reward, scheme),
                vasla_update(&p, chosen, beta, scheme, p.len()),
            ] {
                prop_assert!((q.sum() - 1.0).abs() < 1e-9);
                prop_assert!(q.as_slice().iter().all(|w| (0.0..=1.0).contains(w)));
            }
        }

        #[test]
        fn reward_strictly_raises_chosen_weight(
            p in (2usize..6).prop_flat_map(arb_vector),
            chosen_seed in 0usize..1000,
            l1 in 0.001f64..=1.0,
        ) {
            let chosen = chosen_seed % p.len();
            prop_assume!(p.get(chosen) < 1.0 - 1e-9);
            let q = vsla_update(&p, chosen, true, UpdateScheme::reward_inaction(l1));
            prop_assert!(q.get(chosen) > p.get(chosen));
        }

        #[test]
        fn binary_s_model_reduces_to_p_model(
            p in (2usize..8).prop_flat_map(arb_vector),
            chosen_seed in 0usize..1000,
            l1 in 0.0f64..=1.0,
            l2 in 0.0f64..=1.0,
            reward in any::<bool>(),
        ) {
            let scheme = UpdateScheme { reward: l1, penalty: l2 };
            let chosen = chosen_seed % p.len();
            let beta = if reward { 1.0 } else { 0.0 };
            let a = vsla_update(&p, chosen, reward, scheme);
            let b = vasla_update(&p, chosen, beta, scheme, p.len());
            for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }
    }
}
