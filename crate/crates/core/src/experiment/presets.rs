//! Ready-made experiment suites.
//!
//! Iteration counts follow the magnitude of the reported totals: suites whose
//! totals run into the thousands use 10⁴ iterations, the rest 10³.

use super::config::{AutomatonSpec, ExperimentConfig, DEFAULT_SEED_COUNT};
use crate::environment::EnvironmentSpec;
use crate::hybrid::DEFAULT_MAX_DEPTH;
use crate::markov::{self, TransitionMatrix};
use crate::probability::UpdateScheme;

const SHORT: usize = 1_000;
const LONG: usize = 10_000;

/// Initial depths of configurations 1 through 4.
pub const DEPTH_CONFIGS: [usize; 4] = [1, 3, 5, 7];

/// `L_{R-εP}` with λ1 = 0.1, λ2 = 0.01, the default depth controller.
pub const fn controller_lrep() -> UpdateScheme {
    UpdateScheme {
        reward: 0.1,
        penalty: 0.01,
    }
}

/// The nine VSLA parameterizations compared against the hybrids: pure chance,
/// then the a/b variants of `L_{R-I}`, `L_{P-I}`, `L_{R-P}` and `L_{R-εP}`.
pub const SCHEME_TABLE: [(&str, UpdateScheme); 9] = [
    ("config1", UpdateScheme::pure_chance()),
    ("config2a", UpdateScheme::reward_inaction(0.1)),
    ("config2b", UpdateScheme::reward_inaction(0.01)),
    ("config3a", UpdateScheme::penalty_inaction(0.1)),
    ("config3b", UpdateScheme::penalty_inaction(0.01)),
    ("config4a", UpdateScheme::reward_penalty(0.1)),
    ("config4b", UpdateScheme::reward_penalty(0.01)),
    (
        "config5a",
        UpdateScheme {
            reward: 0.1,
            penalty: 0.01,
        },
    ),
    (
        "config5b",
        UpdateScheme {
            reward: 0.01,
            penalty: 0.001,
        },
    ),
];

pub fn svdhla(actions: usize, depth: usize, scheme: UpdateScheme) -> AutomatonSpec {
    AutomatonSpec::Svdhla {
        actions,
        depth,
        scheme,
        max_depth: DEFAULT_MAX_DEPTH,
    }
}

pub fn avdhla(depths: Vec<usize>, scheme: UpdateScheme) -> AutomatonSpec {
    AutomatonSpec::Avdhla {
        depths,
        scheme,
        max_depth: DEFAULT_MAX_DEPTH,
    }
}

/// Reward probability `best` on the first action, `(1 − best)/(K − 1)` on the rest.
pub fn one_favorable(actions: usize, best: f64) -> Vec<f64> {
    let mut probs = vec![(1.0 - best) / (actions - 1) as f64; actions];
    probs[0] = best;
    probs
}

fn stationary(reward_probs: Vec<f64>) -> EnvironmentSpec {
    EnvironmentSpec::Stationary { reward_probs }
}

fn experiment(
    name: String,
    iterations: usize,
    favorable_action: Option<usize>,
    automaton: AutomatonSpec,
    environment: EnvironmentSpec,
) -> ExperimentConfig {
    ExperimentConfig {
        name,
        iterations,
        seeds: (0..DEFAULT_SEED_COUNT).collect(),
        favorable_action,
        automaton,
        environment,
    }
}

/// Two-action learning check against pure chance for one reward vector.
pub fn learning_check(prefix: &str, reward_probs: [f64; 2]) -> Vec<ExperimentConfig> {
    let favorable = match reward_probs[0].total_cmp(&reward_probs[1]) {
        std::cmp::Ordering::Less => Some(1),
        std::cmp::Ordering::Greater => Some(0),
        std::cmp::Ordering::Equal => None,
    };
    let env = stationary(reward_probs.to_vec());
    let mut out = vec![experiment(
        format!("{prefix}-pure-chance"),
        SHORT,
        favorable,
        AutomatonSpec::PureChance { actions: 2 },
        env.clone(),
    )];
    for n in [1, 4, 6] {
        out.push(experiment(
            format!("{prefix}-svdhla-n{n}"),
            SHORT,
            favorable,
            svdhla(2, n, controller_lrep()),
            env.clone(),
        ));
        out.push(experiment(
            format!("{prefix}-avdhla-n{n}"),
            SHORT,
            favorable,
            avdhla(vec![n, n], controller_lrep()),
            env.clone(),
        ));
    }
    out
}

pub fn exp1_1() -> Vec<ExperimentConfig> {
    learning_check("exp1_1", [0.1, 0.9])
}

/// Extra learning checks with closer and equal reward probabilities.
pub fn learning_close() -> Vec<ExperimentConfig> {
    let mut out = learning_check("close-0.3", [0.3, 0.7]);
    out.extend(learning_check("close-0.5", [0.5, 0.5]));
    out
}

/// Hybrids against FSLA of the same initial depth, one favorable action at 0.8.
pub fn fsla_comparison(prefix: &str, actions: usize) -> Vec<ExperimentConfig> {
    let env = stationary(one_favorable(actions, 0.8));
    let mut out = Vec::new();
    for n in DEPTH_CONFIGS {
        out.push(experiment(
            format!("{prefix}-svdhla-n{n}"),
            SHORT,
            Some(0),
            svdhla(actions, n, UpdateScheme::reward_inaction(0.1)),
            env.clone(),
        ));
        out.push(experiment(
            format!("{prefix}-fsla-n{n}"),
            SHORT,
            Some(0),
            AutomatonSpec::Fsla { actions, depth: n },
            env.clone(),
        ));
        out.push(experiment(
            format!("{prefix}-avdhla-n{n}"),
            LONG,
            Some(0),
            avdhla(vec![n; actions], controller_lrep()),
            env.clone(),
        ));
        out.push(experiment(
            format!("{prefix}-fsla-n{n}-long"),
            LONG,
            Some(0),
            AutomatonSpec::Fsla { actions, depth: n },
            env.clone(),
        ));
    }
    out
}

pub fn exp1_2() -> Vec<ExperimentConfig> {
    fsla_comparison("exp1_2", 9)
}

pub fn fsla_small_k() -> Vec<ExperimentConfig> {
    let mut out = fsla_comparison("fsla-k2", 2);
    out.extend(fsla_comparison("fsla-k5", 5));
    out
}

/// Hybrids (controllers using each scheme) against a VSLA using the same scheme.
fn scheme_comparison(
    prefix: &str,
    actions: usize,
    depth: usize,
    env: EnvironmentSpec,
) -> Vec<ExperimentConfig> {
    let mut out = Vec::new();
    for (label, scheme) in SCHEME_TABLE {
        out.push(experiment(
            format!("{prefix}-{label}-svdhla"),
            SHORT,
            Some(0),
            svdhla(actions, depth, scheme),
            env.clone(),
        ));
        out.push(experiment(
            format!("{prefix}-{label}-avdhla"),
            SHORT,
            Some(0),
            avdhla(vec![depth; actions], scheme),
            env.clone(),
        ));
        out.push(experiment(
            format!("{prefix}-{label}-vsla"),
            SHORT,
            Some(0),
            AutomatonSpec::Vsla { actions, scheme },
            env.clone(),
        ));
    }
    out
}

pub fn exp1_3() -> Vec<ExperimentConfig> {
    scheme_comparison("exp1_3", 5, 5, stationary(one_favorable(5, 0.8)))
}

/// The K × N grid of both hybrids with `scheme` driving the depth controllers.
pub fn depth_grid(prefix: &str, scheme: UpdateScheme) -> Vec<ExperimentConfig> {
    let mut out = Vec::new();
    for k in [2, 5, 9] {
        let env = stationary(one_favorable(k, 0.8));
        for n in DEPTH_CONFIGS {
            out.push(experiment(
                format!("{prefix}-k{k}-n{n}-avdhla"),
                LONG,
                Some(0),
                avdhla(vec![n; k], scheme),
                env.clone(),
            ));
            out.push(experiment(
                format!("{prefix}-k{k}-n{n}-svdhla"),
                LONG,
                Some(0),
                svdhla(k, n, scheme),
                env.clone(),
            ));
        }
    }
    out
}

pub fn exp1_4() -> Vec<ExperimentConfig> {
    depth_grid("exp1_4", controller_lrep())
}

pub fn depth_grid_lri() -> Vec<ExperimentConfig> {
    depth_grid("grid-lri", UpdateScheme::reward_inaction(0.1))
}

pub fn exp1_5() -> Vec<ExperimentConfig> {
    let env = stationary(one_favorable(5, 0.8));
    let mut out: Vec<_> = DEPTH_CONFIGS
        .iter()
        .map(|&n| {
            experiment(
                format!("exp1_5-svdhla-n{n}"),
                LONG,
                Some(0),
                svdhla(5, n, controller_lrep()),
                env.clone(),
            )
        })
        .collect();
    for (label, depths) in [
        ("deep-favorable", vec![10, 3, 3, 3, 3]),
        ("flat", vec![3; 5]),
        ("shallow-favorable", vec![3, 10, 10, 10, 10]),
    ] {
        out.push(experiment(
            format!("exp1_5-avdhla-{label}"),
            LONG,
            Some(0),
            avdhla(depths, controller_lrep()),
            env.clone(),
        ));
    }
    out
}

/// Four-state chain of the Markov-switching experiment.
///
/// The third row is printed as `[0.2, 0.2, 0.2, 0.6]`, which sums to 1.2; the
/// published stationary solution is that of `[0.2, 0.2, 0.2, 0.4]`, used here.
pub fn exp2_transition() -> Vec<Vec<f64>> {
    vec![
        vec![0.3, 0.2, 0.1, 0.4],
        vec![0.1, 0.2, 0.5, 0.2],
        vec![0.2, 0.2, 0.2, 0.4],
        vec![0.2, 0.5, 0.1, 0.2],
    ]
}

pub fn exp2_reward() -> Vec<Vec<f64>> {
    vec![
        vec![0.9, 0.1, 0.3, 0.7, 0.1],
        vec![0.1, 0.9, 0.7, 0.6, 0.2],
        vec![0.3, 0.7, 0.5, 0.5, 0.3],
        vec![0.9, 0.9, 0.9, 0.4, 0.6],
    ]
}

/// Hybrids and FSLA across the initial-depth configurations in one environment.
fn depth_configs_vs_fsla(
    prefix: &str,
    actions: usize,
    scheme: UpdateScheme,
    favorable: Option<usize>,
    env: &EnvironmentSpec,
) -> Vec<ExperimentConfig> {
    let mut out = Vec::new();
    for n in DEPTH_CONFIGS {
        out.push(experiment(
            format!("{prefix}-n{n}-avdhla"),
            LONG,
            favorable,
            avdhla(vec![n; actions], scheme),
            env.clone(),
        ));
        out.push(experiment(
            format!("{prefix}-n{n}-svdhla"),
            LONG,
            favorable,
            svdhla(actions, n, scheme),
            env.clone(),
        ));
        out.push(experiment(
            format!("{prefix}-n{n}-fsla"),
            LONG,
            favorable,
            AutomatonSpec::Fsla { actions, depth: n },
            env.clone(),
        ));
    }
    out
}

pub fn exp2() -> Vec<ExperimentConfig> {
    let env = EnvironmentSpec::Markov {
        transition: exp2_transition(),
        reward: exp2_reward(),
        initial_state: 0,
    };
    let favorable = chain_favorable(&exp2_transition(), &exp2_reward());
    depth_configs_vs_fsla(
        "exp2",
        5,
        UpdateScheme::penalty_inaction(0.01),
        favorable,
        &env,
    )
}

/// Transition matrix and per-state reward probabilities of a switching environment.
pub type Chain = (Vec<Vec<f64>>, Vec<Vec<f64>>);

/// The four two-state chains, one per scenario.
pub fn two_state_chains() -> [Chain; 4] {
    let sticky = vec![vec![0.9, 0.1], vec![0.1, 0.9]];
    let flippy = vec![vec![0.2, 0.8], vec![0.6, 0.4]];
    let swapping = vec![vec![0.8, 0.2], vec![0.2, 0.8]];
    let same_best = vec![vec![0.8, 0.2], vec![0.7, 0.3]];
    [
        (sticky.clone(), swapping.clone()),
        (flippy.clone(), swapping),
        (sticky, same_best.clone()),
        (flippy, same_best),
    ]
}

/// Action with the highest chain-averaged reward probability, if unique.
fn chain_favorable(transition: &[Vec<f64>], reward: &[Vec<f64>]) -> Option<usize> {
    let t = TransitionMatrix::new(transition.to_vec()).ok()?;
    let eff = markov::effective_stationary(&t, reward).ok()?;
    let best = (0..eff.len()).max_by(|&a, &b| eff[a].total_cmp(&eff[b]))?;
    let unique = eff
        .iter()
        .enumerate()
        .all(|(a, &p)| a == best || p < eff[best] - 1e-9);
    unique.then_some(best)
}

pub fn two_state_markov() -> Vec<ExperimentConfig> {
    let mut out = Vec::new();
    for (i, (transition, reward)) in two_state_chains().into_iter().enumerate() {
        let favorable = chain_favorable(&transition, &reward);
        let env = EnvironmentSpec::Markov {
            transition,
            reward,
            initial_state: 0,
        };
        out.extend(depth_configs_vs_fsla(
            &format!("chain-s{}", i + 1),
            2,
            UpdateScheme::reward_inaction(0.01),
            favorable,
            &env,
        ));
    }
    out
}

/// (θ, φ) of the three state-dependent scenarios.
pub const DRIFT_SCENARIOS: [(f64, f64); 3] =
    [(0.0002, 0.00002), (0.0005, 0.0005), (0.00002, 0.0002)];

pub fn exp3_1() -> Vec<ExperimentConfig> {
    let mut out = Vec::new();
    for (i, (theta, phi)) in DRIFT_SCENARIOS.into_iter().enumerate() {
        let env = EnvironmentSpec::StateDependent {
            reward_probs: vec![0.9, 0.1],
            theta: vec![theta; 2],
            phi: vec![phi; 2],
        };
        out.extend(depth_configs_vs_fsla(
            &format!("exp3_1-s{}", i + 1),
            2,
            UpdateScheme::reward_inaction(0.01),
            Some(0),
            &env,
        ));
    }
    out
}

pub fn exp3_2() -> Vec<ExperimentConfig> {
    let mut out = Vec::new();
    for (i, (theta, phi)) in DRIFT_SCENARIOS.into_iter().enumerate() {
        let env = EnvironmentSpec::StateDependent {
            reward_probs: one_favorable(5, 0.8),
            theta: vec![theta; 5],
            phi: vec![phi; 5],
        };
        out.extend(scheme_comparison(&format!("exp3_2-s{}", i + 1), 5, 4, env));
    }
    out
}

/// Every preset suite by name.
pub fn by_name(name: &str) -> Option<Vec<ExperimentConfig>> {
    Some(match name {
        "exp1.1" => exp1_1(),
        "exp1.2" => exp1_2(),
        "exp1.3" => exp1_3(),
        "exp1.4" => exp1_4(),
        "exp1.5" => exp1_5(),
        "exp2" => exp2(),
        "exp3.1" => exp3_1(),
        "exp3.2" => exp3_2(),
        "learning-close" => learning_close(),
        "fsla-small-k" => fsla_small_k(),
        "depth-grid-lri" => depth_grid_lri(),
        "two-state-markov" => two_state_markov(),
        _ => return None,
    })
}

pub const NAMES: [&str; 12] = [
    "exp1.1",
    "exp1.2",
    "exp1.3",
    "exp1.4",
    "exp1.5",
    "exp2",
    "exp3.1",
    "exp3.2",
    "learning-close",
    "fsla-small-k",
    "depth-grid-lri",
    "two-state-markov",
];

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;

    #[test]
    fn every_preset_validates_with_unique_names() {
        let mut names = HashSet::new();
        for suite in NAMES {
            for config in by_name(suite).unwrap() {
                config
                    .validate()
                    .unwrap_or_else(|e| panic!("{}: {e}", config.name));
                assert!(
                    names.insert(config.name.clone()),
                    "duplicate {}",
                    config.name
                );
            }
        }
        assert!(by_name("exp9").is_none());
    }

    #[test]
    fn chain_favorites() {
        assert_eq!(chain_favorable(&exp2_transition(), &exp2_reward()), Some(1));
        let favs: Vec<_> = two_state_chains()
            .iter()
            .map(|(t, r)| chain_favorable(t, r))
            .collect();
        assert_eq!(favs, [None, Some(1), Some(0), Some(0)]);
    }

    #[test]
    fn depth_grid_has_24_rows() {
        assert_eq!(exp1_4().len(), 24);
        assert_eq!(depth_grid_lri().len(), 24);
    }

    #[test]
    fn scheme_table_matches_named_families() {
        use crate::probability::SchemeKind::*;
        let kinds: Vec<_> = SCHEME_TABLE.iter().map(|(_, s)| s.kind()).collect();
        assert_eq!(
            kinds,
            [
                PureChance,
                RewardInaction,
                RewardInaction,
                PenaltyInaction,
                PenaltyInaction,
                RewardPenalty,
                RewardPenalty,
                RewardEpsilonPenalty,
                RewardEpsilonPenalty
            ]
        );
    }
}
