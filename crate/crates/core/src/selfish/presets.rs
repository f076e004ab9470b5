//! Ready-made selfish-mining sweeps.

use super::defense::{ControllerSpec, DefenseSpec, NikSpec};
use super::sweep::{AlphaGrid, LabeledDefense, SweepConfig};
use crate::hybrid::DEFAULT_MAX_DEPTH;
use crate::probability::UpdateScheme;

/// Depth of the fail-safe controllers.
pub const CONTROLLER_DEPTH: usize = 2;

/// Controller schemes compared in the threshold table.
pub const SCHEMES: [(&str, UpdateScheme); 5] = [
    ("p", UpdateScheme::pure_chance()),
    ("lri", UpdateScheme::reward_inaction(0.01)),
    ("lpi", UpdateScheme::penalty_inaction(0.01)),
    ("lrp", UpdateScheme::reward_penalty(0.01)),
    (
        "lrep",
        UpdateScheme {
            reward: 0.1,
            penalty: 0.01,
        },
    ),
];

pub const LREP: UpdateScheme = SCHEMES[4].1;

pub fn svdhla(scheme: UpdateScheme) -> ControllerSpec {
    ControllerSpec::Svdhla {
        depth: CONTROLLER_DEPTH,
        scheme,
        max_depth: DEFAULT_MAX_DEPTH,
    }
}

pub fn avdhla(scheme: UpdateScheme) -> ControllerSpec {
    ControllerSpec::Avdhla {
        depth: CONTROLLER_DEPTH,
        scheme,
        max_depth: DEFAULT_MAX_DEPTH,
    }
}

pub fn fsla() -> ControllerSpec {
    ControllerSpec::Fsla {
        depth: CONTROLLER_DEPTH,
    }
}

fn nik(label: String, spec: NikSpec) -> LabeledDefense {
    LabeledDefense {
        label,
        defense: DefenseSpec::Nik(spec),
    }
}

pub fn tie_breaking() -> LabeledDefense {
    LabeledDefense {
        label: "tie-breaking".into(),
        defense: DefenseSpec::TieBreaking,
    }
}

/// Tie-breaking against Nik with every controller and scheme, K ∈ [1, 5].
pub fn thresholds() -> SweepConfig {
    let mut defenses = vec![tie_breaking(), nik("nik-fsla".into(), NikSpec::new(fsla()))];
    for (name, scheme) in SCHEMES {
        defenses.push(nik(
            format!("nik-svdhla-{name}"),
            NikSpec::new(svdhla(scheme)),
        ));
        defenses.push(nik(
            format!("nik-avdhla-{name}"),
            NikSpec::new(avdhla(scheme)),
        ));
    }
    SweepConfig::new("thresholds", defenses)
}

fn both_hybrids(label: &str, tweak: impl Fn(NikSpec) -> NikSpec) -> [LabeledDefense; 2] {
    [
        nik(format!("svdhla-{label}"), tweak(NikSpec::new(svdhla(LREP)))),
        nik(format!("avdhla-{label}"), tweak(NikSpec::new(avdhla(LREP)))),
    ]
}

/// Fail-safe ranges [1, 3], [2, 4] and [1, 5].
pub fn fail_safe_ranges() -> SweepConfig {
    let defenses = [(1, 3), (2, 4), (1, 5)]
        .into_iter()
        .flat_map(|(lo, hi)| {
            both_hybrids(&format!("k{lo}-{hi}"), move |s| NikSpec {
                k_min: lo,
                k_max: hi,
                ..s
            })
        })
        .collect();
    SweepConfig::new("fail-safe-ranges", defenses)
}

/// Decision interval of 5, 9 and 18 blocks with ten intervals per feedback, K ∈ [1, 3].
pub fn decision_intervals() -> SweepConfig {
    let defenses = [5, 9, 18]
        .into_iter()
        .flat_map(|tau| {
            both_hybrids(&format!("tau{tau}"), move |s| NikSpec {
                tau,
                theta: 10,
                k_min: 1,
                k_max: 3,
                ..s
            })
        })
        .collect();
    SweepConfig::new("decision-intervals", defenses)
}

/// 6, 12 and 18 decision intervals per feedback, decision interval of 5 blocks.
pub fn feedback_intervals() -> SweepConfig {
    let defenses = [6, 12, 18]
        .into_iter()
        .flat_map(|theta| {
            both_hybrids(&format!("theta{theta}"), move |s| NikSpec {
                tau: 5,
                theta,
                ..s
            })
        })
        .collect();
    SweepConfig::new("feedback-intervals", defenses)
}

pub fn by_name(name: &str) -> Option<SweepConfig> {
    Some(match name {
        "thresholds" => thresholds(),
        "fail-safe-ranges" => fail_safe_ranges(),
        "decision-intervals" => decision_intervals(),
        "feedback-intervals" => feedback_intervals(),
        _ => return None,
    })
}

pub const NAMES: [&str; 4] = [
    "thresholds",
    "fail-safe-ranges",
    "decision-intervals",
    "feedback-intervals",
];

/// A single α point, for quick looks at one attacker size.
pub fn at_alpha(mut config: SweepConfig, alpha: f64) -> SweepConfig {
    config.alphas = AlphaGrid {
        start: alpha,
        stop: alpha,
        step: 0.01,
    };
    config
}
