use serde::{Deserialize, Serialize};

use super::chain::{BlockId, BlockTree};

/// How a shared height awards its weight point.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightRule {
    /// The block with the most recent creation time.
    #[default]
    MostRecentCreation,
    /// The block that became public first.
    FirstReceived,
}

/// Weight of each branch of a fork rooted at `fork_point`.
///
/// At every height reached by at least two branches, the branch holding the
/// unique best block under `rule` gets one point; ties award nothing.
pub fn branch_weights(
    tree: &BlockTree,
    fork_point: BlockId,
    tips: &[BlockId],
    rule: WeightRule,
) -> Vec<u64> {
    let base = tree.height(fork_point);
    let score = |id: BlockId| -> i128 {
        let b = tree.block(id);
        match rule {
            WeightRule::MostRecentCreation => b.created_at as i128,
            WeightRule::FirstReceived => -(b.published_at.unwrap_or(u64::MAX) as i128),
        }
    };
    // branch blocks indexed by height above the fork point
    let branches: Vec<Vec<BlockId>> = tips
        .iter()
        .map(|&tip| {
            let mut path = Vec::with_capacity((tree.height(tip) - base) as usize);
            let mut id = tip;
            while tree.height(id) > base {
                path.push(id);
                id = tree.block(id).parent.expect("only genesis lacks a parent");
            }
            path.reverse();
            path
        })
        .collect();
    let mut weights = vec![0; tips.len()];
    let top = branches.iter().map(Vec::len).max().unwrap_or(0);
    for h in 0..top {
        let present: Vec<(usize, i128)> = branches
            .iter()
            .enumerate()
            .filter_map(|(i, b)| b.get(h).map(|&id| (i, score(id))))
            .collect();
        if present.len() < 2 {
            continue;
        }
        let best = present.iter().map(|p| p.1).max().expect("two branches");
        let mut winners = present.iter().filter(|p| p.1 == best);
        if let (Some(&(i, _)), None) = (winners.next(), winners.next()) {
            weights[i] += 1;
        }
    }
    weights
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecisionKind {
    Length,
    Weight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    /// Index into the branch lists.
    pub chosen: usize,
    pub kind: DecisionKind,
}

/// Fail-safe fork choice: the longest branch wins outright if it leads the
/// runner-up by more than `k`; otherwise the heaviest branch wins.
///
/// Equal maximal weights keep `current` when it is among them, else the
/// first of them.
pub fn choose_branch(lengths: &[u64], weights: &[u64], k: u64, current: Option<usize>) -> Decision {
    assert!(lengths.len() >= 2, "a fork has at least two branches");
    assert_eq!(lengths.len(), weights.len());
    let mut order: Vec<usize> = (0..lengths.len()).collect();
    order.sort_by(|&a, &b| lengths[b].cmp(&lengths[a]));
    if lengths[order[0]] - lengths[order[1]] > k {
        return Decision {
            chosen: order[0],
            kind: DecisionKind::Length,
        };
    }
    let heaviest = *weights.iter().max().expect("nonempty");
    let chosen = match current {
        Some(c) if weights[c] == heaviest => c,
        _ => weights
            .iter()
            .position(|&w| w == heaviest)
            .expect("max exists"),
    };
    Decision {
        chosen,
        kind: DecisionKind::Weight,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selfish::chain::{Miner, GENESIS};

    #[test]
    fn rule_examples() {
        assert_eq!(
            choose_branch(&[5, 2], &[0, 2], 2, None),
            Decision {
                chosen: 0,
                kind: DecisionKind::Length
            }
        );
        assert_eq!(
            choose_branch(&[3, 3], &[2, 1], 1, None),
            Decision {
                chosen: 0,
                kind: DecisionKind::Weight
            }
        );
        assert_eq!(
            choose_branch(&[4, 3], &[0, 3], 1, None),
            Decision {
                chosen: 1,
                kind: DecisionKind::Weight
            }
        );
        assert_eq!(choose_branch(&[2, 2], &[1, 1], 1, Some(1)).chosen, 1);
        assert_eq!(choose_branch(&[2, 2], &[1, 1], 1, None).chosen, 0);
    }

    /// Restates the rule independently: margin test first, then heaviest.
    fn oracle(lengths: &[u64], weights: &[u64], k: u64) -> (usize, DecisionKind) {
        let max_len = *lengths.iter().max().unwrap();
        let longest: Vec<usize> = (0..lengths.len())
            .filter(|&i| lengths[i] == max_len)
            .collect();
        let runner_up = (0..lengths.len())
            .filter(|&i| i != longest[0])
            .map(|i| lengths[i])
            .max()
            .unwrap();
        if longest.len() == 1 && max_len - runner_up > k {
            (longest[0], DecisionKind::Length)
        } else {
            let w = *weights.iter().max().unwrap();
            (
                (0..weights.len()).find(|&i| weights[i] == w).unwrap(),
                DecisionKind::Weight,
            )
        }
    }

    #[test]
    fn enumerated_small_forks_match_oracle() {
        for branches in 2..=3usize {
            let combos = 6usize.pow(branches as u32);
            for code in 0..combos * combos {
                let digits = |mut c: usize| -> Vec<u64> {
                    (0..branches)
                        .map(|_| {
                            let d = c % 6;
                            c /= 6;
                            d as u64
                        })
                        .collect()
                };
                let lengths: Vec<u64> = digits(code % combos).iter().map(|l| l + 1).collect();
                let weights = digits(code / combos);
                for k in 1..4 {
                    let d = choose_branch(&lengths, &weights, k, None);
                    assert_eq!(
                        (d.chosen, d.kind),
                        oracle(&lengths, &weights, k),
                        "{lengths:?} {weights:?} {k}"
                    );
                }
            }
        }
    }

    #[test]
    fn newer_block_takes_the_height() {
        let mut t = BlockTree::new();
        let a = t.mine(GENESIS, Miner::Selfish, 1);
        let b = t.mine(GENESIS, Miner::Honest, 2);
        assert_eq!(
            branch_weights(&t, GENESIS, &[a, b], WeightRule::MostRecentCreation),
            vec![0, 1]
        );
        t.publish(a, 5);
        t.publish(b, 2);
        assert_eq!(
            branch_weights(&t, GENESIS, &[a, b], WeightRule::FirstReceived),
            vec![0, 1]
        );
    }

    #[test]
    fn two_branch_two_height_enumeration() {
        // every ordering of creation times, ties included, over two shared heights
        for times in 0..81u64 {
            let c = [times % 3, times / 3 % 3, times / 9 % 3, times / 27 % 3];
            let mut t = BlockTree::new();
            let a1 = t.mine(GENESIS, Miner::Selfish, c[0]);
            let a2 = t.mine(a1, Miner::Selfish, c[1]);
            let b1 = t.mine(GENESIS, Miner::Honest, c[2]);
            let b2 = t.mine(b1, Miner::Honest, c[3]);
            let w = branch_weights(&t, GENESIS, &[a2, b2], WeightRule::MostRecentCreation);
            let point = |x: u64, y: u64| (u64::from(x > y), u64::from(y > x));
            let (p1, q1) = point(c[0], c[2]);
            let (p2, q2) = point(c[1], c[3]);
            assert_eq!(w, vec![p1 + p2, q1 + q2], "{c:?}");
        }
    }

    #[test]
    fn three_branches_single_height() {
        let mut t = BlockTree::new();
        let tips: Vec<_> = [3, 7, 5]
            .iter()
            .map(|&c| t.mine(GENESIS, Miner::Honest, c))
            .collect();
        let w = branch_weights(&t, GENESIS, &tips, WeightRule::MostRecentCreation);
        assert_eq!(w, vec![0, 1, 0]);
    }

    #[test]
    fn unshared_heights_award_nothing() {
        let mut t = BlockTree::new();
        let a1 = t.mine(GENESIS, Miner::Selfish, 1);
        let a2 = t.mine(a1, Miner::Selfish, 2);
        let a3 = t.mine(a2, Miner::Selfish, 3);
        let b1 = t.mine(GENESIS, Miner::Honest, 4);
        assert_eq!(
            branch_weights(&t, GENESIS, &[a3, b1], WeightRule::MostRecentCreation),
            vec![0, 1]
        );
    }
}
