use rand::Rng;
use serde::{Deserialize, Serialize};

use super::chain::{BlockId, BlockTree, Miner, GENESIS};
use super::defense::{DefenseSpec, NikDefense};
use super::fork_choice::{branch_weights, choose_branch, WeightRule};
use crate::error::{Error, Result};
use crate::{seeded_rng, SimRng};

fn default_gamma() -> f64 {
    0.5
}

fn default_total_blocks() -> u64 {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    #[serde(default = "default_total_blocks")]
    pub total_blocks: u64,
    /// Selfish pool's share of the hash power.
    pub alpha: f64,
    /// Share of honest power that mines on the attacker's branch during a tie.
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    pub defense: DefenseSpec,
    #[serde(default)]
    pub weight_rule: WeightRule,
}

impl SimulationSpec {
    pub fn new(alpha: f64, defense: DefenseSpec) -> Self {
        SimulationSpec {
            total_blocks: default_total_blocks(),
            alpha,
            gamma: default_gamma(),
            defense,
            weight_rule: WeightRule::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.alpha) {
            return Err(Error::InvalidParameter(format!(
                "alpha {} outside [0, 0.5)",
                self.alpha
            )));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::InvalidParameter(format!(
                "gamma {} outside [0, 1]",
                self.gamma
            )));
        }
        if self.total_blocks == 0 {
            return Err(Error::InvalidParameter(
                "total_blocks must be positive".into(),
            ));
        }
        self.defense.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationResult {
    /// Selfish share of the final main chain.
    pub selfish_revenue: f64,
    pub honest_revenue: f64,
    pub selfish_blocks: u64,
    pub honest_blocks: u64,
    pub mined_selfish: u64,
    pub mined_honest: u64,
    pub final_k: Option<u64>,
    pub weight_decisions: u64,
    pub total_decisions: u64,
}

impl SimulationResult {
    pub fn weight_decision_fraction(&self) -> f64 {
        if self.total_decisions == 0 {
            0.0
        } else {
            self.weight_decisions as f64 / self.total_decisions as f64
        }
    }
}

/// Withheld chain of the selfish pool, forked off the honest chain at `base`.
#[derive(Debug, Clone)]
struct Attacker {
    base: BlockId,
    private: Vec<BlockId>,
    published: usize,
}

impl Attacker {
    fn tip(&self) -> BlockId {
        self.private.last().copied().unwrap_or(self.base)
    }

    fn public_tip(&self) -> BlockId {
        match self.published {
            0 => self.base,
            n => self.private[n - 1],
        }
    }

    fn reset(&mut self, base: BlockId) {
        self.base = base;
        self.private.clear();
        self.published = 0;
    }
}

/// One selfish-mining run: pool-level honest miners, zero-latency broadcast,
/// time measured in mined blocks.
#[derive(Debug, Clone)]
pub struct Simulation {
    spec: SimulationSpec,
    rng: SimRng,
    tree: BlockTree,
    honest_tip: BlockId,
    attacker: Attacker,
    /// Equal-length public branches under tie-breaking.
    race: bool,
    nik: Option<NikDefense>,
    tick: u64,
    mined_selfish: u64,
    mined_honest: u64,
}

impl Simulation {
    pub fn new(spec: SimulationSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let nik = match &spec.defense {
            DefenseSpec::TieBreaking => None,
            DefenseSpec::Nik(n) => Some(NikDefense::new(n)?),
        };
        Ok(Simulation {
            spec,
            rng: seeded_rng(seed),
            tree: BlockTree::new(),
            honest_tip: GENESIS,
            attacker: Attacker {
                base: GENESIS,
                private: Vec::new(),
                published: 0,
            },
            race: false,
            nik,
            tick: 0,
            mined_selfish: 0,
            mined_honest: 0,
        })
    }

    pub fn tree(&self) -> &BlockTree {
        &self.tree
    }

    pub fn honest_tip(&self) -> BlockId {
        self.honest_tip
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn fail_safe(&self) -> Option<u64> {
        self.nik.as_ref().map(NikDefense::k)
    }

    pub fn is_done(&self) -> bool {
        self.tick >= self.spec.total_blocks
    }

    /// Attacker lead needed to win on length alone.
    fn margin(&self) -> usize {
        match &self.nik {
            None => 1,
            Some(n) => n.k() as usize + 1,
        }
    }

    fn honest_length(&self) -> usize {
        (self.tree.height(self.honest_tip) - self.tree.height(self.attacker.base)) as usize
    }

    fn lead(&self) -> isize {
        self.attacker.private.len() as isize - self.honest_length() as isize
    }

    fn publish_up_to(&mut self, count: usize) {
        let count = count.min(self.attacker.private.len());
        for &id in &self.attacker.private[self.attacker.published.min(count)..count] {
            self.tree.publish(id, self.tick);
        }
        self.attacker.published = self.attacker.published.max(count);
    }

    fn publish_all(&mut self) {
        self.publish_up_to(self.attacker.private.len());
    }

    /// Honest pool switches to the attacker's public tip; the attacker keeps
    /// whatever it still withholds on top of it.
    fn adopt_attacker(&mut self) {
        let tip = self.attacker.public_tip();
        self.honest_tip = tip;
        self.attacker.private.drain(..self.attacker.published);
        self.attacker.base = tip;
        self.attacker.published = 0;
        self.race = false;
    }

    /// Mines one block and runs the reactions it triggers. Returns its creator.
    pub fn mine_step(&mut self) -> Miner {
        self.tick += 1;
        let miner = if self.rng.gen_bool(self.spec.alpha) {
            Miner::Selfish
        } else {
            Miner::Honest
        };
        let mut view_changed = false;
        match miner {
            Miner::Selfish => {
                self.mined_selfish += 1;
                let was_public = self.attacker.published == self.attacker.private.len()
                    && self.attacker.published > 0;
                let id = self
                    .tree
                    .mine(self.attacker.tip(), Miner::Selfish, self.tick);
                self.attacker.private.push(id);
                if was_public && self.honest_length() > 0 && self.lead() >= self.margin() as isize {
                    self.publish_all();
                    view_changed = true;
                }
            }
            Miner::Honest => {
                self.mined_honest += 1;
                self.mine_honest();
                view_changed = true;
            }
        }
        let boundary = match &mut self.nik {
            Some(n) => n.on_block(self.tick, &mut self.rng),
            None => false,
        };
        if view_changed || boundary {
            self.evaluate();
        }
        miner
    }

    fn mine_honest(&mut self) {
        let on_attacker = self.race && self.rng.gen_bool(self.spec.gamma);
        if on_attacker {
            let parent = self.attacker.public_tip();
            self.adopt_attacker();
            self.honest_tip = self.tree.mine(parent, Miner::Honest, self.tick);
        } else {
            self.honest_tip = self.tree.mine(self.honest_tip, Miner::Honest, self.tick);
        }
        self.tree.publish(self.honest_tip, self.tick);

        let lead = self.lead();
        let margin = self.margin() as isize;
        let honest_len = self.honest_length();
        if lead < 0 {
            self.attacker.reset(self.honest_tip);
        } else if lead == 0 || lead == margin {
            self.publish_all();
        } else {
            self.publish_up_to(honest_len);
        }
    }

    /// Honest fork choice between their own tip and the attacker's public tip.
    fn evaluate(&mut self) {
        if self.attacker.published == 0 {
            self.race = false;
            return;
        }
        let honest_len = self.honest_length() as u64;
        let attacker_len = self.attacker.published as u64;
        if honest_len == 0 {
            self.adopt_attacker();
            return;
        }
        match &mut self.nik {
            None => {
                if attacker_len > honest_len {
                    self.adopt_attacker();
                } else {
                    self.race = attacker_len == honest_len;
                }
            }
            Some(nik) => {
                let tips = [self.honest_tip, self.attacker.public_tip()];
                let weights =
                    branch_weights(&self.tree, self.attacker.base, &tips, self.spec.weight_rule);
                let decision =
                    choose_branch(&[honest_len, attacker_len], &weights, nik.k(), Some(0));
                nik.record(decision.kind);
                if decision.chosen == 1 {
                    self.adopt_attacker();
                }
            }
        }
    }

    /// Releases every withheld block, settles the last fork and scores the chain.
    pub fn finish(mut self) -> SimulationResult {
        self.publish_all();
        if self.nik.is_none() && self.attacker.published > 0 {
            let honest_len = self.honest_length();
            let attacker_len = self.attacker.published;
            if attacker_len > honest_len
                || (attacker_len == honest_len && self.rng.gen_bool(self.spec.gamma))
            {
                self.adopt_attacker();
            }
        } else {
            self.evaluate();
        }
        let (honest, selfish) = self.tree.credit(self.honest_tip);
        let total = honest + selfish;
        let share = |n: u64| {
            if total == 0 {
                0.0
            } else {
                n as f64 / total as f64
            }
        };
        let (weight_decisions, total_decisions) =
            self.nik.as_ref().map_or((0, 0), NikDefense::decisions);
        SimulationResult {
            selfish_revenue: share(selfish),
            honest_revenue: share(honest),
            selfish_blocks: selfish,
            honest_blocks: honest,
            mined_selfish: self.mined_selfish,
            mined_honest: self.mined_honest,
            final_k: self.nik.as_ref().map(NikDefense::k),
            weight_decisions,
            total_decisions,
        }
    }
}

pub fn run_simulation(spec: &SimulationSpec, seed: u64) -> Result<SimulationResult> {
    let mut sim = Simulation::new(spec.clone(), seed)?;
    while !sim.is_done() {
        sim.mine_step();
    }
    Ok(sim.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hybrid::DEFAULT_MAX_DEPTH;
    use crate::probability::UpdateScheme;
    use crate::selfish::defense::{ControllerSpec, NikSpec};

    fn nik() -> DefenseSpec {
        DefenseSpec::Nik(NikSpec::new(ControllerSpec::Svdhla {
            depth: 2,
            scheme: UpdateScheme::reward_epsilon_penalty(0.1, 0.01),
            max_depth: DEFAULT_MAX_DEPTH,
        }))
    }

    #[test]
    fn no_attacker_means_no_selfish_revenue() {
        for defense in [DefenseSpec::TieBreaking, nik()] {
            let r = run_simulation(&SimulationSpec::new(0.0, defense), 3).unwrap();
            assert_eq!(r.selfish_revenue, 0.0);
            assert_eq!(r.honest_revenue, 1.0);
            assert_eq!(r.honest_blocks, 10_000);
        }
    }

    #[test]
    fn shares_partition_the_chain() {
        for alpha in [0.1, 0.3, 0.45] {
            for defense in [DefenseSpec::TieBreaking, nik()] {
                let r = run_simulation(&SimulationSpec::new(alpha, defense), 5).unwrap();
                assert!((r.selfish_revenue + r.honest_revenue - 1.0).abs() < 1e-12);
                assert!(r.weight_decisions <= r.total_decisions);
                assert!(r.selfish_blocks <= r.mined_selfish && r.honest_blocks <= r.mined_honest);
            }
        }
    }

    #[test]
    fn strong_attacker_profits_under_tie_breaking() {
        let mean = |alpha: f64| {
            (0..10)
                .map(|s| {
                    run_simulation(&SimulationSpec::new(alpha, DefenseSpec::TieBreaking), s)
                        .unwrap()
                        .selfish_revenue
                })
                .sum::<f64>()
                / 10.0
        };
        assert!(mean(0.3) > 0.3);
        assert!(mean(0.45) > 0.45);
    }

    /// Closed-form revenue of the canonical attack.
    fn eyal_sirer(a: f64, g: f64) -> f64 {
        let num = a * (1.0 - a).powi(2) * (4.0 * a + g * (1.0 - 2.0 * a)) - a.powi(3);
        num / (1.0 - a * (1.0 + (2.0 - a) * a))
    }

    #[test]
    fn tie_breaking_matches_the_closed_form() {
        for alpha in [0.2, 0.3, 0.4] {
            let spec = SimulationSpec {
                total_blocks: 50_000,
                ..SimulationSpec::new(alpha, DefenseSpec::TieBreaking)
            };
            let mean = (0..8)
                .map(|s| run_simulation(&spec, s).unwrap().selfish_revenue)
                .sum::<f64>()
                / 8.0;
            let expected = eyal_sirer(alpha, 0.5);
            assert!(
                (mean - expected).abs() < 0.01,
                "alpha {alpha}: {mean} vs {expected}"
            );
        }
    }

    #[test]
    fn same_seed_same_tree() {
        let spec = SimulationSpec {
            total_blocks: 2000,
            ..SimulationSpec::new(0.35, nik())
        };
        let run = |seed| {
            let mut sim = Simulation::new(spec.clone(), seed).unwrap();
            while !sim.is_done() {
                sim.mine_step();
            }
            sim.tree().blocks().to_vec()
        };
        assert_eq!(run(9), run(9));
        assert_ne!(run(9), run(10));
    }

    #[test]
    fn fail_safe_stays_in_range() {
        let spec = SimulationSpec {
            total_blocks: 5000,
            ..SimulationSpec::new(0.4, nik())
        };
        let mut sim = Simulation::new(spec, 1).unwrap();
        while !sim.is_done() {
            sim.mine_step();
            assert!((1..=5).contains(&sim.fail_safe().unwrap()));
        }
    }

    #[test]
    fn honest_tip_is_always_public() {
        let spec = SimulationSpec {
            total_blocks: 3000,
            ..SimulationSpec::new(0.4, DefenseSpec::TieBreaking)
        };
        let mut sim = Simulation::new(spec, 2).unwrap();
        while !sim.is_done() {
            sim.mine_step();
            let tip = sim.honest_tip();
            assert!(sim.tree().chain(tip).iter().all(|&id| sim
                .tree()
                .block(id)
                .published_at
                .is_some()));
        }
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        assert!(SimulationSpec::new(0.5, DefenseSpec::TieBreaking)
            .validate()
            .is_err());
        assert!(SimulationSpec {
            gamma: 1.5,
            ..SimulationSpec::new(0.1, DefenseSpec::TieBreaking)
        }
        .validate()
        .is_err());
    }
}
