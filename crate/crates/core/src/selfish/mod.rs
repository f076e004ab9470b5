//! Selfish-mining simulation with tie-breaking and fail-safe (Nik) defenses.

pub mod chain;
pub mod defense;
pub mod fork_choice;
pub mod presets;
pub mod sim;
pub mod sweep;

pub use chain::{Block, BlockId, BlockTree, Miner, GENESIS};
pub use defense::{ControllerSpec, DefenseSpec, FailSafeController, NikDefense, NikSpec};
pub use fork_choice::{branch_weights, choose_branch, Decision, DecisionKind, WeightRule};
pub use sim::{run_simulation, Simulation, SimulationResult, SimulationSpec};
pub use sweep::{
    run_sweep, threshold, AlphaGrid, DefenseCurve, LabeledDefense, SweepConfig, SweepResult,
    SweepRow, Threshold,
};
