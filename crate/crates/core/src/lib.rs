//! Structure learning for excitatory dynamic Bayesian networks over discrete
//! event streams, with frequent fixed-delay episode counts as the sufficient
//! statistics.
//!
//! The pipeline: [`sim`] generates ground-truth-labeled spike streams,
//! [`mine`] finds every frequent fixed-delay episode by pattern growth,
//! [`marginal`] turns episode counts into joint distributions and mutual
//! information, [`learn`] picks each node's best delayed parent set, and
//! [`eval`] scores the result against the generating network.

pub mod count;
pub mod episode;
pub mod error;
pub mod eval;
pub mod learn;
pub mod marginal;
pub mod mine;
pub mod sim;
pub mod stream;

pub use count::{count_distinct, occurrence_starts, CountCache};
pub use episode::Episode;
pub use error::{Error, Result};
pub use eval::{
    density, precision_recall, sweep, sweep_cell, DelayMode, EdgeRef, ScoreReport, SweepGrid,
    Timing, DEFAULT_EPSILON_GRID, DEFAULT_THETA_GRID,
};
pub use learn::{candidates_for, learn, to_dot, DbnJson, DbnStructure, LearnParams, ParentSet};
pub use marginal::{
    all_ones_probability, episode_of, joint_distribution, mi_between, mutual_information,
    IndicatorSet, JointDistribution, MiScore,
};
pub use mine::{mine_frequent, FrequencyTable};
pub use sim::{
    make_topology, simulate, surrogate, GenParams, GroundTruth, NetworkSpec, SourceTap, Term,
    TopologyKind,
};
pub use stream::{
    default_labels, discretize, parse_events, parse_events_str, Alphabet, AlphabetMode, Event,
    EventStream, OccurrenceIndex, ParseOptions, TimeMode,
};
