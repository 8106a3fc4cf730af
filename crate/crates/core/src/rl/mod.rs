//! Deep Q-learning: replay, ε-greedy control, TD targets, Adam, and the
//! graph-network and fully connected value networks.

pub mod flat;
pub mod qnet;
pub mod replay;
pub mod train;

pub use flat::{flat_input_width, FlatDqn, FlatDqnConfig};
pub use qnet::QNetwork;
pub use replay::{ReplayBuffer, Transition};
pub use train::{
    select_actions, td_targets, train, train_step, Adam, EpisodeLog, Greedy, TrainConfig, TrainingLog,
};
