//! Inner bounds, reference capacities and a block-Markov simulator for
//! two-user multiple-access channels whose state is known strictly causally
//! at the encoders.

pub mod channels;
pub mod prob;
pub mod regions;
pub mod search;
pub mod sim;

pub use channels::{
    build_example_double, build_example_single, build_useless_channel, build_x1_disconnected_channel, load_channel,
    parse_channel, save_channel, Channel, ChannelError, ChannelSpec, DoubleStateChannel, SingleStateChannel,
};
pub use prob::{binary_entropy, inverse_binary_entropy, Alphabet, ConditionalPmf, JointPmf, ProbError};
pub use regions::{
    full_coop_sum_capacity, informed_receiver_capacity, AuxChoice, AuxChoiceDouble, AuxChoiceSingle, BoundKind,
    MiBundle, RatePoint, RateRegion, RegionError,
};
pub use search::{convex_hull, trace_boundary, ChannelRef, RegionSample, SearchConfig, SearchError};
pub use sim::{rate_accounting, run_block_markov, SimConfig, SimError, SimReport};
