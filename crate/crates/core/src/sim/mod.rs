//! Monte Carlo simulation of the example's block-Markov scheme.

mod block_markov;
mod codec;

pub use block_markov::{
    check_structure, rate_accounting, run_block_markov, simulate_trial, SimConfig, SimError, SimReport, TrialLog,
    TrialOutcome,
};
pub use codec::{arithmetic_decode, arithmetic_encode, ideal_codelength, Codec, CodecError};
