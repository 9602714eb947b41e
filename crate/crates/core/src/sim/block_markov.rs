//! Block-Markov transmission over the example channel.
//!
//! Transmitter 1 sends its bits uncoded in blocks `1..=B`. In every block
//! Transmitter 2 sends a compressed description of the state components it
//! exposed in the previous block, `w_{x2}`, followed by fresh bits; the
//! description of block `B` goes out in one overhead block `B + 1` that uses
//! the whole noiseless `Y2 = X2` link. The receiver reads `X2` off `Y2`,
//! decodes the descriptions, and strips `w_{x2}` from `Y1` to recover `X1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::codec::{arithmetic_decode, arithmetic_encode, CodecError};
use crate::channels::{half_entropy_parameter, SingleStateChannel};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error("channel does not have the example structure: {0}")]
    StructuralMismatch(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Block length in channel uses.
    pub n: usize,
    /// Number of data blocks.
    pub blocks: usize,
    pub delta: f64,
    /// State parameter the codec's model assumes.
    pub p: f64,
    pub seed: u64,
    pub trials: usize,
    /// Unlimited description budget.
    #[serde(default)]
    pub genie: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 2000,
            blocks: 20,
            delta: 0.05,
            p: half_entropy_parameter(),
            seed: 0,
            trials: 100,
            genie: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::Config(m.to_string()));
        if self.n < 2 || self.n % 2 != 0 {
            return bad("n must be even and at least 2");
        }
        if self.blocks == 0 {
            return bad("blocks must be at least 1");
        }
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return bad("delta must lie in (0, 0.5)");
        }
        if !(self.p > 0.0 && self.p < 0.5) {
            return bad("p must lie in (0, 0.5)");
        }
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.description_budget() < 1 {
            return bad("description budget is below one bit");
        }
        Ok(())
    }

    /// `floor(n (1/2 + delta))` bits per block for the description.
    pub fn description_budget(&self) -> usize {
        (self.n as f64 * (0.5 + self.delta) + 1e-9).floor() as usize
    }

    /// Fresh bits Transmitter 2 sends in each data block.
    pub fn fresh_bits(&self) -> usize {
        self.n.saturating_sub(self.description_budget())
    }
}

/// Nominal rates in bits per channel use, overhead block included.
///
/// Equals `(B/(B+1), (1/2 − delta) B/(B+1))` whenever `n (1/2 + delta)` is
/// an integer; otherwise the fresh-bit count is `n − floor(n (1/2 + delta))`.
pub fn rate_accounting(cfg: &SimConfig) -> (f64, f64) {
    let uses = ((cfg.blocks + 1) * cfg.n) as f64;
    ((cfg.blocks * cfg.n) as f64 / uses, (cfg.blocks * cfg.fresh_bits()) as f64 / uses)
}

/// What happened in one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialLog {
    /// Message bits decoded wrongly, both users.
    pub errors: usize,
    /// Descriptions that did not fit their budget.
    pub overflows: usize,
}

/// Per-trial detail beyond the serialized log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialOutcome {
    pub log: TrialLog,
    pub message_bits: (usize, usize),
    /// Ones and length of the concatenated `w_{x2}` over the data blocks.
    pub state_ones: usize,
    pub state_len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub config: SimConfig,
    #[serde(rename = "empirical_R1")]
    pub empirical_r1: f64,
    #[serde(rename = "empirical_R2")]
    pub empirical_r2: f64,
    pub block_error_rate: f64,
    pub overflow_rate: f64,
    pub trials: Vec<TrialLog>,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const STATE_STREAM: u64 = 0;
const MESSAGE_STREAM: u64 = 1;
const CHANNEL_STREAM: u64 = 2;

fn substream(seed: u64, trial: usize, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(trial as u64)));
    rng.set_stream(stream);
    rng
}

/// Checks the letter sizes and that the low output bit copies `X2`.
pub fn check_structure(ch: &SingleStateChannel) -> Result<(), SimError> {
    let sizes = (ch.state().size, ch.x1().size, ch.x2().size, ch.y().size);
    if sizes != (4, 2, 2, 4) {
        return Err(SimError::StructuralMismatch(format!(
            "alphabet sizes (W, X1, X2, Y) = {sizes:?}, expected (4, 2, 2, 4)"
        )));
    }
    for w in 0..4 {
        for x1 in 0..2 {
            for x2 in 0..2 {
                let slice = ch.law().slice((w * 2 + x1) * 2 + x2);
                let leak: f64 = slice.iter().enumerate().filter(|(y, _)| y & 1 != x2).map(|(_, p)| p).sum();
                if leak > 1e-12 {
                    return Err(SimError::StructuralMismatch(format!(
                        "Y2 differs from X2 with probability {leak} at (w, x1, x2) = ({w}, {x1}, {x2})"
                    )));
                }
            }
        }
    }
    Ok(())
}

fn sample_index(rng: &mut impl Rng, probs: &[f64]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|p| *p > 0.0).unwrap_or(0)
}

fn random_bits(rng: &mut impl Rng, n: usize) -> Vec<u8> {
    (0..n).map(|_| rng.gen::<bool>() as u8).collect()
}

/// One trial of the scheme.
pub fn simulate_trial(ch: &SingleStateChannel, cfg: &SimConfig, trial: usize) -> Result<TrialOutcome, SimError> {
    let (n, b) = (cfg.n, cfg.blocks);
    let budget = if cfg.genie { usize::MAX } else { cfg.description_budget() };
    let slot = cfg.description_budget();
    let fresh = cfg.fresh_bits();
    let mut state_rng = substream(cfg.seed, trial, STATE_STREAM);
    let mut msg_rng = substream(cfg.seed, trial, MESSAGE_STREAM);
    let mut chan_rng = substream(cfg.seed, trial, CHANNEL_STREAM);
    let pw = ch.state_pmf().probs();

    let m1: Vec<Vec<u8>> = (0..b).map(|_| random_bits(&mut msg_rng, n)).collect();
    let m2: Vec<Vec<u8>> = (0..b).map(|_| random_bits(&mut msg_rng, fresh)).collect();

    let mut overflows = 0;
    let mut received: Vec<Vec<usize>> = Vec::with_capacity(b + 1);
    let mut w_seen: Vec<Vec<u8>> = Vec::with_capacity(b);
    // Descriptions computed from block `k` ride in block `k + 1`.
    let mut pending: Option<Vec<bool>> = None;
    for k in 0..=b {
        let last = k == b;
        let mut x2: Vec<u8> = Vec::with_capacity(n);
        let desc_len = if last { n } else { slot };
        if let Some(code) = pending.take() {
            // In genie mode the description is carried off-channel.
            x2.extend(code.iter().take(desc_len).map(|&c| c as u8));
        }
        x2.resize(desc_len, 0);
        if !last {
            x2.extend(&m2[k]);
        }
        let x1: &[u8] = if last { &[] } else { &m1[k] };
        let mut y = Vec::with_capacity(n);
        let mut w_x2 = Vec::with_capacity(n);
        for i in 0..n {
            let w = sample_index(&mut state_rng, pw);
            let a = x1.get(i).copied().unwrap_or(0) as usize;
            let c = x2[i] as usize;
            w_x2.push(if c == 0 { (w >> 1) as u8 } else { (w & 1) as u8 });
            y.push(sample_index(&mut chan_rng, ch.law().slice((w * 2 + a) * 2 + c)));
        }
        received.push(y);
        if !last {
            let cap = if k + 1 == b { budget.max(n) } else { budget };
            pending = Some(match arithmetic_encode(&w_x2, cfg.p, cap) {
                Ok(code) => code,
                Err(CodecError::Overflow { .. }) => {
                    overflows += 1;
                    Vec::new()
                }
                Err(e) => return Err(e.into()),
            });
            w_seen.push(w_x2);
        }
    }

    let state_ones = w_seen.iter().flatten().filter(|&&v| v == 1).count();
    let state_len = w_seen.iter().map(Vec::len).sum();

    // Backward decoding.
    let mut errors = 0;
    for k in (0..b).rev() {
        let x2_next: Vec<u8> = received[k + 1].iter().map(|&y| (y & 1) as u8).collect();
        let desc_len = if k + 1 == b { n } else { slot };
        let w_hat = if cfg.genie {
            w_seen[k].clone()
        } else {
            let code: Vec<bool> = x2_next[..desc_len].iter().map(|&v| v == 1).collect();
            arithmetic_decode(&code, cfg.p, n)?
        };
        let y = &received[k];
        for i in 0..n {
            let y1 = (y[i] >> 1) as u8;
            if y1 ^ w_hat[i] != m1[k][i] {
                errors += 1;
            }
        }
        let fresh_hat = y[slot..].iter().map(|&v| (v & 1) as u8);
        errors += fresh_hat.zip(&m2[k]).filter(|(a, b)| a != *b).count();
    }

    Ok(TrialOutcome {
        log: TrialLog { errors, overflows },
        message_bits: (b * n, b * fresh),
        state_ones,
        state_len,
    })
}

/// Runs `cfg.trials` independent trials, in parallel, and aggregates them.
pub fn run_block_markov(ch: &SingleStateChannel, cfg: &SimConfig) -> Result<SimReport, SimError> {
    cfg.validate()?;
    check_structure(ch)?;
    let outcomes: Vec<TrialOutcome> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| simulate_trial(ch, cfg, t))
        .collect::<Result<_, _>>()?;
    Ok(aggregate(cfg, &outcomes))
}

fn aggregate(cfg: &SimConfig, outcomes: &[TrialOutcome]) -> SimReport {
    let trials = outcomes.len();
    let uses = (trials * (cfg.blocks + 1) * cfg.n) as f64;
    let bits1: usize = outcomes.iter().map(|o| o.message_bits.0).sum();
    let bits2: usize = outcomes.iter().map(|o| o.message_bits.1).sum();
    let failed = outcomes.iter().filter(|o| o.log.errors > 0).count();
    let overflows: usize = outcomes.iter().map(|o| o.log.overflows).sum();
    SimReport {
        config: cfg.clone(),
        empirical_r1: bits1 as f64 / uses,
        empirical_r2: bits2 as f64 / uses,
        block_error_rate: failed as f64 / trials as f64,
        overflow_rate: overflows as f64 / (trials * cfg.blocks) as f64,
        trials: outcomes.iter().map(|o| o.log).collect(),
    }
}
