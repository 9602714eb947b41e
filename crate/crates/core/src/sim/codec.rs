//! Binary arithmetic coder for IID Bernoulli sources.
//!
//! Integer range coding with 32-bit registers held in `u64`, so the
//! products `range * cum` never overflow. Underflow is handled with the
//! usual pending-bit counter. The decoder is told the number of symbols and
//! reads zeros past the end of the codeword, which is what the termination
//! step is chosen for.

use thiserror::Error;

const PRECISION: u32 = 32;
const TOP: u64 = (1 << PRECISION) - 1;
const HALF: u64 = 1 << (PRECISION - 1);
const QUARTER: u64 = 1 << (PRECISION - 2);
const FREQ_BITS: u32 = 24;
const TOTAL: u64 = 1 << FREQ_BITS;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodecError {
    #[error("codeword of {needed} bits exceeds the budget of {budget}")]
    Overflow { needed: usize, budget: usize },
    #[error("cannot code an empty sequence")]
    EmptyInput,
    #[error("model probability {0} outside (0, 1)")]
    BadModel(f64),
    #[error("budget must be at least one bit")]
    ZeroBudget,
}

/// Frequency of a zero on the `2^24` scale, kept strictly inside the range.
fn zero_freq(p: f64) -> Result<u64, CodecError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(CodecError::BadModel(p));
    }
    Ok((((1.0 - p) * TOTAL as f64).round() as u64).clamp(1, TOTAL - 1))
}

fn split(low: u64, high: u64, f0: u64) -> u64 {
    let range = high - low + 1;
    low + range * f0 / TOTAL - 1
}

struct BitSink {
    out: Vec<bool>,
    pending: usize,
    limit: usize,
}

impl BitSink {
    fn emit(&mut self, bit: bool) {
        self.out.push(bit);
        for _ in 0..self.pending {
            self.out.push(!bit);
        }
        self.pending = 0;
    }

    fn over(&self) -> bool {
        self.out.len() + self.pending > self.limit
    }
}

/// Encodes `bits` (each 0 or 1) under an IID model with `P(1) = p`.
///
/// Returns `Overflow` when the codeword would be longer than `budget`.
pub fn arithmetic_encode(bits: &[u8], p: f64, budget: usize) -> Result<Vec<bool>, CodecError> {
    if bits.is_empty() {
        return Err(CodecError::EmptyInput);
    }
    if budget == 0 {
        return Err(CodecError::ZeroBudget);
    }
    let f0 = zero_freq(p)?;
    let (mut low, mut high) = (0u64, TOP);
    let mut sink = BitSink {
        out: Vec::new(),
        pending: 0,
        limit: budget,
    };
    for &b in bits {
        let mid = split(low, high, f0);
        if b == 0 {
            high = mid;
        } else {
            low = mid + 1;
        }
        loop {
            if high < HALF {
                sink.emit(false);
            } else if low >= HALF {
                sink.emit(true);
                low -= HALF;
                high -= HALF;
            } else if low >= QUARTER && high < 3 * QUARTER {
                sink.pending += 1;
                low -= QUARTER;
                high -= QUARTER;
            } else {
                break;
            }
            low <<= 1;
            high = (high << 1) | 1;
        }
        if sink.over() {
            return Err(CodecError::Overflow {
                needed: sink.out.len() + sink.pending,
                budget,
            });
        }
    }
    sink.pending += 1;
    sink.emit(low >= QUARTER);
    let needed = sink.out.len();
    if needed > budget {
        return Err(CodecError::Overflow { needed, budget });
    }
    Ok(sink.out)
}

/// Decodes `n` symbols from `code`, reading zeros past its end.
pub fn arithmetic_decode(code: &[bool], p: f64, n: usize) -> Result<Vec<u8>, CodecError> {
    let f0 = zero_freq(p)?;
    let mut next = code.iter().copied().chain(std::iter::repeat(false));
    let mut value = 0u64;
    for _ in 0..PRECISION {
        value = (value << 1) | next.next().unwrap() as u64;
    }
    let (mut low, mut high) = (0u64, TOP);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mid = split(low, high, f0);
        if value <= mid {
            out.push(0);
            high = mid;
        } else {
            out.push(1);
            low = mid + 1;
        }
        loop {
            if high < HALF {
            } else if low >= HALF {
                low -= HALF;
                high -= HALF;
                value -= HALF;
            } else if low >= QUARTER && high < 3 * QUARTER {
                low -= QUARTER;
                high -= QUARTER;
                value -= QUARTER;
            } else {
                break;
            }
            low <<= 1;
            high = (high << 1) | 1;
            value = (value << 1) | next.next().unwrap() as u64;
        }
    }
    Ok(out)
}

/// An arithmetic coder with a fixed model and bit budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Codec {
    p: f64,
    budget: usize,
}

impl Codec {
    pub fn new(p: f64, budget: usize) -> Result<Self, CodecError> {
        zero_freq(p)?;
        if budget == 0 {
            return Err(CodecError::ZeroBudget);
        }
        Ok(Self { p, budget })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn encode(&self, bits: &[u8]) -> Result<Vec<bool>, CodecError> {
        arithmetic_encode(bits, self.p, self.budget)
    }

    pub fn decode(&self, code: &[bool], n: usize) -> Result<Vec<u8>, CodecError> {
        arithmetic_decode(code, self.p, n)
    }
}

/// `−Σ log2 P(x_i)` under the IID model.
pub fn ideal_codelength(bits: &[u8], p: f64) -> f64 {
    let ones = bits.iter().filter(|&&b| b == 1).count() as f64;
    let zeros = bits.len() as f64 - ones;
    -(ones * p.log2() + zeros * (1.0 - p).log2())
}
