//! State-dependent MAC models, the example channels, and the JSON channel
//! spec format.
//!
//! Composite letters are flattened to single indices: a state pair
//! `(w0, w1)` is `w = 2·w0 + w1` and an output pair `(y1, y2)` is
//! `y = 2·y1 + y2`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prob::{inverse_binary_entropy, Alphabet, ConditionalPmf, JointPmf, ProbError};

/// Tolerance within which file PMFs are silently renormalized.
pub const FILE_NORMALIZATION_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("cannot read channel file: {0}")]
    Io(#[from] std::io::Error),
    #[error("channel file is not valid JSON: {0}")]
    Parse(String),
    #[error("channel file violates the schema: {0}")]
    Schema(String),
    #[error("{what} sums to {sum}, which is not within 1e-6 of 1")]
    Normalization { what: String, sum: f64 },
    #[error("{what} contains the negative probability {value}")]
    NegativeProbability { what: String, value: f64 },
    #[error(transparent)]
    Prob(#[from] ProbError),
}

/// A MAC `P(y | w, x1, x2)` governed by one IID state `W`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleStateChannel {
    state_pmf: JointPmf,
    law: ConditionalPmf,
}

/// A MAC `P(y | s1, s2, x1, x2)` governed by two independent IID states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoubleStateChannel {
    s1_pmf: JointPmf,
    s2_pmf: JointPmf,
    law: ConditionalPmf,
}

/// Either kind of channel, as produced by [`load_channel`].
#[derive(Debug, Clone, PartialEq)]
pub enum Channel {
    Single(SingleStateChannel),
    Double(DoubleStateChannel),
}

fn expect_var(a: &Alphabet, name: &str) -> Result<(), ChannelError> {
    if a.name == name {
        Ok(())
    } else {
        Err(ChannelError::Schema(format!(
            "expected variable `{name}`, found `{}`",
            a.name
        )))
    }
}

impl SingleStateChannel {
    /// `state_pmf` must be over `W`; `law` must be `Y | W, X1, X2`.
    pub fn new(state_pmf: JointPmf, law: ConditionalPmf) -> Result<Self, ChannelError> {
        if state_pmf.vars().len() != 1 {
            return Err(ChannelError::Schema("state pmf must be over W alone".into()));
        }
        expect_var(&state_pmf.vars()[0], "W")?;
        if law.targets().len() != 1 || law.givens().len() != 3 {
            return Err(ChannelError::Schema("law must be Y | W, X1, X2".into()));
        }
        expect_var(&law.targets()[0], "Y")?;
        for (a, n) in law.givens().iter().zip(["W", "X1", "X2"]) {
            expect_var(a, n)?;
        }
        if law.givens()[0].size != state_pmf.vars()[0].size {
            return Err(ProbError::AlphabetMismatch {
                name: "W".into(),
                expected: state_pmf.vars()[0].size,
                found: law.givens()[0].size,
            }
            .into());
        }
        Ok(Self { state_pmf, law })
    }

    pub fn state_pmf(&self) -> &JointPmf {
        &self.state_pmf
    }

    pub fn law(&self) -> &ConditionalPmf {
        &self.law
    }

    pub fn state(&self) -> &Alphabet {
        &self.law.givens()[0]
    }

    pub fn x1(&self) -> &Alphabet {
        &self.law.givens()[1]
    }

    pub fn x2(&self) -> &Alphabet {
        &self.law.givens()[2]
    }

    pub fn y(&self) -> &Alphabet {
        &self.law.targets()[0]
    }

    /// `P(y | x1, x2)` with the state averaged out, indexed `[(x1, x2), y]`.
    pub fn state_averaged_law(&self) -> Vec<f64> {
        let (nw, n1, n2, ny) = (self.state().size, self.x1().size, self.x2().size, self.y().size);
        let mut out = vec![0.0; n1 * n2 * ny];
        for w in 0..nw {
            let pw = self.state_pmf.probs()[w];
            for x in 0..n1 * n2 {
                let slice = self.law.slice(w * n1 * n2 + x);
                for y in 0..ny {
                    out[x * ny + y] += pw * slice[y];
                }
            }
        }
        out
    }
}

impl DoubleStateChannel {
    /// `law` must be `Y | S1, S2, X1, X2`.
    pub fn new(s1_pmf: JointPmf, s2_pmf: JointPmf, law: ConditionalPmf) -> Result<Self, ChannelError> {
        for (pmf, n) in [(&s1_pmf, "S1"), (&s2_pmf, "S2")] {
            if pmf.vars().len() != 1 {
                return Err(ChannelError::Schema(format!("pmf of {n} must be univariate")));
            }
            expect_var(&pmf.vars()[0], n)?;
        }
        if law.targets().len() != 1 || law.givens().len() != 4 {
            return Err(ChannelError::Schema("law must be Y | S1, S2, X1, X2".into()));
        }
        expect_var(&law.targets()[0], "Y")?;
        for (a, n) in law.givens().iter().zip(["S1", "S2", "X1", "X2"]) {
            expect_var(a, n)?;
        }
        for (pmf, g) in [(&s1_pmf, &law.givens()[0]), (&s2_pmf, &law.givens()[1])] {
            if pmf.vars()[0].size != g.size {
                return Err(ProbError::AlphabetMismatch {
                    name: g.name.clone(),
                    expected: pmf.vars()[0].size,
                    found: g.size,
                }
                .into());
            }
        }
        Ok(Self { s1_pmf, s2_pmf, law })
    }

    pub fn s1_pmf(&self) -> &JointPmf {
        &self.s1_pmf
    }

    pub fn s2_pmf(&self) -> &JointPmf {
        &self.s2_pmf
    }

    pub fn law(&self) -> &ConditionalPmf {
        &self.law
    }

    pub fn s1(&self) -> &Alphabet {
        &self.law.givens()[0]
    }

    pub fn s2(&self) -> &Alphabet {
        &self.law.givens()[1]
    }

    pub fn x1(&self) -> &Alphabet {
        &self.law.givens()[2]
    }

    pub fn x2(&self) -> &Alphabet {
        &self.law.givens()[3]
    }

    pub fn y(&self) -> &Alphabet {
        &self.law.targets()[0]
    }
}

/// State pair `(W0, W1)` with IID Bernoulli(p) components, flattened.
fn pair_state_pmf(name: &str, p: f64) -> JointPmf {
    let b = [1.0 - p, p];
    let probs = (0..4).map(|w| b[w >> 1] * b[w & 1]).collect();
    JointPmf::single(Alphabet::new(name, 4), probs).expect("product of Bernoullis")
}

/// `Y1 = X1 ⊕ W_{X2}`, `Y2 = X2`, flattened to `y = 2·y1 + y2`.
fn example_output(w: usize, x1: usize, x2: usize) -> usize {
    let w_sel = if x2 == 0 { w >> 1 } else { w & 1 };
    let y1 = x1 ^ w_sel;
    2 * y1 + x2
}

/// Bernoulli parameter whose binary entropy is one half.
pub fn half_entropy_parameter() -> f64 {
    inverse_binary_entropy(0.5).expect("0.5 is in range")
}

/// The separating example channel, with the state parameter solved from
/// `h2(p) = 1/2`.
pub fn build_example_single() -> SingleStateChannel {
    build_example_single_with(half_entropy_parameter())
}

/// The example channel with an arbitrary state parameter `p`.
pub fn build_example_single_with(p: f64) -> SingleStateChannel {
    let law = ConditionalPmf::deterministic(
        Alphabet::new("Y", 4),
        vec![Alphabet::new("W", 4), Alphabet::new("X1", 2), Alphabet::new("X2", 2)],
        |g| example_output(g[0], g[1], g[2]),
    )
    .expect("deterministic law");
    SingleStateChannel::new(pair_state_pmf("W", p), law).expect("consistent example")
}

/// The example channel with a null `S1` and `S2 = (W0, W1)`.
pub fn build_example_double() -> DoubleStateChannel {
    let p = half_entropy_parameter();
    let law = ConditionalPmf::deterministic(
        Alphabet::new("Y", 4),
        vec![
            Alphabet::new("S1", 1),
            Alphabet::new("S2", 4),
            Alphabet::new("X1", 2),
            Alphabet::new("X2", 2),
        ],
        |g| example_output(g[1], g[2], g[3]),
    )
    .expect("deterministic law");
    let s1 = JointPmf::single(Alphabet::new("S1", 1), vec![1.0]).expect("point mass");
    DoubleStateChannel::new(s1, pair_state_pmf("S2", p), law).expect("consistent example")
}

fn binary_givens() -> Vec<Alphabet> {
    vec![Alphabet::new("W", 2), Alphabet::new("X1", 2), Alphabet::new("X2", 2)]
}

/// Binary channel whose output is a fair coin independent of everything.
pub fn build_useless_channel() -> SingleStateChannel {
    let law = ConditionalPmf::from_fn(vec![Alphabet::new("Y", 2)], binary_givens(), |_, _| 0.5)
        .expect("uniform law");
    SingleStateChannel::new(JointPmf::uniform(vec![Alphabet::new("W", 2)]), law)
        .expect("consistent channel")
}

/// Binary channel with `Y = X2`: user 1 cannot reach the receiver.
pub fn build_x1_disconnected_channel() -> SingleStateChannel {
    let law = ConditionalPmf::deterministic(Alphabet::new("Y", 2), binary_givens(), |g| g[2])
        .expect("deterministic law");
    SingleStateChannel::new(JointPmf::uniform(vec![Alphabet::new("W", 2)]), law)
        .expect("consistent channel")
}

/// On-disk channel description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub kind: String,
    pub alphabets: BTreeMap<String, usize>,
    pub state_pmf: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_pmf2: Option<Vec<f64>>,
    pub law: Vec<f64>,
}

fn alphabet(spec: &ChannelSpec, name: &str) -> Result<Alphabet, ChannelError> {
    match spec.alphabets.get(name) {
        Some(&0) => Err(ChannelError::Schema(format!("alphabet `{name}` is empty"))),
        Some(&size) => Ok(Alphabet::new(name, size)),
        None => Err(ChannelError::Schema(format!("missing alphabet `{name}`"))),
    }
}

/// Checks signs and per-slice sums, renormalizing small deviations.
fn normalize_slices(what: &str, values: &[f64], slice: usize) -> Result<Vec<f64>, ChannelError> {
    let mut out = values.to_vec();
    for (i, chunk) in out.chunks_mut(slice).enumerate() {
        if let Some(&v) = chunk.iter().find(|v| v.is_nan() || **v < 0.0) {
            return Err(ChannelError::NegativeProbability {
                what: what.to_string(),
                value: v,
            });
        }
        let sum: f64 = chunk.iter().sum();
        if (sum - 1.0).abs() > FILE_NORMALIZATION_TOL {
            let what = if values.len() > slice {
                format!("{what} slice {i}")
            } else {
                what.to_string()
            };
            return Err(ChannelError::Normalization { what, sum });
        }
        // Rounding-level deviations are left alone so files round-trip exactly.
        if (sum - 1.0).abs() > 1e-12 {
            chunk.iter_mut().for_each(|v| *v /= sum);
        }
    }
    Ok(out)
}

fn check_len(what: &str, values: &[f64], expected: usize) -> Result<(), ChannelError> {
    if values.len() == expected {
        Ok(())
    } else {
        Err(ChannelError::Schema(format!(
            "{what} has {} entries, expected {expected}",
            values.len()
        )))
    }
}

fn check_names(spec: &ChannelSpec, names: &[&str]) -> Result<(), ChannelError> {
    if let Some(extra) = spec.alphabets.keys().find(|k| !names.contains(&k.as_str())) {
        return Err(ChannelError::Schema(format!(
            "unexpected alphabet `{extra}` for kind `{}`",
            spec.kind
        )));
    }
    Ok(())
}

impl ChannelSpec {
    pub fn into_channel(self) -> Result<Channel, ChannelError> {
        match self.kind.as_str() {
            "single" => {
                check_names(&self, &["W", "X1", "X2", "Y"])?;
                if self.state_pmf2.is_some() {
                    return Err(ChannelError::Schema("state_pmf2 is only valid for kind `double`".into()));
                }
                let [w, x1, x2, y] = ["W", "X1", "X2", "Y"].map(|n| alphabet(&self, n));
                let (w, x1, x2, y) = (w?, x1?, x2?, y?);
                check_len("state_pmf", &self.state_pmf, w.size)?;
                check_len("law", &self.law, w.size * x1.size * x2.size * y.size)?;
                let state = normalize_slices("state_pmf", &self.state_pmf, w.size)?;
                let law = normalize_slices("law", &self.law, y.size)?;
                let state = JointPmf::single(w.clone(), state)?;
                let law = ConditionalPmf::new(vec![y], vec![w, x1, x2], law)?;
                Ok(Channel::Single(SingleStateChannel::new(state, law)?))
            }
            "double" => {
                check_names(&self, &["S1", "S2", "X1", "X2", "Y"])?;
                let [s1, s2, x1, x2, y] = ["S1", "S2", "X1", "X2", "Y"].map(|n| alphabet(&self, n));
                let (s1, s2, x1, x2, y) = (s1?, s2?, x1?, x2?, y?);
                let pmf2 = self
                    .state_pmf2
                    .as_ref()
                    .ok_or_else(|| ChannelError::Schema("kind `double` requires state_pmf2".into()))?;
                check_len("state_pmf", &self.state_pmf, s1.size)?;
                check_len("state_pmf2", pmf2, s2.size)?;
                check_len("law", &self.law, s1.size * s2.size * x1.size * x2.size * y.size)?;
                let p1 = normalize_slices("state_pmf", &self.state_pmf, s1.size)?;
                let p2 = normalize_slices("state_pmf2", pmf2, s2.size)?;
                let law = normalize_slices("law", &self.law, y.size)?;
                let p1 = JointPmf::single(s1.clone(), p1)?;
                let p2 = JointPmf::single(s2.clone(), p2)?;
                let law = ConditionalPmf::new(vec![y], vec![s1, s2, x1, x2], law)?;
                Ok(Channel::Double(DoubleStateChannel::new(p1, p2, law)?))
            }
            other => Err(ChannelError::Schema(format!("unknown kind `{other}`"))),
        }
    }
}

impl From<&SingleStateChannel> for ChannelSpec {
    fn from(c: &SingleStateChannel) -> Self {
        let alphabets = [c.state(), c.x1(), c.x2(), c.y()]
            .into_iter()
            .map(|a| (a.name.clone(), a.size))
            .collect();
        ChannelSpec {
            kind: "single".into(),
            alphabets,
            state_pmf: c.state_pmf.probs().to_vec(),
            state_pmf2: None,
            law: c.law.probs().to_vec(),
        }
    }
}

impl From<&DoubleStateChannel> for ChannelSpec {
    fn from(c: &DoubleStateChannel) -> Self {
        let alphabets = [c.s1(), c.s2(), c.x1(), c.x2(), c.y()]
            .into_iter()
            .map(|a| (a.name.clone(), a.size))
            .collect();
        ChannelSpec {
            kind: "double".into(),
            alphabets,
            state_pmf: c.s1_pmf.probs().to_vec(),
            state_pmf2: Some(c.s2_pmf.probs().to_vec()),
            law: c.law.probs().to_vec(),
        }
    }
}

impl From<&Channel> for ChannelSpec {
    fn from(c: &Channel) -> Self {
        match c {
            Channel::Single(s) => s.into(),
            Channel::Double(d) => d.into(),
        }
    }
}

pub fn parse_channel(text: &str) -> Result<Channel, ChannelError> {
    let spec: ChannelSpec =
        serde_json::from_str(text).map_err(|e| match e.classify() {
            serde_json::error::Category::Data => ChannelError::Schema(e.to_string()),
            _ => ChannelError::Parse(e.to_string()),
        })?;
    spec.into_channel()
}

pub fn load_channel(path: impl AsRef<Path>) -> Result<Channel, ChannelError> {
    parse_channel(&std::fs::read_to_string(path)?)
}

pub fn channel_to_json(c: &Channel) -> String {
    serde_json::to_string_pretty(&ChannelSpec::from(c)).expect("spec serializes")
}

pub fn save_channel(c: &Channel, path: impl AsRef<Path>) -> Result<(), ChannelError> {
    std::fs::write(path, channel_to_json(c))?;
    Ok(())
}
