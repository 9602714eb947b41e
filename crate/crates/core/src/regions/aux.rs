use serde::{Deserialize, Serialize};

use super::{RegionError, Result};
use crate::channels::{DoubleStateChannel, SingleStateChannel};
use crate::prob::{compose, Alphabet, ConditionalPmf, Factor, JointPmf};

/// Variable order of every single-state joint.
pub const SINGLE_ORDER: [&str; 8] = ["U", "V", "V1", "V2", "X1", "X2", "W", "Y"];
/// Variable order of every double-state joint.
pub const DOUBLE_ORDER: [&str; 7] = ["V1", "V2", "S1", "S2", "X1", "X2", "Y"];

/// Auxiliary factors for the single-state bounds.
///
/// `v1` and `v2` may be omitted, which makes them one-letter (constant).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxChoiceSingle {
    pub u: JointPmf,
    pub x1_given_u: ConditionalPmf,
    pub x2_given_u: ConditionalPmf,
    pub v_given_w: ConditionalPmf,
    pub v1_given_w_x1: Option<ConditionalPmf>,
    pub v2_given_w_x2: Option<ConditionalPmf>,
}

/// Auxiliary factors for the double-state bounds.
///
/// With `li_form == false` the descriptions may depend on the states only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxChoiceDouble {
    pub x1: JointPmf,
    pub x2: JointPmf,
    pub v1: ConditionalPmf,
    pub v2: ConditionalPmf,
    pub li_form: bool,
}

/// Either auxiliary family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum AuxChoice {
    Single(AuxChoiceSingle),
    Double(AuxChoiceDouble),
}

/// `target = state`, a noiseless description of a state alphabet.
pub fn copy_of(target: &str, state: &Alphabet) -> ConditionalPmf {
    ConditionalPmf::deterministic(Alphabet::new(target, state.size), vec![state.clone()], |g| g[0])
        .expect("identity map")
}

/// For a pair state `s = 2·s0 + s1` and a binary input `x`, the component
/// `s_x` that the input selects.
pub fn selected_component(target: &str, state: &Alphabet, input: &Alphabet) -> ConditionalPmf {
    assert!(state.size == 4 && input.size == 2, "needs a pair state and a binary input");
    ConditionalPmf::deterministic(Alphabet::new(target, 2), vec![state.clone(), input.clone()], |g| {
        if g[1] == 0 {
            g[0] >> 1
        } else {
            g[0] & 1
        }
    })
    .expect("selection map")
}

fn point_mass(name: &str) -> JointPmf {
    JointPmf::single(Alphabet::new(name, 1), vec![1.0]).expect("point mass")
}

fn constant_given(name: &str, givens: Vec<Alphabet>) -> ConditionalPmf {
    ConditionalPmf::constant(point_mass(name), givens).expect("constant conditional")
}

impl AuxChoiceSingle {
    /// Constant `U`, `V`, `V1`, `V2` with independent inputs.
    pub fn constant(ch: &SingleStateChannel, p_x1: &[f64], p_x2: &[f64]) -> Result<Self> {
        let u = Alphabet::new("U", 1);
        let x1 = JointPmf::single(ch.x1().clone(), p_x1.to_vec())?;
        let x2 = JointPmf::single(ch.x2().clone(), p_x2.to_vec())?;
        Ok(Self {
            u: point_mass("U"),
            x1_given_u: ConditionalPmf::constant(x1, vec![u.clone()])?,
            x2_given_u: ConditionalPmf::constant(x2, vec![u])?,
            v_given_w: constant_given("V", vec![ch.state().clone()]),
            v1_given_w_x1: None,
            v2_given_w_x2: None,
        })
    }

    /// Constant auxiliaries with uniform inputs.
    pub fn uniform_inputs(ch: &SingleStateChannel) -> Self {
        let n1 = ch.x1().size;
        let n2 = ch.x2().size;
        Self::constant(ch, &vec![1.0 / n1 as f64; n1], &vec![1.0 / n2 as f64; n2])
            .expect("uniform inputs are valid")
    }

    pub fn with_v(mut self, v_given_w: ConditionalPmf) -> Self {
        self.v_given_w = v_given_w;
        self
    }

    pub fn with_v1(mut self, v1: ConditionalPmf) -> Self {
        self.v1_given_w_x1 = Some(v1);
        self
    }

    pub fn with_v2(mut self, v2: ConditionalPmf) -> Self {
        self.v2_given_w_x2 = Some(v2);
        self
    }

    /// Drops `V1` and `V2`, leaving the Theorem-1 part of the choice.
    pub fn without_private_descriptions(mut self) -> Self {
        self.v1_given_w_x1 = None;
        self.v2_given_w_x2 = None;
        self
    }

    pub(crate) fn tunables(&self) -> Vec<(&[f64], usize)> {
        let mut out: Vec<(&[f64], usize)> = vec![
            (self.u.probs(), self.u.probs().len()),
            (self.x1_given_u.probs(), self.x1_given_u.slice_len()),
            (self.x2_given_u.probs(), self.x2_given_u.slice_len()),
            (self.v_given_w.probs(), self.v_given_w.slice_len()),
        ];
        for c in [&self.v1_given_w_x1, &self.v2_given_w_x2].into_iter().flatten() {
            out.push((c.probs(), c.slice_len()));
        }
        out
    }

    pub(crate) fn tunable_mut(&mut self, k: usize) -> &mut [f64] {
        match k {
            0 => self.u.probs_mut(),
            1 => self.x1_given_u.probs_mut(),
            2 => self.x2_given_u.probs_mut(),
            3 => self.v_given_w.probs_mut(),
            _ => {
                let mut rest = [&mut self.v1_given_w_x1, &mut self.v2_given_w_x2]
                    .into_iter()
                    .filter_map(|c| c.as_mut());
                rest.nth(k - 4).expect("tunable index in range").probs_mut()
            }
        }
    }
}

impl AuxChoiceDouble {
    /// Constant descriptions with the given input PMFs.
    pub fn constant(ch: &DoubleStateChannel, p_x1: &[f64], p_x2: &[f64], li_form: bool) -> Result<Self> {
        Ok(Self {
            x1: JointPmf::single(ch.x1().clone(), p_x1.to_vec())?,
            x2: JointPmf::single(ch.x2().clone(), p_x2.to_vec())?,
            v1: constant_given("V1", vec![ch.s1().clone()]),
            v2: constant_given("V2", vec![ch.s2().clone()]),
            li_form,
        })
    }

    pub fn uniform_inputs(ch: &DoubleStateChannel, li_form: bool) -> Self {
        let n1 = ch.x1().size;
        let n2 = ch.x2().size;
        Self::constant(ch, &vec![1.0 / n1 as f64; n1], &vec![1.0 / n2 as f64; n2], li_form)
            .expect("uniform inputs are valid")
    }

    pub fn with_v1(mut self, v1: ConditionalPmf) -> Self {
        self.v1 = v1;
        self
    }

    pub fn with_v2(mut self, v2: ConditionalPmf) -> Self {
        self.v2 = v2;
        self
    }

    pub(crate) fn tunables(&self) -> Vec<(&[f64], usize)> {
        vec![
            (self.x1.probs(), self.x1.probs().len()),
            (self.x2.probs(), self.x2.probs().len()),
            (self.v1.probs(), self.v1.slice_len()),
            (self.v2.probs(), self.v2.slice_len()),
        ]
    }

    pub(crate) fn tunable_mut(&mut self, k: usize) -> &mut [f64] {
        match k {
            0 => self.x1.probs_mut(),
            1 => self.x2.probs_mut(),
            2 => self.v1.probs_mut(),
            3 => self.v2.probs_mut(),
            _ => panic!("tunable index {k} out of range"),
        }
    }
}

impl AuxChoice {
    pub(crate) fn tunables(&self) -> Vec<(&[f64], usize)> {
        match self {
            AuxChoice::Single(a) => a.tunables(),
            AuxChoice::Double(a) => a.tunables(),
        }
    }

    pub(crate) fn tunable_mut(&mut self, k: usize) -> &mut [f64] {
        match self {
            AuxChoice::Single(a) => a.tunable_mut(k),
            AuxChoice::Double(a) => a.tunable_mut(k),
        }
    }
}

fn check_target(c: &ConditionalPmf, name: &str) -> Result<()> {
    match c.targets() {
        [t] if t.name == name => Ok(()),
        _ => Err(RegionError::FormViolation(format!(
            "factor for `{name}` must have `{name}` as its only target"
        ))),
    }
}

fn check_givens(c: &ConditionalPmf, target: &str, allowed: &[&str]) -> Result<()> {
    match c.givens().iter().find(|g| !allowed.contains(&g.name.as_str())) {
        Some(g) => Err(RegionError::FormViolation(format!(
            "`{target}` may not depend on `{}`",
            g.name
        ))),
        None => Ok(()),
    }
}

/// The joint of `(U, V, V1, V2, X1, X2, W, Y)` for a channel and auxiliary
/// choice.
pub fn assemble_single(ch: &SingleStateChannel, aux: &AuxChoiceSingle) -> Result<JointPmf> {
    check_target(&aux.x1_given_u, "X1")?;
    check_target(&aux.x2_given_u, "X2")?;
    check_target(&aux.v_given_w, "V")?;
    check_givens(&aux.x1_given_u, "X1", &["U"])?;
    check_givens(&aux.x2_given_u, "X2", &["U"])?;
    check_givens(&aux.v_given_w, "V", &["W"])?;
    let v1_default;
    let v1: Factor<'_> = match &aux.v1_given_w_x1 {
        Some(c) => {
            check_target(c, "V1")?;
            check_givens(c, "V1", &["W", "X1"])?;
            c.into()
        }
        None => {
            v1_default = point_mass("V1");
            (&v1_default).into()
        }
    };
    let v2_default;
    let v2: Factor<'_> = match &aux.v2_given_w_x2 {
        Some(c) => {
            check_target(c, "V2")?;
            check_givens(c, "V2", &["W", "X2"])?;
            c.into()
        }
        None => {
            v2_default = point_mass("V2");
            (&v2_default).into()
        }
    };
    let factors = [
        Factor::from(ch.state_pmf()),
        (&aux.u).into(),
        (&aux.x1_given_u).into(),
        (&aux.x2_given_u).into(),
        (&aux.v_given_w).into(),
        v1,
        v2,
        ch.law().into(),
    ];
    Ok(compose(&factors, &SINGLE_ORDER)?)
}

/// The joint of `(V1, V2, S1, S2, X1, X2, Y)` for a channel and auxiliary
/// choice.
pub fn assemble_double(ch: &DoubleStateChannel, aux: &AuxChoiceDouble) -> Result<JointPmf> {
    check_target(&aux.v1, "V1")?;
    check_target(&aux.v2, "V2")?;
    let (a1, a2): (&[&str], &[&str]) = if aux.li_form {
        (&["S1", "X1"], &["S2", "X2"])
    } else {
        (&["S1"], &["S2"])
    };
    check_givens(&aux.v1, "V1", a1)?;
    check_givens(&aux.v2, "V2", a2)?;
    let factors = [
        Factor::from(ch.s1_pmf()),
        ch.s2_pmf().into(),
        (&aux.x1).into(),
        (&aux.x2).into(),
        (&aux.v1).into(),
        (&aux.v2).into(),
        ch.law().into(),
    ];
    Ok(compose(&factors, &DOUBLE_ORDER)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{build_example_double, build_example_single};
    use crate::prob::ProbError;

    /// `V2 = W_{X2}` on the flattened state `w = 2·w0 + w1`.
    fn selected_state(name: &str, state: &str) -> ConditionalPmf {
        ConditionalPmf::deterministic(
            Alphabet::new(name, 2),
            vec![Alphabet::new(state, 4), Alphabet::new("X2", 2)],
            |g| if g[1] == 0 { g[0] >> 1 } else { g[0] & 1 },
        )
        .unwrap()
    }

    #[test]
    fn assemble_paper_choice() {
        let ch = build_example_single();
        let aux = AuxChoiceSingle::uniform_inputs(&ch).with_v2(selected_state("V2", "W"));
        let j = assemble_single(&ch, &aux).unwrap();
        assert_eq!(j.var_names(), SINGLE_ORDER.to_vec());
        assert_eq!(j.mutual_information(&["X1"], &["X2"], &["U"]).unwrap(), 0.0);
        let m = j.marginalize(&["X1", "X2"]).unwrap();
        for p in m.probs() {
            assert!((p - 0.25).abs() < 1e-15);
        }
        let y = j.marginalize(&["Y"]).unwrap();
        assert_eq!(y.probs().len(), 4);
        assert!((y.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn state_side_independent_of_input_side() {
        let ch = build_example_single();
        let v = ConditionalPmf::from_fn(vec![Alphabet::new("V", 3)], vec![ch.state().clone()], |g, t| {
            [[0.2, 0.3, 0.5], [0.6, 0.2, 0.2], [0.1, 0.1, 0.8], [1.0, 0.0, 0.0]][g[0]][t[0]]
        })
        .unwrap();
        let aux = AuxChoiceSingle::uniform_inputs(&ch).with_v(v);
        let j = assemble_single(&ch, &aux).unwrap();
        let i = j.mutual_information(&["V", "W"], &["U", "X1", "X2"], &[]).unwrap();
        assert!(i < 1e-10);
    }

    #[test]
    fn mismatched_alphabet_rejected() {
        let ch = build_example_single();
        let v = ConditionalPmf::constant(point_mass("V"), vec![Alphabet::new("W", 3)]).unwrap();
        let aux = AuxChoiceSingle::uniform_inputs(&ch).with_v(v);
        assert!(matches!(
            assemble_single(&ch, &aux),
            Err(RegionError::Prob(ProbError::AlphabetMismatch { .. }))
        ));
    }

    #[test]
    fn theorem3_form_forbids_input_dependence() {
        let ch = build_example_double();
        let aux = AuxChoiceDouble::uniform_inputs(&ch, false).with_v2(selected_state("V2", "S2"));
        assert!(matches!(
            assemble_double(&ch, &aux),
            Err(RegionError::FormViolation(_))
        ));
        let li = AuxChoiceDouble { li_form: true, ..aux };
        assert!(assemble_double(&ch, &li).is_ok());
    }

    #[test]
    fn tunables_cover_every_factor() {
        let ch = build_example_single();
        let mut aux = AuxChoiceSingle::uniform_inputs(&ch).with_v2(selected_state("V2", "W"));
        assert_eq!(aux.tunables().len(), 5);
        aux.tunable_mut(4)[0] = 0.25;
        assert_eq!(aux.v2_given_w_x2.as_ref().unwrap().probs()[0], 0.25);
    }
}
