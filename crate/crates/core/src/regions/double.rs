use super::single::{mi, require};
use super::{BoundKind, MiBundle, Result};
use crate::prob::JointPmf;

const DOUBLE_VARS: [&str; 7] = ["V1", "V2", "S1", "S2", "X1", "X2", "Y"];

/// Signed right-hand sides of the state-only-description double-state bound.
///
/// Negative entries mean the distribution contributes no rate pairs.
pub fn eval_thm3(j: &JointPmf) -> Result<MiBundle> {
    require(j, &DOUBLE_VARS)?;
    let r1 = mi(j, &["X1"], &["Y"], &["X2", "V1", "V2"])? - mi(j, &["V1"], &["S1"], &["Y", "V2"])?;
    let r2 = mi(j, &["X2"], &["Y"], &["X1", "V1", "V2"])? - mi(j, &["V2"], &["S2"], &["Y", "V1"])?;
    let sum = mi(j, &["X1", "X2"], &["Y"], &["V1", "V2"])? - mi(j, &["V1", "V2"], &["S1", "S2"], &["Y"])?;
    Ok(MiBundle::from_values(BoundKind::Thm3, &[r1, r2, sum]))
}

/// Signed right-hand sides of the bound whose descriptions may depend on
/// each user's own input.
pub fn eval_li(j: &JointPmf) -> Result<MiBundle> {
    require(j, &DOUBLE_VARS)?;
    let cost1 = mi(j, &["V1"], &["S1"], &["X1"])?;
    let cost2 = mi(j, &["V2"], &["S2"], &["X2"])?;
    let r1 = mi(j, &["X1", "V1"], &["Y"], &["X2", "V2"])? - cost1;
    let r2 = mi(j, &["X2", "V2"], &["Y"], &["X1", "V1"])? - cost2;
    let sum = mi(j, &["X1", "X2", "V1", "V2"], &["Y"], &[])? - cost1 - cost2;
    Ok(MiBundle::from_values(BoundKind::Li, &[r1, r2, sum]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::build_example_double;
    use crate::prob::{Alphabet, ConditionalPmf};
    use crate::regions::{assemble_double, AuxChoiceDouble, RatePoint, RegionError};

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    fn triple(b: &MiBundle) -> [f64; 3] {
        [b.value("r1"), b.value("r2"), b.value("sum")]
    }

    #[test]
    fn thm3_constant_descriptions() {
        let ch = build_example_double();
        let j = assemble_double(&ch, &AuxChoiceDouble::uniform_inputs(&ch, false)).unwrap();
        let t = triple(&eval_thm3(&j).unwrap());
        assert!(close(t[0], 0.5) && close(t[1], 1.0) && close(t[2], 1.5), "{t:?}");
    }

    #[test]
    fn thm3_full_state_description_kills_user_two() {
        let ch = build_example_double();
        let v2 = ConditionalPmf::deterministic(Alphabet::new("V2", 4), vec![Alphabet::new("S2", 4)], |g| g[0])
            .unwrap();
        let aux = AuxChoiceDouble::uniform_inputs(&ch, false).with_v2(v2);
        let j = assemble_double(&ch, &aux).unwrap();
        let b = eval_thm3(&j).unwrap();
        assert!(close(b.value("r2"), 0.0), "{}", b.value("r2"));
        assert!(close(j.mutual_information(&["V2"], &["S2"], &["Y"]).unwrap(), 1.0));
    }

    #[test]
    fn null_first_state_carries_nothing() {
        let ch = build_example_double();
        let v1 = ConditionalPmf::from_fn(vec![Alphabet::new("V1", 3)], vec![Alphabet::new("S1", 1)], |_, t| {
            [0.2, 0.5, 0.3][t[0]]
        })
        .unwrap();
        let aux = AuxChoiceDouble::uniform_inputs(&ch, false).with_v1(v1);
        let j = assemble_double(&ch, &aux).unwrap();
        assert_eq!(j.mutual_information(&["V1"], &["S1"], &["Y", "V2"]).unwrap(), 0.0);
    }

    #[test]
    fn li_certifies_the_separating_pair() {
        let ch = build_example_double();
        let v2 = ConditionalPmf::deterministic(
            Alphabet::new("V2", 2),
            vec![Alphabet::new("S2", 4), Alphabet::new("X2", 2)],
            |g| if g[1] == 0 { g[0] >> 1 } else { g[0] & 1 },
        )
        .unwrap();
        let aux = AuxChoiceDouble::uniform_inputs(&ch, true).with_v2(v2);
        let b = eval_li(&assemble_double(&ch, &aux).unwrap()).unwrap();
        let t = triple(&b);
        assert!(close(t[0], 1.0) && close(t[1], 1.0) && close(t[2], 1.5), "{t:?}");
        assert!(b.region().unwrap().contains(RatePoint::new(1.0, 0.5), 1e-9));
    }

    #[test]
    fn li_full_state_costs_one_bit() {
        let ch = build_example_double();
        let v2 = ConditionalPmf::deterministic(Alphabet::new("V2", 4), vec![Alphabet::new("S2", 4)], |g| g[0])
            .unwrap();
        let aux = AuxChoiceDouble::uniform_inputs(&ch, true).with_v2(v2);
        let j = assemble_double(&ch, &aux).unwrap();
        assert!(close(j.mutual_information(&["V2"], &["S2"], &["X2"]).unwrap(), 1.0));
    }

    #[test]
    fn li_constant_descriptions_reduce_to_plain_mac() {
        let ch = build_example_double();
        let j = assemble_double(&ch, &AuxChoiceDouble::uniform_inputs(&ch, true)).unwrap();
        let t = triple(&eval_li(&j).unwrap());
        let plain = [
            j.mutual_information(&["X1"], &["Y"], &["X2"]).unwrap(),
            j.mutual_information(&["X2"], &["Y"], &["X1"]).unwrap(),
            j.mutual_information(&["X1", "X2"], &["Y"], &[]).unwrap(),
        ];
        for (a, b) in t.iter().zip(plain) {
            assert!(close(*a, b));
        }
    }

    #[test]
    fn missing_variable() {
        let ch = build_example_double();
        let j = assemble_double(&ch, &AuxChoiceDouble::uniform_inputs(&ch, false)).unwrap();
        let small = j.marginalize(&["X1", "X2", "Y"]).unwrap();
        assert!(matches!(eval_thm3(&small), Err(RegionError::MissingVariable(_))));
        assert!(matches!(eval_li(&small), Err(RegionError::MissingVariable(_))));
    }
}
