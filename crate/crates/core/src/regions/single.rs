use super::{BoundKind, MiBundle, RegionError, Result};
use crate::prob::{JointPmf, INTERNAL_TOL};

pub(super) fn require(j: &JointPmf, names: &[&str]) -> Result<()> {
    match names.iter().find(|n| !j.has_var(n)) {
        Some(n) => Err(RegionError::MissingVariable(n.to_string())),
        None => Ok(()),
    }
}

pub(super) fn mi(j: &JointPmf, a: &[&str], b: &[&str], c: &[&str]) -> Result<f64> {
    Ok(j.mutual_information(a, b, c)?)
}

/// Right-hand sides of the common-message bound:
/// `I(X1;Y|X2,U,V)`, `I(X2;Y|X1,U,V)`, `I(X1,X2;Y|U,V)` and the signed
/// `I(X1,X2,V;Y) − I(V;W)`.
pub fn eval_thm1(j: &JointPmf) -> Result<MiBundle> {
    require(j, &["U", "V", "X1", "X2", "W", "Y"])?;
    let no_w = j.marginalize(&["U", "V", "X1", "X2", "Y"])?;
    let r1 = mi(&no_w, &["X1"], &["Y"], &["X2", "U", "V"])?;
    let r2 = mi(&no_w, &["X2"], &["Y"], &["X1", "U", "V"])?;
    let sum = mi(&no_w, &["X1", "X2"], &["Y"], &["U", "V"])?;
    let sum_state = mi(j, &["X1", "X2", "V"], &["Y"], &[])? - mi(j, &["V"], &["W"], &[])?;
    Ok(MiBundle::from_values(BoundKind::Thm1, &[r1, r2, sum, sum_state]))
}

/// Largest R2 paired with `r1` for a single common-message bundle.
pub fn thm1_max_r2(b: &MiBundle, r1: f64) -> Result<f64> {
    b.expect_kind(BoundKind::Thm1)?;
    let (e4, e5, e6, e7) = (b.value("r1"), b.value("r2"), b.value("sum"), b.value("sum_state"));
    let max_r1 = e4.min(e6).min(e7);
    if r1 < 0.0 || r1 > max_r1 + INTERNAL_TOL || e5 < -INTERNAL_TOL {
        return Err(RegionError::R1Infeasible { r1, max: max_r1 });
    }
    let r2 = e5.min(e6 - r1).min(e7 - r1);
    Ok(if r2 < INTERNAL_TOL { 0.0 } else { r2 })
}

/// The four rate-side terms and seven compression lower bounds of the
/// bound with private state-and-input descriptions `V1`, `V2`.
pub fn eval_thm2(j: &JointPmf) -> Result<MiBundle> {
    require(j, &["U", "V", "V1", "V2", "X1", "X2", "W", "Y"])?;
    let seen = ["Y", "V1", "V2", "V"];
    // U only enters the first three terms and W never does, so those are
    // read from a smaller marginal, and the rest from one without U.
    let no_w = j.marginalize(&["U", "V", "V1", "V2", "X1", "X2", "Y"])?;
    let no_u = j.marginalize(&["V", "V1", "V2", "X1", "X2", "W", "Y"])?;
    let j = &no_u;
    let values = [
        mi(&no_w, &["X1"], &seen, &["X2", "U"])?,
        mi(&no_w, &["X2"], &seen, &["X1", "U"])?,
        mi(&no_w, &["X1", "X2"], &seen, &["U"])?,
        mi(j, &["X1", "X2"], &seen, &[])?,
        mi(j, &["X1", "W"], &["V1"], &["V", "V2", "Y"])?,
        mi(j, &["X2", "W"], &["V2"], &["V", "V1", "Y"])?,
        mi(j, &["W"], &["V"], &["V1", "V2", "Y"])?,
        mi(j, &["X1", "X2", "W"], &["V1", "V2"], &["V", "Y"])?,
        mi(j, &["X1", "W"], &["V1", "V"], &["V2", "Y"])?,
        mi(j, &["X2", "W"], &["V2", "V"], &["V1", "Y"])?,
        mi(j, &["X1", "X2", "W"], &["V1", "V2", "V"], &["Y"])?,
    ];
    Ok(MiBundle::from_values(BoundKind::Thm2, &values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::build_example_single;
    use crate::prob::{Alphabet, ConditionalPmf};
    use crate::regions::{assemble_single, AuxChoiceSingle};

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    fn v_equals_w() -> ConditionalPmf {
        ConditionalPmf::deterministic(Alphabet::new("V", 4), vec![Alphabet::new("W", 4)], |g| g[0]).unwrap()
    }

    fn selected_state() -> ConditionalPmf {
        ConditionalPmf::deterministic(
            Alphabet::new("V2", 2),
            vec![Alphabet::new("W", 4), Alphabet::new("X2", 2)],
            |g| if g[1] == 0 { g[0] >> 1 } else { g[0] & 1 },
        )
        .unwrap()
    }

    #[test]
    fn thm1_full_state_description() {
        let ch = build_example_single();
        let aux = AuxChoiceSingle::uniform_inputs(&ch).with_v(v_equals_w());
        let b = eval_thm1(&assemble_single(&ch, &aux).unwrap()).unwrap();
        let v: Vec<f64> = b.values().collect();
        for (got, want) in v.iter().zip([1.0, 1.0, 2.0, 1.0]) {
            assert!(close(*got, want), "{v:?}");
        }
        assert_eq!(thm1_max_r2(&b, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn thm1_constant_description() {
        let ch = build_example_single();
        let aux = AuxChoiceSingle::uniform_inputs(&ch);
        let b = eval_thm1(&assemble_single(&ch, &aux).unwrap()).unwrap();
        let v: Vec<f64> = b.values().collect();
        for (got, want) in v.iter().zip([0.5, 1.0, 1.5, 1.5]) {
            assert!(close(*got, want), "{v:?}");
        }
        assert!(close(thm1_max_r2(&b, 0.5).unwrap(), 1.0));
        assert!(close(thm1_max_r2(&b, 0.0).unwrap(), 1.0));
        assert!(matches!(thm1_max_r2(&b, 0.7), Err(RegionError::R1Infeasible { .. })));
    }

    #[test]
    fn thm1_independent_v_reduces_to_plain_sum() {
        let ch = build_example_single();
        let v = ConditionalPmf::from_fn(vec![Alphabet::new("V", 2)], vec![Alphabet::new("W", 4)], |_, t| {
            [0.3, 0.7][t[0]]
        })
        .unwrap();
        let aux = AuxChoiceSingle::uniform_inputs(&ch).with_v(v);
        let j = assemble_single(&ch, &aux).unwrap();
        let b = eval_thm1(&j).unwrap();
        let plain = j.mutual_information(&["X1", "X2"], &["Y"], &[]).unwrap();
        assert!(close(b.value("sum_state"), plain));
    }

    #[test]
    fn thm1_bundle_arithmetic() {
        let b = MiBundle::from_values(BoundKind::Thm1, &[1.0, 1.0, 2.0, 1.0]);
        assert_eq!(thm1_max_r2(&b, 1.0).unwrap(), 0.0);
        let b = MiBundle::from_values(BoundKind::Thm1, &[0.5, 1.0, 1.5, 1.5]);
        assert_eq!(thm1_max_r2(&b, 0.5).unwrap(), 1.0);
        assert_eq!(thm1_max_r2(&b, 0.0).unwrap(), 1.0);
        let wrong = MiBundle::from_values(BoundKind::Thm3, &[1.0, 1.0, 1.0]);
        assert!(matches!(thm1_max_r2(&wrong, 0.0), Err(RegionError::WrongBundle { .. })));
    }

    #[test]
    fn thm2_paper_choice() {
        let ch = build_example_single();
        let aux = AuxChoiceSingle::uniform_inputs(&ch).with_v2(selected_state());
        let b = eval_thm2(&assemble_single(&ch, &aux).unwrap()).unwrap();
        for (name, want) in [("rate_x1", 1.0), ("rate_x2", 1.0), ("rate_sum_u", 2.0), ("rate_sum", 2.0)] {
            assert!(close(b.value(name), want), "{name}: {}", b.value(name));
        }
        for (name, want) in [
            ("comp_v1", 0.0),
            ("comp_v2", 0.5),
            ("comp_v", 0.0),
            ("comp_v1_v2", 0.5),
            ("comp_v1_v", 0.0),
            ("comp_v2_v", 0.5),
            ("comp_all", 0.5),
        ] {
            assert!(close(b.value(name), want), "{name}: {}", b.value(name));
        }
    }

    #[test]
    fn thm2_constant_descriptions_need_no_compression() {
        let ch = build_example_single();
        let b = eval_thm2(&assemble_single(&ch, &AuxChoiceSingle::uniform_inputs(&ch)).unwrap()).unwrap();
        for name in &crate::regions::terms::THM2[4..] {
            assert!(b.value(name).abs() < 1e-12, "{name}");
        }
    }

    #[test]
    fn missing_variable() {
        let ch = build_example_single();
        let j = assemble_single(&ch, &AuxChoiceSingle::uniform_inputs(&ch)).unwrap();
        let small = j.marginalize(&["X1", "X2", "W", "Y"]).unwrap();
        assert_eq!(eval_thm1(&small).unwrap_err(), RegionError::MissingVariable("U".into()));
        assert!(matches!(eval_thm2(&small), Err(RegionError::MissingVariable(_))));
    }
}
