//! The fixed example checks behind `verify-examples`.

use macsi_core::channels::{build_example_double, build_example_single, SingleStateChannel};
use macsi_core::prob::{Alphabet, ConditionalPmf};
use macsi_core::regions::{
    assemble_double, assemble_single, copy_of, eval_li, eval_thm1, eval_thm2, full_coop_sum_capacity,
    selected_component, thm1_max_r2, thm2_feasible, AuxChoiceDouble, AuxChoiceSingle, BoundKind, RatePoint,
    RegionError,
};
use macsi_core::search::{trace_boundary, SearchConfig};
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct Item {
    pub id: &'static str,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub items: Vec<Item>,
    pub passed: usize,
    pub all_pass: bool,
}

/// The example law with `Y1` no longer depending on `X1`.
fn corrupted_example() -> SingleStateChannel {
    let good = build_example_single();
    let law = ConditionalPmf::deterministic(
        Alphabet::new("Y", 4),
        vec![Alphabet::new("W", 4), Alphabet::new("X1", 2), Alphabet::new("X2", 2)],
        |g| {
            let w_sel = if g[2] == 0 { g[0] >> 1 } else { g[0] & 1 };
            2 * w_sel + g[2]
        },
    )
    .expect("deterministic law");
    SingleStateChannel::new(good.state_pmf().clone(), law).expect("consistent channel")
}

fn item(id: &'static str, name: &'static str, outcome: Result<(bool, String), String>) -> Item {
    let (pass, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    Item { id, name, pass, detail }
}

fn check_a(ch: &SingleStateChannel) -> Result<(bool, String), String> {
    let aux = AuxChoiceSingle::uniform_inputs(ch).with_v2(selected_component("V2", ch.state(), ch.x2()));
    let j = assemble_single(ch, &aux).map_err(|e| e.to_string())?;
    let b = eval_thm2(&j).map_err(|e| e.to_string())?;
    let out = thm2_feasible(&b, RatePoint::new(1.0, 0.5)).map_err(|e| e.to_string())?;
    Ok(match out.certificate() {
        Some(c) => (true, format!("witness ({:.6}, {:.6}, {:.6})", c.r0, c.r0_1, c.r0_2)),
        None => (false, "no slack rates satisfy the system".into()),
    })
}

fn check_b(ch: &SingleStateChannel) -> Result<(bool, String), String> {
    let mut parts = Vec::new();
    let mut pass = true;
    for (label, aux) in [
        ("V=W", AuxChoiceSingle::uniform_inputs(ch).with_v(copy_of("V", ch.state()))),
        ("V constant", AuxChoiceSingle::uniform_inputs(ch)),
    ] {
        let j = assemble_single(ch, &aux).map_err(|e| e.to_string())?;
        let b = eval_thm1(&j).map_err(|e| e.to_string())?;
        match thm1_max_r2(&b, 1.0) {
            Ok(r2) => {
                pass &= r2 == 0.0;
                parts.push(format!("{label}: max R2 = {r2}"));
            }
            // no rate pair with R1 = 1 at all
            Err(RegionError::R1Infeasible { max, .. }) => {
                parts.push(format!("{label}: R1 = 1 unreachable (max R1 = {max:.6})"));
            }
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok((pass, parts.join("; ")))
}

fn check_c(ch: &SingleStateChannel) -> Result<(bool, String), String> {
    let c = full_coop_sum_capacity(ch).bits;
    Ok(((c - 1.5).abs() <= 1e-6, format!("sum capacity {c:.9}")))
}

fn check_d() -> Result<(bool, String), String> {
    let ch = build_example_double();
    let aux = AuxChoiceDouble::uniform_inputs(&ch, true).with_v2(selected_component("V2", ch.s2(), ch.x2()));
    let j = assemble_double(&ch, &aux).map_err(|e| e.to_string())?;
    let b = eval_li(&j).map_err(|e| e.to_string())?;
    let region = b.region().map_err(|e| e.to_string())?;
    let terms: Vec<String> = b.iter().map(|(n, v)| format!("{n}={v:.6}")).collect();
    Ok((region.contains(RatePoint::new(1.0, 0.5), 1e-9), terms.join(" ")))
}

fn check_e(seed: u64) -> Result<(bool, String), String> {
    let ch = build_example_double();
    let cfg = SearchConfig {
        caps: [1, 1, 3, 3],
        restarts: 200,
        seed,
        ..SearchConfig::default()
    };
    let s = trace_boundary((&ch).into(), BoundKind::Thm3, &cfg).map_err(|e| e.to_string())?;
    let best = s.best_r2_with_r1_at_least(0.999);
    Ok(match best {
        Some(r2) => (r2 <= 0.02, format!("best R2 at R1 >= 0.999 is {r2:.6}")),
        None => (true, "no point with R1 >= 0.999".into()),
    })
}

pub fn run(seed: u64, corrupt_law: bool) -> Report {
    let single = if corrupt_law { corrupted_example() } else { build_example_single() };
    let items = vec![
        item("a", "private-description bound contains (1, 0.5)", check_a(&single)),
        item("b", "common-message bound has no R2 > 0 at R1 = 1", check_b(&single)),
        item("c", "full-cooperation sum capacity is 1.5", check_c(&single)),
        item("d", "input-dependent double-state bound contains (1, 0.5)", check_d()),
        item("e", "state-only double-state search stays below R2 = 0.02 at R1 >= 0.999", check_e(seed)),
    ];
    let passed = items.iter().filter(|i| i.pass).count();
    Report {
        all_pass: passed == items.len(),
        passed,
        items,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corrupted_law_breaks_capacity() {
        let (pass, _) = check_c(&corrupted_example()).unwrap();
        assert!(!pass);
    }

    #[test]
    fn fast_items_pass() {
        let ch = build_example_single();
        assert!(check_a(&ch).unwrap().0);
        assert!(check_b(&ch).unwrap().0);
        assert!(check_c(&ch).unwrap().0);
        assert!(check_d().unwrap().0);
    }
}
