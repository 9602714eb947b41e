//! Elimination of the slack rates `R0`, `R0^(1)`, `R0^(2)` from the
//! private-description bound.
//!
//! For a fixed rate pair the slack rates live in a polyhedron cut out by at
//! most fourteen half-spaces (four rate constraints, seven compression
//! constraints, three sign constraints). It is pointed, so it is nonempty
//! iff one of the intersection points of three bounding planes satisfies
//! every constraint. [`thm2_region`] computes the projection onto the
//! `(R1, R2)` plane by Fourier–Motzkin elimination instead; the two routes
//! are cross-checked in tests.

use serde::Serialize;

use super::{BoundKind, HalfPlane, MiBundle, RateRegion, RatePoint, RegionError, Result};
use crate::prob::USER_TOL;

/// Witness slack rates for a feasible rate pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeasibilityCertificate {
    pub r0: f64,
    pub r0_1: f64,
    pub r0_2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Thm2Outcome {
    Feasible(FeasibilityCertificate),
    Infeasible,
}

impl Thm2Outcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Thm2Outcome::Feasible(_))
    }

    pub fn certificate(&self) -> Option<FeasibilityCertificate> {
        match self {
            Thm2Outcome::Feasible(c) => Some(*c),
            Thm2Outcome::Infeasible => None,
        }
    }
}

/// One inequality `coef · (R1, R2, R0, R0^(1), R0^(2)) ≤ rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Row {
    coef: [f64; 5],
    rhs: f64,
}

const R1: usize = 0;
const R2: usize = 1;
const Z0: usize = 2;
const Z1: usize = 3;
const Z2: usize = 4;

fn row(entries: &[(usize, f64)], rhs: f64) -> Row {
    let mut coef = [0.0; 5];
    for &(i, v) in entries {
        coef[i] = v;
    }
    Row { coef, rhs }
}

fn checked_values(b: &MiBundle) -> Result<[f64; 11]> {
    b.expect_kind(BoundKind::Thm2)?;
    let mut out = [0.0; 11];
    for (slot, (name, v)) in out.iter_mut().zip(b.iter()) {
        if v.is_nan() {
            return Err(RegionError::DegenerateBundle(name.to_string()));
        }
        *slot = v;
    }
    Ok(out)
}

/// The full system, in the fixed constraint order used for tie-breaking.
fn system(v: &[f64; 11]) -> [Row; 14] {
    [
        row(&[(R1, 1.0), (Z1, 1.0)], v[0]),
        row(&[(R2, 1.0), (Z2, 1.0)], v[1]),
        row(&[(R1, 1.0), (R2, 1.0), (Z1, 1.0), (Z2, 1.0)], v[2]),
        row(&[(R1, 1.0), (R2, 1.0), (Z0, 1.0), (Z1, 1.0), (Z2, 1.0)], v[3]),
        row(&[(Z1, -1.0)], -v[4]),
        row(&[(Z2, -1.0)], -v[5]),
        row(&[(Z0, -1.0)], -v[6]),
        row(&[(Z1, -1.0), (Z2, -1.0)], -v[7]),
        row(&[(Z1, -1.0), (Z0, -1.0)], -v[8]),
        row(&[(Z2, -1.0), (Z0, -1.0)], -v[9]),
        row(&[(Z0, -1.0), (Z1, -1.0), (Z2, -1.0)], -v[10]),
        row(&[(Z0, -1.0)], 0.0),
        row(&[(Z1, -1.0)], 0.0),
        row(&[(Z2, -1.0)], 0.0),
    ]
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Decides whether slack rates exist for the rate pair `p`.
///
/// Candidate vertices are visited in lexicographic order of their constraint
/// index triples; the first one satisfying every constraint within `1e-9` is
/// returned.
pub fn thm2_feasible(b: &MiBundle, p: RatePoint) -> Result<Thm2Outcome> {
    let v = checked_values(b)?;
    let rows = system(&v);
    // restrict to the slack variables
    let slack: Vec<([f64; 3], f64)> = rows
        .iter()
        .map(|r| {
            (
                [r.coef[Z0], r.coef[Z1], r.coef[Z2]],
                r.rhs - r.coef[R1] * p.r1 - r.coef[R2] * p.r2,
            )
        })
        .collect();
    let satisfies = |z: [f64; 3]| {
        slack
            .iter()
            .all(|(g, h)| g[0] * z[0] + g[1] * z[1] + g[2] * z[2] <= h + USER_TOL)
    };
    let n = slack.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let m = [slack[i].0, slack[j].0, slack[k].0];
                let d = det3(&m);
                if d.abs() < 1e-12 {
                    continue;
                }
                let h = [slack[i].1, slack[j].1, slack[k].1];
                let mut z = [0.0; 3];
                for (col, zc) in z.iter_mut().enumerate() {
                    let mut mc = m;
                    for r in 0..3 {
                        mc[r][col] = h[r];
                    }
                    *zc = det3(&mc) / d;
                }
                if satisfies(z) {
                    return Ok(Thm2Outcome::Feasible(FeasibilityCertificate {
                        r0: z[0],
                        r0_1: z[1],
                        r0_2: z[2],
                    }));
                }
            }
        }
    }
    Ok(Thm2Outcome::Infeasible)
}

/// Supremum of feasible `R2` at `r1`, by bisection on [`thm2_feasible`],
/// accurate to well below `1e-6`.
pub fn thm2_max_r2(b: &MiBundle, r1: f64) -> Result<f64> {
    let v = checked_values(b)?;
    if r1 < 0.0 || !thm2_feasible(b, RatePoint::new(r1, 0.0))?.is_feasible() {
        let max = thm2_region(b)?.max_r1().unwrap_or(0.0);
        return Err(RegionError::R1Infeasible { r1, max });
    }
    let mut lo = 0.0;
    let mut hi = v[1].max(0.0);
    if thm2_feasible(b, RatePoint::new(r1, hi))?.is_feasible() {
        return Ok(hi);
    }
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if thm2_feasible(b, RatePoint::new(r1, mid))?.is_feasible() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

fn eliminate(rows: Vec<Row>, var: usize) -> Vec<Row> {
    let (mut pos, mut neg, mut out) = (Vec::new(), Vec::new(), Vec::new());
    for r in rows {
        if r.coef[var] > 0.0 {
            pos.push(r);
        } else if r.coef[var] < 0.0 {
            neg.push(r);
        } else {
            out.push(r);
        }
    }
    for p in &pos {
        for n in &neg {
            let (sp, sn) = (1.0 / p.coef[var], -1.0 / n.coef[var]);
            let mut coef = [0.0; 5];
            for (i, c) in coef.iter_mut().enumerate() {
                *c = sp * p.coef[i] + sn * n.coef[i];
            }
            coef[var] = 0.0;
            out.push(Row {
                coef,
                rhs: sp * p.rhs + sn * n.rhs,
            });
        }
    }
    out.dedup_by(|a, b| a == b);
    let mut unique: Vec<Row> = Vec::with_capacity(out.len());
    for r in out {
        if !unique.contains(&r) {
            unique.push(r);
        }
    }
    unique
}

/// Projection of the feasible set onto the `(R1, R2)` plane.
pub fn thm2_region(b: &MiBundle) -> Result<RateRegion> {
    let v = checked_values(b)?;
    let mut rows = system(&v).to_vec();
    for var in [Z0, Z1, Z2] {
        rows = eliminate(rows, var);
    }
    let mut constraints = Vec::new();
    for r in rows {
        let (a, bb) = (r.coef[R1], r.coef[R2]);
        // a consistent tolerance with the vertex route
        let c = if r.rhs < 0.0 && r.rhs >= -USER_TOL { 0.0 } else { r.rhs };
        if a == 0.0 && bb == 0.0 {
            if c < 0.0 {
                return Ok(RateRegion::empty());
            }
            continue;
        }
        constraints.push(HalfPlane::new(a, bb, c));
    }
    Ok(RateRegion::new(constraints))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Rate-side (1, 1, 2, 2); only the `V2` compression terms are active.
    fn paper_bundle() -> MiBundle {
        MiBundle::from_values(
            BoundKind::Thm2,
            &[1.0, 1.0, 2.0, 2.0, 0.0, 0.5, 0.0, 0.5, 0.0, 0.5, 0.5],
        )
    }

    fn constant_bundle() -> MiBundle {
        MiBundle::from_values(
            BoundKind::Thm2,
            &[0.5, 1.0, 1.5, 1.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        )
    }

    #[test]
    fn paper_point_witness() {
        let out = thm2_feasible(&paper_bundle(), RatePoint::new(1.0, 0.5)).unwrap();
        let c = out.certificate().expect("feasible");
        assert!(c.r0.abs() < 1e-9 && c.r0_1.abs() < 1e-9 && (c.r0_2 - 0.5).abs() < 1e-9, "{c:?}");
    }

    #[test]
    fn paper_point_is_the_edge() {
        let b = paper_bundle();
        assert!(!thm2_feasible(&b, RatePoint::new(1.0, 0.6)).unwrap().is_feasible());
        assert!(thm2_feasible(&b, RatePoint::ORIGIN).unwrap().is_feasible());
        let r2 = thm2_max_r2(&b, 1.0).unwrap();
        assert!((r2 - 0.5).abs() < 1e-6, "{r2}");
    }

    #[test]
    fn constant_bundle_matches_plain_arithmetic() {
        let r2 = thm2_max_r2(&constant_bundle(), 0.5).unwrap();
        assert!((r2 - 1.0).abs() < 1e-6);
        assert!(matches!(
            thm2_max_r2(&constant_bundle(), 0.8),
            Err(RegionError::R1Infeasible { .. })
        ));
    }

    #[test]
    fn projection_agrees_on_paper_bundle() {
        let region = thm2_region(&paper_bundle()).unwrap();
        assert!((region.max_r1().unwrap() - 1.0).abs() < 1e-12);
        assert!((region.max_r2_at(1.0).unwrap() - 0.5).abs() < 1e-12);
        assert!((region.max_r2_at(0.0).unwrap() - 0.5).abs() < 1e-12);
        let corners = region.corners();
        assert_eq!(corners.len(), 1);
        assert!((corners[0].r1 - 1.0).abs() < 1e-12 && (corners[0].r2 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn degenerate_and_wrong_bundles() {
        let mut vals = [0.0; 11];
        vals[2] = f64::NAN;
        let b = MiBundle::from_values(BoundKind::Thm2, &vals);
        assert_eq!(
            thm2_feasible(&b, RatePoint::ORIGIN).unwrap_err(),
            RegionError::DegenerateBundle("rate_sum_u".into())
        );
        let t1 = MiBundle::from_values(BoundKind::Thm1, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            thm2_feasible(&t1, RatePoint::ORIGIN),
            Err(RegionError::WrongBundle { .. })
        ));
    }

    #[test]
    fn origin_can_be_infeasible() {
        // compression demands more than the rate side can carry
        let b = MiBundle::from_values(
            BoundKind::Thm2,
            &[0.2, 0.2, 0.3, 0.3, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5],
        );
        assert!(!thm2_feasible(&b, RatePoint::ORIGIN).unwrap().is_feasible());
        assert!(thm2_region(&b).unwrap().is_empty());
    }
}
