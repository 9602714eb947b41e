//! Rate-region evaluators.
//!
//! Each evaluator takes a joint PMF built from a channel and an auxiliary
//! choice and returns the right-hand sides of one inequality system as a
//! [`MiBundle`]. A bundle is then turned into a two-dimensional
//! [`RateRegion`] (for the Theorem-2 family, after eliminating the slack
//! rates) for feasibility queries and boundary tracing. Convexification
//! across distributions happens in [`crate::search`].

mod aux;
mod capacity;
mod double;
mod single;
mod slack;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prob::{ProbError, INTERNAL_TOL};

pub use aux::{assemble_double, assemble_single, copy_of, selected_component, AuxChoice, AuxChoiceDouble, AuxChoiceSingle};
pub use capacity::{channel_capacity, full_coop_sum_capacity, informed_receiver_capacity, Capacity};
pub use double::{eval_li, eval_thm3};
pub use single::{eval_thm1, eval_thm2, thm1_max_r2};
pub use slack::{thm2_feasible, thm2_max_r2, thm2_region, FeasibilityCertificate, Thm2Outcome};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegionError {
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error("joint distribution lacks variable `{0}`")]
    MissingVariable(String),
    #[error("R1 = {r1} exceeds the largest feasible R1 ({max})")]
    R1Infeasible { r1: f64, max: f64 },
    #[error("bundle term `{0}` is not a number")]
    DegenerateBundle(String),
    #[error("bundle of kind {found} passed where {expected} is required")]
    WrongBundle { expected: BoundKind, found: BoundKind },
    #[error("auxiliary choice violates its factorization: {0}")]
    FormViolation(String),
}

pub type Result<T> = std::result::Result<T, RegionError>;

/// Which inner bound a bundle or search refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    /// Single-state bound with a common message and a state description.
    Thm1,
    /// Single-state bound where each user also describes its own input.
    Thm2,
    /// Double-state bound with state-only descriptions.
    Thm3,
    /// Double-state bound with input-dependent descriptions.
    Li,
}

impl BoundKind {
    pub fn is_single_state(self) -> bool {
        matches!(self, BoundKind::Thm1 | BoundKind::Thm2)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BoundKind::Thm1 => "thm1",
            BoundKind::Thm2 => "thm2",
            BoundKind::Thm3 => "thm3",
            BoundKind::Li => "li",
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "thm1" => Ok(BoundKind::Thm1),
            "thm2" => Ok(BoundKind::Thm2),
            "thm3" => Ok(BoundKind::Thm3),
            "li" => Ok(BoundKind::Li),
            other => Err(format!("unknown bound `{other}` (expected thm1, thm2, thm3 or li)")),
        }
    }
}

/// Term identifiers, per bound kind, in evaluation order.
pub mod terms {
    /// `I(X1;Y|X2,U,V)`, `I(X2;Y|X1,U,V)`, `I(X1,X2;Y|U,V)`, `I(X1,X2,V;Y) − I(V;W)`.
    pub const THM1: [&str; 4] = ["r1", "r2", "sum", "sum_state"];
    /// Four rate-side terms followed by seven compression lower bounds.
    pub const THM2: [&str; 11] = [
        "rate_x1",
        "rate_x2",
        "rate_sum_u",
        "rate_sum",
        "comp_v1",
        "comp_v2",
        "comp_v",
        "comp_v1_v2",
        "comp_v1_v",
        "comp_v2_v",
        "comp_all",
    ];
    /// Three signed differences for the double-state bounds.
    pub const DOUBLE: [&str; 3] = ["r1", "r2", "sum"];
}

/// Named information values entering one region's inequality system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MiBundle {
    kind: BoundKind,
    values: Vec<(&'static str, f64)>,
}

impl MiBundle {
    pub fn new(kind: BoundKind, values: Vec<(&'static str, f64)>) -> Self {
        Self { kind, values }
    }

    /// Builds a bundle from values listed in the canonical term order.
    pub fn from_values(kind: BoundKind, values: &[f64]) -> Self {
        let names: &[&'static str] = match kind {
            BoundKind::Thm1 => &terms::THM1,
            BoundKind::Thm2 => &terms::THM2,
            BoundKind::Thm3 | BoundKind::Li => &terms::DOUBLE,
        };
        assert_eq!(names.len(), values.len(), "wrong number of terms for {kind}");
        Self::new(kind, names.iter().copied().zip(values.iter().copied()).collect())
    }

    pub fn kind(&self) -> BoundKind {
        self.kind
    }

    pub fn get(&self, term: &str) -> Option<f64> {
        self.values.iter().find(|(n, _)| *n == term).map(|&(_, v)| v)
    }

    /// Value of a term known to exist.
    pub fn value(&self, term: &str) -> f64 {
        self.get(term)
            .unwrap_or_else(|| panic!("bundle of kind {} has no term `{term}`", self.kind))
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().map(|&(_, v)| v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        self.values.iter().copied()
    }

    fn expect_kind(&self, kind: BoundKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(RegionError::WrongBundle {
                expected: kind,
                found: self.kind,
            })
        }
    }

    /// The rate region described by this bundle, with slack rates eliminated.
    pub fn region(&self) -> Result<RateRegion> {
        match self.kind {
            BoundKind::Thm2 => thm2_region(self),
            _ => {
                let (r1, r2, sums) = match self.kind {
                    BoundKind::Thm1 => (
                        self.value("r1"),
                        self.value("r2"),
                        vec![self.value("sum"), self.value("sum_state")],
                    ),
                    _ => (self.value("r1"), self.value("r2"), vec![self.value("sum")]),
                };
                let mut constraints = vec![HalfPlane::new(1.0, 0.0, r1), HalfPlane::new(0.0, 1.0, r2)];
                constraints.extend(sums.into_iter().map(|s| HalfPlane::new(1.0, 1.0, s)));
                Ok(RateRegion::new(constraints))
            }
        }
    }
}

/// A rate pair in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub r1: f64,
    pub r2: f64,
}

impl RatePoint {
    pub const ORIGIN: RatePoint = RatePoint { r1: 0.0, r2: 0.0 };

    pub fn new(r1: f64, r2: f64) -> Self {
        Self { r1, r2 }
    }

    /// Componentwise `self ≤ other + tol`.
    pub fn dominated_by(&self, other: &RatePoint, tol: f64) -> bool {
        self.r1 <= other.r1 + tol && self.r2 <= other.r2 + tol
    }
}

/// `a·R1 + b·R2 ≤ c` with `a, b ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HalfPlane {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl HalfPlane {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        debug_assert!(a >= 0.0 && b >= 0.0);
        Self { a, b, c }
    }

    fn slack(&self, p: RatePoint) -> f64 {
        self.c - self.a * p.r1 - self.b * p.r2
    }
}

/// A downward-closed convex polygon in the nonnegative quadrant.
///
/// A region whose constraints exclude the origin is empty: the distribution
/// that produced it contributes no rate pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRegion {
    constraints: Vec<HalfPlane>,
}

impl RateRegion {
    pub fn new(constraints: Vec<HalfPlane>) -> Self {
        Self { constraints }
    }

    /// The region containing only the origin.
    pub fn origin_only() -> Self {
        Self::new(vec![HalfPlane::new(1.0, 0.0, 0.0), HalfPlane::new(0.0, 1.0, 0.0)])
    }

    /// The empty region.
    pub fn empty() -> Self {
        Self::new(vec![HalfPlane::new(0.0, 0.0, -1.0)])
    }

    pub fn constraints(&self) -> &[HalfPlane] {
        &self.constraints
    }

    pub fn is_empty(&self) -> bool {
        !self.contains(RatePoint::ORIGIN, INTERNAL_TOL)
    }

    pub fn contains(&self, p: RatePoint, tol: f64) -> bool {
        p.r1 >= -tol && p.r2 >= -tol && self.constraints.iter().all(|h| h.slack(p) >= -tol)
    }

    /// Largest R1 in the region, `None` when empty.
    pub fn max_r1(&self) -> Option<f64> {
        if self.is_empty() {
            return None;
        }
        let m = self
            .constraints
            .iter()
            .filter(|h| h.a > 0.0)
            .map(|h| h.c / h.a)
            .fold(f64::INFINITY, f64::min);
        Some(m.max(0.0))
    }

    /// Largest R2 with `(r1, R2)` in the region, `None` when `r1` is infeasible.
    pub fn max_r2_at(&self, r1: f64) -> Option<f64> {
        if r1 < -INTERNAL_TOL || !self.contains(RatePoint::new(r1, 0.0), INTERNAL_TOL) {
            return None;
        }
        let m = self
            .constraints
            .iter()
            .filter(|h| h.b > 0.0)
            .map(|h| (h.c - h.a * r1) / h.b)
            .fold(f64::INFINITY, f64::min);
        Some(m.max(0.0))
    }

    /// Pareto-maximal corner points, sorted by increasing R1. Empty regions
    /// have no corners; bounded nonempty ones have at least one.
    pub fn corners(&self) -> Vec<RatePoint> {
        if self.is_empty() {
            return Vec::new();
        }
        let mut lines: Vec<HalfPlane> = self.constraints.clone();
        lines.push(HalfPlane::new(1.0, 0.0, 0.0));
        lines.push(HalfPlane::new(0.0, 1.0, 0.0));
        let mut candidates = Vec::new();
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                let (h, g) = (lines[i], lines[j]);
                let det = h.a * g.b - h.b * g.a;
                if det.abs() < 1e-12 {
                    continue;
                }
                let r1 = (h.c * g.b - h.b * g.c) / det;
                let r2 = (h.a * g.c - h.c * g.a) / det;
                let p = RatePoint::new(r1.max(0.0), r2.max(0.0));
                if self.contains(p, 1e-10) {
                    candidates.push(p);
                }
            }
        }
        if candidates.is_empty() {
            candidates.push(RatePoint::ORIGIN);
        }
        crate::search::convex_hull(&candidates).unwrap_or_default()
    }

    /// `max λ·R` over the region; zero when the region is empty.
    pub fn support(&self, weights: (f64, f64)) -> f64 {
        self.corners()
            .iter()
            .map(|p| weights.0 * p.r1 + weights.1 * p.r2)
            .fold(0.0, f64::max)
    }
}
