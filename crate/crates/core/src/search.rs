//! Randomized local search over auxiliary distributions, and the
//! upper-right convex hull of the rate pairs it finds.
//!
//! Every restart draws an auxiliary choice (alphabet sizes uniform up to
//! the caps, every slice Dirichlet(1)), climbs a weighted-sum objective by
//! slice-wise projected ascent, and then reads off the corner points of the
//! resulting region together with the best `R2` at each requested `R1`.
//! Restarts are independent and are merged in restart order, so the result
//! depends only on the configuration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channels::{DoubleStateChannel, SingleStateChannel};
use crate::prob::{Alphabet, ConditionalPmf, JointPmf, USER_TOL};
use crate::regions::{
    assemble_double, assemble_single, eval_li, eval_thm1, eval_thm2, eval_thm3, thm2_feasible, AuxChoice,
    AuxChoiceDouble, AuxChoiceSingle, BoundKind, MiBundle, RatePoint, RateRegion, RegionError,
};

/// Finite-difference step of the numerical gradient.
const GRADIENT_STEP: f64 = 1e-4;
/// A sweep that gains less than this ends the ascent.
const MIN_IMPROVEMENT: f64 = 1e-9;
const MAX_HALVINGS: usize = 30;
/// Points closer than this in both rates are merged by the hull.
const HULL_TOL: f64 = 1e-9;

/// Weight vectors cycled across restarts.
pub const WEIGHT_SPREAD: [(f64, f64); 5] = [(1.0, 0.0), (3.0, 1.0), (1.0, 1.0), (1.0, 3.0), (0.0, 1.0)];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error("bound {bound} needs a {needed}-state channel")]
    KindMismatch { bound: BoundKind, needed: &'static str },
    #[error("convex hull of an empty point set")]
    EmptyInput,
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, SearchError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Maximum alphabet sizes of `U`, `V`, `V1`, `V2`.
    pub caps: [usize; 4],
    pub restarts: usize,
    pub refine_iters: usize,
    pub seed: u64,
    pub r1_grid: Vec<f64>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            caps: [4, 4, 3, 3],
            restarts: 200,
            refine_iters: 500,
            seed: 0,
            r1_grid: (0..=10).map(|i| i as f64 / 10.0).collect(),
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.caps.contains(&0) {
            return Err(SearchError::InvalidConfig("caps must be at least 1".into()));
        }
        if self.restarts == 0 {
            return Err(SearchError::InvalidConfig("restarts must be at least 1".into()));
        }
        if self.r1_grid.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(SearchError::InvalidConfig("r1 grid must be finite and nonnegative".into()));
        }
        Ok(())
    }
}

/// A channel of either kind, borrowed for a search.
#[derive(Debug, Clone, Copy)]
pub enum ChannelRef<'a> {
    Single(&'a SingleStateChannel),
    Double(&'a DoubleStateChannel),
}

impl<'a> From<&'a SingleStateChannel> for ChannelRef<'a> {
    fn from(c: &'a SingleStateChannel) -> Self {
        ChannelRef::Single(c)
    }
}

impl<'a> From<&'a DoubleStateChannel> for ChannelRef<'a> {
    fn from(c: &'a DoubleStateChannel) -> Self {
        ChannelRef::Double(c)
    }
}

fn check_kind(ch: ChannelRef<'_>, kind: BoundKind) -> Result<()> {
    match (ch, kind.is_single_state()) {
        (ChannelRef::Single(_), true) | (ChannelRef::Double(_), false) => Ok(()),
        (_, true) => Err(SearchError::KindMismatch { bound: kind, needed: "single" }),
        (_, false) => Err(SearchError::KindMismatch { bound: kind, needed: "double" }),
    }
}

/// Evaluates the bundle of `kind` for one auxiliary choice.
pub fn evaluate(ch: ChannelRef<'_>, kind: BoundKind, aux: &AuxChoice) -> Result<MiBundle> {
    check_kind(ch, kind)?;
    let bundle = match (ch, aux) {
        (ChannelRef::Single(c), AuxChoice::Single(a)) => {
            let j = assemble_single(c, a)?;
            if kind == BoundKind::Thm1 {
                eval_thm1(&j)?
            } else {
                eval_thm2(&j)?
            }
        }
        (ChannelRef::Double(c), AuxChoice::Double(a)) => {
            let j = assemble_double(c, a)?;
            if kind == BoundKind::Thm3 {
                eval_thm3(&j)?
            } else {
                eval_li(&j)?
            }
        }
        _ => {
            return Err(RegionError::FormViolation("auxiliary family does not match the channel".into()).into())
        }
    };
    Ok(bundle)
}

/// The rate region one auxiliary choice contributes.
pub fn region_of(ch: ChannelRef<'_>, kind: BoundKind, aux: &AuxChoice) -> Result<RateRegion> {
    Ok(evaluate(ch, kind, aux)?.region()?)
}

fn dirichlet_slice(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

fn random_conditional(rng: &mut impl Rng, target: Alphabet, givens: Vec<Alphabet>) -> ConditionalPmf {
    let n = target.size;
    let slices: usize = givens.iter().map(|g| g.size).product();
    let probs = (0..slices).flat_map(|_| dirichlet_slice(rng, n)).collect();
    ConditionalPmf::new(vec![target], givens, probs).expect("dirichlet slices are normalized")
}

fn random_marginal(rng: &mut impl Rng, var: Alphabet) -> JointPmf {
    let n = var.size;
    JointPmf::single(var, dirichlet_slice(rng, n)).expect("dirichlet draw is normalized")
}

fn random_size(rng: &mut impl Rng, cap: usize) -> usize {
    rng.gen_range(1..=cap)
}

/// Draws single-state auxiliaries. `V1`/`V2` are only drawn when
/// `private_descriptions` is set.
pub fn sample_aux_single(
    rng: &mut impl Rng,
    ch: &SingleStateChannel,
    caps: [usize; 4],
    private_descriptions: bool,
) -> AuxChoiceSingle {
    let u = Alphabet::new("U", random_size(rng, caps[0]));
    let v = Alphabet::new("V", random_size(rng, caps[1]));
    let mut aux = AuxChoiceSingle {
        u: random_marginal(rng, u.clone()),
        x1_given_u: random_conditional(rng, ch.x1().clone(), vec![u.clone()]),
        x2_given_u: random_conditional(rng, ch.x2().clone(), vec![u]),
        v_given_w: random_conditional(rng, v, vec![ch.state().clone()]),
        v1_given_w_x1: None,
        v2_given_w_x2: None,
    };
    if private_descriptions {
        let v1 = Alphabet::new("V1", random_size(rng, caps[2]));
        let v2 = Alphabet::new("V2", random_size(rng, caps[3]));
        aux.v1_given_w_x1 = Some(random_conditional(rng, v1, vec![ch.state().clone(), ch.x1().clone()]));
        aux.v2_given_w_x2 = Some(random_conditional(rng, v2, vec![ch.state().clone(), ch.x2().clone()]));
    }
    aux
}

/// Draws double-state auxiliaries using the `V1`, `V2` caps.
pub fn sample_aux_double(
    rng: &mut impl Rng,
    ch: &DoubleStateChannel,
    caps: [usize; 4],
    li_form: bool,
) -> AuxChoiceDouble {
    let v1 = Alphabet::new("V1", random_size(rng, caps[2]));
    let v2 = Alphabet::new("V2", random_size(rng, caps[3]));
    let (g1, g2) = if li_form {
        (vec![ch.s1().clone(), ch.x1().clone()], vec![ch.s2().clone(), ch.x2().clone()])
    } else {
        (vec![ch.s1().clone()], vec![ch.s2().clone()])
    };
    AuxChoiceDouble {
        x1: random_marginal(rng, ch.x1().clone()),
        x2: random_marginal(rng, ch.x2().clone()),
        v1: random_conditional(rng, v1, g1),
        v2: random_conditional(rng, v2, g2),
        li_form,
    }
}

/// Draws an auxiliary choice suited to `kind`.
pub fn sample_aux(rng: &mut impl Rng, ch: ChannelRef<'_>, kind: BoundKind, caps: [usize; 4]) -> Result<AuxChoice> {
    check_kind(ch, kind)?;
    Ok(match ch {
        ChannelRef::Single(c) => AuxChoice::Single(sample_aux_single(rng, c, caps, kind == BoundKind::Thm2)),
        ChannelRef::Double(c) => AuxChoice::Double(sample_aux_double(rng, c, caps, kind == BoundKind::Li)),
    })
}

/// Euclidean projection onto the probability simplex.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &s) in sorted.iter().enumerate() {
        cumsum += s;
        let t = (cumsum - 1.0) / (i + 1) as f64;
        if s - t > 0.0 {
            theta = t;
        }
    }
    let mut out: Vec<f64> = v.iter().map(|x| (x - theta).max(0.0)).collect();
    let s: f64 = out.iter().sum();
    out.iter_mut().for_each(|x| *x /= s);
    out
}

/// Outcome of [`local_improve`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Improvement {
    pub aux: AuxChoice,
    pub objective: f64,
    /// Objective after each sweep, starting with the initial value.
    pub trace: Vec<f64>,
}

/// `max λ·R` over the region of `aux`; evaluation failures score `-∞`.
pub fn weighted_objective(ch: ChannelRef<'_>, kind: BoundKind, aux: &AuxChoice, weights: (f64, f64)) -> f64 {
    match region_of(ch, kind, aux) {
        Ok(r) => r.support(weights),
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Slice-wise projected ascent on the weighted-sum objective.
///
/// For each slice of each auxiliary factor in turn: a forward-difference
/// gradient (step `1e-4`, perturbations renormalized), then a projected step
/// that is halved until the objective strictly increases. Step sizes are
/// remembered per slice and doubled after a success. The objective never
/// decreases; the ascent stops after `iters` sweeps or once a sweep gains
/// less than `1e-9`.
pub fn local_improve(
    ch: ChannelRef<'_>,
    kind: BoundKind,
    aux: AuxChoice,
    weights: (f64, f64),
    iters: usize,
) -> Result<Improvement> {
    check_kind(ch, kind)?;
    if !(weights.0 >= 0.0 && weights.1 >= 0.0) || weights.0 + weights.1 <= 0.0 {
        return Err(SearchError::InvalidConfig("weights must be nonnegative and not both zero".into()));
    }
    let mut aux = aux;
    let mut f = weighted_objective(ch, kind, &aux, weights);
    let mut trace = vec![f];
    let layout: Vec<(usize, usize)> = aux.tunables().iter().map(|(p, n)| (p.len(), *n)).collect();
    let mut steps: Vec<Vec<f64>> = layout.iter().map(|(len, n)| vec![0.25; len / n]).collect();
    let eval = |aux: &AuxChoice| weighted_objective(ch, kind, aux, weights);

    for _ in 0..iters {
        let start = f;
        for (k, &(len, n)) in layout.iter().enumerate() {
            if n < 2 {
                continue;
            }
            for s in 0..len / n {
                let range = s * n..(s + 1) * n;
                let base: Vec<f64> = aux.tunable_mut(k)[range.clone()].to_vec();
                let mut grad = vec![0.0; n];
                for i in 0..n {
                    let mut probe = base.clone();
                    probe[i] += GRADIENT_STEP;
                    let z = 1.0 + GRADIENT_STEP;
                    probe.iter_mut().for_each(|x| *x /= z);
                    aux.tunable_mut(k)[range.clone()].copy_from_slice(&probe);
                    let fp = eval(&aux);
                    grad[i] = if fp.is_finite() { (fp - f) / GRADIENT_STEP } else { 0.0 };
                }
                aux.tunable_mut(k)[range.clone()].copy_from_slice(&base);
                if grad.iter().all(|g| g.abs() < 1e-12) {
                    continue;
                }
                let mut eta = steps[k][s];
                let mut accepted = false;
                for _ in 0..MAX_HALVINGS {
                    let moved: Vec<f64> = base.iter().zip(&grad).map(|(b, g)| b + eta * g).collect();
                    let cand = project_to_simplex(&moved);
                    aux.tunable_mut(k)[range.clone()].copy_from_slice(&cand);
                    let fc = eval(&aux);
                    if fc > f {
                        f = fc;
                        accepted = true;
                        break;
                    }
                    eta *= 0.5;
                }
                if accepted {
                    steps[k][s] = (eta * 2.0).min(4.0);
                } else {
                    aux.tunable_mut(k)[range.clone()].copy_from_slice(&base);
                    steps[k][s] = (steps[k][s] * 0.5).max(1e-6);
                }
            }
        }
        trace.push(f);
        if f - start < MIN_IMPROVEMENT {
            break;
        }
    }
    Ok(Improvement { aux, objective: f, trace })
}

/// A rate pair and the restart that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplePoint {
    pub r1: f64,
    pub r2: f64,
    /// Index into [`RegionSample::candidates`].
    pub candidate: usize,
    pub source_seed: u64,
}

impl SamplePoint {
    pub fn point(&self) -> RatePoint {
        RatePoint::new(self.r1, self.r2)
    }
}

/// Where a candidate's auxiliary choice came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateOrigin {
    /// Drawn and refined for the bound itself.
    Native,
    /// Refined for the common-message bound and re-evaluated with constant
    /// private descriptions, which reproduces that bound's region.
    Embedded,
}

/// One refined auxiliary choice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub seed: u64,
    pub origin: CandidateOrigin,
    pub weights: (f64, f64),
    pub objective: f64,
    pub aux: AuxChoice,
}

/// Rate pairs found by a search and their upper-right hull.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionSample {
    pub bound_kind: BoundKind,
    pub config: SearchConfig,
    pub candidates: Vec<Candidate>,
    pub points: Vec<SamplePoint>,
    pub hull: Vec<RatePoint>,
}

impl RegionSample {
    /// Largest `R2` among points with `R1 ≥ r1_min`, if any.
    pub fn best_r2_with_r1_at_least(&self, r1_min: f64) -> Option<f64> {
        self.points
            .iter()
            .filter(|p| p.r1 >= r1_min)
            .map(|p| p.r2)
            .fold(None, |acc, r| Some(acc.map_or(r, |a: f64| a.max(r))))
    }

    /// Whether the hull's downward closure contains `p` within `tol`.
    pub fn hull_dominates(&self, p: RatePoint, tol: f64) -> bool {
        hull_dominates(&self.hull, p, tol)
    }

    /// Re-evaluates every point from its stored auxiliary choice. For the
    /// private-description bound the slack rates are re-solved by vertex
    /// enumeration rather than by the projection used during the search.
    pub fn revalidate(&self, ch: ChannelRef<'_>) -> Result<bool> {
        for p in &self.points {
            let cand = &self.candidates[p.candidate];
            let bundle = evaluate(ch, self.bound_kind, &cand.aux)?;
            let ok = if self.bound_kind == BoundKind::Thm2 {
                thm2_feasible(&bundle, p.point())?.is_feasible()
            } else {
                bundle.region()?.contains(p.point(), USER_TOL)
            };
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of restart `index` under the master seed.
pub fn restart_seed(master: u64, index: usize) -> u64 {
    splitmix64(master ^ splitmix64(index as u64))
}

struct Refined {
    candidate: Candidate,
    region: RateRegion,
}

fn refine_restart(ch: ChannelRef<'_>, kind: BoundKind, cfg: &SearchConfig, index: usize) -> Result<Refined> {
    let seed = restart_seed(cfg.seed, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = WEIGHT_SPREAD[index % WEIGHT_SPREAD.len()];
    let aux = sample_aux(&mut rng, ch, kind, cfg.caps)?;
    let imp = local_improve(ch, kind, aux, weights, cfg.refine_iters)?;
    let region = region_of(ch, kind, &imp.aux).unwrap_or_else(|_| RateRegion::empty());
    Ok(Refined {
        candidate: Candidate {
            seed,
            origin: CandidateOrigin::Native,
            weights,
            objective: imp.objective,
            aux: imp.aux,
        },
        region,
    })
}

/// Traces the boundary of the inner bound `kind` on `ch`.
///
/// The private-description bound also re-evaluates every refined
/// common-message candidate (same seeds), so its hull dominates the
/// common-message hull of the same configuration.
pub fn trace_boundary(ch: ChannelRef<'_>, kind: BoundKind, cfg: &SearchConfig) -> Result<RegionSample> {
    check_kind(ch, kind)?;
    cfg.validate()?;
    let native: Vec<Refined> = (0..cfg.restarts)
        .into_par_iter()
        .map(|i| refine_restart(ch, kind, cfg, i))
        .collect::<Result<_>>()?;
    let mut refined = native;
    if kind == BoundKind::Thm2 {
        let embedded: Vec<Refined> = (0..cfg.restarts)
            .into_par_iter()
            .map(|i| {
                let mut r = refine_restart(ch, BoundKind::Thm1, cfg, i)?;
                r.candidate.origin = CandidateOrigin::Embedded;
                r.region = region_of(ch, BoundKind::Thm2, &r.candidate.aux).unwrap_or_else(|_| RateRegion::empty());
                Ok(r)
            })
            .collect::<Result<_>>()?;
        refined.extend(embedded);
    }

    let mut candidates = Vec::with_capacity(refined.len());
    let mut points = Vec::new();
    for (ci, r) in refined.into_iter().enumerate() {
        let seed = r.candidate.seed;
        let mut add = |p: RatePoint| {
            points.push(SamplePoint {
                r1: p.r1,
                r2: p.r2,
                candidate: ci,
                source_seed: seed,
            })
        };
        for c in r.region.corners() {
            add(c);
        }
        for &r1 in &cfg.r1_grid {
            if let Some(r2) = r.region.max_r2_at(r1) {
                add(RatePoint::new(r1, r2));
            }
        }
        candidates.push(r.candidate);
    }
    let mut all: Vec<RatePoint> = points.iter().map(SamplePoint::point).collect();
    all.push(RatePoint::ORIGIN);
    let hull = convex_hull(&all)?;
    Ok(RegionSample {
        bound_kind: kind,
        config: cfg.clone(),
        candidates,
        points,
        hull,
    })
}

fn cross(o: RatePoint, a: RatePoint, b: RatePoint) -> f64 {
    (a.r1 - o.r1) * (b.r2 - o.r2) - (a.r2 - o.r2) * (b.r1 - o.r1)
}

/// Upper-right convex hull: the vertices of the convex hull of the points'
/// downward closure that are not dominated, sorted by increasing `R1`.
pub fn convex_hull(points: &[RatePoint]) -> Result<Vec<RatePoint>> {
    if points.is_empty() {
        return Err(SearchError::EmptyInput);
    }
    let mut sorted: Vec<RatePoint> = points.iter().map(|p| RatePoint::new(p.r1.max(0.0), p.r2.max(0.0))).collect();
    sorted.sort_by(|a, b| b.r1.total_cmp(&a.r1).then(b.r2.total_cmp(&a.r2)));
    // points within HULL_TOL of each other in both coordinates count as one
    let mut pareto: Vec<RatePoint> = Vec::new();
    let mut best = f64::NEG_INFINITY;
    for p in sorted {
        if p.r2 > best + HULL_TOL {
            match pareto.last_mut() {
                Some(q) if q.r1 - p.r1 <= HULL_TOL => *q = p,
                _ => pareto.push(p),
            }
        }
        best = best.max(p.r2);
    }
    pareto.reverse();
    let mut hull: Vec<RatePoint> = Vec::with_capacity(pareto.len());
    for p in pareto {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) >= -HULL_TOL {
            hull.pop();
        }
        hull.push(p);
    }
    Ok(hull)
}

/// Whether `p` lies in the downward closure of the hull, within `tol`.
pub fn hull_dominates(hull: &[RatePoint], p: RatePoint, tol: f64) -> bool {
    let Some(first) = hull.first() else {
        return false;
    };
    if p.r1 <= first.r1 + tol {
        return p.r2 <= first.r2 + tol;
    }
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        if p.r1 <= b.r1 + tol {
            let t = ((p.r1 - a.r1) / (b.r1 - a.r1)).clamp(0.0, 1.0);
            return p.r2 <= a.r2 + t * (b.r2 - a.r2) + tol;
        }
    }
    false
}
