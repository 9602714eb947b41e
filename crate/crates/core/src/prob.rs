//! Exact finite discrete probability.
//!
//! Distributions are dense row-major tensors over named finite alphabets
//! (the first variable varies slowest). Information quantities are in bits
//! with the convention `0 · log 0 = 0`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Internal numerical tolerance.
pub const INTERNAL_TOL: f64 = 1e-12;
/// Tolerance for user-facing equality and normalization checks.
pub const USER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProbError {
    #[error("variable `{0}` is not determined by any factor")]
    UndeterminedVariable(String),
    #[error("variable `{0}` is determined by more than one factor")]
    ConflictingFactor(String),
    #[error("alphabet of `{name}` has size {found}, expected {expected}")]
    AlphabetMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("factor dependency graph contains a cycle")]
    CyclicFactors,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` appears in more than one argument set")]
    OverlappingSets(String),
    #[error("variable `{0}` listed twice")]
    DuplicateVariable(String),
    #[error("the conditioned-on set must not be empty")]
    EmptySet,
    #[error("value {0} outside the admissible range")]
    OutOfRange(f64),
    #[error("probabilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("negative probability {0}")]
    NegativeProbability(f64),
    #[error("tensor has {found} entries, alphabets require {expected}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("information quantity evaluated to {0} bits (numerical inconsistency)")]
    InternalConsistency(f64),
}

pub type Result<T> = std::result::Result<T, ProbError>;

/// A named finite alphabet whose letters are `0..size`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    pub name: String,
    pub size: usize,
}

impl Alphabet {
    pub fn new(name: impl Into<String>, size: usize) -> Self {
        assert!(size >= 1, "alphabet size must be positive");
        Self {
            name: name.into(),
            size,
        }
    }
}

fn volume(vars: &[Alphabet]) -> usize {
    vars.iter().map(|a| a.size).product()
}

fn check_unique(vars: &[Alphabet]) -> Result<()> {
    for (i, a) in vars.iter().enumerate() {
        if vars[..i].iter().any(|b| b.name == a.name) {
            return Err(ProbError::DuplicateVariable(a.name.clone()));
        }
    }
    Ok(())
}

fn check_entries(probs: &[f64]) -> Result<()> {
    for &p in probs {
        if p.is_nan() || p < 0.0 {
            return Err(ProbError::NegativeProbability(p));
        }
    }
    Ok(())
}

/// Row-major strides for a list of alphabets.
fn strides(vars: &[Alphabet]) -> Vec<usize> {
    let mut s = vec![1; vars.len()];
    for i in (0..vars.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * vars[i + 1].size;
    }
    s
}

/// Walks every cell of a row-major tensor with dimensions `sizes`, keeping a
/// set of derived linear indices (one per stride map) in step.
///
/// `maps[k][d]` is the stride contributed by dimension `d` to derived index `k`.
fn odometer(sizes: &[usize], maps: &[Vec<usize>], mut visit: impl FnMut(usize, &[usize])) {
    let total: usize = sizes.iter().product();
    let dims = sizes.len();
    let mut digits = vec![0usize; dims];
    let mut idx = vec![0usize; maps.len()];
    for cell in 0..total {
        visit(cell, &idx);
        // advance, last dimension fastest
        let mut d = dims;
        while d > 0 {
            d -= 1;
            digits[d] += 1;
            if digits[d] < sizes[d] {
                for (k, m) in maps.iter().enumerate() {
                    idx[k] += m[d];
                }
                break;
            }
            digits[d] = 0;
            for (k, m) in maps.iter().enumerate() {
                idx[k] -= (sizes[d] - 1) * m[d];
            }
        }
    }
}

/// Merges neighbouring dimensions that a stride map treats as one: both
/// dropped (stride 0), or both kept and contiguous. Always returns at least
/// one dimension.
fn coalesce(sizes: &[usize], map: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut s: Vec<usize> = Vec::with_capacity(sizes.len());
    let mut m: Vec<usize> = Vec::with_capacity(sizes.len());
    for (&size, &stride) in sizes.iter().zip(map) {
        if size == 1 {
            continue;
        }
        if let (Some(ls), Some(lm)) = (s.last_mut(), m.last_mut()) {
            if (*lm == 0 && stride == 0) || (stride != 0 && *lm == stride * size) {
                *ls *= size;
                *lm = stride;
                continue;
            }
        }
        s.push(size);
        m.push(stride);
    }
    if s.is_empty() {
        s.push(1);
        m.push(0);
    }
    (s, m)
}

/// Depth-first product of factor tables over the output dimensions.
///
/// `maps[k][d]` is factor `k`'s stride for output dimension `d`, and
/// `complete[d]` lists the factors whose last output dimension is `d`.
/// A zero partial product skips its whole subtree.
fn fill_product(sizes: &[usize], maps: &[Vec<usize>], complete: &[Vec<usize>], tables: &[&[f64]], out: &mut [f64]) {
    let dims = sizes.len();
    if dims == 0 {
        out[0] = tables.iter().map(|t| t[0]).product();
        return;
    }
    // (factor, stride) pairs that dimension d moves
    let touch: Vec<Vec<(usize, usize)>> = (0..dims)
        .map(|d| {
            maps.iter()
                .enumerate()
                .filter(|(_, m)| m[d] != 0)
                .map(|(k, m)| (k, m[d]))
                .collect()
        })
        .collect();
    let mut idx = vec![0usize; maps.len()];
    let mut saved: Vec<Vec<usize>> = touch.iter().map(|t| vec![0; t.len()]).collect();
    let mut prob = vec![1.0; dims + 1];
    let mut cell = vec![0usize; dims + 1];
    let mut digit = vec![0usize; dims];
    let mut d = 0;
    loop {
        if digit[d] == sizes[d] {
            for (&(k, _), &v) in touch[d].iter().zip(&saved[d]) {
                idx[k] = v;
            }
            if d == 0 {
                break;
            }
            d -= 1;
            digit[d] += 1;
            continue;
        }
        let g = digit[d];
        for (&(k, stride), &v) in touch[d].iter().zip(&saved[d]) {
            idx[k] = v + g * stride;
        }
        let mut q = prob[d];
        for &k in &complete[d] {
            q *= tables[k][idx[k]];
        }
        let c = cell[d] * sizes[d] + g;
        if q == 0.0 || d + 1 == dims {
            if q != 0.0 {
                out[c] = q;
            }
            digit[d] += 1;
            continue;
        }
        prob[d + 1] = q;
        cell[d + 1] = c;
        d += 1;
        digit[d] = 0;
        for (j, &(k, _)) in touch[d].iter().enumerate() {
            saved[d][j] = idx[k];
        }
    }
}

fn xlog2x(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

/// Binary entropy `h2(p)` in bits.
pub fn binary_entropy(p: f64) -> f64 {
    -xlog2x(p) - xlog2x(1.0 - p)
}

/// Returns the `p ∈ [0, 1/2]` whose binary entropy is `h`, by bisection.
pub fn inverse_binary_entropy(h: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&h) {
        return Err(ProbError::OutOfRange(h));
    }
    if h == 0.0 {
        return Ok(0.0);
    }
    if h == 1.0 {
        return Ok(0.5);
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if binary_entropy(mid) < h {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (elo, ehi) = (
        (binary_entropy(lo) - h).abs(),
        (binary_entropy(hi) - h).abs(),
    );
    Ok(if elo <= ehi { lo } else { hi })
}

/// A joint probability mass function over an ordered list of variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointPmf {
    vars: Vec<Alphabet>,
    probs: Vec<f64>,
}

impl JointPmf {
    pub fn new(vars: Vec<Alphabet>, probs: Vec<f64>) -> Result<Self> {
        check_unique(&vars)?;
        let expected = volume(&vars);
        if probs.len() != expected {
            return Err(ProbError::ShapeMismatch {
                expected,
                found: probs.len(),
            });
        }
        check_entries(&probs)?;
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > USER_TOL {
            return Err(ProbError::NotNormalized { sum });
        }
        Ok(Self { vars, probs })
    }

    pub fn uniform(vars: Vec<Alphabet>) -> Self {
        let n = volume(&vars);
        Self::new(vars, vec![1.0 / n as f64; n]).expect("uniform pmf is valid")
    }

    /// Single-variable PMF.
    pub fn single(var: Alphabet, probs: Vec<f64>) -> Result<Self> {
        Self::new(vec![var], probs)
    }

    pub fn vars(&self) -> &[Alphabet] {
        &self.vars
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Raw access for in-place tuning; the caller keeps the tensor normalized.
    pub(crate) fn probs_mut(&mut self) -> &mut [f64] {
        &mut self.probs
    }

    pub fn var_names(&self) -> Vec<&str> {
        self.vars.iter().map(|a| a.name.as_str()).collect()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|a| a.name == name)
    }

    pub fn has_var(&self, name: &str) -> bool {
        self.position(name).is_some()
    }

    /// Probability of one joint letter, given in variable order.
    pub fn prob(&self, letters: &[usize]) -> f64 {
        assert_eq!(letters.len(), self.vars.len());
        let s = strides(&self.vars);
        let i: usize = letters.iter().zip(&s).map(|(l, s)| l * s).sum();
        self.probs[i]
    }

    fn positions(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(names.len());
        for n in names {
            let p = self
                .position(n)
                .ok_or_else(|| ProbError::UnknownVariable(n.to_string()))?;
            if out.contains(&p) {
                return Err(ProbError::DuplicateVariable(n.to_string()));
            }
            out.push(p);
        }
        Ok(out)
    }

    /// Marginal tensor over the variables at `positions`, in that order.
    pub(crate) fn marginal_at(&self, positions: &[usize]) -> Vec<f64> {
        let sizes: Vec<usize> = self.vars.iter().map(|a| a.size).collect();
        let mut map = vec![0usize; sizes.len()];
        let mut stride = 1;
        for &p in positions.iter().rev() {
            map[p] = stride;
            stride *= sizes[p];
        }
        let mut out = vec![0.0; stride];
        let (sizes, map) = coalesce(&sizes, &map);
        let (&inner, outer) = sizes.split_last().expect("coalesced shape is never empty");
        let step = map[map.len() - 1];
        let probs = &self.probs;
        odometer(outer, std::slice::from_ref(&map[..outer.len()].to_vec()), |cell, idx| {
            let run = &probs[cell * inner..(cell + 1) * inner];
            if step == 0 {
                out[idx[0]] += run.iter().sum::<f64>();
            } else {
                for (i, p) in run.iter().enumerate() {
                    out[idx[0] + i * step] += p;
                }
            }
        });
        out
    }

    /// Marginal PMF over `keep`, with variables in the order given.
    pub fn marginalize(&self, keep: &[&str]) -> Result<JointPmf> {
        let pos = self.positions(keep)?;
        let probs = self.marginal_at(&pos);
        let vars = pos.iter().map(|&p| self.vars[p].clone()).collect();
        Ok(JointPmf { vars, probs })
    }

    fn disjoint_positions(&self, sets: &[&[&str]]) -> Result<Vec<Vec<usize>>> {
        let mut seen: Vec<usize> = Vec::new();
        let mut out = Vec::with_capacity(sets.len());
        for set in sets {
            let pos = self.positions(set)?;
            for &p in &pos {
                if seen.contains(&p) {
                    return Err(ProbError::OverlappingSets(self.vars[p].name.clone()));
                }
                seen.push(p);
            }
            out.push(pos);
        }
        Ok(out)
    }

    /// `H(A | C)` in bits.
    pub fn entropy(&self, a: &[&str], c: &[&str]) -> Result<f64> {
        if a.is_empty() {
            return Err(ProbError::EmptySet);
        }
        let sets = self.disjoint_positions(&[a, c])?;
        Ok(self.entropy_at(&sets[0], &sets[1]))
    }

    pub(crate) fn entropy_at(&self, a: &[usize], c: &[usize]) -> f64 {
        let na: usize = a.iter().map(|&p| self.vars[p].size).product();
        let mut order = c.to_vec();
        order.extend_from_slice(a);
        let m = self.marginal_at(&order);
        let mut h = 0.0;
        for block in m.chunks(na) {
            let pc: f64 = block.iter().sum();
            if pc <= 0.0 {
                continue;
            }
            for &pac in block {
                if pac > 0.0 {
                    h -= pac * (pac / pc).log2();
                }
            }
        }
        h.max(0.0)
    }

    /// `I(A; B | C)` in bits; `C` may be empty.
    pub fn mutual_information(&self, a: &[&str], b: &[&str], c: &[&str]) -> Result<f64> {
        let sets = self.disjoint_positions(&[a, b, c])?;
        self.mutual_information_at(&sets[0], &sets[1], &sets[2])
    }

    pub(crate) fn mutual_information_at(&self, a: &[usize], b: &[usize], c: &[usize]) -> Result<f64> {
        let size = |s: &[usize]| -> usize { s.iter().map(|&p| self.vars[p].size).product() };
        let (na, nb, nc) = (size(a), size(b), size(c));
        let mut order = c.to_vec();
        order.extend_from_slice(a);
        order.extend_from_slice(b);
        let m = self.marginal_at(&order);
        let mut pac = vec![0.0; nc * na];
        let mut pbc = vec![0.0; nc * nb];
        let mut pc = vec![0.0; nc];
        for ic in 0..nc {
            for ia in 0..na {
                for ib in 0..nb {
                    let p = m[(ic * na + ia) * nb + ib];
                    pac[ic * na + ia] += p;
                    pbc[ic * nb + ib] += p;
                    pc[ic] += p;
                }
            }
        }
        let mut mi = 0.0;
        for ic in 0..nc {
            for ia in 0..na {
                for ib in 0..nb {
                    let p = m[(ic * na + ia) * nb + ib];
                    if p > 0.0 {
                        mi += p * ((p * pc[ic]) / (pac[ic * na + ia] * pbc[ic * nb + ib])).log2();
                    }
                }
            }
        }
        clamp_information(mi)
    }
}

/// Clamps tiny negative round-off to zero and rejects genuine negatives.
pub(crate) fn clamp_information(v: f64) -> Result<f64> {
    if v >= 0.0 {
        Ok(v)
    } else if v >= -INTERNAL_TOL {
        Ok(0.0)
    } else {
        Err(ProbError::InternalConsistency(v))
    }
}

/// A conditional PMF `P(targets | givens)`, stored with the givens as the
/// slow (outer) indices and the targets as the fast (inner) indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalPmf {
    targets: Vec<Alphabet>,
    givens: Vec<Alphabet>,
    probs: Vec<f64>,
}

impl ConditionalPmf {
    pub fn new(targets: Vec<Alphabet>, givens: Vec<Alphabet>, probs: Vec<f64>) -> Result<Self> {
        let mut all = givens.clone();
        all.extend(targets.iter().cloned());
        check_unique(&all)?;
        let expected = volume(&all);
        if probs.len() != expected {
            return Err(ProbError::ShapeMismatch {
                expected,
                found: probs.len(),
            });
        }
        check_entries(&probs)?;
        let slice = volume(&targets);
        for chunk in probs.chunks(slice) {
            let sum: f64 = chunk.iter().sum();
            if (sum - 1.0).abs() > USER_TOL {
                return Err(ProbError::NotNormalized { sum });
            }
        }
        Ok(Self {
            targets,
            givens,
            probs,
        })
    }

    /// Builds a conditional from a density `f(given_letters, target_letters)`.
    pub fn from_fn(
        targets: Vec<Alphabet>,
        givens: Vec<Alphabet>,
        f: impl Fn(&[usize], &[usize]) -> f64,
    ) -> Result<Self> {
        let g_letters = letters(&givens);
        let t_letters = letters(&targets);
        let mut probs = Vec::with_capacity(g_letters.len() * t_letters.len());
        for g in &g_letters {
            for t in &t_letters {
                probs.push(f(g, t));
            }
        }
        Self::new(targets, givens, probs)
    }

    /// A deterministic conditional `target = f(givens)`.
    pub fn deterministic(
        target: Alphabet,
        givens: Vec<Alphabet>,
        f: impl Fn(&[usize]) -> usize,
    ) -> Result<Self> {
        let size = target.size;
        Self::from_fn(vec![target], givens, |g, t| {
            let v = f(g);
            assert!(v < size, "deterministic map leaves the target alphabet");
            if t[0] == v {
                1.0
            } else {
                0.0
            }
        })
    }

    /// A conditional that ignores its givens.
    pub fn constant(target: JointPmf, givens: Vec<Alphabet>) -> Result<Self> {
        let n = volume(&givens);
        let probs = target.probs.repeat(n);
        Self::new(target.vars, givens, probs)
    }

    pub fn targets(&self) -> &[Alphabet] {
        &self.targets
    }

    pub fn givens(&self) -> &[Alphabet] {
        &self.givens
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Raw access for in-place tuning; the caller keeps every slice normalized.
    pub(crate) fn probs_mut(&mut self) -> &mut [f64] {
        &mut self.probs
    }

    pub fn slice_len(&self) -> usize {
        volume(&self.targets)
    }

    pub fn num_slices(&self) -> usize {
        volume(&self.givens)
    }

    /// The distribution over targets for a given-index in row-major order.
    pub fn slice(&self, given_index: usize) -> &[f64] {
        let n = self.slice_len();
        &self.probs[given_index * n..(given_index + 1) * n]
    }

    /// Probability of `targets` given `givens` (letters in declared order).
    pub fn prob(&self, givens: &[usize], targets: &[usize]) -> f64 {
        let gs = strides(&self.givens);
        let ts = strides(&self.targets);
        let g: usize = givens.iter().zip(&gs).map(|(l, s)| l * s).sum();
        let t: usize = targets.iter().zip(&ts).map(|(l, s)| l * s).sum();
        self.slice(g)[t]
    }

    /// Every variable, givens first, in storage order.
    fn storage_vars(&self) -> Vec<&Alphabet> {
        self.givens.iter().chain(self.targets.iter()).collect()
    }
}

impl From<JointPmf> for ConditionalPmf {
    fn from(j: JointPmf) -> Self {
        ConditionalPmf {
            targets: j.vars,
            givens: Vec::new(),
            probs: j.probs,
        }
    }
}

/// All letter tuples of a list of alphabets, in row-major order.
pub fn letters(vars: &[Alphabet]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for a in vars {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..a.size).map(move |l| {
                    let mut v = prefix.clone();
                    v.push(l);
                    v
                })
            })
            .collect();
    }
    out
}

/// One factor of a product distribution.
#[derive(Debug, Clone, Copy)]
pub enum Factor<'a> {
    Joint(&'a JointPmf),
    Conditional(&'a ConditionalPmf),
}

impl<'a> From<&'a JointPmf> for Factor<'a> {
    fn from(j: &'a JointPmf) -> Self {
        Factor::Joint(j)
    }
}

impl<'a> From<&'a ConditionalPmf> for Factor<'a> {
    fn from(c: &'a ConditionalPmf) -> Self {
        Factor::Conditional(c)
    }
}

impl Factor<'_> {
    fn targets(&self) -> &[Alphabet] {
        match self {
            Factor::Joint(j) => &j.vars,
            Factor::Conditional(c) => &c.targets,
        }
    }

    fn givens(&self) -> &[Alphabet] {
        match self {
            Factor::Joint(_) => &[],
            Factor::Conditional(c) => &c.givens,
        }
    }

    fn probs(&self) -> &[f64] {
        match self {
            Factor::Joint(j) => &j.probs,
            Factor::Conditional(c) => &c.probs,
        }
    }

    fn storage_vars(&self) -> Vec<&Alphabet> {
        match self {
            Factor::Joint(j) => j.vars.iter().collect(),
            Factor::Conditional(c) => c.storage_vars(),
        }
    }
}

/// Multiplies factors into a joint PMF whose variables follow `order`.
///
/// Every variable must be the target of exactly one factor and the factors
/// must form a directed acyclic graph.
pub fn compose(factors: &[Factor<'_>], order: &[&str]) -> Result<JointPmf> {
    let mut known: Vec<Alphabet> = Vec::new();
    let mut note = |a: &Alphabet| -> Result<()> {
        match known.iter().find(|k| k.name == a.name) {
            Some(k) if k.size != a.size => Err(ProbError::AlphabetMismatch {
                name: a.name.clone(),
                expected: k.size,
                found: a.size,
            }),
            Some(_) => Ok(()),
            None => {
                known.push(a.clone());
                Ok(())
            }
        }
    };
    for f in factors {
        for a in f.targets().iter().chain(f.givens()) {
            note(a)?;
        }
    }

    // which factor determines each variable
    let mut owner: Vec<Option<usize>> = vec![None; known.len()];
    for (fi, f) in factors.iter().enumerate() {
        for t in f.targets() {
            let k = known.iter().position(|k| k.name == t.name).unwrap();
            if owner[k].is_some() {
                return Err(ProbError::ConflictingFactor(t.name.clone()));
            }
            owner[k] = Some(fi);
        }
    }
    for name in order {
        if !known.iter().any(|k| k.name == *name) {
            return Err(ProbError::UndeterminedVariable(name.to_string()));
        }
    }
    for (k, a) in known.iter().enumerate() {
        if owner[k].is_none() {
            return Err(ProbError::UndeterminedVariable(a.name.clone()));
        }
        if !order.contains(&a.name.as_str()) {
            return Err(ProbError::UnknownVariable(a.name.clone()));
        }
    }
    let mut out_vars = Vec::with_capacity(order.len());
    for name in order {
        if out_vars.iter().any(|a: &Alphabet| a.name == *name) {
            return Err(ProbError::DuplicateVariable(name.to_string()));
        }
        out_vars.push(known.iter().find(|k| k.name == *name).unwrap().clone());
    }

    // Kahn's algorithm over factors
    let n = factors.len();
    let mut done = vec![false; n];
    let mut determined = vec![false; known.len()];
    for _ in 0..n {
        let next = (0..n).find(|&fi| {
            !done[fi]
                && factors[fi].givens().iter().all(|g| {
                    let k = known.iter().position(|k| k.name == g.name).unwrap();
                    determined[k]
                })
        });
        let Some(fi) = next else {
            return Err(ProbError::CyclicFactors);
        };
        done[fi] = true;
        for t in factors[fi].targets() {
            let k = known.iter().position(|k| k.name == t.name).unwrap();
            determined[k] = true;
        }
    }

    let sizes: Vec<usize> = out_vars.iter().map(|a| a.size).collect();
    let maps: Vec<Vec<usize>> = factors
        .iter()
        .map(|f| {
            let vars = f.storage_vars();
            let owned: Vec<Alphabet> = vars.iter().map(|a| (*a).clone()).collect();
            let s = strides(&owned);
            out_vars
                .iter()
                .map(|o| {
                    vars.iter()
                        .position(|a| a.name == o.name)
                        .map_or(0, |i| s[i])
                })
                .collect()
        })
        .collect();
    let total: usize = sizes.iter().product();
    let mut probs = vec![0.0; total];
    let tables: Vec<&[f64]> = factors.iter().map(|f| f.probs()).collect();
    let mut complete = vec![Vec::new(); sizes.len()];
    for (k, f) in factors.iter().enumerate() {
        let last = f
            .storage_vars()
            .iter()
            .map(|a| out_vars.iter().position(|o| o.name == a.name).unwrap())
            .max()
            .unwrap_or(0);
        complete[last].push(k);
    }
    fill_product(&sizes, &maps, &complete, &tables, &mut probs);
    JointPmf::new(out_vars, probs)
}
