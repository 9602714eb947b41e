#![allow(dead_code)]

use macsi_core::prob::{binary_entropy, compose, inverse_binary_entropy, Alphabet, ConditionalPmf, Factor, JointPmf};
use macsi_core::SingleStateChannel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Weights in `[0, 1)` with roughly one entry in five set to zero,
/// normalized; at least one entry stays positive.
pub fn random_simplex(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n)
        .map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen::<f64>() })
        .collect();
    if v.iter().all(|x| *x == 0.0) {
        let i = rng.gen_range(0..n);
        v[i] = 1.0;
    }
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

pub const NAMES: [&str; 4] = ["A", "B", "C", "D"];

/// A joint over 2 to 4 variables with 1 to 3 letters each.
pub fn random_joint(seed: u64) -> JointPmf {
    let mut r = rng(seed);
    let k = r.gen_range(2..=4);
    let vars: Vec<Alphabet> = (0..k).map(|i| Alphabet::new(NAMES[i], r.gen_range(1..=3))).collect();
    let n = vars.iter().map(|a| a.size).product();
    JointPmf::new(vars, random_simplex(&mut r, n)).unwrap()
}

pub fn random_conditional(r: &mut impl Rng, target: Alphabet, givens: Vec<Alphabet>) -> ConditionalPmf {
    let slices: usize = givens.iter().map(|g| g.size).product();
    let probs = (0..slices).flat_map(|_| random_simplex(r, target.size)).collect();
    ConditionalPmf::new(vec![target], givens, probs).unwrap()
}

/// A random single-state channel with 1 to 3 letters per alphabet.
pub fn random_single_channel(seed: u64) -> SingleStateChannel {
    let mut r = rng(seed);
    let w = Alphabet::new("W", r.gen_range(1..=3));
    let x1 = Alphabet::new("X1", r.gen_range(1..=3));
    let x2 = Alphabet::new("X2", r.gen_range(1..=3));
    let y = Alphabet::new("Y", r.gen_range(1..=3));
    let pw = JointPmf::single(w.clone(), random_simplex(&mut r, w.size)).unwrap();
    let law = random_conditional(&mut r, y, vec![w, x1, x2]);
    SingleStateChannel::new(pw, law).unwrap()
}

fn split_sets(r: &mut impl Rng, names: &[String]) -> [Vec<String>; 3] {
    let mut sets: [Vec<String>; 3] = Default::default();
    let mut order: Vec<&String> = names.iter().collect();
    for i in (1..order.len()).rev() {
        let j = r.gen_range(0..=i);
        order.swap(i, j);
    }
    sets[0].push(order[0].clone());
    sets[1].push(order[1].clone());
    for n in &order[2..] {
        sets[r.gen_range(0..3)].push((*n).clone());
    }
    sets
}

fn refs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

/// `H(A, B) = H(A) + H(B | A)` for a random split of the variables.
pub fn check_chain_rule(seed: u64) -> Result<(), String> {
    let j = random_joint(seed);
    let names: Vec<String> = j.var_names().iter().map(|s| s.to_string()).collect();
    let [a, b, c] = split_sets(&mut rng(seed ^ 1), &names);
    let mut b = b;
    b.extend(c);
    let (a, b) = (refs(&a), refs(&b));
    let mut ab = a.clone();
    ab.extend(&b);
    let lhs = j.entropy(&ab, &[]).unwrap();
    let rhs = j.entropy(&a, &[]).unwrap() + j.entropy(&b, &a).unwrap();
    if (lhs - rhs).abs() > 1e-10 {
        return Err(format!("H(AB) = {lhs}, H(A) + H(B|A) = {rhs}"));
    }
    Ok(())
}

/// Nonnegativity and symmetry of `I(A; B | C)`.
pub fn check_mi_symmetry(seed: u64) -> Result<(), String> {
    let j = random_joint(seed);
    let names: Vec<String> = j.var_names().iter().map(|s| s.to_string()).collect();
    let [a, b, c] = split_sets(&mut rng(seed ^ 2), &names);
    let (a, b, c) = (refs(&a), refs(&b), refs(&c));
    let ab = j.mutual_information(&a, &b, &c).map_err(|e| e.to_string())?;
    let ba = j.mutual_information(&b, &a, &c).map_err(|e| e.to_string())?;
    if ab < 0.0 || (ab - ba).abs() > 1e-10 {
        return Err(format!("I(A;B|C) = {ab}, I(B;A|C) = {ba}"));
    }
    Ok(())
}

/// Entropies agree between a joint and its marginal.
pub fn check_marginal_entropy(seed: u64) -> Result<(), String> {
    let j = random_joint(seed);
    let names: Vec<String> = j.var_names().iter().map(|s| s.to_string()).collect();
    let [a, b, _] = split_sets(&mut rng(seed ^ 3), &names);
    let (a, b) = (refs(&a), refs(&b));
    let mut keep = b.clone();
    keep.extend(&a);
    let m = j.marginalize(&keep).unwrap();
    let total: f64 = m.probs().iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(format!("marginal sums to {total}"));
    }
    let full = j.entropy(&a, &b).unwrap();
    let marg = m.entropy(&a, &b).unwrap();
    if (full - marg).abs() > 1e-12 {
        return Err(format!("H(A|B) = {full} on the joint, {marg} on the marginal"));
    }
    Ok(())
}

/// Products of the form `P(u) P(x1|u) P(x2|u) P(w) P(v|w)`.
pub fn check_factorization(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let mut size = || r.gen_range(1..=3);
    let (u, x1, x2, w, v) = (
        Alphabet::new("U", size()),
        Alphabet::new("X1", size()),
        Alphabet::new("X2", size()),
        Alphabet::new("W", size()),
        Alphabet::new("V", size()),
    );
    let pu = JointPmf::single(u.clone(), random_simplex(&mut r, u.size)).unwrap();
    let pw = JointPmf::single(w.clone(), random_simplex(&mut r, w.size)).unwrap();
    let p1 = random_conditional(&mut r, x1, vec![u.clone()]);
    let p2 = random_conditional(&mut r, x2, vec![u]);
    let pv = random_conditional(&mut r, v, vec![w]);
    let factors: Vec<Factor> = vec![(&pv).into(), (&p2).into(), (&pw).into(), (&p1).into(), (&pu).into()];
    let j = compose(&factors, &["U", "V", "X1", "X2", "W"]).map_err(|e| e.to_string())?;
    let total: f64 = j.probs().iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(format!("product sums to {total}"));
    }
    let i1 = j.mutual_information(&["X1"], &["X2"], &["U"]).unwrap();
    let i2 = j.mutual_information(&["X1", "X2", "U"], &["V", "W"], &[]).unwrap();
    if i1 > 1e-10 || i2 > 1e-10 {
        return Err(format!("I(X1;X2|U) = {i1}, I(X1X2U;VW) = {i2}"));
    }
    Ok(())
}

pub fn check_inverse_entropy(h: f64) -> Result<(), String> {
    let p = inverse_binary_entropy(h).map_err(|e| e.to_string())?;
    let back = binary_entropy(p);
    if !(0.0..=0.5).contains(&p) || (back - h).abs() > 1e-10 {
        return Err(format!("h = {h}: p = {p}, h2(p) = {back}"));
    }
    Ok(())
}
