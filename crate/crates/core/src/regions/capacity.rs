//! Single-user reference capacities via Blahut–Arimoto.

use serde::Serialize;

use crate::channels::SingleStateChannel;

const GAP_TOL: f64 = 1e-11;
const MAX_ITERS: usize = 1_000_000;

/// Capacity in bits with a capacity-achieving input distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Capacity {
    pub bits: f64,
    pub input: Vec<f64>,
}

/// `D(W(·|x) ‖ q)` in bits for every input letter.
fn divergences(law: &[f64], ny: usize, q: &[f64]) -> Vec<f64> {
    law.chunks(ny)
        .map(|row| {
            row.iter()
                .zip(q)
                .filter(|(w, _)| **w > 0.0)
                .map(|(w, qy)| w * (w / qy).log2())
                .sum()
        })
        .collect()
}

fn output_pmf(law: &[f64], ny: usize, r: &[f64]) -> Vec<f64> {
    let mut q = vec![0.0; ny];
    for (row, rx) in law.chunks(ny).zip(r) {
        for (qy, w) in q.iter_mut().zip(row) {
            *qy += rx * w;
        }
    }
    q
}

fn blahut_arimoto(law: &[f64], ny: usize, mut r: Vec<f64>) -> Capacity {
    let mut best = 0.0;
    for _ in 0..MAX_ITERS {
        let q = output_pmf(law, ny, &r);
        let d = divergences(law, ny, &q);
        let lower: f64 = r.iter().zip(&d).map(|(a, b)| a * b).sum();
        let upper = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        best = lower;
        if upper - lower <= GAP_TOL {
            break;
        }
        let mut z = 0.0;
        for (rx, dx) in r.iter_mut().zip(&d) {
            *rx *= dx.exp2();
            z += *rx;
        }
        r.iter_mut().for_each(|rx| *rx /= z);
    }
    Capacity {
        bits: best.max(0.0),
        input: r,
    }
}

/// Capacity of a DMC given as a row-major `[x, y]` transition matrix.
///
/// Runs from the uniform input and from one input tilted towards each
/// letter, returning the best result.
pub fn channel_capacity(law: &[f64], nx: usize, ny: usize) -> Capacity {
    assert_eq!(law.len(), nx * ny);
    let uniform = vec![1.0 / nx as f64; nx];
    let mut starts = vec![uniform.clone()];
    for x in 0..nx.min(16) {
        let mut r: Vec<f64> = uniform.iter().map(|u| 0.5 * u).collect();
        r[x] += 0.5;
        starts.push(r);
    }
    starts
        .into_iter()
        .map(|r| blahut_arimoto(law, ny, r))
        .fold(None::<Capacity>, |acc, c| match acc {
            Some(a) if a.bits >= c.bits => Some(a),
            _ => Some(c),
        })
        .expect("at least one start")
}

/// Sum capacity when the two encoders fully cooperate and nobody sees the
/// state: `max over P(x1, x2)` of `I(X1, X2; Y)`.
pub fn full_coop_sum_capacity(ch: &SingleStateChannel) -> Capacity {
    let nx = ch.x1().size * ch.x2().size;
    channel_capacity(&ch.state_averaged_law(), nx, ch.y().size)
}

/// `max_x' max_{P_X} I(X; Y, W | X' = x')` for `user` (1 or 2), where `X'`
/// is the other user's input.
pub fn informed_receiver_capacity(ch: &SingleStateChannel, user: u8) -> Capacity {
    assert!(user == 1 || user == 2, "user must be 1 or 2");
    let (nw, n1, n2, ny) = (ch.state().size, ch.x1().size, ch.x2().size, ch.y().size);
    let (n_own, n_other) = if user == 1 { (n1, n2) } else { (n2, n1) };
    let pw = ch.state_pmf().probs();
    (0..n_other)
        .map(|other| {
            let mut law = vec![0.0; n_own * ny * nw];
            for own in 0..n_own {
                let (x1, x2) = if user == 1 { (own, other) } else { (other, own) };
                for (w, &p) in pw.iter().enumerate() {
                    let slice = ch.law().slice((w * n1 + x1) * n2 + x2);
                    for (y, py) in slice.iter().enumerate() {
                        law[own * ny * nw + y * nw + w] = p * py;
                    }
                }
            }
            channel_capacity(&law, n_own, ny * nw)
        })
        .fold(None::<Capacity>, |acc, c| match acc {
            Some(a) if a.bits >= c.bits => Some(a),
            _ => Some(c),
        })
        .expect("other user has at least one letter")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{
        build_example_single, build_useless_channel, build_x1_disconnected_channel,
    };
    use crate::prob::{binary_entropy, Alphabet, ConditionalPmf, JointPmf};

    #[test]
    fn bsc_capacity() {
        let e = 0.11;
        let c = channel_capacity(&[1.0 - e, e, e, 1.0 - e], 2, 2);
        assert!((c.bits - (1.0 - binary_entropy(e))).abs() < 1e-9);
    }

    #[test]
    fn example_sum_capacity() {
        let c = full_coop_sum_capacity(&build_example_single());
        assert!((c.bits - 1.5).abs() < 1e-6, "{}", c.bits);
        for r in &c.input {
            assert!((r - 0.25).abs() < 1e-4);
        }
    }

    #[test]
    fn useless_and_noiseless() {
        assert!(full_coop_sum_capacity(&build_useless_channel()).bits.abs() < 1e-12);
        let givens = vec![Alphabet::new("W", 1), Alphabet::new("X1", 2), Alphabet::new("X2", 2)];
        let law = ConditionalPmf::deterministic(Alphabet::new("Y", 4), givens, |g| 2 * g[1] + g[2]).unwrap();
        let ch = SingleStateChannel::new(JointPmf::uniform(vec![Alphabet::new("W", 1)]), law).unwrap();
        assert!((full_coop_sum_capacity(&ch).bits - 2.0).abs() < 1e-9);
    }

    #[test]
    fn informed_receiver() {
        let d = build_x1_disconnected_channel();
        assert!(informed_receiver_capacity(&d, 1).bits.abs() < 1e-12);
        assert!((informed_receiver_capacity(&d, 2).bits - 1.0).abs() < 1e-9);
        let e = build_example_single();
        assert!((informed_receiver_capacity(&e, 1).bits - 1.0).abs() < 1e-6);
        assert!((informed_receiver_capacity(&e, 2).bits - 1.0).abs() < 1e-6);
    }
}
