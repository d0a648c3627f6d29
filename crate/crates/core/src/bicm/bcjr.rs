//! Max-log BCJR soft decoding of the terminated convolutional code.
//!
//! Works in the LLR domain with the max-log approximation: branch
//! metrics are correlations `½·x·L` (bipolar bit times LLR), and the
//! forward/backward recursions replace the log-sum with a maximum. Both
//! trellis boundaries are pinned to state 0 (the codeword is terminated
//! and the receiver knows it). The sign convention matches the rest of
//! the crate: a positive LLR favors bit 0.

use crate::bicm::conv::{step_outputs, step_state, STATES, TAIL_BITS};
use crate::Error;

/// Soft outputs of one decoding pass.
#[derive(Debug, Clone)]
pub struct BcjrOutput {
    /// Extrinsic LLR per coded bit (a-posteriori minus channel input);
    /// this is what feeds back to the demapper.
    pub extrinsic_coded: Vec<f64>,
    /// Hard decisions on the information bits (ties decide 0).
    pub info_decisions: Vec<u8>,
    /// A-posteriori LLR per information bit.
    pub info_aposteriori: Vec<f64>,
}

/// Max-log BCJR pass over the 64-state trellis.
///
/// `llr_coded` holds one channel LLR per coded bit (length
/// `2·(k_info + 6)`); `la_info` holds a-priori LLRs for the information
/// bits (all zero in this receiver, the parameter exists for
/// generality). Tail steps admit only the zero input.
pub fn maxlog_bcjr(llr_coded: &[f64], la_info: &[f64]) -> Result<BcjrOutput, Error> {
    let k_info = la_info.len();
    let steps = k_info + TAIL_BITS;
    if llr_coded.len() != 2 * steps {
        return Err(Error::InvalidConfig(format!(
            "coded LLR length {} does not terminate {k_info} info bits (expected {})",
            llr_coded.len(),
            2 * steps
        )));
    }

    // Branch metric of input `b` from `state` at step `t`.
    let gamma = |t: usize, state: usize, b: u32| -> f64 {
        let (c0, c1) = step_outputs(state as u32, b);
        let x0 = 1.0 - 2.0 * f64::from(c0);
        let x1 = 1.0 - 2.0 * f64::from(c1);
        let mut g = 0.5 * (x0 * llr_coded[2 * t] + x1 * llr_coded[2 * t + 1]);
        if t < k_info {
            g += 0.5 * (1.0 - 2.0 * f64::from(b)) * la_info[t];
        }
        g
    };
    let inputs = |t: usize| -> &'static [u32] {
        if t < k_info {
            &[0, 1]
        } else {
            &[0]
        }
    };

    // Forward recursion, re-centred each step (max-log metrics are
    // invariant under a common offset, and this keeps them bounded).
    let mut alpha = vec![[f64::NEG_INFINITY; STATES]; steps + 1];
    alpha[0][0] = 0.0;
    for t in 0..steps {
        for s in 0..STATES {
            if alpha[t][s].is_finite() {
                for &b in inputs(t) {
                    let ns = step_state(s as u32, b) as usize;
                    let m = alpha[t][s] + gamma(t, s, b);
                    alpha[t + 1][ns] = alpha[t + 1][ns].max(m);
                }
            }
        }
        let peak = alpha[t + 1].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for v in &mut alpha[t + 1] {
            *v -= peak;
        }
    }

    let mut beta = vec![[f64::NEG_INFINITY; STATES]; steps + 1];
    beta[steps][0] = 0.0;
    for t in (0..steps).rev() {
        for s in 0..STATES {
            for &b in inputs(t) {
                let ns = step_state(s as u32, b) as usize;
                if beta[t + 1][ns].is_finite() {
                    let m = gamma(t, s, b) + beta[t + 1][ns];
                    beta[t][s] = beta[t][s].max(m);
                }
            }
        }
        let peak = beta[t].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for v in &mut beta[t] {
            *v -= peak;
        }
    }

    let mut extrinsic_coded = vec![0.0; llr_coded.len()];
    let mut info_decisions = Vec::with_capacity(k_info);
    let mut info_aposteriori = Vec::with_capacity(k_info);
    for t in 0..steps {
        // Best full-path metric per branch label: info bit and both
        // coded bits.
        let mut best_info = [f64::NEG_INFINITY; 2];
        let mut best_coded = [[f64::NEG_INFINITY; 2]; 2];
        for s in 0..STATES {
            if !alpha[t][s].is_finite() {
                continue;
            }
            for &b in inputs(t) {
                let ns = step_state(s as u32, b) as usize;
                if !beta[t + 1][ns].is_finite() {
                    continue;
                }
                let m = alpha[t][s] + gamma(t, s, b) + beta[t + 1][ns];
                let (c0, c1) = step_outputs(s as u32, b);
                let bi = b as usize;
                best_info[bi] = best_info[bi].max(m);
                best_coded[0][c0 as usize] = best_coded[0][c0 as usize].max(m);
                best_coded[1][c1 as usize] = best_coded[1][c1 as usize].max(m);
            }
        }
        for i in 0..2 {
            let app = best_coded[i][0] - best_coded[i][1];
            extrinsic_coded[2 * t + i] = app - llr_coded[2 * t + i];
        }
        if t < k_info {
            let app = best_info[0] - best_info[1];
            info_aposteriori.push(app);
            info_decisions.push(u8::from(app < 0.0));
        }
    }

    Ok(BcjrOutput { extrinsic_coded, info_decisions, info_aposteriori })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bicm::conv::conv_encode;
    use rand::{RngExt as _, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    /// Exhaustive max-log reference: enumerate all 2^k codewords, score
    /// each by its LLR correlation, and take per-bit best-0 minus best-1.
    fn codeword_oracle(llr_coded: &[f64], k: usize) -> (Vec<f64>, Vec<f64>) {
        let mut best_info = vec![[f64::NEG_INFINITY; 2]; k];
        let mut best_coded = vec![[f64::NEG_INFINITY; 2]; llr_coded.len()];
        for w in 0..1usize << k {
            let info: Vec<u8> = (0..k).map(|i| ((w >> i) & 1) as u8).collect();
            let code = conv_encode(&info);
            let m: f64 = code
                .iter()
                .zip(llr_coded)
                .map(|(&c, &l)| 0.5 * (1.0 - 2.0 * f64::from(c)) * l)
                .sum();
            for (i, &b) in info.iter().enumerate() {
                best_info[i][b as usize] = best_info[i][b as usize].max(m);
            }
            for (j, &c) in code.iter().enumerate() {
                best_coded[j][c as usize] = best_coded[j][c as usize].max(m);
            }
        }
        let info_app = best_info.iter().map(|b| b[0] - b[1]).collect();
        let coded_ext = best_coded
            .iter()
            .zip(llr_coded)
            .map(|(b, &l)| b[0] - b[1] - l)
            .collect();
        (info_app, coded_ext)
    }

    #[test]
    fn confident_all_zero_input_decodes_to_zero() {
        let k = 24;
        let llr = vec![8.0; 2 * (k + 6)];
        let out = maxlog_bcjr(&llr, &vec![0.0; k]).unwrap();
        assert_eq!(out.info_decisions, vec![0; k]);
        assert!(out.info_aposteriori.iter().all(|&l| l > 0.0));
    }

    #[test]
    fn zero_inputs_give_zero_extrinsics() {
        // With no channel evidence at all, the code's symmetry leaves
        // every extrinsic exactly zero and ties decide 0.
        let k = 16;
        let out = maxlog_bcjr(&vec![0.0; 2 * (k + 6)], &vec![0.0; k]).unwrap();
        assert!(out.extrinsic_coded.iter().all(|&l| l == 0.0));
        assert!(out.info_aposteriori.iter().all(|&l| l == 0.0));
        assert_eq!(out.info_decisions, vec![0; k]);
    }

    #[test]
    fn matches_exhaustive_codeword_reference() {
        let mut rng = ChaCha12Rng::seed_from_u64(43);
        for k in [4usize, 8] {
            for _ in 0..10 {
                let llr: Vec<f64> =
                    (0..2 * (k + 6)).map(|_| rng.random_range(-3.0..3.0)).collect();
                let out = maxlog_bcjr(&llr, &vec![0.0; k]).unwrap();
                let (info_app, coded_ext) = codeword_oracle(&llr, k);
                for (a, b) in out.info_aposteriori.iter().zip(&info_app) {
                    assert!((a - b).abs() < 1e-9);
                }
                for (a, b) in out.extrinsic_coded.iter().zip(&coded_ext) {
                    assert!((a - b).abs() < 1e-9);
                }
                let decisions: Vec<u8> = info_app.iter().map(|&l| u8::from(l < 0.0)).collect();
                assert_eq!(out.info_decisions, decisions);
            }
        }
    }

    #[test]
    fn corrects_a_flipped_bit() {
        let mut rng = ChaCha12Rng::seed_from_u64(44);
        let k = 32;
        let info: Vec<u8> = (0..k).map(|_| rng.random_range(0..2u8)).collect();
        let mut llr: Vec<f64> =
            conv_encode(&info).iter().map(|&c| if c == 0 { 4.0 } else { -4.0 }).collect();
        llr[9] = -llr[9];
        let out = maxlog_bcjr(&llr, &vec![0.0; k]).unwrap();
        assert_eq!(out.info_decisions, info);
    }

    #[test]
    fn rejects_mismatched_lengths() {
        assert!(maxlog_bcjr(&vec![0.0; 10], &vec![0.0; 8]).is_err());
    }
}
