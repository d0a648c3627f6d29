//! Rate-1/2 feedforward convolutional encoder, constraint length 7,
//! generators 133/171 (octal), terminated by six zero tail bits.
//!
//! # Bit-exact register convention
//!
//! The 7-bit working register at step `t` is `reg = (b_t << 6) | state`:
//! the current input occupies the MSB (bit 6) and `state` bit `p` holds
//! input `b_{t-(6-p)}` (bit 5 = most recent past input, bit 0 = oldest).
//! Each output bit is the parity of `reg` masked by one generator, the
//! register then shifts right: `state' = reg >> 1`. Output bits are
//! emitted pairwise, generator 133 first.

/// Constraint length (memory 6, 64 trellis states).
pub const CONSTRAINT_LENGTH: usize = 7;

/// Generator taps over the 7-bit register, MSB = current input.
pub const GENERATORS_OCTAL: [u32; 2] = [0o133, 0o171];

/// Zero tail bits appended to drive the register back to state 0.
pub const TAIL_BITS: usize = CONSTRAINT_LENGTH - 1;

/// Number of trellis states.
pub const STATES: usize = 1 << TAIL_BITS;

/// Output bit pair of one encoder step with input `b` from `state`.
#[inline]
pub fn step_outputs(state: u32, b: u32) -> (u32, u32) {
    let reg = (b << TAIL_BITS) | state;
    (
        (GENERATORS_OCTAL[0] & reg).count_ones() & 1,
        (GENERATORS_OCTAL[1] & reg).count_ones() & 1,
    )
}

/// Successor state of one encoder step.
#[inline]
pub fn step_state(state: u32, b: u32) -> u32 {
    ((b << TAIL_BITS) | state) >> 1
}

/// Encodes `info` (unipolar bits) into the terminated codeword of
/// `2·(info.len() + 6)` bits: both generator outputs per step, then six
/// zero tail steps returning the register to state 0.
pub fn conv_encode(info: &[u8]) -> Vec<u8> {
    assert!(!info.is_empty());
    let mut out = Vec::with_capacity(2 * (info.len() + TAIL_BITS));
    let mut state = 0u32;
    for &b in info.iter().chain(std::iter::repeat(&0u8).take(TAIL_BITS)) {
        debug_assert!(b <= 1);
        let (c0, c1) = step_outputs(state, u32::from(b));
        out.push(c0 as u8);
        out.push(c1 as u8);
        state = step_state(state, u32::from(b));
    }
    debug_assert_eq!(state, 0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt as _, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    /// Independent reference: direct GF(2) convolution of the padded
    /// input with each generator's impulse response. Register bit `p`
    /// holds the input delayed by `6 - p` steps, so delay `k` taps
    /// generator bit `6 - k`.
    fn reference_encode(info: &[u8]) -> Vec<u8> {
        let padded: Vec<u8> =
            info.iter().copied().chain(std::iter::repeat(0).take(TAIL_BITS)).collect();
        let taps: Vec<[u8; CONSTRAINT_LENGTH]> = GENERATORS_OCTAL
            .iter()
            .map(|g| std::array::from_fn(|k| ((g >> (TAIL_BITS - k)) & 1) as u8))
            .collect();
        let mut out = Vec::new();
        for t in 0..padded.len() {
            for tap in &taps {
                let mut c = 0;
                for (k, &coeff) in tap.iter().enumerate() {
                    if k <= t {
                        c ^= coeff & padded[t - k];
                    }
                }
                out.push(c);
            }
        }
        out
    }

    #[test]
    fn all_zero_input_gives_all_zero_codeword() {
        let code = conv_encode(&[0; 32]);
        assert_eq!(code.len(), 2 * (32 + 6));
        assert!(code.iter().all(|&c| c == 0));
    }

    #[test]
    fn impulse_response_matches_reference() {
        let mut info = [0u8; 8];
        info[0] = 1;
        assert_eq!(conv_encode(&info), reference_encode(&info));
        // First step: register = 1000000, so the outputs are the MSB taps
        // of both generators (1 and 1).
        let code = conv_encode(&info);
        assert_eq!(&code[..2], &[1, 1]);
    }

    #[test]
    fn random_words_match_reference() {
        let mut rng = ChaCha12Rng::seed_from_u64(41);
        for _ in 0..50 {
            let k = rng.random_range(1..100);
            let info: Vec<u8> = (0..k).map(|_| rng.random_range(0..2u8)).collect();
            assert_eq!(conv_encode(&info), reference_encode(&info));
        }
    }

    #[test]
    fn codeword_length_is_twice_info_plus_tail() {
        assert_eq!(conv_encode(&[0; 512]).len(), 1036);
        assert_eq!(conv_encode(&[1]).len(), 14);
    }

    #[test]
    fn encoder_is_linear() {
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        for _ in 0..20 {
            let k = rng.random_range(1..64);
            let a: Vec<u8> = (0..k).map(|_| rng.random_range(0..2u8)).collect();
            let b: Vec<u8> = (0..k).map(|_| rng.random_range(0..2u8)).collect();
            let xor: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
            let sum: Vec<u8> = conv_encode(&a)
                .iter()
                .zip(conv_encode(&b))
                .map(|(x, y)| x ^ y)
                .collect();
            assert_eq!(conv_encode(&xor), sum);
        }
    }
}
