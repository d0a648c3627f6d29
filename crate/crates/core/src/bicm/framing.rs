//! Framing of a coded bit stream onto transmit symbol vectors.
//!
//! A stream of `coded_len` bits is padded with transmitter-known zeros
//! to the next multiple of `mt·q` and cut into vectors of `mt` labels of
//! `q` bits each. Stream position `v·mt·q + i·q + b` carries bit `b` of
//! antenna `i` in vector `v` — the same `(i, b)` indexing the LLR frames
//! use, so LLR streams scatter and gather with the identical layout.
//! Padding bits carry no payload; the receiver pins their a-priori LLRs
//! to a large known-zero value and they never reach the decoder.

use crate::llr::LlrFrame;

/// Fixed framing geometry of one coded stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Framing {
    mt: usize,
    q: usize,
    coded_len: usize,
}

impl Framing {
    pub fn new(coded_len: usize, mt: usize, q: usize) -> Self {
        assert!(mt * q >= 1 && coded_len >= 1);
        Framing { mt, q, coded_len }
    }

    /// Bits per symbol vector.
    pub fn bits_per_vector(&self) -> usize {
        self.mt * self.q
    }

    /// Stream length after zero padding.
    pub fn padded_len(&self) -> usize {
        self.coded_len.div_ceil(self.bits_per_vector()) * self.bits_per_vector()
    }

    /// Number of appended zero pad bits.
    pub fn pad_bits(&self) -> usize {
        self.padded_len() - self.coded_len
    }

    /// Number of transmit symbol vectors per frame.
    pub fn num_vectors(&self) -> usize {
        self.padded_len() / self.bits_per_vector()
    }

    /// Cuts the coded stream into per-vector label patterns:
    /// `result[v][i]` is the `q`-bit pattern of antenna `i` in vector
    /// `v`, padding zeros appended.
    pub fn frame(&self, coded: &[u8]) -> Vec<Vec<usize>> {
        assert_eq!(coded.len(), self.coded_len);
        let mut padded = coded.to_vec();
        padded.resize(self.padded_len(), 0);
        padded
            .chunks(self.bits_per_vector())
            .map(|chunk| {
                chunk
                    .chunks(self.q)
                    .map(|label| {
                        label.iter().enumerate().fold(0usize, |p, (b, &bit)| {
                            debug_assert!(bit <= 1);
                            p | (usize::from(bit) << b)
                        })
                    })
                    .collect()
            })
            .collect()
    }

    /// Recovers the coded stream from per-vector label patterns,
    /// dropping the padding.
    pub fn unframe(&self, vectors: &[Vec<usize>]) -> Vec<u8> {
        assert_eq!(vectors.len(), self.num_vectors());
        let mut bits = Vec::with_capacity(self.padded_len());
        for vec in vectors {
            assert_eq!(vec.len(), self.mt);
            for &pattern in vec {
                for b in 0..self.q {
                    bits.push(((pattern >> b) & 1) as u8);
                }
            }
        }
        bits.truncate(self.coded_len);
        bits
    }

    /// Scatters a padded LLR stream into per-vector frames (inverse of
    /// [`Framing::gather_llrs`]; input length must already be padded).
    pub fn scatter_llrs(&self, stream: &[f64]) -> Vec<LlrFrame> {
        assert_eq!(stream.len(), self.padded_len());
        stream
            .chunks(self.bits_per_vector())
            .map(|chunk| LlrFrame::from_rows(self.mt, self.q, chunk.to_vec()))
            .collect()
    }

    /// Concatenates per-vector LLR frames back into a stream, truncated
    /// to the unpadded coded length.
    pub fn gather_llrs(&self, frames: &[LlrFrame]) -> Vec<f64> {
        assert_eq!(frames.len(), self.num_vectors());
        let mut stream = Vec::with_capacity(self.padded_len());
        for f in frames {
            stream.extend_from_slice(f.as_slice());
        }
        stream.truncate(self.coded_len);
        stream
    }
}
