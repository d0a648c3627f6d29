//! Per-antenna, per-bit LLR frames exchanged between detector and decoder.

/// An `mt × q` matrix of bit LLRs for one symbol vector: row `i` holds the
/// `q` LLRs of transmit antenna `i`.
///
/// Sign convention: positive LLR favors unipolar bit 0 (bipolar `x = +1`).
#[derive(Debug, Clone, PartialEq)]
pub struct LlrFrame {
    mt: usize,
    q: usize,
    vals: Vec<f64>,
}

impl LlrFrame {
    /// All-zero frame (no a-priori knowledge).
    pub fn zeros(mt: usize, q: usize) -> Self {
        LlrFrame { mt, q, vals: vec![0.0; mt * q] }
    }

    /// Builds a frame from row-major values (`mt * q` entries).
    pub fn from_rows(mt: usize, q: usize, vals: Vec<f64>) -> Self {
        assert_eq!(vals.len(), mt * q, "LLR frame dimension mismatch");
        LlrFrame { mt, q, vals }
    }

    /// Number of antenna rows.
    pub fn mt(&self) -> usize {
        self.mt
    }

    /// Bits per antenna.
    pub fn q(&self) -> usize {
        self.q
    }

    /// LLR of bit `b` of antenna `i`.
    pub fn get(&self, i: usize, b: usize) -> f64 {
        self.vals[i * self.q + b]
    }

    /// Sets the LLR of bit `b` of antenna `i`.
    pub fn set(&mut self, i: usize, b: usize, v: f64) {
        self.vals[i * self.q + b] = v;
    }

    /// The `q` LLRs of antenna `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.vals[i * self.q..(i + 1) * self.q]
    }

    /// All values, row-major.
    pub fn as_slice(&self) -> &[f64] {
        &self.vals
    }
}
