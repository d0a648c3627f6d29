//! Per-antenna a-priori metric tables.
//!
//! For one antenna with a-priori LLRs `L^A_b` (b = 0..q−1) and a candidate
//! symbol with bipolar bits `x_b`, the a-priori metric contribution is
//!
//! ```text
//! m_a = Σ_b |L^A_b| · d_b,   d_b = 1 iff x_b disagrees with sign(L^A_b)
//! ```
//!
//! with `sign(0) := +1`. This is the max-log prior cost up to a constant
//! that is common to all symbols and therefore cancels in every LLR
//! difference. Because it only depends on the unipolar bit pattern of the
//! symbol, all `2^q` values can be tabulated once per antenna and sorted;
//! the sorted order is the a-priori half of the hybrid enumeration.
//!
//! The sign convention matches [`crate::llr`]: a positive LLR favors
//! unipolar bit 0, i.e. bipolar `x = +1`.

use crate::llr::LlrFrame;

/// All `2^q` a-priori metrics of one antenna, plus the ascending
/// enumeration order over bit patterns and a cursor into it.
///
/// The metrics and the sorted order are fixed for the lifetime of one
/// detection call; the cursor advances monotonically while a tree level is
/// being enumerated and is reset each time the search re-enters the level
/// from above.
#[derive(Debug, Clone)]
pub struct AprioriTable {
    /// `metrics[d]` = m_a of the unipolar bit pattern `d`.
    metrics: Vec<f64>,
    /// Bit patterns sorted by ascending metric, ties by ascending pattern.
    sorted_order: Vec<usize>,
    /// First entry of `sorted_order` that may still be unflagged.
    next_ptr: usize,
}

/// A-priori metric of one bipolar bit vector `bits` against the LLR row
/// `llr_row`: the sum of `|L^A_b|` over all bits that disagree with the
/// sign of their LLR (`sign(0) := +1`, which never contributes cost).
pub fn apriori_increment(llr_row: &[f64], bits: &[f64]) -> f64 {
    assert_eq!(llr_row.len(), bits.len());
    llr_row
        .iter()
        .zip(bits)
        .map(|(&l, &x)| {
            let favored = if l < 0.0 { -1.0 } else { 1.0 };
            if x == favored {
                0.0
            } else {
                l.abs()
            }
        })
        .sum()
}

/// Builds one [`AprioriTable`] per antenna from the a-priori LLR frame.
pub fn build_apriori_tables(l_a: &LlrFrame) -> Vec<AprioriTable> {
    (0..l_a.mt()).map(|i| AprioriTable::build(l_a.row(i))).collect()
}

impl AprioriTable {
    /// Tabulates and sorts the `2^q` metrics of one antenna.
    pub fn build(llr_row: &[f64]) -> Self {
        let q = llr_row.len();
        let metrics: Vec<f64> = (0..1usize << q)
            .map(|d| {
                let bits: Vec<f64> = (0..q)
                    .map(|b| 1.0 - 2.0 * ((d >> b) & 1) as f64)
                    .collect();
                apriori_increment(llr_row, &bits)
            })
            .collect();
        let mut sorted_order: Vec<usize> = (0..metrics.len()).collect();
        sorted_order.sort_unstable_by(|&a, &b| {
            metrics[a].partial_cmp(&metrics[b]).unwrap().then(a.cmp(&b))
        });
        AprioriTable { metrics, sorted_order, next_ptr: 0 }
    }

    /// Metric of the unipolar bit pattern `d`.
    pub fn metric(&self, d: usize) -> f64 {
        self.metrics[d]
    }

    /// Bit patterns in ascending-metric enumeration order.
    pub fn sorted_order(&self) -> &[usize] {
        &self.sorted_order
    }

    /// Rewinds the cursor; called whenever the search re-enters this
    /// antenna's level from above and the enumerated flags are cleared.
    pub fn reset_cursor(&mut self) {
        self.next_ptr = 0;
    }

    /// First bit pattern in sorted order whose symbol has not been
    /// enumerated yet, or `None` once the level is exhausted.
    ///
    /// `flagged` reports whether a pattern's symbol is already enumerated.
    /// Patterns skipped here stay flagged until the next cursor reset, so
    /// the cursor may advance past them permanently.
    pub fn head(&mut self, mut flagged: impl FnMut(usize) -> bool) -> Option<usize> {
        while let Some(&d) = self.sorted_order.get(self.next_ptr) {
            if !flagged(d) {
                return Some(d);
            }
            self.next_ptr += 1;
        }
        None
    }
}
