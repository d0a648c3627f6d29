//! Per-level child enumeration for the tree search.
//!
//! A [`LevelEnum`] is created each time the search enters a tree level
//! (one antenna row of the triangular model) and hands out that node's
//! children one at a time via [`LevelEnum::next`]. Three strategies:
//!
//! * **Hybrid** — two independently sorted streams are merged: the
//!   channel stream (zig-zag enumeration around the unconstrained
//!   per-level estimate `z`, ascending in the channel increment `M_C`)
//!   and the a-priori stream (pre-sorted metric table, ascending in
//!   `M_A`). Each step compares the two heads' *total* metrics and emits
//!   the smaller one (ties prefer the channel head). Emitted symbols are
//!   flagged so both streams skip them. The emitted order is generally
//!   *not* ascending in total metric, so the sibling pruning bound is
//!   taken from the two heads instead: `M_C(head_C) + M_A(head_A)` plus
//!   the parent metric never exceeds the total metric of any symbol the
//!   level has not yet emitted.
//! * **Full-sort** — all `2^q` total increments are computed and sorted
//!   ascending (reference Schnorr-Euchner order); the emitted metric
//!   itself is a valid sibling bound.
//! * **Channel-only** — zig-zag order alone. A-priori costs still enter
//!   the emitted path metric, but the order and the sibling bound ignore
//!   them, so pruning is only exact when all a-priori LLRs are zero.

use num_complex::Complex64;

use crate::apriori::AprioriTable;
use crate::constellation::{Constellation, FlagMask};
use crate::detector::EnumMode;

/// One emitted child node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Child {
    /// Symbol index of the child on this level.
    pub symbol: usize,
    /// Full path metric of the child: parent metric + `M_C` + `M_A`.
    pub m_p: f64,
    /// Lower bound on the full path metric of every child this level has
    /// not emitted before this call (including the one just emitted).
    pub sibl_bound: f64,
}

/// Enumeration state of one visited tree node.
#[derive(Debug, Clone)]
pub struct LevelEnum {
    mode: EnumMode,
    /// Symbols already emitted (shared by both hybrid streams).
    flags: FlagMask,
    /// A-priori metrics of this antenna, cursor rewound.
    table: AprioriTable,
    /// Full-sort emission order (unused by the other modes).
    sorted: Vec<usize>,
    cursor: usize,
    /// Zig-zag reference: unconstrained estimate `fixed / r_diag`.
    z: Complex64,
    /// Interference-reduced observation `ỹ_i − Σ_{j>i} R_{i,j} s_j`.
    fixed: Complex64,
    r_diag: f64,
    /// Channel-increment weight (`1/N_0`, or 1 in normalized mode).
    w_c: f64,
    /// Path metric of the parent node `M_P(s^(i+1))`.
    parent: f64,
}

impl LevelEnum {
    /// Opens enumeration of one node's children.
    ///
    /// `table` must already carry the metric scale the detector runs in
    /// (its values are added to `w_c`-weighted channel increments as-is).
    pub fn new(
        mode: EnumMode,
        con: &Constellation,
        table: &AprioriTable,
        fixed: Complex64,
        r_diag: f64,
        w_c: f64,
        parent: f64,
    ) -> Self {
        let mut table = table.clone();
        table.reset_cursor();
        let mut this = LevelEnum {
            mode,
            flags: FlagMask::new(),
            table,
            sorted: Vec::new(),
            cursor: 0,
            z: fixed / r_diag,
            fixed,
            r_diag,
            w_c,
            parent,
        };
        if mode == EnumMode::FullSortSe {
            let mut order: Vec<usize> = (0..con.len()).collect();
            let inc: Vec<f64> =
                order.iter().map(|&c| this.m_c(con, c) + this.m_a(con, c)).collect();
            order.sort_unstable_by(|&a, &b| inc[a].partial_cmp(&inc[b]).unwrap().then(a.cmp(&b)));
            this.sorted = order;
        }
        this
    }

    /// Channel increment of candidate `c`.
    fn m_c(&self, con: &Constellation, c: usize) -> f64 {
        self.w_c * (self.fixed - self.r_diag * con.point(c)).norm_sqr()
    }

    /// A-priori increment of candidate `c`.
    fn m_a(&self, con: &Constellation, c: usize) -> f64 {
        self.table.metric(con.pattern(c))
    }

    /// Full path metric of candidate `c`.
    fn m_p(&self, con: &Constellation, c: usize) -> f64 {
        self.parent + self.m_c(con, c) + self.m_a(con, c)
    }

    /// Emits the next child, or `None` once all `2^q` are exhausted.
    pub fn next(&mut self, con: &Constellation) -> Option<Child> {
        match self.mode {
            EnumMode::FullSortSe => {
                let &c = self.sorted.get(self.cursor)?;
                self.cursor += 1;
                let m_p = self.m_p(con, c);
                Some(Child { symbol: c, m_p, sibl_bound: m_p })
            }
            EnumMode::ChannelOnly => {
                let c = con.zigzag_next(self.z, &self.flags)?;
                self.flags.set(c);
                let m_p = self.m_p(con, c);
                Some(Child { symbol: c, m_p, sibl_bound: m_p })
            }
            EnumMode::Hybrid => {
                let head_c = con.zigzag_next(self.z, &self.flags);
                let flags = &self.flags;
                let head_a = self
                    .table
                    .head(|d| flags.is_set(con.index_of(d)))
                    .map(|d| con.index_of(d));
                let (head_c, head_a) = match (head_c, head_a) {
                    (Some(c), Some(a)) => (c, a),
                    (None, None) => return None,
                    // Both streams skip the same flag set, so they
                    // exhaust together.
                    _ => unreachable!("hybrid streams out of sync"),
                };
                let (pick, bound) = if head_c == head_a {
                    (head_c, self.m_p(con, head_c))
                } else {
                    let m_p_c = self.m_p(con, head_c);
                    let m_p_a = self.m_p(con, head_a);
                    let bound = self.parent + self.m_c(con, head_c) + self.m_a(con, head_a);
                    (if m_p_c <= m_p_a { head_c } else { head_a }, bound)
                };
                self.flags.set(pick);
                Some(Child { symbol: pick, m_p: self.m_p(con, pick), sibl_bound: bound })
            }
        }
    }
}
