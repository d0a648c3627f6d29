//! Soft-input soft-output single tree-search (STS) sphere decoder.
//!
//! One depth-first traversal of the detection tree yields both the
//! max-log MAP hypothesis (metric `λ`, bit matrix `x^MAP`) and, for every
//! transmitted bit, the metric of the best counter-hypothesis (the
//! cheapest leaf whose bit differs from the MAP bit). The extrinsic LLR
//! of bit `(i, b)` is
//!
//! ```text
//! L^E_{i,b} = (Λ̄_{i,b} − λ) · x^MAP_{i,b},
//! Λ̄_{i,b}  = λ̄_{i,b} − L^A_{i,b} · x^MAP_{i,b},
//! ```
//!
//! where `λ̄_{i,b}` is the a-posteriori counter-hypothesis metric (the
//! minimum path metric over leaves with a flipped bit) and the `L^A` term
//! removes the bit's own a-priori contribution.
//!
//! # Internal bookkeeping domain
//!
//! The search stores `λ̄` (a-posteriori) and derives `Λ̄` as a view. The
//! distinction matters when a leaf improves the MAP hypothesis and flips
//! some MAP bit: an extrinsic value recorded earlier refers to the old
//! bit sign and keeping it in a running `min` can undershoot the true
//! counter-hypothesis metric whenever `L^A_{i,b} · x^MAP,old_{i,b} > 0`.
//! In the a-posteriori domain the update is exact: every visited leaf has
//! `M_P ≥ λ`, so a flipped bit's counter metric becomes the old `λ`
//! itself and a plain `min` never keeps a stale value. `λ` and every
//! stored `λ̄` entry are monotonically nonincreasing; the extrinsic view
//! may legitimately rise when a MAP bit flips.
//!
//! # Clipping
//!
//! With a finite `l_e_max`, counter metrics are clamped into the band
//! `[λ − L^E_max, λ + L^E_max]` (two-sided, the strict variant). The
//! clamp is evaluated lazily against the *current* `λ` every time a
//! value is read — for a pruning radius or for the final output — which
//! is equivalent to eagerly re-clamping all entries whenever `λ`
//! improves, and keeps the output exactly `clamp(unclipped L^E,
//! ±L^E_max)`.

use num_complex::Complex64;

use crate::apriori::AprioriTable;
use crate::constellation::Constellation;
use crate::enumerate::LevelEnum;
use crate::llr::LlrFrame;
use crate::mimo::CMat;
use crate::Error;

/// Child-enumeration strategy of the tree search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnumMode {
    /// Merge of the channel-metric stream (zig-zag around the unconstrained
    /// per-level estimate) and the a-priori-metric stream (pre-sorted
    /// table); each step picks the head with the smaller total metric.
    /// Admits the two-head pruning bound on the sibling check.
    Hybrid,
    /// Reference Schnorr-Euchner order: all `2^q` total increments of a
    /// level are computed and fully sorted. Baseline for node counts.
    FullSortSe,
    /// Channel-metric order alone, ignoring a-priori metrics during
    /// enumeration (they still enter the path metric). Max-log exact only
    /// when all a-priori LLRs are zero.
    ChannelOnly,
}

impl std::fmt::Display for EnumMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EnumMode::Hybrid => "hybrid",
            EnumMode::FullSortSe => "se-sort",
            EnumMode::ChannelOnly => "channel-only",
        })
    }
}

impl std::str::FromStr for EnumMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "hybrid" => Ok(EnumMode::Hybrid),
            "se-sort" => Ok(EnumMode::FullSortSe),
            "channel-only" => Ok(EnumMode::ChannelOnly),
            other => Err(Error::Parse(format!(
                "unknown enumeration mode `{other}` (expected hybrid, se-sort or channel-only)"
            ))),
        }
    }
}

/// Static configuration of one detector instance.
#[derive(Debug, Clone)]
pub struct DetectorConfig {
    /// Extrinsic-LLR clipping level `L^E_max`; `f64::INFINITY` disables
    /// clipping. Must be positive, in the same metric scale the detector
    /// runs in (see `use_normalized_metrics`).
    pub l_e_max: f64,
    /// Child-enumeration strategy.
    pub enum_mode: EnumMode,
    /// When true, metrics are not divided by `N_0`: channel increments are
    /// plain squared distances and a-priori increments are scaled by
    /// `N_0`. Every metric-valued output (λ, L^E) is then `N_0` times its
    /// unnormalized counterpart; decisions and node counts are identical.
    pub use_normalized_metrics: bool,
    /// Optional cap on the number of examined nodes; when hit, the search
    /// stops and returns its best-so-far state flagged as incomplete.
    pub node_budget: Option<u64>,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            l_e_max: f64::INFINITY,
            enum_mode: EnumMode::Hybrid,
            use_normalized_metrics: false,
            node_budget: None,
        }
    }
}

impl DetectorConfig {
    /// Rejects non-positive (or NaN) clipping levels.
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.l_e_max > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "l_e_max must be positive, got {}",
                self.l_e_max
            )));
        }
        Ok(())
    }
}

/// Output of one detection call (and of the exhaustive reference).
#[derive(Debug, Clone)]
pub struct DetectionResult {
    /// Extrinsic LLRs `L^E_{i,b}`, rows in tree-level antenna order.
    pub l_e: LlrFrame,
    /// MAP bit matrix as one unipolar label pattern per antenna
    /// (bit `b` of `x_map[i]` is the MAP decision for bit `(i, b)`).
    pub x_map: Vec<usize>,
    /// MAP hypothesis metric `λ`.
    pub lambda_map: f64,
    /// Number of examined nodes (nodes that received a pruning check).
    pub n_en: u64,
    /// False only if a `node_budget` stopped the search early.
    pub completed: bool,
}

impl DetectionResult {
    /// Unipolar MAP bit `(i, b)`.
    pub fn x_bit(&self, i: usize, b: usize) -> u8 {
        ((self.x_map[i] >> b) & 1) as u8
    }

    /// Bipolar MAP bit `(i, b)`: `x = 1 − 2d`.
    pub fn x_bipolar(&self, i: usize, b: usize) -> f64 {
        1.0 - 2.0 * f64::from(self.x_bit(i, b))
    }
}

/// Two-sided clamp of a counter-hypothesis metric into the band
/// `[λ − L^E_max, λ + L^E_max]`, which bounds the resulting extrinsic
/// LLR magnitude by `L^E_max`. Infinite `l_e_max` passes the value
/// through untouched (even while `λ` is still infinite).
pub fn clip(lam_bar: f64, lambda: f64, l_e_max: f64) -> f64 {
    if l_e_max.is_infinite() {
        return lam_bar;
    }
    lam_bar.min(lambda + l_e_max).max(lambda - l_e_max)
}

/// Read-only snapshot of the search state, handed to the probe after
/// every examined node. `lam_bar` holds the stored a-posteriori
/// counter-hypothesis metrics, row-major over `(antenna, bit)`.
#[derive(Debug)]
pub struct SearchProbe<'a> {
    pub lambda: f64,
    pub lam_bar: &'a [f64],
    pub n_en: u64,
}

/// Live state of one depth-first traversal.
struct SearchState<'a> {
    y_tilde: &'a [Complex64],
    r: &'a CMat,
    con: &'a Constellation,
    /// A-priori LLRs, pre-multiplied by the a-priori metric weight.
    la: LlrFrame,
    /// Per-antenna a-priori metric tables (same scale as `la`).
    tables: Vec<AprioriTable>,
    mode: EnumMode,
    /// Channel-increment weight: `1/N_0`, or 1 in normalized mode.
    w_c: f64,
    l_e_max: f64,
    node_budget: u64,
    mt: usize,
    q: usize,
    /// Current MAP metric `λ`; +∞ until the first leaf.
    lambda: f64,
    /// Current MAP label pattern per antenna (meaningless while `λ` is
    /// still infinite).
    x_map: Vec<usize>,
    /// Stored a-posteriori counter metrics `λ̄_{i,b}`, row-major.
    lam_bar: Vec<f64>,
    /// Symbol index fixed on each row; rows ≥ the active level are live.
    path: Vec<usize>,
    n_en: u64,
    aborted: bool,
}

impl<'a> SearchState<'a> {
    /// Interference-reduced observation of `row` under the current path:
    /// `ỹ_i − Σ_{j>i} R_{i,j} s_j`.
    fn reduced(&self, row: usize) -> Complex64 {
        let mut fixed = self.y_tilde[row];
        for j in row + 1..self.mt {
            fixed -= self.r.get(row, j) * self.con.point(self.path[j]);
        }
        fixed
    }

    /// Pruning radius entry of bit `(i, b)`: the stored counter metric,
    /// clamped into the `λ ± L^E_max` band in the extrinsic domain and
    /// mapped back by re-adding the bit's a-priori term.
    fn lam_bar_prune(&self, i: usize, b: usize) -> f64 {
        let la_x = self.la.get(i, b) * (1.0 - 2.0 * ((self.x_map[i] >> b) & 1) as f64);
        clip(self.lam_bar[i * self.q + b] - la_x, self.lambda, self.l_e_max) + la_x
    }

    /// Pruning radius at `level`: the maximum metric the search still
    /// wants to improve. Bits on rows below `level` (and, for the sibling
    /// variant, on `level` itself) are free and contribute with both
    /// values; bits fixed by the current path contribute only where the
    /// path disagrees with the MAP; `λ` itself always participates.
    fn radius(&self, level: usize, sibling: bool) -> f64 {
        let mut radius = self.lambda;
        for i in 0..self.mt {
            let free = i < level || (sibling && i == level);
            let diff = if free { 0 } else { self.con.pattern(self.path[i]) ^ self.x_map[i] };
            for b in 0..self.q {
                if free || (diff >> b) & 1 == 1 {
                    radius = radius.max(self.lam_bar_prune(i, b));
                }
            }
        }
        radius
    }

    /// Folds a reached leaf into the MAP / counter-hypothesis state.
    ///
    /// Counter metrics are kept in the a-posteriori domain: a
    /// non-improving leaf min-updates every differing bit with its own
    /// metric; an improving leaf first min-updates every *flipping* bit
    /// with the old `λ` (the cheapest visited leaf on what is now the
    /// counter side), then becomes the MAP. Both `λ` and every stored
    /// entry are monotonically nonincreasing.
    fn leaf_update(&mut self, m_p: f64) {
        if m_p < self.lambda {
            for i in 0..self.mt {
                let diff = self.con.pattern(self.path[i]) ^ self.x_map[i];
                for b in 0..self.q {
                    if (diff >> b) & 1 == 1 {
                        let e = &mut self.lam_bar[i * self.q + b];
                        *e = e.min(self.lambda);
                    }
                }
            }
            self.lambda = m_p;
            for i in 0..self.mt {
                self.x_map[i] = self.con.pattern(self.path[i]);
            }
        } else {
            for i in 0..self.mt {
                let diff = self.con.pattern(self.path[i]) ^ self.x_map[i];
                for b in 0..self.q {
                    if (diff >> b) & 1 == 1 {
                        let e = &mut self.lam_bar[i * self.q + b];
                        *e = e.min(m_p);
                    }
                }
            }
        }
    }

    /// Depth-first expansion of one level under the current path.
    ///
    /// Every emitted child is examined exactly once: it increments
    /// `n_en`, gets the subtree pruning check, and — only when pruned —
    /// the sibling check that may stop the level early. A child that
    /// survives is descended into (or folded in, at the leaf level).
    fn expand(&mut self, level: usize, parent: f64, probe: &mut impl FnMut(&SearchProbe)) {
        let mut en = LevelEnum::new(
            self.mode,
            self.con,
            &self.tables[level],
            self.reduced(level),
            self.r.get(level, level).re,
            self.w_c,
            parent,
        );
        loop {
            if self.n_en >= self.node_budget {
                self.aborted = true;
                return;
            }
            let Some(child) = en.next(self.con) else { break };
            self.n_en += 1;
            self.path[level] = child.symbol;
            let mut stop_level = false;
            if child.m_p >= self.radius(level, false) {
                stop_level = child.sibl_bound >= self.radius(level, true);
            } else if level == 0 {
                self.leaf_update(child.m_p);
            } else {
                self.expand(level - 1, child.m_p, probe);
                if self.aborted {
                    return;
                }
            }
            probe(&SearchProbe { lambda: self.lambda, lam_bar: &self.lam_bar, n_en: self.n_en });
            if stop_level {
                break;
            }
        }
    }

    /// Assembles the outputs. The extrinsic LLR is clamped in the LLR
    /// domain, so `|L^E| ≤ L^E_max` holds exactly; an infinite stored
    /// counter metric (bit never countered) saturates at `±L^E_max`
    /// (or stays infinite when unclipped, which a completed unclipped
    /// search never produces).
    fn into_result(self) -> DetectionResult {
        let completed = !self.aborted;
        if !self.lambda.is_finite() {
            // No leaf reached (exhausted node budget): nothing to report.
            return DetectionResult {
                l_e: LlrFrame::zeros(self.mt, self.q),
                x_map: vec![0; self.mt],
                lambda_map: self.lambda,
                n_en: self.n_en,
                completed,
            };
        }
        let mut l_e = LlrFrame::zeros(self.mt, self.q);
        for i in 0..self.mt {
            for b in 0..self.q {
                let x = 1.0 - 2.0 * ((self.x_map[i] >> b) & 1) as f64;
                let unclipped = (self.lam_bar[i * self.q + b] - self.la.get(i, b) * x
                    - self.lambda)
                    * x;
                l_e.set(i, b, unclipped.min(self.l_e_max).max(-self.l_e_max));
            }
        }
        DetectionResult {
            l_e,
            x_map: self.x_map,
            lambda_map: self.lambda,
            n_en: self.n_en,
            completed,
        }
    }
}

/// Soft-input soft-output single tree-search detection on the triangular
/// model `ỹ = R s + Q^H n`.
///
/// `y_tilde` and `r` come from (sorted) QR preprocessing; `l_a` holds the
/// a-priori LLRs in tree-level antenna order (the caller applies and
/// undoes any detection-order permutation). Returns the max-log MAP bit
/// matrix, its metric, the extrinsic LLRs and the examined-node count.
pub fn detect(
    y_tilde: &[Complex64],
    r: &CMat,
    con: &Constellation,
    l_a: &LlrFrame,
    n0: f64,
    cfg: &DetectorConfig,
) -> Result<DetectionResult, Error> {
    detect_with_probe(y_tilde, r, con, l_a, n0, cfg, |_| {})
}

/// [`detect`] with a state probe invoked after every examined node; test
/// instrumentation for the monotonicity of `λ` and the stored counter
/// metrics.
pub fn detect_with_probe(
    y_tilde: &[Complex64],
    r: &CMat,
    con: &Constellation,
    l_a: &LlrFrame,
    n0: f64,
    cfg: &DetectorConfig,
    mut probe: impl FnMut(&SearchProbe),
) -> Result<DetectionResult, Error> {
    cfg.validate()?;
    let mt = r.rows();
    assert_eq!(r.cols(), mt);
    assert_eq!(y_tilde.len(), mt);
    assert_eq!(l_a.mt(), mt);
    assert_eq!(l_a.q(), con.q());
    if !(n0 > 0.0) {
        return Err(Error::InvalidConfig(format!("n0 must be positive, got {n0}")));
    }
    let q = con.q();
    let (w_c, w_a) =
        if cfg.use_normalized_metrics { (1.0, n0) } else { (1.0 / n0, 1.0) };
    let la = LlrFrame::from_rows(mt, q, l_a.as_slice().iter().map(|v| w_a * v).collect());
    let tables = (0..mt).map(|i| AprioriTable::build(la.row(i))).collect();

    let mut state = SearchState {
        y_tilde,
        r,
        con,
        la,
        tables,
        mode: cfg.enum_mode,
        w_c,
        l_e_max: cfg.l_e_max,
        node_budget: cfg.node_budget.unwrap_or(u64::MAX),
        mt,
        q,
        lambda: f64::INFINITY,
        x_map: vec![0; mt],
        lam_bar: vec![f64::INFINITY; mt * q],
        path: vec![0; mt],
        n_en: 0,
        aborted: false,
    };
    state.expand(mt - 1, 0.0, &mut probe);
    Ok(state.into_result())
}
