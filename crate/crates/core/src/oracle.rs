//! Exhaustive max-log MAP reference detector.
//!
//! Enumerates all `2^(q·mt)` symbol vectors and computes `λ`, `x^MAP`,
//! every counter-hypothesis metric and every extrinsic LLR directly from
//! their definitions. Intentionally shares no metric code with the tree
//! search (only the [`Constellation`] geometry and the I/O containers),
//! so agreement between the two is a genuine cross-check. Complexity is
//! exponential; instances are capped at `q·mt ≤ 20` tree bits.

use num_complex::Complex64;

use crate::constellation::Constellation;
use crate::detector::DetectionResult;
use crate::llr::LlrFrame;
use crate::mimo::CMat;
use crate::Error;

/// Largest `q·mt` the brute force accepts (2^20 vector evaluations).
pub const MAX_TREE_BITS: usize = 20;

/// Channel / a-priori metric weights: unnormalized metrics divide the
/// squared distance by `n0`, normalized metrics instead multiply the
/// a-priori term by `n0` (every metric then carries an `n0` factor).
fn weights(n0: f64, normalized: bool) -> (f64, f64) {
    if normalized {
        (1.0, n0)
    } else {
        (1.0 / n0, 1.0)
    }
}

/// A-priori cost of one antenna's symbol: `Σ_b |L^A_b|` over the bits
/// whose bipolar value disagrees with `sign(L^A_b)`, `sign(0) := +1`.
fn prior_cost(l_a: &LlrFrame, i: usize, pattern: usize) -> f64 {
    let mut m = 0.0;
    for b in 0..l_a.q() {
        let l = l_a.get(i, b);
        let favored_bit = usize::from(l < 0.0);
        if (pattern >> b) & 1 != favored_bit {
            m += l.abs();
        }
    }
    m
}

/// Full path metric of the symbol vector `idx` (one symbol index per
/// antenna), evaluated directly on the triangular model.
fn vector_metric(
    y_tilde: &[Complex64],
    r: &CMat,
    con: &Constellation,
    l_a: &LlrFrame,
    w_c: f64,
    w_a: f64,
    idx: &[usize],
) -> f64 {
    let mt = idx.len();
    let mut m = 0.0;
    for i in 0..mt {
        let mut res = y_tilde[i];
        for j in i..mt {
            res -= r.get(i, j) * con.point(idx[j]);
        }
        m += w_c * res.norm_sqr() + w_a * prior_cost(l_a, i, con.pattern(idx[i]));
    }
    m
}

/// Exhaustive max-log MAP detection: `λ = min M_P`, `x^MAP = argmin`,
/// `λ̄_{i,b} = min` over vectors with bit `(i, b)` flipped, and
/// `L^E_{i,b} = (λ̄ − λ)·x^MAP − w_a·L^A_{i,b}`.
///
/// Ties on the minimum keep the first vector in ascending vector-index
/// order. `n_en` is reported as the number of evaluated vectors.
pub fn exhaustive_map(
    y_tilde: &[Complex64],
    r: &CMat,
    con: &Constellation,
    l_a: &LlrFrame,
    n0: f64,
    normalized: bool,
) -> Result<DetectionResult, Error> {
    let mt = r.rows();
    assert_eq!(r.cols(), mt);
    assert_eq!(y_tilde.len(), mt);
    assert_eq!(l_a.mt(), mt);
    assert_eq!(l_a.q(), con.q());
    let q = con.q();
    if q * mt > MAX_TREE_BITS {
        return Err(Error::InvalidConfig(format!(
            "exhaustive reference needs q*mt <= {MAX_TREE_BITS}, got {}",
            q * mt
        )));
    }
    let (w_c, w_a) = weights(n0, normalized);

    let total = 1u64 << (q * mt);
    let sym_mask = (1usize << q) - 1;
    let mut idx = vec![0usize; mt];

    let mut lambda = f64::INFINITY;
    let mut best = vec![0usize; mt];
    // Minimum metric per (antenna, bit, bit value).
    let mut min_by_bit = vec![[f64::INFINITY; 2]; mt * q];

    for v in 0..total {
        for (i, slot) in idx.iter_mut().enumerate() {
            *slot = (v >> (q * i)) as usize & sym_mask;
        }
        let m = vector_metric(y_tilde, r, con, l_a, w_c, w_a, &idx);
        if m < lambda {
            lambda = m;
            best.copy_from_slice(&idx);
        }
        for i in 0..mt {
            let pattern = con.pattern(idx[i]);
            for b in 0..q {
                let e = &mut min_by_bit[i * q + b][(pattern >> b) & 1];
                *e = e.min(m);
            }
        }
    }

    let x_map: Vec<usize> = best.iter().map(|&s| con.pattern(s)).collect();
    let mut l_e = LlrFrame::zeros(mt, q);
    for i in 0..mt {
        for b in 0..q {
            let map_bit = (x_map[i] >> b) & 1;
            let x = 1.0 - 2.0 * map_bit as f64;
            let lam_bar = min_by_bit[i * q + b][1 - map_bit];
            l_e.set(i, b, (lam_bar - lambda) * x - w_a * l_a.get(i, b));
        }
    }

    Ok(DetectionResult { l_e, x_map, lambda_map: lambda, n_en: total, completed: true })
}

/// All `2^q` per-symbol metric increments at one tree node: for each
/// candidate symbol of antenna row `level`, given the fixed `tail`
/// symbols of rows `level+1..mt`, returns `(symbol index, M_C, M_A,
/// M_C + M_A)`. Test support for enumeration-order and pruning-bound
/// checks.
pub fn metric_table(
    y_tilde: &[Complex64],
    r: &CMat,
    con: &Constellation,
    l_a: &LlrFrame,
    n0: f64,
    normalized: bool,
    level: usize,
    tail: &[usize],
) -> Vec<(usize, f64, f64, f64)> {
    let mt = r.rows();
    assert!(level < mt);
    assert_eq!(tail.len(), mt - 1 - level);
    let (w_c, w_a) = weights(n0, normalized);

    let mut fixed = y_tilde[level];
    for (k, &s) in tail.iter().enumerate() {
        fixed -= r.get(level, level + 1 + k) * con.point(s);
    }
    (0..con.len())
        .map(|c| {
            let res = fixed - r.get(level, level) * con.point(c);
            let m_c = w_c * res.norm_sqr();
            let m_a = w_a * prior_cost(l_a, level, con.pattern(c));
            (c, m_c, m_a, m_c + m_a)
        })
        .collect()
}
