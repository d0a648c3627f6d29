//! Flat-fading MIMO channel model and receiver preprocessing.
//!
//! The transmission model is `y = H s + n` with an `mr × mt` channel
//! matrix of i.i.d. circularly symmetric complex Gaussian entries of unit
//! variance and complex noise of variance `n0` per receive antenna.
//!
//! Preprocessing factorizes `H = Q R` (thin QR, `R` upper triangular with
//! real nonnegative diagonal) and rotates the observation to
//! `ỹ = Qᴴ y = R s + Qᴴ n`; the rotated noise keeps variance `n0`.
//! The sorted variant (SQRD) greedily picks, at each Gram-Schmidt step,
//! the remaining column with the smallest projection onto the orthogonal
//! complement of the columns chosen so far, so weak streams end up at
//! small diagonal indices (deep in the detection tree).

use num_complex::Complex64;
use rand::{Rng, RngExt as _};
use rand_distr::StandardNormal;

use crate::Error;

/// Pivot tolerance below which a column is treated as rank deficient.
const PIVOT_TOL: f64 = 1e-12;

/// A dense complex matrix in row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    /// Zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_rows(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix dimension mismatch");
        CMat { rows, cols, data }
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entry `(r, c)`.
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    /// Sets entry `(r, c)`.
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    /// Matrix-vector product `self · x`.
    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c) * x[c]).sum())
            .collect()
    }

    /// Conjugate-transpose times vector, `selfᴴ · x`.
    pub fn herm_mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.rows);
        (0..self.cols)
            .map(|c| (0..self.rows).map(|r| self.get(r, c).conj() * x[r]).sum())
            .collect()
    }

    fn col(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }
}

/// Result of (sorted) QR preprocessing.
///
/// `perm[j]` is the original antenna index detected on tree level `j`,
/// i.e. column `j` of `q`/`r` corresponds to column `perm[j]` of the
/// factorized channel matrix. Plain QR uses the identity permutation.
#[derive(Debug, Clone)]
pub struct QrFactors {
    /// Thin orthonormal factor, `mr × mt`.
    pub q: CMat,
    /// Upper-triangular factor with real nonnegative diagonal, `mt × mt`.
    pub r: CMat,
    /// Detection-order permutation of antenna indices.
    pub perm: Vec<usize>,
}

/// Draws an `mr × mt` channel matrix with i.i.d. unit-variance circularly
/// symmetric complex Gaussian entries.
pub fn sample_channel<R: Rng>(mr: usize, mt: usize, rng: &mut R) -> CMat {
    let s = 0.5_f64.sqrt();
    let mut h = CMat::zeros(mr, mt);
    for r in 0..mr {
        for c in 0..mt {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            h.set(r, c, Complex64::new(re * s, im * s));
        }
    }
    h
}

/// Transmits `s` over `h` and adds complex Gaussian noise of variance
/// `n0` per receive antenna; `n0 = 0` sends noiselessly.
pub fn transmit<R: Rng>(h: &CMat, s: &[Complex64], n0: f64, rng: &mut R) -> Vec<Complex64> {
    let mut y = h.mul_vec(s);
    if n0 > 0.0 {
        let sd = (n0 / 2.0).sqrt();
        for v in &mut y {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *v += Complex64::new(re * sd, im * sd);
        }
    }
    y
}

/// Chooses the next column for the Gram-Schmidt sweep.
///
/// `residual[c]` holds the squared norm of column `c` projected onto the
/// orthogonal complement of the already-chosen columns.
fn pick_column(sorted: bool, step: usize, chosen: &[bool], residual: &[f64]) -> usize {
    if !sorted {
        return step;
    }
    let mut best = usize::MAX;
    let mut best_v = f64::INFINITY;
    for (c, &r) in residual.iter().enumerate() {
        if !chosen[c] && r < best_v {
            best_v = r;
            best = c;
        }
    }
    best
}

fn factorize(h: &CMat, sorted: bool) -> Result<QrFactors, Error> {
    let (mr, mt) = (h.rows(), h.cols());
    assert!(mr >= mt, "need at least as many receive as transmit antennas");
    let mut q = CMat::zeros(mr, mt);
    let mut r = CMat::zeros(mt, mt);
    let mut perm = Vec::with_capacity(mt);
    let mut chosen = vec![false; mt];
    let mut residual: Vec<f64> = (0..mt).map(|c| h.col(c).iter().map(|v| v.norm_sqr()).sum()).collect();

    // Modified Gram-Schmidt over columns in (sorted) pick order, with one
    // reorthogonalization pass for numerical robustness.
    for j in 0..mt {
        let c = pick_column(sorted, j, &chosen, &residual);
        chosen[c] = true;
        perm.push(c);

        let mut v = h.col(c);
        for _pass in 0..2 {
            for k in 0..j {
                let proj: Complex64 = (0..mr).map(|i| q.get(i, k).conj() * v[i]).sum();
                for i in 0..mr {
                    let d = proj * q.get(i, k);
                    v[i] -= d;
                }
                let prev = r.get(k, j);
                r.set(k, j, prev + proj);
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm < PIVOT_TOL {
            return Err(Error::RankDeficient(norm));
        }
        r.set(j, j, Complex64::new(norm, 0.0));
        for i in 0..mr {
            q.set(i, j, v[i] / norm);
        }
        if sorted {
            for c2 in 0..mt {
                if !chosen[c2] {
                    let proj: Complex64 = (0..mr).map(|i| q.get(i, j).conj() * h.get(i, c2)).sum();
                    residual[c2] = (residual[c2] - proj.norm_sqr()).max(0.0);
                }
            }
        }
    }
    Ok(QrFactors { q, r, perm })
}

/// Plain QR decomposition (identity detection order).
pub fn qrd(h: &CMat) -> Result<QrFactors, Error> {
    factorize(h, false)
}

/// Sorted QR decomposition: minimum-residual-norm column first.
pub fn sqrd(h: &CMat) -> Result<QrFactors, Error> {
    factorize(h, true)
}

/// Rotates an observation into the triangular domain: `ỹ = Qᴴ y`.
pub fn preprocess(f: &QrFactors, y: &[Complex64]) -> Vec<Complex64> {
    f.q.herm_mul_vec(y)
}
