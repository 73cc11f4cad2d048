//! Banded LU solver and matrix-structure diagnostics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::assembly::{GridFunction, OperatorMatrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Seed used by the randomized checks unless the caller supplies one.
pub const DEFAULT_SEED: u64 = 0x5eed_2017_0a11;

/// Pivots below this fraction of `‖A‖∞` are treated as singular.
pub const SINGULAR_PIVOT_RATIO: f64 = 1e-14;

/// Largest dimension for which the inverse is materialised densely.
pub const DENSE_INVERSE_CAP: usize = 512;

/// Largest dimension for which the symmetrised spectrum is computed.
pub const EIGEN_CAP: usize = 64;

/// LU factors of a banded matrix with partial pivoting.
///
/// Column-major LAPACK `gbtrf` layout: `kl` extra rows hold the fill-in that
/// row interchanges push into the upper band.
#[derive(Debug, Clone)]
pub struct BandedLu<T> {
    n: usize,
    kl: usize,
    ku: usize,
    ab: Vec<T>,
    pivots: Vec<usize>,
}

impl<T: Real> BandedLu<T> {
    fn ldab(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    fn idx(&self, row: usize, col: usize) -> usize {
        (self.kl + self.ku + row - col) + col * self.ldab()
    }

    /// Factors `matrix`; the reduced (unknown-only) part is used.
    pub fn factor(matrix: &OperatorMatrix<T>) -> Result<Self> {
        let n = matrix.dim();
        let p = matrix.bandwidth();
        let mut lu = BandedLu { n, kl: p, ku: p, ab: vec![T::zero(); (3 * p + 1) * n], pivots: vec![0; n] };
        for row in 0..n {
            for (col, w) in matrix.row_entries(row) {
                let k = lu.idx(row, col);
                lu.ab[k] = w;
            }
        }
        let threshold = T::lit(SINGULAR_PIVOT_RATIO) * matrix.norm_inf();
        lu.eliminate(threshold)?;
        Ok(lu)
    }

    fn eliminate(&mut self, threshold: T) -> Result<()> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let kv = kl + ku;
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut best = 0;
            let mut best_abs = T::zero();
            for ii in 0..=km {
                let v = self.ab[self.idx(j + ii, j)].abs();
                if v > best_abs {
                    best_abs = v;
                    best = ii;
                }
            }
            if !(best_abs > threshold) {
                return Err(Error::Singular {
                    row: j,
                    pivot: best_abs.to_f64_lossy(),
                    threshold: threshold.to_f64_lossy(),
                });
            }
            self.pivots[j] = j + best;
            ju = ju.max((j + ku + best).min(n - 1));
            if best != 0 {
                for c in j..=ju {
                    let a = self.idx(j, c);
                    let b = self.idx(j + best, c);
                    self.ab.swap(a, b);
                }
            }
            let pivot = self.ab[self.idx(j, j)];
            for ii in 1..=km {
                let k = self.idx(j + ii, j);
                self.ab[k] = self.ab[k] / pivot;
            }
            for c in j + 1..=ju {
                let t = self.ab[self.idx(j, c)];
                if t == T::zero() {
                    continue;
                }
                for ii in 1..=km {
                    // row j + ii stays within the band because c − (j + ii) ≤ kv
                    debug_assert!(c <= j + ii + kv);
                    let l = self.ab[self.idx(j + ii, j)];
                    let k = self.idx(j + ii, c);
                    self.ab[k] = self.ab[k] - l * t;
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>> {
        if rhs.len() != self.n {
            return Err(Error::Shape { expected: self.n, actual: rhs.len() });
        }
        let n = self.n;
        let kv = self.kl + self.ku;
        let mut b = rhs.to_vec();
        for j in 0..n {
            b.swap(j, self.pivots[j]);
            let km = self.kl.min(n - 1 - j);
            let bj = b[j];
            if bj != T::zero() {
                for ii in 1..=km {
                    b[j + ii] = b[j + ii] - self.ab[self.idx(j + ii, j)] * bj;
                }
            }
        }
        for j in (0..n).rev() {
            b[j] = b[j] / self.ab[self.idx(j, j)];
            let bj = b[j];
            for r in j.saturating_sub(kv)..j {
                b[r] = b[r] - self.ab[self.idx(r, j)] * bj;
            }
        }
        Ok(b)
    }
}

/// Reduced system `A u = rhs` over the interior unknowns.
#[derive(Debug, Clone)]
pub struct BandedSystem<'a, T> {
    pub matrix: &'a OperatorMatrix<T>,
    pub rhs: Vec<T>,
}

impl<'a, T: Real> BandedSystem<'a, T> {
    pub fn new(matrix: &'a OperatorMatrix<T>, rhs: Vec<T>) -> Result<Self> {
        if rhs.len() != matrix.dim() {
            return Err(Error::Shape { expected: matrix.dim(), actual: rhs.len() });
        }
        Ok(BandedSystem { matrix, rhs })
    }
}

/// Solves the reduced system and scatters the result into a grid function
/// whose eliminated nodes are zero.
pub fn solve<T: Real>(system: &BandedSystem<'_, T>) -> Result<GridFunction<T>> {
    let lu = BandedLu::factor(system.matrix)?;
    let x = lu.solve(&system.rhs)?;
    let m = system.matrix;
    let (gl, gr) = m.ghosts();
    let mut u = GridFunction::zeros(*m.mesh(), gl, gr);
    for (row, v) in x.into_iter().enumerate() {
        u.set(m.node_of_row(row), v);
    }
    Ok(u)
}

/// Pass/fail entry of a diagnostic report; serialises as `{check, value, threshold, pass}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub check: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_least(check: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check { check: check.into(), value, threshold, pass: value >= threshold }
    }

    pub fn greater(check: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check { check: check.into(), value, threshold, pass: value > threshold }
    }

    pub fn at_most(check: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check { check: check.into(), value, threshold, pass: value <= threshold }
    }
}

/// `‖A − Aᵀ‖∞ / ‖A‖∞` of the reduced matrix.
pub fn symmetry_defect<T: Real>(matrix: &OperatorMatrix<T>) -> T {
    let norm = matrix.norm_inf();
    if norm == T::zero() {
        return T::zero();
    }
    let worst = (0..matrix.dim())
        .map(|row| matrix.row_entries(row).fold(T::zero(), |s, (col, w)| s + (w - matrix.get(col, row)).abs()))
        .fold(T::zero(), T::max);
    // transposed entries outside this row's band are zero only if the band is symmetric
    worst / norm
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefinitenessReport {
    pub trials: usize,
    pub seed: u64,
    /// Smallest Rayleigh quotient `vᵀAv / vᵀv` over the trials.
    pub min_rayleigh: f64,
    pub positive_trials: usize,
    /// Smallest eigenvalue of `(A + Aᵀ)/2`, for dimensions up to [`EIGEN_CAP`].
    /// Reported only: the transitional rows are not symmetric, and the
    /// symmetric part of a coupled matrix can be indefinite on fine meshes.
    pub min_symmetric_eigenvalue: Option<f64>,
    pub checks: Vec<Check>,
}

impl DefinitenessReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub fn positive_definiteness_check<T: Real>(matrix: &OperatorMatrix<T>, trials: usize, seed: u64) -> DefinitenessReport {
    let n = matrix.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_rayleigh = f64::INFINITY;
    let mut positive = 0;
    for _ in 0..trials {
        let v: Vec<T> = (0..n).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect();
        let av = matrix.matvec(&v).expect("vector sized to the matrix");
        let quad: T = v.iter().zip(&av).map(|(a, b)| *a * *b).sum();
        let norm2: T = v.iter().map(|a| *a * *a).sum();
        if quad > T::zero() {
            positive += 1;
        }
        let q = if norm2 > T::zero() { (quad / norm2).to_f64_lossy() } else { 0.0 };
        min_rayleigh = min_rayleigh.min(q);
    }
    if trials == 0 {
        min_rayleigh = f64::NAN;
    }
    let min_eig = (n <= EIGEN_CAP && n > 0).then(|| smallest_symmetric_eigenvalue(matrix).to_f64_lossy());
    let checks = vec![Check {
        check: "quadratic_form_positive".into(),
        value: min_rayleigh,
        threshold: 0.0,
        pass: trials > 0 && positive == trials,
    }];
    DefinitenessReport { trials, seed, min_rayleigh, positive_trials: positive, min_symmetric_eigenvalue: min_eig, checks }
}

/// Smallest eigenvalue of `(A + Aᵀ)/2` by Householder tridiagonalisation and
/// Sturm-sequence bisection.
pub fn smallest_symmetric_eigenvalue<T: Real>(matrix: &OperatorMatrix<T>) -> T {
    let n = matrix.dim();
    let half = T::lit(0.5);
    let mut s: Vec<Vec<T>> = (0..n)
        .map(|i| (0..n).map(|j| half * (matrix.get(i, j) + matrix.get(j, i))).collect())
        .collect();
    let (diag, off) = tridiagonalize(&mut s);
    sturm_smallest(&diag, &off)
}

/// Reduces a dense symmetric matrix in place; returns diagonal and sub-diagonal.
fn tridiagonalize<T: Real>(a: &mut [Vec<T>]) -> (Vec<T>, Vec<T>) {
    let n = a.len();
    for k in 0..n.saturating_sub(2) {
        let alpha_sq: T = (k + 1..n).map(|i| a[i][k] * a[i][k]).sum();
        if alpha_sq == T::zero() {
            continue;
        }
        let x0 = a[k + 1][k];
        let alpha = if x0 >= T::zero() { -alpha_sq.sqrt() } else { alpha_sq.sqrt() };
        let mut v = vec![T::zero(); n];
        v[k + 1] = x0 - alpha;
        for i in k + 2..n {
            v[i] = a[i][k];
        }
        let vnorm2: T = v.iter().map(|x| *x * *x).sum();
        if vnorm2 == T::zero() {
            continue;
        }
        // A ← H A H with H = I − 2vvᵀ/(vᵀv)
        let two = T::lit(2.0);
        let p: Vec<T> = (0..n).map(|i| (k + 1..n).map(|j| a[i][j] * v[j]).sum::<T>() * two / vnorm2).collect();
        let kappa: T = (k + 1..n).map(|i| v[i] * p[i]).sum::<T>() / vnorm2;
        let q: Vec<T> = (0..n).map(|i| p[i] - kappa * v[i]).collect();
        for i in 0..n {
            for j in 0..n {
                a[i][j] = a[i][j] - v[i] * q[j] - q[i] * v[j];
            }
        }
    }
    let diag = (0..n).map(|i| a[i][i]).collect();
    let off = (1..n).map(|i| a[i][i - 1]).collect();
    (diag, off)
}

/// Number of eigenvalues of the symmetric tridiagonal matrix below `x`.
fn sturm_count<T: Real>(diag: &[T], off: &[T], x: T) -> usize {
    let tiny = T::min_positive_value().sqrt();
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < T::zero() {
        count += 1;
    }
    for i in 1..diag.len() {
        let denom = if q.abs() < tiny { tiny } else { q };
        q = diag[i] - x - off[i - 1] * off[i - 1] / denom;
        if q < T::zero() {
            count += 1;
        }
    }
    count
}

fn sturm_smallest<T: Real>(diag: &[T], off: &[T]) -> T {
    let n = diag.len();
    // Gershgorin interval
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for i in 0..n {
        let mut radius = T::zero();
        if i > 0 {
            radius = radius + off[i - 1].abs();
        }
        if i + 1 < n {
            radius = radius + off[i].abs();
        }
        lo = lo.min(diag[i] - radius);
        hi = hi.max(diag[i] + radius);
    }
    for _ in 0..200 {
        let mid = T::lit(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    T::lit(0.5) * (lo + hi)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InversePositivityReport {
    pub min_entry: f64,
    pub inverse_norm_inf: f64,
    pub threshold: f64,
    pub pass: bool,
    /// `true` when the inverse was materialised, `false` when streamed by columns.
    pub dense: bool,
}

/// Checks `A⁻¹ ≥ 0` entrywise, up to `−1e−12·‖A⁻¹‖∞`.
pub fn inverse_positivity_check<T: Real>(matrix: &OperatorMatrix<T>) -> Result<InversePositivityReport> {
    let n = matrix.dim();
    let lu = BandedLu::factor(matrix)?;
    let dense = n <= DENSE_INVERSE_CAP;
    let mut row_sums = vec![T::zero(); n];
    let mut min_entry = T::infinity();
    let mut stored: Vec<Vec<T>> = Vec::new();
    let mut e = vec![T::zero(); n];
    for col in 0..n {
        e[col] = T::one();
        let x = lu.solve(&e)?;
        e[col] = T::zero();
        for (sum, v) in row_sums.iter_mut().zip(&x) {
            *sum = *sum + v.abs();
            min_entry = min_entry.min(*v);
        }
        if dense {
            stored.push(x);
        }
    }
    let norm = row_sums.into_iter().fold(T::zero(), T::max);
    let threshold = -T::lit(1e-12) * norm;
    Ok(InversePositivityReport {
        min_entry: min_entry.to_f64_lossy(),
        inverse_norm_inf: norm.to_f64_lossy(),
        threshold: threshold.to_f64_lossy(),
        pass: min_entry >= threshold,
        dense,
    })
}
