//! Dense factorizations: partial-pivoting LU, column-pivoted Householder QR and
//! a 1-norm condition estimator. Every factorization bumps a per-thread counter.

use std::cell::Cell;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative rank tolerance of the QR path: `|R_ii| > RANK_TOLERANCE · |R_00|`.
pub const RANK_TOLERANCE: f64 = 1e-12;

thread_local! {
    static FACTORIZATIONS: Cell<usize> = const { Cell::new(0) };
}

/// Number of factorizations performed on this thread since the last reset.
pub fn factorization_count() -> usize {
    FACTORIZATIONS.with(Cell::get)
}

pub fn reset_factorization_count() {
    FACTORIZATIONS.with(|c| c.set(0));
}

fn bump() {
    FACTORIZATIONS.with(|c| c.set(c.get() + 1));
}

pub fn norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Hager/Higham estimate of `‖A⁻¹‖₁` given solves with `A` and `Aᵀ`.
fn inverse_norm1_estimate(
    n: usize,
    solve: impl Fn(&DVector<f64>) -> DVector<f64>,
    solve_t: impl Fn(&DVector<f64>) -> DVector<f64>,
) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut est = 0.0;
    let mut last_j = usize::MAX;
    for _ in 0..5 {
        let y = solve(&x);
        est = y.lp_norm(1);
        let xi = y.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
        let z = solve_t(&xi);
        let j = z.iamax();
        if z[j].abs() <= z.dot(&x) || j == last_j {
            break;
        }
        last_j = j;
        x = DVector::zeros(n);
        x[j] = 1.0;
    }
    // alternating test vector guards against the estimator's known blind spots
    let alt = DVector::from_fn(n, |i, _| {
        let s = if i % 2 == 0 { 1.0 } else { -1.0 };
        s * (1.0 + i as f64 / (n.max(2) - 1) as f64)
    });
    let alt_est = 2.0 * solve(&alt).lp_norm(1) / (3.0 * n as f64);
    est.max(alt_est)
}

/// `PA = LU` with partial pivoting.
#[derive(Debug, Clone)]
pub struct DenseLu {
    lu: DMatrix<f64>,
    perm: Vec<usize>,
    norm1: f64,
}

impl DenseLu {
    /// Fails only on an exactly zero pivot or non-finite input.
    pub fn factor(a: &DMatrix<f64>) -> Result<Self> {
        bump();
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::InvalidArgument(format!("LU needs a square matrix, got {}x{}", n, a.ncols())));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix".into()));
        }
        let norm1 = norm1(a);
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (mut p, mut best) = (k, 0.0);
            for i in k..n {
                if lu[(i, k)].abs() > best {
                    best = lu[(i, k)].abs();
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(Error::SingularSystem { condition: f64::INFINITY });
            }
            if p != k {
                lu.swap_rows(p, k);
                perm.swap(p, k);
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let l = lu[(i, k)] / pivot;
                lu[(i, k)] = l;
                if l != 0.0 {
                    for j in k + 1..n {
                        lu[(i, j)] -= l * lu[(k, j)];
                    }
                }
            }
        }
        Ok(DenseLu { lu, perm, norm1 })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    fn solve_unchecked(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.dim();
        let mut x = DVector::from_fn(n, |i, _| b[self.perm[i]]);
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[(i, i)];
        }
        x
    }

    fn solve_transpose_unchecked(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.dim();
        // Aᵀ = Uᵀ Lᵀ P: solve Uᵀ w = b, Lᵀ z = w, then x = Pᵀ z
        let mut w = b.clone();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[(j, i)] * w[j]).sum();
            w[i] = (w[i] - s) / self.lu[(i, i)];
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.lu[(j, i)] * w[j]).sum();
            w[i] -= s;
        }
        let mut x = DVector::zeros(n);
        for i in 0..n {
            x[self.perm[i]] = w[i];
        }
        x
    }

    pub fn solve(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        let x = self.solve_unchecked(b);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularSystem { condition: self.condition_estimate() });
        }
        Ok(x)
    }

    pub fn solve_transpose(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        let x = self.solve_transpose_unchecked(b);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularSystem { condition: self.condition_estimate() });
        }
        Ok(x)
    }

    /// Estimate of `κ₁(A) = ‖A‖₁ ‖A⁻¹‖₁`.
    pub fn condition_estimate(&self) -> f64 {
        let inv =
            inverse_norm1_estimate(self.dim(), |b| self.solve_unchecked(b), |b| self.solve_transpose_unchecked(b));
        let k = self.norm1 * inv;
        if k.is_finite() {
            k
        } else {
            f64::INFINITY
        }
    }
}

/// `A P = Q R` by Householder reflections, pivoting on the largest remaining
/// column norm.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    qr: DMatrix<f64>,
    tau: Vec<f64>,
    perm: Vec<usize>,
    rank: usize,
}

impl PivotedQr {
    pub fn factor(a: &DMatrix<f64>) -> Result<Self> {
        bump();
        let (m, n) = a.shape();
        if m < n {
            return Err(Error::InvalidArgument(format!("QR least squares needs rows >= columns, got {m}x{n}")));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix".into()));
        }
        let mut qr = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut tau = vec![0.0; n];
        let mut norms: Vec<f64> = (0..n).map(|j| qr.column(j).norm_squared()).collect();
        for k in 0..n {
            // recompute remaining norms exactly; sizes here are small
            for (j, nj) in norms.iter_mut().enumerate().skip(k) {
                *nj = qr.view((k, j), (m - k, 1)).norm_squared();
            }
            let p = (k..n).max_by(|&i, &j| norms[i].total_cmp(&norms[j])).unwrap();
            if p != k {
                qr.swap_columns(p, k);
                perm.swap(p, k);
                norms.swap(p, k);
            }
            let alpha = qr.view((k, k), (m - k, 1)).norm();
            if alpha == 0.0 {
                tau[k] = 0.0;
                continue;
            }
            let x0 = qr[(k, k)];
            let beta = if x0 >= 0.0 { -alpha } else { alpha };
            let v0 = x0 - beta;
            for i in k + 1..m {
                qr[(i, k)] /= v0;
            }
            tau[k] = (beta - x0) / beta;
            qr[(k, k)] = beta;
            for j in k + 1..n {
                let mut s = qr[(k, j)];
                for i in k + 1..m {
                    s += qr[(i, k)] * qr[(i, j)];
                }
                s *= tau[k];
                qr[(k, j)] -= s;
                for i in k + 1..m {
                    let vi = qr[(i, k)];
                    qr[(i, j)] -= s * vi;
                }
            }
        }
        let r00 = if n > 0 { qr[(0, 0)].abs() } else { 0.0 };
        let rank = (0..n).take_while(|&i| qr[(i, i)].abs() > RANK_TOLERANCE * r00).count();
        Ok(PivotedQr { qr, tau, perm, rank })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn ncols(&self) -> usize {
        self.perm.len()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank == self.ncols()
    }

    /// `|R_00| / |R_kk|` for the smallest retained diagonal, a cheap lower
    /// bound on the 2-norm condition number.
    pub fn diagonal_ratio(&self) -> f64 {
        let n = self.ncols();
        if n == 0 {
            return 1.0;
        }
        let last = self.qr[(n - 1, n - 1)].abs();
        if last == 0.0 {
            f64::INFINITY
        } else {
            self.qr[(0, 0)].abs() / last
        }
    }

    fn apply_qt(&self, b: &DVector<f64>) -> DVector<f64> {
        let (m, n) = self.qr.shape();
        let mut y = b.clone();
        for k in 0..n {
            if self.tau[k] == 0.0 {
                continue;
            }
            let mut s = y[k];
            for i in k + 1..m {
                s += self.qr[(i, k)] * y[i];
            }
            s *= self.tau[k];
            y[k] -= s;
            for i in k + 1..m {
                y[i] -= s * self.qr[(i, k)];
            }
        }
        y
    }

    fn r_solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.ncols();
        let mut x = b.rows(0, n).into_owned();
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.qr[(i, j)] * x[j]).sum();
            x[i] = (x[i] - s) / self.qr[(i, i)];
        }
        x
    }

    fn rt_solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.ncols();
        let mut x = b.clone();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.qr[(j, i)] * x[j]).sum();
            x[i] = (x[i] - s) / self.qr[(i, i)];
        }
        x
    }

    /// Least-squares minimizer of `‖Ax − b‖₂`; rank deficiency is an error.
    pub fn solve(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        if !self.is_full_rank() {
            return Err(Error::SingularSystem { condition: self.condition_estimate() });
        }
        let z = self.r_solve(&self.apply_qt(b));
        let mut x = DVector::zeros(self.ncols());
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = z[k];
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("least-squares solution".into()));
        }
        Ok(x)
    }

    /// 1-norm condition estimate of the triangular factor `R`.
    pub fn condition_estimate(&self) -> f64 {
        let n = self.ncols();
        let r = self.qr.view((0, 0), (n, n)).upper_triangle();
        let inv = inverse_norm1_estimate(n, |b| self.r_solve(b), |b| self.rt_solve(b));
        let k = norm1(&r) * inv;
        if k.is_finite() {
            k
        } else {
            f64::INFINITY
        }
    }
}
