//! Dense factorizations: column-pivoted Householder QR, minimum-norm
//! least squares, numerical rank, and truncated rank-k approximation by
//! subspace iteration.
//!
//! Rank decisions use a relative tolerance of `RANK_TOL` against the
//! largest diagonal of the factorization.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::rng::RngState;
use rand::Rng;

/// Relative rank tolerance for all rank-revealing decisions.
pub const RANK_TOL: f64 = 1e-10;

/// Column-pivoted Householder QR of an n x d matrix.
pub struct ColPivQr {
    rows: usize,
    /// R in the upper triangle (in pivoted column order).
    r: DenseMatrix,
    /// Householder vectors, one per elimination step; v[k] has length rows-k.
    vs: Vec<Vec<f64>>,
    betas: Vec<f64>,
    /// perm[k] = original index of the column processed at step k.
    perm: Vec<usize>,
    rank: usize,
}

impl ColPivQr {
    pub fn factor(a: &DenseMatrix, rank_tol: f64) -> ColPivQr {
        let (n, d) = (a.rows(), a.cols());
        let steps = n.min(d);
        let mut r = a.clone();
        let mut perm: Vec<usize> = (0..d).collect();
        let mut vs: Vec<Vec<f64>> = Vec::with_capacity(steps);
        let mut betas: Vec<f64> = Vec::with_capacity(steps);

        for k in 0..steps {
            // Exact residual norms; d is small so recomputation is cheap
            // and avoids downdating drift.
            let mut best = k;
            let mut best_norm = -1.0;
            for j in k..d {
                let nrm: f64 = r.col(j)[k..].iter().map(|v| v * v).sum();
                if nrm > best_norm {
                    best_norm = nrm;
                    best = j;
                }
            }
            if best != k {
                swap_columns(&mut r, k, best);
                perm.swap(k, best);
            }

            let x = &r.col(k)[k..];
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                vs.push(Vec::new());
                betas.push(0.0);
                continue;
            }
            let alpha = if x[0] > 0.0 { -norm } else { norm };
            let mut v = x.to_vec();
            v[0] -= alpha;
            let vnorm2: f64 = v.iter().map(|t| t * t).sum();
            let beta = if vnorm2 == 0.0 { 0.0 } else { 2.0 / vnorm2 };

            for j in k..d {
                let cj = &mut r.col_mut(j)[k..];
                let dot: f64 = v.iter().zip(cj.iter()).map(|(a, b)| a * b).sum();
                let s = beta * dot;
                for (ci, vi) in cj.iter_mut().zip(v.iter()) {
                    *ci -= s * vi;
                }
            }
            // Eliminate round-off below the diagonal.
            r.col_mut(k)[k] = alpha;
            for i in k + 1..n {
                r.set(i, k, 0.0);
            }
            vs.push(v);
            betas.push(beta);
        }

        let top = r.get(0, 0).abs();
        let mut rank = 0;
        for k in 0..steps {
            if r.get(k, k).abs() > rank_tol * top.max(f64::MIN_POSITIVE) {
                rank = k + 1;
            } else {
                break;
            }
        }
        ColPivQr { rows: n, r, vs, betas, perm, rank }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// Apply Q^T in place to every column of `b`.
    pub fn apply_qt(&self, b: &mut DenseMatrix) {
        assert_eq!(b.rows(), self.rows);
        for j in 0..b.cols() {
            let col = b.col_mut(j);
            for (k, (v, &beta)) in self.vs.iter().zip(&self.betas).enumerate() {
                if beta == 0.0 {
                    continue;
                }
                let seg = &mut col[k..];
                let dot: f64 = v.iter().zip(seg.iter()).map(|(a, b)| a * b).sum();
                let s = beta * dot;
                for (ci, vi) in seg.iter_mut().zip(v.iter()) {
                    *ci -= s * vi;
                }
            }
        }
    }
}

fn swap_columns(m: &mut DenseMatrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    for i in 0..m.rows() {
        let t = m.get(i, a);
        m.set(i, a, m.get(i, b));
        m.set(i, b, t);
    }
}

/// Numerical rank at the standard relative tolerance.
pub fn numerical_rank(a: &DenseMatrix) -> usize {
    ColPivQr::factor(a, RANK_TOL).rank()
}

/// Least-squares solve of `A X = B` per column of `B`, returning the
/// minimum-norm solution when `A` is rank deficient.
///
/// Rank-revealing QR with column pivoting, completed to an orthogonal
/// decomposition of the leading rows so the min-norm solution comes out
/// of two triangular solves.
pub fn least_squares_minnorm(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch(format!(
            "A has {} rows but B has {}",
            a.rows(),
            b.rows()
        )));
    }
    let qr = ColPivQr::factor(a, RANK_TOL);
    let (d, m) = (a.cols(), b.cols());
    let r = qr.rank();
    let mut c = b.clone();
    qr.apply_qt(&mut c);

    let mut x = DenseMatrix::zeros(d, m);
    if r == 0 {
        return Ok(x); // A is numerically zero; min-norm solution is 0.
    }

    if r == d {
        // Full column rank: plain back substitution in R[0..d, 0..d].
        for j in 0..m {
            let mut y = vec![0.0; d];
            for i in (0..d).rev() {
                let mut s = c.get(i, j);
                for l in i + 1..d {
                    s -= qr.r.get(i, l) * y[l];
                }
                y[i] = s / qr.r.get(i, i);
            }
            for i in 0..d {
                x.set(qr.perm[i], j, y[i]);
            }
        }
        return Ok(x);
    }

    // Rank deficient: factor the transpose of the leading r rows of R,
    // R_top^T (d x r) = Z [T; 0], so R_top = [T^T 0] Z^T.
    let mut rt = DenseMatrix::zeros(d, r);
    for i in 0..r {
        for j in 0..d {
            rt.set(j, i, qr.r.get(i, j));
        }
    }
    let mut zs: Vec<Vec<f64>> = Vec::with_capacity(r);
    let mut zbetas: Vec<f64> = Vec::with_capacity(r);
    for k in 0..r {
        let xk = &rt.col(k)[k..];
        let norm = xk.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            zs.push(Vec::new());
            zbetas.push(0.0);
            continue;
        }
        let alpha = if xk[0] > 0.0 { -norm } else { norm };
        let mut v = xk.to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|t| t * t).sum();
        let beta = if vnorm2 == 0.0 { 0.0 } else { 2.0 / vnorm2 };
        for j in k..r {
            let cj = &mut rt.col_mut(j)[k..];
            let dot: f64 = v.iter().zip(cj.iter()).map(|(a, b)| a * b).sum();
            let s = beta * dot;
            for (ci, vi) in cj.iter_mut().zip(v.iter()) {
                *ci -= s * vi;
            }
        }
        rt.col_mut(k)[k] = alpha;
        for i in k + 1..d {
            rt.set(i, k, 0.0);
        }
        zs.push(v);
        zbetas.push(beta);
    }
    // T is the leading r x r upper triangle of the reduced rt.
    for j in 0..m {
        // Forward substitution: T^T w = c[0..r] (T^T is lower triangular).
        let mut w = vec![0.0; r];
        for i in 0..r {
            let mut s = c.get(i, j);
            for l in 0..i {
                s -= rt.get(l, i) * w[l];
            }
            w[i] = s / rt.get(i, i);
        }
        // y = Z [w; 0]: apply Householders in reverse order.
        let mut y = vec![0.0; d];
        y[..r].copy_from_slice(&w);
        for k in (0..r).rev() {
            let beta = zbetas[k];
            if beta == 0.0 {
                continue;
            }
            let v = &zs[k];
            let seg = &mut y[k..];
            let dot: f64 = v.iter().zip(seg.iter()).map(|(a, b)| a * b).sum();
            let s = beta * dot;
            for (ci, vi) in seg.iter_mut().zip(v.iter()) {
                *ci -= s * vi;
            }
        }
        for i in 0..d {
            x.set(qr.perm[i], j, y[i]);
        }
    }
    Ok(x)
}

/// A^T * B without materializing the transpose.
pub fn at_mul(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    assert_eq!(a.rows(), b.rows());
    let mut out = DenseMatrix::zeros(a.cols(), b.cols());
    for j in 0..b.cols() {
        let bc = b.col(j);
        for i in 0..a.cols() {
            let dot: f64 = a.col(i).iter().zip(bc).map(|(x, y)| x * y).sum();
            out.set(i, j, dot);
        }
    }
    out
}

/// Orthonormalize the columns of `m` in place (modified Gram-Schmidt with
/// re-orthogonalization). Columns that vanish are replaced with fresh
/// pseudorandom directions drawn from `rng` so the result always has full
/// column rank.
fn orthonormalize(m: &mut DenseMatrix, rng: &mut impl Rng) {
    let n = m.rows();
    let k = m.cols();
    let scale = m.max_abs().max(1.0);
    for j in 0..k {
        let mut attempts = 0;
        loop {
            for _pass in 0..2 {
                for p in 0..j {
                    let dot: f64 = {
                        let (head, tail) = m.data().split_at(j * n);
                        let prev = &head[p * n..(p + 1) * n];
                        let cur = &tail[..n];
                        prev.iter().zip(cur).map(|(a, b)| a * b).sum()
                    };
                    for i in 0..n {
                        let v = m.get(i, j) - dot * m.get(i, p);
                        m.set(i, j, v);
                    }
                }
            }
            let norm: f64 = m.col(j).iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1e-13 * scale {
                for i in 0..n {
                    let v = m.get(i, j) / norm;
                    m.set(i, j, v);
                }
                break;
            }
            attempts += 1;
            assert!(attempts < 64, "orthonormalization failed to find a new direction");
            for i in 0..n {
                m.set(i, j, rng.gen_range(-1.0..1.0));
            }
        }
    }
}

/// Best rank-<=k approximation in the Frobenius norm by orthogonal
/// subspace iteration on the right singular subspace. Stops when the
/// subspace rotation per sweep drops below `tol` or after 1000 sweeps.
pub fn truncated_frobenius_rank_k(a: &DenseMatrix, k: usize, tol: f64) -> Result<DenseMatrix> {
    if k > a.rows().min(a.cols()) {
        return Err(Error::InvalidArgument(format!(
            "rank {k} exceeds min dimension of a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    if k == 0 {
        return Ok(DenseMatrix::zeros(a.rows(), a.cols()));
    }
    // Internal fixed stream keeps the routine deterministic without
    // threading an RngState through every caller.
    let mut rng = RngState::with_stream(0x7355_6249, 0x0bad_cafe).rng();
    let n = a.cols();
    let mut v = DenseMatrix::from_fn(n, k, |_, _| rng.gen_range(-1.0..1.0));
    orthonormalize(&mut v, &mut rng);

    for _sweep in 0..1000 {
        let mut w = a.mul(&v);
        orthonormalize(&mut w, &mut rng);
        let mut vn = at_mul(a, &w);
        orthonormalize(&mut vn, &mut rng);
        // Rotation = norm of the part of the new basis outside the old
        // subspace; the difference form stays accurate near convergence.
        let overlap = at_mul(&v, &vn);
        let rot = vn.sub(&v.mul(&overlap)).frobenius_norm();
        v = vn;
        if rot < tol {
            break;
        }
    }
    let av = a.mul(&v);
    Ok(av.mul(&v.transpose()))
}
