//! Approximate multiple-response regression: given A (n x d) and
//! B (n x m), return coefficients X and per-column cost estimates v with
//! OPT_i <= v_i <= reg * OPT_i.
//!
//! Three routes: exact least squares for the squared-l2 loss, damped
//! iteratively reweighted least squares for losses with a usable weight
//! function, and the regular-partition enumeration for the l0 loss. Every
//! estimate v_i is the evaluated cost of the returned solution, so the
//! lower bracket OPT_i <= v_i holds by construction; the upper bracket is
//! certified empirically against scan oracles in the test suite.
//!
//! All solvers are deterministic: the same inputs produce bit-identical
//! coefficients, and columns of B are independent subproblems.

use crate::error::{Error, Result};
use crate::linalg::{least_squares_minnorm, ColPivQr, RANK_TOL};
use crate::loss::{LossKind, LossSpec};
use crate::matrix::DenseMatrix;
use rayon::prelude::*;

/// Weight floor preventing division blow-up at zero residuals.
pub const IRLS_WEIGHT_FLOOR: f64 = 1e-12;
const IRLS_WEIGHT_CAP: f64 = 1e12;

/// Relative threshold for calling a residual entry zero in l0 counting;
/// scaled by the response column's magnitude (exact zero comparison is
/// meaningless in floating point).
pub const L0_ZERO_RELATIVE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct RegressionConfig {
    pub max_iters: usize,
    pub tol: f64,
    /// Claimed bracketing factor recorded on IRLS outcomes.
    pub target_bracket: f64,
}

impl Default for RegressionConfig {
    fn default() -> Self {
        RegressionConfig { max_iters: 100, tol: 1e-8, target_bracket: 2.0 }
    }
}

/// Coefficients plus per-column estimated costs.
#[derive(Debug, Clone)]
pub struct RegressionOutcome {
    /// d x m coefficient matrix.
    pub x: DenseMatrix,
    /// Per-column achieved costs, in the loss's own units.
    pub costs: Vec<f64>,
    /// Claimed bracketing factor (>= 1).
    pub reg_factor: f64,
    pub solver: &'static str,
}

/// Exact least squares per column; reg factor 1. Costs are the achieved
/// squared-l2 residual norms (sum of squares, no 1/2).
pub fn solve_l2(a: &DenseMatrix, b: &DenseMatrix) -> Result<RegressionOutcome> {
    let x = least_squares_minnorm(a, b)?;
    let resid = a.mul(&x).sub(b);
    let costs = (0..b.cols())
        .map(|j| resid.col(j).iter().map(|r| r * r).sum())
        .collect();
    Ok(RegressionOutcome { x, costs, reg_factor: 1.0, solver: "l2-exact" })
}

/// One IRLS solve with warm start. Returns the coefficient vector, its
/// cost, and the per-iteration cost trace (non-increasing by damping:
/// a step that would raise the cost is halved toward the previous
/// iterate and abandoned if it never improves).
pub(crate) fn irls_column(
    g: &LossSpec,
    a: &DenseMatrix,
    bcol: &[f64],
    x0: &[f64],
    max_iters: usize,
    tol: f64,
) -> Result<(Vec<f64>, f64, Vec<f64>)> {
    let n = a.rows();
    let d = a.cols();
    debug_assert_eq!(bcol.len(), n);
    debug_assert_eq!(x0.len(), d);

    let eval_cost = |x: &[f64]| -> f64 {
        (0..n)
            .map(|i| {
                let pred: f64 = (0..d).map(|l| a.get(i, l) * x[l]).sum();
                g.eval(pred - bcol[i])
            })
            .sum()
    };

    let mut x = x0.to_vec();
    let mut cost = eval_cost(&x);
    if !cost.is_finite() {
        return Err(Error::Solver("non-finite initial cost".into()));
    }
    let mut trace = vec![cost];
    let mut wa = DenseMatrix::zeros(n, d);
    let mut wb = DenseMatrix::zeros(n, 1);

    for _iter in 0..max_iters {
        for i in 0..n {
            let pred: f64 = (0..d).map(|l| a.get(i, l) * x[l]).sum();
            let r = pred - bcol[i];
            let w = g
                .irls_weight(r)
                .ok_or_else(|| Error::Capability(format!("loss {g} has no IRLS weight")))?;
            let w = if w.is_finite() { w.clamp(IRLS_WEIGHT_FLOOR, IRLS_WEIGHT_CAP) } else { IRLS_WEIGHT_CAP };
            let sw = w.sqrt();
            for l in 0..d {
                wa.set(i, l, sw * a.get(i, l));
            }
            wb.set(i, 0, sw * bcol[i]);
        }
        let step = least_squares_minnorm(&wa, &wb)?;
        let mut xn: Vec<f64> = (0..d).map(|l| step.get(l, 0)).collect();
        if xn.iter().any(|v| !v.is_finite()) {
            return Err(Error::Solver("non-finite IRLS step".into()));
        }
        let mut cn = eval_cost(&xn);
        let mut halvings = 0;
        while cn > cost && halvings < 40 {
            for l in 0..d {
                xn[l] = 0.5 * (xn[l] + x[l]);
            }
            cn = eval_cost(&xn);
            halvings += 1;
        }
        if cn > cost {
            // No descent direction left at this weighting; stop.
            trace.push(cost);
            break;
        }
        let improvement = cost - cn;
        x = xn;
        cost = cn;
        trace.push(cost);
        if improvement <= tol * cost.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok((x, cost, trace))
}

/// IRLS regression per column of B with weights g'(r)/r, damping, and an
/// l2 warm start. Accepts every loss with a defined weight function;
/// non-convex members (Tukey, Cauchy, Geman-McClure) converge to local
/// minima and their costs are upper estimates only.
pub fn solve_irls(
    g: &LossSpec,
    a: &DenseMatrix,
    b: &DenseMatrix,
    max_iters: usize,
    tol: f64,
) -> Result<RegressionOutcome> {
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch(format!(
            "A has {} rows but B has {}",
            a.rows(),
            b.rows()
        )));
    }
    if g.irls_weight(1.0).is_none() {
        return Err(Error::Capability(format!("loss {g} is not IRLS-solvable")));
    }
    let x0 = least_squares_minnorm(a, b)?;
    // Columns are independent subproblems; solve them in parallel and
    // write into disjoint output columns.
    let solved: Vec<(Vec<f64>, f64)> = (0..b.cols())
        .into_par_iter()
        .map(|j| {
            let warm: Vec<f64> = (0..a.cols()).map(|l| x0.get(l, j)).collect();
            let (xj, cost, _) =
                irls_column(g, a, b.col(j), &warm, max_iters, tol).map_err(|e| match e {
                    Error::Solver(msg) => Error::Solver(format!("column {j}: {msg}")),
                    other => other,
                })?;
            Ok((xj, cost))
        })
        .collect::<Result<_>>()?;
    let mut x = DenseMatrix::zeros(a.cols(), b.cols());
    let mut costs = Vec::with_capacity(b.cols());
    for (j, (xj, cost)) in solved.into_iter().enumerate() {
        for l in 0..a.cols() {
            x.set(l, j, xj[l]);
        }
        costs.push(cost);
    }
    Ok(RegressionOutcome { x, costs, reg_factor: 2.0, solver: "irls" })
}

/// Ordered row blocks, each of full row rank and spanning the row space
/// of everything after it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularPartition {
    pub blocks: Vec<Vec<usize>>,
}

impl RegularPartition {
    /// Check the defining properties; used by tests and debug assertions.
    pub fn validate(&self, a: &DenseMatrix) -> Result<()> {
        let n = a.rows();
        let mut seen = vec![false; n];
        for block in &self.blocks {
            for &row in block {
                if row >= n || seen[row] {
                    return Err(Error::InvalidArgument("blocks not a partition".into()));
                }
                seen[row] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidArgument("blocks do not cover all rows".into()));
        }
        for (bi, block) in self.blocks.iter().enumerate() {
            let sub_t =
                DenseMatrix::from_fn(a.cols(), block.len(), |c, j| a.get(block[j], c));
            let rank = crate::linalg::numerical_rank(&sub_t);
            let is_last_degenerate = bi + 1 == self.blocks.len() && rank == 0;
            if rank != block.len() && !is_last_degenerate {
                return Err(Error::InvalidArgument(format!(
                    "block {bi} has rank {rank}, size {}",
                    block.len()
                )));
            }
            // Every later row must lie in this block's row span.
            for later in &self.blocks[bi + 1..] {
                for &row in later {
                    let v = DenseMatrix::from_fn(a.cols(), 1, |c, _| a.get(row, c));
                    let coef = least_squares_minnorm(&sub_t, &v)?;
                    let resid = sub_t.mul(&coef).sub(&v);
                    let scale = v.frobenius_norm().max(1.0);
                    if resid.frobenius_norm() > 1e-8 * scale && !is_last_degenerate {
                        return Err(Error::InvalidArgument(format!(
                            "row {row} escapes the span of block {bi}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Greedy regular partition: each step takes a maximal independent row
/// set spanning the remaining rows (pivot rows of a rank-revealing
/// factorization of the remaining submatrix). Any all-zero rows left at
/// the end form one degenerate final block.
pub fn build_regular_partition(a: &DenseMatrix) -> RegularPartition {
    let n = a.rows();
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut blocks = Vec::new();
    while !remaining.is_empty() {
        let sub_t =
            DenseMatrix::from_fn(a.cols(), remaining.len(), |c, j| a.get(remaining[j], c));
        let qr = ColPivQr::factor(&sub_t, RANK_TOL);
        let rank = qr.rank();
        if rank == 0 {
            blocks.push(std::mem::take(&mut remaining));
            break;
        }
        let mut block: Vec<usize> =
            qr.perm()[..rank].iter().map(|&j| remaining[j]).collect();
        block.sort_unstable();
        remaining.retain(|row| !block.contains(row));
        blocks.push(block);
    }
    RegularPartition { blocks }
}

fn l0_zero_threshold(b: &[f64]) -> f64 {
    let scale = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    L0_ZERO_RELATIVE * scale
}

/// Count of residual entries of `Ax - b` treated as nonzero.
pub fn l0_residual_count(a: &DenseMatrix, x: &[f64], b: &[f64], threshold: f64) -> usize {
    (0..a.rows())
        .filter(|&i| {
            let pred: f64 = (0..a.cols()).map(|l| a.get(i, l) * x[l]).sum();
            (pred - b[i]).abs() > threshold
        })
        .count()
}

/// l0 regression by regular partition: solve each block's linear system
/// exactly and keep the candidate with the fewest residual nonzeros.
/// The achieved count is at most d times the optimum, d = a.cols().
pub fn solve_l0(a: &DenseMatrix, b: &[f64]) -> Result<(Vec<f64>, usize)> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "A has {} rows but b has {}",
            a.rows(),
            b.len()
        )));
    }
    let partition = build_regular_partition(a);
    let threshold = l0_zero_threshold(b);
    let mut best: Option<(Vec<f64>, usize)> = None;
    for block in &partition.blocks {
        let sub = DenseMatrix::from_fn(block.len(), a.cols(), |i, j| a.get(block[i], j));
        let rhs = DenseMatrix::from_fn(block.len(), 1, |i, _| b[block[i]]);
        let sol = least_squares_minnorm(&sub, &rhs)?;
        let x: Vec<f64> = (0..a.cols()).map(|l| sol.get(l, 0)).collect();
        let count = l0_residual_count(a, &x, b, threshold);
        if best.as_ref().map_or(true, |(_, c)| count < *c) {
            best = Some((x, count));
        }
    }
    Ok(best.expect("partition is never empty"))
}

/// Dispatcher implementing the regression property for the supported
/// losses: exact solve for squared-l2, IRLS for weighted losses, the
/// partition method per column for l0. Costs are always re-evaluated
/// from the returned coefficients in the units of `g`.
pub fn batch_regress(
    g: &LossSpec,
    a: &DenseMatrix,
    b: &DenseMatrix,
    config: &RegressionConfig,
) -> Result<RegressionOutcome> {
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch(format!(
            "A has {} rows but B has {}",
            a.rows(),
            b.rows()
        )));
    }
    let mut outcome = match g.kind {
        LossKind::L0 => {
            let mut x = DenseMatrix::zeros(a.cols(), b.cols());
            let mut costs = Vec::with_capacity(b.cols());
            for j in 0..b.cols() {
                let (xj, count) = solve_l0(a, b.col(j))?;
                for l in 0..a.cols() {
                    x.set(l, j, xj[l]);
                }
                costs.push(count as f64);
            }
            RegressionOutcome { x, costs, reg_factor: a.cols() as f64, solver: "l0-partition" }
        }
        LossKind::Lp { p } if p == 2.0 => solve_l2(a, b)?,
        _ if g.irls_weight(1.0).is_some() => {
            let mut out = solve_irls(g, a, b, config.max_iters, config.tol)?;
            out.reg_factor = config.target_bracket;
            out
        }
        _ => {
            return Err(Error::Capability(format!(
                "no regression route for loss {g} (convex={}, sketchable={})",
                g.is_convex(),
                g.is_sketchable()
            )))
        }
    };
    // Keep v consistent with the loss's own units regardless of route.
    if !matches!(g.kind, LossKind::L0) {
        let resid = a.mul(&outcome.x).sub(b);
        outcome.costs = (0..b.cols()).map(|j| g.vector_cost(resid.col(j))).collect();
    }
    Ok(outcome)
}
