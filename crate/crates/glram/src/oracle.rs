//! Brute-force reference computations: max-determinant column sets,
//! Cramer-rule fitting coefficients, exhaustive subset selection,
//! 1-d scan regression, Monte Carlo frequency estimates, and the
//! alternating entrywise-l1 baseline.
//!
//! Everything here favors transparency over speed; the enumeration
//! routines guard their combinatorial budgets explicitly.

use crate::error::{Error, Result};
use crate::linalg::numerical_rank;
use crate::loss::LossSpec;
use crate::matrix::{sample_subset, ColumnSet, DenseMatrix};
use crate::regression::irls_column;
use crate::rng::RngState;
use crate::selector::fit_back;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const MAX_DET_BUDGET: u128 = 5_000_000;

/// Iterate over all size-k index subsets of 0..n in lexicographic order.
pub(crate) struct Combinations {
    n: usize,
    k: usize,
    state: Option<Vec<usize>>,
}

impl Combinations {
    pub(crate) fn new(n: usize, k: usize) -> Self {
        let state = if k <= n { Some((0..k).collect()) } else { None };
        Combinations { n, k, state }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;
    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.state.clone()?;
        // Advance to the successor, rightmost index first.
        let mut next = current.clone();
        let mut i = self.k;
        loop {
            if i == 0 {
                self.state = None;
                break;
            }
            i -= 1;
            if next[i] < self.n - (self.k - i) {
                next[i] += 1;
                for j in i + 1..self.k {
                    next[j] = next[j - 1] + 1;
                }
                self.state = Some(next);
                break;
            }
        }
        Some(current)
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Determinant of a small square matrix by partial-pivot elimination.
fn det_square(m: &mut [Vec<f64>]) -> f64 {
    let n = m.len();
    let mut det = 1.0;
    for c in 0..n {
        let (pivot_row, pivot_val) = (c..n)
            .map(|r| (r, m[r][c].abs()))
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        if pivot_val == 0.0 {
            return 0.0;
        }
        if pivot_row != c {
            m.swap(pivot_row, c);
            det = -det;
        }
        det *= m[c][c];
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for j in c..n {
                m[r][j] -= f * m[c][j];
            }
        }
    }
    det
}

fn submatrix_det(m: &DenseMatrix, rows: &[usize], cols: &[usize]) -> f64 {
    let mut s: Vec<Vec<f64>> =
        rows.iter().map(|&r| cols.iter().map(|&c| m.get(r, c)).collect()).collect();
    det_square(&mut s)
}

/// The column subset of `h` whose square submatrix attains the largest
/// absolute determinant over all row choices of matching size.
#[derive(Debug, Clone)]
pub struct MaxDetResult {
    pub p: ColumnSet,
    pub q: Vec<usize>,
    pub det_abs: f64,
    pub rank: usize,
}

/// Exhaustive search over all (P, Q) with |P| = |Q| = rank(M*_H);
/// ties resolve to the lexicographically smallest pair.
pub fn max_det_subset(mstar: &DenseMatrix, h: &ColumnSet) -> Result<MaxDetResult> {
    h.check_bounds(mstar.cols())?;
    if h.is_empty() {
        return Ok(MaxDetResult {
            p: ColumnSet::new(vec![])?,
            q: vec![],
            det_abs: 1.0,
            rank: 0,
        });
    }
    let sub = mstar.subset_columns(h)?;
    let rank = numerical_rank(&sub);
    if rank == 0 {
        return Ok(MaxDetResult {
            p: ColumnSet::new(vec![])?,
            q: vec![],
            det_abs: 1.0,
            rank: 0,
        });
    }
    let pairs = binomial(h.len(), rank) * binomial(mstar.rows(), rank);
    if pairs > MAX_DET_BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "{pairs} (P,Q) pairs exceed the {MAX_DET_BUDGET} budget"
        )));
    }
    let hs = h.indices();
    let mut best: Option<(Vec<usize>, Vec<usize>, f64)> = None;
    for p_local in Combinations::new(hs.len(), rank) {
        let p: Vec<usize> = p_local.iter().map(|&i| hs[i]).collect();
        for q in Combinations::new(mstar.rows(), rank) {
            let d = submatrix_det(mstar, &q, &p).abs();
            if best.as_ref().map_or(true, |(_, _, bd)| d > *bd) {
                best = Some((p.clone(), q, d));
            }
        }
    }
    let (p, q, det_abs) = best.expect("rank >= 1 yields at least one pair");
    Ok(MaxDetResult { p: ColumnSet::new(p)?, q, det_abs, rank })
}

/// Fitting coefficients expressing column `i` of `mstar` as a linear
/// combination of the columns of `h`, via Cramer ratios on the
/// max-determinant rows. Columns of `h` outside the max-det set get a
/// zero coefficient; every |alpha| is at most 1 (up to rounding) by
/// maximality of the denominator.
///
/// Requires `i` to fall outside the max-det set of `h + {i}`.
pub fn cramer_coeffs(mstar: &DenseMatrix, h: &ColumnSet, i: usize) -> Result<Vec<f64>> {
    if h.contains(i) {
        return Err(Error::InvalidArgument(format!("column {i} is already in H")));
    }
    if i >= mstar.cols() {
        return Err(Error::ColumnOutOfRange { index: i, cols: mstar.cols() });
    }
    let hu = h.union(&ColumnSet::new(vec![i])?);
    let md = max_det_subset(mstar, &hu)?;
    if md.p.contains(i) {
        return Err(Error::Precondition(format!(
            "column {i} belongs to the max-determinant set of H + {{i}}"
        )));
    }
    let mut alpha = vec![0.0; h.len()];
    if md.rank == 0 {
        return Ok(alpha); // zero matrix: the zero combination fits exactly
    }
    let denom = submatrix_det(mstar, &md.q, md.p.indices());
    for (pos_in_p, &pj) in md.p.indices().iter().enumerate() {
        let mut cols: Vec<usize> = md.p.indices().to_vec();
        cols[pos_in_p] = i;
        let num = submatrix_det(mstar, &md.q, &cols);
        let coeff = num / denom;
        let pos_in_h = h
            .indices()
            .iter()
            .position(|&c| c == pj)
            .expect("max-det columns come from H");
        alpha[pos_in_h] = coeff;
    }
    Ok(alpha)
}

/// Best fit cost over every subset of `subset_size` columns. Exact for
/// the squared-l2 loss; otherwise limited by the per-subset regression
/// solver. A `subset_size` of 0 scores the zero fit.
pub fn exhaustive_best_subset(
    a: &DenseMatrix,
    g: &LossSpec,
    subset_size: usize,
    budget: u128,
) -> Result<(ColumnSet, f64)> {
    if subset_size > a.cols() {
        return Err(Error::InvalidArgument(format!(
            "subset size {subset_size} exceeds {} columns",
            a.cols()
        )));
    }
    if subset_size == 0 {
        return Ok((ColumnSet::new(vec![])?, g.matrix_cost(a)));
    }
    let count = binomial(a.cols(), subset_size);
    if count > budget {
        return Err(Error::BudgetExceeded(format!(
            "{count} subsets exceed the stated budget {budget}"
        )));
    }
    let mut best: Option<(ColumnSet, f64)> = None;
    for comb in Combinations::new(a.cols(), subset_size) {
        let s = ColumnSet::new(comb)?;
        let (_, cost) = fit_back(a, &s, g)?;
        if best.as_ref().map_or(true, |(_, bc)| cost < *bc) {
            best = Some((s, cost));
        }
    }
    Ok(best.expect("at least one subset"))
}

/// Monte Carlo estimate of how often a random extra column falls outside
/// the max-determinant set of a random 2k-column sample, and how often at
/// least a quarter of the leftover columns do so simultaneously.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExclusionReport {
    pub trials: usize,
    pub rank: usize,
    /// Frequency of i not in R(H + {i}) over (H, i) pairs.
    pub exclusion_frequency: f64,
    /// Frequency of trials where >= (m-2k)/4 candidate columns are excluded.
    pub batch_frequency: f64,
}

pub fn monte_carlo_exclusion(
    mstar: &DenseMatrix,
    trials: usize,
    rng: &RngState,
) -> Result<ExclusionReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    let m = mstar.cols();
    let k = numerical_rank(mstar);
    if m < 2 * k + 1 {
        return Err(Error::InvalidArgument(format!(
            "need more than 2*rank = {} columns, have {m}",
            2 * k
        )));
    }
    let universe = ColumnSet::full(m);
    let mut single_hits = 0usize;
    let mut batch_hits = 0usize;
    for t in 0..trials {
        let trial_rng = rng.derive(t as u64);
        let h = sample_subset(&trial_rng.derive(0), &universe, 2 * k)?;
        let rest = universe.minus(&h);
        let pick = trial_rng.derive(1).rng().gen_range(0..rest.len());
        let chosen = rest.indices()[pick];
        let mut excluded = 0usize;
        for &i in rest.iter() {
            let hu = h.union(&ColumnSet::new(vec![i])?);
            let md = max_det_subset(mstar, &hu)?;
            let event = !md.p.contains(i);
            if event {
                excluded += 1;
            }
            if i == chosen && event {
                single_hits += 1;
            }
        }
        if 4 * excluded >= m - 2 * k {
            batch_hits += 1;
        }
    }
    Ok(ExclusionReport {
        trials,
        rank: k,
        exclusion_frequency: single_hits as f64 / trials as f64,
        batch_frequency: batch_hits as f64 / trials as f64,
    })
}

/// 1-d regression oracle: coarse grid over the bracket spanned by the
/// per-row ratios, then golden-section refinement around the best cell
/// down to `resolution` of the bracket width (and further to rounding
/// level, so the reported optimum is never coarser than asked for).
/// Returns (argmin, min cost). Exact up to unimodality of the objective.
pub fn grid_regress_1d(g: &LossSpec, a: &[f64], b: &[f64], resolution: f64) -> (f64, f64) {
    assert_eq!(a.len(), b.len());
    let cost = |x: f64| -> f64 { a.iter().zip(b).map(|(&ai, &bi)| g.eval(ai * x - bi)).sum() };
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (&ai, &bi) in a.iter().zip(b) {
        if ai.abs() > 1e-300 {
            let r = bi / ai;
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    if !lo.is_finite() {
        return (0.0, cost(0.0));
    }
    lo -= 1.0;
    hi += 1.0;

    const CELLS: usize = 512;
    let width = hi - lo;
    let mut best_i = 0usize;
    let mut best_c = f64::INFINITY;
    for i in 0..=CELLS {
        let x = lo + width * i as f64 / CELLS as f64;
        let c = cost(x);
        if c < best_c {
            best_c = c;
            best_i = i;
        }
    }
    let cell = width / CELLS as f64;
    let mut l = lo + cell * best_i.saturating_sub(2) as f64;
    let mut r = (lo + cell * (best_i + 2) as f64).min(hi);

    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = r - phi * (r - l);
    let mut x2 = l + phi * (r - l);
    let mut f1 = cost(x1);
    let mut f2 = cost(x2);
    let target = (resolution * width).min(1e-12 * width.max(1.0));
    while r - l > target && r - l > f64::EPSILON * (l.abs() + r.abs()) {
        if f1 <= f2 {
            r = x2;
            x2 = x1;
            f2 = f1;
            x1 = r - phi * (r - l);
            f1 = cost(x1);
        } else {
            l = x1;
            x1 = x2;
            f1 = f2;
            x2 = l + phi * (r - l);
            f2 = cost(x2);
        }
    }
    let xm = 0.5 * (l + r);
    let fm = cost(xm);
    let mut out = (xm, fm);
    for (x, f) in [(x1, f1), (x2, f2)] {
        if f < out.1 {
            out = (x, f);
        }
    }
    out
}

/// Alternating entrywise-l1 factorization: a heuristic rank-k baseline
/// with no approximation guarantee. Each half-step refines one factor
/// per column/row by damped reweighted least squares warm-started from
/// the previous iterate, so the l1 cost never increases.
pub fn l1_alternating_baseline(
    a: &DenseMatrix,
    k: usize,
    alternations: usize,
    seed: RngState,
) -> Result<DenseMatrix> {
    if k == 0 || k > a.cols().min(a.rows()) {
        return Err(Error::InvalidArgument(format!(
            "rank {k} out of range for a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    let g = LossSpec::l1();
    let (n, m) = (a.rows(), a.cols());
    let mut rng = seed.rng();
    let normal = rand_distr::StandardNormal;
    let mut u = DenseMatrix::from_fn(n, k, |_, _| rng.sample::<f64, _>(normal));
    let mut v = crate::linalg::least_squares_minnorm(&u, a)?; // k x m, l2 start

    const INNER_ITERS: usize = 8;
    const INNER_TOL: f64 = 1e-9;
    let l1_cost = |u: &DenseMatrix, v: &DenseMatrix| g.matrix_cost(&u.mul(v).sub(a));
    let mut cost = l1_cost(&u, &v);

    for alt in 0..alternations {
        // Column step: refine V col by col against fixed U.
        let new_cols: Vec<Vec<f64>> = (0..m)
            .into_par_iter()
            .map(|j| {
                let warm: Vec<f64> = (0..k).map(|l| v.get(l, j)).collect();
                irls_column(&g, &u, a.col(j), &warm, INNER_ITERS, INNER_TOL).map(|(x, _, _)| x)
            })
            .collect::<Result<_>>()?;
        for (j, x) in new_cols.into_iter().enumerate() {
            for l in 0..k {
                v.set(l, j, x[l]);
            }
        }
        // Row step: refine U row by row against fixed V.
        let vt = v.transpose();
        let mut ut = u.transpose();
        let at = a.transpose();
        let new_rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let warm: Vec<f64> = (0..k).map(|l| ut.get(l, i)).collect();
                irls_column(&g, &vt, at.col(i), &warm, INNER_ITERS, INNER_TOL).map(|(x, _, _)| x)
            })
            .collect::<Result<_>>()?;
        for (i, x) in new_rows.into_iter().enumerate() {
            for l in 0..k {
                ut.set(l, i, x[l]);
            }
        }
        u = ut.transpose();
        let new_cost = l1_cost(&u, &v);
        log::debug!("l1 baseline alternation {alt}: cost {new_cost:.6e}");
        debug_assert!(new_cost <= cost * (1.0 + 1e-9) + 1e-12);
        if cost - new_cost <= 1e-6 * cost.max(f64::MIN_POSITIVE) {
            break;
        }
        cost = new_cost;
    }
    Ok(u.mul(&v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::LossKind;

    fn two_by_three() -> DenseMatrix {
        // [[1,0,2],[0,1,2]]
        DenseMatrix::new(2, 3, vec![1.0, 0.0, 0.0, 1.0, 2.0, 2.0]).unwrap()
    }

    #[test]
    fn combinations_enumerate_lexicographically() {
        let all: Vec<Vec<usize>> = Combinations::new(4, 2).collect();
        assert_eq!(
            all,
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        assert_eq!(Combinations::new(3, 0).count(), 1);
        assert_eq!(binomial(12, 5), 792);
    }

    #[test]
    fn max_det_examples() {
        let m = two_by_three();
        let h = ColumnSet::full(3);
        let r = max_det_subset(&m, &h).unwrap();
        assert_eq!(r.rank, 2);
        assert!((r.det_abs - 2.0).abs() < 1e-12);
        assert_eq!(r.p.indices(), &[0, 2], "lexicographic tie-break");

        let id = DenseMatrix::identity(3);
        let r = max_det_subset(&id, &ColumnSet::full(3)).unwrap();
        assert_eq!(r.p.indices(), &[0, 1, 2]);
        assert!((r.det_abs - 1.0).abs() < 1e-12);
    }

    #[test]
    fn max_det_rank_one_picks_largest_entry_column() {
        // Rank-1 outer product: the best 1x1 minor is the largest |entry|.
        let u = vec![1.0, -3.0, 2.0];
        let v = vec![0.5, 2.0, -1.0, 0.25];
        let m = DenseMatrix::from_fn(3, 4, |i, j| u[i] * v[j]);
        let r = max_det_subset(&m, &ColumnSet::full(4)).unwrap();
        assert_eq!(r.rank, 1);
        assert_eq!(r.p.indices(), &[1]);
        assert!((r.det_abs - 6.0).abs() < 1e-12);
    }

    #[test]
    fn max_det_self_consistent_under_reversed_scan() {
        // Second pass in reverse order must find the same maximum value.
        for seed in 0..10u64 {
            let mut rg = RngState::new(40 + seed).rng();
            let g1 = DenseMatrix::from_fn(5, 2, |_, _| rg.gen_range(-1.0..1.0));
            let g2 = DenseMatrix::from_fn(2, 7, |_, _| rg.gen_range(-1.0..1.0));
            let m = g1.mul(&g2);
            let h = ColumnSet::full(7);
            let fwd = max_det_subset(&m, &h).unwrap();
            let mut rev_best = 0.0f64;
            let ps: Vec<Vec<usize>> = Combinations::new(7, fwd.rank).collect();
            let qs: Vec<Vec<usize>> = Combinations::new(5, fwd.rank).collect();
            for p in ps.iter().rev() {
                for q in qs.iter().rev() {
                    rev_best = rev_best.max(submatrix_det(&m, q, p).abs());
                }
            }
            assert!(
                (fwd.det_abs - rev_best).abs() <= 1e-9 * rev_best.max(1e-300),
                "seed {seed}: {} vs {rev_best}",
                fwd.det_abs
            );
        }
    }

    #[test]
    fn cramer_example_coefficients() {
        let m = two_by_three();
        let h = ColumnSet::new(vec![0, 2]).unwrap();
        let alpha = cramer_coeffs(&m, &h, 1).unwrap();
        assert!((alpha[0] - -1.0).abs() < 1e-12);
        assert!((alpha[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cramer_duplicate_column_gives_unit_vector() {
        // Column 3 duplicates column 1 (higher index loses the tie), so
        // the expansion is the corresponding unit vector.
        let m = DenseMatrix::new(2, 4, vec![1.0, 0.0, 0.0, 1.0, 2.0, 2.0, 0.0, 1.0]).unwrap();
        let h = ColumnSet::new(vec![0, 1]).unwrap();
        let alpha = cramer_coeffs(&m, &h, 3).unwrap();
        assert!((alpha[0] - 0.0).abs() < 1e-12);
        assert!((alpha[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cramer_precondition_violation_detected() {
        let m = two_by_three();
        // H = {0,1}: adding column 2 (the largest-det column) puts i in P.
        let h = ColumnSet::new(vec![0, 1]).unwrap();
        assert!(matches!(cramer_coeffs(&m, &h, 2), Err(Error::Precondition(_))));
    }

    #[test]
    fn cramer_bound_holds_over_random_rank_two_instances() {
        let mut done = 0;
        let mut seed = 0u64;
        while done < 50 {
            seed += 1;
            let mut rg = RngState::new(900 + seed).rng();
            let g1 = DenseMatrix::from_fn(6, 2, |_, _| rg.gen_range(-1.0..1.0));
            let g2 = DenseMatrix::from_fn(2, 8, |_, _| rg.gen_range(-1.0..1.0));
            let m = g1.mul(&g2);
            let h = sample_subset(&RngState::new(7000 + seed), &ColumnSet::full(8), 4).unwrap();
            let rest = ColumnSet::full(8).minus(&h);
            let i = rest.indices()[0];
            match cramer_coeffs(&m, &h, i) {
                Ok(alpha) => {
                    done += 1;
                    let max = alpha.iter().fold(0.0f64, |m, a| m.max(a.abs()));
                    assert!(max <= 1.0 + 1e-9, "seed {seed}: max |alpha| = {max}");
                    // The expansion reproduces the column.
                    for r in 0..m.rows() {
                        let lhs: f64 = h
                            .indices()
                            .iter()
                            .zip(&alpha)
                            .map(|(&c, &al)| m.get(r, c) * al)
                            .sum();
                        assert!((lhs - m.get(r, i)).abs() <= 1e-8 * m.max_abs());
                    }
                }
                Err(Error::Precondition(_)) => continue,
                Err(e) => panic!("unexpected error {e:?}"),
            }
        }
    }

    #[test]
    fn coefficient_fit_bounded_by_noise_mass_l1() {
        // Plugging the Cramer coefficients into the noisy fit stays under
        // ati(|H|+1) * mon * (noise of i + noise of H) for the l1 loss.
        let g = LossSpec::l1();
        let mut cases = 0;
        let mut attempt = 0u64;
        while cases < 25 {
            attempt += 1;
            assert!(attempt < 5000);
            let root = RngState::new(12_000 + attempt);
            let mut r = root.derive(0).rng();
            let k = 1 + (attempt as usize) % 2;
            let rows = r.gen_range(5..=8);
            let m = r.gen_range((2 * k + 2).max(6)..=9);
            let g1 = DenseMatrix::from_fn(rows, k, |_, _| r.gen_range(-1.0..1.0));
            let g2 = DenseMatrix::from_fn(k, m, |_, _| r.gen_range(-1.0..1.0));
            let mstar = g1.mul(&g2);
            let noise = DenseMatrix::from_fn(rows, m, |_, _| r.gen_range(-0.2..0.2));
            let mfull = DenseMatrix::new(
                rows,
                m,
                mstar.data().iter().zip(noise.data()).map(|(a, b)| a + b).collect(),
            )
            .unwrap();
            let h = sample_subset(&root.derive(1), &ColumnSet::full(m), 2 * k).unwrap();
            let rest = ColumnSet::full(m).minus(&h);
            let i = rest.indices()[r.gen_range(0..rest.len())];
            let alpha = match cramer_coeffs(&mstar, &h, i) {
                Ok(a) => a,
                Err(Error::Precondition(_)) => continue,
                Err(e) => panic!("{e}"),
            };
            cases += 1;
            let fitted: Vec<f64> = (0..rows)
                .map(|row| {
                    h.indices()
                        .iter()
                        .zip(&alpha)
                        .map(|(&c, &al)| mfull.get(row, c) * al)
                        .sum::<f64>()
                        - mfull.get(row, i)
                })
                .collect();
            let achieved = g.vector_cost(&fitted);
            let mass: f64 = g.vector_cost(noise.col(i))
                + h.indices().iter().map(|&c| g.vector_cost(noise.col(c))).sum::<f64>();
            let bound = g.ati_bound(h.len() + 1) * g.mon_constant() * mass;
            assert!(achieved <= bound, "attempt {attempt}: {achieved} > {bound}");
        }
    }

    #[test]
    fn exhaustive_rank_one_single_column() {
        let u = vec![1.0, 2.0, -1.0, 0.5];
        let v = vec![2.0, -1.0, 3.0];
        let a = DenseMatrix::from_fn(4, 3, |i, j| u[i] * v[j]);
        let (_, cost) = exhaustive_best_subset(&a, &LossSpec::l2(), 1, 1000).unwrap();
        assert!(cost <= 1e-10 * a.frobenius_norm());
    }

    #[test]
    fn exhaustive_identity_missing_coordinate_costs_one() {
        let a = DenseMatrix::identity(5);
        let (_, cost) = exhaustive_best_subset(&a, &LossSpec::l1(), 4, 1000).unwrap();
        assert!(cost >= 1.0 - 1e-9, "cost {cost}");
    }

    #[test]
    fn exhaustive_budget_is_enforced() {
        let a = DenseMatrix::identity(30);
        assert!(matches!(
            exhaustive_best_subset(&a, &LossSpec::l2(), 15, 1000),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn exclusion_frequency_rank_one() {
        // Rank 1, H of size 2: at most one of the three sampled columns
        // can carry the max determinant, so exclusion happens for at
        // least two of three generic picks.
        let u = vec![1.0, -0.5, 2.0, 0.25, 1.5];
        let mut rg = RngState::new(3).rng();
        let v: Vec<f64> = (0..9).map(|_| rg.gen_range(0.5..2.0)).collect();
        let m = DenseMatrix::from_fn(5, 9, |i, j| u[i] * v[j]);
        let rep = monte_carlo_exclusion(&m, 2000, &RngState::new(5)).unwrap();
        assert_eq!(rep.rank, 1);
        assert!(rep.exclusion_frequency >= 0.6, "{}", rep.exclusion_frequency);
    }

    #[test]
    fn exclusion_trivial_for_zero_rank() {
        let m = DenseMatrix::zeros(4, 6);
        let rep = monte_carlo_exclusion(&m, 200, &RngState::new(1)).unwrap();
        assert_eq!(rep.exclusion_frequency, 1.0);
        assert_eq!(rep.batch_frequency, 1.0);
    }

    #[test]
    fn grid_regression_matches_closed_forms() {
        // Weighted-median style l1 problem with unit predictor.
        let g = LossSpec::l1();
        let a = vec![1.0, 1.0, 1.0];
        let b = vec![1.0, 2.0, 9.0];
        let (x, c) = grid_regress_1d(&g, &a, &b, 1e-7);
        assert!((x - 2.0).abs() < 1e-5, "x = {x}");
        assert!((c - 8.0).abs() < 1e-6);

        // Squared l2: the mean.
        let g2 = LossSpec::l2();
        let (x2, _) = grid_regress_1d(&g2, &a, &b, 1e-7);
        assert!((x2 - 4.0).abs() < 1e-5, "x = {x2}");
    }

    #[test]
    fn l1_baseline_recovers_exact_rank() {
        let mut rg = RngState::new(21).rng();
        let u = DenseMatrix::from_fn(12, 2, |_, _| rg.gen_range(-1.0..1.0));
        let v = DenseMatrix::from_fn(2, 10, |_, _| rg.gen_range(-1.0..1.0));
        let a = u.mul(&v);
        let b = l1_alternating_baseline(&a, 2, 50, RngState::new(2)).unwrap();
        let g = LossSpec::l1();
        let resid = g.matrix_cost(&b.sub(&a));
        assert!(resid <= 1e-6 * g.matrix_cost(&a), "residual {resid}");
    }

    #[test]
    fn l1_baseline_identity_lower_bound() {
        // No rank-1 matrix fits the identity well in l1.
        let n = 12;
        let a = DenseMatrix::identity(n);
        let b = l1_alternating_baseline(&a, 1, 50, RngState::new(3)).unwrap();
        let g = LossSpec::l1();
        let resid = g.matrix_cost(&b.sub(&a));
        assert!(resid >= (n - 2) as f64, "residual {resid}");
    }

    #[test]
    fn relu_rank_one_counterexample() {
        // A constant matrix of large value beats every column subset of
        // the identity under the relu cost: the best rank-1 cost is 0
        // while n-1 columns still leave a positive entry.
        let g = LossSpec::new(LossKind::Relu).unwrap();
        let n = 6;
        let id = DenseMatrix::identity(n);
        let big = DenseMatrix::from_fn(n, n, |_, _| 100.0);
        assert_eq!(g.matrix_cost(&id.sub(&big)), 0.0);
        // Any n-1 columns: the excluded coordinate keeps unit residual
        // under the l2 fit used as the X oracle.
        let s = ColumnSet::new((0..n - 1).collect()).unwrap();
        let sub = id.subset_columns(&s).unwrap();
        let x = crate::linalg::least_squares_minnorm(&sub, &id).unwrap();
        let resid = id.sub(&sub.mul(&x));
        assert!(g.matrix_cost(&resid) > 0.5);
    }
}
