//! Iterative column subset selection and the final low-rank fit.
//!
//! Each round samples `sample_size` columns uniformly from the surviving
//! set T, regresses every other surviving column against the sample,
//! prunes the fixed fraction with the smallest estimated costs, and
//! keeps the best of `repeats_per_round` such attempts. The returned set
//! is the union of all round samples plus whatever survives the loop.
//!
//! Two presets: `Theory` uses the analysis constants (drop 1/20, stop at
//! 1000k, log2(n) repeats); `Experiment` uses the constants that make
//! desk-scale runs meaningful (drop 1/2, stop at 4k, 20 repeats).

use crate::error::{Error, Result};
use crate::loss::LossSpec;
use crate::matrix::{sample_subset, ColumnSet, DenseMatrix};
use crate::regression::{batch_regress, RegressionConfig};
use crate::rng::RngState;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Theory,
    Experiment,
}

impl std::str::FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "theory" => Ok(Preset::Theory),
            "experiment" => Ok(Preset::Experiment),
            other => Err(Error::Parse(format!("unknown preset {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectorConfig {
    pub k: usize,
    pub preset: Preset,
    pub sample_size: usize,
    pub drop_fraction: f64,
    pub repeats_per_round: usize,
    pub stop_threshold: usize,
    pub seed: RngState,
}

impl SelectorConfig {
    /// Preset constants; the Theory repeat count depends on the number of
    /// columns of the target matrix.
    pub fn for_matrix(k: usize, preset: Preset, ncols: usize, seed: RngState) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        let cfg = match preset {
            Preset::Theory => SelectorConfig {
                k,
                preset,
                sample_size: 2 * k,
                drop_fraction: 1.0 / 20.0,
                repeats_per_round: (ncols.max(2) as f64).log2().ceil() as usize,
                stop_threshold: 1000 * k,
                seed,
            },
            Preset::Experiment => SelectorConfig {
                k,
                preset,
                sample_size: 2 * k,
                drop_fraction: 0.5,
                repeats_per_round: 20,
                stop_threshold: 4 * k,
                seed,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_size == 0 {
            return Err(Error::InvalidArgument("sample_size must be positive".into()));
        }
        if self.stop_threshold <= self.sample_size {
            return Err(Error::InvalidArgument(format!(
                "stop_threshold {} must exceed sample_size {}",
                self.stop_threshold, self.sample_size
            )));
        }
        if !(self.drop_fraction > 0.0 && self.drop_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "drop_fraction must lie in (0,1), got {}",
                self.drop_fraction
            )));
        }
        if self.repeats_per_round == 0 {
            return Err(Error::InvalidArgument("repeats_per_round must be positive".into()));
        }
        Ok(())
    }
}

/// One selection round: the winning sample, what it pruned, and the
/// per-repeat pruned-cost sums the winner was chosen from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub winning_repeat: usize,
    pub sampled: ColumnSet,
    pub pruned: ColumnSet,
    pub cost: f64,
    pub remaining: usize,
    pub repeat_costs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionTrace {
    pub rounds: Vec<RoundRecord>,
    #[serde(rename = "final_S")]
    pub final_s: ColumnSet,
    pub total_estimated_cost: f64,
}

/// Run the selection loop on the columns of `a` under loss `g`.
pub fn select_columns(a: &DenseMatrix, g: &LossSpec, cfg: &SelectorConfig) -> Result<SelectionTrace> {
    cfg.validate()?;
    let reg_cfg = RegressionConfig::default();
    let mut t = ColumnSet::full(a.cols());
    let mut union_s = ColumnSet::new(Vec::new()).expect("empty set");
    let mut rounds: Vec<RoundRecord> = Vec::new();
    let mut round = 1usize;

    while t.len() >= cfg.stop_threshold {
        let mut repeat_costs: Vec<f64> = Vec::with_capacity(cfg.repeats_per_round);
        let mut best: Option<(usize, ColumnSet, ColumnSet, f64)> = None;
        for j in 0..cfg.repeats_per_round {
            let rng = cfg.seed.derive(round as u64).derive(j as u64);
            let sampled = sample_subset(&rng, &t, cfg.sample_size)?;
            let rest = t.minus(&sampled);
            let a_s = a.subset_columns(&sampled)?;
            let b = a.subset_columns(&rest)?;
            let out = batch_regress(g, &a_s, &b, &reg_cfg).map_err(|e| match e {
                Error::Capability(msg) => {
                    Error::Capability(format!("round {round}, repeat {j}: {msg}"))
                }
                Error::Solver(msg) => Error::Solver(format!("round {round}, repeat {j}: {msg}")),
                other => other,
            })?;

            // Estimated costs drive the pruning; ties break toward the
            // lower column index.
            let prune_count = ((cfg.drop_fraction * rest.len() as f64).ceil() as usize).max(1);
            let mut order: Vec<(f64, usize)> =
                out.costs.iter().copied().zip(rest.iter().copied()).collect();
            order.sort_by(|(ca, ia), (cb, ib)| {
                ca.partial_cmp(cb).expect("finite costs").then(ia.cmp(ib))
            });
            let chosen = &order[..prune_count.min(order.len())];
            let cost: f64 = chosen.iter().map(|(c, _)| c).sum();
            let pruned = ColumnSet::new(chosen.iter().map(|&(_, i)| i).collect())?;
            repeat_costs.push(cost);
            if best.as_ref().map_or(true, |(_, _, _, c)| cost < *c) {
                best = Some((j, sampled, pruned, cost));
            }
        }
        let (jstar, sampled, pruned, cost) = best.expect("repeats_per_round >= 1");
        t = t.minus(&sampled).minus(&pruned);
        union_s = union_s.union(&sampled);
        log::debug!(
            "round {round}: repeat {jstar} wins with pruned cost {cost:.6e}, {} columns remain",
            t.len()
        );
        rounds.push(RoundRecord {
            round,
            winning_repeat: jstar,
            sampled,
            pruned,
            cost,
            remaining: t.len(),
            repeat_costs,
        });
        round += 1;
    }

    let total_estimated_cost = rounds.iter().map(|r| r.cost).sum();
    Ok(SelectionTrace { rounds, final_s: t.union(&union_s), total_estimated_cost })
}

/// Regress the whole matrix on the selected columns and report the
/// achieved cost of the fit.
pub fn fit_back(a: &DenseMatrix, s: &ColumnSet, g: &LossSpec) -> Result<(DenseMatrix, f64)> {
    if s.is_empty() {
        return Err(Error::InvalidArgument("selected set must be nonempty".into()));
    }
    let a_s = a.subset_columns(s)?;
    let out = batch_regress(g, &a_s, a, &RegressionConfig::default())?;
    let cost = g.matrix_cost(&a_s.mul(&out.x).sub(a));
    Ok((out.x, cost))
}
