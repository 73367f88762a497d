//! Seeded generators for every synthetic matrix the experiments and
//! hardness measurements need: the three-block benchmark, the
//! scale-sensitivity hard instances, the near-identity counterexample,
//! and generic planted low-rank-plus-noise matrices.
//!
//! Generation is deterministic given the seed; each generator documents
//! its draw order and derives a private stream per stage so adding a
//! stage never perturbs the others.

use crate::error::{Error, Result};
use crate::linalg::numerical_rank;
use crate::loss::LossSpec;
use crate::matrix::DenseMatrix;
use crate::rng::RngState;
use rand::Rng;
use rand_distr::StandardNormal;

/// A synthetic matrix with known low-rank part and residual.
#[derive(Debug, Clone)]
pub struct PlantedInstance {
    pub a: DenseMatrix,
    pub a_star: DenseMatrix,
    pub delta: DenseMatrix,
}

impl PlantedInstance {
    fn assemble(a_star: DenseMatrix, delta: DenseMatrix) -> Result<Self> {
        let a = DenseMatrix::new(
            a_star.rows(),
            a_star.cols(),
            a_star.data().iter().zip(delta.data()).map(|(s, d)| s + d).collect(),
        )?;
        Ok(PlantedInstance { a, a_star, delta })
    }

    /// Cost of the residual under `g` — an upper bound on the optimal
    /// cost at the planted rank.
    pub fn opt_cost(&self, g: &LossSpec) -> f64 {
        g.matrix_cost(&self.delta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    Gaussian { sigma: f64 },
    SparseOutliers { density: f64, magnitude: f64 },
    Mixed { sigma: f64, density: f64, magnitude: f64 },
}

impl std::str::FromStr for NoiseModel {
    type Err = Error;

    /// Accepts "gaussian:sigma=0.1", "sparse:density=0.05,magnitude=5",
    /// "mixed:sigma=0.1,density=0.05,magnitude=5".
    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = match s.split_once(':') {
            Some((n, r)) => (n.trim(), r),
            None => (s.trim(), ""),
        };
        let mut map = std::collections::BTreeMap::new();
        for item in rest.split(',').filter(|t| !t.trim().is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad noise parameter {item:?}")))?;
            map.insert(
                k.trim().to_string(),
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad value for {k:?}: {e}")))?,
            );
        }
        let get = |key: &str, default: f64| map.get(key).copied().unwrap_or(default);
        match name.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(NoiseModel::Gaussian { sigma: get("sigma", 0.1) }),
            "sparse" | "sparse_outliers" => Ok(NoiseModel::SparseOutliers {
                density: get("density", 0.05),
                magnitude: get("magnitude", 5.0),
            }),
            "mixed" => Ok(NoiseModel::Mixed {
                sigma: get("sigma", 0.05),
                density: get("density", 0.05),
                magnitude: get("magnitude", 5.0),
            }),
            other => Err(Error::Parse(format!("unknown noise model {other:?}"))),
        }
    }
}

/// Benchmark output ranks for the sizes the experiment tabulates; the
/// first block replicates this many distinct columns.
pub fn default_kprime(n: usize) -> usize {
    if n <= 300 {
        12
    } else {
        14
    }
}

/// Parameterized description of a synthetic matrix. One value fully
/// determines the generated output.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSpec {
    ExperimentBlock { n: usize, kprime: usize },
    HuberHard { n: usize, k: usize },
    ReverseHuberHard { n: usize },
    IdentityJl { n: usize, target_eps: f64 },
    Planted { n: usize, k: usize, noise: NoiseModel },
}

/// A generated matrix, with the planted decomposition where one exists.
#[derive(Debug, Clone)]
pub enum GeneratedInstance {
    Planted(PlantedInstance),
    Plain(DenseMatrix),
    /// The identity alongside its sign-sketch approximation.
    IdentityPair { identity: DenseMatrix, approximation: DenseMatrix },
}

impl InstanceSpec {
    pub fn generate(&self, seed: RngState) -> Result<GeneratedInstance> {
        match *self {
            InstanceSpec::ExperimentBlock { n, kprime } => {
                Ok(GeneratedInstance::Planted(gen_experiment_block(n, kprime, seed)?))
            }
            InstanceSpec::HuberHard { n, k } => {
                Ok(GeneratedInstance::Plain(gen_huber_hard(n, k, seed)?.matrix))
            }
            InstanceSpec::ReverseHuberHard { n } => {
                Ok(GeneratedInstance::Plain(gen_reverse_huber_hard(n)?))
            }
            InstanceSpec::IdentityJl { n, target_eps } => {
                let (identity, approximation) = gen_identity_jl(n, target_eps, seed)?;
                Ok(GeneratedInstance::IdentityPair { identity, approximation })
            }
            InstanceSpec::Planted { n, k, noise } => {
                Ok(GeneratedInstance::Planted(gen_planted(n, k, &noise, seed)?))
            }
        }
    }
}

/// The three-block benchmark matrix: a large block of replicated
/// small-magnitude columns, a dense Gaussian ground-truth block, and a
/// diagonal block of huge sparse outliers. The ground-truth block is the
/// planted low-rank part; everything else is residual.
///
/// Block sizes: floor(4n/5), n - floor(4n/5) - k', and k'; when n is not
/// divisible by 5 the rounding remainder is absorbed into the middle
/// block.
///
/// Draw order: (1) the k' replicated column patterns, (2) the Gaussian
/// factors U then V column by column, (3) the outlier signs.
pub fn gen_experiment_block(n: usize, kprime: usize, seed: RngState) -> Result<PlantedInstance> {
    if !(200..=1000).contains(&n) {
        return Err(Error::InvalidArgument(format!("n must lie in [200, 1000], got {n}")));
    }
    let n1 = 4 * n / 5;
    if n1 + kprime >= n {
        return Err(Error::InvalidArgument(format!(
            "k' = {kprime} leaves no room for the middle block at n = {n}"
        )));
    }
    let n2 = n - n1 - kprime;
    let amp = 5.0 / (n as f64).sqrt();

    let mut a_star = DenseMatrix::zeros(n, n);
    let mut delta = DenseMatrix::zeros(n, n);

    // Block 1: k' distinct patterns, columns assigned round robin so
    // every pattern appears.
    let mut rng1 = seed.derive(1).rng();
    let mut patterns = vec![vec![0.0f64; n1]; kprime];
    for pat in patterns.iter_mut() {
        for v in pat.iter_mut() {
            *v = if rng1.gen::<bool>() { amp } else { -amp };
        }
    }
    for j in 0..n1 {
        let pat = &patterns[j % kprime];
        for i in 0..n1 {
            delta.set(i, j, pat[i]);
        }
    }

    // Block 2: ground truth (1/sqrt(k')) U V^T with iid standard normals.
    let mut rng2 = seed.derive(2).rng();
    let u = DenseMatrix::from_fn(n2, kprime, |_, _| rng2.sample::<f64, _>(StandardNormal));
    let v = DenseMatrix::from_fn(n2, kprime, |_, _| rng2.sample::<f64, _>(StandardNormal));
    let scale = 1.0 / (kprime as f64).sqrt();
    for j in 0..n2 {
        for i in 0..n2 {
            let dot: f64 = (0..kprime).map(|l| u.get(i, l) * v.get(j, l)).sum();
            a_star.set(n1 + i, n1 + j, scale * dot);
        }
    }

    // Block 3: diagonal sparse outliers with iid signs.
    let mut rng3 = seed.derive(3).rng();
    let outlier = 5.0 * (n as f64).powf(0.8);
    for d in 0..kprime {
        let sign = if rng3.gen::<bool>() { 1.0 } else { -1.0 };
        delta.set(n1 + n2 + d, n1 + n2 + d, sign * outlier);
    }

    PlantedInstance::assemble(a_star, delta)
}

/// Group layout of the scale-sensitivity instance for the smooth
/// quadratic-to-linear loss.
#[derive(Debug, Clone)]
pub struct HardGroup {
    pub columns: std::ops::Range<usize>,
    pub base: f64,
    pub small_noise: f64,
    pub large_noise: f64,
}

#[derive(Debug, Clone)]
pub struct HuberHardInstance {
    pub matrix: DenseMatrix,
    pub groups: Vec<HardGroup>,
    /// Count of trailing large-noise coordinates per column.
    pub large_rows: usize,
}

impl HuberHardInstance {
    /// Cost of the noise part alone — the rank-1-per-group witness bound.
    pub fn mean_matrix_residual_cost(&self, g: &LossSpec) -> f64 {
        let n = self.matrix.rows();
        let mut total = 0.0;
        for grp in &self.groups {
            for j in grp.columns.clone() {
                for i in 0..n {
                    total += g.eval(self.matrix.get(i, j) - grp.base);
                }
            }
        }
        total
    }
}

/// Hard instance with k geometric column groups: group i has
/// floor(n^(1-2ie)) columns at mean n^(1.5ie), small noise of magnitude
/// n^(-0.2+ie) on most coordinates and large noise n^(0.5+2ie) on the
/// last ceil(n^0.1), with e = 0.2/(1.5k). Remaining columns are zero.
pub fn gen_huber_hard(n: usize, k: usize, seed: RngState) -> Result<HuberHardInstance> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let nf = n as f64;
    let eps = 0.2 / (1.5 * k as f64);
    let large_rows = nf.powf(0.1).ceil() as usize;
    if large_rows >= n {
        return Err(Error::InvalidArgument(format!("n = {n} too small for the noise split")));
    }
    let mut counts = Vec::with_capacity(k);
    let mut total = 0usize;
    for i in 1..=k {
        let c = nf.powf(1.0 - 2.0 * i as f64 * eps).floor() as usize;
        if c == 0 {
            return Err(Error::InvalidArgument(format!("group {i} would be empty at n = {n}")));
        }
        total += c;
        counts.push(c);
    }
    if total > n {
        return Err(Error::InvalidArgument(format!(
            "group sizes sum to {total} > n = {n}"
        )));
    }

    let mut m = DenseMatrix::zeros(n, n);
    let mut groups = Vec::with_capacity(k);
    let mut rng = seed.rng();
    let mut col = 0usize;
    for (gi, &count) in counts.iter().enumerate() {
        let i = (gi + 1) as f64;
        let base = nf.powf(1.5 * i * eps);
        let small = nf.powf(-0.2 + i * eps);
        let large = nf.powf(0.5 + 2.0 * i * eps);
        for j in col..col + count {
            for row in 0..n {
                let amp = if row < n - large_rows { small } else { large };
                let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                m.set(row, j, base + sign * amp);
            }
        }
        groups.push(HardGroup { columns: col..col + count, base, small_noise: small, large_noise: large });
        col += count;
    }
    Ok(HuberHardInstance { matrix: m, groups, large_rows })
}

/// One tall spike column plus n-1 copies of a flat column: the instance
/// that separates single-column selection from rank-1 approximation for
/// losses that grow quadratically in the tails.
pub fn gen_reverse_huber_hard(n: usize) -> Result<DenseMatrix> {
    if n < 2 {
        return Err(Error::InvalidArgument("need n >= 2".into()));
    }
    let spike = (n as f64).sqrt();
    let flat = 1.0 / n as f64;
    Ok(DenseMatrix::from_fn(n, n, |i, j| {
        if j == 0 {
            if i == 0 {
                spike
            } else {
                0.0
            }
        } else if i == 0 {
            0.0
        } else {
            flat
        }
    }))
}

/// The identity together with a rank-k sign-matrix approximation B =
/// U U^T whose entries stay within `target_eps` of the identity. k starts
/// at ceil(eps^-2 ln n) and doubles on failure, with fresh randomness,
/// up to 20 attempts.
pub fn gen_identity_jl(
    n: usize,
    target_eps: f64,
    seed: RngState,
) -> Result<(DenseMatrix, DenseMatrix)> {
    if !(target_eps > 1.0 / (n as f64).sqrt() && target_eps < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "target_eps must lie in (1/sqrt(n), 1/2), got {target_eps}"
        )));
    }
    let mut k = ((target_eps.powi(-2) * (n as f64).ln()).ceil() as usize).max(1);
    let mut worst = f64::INFINITY;
    for attempt in 0..20u64 {
        if (n * n) as u128 * k as u128 > 2_000_000_000 {
            return Err(Error::Generation(format!(
                "rank {k} too large to test at n = {n} (best off-diagonal so far {worst})"
            )));
        }
        let mut rng = seed.derive(attempt).rng();
        let amp = 1.0 / (k as f64).sqrt();
        let u = DenseMatrix::from_fn(n, k, |_, _| if rng.gen::<bool>() { amp } else { -amp });
        let b = u.mul(&u.transpose());
        let mut max_dev = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                max_dev = max_dev.max((b.get(i, j) - target).abs());
            }
        }
        if max_dev <= target_eps {
            return Ok((DenseMatrix::identity(n), b));
        }
        worst = worst.min(max_dev);
        k *= 2;
    }
    Err(Error::Generation(format!(
        "no sign matrix reached deviation {target_eps} in 20 attempts (best {worst})"
    )))
}

/// Generic planted instance: a rank-k product with unit-norm columns
/// plus noise from the given model. Draw order: G1, G2, then the noise.
pub fn gen_planted(
    n: usize,
    k: usize,
    noise: &NoiseModel,
    seed: RngState,
) -> Result<PlantedInstance> {
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("rank {k} out of range for n = {n}")));
    }
    let mut rng_a = seed.derive(1).rng();
    let g1 = DenseMatrix::from_fn(n, k, |_, _| rng_a.sample::<f64, _>(StandardNormal));
    let g2 = DenseMatrix::from_fn(k, n, |_, _| rng_a.sample::<f64, _>(StandardNormal));
    let mut a_star = g1.mul(&g2);
    for j in 0..n {
        let norm: f64 = a_star.col(j).iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-300 {
            for i in 0..n {
                let v = a_star.get(i, j) / norm;
                a_star.set(i, j, v);
            }
        }
    }

    let mut rng_n = seed.derive(2).rng();
    let mut delta = DenseMatrix::zeros(n, n);
    let apply_gaussian = |delta: &mut DenseMatrix, rng: &mut rand_chacha::ChaCha8Rng, sigma: f64| {
        if sigma > 0.0 {
            for j in 0..n {
                for i in 0..n {
                    let z: f64 = rng.sample(StandardNormal);
                    let v = delta.get(i, j) + sigma * z;
                    delta.set(i, j, v);
                }
            }
        }
    };
    let apply_outliers =
        |delta: &mut DenseMatrix, rng: &mut rand_chacha::ChaCha8Rng, density: f64, magnitude: f64| {
            if density > 0.0 {
                for j in 0..n {
                    for i in 0..n {
                        if rng.gen::<f64>() < density {
                            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                            let v = delta.get(i, j) + sign * magnitude;
                            delta.set(i, j, v);
                        }
                    }
                }
            }
        };
    match *noise {
        NoiseModel::Gaussian { sigma } => apply_gaussian(&mut delta, &mut rng_n, sigma),
        NoiseModel::SparseOutliers { density, magnitude } => {
            apply_outliers(&mut delta, &mut rng_n, density, magnitude)
        }
        NoiseModel::Mixed { sigma, density, magnitude } => {
            apply_gaussian(&mut delta, &mut rng_n, sigma);
            apply_outliers(&mut delta, &mut rng_n, density, magnitude);
        }
    }
    let inst = PlantedInstance::assemble(a_star, delta)?;
    debug_assert!(numerical_rank(&inst.a_star) <= k);
    Ok(inst)
}
