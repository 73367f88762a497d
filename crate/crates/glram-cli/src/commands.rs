use crate::MatrixFormat;
use glram::error::{Error, Result};
use glram::experiment::{run_experiment, run_hardness, ratios_strictly_increase, HardnessKind, REPORT_SCHEMA};
use glram::instances::{default_kprime, GeneratedInstance, InstanceSpec};
use glram::io::{read_matrix_path, write_atomic, write_matrix_path};
use glram::loss::{check_ati, LossSpec};
use glram::matrix::{ColumnSet, DenseMatrix, sample_subset};
use glram::oracle::{cramer_coeffs, monte_carlo_exclusion};
use glram::regression::{batch_regress, RegressionConfig};
use glram::rng::RngState;
use glram::selector::{fit_back, select_columns, Preset, RoundRecord, SelectorConfig};
use rand::Rng;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| Error::Generation(format!("serialization: {e}")))?;
    bytes.push(b'\n');
    match path {
        Some(p) => write_atomic(p, &bytes),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes)?;
            Ok(())
        }
    }
}

fn default_hard_k(n: usize) -> usize {
    (((n as f64).log2().sqrt() * 0.5).floor() as usize).max(1)
}

#[allow(clippy::too_many_arguments)]
pub fn gen(
    kind: &str,
    n: usize,
    kprime: Option<usize>,
    k: Option<usize>,
    eps: Option<f64>,
    noise_model: Option<&str>,
    out: &Path,
    truth: Option<&Path>,
    noise_out: Option<&Path>,
    seed: u64,
    format: MatrixFormat,
) -> Result<()> {
    let spec = match kind.to_ascii_lowercase().as_str() {
        "exp3block" => InstanceSpec::ExperimentBlock {
            n,
            kprime: kprime.unwrap_or_else(|| default_kprime(n)),
        },
        "huber_hard" => {
            InstanceSpec::HuberHard { n, k: k.unwrap_or_else(|| default_hard_k(n)) }
        }
        "reverse_huber" => InstanceSpec::ReverseHuberHard { n },
        "identity_jl" => InstanceSpec::IdentityJl { n, target_eps: eps.unwrap_or(0.25) },
        "planted" => InstanceSpec::Planted {
            n,
            k: k.unwrap_or(2),
            noise: noise_model.unwrap_or("mixed").parse()?,
        },
        other => return Err(Error::InvalidArgument(format!("unknown kind {other:?}"))),
    };
    let binary = format.is_binary();
    match spec.generate(RngState::new(seed))? {
        GeneratedInstance::Planted(inst) => {
            write_matrix_path(&inst.a, out, binary)?;
            if let Some(p) = truth {
                write_matrix_path(&inst.a_star, p, binary)?;
            }
            if let Some(p) = noise_out {
                write_matrix_path(&inst.delta, p, binary)?;
            }
        }
        GeneratedInstance::Plain(m) => {
            if truth.is_some() || noise_out.is_some() {
                return Err(Error::InvalidArgument(format!(
                    "{kind} has no planted decomposition to emit"
                )));
            }
            write_matrix_path(&m, out, binary)?;
        }
        GeneratedInstance::IdentityPair { identity, approximation } => {
            write_matrix_path(&approximation, out, binary)?;
            if let Some(p) = truth {
                write_matrix_path(&identity, p, binary)?;
            }
            if noise_out.is_some() {
                return Err(Error::InvalidArgument(
                    "identity_jl emits only the approximation and the identity".into(),
                ));
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct TraceConfig {
    loss: String,
    #[serde(flatten)]
    selector: SelectorConfig,
}

#[derive(Serialize)]
struct TraceFile<'a> {
    config: TraceConfig,
    rounds: &'a [RoundRecord],
    #[serde(rename = "final_S")]
    final_s: &'a ColumnSet,
    fit_cost: f64,
    total_estimated_cost: f64,
}

pub fn select(loss: &str, k: usize, preset: &str, matrix: &Path, out: &Path, seed: u64) -> Result<()> {
    let g: LossSpec = loss.parse()?;
    let preset: Preset = preset.parse()?;
    let a = read_matrix_path(matrix)?;
    let cfg = SelectorConfig::for_matrix(k, preset, a.cols(), RngState::new(seed))?;
    let start = Instant::now();
    let trace = select_columns(&a, &g, &cfg)?;
    let (_, fit_cost) = fit_back(&a, &trace.final_s, &g)?;
    log::info!(
        "selected {} columns in {} rounds, fit cost {fit_cost:.6e} ({:.2}s)",
        trace.final_s.len(),
        trace.rounds.len(),
        start.elapsed().as_secs_f64()
    );
    let file = TraceFile {
        config: TraceConfig { loss: g.to_string(), selector: cfg },
        rounds: &trace.rounds,
        final_s: &trace.final_s,
        fit_cost,
        total_estimated_cost: trace.total_estimated_cost,
    };
    write_json(&file, Some(out))
}

pub fn regress(
    loss: &str,
    a_path: &Path,
    b_path: &Path,
    out: &Path,
    costs: &Path,
    format: MatrixFormat,
) -> Result<()> {
    let g: LossSpec = loss.parse()?;
    let a = read_matrix_path(a_path)?;
    let b = read_matrix_path(b_path)?;
    let outcome = batch_regress(&g, &a, &b, &RegressionConfig::default())?;
    write_matrix_path(&outcome.x, out, format.is_binary())?;
    let mut text = String::new();
    for v in &outcome.costs {
        writeln!(text, "{v}").expect("infallible");
    }
    write_atomic(costs, text.as_bytes())
}

#[derive(Serialize)]
struct ExclusionCheckReport {
    check: &'static str,
    n: usize,
    k: usize,
    trials: usize,
    exclusion_frequency: f64,
    batch_frequency: f64,
    threshold: f64,
    pass: bool,
}

#[derive(Serialize)]
struct CramerCheckReport {
    check: &'static str,
    cases: usize,
    max_abs_coefficient: f64,
    bound: f64,
    pass: bool,
}

#[allow(clippy::too_many_arguments)]
pub fn oracle(
    check: &str,
    n: usize,
    k: usize,
    trials: usize,
    t: usize,
    loss: &str,
    out: Option<&Path>,
    seed: u64,
) -> Result<()> {
    let root = RngState::new(seed);
    match check.to_ascii_lowercase().as_str() {
        // Frequency with which a random extra column escapes the
        // max-determinant set of a random sample.
        "lemma21" => {
            let mut rng = root.derive(1).rng();
            let g1 = DenseMatrix::from_fn(n, k, |_, _| rng.gen_range(-1.0..1.0));
            let g2 = DenseMatrix::from_fn(k, n, |_, _| rng.gen_range(-1.0..1.0));
            let mstar = g1.mul(&g2);
            let rep = monte_carlo_exclusion(&mstar, trials, &root.derive(2))?;
            let threshold = 0.5 - 3.0 * (0.25 / trials as f64).sqrt();
            let report = ExclusionCheckReport {
                check: "lemma21",
                n,
                k: rep.rank,
                trials,
                exclusion_frequency: rep.exclusion_frequency,
                batch_frequency: rep.batch_frequency,
                threshold,
                pass: rep.exclusion_frequency >= threshold,
            };
            write_json(&report, out)
        }
        // Cramer-rule coefficient magnitudes over random low-rank
        // instances satisfying the exclusion precondition.
        "cramer" => {
            let mut max_abs: f64 = 0.0;
            let mut cases = 0usize;
            let mut attempt = 0u64;
            while cases < trials {
                attempt += 1;
                if attempt > 50 * trials as u64 {
                    return Err(Error::Generation("precondition rarely satisfiable".into()));
                }
                let case_rng = root.derive(attempt);
                let mut rng = case_rng.derive(0).rng();
                // Enumeration stays cheap up to rank 6.
                let rank = 1 + (attempt as usize) % k.clamp(1, 6);
                let rows = rng.gen_range(rank.max(2)..=rank + 6);
                let m = rng.gen_range(rank + 3..=rank + 7);
                let g1 = DenseMatrix::from_fn(rows, rank, |_, _| rng.gen_range(-1.0..1.0));
                let g2 = DenseMatrix::from_fn(rank, m, |_, _| rng.gen_range(-1.0..1.0));
                let mstar = g1.mul(&g2);
                let hsize = rng.gen_range(rank.max(2)..=(rank + 2).min(m - 1));
                let h = sample_subset(&case_rng.derive(1), &ColumnSet::full(m), hsize)?;
                let rest = ColumnSet::full(m).minus(&h);
                let i = rest.indices()[rng.gen_range(0..rest.len())];
                match cramer_coeffs(&mstar, &h, i) {
                    Ok(alpha) => {
                        cases += 1;
                        for a in alpha {
                            max_abs = max_abs.max(a.abs());
                        }
                    }
                    Err(Error::Precondition(_)) => continue,
                    Err(e) => return Err(e),
                }
            }
            let report = CramerCheckReport {
                check: "cramer",
                cases,
                max_abs_coefficient: max_abs,
                bound: 1.0 + 1e-9,
                pass: max_abs <= 1.0 + 1e-9,
            };
            write_json(&report, out)
        }
        "ati" => {
            let g: LossSpec = loss.parse()?;
            let rep = check_ati(&g, t, trials, &root)?;
            write_json(&rep, out)
        }
        other => Err(Error::InvalidArgument(format!("unknown check {other:?}"))),
    }
}

#[derive(Serialize)]
struct DryRunReport {
    schema: &'static str,
    dry_run: bool,
    n: usize,
    k: usize,
    kprime: usize,
    seed: u64,
    preset: Preset,
    loss: String,
    l1_alternations: usize,
}

#[allow(clippy::too_many_arguments)]
pub fn experiment(
    n: usize,
    k: usize,
    preset: &str,
    alternations: usize,
    out_dir: &Path,
    dry_run: bool,
    seed: u64,
    format: MatrixFormat,
) -> Result<()> {
    let preset: Preset = preset.parse()?;
    std::fs::create_dir_all(out_dir)?;
    if dry_run {
        let report = DryRunReport {
            schema: REPORT_SCHEMA,
            dry_run: true,
            n,
            k,
            kprime: default_kprime(n),
            seed,
            preset,
            loss: LossSpec::huber(1.0).to_string(),
            l1_alternations: alternations,
        };
        return write_json(&report, Some(&out_dir.join("report.json")));
    }
    let start = Instant::now();
    let art = run_experiment(n, k, seed, preset, alternations)?;
    log::info!("experiment n={n} seed={seed} finished in {:.2}s", start.elapsed().as_secs_f64());

    write_json(&art.report, Some(&out_dir.join("report.json")))?;
    let mut csv = String::from("method,huber_cost\n");
    writeln!(csv, "ours,{}", art.report.costs.ours).expect("infallible");
    writeln!(csv, "svd,{}", art.report.costs.svd).expect("infallible");
    writeln!(csv, "l1_baseline,{}", art.report.costs.l1_baseline).expect("infallible");
    write_atomic(&out_dir.join("costs.csv"), csv.as_bytes())?;

    let ext = if format.is_binary() { "bin" } else { "csv" };
    let binary = format.is_binary();
    write_matrix_path(&art.instance.a, &out_dir.join(format!("a.{ext}")), binary)?;
    write_matrix_path(&art.ours_x, &out_dir.join(format!("ours_x.{ext}")), binary)?;
    write_matrix_path(&art.svd_fit, &out_dir.join(format!("svd_fit.{ext}")), binary)?;
    write_matrix_path(&art.l1_fit, &out_dir.join(format!("l1_fit.{ext}")), binary)?;
    Ok(())
}

pub fn hardness(kind: &str, sizes: &str, out: &Path, seed: u64) -> Result<()> {
    let kind: HardnessKind = kind.parse()?;
    let sizes: Vec<usize> = sizes
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>()
                .map_err(|e| Error::InvalidArgument(format!("bad size {s:?}: {e}")))
        })
        .collect::<Result<_>>()?;
    let rows = run_hardness(kind, &sizes, seed)?;
    let mut csv = String::from("n,subset_cost,rank_cost,ratio\n");
    for r in &rows {
        writeln!(csv, "{},{},{},{}", r.n, r.subset_cost, r.rank_cost, r.ratio).expect("infallible");
    }
    write_atomic(out, csv.as_bytes())?;
    println!("monotone_increase={}", ratios_strictly_increase(&rows));
    Ok(())
}
