//! Entrywise loss functions and their structural constants.
//!
//! Each registered loss carries the constants the selection analysis
//! needs: a bound `ati_bound(t)` such that g(sum of t reals) <=
//! ati_bound(t) * sum of g values, and a monotonicity constant such that
//! g(x) <= mon * g(y) whenever |x| <= |y|. The bounds are pinned to the
//! smallest constants the empirical certifier [`check_ati`] accepts;
//! callers can scale them via [`LossSpec::with_ati_scale`].
//!
//! Losses that deliberately break a property (jumping, relu, l0,
//! reverse-huber's scale behavior) are registered too — they drive the
//! counterexample tests.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::rng::RngState;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossKind {
    Huber { tau: f64 },
    Lp { p: f64 },
    L1L2,
    GemanMcClure,
    Fair { tau: f64 },
    Tukey { tau: f64 },
    Cauchy { tau: f64 },
    Quantile { tau: f64 },
    L0,
    ReverseHuber { tau: f64 },
    Jumping { c: f64, tau: f64 },
    Relu,
}

/// A loss function together with its structural constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub kind: LossKind,
    /// Multiplier applied on top of the registered ati constant.
    #[serde(default = "one")]
    pub ati_scale: f64,
}

fn one() -> f64 {
    1.0
}

impl LossSpec {
    pub fn new(kind: LossKind) -> Result<Self> {
        match kind {
            LossKind::Huber { tau }
            | LossKind::Fair { tau }
            | LossKind::Tukey { tau }
            | LossKind::Cauchy { tau }
            | LossKind::ReverseHuber { tau } => {
                if !(tau > 0.0) {
                    return Err(Error::InvalidArgument(format!("tau must be positive, got {tau}")));
                }
            }
            LossKind::Lp { p } => {
                if !(p >= 1.0) {
                    return Err(Error::InvalidArgument(format!("p must be >= 1, got {p}")));
                }
            }
            LossKind::Quantile { tau } => {
                if !(tau > 0.0 && tau < 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "quantile tau must lie in (0,1), got {tau}"
                    )));
                }
            }
            LossKind::Jumping { c, tau } => {
                if !(c > 0.0 && tau > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "jumping needs c > 0 and tau > 0, got c={c} tau={tau}"
                    )));
                }
            }
            LossKind::L1L2 | LossKind::GemanMcClure | LossKind::L0 | LossKind::Relu => {}
        }
        Ok(LossSpec { kind, ati_scale: 1.0 })
    }

    pub fn huber(tau: f64) -> Self {
        LossSpec::new(LossKind::Huber { tau }).unwrap()
    }

    pub fn lp(p: f64) -> Self {
        LossSpec::new(LossKind::Lp { p }).unwrap()
    }

    pub fn l1() -> Self {
        Self::lp(1.0)
    }

    pub fn l2() -> Self {
        Self::lp(2.0)
    }

    pub fn with_ati_scale(mut self, scale: f64) -> Self {
        self.ati_scale = scale;
        self
    }

    /// Pointwise loss value.
    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            LossKind::Huber { tau } => {
                let a = x.abs();
                if a <= tau {
                    0.5 * x * x
                } else {
                    tau * (a - 0.5 * tau)
                }
            }
            LossKind::Lp { p } => x.abs().powf(p) / p,
            // 2(sqrt(1+x^2/2)-1) rationalized to avoid cancellation at small x.
            LossKind::L1L2 => x * x / ((1.0 + 0.5 * x * x).sqrt() + 1.0),
            LossKind::GemanMcClure => x * x / (2.0 + 2.0 * x * x),
            LossKind::Fair { tau } => {
                let u = x.abs() / tau;
                // u - ln(1+u) cancels for small u; switch to the series.
                let core = if u < 1e-4 {
                    u * u * (0.5 - u * (1.0 / 3.0 - u * (0.25 - u / 5.0)))
                } else {
                    u - u.ln_1p()
                };
                tau * tau * core
            }
            LossKind::Tukey { tau } => {
                let a = x.abs();
                if a <= tau {
                    // 1-(1-u)^3 expanded: u(3-3u+u^2), stable for small u.
                    let u = (x / tau) * (x / tau);
                    tau * tau / 6.0 * (u * (3.0 - 3.0 * u + u * u))
                } else {
                    tau * tau / 6.0
                }
            }
            LossKind::Cauchy { tau } => 0.5 * tau * tau * ((x / tau) * (x / tau)).ln_1p(),
            LossKind::Quantile { tau } => {
                if x >= 0.0 {
                    tau * x
                } else {
                    (tau - 1.0) * x
                }
            }
            LossKind::L0 => {
                if x != 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            LossKind::ReverseHuber { tau } => {
                let a = x.abs();
                if a <= tau {
                    a
                } else {
                    x * x / tau
                }
            }
            LossKind::Jumping { c, tau } => {
                if x.abs() > tau {
                    c
                } else {
                    0.0
                }
            }
            LossKind::Relu => x.max(0.0),
        }
    }

    /// IRLS weight psi(r)/r where psi = g'. `None` for losses without a
    /// usable derivative-based weight.
    pub fn irls_weight(&self, r: f64) -> Option<f64> {
        let a = r.abs();
        match self.kind {
            LossKind::Huber { tau } => Some(if a <= tau { 1.0 } else { tau / a }),
            LossKind::Lp { p } => {
                if a == 0.0 {
                    // Limit handled by the caller's weight floor.
                    Some(if p >= 2.0 { 0.0 } else { f64::INFINITY })
                } else {
                    Some(a.powf(p - 2.0))
                }
            }
            LossKind::L1L2 => Some(1.0 / (1.0 + 0.5 * r * r).sqrt()),
            LossKind::GemanMcClure => {
                let u = 1.0 + r * r;
                Some(1.0 / (u * u))
            }
            LossKind::Fair { tau } => Some(1.0 / (1.0 + a / tau)),
            LossKind::Tukey { tau } => {
                if a <= tau {
                    let u = 1.0 - (r / tau) * (r / tau);
                    Some(u * u)
                } else {
                    Some(0.0)
                }
            }
            LossKind::Cauchy { tau } => Some(1.0 / (1.0 + (r / tau) * (r / tau))),
            LossKind::Quantile { tau } => {
                if a == 0.0 {
                    Some(f64::INFINITY)
                } else if r > 0.0 {
                    Some(tau / a)
                } else {
                    Some((1.0 - tau) / a)
                }
            }
            LossKind::ReverseHuber { tau } => Some(if a <= tau { 1.0 / a.max(f64::MIN_POSITIVE) } else { 2.0 / tau }),
            LossKind::L0 | LossKind::Jumping { .. } | LossKind::Relu => None,
        }
    }

    /// Constant for the t-term approximate triangle inequality.
    pub fn ati_bound(&self, t: usize) -> f64 {
        let t = t.max(1) as f64;
        let base = match self.kind {
            LossKind::Huber { .. }
            | LossKind::L1L2
            | LossKind::GemanMcClure
            | LossKind::Fair { .. }
            | LossKind::Tukey { .. }
            | LossKind::Cauchy { .. }
            | LossKind::ReverseHuber { .. } => t,
            LossKind::Lp { p } => t.powf(p - 1.0),
            LossKind::Quantile { .. } | LossKind::L0 | LossKind::Relu => 1.0,
            // No finite constant exists; the registry keeps the loss only
            // to drive counterexamples.
            LossKind::Jumping { .. } => f64::INFINITY,
        };
        base * self.ati_scale
    }

    /// Monotonicity constant: g(x) <= mon * g(y) whenever |x| <= |y|.
    pub fn mon_constant(&self) -> f64 {
        match self.kind {
            LossKind::Quantile { tau } => (tau / (1.0 - tau)).max((1.0 - tau) / tau),
            LossKind::Relu => f64::INFINITY,
            _ => 1.0,
        }
    }

    pub fn is_convex(&self) -> bool {
        matches!(
            self.kind,
            LossKind::Huber { .. }
                | LossKind::Lp { .. }
                | LossKind::L1L2
                | LossKind::Fair { .. }
                | LossKind::Quantile { .. }
                | LossKind::ReverseHuber { .. }
                | LossKind::Relu
        )
    }

    /// Symmetric, monotone, and growing at least linearly but at most
    /// quadratically — the class with fast sketched regression.
    pub fn is_sketchable(&self) -> bool {
        match self.kind {
            LossKind::Huber { .. } | LossKind::L1L2 | LossKind::Fair { .. } => true,
            LossKind::Lp { p } => (1.0..=2.0).contains(&p),
            _ => false,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        !matches!(self.kind, LossKind::Quantile { .. } | LossKind::Relu)
    }

    pub fn is_scale_invariant(&self) -> bool {
        matches!(
            self.kind,
            LossKind::Lp { .. } | LossKind::L0 | LossKind::Quantile { .. } | LossKind::Relu
        )
    }

    pub fn vector_cost(&self, v: &[f64]) -> f64 {
        v.iter().map(|&x| self.eval(x)).sum()
    }

    pub fn matrix_cost(&self, a: &DenseMatrix) -> f64 {
        (0..a.cols()).map(|j| self.vector_cost(a.col(j))).sum()
    }
}

impl fmt::Display for LossSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            LossKind::Huber { tau } => write!(f, "huber:tau={tau}"),
            LossKind::Lp { p } => write!(f, "lp:p={p}"),
            LossKind::L1L2 => write!(f, "l1l2"),
            LossKind::GemanMcClure => write!(f, "geman_mcclure"),
            LossKind::Fair { tau } => write!(f, "fair:tau={tau}"),
            LossKind::Tukey { tau } => write!(f, "tukey:tau={tau}"),
            LossKind::Cauchy { tau } => write!(f, "cauchy:tau={tau}"),
            LossKind::Quantile { tau } => write!(f, "quantile:tau={tau}"),
            LossKind::L0 => write!(f, "l0"),
            LossKind::ReverseHuber { tau } => write!(f, "reverse_huber:tau={tau}"),
            LossKind::Jumping { c, tau } => write!(f, "jumping:c={c},tau={tau}"),
            LossKind::Relu => write!(f, "relu"),
        }
    }
}

impl std::str::FromStr for LossSpec {
    type Err = Error;

    /// Parse CLI loss strings like "huber:tau=1", "lp:p=1.5",
    /// "quantile:tau=0.3". Parameters are optional where a default exists
    /// (tau defaults to 1, jumping to c=1,tau=1).
    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = match s.split_once(':') {
            Some((n, r)) => (n.trim(), Some(r)),
            None => (s.trim(), None),
        };
        let mut params = std::collections::BTreeMap::new();
        if let Some(rest) = rest {
            for item in rest.split(',') {
                let (k, v) = item
                    .split_once('=')
                    .ok_or_else(|| Error::Parse(format!("bad loss parameter {item:?}")))?;
                let val: f64 = v
                    .trim()
                    .parse()
                    .map_err(|e| Error::Parse(format!("bad value for {k:?}: {e}")))?;
                params.insert(k.trim().to_string(), val);
            }
        }
        let get = |key: &str, default: f64| params.get(key).copied().unwrap_or(default);
        let kind = match name.to_ascii_lowercase().as_str() {
            "huber" => LossKind::Huber { tau: get("tau", 1.0) },
            "lp" => LossKind::Lp {
                p: params
                    .get("p")
                    .copied()
                    .ok_or_else(|| Error::Parse("lp requires a p parameter".into()))?,
            },
            "l1" => LossKind::Lp { p: 1.0 },
            "l2" => LossKind::Lp { p: 2.0 },
            "l1l2" | "l1-l2" => LossKind::L1L2,
            "geman_mcclure" | "geman-mcclure" | "gm" => LossKind::GemanMcClure,
            "fair" => LossKind::Fair { tau: get("tau", 1.0) },
            "tukey" => LossKind::Tukey { tau: get("tau", 1.0) },
            "cauchy" => LossKind::Cauchy { tau: get("tau", 1.0) },
            "quantile" => LossKind::Quantile { tau: get("tau", 0.5) },
            "l0" => LossKind::L0,
            "reverse_huber" | "reverse-huber" | "rhuber" => {
                LossKind::ReverseHuber { tau: get("tau", 1.0) }
            }
            "jumping" => LossKind::Jumping { c: get("c", 1.0), tau: get("tau", 1.0) },
            "relu" => LossKind::Relu,
            other => return Err(Error::Parse(format!("unknown loss {other:?}"))),
        };
        LossSpec::new(kind)
    }
}

/// Outcome of the empirical triangle-inequality certification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtiReport {
    pub t: usize,
    pub trials: usize,
    pub skipped: usize,
    pub max_ratio: f64,
    pub pass: bool,
}

/// Certify `g(sum x_i) <= ati_bound(t) * sum g(x_i)` by structured probes
/// plus random search over mixed-scale inputs (log-uniform magnitudes in
/// [1e-6, 1e6], random signs). Passes iff the worst ratio stays at or
/// below 1 up to floating-point slack.
pub fn check_ati(g: &LossSpec, t: usize, trials: usize, rng: &RngState) -> Result<AtiReport> {
    if t < 2 {
        return Err(Error::InvalidArgument("ati check needs t >= 2".into()));
    }
    let bound = g.ati_bound(t);
    let mut max_ratio: f64 = 0.0;
    let mut skipped = 0usize;
    let consider = |xs: &[f64], max_ratio: &mut f64, skipped: &mut usize| {
        let denom: f64 = xs.iter().map(|&x| g.eval(x)).sum();
        if denom == 0.0 {
            *skipped += 1;
            return;
        }
        let num = g.eval(xs.iter().sum());
        let ratio = num / (bound * denom);
        if ratio > *max_ratio {
            *max_ratio = ratio;
        }
    };

    // Structured equal-value probes hit the tight all-equal configuration.
    for e in -6..=6 {
        let mag = 10f64.powi(e);
        consider(&vec![mag; t], &mut max_ratio, &mut skipped);
        consider(&vec![-mag; t], &mut max_ratio, &mut skipped);
    }
    let mut r = rng.rng();
    for _ in 0..trials {
        let xs: Vec<f64> = (0..t)
            .map(|_| {
                let mag = 10f64.powf(r.gen_range(-6.0..6.0));
                if r.gen::<bool>() {
                    mag
                } else {
                    -mag
                }
            })
            .collect();
        consider(&xs, &mut max_ratio, &mut skipped);
    }
    Ok(AtiReport {
        t,
        trials,
        skipped,
        max_ratio,
        // Equality configurations are attained exactly; leave room for
        // rounding in the two evaluation orders.
        pass: max_ratio <= 1.0 + 1e-12,
    })
}
