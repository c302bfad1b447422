//! Local threshold-voltage mismatch, seeded Monte Carlo and Gaussian tails.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::cell::{BiasCondition, CellDesign, CellState, Transistor};
use crate::dc;
use crate::power;
use crate::transient::{self, TransientConfig};

/// Pelgrom mismatch model: `σ_Vt = a_vt / √(W·L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PelgromModel {
    /// mV·µm.
    pub a_vt_mv_um: f64,
}

impl PelgromModel {
    pub fn new(a_vt_mv_um: f64) -> Self {
        Self { a_vt_mv_um }
    }

    /// Threshold standard deviation for a `w × l` µm device, V.
    pub fn sigma_vt(&self, w: f64, l: f64) -> f64 {
        self.a_vt_mv_um / (w * l).sqrt() * 1e-3
    }
}

/// Copy of `d` with an independent normal threshold shift on each of the six
/// transistors, drawn in [`Transistor::ALL`] order.
pub fn perturb(d: &CellDesign, m: &PelgromModel, rng: &mut impl Rng) -> CellDesign {
    let mut out = d.clone();
    for t in Transistor::ALL {
        let dev = out.device_mut(t);
        let z: f64 = rng.sample(StandardNormal);
        *dev = dev.with_vt_shift(z * m.sigma_vt(dev.w, dev.l));
    }
    out
}

/// The random stream of one trial, a pure function of `(seed, trial)`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Scalar figure evaluated on every Monte Carlo sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Rsnm,
    HoldSnm,
    Wnm,
    Wlvm,
    Srrv,
    VTrip,
    VRead,
    ReadDelay,
    WriteDelay,
    SupplyLeakage,
    BitlineLeakage,
}

impl Metric {
    pub const ALL: [Metric; 11] = [
        Metric::Rsnm,
        Metric::HoldSnm,
        Metric::Wnm,
        Metric::Wlvm,
        Metric::Srrv,
        Metric::VTrip,
        Metric::VRead,
        Metric::ReadDelay,
        Metric::WriteDelay,
        Metric::SupplyLeakage,
        Metric::BitlineLeakage,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Rsnm => "rsnm",
            Metric::HoldSnm => "hold-snm",
            Metric::Wnm => "wnm",
            Metric::Wlvm => "wlvm",
            Metric::Srrv => "srrv",
            Metric::VTrip => "v-trip",
            Metric::VRead => "v-read",
            Metric::ReadDelay => "read-delay",
            Metric::WriteDelay => "write-delay",
            Metric::SupplyLeakage => "supply-leakage",
            Metric::BitlineLeakage => "bitline-leakage",
        }
    }

    /// Noise margins, for which `P(X < 0)` is the failure probability.
    pub fn is_margin(self) -> bool {
        matches!(
            self,
            Metric::Rsnm | Metric::HoldSnm | Metric::Wnm | Metric::Wlvm | Metric::Srrv
        )
    }

    /// Unit suffix used in report headers.
    pub fn unit(self) -> &'static str {
        match self {
            Metric::ReadDelay | Metric::WriteDelay => "s",
            Metric::SupplyLeakage | Metric::BitlineLeakage => "A",
            _ => "V",
        }
    }

    /// Evaluate on one design at its nominal supply and full word-line.
    /// Margins that collapse evaluate to 0; solver failures are errors.
    pub fn eval(self, d: &CellDesign) -> Result<f64, String> {
        let vdd = d.vdd;
        let read = BiasCondition::read(vdd, vdd);
        let dc_err = |e: crate::SolverError| e.to_string();
        let tr_err = |e: crate::TransientError| e.to_string();
        let cfg = TransientConfig::default();
        match self {
            Metric::Rsnm => dc::rsnm(d, &read).map(|m| m.value).map_err(dc_err),
            Metric::HoldSnm => dc::hold_snm(d, vdd).map(|m| m.value).map_err(dc_err),
            Metric::Wnm => dc::wnm(d, vdd).map(|m| m.value).map_err(dc_err),
            Metric::Wlvm => dc::wlvm(d, vdd).map(|m| m.value).map_err(dc_err),
            Metric::Srrv => dc::srrv(d, vdd, vdd).map(|m| m.value).map_err(dc_err),
            Metric::VTrip => dc::trip_point(d, vdd).map_err(dc_err),
            Metric::VRead => dc::v_read(d, &read).map_err(dc_err),
            Metric::ReadDelay => transient::read_delay(d, vdd, transient::SENSE_DV, &cfg).map_err(tr_err),
            Metric::WriteDelay => transient::write_delay(d, &cfg).map_err(tr_err),
            Metric::SupplyLeakage => Ok(power::leakage(d, CellState::S1, vdd).supply_total()),
            Metric::BitlineLeakage => Ok(power::leakage(d, CellState::S1, vdd).bitline_total()),
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown metric `{s}`"))
    }
}

/// Monte Carlo run settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub trials: usize,
    pub seed: u64,
    /// Worker threads; 0 uses the global pool.
    pub threads: usize,
    pub bins: usize,
}

impl McConfig {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            seed,
            threads: 0,
            bins: 40,
        }
    }
}

/// Equal-width histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// `counts.len() + 1` edges.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// Bin `samples` over their own range; the last bin is closed.
    pub fn of(samples: &[f64], bins: usize) -> Self {
        let bins = bins.max(1);
        if samples.is_empty() {
            return Self {
                edges: Vec::new(),
                counts: Vec::new(),
            };
        }
        let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
        let edges = (0..=bins).map(|k| lo + k as f64 * width).collect();
        let mut counts = vec![0; bins];
        for &x in samples {
            let k = (((x - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
        Self { edges, counts }
    }
}

/// Share of censored trials above which a distribution is flagged.
pub const CENSOR_LIMIT: f64 = 0.05;

/// Monte Carlo result. Moments and histogram cover the successful trials.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub trials: usize,
    /// Successful samples in trial order.
    pub samples: Vec<f64>,
    /// Indices of trials whose metric evaluation failed.
    pub censored: Vec<usize>,
    pub mean: f64,
    /// Unbiased sample standard deviation.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub histogram: Histogram,
}

impl Distribution {
    pub fn from_outcomes(outcomes: Vec<Option<f64>>, bins: usize) -> Self {
        let trials = outcomes.len();
        let mut samples = Vec::with_capacity(trials);
        let mut censored = Vec::new();
        for (i, o) in outcomes.into_iter().enumerate() {
            match o {
                Some(x) if x.is_finite() => samples.push(x),
                _ => censored.push(i),
            }
        }
        let n = samples.len();
        let mean = if n > 0 {
            samples.iter().sum::<f64>() / n as f64
        } else {
            f64::NAN
        };
        let std = if n > 1 {
            (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self {
            trials,
            mean,
            std,
            min: samples.iter().copied().fold(f64::INFINITY, f64::min),
            max: samples.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            histogram: Histogram::of(&samples, bins),
            samples,
            censored,
        }
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }

    /// More than [`CENSOR_LIMIT`] of the trials failed.
    pub fn unreliable(&self) -> bool {
        self.censored.len() as f64 > CENSOR_LIMIT * self.trials as f64
    }

    /// Gaussian estimate of `P(X < threshold)` from the sample moments.
    pub fn fail_prob(&self, threshold: f64) -> f64 {
        gaussian_fail_prob(self.mean, self.std, threshold)
    }
}

/// Run `f` on perturbed copies of `d`, one per trial.
///
/// Trial `i` draws from [`trial_rng`]`(seed, i)` only, and results are
/// gathered in trial order, so the outcome does not depend on the thread
/// count.
pub fn monte_carlo_with(
    d: &CellDesign,
    m: &PelgromModel,
    cfg: &McConfig,
    f: impl Fn(&CellDesign) -> Result<f64, String> + Sync,
) -> Distribution {
    let run = || -> Vec<Option<f64>> {
        (0..cfg.trials)
            .into_par_iter()
            .map(|i| {
                let mut rng = trial_rng(cfg.seed, i as u64);
                f(&perturb(d, m, &mut rng)).ok()
            })
            .collect()
    };
    let outcomes = if cfg.threads == 0 {
        run()
    } else {
        match rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        }
    };
    Distribution::from_outcomes(outcomes, cfg.bins)
}

pub fn monte_carlo(d: &CellDesign, m: &PelgromModel, cfg: &McConfig, metric: Metric) -> Distribution {
    monte_carlo_with(d, m, cfg, |x| metric.eval(x))
}

/// `P(X < threshold)` for `X ~ N(mean, std²)`, via the complementary error
/// function so that far tails keep their relative precision.
pub fn gaussian_fail_prob(mean: f64, std: f64, threshold: f64) -> f64 {
    0.5 * erfc((mean - threshold) / (std * std::f64::consts::SQRT_2))
}
