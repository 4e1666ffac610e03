//! Monte-Carlo simulation oracle for the closed-form SER.
//!
//! Each trial draws an active LED proportionally to its modulation order and
//! a uniform constellation point, adds i.i.d. real Gaussian noise per PD, and
//! detects with the exhaustive maximum-likelihood rule. Trials are split into
//! fixed-size batches; batch `b` uses ChaCha stream `b` of the configured
//! seed, so results are bitwise identical for any worker count, including the
//! sequential fallback.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::exec;
use crate::modulation::{ModOrderCombo, TransmitVector};

/// Number of batches dispatched per scheduling round. Early stopping is
/// checked on round boundaries only, which keeps it worker-count-invariant.
const BATCHES_PER_ROUND: u64 = 64;

/// Simulation parameters.
#[derive(Debug, Clone, Serialize)]
pub struct SimConfig {
    pub trials: u64,
    pub seed: u64,
    /// Noise standard deviation per PD.
    pub sigma: f64,
    /// Stop after this many symbol errors (checked on round boundaries).
    pub early_stop_errors: Option<u64>,
    /// Trials per RNG substream; part of the reproducibility contract.
    pub batch_size: u64,
}

impl SimConfig {
    pub fn new(trials: u64, seed: u64, sigma: f64) -> Self {
        Self {
            trials,
            seed,
            sigma,
            early_stop_errors: None,
            batch_size: 10_000.min(trials.max(1)),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be >= 1".into()));
        }
        if self.batch_size == 0 || self.batch_size > self.trials {
            return Err(Error::InvalidParameter(format!(
                "batch_size must lie in [1, trials], got {}",
                self.batch_size
            )));
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "noise sigma must be positive and finite, got {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

/// Empirical SER estimate with its error decomposition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub ser_estimate: f64,
    pub error_count: u64,
    pub trials_run: u64,
    /// Binomial standard error `sqrt(p (1 - p) / n)`.
    pub std_error: f64,
    /// Fraction of trials with a wrong active-LED decision.
    pub spatial_error_rate: f64,
    /// Fraction of wrong PAM levels among trials with the LED correct.
    pub signal_error_rate_given_spatial_correct: f64,
}

/// Detector output: estimated `(LED, constellation point)` pair, 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetectionOutcome {
    pub led_index: usize,
    pub point_index: usize,
}

/// Draw one transmit vector: LED `j` with probability `M_j / sum M_i`, then a
/// uniform constellation point of that LED.
pub fn draw_symbol<R: Rng>(combo: &ModOrderCombo, p: f64, rng: &mut R) -> TransmitVector {
    // A uniform index over all (j, q) pairs realizes exactly the
    // order-proportional LED selection.
    let total = combo.sum_orders();
    let mut pick = rng.gen_range(0..total);
    for (j, m) in combo.orders().iter().enumerate() {
        let m = *m as u64;
        if pick < m {
            let q = pick as usize + 1;
            return TransmitVector {
                led_index: j,
                point_index: q - 1,
                intensity: q as f64 * p / combo.order(j) as f64,
            };
        }
        pick -= m;
    }
    unreachable!("pick exhausted the symbol space");
}

/// All noiseless received points `h_j * x_jq` in lexicographic `(j, q)` order.
fn received_points(h: &ChannelMatrix, combo: &ModOrderCombo, p: f64) -> Vec<(usize, usize, Vec<f64>)> {
    let mut points = Vec::with_capacity(combo.sum_orders() as usize);
    for j in 0..h.n_tx() {
        let col = h.column(j);
        let m_j = combo.order(j);
        for q in 1..=m_j as usize {
            let x = q as f64 * p / m_j as f64;
            points.push((j, q - 1, col.iter().map(|g| g * x).collect()));
        }
    }
    points
}

fn nearest(points: &[(usize, usize, Vec<f64>)], y: &[f64]) -> DetectionOutcome {
    let mut best = 0usize;
    let mut best_d2 = f64::INFINITY;
    for (idx, (_, _, point)) in points.iter().enumerate() {
        let d2: f64 = y.iter().zip(point).map(|(a, b)| (a - b) * (a - b)).sum();
        // Strict less keeps the lexicographically smallest (j, q) on ties.
        if d2 < best_d2 {
            best_d2 = d2;
            best = idx;
        }
    }
    let (j, q, _) = points[best];
    DetectionOutcome { led_index: j, point_index: q }
}

/// Exhaustive ML detection: argmin over all `(j, q)` of `||y - h_j x_jq||^2`,
/// ties broken by the smallest `(j, q)`.
pub fn ml_detect(
    y: &[f64],
    h: &ChannelMatrix,
    combo: &ModOrderCombo,
    p: f64,
) -> DetectionOutcome {
    nearest(&received_points(h, combo, p), y)
}

#[derive(Debug, Default, Clone, Copy)]
struct Tally {
    trials: u64,
    errors: u64,
    spatial_errors: u64,
    signal_errors_spatial_ok: u64,
}

impl Tally {
    fn merge(&mut self, other: &Tally) {
        self.trials += other.trials;
        self.errors += other.errors;
        self.spatial_errors += other.spatial_errors;
        self.signal_errors_spatial_ok += other.signal_errors_spatial_ok;
    }
}

fn run_batch(
    points: &[(usize, usize, Vec<f64>)],
    combo: &ModOrderCombo,
    p: f64,
    config: &SimConfig,
    batch_index: u64,
    batch_trials: u64,
) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(batch_index);
    let n_rx = points[0].2.len();
    let mut y = vec![0.0f64; n_rx];
    let mut tally = Tally::default();
    for _ in 0..batch_trials {
        let tx = draw_symbol(combo, p, &mut rng);
        let truth = &points
            .iter()
            .find(|(j, q, _)| *j == tx.led_index && *q == tx.point_index)
            .expect("drawn symbol is a candidate")
            .2;
        for (slot, clean) in y.iter_mut().zip(truth.iter()) {
            let noise: f64 = rng.sample(StandardNormal);
            *slot = clean + config.sigma * noise;
        }
        let det = nearest(points, &y);
        tally.trials += 1;
        if det.led_index != tx.led_index {
            tally.spatial_errors += 1;
            tally.errors += 1;
        } else if det.point_index != tx.point_index {
            tally.signal_errors_spatial_ok += 1;
            tally.errors += 1;
        }
    }
    tally
}

fn simulate_with<MapFn>(
    h: &ChannelMatrix,
    combo: &ModOrderCombo,
    config: &SimConfig,
    map_batches: MapFn,
) -> Result<SimResult>
where
    MapFn: Fn(&[(u64, u64)]) -> Vec<Tally>,
{
    if combo.n_tx() != h.n_tx() {
        return Err(Error::InvalidParameter(format!(
            "combo length {} does not match N_t = {}",
            combo.n_tx(),
            h.n_tx()
        )));
    }
    config.validate()?;
    let n_batches = config.trials.div_ceil(config.batch_size);
    let batch_trials =
        |b: u64| (config.trials - b * config.batch_size).min(config.batch_size);
    let mut total = Tally::default();
    let mut next = 0u64;
    while next < n_batches {
        let round_end = (next + BATCHES_PER_ROUND).min(n_batches);
        let round: Vec<(u64, u64)> =
            (next..round_end).map(|b| (b, batch_trials(b))).collect();
        for tally in map_batches(&round) {
            total.merge(&tally);
        }
        next = round_end;
        if let Some(stop) = config.early_stop_errors {
            if total.errors >= stop {
                break;
            }
        }
    }
    let n = total.trials as f64;
    let p_hat = total.errors as f64 / n;
    let spatial_ok = total.trials - total.spatial_errors;
    Ok(SimResult {
        ser_estimate: p_hat,
        error_count: total.errors,
        trials_run: total.trials,
        std_error: (p_hat * (1.0 - p_hat) / n).sqrt(),
        spatial_error_rate: total.spatial_errors as f64 / n,
        signal_error_rate_given_spatial_correct: if spatial_ok == 0 {
            0.0
        } else {
            total.signal_errors_spatial_ok as f64 / spatial_ok as f64
        },
    })
}

/// Estimate the SER empirically; parallel over batches when the `parallel`
/// feature is enabled, with results independent of the worker count.
pub fn simulate_ser(
    h: &ChannelMatrix,
    combo: &ModOrderCombo,
    p: f64,
    config: &SimConfig,
) -> Result<SimResult> {
    let points = received_points(h, combo, p);
    simulate_with(h, combo, config, |round| {
        exec::map_indexed(round.len(), |i| {
            let (b, n) = round[i];
            run_batch(&points, combo, p, config, b, n)
        })
    })
}

/// Single-threaded reference path; identical output to [`simulate_ser`].
pub fn simulate_ser_sequential(
    h: &ChannelMatrix,
    combo: &ModOrderCombo,
    p: f64,
    config: &SimConfig,
) -> Result<SimResult> {
    let points = received_points(h, combo, p);
    simulate_with(h, combo, config, |round| {
        exec::map_indexed_seq(round.len(), |i| {
            let (b, n) = round[i];
            run_batch(&points, combo, p, config, b, n)
        })
    })
}
