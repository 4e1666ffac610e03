//! Closed-form average SER for the ASM link.
//!
//! For each LED `j` the symbol error rate splits into a spatial part `P_aj`
//! (wrong active-LED decision) and a signal part `P_sj` (wrong PAM level given
//! the right LED):
//!
//! - `P_sj = 2 (M_j - 1) / M_j * Q(d_min^j / 2 sigma)` with
//!   `d_min^j = (P / M_j) ||h_j||`,
//! - `P_aj = (1 / M_j) sum_q Q(D_jq / 2 sigma)` where `D_jq` is the distance
//!   from received point `(j, q)` to the nearest point of any other LED
//!   (a nearest-neighbor high-SNR approximation, not an exact union bound),
//! - `P_ej = P_aj + (1 - P_aj) P_sj`, averaged with the selection weights
//!   `M_j / sum_i M_i`.
//!
//! Agreement with Monte-Carlo simulation is therefore asserted only in the
//! high-SNR regime.

use serde::Serialize;

use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::modulation::{selection_probability, ModOrderCombo};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// Gaussian tail probability `Q(x) = P[N(0,1) > x]`.
///
/// Uses the complementary error function up to `x = 37` and the asymptotic
/// expansion beyond, so very deep tails degrade gracefully (subnormal, then
/// zero) instead of producing NaN. For ordering at sub-1e-300 scales use
/// [`ln_q_function`].
pub fn q_function(x: f64) -> f64 {
    if x > 37.0 {
        ln_q_function(x).exp()
    } else {
        0.5 * statrs::function::erf::erfc(x / SQRT_2)
    }
}

/// Natural logarithm of the Gaussian tail probability, finite for any finite
/// `x` where `Q(x) > 0` mathematically (no underflow).
pub fn ln_q_function(x: f64) -> f64 {
    if x <= 37.0 {
        (0.5 * statrs::function::erf::erfc(x / SQRT_2)).ln()
    } else {
        // Q(x) ~ phi(x)/x * (1 - 1/x^2 + 3/x^4) for large x.
        let inv2 = 1.0 / (x * x);
        -0.5 * x * x - x.ln() - LN_SQRT_2PI + (1.0 - inv2 + 3.0 * inv2 * inv2).ln()
    }
}

/// Per-LED error decomposition at one noise level.
#[derive(Debug, Clone, Serialize)]
pub struct PerLedSer {
    /// Spatial-domain error probability `P_aj`.
    pub spatial: f64,
    /// Signal-domain error probability `P_sj`.
    pub signal: f64,
    /// Combined per-LED SER `P_ej = P_aj + (1 - P_aj) P_sj`.
    pub total: f64,
}

/// Average SER and its per-LED breakdown.
#[derive(Debug, Clone, Serialize)]
pub struct SerBreakdown {
    pub per_led: Vec<PerLedSer>,
    /// Selection-probability-weighted average `P_e`.
    pub average: f64,
    pub noise_sigma: f64,
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "noise sigma must be positive and finite, got {sigma}"
        )));
    }
    Ok(())
}

fn column_norm(h_j: &[f64]) -> f64 {
    h_j.iter().map(|h| h * h).sum::<f64>().sqrt()
}

/// Minimum distance `d_min^j = (P / M_j) ||h_j||` between received points of
/// the same LED. `None` for the degenerate single-point constellation.
pub fn min_intra_distance(h_j: &[f64], m_j: u32, p: f64) -> Option<f64> {
    if m_j < 2 {
        return None;
    }
    Some(p / m_j as f64 * column_norm(h_j))
}

/// Signal-domain error probability `P_sj`; 0 when `M_j = 1`.
pub fn signal_domain_error(h_j: &[f64], m_j: u32, p: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    match min_intra_distance(h_j, m_j, p) {
        None => Ok(0.0),
        Some(d_min) => {
            let m = m_j as f64;
            Ok(2.0 * (m - 1.0) / m * q_function(d_min / (2.0 * sigma)))
        }
    }
}

/// Minimum distance from received point `(j, q)` (`q` 1-based) to any point
/// emitted by a different LED, by exhaustive enumeration. `None` when there
/// is no other LED.
pub fn cross_min_distance(
    h: &ChannelMatrix,
    combo: &ModOrderCombo,
    p: f64,
    j: usize,
    q: usize,
) -> Option<f64> {
    if h.n_tx() < 2 {
        return None;
    }
    let own = h.column(j);
    let x_jq = q as f64 * p / combo.order(j) as f64;
    let mut best = f64::INFINITY;
    for i in 0..h.n_tx() {
        if i == j {
            continue;
        }
        let other = h.column(i);
        let m_i = combo.order(i);
        for point in 1..=m_i {
            let x_ip = point as f64 * p / m_i as f64;
            let d2: f64 = own
                .iter()
                .zip(other)
                .map(|(a, b)| {
                    let diff = a * x_jq - b * x_ip;
                    diff * diff
                })
                .sum();
            let d = d2.sqrt();
            if d < best {
                best = d;
            }
        }
    }
    Some(best)
}

/// Spatial-domain error probability `P_aj = (1/M_j) sum_q Q(D_jq / 2 sigma)`.
pub fn spatial_domain_error(
    h: &ChannelMatrix,
    combo: &ModOrderCombo,
    p: f64,
    sigma: f64,
    j: usize,
) -> Result<f64> {
    check_sigma(sigma)?;
    let m_j = combo.order(j);
    let mut sum = 0.0;
    for q in 1..=m_j {
        // Single-LED systems have no spatial dimension to confuse.
        let d_jq = match cross_min_distance(h, combo, p, j, q as usize) {
            Some(d) => d,
            None => return Ok(0.0),
        };
        sum += q_function(d_jq / (2.0 * sigma));
    }
    Ok(sum / m_j as f64)
}

/// Per-LED SER `P_ej = P_aj + (1 - P_aj) P_sj`.
pub fn per_led_ser(
    h: &ChannelMatrix,
    combo: &ModOrderCombo,
    p: f64,
    sigma: f64,
    j: usize,
) -> Result<f64> {
    let p_aj = spatial_domain_error(h, combo, p, sigma, j)?;
    let p_sj = signal_domain_error(h.column(j), combo.order(j), p, sigma)?;
    Ok(p_aj + (1.0 - p_aj) * p_sj)
}

fn check_dims(h: &ChannelMatrix, combo: &ModOrderCombo) -> Result<()> {
    if combo.n_tx() != h.n_tx() {
        return Err(Error::InvalidParameter(format!(
            "combo length {} does not match N_t = {}",
            combo.n_tx(),
            h.n_tx()
        )));
    }
    Ok(())
}

/// Theoretical average SER with the full per-LED breakdown.
pub fn average_ser(
    h: &ChannelMatrix,
    combo: &ModOrderCombo,
    p: f64,
    sigma: f64,
) -> Result<SerBreakdown> {
    check_dims(h, combo)?;
    check_sigma(sigma)?;
    let weights = selection_probability(combo);
    let mut per_led = Vec::with_capacity(combo.n_tx());
    let mut average = 0.0;
    for j in 0..combo.n_tx() {
        let spatial = spatial_domain_error(h, combo, p, sigma, j)?;
        let signal = signal_domain_error(h.column(j), combo.order(j), p, sigma)?;
        let total = spatial + (1.0 - spatial) * signal;
        average += weights[j] * total;
        per_led.push(PerLedSer { spatial, signal, total });
    }
    Ok(SerBreakdown { per_led, average, noise_sigma: sigma })
}

/// Log-domain surrogate of the average SER, finite even when every `Q` term
/// underflows to zero. It drops the `(1 - P_aj)` cross factor, which is
/// negligible exactly in the regime where the surrogate is needed, so it is
/// suitable only as an ordering key, not as a probability.
pub fn log_average_ser(
    h: &ChannelMatrix,
    combo: &ModOrderCombo,
    p: f64,
    sigma: f64,
) -> Result<f64> {
    check_dims(h, combo)?;
    check_sigma(sigma)?;
    let weights = selection_probability(combo);
    let mut terms: Vec<f64> = Vec::new();
    for j in 0..combo.n_tx() {
        let m_j = combo.order(j);
        let ln_w = weights[j].ln();
        for q in 1..=m_j {
            if let Some(d_jq) = cross_min_distance(h, combo, p, j, q as usize) {
                terms.push(ln_w - (m_j as f64).ln() + ln_q_function(d_jq / (2.0 * sigma)));
            }
        }
        if let Some(d_min) = min_intra_distance(h.column(j), m_j, p) {
            let m = m_j as f64;
            terms.push(ln_w + (2.0 * (m - 1.0) / m).ln() + ln_q_function(d_min / (2.0 * sigma)));
        }
    }
    if terms.is_empty() {
        return Ok(f64::NEG_INFINITY);
    }
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln())
}

/// Average SER of space shift keying: all orders 1, no signal bits.
pub fn ssk_ser(h: &ChannelMatrix, p: f64, sigma: f64) -> Result<f64> {
    let combo = ModOrderCombo::all_ones(h.n_tx());
    Ok(average_ser(h, &combo, p, sigma)?.average)
}

/// Average SER of SM with the same order `m` on every LED.
pub fn sms_ser(h: &ChannelMatrix, m: u32, p: f64, sigma: f64) -> Result<f64> {
    if m < 2 || !m.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "SMS order must be a power of 2 >= 2, got {m}"
        )));
    }
    let combo = ModOrderCombo::uniform(h.n_tx(), m)?;
    Ok(average_ser(h, &combo, p, sigma)?.average)
}
