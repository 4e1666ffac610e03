//! Link-level simulator and analysis toolkit for adaptive spatial modulation
//! (ASM) in indoor visible light communication.
//!
//! The crate covers the full chain from room geometry to symbol error rate:
//!
//! - [`channel`] builds the line-of-sight Lambertian gain matrix from LED and
//!   photodiode positions.
//! - [`modulation`] handles per-LED PAM constellations, LED selection
//!   probabilities, spectral efficiency and enumeration of feasible
//!   modulation-order combinations.
//! - [`ser`] evaluates the closed-form average SER (spatial-domain and
//!   signal-domain error probabilities) plus the SSK and SMS special cases.
//! - [`montecarlo`] is an independent simulation oracle: random symbols, AWGN
//!   and exhaustive ML detection, with reproducible parallel trials.
//! - [`optimizer`] selects modulation orders under a fixed spectral-efficiency
//!   constraint, by exhaustive search or variance-pruned search.
//! - [`sweep`] drives SNR sweeps over the schemes and emits CSV rows.
//!
//! With the default `parallel` feature, Monte-Carlo trials, candidate
//! evaluation and sweep points run on rayon; results are identical to the
//! sequential fallback for the same inputs and seed.

pub mod channel;
pub mod error;
pub(crate) mod exec;
pub mod modulation;
pub mod montecarlo;
pub mod optimizer;
pub mod ser;
pub mod sweep;

pub use channel::{build_channel_matrix, channel_gain, lambertian_order, ChannelMatrix, Scenario};
pub use error::Error;
pub use modulation::{
    constellation, enumerate_combos, selection_probability, spectral_efficiency, Constellation,
    ModOrderCombo, TransmitVector,
};
pub use montecarlo::{ml_detect, simulate_ser, DetectionOutcome, SimConfig, SimResult};
pub use optimizer::{asm_search, combo_variance, cr_asm_search, SearchReport};
pub use ser::{average_ser, q_function, sms_ser, ssk_ser, SerBreakdown};
pub use sweep::{run_sweep, Scheme, SweepRow, SweepSpec};

/// Convert an SNR in dB to a noise standard deviation for peak intensity `p`.
///
/// The convention used throughout the crate is `SNR_dB = 10 log10(P^2 / s^2)`,
/// i.e. `sigma = P * 10^(-SNR_dB / 20)`. Only the ratio `P / sigma` enters any
/// of the SER formulas, so this is a pure relabeling of the noise axis.
pub fn snr_db_to_sigma(snr_db: f64, p: f64) -> f64 {
    p * 10f64.powf(-snr_db / 20.0)
}
