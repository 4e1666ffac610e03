//! Modulation-order selection under a fixed spectral efficiency.
//!
//! Exhaustive search scores every feasible combination with the closed-form
//! average SER and returns the minimum. The variance-pruned variant first
//! restricts the candidate set to the combinations whose order variance takes
//! one of the two smallest distinct values, then searches that subset.
//!
//! Note that the argmin depends on the operating noise level: which
//! combination wins can change with sigma, so callers pick the operating
//! point explicitly.

use serde::Serialize;

use crate::channel::ChannelMatrix;
use crate::error::Result;
use crate::exec;
use crate::modulation::{enumerate_combos, ModOrderCombo};
use crate::ser::{average_ser, log_average_ser};

/// One scored candidate.
#[derive(Debug, Clone, Serialize)]
pub struct RankedCandidate {
    pub combo: ModOrderCombo,
    pub ser: f64,
    /// Log-domain surrogate used to order candidates whose SER underflows.
    pub log_ser: f64,
}

/// Outcome of a modulation-order search.
#[derive(Debug, Clone, Serialize)]
pub struct SearchReport {
    pub best_combo: ModOrderCombo,
    pub best_ser: f64,
    pub candidates_evaluated: usize,
    /// Size `L` of the full feasible set.
    pub candidates_total: usize,
    /// The pruned candidate set (variance-pruned search only).
    pub reduced_set: Option<Vec<ModOrderCombo>>,
    pub operating_sigma: f64,
    /// All evaluated candidates, best first.
    pub ranked: Vec<RankedCandidate>,
}

/// Variance of the order vector, `V = (1/N_t) sum_n (M_n - mean)^2`.
pub fn combo_variance(combo: &ModOrderCombo) -> f64 {
    let n = combo.n_tx() as f64;
    let mean = combo.orders().iter().map(|m| *m as f64).sum::<f64>() / n;
    combo
        .orders()
        .iter()
        .map(|m| {
            let d = *m as f64 - mean;
            d * d
        })
        .sum::<f64>()
        / n
}

/// The minimum order allowed for a search at efficiency `m`: 2 normally, 1
/// when there are no signal bits to distribute (the SSK-equivalent case).
pub fn search_min_order(n_t: usize, m: f64) -> u32 {
    let spatial_bits = (n_t as f64).log2();
    if (m - spatial_bits).abs() < 1e-9 {
        1
    } else {
        2
    }
}

fn rank(
    h: &ChannelMatrix,
    candidates: &[ModOrderCombo],
    p: f64,
    sigma: f64,
) -> Result<Vec<RankedCandidate>> {
    let scored = exec::map_indexed(candidates.len(), |i| {
        let combo = &candidates[i];
        let ser = average_ser(h, combo, p, sigma).map(|b| b.average)?;
        let log_ser = log_average_ser(h, combo, p, sigma)?;
        Ok(RankedCandidate { combo: combo.clone(), ser, log_ser })
    });
    let mut ranked = scored.into_iter().collect::<Result<Vec<_>>>()?;
    // Candidates arrive in lexicographic order; a stable sort on the score
    // therefore breaks exact ties by the lexicographically smallest combo.
    ranked.sort_by(|a, b| {
        a.ser
            .total_cmp(&b.ser)
            .then(a.log_ser.total_cmp(&b.log_ser))
    });
    Ok(ranked)
}

fn report(
    ranked: Vec<RankedCandidate>,
    candidates_total: usize,
    reduced_set: Option<Vec<ModOrderCombo>>,
    sigma: f64,
) -> SearchReport {
    let best = &ranked[0];
    SearchReport {
        best_combo: best.combo.clone(),
        best_ser: best.ser,
        candidates_evaluated: ranked.len(),
        candidates_total,
        reduced_set,
        operating_sigma: sigma,
        ranked,
    }
}

/// Exhaustive search over every feasible combination.
pub fn asm_search(
    h: &ChannelMatrix,
    n_t: usize,
    m: f64,
    p: f64,
    sigma: f64,
) -> Result<SearchReport> {
    let candidates = enumerate_combos(n_t, m, search_min_order(n_t, m))?;
    let total = candidates.len();
    let ranked = rank(h, &candidates, p, sigma)?;
    Ok(report(ranked, total, None, sigma))
}

/// Variance-pruned search: evaluates only the combinations whose variance is
/// among the two smallest distinct values (all ties kept).
pub fn cr_asm_search(
    h: &ChannelMatrix,
    n_t: usize,
    m: f64,
    p: f64,
    sigma: f64,
) -> Result<SearchReport> {
    let candidates = enumerate_combos(n_t, m, search_min_order(n_t, m))?;
    let total = candidates.len();
    let mut variances: Vec<f64> = candidates.iter().map(combo_variance).collect();
    let mut distinct = variances.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let cutoff = if distinct.len() >= 2 { distinct[1] } else { distinct[0] };
    let reduced: Vec<ModOrderCombo> = candidates
        .iter()
        .zip(variances.drain(..))
        .filter(|(_, v)| *v <= cutoff)
        .map(|(c, _)| c.clone())
        .collect();
    let ranked = rank(h, &reduced, p, sigma)?;
    Ok(report(ranked, total, Some(reduced), sigma))
}
