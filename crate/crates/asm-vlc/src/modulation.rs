//! Per-LED PAM constellations and modulation-order bookkeeping.
//!
//! Each LED `j` carries an `M_j`-ary unipolar PAM constellation
//! `{P/M_j, 2P/M_j, ..., P}` (intensity zero is not a point). The active LED
//! is chosen with probability proportional to its order, and the spectral
//! efficiency of a combination is
//! `m = log2(N_t) + (1/N_t) log2(prod_j M_j)` bits/s/Hz.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// A vector `[M_1 .. M_Nt]` of per-LED PAM orders, each a power of two.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModOrderCombo {
    orders: Vec<u32>,
}

impl ModOrderCombo {
    pub fn new(orders: Vec<u32>) -> Result<Self> {
        if orders.is_empty() {
            return Err(Error::InvalidParameter("empty modulation order combo".into()));
        }
        if let Some(bad) = orders.iter().find(|m| **m == 0 || !m.is_power_of_two()) {
            return Err(Error::InvalidParameter(format!(
                "modulation order {bad} is not a power of 2"
            )));
        }
        Ok(Self { orders })
    }

    pub fn orders(&self) -> &[u32] {
        &self.orders
    }

    pub fn order(&self, j: usize) -> u32 {
        self.orders[j]
    }

    pub fn n_tx(&self) -> usize {
        self.orders.len()
    }

    pub fn sum_orders(&self) -> u64 {
        self.orders.iter().map(|m| *m as u64).sum()
    }

    /// `[M, M, ..., M]` over `n_tx` LEDs (the SMS combination).
    pub fn uniform(n_tx: usize, m: u32) -> Result<Self> {
        Self::new(vec![m; n_tx])
    }

    /// `[1, 1, ..., 1]` (the SSK combination).
    pub fn all_ones(n_tx: usize) -> Self {
        Self { orders: vec![1; n_tx] }
    }

    /// Parse a combo from `"8,2"` or `"[8,2]"`.
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim().trim_start_matches('[').trim_end_matches(']');
        let orders = trimmed
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::InvalidParameter(format!("bad combo element {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(orders)
    }
}

impl fmt::Display for ModOrderCombo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, m) in self.orders.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "]")
    }
}

/// The ordered intensity levels of one LED's PAM constellation.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<f64>,
    spacing: f64,
}

impl Constellation {
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Spacing `A_j = P / M_j` between adjacent points.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Intensity of the `q`-th point, 1-based: `q P / M_j`.
    pub fn intensity(&self, q: usize) -> f64 {
        self.points[q - 1]
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }
}

/// One channel use: LED `led_index` active with constellation point
/// `point_index` (both 0-based); every other LED is dark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmitVector {
    pub led_index: usize,
    pub point_index: usize,
    pub intensity: f64,
}

/// The `M_j`-ary constellation `{P/M_j, ..., P}` for peak intensity `p`.
pub fn constellation(m_j: u32, p: f64) -> Result<Constellation> {
    if m_j == 0 || !m_j.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "PAM order must be a power of 2, got {m_j}"
        )));
    }
    if !(p > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "peak intensity must be positive, got {p}"
        )));
    }
    let spacing = p / m_j as f64;
    let points = (1..=m_j).map(|n| n as f64 * spacing).collect();
    Ok(Constellation { points, spacing })
}

/// LED selection probabilities `Pr(j) = M_j / sum_i M_i`.
pub fn selection_probability(combo: &ModOrderCombo) -> Vec<f64> {
    let total = combo.sum_orders() as f64;
    combo.orders().iter().map(|m| *m as f64 / total).collect()
}

/// Spectral efficiency `m = log2(N_t) + (1/N_t) log2(prod_j M_j)`.
pub fn spectral_efficiency(combo: &ModOrderCombo) -> f64 {
    let n_t = combo.n_tx() as f64;
    let signal_bits: u32 = combo.orders().iter().map(|m| m.trailing_zeros()).sum();
    n_t.log2() + signal_bits as f64 / n_t
}

/// All power-of-two combos of length `n_t` with orders `>= min_order` whose
/// spectral efficiency equals `m`, in lexicographic order.
pub fn enumerate_combos(n_t: usize, m: f64, min_order: u32) -> Result<Vec<ModOrderCombo>> {
    if n_t == 0 || !n_t.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "N_t must be a power of 2, got {n_t}"
        )));
    }
    if min_order == 0 || !min_order.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "min order must be a power of 2, got {min_order}"
        )));
    }
    let spatial_bits = (n_t as f64).log2();
    if m < spatial_bits - 1e-9 {
        return Err(Error::InfeasibleConstraint(format!(
            "m = {m} below log2(N_t) = {spatial_bits}"
        )));
    }
    // Total signal bits across one cycle of the N_t LEDs.
    let budget_f = n_t as f64 * (m - spatial_bits);
    let budget = budget_f.round();
    if (budget_f - budget).abs() > 1e-9 || budget < 0.0 {
        return Err(Error::InfeasibleConstraint(format!(
            "m = {m} requires a non-integer signal-bit budget {budget_f}"
        )));
    }
    let budget = budget as u32;
    let min_exp = min_order.trailing_zeros();
    let mut out = Vec::new();
    let mut exps = vec![0u32; n_t];
    fn rec(exps: &mut Vec<u32>, slot: usize, rem: u32, min_exp: u32, out: &mut Vec<Vec<u32>>) {
        let slots_left = exps.len() - slot;
        if slot == exps.len() {
            if rem == 0 {
                out.push(exps.clone());
            }
            return;
        }
        let reserve = min_exp * (slots_left as u32 - 1);
        if rem < min_exp + reserve {
            return;
        }
        for e in min_exp..=(rem - reserve) {
            exps[slot] = e;
            rec(exps, slot + 1, rem - e, min_exp, out);
        }
    }
    let mut exp_vecs = Vec::new();
    rec(&mut exps, 0, budget, min_exp, &mut exp_vecs);
    for ev in exp_vecs {
        out.push(ModOrderCombo::new(ev.iter().map(|e| 1u32 << e).collect())?);
    }
    if out.is_empty() {
        return Err(Error::InfeasibleConstraint(format!(
            "no combination of orders >= {min_order} reaches m = {m} with N_t = {n_t}"
        )));
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn combo(orders: &[u32]) -> ModOrderCombo {
        ModOrderCombo::new(orders.to_vec()).unwrap()
    }

    #[test]
    fn four_pam_constellation() {
        let c = constellation(4, 1.0).unwrap();
        assert_eq!(c.points(), &[0.25, 0.5, 0.75, 1.0]);
        assert_eq!(c.spacing(), 0.25);
    }

    #[test]
    fn degenerate_ssk_constellation() {
        let c = constellation(1, 2.5).unwrap();
        assert_eq!(c.points(), &[2.5]);
    }

    #[test]
    fn two_pam_with_peak_two() {
        let c = constellation(2, 2.0).unwrap();
        assert_eq!(c.points(), &[1.0, 2.0]);
        assert_eq!(c.spacing(), 1.0);
    }

    #[test]
    fn constellation_rejects_bad_inputs() {
        assert!(constellation(3, 1.0).is_err());
        assert!(constellation(0, 1.0).is_err());
        assert!(constellation(4, 0.0).is_err());
    }

    #[test]
    fn selection_probabilities() {
        assert_eq!(selection_probability(&combo(&[2, 2])), vec![0.5, 0.5]);
        assert_eq!(selection_probability(&combo(&[8, 2])), vec![0.8, 0.2]);
        let p = selection_probability(&combo(&[8, 4, 2, 4]));
        for (got, want) in p.iter().zip([8.0, 4.0, 2.0, 4.0].iter().map(|m| m / 18.0)) {
            assert_relative_eq!(*got, want, max_relative = 1e-15);
        }
    }

    #[test]
    fn spectral_efficiency_examples() {
        assert_relative_eq!(spectral_efficiency(&combo(&[8, 2])), 3.0);
        assert_relative_eq!(spectral_efficiency(&combo(&[8, 4, 2, 4])), 4.0);
        assert_relative_eq!(spectral_efficiency(&combo(&[1, 1])), 1.0);
    }

    #[test]
    fn enumerate_two_leds_m3() {
        let combos = enumerate_combos(2, 3.0, 2).unwrap();
        assert_eq!(
            combos,
            vec![combo(&[2, 8]), combo(&[4, 4]), combo(&[8, 2])]
        );
    }

    #[test]
    fn enumerate_pure_ssk() {
        let combos = enumerate_combos(2, 1.0, 1).unwrap();
        assert_eq!(combos, vec![combo(&[1, 1])]);
    }

    #[test]
    fn enumerate_four_leds_m4() {
        let combos = enumerate_combos(4, 4.0, 2).unwrap();
        // Power-of-2 4-tuples >= 2 with product 256: compositions of 8 bits.
        assert_eq!(combos.len(), 35);
        assert!(combos.contains(&combo(&[8, 4, 2, 4])));
        assert!(combos.contains(&combo(&[4, 4, 4, 4])));
        for c in &combos {
            assert_relative_eq!(spectral_efficiency(c), 4.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn enumerate_rejects_fractional_budget() {
        assert!(matches!(
            enumerate_combos(2, 2.25, 2),
            Err(Error::InfeasibleConstraint(_))
        ));
    }

    #[test]
    fn enumerate_rejects_min_order_conflict() {
        // Zero signal bits but min order 2 leaves no candidates.
        assert!(matches!(
            enumerate_combos(2, 1.0, 2),
            Err(Error::InfeasibleConstraint(_))
        ));
    }

    #[test]
    fn combos_closed_under_permutation_and_unique() {
        let combos = enumerate_combos(4, 4.0, 2).unwrap();
        let set: std::collections::HashSet<_> = combos.iter().cloned().collect();
        assert_eq!(set.len(), combos.len());
        for c in &combos {
            let mut rev = c.orders().to_vec();
            rev.reverse();
            assert!(set.contains(&ModOrderCombo::new(rev).unwrap()));
        }
    }

    #[test]
    fn combo_display_and_parse() {
        let c = combo(&[8, 2]);
        assert_eq!(c.to_string(), "[8,2]");
        assert_eq!(ModOrderCombo::parse("[8,2]").unwrap(), c);
        assert_eq!(ModOrderCombo::parse("8, 2").unwrap(), c);
        assert!(ModOrderCombo::parse("8,3").is_err());
    }
}
