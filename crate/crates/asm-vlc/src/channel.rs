//! Line-of-sight Lambertian channel model.
//!
//! LEDs are ceiling luminaires pointing straight down (-z) and PDs are
//! desk receivers pointing straight up (+z), so the emission angle and the
//! incidence angle of a link coincide. The optical gain of a single link is
//!
//! `h = (k + 1) A / (2 pi d^2) * cos^k(phi) * cos(psi)`
//!
//! for incidence angles within the receiver field of view, and 0 beyond it.

use serde::Deserialize;
use std::path::Path;

use crate::error::{Error, Result};

/// Room geometry and optical parameters for one deployment.
#[derive(Debug, Clone)]
pub struct Scenario {
    /// LED positions in meters, length `N_t` (a power of two).
    pub led_positions: Vec<[f64; 3]>,
    /// PD positions in meters, length `N_r >= 1`.
    pub pd_positions: Vec<[f64; 3]>,
    /// LED semi-angle at half power, degrees, in (0, 90).
    pub semi_angle_half_power: f64,
    /// Physical detector area in m^2.
    pub detector_area: f64,
    /// Receiver field-of-view half angle, degrees, in (0, 90].
    pub fov_half_angle: f64,
    /// Allowed peak optical intensity per LED, watts.
    pub peak_intensity: f64,
    /// Room dimensions in meters, informational; positions must fit inside.
    pub room_dims: Option<[f64; 3]>,
}

/// On-disk scenario schema. `area_cm2` is converted to m^2 on load.
#[derive(Debug, Deserialize)]
struct ScenarioFile {
    leds: Vec<[f64; 3]>,
    pds: Vec<[f64; 3]>,
    semi_angle_deg: f64,
    area_cm2: f64,
    fov_deg: f64,
    peak_intensity: f64,
    #[serde(default)]
    room: Option<[f64; 3]>,
}

impl Scenario {
    pub fn new(
        led_positions: Vec<[f64; 3]>,
        pd_positions: Vec<[f64; 3]>,
        semi_angle_half_power: f64,
        detector_area: f64,
        fov_half_angle: f64,
        peak_intensity: f64,
        room_dims: Option<[f64; 3]>,
    ) -> Result<Self> {
        let s = Self {
            led_positions,
            pd_positions,
            semi_angle_half_power,
            detector_area,
            fov_half_angle,
            peak_intensity,
            room_dims,
        };
        s.validate()?;
        Ok(s)
    }

    /// Parse a scenario from its JSON document.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ScenarioFile =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Scenario::new(
            raw.leds,
            raw.pds,
            raw.semi_angle_deg,
            raw.area_cm2 * 1e-4,
            raw.fov_deg,
            raw.peak_intensity,
            raw.room,
        )
    }

    /// Load and validate a scenario JSON file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn n_tx(&self) -> usize {
        self.led_positions.len()
    }

    pub fn n_rx(&self) -> usize {
        self.pd_positions.len()
    }

    fn validate(&self) -> Result<()> {
        let n_t = self.led_positions.len();
        if n_t == 0 || !n_t.is_power_of_two() {
            return Err(Error::Config(format!(
                "leds: count must be a nonzero power of 2, got {n_t}"
            )));
        }
        if self.pd_positions.is_empty() {
            return Err(Error::Config("pds: at least one PD required".into()));
        }
        if !(self.semi_angle_half_power > 0.0 && self.semi_angle_half_power < 90.0) {
            return Err(Error::Config(format!(
                "semi_angle_deg: must lie in (0, 90), got {}",
                self.semi_angle_half_power
            )));
        }
        if !(self.fov_half_angle > 0.0 && self.fov_half_angle <= 90.0) {
            return Err(Error::Config(format!(
                "fov_deg: must lie in (0, 90], got {}",
                self.fov_half_angle
            )));
        }
        if !(self.detector_area > 0.0) {
            return Err(Error::Config(format!(
                "area_cm2: must be positive, got {} m^2",
                self.detector_area
            )));
        }
        if !(self.peak_intensity > 0.0) {
            return Err(Error::Config(format!(
                "peak_intensity: must be positive, got {}",
                self.peak_intensity
            )));
        }
        if let Some(room) = self.room_dims {
            let inside = |p: &[f64; 3]| (0..3).all(|a| p[a] >= 0.0 && p[a] <= room[a]);
            for (kind, positions) in [("leds", &self.led_positions), ("pds", &self.pd_positions)] {
                if let Some(p) = positions.iter().find(|p| !inside(p)) {
                    return Err(Error::Config(format!(
                        "{kind}: position {p:?} lies outside room {room:?}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The `N_r x N_t` matrix of nonnegative optical gains, stored column-major
/// so that the per-LED gain vector `h_j` is a contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    cols: Vec<Vec<f64>>,
    n_rx: usize,
}

impl ChannelMatrix {
    /// Build from explicit columns; every entry must be finite and >= 0.
    pub fn from_columns(cols: Vec<Vec<f64>>) -> Result<Self> {
        let n_rx = cols.first().map(|c| c.len()).unwrap_or(0);
        if n_rx == 0 || cols.is_empty() {
            return Err(Error::InvalidParameter("channel matrix must be nonempty".into()));
        }
        for col in &cols {
            if col.len() != n_rx {
                return Err(Error::InvalidParameter("ragged channel matrix".into()));
            }
            if col.iter().any(|h| !h.is_finite() || *h < 0.0) {
                return Err(Error::InvalidParameter("channel gains must be nonnegative".into()));
            }
        }
        Ok(Self { cols, n_rx })
    }

    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    pub fn n_tx(&self) -> usize {
        self.cols.len()
    }

    /// Gain from LED `j` to PD `i` (0-based).
    pub fn gain(&self, i: usize, j: usize) -> f64 {
        self.cols[j][i]
    }

    /// The gain vector `h_j` of LED `j` (0-based).
    pub fn column(&self, j: usize) -> &[f64] {
        &self.cols[j]
    }

    /// Indices of LEDs invisible to every PD (all-zero columns).
    pub fn dark_leds(&self) -> Vec<usize> {
        self.cols
            .iter()
            .enumerate()
            .filter(|(_, c)| c.iter().all(|h| *h == 0.0))
            .map(|(j, _)| j)
            .collect()
    }
}

/// Lambertian emission order `k = -ln 2 / ln(cos(semi_angle))`.
pub fn lambertian_order(semi_angle_half_power_deg: f64) -> Result<f64> {
    if !(semi_angle_half_power_deg > 0.0 && semi_angle_half_power_deg < 90.0) {
        return Err(Error::InvalidParameter(format!(
            "semi-angle must lie in (0, 90) degrees, got {semi_angle_half_power_deg}"
        )));
    }
    Ok(-std::f64::consts::LN_2 / semi_angle_half_power_deg.to_radians().cos().ln())
}

/// Optical gain of a single LED-to-PD link.
///
/// Returns 0 when the incidence angle exceeds the receiver FOV. Errors if the
/// two positions coincide.
pub fn channel_gain(led_pos: [f64; 3], pd_pos: [f64; 3], scenario: &Scenario) -> Result<f64> {
    let d2: f64 = (0..3).map(|a| (led_pos[a] - pd_pos[a]).powi(2)).sum();
    if d2 == 0.0 {
        return Err(Error::SingularGeometry(format!(
            "LED and PD coincide at {led_pos:?}"
        )));
    }
    let d = d2.sqrt();
    // LED looks down (-z), PD looks up (+z): both angles share this cosine.
    let cos_angle = (led_pos[2] - pd_pos[2]) / d;
    let cos_fov = scenario.fov_half_angle.to_radians().cos();
    if cos_angle < cos_fov {
        return Ok(0.0);
    }
    let k = lambertian_order(scenario.semi_angle_half_power)?;
    let gain = (k + 1.0) * scenario.detector_area / (2.0 * std::f64::consts::PI * d2)
        * cos_angle.powf(k)
        * cos_angle;
    Ok(gain)
}

/// Assemble the full gain matrix: entry `(i, j)` is `channel_gain(LED j, PD i)`.
pub fn build_channel_matrix(scenario: &Scenario) -> Result<ChannelMatrix> {
    let mut cols = Vec::with_capacity(scenario.n_tx());
    for led in &scenario.led_positions {
        let mut col = Vec::with_capacity(scenario.n_rx());
        for pd in &scenario.pd_positions {
            col.push(channel_gain(*led, *pd, scenario)?);
        }
        cols.push(col);
    }
    ChannelMatrix::from_columns(cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn table2_scenario(leds: Vec<[f64; 3]>, pds: Vec<[f64; 3]>) -> Scenario {
        Scenario::new(leds, pds, 35.0, 1e-4, 60.0, 1.0, Some([5.0, 4.0, 3.0])).unwrap()
    }

    fn scenario1() -> Scenario {
        table2_scenario(
            vec![[1.8, 2.0, 3.0], [1.8, 3.0, 3.0]],
            vec![[2.0, 1.5, 0.8]],
        )
    }

    #[test]
    fn lambertian_order_60_deg_is_one() {
        assert_relative_eq!(lambertian_order(60.0).unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn lambertian_order_35_deg() {
        assert_relative_eq!(lambertian_order(35.0).unwrap(), 3.4744, max_relative = 1e-4);
    }

    #[test]
    fn lambertian_order_45_deg_is_two() {
        assert_relative_eq!(lambertian_order(45.0).unwrap(), 2.0, epsilon = 1e-3);
    }

    #[test]
    fn lambertian_order_rejects_out_of_range() {
        assert!(lambertian_order(0.0).is_err());
        assert!(lambertian_order(90.0).is_err());
        assert!(lambertian_order(-10.0).is_err());
    }

    #[test]
    fn vertical_link_gain() {
        let s = table2_scenario(vec![[2.0, 1.5, 3.0]], vec![[2.0, 1.5, 0.8]]);
        // phi = psi = 0, d = 2.2 m.
        let h = channel_gain([2.0, 1.5, 3.0], [2.0, 1.5, 0.8], &s).unwrap();
        assert_relative_eq!(h, 1.471e-5, max_relative = 1e-3);
    }

    #[test]
    fn beyond_fov_gain_is_zero() {
        // Horizontal offset large enough that incidence exceeds 60 degrees:
        // dz = 2.2, so offset > 2.2 * tan(60 deg) = 3.81.
        let s = table2_scenario(vec![[0.0, 0.0, 3.0]], vec![[3.9, 0.0, 0.8]]);
        let h = channel_gain([0.0, 0.0, 3.0], [3.9, 0.0, 0.8], &s).unwrap();
        assert_eq!(h, 0.0);
    }

    #[test]
    fn inverse_square_scaling() {
        let s = table2_scenario(vec![[1.0, 1.0, 2.0]], vec![[1.0, 1.0, 1.0]]);
        let near = channel_gain([1.0, 1.0, 2.0], [1.0, 1.0, 1.0], &s).unwrap();
        let far = channel_gain([1.0, 1.0, 3.0], [1.0, 1.0, 1.0], &s).unwrap();
        assert_relative_eq!(near / far, 4.0, max_relative = 1e-12);
    }

    #[test]
    fn coincident_positions_are_singular() {
        let s = table2_scenario(vec![[1.0, 1.0, 2.0]], vec![[1.0, 1.0, 1.0]]);
        assert!(matches!(
            channel_gain([1.0, 1.0, 2.0], [1.0, 1.0, 2.0], &s),
            Err(Error::SingularGeometry(_))
        ));
    }

    #[test]
    fn scenario1_matrix_orders_leds_by_distance() {
        let h = build_channel_matrix(&scenario1()).unwrap();
        assert_eq!((h.n_rx(), h.n_tx()), (1, 2));
        // LED 1 is nearer the PD (d^2 5.13 vs 7.13 m^2).
        assert!(h.gain(0, 0) > h.gain(0, 1));
    }

    #[test]
    fn single_link_matrix_matches_scalar_gain() {
        let s = table2_scenario(vec![[2.0, 1.5, 3.0]], vec![[2.0, 1.5, 0.8]]);
        let h = build_channel_matrix(&s).unwrap();
        let g = channel_gain([2.0, 1.5, 3.0], [2.0, 1.5, 0.8], &s).unwrap();
        assert_eq!(h.gain(0, 0), g);
    }

    #[test]
    fn scenario4_matrix_all_positive() {
        let s = table2_scenario(
            vec![
                [1.5, 1.0, 3.0],
                [1.5, 3.0, 3.0],
                [3.5, 1.0, 3.0],
                [3.5, 3.0, 3.0],
            ],
            vec![
                [2.0, 2.0, 0.8],
                [2.0, 3.0, 0.8],
                [1.5, 3.0, 0.8],
                [1.5, 2.0, 0.8],
            ],
        );
        let h = build_channel_matrix(&s).unwrap();
        assert_eq!((h.n_rx(), h.n_tx()), (4, 4));
        for i in 0..4 {
            for j in 0..4 {
                assert!(h.gain(i, j) > 0.0, "entry ({i},{j}) not positive");
            }
        }
        assert!(h.dark_leds().is_empty());
    }

    #[test]
    fn mirror_symmetric_pds_receive_equal_gain() {
        let s = table2_scenario(
            vec![[2.0, 2.0, 3.0]],
            vec![[1.5, 2.0, 0.8], [2.5, 2.0, 0.8]],
        );
        let h = build_channel_matrix(&s).unwrap();
        assert_relative_eq!(h.gain(0, 0), h.gain(1, 0), max_relative = 1e-12);
    }

    #[test]
    fn scenario_count_must_be_power_of_two() {
        let err = Scenario::new(
            vec![[1.0, 1.0, 3.0], [2.0, 1.0, 3.0], [3.0, 1.0, 3.0]],
            vec![[1.0, 1.0, 0.8]],
            35.0,
            1e-4,
            60.0,
            1.0,
            None,
        );
        assert!(err.is_err());
    }

    #[test]
    fn scenario_rejects_positions_outside_room() {
        let err = Scenario::new(
            vec![[9.0, 1.0, 3.0]],
            vec![[1.0, 1.0, 0.8]],
            35.0,
            1e-4,
            60.0,
            1.0,
            Some([5.0, 4.0, 3.0]),
        );
        assert!(err.is_err());
    }

    #[test]
    fn json_round_trip_converts_area() {
        let s = Scenario::from_json(
            r#"{"leds":[[1.0,1.0,3.0]],"pds":[[1.0,1.0,0.8]],
                "semi_angle_deg":35.0,"area_cm2":1.0,"fov_deg":60.0,
                "peak_intensity":1.0}"#,
        )
        .unwrap();
        assert_relative_eq!(s.detector_area, 1e-4);
        assert!(s.room_dims.is_none());
    }
}
