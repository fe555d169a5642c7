//! PPKM level recommendation from a `(R_eff, ρ)` point.
//!
//! Two conditions decide the level: high bed occupancy (`ρ > rho_split`) and
//! ongoing transmission (`R_eff > r_low`). Both true gives level 4, exactly one
//! gives level 3, neither allows level 2 or lower. `r_high` only annotates the
//! region; values at or above it lie outside the range the thresholds were
//! calibrated on.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyThresholds {
    pub r_low: f64,
    pub r_high: f64,
    pub rho_split: f64,
}

impl Default for PolicyThresholds {
    fn default() -> Self {
        Self {
            r_low: 0.40,
            r_high: 0.72,
            rho_split: 0.2,
        }
    }
}

impl PolicyThresholds {
    pub fn new(r_low: f64, r_high: f64, rho_split: f64) -> Result<Self> {
        let t = Self {
            r_low,
            r_high,
            rho_split,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.r_low && self.r_low < self.r_high && self.r_high.is_finite()) {
            return Err(Error::invalid("thresholds", "need 0 < r_low < r_high"));
        }
        if !(0.0 < self.rho_split && self.rho_split < 1.0) {
            return Err(Error::invalid("thresholds", "need 0 < rho_split < 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PandemicPoint {
    pub r_eff: f64,
    pub occupancy: f64,
}

impl PandemicPoint {
    pub fn new(r_eff: f64, occupancy: f64) -> Result<Self> {
        if !(r_eff >= 0.0 && r_eff.is_finite()) {
            return Err(Error::invalid(
                "r_eff",
                format!("{r_eff} is not a non-negative number"),
            ));
        }
        if !(0.0..=1.0).contains(&occupancy) {
            return Err(Error::invalid(
                "occupancy",
                format!("{occupancy} is outside [0, 1]"),
            ));
        }
        Ok(Self { r_eff, occupancy })
    }
}

/// Ordered from least to most restrictive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PpkmLevel {
    /// Level 2 or any lower level, including no restrictions.
    #[serde(rename = "at-most-2")]
    AtMost2,
    #[serde(rename = "level-3")]
    Level3,
    #[serde(rename = "level-4")]
    Level4,
}

impl PpkmLevel {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::AtMost2 => "at-most-2",
            Self::Level3 => "level-3",
            Self::Level4 => "level-4",
        }
    }
}

impl fmt::Display for PpkmLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReffBand {
    /// `R_eff ≤ r_low`
    Low,
    /// `r_low < R_eff ≤ r_high`
    Calibrated,
    /// `R_eff > r_high`
    High,
}

/// One of the six rectangles of the `(R_eff, ρ)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Region {
    pub reff: ReffBand,
    /// `ρ > rho_split`.
    pub high_occupancy: bool,
}

impl Region {
    pub fn as_str(&self) -> &'static str {
        match (self.reff, self.high_occupancy) {
            (ReffBand::Low, false) => "low-reff/low-occupancy",
            (ReffBand::Low, true) => "low-reff/high-occupancy",
            (ReffBand::Calibrated, false) => "calibrated-reff/low-occupancy",
            (ReffBand::Calibrated, true) => "calibrated-reff/high-occupancy",
            (ReffBand::High, false) => "high-reff/low-occupancy",
            (ReffBand::High, true) => "high-reff/high-occupancy",
        }
    }

    /// Level assigned to every point of the rectangle.
    pub fn level(&self) -> PpkmLevel {
        match (self.reff, self.high_occupancy) {
            (ReffBand::Low, false) => PpkmLevel::AtMost2,
            (ReffBand::Low, true) | (_, false) => PpkmLevel::Level3,
            (_, true) => PpkmLevel::Level4,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyRecommendation {
    pub level: PpkmLevel,
    pub region: Region,
    pub note: String,
}

pub fn classify(point: &PandemicPoint, thresholds: &PolicyThresholds) -> PolicyRecommendation {
    let high_occupancy = point.occupancy > thresholds.rho_split;
    let transmitting = point.r_eff > thresholds.r_low;
    let level = match (high_occupancy, transmitting) {
        (true, true) => PpkmLevel::Level4,
        (true, false) | (false, true) => PpkmLevel::Level3,
        (false, false) => PpkmLevel::AtMost2,
    };

    let reff = if !transmitting {
        ReffBand::Low
    } else if point.r_eff <= thresholds.r_high {
        ReffBand::Calibrated
    } else {
        ReffBand::High
    };
    let region = Region {
        reff,
        high_occupancy,
    };
    debug_assert_eq!(region.level(), level);

    let mut note = match (high_occupancy, transmitting) {
        (true, true) => "occupancy and R_eff both above thresholds".to_owned(),
        (true, false) => {
            "occupancy above threshold, R_eff low; a lower level may be considered as occupancy is expected to fall".to_owned()
        }
        (false, true) => {
            "R_eff above threshold, occupancy low; do not lower further to avoid an occupancy surge".to_owned()
        }
        (false, false) => "occupancy and R_eff both low".to_owned(),
    };
    if point.r_eff >= thresholds.r_high {
        note.push_str("; R_eff outside calibration range");
    }
    PolicyRecommendation {
        level,
        region,
        note,
    }
}

pub fn classify_series(
    points: &[(i64, PandemicPoint)],
    thresholds: &PolicyThresholds,
) -> Vec<(i64, PolicyRecommendation)> {
    points
        .iter()
        .map(|(day, point)| (*day, classify(point, thresholds)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn level(r: f64, rho: f64) -> PpkmLevel {
        classify(
            &PandemicPoint::new(r, rho).unwrap(),
            &PolicyThresholds::default(),
        )
        .level
    }

    #[test]
    fn reference_points() {
        assert_eq!(level(0.5365898354, 0.43), PpkmLevel::Level4);
        assert_eq!(level(0.5824943297, 0.13), PpkmLevel::Level3);
        assert_eq!(level(0.30, 0.10), PpkmLevel::AtMost2);
        assert_eq!(level(0.80, 0.50), PpkmLevel::Level4);
        assert_eq!(level(0.30, 0.50), PpkmLevel::Level3);
        assert_eq!(level(0.80, 0.10), PpkmLevel::Level3);
    }

    #[test]
    fn boundaries_classify_downward() {
        assert_eq!(level(0.40, 0.20), PpkmLevel::AtMost2);
        let rec = classify(
            &PandemicPoint::new(0.72, 0.2).unwrap(),
            &PolicyThresholds::default(),
        );
        assert_eq!(rec.region.reff, ReffBand::Calibrated);
        assert!(!rec.region.high_occupancy);
        assert!(rec.note.contains("outside calibration range"));
        let rec = classify(
            &PandemicPoint::new(0.71, 0.2).unwrap(),
            &PolicyThresholds::default(),
        );
        assert!(!rec.note.contains("outside calibration range"));
    }

    #[test]
    fn region_names_are_distinct() {
        let mut names = std::collections::HashSet::new();
        for reff in [ReffBand::Low, ReffBand::Calibrated, ReffBand::High] {
            for high_occupancy in [false, true] {
                names.insert(
                    Region {
                        reff,
                        high_occupancy,
                    }
                    .as_str(),
                );
            }
        }
        assert_eq!(names.len(), 6);
    }

    #[test]
    fn invalid_inputs() {
        assert!(PandemicPoint::new(-0.1, 0.5).is_err());
        assert!(PandemicPoint::new(0.5, 1.01).is_err());
        assert!(PolicyThresholds::new(0.7, 0.4, 0.2).is_err());
        assert!(PolicyThresholds::new(0.4, 0.7, 1.0).is_err());
    }

    #[test]
    fn series_preserves_order() {
        assert!(classify_series(&[], &PolicyThresholds::default()).is_empty());
        let pts: Vec<_> = (0..10)
            .map(|d| {
                (
                    d,
                    PandemicPoint::new(0.1 * d as f64, 0.05 * d as f64).unwrap(),
                )
            })
            .collect();
        let out = classify_series(&pts, &PolicyThresholds::default());
        assert_eq!(
            out.iter().map(|(d, _)| *d).collect::<Vec<_>>(),
            (0..10).collect::<Vec<_>>()
        );
        let low: Vec<_> = (0..5)
            .map(|d| (d, PandemicPoint::new(0.39 - 0.01 * d as f64, 0.19).unwrap()))
            .collect();
        assert!(classify_series(&low, &PolicyThresholds::default())
            .iter()
            .all(|(_, r)| r.level == PpkmLevel::AtMost2));
    }

    proptest! {
        #[test]
        fn monotone_in_both_coordinates(
            r in 0.0f64..1.5, dr in 0.0f64..0.5, rho in 0.0f64..1.0, drho in 0.0f64..1.0,
        ) {
            let rho2 = (rho + drho).min(1.0);
            let base = level(r, rho);
            prop_assert!(level(r + dr, rho) >= base);
            prop_assert!(level(r, rho2) >= base);
        }

        #[test]
        fn region_agrees_with_level(r in 0.0f64..2.0, rho in 0.0f64..1.0) {
            let rec = classify(&PandemicPoint::new(r, rho).unwrap(), &PolicyThresholds::default());
            prop_assert_eq!(rec.region.level(), rec.level);
        }
    }
}
