//! Medium feasibility rules for heterogeneous marine networks.
//!
//! Rows reproduce the usual comparison of undersea wireless technologies:
//! propagation speed, data-rate class, communication range and scenarios.

use crate::error::{domain, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Medium {
    Em,
    Acoustic,
    Optical,
    Mi,
}

/// Order of magnitude of achievable data rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum RateClass {
    Kbps,
    Mbps,
    Gbps,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MediumSpec {
    pub medium: Medium,
    pub propagation_speed_mps: f64,
    pub rate_class: RateClass,
    /// Maximum underwater communication range.
    pub range_limit_m: f64,
    pub scenario_tags: &'static [&'static str],
}

pub const MEDIUM_TABLE: [MediumSpec; 4] = [
    MediumSpec {
        medium: Medium::Em,
        propagation_speed_mps: 3.33e7,
        rate_class: RateClass::Mbps,
        range_limit_m: 10.0,
        scenario_tags: &["shallow water", "localized network", "cross air/water interface"],
    },
    MediumSpec {
        medium: Medium::Acoustic,
        propagation_speed_mps: 1500.0,
        rate_class: RateClass::Kbps,
        range_limit_m: 20_000.0,
        scenario_tags: &["long range", "small volume data transmission"],
    },
    MediumSpec {
        medium: Medium::Optical,
        propagation_speed_mps: 3.33e7,
        rate_class: RateClass::Gbps,
        range_limit_m: 100.0,
        scenario_tags: &["clear water", "line-of-sight", "real-time transmission"],
    },
    MediumSpec {
        medium: Medium::Mi,
        propagation_speed_mps: 3.33e7,
        rate_class: RateClass::Mbps,
        range_limit_m: 100.0,
        scenario_tags: &["oil reservoirs", "water pipelines"],
    },
];

pub fn medium_spec(medium: Medium) -> &'static MediumSpec {
    MEDIUM_TABLE
        .iter()
        .find(|m| m.medium == medium)
        .expect("every medium has a table row")
}

/// Where the link runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LinkContext {
    AboveSurface,
    AirSeaBoundary,
    Underwater,
    /// Underwater with clear water and line of sight between the ends.
    ClearWaterLos,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MediumSelection {
    /// Feasible media, highest rate class first.
    pub feasible: Vec<MediumSpec>,
    /// Why nothing is feasible, when `feasible` is empty.
    pub reason: Option<String>,
}

pub fn select_medium(distance_m: f64, context: LinkContext) -> Result<MediumSelection> {
    if !(distance_m > 0.0) || !distance_m.is_finite() {
        return Err(domain(format!("distance {distance_m} m must be positive")));
    }
    let mut feasible: Vec<MediumSpec> = match context {
        // EM through air sees negligible absorption and crosses the surface.
        LinkContext::AboveSurface | LinkContext::AirSeaBoundary => vec![*medium_spec(Medium::Em)],
        LinkContext::Underwater | LinkContext::ClearWaterLos => MEDIUM_TABLE
            .iter()
            .filter(|m| distance_m <= m.range_limit_m)
            .filter(|m| m.medium != Medium::Optical || context == LinkContext::ClearWaterLos)
            .copied()
            .collect(),
    };
    // stable sort keeps table order within a rate class
    feasible.sort_by_key(|m| std::cmp::Reverse(m.rate_class));
    let reason = feasible.is_empty().then(|| {
        format!(
            "no medium reaches {distance_m} m underwater (longest range is acoustic, {} m)",
            medium_spec(Medium::Acoustic).range_limit_m
        )
    });
    Ok(MediumSelection { feasible, reason })
}
