//! Customer-independent features derived from a sight record.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::record::SightRecord;
use crate::TriState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriceBand {
    Free,
    Low,
    Mid,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StationProximity {
    Near,
    Far,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Popularity {
    Low,
    Mid,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DerivedFeatures {
    pub price_band: PriceBand,
    pub indoor: TriState,
    pub station_proximity: StationProximity,
    pub popularity: Popularity,
}

/// Band cutoffs. Prices are in yen for the first amount found in the charge
/// text (usually the adult fare).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureThresholds {
    pub low_max_yen: u32,
    pub mid_max_yen: u32,
    pub near_max_meters: u32,
    pub walk_meters_per_minute: u32,
    /// Fewer reviews than this is `Popularity::Low`.
    pub popularity_low_below: u32,
    /// At least this many reviews is `Popularity::High`.
    pub popularity_high_from: u32,
}

impl Default for FeatureThresholds {
    fn default() -> Self {
        Self {
            low_max_yen: 1000,
            mid_max_yen: 3000,
            near_max_meters: 600,
            walk_meters_per_minute: 80,
            popularity_low_below: 30,
            popularity_high_from: 300,
        }
    }
}

fn amount_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i)(?:¥|￥)\s*(\d{1,3}(?:,\d{3})+|\d+)|(\d{1,3}(?:,\d{3})+|\d+)\s*(?:yen|円)")
            .expect("amount pattern")
    })
}

fn free_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\bfree\b|無料").expect("free pattern"))
}

fn walk_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i)(\d+)[- ]?(?:minutes?|mins?)\s+walk|徒歩\s*(\d+)\s*分").expect("walk pattern")
    })
}

/// First yen amount mentioned in a charge text.
pub fn parse_first_price(charge: &str) -> Option<u32> {
    let caps = amount_re().captures(charge)?;
    let raw = caps.get(1).or_else(|| caps.get(2))?.as_str();
    raw.replace(',', "").parse().ok()
}

/// Shortest walking time in minutes mentioned in an access text.
pub fn parse_walk_minutes(access: &str) -> Option<u32> {
    walk_re()
        .captures_iter(access)
        .filter_map(|c| c.get(1).or_else(|| c.get(2)))
        .filter_map(|m| m.as_str().parse().ok())
        .min()
}

pub fn price_band(record: &SightRecord, t: &FeatureThresholds) -> PriceBand {
    match parse_first_price(&record.charge) {
        Some(0) => PriceBand::Free,
        Some(yen) if yen <= t.low_max_yen => PriceBand::Low,
        Some(yen) if yen <= t.mid_max_yen => PriceBand::Mid,
        Some(_) => PriceBand::High,
        None if free_re().is_match(&record.charge) => PriceBand::Free,
        None => record.price_override.unwrap_or(PriceBand::Mid),
    }
}

/// Stated distance, else walking minutes times the configured pace.
pub fn station_distance(record: &SightRecord, t: &FeatureThresholds) -> Option<u32> {
    record.distance_from_station.or_else(|| {
        parse_walk_minutes(&record.access).map(|m| m.saturating_mul(t.walk_meters_per_minute))
    })
}

pub fn derive_features(record: &SightRecord, t: &FeatureThresholds) -> DerivedFeatures {
    let station_proximity = match station_distance(record, t) {
        Some(m) if m <= t.near_max_meters => StationProximity::Near,
        Some(_) => StationProximity::Far,
        None => StationProximity::Unknown,
    };
    let popularity = if record.n_reviews < t.popularity_low_below {
        Popularity::Low
    } else if record.n_reviews >= t.popularity_high_from {
        Popularity::High
    } else {
        Popularity::Mid
    };
    DerivedFeatures {
        price_band: price_band(record, t),
        indoor: record.indoor,
        station_proximity,
        popularity,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(charge: &str, access: &str, n_reviews: u32) -> SightRecord {
        SightRecord {
            sight_id: "x".into(),
            name: "X".into(),
            summary_long: "X is a place.".into(),
            summary_one_line: String::new(),
            business_hours: String::new(),
            location: String::new(),
            access: access.into(),
            charge: charge.into(),
            reviews: vec![],
            review_score: (n_reviews > 0).then_some(4.0),
            n_reviews,
            indoor: TriState::Unknown,
            distance_from_station: None,
            price_override: None,
        }
    }

    #[test]
    fn price_parse_oracle() {
        // Hand-checked against each charge string.
        let cases = [
            ("Adult: 1,000yen (High school students and above) Child: 700yen", Some(1000), PriceBand::Low),
            ("Adults 2,300 yen, Children 1,000 yen", Some(2300), PriceBand::Mid),
            ("General: 3,500 yen", Some(3500), PriceBand::High),
            ("Free admission", None, PriceBand::Free),
            ("0 yen", Some(0), PriceBand::Free),
            ("大人 1,200円", Some(1200), PriceBand::Mid),
            ("¥800 per person", Some(800), PriceBand::Low),
            ("Varies by season", None, PriceBand::Mid),
        ];
        let t = FeatureThresholds::default();
        for (charge, price, band) in cases {
            assert_eq!(parse_first_price(charge), price, "{charge}");
            assert_eq!(price_band(&record(charge, "", 0), &t), band, "{charge}");
        }
    }

    #[test]
    fn override_used_when_unparsable() {
        let mut r = record("Varies by season", "", 0);
        r.price_override = Some(PriceBand::High);
        assert_eq!(price_band(&r, &FeatureThresholds::default()), PriceBand::High);
    }

    #[test]
    fn walk_minutes_map_to_distance() {
        let t = FeatureThresholds::default();
        let r = record(
            "",
            "Train: 2-minute walk from Odaiba Kaihin Koen Station, a 5-minute walk from Tokyo Teleport Station",
            0,
        );
        assert_eq!(station_distance(&r, &t), Some(160));
        assert_eq!(derive_features(&r, &t).station_proximity, StationProximity::Near);
        let far = record("", "15 minutes walk from the station", 0);
        assert_eq!(derive_features(&far, &t).station_proximity, StationProximity::Far);
        let none = record("", "Bus from Shinagawa", 0);
        assert_eq!(derive_features(&none, &t).station_proximity, StationProximity::Unknown);
    }

    #[test]
    fn explicit_distance_wins() {
        let mut r = record("", "20-minute walk", 0);
        r.distance_from_station = Some(150);
        assert_eq!(
            derive_features(&r, &FeatureThresholds::default()).station_proximity,
            StationProximity::Near
        );
    }

    #[test]
    fn popularity_boundaries() {
        let t = FeatureThresholds::default();
        let band = |n| derive_features(&record("", "", n), &t).popularity;
        assert_eq!(band(0), Popularity::Low);
        assert_eq!(band(29), Popularity::Low);
        assert_eq!(band(30), Popularity::Mid);
        assert_eq!(band(299), Popularity::Mid);
        assert_eq!(band(300), Popularity::High);
    }
}
