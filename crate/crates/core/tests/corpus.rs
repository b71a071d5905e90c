mod common;

use common::*;
use tourdesk_core::error::CorpusError;
use tourdesk_core::sightdb::{
    parse_first_price, HitField, Popularity, PriceBand, SightCatalog, StationProximity,
};
use tourdesk_core::sightdb::CatalogOptions;
use tourdesk_core::TriState;

#[test]
fn odaiba_fixture_is_valid() {
    let catalog = odaiba();
    assert_eq!(catalog.len(), 8);
    for r in catalog.records() {
        assert!(r.violations().is_empty(), "{}: {:?}", r.sight_id, r.violations());
    }
}

#[test]
fn empty_corpus_is_an_empty_catalog() {
    let catalog = SightCatalog::ingest_str("", CatalogOptions::default()).unwrap();
    assert!(catalog.is_empty());
}

#[test]
fn duplicate_ids_are_named() {
    let line = odaiba().serialize().lines().next().unwrap().to_string();
    let err = SightCatalog::ingest_str(&format!("{line}\n{line}\n"), CatalogOptions::default()).unwrap_err();
    match &err {
        CorpusError::DuplicateId { id, first, line } => {
            assert_eq!(id, "daiba_park");
            assert_eq!((*first, *line), (1, 2));
        }
        other => panic!("{other:?}"),
    }
    assert!(err.to_string().contains("daiba_park"));
}

#[test]
fn malformed_lines_are_reported_by_number() {
    let good = odaiba().serialize();
    let mut lines: Vec<&str> = good.lines().collect();
    lines.insert(2, "{not json");
    let err = SightCatalog::ingest_str(&lines.join("\n"), CatalogOptions::default()).unwrap_err();
    match err {
        CorpusError::Invalid(diags) => {
            assert_eq!(diags.len(), 1);
            assert_eq!(diags[0].line, 3);
        }
        other => panic!("{other:?}"),
    }
    let bad_score = good.lines().next().unwrap().replace("\"review_score\":4.1", "\"review_score\":7.0");
    assert!(SightCatalog::ingest_str(&bad_score, CatalogOptions::default()).is_err());
}

#[test]
fn derived_features_of_the_fixture() {
    let catalog = odaiba();
    let trick = catalog.features("trick_art_museum").unwrap();
    assert_eq!(trick.price_band, PriceBand::Low);
    assert_eq!(trick.station_proximity, StationProximity::Near);
    assert_eq!(trick.popularity, Popularity::High);
    assert_eq!(trick.indoor, TriState::Yes);
    let water = catalog.features("water_science_museum").unwrap();
    assert_eq!(water.popularity, Popularity::Low);
    assert_eq!(water.price_band, PriceBand::Free);
    let daiba = catalog.features("daiba_park").unwrap();
    assert_eq!(daiba.station_proximity, StationProximity::Far);
    assert_eq!(catalog.features("madame_tussauds").unwrap().price_band, PriceBand::Mid);
}

/// Every charge string of the fixtures, parsed by hand.
#[test]
fn charge_parse_oracle() {
    let expected = [
        ("daiba_park", None),
        ("trick_art_museum", Some(1000)),
        ("water_science_museum", None),
        ("madame_tussauds", Some(2600)),
        ("miraikan", Some(630)),
        ("odaiba_seaside_park", None),
        ("legoland_tokyo", Some(2800)),
        ("joypolis", Some(800)),
        ("tokyo_tower", Some(1200)),
        ("tokyo_skytree", Some(2300)),
    ];
    let odaiba = odaiba();
    let towers = towers();
    for (id, price) in expected {
        let record = odaiba.get(id).or_else(|| towers.get(id)).unwrap();
        assert_eq!(parse_first_price(&record.charge), price, "{id}");
    }
}

#[test]
fn ticket_price_query_hits_the_charge_line() {
    let catalog = odaiba();
    let hits = catalog.search("ticket price", Some("trick_art_museum"), 3);
    assert_eq!(hits[0].field, HitField::Charge);
    assert!(hits[0].text.contains("Adult: 1,000yen (High school students"));
    assert!(catalog.search("zzz qqq", None, 3).is_empty());
    assert!(catalog.search("ticket price", None, 0).is_empty());
}

#[test]
fn tower_prices_are_searchable() {
    let catalog = towers();
    let tower = catalog.search("How much are tickets?", Some("tokyo_tower"), 1);
    assert_eq!(tower[0].field, HitField::Charge);
    for price in ["1,200 yen", "1,000 yen", "700 yen", "500 yen"] {
        assert!(tower[0].text.contains(price), "{price}");
    }
    let skytree = catalog.search("How much are tickets?", Some("tokyo_skytree"), 1);
    for price in ["2,300 yen", "1,650 yen", "1,000 yen"] {
        assert!(skytree[0].text.contains(price), "{price}");
    }
}

#[test]
fn positive_reviews_best_first() {
    let catalog = odaiba();
    let reviews = catalog.positive_reviews("trick_art_museum", 3);
    assert_eq!(reviews.len(), 3);
    assert!(reviews[0].starts_with("We laughed"));
    assert_eq!(reviews[1], "Fun illusions and friendly staff.");
    assert!(catalog.positive_reviews("nowhere", 3).is_empty());
}
