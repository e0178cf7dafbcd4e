mod common;

use common::*;
use condbelief::{coherent_extend, fixtures, io, Player};
use rand::Rng;

#[test]
fn bundled_fixtures_are_canonical() {
    let ts = io::parse_structure(fixtures::REDUNDANT_PAIR).unwrap();
    assert_eq!(io::serialize_structure(&ts), fixtures::REDUNDANT_PAIR);
    let one = io::parse_structure(fixtures::ONE_TYPE).unwrap();
    assert_eq!(io::serialize_structure(&one), fixtures::ONE_TYPE);
}

#[test]
fn random_structures_round_trip_byte_identically() {
    let mut rng = rng(11);
    for case in 0..100 {
        let ts = random_structure(&mut rng, &SMALL);
        let first = io::serialize_structure(&ts);
        let back = io::parse_structure(&first).unwrap();
        assert_eq!(back.beliefs(Player::First), ts.beliefs(Player::First), "case {case}");
        assert_eq!(back.beliefs(Player::Second), ts.beliefs(Player::Second), "case {case}");
        assert_eq!(io::serialize_structure(&back), first, "case {case}");
    }
}

#[test]
fn random_prefixes_round_trip() {
    let mut rng = rng(12);
    for case in 0..40 {
        let (frame, p) = random_prefix(&mut rng, 3);
        let p = if rng.gen_bool(0.5) { coherent_extend(&p, &frame).unwrap() } else { p };
        let names = ["a".to_string(), "b".to_string()];
        let text = io::serialize_prefix(&p, &frame, &names);
        let (frame2, names2, q) = io::parse_prefix(&text).unwrap();
        assert_eq!(q, p, "case {case}");
        assert_eq!(names2, names);
        assert_eq!(io::serialize_prefix(&q, &frame2, &names2), text);
    }
}

#[test]
fn random_cps_documents_round_trip() {
    let mut rng = rng(13);
    for _ in 0..50 {
        let x = space("x", rng.gen_range(1..=5));
        let family = random_family(&mut rng, &x, 3);
        let cps = random_cps(&mut rng, &family, 4);
        let text = io::serialize_cps(&cps);
        assert_eq!(io::parse_cps(&text).unwrap(), cps);
        assert_eq!(io::serialize_cps(&io::parse_cps(&text).unwrap()), text);
    }
}

#[test]
fn signals_document() {
    let text = r#"{"format_version":"1","states":["s1","s2","s3"],
        "signals":{"a":{"s1":"L","s2":"L","s3":"R"},"b":{"s1":"x","s2":"x","s3":"x"}}}"#;
    let (frame, names) = io::parse_signals(text).unwrap();
    assert_eq!(names, ["a".to_string(), "b".to_string()]);
    assert_eq!(frame.family(Player::First).len(), 2);
    assert_eq!(frame.family(Player::Second).len(), 1);
    let out = io::serialize_frame(&frame, &names);
    assert_eq!(io::parse_frame(&out).unwrap().0, frame);
}
