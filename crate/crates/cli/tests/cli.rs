use std::path::PathBuf;
use std::process::Command;

use condbelief::{fixtures, io, Player, PointMap};
use condbelief_cli::{run, Outcome};
use serde_json::Value;
use tempfile::TempDir;

fn cli(args: &[&str]) -> Outcome {
    run(std::iter::once("condbelief").chain(args.iter().copied()))
}

fn machine(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.extend(["--format", "machine"]);
    let out = cli(&all);
    assert!(out.stderr.is_empty(), "{}", out.stderr);
    (out.code, serde_json::from_str(&out.stdout).unwrap())
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path: PathBuf = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn validates_fixture() {
    let out = cli(&["validate", "friedenberg"]);
    assert_eq!(out.code, 0, "{out:?}");
    assert_eq!(out.stdout, "valid structure\n");
}

#[test]
fn redundancy_witness() {
    let (code, v) = machine(&["redundancy", "friedenberg"]);
    assert_eq!(code, 1);
    assert_eq!(v["witness"]["player"], "a");
    assert_eq!(v["witness"]["types"], serde_json::json!(["t'_a", "t''_a"]));

    // the two reported types really do unfold identically
    let ts = io::parse_structure(fixtures::REDUNDANT_PAIR).unwrap();
    let a = ts.player_named("a").unwrap();
    let t1 = ts.types(a).index_of("t'_a").unwrap();
    let t2 = ts.types(a).index_of("t''_a").unwrap();
    let h = condbelief::unfold(&ts, 4).unwrap();
    assert_eq!(h[a.index()][t1], h[a.index()][t2]);

    assert_eq!(cli(&["redundancy", "one-type"]).code, 0);
}

#[test]
fn compare_is_reflexive_and_mutual() {
    assert_eq!(cli(&["compare", "friedenberg", "friedenberg", "--fixpoint"]).code, 0);
    let out = cli(&["compare", "friedenberg", "one-type", "--fixpoint", "--mutual"]);
    assert_eq!(out.code, 0, "{out:?}");
    assert!(out.stdout.contains("friedenberg included-in one-type"));
    assert!(out.stdout.contains("one-type included-in friedenberg"));
    assert!(out.stdout.contains("terminal"));
    assert_eq!(cli(&["compare", "friedenberg", "one-type", "--depth", "3"]).code, 0);
}

#[test]
fn compare_reports_missing_hierarchy() {
    let dir = TempDir::new().unwrap();
    let two_states = r#"{"format_version":"1","states":["x","y"],"players":[
        {"name":"a","events":[["x","y"]],"types":["p","q"],
         "beliefs":{"p":{"{x,y}":{"(x,u)":"1"}},"q":{"{x,y}":{"(y,u)":"1"}}}},
        {"name":"b","events":[["x","y"]],"types":["u"],
         "beliefs":{"u":{"{x,y}":{"(x,p)":"1/2","(y,q)":"1/2"}}}}]}"#;
    let only_p = r#"{"format_version":"1","states":["x","y"],"players":[
        {"name":"a","events":[["x","y"]],"types":["p"],
         "beliefs":{"p":{"{x,y}":{"(x,u)":"1"}}}},
        {"name":"b","events":[["x","y"]],"types":["u"],
         "beliefs":{"u":{"{x,y}":{"(x,p)":"1/2","(y,p)":"1/2"}}}}]}"#;
    let big = write(&dir, "big.json", two_states);
    let small = write(&dir, "small.json", only_p);
    let (code, v) = machine(&["compare", &big, &small, "--fixpoint"]);
    assert_eq!(code, 1);
    assert_eq!(v["forward"]["included"], false);
    // u's beliefs about q differ, so from order 3 on even p has no match
    assert_eq!(v["forward"]["witness"]["player"], "a");
    assert_eq!(v["forward"]["witness"]["type"], "p");
    let (code, v) = machine(&["compare", &big, &small, "--depth", "1"]);
    assert_eq!(code, 1);
    assert_eq!(v["forward"]["witness"]["type"], "q");
    assert_eq!(cli(&["compare", &big, &small, "--depth", "2"]).code, 1);
    assert_eq!(cli(&["compare", &small, &big, "--depth", "1"]).code, 0);
    assert_eq!(cli(&["compare", &small, &big, "--fixpoint"]).code, 1);
}

#[test]
fn completeness_witness_reparses() {
    let (code, v) = machine(&["completeness", "friedenberg"]);
    assert_eq!(code, 1);
    assert_eq!(v["players"]["a"]["complete"], true);
    let witness = io::cps_from_value(v["players"]["b"]["witness"].clone()).unwrap();
    assert!(witness.validate().is_valid());
    let ts = io::parse_structure(fixtures::REDUNDANT_PAIR).unwrap();
    let b = ts.player_named("b").unwrap();
    assert_eq!(witness.family(), ts.cylinder_family(b));
    assert!(ts.beliefs(b).iter().all(|c| *c != witness));
    let half = condbelief::Rational::new(1, 2);
    assert_eq!(witness.conditional(0).masses(), &[half.clone(), half]);
    assert_eq!(cli(&["completeness", "one-type"]).code, 0);
}

#[test]
fn invalid_structure_violation_reproduces() {
    let dir = TempDir::new().unwrap();
    let bad = fixtures::REDUNDANT_PAIR.replacen("\"(s,t_b)\": \"1/1\"", "\"(s,t_b)\": \"2/3\"", 1);
    let file = write(&dir, "bad.json", &bad);
    let (code, v) = machine(&["validate", &file]);
    assert_eq!(code, 1);
    let violation = &v["violations"][0];
    assert_eq!(violation["location"], "player a, type t'_a");
    assert_eq!(violation["kind"], "not_normalized");
    let total: condbelief::Rational = violation["total"].as_str().unwrap().parse().unwrap();
    let ts = io::parse_structure(&bad).unwrap();
    let a = ts.player_named("a").unwrap();
    assert_eq!(ts.belief(a, 0).conditional(0).total(), total);
    // other commands refuse the invalid input
    assert_eq!(cli(&["redundancy", &file]).code, 2);
}

#[test]
fn cps_validation_reports_chain_rule() {
    let dir = TempDir::new().unwrap();
    let doc = r#"{"format_version":"1","space":["a","b","c"],"events":[["a","b","c"],["a","b"]],
        "conditionals":{"{a,b,c}":{"a":"1/4","b":"1/4","c":"1/2"},"{a,b}":{"a":"3/4","b":"1/4"}}}"#;
    let file = write(&dir, "cps.json", doc);
    let (code, v) = machine(&["validate", &file]);
    assert_eq!(code, 1);
    let w = &v["violations"][0];
    assert_eq!(w["kind"], "chain_rule");
    let cps = io::parse_cps(doc).unwrap();
    let lhs: condbelief::Rational = w["lhs"].as_str().unwrap().parse().unwrap();
    let rhs: condbelief::Rational = w["rhs"].as_str().unwrap().parse().unwrap();
    let point = cps.space().index_of(w["point"].as_str().unwrap()).unwrap();
    let inner = cps.conditional(1).mass(point) * cps.conditional(0).mass_of(&cps.family().events()[1]);
    assert_eq!(inner, lhs);
    assert_eq!(cps.conditional(0).mass(point), &rhs);
    assert_ne!(lhs, rhs);
}

const MAP_ONTO_ONE_TYPE: &str = r#"{"format_version":"1","maps":{
    "a":{"t'_a":"u_a","t''_a":"u_a"},"b":{"t_b":"u_b"}}}"#;
const MAP_INTO_FIXTURE: &str = r#"{"format_version":"1","maps":{
    "a":{"u_a":"t''_a"},"b":{"u_b":"t_b"}}}"#;

#[test]
fn morphisms() {
    let dir = TempDir::new().unwrap();
    let good = write(&dir, "good.json", MAP_ONTO_ONE_TYPE);
    assert_eq!(cli(&["morphism", "friedenberg", "one-type", "--map-file", &good]).code, 0);
    let bad = write(&dir, "bad.json", MAP_INTO_FIXTURE);
    let (code, v) = machine(&["morphism", "one-type", "friedenberg", "--map-file", &bad]);
    assert_eq!(code, 1);
    let w = &v["witness"];
    assert_eq!(w["player"], "b");
    assert_eq!(w["type"], "u_b");

    // re-derive both sides of the reported mismatch
    let star = io::parse_structure(fixtures::ONE_TYPE).unwrap();
    let base = io::parse_structure(fixtures::REDUNDANT_PAIR).unwrap();
    let phi = io::parse_type_map(MAP_INTO_FIXTURE, &star, &base).unwrap();
    let b = base.player_named("b").unwrap();
    let space = base.belief_space(b);
    let point = space.index_of(w["point"].as_str().unwrap()).unwrap();
    assert_eq!(w["event"], base.cylinder_family(b).events()[0].display(space));
    let expected: condbelief::Rational = w["expected"].as_str().unwrap().parse().unwrap();
    let found: condbelief::Rational = w["found"].as_str().unwrap().parse().unwrap();
    assert_eq!(base.belief(b, phi.apply(b, 0)).conditional(0).mass(point), &expected);
    let phi_a = PointMap::new(star.types(Player::First), base.types(Player::First), phi.images(Player::First).to_vec()).unwrap();
    let pushed = star.belief(b, 0).conditional(0).pushforward(&PointMap::lift_second(star.states(), &phi_a));
    assert_eq!(pushed.mass(point), &found);

    // every map between single-state structures preserves hierarchies
    let out = cli(&["morphism", "one-type", "friedenberg", "--map-file", &bad, "--kind", "hierarchy"]);
    assert_eq!(out.code, 0, "{out:?}");
}

#[test]
fn extend_round_trips() {
    let dir = TempDir::new().unwrap();
    let out = cli(&["extend", "friedenberg", "--player", "a", "--type", "t'_a", "--order", "2"]);
    assert_eq!(out.code, 0, "{out:?}");
    let file = write(&dir, "p2.json", &out.stdout);
    let (_, _, p2) = io::parse_prefix(&out.stdout).unwrap();
    assert_eq!(p2.order(), 2);
    let out = cli(&["extend", &file, "--order", "4"]);
    assert_eq!(out.code, 0, "{out:?}");
    let (frame, _, p4) = io::parse_prefix(&out.stdout).unwrap();
    assert_eq!(condbelief::truncate(&p4, 2).unwrap(), p2);
    assert!(condbelief::check_prefix_coherence(&p4, &frame).unwrap().is_valid());
    assert_eq!(cli(&["validate", &file]).code, 0);
    assert_eq!(cli(&["extend", &file, "--order", "1"]).code, 2);
}

#[test]
fn lift_round_trips() {
    let dir = TempDir::new().unwrap();
    let nu = write(
        &dir,
        "nu.json",
        r#"{"format_version":"1","factors":[["x1","x2"],["z1","z2"]],"events":[["x1","x2"],["x2"]],
        "conditionals":{"{x1,x2}":{"(x1,z1)":"1/3","(x1,z2)":"2/3"},"{x2}":{"(x2,z2)":"1"}}}"#,
    );
    let f = write(
        &dir,
        "f.json",
        r#"{"format_version":"1","domain":["y1","y2","y3"],"map":{"y1":"z2","y2":"z1","y3":"z1"}}"#,
    );
    let out = cli(&["lift", &nu, "--surjection-file", &f]);
    assert_eq!(out.code, 0, "{out:?}");
    let mu = io::parse_cps(&out.stdout).unwrap();
    assert!(mu.validate().is_valid());
    let nu_cps = io::parse_cps(&std::fs::read_to_string(&nu).unwrap()).unwrap();
    let (_, z) = nu_cps.space().factors().unwrap();
    let f1 = io::parse_point_map(&std::fs::read_to_string(&f).unwrap(), z).unwrap();
    let (x, _) = mu.space().factors().unwrap();
    let down = PointMap::lift_second(x, &f1);
    assert_eq!(condbelief::pushforward_cps(&mu, &down, nu_cps.family()).unwrap(), nu_cps);
    // z1 lifts to y2, the first preimage
    assert!(out.stdout.contains("\"(x1,y2)\": \"1/3\""));

    let not_onto = write(
        &dir,
        "g.json",
        r#"{"format_version":"1","domain":["y1"],"map":{"y1":"z1"}}"#,
    );
    let out = cli(&["lift", &nu, "--surjection-file", &not_onto]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("z2"), "{}", out.stderr);
}

#[test]
fn ingest_signals() {
    let dir = TempDir::new().unwrap();
    let file = write(
        &dir,
        "sig.json",
        r#"{"format_version":"1","states":["s1","s2","s3"],
        "signals":{"a":{"s1":"L","s2":"L","s3":"R"},"b":{"s1":"1","s2":"2","s3":"3"}}}"#,
    );
    let (code, v) = machine(&["ingest-signals", &file]);
    assert_eq!(code, 0);
    assert_eq!(v["players"][0]["events"], serde_json::json!([["s1", "s2"], ["s3"]]));
    assert_eq!(v["players"][1]["events"], serde_json::json!([["s1"], ["s2"], ["s3"]]));
}

#[test]
fn refine_and_unfold() {
    let (code, v) = machine(&["refine", "friedenberg"]);
    assert_eq!(code, 0);
    assert_eq!(v["fixpoint"], 0);
    let (code, v) = machine(&["unfold", "friedenberg", "--player", "b", "--depth", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["prefixes"]["t_b"]["order"], 3);
    assert_eq!(cli(&["unfold", "friedenberg", "--player", "c", "--depth", "1"]).code, 2);
    assert_eq!(cli(&["unfold", "friedenberg", "--player", "a", "--depth", "0"]).code, 2);
}

#[test]
fn input_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    assert_eq!(cli(&["frobnicate"]).code, 2);
    assert_eq!(cli(&["validate", "friedenberg", "--bogus"]).code, 2);
    assert_eq!(cli(&["validate", "no/such/file.json"]).code, 2);
    let syntax = write(&dir, "syntax.json", "{\n  \"format_version\": \"1\",\n  oops\n}");
    let out = cli(&["validate", &syntax]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("line 3"), "{}", out.stderr);
    let zero = write(&dir, "zero.json", &fixtures::REDUNDANT_PAIR.replacen("1/1", "3/0", 1));
    let out = cli(&["validate", &zero]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("denominator"), "{}", out.stderr);
    let label = write(&dir, "label.json", &fixtures::REDUNDANT_PAIR.replacen("(s,t_b)", "(s,t_c)", 1));
    let out = cli(&["validate", &label]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("t_c"), "{}", out.stderr);
    assert_eq!(cli(&["--help"]).code, 0);
}

#[test]
fn output_is_deterministic() {
    for args in [
        vec!["completeness", "friedenberg", "--format", "machine"],
        vec!["unfold", "friedenberg", "--player", "a", "--depth", "3", "--format", "machine"],
        vec!["extend", "friedenberg", "--player", "b", "--type", "t_b", "--order", "3"],
        vec!["refine", "friedenberg"],
    ] {
        assert_eq!(cli(&args), cli(&args));
    }
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_condbelief");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap();
    let out = status(&["validate", "friedenberg"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "valid structure\n");
    assert_eq!(status(&["redundancy", "friedenberg"]).status.code(), Some(1));
    assert_eq!(status(&["nonsense"]).status.code(), Some(2));
}
