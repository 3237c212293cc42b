mod common;

use common::*;
use qmac_core::channels::library;
use qmac_core::CompoundSet;

fn corners(path: &std::path::Path) -> Vec<(f64, f64)> {
    read_csv(path).iter().map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap())).collect()
}

fn region_csv(dir: &std::path::Path, input: &std::path::Path, name: &str, budget: &str) -> Vec<(f64, f64)> {
    let csv = dir.join(name);
    qmac_ok(&["region", "--input", s(input), "--budget", budget, "--out-csv", s(&csv)]);
    corners(&csv)
}

#[test]
fn identity_region_reaches_one_one() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_set(dir.path(), "id.json", &CompoundSet::singleton(identity_qmac()));
    let c = region_csv(dir.path(), &input, "id.csv", "20");
    assert!(c.iter().any(|&(a, b)| a >= 0.98 && b >= 0.98), "{c:?}");
    assert!(c.iter().all(|&(a, b)| a <= 1.0 + 1e-7 && b <= 1.0 + 1e-7));
}

#[test]
fn fully_depolarizing_region_is_origin() {
    let dir = tempfile::tempdir().unwrap();
    let t = library::depolarizing(4, 1.0).unwrap().with_dims(vec![2, 2], vec![4]).unwrap();
    let input = write_set(dir.path(), "dep.json", &CompoundSet::singleton(t));
    let c = region_csv(dir.path(), &input, "dep.csv", "5");
    assert!(c.iter().all(|&(a, b)| a < 1e-7 && b < 1e-7), "{c:?}");
}

#[test]
fn dephasing_member_kills_quantum_rate() {
    let dir = tempfile::tempdir().unwrap();
    let set = CompoundSet::new(vec![identity_qmac(), on_b(library::dephasing(0.5).unwrap())], vec!["id".into(), "dephase".into()]).unwrap();
    let input = write_set(dir.path(), "pair.json", &set);
    let c = region_csv(dir.path(), &input, "pair.csv", "10");
    assert!(c.iter().all(|&(_, b)| b <= 0.02), "{c:?}");
    assert!(c.iter().any(|&(a, _)| a >= 0.98), "{c:?}");
}

#[test]
fn csv_and_svg_agree() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_set(dir.path(), "pair.json", &dephasing_pair(0.1));
    let (csv, svg) = (dir.path().join("r.csv"), dir.path().join("r.svg"));
    qmac_ok(&["region", "--input", s(&input), "--budget", "5", "--out-csv", s(&csv), "--out-svg", s(&svg)]);
    let rows = read_csv(&csv);
    assert!(rows.iter().all(|r| r[2] == "pair"));
    let c = corners(&csv);
    assert!(!c.is_empty());
    assert!(c.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 > w[1].1), "{c:?}");

    let text = std::fs::read_to_string(&svg).unwrap();
    let doc = roxmltree::Document::parse(&text).expect("well-formed svg");
    let dots: Vec<(f64, f64)> = doc
        .descendants()
        .filter(|n| n.has_tag_name("circle"))
        .map(|n| (n.attribute("data-r1").unwrap().parse().unwrap(), n.attribute("data-r2").unwrap().parse().unwrap()))
        .collect();
    assert_eq!(dots, c);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_set(dir.path(), "pair.json", &dephasing_pair(0.1));
    let run = |k: usize| {
        let (csv, json) = (dir.path().join(format!("r{k}.csv")), dir.path().join(format!("r{k}.json")));
        qmac_ok(&["region", "--input", s(&input), "--budget", "4", "--seed", "9", "--out-csv", s(&csv), "--out-json", s(&json)]);
        (std::fs::read(csv).unwrap(), std::fs::read(json).unwrap())
    };
    assert_eq!(run(0), run(1));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    assert_eq!(qmac(&["region", "--input", s(&missing)]).status.code(), Some(2));

    let garbled = dir.path().join("bad.json");
    std::fs::write(&garbled, "{\"in_dims\": [2]").unwrap();
    assert_eq!(qmac(&["region", "--input", s(&garbled)]).status.code(), Some(2));

    let wrong_len = dir.path().join("short.json");
    std::fs::write(&wrong_len, r#"{"in_dims":[2],"out_dims":[2],"kraus":[[[1,0],[0,0],[0,0]]]}"#).unwrap();
    assert_eq!(qmac(&["region", "--input", s(&wrong_len)]).status.code(), Some(2));

    let leaky = dir.path().join("leaky.json");
    std::fs::write(&leaky, r#"{"in_dims":[1,2],"out_dims":[2],"kraus":[[[0.9,0],[0,0],[0,0],[0.9,0]]]}"#).unwrap();
    assert_eq!(qmac(&["region", "--input", s(&leaky)]).status.code(), Some(3));

    let input = write_set(dir.path(), "id.json", &CompoundSet::singleton(identity_qmac()));
    let out = qmac(&["region", "--input", s(&input), "--l", "4", "--budget", "1"]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));

    assert_eq!(qmac(&["region", "--input", s(&input), "--weights", "1"]).status.code(), Some(2));
    assert_eq!(qmac(&["verify", "--suite", "no-such-suite"]).status.code(), Some(2));
    assert_eq!(qmac(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn identity_simulation_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_set(dir.path(), "id.json", &CompoundSet::singleton(identity_qmac()));
    let json = dir.path().join("sim.json");
    qmac_ok(&["simulate", "--input", s(&input), "--n", "1", "--m1", "1", "--m2", "2", "--seeds", "3", "--p", "1,0", "--out-json", s(&json)]);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(json).unwrap()).unwrap();
    let best = v["trend"][0]["best_performance"].as_f64().unwrap();
    let worst = v["trend"][0]["worst_performance"].as_f64().unwrap();
    assert!((best - 1.0).abs() < 1e-12 && (worst - 1.0).abs() < 1e-12, "{v}");
    assert_eq!(v["trend"][0]["chain_violations"], 0);
}

#[test]
fn verify_passes_and_can_be_forced_to_fail() {
    let dir = tempfile::tempdir().unwrap();
    for seed in ["0", "5"] {
        let out = qmac(&["verify", "--seed", seed, "--instances", "40"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let log = String::from_utf8_lossy(&out.stderr).to_string();
        assert_eq!(log.lines().filter(|l| l.starts_with("PASS")).count(), 6, "{log}");
    }
    let json = dir.path().join("v.json");
    let out = qmac(&["verify", "--suite", "gentle-measurement", "--instances", "20", "--tolerance", "0", "--slack", "0", "--out-json", s(&json)]);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(json).unwrap()).unwrap();
    assert_eq!(v[0]["passed"], false);
    assert!(v[0]["worst_margin"].as_f64().unwrap() < 0.0);
}

#[test]
fn net_thins_duplicates() {
    let dir = tempfile::tempdir().unwrap();
    let set = CompoundSet::new(vec![identity_qmac(), identity_qmac(), on_b(library::dephasing(0.5).unwrap())], vec!["a".into(), "b".into(), "c".into()]).unwrap();
    let input = write_set(dir.path(), "three.json", &set);
    let json = dir.path().join("net.json");
    qmac_ok(&["net", "--input", s(&input), "--theta", "0.01", "--out-json", s(&json)]);
    let thinned = qmac_core::channels::json::load_compound(&json).unwrap();
    assert_eq!(thinned.labels(), ["a".to_string(), "c".to_string()]);
}
